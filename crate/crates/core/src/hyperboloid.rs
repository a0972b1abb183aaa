//! Delta-restricted geometry of products of one-sided waves: the support
//! set of the sheet convolutions, the bilinear pairing B(rho, tau) reduced
//! to a single radial integral, the closed form of the measure
//! self-convolution, the Cauchy-Schwarz weight constant, Lorentz boosts,
//! and a mollified-delta oracle used to cross-check the reduction.

use crate::error::{Error, Result};
use crate::kernel::{phi, sphere_measure, Dimension, Mass};
use crate::profile::RadialProfile;
use crate::quadrature::{integrate_2d, integrate_axis, AxisSpec, QuadratureConfig, QuadratureResult};
use std::sync::Arc;

/// Below this radius the pairing is routed to the exact point-mass branch;
/// the 1/rho Jacobian is removable but numerically hostile.
const RHO_EPS: f64 = 1e-8;

/// A space-time frequency by radial symmetry: rho = |xi| >= 0 and tau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub rho: f64,
    pub tau: f64,
}

impl SpectralPoint {
    pub fn new(rho: f64, tau: f64) -> Self {
        assert!(rho >= 0.0 && rho.is_finite() && tau.is_finite());
        SpectralPoint { rho, tau }
    }

    /// The Lorentz invariant tau^2 - rho^2.
    pub fn invariant(&self) -> f64 {
        self.tau * self.tau - self.rho * self.rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Which sheet each factor lives on: +1 the upper hyperboloid, -1 the lower.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SheetSigns {
    pub eps1: Sign,
    pub eps2: Sign,
}

impl SheetSigns {
    pub const BOTH_PLUS: SheetSigns = SheetSigns {
        eps1: Sign::Plus,
        eps2: Sign::Plus,
    };
    pub const BOTH_MINUS: SheetSigns = SheetSigns {
        eps1: Sign::Minus,
        eps2: Sign::Minus,
    };
    pub const MIXED: SheetSigns = SheetSigns {
        eps1: Sign::Plus,
        eps2: Sign::Minus,
    };

    pub fn is_mixed(&self) -> bool {
        self.eps1 != self.eps2
    }
}

/// True iff `p` lies in the support region of the (signs)-sheet
/// convolution: tau >= sqrt(4s^2 + rho^2) for (+,+), the mirror image for
/// (-,-), and |tau| <= sqrt(4s^2 + rho^2) for mixed sheets.
pub fn support_check(_d: Dimension, s: Mass, p: SpectralPoint, signs: SheetSigns) -> bool {
    let sv = s.value();
    let edge = (4.0 * sv * sv + p.rho * p.rho).sqrt();
    match (signs.eps1, signs.eps2) {
        (Sign::Plus, Sign::Plus) => p.tau >= edge,
        (Sign::Minus, Sign::Minus) => p.tau <= -edge,
        _ => p.tau.abs() <= edge,
    }
}

/// A delta-restricted bilinear form: radial weights on two (signed) sheets
/// plus an optional reduced-coordinate kernel factor (r1, r2, cos) -> w.
#[derive(Clone)]
pub struct DeltaPairing {
    pub d: Dimension,
    pub s: Mass,
    pub signs: SheetSigns,
    pub w1: RadialProfile,
    pub w2: RadialProfile,
    extra_kernel: Option<Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>>,
}

impl DeltaPairing {
    pub fn new(d: Dimension, s: Mass, signs: SheetSigns, w1: RadialProfile, w2: RadialProfile) -> Self {
        assert!(d.get() >= 2, "the pairing is defined for d >= 2");
        DeltaPairing {
            d,
            s,
            signs,
            w1,
            w2,
            extra_kernel: None,
        }
    }

    pub fn with_extra_kernel(
        mut self,
        k: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.extra_kernel = Some(Arc::new(k));
        self
    }

    /// Decay scale of the product weight, used as a truncation hint.
    fn decay_scale(&self) -> f64 {
        let d1 = self.w1.decay_scale;
        let d2 = self.w2.decay_scale;
        (d1 * d2 / (d1 + d2)).max(1e-3)
    }

    #[inline]
    fn kernel_at(&self, r: f64, q: f64, ck: f64) -> f64 {
        match &self.extra_kernel {
            Some(k) => k(r, q, ck),
            None => 1.0,
        }
    }
}

/// Admissible radial integration range for the reduced pairing.
#[derive(Debug, Clone, Copy)]
struct RadialDomain {
    lo: f64,
    hi: Option<f64>,
}

/// sign(1 - c^2) without the 1/(2 rho r)^2 division, where c is the cosine
/// of the angle between y1 and xi forced by the two delta constraints.
fn angular_slack(s: Mass, rho: f64, tau: f64, r: f64) -> f64 {
    let phi_r = phi(s, r);
    // r^2 - q^2 = tau (2 phi - tau), exact on the constraint (eps1 = +1).
    let r2_minus_q2 = tau * (2.0 * phi_r - tau);
    let x = rho * rho + r2_minus_q2;
    let two_rho_r = 2.0 * rho * r;
    (two_rho_r - x) * (two_rho_r + x)
}

/// Whether r is inside the region where the temporal constraint is
/// solvable, i.e. eps2 (tau - eps1 phi(r)) >= s.
fn temporal_ok(s: Mass, signs: SheetSigns, tau: f64, r: f64) -> bool {
    let e2 = signs.eps2.value() * (tau - signs.eps1.value() * phi(s, r));
    e2 >= s.value()
}

fn bisect_boundary(f: &dyn Fn(f64) -> f64, mut neg: f64, mut pos: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (neg + pos);
        if (pos - neg).abs() <= 1e-12 * mid.abs().max(1.0) {
            return mid;
        }
        if f(mid) > 0.0 {
            pos = mid;
        } else {
            neg = mid;
        }
    }
    0.5 * (neg + pos)
}

/// Locates the admissible r-interval by bisection on the angular slack,
/// after normalising the sheet signs so that eps1 = +circle.
fn admissible_domain(s: Mass, signs: SheetSigns, p: SpectralPoint) -> Option<RadialDomain> {
    let sv = s.value();
    let rho = p.rho;
    let tau = p.tau;
    debug_assert!(rho > 0.0);
    debug_assert!(signs.eps1 == Sign::Plus, "caller normalises eps1");

    let slack = |r: f64| -> f64 {
        if !temporal_ok(s, signs, tau, r) {
            return -1.0;
        }
        angular_slack(s, rho, tau, r)
    };

    if !signs.is_mixed() {
        // (+,+): a bounded interval inside [0, rmax], rmax from phi <= tau - s.
        if tau <= 0.0 {
            return None;
        }
        let m2 = tau * tau - rho * rho;
        if m2 <= 4.0 * sv * sv {
            return None;
        }
        let rmax = (tau * (tau - 2.0 * sv)).sqrt();
        // Two-body endpoints |rho/2 +- D| give an interior midpoint seed.
        let d_half = 0.5 * tau * ((m2 - 4.0 * sv * sv) / m2).sqrt();
        let lo_seed = (0.5 * rho - d_half).abs();
        let hi_seed = 0.5 * rho + d_half;
        let mut mid = 0.5 * (lo_seed + hi_seed);
        if slack(mid) <= 0.0 {
            // Seed failed (degenerate geometry); scan for an interior point.
            let mut best = None;
            for i in 1..512 {
                let r = rmax * (i as f64) / 512.0;
                if slack(r) > 0.0 {
                    best = Some(r);
                    break;
                }
            }
            mid = best?;
        }
        let lo = bisect_boundary(&slack, 0.0, mid);
        let hi = bisect_boundary(&slack, rmax, mid);
        Some(RadialDomain { lo, hi: Some(hi) })
    } else {
        // (+,-): empty unless |tau| < rho, then a single ray [r_lo, oo).
        if tau.abs() >= rho {
            return None;
        }
        let r0 = if tau <= 0.0 {
            0.0
        } else {
            (tau * (tau + 2.0 * sv)).sqrt()
        };
        if slack(r0 + 1e-14 * r0.abs().max(1.0)) > 0.0 {
            return Some(RadialDomain { lo: r0, hi: None });
        }
        let mut pos = (rho + tau.abs() + sv + 1.0).max(2.0 * r0 + 1.0);
        let mut tries = 0;
        while slack(pos) <= 0.0 {
            pos *= 2.0;
            tries += 1;
            if tries > 64 {
                return None;
            }
        }
        let lo = bisect_boundary(&slack, r0, pos);
        Some(RadialDomain { lo, hi: None })
    }
}

/// Exact single-point branch at rho = 0: the spatial delta forces
/// y2 = -y1, leaving one radial root r* with phi(r*) = |tau|/2.
fn point_mass_branch(pairing: &DeltaPairing, tau: f64) -> f64 {
    if pairing.signs.is_mixed() {
        return 0.0;
    }
    let tau = match pairing.signs.eps1 {
        Sign::Plus => tau,
        Sign::Minus => -tau,
    };
    let sv = pairing.s.value();
    if tau <= 2.0 * sv {
        return 0.0;
    }
    let rstar2 = (0.5 * tau - sv) * (0.5 * tau + sv);
    if rstar2 <= 0.0 {
        return 0.0;
    }
    let rstar = rstar2.sqrt();
    let d = pairing.d.get();
    sphere_measure(pairing.d)
        * rstar.powi(d as i32 - 2)
        * (0.5 * tau)
        * pairing.w1.eval(rstar)
        * pairing.w2.eval(rstar)
        * pairing.kernel_at(rstar, rstar, -1.0)
        / 2.0
}

/// Evaluates the delta-restricted pairing B(rho, tau).
///
/// The spatial delta is removed by integrating y2 = xi - y1 and the
/// temporal delta then fixes |y2| = q*(r) analytically, leaving a single
/// radial integral with the delta Jacobian phi(q*) and the angular factor
/// |S^{d-2}| (1 - c^2)^{(d-3)/2}.
pub fn delta_pairing_eval(
    pairing: &DeltaPairing,
    p: SpectralPoint,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !support_check(pairing.d, pairing.s, p, pairing.signs) {
        return Ok(0.0);
    }
    if p.rho < RHO_EPS {
        return Ok(point_mass_branch(pairing, p.tau));
    }

    // Normalise eps1 = +1 by the tau -> -tau symmetry of the deltas.
    let (signs, tau) = match pairing.signs.eps1 {
        Sign::Plus => (pairing.signs, p.tau),
        Sign::Minus => (
            SheetSigns {
                eps1: Sign::Plus,
                eps2: pairing.signs.eps2.flipped(),
            },
            -p.tau,
        ),
    };
    let rho = p.rho;
    let s = pairing.s;
    let sv = s.value();
    let d = pairing.d.get() as i32;
    let df = pairing.d.as_f64();
    let ang_exp = 0.5 * (df - 3.0);
    let prefactor = sphere_measure(Dimension::new(pairing.d.get() - 1)) / rho;

    let domain = match admissible_domain(s, signs, SpectralPoint::new(rho, tau)) {
        Some(dom) => dom,
        None => return Ok(0.0),
    };

    let eps2 = signs.eps2.value();
    let common = move |r: f64, one_minus_c2: f64, pairing: &DeltaPairing| -> f64 {
        if one_minus_c2 <= 0.0 {
            return 0.0;
        }
        let phi_r = phi(s, r);
        let e2 = eps2 * (tau - phi_r);
        if e2 < sv {
            return 0.0;
        }
        let q2 = (e2 - sv) * (e2 + sv);
        let q = q2.max(0.0).sqrt();
        let ang = one_minus_c2.powf(ang_exp);
        let ck = if q > 0.0 {
            ((rho * rho - r * r - q2) / (2.0 * r * q)).clamp(-1.0, 1.0)
        } else {
            -1.0
        };
        pairing.w1.eval(r) * pairing.w2.eval(q) * pairing.kernel_at(r, q, ck)
            * ang
            * e2
            * r.powi(d - 2)
    };

    // Angular factor is a half-integer power for even d; declare it.
    let declare = pairing.d.get() % 2 == 0;
    let result: QuadratureResult = match domain.hi {
        Some(hi) => {
            // On the bounded sheet 1 - c^2 factors exactly through the
            // endpoint roots, which keeps it accurate where the plain
            // difference formula cancels.
            let m2 = tau * tau - rho * rho;
            let lo2 = domain.lo * domain.lo;
            let hi2 = hi * hi;
            let integrand = |r: f64| -> f64 {
                let phi_r = phi(s, r);
                let d1 = 2.0 * tau * phi_r + 2.0 * rho * r + m2;
                let d2 = 2.0 * tau * phi_r - 2.0 * rho * r + m2;
                let r2 = r * r;
                let one_minus_c2 = 16.0 * m2 * m2 * (r2 - lo2) * (hi2 - r2)
                    / (d1 * d2 * 4.0 * rho * rho * r2);
                common(r, one_minus_c2, pairing)
            };
            let mut spec = AxisSpec::finite(domain.lo, hi);
            if declare {
                spec = spec.with_left_exponent(ang_exp).with_right_exponent(ang_exp);
            }
            integrate_axis(integrand, &spec, cfg)?
        }
        None => {
            let integrand = |r: f64| -> f64 {
                let phi_r = phi(s, r);
                let x = rho * rho + tau * (2.0 * phi_r - tau);
                let two_rho_r = 2.0 * rho * r;
                let one_minus_c2 =
                    ((two_rho_r - x) * (two_rho_r + x)) / (two_rho_r * two_rho_r);
                common(r, one_minus_c2, pairing)
            };
            let scale = pairing.decay_scale();
            let split = domain.lo + scale;
            let mut head = AxisSpec::finite(domain.lo, split);
            if declare {
                head = head.with_left_exponent(ang_exp);
            }
            let head_res = integrate_axis(integrand, &head, cfg)?;
            let tail = AxisSpec::semi_infinite(split).with_decay_scale(scale);
            let tail_res = integrate_axis(integrand, &tail, cfg)?;
            QuadratureResult {
                value: head_res.value + tail_res.value,
                error_estimate: head_res.error_estimate + tail_res.error_estimate,
                subdivisions_used: head_res.subdivisions_used + tail_res.subdivisions_used,
                converged: head_res.converged && tail_res.converged,
            }
        }
    };
    if !result.converged {
        return Err(Error::NonConvergence {
            context: format!(
                "delta pairing at (rho, tau) = ({rho}, {tau}), error {:.3e}",
                result.error_estimate
            ),
        });
    }
    Ok(prefactor * result.value)
}

/// Closed form of the sheet-measure self-convolution on the (+,+) support:
/// |S^{d-1}| / 2^{d-2} (tau^2 - rho^2 - 4 s^2)^{(d-2)/2} (tau^2 - rho^2)^{-1/2},
/// and 0 outside. Depends on the point only through tau^2 - rho^2.
pub fn conv_closed_form(d: Dimension, s: Mass, p: SpectralPoint) -> f64 {
    if p.tau < 0.0 {
        return 0.0;
    }
    let m2 = p.invariant();
    let sv = s.value();
    let arg = m2 - 4.0 * sv * sv;
    if arg < 0.0 || m2 <= 0.0 {
        return 0.0;
    }
    let df = d.as_f64();
    sphere_measure(d) / 2f64.powf(df - 2.0) * arg.powf(0.5 * (df - 2.0)) / m2.sqrt()
}

/// The Cauchy-Schwarz weight integral: the pairing of 1/phi x 1/phi
/// against 1/K_s. Equals |S^{d-1}| 2^{-(d-1)/2} at every interior point.
pub fn cs_weight_integral(
    d: Dimension,
    s: Mass,
    p: SpectralPoint,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let sv = s.value();
    let edge = (4.0 * sv * sv + p.rho * p.rho).sqrt();
    if p.tau - edge < 1e-6 * p.tau.abs().max(1.0) {
        return Err(Error::BoundaryTooClose {
            rho: p.rho,
            tau: p.tau,
            rel: 1e-6,
        });
    }
    let inv_phi = |label: &str| {
        RadialProfile::new(label, 1.0, move |r| 1.0 / phi(s, r))
    };
    let df = d.as_f64();
    let half_dm2 = 0.5 * (df - 2.0);
    let s2 = sv * sv;
    let pairing = DeltaPairing::new(d, s, SheetSigns::BOTH_PLUS, inv_phi("1/phi"), inv_phi("1/phi"))
        .with_extra_kernel(move |r1, r2, c| {
            // 1/K_s in reduced coordinates; the base is constant on the
            // delta set so no singularity is reachable for interior points.
            let base = phi(Mass::new(sv), r1) * phi(Mass::new(sv), r2) - r1 * r2 * c;
            let num = (base - s2).max(1e-300);
            (base + s2).sqrt() / num.powf(half_dm2)
        });
    delta_pairing_eval(&pairing, p, cfg)
}

/// A full space-time frequency (xi in R^d, tau), for Lorentz boosts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeFrequency {
    pub xi: Vec<f64>,
    pub tau: f64,
}

impl SpacetimeFrequency {
    pub fn new(xi: Vec<f64>, tau: f64) -> Self {
        assert!(!xi.is_empty());
        SpacetimeFrequency { xi, tau }
    }

    pub fn spatial_norm(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// tau^2 - |xi|^2, preserved by every boost.
    pub fn invariant(&self) -> f64 {
        self.tau * self.tau - self.xi.iter().map(|x| x * x).sum::<f64>()
    }
}

/// The one-parameter boost L^t along the first coordinate, |t| < 1.
pub fn lorentz_boost(p: &SpacetimeFrequency, t: f64) -> Result<SpacetimeFrequency> {
    if !(t.abs() < 1.0) {
        return Err(Error::BoostOutOfRange { t });
    }
    let gamma = 1.0 / (1.0 - t * t).sqrt();
    let mut xi = p.xi.clone();
    let xi1 = xi[0];
    xi[0] = (xi1 + t * p.tau) * gamma;
    let tau = (p.tau + t * xi1) * gamma;
    Ok(SpacetimeFrequency { xi, tau })
}

/// Rotates xi onto the first axis and boosts with t = -|xi|/tau, mapping a
/// point with tau > |xi| to (0, ..., 0, sqrt(tau^2 - |xi|^2)).
pub fn rest_frame_reduction(p: &SpacetimeFrequency) -> Result<SpacetimeFrequency> {
    let norm = p.spatial_norm();
    if p.tau <= norm {
        return Err(Error::Precondition {
            what: format!("rest-frame reduction needs tau > |xi|, got ({norm}, {})", p.tau),
        });
    }
    let mut xi = vec![0.0; p.xi.len()];
    xi[0] = norm;
    let rotated = SpacetimeFrequency { xi, tau: p.tau };
    lorentz_boost(&rotated, -norm / p.tau)
}

/// Result of the mollified-delta oracle: per-width values and the
/// Richardson extrapolation to width zero.
#[derive(Debug, Clone)]
pub struct MollifiedResult {
    pub value: f64,
    pub per_width: Vec<f64>,
    /// False when the successive differences fail to shrink, which flags
    /// an unreliable extrapolation.
    pub monotone: bool,
}

fn gaussian_bump(x: f64, h: f64) -> f64 {
    (-0.5 * x * x / (h * h)).exp() / (h * (2.0 * std::f64::consts::PI).sqrt())
}

/// Independent oracle for `delta_pairing_eval`: the temporal delta is
/// replaced by a Gaussian bump of width h, the (r, q) double integral is
/// evaluated with q free (no delta Jacobian), and the results are
/// Richardson-extrapolated in h^2 across the given widths.
pub fn mollified_delta_oracle(
    pairing: &DeltaPairing,
    p: SpectralPoint,
    widths: &[f64],
    cfg: &QuadratureConfig,
) -> Result<MollifiedResult> {
    if pairing.signs.is_mixed() {
        return Err(Error::Unsupported {
            what: "mollified oracle covers the one-sided sheets only".into(),
        });
    }
    if widths.len() < 2 || widths.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition {
            what: "widths must be strictly decreasing with at least two entries".into(),
        });
    }
    let tau = match pairing.signs.eps1 {
        Sign::Plus => p.tau,
        Sign::Minus => -p.tau,
    };

    let mut per_width = Vec::with_capacity(widths.len());
    for &h in widths {
        per_width.push(mollified_value(pairing, p.rho, tau, h, cfg)?);
    }

    let monotone = per_width
        .windows(3)
        .all(|w| (w[2] - w[1]).abs() <= (w[1] - w[0]).abs() + 1e-300);

    // Neville extrapolation in z = h^2 evaluated at z = 0.
    let mut table: Vec<f64> = per_width.clone();
    let z: Vec<f64> = widths.iter().map(|h| h * h).collect();
    let n = table.len();
    for level in 1..n {
        for i in 0..n - level {
            table[i] = (z[i] * table[i + 1] - z[i + level] * table[i])
                / (z[i] - z[i + level]);
        }
    }

    Ok(MollifiedResult {
        value: table[0],
        per_width,
        monotone,
    })
}

/// One mollified evaluation at fixed width for the (+,+) sheet
/// (tau already reflected by the caller for (-,-)).
fn mollified_value(
    pairing: &DeltaPairing,
    rho: f64,
    tau: f64,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let s = pairing.s;
    let sv = s.value();
    let d = pairing.d.get() as i32;
    let df = pairing.d.as_f64();
    let ang_exp = 0.5 * (df - 3.0);
    let window = 10.0 * h;

    if rho < RHO_EPS {
        // xi = 0 pins y2 = -y1; a single mollified radial integral remains.
        let lo_phi = 0.5 * (tau - window).max(2.0 * sv);
        let hi_phi = 0.5 * (tau + window);
        if hi_phi <= sv {
            return Ok(0.0);
        }
        let r_lo = ((lo_phi - sv).max(0.0) * (lo_phi + sv)).sqrt();
        let r_hi = ((hi_phi - sv).max(0.0) * (hi_phi + sv)).sqrt();
        let measure = sphere_measure(pairing.d);
        let res = integrate_axis(
            |r| {
                let pr = phi(s, r);
                measure
                    * r.powi(d - 1)
                    * pairing.w1.eval(r)
                    * pairing.w2.eval(r)
                    * pairing.kernel_at(r, r, -1.0)
                    * gaussian_bump(tau - 2.0 * pr, h)
            },
            &AxisSpec::finite(r_lo, r_hi),
            cfg,
        )?;
        return Ok(res.value);
    }

    let r_cap_phi = tau - sv + window;
    if r_cap_phi <= sv {
        return Ok(0.0);
    }
    let r_cap = ((r_cap_phi - sv) * (r_cap_phi + sv)).sqrt();
    let measure = sphere_measure(Dimension::new(pairing.d.get() - 1));

    let value = integrate_2d(
        |r, q| {
            let q2 = q * q;
            let num_lo = q2 - (rho - r) * (rho - r);
            let num_hi = (rho + r) * (rho + r) - q2;
            let one_minus_c2 = (num_lo * num_hi) / (2.0 * rho * r).powi(2);
            if one_minus_c2 <= 0.0 {
                return 0.0;
            }
            let ck = ((rho * rho - r * r - q2) / (2.0 * r * q)).clamp(-1.0, 1.0);
            measure
                * pairing.w1.eval(r)
                * pairing.w2.eval(q)
                * pairing.kernel_at(r, q, ck)
                * one_minus_c2.powf(ang_exp)
                * (q / rho)
                * r.powi(d - 2)
                * gaussian_bump(tau - phi(s, r) - phi(s, q), h)
        },
        &AxisSpec::finite(0.0, r_cap),
        |r| {
            let q_min = (rho - r).abs();
            let q_max = rho + r;
            let target = tau - phi(s, r);
            let hi_phi = target + window;
            if hi_phi <= sv {
                return AxisSpec::finite(0.0, 0.0);
            }
            let lo_phi = (target - window).max(sv);
            let w_lo = ((lo_phi - sv).max(0.0) * (lo_phi + sv)).sqrt();
            let w_hi = ((hi_phi - sv) * (hi_phi + sv)).sqrt();
            let lo = w_lo.max(q_min);
            let hi = w_hi.min(q_max);
            if hi <= lo {
                return AxisSpec::finite(0.0, 0.0);
            }
            let mut spec = AxisSpec::finite(lo, hi);
            if pairing.d.get() % 2 == 0 {
                let eps = 1e-12 * q_max.max(1.0);
                if lo <= q_min + eps {
                    spec = spec.with_left_exponent(ang_exp);
                }
                if hi >= q_max - eps {
                    spec = spec.with_right_exponent(ang_exp);
                }
            }
            spec
        },
        cfg,
    )?;
    Ok(value.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn inv_phi_profile(s: Mass) -> RadialProfile {
        RadialProfile::new("1/phi", 1.0, move |r| 1.0 / phi(s, r))
    }

    fn j_pairing(d: u32, s: f64) -> DeltaPairing {
        let s = Mass::new(s);
        DeltaPairing::new(
            Dimension::new(d),
            s,
            SheetSigns::BOTH_PLUS,
            inv_phi_profile(s),
            inv_phi_profile(s),
        )
    }

    fn interior_points(d: u32, s: f64, n: usize, seed: u64) -> Vec<SpectralPoint> {
        let _ = d;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let rho = rng.gen_range(0.05..2.5);
                let m2 = 4.0 * s * s + rng.gen_range(0.3..25.0);
                SpectralPoint::new(rho, (rho * rho + m2).sqrt())
            })
            .collect()
    }

    #[test]
    fn support_examples() {
        let d = Dimension::new(5);
        let s = Mass::new(1.0);
        assert!(support_check(d, s, SpectralPoint::new(0.0, 3.0), SheetSigns::BOTH_PLUS));
        assert!(!support_check(d, s, SpectralPoint::new(0.0, 1.9), SheetSigns::BOTH_PLUS));
        assert!(support_check(d, s, SpectralPoint::new(1.0, 0.0), SheetSigns::MIXED));
        assert!(support_check(d, s, SpectralPoint::new(0.0, -3.0), SheetSigns::BOTH_MINUS));
        assert!(!support_check(d, s, SpectralPoint::new(0.0, 3.0), SheetSigns::BOTH_MINUS));
    }

    #[test]
    fn point_mass_branch_matches_closed_form() {
        let cfg = QuadratureConfig::default();
        // d = 5, s = 1, (0, 3): |S^4| 5^{3/2} / 24.
        let b = delta_pairing_eval(&j_pairing(5, 1.0), SpectralPoint::new(0.0, 3.0), &cfg).unwrap();
        let exact = sphere_measure(Dimension::new(5)) * 5f64.powf(1.5) / 24.0;
        assert!((b - exact).abs() < 1e-12 * exact);
        assert!((b - 12.2606).abs() < 1e-3);
        assert!(
            (b - conv_closed_form(Dimension::new(5), Mass::new(1.0), SpectralPoint::new(0.0, 3.0)))
                .abs()
                < 1e-12 * exact
        );

        // d = 2, s = 0, (0, 2): pi.
        let b = delta_pairing_eval(&j_pairing(2, 0.0), SpectralPoint::new(0.0, 2.0), &cfg).unwrap();
        assert!((b - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn pairing_matches_closed_form_on_interior_points() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-9);
        for &(d, s) in &[(2u32, 1.0f64), (2, 2.0), (3, 0.0), (3, 1.0), (3, 2.0), (5, 0.0), (5, 1.0), (5, 2.0)] {
            for p in interior_points(d, s, 6, 1000 + d as u64 + (s as u64) * 7) {
                let got = delta_pairing_eval(&j_pairing(d, s), p, &cfg).unwrap();
                let want = conv_closed_form(Dimension::new(d), Mass::new(s), p);
                assert!(
                    (got - want).abs() <= 1e-6 * want.abs().max(1e-12),
                    "d={d} s={s} p={p:?}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn pairing_is_zero_off_support() {
        let cfg = QuadratureConfig::default();
        let pair = j_pairing(5, 1.0);
        for p in [
            SpectralPoint::new(0.5, 1.9),
            SpectralPoint::new(3.0, 3.0),
            SpectralPoint::new(0.0, -4.0),
        ] {
            assert!(!support_check(pair.d, pair.s, p, pair.signs));
            assert_eq!(delta_pairing_eval(&pair, p, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn closed_form_examples() {
        // Lorentz invariance: equal tau^2 - rho^2 gives equal values.
        let d = Dimension::new(5);
        let s = Mass::new(1.0);
        let a = conv_closed_form(d, s, SpectralPoint::new(0.0, 3.0));
        let b = conv_closed_form(d, s, SpectralPoint::new(1.0, 10f64.sqrt()));
        assert!((a - b).abs() < 1e-12 * a);

        // Boundary of the support for d = 3.
        let z = conv_closed_form(Dimension::new(3), Mass::new(1.0), SpectralPoint::new(0.0, 2.0));
        assert_eq!(z, 0.0);
    }

    #[test]
    fn pairing_depends_only_on_invariant() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-10);
        let pair = j_pairing(3, 1.0);
        let p1 = SpectralPoint::new(0.3, (0.09f64 + 9.0).sqrt());
        let p2 = SpectralPoint::new(1.7, (1.7f64 * 1.7 + 9.0).sqrt());
        let b1 = delta_pairing_eval(&pair, p1, &cfg).unwrap();
        let b2 = delta_pairing_eval(&pair, p2, &cfg).unwrap();
        assert!((b1 - b2).abs() <= 1e-8 * b1.abs());
    }

    #[test]
    fn cs_weight_examples() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-9);
        let cases = [
            (5u32, 1.0f64, 0.0f64, 3.0f64, 4.0f64),
            (2, 1.0, 0.5, 4.0, 2f64.sqrt()),
            (3, 0.0, 1.0, 2.0, 2.0),
        ];
        for &(d, s, rho, tau, denom) in &cases {
            let got = cs_weight_integral(
                Dimension::new(d),
                Mass::new(s),
                SpectralPoint::new(rho, tau),
                &cfg,
            )
            .unwrap();
            let want = sphere_measure(Dimension::new(d)) / denom;
            assert!(
                (got - want).abs() <= 1e-6 * want,
                "d={d} s={s}: {got} vs {want}"
            );
        }
        // |S^4|/4 numerically.
        let got = cs_weight_integral(
            Dimension::new(5),
            Mass::new(1.0),
            SpectralPoint::new(0.0, 3.0),
            &cfg,
        )
        .unwrap();
        assert!((got - 6.5797).abs() < 1e-3);
    }

    #[test]
    fn cs_weight_is_constant_across_points() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-9);
        for &(d, s) in &[(2u32, 1.0f64), (3, 1.0), (5, 2.0)] {
            let want = sphere_measure(Dimension::new(d)) * 2f64.powf(-0.5 * (d as f64 - 1.0));
            for p in interior_points(d, s, 5, 77 + d as u64) {
                let got = cs_weight_integral(Dimension::new(d), Mass::new(s), p, &cfg).unwrap();
                assert!(
                    (got - want).abs() <= 1e-6 * want,
                    "d={d} s={s} {p:?}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn cs_weight_refuses_boundary() {
        let cfg = QuadratureConfig::default();
        let p = SpectralPoint::new(0.0, 2.0 + 1e-9);
        assert!(cs_weight_integral(Dimension::new(5), Mass::new(1.0), p, &cfg).is_err());
    }

    #[test]
    fn on_support_identity_holds_at_quadrature_nodes() {
        // phi phi' - r q c + s^2 = (tau^2 - rho^2)/2 at every generated node.
        let cfg = QuadratureConfig::default();
        let s = Mass::new(1.0);
        let p = SpectralPoint::new(0.8, 3.7);
        let m2 = p.invariant();
        let nodes = std::sync::Arc::new(std::sync::Mutex::new(Vec::new()));
        let sink = std::sync::Arc::clone(&nodes);
        let pairing = DeltaPairing::new(
            Dimension::new(5),
            s,
            SheetSigns::BOTH_PLUS,
            inv_phi_profile(s),
            inv_phi_profile(s),
        )
        .with_extra_kernel(move |r, q, c| {
            sink.lock().unwrap().push((r, q, c));
            1.0
        });
        let _ = delta_pairing_eval(&pairing, p, &cfg).unwrap();
        let recorded = nodes.lock().unwrap();
        assert!(recorded.len() >= 15);
        for &(r, q, c) in recorded.iter() {
            let lhs = phi(s, r) * phi(s, q) - r * q * c + 1.0;
            assert!(
                (lhs - 0.5 * m2).abs() <= 1e-10 * (0.5 * m2).max(1.0),
                "node ({r}, {q}, {c}): {lhs} vs {}",
                0.5 * m2
            );
        }
    }

    #[test]
    fn boost_examples() {
        let p = SpacetimeFrequency::new(vec![1.0, 0.0, 0.0, 0.0, 0.0], 10f64.sqrt());
        let q = lorentz_boost(&p, 0.0).unwrap();
        assert_eq!(q, p);

        let r = lorentz_boost(&p, -1.0 / 10f64.sqrt()).unwrap();
        assert!(r.xi[0].abs() < 1e-14);
        assert!((r.tau - 3.0).abs() < 1e-14);

        let reduced = rest_frame_reduction(&p).unwrap();
        assert!(reduced.xi.iter().all(|x| x.abs() < 1e-14));
        assert!((reduced.tau - 3.0).abs() < 1e-14);

        assert!(lorentz_boost(&p, 1.0).is_err());
    }

    #[test]
    fn mollified_oracle_matches_closed_form() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-7);
        let widths = [0.04, 0.02, 0.01];

        // The rho = 0 branch.
        let res = mollified_delta_oracle(
            &j_pairing(5, 1.0),
            SpectralPoint::new(0.0, 3.0),
            &widths,
            &cfg,
        )
        .unwrap();
        let want = conv_closed_form(Dimension::new(5), Mass::new(1.0), SpectralPoint::new(0.0, 3.0));
        assert!(
            (res.value - want).abs() <= 1e-3 * want,
            "{} vs {want}",
            res.value
        );

        // Interior points across dimensions.
        for &(d, s) in &[(2u32, 1.0f64), (3, 1.0), (5, 0.0)] {
            for p in interior_points(d, s, 2, 900 + d as u64) {
                let res =
                    mollified_delta_oracle(&j_pairing(d, s), p, &widths, &cfg).unwrap();
                let want = conv_closed_form(Dimension::new(d), Mass::new(s), p);
                assert!(
                    (res.value - want).abs() <= 1e-3 * want.abs().max(1e-9),
                    "d={d} s={s} {p:?}: {} vs {want}",
                    res.value
                );
            }
        }
    }

    #[test]
    fn mollified_oracle_vanishes_outside_support() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-7);
        // tau well below the support edge: only the Gaussian tail leaks in.
        let res = mollified_delta_oracle(
            &j_pairing(5, 1.0),
            SpectralPoint::new(0.5, 1.0),
            &[0.04, 0.02, 0.01],
            &cfg,
        )
        .unwrap();
        assert!(res.value.abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn boost_preserves_invariant(
            xi1 in -5.0f64..5.0,
            xi2 in -5.0f64..5.0,
            tau in -5.0f64..5.0,
            t in -0.95f64..0.95,
        ) {
            let p = SpacetimeFrequency::new(vec![xi1, xi2], tau);
            let q = lorentz_boost(&p, t).unwrap();
            prop_assert!((p.invariant() - q.invariant()).abs() <= 1e-10 * p.invariant().abs().max(1.0));
        }
    }
}
