//! Norms and both sides of the sharp estimates for radial profiles in
//! d >= 2: weighted physical L^2 norms, the Fourier-side Sobolev norm, the
//! quartic norm built from them, the bilinear left/right sides, Strichartz
//! quotients, and the split-data machinery for the full solution.
//!
//! Conventions are pinned once and asserted in tests: with
//! g^(xi) = \int g e^{-ix.xi} dx, physical norms carry (2 pi)^{-d} under
//! Plancherel while the Sobolev norm H^m is the plain Fourier-side weighted
//! L^2 with no (2 pi) factor.

use crate::error::{Error, Result};
use crate::hyperboloid::{
    delta_pairing_eval, support_check, DeltaPairing, SheetSigns, SpectralPoint,
};
use crate::kernel::{kernel_k, kg_constant, phi, sphere_measure, Dimension, KernelPoint, Mass};
use crate::profile::RadialProfile;
use crate::quadrature::{
    integrate_2d, integrate_3d, integrate_axis, AxisSpec, QuadratureConfig,
};

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn require_converged(
    res: crate::quadrature::QuadratureResult,
    context: &str,
) -> Result<f64> {
    if !res.converged {
        return Err(Error::NonConvergence {
            context: format!("{context} (error {:.3e})", res.error_estimate),
        });
    }
    Ok(res.value)
}

/// ||phi_s^beta f||_{L^2(R^d)} via the radial Fourier-side reduction
/// ((2 pi)^{-d} |S^{d-1}| \int phi^{2 beta} |f^|^2 r^{d-1} dr)^{1/2}.
pub fn l2_physical(
    d: Dimension,
    s: Mass,
    f: &RadialProfile,
    weight_exponent: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let dd = d.get() as i32;
    let spec = AxisSpec::semi_infinite(0.0).with_decay_scale(f.decay_scale);
    let res = integrate_axis(
        |r| {
            let v = f.eval(r);
            phi(s, r).powf(2.0 * weight_exponent) * v * v * r.powi(dd - 1)
        },
        &spec,
        cfg,
    )?;
    let val = require_converged(res, "weighted physical L2 norm")?;
    Ok((TAU.powi(-dd) * sphere_measure(d) * val).sqrt())
}

/// The Fourier-side Sobolev norm ||f||_{H^m} =
/// (|S^{d-1}| \int (1 + r^2)^m |f^|^2 r^{d-1} dr)^{1/2}, no (2 pi) factor.
pub fn hm_norm(f: &RadialProfile, d: Dimension, m: f64, cfg: &QuadratureConfig) -> Result<f64> {
    assert!(m >= 0.0);
    let dd = d.get() as i32;
    let spec = AxisSpec::semi_infinite(0.0).with_decay_scale(f.decay_scale);
    let res = integrate_axis(
        |r| {
            let v = f.eval(r);
            (1.0 + r * r).powf(m) * v * v * r.powi(dd - 1)
        },
        &spec,
        cfg,
    )?;
    let val = require_converged(res, "Sobolev norm")?;
    Ok((sphere_measure(d) * val).sqrt())
}

/// The three pieces of the quartic norm
/// ||f||_(s)^4 = ||phi_s f||^4_{L^2} - s^2 ||phi_s^{1/2} f||^4_{L^2}.
#[derive(Debug, Clone, Copy)]
pub struct NormSResult {
    /// ||phi_s(sqrt(-Lap)) f||^4_{L^2}.
    pub phi_norm4: f64,
    /// s^2 ||phi_s^{1/2}(sqrt(-Lap)) f||^4_{L^2}.
    pub half_norm4: f64,
    /// Their difference; nonnegative for admissible profiles.
    pub value4: f64,
}

pub fn norm_s(f: &RadialProfile, d: Dimension, s: Mass, cfg: &QuadratureConfig) -> Result<NormSResult> {
    let n1 = l2_physical(d, s, f, 1.0, cfg)?;
    let phi_norm4 = n1.powi(4);
    let half_norm4 = if s.is_zero() {
        0.0
    } else {
        let n2 = l2_physical(d, s, f, 0.5, cfg)?;
        s.value() * s.value() * n2.powi(4)
    };
    let value4 = phi_norm4 - half_norm4;
    if value4 < -1e-10 * phi_norm4.max(1e-300) {
        return Err(Error::InternalInconsistency {
            what: format!("quartic norm came out negative: {value4:.6e}"),
        });
    }
    Ok(NormSResult {
        phi_norm4,
        half_norm4,
        value4: value4.max(0.0),
    })
}

/// Right side of the bilinear estimate:
/// KG(d) |S^{d-1}| |S^{d-2}| \int |f1^|^2 |f2^|^2 phi phi' K_s
/// (1-c^2)^{(d-3)/2} r1^{d-1} r2^{d-1} dc dr2 dr1.
pub fn bilinear_rhs(
    d: Dimension,
    s: Mass,
    f1: &RadialProfile,
    f2: &RadialProfile,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if d.get() < 2 {
        return Err(Error::Unsupported {
            what: "bilinear forms are implemented for d >= 2".into(),
        });
    }
    if d.get() == 2 && s.is_zero() {
        return Err(Error::Unsupported {
            what: "(d = 2, s = 0) is outside the supported kernel range".into(),
        });
    }
    let dd = d.get() as i32;
    let df = d.as_f64();
    let ang_exp = 0.5 * (df - 3.0);
    let declare = d.get() % 2 == 0;
    let sv = s.value();
    let s2 = sv * sv;
    let half_dm2 = 0.5 * (df - 2.0);

    let res = integrate_3d(
        |r1, r2, c| {
            let v1 = f1.eval(r1);
            let v2 = f2.eval(r2);
            if v1 == 0.0 || v2 == 0.0 {
                return 0.0;
            }
            let pp = phi(s, r1) * phi(s, r2);
            let base = pp - r1 * r2 * c;
            let num = (base - s2).max(0.0);
            let k = num.powf(half_dm2) / (base + s2).sqrt();
            let ang = (1.0 - c * c).max(0.0).powf(ang_exp);
            v1 * v1 * v2 * v2 * pp * k * ang * r1.powi(dd - 1) * r2.powi(dd - 1)
        },
        &AxisSpec::semi_infinite(0.0).with_decay_scale(f1.decay_scale),
        |_| AxisSpec::semi_infinite(0.0).with_decay_scale(f2.decay_scale),
        |_, _| {
            let mut spec = AxisSpec::finite(-1.0, 1.0);
            if declare {
                spec = spec.with_left_exponent(ang_exp).with_right_exponent(ang_exp);
            }
            spec
        },
        cfg,
    )?;
    let val = require_converged(res, "bilinear right side")?;
    Ok(kg_constant(d) * sphere_measure(d) * sphere_measure(Dimension::new(d.get() - 1)) * val)
}

/// Left side of the bilinear estimate, through the space-time Fourier
/// transform: (2 pi)^{1-3d} |S^{d-1}| \int\int B(rho, tau)^2 rho^{d-1},
/// with B the delta pairing of the two profiles on the given sheets.
pub fn bilinear_lhs(
    d: Dimension,
    s: Mass,
    f1: &RadialProfile,
    f2: &RadialProfile,
    signs: SheetSigns,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if d.get() < 2 {
        return Err(Error::Unsupported {
            what: "bilinear forms are implemented for d >= 2".into(),
        });
    }
    let dd = d.get() as i32;
    let sv = s.value();
    let pairing = DeltaPairing::new(d, s, signs, f1.clone(), f2.clone());
    let pair_cfg = cfg.clone().with_rel_tol(0.2 * cfg.rel_tol);
    let decay = (f1.decay_scale * f2.decay_scale) / (f1.decay_scale + f2.decay_scale);

    let prefactor = TAU.powi(1 - 3 * dd) * sphere_measure(d);
    let b_squared = |rho: f64, tau: f64| -> Result<f64> {
        let b = delta_pairing_eval(&pairing, SpectralPoint::new(rho, tau), &pair_cfg)?;
        Ok(b * b)
    };

    let failure = std::cell::RefCell::new(None);
    let eval = |rho: f64, tau: f64| -> f64 {
        match b_squared(rho, tau) {
            Ok(v) => v,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    };

    let res = if !signs.is_mixed() {
        // One-sided sheets: tau runs over [2s, oo) up to reflection and
        // rho over the disc of radius sqrt(tau^2 - 4s^2).
        let reflect = matches!(signs.eps1, crate::hyperboloid::Sign::Minus);
        integrate_2d(
            |t, rho| {
                let tau = if reflect { -t } else { t };
                eval(rho, tau) * rho.powi(dd - 1)
            },
            &AxisSpec::semi_infinite(2.0 * sv).with_decay_scale(2.0 * decay),
            |t| {
                let arg = t * t - 4.0 * sv * sv;
                if arg <= 0.0 {
                    AxisSpec::finite(0.0, 0.0)
                } else {
                    AxisSpec::finite(0.0, arg.sqrt())
                }
            },
            cfg,
        )?
    } else {
        // Mixed sheets live inside |tau| <= rho (within the support region
        // of support_check); rho runs over [0, oo) against the weights.
        integrate_2d(
            |rho, tau| eval(rho, tau) * rho.powi(dd - 1),
            &AxisSpec::semi_infinite(0.0).with_decay_scale(2.0 * decay),
            |rho| AxisSpec::finite(-rho, rho),
            cfg,
        )?
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let val = require_converged(res, "bilinear left side")?;
    Ok(prefactor * val)
}

/// The inner-product moment \int\int |f^|^2 |f^|^2 phi phi' y1.y2, reduced
/// to radial coordinates. Zero for every radial profile; computed anyway
/// as a diagnostic (the c-moment of the angular measure vanishes).
pub fn dot_product_term(
    d: Dimension,
    s: Mass,
    f: &RadialProfile,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let dd = d.get() as i32;
    let df = d.as_f64();
    let ang_exp = 0.5 * (df - 3.0);
    let declare = d.get() % 2 == 0;

    // Magnitude proxy with |c| in place of c, to scale the absolute
    // tolerance of a result that cancels to zero.
    let weight = |r1: f64, r2: f64, cmag: f64| -> f64 {
        let v1 = f.eval(r1);
        let v2 = f.eval(r2);
        if v1 == 0.0 || v2 == 0.0 {
            return 0.0;
        }
        v1 * v1 * v2 * v2 * phi(s, r1) * phi(s, r2) * r1 * r2 * cmag
            * r1.powi(dd - 1)
            * r2.powi(dd - 1)
    };
    let outer = AxisSpec::semi_infinite(0.0).with_decay_scale(f.decay_scale);
    let mid = |_: f64| AxisSpec::semi_infinite(0.0).with_decay_scale(f.decay_scale);
    let inner = |_: f64, _: f64| {
        let mut spec = AxisSpec::finite(-1.0, 1.0);
        if declare {
            spec = spec.with_left_exponent(ang_exp).with_right_exponent(ang_exp);
        }
        spec
    };

    let proxy = integrate_3d(
        |r1, r2, c| weight(r1, r2, c.abs()) * (1.0 - c * c).max(0.0).powf(ang_exp),
        &outer,
        mid,
        inner,
        cfg,
    )?;
    let scaled_cfg = cfg
        .clone()
        .with_abs_tol(cfg.abs_tol.max(cfg.rel_tol * proxy.value.abs()));
    let res = integrate_3d(
        |r1, r2, c| weight(r1, r2, c) * (1.0 - c * c).max(0.0).powf(ang_exp),
        &outer,
        mid,
        inner,
        &scaled_cfg,
    )?;
    let val = require_converged(res, "inner-product moment")?;
    Ok(sphere_measure(d) * sphere_measure(Dimension::new(d.get() - 1)) * val)
}

/// The d = 1 version for a general (non-radial) function g on an interval:
/// \int\int g(x) g(y) x y dx dy = (\int x g)^2.
pub fn dot_product_term_d1(
    g: impl Fn(f64) -> f64,
    support: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let res = integrate_axis(|x| x * g(x), &AxisSpec::finite(support.0, support.1), cfg)?;
    let val = require_converged(res, "first moment")?;
    Ok(val * val)
}

/// Which sharp Strichartz estimate a quotient is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotientFlavor {
    /// d = 5, any s: denominator ||f||_(s)^4, sharp constant 1/(24 pi^2).
    SNorm,
    /// d in {2, 3}, s = 1: denominator ||f||_{H^{1/2}}^4.
    HHalf,
    /// d = 5, s = 1: denominator ||f||_{H^1}^4, sharp constant 1/(24 pi^2).
    H1,
}

/// The sharp constant bounding `strichartz_quotient` for the flavor.
pub fn sharp_constant(d: Dimension, flavor: QuotientFlavor) -> f64 {
    let pi = std::f64::consts::PI;
    match (flavor, d.get()) {
        (QuotientFlavor::SNorm, _) | (QuotientFlavor::H1, _) => 1.0 / (24.0 * pi * pi),
        (QuotientFlavor::HHalf, 2) => 2f64.powi(-5) * pi.powi(-4),
        (QuotientFlavor::HHalf, 3) => TAU.powi(-7),
        (QuotientFlavor::HHalf, other) => {
            panic!("no sharp H^{{1/2}} constant tabulated for d = {other}")
        }
    }
}

/// ||e^{it phi_s} f||^4_{L^4} divided by the flavor's fourth-power
/// denominator. Never exceeds the flavor's sharp constant.
pub fn strichartz_quotient(
    d: Dimension,
    s: Mass,
    f: &RadialProfile,
    flavor: QuotientFlavor,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    match flavor {
        QuotientFlavor::SNorm => {
            if d.get() != 5 {
                return Err(Error::Unsupported {
                    what: "the quartic-norm quotient is the d = 5 estimate".into(),
                });
            }
        }
        QuotientFlavor::HHalf => {
            if !(d.get() == 2 || d.get() == 3) || s.value() != 1.0 {
                return Err(Error::Unsupported {
                    what: "H^{1/2} quotients cover d in {2, 3} at s = 1".into(),
                });
            }
        }
        QuotientFlavor::H1 => {
            if d.get() != 5 || s.value() != 1.0 {
                return Err(Error::Unsupported {
                    what: "the H^1 quotient covers d = 5 at s = 1".into(),
                });
            }
        }
    }
    let numerator = bilinear_lhs(d, s, f, f, SheetSigns::BOTH_PLUS, cfg)?;
    let denominator = match flavor {
        QuotientFlavor::SNorm => norm_s(f, d, s, cfg)?.value4,
        QuotientFlavor::HHalf => hm_norm(f, d, 0.5, cfg)?.powi(4),
        QuotientFlavor::H1 => hm_norm(f, d, 1.0, cfg)?.powi(4),
    };
    if denominator <= 0.0 {
        return Err(Error::DegenerateInput {
            what: format!("zero denominator for profile '{}'", f.label),
        });
    }
    Ok(numerator / denominator)
}

/// Cauchy data for the d = 5 Klein-Gordon equation, Fourier side. `u0` is
/// the profile of u(0); `u1` stores the real profile v with
/// (d_t u)(0)^ = i v, so that both split profiles stay real.
#[derive(Clone, Debug)]
pub struct CauchyData {
    pub u0: RadialProfile,
    pub u1: RadialProfile,
}

/// Unique solution (f_+, f_-) of u(0) = f_+ + f_-,
/// (d_t u)(0) = i phi_1 (f_+ - f_-), pointwise in r on the Fourier side.
pub fn split_cauchy_data(data: &CauchyData) -> (RadialProfile, RadialProfile) {
    let one = Mass::new(1.0);
    let u0p = data.u0.clone();
    let u1p = data.u1.clone();
    let scale = data.u0.decay_scale.min(data.u1.decay_scale);
    let plus = RadialProfile::new(format!("f+[{}]", data.u0.label), scale, {
        let u0p = u0p.clone();
        let u1p = u1p.clone();
        move |r| 0.5 * (u0p.eval(r) + u1p.eval(r) / phi(one, r))
    });
    let minus = RadialProfile::new(format!("f-[{}]", data.u0.label), scale, move |r| {
        0.5 * (u0p.eval(r) - u1p.eval(r) / phi(one, r))
    });
    (plus, minus)
}

/// The three disjoint-support pieces of ||u||^4_{L^4} for the full d = 5
/// solution: ||u_+^2||^2 + ||u_-^2||^2 + 4 ||u_+ u_-||^2.
#[derive(Debug, Clone, Copy)]
pub struct FullSolutionL4 {
    pub plus_term: f64,
    pub minus_term: f64,
    pub mixed_term: f64,
    pub total: f64,
}

pub fn full_solution_l4(data: &CauchyData, cfg: &QuadratureConfig) -> Result<FullSolutionL4> {
    let d = Dimension::new(5);
    let s = Mass::new(1.0);
    let (fp, fm) = split_cauchy_data(data);
    let plus_term = bilinear_lhs(d, s, &fp, &fp, SheetSigns::BOTH_PLUS, cfg)?;
    let minus_term = bilinear_lhs(d, s, &fm, &fm, SheetSigns::BOTH_MINUS, cfg)?;
    // For real radial profiles the (-,-) term equals the (+,+) term of the
    // same profiles; the two evaluations must agree.
    let minus_check = bilinear_lhs(d, s, &fm, &fm, SheetSigns::BOTH_PLUS, cfg)?;
    let scale = minus_term.abs().max(minus_check.abs()).max(1e-300);
    if (minus_term - minus_check).abs() > 1e-6 * scale && minus_check > 1e-290 {
        return Err(Error::InternalInconsistency {
            what: format!(
                "(-,-) term {minus_term:.9e} disagrees with reflected (+,+) term {minus_check:.9e}"
            ),
        });
    }
    let mixed_term = bilinear_lhs(d, s, &fp, &fm, SheetSigns::MIXED, cfg)?;
    Ok(FullSolutionL4 {
        plus_term,
        minus_term,
        mixed_term,
        total: plus_term + minus_term + 4.0 * mixed_term,
    })
}

/// Both sides of the sharp polynomial inequality
/// X^2 + Y^2 + 4XY <= (3/2)(X + Y)^2 for nonnegative reals,
/// with equality iff X = Y.
pub fn poly_sharp(x: f64, y: f64) -> Result<(f64, f64)> {
    if x < 0.0 || y < 0.0 {
        return Err(Error::Precondition {
            what: format!("poly_sharp needs nonnegative inputs, got ({x}, {y})"),
        });
    }
    Ok((x * x + y * y + 4.0 * x * y, 1.5 * (x + y) * (x + y)))
}

/// Support-region guard re-exported for the outer integrations.
pub fn lhs_support_check(d: Dimension, s: Mass, p: SpectralPoint, signs: SheetSigns) -> bool {
    support_check(d, s, p, signs)
}

/// Convenience: the extremizer-family kernel weight used by equality
/// checks, K_s evaluated through the kernel module.
pub fn kernel_weight(d: Dimension, s: Mass, r1: f64, r2: f64, c: f64) -> Result<f64> {
    kernel_k(d, s, &KernelPoint::new(r1, r2, c))
}
