//! Adaptive numerical integration.
//!
//! The engine is an embedded Gauss(7)/Kronrod(15) pair with global
//! bisection refinement. Endpoint power singularities are removed by the
//! substitution x = a + u^2 (half-integer exponents become smooth), and
//! semi-infinite integrals are truncated where the integrand falls below a
//! relative threshold of its running peak. Iterated 2D/3D integrals nest
//! the 1D driver and propagate inner error estimates conservatively by
//! integrating them alongside the value.

use crate::error::{Error, Result};
use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerances and limits shared by all integration entry points.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Relative tolerance on the integral value.
    pub rel_tol: f64,
    /// Absolute tolerance floor.
    pub abs_tol: f64,
    /// Maximum number of interval bisections before giving up.
    pub max_subdivisions: usize,
    /// Semi-infinite truncation threshold, relative to the running peak.
    pub truncation_threshold: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
            truncation_threshold: 1e-16,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        assert!(rel_tol > 0.0);
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        assert!(abs_tol >= 0.0);
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        assert!(n >= 1);
        self.max_subdivisions = n;
        self
    }

    /// Tolerances for one inner level of iterated nesting: half the
    /// relative budget and pure relative control (an absolute floor would
    /// accumulate along the outer axis).
    fn inner_level(&self) -> Self {
        QuadratureConfig {
            rel_tol: 0.5 * self.rel_tol,
            abs_tol: 0.0,
            ..self.clone()
        }
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    /// A-posteriori bound on the absolute error.
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    /// True when `error_estimate <= max(rel_tol * |value|, abs_tol)`.
    pub converged: bool,
}

/// Domain of one integration axis.
#[derive(Debug, Clone, Copy)]
pub enum AxisBounds {
    Finite { lo: f64, hi: f64 },
    SemiInfinite { lo: f64 },
}

/// One axis of an (iterated) integral: bounds, declared endpoint power
/// exponents, and a decay-scale hint for tail truncation.
#[derive(Debug, Clone, Copy)]
pub struct AxisSpec {
    pub bounds: AxisBounds,
    pub left_exponent: Option<f64>,
    pub right_exponent: Option<f64>,
    pub decay_scale: f64,
}

impl AxisSpec {
    pub fn finite(lo: f64, hi: f64) -> Self {
        AxisSpec {
            bounds: AxisBounds::Finite { lo, hi },
            left_exponent: None,
            right_exponent: None,
            decay_scale: 1.0,
        }
    }

    pub fn semi_infinite(lo: f64) -> Self {
        AxisSpec {
            bounds: AxisBounds::SemiInfinite { lo },
            left_exponent: None,
            right_exponent: None,
            decay_scale: 1.0,
        }
    }

    /// Declare an integrable power singularity f ~ (x - lo)^e at the left endpoint.
    pub fn with_left_exponent(mut self, e: f64) -> Self {
        assert!(e > -1.0, "endpoint exponent must be > -1");
        self.left_exponent = Some(e);
        self
    }

    /// Declare an integrable power singularity f ~ (hi - x)^e at the right endpoint.
    pub fn with_right_exponent(mut self, e: f64) -> Self {
        assert!(e > -1.0, "endpoint exponent must be > -1");
        self.right_exponent = Some(e);
        self
    }

    pub fn with_decay_scale(mut self, scale: f64) -> Self {
        assert!(scale > 0.0 && scale.is_finite());
        self.decay_scale = scale;
        self
    }

    fn is_empty(&self) -> bool {
        match self.bounds {
            AxisBounds::Finite { lo, hi } => hi <= lo,
            AxisBounds::SemiInfinite { .. } => false,
        }
    }
}

// 15-point Kronrod nodes (positive half, descending) with the embedded
// 7-point Gauss rule at the odd indices. Standard QUADPACK DQK15 values.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// QUADPACK-style error rescaling from the raw Gauss/Kronrod difference.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// Coordinate map of one adaptive piece. Square maps absorb declared
/// endpoint power singularities: for f ~ (x-a)^e with half-integer e the
/// transformed integrand 2u f(a + u^2) is smooth in u.
#[derive(Debug, Clone, Copy)]
enum PieceMap {
    Identity,
    LeftSquare { anchor: f64 },
    RightSquare { anchor: f64 },
}

impl PieceMap {
    /// Maps the working coordinate u to (x, jacobian).
    #[inline]
    fn apply(self, u: f64) -> (f64, f64) {
        match self {
            PieceMap::Identity => (u, 1.0),
            PieceMap::LeftSquare { anchor } => (anchor + u * u, 2.0 * u),
            PieceMap::RightSquare { anchor } => (anchor - u * u, 2.0 * u),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    map: PieceMap,
    value: f64,
    aux: f64,
    mass: f64,
    resabs: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One G7/K15 application to `f` over [lo, hi] in the working coordinate
/// of `map`. The integrand returns (value, inner error, inner mass); the
/// two side channels are integrated with absolute values.
fn qk15<F>(f: &mut F, lo: f64, hi: f64, map: PieceMap) -> Result<Segment>
where
    F: FnMut(f64) -> Result<(f64, f64, f64)>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let mut eval = |u: f64| -> Result<(f64, f64, f64)> {
        let (x, jac) = map.apply(u);
        let (v, a, m) = f(x)?;
        if v.is_nan() || a.is_nan() {
            return Err(Error::NanIntegrand { abscissa: x });
        }
        Ok((v * jac, a * jac, m * jac))
    };

    let (fc, ac, mc) = eval(center)?;
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut resg = fc * WG[3];
    let mut aux = ac.abs() * WGK[7];
    let mut mass = mc.abs() * WGK[7];
    let mut fv = [0.0f64; 15];
    fv[7] = fc;

    for j in 0..7 {
        let u = half * XGK[j];
        let (f1, a1, m1) = eval(center - u)?;
        let (f2, a2, m2) = eval(center + u)?;
        fv[j] = f1;
        fv[14 - j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        aux += WGK[j] * (a1.abs() + a2.abs());
        mass += WGK[j] * (m1.abs() + m2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let err = rescale_error((resk - resg) * half, resabs * half, resasc * half);
    Ok(Segment {
        lo,
        hi,
        map,
        value: resk * half,
        aux: aux * half,
        mass: mass * half,
        resabs: resabs * half,
        err,
    })
}

/// Global adaptive driver over a set of initial pieces.
fn adapt<F>(
    f: &mut F,
    pieces: &[(f64, f64, PieceMap)],
    cfg: &QuadratureConfig,
) -> Result<(QuadratureResult, f64)>
where
    F: FnMut(f64) -> Result<(f64, f64, f64)>,
{
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut aux = 0.0;
    let mut rule_err = 0.0;
    let mut resabs = 0.0;
    let mut mass = 0.0;
    for &(lo, hi, map) in pieces {
        if hi <= lo {
            continue;
        }
        let seg = qk15(f, lo, hi, map)?;
        value += seg.value;
        aux += seg.aux;
        rule_err += seg.err;
        resabs += seg.resabs;
        mass += seg.mass;
        heap.push(seg);
    }

    let mut subdivisions = 0usize;
    let target = |v: f64| f64::max(cfg.rel_tol * v.abs(), cfg.abs_tol);

    while rule_err + aux > target(value) && subdivisions < cfg.max_subdivisions {
        // The aux component is the integral of inner error estimates and
        // cannot be reduced by splitting; stop once the rule part is noise.
        // Likewise the per-segment QUADPACK floor makes 50 eps |f|-mass the
        // smallest reachable rule error.
        if rule_err <= 0.05 * aux || rule_err <= 60.0 * f64::EPSILON * resabs {
            break;
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        if worst.err <= 0.0 {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(worst.lo < mid && mid < worst.hi) {
            heap.push(worst);
            break;
        }
        value -= worst.value;
        aux -= worst.aux;
        rule_err -= worst.err;
        resabs -= worst.resabs;
        mass -= worst.mass;
        let left = qk15(f, worst.lo, mid, worst.map)?;
        let right = qk15(f, mid, worst.hi, worst.map)?;
        value += left.value + right.value;
        aux += left.aux + right.aux;
        rule_err += left.err + right.err;
        resabs += left.resabs + right.resabs;
        mass += left.mass + right.mass;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }

    let error_estimate = rule_err + aux;
    Ok((
        QuadratureResult {
            value,
            error_estimate,
            subdivisions_used: subdivisions,
            converged: error_estimate <= target(value),
        },
        resabs.max(mass),
    ))
}

fn initial_pieces(
    a: f64,
    b: f64,
    left: Option<f64>,
    right: Option<f64>,
) -> Vec<(f64, f64, PieceMap)> {
    match (left, right) {
        (None, None) => vec![(a, b, PieceMap::Identity)],
        (Some(_), None) => vec![(0.0, (b - a).sqrt(), PieceMap::LeftSquare { anchor: a })],
        (None, Some(_)) => vec![(0.0, (b - a).sqrt(), PieceMap::RightSquare { anchor: b })],
        (Some(_), Some(_)) => {
            let m = 0.5 * (a + b);
            vec![
                (0.0, (m - a).sqrt(), PieceMap::LeftSquare { anchor: a }),
                (0.0, (b - m).sqrt(), PieceMap::RightSquare { anchor: b }),
            ]
        }
    }
}

fn integrate_pair<F>(
    f: &mut F,
    spec: &AxisSpec,
    cfg: &QuadratureConfig,
) -> Result<(QuadratureResult, f64)>
where
    F: FnMut(f64) -> Result<(f64, f64, f64)>,
{
    match spec.bounds {
        AxisBounds::Finite { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::InvalidInterval { lo, hi });
            }
            if lo == hi {
                return Ok((
                    QuadratureResult {
                        value: 0.0,
                        error_estimate: 0.0,
                        subdivisions_used: 0,
                        converged: true,
                    },
                    0.0,
                ));
            }
            let pieces = initial_pieces(lo, hi, spec.left_exponent, spec.right_exponent);
            adapt(f, &pieces, cfg)
        }
        AxisBounds::SemiInfinite { lo } => {
            if !lo.is_finite() {
                return Err(Error::InvalidInterval { lo, hi: f64::INFINITY });
            }
            let scan = scan_tail(f, lo, spec.decay_scale, cfg)?;
            let pieces = initial_pieces(lo, scan.cutoff, spec.left_exponent, None);
            let (mut res, resabs) = adapt(f, &pieces, cfg)?;
            res.error_estimate += scan.tail_bound;
            if scan.no_decay {
                res.converged = false;
            } else {
                let target = f64::max(cfg.rel_tol * res.value.abs(), cfg.abs_tol);
                res.converged = res.error_estimate <= target;
            }
            Ok((res, resabs))
        }
    }
}

struct TailScan {
    cutoff: f64,
    tail_bound: f64,
    no_decay: bool,
}

/// Walk outward with geometrically growing steps until |f| stays below
/// `truncation_threshold` times the running peak.
fn scan_tail<F>(f: &mut F, lo: f64, scale: f64, cfg: &QuadratureConfig) -> Result<TailScan>
where
    F: FnMut(f64) -> Result<(f64, f64, f64)>,
{
    let cap = lo + 1e10 * scale;
    let mut step = 0.25 * scale;
    let mut x = lo;
    let mut peak = 0.0f64;
    let mut low_streak = 0u32;
    for _ in 0..400 {
        x += step;
        step *= 1.4;
        let (v, _, _) = f(x)?;
        if v.is_nan() {
            return Err(Error::NanIntegrand { abscissa: x });
        }
        let mag = v.abs();
        if mag > peak {
            peak = mag;
            low_streak = 0;
            continue;
        }
        if peak > 0.0 && mag <= cfg.truncation_threshold * peak {
            low_streak += 1;
            if low_streak >= 3 {
                let tail_bound = cfg.truncation_threshold * peak * (x - lo + scale);
                return Ok(TailScan {
                    cutoff: x,
                    tail_bound,
                    no_decay: false,
                });
            }
        } else {
            low_streak = 0;
        }
        if x >= cap {
            break;
        }
    }
    if peak == 0.0 {
        // Identically zero as far as the scan can see.
        return Ok(TailScan {
            cutoff: lo + scale,
            tail_bound: 0.0,
            no_decay: false,
        });
    }
    Ok(TailScan {
        cutoff: x,
        tail_bound: peak * scale,
        no_decay: true,
    })
}

fn plain<F>(mut f: F) -> impl FnMut(f64) -> Result<(f64, f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    move |x| Ok((f(x), 0.0, 0.0))
}

/// Integrates `f` over the finite interval [a, b].
pub fn integrate_1d<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    Ok(integrate_pair(&mut plain(f), &AxisSpec::finite(a, b), cfg)?.0)
}

/// Integrates `f` over [a, b] with declared endpoint power singularities
/// f ~ (x-a)^left and/or f ~ (b-x)^right, each exponent > -1.
pub fn integrate_1d_singular<F>(
    f: F,
    a: f64,
    b: f64,
    left_exponent: Option<f64>,
    right_exponent: Option<f64>,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    let mut spec = AxisSpec::finite(a, b);
    if let Some(e) = left_exponent {
        spec = spec.with_left_exponent(e);
    }
    if let Some(e) = right_exponent {
        spec = spec.with_right_exponent(e);
    }
    Ok(integrate_pair(&mut plain(f), &spec, cfg)?.0)
}

/// Integrates `f` over [a, oo) assuming eventual decay to zero.
pub fn integrate_semi_infinite<F>(f: F, a: f64, cfg: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    Ok(integrate_pair(&mut plain(f), &AxisSpec::semi_infinite(a), cfg)?.0)
}

/// Integrates `f` over the domain described by `spec`.
pub fn integrate_axis<F>(f: F, spec: &AxisSpec, cfg: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    Ok(integrate_pair(&mut plain(f), spec, cfg)?.0)
}

/// Iterated 2D integral: `value = \int_outer \int_inner(x) f(x, y) dy dx`.
///
/// The error budget is split evenly between the axes and inner error
/// estimates are integrated along the outer axis into the total.
pub fn integrate_2d<F, B>(
    f: F,
    outer: &AxisSpec,
    inner: B,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult>
where
    F: Fn(f64, f64) -> f64,
    B: Fn(f64) -> AxisSpec,
{
    let (res, _) = integrate_2d_with_mass(f, outer, inner, cfg)?;
    Ok(res)
}

/// As `integrate_2d`, additionally returning the integrated |f| mass used
/// by outer nesting levels to recognise machine-floor-limited slices.
fn integrate_2d_with_mass<F, B>(
    f: F,
    outer: &AxisSpec,
    inner: B,
    cfg: &QuadratureConfig,
) -> Result<(QuadratureResult, f64)>
where
    F: Fn(f64, f64) -> f64,
    B: Fn(f64) -> AxisSpec,
{
    if outer.is_empty() {
        return Ok((
            QuadratureResult {
                value: 0.0,
                error_estimate: 0.0,
                subdivisions_used: 0,
                converged: true,
            },
            0.0,
        ));
    }
    let inner_cfg = cfg.inner_level();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let all_converged = Cell::new(true);
    let max_inner_subdiv = Cell::new(0usize);

    let mut g = |x: f64| -> Result<(f64, f64, f64)> {
        let spec = inner(x);
        if spec.is_empty() {
            return Ok((0.0, 0.0, 0.0));
        }
        match integrate_pair(&mut plain(|y| f(x, y)), &spec, &inner_cfg) {
            Ok((r, mass)) => {
                // Error at the machine floor of the local |f| mass cannot
                // and need not improve; it still enters the outer estimate.
                let floor = 1e3 * f64::EPSILON * mass;
                if !r.converged && r.error_estimate > floor {
                    all_converged.set(false);
                }
                if r.subdivisions_used > max_inner_subdiv.get() {
                    max_inner_subdiv.set(r.subdivisions_used);
                }
                Ok((r.value, r.error_estimate, mass))
            }
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                Err(Error::NonConvergence {
                    context: "inner axis".into(),
                })
            }
        }
    };

    let res = integrate_pair(&mut g, outer, cfg);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (mut res, mass) = res?;
    res.converged = res.converged && all_converged.get();
    res.subdivisions_used += max_inner_subdiv.get();
    Ok((res, mass))
}

/// Iterated 3D integral with bounds of the middle and inner axes depending
/// on the outer variables: `\int \int \int f(x, y, z) dz dy dx`.
pub fn integrate_3d<F, B1, B2>(
    f: F,
    outer: &AxisSpec,
    mid: B1,
    inner: B2,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult>
where
    F: Fn(f64, f64, f64) -> f64,
    B1: Fn(f64) -> AxisSpec,
    B2: Fn(f64, f64) -> AxisSpec,
{
    if outer.is_empty() {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions_used: 0,
            converged: true,
        });
    }
    let inner_cfg = cfg.inner_level();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let all_converged = Cell::new(true);

    let mut g = |x: f64| -> Result<(f64, f64, f64)> {
        match integrate_2d_with_mass(|y, z| f(x, y, z), &mid(x), |y| inner(x, y), &inner_cfg) {
            Ok((r, mass)) => {
                let floor = 1e3 * f64::EPSILON * mass;
                if !r.converged && r.error_estimate > floor {
                    all_converged.set(false);
                }
                Ok((r.value, r.error_estimate, mass))
            }
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                Err(Error::NonConvergence {
                    context: "inner axes".into(),
                })
            }
        }
    };

    let res = integrate_pair(&mut g, outer, cfg);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (mut res, _) = res?;
    res.converged = res.converged && all_converged.get();
    Ok(res)
}
