//! Radial Fourier-side profiles r -> g^(r), the fundamental input of every
//! d >= 2 functional. Profiles are real-valued (signed allowed, nonnegative
//! in practice); all norms and bilinear forms depend only on |g^|.

use std::fmt;
use std::sync::Arc;

/// A radial frequency profile together with a decay-scale hint used for
/// tail truncation and a label for reports.
#[derive(Clone)]
pub struct RadialProfile {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub decay_scale: f64,
    pub label: String,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("label", &self.label)
            .field("decay_scale", &self.decay_scale)
            .finish()
    }
}

impl RadialProfile {
    pub fn new(
        label: impl Into<String>,
        decay_scale: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(decay_scale > 0.0 && decay_scale.is_finite());
        RadialProfile {
            eval: Arc::new(eval),
            decay_scale,
            label: label.into(),
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    /// Pointwise rescaling g^ -> factor * g^.
    pub fn scaled(&self, factor: f64) -> Self {
        let inner = Arc::clone(&self.eval);
        RadialProfile {
            eval: Arc::new(move |r| factor * inner(r)),
            decay_scale: self.decay_scale,
            label: format!("{} * {factor:.6e}", self.label),
        }
    }

    pub fn zero() -> Self {
        RadialProfile::new("zero", 1.0, |_| 0.0)
    }

    /// Indicator of the radial shell lo <= r <= hi.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        assert!(0.0 <= lo && lo < hi);
        RadialProfile::new(format!("chi[{lo},{hi}]"), hi, move |r| {
            if (lo..=hi).contains(&r) {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn is_zero_label(&self) -> bool {
        self.label == "zero"
    }
}

/// The standard test library: truncated exponentials, compact bumps and
/// power-decay tails. All entries are nonnegative with finite weighted
/// moments in every dimension used by the verification suites.
pub fn standard_library() -> Vec<RadialProfile> {
    vec![
        RadialProfile::new("exp(-phi1)/phi1", 1.0, |r| {
            let p = (1.0 + r * r).sqrt();
            (-p).exp() / p
        }),
        RadialProfile::new("exp(-r)", 1.0, |r| (-r).exp()),
        RadialProfile::new("(1+r) exp(-2r)", 0.5, |r| (1.0 + r) * (-2.0 * r).exp()),
        RadialProfile::indicator(0.0, 1.0),
        RadialProfile::indicator(1.0, 2.0),
        RadialProfile::new("exp(-r^2)", 1.0, |r| (-r * r).exp()),
        RadialProfile::new("r^2 exp(-r^2/2)", 1.5, |r| r * r * (-0.5 * r * r).exp()),
        RadialProfile::new("(1+r^2)^-3", 2.0, |r| (1.0 + r * r).powi(-3)),
        RadialProfile::new("(1+r^2)^-4", 2.0, |r| (1.0 + r * r).powi(-4)),
        RadialProfile::new("smooth bump on (0,2)", 2.0, |r| {
            let t: f64 = r - 1.0;
            if t.abs() >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - t * t)).exp()
            }
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_is_nonnegative_and_sized() {
        let lib = standard_library();
        assert!(lib.len() >= 10);
        for p in &lib {
            for r in [0.0, 0.17, 0.9, 1.0, 1.5, 2.0, 4.2, 30.0] {
                assert!(p.eval(r) >= 0.0, "{} at {r}", p.label);
                assert!(p.eval(r).is_finite());
            }
        }
    }

    #[test]
    fn scaling_is_pointwise() {
        let p = RadialProfile::new("lin", 1.0, |r| r + 1.0);
        let q = p.scaled(3.0);
        assert_eq!(q.eval(2.0), 9.0);
    }

    #[test]
    fn indicator_bounds() {
        let p = RadialProfile::indicator(1.0, 2.0);
        assert_eq!(p.eval(0.5), 0.0);
        assert_eq!(p.eval(1.5), 1.0);
        assert_eq!(p.eval(2.5), 0.0);
    }
}
