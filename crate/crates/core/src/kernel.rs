//! Closed-form scalar ingredients: the dispersion weight phi_s, the
//! bilinear kernel K_s in reduced radial coordinates, the sharp constant
//! KG(d), sphere measures, and the pointwise kernel bounds in dimensions
//! 1, 2 and 3.

use crate::error::{Error, Result};

/// Magnitude cap on masses and radii; keeps every squaring identity well
/// inside f64 range.
pub const MAGNITUDE_CAP: f64 = 1e8;

/// Spatial dimension d >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(d: u32) -> Self {
        assert!(d >= 1, "dimension must be >= 1");
        Dimension(d)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

/// Mass parameter s >= 0 of the dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mass(f64);

impl Mass {
    pub fn new(s: f64) -> Self {
        assert!(
            s.is_finite() && (0.0..=MAGNITUDE_CAP).contains(&s),
            "mass must lie in [0, {MAGNITUDE_CAP}], got {s}"
        );
        Mass(s)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

/// Reduced coordinates (|y1|, |y2|, cos angle(y1, y2)) of a frequency pair.
/// For d = 1 the cosine is restricted to +-1 and encodes the relative sign
/// of the two frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub r1: f64,
    pub r2: f64,
    pub c: f64,
}

impl KernelPoint {
    pub fn new(r1: f64, r2: f64, c: f64) -> Self {
        assert!(
            (0.0..=MAGNITUDE_CAP).contains(&r1) && (0.0..=MAGNITUDE_CAP).contains(&r2),
            "radii must lie in [0, {MAGNITUDE_CAP}]"
        );
        assert!(c.abs() <= 1.0, "cosine out of range: {c}");
        KernelPoint { r1, r2, c }
    }
}

/// phi_s(r) = sqrt(s^2 + r^2), the dispersion weight. Always >= max(s, r).
#[inline]
pub fn phi(s: Mass, r: f64) -> f64 {
    debug_assert!(r >= 0.0);
    let s = s.value();
    (s * s + r * r).sqrt()
}

/// The d = 1 kernel in explicit polynomial form:
/// [s^2 (y1^2 + y2^2) + 2 y1^2 y2^2 - 2 y1 y2 phi phi']^{-1/2}.
pub fn d1_weight(s: Mass, y1: f64, y2: f64) -> f64 {
    let pp = phi(s, y1.abs()) * phi(s, y2.abs());
    let sv = s.value();
    let base = sv * sv * (y1 * y1 + y2 * y2) + 2.0 * y1 * y1 * y2 * y2 - 2.0 * y1 * y2 * pp;
    1.0 / base.max(0.0).sqrt()
}

/// The same d = 1 kernel through the factored route 1/|y1 phi' - y2 phi|,
/// which stays accurate near the diagonal where the polynomial form cancels.
pub fn d1_weight_stable(s: Mass, y1: f64, y2: f64) -> f64 {
    1.0 / (y1 * phi(s, y2.abs()) - y2 * phi(s, y1.abs())).abs()
}

/// The bilinear kernel K_s at a reduced point, for d >= 2.
///
/// K_s = (phi phi' - y1.y2 - s^2)^{(d-2)/2} / (phi phi' - y1.y2 + s^2)^{1/2}.
/// The numerator base is nonnegative by the squaring inequality
/// phi phi' >= s^2 + r1 r2; tiny negative rounding is clamped to zero.
pub fn kernel_k(d: Dimension, s: Mass, p: &KernelPoint) -> Result<f64> {
    if d.get() == 1 {
        return Err(Error::Unsupported {
            what: "kernel_k is defined for d >= 2; the d = 1 weight lives in dimension_one".into(),
        });
    }
    if d.get() == 2 && s.is_zero() {
        return Err(Error::Unsupported {
            what: "kernel_k at (d = 2, s = 0): the kernel degenerates on the diagonal".into(),
        });
    }
    let s2 = s.value() * s.value();
    let base = phi(s, p.r1) * phi(s, p.r2) - p.r1 * p.r2 * p.c;
    let den_arg = base + s2;
    // The numerator base is zero on the diagonal; snap away rounding noise.
    let mut num_arg = base - s2;
    if num_arg <= 16.0 * f64::EPSILON * den_arg.abs() {
        num_arg = 0.0;
    }
    if den_arg <= 0.0 {
        return Err(Error::SingularPoint {
            what: format!("kernel denominator vanished at ({}, {}, {})", p.r1, p.r2, p.c),
        });
    }
    let half_d_minus_2 = 0.5 * (d.as_f64() - 2.0);
    Ok(num_arg.powf(half_d_minus_2) / den_arg.sqrt())
}

/// Surface measure of the unit sphere S^{d-1}: 2 pi^{d/2} / Gamma(d/2).
pub fn sphere_measure(d: Dimension) -> f64 {
    let n = d.get();
    2.0 * std::f64::consts::PI.powf(d.as_f64() / 2.0) / gamma_half_integer(n)
}

/// Gamma(n/2) for integer n >= 1, exact via the half-integer recursion.
fn gamma_half_integer(n: u32) -> f64 {
    if n % 2 == 0 {
        // Gamma(k) = (k-1)!
        let k = n / 2;
        let mut acc = 1.0f64;
        for i in 2..k {
            acc *= f64::from(i);
        }
        acc
    } else {
        // Gamma(1/2 + k) = sqrt(pi) (2k-1)!! / 2^k
        let k = (n - 1) / 2;
        let mut acc = std::f64::consts::PI.sqrt();
        for i in 0..k {
            acc *= f64::from(2 * i + 1) / 2.0;
        }
        acc
    }
}

/// The sharp bilinear constant KG(d) = 2^{-(d-1)/2} |S^{d-1}| / (2 pi)^{3d-1}.
pub fn kg_constant(d: Dimension) -> f64 {
    let df = d.as_f64();
    2f64.powf(-0.5 * (df - 1.0)) * sphere_measure(d)
        / (2.0 * std::f64::consts::PI).powf(3.0 * df - 1.0)
}

/// Kernel value together with its pointwise upper bound, d in {1, 2, 3}.
///
/// d = 1: K_s <= s^{-2} (s^2+y1^2)^{1/4} (s^2+y2^2)^{1/4} / |y1 - y2|,
/// d = 2: K_s <= (2 s^2)^{-1/2}, d = 3: K_s <= 1.
pub fn kernel_bound(d: Dimension, s: Mass, p: &KernelPoint) -> Result<(f64, f64)> {
    match d.get() {
        1 => {
            if s.is_zero() {
                return Err(Error::Precondition {
                    what: "d = 1 pointwise bound requires s > 0".into(),
                });
            }
            debug_assert!(p.c == 1.0 || p.c == -1.0, "d = 1 cosine must be a sign");
            let y1 = p.r1;
            let y2 = p.c * p.r2;
            if y1 == y2 {
                return Err(Error::SingularPoint {
                    what: "d = 1 kernel bound on the diagonal y1 = y2".into(),
                });
            }
            let value = d1_weight_stable(s, y1, y2);
            let s2 = s.value() * s.value();
            let bound = (s2 + y1 * y1).powf(0.25) * (s2 + y2 * y2).powf(0.25)
                / (s2 * (y1 - y2).abs());
            Ok((value, bound))
        }
        2 => {
            let value = kernel_k(d, s, p)?;
            Ok((value, 1.0 / (s.value() * 2f64.sqrt())))
        }
        3 => {
            let value = kernel_k(d, s, p)?;
            Ok((value, 1.0))
        }
        other => Err(Error::Unsupported {
            what: format!("kernel_bound covers d in {{1, 2, 3}}, got d = {other}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn phi_closed_values() {
        assert_eq!(phi(Mass::new(1.0), 0.0), 1.0);
        assert_eq!(phi(Mass::new(3.0), 4.0), 5.0);
        assert_eq!(phi(Mass::new(0.0), 2.5), 2.5);
    }

    #[test]
    fn kernel_examples() {
        // d = 2, s = 1 at the origin: phi phi' - y.y + 1 = 2.
        let k = kernel_k(
            Dimension::new(2),
            Mass::new(1.0),
            &KernelPoint::new(0.0, 0.0, 0.0),
        )
        .unwrap();
        assert!(close(k, 2f64.powf(-0.5), 1e-15));

        // Diagonal vanishing for d >= 3.
        let k = kernel_k(
            Dimension::new(5),
            Mass::new(1.0),
            &KernelPoint::new(1.0, 1.0, 1.0),
        )
        .unwrap();
        assert_eq!(k, 0.0);

        // d = 5, s = 0 at orthogonal unit frequencies: 1^{3/2} / 1^{1/2}.
        let k = kernel_k(
            Dimension::new(5),
            Mass::new(0.0),
            &KernelPoint::new(1.0, 1.0, 0.0),
        )
        .unwrap();
        assert!(close(k, 1.0, 1e-15));
    }

    #[test]
    fn kernel_rejects_unsupported_corners() {
        assert!(kernel_k(
            Dimension::new(1),
            Mass::new(1.0),
            &KernelPoint::new(1.0, 1.0, 1.0)
        )
        .is_err());
        assert!(kernel_k(
            Dimension::new(2),
            Mass::new(0.0),
            &KernelPoint::new(1.0, 1.0, 1.0)
        )
        .is_err());
    }

    #[test]
    fn sphere_measures() {
        assert!(close(sphere_measure(Dimension::new(1)), 2.0, 1e-15));
        assert!(close(sphere_measure(Dimension::new(2)), 2.0 * PI, 1e-15));
        assert!(close(sphere_measure(Dimension::new(3)), 4.0 * PI, 1e-15));
        assert!(close(sphere_measure(Dimension::new(4)), 2.0 * PI * PI, 1e-15));
        assert!(close(sphere_measure(Dimension::new(5)), 8.0 * PI * PI / 3.0, 1e-15));
        assert!((sphere_measure(Dimension::new(5)) - 26.3189).abs() < 1e-4);
    }

    #[test]
    fn kg_constant_values() {
        // KG(1) = 1/(2 pi^2), so (1/2) KG(1) = 1/(2 pi)^2.
        let kg1 = kg_constant(Dimension::new(1));
        assert!(close(kg1, 1.0 / (2.0 * PI * PI), 1e-14));
        assert!(close(0.5 * kg1, (2.0 * PI).powi(-2), 1e-14));

        // (2 pi)^{10} KG(5) = 1/(24 pi^2).
        let kg5 = kg_constant(Dimension::new(5));
        let scaled = (2.0 * PI).powi(10) * kg5;
        assert!(close(scaled, 1.0 / (24.0 * PI * PI), 1e-13));
        assert!((scaled - 4.2220e-3).abs() < 1e-6);

        // (KG(2) 2^{-1/2})^{1/4} = 1/(2^{5/4} pi).
        let kg2 = kg_constant(Dimension::new(2));
        let lhs = (kg2 * 2f64.powf(-0.5)).powf(0.25);
        let rhs = 1.0 / (2f64.powf(1.25) * PI);
        assert!(close(lhs, rhs, 1e-14));
    }

    #[test]
    fn d1_bound_example() {
        // y1 = 1, y2 = -1 at s = 1: K^{-2} = 8, bound = 2^{1/2}/2.
        let (value, bound) = kernel_bound(
            Dimension::new(1),
            Mass::new(1.0),
            &KernelPoint::new(1.0, 1.0, -1.0),
        )
        .unwrap();
        assert!(close(value, 1.0 / 8f64.sqrt(), 1e-14));
        assert!(close(bound, 2f64.sqrt() / 2.0, 1e-14));
        assert!(value <= bound);
    }

    #[test]
    fn d1_bound_rejects_diagonal() {
        assert!(kernel_bound(
            Dimension::new(1),
            Mass::new(1.0),
            &KernelPoint::new(1.0, 1.0, 1.0)
        )
        .is_err());
    }

    #[test]
    fn d2_d3_bound_constants() {
        let p = KernelPoint::new(0.7, 1.9, -0.3);
        let (v2, b2) = kernel_bound(Dimension::new(2), Mass::new(1.0), &p).unwrap();
        assert!(close(b2, 2f64.powf(-0.5), 1e-15));
        assert!(v2 <= b2);
        let (v3, b3) = kernel_bound(Dimension::new(3), Mass::new(1.0), &p).unwrap();
        assert_eq!(b3, 1.0);
        assert!(v3 <= b3);
    }

    #[test]
    fn squaring_identity_holds_everywhere() {
        // phi_s(r1) phi_s(r2) >= s^2 + r1 r2 over 1e5 random samples.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100_000 {
            let s = Mass::new(rng.gen_range(0.0..100.0));
            let r1 = rng.gen_range(0.0..1000.0);
            let r2 = rng.gen_range(0.0..1000.0);
            let lhs = phi(s, r1) * phi(s, r2);
            let rhs = s.value() * s.value() + r1 * r2;
            assert!(lhs >= rhs - 1e-9 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn d1_weight_identity() {
        // (phi(|y1|) y2 - phi(|y2|) y1)^2 equals the expanded K^{-2} form.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100_000 {
            let s = Mass::new(rng.gen_range(1e-3..10.0));
            let y1: f64 = rng.gen_range(-50.0..50.0);
            let y2: f64 = rng.gen_range(-50.0..50.0);
            let lhs = (phi(s, y1.abs()) * y2 - phi(s, y2.abs()) * y1).powi(2);
            let sv = s.value();
            let pp = phi(s, y1.abs()) * phi(s, y2.abs());
            let rhs = sv * sv * (y1 * y1 + y2 * y2) + 2.0 * y1 * y1 * y2 * y2
                - 2.0 * y1 * y2 * pp;
            // Both sides cancel near the diagonal; compare against term size.
            let scale = sv * sv * (y1 * y1 + y2 * y2)
                + 2.0 * y1 * y1 * y2 * y2
                + 2.0 * (y1 * y2 * pp).abs();
            assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn d2_diagonal_saturates_bound() {
        // On (r, r, 1) at s = 1 the kernel equals 2^{-1/2} for every r.
        for r in [0.0, 0.3, 1.0, 5.0, 123.4, 900.0] {
            let k = kernel_k(
                Dimension::new(2),
                Mass::new(1.0),
                &KernelPoint::new(r, r, 1.0),
            )
            .unwrap();
            assert!(close(k, 2f64.powf(-0.5), 1e-10), "r = {r}: {k}");
        }
    }

    #[test]
    fn pointwise_bounds_have_no_violations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut violations = 0usize;
        for _ in 0..100_000 {
            let s = Mass::new(rng.gen_range(0.1..5.0));
            // d = 1: random signed frequencies off the diagonal.
            let y1: f64 = rng.gen_range(-20.0..20.0);
            let mut y2: f64 = rng.gen_range(-20.0..20.0);
            while (y1 - y2).abs() <= 1e-3 {
                y2 = rng.gen_range(-20.0..20.0);
            }
            {
                // (y1, y2) and (-y1, -y2) give the same value and bound.
                let p = KernelPoint::new(y1.abs(), y2.abs(), if y1 * y2 >= 0.0 { 1.0 } else { -1.0 });
                let (v, b) = kernel_bound(Dimension::new(1), s, &p).unwrap();
                if v > b * (1.0 + 1e-12) {
                    violations += 1;
                }
            }
            let p = KernelPoint::new(
                rng.gen_range(0.0..20.0),
                rng.gen_range(0.0..20.0),
                rng.gen_range(-1.0..1.0),
            );
            for d in [2u32, 3] {
                let (v, b) = kernel_bound(Dimension::new(d), s, &p).unwrap();
                if v > b * (1.0 + 1e-12) {
                    violations += 1;
                }
            }
        }
        assert_eq!(violations, 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn kernel_symmetry(
            s in 0.0f64..10.0,
            r1 in 0.0f64..100.0,
            r2 in 0.0f64..100.0,
            c in -1.0f64..1.0,
            d in 2u32..7,
        ) {
            let s = Mass::new(if d == 2 { s.max(1e-3) } else { s });
            let a = kernel_k(Dimension::new(d), s, &KernelPoint::new(r1, r2, c)).unwrap();
            let b = kernel_k(Dimension::new(d), s, &KernelPoint::new(r2, r1, c)).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
