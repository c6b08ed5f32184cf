//! Cubic drift `f`, its potential `F` and the averaged-vector-field gradient.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// `f(u) = a3 u^3 + a2 u^2 + a1 u + a0` with potential
/// `F(u) = a3 u^4/4 + a2 u^3/3 + a1 u^2/2 + a0 u` and energy offset `c1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicDrift {
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    pub c1: f64,
}

impl Default for CubicDrift {
    /// `f(u) = u^3`, `C1 = 0`.
    fn default() -> Self {
        CubicDrift {
            a3: 1.0,
            a2: 0.0,
            a1: 0.0,
            a0: 0.0,
            c1: 0.0,
        }
    }
}

impl CubicDrift {
    pub fn new(a3: f64, a2: f64, a1: f64, a0: f64, c1: f64) -> Result<Self> {
        let d = CubicDrift { a3, a2, a1, a0, c1 };
        d.validate()?;
        Ok(d)
    }

    /// Checks the quartic growth of `F` (`a3 > 0`) and `C1 >= b1`.
    pub fn validate(&self) -> Result<()> {
        let all = [self.a3, self.a2, self.a1, self.a0, self.c1];
        if all.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("drift growth condition", "drift coefficients must be finite"));
        }
        if self.a3 <= 0.0 {
            return Err(Error::config(
                "drift growth condition",
                format!("leading cubic coefficient must be positive, got a3 = {}", self.a3),
            ));
        }
        let b1 = self.lower_bound_constant();
        if self.c1 < b1 {
            return Err(Error::config(
                "drift growth condition",
                format!("energy offset C1 = {} must be at least b1 = {b1}", self.c1),
            ));
        }
        Ok(())
    }

    /// Zero drift, for the linear wave equation. Not an admissible
    /// configuration for the nonlinear theory, but the scheme is well defined.
    pub fn zero() -> Self {
        CubicDrift {
            a3: 0.0,
            a2: 0.0,
            a1: 0.0,
            a0: 0.0,
            c1: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a3 == 0.0 && self.a2 == 0.0 && self.a1 == 0.0 && self.a0 == 0.0
    }

    #[inline]
    pub fn eval_f(&self, u: f64) -> f64 {
        ((self.a3 * u + self.a2) * u + self.a1) * u + self.a0
    }

    #[inline]
    pub fn eval_f_prime(&self, u: f64) -> f64 {
        (3.0 * self.a3 * u + 2.0 * self.a2) * u + self.a1
    }

    #[inline]
    pub fn eval_potential(&self, u: f64) -> f64 {
        (((0.25 * self.a3 * u + self.a2 / 3.0) * u + 0.5 * self.a1) * u + self.a0) * u
    }

    /// `int_0^1 f(a + theta (b - a)) d theta` in closed form.
    #[inline]
    pub fn avf(&self, a: f64, b: f64) -> f64 {
        let (a2, b2, ab) = (a * a, b * b, a * b);
        0.25 * self.a3 * (a2 * a + a2 * b + ab * b + b2 * b)
            + self.a2 / 3.0 * (a2 + ab + b2)
            + 0.5 * self.a1 * (a + b)
            + self.a0
    }

    pub fn avf_field(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        check_len(a.len(), b.len())?;
        let mut out = vec![0.0; a.len()];
        self.avf_into(a, b, &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn avf_into(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = self.avf(x, y);
        }
    }

    /// Smallest `c >= 0` with `-(f(u) - f(v))(u - v) <= c (u - v)^2`.
    pub fn one_sided_constant(&self) -> f64 {
        if self.a3 <= 0.0 {
            return f64::INFINITY;
        }
        (self.a2 * self.a2 / (3.0 * self.a3) - self.a1).max(0.0)
    }

    /// `b1 = max(0, sup_u (a3 u^4 / 8 - F(u)))`, so that
    /// `F(u) >= a3 u^4 / 8 - b1` and, on the unit interval, `int F >= -b1`.
    pub fn lower_bound_constant(&self) -> f64 {
        if self.a3 <= 0.0 {
            return f64::INFINITY;
        }
        let g = |u: f64| self.eval_potential(u) - 0.125 * self.a3 * u.powi(4);
        // Every critical point of g satisfies |u| <= 1 + max |coef / lead| (Cauchy bound).
        let lead = 0.5 * self.a3;
        let radius = 1.0 + [self.a2 / lead, self.a1 / lead, self.a0 / lead]
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()));
        let samples = 4000;
        let step = 2.0 * radius / samples as f64;
        let (mut best_u, mut best) = (0.0, g(0.0));
        for i in 0..=samples {
            let u = -radius + i as f64 * step;
            let v = g(u);
            if v < best {
                best = v;
                best_u = u;
            }
        }
        // golden-section refinement on the bracketing cell
        let (mut lo, mut hi) = (best_u - step, best_u + step);
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let m1 = hi - ratio * (hi - lo);
            let m2 = lo + ratio * (hi - lo);
            if g(m1) < g(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best = best.min(g(0.5 * (lo + hi)));
        (-best).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cubic() -> CubicDrift {
        CubicDrift::default()
    }

    #[test]
    fn pure_cubic_values() {
        let d = cubic();
        assert_eq!(d.eval_f(2.0), 8.0);
        assert_eq!(d.eval_potential(2.0), 4.0);
        assert_eq!(d.eval_potential(0.0), 0.0);
        let g = CubicDrift::new(1.0, 0.5, -2.0, 0.75, 10.0).unwrap();
        assert_eq!(g.eval_f(0.0), 0.75);
        assert_eq!(g.eval_potential(0.0), 0.0);
    }

    #[test]
    fn avf_of_cubic_from_zero_to_two() {
        // int_0^1 (2 theta)^3 d theta = 2
        assert_eq!(cubic().avf(0.0, 2.0), 2.0);
        assert_eq!(cubic().avf_field(&[0.0, 1.0], &[2.0, 1.0]).unwrap(), vec![2.0, 1.0]);
        assert!(cubic().avf_field(&[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn invalid_drifts_rejected() {
        assert!(CubicDrift::new(0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(CubicDrift::new(-1.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(CubicDrift::new(f64::NAN, 0.0, 0.0, 0.0, 0.0).is_err());
        // F(u) = u^4/4 - u^2 dips below a3 u^4 / 8: needs C1 >= b1 > 0
        let d = CubicDrift {
            a1: -2.0,
            ..CubicDrift::default()
        };
        assert!(d.lower_bound_constant() > 0.0);
        assert!(d.validate().is_err());
        assert!(CubicDrift { c1: 10.0, ..d }.validate().is_ok());
    }

    #[test]
    fn lower_bound_constant_closed_form() {
        assert_eq!(cubic().lower_bound_constant(), 0.0);
        // a3 u^4/8 - F = u^2 - u^4/8 peaks at u^2 = 4 with value 2
        let d = CubicDrift {
            a1: -2.0,
            ..CubicDrift::default()
        };
        assert_relative_eq!(d.lower_bound_constant(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn one_sided_constant_values() {
        assert_eq!(cubic().one_sided_constant(), 0.0);
        let d = CubicDrift::new(1.0, 3.0, 1.0, 0.0, 100.0).unwrap();
        assert_relative_eq!(d.one_sided_constant(), 2.0);
    }

    fn drift_strategy() -> impl Strategy<Value = CubicDrift> {
        (0.1f64..3.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a3, a2, a1, a0)| {
            CubicDrift {
                a3,
                a2,
                a1,
                a0,
                c1: 0.0,
            }
        })
    }

    proptest! {
        #[test]
        fn potential_derivative_is_drift(d in drift_strategy(), u in -5.0f64..5.0) {
            let eps = 1e-4;
            let fd = (d.eval_potential(u + eps) - d.eval_potential(u - eps)) / (2.0 * eps);
            // O(eps^2) truncation with F''' = 6 a3 u + 2 a2
            prop_assert!((fd - d.eval_f(u)).abs() <= 1e-6 * (1.0 + d.eval_f(u).abs()));
        }

        #[test]
        fn avf_symmetric_and_consistent(d in drift_strategy(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
            prop_assert!((d.avf(a, b) - d.avf(b, a)).abs() <= 1e-12 * (1.0 + d.avf(a, b).abs()));
            prop_assert!((d.avf(a, a) - d.eval_f(a)).abs() <= 1e-12 * (1.0 + d.eval_f(a).abs()));
        }

        #[test]
        fn avf_is_discrete_gradient(d in drift_strategy(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let lhs = d.eval_potential(b) - d.eval_potential(a);
            let rhs = d.avf(a, b) * (b - a);
            let scale = d.eval_potential(a).abs() + d.eval_potential(b).abs() + 1.0;
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale * 10.0);
        }

        #[test]
        fn one_sided_lipschitz(d in drift_strategy(), u in -10.0f64..10.0, v in -10.0f64..10.0) {
            let c = d.one_sided_constant();
            let lhs = -(d.eval_f(u) - d.eval_f(v)) * (u - v);
            prop_assert!(lhs <= c * (u - v).powi(2) + 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn quartic_lower_bound(d in drift_strategy(), u in -20.0f64..20.0) {
            let b1 = d.lower_bound_constant();
            prop_assert!(d.eval_potential(u) >= 0.125 * d.a3 * u.powi(4) - b1 - 1e-8 * (1.0 + u.powi(4)));
        }
    }
}
