//! Closed-form clone and anticlone fidelities.
//!
//! These are evaluated directly from the formulas and never touch the
//! network engine, so they serve as the reference side of every equivalence
//! check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::Role;
use crate::quad::check_squeezing;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticFidelities<T> {
    Symmetric { clone: T, anticlone: T },
    Asymmetric { bob: T, claire: T, dan: T },
}

impl<T: Scalar> AnalyticFidelities<T> {
    /// Reference value for output `index` of the given role.
    pub fn expected(&self, role: Role, index: usize) -> T {
        match (*self, role) {
            (AnalyticFidelities::Symmetric { clone, .. }, Role::Clone) => clone,
            (AnalyticFidelities::Symmetric { anticlone, .. }, Role::Anticlone) => anticlone,
            (AnalyticFidelities::Asymmetric { bob, claire, .. }, Role::Clone) => {
                if index == 0 {
                    bob
                } else {
                    claire
                }
            }
            (AnalyticFidelities::Asymmetric { dan, .. }, Role::Anticlone) => dan,
        }
    }
}

/// `M / (2M − 1 + e^{-2r})`.
pub fn one_to_m_clone<T: Scalar>(m: usize, r: T) -> T {
    let m = T::from_usize(m).unwrap();
    m / (T::lit(2.0) * m - T::one() + (T::lit(-2.0) * r).exp())
}

/// `NM / (NM + M − N + N e^{-2r})`.
pub fn n_to_m_clone<T: Scalar>(n: usize, m: usize, r: T) -> T {
    let (n, m) = (T::from_usize(n).unwrap(), T::from_usize(m).unwrap());
    n * m / (n * m + m - n + n * (T::lit(-2.0) * r).exp())
}

/// `N / (N + 1)`, independent of the squeezing.
pub fn n_to_m_anticlone<T: Scalar>(n: usize) -> T {
    let n = T::from_usize(n).unwrap();
    n / (n + T::one())
}

/// `MN / (MN + M − N)`, the infinite-squeezing clone fidelity.
pub fn optimal_clone<T: Scalar>(n: usize, m: usize) -> T {
    let (n, m) = (T::from_usize(n).unwrap(), T::from_usize(m).unwrap());
    m * n / (m * n + m - n)
}

/// `(F_B, F_C, F_D)` of the asymmetric 1→2+1 scheme.
pub fn asymmetric<T: Scalar>(r: T, r_b: T) -> (T, T, T) {
    let two = T::lit(2.0);
    let e = (-two * r).exp();
    let (lo, hi) = ((-two * r_b).exp(), (two * r_b).exp());
    (two / (two + e + lo), two / (two + e + hi), two / (two + lo + hi))
}

pub fn analytic_fidelities<T: Scalar>(n: usize, m: usize, r: T, r_b: Option<T>) -> Result<AnalyticFidelities<T>> {
    check_squeezing(r, "r")?;
    match r_b {
        Some(r_b) => {
            check_squeezing(r_b, "r_b")?;
            if n != 1 || m != 2 {
                return Err(Error::InvalidParameter(format!(
                    "asymmetric telecloning is defined for N=1, M=2 only (got N={n}, M={m})"
                )));
            }
            let (bob, claire, dan) = asymmetric(r, r_b);
            Ok(AnalyticFidelities::Asymmetric { bob, claire, dan })
        }
        None => {
            if m < 2 || n < 1 || n >= m {
                return Err(Error::InvalidParameter(format!("need 1 <= N < M and M >= 2 (got N={n}, M={m})")));
            }
            let clone = if n == 1 { one_to_m_clone(m, r) } else { n_to_m_clone(n, m, r) };
            Ok(AnalyticFidelities::Symmetric { clone, anticlone: n_to_m_anticlone(n) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_forms() {
        assert_abs_diff_eq!(one_to_m_clone(2, 0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(one_to_m_clone(2, 10.0), 2.0 / 3.0, epsilon = 2e-9);
        for m in 2..8 {
            for r in [0.0, 0.3, 1.7] {
                assert_abs_diff_eq!(n_to_m_clone(1, m, r), one_to_m_clone(m, r), epsilon = 1e-15);
            }
        }
        assert_abs_diff_eq!(n_to_m_clone(2, 3, 0.0), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n_to_m_clone(2, 3, 10.0), 6.0 / 7.0, epsilon = 2e-9);
        assert_abs_diff_eq!(optimal_clone::<f64>(2, 3), 6.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n_to_m_anticlone::<f64>(2), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn asymmetric_values() {
        let (b, c, d) = asymmetric(1.0, 0.5);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(b, 2.0 / (2.0 + e.powi(-2) + e.powi(-1)), epsilon = 1e-15);
        assert_abs_diff_eq!(c, 2.0 / (2.0 + e.powi(-2) + e), epsilon = 1e-15);
        assert_abs_diff_eq!(d, 2.0 / (2.0 + e.powi(-1) + e), epsilon = 1e-15);
        let (b, c, d) = asymmetric(0.8, 0.0);
        assert_eq!(b, c);
        assert_abs_diff_eq!(b, one_to_m_clone(2, 0.8), epsilon = 1e-15);
        assert_eq!(d, 0.5);
    }

    #[test]
    fn parameter_validation() {
        assert!(analytic_fidelities(1, 1, 0.5, None).is_err());
        assert!(analytic_fidelities(3, 3, 0.5, None).is_err());
        assert!(analytic_fidelities(0, 3, 0.5, None).is_err());
        assert!(analytic_fidelities(1, 3, -0.5, None).is_err());
        assert!(analytic_fidelities(1, 3, 0.5, Some(0.2)).is_err());
        assert!(matches!(
            analytic_fidelities(1, 2, 0.5, Some(0.2)).unwrap(),
            AnalyticFidelities::Asymmetric { .. }
        ));
    }
}
