//! Blaschke factors, finite (or truncated) Blaschke products, and atomic
//! singular inner factors.
//!
//! Conventions, fixed once here and relied on everywhere else:
//!
//! * `b_0(z) = z`, and for `lambda != 0`
//!   `b_lambda(z) = (|lambda|/lambda) (lambda - z) / (1 - conj(lambda) z)`,
//!   so each factor is positive at the origin.
//! * The atomic singular factor is the exponential of a *negative* Herglotz
//!   integral: `S(z) = exp( sum_j omega_j (z + xi_j) / (z - xi_j) )`.
//!   With a single unit atom at 1 this is `exp((z+1)/(z-1))`, which takes the
//!   value `1/e` at the origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-width of the exclusion band around each boundary atom. Evaluations
/// inside it are refused rather than returned with garbage significance.
pub const ATOM_GUARD: f64 = 1e-12;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn blaschke_factor(lambda: Complex64, z: Complex64) -> Complex64 {
    if lambda.norm() == 0.0 {
        return z;
    }
    let unim = Complex64::from_polar(1.0, -lambda.arg());
    unim * (lambda - z) / (ONE - lambda.conj() * z)
}

pub fn blaschke_factor_derivative(lambda: Complex64, z: Complex64) -> Complex64 {
    if lambda.norm() == 0.0 {
        return ONE;
    }
    let unim = Complex64::from_polar(1.0, -lambda.arg());
    let den = ONE - lambda.conj() * z;
    unim * (lambda.norm_sqr() - 1.0) / (den * den)
}

/// A finite Blaschke product, optionally standing in for an infinite one.
///
/// `tail_sum` is the first-moment sum `sum (1 - |lambda|)` over the omitted
/// tail; it feeds the pointwise truncation bound `2 * tail_sum / (1 - |z|)`.
/// A genuinely finite product has `tail_sum = 0` and evaluates exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
    tail_sum: f64,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<Complex64>) -> Result<Self> {
        Self::with_tail(zeros, 0.0)
    }

    pub fn with_tail(zeros: Vec<Complex64>, tail_sum: f64) -> Result<Self> {
        for &z in &zeros {
            if z.norm() >= 1.0 {
                return Err(Error::ZeroOutsideDisk(z));
            }
        }
        Ok(BlaschkeProduct { zeros, tail_sum })
    }

    pub fn empty() -> Self {
        BlaschkeProduct {
            zeros: Vec::new(),
            tail_sum: 0.0,
        }
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn tail_sum(&self) -> f64 {
        self.tail_sum
    }

    pub fn is_trivial(&self) -> bool {
        self.zeros.is_empty() && self.tail_sum == 0.0
    }

    /// Bound on the truncation error of the product at `z`.
    ///
    /// Each omitted factor satisfies `|1 - b(z)| <= 2 (1 - |lambda|) / (1 - |z|)`;
    /// the bounds are summed. Infinite at the boundary unless the tail is empty.
    pub fn truncation_bound(&self, z: Complex64) -> f64 {
        if self.tail_sum == 0.0 {
            0.0
        } else {
            2.0 * self.tail_sum / (1.0 - z.norm()).max(0.0)
        }
    }

    /// Value and derivative of the product at `z`.
    ///
    /// The derivative uses the logarithmic sum `B' = B * sum b'_k / b_k` away
    /// from the zeros and falls back to prefix/suffix partial products when a
    /// factor is too small for the quotient to be trustworthy.
    pub fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let n = self.zeros.len();
        if n == 0 {
            return (ONE, Complex64::new(0.0, 0.0));
        }
        let mut value = ONE;
        let mut log_deriv = Complex64::new(0.0, 0.0);
        let mut tiny = false;
        for &lam in &self.zeros {
            let b = blaschke_factor(lam, z);
            value *= b;
            if b.norm() < 1e-10 {
                tiny = true;
            } else {
                log_deriv += blaschke_factor_derivative(lam, z) / b;
            }
        }
        if !tiny {
            return (value, value * log_deriv);
        }

        // Near a zero of the product: product rule with partial products.
        let mut prefix = vec![ONE; n + 1];
        for (k, &lam) in self.zeros.iter().enumerate() {
            prefix[k + 1] = prefix[k] * blaschke_factor(lam, z);
        }
        let mut suffix = vec![ONE; n + 1];
        for (k, &lam) in self.zeros.iter().enumerate().rev() {
            suffix[k] = suffix[k + 1] * blaschke_factor(lam, z);
        }
        let mut deriv = Complex64::new(0.0, 0.0);
        for (k, &lam) in self.zeros.iter().enumerate() {
            deriv += prefix[k] * blaschke_factor_derivative(lam, z) * suffix[k + 1];
        }
        (prefix[n], deriv)
    }
}

/// One point mass of a singular inner factor: location on the circle, weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(with = "crate::util::complex_pair")]
    pub xi: Complex64,
    pub omega: f64,
}

/// Atomic singular inner factor `exp( sum omega_j (z + xi_j)/(z - xi_j) )`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SingularFactor {
    atoms: Vec<Atom>,
}

impl SingularFactor {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if (a.xi.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::AtomOffCircle(a.xi));
            }
            if a.omega <= 0.0 {
                return Err(Error::Precondition(format!(
                    "atom weight must be positive, got {}",
                    a.omega
                )));
            }
        }
        Ok(SingularFactor { atoms })
    }

    pub fn empty() -> Self {
        SingularFactor::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_trivial(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.omega).sum()
    }

    /// Distance from `z` to the nearest atom.
    pub fn atom_distance(&self, z: Complex64) -> f64 {
        self.atoms
            .iter()
            .map(|a| (z - a.xi).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Value and derivative at `z`. Refuses points inside the atom guard band.
    pub fn eval(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        if self.atoms.is_empty() {
            return Ok((ONE, Complex64::new(0.0, 0.0)));
        }
        let mut exponent = Complex64::new(0.0, 0.0);
        let mut exponent_deriv = Complex64::new(0.0, 0.0);
        for a in &self.atoms {
            let den = z - a.xi;
            if den.norm() < ATOM_GUARD {
                return Err(Error::AtEssentialSingularity(z));
            }
            exponent += a.omega * (z + a.xi) / den;
            // d/dz (z + xi)/(z - xi) = -2 xi / (z - xi)^2
            exponent_deriv += a.omega * (-2.0 * a.xi) / (den * den);
        }
        let value = exponent.exp();
        Ok((value, value * exponent_deriv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::cx;
    use approx::assert_relative_eq;

    #[test]
    fn origin_zero_is_identity_factor() {
        assert_eq!(blaschke_factor(cx(0.0, 0.0), cx(0.5, 0.0)), cx(0.5, 0.0));
    }

    #[test]
    fn symmetric_pair_at_origin() {
        let b = BlaschkeProduct::new(vec![cx(0.5, 0.0), cx(-0.5, 0.0)]).unwrap();
        let (v, _) = b.eval(cx(0.0, 0.0));
        assert_relative_eq!(v.re, 0.25, max_relative = 1e-14);
        assert_relative_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn factors_are_unimodular_on_circle() {
        let b = BlaschkeProduct::new(vec![cx(0.3, 0.4), cx(-0.7, 0.1), cx(0.0, -0.9)]).unwrap();
        for k in 0..16 {
            let z = Complex64::from_polar(1.0, 0.4 * k as f64);
            assert_relative_eq!(b.eval(z).0.norm(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn product_derivative_matches_finite_differences() {
        let b = BlaschkeProduct::new(vec![cx(0.5, 0.2), cx(-0.3, -0.4), cx(0.1, 0.0)]).unwrap();
        let z = cx(0.35, -0.2);
        let h = 1e-6;
        let fd = (b.eval(z + cx(h, 0.0)).0 - b.eval(z - cx(h, 0.0)).0) / (2.0 * h);
        let (_, d) = b.eval(z);
        assert!((d - fd).norm() / d.norm() < 1e-8);
    }

    #[test]
    fn derivative_at_a_zero_of_the_product() {
        let b = BlaschkeProduct::new(vec![cx(0.5, 0.0), cx(-0.25, 0.3)]).unwrap();
        let z = cx(0.5, 0.0);
        let (v, d) = b.eval(z);
        assert!(v.norm() < 1e-14);
        let h = 1e-6;
        let fd = (b.eval(z + cx(h, 0.0)).0 - b.eval(z - cx(h, 0.0)).0) / (2.0 * h);
        assert!((d - fd).norm() / d.norm() < 1e-8);
    }

    #[test]
    fn unit_atom_matches_closed_form() {
        let s = SingularFactor::new(vec![Atom {
            xi: cx(1.0, 0.0),
            omega: 1.0,
        }])
        .unwrap();
        let (at_zero, deriv) = s.eval(cx(0.0, 0.0)).unwrap();
        assert_relative_eq!(at_zero.re, (-1.0f64).exp(), max_relative = 1e-14);
        // exp((z+1)/(z-1)) has derivative -2 e^{-1} at the origin
        assert_relative_eq!(deriv.re, -2.0 * (-1.0f64).exp(), max_relative = 1e-13);

        let (at_half, _) = s.eval(cx(-0.5, 0.0)).unwrap();
        assert_relative_eq!(at_half.re, (-1.0f64 / 3.0).exp(), max_relative = 1e-14);
    }

    #[test]
    fn atom_guard_band_refuses_evaluation() {
        let s = SingularFactor::new(vec![Atom {
            xi: cx(1.0, 0.0),
            omega: 1.0,
        }])
        .unwrap();
        assert!(matches!(
            s.eval(cx(1.0 - 1e-13, 0.0)),
            Err(Error::AtEssentialSingularity(_))
        ));
    }

    #[test]
    fn truncation_bound_scales_with_depth() {
        let b = BlaschkeProduct::with_tail(vec![cx(0.5, 0.0)], 1e-6).unwrap();
        assert_relative_eq!(b.truncation_bound(cx(0.0, 0.0)), 2e-6, max_relative = 1e-12);
        assert_relative_eq!(
            b.truncation_bound(cx(0.9, 0.0)),
            2e-5,
            max_relative = 1e-9
        );
    }
}
