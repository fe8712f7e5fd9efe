//! Reproducing kernels for the Hardy space and for model spaces, plus the
//! norm identities that make composition operators measurable: boundary
//! integrals, the Littlewood-Paley identity, the Stanton counting-function
//! formula, Cohn-type weighted energies, and the empirical probes behind the
//! weak-convergence lemma for normalized model kernels.
//!
//! Conventions used throughout: `dA` is normalized area measure (the disk has
//! mass 1) and `dm` is normalized arc length. Under these,
//!
//! ```text
//! ||f||^2 = integral of |f'(z)|^2 log(1/|z|^2) dA + |f(0)|^2
//! ||f o phi||^2 = 2 integral of |f'(w)|^2 N(w) dA(w) + |f(phi(0))|^2
//! ```
//!
//! The first is calibrated by `f(z) = z` (the weight integrates to exactly 1,
//! see `calibration_on_the_identity_function`); the second is consistent with
//! it because `N(w) = -log|w|` for the identity map.

use crate::counting::nevanlinna;
use crate::error::{Error, Result};
use crate::inner::InnerFunction;
use crate::maps::{HyperbolicDisk, MapExpr};
use crate::poly::Poly;
use crate::quad::{circle_average_complex, circle_average_fallible, DiskGrid};
use crate::util::{cx, pairwise_sum};
use num_complex::Complex64;
use rayon::prelude::*;

/// Default relative tolerance for cross-method norm agreement.
pub const NORM_AGREEMENT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpace {
    Hardy,
    Model(InnerFunction),
}

impl KernelSpace {
    /// theta(z) for the model space, the constant 0 for Hardy (so the shared
    /// kernel formula (1 - conj(theta(w)) theta(z))/(1 - conj(w) z) covers
    /// both).
    fn inner_at(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        match self {
            KernelSpace::Hardy => Ok((cx(0.0, 0.0), cx(0.0, 0.0))),
            KernelSpace::Model(theta) => {
                let ev = theta.eval(z)?;
                Ok((ev.value, ev.derivative))
            }
        }
    }
}

/// A reproducing kernel: Hardy `k_w(z) = 1/(1 - conj(w) z)` or model
/// `kappa_w(z) = (1 - conj(theta(w)) theta(z))/(1 - conj(w) z)`, optionally
/// normalized to unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub space: KernelSpace,
    pub anchor: Complex64,
    pub normalized: bool,
}

impl KernelSpec {
    pub fn hardy(anchor: Complex64) -> Result<KernelSpec> {
        KernelSpec::new(KernelSpace::Hardy, anchor)
    }

    pub fn model(theta: InnerFunction, anchor: Complex64) -> Result<KernelSpec> {
        KernelSpec::new(KernelSpace::Model(theta), anchor)
    }

    pub fn new(space: KernelSpace, anchor: Complex64) -> Result<KernelSpec> {
        if anchor.norm() >= 1.0 {
            return Err(Error::PointOutsideDomain(anchor));
        }
        Ok(KernelSpec {
            space,
            anchor,
            normalized: false,
        })
    }

    pub fn normalized(mut self) -> KernelSpec {
        self.normalized = true;
        self
    }

    /// Squared norm before normalization: `1/(1-|w|^2)` for Hardy,
    /// `(1-|theta(w)|^2)/(1-|w|^2)` for a model space.
    pub fn raw_norm_sq(&self) -> Result<f64> {
        let (tw, _) = self.space.inner_at(self.anchor)?;
        Ok((1.0 - tw.norm_sqr()) / (1.0 - self.anchor.norm_sqr()))
    }

    pub fn norm_sq(&self) -> Result<f64> {
        if self.normalized {
            Ok(1.0)
        } else {
            self.raw_norm_sq()
        }
    }

    pub fn norm(&self) -> Result<f64> {
        Ok(self.norm_sq()?.sqrt())
    }

    pub fn value(&self, zeta: Complex64) -> Result<Complex64> {
        let (tw, _) = self.space.inner_at(self.anchor)?;
        let (tz, _) = self.space.inner_at(zeta)?;
        let raw = (1.0 - tw.conj() * tz) / (1.0 - self.anchor.conj() * zeta);
        if self.normalized {
            Ok(raw / self.raw_norm_sq()?.sqrt())
        } else {
            Ok(raw)
        }
    }

    /// d/d zeta of the kernel. For a model space this is
    /// `-theta'(zeta) conj(theta(w))/(1 - conj(w) zeta)
    ///  + conj(w) (1 - conj(theta(w)) theta(zeta))/(1 - conj(w) zeta)^2`,
    /// which collapses to `conj(w)/(1 - conj(w) zeta)^2` for Hardy.
    pub fn derivative(&self, zeta: Complex64) -> Result<Complex64> {
        let (tw, _) = self.space.inner_at(self.anchor)?;
        let (tz, tdz) = self.space.inner_at(zeta)?;
        let wc = self.anchor.conj();
        let den = 1.0 - wc * zeta;
        let raw = -tdz * tw.conj() / den + wc * (1.0 - tw.conj() * tz) / (den * den);
        if self.normalized {
            Ok(raw / self.raw_norm_sq()?.sqrt())
        } else {
            Ok(raw)
        }
    }
}

/// A finite combination of (unnormalized) reproducing kernels,
/// `f = sum of c_i * kernel anchored at v_i`. Combinations of model kernels
/// lie in the model space by construction, which is the only membership
/// argument this crate ever needs.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub space: KernelSpace,
    pub anchors: Vec<Complex64>,
    pub coefficients: Vec<Complex64>,
}

impl TestFunction {
    pub fn new(
        space: KernelSpace,
        anchors: Vec<Complex64>,
        coefficients: Vec<Complex64>,
    ) -> Result<TestFunction> {
        if anchors.len() != coefficients.len() {
            return Err(Error::Precondition(format!(
                "{} anchors against {} coefficients",
                anchors.len(),
                coefficients.len()
            )));
        }
        if let Some(bad) = anchors.iter().find(|v| v.norm() >= 1.0) {
            return Err(Error::PointOutsideDomain(*bad));
        }
        Ok(TestFunction {
            space,
            anchors,
            coefficients,
        })
    }

    pub fn hardy(anchors: Vec<Complex64>, coefficients: Vec<Complex64>) -> Result<TestFunction> {
        TestFunction::new(KernelSpace::Hardy, anchors, coefficients)
    }

    pub fn model(
        theta: InnerFunction,
        anchors: Vec<Complex64>,
        coefficients: Vec<Complex64>,
    ) -> Result<TestFunction> {
        TestFunction::new(KernelSpace::Model(theta), anchors, coefficients)
    }

    fn spec_at(&self, i: usize) -> KernelSpec {
        KernelSpec {
            space: self.space.clone(),
            anchor: self.anchors[i],
            normalized: false,
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = cx(0.0, 0.0);
        for (i, c) in self.coefficients.iter().enumerate() {
            acc += c * self.spec_at(i).value(z)?;
        }
        Ok(acc)
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = cx(0.0, 0.0);
        for (i, c) in self.coefficients.iter().enumerate() {
            acc += c * self.spec_at(i).derivative(z)?;
        }
        Ok(acc)
    }

    /// Gram matrix `G[i][j] = kernel anchored at v_j, evaluated at v_i`.
    pub fn gram(&self) -> Result<Vec<Vec<Complex64>>> {
        let n = self.anchors.len();
        let mut g = vec![vec![cx(0.0, 0.0); n]; n];
        for j in 0..n {
            let spec = self.spec_at(j);
            for i in 0..n {
                g[i][j] = spec.value(self.anchors[i])?;
            }
        }
        Ok(g)
    }

    /// Exact squared norm through the Gram matrix: since
    /// `<k_u, k_v> = k_u(v)`, the norm is the Hermitian form of the
    /// coefficients against `G`.
    pub fn norm_sq(&self) -> Result<f64> {
        let g = self.gram()?;
        let n = self.anchors.len();
        let mut acc = cx(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.coefficients[i].conj() * g[i][j] * self.coefficients[j];
            }
        }
        Ok(acc.re)
    }

    /// `<f, kernel at w>`, which the reproducing property says is `f(w)`
    /// (divided by the norm when the spec is normalized).
    pub fn pair(&self, spec: &KernelSpec) -> Result<Complex64> {
        let raw = self.eval(spec.anchor)?;
        if spec.normalized {
            Ok(raw / spec.raw_norm_sq()?.sqrt())
        } else {
            Ok(raw)
        }
    }
}

/// Functions the norm identities accept: explicit polynomials, or kernel
/// combinations (whose exact norms come from the Gram matrix instead of
/// Taylor coefficients).
#[derive(Debug, Clone)]
pub enum H2Function {
    Polynomial(Poly),
    KernelCombination(TestFunction),
}

impl H2Function {
    pub fn polynomial(coeffs: Vec<Complex64>) -> H2Function {
        H2Function::Polynomial(Poly::new(coeffs))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            H2Function::Polynomial(p) => Ok(p.eval(z)),
            H2Function::KernelCombination(f) => f.eval(z),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        match self {
            H2Function::Polynomial(p) => Ok(p.eval_with_derivative(z).1),
            H2Function::KernelCombination(f) => f.derivative(z),
        }
    }

    /// The exact squared norm: sum of |a_n|^2 for a polynomial, the Gram
    /// form for a kernel combination.
    pub fn exact_norm_sq(&self) -> Result<f64> {
        match self {
            H2Function::Polynomial(p) => {
                Ok(p.coeffs().iter().map(|c| c.norm_sqr()).sum())
            }
            H2Function::KernelCombination(f) => f.norm_sq(),
        }
    }
}

impl From<Poly> for H2Function {
    fn from(p: Poly) -> H2Function {
        H2Function::Polynomial(p)
    }
}

impl From<TestFunction> for H2Function {
    fn from(f: TestFunction) -> H2Function {
        H2Function::KernelCombination(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    /// Exact: Taylor coefficients or the Gram matrix.
    Coefficients,
    /// Mean of |f|^2 over the circle.
    Boundary,
    /// Littlewood-Paley: integral of |f'|^2 log(1/|z|^2) dA plus |f(0)|^2.
    LittlewoodPaley,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionMethod {
    /// Mean of |f(phi(xi))|^2 over the circle.
    Boundary,
    /// Stanton: 2 integral of |f'|^2 N dA plus |f(phi(0))|^2.
    Counting,
}

/// Squared Hardy norm of `f` by the requested route.
pub fn h2_norm_sq(f: &H2Function, method: NormMethod, grid: &DiskGrid) -> Result<f64> {
    match method {
        NormMethod::Coefficients => f.exact_norm_sq(),
        NormMethod::Boundary => {
            circle_average_fallible(grid.angle_count(), |xi| Ok(f.eval(xi)?.norm_sqr()))
        }
        NormMethod::LittlewoodPaley => {
            let energy = grid.integrate_fallible(|z| {
                Ok(f.derivative(z)?.norm_sqr() * (1.0 / z.norm_sqr()).ln())
            })?;
            Ok(energy + f.eval(cx(0.0, 0.0))?.norm_sqr())
        }
    }
}

/// Boundary and Littlewood-Paley norms cross-checked against each other;
/// disagreement beyond 10x the tolerance means the grid cannot represent f.
pub fn h2_norm_sq_checked(f: &H2Function, grid: &DiskGrid, rel_tol: f64) -> Result<f64> {
    let boundary = h2_norm_sq(f, NormMethod::Boundary, grid)?;
    let lp = h2_norm_sq(f, NormMethod::LittlewoodPaley, grid)?;
    if (boundary - lp).abs() > 10.0 * rel_tol * boundary.abs().max(1e-12) {
        return Err(Error::GridTooCoarse(boundary, lp));
    }
    Ok(boundary)
}

/// Squared norm of `f` composed with `phi`.
pub fn composition_norm_sq(
    f: &H2Function,
    phi: &MapExpr,
    method: CompositionMethod,
    grid: &DiskGrid,
) -> Result<f64> {
    match method {
        CompositionMethod::Boundary => {
            circle_average_fallible(grid.angle_count(), |xi| {
                let w = phi.eval(xi)?.value;
                Ok(f.eval(w)?.norm_sqr())
            })
        }
        CompositionMethod::Counting => {
            let energy = grid.integrate_fallible(|w| {
                let n = match nevanlinna(phi, w) {
                    Ok(sample) => sample.value,
                    // fibers outside the closure of phi's range are empty
                    Err(Error::PointOutsideDomain(_)) => 0.0,
                    Err(e) => return Err(e),
                };
                if n == 0.0 {
                    return Ok(0.0);
                }
                Ok(2.0 * f.derivative(w)?.norm_sqr() * n)
            })?;
            Ok(energy + f.eval(phi.at_origin())?.norm_sqr())
        }
    }
}

/// The central cross-oracle: the boundary value of `||f o phi||^2` checked
/// against the counting-function route.
pub fn composition_norm_sq_checked(
    f: &H2Function,
    phi: &MapExpr,
    grid: &DiskGrid,
    rel_tol: f64,
) -> Result<f64> {
    let boundary = composition_norm_sq(f, phi, CompositionMethod::Boundary, grid)?;
    let counting = composition_norm_sq(f, phi, CompositionMethod::Counting, grid)?;
    if (boundary - counting).abs() > 10.0 * rel_tol * boundary.abs().max(1e-12) {
        return Err(Error::GridTooCoarse(boundary, counting));
    }
    Ok(boundary)
}

/// Weighted energy `E_p(f) = integral of |f'(z)|^2 (1-|z|)/(1-|theta(z)|)^p dA`
/// together with the diagnostic ratio `E_p(f)/||f||^2`.
///
/// Grid points where theta's truncation tail cannot certify the weight are
/// not silently dropped: their contribution is estimated from the truncated
/// value with the modulus pushed to its upper bound (which can only enlarge
/// the weight) and reported separately.
#[derive(Debug, Clone, Copy)]
pub struct CohnEnergy {
    pub value: f64,
    pub ratio: f64,
    /// Number of grid nodes whose weight was not certified.
    pub flagged_nodes: usize,
    /// Their total (over-)estimated contribution, already included in value.
    pub flagged_bound: f64,
}

pub fn cohn_energy(f: &TestFunction, p: f64, grid: &DiskGrid) -> Result<CohnEnergy> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Precondition(format!(
            "exponent p = {p} outside (0, 1]"
        )));
    }
    let theta = match &f.space {
        KernelSpace::Model(theta) => theta,
        KernelSpace::Hardy => {
            return Err(Error::Precondition(
                "weighted energy is defined on model-space functions".into(),
            ))
        }
    };
    let budget = theta.truncation_budget();

    // one pass per radial ring so flags can be tallied deterministically
    let rings: Vec<Result<(f64, usize, f64)>> = grid
        .radial_nodes()
        .par_iter()
        .map(|&(r, weight)| {
            let mut vals = Vec::with_capacity(grid.angle_count());
            let mut flagged = 0usize;
            let mut flagged_sum = 0.0;
            for j in 0..grid.angle_count() {
                let t = 2.0 * std::f64::consts::PI * j as f64 / grid.angle_count() as f64;
                let z = Complex64::from_polar(r, t);
                let (ev, bound) = theta.eval_uncertified(z)?;
                let certified = bound <= budget;
                let modulus = if certified {
                    ev.value.norm()
                } else {
                    (ev.value.norm() + bound).min(1.0 - 1e-15)
                };
                let weight_p = (1.0 - modulus).powf(-p);
                // kernel derivative built from the same theta samples
                let mut fd = cx(0.0, 0.0);
                for (i, c) in f.coefficients.iter().enumerate() {
                    let v = f.anchors[i];
                    let (tv, _) = KernelSpace::Model(theta.clone()).inner_at(v)?;
                    let den = 1.0 - v.conj() * z;
                    fd += c
                        * (-ev.derivative * tv.conj() / den
                            + v.conj() * (1.0 - tv.conj() * ev.value) / (den * den));
                }
                let contribution = fd.norm_sqr() * (1.0 - z.norm()) * weight_p;
                vals.push(contribution);
                if !certified {
                    flagged += 1;
                    flagged_sum += weight * contribution / grid.angle_count() as f64;
                }
            }
            Ok((
                weight * pairwise_sum(&vals) / grid.angle_count() as f64,
                flagged,
                flagged_sum,
            ))
        })
        .collect();

    let mut value = Vec::new();
    let mut flagged_nodes = 0;
    let mut flagged_bound = 0.0;
    for ring in rings {
        let (v, fl, fb) = ring?;
        value.push(v);
        flagged_nodes += fl;
        flagged_bound += fb;
    }
    let value = pairwise_sum(&value);
    let norm_sq = f.norm_sq()?;
    Ok(CohnEnergy {
        value,
        ratio: value / norm_sq,
        flagged_nodes,
        flagged_bound,
    })
}

/// One row of the weak-convergence probe table.
#[derive(Debug, Clone, Copy)]
pub struct KernelProbeRow {
    pub w: Complex64,
    pub theta_modulus: f64,
    /// max over the test family of |<normalized kernel at w, f>|
    pub max_pairing: f64,
    /// min over a 32-point sample of the hyperbolic disk around w of
    /// |kappa_w'(zeta)| (1-|w|^2)^2 — the empirical lower constant
    pub min_scaled_derivative: f64,
}

#[derive(Debug, Clone)]
pub struct KernelProbes {
    pub rows: Vec<KernelProbeRow>,
    pub modulus_bound: f64,
    pub eps: f64,
}

/// Probes the two quantitative halves of the kernel lemma along a sequence
/// `w_n` with `|theta(w_n)| <= a`: the pairings of normalized kernels against
/// a fixed test family (expected to decay — weak null-ness made finite), and
/// the scaled derivative minimum over hyperbolic disks (the empirical
/// constant in the lower derivative bound).
pub fn kernel_probes(
    theta: &InnerFunction,
    sequence: &[Complex64],
    modulus_bound: f64,
    eps: f64,
    test_fns: &[TestFunction],
) -> Result<KernelProbes> {
    if !(modulus_bound > 0.0 && modulus_bound < 1.0) {
        return Err(Error::Precondition(format!(
            "modulus bound a = {modulus_bound} outside (0, 1)"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!(
            "hyperbolic radius eps = {eps} outside (0, 1)"
        )));
    }
    let mut rows = Vec::with_capacity(sequence.len());
    for (index, &w) in sequence.iter().enumerate() {
        let tw = theta.eval(w)?.value;
        if tw.norm() >= modulus_bound {
            return Err(Error::HypothesisViolated {
                index,
                value: tw.norm(),
                bound: modulus_bound,
            });
        }
        let spec = KernelSpec::model(theta.clone(), w)?;
        let raw_norm = spec.raw_norm_sq()?.sqrt();
        let mut max_pairing = 0.0f64;
        for f in test_fns {
            let pairing = f.eval(w)?.norm() / raw_norm;
            max_pairing = max_pairing.max(pairing);
        }

        let disk = HyperbolicDisk::new(w, eps)?;
        let center = disk.euclidean_center();
        let radius = disk.euclidean_radius();
        let scale = (1.0 - w.norm_sqr()).powi(2);
        let mut min_scaled = f64::INFINITY;
        for i in 0..4 {
            let r = radius * (i as f64 + 0.5) / 4.0;
            for j in 0..8 {
                let ang = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / 8.0;
                let zeta = center + Complex64::from_polar(r, ang);
                let d = spec.derivative(zeta)?.norm();
                min_scaled = min_scaled.min(d * scale);
            }
        }
        rows.push(KernelProbeRow {
            w,
            theta_modulus: tw.norm(),
            max_pairing,
            min_scaled_derivative: min_scaled,
        });
    }
    Ok(KernelProbes {
        rows,
        modulus_bound,
        eps,
    })
}

/// `<f, kernel at w>` computed the slow way, as a boundary integral — the
/// honest (non-tautological) witness of the reproducing property.
pub fn boundary_pairing(
    f: &TestFunction,
    spec: &KernelSpec,
    angles: usize,
) -> Result<Complex64> {
    circle_average_complex(angles, |xi| Ok(f.eval(xi)? * spec.value(xi)?.conj()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::BlaschkeProduct;
    use approx::assert_relative_eq;

    fn theta_one() -> InnerFunction {
        InnerFunction::atom(cx(1.0, 0.0), 1.0).unwrap()
    }

    fn monomial(n: usize) -> H2Function {
        let mut coeffs = vec![cx(0.0, 0.0); n + 1];
        coeffs[n] = cx(1.0, 0.0);
        H2Function::polynomial(coeffs)
    }

    /// f(z) = z as a model-space kernel combination for theta = z^2:
    /// kappa_a = 1 + conj(a) z there, so z = (kappa_a - kappa_0)/conj(a).
    fn z_in_model_z2() -> TestFunction {
        let theta = InnerFunction::from_zeros(vec![cx(0.0, 0.0), cx(0.0, 0.0)]).unwrap();
        TestFunction::model(
            theta,
            vec![cx(0.0, 0.0), cx(0.5, 0.0)],
            vec![cx(-2.0, 0.0), cx(2.0, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn model_kernel_with_full_inner_function_is_constant() {
        // theta(z) = z: K_theta is the constants and every kernel is 1
        let theta = InnerFunction::from_zeros(vec![cx(0.0, 0.0)]).unwrap();
        let spec = KernelSpec::model(theta, cx(0.3, -0.4)).unwrap();
        for zeta in [cx(0.0, 0.0), cx(0.5, 0.2), cx(-0.9, 0.0)] {
            assert_relative_eq!(spec.value(zeta).unwrap().re, 1.0, max_relative = 1e-14);
            assert!(spec.value(zeta).unwrap().im.abs() < 1e-14);
            assert!(spec.derivative(zeta).unwrap().norm() < 1e-13);
        }
        assert_relative_eq!(spec.norm().unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn hardy_kernel_closed_forms() {
        let spec = KernelSpec::hardy(cx(0.5, 0.0)).unwrap();
        assert_relative_eq!(spec.norm().unwrap(), (4.0f64 / 3.0).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(
            spec.derivative(cx(0.0, 0.0)).unwrap().re,
            0.5,
            max_relative = 1e-14
        );
        let at_origin = KernelSpec::hardy(cx(0.0, 0.0)).unwrap();
        for zeta in [cx(0.3, 0.3), cx(-0.7, 0.1)] {
            assert_relative_eq!(at_origin.value(zeta).unwrap().re, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn atomic_inner_kernel_at_the_origin() {
        let spec = KernelSpec::model(theta_one(), cx(0.0, 0.0)).unwrap();
        let e2 = (-2.0f64).exp();
        assert_relative_eq!(
            spec.value(cx(0.0, 0.0)).unwrap().re,
            1.0 - e2,
            max_relative = 1e-12
        );
        assert_relative_eq!(spec.norm().unwrap(), (1.0 - e2).sqrt(), max_relative = 1e-12);
        // theta_1'(0) = -2/e, so kappa_0'(0) = -conj(theta_1(0)) theta_1'(0) = 2 e^{-2}
        assert_relative_eq!(
            spec.derivative(cx(0.0, 0.0)).unwrap().re,
            2.0 * e2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn finite_differences_confirm_kernel_derivatives() {
        let blaschke = BlaschkeProduct::new(vec![cx(0.3, 0.0), cx(0.0, -0.4)]).unwrap();
        let theta = InnerFunction::from_zeros(blaschke.zeros().to_vec()).unwrap();
        let specs = [
            KernelSpec::hardy(cx(0.4, 0.3)).unwrap(),
            KernelSpec::model(theta, cx(-0.2, 0.5)).unwrap(),
        ];
        let h = 1e-6;
        for spec in &specs {
            for zeta in [cx(0.0, 0.0), cx(0.5, -0.3), cx(-0.95, 0.0), cx(0.2, 0.7)] {
                let fd = (spec.value(zeta + cx(h, 0.0)).unwrap()
                    - spec.value(zeta - cx(h, 0.0)).unwrap())
                    / (2.0 * h);
                let an = spec.derivative(zeta).unwrap();
                assert_relative_eq!(fd.re, an.re, max_relative = 1e-5, epsilon = 1e-9);
                assert_relative_eq!(fd.im, an.im, max_relative = 1e-5, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn calibration_on_the_identity_function() {
        // the whole Littlewood-Paley convention hangs on || z ||^2 = 1
        let grid = DiskGrid::default_grid();
        let f = monomial(1);
        for method in [
            NormMethod::Coefficients,
            NormMethod::Boundary,
            NormMethod::LittlewoodPaley,
        ] {
            assert_relative_eq!(
                h2_norm_sq(&f, method, &grid).unwrap(),
                1.0,
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn monomials_are_orthonormal_in_the_norm_identities() {
        let grid = DiskGrid::default_grid();
        let f = H2Function::polynomial(vec![cx(1.0, 0.0), cx(1.0, 0.0)]);
        for method in [
            NormMethod::Coefficients,
            NormMethod::Boundary,
            NormMethod::LittlewoodPaley,
        ] {
            assert_relative_eq!(
                h2_norm_sq(&f, method, &grid).unwrap(),
                2.0,
                max_relative = 1e-5
            );
        }
    }

    #[test]
    fn hardy_kernel_norm_by_every_route() {
        let grid = DiskGrid::default_grid();
        let f: H2Function = TestFunction::hardy(vec![cx(0.5, 0.0)], vec![cx(1.0, 0.0)])
            .unwrap()
            .into();
        assert_relative_eq!(
            h2_norm_sq(&f, NormMethod::Coefficients, &grid).unwrap(),
            4.0 / 3.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            h2_norm_sq(&f, NormMethod::Boundary, &grid).unwrap(),
            4.0 / 3.0,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            h2_norm_sq_checked(&f, &grid, NORM_AGREEMENT_TOL).unwrap(),
            4.0 / 3.0,
            max_relative = 1e-4
        );
    }

    #[test]
    fn composing_with_the_identity_changes_nothing() {
        let grid = DiskGrid::default_grid();
        let f = H2Function::polynomial(vec![cx(1.0, 0.0), cx(1.0, 0.0)]);
        let id = MapExpr::identity();
        for method in [CompositionMethod::Boundary, CompositionMethod::Counting] {
            assert_relative_eq!(
                composition_norm_sq(&f, &id, method, &grid).unwrap(),
                2.0,
                max_relative = 1e-4
            );
        }
    }

    #[test]
    fn squaring_preserves_the_unit_monomial() {
        let grid = DiskGrid::default_grid();
        let phi = MapExpr::polynomial(vec![cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)]).unwrap();
        let f = monomial(1);
        for method in [CompositionMethod::Boundary, CompositionMethod::Counting] {
            assert_relative_eq!(
                composition_norm_sq(&f, &phi, method, &grid).unwrap(),
                1.0,
                max_relative = 1e-4
            );
        }
    }

    #[test]
    fn tangent_map_composition_norm_is_one_half() {
        // phi = 2z/(3-z): the composition z o phi has Taylor coefficients
        // 2/3^{n+1}, so the squared norm is the geometric sum 1/2
        let grid = DiskGrid::default_grid();
        let phi = crate::maps::tests::tangent_disk_map();
        let f = monomial(1);
        let boundary =
            composition_norm_sq(&f, &phi, CompositionMethod::Boundary, &grid).unwrap();
        assert_relative_eq!(boundary, 0.5, max_relative = 1e-10);
        let counting =
            composition_norm_sq(&f, &phi, CompositionMethod::Counting, &grid).unwrap();
        assert_relative_eq!(counting, 0.5, max_relative = 1e-4);
        assert_relative_eq!(
            composition_norm_sq_checked(&f, &phi, &grid, 1e-3).unwrap(),
            0.5,
            max_relative = 1e-3
        );
    }

    #[test]
    fn origin_fixing_composition_is_contractive() {
        let grid = DiskGrid::default_grid();
        let maps = [
            MapExpr::scale(cx(0.5, 0.0)).unwrap(),
            MapExpr::polynomial(vec![cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)]).unwrap(),
        ];
        let fs = [
            monomial(1),
            H2Function::polynomial(vec![cx(0.3, 0.0), cx(-0.5, 0.2), cx(0.0, 0.0), cx(1.0, 0.0)]),
        ];
        for phi in &maps {
            for f in &fs {
                let comp =
                    composition_norm_sq(f, phi, CompositionMethod::Boundary, &grid).unwrap();
                let plain = f.exact_norm_sq().unwrap();
                assert!(comp <= plain + 1e-9, "{comp} > {plain}");
            }
        }
    }

    #[test]
    fn energy_of_a_constant_vanishes() {
        let theta = InnerFunction::from_zeros(vec![cx(0.0, 0.0)]).unwrap();
        let f = TestFunction::model(theta, vec![cx(0.0, 0.0)], vec![cx(1.0, 0.0)]).unwrap();
        let grid = DiskGrid::default_grid();
        let energy = cohn_energy(&f, 0.5, &grid).unwrap();
        assert!(energy.value < 1e-20);
        assert_eq!(energy.flagged_nodes, 0);
    }

    #[test]
    fn vanishing_exponent_recovers_the_plain_weight() {
        // with p ~ 0 the weight is 1 and E = integral of (1-|z|) dA = 1/3
        let grid = DiskGrid::default_grid();
        let energy = cohn_energy(&z_in_model_z2(), 1e-9, &grid).unwrap();
        assert_relative_eq!(energy.value, 1.0 / 3.0, max_relative = 1e-6);
        assert_eq!(energy.flagged_nodes, 0);
        assert_relative_eq!(energy.ratio, 1.0 / 3.0, max_relative = 1e-6);
    }

    #[test]
    fn energy_self_convergence_under_refinement() {
        let coarse = cohn_energy(&z_in_model_z2(), 0.5, &DiskGrid::default_grid()).unwrap();
        let fine = cohn_energy(&z_in_model_z2(), 0.5, &DiskGrid::default_grid().refined())
            .unwrap();
        assert_relative_eq!(coarse.value, fine.value, max_relative = 1e-4);
    }

    #[test]
    fn uncertified_weights_are_flagged_not_dropped() {
        let theta = InnerFunction::sparse_tangential(2)
            .unwrap()
            .with_budget(1e-2);
        let f = TestFunction::model(theta, vec![cx(0.1, 0.0)], vec![cx(1.0, 0.0)]).unwrap();
        let energy = cohn_energy(&f, 0.5, &DiskGrid::default_grid()).unwrap();
        assert!(energy.flagged_nodes > 0);
        assert!(energy.value.is_finite());
        assert!(energy.flagged_bound > 0.0);
        assert!(energy.flagged_bound <= energy.value + 1e-12);
    }

    #[test]
    fn probe_hypothesis_rejects_full_modulus() {
        let theta = InnerFunction::from_zeros(vec![cx(0.0, 0.0)]).unwrap();
        let sequence: Vec<Complex64> = (3..=10).map(|n| cx(1.0 - 0.5f64.powi(n), 0.0)).collect();
        let err = kernel_probes(&theta, &sequence, 0.5, 0.3, &[]).unwrap_err();
        match err {
            Error::HypothesisViolated { index, value, bound } => {
                assert_eq!(index, 0);
                assert!(value >= bound);
            }
            other => panic!("expected HypothesisViolated, got {other}"),
        }
    }

    #[test]
    fn probes_decay_along_an_atomic_radial_sequence() {
        // |theta_1(r)| = exp(-(1+r)/(1-r)) is microscopic on r = 1 - 2^{-n}
        let theta = theta_one();
        let sequence: Vec<Complex64> = (3..=10).map(|n| cx(1.0 - 0.5f64.powi(n), 0.0)).collect();
        let f = TestFunction::model(theta.clone(), vec![cx(0.0, 0.0)], vec![cx(1.0, 0.0)])
            .unwrap();
        let probes = kernel_probes(&theta, &sequence, 0.5, 0.3, &[f]).unwrap();
        assert_eq!(probes.rows.len(), 8);
        for pair in probes.rows.windows(2) {
            assert!(pair[1].max_pairing < pair[0].max_pairing);
        }
        assert!(probes.rows[7].max_pairing < probes.rows[0].max_pairing / 10.0);
        for row in &probes.rows {
            assert!(row.theta_modulus < 1e-6);
            assert!(row.min_scaled_derivative.is_finite());
            assert!(row.min_scaled_derivative >= 0.0);
        }
    }

    #[test]
    fn boundary_integral_reproduces_point_values() {
        let theta = InnerFunction::from_zeros(vec![cx(0.0, 0.0), cx(0.0, 0.0)]).unwrap();
        let f = TestFunction::model(
            theta.clone(),
            vec![cx(0.3, 0.0), cx(-0.2, 0.0)],
            vec![cx(1.0, 0.5), cx(-0.7, 0.0)],
        )
        .unwrap();
        let spec = KernelSpec::model(theta, cx(0.4, 0.1)).unwrap();
        let paired = boundary_pairing(&f, &spec, 4096).unwrap();
        let direct = f.eval(cx(0.4, 0.1)).unwrap();
        assert!((paired - direct).norm() < 1e-10, "{paired} vs {direct}");
    }

    #[test]
    fn gram_norms_are_nonnegative_and_match_pairings() {
        let f = TestFunction::hardy(
            vec![cx(0.5, 0.0), cx(-0.3, 0.4), cx(0.0, -0.6)],
            vec![cx(1.0, -1.0), cx(0.25, 0.0), cx(0.0, 2.0)],
        )
        .unwrap();
        let n2 = f.norm_sq().unwrap();
        assert!(n2 >= 0.0);
        // norm through the boundary route agrees
        let grid = DiskGrid::default_grid();
        let h: H2Function = f.into();
        assert_relative_eq!(
            h2_norm_sq(&h, NormMethod::Boundary, &grid).unwrap(),
            n2,
            max_relative = 1e-10
        );
    }

    #[test]
    fn normalized_kernels_have_unit_norm_and_scaled_values() {
        let spec = KernelSpec::hardy(cx(0.5, 0.0)).unwrap().normalized();
        assert_eq!(spec.norm_sq().unwrap(), 1.0);
        // value at the anchor equals the raw norm
        let at_anchor = spec.value(cx(0.5, 0.0)).unwrap();
        assert_relative_eq!(at_anchor.re, (4.0f64 / 3.0).sqrt(), max_relative = 1e-13);
    }
}
