//! Dense complex polynomials and a simultaneous (Aberth–Ehrlich) root finder.
//!
//! Coefficients are stored in ascending order. The root finder is the exact
//! backend of the rational preimage engine, so it favors robustness over
//! speed: trailing zero coefficients are stripped off as exact roots at the
//! origin, degrees one and two are solved in closed form, and everything else
//! goes through Aberth iteration with a residual check at the end.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    /// Build from ascending coefficients, trimming negligible leading terms.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    pub fn identity() -> Self {
        Poly::new(vec![ZERO, Complex64::new(1.0, 0.0)])
    }

    fn trim(&mut self) {
        let max = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        let cutoff = max * 1e-14;
        while let Some(last) = self.coeffs.last() {
            if self.coeffs.len() > 1 && last.norm() <= cutoff {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(ZERO);
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Horner evaluation of the polynomial and its derivative in one pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(ZERO);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Poly::new(coeffs)
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![ZERO; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        Poly::new(coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut coeffs = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }

    pub fn pow(&self, mut n: usize) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::constant(Complex64::new(1.0, 0.0));
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Substitute the fraction `num/den` for the variable and clear
    /// denominators: returns `den^deg(self) * self(num/den)`.
    pub fn compose_fraction(&self, num: &Poly, den: &Poly) -> Poly {
        let d = self.degree();
        let mut acc = Poly::constant(ZERO);
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let term = num.pow(k).mul(&den.pow(d - k)).scale(c);
            acc = acc.add(&term);
        }
        acc
    }

    /// All complex roots, with multiplicity expressed by repetition.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::Precondition(
                "cannot enumerate roots of the zero polynomial".into(),
            ));
        }
        let mut coeffs = self.coeffs.clone();
        let mut roots = Vec::new();

        // Exact roots at the origin: strip trailing (low-order) zeros.
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        while coeffs.len() > 1 && coeffs[0].norm() <= max * 1e-300 {
            roots.push(ZERO);
            coeffs.remove(0);
        }

        let p = Poly::new(coeffs);
        match p.degree() {
            0 => {}
            1 => roots.push(-p.coeffs[0] / p.coeffs[1]),
            2 => roots.extend(quadratic_roots(p.coeffs[0], p.coeffs[1], p.coeffs[2])),
            _ => roots.extend(aberth(&p)?),
        }
        Ok(roots)
    }
}

/// Numerically stable quadratic formula (a + b z + c z^2).
fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Pick the sign that avoids cancellation in b +/- disc.
    let q = if (b + disc).norm() >= (b - disc).norm() {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q.norm() == 0.0 {
        [ZERO, ZERO]
    } else {
        [q / c, a / q]
    }
}

/// Aberth–Ehrlich simultaneous iteration.
fn aberth(p: &Poly) -> Result<Vec<Complex64>> {
    let n = p.degree();
    let lead = p.coeffs()[n];

    // Upper root bound (Cauchy) for the initial ring of guesses.
    let bound = 1.0
        + p.coeffs()[..n]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0f64, f64::max);
    let radius = bound.min(1e6);

    let mut zs: Vec<Complex64> = (0..n)
        .map(|k| {
            // Slightly irrational angular offset avoids symmetric stalls.
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.357) / n as f64;
            Complex64::from_polar(0.5 * radius, angle)
        })
        .collect();

    let mut offsets = vec![ZERO; n];
    for iter in 0..400 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (pv, dv) = p.eval_with_derivative(zs[i]);
            if pv.norm() == 0.0 {
                offsets[i] = ZERO;
                continue;
            }
            let newton = if dv.norm() > 0.0 { pv / dv } else { pv };
            let mut rep = ZERO;
            for j in 0..n {
                if j != i {
                    let diff = zs[i] - zs[j];
                    // Coincident iterates: nudge instead of dividing by zero.
                    if diff.norm() < 1e-300 {
                        rep += Complex64::new(1e150, 0.0);
                    } else {
                        rep += 1.0 / diff;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * rep;
            let step = if denom.norm() < 1e-300 {
                newton
            } else {
                newton / denom
            };
            offsets[i] = step;
            max_step = max_step.max(step.norm() / (1.0 + zs[i].norm()));
        }
        for i in 0..n {
            zs[i] -= offsets[i];
        }
        if max_step < 1e-14 {
            return Ok(zs);
        }
        // Late-stage stagnation with tiny residuals is still a success.
        if iter > 350 {
            let worst = zs
                .iter()
                .map(|&z| relative_residual(p, z))
                .fold(0.0f64, f64::max);
            if worst < 1e-11 {
                return Ok(zs);
            }
        }
    }

    let worst = zs
        .iter()
        .map(|&z| relative_residual(p, z))
        .fold(0.0f64, f64::max);
    if worst < 1e-9 {
        // Multiple roots converge slowly in step size while the residual is
        // already at the attainable floor; accept and let callers cluster.
        Ok(zs)
    } else {
        Err(Error::NoConvergence(
            "aberth iteration",
            format!("degree {n}, worst relative residual {worst:.3e}"),
        ))
    }
}

fn relative_residual(p: &Poly, z: Complex64) -> f64 {
    let scale: f64 = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm() * z.norm().powi(k as i32))
        .sum();
    p.eval(z).norm() / scale.max(1e-300)
}

/// Merge points closer than `tol` into representatives with multiplicities.
pub fn cluster(points: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &p in points {
        match clusters
            .iter_mut()
            .find(|(rep, _)| (*rep - p).norm() <= tol)
        {
            Some((rep, count)) => {
                // Running mean keeps the representative centered.
                *rep = (*rep * *count as f64 + p) / (*count as f64 + 1.0);
                *count += 1;
            }
            None => clusters.push((p, 1)),
        }
    }
    clusters
}
