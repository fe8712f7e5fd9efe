//! Aleksandrov–Clark measures of a holomorphic self-map of the disk.
//!
//! For a self-map `φ` and a unimodular parameter `α`, the function
//! `(α + φ)/(α − φ)` has positive real part, so it is the Herglotz
//! transform of a finite positive measure `μ_α` on the circle.  This
//! module estimates the pieces of that measure a verdict can consume:
//! the boundary density `h_α = (1 − |φ|²)/|α − φ|²` (the density of the
//! absolutely continuous part), its integral, point masses located and
//! sized through the radial Poisson quotient, and the pushforward of
//! arc length under `φ` as a sanity histogram.
//!
//! Point masses never show up in the boundary density — for the disk
//! automorphism-like maps shipped here the density stays bounded while
//! the measure carries an atom — so the singular mass is obtained by
//! difference: `singular = total − ac`.  Everything the quadrature had
//! to skip (arcs excised around poles of the density) is reported with
//! a quotient-based bound instead of being silently dropped.

use crate::error::{Error, Result};
use crate::maps::MapExpr;
use crate::quad::{circle_average_fallible, golden_min};
use crate::util::pairwise_sum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Default number of equispaced boundary sample points.
pub const DEFAULT_BOUNDARY_GRID: usize = 4096;

/// Half-width of the arc excised around a detected density pole, in units
/// of the grid step.
const EXCISION_STEPS: f64 = 4.0;

/// Radius at which the pole pre-filter samples `|α − φ(rξ)|`.
const PREFILTER_RADIUS: f64 = 1.0 - 1e-4;

/// A boundary point is a pole candidate when the pre-filter distance
/// drops below this.
const PREFILTER_DIST: f64 = 1e-2;

/// Successive Richardson extrapolants of the atom quotient must agree
/// to this before the limit is trusted.
const QUOTIENT_SETTLE: f64 = 1e-3;

/// Extrapolated atom masses below this snap to zero: the quotient decayed.
const MASS_FLOOR: f64 = 1e-6;

/// Blaschke zeros with `1 − |λ|` below this seed atom candidates.
const NEAR_BOUNDARY: f64 = 1e-2;

/// Squared distance below which the density is treated as a pole hit.
const POLE_GUARD_SQ: f64 = 1e-24;

/// Retry offset when a boundary sample lands in a singular atom's guard band.
const NUDGE: f64 = 1e-9;

/// A located point mass of `μ_α`.
#[derive(Debug, Clone, Serialize)]
pub struct AtomFinding {
    /// Unimodular location of the atom.
    #[serde(with = "crate::util::complex_pair")]
    pub location: Complex64,
    pub mass: f64,
    /// The raw quotient curve `(r, q(r))` the mass was extrapolated from.
    pub quotient_curve: Vec<(f64, f64)>,
}

/// Result of the radial Poisson-quotient limit at one boundary point.
#[derive(Debug, Clone, Serialize)]
pub struct AtomMass {
    pub mass: f64,
    /// Disagreement of the last two Richardson extrapolants.
    pub error_estimate: f64,
    pub quotient_curve: Vec<(f64, f64)>,
}

/// Decomposition of one Clark measure `μ_α`.
#[derive(Debug, Clone)]
pub struct ClarkReport {
    pub alpha: Complex64,
    pub boundary_grid: usize,
    /// Included boundary samples `(ξ, h_α(ξ))`, thinned to at most 4096 pairs.
    pub density_samples: Vec<(Complex64, f64)>,
    pub total_mass: f64,
    /// Trapezoid value of `∫ h_α dm` over the non-excised part of the circle.
    pub ac_mass: f64,
    /// `total_mass − ac_mass`; carries whatever the excised arcs hide.
    pub singular_mass: f64,
    pub atoms: Vec<AtomFinding>,
    /// Number of excised arcs (one per confirmed density pole).
    pub excised_arcs: usize,
    /// Quotient-based upper bound on the measure hidden inside excised arcs.
    pub excision_bound: f64,
    /// Candidates whose quotient neither converged nor decayed.
    pub unresolved_candidates: usize,
}

impl ClarkReport {
    /// Singular mass not explained by confirmed atoms.  Large values mean
    /// the excision swallowed structure the grid could not resolve; callers
    /// probing criterion (S) refine the grid until this settles.
    pub fn unattributed_singular(&self) -> f64 {
        let attributed: f64 = self.atoms.iter().map(|a| a.mass).sum();
        self.singular_mass - attributed
    }
}

/// Empirical pushforward of normalized arc length under `φ`, binned over
/// the closed disk in polar coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct PushforwardHistogram {
    pub radial_bins: usize,
    pub angular_bins: usize,
    /// Radial-major: `masses[i_r * angular_bins + i_t]`.
    pub masses: Vec<f64>,
    pub total_samples: usize,
    /// Samples dropped because `φ` had no usable boundary value there.
    pub excluded_samples: usize,
}

impl PushforwardHistogram {
    pub fn mass_at(&self, i_r: usize, i_t: usize) -> f64 {
        self.masses[i_r * self.angular_bins + i_t]
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.masses)
    }

    pub fn radial_edges(&self) -> Vec<f64> {
        (0..=self.radial_bins)
            .map(|i| i as f64 / self.radial_bins as f64)
            .collect()
    }

    pub fn angular_edges(&self) -> Vec<f64> {
        (0..=self.angular_bins)
            .map(|i| TAU * i as f64 / self.angular_bins as f64)
            .collect()
    }

    /// Riemann sum of `f` against the histogram, evaluated at bin centers.
    pub fn integrate_against<F: Fn(Complex64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self
            .masses
            .iter()
            .enumerate()
            .map(|(idx, &m)| {
                let i_r = idx / self.angular_bins;
                let i_t = idx % self.angular_bins;
                let r = (i_r as f64 + 0.5) / self.radial_bins as f64;
                let t = TAU * (i_t as f64 + 0.5) / self.angular_bins as f64;
                m * f(Complex64::from_polar(r, t))
            })
            .collect();
        pairwise_sum(&terms)
    }
}

/// One row of the Poisson balance sheet at radius `r`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoissonBalanceRow {
    pub r: f64,
    /// `Re((α + rφ(0))/(α − rφ(0)))` — the full mass seen through the
    /// Herglotz transform; identically 1 when `φ` fixes the origin.
    pub herglotz: f64,
    /// `∫ r²(1 − |φ|²)/|α − rφ|² dm`, increasing toward the ac mass.
    pub boundary_integral: f64,
}

fn unimodular(z: Complex64, name: &str) -> Result<Complex64> {
    let n = z.norm();
    if (n - 1.0).abs() > 1e-6 {
        return Err(Error::Precondition(format!(
            "{name} must be unimodular, got modulus {n}"
        )));
    }
    Ok(z / n)
}

/// Boundary density `h_α(ξ) = (1 − |φ(ξ)|²)/|α − φ(ξ)|²` of the
/// absolutely continuous part of `μ_α`.
pub fn clark_density(phi: &MapExpr, alpha: Complex64, xi: Complex64) -> Result<f64> {
    let alpha = unimodular(alpha, "alpha")?;
    let xi = unimodular(xi, "xi")?;
    let v = phi
        .eval(xi)
        .map_err(|e| match e {
            Error::AtomOffCircle(_) => {
                Error::BoundaryValueUnavailable(xi, "point sits inside a singular atom guard band")
            }
            Error::TruncationBudgetExceeded { .. } => {
                Error::BoundaryValueUnavailable(xi, "truncation budget exhausted at the boundary")
            }
            other => other,
        })?
        .value;
    let d2 = (alpha - v).norm_sqr();
    if d2 < POLE_GUARD_SQ {
        return Err(Error::DensityPole {
            xi,
            dist: d2.sqrt(),
        });
    }
    Ok(((1.0 - v.norm_sqr()) / d2).max(0.0))
}

/// Point mass of `μ_α` at `ζ` through the radial quotient
/// `q(r) = ((1 − r)/2) · h_α(rζ)`, extrapolated to `r = 1`.
///
/// The quotient is affine in `1 − r` up to higher-order terms, so a
/// first-order Richardson step on the last three radii removes the
/// leading error; the limit is trusted when the last two extrapolants
/// agree to 1e−3, and masses below the noise floor report as exactly 0
/// (the quotient decayed — no atom).
pub fn atom_mass(phi: &MapExpr, alpha: Complex64, zeta: Complex64, radii: &[f64]) -> Result<AtomMass> {
    let alpha = unimodular(alpha, "alpha")?;
    let zeta = unimodular(zeta, "zeta")?;
    if radii.len() < 3 {
        return Err(Error::Precondition(
            "atom quotient needs at least three radii".into(),
        ));
    }
    for pair in radii.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::Precondition(
                "atom quotient radii must be strictly increasing".into(),
            ));
        }
    }
    if radii[0] <= 0.0 || radii[radii.len() - 1] >= 1.0 {
        return Err(Error::Precondition(
            "atom quotient radii must lie in (0, 1)".into(),
        ));
    }

    let mut curve = Vec::with_capacity(radii.len());
    for &r in radii {
        let v = phi.eval(r * zeta)?.value;
        let d2 = (alpha - v).norm_sqr().max(f64::MIN_POSITIVE);
        let q = 0.5 * (1.0 - r) * (1.0 - v.norm_sqr()).max(0.0) / d2;
        curve.push((r, q));
    }

    // q(r) = L + C(1−r) + O((1−r)²): eliminate C from two consecutive radii.
    let extrapolate = |i: usize| {
        let (r1, q1) = curve[i - 1];
        let (r2, q2) = curve[i];
        let (e1, e2) = (1.0 - r1, 1.0 - r2);
        q2 - (q1 - q2) * e2 / (e1 - e2)
    };
    let n = curve.len();
    let (prev, last) = (extrapolate(n - 2), extrapolate(n - 1));
    let error_estimate = (last - prev).abs();
    if error_estimate >= QUOTIENT_SETTLE {
        return Err(Error::AtomQuotientNotConvergent(curve));
    }
    let mut mass = last.max(0.0);
    if mass < MASS_FLOOR {
        mass = 0.0;
    }
    Ok(AtomMass {
        mass,
        error_estimate,
        quotient_curve: curve,
    })
}

/// Default radii for the atom quotient: `1 − 2⁻ᵏ`, `k = 8..=20`.
pub fn default_atom_radii() -> Vec<f64> {
    (8..=20).map(|k| 1.0 - 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    angle: f64,
    dist: f64,
}

/// Distance `|α − φ(rξ)|` just inside the boundary, with the atom nudge.
fn prefilter_dist(phi: &MapExpr, alpha: Complex64, t: f64) -> Result<f64> {
    let probe = |t: f64| {
        phi.eval(Complex64::from_polar(PREFILTER_RADIUS, t))
            .map(|e| (alpha - e.value).norm())
    };
    match probe(t) {
        Err(Error::AtomOffCircle(_)) => probe(t + NUDGE),
        other => other,
    }
}

/// Angles of near-boundary structure in the expression tree: singular
/// atoms and Blaschke zeros hugging the circle.  These are cheap atom
/// hypotheses; the quotient verifies or discards each one.
fn structure_angles(phi: &MapExpr) -> Vec<f64> {
    fn walk(m: &MapExpr, out: &mut Vec<f64>) {
        match m {
            MapExpr::Blaschke(b) => out.extend(
                b.zeros()
                    .iter()
                    .filter(|z| z.norm() > 0.0 && 1.0 - z.norm() <= NEAR_BOUNDARY)
                    .map(|z| z.arg()),
            ),
            MapExpr::SingularInner(s) => out.extend(s.atoms().iter().map(|a| a.xi.arg())),
            MapExpr::Compose(f, g) => {
                walk(f, out);
                walk(g, out);
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(phi, &mut out);
    out
}

/// Scan the boundary for local minima of the pre-filter distance and
/// refine each bracket by golden-section search.
fn pole_candidates(phi: &MapExpr, alpha: Complex64, grid: usize) -> Result<Vec<Candidate>> {
    let step = TAU / grid as f64;
    let dists: Vec<Result<f64>> = (0..grid)
        .into_par_iter()
        .map(|j| prefilter_dist(phi, alpha, (j as f64 + 0.5) * step))
        .collect();
    let mut d = Vec::with_capacity(grid);
    for v in dists {
        d.push(v?);
    }

    let mut found = Vec::new();
    for j in 0..grid {
        let prev = d[(j + grid - 1) % grid];
        let next = d[(j + 1) % grid];
        if d[j] < PREFILTER_DIST && d[j] <= prev && d[j] <= next {
            let t = (j as f64 + 0.5) * step;
            let obj = |t: f64| prefilter_dist(phi, alpha, t).unwrap_or(f64::INFINITY);
            let (angle, dist) = golden_min(obj, t - step, t + step, 60);
            found.push(Candidate {
                angle: angle.rem_euclid(TAU),
                dist,
            });
        }
    }
    Ok(found)
}

fn dedup_candidates(mut cands: Vec<Candidate>, grid: usize) -> Vec<Candidate> {
    let merge_gap = TAU / grid as f64;
    cands.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    let mut merged: Vec<Candidate> = Vec::new();
    for c in cands {
        match merged.last_mut() {
            Some(last) if c.angle - last.angle < merge_gap => {
                if c.dist < last.dist {
                    *last = c;
                }
            }
            _ => merged.push(c),
        }
    }
    // The circle wraps: the first and last candidate may be the same pole.
    if merged.len() > 1 {
        let first = merged[0];
        let last = *merged.last().unwrap();
        if first.angle + TAU - last.angle < merge_gap {
            if last.dist < first.dist {
                merged[0] = Candidate {
                    angle: last.angle,
                    dist: last.dist,
                };
            }
            merged.pop();
        }
    }
    merged
}

/// Clark measure decomposition with the default candidate set.
pub fn clark_masses(phi: &MapExpr, alpha: Complex64, boundary_grid: usize) -> Result<ClarkReport> {
    clark_masses_with(phi, alpha, boundary_grid, &[])
}

/// Clark measure decomposition, with extra atom-candidate angles supplied
/// by the caller (the verdict pipeline passes spectrum-arc centers here).
///
/// The total mass comes from the Herglotz transform at the origin.  The
/// ac mass is the trapezoid value of `h_α` over the grid with arcs of
/// half-width `4·(2π/grid)` excised around every confirmed density pole;
/// whatever measure those arcs hide is bounded by the Poisson quotient
/// at matching depth and reported in `excision_bound`.  Shrinking the
/// excision by growing the grid converges the split.
pub fn clark_masses_with(
    phi: &MapExpr,
    alpha: Complex64,
    boundary_grid: usize,
    extra_candidate_angles: &[f64],
) -> Result<ClarkReport> {
    let alpha = unimodular(alpha, "alpha")?;
    if boundary_grid < 64 {
        return Err(Error::Precondition(
            "boundary grid needs at least 64 points".into(),
        ));
    }
    let c = phi.at_origin();
    if c.norm() >= 1.0 - 1e-12 {
        return Err(Error::Precondition(
            "map must send the origin strictly inside the disk".into(),
        ));
    }
    let total_mass = if c.norm() < 1e-12 {
        1.0
    } else {
        ((alpha + c) / (alpha - c)).re
    };

    let mut candidates = pole_candidates(phi, alpha, boundary_grid)?;
    for &t in extra_candidate_angles {
        candidates.push(Candidate {
            angle: t.rem_euclid(TAU),
            dist: prefilter_dist(phi, alpha, t)?,
        });
    }
    for t in structure_angles(phi) {
        candidates.push(Candidate {
            angle: t.rem_euclid(TAU),
            dist: prefilter_dist(phi, alpha, t)?,
        });
    }
    let candidates = dedup_candidates(candidates, boundary_grid);

    let radii = default_atom_radii();
    let mut atoms = Vec::new();
    let mut unresolved_candidates = 0usize;
    for cand in &candidates {
        let zeta = Complex64::from_polar(1.0, cand.angle);
        match atom_mass(phi, alpha, zeta, &radii) {
            Ok(am) if am.mass > 0.0 => atoms.push(AtomFinding {
                location: zeta,
                mass: am.mass,
                quotient_curve: am.quotient_curve,
            }),
            Ok(_) => {}
            Err(Error::AtomQuotientNotConvergent(_)) => unresolved_candidates += 1,
            Err(e) => return Err(e),
        }
    }

    // Excise arcs around confirmed poles and bound what they can hide:
    // h_α(rζ) integrates μ_α against the Poisson kernel, which is at
    // least (2 − ε)/(2ε) on the arc |t| ≤ ε at depth r = 1 − ε, so
    // μ(arc) ≤ 2ε/(2 − ε) · h_α((1−ε)ζ) ≤ 2.5 · q(1−ε).
    let step = TAU / boundary_grid as f64;
    let half_width = EXCISION_STEPS * step;
    let mut mask = vec![false; boundary_grid];
    let mut excised_arcs = 0usize;
    let mut excision_bound = 0.0;
    for cand in &candidates {
        if cand.dist >= PREFILTER_DIST {
            continue;
        }
        excised_arcs += 1;
        let center_idx = cand.angle / step;
        let reach = EXCISION_STEPS.ceil() as i64;
        for k in -reach..=reach {
            let idx = (center_idx.round() as i64 + k).rem_euclid(boundary_grid as i64);
            let t = (idx as f64 + 0.5) * step;
            let diff = (t - cand.angle).rem_euclid(TAU);
            if diff.min(TAU - diff) <= half_width {
                mask[idx as usize] = true;
            }
        }
        let probe = Complex64::from_polar(1.0 - half_width, cand.angle);
        let v = phi.eval(probe)?.value;
        let d2 = (alpha - v).norm_sqr().max(f64::MIN_POSITIVE);
        let q_e = 0.5 * half_width * (1.0 - v.norm_sqr()).max(0.0) / d2;
        excision_bound += 2.5 * q_e;
    }

    let sampled: Vec<Result<Option<f64>>> = (0..boundary_grid)
        .into_par_iter()
        .map(|j| {
            if mask[j] {
                return Ok(None);
            }
            let t = (j as f64 + 0.5) * step;
            let value = |t: f64| phi.eval(Complex64::from_polar(1.0, t)).map(|e| e.value);
            let v = match value(t) {
                Err(Error::AtomOffCircle(_)) => value(t + NUDGE)?,
                other => other?,
            };
            let d2 = (alpha - v).norm_sqr();
            if d2 < POLE_GUARD_SQ {
                // An exact pole on an unexcised grid point: skip the point
                // rather than poison the sum; it has zero trapezoid weight
                // in the limit.
                return Ok(None);
            }
            Ok(Some(((1.0 - v.norm_sqr()) / d2).max(0.0)))
        })
        .collect();

    let mut included = Vec::with_capacity(boundary_grid);
    let mut density_samples = Vec::new();
    let stride = boundary_grid.div_ceil(4096);
    for (j, s) in sampled.into_iter().enumerate() {
        if let Some(h) = s? {
            if j % stride == 0 {
                let t = (j as f64 + 0.5) * step;
                density_samples.push((Complex64::from_polar(1.0, t), h));
            }
            included.push(h);
        }
    }
    let ac_mass = pairwise_sum(&included) / boundary_grid as f64;
    let singular_mass = total_mass - ac_mass;

    Ok(ClarkReport {
        alpha,
        boundary_grid,
        density_samples,
        total_mass,
        ac_mass,
        singular_mass,
        atoms,
        excised_arcs,
        excision_bound,
        unresolved_candidates,
    })
}

/// Poisson balance sheet: at each radius, the mass the Herglotz transform
/// reports against the mass the boundary quadrature can see.
pub fn poisson_balance(
    phi: &MapExpr,
    alpha: Complex64,
    radii: &[f64],
) -> Result<Vec<PoissonBalanceRow>> {
    let alpha = unimodular(alpha, "alpha")?;
    let c = phi.at_origin();
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(0.0 < r && r < 1.0) {
            return Err(Error::Precondition(
                "poisson balance radii must lie in (0, 1)".into(),
            ));
        }
        let herglotz = ((alpha + r * c) / (alpha - r * c)).re;
        let boundary_integral = circle_average_fallible(DEFAULT_BOUNDARY_GRID, |xi| {
            let v = phi.eval(xi)?.value;
            Ok(r * r * (1.0 - v.norm_sqr()).max(0.0) / (alpha - r * v).norm_sqr())
        })?;
        rows.push(PoissonBalanceRow {
            r,
            herglotz,
            boundary_integral,
        });
    }
    Ok(rows)
}

/// Empirical pushforward of normalized arc length under `φ`.
///
/// Samples `φ` at equispaced boundary points (half-step offsets) and bins
/// the images over the closed disk; boundary failures are excluded and
/// counted.  Masses are normalized by the included count, so they sum to
/// one whenever any sample survives.
pub fn pushforward_histogram(
    phi: &MapExpr,
    boundary_samples: usize,
    radial_bins: usize,
    angular_bins: usize,
) -> Result<PushforwardHistogram> {
    if boundary_samples == 0 || radial_bins == 0 || angular_bins == 0 {
        return Err(Error::Precondition(
            "histogram needs positive sample and bin counts".into(),
        ));
    }
    let bins: Vec<Option<usize>> = (0..boundary_samples)
        .into_par_iter()
        .map(|j| {
            let t = TAU * (j as f64 + 0.5) / boundary_samples as f64;
            let value = |t: f64| phi.eval(Complex64::from_polar(1.0, t)).map(|e| e.value);
            let w = match value(t) {
                Err(Error::AtomOffCircle(_)) => value(t + NUDGE),
                other => other,
            };
            let w = match w {
                Ok(w) => w,
                Err(_) => return None,
            };
            let r = w.norm().min(1.0);
            let i_r = ((r * radial_bins as f64) as usize).min(radial_bins - 1);
            let ang = w.arg().rem_euclid(TAU);
            let i_t = ((ang / TAU * angular_bins as f64) as usize).min(angular_bins - 1);
            Some(i_r * angular_bins + i_t)
        })
        .collect();

    let mut counts = vec![0u64; radial_bins * angular_bins];
    let mut excluded_samples = 0usize;
    for b in bins {
        match b {
            Some(idx) => counts[idx] += 1,
            None => excluded_samples += 1,
        }
    }
    let included = boundary_samples - excluded_samples;
    if included == 0 {
        return Err(Error::Precondition(
            "every histogram sample failed to evaluate".into(),
        ));
    }
    let masses = counts
        .iter()
        .map(|&c| c as f64 / included as f64)
        .collect();
    Ok(PushforwardHistogram {
        radial_bins,
        angular_bins,
        masses,
        total_samples: boundary_samples,
        excluded_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{composition_norm_sq, CompositionMethod, H2Function};
    use crate::maps::tests::tangent_disk_map;
    use crate::quad::DiskGrid;
    use crate::util::cx;

    fn unit(t: f64) -> Complex64 {
        Complex64::from_polar(1.0, t)
    }

    fn one() -> Complex64 {
        cx(1.0, 0.0)
    }

    #[test]
    fn density_examples_pin_the_formula() {
        let idty = MapExpr::identity();
        assert!(clark_density(&idty, one(), cx(0.0, 1.0)).unwrap() < 1e-15);

        let half = MapExpr::scale(cx(0.5, 0.0)).unwrap();
        let d = clark_density(&half, one(), one()).unwrap();
        assert!((d - 3.0).abs() < 1e-13, "scale-1/2 density at 1: {d}");

        let d = clark_density(&tangent_disk_map(), one(), cx(0.0, 1.0)).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-13, "tangent density at i: {d}");
    }

    #[test]
    fn density_rejects_poles() {
        let err = clark_density(&MapExpr::identity(), one(), one()).unwrap_err();
        assert!(matches!(err, Error::DensityPole { .. }), "got {err:?}");
    }

    #[test]
    fn tangent_density_is_flat() {
        // (1 − |φ|²)/|1 − φ|² collapses to 1/3 identically for 2z/(3−z).
        let phi = tangent_disk_map();
        for k in 1..100 {
            let t = TAU * k as f64 / 100.0;
            let h = clark_density(&phi, one(), unit(t)).unwrap();
            assert!((h - 1.0 / 3.0).abs() < 1e-10, "h({t}) = {h}");
        }
    }

    #[test]
    fn atom_quotient_is_exact_for_the_identity() {
        // q(r) = (1 + r)/2 is affine in 1 − r, so the extrapolation is exact.
        let am = atom_mass(&MapExpr::identity(), one(), one(), &default_atom_radii()).unwrap();
        assert!((am.mass - 1.0).abs() < 1e-12, "mass {}", am.mass);
        assert!(am.error_estimate < 1e-12);
    }

    #[test]
    fn atom_mass_matches_reciprocal_angular_derivative() {
        // The tangent map has φ(1) = 1 with φ'(1) = 3/2; the Clark atom
        // there weighs 1/φ'(1) = 2/3, and q(r) = (3 + r)/6 is again affine.
        let phi = tangent_disk_map();
        let am = atom_mass(&phi, one(), one(), &default_atom_radii()).unwrap();
        // q is affine in r, so only the cancellation in 1 - |φ(r)|² at the
        // deepest radii limits the answer.
        assert!((am.mass - 2.0 / 3.0).abs() < 1e-9, "mass {}", am.mass);
        let deriv = phi.eval(one()).unwrap().derivative;
        assert!((am.mass * deriv.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn atom_mass_vanishes_when_the_range_stays_interior() {
        let half = MapExpr::scale(cx(0.5, 0.0)).unwrap();
        let radii = default_atom_radii();
        for k in 0..16 {
            let zeta = unit(TAU * k as f64 / 16.0);
            let am = atom_mass(&half, one(), zeta, &radii).unwrap();
            assert_eq!(am.mass, 0.0, "spurious atom at {zeta}");
        }
    }

    #[test]
    fn atom_mass_needs_three_radii() {
        let err = atom_mass(&MapExpr::identity(), one(), one(), &[0.9, 0.99]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn strictly_contractive_map_is_purely_absolutely_continuous() {
        let half = MapExpr::scale(cx(0.5, 0.0)).unwrap();
        let report = clark_masses(&half, one(), DEFAULT_BOUNDARY_GRID).unwrap();
        assert_eq!(report.total_mass, 1.0);
        assert!((report.ac_mass - 1.0).abs() < 1e-6, "ac {}", report.ac_mass);
        assert!(report.singular_mass.abs() < 1e-6);
        assert!(report.atoms.is_empty());
        assert_eq!(report.excised_arcs, 0);
    }

    #[test]
    fn identity_clark_measure_is_a_point_mass() {
        let report = clark_masses(&MapExpr::identity(), one(), DEFAULT_BOUNDARY_GRID).unwrap();
        assert_eq!(report.total_mass, 1.0);
        assert!(report.ac_mass.abs() < 1e-9, "ac {}", report.ac_mass);
        assert!((report.singular_mass - 1.0).abs() < 1e-9);
        assert_eq!(report.atoms.len(), 1);
        let atom = &report.atoms[0];
        assert!((atom.location - one()).norm() < 1e-6);
        assert!((atom.mass - 1.0).abs() < 1e-6);
        // Spec'd decomposition bound: every atom fits inside the singular part.
        assert!(atom.mass <= report.singular_mass + 1e-3);
        assert_eq!(report.excised_arcs, 1);
    }

    #[test]
    fn tangent_map_splits_one_third_ac_two_thirds_atomic() {
        let report = clark_masses(&tangent_disk_map(), one(), DEFAULT_BOUNDARY_GRID).unwrap();
        assert_eq!(report.total_mass, 1.0);
        assert!(
            (report.ac_mass - 1.0 / 3.0).abs() < 2e-3,
            "ac {}",
            report.ac_mass
        );
        assert!(
            (report.singular_mass - 2.0 / 3.0).abs() < 2e-3,
            "singular {}",
            report.singular_mass
        );
        assert_eq!(report.atoms.len(), 1);
        assert!((report.atoms[0].mass - 2.0 / 3.0).abs() < 1e-6);
        assert!(report.ac_mass + report.atoms[0].mass <= 1.0 + 1e-3);
        assert!(report.excision_bound > 0.0);
        // Nothing is left unexplained once the atom is attributed.
        assert!(report.unattributed_singular().abs() < 2e-3);
    }

    #[test]
    fn offset_origin_blaschke_factor_books_its_full_mass_at_one() {
        // φ(z) = (z + 1/2)/(1 + z/2): inner, φ(0) = 1/2, angular derivative
        // φ'(1) = 1/3.  Herglotz gives total mass 3 at α = 1 and the lone
        // atom at ζ = 1 carries all of it: q(r) = (3/2)(1 + r) exactly.
        let phi = MapExpr::moebius(cx(1.0, 0.0), cx(0.5, 0.0), cx(0.5, 0.0), cx(1.0, 0.0)).unwrap();
        let report = clark_masses(&phi, one(), DEFAULT_BOUNDARY_GRID).unwrap();
        assert!((report.total_mass - 3.0).abs() < 1e-12);
        assert!(report.ac_mass.abs() < 1e-8, "ac {}", report.ac_mass);
        assert_eq!(report.atoms.len(), 1);
        assert!((report.atoms[0].mass - 3.0).abs() < 1e-8);
        assert!((report.singular_mass - 3.0).abs() < 1e-8);
    }

    #[test]
    fn totals_stay_normalized_across_alpha() {
        // Origin-fixing maps give probability measures for every α; the
        // α-averaged decomposition must account for exactly unit mass.
        let phi = tangent_disk_map();
        let mut sum = 0.0;
        for k in 0..64 {
            let alpha = unit(TAU * k as f64 / 64.0);
            let report = clark_masses(&phi, alpha, 1024).unwrap();
            assert_eq!(report.total_mass, 1.0);
            assert!(report.ac_mass >= -1e-12);
            assert!(report.ac_mass <= report.total_mass + 1e-3);
            sum += report.ac_mass + report.singular_mass;
        }
        assert!((sum / 64.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn poisson_balance_of_the_contractive_scale() {
        let half = MapExpr::scale(cx(0.5, 0.0)).unwrap();
        let rows = poisson_balance(&half, one(), &[0.99]).unwrap();
        assert_eq!(rows[0].herglotz, 1.0);
        // The boundary integral at r = 0.99 sits ≈ 2.7e−2 below the full
        // mass — the kernel still sees the disk from radius r², so the
        // approach is first order, not quadratic.
        assert!(
            (rows[0].boundary_integral - 1.0).abs() < 3e-2,
            "B = {}",
            rows[0].boundary_integral
        );
    }

    #[test]
    fn poisson_balance_climbs_to_the_ac_mass() {
        let phi = tangent_disk_map();
        let radii: Vec<f64> = (4..=10).map(|k| 1.0 - 2f64.powi(-k)).collect();
        let rows = poisson_balance(&phi, one(), &radii).unwrap();
        for row in &rows {
            assert_eq!(row.herglotz, 1.0);
        }
        for pair in rows.windows(2) {
            assert!(
                pair[1].boundary_integral > pair[0].boundary_integral,
                "balance not increasing: {pair:?}"
            );
        }
        let last = rows.last().unwrap().boundary_integral;
        assert!((last - 1.0 / 3.0).abs() < 1e-3, "B → {last}");
    }

    #[test]
    fn identity_pushforward_is_the_uniform_boundary_ring() {
        let hist = pushforward_histogram(&MapExpr::identity(), 4096, 8, 64).unwrap();
        assert_eq!(hist.excluded_samples, 0);
        assert!((hist.total_mass() - 1.0).abs() < 1e-12);
        for i_t in 0..64 {
            assert!((hist.mass_at(7, i_t) - 1.0 / 64.0).abs() < 1e-12);
            for i_r in 0..7 {
                assert_eq!(hist.mass_at(i_r, i_t), 0.0);
            }
        }
    }

    #[test]
    fn contractive_scale_lands_on_the_half_radius_ring() {
        let half = MapExpr::scale(cx(0.5, 0.0)).unwrap();
        let hist = pushforward_histogram(&half, 4096, 8, 16).unwrap();
        // |w| = 1/2 sits exactly on the edge between radial bins 3 and 4;
        // rounding in |0.5·e^{it}| legitimately lands on either side.
        for (idx, &m) in hist.masses.iter().enumerate() {
            let i_r = idx / 16;
            if m > 0.0 {
                assert!(
                    i_r == 3 || i_r == 4,
                    "mass off the |w| = 1/2 ring in bin {idx}"
                );
            }
        }
        assert!((hist.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_reproduces_the_boundary_composition_norm() {
        let phi = tangent_disk_map();
        let hist = pushforward_histogram(&phi, 1 << 16, 256, 64).unwrap();
        let from_bins = hist.integrate_against(|w| w.norm_sqr());
        let f = H2Function::polynomial(vec![cx(0.0, 0.0), cx(1.0, 0.0)]);
        let direct = composition_norm_sq(
            &f,
            &phi,
            CompositionMethod::Boundary,
            &DiskGrid::default_grid(),
        )
        .unwrap();
        assert!((direct - 0.5).abs() < 1e-6, "boundary norm {direct}");
        assert!(
            (from_bins - direct).abs() < 1e-2,
            "bins {from_bins} vs boundary {direct}"
        );
    }

    #[test]
    fn histogram_masses_are_a_probability_vector() {
        let hist = pushforward_histogram(&tangent_disk_map(), 8192, 32, 32).unwrap();
        assert!(hist.masses.iter().all(|&m| m >= 0.0));
        assert!((hist.total_mass() - 1.0).abs() < 1e-12);
    }
}
