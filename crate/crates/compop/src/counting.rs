//! The Nevanlinna counting function `N(w) = sum over phi(z) = w of -log|z|`.
//!
//! Two engines locate the fiber of `phi` over `w` independently. The exact
//! route clears denominators and solves `num - w * den = 0`; the
//! argument-principle route subdivides the disk into polar cells and counts
//! boundary winding numbers, refining cells until each holds a single root
//! (or an unsplittable cluster) and polishing with Newton. Agreement between
//! the two is a real consistency check, not a tautology, and the analyzer
//! leans on it.

use crate::error::{Error, Result};
use crate::maps::{HyperbolicDisk, MapExpr};
use crate::poly::cluster;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Default width of the boundary exclusion annulus: roots with
/// `|z| >= 1 - BOUNDARY_EXCLUSION` are reported but not counted, since
/// `-log|z|` there is below 1.0000005e-6 per root.
pub const BOUNDARY_EXCLUSION: f64 = 1e-6;

/// Roots closer than this are merged with summed multiplicity.
pub const CLUSTER_TOL: f64 = 1e-8;

const POLISH_RESIDUAL: f64 = 1e-12;
const POLISH_MAX_ITERS: usize = 60;
const INITIAL_DEPTH: u32 = 4;
const MAX_DEPTH: u32 = 24;
const CELL_BUDGET: usize = 100_000;
const LITTLEWOOD_SLACK_TOL: f64 = 1e-9;
const SUB_MEAN_TOL: f64 = 1e-2;

/// Angular origin of the root cell. Fibers of the maps people actually write
/// down love the angles 0, pi/2, pi; starting the angular grid at an
/// arbitrary offset keeps them off the initial cell edges.
const ANGLE_ORIGIN: f64 = 0.2387411;

/// Split-line fractions tried in order when a child winding refuses to
/// stabilize (a root sitting on the candidate edge).
const SPLIT_BIASES: [f64; 3] = [0.5, 0.5369, 0.4613];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountingMethod {
    RationalExact,
    ArgumentPrinciple,
}

impl CountingMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            CountingMethod::RationalExact => "rational-exact",
            CountingMethod::ArgumentPrinciple => "argument-principle",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub z: Complex64,
    pub multiplicity: usize,
}

/// The solution set of `phi(z) = w` in the open disk.
#[derive(Debug, Clone)]
pub struct PreimageSet {
    pub target: Complex64,
    /// Roots strictly inside `|z| < 1 - exclusion`, sorted by real then
    /// imaginary part.
    pub roots: Vec<Root>,
    /// Roots detected inside the exclusion annulus `[1 - exclusion, 1)`.
    /// They are left out of counting sums; see [`PreimageSet::omission_bound`].
    pub flagged: Vec<Root>,
    pub method: CountingMethod,
    /// Largest `|phi(z) - w|` over the reported roots after polishing.
    pub residual_bound: f64,
    pub exclusion: f64,
}

impl PreimageSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// `sum of multiplicity * (-log|z|)` over the interior roots.
    pub fn counting_value(&self) -> f64 {
        // fold from +0.0: std's `Sum<f64>` starts at -0.0, which leaks out
        // as a signed zero on empty fibers.
        self.roots
            .iter()
            .map(|r| r.multiplicity as f64 * -r.z.norm().ln())
            .fold(0.0, |acc, term| acc + term)
    }

    /// True when boundary-annulus roots were detected and left uncounted.
    pub fn is_partial(&self) -> bool {
        !self.flagged.is_empty()
    }

    /// Additive uncertainty from the flagged roots: each contributes at most
    /// `-log(1 - exclusion)` to the counting value.
    pub fn omission_bound(&self) -> f64 {
        let flagged: usize = self.flagged.iter().map(|r| r.multiplicity).sum();
        flagged as f64 * -(1.0 - self.exclusion).ln()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CountingSample {
    pub w: Complex64,
    pub value: f64,
    /// `-log|w| - N(w)`; nonnegative whenever phi fixes the origin.
    pub littlewood_slack: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CountingChecks {
    pub littlewood_ok: bool,
    pub slack: f64,
    pub sub_mean_ok: bool,
    /// Area average of N over the hyperbolic disk minus N at its center.
    pub sub_mean_gap: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CountingOptions {
    pub cluster_tol: f64,
    pub boundary_exclusion: f64,
}

impl Default for CountingOptions {
    fn default() -> Self {
        CountingOptions {
            cluster_tol: CLUSTER_TOL,
            boundary_exclusion: BOUNDARY_EXCLUSION,
        }
    }
}

/// Fiber of `phi` over `w`, engine chosen by the shape of `phi`: exact
/// rational solve when the expression tree has a rational form, polar-cell
/// argument principle otherwise. `tol` is the root clustering distance.
pub fn preimages(phi: &MapExpr, w: Complex64, tol: f64) -> Result<PreimageSet> {
    let opts = CountingOptions {
        cluster_tol: tol,
        ..CountingOptions::default()
    };
    let method = if phi.as_rational().is_some() {
        CountingMethod::RationalExact
    } else {
        CountingMethod::ArgumentPrinciple
    };
    preimages_with(phi, w, method, &opts)
}

pub fn preimages_rational(phi: &MapExpr, w: Complex64, tol: f64) -> Result<PreimageSet> {
    let opts = CountingOptions {
        cluster_tol: tol,
        ..CountingOptions::default()
    };
    preimages_with(phi, w, CountingMethod::RationalExact, &opts)
}

pub fn preimages_argument_principle(
    phi: &MapExpr,
    w: Complex64,
    tol: f64,
) -> Result<PreimageSet> {
    let opts = CountingOptions {
        cluster_tol: tol,
        ..CountingOptions::default()
    };
    preimages_with(phi, w, CountingMethod::ArgumentPrinciple, &opts)
}

pub fn preimages_with(
    phi: &MapExpr,
    w: Complex64,
    method: CountingMethod,
    opts: &CountingOptions,
) -> Result<PreimageSet> {
    if w.norm() >= 1.0 {
        return Err(Error::PointOutsideDomain(w));
    }
    match method {
        CountingMethod::RationalExact => rational_fiber(phi, w, opts),
        CountingMethod::ArgumentPrinciple => winding_fiber(phi, w, opts),
    }
}

/// `N(w)` with the Littlewood slack attached. Rejects `w = phi(0)`, where the
/// counting function diverges.
pub fn nevanlinna(phi: &MapExpr, w: Complex64) -> Result<CountingSample> {
    if w.norm() >= 1.0 {
        return Err(Error::PointOutsideDomain(w));
    }
    if (w - phi.at_origin()).norm() < 1e-12 {
        return Err(Error::TargetEqualsPhiOfZero);
    }
    let fiber = preimages(phi, w, CLUSTER_TOL)?;
    let value = fiber.counting_value();
    Ok(CountingSample {
        w,
        value,
        littlewood_slack: -w.norm().ln() - value,
    })
}

/// Littlewood inequality `N(w) <= log(1/|w|)` and the sub-mean-value
/// inequality of N over the hyperbolic disk `D_eps(w)`, both for maps fixing
/// the origin. The area average uses an 8 radii x 8 angles midpoint rule on
/// the Euclidean realization of the disk.
pub fn counting_checks(
    phi: &MapExpr,
    w: Complex64,
    eps: f64,
) -> Result<CountingChecks> {
    if !phi.fixes_origin() {
        return Err(Error::Precondition(
            "counting checks require a map fixing the origin".into(),
        ));
    }
    if w.norm() < 1e-12 {
        return Err(Error::TargetEqualsPhiOfZero);
    }
    let at_w = nevanlinna(phi, w)?;
    let littlewood_ok = at_w.value <= -w.norm().ln() + LITTLEWOOD_SLACK_TOL;

    let disk = HyperbolicDisk::new(w, eps)?;
    let center = disk.euclidean_center();
    let radius = disk.euclidean_radius();
    let mut acc = 0.0;
    let mut weight = 0.0;
    for i in 0..8 {
        let r = radius * (i as f64 + 0.5) / 8.0;
        for j in 0..8 {
            let ang = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / 8.0;
            let sample = center + Complex64::from_polar(r, ang);
            acc += r * nevanlinna(phi, sample)?.value;
            weight += r;
        }
    }
    let average = acc / weight;
    let gap = average - at_w.value;
    Ok(CountingChecks {
        littlewood_ok,
        slack: at_w.littlewood_slack,
        sub_mean_ok: at_w.value <= average + SUB_MEAN_TOL,
        sub_mean_gap: gap,
    })
}

// ---------------------------------------------------------------------------
// exact rational engine

fn rational_fiber(
    phi: &MapExpr,
    w: Complex64,
    opts: &CountingOptions,
) -> Result<PreimageSet> {
    let (num, den) = phi
        .as_rational()
        .ok_or(Error::MethodUnsupported(
            "rational-exact fiber needs a map with a rational form",
        ))?;
    let shifted = num.sub(&den.scale(w));
    if shifted.is_zero() {
        return Err(Error::Precondition(
            "map is constant and equal to the target; the fiber is the whole disk".into(),
        ));
    }
    let raw = if shifted.degree() == 0 {
        Vec::new()
    } else {
        shifted.roots()?
    };
    let clustered = cluster(&raw, opts.cluster_tol);

    let mut roots = Vec::new();
    let mut flagged = Vec::new();
    let mut residual_bound: f64 = 0.0;
    for (centroid, multiplicity) in clustered {
        if centroid.norm() >= 1.0 {
            continue;
        }
        let (z, residual) = polish(phi, w, centroid, multiplicity);
        if z.norm() >= 1.0 {
            continue;
        }
        residual_bound = residual_bound.max(residual);
        let root = Root { z, multiplicity };
        if z.norm() < 1.0 - opts.boundary_exclusion {
            roots.push(root);
        } else {
            flagged.push(root);
        }
    }
    sort_roots(&mut roots);
    sort_roots(&mut flagged);
    Ok(PreimageSet {
        target: w,
        roots,
        flagged,
        method: CountingMethod::RationalExact,
        residual_bound,
        exclusion: opts.boundary_exclusion,
    })
}

fn sort_roots(roots: &mut [Root]) {
    roots.sort_by(|a, b| {
        (a.z.re, a.z.im)
            .partial_cmp(&(b.z.re, b.z.im))
            .expect("root coordinates are finite")
    });
}

/// Newton iteration on `phi(z) - w`, with the Schroeder multiplicity factor
/// so multiple roots converge quadratically too. Returns the best visited
/// point and its residual `|phi(z) - w|`; never worse than the start.
fn polish(phi: &MapExpr, w: Complex64, start: Complex64, m: usize) -> (Complex64, f64) {
    let mut z = start;
    let mut best = start;
    let mut best_res = f64::INFINITY;
    for _ in 0..POLISH_MAX_ITERS {
        let ev = match phi.eval(z) {
            Ok(ev) => ev,
            Err(_) => break,
        };
        let f = ev.value - w;
        let res = f.norm();
        if res < best_res {
            best = z;
            best_res = res;
        }
        if res <= POLISH_RESIDUAL {
            return (z, res);
        }
        if ev.derivative.norm() < 1e-280 {
            break;
        }
        z -= (m as f64) * f / ev.derivative;
        if z.norm() >= 1.0 {
            // reflect back just inside; the true root lives in the disk
            z = z / z.norm() * (1.0 - 1e-9);
        }
    }
    if best_res.is_infinite() {
        let res = phi
            .eval(start)
            .map(|ev| (ev.value - w).norm())
            .unwrap_or(f64::INFINITY);
        return (start, res);
    }
    (best, best_res)
}

// ---------------------------------------------------------------------------
// argument-principle engine

/// A cell of the polar quadtree: `r in [r_lo, r_hi]`, angle in
/// `[t_lo, t_hi]`. Children split both coordinates, so refinement is 4-way.
#[derive(Debug, Clone, Copy)]
struct PolarCell {
    r_lo: f64,
    r_hi: f64,
    t_lo: f64,
    t_hi: f64,
    depth: u32,
}

impl PolarCell {
    fn children(&self, bias: f64) -> [PolarCell; 4] {
        let r_mid = self.r_lo + bias * (self.r_hi - self.r_lo);
        let t_mid = self.t_lo + bias * (self.t_hi - self.t_lo);
        let d = self.depth + 1;
        [
            PolarCell { r_lo: self.r_lo, r_hi: r_mid, t_lo: self.t_lo, t_hi: t_mid, depth: d },
            PolarCell { r_lo: self.r_lo, r_hi: r_mid, t_lo: t_mid, t_hi: self.t_hi, depth: d },
            PolarCell { r_lo: r_mid, r_hi: self.r_hi, t_lo: self.t_lo, t_hi: t_mid, depth: d },
            PolarCell { r_lo: r_mid, r_hi: self.r_hi, t_lo: t_mid, t_hi: self.t_hi, depth: d },
        ]
    }

    fn diameter(&self) -> f64 {
        (self.r_hi - self.r_lo) + self.r_hi * (self.t_hi - self.t_lo)
    }

    fn is_full_circle(&self) -> bool {
        self.r_lo == 0.0
            && (self.t_hi - self.t_lo - 2.0 * std::f64::consts::PI).abs() < 1e-15
    }
}

/// Midpoint-rule winding number and first moment of the fiber inside the
/// cell: `(1/2 pi i) contour integrals of phi'/(phi - w) and z phi'/(phi - w)`.
/// Midpoints keep evaluation off the corners, where a root sitting exactly on
/// an edge would otherwise poison every level of the tree.
fn cell_integrals(
    phi: &MapExpr,
    w: Complex64,
    cell: &PolarCell,
    n_per_edge: usize,
) -> Result<(f64, Complex64)> {
    let mut winding = Complex64::new(0.0, 0.0);
    let mut moment = Complex64::new(0.0, 0.0);
    let mut push = |z: Complex64, dz: Complex64| -> Result<()> {
        let ev = phi.eval(z)?;
        let denom = ev.value - w;
        let q = ev.derivative / denom * dz;
        winding += q;
        moment += z * q;
        Ok(())
    };

    if cell.is_full_circle() {
        let n = 4 * n_per_edge;
        let h = (cell.t_hi - cell.t_lo) / n as f64;
        for j in 0..n {
            let t = cell.t_lo + (j as f64 + 0.5) * h;
            let z = Complex64::from_polar(cell.r_hi, t);
            let dz = Complex64::new(0.0, 1.0) * z * h;
            push(z, dz)?;
        }
    } else {
        // counterclockwise: out along t_lo, around the outer arc, back along
        // t_hi, and (when present) backwards along the inner arc
        let hr = (cell.r_hi - cell.r_lo) / n_per_edge as f64;
        let ht = (cell.t_hi - cell.t_lo) / n_per_edge as f64;
        let e_lo = Complex64::from_polar(1.0, cell.t_lo);
        let e_hi = Complex64::from_polar(1.0, cell.t_hi);
        for j in 0..n_per_edge {
            let r = cell.r_lo + (j as f64 + 0.5) * hr;
            push(r * e_lo, e_lo * hr)?;
        }
        for j in 0..n_per_edge {
            let t = cell.t_lo + (j as f64 + 0.5) * ht;
            let z = Complex64::from_polar(cell.r_hi, t);
            push(z, Complex64::new(0.0, 1.0) * z * ht)?;
        }
        for j in 0..n_per_edge {
            let r = cell.r_hi - (j as f64 + 0.5) * hr;
            push(r * e_hi, -e_hi * hr)?;
        }
        if cell.r_lo > 0.0 {
            for j in 0..n_per_edge {
                let t = cell.t_hi - (j as f64 + 0.5) * ht;
                let z = Complex64::from_polar(cell.r_lo, t);
                push(z, -Complex64::new(0.0, 1.0) * z * ht)?;
            }
        }
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok((winding.im / two_pi, moment / Complex64::new(0.0, two_pi)))
}

/// Doubles the rule until two consecutive estimates round to the same
/// nonnegative integer; `None` means a root is pinned to the contour.
fn stabilized_winding(
    phi: &MapExpr,
    w: Complex64,
    cell: &PolarCell,
) -> Result<Option<(usize, Complex64)>> {
    let mut n = 16;
    let mut prev: Option<f64> = None;
    while n <= 4096 {
        let (raw, moment) = cell_integrals(phi, w, cell, n)?;
        if let Some(p) = prev {
            let k = raw.round();
            if k >= 0.0 && (raw - k).abs() < 0.05 && (p - k).abs() < 0.25 {
                return Ok(Some((k as usize, moment)));
            }
        }
        prev = Some(raw);
        n *= 2;
    }
    Ok(None)
}

/// Splits a cell into four verified children: every child winding must
/// stabilize and the counts must sum to the parent's. Roots sitting on a
/// candidate split line break stabilization, so the split fraction is
/// nudged and retried.
fn split_verified(
    phi: &MapExpr,
    w: Complex64,
    cell: &PolarCell,
    count: usize,
    budget: &AtomicUsize,
) -> Result<[(PolarCell, usize, Complex64); 4]> {
    for &bias in &SPLIT_BIASES {
        let kids = cell.children(bias);
        let mut out = Vec::with_capacity(4);
        let mut ok = true;
        for kid in &kids {
            if budget.fetch_add(1, Ordering::Relaxed) >= CELL_BUDGET {
                return Err(Error::NoConvergence(
                    "argument-principle fiber",
                    format!("cell budget {CELL_BUDGET} exhausted"),
                ));
            }
            match stabilized_winding(phi, w, kid)? {
                Some((k, m)) => out.push((*kid, k, m)),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && out.iter().map(|(_, k, _)| *k).sum::<usize>() == count {
            return Ok([out[0], out[1], out[2], out[3]]);
        }
    }
    Err(Error::NoConvergence(
        "argument-principle fiber",
        format!(
            "winding numbers would not stabilize while splitting the cell at \
             r in [{:.6}, {:.6}], angle in [{:.6}, {:.6}]",
            cell.r_lo, cell.r_hi, cell.t_lo, cell.t_hi
        ),
    ))
}

fn refine_cell(
    phi: &MapExpr,
    w: Complex64,
    cell: PolarCell,
    count: usize,
    moment: Complex64,
    opts: &CountingOptions,
    budget: &AtomicUsize,
    found: &mut Vec<(Complex64, usize, f64)>,
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let centroid = moment / count as f64;
    let solitary = count == 1;
    let unsplittable = cell.depth >= MAX_DEPTH || cell.diameter() < 10.0 * opts.cluster_tol;
    if solitary || unsplittable {
        let (z, residual) = polish(phi, w, centroid, count);
        // a polished simple root that is still bad means the centroid jumped
        // basins; split once more if the tree allows it
        if residual > 1e-9 && !unsplittable {
            for (kid, k, m) in split_verified(phi, w, &cell, count, budget)? {
                refine_cell(phi, w, kid, k, m, opts, budget, found)?;
            }
            return Ok(());
        }
        found.push((z, count, residual));
        return Ok(());
    }
    for (kid, k, m) in split_verified(phi, w, &cell, count, budget)? {
        refine_cell(phi, w, kid, k, m, opts, budget, found)?;
    }
    Ok(())
}

fn winding_fiber(
    phi: &MapExpr,
    w: Complex64,
    opts: &CountingOptions,
) -> Result<PreimageSet> {
    let r_max = 1.0 - opts.boundary_exclusion;
    let two_pi = 2.0 * std::f64::consts::PI;
    let root = PolarCell {
        r_lo: 0.0,
        r_hi: r_max,
        t_lo: ANGLE_ORIGIN,
        t_hi: ANGLE_ORIGIN + two_pi,
        depth: 0,
    };
    let budget = AtomicUsize::new(0);
    let (total, root_moment) = stabilized_winding(phi, w, &root)?.ok_or_else(|| {
        Error::NoConvergence(
            "argument-principle fiber",
            "outer winding number would not stabilize; a fiber point sits on \
             the exclusion circle"
                .into(),
        )
    })?;
    if total == 0 {
        return Ok(PreimageSet {
            target: w,
            roots: Vec::new(),
            flagged: Vec::new(),
            method: CountingMethod::ArgumentPrinciple,
            residual_bound: 0.0,
            exclusion: opts.boundary_exclusion,
        });
    }

    // uniform verified subdivision down to the initial depth
    let mut level: Vec<(PolarCell, usize, Complex64)> = vec![(root, total, root_moment)];
    for _ in 0..INITIAL_DEPTH {
        let mut next = Vec::with_capacity(level.len() * 4);
        for (cell, count, moment) in level {
            if count == 0 {
                continue;
            }
            if count == 1 {
                // already isolated; no need to keep cutting
                next.push((cell, count, moment));
                continue;
            }
            for kid in split_verified(phi, w, &cell, count, &budget)? {
                next.push(kid);
            }
        }
        level = next;
    }

    // refine the occupied cells in parallel, merging results in cell order
    let chunks: Vec<Result<Vec<(Complex64, usize, f64)>>> = level
        .into_par_iter()
        .map(|(cell, count, moment)| {
            let mut found = Vec::new();
            refine_cell(phi, w, cell, count, moment, opts, &budget, &mut found)?;
            Ok(found)
        })
        .collect();

    let mut located = Vec::new();
    for chunk in chunks {
        located.extend(chunk?);
    }

    // merge near-coincident roots across cell boundaries
    let mut merged: Vec<(Complex64, usize, f64)> = Vec::new();
    for (z, m, res) in located {
        match merged
            .iter_mut()
            .find(|(c, _, _)| (*c - z).norm() < opts.cluster_tol)
        {
            Some(entry) => {
                entry.1 += m;
                entry.2 = entry.2.max(res);
            }
            None => merged.push((z, m, res)),
        }
    }

    let found_total: usize = merged.iter().map(|(_, m, _)| *m).sum();
    if found_total != total {
        return Err(Error::NoConvergence(
            "argument-principle fiber",
            format!("located multiplicity {found_total} of {total} announced by the outer winding"),
        ));
    }

    let mut roots = Vec::new();
    let mut residual_bound: f64 = 0.0;
    for (z, multiplicity, res) in merged {
        residual_bound = residual_bound.max(res);
        roots.push(Root { z, multiplicity });
    }
    sort_roots(&mut roots);
    Ok(PreimageSet {
        target: w,
        roots,
        // the search region stops at the exclusion circle, so annulus roots
        // are invisible to this engine rather than flagged
        flagged: Vec::new(),
        method: CountingMethod::ArgumentPrinciple,
        residual_bound,
        exclusion: opts.boundary_exclusion,
    })
}
