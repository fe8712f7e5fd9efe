//! Inner functions: Blaschke products times atomic singular factors.
//!
//! Beyond evaluation this module carries the boundary diagnostics the
//! analyzer leans on: a spectrum estimate (arcs where the function cannot
//! continue analytically across the circle, with radial liminf probes), a
//! flood-fill one-component probe of the sublevel set `{|theta| < r}`, and
//! the Carleson separation constant of a zero set.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blaschke::{blaschke_factor, Atom, BlaschkeProduct, SingularFactor};
use crate::error::{Error, Result};
use crate::maps::EvalResult;

/// Default certified-evaluation budget: the truncation bound
/// `2 * tail_sum / (1 - |z|)` must stay below this.
pub const DEFAULT_TRUNCATION_BUDGET: f64 = 1e-8;

/// Zeros this close to the circle count as spectrum seeds.
const NEAR_BOUNDARY_TOL: f64 = 1e-2;

/// A radial probe is flagged when its liminf estimate drops below this.
const PROBE_FLAG_LEVEL: f64 = 0.99;

/// Sparse tangentially-approaching zero family: `lambda_m = (1 - alpha_m
/// t_m^3)^{1/2} e^{i t_m}` with `t_m = alpha_m = 2^{-m}`, `m = 1..=count`.
/// Base points `zeta_m = (1 - t_m^3)^{1/2} e^{i t_m}` sit radially below the
/// zeros; both sequences accumulate only at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseFamily {
    pub count: usize,
}

impl SparseFamily {
    /// Zeros beyond this index have `1 - |lambda_m| < 2^{-52}` and round onto
    /// the unit circle in f64; they are folded into the tail bound instead of
    /// being evaluated as factors.
    pub const EVAL_CUTOFF: usize = 12;

    pub fn t(m: usize) -> f64 {
        0.5f64.powi(m as i32)
    }

    pub fn alpha(m: usize) -> f64 {
        0.5f64.powi(m as i32)
    }

    pub fn zero(m: usize) -> Complex64 {
        let t = Self::t(m);
        let r = (1.0 - Self::alpha(m) * t * t * t).sqrt();
        Complex64::from_polar(r, t)
    }

    pub fn base_point(m: usize) -> Complex64 {
        let t = Self::t(m);
        Complex64::from_polar((1.0 - t * t * t).sqrt(), t)
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        (1..=self.count).map(Self::zero).collect()
    }

    pub fn base_points(&self) -> Vec<Complex64> {
        (1..=self.count).map(Self::base_point).collect()
    }

    pub fn alphas(&self) -> Vec<f64> {
        (1..=self.count).map(Self::alpha).collect()
    }

    /// Upper bound on the omitted mass `sum_{m > count} (1 - |lambda_m|)`.
    /// Since `1 - sqrt(1 - x) <= x`, the tail is at most
    /// `sum_{m > count} 2^{-4m} = 2^{-4 count} / 15`.
    pub fn tail_sum(&self) -> f64 {
        0.5f64.powi(4 * self.count as i32) / 15.0
    }

    /// The zeros that are representable strictly inside the disk.
    pub fn evaluated_zeros(&self) -> Vec<Complex64> {
        (1..=self.count.min(Self::EVAL_CUTOFF)).map(Self::zero).collect()
    }

    /// Tail bound covering everything not in `evaluated_zeros`: the declared
    /// infinite tail plus any zeros folded out for sitting within an ulp of
    /// the circle.
    pub fn folded_tail(&self) -> f64 {
        SparseFamily {
            count: self.count.min(Self::EVAL_CUTOFF),
        }
        .tail_sum()
    }

    /// Boundary accumulation point of the zeros (angle on the circle).
    pub fn limit_angle(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerFunction {
    explicit_zeros: Vec<Complex64>,
    family: Option<SparseFamily>,
    blaschke: BlaschkeProduct,
    singular: SingularFactor,
    truncation_budget: f64,
}

impl InnerFunction {
    pub fn new(zeros: Vec<Complex64>, atoms: Vec<Atom>) -> Result<InnerFunction> {
        Ok(InnerFunction {
            blaschke: BlaschkeProduct::new(zeros.clone())?,
            explicit_zeros: zeros,
            family: None,
            singular: SingularFactor::new(atoms)?,
            truncation_budget: DEFAULT_TRUNCATION_BUDGET,
        })
    }

    pub fn from_zeros(zeros: Vec<Complex64>) -> Result<InnerFunction> {
        InnerFunction::new(zeros, Vec::new())
    }

    /// Purely atomic singular inner function; `atom(1, 1)` is
    /// `exp((z+1)/(z-1))`, the classical Paley–Wiener generator.
    pub fn atom(xi: Complex64, omega: f64) -> Result<InnerFunction> {
        InnerFunction::new(Vec::new(), vec![Atom { xi, omega }])
    }

    /// Truncation of the sparse tangential family, with the closed-form tail
    /// carried along so evaluation stays certified.
    pub fn sparse_tangential(count: usize) -> Result<InnerFunction> {
        let family = SparseFamily { count };
        Ok(InnerFunction {
            blaschke: BlaschkeProduct::with_tail(family.evaluated_zeros(), family.folded_tail())?,
            explicit_zeros: Vec::new(),
            family: Some(family),
            singular: SingularFactor::new(Vec::new())?,
            truncation_budget: DEFAULT_TRUNCATION_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: f64) -> InnerFunction {
        self.truncation_budget = budget;
        self
    }

    pub fn zeros(&self) -> &[Complex64] {
        self.blaschke.zeros()
    }

    pub fn atoms(&self) -> &[Atom] {
        self.singular.atoms()
    }

    pub fn family(&self) -> Option<&SparseFamily> {
        self.family.as_ref()
    }

    pub fn singular_mass(&self) -> f64 {
        self.singular.total_mass()
    }

    pub fn truncation_budget(&self) -> f64 {
        self.truncation_budget
    }

    /// Constant function 1 (no zeros, no singular part).
    pub fn is_trivial(&self) -> bool {
        self.blaschke.zeros().is_empty()
            && self.blaschke.tail_sum() == 0.0
            && self.singular.is_trivial()
    }

    /// Value and derivative, certified against the declared truncation
    /// budget. Fails inside an atom guard band or when the tail bound at
    /// this modulus exceeds the budget.
    pub fn eval(&self, z: Complex64) -> Result<EvalResult> {
        let (result, bound) = self.eval_uncertified(z)?;
        if bound > self.truncation_budget {
            return Err(Error::TruncationBudgetExceeded {
                bound,
                budget: self.truncation_budget,
                modulus: z.norm(),
            });
        }
        Ok(result)
    }

    /// Like [`InnerFunction::eval`] but never refuses over the truncation
    /// budget: the truncated value is returned together with its tail bound
    /// and the caller decides what an uncertified point is worth. Atom
    /// guards still apply.
    pub fn eval_uncertified(&self, z: Complex64) -> Result<(EvalResult, f64)> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(Error::PointOutsideDomain(z));
        }
        let bound = self.blaschke.truncation_bound(z);
        let (bv, bd) = self.blaschke.eval(z);
        let (sv, sd) = self.singular.eval(z)?;
        Ok((
            EvalResult {
                value: bv * sv,
                derivative: bd * sv + bv * sd,
                condition_estimate: 8.0 * f64::EPSILON + bound,
            },
            bound,
        ))
    }

    /// `|theta(z)|`, with points that cannot be certified reported as `None`.
    fn modulus_or_unknown(&self, z: Complex64) -> Option<f64> {
        self.eval(z).ok().map(|r| r.value.norm())
    }

    pub fn spectrum_estimate(
        &self,
        arc_resolution: usize,
        radial_grid: &[f64],
    ) -> SpectrumEstimate {
        let half_width = std::f64::consts::PI / arc_resolution.max(4) as f64;
        let mut seeds: Vec<f64> = Vec::new();
        for atom in self.atoms() {
            seeds.push(normalize_angle(atom.xi.arg()));
        }
        for &lam in self.zeros() {
            if 1.0 - lam.norm() <= NEAR_BOUNDARY_TOL {
                seeds.push(normalize_angle(lam.arg()));
            }
        }
        if let Some(fam) = &self.family {
            seeds.push(normalize_angle(fam.limit_angle()));
        }
        let arcs = merge_seeds_into_arcs(seeds, half_width);

        let probe_angles: Vec<f64> = if arcs.is_empty() {
            (0..16)
                .map(|k| 2.0 * std::f64::consts::PI * k as f64 / 16.0)
                .collect()
        } else {
            arcs.iter().map(|a| a.center_angle).collect()
        };

        let probes = probe_angles
            .into_iter()
            .map(|angle| {
                let alpha = Complex64::from_polar(1.0, angle);
                // Liminf estimate: the smallest modulus over the last three
                // radial grid points that evaluate within budget.
                let tail = radial_grid.iter().rev().take(3);
                let mut liminf = f64::INFINITY;
                for &r in tail {
                    if let Some(m) = self.modulus_or_unknown(alpha * r) {
                        liminf = liminf.min(m);
                    }
                }
                if !liminf.is_finite() {
                    liminf = 1.0;
                }
                Probe {
                    alpha,
                    angle,
                    liminf,
                    flagged: liminf < PROBE_FLAG_LEVEL,
                }
            })
            .collect();

        SpectrumEstimate { arcs, probes }
    }

    /// Flood fill of `{|theta| < r}` on a Cartesian grid over the disk.
    /// Heuristic evidence only: a coarse grid can merge or miss components.
    pub fn one_component_probe(&self, r: f64, grid_size: usize) -> Result<OneComponentReport> {
        if !(0.0 < r && r < 1.0) {
            return Err(Error::Precondition(format!(
                "sublevel threshold must lie in (0, 1), got {r}"
            )));
        }
        if grid_size < 8 {
            return Err(Error::Precondition("grid size below 8".into()));
        }
        let margin = 2.0 / grid_size as f64;
        let coord = |i: usize| -1.0 + 2.0 * (i as f64 + 0.5) / grid_size as f64;

        let rows: Vec<Vec<Cell>> = (0..grid_size)
            .into_par_iter()
            .map(|iy| {
                let y = coord(iy);
                (0..grid_size)
                    .map(|ix| {
                        let z = Complex64::new(coord(ix), y);
                        if z.norm() > 1.0 - margin {
                            return Cell::OffDomain;
                        }
                        match self.modulus_or_unknown(z) {
                            None => Cell::Unknown,
                            Some(m) if m < r => Cell::Inside,
                            Some(_) => Cell::Outside,
                        }
                    })
                    .collect()
            })
            .collect();

        let component_count = count_components(&rows, grid_size);
        Ok(OneComponentReport {
            level: r,
            grid_size,
            component_count,
            connected: component_count <= 1,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cell {
    Inside,
    Outside,
    Unknown,
    OffDomain,
}

/// 4-connected components of the `Inside` cells, counted by a serial scan so
/// the result does not depend on thread scheduling.
fn count_components(rows: &[Vec<Cell>], n: usize) -> usize {
    let mut seen = vec![false; n * n];
    let mut count = 0usize;
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for iy in 0..n {
        for ix in 0..n {
            if rows[iy][ix] != Cell::Inside || seen[iy * n + ix] {
                continue;
            }
            count += 1;
            stack.push((iy, ix));
            seen[iy * n + ix] = true;
            while let Some((cy, cx)) = stack.pop() {
                let mut neighbors: [(usize, usize); 4] = [(cy, cx); 4];
                let mut len = 0;
                if cy > 0 {
                    neighbors[len] = (cy - 1, cx);
                    len += 1;
                }
                if cy + 1 < n {
                    neighbors[len] = (cy + 1, cx);
                    len += 1;
                }
                if cx > 0 {
                    neighbors[len] = (cy, cx - 1);
                    len += 1;
                }
                if cx + 1 < n {
                    neighbors[len] = (cy, cx + 1);
                    len += 1;
                }
                for &(ny, nx) in &neighbors[..len] {
                    if rows[ny][nx] == Cell::Inside && !seen[ny * n + nx] {
                        seen[ny * n + nx] = true;
                        stack.push((ny, nx));
                    }
                }
            }
        }
    }
    count
}

fn normalize_angle(a: f64) -> f64 {
    a.rem_euclid(2.0 * std::f64::consts::PI)
}

/// Circular distance between two angles.
fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    d.min(2.0 * std::f64::consts::PI - d)
}

fn merge_seeds_into_arcs(mut seeds: Vec<f64>, half_width: f64) -> Vec<Arc> {
    if seeds.is_empty() {
        return Vec::new();
    }
    seeds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    seeds.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    // Sweep the sorted seeds, merging arcs that touch, then close the circle
    // by testing the last interval against the first.
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for &s in &seeds {
        let (lo, hi) = (s - half_width, s + half_width);
        match intervals.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => intervals.push((lo, hi)),
        }
    }
    if intervals.len() > 1 {
        let first = intervals[0];
        let last = *intervals.last().unwrap();
        if last.1 - 2.0 * std::f64::consts::PI >= first.0 {
            intervals[0].0 = last.0 - 2.0 * std::f64::consts::PI;
            intervals.pop();
        }
    }
    intervals
        .into_iter()
        .map(|(lo, hi)| Arc {
            center_angle: normalize_angle(0.5 * (lo + hi)),
            half_width: 0.5 * (hi - lo),
        })
        .collect()
}

/// Closed boundary arc `{e^{i t} : |t - center_angle| <= half_width}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub center_angle: f64,
    pub half_width: f64,
}

impl Arc {
    pub fn contains_angle(&self, angle: f64) -> bool {
        angle_gap(angle, self.center_angle) <= self.half_width + 1e-12
    }

    pub fn contains_point(&self, xi: Complex64) -> bool {
        self.contains_angle(xi.arg())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    #[serde(with = "crate::util::complex_pair")]
    pub alpha: Complex64,
    pub angle: f64,
    /// Smallest certified `|theta(r alpha)|` over the tail of the radial grid.
    pub liminf: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub arcs: Vec<Arc>,
    pub probes: Vec<Probe>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneComponentReport {
    pub level: f64,
    pub grid_size: usize,
    pub component_count: usize,
    pub connected: bool,
}

/// Carleson separation `delta = inf_m prod_{k != m} |b_{lambda_k}(lambda_m)|`
/// of a finite zero set. Empty and singleton sets give 1 (empty product);
/// a repeated point gives exactly 0.
pub fn carleson_separation(zeros: &[Complex64]) -> f64 {
    if zeros.len() <= 1 {
        return 1.0;
    }
    let mut delta = f64::INFINITY;
    for (m, &lam) in zeros.iter().enumerate() {
        let mut prod = 1.0;
        for (k, &mu) in zeros.iter().enumerate() {
            if k == m {
                continue;
            }
            if mu == lam {
                return 0.0;
            }
            prod *= blaschke_factor(mu, lam).norm();
        }
        delta = delta.min(prod);
    }
    delta
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyDto {
    pub name: String,
    pub params: FamilyParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyParams {
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InnerFunctionDto {
    #[serde(default, with = "crate::util::complex_pair_vec")]
    pub zeros: Vec<Complex64>,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_budget: Option<f64>,
}

impl InnerFunction {
    pub fn to_dto(&self) -> InnerFunctionDto {
        InnerFunctionDto {
            zeros: self.explicit_zeros.clone(),
            atoms: self.atoms().to_vec(),
            family: self.family.map(|f| FamilyDto {
                name: "sparse-tangential".into(),
                params: FamilyParams { count: f.count },
            }),
            truncation_budget: Some(self.truncation_budget),
        }
    }

    pub fn from_dto(dto: &InnerFunctionDto) -> Result<InnerFunction> {
        let family = match &dto.family {
            None => None,
            Some(f) if f.name == "sparse-tangential" => Some(SparseFamily {
                count: f.params.count,
            }),
            Some(f) => {
                return Err(Error::InvalidConfig {
                    pointer: "/family/name".into(),
                    detail: format!("unknown family {:?}", f.name),
                })
            }
        };
        let mut zeros = dto.zeros.clone();
        let mut tail = 0.0;
        if let Some(fam) = &family {
            zeros.extend(fam.evaluated_zeros());
            tail = fam.folded_tail();
        }
        Ok(InnerFunction {
            blaschke: BlaschkeProduct::with_tail(zeros, tail)?,
            explicit_zeros: dto.zeros.clone(),
            family,
            singular: SingularFactor::new(dto.atoms.clone())?,
            truncation_budget: dto.truncation_budget.unwrap_or(DEFAULT_TRUNCATION_BUDGET),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_dto()).expect("inner function serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<InnerFunction> {
        InnerFunction::from_dto(&serde_json::from_str(json)?)
    }
}
