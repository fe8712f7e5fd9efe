//! Config-driven analysis runs, scenario presets, and report emission.
//!
//! A [`ScenarioConfig`] names a symbol, an inner function, and the sweep /
//! Clark grids; [`run_analyze`] drives the sweep → Clark → spectrum →
//! verdict pipeline and packages everything reproducible about the run —
//! verdict document, sample and Clark CSVs, and the exact config that
//! produced them — into a [`ReportBundle`].  All output is deterministic:
//! fixed summation orders, fixed float formatting, and no wall-clock
//! content anywhere (the provenance block hashes the config instead).

use crate::analyzer::{
    self, criterion_s_reports_at, sweep, verdict, Classification, CompactnessVerdict,
    CriterionSEntry, IndicatorSample, SweepConfig, Trend,
};
use crate::clark::{ClarkReport, DEFAULT_BOUNDARY_GRID};
use crate::error::{Error, Result};
use crate::inner::{carleson_separation, InnerFunction, InnerFunctionDto, SparseFamily};
use crate::maps::{MapExpr, MapExprDto};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub phi: MapExprDto,
    pub theta: InnerFunctionDto,
    pub sweep: SweepConfig,
    /// Clark base points as boundary angles (radians).  Empty: take the
    /// flagged spectrum probes of `θ`.
    #[serde(default)]
    pub clark_angles: Vec<f64>,
    #[serde(default = "default_boundary_grid")]
    pub boundary_grid: usize,
    /// Up-front grid doublings (the `--refine` flag counts these).
    #[serde(default)]
    pub refine: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn default_boundary_grid() -> usize {
    DEFAULT_BOUNDARY_GRID
}

impl ScenarioConfig {
    /// Rebuild the analytic objects, re-running every construction check,
    /// and vet the grid parameters.  Errors carry JSON-pointer-style paths
    /// where the offending field has one.
    pub fn validate(&self) -> Result<(MapExpr, InnerFunction)> {
        let phi = MapExpr::from_dto(&self.phi)?;
        let theta = InnerFunction::from_dto(&self.theta)?;
        if self.sweep.depth < 8 {
            return Err(Error::InvalidConfig {
                pointer: "/sweep/depth".into(),
                detail: "verdicts need sweep depth >= 8".into(),
            });
        }
        if self.sweep.angles < 16 {
            return Err(Error::InvalidConfig {
                pointer: "/sweep/angles".into(),
                detail: "fewer than 16 sweep angles".into(),
            });
        }
        if self.boundary_grid < 64 {
            return Err(Error::InvalidConfig {
                pointer: "/boundary_grid".into(),
                detail: "boundary grid below 64".into(),
            });
        }
        if self.refine > 10 {
            return Err(Error::InvalidConfig {
                pointer: "/refine".into(),
                detail: "more than 10 refinement doublings".into(),
            });
        }
        if let Some(bad) = self.clark_angles.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidConfig {
                pointer: "/clark_angles".into(),
                detail: format!("non-finite angle {bad}"),
            });
        }
        Ok((phi, theta))
    }
}

/// Tolerance constants in force for a run, recorded for auditability.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub singular_mass_threshold: f64,
    pub decay_factor: f64,
    pub decay_abs: f64,
    pub plateau_band: f64,
    pub growth_slope: f64,
    pub unattributed_tol: f64,
    pub criterion_s_grid_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            singular_mass_threshold: analyzer::SINGULAR_MASS_THRESHOLD,
            decay_factor: analyzer::DECAY_FACTOR,
            decay_abs: analyzer::DECAY_ABS,
            plateau_band: analyzer::PLATEAU_BAND,
            growth_slope: analyzer::GROWTH_SLOPE,
            unattributed_tol: analyzer::UNATTRIBUTED_TOL,
            criterion_s_grid_cap: analyzer::CRITERION_S_GRID_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    /// SHA-256 of the emitted config JSON.
    pub config_sha256: String,
    pub tool_version: String,
    pub boundary_grid: usize,
    pub sweep_angles: usize,
    pub sweep_depth: u32,
    pub tolerances: Tolerances,
}

/// Kernel transfer of one zero of the sparse family: the squared norm of
/// the composed normalized kernel against the prescribed weight `α_m`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelRatioRow {
    pub m: usize,
    #[serde(with = "crate::util::complex_pair")]
    pub lambda: Complex64,
    pub weight: f64,
    pub norm_sq: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SparseDiagnostics {
    pub kernel_ratios: Vec<KernelRatioRow>,
    pub max_ratio: f64,
    pub zero_separation: f64,
    pub base_point_separation: f64,
}

/// The verdict document as written to `verdict.json`.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictDocument {
    pub scenario: String,
    pub annulus_suprema: Vec<(u32, f64)>,
    pub trend: Trend,
    pub criterion_s: Vec<CriterionSEntry>,
    pub classification: Classification,
    pub essential_norm: f64,
    pub caveats: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparse_diagnostics: Option<SparseDiagnostics>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub config: ScenarioConfig,
    pub document: VerdictDocument,
    pub verdict_json: String,
    pub samples_csv: String,
    pub clark_csv: String,
    pub config_json: String,
    pub exit_code: i32,
}

pub fn exit_code_for(classification: Classification) -> i32 {
    match classification {
        Classification::CompactEvidence | Classification::NonCompactEvidence => 0,
        Classification::Inconclusive => 3,
    }
}

fn samples_csv(samples: &[IndicatorSample]) -> String {
    let mut out = String::from("w_re,w_im,N,theta_mod,Q,annulus\n");
    for s in samples {
        writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            s.w.re, s.w.im, s.counting_value, s.theta_modulus, s.q, s.annulus
        )
        .expect("string writes cannot fail");
    }
    out
}

fn clark_csv(reports: &[ClarkReport]) -> String {
    let mut out = String::from(
        "alpha_re,alpha_im,total_mass,ac_mass,singular_mass,unattributed,excision_bound,boundary_grid,atoms\n",
    );
    for r in reports {
        let atoms = r
            .atoms
            .iter()
            .map(|a| {
                format!(
                    "{:.12e}:{:.12e}:{:.12e}",
                    a.location.re, a.location.im, a.mass
                )
            })
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{}",
            r.alpha.re,
            r.alpha.im,
            r.total_mass,
            r.ac_mass,
            r.singular_mass,
            r.unattributed_singular(),
            r.excision_bound,
            r.boundary_grid,
            atoms
        )
        .expect("string writes cannot fail");
    }
    out
}

/// Kernel transfer table for the sparse zero family: exact defect
/// `1 − |λ_m|² = α_m t_m³` (the f64 zeros round onto the circle past the
/// family's evaluation cutoff, so the defect is taken in closed form)
/// times the boundary integral at the representable point.
fn sparse_diagnostics(phi: &MapExpr, family: &SparseFamily) -> Result<SparseDiagnostics> {
    let mut rows = Vec::with_capacity(family.count);
    for m in 1..=family.count {
        let lambda = SparseFamily::zero(m);
        let integral = analyzer::kernel_composition_integral(phi, lambda)?;
        let t = SparseFamily::t(m);
        let weight = SparseFamily::alpha(m);
        let defect = weight * t * t * t;
        let norm_sq = defect * integral;
        rows.push(KernelRatioRow {
            m,
            lambda,
            weight,
            norm_sq,
            ratio: norm_sq / weight,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let zeros: Vec<Complex64> = (1..=family.count).map(SparseFamily::zero).collect();
    let bases: Vec<Complex64> = (1..=family.count).map(SparseFamily::base_point).collect();
    Ok(SparseDiagnostics {
        kernel_ratios: rows,
        max_ratio,
        zero_separation: carleson_separation(&zeros),
        base_point_separation: carleson_separation(&bases),
    })
}

fn default_radial_grid() -> Vec<f64> {
    (1..=12).map(|k| 1.0 - 2f64.powi(-k)).collect()
}

/// Run the full pipeline for one config.
pub fn run_analyze(config: &ScenarioConfig) -> Result<ReportBundle> {
    let (phi, theta) = config.validate()?;
    if !phi.fixes_origin() {
        return Err(Error::Precondition(
            "verdict analysis requires phi(0) = 0".into(),
        ));
    }

    let sweep_result = sweep(&phi, &theta, &config.sweep)?;

    let centers: Vec<f64> = if config.clark_angles.is_empty() {
        theta
            .spectrum_estimate(64, &default_radial_grid())
            .probes
            .iter()
            .filter(|p| p.flagged)
            .map(|p| p.angle)
            .collect()
    } else {
        config.clark_angles.clone()
    };
    let base_grid = config.boundary_grid << config.refine;
    let reports = criterion_s_reports_at(&phi, &centers, base_grid)?;

    let verdict: CompactnessVerdict = verdict(&phi, &theta, &sweep_result, &reports)?;

    let sparse = match theta.family() {
        Some(family) => Some(sparse_diagnostics(&phi, family)?),
        None => None,
    };

    let config_json =
        serde_json::to_string_pretty(config).map_err(|e| Error::Json(e.to_string()))?;
    let provenance = Provenance {
        config_sha256: format!("{:x}", Sha256::digest(config_json.as_bytes())),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        boundary_grid: base_grid,
        sweep_angles: config.sweep.angles,
        sweep_depth: config.sweep.depth,
        tolerances: Tolerances::default(),
    };

    let document = VerdictDocument {
        scenario: config.name.clone(),
        annulus_suprema: verdict.annulus_suprema.clone(),
        trend: verdict.trend,
        criterion_s: verdict.criterion_s.clone(),
        classification: verdict.classification,
        essential_norm: verdict.essential_norm_estimate,
        caveats: verdict.caveats.clone(),
        sparse_diagnostics: sparse,
        provenance,
    };
    let verdict_json =
        serde_json::to_string_pretty(&document).map_err(|e| Error::Json(e.to_string()))?;

    Ok(ReportBundle {
        config: config.clone(),
        exit_code: exit_code_for(document.classification),
        samples_csv: samples_csv(&sweep_result.samples),
        clark_csv: clark_csv(&reports),
        verdict_json,
        config_json,
        document,
    })
}

pub const SCENARIO_NAMES: &[&str] = &["paley-wiener-small", "tangent-disk", "sparse-blaschke"];

/// The shipped preset configs.
pub fn preset_config(name: &str) -> Result<ScenarioConfig> {
    let (phi, theta, depth) = match name {
        "paley-wiener-small" => (
            MapExpr::scale(Complex64::new(0.5, 0.0))?,
            InnerFunction::atom(Complex64::new(1.0, 0.0), 1.0)?,
            12,
        ),
        "tangent-disk" => (
            tangent_symbol()?,
            InnerFunction::atom(Complex64::new(1.0, 0.0), 1.0)?,
            14,
        ),
        "sparse-blaschke" => (tangent_symbol()?, InnerFunction::sparse_tangential(20)?, 14),
        other => {
            return Err(Error::InvalidConfig {
                pointer: "/name".into(),
                detail: format!("unknown scenario {other:?}; expected one of {SCENARIO_NAMES:?}"),
            })
        }
    };
    Ok(ScenarioConfig {
        name: name.to_string(),
        phi: phi.to_dto(),
        theta: theta.to_dto(),
        sweep: SweepConfig { angles: 256, depth },
        clark_angles: Vec::new(),
        boundary_grid: DEFAULT_BOUNDARY_GRID,
        refine: 0,
        output_dir: None,
    })
}

/// The disk `|w − 1/4| < 3/4` is internally tangent to the circle at 1;
/// `2z/(3 − z)` maps the disk onto it.
fn tangent_symbol() -> Result<MapExpr> {
    MapExpr::moebius(
        Complex64::new(2.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(3.0, 0.0),
    )
}

pub fn run_scenario(name: &str) -> Result<ReportBundle> {
    run_analyze(&preset_config(name)?)
}

/// Write the bundle into `dir`; returns the paths written.
pub fn write_bundle(bundle: &ReportBundle, dir: &Path, json_only: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, content: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, content)?;
        written.push(path);
        Ok(())
    };
    emit("verdict.json", &bundle.verdict_json)?;
    emit("config.json", &bundle.config_json)?;
    if !json_only {
        emit("samples.csv", &bundle.samples_csv)?;
        emit("clark.csv", &bundle.clark_csv)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cheap_compact_config() -> ScenarioConfig {
        let mut config = preset_config("paley-wiener-small").unwrap();
        config.sweep = SweepConfig {
            angles: 32,
            depth: 8,
        };
        config.boundary_grid = 1024;
        config
    }

    #[test]
    fn paley_wiener_preset_is_compact_with_exit_zero() {
        let bundle = run_scenario("paley-wiener-small").unwrap();
        assert_eq!(
            bundle.document.classification,
            Classification::CompactEvidence
        );
        assert_eq!(bundle.exit_code, 0);
        assert!(bundle
            .document
            .annulus_suprema
            .iter()
            .all(|&(_, q)| q == 0.0));
        assert!(bundle.document.sparse_diagnostics.is_none());
    }

    #[test]
    fn tangent_preset_is_non_compact_with_the_expected_levels() {
        let bundle = run_scenario("tangent-disk").unwrap();
        assert_eq!(
            bundle.document.classification,
            Classification::NonCompactEvidence
        );
        assert_eq!(bundle.exit_code, 0);
        match bundle.document.trend {
            Trend::Plateau { level } => {
                assert!((level - 1.0 / 3.0).abs() < 0.05, "plateau level {level}")
            }
            other => panic!("expected a plateau, got {other:?}"),
        }
        let sigma = bundle
            .document
            .criterion_s
            .iter()
            .map(|e| e.singular_mass)
            .fold(0.0, f64::max);
        assert!((sigma - 2.0 / 3.0).abs() < 0.02, "singular mass {sigma}");
        assert!(bundle.samples_csv.lines().count() > 100);
    }

    #[test]
    fn sparse_preset_is_compact_with_bounded_kernel_ratios() {
        let bundle = run_scenario("sparse-blaschke").unwrap();
        assert_eq!(
            bundle.document.classification,
            Classification::CompactEvidence
        );
        assert_eq!(bundle.exit_code, 0);
        let d = bundle.document.sparse_diagnostics.as_ref().unwrap();
        assert_eq!(d.kernel_ratios.len(), 20);
        assert!(d.max_ratio.is_finite());
        for pair in d.kernel_ratios[15..].windows(2) {
            assert!(
                pair[1].ratio <= pair[0].ratio * 1.25,
                "tail ratio grew: {} -> {}",
                pair[0].ratio,
                pair[1].ratio
            );
        }
        assert!(d.zero_separation > 0.0);
        assert!(d.base_point_separation > 0.0);
    }

    #[test]
    fn identical_configs_produce_byte_identical_outputs() {
        let config = cheap_compact_config();
        let first = run_analyze(&config).unwrap();
        let second = run_analyze(&config).unwrap();
        assert_eq!(first.verdict_json, second.verdict_json);
        assert_eq!(first.samples_csv, second.samples_csv);
        assert_eq!(first.clark_csv, second.clark_csv);
        assert_eq!(first.config_json, second.config_json);
    }

    #[test]
    fn emitted_config_reloads_to_the_same_analysis() {
        let bundle = run_analyze(&cheap_compact_config()).unwrap();
        let reloaded: ScenarioConfig = serde_json::from_str(&bundle.config_json).unwrap();
        let again = run_analyze(&reloaded).unwrap();
        assert_eq!(bundle.verdict_json, again.verdict_json);
        assert_eq!(bundle.clark_csv, again.clark_csv);
    }

    #[test]
    fn vanishing_denominator_is_rejected_at_validation() {
        let json = r#"{
            "name": "bad",
            "phi": {"kind": "rational", "num": [[0.1, 0.0]], "den": [[-0.5, 0.0], [1.0, 0.0]]},
            "theta": {"zeros": [], "atoms": []},
            "sweep": {"angles": 64, "depth": 10}
        }"#;
        let config: ScenarioConfig = serde_json::from_str(json).unwrap();
        let err = run_analyze(&config).unwrap_err();
        assert!(
            matches!(
                err,
                Error::DenominatorVanishesInDisk(_) | Error::NotSelfMap(_)
            ),
            "unexpected error {err:?}"
        );
    }

    #[test]
    fn off_origin_symbols_are_refused() {
        let mut config = cheap_compact_config();
        config.phi = MapExpr::moebius(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(1.0, 0.0),
        )
        .unwrap()
        .to_dto();
        assert!(matches!(
            run_analyze(&config).unwrap_err(),
            Error::Precondition(_)
        ));
    }

    #[test]
    fn unknown_scenario_names_are_rejected() {
        match run_scenario("unheard-of") {
            Err(Error::InvalidConfig { pointer, .. }) => assert_eq!(pointer, "/name"),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn shallow_sweeps_are_rejected_with_a_pointer() {
        let mut config = cheap_compact_config();
        config.sweep.depth = 5;
        match run_analyze(&config) {
            Err(Error::InvalidConfig { pointer, .. }) => assert_eq!(pointer, "/sweep/depth"),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn csv_headers_are_stable() {
        let bundle = run_analyze(&cheap_compact_config()).unwrap();
        assert!(bundle
            .samples_csv
            .starts_with("w_re,w_im,N,theta_mod,Q,annulus\n"));
        assert!(bundle.clark_csv.starts_with(
            "alpha_re,alpha_im,total_mass,ac_mass,singular_mass,unattributed,excision_bound,boundary_grid,atoms\n"
        ));
    }

    #[test]
    fn bundles_write_and_honor_json_only() {
        let dir = tempfile::tempdir().unwrap();
        let bundle = run_analyze(&cheap_compact_config()).unwrap();

        let full = write_bundle(&bundle, dir.path(), false).unwrap();
        assert_eq!(full.len(), 4);
        let json_dir = dir.path().join("json-only");
        let slim = write_bundle(&bundle, &json_dir, true).unwrap();
        assert_eq!(slim.len(), 2);
        assert!(json_dir.join("verdict.json").exists());
        assert!(!json_dir.join("samples.csv").exists());

        let text = std::fs::read_to_string(dir.path().join("verdict.json")).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["classification"], "COMPACT-evidence");
        assert_eq!(doc["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
        assert!(doc["provenance"]["tolerances"]["singular_mass_threshold"].is_number());
    }

    #[test]
    fn refine_doubles_the_boundary_grid_in_provenance() {
        let mut config = cheap_compact_config();
        config.refine = 1;
        let bundle = run_analyze(&config).unwrap();
        assert_eq!(bundle.document.provenance.boundary_grid, 2048);
    }
}
