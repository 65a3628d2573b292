//! Configuration ingestion, scenario orchestration, and machine-readable
//! result emission.
//!
//! Configuration is plain-text `key = value` with units encoded in key
//! suffixes (`_mm`, `_nm`). Profiles are emitted as CSV (`y_mm,intensity`,
//! 9 significant digits) and the run summary as flat JSON with
//! unit-suffixed keys, so outputs are byte-identical across runs with the
//! same configuration and seed.

use crate::analysis::{self, WidthMethod};
use crate::conditional::{
    anticorrelated_band_state, conditional_robertson_check,
    ordering_discrepancy_joint_evolution, ordering_independence_check, phase_matching_uncertainty,
    random_hermitian, random_projector, random_pure_state, random_unitary, reduced_density,
    robertson_check, time_shift_projector,
};
use crate::elements::{apply_aperture, ApertureProfile};
use crate::experiment::{
    point_spread_function, simulate_coincidence, two_photon_source_state, ExperimentConfig,
    IntensityProfile, Normalization, PlaneTag, PointSourceModel,
};
use crate::field::{
    make_field, momentum_distribution, propagate_angular_spectrum_absorbing, Grid1D,
};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

const MM: f64 = 1e-3;
const NM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    KimShih,
    Psf,
    SingleSlit,
    ConditionalTests,
    PhaseMatching,
}

impl Scenario {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "kim-shih" => Ok(Scenario::KimShih),
            "psf" => Ok(Scenario::Psf),
            "single-slit" => Ok(Scenario::SingleSlit),
            "conditional-tests" => Ok(Scenario::ConditionalTests),
            "phase-matching" => Ok(Scenario::PhaseMatching),
            other => Err(Error::Config {
                location: "--scenario".into(),
                message: format!(
                    "unknown scenario '{other}' (expected kim-shih, psf, single-slit, conditional-tests, phase-matching)"
                ),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::KimShih => "kim-shih",
            Scenario::Psf => "psf",
            Scenario::SingleSlit => "single-slit",
            Scenario::ConditionalTests => "conditional-tests",
            Scenario::PhaseMatching => "phase-matching",
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub experiment: ExperimentConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub emit_csv: bool,
    pub emit_json: bool,
}

/// Scenario result: the config echo, all measured values and pass/fail
/// flags (flat, unit-suffixed keys), and the wall-clock duration. The
/// duration is reported on stdout only so emitted files stay byte-identical
/// across runs.
#[derive(Debug, Clone)]
pub struct SummaryRecord {
    pub scenario: &'static str,
    pub entries: BTreeMap<String, Value>,
    pub all_pass: bool,
    pub duration: Duration,
}

fn parse_positive(key: &str, location: &str, value: &str) -> Result<f64> {
    let v: f64 = value.parse().map_err(|_| Error::Config {
        location: location.to_string(),
        message: format!("key '{key}': expected a number, got '{value}'"),
    })?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Config {
            location: location.to_string(),
            message: format!("key '{key}': length must be positive, got {value}"),
        });
    }
    Ok(v)
}

fn apply_key(
    config: &mut ExperimentConfig,
    seed: &mut u64,
    key: &str,
    value: &str,
    location: &str,
) -> Result<()> {
    match key {
        "wavelength_nm" => config.wavelength = parse_positive(key, location, value)? * NM,
        "focal_length_mm" => config.focal_length = parse_positive(key, location, value)? * MM,
        "d_a_lens_mm" => config.d_a_lens = parse_positive(key, location, value)? * MM,
        "d_lens_source_mm" => config.d_lens_source = parse_positive(key, location, value)? * MM,
        "d_source_b_mm" => config.d_source_b = parse_positive(key, location, value)? * MM,
        "d_b_d2_mm" => config.d_b_d2 = parse_positive(key, location, value)? * MM,
        "slit_a_width_mm" => config.slit_a_width = parse_positive(key, location, value)? * MM,
        "slit_b" => {
            config.slit_b = if value == "open" {
                ApertureProfile::Open
            } else {
                ApertureProfile::Rect { width: parse_positive(key, location, value)? * MM }
            }
        }
        "source" => match value {
            "absent" => config.source = None,
            "rect" => {
                let width = source_width(config).unwrap_or(3e-3);
                config.source = Some(ApertureProfile::Rect { width });
            }
            "gaussian" => {
                let width = source_width(config).unwrap_or(3e-3);
                config.source = Some(ApertureProfile::Gaussian { rms: width / 2.0 });
            }
            other => {
                return Err(Error::Config {
                    location: location.to_string(),
                    message: format!(
                        "key 'source': expected absent, rect, or gaussian, got '{other}'"
                    ),
                })
            }
        },
        "source_width_mm" => {
            let width = parse_positive(key, location, value)? * MM;
            config.source = Some(match &config.source {
                Some(ApertureProfile::Gaussian { .. }) => {
                    ApertureProfile::Gaussian { rms: width / 2.0 }
                }
                _ => ApertureProfile::Rect { width },
            });
        }
        "n_source_points" => {
            config.n_source_points = value.parse().map_err(|_| Error::Config {
                location: location.to_string(),
                message: format!("key '{key}': expected a positive integer, got '{value}'"),
            })?;
            if config.n_source_points == 0 {
                return Err(Error::Config {
                    location: location.to_string(),
                    message: "key 'n_source_points': must be >= 1".into(),
                });
            }
        }
        "grid_samples" => {
            let n: usize = value.parse().map_err(|_| Error::Config {
                location: location.to_string(),
                message: format!("key '{key}': expected an integer, got '{value}'"),
            })?;
            let window = config.grid.window();
            config.grid = Grid1D::new(n, window / n as f64).map_err(|e| Error::Config {
                location: location.to_string(),
                message: e.to_string(),
            })?;
        }
        "grid_window_mm" => {
            let window = parse_positive(key, location, value)? * MM;
            let n = config.grid.n();
            config.grid = Grid1D::new(n, window / n as f64).map_err(|e| Error::Config {
                location: location.to_string(),
                message: e.to_string(),
            })?;
        }
        "point_source" => {
            config.point_source = match value {
                "single" => PointSourceModel::SingleSample,
                "bandlimited" => PointSourceModel::default(),
                "gaussian" => PointSourceModel::Gaussian { rms_samples: 8.0 },
                other => {
                    return Err(Error::Config {
                        location: location.to_string(),
                        message: format!(
                            "key 'point_source': expected single, gaussian, or bandlimited, got '{other}'"
                        ),
                    })
                }
            };
        }
        "point_source_rms_samples" => {
            let rms: f64 = value.parse().map_err(|_| Error::Config {
                location: location.to_string(),
                message: format!("key '{key}': expected a number, got '{value}'"),
            })?;
            config.point_source = PointSourceModel::Gaussian { rms_samples: rms };
        }
        "edge_taper" => {
            config.edge_taper = value.parse().map_err(|_| Error::Config {
                location: location.to_string(),
                message: format!("key '{key}': expected true or false, got '{value}'"),
            })?;
        }
        "seed" => {
            *seed = value.parse().map_err(|_| Error::Config {
                location: location.to_string(),
                message: format!("key '{key}': expected an unsigned integer, got '{value}'"),
            })?;
        }
        other => {
            return Err(Error::Config {
                location: location.to_string(),
                message: format!("unknown key '{other}'"),
            })
        }
    }
    Ok(())
}

fn source_width(config: &ExperimentConfig) -> Option<f64> {
    match &config.source {
        Some(ApertureProfile::Rect { width }) => Some(*width),
        Some(ApertureProfile::Gaussian { rms }) => Some(2.0 * rms),
        _ => None,
    }
}

/// Parses an optional config file plus inline `key=value` overrides into a
/// validated RunConfig with paper-geometry defaults.
pub fn load_config(
    scenario: &str,
    config_path: Option<&Path>,
    sets: &[String],
    output_dir: &Path,
    seed_flag: Option<u64>,
) -> Result<RunConfig> {
    let scenario = Scenario::parse(scenario)?;
    let mut experiment = ExperimentConfig::default();
    let mut seed = 42u64;

    if let Some(path) = config_path {
        let text = std::fs::read_to_string(path)?;
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let location = format!("{}:{}", path.display(), line_no + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                location: location.clone(),
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            let value = value.trim().trim_matches('"');
            apply_key(&mut experiment, &mut seed, key.trim(), value, &location)?;
        }
    }
    for (i, set) in sets.iter().enumerate() {
        let location = format!("--set[{i}]");
        let (key, value) = set.split_once('=').ok_or_else(|| Error::Config {
            location: location.clone(),
            message: format!("expected key=value, got '{set}'"),
        })?;
        apply_key(&mut experiment, &mut seed, key.trim(), value.trim(), &location)?;
    }
    if let Some(s) = seed_flag {
        seed = s;
    }
    experiment.validate()?;
    Ok(RunConfig {
        scenario,
        experiment,
        output_dir: output_dir.to_path_buf(),
        seed,
        emit_csv: true,
        emit_json: true,
    })
}

fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

fn write_profile_csv(dir: &Path, scenario: &str, case: &str, profile: &IntensityProfile) -> Result<()> {
    let mut out = String::from("y_mm,intensity\n");
    for (i, v) in profile.intensity.iter().enumerate() {
        let y_mm = profile.grid.y(i) / MM;
        let _ = writeln!(out, "{},{}", sig9(y_mm), sig9(*v));
    }
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{scenario}_{case}.csv")), out)?;
    Ok(())
}

fn echo_config(entries: &mut BTreeMap<String, Value>, run: &RunConfig) {
    let e = &run.experiment;
    entries.insert("config.wavelength_nm".into(), json!(e.wavelength / NM));
    entries.insert("config.focal_length_mm".into(), json!(e.focal_length / MM));
    entries.insert("config.d_a_lens_mm".into(), json!(e.d_a_lens / MM));
    entries.insert("config.d_lens_source_mm".into(), json!(e.d_lens_source / MM));
    entries.insert("config.d_source_b_mm".into(), json!(e.d_source_b / MM));
    entries.insert("config.d_b_d2_mm".into(), json!(e.d_b_d2 / MM));
    entries.insert("config.slit_a_width_mm".into(), json!(e.slit_a_width / MM));
    entries.insert(
        "config.slit_b".into(),
        match &e.slit_b {
            ApertureProfile::Open => json!("open"),
            ApertureProfile::Rect { width } => json!(format!("rect {} mm", width / MM)),
            ApertureProfile::Gaussian { rms } => json!(format!("gaussian rms {} mm", rms / MM)),
            ApertureProfile::Tabulated { .. } => json!("tabulated"),
        },
    );
    entries.insert(
        "config.source".into(),
        match &e.source {
            None => json!("absent"),
            Some(ApertureProfile::Rect { width }) => json!(format!("rect {} mm", width / MM)),
            Some(ApertureProfile::Gaussian { rms }) => {
                json!(format!("gaussian rms {} mm", rms / MM))
            }
            Some(_) => json!("tabulated"),
        },
    );
    entries.insert("config.n_source_points".into(), json!(e.n_source_points));
    entries.insert("config.grid_samples".into(), json!(e.grid.n()));
    entries.insert("config.grid_window_mm".into(), json!(e.grid.window() / MM));
    entries.insert(
        "config.point_source".into(),
        match e.point_source {
            PointSourceModel::SingleSample => json!("single"),
            PointSourceModel::Gaussian { rms_samples } => {
                json!(format!("gaussian rms {rms_samples} samples"))
            }
            PointSourceModel::BandLimited { flat_fraction, cutoff_fraction } => {
                json!(format!("bandlimited {flat_fraction}/{cutoff_fraction}"))
            }
        },
    );
    entries.insert("config.edge_taper".into(), json!(e.edge_taper));
    entries.insert("config.seed".into(), json!(run.seed));
    entries.insert("config.scenario".into(), json!(run.scenario.name()));
}

/// First-minima full width of the case (i) incoherent-ensemble model,
/// computed by direct quadrature of the blurred-slit Fraunhofer integral
/// (64 points across slit A, sinc blur of 0.1744 mm first zero).
pub const CASE_I_MODEL_WIDTH: f64 = 4.905e-3;

fn flatness_over_central_band(profile: &IntensityProfile, half_band: f64) -> f64 {
    let vals: Vec<f64> = (0..profile.grid.n())
        .filter(|i| profile.grid.y(*i).abs() <= half_band)
        .map(|i| profile.intensity[i])
        .collect();
    let mean: f64 = vals.iter().sum::<f64>() / vals.len() as f64;
    let peak = vals.iter().cloned().fold(0.0, f64::max);
    peak / mean - 1.0
}

fn run_kim_shih(run: &RunConfig, entries: &mut BTreeMap<String, Value>) -> Result<bool> {
    let base = &run.experiment;
    let case_i_slit = match &base.slit_b {
        ApertureProfile::Rect { width } => ApertureProfile::Rect { width: *width },
        _ => ApertureProfile::Rect { width: base.slit_a_width },
    };
    let config_i = ExperimentConfig { slit_b: case_i_slit.clone(), ..base.clone() };
    let config_ii = ExperimentConfig { slit_b: ApertureProfile::Open, ..base.clone() };
    // The control (ideal point-correlated source) must look flat over the
    // central +-5 mm at D2; the band-limited point model is flat out to
    // ~(flat_fraction/2)*window at the scan plane, so widen the window by
    // 1.5x at the same sample spacing for this run.
    let control_n = (base.grid.n() * 3 / 2 + 1) & !1usize;
    let config_control = ExperimentConfig {
        slit_b: case_i_slit,
        source: None,
        grid: Grid1D::new(control_n, base.grid.dx())?,
        ..base.clone()
    };

    let profile_i = simulate_coincidence(&config_i)?;
    let profile_ii = simulate_coincidence(&config_ii)?;
    let profile_control = simulate_coincidence(&config_control)?;

    if run.emit_csv {
        write_profile_csv(&run.output_dir, run.scenario.name(), "case_i", &profile_i)?;
        write_profile_csv(&run.output_dir, run.scenario.name(), "case_ii", &profile_ii)?;
        write_profile_csv(&run.output_dir, run.scenario.name(), "control", &profile_control)?;
    }

    let width_i = analysis::width_between_first_minima(&profile_i)?.ok_or_else(|| {
        Error::WidthNotMeasurable("case (i) profile has no flanking minima".into())
    })?;
    let width_ii = analysis::fwhm(&profile_ii)?;
    let ratio = width_ii / width_i;
    let flatness = flatness_over_central_band(&profile_control, 5e-3);

    // The incoherent-ensemble model widens the case (i) pattern beyond the
    // ideal bare-slit 4.389 mm: the sinc-shaped blur apodizes slit B (the
    // single-point pattern already spans 4.74 mm) and the off-center ensemble
    // members fill and shift the first minima outward. Direct quadrature of
    // the model, independent of any propagator, puts the first-minima width
    // at 4.905 mm. The simulation is held to 10% of that model value and to
    // a 15% bracket around the measured 4.4 mm.
    let pass_i = (width_i - CASE_I_MODEL_WIDTH).abs() / CASE_I_MODEL_WIDTH <= 0.10
        && (width_i - 4.4e-3).abs() / 4.4e-3 <= 0.15;
    let pass_ii = (1.2e-3..=2.4e-3).contains(&width_ii);
    let pass_ratio = ratio <= 0.55 && width_i / width_ii >= 2.0;
    let pass_flat = flatness < 0.20;

    entries.insert("case_i.first_minima_width_mm".into(), json!(width_i / MM));
    entries.insert("case_i.width_method".into(), json!("first-minima"));
    entries.insert("case_ii.fwhm_mm".into(), json!(width_ii / MM));
    entries.insert("case_ii.width_method".into(), json!("fwhm"));
    entries.insert("case_ratio.width_ii_over_width_i".into(), json!(ratio));
    entries.insert("control.peak_to_mean_variation".into(), json!(flatness));
    entries.insert("pass.case_i_width".into(), json!(pass_i));
    entries.insert("pass.case_ii_fwhm_in_1p2_to_2p4_mm".into(), json!(pass_ii));
    entries.insert("pass.case_ratio".into(), json!(pass_ratio));
    entries.insert("pass.control_flat_within_20pct".into(), json!(pass_flat));
    Ok(pass_i && pass_ii && pass_ratio && pass_flat)
}

fn run_psf(run: &RunConfig, entries: &mut BTreeMap<String, Value>) -> Result<bool> {
    let config = &run.experiment;
    let psf = point_spread_function(config)?;
    if run.emit_csv {
        write_profile_csv(&run.output_dir, run.scenario.name(), "onaxis", &psf)?;
    }
    let width = analysis::width_between_first_minima(&psf)?.ok_or_else(|| {
        Error::WidthNotMeasurable("PSF has no flanking minima".into())
    })?;
    let s = source_width(config).ok_or_else(|| {
        Error::InvalidConfig("psf scenario needs a source aperture".into())
    })?;
    let predicted = analysis::predicted_blur_width(config.d_source_b, config.wavelength, s)?;
    let ratio = width / predicted;
    let pass = (0.95..=1.05).contains(&ratio);
    entries.insert("psf.first_minima_width_mm".into(), json!(width / MM));
    entries.insert("psf.predicted_blur_width_mm".into(), json!(predicted / MM));
    entries.insert("psf.measured_over_predicted".into(), json!(ratio));
    entries.insert("pass.blur_ratio_in_0p95_to_1p05".into(), json!(pass));
    Ok(pass)
}

fn run_single_slit(run: &RunConfig, entries: &mut BTreeMap<String, Value>) -> Result<bool> {
    let config = &run.experiment;
    let plane = make_field(config.grid, config.wavelength, |_| Complex64::new(1.0, 0.0))?;
    let slit = apply_aperture(
        &plane,
        &ApertureProfile::Rect { width: config.slit_a_width },
        0.0,
    )?;
    // Absorb components that would leave the window in transit; on the
    // default grid the slit's high-angle light would otherwise wrap around
    // the periodic grid and corrupt the minima region.
    let far = propagate_angular_spectrum_absorbing(
        &slit,
        config.d_b_d2,
        0.5 * config.grid.window(),
    )?
    .field;
    let profile = IntensityProfile::from_field(&far, Normalization::Peak, PlaneTag::D2)?;
    if run.emit_csv {
        write_profile_csv(&run.output_dir, run.scenario.name(), "fraunhofer", &profile)?;
    }
    let width = analysis::width_between_first_minima(&profile)?.ok_or_else(|| {
        Error::WidthNotMeasurable("single-slit pattern has no flanking minima".into())
    })?;
    let analytic = 2.0 * config.wavelength * config.d_b_d2 / config.slit_a_width;
    let rel = (width - analytic).abs() / analytic;
    let pass = rel <= 0.02;
    entries.insert("single_slit.first_minima_width_mm".into(), json!(width / MM));
    entries.insert("single_slit.analytic_width_mm".into(), json!(analytic / MM));
    entries.insert("single_slit.relative_error".into(), json!(rel));
    entries.insert("pass.fraunhofer_within_2pct".into(), json!(pass));
    Ok(pass)
}

fn run_conditional_tests(run: &RunConfig, entries: &mut BTreeMap<String, Value>) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let trials = 1000usize;

    let mut eq1_violations = 0usize;
    for _ in 0..trials {
        let d = rng.random_range(2..=8usize);
        let state = random_pure_state(&mut rng, (1, d));
        let a = random_hermitian(&mut rng, d);
        let b = random_hermitian(&mut rng, d);
        if !robertson_check(&state, &a, &b)?.satisfied {
            eq1_violations += 1;
        }
    }

    let mut eq4_violations = 0usize;
    let mut eq4_done = 0usize;
    while eq4_done < trials {
        let d1 = rng.random_range(2..=6usize);
        let d2 = rng.random_range(2..=6usize);
        let psi = random_pure_state(&mut rng, (d1, d2));
        let p1 = random_projector(&mut rng, d1);
        let u = random_unitary(&mut rng, d1 * d2);
        let a = random_hermitian(&mut rng, d2);
        let b = random_hermitian(&mut rng, d2);
        match conditional_robertson_check(&psi, &p1, &u, &a, &b) {
            Ok(out) => {
                if !out.satisfied {
                    eq4_violations += 1;
                }
                eq4_done += 1;
            }
            Err(Error::ImpossibleCondition { .. }) => {}
            Err(other) => return Err(other),
        }
    }

    let mut ordering_violations = 0usize;
    let mut ordering_done = 0usize;
    while ordering_done < trials {
        let d1 = rng.random_range(2..=4usize);
        let d2 = rng.random_range(2..=4usize);
        let psi = random_pure_state(&mut rng, (d1, d2));
        let p1 = random_projector(&mut rng, d1);
        let u1 = random_unitary(&mut rng, d1);
        let u2 = random_unitary(&mut rng, d2);
        let m2 = random_hermitian(&mut rng, d2);
        match ordering_independence_check(&psi, &p1, &u1, &u2, &m2) {
            Ok(d) => {
                if d >= 1e-10 {
                    ordering_violations += 1;
                }
                ordering_done += 1;
            }
            Err(Error::ImpossibleCondition { .. }) => {}
            Err(other) => return Err(other),
        }
    }

    let mut time_shift_failures = 0usize;
    for _ in 0..200 {
        let d = rng.random_range(2..=4usize);
        let p = random_projector(&mut rng, d);
        let u = random_unitary(&mut rng, d);
        let shifted = time_shift_projector(&p, &u)?;
        if (shifted.rank() - p.rank()).abs() > 1e-10 {
            time_shift_failures += 1;
        }
    }

    let mut counterexample_max = 0.0f64;
    for _ in 0..100 {
        let psi = random_pure_state(&mut rng, (2, 2));
        let p1 = random_projector(&mut rng, 2);
        let u12 = random_unitary(&mut rng, 4);
        let m2 = random_hermitian(&mut rng, 2);
        if let Ok(d) = ordering_discrepancy_joint_evolution(&psi, &p1, &u12, &m2) {
            counterexample_max = counterexample_max.max(d);
        }
    }

    // incoherent mixed-state image of the anticorrelated band state
    let band = 12usize;
    let psi = anticorrelated_band_state(32, band)?;
    let rho = reduced_density(&psi, 2)?;
    let mut max_off = 0.0f64;
    let mut max_diag_dev = 0.0f64;
    for i in 0..32 {
        for j in 0..32 {
            if i != j {
                max_off = max_off.max(rho.matrix[(i, j)].norm());
            }
        }
        let d = rho.matrix[(i, i)].re;
        if d > 1e-12 {
            max_diag_dev = max_diag_dev.max((d - 1.0 / band as f64).abs());
        }
    }

    let pass_eq1 = eq1_violations == 0;
    let pass_eq4 = eq4_violations == 0;
    let pass_ordering = ordering_violations == 0;
    let pass_time_shift = time_shift_failures == 0;
    let pass_counterexample = counterexample_max > 1e-6;
    let pass_mixed = max_off < 1e-10 && max_diag_dev < 1e-10;

    entries.insert("robertson.trials".into(), json!(trials));
    entries.insert("robertson.violations".into(), json!(eq1_violations));
    entries.insert("conditional_robertson.trials".into(), json!(trials));
    entries.insert("conditional_robertson.violations".into(), json!(eq4_violations));
    entries.insert("ordering.trials".into(), json!(trials));
    entries.insert("ordering.violations".into(), json!(ordering_violations));
    entries.insert("time_shift.trials".into(), json!(200));
    entries.insert("time_shift.failures".into(), json!(time_shift_failures));
    entries.insert("joint_evolution.max_discrepancy".into(), json!(counterexample_max));
    entries.insert("mixed_state.max_offdiagonal".into(), json!(max_off));
    entries.insert("mixed_state.max_diagonal_deviation".into(), json!(max_diag_dev));
    entries.insert("pass.robertson_zero_violations".into(), json!(pass_eq1));
    entries.insert("pass.conditional_robertson_zero_violations".into(), json!(pass_eq4));
    entries.insert("pass.ordering_zero_violations".into(), json!(pass_ordering));
    entries.insert("pass.time_shift_invariants".into(), json!(pass_time_shift));
    entries.insert("pass.joint_evolution_counterexample_found".into(), json!(pass_counterexample));
    entries.insert("pass.mixed_state_image_incoherent".into(), json!(pass_mixed));
    Ok(pass_eq1 && pass_eq4 && pass_ordering && pass_time_shift && pass_counterexample && pass_mixed)
}

fn run_phase_matching(run: &RunConfig, entries: &mut BTreeMap<String, Value>) -> Result<bool> {
    // The window must hold the widest source (10 mm) while keeping the
    // largest correlation width (16 samples) well under half the narrowest
    // source (1 mm): dx ~= 11.7 um gives 16 dx ~= 0.19 mm.
    let grid = Grid1D::new(1024, 12e-3 / 1024.0).unwrap();
    let mut all_pass = true;
    for s_mm in [1.0f64, 3.0, 10.0] {
        for c_samples in [4usize, 8, 16] {
            let s = s_mm * MM;
            let c = c_samples as f64 * grid.dx();
            let state =
                two_photon_source_state(s, c, grid, grid, run.experiment.wavelength)?;
            let report = phase_matching_uncertainty(&state)?;
            let ok = report.products.0 >= 0.5 - 1e-6 && report.products.1 >= 0.5 - 1e-6;
            all_pass &= ok;
            let tag = format!("phase_matching.s_{s_mm}mm_corr_{c_samples}samples");
            entries.insert(format!("{tag}.delta_sum_k_per_m"), json!(report.delta_sum_k));
            entries.insert(format!("{tag}.delta_y1_mm"), json!(report.delta_y1 / MM));
            entries.insert(format!("{tag}.delta_y2_mm"), json!(report.delta_y2 / MM));
            entries.insert(format!("{tag}.product_y1"), json!(report.products.0));
            entries.insert(format!("{tag}.product_y2"), json!(report.products.1));
            entries.insert(format!("pass.{tag}"), json!(ok));
        }
    }
    entries.insert("phase_matching.grid_samples".into(), json!(grid.n()));
    entries.insert("phase_matching.grid_window_mm".into(), json!(grid.window() / MM));
    Ok(all_pass)
}

/// Runs the configured scenario, writes the emitted files, and returns the
/// summary. Exit-status policy: callers should exit nonzero iff
/// `all_pass` is false.
pub fn run_scenario(run: &RunConfig) -> Result<SummaryRecord> {
    let start = Instant::now();
    let mut entries = BTreeMap::new();
    echo_config(&mut entries, run);
    let all_pass = match run.scenario {
        Scenario::KimShih => run_kim_shih(run, &mut entries)?,
        Scenario::Psf => run_psf(run, &mut entries)?,
        Scenario::SingleSlit => run_single_slit(run, &mut entries)?,
        Scenario::ConditionalTests => run_conditional_tests(run, &mut entries)?,
        Scenario::PhaseMatching => run_phase_matching(run, &mut entries)?,
    };
    entries.insert("all_pass".into(), json!(all_pass));
    if run.emit_json {
        std::fs::create_dir_all(&run.output_dir)?;
        let json_text = serde_json::to_string_pretty(&entries).expect("serializable map");
        std::fs::write(run.output_dir.join("summary.json"), json_text + "\n")?;
    }
    Ok(SummaryRecord {
        scenario: run.scenario.name(),
        entries,
        all_pass,
        duration: start.elapsed(),
    })
}

/// Blurred-image uncertainty product at the slit B plane, first-minima
/// method: Delta y from the sinc^2 point-spread intensity, Delta k from the
/// momentum density of the field confined to the blurred image (the
/// single-slit-diffraction reading of the 2h product).
pub fn blurred_image_uncertainty_product(config: &ExperimentConfig) -> Result<analysis::UncertaintyReport> {
    let psf = point_spread_function(config)?;
    let blur = analysis::width_between_first_minima(&psf)?.ok_or_else(|| {
        Error::WidthNotMeasurable("PSF has no flanking minima".into())
    })?;
    // confine a plane wave to the blurred image and take its momentum density
    let plane = make_field(config.grid, config.wavelength, |_| Complex64::new(1.0, 0.0))?;
    let confined = apply_aperture(&plane, &ApertureProfile::Rect { width: blur }, 0.0)?;
    let momentum = momentum_distribution(&confined)?;
    analysis::uncertainty_product(&psf, &momentum, WidthMethod::FirstMinima)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for name in ["kim-shih", "psf", "single-slit", "conditional-tests", "phase-matching"] {
            assert_eq!(Scenario::parse(name).unwrap().name(), name);
        }
        assert!(Scenario::parse("nope").is_err());
    }

    #[test]
    fn empty_config_echoes_paper_defaults() {
        let run = load_config("psf", None, &[], Path::new("/tmp/out"), None).unwrap();
        assert_eq!(run.experiment.focal_length, 0.5);
        assert_eq!(run.experiment.wavelength, 702.2e-9);
        assert_eq!(run.experiment.slit_a_width, 0.16e-3);
        assert_eq!(run.experiment.d_b_d2, 0.5);
        assert_eq!(run.seed, 42);
    }

    #[test]
    fn slit_b_open_selects_case_ii() {
        let run = load_config(
            "kim-shih",
            None,
            &["slit_b=open".into()],
            Path::new("/tmp/out"),
            None,
        )
        .unwrap();
        assert_eq!(run.experiment.slit_b, ApertureProfile::Open);
    }

    #[test]
    fn negative_length_rejected() {
        let err = load_config(
            "psf",
            None,
            &["slit_a_width_mm=-1".into()],
            Path::new("/tmp/out"),
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("slit_a_width_mm"));
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let dir = std::env::temp_dir().join("popper_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.conf");
        std::fs::write(&path, "wavelength_nm = 702.2\nbogus_key = 1\n").unwrap();
        let err = load_config("psf", Some(&path), &[], Path::new("/tmp/out"), None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus_key"), "{msg}");
        assert!(msg.contains(":2"), "{msg}");
    }
}
