//! The unfolded Kim-Shih optical train: coherent fields and coincidence
//! (conditional) intensity distributions at any plane.
//!
//! Conditioning on "photon 1 passes through slit A and is detected at D1"
//! is realized as an incoherent uniform ensemble of point sources across
//! slit A; the coherent point-detector limit is exposed separately.

use crate::conditional::TwoPhotonField;
use crate::elements::{apply_aperture, apply_lens, ApertureProfile, LensSpec};
use crate::field::{
    apply_edge_taper, field_from_spectrum, make_field, propagate_angular_spectrum_absorbing,
    ComplexField1D,
    Grid1D,
};
use crate::{Error, Result};
use num_complex::Complex64;

/// Planes of the unfolded schematic, in axial order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PlaneTag {
    SlitA,
    Lens,
    Source,
    SlitB,
    D2,
}

impl PlaneTag {
    pub const ALL: [PlaneTag; 5] = [
        PlaneTag::SlitA,
        PlaneTag::Lens,
        PlaneTag::Source,
        PlaneTag::SlitB,
        PlaneTag::D2,
    ];

    fn index(self) -> usize {
        Self::ALL.iter().position(|p| *p == self).unwrap()
    }

    pub fn name(self) -> &'static str {
        match self {
            PlaneTag::SlitA => "slitA",
            PlaneTag::Lens => "lens",
            PlaneTag::Source => "source",
            PlaneTag::SlitB => "slitB",
            PlaneTag::D2 => "D2",
        }
    }
}

/// Discretization of the ideal point excitations in the slit A plane.
///
/// A literal single-sample spike excites the full grid bandwidth; on a
/// periodic window most of that energy wraps around during the long legs and
/// pollutes the downstream pattern. The band-limited model instead gives the
/// point a flat angular spectrum wide enough to overfill the source aperture
/// (uniform pupil illumination, so the point-spread function is the exact
/// Fourier transform of the pupil) while rolling off smoothly before the
/// window-imposed angular limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointSourceModel {
    /// A single-grid-sample spike.
    SingleSample,
    /// Real Gaussian amplitude of the given RMS intensity width in samples.
    Gaussian { rms_samples: f64 },
    /// Flat angular spectrum up to `flat_fraction` of the window-limited
    /// angle (W/2)/d_A_lens, raised-cosine roll-off to zero at
    /// `cutoff_fraction` of it.
    BandLimited { flat_fraction: f64, cutoff_fraction: f64 },
}

impl Default for PointSourceModel {
    fn default() -> Self {
        PointSourceModel::BandLimited { flat_fraction: 0.68, cutoff_fraction: 0.92 }
    }
}

impl PointSourceModel {
    fn validate(&self) -> Result<()> {
        match self {
            PointSourceModel::SingleSample => Ok(()),
            PointSourceModel::Gaussian { rms_samples } => {
                if !(*rms_samples > 0.0 && rms_samples.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "point-source rms_samples must be > 0, got {rms_samples}"
                    )));
                }
                Ok(())
            }
            PointSourceModel::BandLimited { flat_fraction, cutoff_fraction } => {
                if !(*flat_fraction > 0.0 && flat_fraction < cutoff_fraction && *cutoff_fraction <= 1.0)
                {
                    return Err(Error::InvalidConfig(format!(
                        "point-source band fractions need 0 < flat < cutoff <= 1, got {flat_fraction}, {cutoff_fraction}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Full parameterization of the unfolded geometry. All lengths in meters.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub wavelength: f64,
    pub focal_length: f64,
    /// Slit A to lens.
    pub d_a_lens: f64,
    /// Lens to the source aperture.
    pub d_lens_source: f64,
    /// Source aperture to the slit B (image) plane; the distance D of the
    /// blur estimate.
    pub d_source_b: f64,
    /// Slit B to the D2 scan plane.
    pub d_b_d2: f64,
    pub slit_a_width: f64,
    /// Rect 0.16 mm for case (i), `Open` for case (ii).
    pub slit_b: ApertureProfile,
    /// The effective SPDC source aperture; `None` models an ideal
    /// point-correlated source.
    pub source: Option<ApertureProfile>,
    /// Incoherent point sources spanning slit A in the coincidence model.
    pub n_source_points: usize,
    pub grid: Grid1D,
    /// How the ideal point excitations in the slit A plane are discretized.
    pub point_source: PointSourceModel,
    /// Raised-cosine edge taper (outer 10% of the window) before each
    /// propagation leg.
    pub edge_taper: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            wavelength: 702.2e-9,
            focal_length: 0.5,
            d_a_lens: 1.0,
            d_lens_source: 0.255,
            d_source_b: 0.745,
            d_b_d2: 0.5,
            slit_a_width: 0.16e-3,
            slit_b: ApertureProfile::Rect { width: 0.16e-3 },
            source: Some(ApertureProfile::Rect { width: 3e-3 }),
            n_source_points: 64,
            grid: Grid1D::new(16384, 20e-3 / 16384.0).unwrap(),
            point_source: PointSourceModel::default(),
            edge_taper: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("focal_length", self.focal_length),
            ("d_a_lens", self.d_a_lens),
            ("d_lens_source", self.d_lens_source),
            ("d_source_b", self.d_source_b),
            ("d_b_d2", self.d_b_d2),
            ("slit_a_width", self.slit_a_width),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.n_source_points < 1 {
            return Err(Error::InvalidConfig("n_source_points must be >= 1".into()));
        }
        self.point_source.validate()?;
        self.slit_b.validate()?;
        if let Some(src) = &self.source {
            src.validate()?;
        }
        Ok(())
    }

    fn leg_distance(&self, from: PlaneTag) -> f64 {
        match from {
            PlaneTag::SlitA => self.d_a_lens,
            PlaneTag::Lens => self.d_lens_source,
            PlaneTag::Source => self.d_source_b,
            PlaneTag::SlitB => self.d_b_d2,
            PlaneTag::D2 => 0.0,
        }
    }

    /// A near-point excitation centered at `y0` in the slit A plane,
    /// discretized per `self.point_source`.
    pub fn point_source(&self, y0: f64) -> Result<ComplexField1D> {
        match self.point_source {
            PointSourceModel::SingleSample => {
                let idx = self.grid.index_of(y0);
                let mut amplitude = vec![Complex64::new(0.0, 0.0); self.grid.n()];
                amplitude[idx] = Complex64::new(1.0, 0.0);
                ComplexField1D::new(self.grid, self.wavelength, amplitude)
            }
            PointSourceModel::Gaussian { rms_samples } => {
                let sigma = rms_samples * self.grid.dx();
                make_field(self.grid, self.wavelength, |y| {
                    let d = y - y0;
                    Complex64::new((-d * d / (4.0 * sigma * sigma)).exp(), 0.0)
                })
            }
            PointSourceModel::BandLimited { flat_fraction, cutoff_fraction } => {
                let k = 2.0 * std::f64::consts::PI / self.wavelength;
                // angular half-range the window can carry over the A -> lens leg
                let theta_window = 0.5 * self.grid.window() / self.d_a_lens;
                let k1 = flat_fraction * k * theta_window;
                let k2 = (cutoff_fraction * k * theta_window)
                    .min(0.95 * std::f64::consts::PI / self.grid.dx());
                let spectrum: Vec<Complex64> = self
                    .grid
                    .k_centered()
                    .iter()
                    .map(|&ky| {
                        let a = ky.abs();
                        let w = if a <= k1 {
                            1.0
                        } else if a < k2 {
                            let t = (a - k1) / (k2 - k1);
                            (0.5 * std::f64::consts::PI * t).cos().powi(2)
                        } else {
                            0.0
                        };
                        Complex64::from_polar(w, -ky * y0)
                    })
                    .collect();
                field_from_spectrum(self.grid, self.wavelength, &spectrum)
            }
        }
    }
}

/// Normalization convention carried by an intensity profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Maximum value 1.
    Peak,
    /// Discrete unit area: sum intensity * dx = 1.
    UnitArea,
}

/// Nonnegative sampled intensity versus transverse position.
#[derive(Debug, Clone)]
pub struct IntensityProfile {
    pub grid: Grid1D,
    pub intensity: Vec<f64>,
    pub normalization: Normalization,
    pub plane: PlaneTag,
}

impl IntensityProfile {
    pub fn from_intensity(
        grid: Grid1D,
        mut intensity: Vec<f64>,
        normalization: Normalization,
        plane: PlaneTag,
    ) -> Result<Self> {
        if intensity.len() != grid.n() {
            return Err(Error::InvalidProfile(format!(
                "intensity length {} != n_samples {}",
                intensity.len(),
                grid.n()
            )));
        }
        if intensity.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidProfile("intensity must be finite and >= 0".into()));
        }
        match normalization {
            Normalization::Peak => {
                let peak = intensity.iter().cloned().fold(0.0, f64::max);
                if peak <= 0.0 {
                    return Err(Error::InvalidProfile("all-zero intensity".into()));
                }
                for v in &mut intensity {
                    *v /= peak;
                }
            }
            Normalization::UnitArea => {
                let area: f64 = intensity.iter().sum::<f64>() * grid.dx();
                if area <= 0.0 {
                    return Err(Error::InvalidProfile("all-zero intensity".into()));
                }
                for v in &mut intensity {
                    *v /= area;
                }
            }
        }
        Ok(Self { grid, intensity, normalization, plane })
    }

    pub fn from_field(
        field: &ComplexField1D,
        normalization: Normalization,
        plane: PlaneTag,
    ) -> Result<Self> {
        Self::from_intensity(field.grid, field.intensity(), normalization, plane)
    }
}

fn propagate_leg(config: &ExperimentConfig, field: &ComplexField1D, distance: f64) -> Result<ComplexField1D> {
    let input = if config.edge_taper {
        apply_edge_taper(field, 0.10)
    } else {
        field.clone()
    };
    // Finite-window legs absorb components that would exit the window in
    // transit instead of letting them wrap around the periodic grid.
    let half = 0.5 * field.grid.window();
    Ok(propagate_angular_spectrum_absorbing(&input, distance, half)?.field)
}

fn apply_plane_element(
    config: &ExperimentConfig,
    field: &ComplexField1D,
    plane: PlaneTag,
) -> Result<ComplexField1D> {
    match plane {
        PlaneTag::SlitA => apply_aperture(
            field,
            &ApertureProfile::Rect { width: config.slit_a_width },
            0.0,
        ),
        PlaneTag::Lens => apply_lens(field, LensSpec::new(config.focal_length)?),
        PlaneTag::Source => match &config.source {
            Some(ap) => apply_aperture(field, ap, 0.0),
            None => Ok(field.clone()),
        },
        PlaneTag::SlitB => apply_aperture(field, &config.slit_b, 0.0),
        PlaneTag::D2 => Ok(field.clone()),
    }
}

/// Propagates a field from plane `from` to plane `to`, applying the element
/// at every strictly intermediate plane. The elements at the endpoint
/// planes themselves are not applied.
pub fn propagate_train(
    config: &ExperimentConfig,
    initial: &ComplexField1D,
    from: PlaneTag,
    to: PlaneTag,
) -> Result<ComplexField1D> {
    config.validate()?;
    if from.index() > to.index() {
        return Err(Error::PlaneOrder { from: from.name(), to: to.name() });
    }
    let mut field = initial.clone();
    for step in from.index()..to.index() {
        let here = PlaneTag::ALL[step];
        let next = PlaneTag::ALL[step + 1];
        field = propagate_leg(config, &field, config.leg_distance(here))?;
        if next != to {
            field = apply_plane_element(config, &field, next)?;
        }
    }
    Ok(field)
}

/// Intensity at the slit B (image) plane for a single on-axis point source
/// at slit A, peak-normalized. The slit B aperture is not applied.
pub fn point_spread_function(config: &ExperimentConfig) -> Result<IntensityProfile> {
    if config.source.is_none() {
        return Err(Error::InvalidConfig(
            "point_spread_function requires a source aperture (PSF undefined without the blurring aperture)"
                .into(),
        ));
    }
    let src = config.point_source(0.0)?;
    let at_b = propagate_train(config, &src, PlaneTag::SlitA, PlaneTag::SlitB)?;
    IntensityProfile::from_field(&at_b, Normalization::Peak, PlaneTag::SlitB)
}

/// Coherent field at D2 for a single point source at `y0` in the slit A
/// plane, including the slit B aperture.
fn d2_field_for_point(config: &ExperimentConfig, y0: f64) -> Result<ComplexField1D> {
    let src = config.point_source(y0)?;
    let at_b = propagate_train(config, &src, PlaneTag::SlitA, PlaneTag::SlitB)?;
    let after_b = apply_aperture(&at_b, &config.slit_b, 0.0)?;
    propagate_leg(config, &after_b, config.d_b_d2)
}

/// Positions of the incoherent ensemble points across slit A.
pub fn source_point_positions(config: &ExperimentConfig) -> Vec<f64> {
    let n = config.n_source_points;
    let w = config.slit_a_width;
    (0..n)
        .map(|j| -w / 2.0 + (j as f64 + 0.5) * w / n as f64)
        .collect()
}

/// Conditional (coincidence) distribution at D2: incoherent sum of the
/// intensities from point sources uniformly spanning slit A, normalized to
/// unit area. Realizes the reduced mixed state for a bucket detector D1.
pub fn simulate_coincidence(config: &ExperimentConfig) -> Result<IntensityProfile> {
    config.validate()?;
    let mut total = vec![0.0f64; config.grid.n()];
    // fixed accumulation order keeps the result reproducible run-to-run
    for y0 in source_point_positions(config) {
        let field = d2_field_for_point(config, y0)?;
        for (acc, a) in total.iter_mut().zip(&field.amplitude) {
            *acc += a.norm_sqr();
        }
    }
    IntensityProfile::from_intensity(config.grid, total, Normalization::UnitArea, PlaneTag::D2)
}

/// Coherent (quantum-erasure) limit: a single point source at `d1_point` in
/// the slit A plane, fully coherent propagation to D2 including slit B.
pub fn simulate_coherent_conditioned(
    config: &ExperimentConfig,
    d1_point: f64,
) -> Result<IntensityProfile> {
    config.validate()?;
    if d1_point.abs() > config.slit_a_width / 2.0 {
        return Err(Error::InvalidConfig(format!(
            "d1_point {d1_point} m lies outside slit A (half-width {} m)",
            config.slit_a_width / 2.0
        )));
    }
    let field = d2_field_for_point(config, d1_point)?;
    IntensityProfile::from_field(&field, Normalization::UnitArea, PlaneTag::D2)
}

/// Sampled two-photon amplitude
/// psi(y1, y2) ~ rect((y1 - y2)/2 in source) * g(y1 + y2; correlation_width),
/// a finite-correlation regularization of the ideal anticorrelated state,
/// normalized to unit total probability. `g` is a Gaussian amplitude of RMS
/// `correlation_width` in the sum coordinate.
pub fn two_photon_source_state(
    source_width: f64,
    correlation_width: f64,
    grid_y1: Grid1D,
    grid_y2: Grid1D,
    wavelength: f64,
) -> Result<TwoPhotonField> {
    if !(source_width > 0.0 && correlation_width > 0.0) {
        return Err(Error::InvalidConfig(
            "source_width and correlation_width must be > 0".into(),
        ));
    }
    if correlation_width > source_width / 2.0 {
        return Err(Error::InvalidConfig(format!(
            "correlation_width {correlation_width} m must be << source_width {source_width} m"
        )));
    }
    let min_dx = grid_y1.dx().max(grid_y2.dx());
    if correlation_width < 4.0 * min_dx * (1.0 - 1e-12) {
        return Err(Error::InvalidConfig(format!(
            "grid too coarse: correlation_width {correlation_width} m spans fewer than 4 samples (dx = {min_dx} m)"
        )));
    }
    let n1 = grid_y1.n();
    let n2 = grid_y2.n();
    let c2 = correlation_width * correlation_width;
    let mut amplitude = vec![Complex64::new(0.0, 0.0); n1 * n2];
    for i1 in 0..n1 {
        let y1 = grid_y1.y(i1);
        for i2 in 0..n2 {
            let y2 = grid_y2.y(i2);
            let mid = (y1 - y2) / 2.0;
            if mid.abs() < source_width / 2.0 {
                let s = y1 + y2;
                amplitude[i1 * n2 + i2] =
                    Complex64::new((-s * s / (4.0 * c2)).exp(), 0.0);
            }
        }
    }
    TwoPhotonField::new_normalized(grid_y1, grid_y2, wavelength, amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis;

    fn fast_config() -> ExperimentConfig {
        ExperimentConfig {
            grid: Grid1D::new(8192, 20e-3 / 8192.0).unwrap(),
            n_source_points: 16,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn train_identity_when_from_equals_to() {
        let config = fast_config();
        let f = config.point_source(0.0).unwrap();
        let out = propagate_train(&config, &f, PlaneTag::Lens, PlaneTag::Lens).unwrap();
        assert!(out.rel_l2_distance(&f) < 1e-15);
    }

    #[test]
    fn train_rejects_reversed_order() {
        let config = fast_config();
        let f = config.point_source(0.0).unwrap();
        assert!(propagate_train(&config, &f, PlaneTag::SlitB, PlaneTag::Lens).is_err());
    }

    #[test]
    fn ideal_image_peaks_on_axis() {
        // source absent: unmagnified image of an on-axis point at slit A
        let config = ExperimentConfig { source: None, ..fast_config() };
        let f = config.point_source(0.0).unwrap();
        let out = propagate_train(&config, &f, PlaneTag::SlitA, PlaneTag::SlitB).unwrap();
        let peak = out
            .intensity()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(config.grid.y(peak).abs() <= config.grid.dx());
    }

    #[test]
    fn psf_width_matches_blur_formula() {
        let config = fast_config();
        let psf = point_spread_function(&config).unwrap();
        let width = analysis::width_between_first_minima(&psf)
            .unwrap()
            .expect("sinc^2 blur has first minima");
        let predicted = analysis::predicted_blur_width(
            config.d_source_b,
            config.wavelength,
            3e-3,
        )
        .unwrap();
        assert!(
            ((width - predicted) / predicted).abs() < 0.05,
            "width {width:.4e}, predicted {predicted:.4e}"
        );
    }

    #[test]
    fn psf_width_halves_when_source_doubles() {
        let mut config = fast_config();
        config.source = Some(ApertureProfile::Rect { width: 6e-3 });
        let psf = point_spread_function(&config).unwrap();
        let width = analysis::width_between_first_minima(&psf).unwrap().unwrap();
        let predicted = 2.0 * config.d_source_b * config.wavelength / 6e-3;
        assert!(
            ((width - predicted) / predicted).abs() < 0.05,
            "width {width:.4e}, predicted {predicted:.4e}"
        );
    }

    #[test]
    fn psf_off_axis_point_images_inverted() {
        let config = fast_config();
        let y0 = 0.05e-3;
        let src = config.point_source(y0).unwrap();
        let at_b = propagate_train(&config, &src, PlaneTag::SlitA, PlaneTag::SlitB).unwrap();
        let intensity = at_b.intensity();
        let peak = intensity
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let expected = -y0;
        assert!(
            (config.grid.y(peak) - expected).abs() <= 2.0 * config.grid.dx(),
            "peak at {}, expected {expected}",
            config.grid.y(peak)
        );
    }

    #[test]
    fn psf_requires_source() {
        let config = ExperimentConfig { source: None, ..fast_config() };
        assert!(point_spread_function(&config).is_err());
    }

    #[test]
    fn coincidence_is_incoherent_sum_of_point_runs() {
        let mut config = fast_config();
        config.n_source_points = 4;
        config.grid = Grid1D::new(4096, 20e-3 / 4096.0).unwrap();
        let combined = simulate_coincidence(&config).unwrap();
        let mut manual = vec![0.0f64; config.grid.n()];
        for y0 in source_point_positions(&config) {
            let field = d2_field_for_point(&config, y0).unwrap();
            for (acc, a) in manual.iter_mut().zip(&field.amplitude) {
                *acc += a.norm_sqr();
            }
        }
        let area: f64 = manual.iter().sum::<f64>() * config.grid.dx();
        for v in &mut manual {
            *v /= area;
        }
        for (a, b) in combined.intensity.iter().zip(&manual) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn coherent_conditioned_rejects_point_outside_slit() {
        let config = fast_config();
        assert!(simulate_coherent_conditioned(&config, 0.2e-3).is_err());
    }

    #[test]
    fn case_i_narrower_than_case_ii_momentum() {
        // narrowing slit B onto the blurred image increases the momentum
        // spread at D2 (window-truncated RMS on the slit-B-plane fields)
        let config = fast_config();
        let src = config.point_source(0.0).unwrap();
        let at_b = propagate_train(&config, &src, PlaneTag::SlitA, PlaneTag::SlitB).unwrap();
        let before = crate::field::momentum_distribution(&at_b).unwrap();
        let after_slit = apply_aperture(&at_b, &config.slit_b, 0.0).unwrap();
        let after = crate::field::momentum_distribution(&after_slit).unwrap();
        let rms = |mp: &crate::field::MomentumProfile| {
            let total: f64 = mp.density.iter().sum();
            let mean: f64 =
                mp.density.iter().zip(&mp.k_samples).map(|(d, k)| d * k).sum::<f64>() / total;
            (mp.density
                .iter()
                .zip(&mp.k_samples)
                .map(|(d, k)| d * (k - mean) * (k - mean))
                .sum::<f64>()
                / total)
                .sqrt()
        };
        assert!(rms(&after) > rms(&before));
    }

    #[test]
    fn two_photon_state_marginal_is_source_rect() {
        let g = Grid1D::new(256, 15e-3 / 256.0).unwrap();
        let s = 3e-3;
        let c = 4.0 * g.dx();
        let state = two_photon_source_state(s, c, g, g, 702.2e-9).unwrap();
        let marginal = state.marginal_y1();
        // width of the region holding ~all probability
        let peak = marginal.iter().cloned().fold(0.0, f64::max);
        let above: Vec<usize> = marginal
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > peak / 2.0)
            .map(|(i, _)| i)
            .collect();
        let width = (above[above.len() - 1] - above[0] + 1) as f64 * g.dx();
        assert!(
            (width - s).abs() <= 3.0 * g.dx() + c,
            "marginal width {width:.4e} vs source {s:.4e}"
        );
    }

    #[test]
    fn two_photon_state_symmetry_and_norm() {
        let g = Grid1D::new(128, 15e-3 / 128.0).unwrap();
        let state = two_photon_source_state(3e-3, 4.0 * g.dx(), g, g, 702.2e-9).unwrap();
        assert!((state.total_probability() - 1.0).abs() < 1e-9);
        // |psi(y1, y2)| = |psi(-y2, -y1)|; sample -y(i) sits at index n - i
        let n = g.n();
        for i1 in 1..n {
            for i2 in 1..n {
                let a = state.amplitude[i1 * n + i2].norm();
                let b = state.amplitude[(n - i2) * n + (n - i1)].norm();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_photon_state_rejects_coarse_grid() {
        let g = Grid1D::new(64, 15e-3 / 64.0).unwrap();
        assert!(two_photon_source_state(3e-3, 2.0 * g.dx(), g, g, 702.2e-9).is_err());
    }
}
