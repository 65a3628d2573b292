//! Python bindings for popper-optics: the experiment simulator, width
//! analysis, and the finite-dimensional conditional-measurement checks.

use num_complex::Complex64;
use popper_optics::analysis;
use popper_optics::conditional::{
    self, phase_matching_uncertainty, robertson_check, CMatrix, PureState,
};
use popper_optics::elements::ApertureProfile;
use popper_optics::experiment::{
    point_spread_function, simulate_coincidence, two_photon_source_state, ExperimentConfig,
    IntensityProfile, Normalization, PlaneTag,
};
use popper_optics::field::Grid1D;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: popper_optics::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn profile_to_py(profile: &IntensityProfile) -> (Vec<f64>, Vec<f64>) {
    let ys = (0..profile.grid.n()).map(|i| profile.grid.y(i)).collect();
    (ys, profile.intensity.clone())
}

fn profile_from_py(y: Vec<f64>, intensity: Vec<f64>) -> PyResult<IntensityProfile> {
    if y.len() < 2 || y.len() != intensity.len() {
        return Err(PyValueError::new_err(
            "y and intensity must be equal-length arrays with at least 2 samples",
        ));
    }
    let dx = y[1] - y[0];
    let grid = Grid1D::new(y.len(), dx).map_err(err)?;
    IntensityProfile::from_intensity(grid, intensity, Normalization::Peak, PlaneTag::D2)
        .map_err(err)
}

fn matrix_from_py(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a square matrix"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Unfolded two-slit ghost-imaging experiment with the Kim-Shih geometry
/// defaults; keyword arguments override individual parameters (SI units).
#[pyclass(name = "Experiment")]
struct PyExperiment {
    config: ExperimentConfig,
}

#[pymethods]
impl PyExperiment {
    #[new]
    #[pyo3(signature = (wavelength=None, slit_a_width=None, source_width=None, n_source_points=None, grid_samples=None, grid_window=None))]
    fn new(
        wavelength: Option<f64>,
        slit_a_width: Option<f64>,
        source_width: Option<f64>,
        n_source_points: Option<usize>,
        grid_samples: Option<usize>,
        grid_window: Option<f64>,
    ) -> PyResult<Self> {
        let mut config = ExperimentConfig::default();
        if let Some(v) = wavelength {
            config.wavelength = v;
        }
        if let Some(v) = slit_a_width {
            config.slit_a_width = v;
        }
        if let Some(v) = source_width {
            config.source = Some(ApertureProfile::Rect { width: v });
        }
        if let Some(v) = n_source_points {
            config.n_source_points = v;
        }
        let n = grid_samples.unwrap_or(config.grid.n());
        let window = grid_window.unwrap_or(config.grid.window());
        config.grid = Grid1D::new(n, window / n as f64).map_err(err)?;
        config.validate().map_err(err)?;
        Ok(Self { config })
    }

    /// Ghost-image point-spread function at slit B: (y_m, intensity).
    fn psf(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        Ok(profile_to_py(&point_spread_function(&self.config).map_err(err)?))
    }

    /// Conditioned D2 profile. case="i" puts a slit at B, case="ii" leaves
    /// B open. Returns (y_m, intensity), unit area.
    fn coincidence(&self, case: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let slit_b = match case {
            "i" => ApertureProfile::Rect { width: self.config.slit_a_width },
            "ii" => ApertureProfile::Open,
            other => {
                return Err(PyValueError::new_err(format!(
                    "case must be 'i' or 'ii', got '{other}'"
                )))
            }
        };
        let config = ExperimentConfig { slit_b, ..self.config.clone() };
        Ok(profile_to_py(&simulate_coincidence(&config).map_err(err)?))
    }

    /// Geometric-optics blur width 2 D lambda / s at slit B, in metres.
    fn predicted_blur_width(&self) -> PyResult<f64> {
        let s = match &self.config.source {
            Some(ApertureProfile::Rect { width }) => *width,
            Some(ApertureProfile::Gaussian { rms }) => 2.0 * rms,
            _ => return Err(PyValueError::new_err("experiment has no extended source")),
        };
        analysis::predicted_blur_width(self.config.d_source_b, self.config.wavelength, s)
            .map_err(err)
    }
}

/// Full width between the first intensity minima flanking the peak, or
/// None when no flanking minima exist inside the window.
#[pyfunction]
fn first_minima_width(y: Vec<f64>, intensity: Vec<f64>) -> PyResult<Option<f64>> {
    analysis::width_between_first_minima(&profile_from_py(y, intensity)?).map_err(err)
}

/// Full width at half maximum by linear interpolation.
#[pyfunction]
fn fwhm(y: Vec<f64>, intensity: Vec<f64>) -> PyResult<f64> {
    analysis::fwhm(&profile_from_py(y, intensity)?).map_err(err)
}

/// Robertson bound for a pure state: (lhs, rhs, satisfied) where
/// lhs = dA * dB and rhs = |<[A,B]>| / 2.
#[pyfunction]
fn robertson(
    state: Vec<Complex64>,
    a: Vec<Vec<Complex64>>,
    b: Vec<Vec<Complex64>>,
) -> PyResult<(f64, f64, bool)> {
    let d = state.len();
    let psi = PureState::new((1, d), conditional::CVector::from_vec(state)).map_err(err)?;
    let a = conditional::Observable::new(matrix_from_py(a)?).map_err(err)?;
    let b = conditional::Observable::new(matrix_from_py(b)?).map_err(err)?;
    let out = robertson_check(&psi, &a, &b).map_err(err)?;
    Ok((out.lhs, out.rhs, out.satisfied))
}

/// Anticorrelated two-photon source state uncertainties for a source of
/// full width `s` and sum-coordinate correlation length `corr` (metres).
/// Returns (delta_sum_k, delta_y1, delta_y2, product_y1, product_y2).
#[pyfunction]
#[pyo3(signature = (s, corr, n=1024, window=12e-3, wavelength=702.2e-9))]
fn phase_matching(
    s: f64,
    corr: f64,
    n: usize,
    window: f64,
    wavelength: f64,
) -> PyResult<(f64, f64, f64, f64, f64)> {
    let grid = Grid1D::new(n, window / n as f64).map_err(err)?;
    let state = two_photon_source_state(s, corr, grid, grid, wavelength).map_err(err)?;
    let report = phase_matching_uncertainty(&state).map_err(err)?;
    Ok((
        report.delta_sum_k,
        report.delta_y1,
        report.delta_y2,
        report.products.0,
        report.products.1,
    ))
}

#[pymodule]
fn popper_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExperiment>()?;
    m.add_function(wrap_pyfunction!(first_minima_width, m)?)?;
    m.add_function(wrap_pyfunction!(fwhm, m)?)?;
    m.add_function(wrap_pyfunction!(robertson, m)?)?;
    m.add_function(wrap_pyfunction!(phase_matching, m)?)?;
    Ok(())
}
