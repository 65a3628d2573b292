//! Optical elements: thin lens, apertures, and imaging-geometry helpers.

use crate::field::ComplexField1D;
use crate::{Error, Result};
use num_complex::Complex64;

/// Transmission profile of an aperture. Values are in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum ApertureProfile {
    /// Hard-edged slit of the given full width. A sample transmits at 1 if
    /// its center lies strictly inside the edges, else 0.
    Rect { width: f64 },
    /// Gaussian amplitude transmission exp(-y^2 / (4 rms^2)), i.e. intensity
    /// transmission with the given RMS width.
    Gaussian { rms: f64 },
    /// Fully transparent; the identity element.
    Open,
    /// Per-sample transmission values on the field's own grid.
    Tabulated { values: Vec<f64> },
}

impl ApertureProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            ApertureProfile::Rect { width } if !(*width > 0.0) => Err(Error::InvalidElement(
                format!("rect aperture width must be > 0, got {width}"),
            )),
            ApertureProfile::Gaussian { rms } if !(*rms > 0.0) => Err(Error::InvalidElement(
                format!("gaussian aperture rms must be > 0, got {rms}"),
            )),
            ApertureProfile::Tabulated { values } => {
                if values.iter().any(|v| !(*v >= 0.0 && *v <= 1.0)) {
                    Err(Error::InvalidElement(
                        "tabulated transmission values must lie in [0, 1]".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Thin lens, positive focal length converging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensSpec {
    pub focal_length: f64,
}

impl LensSpec {
    pub fn new(focal_length: f64) -> Result<Self> {
        if focal_length == 0.0 || !focal_length.is_finite() {
            return Err(Error::InvalidElement(format!(
                "focal length must be nonzero and finite, got {focal_length}"
            )));
        }
        Ok(Self { focal_length })
    }
}

/// Multiplies the field by the paraxial thin-lens phase
/// exp(-i k y^2 / (2 f)). Power is unchanged exactly.
pub fn apply_lens(field: &ComplexField1D, lens: LensSpec) -> Result<ComplexField1D> {
    if lens.focal_length == 0.0 {
        return Err(Error::InvalidElement("focal length must be nonzero".into()));
    }
    let k = field.wavenumber();
    let f = lens.focal_length;
    let amplitude = field
        .amplitude
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let y = field.grid.y(i);
            a * Complex64::from_polar(1.0, -k * y * y / (2.0 * f))
        })
        .collect();
    ComplexField1D::new(field.grid, field.wavelength, amplitude)
}

/// Multiplies the field by the transmission profile centered at `center`.
pub fn apply_aperture(
    field: &ComplexField1D,
    aperture: &ApertureProfile,
    center: f64,
) -> Result<ComplexField1D> {
    aperture.validate()?;
    let transmit = |y: f64| -> f64 {
        match aperture {
            ApertureProfile::Rect { width } => {
                if (y - center).abs() < width / 2.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ApertureProfile::Gaussian { rms } => {
                let d = y - center;
                (-d * d / (4.0 * rms * rms)).exp()
            }
            ApertureProfile::Open => 1.0,
            ApertureProfile::Tabulated { .. } => unreachable!(),
        }
    };
    if let ApertureProfile::Tabulated { values } = aperture {
        if values.len() != field.grid.n() {
            return Err(Error::InvalidElement(format!(
                "tabulated profile has {} samples, field grid has {}",
                values.len(),
                field.grid.n()
            )));
        }
        let amplitude = field
            .amplitude
            .iter()
            .zip(values)
            .map(|(a, t)| a * t)
            .collect();
        return ComplexField1D::new(field.grid, field.wavelength, amplitude);
    }
    let amplitude = field
        .amplitude
        .iter()
        .enumerate()
        .map(|(i, a)| a * transmit(field.grid.y(i)))
        .collect();
    ComplexField1D::new(field.grid, field.wavelength, amplitude)
}

/// Gaussian thin-lens equation 1/a + 1/b = 1/f, solved for the image
/// distance b.
pub fn image_distance(object_distance: f64, f: f64) -> Result<f64> {
    if object_distance == f {
        return Err(Error::InvalidElement(
            "object at the focal plane images at infinity".into(),
        ));
    }
    Ok(1.0 / (1.0 / f - 1.0 / object_distance))
}

/// Transverse magnification -b/a (negative = inverted image).
pub fn magnification(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidElement(format!(
            "magnification needs positive conjugate distances, got a={a}, b={b}"
        )));
    }
    Ok(-b / a)
}
