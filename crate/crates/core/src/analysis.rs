//! Width metrics, analytic blur/momentum predictions, and uncertainty
//! products.
//!
//! The primary width measure is the first-minima full width (the convention
//! of the blur estimate); FWHM is the fallback for minima-free profiles.
//! RMS widths are always window-truncated and labeled as such, since the
//! sinc^2 profiles produced by diffraction have divergent variance.

use crate::experiment::IntensityProfile;
use crate::field::MomentumProfile;
use crate::{Error, Result, HBAR, PLANCK};

/// Width measures for a single profile.
#[derive(Debug, Clone)]
pub struct WidthReport {
    pub first_minima_full_width: Option<f64>,
    pub fwhm: Option<f64>,
    /// Window-truncated RMS width (2x the truncated standard deviation is
    /// NOT applied; this is the plain standard deviation).
    pub rms_width: f64,
    pub method_notes: String,
}

/// Method used to reduce a profile to a single width number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthMethod {
    FirstMinima,
    Fwhm,
    Rms,
}

impl WidthMethod {
    pub fn name(self) -> &'static str {
        match self {
            WidthMethod::FirstMinima => "first-minima",
            WidthMethod::Fwhm => "fwhm",
            WidthMethod::Rms => "rms",
        }
    }
}

/// Position/momentum uncertainty product.
#[derive(Debug, Clone)]
pub struct UncertaintyReport {
    pub delta_y: f64,
    /// Delta p_y expressed as Delta k_y, 1/m.
    pub delta_k: f64,
    /// Delta y * Delta p_y in units of h.
    pub product_over_h: f64,
    /// Heisenberg check against hbar/2; meaningful for the RMS method.
    pub bound_satisfied: bool,
    pub method: WidthMethod,
    pub method_notes: String,
}

fn smooth3(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(n - 1);
        let mut acc = 0.0;
        let mut cnt = 0.0;
        for j in lo..=hi {
            acc += values[j];
            cnt += 1.0;
        }
        out[i] = acc / cnt;
    }
    out
}

/// Global maximum index with ties broken toward the sample nearest x = 0.
fn peak_index(xs: &[f64], values: &[f64]) -> usize {
    let mut best = 0usize;
    for i in 1..values.len() {
        if values[i] > values[best] + f64::EPSILON * values[best].abs() {
            best = i;
        } else if (values[i] - values[best]).abs() <= f64::EPSILON * values[best].abs()
            && xs[i].abs() < xs[best].abs()
        {
            best = i;
        }
    }
    best
}

/// Parabolic sub-sample refinement of an extremum at index `i`.
fn parabolic_refine(xs: &[f64], values: &[f64], i: usize) -> f64 {
    if i == 0 || i == values.len() - 1 {
        return xs[i];
    }
    let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom.abs() < 1e-300 {
        return xs[i];
    }
    let delta = 0.5 * (a - c) / denom;
    xs[i] + delta.clamp(-0.5, 0.5) * (xs[1] - xs[0])
}

/// Walks outward from `start` and returns the first minimum with a
/// prominence of at least 0.5% of the peak: the running minimum is accepted
/// once the profile climbs back above it by the prominence threshold.
/// Candidates above half the peak are ignored, so percent-level numerical
/// ripple near the top of the lobe cannot masquerade as a diffraction
/// minimum.
fn first_minimum_from(
    xs: &[f64],
    smoothed: &[f64],
    start: usize,
    step: isize,
) -> Option<f64> {
    let n = smoothed.len() as isize;
    let peak = smoothed[start];
    let prominence = 0.005 * peak;
    let mut best = start as isize;
    let mut i = start as isize + step;
    while i >= 0 && i < n {
        let v = smoothed[i as usize];
        if v < smoothed[best as usize] {
            best = i;
        } else if smoothed[best as usize] < 0.5 * peak
            && v > smoothed[best as usize] + prominence
        {
            return Some(parabolic_refine(xs, smoothed, best as usize));
        }
        i += step;
    }
    None
}

fn first_minima_width(xs: &[f64], values: &[f64]) -> Result<Option<f64>> {
    if values.iter().all(|v| *v == 0.0) {
        return Err(Error::WidthNotMeasurable("all-zero profile".into()));
    }
    let smoothed = smooth3(values);
    let peak = peak_index(xs, &smoothed);
    let left = first_minimum_from(xs, &smoothed, peak, -1);
    let right = first_minimum_from(xs, &smoothed, peak, 1);
    match (left, right) {
        (Some(l), Some(r)) => Ok(Some(r - l)),
        _ => Ok(None),
    }
}

fn fwhm_width(xs: &[f64], values: &[f64]) -> Result<f64> {
    if values.iter().all(|v| *v == 0.0) {
        return Err(Error::WidthNotMeasurable("all-zero profile".into()));
    }
    let peak = peak_index(xs, values);
    let half = values[peak] / 2.0;
    let crossing = |step: isize| -> Option<f64> {
        let mut i = peak as isize;
        loop {
            let next = i + step;
            if next < 0 || next >= values.len() as isize {
                return None;
            }
            if values[next as usize] < half {
                // linear interpolation between i and next
                let (x0, v0) = (xs[i as usize], values[i as usize]);
                let (x1, v1) = (xs[next as usize], values[next as usize]);
                return Some(x0 + (half - v0) * (x1 - x0) / (v1 - v0));
            }
            i = next;
        }
    };
    match (crossing(-1), crossing(1)) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::WidthNotMeasurable(
            "profile never falls below half maximum inside the window (window too small)".into(),
        )),
    }
}

/// Window-truncated standard deviation of the profile.
fn rms_width(xs: &[f64], values: &[f64]) -> Result<f64> {
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(Error::WidthNotMeasurable("all-zero profile".into()));
    }
    let mean: f64 = values.iter().zip(xs).map(|(v, x)| v * x).sum::<f64>() / total;
    let var: f64 = values
        .iter()
        .zip(xs)
        .map(|(v, x)| v * (x - mean) * (x - mean))
        .sum::<f64>()
        / total;
    Ok(var.max(0.0).sqrt())
}

/// Fraction of the window-truncated variance contributed by the outermost
/// 10% of samples on each side.
fn outer_variance_fraction(xs: &[f64], values: &[f64]) -> f64 {
    let n = xs.len();
    let edge = n / 10;
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mean: f64 = values.iter().zip(xs).map(|(v, x)| v * x).sum::<f64>() / total;
    let var_all: f64 = values
        .iter()
        .zip(xs)
        .map(|(v, x)| v * (x - mean) * (x - mean))
        .sum::<f64>();
    if var_all <= 0.0 {
        return 0.0;
    }
    let var_outer: f64 = (0..n)
        .filter(|i| *i < edge || *i >= n - edge)
        .map(|i| values[i] * (xs[i] - mean) * (xs[i] - mean))
        .sum();
    var_outer / var_all
}

/// Distance between the first local minima flanking the global peak, after
/// 3-sample smoothing, with parabolic sub-sample refinement. `None` when no
/// minimum exists on either side.
pub fn width_between_first_minima(profile: &IntensityProfile) -> Result<Option<f64>> {
    first_minima_width(&profile.grid.positions(), &profile.intensity)
}

/// Same measure on a momentum-space density.
pub fn momentum_width_between_first_minima(profile: &MomentumProfile) -> Result<Option<f64>> {
    first_minima_width(&profile.k_samples, &profile.density)
}

/// Linear-interpolated full width at half the peak value.
pub fn fwhm(profile: &IntensityProfile) -> Result<f64> {
    fwhm_width(&profile.grid.positions(), &profile.intensity)
}

pub fn momentum_fwhm(profile: &MomentumProfile) -> Result<f64> {
    fwhm_width(&profile.k_samples, &profile.density)
}

/// Window-truncated RMS (standard deviation) of the intensity profile.
pub fn rms(profile: &IntensityProfile) -> Result<f64> {
    rms_width(&profile.grid.positions(), &profile.intensity)
}

pub fn momentum_rms(profile: &MomentumProfile) -> Result<f64> {
    rms_width(&profile.k_samples, &profile.density)
}

/// All width measures of a profile in one record.
pub fn width_report(profile: &IntensityProfile) -> Result<WidthReport> {
    let first = width_between_first_minima(profile)?;
    let fw = fwhm(profile).ok();
    let rms_w = rms(profile)?;
    let mut notes = String::from("rms is window-truncated");
    if first.is_none() {
        notes.push_str("; no flanking minima found, fwhm is the usable width");
    }
    Ok(WidthReport {
        first_minima_full_width: first,
        fwhm: fw,
        rms_width: rms_w,
        method_notes: notes,
    })
}

/// Blur estimate: first-minima full width 2 D lambda / s of the sinc^2
/// point-image produced by a rectangular source of width s at distance D.
pub fn predicted_blur_width(d: f64, wavelength: f64, s: f64) -> Result<f64> {
    if !(d > 0.0 && wavelength > 0.0 && s > 0.0) {
        return Err(Error::InvalidConfig(
            "predicted_blur_width needs positive D, lambda, s".into(),
        ));
    }
    Ok(2.0 * d * wavelength / s)
}

/// Geometric momentum spread Delta k_y = (2 pi / lambda) * (s / D), i.e.
/// Delta p_y / hbar for trajectories bounded by the source-to-image
/// triangle.
pub fn predicted_momentum_spread(wavelength: f64, s: f64, d: f64) -> Result<f64> {
    if !(d > 0.0 && wavelength > 0.0 && s > 0.0) {
        return Err(Error::InvalidConfig(
            "predicted_momentum_spread needs positive lambda, s, D".into(),
        ));
    }
    Ok((2.0 * std::f64::consts::PI / wavelength) * (s / d))
}

/// Ratio of the density at the window edges to the peak density.
fn edge_fraction(values: &[f64]) -> f64 {
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return 0.0;
    }
    values[0].max(values[values.len() - 1]) / peak
}

/// Computes Delta y and Delta k_y by the chosen method and reports the
/// product in units of h.
pub fn uncertainty_product(
    profile_y: &IntensityProfile,
    profile_k: &MomentumProfile,
    method: WidthMethod,
) -> Result<UncertaintyReport> {
    let mut notes = String::new();
    let (delta_y, delta_k) = match method {
        WidthMethod::FirstMinima => {
            let dy = width_between_first_minima(profile_y)?.ok_or_else(|| {
                Error::WidthNotMeasurable("position profile has no flanking minima".into())
            })?;
            let dk = momentum_width_between_first_minima(profile_k)?.ok_or_else(|| {
                Error::WidthNotMeasurable("momentum profile has no flanking minima".into())
            })?;
            notes.push_str("first-minima full widths; sinc^2 variance caveat applies");
            (dy, dk)
        }
        WidthMethod::Fwhm => {
            notes.push_str("fwhm widths");
            (fwhm(profile_y)?, momentum_fwhm(profile_k)?)
        }
        WidthMethod::Rms => {
            let dy = rms(profile_y)?;
            let dk = momentum_rms(profile_k)?;
            notes.push_str("window-truncated rms widths");
            let fy = outer_variance_fraction(&profile_y.grid.positions(), &profile_y.intensity);
            let fk = outer_variance_fraction(&profile_k.k_samples, &profile_k.density);
            if fy > 0.5 || fk > 0.5 {
                notes.push_str(
                    "; UNRELIABLE: >50% of the truncated variance sits in the outermost decade of samples",
                );
            } else if edge_fraction(&profile_y.intensity) > 0.1
                || edge_fraction(&profile_k.density) > 0.1
            {
                notes.push_str(
                    "; UNRELIABLE: density at the window edge exceeds 10% of the peak (window-truncated state)",
                );
            }
            (dy, dk)
        }
    };
    let product = delta_y * delta_k * HBAR;
    Ok(UncertaintyReport {
        delta_y,
        delta_k,
        product_over_h: product / PLANCK,
        bound_satisfied: delta_y * delta_k >= 0.5 * (1.0 - 1e-9),
        method,
        method_notes: notes,
    })
}

/// Width ratio case (ii) / case (i), first-minima where both allow it, else
/// FWHM on both. Returns the ratio and the method used.
pub fn case_ratio_report(
    profile_i: &IntensityProfile,
    profile_ii: &IntensityProfile,
) -> Result<(f64, WidthMethod)> {
    let wi = width_between_first_minima(profile_i)?;
    let wii = width_between_first_minima(profile_ii)?;
    if let (Some(a), Some(b)) = (wi, wii) {
        return Ok((b / a, WidthMethod::FirstMinima));
    }
    // like must compare with like: fall back to FWHM on both
    let a = fwhm(profile_i)?;
    let b = fwhm(profile_ii)?;
    Ok((b / a, WidthMethod::Fwhm))
}
