//! Finite-dimensional toolkit for conditional-measurement uncertainty
//! checks: Robertson inequality, projection and time-shifted conditioning,
//! measurement-ordering independence, partial traces, and the
//! phase-matching bound on sampled two-photon fields.
//!
//! The continuous position/momentum argument is verified here in finite
//! dimensions, where the linear algebra is exact to ~1e-10; the continuum
//! side is exercised through `phase_matching_uncertainty` on sampled fields.

use crate::field::Grid1D;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use std::f64::consts::PI;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;
const PROJECTOR_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Normalized pure state of a bipartite system, subsystem-1-major ordering.
#[derive(Debug, Clone)]
pub struct PureState {
    pub dims: (usize, usize),
    pub amplitudes: CVector,
}

impl PureState {
    pub fn new(dims: (usize, usize), amplitudes: CVector) -> Result<Self> {
        if dims.0 * dims.1 != amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "amplitude length {} != d1*d2 = {}",
                amplitudes.len(),
                dims.0 * dims.1
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("norm {norm} != 1")));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Builds and normalizes in one step.
    pub fn normalized(dims: (usize, usize), mut amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm <= 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        amplitudes /= Complex64::new(norm, 0.0);
        Self::new(dims, amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    /// Amplitudes reshaped as a d1 x d2 matrix (rows index subsystem 1).
    pub fn as_matrix(&self) -> CMatrix {
        let (d1, d2) = self.dims;
        CMatrix::from_fn(d1, d2, |i, j| self.amplitudes[i * d2 + j])
    }

    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        (self.amplitudes.adjoint() * op * &self.amplitudes)[(0, 0)]
    }
}

/// Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub dim: usize,
    pub matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        if max_abs(&(&matrix - matrix.adjoint())) > HERMITIAN_TOL {
            return Err(Error::InvalidOperator("density matrix not Hermitian".into()));
        }
        let trace: Complex64 = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-12 || trace.im.abs() > 1e-12 {
            return Err(Error::InvalidOperator(format!("trace {trace} != 1")));
        }
        let eig = matrix.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&e| e < -1e-10) {
            return Err(Error::InvalidOperator("density matrix not positive semidefinite".into()));
        }
        Ok(Self { dim, matrix })
    }

    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        (&self.matrix * op).trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// Hermitian observable.
#[derive(Debug, Clone)]
pub struct Observable {
    pub dim: usize,
    pub matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch("observable must be square".into()));
        }
        if max_abs(&(&matrix - matrix.adjoint())) > HERMITIAN_TOL {
            return Err(Error::InvalidOperator("observable not Hermitian".into()));
        }
        Ok(Self { dim, matrix })
    }
}

/// Hermitian idempotent operator.
#[derive(Debug, Clone)]
pub struct Projector {
    pub dim: usize,
    pub matrix: CMatrix,
}

impl Projector {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch("projector must be square".into()));
        }
        if max_abs(&(&matrix - matrix.adjoint())) > PROJECTOR_TOL {
            return Err(Error::InvalidOperator("projector not Hermitian".into()));
        }
        if max_abs(&(&matrix * &matrix - &matrix)) > PROJECTOR_TOL {
            return Err(Error::InvalidOperator("projector not idempotent".into()));
        }
        Ok(Self { dim, matrix })
    }

    pub fn rank(&self) -> f64 {
        self.matrix.trace().re
    }
}

/// Unitary operator.
#[derive(Debug, Clone)]
pub struct Unitary {
    pub dim: usize,
    pub matrix: CMatrix,
}

impl Unitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch("unitary must be square".into()));
        }
        let gram = matrix.adjoint() * &matrix;
        if max_abs(&(gram - CMatrix::identity(dim, dim))) > UNITARY_TOL {
            return Err(Error::InvalidOperator("matrix not unitary".into()));
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::identity(dim, dim) }
    }
}

/// Kronecker product a (x) b.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Embeds a subsystem-1 operator as op (x) I_d2.
pub fn embed_subsystem1(op: &CMatrix, d2: usize) -> CMatrix {
    kron(op, &CMatrix::identity(d2, d2))
}

/// Embeds a subsystem-2 operator as I_d1 (x) op.
pub fn embed_subsystem2(op: &CMatrix, d1: usize) -> CMatrix {
    kron(&CMatrix::identity(d1, d1), op)
}

fn std_dev(mean: Complex64, mean_sq: Complex64) -> f64 {
    let var = mean_sq.re - mean.re * mean.re;
    var.max(0.0).sqrt()
}

/// Outcome of a Robertson inequality evaluation.
#[derive(Debug, Clone, Copy)]
pub struct RobertsonOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

fn robertson_from_expectations<E>(expect: E, a: &Observable, b: &Observable) -> RobertsonOutcome
where
    E: Fn(&CMatrix) -> Complex64,
{
    let mean_a = expect(&a.matrix);
    let mean_a2 = expect(&(&a.matrix * &a.matrix));
    let mean_b = expect(&b.matrix);
    let mean_b2 = expect(&(&b.matrix * &b.matrix));
    let commutator = &a.matrix * &b.matrix - &b.matrix * &a.matrix;
    let rhs = 0.5 * expect(&commutator).norm();
    let lhs = std_dev(mean_a, mean_a2) * std_dev(mean_b, mean_b2);
    RobertsonOutcome { lhs, rhs, satisfied: lhs >= rhs - 1e-10 }
}

/// Robertson inequality Delta A * Delta B >= |<[A,B]>| / 2 in a pure state.
pub fn robertson_check(state: &PureState, a: &Observable, b: &Observable) -> Result<RobertsonOutcome> {
    if a.dim != state.dim() || b.dim != state.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs observables {} and {}",
            state.dim(),
            a.dim,
            b.dim
        )));
    }
    Ok(robertson_from_expectations(|m| state.expectation(m), a, b))
}

/// Robertson inequality in a mixed state.
pub fn robertson_check_mixed(
    rho: &DensityOperator,
    a: &Observable,
    b: &Observable,
) -> Result<RobertsonOutcome> {
    if a.dim != rho.dim || b.dim != rho.dim {
        return Err(Error::DimensionMismatch(format!(
            "density dim {} vs observables {} and {}",
            rho.dim, a.dim, b.dim
        )));
    }
    Ok(robertson_from_expectations(|m| rho.expectation(m), a, b))
}

/// Projection postulate: P |psi> / <psi|P|psi>^(1/2).
pub fn project(state: &PureState, p: &Projector) -> Result<PureState> {
    if p.dim != state.dim() {
        return Err(Error::DimensionMismatch(format!(
            "projector dim {} vs state dim {}",
            p.dim,
            state.dim()
        )));
    }
    let projected = &p.matrix * &state.amplitudes;
    let probability = projected.norm_squared();
    if probability <= 1e-12 {
        return Err(Error::ImpossibleCondition { probability });
    }
    PureState::new(
        state.dims,
        projected / Complex64::new(probability.sqrt(), 0.0),
    )
}

/// Equivalent projection before temporal evolution: U1^dag P U1 on
/// subsystem 1.
pub fn time_shift_projector(p: &Projector, u1: &Unitary) -> Result<Projector> {
    if p.dim != u1.dim {
        return Err(Error::DimensionMismatch(format!(
            "projector dim {} vs unitary dim {}",
            p.dim, u1.dim
        )));
    }
    Projector::new(u1.matrix.adjoint() * &p.matrix * &u1.matrix)
}

/// Conditional outcome distribution of measuring `m2` on subsystem 2 in the
/// eigenbasis of `m2`, for the two orderings of conditioning and evolution.
///
/// Protocol (a) conditions first with the time-shifted projector
/// U1^dag P1 U1, then evolves with U1 (x) U2 and measures. Protocol (b)
/// evolves, measures each eigenvector branch projectively, then applies P1
/// and reweights by the joint probabilities. Returns the maximum absolute
/// difference between the two conditional distributions; for factorized
/// evolution it is zero up to rounding.
pub fn ordering_independence_check(
    psi: &PureState,
    p1: &Projector,
    u1: &Unitary,
    u2: &Unitary,
    m2: &Observable,
) -> Result<f64> {
    let (d1, d2) = psi.dims;
    if p1.dim != d1 || u1.dim != d1 || u2.dim != d2 || m2.dim != d2 {
        return Err(Error::DimensionMismatch(
            "operators must act on their declared subsystems".into(),
        ));
    }
    let eig = m2.matrix.clone().symmetric_eigen();
    let joint_u = kron(&u1.matrix, &u2.matrix);

    // (a) condition first: time-shifted projector, normalize, evolve, measure
    let shifted = time_shift_projector(p1, u1)?;
    let conditioned = &embed_subsystem1(&shifted.matrix, d2) * &psi.amplitudes;
    let prob_a = conditioned.norm_squared();
    if prob_a <= 1e-12 {
        return Err(Error::ImpossibleCondition { probability: prob_a });
    }
    let evolved_a = &joint_u * conditioned / Complex64::new(prob_a.sqrt(), 0.0);
    let state_a = PureState::new(psi.dims, evolved_a)?;
    let mat_a = state_a.as_matrix();

    // (b) condition last: evolve, branch on the M2 eigenvectors, project P1
    let evolved_b = &joint_u * &psi.amplitudes;
    let state_b = PureState::new(psi.dims, evolved_b)?;
    let mat_b = state_b.as_matrix();

    let mut dist_a = Vec::with_capacity(d2);
    let mut joint_b = Vec::with_capacity(d2);
    for j in 0..d2 {
        let v = eig.eigenvectors.column(j);
        let v_conj = CVector::from_iterator(d2, v.iter().map(|c| c.conj()));
        // <i (x) v_j | phi> for all i
        let branch_a = &mat_a * &v_conj;
        dist_a.push(branch_a.norm_squared());
        let branch_b = &mat_b * &v_conj;
        joint_b.push((&p1.matrix * branch_b).norm_squared());
    }
    let total_b: f64 = joint_b.iter().sum();
    if total_b <= 1e-12 {
        return Err(Error::ImpossibleCondition { probability: total_b });
    }
    let max_discrepancy = dist_a
        .iter()
        .zip(&joint_b)
        .map(|(pa, jb)| (pa - jb / total_b).abs())
        .fold(0.0, f64::max);
    Ok(max_discrepancy)
}

/// Same two protocols but with a joint (generally non-factorizable) unitary
/// replacing U1 (x) U2, and the raw projector in protocol (a). For generic
/// joint evolution the discrepancy is nonzero, showing the independent-
/// evolution hypothesis is necessary. Illustration only, not a theorem.
pub fn ordering_discrepancy_joint_evolution(
    psi: &PureState,
    p1: &Projector,
    u12: &Unitary,
    m2: &Observable,
) -> Result<f64> {
    let (d1, d2) = psi.dims;
    if p1.dim != d1 || u12.dim != d1 * d2 || m2.dim != d2 {
        return Err(Error::DimensionMismatch(
            "operators must act on their declared subsystems".into(),
        ));
    }
    let eig = m2.matrix.clone().symmetric_eigen();

    let conditioned = &embed_subsystem1(&p1.matrix, d2) * &psi.amplitudes;
    let prob_a = conditioned.norm_squared();
    if prob_a <= 1e-12 {
        return Err(Error::ImpossibleCondition { probability: prob_a });
    }
    let evolved_a = &u12.matrix * conditioned / Complex64::new(prob_a.sqrt(), 0.0);
    let mat_a = PureState::new(psi.dims, evolved_a)?.as_matrix();

    let evolved_b = &u12.matrix * &psi.amplitudes;
    let mat_b = PureState::new(psi.dims, evolved_b)?.as_matrix();

    let mut dist_a = Vec::with_capacity(d2);
    let mut joint_b = Vec::with_capacity(d2);
    for j in 0..d2 {
        let v = eig.eigenvectors.column(j);
        let v_conj = CVector::from_iterator(d2, v.iter().map(|c| c.conj()));
        dist_a.push((&mat_a * &v_conj).norm_squared());
        joint_b.push((&p1.matrix * (&mat_b * &v_conj)).norm_squared());
    }
    let total_b: f64 = joint_b.iter().sum();
    if total_b <= 1e-12 {
        return Err(Error::ImpossibleCondition { probability: total_b });
    }
    Ok(dist_a
        .iter()
        .zip(&joint_b)
        .map(|(pa, jb)| (pa - jb / total_b).abs())
        .fold(0.0, f64::max))
}

/// Conditional Robertson check: forms |psi''> = U (P1 (x) I |psi> / norm)
/// and evaluates the inequality for subsystem-2 observables A and B.
pub fn conditional_robertson_check(
    psi: &PureState,
    p1: &Projector,
    u: &Unitary,
    a: &Observable,
    b: &Observable,
) -> Result<RobertsonOutcome> {
    let (d1, d2) = psi.dims;
    if p1.dim != d1 || u.dim != d1 * d2 || a.dim != d2 || b.dim != d2 {
        return Err(Error::DimensionMismatch(
            "operators must act on their declared subsystems".into(),
        ));
    }
    let conditioned = &embed_subsystem1(&p1.matrix, d2) * &psi.amplitudes;
    let probability = conditioned.norm_squared();
    if probability <= 1e-12 {
        return Err(Error::ImpossibleCondition { probability });
    }
    let evolved = &u.matrix * conditioned / Complex64::new(probability.sqrt(), 0.0);
    let state = PureState::new(psi.dims, evolved)?;
    let a_full = Observable::new(embed_subsystem2(&a.matrix, d1))?;
    let b_full = Observable::new(embed_subsystem2(&b.matrix, d1))?;
    robertson_check(&state, &a_full, &b_full)
}

/// Partial trace over the discarded subsystem.
pub fn reduced_density(psi: &PureState, keep: usize) -> Result<DensityOperator> {
    let m = psi.as_matrix();
    let rho = match keep {
        1 => &m * m.adjoint(),
        2 => m.adjoint() * &m,
        other => {
            return Err(Error::InvalidState(format!(
                "keep must be 1 or 2, got {other}"
            )))
        }
    };
    DensityOperator::new(rho)
}

/// Discretized anticorrelated band state: sum over the central `band`
/// position bins of |y> (x) |-y>, normalized.
pub fn anticorrelated_band_state(n: usize, band: usize) -> Result<PureState> {
    if band == 0 || band > n {
        return Err(Error::InvalidState(format!(
            "band {band} must lie in 1..={n}"
        )));
    }
    let start = (n - band) / 2;
    let mut amplitudes = CVector::zeros(n * n);
    for j in start..start + band {
        // position inversion about the grid center maps bin j to n-1-j
        let mirrored = n - 1 - j;
        amplitudes[j * n + mirrored] = Complex64::new(1.0, 0.0);
    }
    PureState::normalized((n, n), amplitudes)
}

/// Discrete position observable diag(0, 1, ..., d-1).
pub fn discrete_position(d: usize) -> Observable {
    Observable {
        dim: d,
        matrix: CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(i as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
    }
}

/// Discrete momentum observable F X F^dag with F the unitary DFT.
pub fn discrete_momentum(d: usize) -> Observable {
    let f = CMatrix::from_fn(d, d, |i, j| {
        Complex64::from_polar(1.0 / (d as f64).sqrt(), 2.0 * PI * (i * j) as f64 / d as f64)
    });
    let x = discrete_position(d).matrix;
    let m = &f * x * f.adjoint();
    // symmetrize away rounding
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    Observable { dim: d, matrix: m }
}

// ---------------------------------------------------------------------------
// random ensembles (complex Ginibre based), reproducible given a seeded Rng
// ---------------------------------------------------------------------------

fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_pure_state<R: Rng>(rng: &mut R, dims: (usize, usize)) -> PureState {
    let v = CVector::from_fn(dims.0 * dims.1, |_, _| random_complex(rng));
    PureState::normalized(dims, v).expect("gaussian vector is nonzero")
}

pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> Observable {
    let m = CMatrix::from_fn(d, d, |_, _| random_complex(rng));
    let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    Observable { dim: d, matrix: h }
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix
/// with the R-diagonal phase fix.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> Unitary {
    let m = CMatrix::from_fn(d, d, |_, _| random_complex(rng));
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Unitary { dim: d, matrix: q }
}

/// Rank-k projector onto the span of k random orthonormal vectors, with k
/// uniform in [1, d-1].
pub fn random_projector<R: Rng>(rng: &mut R, d: usize) -> Projector {
    let k = if d <= 2 { 1 } else { rng.random_range(1..d) };
    let u = random_unitary(rng, d);
    let v = u.matrix.columns(0, k).into_owned();
    let p = &v * v.adjoint();
    // symmetrize away rounding before the invariant check
    let p = (&p + p.adjoint()) * Complex64::new(0.5, 0.0);
    Projector::new(p).expect("orthonormal span is a projector")
}

// ---------------------------------------------------------------------------
// sampled two-photon fields and the phase-matching bound
// ---------------------------------------------------------------------------

/// Sampled two-photon amplitude psi(y1, y2), row-major in y1.
#[derive(Debug, Clone)]
pub struct TwoPhotonField {
    pub grid_y1: Grid1D,
    pub grid_y2: Grid1D,
    pub wavelength: f64,
    pub amplitude: Vec<Complex64>,
}

impl TwoPhotonField {
    pub fn new_normalized(
        grid_y1: Grid1D,
        grid_y2: Grid1D,
        wavelength: f64,
        mut amplitude: Vec<Complex64>,
    ) -> Result<Self> {
        if amplitude.len() != grid_y1.n() * grid_y2.n() {
            return Err(Error::DimensionMismatch(format!(
                "amplitude length {} != n1*n2 = {}",
                amplitude.len(),
                grid_y1.n() * grid_y2.n()
            )));
        }
        let total: f64 = amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>()
            * grid_y1.dx()
            * grid_y2.dx();
        if total <= 0.0 {
            return Err(Error::ZeroPower);
        }
        let scale = 1.0 / total.sqrt();
        for a in &mut amplitude {
            *a *= scale;
        }
        Ok(Self { grid_y1, grid_y2, wavelength, amplitude })
    }

    pub fn total_probability(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>()
            * self.grid_y1.dx()
            * self.grid_y2.dx()
    }

    /// Position density marginal over y2, normalized to unit sum * dy1.
    pub fn marginal_y1(&self) -> Vec<f64> {
        let n1 = self.grid_y1.n();
        let n2 = self.grid_y2.n();
        let mut out = vec![0.0; n1];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                out[i1] += self.amplitude[i1 * n2 + i2].norm_sqr();
            }
        }
        let total: f64 = out.iter().sum::<f64>() * self.grid_y1.dx();
        for v in &mut out {
            *v /= total;
        }
        out
    }

    pub fn marginal_y2(&self) -> Vec<f64> {
        let n1 = self.grid_y1.n();
        let n2 = self.grid_y2.n();
        let mut out = vec![0.0; n2];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                out[i2] += self.amplitude[i1 * n2 + i2].norm_sqr();
            }
        }
        let total: f64 = out.iter().sum::<f64>() * self.grid_y2.dx();
        for v in &mut out {
            *v /= total;
        }
        out
    }
}

fn rms_of_density(values: &[f64], density: &[f64]) -> f64 {
    let total: f64 = density.iter().sum();
    let mean: f64 = density.iter().zip(values).map(|(d, v)| d * v).sum::<f64>() / total;
    let var: f64 = density
        .iter()
        .zip(values)
        .map(|(d, v)| d * (v - mean) * (v - mean))
        .sum::<f64>()
        / total;
    var.max(0.0).sqrt()
}

fn centered_fft2(field: &TwoPhotonField) -> Vec<Complex64> {
    let n1 = field.grid_y1.n();
    let n2 = field.grid_y2.n();
    let mut data = field.amplitude.clone();
    let mut planner = FftPlanner::new();
    let fft_rows = planner.plan_fft_forward(n2);
    let fft_cols = planner.plan_fft_forward(n1);
    // rows: transform over y2
    for row in data.chunks_mut(n2) {
        row.rotate_left(n2 / 2);
        fft_rows.process(row);
        row.rotate_left(n2 / 2);
    }
    // columns: transform over y1
    let mut col = vec![Complex64::new(0.0, 0.0); n1];
    for j in 0..n2 {
        for i in 0..n1 {
            col[i] = data[i * n2 + j];
        }
        col.rotate_left(n1 / 2);
        fft_cols.process(&mut col);
        col.rotate_left(n1 / 2);
        for i in 0..n1 {
            data[i * n2 + j] = col[i];
        }
    }
    let scale = field.grid_y1.dx() * field.grid_y2.dx();
    for v in &mut data {
        *v *= scale;
    }
    data
}

/// Phase-matching uncertainty report.
#[derive(Debug, Clone, Copy)]
pub struct PhaseMatchingReport {
    /// RMS spread of k1y + k2y.
    pub delta_sum_k: f64,
    pub delta_y1: f64,
    pub delta_y2: f64,
    /// (delta_sum_k * delta_y1, delta_sum_k * delta_y2).
    pub products: (f64, f64),
}

/// Computes RMS Delta(k1+k2) from the 2-D Fourier transform and RMS Delta y1
/// and Delta y2 from the position marginals. Both products must come out
/// >= 1/2 up to rounding for any genuine state.
pub fn phase_matching_uncertainty(state: &TwoPhotonField) -> Result<PhaseMatchingReport> {
    let norm = state.total_probability();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "two-photon field not normalized (total probability {norm})"
        )));
    }
    let n1 = state.grid_y1.n();
    let n2 = state.grid_y2.n();
    let spectrum = centered_fft2(state);
    let k1 = state.grid_y1.k_centered();
    let k2 = state.grid_y2.k_centered();

    let mut total = 0.0f64;
    let mut mean = 0.0f64;
    let mut mean_sq = 0.0f64;
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let p = spectrum[i1 * n2 + i2].norm_sqr();
            let sum_k = k1[i1] + k2[i2];
            total += p;
            mean += p * sum_k;
            mean_sq += p * sum_k * sum_k;
        }
    }
    mean /= total;
    mean_sq /= total;
    let delta_sum_k = (mean_sq - mean * mean).max(0.0).sqrt();

    let delta_y1 = rms_of_density(&state.grid_y1.positions(), &state.marginal_y1());
    let delta_y2 = rms_of_density(&state.grid_y2.positions(), &state.marginal_y2());

    Ok(PhaseMatchingReport {
        delta_sum_k,
        delta_y1,
        delta_y2,
        products: (delta_sum_k * delta_y1, delta_sum_k * delta_y2),
    })
}
