//! Amplitude vectors and the numeric substrate: tensor unfoldings, reduced
//! density matrices via Gram products, entropies, fidelities, Schmidt
//! spectra, and block-unitary application.
//!
//! Qubit 0 is the most significant bit of the amplitude index, so for an
//! n-qubit state the basis state |q0 q1 ... q_{n-1}> sits at index
//! `q0·2^(n-1) + q1·2^(n-2) + ... + q_{n-1}`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{self, C64, ONE, ZERO};

/// Norm drift tolerated after construction and factor application.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("input vector has (near-)zero norm")]
    ZeroVector,
    #[error("vector length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("qubit set is empty")]
    EmptySet,
    #[error("qubit set covers the full register; a proper subset is required")]
    FullSet,
    #[error("norm drifted by {0:e} after an operation that should preserve it")]
    NormDrift(f64),
}

// ---------------------------------------------------------------------------
// QubitSet
// ---------------------------------------------------------------------------

/// An ordered list of distinct qubit indices. The order matters: the first
/// listed qubit is the most significant bit of the block-local index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QubitSet {
    members: Vec<usize>,
}

impl QubitSet {
    pub fn new(members: Vec<usize>, n: usize) -> Result<Self, StateError> {
        if members.is_empty() {
            return Err(StateError::EmptySet);
        }
        let mut seen = vec![false; n];
        for &q in &members {
            if q >= n {
                return Err(StateError::DimensionMismatch(format!(
                    "qubit {q} out of range for {n}-qubit register"
                )));
            }
            if seen[q] {
                return Err(StateError::DimensionMismatch(format!("qubit {q} repeated")));
            }
            seen[q] = true;
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Qubits of an n-register not in this set, ascending.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        let mut inside = vec![false; n];
        for &q in &self.members {
            inside[q] = true;
        }
        (0..n).filter(|&q| !inside[q]).collect()
    }
}

// ---------------------------------------------------------------------------
// StateVector
// ---------------------------------------------------------------------------

/// A normalized pure state on `n` qubits: 2^n complex amplitudes with unit
/// 2-norm (enforced within [`NORM_TOL`] at every construction).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Normalize an arbitrary complex vector into a state. The length must be
    /// a power of two and the norm nonzero.
    pub fn normalize(v: Vec<C64>) -> Result<Self, StateError> {
        let len = v.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(StateError::NotPowerOfTwo(len));
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(StateError::ZeroVector);
        }
        let inv = 1.0 / norm;
        let amps: Vec<C64> = v.into_iter().map(|a| a * inv).collect();
        Ok(Self {
            n: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// |0...0> on n qubits.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// Computational basis state |index> on n qubits.
    pub fn basis(n: usize, index: usize) -> Self {
        assert!(n >= 1 && index < (1usize << n));
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Self { n, amps }
    }

    /// (|0...0> + |1...1>)/sqrt(2).
    pub fn ghz(n: usize) -> Self {
        assert!(n >= 2);
        let dim = 1usize << n;
        let mut amps = vec![ZERO; dim];
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[0] = h;
        amps[dim - 1] = h;
        Self { n, amps }
    }

    /// Equal superposition of the n single-excitation basis states.
    pub fn w_state(n: usize) -> Self {
        assert!(n >= 2);
        let dim = 1usize << n;
        let mut amps = vec![ZERO; dim];
        let a = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        for q in 0..n {
            amps[1usize << (n - 1 - q)] = a;
        }
        Self { n, amps }
    }

    /// Haar-distributed random pure state.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let dim = 1usize << n;
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalize(v).expect("gaussian vector is nonzero")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    /// <self|other>.
    pub fn inner(&self, other: &Self) -> Result<C64, StateError> {
        if self.n != other.n {
            return Err(StateError::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// <0...0|self>.
    pub fn overlap_with_zero(&self) -> C64 {
        self.amps[0]
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescale exactly to unit norm, erroring if the drift exceeds 10x the
    /// construction tolerance (which would indicate a non-unitary operation).
    fn renormalize_checked(mut self) -> Result<Self, StateError> {
        let ns = self.norm_sqr();
        let drift = (ns - 1.0).abs();
        if drift > 1e-10 {
            return Err(StateError::NormDrift(drift));
        }
        let inv = 1.0 / ns.sqrt();
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(self)
    }
}

/// |<a|b>|^2.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64, StateError> {
    Ok(a.inner(b)?.norm_sqr())
}

// ---------------------------------------------------------------------------
// Unfoldings
// ---------------------------------------------------------------------------

/// Index map for unfolding a state on a block of qubits: for each global
/// amplitude index, the (row, col) position in the 2^|block| x 2^(n-|block|)
/// unfolding. The block's own qubit order sets the row bits (first qubit of
/// the block is the row MSB); the complement in ascending qubit order sets
/// the column bits.
fn unfold_shifts(n: usize, block: &[usize]) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let k = block.len();
    let mut in_block = vec![usize::MAX; n];
    for (t, &q) in block.iter().enumerate() {
        in_block[q] = t;
    }
    // (source bit shift, destination bit shift) pairs
    let mut row_bits = Vec::with_capacity(k);
    for (t, &q) in block.iter().enumerate() {
        row_bits.push((n - 1 - q, k - 1 - t));
    }
    let mut col_bits = Vec::with_capacity(n - k);
    let mut s = 0;
    for q in 0..n {
        if in_block[q] == usize::MAX {
            col_bits.push((n - 1 - q, n - k - 1 - s));
            s += 1;
        }
    }
    (row_bits, col_bits)
}

#[inline]
fn gather_bits(idx: usize, bits: &[(usize, usize)]) -> usize {
    let mut out = 0usize;
    for &(src, dst) in bits {
        out |= ((idx >> src) & 1) << dst;
    }
    out
}

/// Unfold `state` into a 2^|block| x 2^(n-|block|) matrix whose rows are
/// indexed by the block qubits (in block order) and columns by the remaining
/// qubits (ascending).
pub fn unfold(state: &StateVector, block: &QubitSet) -> DMatrix<C64> {
    let n = state.n;
    let k = block.len();
    assert!(k <= n);
    let rows = 1usize << k;
    let cols = 1usize << (n - k);
    let (row_bits, col_bits) = unfold_shifts(n, block.members());
    let mut m = DMatrix::<C64>::zeros(rows, cols);
    for (idx, &a) in state.amps.iter().enumerate() {
        let r = gather_bits(idx, &row_bits);
        let c = gather_bits(idx, &col_bits);
        m[(r, c)] = a;
    }
    m
}

// ---------------------------------------------------------------------------
// DensityMatrix and entropy
// ---------------------------------------------------------------------------

/// A reduced density matrix: Hermitian, unit-trace, positive semidefinite
/// within the documented tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    elements: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validate the type invariants (Hermitian within 1e-12, trace 1 within
    /// 1e-12, smallest eigenvalue >= -1e-10) and wrap.
    pub fn new(elements: DMatrix<C64>) -> Result<Self, StateError> {
        let dim = elements.nrows();
        if elements.ncols() != dim || !dim.is_power_of_two() {
            return Err(StateError::DimensionMismatch(format!(
                "{}x{} is not a square power-of-two matrix",
                elements.nrows(),
                elements.ncols()
            )));
        }
        let mut herm = 0.0f64;
        let mut trace = ZERO;
        for i in 0..dim {
            trace += elements[(i, i)];
            for j in 0..dim {
                herm = herm.max((elements[(i, j)] - elements[(j, i)].conj()).norm());
            }
        }
        if herm > 1e-12 {
            return Err(StateError::DimensionMismatch(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        if (trace - ONE).norm() > 1e-12 {
            return Err(StateError::DimensionMismatch(format!(
                "trace {trace} is not 1"
            )));
        }
        let min_eig = SymmetricEigen::new(elements.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(StateError::DimensionMismatch(format!(
                "not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { dim, elements })
    }

    /// Wrap without validation. Only for matrices that are Hermitian PSD by
    /// construction (e.g. Gram products of unit-norm unfoldings).
    pub(crate) fn new_unchecked(elements: DMatrix<C64>) -> Self {
        Self {
            dim: elements.nrows(),
            elements,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &DMatrix<C64> {
        &self.elements
    }

    /// Real eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.elements.clone())
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        e.sort_by(|a, b| b.partial_cmp(a).unwrap());
        e
    }
}

/// Marginal of `state` on the `keep` qubits, computed as M·M† of the
/// unfolding; the 2^n x 2^n projector is never materialized.
pub fn reduced_density(state: &StateVector, keep: &QubitSet) -> Result<DensityMatrix, StateError> {
    if keep.is_empty() {
        return Err(StateError::EmptySet);
    }
    for &q in keep.members() {
        if q >= state.n {
            return Err(StateError::DimensionMismatch(format!(
                "qubit {q} out of range for {}-qubit state",
                state.n
            )));
        }
    }
    let m = unfold(state, keep);
    let rho = &m * m.adjoint();
    Ok(DensityMatrix::new_unchecked(rho))
}

/// Von Neumann entropy in bits: −Σ λ log2 λ with eigenvalues below 1e-12
/// clamped to zero (Gram products of near-product states produce tiny
/// negatives down to −1e-10, which are clamped too).
pub fn entropy(rho: &DensityMatrix) -> f64 {
    let mut s = 0.0;
    for lam in rho.eigenvalues() {
        if lam > 1e-12 {
            s -= lam * lam.log2();
        }
    }
    s
}

/// Singular values of the cut unfolding, descending. Their squares sum to 1.
pub fn schmidt_spectrum(state: &StateVector, cut: &QubitSet) -> Result<Vec<f64>, StateError> {
    if cut.is_empty() {
        return Err(StateError::EmptySet);
    }
    if cut.len() >= state.n {
        return Err(StateError::FullSet);
    }
    let m = unfold(state, cut);
    let svd = m.svd(false, false);
    let mut vals: Vec<f64> = svd.singular_values.iter().cloned().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

// ---------------------------------------------------------------------------
// BlockFactor and application
// ---------------------------------------------------------------------------

/// A unitary bound to an ordered list of qubits. Stored full-rank (square);
/// `svd_rank` records how many columns carry singular weight >= 1e-10 in the
/// unfolding the factor was extracted from, for downstream synthesis to
/// exploit.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFactor {
    qubits: QubitSet,
    matrix: DMatrix<C64>,
    svd_rank: usize,
}

impl BlockFactor {
    /// Build a factor, checking column orthonormality within 1e-10. A d×p
    /// column isometry (p < d) is completed to a d×d unitary by appending
    /// orthonormal basis-vector completions.
    pub fn new(qubits: QubitSet, matrix: DMatrix<C64>) -> Result<Self, StateError> {
        let d = 1usize << qubits.len();
        if matrix.nrows() != d || matrix.ncols() > d {
            return Err(StateError::DimensionMismatch(format!(
                "factor on {} qubits must be {d}x(<= {d}), got {}x{}",
                qubits.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if linalg::unitarity_defect(&matrix) > 1e-10 {
            return Err(StateError::DimensionMismatch(
                "factor columns are not orthonormal".into(),
            ));
        }
        let rank = matrix.ncols();
        let full = if rank < d {
            linalg::complete_to_unitary(&matrix)
        } else {
            matrix
        };
        Ok(Self {
            qubits,
            matrix: full,
            svd_rank: rank,
        })
    }

    pub(crate) fn new_unchecked(qubits: QubitSet, matrix: DMatrix<C64>, svd_rank: usize) -> Self {
        Self {
            qubits,
            matrix,
            svd_rank,
        }
    }

    pub fn qubits(&self) -> &QubitSet {
        &self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn svd_rank(&self) -> usize {
        self.svd_rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_identity_up_to_phase(&self, tol: f64) -> bool {
        linalg::is_identity_up_to_phase(&self.matrix, tol)
    }
}

fn apply_matrix(
    state: &StateVector,
    qubits: &QubitSet,
    w: &DMatrix<C64>,
    adjoint: bool,
) -> Result<StateVector, StateError> {
    let n = state.n;
    let k = qubits.len();
    for &q in qubits.members() {
        if q >= n {
            return Err(StateError::DimensionMismatch(format!(
                "factor qubit {q} out of range for {n}-qubit state"
            )));
        }
    }
    let d = 1usize << k;
    if w.nrows() != d || w.ncols() != d {
        return Err(StateError::DimensionMismatch(format!(
            "factor matrix is {}x{}, expected {d}x{d}",
            w.nrows(),
            w.ncols()
        )));
    }
    let (row_bits, col_bits) = unfold_shifts(n, qubits.members());
    // Scatter map: local row index -> global index contribution.
    let mut row_scatter = vec![0usize; d];
    for a in 0..d {
        let mut idx = 0usize;
        for &(src, dst) in &row_bits {
            idx |= ((a >> dst) & 1) << src;
        }
        row_scatter[a] = idx;
    }
    let cols = 1usize << (n - k);
    let mut col_scatter = vec![0usize; cols];
    for b in 0..cols {
        let mut idx = 0usize;
        for &(src, dst) in &col_bits {
            idx |= ((b >> dst) & 1) << src;
        }
        col_scatter[b] = idx;
    }
    let mut out = vec![ZERO; state.amps.len()];
    let mut vin = vec![ZERO; d];
    for &cbase in &col_scatter {
        for a in 0..d {
            vin[a] = state.amps[row_scatter[a] | cbase];
        }
        for p in 0..d {
            let mut acc = ZERO;
            if adjoint {
                for a in 0..d {
                    acc += w[(a, p)].conj() * vin[a];
                }
            } else {
                for a in 0..d {
                    acc += w[(p, a)] * vin[a];
                }
            }
            out[row_scatter[p] | cbase] = acc;
        }
    }
    StateVector {
        n,
        amps: out,
    }
    .renormalize_checked()
}

/// Contract W† against the factor's qubits: the core-extraction direction.
/// Norm is preserved within [`NORM_TOL`] for unitary factors.
pub fn apply_block_adjoint(
    state: &StateVector,
    factor: &BlockFactor,
) -> Result<StateVector, StateError> {
    apply_matrix(state, &factor.qubits, &factor.matrix, true)
}

/// Apply W on the factor's qubits: the state-preparation direction.
pub fn apply_block(state: &StateVector, factor: &BlockFactor) -> Result<StateVector, StateError> {
    apply_matrix(state, &factor.qubits, &factor.matrix, false)
}

/// Apply a raw unitary matrix on an ordered qubit list (used by the gate
/// simulator where no factor wrapper exists).
pub fn apply_unitary(
    state: &StateVector,
    qubits: &QubitSet,
    matrix: &DMatrix<C64>,
) -> Result<StateVector, StateError> {
    apply_matrix(state, qubits, matrix, false)
}

// ---------------------------------------------------------------------------
// Fast pairwise marginals (hot path for the correlation graph)
// ---------------------------------------------------------------------------

/// All one-qubit marginals as 2x2 row-major arrays, one pass per qubit.
pub(crate) fn single_marginals(state: &StateVector) -> Vec<[C64; 4]> {
    let n = state.n;
    let mut out = Vec::with_capacity(n);
    for q in 0..n {
        let shift = n - 1 - q;
        let mut rho = [ZERO; 4];
        for (idx, &a) in state.amps.iter().enumerate() {
            let b = (idx >> shift) & 1;
            // Diagonal now, off-diagonal below via pairing.
            rho[b * 2 + b] += a * a.conj();
        }
        // Off-diagonal <0|rho|1> = sum over rest of psi[0,rest] conj(psi[1,rest]).
        let mask = 1usize << shift;
        let mut off = ZERO;
        for idx in 0..state.amps.len() {
            if idx & mask == 0 {
                off += state.amps[idx] * state.amps[idx | mask].conj();
            }
        }
        rho[1] = off;
        rho[2] = off.conj();
        out.push(rho);
    }
    out
}

/// Two-qubit marginal on (i, j), i < j, as a 4x4 row-major array. One
/// permute pass into `scratch` (length 2^n) plus a Gram product.
pub(crate) fn pair_marginal(state: &StateVector, i: usize, j: usize, scratch: &mut [C64]) -> [C64; 16] {
    let n = state.n;
    debug_assert!(i < j && j < n);
    debug_assert_eq!(scratch.len(), state.amps.len());
    let si = n - 1 - i;
    let sj = n - 1 - j;
    let rest_dim = state.amps.len() >> 2;
    // Layout scratch as [a][rest] with a = 2*bit_i + bit_j.
    for (idx, &amp) in state.amps.iter().enumerate() {
        let bi = (idx >> si) & 1;
        let bj = (idx >> sj) & 1;
        // Remove bits si and sj from idx, compacting the rest. sj < si.
        let low = idx & ((1 << sj) - 1);
        let mid = (idx >> (sj + 1)) & ((1 << (si - sj - 1)) - 1);
        let high = idx >> (si + 1);
        let rest = (high << (si - 1)) | (mid << sj) | low;
        scratch[(bi * 2 + bj) * rest_dim + rest] = amp;
    }
    let mut rho = [ZERO; 16];
    for a in 0..4 {
        for b in a..4 {
            let mut acc = ZERO;
            let ra = &scratch[a * rest_dim..(a + 1) * rest_dim];
            let rb = &scratch[b * rest_dim..(b + 1) * rest_dim];
            for t in 0..rest_dim {
                acc += ra[t] * rb[t].conj();
            }
            rho[a * 4 + b] = acc;
            if a != b {
                rho[b * 4 + a] = acc.conj();
            }
        }
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn qs(members: &[usize], n: usize) -> QubitSet {
        QubitSet::new(members.to_vec(), n).unwrap()
    }

    /// Oracle: dense partial trace of |psi><psi| over the complement of
    /// `keep`, computed straight from the definition.
    fn partial_trace_dense(state: &StateVector, keep: &[usize]) -> DMatrix<C64> {
        let n = state.n();
        let k = keep.len();
        let d = 1usize << k;
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let mut rho = DMatrix::<C64>::zeros(d, d);
        let amp = |a: usize, r: usize| -> C64 {
            let mut idx = 0usize;
            for (t, &q) in keep.iter().enumerate() {
                idx |= ((a >> (k - 1 - t)) & 1) << (n - 1 - q);
            }
            for (t, &q) in rest.iter().enumerate() {
                idx |= ((r >> (rest.len() - 1 - t)) & 1) << (n - 1 - q);
            }
            state.amps()[idx]
        };
        for a in 0..d {
            for b in 0..d {
                let mut acc = ZERO;
                for r in 0..(1usize << rest.len()) {
                    acc += amp(a, r) * amp(b, r).conj();
                }
                rho[(a, b)] = acc;
            }
        }
        rho
    }

    #[test]
    fn normalize_scales_to_unit_norm() {
        let s = StateVector::normalize(vec![c(2.0, 0.0), ZERO, ZERO, ZERO]).unwrap();
        assert_eq!(s.n(), 2);
        assert!((s.amps()[0] - ONE).norm() < 1e-15);
    }

    #[test]
    fn normalize_symmetric_input() {
        let s = StateVector::normalize(vec![ONE; 4]).unwrap();
        for a in s.amps() {
            assert!((a - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn normalize_rejects_non_power_of_two_and_zero() {
        assert_eq!(
            StateVector::normalize(vec![ZERO, ZERO, ZERO]).unwrap_err(),
            StateError::NotPowerOfTwo(3)
        );
        assert_eq!(
            StateVector::normalize(vec![ZERO, ZERO]).unwrap_err(),
            StateError::ZeroVector
        );
    }

    #[test]
    fn big_endian_round_trip() {
        // Qubit 0 must be the most significant bit: |10> = index 2.
        let s = StateVector::basis(2, 0b10);
        let rho0 = reduced_density(&s, &qs(&[0], 2)).unwrap();
        assert!((rho0.elements()[(1, 1)] - ONE).norm() < 1e-15, "qubit 0 is |1>");
        let rho1 = reduced_density(&s, &qs(&[1], 2)).unwrap();
        assert!((rho1.elements()[(0, 0)] - ONE).norm() < 1e-15, "qubit 1 is |0>");
        // Unfold on {1} then refold matches the amplitude layout.
        let m = unfold(&s, &qs(&[1], 2));
        assert!((m[(0, 1)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let s = StateVector::random(3, &mut rng);
        assert!((fidelity(&s, &s).unwrap() - 1.0).abs() < 1e-12);

        let z = StateVector::basis(2, 0);
        let o = StateVector::basis(2, 3);
        assert_eq!(fidelity(&z, &o).unwrap(), 0.0);

        let bell = StateVector::ghz(2);
        assert!((fidelity(&bell, &z).unwrap() - 0.5).abs() < 1e-12);

        let a = StateVector::random(2, &mut rng);
        let b = StateVector::random(3, &mut rng);
        assert!(fidelity(&a, &b).is_err());
    }

    #[test]
    fn reduced_density_examples() {
        let s00 = StateVector::basis(2, 0);
        let rho = reduced_density(&s00, &qs(&[0], 2)).unwrap();
        assert!((rho.elements()[(0, 0)] - ONE).norm() < 1e-14);
        assert!(rho.elements()[(1, 1)].norm() < 1e-14);

        let bell = StateVector::ghz(2);
        let rho = reduced_density(&bell, &qs(&[0], 2)).unwrap();
        for i in 0..2 {
            assert!((rho.elements()[(i, i)] - c(0.5, 0.0)).norm() < 1e-14);
        }
        assert!(rho.elements()[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn reduced_density_ghz3_matches_dense_oracle() {
        let ghz = StateVector::ghz(3);
        let keep = [0usize, 1];
        let rho = reduced_density(&ghz, &qs(&keep, 3)).unwrap();
        let oracle = partial_trace_dense(&ghz, &keep);
        assert!(linalg::fro_dist(rho.elements(), &oracle) < 1e-12);
        // diag(0.5, 0, 0, 0.5)
        assert!((rho.elements()[(0, 0)] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((rho.elements()[(3, 3)] - c(0.5, 0.0)).norm() < 1e-14);
        assert!(rho.elements()[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn entropy_examples() {
        let pure = DensityMatrix::new(DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO])).unwrap();
        assert!(entropy(&pure).abs() < 1e-12);

        let mixed = DensityMatrix::new(DMatrix::from_diagonal_element(2, 2, c(0.5, 0.0))).unwrap();
        assert!((entropy(&mixed) - 1.0).abs() < 1e-12);

        let four = DensityMatrix::new(DMatrix::from_diagonal_element(4, 4, c(0.25, 0.0))).unwrap();
        assert!((entropy(&four) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn schmidt_examples() {
        let bell = StateVector::ghz(2);
        let sv = schmidt_spectrum(&bell, &qs(&[0], 2)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sv[0] - h).abs() < 1e-12 && (sv[1] - h).abs() < 1e-12);

        let prod = StateVector::basis(3, 5);
        let sv = schmidt_spectrum(&prod, &qs(&[1], 3)).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-12);
        assert!(sv[1].abs() < 1e-12);

        // GHZ4 across {0,1}|{2,3}: cross-check against the eigenvalues of the
        // dense partial trace.
        let ghz4 = StateVector::ghz(4);
        let sv = schmidt_spectrum(&ghz4, &qs(&[0, 1], 4)).unwrap();
        let rho = partial_trace_dense(&ghz4, &[0, 1]);
        let mut eigs: Vec<f64> = SymmetricEigen::new(rho).eigenvalues.iter().cloned().collect();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (s, e) in sv.iter().zip(eigs.iter()) {
            assert!((s * s - e.max(0.0)).abs() < 1e-12);
        }
        assert!((sv[0] - h).abs() < 1e-12);
        assert!(sv[2].abs() < 1e-12);
        let total: f64 = sv.iter().map(|s| s * s).sum();
        assert!((total - 1.0).abs() < 1e-10);

        assert_eq!(
            schmidt_spectrum(&bell, &qs(&[0, 1], 2)).unwrap_err(),
            StateError::FullSet
        );
    }

    #[test]
    fn apply_block_adjoint_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let s = StateVector::random(3, &mut rng);
        let id = BlockFactor::new(qs(&[1], 3), DMatrix::identity(2, 2)).unwrap();
        let out = apply_block_adjoint(&s, &id).unwrap();
        assert!(fidelity(&s, &out).unwrap() > 1.0 - 1e-12);

        // H† on qubit 0 of |+>|0> gives |00>.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus0 = StateVector::normalize(vec![c(h, 0.0), ZERO, c(h, 0.0), ZERO]).unwrap();
        let hadamard =
            DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]);
        let f = BlockFactor::new(qs(&[0], 2), hadamard).unwrap();
        let out = apply_block_adjoint(&plus0, &f).unwrap();
        assert!((out.amps()[0] - ONE).norm() < 1e-12);

        // A 2-qubit unitary whose first column is the Bell state pulls Bell
        // back to |00>; verified against direct dense matrix-vector.
        let bell = StateVector::ghz(2);
        let first = DMatrix::from_column_slice(4, 1, bell.amps());
        let w = linalg::complete_to_unitary(&first);
        let f = BlockFactor::new(qs(&[0, 1], 2), w.clone()).unwrap();
        let out = apply_block_adjoint(&bell, &f).unwrap();
        assert!((out.amps()[0].norm() - 1.0).abs() < 1e-12);
        // dense oracle: W† * bell
        let dense = w.adjoint() * DMatrix::from_column_slice(4, 1, bell.amps());
        for (a, b) in out.amps().iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn norm_preserved_for_200_random_factors() {
        let mut rng = ChaCha12Rng::seed_from_u64(40);
        for trial in 0..200 {
            let n = 2 + (trial % 4); // 2..=5 qubits
            let s = StateVector::random(n, &mut rng);
            let k = 1 + (trial % n.min(2));
            let q0 = trial % (n - k + 1);
            let block: Vec<usize> = (q0..q0 + k).collect();
            let u = random_unitary(1 << k, &mut rng);
            let f = BlockFactor::new(qs(&block, n), u).unwrap();
            let out = apply_block_adjoint(&s, &f).unwrap();
            assert!((out.norm_sqr() - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn marginal_consistency_on_random_states() {
        // Tracing j out of rho_{ij} must reproduce rho_i.
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for _ in 0..5 {
            let s = StateVector::random(6, &mut rng);
            for i in 0..6 {
                for j in 0..6 {
                    if i == j {
                        continue;
                    }
                    let rho_i = reduced_density(&s, &qs(&[i], 6)).unwrap();
                    let rho_ij = reduced_density(&s, &qs(&[i, j], 6)).unwrap();
                    let e = rho_ij.elements();
                    // i is the leading (most significant) index of the pair.
                    for a in 0..2 {
                        for b in 0..2 {
                            let traced = e[(a * 2, b * 2)] + e[(a * 2 + 1, b * 2 + 1)];
                            assert!((traced - rho_i.elements()[(a, b)]).norm() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn schmidt_bounds_product_overlap() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..50 {
            let s = StateVector::random(4, &mut rng);
            let cut = qs(&[0, 1], 4);
            let lam = schmidt_spectrum(&s, &cut).unwrap()[0];
            // Random product state across the cut.
            let a = StateVector::random(2, &mut rng);
            let b = StateVector::random(2, &mut rng);
            let mut prod = vec![ZERO; 16];
            for (ia, &va) in a.amps().iter().enumerate() {
                for (ib, &vb) in b.amps().iter().enumerate() {
                    prod[ia * 4 + ib] = va * vb;
                }
            }
            let p = StateVector::normalize(prod).unwrap();
            let overlap = p.inner(&s).unwrap().norm();
            assert!(overlap <= lam + 1e-10);
        }
    }

    #[test]
    fn entropy_within_bounds() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for _ in 0..20 {
            let s = StateVector::random(5, &mut rng);
            for k in 1..=2usize {
                let keep: Vec<usize> = (0..k).collect();
                let rho = reduced_density(&s, &qs(&keep, 5)).unwrap();
                let e = entropy(&rho);
                assert!(e >= -1e-12 && e <= k as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn fast_marginals_match_general_path() {
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        let s = StateVector::random(5, &mut rng);
        let singles = single_marginals(&s);
        for q in 0..5 {
            let rho = reduced_density(&s, &qs(&[q], 5)).unwrap();
            for a in 0..2 {
                for b in 0..2 {
                    assert!((singles[q][a * 2 + b] - rho.elements()[(a, b)]).norm() < 1e-12);
                }
            }
        }
        let mut scratch = vec![ZERO; s.dim()];
        for i in 0..5 {
            for j in (i + 1)..5 {
                let fast = pair_marginal(&s, i, j, &mut scratch);
                let rho = reduced_density(&s, &qs(&[i, j], 5)).unwrap();
                for a in 0..4 {
                    for b in 0..4 {
                        assert!((fast[a * 4 + b] - rho.elements()[(a, b)]).norm() < 1e-12);
                    }
                }
            }
        }
    }
}
