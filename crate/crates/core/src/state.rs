//! Dense pure states and density matrices on a handful of qubits.
//!
//! Basis index convention: qubit 1 (index 0 in code) is the most significant
//! bit, so `|q1 q2 … qN⟩` reads left to right as a binary number.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::pauli::{PauliOperator, QubitSubset};

/// Tolerance for normalization, Hermiticity and other exact-arithmetic checks.
pub const EXACT_TOL: f64 = 1e-10;
/// Tolerance for unitarity of user supplied single-qubit matrices.
pub const UNITARY_TOL: f64 = 1e-8;
/// Largest register held as a dense vector or matrix.
pub const MAX_DENSE_QUBITS: usize = 10;

const EIGEN_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("{0} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}")]
    TooManyQubits(usize),
    #[error("state has no qubits")]
    NoQubits,
    #[error("length {0} is not a power of two")]
    BadDimension(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("density matrix is invalid: {0}")]
    InvalidDensity(String),
    #[error("state has {state} qubits but operand has {other}")]
    WidthMismatch { state: usize, other: usize },
    #[error("observable {0} is not Hermitian")]
    NonHermitian(String),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("matrix for qubit {0} is not unitary")]
    NotUnitary(usize),
    #[error("expected {expected} single-qubit unitaries, got {got}")]
    WrongUnitaryCount { expected: usize, got: usize },
    #[error("operation needs a pure state")]
    NotPure,
    #[error("bipartition must be a proper nonempty subset")]
    BadBipartition,
    #[error("unknown state name {0:?}")]
    UnknownName(String),
    #[error("invalid state parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Pure(DVector<Complex64>),
    Mixed(DMatrix<Complex64>),
}

/// A pure state vector or a density matrix on at most ten qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    repr: Repr,
}

fn qubits_for_len(len: usize) -> Result<usize, StateError> {
    if len < 2 || !len.is_power_of_two() {
        return Err(StateError::BadDimension(len));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_DENSE_QUBITS {
        return Err(StateError::TooManyQubits(n));
    }
    Ok(n)
}

fn check_qubits(n: usize) -> Result<(), StateError> {
    if n == 0 {
        Err(StateError::NoQubits)
    } else if n > MAX_DENSE_QUBITS {
        Err(StateError::TooManyQubits(n))
    } else {
        Ok(())
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `i^k`
pub(crate) fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Dense matrix of a Pauli operator in the basis convention of this module.
pub fn pauli_matrix(op: &PauliOperator) -> Result<DMatrix<Complex64>, StateError> {
    check_qubits(op.n_qubits())?;
    let dim = 1usize << op.n_qubits();
    let (xm, zm, phase) = op.index_masks();
    let coeff = i_pow(phase);
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let s = if (zm & b).count_ones() % 2 == 1 { -coeff } else { coeff };
        m[(b ^ xm, b)] = s;
    }
    Ok(m)
}

impl QuantumState {
    /// Pure state from amplitudes; must already be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let n = qubits_for_len(amplitudes.len())?;
        let v = DVector::from_vec(amplitudes);
        let norm2 = v.norm_squared();
        if (norm2 - 1.0).abs() > EXACT_TOL {
            return Err(StateError::NotNormalized(norm2));
        }
        Ok(QuantumState { n_qubits: n, repr: Repr::Pure(v) })
    }

    /// Pure state from unnormalized amplitudes.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let n = qubits_for_len(amplitudes.len())?;
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm < EXACT_TOL {
            return Err(StateError::NotNormalized(0.0));
        }
        Ok(QuantumState { n_qubits: n, repr: Repr::Pure(v / c(norm)) })
    }

    /// Density matrix; checked for Hermiticity, unit trace and positivity.
    pub fn from_density_matrix(rho: DMatrix<Complex64>) -> Result<Self, StateError> {
        if rho.nrows() != rho.ncols() {
            return Err(StateError::InvalidDensity("matrix is not square".into()));
        }
        let n = qubits_for_len(rho.nrows())?;
        let herm_err = max_abs(&(&rho - rho.adjoint()));
        if herm_err > EXACT_TOL {
            return Err(StateError::InvalidDensity(format!("not Hermitian ({herm_err:.2e})")));
        }
        let tr = rho.trace();
        if (tr - c(1.0)).norm() > EXACT_TOL {
            return Err(StateError::InvalidDensity(format!("trace {tr}")));
        }
        let min = min_eigenvalue(&rho);
        if min < EIGEN_FLOOR {
            return Err(StateError::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(QuantumState { n_qubits: n, repr: Repr::Mixed(rho) })
    }

    /// Computational basis state from a bitstring such as `"0101"`.
    pub fn basis(bits: &str) -> Result<Self, StateError> {
        let n = bits.len();
        check_qubits(n)?;
        let mut index = 0usize;
        for ch in bits.chars() {
            index <<= 1;
            match ch {
                '0' => {}
                '1' => index |= 1,
                _ => return Err(StateError::BadParameters(format!("bitstring {bits:?}"))),
            }
        }
        let mut amps = vec![c(0.0); 1 << n];
        amps[index] = c(1.0);
        Self::from_amplitudes(amps)
    }

    pub fn ghz(n: usize) -> Result<Self, StateError> {
        check_qubits(n)?;
        if n < 2 {
            return Err(StateError::BadParameters("GHZ needs at least two qubits".into()));
        }
        let mut amps = vec![c(0.0); 1 << n];
        amps[0] = c(FRAC_1_SQRT_2);
        amps[(1 << n) - 1] = c(FRAC_1_SQRT_2);
        Self::from_amplitudes(amps)
    }

    pub fn w(n: usize) -> Result<Self, StateError> {
        check_qubits(n)?;
        if n < 2 {
            return Err(StateError::BadParameters("W needs at least two qubits".into()));
        }
        let mut amps = vec![c(0.0); 1 << n];
        let a = 1.0 / (n as f64).sqrt();
        for q in 0..n {
            amps[1 << q] = c(a);
        }
        Self::from_amplitudes(amps)
    }

    fn four_qubit_cluster(indices: [usize; 3]) -> Self {
        let mut amps = vec![c(0.0); 16];
        amps[0] = c(0.5);
        amps[indices[0]] = c(0.5);
        amps[indices[1]] = c(0.5);
        amps[indices[2]] = c(-0.5);
        Self::from_amplitudes(amps).expect("normalized by construction")
    }

    /// `(|0000⟩+|0011⟩+|1100⟩−|1111⟩)/2`
    pub fn c_lin() -> Self {
        Self::four_qubit_cluster([0b0011, 0b1100, 0b1111])
    }

    /// `(|0000⟩+|0101⟩+|1010⟩−|1111⟩)/2`
    pub fn c_shear() -> Self {
        Self::four_qubit_cluster([0b0101, 0b1010, 0b1111])
    }

    /// `(|0000⟩+|0110⟩+|1001⟩−|1111⟩)/2`
    pub fn c_z() -> Self {
        Self::four_qubit_cluster([0b0110, 0b1001, 0b1111])
    }

    /// `|Φ⁺⟩` on each listed pair (zero-based), `|0⟩` on every other qubit.
    pub fn bell_product(n: usize, pairs: &[(usize, usize)]) -> Result<Self, StateError> {
        check_qubits(n)?;
        let bell = Self::ghz(2)?;
        let zero = Self::basis("0")?;
        let mut used = vec![false; n];
        let mut factors: Vec<(Vec<usize>, &QuantumState)> = Vec::new();
        for &(a, b) in pairs {
            if a >= n || b >= n || a == b || used[a] || used[b] {
                return Err(StateError::BadParameters(format!("bad pair ({}, {})", a + 1, b + 1)));
            }
            used[a] = true;
            used[b] = true;
            factors.push((vec![a, b], &bell));
        }
        for (q, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
            factors.push((vec![q], &zero));
        }
        let refs: Vec<(&[usize], &QuantumState)> =
            factors.iter().map(|(qs, s)| (qs.as_slice(), *s)).collect();
        Self::product_on(n, &refs)
    }

    /// Graph state: `|+⟩^⊗N` followed by controlled-Z on every edge.
    pub fn graph_state(graph: &Graph) -> Result<Self, StateError> {
        let n = graph.n_vertices();
        check_qubits(n)?;
        let edges = graph.edges();
        let amp = 1.0 / ((1usize << n) as f64).sqrt();
        let amps = (0..1usize << n)
            .map(|b| {
                let bit = |q: usize| b >> (n - 1 - q) & 1;
                let parity = edges.iter().map(|&(u, v)| bit(u) & bit(v)).sum::<usize>() % 2;
                c(if parity == 1 { -amp } else { amp })
            })
            .collect();
        Self::from_amplitudes(amps)
    }

    /// Tensor product of pure factors placed on the given (zero-based) qubits.
    /// Every qubit of the register must be covered exactly once.
    pub fn product_on(n: usize, factors: &[(&[usize], &QuantumState)]) -> Result<Self, StateError> {
        check_qubits(n)?;
        let mut seen = vec![false; n];
        for (qs, st) in factors {
            if qs.len() != st.n_qubits() {
                return Err(StateError::WidthMismatch { state: st.n_qubits(), other: qs.len() });
            }
            for &q in qs.iter() {
                if q >= n || seen[q] {
                    return Err(StateError::BadParameters(format!("qubit {} placed twice or out of range", q + 1)));
                }
                seen[q] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(StateError::BadParameters("factors do not cover every qubit".into()));
        }
        let amps_of: Vec<&DVector<Complex64>> = factors
            .iter()
            .map(|(_, st)| st.amplitudes().ok_or(StateError::NotPure))
            .collect::<Result<_, _>>()?;
        let amps = (0..1usize << n)
            .map(|b| {
                factors.iter().zip(&amps_of).fold(c(1.0), |acc, ((qs, _), a)| {
                    let k = qs.len();
                    let sub = qs
                        .iter()
                        .enumerate()
                        .fold(0usize, |s, (j, &q)| s | ((b >> (n - 1 - q) & 1) << (k - 1 - j)));
                    acc * a[sub]
                })
            })
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&DVector<Complex64>> {
        match &self.repr {
            Repr::Pure(v) => Some(v),
            Repr::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        match &self.repr {
            Repr::Pure(v) => v * v.adjoint(),
            Repr::Mixed(m) => m.clone(),
        }
    }

    fn check_width(&self, other: usize) -> Result<(), StateError> {
        if other != self.n_qubits {
            Err(StateError::WidthMismatch { state: self.n_qubits, other })
        } else {
            Ok(())
        }
    }

    /// `⟨P⟩`, real for Hermitian `P`.
    pub fn expectation(&self, obs: &PauliOperator) -> Result<f64, StateError> {
        self.check_width(obs.n_qubits())?;
        if !obs.is_hermitian() {
            return Err(StateError::NonHermitian(obs.to_string()));
        }
        let (xm, zm, phase) = obs.index_masks();
        let coeff = i_pow(phase);
        let sign = |b: usize| if (zm & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        let total: Complex64 = match &self.repr {
            Repr::Pure(v) => (0..self.dim()).map(|b| v[b ^ xm].conj() * v[b] * sign(b)).sum(),
            Repr::Mixed(m) => (0..self.dim()).map(|b| m[(b, b ^ xm)] * sign(b)).sum(),
        };
        Ok((total * coeff).re)
    }

    /// Overlap with a pure target: `|⟨t|ψ⟩|²` or `⟨t|ρ|t⟩`.
    pub fn fidelity(&self, target: &QuantumState) -> Result<f64, StateError> {
        self.check_width(target.n_qubits())?;
        let t = target.amplitudes().ok_or(StateError::NotPure)?;
        let f = match &self.repr {
            Repr::Pure(v) => t.dotc(v).norm_sqr(),
            Repr::Mixed(m) => t.dotc(&(m * t)).re,
        };
        Ok(f)
    }

    /// Singular values of the amplitude matrix reshaped across `(S, S̄)`,
    /// in descending order.
    pub fn schmidt_spectrum(&self, side: &QubitSubset) -> Result<SchmidtSpectrum, StateError> {
        let v = self.amplitudes().ok_or(StateError::NotPure)?;
        self.check_width(side.n_qubits())?;
        if side.is_empty() || side.len() == self.n_qubits {
            return Err(StateError::BadBipartition);
        }
        let n = self.n_qubits;
        let a_qubits = side.qubits();
        let b_qubits = side.complement().qubits();
        let sub_index = |b: usize, qs: &[usize]| {
            qs.iter().fold(0usize, |s, &q| (s << 1) | (b >> (n - 1 - q) & 1))
        };
        let mut m = DMatrix::zeros(1 << a_qubits.len(), 1 << b_qubits.len());
        for b in 0..self.dim() {
            m[(sub_index(b, &a_qubits), sub_index(b, &b_qubits))] = v[b];
        }
        let mut coefficients: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
        coefficients.sort_by(|a, b| b.total_cmp(a));
        Ok(SchmidtSpectrum { bipartition: *side, coefficients })
    }

    /// `p·I/2^N + (1−p)·ρ`
    pub fn depolarize(&self, p: f64) -> Result<QuantumState, StateError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(StateError::InvalidProbability(p));
        }
        let d = self.dim();
        let rho = self.density_matrix() * c(1.0 - p) + DMatrix::identity(d, d) * c(p / d as f64);
        Ok(QuantumState { n_qubits: self.n_qubits, repr: Repr::Mixed(rho) })
    }

    /// `(U₁ ⊗ … ⊗ U_N)` applied to the state.
    pub fn apply_local_unitaries(&self, unitaries: &[Matrix2<Complex64>]) -> Result<QuantumState, StateError> {
        if unitaries.len() != self.n_qubits {
            return Err(StateError::WrongUnitaryCount { expected: self.n_qubits, got: unitaries.len() });
        }
        for (q, u) in unitaries.iter().enumerate() {
            let err = max_abs(&(u.adjoint() * u - Matrix2::identity()));
            if err > UNITARY_TOL {
                return Err(StateError::NotUnitary(q));
            }
        }
        let n = self.n_qubits;
        let repr = match &self.repr {
            Repr::Pure(v) => {
                let mut out = v.clone();
                for (q, u) in unitaries.iter().enumerate() {
                    apply_single(out.as_mut_slice(), n, q, u);
                }
                Repr::Pure(out)
            }
            Repr::Mixed(m) => {
                // U ρ U† = (U (U ρ)†)†
                let mut a = m.clone();
                for _ in 0..2 {
                    for mut col in a.column_iter_mut() {
                        let slice = col.as_mut_slice();
                        for (q, u) in unitaries.iter().enumerate() {
                            apply_single(slice, n, q, u);
                        }
                    }
                    a = a.adjoint();
                }
                Repr::Mixed(a)
            }
        };
        Ok(QuantumState { n_qubits: n, repr })
    }
}

/// Applies a 2×2 matrix to qubit `q` of a length-`2^n` amplitude slice.
pub(crate) fn apply_single(v: &mut [Complex64], n: usize, q: usize, u: &Matrix2<Complex64>) {
    let bit = 1usize << (n - 1 - q);
    for b in 0..v.len() {
        if b & bit == 0 {
            let (a0, a1) = (v[b], v[b | bit]);
            v[b] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
            v[b | bit] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
        }
    }
}

/// Largest entry modulus of a complex matrix.
pub(crate) fn max_abs<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Complex64, R, C>>(
    m: &nalgebra::Matrix<Complex64, R, C, S>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Schmidt coefficients across one bipartition.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    pub bipartition: QubitSubset,
    /// Descending, `Σν² = 1`.
    pub coefficients: Vec<f64>,
}

impl SchmidtSpectrum {
    pub fn max_squared(&self) -> f64 {
        self.coefficients.first().map_or(0.0, |v| v * v)
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&v| v > tol).count()
    }
}

/// Common single-qubit gates.
pub mod gates {
    use super::*;

    pub fn identity() -> Matrix2<Complex64> {
        Matrix2::identity()
    }

    pub fn hadamard() -> Matrix2<Complex64> {
        let h = c(FRAC_1_SQRT_2);
        Matrix2::new(h, h, h, -h)
    }

    pub fn pauli_x() -> Matrix2<Complex64> {
        Matrix2::new(c(0.0), c(1.0), c(1.0), c(0.0))
    }

    pub fn s_dagger() -> Matrix2<Complex64> {
        Matrix2::new(c(1.0), c(0.0), c(0.0), Complex64::new(0.0, -1.0))
    }

    /// `Rz(a)·Ry(b)·Rz(c)` with `Rz(t) = diag(e^{-it/2}, e^{it/2})`.
    pub fn euler_zyz(a: f64, b: f64, cc: f64) -> Matrix2<Complex64> {
        let (sb, cb) = (b / 2.0).sin_cos();
        let plus = Complex64::from_polar(1.0, -(a + cc) / 2.0);
        let minus = Complex64::from_polar(1.0, -(a - cc) / 2.0);
        Matrix2::new(plus * cb, -minus * sb, minus.conj() * sb, plus.conj() * cb)
    }
}

/// Named states with fixed amplitude conventions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NamedState {
    Ghz(usize),
    W(usize),
    CLin,
    CShear,
    CZ,
    /// Register size and zero-based pairs carrying `|Φ⁺⟩`.
    BellProduct(usize, Vec<(usize, usize)>),
    Basis(String),
}

pub fn make_named_state(name: &NamedState) -> Result<QuantumState, StateError> {
    match name {
        NamedState::Ghz(n) => QuantumState::ghz(*n),
        NamedState::W(n) => QuantumState::w(*n),
        NamedState::CLin => Ok(QuantumState::c_lin()),
        NamedState::CShear => Ok(QuantumState::c_shear()),
        NamedState::CZ => Ok(QuantumState::c_z()),
        NamedState::BellProduct(n, pairs) => QuantumState::bell_product(*n, pairs),
        NamedState::Basis(bits) => QuantumState::basis(bits),
    }
}

/// State description file: a named state, a graph, or explicit amplitudes.
///
/// ```json
/// {"name": "ghz", "n": 3}
/// {"name": "bell_product", "n": 4, "pairs": [[1, 3], [2, 4]]}
/// {"graph": [[0, 1], [1, 0]]}
/// {"amplitudes": [[0.7071, 0], [0, 0], [0, 0], [0.7071, 0]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        /// One-based qubit pairs for `bell_product`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pairs: Option<Vec<[usize; 2]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bits: Option<String>,
    },
    Graph {
        graph: Graph,
    },
    Amplitudes {
        amplitudes: Vec<[f64; 2]>,
    },
}

impl StateSpec {
    pub fn named(name: &str, n: usize) -> Self {
        StateSpec::Named { name: name.to_string(), n: Some(n), pairs: None, bits: None }
    }

    pub fn to_named(&self) -> Result<Option<NamedState>, StateError> {
        let StateSpec::Named { name, n, pairs, bits } = self else {
            return Ok(None);
        };
        let need_n = || n.ok_or_else(|| StateError::BadParameters(format!("state {name:?} needs \"n\"")));
        let named = match name.to_ascii_lowercase().as_str() {
            "ghz" => NamedState::Ghz(need_n()?),
            "w" => NamedState::W(need_n()?),
            "c_lin" | "clin" => NamedState::CLin,
            "c_shear" | "cshear" => NamedState::CShear,
            "c_z" | "cz" => NamedState::CZ,
            "bell_product" => {
                let pairs = pairs
                    .as_ref()
                    .ok_or_else(|| StateError::BadParameters("bell_product needs \"pairs\"".into()))?
                    .iter()
                    .map(|&[a, b]| {
                        if a == 0 || b == 0 {
                            Err(StateError::BadParameters("qubits are numbered from 1".into()))
                        } else {
                            Ok((a - 1, b - 1))
                        }
                    })
                    .collect::<Result<_, _>>()?;
                NamedState::BellProduct(need_n()?, pairs)
            }
            "basis" => NamedState::Basis(
                bits.clone().ok_or_else(|| StateError::BadParameters("basis needs \"bits\"".into()))?,
            ),
            _ => return Err(StateError::UnknownName(name.clone())),
        };
        Ok(Some(named))
    }

    pub fn build(&self) -> Result<QuantumState, StateError> {
        match self {
            StateSpec::Named { .. } => make_named_state(&self.to_named()?.expect("named variant")),
            StateSpec::Graph { graph } => QuantumState::graph_state(graph),
            StateSpec::Amplitudes { amplitudes } => {
                QuantumState::normalized(amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            }
        }
    }

    /// Short human readable label.
    pub fn label(&self) -> String {
        match self {
            StateSpec::Named { name, n: Some(n), .. } => format!("{name}({n})"),
            StateSpec::Named { name, .. } => name.clone(),
            StateSpec::Graph { graph } => format!("graph({} vertices)", graph.n_vertices()),
            StateSpec::Amplitudes { amplitudes } => format!("amplitudes({})", amplitudes.len()),
        }
    }
}
