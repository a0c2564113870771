//! Stabilizer groups and joint eigenspaces of commuting Pauli sets.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::pauli::{Letter, PauliError, PauliOperator};
use crate::state::{pauli_matrix, QuantumState, StateError};

/// Largest number of generators whose group is enumerated element by element.
pub const MAX_GENERATORS: usize = 20;
/// Largest register screened Pauli by Pauli in [`state_stabilizer`].
pub const MAX_SCREEN_QUBITS: usize = 6;

const SCREEN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilizerError {
    #[error("no generators given")]
    Empty,
    #[error("{0} is not Hermitian")]
    NonHermitian(String),
    #[error("generator {0} is proportional to the identity")]
    IdentityGenerator(String),
    #[error("{0} and {1} anticommute")]
    Anticommuting(String, String),
    #[error("generator {0} is a product of earlier generators")]
    Dependent(String),
    #[error("generators produce -I (inconsistent signs at {0})")]
    InconsistentSigns(String),
    #[error("{0} generators exceeds the enumeration limit of {MAX_GENERATORS}")]
    TooManyGenerators(usize),
    #[error("state is not a stabilizer state ({hits} of {expected} Paulis have expectation ±1)")]
    NotStabilizerState { hits: usize, expected: usize },
    #[error("screening needs at most {MAX_SCREEN_QUBITS} qubits, got {0}")]
    TooManyQubits(usize),
    #[error("eigenvalues must be ±1 and one per row ({rows} rows, {lambdas} eigenvalues)")]
    BadLambdas { rows: usize, lambdas: usize },
    #[error("the requested joint eigenspace is empty")]
    EmptyEigenspace,
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Gaussian elimination over GF(2) on `(x|z)` rows, remembering which
/// inputs were combined into each reduced row.
#[derive(Debug, Clone, Default)]
pub(crate) struct Gf2Basis {
    /// (row bits, pivot bit, combination mask over inserted rows)
    rows: Vec<(u128, u32, u64)>,
    inserted: usize,
}

pub(crate) fn symplectic_bits(op: &PauliOperator) -> u128 {
    (op.x_bits() as u128) | ((op.z_bits() as u128) << 64)
}

impl Gf2Basis {
    /// Reduces `bits`; returns the residual and the combination used.
    fn reduce(&self, mut bits: u128) -> (u128, u64) {
        let mut combo = 0u64;
        for &(row, pivot, c) in &self.rows {
            if bits >> pivot & 1 == 1 {
                bits ^= row;
                combo ^= c;
            }
        }
        (bits, combo)
    }

    /// Inserts a row. `Err(combo)` when it is a combination of earlier rows.
    pub(crate) fn insert(&mut self, bits: u128) -> Result<(), u64> {
        let index = self.inserted;
        let (residual, combo) = self.reduce(bits);
        if residual == 0 {
            return Err(combo);
        }
        self.inserted += 1;
        let pivot = 127 - residual.leading_zeros();
        let combo = combo | 1u64 << index;
        // keep the basis fully reduced on pivots
        for row in &mut self.rows {
            if row.0 >> pivot & 1 == 1 {
                row.0 ^= residual;
                row.2 ^= combo;
            }
        }
        self.rows.push((residual, pivot, combo));
        Ok(())
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Number of independent rows among `ops`, ignoring signs.
pub fn gf2_rank(ops: &[PauliOperator]) -> usize {
    let mut basis = Gf2Basis::default();
    for op in ops {
        let _ = basis.insert(symplectic_bits(op));
    }
    basis.rank()
}

/// All `2^k` signed products of `k` independent commuting generators.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerGroup {
    n_qubits: usize,
    generators: Vec<PauliOperator>,
    elements: Vec<PauliOperator>,
}

/// Group file: a list of signed generator strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupFile(pub Vec<PauliOperator>);

impl StabilizerGroup {
    pub fn from_generators(gens: &[PauliOperator]) -> Result<Self, StabilizerError> {
        let first = gens.first().ok_or(StabilizerError::Empty)?;
        let n = first.n_qubits();
        if gens.len() > MAX_GENERATORS {
            return Err(StabilizerError::TooManyGenerators(gens.len()));
        }
        let mut basis = Gf2Basis::default();
        for (i, g) in gens.iter().enumerate() {
            if g.n_qubits() != n {
                return Err(PauliError::WidthMismatch { left: n, right: g.n_qubits() }.into());
            }
            if !g.is_hermitian() {
                return Err(StabilizerError::NonHermitian(g.to_string()));
            }
            if g.is_identity() {
                return Err(StabilizerError::IdentityGenerator(g.to_string()));
            }
            if let Some(h) = gens[..i].iter().find(|h| !h.commutes_unchecked(g)) {
                return Err(StabilizerError::Anticommuting(h.to_string(), g.to_string()));
            }
            if let Err(combo) = basis.insert(symplectic_bits(g)) {
                let prod = (0..i)
                    .filter(|j| combo >> j & 1 == 1)
                    .fold(*g, |acc, j| acc.mul_unchecked(&gens[j]));
                return Err(if prod.sign() == Some(-1) {
                    StabilizerError::InconsistentSigns(g.to_string())
                } else {
                    StabilizerError::Dependent(g.to_string())
                });
            }
        }
        // Gray code: step i toggles generator trailing_zeros(i)
        let mut elements = Vec::with_capacity(1 << gens.len());
        let mut cur = PauliOperator::identity(n)?;
        elements.push(cur);
        for i in 1u64..1 << gens.len() {
            cur = cur.mul_unchecked(&gens[i.trailing_zeros() as usize]);
            elements.push(cur);
        }
        Ok(StabilizerGroup { n_qubits: n, generators: gens.to_vec(), elements })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    /// Elements in Gray-code order of generator subsets; the first is `+I`.
    pub fn elements(&self) -> &[PauliOperator] {
        &self.elements
    }

    /// Elements other than the identity, sorted by their letter strings.
    pub fn nonidentity_sorted(&self) -> Vec<PauliOperator> {
        let mut v: Vec<_> = self.elements.iter().filter(|e| !e.is_identity()).copied().collect();
        v.sort_by_cached_key(|e| e.structural().to_string());
        v
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Signed element with the same letters as `op`, if any.
    pub fn find(&self, op: &PauliOperator) -> Option<PauliOperator> {
        self.elements
            .iter()
            .find(|e| e.x_bits() == op.x_bits() && e.z_bits() == op.z_bits())
            .copied()
    }

    pub fn contains(&self, op: &PauliOperator) -> bool {
        self.find(op).is_some_and(|e| e.sign() == op.sign())
    }

    /// Two-column table: element, sign.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for e in self.nonidentity_sorted() {
            let sign = if e.is_negative() { '-' } else { '+' };
            out.push_str(&format!("{sign}  {}\n", e.structural()));
        }
        out
    }
}

/// `X_a ∏_{b ∈ N(a)} Z_b` for every vertex `a`.
pub fn graph_generators(graph: &Graph) -> Result<Vec<PauliOperator>, StabilizerError> {
    let n = graph.n_vertices();
    (0..n)
        .map(|a| Ok(PauliOperator::from_parts(n, 1 << a, graph.neighbors(a), 0)?))
        .collect()
}

pub fn graph_group(graph: &Graph) -> Result<StabilizerGroup, StabilizerError> {
    StabilizerGroup::from_generators(&graph_generators(graph)?)
}

/// Recovers the stabilizer group of a stabilizer state by screening all
/// `4^N` Pauli strings for expectation `±1`.
pub fn state_stabilizer(state: &QuantumState) -> Result<StabilizerGroup, StabilizerError> {
    let n = state.n_qubits();
    if n > MAX_SCREEN_QUBITS {
        return Err(StabilizerError::TooManyQubits(n));
    }
    let expected = 1usize << n;
    let mut hits = Vec::new();
    for code in 0u64..1 << (2 * n) {
        let letters: Vec<Letter> = (0..n)
            .map(|q| [Letter::I, Letter::X, Letter::Y, Letter::Z][(code >> (2 * q) & 3) as usize])
            .collect();
        let op = PauliOperator::from_letters(&letters, false)?;
        let e = state.expectation(&op)?;
        if (e - 1.0).abs() < SCREEN_TOL {
            hits.push(op);
        } else if (e + 1.0).abs() < SCREEN_TOL {
            hits.push(op.negated());
        }
    }
    if hits.len() != expected {
        return Err(StabilizerError::NotStabilizerState { hits: hits.len(), expected });
    }
    let mut basis = Gf2Basis::default();
    let gens: Vec<_> = hits
        .into_iter()
        .filter(|h| !h.is_identity() && basis.insert(symplectic_bits(h)).is_ok())
        .collect();
    StabilizerGroup::from_generators(&gens)
}

/// Projector onto a joint eigenspace, normalized to a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenProjection {
    /// `Π/rank`
    pub state: QuantumState,
    pub rank: usize,
    /// The eigenstate when the eigenspace is one dimensional, with its
    /// largest amplitude made real and positive.
    pub pure: Option<QuantumState>,
}

pub(crate) fn check_lambdas(rows: usize, lambdas: &[i8]) -> Result<(), StabilizerError> {
    if lambdas.len() != rows || lambdas.iter().any(|&l| l != 1 && l != -1) {
        return Err(StabilizerError::BadLambdas { rows, lambdas: lambdas.len() });
    }
    Ok(())
}

/// Dense `∏ (I + λ_i O_i)/2`.
pub fn joint_eigenprojector(rows: &[PauliOperator], lambdas: &[i8]) -> Result<EigenProjection, StabilizerError> {
    let first = rows.first().ok_or(StabilizerError::Empty)?;
    check_lambdas(rows.len(), lambdas)?;
    let n = first.n_qubits();
    let dim = 1usize << n;
    for (i, r) in rows.iter().enumerate() {
        if r.n_qubits() != n {
            return Err(PauliError::WidthMismatch { left: n, right: r.n_qubits() }.into());
        }
        if !r.is_hermitian() {
            return Err(StabilizerError::NonHermitian(r.to_string()));
        }
        if let Some(h) = rows[..i].iter().find(|h| !h.commutes_unchecked(r)) {
            return Err(StabilizerError::Anticommuting(h.to_string(), r.to_string()));
        }
    }
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let half = Complex64::new(0.5, 0.0);
    let mut proj = id.clone();
    for (r, &l) in rows.iter().zip(lambdas) {
        let o = pauli_matrix(r)? * Complex64::new(l as f64, 0.0);
        proj *= (&id + o) * half;
    }
    let trace = proj.trace().re;
    if trace < 0.5 {
        return Err(StabilizerError::EmptyEigenspace);
    }
    let rank = trace.round() as usize;
    let pure = if rank == 1 {
        let j = (0..dim).max_by(|&a, &b| proj[(a, a)].re.total_cmp(&proj[(b, b)].re)).unwrap_or(0);
        let col: Vec<Complex64> = proj.column(j).iter().copied().collect();
        let big = col.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(half);
        let phase = big.conj() / big.norm();
        Some(QuantumState::normalized(col.into_iter().map(|a| a * phase).collect())?)
    } else {
        None
    };
    let state = QuantumState::from_density_matrix(proj / Complex64::new(rank as f64, 0.0))?;
    Ok(EigenProjection { state, rank, pure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::parse_all;
    use rand::{Rng, SeedableRng};

    fn ops(s: &[&str]) -> Vec<PauliOperator> {
        parse_all(s).unwrap()
    }

    fn strings(g: &StabilizerGroup) -> Vec<String> {
        let mut v: Vec<String> = g.elements().iter().map(|e| e.to_string()).collect();
        v.sort();
        v
    }

    fn sorted(s: &[&str]) -> Vec<String> {
        let mut v: Vec<String> = s.iter().map(|x| x.to_string()).collect();
        v.sort();
        v
    }

    #[test]
    fn bell_group() {
        let g = StabilizerGroup::from_generators(&ops(&["XX", "ZZ"])).unwrap();
        assert_eq!(strings(&g), sorted(&["II", "XX", "ZZ", "-YY"]));
        assert_eq!(g.order(), 4);
    }

    #[test]
    fn rejects_bad_generators() {
        assert!(matches!(
            StabilizerGroup::from_generators(&ops(&["XI", "-XI"])),
            Err(StabilizerError::InconsistentSigns(_))
        ));
        assert!(matches!(
            StabilizerGroup::from_generators(&ops(&["XX", "ZZ", "-YY"])),
            Err(StabilizerError::Dependent(_))
        ));
        assert!(matches!(
            StabilizerGroup::from_generators(&ops(&["XX", "ZZ", "YY"])),
            Err(StabilizerError::InconsistentSigns(_))
        ));
        assert!(matches!(
            StabilizerGroup::from_generators(&ops(&["XI", "ZI"])),
            Err(StabilizerError::Anticommuting(..))
        ));
        assert!(matches!(
            StabilizerGroup::from_generators(&ops(&["-II"])),
            Err(StabilizerError::IdentityGenerator(_))
        ));
    }

    const CLIN_TABLE: [&str; 16] = [
        "ZZII", "IIZZ", "ZIXX", "IZXX", "-IZYY", "-ZIYY", "XXZI", "XXIZ", "-YYIZ", "-YYZI", "XYXY", "XYYX",
        "YXXY", "YXYX", "ZZZZ", "IIII",
    ];

    #[test]
    fn experimental_cluster_group_matches_table_signs() {
        let g = StabilizerGroup::from_generators(&ops(&["ZZII", "IIZZ", "-IZYY", "XXZI"])).unwrap();
        assert_eq!(strings(&g), sorted(&CLIN_TABLE));
        let from_state = state_stabilizer(&QuantumState::c_lin()).unwrap();
        assert_eq!(strings(&from_state), sorted(&CLIN_TABLE));
        for e in g.elements() {
            assert!((QuantumState::c_lin().expectation(e).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ghz_groups_from_screening() {
        let g3 = state_stabilizer(&QuantumState::ghz(3).unwrap()).unwrap();
        assert_eq!(g3.order(), 8);
        for s in ["XXX", "-XYY", "ZZI", "-YXY", "-YYX", "ZIZ", "IZZ"] {
            assert!(g3.contains(&PauliOperator::parse(s).unwrap()), "{s}");
        }
        let g4 = state_stabilizer(&QuantumState::ghz(4).unwrap()).unwrap();
        for s in ["-XXYY", "XXXX", "YYYY", "-XYXY", "ZZZZ", "ZIIZ"] {
            assert!(g4.contains(&PauliOperator::parse(s).unwrap()), "{s}");
        }
        assert!(matches!(
            state_stabilizer(&QuantumState::w(3).unwrap()),
            Err(StabilizerError::NotStabilizerState { .. })
        ));
    }

    #[test]
    fn graph_generator_examples() {
        let single = graph_generators(&Graph::empty(1).unwrap()).unwrap();
        assert_eq!(single[0].to_string(), "X");
        let edge = graph_generators(&Graph::path(2).unwrap()).unwrap();
        assert_eq!(edge.iter().map(|g| g.to_string()).collect::<Vec<_>>(), ["XZ", "ZX"]);
        for graph in [Graph::path(4).unwrap(), Graph::cycle(5).unwrap()] {
            let st = QuantumState::graph_state(&graph).unwrap();
            let group = graph_group(&graph).unwrap();
            assert_eq!(group.order(), 1 << graph.n_vertices());
            for e in group.elements() {
                assert!((st.expectation(e).unwrap() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigenprojector_examples() {
        let mermin = ops(&["XXX", "XYY", "YXY", "YYX"]);
        let proj = joint_eigenprojector(&mermin, &[1, -1, -1, -1]).unwrap();
        assert_eq!(proj.rank, 1);
        let ghz = QuantumState::ghz(3).unwrap();
        assert!((proj.pure.unwrap().fidelity(&ghz).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(joint_eigenprojector(&mermin, &[1, 1, 1, 1]), Err(StabilizerError::EmptyEigenspace));

        let g4 = state_stabilizer(&QuantumState::ghz(4).unwrap()).unwrap();
        let p4 = joint_eigenprojector(g4.generators(), &[1; 4]).unwrap();
        assert_eq!(p4.rank, 1);
        assert!((p4.pure.unwrap().fidelity(&QuantumState::ghz(4).unwrap()).unwrap() - 1.0).abs() < 1e-10);

        let two = joint_eigenprojector(&ops(&["ZZI"]), &[1]).unwrap();
        assert_eq!(two.rank, 4);
        assert!(two.pure.is_none());
        assert!(joint_eigenprojector(&ops(&["XI", "ZI"]), &[1, 1]).is_err());
        assert!(joint_eigenprojector(&ops(&["XI"]), &[2]).is_err());
    }

    #[test]
    fn group_properties_on_random_generators() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(1..=5usize);
            let graph = Graph::from_edges(
                n,
                &(0..n)
                    .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                    .filter(|_| rng.random_bool(0.5))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let k = rng.random_range(1..=n);
            let signs: Vec<bool> = (0..k).map(|_| rng.random_bool(0.5)).collect();
            let gens: Vec<_> = graph_generators(&graph).unwrap()[..k]
                .iter()
                .zip(&signs)
                .map(|(g, &s)| g.with_sign(s))
                .collect();
            let group = StabilizerGroup::from_generators(&gens).unwrap();
            assert_eq!(group.order(), 1 << k);
            let mut names: Vec<_> = group.elements().iter().map(|e| e.structural().to_string()).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), 1 << k);
            for a in group.elements() {
                assert!(a.mul_unchecked(a).is_identity() && a.mul_unchecked(a).sign() == Some(1));
                for b in group.elements() {
                    assert!(a.commutes_unchecked(b));
                    assert!(group.contains(&a.mul_unchecked(b)));
                }
            }
            let lambdas = vec![1i8; k];
            let proj = joint_eigenprojector(&gens, &lambdas).unwrap();
            assert_eq!(proj.rank, 1 << (n - k));
            let eig = proj.state.density_matrix().symmetric_eigenvalues();
            let nonzero = eig.iter().filter(|v| **v > 1e-9).count();
            assert_eq!(nonzero, 1 << (n - k));
        }
    }
}
