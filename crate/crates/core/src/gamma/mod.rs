//! Numerical upper bounds on `γ_C = max_{ψ∈C} ⟨α⟩` over local-unitary
//! orbits of seed states.
//!
//! The objective is `Σ_i |⟨O_i⟩|`, which dominates `|Σ λ_i ⟨O_i⟩|` at every
//! point, so each reported value bounds the class maximum of `α` from above
//! as far as the sampled starts reach.

mod catalog;
mod nelder_mead;

use std::f64::consts::TAU;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{four_qubit_catalog, resolve_catalog, CatalogEntry};
pub use nelder_mead::{nelder_mead_max, NelderMeadOptions, NelderMeadResult};

use crate::id::IdTable;
use crate::pauli::{Letter, PauliOperator};
use crate::state::{gates, QuantumState, StateError};

pub const DEFAULT_STARTS: usize = 400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GammaError {
    #[error("objective returned a non-finite value at {0:?}")]
    NonFinite(Vec<f64>),
    #[error("expected {expected} parameters, got {got}")]
    WrongParameterCount { expected: usize, got: usize },
    #[error("class seed has {seed} qubits but the ID has {id}")]
    WidthMismatch { seed: usize, id: usize },
    #[error("unknown state class {0:?}")]
    UnknownClass(String),
    #[error("at least one start is required")]
    NoStarts,
    #[error(transparent)]
    State(#[from] StateError),
}

/// A labelled seed whose local-unitary orbit forms the class.
#[derive(Debug, Clone, PartialEq)]
pub struct StateClass {
    pub label: String,
    pub seed: QuantumState,
}

impl StateClass {
    pub fn new(label: &str, seed: QuantumState) -> Self {
        StateClass { label: label.to_string(), seed }
    }
}

/// `(U₁ ⊗ … ⊗ U_N)|seed⟩` with `U_q = Rz(a)Ry(b)Rz(c)` from consecutive
/// parameter triples.
pub fn lu_orbit_state(seed: &QuantumState, params: &[f64]) -> Result<QuantumState, GammaError> {
    let n = seed.n_qubits();
    if params.len() != 3 * n {
        return Err(GammaError::WrongParameterCount { expected: 3 * n, got: params.len() });
    }
    let us: Vec<Matrix2<Complex64>> = params.chunks(3).map(|p| gates::euler_zyz(p[0], p[1], p[2])).collect();
    Ok(seed.apply_local_unitaries(&us)?)
}

/// `R_ab = ½ Tr(U† σ_a U σ_b)` for `a, b ∈ {X, Y, Z}`.
fn rotation(u: &Matrix2<Complex64>) -> [[f64; 3]; 3] {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let zero = Complex64::new(0.0, 0.0);
    let sigmas = [
        Matrix2::new(zero, one, one, zero),
        Matrix2::new(zero, -i, i, zero),
        Matrix2::new(one, zero, zero, -one),
    ];
    let mut r = [[0.0; 3]; 3];
    for (a, sa) in sigmas.iter().enumerate() {
        let m = u.adjoint() * sa * u;
        r[a][0] = (m[(0, 1)] + m[(1, 0)]).re / 2.0;
        r[a][1] = (i * (m[(0, 1)] - m[(1, 0)])).re / 2.0;
        r[a][2] = (m[(0, 0)] - m[(1, 1)]).re / 2.0;
    }
    r
}

/// `Σ_i |⟨O_i⟩|` on the orbit of one seed, evaluated through the seed's
/// Pauli correlation tensor and one 3×3 rotation per qubit.
#[derive(Debug, Clone)]
pub struct OrbitObjective {
    n: usize,
    /// `T[b]`, base-4 digits `b_q ∈ {I, X, Y, Z}`, qubit 1 most significant.
    tensor: Vec<f64>,
    /// Per row: sign, and (qubit, axis) for each non-identity letter.
    rows: Vec<(f64, Vec<(usize, usize)>)>,
}

impl OrbitObjective {
    pub fn new(rows: &[PauliOperator], seed: &QuantumState) -> Result<Self, GammaError> {
        let n = seed.n_qubits();
        if let Some(r) = rows.iter().find(|r| r.n_qubits() != n) {
            return Err(GammaError::WidthMismatch { seed: n, id: r.n_qubits() });
        }
        let letters = [Letter::I, Letter::X, Letter::Y, Letter::Z];
        let tensor = (0..1usize << (2 * n))
            .map(|b| {
                let ls: Vec<Letter> = (0..n).map(|q| letters[b >> (2 * (n - 1 - q)) & 3]).collect();
                let op = PauliOperator::from_letters(&ls, false).expect("width checked");
                seed.expectation(&op)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rows = rows
            .iter()
            .map(|r| {
                let support = (0..n).filter_map(|q| r.letter(q).axis().map(|a| (q, a))).collect();
                (r.sign().unwrap_or(1) as f64, support)
            })
            .collect();
        Ok(OrbitObjective { n, tensor, rows })
    }

    pub fn n_parameters(&self) -> usize {
        3 * self.n
    }

    /// `⟨O_i⟩` for every row at the given parameters.
    pub fn expectations(&self, params: &[f64]) -> Vec<f64> {
        let rot: Vec<[[f64; 3]; 3]> =
            params.chunks(3).map(|p| rotation(&gates::euler_zyz(p[0], p[1], p[2]))).collect();
        self.rows
            .iter()
            .map(|(sign, support)| {
                let k = support.len();
                let mut total = 0.0;
                // b runs over {X, Y, Z}^k on the support, identity elsewhere
                for code in 0..3usize.pow(k as u32) {
                    let mut c = code;
                    let mut coeff = 1.0;
                    let mut index = 0usize;
                    for &(q, a) in support.iter().rev() {
                        let b = c % 3;
                        c /= 3;
                        coeff *= rot[q][a][b];
                        index += (b + 1) << (2 * (self.n - 1 - q));
                    }
                    total += coeff * self.tensor[index];
                }
                sign * total
            })
            .collect()
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        self.expectations(params).iter().map(|v| v.abs()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaOptions {
    pub n_starts: usize,
    pub seed: u64,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions { n_starts: DEFAULT_STARTS, seed: 0, nelder_mead: NelderMeadOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub class_label: String,
    pub value: f64,
    pub best_parameters: Vec<f64>,
    pub n_starts: usize,
    pub n_converged: usize,
    /// Always `"sum-abs"`.
    pub objective: String,
}

/// Starting point of start `index`, independent of the total start count.
pub fn start_point(seed: u64, index: usize, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (0..dim).map(|_| rng.random_range(0.0..TAU)).collect()
}

/// Multistart maximization of `Σ|⟨O_i⟩|` over the orbit of `class`.
pub fn gamma_numeric(id: &IdTable, class: &StateClass, opts: &GammaOptions) -> Result<GammaEstimate, GammaError> {
    if opts.n_starts == 0 {
        return Err(GammaError::NoStarts);
    }
    if class.seed.n_qubits() != id.n_qubits() {
        return Err(GammaError::WidthMismatch { seed: class.seed.n_qubits(), id: id.n_qubits() });
    }
    let objective = OrbitObjective::new(id.rows(), &class.seed)?;
    let dim = objective.n_parameters();
    let runs = (0..opts.n_starts)
        .into_par_iter()
        .map(|i| {
            let x0 = start_point(opts.seed, i, dim);
            nelder_mead_max(|x| objective.value(x), &x0, opts.nelder_mead)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n_converged = runs.iter().filter(|r| r.converged).count();
    // first index wins ties, so the result does not depend on scheduling
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.f > a.f { b } else { a })
        .expect("at least one start");
    Ok(GammaEstimate {
        class_label: class.label.clone(),
        value: best.f,
        best_parameters: best.x,
        n_starts: opts.n_starts,
        n_converged,
        objective: "sum-abs".into(),
    })
}

/// [`gamma_numeric`] for each class, in catalog order.
pub fn gamma_table(id: &IdTable, classes: &[StateClass], opts: &GammaOptions) -> Result<Vec<GammaEstimate>, GammaError> {
    classes.iter().map(|c| gamma_numeric(id, c, opts)).collect()
}

/// Text table with values rounded to four decimals.
pub fn format_table(rows: &[GammaEstimate]) -> String {
    let width = rows.iter().map(|r| r.class_label.chars().count()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  gamma\n", "class");
    for r in rows {
        let pad = width - r.class_label.chars().count();
        out.push_str(&format!("{}{}  {:.4}\n", r.class_label, " ".repeat(pad), r.value));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn clin_w() -> IdTable {
        IdTable::parse(&["ZZII", "ZIXX", "IZYY", "YXXY", "YXYX"]).unwrap()
    }

    #[test]
    fn orbit_state_examples() {
        let seed = QuantumState::ghz(3).unwrap();
        assert_eq!(lu_orbit_state(&seed, &[0.0; 9]).unwrap(), seed);
        let path = QuantumState::graph_state(&Graph::path(4).unwrap()).unwrap();
        let h = [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI];
        let id = [0.0; 3];
        let params: Vec<f64> = [h, id, id, h].concat();
        let out = lu_orbit_state(&path, &params).unwrap();
        assert!((out.fidelity(&QuantumState::c_lin()).unwrap() - 1.0).abs() < 1e-12);
        assert!(lu_orbit_state(&seed, &[0.0; 3]).is_err());
    }

    #[test]
    fn fast_objective_matches_dense_orbit() {
        let rows = clin_w();
        for class in four_qubit_catalog() {
            let obj = OrbitObjective::new(rows.rows(), &class.seed).unwrap();
            for s in 0..5 {
                let x = start_point(99, s, 12);
                let dense = lu_orbit_state(&class.seed, &x).unwrap();
                for (fast, row) in obj.expectations(&x).iter().zip(rows.rows()) {
                    assert!((fast - dense.expectation(row).unwrap()).abs() < 1e-10, "{}", class.label);
                }
            }
        }
    }

    #[test]
    fn catalog_order_and_labels() {
        let labels: Vec<String> = four_qubit_catalog().into_iter().map(|c| c.label).collect();
        assert_eq!(labels.len(), 23);
        assert_eq!(labels[0], "ψ1ψ2ψ3ψ4");
        assert_eq!(labels[1], "ψ1ψ2Φ34");
        assert_eq!(labels[8], "Φ13Φ24");
        assert_eq!(labels[16], "ψ3W124");
        assert_eq!(labels[22], "C_lin");
    }

    #[test]
    fn target_class_reaches_m() {
        let opts = GammaOptions { n_starts: 20, seed: 1, ..Default::default() };
        let class = StateClass::new("C_lin", QuantumState::c_lin());
        let est = gamma_numeric(&clin_w(), &class, &opts).unwrap();
        assert!((est.value - 5.0).abs() < 1e-3);
        assert!(est.value <= 5.0 + 1e-9);
    }

    #[test]
    fn more_starts_never_lower() {
        let class = four_qubit_catalog().remove(0);
        let few = gamma_numeric(&clin_w(), &class, &GammaOptions { n_starts: 5, seed: 4, ..Default::default() }).unwrap();
        let many = gamma_numeric(&clin_w(), &class, &GammaOptions { n_starts: 20, seed: 4, ..Default::default() }).unwrap();
        assert!(many.value >= few.value - 1e-9);
    }

    #[test]
    fn objective_dominates_alpha() {
        let id = clin_w();
        let lambdas = [1.0, 1.0, -1.0, 1.0, 1.0];
        for class in four_qubit_catalog() {
            let obj = OrbitObjective::new(id.rows(), &class.seed).unwrap();
            let x = start_point(5, 0, 12);
            let e = obj.expectations(&x);
            let alpha: f64 = e.iter().zip(lambdas).map(|(v, l)| v * l).sum();
            assert!(obj.value(&x) >= alpha.abs() - 1e-12);
        }
    }

    #[test]
    fn clifford_relabeling_keeps_objective() {
        // H on qubit 1 swaps X and Z in column 1 of the rows and of the state
        let id = clin_w();
        let target = crate::stabilizer::joint_eigenprojector(id.rows(), &[1, 1, -1, 1, 1]).unwrap().pure.unwrap();
        let h = gates::hadamard();
        let i = gates::identity();
        let rotated_state = target.apply_local_unitaries(&[h, i, i, i]).unwrap();
        let swap = |l: Letter| match l {
            Letter::X => Letter::Z,
            Letter::Z => Letter::X,
            other => other,
        };
        let rotated_rows: Vec<PauliOperator> = id
            .rows()
            .iter()
            .map(|r| {
                let mut ls = r.letters();
                ls[0] = swap(ls[0]);
                PauliOperator::from_letters(&ls, false).unwrap()
            })
            .collect();
        let before = OrbitObjective::new(id.rows(), &target).unwrap().value(&[0.0; 12]);
        let after = OrbitObjective::new(&rotated_rows, &rotated_state).unwrap().value(&[0.0; 12]);
        assert!((before - 5.0).abs() < 1e-10);
        assert!((before - after).abs() < 1e-10);
    }
}
