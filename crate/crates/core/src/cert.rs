//! Bell parameter, fidelity bounds, witness bounds and noise tolerance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::id::{IdError, IdTable};
use crate::pauli::{Letter, QubitSubset};
use crate::stabilizer::{joint_eigenprojector, StabilizerError};
use crate::state::StateError;

/// Largest register for the brute-force hidden-variable search.
pub const MAX_BRUTEFORCE_QUBITS: usize = 5;

const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertError {
    #[error("expected {expected} values, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("expectation {0} outside [-1, 1]")]
    OutOfRange(f64),
    #[error("the ID Bell inequality needs a whole negative ID")]
    NotWholeNegative,
    #[error("brute force limited to {MAX_BRUTEFORCE_QUBITS} qubits, got {0}")]
    TooManyQubits(usize),
    #[error("M must be at least 2, got {0}")]
    TooFewRows(usize),
    #[error("comparison needs M = N + 1 (M = {m}, N = {n})")]
    NotMinimal { m: usize, n: usize },
    #[error("analytic witness needs a one-dimensional eigenspace (rank {0})")]
    RankTooLarge(usize),
    #[error("gamma {gamma} outside [0, {m}]")]
    BadGamma { gamma: f64, m: usize },
    #[error("eigenspace rank must be at least 1")]
    BadRank,
    #[error(transparent)]
    Id(#[from] IdError),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// A number with a one-standard-deviation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub sigma: f64,
}

impl Measured {
    pub fn new(value: f64, sigma: f64) -> Self {
        Measured { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Measured { value, sigma: 0.0 }
    }
}

fn quadrature<'a>(sigmas: impl Iterator<Item = &'a f64>) -> f64 {
    sigmas.map(|s| s * s).sum::<f64>().sqrt()
}

fn check_range(values: &[Measured]) -> Result<(), CertError> {
    match values.iter().find(|v| v.value.is_nan() || v.value.abs() > 1.0 + RANGE_SLACK) {
        Some(v) => Err(CertError::OutOfRange(v.value)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellResult {
    pub m: usize,
    pub alpha_qm: f64,
    /// `M − 2`, only for whole negative IDs.
    pub alpha_lhvt: Option<f64>,
    pub alpha_exp: f64,
    pub sigma: f64,
    /// `(α − (M − 2))/σ`
    pub violation_sigmas: Option<f64>,
}

impl BellResult {
    pub fn violated(&self) -> bool {
        self.alpha_lhvt.is_some_and(|l| self.alpha_exp > l)
    }
}

/// `α = Σ λ_i ⟨O_i⟩` with errors added in quadrature.
pub fn bell_parameter(id: &IdTable, lambdas: &[i8], expectations: &[Measured]) -> Result<BellResult, CertError> {
    id.check_lambdas(lambdas)?;
    if expectations.len() != id.m() {
        return Err(CertError::WrongCount { expected: id.m(), got: expectations.len() });
    }
    check_range(expectations)?;
    let alpha: f64 = lambdas.iter().zip(expectations).map(|(&l, e)| l as f64 * e.value).sum();
    let sigma = quadrature(expectations.iter().map(|e| &e.sigma));
    Ok(bell_result(id, alpha, sigma))
}

/// Wraps an already computed `α ± σ`.
pub fn bell_result(id: &IdTable, alpha: f64, sigma: f64) -> BellResult {
    let m = id.m();
    let lhvt = lhvt_bound(id).ok();
    BellResult {
        m,
        alpha_qm: m as f64,
        alpha_lhvt: lhvt,
        alpha_exp: alpha,
        sigma,
        violation_sigmas: lhvt.filter(|_| sigma > 0.0).map(|l| (alpha - l) / sigma),
    }
}

/// `M − 2` for whole negative IDs.
pub fn lhvt_bound(id: &IdTable) -> Result<f64, CertError> {
    if id.is_whole() && id.is_negative() {
        Ok(id.m() as f64 - 2.0)
    } else {
        Err(CertError::NotWholeNegative)
    }
}

/// Largest `Σ λ_i ∏_q v_q(O_i)` over all `±1` assignments to the `3N`
/// single-qubit observables.
pub fn lhvt_max_bruteforce(id: &IdTable, lambdas: &[i8]) -> Result<f64, CertError> {
    let n = id.n_qubits();
    if n > MAX_BRUTEFORCE_QUBITS {
        return Err(CertError::TooManyQubits(n));
    }
    id.check_lambdas(lambdas)?;
    // each row becomes a mask over the 3N assignment bits plus a fixed sign
    let rows: Vec<(u32, i32)> = id
        .rows()
        .iter()
        .zip(lambdas)
        .map(|(r, &l)| {
            let mask = r
                .letters()
                .iter()
                .enumerate()
                .filter_map(|(q, letter)| letter.axis().map(|a| 1u32 << (3 * q + a)))
                .fold(0, |m, b| m | b);
            (mask, l as i32 * r.sign().unwrap_or(1) as i32)
        })
        .collect();
    let best = (0u32..1 << (3 * n))
        .map(|assign| {
            rows.iter()
                .map(|&(mask, s)| if (assign & mask).count_ones() % 2 == 1 { -s } else { s })
                .sum::<i32>()
        })
        .max()
        .unwrap_or(0);
    Ok(best as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMethod {
    Id,
    Gosg,
    Sg,
    WitnessRelation,
    Tomography,
}

/// A fidelity estimate or lower bound, reported unclamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityBound {
    pub method: FidelityMethod,
    pub value: f64,
    pub sigma: f64,
    /// `value` clipped to `[0, 1]`.
    pub clamped: f64,
}

impl FidelityBound {
    pub fn new(method: FidelityMethod, value: f64, sigma: f64) -> Self {
        FidelityBound { method, value, sigma, clamped: value.clamp(0.0, 1.0) }
    }
}

/// `F_ID = (α − M + 4)/4`
pub fn fidelity_bound_id(alpha: Measured, m: usize) -> Result<FidelityBound, CertError> {
    if m < 2 {
        return Err(CertError::TooFewRows(m));
    }
    Ok(FidelityBound::new(FidelityMethod::Id, (alpha.value - m as f64 + 4.0) / 4.0, alpha.sigma / 4.0))
}

/// `F_GoSG = (Σ a_n − N + 2)/2` from the `N` generator expectations.
pub fn fidelity_bound_gosg(generators: &[Measured]) -> Result<FidelityBound, CertError> {
    if generators.is_empty() {
        return Err(CertError::WrongCount { expected: 1, got: 0 });
    }
    check_range(generators)?;
    let n = generators.len() as f64;
    let sum: f64 = generators.iter().map(|a| a.value).sum();
    let sigma = quadrature(generators.iter().map(|a| &a.sigma)) / 2.0;
    Ok(FidelityBound::new(FidelityMethod::Gosg, (sum - n + 2.0) / 2.0, sigma))
}

/// Mean of all `2^N` stabilizer-group expectations (signs absorbed).
pub fn fidelity_sg(elements: &[Measured], n_qubits: usize) -> Result<FidelityBound, CertError> {
    let expected = 1usize << n_qubits;
    if elements.len() != expected {
        return Err(CertError::WrongCount { expected, got: elements.len() });
    }
    check_range(elements)?;
    let d = expected as f64;
    let mean = elements.iter().map(|e| e.value).sum::<f64>() / d;
    let sigma = quadrature(elements.iter().map(|e| &e.sigma)) / d;
    Ok(FidelityBound::new(FidelityMethod::Sg, mean, sigma))
}

/// `F_ID − F_GoSG` when one row of a minimal ID is left out of the generator set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdGosgComparison {
    pub dependent_row: usize,
    pub f_id: f64,
    pub f_gosg: f64,
    /// `[(a_M − 1) + (N − Σ a_n)]/4`
    pub difference: f64,
    /// Largest of `F_ID` and the `M` generator-set bounds.
    pub best_bound: f64,
    /// `None` when the best is `F_ID`, otherwise the left-out row.
    pub best_dependent_row: Option<usize>,
}

/// Compares the ID bound with the generator-set bound on `a_m = λ_m⟨O_m⟩`.
pub fn compare_id_gosg(a: &[f64], dependent_row: usize) -> Result<IdGosgComparison, CertError> {
    let m = a.len();
    if m < 3 || dependent_row >= m {
        return Err(CertError::WrongCount { expected: m.max(3), got: m });
    }
    let n = m - 1;
    let total: f64 = a.iter().sum();
    let f_id = (total - m as f64 + 4.0) / 4.0;
    let gosg = |d: usize| (total - a[d] - n as f64 + 2.0) / 2.0;
    let rest = total - a[dependent_row];
    let difference = ((a[dependent_row] - 1.0) + (n as f64 - rest)) / 4.0;
    let (best_dependent_row, best_bound) = (0..m).fold((None, f_id), |(bi, bv), d| {
        let v = gosg(d);
        if v > bv {
            (Some(d), v)
        } else {
            (bi, bv)
        }
    });
    Ok(IdGosgComparison {
        dependent_row,
        f_id,
        f_gosg: gosg(dependent_row),
        difference,
        best_bound,
        best_dependent_row,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSource {
    AnalyticBipartition,
    Numeric,
}

/// Upper bound on `α` over a class of states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessBound {
    pub class_label: String,
    pub gamma: f64,
    pub source: GammaSource,
    /// `(side, β)` per bipartition, analytic source only.
    pub betas: Vec<(String, f64)>,
}

/// `Γ = max_l (M − 4 + 4 max ν²)` over all bipartitions of the target eigenstate.
pub fn witness_gamma_analytic(id: &IdTable, lambdas: &[i8]) -> Result<WitnessBound, CertError> {
    id.check_lambdas(lambdas)?;
    let proj = joint_eigenprojector(id.rows(), lambdas)?;
    let target = proj.pure.ok_or(CertError::RankTooLarge(proj.rank))?;
    let m = id.m() as f64;
    let betas = QubitSubset::bipartitions(id.n_qubits())
        .map(|side| {
            let s = target.schmidt_spectrum(&side)?;
            Ok((side.to_string(), m - 4.0 + 4.0 * s.max_squared()))
        })
        .collect::<Result<Vec<_>, StateError>>()?;
    let gamma = betas.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(WitnessBound { class_label: "biseparable".into(), gamma, source: GammaSource::AnalyticBipartition, betas })
}

/// `⟨W⟩ = γ − α`; negative values exclude the class.
pub fn witness_value(gamma: f64, alpha: Measured) -> Measured {
    Measured::new(gamma - alpha.value, alpha.sigma)
}

/// `F_ID = (γ − ⟨W⟩ − M + 4)/4`
pub fn witness_fidelity_relation(gamma: f64, witness: f64, m: usize) -> f64 {
    (gamma - witness - m as f64 + 4.0) / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseTolerance {
    pub m: usize,
    pub gamma: f64,
    pub rank: usize,
    pub p_max: f64,
}

/// `p_max = r(M − γ)/(r(M − γ) + γ)`
pub fn noise_tolerance(m: usize, gamma: f64, rank: usize) -> Result<NoiseTolerance, CertError> {
    if !(0.0..=m as f64).contains(&gamma) {
        return Err(CertError::BadGamma { gamma, m });
    }
    if rank == 0 {
        return Err(CertError::BadRank);
    }
    let r = rank as f64;
    let num = r * (m as f64 - gamma);
    let p_max = if num + gamma == 0.0 { 1.0 } else { num / (num + gamma) };
    Ok(NoiseTolerance { m, gamma, rank, p_max })
}

/// `F_ID` at the hidden-variable limit `α = M − 2`, for any `M`.
pub fn min_nonlocal_fidelity() -> f64 {
    let m = 5;
    (m as f64 - 2.0 - m as f64 + 4.0) / 4.0
}

/// Analytic bound used for "other maximally entangled" four-qubit states.
pub const GAMMA_FOUR_QUBIT_OTHER: f64 = 4.0;

/// Letter-wise value of a deterministic assignment; exposed for tests.
pub fn assigned_value(row_letters: &[Letter], assignment: u32) -> i32 {
    row_letters
        .iter()
        .enumerate()
        .filter_map(|(q, l)| l.axis().map(|a| if assignment >> (3 * q + a) & 1 == 1 { -1 } else { 1 }))
        .product()
}

/// Report written by `certify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub state: String,
    pub id: IdSummary,
    pub alpha: AlphaSummary,
    pub fidelity: FidelitySummary,
    pub witnesses: Vec<WitnessSummary>,
    pub noise_tolerance: NoiseTolerance,
    pub min_settings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdSummary {
    pub label: String,
    pub rows: Vec<String>,
    pub lambdas: Vec<i8>,
    pub sign: i8,
    pub whole: bool,
    pub entangled: bool,
    pub critical: bool,
    pub eigenspace_rank: usize,
}

impl IdSummary {
    pub fn new(id: &IdTable, lambdas: &[i8]) -> Self {
        let c = id.classify();
        IdSummary {
            label: id.label(),
            rows: id.rows().iter().map(|r| r.to_string()).collect(),
            lambdas: lambdas.to_vec(),
            sign: id.sign(),
            whole: c.is_whole,
            entangled: c.is_entangled,
            critical: c.is_critical,
            eigenspace_rank: c.eigenspace_rank,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    pub qm: f64,
    pub lhvt: Option<f64>,
    pub exp: f64,
    pub sigma: f64,
    pub violation_sigmas: Option<f64>,
}

impl From<&BellResult> for AlphaSummary {
    fn from(b: &BellResult) -> Self {
        AlphaSummary {
            qm: b.alpha_qm,
            lhvt: b.alpha_lhvt,
            exp: b.alpha_exp,
            sigma: b.sigma,
            violation_sigmas: b.violation_sigmas,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelitySummary {
    pub id: FidelityBound,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gosg: Option<FidelityBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sg: Option<FidelityBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tomography: Option<FidelityBound>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub class: String,
    pub gamma: f64,
    pub source: GammaSource,
    pub value: f64,
    pub sigma: f64,
}

impl WitnessSummary {
    pub fn excluded(&self) -> bool {
        self.value < 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::QuantumState;
    use approx::assert_abs_diff_eq;

    fn ex(v: &[f64]) -> Vec<Measured> {
        v.iter().map(|&x| Measured::exact(x)).collect()
    }

    fn mermin() -> IdTable {
        IdTable::parse(&["XXX", "XYY", "YXY", "YYX"]).unwrap()
    }

    fn clin_w() -> IdTable {
        IdTable::parse(&["ZZII", "ZIXX", "IZYY", "YXXY", "YXYX"]).unwrap()
    }

    fn ghz4_p() -> IdTable {
        IdTable::parse(&["ZZII", "ZIZI", "IZIZ", "XYXY", "XYYX"]).unwrap()
    }

    const MERMIN_L: [i8; 4] = [1, -1, -1, -1];
    const CLIN_L: [i8; 5] = [1, 1, -1, 1, 1];
    const GHZ4_L: [i8; 5] = [1, 1, 1, -1, -1];

    #[test]
    fn bell_parameter_examples() {
        let g = [
            Measured::new(0.81, 0.07),
            Measured::new(-0.61, 0.09),
            Measured::new(-0.59, 0.09),
            Measured::new(-0.54, 0.10),
        ];
        let b = bell_parameter(&mermin(), &MERMIN_L, &g).unwrap();
        assert_abs_diff_eq!(b.alpha_exp, 2.55, epsilon = 1e-12);
        assert_eq!(b.alpha_lhvt, Some(2.0));
        assert!((b.violation_sigmas.unwrap() - 3.1).abs() < 0.05);
        let ideal = bell_parameter(&mermin(), &MERMIN_L, &ex(&[1.0, -1.0, -1.0, -1.0])).unwrap();
        assert_eq!(ideal.alpha_exp, 4.0);
        let c = bell_parameter(&clin_w(), &CLIN_L, &ex(&[0.93, 0.61, -0.58, 0.52, 0.60])).unwrap();
        assert_abs_diff_eq!(c.alpha_exp, 3.24, epsilon = 1e-12);
        assert!(bell_parameter(&mermin(), &MERMIN_L, &ex(&[1.0])).is_err());
        assert!(bell_parameter(&mermin(), &MERMIN_L, &ex(&[1.5, 0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn lhvt_examples() {
        assert_eq!(lhvt_bound(&clin_w()).unwrap(), 3.0);
        assert_eq!(lhvt_bound(&mermin()).unwrap(), 2.0);
        assert!(lhvt_bound(&ghz4_p()).is_err());
        assert_eq!(lhvt_max_bruteforce(&mermin(), &MERMIN_L).unwrap(), 2.0);
        assert_eq!(lhvt_max_bruteforce(&clin_w(), &CLIN_L).unwrap(), 3.0);
        assert_eq!(lhvt_max_bruteforce(&ghz4_p(), &GHZ4_L).unwrap(), 5.0);
        let mermin_row: Vec<_> = mermin().rows()[0].letters();
        assert_eq!(assigned_value(&mermin_row, 0), 1);
        assert_eq!(assigned_value(&mermin_row, 1), -1);
    }

    #[test]
    fn fidelity_examples() {
        assert_abs_diff_eq!(fidelity_bound_id(Measured::exact(3.24), 5).unwrap().value, 0.56, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity_bound_id(Measured::exact(2.55), 4).unwrap().value, 0.6375, epsilon = 1e-12);
        assert_eq!(fidelity_bound_id(Measured::exact(5.0), 5).unwrap().value, 1.0);
        let low = fidelity_bound_id(Measured::exact(0.0), 5).unwrap();
        assert_eq!((low.value, low.clamped), (-0.25, 0.0));
        assert_abs_diff_eq!(
            fidelity_bound_gosg(&ex(&[0.93, 0.78, 0.59, 0.66])).unwrap().value,
            0.48,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(fidelity_bound_gosg(&ex(&[0.61, 0.88, 0.81])).unwrap().value, 0.65, epsilon = 1e-12);
        assert_eq!(fidelity_bound_gosg(&ex(&[1.0; 4])).unwrap().value, 1.0);
        assert_eq!(fidelity_sg(&ex(&[1.0; 8]), 3).unwrap().value, 1.0);
        assert!(fidelity_sg(&ex(&[1.0; 7]), 3).is_err());
    }

    #[test]
    fn sg_fidelity_of_depolarized_state() {
        let st = QuantumState::c_lin();
        let group = crate::stabilizer::state_stabilizer(&st).unwrap();
        for p in [0.0, 0.2, 0.7] {
            let rho = st.depolarize(p).unwrap();
            let vals: Vec<_> =
                group.elements().iter().map(|e| Measured::exact(rho.expectation(e).unwrap())).collect();
            let f = fidelity_sg(&vals, 4).unwrap().value;
            assert_abs_diff_eq!(f, (1.0 - p) + p / 16.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn comparison_examples() {
        let a0 = 0.8;
        let c = compare_id_gosg(&[a0; 5], 4).unwrap();
        assert_abs_diff_eq!(c.difference, 3.0 * (1.0 - a0) / 4.0, epsilon = 1e-12);
        let c = compare_id_gosg(&[1.0, 1.0, 1.0, 1.0, 0.0], 4).unwrap();
        assert_abs_diff_eq!(c.f_id, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(c.f_gosg, 1.0, epsilon = 1e-12);
        assert_eq!(c.best_dependent_row, Some(4));
        assert_eq!(compare_id_gosg(&[1.0; 5], 0).unwrap().difference, 0.0);
    }

    #[test]
    fn analytic_gamma_examples() {
        let w = witness_gamma_analytic(&clin_w(), &CLIN_L).unwrap();
        assert_abs_diff_eq!(w.gamma, 3.0, epsilon = 1e-9);
        assert_eq!(w.betas.len(), 7);
        assert_abs_diff_eq!(witness_gamma_analytic(&mermin(), &MERMIN_L).unwrap().gamma, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(witness_gamma_analytic(&ghz4_p(), &GHZ4_L).unwrap().gamma, 3.0, epsilon = 1e-9);
        let partial = IdTable::parse(&["ZZI", "IZZ", "ZIZ"]).unwrap();
        assert!(matches!(witness_gamma_analytic(&partial, &[1, 1, 1]), Err(CertError::RankTooLarge(2))));
    }

    #[test]
    fn witness_examples() {
        assert_abs_diff_eq!(witness_value(3.0, Measured::exact(3.24)).value, -0.24, epsilon = 1e-12);
        assert_abs_diff_eq!(
            witness_value(GAMMA_FOUR_QUBIT_OTHER, Measured::exact(3.24)).value,
            0.76,
            epsilon = 1e-12
        );
        assert_eq!(witness_value(2.5, Measured::exact(2.5)).value, 0.0);
        assert_abs_diff_eq!(witness_fidelity_relation(3.0, -0.24, 5), 0.56, epsilon = 1e-12);
        assert_abs_diff_eq!(witness_fidelity_relation(2.0, -0.55, 4), 0.6375, epsilon = 1e-12);
        assert_eq!(witness_fidelity_relation(3.0, 3.0 - 5.0, 5), 1.0);
    }

    #[test]
    fn noise_tolerance_examples() {
        assert_abs_diff_eq!(noise_tolerance(5, 3.0, 1).unwrap().p_max, 0.4, epsilon = 1e-12);
        assert_eq!(noise_tolerance(4, 0.0, 1).unwrap().p_max, 1.0);
        assert_eq!(noise_tolerance(4, 4.0, 2).unwrap().p_max, 0.0);
        assert!(noise_tolerance(4, 4.5, 1).is_err());
        assert_eq!(min_nonlocal_fidelity(), 0.5);
        for m in 3..8 {
            let at = |alpha: f64| fidelity_bound_id(Measured::exact(alpha), m).unwrap().value;
            assert_eq!(at(m as f64 - 2.0), 0.5);
            assert_eq!(at(m as f64), 1.0);
            assert_eq!(at(m as f64 - 4.0), 0.0);
        }
    }

    #[test]
    fn other_eigenstates_score_at_most_m_minus_4() {
        for (id, target) in [(mermin(), MERMIN_L.to_vec()), (clin_w(), CLIN_L.to_vec()), (ghz4_p(), GHZ4_L.to_vec())] {
            let m = id.m();
            for code in 0u32..1 << m {
                let other: Vec<i8> = (0..m).map(|i| if code >> i & 1 == 1 { -1 } else { 1 }).collect();
                if other == target || id.check_lambdas(&other).is_err() {
                    continue;
                }
                let Ok(proj) = joint_eigenprojector(id.rows(), &other) else { continue };
                let alpha: f64 = id
                    .rows()
                    .iter()
                    .zip(&target)
                    .map(|(r, &l)| l as f64 * proj.state.expectation(r).unwrap())
                    .sum();
                assert!(alpha <= m as f64 - 4.0 + 1e-9);
            }
        }
    }

    #[test]
    fn depolarizing_sweep_matches_tolerance() {
        let id = clin_w();
        let st = joint_eigenprojector(id.rows(), &CLIN_L).unwrap().pure.unwrap();
        let p_max = noise_tolerance(5, 3.0, 1).unwrap().p_max;
        for i in 0..100 {
            let p = (i as f64 + 0.5) / 100.0;
            let rho = st.depolarize(p).unwrap();
            let vals: Vec<_> = id.rows().iter().map(|r| Measured::exact(rho.expectation(r).unwrap())).collect();
            let b = bell_parameter(&id, &CLIN_L, &vals).unwrap();
            assert_abs_diff_eq!(b.alpha_exp, 5.0 * (1.0 - p), epsilon = 1e-10);
            assert_eq!(witness_value(3.0, Measured::exact(b.alpha_exp)).value < 0.0, p < p_max);
            let f = fidelity_bound_id(Measured::exact(b.alpha_exp), 5).unwrap().value;
            assert!(f <= rho.fidelity(&st).unwrap() + 1e-9);
        }
    }
}
