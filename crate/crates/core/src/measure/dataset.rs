//! Count datasets and expectation tables.
//!
//! Outcome strings list one bit per qubit, qubit 1 first; bit `0` means the
//! `+1` eigenstate of that qubit's measurement basis.

use std::collections::BTreeMap;
use std::io::Read;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MeasureError;
use crate::cert::Measured;
use crate::pauli::{Letter, PauliOperator};
use crate::state::QuantumState;

pub const DEFAULT_MC_CYCLES: usize = 100;

/// Counts for one local measurement setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub setting: String,
    pub counts: BTreeMap<String, u64>,
    #[serde(default, rename = "seconds", skip_serializing_if = "Option::is_none")]
    pub acquisition_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DatasetFile {
    n: usize,
    records: Vec<CountsRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
struct Record {
    setting: String,
    letters: Vec<Letter>,
    /// Indexed by outcome, qubit 1 most significant.
    counts: Vec<u64>,
    total: u64,
    seconds: Option<f64>,
}

/// Coincidence counts for a set of distinct local settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentDataset {
    n_qubits: usize,
    records: Vec<Record>,
    provenance: Option<String>,
}

fn parse_setting(n: usize, setting: &str) -> Result<Vec<Letter>, MeasureError> {
    let letters: Vec<Letter> = setting.chars().filter_map(Letter::from_char).collect();
    if letters.len() != n || setting.chars().count() != n || letters.contains(&Letter::I) {
        return Err(MeasureError::BadSetting(setting.to_string()));
    }
    Ok(letters)
}

fn parse_outcome(n: usize, outcome: &str) -> Result<usize, MeasureError> {
    if outcome.len() != n || !outcome.chars().all(|c| c == '0' || c == '1') {
        return Err(MeasureError::BadOutcome(outcome.to_string()));
    }
    Ok(usize::from_str_radix(outcome, 2).expect("checked bitstring"))
}

fn outcome_string(n: usize, b: usize) -> String {
    format!("{b:0n$b}")
}

impl ExperimentDataset {
    /// Validates records and merges repeated settings by summing counts.
    pub fn new(n_qubits: usize, records: Vec<CountsRecord>, provenance: Option<String>) -> Result<Self, MeasureError> {
        if n_qubits == 0 || n_qubits > crate::state::MAX_DENSE_QUBITS {
            return Err(MeasureError::Invalid(format!("unsupported qubit count {n_qubits}")));
        }
        let mut merged: Vec<Record> = Vec::new();
        for rec in records {
            let letters = parse_setting(n_qubits, &rec.setting)?;
            let mut counts = vec![0u64; 1 << n_qubits];
            for (outcome, &c) in &rec.counts {
                counts[parse_outcome(n_qubits, outcome)?] += c;
            }
            match merged.iter_mut().find(|r| r.setting == rec.setting) {
                Some(existing) => {
                    for (a, b) in existing.counts.iter_mut().zip(&counts) {
                        *a += b;
                    }
                    existing.total = existing.counts.iter().sum();
                    existing.seconds = match (existing.seconds, rec.acquisition_seconds) {
                        (Some(a), Some(b)) => Some(a + b),
                        (a, b) => a.or(b),
                    };
                }
                None => merged.push(Record {
                    setting: rec.setting.clone(),
                    letters,
                    total: counts.iter().sum(),
                    counts,
                    seconds: rec.acquisition_seconds,
                }),
            }
        }
        if let Some(r) = merged.iter().find(|r| r.total == 0) {
            return Err(MeasureError::EmptyRecord(r.setting.clone()));
        }
        Ok(ExperimentDataset { n_qubits, records: merged, provenance })
    }

    /// Builds a dataset from dense count vectors (outcome index, qubit 1 most significant).
    pub fn from_dense(n_qubits: usize, data: Vec<(String, Vec<u64>)>, provenance: Option<String>) -> Result<Self, MeasureError> {
        let records = data
            .into_iter()
            .map(|(setting, counts)| CountsRecord {
                setting,
                counts: counts
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c > 0)
                    .map(|(b, &c)| (outcome_string(n_qubits, b), c))
                    .collect(),
                acquisition_seconds: None,
            })
            .collect();
        Self::new(n_qubits, records, provenance)
    }

    pub fn from_json(text: &str) -> Result<Self, MeasureError> {
        let file: DatasetFile = serde_json::from_str(text)?;
        Self::new(file.n, file.records, file.provenance)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("dataset serializes")
    }

    fn to_file(&self) -> DatasetFile {
        DatasetFile { n: self.n_qubits, records: self.records(), provenance: self.provenance.clone() }
    }

    /// Reads `setting,outcome,count` rows with a header line.
    pub fn from_csv<R: Read>(n_qubits: usize, reader: R) -> Result<Self, MeasureError> {
        #[derive(Deserialize)]
        struct Row {
            setting: String,
            outcome: String,
            count: u64,
        }
        let mut by_setting: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        let mut order: Vec<String> = Vec::new();
        for row in csv::Reader::from_reader(reader).deserialize() {
            let row: Row = row?;
            if !by_setting.contains_key(&row.setting) {
                order.push(row.setting.clone());
            }
            *by_setting.entry(row.setting).or_default().entry(row.outcome).or_default() += row.count;
        }
        let records = order
            .into_iter()
            .map(|s| CountsRecord { counts: by_setting.remove(&s).unwrap_or_default(), setting: s, acquisition_seconds: None })
            .collect();
        Self::new(n_qubits, records, Some("csv import".into()))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn settings(&self) -> Vec<String> {
        self.records.iter().map(|r| r.setting.clone()).collect()
    }

    pub fn records(&self) -> Vec<CountsRecord> {
        self.records
            .iter()
            .map(|r| CountsRecord {
                setting: r.setting.clone(),
                counts: r
                    .counts
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c > 0)
                    .map(|(b, &c)| (outcome_string(self.n_qubits, b), c))
                    .collect(),
                acquisition_seconds: r.seconds,
            })
            .collect()
    }

    pub fn total_counts(&self) -> u64 {
        self.records.iter().map(|r| r.total).sum()
    }

    pub fn has_setting(&self, setting: &str) -> bool {
        self.records.iter().any(|r| r.setting == setting)
    }

    fn check_width(&self, obs: &PauliOperator) -> Result<(), MeasureError> {
        if obs.n_qubits() != self.n_qubits {
            return Err(MeasureError::WidthMismatch { dataset: self.n_qubits, other: obs.n_qubits() });
        }
        Ok(())
    }

    fn compatible<'a>(&'a self, obs: &'a PauliOperator) -> impl Iterator<Item = &'a Record> + 'a {
        let letters = obs.letters();
        self.records
            .iter()
            .filter(move |r| letters.iter().zip(&r.letters).all(|(l, s)| *l == Letter::I || l == s))
    }

    /// Count-weighted `⟨obs⟩` and the number of counts behind it.
    fn estimate(&self, obs: &PauliOperator) -> Result<(f64, u64), MeasureError> {
        self.check_width(obs)?;
        let (xm, zm, _) = obs.index_masks();
        let mask = xm | zm;
        let (mut num, mut den) = (0i128, 0u64);
        for r in self.compatible(obs) {
            for (b, &c) in r.counts.iter().enumerate() {
                if (b & mask).count_ones() % 2 == 0 {
                    num += c as i128;
                } else {
                    num -= c as i128;
                }
            }
            den += r.total;
        }
        if den == 0 {
            let pattern: String =
                obs.letters().iter().map(|l| if *l == Letter::I { '*' } else { l.as_char() }).collect();
            return Err(MeasureError::Unmeasurable { obs: obs.to_string(), pattern });
        }
        let sign = obs.sign().unwrap_or(1) as f64;
        Ok((sign * num as f64 / den as f64, den))
    }

    /// Each count replaced by a Poisson draw with that mean.
    fn resampled(&self, rng: &mut ChaCha8Rng) -> ExperimentDataset {
        let records = self
            .records
            .iter()
            .map(|r| {
                let counts: Vec<u64> = r
                    .counts
                    .iter()
                    .map(|&c| if c == 0 { 0 } else { Poisson::new(c as f64).expect("positive mean").sample(rng) as u64 })
                    .collect();
                Record { total: counts.iter().sum(), counts, ..r.clone() }
            })
            .collect();
        ExperimentDataset { records, ..self.clone() }
    }
}

/// `⟨obs⟩` averaged over every compatible setting, weighted by counts.
pub fn expectation_value(dataset: &ExperimentDataset, obs: &PauliOperator) -> Result<f64, MeasureError> {
    Ok(dataset.estimate(obs)?.0)
}

/// How to attach an error bar to a count-based estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorModel {
    PoissonMc { cycles: usize, seed: u64 },
    /// `sqrt((1 − E²)/N)`, for quick runs.
    Binomial,
}

impl ErrorModel {
    pub fn label(&self) -> &'static str {
        match self {
            ErrorModel::PoissonMc { .. } => "poisson-mc",
            ErrorModel::Binomial => "binomial",
        }
    }
}

pub fn expectation_from_counts(
    dataset: &ExperimentDataset,
    obs: &PauliOperator,
    model: ErrorModel,
) -> Result<Measured, MeasureError> {
    let (value, n) = dataset.estimate(obs)?;
    let sigma = match model {
        ErrorModel::Binomial => ((1.0 - value * value).max(0.0) / n as f64).sqrt(),
        ErrorModel::PoissonMc { cycles, seed } => poisson_mc(dataset, |d| expectation_value(d, obs), cycles, seed)?.sigma,
    };
    Ok(Measured::new(value, sigma))
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSigma {
    pub sigma: f64,
    pub cycles_used: usize,
    pub warning: Option<String>,
}

/// Sample standard deviation of `functional` over Poisson-resampled
/// copies of the dataset. Cycles where the functional fails are skipped.
pub fn poisson_mc<F>(dataset: &ExperimentDataset, functional: F, cycles: usize, seed: u64) -> Result<McSigma, MeasureError>
where
    F: Fn(&ExperimentDataset) -> Result<f64, MeasureError> + Sync,
{
    let values: Vec<f64> = (0..cycles)
        .into_par_iter()
        .filter_map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            functional(&dataset.resampled(&mut rng)).ok()
        })
        .collect();
    let used = values.len();
    if used < 2 {
        return Ok(McSigma {
            sigma: 0.0,
            cycles_used: used,
            warning: Some(format!("only {used} Monte Carlo cycle(s); error bar is degenerate")),
        });
    }
    let mean = values.iter().sum::<f64>() / used as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (used - 1) as f64;
    let warning = (used < cycles).then(|| format!("{} of {cycles} Monte Carlo cycles failed", cycles - used));
    Ok(McSigma { sigma: var.sqrt(), cycles_used: used, warning })
}

/// A published expectation table used in place of counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactEntry {
    pub op: PauliOperator,
    pub value: f64,
    #[serde(default)]
    pub sigma: f64,
}

/// Expectation-table dataset:
/// `{"n": 4, "expectations": [{"op": "-IZYY", "value": 0.58, "sigma": 0.02}], "alpha_sigma": 0.05, "gosg": ["ZZII", …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDataset {
    pub n: usize,
    pub expectations: Vec<ExactEntry>,
    /// Overrides the quadrature error of `α`, for published totals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_sigma: Option<f64>,
    /// Generator set used for the generator-set fidelity bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gosg: Option<Vec<PauliOperator>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl ExactDataset {
    pub fn from_json(text: &str) -> Result<Self, MeasureError> {
        let d: ExactDataset = serde_json::from_str(text)?;
        if let Some(e) = d.expectations.iter().find(|e| e.op.n_qubits() != d.n) {
            return Err(MeasureError::WidthMismatch { dataset: d.n, other: e.op.n_qubits() });
        }
        Ok(d)
    }
}

/// Anything that can report `⟨obs⟩ ± σ`.
pub trait ExpectationSource: Sync {
    fn n_qubits(&self) -> usize;
    fn expectation(&self, obs: &PauliOperator) -> Result<Measured, MeasureError>;
    /// Error of `Σ c_i ⟨O_i⟩`; quadrature unless the source knows better.
    fn combination_sigma(&self, terms: &[(f64, PauliOperator)]) -> Result<f64, MeasureError> {
        let mut var = 0.0;
        for (c, op) in terms {
            let s = self.expectation(op)?.sigma;
            var += (c * s).powi(2);
        }
        Ok(var.sqrt())
    }
    fn alpha_sigma_override(&self) -> Option<f64> {
        None
    }
    fn gosg(&self) -> Option<Vec<PauliOperator>> {
        None
    }
    fn counts(&self) -> Option<&ExperimentDataset> {
        None
    }
    fn label(&self) -> String;
}

impl ExpectationSource for ExactDataset {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn expectation(&self, obs: &PauliOperator) -> Result<Measured, MeasureError> {
        if obs.is_identity() {
            return Ok(Measured::exact(obs.sign().unwrap_or(1) as f64));
        }
        let entry = self
            .expectations
            .iter()
            .find(|e| e.op.x_bits() == obs.x_bits() && e.op.z_bits() == obs.z_bits())
            .ok_or_else(|| MeasureError::Unmeasurable { obs: obs.to_string(), pattern: obs.structural().to_string() })?;
        let flip = entry.op.sign().unwrap_or(1) * obs.sign().unwrap_or(1);
        Ok(Measured::new(flip as f64 * entry.value, entry.sigma))
    }

    fn alpha_sigma_override(&self) -> Option<f64> {
        self.alpha_sigma
    }

    fn gosg(&self) -> Option<Vec<PauliOperator>> {
        self.gosg.clone()
    }

    fn label(&self) -> String {
        "expectation table".into()
    }
}

/// Exact expectations of a known state, with zero error.
impl ExpectationSource for QuantumState {
    fn n_qubits(&self) -> usize {
        QuantumState::n_qubits(self)
    }

    fn expectation(&self, obs: &PauliOperator) -> Result<Measured, MeasureError> {
        Ok(Measured::exact(QuantumState::expectation(self, obs)?))
    }

    fn label(&self) -> String {
        "exact state".into()
    }
}

/// A count dataset with an error model.
pub struct CountsSource<'a> {
    pub dataset: &'a ExperimentDataset,
    pub model: ErrorModel,
}

impl ExpectationSource for CountsSource<'_> {
    fn n_qubits(&self) -> usize {
        self.dataset.n_qubits()
    }

    fn expectation(&self, obs: &PauliOperator) -> Result<Measured, MeasureError> {
        expectation_from_counts(self.dataset, obs, self.model)
    }

    fn combination_sigma(&self, terms: &[(f64, PauliOperator)]) -> Result<f64, MeasureError> {
        match self.model {
            ErrorModel::Binomial => {
                let mut var = 0.0;
                for (c, op) in terms {
                    var += (c * expectation_from_counts(self.dataset, op, ErrorModel::Binomial)?.sigma).powi(2);
                }
                Ok(var.sqrt())
            }
            ErrorModel::PoissonMc { cycles, seed } => {
                let f = |d: &ExperimentDataset| {
                    terms.iter().try_fold(0.0, |acc, (c, op)| Ok(acc + c * expectation_value(d, op)?))
                };
                Ok(poisson_mc(self.dataset, f, cycles, seed)?.sigma)
            }
        }
    }

    fn counts(&self) -> Option<&ExperimentDataset> {
        Some(self.dataset)
    }

    fn label(&self) -> String {
        format!("counts ({})", self.model.label())
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        PauliOperator::parse(s).unwrap()
    }

    fn ghz_zzz(counts: &[(&str, u64)]) -> ExperimentDataset {
        ExperimentDataset::new(
            3,
            vec![CountsRecord {
                setting: "ZZZ".into(),
                counts: counts.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
                acquisition_seconds: None,
            }],
            None,
        )
        .unwrap()
    }

    #[test]
    fn parity_examples() {
        let d = ghz_zzz(&[("000", 500), ("111", 500)]);
        assert_eq!(expectation_value(&d, &p("ZZI")).unwrap(), 1.0);
        assert_eq!(expectation_value(&d, &p("ZIZ")).unwrap(), 1.0);
        assert_eq!(expectation_value(&d, &p("-ZIZ")).unwrap(), -1.0);
        let swapped = ghz_zzz(&[("011", 500), ("100", 500)]);
        assert_eq!(expectation_value(&swapped, &p("IZZ")).unwrap(), 1.0);
        assert_eq!(expectation_value(&swapped, &p("ZZI")).unwrap(), -1.0);
        let err = expectation_value(&d, &p("XXX")).unwrap_err();
        assert!(err.to_string().contains("XXX"));
        assert!(err.is_coverage_gap());
    }

    #[test]
    fn validation_and_merging() {
        assert!(matches!(
            ExperimentDataset::from_json(r#"{"n": 2, "records": [{"setting": "ZI", "counts": {"00": 1}}]}"#),
            Err(MeasureError::BadSetting(_))
        ));
        assert!(matches!(
            ExperimentDataset::from_json(r#"{"n": 2, "records": [{"setting": "ZZ", "counts": {"0": 1}}]}"#),
            Err(MeasureError::BadOutcome(_))
        ));
        assert!(matches!(
            ExperimentDataset::from_json(r#"{"n": 2, "records": [{"setting": "ZZ", "counts": {"00": 0}}]}"#),
            Err(MeasureError::EmptyRecord(_))
        ));
        let merged = ExperimentDataset::from_json(
            r#"{"n": 2, "records": [{"setting": "ZZ", "counts": {"00": 3}}, {"setting": "ZZ", "counts": {"01": 1}}]}"#,
        )
        .unwrap();
        assert_eq!(merged.settings(), ["ZZ"]);
        assert_eq!(expectation_value(&merged, &p("ZZ")).unwrap(), 0.5);
        let round = ExperimentDataset::from_json(&merged.to_json()).unwrap();
        assert_eq!(round, merged);
        let csv = "setting,outcome,count\nZZ,00,3\nZZ,01,1\nXX,11,2\n";
        let from_csv = ExperimentDataset::from_csv(2, csv.as_bytes()).unwrap();
        assert_eq!(expectation_value(&from_csv, &p("ZZ")).unwrap(), 0.5);
        assert_eq!(expectation_value(&from_csv, &p("XX")).unwrap(), 1.0);
    }

    #[test]
    fn monte_carlo_sigma() {
        let d = ghz_zzz(&[("000", 400), ("111", 400), ("010", 100), ("101", 100)]);
        let one = poisson_mc(&d, |x| expectation_value(x, &p("ZZI")), 1, 3).unwrap();
        assert_eq!(one.sigma, 0.0);
        assert!(one.warning.is_some());
        let a = poisson_mc(&d, |x| expectation_value(x, &p("ZZI")), 100, 3).unwrap();
        let b = poisson_mc(&d, |x| expectation_value(x, &p("ZZI")), 100, 3).unwrap();
        assert_eq!(a, b);
        let binom = expectation_from_counts(&d, &p("ZZI"), ErrorModel::Binomial).unwrap();
        assert!((a.sigma / binom.sigma - 1.0).abs() < 0.3, "{} vs {}", a.sigma, binom.sigma);
        let big = ghz_zzz(&[("000", 1_000_000_000), ("001", 1)]);
        assert!(poisson_mc(&big, |x| expectation_value(x, &p("ZZZ")), 50, 1).unwrap().sigma < 1e-6);
    }

    #[test]
    fn exact_table_signs() {
        let t = ExactDataset::from_json(
            r#"{"n": 4, "expectations": [{"op": "-IZYY", "value": 0.58, "sigma": 0.02}, {"op": "ZZII", "value": 0.93}]}"#,
        )
        .unwrap();
        assert_eq!(t.expectation(&p("-IZYY")).unwrap().value, 0.58);
        assert_eq!(t.expectation(&p("IZYY")).unwrap().value, -0.58);
        assert_eq!(t.expectation(&p("IIII")).unwrap().value, 1.0);
        assert!(t.expectation(&p("XXXX")).is_err());
    }
}
