//! Measurement data: count datasets, published expectation tables,
//! synthetic experiments, tomography and certification reports.

mod dataset;
mod report;
mod simulate;
mod tomography;

use thiserror::Error;

pub use dataset::{
    expectation_from_counts, expectation_value, poisson_mc, CountsRecord, CountsSource, ErrorModel, ExactDataset, ExactEntry,
    ExpectationSource, ExperimentDataset, McSigma, DEFAULT_MC_CYCLES,
};
pub use report::{
    auto_select_id, certification_report, expectation_plot_csv, fidelity_plot_csv, ReportOptions,
};
pub use simulate::{all_settings, born_probabilities, exact_counts, plan_settings, simulate_experiment};
pub use tomography::{linear_inversion_tomography, Tomography};

use crate::cert::CertError;
use crate::id::IdError;
use crate::pauli::PauliError;
use crate::stabilizer::StabilizerError;
use crate::state::StateError;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("setting {0:?} must use only X, Y, Z with one letter per qubit")]
    BadSetting(String),
    #[error("outcome {0:?} is not a bitstring of the dataset width")]
    BadOutcome(String),
    #[error("record for setting {0} has no counts")]
    EmptyRecord(String),
    #[error("dataset has no records")]
    EmptyDataset,
    #[error("{obs} is unmeasurable with this dataset; it needs a setting matching {pattern}")]
    Unmeasurable { obs: String, pattern: String },
    #[error("dataset does not cover: {}", .0.join(", "))]
    Coverage(Vec<String>),
    #[error("width mismatch: dataset has {dataset} qubits, operand has {other}")]
    WidthMismatch { dataset: usize, other: usize },
    #[error("shots must be at least 1")]
    NoShots,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Id(#[from] IdError),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MeasureError {
    /// True for missing-data errors as opposed to malformed input.
    pub fn is_coverage_gap(&self) -> bool {
        matches!(self, MeasureError::Coverage(_) | MeasureError::Unmeasurable { .. })
    }
}
