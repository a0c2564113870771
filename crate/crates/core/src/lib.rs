//! Identity products of Pauli observables for certifying multiqubit states.
//!
//! An identity product (ID) is a set of commuting Pauli strings whose product
//! is `±I`. Measuring its rows on a stabilizer state gives, from one small set
//! of local settings, a Bell parameter, a fidelity lower bound and an
//! entanglement witness.
//!
//! ```
//! use idcert::id::IdTable;
//! use idcert::cert::{bell_parameter, fidelity_bound_id, Measured};
//!
//! let mermin = IdTable::parse(&["XXX", "XYY", "YXY", "YYX"]).unwrap();
//! assert!(mermin.is_whole() && mermin.is_negative());
//! let data: Vec<Measured> = [0.81, -0.59, -0.61, -0.54].iter().map(|&v| Measured::exact(v)).collect();
//! let bell = bell_parameter(&mermin, &[1, -1, -1, -1], &data).unwrap();
//! assert!(bell.violated());
//! let f = fidelity_bound_id(Measured::exact(bell.alpha_exp), 4).unwrap();
//! assert!((f.value - 0.6375).abs() < 1e-12);
//! ```

pub mod cert;
pub mod gamma;
pub mod graph;
pub mod id;
pub mod measure;
pub mod pauli;
pub mod stabilizer;
pub mod state;

#[cfg(doctest)]
mod book;

pub use cert::{CertReport, Measured};
pub use id::IdTable;
pub use pauli::{Letter, PauliOperator, QubitSubset};
pub use stabilizer::StabilizerGroup;
pub use state::QuantumState;

/// Any error raised by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Pauli(#[from] pauli::PauliError),
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    State(#[from] state::StateError),
    #[error(transparent)]
    Stabilizer(#[from] stabilizer::StabilizerError),
    #[error(transparent)]
    Id(#[from] id::IdError),
    #[error(transparent)]
    Cert(#[from] cert::CertError),
    #[error(transparent)]
    Gamma(#[from] gamma::GammaError),
    #[error(transparent)]
    Measure(#[from] measure::MeasureError),
}
