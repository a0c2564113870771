//! Linear-inversion state tomography.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{all_settings, expectation_value, ExperimentDataset, MeasureError};
use crate::pauli::PauliOperator;
use crate::state::{i_pow, min_eigenvalue, QuantumState, StateError};

/// `ρ = 2^{-N} Σ_P ⟨P⟩ P`; Hermitian with unit trace, not necessarily positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Tomography {
    pub rho: DMatrix<Complex64>,
    /// Most negative eigenvalue is the usual sign of an unphysical estimate.
    pub min_eigenvalue: f64,
}

impl Tomography {
    pub const METHOD: &'static str = "linear-inversion";

    pub fn n_qubits(&self) -> usize {
        self.rho.nrows().trailing_zeros() as usize
    }

    /// `⟨t|ρ|t⟩` for a pure target.
    pub fn fidelity(&self, target: &QuantumState) -> Result<f64, StateError> {
        if target.n_qubits() != self.n_qubits() {
            return Err(StateError::WidthMismatch { state: self.n_qubits(), other: target.n_qubits() });
        }
        let t = target.amplitudes().ok_or(StateError::NotPure)?;
        Ok(t.dotc(&(&self.rho * t)).re)
    }

    /// The estimate as a state, when it is physical.
    pub fn state(&self) -> Result<QuantumState, StateError> {
        QuantumState::from_density_matrix(self.rho.clone())
    }
}

pub fn linear_inversion_tomography(dataset: &ExperimentDataset) -> Result<Tomography, MeasureError> {
    let n = dataset.n_qubits();
    let missing: Vec<String> = all_settings(n).into_iter().filter(|s| !dataset.has_setting(s)).collect();
    if !missing.is_empty() {
        return Err(MeasureError::Coverage(missing));
    }
    let dim = 1usize << n;
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for x in 0..1u64 << n {
        for z in 0..1u64 << n {
            let y = (x & z).count_ones() as u8;
            // Hermitian representative: phase i^{#Y}.
            let p = PauliOperator::from_parts(n, x, z, y)?;
            let e = if p.is_identity() { 1.0 } else { expectation_value(dataset, &p)? };
            let (xm, zm, phase) = p.index_masks();
            let coeff = i_pow(phase) * e;
            for b in 0..dim {
                let v = if (zm & b).count_ones() % 2 == 1 { -coeff } else { coeff };
                rho[(b ^ xm, b)] += v;
            }
        }
    }
    rho /= Complex64::new(dim as f64, 0.0);
    let min_eigenvalue = min_eigenvalue(&rho);
    Ok(Tomography { rho, min_eigenvalue })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{exact_counts, simulate_experiment};
    use crate::state::max_abs;

    #[test]
    fn exact_round_trip() {
        let ghz = QuantumState::ghz(3).unwrap();
        let d = exact_counts(&ghz, &all_settings(3), 1e12).unwrap();
        let t = linear_inversion_tomography(&d).unwrap();
        assert!(max_abs(&(&t.rho - ghz.density_matrix())) < 1e-9);
        assert!((t.fidelity(&ghz).unwrap() - 1.0).abs() < 1e-9);
        let mixed = QuantumState::w(3).unwrap().depolarize(0.3).unwrap();
        let d = exact_counts(&mixed, &all_settings(3), 1e12).unwrap();
        let t = linear_inversion_tomography(&d).unwrap();
        assert!(max_abs(&(&t.rho - mixed.density_matrix())) < 1e-9);
    }

    #[test]
    fn missing_setting_named() {
        let ghz = QuantumState::ghz(2).unwrap();
        let mut settings = all_settings(2);
        settings.retain(|s| s != "XY");
        let d = simulate_experiment(&ghz, 0.0, &settings, 100, 0).unwrap();
        let err = linear_inversion_tomography(&d).unwrap_err();
        assert!(err.to_string().contains("XY"));
    }
}
