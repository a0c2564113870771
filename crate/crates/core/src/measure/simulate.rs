//! Synthetic experiments and acquisition plans.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use super::{ExperimentDataset, MeasureError};
use crate::id::min_settings;
use crate::pauli::{Letter, PauliOperator};
use crate::state::{gates, QuantumState};

/// Basis change taking the `+1` eigenstate of the letter to `|0⟩`.
fn basis_change(l: Letter) -> Matrix2<Complex64> {
    match l {
        Letter::X => gates::hadamard(),
        Letter::Y => gates::hadamard() * gates::s_dagger(),
        _ => gates::identity(),
    }
}

fn setting_letters(n: usize, setting: &str) -> Result<Vec<Letter>, MeasureError> {
    let letters: Vec<Letter> = setting.chars().filter_map(Letter::from_char).collect();
    if letters.len() != n || setting.chars().count() != n || letters.contains(&Letter::I) {
        return Err(MeasureError::BadSetting(setting.to_string()));
    }
    Ok(letters)
}

/// Outcome probabilities for one setting, indexed with qubit 1 as the most
/// significant bit.
pub fn born_probabilities(state: &QuantumState, setting: &str) -> Result<Vec<f64>, MeasureError> {
    let letters = setting_letters(state.n_qubits(), setting)?;
    let us: Vec<Matrix2<Complex64>> = letters.iter().map(|&l| basis_change(l)).collect();
    let rotated = state.apply_local_unitaries(&us)?;
    let probs = match rotated.amplitudes() {
        Some(v) => v.iter().map(|a| a.norm_sqr()).collect(),
        None => rotated.density_matrix().diagonal().iter().map(|d| d.re.max(0.0)).collect(),
    };
    Ok(probs)
}

/// All `3^N` settings in lexicographic order over `X < Y < Z`.
pub fn all_settings(n_qubits: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..n_qubits {
        out = out
            .into_iter()
            .flat_map(|s| ['X', 'Y', 'Z'].into_iter().map(move |c| format!("{s}{c}")))
            .collect();
    }
    out
}

/// Minimal acquisition plan for a set of observables.
pub fn plan_settings(rows: &[PauliOperator]) -> Result<Vec<String>, MeasureError> {
    Ok(min_settings(rows)?.settings)
}

/// Counts proportional to the Born probabilities, `round(p · scale)`.
pub fn exact_counts(state: &QuantumState, settings: &[String], scale: f64) -> Result<ExperimentDataset, MeasureError> {
    let data = settings
        .iter()
        .map(|s| {
            let probs = born_probabilities(state, s)?;
            Ok((s.clone(), probs.iter().map(|p| (p * scale).round() as u64).collect()))
        })
        .collect::<Result<Vec<_>, MeasureError>>()?;
    ExperimentDataset::from_dense(state.n_qubits(), data, Some(format!("exact counts x{scale}")))
}

/// Depolarizes `state` by `p`, then samples a Poisson number of shots
/// (mean `shots_per_setting`) per setting, distributed multinomially over
/// outcomes. Setting `i` draws from stream `i` of the seeded generator.
pub fn simulate_experiment(
    state: &QuantumState,
    p_depolarizing: f64,
    settings: &[String],
    shots_per_setting: u64,
    seed: u64,
) -> Result<ExperimentDataset, MeasureError> {
    if shots_per_setting == 0 {
        return Err(MeasureError::NoShots);
    }
    if settings.is_empty() {
        return Err(MeasureError::EmptyDataset);
    }
    let noisy = if p_depolarizing == 0.0 { state.clone() } else { state.depolarize(p_depolarizing)? };
    let data = settings
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let probs = born_probabilities(&noisy, s)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let total = loop {
                let t = Poisson::new(shots_per_setting as f64).expect("positive mean").sample(&mut rng) as u64;
                if t > 0 {
                    break t;
                }
            };
            Ok((s.clone(), multinomial(&mut rng, total, &probs)))
        })
        .collect::<Result<Vec<_>, MeasureError>>()?;
    ExperimentDataset::from_dense(
        state.n_qubits(),
        data,
        Some(format!("simulated: p = {p_depolarizing}, {shots_per_setting} shots per setting, seed {seed}")),
    )
}

fn multinomial(rng: &mut ChaCha8Rng, total: u64, probs: &[f64]) -> Vec<u64> {
    let mut remaining = total;
    let mut mass: f64 = probs.iter().sum();
    let mut out = vec![0u64; probs.len()];
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() || mass <= p {
            out[k] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, q).expect("probability in range").sample(rng);
        out[k] = draw;
        remaining -= draw;
        mass -= p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::expectation_value;

    #[test]
    fn settings_enumeration() {
        let s = all_settings(2);
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], "XX");
        assert_eq!(s[8], "ZZ");
    }

    #[test]
    fn ghz_outcomes() {
        let ghz = QuantumState::ghz(3).unwrap();
        let d = simulate_experiment(&ghz, 0.0, &["ZZZ".into()], 10_000, 1).unwrap();
        let rec = &d.records()[0];
        assert!(rec.counts.keys().all(|k| k == "000" || k == "111"));
        let uniform = simulate_experiment(&ghz, 1.0, &["ZZZ".into()], 80_000, 1).unwrap();
        let rec = &uniform.records()[0];
        assert_eq!(rec.counts.len(), 8);
        let total: u64 = rec.counts.values().sum();
        assert!(rec.counts.values().all(|&c| (c as f64 / total as f64 - 0.125).abs() < 0.01));
    }

    #[test]
    fn eigenstate_conventions() {
        // |+i⟩ gives outcome 0 in Y and a random outcome in X.
        let plus_i = QuantumState::normalized(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        assert!((born_probabilities(&plus_i, "Y").unwrap()[0] - 1.0).abs() < 1e-12);
        assert!((born_probabilities(&plus_i, "X").unwrap()[0] - 0.5).abs() < 1e-12);
        let c = QuantumState::c_lin();
        let d = exact_counts(&c, &all_settings(4), 1e9).unwrap();
        let iz = PauliOperator::parse("IZYY").unwrap();
        assert!((expectation_value(&d, &iz).unwrap() + 1.0).abs() < 1e-6);
        assert!((expectation_value(&d, &iz.negated()).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = QuantumState::c_lin();
        let s = all_settings(4);
        let a = simulate_experiment(&c, 0.1, &s[..5], 500, 9).unwrap();
        let b = simulate_experiment(&c, 0.1, &s[..5], 500, 9).unwrap();
        assert_eq!(a, b);
        assert!(matches!(simulate_experiment(&c, 0.1, &s, 0, 9), Err(MeasureError::NoShots)));
    }

    #[test]
    fn plans() {
        let rows = crate::pauli::parse_all(&["ZZII", "ZIZI", "IZIZ", "XYXY", "XYYX"]).unwrap();
        assert_eq!(plan_settings(&rows).unwrap().len(), 3);
        assert_eq!(plan_settings(&rows[..1]).unwrap().len(), 1);
    }
}
