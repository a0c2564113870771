use std::collections::BTreeMap;

use idcert::measure::{
    all_settings, exact_counts, expectation_value, linear_inversion_tomography, poisson_mc, CountsRecord,
    ExperimentDataset,
};
use idcert::pauli::{Letter, PauliOperator};
use idcert::QuantumState;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(n: usize, seed: u64, mixed: bool) -> QuantumState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<Complex64> =
        (0..1 << n).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let pure = QuantumState::normalized(amps).unwrap();
    if mixed {
        pure.depolarize(rng.random::<f64>()).unwrap()
    } else {
        pure
    }
}

const LETTERS: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn counts_match_dense_expectation(
        n in 1usize..=4,
        seed in any::<u64>(),
        mixed in any::<bool>(),
        letters in proptest::collection::vec(0usize..4, 4),
        fill in proptest::collection::vec(1usize..4, 4),
        negative in any::<bool>(),
    ) {
        let st = random_state(n, seed, mixed);
        let mut ls: Vec<Letter> = letters[..n].iter().map(|&i| LETTERS[i]).collect();
        if ls.iter().all(|&l| l == Letter::I) {
            ls[0] = Letter::Z;
        }
        let obs = PauliOperator::from_letters(&ls, negative).unwrap();
        let setting: String = ls
            .iter()
            .zip(&fill)
            .map(|(&l, &f)| if l == Letter::I { LETTERS[f].as_char() } else { l.as_char() })
            .collect();
        let d = exact_counts(&st, &[setting], 1e12).unwrap();
        let est = expectation_value(&d, &obs).unwrap();
        let exact = st.expectation(&obs).unwrap();
        prop_assert!((est - exact).abs() < 1e-9, "{} vs {}", est, exact);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn tomography_round_trip(n in 1usize..=3, seed in any::<u64>(), mixed in any::<bool>()) {
        let st = random_state(n, seed, mixed);
        let d = exact_counts(&st, &all_settings(n), 1e12).unwrap();
        let t = linear_inversion_tomography(&d).unwrap();
        prop_assert!(max_entry(&(&t.rho - st.density_matrix())) < 1e-9);
        prop_assert!((t.rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merging_duplicates_equals_summing(seed in any::<u64>(), split in 0.0f64..1.0) {
        let st = random_state(2, seed, true);
        let settings = all_settings(2);
        let whole = exact_counts(&st, &settings, 1e5).unwrap();
        let mut halves = Vec::new();
        for rec in whole.records() {
            let first: BTreeMap<String, u64> =
                rec.counts.iter().map(|(k, &c)| (k.clone(), (c as f64 * split) as u64)).collect();
            let second: BTreeMap<String, u64> = rec.counts.iter().map(|(k, &c)| (k.clone(), c - first[k])).collect();
            for counts in [first, second] {
                halves.push(CountsRecord { setting: rec.setting.clone(), counts, acquisition_seconds: None });
            }
        }
        let merged = ExperimentDataset::new(2, halves, whole.provenance().map(str::to_string)).unwrap();
        prop_assert_eq!(&merged, &whole);
        for p in ["XX", "ZI", "-YZ"] {
            let op = PauliOperator::parse(p).unwrap();
            prop_assert_eq!(expectation_value(&merged, &op).unwrap(), expectation_value(&whole, &op).unwrap());
        }
    }
}

#[test]
fn poisson_sigma_scales_with_inverse_root_counts() {
    let st = random_state(3, 17, true);
    let obs = PauliOperator::parse("XYZ").unwrap();
    let setting = ["XYZ".to_string()];
    let sigma = |scale: f64| {
        let d = exact_counts(&st, &setting, scale).unwrap();
        poisson_mc(&d, |x| expectation_value(x, &obs), 400, 12).unwrap().sigma
    };
    for base in [1e3, 1e4] {
        let ratio = sigma(base) / sigma(10.0 * base);
        assert!((ratio / 10f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio} at {base}");
    }
}
