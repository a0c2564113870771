//! Seed states for the four-qubit classes explored by local-unitary orbits.

use serde::{Deserialize, Serialize};

use super::{GammaError, StateClass};
use crate::state::{QuantumState, StateSpec};

fn zero() -> QuantumState {
    QuantumState::basis("0").expect("valid bitstring")
}

fn embed(n: usize, factors: &[(&[usize], &QuantumState)]) -> QuantumState {
    let zero = zero();
    let mut used = vec![false; n];
    let mut all: Vec<(Vec<usize>, &QuantumState)> = Vec::new();
    for (qs, st) in factors {
        for &q in qs.iter() {
            used[q] = true;
        }
        all.push((qs.to_vec(), st));
    }
    let singles: Vec<Vec<usize>> = (0..n).filter(|&q| !used[q]).map(|q| vec![q]).collect();
    let mut refs: Vec<(&[usize], &QuantumState)> = all.iter().map(|(qs, s)| (qs.as_slice(), *s)).collect();
    refs.extend(singles.iter().map(|qs| (qs.as_slice(), &zero)));
    QuantumState::product_on(n, &refs).expect("catalog seeds are well formed")
}

fn pair_label(pairs: &[(usize, usize)]) -> String {
    let mut used = [false; 4];
    let mut label = String::new();
    for &(a, b) in pairs {
        used[a] = true;
        used[b] = true;
    }
    for (q, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
        label.push_str(&format!("ψ{}", q + 1));
    }
    for &(a, b) in pairs {
        label.push_str(&format!("Φ{}{}", a + 1, b + 1));
    }
    label
}

/// The 23 four-qubit classes in the order used by the ID5^4_w table:
/// fully separable, one Bell pair, two Bell pairs, one qubit times GHZ₃,
/// one qubit times W₃, GHZ₄, W₄ and the three cluster states.
pub fn four_qubit_catalog() -> Vec<StateClass> {
    let n = 4;
    let bell = QuantumState::ghz(2).expect("valid");
    let ghz3 = QuantumState::ghz(3).expect("valid");
    let w3 = QuantumState::w(3).expect("valid");
    let mut out = vec![StateClass::new("ψ1ψ2ψ3ψ4", embed(n, &[]))];
    for (a, b) in [(2, 3), (1, 3), (1, 2), (0, 3), (0, 2), (0, 1)] {
        out.push(StateClass::new(&pair_label(&[(a, b)]), embed(n, &[(&[a, b], &bell)])));
    }
    for pairs in [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]] {
        let seed = embed(n, &[(&[pairs[0].0, pairs[0].1], &bell), (&[pairs[1].0, pairs[1].1], &bell)]);
        out.push(StateClass::new(&pair_label(&pairs), seed));
    }
    for (name, st) in [("GHZ", &ghz3), ("W", &w3)] {
        for single in 0..n {
            let rest: Vec<usize> = (0..n).filter(|&q| q != single).collect();
            let digits: String = rest.iter().map(|q| (q + 1).to_string()).collect();
            out.push(StateClass::new(&format!("ψ{}{name}{digits}", single + 1), embed(n, &[(&rest, st)])));
        }
    }
    out.push(StateClass::new("GHZ1234", QuantumState::ghz(4).expect("valid")));
    out.push(StateClass::new("W1234", QuantumState::w(4).expect("valid")));
    out.push(StateClass::new("C_shear", QuantumState::c_shear()));
    out.push(StateClass::new("C_Z", QuantumState::c_z()));
    out.push(StateClass::new("C_lin", QuantumState::c_lin()));
    out
}

/// Catalog file entry: a built-in label, or a label with its own seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<StateSpec>,
}

/// Resolves catalog entries against the built-in classes.
pub fn resolve_catalog(entries: &[CatalogEntry]) -> Result<Vec<StateClass>, GammaError> {
    let builtin = four_qubit_catalog();
    entries
        .iter()
        .map(|e| match &e.seed {
            Some(spec) => Ok(StateClass::new(&e.label, spec.build()?)),
            None => builtin
                .iter()
                .find(|c| c.label == e.label)
                .cloned()
                .ok_or_else(|| GammaError::UnknownClass(e.label.clone())),
        })
        .collect()
}
