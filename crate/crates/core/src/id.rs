//! Identity products: sets of commuting Pauli rows whose product is `±I`.
//!
//! Rows may carry signs. For IDs found inside a stabilizer group the rows are
//! kept with coefficient `+1` and the group signs are returned separately as
//! eigenvalues, so that the sign of the ID is the sign of the plain letter
//! product and `∏λ_i` equals it.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{Letter, PauliError, PauliOperator, QubitSubset};
use crate::stabilizer::{check_lambdas, gf2_rank, symplectic_bits, StabilizerError, StabilizerGroup};

/// Largest row count accepted by [`find_ids_in_group`].
pub const MAX_SEARCH_ROWS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdError {
    #[error("an ID needs at least one row")]
    Empty,
    #[error("row {0} is not Hermitian")]
    NonHermitian(String),
    #[error("row {0} is proportional to the identity")]
    IdentityRow(String),
    #[error("row {0} appears twice")]
    DuplicateRow(String),
    #[error("rows {0} and {1} anticommute")]
    Anticommuting(String, String),
    #[error("rows multiply to {0}, not ±I")]
    NotIdentity(String),
    #[error("max row count {0} outside 2..={MAX_SEARCH_ROWS}")]
    SearchGuard(usize),
    #[error("eigenvalues {lambdas:?} do not multiply to the ID sign {sign}")]
    InconsistentLambdas { lambdas: Vec<i8>, sign: i8 },
    #[error("{0} rows need a cover table of more than 128 entries")]
    TooManyRows(usize),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
}

/// Outcome of [`check_id`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdCheck {
    pub is_id: bool,
    /// Sign of the product, meaningful when `is_id`.
    pub sign: i8,
}

/// Whether `rows` commute pairwise and multiply to `±I`, including row signs.
pub fn check_id(rows: &[PauliOperator]) -> IdCheck {
    let not = IdCheck { is_id: false, sign: 1 };
    let Some(first) = rows.first() else { return not };
    if rows.iter().any(|r| r.n_qubits() != first.n_qubits()) {
        return not;
    }
    for (i, a) in rows.iter().enumerate() {
        if rows[i + 1..].iter().any(|b| !a.commutes_unchecked(b)) {
            return not;
        }
    }
    let prod = rows[1..].iter().fold(*first, |acc, r| acc.mul_unchecked(r));
    match (prod.is_identity(), prod.sign()) {
        (true, Some(s)) => IdCheck { is_id: true, sign: s },
        _ => not,
    }
}

fn commuting_product_is_scalar(rows: &[PauliOperator]) -> bool {
    rows.is_empty() || check_id(rows).is_id
}

/// A validated identity product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IdTable {
    n_qubits: usize,
    rows: Vec<PauliOperator>,
    sign: i8,
}

impl IdTable {
    pub fn new(rows: Vec<PauliOperator>) -> Result<Self, IdError> {
        let first = *rows.first().ok_or(IdError::Empty)?;
        let n = first.n_qubits();
        for (i, r) in rows.iter().enumerate() {
            if r.n_qubits() != n {
                return Err(PauliError::WidthMismatch { left: n, right: r.n_qubits() }.into());
            }
            if !r.is_hermitian() {
                return Err(IdError::NonHermitian(r.to_string()));
            }
            if r.is_identity() {
                return Err(IdError::IdentityRow(r.to_string()));
            }
            for s in &rows[..i] {
                if s.x_bits() == r.x_bits() && s.z_bits() == r.z_bits() {
                    return Err(IdError::DuplicateRow(r.structural().to_string()));
                }
                if !s.commutes_unchecked(r) {
                    return Err(IdError::Anticommuting(s.to_string(), r.to_string()));
                }
            }
        }
        let prod = rows[1..].iter().fold(first, |acc, r| acc.mul_unchecked(r));
        let sign = match (prod.is_identity(), prod.sign()) {
            (true, Some(s)) => s,
            _ => return Err(IdError::NotIdentity(prod.to_string())),
        };
        Ok(IdTable { n_qubits: n, rows, sign })
    }

    pub fn parse<S: AsRef<str>>(rows: &[S]) -> Result<Self, IdError> {
        Self::new(crate::pauli::parse_all(rows)?)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn rows(&self) -> &[PauliOperator] {
        &self.rows
    }

    /// Number of rows `M`.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }

    /// Every column holds each of `X`, `Y`, `Z` an even number of times.
    pub fn is_whole(&self) -> bool {
        (0..self.n_qubits).all(|q| {
            let mut counts = [0usize; 3];
            for r in &self.rows {
                if let Some(a) = r.letter(q).axis() {
                    counts[a] += 1;
                }
            }
            counts.iter().all(|c| c % 2 == 0)
        })
    }

    /// Mask of qubits where some row acts nontrivially.
    pub fn support(&self) -> u64 {
        self.rows.iter().fold(0, |m, r| m | r.support())
    }

    fn restricted(&self, side: &QubitSubset) -> Vec<PauliOperator> {
        self.rows.iter().map(|r| r.restrict(side).expect("same width")).collect()
    }

    /// First bipartition across which the rows split into two IDs.
    pub fn factorization(&self) -> Option<QubitSubset> {
        QubitSubset::bipartitions(self.n_qubits).find(|side| {
            let a = self.restricted(side);
            let b = self.restricted(&side.complement());
            commuting_product_is_scalar(&a) && commuting_product_is_scalar(&b)
        })
    }

    /// No bipartition splits the rows into two separate IDs. An ID with an
    /// idle column always splits there.
    pub fn is_entangled(&self) -> bool {
        self.n_qubits >= 2 && self.factorization().is_none()
    }

    /// Entangled, no proper subset of rows is an ID, and no deletion of
    /// columns leaves an ID of two or more nontrivial rows.
    pub fn is_critical(&self) -> bool {
        if !self.is_entangled() {
            return false;
        }
        let m = self.m();
        let rows_ok = (1u64..(1 << m) - 1).all(|mask| {
            let sub: Vec<_> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| self.rows[i]).collect();
            sub.len() < 2 || !check_id(&sub).is_id
        });
        if !rows_ok {
            return false;
        }
        let full = (1u64 << self.n_qubits) - 1;
        (1u64..full).all(|mask| {
            let side = QubitSubset::from_mask(self.n_qubits, mask).expect("mask in range");
            let kept: Vec<_> = self.restricted(&side).into_iter().filter(|r| !r.is_identity()).collect();
            kept.len() < 2 || !check_id(&kept).is_id
        })
    }

    pub fn independent_rank(&self) -> usize {
        gf2_rank(&self.rows)
    }

    /// Dimension `2^{N−k}` of each joint eigenspace.
    pub fn eigenspace_rank(&self) -> usize {
        1 << (self.n_qubits - self.independent_rank())
    }

    pub fn classify(&self) -> IdClassification {
        IdClassification {
            sign: self.sign,
            is_whole: self.is_whole(),
            is_entangled: self.is_entangled(),
            is_critical: self.is_critical(),
            independent_rank: self.independent_rank(),
            eigenspace_rank: self.eigenspace_rank(),
            min_settings: min_settings(&self.rows).map(|c| c.settings.len()).unwrap_or(self.m()),
        }
    }

    /// Checks that eigenvalues are `±1`, one per row, and multiply to the sign.
    pub fn check_lambdas(&self, lambdas: &[i8]) -> Result<(), IdError> {
        check_lambdas(self.m(), lambdas)?;
        let prod: i8 = lambdas.iter().product();
        if prod != self.sign {
            return Err(IdError::InconsistentLambdas { lambdas: lambdas.to_vec(), sign: self.sign });
        }
        Ok(())
    }

    /// `λ = +1` on every row except the last, which takes the ID sign.
    pub fn default_lambdas(&self) -> Vec<i8> {
        let mut l = vec![1i8; self.m()];
        if let Some(last) = l.last_mut() {
            *last = self.sign;
        }
        l
    }

    /// Conventional name such as `ID5^4_w`.
    pub fn label(&self) -> String {
        format!("ID{}^{}_{}", self.m(), self.n_qubits, if self.is_whole() { 'w' } else { 'p' })
    }
}

impl fmt::Display for IdTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let sign = if r.is_negative() { "-" } else { " " };
            let letters: Vec<String> = r.letters().iter().map(|l| l.to_string()).collect();
            writeln!(f, "{sign} {}", letters.join(" "))?;
        }
        write!(f, "= {}I", if self.sign < 0 { "-" } else { "+" })
    }
}

/// Flags and counts derived from an ID.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdClassification {
    pub sign: i8,
    pub is_whole: bool,
    pub is_entangled: bool,
    pub is_critical: bool,
    pub independent_rank: usize,
    pub eigenspace_rank: usize,
    pub min_settings: usize,
}

/// ID file: rows plus optional target eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdFile {
    pub rows: Vec<PauliOperator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<i8>>,
}

impl IdFile {
    /// Validated table and eigenvalues.
    pub fn load(&self) -> Result<(IdTable, Vec<i8>), IdError> {
        let table = IdTable::new(self.rows.clone())?;
        let lambdas = match &self.lambdas {
            Some(l) => {
                table.check_lambdas(l)?;
                l.clone()
            }
            None => table.default_lambdas(),
        };
        Ok((table, lambdas))
    }
}

/// Minimal set of local measurement settings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingCover {
    /// One basis letter per qubit, e.g. `"ZXYX"`.
    pub settings: Vec<String>,
    /// For each row, the index of the first setting that measures it.
    pub assignment: Vec<usize>,
}

/// Whether the setting letters measure `row` (every non-identity letter matches).
pub fn setting_covers(setting: &[Letter], row: &PauliOperator) -> bool {
    row.letters().iter().zip(setting).all(|(l, s)| *l == Letter::I || l == s)
}

/// Exact minimum set cover of `rows` by local settings, searched over the
/// settings built from letters that occur in each column.
pub fn min_settings(rows: &[PauliOperator]) -> Result<SettingCover, IdError> {
    let first = rows.first().ok_or(IdError::Empty)?;
    if rows.len() > 128 {
        return Err(IdError::TooManyRows(rows.len()));
    }
    let n = first.n_qubits();
    let columns: Vec<Vec<Letter>> = (0..n)
        .map(|q| {
            let mut ls: Vec<Letter> = Letter::NON_IDENTITY
                .iter()
                .copied()
                .filter(|l| rows.iter().any(|r| r.letter(q) == *l))
                .collect();
            if ls.is_empty() {
                ls.push(Letter::Z);
            }
            ls
        })
        .collect();
    let mut candidates: Vec<(Vec<Letter>, u128)> = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let setting: Vec<Letter> = idx.iter().enumerate().map(|(q, &i)| columns[q][i]).collect();
        let mask = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| setting_covers(&setting, r))
            .fold(0u128, |m, (i, _)| m | 1 << i);
        if mask != 0 {
            candidates.push((setting, mask));
        }
        // odometer, last qubit fastest
        let mut q = n;
        loop {
            if q == 0 {
                break;
            }
            q -= 1;
            idx[q] += 1;
            if idx[q] < columns[q].len() {
                break;
            }
            idx[q] = 0;
            if q == 0 {
                q = usize::MAX;
                break;
            }
        }
        if q == usize::MAX {
            break;
        }
    }
    let all: u128 = if rows.len() == 128 { u128::MAX } else { (1u128 << rows.len()) - 1 };
    let max_cover = candidates.iter().map(|c| c.1.count_ones()).max().unwrap_or(1);
    let mut best: Vec<usize> = Vec::new();
    let mut chosen = Vec::new();
    // iterative deepening finds the smallest cover first
    for depth in 1..=rows.len() {
        if search_cover(&candidates, all, 0, depth, max_cover, &mut chosen) {
            best = chosen.clone();
            break;
        }
    }
    best.sort_by_key(|&c| candidates[c].0.iter().map(|l| l.as_char()).collect::<String>());
    let settings: Vec<String> =
        best.iter().map(|&c| candidates[c].0.iter().map(|l| l.as_char()).collect()).collect();
    let assignment = (0..rows.len())
        .map(|i| best.iter().position(|&c| candidates[c].1 >> i & 1 == 1).expect("cover is complete"))
        .collect();
    Ok(SettingCover { settings, assignment })
}

fn search_cover(
    candidates: &[(Vec<Letter>, u128)],
    all: u128,
    covered: u128,
    depth: usize,
    max_cover: u32,
    chosen: &mut Vec<usize>,
) -> bool {
    if covered == all {
        return true;
    }
    let missing = (all & !covered).count_ones();
    if depth == 0 || missing > depth as u32 * max_cover {
        return false;
    }
    let row = (all & !covered).trailing_zeros();
    for (i, (_, mask)) in candidates.iter().enumerate() {
        if mask >> row & 1 == 1 {
            chosen.push(i);
            if search_cover(candidates, all, covered | mask, depth - 1, max_cover, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Which IDs to keep in a group search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IdFilter {
    pub whole: bool,
    pub negative: bool,
    pub entangled: bool,
    pub critical: bool,
    /// Keep only IDs acting on every qubit.
    pub full_support: bool,
    /// Keep only IDs with exactly this many rows.
    pub rows: Option<usize>,
}

impl IdFilter {
    fn accepts(&self, table: &IdTable, class: &IdClassification) -> bool {
        (!self.whole || class.is_whole)
            && (!self.negative || class.sign < 0)
            && (!self.entangled || class.is_entangled)
            && (!self.critical || class.is_critical)
            && (!self.full_support || table.support().count_ones() as usize == table.n_qubits())
            && self.rows.is_none_or(|m| table.m() == m)
    }
}

/// An ID made of stabilizer-group elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupId {
    /// Rows with coefficient `+1`.
    pub table: IdTable,
    /// Group signs of the rows; the group's state has these eigenvalues.
    pub lambdas: Vec<i8>,
    pub classification: IdClassification,
}

/// All subsets of 2..=`m_max` non-identity group elements whose letters
/// multiply to the identity, classified and filtered, sorted by row strings.
pub fn find_ids_in_group(group: &StabilizerGroup, m_max: usize, filter: IdFilter) -> Result<Vec<GroupId>, IdError> {
    if !(2..=MAX_SEARCH_ROWS).contains(&m_max) {
        return Err(IdError::SearchGuard(m_max));
    }
    let elems = group.nonidentity_sorted();
    let bits: Vec<u128> = elems.iter().map(symplectic_bits).collect();
    let index: HashMap<u128, usize> = bits.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let subsets: Vec<Vec<usize>> = (0..elems.len())
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut out = Vec::new();
            let mut stack = vec![first];
            extend_subsets(&bits, &index, &mut stack, bits[first], m_max, &mut out);
            out
        })
        .collect();
    let mut found: Vec<GroupId> = subsets
        .into_par_iter()
        .filter_map(|subset| {
            let rows: Vec<_> = subset.iter().map(|&i| elems[i].structural()).collect();
            let lambdas: Vec<i8> = subset.iter().map(|&i| elems[i].sign().unwrap_or(1)).collect();
            let table = IdTable::new(rows).ok()?;
            let classification = table.classify();
            filter.accepts(&table, &classification).then_some(GroupId { table, lambdas, classification })
        })
        .collect();
    found.sort_by_cached_key(|g| g.table.rows().iter().map(|r| r.to_string()).collect::<Vec<_>>());
    Ok(found)
}

fn extend_subsets(
    bits: &[u128],
    index: &HashMap<u128, usize>,
    stack: &mut Vec<usize>,
    acc: u128,
    m_max: usize,
    out: &mut Vec<Vec<usize>>,
) {
    let last = *stack.last().expect("nonempty");
    // closing element: whatever completes the product, if it comes later
    if stack.len() + 1 >= 3 {
        if let Some(&j) = index.get(&acc) {
            if j > last {
                let mut s = stack.clone();
                s.push(j);
                out.push(s);
            }
        }
    }
    if stack.len() + 2 > m_max {
        return;
    }
    for next in last + 1..bits.len() {
        stack.push(next);
        extend_subsets(bits, index, stack, acc ^ bits[next], m_max, out);
        stack.pop();
    }
}
