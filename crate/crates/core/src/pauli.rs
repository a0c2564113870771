//! Signed N-qubit Pauli operators in binary symplectic form.
//!
//! An operator is stored as `i^phase · X^x Z^z` where `x` and `z` are bit
//! masks over qubits (bit `q` is qubit `q`, zero-based). The letter `Y` is
//! `i·X·Z`, so a Hermitian string has `phase − #Y ≡ 0 or 2 (mod 4)`.
//!
//! Qubits are numbered from zero in code and from one in any text shown to
//! users.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest register a [`PauliOperator`] can describe.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("invalid Pauli letter {found:?} at position {position}")]
    InvalidLetter { position: usize, found: char },
    #[error("Pauli string has no qubits")]
    Empty,
    #[error("operators act on {left} and {right} qubits")]
    WidthMismatch { left: usize, right: usize },
    #[error("qubit subset is empty")]
    EmptySubset,
    #[error("{0} qubits requested, at most {MAX_QUBITS} supported")]
    TooManyQubits(usize),
    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const NON_IDENTITY: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    /// Index into `[X, Y, Z]`; `None` for the identity.
    pub fn axis(self) -> Option<usize> {
        match self {
            Letter::I => None,
            Letter::X => Some(0),
            Letter::Y => Some(1),
            Letter::Z => Some(2),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A set of qubits, used for bipartitions and column deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitSubset {
    n_qubits: usize,
    mask: u64,
}

impl QubitSubset {
    pub fn from_mask(n_qubits: usize, mask: u64) -> Result<Self, PauliError> {
        check_width(n_qubits)?;
        if mask & !full_mask(n_qubits) != 0 {
            let qubit = 63 - mask.leading_zeros() as usize;
            return Err(PauliError::QubitOutOfRange { qubit, n_qubits });
        }
        Ok(QubitSubset { n_qubits, mask })
    }

    /// Builds a subset from zero-based qubit indices.
    pub fn from_qubits(n_qubits: usize, qubits: &[usize]) -> Result<Self, PauliError> {
        check_width(n_qubits)?;
        let mut mask = 0u64;
        for &q in qubits {
            if q >= n_qubits {
                return Err(PauliError::QubitOutOfRange { qubit: q, n_qubits });
            }
            mask |= 1 << q;
        }
        Ok(QubitSubset { n_qubits, mask })
    }

    pub fn full(n_qubits: usize) -> Result<Self, PauliError> {
        Self::from_mask(n_qubits, full_mask(n_qubits))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, qubit: usize) -> bool {
        qubit < self.n_qubits && self.mask >> qubit & 1 == 1
    }

    /// Zero-based qubits in increasing order.
    pub fn qubits(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| self.contains(q)).collect()
    }

    pub fn complement(&self) -> QubitSubset {
        QubitSubset {
            n_qubits: self.n_qubits,
            mask: !self.mask & full_mask(self.n_qubits),
        }
    }

    /// All unordered bipartitions `(S, S̄)` with both sides nonempty. `S`
    /// always contains the first qubit, so each cut appears once.
    pub fn bipartitions(n_qubits: usize) -> impl Iterator<Item = QubitSubset> {
        let half = if n_qubits == 0 { 0u64 } else { 1u64 << (n_qubits - 1) };
        (0..half.saturating_sub(1)).map(move |rest| QubitSubset {
            n_qubits,
            mask: 1 | (rest << 1),
        })
    }
}

impl fmt::Display for QubitSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.qubits().iter().map(|q| (q + 1).to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

pub(crate) fn full_mask(n_qubits: usize) -> u64 {
    if n_qubits >= 64 {
        u64::MAX
    } else {
        (1u64 << n_qubits) - 1
    }
}

fn check_width(n_qubits: usize) -> Result<(), PauliError> {
    if n_qubits == 0 {
        Err(PauliError::Empty)
    } else if n_qubits > MAX_QUBITS {
        Err(PauliError::TooManyQubits(n_qubits))
    } else {
        Ok(())
    }
}

/// Packs the bits of `value` selected by `mask` into the low bits, keeping order.
fn compress_bits(value: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut k = 0;
    let mut m = mask;
    while m != 0 {
        let q = m.trailing_zeros();
        out |= (value >> q & 1) << k;
        k += 1;
        m &= m - 1;
    }
    out
}

/// `i^phase · X^x Z^z` on `n_qubits` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n_qubits: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n_qubits: usize) -> Result<Self, PauliError> {
        check_width(n_qubits)?;
        Ok(PauliOperator { n_qubits, x: 0, z: 0, phase: 0 })
    }

    /// Raw constructor. `phase` is taken mod 4.
    pub fn from_parts(n_qubits: usize, x: u64, z: u64, phase: u8) -> Result<Self, PauliError> {
        check_width(n_qubits)?;
        let full = full_mask(n_qubits);
        if (x | z) & !full != 0 {
            let qubit = 63 - ((x | z) & !full).leading_zeros() as usize;
            return Err(PauliError::QubitOutOfRange { qubit, n_qubits });
        }
        Ok(PauliOperator { n_qubits, x, z, phase: phase & 3 })
    }

    /// Hermitian operator from letters and a sign.
    pub fn from_letters(letters: &[Letter], negative: bool) -> Result<Self, PauliError> {
        check_width(letters.len())?;
        let (mut x, mut z) = (0u64, 0u64);
        let mut ys = 0u8;
        for (q, l) in letters.iter().enumerate() {
            let (xb, zb) = l.bits();
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
            ys += (xb && zb) as u8;
        }
        let phase = (ys + if negative { 2 } else { 0 }) & 3;
        Ok(PauliOperator { n_qubits: letters.len(), x, z, phase })
    }

    /// Single letter on one qubit, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, letter: Letter) -> Result<Self, PauliError> {
        check_width(n_qubits)?;
        if qubit >= n_qubits {
            return Err(PauliError::QubitOutOfRange { qubit, n_qubits });
        }
        let mut letters = vec![Letter::I; n_qubits];
        letters[qubit] = letter;
        Self::from_letters(&letters, false)
    }

    pub fn parse(text: &str) -> Result<Self, PauliError> {
        let mut chars = text.chars().peekable();
        let mut negative = false;
        let mut offset = 0;
        match chars.peek() {
            Some('-') => {
                negative = true;
                chars.next();
                offset = 1;
            }
            Some('+') => {
                chars.next();
                offset = 1;
            }
            _ => {}
        }
        let mut letters = Vec::new();
        for (i, c) in chars.enumerate() {
            match Letter::from_char(c) {
                Some(l) => letters.push(l),
                None => {
                    return Err(PauliError::InvalidLetter { position: offset + i + 1, found: c })
                }
            }
        }
        Self::from_letters(&letters, negative)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Exponent `k` of the overall coefficient `i^k` in front of the letter string.
    fn coefficient_exp(&self) -> u8 {
        (self.phase as u32 + 4 - self.y_count() % 4) as u8 & 3
    }

    pub fn is_hermitian(&self) -> bool {
        self.coefficient_exp() % 2 == 0
    }

    /// `+1` or `-1` in front of the letter string, `None` when the
    /// coefficient is `±i`.
    pub fn sign(&self) -> Option<i8> {
        match self.coefficient_exp() {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.coefficient_exp() == 2
    }

    /// True when the letter string is all `I`, whatever the coefficient.
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn letter(&self, qubit: usize) -> Letter {
        match (self.x >> qubit & 1, self.z >> qubit & 1) {
            (0, 0) => Letter::I,
            (1, 0) => Letter::X,
            (1, 1) => Letter::Y,
            _ => Letter::Z,
        }
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n_qubits).map(|q| self.letter(q)).collect()
    }

    /// Mask of qubits carrying a non-identity letter.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    /// Same letters with coefficient `+1`.
    pub fn structural(&self) -> PauliOperator {
        PauliOperator { phase: (self.y_count() & 3) as u8, ..*self }
    }

    pub fn negated(&self) -> PauliOperator {
        PauliOperator { phase: (self.phase + 2) & 3, ..*self }
    }

    /// Same letters with the given sign.
    pub fn with_sign(&self, negative: bool) -> PauliOperator {
        let s = self.structural();
        if negative {
            s.negated()
        } else {
            s
        }
    }

    fn check_same_width(&self, other: &PauliOperator) -> Result<(), PauliError> {
        if self.n_qubits != other.n_qubits {
            Err(PauliError::WidthMismatch { left: self.n_qubits, right: other.n_qubits })
        } else {
            Ok(())
        }
    }

    /// Exact product `self · other`.
    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator, PauliError> {
        self.check_same_width(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliOperator) -> PauliOperator {
        // Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
        let swap = ((self.z & other.x).count_ones() % 2) as u8 * 2;
        PauliOperator {
            n_qubits: self.n_qubits,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + swap) & 3,
        }
    }

    pub fn commutes(&self, other: &PauliOperator) -> Result<bool, PauliError> {
        self.check_same_width(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliOperator) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Keeps only the columns in `subset`. The coefficient of the result is
    /// `+1`: signs stay with the caller.
    pub fn restrict(&self, subset: &QubitSubset) -> Result<PauliOperator, PauliError> {
        if subset.n_qubits() != self.n_qubits {
            return Err(PauliError::WidthMismatch { left: self.n_qubits, right: subset.n_qubits() });
        }
        if subset.is_empty() {
            return Err(PauliError::EmptySubset);
        }
        let x = compress_bits(self.x, subset.mask());
        let z = compress_bits(self.z, subset.mask());
        let phase = ((x & z).count_ones() & 3) as u8;
        Ok(PauliOperator { n_qubits: subset.len(), x, z, phase })
    }

    /// Matrix element data: `P|b⟩ = i^k (-1)^{|z & b|} |b ⊕ x⟩` with basis
    /// indices where qubit 0 is the most significant bit. Returns the index
    /// masks `(x, z)` and the coefficient exponent `k`.
    pub fn index_masks(&self) -> (usize, usize, u8) {
        let n = self.n_qubits;
        let mut xi = 0usize;
        let mut zi = 0usize;
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            if self.x >> q & 1 == 1 {
                xi |= bit;
            }
            if self.z >> q & 1 == 1 {
                zi |= bit;
            }
        }
        (xi, zi, self.phase)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.coefficient_exp() {
            0 => {}
            1 => write!(f, "i")?,
            2 => write!(f, "-")?,
            _ => write!(f, "-i")?,
        }
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PauliOperator::parse(s)
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        PauliOperator::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Product of a nonempty list, left to right.
pub fn product(ops: &[PauliOperator]) -> Result<PauliOperator, PauliError> {
    let (first, rest) = ops.split_first().ok_or(PauliError::Empty)?;
    rest.iter().try_fold(*first, |acc, p| acc.multiply(p))
}

/// Parses a list of Pauli strings.
pub fn parse_all<S: AsRef<str>>(texts: &[S]) -> Result<Vec<PauliOperator>, PauliError> {
    texts.iter().map(|t| PauliOperator::parse(t.as_ref())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliOperator {
        PauliOperator::parse(s).unwrap()
    }

    /// Dense matrix oracle built from explicit single-qubit matrices.
    fn dense(op: &PauliOperator) -> Vec<Vec<Complex64>> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let single = |l: Letter| -> [[Complex64; 2]; 2] {
            match l {
                Letter::I => [[one, zero], [zero, one]],
                Letter::X => [[zero, one], [one, zero]],
                Letter::Y => [[zero, -i], [i, zero]],
                Letter::Z => [[one, zero], [zero, -one]],
            }
        };
        let mut m = vec![vec![one]];
        for q in 0..op.n_qubits() {
            let s = single(op.letter(q));
            let d = m.len();
            let mut next = vec![vec![zero; 2 * d]; 2 * d];
            for r in 0..d {
                for c in 0..d {
                    for a in 0..2 {
                        for b in 0..2 {
                            next[2 * r + a][2 * c + b] = m[r][c] * s[a][b];
                        }
                    }
                }
            }
            m = next;
        }
        let coeff = i.powu(op.coefficient_exp() as u32);
        m.iter().map(|row| row.iter().map(|v| v * coeff).collect()).collect()
    }

    fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let d = a.len();
        (0..d)
            .map(|r| (0..d).map(|c| (0..d).map(|k| a[r][k] * b[k][c]).sum()).collect())
            .collect()
    }

    fn close(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> bool {
        a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn parse_examples() {
        let xxx = p("XXX");
        assert_eq!(xxx.x_bits(), 0b111);
        assert_eq!(xxx.z_bits(), 0);
        assert_eq!(xxx.sign(), Some(1));

        let izyy = p("-IZYY");
        assert_eq!(izyy.sign(), Some(-1));
        assert_eq!(izyy.support(), 0b1110);
        assert!(izyy.is_hermitian());

        assert_eq!(
            PauliOperator::parse("XZQI"),
            Err(PauliError::InvalidLetter { position: 3, found: 'Q' })
        );
        assert_eq!(PauliOperator::parse(""), Err(PauliError::Empty));
        assert_eq!(PauliOperator::parse("-"), Err(PauliError::Empty));
    }

    #[test]
    fn multiply_examples() {
        let xz = p("X").multiply(&p("Z")).unwrap();
        assert_eq!(xz.to_string(), "-iY");
        for s in ["XYZ", "-YYI", "ZIXY"] {
            let sq = p(s).multiply(&p(s)).unwrap();
            assert!(sq.is_identity());
            assert_eq!(sq.sign(), Some(1));
        }
        let mermin = product(&parse_all(&["XXX", "XYY", "YXY", "YYX"]).unwrap()).unwrap();
        assert!(mermin.is_identity());
        assert_eq!(mermin.sign(), Some(-1));
        assert!(p("XX").multiply(&p("X")).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(!p("XI").commutes(&p("ZI")).unwrap());
        let rows = parse_all(&["ZZII", "ZIZI", "IZIZ", "XYXY", "XYYX"]).unwrap();
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                let ab = matmul(&dense(a), &dense(b));
                let ba = matmul(&dense(b), &dense(a));
                assert!(close(&ab, &ba));
                assert!(a.commutes(b).unwrap());
            }
        }
    }

    #[test]
    fn restrict_examples() {
        let s12 = QubitSubset::from_qubits(4, &[0, 1]).unwrap();
        assert_eq!(p("XYZI").restrict(&s12).unwrap().to_string(), "XY");
        let s34 = QubitSubset::from_qubits(4, &[2, 3]).unwrap();
        let r = p("-IZYY").restrict(&s34).unwrap();
        assert_eq!(r.to_string(), "YY");
        assert_eq!(r.sign(), Some(1));
        let full = QubitSubset::full(4).unwrap();
        assert_eq!(p("XYZI").restrict(&full).unwrap(), p("XYZI"));
        let empty = QubitSubset::from_mask(4, 0).unwrap();
        assert_eq!(p("XYZI").restrict(&empty), Err(PauliError::EmptySubset));
    }

    #[test]
    fn weight_examples() {
        assert_eq!(p("IIII").weight(), 0);
        assert_eq!(p("XYZI").weight(), 3);
        assert_eq!(p("ZZZZ").weight(), 4);
    }

    #[test]
    fn bipartitions_are_unique() {
        let cuts: Vec<_> = QubitSubset::bipartitions(4).collect();
        assert_eq!(cuts.len(), 7);
        assert!(cuts.iter().all(|c| c.contains(0) && !c.complement().is_empty()));
        assert_eq!(QubitSubset::bipartitions(1).count(), 0);
    }

    #[test]
    fn rejects_wide_registers() {
        assert_eq!(PauliOperator::identity(65), Err(PauliError::TooManyQubits(65)));
        assert!(PauliOperator::identity(64).is_ok());
    }

    #[test]
    fn exhaustive_two_qubit_products_match_matrices() {
        let mut all = Vec::new();
        for x in 0..4u64 {
            for z in 0..4u64 {
                for phase in 0..4u8 {
                    all.push(PauliOperator::from_parts(2, x, z, phase).unwrap());
                }
            }
        }
        for a in &all {
            for b in &all {
                let prod = a.multiply(b).unwrap();
                assert!(close(&dense(&prod), &matmul(&dense(a), &dense(b))), "{a} * {b}");
            }
        }
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        let full = full_mask(n);
        (0..=full, 0..=full, 0u8..4)
            .prop_map(move |(x, z, ph)| PauliOperator::from_parts(n, x, z, ph).unwrap())
    }

    fn arb_hermitian(n: usize) -> impl Strategy<Value = PauliOperator> {
        (prop::collection::vec(0usize..4, n), any::<bool>()).prop_map(|(ls, neg)| {
            let letters: Vec<Letter> =
                ls.iter().map(|&k| [Letter::I, Letter::X, Letter::Y, Letter::Z][k]).collect();
            PauliOperator::from_letters(&letters, neg).unwrap()
        })
    }

    proptest! {
        #[test]
        fn commutes_matches_matrix_commutator(
            (a, b) in (1usize..=5).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n)))
        ) {
            let ab = matmul(&dense(&a), &dense(&b));
            let ba = matmul(&dense(&b), &dense(&a));
            prop_assert_eq!(a.commutes(&b).unwrap(), close(&ab, &ba));
        }

        #[test]
        fn products_are_phase_exact(a in arb_pauli(4), b in arb_pauli(4), c in arb_pauli(4)) {
            let ab = a.multiply(&b).unwrap();
            prop_assert!(close(&dense(&ab), &matmul(&dense(&a), &dense(&b))));
            let left = ab.multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn parse_format_roundtrip(op in arb_hermitian(6)) {
            let text = op.to_string();
            prop_assert_eq!(PauliOperator::parse(&text).unwrap(), op);
        }

        #[test]
        fn hermitian_strings_square_to_identity(op in arb_hermitian(5)) {
            let sq = op.multiply(&op).unwrap();
            prop_assert!(sq.is_identity());
            prop_assert_eq!(sq.sign(), Some(1));
        }
    }
}
