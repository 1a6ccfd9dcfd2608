//! Pauli strings in symplectic (bitmask) form, weighted Pauli sums, the
//! Jordan-Wigner encoding of an FCIDUMP Hamiltonian, and dense matrices for
//! small systems.
//!
//! Spin-orbitals are interleaved: qubit `2p` is orbital `p` spin-alpha and
//! qubit `2p + 1` is orbital `p` spin-beta. In basis-state indices qubit 0 is
//! the least significant bit. In text labels qubit 0 is the leftmost character.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::fcidump::FciDump;

/// Terms with `|h| <` this are dropped by [`PauliSum::simplify`].
pub const PRUNE_TOLERANCE: f64 = 1e-12;
/// Imaginary parts below this are treated as round-off and removed.
pub const IMAG_TOLERANCE: f64 = 1e-10;
/// Default cap on qubits for dense materialization.
pub const DEFAULT_MATRIX_QUBIT_CAP: usize = 14;

type Words = SmallVec<[u64; 2]>;

#[derive(Debug, Error, PartialEq)]
pub enum PauliError {
    #[error("qubit counts differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("{n_qubits} qubits exceeds the dense-matrix cap of {cap}")]
    TooLarge { n_qubits: usize, cap: usize },
    #[error("cannot parse Pauli label {0:?}")]
    BadLabel(String),
    #[error("line {line}: {reason}")]
    BadText { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, PauliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A power of `i`: the phase of a Pauli product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 & 3 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

/// Tensor product of single-qubit Paulis, without phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    x: Words,
    z: Words,
}

fn n_words(n_qubits: usize) -> usize {
    n_qubits.div_ceil(64).max(1)
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        let w = n_words(n_qubits);
        Self {
            n_qubits,
            x: smallvec![0; w],
            z: smallvec![0; w],
        }
    }

    pub fn single(n_qubits: usize, qubit: usize, op: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        s.set(qubit, op);
        s
    }

    /// Builds a string from `X`, `Y`, `Z`, `I` characters, qubit 0 first.
    pub fn from_label(label: &str) -> Result<Self> {
        let mut s = Self::identity(label.chars().count());
        for (q, c) in label.chars().enumerate() {
            let op = match c.to_ascii_uppercase() {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(PauliError::BadLabel(label.to_string())),
            };
            s.set(q, op);
        }
        Ok(s)
    }

    pub fn label(&self) -> String {
        (0..self.n_qubits).map(|q| self.get(q).as_char()).collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn set(&mut self, qubit: usize, op: Pauli) {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        let (w, b) = (qubit / 64, qubit % 64);
        let (xb, zb) = op.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let (w, b) = (qubit / 64, qubit % 64);
        match ((self.x[w] >> b) & 1, (self.z[w] >> b) & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn x_mask(&self) -> &[u64] {
        &self.x
    }

    pub fn z_mask(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Qubits with a non-identity factor, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.x
            .iter()
            .zip(&self.z)
            .enumerate()
            .flat_map(|(w, (x, z))| {
                let mut bits = x | z;
                std::iter::from_fn(move || {
                    (bits != 0).then(|| {
                        let b = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        w * 64 + b
                    })
                })
            })
    }

    /// `self * other = phase * result`.
    pub fn multiply(&self, other: &PauliString) -> Result<(PauliString, Phase)> {
        if self.n_qubits != other.n_qubits {
            return Err(PauliError::SizeMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &PauliString) -> (PauliString, Phase) {
        let mut x = Words::with_capacity(self.x.len());
        let mut z = Words::with_capacity(self.z.len());
        let mut k: i64 = 0;
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let (ax, ay, az) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (bx, by, bz) = (x2 & !z2, x2 & z2, !x2 & z2);
            // XY = iZ, YZ = iX, ZX = iY and the reverse orders give -i.
            let plus = (ax & by) | (ay & bz) | (az & bx);
            let minus = (ay & bx) | (az & by) | (ax & bz);
            k += plus.count_ones() as i64 - minus.count_ones() as i64;
            x.push(x1 ^ x2);
            z.push(z1 ^ z2);
        }
        (
            PauliString {
                n_qubits: self.n_qubits,
                x,
                z,
            },
            Phase(k.rem_euclid(4) as u8),
        )
    }

    /// `<row| P |col>` for computational basis states; `None` when zero.
    fn element(&self, col: u64) -> (u64, Complex64) {
        let (x, z) = (self.x[0], self.z[0]);
        let y_count = (x & z).count_ones();
        let sign = if (col & z).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        (col ^ x, Phase((y_count % 4) as u8).to_complex() * sign)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (sorted) order.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms.get(string).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, string: PauliString, coeff: Complex64) -> Result<()> {
        if string.n_qubits != self.n_qubits {
            return Err(PauliError::SizeMismatch(self.n_qubits, string.n_qubits));
        }
        *self.terms.entry(string).or_default() += coeff;
        Ok(())
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut sum = Self::new(n_qubits);
        for (s, c) in terms {
            sum.add_term(s, c)?;
        }
        sum.simplify();
        Ok(sum)
    }

    /// Drops near-zero terms and round-off imaginary parts.
    pub fn simplify(&mut self) {
        self.terms.retain(|_, c| {
            if c.im.abs() < IMAG_TOLERANCE {
                c.im = 0.0;
            }
            if c.re.abs() < PRUNE_TOLERANCE {
                c.re = 0.0;
            }
            c.norm() >= PRUNE_TOLERANCE
        });
    }

    /// Coefficient of the identity string.
    pub fn constant(&self) -> Complex64 {
        self.coefficient(&PauliString::identity(self.n_qubits))
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im == 0.0)
    }

    /// Matrix of the operator restricted to the given basis states
    /// (bit `q` of a state is qubit `q`). Requires `n_qubits <= 64`.
    pub fn matrix_in_basis(&self, states: &[u64]) -> DMatrix<Complex64> {
        assert!(
            self.n_qubits <= 64,
            "basis-state matrices need at most 64 qubits"
        );
        let index: HashMap<u64, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut m = DMatrix::zeros(states.len(), states.len());
        for (p, c) in &self.terms {
            for (col, &state) in states.iter().enumerate() {
                let (target, amp) = p.element(state);
                if let Some(&row) = index.get(&target) {
                    m[(row, col)] += c * amp;
                }
            }
        }
        m
    }

    /// Dense `2^n x 2^n` matrix; qubit 0 is the least significant bit.
    pub fn to_matrix(&self, qubit_cap: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > qubit_cap.min(30) {
            return Err(PauliError::TooLarge {
                n_qubits: self.n_qubits,
                cap: qubit_cap,
            });
        }
        let states: Vec<u64> = (0..1u64 << self.n_qubits).collect();
        Ok(self.matrix_in_basis(&states))
    }

    /// One line per term: `<re> <label>` for real coefficients, `<re> <im> <label>` otherwise.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, c) in &self.terms {
            if c.im == 0.0 {
                out.push_str(&format!("{:.16e} {}\n", c.re, p.label()));
            } else {
                out.push_str(&format!("{:.16e} {:.16e} {}\n", c.re, c.im, p.label()));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut sum: Option<PauliSum> = None;
        for (n, line) in text.lines().enumerate() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            let bad = |reason: &str| PauliError::BadText {
                line: n + 1,
                reason: reason.into(),
            };
            let (coeff, label) = match toks.as_slice() {
                [re, label] => (
                    Complex64::new(re.parse().map_err(|_| bad("bad coefficient"))?, 0.0),
                    *label,
                ),
                [re, im, label] => (
                    Complex64::new(
                        re.parse().map_err(|_| bad("bad coefficient"))?,
                        im.parse().map_err(|_| bad("bad coefficient"))?,
                    ),
                    *label,
                ),
                _ => return Err(bad("expected `<coeff> <label>`")),
            };
            let string = PauliString::from_label(label)?;
            let target = sum.get_or_insert_with(|| PauliSum::new(string.n_qubits));
            target.add_term(string, coeff)?;
        }
        let mut sum = sum.unwrap_or_else(|| PauliSum::new(0));
        sum.simplify();
        Ok(sum)
    }
}

/// Pauli expansion of a single ladder operator on spin-orbital `p`:
/// `a_p = (X_p + iY_p)/2 Z_{p-1}...Z_0`, and the adjoint.
pub fn ladder_operator(n_qubits: usize, p: usize, dagger: bool) -> [(Complex64, PauliString); 2] {
    let mut x = PauliString::single(n_qubits, p, Pauli::X);
    let mut y = PauliString::single(n_qubits, p, Pauli::Y);
    for q in 0..p {
        x.set(q, Pauli::Z);
        y.set(q, Pauli::Z);
    }
    let sign = if dagger { -0.5 } else { 0.5 };
    [
        (Complex64::new(0.5, 0.0), x),
        (Complex64::new(0.0, sign), y),
    ]
}

type Expansion = Vec<(Complex64, PauliString)>;

fn multiply_expansions(a: &Expansion, b: &Expansion) -> Expansion {
    let mut acc: HashMap<PauliString, Complex64> = HashMap::new();
    for (ca, pa) in a {
        for (cb, pb) in b {
            let (p, phase) = pa.mul_unchecked(pb);
            *acc.entry(p).or_default() += ca * cb * phase.to_complex();
        }
    }
    let mut out: Expansion = acc
        .into_iter()
        .filter(|(_, c)| c.norm() > 1e-15)
        .map(|(p, c)| (c, p))
        .collect();
    out.sort_by(|x, y| x.1.cmp(&y.1));
    out
}

/// `a_p^dagger a_q` on spin-orbitals.
pub fn excitation_operator(n_qubits: usize, p: usize, q: usize) -> Vec<(Complex64, PauliString)> {
    let create = ladder_operator(n_qubits, p, true).to_vec();
    let annihilate = ladder_operator(n_qubits, q, false).to_vec();
    multiply_expansions(&create, &annihilate)
}

/// Spin-orbital index of spatial orbital `p` with spin `s` (0 = alpha).
#[inline]
pub fn spin_orbital(p: usize, s: usize) -> usize {
    2 * p + s
}

/// Jordan-Wigner encoding of
/// `H = e_core + sum h_ij a+_i a_j + 1/2 sum (ij|kl) a+_is a+_kt a_lt a_js`.
///
/// The two-body product is expanded through `E_ij E_kl - delta_jk E_il`
/// with `E_pq = a+_p a_q`, so each term needs only one string product.
pub fn jordan_wigner_hamiltonian(dump: &FciDump) -> PauliSum {
    let norb = dump.norb();
    let nq = 2 * norb;
    let excitations: Vec<Vec<Expansion>> = (0..nq)
        .map(|p| (0..nq).map(|q| excitation_operator(nq, p, q)).collect())
        .collect();

    let mut acc: HashMap<PauliString, Complex64> = HashMap::new();
    let mut add = |coeff: f64, expansion: &Expansion| {
        for (c, p) in expansion {
            *acc.entry(p.clone()).or_default() += c * coeff;
        }
    };

    add(
        dump.e_core(),
        &vec![(Complex64::new(1.0, 0.0), PauliString::identity(nq))],
    );

    for i in 0..norb {
        for j in 0..norb {
            // One-body part plus the contraction left over from the two-body reordering.
            let mut coeff = dump.h1(i, j);
            for k in 0..norb {
                coeff -= 0.5 * dump.h2(i, k, k, j);
            }
            if coeff == 0.0 {
                continue;
            }
            for s in 0..2 {
                add(coeff, &excitations[spin_orbital(i, s)][spin_orbital(j, s)]);
            }
        }
    }

    for i in 0..norb {
        for j in 0..norb {
            for k in 0..norb {
                for l in 0..norb {
                    let v = dump.h2(i, j, k, l);
                    if v == 0.0 {
                        continue;
                    }
                    for s in 0..2 {
                        for t in 0..2 {
                            let left = &excitations[spin_orbital(i, s)][spin_orbital(j, s)];
                            let right = &excitations[spin_orbital(k, t)][spin_orbital(l, t)];
                            for (ca, pa) in left {
                                for (cb, pb) in right {
                                    let (p, phase) = pa.mul_unchecked(pb);
                                    *acc.entry(p).or_default() +=
                                        ca * cb * phase.to_complex() * (0.5 * v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let mut sum = PauliSum {
        n_qubits: nq,
        terms: acc.into_iter().collect(),
    };
    sum.simplify();
    sum
}

/// Basis states (as qubit bitmasks) with the given alpha and beta
/// populations under the interleaved ordering, ascending.
pub fn sector_states(norb: usize, n_alpha: usize, n_beta: usize) -> Vec<u64> {
    assert!(2 * norb <= 64);
    let alpha_mask: u64 = (0..norb).map(|p| 1u64 << (2 * p)).sum();
    let beta_mask = alpha_mask << 1;
    (0..1u64 << (2 * norb))
        .filter(|s| {
            (s & alpha_mask).count_ones() as usize == n_alpha
                && (s & beta_mask).count_ones() as usize == n_beta
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn single_matrix(p: Pauli) -> DMatrix<Complex64> {
        let z = Complex64::new(0.0, 0.0);
        let o = c(1.0);
        let i = Complex64::new(0.0, 1.0);
        match p {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        }
    }

    /// Kronecker-product construction, independent of `matrix_in_basis`.
    fn kron_matrix(p: &PauliString) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, c(1.0));
        // highest qubit is the most significant factor
        for q in (0..p.n_qubits()).rev() {
            m = m.kronecker(&single_matrix(p.get(q)));
        }
        m
    }

    #[test]
    fn single_qubit_table() {
        let x = PauliString::from_label("X").unwrap();
        let z = PauliString::from_label("Z").unwrap();
        let (p, ph) = x.multiply(&z).unwrap();
        assert_eq!(p.label(), "Y");
        assert_eq!(ph, Phase::MINUS_I);
        let (p, ph) = z.multiply(&x).unwrap();
        assert_eq!((p.label().as_str(), ph), ("Y", Phase::I));
    }

    #[test]
    fn involution() {
        for label in ["XYZI", "IIII", "YYYY", "ZXIY"] {
            let p = PauliString::from_label(label).unwrap();
            let (q, ph) = p.multiply(&p).unwrap();
            assert!(q.is_identity());
            assert_eq!(ph, Phase::ONE);
        }
    }

    #[test]
    fn size_mismatch() {
        let a = PauliString::identity(2);
        let b = PauliString::identity(3);
        assert_eq!(a.multiply(&b).unwrap_err(), PauliError::SizeMismatch(2, 3));
    }

    #[test]
    fn matrix_conventions() {
        let z = PauliSum::from_terms(1, [(PauliString::from_label("Z").unwrap(), c(1.0))]).unwrap();
        let m = z.to_matrix(14).unwrap();
        assert_eq!(m[(0, 0)], c(1.0));
        assert_eq!(m[(1, 1)], c(-1.0));
        assert_eq!(m[(0, 1)], c(0.0));

        let x0 =
            PauliSum::from_terms(2, [(PauliString::from_label("XI").unwrap(), c(1.0))]).unwrap();
        let m = x0.to_matrix(14).unwrap();
        for (a, b) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            assert_eq!(m[(a, b)], c(1.0));
        }
        assert_eq!(m.iter().filter(|v| v.norm() > 0.0).count(), 4);
    }

    #[test]
    fn too_large() {
        let s = PauliSum::new(15);
        assert!(matches!(s.to_matrix(14), Err(PauliError::TooLarge { .. })));
    }

    #[test]
    fn number_operator() {
        let mut d = FciDump::new(1, 1, 1).unwrap();
        d.set_h1(0, 0, 0.7).unwrap();
        let h = jordan_wigner_hamiltonian(&d);
        assert_eq!(h.len(), 3);
        assert!((h.constant().re - 0.7).abs() < 1e-15);
        assert!((h.coefficient(&PauliString::from_label("ZI").unwrap()).re + 0.35).abs() < 1e-15);
        assert!((h.coefficient(&PauliString::from_label("IZ").unwrap()).re + 0.35).abs() < 1e-15);
        let n0 = excitation_operator(2, 0, 0);
        assert_eq!(n0.len(), 2);
        assert!(n0
            .iter()
            .any(|(c, p)| p.is_identity() && (c.re - 0.5).abs() < 1e-15));
        assert!(n0
            .iter()
            .any(|(c, p)| p.label() == "ZI" && (c.re + 0.5).abs() < 1e-15));
    }

    #[test]
    fn core_only() {
        let mut d = FciDump::new(2, 2, 0).unwrap();
        d.set_e_core(-3.25);
        let h = jordan_wigner_hamiltonian(&d);
        assert_eq!(h.len(), 1);
        assert_eq!(h.constant(), c(-3.25));
    }

    #[test]
    fn anticommutation_relations() {
        let n = 4;
        let mats: Vec<(DMatrix<Complex64>, DMatrix<Complex64>)> = (0..n)
            .map(|p| {
                let to_m = |dag| {
                    let terms = ladder_operator(n, p, dag).into_iter().map(|(c, s)| (s, c));
                    PauliSum::from_terms(n, terms)
                        .unwrap()
                        .to_matrix(14)
                        .unwrap()
                };
                (to_m(false), to_m(true))
            })
            .collect();
        let id = DMatrix::<Complex64>::identity(1 << n, 1 << n);
        for p in 0..n {
            for q in 0..n {
                let (a, _) = &mats[p];
                let (_, ad) = &mats[q];
                let anti = a * ad + ad * a;
                let expected = if p == q {
                    id.clone()
                } else {
                    DMatrix::zeros(1 << n, 1 << n)
                };
                assert!((anti - expected).norm() < 1e-12, "p={p} q={q}");
                let (b, _) = &mats[q];
                assert!((a * b + b * a).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let text = "0.5 XX\n-0.25 ZI\n1.0 2.0 YI\n";
        let s = PauliSum::from_text(text).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(PauliSum::from_text(&s.to_text()).unwrap(), s);
        assert!(PauliSum::from_text("0.5 XQ\n").is_err());
        assert!(PauliSum::from_text("0.5 XX\n0.1 X\n").is_err());
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(0..4u8, n).prop_map(move |ops| {
            let mut s = PauliString::identity(n);
            for (q, o) in ops.into_iter().enumerate() {
                s.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][o as usize]);
            }
            s
        })
    }

    proptest! {
        #[test]
        fn product_matches_matrix_product(a in arb_pauli(4), b in arb_pauli(4)) {
            let (p, ph) = a.multiply(&b).unwrap();
            let lhs = kron_matrix(&a) * kron_matrix(&b);
            let rhs = kron_matrix(&p) * ph.to_complex();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn basis_matrix_matches_kronecker(a in arb_pauli(3)) {
            let sum = PauliSum::from_terms(3, [(a.clone(), c(1.0))]).unwrap();
            prop_assert!((sum.to_matrix(14).unwrap() - kron_matrix(&a)).norm() < 1e-12);
        }

        #[test]
        fn real_sums_are_hermitian(
            terms in proptest::collection::vec((arb_pauli(3), -1.0f64..1.0), 1..12)
        ) {
            let sum = PauliSum::from_terms(3, terms.into_iter().map(|(p, v)| (p, c(v)))).unwrap();
            let m = sum.to_matrix(14).unwrap();
            prop_assert!((&m - m.adjoint()).norm() < 1e-12);
        }

        #[test]
        fn simplify_is_order_independent_and_idempotent(
            terms in proptest::collection::vec((arb_pauli(3), -1.0f64..1.0), 1..12)
        ) {
            let forward = PauliSum::from_terms(3, terms.iter().cloned().map(|(p, v)| (p, c(v)))).unwrap();
            let backward = PauliSum::from_terms(3, terms.iter().rev().cloned().map(|(p, v)| (p, c(v)))).unwrap();
            prop_assert_eq!(forward.len(), backward.len());
            for ((pa, ca), (pb, cb)) in forward.terms().zip(backward.terms()) {
                prop_assert_eq!(pa, pb);
                prop_assert!((ca - cb).norm() < 1e-12);
            }
            let mut again = forward.clone();
            again.simplify();
            prop_assert_eq!(again, forward);
        }
    }

    #[test]
    fn wide_strings_use_multiple_words() {
        let mut a = PauliString::identity(130);
        a.set(0, Pauli::X);
        a.set(129, Pauli::Z);
        let mut b = PauliString::identity(130);
        b.set(129, Pauli::X);
        let (p, ph) = a.multiply(&b).unwrap();
        assert_eq!(p.get(129), Pauli::Y);
        assert_eq!(p.get(0), Pauli::X);
        assert_eq!(ph, Phase::I);
        assert_eq!(p.support().collect::<Vec<_>>(), vec![0, 129]);
        assert_eq!(p.weight(), 2);
    }
}
