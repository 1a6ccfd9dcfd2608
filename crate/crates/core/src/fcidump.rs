//! FCIDUMP integral files.
//!
//! Integrals are over spatial orbitals in chemist notation `(ij|kl)`. The
//! two-electron table is stored once per 8-fold permutation orbit, so every
//! lookup goes through [`canonical_pair`]/[`canonical_quad`].
//!
//! Text indices are 1-based; everything in memory is 0-based.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

/// Tolerance for symmetry-equivalent duplicate entries in a file (Hartree).
pub const DUPLICATE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FcidumpError {
    #[error("missing header field {0}")]
    MissingHeaderField(&'static str),
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("line {line}: index {index} outside 0..={norb}")]
    IndexOutOfRange {
        line: usize,
        index: i64,
        norb: usize,
    },
    #[error("index ({i},{j},{k},{l}) outside norb={norb}")]
    BadIndex {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        norb: usize,
    },
    #[error("line {line}: malformed integral line: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error(
        "line {line}: value {new} conflicts with earlier {old} for a symmetry-equivalent index"
    )]
    ConflictingDuplicate { line: usize, old: f64, new: f64 },
    #[error("non-finite integral value on line {0}")]
    NonFinite(usize),
    #[error("unsupported FCIDUMP variant: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FcidumpError>;

/// Triangular index of the unordered pair `{i, j}`.
#[inline]
pub fn canonical_pair(i: usize, j: usize) -> usize {
    let (a, b) = if i >= j { (i, j) } else { (j, i) };
    a * (a + 1) / 2 + b
}

/// Index of the 8-fold orbit containing `(ij|kl)`.
#[inline]
pub fn canonical_quad(i: usize, j: usize, k: usize, l: usize) -> usize {
    canonical_pair(canonical_pair(i, j), canonical_pair(k, l))
}

/// Restricted (spatial-orbital) electronic-structure Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FciDump {
    norb: usize,
    nelec: usize,
    ms2: i64,
    orbsym: Vec<i64>,
    isym: i64,
    e_core: f64,
    /// Full `norb x norb` row-major table, kept symmetric.
    h1: Vec<f64>,
    /// One slot per permutation orbit.
    h2: Vec<f64>,
}

impl FciDump {
    /// Zero Hamiltonian with the given sizes. Validates the electron-count invariants.
    pub fn new(norb: usize, nelec: usize, ms2: i64) -> Result<Self> {
        validate_sizes(norb, nelec, ms2)?;
        let npair = norb * (norb + 1) / 2;
        Ok(Self {
            norb,
            nelec,
            ms2,
            orbsym: vec![1; norb],
            isym: 1,
            e_core: 0.0,
            h1: vec![0.0; norb * norb],
            h2: vec![0.0; npair * (npair + 1) / 2],
        })
    }

    pub fn norb(&self) -> usize {
        self.norb
    }

    pub fn nelec(&self) -> usize {
        self.nelec
    }

    pub fn ms2(&self) -> i64 {
        self.ms2
    }

    pub fn n_alpha(&self) -> usize {
        ((self.nelec as i64 + self.ms2) / 2) as usize
    }

    pub fn n_beta(&self) -> usize {
        ((self.nelec as i64 - self.ms2) / 2) as usize
    }

    pub fn orbsym(&self) -> &[i64] {
        &self.orbsym
    }

    pub fn isym(&self) -> i64 {
        self.isym
    }

    pub fn e_core(&self) -> f64 {
        self.e_core
    }

    pub fn set_e_core(&mut self, value: f64) {
        self.e_core = value;
    }

    #[inline]
    pub fn h1(&self, i: usize, j: usize) -> f64 {
        self.h1[i * self.norb + j]
    }

    pub fn set_h1(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.check(i, j, 0, 0)?;
        self.h1[i * self.norb + j] = value;
        self.h1[j * self.norb + i] = value;
        Ok(())
    }

    /// Checked two-electron lookup; unset entries read as zero.
    pub fn h2_at(&self, i: usize, j: usize, k: usize, l: usize) -> Result<f64> {
        self.check(i, j, k, l)?;
        Ok(self.h2(i, j, k, l))
    }

    /// Unchecked two-electron lookup. Panics if an index is out of range.
    #[inline]
    pub fn h2(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        debug_assert!(i < self.norb && j < self.norb && k < self.norb && l < self.norb);
        self.h2[canonical_quad(i, j, k, l)]
    }

    /// Sets the whole permutation orbit of `(ij|kl)`.
    pub fn set_h2(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) -> Result<()> {
        self.check(i, j, k, l)?;
        self.h2[canonical_quad(i, j, k, l)] = value;
        Ok(())
    }

    pub fn set_orbsym(&mut self, orbsym: Vec<i64>) -> Result<()> {
        if orbsym.len() != self.norb {
            return Err(FcidumpError::InvalidHeader(format!(
                "ORBSYM has {} entries, expected {}",
                orbsym.len(),
                self.norb
            )));
        }
        self.orbsym = orbsym;
        Ok(())
    }

    pub fn set_isym(&mut self, isym: i64) {
        self.isym = isym;
    }

    /// Iterates canonical two-electron entries `(i, j, k, l, value)` with
    /// `i >= j`, `k >= l` and `pair(i,j) >= pair(k,l)`, including zeros.
    pub fn h2_canonical(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        let n = self.norb;
        (0..n).flat_map(move |i| {
            (0..=i).flat_map(move |j| {
                let ij = canonical_pair(i, j);
                (0..n).flat_map(move |k| {
                    (0..=k).filter_map(move |l| {
                        let kl = canonical_pair(k, l);
                        (kl <= ij).then(|| (i, j, k, l, self.h2(i, j, k, l)))
                    })
                })
            })
        })
    }

    fn check(&self, i: usize, j: usize, k: usize, l: usize) -> Result<()> {
        let n = self.norb;
        if i >= n || j >= n || k >= n || l >= n {
            return Err(FcidumpError::BadIndex {
                i,
                j,
                k,
                l,
                norb: n,
            });
        }
        Ok(())
    }
}

fn validate_sizes(norb: usize, nelec: usize, ms2: i64) -> Result<()> {
    if norb == 0 {
        return Err(FcidumpError::InvalidHeader(
            "NORB must be at least 1".into(),
        ));
    }
    if nelec > 2 * norb {
        return Err(FcidumpError::InvalidHeader(format!(
            "NELEC={nelec} exceeds 2*NORB={}",
            2 * norb
        )));
    }
    if ms2.unsigned_abs() as usize > nelec || (nelec as i64 + ms2) % 2 != 0 {
        return Err(FcidumpError::InvalidHeader(format!(
            "MS2={ms2} inconsistent with NELEC={nelec}"
        )));
    }
    let n_alpha = (nelec as i64 + ms2) / 2;
    let n_beta = (nelec as i64 - ms2) / 2;
    if n_alpha as usize > norb || n_beta as usize > norb {
        return Err(FcidumpError::InvalidHeader(format!(
            "spin populations ({n_alpha}, {n_beta}) do not fit in {norb} orbitals"
        )));
    }
    Ok(())
}

/// Parses a Fortran-style real, accepting `D` exponent markers.
fn parse_real(token: &str) -> Option<f64> {
    if token.contains(['d', 'D']) {
        token.replace(['d', 'D'], "E").parse().ok()
    } else {
        token.parse().ok()
    }
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i64,
    orbsym: Option<Vec<i64>>,
    isym: i64,
}

/// Splits the namelist into `(KEY, values)` groups.
fn header_items(text: &str) -> Vec<(String, Vec<String>)> {
    let spaced = text.replace('=', " = ").replace(',', " ");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let mut items: Vec<(String, Vec<String>)> = Vec::new();
    let mut idx = 0;
    while idx < tokens.len() {
        if idx + 1 < tokens.len() && tokens[idx + 1] == "=" {
            items.push((tokens[idx].to_ascii_uppercase(), Vec::new()));
            idx += 2;
            continue;
        }
        if let Some(last) = items.last_mut() {
            last.1.push(tokens[idx].to_string());
        }
        idx += 1;
    }
    items
}

fn parse_header(text: &str) -> Result<Header> {
    let mut norb = None;
    let mut nelec = None;
    let mut ms2 = 0i64;
    let mut orbsym = None;
    let mut isym = 1i64;
    let int = |key: &str, vals: &[String]| -> Result<i64> {
        vals.first()
            .and_then(|v| v.parse::<i64>().ok())
            .ok_or_else(|| FcidumpError::InvalidHeader(format!("{key} needs an integer value")))
    };
    for (key, vals) in header_items(text) {
        match key.as_str() {
            "NORB" => {
                let v = int("NORB", &vals)?;
                norb = Some(usize::try_from(v).map_err(|_| {
                    FcidumpError::InvalidHeader(format!("NORB={v} must be positive"))
                })?);
            }
            "NELEC" => {
                let v = int("NELEC", &vals)?;
                nelec = Some(usize::try_from(v).map_err(|_| {
                    FcidumpError::InvalidHeader(format!("NELEC={v} must be non-negative"))
                })?);
            }
            "MS2" => ms2 = int("MS2", &vals)?,
            "ISYM" => isym = int("ISYM", &vals)?,
            "ORBSYM" => {
                let syms = vals
                    .iter()
                    .map(|v| v.parse::<i64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| {
                        FcidumpError::InvalidHeader("ORBSYM entries must be integers".into())
                    })?;
                orbsym = Some(syms);
            }
            "IUHF" | "UHF" if int(&key, &vals)? != 0 => {
                return Err(FcidumpError::Unsupported(
                    "unrestricted (IUHF) integrals".into(),
                ));
            }
            _ => {}
        }
    }
    Ok(Header {
        norb: norb.ok_or(FcidumpError::MissingHeaderField("NORB"))?,
        nelec: nelec.ok_or(FcidumpError::MissingHeaderField("NELEC"))?,
        ms2,
        orbsym,
        isym,
    })
}

/// Finds the namelist `&FCI ... &END` (or `/`) and returns it together with
/// the byte offset where the integral body starts.
fn split_namelist(text: &str) -> Result<(&str, &str)> {
    let start = text
        .find('&')
        .filter(|&p| {
            text[p + 1..]
                .trim_start()
                .to_ascii_uppercase()
                .starts_with("FCI")
        })
        .ok_or(FcidumpError::MissingHeaderField("&FCI"))?;
    let rest = &text[start..];
    let upper = rest.to_ascii_uppercase();
    let amp_end = upper.find("&END");
    let slash = rest.find('/');
    let (head_end, body_start) = match (amp_end, slash) {
        (Some(a), Some(s)) if s < a => (s, s + 1),
        (Some(a), _) => (a, a + 4),
        (None, Some(s)) => (s, s + 1),
        (None, None) => {
            return Err(FcidumpError::InvalidHeader(
                "namelist terminator not found".into(),
            ))
        }
    };
    // skip "&FCI"
    let head = &rest[1..head_end];
    let head = head.trim_start();
    let head = &head[3..];
    Ok((head, &rest[body_start..]))
}

/// Parses FCIDUMP text.
pub fn parse_fcidump(text: &str) -> Result<FciDump> {
    let (head, body) = split_namelist(text)?;
    let header = parse_header(head)?;
    let mut dump = FciDump::new(header.norb, header.nelec, header.ms2)?;
    if let Some(orbsym) = header.orbsym {
        dump.set_orbsym(orbsym)?;
    }
    dump.set_isym(header.isym);

    let norb = dump.norb;
    let mut h1_seen = vec![false; dump.h1.len()];
    let mut h2_seen = vec![false; dump.h2.len()];
    let mut core_seen = false;
    // Line numbers are reported relative to the whole file.
    let body_offset = text.len() - body.len();
    let first_line = text[..body_offset].matches('\n').count() + 1;

    for (n, raw) in body.lines().enumerate() {
        let line = first_line + n;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 5 {
            return Err(FcidumpError::MalformedLine {
                line,
                reason: format!("expected 5 tokens, found {}", tokens.len()),
            });
        }
        let value = parse_real(tokens[0]).ok_or_else(|| FcidumpError::MalformedLine {
            line,
            reason: format!("cannot parse value {:?}", tokens[0]),
        })?;
        if !value.is_finite() {
            return Err(FcidumpError::NonFinite(line));
        }
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&tokens[1..]) {
            let v: i64 = tok.parse().map_err(|_| FcidumpError::MalformedLine {
                line,
                reason: format!("cannot parse index {tok:?}"),
            })?;
            if v < 0 || v as usize > norb {
                return Err(FcidumpError::IndexOutOfRange {
                    line,
                    index: v,
                    norb,
                });
            }
            *slot = v as usize;
        }
        let [i, j, k, l] = idx;
        let record = |seen: &mut bool, slot: &mut f64| -> Result<()> {
            if *seen && (*slot - value).abs() > DUPLICATE_TOLERANCE {
                return Err(FcidumpError::ConflictingDuplicate {
                    line,
                    old: *slot,
                    new: value,
                });
            }
            *seen = true;
            *slot = value;
            Ok(())
        };
        match (i, j, k, l) {
            (0, 0, 0, 0) => record(&mut core_seen, &mut dump.e_core)?,
            (i, j, 0, 0) if i > 0 && j > 0 => {
                let (a, b) = (i - 1, j - 1);
                let pos = a.max(b) * norb + a.min(b);
                record(&mut h1_seen[pos], &mut dump.h1[pos])?;
                dump.h1[a.min(b) * norb + a.max(b)] = dump.h1[pos];
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                let pos = canonical_quad(i - 1, j - 1, k - 1, l - 1);
                record(&mut h2_seen[pos], &mut dump.h2[pos])?;
            }
            // Orbital-energy lines `e i 0 0 0` carry no Hamiltonian data.
            (_, 0, 0, 0) => {}
            _ => {
                return Err(FcidumpError::MalformedLine {
                    line,
                    reason: format!("index pattern ({i},{j},{k},{l}) is not an integral"),
                })
            }
        }
    }
    Ok(dump)
}

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<FciDump> {
    let text = std::fs::read_to_string(path)?;
    parse_fcidump(&text)
}

/// Serializes to FCIDUMP text. Values use 17 significant digits so that
/// parsing the output reproduces the stored table bit for bit.
pub fn write_fcidump(dump: &FciDump) -> String {
    let mut out = String::new();
    let orbsym = dump
        .orbsym
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let _ = writeln!(
        out,
        " &FCI NORB={},NELEC={},MS2={},",
        dump.norb, dump.nelec, dump.ms2
    );
    let _ = writeln!(out, "  ORBSYM={orbsym},");
    let _ = writeln!(out, "  ISYM={},", dump.isym);
    let _ = writeln!(out, " &END");
    for (i, j, k, l, v) in dump.h2_canonical() {
        if v != 0.0 {
            let _ = writeln!(
                out,
                "{v:>25.16e} {:>4} {:>4} {:>4} {:>4}",
                i + 1,
                j + 1,
                k + 1,
                l + 1
            );
        }
    }
    for i in 0..dump.norb {
        for j in 0..=i {
            let v = dump.h1(i, j);
            if v != 0.0 {
                let _ = writeln!(
                    out,
                    "{v:>25.16e} {:>4} {:>4} {:>4} {:>4}",
                    i + 1,
                    j + 1,
                    0,
                    0
                );
            }
        }
    }
    let _ = writeln!(
        out,
        "{:>25.16e} {:>4} {:>4} {:>4} {:>4}",
        dump.e_core, 0, 0, 0, 0
    );
    out
}

pub fn write_fcidump_file(dump: &FciDump, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_fcidump(dump))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "&FCI NORB=2,NELEC=2,MS2=0,&END\n 1.0 1 1 0 0\n";

    #[test]
    fn minimal_file() {
        let d = parse_fcidump(MINIMAL).unwrap();
        assert_eq!((d.norb(), d.nelec(), d.ms2()), (2, 2, 0));
        assert_eq!(d.h1(0, 0), 1.0);
        assert_eq!(d.h1(0, 1), 0.0);
        assert_eq!(d.h1(1, 1), 0.0);
        assert_eq!(d.e_core(), 0.0);
        assert!(d.h2.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn core_energy_line() {
        let d = parse_fcidump("&FCI NORB=2,NELEC=2 &END\n-0.5 0 0 0 0\n").unwrap();
        assert_eq!(d.e_core(), -0.5);
    }

    #[test]
    fn slash_terminator_and_fortran_exponents() {
        let text = " &FCI NORB= 2 , NELEC =2, MS2=0,\n ORBSYM=1,1,\n ISYM=1\n /\n 0.5D+00 1 1 1 1\n 2.5d-1 2 1 0 0\n -1.0E+00 0 0 0 0\n";
        let d = parse_fcidump(text).unwrap();
        assert_eq!(d.h2(0, 0, 0, 0), 0.5);
        assert_eq!(d.h1(0, 1), 0.25);
        assert_eq!(d.h1(1, 0), 0.25);
        assert_eq!(d.e_core(), -1.0);
        assert_eq!(d.orbsym(), &[1, 1]);
    }

    #[test]
    fn orbital_energy_lines_are_ignored() {
        let d = parse_fcidump("&FCI NORB=2,NELEC=2 &END\n-0.6 1 0 0 0\n0.1 2 2 0 0\n").unwrap();
        assert_eq!(d.h1(1, 1), 0.1);
    }

    #[test]
    fn missing_fields() {
        assert!(matches!(
            parse_fcidump("&FCI NELEC=2 &END\n"),
            Err(FcidumpError::MissingHeaderField("NORB"))
        ));
        assert!(matches!(
            parse_fcidump("&FCI NORB=2 &END\n"),
            Err(FcidumpError::MissingHeaderField("NELEC"))
        ));
        assert!(matches!(
            parse_fcidump("1.0 1 1 0 0\n"),
            Err(FcidumpError::MissingHeaderField("&FCI"))
        ));
    }

    #[test]
    fn bad_lines() {
        let hdr = "&FCI NORB=2,NELEC=2 &END\n";
        assert!(matches!(
            parse_fcidump(&format!("{hdr}1.0 3 1 0 0\n")),
            Err(FcidumpError::IndexOutOfRange { index: 3, .. })
        ));
        assert!(matches!(
            parse_fcidump(&format!("{hdr}1.0 1 1 0\n")),
            Err(FcidumpError::MalformedLine { line: 2, .. })
        ));
        assert!(matches!(
            parse_fcidump(&format!("{hdr}abc 1 1 0 0\n")),
            Err(FcidumpError::MalformedLine { .. })
        ));
        assert!(matches!(
            parse_fcidump(&format!("{hdr}1.0 1 1 0 2\n")),
            Err(FcidumpError::MalformedLine { .. })
        ));
    }

    #[test]
    fn conflicting_duplicates() {
        let hdr = "&FCI NORB=2,NELEC=2 &END\n";
        let ok = parse_fcidump(&format!("{hdr}0.3 1 1 2 2\n0.3 2 2 1 1\n")).unwrap();
        assert_eq!(ok.h2(0, 0, 1, 1), 0.3);
        assert!(matches!(
            parse_fcidump(&format!("{hdr}0.3 1 1 2 2\n0.31 2 2 1 1\n")),
            Err(FcidumpError::ConflictingDuplicate { line: 3, .. })
        ));
        assert!(matches!(
            parse_fcidump(&format!("{hdr}0.3 1 2 0 0\n0.4 2 1 0 0\n")),
            Err(FcidumpError::ConflictingDuplicate { .. })
        ));
    }

    #[test]
    fn invalid_electron_counts() {
        assert!(FciDump::new(2, 5, 0).is_err());
        assert!(FciDump::new(2, 2, 1).is_err());
        assert!(FciDump::new(2, 2, 4).is_err());
        assert!(FciDump::new(0, 0, 0).is_err());
        assert!(FciDump::new(2, 3, 1).is_ok());
        assert!(FciDump::new(2, 4, 2).is_err());
    }

    #[test]
    fn unrestricted_rejected() {
        assert!(matches!(
            parse_fcidump("&FCI NORB=2,NELEC=2,IUHF=1 &END\n"),
            Err(FcidumpError::Unsupported(_))
        ));
    }

    #[test]
    fn h2_symmetry_lookup() {
        let mut d = FciDump::new(2, 2, 0).unwrap();
        d.set_h2(0, 0, 1, 1, 0.3).unwrap();
        assert_eq!(d.h2_at(1, 1, 0, 0).unwrap(), 0.3);
        assert_eq!(d.h2_at(0, 1, 0, 1).unwrap(), 0.0);
        assert!(matches!(
            d.h2_at(0, 0, 0, 2),
            Err(FcidumpError::BadIndex { .. })
        ));
    }

    #[test]
    fn zero_core_energy_is_written() {
        let d = parse_fcidump(MINIMAL).unwrap();
        let text = write_fcidump(&d);
        let last = text.lines().last().unwrap();
        let toks: Vec<&str> = last.split_whitespace().collect();
        assert_eq!(&toks[1..], &["0", "0", "0", "0"]);
        assert_eq!(parse_real(toks[0]), Some(0.0));
        assert_eq!(parse_fcidump(&text).unwrap(), d);
    }

    #[test]
    fn canonical_iteration_covers_each_orbit_once() {
        let d = FciDump::new(3, 2, 0).unwrap();
        let orbits: Vec<usize> = d
            .h2_canonical()
            .map(|(i, j, k, l, _)| canonical_quad(i, j, k, l))
            .collect();
        let mut sorted = orbits.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), orbits.len());
        assert_eq!(sorted.len(), d.h2.len());
    }
}
