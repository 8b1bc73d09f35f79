//! Stabilizer codes used by the outer (inter-chip) layer and the
//! correctability machinery over erasure-flag error sets.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2;
use crate::pauli::{self, PauliOp};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    Trivial,
    Logical,
    Detectable,
}

/// An [[n, 1, d]] stabilizer code.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerCode {
    pub label: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub generators: Vec<PauliOp>,
    pub logical_x: Vec<PauliOp>,
    pub logical_z: Vec<PauliOp>,
    /// (row, column) of each data qubit, for planar layouts.
    pub coords: Option<Vec<(usize, usize)>>,
}

/// Four-qubit [[4,1,2]] code: generators X1X2X3X4, Z1Z2, Z3Z4.
pub fn four_qubit_code() -> StabilizerCode {
    let n = 4;
    StabilizerCode {
        label: "[[4,1,2]]".into(),
        n,
        k: 1,
        d: 2,
        generators: vec![
            PauliOp::x_on(n, &[0, 1, 2, 3]),
            PauliOp::z_on(n, &[0, 1]),
            PauliOp::z_on(n, &[2, 3]),
        ],
        logical_x: vec![PauliOp::x_on(n, &[0, 1])],
        logical_z: vec![PauliOp::z_on(n, &[0, 2])],
        coords: None,
    }
}

/// Plaquette supports of the seven-qubit code, 0-based.
pub const STEANE_PLAQUETTES: [[usize; 4]; 3] = [[0, 1, 2, 3], [1, 2, 4, 5], [2, 3, 5, 6]];

/// Steane [[7,1,3]] code. X-type generators first, then Z-type, each in
/// plaquette order {1,2,3,4}, {2,3,5,6}, {3,4,6,7}.
pub fn steane_code() -> StabilizerCode {
    let n = 7;
    let all: Vec<usize> = (0..n).collect();
    let mut generators: Vec<PauliOp> = STEANE_PLAQUETTES.iter().map(|s| PauliOp::x_on(n, s)).collect();
    generators.extend(STEANE_PLAQUETTES.iter().map(|s| PauliOp::z_on(n, s)));
    StabilizerCode {
        label: "[[7,1,3]]".into(),
        n,
        k: 1,
        d: 3,
        generators,
        logical_x: vec![PauliOp::x_on(n, &all)],
        logical_z: vec![PauliOp::z_on(n, &all)],
        coords: None,
    }
}

/// Rotated planar surface code on a d×d grid, row-major qubit indexing.
///
/// Logical X runs down column 0 (one qubit in each of the d rows), logical Z
/// along row 0. X-type weight-2 boundary checks sit on the top and bottom
/// edges, Z-type ones on the left and right edges.
pub fn planar_surface_code(d: usize) -> Result<StabilizerCode> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::Parameter(format!("surface-code distance must be odd and ≥ 3, got {d}")));
    }
    let n = d * d;
    if n > pauli::MAX_QUBITS {
        return Err(Error::Parameter(format!("distance {d} needs {n} qubits, above the 64-qubit limit")));
    }
    let idx = |r: usize, c: usize| r * d + c;
    let mut x_checks = Vec::new();
    let mut z_checks = Vec::new();
    // Face (r, c) covers rows r, r+1 and columns c, c+1; r or c may be -1 or
    // d-1 on the boundary, where only the in-grid qubits remain.
    for r in -1..(d as isize) {
        for c in -1..(d as isize) {
            let qubits: Vec<usize> = [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)]
                .iter()
                .filter(|&&(rr, cc)| rr >= 0 && cc >= 0 && rr < d as isize && cc < d as isize)
                .map(|&(rr, cc)| idx(rr as usize, cc as usize))
                .collect();
            let is_x = (r + c).rem_euclid(2) == 0;
            let vertical_edge = c == -1 || c == d as isize - 1;
            let horizontal_edge = r == -1 || r == d as isize - 1;
            match qubits.len() {
                4 => {
                    if is_x {
                        x_checks.push(PauliOp::x_on(n, &qubits));
                    } else {
                        z_checks.push(PauliOp::z_on(n, &qubits));
                    }
                }
                2 if horizontal_edge && is_x => x_checks.push(PauliOp::x_on(n, &qubits)),
                2 if vertical_edge && !is_x => z_checks.push(PauliOp::z_on(n, &qubits)),
                _ => {}
            }
        }
    }
    let mut generators = x_checks;
    generators.extend(z_checks);
    let column: Vec<usize> = (0..d).map(|r| idx(r, 0)).collect();
    let row: Vec<usize> = (0..d).map(|c| idx(0, c)).collect();
    Ok(StabilizerCode {
        label: format!("surface-d{d}"),
        n,
        k: 1,
        d,
        generators,
        logical_x: vec![PauliOp::x_on(n, &column)],
        logical_z: vec![PauliOp::z_on(n, &row)],
        coords: Some((0..n).map(|q| (q / d, q % d)).collect()),
    })
}

/// Named code selector used by the CLI and the protocol registry.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CodeKind {
    FourQubit,
    Steane,
    Surface(usize),
}

impl CodeKind {
    pub fn build(self) -> Result<StabilizerCode> {
        match self {
            CodeKind::FourQubit => Ok(four_qubit_code()),
            CodeKind::Steane => Ok(steane_code()),
            CodeKind::Surface(d) => planar_surface_code(d),
        }
    }

    pub fn name(self) -> String {
        match self {
            CodeKind::FourQubit => "412".into(),
            CodeKind::Steane => "steane".into(),
            CodeKind::Surface(d) => format!("surface{d}"),
        }
    }
}

impl std::str::FromStr for CodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "412" | "4" | "four" | "four-qubit" | "[[4,1,2]]" => Ok(CodeKind::FourQubit),
            "713" | "7" | "steane" | "[[7,1,3]]" => Ok(CodeKind::Steane),
            other => other
                .strip_prefix("surface")
                .map(|d| d.trim_start_matches(['-', '_', 'd']))
                .and_then(|d| d.parse().ok())
                .map(CodeKind::Surface)
                .ok_or_else(|| Error::Parse(format!("unknown code {s:?}"))),
        }
    }
}

impl TryFrom<String> for CodeKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CodeKind> for String {
    fn from(c: CodeKind) -> String {
        c.name()
    }
}

impl std::fmt::Display for CodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDescription {
    pub kind: String,
    pub support: Vec<usize>,
    pub pauli: String,
}

/// JSON-friendly summary used when embedding a code in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDescription {
    pub label: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub generators: Vec<GeneratorDescription>,
    pub logical_x: Vec<String>,
    pub logical_z: Vec<String>,
}

impl StabilizerCode {
    fn rows(&self) -> Vec<u128> {
        self.generators.iter().map(PauliOp::packed).collect()
    }

    /// Checks the structural invariants: commuting, independent generators of
    /// the right count, and well-formed logical operators.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Parameter(format!("{}: {msg}", self.label)));
        if self.generators.len() != self.n - self.k {
            return fail(format!("expected {} generators, found {}", self.n - self.k, self.generators.len()));
        }
        for g in self.generators.iter().chain(&self.logical_x).chain(&self.logical_z) {
            if g.n() != self.n {
                return Err(Error::Dimension { expected: self.n, actual: g.n() });
            }
        }
        for (i, a) in self.generators.iter().enumerate() {
            for b in &self.generators[i + 1..] {
                if !a.commutes_unchecked(b) {
                    return fail(format!("generators {a} and {b} anticommute"));
                }
            }
        }
        if gf2::rank(&self.rows(), u128::MAX) != self.generators.len() {
            return fail("generators are not independent".into());
        }
        for l in self.logical_x.iter().chain(&self.logical_z) {
            if let Some(g) = self.generators.iter().find(|g| !l.commutes_unchecked(g)) {
                return fail(format!("logical {l} anticommutes with {g}"));
            }
            if pauli::in_group(l, &self.generators)? {
                return fail(format!("logical {l} lies in the stabilizer group"));
            }
        }
        for (i, lx) in self.logical_x.iter().enumerate() {
            for (j, lz) in self.logical_z.iter().enumerate() {
                if lx.commutes_unchecked(lz) == (i == j) {
                    return fail(format!("logical pair ({i},{j}) has the wrong commutation"));
                }
            }
        }
        Ok(())
    }

    pub fn is_stabilizer(&self, p: &PauliOp) -> bool {
        gf2::solve(&self.rows(), p.packed(), u128::MAX).is_some()
    }

    pub fn classify(&self, p: &PauliOp) -> Result<ErrorClass> {
        if p.n() != self.n {
            return Err(Error::Dimension { expected: self.n, actual: p.n() });
        }
        if self.generators.iter().any(|g| !p.commutes_unchecked(g)) {
            Ok(ErrorClass::Detectable)
        } else if self.is_stabilizer(p) {
            Ok(ErrorClass::Trivial)
        } else {
            Ok(ErrorClass::Logical)
        }
    }

    /// All 2^(n-k) stabilizer-group elements.
    pub fn stabilizer_group(&self) -> Vec<PauliOp> {
        let m = self.generators.len();
        assert!(m <= 24, "stabilizer group too large to enumerate");
        (0u64..1 << m).map(|c| pauli::combine(self.n, &self.generators, c)).collect()
    }

    /// One representative of each nontrivial logical class: X, Z and XZ.
    pub fn logical_classes(&self) -> Vec<PauliOp> {
        let mut out = Vec::new();
        for (lx, lz) in self.logical_x.iter().zip(&self.logical_z) {
            out.push(*lx);
            out.push(*lz);
            out.push(*lx * *lz);
        }
        out
    }

    /// Smallest weight of any operator in a nontrivial logical class.
    pub fn min_logical_weight(&self) -> usize {
        let group = self.stabilizer_group();
        self.logical_classes()
            .iter()
            .flat_map(|l| group.iter().map(move |s| (*l * *s).weight()))
            .min()
            .unwrap_or(0)
    }

    fn check_indices(&self, erased: &BTreeSet<usize>) -> Result<u64> {
        let mut mask = 0u64;
        for &q in erased {
            if q >= self.n {
                return Err(Error::IndexOutOfRange { index: q, n: self.n });
            }
            mask |= 1 << q;
        }
        Ok(mask)
    }

    /// True iff no nontrivial logical operator is supported entirely on the
    /// erased qubits (0-based indices).
    pub fn erased_set_correctable(&self, erased: &BTreeSet<usize>) -> Result<bool> {
        let mask = self.check_indices(erased)?;
        let outside = !gf2::pack(mask, mask);
        let rows = self.rows();
        for l in self.logical_classes() {
            // Some l·s vanishes outside the erased set.
            if gf2::solve(&rows, l.packed(), outside).is_some() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn description(&self) -> CodeDescription {
        CodeDescription {
            label: self.label.clone(),
            n: self.n,
            k: self.k,
            d: self.d,
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorDescription {
                    kind: if g.is_x_type() {
                        "X".into()
                    } else if g.is_z_type() {
                        "Z".into()
                    } else {
                        "mixed".into()
                    },
                    support: g.support_qubits().iter().map(|q| q + 1).collect(),
                    pauli: g.to_string(),
                })
                .collect(),
            logical_x: self.logical_x.iter().map(ToString::to_string).collect(),
            logical_z: self.logical_z.iter().map(ToString::to_string).collect(),
        }
    }

    /// Rows and columns touched by `support`, for planar layouts.
    pub fn rows_and_columns(&self, support: u64) -> Option<(BTreeSet<usize>, BTreeSet<usize>)> {
        let coords = self.coords.as_ref()?;
        let mut rows = BTreeSet::new();
        let mut cols = BTreeSet::new();
        for (q, &(r, c)) in coords.iter().enumerate() {
            if support >> q & 1 == 1 {
                rows.insert(r);
                cols.insert(c);
            }
        }
        Some((rows, cols))
    }
}

/// A product of identity-containing factor sets: the candidate residual
/// errors an adaptive protocol has to be able to correct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErasureFlagSet {
    n: usize,
    factors: Vec<Vec<PauliOp>>,
}

impl ErasureFlagSet {
    pub fn new(n: usize) -> Self {
        Self { n, factors: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[Vec<PauliOp>] {
        &self.factors
    }

    /// Appends a factor. Duplicates are dropped and the identity is added
    /// if missing. A factor reduced to {I} is not stored.
    pub fn push_factor(&mut self, members: impl IntoIterator<Item = PauliOp>) -> Result<()> {
        let mut seen = HashSet::new();
        let mut factor = vec![PauliOp::identity(self.n)];
        seen.insert(factor[0]);
        for m in members {
            if m.n() != self.n {
                return Err(Error::Dimension { expected: self.n, actual: m.n() });
            }
            if seen.insert(m) {
                factor.push(m);
            }
        }
        if factor.len() > 1 {
            self.factors.push(factor);
        }
        Ok(())
    }

    /// {I, X_q, Y_q, Z_q}
    pub fn push_erased_qubit(&mut self, qubit: usize) -> Result<()> {
        if qubit >= self.n {
            return Err(Error::IndexOutOfRange { index: qubit, n: self.n });
        }
        let n = self.n;
        self.push_factor(pauli::Pauli::ALL.iter().map(|&p| PauliOp::single(n, qubit, p)))
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// Number of cross-factor products, counted with multiplicity.
    pub fn expanded_len(&self) -> usize {
        self.factors.iter().map(Vec::len).product()
    }

    /// Every cross-factor product, in odometer order with the first factor
    /// varying slowest. The identity comes first.
    pub fn expand(&self) -> Vec<PauliOp> {
        let mut out = vec![PauliOp::identity(self.n)];
        for f in &self.factors {
            out = out.iter().flat_map(|a| f.iter().map(move |b| *a * *b)).collect();
        }
        out
    }

    /// Distinct products E1·E2 over pairs of members.
    pub fn pair_products(&self) -> Vec<PauliOp> {
        let mut diff = ErasureFlagSet::new(self.n);
        for f in &self.factors {
            let mut prods = Vec::with_capacity(f.len() * f.len());
            for a in f {
                for b in f {
                    prods.push(*a * *b);
                }
            }
            // Cannot fail: same n.
            diff.push_factor(prods).expect("same dimension");
        }
        let mut all = diff.expand();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Union of the supports of every member.
    pub fn support(&self) -> u64 {
        self.factors.iter().flatten().fold(0, |acc, p| acc | p.support())
    }

    /// Collapses into a single factor holding the distinct members.
    pub fn from_members(n: usize, members: impl IntoIterator<Item = PauliOp>) -> Result<Self> {
        let mut set = ErasureFlagSet::new(n);
        set.push_factor(members)?;
        Ok(set)
    }

    /// Factor-by-factor rendering, e.g. `{I,X1} x {I,Z1Z2}`.
    pub fn render(&self) -> Vec<Vec<String>> {
        self.factors.iter().map(|f| f.iter().map(ToString::to_string).collect()).collect()
    }
}

impl std::fmt::Display for ErasureFlagSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "{{I}}");
        }
        let parts: Vec<String> = self.render().iter().map(|m| format!("{{{}}}", m.join(","))).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Precomputed view of a flag set against a code's generator list:
/// per pair product, the syndrome over all generators and stabilizer
/// membership.
struct PairTable {
    entries: Vec<(u64, bool)>,
}

impl PairTable {
    fn new(code: &StabilizerCode, checks: &[PauliOp], flag: &ErasureFlagSet) -> Self {
        let rows = code.rows();
        let entries = flag
            .pair_products()
            .into_iter()
            .filter(|m| !m.is_identity())
            .map(|m| {
                let syn = pauli::syndrome_mask(&m, checks);
                let stab = gf2::solve(&rows, m.packed(), u128::MAX).is_some();
                (syn, stab)
            })
            .collect();
        Self { entries }
    }

    fn correctable_with(&self, mask: u64) -> bool {
        self.entries.iter().all(|&(syn, stab)| stab || syn & mask != 0)
    }
}

/// Every pair of members either has distinct syndromes on `checks` or
/// differs by a stabilizer.
pub fn flag_set_correctable(code: &StabilizerCode, flag: &ErasureFlagSet, checks: &[PauliOp]) -> Result<bool> {
    if flag.n() != code.n {
        return Err(Error::Dimension { expected: code.n, actual: flag.n() });
    }
    for c in checks {
        if c.n() != code.n {
            return Err(Error::Dimension { expected: code.n, actual: c.n() });
        }
    }
    if checks.len() > 64 {
        return Err(Error::Unsupported("more than 64 checks".into()));
    }
    let table = PairTable::new(code, checks, flag);
    let all = if checks.len() == 64 { u64::MAX } else { (1u64 << checks.len()) - 1 };
    Ok(table.correctable_with(all))
}

/// Indices into `code.generators` of a smallest subset that corrects
/// `flag`. Ties go to smaller total weight, then to the lexicographically
/// first index list.
pub fn minimal_check_indices(code: &StabilizerCode, flag: &ErasureFlagSet) -> Result<Vec<usize>> {
    if flag.n() != code.n {
        return Err(Error::Dimension { expected: code.n, actual: flag.n() });
    }
    let m = code.generators.len();
    if m > 24 {
        return Err(Error::Unsupported(format!("subset search over {m} generators")));
    }
    let table = PairTable::new(code, &code.generators, flag);
    let weights: Vec<usize> = code.generators.iter().map(PauliOp::weight).collect();
    let mut best: Option<(u32, usize, Vec<usize>)> = None;
    for mask in 0u64..(1 << m) {
        let size = mask.count_ones();
        if let Some((bs, _, _)) = &best {
            if size > *bs {
                continue;
            }
        }
        if !table.correctable_with(mask) {
            continue;
        }
        let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let weight = idx.iter().map(|&i| weights[i]).sum();
        let candidate = (size, weight, idx);
        if best.as_ref().is_none_or(|b| candidate < *b) {
            best = Some(candidate);
        }
    }
    best.map(|(_, _, idx)| idx).ok_or(Error::UncorrectableFlagSet)
}

pub fn minimal_stabilizer_subset(code: &StabilizerCode, flag: &ErasureFlagSet) -> Result<Vec<PauliOp>> {
    Ok(minimal_check_indices(code, flag)?.into_iter().map(|i| code.generators[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    fn p(n: usize, s: &str) -> PauliOp {
        PauliOp::parse(n, s).unwrap()
    }

    fn erased(qs: &[usize]) -> BTreeSet<usize> {
        qs.iter().copied().collect()
    }

    #[test]
    fn four_qubit_code_is_valid_with_distance_two() {
        let code = four_qubit_code();
        code.validate().unwrap();
        assert_eq!(code.min_logical_weight(), 2);
    }

    #[test]
    fn steane_code_is_valid_with_distance_three() {
        let code = steane_code();
        code.validate().unwrap();
        assert_eq!(code.min_logical_weight(), 3);
        for a in STEANE_PLAQUETTES {
            for b in STEANE_PLAQUETTES {
                let overlap = a.iter().filter(|q| b.contains(q)).count();
                assert!(overlap == 4 || overlap == 2);
            }
        }
    }

    #[test]
    fn surface_code_d3_shape() {
        let code = planar_surface_code(3).unwrap();
        code.validate().unwrap();
        assert_eq!(code.n, 9);
        assert_eq!(code.generators.len(), 8);
        assert_eq!(code.generators.iter().filter(|g| g.is_x_type()).count(), 4);
        assert_eq!(code.min_logical_weight(), 3);
        for g in &code.generators {
            assert!(g.weight() == 2 || g.weight() == 4);
            let (rows, cols) = code.rows_and_columns(g.support()).unwrap();
            assert!(rows.len() <= 2 && cols.len() <= 2);
            if g.is_z_type() {
                assert_eq!(rows.len(), 2, "Z plaquette {g} spans two rows");
            }
        }
        let (rows, _) = code.rows_and_columns(code.logical_x[0].support()).unwrap();
        assert_eq!(rows.len(), 3);
    }

    #[test]
    fn surface_code_d5_is_valid() {
        let code = planar_surface_code(5).unwrap();
        code.validate().unwrap();
        assert_eq!(code.generators.len(), 24);
    }

    #[test]
    fn surface_code_rejects_bad_distance() {
        assert!(planar_surface_code(4).is_err());
        assert!(planar_surface_code(1).is_err());
        assert!(planar_surface_code(9).is_err());
    }

    #[test]
    fn classify_examples() {
        let code = four_qubit_code();
        assert_eq!(code.classify(&PauliOp::identity(4)).unwrap(), ErrorClass::Trivial);
        assert_eq!(code.classify(&p(4, "X1X2")).unwrap(), ErrorClass::Logical);
        assert_eq!(code.classify(&p(4, "X1")).unwrap(), ErrorClass::Detectable);
        assert!(code.classify(&PauliOp::identity(5)).is_err());
    }

    #[test]
    fn classify_matches_brute_force_group() {
        for code in [four_qubit_code(), steane_code(), planar_surface_code(3).unwrap()] {
            let group: HashSet<PauliOp> = code.stabilizer_group().into_iter().collect();
            let mut logical: HashSet<PauliOp> = HashSet::new();
            for l in code.logical_classes() {
                for s in &group {
                    logical.insert(l * *s);
                }
            }
            // Sample operators deterministically across the space.
            let mut state = 0x9e3779b97f4a7c15u64;
            for _ in 0..3000 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let mask = (1u64 << code.n) - 1;
                let x = (state >> 7) & mask;
                let z = (state >> 29) & mask;
                let op = PauliOp::from_bits(code.n, x, z).unwrap();
                let expected = if group.contains(&op) {
                    ErrorClass::Trivial
                } else if logical.contains(&op) {
                    ErrorClass::Logical
                } else {
                    ErrorClass::Detectable
                };
                assert_eq!(code.classify(&op).unwrap(), expected, "{op}");
            }
        }
    }

    #[test]
    fn erased_set_examples() {
        let c4 = four_qubit_code();
        assert!(c4.erased_set_correctable(&erased(&[0])).unwrap());
        assert!(!c4.erased_set_correctable(&erased(&[0, 1])).unwrap());
        assert!(c4.erased_set_correctable(&erased(&[4])).is_err());
        let c7 = steane_code();
        for pair in (0..7).combinations(2) {
            assert!(c7.erased_set_correctable(&erased(&pair)).unwrap());
        }
    }

    #[test]
    fn erased_set_threshold_is_the_distance() {
        for code in [four_qubit_code(), steane_code(), planar_surface_code(3).unwrap()] {
            let mut some_d_fails = false;
            for size in 0..=code.d {
                for subset in (0..code.n).combinations(size) {
                    let ok = code.erased_set_correctable(&erased(&subset)).unwrap();
                    if size < code.d {
                        assert!(ok, "{} {:?}", code.label, subset);
                    } else if !ok {
                        some_d_fails = true;
                    }
                }
            }
            assert!(some_d_fails, "{}", code.label);
        }
    }

    #[test]
    fn erased_set_correctability_is_monotone() {
        let code = steane_code();
        for size in 1..=7 {
            for subset in (0..7).combinations(size) {
                if code.erased_set_correctable(&erased(&subset)).unwrap() {
                    for drop in 0..subset.len() {
                        let mut smaller = subset.clone();
                        smaller.remove(drop);
                        assert!(code.erased_set_correctable(&erased(&smaller)).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn flag_set_expansion_size_and_identity() {
        let mut e = ErasureFlagSet::new(7);
        e.push_factor([p(7, "X1")]).unwrap();
        e.push_erased_qubit(2).unwrap();
        e.push_factor([p(7, "Z1Z2")]).unwrap();
        assert_eq!(e.expanded_len(), 16);
        let members = e.expand();
        assert_eq!(members.len(), 16);
        assert!(members[0].is_identity());
        assert_eq!(e.to_string(), "{I,X1} x {I,X3,Y3,Z3} x {I,Z1Z2}");
    }

    #[test]
    fn flag_set_correctable_examples() {
        let code = four_qubit_code();
        assert!(flag_set_correctable(&code, &ErasureFlagSet::new(4), &[]).unwrap());
        let mut e = ErasureFlagSet::new(4);
        e.push_erased_qubit(0).unwrap();
        assert!(flag_set_correctable(&code, &e, &[p(4, "X1X2X3X4"), p(4, "Z1Z2")]).unwrap());
        assert!(!flag_set_correctable(&code, &e, &[p(4, "Z1Z2")]).unwrap());
    }

    #[test]
    fn minimal_subset_examples() {
        let c4 = four_qubit_code();
        assert!(minimal_stabilizer_subset(&c4, &ErasureFlagSet::new(4)).unwrap().is_empty());
        let mut e = ErasureFlagSet::new(4);
        e.push_erased_qubit(0).unwrap();
        assert_eq!(
            minimal_stabilizer_subset(&c4, &e).unwrap(),
            vec![p(4, "X1X2X3X4"), p(4, "Z1Z2")]
        );

        let c7 = steane_code();
        let mut e = ErasureFlagSet::new(7);
        e.push_factor([p(7, "X1")]).unwrap();
        e.push_erased_qubit(2).unwrap();
        e.push_factor([p(7, "Z1Z2")]).unwrap();
        let got: HashSet<PauliOp> = minimal_stabilizer_subset(&c7, &e).unwrap().into_iter().collect();
        let want: HashSet<PauliOp> = ["X1X2X3X4", "X2X3X5X6", "Z2Z3Z5Z6", "Z1Z2Z3Z4"]
            .iter()
            .map(|s| p(7, s))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn minimal_subset_is_minimal_by_exhaustion() {
        let code = steane_code();
        for (a, b) in (0..7).tuple_combinations() {
            let mut e = ErasureFlagSet::new(7);
            e.push_erased_qubit(a).unwrap();
            e.push_erased_qubit(b).unwrap();
            let chosen = minimal_stabilizer_subset(&code, &e).unwrap();
            assert!(flag_set_correctable(&code, &e, &chosen).unwrap());
            for smaller in code.generators.iter().copied().combinations(chosen.len() - 1) {
                assert!(!flag_set_correctable(&code, &e, &smaller).unwrap());
            }
        }
    }

    #[test]
    fn minimal_subset_reports_uncorrectable() {
        let code = four_qubit_code();
        let mut e = ErasureFlagSet::new(4);
        e.push_erased_qubit(0).unwrap();
        e.push_erased_qubit(1).unwrap();
        assert!(matches!(minimal_stabilizer_subset(&code, &e), Err(Error::UncorrectableFlagSet)));
    }

    #[test]
    fn code_kind_parsing() {
        assert_eq!("412".parse::<CodeKind>().unwrap(), CodeKind::FourQubit);
        assert_eq!("steane".parse::<CodeKind>().unwrap(), CodeKind::Steane);
        assert_eq!("surface-d3".parse::<CodeKind>().unwrap(), CodeKind::Surface(3));
        assert_eq!("surface5".parse::<CodeKind>().unwrap(), CodeKind::Surface(5));
        assert!("toric".parse::<CodeKind>().is_err());
        for k in [CodeKind::FourQubit, CodeKind::Steane, CodeKind::Surface(3)] {
            assert_eq!(k.name().parse::<CodeKind>().unwrap(), k);
        }
    }

    #[test]
    fn description_uses_one_based_supports() {
        let d = steane_code().description();
        assert_eq!(d.generators[0].support, vec![1, 2, 3, 4]);
        assert_eq!(d.generators[3].kind, "Z");
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"n\":7"));
    }
}
