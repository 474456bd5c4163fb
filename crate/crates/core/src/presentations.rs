//! Presentations of the tower `H_0 < G_0 < H_1 < G_1 < …`.
//!
//! * `H_0 = F_2 × F_2 × F_2` on the bases `a[0][1][·]`, `a[0][2][·]`, `y[·]`.
//! * `G_n` is the cone of `H_n` over a product edge group `F_{2^{n+1}} × F_2`:
//!   each stable letter `u[n][s]` conjugates every edge-group generator `g` to
//!   `φ(g)` (`u g u^-1 = φ(g)`).
//! * `H_n` attaches suspended wings to `2^n` subgroups `F_2 ⋊ F_4` of `G_{n-1}`:
//!   the stable letters `a[n][i][·]` act by `φ` on the `F_2` basis and trivially
//!   on the ordered `F_4` basis `{u_{n-1}, 𝓛_n(i)}`.
//!
//! Besides the group relators, each level carries the relators of its cell
//! structure ("cell relators"): the diagonal letters
//! `d[k][j][s][t] = u[k-1][t]^-1 a[k][j][s]`, their triangle relators, the
//! commutations with `𝓛_{k+1}(j + 2^k)`, the coning of same-coordinate diagonals,
//! and copies of group relators with product vectors replaced by diagonal letters.
//! Cell relators are consequences of the group relators; they are the 2-cells
//! of the subdivided complexes built in [`crate::complexes`].
//!
//! The convention `u_{-1} = a_{01} a_{02}^-1` is built in, so the vector
//! `u_{-1}^-1 a_{01}` is simply `a_{02}`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::growth::phi_image;
use crate::words::{Gen, GenVector, Letter, Word};

/// Errors raised while building or querying presentations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("level {level} exceeds the configured depth {max}")]
    DepthExceeded { level: String, max: u32 },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("not a member of the target subgroup: {0}")]
    NotMember(String),
    #[error("cannot parse level {0:?}; expected H<n> or G<n>")]
    BadLevel(String),
}

impl PresentationError {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            PresentationError::DepthExceeded { .. } => "DepthExceeded",
            PresentationError::IndexOutOfRange(_) => "IndexOutOfRange",
            PresentationError::NotMember(_) => "NotMember",
            PresentationError::BadLevel(_) => "UsageError",
        }
    }
}

/// `H` (suspended wings) or `G` (cone).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum GroupKind {
    H,
    G,
}

/// A row of the tower: `H_n` or `G_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct LevelTag {
    pub kind: GroupKind,
    pub n: u32,
}

impl LevelTag {
    pub fn h(n: u32) -> LevelTag {
        LevelTag { kind: GroupKind::H, n }
    }
    pub fn g(n: u32) -> LevelTag {
        LevelTag { kind: GroupKind::G, n }
    }

    /// Position in the sequence `H_0, G_0, H_1, G_1, …`.
    pub fn index(&self) -> u32 {
        2 * self.n + u32::from(self.kind == GroupKind::G)
    }

    /// The level this one is built from.
    pub fn predecessor(&self) -> Option<LevelTag> {
        match (self.kind, self.n) {
            (GroupKind::H, 0) => None,
            (GroupKind::H, n) => Some(LevelTag::g(n - 1)),
            (GroupKind::G, n) => Some(LevelTag::h(n)),
        }
    }
}

impl PartialOrd for LevelTag {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LevelTag {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.index().cmp(&other.index())
    }
}

impl fmt::Display for LevelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            GroupKind::H => 'H',
            GroupKind::G => 'G',
        };
        write!(f, "{k}{}", self.n)
    }
}

impl FromStr for LevelTag {
    type Err = PresentationError;
    fn from_str(s: &str) -> Result<Self, PresentationError> {
        let t = s.trim();
        let bad = || PresentationError::BadLevel(s.to_string());
        let mut chars = t.chars();
        let kind = match chars.next().map(|c| c.to_ascii_uppercase()) {
            Some('H') => GroupKind::H,
            Some('G') => GroupKind::G,
            _ => return Err(bad()),
        };
        let rest = chars.as_str().trim_start_matches('_');
        let n = rest.parse::<u32>().map_err(|_| bad())?;
        Ok(LevelTag { kind, n })
    }
}

/// A rank-two basis vector of the tower, kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BasisVec {
    /// `𝐲`.
    Y,
    /// `𝐚_{level,slot}`.
    A { level: u32, slot: u32 },
    /// `𝐮_level`.
    U { level: u32 },
    /// `𝐮_{level-1}^-1 𝐚_{level,slot}`; `level = 0` means `𝐚_{02}` by the `u_{-1}` convention.
    Diag { level: u32, slot: u32 },
}

impl BasisVec {
    /// Rewrites `u_{-1}^-1 a_{01}` as `a_{02}`.
    pub fn normalized(self) -> BasisVec {
        match self {
            BasisVec::Diag { level: 0, slot: 1 } => BasisVec::A { level: 0, slot: 2 },
            other => other,
        }
    }

    /// True for product vectors `u_{k-1}^-1 a_{kj}` with `k ≥ 1`.
    pub fn is_product(&self) -> bool {
        matches!(self.normalized(), BasisVec::Diag { .. })
    }

    /// Coordinate `c` written in the group generators.
    pub fn group_word(&self, c: u8) -> Word {
        match self.normalized() {
            BasisVec::Y => Word::letter(Gen::y(c)),
            BasisVec::A { level, slot } => Word::letter(Gen::a(level, slot, c)),
            BasisVec::U { level } => Word::letter(Gen::u(level, c)),
            BasisVec::Diag { level, slot } => {
                Word::from_letters([Letter::neg(Gen::u(level - 1, c)), Letter::pos(Gen::a(level, slot, c))])
            }
        }
    }

    /// Coordinate `c` as a single letter of the cell alphabet.
    pub fn cell_gen(&self, c: u8) -> Gen {
        match self.normalized() {
            BasisVec::Y => Gen::y(c),
            BasisVec::A { level, slot } => Gen::a(level, slot, c),
            BasisVec::U { level } => Gen::u(level, c),
            BasisVec::Diag { level, slot } => Gen::d(level, slot, c, c),
        }
    }

    /// The vector in group generators.
    pub fn group_vector(&self) -> GenVector {
        GenVector { first: self.group_word(1), second: self.group_word(2) }
    }

    /// The vector in the cell alphabet.
    pub fn cell_vector(&self) -> GenVector {
        GenVector::of(|c| self.cell_gen(c))
    }

    /// Highest level of any generator involved.
    pub fn level(&self) -> u32 {
        match self.normalized() {
            BasisVec::Y => 0,
            BasisVec::A { level, .. } | BasisVec::U { level } | BasisVec::Diag { level, .. } => level,
        }
    }
}

impl fmt::Display for BasisVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.normalized() {
            BasisVec::Y => write!(f, "y"),
            BasisVec::A { level, slot } => write!(f, "a[{level}][{slot}]"),
            BasisVec::U { level } => write!(f, "u[{level}]"),
            BasisVec::Diag { level, slot } => write!(f, "u[{}]^-1 a[{level}][{slot}]", level - 1),
        }
    }
}

/// The ordered list `𝓛_n` (`2^n` entries): `𝓛_1 = {𝐲, 𝐲}` and
/// `𝓛_n = {𝓛_{n-1}, 𝐚_{(n-2)·}, 𝐮_{n-3}^-1 𝐚_{(n-2)·}}`.
pub fn build_l(n: u32) -> Vec<BasisVec> {
    assert!(n >= 1, "𝓛_n is defined for n ≥ 1");
    let mut l = vec![BasisVec::Y, BasisVec::Y];
    for m in 2..=n {
        let k = m - 2;
        let count = 1u32 << k;
        l.extend((1..=count).map(|slot| BasisVec::A { level: k, slot }));
        l.extend((1..=count).map(|slot| BasisVec::Diag { level: k, slot }.normalized()));
    }
    l
}

/// `𝓛_n(i)` (1-based).
pub fn l_entry(n: u32, i: u32) -> Result<BasisVec, PresentationError> {
    if n == 0 || i == 0 || (i as u64) > (1u64 << n) {
        return Err(PresentationError::IndexOutOfRange(format!("𝓛_{n}({i})")));
    }
    Ok(build_l(n)[(i - 1) as usize])
}

/// The `F_2` basis on which `a_{n,i}` acts by `φ` (`n ≥ 1`, `1 ≤ i ≤ 2^n`).
pub fn a_basis(n: u32, i: u32) -> Result<BasisVec, PresentationError> {
    let half = if n >= 1 { 1u64 << (n - 1) } else { 0 };
    if n == 0 || i == 0 || i as u64 > 2 * half {
        return Err(PresentationError::IndexOutOfRange(format!("a-basis of a[{n}][{i}]")));
    }
    Ok(if (i as u64) <= half {
        BasisVec::A { level: n - 1, slot: i }
    } else {
        BasisVec::Diag { level: n - 1, slot: i - half as u32 }.normalized()
    })
}

/// An edge group of the tower.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum EdgeGroupDescriptor {
    /// `F_{2k} × F_2` (the coning edge group of `G_n`).
    Product { free_factors: Vec<BasisVec>, center: BasisVec },
    /// `F_2 ⋊_θ F_4` with `θ = (φ, φ, id, id)` and the stable letters `a[n][slot][·]`.
    Semidirect { level: u32, slot: u32, a_basis: BasisVec, f4_basis: [BasisVec; 2] },
}

impl EdgeGroupDescriptor {
    /// The product edge group over which `G_n` is a cone.
    pub fn coning(n: u32) -> EdgeGroupDescriptor {
        if n == 0 {
            EdgeGroupDescriptor::Product {
                free_factors: vec![BasisVec::A { level: 0, slot: 1 }],
                center: BasisVec::A { level: 0, slot: 2 },
            }
        } else {
            EdgeGroupDescriptor::Product {
                free_factors: (1..=(1u32 << n)).map(|slot| BasisVec::A { level: n, slot }).collect(),
                center: BasisVec::U { level: n - 1 },
            }
        }
    }

    /// The `i`-th wing edge group of `H_n`.
    pub fn wing(n: u32, i: u32) -> Result<EdgeGroupDescriptor, PresentationError> {
        let a = a_basis(n, i)?;
        let l = l_entry(n, i)?;
        Ok(EdgeGroupDescriptor::Semidirect { level: n, slot: i, a_basis: a, f4_basis: [BasisVec::U { level: n - 1 }, l] })
    }

    /// All basis vectors, in order.
    pub fn basis(&self) -> Vec<BasisVec> {
        match self {
            EdgeGroupDescriptor::Product { free_factors, center } => {
                let mut v = free_factors.clone();
                v.push(*center);
                v
            }
            EdgeGroupDescriptor::Semidirect { a_basis, f4_basis, .. } => vec![*a_basis, f4_basis[0], f4_basis[1]],
        }
    }

    /// Group generators involved in the descriptor's basis words.
    pub fn generators(&self) -> BTreeSet<Gen> {
        self.basis()
            .iter()
            .flat_map(|v| [v.group_word(1), v.group_word(2)])
            .flat_map(|w| w.letters().iter().map(|l| l.gen).collect::<Vec<_>>())
            .collect()
    }

    /// Number of basis letters (`2 · #vectors`).
    pub fn basis_letter_count(&self) -> usize {
        2 * self.basis().len()
    }
}

/// Where a relator comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RelatorKind {
    /// `[g, h]` across distinct factors of `H_0`.
    BaseCommutator,
    /// `u g u^-1 φ(g)^-1` for the coning of `G_n`.
    Coning,
    /// `t v t^-1 φ(v)^-1` for a wing stable letter `t` and its `F_2` basis.
    WingConjugation,
    /// `[t, v]` for a wing stable letter `t` and its `F_4` basis.
    WingCommutation,
    /// `u_t d a_s^-1` or `a_s u_t^-1 d^-1` for a diagonal letter `d`.
    CellTriangle,
    /// `[d, ℓ]` for a diagonal letter and the matching `𝓛` vector.
    CellCommutation,
    /// Coning of a same-coordinate diagonal letter.
    CellConing,
    /// A wing relator rewritten with diagonal letters.
    CellWing,
}

impl RelatorKind {
    pub fn is_cell(&self) -> bool {
        matches!(
            self,
            RelatorKind::CellTriangle | RelatorKind::CellCommutation | RelatorKind::CellConing | RelatorKind::CellWing
        )
    }
}

/// A relator tagged with its origin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelatorEntry {
    pub kind: RelatorKind,
    /// The level that introduced the relator.
    pub level: String,
    /// Index of the edge group (within its level) the relator belongs to, if any.
    pub edge_group: Option<usize>,
    pub word: Word,
}

/// A presentation of one level, with its cell relators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub level: LevelTag,
    pub generators: BTreeSet<Gen>,
    /// Diagonal letters of the subdivided cell structure.
    pub cell_generators: BTreeSet<Gen>,
    /// Canonical forms of the group relators.
    pub relators: BTreeSet<Word>,
    /// Canonical forms of the cell relators.
    pub cell_relators: BTreeSet<Word>,
    /// Edge groups of every level up to this one, in construction order.
    pub edge_groups: Vec<(LevelTag, EdgeGroupDescriptor)>,
    /// Every relator with its origin, in construction order.
    pub log: Vec<RelatorEntry>,
}

fn commutator(g: &Word, h: &Word) -> Word {
    Word::product([g, h, &g.inverse(), &h.inverse()])
}

fn conjugation(t: Gen, v: &Word, image: &Word) -> Word {
    let t = Word::letter(t);
    Word::product([&t, v, &t.inverse(), &image.inverse()])
}

/// `φ` applied to coordinate `c` of a basis vector, expanded through `expand`.
fn phi_of_vector(c: u8, expand: impl Fn(u8) -> Word) -> Word {
    let abstract_image = phi_image(Gen::x(0, c)).expect("x letters are basis letters");
    abstract_image.substitute(|g| match g {
        Gen::X { coord, .. } => expand(coord),
        other => Word::letter(other),
    })
}

impl Presentation {
    fn empty(level: LevelTag) -> Self {
        Presentation {
            level,
            generators: BTreeSet::new(),
            cell_generators: BTreeSet::new(),
            relators: BTreeSet::new(),
            cell_relators: BTreeSet::new(),
            edge_groups: Vec::new(),
            log: Vec::new(),
        }
    }

    fn add(&mut self, kind: RelatorKind, edge_group: Option<usize>, w: Word) {
        let canon = w.canonical_cyclic();
        let inserted = if kind.is_cell() {
            !self.relators.contains(&canon) && self.cell_relators.insert(canon.clone())
        } else {
            self.relators.insert(canon.clone())
        };
        if inserted {
            self.log.push(RelatorEntry { kind, level: self.level.to_string(), edge_group, word: canon });
        }
    }

    /// True iff the canonical form of `w` is a group or cell relator.
    pub fn is_relator(&self, w: &Word) -> bool {
        let c = w.canonical_cyclic();
        !c.is_empty() && (self.relators.contains(&c) || self.cell_relators.contains(&c))
    }

    /// True iff the canonical form of `w` is a group relator.
    pub fn is_group_relator(&self, w: &Word) -> bool {
        self.relators.contains(&w.canonical_cyclic())
    }

    /// True iff `g` is a generator or a diagonal letter of the cell structure.
    pub fn has_letter(&self, g: &Gen) -> bool {
        self.generators.contains(g) || self.cell_generators.contains(g)
    }

    /// Relators introduced at this level with the given kind and edge-group index.
    pub fn entries(&self, kind: RelatorKind, edge_group: Option<usize>) -> Vec<&RelatorEntry> {
        let lvl = self.level.to_string();
        self.log.iter().filter(|e| e.kind == kind && e.edge_group == edge_group && e.level == lvl).collect()
    }

    /// Edge groups introduced at this level.
    pub fn own_edge_groups(&self) -> Vec<&EdgeGroupDescriptor> {
        self.edge_groups.iter().filter(|(l, _)| *l == self.level).map(|(_, e)| e).collect()
    }

    /// JSON-friendly summary.
    pub fn to_document(&self) -> PresentationDocument {
        PresentationDocument {
            schema_version: crate::SCHEMA_VERSION,
            level: self.level.to_string(),
            generators: self.generators.iter().map(|g| g.to_string()).collect(),
            cell_generators: self.cell_generators.iter().map(|g| g.to_string()).collect(),
            relators: self.relators.iter().map(|w| w.to_string()).collect(),
            cell_relators: self.cell_relators.iter().map(|w| w.to_string()).collect(),
            edge_groups: self
                .edge_groups
                .iter()
                .map(|(l, e)| EdgeGroupDocument { level: l.to_string(), descriptor: describe_edge_group(e) })
                .collect(),
        }
    }
}

/// Serialisable view of a [`Presentation`].
#[derive(Debug, Clone, Serialize)]
pub struct PresentationDocument {
    pub schema_version: u32,
    pub level: String,
    pub generators: Vec<String>,
    pub cell_generators: Vec<String>,
    pub relators: Vec<String>,
    pub cell_relators: Vec<String>,
    pub edge_groups: Vec<EdgeGroupDocument>,
}

/// Serialisable view of an edge group.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeGroupDocument {
    pub level: String,
    pub descriptor: String,
}

/// Human-readable edge-group notation, e.g. `<a[0][1]> x| <u[0], y>`.
pub fn describe_edge_group(e: &EdgeGroupDescriptor) -> String {
    match e {
        EdgeGroupDescriptor::Product { free_factors, center } => {
            let f: Vec<String> = free_factors.iter().map(|v| v.to_string()).collect();
            format!("<{}> x <{}>", f.join(", "), center)
        }
        EdgeGroupDescriptor::Semidirect { a_basis, f4_basis, .. } => {
            format!("<{}> x|θ <{}, {}>", a_basis, f4_basis[0], f4_basis[1])
        }
    }
}

fn add_h0(p: &mut Presentation) {
    let factors = [BasisVec::A { level: 0, slot: 1 }, BasisVec::A { level: 0, slot: 2 }, BasisVec::Y];
    for f in &factors {
        for c in 1..=2 {
            p.generators.insert(f.cell_gen(c));
        }
    }
    for x in 0..3 {
        for y in (x + 1)..3 {
            for c in 1..=2 {
                for e in 1..=2 {
                    let w = commutator(&factors[x].group_word(c), &factors[y].group_word(e));
                    p.add(RelatorKind::BaseCommutator, None, w);
                }
            }
        }
    }
}

fn add_g(p: &mut Presentation, n: u32) {
    let e = EdgeGroupDescriptor::coning(n);
    let idx = 0;
    for s in 1..=2 {
        p.generators.insert(Gen::u(n, s));
    }
    for s in 1..=2 {
        let t = Gen::u(n, s);
        for v in e.basis() {
            for c in 1..=2 {
                let image = phi_of_vector(c, |k| v.group_word(k));
                p.add(RelatorKind::Coning, Some(idx), conjugation(t, &v.group_word(c), &image));
            }
        }
    }
    // Coning of the same-coordinate diagonal letters introduced at H_n.
    if n >= 1 {
        for s in 1..=2 {
            let t = Gen::u(n, s);
            for slot in 1..=(1u32 << n) {
                let dv = BasisVec::Diag { level: n, slot };
                for c in 1..=2 {
                    let image = phi_of_vector(c, |k| Word::letter(dv.cell_gen(k)));
                    p.add(RelatorKind::CellConing, Some(idx), conjugation(t, &Word::letter(dv.cell_gen(c)), &image));
                }
            }
        }
    }
    p.edge_groups.push((p.level, e));
}

fn add_h(p: &mut Presentation, n: u32) -> Result<(), PresentationError> {
    let count = 1u32 << n;
    for i in 1..=count {
        for c in 1..=2 {
            p.generators.insert(Gen::a(n, i, c));
        }
    }
    let base = p.edge_groups.len();
    for i in 1..=count {
        let e = EdgeGroupDescriptor::wing(n, i)?;
        let idx = Some((i - 1) as usize);
        let (a, f4) = match &e {
            EdgeGroupDescriptor::Semidirect { a_basis, f4_basis, .. } => (*a_basis, *f4_basis),
            EdgeGroupDescriptor::Product { .. } => unreachable!("wing descriptors are semidirect"),
        };
        for s in 1..=2 {
            let t = Gen::a(n, i, s);
            for c in 1..=2 {
                let image = phi_of_vector(c, |k| a.group_word(k));
                p.add(RelatorKind::WingConjugation, idx, conjugation(t, &a.group_word(c), &image));
                if a.is_product() {
                    let image = phi_of_vector(c, |k| Word::letter(a.cell_gen(k)));
                    p.add(RelatorKind::CellWing, idx, conjugation(t, &Word::letter(a.cell_gen(c)), &image));
                }
            }
            for v in f4 {
                for c in 1..=2 {
                    p.add(RelatorKind::WingCommutation, idx, commutator(&Word::letter(t), &v.group_word(c)));
                    if v.is_product() {
                        p.add(
                            RelatorKind::CellWing,
                            idx,
                            commutator(&Word::letter(t), &Word::letter(v.cell_gen(c))),
                        );
                    }
                }
            }
        }
        p.edge_groups.push((p.level, e));
    }
    let _ = base;
    // Subdivision of K_{H_n}: diagonal letters d[n][j][s][t] = u[n-1][t]^-1 a[n][j][s].
    for j in 1..=count {
        let partner = l_entry(n + 1, j + count)?;
        for s in 1..=2 {
            for t in 1..=2 {
                let d = Gen::d(n, j, s, t);
                p.cell_generators.insert(d);
                let a = Gen::a(n, j, s);
                let u = Gen::u(n - 1, t);
                p.add(
                    RelatorKind::CellTriangle,
                    None,
                    Word::from_letters([Letter::pos(u), Letter::pos(d), Letter::neg(a)]),
                );
                p.add(
                    RelatorKind::CellTriangle,
                    None,
                    Word::from_letters([Letter::pos(a), Letter::neg(u), Letter::neg(d)]),
                );
                for c in 1..=2 {
                    p.add(
                        RelatorKind::CellCommutation,
                        None,
                        commutator(&Word::letter(d), &Word::letter(partner.cell_gen(c))),
                    );
                }
            }
        }
    }
    Ok(())
}

/// Builds the presentation of `level`, refusing levels deeper than `max_depth`.
pub fn build_group_with_depth(level: LevelTag, max_depth: u32) -> Result<Presentation, PresentationError> {
    if level.n > max_depth {
        return Err(PresentationError::DepthExceeded { level: level.to_string(), max: max_depth });
    }
    let mut p = match level.predecessor() {
        None => {
            let mut p = Presentation::empty(level);
            add_h0(&mut p);
            return Ok(p);
        }
        Some(prev) => {
            let mut p = build_group_with_depth(prev, max_depth)?;
            p.level = level;
            p
        }
    };
    match level.kind {
        GroupKind::G => add_g(&mut p, level.n),
        GroupKind::H => add_h(&mut p, level.n)?,
    }
    Ok(p)
}

/// Builds the presentation of `level` under the default depth limit.
pub fn build_group(level: LevelTag) -> Result<Presentation, PresentationError> {
    build_group_with_depth(level, crate::Config::default().max_level_depth)
}

/// Which free factor of a product edge group a generator belongs to.
fn product_factor(e: &EdgeGroupDescriptor, g: &Gen) -> Option<usize> {
    match e {
        EdgeGroupDescriptor::Product { free_factors, center } => {
            let all: Vec<&BasisVec> = free_factors.iter().chain(std::iter::once(center)).collect();
            all.iter().position(|v| (1..=2).any(|c| v.cell_gen(c) == *g && !v.is_product()))
        }
        EdgeGroupDescriptor::Semidirect { .. } => None,
    }
}

/// Projections of a word onto each factor of a product edge group
/// (free factors first, then the center), or `None` if a letter lies outside.
pub fn product_normal_form(e: &EdgeGroupDescriptor, v: &Word) -> Option<Vec<Word>> {
    let EdgeGroupDescriptor::Product { free_factors, .. } = e else {
        return None;
    };
    let k = free_factors.len() + 1;
    let mut parts: Vec<Vec<Letter>> = vec![Vec::new(); k];
    for l in v.letters() {
        parts[product_factor(e, &l.gen)?].push(*l);
    }
    Some(parts.into_iter().map(Word::from_letters).collect())
}

/// The retraction of a product edge group onto the subgroup generated by `target`.
///
/// `target` is one of the free factors `𝐚`, or the diagonal `𝐮^-1 𝐚` of a free
/// factor and the center. Letters outside the edge group are rejected.
pub fn retract(e: &EdgeGroupDescriptor, v: &Word, target: &BasisVec) -> Result<Word, PresentationError> {
    let EdgeGroupDescriptor::Product { free_factors, center } = e else {
        return Err(PresentationError::NotMember("retraction needs a product edge group".into()));
    };
    let target = target.normalized();
    let (factor, via_center) = match target {
        BasisVec::Diag { level, slot } => {
            if *center != (BasisVec::U { level: level - 1 }) {
                return Err(PresentationError::NotMember(format!("{target} is not a diagonal of this edge group")));
            }
            (BasisVec::A { level, slot }, true)
        }
        other => (other, false),
    };
    if !free_factors.contains(&factor) && *center != factor {
        return Err(PresentationError::NotMember(format!("{target} is not a factor of this edge group")));
    }
    let mut out = Vec::new();
    for l in v.letters() {
        if product_factor(e, &l.gen).is_none() {
            return Err(PresentationError::NotMember(format!("letter {} lies outside the edge group", l.gen)));
        }
        let c = match l.gen.basis_coord() {
            Some(c) if factor.cell_gen(c) == l.gen => c,
            _ => continue,
        };
        let image = if via_center { target.group_word(c) } else { Word::letter(l.gen) };
        let image = if l.inv { image.inverse() } else { image };
        out.extend(image.into_letters());
    }
    Ok(Word::from_letters(out))
}

/// Retracts `v` onto `⟨target⟩` and verifies `v = v'` in the direct product
/// by comparing normal forms; returns `v'`.
pub fn edge_group_membership(e: &EdgeGroupDescriptor, v: &Word, target: &BasisVec) -> Result<Word, PresentationError> {
    let image = retract(e, v, target)?;
    let lhs = product_normal_form(e, v)
        .ok_or_else(|| PresentationError::NotMember(format!("{v} is not a word in the edge group")))?;
    let rhs = product_normal_form(e, &image).expect("retraction stays in the edge group");
    if lhs == rhs {
        Ok(image)
    } else {
        Err(PresentationError::NotMember(format!("{v} is not in <{target}>")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn l_lists() {
        assert_eq!(build_l(1), vec![BasisVec::Y, BasisVec::Y]);
        assert_eq!(
            build_l(2),
            vec![BasisVec::Y, BasisVec::Y, BasisVec::A { level: 0, slot: 1 }, BasisVec::A { level: 0, slot: 2 }]
        );
        let l3: Vec<String> = build_l(3).iter().map(|v| v.to_string()).collect();
        assert_eq!(
            l3,
            [
                "y",
                "y",
                "a[0][1]",
                "a[0][2]",
                "a[1][1]",
                "a[1][2]",
                "u[0]^-1 a[1][1]",
                "u[0]^-1 a[1][2]"
            ]
        );
    }

    #[test]
    fn level_tags() {
        assert_eq!("H1".parse::<LevelTag>().unwrap(), LevelTag::h(1));
        assert_eq!("g_3".parse::<LevelTag>().unwrap(), LevelTag::g(3));
        assert!("K2".parse::<LevelTag>().is_err());
        assert!(LevelTag::h(0) < LevelTag::g(0) && LevelTag::g(0) < LevelTag::h(1));
        assert_eq!(LevelTag::h(2).predecessor(), Some(LevelTag::g(1)));
    }

    #[test]
    fn relator_counts() {
        let h0 = build_group(LevelTag::h(0)).unwrap();
        assert_eq!(h0.generators.len(), 6);
        assert_eq!(h0.relators.len(), 12);
        let g0 = build_group(LevelTag::g(0)).unwrap();
        assert_eq!(g0.generators.len(), 8);
        assert_eq!(g0.relators.len(), 12 + 8);
        let h1 = build_group(LevelTag::h(1)).unwrap();
        assert_eq!(h1.generators.len(), 12);
        // Each of the four new letters: 2 φ-conjugations and 4 commutations.
        assert_eq!(h1.relators.len(), 20 + 4 * 6);
        let g1 = build_group(LevelTag::g(1)).unwrap();
        assert_eq!(g1.relators.len(), h1.relators.len() + 2 * (4 + 2));
    }

    #[test]
    fn is_relator_examples() {
        let h0 = build_group(LevelTag::h(0)).unwrap();
        assert!(h0.is_relator(&w("a[0][1][1] y[1] a[0][1][1]^-1 y[1]^-1")));
        assert!(!h0.is_relator(&w("a[0][1][1] a[0][1][2]")));
        let g0 = build_group(LevelTag::g(0)).unwrap();
        assert!(g0.is_relator(&w("u[0][1] a[0][1][1] u[0][1]^-1 a[0][1][1]^-1 a[0][1][2]^-1 a[0][1][1]^-1")));
        assert!(g0.is_relator(&w("a[0][1][2]^-1 a[0][1][1]^-1 u[0][1] a[0][1][1] u[0][1]^-1 a[0][1][1]^-1")));
        let h1 = build_group(LevelTag::h(1)).unwrap();
        assert!(h1.is_relator(&w("a[1][1][1] a[0][1][2] a[1][1][1]^-1 a[0][1][1]^-1")));
        assert!(h1.is_relator(&w("a[1][2][2] a[0][2][1] a[1][2][2]^-1 a[0][2][1]^-1 a[0][2][2]^-1 a[0][2][1]^-1")));
        assert!(h1.is_relator(&w("u[0][2] d[1][1][1][2] a[1][1][1]^-1")));
        assert!(h1.is_relator(&w("d[1][2][1][1] a[0][2][2] d[1][2][1][1]^-1 a[0][2][2]^-1")));
        assert!(!h1.is_relator(&w("d[1][2][1][1] a[0][1][2] d[1][2][1][1]^-1 a[0][1][2]^-1")));
    }

    #[test]
    fn wing_descriptors_have_four_conjugations_and_eight_commutations() {
        for n in 1..=3 {
            let p = build_group(LevelTag::h(n)).unwrap();
            for i in 0..(1usize << n) {
                assert_eq!(p.entries(RelatorKind::WingConjugation, Some(i)).len(), 4, "H{n} slot {i}");
                assert_eq!(p.entries(RelatorKind::WingCommutation, Some(i)).len(), 8, "H{n} slot {i}");
            }
        }
    }

    #[test]
    fn a_basis_matches_l_list() {
        for n in 1..=4u32 {
            for i in 1..=(1u32 << n) {
                assert_eq!(a_basis(n, i).unwrap(), l_entry(n + 1, i + (1 << n)).unwrap());
            }
        }
    }

    #[test]
    fn depth_is_enforced() {
        assert!(matches!(build_group(LevelTag::h(5)), Err(PresentationError::DepthExceeded { .. })));
    }

    #[test]
    fn membership_examples() {
        let e0 = EdgeGroupDescriptor::coning(0);
        let a01 = BasisVec::A { level: 0, slot: 1 };
        assert_eq!(edge_group_membership(&e0, &w("a[0][1][1]"), &a01).unwrap(), w("a[0][1][1]"));
        assert!(matches!(
            edge_group_membership(&e0, &w("a[0][1][1] a[0][2][1]"), &a01),
            Err(PresentationError::NotMember(_))
        ));
        let e1 = EdgeGroupDescriptor::coning(1);
        let diag = BasisVec::Diag { level: 1, slot: 1 };
        assert_eq!(edge_group_membership(&e1, &w("u[0][1]^-1 a[1][1][1]"), &diag).unwrap(), w("u[0][1]^-1 a[1][1][1]"));
        assert!(edge_group_membership(&e1, &w("a[1][1][1]"), &diag).is_err());
        // Commuting letters may appear in any order.
        assert_eq!(
            edge_group_membership(&e1, &w("a[1][1][2] u[0][2]^-1 u[0][1]^-1 a[1][1][1]"), &diag).unwrap(),
            w("u[0][2]^-1 a[1][1][2] u[0][1]^-1 a[1][1][1]")
        );
        // The central letters do not commute with each other.
        assert!(edge_group_membership(&e1, &w("a[1][1][2] u[0][1]^-1 u[0][2]^-1 a[1][1][1]"), &diag).is_err());
    }

    proptest! {
        #[test]
        fn l_list_shape(n in 1u32..=6) {
            let l = build_l(n);
            prop_assert_eq!(l.len(), 1usize << n);
            if n >= 2 {
                prop_assert_eq!(&l[..1usize << (n - 1)], &build_l(n - 1)[..]);
            }
        }

        #[test]
        fn relators_only_use_declared_letters(idx in 0u32..8) {
            let level = if idx % 2 == 0 { LevelTag::h(idx / 2) } else { LevelTag::g(idx / 2) };
            let p = build_group(level).unwrap();
            for r in &p.relators {
                prop_assert!(r.letters().iter().all(|l| p.generators.contains(&l.gen)), "{}", r);
                prop_assert_eq!(r, &r.canonical_cyclic());
            }
            for r in &p.cell_relators {
                prop_assert!(r.letters().iter().all(|l| p.has_letter(&l.gen)), "{}", r);
            }
        }

        #[test]
        fn relators_are_monotone(idx in 0u32..7) {
            let a = if idx % 2 == 0 { LevelTag::h(idx / 2) } else { LevelTag::g(idx / 2) };
            let b = if idx % 2 == 1 { LevelTag::h(idx / 2 + 1) } else { LevelTag::g(idx / 2) };
            let pa = build_group(a).unwrap();
            let pb = build_group(b).unwrap();
            prop_assert!(pa.relators.len() < pb.relators.len());
            prop_assert!(pa.relators.is_subset(&pb.relators));
            prop_assert!(pa.cell_relators.is_subset(&pb.cell_relators));
        }

        #[test]
        fn edge_groups_live_in_predecessor(idx in 1u32..8) {
            let level = if idx % 2 == 0 { LevelTag::h(idx / 2) } else { LevelTag::g(idx / 2) };
            let prev = build_group(level.predecessor().unwrap()).unwrap();
            let p = build_group(level).unwrap();
            for e in p.own_edge_groups() {
                for g in e.generators() {
                    prop_assert!(prev.generators.contains(&g), "{} not in {}", g, prev.level);
                }
            }
        }
    }
}
