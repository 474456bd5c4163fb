//! Type I / Type II moves, the base slab, and the spheres `S_{H_n}(r)`,
//! `S_{G_n}(r)` with the balls they bound.
//!
//! Spheres are tracked as exact [`Inventory`] records: a multiset of pieces
//! (`Δ`, `Θ`, strips, single cells and not-yet-paired halves) whose exact areas
//! are computed on demand, together with the volume of the ball accumulated by
//! the moves. Nothing is materialised, so the schedule runs at any scale; the
//! area becomes unavailable only when a piece's exact area exceeds the bit
//! budget. At small scale [`realize_explicit`] builds the labelled sphere
//! complex for `G_0` and `H_1`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::complexes::{
    delta_area, strip_patch, theta_area, trapezoid_patch, triangle_patch, CellComplex, ComplexError, Topology,
};
use crate::exec::{par_map, Mode};
use crate::growth::{apply_phi, ln_biguint, ln_w, GrowthError, GrowthTable};
use crate::presentations::{GroupKind, LevelTag};
use crate::words::{Gen, Letter, Word};
use crate::Config;

/// Exact values wider than this many bits are reported only through their logarithm.
pub const DECIMAL_BITS: u64 = 1 << 16;

/// Decimal rendering of `v`, or `None` when it is wider than [`DECIMAL_BITS`].
pub fn decimal(v: &BigUint) -> Option<String> {
    (v.bits() <= DECIMAL_BITS).then(|| v.to_string())
}

/// Errors raised by the move schedule and the explicit realizations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BallError {
    #[error("acting word does not match the move schema: {0}")]
    SchemaMismatch(String),
    #[error("depth exceeded: {0}")]
    DepthExceeded(String),
    #[error("{what}: {estimate} exceeds budget {budget}")]
    BudgetExceeded { what: String, estimate: String, budget: u64 },
    #[error("no live attach site with id {0}")]
    UnknownSite(usize),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

impl BallError {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            BallError::SchemaMismatch(_) => "SchemaMismatch",
            BallError::DepthExceeded(_) => "DepthExceeded",
            BallError::BudgetExceeded { .. } => "BudgetExceeded",
            BallError::UnknownSite(_) => "UnknownSite",
            BallError::BadParameter(_) => "BadParameter",
            BallError::Growth(e) => e.kind(),
            BallError::Complex(e) => e.kind(),
        }
    }
}

/// A piece of a sphere, at scale `w_k(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Piece {
    /// `Δ^n_{ij}(w_k(r))`.
    Delta { n: u32, i: u32, j: u32, k: u32 },
    /// One triangular half of a `Δ^n` over `a[n][slot][·]`, awaiting its partner.
    DeltaHalf { n: u32, slot: u32, k: u32 },
    /// `Θ^n_i(w_k(r))`.
    Theta { n: u32, i: u32, k: u32 },
    /// One trapezoid of a `Θ^n_i(w_k(r))`, awaiting its partner and strip.
    Trapezoid { n: u32, i: u32, k: u32 },
    /// A `w_k(r) × 1` strip of commutation cells.
    Strip { k: u32 },
    /// A single 2-cell.
    Cell,
}

impl Piece {
    /// Exact area at parameter `r`.
    pub fn area(&self, r: u64, table: &GrowthTable) -> Result<BigUint, GrowthError> {
        Ok(match *self {
            Piece::Delta { n, k, .. } => delta_area(n, k, r, table)?,
            Piece::DeltaHalf { k, .. } => {
                let m = table.w(k, r)?;
                &m * &m
            }
            Piece::Theta { k, .. } => theta_area(k, r, table)?,
            Piece::Trapezoid { k, .. } => {
                let s = table.w(k, r)?;
                let s = s.to_u64().ok_or_else(|| too_big(format!("trapezoid over w_{k}({r})"), table))?;
                (table.length(s)? + table.length(s - 1)?) / 2u32 - 1u32
            }
            Piece::Strip { k } => table.w(k, r)?,
            Piece::Cell => BigUint::from(1u32),
        })
    }

    /// Natural logarithm of the area (finite approximation, usable at any scale).
    pub fn ln_area(&self, r: u64) -> f64 {
        match *self {
            Piece::Delta { n, k, .. } => 2.0 * ln_w(k, r) + if n == 0 { 0.0 } else { std::f64::consts::LN_2 },
            Piece::DeltaHalf { k, .. } => 2.0 * ln_w(k, r),
            Piece::Theta { k, .. } => ln_w(k + 1, r) + crate::growth::SILVER_RATIO.ln(),
            Piece::Trapezoid { k, .. } => ln_w(k + 1, r) + (crate::growth::SILVER_RATIO.ln() - 2f64.ln()),
            Piece::Strip { k } => ln_w(k, r),
            Piece::Cell => 0.0,
        }
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Delta { n, i, j, k } => write!(f, "Delta^{n}_{{{i}{j}}}(w_{k})"),
            Piece::DeltaHalf { n, slot, k } => write!(f, "DeltaHalf^{n}_{slot}(w_{k})"),
            Piece::Theta { n, i, k } => write!(f, "Theta^{n}_{i}(w_{k})"),
            Piece::Trapezoid { n, i, k } => write!(f, "Trapezoid^{n}_{i}(w_{k})"),
            Piece::Strip { k } => write!(f, "Strip(w_{k})"),
            Piece::Cell => write!(f, "Cell"),
        }
    }
}

fn too_big(what: String, table: &GrowthTable) -> GrowthError {
    GrowthError::BudgetExceeded { what, estimate: "beyond 64 bits".into(), budget: table.bit_budget() }
}

/// Type of a combination–subdivision move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MoveType {
    I,
    II,
}

/// The positive acting word of a move, kept symbolic: `g^r` at scale 0 and
/// `φ^{w_{s-1}(r)}(g)` at scale `s ≥ 1`; its length is `w_s(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ActingWord {
    pub base: Gen,
    pub scale: u32,
}

impl ActingWord {
    pub fn length(&self, r: u64, table: &GrowthTable) -> Result<BigUint, GrowthError> {
        table.w(self.scale, r)
    }

    /// The acting word as letters (small scales only).
    pub fn word(&self, r: u64, word_budget: u64) -> Result<Word, ComplexError> {
        crate::complexes::scaled_label(self.base, self.scale, r, word_budget)
    }

    /// Recognises a concrete positive word as `g^r` or `φ^{w_{s-1}(r)}(g)` for `s ≤ 3`.
    pub fn recognize(w: &Word, r: u64, word_budget: u64) -> Option<ActingWord> {
        let first = w.letters().first()?;
        let base = first.gen.with_basis_coord(1)?;
        (0..=3u32).find_map(|scale| {
            let candidate = ActingWord { base, scale };
            match candidate.word(r, word_budget) {
                Ok(x) if &x == w => Some(candidate),
                _ => None,
            }
        })
    }
}

impl fmt::Display for ActingWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            write!(f, "{}^r", self.base)
        } else {
            write!(f, "phi^(w_{}(r))({})", self.scale - 1, self.base)
        }
    }
}

/// One applied move.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoveRecord {
    pub move_type: MoveType,
    pub acting_word: String,
    pub target: usize,
    pub target_piece: Piece,
    pub cells_added: u32,
    /// Exact 3-cells credited to the ball, when within budget and [`DECIMAL_BITS`].
    pub volume_added: Option<String>,
}

/// A piece of the current sphere. Corners are ids of the pole corners created
/// by Type II moves; halves meeting at a corner pair up.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Site {
    piece: Piece,
    corners: Vec<u64>,
    alive: bool,
}

/// Exact accounting of a sphere and the ball it bounds.
#[derive(Debug, Clone)]
pub struct Inventory {
    pub level: Option<LevelTag>,
    pub r: u64,
    /// The slab is `Δ^0_{12}(w_{slab_scale}(r)) × [0, 1]`.
    pub slab_scale: u32,
    /// Exact 3-cell count of the slab (product cell structure).
    pub slab_cells: Option<BigUint>,
    /// The reference value `[w_{slab_scale}(r)]²`.
    pub slab_reference: Option<BigUint>,
    pub moves: Vec<MoveRecord>,
    sites: Vec<Site>,
    volume_exact: Option<BigUint>,
    ln_volume_terms: Vec<f64>,
    next_corner: u64,
}

impl Inventory {
    fn slab(scale: u32, r: u64, table: &GrowthTable) -> Inventory {
        let m = table.w(scale, r).ok();
        let cells = m.as_ref().map(|m| m * m);
        let mut inv = Inventory {
            level: None,
            r,
            slab_scale: scale,
            slab_cells: cells.clone(),
            slab_reference: cells.clone(),
            moves: Vec::new(),
            sites: Vec::new(),
            volume_exact: cells,
            ln_volume_terms: vec![2.0 * ln_w(scale, r)],
            next_corner: 0,
        };
        for _ in 0..2 {
            inv.push(Piece::Delta { n: 0, i: 1, j: 2, k: scale }, Vec::new());
        }
        for _ in 0..4 {
            inv.push(Piece::Strip { k: scale }, Vec::new());
        }
        inv
    }

    /// An inventory holding the single piece `piece` and no ball; a `Θ` gets
    /// four fresh corners so that a Type I move can act on it.
    pub fn from_piece(piece: Piece, r: u64) -> Inventory {
        let corners: Vec<u64> = if matches!(piece, Piece::Theta { .. }) { (0..4).collect() } else { Vec::new() };
        let mut inv = Inventory {
            level: None,
            r,
            slab_scale: 0,
            slab_cells: None,
            slab_reference: None,
            moves: Vec::new(),
            sites: Vec::new(),
            volume_exact: Some(BigUint::zero()),
            ln_volume_terms: Vec::new(),
            next_corner: corners.len() as u64,
        };
        inv.push(piece, corners);
        inv
    }

    fn push(&mut self, piece: Piece, corners: Vec<u64>) -> usize {
        self.sites.push(Site { piece, corners, alive: true });
        self.sites.len() - 1
    }

    fn add_volume(&mut self, exact: Option<BigUint>, ln: f64) {
        self.volume_exact = match (self.volume_exact.take(), exact) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        self.ln_volume_terms.push(ln);
    }

    /// Multiset of live pieces.
    pub fn pieces(&self) -> BTreeMap<Piece, u64> {
        let mut m = BTreeMap::new();
        for s in self.sites.iter().filter(|s| s.alive) {
            *m.entry(s.piece).or_insert(0) += 1;
        }
        m
    }

    /// Ids of live `Δ` and `Θ` pieces, where the next moves attach.
    pub fn attach_sites(&self) -> Vec<usize> {
        self.sites
            .iter()
            .enumerate()
            .filter(|(_, s)| s.alive && matches!(s.piece, Piece::Delta { .. } | Piece::Theta { .. }))
            .map(|(id, _)| id)
            .collect()
    }

    /// The live piece with this id.
    pub fn site(&self, id: usize) -> Option<Piece> {
        self.sites.get(id).filter(|s| s.alive).map(|s| s.piece)
    }

    /// Exact area: `Σ count × piece area`.
    pub fn area(&self, table: &GrowthTable) -> Result<BigUint, GrowthError> {
        let mut total = BigUint::zero();
        for (p, c) in self.pieces() {
            total += p.area(self.r, table)? * c;
        }
        Ok(total)
    }

    /// Natural logarithm of the area (approximate, any scale).
    pub fn ln_area(&self) -> f64 {
        log_sum_exp(self.pieces().iter().map(|(p, &c)| p.ln_area(self.r) + (c as f64).ln()))
    }

    /// Exact lower bound for the volume of the ball, when within budget.
    pub fn volume_lower(&self) -> Option<&BigUint> {
        self.volume_exact.as_ref()
    }

    /// Natural logarithm of the volume lower bound (approximate, any scale).
    pub fn ln_volume_lower(&self) -> f64 {
        match &self.volume_exact {
            Some(v) if !v.is_zero() => ln_biguint(v),
            _ => log_sum_exp(self.ln_volume_terms.iter().copied().filter(|x| x.is_finite())),
        }
    }

    /// Number of single cells.
    pub fn single_cells(&self) -> u64 {
        self.pieces().get(&Piece::Cell).copied().unwrap_or(0)
    }

    /// Pieces not yet paired (halves and trapezoids).
    pub fn unpaired(&self) -> u64 {
        self.pieces()
            .iter()
            .filter(|(p, _)| matches!(p, Piece::DeltaHalf { .. } | Piece::Trapezoid { .. }))
            .map(|(_, c)| c)
            .sum()
    }

    pub fn to_document(&self, table: &GrowthTable) -> InventoryDocument {
        InventoryDocument {
            schema_version: crate::SCHEMA_VERSION,
            level: self.level.map(|l| l.to_string()),
            r: self.r,
            pieces: self
                .pieces()
                .into_iter()
                .map(|(p, count)| PieceCount {
                    piece: p.to_string(),
                    count,
                    area_each: p.area(self.r, table).ok().as_ref().and_then(decimal),
                })
                .collect(),
            area: self.area(table).ok().as_ref().and_then(decimal),
            ln_area: self.ln_area(),
            volume_lower: self.volume_exact.as_ref().and_then(decimal),
            ln_volume_lower: self.ln_volume_lower(),
            slab_cells: self.slab_cells.as_ref().and_then(decimal),
            slab_reference: self.slab_reference.as_ref().and_then(decimal),
            single_cells: self.single_cells(),
            attach_sites: self.attach_sites(),
            moves: self.moves.clone(),
        }
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Serialisable view of an [`Inventory`]; big integers are decimal strings.
#[derive(Debug, Clone, Serialize)]
pub struct InventoryDocument {
    pub schema_version: u32,
    pub level: Option<String>,
    pub r: u64,
    pub pieces: Vec<PieceCount>,
    pub area: Option<String>,
    pub ln_area: f64,
    pub volume_lower: Option<String>,
    pub ln_volume_lower: f64,
    pub slab_cells: Option<String>,
    pub slab_reference: Option<String>,
    pub single_cells: u64,
    pub attach_sites: Vec<usize>,
    pub moves: Vec<MoveRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceCount {
    pub piece: String,
    pub count: u64,
    pub area_each: Option<String>,
}

/// The ball `Δ^0_{12}(w_{k+1}(r)) × [0, 1]` and its boundary sphere
/// (two `Δ^0` faces and four lateral strips).
pub fn build_slab(k: u32, r: u64, table: &GrowthTable) -> Result<Inventory, BallError> {
    if r == 0 {
        return Err(BallError::BadParameter("r must be at least 1".into()));
    }
    let m = table.w(k + 1, r)?;
    if m.bits() * 2 > table.bit_budget() {
        return Err(BallError::BudgetExceeded {
            what: format!("slab over w_{}({r})", k + 1),
            estimate: format!("{} bits", m.bits() * 2),
            budget: table.bit_budget(),
        });
    }
    Ok(Inventory::slab(k + 1, r, table))
}

/// Attaches a ball along the `Δ^j_{pq}(w_k(r))` piece `target`, acted on by
/// `u[j][·]` at scale `k − 1`. The piece is replaced by four trapezoids (of
/// `Θ^j` with indices `1, 2, 1, 2` for `j = 0` and `p, p+2^j, q+2^j, q`
/// otherwise) meeting at a new top cell; trapezoids pair into `Θ^j(w_{k-1}(r))`
/// across a pending strip of length `w_k(r)`. Credits `⌊area/9⌋` 3-cells.
pub fn type_ii_move(
    inv: &mut Inventory,
    target: usize,
    acting: ActingWord,
    table: &GrowthTable,
) -> Result<MoveRecord, BallError> {
    let piece = inv.site(target).ok_or(BallError::UnknownSite(target))?;
    let Piece::Delta { n: j, i: p, j: q, k } = piece else {
        return Err(BallError::SchemaMismatch(format!("Type II acts on Δ pieces, not {piece}")));
    };
    if k == 0 {
        return Err(BallError::SchemaMismatch(format!("{piece} is at the bottom scale")));
    }
    if acting.base != Gen::u(j, 1) {
        return Err(BallError::SchemaMismatch(format!("{piece} needs a word in u[{j}][·], got {}", acting.base)));
    }
    if acting.scale + 1 != k {
        return Err(BallError::SchemaMismatch(format!(
            "{piece} needs an acting word of length w_{}(r), got w_{}(r)",
            k - 1,
            acting.scale
        )));
    }
    inv.sites[target].alive = false;
    let sides: [u32; 4] = if j == 0 { [1, 2, 1, 2] } else { [p, p + (1 << j), q + (1 << j), q] };
    let corners: Vec<u64> = (0..4).map(|t| inv.next_corner + t).collect();
    inv.next_corner += 4;
    for (t, &i) in sides.iter().enumerate() {
        inv.push(Piece::Trapezoid { n: j, i, k: k - 1 }, vec![corners[(t + 3) % 4], corners[t]]);
    }
    inv.push(Piece::Cell, Vec::new());
    let vol = piece.area(inv.r, table).ok().map(|a| a / 9u32);
    let ln = piece.ln_area(inv.r) - 9f64.ln();
    inv.add_volume(vol.clone(), ln);
    pair_trapezoids(inv);
    let rec = MoveRecord {
        move_type: MoveType::II,
        acting_word: acting.to_string(),
        target,
        target_piece: piece,
        cells_added: 1,
        volume_added: vol.as_ref().and_then(decimal),
    };
    inv.moves.push(rec.clone());
    Ok(rec)
}

/// Attaches a ball along the `Θ^j_i(w_k(r))` piece `target`, acted on by
/// `a[j+1][i][·]` at scale `k`. The piece is replaced by four `Δ^{j+1}` halves
/// (one per corner), four strips of length `w_k(r)` and one cell; halves
/// meeting at a corner pair into `Δ^{j+1}`. Credits `⌊w_{k+1}(r)/3⌋` 3-cells.
pub fn type_i_move(
    inv: &mut Inventory,
    target: usize,
    acting: ActingWord,
    table: &GrowthTable,
) -> Result<MoveRecord, BallError> {
    let piece = inv.site(target).ok_or(BallError::UnknownSite(target))?;
    let Piece::Theta { n: j, i, k } = piece else {
        return Err(BallError::SchemaMismatch(format!("Type I acts on Θ pieces, not {piece}")));
    };
    if acting.base != Gen::a(j + 1, i, 1) {
        return Err(BallError::SchemaMismatch(format!(
            "{piece} needs a word in a[{}][{i}][·], got {}",
            j + 1,
            acting.base
        )));
    }
    if acting.scale != k {
        return Err(BallError::SchemaMismatch(format!(
            "{piece} needs an acting word of length w_{k}(r), got w_{}(r)",
            acting.scale
        )));
    }
    inv.sites[target].alive = false;
    let corners = inv.sites[target].corners.clone();
    for &c in &corners {
        inv.push(Piece::DeltaHalf { n: j + 1, slot: i, k }, vec![c]);
    }
    for _ in 0..4 {
        inv.push(Piece::Strip { k }, Vec::new());
    }
    inv.push(Piece::Cell, Vec::new());
    let vol = table.w(k + 1, inv.r).ok().map(|w| w / 3u32);
    let ln = ln_w(k + 1, inv.r) - 3f64.ln();
    inv.add_volume(vol.clone(), ln);
    pair_halves(inv);
    let rec = MoveRecord {
        move_type: MoveType::I,
        acting_word: acting.to_string(),
        target,
        target_piece: piece,
        cells_added: 1,
        volume_added: vol.as_ref().and_then(decimal),
    };
    inv.moves.push(rec.clone());
    Ok(rec)
}

fn pair_trapezoids(inv: &mut Inventory) {
    loop {
        let live: Vec<usize> = (0..inv.sites.len())
            .filter(|&s| inv.sites[s].alive && matches!(inv.sites[s].piece, Piece::Trapezoid { .. }))
            .collect();
        let mut found = None;
        'outer: for (x, &a) in live.iter().enumerate() {
            for &b in &live[x + 1..] {
                if inv.sites[a].piece == inv.sites[b].piece {
                    let Piece::Trapezoid { k, .. } = inv.sites[a].piece else { unreachable!() };
                    let strip = (0..inv.sites.len())
                        .find(|&s| inv.sites[s].alive && inv.sites[s].piece == Piece::Strip { k: k + 1 });
                    if let Some(s) = strip {
                        found = Some((a, b, s));
                        break 'outer;
                    }
                }
            }
        }
        let Some((a, b, s)) = found else { return };
        let Piece::Trapezoid { n, i, k } = inv.sites[a].piece else { unreachable!() };
        for id in [a, b, s] {
            inv.sites[id].alive = false;
        }
        let mut corners = inv.sites[a].corners.clone();
        corners.extend(inv.sites[b].corners.iter().copied());
        inv.push(Piece::Theta { n, i, k }, corners);
    }
}

fn pair_halves(inv: &mut Inventory) {
    let mut by_corner: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (id, s) in inv.sites.iter().enumerate() {
        if s.alive && matches!(s.piece, Piece::DeltaHalf { .. }) {
            by_corner.entry(s.corners[0]).or_default().push(id);
        }
    }
    for (_, ids) in by_corner {
        if ids.len() < 2 {
            continue;
        }
        let (a, b) = (ids[0], ids[1]);
        let (Piece::DeltaHalf { n, slot: sa, k }, Piece::DeltaHalf { slot: sb, .. }) =
            (inv.sites[a].piece, inv.sites[b].piece)
        else {
            unreachable!()
        };
        inv.sites[a].alive = false;
        inv.sites[b].alive = false;
        let corner = inv.sites[a].corners.clone();
        inv.push(Piece::Delta { n, i: sa.min(sb), j: sa.max(sb), k }, corner);
    }
}

/// Runs the alternating move schedule from the slab and returns the
/// inventory of `S_{H_n}(r)` or `S_{G_n}(r)` and its ball.
///
/// The slab is `Δ^0_{12}(w_{k0}(r)) × [0, 1]` with `k0 = n` for `H_n` and
/// `k0 = n + 1` for `G_n`. Type II moves act on every `Δ^j(w_k)` with `k ≥ 1`
/// and Type I moves on every `Θ^j` with `j < n`; `H_n` ends with
/// `Δ^n(w_0(r))` pieces and `G_n` with `Θ^n(w_0(r))` pieces.
pub fn build_sphere(level: LevelTag, r: u64, cfg: &Config, table: &GrowthTable) -> Result<Inventory, BallError> {
    if r == 0 {
        return Err(BallError::BadParameter("r must be at least 1".into()));
    }
    if level.n > cfg.max_level_depth {
        return Err(BallError::DepthExceeded(format!("{level} beyond depth {}", cfg.max_level_depth)));
    }
    let k0 = match level.kind {
        GroupKind::H => level.n,
        GroupKind::G => level.n + 1,
    };
    let mut inv = Inventory::slab(k0, r, table);
    inv.level = Some(level);
    loop {
        let next = inv.attach_sites().into_iter().find_map(|id| match inv.sites[id].piece {
            Piece::Delta { n, k, .. } if k >= 1 => Some((id, MoveType::II, ActingWord { base: Gen::u(n, 1), scale: k - 1 })),
            Piece::Theta { n, i, k } if n < level.n => {
                Some((id, MoveType::I, ActingWord { base: Gen::a(n + 1, i, 1), scale: k }))
            }
            _ => None,
        });
        let Some((id, ty, w)) = next else { break };
        match ty {
            MoveType::II => type_ii_move(&mut inv, id, w, table)?,
            MoveType::I => type_i_move(&mut inv, id, w, table)?,
        };
    }
    debug_assert_eq!(inv.unpaired(), 0, "every half finds its partner");
    Ok(inv)
}

/// `2^{2n+2} r² + 2^{2n+2} r + 2^{2n+1} − 2`.
pub fn h_sphere_area_formula(n: u32, r: u64) -> BigUint {
    let p = BigUint::from(1u32) << (2 * n + 2);
    let r = BigUint::from(r);
    &p * &r * &r + &p * &r + (BigUint::from(1u32) << (2 * n + 1)) - 2u32
}

/// One row of the sphere table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereRow {
    pub r: u64,
    pub area_exact: Option<String>,
    pub vol_lower_exact: Option<String>,
    pub log_area: f64,
    pub log_vol: f64,
}

/// Builds the sphere for each `r` (independent builds, fanned out under `mode`);
/// rows come back in the order of `rs`.
pub fn sphere_table(level: LevelTag, rs: &[u64], cfg: &Config, mode: Mode) -> Result<Vec<SphereRow>, BallError> {
    par_map(mode, rs, |&r| {
        let table = GrowthTable::new(cfg.bit_budget);
        let inv = build_sphere(level, r, cfg, &table)?;
        let area = inv.area(&table).ok();
        Ok(SphereRow {
            r,
            log_area: area.as_ref().map(ln_biguint).unwrap_or_else(|| inv.ln_area()),
            area_exact: area.as_ref().and_then(decimal),
            vol_lower_exact: inv.volume_lower().and_then(decimal),
            log_vol: inv.ln_volume_lower(),
        })
    })
    .into_iter()
    .collect()
}

/// Builds the labelled sphere `S_{G_0}(r)` or `S_{H_1}(r)`.
pub fn realize_explicit(level: LevelTag, r: u64, cfg: &Config) -> Result<CellComplex, BallError> {
    if r == 0 {
        return Err(BallError::BadParameter("r must be at least 1".into()));
    }
    let name = level.to_string();
    let Some(cap) = cfg.explicit_cap(&name) else {
        return Err(BallError::DepthExceeded(format!("explicit realization is available for G0 and H1, not {name}")));
    };
    if r > cap as u64 {
        return Err(BallError::BudgetExceeded {
            what: format!("explicit {name} sphere"),
            estimate: format!("r = {r}"),
            budget: cap as u64,
        });
    }
    match (level.kind, level.n) {
        (GroupKind::G, 0) => realize_g0(r, cfg),
        (GroupKind::H, 1) => realize_h1(r),
        _ => Err(BallError::DepthExceeded(format!("no explicit construction for {name}"))),
    }
}

/// `S_{G_0}(r)`: the four belts of the slab over `φ^r(a[0][1][1]) × φ^r(a[0][2][1])`
/// and two cones; each cone has four trapezoids with legs `u[0][1]^r` and a
/// pole cell `[a[0][1][1], a[0][2][1]]`.
fn realize_g0(r: u64, cfg: &Config) -> Result<CellComplex, BallError> {
    let a1 = apply_phi(&Word::letter(Gen::a(0, 1, 1)), r, cfg.word_budget)?;
    let a2 = apply_phi(&Word::letter(Gen::a(0, 2, 1)), r, cfg.word_budget)?;
    let y = Gen::y(1);
    let u = Letter::pos(Gen::u(0, 1));
    let sigma = vec![u; r as usize];
    let mut c = CellComplex::new(format!("S_G0({r})"), Topology::Sphere);
    // corner[z][x][y]: z = 0 bottom, 1 top.
    let mut corner = [[[0usize; 2]; 2]; 2];
    for plane in corner.iter_mut() {
        for row in plane.iter_mut() {
            for v in row.iter_mut() {
                *v = c.add_vertex();
            }
        }
    }
    let mut px = [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]];
    let mut py = [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]];
    for z in 0..2 {
        for t in 0..2 {
            px[z][t] = c.path_between(corner[z][0][t], corner[z][1][t], a1.letters());
            py[z][t] = c.path_between(corner[z][t][0], corner[z][t][1], a2.letters());
        }
    }
    for t in 0..2 {
        strip_patch(&mut c, &px[0][t], &px[1][t], a1.letters(), y);
        strip_patch(&mut c, &py[0][t], &py[1][t], a2.letters(), y);
    }
    for z in 0..2 {
        let mut pole = [[0usize; 2]; 2];
        let mut legs: [[Vec<usize>; 2]; 2] = Default::default();
        for x in 0..2 {
            for yy in 0..2 {
                pole[x][yy] = c.add_vertex();
                let mut leg = vec![pole[x][yy]];
                for _ in 1..r {
                    leg.push(c.add_vertex());
                }
                leg.push(corner[z][x][yy]);
                legs[x][yy] = leg;
            }
        }
        let (g1, g2) = (Letter::pos(Gen::a(0, 1, 1)), Letter::pos(Gen::a(0, 2, 1)));
        c.add_face(&[pole[0][0], pole[1][0], pole[1][1], pole[0][1]], &[g1, g2, g1.inverse(), g2.inverse()]);
        for t in 0..2 {
            trapezoid_patch(
                &mut c,
                &[pole[0][t], pole[1][t]],
                &Word::letter(g1),
                &legs[0][t],
                &legs[1][t],
                &sigma,
                Some(&px[z][t]),
                cfg.word_budget,
            )?;
            trapezoid_patch(
                &mut c,
                &[pole[t][0], pole[t][1]],
                &Word::letter(g2),
                &legs[t][0],
                &legs[t][1],
                &sigma,
                Some(&py[z][t]),
                cfg.word_budget,
            )?;
        }
    }
    c.orient();
    Ok(c)
}

/// `S_{H_1}(r)`: the `G_0` sphere after Type I moves by `a[1][i][1]^r` on its
/// four `Θ` pieces. At every pole corner two triangles (a `Δ^1_{12}(r)`) hang
/// off the leg `u[0][1]^r`; `[a[1][i][1], y[1]]` strips join the top and bottom
/// triangles at each box corner; `[·, a[0][i][1]]` strips run along
/// `d^r y^-1 d^-r` between neighbouring corners and end on the pole cells.
fn realize_h1(r: u64) -> Result<CellComplex, BallError> {
    let r = r as usize;
    let y = Gen::y(1);
    let u = Letter::pos(Gen::u(0, 1));
    let mut c = CellComplex::new(format!("S_H1({r})"), Topology::Sphere);
    let corners = [(0usize, 0usize), (1, 0), (0, 1), (1, 1)];
    // Per z, per corner: box corner P, pole corner Q, leg P → Q reading u^r.
    let mut box_v = [[0usize; 4]; 2];
    let mut pole_v = [[0usize; 4]; 2];
    let mut a_paths: BTreeMap<(usize, usize, u32), Vec<usize>> = BTreeMap::new();
    let mut hyps: BTreeMap<(usize, usize, u32), Vec<usize>> = BTreeMap::new();
    for z in 0..2 {
        for ci in 0..4 {
            box_v[z][ci] = c.add_vertex();
            pole_v[z][ci] = c.add_vertex();
        }
        let idx = |x: usize, yy: usize| corners.iter().position(|&p| p == (x, yy)).expect("corner");
        let (g1, g2) = (Letter::pos(Gen::a(0, 1, 1)), Letter::pos(Gen::a(0, 2, 1)));
        c.add_face(
            &[pole_v[z][idx(0, 0)], pole_v[z][idx(1, 0)], pole_v[z][idx(1, 1)], pole_v[z][idx(0, 1)]],
            &[g1, g2, g1.inverse(), g2.inverse()],
        );
        for ci in 0..4 {
            let leg = c.path_between(box_v[z][ci], pole_v[z][ci], &vec![u; r]);
            for i in 1..=2u32 {
                let t = Letter::pos(Gen::a(1, i, 1));
                let a_path = c.path(box_v[z][ci], &vec![t; r]);
                let hyp = triangle_patch(&mut c, &leg, &a_path, &vec![u; r], &vec![t; r], |s, tt| Gen::d(1, i, s, tt), None);
                a_paths.insert((z, ci, i), a_path);
                hyps.insert((z, ci, i), hyp);
            }
        }
    }
    for ci in 0..4 {
        for i in 1..=2u32 {
            let t = Letter::pos(Gen::a(1, i, 1));
            strip_patch(&mut c, &a_paths[&(0, ci, i)], &a_paths[&(1, ci, i)], &vec![t; r], y);
        }
    }
    // Sides: a[0][1] joins corners differing in x, a[0][2] corners differing in y.
    let sides = [(0usize, 1usize, 1u32), (2, 3, 1), (0, 2, 2), (1, 3, 2)];
    for (c1, c2, i) in sides {
        let d = Letter::pos(Gen::d(1, i, 1, 1));
        let mut word = vec![d; r];
        word.push(Letter::neg(y));
        word.extend(vec![d.inverse(); r]);
        let column = |ci: usize| -> Vec<usize> {
            let mut v = hyps[&(1, ci, i)].clone();
            v.extend(hyps[&(0, ci, i)].iter().rev());
            v
        };
        strip_patch(&mut c, &column(c1), &column(c2), &word, Gen::a(0, i, 1));
    }
    c.orient();
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::validate;
    use crate::growth::phi_length;
    use crate::presentations::build_group;
    use proptest::prelude::*;

    fn t() -> GrowthTable {
        GrowthTable::default()
    }

    #[test]
    fn slab_reference_values() {
        let s = build_slab(0, 1, &t()).unwrap();
        assert_eq!(s.slab_reference, Some(BigUint::from(9u32)));
        assert_eq!(build_slab(0, 2, &t()).unwrap().slab_reference, Some(BigUint::from(49u32)));
        // The exact count comes from the explicit product complex.
        let explicit = crate::complexes::build_slab(0, 1, &Config::default()).unwrap();
        assert_eq!(s.slab_cells, Some(BigUint::from(explicit.volume())));
    }

    #[test]
    fn h1_area_38() {
        let inv = build_sphere(LevelTag::h(1), 1, &Config::default(), &t()).unwrap();
        assert_eq!(inv.area(&t()).unwrap(), BigUint::from(38u32));
        let p = inv.pieces();
        assert_eq!(p[&Piece::Delta { n: 1, i: 1, j: 2, k: 0 }], 8);
        assert_eq!(p[&Piece::Strip { k: 0 }], 16);
        assert_eq!(p[&Piece::Cell], 6);
    }

    #[test]
    fn h_areas_match_closed_form() {
        for n in 1..=3 {
            for r in 1..=5 {
                let inv = build_sphere(LevelTag::h(n), r, &Config::default(), &t()).unwrap();
                assert_eq!(inv.area(&t()).unwrap(), h_sphere_area_formula(n, r), "H{n}, r={r}");
            }
        }
    }

    #[test]
    fn piece_counts_double() {
        for n in 0..=3u32 {
            let g = build_sphere(LevelTag::g(n), 1, &Config::default(), &t()).unwrap();
            let thetas: u64 = g.pieces().iter().filter(|(p, _)| matches!(p, Piece::Theta { .. })).map(|(_, c)| c).sum();
            assert_eq!(thetas, 1 << (2 * n + 2));
            assert_eq!(g.single_cells(), (1 << (2 * n + 2)) - 2);
            if n >= 1 {
                let h = build_sphere(LevelTag::h(n), 1, &Config::default(), &t()).unwrap();
                let deltas: u64 = h.pieces().iter().filter(|(p, _)| matches!(p, Piece::Delta { .. })).map(|(_, c)| c).sum();
                assert_eq!(deltas, 1 << (2 * n + 1));
                assert_eq!(h.single_cells(), (1 << (2 * n + 1)) - 2);
                assert_eq!(h.pieces()[&Piece::Strip { k: 0 }], 1 << (2 * n + 2));
            }
        }
    }

    #[test]
    fn schema_mismatch() {
        let table = t();
        let mut inv = build_slab(0, 1, &table).unwrap();
        let site = inv.attach_sites()[0];
        let wrong_len = ActingWord { base: Gen::u(0, 1), scale: 1 };
        assert_eq!(type_ii_move(&mut inv, site, wrong_len, &table).unwrap_err().kind(), "SchemaMismatch");
        let wrong_alphabet = ActingWord { base: Gen::a(1, 1, 1), scale: 0 };
        assert_eq!(type_ii_move(&mut inv, site, wrong_alphabet, &table).unwrap_err().kind(), "SchemaMismatch");
        let ok = ActingWord { base: Gen::u(0, 1), scale: 0 };
        type_ii_move(&mut inv, site, ok, &table).unwrap();
        assert!(inv.attach_sites().iter().all(|&s| inv.site(s).is_some()));
    }

    #[test]
    fn type_i_accounting() {
        // One Type I move on Θ^0(w_0(r)): 4 halves of area r², 4 strips of r, 1 cell.
        let table = t();
        for r in 1..=4u64 {
            let mut inv = build_sphere(LevelTag::g(0), r, &Config::default(), &table).unwrap();
            let before = inv.area(&table).unwrap();
            let site = inv.attach_sites()[0];
            let theta = inv.site(site).unwrap();
            let removed = theta.area(r, &table).unwrap();
            let bad = ActingWord { base: Gen::u(1, 1), scale: 0 };
            assert_eq!(type_i_move(&mut inv, site, bad, &table).unwrap_err().kind(), "SchemaMismatch");
            type_i_move(&mut inv, site, ActingWord { base: Gen::a(1, 1, 1), scale: 0 }, &table).unwrap();
            let after = inv.area(&table).unwrap();
            assert_eq!(after + removed, before + BigUint::from(4 * r * r + 4 * r + 1));
        }
    }

    #[test]
    fn type_ii_area_delta_within_factor_three() {
        // Δ^1(w_1(1)) replaced by four trapezoids of Θ(w_0) and a cell: change ≃ w_1(1) = 3.
        let table = t();
        let mut inv = build_sphere(LevelTag::h(1), 1, &Config::default(), &table).unwrap();
        inv.sites.push(Site { piece: Piece::Delta { n: 1, i: 1, j: 2, k: 1 }, corners: vec![], alive: true });
        let id = inv.sites.len() - 1;
        let before = inv.area(&table).unwrap();
        type_ii_move(&mut inv, id, ActingWord { base: Gen::u(1, 1), scale: 0 }, &table).unwrap();
        let after = inv.area(&table).unwrap();
        let removed = BigUint::from(18u32);
        let added = after + removed - before;
        assert!(added >= BigUint::from(1u32) && added <= BigUint::from(9u32), "{added}");
    }

    #[test]
    fn acting_word_recognition() {
        let w = crate::complexes::scaled_label(Gen::u(0, 1), 1, 2, 1000).unwrap();
        assert_eq!(ActingWord::recognize(&w, 2, 1000), Some(ActingWord { base: Gen::u(0, 1), scale: 1 }));
        let p = Word::power(Gen::u(0, 1), 2);
        assert_eq!(ActingWord::recognize(&p, 2, 1000), Some(ActingWord { base: Gen::u(0, 1), scale: 0 }));
        assert_eq!(ActingWord::recognize(&Word::power(Gen::u(0, 1), 3), 2, 1000), None);
    }

    #[test]
    fn explicit_spheres() {
        let cfg = Config::default();
        for r in 1..=2u64 {
            let g0 = realize_explicit(LevelTag::g(0), r, &cfg).unwrap();
            let rep = validate(&g0, &build_group(LevelTag::g(0)).unwrap());
            assert!(rep.passed, "{:?}", rep.messages);
            let inv = build_sphere(LevelTag::g(0), r, &cfg, &t()).unwrap();
            assert_eq!(BigUint::from(g0.area()), inv.area(&t()).unwrap());
            let h1 = realize_explicit(LevelTag::h(1), r, &cfg).unwrap();
            let rep = validate(&h1, &build_group(LevelTag::h(1)).unwrap());
            assert!(rep.passed, "{:?} {:?}", rep.messages, rep.bad_faces);
            assert_eq!(h1.area() as u64, 16 * r * r + 16 * r + 6);
        }
        assert_eq!(realize_explicit(LevelTag::g(0), 1, &cfg).unwrap().area(), 4 * (phi_length(2).to_string().parse::<usize>().unwrap() - 2) + 2);
        assert_eq!(realize_explicit(LevelTag::h(2), 1, &cfg).unwrap_err().kind(), "DepthExceeded");
        assert_eq!(realize_explicit(LevelTag::h(1), 3, &cfg).unwrap_err().kind(), "BudgetExceeded");
    }

    #[test]
    fn depth_exceeded() {
        let cfg = Config { max_level_depth: 2, ..Config::default() };
        assert_eq!(build_sphere(LevelTag::h(3), 1, &cfg, &t()).unwrap_err().kind(), "DepthExceeded");
    }

    #[test]
    fn volumes_dominate_slab_reference() {
        for n in 1..=2u32 {
            for r in 1..=3u64 {
                let h = build_sphere(LevelTag::h(n), r, &Config::default(), &t()).unwrap();
                let w = t().w(n, r).unwrap();
                assert!(h.volume_lower().unwrap() >= &(&w * &w));
            }
        }
    }

    #[test]
    fn table_is_ordered_and_mode_independent() {
        let cfg = Config::default();
        let a = sphere_table(LevelTag::h(1), &[3, 1, 2], &cfg, Mode::Parallel).unwrap();
        let b = sphere_table(LevelTag::h(1), &[3, 1, 2], &cfg, Mode::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|x| x.r).collect::<Vec<_>>(), vec![3, 1, 2]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn g_sphere_ratio(n in 0u32..=2, r in 1u64..=4) {
            let table = t();
            let a = build_sphere(LevelTag::g(n), r, &Config::default(), &table).unwrap().area(&table).unwrap();
            let b = build_sphere(LevelTag::g(n), r + 1, &Config::default(), &table).unwrap().area(&table).unwrap();
            prop_assert!(b <= a * 18u32);
        }

        #[test]
        fn area_is_sum_of_pieces(n in 1u32..=3, r in 1u64..=6) {
            let table = t();
            let inv = build_sphere(LevelTag::h(n), r, &Config::default(), &table).unwrap();
            let sum: BigUint = inv.pieces().iter().map(|(p, &c)| p.area(r, &table).unwrap() * c).sum();
            prop_assert_eq!(sum, inv.area(&table).unwrap());
            prop_assert_eq!(inv.unpaired(), 0);
        }
    }
}
