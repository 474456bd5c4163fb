//! Corridor rewriting inside the edge groups, area-distortion witnesses built
//! from `Θ` boundary words, and a log-space check of the inequality
//! `Area_Γ(w) ≤ (β·A·e^{√(β·A)})²` with `A` an upper bound for `Area_{H_n}(w)`.

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::balls::{type_i_move, ActingWord, BallError, Inventory, Piece};
use crate::complexes::{build_theta, theta_area, ComplexError};
use crate::exec::{par_map, Mode};
use crate::growth::{apply_phi, apply_phi_inverse, ln_biguint, GrowthError, GrowthTable};
use crate::presentations::{a_basis, edge_group_membership, l_entry, BasisVec, EdgeGroupDescriptor, PresentationError};
use crate::words::{Gen, Letter, Word};
use crate::Config;

/// Errors raised by corridor rewriting and the distortion checks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistortionError {
    #[error("unsupported pinch: {0}")]
    UnsupportedPinch(String),
    #[error("not a horizontal corridor boundary: {0}")]
    NotHorizontal(String),
    #[error("rewritten word of length {length} exceeds the bound {bound}")]
    BoundViolated { length: usize, bound: String },
    #[error("no β in [2^0, 2^{max_exponent}] satisfies the inequality")]
    NoBetaFound { max_exponent: u32 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

impl DistortionError {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            DistortionError::UnsupportedPinch(_) => "UnsupportedPinch",
            DistortionError::NotHorizontal(_) => "NotHorizontal",
            DistortionError::BoundViolated { .. } => "BoundViolated",
            DistortionError::NoBetaFound { .. } => "NoBetaFound",
            DistortionError::BadParameter(_) => "BadParameter",
            DistortionError::Growth(e) => e.kind(),
            DistortionError::Complex(e) => e.kind(),
            DistortionError::Ball(e) => e.kind(),
            DistortionError::Presentation(e) => e.kind(),
        }
    }
}

/// A horizontal boundary word of a `u[n-1]`-corridor over `H_n`, to be
/// rewritten into the basis `target` of the corridor's edge group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorridorWord {
    pub horizontal: Word,
    pub level_n: u32,
    pub target: BasisVec,
}

impl CorridorWord {
    /// A corridor word over `H_n` (`n ≥ 1`) with target `a_basis(n, 1)`.
    pub fn new(horizontal: Word, level_n: u32) -> Result<CorridorWord, DistortionError> {
        let target = a_basis(level_n, 1).map_err(|e| DistortionError::BadParameter(e.to_string()))?;
        CorridorWord::with_target(horizontal, level_n, target)
    }

    /// A corridor word with an explicit target basis.
    pub fn with_target(horizontal: Word, level_n: u32, target: BasisVec) -> Result<CorridorWord, DistortionError> {
        if level_n == 0 {
            return Err(DistortionError::BadParameter("corridors live in H_n with n ≥ 1".into()));
        }
        let e = ambient_edge_group(level_n);
        for l in horizontal.letters() {
            match l.gen {
                Gen::U { level, .. } if level + 1 == level_n => {
                    return Err(DistortionError::NotHorizontal(format!(
                        "{} is a corridor letter and cannot occur on a horizontal side",
                        l.gen
                    )))
                }
                Gen::A { level, .. } if level == level_n => {}
                g if e.generators().contains(&g) => {}
                g => {
                    return Err(DistortionError::NotHorizontal(format!(
                        "{g} is neither a generator of E nor a stable letter a[{level_n}][·][·]"
                    )))
                }
            }
        }
        Ok(CorridorWord { horizontal, level_n, target })
    }
}

/// `E`: the product edge group over which `G_{n-1}` is a cone.
pub fn ambient_edge_group(level_n: u32) -> EdgeGroupDescriptor {
    EdgeGroupDescriptor::coning(level_n - 1)
}

/// `3·3^{3|X|}` as a big integer.
pub fn corridor_bound(x_len: usize) -> BigUint {
    BigUint::from(3u32).pow(3 * x_len as u32 + 1)
}

/// Coordinates of `v` in the basis `b`, as a word over `x[0][1], x[0][2]`,
/// after verifying `v ∈ ⟨b⟩`.
fn coordinates(e: &EdgeGroupDescriptor, v: &Word, b: BasisVec) -> Result<Word, DistortionError> {
    edge_group_membership(e, v, &b).map_err(|err| DistortionError::UnsupportedPinch(format!("{v}: {err}")))?;
    let factor = match b.normalized() {
        BasisVec::Diag { level, slot } => BasisVec::A { level, slot },
        other => other,
    };
    let coords = v.letters().iter().filter_map(|l| {
        let c = l.gen.basis_coord()?;
        (factor.cell_gen(c) == l.gen).then_some(Letter { gen: Gen::x(0, c), inv: l.inv })
    });
    Ok(Word::from_letters(coords))
}

/// Rewrites a horizontal corridor boundary `X` into a word `Y` in the target
/// basis with `Y = X` in `H_n`.
///
/// Innermost pinches `t v t^-1` (`t^-1 v t`) with `t = a[n][i][c]` are resolved
/// by verifying `v ∈ ⟨a_basis(n, i)⟩`, and replacing the pinch by `φ(v')`
/// (`φ^-1(v')`) written in that basis. The pinch-free result is verified to lie
/// in `⟨target⟩` and rewritten there; `|Y| ≤ 3·3^{3|X|}` is checked.
pub fn corridor_rewrite(x: &CorridorWord, word_budget: u64) -> Result<Word, DistortionError> {
    let n = x.level_n;
    let e = ambient_edge_group(n);
    let mut cur: Vec<Letter> = x.horizontal.letters().to_vec();
    let is_stable = |l: &Letter| matches!(l.gen, Gen::A { level, .. } if level == n);
    loop {
        let stable: Vec<usize> = (0..cur.len()).filter(|&p| is_stable(&cur[p])).collect();
        if stable.is_empty() {
            break;
        }
        let pinch = stable.windows(2).find(|w| {
            let (a, b) = (cur[w[0]], cur[w[1]]);
            a.gen == b.gen && a.inv != b.inv
        });
        let Some(&[p, q]) = pinch else {
            return Err(DistortionError::UnsupportedPinch(format!(
                "{} has stable letters but no pinch",
                Word::from_letters(cur.clone())
            )));
        };
        let t = cur[p];
        let Gen::A { slot, .. } = t.gen else { unreachable!("stable letters are a-letters") };
        let basis = a_basis(n, slot)?;
        let v = Word::from_letters(cur[p + 1..q].iter().copied());
        let coords = coordinates(&e, &v, basis)?;
        let image = if t.inv {
            apply_phi_inverse(&coords, 1, word_budget)?
        } else {
            apply_phi(&coords, 1, word_budget)?
        };
        let replacement = basis.group_vector().expand(&image);
        let mut next: Vec<Letter> = cur[..p].to_vec();
        next.extend(replacement.letters().iter().copied());
        next.extend(cur[q + 1..].iter().copied());
        cur = Word::from_letters(next).into_letters();
    }
    let flat = Word::from_letters(cur);
    let coords = coordinates(&e, &flat, x.target)
        .map_err(|_| DistortionError::UnsupportedPinch(format!("{flat} does not lie in <{}>", x.target)))?;
    let y = x.target.group_vector().expand(&coords);
    let bound = corridor_bound(x.horizontal.len());
    if BigUint::from(y.len()) > bound {
        return Err(DistortionError::BoundViolated { length: y.len(), bound: bound.to_string() });
    }
    Ok(y)
}

/// All reduced words of length `1..=max_len` over `x[0][1], x[0][2]`.
fn coordinate_words(max_len: usize) -> Vec<Word> {
    let letters = [
        Letter::pos(Gen::XI),
        Letter::neg(Gen::XI),
        Letter::pos(Gen::NU),
        Letter::neg(Gen::NU),
    ];
    let mut out: Vec<Word> = Vec::new();
    let mut frontier = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in letters {
                let x = w.concat(&Word::letter(l));
                if x.len() == w.len() + 1 {
                    next.push(x);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// The generated corpus of corridor words at level `n` with `|X| ≤ max_len`:
/// plain basis words, single pinches, nested pinches and a basis word
/// followed by a pinch, over every wing `i` and both stable letters.
pub fn corridor_corpus(n: u32, max_len: usize) -> Result<Vec<CorridorWord>, DistortionError> {
    let mut out = Vec::new();
    let coords = coordinate_words(2);
    for i in 1..=(1u32 << n) {
        let basis = a_basis(n, i)?;
        let vec = basis.group_vector();
        let ts: Vec<Letter> = [1u8, 2]
            .iter()
            .flat_map(|&c| [Letter::pos(Gen::a(n, i, c)), Letter::neg(Gen::a(n, i, c))])
            .collect();
        let conj = |t: Letter, w: &Word| Word::product([&Word::letter(t), w, &Word::letter(t.inverse())]);
        let mut push = |w: Word| -> Result<(), DistortionError> {
            if !w.is_empty() && w.len() <= max_len {
                out.push(CorridorWord::with_target(w, n, basis)?);
            }
            Ok(())
        };
        for c in &coords {
            let v = vec.expand(c);
            push(v.clone())?;
            for &t in &ts {
                push(conj(t, &v))?;
                for &t2 in &ts {
                    push(conj(t, &conj(t2, &v)))?;
                }
                for c2 in coords.iter().take(4) {
                    push(vec.expand(c2).concat(&conj(t, &v)))?;
                }
            }
        }
    }
    Ok(out)
}

/// A distortion sample at level `n` and size `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionSample {
    pub n: u32,
    #[serde(rename = "N")]
    pub big_n: u64,
    #[serde(serialize_with = "ser_big")]
    pub area_edge_exact: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub area_ambient_upper: BigUint,
    /// Least `β = 2^b` (`b ≤ 30`) for which this sample satisfies the inequality.
    pub fitted_beta: Option<u64>,
}

fn ser_big<S: serde::Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl DistortionSample {
    pub fn new(n: u32, big_n: u64, area_edge_exact: BigUint, area_ambient_upper: BigUint) -> Self {
        let mut s = DistortionSample { n, big_n, area_edge_exact, area_ambient_upper, fitted_beta: None };
        s.fitted_beta = (0..=MAX_BETA_EXPONENT).find(|&b| slack(&s, b) >= 0.0).map(|b| 1u64 << b);
        s
    }

    pub fn ln_edge(&self) -> f64 {
        ln_biguint(&self.area_edge_exact)
    }
}

/// Largest exponent tried by the β search.
pub const MAX_BETA_EXPONENT: u32 = 30;

/// Witness disks above this many cells are counted by formula instead of built.
pub const EXPLICIT_WITNESS_CELLS: u64 = 250_000;

/// `2·(ln β + ln A + √(β·A)) − ln Area_Γ` for `β = 2^b`.
fn slack(s: &DistortionSample, b: u32) -> f64 {
    let ln_beta = b as f64 * std::f64::consts::LN_2;
    let ln_a = ln_biguint(&s.area_ambient_upper);
    let root = ((ln_beta + ln_a) / 2.0).exp();
    2.0 * (ln_beta + ln_a + root) - s.ln_edge()
}

/// The group word `∂Θ^n_1(N)` read from its construction data:
/// `ℓ S^-1 ℓ' S ℓ^-1 S^-1 ℓ'^-1 S` with `S = u[n][1]^N`.
pub fn theta_boundary_word(n: u32, big_n: u64) -> Result<Word, DistortionError> {
    let half = 1u32 << (n + 1);
    let ell = l_entry(n + 2, 1 + half)?.group_word(1);
    let ell_p = l_entry(n + 2, 1)?.group_word(1);
    let s = Word::power(Gen::u(n, 1), big_n as i64);
    Ok(Word::product([
        &ell,
        &s.inverse(),
        &ell_p,
        &s,
        &ell.inverse(),
        &s.inverse(),
        &ell_p.inverse(),
        &s,
    ]))
}

/// The witness `∂Θ^n_1(N)` with its exact area inside the edge group and the
/// exact area of its Type I filling in `H_{n+1}`.
pub fn make_witness(n: u32, big_n: u64, cfg: &Config) -> Result<(Word, DistortionSample), DistortionError> {
    if n > 2 {
        return Err(DistortionError::BadParameter(format!("witnesses are generated for n ≤ 2, not {n}")));
    }
    if big_n == 0 {
        return Err(DistortionError::BadParameter("N must be at least 1".into()));
    }
    let table = GrowthTable::new(cfg.bit_budget);
    let formula = theta_area(0, big_n, &table)?;
    let area_edge = if formula <= BigUint::from(EXPLICIT_WITNESS_CELLS.min(cfg.cell_budget)) {
        let theta = build_theta(n, 1, 0, big_n, cfg)?;
        BigUint::from(theta.area())
    } else {
        formula
    };
    let mut inv = Inventory::from_piece(Piece::Theta { n, i: 1, k: 0 }, big_n);
    let before = inv.area(&table)?;
    let theta_cells = Piece::Theta { n, i: 1, k: 0 }.area(big_n, &table)?;
    let site = inv.attach_sites()[0];
    type_i_move(&mut inv, site, ActingWord { base: Gen::a(n + 1, 1, 1), scale: 0 }, &table)?;
    let ambient = inv.area(&table)? + theta_cells - before;
    Ok((theta_boundary_word(n, big_n)?, DistortionSample::new(n, big_n, area_edge, ambient)))
}

/// Witness samples for each `N` (fanned out under `mode`, returned in order).
pub fn witness_samples(n: u32, ns: &[u64], cfg: &Config, mode: Mode) -> Result<Vec<DistortionSample>, DistortionError> {
    par_map(mode, ns, |&big_n| make_witness(n, big_n, cfg).map(|(_, s)| s)).into_iter().collect()
}

/// Result of [`check_distortion_inequality`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionReport {
    pub n: u32,
    pub beta: u64,
    pub beta_exponent: u32,
    /// Per sample: `(N, ln RHS − ln LHS)` at the reported β.
    pub slack: Vec<(u64, f64)>,
    pub note: String,
}

/// Finds the least `β = 2^b`, `0 ≤ b ≤ 30`, with
/// `Area_Γ ≤ (β·A·e^{√(β·A)})²` for every sample, where `A` is the computed
/// upper bound for the ambient area. All arithmetic is in log space.
pub fn check_distortion_inequality(samples: &[DistortionSample]) -> Result<DistortionReport, DistortionError> {
    let Some(first) = samples.first() else {
        return Err(DistortionError::BadParameter("no samples".into()));
    };
    if samples.iter().any(|s| s.n != first.n) {
        return Err(DistortionError::BadParameter("samples mix several levels".into()));
    }
    let b = (0..=MAX_BETA_EXPONENT)
        .find(|&b| samples.iter().all(|s| slack(s, b) >= 0.0))
        .ok_or(DistortionError::NoBetaFound { max_exponent: MAX_BETA_EXPONENT })?;
    Ok(DistortionReport {
        n: first.n,
        beta: 1u64 << b,
        beta_exponent: b,
        slack: samples.iter().map(|s| (s.big_n, slack(s, b))).collect(),
        note: "the ambient area is an upper bound for the minimal area, so a pass is evidence and a failure \
               indicates a construction error"
            .into(),
    })
}
