//! Free-group word algebra over the structured alphabets of the tower.
//!
//! Letters carry integer indices instead of strings, so the unbounded
//! families `a[n][i][j]`, `u[n][j]`, `y[j]`, the abstract rank-two basis
//! `x[c][j]` (copy 0 is ξ, ν) and the diagonal letters
//! `d[n][i][s][t] = u[n-1][t]^-1 a[n][i][s]` are generated programmatically.
//!
//! Every [`Word`] is freely reduced on construction.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Errors raised by word operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    /// Two words that must have equal length do not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    /// A word required to be a palindrome is not one.
    #[error("word is not a palindrome: {0}")]
    NotPalindrome(String),
    /// Two words required to live in disjoint commuting families share a family.
    #[error("words share a generator family; they must come from disjoint commuting families")]
    FamilyOverlap,
    /// Text could not be parsed as a word.
    #[error("cannot parse word: {0}")]
    Parse(String),
}

impl WordError {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            WordError::LengthMismatch { .. } => "LengthMismatch",
            WordError::NotPalindrome(_) => "NotPalindrome",
            WordError::FamilyOverlap => "FamilyOverlap",
            WordError::Parse(_) => "ParseError",
        }
    }
}

/// A positive generator with structured indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    /// Stable letter `a[n][i][j]` (level `n`, slot `i`, coordinate `j`).
    A { level: u32, slot: u32, coord: u8 },
    /// Stable letter `u[n][j]`.
    U { level: u32, coord: u8 },
    /// Base letter `y[j]`.
    Y { coord: u8 },
    /// Abstract rank-two basis letter `x[c][j]`; copy 0 holds ξ (`j = 1`) and ν (`j = 2`).
    X { copy: u32, coord: u8 },
    /// Diagonal letter `d[n][i][s][t]`, standing for `u[n-1][t]^-1 a[n][i][s]`.
    D { level: u32, slot: u32, a_coord: u8, u_coord: u8 },
}

/// A generator with its coordinate stripped: the rank-two free factor it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    A { level: u32, slot: u32 },
    U { level: u32 },
    Y,
    X { copy: u32 },
    D { level: u32, slot: u32 },
}

impl Gen {
    /// ξ, the first abstract basis letter.
    pub const XI: Gen = Gen::X { copy: 0, coord: 1 };
    /// ν, the second abstract basis letter.
    pub const NU: Gen = Gen::X { copy: 0, coord: 2 };

    pub fn a(level: u32, slot: u32, coord: u8) -> Gen {
        Gen::A { level, slot, coord }
    }
    pub fn u(level: u32, coord: u8) -> Gen {
        Gen::U { level, coord }
    }
    pub fn y(coord: u8) -> Gen {
        Gen::Y { coord }
    }
    pub fn x(copy: u32, coord: u8) -> Gen {
        Gen::X { copy, coord }
    }
    pub fn d(level: u32, slot: u32, a_coord: u8, u_coord: u8) -> Gen {
        Gen::D { level, slot, a_coord, u_coord }
    }

    /// The free factor this generator belongs to.
    pub fn family(&self) -> Family {
        match *self {
            Gen::A { level, slot, .. } => Family::A { level, slot },
            Gen::U { level, .. } => Family::U { level },
            Gen::Y { .. } => Family::Y,
            Gen::X { copy, .. } => Family::X { copy },
            Gen::D { level, slot, .. } => Family::D { level, slot },
        }
    }

    /// Basis coordinate (1 or 2) when the generator is a member of a rank-two
    /// basis; cross-coordinate diagonal letters are not.
    pub fn basis_coord(&self) -> Option<u8> {
        match *self {
            Gen::A { coord, .. } | Gen::U { coord, .. } | Gen::Y { coord } | Gen::X { coord, .. } => {
                Some(coord)
            }
            Gen::D { a_coord, u_coord, .. } if a_coord == u_coord => Some(a_coord),
            Gen::D { .. } => None,
        }
    }

    /// The sibling generator in the same rank-two basis with coordinate `coord`.
    pub fn with_basis_coord(&self, coord: u8) -> Option<Gen> {
        match *self {
            Gen::A { level, slot, .. } => Some(Gen::A { level, slot, coord }),
            Gen::U { level, .. } => Some(Gen::U { level, coord }),
            Gen::Y { .. } => Some(Gen::Y { coord }),
            Gen::X { copy, .. } => Some(Gen::X { copy, coord }),
            Gen::D { level, slot, a_coord, u_coord } if a_coord == u_coord => Some(Gen::D {
                level,
                slot,
                a_coord: coord,
                u_coord: coord,
            }),
            Gen::D { .. } => None,
        }
    }

    /// Validates index ranges: coordinates in {1,2}, slots at least 1.
    pub fn is_well_formed(&self) -> bool {
        let c = |c: u8| c == 1 || c == 2;
        match *self {
            Gen::A { slot, coord, .. } => slot >= 1 && c(coord),
            Gen::U { coord, .. } | Gen::Y { coord } | Gen::X { coord, .. } => c(coord),
            Gen::D { level, slot, a_coord, u_coord } => level >= 1 && slot >= 1 && c(a_coord) && c(u_coord),
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gen::A { level, slot, coord } => write!(f, "a[{level}][{slot}][{coord}]"),
            Gen::U { level, coord } => write!(f, "u[{level}][{coord}]"),
            Gen::Y { coord } => write!(f, "y[{coord}]"),
            Gen::X { copy, coord } => write!(f, "x[{copy}][{coord}]"),
            Gen::D { level, slot, a_coord, u_coord } => {
                write!(f, "d[{level}][{slot}][{a_coord}][{u_coord}]")
            }
        }
    }
}

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub inv: bool,
}

impl Letter {
    pub fn pos(gen: Gen) -> Letter {
        Letter { gen, inv: false }
    }
    pub fn neg(gen: Gen) -> Letter {
        Letter { gen, inv: true }
    }
    pub fn inverse(self) -> Letter {
        Letter { gen: self.gen, inv: !self.inv }
    }
    /// `+1` for a generator, `-1` for an inverse.
    pub fn sign(self) -> i8 {
        if self.inv {
            -1
        } else {
            1
        }
    }
}

impl From<Gen> for Letter {
    fn from(gen: Gen) -> Letter {
        Letter::pos(gen)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inv {
            write!(f, "{}^-1", self.gen)
        } else {
            write!(f, "{}", self.gen)
        }
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

/// Freely reduces a raw letter sequence.
pub fn reduce<I: IntoIterator<Item = Letter>>(raw: I) -> Word {
    let mut out: Vec<Letter> = Vec::new();
    for l in raw {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    /// A one-letter word.
    pub fn letter(l: impl Into<Letter>) -> Word {
        Word(vec![l.into()])
    }

    /// The word `g^e` for a generator `g`.
    pub fn power(gen: Gen, e: i64) -> Word {
        let l = if e >= 0 { Letter::pos(gen) } else { Letter::neg(gen) };
        Word(vec![l; e.unsigned_abs() as usize])
    }

    /// Builds a word from letters, reducing freely.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        reduce(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Product `self · other`, reduced.
    pub fn concat(&self, other: &Word) -> Word {
        reduce(self.0.iter().chain(other.0.iter()).copied())
    }

    /// Product of several words, reduced.
    pub fn product<'a, I: IntoIterator<Item = &'a Word>>(words: I) -> Word {
        reduce(words.into_iter().flat_map(|w| w.0.iter().copied()))
    }

    /// `self^e` for an integer exponent.
    pub fn pow(&self, e: i64) -> Word {
        let base = if e >= 0 { self.clone() } else { self.inverse() };
        reduce((0..e.unsigned_abs()).flat_map(|_| base.0.iter().copied()))
    }

    /// True iff the letter sequence reads the same reversed (signs included).
    pub fn is_palindrome(&self) -> bool {
        self.0.iter().eq(self.0.iter().rev())
    }

    /// True iff every letter is a positive generator.
    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|l| !l.inv)
    }

    /// Families of generators appearing in the word.
    pub fn families(&self) -> BTreeSet<Family> {
        self.0.iter().map(|l| l.gen.family()).collect()
    }

    /// Deletes every letter whose generator fails `keep`, then reduces.
    pub fn project<F: Fn(&Gen) -> bool>(&self, keep: F) -> Word {
        reduce(self.0.iter().copied().filter(|l| keep(&l.gen)))
    }

    /// Substitutes each positive generator by a word (inverses map to inverse images).
    pub fn substitute<F: FnMut(Gen) -> Word>(&self, mut image: F) -> Word {
        let mut out = Vec::with_capacity(self.0.len());
        for l in &self.0 {
            let w = image(l.gen);
            if l.inv {
                out.extend(w.0.iter().rev().map(|x| x.inverse()));
            } else {
                out.extend(w.0.iter().copied());
            }
        }
        reduce(out)
    }

    /// Cyclically reduced core (conjugate with no cancelling ends).
    pub fn cyclic_reduce(&self) -> Word {
        let v = &self.0;
        let (mut i, mut j) = (0usize, v.len());
        while j >= i + 2 && v[i] == v[j - 1].inverse() {
            i += 1;
            j -= 1;
        }
        Word(v[i..j].to_vec())
    }

    /// Canonical representative of the cyclic word up to rotation and inversion:
    /// the lexicographically least rotation of the cyclic reduction or its inverse.
    pub fn canonical_cyclic(&self) -> Word {
        let core = self.cyclic_reduce();
        let inv = core.inverse();
        let n = core.len();
        if n == 0 {
            return core;
        }
        let mut best: Option<Vec<Letter>> = None;
        for base in [&core, &inv] {
            for r in 0..n {
                let rot: Vec<Letter> = base.0[r..].iter().chain(base.0[..r].iter()).copied().collect();
                if best.as_ref().is_none_or(|b| rot < *b) {
                    best = Some(rot);
                }
            }
        }
        Word(best.unwrap_or_default())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

fn parse_indices(s: &str, pos: &mut usize, count: usize) -> Result<Vec<u32>, WordError> {
    let b = s.as_bytes();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        if b.get(*pos) != Some(&b'[') {
            return Err(WordError::Parse(format!("expected '[' at byte {}", *pos)));
        }
        *pos += 1;
        let start = *pos;
        while *pos < b.len() && b[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if b.get(*pos) != Some(&b']') || start == *pos {
            return Err(WordError::Parse(format!("expected digits and ']' at byte {start}")));
        }
        let v: u32 = s[start..*pos]
            .parse()
            .map_err(|_| WordError::Parse(format!("index out of range at byte {start}")))?;
        out.push(v);
        *pos += 1;
    }
    Ok(out)
}

fn coord_u8(v: u32) -> Result<u8, WordError> {
    if v == 1 || v == 2 {
        Ok(v as u8)
    } else {
        Err(WordError::Parse(format!("coordinate must be 1 or 2, got {v}")))
    }
}

impl FromStr for Word {
    type Err = WordError;

    /// Parses `a[n][i][j]`, `u[n][j]`, `y[j]`, `x[c][j]`, `d[n][i][s][t]` tokens,
    /// each optionally followed by `^-1`; whitespace, `*` and `·` separate tokens.
    /// The text `e` (or the empty string) is the empty word.
    fn from_str(s: &str) -> Result<Word, WordError> {
        let t = s.trim();
        if t.is_empty() || t == "e" {
            return Ok(Word::empty());
        }
        let b = t.as_bytes();
        let mut pos = 0usize;
        let mut letters = Vec::new();
        while pos < b.len() {
            let c = b[pos];
            if c.is_ascii_whitespace() || c == b'*' {
                pos += 1;
                continue;
            }
            if t[pos..].starts_with('·') {
                pos += '·'.len_utf8();
                continue;
            }
            pos += 1;
            let gen = match c {
                b'a' => {
                    let ix = parse_indices(t, &mut pos, 3)?;
                    if ix[1] == 0 {
                        return Err(WordError::Parse("slot must be at least 1".into()));
                    }
                    Gen::a(ix[0], ix[1], coord_u8(ix[2])?)
                }
                b'u' => {
                    let ix = parse_indices(t, &mut pos, 2)?;
                    Gen::u(ix[0], coord_u8(ix[1])?)
                }
                b'y' => {
                    let ix = parse_indices(t, &mut pos, 1)?;
                    Gen::y(coord_u8(ix[0])?)
                }
                b'x' => {
                    let ix = parse_indices(t, &mut pos, 2)?;
                    Gen::x(ix[0], coord_u8(ix[1])?)
                }
                b'd' => {
                    let ix = parse_indices(t, &mut pos, 4)?;
                    if ix[0] == 0 || ix[1] == 0 {
                        return Err(WordError::Parse("diagonal letters need level and slot at least 1".into()));
                    }
                    Gen::d(ix[0], ix[1], coord_u8(ix[2])?, coord_u8(ix[3])?)
                }
                other => {
                    return Err(WordError::Parse(format!(
                        "unexpected character '{}' at byte {}",
                        other as char,
                        pos - 1
                    )))
                }
            };
            let inv = if t[pos..].starts_with("^-1") {
                pos += 3;
                true
            } else {
                false
            };
            letters.push(Letter { gen, inv });
        }
        Ok(reduce(letters))
    }
}

impl Serialize for Gen {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Word, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A rank-two basis written as a pair of words, e.g. `u[0]^-1 a[1][1]` coordinatewise.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GenVector {
    pub first: Word,
    pub second: Word,
}

impl GenVector {
    /// Builds a vector; both components must be nonempty.
    pub fn new(first: Word, second: Word) -> Option<GenVector> {
        if first.is_empty() || second.is_empty() {
            None
        } else {
            Some(GenVector { first, second })
        }
    }

    /// The vector `(g(1), g(2))` for a coordinate-indexed generator family.
    pub fn of(g: impl Fn(u8) -> Gen) -> GenVector {
        GenVector { first: Word::letter(g(1)), second: Word::letter(g(2)) }
    }

    /// Component by coordinate (1 or 2).
    pub fn component(&self, coord: u8) -> &Word {
        if coord == 1 {
            &self.first
        } else {
            &self.second
        }
    }

    /// Coordinatewise product `self · other`.
    pub fn mul(&self, other: &GenVector) -> GenVector {
        GenVector { first: self.first.concat(&other.first), second: self.second.concat(&other.second) }
    }

    /// Coordinatewise inverse.
    pub fn inverse(&self) -> GenVector {
        GenVector { first: self.first.inverse(), second: self.second.inverse() }
    }

    /// Expands an abstract word over `x[copy][1], x[copy][2]` into this basis.
    pub fn expand(&self, coords: &Word) -> Word {
        coords.substitute(|g| match g {
            Gen::X { coord, .. } => self.component(coord).clone(),
            other => Word::letter(other),
        })
    }
}

impl fmt::Display for GenVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

/// The word `b1 c1 b2 c2 … bm cm` for `W1 = b1…bm`, `W2 = c1…cm`.
///
/// The words must come from disjoint generator families, so no cancellation
/// can occur and the result has length `|W1| + |W2|`.
pub fn interleave(w1: &Word, w2: &Word) -> Result<Word, WordError> {
    if w1.len() != w2.len() {
        return Err(WordError::LengthMismatch { left: w1.len(), right: w2.len() });
    }
    if !w1.families().is_disjoint(&w2.families()) {
        return Err(WordError::FamilyOverlap);
    }
    Ok(reduce(w1.letters().iter().zip(w2.letters()).flat_map(|(b, c)| [*b, *c])))
}

/// Number of commutation relations in the diagram realising
/// `W1^-1 W2 = interleave(W1^-1, W2)` for palindromes `W1`, `W2` of length `m`
/// over commuting families.
///
/// The diagram consists of two triangular halves; each contains `m(m-1)/2`
/// full commutation squares and the two halves share `m` squares cut by the
/// diagonal, giving `m²` relations. With diagonal subdivision every relation
/// contributes two 2-cells, giving `2m²`.
pub fn shuffle_count(w1: &Word, w2: &Word, diagonal_subdivision: bool) -> Result<BigUint, WordError> {
    if w1.len() != w2.len() {
        return Err(WordError::LengthMismatch { left: w1.len(), right: w2.len() });
    }
    for w in [w1, w2] {
        if !w.is_palindrome() {
            return Err(WordError::NotPalindrome(w.to_string()));
        }
    }
    if !w1.families().is_disjoint(&w2.families()) {
        return Err(WordError::FamilyOverlap);
    }
    let m = BigUint::from(w1.len());
    let relations = &m * &m;
    Ok(if diagonal_subdivision { relations * 2u32 } else { relations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_cancels_adjacent_inverses() {
        assert_eq!(w("x[0][1] x[0][2] x[0][2]^-1 x[0][1]"), w("x[0][1] x[0][1]"));
        assert!(reduce(Vec::new()).is_empty());
        assert_eq!(w("x[0][1] x[0][2] x[0][1]").len(), 3);
    }

    #[test]
    fn text_round_trip() {
        let s = "a[1][2][1] u[0][1]^-1 y[2] x[0][1] d[1][1][1][2]^-1";
        assert_eq!(w(s).to_string(), s);
        assert!("a[1][0][1]".parse::<Word>().is_err());
        assert!("u[0][3]".parse::<Word>().is_err());
        assert_eq!(w("a[0][1][1]·y[1]*a[0][1][1]^-1"), w("a[0][1][1] y[1] a[0][1][1]^-1"));
    }

    #[test]
    fn palindromes() {
        assert!(w("x[0][1] x[0][2] x[0][1]").is_palindrome());
        assert!(Word::empty().is_palindrome());
        assert!(!w("x[0][1] x[0][2]").is_palindrome());
    }

    #[test]
    fn interleave_examples() {
        let b = w("a[1][1][1] a[1][1][2]");
        let c = w("u[0][1] u[0][2]");
        assert_eq!(interleave(&b, &c).unwrap(), w("a[1][1][1] u[0][1] a[1][1][2] u[0][2]"));
        assert_eq!(
            interleave(&w("a[1][1][1]^-1"), &w("u[0][1]")).unwrap(),
            w("a[1][1][1]^-1 u[0][1]")
        );
        assert!(matches!(interleave(&b, &w("u[0][1]")), Err(WordError::LengthMismatch { .. })));
        assert_eq!(interleave(&b, &b), Err(WordError::FamilyOverlap));
    }

    #[test]
    fn shuffle_count_examples() {
        let p3a = w("a[0][1][1] a[0][1][2] a[0][1][1]");
        let p3u = w("u[0][1] u[0][2] u[0][1]");
        assert_eq!(shuffle_count(&p3a, &p3u, true).unwrap(), BigUint::from(18u32));
        assert_eq!(shuffle_count(&w("a[0][1][1]"), &w("u[0][1]"), false).unwrap(), BigUint::from(1u32));
        assert!(matches!(
            shuffle_count(&w("a[0][1][1] a[0][1][2]"), &w("u[0][1] u[0][1]"), true),
            Err(WordError::NotPalindrome(_))
        ));
    }

    #[test]
    fn canonical_cyclic_identifies_rotations_and_inverses() {
        let r = w("a[0][1][1] y[1] a[0][1][1]^-1 y[1]^-1");
        let rot = w("y[1] a[0][1][1]^-1 y[1]^-1 a[0][1][1]");
        assert_eq!(r.canonical_cyclic(), rot.canonical_cyclic());
        assert_eq!(r.canonical_cyclic(), r.inverse().canonical_cyclic());
        assert_eq!(w("y[1] a[0][1][1] y[1]^-1").cyclic_reduce(), w("a[0][1][1]"));
    }

    #[test]
    fn genvector_expand() {
        let v = GenVector::new(w("u[0][1]^-1 a[1][1][1]"), w("u[0][2]^-1 a[1][1][2]")).unwrap();
        assert_eq!(v.expand(&w("x[0][1] x[0][2]^-1")), w("u[0][1]^-1 a[1][1][1] a[1][1][2]^-1 u[0][2]"));
    }
}
