//! Symbolic calculus of the coarse-Lipschitz classes `exp^n(x^a)`.
//!
//! A [`FunctionClass`] is kept in normal form: outer powers and positive
//! constant multiples of a tower are absorbed, so only the tower height and
//! the inner exponent remain. Composition and products follow the rules used
//! in the induction over the tower; [`derive_table`] replays that induction and
//! [`equivalence_witness`] cross-checks normal forms numerically in log space.
//!
//! `≃` behaves poorly under composition in general; the rules here are applied
//! only to the specific pairs the induction needs, and the audit trail says so.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::presentations::LevelTag;

/// The class of `exp^tower(x^exponent)`; `tower = 0` is the polynomial `x^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FunctionClass {
    pub tower: u32,
    pub exponent: Ratio<u64>,
}

impl FunctionClass {
    /// `exp^tower(x^exponent)`; the exponent must be positive.
    pub fn new(tower: u32, exponent: Ratio<u64>) -> Option<FunctionClass> {
        (!exponent.is_zero()).then_some(FunctionClass { tower, exponent })
    }

    /// `x^(num/den)`.
    pub fn poly(num: u64, den: u64) -> FunctionClass {
        FunctionClass { tower: 0, exponent: Ratio::new(num, den) }
    }

    /// `exp^n(x^(num/den))`.
    pub fn tower(n: u32, num: u64, den: u64) -> FunctionClass {
        FunctionClass { tower: n, exponent: Ratio::new(num, den) }
    }

    /// The identity `x`.
    pub fn identity() -> FunctionClass {
        FunctionClass::poly(1, 1)
    }

    /// The class is already canonical; provided for symmetry with the audit trail.
    pub fn normalize(self) -> FunctionClass {
        self
    }

    /// `f^c` for `c > 0`: absorbed by a tower, multiplies a polynomial exponent.
    pub fn power(self, c: Ratio<u64>) -> FunctionClass {
        if self.tower >= 1 {
            self
        } else {
            FunctionClass { tower: 0, exponent: self.exponent * c }
        }
    }

    /// Increasing and (coarsely) superadditive: every tower, and `x^a` with `a ≥ 1`.
    pub fn is_superadditive_increasing(&self) -> bool {
        self.tower >= 1 || self.exponent >= Ratio::one()
    }

    /// Rendering in the style of the Dehn-function column (`x²`, `e^{√x}`, …).
    pub fn table_notation(&self) -> String {
        let inner = if self.exponent == Ratio::new(1, 2) {
            "√x".to_string()
        } else if self.exponent == Ratio::one() {
            "x".to_string()
        } else if self.exponent == Ratio::from_integer(2) && self.tower == 0 {
            "x²".to_string()
        } else {
            format!("x^{}", self.exponent)
        };
        match self.tower {
            0 => inner,
            n if n <= 3 => {
                let mut s = inner;
                for _ in 0..n {
                    s = format!("e^{{{s}}}");
                }
                s.replace("e^{x}", "e^x")
            }
            n => format!("exp^{n}({inner})"),
        }
    }

    /// `ln f(x)` as a tower number.
    fn ln_eval(&self, coeff: f64, x: f64) -> TowerNum {
        let inner = coeff * x.powf(self.exponent.to_f64().unwrap_or(1.0));
        if self.tower == 0 {
            TowerNum::new(0, inner.ln())
        } else {
            TowerNum::new(self.tower - 1, inner)
        }
    }
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = if self.exponent == Ratio::one() { "x".to_string() } else { format!("x^({})", self.exponent) };
        match self.tower {
            0 => write!(f, "{inner}"),
            1 => write!(f, "exp({inner})"),
            n => write!(f, "exp^{n}({inner})"),
        }
    }
}

impl Serialize for FunctionClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `f ∘ g`: `exp^m(x^a) ∘ exp^n(x^b) = exp^{m+n}(x^b)` for `n ≥ 1`, `exp^m(x^{ab})` for `n = 0`.
pub fn compose(f: FunctionClass, g: FunctionClass) -> FunctionClass {
    if g.tower >= 1 {
        FunctionClass { tower: f.tower + g.tower, exponent: g.exponent }
    } else {
        FunctionClass { tower: f.tower, exponent: f.exponent * g.exponent }
    }
}

/// `f · g` up to `≃`: the higher tower absorbs the other factor; equal towers
/// keep the larger inner exponent; polynomials add exponents.
pub fn product_absorb(f: FunctionClass, g: FunctionClass) -> FunctionClass {
    match f.tower.cmp(&g.tower) {
        Ordering::Greater => f,
        Ordering::Less => g,
        Ordering::Equal if f.tower == 0 => FunctionClass { tower: 0, exponent: f.exponent + g.exponent },
        Ordering::Equal => {
            if f.exponent >= g.exponent {
                f
            } else {
                g
            }
        }
    }
}

/// One step of the induction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivationStep {
    pub level: String,
    pub rule: String,
    /// The bound before normalisation, as written by the rule.
    pub unnormalized: String,
    pub result: FunctionClass,
    pub notation: String,
}

/// Replays the induction up to `G_max_n`: `δ(H_0) ≃ x`; `δ(G_n) ⪯ δ(H_n) ∘ x²`;
/// `δ(H_n) ⪯ δ(G_{n-1})(x·h(x))` with `h(x) = (β x e^{√(βx)})² ≃ exp(√x)`.
pub fn derive_steps(max_n: u32) -> Vec<DerivationStep> {
    let square = FunctionClass::poly(2, 1);
    let h = FunctionClass::tower(1, 1, 2);
    let mut steps = vec![DerivationStep {
        level: LevelTag::h(0).to_string(),
        rule: "base: F_2 × F_2 has a 2-dimensional K(π,1)".into(),
        unnormalized: "x".into(),
        result: FunctionClass::identity(),
        notation: "x".into(),
    }];
    let mut h_n = FunctionClass::identity();
    for n in 0..=max_n {
        if n >= 1 {
            let g_prev = steps.last().expect("G_{n-1} precedes H_n").result;
            let x_h = product_absorb(FunctionClass::identity(), h);
            let result = compose(g_prev, x_h);
            steps.push(DerivationStep {
                level: LevelTag::h(n).to_string(),
                rule: "vertex group G_{n-1}, edge-group area distortion h(x) = (βx·e^{√(βx)})² ≃ exp(√x); \
                       x·h(x) ≃ exp(√x) (product absorbed by the tower); composition restricted to this pair"
                    .into(),
                unnormalized: format!("({g_prev})∘(x·(βx·exp((βx)^(1/2)))²)"),
                result,
                notation: result.table_notation(),
            });
            h_n = result;
        }
        let result = compose(h_n, square);
        steps.push(DerivationStep {
            level: LevelTag::g(n).to_string(),
            rule: "vertex group H_n, edge groups F × F_2 with Dehn function x²".into(),
            unnormalized: format!("({h_n})∘(x^2)"),
            result,
            notation: result.table_notation(),
        });
    }
    steps
}

/// Upper-bound classes for `H_0, G_0, H_1, …, G_max_n`.
pub fn derive_table(max_n: u32) -> Vec<(LevelTag, FunctionClass)> {
    derive_steps(max_n)
        .into_iter()
        .map(|s| (s.level.parse().expect("levels are rendered by LevelTag"), s.result))
        .collect()
}

/// One row of the Dehn-function column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub group: String,
    pub class: FunctionClass,
    pub notation: String,
    /// For the schema rows, the largest `n` for which the schema was checked.
    pub verified_through: Option<u32>,
}

/// The eight rows `G_0, H_1, G_1, H_2, G_2, H_3, H_n, G_n`; the schema rows are
/// checked against the derivation for `1 ≤ n ≤ max_n`.
pub fn dehn_table(max_n: u32) -> Vec<TableRow> {
    let derived = derive_table(max_n.max(3));
    let get = |tag: LevelTag| derived.iter().find(|(l, _)| *l == tag).map(|(_, c)| *c).expect("derived level");
    let mut rows: Vec<TableRow> = [LevelTag::g(0), LevelTag::h(1), LevelTag::g(1), LevelTag::h(2), LevelTag::g(2), LevelTag::h(3)]
        .into_iter()
        .map(|tag| {
            let c = get(tag);
            TableRow { group: tag.to_string(), class: c, notation: c.table_notation(), verified_through: None }
        })
        .collect();
    let h_ok = (1..=max_n).all(|n| get(LevelTag::h(n)) == FunctionClass::tower(n, 1, 2));
    let g_ok = (1..=max_n).all(|n| get(LevelTag::g(n)) == FunctionClass::tower(n, 1, 1));
    rows.push(TableRow {
        group: "Hn".into(),
        class: FunctionClass::tower(max_n, 1, 2),
        notation: "exp^n(√x)".into(),
        verified_through: h_ok.then_some(max_n),
    });
    rows.push(TableRow {
        group: "Gn".into(),
        class: FunctionClass::tower(max_n, 1, 1),
        notation: "exp^n(x)".into(),
        verified_through: g_ok.then_some(max_n),
    });
    rows
}

/// A non-negative number `exp^height(top)`, normalised so that `top` is a
/// finite float and `top ≥ 700` whenever `height > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TowerNum {
    pub height: u32,
    pub top: f64,
}

impl TowerNum {
    pub fn new(height: u32, top: f64) -> TowerNum {
        let mut t = TowerNum { height, top };
        while t.height > 0 && t.top < 700.0 {
            t.top = t.top.exp();
            t.height -= 1;
        }
        t
    }

    /// `ln(self)`; `None` when the value is at most 0 (so its log is undefined or negative infinity).
    pub fn ln(self) -> Option<TowerNum> {
        if self.height > 0 {
            Some(TowerNum::new(self.height - 1, self.top))
        } else if self.top > 0.0 {
            Some(TowerNum { height: 0, top: self.top.ln() })
        } else {
            None
        }
    }

    /// `self + c` for a modest constant `c` (exact at height 0, absorbed above).
    pub fn add_small(self, c: f64) -> TowerNum {
        if self.height == 0 {
            TowerNum { height: 0, top: self.top + c }
        } else {
            self
        }
    }

    /// Total order on values.
    pub fn compare(self, other: TowerNum) -> Ordering {
        let (mut a, mut b) = (self, other);
        while a.height != b.height {
            // Take logs of the taller one until heights match; the shorter one is
            // brought down alongside by literal logs.
            if a.height > b.height {
                a.height -= 1;
                match b.ln() {
                    Some(x) => b = x,
                    None => return Ordering::Greater,
                }
            } else {
                b.height -= 1;
                match a.ln() {
                    Some(x) => a = x,
                    None => return Ordering::Less,
                }
            }
        }
        a.top.partial_cmp(&b.top).unwrap_or(Ordering::Equal)
    }
}

/// Verdict of [`equivalence_witness`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Equivalence {
    /// Both directions hold at every sample with this constant.
    Equivalent { c: u64 },
    NotEquivalent,
    /// The sampled verdict disagrees with the normal forms.
    Inconclusive,
}

/// Sample points `x = 2^4, 2^8, …, 2^60`.
fn samples() -> impl Iterator<Item = f64> {
    (1..=15).map(|k| 2f64.powi(4 * k))
}

/// Least `C = 2^c ≤ 2^20` with `f(x) ≤ C·g(Cx) + Cx` at every sample point, where
/// `f(x) = exp^m(cf·x^a)` and `g(x) = exp^n(cg·x^b)`.
fn least_constant(f: FunctionClass, cf: f64, g: FunctionClass, cg: f64) -> Option<u64> {
    (0..=20u32).map(|c| 1u64 << c).find(|&c| {
        let cc = c as f64;
        samples().all(|x| {
            let lhs = f.ln_eval(cf, x);
            let via_g = g.ln_eval(cg, cc * x).add_small(cc.ln());
            let linear = TowerNum::new(0, (cc * x).ln());
            // max(C·g(Cx), Cx) ≤ C·g(Cx) + Cx, so this check is sound.
            lhs.compare(via_g) != Ordering::Greater || lhs.compare(linear) != Ordering::Greater
        })
    })
}

/// Decides `f ≃ g` by sampling the defining inequality in both directions,
/// with an inner coefficient on each side (`exp^n(coeff·x^a)`).
pub fn equivalence_witness_scaled(f: FunctionClass, cf: f64, g: FunctionClass, cg: f64) -> Equivalence {
    let sampled = match (least_constant(f, cf, g, cg), least_constant(g, cg, f, cf)) {
        (Some(a), Some(b)) => Equivalence::Equivalent { c: a.max(b) },
        _ => Equivalence::NotEquivalent,
    };
    let normal_forms_agree = f.normalize() == g.normalize();
    match sampled {
        Equivalence::Equivalent { .. } if normal_forms_agree => sampled,
        Equivalence::NotEquivalent if !normal_forms_agree => sampled,
        _ => Equivalence::Inconclusive,
    }
}

/// Decides `f ≃ g` (inner coefficients 1).
pub fn equivalence_witness(f: FunctionClass, g: FunctionClass) -> Equivalence {
    equivalence_witness_scaled(f, 1.0, g, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exps() -> Vec<Ratio<u64>> {
        vec![Ratio::new(1, 2), Ratio::one(), Ratio::new(3, 2), Ratio::from_integer(2)]
    }

    fn all_classes() -> Vec<FunctionClass> {
        (0..=3).flat_map(|n| exps().into_iter().map(move |a| FunctionClass { tower: n, exponent: a })).collect()
    }

    #[test]
    fn compose_examples() {
        assert_eq!(compose(FunctionClass::tower(1, 1, 2), FunctionClass::poly(2, 1)), FunctionClass::tower(1, 1, 1));
        let f = FunctionClass::tower(2, 3, 2);
        assert_eq!(compose(f, FunctionClass::identity()), f);
        assert_eq!(compose(FunctionClass::tower(1, 1, 1), FunctionClass::tower(1, 1, 2)), FunctionClass::tower(2, 1, 2));
    }

    #[test]
    fn product_examples() {
        let e = FunctionClass::tower(1, 1, 2);
        assert_eq!(product_absorb(FunctionClass::identity(), e), e);
        assert_eq!(e.power(Ratio::from_integer(2)), e);
        assert_eq!(product_absorb(e, e), e);
        assert_eq!(product_absorb(FunctionClass::poly(2, 1), FunctionClass::poly(3, 1)), FunctionClass::poly(5, 1));
    }

    #[test]
    fn table_column() {
        let t = derive_table(4);
        let get = |tag: LevelTag| t.iter().find(|(l, _)| *l == tag).unwrap().1;
        assert_eq!(get(LevelTag::g(0)).table_notation(), "x²");
        assert_eq!(get(LevelTag::h(1)).table_notation(), "e^{√x}");
        assert_eq!(get(LevelTag::g(1)).table_notation(), "e^x");
        assert_eq!(get(LevelTag::h(2)).table_notation(), "e^{e^{√x}}");
        assert_eq!(get(LevelTag::g(2)).table_notation(), "e^{e^x}");
        assert_eq!(get(LevelTag::h(3)).table_notation(), "e^{e^{e^{√x}}}");
        for n in 1..=4 {
            assert_eq!(get(LevelTag::h(n)), FunctionClass::tower(n, 1, 2));
            assert_eq!(get(LevelTag::g(n)), FunctionClass::tower(n, 1, 1));
        }
        let rows = dehn_table(4);
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[6].verified_through, Some(4));
        assert_eq!(rows[7].verified_through, Some(4));
    }

    #[test]
    fn normalize_idempotent_and_compose_associative() {
        for f in all_classes() {
            assert_eq!(f.normalize().normalize(), f.normalize());
            for g in all_classes() {
                for h in all_classes() {
                    assert_eq!(compose(compose(f, g), h), compose(f, compose(g, h)));
                }
            }
        }
    }

    #[test]
    fn equivalence_examples() {
        let sq = FunctionClass::poly(2, 1);
        assert_eq!(equivalence_witness(sq, sq), Equivalence::Equivalent { c: 1 });
        let e = FunctionClass::tower(1, 1, 2);
        assert_eq!(equivalence_witness_scaled(e, 2.0, e, 1.0), Equivalence::Equivalent { c: 4 });
        assert_eq!(equivalence_witness(FunctionClass::tower(1, 1, 1), e), Equivalence::NotEquivalent);
        assert_eq!(equivalence_witness(FunctionClass::identity(), sq), Equivalence::NotEquivalent);
        assert_eq!(equivalence_witness(FunctionClass::tower(1, 1, 1), FunctionClass::tower(2, 1, 1)), Equivalence::NotEquivalent);
    }

    #[test]
    fn equal_normal_forms_have_witnesses() {
        for f in all_classes() {
            assert!(matches!(equivalence_witness(f, f), Equivalence::Equivalent { .. }), "{f}");
        }
    }

    #[test]
    fn shape_precondition() {
        for (_, c) in derive_table(4).into_iter().skip(1) {
            assert!(c.is_superadditive_increasing());
        }
        assert!(!FunctionClass::poly(1, 2).is_superadditive_increasing());
    }

    #[test]
    fn tower_num_order() {
        // exp(exp(10)) = exp(22026.46…) < exp(1e300) < exp(exp(800)).
        let b = TowerNum::new(1, 1e300);
        assert_eq!(TowerNum::new(2, 10.0).compare(b), Ordering::Less);
        assert_eq!(TowerNum::new(2, 800.0).compare(b), Ordering::Greater);
        assert_eq!(TowerNum::new(2, 10.0), TowerNum::new(1, 10f64.exp()));
        assert_eq!(TowerNum::new(0, 3.0).compare(TowerNum::new(0, 3.0)), Ordering::Equal);
        assert_eq!(TowerNum::new(0, 3.0).compare(TowerNum::new(1, 800.0)), Ordering::Less);
    }
}
