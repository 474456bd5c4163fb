//! The automorphism `φ(ξ) = ξνξ, φ(ν) = ξ` as a substitution engine, the exact
//! lengths `L(N) = |φ^N(ξ)|`, and the iterated growth functions
//! `w_0(r) = r, w_n(r) = L(w_{n-1}(r))`.
//!
//! Lengths never materialise words: `L(N) = p_{N+1} + p_N` where `p` is the
//! Pell sequence, obtained from powers of the matrix `[[2,1],[1,0]]`.
//! `φ` acts on every rank-two basis of the structured alphabet at once
//! (`a[n][i][·]`, `u[n][·]`, `y[·]`, `x[c][·]` and the same-coordinate
//! diagonal letters `d[n][i][c][c]`), which is how it is applied to labels
//! such as `φ^M(a[1][1][1])` or `φ^M(u[0][1])`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::words::{Gen, Letter, Word};

/// `1 + √2`, the Perron–Frobenius eigenvalue of `[[2,1],[1,0]]`.
pub const SILVER_RATIO: f64 = 1.0 + std::f64::consts::SQRT_2;

/// Bits needed per unit of `N` in `L(N)`: `log2(1 + √2)`.
pub const BITS_PER_STEP: f64 = 1.271_553_303_163_612;

/// Errors raised by growth computations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrowthError {
    /// The requested object is larger than the configured budget.
    #[error("{what}: estimated size {estimate} exceeds budget {budget}")]
    BudgetExceeded { what: String, estimate: String, budget: u64 },
    /// A letter outside every rank-two basis (a cross-coordinate diagonal letter).
    #[error("letter {0} does not belong to a rank-two basis on which φ acts")]
    NotInBasis(Gen),
}

impl GrowthError {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            GrowthError::BudgetExceeded { .. } => "BudgetExceeded",
            GrowthError::NotInBasis(_) => "NotInBasis",
        }
    }
}

/// An explicit substitution on finitely many generators; other letters are fixed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Substitution {
    pub images: BTreeMap<Gen, Word>,
}

impl Substitution {
    /// `φ` on the basis `{g1, g2}`: `g1 ↦ g1 g2 g1`, `g2 ↦ g1`.
    pub fn phi(g1: Gen, g2: Gen) -> Substitution {
        let mut images = BTreeMap::new();
        images.insert(g1, Word::from_letters([g1.into(), g2.into(), g1.into()]));
        images.insert(g2, Word::letter(g1));
        Substitution { images }
    }

    /// Applies the substitution once; inverses map to inverse images.
    pub fn apply(&self, w: &Word) -> Word {
        w.substitute(|g| self.images.get(&g).cloned().unwrap_or_else(|| Word::letter(g)))
    }

    /// True iff every image is a nonempty palindrome.
    pub fn is_palindromic(&self) -> bool {
        self.images.values().all(|w| !w.is_empty() && w.is_palindrome())
    }
}

fn sibling(g: Gen, coord: u8) -> Result<Gen, GrowthError> {
    g.with_basis_coord(coord).ok_or(GrowthError::NotInBasis(g))
}

/// `φ(g)` for a generator of any rank-two basis.
pub fn phi_image(g: Gen) -> Result<Word, GrowthError> {
    match g.basis_coord() {
        Some(1) => {
            let g2 = sibling(g, 2)?;
            Ok(Word::from_letters([Letter::pos(g), Letter::pos(g2), Letter::pos(g)]))
        }
        Some(_) => Ok(Word::letter(sibling(g, 1)?)),
        None => Err(GrowthError::NotInBasis(g)),
    }
}

/// `φ^{-1}(g)`: `ξ ↦ ν`, `ν ↦ ν^-1 ξ ν^-1`.
pub fn phi_inverse_image(g: Gen) -> Result<Word, GrowthError> {
    match g.basis_coord() {
        Some(1) => Ok(Word::letter(sibling(g, 2)?)),
        Some(_) => {
            let g1 = sibling(g, 1)?;
            Ok(Word::from_letters([Letter::neg(g), Letter::pos(g1), Letter::neg(g)]))
        }
        None => Err(GrowthError::NotInBasis(g)),
    }
}

fn check_basis(w: &Word) -> Result<(), GrowthError> {
    match w.letters().iter().find(|l| l.gen.basis_coord().is_none()) {
        Some(l) => Err(GrowthError::NotInBasis(l.gen)),
        None => Ok(()),
    }
}

/// Upper bound for `|φ^times(w)|` from the letter coordinates.
pub fn phi_image_length_estimate(w: &Word, times: u64) -> BigUint {
    let (mut ones, mut twos) = (0u64, 0u64);
    for l in w.letters() {
        if l.gen.basis_coord() == Some(2) {
            twos += 1;
        } else {
            ones += 1;
        }
    }
    let l1 = phi_length(times);
    let l2 = if times == 0 { BigUint::one() } else { phi_length(times - 1) };
    l1 * ones + l2 * twos
}

/// `φ^times(w)`, refusing outputs estimated above `word_budget` letters.
pub fn apply_phi(w: &Word, times: u64, word_budget: u64) -> Result<Word, GrowthError> {
    check_basis(w)?;
    // L(N) exceeds 2^64 long before N = 60, so larger exponents are over any budget.
    if times > 60 && !w.is_empty() {
        return Err(GrowthError::BudgetExceeded {
            what: format!("φ^{times} of a word of length {}", w.len()),
            estimate: format!("~2^{:.0}", BITS_PER_STEP * (times + 1) as f64),
            budget: word_budget,
        });
    }
    let estimate = phi_image_length_estimate(w, times);
    if estimate > BigUint::from(word_budget) {
        return Err(GrowthError::BudgetExceeded {
            what: format!("φ^{times} of a word of length {}", w.len()),
            estimate: estimate.to_string(),
            budget: word_budget,
        });
    }
    let mut cur = w.clone();
    for _ in 0..times {
        cur = cur.substitute(|g| phi_image(g).expect("basis checked above"));
    }
    Ok(cur)
}

/// `φ^{-times}(w)`, refusing outputs that could exceed `word_budget` letters
/// (the bound `3^times · |w|`).
pub fn apply_phi_inverse(w: &Word, times: u64, word_budget: u64) -> Result<Word, GrowthError> {
    check_basis(w)?;
    let bound = BigUint::from(3u32).pow(times.min(u32::MAX as u64) as u32) * w.len();
    if times > 40 || bound > BigUint::from(word_budget) {
        return Err(GrowthError::BudgetExceeded {
            what: format!("φ^-{times} of a word of length {}", w.len()),
            estimate: if times > 40 { format!("3^{times}·{}", w.len()) } else { bound.to_string() },
            budget: word_budget,
        });
    }
    let mut cur = w.clone();
    for _ in 0..times {
        cur = cur.substitute(|g| phi_inverse_image(g).expect("basis checked above"));
    }
    Ok(cur)
}

type Mat = [[BigUint; 2]; 2];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    [
        [&a[0][0] * &b[0][0] + &a[0][1] * &b[1][0], &a[0][0] * &b[0][1] + &a[0][1] * &b[1][1]],
        [&a[1][0] * &b[0][0] + &a[1][1] * &b[1][0], &a[1][0] * &b[0][1] + &a[1][1] * &b[1][1]],
    ]
}

/// `[[2,1],[1,0]]^n` by repeated squaring.
pub fn growth_matrix_power(n: u64) -> [[BigUint; 2]; 2] {
    let mut result: Mat = [[BigUint::one(), BigUint::zero()], [BigUint::zero(), BigUint::one()]];
    let mut base: Mat = [[BigUint::from(2u32), BigUint::one()], [BigUint::one(), BigUint::zero()]];
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mat_mul(&base, &base);
        }
    }
    result
}

/// `L(N) = |φ^N(ξ)| = ‖M^N e_1‖_1`; never materialises words.
pub fn phi_length(n: u64) -> BigUint {
    if n < 64 {
        return BigUint::from(phi_length_small(n as u32));
    }
    let [[a, _], [c, _]] = growth_matrix_power(n);
    a + c
}

fn phi_length_small(n: u32) -> u128 {
    let (mut prev, mut cur) = (1u128, 1u128); // L(-1) = 1, L(0) = 1
    for _ in 0..n {
        let next = 2 * cur + prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Estimated bit length of `L(N)`.
pub fn phi_length_bits_estimate(n: u64) -> f64 {
    BITS_PER_STEP * (n as f64 + 1.0)
}

/// `L(N)` if its estimated size fits in `bit_budget` bits.
pub fn phi_length_checked(n: u64, bit_budget: u64) -> Result<BigUint, GrowthError> {
    let est = phi_length_bits_estimate(n);
    if est > bit_budget as f64 {
        return Err(GrowthError::BudgetExceeded {
            what: format!("L({n})"),
            estimate: format!("{est:.0} bits"),
            budget: bit_budget,
        });
    }
    Ok(phi_length(n))
}

/// `Σ_{i=0}^{N} L(i) = (L(N+1) + L(N))/2 − 1` exactly.
pub fn geometric_sum(n: u64) -> BigUint {
    (phi_length(n + 1) + phi_length(n)) / 2u32 - 1u32
}

/// Natural logarithm of a big integer, accurate to `f64` precision.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return x.to_u64().map_or(f64::NAN, |v| (v as f64).ln());
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln L(N)` for real `N ≥ 0`: `(N+1)·ln(1+√2) − ln 2 + ln(1 + (−1/(1+√2)²)^{(N+1)})`,
/// where the correction term is dropped once it is below `f64` resolution.
pub fn ln_phi_length(n: f64) -> f64 {
    let main = (n + 1.0) * SILVER_RATIO.ln() - std::f64::consts::LN_2;
    if n < 40.0 && n.fract() == 0.0 {
        let q = (1.0 - std::f64::consts::SQRT_2) / SILVER_RATIO;
        main + (1.0 + q.powi(n as i32 + 1)).ln()
    } else {
        main
    }
}

/// `ln w_n(r)` as a float; exact while the tower fits in `u64`, asymptotic beyond
/// (and `+∞` once even the logarithm overflows).
pub fn ln_w(n: u32, r: u64) -> f64 {
    let mut exact: Option<u64> = Some(r);
    let mut ln = (r as f64).ln();
    for _ in 0..n {
        match exact {
            Some(v) if v < 64 => {
                let l = phi_length_small(v as u32);
                exact = u64::try_from(l).ok();
                ln = (l as f64).ln();
            }
            Some(v) => {
                exact = None;
                ln = ln_phi_length(v as f64);
            }
            None => {
                ln = ln_phi_length(ln.exp());
            }
        }
    }
    ln
}

/// Estimated bit length of `w_n(r)` (may be `+∞`).
pub fn w_bits_estimate(n: u32, r: u64) -> f64 {
    ln_w(n, r) / std::f64::consts::LN_2 + 1.0
}

/// Memoised lengths and towers, safe to share between threads.
#[derive(Debug)]
pub struct GrowthTable {
    bit_budget: u64,
    lengths: Mutex<Vec<BigUint>>,
    large_lengths: Mutex<HashMap<u64, BigUint>>,
    w_cache: Mutex<HashMap<(u32, u64), BigUint>>,
}

impl GrowthTable {
    pub fn new(bit_budget: u64) -> Self {
        GrowthTable {
            bit_budget,
            lengths: Mutex::new(vec![BigUint::one(), BigUint::from(3u32)]),
            large_lengths: Mutex::new(HashMap::new()),
            w_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn bit_budget(&self) -> u64 {
        self.bit_budget
    }

    /// `L(N)`, memoised.
    pub fn length(&self, n: u64) -> Result<BigUint, GrowthError> {
        if n >= 4096 {
            if let Some(v) = self.large_lengths.lock().unwrap_or_else(|e| e.into_inner()).get(&n) {
                return Ok(v.clone());
            }
            let value = phi_length_checked(n, self.bit_budget)?;
            self.large_lengths.lock().unwrap_or_else(|e| e.into_inner()).insert(n, value.clone());
            return Ok(value);
        }
        let mut v = self.lengths.lock().unwrap_or_else(|e| e.into_inner());
        while v.len() as u64 <= n {
            let k = v.len();
            let next = &v[k - 1] * 2u32 + &v[k - 2];
            v.push(next);
        }
        Ok(v[n as usize].clone())
    }

    /// `w_n(r)`, memoised; `BudgetExceeded` when the value exceeds the bit budget.
    pub fn w(&self, n: u32, r: u64) -> Result<BigUint, GrowthError> {
        if let Some(v) = self.w_cache.lock().unwrap_or_else(|e| e.into_inner()).get(&(n, r)) {
            return Ok(v.clone());
        }
        let value = if n == 0 {
            BigUint::from(r)
        } else {
            let prev = self.w(n - 1, r)?;
            let prev = prev.to_u64().ok_or_else(|| GrowthError::BudgetExceeded {
                what: format!("w_{n}({r})"),
                estimate: format!("~2^{:.3e} bits", w_bits_estimate(n, r)),
                budget: self.bit_budget,
            })?;
            self.length(prev).map_err(|_| GrowthError::BudgetExceeded {
                what: format!("w_{n}({r})"),
                estimate: format!("{:.0} bits", phi_length_bits_estimate(prev)),
                budget: self.bit_budget,
            })?
        };
        self.w_cache.lock().unwrap_or_else(|e| e.into_inner()).insert((n, r), value.clone());
        Ok(value)
    }
}

impl Default for GrowthTable {
    fn default() -> Self {
        GrowthTable::new(crate::Config::default().bit_budget)
    }
}

/// `w_n(r)` under the default bit budget.
pub fn w(n: u32, r: u64) -> Result<BigUint, GrowthError> {
    GrowthTable::default().w(n, r)
}

/// `w_n(r)` as a `u64`, when it fits.
pub fn w_u64(n: u32, r: u64) -> Option<u64> {
    let mut v = r;
    for _ in 0..n {
        if v >= 64 {
            return None;
        }
        v = u64::try_from(phi_length_small(v as u32)).ok()?;
    }
    Some(v)
}

/// One row of the length table: `N, L(N), Σ_{i≤N} L(i), ratio`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LengthRow {
    pub n: u64,
    pub length: String,
    pub sum: String,
    pub ratio: f64,
}

/// Rows `0..=max_n` of the length table.
pub fn length_rows(max_n: u64) -> Vec<LengthRow> {
    (0..=max_n)
        .map(|n| {
            let l = phi_length(n);
            let s = geometric_sum(n);
            let ratio = (ln_biguint(&s) - ln_biguint(&l)).exp();
            LengthRow { n, length: l.to_string(), sum: s.to_string(), ratio }
        })
        .collect()
}
