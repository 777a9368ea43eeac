//! Exact integer and rational primitives: Kronecker symbols, squarefree
//! sieves, fundamental discriminants and Bernoulli numerators.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with positive denominator.
pub type Rational = BigRational;

/// ζ(2) = π²/6.
pub const ZETA2: f64 = 1.644_934_066_848_226_4;

/// Largest Bernoulli index `k` (for `B_{2k}`) accepted by default.
pub const DEFAULT_BERNOULLI_MAX_K: u32 = 500;

/// Default segment length of the squarefree sieve.
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 24;

/// Memory budget for a single sieve bitmap, in bits.
pub const SIEVE_BUDGET_BITS: u64 = 1 << 34;

/// Kronecker symbol `(a|n)`, including even and negative `n`.
pub fn kronecker(a: i64, n: i64) -> i8 {
    const TAB2: [i8; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    let mut a = a as i128;
    let mut n = n as i128;
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let v = n.trailing_zeros();
    n >>= v;
    let mut k: i8 = if v % 2 == 1 { TAB2[(a & 7) as usize] } else { 1 };
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    // n is now odd and positive: Jacobi symbol.
    a = a.rem_euclid(n);
    while a != 0 {
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 {
            k *= TAB2[(n & 7) as usize];
        }
        if a & n & 2 != 0 {
            k = -k;
        }
        let r = n % a;
        n = a;
        a = r;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// Modular exponentiation for small moduli.
pub fn pow_mod(base: i64, exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut b = (base as i128).rem_euclid(modulus as i128) as u128;
    let mut e = exp;
    let mut acc: u128 = 1 % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

/// Deterministic primality test by trial division (small inputs only).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut q = 3;
    while q * q <= n {
        if n.is_multiple_of(q) {
            return false;
        }
        q += 2;
    }
    true
}

pub fn is_odd_prime(p: u64) -> bool {
    p % 2 == 1 && is_prime(p)
}

/// Squarefree test by trial division.
pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n;
    let mut q = 2u64;
    while q * q <= m {
        if m.is_multiple_of(q) {
            m /= q;
            if m.is_multiple_of(q) {
                return false;
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    true
}

/// True iff `d` is the discriminant of a quadratic field.
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// Sign of a discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Sign {
    pub fn of(d: i64) -> Sign {
        if d > 0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "pos" | "positive" | "real" => Ok(Sign::Positive),
            "-" | "neg" | "negative" | "imaginary" => Ok(Sign::Negative),
            _ => Err(Error::InvalidArgument(format!("unknown sign '{s}'"))),
        }
    }
}

/// The coset of `Q_3^{×2}` in `Q_3^×` containing a fundamental discriminant.
///
/// For a fundamental discriminant `9 ∤ d`, so the coset is read off from
/// `d mod 3` when `3 ∤ d` and from `d mod 9` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Coset3 {
    #[serde(rename = "1 mod 3")]
    OneMod3,
    #[serde(rename = "2 mod 3")]
    TwoMod3,
    #[serde(rename = "3 mod 9")]
    ThreeMod9,
    #[serde(rename = "6 mod 9")]
    SixMod9,
}

impl Coset3 {
    pub const ALL: [Coset3; 4] = [Coset3::OneMod3, Coset3::TwoMod3, Coset3::ThreeMod9, Coset3::SixMod9];

    /// Coset of `d`; `None` when `9 | d` (never a fundamental discriminant).
    pub fn of(d: i64) -> Option<Coset3> {
        match d.rem_euclid(3) {
            1 => Some(Coset3::OneMod3),
            2 => Some(Coset3::TwoMod3),
            _ => match d.rem_euclid(9) {
                3 => Some(Coset3::ThreeMod9),
                6 => Some(Coset3::SixMod9),
                _ => None,
            },
        }
    }

    /// `d ∈ Q_3^{×2}`.
    pub fn is_square(self) -> bool {
        self == Coset3::OneMod3
    }

    /// Coset of the fundamental discriminant of `Q(√(-3d))`.
    pub fn times_minus3(self) -> Coset3 {
        match self {
            Coset3::OneMod3 => Coset3::SixMod9,
            Coset3::TwoMod3 => Coset3::ThreeMod9,
            Coset3::ThreeMod9 => Coset3::TwoMod3,
            Coset3::SixMod9 => Coset3::OneMod3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Coset3::OneMod3 => "1 mod 3",
            Coset3::TwoMod3 => "2 mod 3",
            Coset3::ThreeMod9 => "3 mod 9",
            Coset3::SixMod9 => "6 mod 9",
        }
    }
}

impl fmt::Display for Coset3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Coset3 {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match norm.as_str() {
            "1mod3" | "1" => Ok(Coset3::OneMod3),
            "2mod3" | "2" => Ok(Coset3::TwoMod3),
            "3mod9" | "3" => Ok(Coset3::ThreeMod9),
            "6mod9" | "6" => Ok(Coset3::SixMod9),
            _ => Err(Error::InvalidArgument(format!("unknown coset '{s}'"))),
        }
    }
}

/// A validated quadratic field discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FundamentalDiscriminant {
    d: i64,
    sign: Sign,
    coset3: Coset3,
}

impl FundamentalDiscriminant {
    pub fn new(d: i64) -> Result<Self> {
        if !is_fundamental(d) {
            return Err(Error::InvalidArgument(format!("{d} is not a fundamental discriminant")));
        }
        Ok(Self::new_unchecked(d))
    }

    /// Caller guarantees `is_fundamental(d)`.
    pub(crate) fn new_unchecked(d: i64) -> Self {
        FundamentalDiscriminant {
            d,
            sign: Sign::of(d),
            coset3: Coset3::of(d).expect("fundamental discriminants are not divisible by 9"),
        }
    }

    pub fn value(self) -> i64 {
        self.d
    }

    pub fn sign(self) -> Sign {
        self.sign
    }

    pub fn coset3(self) -> Coset3 {
        self.coset3
    }

    /// Fundamental discriminant of `Q(√(-3d))`; `None` for `d = -3`.
    pub fn twist_minus3(self) -> Option<FundamentalDiscriminant> {
        let d = self.d;
        let t = if d % 3 == 0 { -d / 3 } else { -3 * d };
        if t == 1 {
            None
        } else {
            Some(Self::new_unchecked(t))
        }
    }
}

impl fmt::Display for FundamentalDiscriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.d)
    }
}

/// Primes up to and including `n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Packed bitmap of a sieve result; bit `i` stands for `lo + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    lo: u64,
    len: usize,
    words: Vec<u64>,
}

impl Bitmap {
    fn new(lo: u64, len: usize, fill: bool) -> Self {
        let nwords = len.div_ceil(64);
        let mut words = vec![if fill { u64::MAX } else { 0 }; nwords];
        if fill && !len.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (len % 64)) - 1;
            }
        }
        Bitmap { lo, len, words }
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Whether `n` (absolute, not offset) is set.
    pub fn contains(&self, n: u64) -> bool {
        if n < self.lo || n - self.lo >= self.len as u64 {
            return false;
        }
        let i = (n - self.lo) as usize;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn clear(&mut self, i: usize) {
        self.words[i / 64] &= !(1u64 << (i % 64));
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).filter_map(move |i| {
            if self.words[i / 64] >> (i % 64) & 1 == 1 {
                Some(self.lo + i as u64)
            } else {
                None
            }
        })
    }
}

/// Segmented sieve for squarefree integers.
#[derive(Debug, Clone)]
pub struct SquarefreeSieve {
    segment_len: usize,
}

impl Default for SquarefreeSieve {
    fn default() -> Self {
        SquarefreeSieve {
            segment_len: DEFAULT_SEGMENT_LEN,
        }
    }
}

impl SquarefreeSieve {
    pub fn with_segment_len(segment_len: usize) -> Self {
        SquarefreeSieve {
            segment_len: segment_len.max(1),
        }
    }

    /// Bitmap of squarefree integers in `[lo, hi]` (requires `1 ≤ lo ≤ hi`).
    pub fn sieve(&self, lo: u64, hi: u64) -> Result<Bitmap> {
        if lo == 0 || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "squarefree sieve needs 1 <= lo <= hi, got [{lo}, {hi}]"
            )));
        }
        let len = hi - lo + 1;
        if len > SIEVE_BUDGET_BITS {
            return Err(Error::Resource(format!(
                "sieve range of {len} integers exceeds budget of {SIEVE_BUDGET_BITS}"
            )));
        }
        let primes = primes_up_to(isqrt(hi));
        let mut out = Bitmap::new(lo, len as usize, true);
        let seg = self.segment_len as u64;
        let mut start = lo;
        while start <= hi {
            let end = (start + seg - 1).min(hi);
            for &q in &primes {
                let sq = q * q;
                if sq > end {
                    break;
                }
                let mut m = start.div_ceil(sq) * sq;
                while m <= end {
                    out.clear((m - lo) as usize);
                    m += sq;
                }
            }
            start = end + 1;
        }
        Ok(out)
    }
}

/// `squarefree_sieve(lo, hi)` with the default segment length.
pub fn squarefree_sieve(lo: u64, hi: u64) -> Result<Bitmap> {
    SquarefreeSieve::default().sieve(lo, hi)
}

/// Smallest-prime-factor table on `[0, n]`, for factoring many small integers.
#[derive(Debug, Clone)]
pub struct FactorTable {
    spf: Vec<u32>,
}

impl FactorTable {
    pub fn new(n: u64) -> Self {
        let n = n as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        FactorTable { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// Prime factorization of `n` (with `1 ≤ n ≤ limit`) as `(prime, exponent)`.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let q = self.spf[n as usize] as u64;
            let mut e = 0;
            while n.is_multiple_of(q) {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        out
    }
}

/// Trial-division factorization.
pub fn factor_trial(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q * q <= n {
        if n.is_multiple_of(q) {
            let mut e = 0;
            while n.is_multiple_of(q) {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Bernoulli numbers `B_0, …, B_n` (convention `B_1 = +1/2`) by the
/// Akiyama–Tanigawa tableau.
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut row: Vec<Rational> = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        row.push(Rational::new(BigInt::from(1), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            let diff = &row[j - 1] - &row[j];
            row[j - 1] = diff * BigInt::from(j);
        }
        out.push(row[0].clone());
    }
    out
}

/// `B_{2k}`.
pub fn bernoulli_even(k: u32) -> Rational {
    bernoulli_numbers(2 * k as usize).pop().expect("nonempty")
}

/// `c_k`, the numerator of `|B_{2k} / (4k)|`, with the default bound on `k`.
pub fn bernoulli_c(k: u32) -> Result<BigUint> {
    bernoulli_c_bounded(k, DEFAULT_BERNOULLI_MAX_K)
}

pub fn bernoulli_c_bounded(k: u32, max_k: u32) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::InvalidArgument("bernoulli_c needs k >= 1".into()));
    }
    if k > max_k {
        return Err(Error::Resource(format!(
            "Bernoulli index k = {k} exceeds configured maximum {max_k}"
        )));
    }
    let b = bernoulli_even(k);
    let q = b.abs() / Rational::from_integer(BigInt::from(4 * k as u64));
    Ok(q.numer().magnitude().clone())
}

/// All of `c_1, …, c_kmax` from one tableau pass.
pub fn bernoulli_c_table(kmax: u32) -> Result<Vec<BigUint>> {
    if kmax > DEFAULT_BERNOULLI_MAX_K {
        return Err(Error::Resource(format!(
            "Bernoulli index k = {kmax} exceeds configured maximum {DEFAULT_BERNOULLI_MAX_K}"
        )));
    }
    let bs = bernoulli_numbers(2 * kmax as usize);
    Ok((1..=kmax)
        .map(|k| {
            let q = bs[2 * k as usize].abs() / Rational::from_integer(BigInt::from(4 * k as u64));
            q.numer().magnitude().clone()
        })
        .collect())
}

/// Convenience: a rational from a pair of machine integers.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Lossy conversion for reporting.
pub fn rational_to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn rational_is_zero(q: &Rational) -> bool {
    q.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(1, 7), 1);
        assert_eq!(kronecker(12, 3), 0);
        assert_eq!(kronecker(-23, 3), 1);
        // (a|2) from the mod-8 table.
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(7, 2), 1);
        assert_eq!(kronecker(5, -1), 1);
        assert_eq!(kronecker(-5, -1), -1);
        assert_eq!(kronecker(-3, 0), 0);
        assert_eq!(kronecker(-1, 0), 1);
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        for q in primes_up_to(200).into_iter().filter(|&q| q > 2) {
            for a in -300i64..300 {
                if a.rem_euclid(q as i64) == 0 {
                    assert_eq!(kronecker(a, q as i64), 0);
                    continue;
                }
                let e = pow_mod(a, (q - 1) / 2, q);
                let expect = if e == 1 { 1 } else { -1 };
                assert_eq!(kronecker(a, q as i64), expect, "a={a} q={q}");
            }
        }
    }

    #[test]
    fn fundamental_examples() {
        assert!(!is_fundamental(1));
        assert!(!is_fundamental(0));
        assert!(is_fundamental(-23));
        assert!(is_fundamental(12));
        assert!(is_fundamental(-3));
        assert!(is_fundamental(-4));
        assert!(is_fundamental(8));
        assert!(!is_fundamental(-16));
        assert!(!is_fundamental(49));
        assert!(!is_fundamental(-12 * 3));
        assert!(!is_fundamental(4 * 5));
    }

    #[test]
    fn coset_labels() {
        assert_eq!(Coset3::of(13), Some(Coset3::OneMod3));
        assert_eq!(Coset3::of(5), Some(Coset3::TwoMod3));
        assert_eq!(Coset3::of(-15), Some(Coset3::ThreeMod9));
        assert_eq!(Coset3::of(-24), Some(Coset3::ThreeMod9));
        assert_eq!(Coset3::of(-3), Some(Coset3::SixMod9));
        assert_eq!(Coset3::of(-9), None);
        for d in -2000i64..2000 {
            if !is_fundamental(d) || d == -3 {
                continue;
            }
            let fd = FundamentalDiscriminant::new(d).unwrap();
            let t = fd.twist_minus3().unwrap();
            assert!(is_fundamental(t.value()), "{d} -> {}", t.value());
            assert_eq!(t.coset3(), fd.coset3().times_minus3(), "d = {d}");
            assert_eq!(t.sign(), fd.sign().flip());
        }
    }

    #[test]
    fn bernoulli_anchors() {
        assert_eq!(bernoulli_even(1), ratio(1, 6));
        assert_eq!(bernoulli_even(2), ratio(-1, 30));
        assert_eq!(bernoulli_even(6), ratio(-691, 2730));
        assert_eq!(bernoulli_c(1).unwrap(), BigUint::from(1u32));
        assert_eq!(bernoulli_c(6).unwrap(), BigUint::from(691u32));
        let c16 = bernoulli_c(16).unwrap();
        assert!((c16 % 37u32).is_zero());
        assert!(matches!(bernoulli_c(0), Err(Error::InvalidArgument(_))));
        assert!(matches!(bernoulli_c(501), Err(Error::Resource(_))));
    }

    #[test]
    fn bernoulli_table_matches_single() {
        let t = bernoulli_c_table(12).unwrap();
        for (i, c) in t.iter().enumerate() {
            assert_eq!(c, &bernoulli_c(i as u32 + 1).unwrap());
        }
    }

    #[test]
    fn squarefree_small() {
        let s = squarefree_sieve(1, 10).unwrap();
        let ones: Vec<u64> = s.iter_ones().collect();
        assert_eq!(ones, vec![1, 2, 3, 5, 6, 7, 10]);
        let s = squarefree_sieve(48, 50).unwrap();
        assert_eq!(s.count_ones(), 0);
        assert!(squarefree_sieve(0, 4).is_err());
        assert!(squarefree_sieve(5, 4).is_err());
    }

    #[test]
    fn squarefree_segments_agree() {
        let a = SquarefreeSieve::with_segment_len(37).sieve(1000, 5000).unwrap();
        let b = squarefree_sieve(1000, 5000).unwrap();
        assert_eq!(a, b);
        for n in 1000..=5000 {
            assert_eq!(a.contains(n), is_squarefree(n));
        }
    }

    #[test]
    fn factor_table_matches_trial() {
        let t = FactorTable::new(5000);
        for n in 1..=5000 {
            assert_eq!(t.factor(n), factor_trial(n));
        }
    }
}
