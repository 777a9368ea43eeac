//! Local behaviour of cubic rings: maximality at a prime, the splitting
//! type of 3, and local masses of maximal cubic `Z_p`-algebras.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::form::{BinaryCubicForm, Mat2};
use crate::error::{Error, Result};
use crate::exactmath::{is_odd_prime, is_prime, ratio, Rational};

/// Roots of `f mod q` in `P¹(F_q)`, as `(x, y)` with `y ∈ {0, 1}`.
pub fn roots_mod(f: &BinaryCubicForm, q: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    if f.a.rem_euclid(q) == 0 {
        out.push((1, 0));
    }
    for x in 0..q {
        if f.eval(x as i128, 1).rem_euclid(q as i128) == 0 {
            out.push((x, 1));
        }
    }
    out
}

/// Whether the cubic ring of `f` is maximal at the prime `q`.
///
/// Non-maximal exactly when `q` divides `f`, or when some root of `f mod q`,
/// moved to `(1:0)`, leaves `q² | a` and `q | b`.
pub fn maximal_at(f: &BinaryCubicForm, q: u64) -> bool {
    let disc = f.disc();
    let qq = q as i128;
    if disc % (qq * qq) != 0 {
        return true;
    }
    let q = q as i64;
    if f.coeffs().iter().all(|c| c.rem_euclid(q) == 0) {
        return false;
    }
    let q2 = (q as i128) * (q as i128);
    for (x, y) in roots_mod(f, q) {
        // Unimodular M with M·(1, 0) = (x, y).
        let m = if y == 0 { Mat2::IDENTITY } else { Mat2::new(x, -1, 1, 0) };
        let g = f.transform(&m);
        if (g.a as i128).rem_euclid(q2) == 0 && g.b.rem_euclid(q) == 0 {
            return false;
        }
    }
    true
}

/// Primes `q` with `q² | n`.
pub fn square_divisor_primes(n: u128) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p: u128 = 2;
    while p * p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            if e >= 2 {
                out.push(p as u64);
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    // The cofactor has at most two prime factors, all larger than p.
    if m > 1 {
        let r = (m as f64).sqrt().round() as u128;
        for s in [r.saturating_sub(1), r, r + 1] {
            if s > 1 && s * s == m && is_prime(s as u64) {
                out.push(s as u64);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Maximal at every prime.
pub fn is_maximal(f: &BinaryCubicForm) -> bool {
    square_divisor_primes(f.disc().unsigned_abs())
        .into_iter()
        .all(|q| maximal_at(f, q))
}

/// Splitting type of 3 in a cubic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Split3 {
    #[serde(rename = "split")]
    Split,
    #[serde(rename = "inert")]
    Inert,
    #[serde(rename = "partial")]
    Partial,
    #[serde(rename = "ramified-partial")]
    RamifiedPartial,
    #[serde(rename = "ramified-total")]
    RamifiedTotal,
}

impl Split3 {
    pub const ALL: [Split3; 5] = [
        Split3::Split,
        Split3::Inert,
        Split3::Partial,
        Split3::RamifiedPartial,
        Split3::RamifiedTotal,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Split3::Split => "split",
            Split3::Inert => "inert",
            Split3::Partial => "partial",
            Split3::RamifiedPartial => "ramified-partial",
            Split3::RamifiedTotal => "ramified-total",
        }
    }
}

impl fmt::Display for Split3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Split3 {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Split3::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown splitting type '{s}'")))
    }
}

/// Factorization type of `f mod 3`, which for a form maximal at 3 is the
/// splitting type of 3.
pub fn splitting_at_3(f: &BinaryCubicForm) -> Result<Split3> {
    if !maximal_at(f, 3) {
        return Err(Error::Precondition(format!("form {f} is not maximal at 3")));
    }
    let roots = roots_mod(f, 3).len();
    let ramified = f.disc() % 3 == 0;
    Ok(match (ramified, roots) {
        (false, 3) => Split3::Split,
        (false, 1) => Split3::Partial,
        (false, 0) => Split3::Inert,
        // A repeated factor of a cubic over F_3 is rational: l²m or l³.
        (true, 2) => Split3::RamifiedPartial,
        (true, 1) => Split3::RamifiedTotal,
        _ => {
            return Err(Error::Precondition(format!(
                "form {f} has {roots} roots mod 3, inconsistent with its discriminant"
            )))
        }
    })
}

/// Isomorphism types of maximal cubic `Z_p`-algebras that are not totally
/// ramified, for odd `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LocalType {
    /// `Z_p × Z_p × Z_p`.
    #[serde(rename = "split")]
    Split,
    /// `Z_p × Z_{p²}`.
    #[serde(rename = "split-unramified")]
    SplitUnramified,
    /// `Z_p × Z_p[√p]`.
    #[serde(rename = "split-ramified")]
    SplitRamified,
    /// `Z_{p³}`.
    #[serde(rename = "inert")]
    Inert,
    /// `Z_p × Z_p[√(εp)]`, `ε` a non-square unit.
    #[serde(rename = "partially-ramified")]
    PartiallyRamified,
}

impl LocalType {
    pub const ALL: [LocalType; 5] = [
        LocalType::Split,
        LocalType::SplitUnramified,
        LocalType::SplitRamified,
        LocalType::Inert,
        LocalType::PartiallyRamified,
    ];

    /// `(Disc_p, #Aut)`.
    pub fn invariants(self, p: u64) -> (u64, u64) {
        match self {
            LocalType::Split => (1, 6),
            LocalType::SplitUnramified => (1, 2),
            LocalType::SplitRamified | LocalType::PartiallyRamified => (p, 2),
            LocalType::Inert => (1, 3),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LocalType::Split => "split",
            LocalType::SplitUnramified => "split-unramified",
            LocalType::SplitRamified => "split-ramified",
            LocalType::Inert => "inert",
            LocalType::PartiallyRamified => "partially-ramified",
        }
    }
}

impl std::str::FromStr for LocalType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LocalType::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown local type '{s}'")))
    }
}

/// `c_p = p/(p+1) · Σ_{R ∈ Σ} 1/(Disc_p(R)·#Aut(R))`.
pub fn local_mass_c(p: u64, sigma: &[LocalType]) -> Result<Rational> {
    if !is_odd_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    let mut sum = ratio(0, 1);
    for t in sigma {
        let (disc, aut) = t.invariants(p);
        sum += ratio(1, (disc * aut) as i64);
    }
    Ok(ratio(p as i64, p as i64 + 1) * sum)
}
