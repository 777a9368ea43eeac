//! Cohen–Lenstra constants `α_{p,u,r}` and the conjectural probability and
//! average tables for `(K_{2n}(O_F)/p)^-` as `F` varies over quadratic fields.
//!
//! All average tables are exact rationals. Probabilities are `f64` with a
//! certified truncation bound coming from [`alpha`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{is_odd_prime, ratio, Rational, Sign};

/// Default truncation tolerance for `α`.
pub const DEFAULT_TOL: f64 = 1e-12;

/// `α_{p,u,r}` together with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaValue {
    pub p: u64,
    pub u: u32,
    pub r: u32,
    pub value: f64,
    pub error_bound: f64,
}

/// Evaluates `α_{p,u,r} = ∏_{i>r}(1-p^{-i}) / (p^{r(u+r)} ∏_{i=1}^{r+u}(1-p^{-i}))`.
///
/// The infinite product is cut at the first `N > r` with
/// `Σ_{i>N} p^{-i} = p^{-N}/(p-1) < tol`; since `1 ≥ ∏_{i>N}(1-p^{-i}) ≥ 1 - p^{-N}/(p-1)`
/// the returned value overestimates the limit by at most `value · p^{-N}/(p-1)`.
pub fn alpha(p: u64, u: u32, r: u32, tol: f64) -> Result<AlphaValue> {
    if !is_odd_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let pf = p as f64;
    let inv = 1.0 / pf;
    let mut n = r + 1;
    let mut tail = inv.powi(n as i32) / (pf - 1.0);
    while tail >= tol {
        n += 1;
        tail *= inv;
    }
    let mut numer = 1.0;
    let mut pw = inv.powi(r as i32 + 1);
    for _ in (r + 1)..=n {
        numer *= 1.0 - pw;
        pw *= inv;
    }
    let mut denom = 1.0;
    let mut pw = inv;
    for _ in 1..=(r + u) {
        denom *= 1.0 - pw;
        pw *= inv;
    }
    let scale = pf.powf(-((r as f64) * ((u + r) as f64)));
    let value = numer / denom * scale;
    // Rounding in ~N+r+u multiplications is far below the truncation term.
    let rounding = value * f64::EPSILON * (4.0 * (n + u + r) as f64);
    Ok(AlphaValue {
        p,
        u,
        r,
        value,
        error_bound: value * tail + rounding,
    })
}

/// `α_{p,u,r}` for a possibly negative `r`; `α_{p,u,-1} = 0`.
pub fn alpha_shifted(p: u64, u: u32, r: i64, tol: f64) -> Result<AlphaValue> {
    if r < 0 {
        if !is_odd_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
        }
        return Ok(AlphaValue {
            p,
            u,
            r: 0,
            value: 0.0,
            error_bound: 0.0,
        });
    }
    alpha(p, u, r as u32, tol)
}

/// `Prob(d ∈ Q_p^{×2}) = p/(2p+2)` over fundamental discriminants of one sign.
pub fn split_probability(p: u64) -> Rational {
    ratio(p as i64, 2 * p as i64 + 2)
}

/// `Prob(p*d ∈ Q_p^{×2}) = 1/(2p+2)`.
pub fn pstar_split_probability(p: u64) -> Rational {
    ratio(1, 2 * p as i64 + 2)
}

/// Which row of the tables an `n` falls into, for a fixed odd prime `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NClass {
    #[serde(rename = "n even, n ≡ 0 (mod p-1)")]
    EvenZero,
    #[serde(rename = "n even, n ≡ (p-1)/2 (mod p-1)")]
    EvenHalf,
    #[serde(rename = "n even, all other cases")]
    EvenOther,
    #[serde(rename = "n odd, n ≡ (p-1)/2 (mod p-1)")]
    OddHalf,
    #[serde(rename = "n odd, all other cases")]
    OddOther,
}

impl NClass {
    pub const ALL: [NClass; 5] = [
        NClass::EvenZero,
        NClass::EvenHalf,
        NClass::EvenOther,
        NClass::OddHalf,
        NClass::OddOther,
    ];

    pub fn of(n: u64, p: u64) -> NClass {
        let m = p - 1;
        let half = m / 2;
        let res = n % m;
        if n.is_multiple_of(2) {
            if res == 0 {
                NClass::EvenZero
            } else if res == half {
                NClass::EvenHalf
            } else {
                NClass::EvenOther
            }
        } else if res == half {
            NClass::OddHalf
        } else {
            NClass::OddOther
        }
    }

    pub fn is_even(self) -> bool {
        matches!(self, NClass::EvenZero | NClass::EvenHalf | NClass::EvenOther)
    }

    /// Whether some `n ≥ 1` lands in this row for the prime `p`.
    pub fn is_realizable(self, p: u64) -> bool {
        (1..=2 * (p - 1)).any(|n| NClass::of(n, p) == self)
    }

    /// The local condition that defines the special box of this row, if any.
    pub fn special_condition(self) -> Option<LocalCondition> {
        match self {
            NClass::EvenZero => Some(LocalCondition::DSquare),
            NClass::EvenHalf | NClass::OddHalf => Some(LocalCondition::PStarDSquare),
            NClass::EvenOther | NClass::OddOther => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NClass::EvenZero => "n even, n ≡ 0 (mod p-1)",
            NClass::EvenHalf => "n even, n ≡ (p-1)/2 (mod p-1)",
            NClass::EvenOther => "n even, all other cases",
            NClass::OddHalf => "n odd, n ≡ (p-1)/2 (mod p-1)",
            NClass::OddOther => "n odd, all other cases",
        }
    }
}

impl fmt::Display for NClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A `p`-adic condition on `d` selecting a box of the residue-class tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LocalCondition {
    #[serde(rename = "d ∈ Q_p^×2")]
    DSquare,
    #[serde(rename = "p*d ∈ Q_p^×2")]
    PStarDSquare,
    #[serde(rename = "all other cases")]
    Complement,
}

impl LocalCondition {
    pub fn label(self) -> &'static str {
        match self {
            LocalCondition::DSquare => "d ∈ Q_p^×2",
            LocalCondition::PStarDSquare => "p*d ∈ Q_p^×2",
            LocalCondition::Complement => "all other cases",
        }
    }
}

/// One box of the conjecture tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilySelector {
    pub p: u64,
    pub n_class: NClass,
    pub sign: Sign,
    pub local_condition: Option<LocalCondition>,
}

impl FamilySelector {
    pub fn new(p: u64, n_class: NClass, sign: Sign, local_condition: Option<LocalCondition>) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
        }
        if let Some(cond) = local_condition {
            let ok = cond == LocalCondition::Complement || n_class.special_condition() == Some(cond);
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "condition '{}' does not define a box in row '{}'",
                    cond.label(),
                    n_class.label()
                )));
            }
        }
        Ok(FamilySelector {
            p,
            n_class,
            sign,
            local_condition,
        })
    }

    /// Selector for a concrete `n`.
    pub fn for_n(p: u64, n: u64, sign: Sign, local_condition: Option<LocalCondition>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if !is_odd_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
        }
        Self::new(p, NClass::of(n, p), sign, local_condition)
    }

    /// Whether the box is the special one (`u` and the Brauer term raised).
    fn is_special_box(&self) -> bool {
        matches!(self.local_condition, Some(c) if c != LocalCondition::Complement)
    }
}

/// `(u, shift)` such that the residue-class cell is `α_{p,u,r-shift}`.
fn residue_cell(n_class: NClass, sign: Sign, special: bool) -> (u32, i64) {
    let real = sign == Sign::Positive;
    match (n_class.is_even(), special, real) {
        (true, true, true) => (2, 1),
        (true, true, false) => (1, 1),
        (true, false, true) => (1, 0),
        (true, false, false) => (0, 0),
        (false, true, true) => (1, 1),
        (false, true, false) => (2, 1),
        (false, false, true) => (0, 0),
        (false, false, false) => (1, 0),
    }
}

/// Conjectural `Prob(dim (K_{2n}(O_F)/p)^- = r)` in the selected family,
/// together with its truncation error bound.
pub fn rank_distribution_bounded(sel: &FamilySelector, r: u32, tol: f64) -> Result<(f64, f64)> {
    let p = sel.p;
    let r = r as i64;
    match sel.local_condition {
        Some(_) => {
            let (u, shift) = residue_cell(sel.n_class, sel.sign, sel.is_special_box());
            let a = alpha_shifted(p, u, r - shift, tol)?;
            Ok((a.value, a.error_bound))
        }
        None => {
            // Signature-only rows, written as in the introduction's table.
            let pf = p as f64;
            let real = sel.sign == Sign::Positive;
            let (u_hi, u_lo) = match (sel.n_class.is_even(), real) {
                (true, true) => (2, 1),
                (true, false) => (1, 0),
                (false, true) => (1, 0),
                (false, false) => (2, 1),
            };
            let mix = |w_hi: f64, w_lo: f64| -> Result<(f64, f64)> {
                let a = alpha_shifted(p, u_hi, r - 1, tol)?;
                let b = alpha(p, u_lo, r as u32, tol)?;
                Ok((
                    0.5 * (w_hi * a.value + w_lo * b.value),
                    0.5 * (w_hi * a.error_bound + w_lo * b.error_bound),
                ))
            };
            match sel.n_class {
                NClass::EvenZero => mix(pf / (pf + 1.0), (pf + 2.0) / (pf + 1.0)),
                NClass::EvenHalf | NClass::OddHalf => mix(1.0 / (pf + 1.0), (2.0 * pf + 1.0) / (pf + 1.0)),
                NClass::EvenOther | NClass::OddOther => {
                    let b = alpha(p, u_lo, r as u32, tol)?;
                    Ok((b.value, b.error_bound))
                }
            }
        }
    }
}

pub fn rank_distribution(sel: &FamilySelector, r: u32, tol: f64) -> Result<f64> {
    rank_distribution_bounded(sel, r, tol).map(|(v, _)| v)
}

/// A truncated probability distribution on `r = 0, 1, …, truncation_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    pub entries: BTreeMap<u32, f64>,
    pub truncation_r: u32,
}

impl DistributionTable {
    pub fn from_fn(truncation_r: u32, mut f: impl FnMut(u32) -> f64) -> Self {
        DistributionTable {
            entries: (0..=truncation_r).map(|r| (r, f(r))).collect(),
            truncation_r,
        }
    }

    pub fn get(&self, r: u32) -> f64 {
        self.entries.get(&r).copied().unwrap_or(0.0)
    }

    pub fn tail_mass(&self) -> f64 {
        1.0 - self.entries.values().sum::<f64>()
    }

    pub fn max_abs_deviation(&self, other: &DistributionTable) -> f64 {
        let top = self.truncation_r.max(other.truncation_r);
        (0..=top)
            .map(|r| (self.get(r) - other.get(r)).abs())
            .fold(0.0, f64::max)
    }
}

/// The distribution of a selector on `0..=r_max`.
pub fn distribution(sel: &FamilySelector, r_max: u32, tol: f64) -> Result<DistributionTable> {
    let mut entries = BTreeMap::new();
    for r in 0..=r_max {
        entries.insert(r, rank_distribution(sel, r, tol)?);
    }
    Ok(DistributionTable {
        entries,
        truncation_r: r_max,
    })
}

/// One labelled row of an exact two-column table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    #[serde(with = "rational_string")]
    pub real: Rational,
    #[serde(with = "rational_string")]
    pub imaginary: Rational,
}

/// A table of exact rationals with a real and an imaginary column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTable {
    pub title: String,
    pub p: u64,
    pub columns: [String; 2],
    pub rows: Vec<TableRow>,
}

impl RationalTable {
    pub fn get(&self, label: &str, sign: Sign) -> Option<&Rational> {
        self.rows.iter().find(|r| r.label == label).map(|r| match sign {
            Sign::Positive => &r.real,
            Sign::Negative => &r.imaginary,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("row,{},{}\n", self.columns[0], self.columns[1]);
        for row in &self.rows {
            out.push_str(&format!("\"{}\",{},{}\n", row.label, row.real, row.imaginary));
        }
        out
    }

    pub fn to_pretty(&self) -> String {
        let w = self
            .rows
            .iter()
            .map(|r| r.label.chars().count())
            .max()
            .unwrap_or(0)
            .max(4);
        let mut out = format!("{} (p = {})\n", self.title, self.p);
        out.push_str(&format!(
            "{:<w$} || {:>14} | {:>14}\n",
            "",
            self.columns[0],
            self.columns[1],
            w = w
        ));
        out.push_str(&format!("{}\n", "=".repeat(w + 36)));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<w$} || {:>14} | {:>14}\n",
                row.label,
                row.real.to_string(),
                row.imaginary.to_string(),
                w = w
            ));
        }
        out
    }
}

pub mod rational_string {
    use super::Rational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse::<Rational>().map_err(D::Error::custom)
    }
}

fn q(n: i64, d: i64) -> Rational {
    ratio(n, d)
}

fn row(label: &str, real: Rational, imaginary: Rational) -> TableRow {
    TableRow {
        label: label.to_string(),
        real,
        imaginary,
    }
}

/// Conjectural average of `#(K_{2n}(O_F)/p)^-` over all real / imaginary
/// quadratic fields, one row per [`NClass`].
pub fn average_table(p: u64) -> Result<RationalTable> {
    if !is_odd_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    let p = p as i64;
    let a = q(p * p * p + p * p + 4 * p + 2, 2 * p * p + 2 * p);
    let b = q(p * p + 3 * p + 4, 2 * p + 2);
    let c = q(3 * p * p + 3 * p + 2, 2 * p * p + 2 * p);
    let e = q(5 * p + 3, 2 * p + 2);
    let f = q(p + 1, p);
    let two = q(2, 1);
    Ok(RationalTable {
        title: "Average order of (K_2n(O_F)/p)^-".into(),
        p: p as u64,
        columns: ["real".into(), "imaginary".into()],
        rows: vec![
            row(NClass::EvenZero.label(), a, b),
            row(NClass::EvenHalf.label(), c.clone(), e.clone()),
            row(NClass::EvenOther.label(), f.clone(), two.clone()),
            row(NClass::OddHalf.label(), e, c),
            row(NClass::OddOther.label(), two, f),
        ],
    })
}

/// Labels of the ten residue-class boxes, in table order.
pub fn residue_row_labels() -> [&'static str; 5] {
    [
        "n even, n ≡ 0 (mod p-1), d ∈ Q_p^×2",
        "n even, n ≡ (p-1)/2 (mod p-1), p*d ∈ Q_p^×2",
        "n even, all other cases",
        "n odd, n ≡ (p-1)/2 (mod p-1), p*d ∈ Q_p^×2",
        "n odd, all other cases",
    ]
}

/// Index into [`residue_row_labels`] for a selector with a local condition.
pub fn residue_row_index(sel: &FamilySelector) -> usize {
    let special = sel.is_special_box();
    match (sel.n_class, special) {
        (NClass::EvenZero, true) => 0,
        (NClass::EvenHalf, true) => 1,
        (NClass::OddHalf, true) => 3,
        (c, _) if c.is_even() => 2,
        _ => 4,
    }
}

/// Conjectural average of `#(Cl(O_E[1/p])/p)^χ` in the ten residue-class boxes.
pub fn class_average_table(p: u64) -> Result<RationalTable> {
    if !is_odd_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    let pi = p as i64;
    let p2 = q(1, 1) + q(1, pi * pi);
    let p1 = q(1, 1) + q(1, pi);
    let two = q(2, 1);
    let l = residue_row_labels();
    Ok(RationalTable {
        title: "Average order of (Cl(O_E[1/p])/p)^chi".into(),
        p,
        columns: ["d>0".into(), "d<0".into()],
        rows: vec![
            row(l[0], p2.clone(), p1.clone()),
            row(l[1], p2.clone(), p1.clone()),
            row(l[2], p1.clone(), two.clone()),
            row(l[3], p1.clone(), p2),
            row(l[4], two, p1),
        ],
    })
}

/// Conjectural average of `#(K_{2n}(O_F)/p)^-` in the ten residue-class boxes.
pub fn residue_average_table(p: u64) -> Result<RationalTable> {
    if !is_odd_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    let pi = p as i64;
    let pp = q(pi, 1) + q(1, pi);
    let p_1 = q(pi + 1, 1);
    let p1 = q(1, 1) + q(1, pi);
    let two = q(2, 1);
    let l = residue_row_labels();
    Ok(RationalTable {
        title: "Average order of (K_2n(O_F)/p)^- in residue classes".into(),
        p,
        columns: ["d>0".into(), "d<0".into()],
        rows: vec![
            row(l[0], pp.clone(), p_1.clone()),
            row(l[1], pp.clone(), p_1.clone()),
            row(l[2], p1.clone(), two.clone()),
            row(l[3], p_1, pp),
            row(l[4], two, p1),
        ],
    })
}

/// Look up a residue-class table cell by selector.
pub fn residue_cell_value<'a>(table: &'a RationalTable, sel: &FamilySelector) -> &'a Rational {
    let row = &table.rows[residue_row_index(sel)];
    match sel.sign {
        Sign::Positive => &row.real,
        Sign::Negative => &row.imaginary,
    }
}

/// The `p = 3` class-group table with rows `d_K ∈ Q_3^{×2}` / `d_K ∉ Q_3^{×2}`.
pub fn class_average_table_p3() -> RationalTable {
    RationalTable {
        title: "Average order of Cl(O_K[1/3])/3".into(),
        p: 3,
        columns: ["d_K>0".into(), "d_K<0".into()],
        rows: vec![
            row("d_K ∈ Q_3^×2", q(10, 9), q(4, 3)),
            row("d_K ∉ Q_3^×2", q(4, 3), q(2, 1)),
        ],
    }
}

/// `1 + p^{-u}`.
pub fn moment_limit(p: u64, u: u32) -> Rational {
    Rational::one() + Rational::new(BigInt::one(), BigInt::from(p).pow(u))
}

/// Truncated moment sums `(Σ_{r≤R} α, Σ_{r≤R} p^r α)` and the accumulated
/// error bound of the second sum.
pub fn alpha_moments(p: u64, u: u32, r_max: u32, tol: f64) -> Result<(f64, f64, f64)> {
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut err = 0.0;
    let mut pr = 1.0;
    for r in 0..=r_max {
        let a = alpha(p, u, r, tol)?;
        s0 += a.value;
        s1 += pr * a.value;
        err += pr * a.error_bound;
        pr *= p as f64;
    }
    Ok((s0, s1, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rational_to_f64;

    #[test]
    fn alpha_anchor() {
        let a = alpha(3, 0, 0, 1e-12).unwrap();
        // ∏_{i≥1}(1-3^{-i}) evaluated to i = 60 in the test body.
        let mut prod = 1.0f64;
        for i in 1..=60 {
            prod *= 1.0 - 3f64.powi(-i);
        }
        assert!((a.value - prod).abs() < 1e-12);
        assert!((a.value - 0.560126).abs() < 1e-6);
        assert!(a.error_bound <= 1e-12);
        assert!(alpha(4, 0, 0, 1e-12).is_err());
        assert!(alpha(2, 0, 0, 1e-12).is_err());
        assert!(alpha(3, 0, 0, 0.0).is_err());
    }

    #[test]
    fn moments() {
        for p in [3u64, 5, 7] {
            for u in 0..3 {
                let (s0, s1, _) = alpha_moments(p, u, 40, 1e-14).unwrap();
                assert!((s0 - 1.0).abs() < 1e-10, "p={p} u={u} s0={s0}");
                let lim = rational_to_f64(&moment_limit(p, u));
                assert!((s1 - lim).abs() < 1e-8, "p={p} u={u} s1={s1}");
            }
        }
    }

    #[test]
    fn split_probability_values() {
        assert_eq!(split_probability(3), ratio(3, 8));
        assert_eq!(split_probability(5), ratio(5, 12));
        let big = rational_to_f64(&split_probability(1_000_003));
        assert!((big - 0.5).abs() < 1e-6);
    }

    #[test]
    fn average_table_p3_matches_theorem() {
        let t = average_table(3).unwrap();
        assert_eq!(t.rows[0].real, ratio(25, 12));
        assert_eq!(t.rows[0].imaginary, ratio(11, 4));
        assert_eq!(t.rows[3].real, ratio(9, 4));
        assert_eq!(t.rows[3].imaginary, ratio(19, 12));
        let t5 = average_table(5).unwrap();
        assert_eq!(t5.rows[0].real, ratio(43, 15));
    }

    #[test]
    fn class_average_p3() {
        let t = class_average_table(3).unwrap();
        assert_eq!(t.rows[0].real, ratio(10, 9));
        assert_eq!(t.rows[0].imaginary, ratio(4, 3));
        assert_eq!(t.rows[2].imaginary, ratio(2, 1));
        for p in [3u64, 5, 7, 11] {
            let t = class_average_table(p).unwrap();
            assert_eq!(t.rows[2].imaginary, ratio(2, 1));
        }
    }

    #[test]
    fn selector_validation() {
        assert!(FamilySelector::new(3, NClass::OddHalf, Sign::Positive, Some(LocalCondition::DSquare)).is_err());
        assert!(FamilySelector::new(3, NClass::EvenZero, Sign::Positive, Some(LocalCondition::PStarDSquare)).is_err());
        assert!(FamilySelector::new(3, NClass::EvenOther, Sign::Positive, Some(LocalCondition::DSquare)).is_err());
        assert!(FamilySelector::new(9, NClass::EvenZero, Sign::Positive, None).is_err());
        assert_eq!(NClass::of(2, 3), NClass::EvenZero);
        assert_eq!(NClass::of(1, 3), NClass::OddHalf);
        assert_eq!(NClass::of(2, 5), NClass::EvenHalf);
        assert_eq!(NClass::of(3, 5), NClass::OddOther);
        assert_eq!(NClass::of(2, 7), NClass::EvenOther);
        assert!(!NClass::EvenOther.is_realizable(3));
        assert!(!NClass::EvenOther.is_realizable(5));
        assert!(NClass::EvenOther.is_realizable(7));
        assert!(!NClass::OddHalf.is_realizable(5));
    }

    #[test]
    fn rank_distribution_examples() {
        let sel = FamilySelector::new(3, NClass::EvenZero, Sign::Positive, Some(LocalCondition::DSquare)).unwrap();
        assert_eq!(rank_distribution(&sel, 0, 1e-12).unwrap(), 0.0);
        let sel = FamilySelector::new(3, NClass::EvenOther, Sign::Negative, None).unwrap();
        let v = rank_distribution(&sel, 0, 1e-12).unwrap();
        assert!((v - alpha(3, 0, 0, 1e-12).unwrap().value).abs() < 1e-15);
        let sel = FamilySelector::new(3, NClass::EvenZero, Sign::Positive, None).unwrap();
        for r in 0..6 {
            let v = rank_distribution(&sel, r, 1e-12).unwrap();
            let a = alpha_shifted(3, 2, r as i64 - 1, 1e-12).unwrap().value;
            let b = alpha(3, 1, r, 1e-12).unwrap().value;
            assert!((v - (3.0 / 8.0 * a + 5.0 / 8.0 * b)).abs() < 1e-14);
        }
    }

    #[test]
    fn table_serialization_round_trip() {
        let t = average_table(5).unwrap();
        let js = serde_json::to_string(&t).unwrap();
        let back: RationalTable = serde_json::from_str(&js).unwrap();
        assert_eq!(back, t);
        assert!(t.to_csv().starts_with("row,real,imaginary\n"));
        assert!(t.to_csv().contains("\"n even, n ≡ 0 (mod p-1)\",43/15,"));
    }
}
