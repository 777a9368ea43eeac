//! Cubic fields of bounded discriminant, via the Davenport–Heilbronn
//! correspondence between cubic fields and classes of maximal irreducible
//! binary cubic forms.

mod cache;
mod enumerate;
mod form;
mod local;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{is_fundamental, ratio, rational_to_f64, Coset3, Rational, Sign, ZETA2};
use crate::quadfields::{cl_13_order, class_groups_up_to, QuadFamily};

pub use cache::{CubicCache, CACHE_FORMAT_VERSION};
pub use enumerate::{enumerate_forms, enumerate_forms_range};
pub use form::{canonical_form, covariant, disc_form, quad_transform, real_roots, small_gl2, BinaryCubicForm, Mat2};
pub use local::{
    is_maximal, local_mass_c, maximal_at, roots_mod, splitting_at_3, square_divisor_primes, LocalType, Split3,
};

/// Signature of a cubic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Signature {
    #[serde(rename = "totally real")]
    TotallyReal,
    #[serde(rename = "complex")]
    Complex,
}

impl Signature {
    pub fn of_disc(d: i64) -> Signature {
        if d > 0 {
            Signature::TotallyReal
        } else {
            Signature::Complex
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Signature::TotallyReal => "totally real",
            Signature::Complex => "complex",
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A cubic field, represented by the canonical form of its class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CubicFieldRecord {
    pub form: BinaryCubicForm,
    pub d_l: i64,
    pub signature: Signature,
    pub split3: Split3,
    pub nowhere_totally_ramified: bool,
}

impl CubicFieldRecord {
    pub const CSV_HEADER: &'static str = "a,b,c,d,d_L,signature,split3,ntr_flag";

    /// Record for a canonical, irreducible, maximal form.
    pub fn from_form(form: BinaryCubicForm) -> Result<Self> {
        let d_l =
            i64::try_from(form.disc()).map_err(|_| Error::Resource(format!("discriminant of {form} overflows i64")))?;
        Ok(CubicFieldRecord {
            form,
            d_l,
            signature: Signature::of_disc(d_l),
            split3: splitting_at_3(&form)?,
            nowhere_totally_ramified: is_fundamental(d_l),
        })
    }

    pub fn sort_key(&self) -> (u64, BinaryCubicForm) {
        (self.d_l.unsigned_abs(), self.form)
    }

    pub fn to_csv(&self) -> String {
        let f = self.form;
        format!(
            "{},{},{},{},{},{},{},{}",
            f.a,
            f.b,
            f.c,
            f.d,
            self.d_l,
            self.signature,
            self.split3,
            u8::from(self.nowhere_totally_ramified)
        )
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let bad = || Error::CacheCorrupt(format!("malformed record line '{line}'"));
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(bad());
        }
        let num = |s: &str| s.parse::<i64>().map_err(|_| bad());
        let form = BinaryCubicForm::new(num(cols[0])?, num(cols[1])?, num(cols[2])?, num(cols[3])?);
        let d_l = num(cols[4])?;
        let signature = match cols[5] {
            "totally real" => Signature::TotallyReal,
            "complex" => Signature::Complex,
            _ => return Err(bad()),
        };
        let split3 = cols[6].parse::<Split3>().map_err(|_| bad())?;
        let ntr = match cols[7] {
            "1" => true,
            "0" => false,
            _ => return Err(bad()),
        };
        let rec = CubicFieldRecord {
            form,
            d_l,
            signature,
            split3,
            nowhere_totally_ramified: ntr,
        };
        if form.disc() != d_l as i128 || signature != Signature::of_disc(d_l) || ntr != is_fundamental(d_l) {
            return Err(Error::CacheCorrupt(format!("inconsistent record '{line}'")));
        }
        Ok(rec)
    }
}

/// Cubic fields with `lo ≤ |d_L| < hi` of the given sign, sorted by `(|d_L|, form)`.
pub fn enumerate_cubic_fields_range(lo: u64, hi: u64, sign: Sign, threads: usize) -> Result<Vec<CubicFieldRecord>> {
    let forms = enumerate_forms_range(lo, hi, sign, threads)?;
    let mut out = Vec::with_capacity(forms.len() / 2);
    for f in forms {
        if is_maximal(&f) {
            out.push(CubicFieldRecord::from_form(f)?);
        }
    }
    out.sort_unstable_by_key(|r| r.sort_key());
    Ok(out)
}

/// Cubic fields with `0 < sign·d_L < x`.
pub fn enumerate_cubic_fields(x: u64, sign: Sign) -> Result<Vec<CubicFieldRecord>> {
    enumerate_cubic_fields_range(1, x, sign, 1)
}

/// Limiting density constant `α_3` of nowhere totally ramified cubic fields
/// per cell; the `1 mod 3` cells count only fields in which 3 splits.
pub fn alpha3(sign: Sign, coset: Coset3) -> Rational {
    match (sign, coset) {
        (Sign::Positive, Coset3::TwoMod3) => ratio(1, 32),
        (Sign::Positive, _) => ratio(1, 96),
        (Sign::Negative, Coset3::TwoMod3) => ratio(3, 32),
        (Sign::Negative, _) => ratio(1, 32),
    }
}

/// Whether the `α_3` cell of `coset` counts only fields with 3 split.
pub fn requires_split(coset: Coset3) -> bool {
    coset == Coset3::OneMod3
}

/// Nowhere totally ramified fields with `d_L` in the family, optionally
/// restricted to those in which 3 splits.
pub fn count_by_family(cache: &CubicCache, family: &QuadFamily, require_3_split: bool) -> Result<u64> {
    if cache.bound() < family.bound {
        return Err(Error::BoundMismatch {
            have: cache.bound(),
            need: family.bound,
        });
    }
    Ok(cache
        .records()
        .iter()
        .filter(|r| r.nowhere_totally_ramified && family.contains(r.d_l))
        .filter(|r| !require_3_split || r.split3 == Split3::Split)
        .count() as u64)
}

/// Per-discriminant counts `(all, 3 split)` of nowhere totally ramified fields.
pub fn fields_by_disc(cache: &CubicCache) -> HashMap<i64, (u32, u32)> {
    let mut out: HashMap<i64, (u32, u32)> = HashMap::new();
    for r in cache.records().iter().filter(|r| r.nowhere_totally_ramified) {
        let e = out.entry(r.d_l).or_default();
        e.0 += 1;
        if r.split3 == Split3::Split {
            e.1 += 1;
        }
    }
    out
}

/// Count of one `α_3` cell against its limiting density `α_3/ζ(2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicDensityReport {
    pub sign: Sign,
    pub coset3: Coset3,
    pub require_3_split: bool,
    #[serde(rename = "X")]
    pub x: u64,
    pub count: u64,
    pub density: f64,
    pub reference: f64,
    pub rel_err: f64,
}

pub fn cubic_density_report(cache: &CubicCache, sign: Sign, coset3: Coset3, x: u64) -> Result<CubicDensityReport> {
    let split = requires_split(coset3);
    let count = count_by_family(cache, &QuadFamily::new(sign, Some(coset3), x), split)?;
    let density = count as f64 / x as f64;
    let reference = rational_to_f64(&alpha3(sign, coset3)) / ZETA2;
    Ok(CubicDensityReport {
        sign,
        coset3,
        require_3_split: split,
        x,
        count,
        density,
        reference,
        rel_err: (density - reference).abs() / reference,
    })
}

/// All eight `α_3` cells at one bound, real cells first.
pub fn cubic_density_table(cache: &CubicCache, x: u64) -> Result<Vec<CubicDensityReport>> {
    let mut out = Vec::with_capacity(8);
    for sign in [Sign::Positive, Sign::Negative] {
        for c in Coset3::ALL {
            out.push(cubic_density_report(cache, sign, c, x)?);
        }
    }
    Ok(out)
}

/// A discriminant where the cubic field count disagrees with the form oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectionMismatch {
    pub d: i64,
    /// `true` for the refined count of fields with 3 split.
    pub refined: bool,
    pub fields: u64,
    pub expected: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectionReport {
    pub max_abs_d: u64,
    pub checked: u64,
    pub checked_refined: u64,
    pub mismatches: Vec<BijectionMismatch>,
}

/// Compares, for every negative fundamental `d` with `|d| ≤ max_abs_d`,
/// the number of cubic fields of discriminant `d` with `(3^{r_3} - 1)/2`,
/// and for `d ≡ 1 mod 3` twice the number with 3 split plus one with
/// `#Cl(O_K[1/3])/3`.
pub fn bijection_check(cache: &CubicCache, max_abs_d: u64) -> Result<BijectionReport> {
    if cache.bound() <= max_abs_d {
        return Err(Error::BoundMismatch {
            have: cache.bound(),
            need: max_abs_d + 1,
        });
    }
    let by_disc = fields_by_disc(cache);
    let mut report = BijectionReport {
        max_abs_d,
        checked: 0,
        checked_refined: 0,
        mismatches: Vec::new(),
    };
    for c in class_groups_up_to(max_abs_d)? {
        let d = c.d.value();
        let (all, split) = by_disc.get(&d).copied().unwrap_or((0, 0));
        let expected = (3u64.pow(c.rank3) - 1) / 2;
        report.checked += 1;
        if all as u64 != expected {
            report.mismatches.push(BijectionMismatch {
                d,
                refined: false,
                fields: all as u64,
                expected,
            });
        }
        if c.d.coset3() == Coset3::OneMod3 {
            report.checked_refined += 1;
            let cl13 = cl_13_order(d)?;
            if 2 * split as u64 + 1 != cl13 {
                report.mismatches.push(BijectionMismatch {
                    d,
                    refined: true,
                    fields: split as u64,
                    expected: (cl13 - 1) / 2,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_complex_fields() {
        let ds: Vec<i64> = enumerate_cubic_fields(100, Sign::Negative)
            .unwrap()
            .iter()
            .map(|r| r.d_l)
            .collect();
        assert_eq!(ds, vec![-23, -31, -44, -59, -76, -83, -87]);
    }

    #[test]
    fn cyclic_49() {
        let recs = enumerate_cubic_fields(50, Sign::Positive).unwrap();
        let r = recs.iter().find(|r| r.d_l == 49).unwrap();
        assert!(!r.nowhere_totally_ramified);
        assert_eq!(r.signature, Signature::TotallyReal);
    }

    #[test]
    fn csv_round_trip() {
        let r = CubicFieldRecord::from_form(canonical_form(&BinaryCubicForm::new(1, 0, -1, -1)).unwrap()).unwrap();
        assert_eq!(CubicFieldRecord::from_csv(&r.to_csv()).unwrap(), r);
        assert!(CubicFieldRecord::from_csv("1,0,-1,-1,-22,complex,inert,1").is_err());
    }

    #[test]
    fn alpha3_totals() {
        let mut neg = ratio(0, 1);
        for c in Coset3::ALL {
            neg += alpha3(Sign::Negative, c);
        }
        assert_eq!(neg, ratio(3, 16));
    }

    #[test]
    fn small_bijection() {
        let cache = CubicCache::build(2001, 1).unwrap();
        let r = bijection_check(&cache, 2000).unwrap();
        assert!(r.mismatches.is_empty(), "{:?}", r.mismatches);
        assert!(r.checked > 500 && r.checked_refined > 100);
        assert!(bijection_check(&cache, 2001).is_err());
        let t = cubic_density_table(&cache, 2000).unwrap();
        assert_eq!(t.len(), 8);
        assert!(cubic_density_report(&cache, Sign::Negative, Coset3::OneMod3, 5000).is_err());
    }
}
