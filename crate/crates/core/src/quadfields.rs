//! Fundamental discriminants by sign and 3-adic coset, and class groups of
//! imaginary quadratic fields through reduced binary quadratic forms.

use std::collections::HashSet;
use std::fmt;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{is_fundamental, ratio, rational_to_f64};
use crate::exactmath::{kronecker, Coset3, FundamentalDiscriminant, Rational, Sign, SquarefreeSieve, ZETA2};

/// Largest `|d|` accepted by the class-group oracle.
pub const DEFAULT_CLASS_BOUND: i64 = 10_000_000;

const STREAM_SEGMENT: u64 = 1 << 20;

/// Fundamental discriminants with a given sign, optional coset and `|d| < bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadFamily {
    pub sign: Sign,
    pub coset3: Option<Coset3>,
    pub bound: u64,
}

impl QuadFamily {
    pub fn new(sign: Sign, coset3: Option<Coset3>, bound: u64) -> Self {
        QuadFamily { sign, coset3, bound }
    }

    pub fn contains(&self, d: i64) -> bool {
        Sign::of(d) == self.sign
            && d.unsigned_abs() < self.bound
            && is_fundamental(d)
            && self.coset3.is_none_or(|c| Coset3::of(d) == Some(c))
    }

    /// Limiting proportion of fundamental discriminants of this sign in the
    /// family's coset (1/2 summed over one sign).
    pub fn alpha2(&self) -> Rational {
        match self.coset3 {
            None => ratio(1, 2),
            Some(c) => alpha2(c),
        }
    }
}

impl fmt::Display for QuadFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coset = self.coset3.map_or("any", |c| c.label());
        write!(f, "sign {} coset {} |d| < {}", self.sign, coset, self.bound)
    }
}

/// `α_2` weight of a coset: 3/16 for `1, 2 mod 3` and 1/16 for `3, 6 mod 9`.
pub fn alpha2(c: Coset3) -> Rational {
    match c {
        Coset3::OneMod3 | Coset3::TwoMod3 => ratio(3, 16),
        Coset3::ThreeMod9 | Coset3::SixMod9 => ratio(1, 16),
    }
}

/// Ascending-`|d|` stream over a [`QuadFamily`], sieved in segments.
pub struct DiscriminantStream {
    family: QuadFamily,
    sieve: SquarefreeSieve,
    next_lo: u64,
    buffer: std::vec::IntoIter<FundamentalDiscriminant>,
}

impl DiscriminantStream {
    fn fill(&mut self) -> Result<bool> {
        let bound = self.family.bound;
        if self.next_lo >= bound {
            return Ok(false);
        }
        let lo = self.next_lo;
        let hi = (lo + STREAM_SEGMENT).min(bound); // exclusive
        self.next_lo = hi;
        let sf = self.sieve.sieve(lo, hi - 1)?;
        let (qlo, qhi) = ((lo / 4).max(1), ((hi - 1) / 4).max(1));
        let sf4 = self.sieve.sieve(qlo, qhi)?;
        let s = self.family.sign.as_i64();
        let mut out = Vec::new();
        for a in lo..hi {
            let d = s * a as i64;
            let ok = if d.rem_euclid(4) == 1 {
                sf.contains(a)
            } else if a % 4 == 0 {
                let m = d / 4;
                matches!(m.rem_euclid(4), 2 | 3) && sf4.contains(a / 4)
            } else {
                false
            };
            if !ok || d == 1 {
                continue;
            }
            let fd = FundamentalDiscriminant::new_unchecked(d);
            if self.family.coset3.is_none_or(|c| c == fd.coset3()) {
                out.push(fd);
            }
        }
        self.buffer = out.into_iter();
        Ok(true)
    }
}

impl Iterator for DiscriminantStream {
    type Item = FundamentalDiscriminant;

    fn next(&mut self) -> Option<FundamentalDiscriminant> {
        loop {
            if let Some(d) = self.buffer.next() {
                return Some(d);
            }
            // Segments are bounded well inside the sieve budget.
            if !self.fill().expect("segment sieve within budget") {
                return None;
            }
        }
    }
}

/// Fundamental discriminants of the family in ascending `|d|`.
pub fn enumerate_discriminants(family: QuadFamily) -> Result<DiscriminantStream> {
    if family.bound < 3 {
        return Err(Error::InvalidArgument(format!(
            "bound must be at least 3, got {}",
            family.bound
        )));
    }
    Ok(DiscriminantStream {
        family,
        sieve: SquarefreeSieve::default(),
        next_lo: 3,
        buffer: Vec::new().into_iter(),
    })
}

/// Count of a family against its limiting density `α_2/ζ(2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub family: QuadFamily,
    pub count: u64,
    pub density: f64,
    pub reference: f64,
    pub rel_err: f64,
}

pub fn density_report(family: QuadFamily) -> Result<DensityReport> {
    let count = enumerate_discriminants(family)?.count() as u64;
    let density = count as f64 / family.bound as f64;
    let reference = rational_to_f64(&family.alpha2()) / ZETA2;
    Ok(DensityReport {
        family,
        count,
        density,
        reference,
        rel_err: (density - reference).abs() / reference,
    })
}

/// Positive definite binary quadratic form `ax² + bxy + cy²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// Principal form of discriminant `d`.
    pub fn identity(d: i64) -> Self {
        let b = d.rem_euclid(2);
        QuadForm::new(1, b, (b * b - d) / 4)
    }

    pub fn inverse(&self) -> Self {
        QuadForm::new(self.a, -self.b, self.c).reduce()
    }

    pub fn is_reduced(&self) -> bool {
        let QuadForm { a, b, c } = *self;
        b.abs() <= a && a <= c && !(b < 0 && (b.abs() == a || a == c))
    }

    /// Unique reduced form in the proper equivalence class.
    pub fn reduce(self) -> Self {
        let QuadForm { mut a, mut b, mut c } = self;
        loop {
            // Normalize b into (-a, a].
            if b > a || b <= -a {
                let two_a = 2 * a;
                let k = Integer::div_floor(&(a - b), &two_a);
                let nb = b + two_a * k;
                c += k * (b + a * k);
                b = nb;
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            return QuadForm { a, b, c };
        }
    }

    /// Gaussian composition of two forms of the same discriminant, reduced.
    pub fn compose(&self, other: &QuadForm) -> QuadForm {
        let disc = self.disc();
        let (f1, f2) = if self.a > other.a { (other, self) } else { (self, other) };
        let (a1, b1) = (f1.a, f1.b);
        let (a2, b2, c2) = (f2.a, f2.b, f2.c);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (y1, d) = if a2 % a1 == 0 {
            (0, a1)
        } else {
            let g = a2.extended_gcd(&a1);
            (g.x, g.gcd)
        };
        let (x2, y2, d1) = if s % d == 0 {
            (0, -1, d)
        } else {
            let g = s.extended_gcd(&d);
            (g.x, -g.y, g.gcd)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 as i128 * y2 as i128 * n as i128 - x2 as i128 * c2 as i128).rem_euclid(v1 as i128) as i64;
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let c3 = ((b3 as i128 * b3 as i128 - disc as i128) / (4 * a3 as i128)) as i64;
        QuadForm::new(a3, b3, c3).reduce()
    }

    pub fn pow(&self, mut e: u64) -> QuadForm {
        let mut acc = QuadForm::identity(self.disc());
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }
}

/// All reduced primitive forms of negative discriminant `d`.
pub fn reduced_forms(d: i64) -> Vec<QuadForm> {
    assert!(d < 0 && d.rem_euclid(4) <= 1);
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -d {
        for b in (-a + 1)..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let f = QuadForm::new(a, b, c);
            if c >= a && f.is_reduced() && a.gcd(&b).gcd(&c) == 1 {
                out.push(f);
            }
        }
        a += 1;
    }
    out
}

/// Class number and 3-rank of an imaginary quadratic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImaginaryClassData {
    pub d: FundamentalDiscriminant,
    pub h: u64,
    pub rank3: u32,
}

fn check_imaginary(d: i64) -> Result<FundamentalDiscriminant> {
    let fd = FundamentalDiscriminant::new(d)?;
    if d >= 0 {
        return Err(Error::InvalidArgument(format!("{d} is not negative")));
    }
    if d < -DEFAULT_CLASS_BOUND {
        return Err(Error::InvalidArgument(format!(
            "|d| = {} exceeds the class-group bound {DEFAULT_CLASS_BOUND}",
            -d
        )));
    }
    Ok(fd)
}

struct ClassGroup {
    forms: Vec<QuadForm>,
    cubes: HashSet<QuadForm>,
    rank3: u32,
}

fn class_group(d: i64) -> ClassGroup {
    let forms = reduced_forms(d);
    let id = QuadForm::identity(d);
    let mut cubes = HashSet::new();
    let mut killed = 0u64;
    for f in &forms {
        let f3 = f.pow(3);
        if f3 == id {
            killed += 1;
        }
        cubes.insert(f3);
    }
    let mut rank3 = 0;
    while killed > 1 {
        killed /= 3;
        rank3 += 1;
    }
    ClassGroup { forms, cubes, rank3 }
}

pub fn imaginary_class_group(d: i64) -> Result<ImaginaryClassData> {
    let fd = check_imaginary(d)?;
    let g = class_group(d);
    Ok(ImaginaryClassData {
        d: fd,
        h: g.forms.len() as u64,
        rank3: g.rank3,
    })
}

/// Reduced form of a prime ideal above 3 when 3 splits in `Q(√d)`.
pub fn prime_form_above_3(d: i64) -> Option<QuadForm> {
    if kronecker(d, 3) != 1 {
        return None;
    }
    (0..6i64)
        .find(|b| (b * b - d) % 12 == 0)
        .map(|b| QuadForm::new(3, b, (b * b - d) / 12).reduce())
}

/// `#Cl(O_K[1/3])/3` for imaginary `K = Q(√d)`.
pub fn cl_13_order(d: i64) -> Result<u64> {
    check_imaginary(d)?;
    let g = class_group(d);
    let rank = match prime_form_above_3(d) {
        Some(p3) if !g.cubes.contains(&p3) => g.rank3 - 1,
        _ => g.rank3,
    };
    Ok(3u64.pow(rank))
}

/// Class data for every negative fundamental discriminant with `|d| ≤ max_abs_d`.
pub fn class_groups_up_to(max_abs_d: u64) -> Result<Vec<ImaginaryClassData>> {
    if max_abs_d < 3 {
        return Ok(Vec::new());
    }
    let ds: Vec<i64> = enumerate_discriminants(QuadFamily::new(Sign::Negative, None, max_abs_d + 1))?
        .map(|d| d.value())
        .collect();
    ds.par_iter().map(|&d| imaginary_class_group(d)).collect()
}

/// One CSV row of a discriminant listing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadRow {
    pub d: i64,
    pub sign: Sign,
    pub coset3: Coset3,
    pub h: Option<u64>,
    pub rank3: Option<u32>,
}

impl QuadRow {
    pub const CSV_HEADER: &'static str = "d,sign,coset3,h,rank3";

    pub fn plain(d: FundamentalDiscriminant) -> Self {
        QuadRow {
            d: d.value(),
            sign: d.sign(),
            coset3: d.coset3(),
            h: None,
            rank3: None,
        }
    }

    pub fn with_class(c: &ImaginaryClassData) -> Self {
        QuadRow {
            h: Some(c.h),
            rank3: Some(c.rank3),
            ..QuadRow::plain(c.d)
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<u64>| x.map_or(String::new(), |v| v.to_string());
        format!(
            "{},{},{},{},{}",
            self.d,
            self.sign,
            self.coset3,
            opt(self.h),
            opt(self.rank3.map(u64::from))
        )
    }
}
