//! K-theoretic quantities of quadratic rings of integers: Brauer components,
//! `u`-values, odd K-groups, `κ_{2n,p}`, and the empirical averages at `p = 3`
//! assembled from cubic field counts.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cubic::{fields_by_disc, CubicCache};
use crate::error::{Error, Result};
use crate::exactmath::{
    bernoulli_c, is_odd_prime, kronecker, ratio, rational_to_f64, Coset3, FundamentalDiscriminant, Rational, Sign,
};
use crate::heuristics::{
    average_table, class_average_table, rational_string, residue_cell_value, FamilySelector, LocalCondition, NClass,
};
use crate::quadfields::{cl_13_order, enumerate_discriminants, QuadFamily};

/// Vandiver's conjecture is verified for all primes below this bound.
pub const VANDIVER_VERIFIED_BOUND: u64 = 163_577_856;

/// `p* = (-1)^{(p-1)/2} p`.
pub fn p_star(p: u64) -> i64 {
    if p % 4 == 1 {
        p as i64
    } else {
        -(p as i64)
    }
}

/// The data `(p, n, d)` that selects a box of the local tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalClassifier {
    pub p: u64,
    pub n: u64,
    pub d: FundamentalDiscriminant,
}

impl LocalClassifier {
    pub fn new(p: u64, n: u64, d: i64) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let d = FundamentalDiscriminant::new(d)?;
        if d.value() == p_star(p) {
            return Err(Error::InvalidArgument(format!(
                "d = {} is p* for p = {p}; Q(√d) lies in Q(ζ_p)",
                d.value()
            )));
        }
        Ok(LocalClassifier { p, n, d })
    }

    pub fn n_class(&self) -> NClass {
        NClass::of(self.n, self.p)
    }

    /// `d ∈ Q_p^{×2}`.
    pub fn d_is_square(&self) -> bool {
        kronecker(self.d.value(), self.p as i64) == 1
    }

    /// `p*·d ∈ Q_p^{×2}`.
    pub fn pstar_d_is_square(&self) -> bool {
        let (d, p) = (self.d.value(), self.p as i64);
        d % p == 0 && kronecker(-d / p, p) == 1
    }

    /// The local condition of the box containing `d`.
    pub fn local_condition(&self) -> LocalCondition {
        match self.n_class().special_condition() {
            Some(LocalCondition::DSquare) if self.d_is_square() => LocalCondition::DSquare,
            Some(LocalCondition::PStarDSquare) if self.pstar_d_is_square() => LocalCondition::PStarDSquare,
            _ => LocalCondition::Complement,
        }
    }

    pub fn selector(&self) -> FamilySelector {
        FamilySelector {
            p: self.p,
            n_class: self.n_class(),
            sign: self.d.sign(),
            local_condition: Some(self.local_condition()),
        }
    }
}

/// Dimension of the Brauer contribution, 0 or 1.
pub fn brauer_dim(cls: &LocalClassifier) -> u8 {
    let m = cls.p - 1;
    let r = cls.n % m;
    let case_zero = r == 0 && cls.d_is_square();
    let case_half = r == m / 2 && cls.pstar_d_is_square();
    u8::from(case_zero || case_half)
}

/// `u(E, χ)`: the archimedean part `[(-1)^n d > 0]` plus the Brauer part.
pub fn u_value(cls: &LocalClassifier) -> u8 {
    let sign = if cls.n.is_multiple_of(2) { 1 } else { -1 } * cls.d.value();
    u8::from(sign > 0) + brauer_dim(cls)
}

/// Base field of an odd K-group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseField {
    Rationals,
    Quadratic(FundamentalDiscriminant),
}

/// `[F(ζ_p) : F]`.
pub fn cyclotomic_degree(p: u64, field: BaseField) -> Result<u64> {
    if !is_odd_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    Ok(match field {
        BaseField::Quadratic(d) if d.value() == p_star(p) => (p - 1) / 2,
        _ => p - 1,
    })
}

/// `dim K_{2i-1}(O_F)_p`: 1 iff `[F(ζ_p) : F]` divides `i`.
pub fn odd_k_torsion(p: u64, i: u64, field: BaseField) -> Result<u8> {
    if i == 0 {
        return Err(Error::InvalidArgument("i must be positive".into()));
    }
    Ok(u8::from(i.is_multiple_of(cyclotomic_degree(p, field)?)))
}

/// `κ_{2n,p} = dim K_{2n}(Z)/p`, computed from Bernoulli numerators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kappa {
    pub n: u64,
    pub p: u64,
    pub value: u8,
    /// Always set: the identification with Bernoulli numerators assumes Vandiver.
    pub conditional: bool,
    /// `p` lies below [`VANDIVER_VERIFIED_BOUND`].
    pub vandiver_verified: bool,
}

pub fn kappa(n: u64, p: u64) -> Result<Kappa> {
    if !is_odd_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let value = if n % 2 == 1 {
        let k = u32::try_from(n.div_ceil(2))
            .map_err(|_| Error::Resource(format!("Bernoulli index for n = {n} is too large")))?;
        let c = bernoulli_c(k)?;
        u8::from((c % BigUint::from(p)).is_zero())
    } else {
        0
    };
    Ok(Kappa {
        n,
        p,
        value,
        conditional: true,
        vandiver_verified: p < VANDIVER_VERIFIED_BOUND,
    })
}

/// Conjectured average of `#K_{2n}(O_F)/p` over one signature: the table
/// value for the `-` part, shifted by `p^κ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjecturedAverage {
    pub p: u64,
    pub n: u64,
    pub sign: Sign,
    #[serde(with = "rational_string")]
    pub minus_part: Rational,
    pub kappa: Kappa,
    #[serde(with = "rational_string")]
    pub full: Rational,
}

pub fn conjectured_average(p: u64, n: u64, sign: Sign) -> Result<ConjecturedAverage> {
    let table = average_table(p)?;
    let class = NClass::of(n, p);
    let minus_part = table
        .get(class.label(), sign)
        .cloned()
        .ok_or_else(|| Error::InvalidArgument(format!("no table row for n = {n}")))?;
    let kappa = kappa(n, p)?;
    let full = &minus_part * Rational::from_integer(num_bigint::BigInt::from(p).pow(kappa.value as u32));
    Ok(ConjecturedAverage {
        p,
        n,
        sign,
        minus_part,
        kappa,
        full,
    })
}

/// Discriminant of `K`: `F` for even `n`, `Q(√(-3d))` for odd `n`.
pub fn k_field(d: FundamentalDiscriminant, n: u64) -> Option<FundamentalDiscriminant> {
    if n.is_multiple_of(2) {
        Some(d)
    } else {
        d.twist_minus3()
    }
}

fn log3_exact(m: u64) -> Result<u32> {
    let mut e = 0;
    let mut m = m;
    while m > 1 && m.is_multiple_of(3) {
        m /= 3;
        e += 1;
    }
    if m != 1 {
        return Err(Error::Precondition(format!("{m} is not a power of 3")));
    }
    Ok(e)
}

/// `dim (K_{2n}(O_F)/3)^-` through the quadratic form oracle on `K`, which
/// must be imaginary.
pub fn k_dim_minus(d: i64, p: u64, n: u64) -> Result<u32> {
    if p != 3 {
        return Err(Error::InvalidArgument(format!("only p = 3 is supported, got {p}")));
    }
    let cls = LocalClassifier::new(p, n, d)?;
    let k = k_field(cls.d, n).expect("d ≠ -3");
    if k.sign() != Sign::Negative {
        return Err(Error::InvalidArgument(format!(
            "K = Q(√{}) is real; the form oracle needs an imaginary K",
            k.value()
        )));
    }
    Ok(log3_exact(cl_13_order(k.value())?)? + brauer_dim(&cls) as u32)
}

/// Per-discriminant counts `(all, 3 split)` of nowhere totally ramified
/// cubic fields, with the bound they are complete below.
#[derive(Debug, Clone)]
pub struct CubicCounts {
    bound: u64,
    by_disc: HashMap<i64, (u32, u32)>,
}

impl CubicCounts {
    pub fn new(cache: &CubicCache) -> Self {
        CubicCounts {
            bound: cache.bound(),
            by_disc: fields_by_disc(cache),
        }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// `#Cl(O_K[1/3])/3 = 2N + 1`, where `N` counts cubic fields with
    /// `d_L = d_K`, only those with 3 split when `d_K ≡ 1 mod 3`.
    pub fn cl_13_order(&self, d_k: FundamentalDiscriminant) -> Result<u64> {
        if d_k.value().unsigned_abs() >= self.bound {
            return Err(Error::BoundMismatch {
                have: self.bound,
                need: d_k.value().unsigned_abs() + 1,
            });
        }
        let (all, split) = self.by_disc.get(&d_k.value()).copied().unwrap_or((0, 0));
        let n = if d_k.coset3().is_square() { split } else { all };
        Ok(2 * n as u64 + 1)
    }

    /// `dim (K_{2n}(O_F)/3)^-` through the cubic fields with `d_L = d_K`.
    pub fn k_dim_minus(&self, d: i64, n: u64) -> Result<u32> {
        let cls = LocalClassifier::new(3, n, d)?;
        let k = k_field(cls.d, n).expect("d ≠ -3");
        Ok(log3_exact(self.cl_13_order(k)?)? + brauer_dim(&cls) as u32)
    }

    /// `(count, Σ (2N+1))` over the K-side family `(sign, coset, |d_K| < x)`.
    fn k_side_sum(&self, sign: Sign, coset: Coset3, x: u64) -> Result<(u64, u64)> {
        let mut count = 0;
        let mut sum = 0;
        for d in enumerate_discriminants(QuadFamily::new(sign, Some(coset), x))? {
            count += 1;
            sum += self.cl_13_order(d)?;
        }
        Ok((count, sum))
    }
}

/// What an empirical average is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    /// `#Cl(O_K[1/3])/3` over the K-side family.
    #[serde(rename = "Cl(O_K[1/3])/3")]
    ClassGroup,
    /// `#K_{2n}(O_F)_3` over the F-side family.
    #[serde(rename = "K_2n(O_F)_3")]
    KGroup,
}

/// An empirical family average against its table value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFamilyResult {
    pub selector: FamilySelector,
    /// Optional restriction of the F-side family to one coset of `Q_3^{×2}`.
    pub coset3: Option<Coset3>,
    pub quantity: Quantity,
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(with = "rational_string")]
    pub empirical: Rational,
    #[serde(with = "rational_string")]
    pub reference: Rational,
    pub abs_err: f64,
    pub rel_err: f64,
    pub sample_count: u64,
    pub conditional_flags: Vec<String>,
}

impl KFamilyResult {
    pub fn empirical_f64(&self) -> f64 {
        rational_to_f64(&self.empirical)
    }

    pub fn reference_f64(&self) -> f64 {
        rational_to_f64(&self.reference)
    }
}

/// F-side cosets allowed by the selector and the optional coset filter.
fn f_cosets(sel: &FamilySelector, filter: Option<Coset3>) -> Vec<Coset3> {
    Coset3::ALL
        .into_iter()
        .filter(|c| filter.is_none_or(|f| f == *c))
        .filter(|&c| {
            // For p = 3: d ∈ Q_3^{×2} iff d ≡ 1 mod 3; -3d ∈ Q_3^{×2} iff d ≡ 6 mod 9.
            let special = match sel.n_class {
                NClass::EvenZero => c == Coset3::OneMod3,
                _ => c == Coset3::SixMod9,
            };
            match sel.local_condition {
                None => true,
                Some(LocalCondition::Complement) => !special,
                Some(_) => special,
            }
        })
        .collect()
}

/// `(sign, coset)` of `K` for an F-side cell.
fn k_cell(n_class: NClass, sign: Sign, coset: Coset3) -> (Sign, Coset3) {
    if n_class.is_even() {
        (sign, coset)
    } else {
        (sign.flip(), coset.times_minus3())
    }
}

/// Empirical average at `p = 3` for one family, with `|d| < x` on the side
/// being averaged over.
///
/// With a local condition the result is the mean of `#Cl(O_K[1/3])/3` over
/// the K-side family, compared with the class-group table. Without one it is
/// the mean of `#K_{2n}(O_F)_3` over fundamental `d ≠ -3` of the given sign:
/// the K-side mean of each coset, times `3` on the Brauer coset, weighted by
/// the F-side coset counts, compared with the signature table.
pub fn empirical_average(
    sel: &FamilySelector,
    coset3: Option<Coset3>,
    x: u64,
    counts: &CubicCounts,
) -> Result<KFamilyResult> {
    if sel.p != 3 {
        return Err(Error::InvalidArgument(format!(
            "empirical averages exist only for p = 3, got {}",
            sel.p
        )));
    }
    if counts.bound() < x {
        return Err(Error::BoundMismatch {
            have: counts.bound(),
            need: x,
        });
    }
    let cosets = f_cosets(sel, coset3);
    if cosets.is_empty() {
        return Err(Error::InvalidArgument("the selected family is empty".into()));
    }
    let (quantity, empirical, reference, sample_count) = match sel.local_condition {
        Some(_) => {
            let (mut count, mut sum) = (0, 0);
            for &c in &cosets {
                let (ks, kc) = k_cell(sel.n_class, sel.sign, c);
                let (n, s) = counts.k_side_sum(ks, kc, x)?;
                count += n;
                sum += s;
            }
            if count == 0 {
                return Err(Error::InvalidArgument(format!(
                    "no discriminants below {x} in the family"
                )));
            }
            let table = class_average_table(3)?;
            (
                Quantity::ClassGroup,
                ratio(sum as i64, count as i64),
                residue_cell_value(&table, sel).clone(),
                count,
            )
        }
        None => {
            let mut weighted = ratio(0, 1);
            let mut total = 0u64;
            for &c in &cosets {
                let mut f_count = enumerate_discriminants(QuadFamily::new(sel.sign, Some(c), x))?.count() as u64;
                if sel.sign == Sign::Negative && c == Coset3::SixMod9 && x > 3 {
                    f_count -= 1; // d = -3 = p*
                }
                let (ks, kc) = k_cell(sel.n_class, sel.sign, c);
                let (n, s) = counts.k_side_sum(ks, kc, x)?;
                if n == 0 || f_count == 0 {
                    continue;
                }
                let brauer = if kc.is_square() { 3 } else { 1 };
                weighted += ratio(f_count as i64, 1) * ratio(s as i64 * brauer, n as i64);
                total += f_count;
            }
            if total == 0 {
                return Err(Error::InvalidArgument(format!(
                    "no discriminants below {x} in the family"
                )));
            }
            let table = average_table(3)?;
            let reference = table
                .get(sel.n_class.label(), sel.sign)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument("row not realizable for p = 3".into()))?;
            (Quantity::KGroup, weighted / ratio(total as i64, 1), reference, total)
        }
    };
    let diff = (&empirical - &reference).abs();
    let abs_err = rational_to_f64(&diff);
    let rel_err = abs_err / rational_to_f64(&reference);
    Ok(KFamilyResult {
        selector: *sel,
        coset3,
        quantity,
        x,
        empirical,
        reference,
        abs_err,
        rel_err,
        sample_count,
        conditional_flags: Vec::new(),
    })
}

/// The eight K-side cells `(sign, coset)` of the class-group table.
pub fn class_group_cells(x: u64, counts: &CubicCounts) -> Result<Vec<KFamilyResult>> {
    let mut out = Vec::new();
    for sign in [Sign::Positive, Sign::Negative] {
        for c in Coset3::ALL {
            let cond = if c.is_square() {
                LocalCondition::DSquare
            } else {
                LocalCondition::Complement
            };
            let sel = FamilySelector::new(3, NClass::EvenZero, sign, Some(cond))?;
            out.push(empirical_average(&sel, Some(c), x, counts)?);
        }
    }
    Ok(out)
}

/// The four signature-level averages of `#K_{2n}(O_F)_3`, in the order
/// (n even, real), (n even, imaginary), (n odd, real), (n odd, imaginary).
pub fn signature_averages(x: u64, counts: &CubicCounts) -> Result<Vec<KFamilyResult>> {
    let mut out = Vec::new();
    for n_class in [NClass::EvenZero, NClass::OddHalf] {
        for sign in [Sign::Positive, Sign::Negative] {
            let sel = FamilySelector::new(3, n_class, sign, None)?;
            out.push(empirical_average(&sel, None, x, counts)?);
        }
    }
    Ok(out)
}
