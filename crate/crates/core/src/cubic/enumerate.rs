//! Enumeration of `GL_2(Z)`-classes of irreducible binary cubic forms with
//! bounded discriminant.
//!
//! Every class has a member whose covariant `J` is reduced. Such a member,
//! up to `f ↦ -f`, a translation `x ↦ x + ky` and `y ↦ -y`, satisfies
//!
//! * `1 ≤ a ≤ (2/3)^{3/2} |D|^{1/4}` (from `P_J ≥ (3/2) a^{2/3} |D|^{1/3}`
//!   and `P_J ≤ √|D|`),
//! * `0 ≤ b ≤ 3a/2`,
//! * `|b² - 3ac| ≤ √|D|`, and `b² - 3ac ≥ 1` when `D > 0`,
//! * the syzygy `4H³ = G² + 27Df²` at `(1, 0)`:
//!   `(27a²d + 2b³ - 9abc)² = 4(b² - 3ac)³ - 27a²D`.
//!
//! The last three are invariant under the normalizing moves. Candidates in
//! this box are canonicalized and deduplicated.

use rayon::prelude::*;

use super::form::{canonical_form, BinaryCubicForm};
use crate::error::{Error, Result};
use crate::exactmath::{isqrt, Sign};

fn a_max(hi: u64) -> i64 {
    let bound = (2.0f64 / 3.0).powf(1.5) * ((hi - 1) as f64).powf(0.25);
    (bound * (1.0 + 1e-9)).floor() as i64
}

fn ceil_div(n: i128, d: i128) -> i128 {
    -((-n).div_euclid(d))
}

fn isqrt128(n: i128) -> i128 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Canonical forms for one `(a, b)` slice of the box.
fn slice(a: i64, b: i64, lo: u64, hi: u64, sign: Sign) -> Result<Vec<BinaryCubicForm>> {
    let mut out = Vec::new();
    let s = isqrt(hi - 1) as i128;
    let (pmin, pmax) = match sign {
        Sign::Positive => (1i128, s),
        Sign::Negative => (-s, s),
    };
    let (a1, b1) = (a as i128, b as i128);
    let c_lo = ceil_div(b1 * b1 - pmax, 3 * a1);
    let c_hi = (b1 * b1 - pmin).div_euclid(3 * a1);
    let m = 27 * a1 * a1;
    let (lo1, hi1) = (lo as i128, hi as i128 - 1);
    for c in c_lo..=c_hi {
        let p = b1 * b1 - 3 * a1 * c;
        let g0 = 2 * b1 * b1 * b1 - 9 * a1 * b1 * c;
        let p3 = 4 * p * p * p;
        let (g2_lo, g2_hi) = match sign {
            Sign::Negative => (p3 + m * lo1, p3 + m * hi1),
            Sign::Positive => (p3 - m * hi1, p3 - m * lo1),
        };
        if g2_hi < 0 {
            continue;
        }
        let g_min = if g2_lo <= 0 { 0 } else { isqrt128(g2_lo - 1) + 1 }; // ceil(sqrt)
        let g_max = isqrt128(g2_hi);
        if g_min > g_max {
            continue;
        }
        // |G| ∈ [g_min, g_max], G = m·d + g0.
        let mut ranges = vec![(ceil_div(g_min - g0, m), (g_max - g0).div_euclid(m))];
        let neg = (ceil_div(-g_max - g0, m), (-g_min - g0).div_euclid(m));
        if neg.0 > ranges[0].1 || neg.1 < ranges[0].0 {
            ranges.push(neg);
        } else {
            ranges[0] = (ranges[0].0.min(neg.0), ranges[0].1.max(neg.1));
        }
        for (d_lo, d_hi) in ranges {
            for d in d_lo..=d_hi {
                let f = BinaryCubicForm::new(a, b, c as i64, d as i64);
                let disc = f.disc();
                if Sign::of(disc as i64) != sign || disc == 0 {
                    continue;
                }
                let ad = disc.unsigned_abs();
                if ad < lo as u128 || ad >= hi as u128 {
                    continue;
                }
                if !f.is_irreducible() {
                    continue;
                }
                out.push(canonical_form(&f)?);
            }
        }
    }
    Ok(out)
}

/// One canonical form per class of irreducible forms with
/// `lo ≤ |disc| < hi` and the given sign, sorted.
pub fn enumerate_forms_range(lo: u64, hi: u64, sign: Sign, threads: usize) -> Result<Vec<BinaryCubicForm>> {
    if lo == 0 || lo > hi {
        return Err(Error::InvalidArgument(format!("bad discriminant range [{lo}, {hi})")));
    }
    if hi > 1u64 << 40 {
        return Err(Error::Resource(format!("discriminant bound {hi} is too large")));
    }
    if lo == hi {
        return Ok(Vec::new());
    }
    let amax = a_max(hi);
    let work: Vec<(i64, i64)> = (1..=amax)
        .flat_map(|a| (0..=(3 * a) / 2).map(move |b| (a, b)))
        .collect();
    let run =
        || -> Result<Vec<Vec<BinaryCubicForm>>> { work.par_iter().map(|&(a, b)| slice(a, b, lo, hi, sign)).collect() };
    let parts = if threads <= 1 {
        work.iter()
            .map(|&(a, b)| slice(a, b, lo, hi, sign))
            .collect::<Result<Vec<_>>>()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?
            .install(run)?
    };
    let mut all: Vec<BinaryCubicForm> = parts.into_iter().flatten().collect();
    all.sort_unstable();
    all.dedup();
    Ok(all)
}

/// One canonical form per class of irreducible forms with `0 < sign·disc < x`.
pub fn enumerate_forms(x: u64, sign: Sign) -> Result<Vec<BinaryCubicForm>> {
    enumerate_forms_range(1, x, sign, 1)
}
