//! Integral binary cubic forms, the `GL_2(Z)` action, and canonical
//! representatives of `GL_2(Z)`-classes.
//!
//! Reduction uses a positive definite quadratic covariant `J`:
//! the Hessian `(b²-3ac, bc-9ad, c²-3bd)` when `disc > 0`, and for
//! `disc < 0` the form `(δ(q)·L² + 2q(v)·q)/2` where `f = L·q`, `L` vanishes at
//! the real root `v` and `δ(q) = 4q_a q_c - q_b²`. Both satisfy
//! `4PR - Q² = 3|disc|` and `J(f∘M) = J(f)∘M`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2×2 integer matrix acting by `(x, y) ↦ (p·x + q·y, r·x + s·y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub s: i64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { p: 1, q: 0, r: 0, s: 1 };

    pub const fn new(p: i64, q: i64, r: i64, s: i64) -> Self {
        Mat2 { p, q, r, s }
    }

    pub fn det(&self) -> i64 {
        self.p * self.s - self.q * self.r
    }

    /// `self · other`, so that `(f∘self)∘other = f∘(self·other)`.
    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            p: self.p * o.p + self.q * o.r,
            q: self.p * o.q + self.q * o.s,
            r: self.r * o.p + self.s * o.r,
            s: self.r * o.q + self.s * o.s,
        }
    }
}

/// All matrices in `GL_2(Z)` with entries in `{-1, 0, 1}`.
pub fn small_gl2() -> &'static [Mat2] {
    use std::sync::OnceLock;
    static G0: OnceLock<Vec<Mat2>> = OnceLock::new();
    G0.get_or_init(|| {
        let mut v = Vec::new();
        for p in -1..=1 {
            for q in -1..=1 {
                for r in -1..=1 {
                    for s in -1..=1 {
                        let m = Mat2::new(p, q, r, s);
                        if m.det().abs() == 1 {
                            v.push(m);
                        }
                    }
                }
            }
        }
        v
    })
}

/// `a x³ + b x²y + c xy² + d y³`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryCubicForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl fmt::Display for BinaryCubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.a, self.b, self.c, self.d)
    }
}

/// `18abcd + b²c² - 4ac³ - 4b³d - 27a²d²`.
pub fn disc_form(f: &BinaryCubicForm) -> i128 {
    let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
    18 * a * b * c * d + b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d
}

impl BinaryCubicForm {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        BinaryCubicForm { a, b, c, d }
    }

    pub fn coeffs(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn disc(&self) -> i128 {
        disc_form(self)
    }

    pub fn eval(&self, x: i128, y: i128) -> i128 {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        ((a * x + b * y) * x + c * y * y) * x + d * y * y * y
    }

    pub fn scale(&self, k: i64) -> BinaryCubicForm {
        BinaryCubicForm::new(self.a * k, self.b * k, self.c * k, self.d * k)
    }

    /// `f∘M`, or an error if a coefficient leaves the `i64` range.
    pub fn try_transform(&self, m: &Mat2) -> Result<BinaryCubicForm> {
        // Linear forms l1 = p x + q y, l2 = r x + s y as (x, y) coefficient pairs.
        let l1 = [m.p as i128, m.q as i128];
        let l2 = [m.r as i128, m.s as i128];
        let mul = |u: &[i128], v: &[i128]| -> Vec<i128> {
            let mut out = vec![0i128; u.len() + v.len() - 1];
            for (i, x) in u.iter().enumerate() {
                for (j, y) in v.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        };
        let l1l1 = mul(&l1, &l1);
        let l2l2 = mul(&l2, &l2);
        let terms = [
            (self.a, mul(&l1l1, &l1)),
            (self.b, mul(&l1l1, &l2)),
            (self.c, mul(&l1, &l2l2)),
            (self.d, mul(&l2l2, &l2)),
        ];
        let mut out = [0i128; 4];
        for (k, t) in terms {
            for i in 0..4 {
                out[i] += k as i128 * t[i];
            }
        }
        let cast = |x: i128| {
            i64::try_from(x).map_err(|_| Error::Resource(format!("cubic form coefficient {x} overflows i64")))
        };
        Ok(BinaryCubicForm::new(
            cast(out[0])?,
            cast(out[1])?,
            cast(out[2])?,
            cast(out[3])?,
        ))
    }

    /// `f∘M`; panics on `i64` overflow.
    pub fn transform(&self, m: &Mat2) -> BinaryCubicForm {
        self.try_transform(m).expect("cubic form transform overflow")
    }

    /// Irreducible over `Q`: nonzero discriminant and no root in `P¹(Q)`.
    pub fn is_irreducible(&self) -> bool {
        if self.disc() == 0 {
            return false;
        }
        if self.a == 0 || self.d == 0 {
            return false;
        }
        // A root x/y = t/u in lowest terms has u | a and t | d.
        for theta in real_roots(self.a as f64, self.b as f64, self.c as f64, self.d as f64) {
            for u in divisors(self.a.unsigned_abs()) {
                let t = (theta * u as f64).round();
                if t.abs() > 9.0e15 {
                    continue;
                }
                if self.eval(t as i128, u as i128) == 0 {
                    return false;
                }
            }
        }
        true
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            out.push(i);
            if i * i != n {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out
}

/// Real roots of `a t³ + b t² + c t + d` (`a ≠ 0`), Newton-polished.
///
/// Near-real pairs may be reported as real; callers treat the result as a
/// candidate list.
pub fn real_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let polish = |mut t: f64| {
        for _ in 0..6 {
            let fv = ((a * t + b) * t + c) * t + d;
            let dv = (3.0 * a * t + 2.0 * b) * t + c;
            if dv == 0.0 {
                break;
            }
            let nt = t - fv / dv;
            if !nt.is_finite() {
                break;
            }
            t = nt;
        }
        t
    };
    let (p2, p1, p0) = (b / a, c / a, d / a);
    // t = s - p2/3 gives s³ + P s + Q.
    let sh = p2 / 3.0;
    let pp = p1 - p2 * p2 / 3.0;
    let qq = 2.0 * p2 * p2 * p2 / 27.0 - p2 * p1 / 3.0 + p0;
    let h = qq * qq / 4.0 + pp * pp * pp / 27.0;
    let first = if h <= 0.0 && pp < 0.0 {
        let m = 2.0 * (-pp / 3.0).sqrt();
        let arg = (3.0 * qq / (pp * m)).clamp(-1.0, 1.0);
        m * (arg.acos() / 3.0).cos() - sh
    } else {
        let sq = h.max(0.0).sqrt();
        (-qq / 2.0 + sq).cbrt() + (-qq / 2.0 - sq).cbrt() - sh
    };
    let r = polish(first);
    // Deflate: a t³ + ... = (t - r)(a t² + e t + g).
    let e = b + a * r;
    let g = c + e * r;
    let qd = e * e - 4.0 * a * g;
    let mut roots = vec![r];
    let scale = (e * e).max((4.0 * a * g).abs()).max(1.0);
    if qd >= -1e-9 * scale {
        let sq = qd.max(0.0).sqrt();
        for t in [(-e + sq) / (2.0 * a), (-e - sq) / (2.0 * a)] {
            roots.push(polish(t));
        }
    }
    roots
}

/// Positive definite quadratic covariant `(P, Q, R)` of `f` (`disc ≠ 0`).
pub fn covariant(f: &BinaryCubicForm) -> [f64; 3] {
    let disc = f.disc();
    let (a, b, c, d) = (f.a as f64, f.b as f64, f.c as f64, f.d as f64);
    if disc > 0 {
        let (ai, bi, ci, di) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
        return [
            (bi * bi - 3 * ai * ci) as f64,
            (bi * ci - 9 * ai * di) as f64,
            (ci * ci - 3 * bi * di) as f64,
        ];
    }
    // Real root v = (x0, y0), normalized to unit length, in the better chart.
    let (x0, y0) = if f.a == 0 {
        (1.0, 0.0)
    } else if f.d == 0 {
        (0.0, 1.0)
    } else if a.abs() >= d.abs() {
        let t = real_roots(a, b, c, d)[0];
        (t, 1.0)
    } else {
        let s = real_roots(d, c, b, a)[0];
        (1.0, s)
    };
    let n = x0.hypot(y0);
    let (x0, y0) = (x0 / n, y0 / n);
    // f = (y0 x - x0 y)(A x² + B xy + C y²).
    let (qa, qb, qc) = if y0.abs() >= x0.abs() {
        let qa = a / y0;
        let qb = (b + x0 * qa) / y0;
        let qc = (c + x0 * qb) / y0;
        (qa, qb, qc)
    } else {
        let qc = -d / x0;
        let qb = (y0 * qc - c) / x0;
        let qa = (y0 * qb - b) / x0;
        (qa, qb, qc)
    };
    let delta = 4.0 * qa * qc - qb * qb;
    let qv = qa * x0 * x0 + qb * x0 * y0 + qc * y0 * y0;
    [
        (delta * y0 * y0 + 2.0 * qv * qa) / 2.0,
        (-2.0 * delta * x0 * y0 + 2.0 * qv * qb) / 2.0,
        (delta * x0 * x0 + 2.0 * qv * qc) / 2.0,
    ]
}

/// `J∘M` for a quadratic form `J = (P, Q, R)`.
pub fn quad_transform(j: &[f64; 3], m: &Mat2) -> [f64; 3] {
    let [pp, qq, rr] = *j;
    let (p, q, r, s) = (m.p as f64, m.q as f64, m.r as f64, m.s as f64);
    [
        pp * p * p + qq * p * r + rr * r * r,
        2.0 * pp * p * q + qq * (p * s + q * r) + 2.0 * rr * r * s,
        pp * q * q + qq * q * s + rr * s * s,
    ]
}

const REL_EPS: f64 = 1e-9;

fn near_reduced(j: &[f64; 3], exact: bool) -> bool {
    let [p, q, r] = *j;
    if exact {
        q.abs() <= p && p <= r
    } else {
        let tol = REL_EPS * r.abs().max(1.0);
        q.abs() <= p + tol && p <= r + tol
    }
}

/// Canonical representative of the `GL_2(Z)`-class of `f` (`disc ≠ 0`):
/// the lexicographically least `(a, b, c, d)` with `a > 0` among class
/// members whose covariant is reduced.
pub fn canonical_form(f: &BinaryCubicForm) -> Result<BinaryCubicForm> {
    let disc = f.disc();
    if disc == 0 {
        return Err(Error::Precondition(format!("form {f} has zero discriminant")));
    }
    let exact = disc > 0;
    let mut g = *f;
    for _ in 0..10_000 {
        let [p, q, r] = covariant(&g);
        let tol = if exact { 0.0 } else { REL_EPS * r.abs().max(1.0) };
        if q.abs() > p + tol {
            let k = (-q / (2.0 * p)).round() as i64;
            let k = if k == 0 { -(q.signum() as i64) } else { k };
            g = g.try_transform(&Mat2::new(1, k, 0, 1))?;
        } else if p > r + tol {
            g = g.try_transform(&Mat2::new(0, 1, 1, 0))?;
        } else {
            let j = covariant(&g);
            let mut best: Option<BinaryCubicForm> = None;
            for m in small_gl2() {
                if !near_reduced(&quad_transform(&j, m), exact) {
                    continue;
                }
                let mut h = g.try_transform(m)?;
                if h.a < 0 {
                    h = h.scale(-1);
                }
                if best.is_none_or(|b| h < b) {
                    best = Some(h);
                }
            }
            return best.ok_or_else(|| Error::Precondition(format!("no reduced representative for {f}")));
        }
    }
    Err(Error::Resource(format!("reduction of {f} did not terminate")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_examples() {
        assert_eq!(disc_form(&BinaryCubicForm::new(1, -1, -2, 1)), 49);
        assert_eq!(disc_form(&BinaryCubicForm::new(1, 0, -1, -1)), -23);
        assert_eq!(disc_form(&BinaryCubicForm::new(1, 0, 0, 0)), 0);
    }

    #[test]
    fn transform_composes() {
        let f = BinaryCubicForm::new(2, -3, 5, 7);
        let m1 = Mat2::new(1, 2, 0, 1);
        let m2 = Mat2::new(0, 1, -1, 3);
        assert_eq!(f.transform(&m1).transform(&m2), f.transform(&m1.mul(&m2)));
        assert_eq!(f.transform(&m1).disc(), f.disc());
        assert_eq!(f.transform(&Mat2::new(-1, 0, 0, -1)), f.scale(-1));
    }

    #[test]
    fn covariant_is_covariant() {
        for f in [
            BinaryCubicForm::new(1, 0, -1, -1),
            BinaryCubicForm::new(1, -1, -2, 1),
            BinaryCubicForm::new(3, 1, -4, 7),
        ] {
            let m = Mat2::new(2, 1, 1, 1);
            let j = quad_transform(&covariant(&f), &m);
            let k = covariant(&f.transform(&m));
            for i in 0..3 {
                assert!((j[i] - k[i]).abs() < 1e-7 * j[i].abs().max(1.0), "{f} {j:?} {k:?}");
            }
            let [p, q, r] = k;
            let dd = f.disc().abs() as f64;
            assert!((4.0 * p * r - q * q - 3.0 * dd).abs() < 1e-6 * dd);
        }
    }

    #[test]
    fn irreducibility() {
        assert!(BinaryCubicForm::new(1, 0, -1, -1).is_irreducible());
        assert!(!BinaryCubicForm::new(1, 0, 0, -1).is_irreducible());
        assert!(!BinaryCubicForm::new(6, -5, 1, 0).is_irreducible());
        // 2x - 3 is a factor of (2x - 3)(x² + x + 5) = 2x³ - x² + 7x - 15.
        assert!(!BinaryCubicForm::new(2, -1, 7, -15).is_irreducible());
        assert!(BinaryCubicForm::new(1, 0, 0, -2).is_irreducible());
    }

    #[test]
    fn canonical_examples() {
        let f = BinaryCubicForm::new(1, 0, -1, -1);
        let c = canonical_form(&f).unwrap();
        assert_eq!(canonical_form(&f.transform(&Mat2::new(3, 1, 2, 1))).unwrap(), c);
        assert_eq!(canonical_form(&f.transform(&Mat2::new(1, 0, 5, -1))).unwrap(), c);
        let g = BinaryCubicForm::new(1, -1, -2, 1);
        let cg = canonical_form(&g).unwrap();
        assert_eq!(canonical_form(&g.transform(&Mat2::new(-2, 3, 1, -1))).unwrap(), cg);
        assert_eq!(small_gl2().len(), 40);
    }
}
