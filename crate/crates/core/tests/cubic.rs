use std::collections::BTreeSet;

use proptest::prelude::*;

use quadk::cubic::*;
use quadk::exactmath::{factor_trial, Sign};

type M3 = [[i128; 3]; 3];

/// Multiplication matrices of `ω` and `θ` on the basis `(1, ω, θ)` of the
/// ring of `f`: `ωθ = -ad`, `ω² = -ac + bω - aθ`, `θ² = -bd + dω - cθ`.
fn mult_tables(f: &BinaryCubicForm) -> (M3, M3) {
    let [a, b, c, d] = f.coeffs().map(|x| x as i128);
    // Columns are images of 1, ω, θ.
    let w = [[0, -a * c, -a * d], [1, b, 0], [0, -a, 0]];
    let t = [[0, -a * d, -b * d], [0, 0, d], [1, 0, -c]];
    (w, t)
}

fn mat_mul(x: &M3, y: &M3) -> M3 {
    let mut z = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                z[i][j] += x[i][k] * y[k][j];
            }
        }
    }
    z
}

fn mat_of(u: i128, v: i128, w: i128, mw: &M3, mt: &M3) -> M3 {
    let mut z = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            z[i][j] = v * mw[i][j] + w * mt[i][j] + if i == j { u } else { 0 };
        }
    }
    z
}

fn trace(m: &M3) -> i128 {
    m[0][0] + m[1][1] + m[2][2]
}

fn det(m: &M3) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn minors2(m: &M3) -> i128 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
        - m[1][2] * m[2][1]
}

/// Non-maximal at `p` iff some `(u + vω + wθ)/p` outside the ring is integral.
fn maximal_oracle(f: &BinaryCubicForm, p: i128) -> bool {
    let (mw, mt) = mult_tables(f);
    for u in 0..p {
        for v in 0..p {
            for w in 0..p {
                if (u, v, w) == (0, 0, 0) {
                    continue;
                }
                let m = mat_of(u, v, w, &mw, &mt);
                if trace(&m) % p == 0 && minors2(&m) % (p * p) == 0 && det(&m) % (p * p * p) == 0 {
                    return false;
                }
            }
        }
    }
    true
}

#[test]
fn ring_table_is_consistent() {
    for f in [
        BinaryCubicForm::new(1, 0, -1, -1),
        BinaryCubicForm::new(2, -3, 5, 7),
        BinaryCubicForm::new(3, 1, -4, 2),
    ] {
        let (mw, mt) = mult_tables(&f);
        // Commutative and associative: the matrices commute.
        assert_eq!(mat_mul(&mw, &mt), mat_mul(&mt, &mw));
        // Trace form discriminant equals disc(f).
        let basis = [mat_of(1, 0, 0, &mw, &mt), mw, mt];
        let mut g = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = trace(&mat_mul(&basis[i], &basis[j]));
            }
        }
        assert_eq!(det(&g), f.disc());
    }
}

#[test]
fn maximality_matches_ring_oracle() {
    let mut checked = 0;
    for sign in [Sign::Negative, Sign::Positive] {
        for f in enumerate_forms(4000, sign).unwrap() {
            let disc = f.disc().unsigned_abs() as u64;
            for (p, e) in factor_trial(disc) {
                if e >= 2 {
                    assert_eq!(maximal_at(&f, p), maximal_oracle(&f, p as i128), "{f} at {p}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 300, "{checked}");
    let cbrt2 = BinaryCubicForm::new(1, 0, 0, -2);
    assert_eq!(cbrt2.disc(), -108);
    assert!(is_maximal(&cbrt2), "ours");
    assert!(maximal_oracle(&cbrt2, 2), "oracle 2");
    assert!(maximal_oracle(&cbrt2, 3), "oracle 3");
    let fields = enumerate_cubic_fields(109, Sign::Negative).unwrap();
    assert!(fields.iter().any(|r| r.d_l == -108));
    assert!(!maximal_oracle(&BinaryCubicForm::new(1, 0, 0, -16), 2));
}

fn random_unimodular(entries: [i64; 3], choice: u8) -> Option<Mat2> {
    // Solve ps - qr = ±1 for s given p, q, r when possible.
    let [p, q, r] = entries;
    let target = if choice.is_multiple_of(2) { 1 } else { -1 };
    if p == 0 {
        return None;
    }
    let num = target + q * r;
    if num % p != 0 {
        return None;
    }
    Some(Mat2::new(p, q, r, num / p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn canonical_form_is_class_invariant(
        coeffs in prop::array::uniform4(-9i64..=9),
        entries in prop::array::uniform3(-3i64..=3),
        choice in 0u8..2,
    ) {
        let f = BinaryCubicForm::new(coeffs[0], coeffs[1], coeffs[2], coeffs[3]);
        prop_assume!(f.disc() != 0 && f.is_irreducible());
        let m = random_unimodular(entries, choice);
        prop_assume!(m.is_some());
        let m = m.unwrap();
        prop_assume!(m.r.abs() <= 3 && m.s.abs() <= 3);
        let g = f.transform(&m);
        prop_assert_eq!(g.disc(), f.disc());
        prop_assert_eq!(canonical_form(&f).unwrap(), canonical_form(&g).unwrap());
        prop_assert_eq!(canonical_form(&f.scale(-1)).unwrap(), canonical_form(&f).unwrap());
    }
}

#[test]
fn enumeration_is_complete_and_duplicate_free() {
    const X: i128 = 400;
    const B: i64 = 20;
    for sign in [Sign::Negative, Sign::Positive] {
        let listed = enumerate_forms(X as u64, sign).unwrap();
        let set: BTreeSet<_> = listed.iter().copied().collect();
        assert_eq!(set.len(), listed.len());
        let mut brute = BTreeSet::new();
        for a in -B..=B {
            for b in -B..=B {
                for c in -B..=B {
                    for d in -B..=B {
                        let f = BinaryCubicForm::new(a, b, c, d);
                        let disc = f.disc();
                        if disc == 0 || disc.abs() >= X || (disc > 0) != (sign == Sign::Positive) {
                            continue;
                        }
                        if f.is_irreducible() {
                            brute.insert(canonical_form(&f).unwrap());
                        }
                    }
                }
            }
        }
        assert_eq!(brute, set, "{sign}");
    }
}

#[test]
fn field_records_are_consistent() {
    let cache = CubicCache::build(20_000, 2).unwrap();
    let mut seen = BTreeSet::new();
    for r in cache.records() {
        assert!(seen.insert(r.form));
        assert_eq!(canonical_form(&r.form).unwrap(), r.form);
        assert!(is_maximal(&r.form));
        assert_eq!(r.d_l as i128, r.form.disc());
    }
    // Counts of cubic fields below 20000 of each signature.
    let real = cache.records().iter().filter(|r| r.d_l > 0).count();
    let complex = cache.records().len() - real;
    assert_eq!(real, enumerate_cubic_fields(20_000, Sign::Positive).unwrap().len());
    assert_eq!(complex, enumerate_cubic_fields(20_000, Sign::Negative).unwrap().len());
}
