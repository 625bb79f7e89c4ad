use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use xeqci::bgue::*;

fn q(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn to_f64(r: &BigRational) -> f64 {
    // numerator and denominator can exceed f64 range, so scale via bit lengths
    let (n, d) = (r.numer(), r.denom());
    let shift = n.bits() as i64 - d.bits() as i64;
    let scaled = if shift > 0 {
        BigRational::new(n.clone(), d.clone() << shift as usize)
    } else {
        BigRational::new(n.clone() << (-shift) as usize, d.clone())
    };
    let (sn, sd) = (scaled.numer().to_string(), scaled.denom().to_string());
    let approx = sn.parse::<f64>().unwrap() / sd.parse::<f64>().unwrap();
    approx * 2f64.powi(shift as i32)
}

struct Exact {
    a1: BigRational,
    a2: BigRational,
    a3: BigRational,
    a4_no_purity: BigRational,
}

fn exact(a: u64, b: u64, d: u64) -> Exact {
    let one = q(1);
    let (a2, b2, d2) = (q(a * a), q(b * b), q(d) * q(d));
    let a1 = (&a2 - &one) * (&a2 - &one) / (&a2 * &a2 * (&a2 + &one)) * q(d)
        / ((&d2 - &one) * (&d2 - &one));
    let al2 = (&a2 - &one) * (&b2 - &one) / (&a2 * &b2 * (&b2 + &one)) * q(d)
        / ((&d2 - &one) * (&d2 - &one));
    let a3 = (&a2 - &one) / (&a2 * (&a2 + &one)) / (q(d) * (&d2 - &one));
    let a4 = (&a2 - &one) * (&d2 / &a2 - &one) / (&a2 * (&a2 + &one) * (&d2 - &one) * (&d2 - &one) * (&d2 - &one))
        * ((&d2 + &one) - q(2 * d));
    Exact { a1, a2: al2, a3, a4_no_purity: a4 }
}

fn rel(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        return x.abs();
    }
    (x - y).abs() / y.abs()
}

#[test]
fn coefficients_match_exact_rationals() {
    for ka in 1..=4u32 {
        for kb in 0..=4u32 {
            for kd in (ka + kb).max(1)..=(ka + kb + 6) {
                let (a, b, d) = (1u64 << ka, 1u64 << kb, 1u64 << kd);
                let p = BgueParams::from_purities(a as f64, b as f64, d as f64, 1.0, 1.0, 0.0).unwrap();
                let e = exact(a, b, d);
                assert!(rel(alpha_1(&p), to_f64(&e.a1)) < 1e-12, "α1 at {a},{b},{d}");
                assert!(rel(alpha_3(&p), to_f64(&e.a3)) < 1e-12, "α3 at {a},{b},{d}");
                if b > 1 {
                    assert!(rel(alpha_2(&p), to_f64(&e.a2)) < 1e-12, "α2 at {a},{b},{d}");
                } else {
                    assert_eq!(alpha_2(&p), 0.0);
                }
                let excess = 1.0 - 1.0 / d as f64;
                let want = to_f64(&e.a4_no_purity) * excess;
                assert!(rel(alpha_4(&p), want) < 1e-12, "α4 at {a},{b},{d}");
            }
        }
    }
}

#[test]
fn worked_examples_exact() {
    let e = exact(2, 2, 4);
    assert_eq!(e.a1, BigRational::new(1.into(), 500.into()));
    assert_eq!(e.a3, BigRational::new(1.into(), 400.into()));
    let gap = BigRational::new(3.into(), 4.into());
    assert_eq!(&e.a1 * gap, BigRational::new(3.into(), 2000.into()));
    let p = BgueParams::from_purities(2.0, 2.0, 4.0, 1.0, 0.25, 0.0).unwrap();
    assert!((delta_ci_1(&p).unwrap() - 0.0015).abs() < 1e-15);
    assert!((alpha_3(&p) - 0.0025).abs() < 1e-15);
}

#[test]
fn ratio_of_same_and_disjoint_region_coefficients() {
    for (a, b) in [(2u64, 2u64), (2, 4), (4, 2), (8, 16), (16, 8)] {
        let d = 1u64 << 20;
        let p = BgueParams::from_purities(a as f64, b as f64, d as f64, 1.0, 0.5, 0.0).unwrap();
        let e = exact(a, b, d);
        let (a2, b2) = (q(a * a), q(b * b));
        let one = q(1);
        let ratio = (&a2 - &one) * (&b2 + &one) * &b2 / (&a2 * (&a2 + &one) * (&b2 - &one));
        assert_eq!(&e.a1 / &e.a2, ratio);
        let got = delta_ci_1(&p).unwrap() / delta_ci_2(&p).unwrap();
        assert!(rel(got, to_f64(&ratio)) < 1e-12);
    }
}

#[test]
fn third_coefficient_orders_by_entropy() {
    let d = 2f64.powi(10);
    let cases = [(0.0, 1.0), (2.0, 0.5), (3.0, 3.0), (0.1, 6.9)];
    for (si, sf) in cases {
        let p = BgueParams::new(2.0, 2.0, d, si, sf, 0.0).unwrap();
        let v = delta_ci_3(&p).unwrap();
        let want = (sf - si).partial_cmp(&0.0).unwrap();
        assert_eq!(v.partial_cmp(&0.0).unwrap(), want, "S2_i={si} S2_f={sf}");
    }
}

#[test]
fn decay_vanishes_and_is_monotone() {
    let d = 64.0;
    let mixed = BgueParams::from_purities(2.0, 2.0, d, 1.0, 1.0 / d, 0.0).unwrap();
    assert_eq!(decay_amplitude(&mixed).unwrap(), 0.0);
    let mut prev = f64::INFINITY;
    for k in 0..40 {
        let p = BgueParams::from_purities(2.0, 2.0, d, 1.0, 0.5, k as f64).unwrap();
        let v = decay_amplitude(&p).unwrap();
        assert!(v < prev && v > 0.0);
        prev = v;
    }
}

#[test]
fn large_dimension() {
    let p = BgueParams::from_purities(2.0, 2.0, 2f64.powi(20), 1.0, 1.0, 0.0).unwrap();
    assert!(alpha_4(&p) > 0.0);
    let huge = BgueParams::from_purities(2.0, 2.0, 2f64.powi(300), 1.0, 1.0, 0.0).unwrap();
    for v in [alpha_1(&huge), alpha_2(&huge), alpha_3(&huge), alpha_4(&huge)] {
        assert!(v.is_finite() && v >= 0.0);
    }
}

fn valid_params() -> impl Strategy<Value = BgueParams> {
    (1u32..=8, 1u32..=8, 0u32..=40, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..20.0).prop_map(|(ka, kb, extra, u, v, dt)| {
        let d = 2f64.powi((ka + kb + extra) as i32);
        let smax = d.ln();
        BgueParams::new(2f64.powi(ka as i32), 2f64.powi(kb as i32), d, u * smax, v * smax, dt).unwrap()
    })
}

proptest! {
    #[test]
    fn coefficients_positive(p in valid_params()) {
        prop_assert!(alpha_1(&p) > 0.0);
        prop_assert!(alpha_2(&p) > 0.0);
        prop_assert!(alpha_3(&p) > 0.0);
        if p.purity_f > 1.0 / p.d_tot * (1.0 + 1e-9) {
            prop_assert!(alpha_4(&p) > 0.0);
        }
    }

    #[test]
    fn differences_antisymmetric(p in valid_params()) {
        let swapped = BgueParams::new(p.d_a, p.d_b, p.d_tot, p.s2_f, p.s2_i, p.delta_t).unwrap();
        prop_assert_eq!(delta_ci_1(&p).unwrap(), -delta_ci_1(&swapped).unwrap());
        prop_assert_eq!(delta_ci_2(&p).unwrap(), -delta_ci_2(&swapped).unwrap());
        prop_assert_eq!(delta_ci_3(&p).unwrap(), -delta_ci_3(&swapped).unwrap());
    }

    #[test]
    fn equal_entropies_give_zero(p in valid_params()) {
        let same = BgueParams::new(p.d_a, p.d_b, p.d_tot, p.s2_i, p.s2_i, 0.0).unwrap();
        prop_assert_eq!(delta_ci_1(&same).unwrap(), 0.0);
        prop_assert_eq!(delta_ci_2(&same).unwrap(), 0.0);
        prop_assert_eq!(delta_ci_3(&same).unwrap(), 0.0);
    }
}
