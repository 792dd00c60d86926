use hilbert_orbits::catalog;
use hilbert_orbits::units::{
    self, approx_unit, log_embed, stabilizer_exponent, stretch_unit, unit_circle_analysis,
    unit_circle_component, CircleComponent, UnitContext,
};
use hilbert_orbits::{Error, MatK};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn log_embed_examples() {
    let k = catalog::qsqrt2();
    assert_eq!(log_embed(&k, &k.one()).unwrap(), vec![0.0, 0.0]);
    let l = log_embed(&k, &k.from_ints(&[1, 1])).unwrap();
    assert!((l[0] + 0.881373587019543).abs() < 1e-14);
    assert!((l[1] - 0.881373587019543).abs() < 1e-14);
    assert_eq!(log_embed(&k, &k.zero()), Err(Error::ZeroInput));
    for name in catalog::NAMES {
        let f = catalog::by_name(name).unwrap();
        for u in f.fundamental_units() {
            let s: f64 = log_embed(&f, u).unwrap().iter().sum();
            assert!(s.abs() < 1e-13, "{name}: {s}");
        }
    }
}

#[test]
fn log_embed_is_additive() {
    let k = catalog::qzeta7plus();
    let (a, b) = (k.from_ints(&[2, -1, 1]), k.from_ints(&[1, 3, 0]));
    let lab = log_embed(&k, &(&a * &b)).unwrap();
    let la = log_embed(&k, &a).unwrap();
    let lb = log_embed(&k, &b).unwrap();
    for i in 0..3 {
        assert!((lab[i] - la[i] - lb[i]).abs() < 1e-13);
    }
}

#[test]
fn approx_unit_identity_and_lattice_point() {
    let k = catalog::qsqrt2();
    let ctx = UnitContext::with_m(&k, 2).unwrap();
    let x = k.from_ints(&[3, 1]);
    let t: Vec<f64> = (0..2).map(|i| k.abs_val_f64(&x, i)).collect();
    let a = approx_unit(&ctx, &t, &x).unwrap();
    assert!(a.xi.is_one());
    assert!((a.achieved_ratio - 1.0).abs() < 1e-12);

    let u2 = k.from_ints(&[1, 1]).pow(2).unwrap();
    let t = k.abs_val_f64(&u2, 0);
    let a = approx_unit(&ctx, &[t, 1.0 / t], &k.one()).unwrap();
    assert_eq!(a.xi, u2);
    assert!((a.achieved_ratio - 1.0).abs() < 1e-12);
}

#[test]
fn approx_unit_kappa_bound() {
    let k = catalog::qsqrt2();
    let ctx = UnitContext::with_m(&k, 2).unwrap();
    let e = std::f64::consts::E;
    let a = approx_unit(&ctx, &[e, 1.0 / e], &k.one()).unwrap();
    let bound = (1.0 + std::f64::consts::SQRT_2).powi(2);
    assert!(ctx.kappa_m <= bound);
    assert!(a.achieved_ratio <= ctx.kappa_m);
    assert!(k.is_unit(&a.xi));
    assert!(a.exponents.iter().all(|x| x % 2 == 0));
}

#[test]
fn approx_unit_rejects_bad_product() {
    let k = catalog::qsqrt2();
    let ctx = UnitContext::new(&k).unwrap();
    assert!(matches!(approx_unit(&ctx, &[2.0, 2.0], &k.one()), Err(Error::ProductMismatch(_))));
    assert!(matches!(UnitContext::with_m(&k, 3), Err(Error::HypothesisViolated(_))));
}

#[test]
fn approx_unit_random_profiles_cubic() {
    let k = catalog::qzeta7plus();
    let ctx = UnitContext::new(&k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let x = k.from_ints(&[rng.gen_range(1..5), rng.gen_range(-3..4), rng.gen_range(-3..4)]);
        let n: f64 = (0..3).map(|i| k.abs_val_f64(&x, i)).product();
        let a0: f64 = rng.gen_range(-6.0..6.0f64).exp();
        let a1: f64 = rng.gen_range(-6.0..6.0f64).exp();
        let t = [a0, a1, n / (a0 * a1)];
        let res = approx_unit(&ctx, &t, &x).unwrap();
        assert!(res.achieved_ratio <= ctx.kappa_m, "{} > {}", res.achieved_ratio, ctx.kappa_m);
        for (i, ti) in t.iter().enumerate() {
            let v = k.abs_val_f64(&(&res.xi * &x), i);
            assert!(v <= ti * res.achieved_ratio * (1.0 + 1e-12));
            assert!(v >= ti / res.achieved_ratio * (1.0 - 1e-12));
        }
    }
}

#[test]
fn stretch_unit_biquadratic() {
    let k = catalog::qsqrt2sqrt3();
    let ctx = UnitContext::new(&k).unwrap();
    let (xi, _) = stretch_unit(&ctx, 2, 100.0).unwrap();
    assert!(k.is_unit(&xi));
    assert!(k.abs_val_f64(&xi, 2) > 100.0);
    assert!((k.abs_val_f64(&xi, 3) - 1.0).abs() < 0.01);
    let (xi, _) = stretch_unit(&ctx, 3, 100.0).unwrap();
    assert!(k.abs_val_f64(&xi, 3) > 100.0);
}

#[test]
fn stretch_unit_hypotheses() {
    let k = catalog::qsqrt2();
    let ctx = UnitContext::new(&k).unwrap();
    assert!(matches!(stretch_unit(&ctx, 1, 10.0), Err(Error::HypothesisViolated(_))));
    let k = catalog::qzeta7plus();
    let ctx = UnitContext::new(&k).unwrap();
    assert!(matches!(stretch_unit(&ctx, 1, 10.0), Err(Error::HypothesisViolated(_))));
    let (xi, _) = stretch_unit(&ctx, 2, 1e3).unwrap();
    assert!(k.abs_val_f64(&xi, 2) > 1e3);
    let tight = units::stretch_unit_bounded(&ctx, 2, 1e300, 1, 2);
    assert_eq!(tight.unwrap_err(), Error::SearchExhausted { bound: 2 });
}

#[test]
fn stabilizer_examples() {
    let k = catalog::qsqrt2();
    let id = MatK::identity(&k);
    let s = stabilizer_exponent(&k, &id).unwrap();
    assert_eq!(s.m, 2);
    assert_eq!(s.witnesses[0], MatK::diag(&k.from_ints(&[3, 2])).unwrap());

    let half = k.rational(BigRational::new(1.into(), 2.into()));
    let h = MatK::upper_unipotent(&half);
    let s = stabilizer_exponent(&k, &h).unwrap();
    assert!(s.witnesses.iter().all(|g| g.in_gamma(&k) && g.det().is_one()));
    // smallest multiple by direct scan
    let u = k.from_ints(&[1, 1]);
    let first = (1..50)
        .map(|j| 2 * j)
        .find(|&m| h.conjugate(&MatK::diag(&u.pow(m).unwrap()).unwrap()).in_gamma(&k))
        .unwrap();
    assert_eq!(s.m as i64, first);

    let g = MatK::new(k.int(1), k.theta(), k.theta(), k.int(3)).unwrap();
    assert!(g.in_gamma(&k));
    assert_eq!(stabilizer_exponent(&k, &g).unwrap().m, 2);

    let fifth = k.rational(BigRational::new(1.into(), 5.into()));
    let h5 = MatK::upper_unipotent(&fifth);
    let s5 = stabilizer_exponent(&k, &h5).unwrap();
    assert!(s5.m > 2 && s5.witnesses[0].in_gamma(&k));
    assert_eq!(units::stabilizer_exponent_capped(&k, &h5, 1).unwrap_err(), Error::CapExceeded(1));
}

#[test]
fn unit_circle_components() {
    let b = catalog::benoist();
    let ctx = UnitContext::new(&b).unwrap();
    let a = unit_circle_analysis(&ctx, 2).unwrap();
    assert_eq!(a.component, CircleComponent::UnitCircle);
    assert!(a.log_moduli[0].abs() < 1e-20);
    assert!(a.relation_residual < 1e-20);
    assert_eq!(
        unit_circle_component(&ctx, 0).unwrap_err(),
        Error::NotComplexPlace(0)
    );

    let z5 = catalog::qzeta5();
    let ctx = UnitContext::new(&z5).unwrap();
    assert_eq!(unit_circle_component(&ctx, 0).unwrap(), CircleComponent::Trivial);

    let qi = catalog::qi();
    let ctx = UnitContext::new(&qi).unwrap();
    assert_eq!(unit_circle_component(&ctx, 0).unwrap(), CircleComponent::Trivial);
}
