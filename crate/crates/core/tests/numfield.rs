use hilbert_orbits::catalog;
use hilbert_orbits::numfield::{parse_field_file, DegreeOnePrime, NumberField};
use hilbert_orbits::poly::QPoly;
use hilbert_orbits::{Error, PlaceValue, Real};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

#[test]
fn one_embeds_to_one_exactly_enough() {
    for k in catalog::NAMES {
        let f = catalog::by_name(k).unwrap();
        for i in 0..f.r() {
            let v = f.embed(&f.one(), i, 128);
            let (re, im) = v.to_f64_pair();
            assert_eq!((re, im), (1.0, 0.0), "{k}");
            assert!(v.rad() <= 2f64.powi(-128));
        }
    }
}

#[test]
fn sqrt2_embeddings_ascend() {
    let f = catalog::qsqrt2();
    let a = f.embed(&f.theta(), 0, 200);
    let b = f.embed(&f.theta(), 1, 200);
    assert!((a.to_f64_pair().0 + std::f64::consts::SQRT_2).abs() < 1e-15);
    assert!((b.to_f64_pair().0 - std::f64::consts::SQRT_2).abs() < 1e-15);
    assert!(a.rad() <= 2f64.powi(-200) && b.rad() <= 2f64.powi(-200));
    if let PlaceValue::Real(ball) = b {
        let sq = ball.mid.clone() * ball.mid.clone();
        let two = hilbert_orbits::Mp::from_f64_prec(2.0, 200);
        assert!((sq - two).abs().to_f64() < 1e-58);
    } else {
        panic!("real place expected");
    }
}

#[test]
fn gaussian_generator_is_plus_i() {
    let f = catalog::qi();
    assert_eq!(f.r(), 1);
    let (re, im) = f.embed(&f.theta(), 0, 64).to_f64_pair();
    assert!(re.abs() < 1e-18 && (im - 1.0).abs() < 1e-18);
}

#[test]
fn absolute_values_follow_normalization() {
    let f = catalog::qsqrt2();
    let x = f.from_ints(&[1, 1]);
    assert!((f.abs_val(&x, 0, 64).mid.to_f64() - 0.41421356237309503).abs() < 1e-14);
    assert!((f.abs_val(&x, 1, 64).mid.to_f64() - 2.414213562373095).abs() < 1e-14);
    assert_eq!(f.abs_val(&f.zero(), 0, 64).mid.to_f64(), 0.0);
    let g = catalog::qi();
    assert!((g.abs_val(&g.from_ints(&[1, 1]), 0, 64).mid.to_f64() - 2.0).abs() < 1e-15);
}

#[test]
fn norms() {
    let f = catalog::qsqrt2();
    assert_eq!(f.field_norm(&f.one()), q(1, 1));
    assert_eq!(f.field_norm(&f.theta()), q(-2, 1));
    assert_eq!(f.field_norm(&f.from_ints(&[1, 1])), q(-1, 1));
}

#[test]
fn integrality() {
    let f = catalog::qsqrt2();
    assert!(!f.is_integral(&f.rational(q(1, 2))));
    assert!(f.is_integral(&f.theta()));
    let g = catalog::qsqrt5();
    let x = g.element(vec![q(1, 2), q(1, 2)]).unwrap();
    assert!(g.is_integral(&x));
    assert!(!g.is_integral(&g.element(vec![q(1, 2), q(0, 1)]).unwrap()));
}

#[test]
fn padic_examples() {
    let f = catalog::qzeta7plus();
    // x^3 + x^2 - 2x - 1 has no roots mod 2; use a split prime
    let p = DegreeOnePrime { ell: 13, root: 7 };
    assert_eq!(f.padic_val(&f.int(13 * 13), p).unwrap(), 2);
    let two = DegreeOnePrime { ell: 2, root: 0 };
    assert!(matches!(f.padic_val(&f.int(4), two), Err(Error::NotDegreeOne { .. })));
    let g = catalog::qsqrt2();
    assert!(matches!(
        g.padic_val(&g.int(4), DegreeOnePrime { ell: 2, root: 0 }),
        Err(Error::NotDegreeOne { .. })
    ));
    let h = catalog::qsqrt5();
    // x^2 - 5 has roots ±... mod 11: 4^2 = 16 = 5
    let p11 = DegreeOnePrime { ell: 11, root: 4 };
    assert_eq!(h.padic_val(&h.int(4), p11).unwrap(), 0);
    assert_eq!(h.padic_val(&h.rational(q(1, 11)), p11).unwrap(), -1);
    assert_eq!(h.padic_val(&h.from_ints(&[-4, 1]), p11).unwrap(), 1);
    assert_eq!(h.padic_val(&h.from_ints(&[4, 1]), p11).unwrap(), 0);
    assert!(matches!(h.padic_val(&h.zero(), p11), Err(Error::ZeroInput)));
}

#[test]
fn padic_at_two_on_a_split_field() {
    // x^2 - 17 splits at 2 with simple roots only in the 2-adic sense of
    // x^2 + x - 4; use the cubic with a simple root mod 2
    let f = NumberField::from_int_data(
        "cubic",
        &[-2, 1, 0, 1],
        &[&[(1, 1), (0, 1), (0, 1)], &[(0, 1), (1, 1), (0, 1)], &[(0, 1), (0, 1), (1, 1)]],
        &[],
        2,
    );
    // x^3 + x - 2 = (x - 1)(x^2 + x + 2) is reducible and must be rejected
    assert!(matches!(f, Err(Error::InvalidField(_))));
    let g = catalog::qzeta7plus();
    assert_eq!(g.padic_val(&g.int(4), DegreeOnePrime { ell: 13, root: 7 }).unwrap(), 0);
}

#[test]
fn cm_detection() {
    let (yes, cert) = catalog::qi().is_cm();
    assert!(yes);
    let f = catalog::qi();
    assert_eq!(cert.unwrap().conj_theta, -f.theta());
    let (yes, cert) = catalog::qzeta5().is_cm();
    assert!(yes);
    let c = cert.unwrap().conj_theta;
    assert_eq!(c.substitute(&c), catalog::qzeta5().theta());
    assert!(!catalog::qsqrt2().is_cm().0);
    assert!(!catalog::qzeta7plus().is_cm().0);
    assert!(!catalog::benoist().is_cm().0);
}

#[test]
fn reducible_quartic_is_rejected() {
    let p = QPoly::from_ints(&[1, -2, -1, -2, 1]);
    assert!(!hilbert_orbits::numfield::is_irreducible(&p));
    let text = "minpoly: 1 -2 -1 -2 1\nbasis: 1 0 0 0 ; 0 1 0 0 ; 0 0 1 0 ; 0 0 0 1\nunits:\ntorsion: 2\n";
    assert!(matches!(NumberField::from_field_file(text, 128), Err(Error::InvalidField(_))));
    assert!(hilbert_orbits::numfield::is_irreducible(&QPoly::from_ints(&[1, -2, 1, -2, 1])));
}

#[test]
fn catalog_fields_verify() {
    for k in catalog::NAMES {
        let f = catalog::by_name(k).unwrap();
        for (what, ok) in f.verify() {
            assert!(ok, "{k}: {what}");
        }
    }
    let b = catalog::qsqrt2sqrt3();
    assert_eq!(b.basis_discriminant(), q(2304, 1));
    assert_eq!(catalog::benoist().signature().r1, 2);
}

#[test]
fn parser_reports_lines() {
    let e = parse_field_file("minpoly: -2 0 1\nbasis: 1 0 ; 0 x\nunits: 1 1\ntorsion: 2\n").unwrap_err();
    assert_eq!(e, Error::Parse { line: 2, message: "bad rational `x`".into() });
    let e = parse_field_file("minpoly: -2 0 2\n").unwrap_err();
    assert!(matches!(e, Error::Parse { line: 1, .. }));
    let e = parse_field_file("# only a comment\nminpoly: -2 0 1\nbasis: 1 0 ; 0 1\n").unwrap_err();
    assert!(matches!(e, Error::Parse { line: 4, .. }));
    let e = parse_field_file("bogus line\n").unwrap_err();
    assert!(matches!(e, Error::Parse { line: 1, .. }));
}

#[test]
fn resultant_norm_matches_determinant() {
    let f = catalog::qzeta7plus();
    let x = f.element(vec![q(3, 2), q(-1, 1), q(2, 5)]).unwrap();
    let det = hilbert_orbits::linalg::det(&x.mult_matrix());
    assert_eq!(x.norm(), det);
}

#[test]
fn inverse_roundtrip() {
    let f = catalog::benoist();
    let x = f.element(vec![q(1, 3), q(2, 1), q(0, 1), q(-5, 7)]).unwrap();
    assert!((&x * &x.inv().unwrap()).is_one());
    assert_eq!(f.zero().inv(), Err(Error::DivisionByZero));
}

fn small_elem(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-4i64..=4, n)
}

fn field_and_elems() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>)> {
    (0usize..catalog::NAMES.len()).prop_flat_map(|k| {
        let n = catalog::by_name(catalog::NAMES[k]).unwrap().degree();
        (Just(k), small_elem(n), small_elem(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn product_formula((k, a, _) in field_and_elems()) {
        let f = catalog::by_name(catalog::NAMES[k]).unwrap();
        let x = f.from_ints(&a);
        prop_assume!(!x.is_zero());
        let mut prod = hilbert_orbits::RBall::exact(hilbert_orbits::Mp::one(128));
        for i in 0..f.r() {
            prod = prod.mul(&f.abs_val(&x, i, 128));
        }
        let n = hilbert_orbits::Mp::from_ratio(&num_traits::Signed::abs(&x.norm()), 128);
        let d = (prod.mid - n).abs().to_f64();
        prop_assert!(d <= prod.rad + 1e-30, "{} > {}", d, prod.rad);
    }

    #[test]
    fn embedding_is_multiplicative((k, a, b) in field_and_elems()) {
        let f = catalog::by_name(catalog::NAMES[k]).unwrap();
        let (x, y) = (f.from_ints(&a), f.from_ints(&b));
        for i in 0..f.r() {
            let lhs = f.embed(&(&x * &y), i, 128);
            let rhs = f.embed(&x, i, 128).mul(&f.embed(&y, i, 128));
            prop_assert!(lhs.dist_upper(&rhs) <= lhs.rad() + rhs.rad() + 1e-30);
        }
    }

    #[test]
    fn integrality_is_closed((k, a, b) in field_and_elems()) {
        let f = catalog::by_name(catalog::NAMES[k]).unwrap();
        let n = f.degree();
        let x = f.from_basis_ints(&a[..n]);
        let y = f.from_basis_ints(&b[..n]);
        prop_assert!(f.is_integral(&x) && f.is_integral(&y));
        prop_assert!(f.is_integral(&(&x + &y)));
        prop_assert!(f.is_integral(&(&x * &y)));
    }

    #[test]
    fn padic_is_additive(a in small_elem(3), b in small_elem(3)) {
        let f = catalog::qzeta7plus();
        let p = DegreeOnePrime { ell: 13, root: 7 };
        let (x, y) = (f.from_ints(&a), f.from_ints(&b));
        prop_assume!(!x.is_zero() && !y.is_zero());
        let vx = f.padic_val(&x, p).unwrap();
        let vy = f.padic_val(&y, p).unwrap();
        prop_assert_eq!(f.padic_val(&(&x * &y), p).unwrap(), vx + vy);
        let scaled = &x * &f.rational(BigRational::new(BigInt::from(26), BigInt::from(3)));
        prop_assert_eq!(f.padic_val(&scaled, p).unwrap(), vx + 1);
    }
}
