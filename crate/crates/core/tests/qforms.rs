use hilbert_orbits::catalog;
use hilbert_orbits::qforms::*;
use hilbert_orbits::{Error, FieldElement, MatK, NumberField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn xy_system() -> SplitFormSystem {
    build_system_ints(&catalog::qsqrt2(), &[[[1, 0], [0, 1]], [[1, 1], [0, 1]]]).unwrap()
}

fn rand_int(k: &NumberField, rng: &mut impl Rng, h: i64) -> FieldElement {
    let c: Vec<i64> = (0..k.degree()).map(|_| rng.gen_range(-h..=h)).collect();
    k.from_basis_ints(&c)
}

#[test]
fn proportionality_flag() {
    let k = catalog::qsqrt2();
    let p = build_system_ints(&k, &[[[1, 0], [0, 1]], [[1, 0], [0, 1]]]).unwrap();
    assert!(p.proportional);
    let q = xy_system();
    assert!(!q.proportional);
    let c = k.from_ints(&[1, 1]);
    let mut forms = q.linear_forms.clone();
    forms[1][0] = [&forms[1][0][0] * &c, &forms[1][0][1] * &c];
    let scaled = build_system(&k, forms).unwrap();
    assert_eq!(scaled.proportional, q.proportional);
    let z = [k.from_ints(&[2, 1]), k.from_ints(&[-1, 3])];
    assert_eq!(scaled.eval_exact(&z)[1], &q.eval_exact(&z)[1] * &c);
}

#[test]
fn degenerate_forms_rejected() {
    let k = catalog::qsqrt2();
    let e = build_system_ints(&k, &[[[1, 0], [0, 1]], [[1, 2], [2, 4]]]).unwrap_err();
    assert_eq!(e, Error::DegenerateForm(1));
}

#[test]
fn scan_counts_and_zero() {
    let sys = xy_system();
    let recs = scan(&sys, 1);
    assert_eq!(recs.len() as u64, scan_count(&sys.field, 1));
    assert_eq!(recs.len(), 81);
    let zero = recs.iter().find(|r| r.z[0].is_zero() && r.z[1].is_zero()).unwrap();
    assert!(zero.value.coords.iter().all(|c| c.to_f64_pair() == (0.0, 0.0)));
    assert!(recs.iter().all(|r| r.height <= 1));
    assert_eq!(recs.iter().filter(|r| r.height == 0).count(), 1);
    let line = serde_json::to_string(&recs[0]).unwrap();
    assert!(line.contains("\"z\"") && line.contains("\"height\""));
}

#[test]
fn xy_values_are_products() {
    let sys = xy_system();
    for r in scan(&sys, 1) {
        assert_eq!(sys.eval_exact(&r.z)[0], &r.z[0] * &r.z[1]);
    }
}

#[test]
fn exact_and_numeric_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for sys in [
        xy_system(),
        build_system_ints(&catalog::qzeta7plus(), &[[[1, 1], [1, -1]], [[1, 2], [2, -1]], [[2, 1], [1, 3]]]).unwrap(),
    ] {
        let k = sys.field.clone();
        for _ in 0..500 {
            let z = [rand_int(&k, &mut rng, 9), rand_int(&k, &mut rng, 9)];
            let a = sys.eval(&z, 64);
            let b = sys.eval_numeric(&z);
            for (x, y) in a.coords.iter().zip(&b) {
                let (re, im) = x.to_f64_pair();
                let scale = 1.0 + re.abs();
                assert!((re - y.0).abs() <= x.rad() + 1e-12 * scale && (im - y.1).abs() <= x.rad() + 1e-12 * scale);
            }
        }
    }
}

#[test]
fn box_query_matches_scan() {
    let sys = xy_system();
    let boxes = [Rect::real(-3.1, 2.07), Rect::real(0.53, 3.97)];
    let h = 2;
    let fast = scan_box(&sys, h, &boxes);
    let mut slow: Vec<Vec<i64>> = Vec::new();
    let n = sys.field.degree();
    for r in scan(&sys, h) {
        let v: Vec<f64> = r.value.coords.iter().map(|c| c.to_f64_pair().0).collect();
        if boxes.iter().zip(&v).all(|(b, x)| b.re.0 <= *x && *x <= b.re.1) {
            let mut c: Vec<i64> = Vec::new();
            for zz in &r.z {
                let bc = sys.field.basis_coords(zz);
                c.extend(bc.iter().map(|q| q.to_integer().try_into().unwrap_or(0i64)));
            }
            assert_eq!(c.len(), 2 * n);
            slow.push(c);
        }
    }
    slow.sort();
    let fast_c: Vec<Vec<i64>> = fast.into_iter().map(|(c, _)| c).collect();
    assert_eq!(fast_c, slow);
}

#[test]
fn dispersion_properties() {
    let k = catalog::qzeta7plus();
    let sys = build_system_ints(&k, &[[[1, 1], [1, -1]], [[1, 2], [2, -1]], [[2, 1], [1, 3]]]).unwrap();
    let b = vec![Rect::real(-1.0, 1.0); 3];
    let d3 = dispersion(&sys, &b, 3, 3);
    let d6 = dispersion(&sys, &b, 6, 3);
    assert!(d6 <= d3);
    assert_eq!(dispersion(&sys, &b, 3, 0), 0.0);

    let p = build_system_ints(&k, &[[[1, 0], [0, 1]], [[1, 0], [0, 1]], [[1, 0], [0, 1]]]).unwrap();
    assert!(p.proportional);
    let small = vec![Rect::real(0.2, 0.8); 3];
    let a = dispersion(&p, &small, 2, 3);
    let c = dispersion(&p, &small, 4, 3);
    assert!(a > 0.1 && c > 0.1);
}

#[test]
fn exceptional_forms_example() {
    let sys = xy_system();
    let k = sys.field.clone();
    let ex = exceptional_forms(&sys).unwrap();
    let sigmas: Vec<_> = ex.forms.iter().map(|f| f.sigma).collect();
    assert_eq!(sigmas, vec![(0, 0), (0, 1), (1, 1)]);
    let f00 = &ex.forms[0];
    assert_eq!(f00.signs, [1, 1]);
    assert_eq!(f00.coeffs, [k.zero(), k.one(), k.zero()]);
    let mut reps = ex.dedup.clone();
    reps.sort();
    reps.dedup();
    assert!(reps.len() >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for f in &ex.forms {
        let [l1, l2] = f.factors();
        for _ in 0..20 {
            let z = [rand_int(&k, &mut rng, 5), rand_int(&k, &mut rng, 5)];
            let lin = |l: &[FieldElement; 2]| &(&l[0] * &z[0]) + &(&l[1] * &z[1]);
            assert_eq!(f.eval(&z), &lin(&l1) * &lin(&l2));
            let q = &(&(&f.coeffs[0] * &z[0]) * &z[0]) + &(&(&(&f.coeffs[1] * &z[0]) * &z[1]) + &(&(&f.coeffs[2] * &z[1]) * &z[1]));
            assert_eq!(f.eval(&z), q);
            // torus normalization of the Bruhat factors leaves the form unchanged
            let t = MatK::diag(&k.from_ints(&[3, -1])).unwrap();
            let alt = ExceptionalForm { h: t.inv().mul(&f.h), ..f.clone() };
            assert_eq!(alt.eval(&z), f.eval(&z));
        }
    }
    let p = build_system_ints(&k, &[[[1, 0], [0, 1]], [[2, 0], [0, 1]]]).unwrap();
    assert_eq!(exceptional_forms(&p).unwrap_err(), Error::MonomialInput);
}

#[test]
fn f0_torus_invariance() {
    let k = catalog::qsqrt5();
    let s = k.from_ints(&[2, 3]);
    let v = [k.from_ints(&[1, -4]), k.from_ints(&[7, 2])];
    let d = MatK::diag(&s).unwrap();
    let dv = [d.entry(0, 0) * &v[0], d.entry(1, 1) * &v[1]];
    assert_eq!(f0(&dv), f0(&v));
}

#[test]
fn axis_sets_example() {
    let sys = xy_system();
    let [a1, a2] = axis_sets(&sys).unwrap();
    assert_eq!(a1.class, AxisSet::NonPositive);
    assert_eq!(a1.c, sys.field.int(-1));
    assert!(a1.d.is_zero());
    assert_eq!(a2.class, AxisSet::NonNegative);

    let k = catalog::qsqrt2();
    let both = build_system_ints(&k, &[[[1, 0], [0, 1]], [[1, 1], [1, -1]]]).unwrap();
    assert_eq!(axis_sets(&both).unwrap()[0].class, AxisSet::Real);
}

#[test]
fn complex_axis_is_c() {
    let k = catalog::qzeta5();
    let sys = build_system_ints(&k, &[[[1, 0], [0, 1]], [[1, 1], [0, 1]]]).unwrap();
    let [a1, a2] = axis_sets(&sys).unwrap();
    assert_eq!((a1.class, a2.class), (AxisSet::Complex, AxisSet::Complex));
}

#[test]
fn closure_check_example() {
    let sys = xy_system();
    let boxes = [Rect::real(0.5, 2.0), Rect::real(0.5, 2.0)];
    let r = closure_check_r2(&sys, 30, 1e-4, &boxes, 30).unwrap();
    assert!(r.violations.is_empty());
    assert!(r.values_in_box > 0);
    let p = build_system_ints(&sys.field, &[[[1, 0], [0, 1]], [[1, 0], [0, 1]]]).unwrap();
    let r = closure_check_r2(&p, 20, 1e-4, &boxes, 20).unwrap();
    assert_eq!(r.accumulations, 0);
}

#[test]
fn witness_converges() {
    let sys = xy_system();
    let k = sys.field.clone();
    let n = exceptional_forms(&sys).unwrap().forms.len();
    for j in 0..n {
        let w = [k.from_ints(&[1, 1]), k.from_ints(&[2, -1])];
        let s = witness_convergence(&sys, j, &w, 8).unwrap();
        assert!(s.last().unwrap().err < 1e-6, "{j}: {:?}", s.last());
    }
    let same = build_system_ints(&k, &[[[1, 0], [0, 1]], [[1, 0], [0, 1]]]).unwrap();
    let w = [k.int(1), k.int(0)];
    let s = witness_convergence(&same, 0, &w, 4).unwrap();
    assert!(s.iter().all(|st| st.err == 0.0));
}
