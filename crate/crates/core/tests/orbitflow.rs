use hilbert_orbits::catalog;
use hilbert_orbits::classifier::OrbitSpec;
use hilbert_orbits::orbitflow::*;
use hilbert_orbits::sl2k::ALL_SIGMAS;
use hilbert_orbits::{Error, MatK, NumberField, PlaceValue};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn example_spec() -> OrbitSpec {
    let k = catalog::qsqrt2();
    let g1 = MatK::lower_unipotent(&k.rational(BigRational::new(1.into(), 2.into())));
    let g2 = MatK::upper_unipotent(&k.int(4));
    OrbitSpec::new(&k, &[0, 1], vec![(0, g1), (1, g2)]).unwrap()
}

fn small_gamma(k: &NumberField, rng: &mut impl Rng) -> MatK {
    let mut g = MatK::identity(k);
    for _ in 0..2 {
        let c: Vec<i64> = (0..k.degree()).map(|_| rng.gen_range(-1..=1)).collect();
        let x = k.from_basis_ints(&c);
        let u = if rng.gen_bool(0.5) { MatK::upper_unipotent(&x) } else { MatK::lower_unipotent(&x) };
        g = g.mul(&u);
    }
    g
}

fn random_lattice(k: &NumberField, rng: &mut impl Rng) -> LatticeRep<f64> {
    let comps: Vec<MatK> = (0..k.r())
        .map(|_| {
            let a = k.rational(BigRational::new(rng.gen_range(-5..=5).into(), rng.gen_range(1..=4).into()));
            MatK::lower_unipotent(&a).mul(&MatK::upper_unipotent(&k.int(rng.gen_range(-3..=3))))
        })
        .collect();
    let x = LatticeRep::<f64>::from_components(k, &comps, 64);
    let s: Vec<(usize, f64)> = (0..k.r()).map(|i| (i, rng.gen_range(-1.5f64..1.5).exp())).collect();
    x.flow_real(&s).unwrap()
}

#[test]
fn identity_systole_is_one() {
    for k in [catalog::qsqrt2(), catalog::qi(), catalog::qzeta7plus()] {
        let x = LatticeRep::<f64>::identity(&k, 64);
        assert!(x.det_defect() < 1e-12);
        for h in [1, 2, 4] {
            assert!((systole(&x, h) - 1.0).abs() < 1e-12, "{}", k.name());
        }
    }
}

#[test]
fn enumeration_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in [catalog::qsqrt2(), catalog::qi(), catalog::qsqrt5()] {
        for _ in 0..6 {
            let x = random_lattice(&k, &mut rng);
            for h in [1, 2] {
                let a = systole(&x, h);
                let b = systole_bruteforce(&x, h);
                assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{a} vs {b}");
            }
        }
    }
    let k = catalog::qzeta7plus();
    let x = random_lattice(&k, &mut rng);
    assert!((systole(&x, 1) - systole_bruteforce(&x, 1)).abs() < 1e-12);
}

#[test]
fn systole_monotone_in_height() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = catalog::qsqrt2();
    for _ in 0..8 {
        let x = random_lattice(&k, &mut rng).flow_real(&[(0, 20.0)]).unwrap();
        for h in [1, 3, 10] {
            assert!(systole(&x, 2 * h) <= systole(&x, h));
        }
    }
}

#[test]
fn gamma_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let spec = example_spec();
    let k = spec.field.clone();
    let x = LatticeRep::<f64>::from_spec(&spec, 64).flow_real(&[(0, 3f64.exp())]).unwrap();
    let base = systole(&x, 40);
    for _ in 0..20 {
        let g = small_gamma(&k, &mut rng);
        let y = x.right_mul(&g);
        assert!((systole(&y, 40) - base).abs() < 1e-9);
    }
}

#[test]
fn flow_group_law_and_errors() {
    let k = catalog::qsqrt2();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random_lattice(&k, &mut rng);
    let same = x.flow_real(&[(0, 1.0), (1, 1.0)]).unwrap();
    for (a, b) in same.blocks.iter().flatten().flatten().zip(x.blocks.iter().flatten().flatten()) {
        assert!(a.dist_upper(b) < 1e-12);
    }
    let ab = x.flow_real(&[(0, 2.5)]).unwrap().flow_real(&[(0, -0.75)]).unwrap();
    let c = x.flow_real(&[(0, -1.875)]).unwrap();
    for (a, b) in ab.blocks.iter().flatten().flatten().zip(c.blocks.iter().flatten().flatten()) {
        assert!(a.dist_upper(b) < 1e-12);
    }
    let bal = x.flow_real(&[(0, 7.0), (1, 1.0 / 7.0)]).unwrap();
    assert!(bal.det_defect() < 1e-10);
    assert_eq!(x.flow_real(&[(0, 0.0)]).unwrap_err(), Error::ZeroScalar);
}

#[test]
fn unit_modulus_flow_keeps_real_norms() {
    let k = catalog::qsqrt2();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = random_lattice(&k, &mut rng);
    let y = x.flow_real(&[(0, -1.0), (1, -1.0)]).unwrap();
    assert!((systole(&x, 3) - systole(&y, 3)).abs() < 1e-12);

    let z = catalog::qi();
    let x = random_lattice(&z, &mut rng);
    let s = complex_scalar::<f64>(0.6, 0.8, 64);
    let y = x.flow(&[(0, s)]).unwrap();
    assert!((systole(&x, 3) - systole(&y, 3)).abs() < 1e-12);
    let zero: PlaceValue<f64> = complex_scalar(0.0, 0.0, 64);
    assert_eq!(x.flow(&[(0, zero)]).unwrap_err(), Error::ZeroScalar);
}

#[test]
fn single_place_flow_shrinks_identity() {
    let k = catalog::qsqrt2();
    let x = LatticeRep::<f64>::identity(&k, 64);
    for t in [2.0f64, 4.0, 6.0] {
        let y = x.flow_real(&[(0, t.exp())]).unwrap();
        assert!(systole(&y, 200) <= 3.0 * (-t / 2.0).exp());
    }
}

#[test]
fn divergence_scan_trend() {
    let spec = example_spec();
    let scan = divergence_scan(&spec, 0, 10.0, 16, 50).unwrap();
    assert_eq!(scan.points.len(), 17);
    assert!(window_max_nonincreasing(&scan.points, 4));
    assert!(scan.crossings[0].1.is_some());
    assert_eq!(divergence_scan(&spec, 3, 1.0, 2, 2).unwrap_err(), Error::BadPlace(3));
    let csv = trajectory_csv(&Vec::<TrajectoryRow>::from(&scan));
    assert!(csv.starts_with("t,systole,err,flags\n"));
    assert_eq!(csv.lines().count(), 18);
}

#[test]
fn boundary_approach_converges() {
    let spec = example_spec();
    for s in ALL_SIGMAS {
        let a = boundary_approach(&spec, s, 10).unwrap();
        assert!(a.steps.iter().all(|st| st.gamma_integral));
        assert!(a.steps.last().unwrap().err < 1e-6);
        let fit = a.fitted_slope.unwrap();
        assert!((fit / a.expected_slope - 1.0).abs() < 0.1, "{fit} vs {}", a.expected_slope);
    }
}

#[test]
fn boundary_approach_trivial_when_equal() {
    let k = catalog::qsqrt2();
    let g = MatK::upper_unipotent(&k.from_ints(&[1, 1]));
    let spec = OrbitSpec::new(&k, &[0, 1], vec![(0, g.clone()), (1, g)]).unwrap();
    for s in [(0, 0), (1, 1)] {
        let a = boundary_approach(&spec, s, 4).unwrap();
        assert!(a.steps.iter().all(|st| st.err == 0.0));
    }
    assert_eq!(boundary_approach(&spec, (0, 1), 2).unwrap_err(), Error::NotAdmissible(0, 1));
}

#[test]
fn boundary_approach_on_cubic() {
    let k = catalog::qzeta7plus();
    let g1 = MatK::lower_unipotent(&k.int(1));
    let g2 = MatK::upper_unipotent(&k.theta());
    let spec = OrbitSpec::new(&k, &[0, 2], vec![(0, g1), (2, g2)]).unwrap();
    let a = boundary_approach(&spec, (0, 0), 4).unwrap();
    assert!(a.steps.windows(2).all(|w| w[1].err < w[0].err));
    assert!(a.expected_slope < 0.0);
}

#[test]
fn balance_report() {
    let spec = example_spec();
    let balanced: Vec<(f64, f64)> = (0..=8).map(|i| ((i as f64).exp(), (-(i as f64)).exp())).collect();
    let r = balance_check(&spec, &balanced, 1e-2, 50).unwrap();
    assert!(r.collapse_at.is_none());
    assert!(r.max_imbalance < 1e-12);
    let one_sided: Vec<(f64, f64)> = (0..=12).map(|i| ((i as f64).exp(), 1.0)).collect();
    let r = balance_check(&spec, &one_sided, 0.1, 50).unwrap();
    assert!(r.collapse_at.is_some());
    let constant = vec![(1.0, 1.0); 4];
    let r = balance_check(&spec, &constant, 1e-2, 5).unwrap();
    assert_eq!(r.max_imbalance, 0.0);
}
