use hilbert_orbits::classifier::{self, boundary_set, classify_with, EqualityConfig};
use hilbert_orbits::numfield::NumberField;
use hilbert_orbits::orbitflow::{
    balance_check, boundary_approach, divergence_scan, trajectory_csv, window_max_nonincreasing, TrajectoryRow,
};
use hilbert_orbits::qforms::{
    axis_sets, build_system, closure_check_r2, dispersion, exceptional_forms, scan, scan_count, witness_convergence,
    Rect, SplitFormSystem,
};
use hilbert_orbits::sl2k::{boundary_bruhat, MatK};
use hilbert_orbits::units::{self, UnitContext};
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{FlowMode, Job};
use crate::output::{coords, document, with_sidecar};
use crate::CliError;

pub const EXIT_UNKNOWN: u8 = 3;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn height_u64(job: &Job, default: i64) -> u64 {
    job.cfg.height.unwrap_or(default) as u64
}

pub fn classify(job: &mut Job) -> Result<u8, CliError> {
    let k = job.field()?;
    let spec = job.orbit_spec(&k)?;
    let eq = job.cfg.equality.get_or_insert_with(EqualityConfig::default).clone();
    let c = classify_with(&spec, &eq);
    let code = if c.verdict.has_unknown() { EXIT_UNKNOWN } else { 0 };
    document(job, Some(&k), to_value(&c))?;
    Ok(code)
}

fn pair(job: &Job, spec: &classifier::OrbitSpec) -> Result<(MatK, MatK), CliError> {
    match spec.index_set[..] {
        [p1, p2] => Ok((spec.component(p1).clone(), spec.component(p2).clone())),
        _ => Err(CliError::Precondition(format!(
            "boundary needs |I| = 2, got {} places",
            job.cfg.index_set.as_ref().map_or(0, Vec::len)
        ))),
    }
}

pub fn boundary(job: &mut Job) -> Result<u8, CliError> {
    let k = job.field()?;
    let spec = job.orbit_spec(&k)?;
    let (g1, g2) = pair(job, &spec)?;
    let orbits = boundary_set(&k, &g1, &g2)?;
    let mut rows = Vec::with_capacity(orbits.len());
    for o in &orbits {
        let (bm, bp) = boundary_bruhat(&k, &g1, &g2, o.sigma)?;
        let stab = units::stabilizer_exponent(&k, &o.h)?;
        rows.push(json!({
            "sigma": o.sigma,
            "h": o.h,
            "parity": o.parity,
            "b_minus": bm,
            "b_plus": bp,
            "stabilizer_m": stab.m,
            "stabilizer_witnesses": stab.witnesses,
        }));
    }
    let m = g1.mul(&g2.inv());
    document(
        job,
        Some(&k),
        json!({ "g1_g2_inv": m, "admissible_pairs": m.admissible_pairs(), "orbits": rows }),
    )?;
    Ok(0)
}

pub fn flow(job: &mut Job) -> Result<u8, CliError> {
    let k = job.field()?;
    let spec = job.orbit_spec(&k)?;
    let mut fc = job
        .cfg
        .flow
        .clone()
        .ok_or_else(|| CliError::Parse("missing `[flow]` section".into()))?;
    let (rows, summary): (Vec<TrajectoryRow>, Value) = match fc.mode {
        FlowMode::Divergence => {
            let place = *fc.place.get_or_insert(spec.index_set[0]);
            let t_max = *fc.t_max.get_or_insert(10.0);
            let steps = *fc.steps.get_or_insert(16);
            let h = height_u64(job, 50);
            job.cfg.height = Some(h as i64);
            let s = divergence_scan(&spec, place, t_max, steps, h)?;
            let window = (steps / 4).max(1);
            let summary = json!({
                "crossings": s.crossings,
                "window": window,
                "envelope_nonincreasing": window_max_nonincreasing(&s.points, window),
            });
            ((&s).into(), summary)
        }
        FlowMode::Balance => {
            let (a, b) = *fc.ray.get_or_insert((1.0, -1.0));
            let t_max = *fc.t_max.get_or_insert(8.0);
            let steps = (*fc.steps.get_or_insert(8)).max(1);
            let floor = *fc.floor.get_or_insert(1e-2);
            let h = height_u64(job, 50);
            job.cfg.height = Some(h as i64);
            let traj: Vec<(f64, f64)> = (0..=steps)
                .map(|i| {
                    let t = t_max * i as f64 / steps as f64;
                    ((a * t).exp(), (b * t).exp())
                })
                .collect();
            let r = balance_check(&spec, &traj, floor, h)?;
            let summary = json!({
                "max_imbalance": r.max_imbalance,
                "collapse_at": r.collapse_at,
                "min_systole": r.min_systole,
            });
            ((&r).into(), summary)
        }
        FlowMode::Approach => {
            let (g1, g2) = pair(job, &spec)?;
            let first = g1.mul(&g2.inv()).admissible_pairs()[0];
            let sigma = *fc.sigma.get_or_insert(first);
            let kmax = *fc.kmax.get_or_insert(8);
            let a = boundary_approach(&spec, sigma, kmax)?;
            let summary = json!({
                "sigma": a.sigma,
                "h": a.h,
                "m": a.m,
                "eta": a.eta,
                "expected_slope": a.expected_slope,
                "fitted_slope": a.fitted_slope,
                "final_err": a.steps.last().map(|s| s.err),
                "gamma": a.steps.iter().map(|s| &s.gamma).collect::<Vec<_>>(),
            });
            ((&a).into(), summary)
        }
    };
    job.cfg.flow = Some(fc);
    with_sidecar(job, Some(&k), trajectory_csv(&rows).as_bytes(), summary)?;
    Ok(0)
}

fn system(job: &Job) -> Result<(NumberField, SplitFormSystem), CliError> {
    let k = job.field()?;
    let forms = job.forms(&k)?;
    let sys = build_system(&k, forms)?;
    Ok((k, sys))
}

/// Scan output is JSON lines, one record per `z`.
pub fn scan_cmd(job: &mut Job) -> Result<u8, CliError> {
    let (k, sys) = system(job)?;
    let h = *job.cfg.height.get_or_insert(1);
    let recs = scan(&sys, h);
    let mut out = String::new();
    for r in &recs {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    let summary = json!({ "records": recs.len(), "box_cardinality": scan_count(&k, h) });
    with_sidecar(job, Some(&k), out.as_bytes(), summary)?;
    Ok(0)
}

fn boxes(job: &Job, r: usize) -> Result<Vec<Rect>, CliError> {
    if job.cfg.boxes.len() != r {
        return Err(CliError::Precondition(format!("`boxes` needs one entry per place ({r})")));
    }
    Ok(job.cfg.boxes.clone())
}

pub fn dispersion_cmd(job: &mut Job) -> Result<u8, CliError> {
    let (k, sys) = system(job)?;
    let bx = boxes(job, sys.r())?;
    let grid = *job.cfg.grid.get_or_insert(5);
    let h = *job.cfg.height.get_or_insert(10);
    let mut heights = job.cfg.heights.clone();
    if !heights.contains(&h) {
        heights.push(h);
    }
    heights.sort_unstable();
    let series: Vec<(i64, f64)> = heights.iter().map(|&hh| (hh, dispersion(&sys, &bx, hh, grid))).collect();
    let nonincreasing = series.windows(2).all(|w| w[1].1 <= w[0].1);
    let body = json!({
        "series": series.iter().map(|(h, d)| json!({ "height": h, "dispersion": d })).collect::<Vec<_>>(),
        "nonincreasing": nonincreasing,
    });
    document(job, Some(&k), body)?;
    Ok(0)
}

pub fn closure_check(job: &mut Job) -> Result<u8, CliError> {
    let (k, sys) = system(job)?;
    let bx = boxes(job, sys.r())?;
    let h = *job.cfg.height.get_or_insert(20);
    let eps = *job.cfg.eps.get_or_insert(1e-4);
    let target = *job.cfg.target_height.get_or_insert(h);
    let report = closure_check_r2(&sys, h, eps, &bx, target)?;
    let ex = exceptional_forms(&sys)?;
    let axes = axis_sets(&sys)?;
    let mut body = json!({
        "report": report,
        "exceptional_forms": ex,
        "axis_sets": axes,
    });
    if let Some(w) = job.cfg.witness.clone() {
        let z = [job.element(&k, &w.w[0])?, job.element(&k, &w.w[1])?];
        let steps = witness_convergence(&sys, w.j, &z, w.depth)?;
        body["witness"] = to_value(&steps);
    }
    document(job, Some(&k), body)?;
    Ok(0)
}

pub fn units_cmd(job: &mut Job) -> Result<u8, CliError> {
    let k = job.field()?;
    let ctx = UnitContext::new(&k)?;
    let fundamental: Vec<Value> = k
        .fundamental_units()
        .iter()
        .zip(&ctx.log_basis)
        .map(|(u, l)| json!({ "unit": coords(u), "log_embedding": l, "norm": k.field_norm(u).to_string() }))
        .collect();
    let mut circles = Vec::new();
    for l in (0..k.r()).filter(|&l| !k.is_real_place(l)) {
        circles.push(json!({ "place": l, "analysis": units::unit_circle_analysis(&ctx, l)? }));
    }
    let mut body = json!({
        "rank": ctx.rank(),
        "torsion_order": k.torsion_order(),
        "m": ctx.m,
        "fundamental_units": fundamental,
        "reduced_log_basis": ctx.reduced,
        "reduced_exponents": ctx.reduced_exponents,
        "kappa_m": ctx.kappa_m,
        "unit_circle": circles,
    });
    if let Some(s) = &job.cfg.stretch {
        let (xi, e) = units::stretch_unit(&ctx, s.place, s.c)?;
        body["stretch"] = json!({
            "unit": coords(&xi),
            "exponents": e,
            "verified": units::verify_stretch(&k, &xi, s.place, s.c),
        });
    }
    document(job, Some(&k), body)?;
    Ok(0)
}

/// Structural checks plus randomized identities drawn from the seed.
pub fn field_check(job: &mut Job) -> Result<u8, CliError> {
    let k = job.field()?;
    let samples = *job.cfg.samples.get_or_insert(32);
    let h = *job.cfg.height.get_or_insert(5);
    let seed = job.cfg.seed.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = k.degree();
    let (mut product_fail, mut mult_fail, mut inv_fail) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mut draw = || {
            let c: Vec<i64> = (0..n).map(|_| rng.gen_range(-h..=h)).collect();
            k.from_basis_ints(&c)
        };
        let (x, y) = (draw(), draw());
        if x.is_zero() || y.is_zero() {
            continue;
        }
        let norm = k.field_norm(&x).abs().to_f64().unwrap_or(f64::INFINITY);
        let prod: f64 = (0..k.r()).map(|i| k.abs_val_f64(&x, i)).product();
        let rel = (prod - norm).abs() / norm;
        worst = worst.max(rel);
        if rel > 1e-9 {
            product_fail += 1;
        }
        let xy = &x * &y;
        for i in 0..k.r() {
            let (a, b, c) = (k.embed_f64(&x, i), k.embed_f64(&y, i), k.embed_f64(&xy, i));
            let p = (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
            let scale = c.0.hypot(c.1).max(1.0);
            if (p.0 - c.0).hypot(p.1 - c.1) > 1e-9 * scale {
                mult_fail += 1;
            }
        }
        if !x.inv().is_ok_and(|xi| (&x * &xi).is_one()) {
            inv_fail += 1;
        }
    }
    let structural = k.verify();
    let structural_ok = structural.iter().all(|(_, ok)| *ok);
    let (cm, _) = k.is_cm();
    let ok = structural_ok && product_fail + mult_fail + inv_fail == 0;
    let body = json!({
        "degree": n,
        "signature": k.signature(),
        "basis_discriminant": k.basis_discriminant().to_string(),
        "is_cm": cm,
        "structural": structural.iter().map(|(name, ok)| json!({ "check": name, "ok": ok })).collect::<Vec<_>>(),
        "random": {
            "samples": samples,
            "product_formula_failures": product_fail,
            "product_formula_worst_rel_err": worst,
            "multiplicativity_failures": mult_fail,
            "inverse_failures": inv_fail,
        },
        "ok": ok,
    });
    document(job, Some(&k), body)?;
    Ok(if ok { 0 } else { 2 })
}
