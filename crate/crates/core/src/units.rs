//! Computations in the Dirichlet log-unit lattice.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numfield::{FieldElement, NumberField};
use crate::scalar::{Mp, Real};
use crate::sl2k::MatK;

/// `(log|x|_1, …, log|x|_r)` in double precision.
pub fn log_embed(k: &NumberField, x: &FieldElement) -> Result<Vec<f64>> {
    if x.is_zero() {
        return Err(Error::ZeroInput);
    }
    Ok((0..k.r()).map(|i| log_abs_mp(k, x, i, 96).to_f64()).collect())
}

/// `log|x|_i` as a multiprecision value with roughly `prec` correct bits.
pub fn log_abs_mp(k: &NumberField, x: &FieldElement, i: usize, prec: u32) -> Mp {
    k.abs_val(x, i, prec + 16).mid.with_precision(prec + 16).ln()
}

/// Product of fundamental-unit powers `∏ u_k^{e_k}`.
pub fn unit_from_exponents(k: &NumberField, e: &[i64]) -> FieldElement {
    k.fundamental_units()
        .iter()
        .zip(e)
        .fold(k.one(), |acc, (u, &n)| &acc * &u.pow(n).expect("units are invertible"))
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// LLL reduction of the row basis `b`; returns the reduced rows together
/// with the unimodular transform `t` satisfying `reduced = t · b`.
pub fn lll(b: &[Vec<f64>], delta: f64) -> (Vec<Vec<f64>>, Vec<Vec<i64>>) {
    let k = b.len();
    let mut basis = b.to_vec();
    let mut t: Vec<Vec<i64>> = (0..k).map(|i| (0..k).map(|j| (i == j) as i64).collect()).collect();
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
    let gso = |basis: &[Vec<f64>]| {
        let mut bs: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut mu = vec![vec![0.0; k]; k];
        for i in 0..k {
            let mut v = basis[i].clone();
            for j in 0..i {
                mu[i][j] = dot(&basis[i], &bs[j]) / dot(&bs[j], &bs[j]);
                for (x, y) in v.iter_mut().zip(&bs[j]) {
                    *x -= mu[i][j] * y;
                }
            }
            bs.push(v);
        }
        (bs, mu)
    };
    let mut i = 1;
    let mut guard = 0;
    while i < k && guard < 10_000 {
        guard += 1;
        for j in (0..i).rev() {
            let (_, mu) = gso(&basis);
            let r = mu[i][j].round();
            if r != 0.0 {
                for c in 0..basis[i].len() {
                    basis[i][c] -= r * basis[j][c];
                }
                for c in 0..k {
                    t[i][c] -= r as i64 * t[j][c];
                }
            }
        }
        let (bs, mu) = gso(&basis);
        let lhs = dot(&bs[i], &bs[i]);
        let rhs = (delta - mu[i][i - 1] * mu[i][i - 1]) * dot(&bs[i - 1], &bs[i - 1]);
        if lhs >= rhs {
            i += 1;
        } else {
            basis.swap(i, i - 1);
            t.swap(i, i - 1);
            i = i.max(2) - 1;
        }
    }
    (basis, t)
}

/// Log-lattice data for `O*_m = {ξ^m : ξ ∈ O*}`.
#[derive(Clone, Debug)]
pub struct UnitContext {
    pub field: NumberField,
    pub m: u64,
    /// Log embeddings of the fundamental units.
    pub log_basis: Vec<Vec<f64>>,
    /// LLL-reduced basis of `m · Λ`.
    pub reduced: Vec<Vec<f64>>,
    /// Exponents over the fundamental units for each reduced vector (already multiplied by `m`).
    pub reduced_exponents: Vec<Vec<i64>>,
    /// Upper bound for the approximation ratio of [`approx_unit`].
    pub kappa_m: f64,
}

impl UnitContext {
    /// Context with `m` equal to the torsion order.
    pub fn new(field: &NumberField) -> Result<UnitContext> {
        UnitContext::with_m(field, field.torsion_order())
    }

    /// `m` must be a positive multiple of the torsion order.
    pub fn with_m(field: &NumberField, m: u64) -> Result<UnitContext> {
        if m == 0 || m % field.torsion_order() != 0 {
            return Err(Error::HypothesisViolated(format!(
                "m = {m} is not a multiple of the torsion order {}",
                field.torsion_order()
            )));
        }
        let log_basis: Vec<Vec<f64>> = field
            .fundamental_units()
            .iter()
            .map(|u| log_embed(field, u))
            .collect::<Result<_>>()?;
        let scaled: Vec<Vec<f64>> = log_basis
            .iter()
            .map(|v| v.iter().map(|x| x * m as f64).collect())
            .collect();
        let (reduced, t) = lll(&scaled, 0.99);
        let reduced_exponents: Vec<Vec<i64>> =
            t.iter().map(|row| row.iter().map(|x| x * m as i64).collect()).collect();
        let half: f64 = reduced.iter().map(|v| 0.5 * sup(v)).sum();
        let kappa_m = (half * (1.0 + 1e-12) + 1e-9).exp();
        Ok(UnitContext { field: field.clone(), m, log_basis, reduced, reduced_exponents, kappa_m })
    }

    pub fn rank(&self) -> usize {
        self.log_basis.len()
    }

    /// Exponents over the fundamental units from coefficients over the reduced basis.
    fn exponents(&self, c: &[i64]) -> Vec<i64> {
        let k = self.rank();
        (0..k)
            .map(|j| c.iter().zip(&self.reduced_exponents).map(|(a, row)| a * row[j]).sum())
            .collect()
    }

    /// Solves `Σ c_k · reduced_k = y` in the least-squares sense.
    fn coefficients(&self, y: &[f64]) -> Vec<f64> {
        let k = self.rank();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut g: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| dot(&self.reduced[i], &self.reduced[j])).collect())
            .collect();
        let mut rhs: Vec<f64> = (0..k).map(|i| dot(&self.reduced[i], y)).collect();
        for c in 0..k {
            let p = (c..k).max_by(|&a, &b| g[a][c].abs().total_cmp(&g[b][c].abs())).unwrap();
            g.swap(c, p);
            rhs.swap(c, p);
            for r in c + 1..k {
                let f = g[r][c] / g[c][c];
                for j in c..k {
                    g[r][j] -= f * g[c][j];
                }
                rhs[r] -= f * rhs[c];
            }
        }
        let mut x = vec![0.0; k];
        for r in (0..k).rev() {
            let s: f64 = (r + 1..k).map(|j| g[r][j] * x[j]).sum();
            x[r] = (rhs[r] - s) / g[r][r];
        }
        x
    }
}

/// Result of [`approx_unit`].
#[derive(Clone, Debug)]
pub struct UnitApprox {
    pub xi: FieldElement,
    /// Exponents of `ξ` over the fundamental units.
    pub exponents: Vec<i64>,
    pub achieved_ratio: f64,
}

/// Finds `ξ ∈ O*_m` with `a_i/κ ≤ |ξ x|_i ≤ κ a_i` for all places.
pub fn approx_unit(ctx: &UnitContext, targets: &[f64], x: &FieldElement) -> Result<UnitApprox> {
    let k = &ctx.field;
    let r = k.r();
    if targets.len() != r || targets.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::HypothesisViolated("targets must be r positive reals".into()));
    }
    let lx = log_embed(k, x)?;
    let mut y: Vec<f64> = targets.iter().zip(&lx).map(|(a, l)| a.ln() - l).collect();
    let total: f64 = y.iter().sum();
    let scale = 1.0 + targets.iter().map(|a| a.ln().abs()).sum::<f64>();
    if total.abs() > 2f64.powi(-32) * scale {
        return Err(Error::ProductMismatch(total));
    }
    y.iter_mut().for_each(|v| *v -= total / r as f64);

    let rank = ctx.rank();
    let base: Vec<i64> = if rank == 0 {
        vec![]
    } else {
        ctx.coefficients(&y).iter().map(|c| c.round() as i64).collect()
    };
    let residual = |c: &[i64]| -> f64 {
        let mut v = y.clone();
        for (ck, b) in c.iter().zip(&ctx.reduced) {
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= *ck as f64 * bi;
            }
        }
        sup(&v)
    };
    let mut best = base.clone();
    let mut best_res = residual(&base);
    let neighbors = 3usize.pow(rank.min(8) as u32);
    for code in 0..neighbors {
        let mut c = base.clone();
        let mut t = code;
        for v in c.iter_mut().take(rank.min(8)) {
            *v += (t % 3) as i64 - 1;
            t /= 3;
        }
        let res = residual(&c);
        if res < best_res - 1e-15 {
            best_res = res;
            best = c;
        }
    }
    let exponents = ctx.exponents(&best);
    let xi = unit_from_exponents(k, &exponents);
    let prod = &xi * x;
    let mut worst = Mp::zero(128);
    for (i, a) in targets.iter().enumerate() {
        let d = (log_abs_mp(k, &prod, i, 112) - Mp::from_f64_prec(*a, 128).ln()).abs();
        worst = worst.max_of(d);
    }
    let achieved_ratio = worst.exp().to_f64();
    Ok(UnitApprox { xi, exponents, achieved_ratio })
}

/// Default exponent bound of [`stretch_unit`] and its ceiling.
pub const STRETCH_BOUND: i64 = 60;
pub const STRETCH_BOUND_MAX: i64 = 960;

/// Unit with `|ξ|_l > C` and `|1 − |ξ|_i| < 1/C` for `i > l` (0-based places,
/// so the hypothesis reads `r ≥ 3`, `l ≥ 2`).
pub fn stretch_unit(ctx: &UnitContext, l: usize, c: f64) -> Result<(FieldElement, Vec<i64>)> {
    stretch_unit_bounded(ctx, l, c, STRETCH_BOUND, STRETCH_BOUND_MAX)
}

pub fn stretch_unit_bounded(
    ctx: &UnitContext,
    l: usize,
    c: f64,
    start: i64,
    max: i64,
) -> Result<(FieldElement, Vec<i64>)> {
    let k = &ctx.field;
    let r = k.r();
    if r < 3 || l < 2 || l >= r || !(c > 1.0) {
        return Err(Error::HypothesisViolated(format!(
            "stretch units need r >= 3 and 2 <= l < r, C > 1 (r = {r}, l = {l})"
        )));
    }
    let mut bound = start.max(1);
    loop {
        if let Some(found) = stretch_search(ctx, l, c, bound) {
            return Ok(found);
        }
        if bound >= max {
            return Err(Error::SearchExhausted { bound });
        }
        bound = (bound * 2).min(max);
    }
}

fn stretch_search(ctx: &UnitContext, l: usize, c: f64, bound: i64) -> Option<(FieldElement, Vec<i64>)> {
    let k = &ctx.field;
    let r = k.r();
    let logs = &ctx.log_basis;
    let rank = logs.len();
    let big = c.ln() + 1e-9;
    let (lo, hi) = ((1.0 - 1.0 / c).ln() + 1e-9, (1.0 + 1.0 / c).ln() - 1e-9);
    let mut cands: Vec<Vec<i64>> = Vec::new();
    let mut e = vec![-bound; rank];
    let last = rank - 1;
    'outer: loop {
        // partial log vector of the leading exponents
        let mut partial = vec![0.0; r];
        for (j, ej) in e[..last].iter().enumerate() {
            for i in 0..r {
                partial[i] += *ej as f64 * logs[j][i];
            }
        }
        let (mut emin, mut emax) = (-bound as f64, bound as f64);
        for i in l + 1..r {
            let a = logs[last][i];
            let (p, q) = (lo - partial[i], hi - partial[i]);
            if a.abs() < 1e-300 {
                if !(p < 0.0 && 0.0 < q) {
                    emin = 1.0;
                    emax = 0.0;
                }
                continue;
            }
            let (x, y) = if a > 0.0 { (p / a, q / a) } else { (q / a, p / a) };
            emin = emin.max(x);
            emax = emax.min(y);
        }
        let mut t = emin.ceil() as i64;
        while (t as f64) <= emax {
            let v = partial[l] + t as f64 * logs[last][l];
            if v > big {
                let mut full = e.clone();
                full[last] = t;
                cands.push(full);
            }
            t += 1;
        }
        let mut pos = 0;
        loop {
            if pos >= last {
                break 'outer;
            }
            if e[pos] < bound {
                e[pos] += 1;
                break;
            }
            e[pos] = -bound;
            pos += 1;
        }
    }
    cands.sort_by_key(|v| (v.iter().map(|x| x.abs()).max().unwrap_or(0), v.clone()));
    for cand in cands {
        let xi = unit_from_exponents(k, &cand);
        if verify_stretch(k, &xi, l, c) {
            return Some((xi, cand));
        }
    }
    None
}

/// Post-hoc check of the stretch conditions with error-bounded absolute values.
pub fn verify_stretch(k: &NumberField, xi: &FieldElement, l: usize, c: f64) -> bool {
    if !k.is_unit(xi) {
        return false;
    }
    let at_l = k.abs_val(xi, l, 96);
    if at_l.mid.to_f64() - at_l.rad <= c {
        return false;
    }
    (l + 1..k.r()).all(|i| {
        let v = k.abs_val(xi, i, 96);
        (v.mid.to_f64() - 1.0).abs() + v.rad < 1.0 / c
    })
}

/// Result of [`stabilizer_exponent`].
#[derive(Clone, Debug)]
pub struct Stabilizer {
    pub m: u64,
    /// `γ_u = h⁻¹ d(u^m) h` for each fundamental unit `u`.
    pub witnesses: Vec<MatK>,
}

/// Default cap on the multiplier `j` in `m = w·j`.
pub const STABILIZER_CAP: u64 = 500;

/// Smallest `m = w·j` such that `h⁻¹ d(u^m) h ∈ Γ` for every fundamental unit.
pub fn stabilizer_exponent(k: &NumberField, h: &MatK) -> Result<Stabilizer> {
    stabilizer_exponent_capped(k, h, STABILIZER_CAP)
}

pub fn stabilizer_exponent_capped(k: &NumberField, h: &MatK, cap: u64) -> Result<Stabilizer> {
    let w = k.torsion_order();
    let step: Vec<FieldElement> = k
        .fundamental_units()
        .iter()
        .map(|u| u.pow(w as i64))
        .collect::<Result<_>>()?;
    let mut cur = step.clone();
    for j in 1..=cap {
        let mut witnesses = Vec::with_capacity(cur.len());
        let mut ok = true;
        for xi in &cur {
            let g = h.conjugate(&MatK::diag(xi)?);
            if !g.in_gamma(k) {
                ok = false;
                break;
            }
            witnesses.push(g);
        }
        if ok {
            return Ok(Stabilizer { m: w * j, witnesses });
        }
        cur = cur.iter().zip(&step).map(|(a, b)| a * b).collect();
    }
    Err(Error::CapExceeded(cap))
}

/// Connected component of the closure of the unit group projected to `K_l^*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CircleComponent {
    FullPositiveRay,
    UnitCircle,
    Dense,
    Trivial,
    /// Moduli dense, arguments of infinite order but no modulus-one unit found.
    Unresolved,
}

/// Details behind [`unit_circle_component`].
#[derive(Clone, Debug, Serialize)]
pub struct CircleAnalysis {
    pub component: CircleComponent,
    /// `log|u_k|_l` (plain modulus) for each fundamental unit.
    pub log_moduli: Vec<f64>,
    /// Independent integer relations `Σ e_k log|u_k|_l = 0`, each checked
    /// by reciprocity of the characteristic polynomial.
    pub relations: Vec<Vec<i64>>,
    /// Largest `|Σ e_k log|u_k|_l|` over the reported relations.
    pub relation_residual: f64,
}

const RELATION_BOUND: i64 = 6;
const RELATION_TOL: f64 = 1e-20;
const TORSION_ARG_BOUND: u32 = 60;

fn is_reciprocal(x: &FieldElement) -> bool {
    let p = x.char_poly();
    let c = p.coeffs();
    let n = c.len() - 1;
    let s = c[0].clone();
    (0..=n).all(|j| c[n - j] == &s * &c[j])
}

fn float_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c].abs() > 1e-9) else { continue };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank {
                let f = m[i][c] / m[rank][c];
                for j in 0..cols {
                    m[i][j] -= f * m[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn unit_circle_analysis(ctx: &UnitContext, l: usize) -> Result<CircleAnalysis> {
    let k = &ctx.field;
    if l >= k.r() || k.is_real_place(l) {
        return Err(Error::NotComplexPlace(l));
    }
    let units = k.fundamental_units();
    let rank = units.len();
    if rank == 0 {
        return Ok(CircleAnalysis {
            component: CircleComponent::Trivial,
            log_moduli: vec![],
            relations: vec![],
            relation_residual: 0.0,
        });
    }
    let prec = 256;
    let lam: Vec<Mp> = units
        .iter()
        .map(|u| k.embed(u, l, prec + 16).as_complex().mid.abs().ln())
        .collect();
    let mut relations: Vec<Vec<i64>> = Vec::new();
    let mut residual = 0.0f64;
    let width = (2 * RELATION_BOUND + 1) as u64;
    let total = width.pow(rank as u32);
    let mut found: Vec<(i64, Vec<i64>, f64)> = Vec::new();
    for code in 1..total {
        let mut e = vec![0i64; rank];
        let mut t = code;
        for v in e.iter_mut() {
            *v = (t % width) as i64 - RELATION_BOUND;
            t /= width;
        }
        // canonical sign: first nonzero entry positive
        if e.iter().find(|&&x| x != 0).is_none_or(|&x| x < 0) {
            continue;
        }
        let s = e
            .iter()
            .zip(&lam)
            .fold(Mp::zero(prec), |acc, (c, v)| acc + Mp::from_f64_prec(*c as f64, prec) * v.clone());
        let s = s.abs().to_f64();
        if s < RELATION_TOL {
            let size = e.iter().map(|x| x.abs()).sum();
            found.push((size, e, s));
        }
    }
    found.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    for (_, e, s) in found {
        let mut trial = relations.clone();
        trial.push(e.clone());
        if float_rank(&trial) > relations.len() && is_reciprocal(&unit_from_exponents(k, &e)) {
            relations = trial;
            residual = residual.max(s);
        }
    }
    let n1 = relations.len();
    let component = if rank - n1 <= 1 {
        if n1 > 0 {
            CircleComponent::UnitCircle
        } else {
            CircleComponent::Trivial
        }
    } else if n1 > 0 {
        CircleComponent::Dense
    } else if units.iter().all(|u| has_torsion_argument(k, u, l)) {
        CircleComponent::FullPositiveRay
    } else {
        CircleComponent::Unresolved
    };
    Ok(CircleAnalysis {
        component,
        log_moduli: lam.iter().map(|v| v.to_f64()).collect(),
        relations,
        relation_residual: residual,
    })
}

/// `σ_l(u)^N` real and positive for some `N ≤ 60`, tested at 128 bits.
fn has_torsion_argument(k: &NumberField, u: &FieldElement, l: usize) -> bool {
    let z = k.embed(u, l, 128).as_complex().mid;
    let arg = z.arg().to_f64() / (2.0 * std::f64::consts::PI);
    (1..=TORSION_ARG_BOUND).any(|n| {
        let t = arg * n as f64;
        (t - t.round()).abs() < 1e-25_f64.max(1e-15 * n as f64)
    })
}

pub fn unit_circle_component(ctx: &UnitContext, l: usize) -> Result<CircleComponent> {
    Ok(unit_circle_analysis(ctx, l)?.component)
}
