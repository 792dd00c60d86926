//! Lattice dynamics on `G/Γ`: systoles, diagonal flows and explicit
//! approach sequences toward boundary orbits.

use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::OrbitSpec;
use crate::error::{Error, Result};
use crate::numfield::{FieldElement, NumberField};
use crate::scalar::{CBall, Cx, PlaceValue, RBall, Real};
use crate::sl2k::{boundary_bruhat, boundary_element, MatK, Sigma};
use crate::units::{lll, log_embed, stabilizer_exponent, unit_from_exponents};

/// Numeric block at one place.
pub type Block<S> = [[PlaceValue<S>; 2]; 2];

/// The lattice `(g_1, …, g_r) O²` in `A²`, one numeric block per place.
#[derive(Clone, Debug)]
pub struct LatticeRep<S> {
    field: NumberField,
    prec: u32,
    pub exact_origin: Option<Vec<MatK>>,
    pub blocks: Vec<Block<S>>,
}

fn real_pv<S: Real>(x: f64, prec: u32) -> PlaceValue<S> {
    PlaceValue::Real(RBall::exact(S::from_f64_prec(x, prec)))
}

fn pv_inv<S: Real>(x: &PlaceValue<S>) -> Option<PlaceValue<S>> {
    match x {
        PlaceValue::Real(b) => {
            let one = RBall::exact(S::one(b.mid.precision()));
            one.div(b).map(PlaceValue::Real)
        }
        PlaceValue::Complex(b) => {
            let lo = b.mag_lo();
            if lo <= 0.0 {
                return None;
            }
            let m = b.mid.inv();
            let a = b.mid.abs().to_f64();
            let rad = b.rad / (lo * a) + 4.0 * m.abs().to_f64() * m.re.unit_roundoff();
            Some(PlaceValue::Complex(CBall::new(m, rad)))
        }
    }
}

fn block_mul<S: Real>(a: &Block<S>, b: &Block<S>) -> Block<S> {
    let e = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn embed_mat<S: Real>(k: &NumberField, g: &MatK, i: usize, prec: u32) -> Block<S> {
    let e = |a: usize, b: usize| k.embed_as::<S>(g.entry(a, b), i, prec);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

impl<S: Real> LatticeRep<S> {
    pub fn from_components(k: &NumberField, comps: &[MatK], prec: u32) -> LatticeRep<S> {
        assert_eq!(comps.len(), k.r(), "one component per place");
        let blocks = comps.iter().enumerate().map(|(i, g)| embed_mat(k, g, i, prec)).collect();
        LatticeRep { field: k.clone(), prec, exact_origin: Some(comps.to_vec()), blocks }
    }

    pub fn from_spec(spec: &OrbitSpec, prec: u32) -> LatticeRep<S> {
        LatticeRep::from_components(&spec.field, &spec.components, prec)
    }

    pub fn identity(k: &NumberField, prec: u32) -> LatticeRep<S> {
        LatticeRep::from_components(k, &vec![MatK::identity(k); k.r()], prec)
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    /// Largest radius bound on `|det − 1|` over the blocks.
    pub fn det_defect(&self) -> f64 {
        let one = real_pv::<S>(1.0, self.prec);
        self.blocks
            .iter()
            .map(|b| b[0][0].mul(&b[1][1]).sub(&b[0][1].mul(&b[1][0])).dist_upper(&one))
            .fold(0.0, f64::max)
    }

    /// Same point of `G/Γ` represented by `g γ`.
    pub fn right_mul(&self, gamma: &MatK) -> LatticeRep<S> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| block_mul(b, &embed_mat(&self.field, gamma, i, self.prec)))
            .collect();
        LatticeRep {
            field: self.field.clone(),
            prec: self.prec,
            exact_origin: self.exact_origin.as_ref().map(|v| v.iter().map(|g| g.mul(gamma)).collect()),
            blocks,
        }
    }

    /// Left-multiplies block `i` by `diag(s_i, s_i⁻¹)`.
    pub fn flow(&self, s: &[(usize, PlaceValue<S>)]) -> Result<LatticeRep<S>> {
        let mut blocks = self.blocks.clone();
        for (i, x) in s {
            let b = blocks.get_mut(*i).ok_or(Error::BadPlace(*i))?;
            let xi = pv_inv(x).ok_or(Error::ZeroScalar)?;
            for j in 0..2 {
                b[0][j] = x.mul(&b[0][j]);
                b[1][j] = xi.mul(&b[1][j]);
            }
        }
        Ok(LatticeRep { field: self.field.clone(), prec: self.prec, exact_origin: None, blocks })
    }

    /// [`flow`](Self::flow) by real scalars.
    pub fn flow_real(&self, s: &[(usize, f64)]) -> Result<LatticeRep<S>> {
        let s: Vec<_> = s.iter().map(|&(i, x)| (i, real_pv::<S>(x, self.prec))).collect();
        self.flow(&s)
    }

    /// Blocks as `f64` complex pairs.
    fn blocks_f64(&self) -> Vec<[[(f64, f64); 2]; 2]> {
        self.blocks
            .iter()
            .map(|b| {
                [[b[0][0].to_f64_pair(), b[0][1].to_f64_pair()], [b[1][0].to_f64_pair(), b[1][1].to_f64_pair()]]
            })
            .collect()
    }
}

/// Real coordinates of the images of the `2n` generators of `O²`.
struct Generators {
    cols: Vec<Vec<f64>>,
    /// `(offset, is_complex)` per place.
    layout: Vec<(usize, bool)>,
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn generators<S: Real>(x: &LatticeRep<S>) -> Generators {
    let k = &x.field;
    let n = k.degree();
    let blocks = x.blocks_f64();
    let mut layout = Vec::new();
    let mut off = 0;
    for i in 0..k.r() {
        let c = !k.is_real_place(i);
        layout.push((off, c));
        off += if c { 4 } else { 2 };
    }
    let basis: Vec<FieldElement> = (0..n).map(|j| k.basis_element(j)).collect();
    let mut cols = Vec::with_capacity(2 * n);
    for slot in 0..2 {
        for b in &basis {
            let mut v = vec![0.0; off];
            for (i, &(o, c)) in layout.iter().enumerate() {
                let beta = k.embed_f64(b, i);
                let y1 = cmul(blocks[i][0][slot], beta);
                let y2 = cmul(blocks[i][1][slot], beta);
                if c {
                    v[o..o + 4].copy_from_slice(&[y1.0, y1.1, y2.0, y2.1]);
                } else {
                    v[o] = y1.0;
                    v[o + 1] = y2.0;
                }
            }
            cols.push(v);
        }
    }
    Generators { cols, layout }
}

impl Generators {
    fn image(&self, x: &[i64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols[0].len()];
        for (c, &xi) in self.cols.iter().zip(x) {
            if xi != 0 {
                for (a, b) in y.iter_mut().zip(c) {
                    *a += xi as f64 * b;
                }
            }
        }
        y
    }

    fn norm(&self, y: &[f64]) -> f64 {
        self.layout
            .iter()
            .map(|&(o, c)| {
                if c {
                    (y[o] * y[o] + y[o + 1] * y[o + 1]).max(y[o + 2] * y[o + 2] + y[o + 3] * y[o + 3])
                } else {
                    y[o].abs().max(y[o + 1].abs())
                }
            })
            .fold(0.0, f64::max)
    }

    /// Euclidean radius² enclosing the norm ball of radius `rho`.
    fn euclid_bound(&self, rho: f64) -> f64 {
        self.layout.iter().map(|&(_, c)| if c { 2.0 * rho } else { 2.0 * rho * rho }).sum()
    }
}

/// Shortest nonzero vector of height at most `h`, measured by
/// `max_i ‖g_i σ_i(w)‖_i`.
pub fn systole<S: Real>(x: &LatticeRep<S>, h: u64) -> f64 {
    systole_with_vector(x, h).0
}

/// [`systole`] together with the integer coordinates of a minimizer.
pub fn systole_with_vector<S: Real>(x: &LatticeRep<S>, h: u64) -> (f64, Vec<i64>) {
    assert!(h >= 1, "height bound must be positive");
    let g = generators(x);
    let d = g.cols.len();
    let h = h as i64;
    let mut best = f64::INFINITY;
    let mut arg = vec![0i64; d];
    for j in 0..d {
        let mut e = vec![0i64; d];
        e[j] = 1;
        let v = g.norm(&g.cols[j]);
        if v < best {
            best = v;
            arg = e;
        }
    }
    // short vectors of the reduced basis that fit in the box seed the bound
    let (red, t) = lll(&g.cols, 0.99);
    for (row, v) in t.iter().zip(&red) {
        if row.iter().all(|c| c.abs() <= h) {
            let n = g.norm(v);
            if n < best {
                best = n;
                arg = row.clone();
            }
        }
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let cols = &g.cols;
    let mut bs: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut mu = vec![vec![0.0; d]; d];
    for i in 0..d {
        let mut v = cols[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&cols[i], &bs[j]) / dot(&bs[j], &bs[j]);
            for (a, b) in v.iter_mut().zip(&bs[j]) {
                *a -= mu[i][j] * b;
            }
        }
        bs.push(v);
    }
    let bnorm: Vec<f64> = bs.iter().map(|v| dot(v, v)).collect();
    let mut z = vec![0i64; d];
    let mut st = Enum { g: &g, mu: &mu, bnorm: &bnorm, h, best, arg, visits: 0 };
    st.recurse(d, &mut z, 0.0);
    (st.best, st.arg)
}

struct Enum<'a> {
    g: &'a Generators,
    mu: &'a [Vec<f64>],
    bnorm: &'a [f64],
    h: i64,
    best: f64,
    arg: Vec<i64>,
    visits: u64,
}

const ENUM_VISIT_CAP: u64 = 400_000_000;

impl Enum<'_> {
    fn radius(&self) -> f64 {
        self.g.euclid_bound(self.best) * (1.0 + 1e-9) + 1e-300
    }

    fn recurse(&mut self, level: usize, z: &mut Vec<i64>, partial: f64) {
        self.visits += 1;
        if self.visits > ENUM_VISIT_CAP {
            return;
        }
        if level == 0 {
            if z.iter().all(|&c| c == 0) {
                return;
            }
            let v = self.g.norm(&self.g.image(z));
            if v < self.best {
                self.best = v;
                self.arg = z.clone();
            }
            return;
        }
        let i = level - 1;
        let d = z.len();
        let c: f64 = -(i + 1..d).map(|j| z[j] as f64 * self.mu[j][i]).sum::<f64>();
        let rem = self.radius() - partial;
        if rem < 0.0 {
            return;
        }
        let w = (rem / self.bnorm[i]).sqrt();
        let lo = ((c - w).ceil() as i64).max(-self.h);
        let hi = ((c + w).floor() as i64).min(self.h);
        if lo > hi {
            return;
        }
        let mid = (c.round() as i64).clamp(lo, hi);
        let mut order = vec![mid];
        for s in 1..=(hi - lo) {
            if mid + s <= hi {
                order.push(mid + s);
            }
            if mid - s >= lo {
                order.push(mid - s);
            }
        }
        for zi in order {
            let dlt = zi as f64 - c;
            let p = partial + dlt * dlt * self.bnorm[i];
            if p > self.radius() {
                continue;
            }
            z[i] = zi;
            self.recurse(level - 1, z, p);
        }
        z[i] = 0;
    }
}

/// Reference implementation enumerating the whole coordinate box.
pub fn systole_bruteforce<S: Real>(x: &LatticeRep<S>, h: u64) -> f64 {
    let g = generators(x);
    let d = g.cols.len();
    let h = h as i64;
    let width = 2 * h + 1;
    let total = (width as u64).pow(d as u32);
    (0..total)
        .into_par_iter()
        .map(|code| {
            let mut c = code;
            let x: Vec<i64> = (0..d)
                .map(|_| {
                    let v = (c % width as u64) as i64 - h;
                    c /= width as u64;
                    v
                })
                .collect();
            if x.iter().all(|&v| v == 0) {
                f64::INFINITY
            } else {
                g.norm(&g.image(&x))
            }
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Systole series along `d_i(e^t)`.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceScan {
    pub place: usize,
    pub height: u64,
    pub points: Vec<(f64, f64)>,
    /// `(threshold, last time the series crossed below it)`.
    pub crossings: Vec<(f64, Option<f64>)>,
}

pub const SCAN_THRESHOLDS: [f64; 3] = [1e-1, 1e-2, 1e-3];

pub fn divergence_scan(spec: &OrbitSpec, i: usize, t_max: f64, steps: usize, h: u64) -> Result<DivergenceScan> {
    if !spec.index_set.contains(&i) {
        return Err(Error::BadPlace(i));
    }
    let base = LatticeRep::<f64>::from_spec(spec, 64);
    let steps = steps.max(1);
    let points: Vec<(f64, f64)> = (0..=steps)
        .into_par_iter()
        .map(|s| {
            let t = t_max * s as f64 / steps as f64;
            let x = base.flow_real(&[(i, t.exp())]).expect("positive scalar");
            (t, systole(&x, h))
        })
        .collect();
    let crossings = SCAN_THRESHOLDS
        .iter()
        .map(|&th| {
            let mut last = None;
            for w in points.windows(2) {
                if w[0].1 >= th && w[1].1 < th {
                    last = Some(w[1].0);
                }
            }
            if last.is_none() && points.first().is_some_and(|p| p.1 < th) {
                last = Some(points[0].0);
            }
            (th, last)
        })
        .collect();
    Ok(DivergenceScan { place: i, height: h, points, crossings })
}

/// Sliding-window maxima nonincreasing.
pub fn window_max_nonincreasing(series: &[(f64, f64)], window: usize) -> bool {
    let w = window.max(1);
    let maxima: Vec<f64> = series
        .windows(w.min(series.len()).max(1))
        .map(|s| s.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    maxima.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-12))
}

/// One step of an approach sequence.
#[derive(Clone, Debug, Serialize)]
pub struct ApproachStep {
    pub k: u64,
    /// Diagonal scalars `(s_1, s_2)` at the two places of `I`.
    #[serde(serialize_with = "ser_pair")]
    pub d: (FieldElement, FieldElement),
    pub gamma: MatK,
    pub gamma_integral: bool,
    pub err: f64,
}

fn ser_pair<Sr: serde::Serializer>(p: &(FieldElement, FieldElement), s: Sr) -> std::result::Result<Sr::Ok, Sr::Error> {
    let c = |x: &FieldElement| x.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>();
    s.collect_seq([c(&p.0), c(&p.1)])
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryApproach {
    pub sigma: Sigma,
    pub h: MatK,
    pub m: u64,
    /// Exponents of `η` over the fundamental units.
    pub eta: Vec<i64>,
    pub log_eta: f64,
    pub steps: Vec<ApproachStep>,
    pub expected_slope: f64,
    /// Least-squares slope of `ln err_k`, absent when errors vanish.
    pub fitted_slope: Option<f64>,
}

fn pick_eta(k: &NumberField, p1: usize, p2: usize) -> Result<(Vec<i64>, f64)> {
    let rank = k.fundamental_units().len();
    if rank == 0 {
        return Err(Error::RankZeroUnits);
    }
    let b = if rank == 1 { 1 } else { 3i64 };
    let width = (2 * b + 1) as u64;
    let mut best: Option<(Vec<i64>, f64)> = None;
    for code in 0..width.pow(rank as u32) {
        let mut c = code;
        let e: Vec<i64> = (0..rank)
            .map(|_| {
                let v = (c % width) as i64 - b;
                c /= width;
                v
            })
            .collect();
        if e.iter().all(|&v| v == 0) {
            continue;
        }
        let u = unit_from_exponents(k, &e);
        let l = log_embed(k, &u)?;
        let rate = l[p1].min(-l[p2]);
        if rate > 1e-9 && best.as_ref().is_none_or(|(_, r)| rate > *r) {
            best = Some((e, rate));
        }
    }
    best.ok_or(Error::RankZeroUnits)
}

fn diff_mag(k: &NumberField, a: &MatK, b: &MatK, place: usize) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let d = a.entry(i, j) - b.entry(i, j);
            if !d.is_zero() {
                m = m.max(k.embed(&d, place, 200).mag());
            }
        }
    }
    m
}

/// Explicit sequence `d_I(s_k) g γ_k → (ω^{σ1} h, ω^{σ2} h)`.
pub fn boundary_approach(spec: &OrbitSpec, sigma: Sigma, kmax: u64) -> Result<BoundaryApproach> {
    let k = &spec.field;
    let [p1, p2] = spec.index_set[..] else {
        return Err(Error::HypothesisViolated("boundary approach needs |I| = 2".into()));
    };
    let g1 = spec.component(p1);
    let g2 = spec.component(p2);
    let h = boundary_element(k, g1, g2, sigma)?;
    let (_, bp) = boundary_bruhat(k, g1, g2, sigma)?;
    let a = bp.entry(1, 1).clone();
    let stab = stabilizer_exponent(k, &h)?;
    let (eta_e, _) = pick_eta(k, p1, p2)?;
    let eta = unit_from_exponents(k, &eta_e);
    let log_eta = log_embed(k, &eta)?;
    let step = eta.pow(stab.m as i64)?;
    let t1 = MatK::omega_pow(k, sigma.0).mul(&h);
    let t2 = MatK::omega_pow(k, sigma.1).mul(&h);
    let twist = |x: FieldElement, s: u8| -> Result<FieldElement> {
        if s == 0 {
            Ok(x)
        } else {
            Ok(-&x.inv()?)
        }
    };
    let mut xi = k.one();
    let mut steps = Vec::new();
    for kk in 1..=kmax {
        xi = &xi * &step;
        let gamma = h.conjugate(&MatK::diag(&xi.inv()?)?);
        let s1 = twist(xi.clone(), sigma.0)?;
        let s2 = twist(&a * &xi, sigma.1)?;
        let b1 = MatK::diag(&s1)?.mul(g1).mul(&gamma);
        let b2 = MatK::diag(&s2)?.mul(g2).mul(&gamma);
        let err = diff_mag(k, &b1, &t1, p1).max(diff_mag(k, &b2, &t2, p2));
        steps.push(ApproachStep { k: kk, d: (s1, s2), gamma_integral: gamma.in_gamma(k), gamma, err });
    }
    let rate = log_eta[p1].min(-log_eta[p2]);
    let expected_slope = -2.0 * stab.m as f64 * rate;
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .filter(|s| s.err > 0.0)
        .map(|s| (s.k as f64, s.err.ln()))
        .collect();
    let fitted_slope = fit_slope(&pts);
    Ok(BoundaryApproach {
        sigma,
        h,
        m: stab.m,
        eta: eta_e,
        log_eta: log_eta[p1],
        steps,
        expected_slope,
        fitted_slope,
    })
}

/// Least-squares slope; `None` with fewer than two points.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceRow {
    pub log_s: f64,
    pub log_t: f64,
    pub systole: f64,
    pub imbalance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceReport {
    pub floor: f64,
    pub rows: Vec<BalanceRow>,
    /// Largest imbalance over rows with systole at or above the floor.
    pub max_imbalance: f64,
    /// First row index whose systole falls below the floor.
    pub collapse_at: Option<usize>,
    pub min_systole: f64,
}

/// Follows `d_I(s_k, t_k) π(g)` and records the balance `| |log|s|| − |log|t|| |`.
pub fn balance_check(spec: &OrbitSpec, trajectory: &[(f64, f64)], floor: f64, h: u64) -> Result<BalanceReport> {
    let [p1, p2] = spec.index_set[..] else {
        return Err(Error::HypothesisViolated("balance check needs |I| = 2".into()));
    };
    let base = LatticeRep::<f64>::from_spec(spec, 64);
    let rows: Vec<BalanceRow> = trajectory
        .par_iter()
        .map(|&(s, t)| {
            let x = base.flow_real(&[(p1, s), (p2, t)])?;
            let (ls, lt) = (s.abs().ln(), t.abs().ln());
            Ok(BalanceRow { log_s: ls, log_t: lt, systole: systole(&x, h), imbalance: (ls.abs() - lt.abs()).abs() })
        })
        .collect::<Result<_>>()?;
    let max_imbalance = rows.iter().filter(|r| r.systole >= floor).map(|r| r.imbalance).fold(0.0, f64::max);
    let collapse_at = rows.iter().position(|r| r.systole < floor);
    let min_systole = rows.iter().map(|r| r.systole).fold(f64::INFINITY, f64::min);
    Ok(BalanceReport { floor, rows, max_imbalance, collapse_at, min_systole })
}

/// Row of a trajectory CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub systole: Option<f64>,
    pub err: Option<f64>,
    pub flags: String,
}

/// CSV with header `t,systole,err,flags`.
pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let f = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
    let mut out = String::from("t,systole,err,flags\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.t, f(r.systole), f(r.err), r.flags));
    }
    out
}

impl From<&DivergenceScan> for Vec<TrajectoryRow> {
    fn from(s: &DivergenceScan) -> Self {
        s.points
            .iter()
            .map(|&(t, v)| TrajectoryRow {
                t,
                systole: Some(v),
                err: None,
                flags: SCAN_THRESHOLDS
                    .iter()
                    .filter(|&&th| v < th)
                    .map(|th| format!("below_{th:e}"))
                    .collect::<Vec<_>>()
                    .join(";"),
            })
            .collect()
    }
}

impl From<&BoundaryApproach> for Vec<TrajectoryRow> {
    fn from(b: &BoundaryApproach) -> Self {
        b.steps
            .iter()
            .map(|s| TrajectoryRow {
                t: s.k as f64,
                systole: None,
                err: Some(s.err),
                flags: if s.gamma_integral { "gamma_ok".into() } else { "gamma_not_integral".into() },
            })
            .collect()
    }
}

impl From<&BalanceReport> for Vec<TrajectoryRow> {
    fn from(b: &BalanceReport) -> Self {
        b.rows
            .iter()
            .map(|r| TrajectoryRow {
                t: r.log_s,
                systole: Some(r.systole),
                err: None,
                flags: if r.systole < b.floor { "collapsed".into() } else { String::new() },
            })
            .collect()
    }
}

/// Convenience for complex scalars in flows.
pub fn complex_scalar<S: Real>(re: f64, im: f64, prec: u32) -> PlaceValue<S> {
    PlaceValue::Complex(CBall::new(Cx::new(S::from_f64_prec(re, prec), S::from_f64_prec(im, prec)), 0.0))
}
