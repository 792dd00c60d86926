//! Values of split binary quadratic forms at integral points.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::{boundary_set, distinctness_matrix, EqualityConfig, OrbitSpec};
use crate::error::{Error, Result};
use crate::numfield::{FieldElement, NumberField};
use crate::orbitflow::boundary_approach;
use crate::scalar::{ArchPoint, PlaceValue};
use crate::sl2k::{MatK, Sigma};

/// Linear form `a X + b Y`.
pub type LinearForm = [FieldElement; 2];

/// Quadratic form `f_i = l_{i1} · l_{i2}` at each place.
#[derive(Clone, Debug)]
pub struct SplitFormSystem {
    pub field: NumberField,
    pub linear_forms: Vec<[LinearForm; 2]>,
    /// `g_i = diag(1, δ_i⁻¹) · (l_{i1}; l_{i2})`, so `f_i = δ_i · f_0 ∘ g_i`.
    pub g: Vec<MatK>,
    /// `δ_i`, the determinant of the coefficient matrix.
    pub scale: Vec<FieldElement>,
    pub proportional: bool,
}

fn lin_eval(l: &LinearForm, z: &[FieldElement; 2]) -> FieldElement {
    &(&l[0] * &z[0]) + &(&l[1] * &z[1])
}

/// `f_0(X, Y) = X · Y`.
pub fn f0(v: &[FieldElement; 2]) -> FieldElement {
    &v[0] * &v[1]
}

fn mat_apply(m: &MatK, z: &[FieldElement; 2]) -> [FieldElement; 2] {
    [
        &(m.entry(0, 0) * &z[0]) + &(m.entry(0, 1) * &z[1]),
        &(m.entry(1, 0) * &z[0]) + &(m.entry(1, 1) * &z[1]),
    ]
}

/// Builds the system and its normalized matrices. One pair of linear
/// forms per archimedean place.
pub fn build_system(k: &NumberField, forms: Vec<[LinearForm; 2]>) -> Result<SplitFormSystem> {
    if forms.len() != k.r() {
        return Err(Error::HypothesisViolated(format!("expected {} forms, got {}", k.r(), forms.len())));
    }
    let mut g = Vec::with_capacity(forms.len());
    let mut scale = Vec::with_capacity(forms.len());
    for (i, [l1, l2]) in forms.iter().enumerate() {
        if !l1.iter().chain(l2).all(|x| x.same_field(&k.one())) {
            return Err(Error::FieldMismatch);
        }
        let det = &(&l1[0] * &l2[1]) - &(&l1[1] * &l2[0]);
        if det.is_zero() {
            return Err(Error::DegenerateForm(i));
        }
        let di = det.inv()?;
        g.push(MatK::new(l1[0].clone(), l1[1].clone(), &l2[0] * &di, &l2[1] * &di)?);
        scale.push(det);
    }
    let g0inv = g[0].inv();
    let proportional = g.iter().all(|gi| gi.mul(&g0inv).is_monomial());
    Ok(SplitFormSystem { field: k.clone(), linear_forms: forms, g, scale, proportional })
}

/// Convenience constructor from integer coefficients `[[a1,b1],[a2,b2]]`.
pub fn build_system_ints(k: &NumberField, forms: &[[[i64; 2]; 2]]) -> Result<SplitFormSystem> {
    let forms = forms
        .iter()
        .map(|f| f.map(|l| l.map(|c| k.int(c))))
        .collect();
    build_system(k, forms)
}

impl SplitFormSystem {
    pub fn r(&self) -> usize {
        self.linear_forms.len()
    }

    /// `f_i(z)` exactly in `K`.
    pub fn eval_exact(&self, z: &[FieldElement; 2]) -> Vec<FieldElement> {
        self.linear_forms.iter().map(|[a, b]| &lin_eval(a, z) * &lin_eval(b, z)).collect()
    }

    /// `f(z) ∈ A`, exact evaluation then embedding.
    pub fn eval(&self, z: &[FieldElement; 2], prec: u32) -> ArchPoint<f64> {
        let coords = self
            .eval_exact(z)
            .iter()
            .enumerate()
            .map(|(i, v)| self.field.embed_as::<f64>(v, i, prec))
            .collect();
        ArchPoint { coords }
    }

    /// `f(z)` through floating-point embeddings of the coefficients.
    pub fn eval_numeric(&self, z: &[FieldElement; 2]) -> Vec<(f64, f64)> {
        let k = &self.field;
        (0..self.r())
            .map(|i| {
                let e = |x: &FieldElement| k.embed_f64(x, i);
                let (x, y) = (e(&z[0]), e(&z[1]));
                let [l1, l2] = &self.linear_forms[i];
                let v1 = cadd(cmul(e(&l1[0]), x), cmul(e(&l1[1]), y));
                let v2 = cadd(cmul(e(&l2[0]), x), cmul(e(&l2[1]), y));
                cmul(v1, v2)
            })
            .collect()
    }

    pub fn orbit_spec(&self) -> Result<OrbitSpec> {
        let idx: Vec<usize> = (0..self.r()).collect();
        OrbitSpec::new(&self.field, &idx, self.g.iter().cloned().enumerate().collect())
    }
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cadd(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 + b.0, a.1 + b.1)
}

/// One scanned value.
#[derive(Clone, Debug)]
pub struct ValueRecord {
    pub z: [FieldElement; 2],
    pub value: ArchPoint<f64>,
    pub height: i64,
}

impl Serialize for ValueRecord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let coords = |x: &FieldElement| x.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>();
        let value: Vec<serde_json::Value> = self
            .value
            .coords
            .iter()
            .map(|c| {
                let (re, im) = c.to_f64_pair();
                serde_json::json!({
                    "re": format!("{re:.17e}"),
                    "im": format!("{im:.17e}"),
                    "err": format!("{:.3e}", c.rad()),
                })
            })
            .collect();
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("z", &[coords(&self.z[0]), coords(&self.z[1])])?;
        m.serialize_entry("value", &value)?;
        m.serialize_entry("height", &self.height)?;
        m.end()
    }
}

/// Number of points `z` in the coordinate box of height `h`.
pub fn scan_count(k: &NumberField, h: i64) -> u64 {
    ((2 * h + 1) as u64).pow(2 * k.degree() as u32)
}

fn decode(code: u64, d: usize, h: i64) -> Vec<i64> {
    let w = (2 * h + 1) as u64;
    let mut c = code;
    (0..d)
        .map(|_| {
            let v = (c % w) as i64 - h;
            c /= w;
            v
        })
        .collect()
}

fn split_z(k: &NumberField, c: &[i64]) -> [FieldElement; 2] {
    let n = k.degree();
    [k.from_basis_ints(&c[..n]), k.from_basis_ints(&c[n..])]
}

/// Every `z ∈ O²` with coordinates of sup-norm at most `h`, including zero.
pub fn scan(sys: &SplitFormSystem, h: i64) -> Vec<ValueRecord> {
    let k = &sys.field;
    let d = 2 * k.degree();
    (0..scan_count(k, h))
        .into_par_iter()
        .map(|code| {
            let c = decode(code, d, h);
            let z = split_z(k, &c);
            let height = c.iter().map(|x| x.abs()).max().unwrap_or(0);
            ValueRecord { value: sys.eval(&z, 64), z, height }
        })
        .collect()
}

/// Rectangle in `K_i`; the imaginary range is ignored at real places.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct Rect {
    pub re: (f64, f64),
    #[serde(default)]
    pub im: (f64, f64),
}

impl Rect {
    pub fn real(lo: f64, hi: f64) -> Rect {
        Rect { re: (lo, hi), im: (0.0, 0.0) }
    }

    fn grow(&self, m: f64) -> Rect {
        Rect { re: (self.re.0 - m, self.re.1 + m), im: (self.im.0 - m, self.im.1 + m) }
    }

    fn contains(&self, v: (f64, f64), complex: bool) -> bool {
        self.re.0 <= v.0 && v.0 <= self.re.1 && (!complex || (self.im.0 <= v.1 && v.1 <= self.im.1))
    }
}

/// Per-place data of a product of two linear forms times a constant.
#[derive(Clone, Debug)]
struct NumericForms {
    complex: Vec<bool>,
    /// `(c, a1, b1, a2, b2)` as complex pairs.
    coef: Vec<[(f64, f64); 5]>,
    /// `σ_i(ω_j)`.
    basis: Vec<Vec<(f64, f64)>>,
    n: usize,
}

impl NumericForms {
    fn new(k: &NumberField, forms: &[(FieldElement, [LinearForm; 2])]) -> NumericForms {
        let r = k.r();
        let n = k.degree();
        let complex = (0..r).map(|i| !k.is_real_place(i)).collect();
        let coef = forms
            .iter()
            .enumerate()
            .map(|(i, (c, [l1, l2]))| {
                let e = |x: &FieldElement| k.embed_f64(x, i);
                [e(c), e(&l1[0]), e(&l1[1]), e(&l2[0]), e(&l2[1])]
            })
            .collect();
        let basis = (0..r).map(|i| (0..n).map(|j| k.embed_f64(&k.basis_element(j), i)).collect()).collect();
        NumericForms { complex, coef, basis, n }
    }

    fn embed_coords(&self, i: usize, a: &[i64]) -> (f64, f64) {
        self.basis[i].iter().zip(a).fold((0.0, 0.0), |acc, (b, &c)| (acc.0 + b.0 * c as f64, acc.1 + b.1 * c as f64))
    }

    fn value(&self, i: usize, x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
        let [c, a1, b1, a2, b2] = self.coef[i];
        let v1 = cadd(cmul(a1, x), cmul(b1, y));
        let v2 = cadd(cmul(a2, x), cmul(b2, y));
        cmul(c, cmul(v1, v2))
    }

    fn values(&self, coords: &[i64]) -> Vec<(f64, f64)> {
        let (a, b) = coords.split_at(self.n);
        (0..self.basis.len())
            .map(|i| self.value(i, self.embed_coords(i, a), self.embed_coords(i, b)))
            .collect()
    }

    fn totally_real(&self) -> bool {
        !self.complex.iter().any(|&c| c)
    }
}

/// Sub-intervals of `[-ylim, ylim]` where `A y² + B y + C ∈ [lo, hi]`.
fn quad_region(a: f64, b: f64, c: f64, lo: f64, hi: f64, ylim: f64) -> Vec<(f64, f64)> {
    let q = |y: f64| a * y * y + b * y + c;
    let mut cuts = vec![-ylim, ylim];
    for t in [lo, hi] {
        let cc = c - t;
        if a != 0.0 {
            let disc = b * b - 4.0 * a * cc;
            if disc >= 0.0 {
                let s = disc.sqrt();
                cuts.push((-b - s) / (2.0 * a));
                cuts.push((-b + s) / (2.0 * a));
            }
        } else if b != 0.0 {
            cuts.push(-cc / b);
        }
    }
    if a != 0.0 {
        cuts.push(-b / (2.0 * a));
    }
    cuts.retain(|x| x.is_finite() && *x >= -ylim && *x <= ylim);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let tol = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
    let inside = |y: f64| {
        let v = q(y);
        v >= lo - tol && v <= hi + tol
    };
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        if inside(0.5 * (l + r)) || (l == r && inside(l)) {
            match out.last_mut() {
                Some(last) if last.1 >= l => last.1 = r,
                _ => out.push((l, r)),
            }
        }
    }
    if out.is_empty() {
        for &x in &cuts {
            if inside(x) {
                out.push((x, x));
            }
        }
    }
    // widen for rounding; callers recheck values
    let pad = 1e-9 * (1.0 + ylim);
    out.into_iter().map(|(l, r)| (l - pad, r + pad)).collect()
}

/// All `z` of height at most `h` with `f(z)` in the product of boxes.
fn values_in_box(nf: &NumericForms, h: i64, boxes: &[Rect]) -> Vec<(Vec<i64>, Vec<(f64, f64)>)> {
    let n = nf.n;
    let r = nf.basis.len();
    if !nf.totally_real() {
        let total = ((2 * h + 1) as u64).pow(2 * n as u32);
        return (0..total)
            .into_par_iter()
            .filter_map(|code| {
                let c = decode(code, 2 * n, h);
                let v = nf.values(&c);
                (0..r).all(|i| boxes[i].contains(v[i], nf.complex[i])).then_some((c, v))
            })
            .collect();
    }
    let e: Vec<Vec<f64>> = (0..r).map(|i| nf.basis[i].iter().map(|b| b.0).collect()).collect();
    let einv = invert_f64(&e);
    let ylim: Vec<f64> = (0..r).map(|i| h as f64 * e[i].iter().map(|x| x.abs()).sum::<f64>() + 1e-9).collect();
    let total = ((2 * h + 1) as u64).pow(n as u32);
    let mut out: Vec<(Vec<i64>, Vec<(f64, f64)>)> = (0..total)
        .into_par_iter()
        .flat_map_iter(|code| {
            let a = decode(code, n, h);
            let mut regions = Vec::with_capacity(r);
            for i in 0..r {
                let x = nf.embed_coords(i, &a).0;
                let [c, a1, b1, a2, b2] = nf.coef[i].map(|p| p.0);
                // c (a1 x + b1 y)(a2 x + b2 y)
                let qa = c * b1 * b2;
                let qb = c * (a1 * b2 + a2 * b1) * x;
                let qc = c * a1 * a2 * x * x;
                let reg = quad_region(qa, qb, qc, boxes[i].re.0, boxes[i].re.1, ylim[i]);
                if reg.is_empty() {
                    return Vec::new().into_iter();
                }
                regions.push(reg);
            }
            let mut found = Vec::new();
            let mut pick = vec![0usize; r];
            loop {
                let iv: Vec<(f64, f64)> = (0..r).map(|i| regions[i][pick[i]]).collect();
                enumerate_beta(&e, &einv, &iv, h, &mut |b: &[i64]| {
                    let mut z = a.clone();
                    z.extend_from_slice(b);
                    let v = nf.values(&z);
                    if (0..r).all(|i| boxes[i].contains(v[i], false)) {
                        found.push((z, v));
                    }
                });
                let mut i = 0;
                while i < r {
                    pick[i] += 1;
                    if pick[i] < regions[i].len() {
                        break;
                    }
                    pick[i] = 0;
                    i += 1;
                }
                if i == r {
                    break;
                }
            }
            found.into_iter()
        })
        .collect();
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out.dedup_by(|x, y| x.0 == y.0);
    out
}

fn invert_f64(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| (i == j) as u8 as f64));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap()).unwrap();
        a.swap(c, p);
        let d = a[c][c];
        for v in a[c].iter_mut() {
            *v /= d;
        }
        for i in 0..n {
            if i != c {
                let f = a[i][c];
                let rc = a[c].clone();
                for (v, w) in a[i].iter_mut().zip(rc) {
                    *v -= f * w;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Integer `b` with `|b_j| ≤ h` and `Σ_j b_j e[i][j] ∈ iv[i]` for each `i`.
fn enumerate_beta(e: &[Vec<f64>], einv: &[Vec<f64>], iv: &[(f64, f64)], h: i64, f: &mut impl FnMut(&[i64])) {
    let n = e.len();
    let range = |j: usize| {
        let (mut lo, mut hi) = (0.0, 0.0);
        for (i, &(l, r)) in iv.iter().enumerate() {
            let c = einv[j][i];
            lo += (c * l).min(c * r);
            hi += (c * l).max(c * r);
        }
        ((lo - 1e-9).ceil().max(-h as f64) as i64, (hi + 1e-9).floor().min(h as f64) as i64)
    };
    let ranges: Vec<(i64, i64)> = (0..n).map(range).collect();
    if ranges.iter().any(|(l, u)| l > u) {
        return;
    }
    let mut b = vec![0i64; n];
    fn rec(
        j: usize,
        b: &mut Vec<i64>,
        ranges: &[(i64, i64)],
        e: &[Vec<f64>],
        iv: &[(f64, f64)],
        f: &mut impl FnMut(&[i64]),
    ) {
        let n = b.len();
        if j == n - 1 {
            let (mut lo, mut hi) = (ranges[j].0 as f64, ranges[j].1 as f64);
            for (i, &(l, r)) in iv.iter().enumerate() {
                let part: f64 = (0..j).map(|t| b[t] as f64 * e[i][t]).sum();
                let c = e[i][j];
                if c.abs() < 1e-300 {
                    if part < l || part > r {
                        return;
                    }
                    continue;
                }
                let (x, y) = ((l - part) / c, (r - part) / c);
                lo = lo.max(x.min(y));
                hi = hi.min(x.max(y));
            }
            let (lo, hi) = ((lo - 1e-9).ceil() as i64, (hi + 1e-9).floor() as i64);
            for v in lo..=hi {
                b[j] = v;
                f(b);
            }
            return;
        }
        for v in ranges[j].0..=ranges[j].1 {
            b[j] = v;
            rec(j + 1, b, ranges, e, iv, f);
        }
    }
    rec(0, &mut b, &ranges, e, iv, f);
}

fn system_numeric(sys: &SplitFormSystem) -> NumericForms {
    let k = &sys.field;
    let forms: Vec<_> = sys.linear_forms.iter().map(|l| (k.one(), l.clone())).collect();
    NumericForms::new(k, &forms)
}

/// Coordinates of every `z` of height at most `h` with `f(z)` in the boxes,
/// with the values, sorted by coordinates.
pub fn scan_box(sys: &SplitFormSystem, h: i64, boxes: &[Rect]) -> Vec<(Vec<i64>, Vec<(f64, f64)>)> {
    values_in_box(&system_numeric(sys), h, boxes)
}

fn sup_dist(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| ((x.0 - y.0).powi(2) + (x.1 - y.1).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

fn grid_points(boxes: &[Rect], complex: &[bool], grid: usize) -> Vec<Vec<(f64, f64)>> {
    if grid == 0 {
        return vec![];
    }
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        if grid == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..grid).map(|t| lo + (hi - lo) * t as f64 / (grid - 1) as f64).collect()
        }
    };
    let mut pts: Vec<Vec<(f64, f64)>> = vec![vec![]];
    for (b, &c) in boxes.iter().zip(complex) {
        let re = axis(b.re.0, b.re.1);
        let im = if c { axis(b.im.0, b.im.1) } else { vec![0.0] };
        let mut next = Vec::new();
        for p in &pts {
            for &x in &re {
                for &y in &im {
                    let mut q = p.clone();
                    q.push((x, y));
                    next.push(q);
                }
            }
        }
        pts = next;
    }
    pts
}

/// Covering radius of `f(O²) ∩ {height ≤ h}` over a grid of the box.
pub fn dispersion(sys: &SplitFormSystem, boxes: &[Rect], h: i64, grid: usize) -> f64 {
    let nf = system_numeric(sys);
    let pts = grid_points(boxes, &nf.complex, grid);
    if pts.is_empty() {
        return 0.0;
    }
    let diam = boxes
        .iter()
        .map(|b| (b.re.1 - b.re.0).max(b.im.1 - b.im.0))
        .fold(0.0, f64::max)
        .max(1e-6);
    let mut margin = 0.25 * diam;
    loop {
        let grown: Vec<Rect> = boxes.iter().map(|b| b.grow(margin)).collect();
        let vals = values_in_box(&nf, h, &grown);
        let disp = pts
            .par_iter()
            .map(|p| vals.iter().map(|(_, v)| sup_dist(p, v)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max);
        if disp <= margin || margin > 64.0 * diam {
            return disp;
        }
        margin *= 2.0;
    }
}

/// Exceptional form `φ(X, Y) = f_0(h (X, Y))` with its sign twist.
#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalForm {
    pub sigma: Sigma,
    pub h: MatK,
    /// Coefficients of `X², XY, Y²`.
    #[serde(serialize_with = "ser_elems")]
    pub coeffs: [FieldElement; 3],
    /// `ε = ((−1)^{σ1}, (−1)^{σ2})`.
    pub signs: [i8; 2],
}

fn ser_elems<S: serde::Serializer, const N: usize>(
    x: &[FieldElement; N],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|e| e.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>()))
}

impl ExceptionalForm {
    pub fn eval(&self, z: &[FieldElement; 2]) -> FieldElement {
        f0(&mat_apply(&self.h, z))
    }

    /// Linear factors `(h00 X + h01 Y, h10 X + h11 Y)`.
    pub fn factors(&self) -> [LinearForm; 2] {
        [
            [self.h.entry(0, 0).clone(), self.h.entry(0, 1).clone()],
            [self.h.entry(1, 0).clone(), self.h.entry(1, 1).clone()],
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalForms {
    pub forms: Vec<ExceptionalForm>,
    /// Representative index for each form; forms whose boundary orbits
    /// are not proven equal keep their own index.
    pub dedup: Vec<usize>,
}

fn require_r2(sys: &SplitFormSystem) -> Result<()> {
    if sys.r() != 2 {
        return Err(Error::HypothesisViolated("needs exactly two places".into()));
    }
    Ok(())
}

pub fn exceptional_forms(sys: &SplitFormSystem) -> Result<ExceptionalForms> {
    require_r2(sys)?;
    let k = &sys.field;
    let orbits = boundary_set(k, &sys.g[0], &sys.g[1])?;
    let forms: Vec<ExceptionalForm> = orbits
        .iter()
        .map(|o| {
            let h = &o.h;
            let (a, b, c, d) = (h.entry(0, 0), h.entry(0, 1), h.entry(1, 0), h.entry(1, 1));
            ExceptionalForm {
                sigma: o.sigma,
                h: h.clone(),
                coeffs: [a * c, &(a * d) + &(b * c), b * d],
                signs: [1 - 2 * o.sigma.0 as i8, 1 - 2 * o.sigma.1 as i8],
            }
        })
        .collect();
    let dm = distinctness_matrix(k, &orbits, &[0, 1], &EqualityConfig::default());
    let dedup = (0..forms.len()).map(|i| (0..=i).find(|&j| dm[i][j].is_equal()).unwrap_or(i)).collect();
    Ok(ExceptionalForms { forms, dedup })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AxisSet {
    #[serde(rename = "R")]
    Real,
    #[serde(rename = "R+")]
    NonNegative,
    #[serde(rename = "R-")]
    NonPositive,
    #[serde(rename = "C")]
    Complex,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxisSide {
    pub class: AxisSet,
    /// `f_i = c · l_{j2}²` on `{l_{j1} = 0}`.
    #[serde(serialize_with = "ser_one")]
    pub c: FieldElement,
    /// `f_i = d · l_{j1}²` on `{l_{j2} = 0}`.
    #[serde(serialize_with = "ser_one")]
    pub d: FieldElement,
}

fn ser_one<S: serde::Serializer>(x: &FieldElement, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.coords().iter().map(|c| c.to_string()))
}

fn coef_matrix(l: &[LinearForm; 2]) -> Vec<Vec<FieldElement>> {
    vec![vec![l[0][0].clone(), l[0][1].clone()], vec![l[1][0].clone(), l[1][1].clone()]]
}

fn axis_side(k: &NumberField, own: &[LinearForm; 2], other: &[LinearForm; 2], place: usize) -> Result<AxisSide> {
    let a = coef_matrix(own);
    let b = coef_matrix(other);
    let det = &(&b[0][0] * &b[1][1]) - &(&b[0][1] * &b[1][0]);
    let di = det.inv()?;
    let binv = [[&b[1][1] * &di, -(&b[0][1] * &di)], [-(&b[1][0] * &di), &b[0][0] * &di]];
    // own = P · other
    let p = |i: usize, j: usize| &(&a[i][0] * &binv[0][j]) + &(&a[i][1] * &binv[1][j]);
    let c = &p(0, 1) * &p(1, 1);
    let d = &p(0, 0) * &p(1, 0);
    assert!(!(c.is_zero() && d.is_zero()), "non-proportional forms have a nonzero axis constant");
    let class = if !k.is_real_place(place) {
        AxisSet::Complex
    } else {
        let sgn = |x: &FieldElement| if x.is_zero() { 0 } else { k.embed_f64(x, place).0.signum() as i32 };
        match (sgn(&c), sgn(&d)) {
            (x, y) if x >= 0 && y >= 0 => AxisSet::NonNegative,
            (x, y) if x <= 0 && y <= 0 => AxisSet::NonPositive,
            _ => AxisSet::Real,
        }
    };
    Ok(AxisSide { class, c, d })
}

/// Classes of `K_1'` and `K_2'` with the constants behind them.
pub fn axis_sets(sys: &SplitFormSystem) -> Result<[AxisSide; 2]> {
    require_r2(sys)?;
    if sys.proportional {
        return Err(Error::MonomialInput);
    }
    let k = &sys.field;
    let l = &sys.linear_forms;
    Ok([axis_side(k, &l[0], &l[1], 0)?, axis_side(k, &l[1], &l[0], 1)?])
}

/// Accumulation not explained by the exceptional forms or the axes.
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub z: Vec<i64>,
    pub z2: Vec<i64>,
    pub value: Vec<f64>,
    pub value2: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub height: i64,
    pub eps: f64,
    pub target_height: i64,
    pub boxes: Vec<Rect>,
    pub values_in_box: usize,
    pub accumulations: usize,
    pub matched_forms: usize,
    pub matched_axes: usize,
    pub violations: Vec<Violation>,
}

type Cell = Vec<i64>;

fn cell_of(v: &[(f64, f64)], eps: f64) -> Cell {
    v.iter().map(|x| (x.0 / eps).floor() as i64).collect()
}

fn neighbors(c: &Cell) -> Vec<Cell> {
    let mut out = vec![vec![]];
    for &x in c {
        let mut next = Vec::with_capacity(out.len() * 3);
        for p in &out {
            for d in -1..=1 {
                let mut q: Vec<i64> = p.clone();
                q.push(x + d);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn hash_points(pts: &[Vec<(f64, f64)>], eps: f64) -> HashMap<Cell, Vec<usize>> {
    let mut m: HashMap<Cell, Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        m.entry(cell_of(p, eps)).or_default().push(i);
    }
    m
}

fn near_any(map: &HashMap<Cell, Vec<usize>>, pts: &[Vec<(f64, f64)>], v: &[(f64, f64)], eps: f64) -> bool {
    neighbors(&cell_of(v, eps))
        .iter()
        .filter_map(|c| map.get(c))
        .flatten()
        .any(|&j| sup_dist(&pts[j], v) < eps)
}

/// Empirical accumulation analysis of `f(O²)` inside an `A*`-box.
pub fn closure_check_r2(sys: &SplitFormSystem, h: i64, eps: f64, boxes: &[Rect], h_target: i64) -> Result<ClosureReport> {
    require_r2(sys)?;
    let k = &sys.field;
    let nf = system_numeric(sys);
    let vals = values_in_box(&nf, h, boxes);
    let pts: Vec<Vec<(f64, f64)>> = vals.iter().map(|(_, v)| v.clone()).collect();
    let map = hash_points(&pts, eps);

    let exact = |c: &[i64]| sys.eval_exact(&split_z(k, c));
    let mut acc = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        for c in neighbors(&cell_of(p, eps)) {
            let Some(list) = map.get(&c) else { continue };
            for &j in list {
                if j <= i || sup_dist(&pts[j], p) >= eps {
                    continue;
                }
                if sup_dist(&pts[j], p) < 1e-9 && exact(&vals[i].0) == exact(&vals[j].0) {
                    continue;
                }
                acc.push((i, j));
            }
        }
    }

    let mut matched_forms = 0;
    let mut matched_axes = 0;
    let mut violations = Vec::new();
    let (target_pts, axes) = if sys.proportional || acc.is_empty() {
        (vec![], None)
    } else {
        let ex = exceptional_forms(sys)?;
        let grown: Vec<Rect> = boxes.iter().map(|b| b.grow(eps)).collect();
        let mut tp = Vec::new();
        for f in &ex.forms {
            let forms: Vec<_> = (0..2)
                .map(|i| (&sys.scale[i] * &k.int(f.signs[i] as i64), f.factors()))
                .collect();
            let tnf = NumericForms::new(k, &forms);
            tp.extend(values_in_box(&tnf, h_target, &grown).into_iter().map(|(_, v)| v));
        }
        (tp, Some(axis_sets(sys)?))
    };
    let tmap = hash_points(&target_pts, eps);
    let on_axis = |v: &[(f64, f64)]| -> bool {
        let Some(ax) = &axes else { return false };
        let fits = |x: (f64, f64), s: AxisSet| match s {
            AxisSet::Real | AxisSet::Complex => true,
            AxisSet::NonNegative => x.0 > -eps,
            AxisSet::NonPositive => x.0 < eps,
        };
        let m0 = v[0].0.hypot(v[0].1);
        let m1 = v[1].0.hypot(v[1].1);
        (m1 < eps && fits(v[0], ax[0].class)) || (m0 < eps && fits(v[1], ax[1].class))
    };
    for &(i, j) in &acc {
        let v = &pts[i];
        if near_any(&tmap, &target_pts, v, eps) || near_any(&tmap, &target_pts, &pts[j], eps) {
            matched_forms += 1;
        } else if on_axis(v) {
            matched_axes += 1;
        } else {
            violations.push(Violation {
                z: vals[i].0.clone(),
                z2: vals[j].0.clone(),
                value: v.iter().map(|x| x.0).collect(),
                value2: pts[j].iter().map(|x| x.0).collect(),
            });
        }
    }
    Ok(ClosureReport {
        height: h,
        eps,
        target_height: h_target,
        boxes: boxes.to_vec(),
        values_in_box: vals.len(),
        accumulations: acc.len(),
        matched_forms,
        matched_axes,
        violations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessStep {
    pub n: u64,
    #[serde(serialize_with = "ser_elems")]
    pub z: [FieldElement; 2],
    pub err: f64,
}

/// `z_n = γ_n w` with `f(z_n) → ε · δ · φ^{(j)}(w)`.
pub fn witness_convergence(sys: &SplitFormSystem, j: usize, w: &[FieldElement; 2], depth: u64) -> Result<Vec<WitnessStep>> {
    require_r2(sys)?;
    let k = &sys.field;
    let spec = sys.orbit_spec()?;
    let pairs = sys.g[0].mul(&sys.g[1].inv()).admissible_pairs();
    let sigma = *pairs.get(j).ok_or(Error::NotAdmissible(j as u8, 0))?;
    let ap = boundary_approach(&spec, sigma, depth)?;
    let phi = f0(&mat_apply(&ap.h, w));
    let signs = [1 - 2 * sigma.0 as i64, 1 - 2 * sigma.1 as i64];
    let target: Vec<FieldElement> = (0..2).map(|i| &(&sys.scale[i] * &k.int(signs[i])) * &phi).collect();
    Ok(ap
        .steps
        .iter()
        .map(|st| {
            let z = mat_apply(&st.gamma, w);
            let vals = sys.eval_exact(&z);
            let err = (0..2)
                .map(|i| {
                    let d = &vals[i] - &target[i];
                    if d.is_zero() {
                        0.0
                    } else {
                        match k.embed(&d, i, 200) {
                            PlaceValue::Real(b) => b.mag(),
                            PlaceValue::Complex(b) => b.mag(),
                        }
                    }
                })
                .fold(0.0, f64::max);
            WitnessStep { n: st.k, z, err }
        })
        .collect())
}
