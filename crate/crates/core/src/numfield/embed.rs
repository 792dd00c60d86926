use std::sync::RwLock;

use num_traits::{Signed, ToPrimitive};

use super::{FieldElement, NumberField};
use crate::scalar::{CBall, Cx, Mp, PlaceValue, RBall, Real};

/// Isolated roots of the defining polynomial, one per place.
#[derive(Clone, Debug)]
pub(crate) struct Isolated {
    pub prec: u32,
    pub roots: Vec<Cx<Mp>>,
    pub radii: Vec<f64>,
}

/// Per-field cache of refined root enclosures.
#[derive(Debug, Default)]
pub struct RootCache {
    inner: RwLock<Option<Isolated>>,
    f64_roots: RwLock<Option<Vec<(f64, f64)>>>,
}

fn horner_mp(c: &[Mp], z: &Cx<Mp>) -> (Cx<Mp>, Cx<Mp>) {
    let p = z.precision();
    let mut v = Cx::real(Mp::zero(p));
    let mut d = Cx::real(Mp::zero(p));
    for a in c.iter().rev() {
        d = d * z.clone() + v.clone();
        v = v * z.clone() + Cx::real(a.clone());
    }
    (v, d)
}

impl NumberField {
    /// Double-precision roots in place order: reals ascending, then one
    /// representative with positive imaginary part per pair, ascending by
    /// real part.
    pub fn roots_f64(&self) -> Vec<(f64, f64)> {
        if let Some(r) = self.root_cache().f64_roots.read().unwrap().as_ref() {
            return r.clone();
        }
        let mut all = self.min_poly().roots_f64();
        let r1 = self.r1();
        all.sort_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
        let mut reals: Vec<(f64, f64)> = all[..r1].iter().map(|z| (z.0, 0.0)).collect();
        reals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cplx: Vec<(f64, f64)> = all[r1..]
            .iter()
            .filter(|z| z.1 > 0.0)
            .cloned()
            .collect();
        cplx.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        reals.extend(cplx);
        *self.root_cache().f64_roots.write().unwrap() = Some(reals.clone());
        reals
    }

    /// Root enclosures with every radius at most `2^-prec`.
    pub(crate) fn isolate(&self, prec: u32) -> Isolated {
        if let Some(iso) = self.root_cache().inner.read().unwrap().as_ref() {
            if iso.prec >= prec {
                return iso.clone();
            }
        }
        let iso = self.refine_roots(prec);
        assert!(self.enclosures_disjoint(&iso), "root enclosures overlap");
        let mut w = self.root_cache().inner.write().unwrap();
        if w.as_ref().is_none_or(|c| c.prec < iso.prec) {
            *w = Some(iso.clone());
        }
        iso
    }

    fn refine_roots(&self, prec: u32) -> Isolated {
        let n = self.degree();
        let wp = prec + 32;
        let coeffs: Vec<Mp> = self
            .min_poly()
            .coeffs()
            .iter()
            .map(|c| Mp::from_ratio(c, wp))
            .collect();
        let start = self.roots_f64();
        let r1 = self.r1();
        let target = 2f64.powi(-(prec as i32));
        let mut roots = Vec::with_capacity(start.len());
        let mut radii = Vec::with_capacity(start.len());
        for (k, &(re, im)) in start.iter().enumerate() {
            let mut z = Cx::new(Mp::from_f64_prec(re, wp), Mp::from_f64_prec(im, wp));
            let mut rad = f64::INFINITY;
            for _ in 0..(wp as usize).max(64) {
                let (v, d) = horner_mp(&coeffs, &z);
                if d.norm_sqr().is_zero() {
                    break;
                }
                let step = v / d;
                if k < r1 {
                    z = Cx::real(z.re.clone() - step.re.clone());
                } else {
                    z = z - step.clone();
                }
                let (v, d) = horner_mp(&coeffs, &z);
                let ratio = (v.abs() / d.abs()).to_f64();
                let round = z.abs().to_f64().max(1.0) * 2f64.powi(-(wp as i32) + 4);
                rad = 2.0 * (n as f64 * ratio + round);
                if rad <= target {
                    break;
                }
            }
            roots.push(z);
            radii.push(rad);
        }
        Isolated { prec, roots, radii }
    }

    /// Every enclosure, together with its conjugate, must be disjoint
    /// from the others so that each contains exactly one root.
    pub(crate) fn enclosures_disjoint(&self, iso: &Isolated) -> bool {
        let mut disks: Vec<(f64, f64, f64)> = Vec::new();
        for (k, z) in iso.roots.iter().enumerate() {
            let (re, im) = (z.re.to_f64(), z.im.to_f64());
            disks.push((re, im, iso.radii[k]));
            if !self.is_real_place(k) {
                disks.push((re, -im, iso.radii[k]));
            }
        }
        disks.iter().enumerate().all(|(a, p)| {
            disks[a + 1..]
                .iter()
                .all(|q| (p.0 - q.0).hypot(p.1 - q.1) > p.2 + q.2)
        })
    }

    /// `σ_i(x)` with error radius at most `2^-prec`. Places are 0-based.
    pub fn embed(&self, x: &FieldElement, i: usize, prec: u32) -> PlaceValue<Mp> {
        assert!(i < self.r(), "place index out of range");
        let real = self.is_real_place(i);
        let mut wp = prec + 16 + self.degree() as u32;
        let target = 2f64.powi(-(prec as i32));
        loop {
            let iso = self.isolate(wp);
            let z = &iso.roots[i];
            let rho = iso.radii[i];
            let coeffs: Vec<Mp> = x.coords.iter().map(|c| Mp::from_ratio(c, wp + 16)).collect();
            let mut v = Cx::real(Mp::zero(wp + 16));
            for a in coeffs.iter().rev() {
                v = v * z.clone() + Cx::real(a.clone());
            }
            let zm = z.abs().to_f64() + rho;
            let mut deriv_bound = 0.0;
            let mut size = 0.0;
            for (k, c) in x.coords.iter().enumerate() {
                let ck = c.abs().to_f64().unwrap_or(f64::MAX);
                size += ck * zm.powi(k as i32);
                if k > 0 {
                    deriv_bound += ck * k as f64 * zm.powi(k as i32 - 1);
                }
            }
            let round = size * (self.degree() as f64 + 2.0) * 2f64.powi(-(wp as i32 + 12));
            let err = deriv_bound * rho + round;
            if err <= target || wp > prec + 4096 {
                return if real {
                    PlaceValue::Real(RBall::new(v.re.with_precision(prec + 16), err))
                } else {
                    PlaceValue::Complex(CBall::new(
                        Cx::new(v.re.with_precision(prec + 16), v.im.with_precision(prec + 16)),
                        err,
                    ))
                };
            }
            let extra = ((err / target).log2().ceil() as u32).max(8);
            wp += extra;
        }
    }

    /// Embedding converted to scalar type `S`, radius widened for the conversion.
    pub fn embed_as<S: Real>(&self, x: &FieldElement, i: usize, prec: u32) -> PlaceValue<S> {
        let conv = |m: &Mp| -> (S, f64) {
            let s = S::from_mp(m);
            let e = (m.to_f64().abs() + f64::MIN_POSITIVE) * s.unit_roundoff();
            (s, e)
        };
        match self.embed(x, i, prec) {
            PlaceValue::Real(b) => {
                let (m, e) = conv(&b.mid);
                PlaceValue::Real(RBall::new(m, b.rad + e))
            }
            PlaceValue::Complex(b) => {
                let (re, e1) = conv(&b.mid.re);
                let (im, e2) = conv(&b.mid.im);
                PlaceValue::Complex(CBall::new(Cx::new(re, im), b.rad + e1 + e2))
            }
        }
    }

    /// All `r` embeddings as an archimedean point.
    pub fn embed_all(&self, x: &FieldElement, prec: u32) -> crate::scalar::ArchPoint<Mp> {
        crate::scalar::ArchPoint {
            coords: (0..self.r()).map(|i| self.embed(x, i, prec)).collect(),
        }
    }

    /// Normalized absolute value `|x|_i`, squared at complex places.
    pub fn abs_val(&self, x: &FieldElement, i: usize, prec: u32) -> RBall<Mp> {
        if x.is_zero() {
            return RBall::exact(Mp::zero(prec));
        }
        self.embed(x, i, prec + 4).normalized_abs()
    }

    /// Double-precision embedding of `x` at place `i`.
    pub fn embed_f64(&self, x: &FieldElement, i: usize) -> (f64, f64) {
        self.embed(x, i, 60).to_f64_pair()
    }

    /// Fast double-precision normalized absolute value.
    pub fn abs_val_f64(&self, x: &FieldElement, i: usize) -> f64 {
        let v = self.embed_f64(x, i);
        if self.is_real_place(i) {
            v.0.abs()
        } else {
            v.0 * v.0 + v.1 * v.1
        }
    }
}
