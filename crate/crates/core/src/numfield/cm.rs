use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use super::{FieldElement, NumberField};
use crate::scalar::{Cx, Mp, Real};

/// Complex conjugation realised as a field automorphism `θ ↦ c(θ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CmCertificate {
    #[serde(serialize_with = "ser_elem")]
    pub conj_theta: FieldElement,
}

fn ser_elem<S: serde::Serializer>(x: &FieldElement, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(x.coords().iter().map(|c| c.to_string()))
}

fn solve_complex(mut a: Vec<Vec<Cx<Mp>>>, mut b: Vec<Cx<Mp>>) -> Option<Vec<Cx<Mp>>> {
    let n = a.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| {
            a[i][c]
                .norm_sqr()
                .partial_cmp(&a[j][c].norm_sqr())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[p][c].norm_sqr().is_zero() {
            return None;
        }
        a.swap(p, c);
        b.swap(p, c);
        let inv = a[c][c].inv();
        for r in c + 1..n {
            let f = a[r][c].clone() * inv.clone();
            for k in c..n {
                let t = f.clone() * a[c][k].clone();
                a[r][k] = a[r][k].clone() - t;
            }
            let t = f * b[c].clone();
            b[r] = b[r].clone() - t;
        }
    }
    let mut x = vec![b[0].clone(); n];
    for r in (0..n).rev() {
        let mut s = b[r].clone();
        for k in r + 1..n {
            s = s - a[r][k].clone() * x[k].clone();
        }
        x[r] = s / a[r][r].clone();
    }
    Some(x)
}

impl NumberField {
    /// Decides whether `K` is a CM field.
    ///
    /// The automorphism is found numerically by interpolating complex
    /// conjugation on the roots, rounded using the discriminant as a
    /// denominator bound, and then checked exactly.
    pub fn is_cm(&self) -> (bool, Option<CmCertificate>) {
        if self.r1() != 0 {
            return (false, None);
        }
        let n = self.degree();
        let prec = 256u32;
        let iso = self.isolate(prec);
        let mut pts: Vec<Cx<Mp>> = Vec::with_capacity(n);
        for z in &iso.roots {
            pts.push(z.clone());
            pts.push(z.conj());
        }
        let rows: Vec<Vec<Cx<Mp>>> = pts
            .iter()
            .map(|z| {
                let mut row = Vec::with_capacity(n);
                let mut pw = Cx::real(Mp::one(prec));
                for _ in 0..n {
                    row.push(pw.clone());
                    pw = pw * z.clone();
                }
                row
            })
            .collect();
        let rhs: Vec<Cx<Mp>> = pts.iter().map(|z| z.conj()).collect();
        let Some(y) = solve_complex(rows, rhs) else {
            return (false, None);
        };
        let disc = self.min_poly().discriminant().abs().to_integer();
        let dq = Mp::from_bigint(&disc, prec);
        let mut coords = Vec::with_capacity(n);
        for c in &y {
            if c.im.abs().to_f64() > 1e-20 {
                return (false, None);
            }
            let scaled = (c.re.clone() * dq.clone()).to_f64();
            if !scaled.is_finite() || scaled.abs() > 1e15 {
                return (false, None);
            }
            coords.push(BigRational::new(BigInt::from(scaled.round() as i64), disc.clone()));
        }
        let Ok(c) = self.element(coords) else {
            return (false, None);
        };
        let theta = self.theta();
        let p_of_c = self
            .min_poly()
            .coeffs()
            .iter()
            .rev()
            .fold(self.zero(), |acc, a| &(&acc * &c) + &self.rational(a.clone()));
        let involution = c.substitute(&c) == theta;
        let ok = p_of_c.is_zero() && involution && !(&c - &theta).is_zero();
        if !ok {
            return (false, None);
        }
        // the automorphism commutes with conjugation at every place
        for i in 0..self.r() {
            let a = self.embed(&c, i, 64).to_f64_pair();
            let b = self.embed(&theta, i, 64).to_f64_pair();
            if (a.0 - b.0).abs() + (a.1 + b.1).abs() > 1e-12 * (1.0 + b.0.abs() + b.1.abs()) {
                return (false, None);
            }
        }
        (true, Some(CmCertificate { conj_theta: c }))
    }
}

