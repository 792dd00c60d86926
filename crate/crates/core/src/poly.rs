//! Univariate polynomials with rational coefficients, ascending order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::linalg::{self, QMat};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        QPoly::new(c.iter().map(|&x| linalg::q(x)).collect())
    }

    pub fn from_bigints(c: &[BigInt]) -> Self {
        QPoly::new(c.iter().cloned().map(BigRational::from_integer).collect())
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        QPoly::from_ints(&[1])
    }

    pub fn x() -> Self {
        QPoly::from_ints(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        QPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().recip())
    }

    pub fn derivative(&self) -> Self {
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * linalg::q(k as i64))
                .collect(),
        )
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let lc = d.lead();
        let mut qc = vec![BigRational::zero(); r.len() - dd];
        for k in (0..qc.len()).rev() {
            let f = &r[k + dd] / &lc;
            if !f.is_zero() {
                for (j, c) in d.coeffs.iter().enumerate() {
                    r[k + j] -= &f * c;
                }
            }
            qc[k] = f;
        }
        r.truncate(dd);
        (QPoly::new(qc), QPoly::new(r))
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        self.divrem(d).1
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Sylvester matrix resultant.
    pub fn resultant(&self, o: &QPoly) -> BigRational {
        let (Some(m), Some(n)) = (self.degree(), o.degree()) else {
            return BigRational::zero();
        };
        if m == 0 && n == 0 {
            return BigRational::one();
        }
        let size = m + n;
        let mut s: QMat = vec![vec![BigRational::zero(); size]; size];
        for i in 0..n {
            for (j, c) in self.coeffs.iter().rev().enumerate() {
                s[i][i + j] = c.clone();
            }
        }
        for i in 0..m {
            for (j, c) in o.coeffs.iter().rev().enumerate() {
                s[n + i][i + j] = c.clone();
            }
        }
        linalg::det(&s)
    }

    /// Discriminant of a polynomial of degree `n >= 1`.
    pub fn discriminant(&self) -> BigRational {
        let n = self.degree().unwrap_or(0);
        let r = self.resultant(&self.derivative());
        let sign = if (n * (n.saturating_sub(1)) / 2) % 2 == 0 { 1 } else { -1 };
        r * linalg::q(sign) / self.lead()
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == Some(0)
    }

    /// Number of distinct real roots, counted with a Sturm chain.
    pub fn count_real_roots(&self) -> usize {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let k = chain.len();
            let r = chain[k - 2].rem(&chain[k - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(-r);
        }
        let sign_changes = |at_pos: bool| {
            let signs: Vec<i32> = chain
                .iter()
                .filter(|p| !p.is_zero())
                .map(|p| {
                    let s = if p.lead().is_positive() { 1 } else { -1 };
                    let odd = p.degree().unwrap() % 2 == 1;
                    if !at_pos && odd {
                        -s
                    } else {
                        s
                    }
                })
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        sign_changes(false) - sign_changes(true)
    }

    /// Coefficients as `f64`.
    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// All complex roots in double precision, by Aberth iteration.
    pub fn roots_f64(&self) -> Vec<(f64, f64)> {
        let c = self.monic().to_f64();
        let n = c.len() - 1;
        if n == 0 {
            return vec![];
        }
        let bound = 1.0 + c[..n].iter().map(|x| x.abs()).fold(0.0, f64::max);
        let mut z: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
                (0.5 * bound * t.cos(), 0.5 * bound * t.sin())
            })
            .collect();
        let dc: Vec<f64> = (1..=n).map(|k| c[k] * k as f64).collect();
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for i in 0..n {
                let p = horner_c(&c, z[i]);
                let dp = horner_c(&dc, z[i]);
                if p.0 == 0.0 && p.1 == 0.0 {
                    continue;
                }
                let ratio = cdiv(p, dp);
                let mut s = (0.0, 0.0);
                for j in 0..n {
                    if j != i {
                        let d = (z[i].0 - z[j].0, z[i].1 - z[j].1);
                        let inv = cdiv((1.0, 0.0), d);
                        s = (s.0 + inv.0, s.1 + inv.1);
                    }
                }
                let denom = (1.0 - (ratio.0 * s.0 - ratio.1 * s.1), -(ratio.0 * s.1 + ratio.1 * s.0));
                let w = cdiv(ratio, denom);
                z[i] = (z[i].0 - w.0, z[i].1 - w.1);
                moved = moved.max(w.0.hypot(w.1) / (1.0 + z[i].0.hypot(z[i].1)));
            }
            if moved < 1e-17 {
                break;
            }
        }
        z
    }
}

fn horner_c(c: &[f64], z: (f64, f64)) -> (f64, f64) {
    c.iter().rev().fold((0.0, 0.0), |acc, &a| {
        (acc.0 * z.0 - acc.1 * z.1 + a, acc.0 * z.1 + acc.1 * z.0)
    })
}

fn cdiv(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let n = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / n, (a.1 * b.0 - a.0 * b.1) / n)
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut c = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        QPoly::new(c)
    }
}

impl Neg for QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("({c})x"),
                _ => format!("({c})x^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    #[test]
    fn divrem_reconstructs() {
        let a = QPoly::from_ints(&[1, 0, -3, 2, 5]);
        let b = QPoly::from_ints(&[2, 1, 3]);
        let (qt, r) = a.divrem(&b);
        assert_eq!(&(&qt * &b) + &r, a);
        assert!(r.degree() < b.degree());
    }

    #[test]
    fn discriminants() {
        assert_eq!(QPoly::from_ints(&[-2, 0, 1]).discriminant(), q(8));
        assert_eq!(QPoly::from_ints(&[1, 0, 1]).discriminant(), q(-4));
        assert_eq!(QPoly::from_ints(&[-1, -2, 1, 1]).discriminant(), q(49));
    }

    #[test]
    fn sturm_counts() {
        assert_eq!(QPoly::from_ints(&[-2, 0, 1]).count_real_roots(), 2);
        assert_eq!(QPoly::from_ints(&[1, 0, 1]).count_real_roots(), 0);
        assert_eq!(QPoly::from_ints(&[1, -2, 1, -2, 1]).count_real_roots(), 2);
        assert_eq!(QPoly::from_ints(&[1, 1, 1, 1, 1]).count_real_roots(), 0);
    }

    #[test]
    fn aberth_finds_roots() {
        let p = QPoly::from_ints(&[-1, -2, 1, 1]);
        let mut re: Vec<f64> = p.roots_f64().iter().map(|z| z.0).collect();
        re.sort_by(f64::total_cmp);
        let expect = [-1.8019377358048383, -0.4450418679126288, 1.2469796037174670];
        for (a, b) in re.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resultant_of_coprime_linear() {
        let a = QPoly::from_ints(&[-1, 1]);
        let b = QPoly::from_ints(&[-3, 1]);
        assert_eq!(a.resultant(&b), q(-2));
    }
}
