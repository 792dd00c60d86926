use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, QMat};
use crate::poly::QPoly;

/// Arithmetic core of a field: the defining polynomial and the
/// reduction of `θ^n, …, θ^{2n-2}` onto the power basis.
#[derive(Debug)]
pub struct FieldCore {
    pub(crate) min_poly: QPoly,
    pub(crate) n: usize,
    pub(crate) reduce: Vec<Vec<BigRational>>,
}

impl FieldCore {
    pub(crate) fn new(min_poly: QPoly) -> Self {
        let n = min_poly.degree().expect("nonzero polynomial");
        let mut reduce = Vec::new();
        // θ^n = -(c_0 + … + c_{n-1} θ^{n-1})
        let mut cur: Vec<BigRational> = (0..n).map(|k| -min_poly.coeff(k)).collect();
        for _ in 0..n.saturating_sub(1) {
            reduce.push(cur.clone());
            let top = cur[n - 1].clone();
            let mut next = vec![BigRational::zero(); n];
            for k in (1..n).rev() {
                next[k] = cur[k - 1].clone();
            }
            for k in 0..n {
                next[k] -= &top * min_poly.coeff(k);
            }
            cur = next;
        }
        FieldCore { min_poly, n, reduce }
    }

    fn mul_coords(&self, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let n = self.n;
        let mut full = vec![BigRational::zero(); 2 * n - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    full[i + j] += x * y;
                }
            }
        }
        let mut out: Vec<BigRational> = full[..n].to_vec();
        for (k, c) in full[n..].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, r) in out.iter_mut().zip(&self.reduce[k]) {
                *o += c * r;
            }
        }
        out
    }
}

/// Exact element of a number field, stored over the power basis of θ.
#[derive(Clone)]
pub struct FieldElement {
    pub(crate) coords: Vec<BigRational>,
    pub(crate) core: Arc<FieldCore>,
}

impl FieldElement {
    pub(crate) fn from_coords_core(coords: Vec<BigRational>, core: Arc<FieldCore>) -> Self {
        debug_assert_eq!(coords.len(), core.n);
        FieldElement { coords, core }
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn degree(&self) -> usize {
        self.core.n
    }

    pub fn same_field(&self, o: &FieldElement) -> bool {
        Arc::ptr_eq(&self.core, &o.core) || self.core.min_poly == o.core.min_poly
    }

    fn check(&self, o: &FieldElement) {
        assert!(self.same_field(o), "elements from different fields");
    }

    pub fn rational(&self, q: BigRational) -> FieldElement {
        let mut c = vec![BigRational::zero(); self.core.n];
        c[0] = q;
        FieldElement::from_coords_core(c, self.core.clone())
    }

    pub fn int(&self, k: i64) -> FieldElement {
        self.rational(linalg::q(k))
    }

    pub fn zero_like(&self) -> FieldElement {
        self.int(0)
    }

    pub fn one_like(&self) -> FieldElement {
        self.int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(|c| c.is_zero())
    }

    /// The rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.coords[1..]
            .iter()
            .all(|c| c.is_zero())
            .then(|| self.coords[0].clone())
    }

    pub fn as_poly(&self) -> QPoly {
        QPoly::new(self.coords.clone())
    }

    /// Matrix of multiplication by `self`; column `j` holds `self·θ^j`.
    pub fn mult_matrix(&self) -> QMat {
        let n = self.core.n;
        let mut cols = Vec::with_capacity(n);
        let mut basis = vec![BigRational::zero(); n];
        for j in 0..n {
            basis.iter_mut().for_each(|b| *b = BigRational::zero());
            basis[j] = BigRational::one();
            cols.push(self.core.mul_coords(&self.coords, &basis));
        }
        linalg::transpose(&cols)
    }

    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            return Ok(self.rational(q.recip()));
        }
        let mut e0 = vec![BigRational::zero(); self.core.n];
        e0[0] = BigRational::one();
        let y = linalg::solve(&self.mult_matrix(), &e0).ok_or(Error::DivisionByZero)?;
        Ok(FieldElement::from_coords_core(y, self.core.clone()))
    }

    pub fn checked_div(&self, o: &FieldElement) -> Result<FieldElement> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<FieldElement> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = self.one_like();
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &sq;
            }
            k >>= 1;
            if k > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// `N_{K/Q}(self)` as the resultant of the minimal polynomial with
    /// the coordinate polynomial.
    pub fn norm(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let a = self.as_poly();
        if a.degree() == Some(0) {
            return num_traits::pow(a.lead(), self.core.n);
        }
        self.core.min_poly.resultant(&a)
    }

    pub fn trace(&self) -> BigRational {
        let m = self.mult_matrix();
        (0..self.core.n).fold(BigRational::zero(), |acc, i| acc + &m[i][i])
    }

    /// Characteristic polynomial of multiplication by `self`, monic.
    pub fn char_poly(&self) -> QPoly {
        // Faddeev–LeVerrier
        let n = self.core.n;
        let a = self.mult_matrix();
        let mut c = vec![BigRational::zero(); n + 1];
        c[n] = BigRational::one();
        let mut m = linalg::identity(n);
        for k in 1..=n {
            let am = linalg::mat_mul(&a, &m);
            let tr = (0..n).fold(BigRational::zero(), |acc, i| acc + &am[i][i]);
            c[n - k] = -tr / linalg::q(k as i64);
            m = am;
            for i in 0..n {
                m[i][i] += &c[n - k];
            }
        }
        QPoly::new(c)
    }

    /// Least common denominator of the coordinates.
    pub fn denominator(&self) -> BigInt {
        self.coords
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Largest absolute value of a coordinate numerator or denominator.
    pub fn height(&self) -> BigInt {
        self.coords
            .iter()
            .map(|c| c.numer().abs().max(c.denom().clone()))
            .max()
            .unwrap_or_else(BigInt::one)
    }

    /// Applies the embedding `θ ↦ img` into the same field.
    pub fn substitute(&self, img: &FieldElement) -> FieldElement {
        let mut acc = self.zero_like();
        for c in self.coords.iter().rev() {
            acc = &(&acc * img) + &self.rational(c.clone());
        }
        acc
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, o: &Self) -> bool {
        self.same_field(o) && self.coords == o.coords
    }
}

impl Eq for FieldElement {}

impl std::hash::Hash for FieldElement {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.coords.hash(h);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        self.check(o);
        let c = self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect();
        FieldElement::from_coords_core(c, self.core.clone())
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        self.check(o);
        let c = self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect();
        FieldElement::from_coords_core(c, self.core.clone())
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        self.check(o);
        let c = self.core.mul_coords(&self.coords, &o.coords);
        FieldElement::from_coords_core(c, self.core.clone())
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        let c = self.coords.iter().map(|a| -a).collect();
        FieldElement::from_coords_core(c, self.core.clone())
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: FieldElement) -> FieldElement {
                (&self).$m(&o)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
