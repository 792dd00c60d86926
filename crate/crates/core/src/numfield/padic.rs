use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{FieldElement, NumberField};
use crate::error::{Error, Result};

/// Prime ideal `(ℓ, θ − root)` of residue degree one, where `root` is a
/// simple root of the defining polynomial modulo `ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeOnePrime {
    pub ell: u64,
    pub root: i64,
}

/// A prime used to obstruct equalities between boundary orbits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObstructionPrime {
    /// A degree-one prime of `K`; applies to every element.
    DegreeOne { ell: u64, root: i64 },
    /// The rational valuation `v_ℓ`; applies to rational elements only,
    /// and agrees in sign with every prime of `K` above `ℓ`.
    Rational { ell: u64 },
}

impl ObstructionPrime {
    pub fn ell(&self) -> u64 {
        match *self {
            ObstructionPrime::DegreeOne { ell, .. } | ObstructionPrime::Rational { ell } => ell,
        }
    }

    pub fn val(&self, field: &NumberField, x: &FieldElement) -> Result<i64> {
        match *self {
            ObstructionPrime::DegreeOne { ell, root } => {
                field.padic_val(x, DegreeOnePrime { ell, root })
            }
            ObstructionPrime::Rational { ell } => {
                let q = x.as_rational().ok_or(Error::NotRational)?;
                rational_val(&q, ell)
            }
        }
    }
}

fn int_val(n: &BigInt, ell: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut v = 0;
    while !n.is_zero() && n.is_multiple_of(ell) {
        n /= ell;
        v += 1;
    }
    v
}

/// `v_ℓ` of a nonzero rational.
pub fn rational_val(q: &BigRational, ell: u64) -> Result<i64> {
    if q.is_zero() {
        return Err(Error::ZeroInput);
    }
    let l = BigInt::from(ell);
    Ok(int_val(q.numer(), &l) - int_val(q.denom(), &l))
}

fn eval_mod(c: &[BigInt], x: &BigInt, m: &BigInt) -> BigInt {
    c.iter().rev().fold(BigInt::zero(), |acc, a| (acc * x + a).mod_floor(m))
}

fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

impl NumberField {
    /// Valuation of `x` at a degree-one prime.
    pub fn padic_val(&self, x: &FieldElement, prime: DegreeOnePrime) -> Result<i64> {
        let ell = BigInt::from(prime.ell);
        let p: Vec<BigInt> = self.min_poly_ints().to_vec();
        let dp: Vec<BigInt> = p
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigInt::from(k))
            .collect();
        let root = BigInt::from(prime.root);
        let simple = eval_mod(&p, &root, &ell).is_zero() && !eval_mod(&dp, &root, &ell).is_zero();
        if prime.ell < 2 || !simple {
            return Err(Error::NotDegreeOne { ell: prime.ell, root: prime.root });
        }
        if x.is_zero() {
            return Err(Error::ZeroInput);
        }
        let d = x.denominator();
        let a: Vec<BigInt> = x
            .coords()
            .iter()
            .map(|c| (c * BigRational::from_integer(d.clone())).to_integer())
            .collect();
        let na = self.min_poly().resultant(&crate::poly::QPoly::from_bigints(&a));
        let prec = int_val(&na.to_integer(), &ell) as u32 + 1;
        let modulus = num_traits::pow(ell.clone(), prec as usize);
        let mut rho = root.mod_floor(&ell);
        let mut cur = 1u32;
        while cur < prec {
            cur = (2 * cur).min(prec);
            let m = num_traits::pow(ell.clone(), cur as usize);
            let f = eval_mod(&p, &rho, &m);
            let df = inv_mod(&eval_mod(&dp, &rho, &m), &m).expect("simple root has unit derivative");
            rho = (&rho - f * df).mod_floor(&m);
        }
        let value = eval_mod(&a, &rho, &modulus);
        let va = if value.is_zero() { prec as i64 } else { int_val(&value, &ell) };
        Ok(va - int_val(&d, &ell))
    }
}
