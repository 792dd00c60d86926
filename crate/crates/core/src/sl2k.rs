//! Determinant-one 2×2 matrices over a number field.

use std::fmt;

use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};
use crate::numfield::{FieldElement, NumberField};

/// Pair `(σ1, σ2) ∈ {0,1}²`.
pub type Sigma = (u8, u8);

/// All four pairs in lexicographic order.
pub const ALL_SIGMAS: [Sigma; 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Element of `SL(2, K)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatK {
    e: [[FieldElement; 2]; 2],
}

impl MatK {
    /// Builds a matrix, rejecting determinant other than one.
    pub fn new(a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement) -> Result<MatK> {
        if !(a.same_field(&b) && a.same_field(&c) && a.same_field(&d)) {
            return Err(Error::FieldMismatch);
        }
        let m = MatK { e: [[a, b], [c, d]] };
        if !m.det().is_one() {
            return Err(Error::NotUnimodular);
        }
        Ok(m)
    }

    pub(crate) fn raw(a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement) -> MatK {
        let m = MatK { e: [[a, b], [c, d]] };
        debug_assert!(m.det().is_one());
        m
    }

    pub fn identity(k: &NumberField) -> MatK {
        MatK::raw(k.one(), k.zero(), k.zero(), k.one())
    }

    /// `ω = [[0,1],[−1,0]]`.
    pub fn omega(k: &NumberField) -> MatK {
        MatK::raw(k.zero(), k.one(), k.int(-1), k.zero())
    }

    /// `ω^s` for `s ∈ {0, 1}`.
    pub fn omega_pow(k: &NumberField, s: u8) -> MatK {
        if s == 0 {
            MatK::identity(k)
        } else {
            MatK::omega(k)
        }
    }

    /// `d(u) = diag(u, u⁻¹)`.
    pub fn diag(u: &FieldElement) -> Result<MatK> {
        let inv = u.inv().map_err(|_| Error::ZeroScalar)?;
        Ok(MatK::raw(u.clone(), u.zero_like(), u.zero_like(), inv))
    }

    /// `[[0, u], [−u⁻¹, 0]]`.
    pub fn antidiag(u: &FieldElement) -> Result<MatK> {
        let inv = u.inv().map_err(|_| Error::ZeroScalar)?;
        Ok(MatK::raw(u.zero_like(), u.clone(), -inv, u.zero_like()))
    }

    pub fn lower_unipotent(x: &FieldElement) -> MatK {
        MatK::raw(x.one_like(), x.zero_like(), x.clone(), x.one_like())
    }

    pub fn upper_unipotent(x: &FieldElement) -> MatK {
        MatK::raw(x.one_like(), x.clone(), x.zero_like(), x.one_like())
    }

    pub fn entry(&self, i: usize, j: usize) -> &FieldElement {
        &self.e[i][j]
    }

    pub fn entries(&self) -> &[[FieldElement; 2]; 2] {
        &self.e
    }

    pub fn det(&self) -> FieldElement {
        &(&self.e[0][0] * &self.e[1][1]) - &(&self.e[0][1] * &self.e[1][0])
    }

    pub fn mul(&self, o: &MatK) -> MatK {
        let p = |i: usize, j: usize| &(&self.e[i][0] * &o.e[0][j]) + &(&self.e[i][1] * &o.e[1][j]);
        MatK { e: [[p(0, 0), p(0, 1)], [p(1, 0), p(1, 1)]] }
    }

    /// Inverse via the adjugate.
    pub fn inv(&self) -> MatK {
        let [[a, b], [c, d]] = &self.e;
        MatK { e: [[d.clone(), -b], [-c, a.clone()]] }
    }

    pub fn is_diagonal(&self) -> bool {
        self.e[0][1].is_zero() && self.e[1][0].is_zero()
    }

    pub fn is_antidiagonal(&self) -> bool {
        self.e[0][0].is_zero() && self.e[1][1].is_zero()
    }

    /// Diagonal or antidiagonal, i.e. in the normalizer of the diagonal torus.
    pub fn is_monomial(&self) -> bool {
        self.is_diagonal() || self.is_antidiagonal()
    }

    /// Pairs `σ` with entry `(σ1, σ2)` nonzero, lexicographic order.
    pub fn admissible_pairs(&self) -> Vec<Sigma> {
        ALL_SIGMAS
            .iter()
            .copied()
            .filter(|&(s1, s2)| !self.e[s1 as usize][s2 as usize].is_zero())
            .collect()
    }

    /// Factors `self = b_- · b_+⁻¹` with `b_-` unipotent lower triangular.
    pub fn bruhat_minus_plus(&self) -> Result<(MatK, MatK)> {
        let [[a, b], [c, _]] = &self.e;
        if a.is_zero() {
            return Err(Error::NotInBigCell);
        }
        let ainv = a.inv()?;
        let bm = MatK::lower_unipotent(&(c * &ainv));
        let bp = MatK::raw(ainv, -b, a.zero_like(), a.clone());
        Ok((bm, bp))
    }

    /// All entries integral.
    pub fn in_gamma(&self, k: &NumberField) -> bool {
        self.e.iter().flatten().all(|x| k.is_integral(x))
    }

    /// Conjugate `self⁻¹ · m · self`.
    pub fn conjugate(&self, m: &MatK) -> MatK {
        self.inv().mul(m).mul(self)
    }

    pub fn field_degree(&self) -> usize {
        self.e[0][0].degree()
    }
}

/// `h_σ = b_-⁻¹ ω^{σ1} g1`, checked against `b_+⁻¹ ω^{σ2} g2`.
pub fn boundary_element(k: &NumberField, g1: &MatK, g2: &MatK, sigma: Sigma) -> Result<MatK> {
    let m = g1.mul(&g2.inv());
    if !m.admissible_pairs().contains(&sigma) {
        return Err(Error::NotAdmissible(sigma.0, sigma.1));
    }
    let w1 = MatK::omega_pow(k, sigma.0);
    let w2 = MatK::omega_pow(k, sigma.1);
    let twisted = w1.mul(&m).mul(&w2.inv());
    let (bm, bp) = twisted.bruhat_minus_plus()?;
    let h = bm.inv().mul(&w1).mul(g1);
    let h2 = bp.inv().mul(&w2).mul(g2);
    assert_eq!(h, h2, "boundary element expressions disagree");
    Ok(h)
}

/// Bruhat data `(b_-, b_+)` of `ω^{σ1} g1 g2⁻¹ ω^{−σ2}`.
pub fn boundary_bruhat(k: &NumberField, g1: &MatK, g2: &MatK, sigma: Sigma) -> Result<(MatK, MatK)> {
    let m = g1.mul(&g2.inv());
    if !m.admissible_pairs().contains(&sigma) {
        return Err(Error::NotAdmissible(sigma.0, sigma.1));
    }
    let w1 = MatK::omega_pow(k, sigma.0);
    let w2 = MatK::omega_pow(k, sigma.1);
    w1.mul(&m).mul(&w2.inv()).bruhat_minus_plus()
}

impl fmt::Debug for MatK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MatK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = &self.e;
        write!(f, "[[{a},{b}],[{c},{d}]]")
    }
}

/// Serializes as a nested array of coordinate strings.
impl Serialize for MatK {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Vec<String>>> = self
            .e
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.coords().iter().map(|c| c.to_string()).collect())
                    .collect()
            })
            .collect();
        let mut seq = s.serialize_seq(Some(2))?;
        for r in &rows {
            seq.serialize_element(r)?;
        }
        seq.end()
    }
}
