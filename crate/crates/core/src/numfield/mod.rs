//! Number fields given by a monic integer polynomial, with exact element
//! arithmetic, archimedean embeddings and a few arithmetic invariants.

mod cm;
mod element;
mod embed;
mod file;
mod padic;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use cm::CmCertificate;
pub use element::{FieldCore, FieldElement};
pub use embed::RootCache;
pub use file::{parse_field_file, FieldFile};
pub use padic::{DegreeOnePrime, ObstructionPrime};

use crate::error::{Error, Result};
use crate::linalg::{self, QMat};
use crate::poly::QPoly;

/// Signature `(r1, r2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Signature {
    pub r1: usize,
    pub r2: usize,
}

struct FieldData {
    name: String,
    core: Arc<FieldCore>,
    min_poly_int: Vec<BigInt>,
    signature: Signature,
    integral_basis: QMat,
    basis_inv: QMat,
    units: Vec<FieldElement>,
    torsion_order: u64,
    precision_bits: u32,
    roots: RootCache,
}

/// A number field `K = Q(θ)` with its tabulated arithmetic data.
///
/// Cheap to clone; all data sit behind one shared pointer.
#[derive(Clone)]
pub struct NumberField(Arc<FieldData>);

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumberField")
            .field("name", &self.0.name)
            .field("min_poly", &self.0.min_poly_int)
            .field("signature", &self.0.signature)
            .finish()
    }
}

impl PartialEq for NumberField {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || self.0.min_poly_int == o.0.min_poly_int
    }
}

/// Irreducibility of a monic integer polynomial.
///
/// Every monic rational factor has integer coefficients, so candidate
/// factors come from products of numerically computed roots whose
/// coefficients round to integers; each candidate is tested by exact
/// division.
pub fn is_irreducible(p: &QPoly) -> bool {
    let Some(n) = p.degree() else { return false };
    if n <= 1 {
        return n == 1;
    }
    if !p.is_squarefree() {
        return false;
    }
    let roots = p.roots_f64();
    let limit = n / 2;
    let mut stack: Vec<(usize, Vec<(f64, f64)>)> = vec![(0, vec![(1.0, 0.0)])];
    while let Some((start, prod)) = stack.pop() {
        for idx in start..n {
            let z = roots[idx];
            let mut next = vec![(0.0, 0.0); prod.len() + 1];
            for (k, c) in prod.iter().enumerate() {
                next[k + 1].0 += c.0;
                next[k + 1].1 += c.1;
                next[k].0 -= c.0 * z.0 - c.1 * z.1;
                next[k].1 -= c.0 * z.1 + c.1 * z.0;
            }
            let deg = next.len() - 1;
            let near_int = next
                .iter()
                .all(|c| (c.0 - c.0.round()).abs() < 1e-6 && c.1.abs() < 1e-6);
            if near_int {
                let cand: Vec<i64> = next.iter().map(|c| c.0.round() as i64).collect();
                let f = QPoly::from_ints(&cand);
                if p.rem(&f).is_zero() {
                    return false;
                }
            }
            if deg < limit {
                stack.push((idx + 1, next));
            }
        }
    }
    true
}

impl NumberField {
    /// Builds and validates a field.
    ///
    /// `integral_basis` rows are basis elements over the power basis;
    /// `units` must contain `r - 1` elements of norm `±1`.
    pub fn new(
        name: impl Into<String>,
        min_poly: &[BigInt],
        integral_basis: QMat,
        units: Vec<Vec<BigRational>>,
        torsion_order: u64,
        precision_bits: u32,
    ) -> Result<NumberField> {
        let poly = QPoly::from_bigints(min_poly);
        let n = poly
            .degree()
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::InvalidField("polynomial must have degree at least 1".into()))?;
        if !poly.lead().is_one() {
            return Err(Error::InvalidField("polynomial must be monic".into()));
        }
        if !is_irreducible(&poly) {
            return Err(Error::InvalidField("polynomial is reducible over Q".into()));
        }
        let r1 = poly.count_real_roots();
        let signature = Signature { r1, r2: (n - r1) / 2 };
        if integral_basis.len() != n || integral_basis.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidField(format!("integral basis must be {n}x{n}")));
        }
        let basis_inv = linalg::inverse(&integral_basis)
            .ok_or_else(|| Error::InvalidField("integral basis is singular".into()))?;
        if torsion_order == 0 || torsion_order % 2 == 1 {
            return Err(Error::InvalidField("torsion order must be a positive even integer".into()));
        }
        let core = Arc::new(FieldCore::new(poly));
        let units: Vec<FieldElement> = units
            .into_iter()
            .map(|c| {
                if c.len() != n {
                    Err(Error::InvalidField(format!("unit must have {n} coordinates")))
                } else {
                    Ok(FieldElement::from_coords_core(c, core.clone()))
                }
            })
            .collect::<Result<_>>()?;
        let r = signature.r1 + signature.r2;
        if units.len() != r - 1 {
            return Err(Error::InvalidField(format!(
                "expected {} fundamental units, found {}",
                r - 1,
                units.len()
            )));
        }
        for (k, u) in units.iter().enumerate() {
            if u.norm().abs() != BigRational::one() {
                return Err(Error::InvalidField(format!("unit {k} does not have norm ±1")));
            }
        }
        let field = NumberField(Arc::new(FieldData {
            name: name.into(),
            core,
            min_poly_int: min_poly.to_vec(),
            signature,
            integral_basis,
            basis_inv,
            units,
            torsion_order,
            precision_bits: precision_bits.max(64),
            roots: RootCache::default(),
        }));
        field.check_unit_rank()?;
        for u in field.fundamental_units() {
            if !field.is_integral(u) {
                return Err(Error::InvalidField(format!("unit {u} is not integral")));
            }
        }
        Ok(field)
    }

    /// Convenience constructor from small integer data.
    pub fn from_int_data(
        name: &str,
        min_poly: &[i64],
        basis: &[&[(i64, i64)]],
        units: &[&[(i64, i64)]],
        torsion: u64,
    ) -> Result<NumberField> {
        let rat = |rows: &[&[(i64, i64)]]| -> Vec<Vec<BigRational>> {
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&(a, b)| BigRational::new(a.into(), b.into()))
                        .collect()
                })
                .collect()
        };
        let poly: Vec<BigInt> = min_poly.iter().map(|&c| c.into()).collect();
        NumberField::new(name, &poly, rat(basis), rat(units), torsion, 128)
    }

    fn check_unit_rank(&self) -> Result<()> {
        let k = self.0.units.len();
        if k == 0 {
            return Ok(());
        }
        let logs: Vec<Vec<f64>> = self
            .0
            .units
            .iter()
            .map(|u| (0..self.r()).map(|i| self.abs_val_f64(u, i).ln()).collect())
            .collect();
        // drop the last place; the remaining (r-1)x(r-1) block is the regulator matrix
        let mut m: Vec<Vec<f64>> = logs.iter().map(|l| l[..k].to_vec()).collect();
        let mut det = 1.0;
        for c in 0..k {
            let p = (c..k)
                .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
                .unwrap();
            m.swap(c, p);
            let piv = m[c][c];
            det *= piv;
            if piv.abs() < 1e-9 {
                return Err(Error::InvalidField("fundamental units are dependent".into()));
            }
            for r in c + 1..k {
                let f = m[r][c] / piv;
                for j in c..k {
                    m[r][j] -= f * m[c][j];
                }
            }
        }
        if det.abs() < 1e-6 {
            return Err(Error::InvalidField("fundamental units are dependent".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn min_poly(&self) -> &QPoly {
        &self.0.core.min_poly
    }

    pub fn min_poly_ints(&self) -> &[BigInt] {
        &self.0.min_poly_int
    }

    pub fn degree(&self) -> usize {
        self.0.core.n
    }

    pub fn signature(&self) -> Signature {
        self.0.signature
    }

    pub fn r1(&self) -> usize {
        self.0.signature.r1
    }

    /// Number of archimedean places.
    pub fn r(&self) -> usize {
        self.0.signature.r1 + self.0.signature.r2
    }

    pub fn is_real_place(&self, i: usize) -> bool {
        i < self.0.signature.r1
    }

    pub fn integral_basis(&self) -> &QMat {
        &self.0.integral_basis
    }

    pub fn fundamental_units(&self) -> &[FieldElement] {
        &self.0.units
    }

    pub fn torsion_order(&self) -> u64 {
        self.0.torsion_order
    }

    pub fn precision_bits(&self) -> u32 {
        self.0.precision_bits
    }

    pub(crate) fn root_cache(&self) -> &RootCache {
        &self.0.roots
    }

    pub fn element(&self, coords: Vec<BigRational>) -> Result<FieldElement> {
        if coords.len() != self.degree() {
            return Err(Error::InvalidField(format!(
                "element needs {} coordinates, got {}",
                self.degree(),
                coords.len()
            )));
        }
        Ok(FieldElement::from_coords_core(coords, self.0.core.clone()))
    }

    pub fn from_ints(&self, c: &[i64]) -> FieldElement {
        let mut v: Vec<BigRational> = c.iter().map(|&x| linalg::q(x)).collect();
        v.resize(self.degree(), BigRational::zero());
        FieldElement::from_coords_core(v, self.0.core.clone())
    }

    pub fn rational(&self, q: BigRational) -> FieldElement {
        let mut v = vec![BigRational::zero(); self.degree()];
        v[0] = q;
        FieldElement::from_coords_core(v, self.0.core.clone())
    }

    pub fn int(&self, k: i64) -> FieldElement {
        self.rational(linalg::q(k))
    }

    pub fn zero(&self) -> FieldElement {
        self.int(0)
    }

    pub fn one(&self) -> FieldElement {
        self.int(1)
    }

    /// The generator θ.
    pub fn theta(&self) -> FieldElement {
        let mut v = vec![BigRational::zero(); self.degree()];
        if self.degree() == 1 {
            v[0] = -self.min_poly().coeff(0);
        } else {
            v[1] = BigRational::one();
        }
        FieldElement::from_coords_core(v, self.0.core.clone())
    }

    /// The `k`-th integral basis element.
    pub fn basis_element(&self, k: usize) -> FieldElement {
        FieldElement::from_coords_core(self.0.integral_basis[k].clone(), self.0.core.clone())
    }

    /// Element with the given integer coordinates over the integral basis.
    pub fn from_basis_ints(&self, c: &[i64]) -> FieldElement {
        let v: Vec<BigRational> = c.iter().map(|&x| linalg::q(x)).collect();
        let coords = linalg::vec_mat(&v, &self.0.integral_basis);
        FieldElement::from_coords_core(coords, self.0.core.clone())
    }

    /// Coordinates of `x` over the integral basis.
    pub fn basis_coords(&self, x: &FieldElement) -> Vec<BigRational> {
        linalg::vec_mat(&x.coords, &self.0.basis_inv)
    }

    pub fn field_norm(&self, x: &FieldElement) -> BigRational {
        x.norm()
    }

    /// Membership in the ring of integers.
    pub fn is_integral(&self, x: &FieldElement) -> bool {
        self.basis_coords(x).iter().all(|c| c.is_integer())
    }

    pub fn is_unit(&self, x: &FieldElement) -> bool {
        !x.is_zero() && self.is_integral(x) && x.norm().abs().is_one()
    }

    /// Discriminant of the tabulated integral basis.
    pub fn basis_discriminant(&self) -> BigRational {
        let n = self.degree();
        let b: Vec<FieldElement> = (0..n).map(|k| self.basis_element(k)).collect();
        let m: QMat = (0..n)
            .map(|i| (0..n).map(|j| (&b[i] * &b[j]).trace()).collect())
            .collect();
        linalg::det(&m)
    }

    /// Consistency checks on the tabulated data; returns human-readable findings.
    pub fn verify(&self) -> Vec<(String, bool)> {
        let mut out = Vec::new();
        for (k, u) in self.fundamental_units().iter().enumerate() {
            out.push((format!("unit {k} has norm ±1"), u.norm().abs().is_one()));
        }
        for k in 0..self.degree() {
            let b = self.basis_element(k);
            let ok = b.char_poly().coeffs().iter().all(|c| c.is_integer());
            out.push((format!("basis element {k} is integral"), ok));
        }
        let dp = self.min_poly().discriminant();
        let db = self.basis_discriminant();
        let ratio = &dp / &db;
        let square = ratio.is_positive()
            && ratio.is_integer()
            && is_square(ratio.numer());
        out.push(("disc(poly)/disc(basis) is a perfect square".into(), square));
        out.push(("power basis lies in the lattice".into(), self.is_integral(&self.theta())));
        out
    }

    pub fn disc_basis_f64(&self) -> f64 {
        self.basis_discriminant().to_f64().unwrap_or(f64::NAN)
    }
}

fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let s = n.sqrt();
    &(&s * &s) == n
}
