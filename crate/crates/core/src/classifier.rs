//! Closure classification for locally divergent orbits `D_I π(g)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numfield::{CmCertificate, FieldElement, NumberField, ObstructionPrime};
use crate::sl2k::{boundary_element, MatK, Sigma};
use crate::units::unit_from_exponents;

/// Orbit data: a field, the index set `I` (0-based places) and one
/// component per place.
#[derive(Clone, Debug)]
pub struct OrbitSpec {
    pub field: NumberField,
    pub index_set: Vec<usize>,
    pub components: Vec<MatK>,
}

impl OrbitSpec {
    /// Components at places not listed default to the identity.
    pub fn new(field: &NumberField, index_set: &[usize], given: Vec<(usize, MatK)>) -> Result<OrbitSpec> {
        let r = field.r();
        let set: BTreeSet<usize> = index_set.iter().copied().collect();
        if set.is_empty() {
            return Err(Error::HypothesisViolated("index set must be nonempty".into()));
        }
        if let Some(&bad) = set.iter().find(|&&i| i >= r) {
            return Err(Error::BadPlace(bad));
        }
        let mut components = vec![MatK::identity(field); r];
        for (i, g) in given {
            if i >= r {
                return Err(Error::BadPlace(i));
            }
            if g.field_degree() != field.degree() || !g.entry(0, 0).same_field(&field.one()) {
                return Err(Error::FieldMismatch);
            }
            components[i] = g;
        }
        Ok(OrbitSpec { field: field.clone(), index_set: set.into_iter().collect(), components })
    }

    pub fn component(&self, i: usize) -> &MatK {
        &self.components[i]
    }

    fn in_index(&self) -> impl Iterator<Item = &MatK> {
        self.index_set.iter().map(|&i| &self.components[i])
    }
}

/// Closed torus orbit `T π(h_σ)` in the boundary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryOrbit {
    pub sigma: Sigma,
    pub h: MatK,
    pub parity: u8,
}

/// Outcome of comparing two boundary orbits.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Distinctness {
    Equal {
        #[serde(serialize_with = "ser_elem")]
        u: FieldElement,
        gamma: MatK,
    },
    Distinct {
        reason: String,
    },
    Unknown {
        bound: i64,
    },
}

fn ser_elem<S: serde::Serializer>(x: &FieldElement, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.coords().iter().map(|c| c.to_string()))
}

impl Distinctness {
    pub fn is_equal(&self) -> bool {
        matches!(self, Distinctness::Equal { .. })
    }
    pub fn is_distinct(&self) -> bool {
        matches!(self, Distinctness::Distinct { .. })
    }
    pub fn is_unknown(&self) -> bool {
        matches!(self, Distinctness::Unknown { .. })
    }
}

/// Number of distinct boundary orbits, exact or as an interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum OrbitCount {
    Exact(usize),
    Interval([usize; 2]),
}

/// Supporting evidence attached to a verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    SingleIndex,
    MonomialQuotients,
    NotCm,
    Cm(CmCertificate),
    Reduction { sigma: Sigma },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum ClosureVerdict {
    TorusClosed,
    FiniteBoundary {
        orbits: Vec<BoundaryOrbit>,
        distinctness: Vec<Vec<Distinctness>>,
        s: OrbitCount,
    },
    Dense,
    CMNonHomogeneous,
}

impl ClosureVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            ClosureVerdict::TorusClosed => "TorusClosed",
            ClosureVerdict::FiniteBoundary { .. } => "FiniteBoundary",
            ClosureVerdict::Dense => "Dense",
            ClosureVerdict::CMNonHomogeneous => "CMNonHomogeneous",
        }
    }

    pub fn has_unknown(&self) -> bool {
        match self {
            ClosureVerdict::FiniteBoundary { distinctness, .. } => {
                distinctness.iter().flatten().any(|d| d.is_unknown())
            }
            _ => false,
        }
    }
}

/// Search bounds for [`orbit_equal`].
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EqualityConfig {
    /// Bound on fundamental-unit exponents in the witness search.
    pub unit_bound: i64,
    /// Height bound on non-unit candidates.
    pub height: i64,
    /// Primes for the valuation obstruction; when empty, primes are
    /// derived from the denominators and numerators of the data.
    pub primes: Vec<ObstructionPrime>,
    /// Rational primes allowed in non-unit candidates; derived when empty.
    pub support: Vec<u64>,
}

impl Default for EqualityConfig {
    fn default() -> Self {
        EqualityConfig { unit_bound: 12, height: 10, primes: vec![], support: vec![] }
    }
}

pub fn is_torus_type(spec: &OrbitSpec) -> bool {
    let mut it = spec.in_index();
    let Some(g0) = it.next() else { return true };
    let g0inv = g0.inv();
    it.all(|g| g.mul(&g0inv).is_monomial())
}

/// One boundary orbit per admissible pair of `g1 g2⁻¹`.
pub fn boundary_set(k: &NumberField, g1: &MatK, g2: &MatK) -> Result<Vec<BoundaryOrbit>> {
    let m = g1.mul(&g2.inv());
    if m.is_monomial() {
        return Err(Error::MonomialInput);
    }
    m.admissible_pairs()
        .into_iter()
        .map(|s| {
            Ok(BoundaryOrbit {
                sigma: s,
                h: boundary_element(k, g1, g2, s)?,
                parity: (s.0 + s.1) % 2,
            })
        })
        .collect()
}

fn small_primes(n: &BigInt, out: &mut BTreeSet<u64>) {
    let mut n = n.abs();
    let mut p = 2u64;
    while p <= 10_000 && n > BigInt::one() {
        let bp = BigInt::from(p);
        while n.is_multiple_of(&bp) {
            out.insert(p);
            n /= &bp;
        }
        p += 1;
    }
}

fn data_primes(mats: &[&MatK]) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    for m in mats {
        for x in m.entries().iter().flatten() {
            if x.is_zero() {
                continue;
            }
            small_primes(&x.denominator(), &mut out);
            let nrm = x.norm();
            small_primes(nrm.numer(), &mut out);
            small_primes(nrm.denom(), &mut out);
        }
    }
    out
}

/// Degree-one primes above `ell` plus the rational valuation.
pub fn primes_above(k: &NumberField, ell: u64) -> Vec<ObstructionPrime> {
    let mut v = Vec::new();
    let p = k.min_poly_ints();
    let l = BigInt::from(ell);
    let eval = |x: i64, c: &[BigInt]| c.iter().rev().fold(BigInt::zero(), |a, b| (a * x + b).mod_floor(&l));
    let dp: Vec<BigInt> = p.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    if ell <= 1_000 {
        for x in 0..ell as i64 {
            if eval(x, p).is_zero() && !eval(x, &dp).is_zero() {
                v.push(ObstructionPrime::DegreeOne { ell, root: x });
            }
        }
    }
    v.push(ObstructionPrime::Rational { ell });
    v
}

/// Entries of `h_a⁻¹ N(u) h_b` as `A_ij u + B_ij u⁻¹`.
fn conjugator_terms(a: &MatK, b: &MatK, antidiagonal: bool) -> [[(FieldElement, FieldElement); 2]; 2] {
    let ai = a.inv();
    let t = |i: usize, j: usize| {
        if antidiagonal {
            (ai.entry(i, 0) * b.entry(1, j), -(ai.entry(i, 1) * b.entry(0, j)))
        } else {
            (ai.entry(i, 0) * b.entry(0, j), ai.entry(i, 1) * b.entry(1, j))
        }
    };
    [[t(0, 0), t(0, 1)], [t(1, 0), t(1, 1)]]
}

fn eval_terms(terms: &[[(FieldElement, FieldElement); 2]; 2], u: &FieldElement, uinv: &FieldElement) -> MatK {
    let e = |i: usize, j: usize| &(&terms[i][j].0 * u) + &(&terms[i][j].1 * uinv);
    MatK::raw(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
}

/// Sign condition at the real places of `I`, up to a global sign.
fn signs_agree(k: &NumberField, u: &FieldElement, places: &[usize]) -> bool {
    let signs: Vec<bool> = places
        .iter()
        .filter(|&&i| k.is_real_place(i))
        .map(|&i| k.embed_f64(u, i).0 > 0.0)
        .collect();
    signs.windows(2).all(|w| w[0] == w[1])
}

fn rational_candidates(support: &[u64], height: i64) -> Vec<BigRational> {
    let mut smooth: Vec<i64> = vec![1];
    for &p in support {
        let mut extra = Vec::new();
        for &s in &smooth {
            let mut t = s * p as i64;
            while t <= height {
                extra.push(t);
                t *= p as i64;
            }
        }
        smooth.extend(extra);
    }
    smooth.sort();
    smooth.dedup();
    let mut out = Vec::new();
    for &a in &smooth {
        for &b in &smooth {
            if a.gcd(&b) == 1 && !(a == 1 && b == 1) {
                out.push(BigRational::new(a.into(), b.into()));
            }
        }
    }
    out
}

fn witness_candidates(k: &NumberField, cfg: &EqualityConfig, support: &[u64]) -> Vec<FieldElement> {
    let rank = k.fundamental_units().len();
    let mut units = Vec::new();
    let b = cfg.unit_bound;
    let width = (2 * b + 1) as u64;
    let total = width.saturating_pow(rank as u32).min(2_000_000);
    for code in 0..total {
        let mut e = vec![0i64; rank];
        let mut t = code;
        for v in e.iter_mut() {
            *v = (t % width) as i64 - b;
            t /= width;
        }
        units.push(e);
    }
    units.sort_by_key(|e| (e.iter().map(|x| x.abs()).sum::<i64>(), e.clone()));
    let unit_elems: Vec<FieldElement> = units.par_iter().map(|e| unit_from_exponents(k, e)).collect();
    let mut out: Vec<FieldElement> = Vec::new();
    for u in &unit_elems {
        out.push(u.clone());
        out.push(-u);
    }
    let small_units: Vec<&FieldElement> = unit_elems
        .iter()
        .zip(&units)
        .filter(|(_, e)| e.iter().all(|x| x.abs() <= 2))
        .map(|(u, _)| u)
        .collect();
    let rats = rational_candidates(support, cfg.height);
    for q in &rats {
        let qe = k.rational(q.clone());
        for u in &small_units {
            let x = &qe * u;
            out.push(-&x);
            out.push(x);
        }
    }
    // small integral elements with norm supported on the allowed primes
    let n = k.degree();
    let h = 2i64;
    let width = (2 * h + 1) as u64;
    for code in 0..width.pow(n as u32) {
        let mut c = vec![0i64; n];
        let mut t = code;
        for v in c.iter_mut() {
            *v = (t % width) as i64 - h;
            t /= width;
        }
        let x = k.from_basis_ints(&c);
        if x.is_zero() || x.as_rational().is_some() {
            continue;
        }
        let nrm = x.norm().abs().to_integer();
        let mut rest = nrm.clone();
        for &p in support {
            let bp = BigInt::from(p);
            while rest.is_multiple_of(&bp) {
                rest /= &bp;
            }
        }
        if rest.is_one() && !nrm.is_one() {
            if let Ok(inv) = x.inv() {
                out.push(inv);
            }
            out.push(x);
        }
    }
    out
}

/// Feasible region for one entry `A u + B u⁻¹` in the valuation `w = v(u)`,
/// stored with doubled coordinates so that midpoints stay integral.
enum EntryRegion {
    All,
    AtLeast(i64),
    AtMost(i64),
    Between(i64, i64, i64),
}

impl EntryRegion {
    fn contains(&self, w2: i64) -> bool {
        match *self {
            EntryRegion::All => true,
            EntryRegion::AtLeast(a) => w2 >= a,
            EntryRegion::AtMost(b) => w2 <= b,
            EntryRegion::Between(a, b, mid) => (a <= w2 && w2 <= b) || w2 == mid,
        }
    }

    fn points(&self) -> Vec<i64> {
        match *self {
            EntryRegion::All => vec![],
            EntryRegion::AtLeast(a) => vec![a],
            EntryRegion::AtMost(b) => vec![b],
            EntryRegion::Between(a, b, m) => vec![a, b, m],
        }
    }
}

/// `true` when every `u ∈ K*` leaves some entry non-integral at the prime.
fn valuation_obstructs(
    k: &NumberField,
    terms: &[[(FieldElement, FieldElement); 2]; 2],
    prime: &ObstructionPrime,
) -> Option<bool> {
    let mut regions = Vec::new();
    for row in terms {
        for (a, b) in row {
            let va = if a.is_zero() { None } else { Some(prime.val(k, a).ok()?) };
            let vb = if b.is_zero() { None } else { Some(prime.val(k, b).ok()?) };
            // v(A u) = va + w >= 0, v(B/u) = vb - w >= 0
            regions.push(match (va, vb) {
                (None, None) => EntryRegion::All,
                (Some(a), None) => EntryRegion::AtLeast(-2 * a),
                (None, Some(b)) => EntryRegion::AtMost(2 * b),
                (Some(a), Some(b)) => EntryRegion::Between(-2 * a, 2 * b, b - a),
            });
        }
    }
    let mut cands: Vec<i64> = regions.iter().flat_map(|r| r.points()).collect();
    cands.extend([-1 << 40, 1 << 40]);
    let feasible = cands.iter().any(|&w| regions.iter().all(|r| r.contains(w)));
    Some(!feasible)
}

/// Three-valued comparison of two boundary orbits.
pub fn orbit_equal(
    k: &NumberField,
    a: &BoundaryOrbit,
    b: &BoundaryOrbit,
    places: &[usize],
    cfg: &EqualityConfig,
) -> Distinctness {
    if a.sigma == b.sigma && a.h == b.h {
        return Distinctness::Equal { u: k.one(), gamma: MatK::identity(k) };
    }
    if a.parity != b.parity {
        return Distinctness::Distinct { reason: "parity".into() };
    }
    let antidiagonal = (a.sigma.0 ^ b.sigma.0) == 1;
    let terms = conjugator_terms(&a.h, &b.h, antidiagonal);
    let primes_set = data_primes(&[&a.h, &b.h]);
    let support: Vec<u64> = if cfg.support.is_empty() {
        primes_set.iter().copied().collect()
    } else {
        cfg.support.clone()
    };

    let cands = witness_candidates(k, cfg, &support);
    let found = cands.par_iter().find_first(|u| {
        let Ok(uinv) = u.inv() else { return false };
        signs_agree(k, u, places) && eval_terms(&terms, u, &uinv).in_gamma(k)
    });
    if let Some(u) = found {
        let uinv = u.inv().expect("nonzero candidate");
        return Distinctness::Equal { u: u.clone(), gamma: eval_terms(&terms, u, &uinv) };
    }

    let primes: Vec<ObstructionPrime> = if cfg.primes.is_empty() {
        primes_set.iter().flat_map(|&l| primes_above(k, l)).collect()
    } else {
        cfg.primes.clone()
    };
    for p in &primes {
        if valuation_obstructs(k, &terms, p) == Some(true) {
            return Distinctness::Distinct { reason: format!("valuation at {}", p.ell()) };
        }
    }
    Distinctness::Unknown { bound: cfg.unit_bound }
}

fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max {
            cur[i] = b;
            rec(i + 1, max.max(b + 1), cur, out);
        }
    }
    if n > 0 {
        rec(0, 0, &mut cur, &mut out);
    }
    out
}

/// Range of block counts over partitions consistent with the matrix.
pub fn orbit_count(d: &[Vec<Distinctness>]) -> OrbitCount {
    let n = d.len();
    let mut lo = usize::MAX;
    let mut hi = 0;
    for p in set_partitions(n) {
        let ok = (0..n).all(|i| {
            (0..n).all(|j| match &d[i][j] {
                Distinctness::Equal { .. } => p[i] == p[j],
                Distinctness::Distinct { .. } => p[i] != p[j],
                Distinctness::Unknown { .. } => true,
            })
        });
        if ok {
            let blocks = p.iter().max().map_or(0, |m| m + 1);
            lo = lo.min(blocks);
            hi = hi.max(blocks);
        }
    }
    if lo == hi {
        OrbitCount::Exact(lo)
    } else {
        OrbitCount::Interval([lo.min(hi), hi])
    }
}

/// Pairwise distinctness matrix of a boundary set.
pub fn distinctness_matrix(
    k: &NumberField,
    orbits: &[BoundaryOrbit],
    places: &[usize],
    cfg: &EqualityConfig,
) -> Vec<Vec<Distinctness>> {
    let n = orbits.len();
    let mut m = vec![vec![Distinctness::Unknown { bound: cfg.unit_bound }; n]; n];
    for i in 0..n {
        for j in i..n {
            let d = orbit_equal(k, &orbits[i], &orbits[j], places, cfg);
            let back = match &d {
                Distinctness::Equal { u, gamma } => Distinctness::Equal {
                    u: u.inv().expect("witness is nonzero"),
                    gamma: gamma.inv(),
                },
                other => other.clone(),
            };
            m[i][j] = d;
            m[j][i] = back;
        }
    }
    m
}

/// Verdict together with its certificates.
#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    #[serde(flatten)]
    pub verdict: ClosureVerdict,
    pub certificates: Vec<Certificate>,
}

pub fn classify(spec: &OrbitSpec) -> Classification {
    classify_with(spec, &EqualityConfig::default())
}

pub fn classify_with(spec: &OrbitSpec, cfg: &EqualityConfig) -> Classification {
    let k = &spec.field;
    if spec.index_set.len() == 1 {
        return Classification { verdict: ClosureVerdict::TorusClosed, certificates: vec![Certificate::SingleIndex] };
    }
    if is_torus_type(spec) {
        return Classification {
            verdict: ClosureVerdict::TorusClosed,
            certificates: vec![Certificate::MonomialQuotients],
        };
    }
    if spec.index_set.len() == 2 {
        let (i, j) = (spec.index_set[0], spec.index_set[1]);
        let orbits = boundary_set(k, &spec.components[i], &spec.components[j])
            .expect("non-monomial quotient");
        let distinctness = distinctness_matrix(k, &orbits, &spec.index_set, cfg);
        let s = orbit_count(&distinctness);
        return Classification {
            verdict: ClosureVerdict::FiniteBoundary { orbits, distinctness, s },
            certificates: vec![],
        };
    }
    match k.is_cm() {
        (true, Some(c)) => Classification {
            verdict: ClosureVerdict::CMNonHomogeneous,
            certificates: vec![Certificate::Cm(c)],
        },
        _ => Classification { verdict: ClosureVerdict::Dense, certificates: vec![Certificate::NotCm] },
    }
}

/// One step of the reduction: from `g_1 = … = g_{l-1}` over `I = {0..l-1}`
/// to a point whose first `l-1` components agree and whose continuation
/// `h g_{l+1}⁻¹` is not monomial.
pub fn reduction_step(spec: &OrbitSpec) -> Result<(OrbitSpec, Sigma)> {
    let k = &spec.field;
    let l = spec.index_set.len();
    if l < 2 || spec.index_set != (0..l).collect::<Vec<_>>() || l >= k.r() {
        return Err(Error::HypothesisViolated("reduction needs I = {1..l} with 1 < l < r".into()));
    }
    let g1 = &spec.components[0];
    if spec.components[..l - 1].iter().any(|g| g != g1) {
        return Err(Error::HypothesisViolated("first l-1 components must agree".into()));
    }
    let gl = &spec.components[l - 1];
    let next = &spec.components[l];
    let m = g1.mul(&gl.inv());
    if m.is_monomial() {
        return Err(Error::MonomialInput);
    }
    for s in m.admissible_pairs() {
        let h = boundary_element(k, g1, gl, s)?;
        if !h.mul(&next.inv()).is_monomial() {
            let w1h = MatK::omega_pow(k, s.0).mul(&h);
            let w2h = MatK::omega_pow(k, s.1).mul(&h);
            let mut comps = spec.components.clone();
            for c in comps.iter_mut().take(l - 1) {
                *c = w1h.clone();
            }
            comps[l - 1] = w2h;
            let out = OrbitSpec { field: k.clone(), index_set: spec.index_set.clone(), components: comps };
            return Ok((out, s));
        }
    }
    Err(Error::NoValidPair)
}
