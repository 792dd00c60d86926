use num_bigint::BigInt;
use num_rational::BigRational;

use super::NumberField;
use crate::error::{Error, Result};

/// Parsed contents of a field-definition file.
///
/// ```text
/// # Q(sqrt 5)
/// name: Q(sqrt5)
/// minpoly: -5 0 1
/// basis: 1 0 ; 1/2 1/2
/// units: 1/2 1/2
/// torsion: 2
/// ```
///
/// Matrix-valued keys list rows separated by `;`. `name` is optional.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub name: String,
    pub minpoly: Vec<BigInt>,
    pub basis: Vec<Vec<BigRational>>,
    pub units: Vec<Vec<BigRational>>,
    pub torsion: u64,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub(crate) fn parse_rational(tok: &str) -> Option<BigRational> {
    match tok.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            (b != BigInt::from(0)).then(|| BigRational::new(a, b))
        }
        None => tok.trim().parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

fn parse_rows(body: &str, line: usize) -> Result<Vec<Vec<BigRational>>> {
    if body.trim().is_empty() {
        return Ok(vec![]);
    }
    body.split(';')
        .map(|row| {
            row.split_whitespace()
                .map(|t| parse_rational(t).ok_or_else(|| err(line, format!("bad rational `{t}`"))))
                .collect()
        })
        .collect()
}

/// Parses the text of a field-definition file.
pub fn parse_field_file(text: &str) -> Result<FieldFile> {
    let mut name = None;
    let mut minpoly: Option<(usize, Vec<BigInt>)> = None;
    let mut basis: Option<(usize, Vec<Vec<BigRational>>)> = None;
    let mut units: Option<(usize, Vec<Vec<BigRational>>)> = None;
    let mut torsion = None;
    let mut last = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, body)) = content.split_once(':') else {
            return Err(err(line, "expected `key: value`"));
        };
        let body = body.trim();
        match key.trim() {
            "name" => name = Some(body.to_string()),
            "minpoly" => {
                let c: Vec<BigInt> = body
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| err(line, format!("bad integer `{t}`"))))
                    .collect::<Result<_>>()?;
                if c.len() < 2 {
                    return Err(err(line, "minpoly needs at least two coefficients"));
                }
                if c.last() != Some(&BigInt::from(1)) {
                    return Err(err(line, "minpoly must be monic"));
                }
                minpoly = Some((line, c));
            }
            "basis" => basis = Some((line, parse_rows(body, line)?)),
            "units" => units = Some((line, parse_rows(body, line)?)),
            "torsion" => {
                let w: u64 = body.parse().map_err(|_| err(line, format!("bad torsion `{body}`")))?;
                if w == 0 {
                    return Err(err(line, "torsion must be positive"));
                }
                torsion = Some(w);
            }
            other => return Err(err(line, format!("unknown key `{other}`"))),
        }
    }
    let (_, minpoly) = minpoly.ok_or_else(|| err(last + 1, "missing `minpoly`"))?;
    let n = minpoly.len() - 1;
    let (bline, basis) = basis.ok_or_else(|| err(last + 1, "missing `basis`"))?;
    if basis.len() != n || basis.iter().any(|r| r.len() != n) {
        return Err(err(bline, format!("basis must have {n} rows of {n} rationals")));
    }
    let (uline, units) = units.unwrap_or_default();
    if let Some(bad) = units.iter().find(|u| u.len() != n) {
        return Err(err(uline, format!("unit has {} coordinates, expected {n}", bad.len())));
    }
    let torsion = torsion.ok_or_else(|| err(last + 1, "missing `torsion`"))?;
    Ok(FieldFile { name: name.unwrap_or_default(), minpoly, basis, units, torsion })
}

impl FieldFile {
    pub fn build(&self, precision_bits: u32) -> Result<NumberField> {
        NumberField::new(
            self.name.clone(),
            &self.minpoly,
            self.basis.clone(),
            self.units.clone(),
            self.torsion,
            precision_bits,
        )
    }
}

impl NumberField {
    /// Parses and validates a field-definition file.
    pub fn from_field_file(text: &str, precision_bits: u32) -> Result<NumberField> {
        parse_field_file(text)?.build(precision_bits)
    }
}
