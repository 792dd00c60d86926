//! Job files, literal parsing and field resolution.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use hilbert_orbits::catalog;
use hilbert_orbits::classifier::{EqualityConfig, OrbitSpec};
use hilbert_orbits::numfield::{FieldElement, NumberField};
use hilbert_orbits::qforms::{LinearForm, Rect};
use hilbert_orbits::sl2k::MatK;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::CliError;

/// Contents of a TOML job file. Command-line flags override these.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Builtin field name or path to a field file.
    pub field: Option<String>,
    pub precision_bits: Option<u32>,
    pub height: Option<i64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    #[serde(skip_serializing)]
    pub jobs: Option<usize>,
    /// Places of `I`, 0-based.
    pub index_set: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentLit>,
    /// One literal `[[l11,l12],[l21,l22]]` per place.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forms: Vec<Spanned<String>>,
    /// One rectangle per place.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boxes: Vec<Rect>,
    pub grid: Option<usize>,
    /// Extra heights for a dispersion series.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub heights: Vec<i64>,
    pub target_height: Option<i64>,
    pub flow: Option<FlowConfig>,
    pub equality: Option<EqualityConfig>,
    pub stretch: Option<StretchConfig>,
    /// Number of random samples for `field-check`.
    pub samples: Option<usize>,
    /// Witness check for `closure-check`: `(j, w, depth)`.
    pub witness: Option<WitnessConfig>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentLit {
    pub place: usize,
    pub matrix: Spanned<String>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    Divergence,
    Balance,
    Approach,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub mode: FlowMode,
    pub place: Option<usize>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
    pub sigma: Option<(u8, u8)>,
    pub kmax: Option<u64>,
    /// Balance trajectory `(e^{a t}, e^{b t})`.
    pub ray: Option<(f64, f64)>,
    pub floor: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StretchConfig {
    pub place: usize,
    pub c: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    pub j: usize,
    /// Two field-element literals.
    pub w: [String; 2],
    pub depth: u64,
}

/// Flag values given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub field: Option<String>,
    pub prec: Option<u32>,
    pub height: Option<i64>,
    pub eps: Option<f64>,
    pub out: Option<String>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
}

/// A job file together with its source text, used for line numbers.
pub struct Job {
    pub cfg: JobConfig,
    pub source: String,
    pub dir: PathBuf,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

impl Job {
    pub fn load(path: Option<&Path>, ov: &Overrides) -> Result<Job, CliError> {
        let (source, dir) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (text, dir)
            }
            None => (String::new(), PathBuf::new()),
        };
        let mut cfg: JobConfig = toml::from_str(&source).map_err(|e| {
            let line = e.span().map(|s| line_of(&source, s.start)).unwrap_or(0);
            CliError::Parse(format!("line {line}: {}", e.message()))
        })?;
        if ov.field.is_some() {
            cfg.field.clone_from(&ov.field);
        }
        macro_rules! take {
            ($dst:ident, $src:ident) => {
                if ov.$src.is_some() {
                    cfg.$dst = ov.$src.clone();
                }
            };
        }
        take!(precision_bits, prec);
        take!(height, height);
        take!(eps, eps);
        take!(out, out);
        take!(jobs, jobs);
        take!(seed, seed);
        cfg.precision_bits.get_or_insert(128);
        cfg.seed.get_or_insert(0);
        if cfg.precision_bits == Some(0) {
            return Err(CliError::Precondition("precision_bits must be positive".into()));
        }
        if cfg.eps.is_some_and(|e| e <= 0.0) {
            return Err(CliError::Precondition("eps must be positive".into()));
        }
        if cfg.height.is_some_and(|h| h < 0) {
            return Err(CliError::Precondition("height must be nonnegative".into()));
        }
        Ok(Job { cfg, source, dir })
    }

    pub fn line(&self, span: std::ops::Range<usize>) -> usize {
        line_of(&self.source, span.start)
    }

    pub fn prec(&self) -> u32 {
        self.cfg.precision_bits.unwrap_or(128)
    }

    /// Loads the configured field by builtin name or file path.
    pub fn field(&self) -> Result<NumberField, CliError> {
        let name = self
            .cfg
            .field
            .as_deref()
            .ok_or_else(|| CliError::Parse("no field given (use --field or `field = ...`)".into()))?;
        let prec = self.prec();
        if let Some(src) = catalog::source(name) {
            return NumberField::from_field_file(src, prec).map_err(CliError::from);
        }
        let direct = PathBuf::from(name);
        let path = if direct.exists() || direct.is_absolute() { direct } else { self.dir.join(name) };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Io(format!("field file {}: {e}", path.display())))?;
        NumberField::from_field_file(&text, prec).map_err(|e| match e {
            hilbert_orbits::Error::Parse { line, message } => {
                CliError::Parse(format!("{}: line {line}: {message}", path.display()))
            }
            other => CliError::Parse(format!("{}: {other}", path.display())),
        })
    }

    fn matrix(&self, k: &NumberField, lit: &Spanned<String>) -> Result<[[FieldElement; 2]; 2], CliError> {
        let line = self.line(lit.span());
        let rows = parse_matrix(lit.get_ref()).map_err(|m| CliError::Parse(format!("line {line}: {m}")))?;
        let el = |v: &Vec<BigRational>| {
            to_element(k, v).map_err(|m| CliError::Parse(format!("line {line}: {m}")))
        };
        Ok([[el(&rows[0][0])?, el(&rows[0][1])?], [el(&rows[1][0])?, el(&rows[1][1])?]])
    }

    pub fn orbit_spec(&self, k: &NumberField) -> Result<OrbitSpec, CliError> {
        let index_set = self.cfg.index_set.clone().ok_or_else(|| CliError::Parse("missing `index_set`".into()))?;
        let mut given = Vec::with_capacity(self.cfg.components.len());
        for c in &self.cfg.components {
            let [[a, b], [cc, d]] = self.matrix(k, &c.matrix)?;
            let m = MatK::new(a, b, cc, d).map_err(|e| {
                CliError::Precondition(format!("line {}: {e}", self.line(c.matrix.span())))
            })?;
            given.push((c.place, m));
        }
        OrbitSpec::new(k, &index_set, given).map_err(CliError::from)
    }

    pub fn forms(&self, k: &NumberField) -> Result<Vec<[LinearForm; 2]>, CliError> {
        if self.cfg.forms.is_empty() {
            return Err(CliError::Parse("missing `forms`".into()));
        }
        self.cfg
            .forms
            .iter()
            .map(|f| {
                let [[a, b], [c, d]] = self.matrix(k, f)?;
                Ok([[a, b], [c, d]])
            })
            .collect()
    }

    pub fn element(&self, k: &NumberField, lit: &str) -> Result<FieldElement, CliError> {
        let v = parse_entry(lit.trim()).map_err(CliError::Parse)?;
        to_element(k, &v).map_err(CliError::Parse)
    }
}

fn to_element(k: &NumberField, v: &[BigRational]) -> Result<FieldElement, String> {
    let n = k.degree();
    if v.len() > n {
        return Err(format!("entry has {} coordinates but the field has degree {n}", v.len()));
    }
    let mut c = v.to_vec();
    c.resize(n, BigRational::from_integer(0.into()));
    k.element(c).map_err(|e| e.to_string())
}

/// Parses a rational such as `-3`, `1/2` or `0.25`.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty entry".into());
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{frac}", int.trim_start_matches(['-', '+']));
        let num = num_bigint_parse(&digits).ok_or_else(|| format!("bad number `{s}`"))?;
        let den = num_bigint::BigInt::from(10u8).pow(frac.len() as u32);
        let q = BigRational::new(num, den);
        return Ok(if neg { -q } else { q });
    }
    BigRational::from_str(s.trim_start_matches('+')).map_err(|_| format!("bad rational `{s}`"))
}

fn num_bigint_parse(d: &str) -> Option<num_bigint::BigInt> {
    if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    num_bigint::BigInt::from_str(d).ok()
}

/// A bare rational or a coordinate tuple `(q0,q1,...)`.
pub fn parse_entry(s: &str) -> Result<Vec<BigRational>, String> {
    if let Some(inner) = s.strip_prefix('(') {
        let inner = inner.strip_suffix(')').ok_or_else(|| format!("unclosed tuple `{s}`"))?;
        inner.split(',').map(parse_rational).collect()
    } else {
        Ok(vec![parse_rational(s)?])
    }
}

/// Splits on commas at parenthesis depth zero.
fn split_top(s: &str) -> Result<Vec<&str>, String> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => {
                depth -= 1;
                if depth < 0 {
                    return Err("unbalanced brackets".into());
                }
            }
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err("unbalanced brackets".into());
    }
    out.push(&s[start..]);
    Ok(out)
}

fn strip_brackets(s: &str) -> Result<&str, String> {
    let s = s.trim();
    s.strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| format!("expected `[...]`, found `{s}`"))
}

/// Parses `[[a,b],[c,d]]`.
pub fn parse_matrix(s: &str) -> Result<[[Vec<BigRational>; 2]; 2], String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let rows = split_top(strip_brackets(&compact)?)?;
    if rows.len() != 2 {
        return Err(format!("matrix needs 2 rows, found {}", rows.len()));
    }
    let mut parsed = Vec::with_capacity(2);
    for r in rows {
        let cells = split_top(strip_brackets(r)?)?;
        if cells.len() != 2 {
            return Err(format!("matrix row needs 2 entries, found {}", cells.len()));
        }
        parsed.push([parse_entry(cells[0])?, parse_entry(cells[1])?]);
    }
    let mut it = parsed.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_literals() {
        let m = parse_matrix("[[1, 0], [(1/2,-1), 1]]").unwrap();
        assert_eq!(m[1][0].len(), 2);
        assert_eq!(m[1][0][0], BigRational::new(1.into(), 2.into()));
        assert!(parse_matrix("[[1,0],[1]]").is_err());
        assert!(parse_matrix("[[1,0],[x,1]]").is_err());
        assert!(parse_matrix("[[1,0],[(1,2,1]]").is_err());
    }

    #[test]
    fn decimals() {
        assert_eq!(parse_rational("-0.25").unwrap(), BigRational::new((-1).into(), 4.into()));
        assert_eq!(parse_rational("+3/6").unwrap(), BigRational::new(1.into(), 2.into()));
    }
}
