//! Input formats.
//!
//! Barcode files hold one `birth death` pair per line; `death` may be
//! `inf`. Hamiltonian files are `key = value` lines with keys `dim`,
//! `expr`, `cutoff` and `compact`. Cloud files hold one phase point per
//! line as `2n` numbers `q1 .. qn p1 .. pn`. In all three, `#` starts a
//! comment and blank lines are ignored.

use std::fmt;
use std::path::Path;

use tamarkin_core::hamexpr::{parse, Expr};
use tamarkin_core::numerics::{PhasePoint, SampleCloud};
use tamarkin_core::{Barcode, Extended, Interval, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub source: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}: {}", self.source, self.message),
            None => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

impl std::error::Error for InputError {}

fn err(source: &str, line: Option<usize>, message: impl Into<String>) -> InputError {
    InputError {
        source: source.to_string(),
        line,
        message: message.into(),
    }
}

pub fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| err(&path.display().to_string(), None, e.to_string()))
}

/// Non-blank lines with comments removed, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn is_inf(token: &str) -> bool {
    matches!(token.to_ascii_lowercase().as_str(), "inf" | "+inf" | "infinity" | "+infinity")
}

/// Parses a barcode file. Decimals are read exactly, so `0.1` is `1/10`.
pub fn parse_barcode(text: &str, source: &str) -> Result<Barcode, InputError> {
    let mut bars = Vec::new();
    for (line, content) in content_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let [birth, death] = tokens.as_slice() else {
            return Err(err(source, Some(line), format!("expected `birth death`, got `{content}`")));
        };
        let birth: Scalar = birth
            .parse()
            .map_err(|_| err(source, Some(line), format!("bad birth `{birth}`")))?;
        let death = if is_inf(death) {
            Extended::Infinite
        } else {
            Extended::Finite(
                death
                    .parse()
                    .map_err(|_| err(source, Some(line), format!("bad death `{death}`")))?,
            )
        };
        bars.push(Interval::new(birth, death).map_err(|e| err(source, Some(line), e.to_string()))?);
    }
    Ok(Barcode::new(bars))
}

/// A Hamiltonian file after validation.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianFile {
    pub dim: usize,
    /// The expression as written.
    pub expr: Expr,
    pub cutoff: Option<f64>,
    pub compact: bool,
}

impl HamiltonianFile {
    /// The Hamiltonian actually used: `expr * bump(|z|²; R²)` with `R` the
    /// cutoff, or `expr` itself when it is declared compactly supported or
    /// there are no phase variables.
    pub fn effective(&self) -> Result<Expr, InputError> {
        if self.dim == 0 || self.compact {
            return Ok(self.expr.clone());
        }
        let r = self.cutoff.expect("validated on parse");
        let radius2: String = (1..=self.dim)
            .map(|i| format!("q{i}^2 + p{i}^2"))
            .collect::<Vec<_>>()
            .join(" + ");
        let chi = parse(&format!("bump({radius2}; {})", r * r), self.dim)
            .map_err(|e| err("cutoff", None, e.to_string()))?;
        Ok(self.expr.mul(&chi))
    }
}

pub fn parse_hamiltonian(text: &str, source: &str) -> Result<HamiltonianFile, InputError> {
    let mut dim = None;
    let mut expr_text = None;
    let mut cutoff = None;
    let mut compact = false;
    for (line, content) in content_lines(text) {
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(source, Some(line), format!("expected `key = value`, got `{content}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "dim" => {
                dim = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| err(source, Some(line), format!("bad dimension `{value}`")))?,
                )
            }
            "expr" | "expression" => expr_text = Some((line, value.to_string())),
            "cutoff" => {
                let r: f64 = value
                    .parse()
                    .map_err(|_| err(source, Some(line), format!("bad cutoff `{value}`")))?;
                if !(r > 0.0 && r.is_finite()) {
                    return Err(err(source, Some(line), "cutoff must be positive"));
                }
                cutoff = Some(r);
            }
            "compact" => {
                compact = value
                    .parse::<bool>()
                    .map_err(|_| err(source, Some(line), format!("bad flag `{value}`")))?
            }
            other => return Err(err(source, Some(line), format!("unknown key `{other}`"))),
        }
    }
    let dim = dim.ok_or_else(|| err(source, None, "missing `dim`"))?;
    let (line, text) = expr_text.ok_or_else(|| err(source, None, "missing `expr`"))?;
    let expr = parse(&text, dim).map_err(|e| err(source, Some(line), e.to_string()))?;
    if dim > 0 && !compact && cutoff.is_none() {
        return Err(err(source, None, "give `cutoff = R` or assert `compact = true`"));
    }
    Ok(HamiltonianFile {
        dim,
        expr,
        cutoff,
        compact,
    })
}

pub fn parse_cloud(text: &str, source: &str, dim: usize) -> Result<SampleCloud, InputError> {
    if dim == 0 {
        if let Some((line, _)) = content_lines(text).next() {
            return Err(err(source, Some(line), "a zero-dimensional cloud has no coordinates"));
        }
        return Ok(SampleCloud::point_model());
    }
    let mut points = Vec::new();
    for (line, content) in content_lines(text) {
        let values = content
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| err(source, Some(line), format!("bad number `{t}`"))))
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() != 2 * dim {
            return Err(err(
                source,
                Some(line),
                format!("expected {} coordinates, got {}", 2 * dim, values.len()),
            ));
        }
        let point = PhasePoint::new(values[..dim].to_vec(), values[dim..].to_vec())
            .map_err(|e| err(source, Some(line), e.to_string()))?;
        points.push(point);
    }
    SampleCloud::new(points).map_err(|e| err(source, None, e.to_string()))
}
