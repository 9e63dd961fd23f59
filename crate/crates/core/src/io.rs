//! Input parsing and result rendering for the command-line front end.
//!
//! Numbers in result documents are written with 17 significant digits, so
//! parsing them back recovers the exact `f64`.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::cross::{CaseTag, ProjectionResult, Tolerances};
use crate::linalg::{PairPoint, Vector};
use crate::solvers::Instance;

pub const RESULT_SCHEMA: &str = "crossproj.result/v1";

/// A parse failure with as much location as is known.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{}{message}", Location(self))]
pub struct ParseError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

struct Location<'a>(&'a ParseError);

impl fmt::Display for Location<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.0;
        let mut parts = Vec::new();
        if let Some(l) = e.line {
            parts.push(format!("line {l}"));
        }
        if let Some(c) = e.column {
            parts.push(format!("column {c}"));
        }
        if let Some(name) = &e.field {
            parts.push(format!("field `{name}`"));
        }
        if parts.is_empty() {
            Ok(())
        } else {
            write!(f, "{}: ", parts.join(", "))
        }
    }
}

impl ParseError {
    fn new(message: impl Into<String>) -> Self {
        ParseError {
            line: None,
            column: None,
            field: None,
            message: message.into(),
        }
    }

    fn field(mut self, name: impl Into<String>) -> Self {
        self.field = Some(name.into());
        self
    }

    fn at(mut self, line: usize, column: usize) -> Self {
        self.line = Some(line);
        self.column = Some(column);
        self
    }

    /// Wraps a serde_json error, naming the top-level key that precedes the
    /// failure when one of `keys` can be found.
    fn from_json(text: &str, err: serde_json::Error, keys: &[&str]) -> Self {
        let mut message = err.to_string();
        if let Some(cut) = message.rfind(" at line ") {
            message.truncate(cut);
        }
        let mut out = ParseError::new(message);
        if err.line() > 0 {
            out = out.at(err.line(), err.column());
            if let Some(offset) = offset_of(text, err.line(), err.column()) {
                out.field = keys
                    .iter()
                    .filter_map(|k| {
                        text[..offset]
                            .rfind(&format!("\"{k}\""))
                            .map(|pos| (pos, *k))
                    })
                    .max()
                    .map(|(_, k)| k.to_string());
            }
        }
        out
    }
}

fn offset_of(text: &str, line: usize, column: usize) -> Option<usize> {
    let start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    let offset = start + column;
    (offset <= text.len() && text.is_char_boundary(offset)).then_some(offset)
}

/// 1-based line and column of the first occurrence of `"key"`.
fn locate_key(text: &str, key: &str) -> Option<(usize, usize)> {
    let pos = text.find(&format!("\"{key}\""))?;
    let before = &text[..pos];
    let line = before.matches('\n').count() + 1;
    let column = pos - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    Some((line, column))
}

fn field_error(text: &str, key: &str, message: String) -> ParseError {
    let e = ParseError::new(message).field(key);
    match locate_key(text, key) {
        Some((l, c)) => e.at(l, c),
        None => e,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPointFile {
    dim: usize,
    x0: Vec<f64>,
    y0: Vec<f64>,
}

/// Parses `{"dim": n, "x0": [...], "y0": [...]}`.
pub fn parse_point_file(text: &str) -> Result<(Vector, Vector), ParseError> {
    let raw: RawPointFile = serde_json::from_str(text)
        .map_err(|e| ParseError::from_json(text, e, &["dim", "x0", "y0"]))?;
    if raw.dim == 0 {
        return Err(field_error(
            text,
            "dim",
            "dimension must be positive".into(),
        ));
    }
    let mut out = Vec::with_capacity(2);
    for (name, coords) in [("x0", raw.x0), ("y0", raw.y0)] {
        if coords.len() != raw.dim {
            return Err(field_error(
                text,
                name,
                format!("has {} entries but dim is {}", coords.len(), raw.dim),
            ));
        }
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(field_error(text, name, format!("entry {i} is not finite")));
        }
        out.push(Vector::from_raw(coords));
    }
    let y0 = out.pop().expect("two vectors");
    let x0 = out.pop().expect("two vectors");
    Ok((x0, y0))
}

/// Parses an inline list such as `1,-2.5,3e-4`; `field` names the flag in errors.
pub fn parse_coord_list(text: &str, field: &str) -> Result<Vector, ParseError> {
    let mut coords = Vec::new();
    let mut column = 1;
    for (i, entry) in text.split(',').enumerate() {
        let trimmed = entry.trim();
        let col = column + (entry.len() - entry.trim_start().len());
        let err = |m: String| ParseError::new(m).field(field).at(1, col);
        if trimmed.is_empty() {
            return Err(err(format!("entry {i} is empty")));
        }
        let v: f64 = trimmed
            .parse()
            .map_err(|_| err(format!("entry {i} ({trimmed:?}) is not a number")))?;
        if !v.is_finite() {
            return Err(err(format!("entry {i} ({trimmed:?}) is not finite")));
        }
        coords.push(v);
        column += entry.chars().count() + 1;
    }
    Ok(Vector::from_raw(coords))
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let inst: Instance = serde_json::from_str(text)
        .map_err(|e| ParseError::from_json(text, e, &["problem", "start", "witness"]))?;
    inst.validate()
        .map_err(|e| ParseError::new(e.to_string()))?;
    Ok(inst)
}

pub fn render_instance(inst: &Instance) -> String {
    serde_json::to_string_pretty(inst).expect("instances serialize")
}

/// `v` with 17 significant digits, or `null` if not finite.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

fn num(v: f64) -> Box<RawValue> {
    RawValue::from_string(fmt_f64(v)).expect("formatted float is valid JSON")
}

fn nums(v: &Vector) -> Vec<Box<RawValue>> {
    v.iter().map(|&c| num(c)).collect()
}

#[derive(Serialize)]
struct PointDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    selection: Option<&'static str>,
    x: Vec<Box<RawValue>>,
    y: Vec<Box<RawValue>>,
}

#[derive(Serialize)]
struct TolDoc {
    orth: Box<RawValue>,
    deg: Box<RawValue>,
}

#[derive(Serialize)]
struct InputDoc {
    x0: Vec<Box<RawValue>>,
    y0: Vec<Box<RawValue>>,
}

/// The machine-readable outcome of one projection.
#[derive(Serialize)]
pub struct ResultDocument {
    schema: &'static str,
    library_version: &'static str,
    case: CaseTag,
    set_valued: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<Box<RawValue>>,
    points: Vec<PointDoc>,
    half_dist_sq: Box<RawValue>,
    dist_sq: Box<RawValue>,
    dist: Box<RawValue>,
    tolerances: TolDoc,
    input: InputDoc,
    #[serde(skip)]
    raw: ResultNumbers,
}

struct ResultNumbers {
    lambda: Option<f64>,
    points: Vec<PairPoint>,
    half_dist_sq: f64,
}

impl ResultDocument {
    pub fn new(result: &ProjectionResult, x0: &Vector, y0: &Vector, tols: &Tolerances) -> Self {
        let set_valued = result.family().is_some();
        let labels: &[&'static str] = if set_valued {
            &["keep-y", "keep-x"]
        } else {
            &[]
        };
        let points: Vec<PairPoint> = result.points().into_iter().cloned().collect();
        let half = result.half_dist_sq();
        ResultDocument {
            schema: RESULT_SCHEMA,
            library_version: crate::VERSION,
            case: result.tag,
            set_valued,
            lambda: result.lambda().map(num),
            points: points
                .iter()
                .enumerate()
                .map(|(i, p)| PointDoc {
                    selection: labels.get(i).copied(),
                    x: nums(p.x()),
                    y: nums(p.y()),
                })
                .collect(),
            half_dist_sq: num(half),
            dist_sq: num(2.0 * half),
            dist: num((2.0 * half).sqrt()),
            tolerances: TolDoc {
                orth: num(tols.orth),
                deg: num(tols.deg),
            },
            input: InputDoc {
                x0: nums(x0),
                y0: nums(y0),
            },
            raw: ResultNumbers {
                lambda: result.lambda(),
                points,
                half_dist_sq: half,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents serialize")
    }

    /// One row per point: `case,lambda,half_dist_sq,dist,x_1..x_n,y_1..y_n`.
    pub fn to_csv(&self) -> String {
        let n = self.raw.points.first().map_or(0, |p| p.dim());
        let mut out = String::from("case,lambda,half_dist_sq,dist");
        for c in ["x", "y"] {
            for i in 1..=n {
                let _ = write!(out, ",{c}_{i}");
            }
        }
        out.push('\n');
        let lambda = self.raw.lambda.map(fmt_f64).unwrap_or_default();
        let dist = fmt_f64((2.0 * self.raw.half_dist_sq).sqrt());
        for p in &self.raw.points {
            let _ = write!(
                out,
                "{},{lambda},{},{dist}",
                self.case,
                fmt_f64(self.raw.half_dist_sq)
            );
            for v in p.x().iter().chain(p.y().iter()) {
                let _ = write!(out, ",{}", fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_plain(&self) -> String {
        let mut out = format!("case: {}\n", self.case);
        if let Some(l) = self.raw.lambda {
            let _ = writeln!(out, "lambda: {l}");
        }
        for p in &self.raw.points {
            let _ = writeln!(out, "point: x = {:?}, y = {:?}", p.x(), p.y());
        }
        let _ = writeln!(out, "half_dist_sq: {}", self.raw.half_dist_sq);
        let _ = writeln!(out, "dist: {}", (2.0 * self.raw.half_dist_sq).sqrt());
        out
    }
}

#[derive(Deserialize)]
struct ParsedPoint {
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Deserialize)]
struct ParsedResult {
    points: Vec<ParsedPoint>,
}

/// The points listed in a JSON result document.
pub fn parse_result_points(text: &str) -> Result<Vec<PairPoint>, ParseError> {
    let doc: ParsedResult =
        serde_json::from_str(text).map_err(|e| ParseError::from_json(text, e, &["points"]))?;
    doc.points
        .into_iter()
        .map(|p| {
            PairPoint::from_slices(&p.x, &p.y)
                .map_err(|e| ParseError::new(e.to_string()).field("points"))
        })
        .collect()
}
