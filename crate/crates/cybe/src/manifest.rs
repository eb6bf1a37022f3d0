//! Manifest parsing. Manifests are JSON; rationals are always `"num/den"`
//! strings (plain integers allowed), exponents and indices are integers
//! (numeric strings accepted). Schema:
//!
//! ```json
//! {
//!   "algebra": {"builtin": "sl", "rank": 2},
//!   "rmatrix": {
//!     "s": [[0, "1"]],
//!     "g": [[0, 0, 1, 1, "1/16"]],
//!     "windows": {"Nx": 6, "Ny": 6}
//!   },
//!   "twist": {"base": 1, "s": [[0, 0, 1, 0, "1"], [0, 0, 0, 1, "-1"]]},
//!   "trace_ext": {"n": 3, "alpha": [[1, "1"]], "K": 6},
//!   "transform": {"psi": [[1, "1"], [2, "1"]], "xi": "1"},
//!   "gauge": {"phi": [[0, [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]]]},
//!   "window": 6
//! }
//! ```
//!
//! `algebra` may instead be `{"custom": {"dim": n, "constants":
//! [[a, b, c, "num/den"], ...]}}` with zero-based indices and the full
//! antisymmetric tensor supplied. An `rmatrix` without `"windows"` is
//! exact; `Nx`/`Ny` cap the regular part `g` and an optional `Ns` caps
//! the scalar part. `trace_ext` may be `{"infinite": true}`.

use num_traits::Zero;
use serde_json::Value;
use thiserror::Error;

use crate::doubles::TraceExtension;
use crate::gauge::GaugeAuto;
use crate::lie::{LieAlgebra, Tensor2};
use crate::normalize::CoordTransform;
use crate::rat::{parse_rat, Rat};
use crate::series::tensor::{StandardRMatrix, Tensor2Series};
use crate::series::{Cap, ScalarSeries};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest is not valid JSON: {0}")]
    Json(String),
    #[error("manifest schema error: {0}")]
    Schema(String),
    #[error("algebra specification invalid: {0}")]
    Algebra(String),
}

type Parsed<T> = Result<T, ManifestError>;

fn schema(msg: impl Into<String>) -> ManifestError {
    ManifestError::Schema(msg.into())
}

fn as_i64(value: &Value, context: &str) -> Parsed<i64> {
    match value {
        Value::Number(n) => n
            .as_i64()
            .ok_or_else(|| schema(format!("{context}: expected integer, got {n}"))),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| schema(format!("{context}: expected integer, got '{s}'"))),
        other => Err(schema(format!("{context}: expected integer, got {other}"))),
    }
}

fn as_usize(value: &Value, context: &str) -> Parsed<usize> {
    let v = as_i64(value, context)?;
    usize::try_from(v).map_err(|_| schema(format!("{context}: expected non-negative integer")))
}

fn as_rat(value: &Value, context: &str) -> Parsed<Rat> {
    match value {
        Value::String(s) => parse_rat(s).map_err(|e| schema(format!("{context}: {e}"))),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(crate::rat::rint(i))
            } else {
                Err(schema(format!(
                    "{context}: floating point values are not accepted, write \"num/den\""
                )))
            }
        }
        other => Err(schema(format!("{context}: expected \"num/den\", got {other}"))),
    }
}

fn as_array<'v>(value: &'v Value, context: &str) -> Parsed<&'v Vec<Value>> {
    value
        .as_array()
        .ok_or_else(|| schema(format!("{context}: expected array")))
}

/// A fully parsed manifest; optional sections stay `None` when absent.
#[derive(Debug)]
pub struct Manifest {
    pub algebra: LieAlgebra,
    pub rmatrix: Option<StandardRMatrix>,
    pub twist: Option<(usize, Tensor2Series)>,
    pub trace_ext: Option<(TraceExtension, i64)>,
    pub transform: Option<CoordTransform>,
    pub gauge: Option<GaugeAuto>,
    pub window: Option<i64>,
}

impl Manifest {
    pub fn parse(text: &str) -> Parsed<Self> {
        let root: Value =
            serde_json::from_str(text).map_err(|e| ManifestError::Json(e.to_string()))?;
        let obj = root
            .as_object()
            .ok_or_else(|| schema("top level must be an object"))?;
        let algebra_spec = obj
            .get("algebra")
            .ok_or_else(|| schema("missing required field 'algebra'"))?;
        let algebra = parse_algebra(algebra_spec)?;
        let rmatrix = obj
            .get("rmatrix")
            .map(|v| parse_rmatrix(v, algebra.dim))
            .transpose()?;
        let twist = obj
            .get("twist")
            .map(|v| parse_twist(v, algebra.dim))
            .transpose()?;
        let trace_ext = obj.get("trace_ext").map(parse_trace_ext).transpose()?;
        let transform = obj.get("transform").map(parse_transform).transpose()?;
        let gauge = obj
            .get("gauge")
            .map(|v| parse_gauge(v, algebra.dim))
            .transpose()?;
        let window = obj
            .get("window")
            .map(|v| as_i64(v, "window"))
            .transpose()?;
        if let Some(w) = window {
            if w < 0 {
                return Err(schema("window must be non-negative"));
            }
        }
        Ok(Manifest {
            algebra,
            rmatrix,
            twist,
            trace_ext,
            transform,
            gauge,
            window,
        })
    }
}

fn parse_algebra(value: &Value) -> Parsed<LieAlgebra> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema("'algebra' must be an object"))?;
    if let Some(builtin) = obj.get("builtin") {
        let name = builtin
            .as_str()
            .ok_or_else(|| schema("'algebra.builtin' must be a string"))?;
        if name != "sl" {
            return Err(ManifestError::Algebra(format!(
                "unknown builtin algebra '{name}' (supported: \"sl\")"
            )));
        }
        let rank = as_usize(
            obj.get("rank")
                .ok_or_else(|| schema("builtin algebra needs 'rank'"))?,
            "algebra.rank",
        )?;
        return LieAlgebra::sl(rank).map_err(|e| ManifestError::Algebra(e.to_string()));
    }
    if let Some(custom) = obj.get("custom") {
        let spec = custom
            .as_object()
            .ok_or_else(|| schema("'algebra.custom' must be an object"))?;
        let dim = as_usize(
            spec.get("dim")
                .ok_or_else(|| schema("custom algebra needs 'dim'"))?,
            "algebra.custom.dim",
        )?;
        let entries = as_array(
            spec.get("constants")
                .ok_or_else(|| schema("custom algebra needs 'constants'"))?,
            "algebra.custom.constants",
        )?;
        let mut list = Vec::with_capacity(entries.len());
        for (idx, entry) in entries.iter().enumerate() {
            let tuple = as_array(entry, "constants entry")?;
            if tuple.len() != 4 {
                return Err(schema(format!(
                    "constants[{idx}] must be [a, b, c, \"num/den\"]"
                )));
            }
            list.push((
                as_usize(&tuple[0], "constant index a")?,
                as_usize(&tuple[1], "constant index b")?,
                as_usize(&tuple[2], "constant index c")?,
                as_rat(&tuple[3], "constant value")?,
            ));
        }
        return LieAlgebra::from_sparse_constants(dim, &list, None)
            .map_err(|e| ManifestError::Algebra(e.to_string()));
    }
    Err(schema("'algebra' needs either 'builtin' or 'custom'"))
}

fn parse_scalar_terms(value: &Value, context: &str) -> Parsed<Vec<(i64, Rat)>> {
    let entries = as_array(value, context)?;
    let mut out = Vec::with_capacity(entries.len());
    for entry in entries {
        let tuple = as_array(entry, context)?;
        if tuple.len() != 2 {
            return Err(schema(format!("{context}: entries are [degree, \"num/den\"]")));
        }
        out.push((
            as_i64(&tuple[0], context)?,
            as_rat(&tuple[1], context)?,
        ));
    }
    Ok(out)
}

fn parse_tensor_entries(value: &Value, dim: usize, context: &str) -> Parsed<Tensor2Series> {
    let entries = as_array(value, context)?;
    let mut series = Tensor2Series::zero();
    for entry in entries {
        let tuple = as_array(entry, context)?;
        if tuple.len() != 5 {
            return Err(schema(format!(
                "{context}: entries are [i, j, a, b, \"num/den\"]"
            )));
        }
        let i = as_i64(&tuple[0], context)?;
        let j = as_i64(&tuple[1], context)?;
        let a = as_usize(&tuple[2], context)?;
        let b = as_usize(&tuple[3], context)?;
        if a >= dim || b >= dim {
            return Err(schema(format!(
                "{context}: basis index out of range for dimension {dim}"
            )));
        }
        let coeff = as_rat(&tuple[4], context)?;
        if !coeff.is_zero() {
            series.add_to((i, j), Tensor2::from_entries([((a, b), coeff)]));
        }
    }
    Ok(series)
}

fn parse_rmatrix(value: &Value, dim: usize) -> Parsed<StandardRMatrix> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema("'rmatrix' must be an object"))?;
    let s_terms = parse_scalar_terms(
        obj.get("s").ok_or_else(|| schema("rmatrix needs 's'"))?,
        "rmatrix.s",
    )?;
    for (degree, _) in &s_terms {
        if *degree < 0 {
            return Err(schema("rmatrix.s must be a Taylor series in y"));
        }
    }
    let mut s = ScalarSeries::from_terms(s_terms);
    let mut g = match obj.get("g") {
        Some(v) => parse_tensor_entries(v, dim, "rmatrix.g")?,
        None => Tensor2Series::zero(),
    };
    if g.x_min().is_some_and(|m| m < 0) || g.y_min().is_some_and(|m| m < 0) {
        return Err(schema("rmatrix.g must be Taylor in both variables"));
    }
    if let Some(windows) = obj.get("windows") {
        let wobj = windows
            .as_object()
            .ok_or_else(|| schema("'rmatrix.windows' must be an object"))?;
        let nx = wobj
            .get("Nx")
            .map(|v| as_i64(v, "windows.Nx"))
            .transpose()?;
        let ny = wobj
            .get("Ny")
            .map(|v| as_i64(v, "windows.Ny"))
            .transpose()?;
        let ns = wobj
            .get("Ns")
            .map(|v| as_i64(v, "windows.Ns"))
            .transpose()?;
        let to_cap = |v: Option<i64>| v.map_or(Cap::Exact, Cap::At);
        g = g.with_caps(to_cap(nx), to_cap(ny));
        if let Some(ns) = ns {
            s = s.with_cap(Cap::At(ns));
        }
    }
    Ok(StandardRMatrix::new(s, g))
}

fn parse_twist(value: &Value, dim: usize) -> Parsed<(usize, Tensor2Series)> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema("'twist' must be an object"))?;
    let base = as_usize(
        obj.get("base")
            .ok_or_else(|| schema("twist needs 'base'"))?,
        "twist.base",
    )?;
    if !(1..=3).contains(&base) {
        return Err(schema("twist.base must be 1, 2 or 3"));
    }
    let s = parse_tensor_entries(
        obj.get("s").ok_or_else(|| schema("twist needs 's'"))?,
        dim,
        "twist.s",
    )?;
    Ok((base, s))
}

fn parse_trace_ext(value: &Value) -> Parsed<(TraceExtension, i64)> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema("'trace_ext' must be an object"))?;
    if obj
        .get("infinite")
        .and_then(Value::as_bool)
        .unwrap_or(false)
    {
        return Ok((TraceExtension::Infinite, 6));
    }
    let n = as_usize(
        obj.get("n").ok_or_else(|| schema("trace_ext needs 'n'"))?,
        "trace_ext.n",
    )?;
    let window = obj
        .get("K")
        .map(|v| as_i64(v, "trace_ext.K"))
        .transpose()?
        .unwrap_or(6);
    let alpha = match obj.get("alpha") {
        Some(v) => parse_scalar_terms(v, "trace_ext.alpha")?,
        None => Vec::new(),
    };
    for (i, _) in &alpha {
        if *i > n as i64 - 2 {
            return Err(schema(format!(
                "trace_ext.alpha index {i} exceeds n-2 = {}",
                n as i64 - 2
            )));
        }
    }
    Ok((TraceExtension::finite(n, alpha, window), window))
}

fn parse_transform(value: &Value) -> Parsed<CoordTransform> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema("'transform' must be an object"))?;
    let psi_terms = parse_scalar_terms(
        obj.get("psi")
            .ok_or_else(|| schema("transform needs 'psi'"))?,
        "transform.psi",
    )?;
    let xi = as_rat(
        obj.get("xi").ok_or_else(|| schema("transform needs 'xi'"))?,
        "transform.xi",
    )?;
    let transform = CoordTransform {
        psi: ScalarSeries::from_terms(psi_terms),
        xi,
    };
    transform
        .validate()
        .map_err(|e| schema(format!("transform invalid: {e}")))?;
    Ok(transform)
}

fn parse_gauge(value: &Value, dim: usize) -> Parsed<GaugeAuto> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema("'gauge' must be an object"))?;
    let layers_spec = as_array(
        obj.get("phi").ok_or_else(|| schema("gauge needs 'phi'"))?,
        "gauge.phi",
    )?;
    let mut layers: Vec<Vec<Vec<Rat>>> = Vec::new();
    for entry in layers_spec {
        let tuple = as_array(entry, "gauge.phi entry")?;
        if tuple.len() != 2 {
            return Err(schema("gauge.phi entries are [k, matrix]"));
        }
        let k = as_usize(&tuple[0], "gauge layer degree")?;
        let rows = as_array(&tuple[1], "gauge layer matrix")?;
        if rows.len() != dim {
            return Err(schema(format!("gauge layer must be {dim}x{dim}")));
        }
        let mut matrix = Vec::with_capacity(dim);
        for row in rows {
            let cells = as_array(row, "gauge layer row")?;
            if cells.len() != dim {
                return Err(schema(format!("gauge layer must be {dim}x{dim}")));
            }
            let mut parsed = Vec::with_capacity(dim);
            for cell in cells {
                parsed.push(as_rat(cell, "gauge layer entry")?);
            }
            matrix.push(parsed);
        }
        while layers.len() <= k {
            layers.push(vec![vec![Rat::zero(); dim]; dim]);
        }
        layers[k] = matrix;
    }
    if layers.is_empty() {
        return Err(schema("gauge.phi must contain at least the constant layer"));
    }
    Ok(GaugeAuto { layers })
}
