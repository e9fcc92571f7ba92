//! Problem files: JSON with complex entries as [re, im] pairs.
//!
//! ```json
//! {"p": 1, "mu": 0.5, "A": [[[1, 0]]], "B": [[[0.25, 0]]], "C0": [[[0, 0]]]}
//! ```
//!
//! `mu` may be `{"n": n, "k": k}` for μ = k + n/2, and `{"a123": {"A1", "A2",
//! "A3"}}` may replace A and B. Optional: `W`, `lambda`, `M`, `tol`.

use serde_json::{Map, Value};

use ncho::pencil::mu_from_harmonic;
use ncho::{CMatrix, NchoError, NchoProblem, C64};

const KNOWN_KEYS: [&str; 12] = [
    "p", "mu", "A", "B", "C0", "W", "a123", "lambda", "M", "tol", "name", "description",
];

/// A schema violation, located by a JSON path such as `$.B[1][0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug)]
pub enum ParseError {
    Schema(SchemaError),
    Contract(NchoError),
}

impl From<SchemaError> for ParseError {
    fn from(e: SchemaError) -> Self {
        ParseError::Schema(e)
    }
}

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub problem: NchoProblem,
    pub lambda: Option<C64>,
    pub order: Option<usize>,
    pub tol: Option<f64>,
}

fn complex(v: &Value, path: &str) -> Result<C64, SchemaError> {
    match v {
        Value::Array(pair) if pair.len() == 2 => {
            let re = pair[0].as_f64().ok_or_else(|| schema(format!("{path}[0]"), "expected a number"))?;
            let im = pair[1].as_f64().ok_or_else(|| schema(format!("{path}[1]"), "expected a number"))?;
            Ok(C64::new(re, im))
        }
        Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        _ => Err(schema(path, "expected an [re, im] pair")),
    }
}

fn matrix(v: &Value, p: usize, path: &str) -> Result<CMatrix, SchemaError> {
    let rows = v
        .as_array()
        .ok_or_else(|| schema(path, format!("expected a {p}x{p} array of [re, im] pairs")))?;
    if rows.len() != p {
        return Err(schema(path, format!("expected {p} rows, found {}", rows.len())));
    }
    let mut out = Vec::with_capacity(p);
    for (i, row) in rows.iter().enumerate() {
        let rpath = format!("{path}[{i}]");
        let entries = row.as_array().ok_or_else(|| schema(&rpath, "expected a row array"))?;
        if entries.len() != p {
            return Err(schema(&rpath, format!("expected {p} entries, found {}", entries.len())));
        }
        out.push(
            entries
                .iter()
                .enumerate()
                .map(|(j, e)| complex(e, &format!("{rpath}[{j}]")))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(CMatrix::from_rows(&out))
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, base: &str) -> Result<&'a Value, SchemaError> {
    obj.get(key)
        .ok_or_else(|| schema(format!("{base}.{key}"), "required field is missing"))
}

fn mu_value(v: &Value) -> Result<f64, SchemaError> {
    match v {
        Value::Number(n) => Ok(n.as_f64().unwrap_or(f64::NAN)),
        Value::Object(o) => {
            let int = |key: &str| -> Result<u32, SchemaError> {
                required(o, key, "$.mu")?
                    .as_u64()
                    .and_then(|x| u32::try_from(x).ok())
                    .ok_or_else(|| schema(format!("$.mu.{key}"), "expected a non-negative integer"))
            };
            if let Some(extra) = o.keys().find(|k| *k != "n" && *k != "k") {
                return Err(schema(format!("$.mu.{extra}"), "unknown field"));
            }
            Ok(mu_from_harmonic(int("n")?, int("k")?))
        }
        _ => Err(schema("$.mu", "expected a number or {\"n\", \"k\"}")),
    }
}

/// Validates the JSON text and builds the problem. Schema problems and
/// contract violations (Hermiticity, positivity of μ or W) are kept apart.
pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| schema("$", format!("invalid JSON: {e}")))?;
    let obj = root.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    if let Some(extra) = obj.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(schema(format!("$.{extra}"), "unknown field").into());
    }
    let p = required(obj, "p", "$")?
        .as_u64()
        .filter(|&p| p >= 1)
        .ok_or_else(|| schema("$.p", "expected a positive integer"))? as usize;
    let mu = mu_value(required(obj, "mu", "$")?)?;
    let c0 = matrix(required(obj, "C0", "$")?, p, "$.C0")?;

    let has_ab = obj.contains_key("A") || obj.contains_key("B");
    let (a, b) = match (obj.get("a123"), has_ab) {
        (Some(_), true) => {
            return Err(schema("$.a123", "give either A and B or a123, not both").into());
        }
        (Some(v), false) => {
            let o = v.as_object().ok_or_else(|| schema("$.a123", "expected an object"))?;
            let a1 = matrix(required(o, "A1", "$.a123")?, p, "$.a123.A1")?;
            let a2 = matrix(required(o, "A2", "$.a123")?, p, "$.a123.A2")?;
            let a3 = matrix(required(o, "A3", "$.a123")?, p, "$.a123.A3")?;
            ncho::pencil::ab_from_a123(&a1, &a2, &a3).map_err(ParseError::Contract)?
        }
        (None, _) => {
            if !obj.contains_key("A") && !obj.contains_key("B") {
                return Err(schema("$.B", "required field is missing (or give a123)").into());
            }
            (
                matrix(required(obj, "A", "$")?, p, "$.A")?,
                matrix(required(obj, "B", "$")?, p, "$.B")?,
            )
        }
    };
    let weight = obj.get("W").map(|w| matrix(w, p, "$.W")).transpose()?;
    let lambda = obj.get("lambda").map(|v| complex(v, "$.lambda")).transpose()?;
    let order = obj
        .get("M")
        .map(|v| {
            v.as_u64()
                .filter(|&m| m >= 1)
                .map(|m| m as usize)
                .ok_or_else(|| schema("$.M", "expected a positive integer"))
        })
        .transpose()?;
    let tol = obj
        .get("tol")
        .map(|v| {
            v.as_f64()
                .filter(|t| *t > 0.0)
                .ok_or_else(|| schema("$.tol", "expected a positive number"))
        })
        .transpose()?;

    let problem = match weight {
        Some(w) => NchoProblem::with_weight(mu, a, b, c0, w),
        None => NchoProblem::new(mu, a, b, c0),
    }
    .map_err(ParseError::Contract)?;
    Ok(ProblemFile {
        problem,
        lambda,
        order,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema_path(text: &str) -> String {
        match parse_problem(text) {
            Err(ParseError::Schema(e)) => e.path,
            other => panic!("expected a schema error, got {other:?}"),
        }
    }

    #[test]
    fn scalar_fixture_parses() {
        let f = parse_problem(r#"{"p":1,"mu":0.5,"A":[[[1,0]]],"B":[[[0.25,0]]],"C0":[[[0,0]]]}"#).unwrap();
        assert_eq!(f.problem.p(), 1);
        assert_eq!(f.problem.b()[(0, 0)], C64::new(0.25, 0.0));
    }

    #[test]
    fn harmonic_mu() {
        let text = r#"{"p":1,"mu":{"n":1,"k":0},"A":[[[1,0]]],"B":[[[0,0]]],"C0":[[[0,0]]]}"#;
        assert_eq!(parse_problem(text).unwrap().problem.mu(), 0.5);
    }

    #[test]
    fn schema_errors_carry_paths() {
        assert_eq!(schema_path(r#"{"p":1,"mu":0.5,"A":[[[1,0]]],"C0":[[[0,0]]]}"#), "$.B");
        assert_eq!(schema_path(r#"{"p":1,"mu":0.5,"C0":[[[0,0]]]}"#), "$.B");
        assert_eq!(
            schema_path(r#"{"p":2,"mu":0.5,"A":[[[1,0],[0,0]],[[0,0],[1,0]]],"B":[[[0,0],[0,0]],[[0,0],"x"]],"C0":[[[0,0],[0,0]],[[0,0],[0,0]]]}"#),
            "$.B[1][1]"
        );
        assert_eq!(schema_path(r#"{"p":1,"mu":0.5,"A":[[[1,0]]],"B":[[[0,0]]],"C0":[[[0,0]]],"x":1}"#), "$.x");
    }

    #[test]
    fn non_hermitian_a_is_a_contract_error() {
        let text = r#"{"p":2,"mu":0.5,"A":[[[1,0],[1,0]],[[0,0],[1,0]]],"B":[[[0,0],[0,0]],[[0,0],[0,0]]],"C0":[[[0,0],[0,0]],[[0,0],[0,0]]]}"#;
        assert!(matches!(parse_problem(text), Err(ParseError::Contract(NchoError::Contract(_)))));
    }
}
