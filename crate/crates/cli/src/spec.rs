//! JSON operator files (`--spec`).
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "operators": [
//!     { "name": "X", "hermitian": true, "matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]] }
//!   ],
//!   "targets": [{ "operator": "X", "value": [0.3, 0.0] }]
//! }
//! ```
//!
//! Matrix entries are `[re, im]` pairs, rows first. `hermitian` defaults to `true`
//! and is verified; `targets` is optional.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use weakjoint::qlinalg::{CMatrix, Operator};
use weakjoint::C64;

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    name: String,
    #[serde(default = "yes")]
    hermitian: bool,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    operator: String,
    value: [f64; 2],
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    dimension: usize,
    operators: Vec<RawOperator>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    targets: Vec<RawTarget>,
}

#[derive(Clone, Debug)]
pub struct NamedOperator {
    pub name: String,
    pub operator: Operator,
}

#[derive(Clone, Debug)]
pub struct OperatorSpec {
    pub dimension: usize,
    pub operators: Vec<NamedOperator>,
    pub targets: Vec<(String, C64)>,
}

impl OperatorSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses and validates a spec; `origin` prefixes every diagnostic.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text)
            .map_err(|e| anyhow::anyhow!("{origin}:{}:{}: {e}", e.line(), e.column()))?;
        let d = raw.dimension;
        if d == 0 {
            bail!("{origin}: dimension: must be positive");
        }
        let mut operators: Vec<NamedOperator> = Vec::with_capacity(raw.operators.len());
        for (i, op) in raw.operators.iter().enumerate() {
            let at = format!("{origin}: operators[{i}] ({:?})", op.name);
            if operators.iter().any(|o| o.name == op.name) {
                bail!("{at}: duplicate operator name");
            }
            if op.matrix.len() != d {
                bail!("{at}.matrix: {} rows, expected {d}", op.matrix.len());
            }
            if let Some((r, row)) = op.matrix.iter().enumerate().find(|(_, row)| row.len() != d) {
                bail!("{at}.matrix[{r}]: {} entries, expected {d}", row.len());
            }
            if op.matrix.iter().flatten().flatten().any(|x| !x.is_finite()) {
                bail!("{at}.matrix: entries must be finite");
            }
            let m = CMatrix::from_fn(d, d, |r, c| C64::new(op.matrix[r][c][0], op.matrix[r][c][1]));
            let operator = if op.hermitian {
                Operator::hermitian(m).map_err(|e| anyhow::anyhow!("{at}: marked hermitian but {e}"))?
            } else {
                Operator::new(m).map_err(|e| anyhow::anyhow!("{at}: {e}"))?
            };
            operators.push(NamedOperator { name: op.name.clone(), operator });
        }
        let mut targets = Vec::with_capacity(raw.targets.len());
        for (k, t) in raw.targets.iter().enumerate() {
            if !operators.iter().any(|o| o.name == t.operator) {
                bail!("{origin}: targets[{k}]: unknown operator {:?}", t.operator);
            }
            targets.push((t.operator.clone(), C64::new(t.value[0], t.value[1])));
        }
        Ok(Self { dimension: d, operators, targets })
    }

    pub fn get(&self, name: &str) -> Result<&Operator> {
        self.operators
            .iter()
            .find(|o| o.name == name)
            .map(|o| &o.operator)
            .with_context(|| format!("no operator named {name:?} in spec"))
    }

    /// Operators picked by name, or the first `count` when `names` is empty.
    pub fn select(&self, names: &[String], count: usize) -> Result<Vec<(String, Operator)>> {
        if names.is_empty() {
            if self.operators.len() < count {
                bail!("spec has {} operators, need {count}", self.operators.len());
            }
            return Ok(self.operators[..count].iter().map(|o| (o.name.clone(), o.operator.clone())).collect());
        }
        if names.len() != count {
            bail!("expected {count} operator names, got {}", names.len());
        }
        names.iter().map(|n| Ok((n.clone(), self.get(n)?.clone()))).collect()
    }

    /// Serializes back to the on-disk schema. Numbers print in shortest
    /// round-trip form, so re-parsing reproduces every matrix exactly.
    pub fn to_json(&self) -> String {
        let raw = RawSpec {
            dimension: self.dimension,
            operators: self
                .operators
                .iter()
                .map(|o| {
                    let m = o.operator.matrix();
                    RawOperator {
                        name: o.name.clone(),
                        hermitian: o.operator.is_hermitian(),
                        matrix: (0..self.dimension)
                            .map(|r| (0..self.dimension).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                            .collect(),
                    }
                })
                .collect(),
            targets: self.targets.iter().map(|(n, v)| RawTarget { operator: n.clone(), value: [v.re, v.im] }).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAULI: &str = r#"{"dimension": 2, "operators": [
        {"name": "X", "matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]},
        {"name": "Z", "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}],
        "targets": [{"operator": "X", "value": [0.25, 0]}]}"#;

    #[test]
    fn parses_and_round_trips() {
        let s = OperatorSpec::parse(PAULI, "pauli").unwrap();
        assert_eq!(s.operators.len(), 2);
        assert_eq!(s.targets, vec![("X".to_string(), C64::new(0.25, 0.0))]);
        let again = OperatorSpec::parse(&s.to_json(), "echo").unwrap();
        for (a, b) in s.operators.iter().zip(&again.operators) {
            assert_eq!(a.operator.matrix(), b.operator.matrix());
        }
    }

    #[test]
    fn diagnostics_name_the_field() {
        let short_row = PAULI.replace("[[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]", "[[[1, 0], [0, 0]], [[0, 0]]]");
        let e = OperatorSpec::parse(&short_row, "f.json").unwrap_err().to_string();
        assert!(e.contains("operators[1] (\"Z\").matrix[1]: 1 entries, expected 2"), "{e}");
        let skew = PAULI.replace("[[[0, 0], [1, 0]], [[1, 0], [0, 0]]]", "[[[0, 0], [1, 0]], [[-1, 0], [0, 0]]]");
        let e = OperatorSpec::parse(&skew, "f.json").unwrap_err().to_string();
        assert!(e.contains("operators[0] (\"X\"): marked hermitian"), "{e}");
        let e = OperatorSpec::parse("{\"dimension\": 2,\n \"operators\": 3}", "f.json").unwrap_err().to_string();
        assert!(e.starts_with("f.json:2:"), "{e}");
        let bad_target = PAULI.replace("\"operator\": \"X\"", "\"operator\": \"Y\"");
        let e = OperatorSpec::parse(&bad_target, "f.json").unwrap_err().to_string();
        assert!(e.contains("targets[0]: unknown operator \"Y\""), "{e}");
    }

    #[test]
    fn selection() {
        let s = OperatorSpec::parse(PAULI, "pauli").unwrap();
        assert_eq!(s.select(&[], 2).unwrap()[1].0, "Z");
        assert!(s.select(&["X".into(), "Q".into()], 2).is_err());
        assert!(s.select(&[], 3).is_err());
    }
}
