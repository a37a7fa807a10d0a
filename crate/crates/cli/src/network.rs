//! Network description files.
//!
//! A JSON document with fields `n`, `Bc`, `Bd` (dense `n x n` arrays, zero
//! meaning no arc) and optional `x0`, `y0`, `k`, `delta`, `margin`, `seed`.
//! Missing initial states are drawn from `[-1, 1]` with the seeded generator.

use std::path::Path;

use serde::{Deserialize, Serialize};
use signet_core::generate::{random_initial_state, Rng};
use signet_core::linalg::Matrix;
use signet_core::sgraph::NetworkPair;
use signet_core::stability::{DEFAULT_DELTA, DEFAULT_MARGIN};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub n: usize,
    #[serde(rename = "Bc")]
    pub bc: Vec<Vec<f64>>,
    #[serde(rename = "Bd")]
    pub bd: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Validated network with all defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub pair: NetworkPair,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub k: Option<f64>,
    pub delta: f64,
    pub margin: f64,
    pub seed: u64,
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("field `{field}`: {msg}"))
}

fn check_dense(name: &str, n: usize, rows: &[Vec<f64>]) -> CliResult<Matrix> {
    if rows.len() != n {
        return Err(field_error(
            name,
            format!("expected {n} rows, found {}", rows.len()),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(field_error(
                name,
                format!("row {} has {} entries, expected {n}", i + 1, row.len()),
            ));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(field_error(
                    name,
                    format!("entry ({}, {}) is not finite", i + 1, j + 1),
                ));
            }
            if i == j && v != 0.0 {
                return Err(field_error(
                    name,
                    format!(
                        "diagonal entry ({}, {}) must be zero, found {v}",
                        i + 1,
                        j + 1
                    ),
                ));
            }
        }
    }
    Ok(Matrix::from_rows(rows))
}

fn check_vector(name: &str, n: usize, v: &[f64]) -> CliResult<()> {
    if v.len() != n {
        return Err(field_error(
            name,
            format!("expected {n} entries, found {}", v.len()),
        ));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(field_error(name, format!("entry {} is not finite", i + 1)));
    }
    Ok(())
}

fn check_positive(name: &str, v: Option<f64>) -> CliResult<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => {
            Err(field_error(name, format!("must be positive, found {x}")))
        }
        _ => Ok(()),
    }
}

impl NetworkFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Input(format!(
                "line {}, column {}: {}",
                e.line(),
                e.column(),
                strip_position(&e.to_string())
            ))
        })
    }

    pub fn validate(self) -> CliResult<Network> {
        let n = self.n;
        if n == 0 {
            return Err(field_error("n", "must be at least 1"));
        }
        let bc = check_dense("Bc", n, &self.bc)?;
        let bd = check_dense("Bd", n, &self.bd)?;
        let pair = NetworkPair::from_dense(&bc, &bd).map_err(|e| CliError::Input(e.to_string()))?;
        check_positive("k", self.k)?;
        check_positive("margin", self.margin)?;
        if let Some(d) = self.delta {
            if !d.is_finite() {
                return Err(field_error("delta", "must be finite"));
            }
        }
        let seed = self.seed.unwrap_or(DEFAULT_SEED);
        let (rx, ry) = random_initial_state(&mut Rng::new(seed), n);
        let x0 = self.x0.unwrap_or(rx);
        let y0 = self.y0.unwrap_or(ry);
        check_vector("x0", n, &x0)?;
        check_vector("y0", n, &y0)?;
        Ok(Network {
            pair,
            x0,
            y0,
            k: self.k,
            delta: self.delta.unwrap_or(DEFAULT_DELTA),
            margin: self.margin.unwrap_or(DEFAULT_MARGIN),
            seed,
        })
    }
}

// serde_json appends " at line L column C"; the position is reported separately
fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}

pub fn parse_network(text: &str) -> CliResult<Network> {
    NetworkFile::parse(text)?.validate()
}

pub fn load_network(path: &Path) -> CliResult<Network> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let net = parse_network(&text)?;
    log::info!("loaded {} with {} agents", path.display(), net.pair.n());
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input_message(r: CliResult<Network>) -> String {
        match r {
            Err(CliError::Input(m)) => m,
            other => panic!("expected an input error, got {other:?}"),
        }
    }

    #[test]
    fn parses_minimal_file() {
        let net =
            parse_network(r#"{"n": 2, "Bc": [[0, 1], [1, 0]], "Bd": [[0, 0], [0, 0]]}"#).unwrap();
        assert_eq!(net.pair.n(), 2);
        assert_eq!(net.delta, 2.0);
        assert_eq!(net.margin, 0.1);
        assert_eq!(net.seed, DEFAULT_SEED);
        assert!(net
            .x0
            .iter()
            .chain(&net.y0)
            .all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn default_state_depends_only_on_seed() {
        let text = r#"{"n": 3, "Bc": [[0,1,0],[0,0,1],[1,0,0]], "Bd": [[0,0,0],[0,0,0],[0,0,0]], "seed": 9}"#;
        assert_eq!(parse_network(text).unwrap(), parse_network(text).unwrap());
    }

    #[test]
    fn diagonal_entry_is_rejected() {
        let m = input_message(parse_network(
            r#"{"n": 2, "Bc": [[1, 1], [1, 0]], "Bd": [[0, 0], [0, 0]]}"#,
        ));
        assert!(m.contains("Bc") && m.contains("diagonal"), "{m}");
    }

    #[test]
    fn shape_errors_name_the_field() {
        let m = input_message(parse_network(
            r#"{"n": 2, "Bc": [[0, 1], [1, 0]], "Bd": [[0, 0]]}"#,
        ));
        assert!(m.contains("Bd") && m.contains("rows"), "{m}");
        let m = input_message(parse_network(
            r#"{"n": 2, "Bc": [[0, 1], [1, 0]], "Bd": [[0, 0], [0, 0]], "x0": [1]}"#,
        ));
        assert!(m.contains("x0"), "{m}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let m = input_message(parse_network(
            "{\n\"n\": 2,\n\"Bc\": [[0, 1], [1, 0]]\n\"Bd\": []}",
        ));
        assert!(m.starts_with("line 4,"), "{m}");
        let m = input_message(parse_network(
            r#"{"n": 1, "Bc": [[0]], "Bd": [[0]], "extra": 1}"#,
        ));
        assert!(m.contains("extra"), "{m}");
    }

    #[test]
    fn non_positive_gain_is_rejected() {
        let m = input_message(parse_network(
            r#"{"n": 1, "Bc": [[0]], "Bd": [[0]], "k": 0}"#,
        ));
        assert!(m.contains("`k`"), "{m}");
    }
}
