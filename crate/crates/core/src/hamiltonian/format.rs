//! Hamiltonian file formats.
//!
//! Text (one item per line, `#` starts a comment):
//!
//! ```text
//! n=2
//! 1.0 XX
//! -0.5 ZI KAPPA_I=0.75
//! BLOCK q=0,1 1,0 0,0 0,0 0,0  0,0 -1,0 2,0 0,0  0,0 2,0 -1,0 0,0  0,0 0,0 0,0 1,0
//! ```
//!
//! Block entries are row-major `re,im` pairs. JSON files (`.json`) carry the
//! same content as `{"n": 2, "terms": [{"coeff": 1.0, "pauli": "XX"},
//! {"qubits": [0, 1], "block": [[1, 0], ...], "kappa_i": 2.0}]}`.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use super::{Hamiltonian, LocalBlock, LocalTerm, PauliString};
use crate::error::{Error, Result};

/// Load a Hamiltonian, choosing the JSON reader for `.json` files.
pub fn load_hamiltonian(path: impl AsRef<Path>) -> Result<Hamiltonian> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        parse_hamiltonian_json(&text)
    } else {
        parse_hamiltonian(&text)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_real(line: usize, field: usize, token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(line, format!("field {field}: invalid number `{token}`")))
}

/// Parse the text format.
pub fn parse_hamiltonian(text: &str) -> Result<Hamiltonian> {
    let mut n: Option<usize> = None;
    let mut terms = Vec::new();
    let mut term_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some(n_val) = n else {
            let rest = line
                .strip_prefix("n=")
                .ok_or_else(|| parse_err(line_no, "expected header `n=<int>`"))?;
            let v = rest.trim().parse::<usize>().map_err(|_| {
                parse_err(line_no, format!("invalid qubit count `{}`", rest.trim()))
            })?;
            n = Some(v);
            continue;
        };

        let mut tokens: Vec<&str> = line.split_whitespace().collect();
        let mut kappa = None;
        if let Some(last) = tokens.last() {
            if let Some(v) = last.strip_prefix("KAPPA_I=") {
                kappa = Some(parse_real(line_no, tokens.len(), v)?);
                tokens.pop();
            }
        }

        if tokens.is_empty() {
            return Err(parse_err(line_no, "norm bound without a term"));
        }
        let term = if tokens[0] == "BLOCK" {
            parse_block_line(line_no, &tokens)?
        } else {
            if tokens.len() != 2 {
                return Err(parse_err(
                    line_no,
                    format!("expected `<coeff> <pauli>`, found {} fields", tokens.len()),
                ));
            }
            let coeff = parse_real(line_no, 1, tokens[0])?;
            let mut p: PauliString = tokens[1]
                .parse()
                .map_err(|e| parse_err(line_no, format!("field 2: {e}")))?;
            if p.ops.len() != n_val {
                return Err(parse_err(
                    line_no,
                    format!(
                        "field 2: Pauli string has length {}, expected {n_val}",
                        p.ops.len()
                    ),
                ));
            }
            p.coeff = coeff;
            LocalTerm::from(p)
        };
        terms.push(LocalTerm {
            kappa_override: kappa,
            ..term
        });
        term_lines.push(line_no);
    }

    let n = n.ok_or_else(|| parse_err(0, "missing header `n=<int>`"))?;
    // report invariant violations against the source line of the term
    Hamiltonian::new(n, terms).map_err(|e| match e {
        Error::InvalidTerm { term, reason } => parse_err(
            term_lines.get(term).copied().unwrap_or(0),
            format!("term {term}: {reason}"),
        ),
        other => other,
    })
}

fn parse_block_line(line_no: usize, tokens: &[&str]) -> Result<LocalTerm> {
    let qspec = tokens
        .get(1)
        .and_then(|t| t.strip_prefix("q="))
        .ok_or_else(|| parse_err(line_no, "field 2: expected `q=<comma list>`"))?;
    let support = qspec
        .split(',')
        .map(|q| {
            q.parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("field 2: invalid qubit `{q}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let matrix = tokens[2..]
        .iter()
        .enumerate()
        .map(|(i, tok)| {
            let field = i + 3;
            let (re, im) = tok.split_once(',').ok_or_else(|| {
                parse_err(
                    line_no,
                    format!("field {field}: expected `re,im`, found `{tok}`"),
                )
            })?;
            Ok(Complex64::new(
                parse_real(line_no, field, re)?,
                parse_real(line_no, field, im)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalTerm::block(LocalBlock::hermitian(support, matrix)))
}

#[derive(Deserialize)]
struct JsonHamiltonian {
    n: usize,
    terms: Vec<JsonTerm>,
}

#[derive(Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum JsonTerm {
    Pauli {
        #[serde(default = "one")]
        coeff: f64,
        pauli: String,
        kappa_i: Option<f64>,
    },
    Block {
        qubits: Vec<usize>,
        block: Vec<[f64; 2]>,
        #[serde(default = "yes")]
        hermitian: bool,
        kappa_i: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// Parse the JSON format.
pub fn parse_hamiltonian_json(text: &str) -> Result<Hamiltonian> {
    let doc: JsonHamiltonian = serde_json::from_str(text)?;
    let terms = doc
        .terms
        .into_iter()
        .enumerate()
        .map(|(i, t)| match t {
            JsonTerm::Pauli {
                coeff,
                pauli,
                kappa_i,
            } => {
                let mut p: PauliString = pauli.parse().map_err(|e| Error::InvalidTerm {
                    term: i,
                    reason: format!("{e}"),
                })?;
                p.coeff = coeff;
                Ok(LocalTerm {
                    kappa_override: kappa_i,
                    ..LocalTerm::from(p)
                })
            }
            JsonTerm::Block {
                qubits,
                block,
                hermitian,
                kappa_i,
            } => Ok(LocalTerm {
                kappa_override: kappa_i,
                ..LocalTerm::block(LocalBlock {
                    support: qubits,
                    matrix: block
                        .iter()
                        .map(|[re, im]| Complex64::new(*re, *im))
                        .collect(),
                    hermitian,
                })
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Hamiltonian::new(doc.n, terms)
}
