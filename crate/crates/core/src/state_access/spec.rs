//! Textual state specifications and the dense state file format.
//!
//! Grammar: `basis:<index>`, `product:<a0,b0;a1,b1;...>`, `dense:<path>` or
//! `maxent`. Product amplitudes are complex literals written `re`, `imi` or
//! `re+imi` (also `re-imi`). Dense files hold a little-endian `u64` length
//! followed by that many `(re, im)` pairs of little-endian `f64`.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use super::{GuidingState, MAX_DENSE_DIM};
use crate::error::{Error, Result};

/// A parsed state specification.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Basis(usize),
    Product(Vec<[Complex64; 2]>),
    Dense(PathBuf),
    /// Maximally entangled state of two copies of the system register.
    MaxEntangled,
}

fn bad(spec: &str, reason: impl fmt::Display) -> Error {
    Error::Unsupported(format!("invalid state spec `{spec}`: {reason}"))
}

fn parse_complex(tok: &str) -> Option<Complex64> {
    let tok = tok.trim();
    if let Some(body) = tok.strip_suffix('i') {
        // split at the last sign that is not an exponent sign or the leading sign
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        return match split {
            Some(k) => {
                let re = body[..k].parse().ok()?;
                let im = match &body[k..] {
                    "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                Some(Complex64::new(re, im))
            }
            None => {
                let im = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                Some(Complex64::new(0.0, im))
            }
        };
    }
    tok.parse().ok().map(|re| Complex64::new(re, 0.0))
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "maxent" {
            return Ok(StateSpec::MaxEntangled);
        }
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| bad(s, "expected `<kind>:<value>` or `maxent`"))?;
        match kind {
            "basis" => body
                .parse()
                .map(StateSpec::Basis)
                .map_err(|_| bad(s, "basis index must be a nonnegative integer")),
            "product" => body
                .split(';')
                .map(|pair| {
                    let (a, b) = pair
                        .split_once(',')
                        .ok_or_else(|| bad(s, "expected `a,b` per qubit"))?;
                    match (parse_complex(a), parse_complex(b)) {
                        (Some(a), Some(b)) => Ok([a, b]),
                        _ => Err(bad(s, format!("invalid amplitude pair `{pair}`"))),
                    }
                })
                .collect::<Result<Vec<_>>>()
                .map(StateSpec::Product),
            "dense" if !body.is_empty() => Ok(StateSpec::Dense(PathBuf::from(body))),
            _ => Err(bad(s, format!("unknown kind `{kind}`"))),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Basis(i) => write!(f, "basis:{i}"),
            StateSpec::Product(qs) => {
                f.write_str("product:")?;
                for (k, [a, b]) in qs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{}{:+}i,{}{:+}i", a.re, a.im, b.re, b.im)?;
                }
                Ok(())
            }
            StateSpec::Dense(p) => write!(f, "dense:{}", p.display()),
            StateSpec::MaxEntangled => f.write_str("maxent"),
        }
    }
}

/// Build the accessor for `spec` on an `num_qubits`-qubit register.
///
/// `MaxEntangled` doubles the register: the result lives on `2·num_qubits`
/// qubits.
pub fn make_state(spec: &StateSpec, num_qubits: usize) -> Result<GuidingState> {
    let dim = 1usize
        .checked_shl(num_qubits as u32)
        .filter(|_| num_qubits < usize::BITS as usize)
        .ok_or_else(|| Error::param("num_qubits", num_qubits as f64, "too many qubits"))?;
    match spec {
        StateSpec::Basis(i) => GuidingState::basis(dim, *i),
        StateSpec::Product(qs) => {
            if qs.len() != num_qubits {
                return Err(Error::DimensionMismatch {
                    expected: num_qubits,
                    found: qs.len(),
                });
            }
            GuidingState::product(qs.clone())
        }
        StateSpec::Dense(path) => {
            let amps = read_dense_state(path)?;
            if amps.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: amps.len(),
                });
            }
            GuidingState::dense(amps)
        }
        StateSpec::MaxEntangled => GuidingState::max_entangled(num_qubits),
    }
}

/// Read a dense state file.
pub fn read_dense_state(path: impl AsRef<Path>) -> Result<Vec<Complex64>> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut word = [0u8; 8];
    file.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word);
    if n == 0 || n > MAX_DENSE_DIM as u64 {
        return Err(Error::DimensionTooLarge {
            dim: n as usize,
            limit: MAX_DENSE_DIM,
        });
    }
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        file.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        file.read_exact(&mut word)?;
        let im = f64::from_le_bytes(word);
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

/// Write a dense state file.
pub fn write_dense_state(path: impl AsRef<Path>, amplitudes: &[Complex64]) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(&(amplitudes.len() as u64).to_le_bytes())?;
    for a in amplitudes {
        file.write_all(&a.re.to_le_bytes())?;
        file.write_all(&a.im.to_le_bytes())?;
    }
    file.flush()?;
    Ok(())
}
