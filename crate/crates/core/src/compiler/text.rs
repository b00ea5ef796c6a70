//! Plain-text circuit format.
//!
//! One gate per line with 1-based spin labels, angles in degrees and delays
//! in seconds. `#` starts a comment.
//!
//! ```text
//! H 1
//! CNOT 1 2
//! RPHI 2 90 45
//! DELAY 0.002
//! ```

use std::fmt::Write as _;

use super::gate::Gate;
use crate::error::{Error, Result};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_circuit(text: &str) -> Result<Vec<Gate>> {
    let mut gates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut parts = body.split_whitespace();
        let op = parts.next().unwrap().to_ascii_uppercase();
        let args: Vec<&str> = parts.collect();
        let spin = |k: usize| -> Result<usize> {
            let s = args.get(k).ok_or_else(|| perr(ln, format!("{op}: missing argument {}", k + 1)))?;
            let v: usize = s.parse().map_err(|_| perr(ln, format!("bad spin label '{s}'")))?;
            if v == 0 {
                return Err(perr(ln, "spin labels start at 1"));
            }
            Ok(v - 1)
        };
        let num = |k: usize| -> Result<f64> {
            let s = args.get(k).ok_or_else(|| perr(ln, format!("{op}: missing argument {}", k + 1)))?;
            s.parse().map_err(|_| perr(ln, format!("bad number '{s}'")))
        };
        let arity = |want: usize| -> Result<()> {
            if args.len() != want {
                return Err(perr(ln, format!("{op} takes {want} arguments, got {}", args.len())));
            }
            Ok(())
        };
        let g = match op.as_str() {
            "RX" | "RY" | "RZ" => {
                arity(2)?;
                let (spin, angle) = (spin(0)?, num(1)?);
                match op.as_str() {
                    "RX" => Gate::Rx { spin, angle },
                    "RY" => Gate::Ry { spin, angle },
                    _ => Gate::Rz { spin, angle },
                }
            }
            "RPHI" => {
                arity(3)?;
                Gate::Rphi { spin: spin(0)?, phase: num(1)?, angle: num(2)? }
            }
            "H" => {
                arity(1)?;
                Gate::Hadamard(spin(0)?)
            }
            "NOT" | "X" => {
                arity(1)?;
                Gate::Not(spin(0)?)
            }
            "CNOT" => {
                arity(2)?;
                Gate::Cnot { control: spin(0)?, target: spin(1)? }
            }
            "CZ" => {
                arity(3)?;
                Gate::ControlledZ { control: spin(0)?, target: spin(1)?, angle: num(2)? }
            }
            "CPHASE" => {
                arity(3)?;
                Gate::CPhase { control: spin(0)?, target: spin(1)?, angle: num(2)? }
            }
            "TOFFOLI" => {
                arity(3)?;
                Gate::Toffoli { c1: spin(0)?, c2: spin(1)?, target: spin(2)? }
            }
            "FREDKIN" => {
                arity(3)?;
                Gate::Fredkin { control: spin(0)?, t1: spin(1)?, t2: spin(2)? }
            }
            "SWAP" => {
                arity(2)?;
                Gate::Swap(spin(0)?, spin(1)?)
            }
            "DELAY" => {
                arity(1)?;
                let t = num(0)?;
                if t < 0.0 {
                    return Err(perr(ln, "negative delay"));
                }
                Gate::Delay(t)
            }
            _ => return Err(perr(ln, format!("unknown gate '{op}'"))),
        };
        gates.push(g);
    }
    Ok(gates)
}

/// Inverse of `parse_circuit` for the gates it understands; composite
/// gates are flattened.
pub fn format_circuit(gates: &[Gate]) -> Result<String> {
    let mut out = String::new();
    for g in gates {
        format_gate(g, &mut out)?;
    }
    Ok(out)
}

fn format_gate(g: &Gate, out: &mut String) -> Result<()> {
    let _ = match g {
        Gate::Rx { spin, angle } => writeln!(out, "RX {} {}", spin + 1, angle),
        Gate::Ry { spin, angle } => writeln!(out, "RY {} {}", spin + 1, angle),
        Gate::Rz { spin, angle } => writeln!(out, "RZ {} {}", spin + 1, angle),
        Gate::Rphi { spin, phase, angle } => writeln!(out, "RPHI {} {} {}", spin + 1, phase, angle),
        Gate::Hadamard(s) => writeln!(out, "H {}", s + 1),
        Gate::Not(s) => writeln!(out, "NOT {}", s + 1),
        Gate::Cnot { control, target } => writeln!(out, "CNOT {} {}", control + 1, target + 1),
        Gate::ControlledZ { control, target, angle } => {
            writeln!(out, "CZ {} {} {}", control + 1, target + 1, angle)
        }
        Gate::CPhase { control, target, angle } => {
            writeln!(out, "CPHASE {} {} {}", control + 1, target + 1, angle)
        }
        Gate::Toffoli { c1, c2, target } => writeln!(out, "TOFFOLI {} {} {}", c1 + 1, c2 + 1, target + 1),
        Gate::Fredkin { control, t1, t2 } => writeln!(out, "FREDKIN {} {} {}", control + 1, t1 + 1, t2 + 1),
        Gate::Swap(a, b) => writeln!(out, "SWAP {} {}", a + 1, b + 1),
        Gate::Delay(t) => writeln!(out, "DELAY {}", t),
        Gate::Composite { gates, .. } => {
            for x in gates {
                format_gate(x, out)?;
            }
            Ok(())
        }
        Gate::Diagonal { .. } | Gate::Permutation { .. } => {
            return Err(Error::InvalidArgument(format!("{} has no text form", g.name())))
        }
    };
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let src = "H 1\nCNOT 1 2 # entangle\n\nRPHI 2 90 45\nCPHASE 2 3 -90\nDELAY 0.002\n";
        let g = parse_circuit(src).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[1], Gate::Cnot { control: 0, target: 1 });
        let again = parse_circuit(&format_circuit(&g).unwrap()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_circuit("H 1\nFOO 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_circuit("H 0").is_err());
        assert!(parse_circuit("CNOT 1").is_err());
    }
}
