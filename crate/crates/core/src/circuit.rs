//! Circuit descriptions over the gate set {CNOT, U_b, U_c} plus the
//! Hadamard macro, and their plain-text file format: one gate per line,
//! `CNOT c t` | `UB q` | `UC q` | `H q`, `#` comments, optional `qubits n`
//! header. Qubits are numbered from 1, leftmost in the basis string.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("line {line}: unknown gate '{token}'")]
    UnknownGate { line: usize, token: String },
    #[error("line {line}: expected {want} qubit argument(s)")]
    BadArity { line: usize, want: usize },
    #[error("line {line}: qubit index {index} outside 1..={qubits}")]
    QubitRange {
        line: usize,
        index: usize,
        qubits: usize,
    },
    #[error("line {line}: control and target must differ")]
    ControlEqualsTarget { line: usize },
    #[error("line {line}: malformed integer '{token}'")]
    BadInteger { line: usize, token: String },
    #[error("qubit count must be positive")]
    NoQubits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Cnot { control: usize, target: usize },
    UB(usize),
    UC(usize),
    /// Macro: expands to UB, UB, UC, UB, UB on the same qubit
    /// (U_b^2 U_c U_b^2 is the Hadamard up to a global phase).
    H(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitDescription {
    pub qubit_count: usize,
    pub gates: Vec<Gate>,
}

impl CircuitDescription {
    pub fn new(qubit_count: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        if qubit_count == 0 {
            return Err(CircuitError::NoQubits);
        }
        let c = CircuitDescription { qubit_count, gates };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), CircuitError> {
        for (i, g) in self.gates.iter().enumerate() {
            let line = i + 1;
            let check = |q: usize| -> Result<(), CircuitError> {
                if q == 0 || q > self.qubit_count {
                    Err(CircuitError::QubitRange {
                        line,
                        index: q,
                        qubits: self.qubit_count,
                    })
                } else {
                    Ok(())
                }
            };
            match *g {
                Gate::Cnot { control, target } => {
                    check(control)?;
                    check(target)?;
                    if control == target {
                        return Err(CircuitError::ControlEqualsTarget { line });
                    }
                }
                Gate::UB(q) | Gate::UC(q) | Gate::H(q) => check(q)?,
            }
        }
        Ok(())
    }

    /// Gate list with Hadamard macros expanded.
    pub fn expanded(&self) -> Vec<Gate> {
        let mut out = Vec::new();
        for g in &self.gates {
            match *g {
                Gate::H(q) => {
                    out.extend_from_slice(&[
                        Gate::UB(q),
                        Gate::UB(q),
                        Gate::UC(q),
                        Gate::UB(q),
                        Gate::UB(q),
                    ]);
                }
                other => out.push(other),
            }
        }
        out
    }

    /// Parse the circuit file format. The qubit count is the `qubits n`
    /// directive when present, otherwise the largest index used.
    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        let mut gates = Vec::new();
        let mut declared: Option<usize> = None;
        let mut max_index = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut parts = content.split_whitespace();
            let head = parts.next().unwrap().to_ascii_uppercase();
            let args: Vec<&str> = parts.collect();
            let parse_int = |tok: &str| -> Result<usize, CircuitError> {
                tok.parse().map_err(|_| CircuitError::BadInteger {
                    line,
                    token: tok.to_string(),
                })
            };
            match head.as_str() {
                "QUBITS" => {
                    if args.len() != 1 {
                        return Err(CircuitError::BadArity { line, want: 1 });
                    }
                    declared = Some(parse_int(args[0])?);
                }
                "CNOT" => {
                    if args.len() != 2 {
                        return Err(CircuitError::BadArity { line, want: 2 });
                    }
                    let control = parse_int(args[0])?;
                    let target = parse_int(args[1])?;
                    max_index = max_index.max(control).max(target);
                    gates.push(Gate::Cnot { control, target });
                }
                "UB" | "UC" | "H" => {
                    if args.len() != 1 {
                        return Err(CircuitError::BadArity { line, want: 1 });
                    }
                    let q = parse_int(args[0])?;
                    max_index = max_index.max(q);
                    gates.push(match head.as_str() {
                        "UB" => Gate::UB(q),
                        "UC" => Gate::UC(q),
                        _ => Gate::H(q),
                    });
                }
                other => {
                    return Err(CircuitError::UnknownGate {
                        line,
                        token: other.to_string(),
                    })
                }
            }
        }
        let qubit_count = declared.unwrap_or(max_index.max(1));
        CircuitDescription::new(qubit_count, gates)
    }

    /// Basis string of wire `w` (qubit 1 leftmost).
    pub fn wire_label(&self, w: usize) -> String {
        (1..=self.qubit_count)
            .map(|q| {
                if (w >> (self.qubit_count - q)) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_gates_comments_and_header() {
        let text = "# bell circuit\nqubits 2\nH 2\nCNOT 2 1  # entangle\n";
        let c = CircuitDescription::parse(text).unwrap();
        assert_eq!(c.qubit_count, 2);
        assert_eq!(c.gates, vec![Gate::H(2), Gate::Cnot { control: 2, target: 1 }]);
    }

    #[test]
    fn infers_qubit_count() {
        let c = CircuitDescription::parse("UC 3\n").unwrap();
        assert_eq!(c.qubit_count, 3);
        let empty = CircuitDescription::parse("").unwrap();
        assert_eq!(empty.qubit_count, 1);
        assert!(empty.gates.is_empty());
    }

    #[test]
    fn hadamard_macro_expands() {
        let c = CircuitDescription::new(1, vec![Gate::H(1)]).unwrap();
        assert_eq!(
            c.expanded(),
            vec![Gate::UB(1), Gate::UB(1), Gate::UC(1), Gate::UB(1), Gate::UB(1)]
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            CircuitDescription::parse("XGATE 1"),
            Err(CircuitError::UnknownGate { line: 1, .. })
        ));
        assert!(matches!(
            CircuitDescription::parse("qubits 2\nCNOT 1 1"),
            Err(CircuitError::ControlEqualsTarget { line: 1 })
        ));
        assert!(matches!(
            CircuitDescription::parse("qubits 1\nUB 2"),
            Err(CircuitError::QubitRange { .. })
        ));
        assert!(matches!(
            CircuitDescription::parse("UB x"),
            Err(CircuitError::BadInteger { .. })
        ));
    }

    #[test]
    fn wire_labels_follow_bit_convention() {
        let c = CircuitDescription::new(2, vec![]).unwrap();
        assert_eq!(c.wire_label(0), "00");
        assert_eq!(c.wire_label(1), "01");
        assert_eq!(c.wire_label(2), "10");
        assert_eq!(c.wire_label(3), "11");
    }
}
