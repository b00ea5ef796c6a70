//! Circuit-level gate IR and exact unitaries.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, cis, CMat, C64};
use crate::pulse::{hadamard_2x2, rotation_2x2, Axis};
use crate::spin::{self, SpinSystem};

/// A gate on 0-based spin indices; angles in degrees.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Rx {
        spin: usize,
        angle: f64,
    },
    Ry {
        spin: usize,
        angle: f64,
    },
    Rz {
        spin: usize,
        angle: f64,
    },
    /// Rotation about the xy-plane axis at `phase`.
    Rphi {
        spin: usize,
        phase: f64,
        angle: f64,
    },
    Hadamard(usize),
    Not(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// |0><0| x I + |1><1| x Rz(angle).
    ControlledZ {
        control: usize,
        target: usize,
        angle: f64,
    },
    /// diag(1, 1, 1, e^{i angle}).
    CPhase {
        control: usize,
        target: usize,
        angle: f64,
    },
    Toffoli {
        c1: usize,
        c2: usize,
        target: usize,
    },
    /// Swaps t1 and t2 when control is |1>.
    Fredkin {
        control: usize,
        t1: usize,
        t2: usize,
    },
    Swap(usize, usize),
    /// Free evolution; logically a no-op, physically the coupled evolution.
    Delay(f64),
    /// diag(e^{i phases[x]}) over the local basis of `spins` (first spin MSB); radians.
    Diagonal {
        spins: Vec<usize>,
        phases: Vec<f64>,
    },
    /// |x> -> |table[x]> on `spins`, applied only when every control is |1>.
    Permutation {
        controls: Vec<usize>,
        spins: Vec<usize>,
        table: Vec<usize>,
    },
    /// Named group of gates, e.g. an oracle.
    Composite {
        tag: String,
        gates: Vec<Gate>,
    },
}

impl Gate {
    pub fn spins(&self) -> Vec<usize> {
        match self {
            Gate::Rx { spin, .. }
            | Gate::Ry { spin, .. }
            | Gate::Rz { spin, .. }
            | Gate::Rphi { spin, .. }
            | Gate::Hadamard(spin)
            | Gate::Not(spin) => vec![*spin],
            Gate::Cnot { control, target }
            | Gate::ControlledZ { control, target, .. }
            | Gate::CPhase { control, target, .. } => vec![*control, *target],
            Gate::Toffoli { c1, c2, target } => vec![*c1, *c2, *target],
            Gate::Fredkin { control, t1, t2 } => vec![*control, *t1, *t2],
            Gate::Swap(a, b) => vec![*a, *b],
            Gate::Delay(_) => vec![],
            Gate::Diagonal { spins, .. } => spins.clone(),
            Gate::Permutation { controls, spins, .. } => controls.iter().chain(spins.iter()).copied().collect(),
            Gate::Composite { gates, .. } => {
                let mut v: Vec<usize> = gates.iter().flat_map(|g| g.spins()).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let Gate::Composite { gates, .. } = self {
            return gates.iter().try_for_each(|g| g.validate(n));
        }
        let spins = self.spins();
        for (i, &s) in spins.iter().enumerate() {
            if s >= n {
                return Err(Error::SpinRange { index: s, n });
            }
            if spins[..i].contains(&s) {
                return Err(Error::DuplicateTarget(s));
            }
        }
        match self {
            Gate::Delay(t) if *t < 0.0 => Err(Error::InvalidArgument("negative delay in a circuit".into())),
            Gate::Diagonal { spins, phases } if phases.len() != 1 << spins.len() => {
                Err(Error::Dimension { expected: 1 << spins.len(), got: phases.len() })
            }
            Gate::Permutation { spins, table, .. } => check_permutation(table, 1 << spins.len()),
            _ => Ok(()),
        }
    }

    /// Exact unitary on an n-spin register. `Delay` is the identity here.
    pub fn unitary(&self, n: usize) -> Result<CMat> {
        self.validate(n)?;
        let single = |m: CMat, s: usize| spin::embed(&m, &[s], n);
        match self {
            Gate::Rx { spin, angle } => single(rotation_2x2(Axis::X, *angle), *spin),
            Gate::Ry { spin, angle } => single(rotation_2x2(Axis::Y, *angle), *spin),
            Gate::Rz { spin, angle } => single(rotation_2x2(Axis::Z, *angle), *spin),
            Gate::Rphi { spin, phase, angle } => single(rotation_2x2(Axis::Phase(*phase), *angle), *spin),
            Gate::Hadamard(s) => single(hadamard_2x2(), *s),
            Gate::Not(s) => single(linalg::real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]]), *s),
            Gate::Cnot { control, target } => Ok(permutation_matrix(n, |x| {
                if linalg::spin_bit(x, *control, n) == 1 {
                    x ^ linalg::spin_mask(*target, n)
                } else {
                    x
                }
            })),
            Gate::ControlledZ { control, target, angle } => {
                let h = angle.to_radians() / 2.0;
                Ok(diagonal_matrix(n, |x| {
                    if linalg::spin_bit(x, *control, n) == 0 {
                        0.0
                    } else if linalg::spin_bit(x, *target, n) == 0 {
                        -h
                    } else {
                        h
                    }
                }))
            }
            Gate::CPhase { control, target, angle } => Ok(diagonal_matrix(n, |x| {
                if linalg::spin_bit(x, *control, n) == 1 && linalg::spin_bit(x, *target, n) == 1 {
                    angle.to_radians()
                } else {
                    0.0
                }
            })),
            Gate::Toffoli { c1, c2, target } => Ok(permutation_matrix(n, |x| {
                if linalg::spin_bit(x, *c1, n) == 1 && linalg::spin_bit(x, *c2, n) == 1 {
                    x ^ linalg::spin_mask(*target, n)
                } else {
                    x
                }
            })),
            Gate::Fredkin { control, t1, t2 } => Ok(permutation_matrix(n, |x| {
                if linalg::spin_bit(x, *control, n) == 1 {
                    swap_bits(x, *t1, *t2, n)
                } else {
                    x
                }
            })),
            Gate::Swap(a, b) => Ok(permutation_matrix(n, |x| swap_bits(x, *a, *b, n))),
            Gate::Delay(_) => Ok(linalg::identity(1 << n)),
            Gate::Diagonal { spins, phases } => Ok(diagonal_matrix(n, |x| phases[local_index(x, spins, n)])),
            Gate::Permutation { controls, spins, table } => Ok(permutation_matrix(n, |x| {
                if controls.iter().all(|&c| linalg::spin_bit(x, c, n) == 1) {
                    let l = local_index(x, spins, n);
                    set_local(x, spins, table[l], n)
                } else {
                    x
                }
            })),
            Gate::Composite { gates, .. } => circuit_unitary(gates, n),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::Rx { .. } => "RX",
            Gate::Ry { .. } => "RY",
            Gate::Rz { .. } => "RZ",
            Gate::Rphi { .. } => "RPHI",
            Gate::Hadamard(_) => "H",
            Gate::Not(_) => "NOT",
            Gate::Cnot { .. } => "CNOT",
            Gate::ControlledZ { .. } => "CZ",
            Gate::CPhase { .. } => "CPHASE",
            Gate::Toffoli { .. } => "TOFFOLI",
            Gate::Fredkin { .. } => "FREDKIN",
            Gate::Swap(..) => "SWAP",
            Gate::Delay(_) => "DELAY",
            Gate::Diagonal { .. } => "DIAGONAL",
            Gate::Permutation { .. } => "PERMUTATION",
            Gate::Composite { .. } => "COMPOSITE",
        }
    }
}

fn check_permutation(table: &[usize], size: usize) -> Result<()> {
    if table.len() != size {
        return Err(Error::Dimension { expected: size, got: table.len() });
    }
    let mut seen = vec![false; size];
    for &t in table {
        if t >= size || seen[t] {
            return Err(Error::InvalidArgument("permutation table is not a bijection".into()));
        }
        seen[t] = true;
    }
    Ok(())
}

/// Local basis index of `spins` (first spin MSB) within register index x.
pub fn local_index(x: usize, spins: &[usize], n: usize) -> usize {
    spins.iter().fold(0, |acc, &s| (acc << 1) | linalg::spin_bit(x, s, n))
}

/// Overwrite the bits of `spins` in x with the local value `v`.
pub fn set_local(x: usize, spins: &[usize], v: usize, n: usize) -> usize {
    let k = spins.len();
    let mut out = x;
    for (p, &s) in spins.iter().enumerate() {
        let m = linalg::spin_mask(s, n);
        if (v >> (k - 1 - p)) & 1 == 1 {
            out |= m;
        } else {
            out &= !m;
        }
    }
    out
}

fn swap_bits(x: usize, a: usize, b: usize, n: usize) -> usize {
    let (ba, bb) = (linalg::spin_bit(x, a, n), linalg::spin_bit(x, b, n));
    if ba == bb {
        x
    } else {
        x ^ linalg::spin_mask(a, n) ^ linalg::spin_mask(b, n)
    }
}

/// Matrix with U|x> = |f(x)>.
pub fn permutation_matrix(n: usize, f: impl Fn(usize) -> usize) -> CMat {
    let d = 1usize << n;
    let mut m = CMat::zeros(d, d);
    for x in 0..d {
        m[(f(x), x)] = c(1.0, 0.0);
    }
    m
}

/// diag(e^{i phase(x)}).
pub fn diagonal_matrix(n: usize, phase: impl Fn(usize) -> f64) -> CMat {
    let v: Vec<C64> = (0..1usize << n).map(|x| cis(phase(x))).collect();
    linalg::diag(&v)
}

impl Gate {
    /// Basis-state image of x for gates that only permute the basis.
    pub fn classical_map(&self, x: usize, n: usize) -> Option<usize> {
        let bit = |s: usize| linalg::spin_bit(x, s, n);
        Some(match self {
            Gate::Not(s) => x ^ linalg::spin_mask(*s, n),
            Gate::Cnot { control, target } if bit(*control) == 1 => x ^ linalg::spin_mask(*target, n),
            Gate::Toffoli { c1, c2, target } if bit(*c1) == 1 && bit(*c2) == 1 => x ^ linalg::spin_mask(*target, n),
            Gate::Fredkin { control, t1, t2 } if bit(*control) == 1 => swap_bits(x, *t1, *t2, n),
            Gate::Swap(a, b) => swap_bits(x, *a, *b, n),
            Gate::Permutation { controls, spins, table } if controls.iter().all(|&c| bit(c) == 1) => {
                set_local(x, spins, table[local_index(x, spins, n)], n)
            }
            Gate::Cnot { .. } | Gate::Toffoli { .. } | Gate::Fredkin { .. } | Gate::Permutation { .. } => x,
            Gate::Delay(_) => x,
            Gate::Composite { gates, .. } => gates.iter().try_fold(x, |y, g| g.classical_map(y, n))?,
            _ => return None,
        })
    }
}

/// Basis permutation of a circuit, if every gate is classical.
pub fn circuit_permutation(gates: &[Gate], n: usize) -> Result<Option<Vec<usize>>> {
    for g in gates {
        g.validate(n)?;
    }
    Ok((0..1usize << n).map(|x| gates.iter().try_fold(x, |y, g| g.classical_map(y, n))).collect())
}

/// Product of gate unitaries, first gate rightmost.
pub fn circuit_unitary(gates: &[Gate], n: usize) -> Result<CMat> {
    let mut u = linalg::identity(1 << n);
    for g in gates {
        u = g.unitary(n)? * u;
    }
    Ok(u)
}

/// As `circuit_unitary` but delays evolve under the couplings of `system`.
pub fn circuit_unitary_in(gates: &[Gate], system: &SpinSystem) -> Result<CMat> {
    let n = system.n;
    let mut u = linalg::identity(1 << n);
    for g in gates {
        let step = match g {
            Gate::Delay(t) => spin::diagonal_propagator(&system.coupling_diagonal(), *t),
            Gate::Composite { gates, .. } => circuit_unitary_in(gates, system)?,
            other => other.unitary(n)?,
        };
        u = step * u;
    }
    Ok(u)
}

/// Conditional phase pi on the listed basis states of `spins` (oracle marking).
pub fn phase_flip(spins: &[usize], marked: &[usize]) -> Gate {
    let mut phases = vec![0.0; 1 << spins.len()];
    for &m in marked {
        phases[m] = PI;
    }
    Gate::Diagonal { spins: spins.to_vec(), phases }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnot_truth_table() {
        let u = Gate::Cnot { control: 0, target: 1 }.unitary(2).unwrap();
        for (x, y) in [(0b10, 0b11), (0b11, 0b10), (0b00, 0b00), (0b01, 0b01)] {
            assert_eq!(u[(y, x)], c(1.0, 0.0));
        }
    }

    #[test]
    fn cnot_embedding_matches_enumeration() {
        // control spin 3, target spin 1 (1-based) of three
        let u = Gate::Cnot { control: 2, target: 0 }.unitary(3).unwrap();
        for x in 0..8usize {
            let y = if x & 1 == 1 { x ^ 0b100 } else { x };
            assert_eq!(u[(y, x)], c(1.0, 0.0));
        }
    }

    #[test]
    fn toffoli_from_definition() {
        let u = Gate::Toffoli { c1: 0, c2: 1, target: 2 }.unitary(3).unwrap();
        assert_eq!(u[(7, 6)], c(1.0, 0.0));
        assert_eq!(u[(6, 7)], c(1.0, 0.0));
        assert_eq!(u[(5, 5)], c(1.0, 0.0));
    }

    #[test]
    fn duplicate_spins_rejected() {
        assert!(matches!(Gate::Cnot { control: 1, target: 1 }.unitary(2), Err(Error::DuplicateTarget(1))));
        assert!(Gate::Not(3).unitary(2).is_err());
    }

    #[test]
    fn non_bijective_permutation_rejected() {
        let g = Gate::Permutation { controls: vec![], spins: vec![0, 1], table: vec![0, 0, 1, 2] };
        assert!(g.unitary(2).is_err());
    }
}
