//! Gate lists, their text form, and exact statevector simulation.
//!
//! Qubit order is little-endian throughout: qubit `q` is bit `q` of the
//! basis-state index, so `|q2 q1 q0>` has index `4 q2 + 2 q1 + q0`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::C64;

use super::VqeError;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 4;

/// Rotation angle of an `RY` gate: a constant or a signed free parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Const(f64),
    Param { index: usize, negated: bool },
}

impl Angle {
    pub fn param(index: usize) -> Self {
        Angle::Param { index, negated: false }
    }

    pub fn neg_param(index: usize) -> Self {
        Angle::Param { index, negated: true }
    }

    pub fn bind(&self, angles: &[f64]) -> Result<f64, VqeError> {
        match *self {
            Angle::Const(a) => Ok(a),
            Angle::Param { index, negated } => {
                let a = *angles.get(index).ok_or(VqeError::UnboundParameter {
                    index,
                    bound: angles.len(),
                })?;
                Ok(if negated { -a } else { a })
            }
        }
    }
}

// Constants written symbolically as ±pi/d.
const PI_DIVISORS: [u32; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::Param { index, negated } => write!(f, "{}theta{index}", if negated { "-" } else { "" }),
            Angle::Const(a) => {
                for d in PI_DIVISORS {
                    let v = PI / f64::from(d);
                    let sign = if a.to_bits() == v.to_bits() {
                        ""
                    } else if a.to_bits() == (-v).to_bits() {
                        "-"
                    } else {
                        continue;
                    };
                    return if d == 1 {
                        write!(f, "{sign}pi")
                    } else {
                        write!(f, "{sign}pi/{d}")
                    };
                }
                write!(f, "{a:?}")
            }
        }
    }
}

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negated, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        if let Some(idx) = body.strip_prefix("theta") {
            let index = idx.parse().map_err(|_| format!("bad parameter name `{s}`"))?;
            return Ok(Angle::Param { index, negated });
        }
        if let Some(rest) = body.strip_prefix("pi") {
            let d: u32 = if rest.is_empty() {
                1
            } else {
                rest.strip_prefix('/')
                    .and_then(|r| r.parse().ok())
                    .filter(|d| *d > 0)
                    .ok_or_else(|| format!("bad angle `{s}`"))?
            };
            let v = PI / f64::from(d);
            return Ok(Angle::Const(if negated { -v } else { v }));
        }
        s.parse::<f64>()
            .map(Angle::Const)
            .map_err(|_| format!("bad angle `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Ry { target: usize, angle: Angle },
    X { target: usize },
    Cx { control: usize, target: usize },
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Ry { target, .. } | Gate::X { target } => vec![target],
            Gate::Cx { control, target } => vec![control, target],
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Ry { target, angle } => write!(f, "RY q{target} {angle}"),
            Gate::X { target } => write!(f, "X q{target}"),
            Gate::Cx { control, target } => write!(f, "CX q{control} q{target}"),
        }
    }
}

fn parse_qubit(tok: &str) -> Result<usize, String> {
    tok.strip_prefix('q')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad qubit `{tok}`"))
}

impl FromStr for Gate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        match toks.as_slice() {
            ["RY", q, a] => Ok(Gate::Ry {
                target: parse_qubit(q)?,
                angle: a.parse()?,
            }),
            ["X", q] => Ok(Gate::X { target: parse_qubit(q)? }),
            ["CX", c, t] => Ok(Gate::Cx {
                control: parse_qubit(c)?,
                target: parse_qubit(t)?,
            }),
            _ => Err(format!("unrecognised gate `{s}`")),
        }
    }
}

/// An ordered gate list over a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self, VqeError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(VqeError::TooManyQubits(n_qubits));
        }
        for g in &gates {
            let qs = g.qubits();
            if let Some(&q) = qs.iter().find(|&&q| q >= n_qubits) {
                return Err(VqeError::QubitOutOfRange { qubit: q, n_qubits });
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(VqeError::Parse(format!("control equals target in `{g}`")));
            }
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of free angles, i.e. one past the largest parameter index.
    pub fn n_params(&self) -> usize {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Ry {
                    angle: Angle::Param { index, .. },
                    ..
                } => Some(index + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cx { .. })).count()
    }

    /// Plain-text form: a `qubits <n>` header, then one gate per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.n_qubits);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses [`Circuit::to_text`] output. Without a header the register
    /// size is the largest referenced qubit plus one. Blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str) -> Result<Self, VqeError> {
        let mut n = None;
        let mut gates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("qubits") {
                let q = rest
                    .trim()
                    .parse()
                    .map_err(|_| VqeError::Parse(format!("line {}: bad header `{line}`", i + 1)))?;
                n = Some(q);
                continue;
            }
            gates.push(
                line.parse::<Gate>()
                    .map_err(|m| VqeError::Parse(format!("line {}: {m}", i + 1)))?,
            );
        }
        let n = n.unwrap_or_else(|| gates.iter().flat_map(Gate::qubits).max().map_or(1, |q| q + 1));
        Self::new(n, gates)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Amplitudes of an `n`-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self, VqeError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() || len > 1 << MAX_QUBITS {
            return Err(VqeError::BadDimension(len));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Born probabilities of the computational basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Real parts, valid when every imaginary part vanishes.
    pub fn real_amplitudes(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.re).collect()
    }

    pub fn max_imaginary(&self) -> f64 {
        self.amps.iter().map(|a| a.im.abs()).fold(0.0, f64::max)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Applies the single-qubit matrix `[[a, b], [c, d]]` to `target`.
    pub(crate) fn apply_1q(&mut self, target: usize, u: [[C64; 2]; 2]) {
        let bit = 1 << target;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (x, y) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = u[0][0] * x + u[0][1] * y;
                self.amps[i | bit] = u[1][0] * x + u[1][1] * y;
            }
        }
    }

    pub fn apply_ry(&mut self, target: usize, angle: f64) {
        let (s, c) = (0.5 * angle).sin_cos();
        let r = |v: f64| C64::new(v, 0.0);
        self.apply_1q(target, [[r(c), r(-s)], [r(s), r(c)]]);
    }

    pub fn apply_x(&mut self, target: usize) {
        let bit = 1 << target;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                self.amps.swap(i, i | bit);
            }
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1 << control, 1 << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate, angles: &[f64]) -> Result<(), VqeError> {
        match *gate {
            Gate::Ry { target, angle } => self.apply_ry(target, angle.bind(angles)?),
            Gate::X { target } => self.apply_x(target),
            Gate::Cx { control, target } => self.apply_cx(control, target),
        }
        Ok(())
    }
}

/// Exact state prepared by `circuit` from `|0...0>` with the given angles.
pub fn apply_circuit(circuit: &Circuit, angles: &[f64]) -> Result<Statevector, VqeError> {
    let needed = circuit.n_params();
    if angles.len() < needed {
        return Err(VqeError::UnboundParameter {
            index: angles.len(),
            bound: angles.len(),
        });
    }
    let mut psi = Statevector::zero(circuit.n_qubits());
    for g in circuit.gates() {
        psi.apply_gate(g, angles)?;
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_text_round_trips_bitwise() {
        for a in [
            Angle::Const(PI / 2.0),
            Angle::Const(-PI / 3.0),
            Angle::Const(PI),
            Angle::Const(0.1 + 0.2),
            Angle::Const(-1e-300),
            Angle::param(2),
            Angle::neg_param(0),
        ] {
            let back: Angle = a.to_string().parse().unwrap();
            match (a, back) {
                (Angle::Const(x), Angle::Const(y)) => assert_eq!(x.to_bits(), y.to_bits()),
                _ => assert_eq!(a, back),
            }
        }
        assert_eq!(Angle::Const(PI / 2.0).to_string(), "pi/2");
    }

    #[test]
    fn ry_rotates_zero_to_one() {
        let mut psi = Statevector::zero(1);
        psi.apply_ry(0, PI);
        assert!((psi.amplitudes()[1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cx_flips_target_when_control_set() {
        let c = Circuit::new(2, vec![Gate::X { target: 0 }, Gate::Cx { control: 0, target: 1 }]).unwrap();
        let psi = apply_circuit(&c, &[]).unwrap();
        assert!((psi.amplitudes()[3].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unbound_parameter_is_reported() {
        let c = Circuit::new(
            1,
            vec![Gate::Ry {
                target: 0,
                angle: Angle::param(1),
            }],
        )
        .unwrap();
        assert!(matches!(apply_circuit(&c, &[0.3]), Err(VqeError::UnboundParameter { .. })));
    }

    #[test]
    fn rejects_out_of_range_qubits() {
        assert!(matches!(
            Circuit::new(2, vec![Gate::X { target: 2 }]),
            Err(VqeError::QubitOutOfRange { qubit: 2, n_qubits: 2 })
        ));
        assert!(Circuit::parse("CX q1 q1").is_err());
    }
}
