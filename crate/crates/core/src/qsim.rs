//! Dense state-vector simulation of the genome-defined circuits.
//!
//! States live in the full 2^n amplitude space (n <= 10, so at most 1024
//! complex numbers). Basis indices are read with wire 0 as the most
//! significant bit: for n = 2, index 2 = 0b10 is the state |10> where wire 0
//! is |1> and wire 1 is |0>.
//!
//! A circuit is: input embedding, then `n_layers` repetitions of one
//! rotation per wire followed by an entangling round, then a Pauli-Z
//! expectation per wire. [`CircuitRun`] evaluates a circuit once and can
//! then produce exact parameter and input gradients by the adjoint method:
//! it walks the gate list backwards, un-applying each unitary from both the
//! evolved state and the measurement-weighted costate, and reads one
//! gradient per rotation off the pair. Cost is a small constant times the
//! forward pass, independent of the number of parameters.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::fmath;
use crate::genome::{EntGate, GateType, Genome, GenomeError, LAYER_SLOTS};

/// Errors from state construction or gate application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QsimError {
    /// Wire index not below the qubit count.
    WireOutOfRange {
        /// Offending wire index.
        wire: usize,
        /// Width of the state it was applied to.
        n_qubits: usize,
    },
    /// Two-qubit gate addressed with `control == target`.
    ControlEqualsTarget(usize),
    /// Input vector length does not match what the embedding expects.
    InputLength {
        /// Expected length (exact for angle, maximum for amplitude).
        expected: usize,
        /// Actual length.
        got: usize,
    },
    /// Amplitude embedding received a vector with zero norm.
    DegenerateInput,
    /// Parameter vector is not `LAYER_SLOTS * n_qubits` long.
    ThetaLength {
        /// Expected length.
        expected: usize,
        /// Actual length.
        got: usize,
    },
    /// The genome itself is out of range.
    InvalidGenome(GenomeError),
}

impl fmt::Display for QsimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QsimError::WireOutOfRange { wire, n_qubits } => {
                write!(f, "wire {wire} out of range for {n_qubits} qubits")
            }
            QsimError::ControlEqualsTarget(w) => {
                write!(f, "entangling gate needs two distinct wires, got {w} twice")
            }
            QsimError::InputLength { expected, got } => {
                write!(
                    f,
                    "input length {got} does not fit embedding (expected {expected})"
                )
            }
            QsimError::DegenerateInput => {
                write!(f, "amplitude embedding of an all-zero vector is undefined")
            }
            QsimError::ThetaLength { expected, got } => {
                write!(f, "theta has {got} entries, circuit needs {expected}")
            }
            QsimError::InvalidGenome(e) => write!(f, "invalid genome: {e}"),
        }
    }
}

impl core::error::Error for QsimError {}

impl From<GenomeError> for QsimError {
    fn from(e: GenomeError) -> Self {
        QsimError::InvalidGenome(e)
    }
}

/// A normalized n-qubit state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state |0...0>.
    pub fn zero_state(n_qubits: usize) -> StateVector {
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[0] = Complex64::ONE;
        StateVector { n_qubits, amps }
    }

    /// Number of wires.
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Amplitudes in basis order (wire 0 = most significant bit).
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Sum of squared amplitude magnitudes; 1 for any physical state.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_wire(&self, wire: usize) -> Result<(), QsimError> {
        if wire >= self.n_qubits {
            return Err(QsimError::WireOutOfRange {
                wire,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Bit mask selecting `wire` in a basis index.
    #[inline]
    fn wire_mask(&self, wire: usize) -> usize {
        1 << (self.n_qubits - 1 - wire)
    }

    /// Applies a 2x2 matrix `[m00, m01, m10, m11]` to one wire.
    fn apply_one_wire(&mut self, wire: usize, m: [Complex64; 4]) {
        let stride = self.wire_mask(wire);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i0 in base..base + stride {
                let i1 = i0 + stride;
                let a = self.amps[i0];
                let b = self.amps[i1];
                self.amps[i0] = m[0] * a + m[1] * b;
                self.amps[i1] = m[2] * a + m[3] * b;
            }
            base += 2 * stride;
        }
    }

    /// Applies the rotation `gate(theta)` to `wire`.
    pub fn apply_rotation(
        &mut self,
        gate: GateType,
        wire: usize,
        theta: f64,
    ) -> Result<(), QsimError> {
        self.check_wire(wire)?;
        self.apply_one_wire(wire, rotation_matrix(gate, theta));
        Ok(())
    }

    /// Applies CNOT or CZ with the given control and target wires.
    pub fn apply_entangler(
        &mut self,
        gate: EntGate,
        control: usize,
        target: usize,
    ) -> Result<(), QsimError> {
        self.check_wire(control)?;
        self.check_wire(target)?;
        if control == target {
            return Err(QsimError::ControlEqualsTarget(control));
        }
        let cmask = self.wire_mask(control);
        let tmask = self.wire_mask(target);
        match gate {
            EntGate::Cnot => {
                // Swap the target-bit pair wherever the control bit is set.
                for b in 0..self.amps.len() {
                    if b & cmask != 0 && b & tmask == 0 {
                        self.amps.swap(b, b | tmask);
                    }
                }
            }
            EntGate::Cz => {
                for b in 0..self.amps.len() {
                    if b & cmask != 0 && b & tmask != 0 {
                        self.amps[b] = -self.amps[b];
                    }
                }
            }
        }
        Ok(())
    }

    /// Expectation of Pauli-Z on `wire`; always in [-1, 1].
    pub fn z_expectation(&self, wire: usize) -> Result<f64, QsimError> {
        self.check_wire(wire)?;
        let mask = self.wire_mask(wire);
        let mut acc = 0.0;
        for (b, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if b & mask == 0 {
                acc += p;
            } else {
                acc -= p;
            }
        }
        // Rounding can push the probability sum a few ulps past 1; the
        // expectation of a +-1 observable must not leak out of its range.
        Ok(acc.clamp(-1.0, 1.0))
    }

    /// Z expectation for every wire, in wire order.
    pub fn all_z_expectations(&self) -> Vec<f64> {
        (0..self.n_qubits)
            .map(|w| self.z_expectation(w).expect("wire in range"))
            .collect()
    }
}

/// Rotation matrix as `[m00, m01, m10, m11]`.
///
/// RX(t) = [[cos(t/2), -i sin(t/2)], [-i sin(t/2), cos(t/2)]]
/// RY(t) = [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]]
/// RZ(t) = diag(exp(-i t/2), exp(i t/2))
pub fn rotation_matrix(gate: GateType, theta: f64) -> [Complex64; 4] {
    let c = fmath::cos(theta / 2.0);
    let s = fmath::sin(theta / 2.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    match gate {
        GateType::Rx => [re(c), im(-s), im(-s), re(c)],
        GateType::Ry => [re(c), re(-s), re(s), re(c)],
        GateType::Rz => [
            Complex64::new(c, -s),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::new(c, s),
        ],
    }
}

/// Entry-wise derivative of [`rotation_matrix`] with respect to `theta`.
fn rotation_derivative(gate: GateType, theta: f64) -> [Complex64; 4] {
    let c = 0.5 * fmath::cos(theta / 2.0);
    let s = 0.5 * fmath::sin(theta / 2.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    match gate {
        GateType::Rx => [re(-s), im(-c), im(-c), re(-s)],
        GateType::Ry => [re(-s), re(-c), re(c), re(-s)],
        GateType::Rz => [
            Complex64::new(-s, -c),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::new(-s, c),
        ],
    }
}

/// Product state where wire w is cos(x_w)|0> + sin(x_w)|1>.
///
/// Equivalent to applying RY(2 x_w) to each wire of |0...0>. Requires
/// exactly one feature per wire.
pub fn angle_embedding(x: &[f64], n_qubits: usize) -> Result<StateVector, QsimError> {
    if x.len() != n_qubits {
        return Err(QsimError::InputLength {
            expected: n_qubits,
            got: x.len(),
        });
    }
    let mut state = StateVector::zero_state(n_qubits);
    for (w, &xi) in x.iter().enumerate() {
        state
            .apply_rotation(GateType::Ry, w, 2.0 * xi)
            .expect("wire in range");
    }
    Ok(state)
}

/// State whose amplitudes are `x`, zero-padded to 2^n and L2-normalized.
///
/// `x` may be shorter than 2^n but not longer, and must have nonzero norm.
pub fn amplitude_embedding(x: &[f64], n_qubits: usize) -> Result<StateVector, QsimError> {
    let dim = 1usize << n_qubits;
    if x.is_empty() || x.len() > dim {
        return Err(QsimError::InputLength {
            expected: dim,
            got: x.len(),
        });
    }
    let norm_sqr: f64 = x.iter().map(|v| v * v).sum();
    if norm_sqr == 0.0 {
        return Err(QsimError::DegenerateInput);
    }
    let norm = fmath::sqrt(norm_sqr);
    let mut amps = vec![Complex64::ZERO; dim];
    for (a, &v) in amps.iter_mut().zip(x) {
        *a = Complex64::new(v / norm, 0.0);
    }
    Ok(StateVector { n_qubits, amps })
}

/// Where a rotation's gradient is accumulated.
#[derive(Clone, Copy, Debug)]
enum Slot {
    /// Trainable parameter `theta[i]`; gradient lands there unscaled.
    Theta(usize),
    /// Embedding rotation for input feature `w`; the rotation angle is
    /// `2 * x[w]`, so the input gradient is twice the angle gradient.
    Input(usize),
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Rot {
        gate: GateType,
        wire: usize,
        theta: f64,
        slot: Slot,
    },
    Ent {
        gate: EntGate,
        control: usize,
        target: usize,
    },
}

/// Gradients of a scalar function of the circuit outputs.
#[derive(Clone, Debug)]
pub struct CircuitGradients {
    /// d(scalar)/d(theta), same layout as the theta argument
    /// (`LAYER_SLOTS * n_qubits`, row-major by layer slot). Slots at or
    /// beyond `n_layers` are always zero.
    pub theta: Vec<f64>,
    /// d(scalar)/d(input feature), same length as the input vector.
    pub input: Vec<f64>,
}

/// One evaluated circuit, ready to answer output and gradient queries.
///
/// `theta` is laid out row-major by layer slot: the rotation on wire `w` of
/// layer `k` reads `theta[k * n_qubits + w]`. Only the first `n_layers` rows
/// are used.
pub struct CircuitRun {
    genome: Genome,
    ops: Vec<Op>,
    /// Raw input, kept for the amplitude-embedding gradient chain.
    input: Vec<f64>,
    final_state: StateVector,
}

impl CircuitRun {
    /// Embeds `x` and applies every layer, keeping the final state.
    pub fn new(genome: &Genome, theta: &[f64], x: &[f64]) -> Result<CircuitRun, QsimError> {
        genome.validate()?;
        let n = genome.n_qubits as usize;
        if theta.len() != LAYER_SLOTS * n {
            return Err(QsimError::ThetaLength {
                expected: LAYER_SLOTS * n,
                got: theta.len(),
            });
        }

        let mut ops = Vec::with_capacity(n * LAYER_SLOTS * 2 + n);
        let mut state = match genome.embedding {
            crate::genome::Embedding::Angle => {
                if x.len() != n {
                    return Err(QsimError::InputLength {
                        expected: n,
                        got: x.len(),
                    });
                }
                for (w, &xi) in x.iter().enumerate() {
                    ops.push(Op::Rot {
                        gate: GateType::Ry,
                        wire: w,
                        theta: 2.0 * xi,
                        slot: Slot::Input(w),
                    });
                }
                StateVector::zero_state(n)
            }
            crate::genome::Embedding::Amplitude => amplitude_embedding(x, n)?,
        };
        for k in 0..genome.n_layers as usize {
            let gate = genome.gate_types[k];
            for w in 0..n {
                ops.push(Op::Rot {
                    gate,
                    wire: w,
                    theta: theta[k * n + w],
                    slot: Slot::Theta(k * n + w),
                });
            }
            for (c, t) in genome.entangling_pairs() {
                ops.push(Op::Ent {
                    gate: genome.ent_gate,
                    control: c,
                    target: t,
                });
            }
        }

        for op in &ops {
            apply_op(&mut state, op);
        }
        Ok(CircuitRun {
            genome: *genome,
            ops,
            input: x.to_vec(),
            final_state: state,
        })
    }

    /// The state after the last layer.
    pub fn final_state(&self) -> &StateVector {
        &self.final_state
    }

    /// Per-wire Z expectations of the final state.
    pub fn outputs(&self) -> Vec<f64> {
        self.final_state.all_z_expectations()
    }

    /// Gradients of `sum_w upstream[w] * <Z_w>` with respect to every
    /// trainable parameter and every input feature.
    ///
    /// `upstream` carries the derivative of the surrounding scalar loss with
    /// respect to each circuit output, so this is the reverse-mode step
    /// through the whole circuit.
    pub fn gradients(&self, upstream: &[f64]) -> Result<CircuitGradients, QsimError> {
        let n = self.genome.n_qubits as usize;
        if upstream.len() != n {
            return Err(QsimError::InputLength {
                expected: n,
                got: upstream.len(),
            });
        }

        // Costate phi = M psi_T with M = sum_w upstream[w] Z_w, a diagonal
        // operator: its entry at basis index b is the signed sum of upstream
        // weights over the bits of b.
        let mut psi = self.final_state.clone();
        let mut phi = psi.clone();
        for (b, amp) in phi.amps.iter_mut().enumerate() {
            let mut m = 0.0;
            for (w, &u) in upstream.iter().enumerate() {
                if b & (1 << (n - 1 - w)) == 0 {
                    m += u;
                } else {
                    m -= u;
                }
            }
            *amp *= m;
        }

        let mut theta_grad = vec![0.0; LAYER_SLOTS * n];
        let mut input_grad = vec![0.0; self.input.len()];
        for op in self.ops.iter().rev() {
            match *op {
                Op::Ent {
                    gate,
                    control,
                    target,
                } => {
                    // CNOT and CZ are their own inverses.
                    psi.apply_entangler(gate, control, target)?;
                    phi.apply_entangler(gate, control, target)?;
                }
                Op::Rot {
                    gate,
                    wire,
                    theta,
                    slot,
                } => {
                    psi.apply_rotation(gate, wire, -theta)?;
                    // With psi rewound to just before this gate,
                    // d<loss>/dtheta = 2 Re <phi | dU/dtheta | psi>.
                    let g = 2.0 * pair_overlap(&phi, &psi, wire, rotation_derivative(gate, theta));
                    match slot {
                        Slot::Theta(i) => theta_grad[i] += g,
                        // Embedding angle is 2x, so chain through the factor.
                        Slot::Input(w) => input_grad[w] += 2.0 * g,
                    }
                    phi.apply_rotation(gate, wire, -theta)?;
                }
            }
        }

        if self.genome.embedding == crate::genome::Embedding::Amplitude {
            // psi is now the embedded state x/|x| and phi is the loss
            // gradient with respect to it. Push through the normalization:
            // for psi0 = u/|u|,
            //   dE/du_j = (2/|u|) (Re phi_j - psi0_j * sum_b Re(phi_b) psi0_b).
            let norm = fmath::sqrt(self.input.iter().map(|v| v * v).sum::<f64>());
            let projection: f64 = phi
                .amps
                .iter()
                .zip(psi.amps.iter())
                .map(|(p, s)| p.re * s.re)
                .sum();
            for (j, g) in input_grad.iter_mut().enumerate() {
                *g = (2.0 / norm) * (phi.amps[j].re - psi.amps[j].re * projection);
            }
        }

        Ok(CircuitGradients {
            theta: theta_grad,
            input: input_grad,
        })
    }
}

fn apply_op(state: &mut StateVector, op: &Op) {
    match *op {
        Op::Rot {
            gate, wire, theta, ..
        } => state
            .apply_rotation(gate, wire, theta)
            .expect("op wires validated at build"),
        Op::Ent {
            gate,
            control,
            target,
        } => state
            .apply_entangler(gate, control, target)
            .expect("op wires validated at build"),
    }
}

/// Re <phi | (M on wire) | psi> for a 2x2 matrix `m`, without materializing
/// the matrix-vector product.
fn pair_overlap(phi: &StateVector, psi: &StateVector, wire: usize, m: [Complex64; 4]) -> f64 {
    let stride = phi.wire_mask(wire);
    let dim = phi.amps.len();
    let mut acc = Complex64::ZERO;
    let mut base = 0;
    while base < dim {
        for i0 in base..base + stride {
            let i1 = i0 + stride;
            let a = psi.amps[i0];
            let b = psi.amps[i1];
            acc += phi.amps[i0].conj() * (m[0] * a + m[1] * b);
            acc += phi.amps[i1].conj() * (m[2] * a + m[3] * b);
        }
        base += 2 * stride;
    }
    acc.re
}

/// Runs the circuit defined by `genome` and `theta` on input `x` and
/// returns the per-wire Z expectations.
pub fn run_circuit(genome: &Genome, theta: &[f64], x: &[f64]) -> Result<Vec<f64>, QsimError> {
    Ok(CircuitRun::new(genome, theta, x)?.outputs())
}
