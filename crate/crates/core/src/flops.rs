//! Analytic FLOP counts for one training step of a hybrid model.
//!
//! Costs are exact arithmetic-operation counts for the dense simulator and
//! the two linear layers, not hardware measurements. They only need to rank
//! architectures consistently, so the constants matter less than the
//! scaling, but each primitive below is counted from its inner loop:
//!
//! - a 2x2 gate on an n-qubit state touches 2^(n-1) amplitude pairs and
//!   spends 14 real FLOPs per pair (4 complex multiplies, 2 complex adds);
//! - CNOT moves 2^(n-2) amplitude pairs (2 ops per pair), CZ negates
//!   2^(n-2) amplitudes (6 ops counting the sign walk);
//! - a Z expectation is one squared magnitude and one add per amplitude,
//!   4 * 2^(n-1) per wire;
//! - the angle embedding is one rotation per wire, the amplitude embedding
//!   is a norm pass plus a scale pass, 3 * 2^n;
//! - a linear layer d_in -> d_out costs 2*d_in*d_out + d_out forward and
//!   twice that plus the bias accumulation backward;
//! - log-softmax plus its backward is 6 ops per class.
//!
//! A full training step is forward plus backward; the adjoint backward pass
//! re-walks the circuit twice, so the circuit's step cost is three times its
//! forward cost.

use crate::genome::{Embedding, EntGate, Genome, Topology};

/// FLOPs of one step, split by where the work happens.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlopsReport {
    /// Linear layers and log-softmax, forward plus backward.
    pub f_classical: u64,
    /// Everything the simulator does, forward plus backward.
    pub f_quantum: u64,
    /// `f_classical + f_quantum`.
    pub f_total: u64,
}

/// FLOPs to apply one single-qubit gate to an n-qubit state.
pub fn single_qubit_gate_flops(n_qubits: usize) -> u64 {
    28 * (1u64 << (n_qubits - 1))
}

/// FLOPs to apply one entangling gate to an n-qubit state.
pub fn entangler_flops(gate: EntGate, n_qubits: usize) -> u64 {
    let quarter = 1u64 << (n_qubits - 2);
    match gate {
        EntGate::Cnot => 2 * quarter,
        EntGate::Cz => 6 * quarter,
    }
}

/// FLOPs to prepare the embedded state.
pub fn embedding_flops(embedding: Embedding, n_qubits: usize) -> u64 {
    match embedding {
        Embedding::Angle => n_qubits as u64 * single_qubit_gate_flops(n_qubits),
        Embedding::Amplitude => 3 * (1u64 << n_qubits),
    }
}

/// FLOPs to read all n Z expectations.
pub fn measurement_flops(n_qubits: usize) -> u64 {
    n_qubits as u64 * 4 * (1u64 << (n_qubits - 1))
}

/// Forward-pass FLOPs of the circuit a genome describes.
pub fn quantum_forward_flops(genome: &Genome) -> u64 {
    let n = genome.n_qubits as usize;
    let ent_per_round = match genome.topology {
        Topology::Linear => n as u64 - 1,
        Topology::Circular => n as u64,
    };
    let per_layer =
        n as u64 * single_qubit_gate_flops(n) + ent_per_round * entangler_flops(genome.ent_gate, n);
    embedding_flops(genome.embedding, n) + genome.n_layers as u64 * per_layer + measurement_flops(n)
}

/// Forward plus adjoint-backward FLOPs of the circuit (three forward
/// passes' worth: the backward walk rewinds the state and the costate).
pub fn quantum_flops(genome: &Genome) -> u64 {
    3 * quantum_forward_flops(genome)
}

/// Forward plus backward FLOPs of the classical parts for input width
/// `d_in` and `n_classes` outputs: both linear layers and the log-softmax.
pub fn classical_flops(d_in: usize, n_qubits: usize, n_classes: usize) -> u64 {
    let (d, n, c) = (d_in as u64, n_qubits as u64, n_classes as u64);
    let pre = (2 * d * n + n) + (4 * d * n + n);
    let post = (2 * n * c + c) + (4 * n * c + c);
    let log_softmax = 6 * c;
    pre + post + log_softmax
}

/// Full per-step cost split for a genome on a `d_in`-feature,
/// `n_classes`-way task. `f_quantum` is the total minus the classical
/// share, floored at zero.
pub fn flops_report(genome: &Genome, d_in: usize, n_classes: usize) -> FlopsReport {
    let f_classical = classical_flops(d_in, genome.n_qubits as usize, n_classes);
    let f_total = f_classical + quantum_flops(genome);
    FlopsReport {
        f_classical,
        f_quantum: f_total.saturating_sub(f_classical),
        f_total,
    }
}
