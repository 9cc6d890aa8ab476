//! The architecture search space.
//!
//! A [`Genome`] fixes every discrete choice that defines one hybrid
//! classifier: qubit count, input embedding, one rotation gate per layer
//! slot, the entangling gate, the entanglement topology, and how many of the
//! layer slots are active. The space is the full cross product,
//! 9 * 2 * 3^4 * 2 * 2 * 4 = 23_328 genomes, small enough to enumerate but
//! expensive enough to evaluate that searching it matters.
//!
//! Genomes are plain `Copy` values with a canonical integer code
//! ([`Genome::code`]), which gives a stable total order for enumeration and
//! a compact key for caches and seed derivation.

use core::fmt;
use core::str::FromStr;

use rand::Rng;

/// Smallest allowed qubit count.
pub const MIN_QUBITS: u8 = 2;
/// Largest allowed qubit count (dense simulation stays tractable).
pub const MAX_QUBITS: u8 = 10;
/// Number of rotation-layer slots carried by every genome.
pub const LAYER_SLOTS: usize = 4;
/// Smallest allowed number of active layers.
pub const MIN_LAYERS: u8 = 1;
/// Largest allowed number of active layers.
pub const MAX_LAYERS: u8 = LAYER_SLOTS as u8;
/// Total number of distinct genomes.
pub const SPACE_SIZE: u64 = 9 * 2 * 81 * 2 * 2 * 4;

/// How classical features enter the circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Embedding {
    /// One feature per wire, written as a Y rotation of the |0> state.
    Angle,
    /// Features become the normalized amplitudes of the full state.
    Amplitude,
}

/// Single-qubit rotation family used by one layer slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateType {
    /// Rotation about the X axis.
    Rx,
    /// Rotation about the Y axis.
    Ry,
    /// Rotation about the Z axis.
    Rz,
}

/// Two-qubit gate used in the entangling rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntGate {
    /// Controlled-X.
    Cnot,
    /// Controlled-Z.
    Cz,
}

/// Which wire pairs each entangling round touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topology {
    /// Chain: (0,1), (1,2), ..., (n-2, n-1).
    Linear,
    /// Chain plus the closing pair (n-1, 0).
    Circular,
}

impl Embedding {
    /// All values, in canonical order.
    pub const ALL: [Embedding; 2] = [Embedding::Angle, Embedding::Amplitude];

    fn token(self) -> &'static str {
        match self {
            Embedding::Angle => "ANGLE",
            Embedding::Amplitude => "AMPLITUDE",
        }
    }
}

impl GateType {
    /// All values, in canonical order.
    pub const ALL: [GateType; 3] = [GateType::Rx, GateType::Ry, GateType::Rz];

    fn token(self) -> &'static str {
        match self {
            GateType::Rx => "RX",
            GateType::Ry => "RY",
            GateType::Rz => "RZ",
        }
    }
}

impl EntGate {
    /// All values, in canonical order.
    pub const ALL: [EntGate; 2] = [EntGate::Cnot, EntGate::Cz];

    fn token(self) -> &'static str {
        match self {
            EntGate::Cnot => "CNOT",
            EntGate::Cz => "CZ",
        }
    }
}

impl Topology {
    /// All values, in canonical order.
    pub const ALL: [Topology; 2] = [Topology::Linear, Topology::Circular];

    fn token(self) -> &'static str {
        match self {
            Topology::Linear => "LINEAR",
            Topology::Circular => "CIRCULAR",
        }
    }
}

/// Error returned when an enum token or a genome field is out of range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenomeError {
    /// A textual token did not match any enum value.
    UnknownToken,
    /// `n_qubits` outside `MIN_QUBITS..=MAX_QUBITS`.
    QubitsOutOfRange(u8),
    /// `n_layers` outside `MIN_LAYERS..=MAX_LAYERS`.
    LayersOutOfRange(u8),
}

impl fmt::Display for GenomeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenomeError::UnknownToken => write!(f, "unknown genome token"),
            GenomeError::QubitsOutOfRange(q) => write!(
                f,
                "n_qubits must be in {MIN_QUBITS}..={MAX_QUBITS}, got {q}"
            ),
            GenomeError::LayersOutOfRange(l) => write!(
                f,
                "n_layers must be in {MIN_LAYERS}..={MAX_LAYERS}, got {l}"
            ),
        }
    }
}

impl core::error::Error for GenomeError {}

macro_rules! token_impls {
    ($ty:ty) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.token())
            }
        }

        impl FromStr for $ty {
            type Err = GenomeError;

            fn from_str(s: &str) -> Result<Self, GenomeError> {
                <$ty>::ALL
                    .into_iter()
                    .find(|v| v.token() == s)
                    .ok_or(GenomeError::UnknownToken)
            }
        }
    };
}

token_impls!(Embedding);
token_impls!(GateType);
token_impls!(EntGate);
token_impls!(Topology);

/// One point of the search space.
///
/// All four `gate_types` slots are always populated; slots at index
/// `n_layers..` are carried along silently and only become active if a later
/// mutation raises `n_layers`. Variation operators treat the genome as nine
/// independent genes: the seven scalar fields plus each gate slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Genome {
    /// Circuit width, `2..=10`.
    pub n_qubits: u8,
    /// Input embedding.
    pub embedding: Embedding,
    /// Rotation family per layer slot.
    pub gate_types: [GateType; LAYER_SLOTS],
    /// Entangling gate.
    pub ent_gate: EntGate,
    /// Entanglement topology.
    pub topology: Topology,
    /// Active layers, `1..=4`.
    pub n_layers: u8,
}

/// Number of independently inherited genes.
pub const GENE_COUNT: usize = 9;

impl Genome {
    /// Draws a genome uniformly from the space.
    ///
    /// One draw per gene, in field order: qubits, embedding, the four gate
    /// slots, entangler, topology, layers.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Genome {
        Genome {
            n_qubits: rng.random_range(MIN_QUBITS..=MAX_QUBITS),
            embedding: Embedding::ALL[rng.random_range(0..Embedding::ALL.len())],
            gate_types: core::array::from_fn(|_| {
                GateType::ALL[rng.random_range(0..GateType::ALL.len())]
            }),
            ent_gate: EntGate::ALL[rng.random_range(0..EntGate::ALL.len())],
            topology: Topology::ALL[rng.random_range(0..Topology::ALL.len())],
            n_layers: rng.random_range(MIN_LAYERS..=MAX_LAYERS),
        }
    }

    /// Checks the two range-typed fields. Enum fields are valid by
    /// construction; this matters for genomes built from external input.
    pub fn validate(&self) -> Result<(), GenomeError> {
        if !(MIN_QUBITS..=MAX_QUBITS).contains(&self.n_qubits) {
            return Err(GenomeError::QubitsOutOfRange(self.n_qubits));
        }
        if !(MIN_LAYERS..=MAX_LAYERS).contains(&self.n_layers) {
            return Err(GenomeError::LayersOutOfRange(self.n_layers));
        }
        Ok(())
    }

    /// Canonical index of this genome in `0..SPACE_SIZE`.
    ///
    /// Mixed-radix encoding with the fields in declaration order, qubits
    /// most significant. Inverse of [`Genome::from_code`].
    pub fn code(&self) -> u64 {
        let mut c = (self.n_qubits - MIN_QUBITS) as u64;
        c = c * 2 + self.embedding as u64;
        for g in self.gate_types {
            c = c * 3 + g as u64;
        }
        c = c * 2 + self.ent_gate as u64;
        c = c * 2 + self.topology as u64;
        c * 4 + (self.n_layers - MIN_LAYERS) as u64
    }

    /// Genome with canonical index `code`.
    ///
    /// # Panics
    ///
    /// Panics if `code >= SPACE_SIZE`.
    pub fn from_code(code: u64) -> Genome {
        assert!(code < SPACE_SIZE, "genome code {code} out of range");
        let mut c = code;
        let n_layers = MIN_LAYERS + (c % 4) as u8;
        c /= 4;
        let topology = Topology::ALL[(c % 2) as usize];
        c /= 2;
        let ent_gate = EntGate::ALL[(c % 2) as usize];
        c /= 2;
        let mut gate_types = [GateType::Rx; LAYER_SLOTS];
        for slot in gate_types.iter_mut().rev() {
            *slot = GateType::ALL[(c % 3) as usize];
            c /= 3;
        }
        let embedding = Embedding::ALL[(c % 2) as usize];
        c /= 2;
        Genome {
            n_qubits: MIN_QUBITS + c as u8,
            embedding,
            gate_types,
            ent_gate,
            topology,
            n_layers,
        }
    }

    /// Uniform crossover: each of the nine genes comes from `self` or
    /// `other` with probability 1/2 (one bool draw per gene, field order).
    pub fn crossover<R: Rng + ?Sized>(&self, other: &Genome, rng: &mut R) -> Genome {
        #[inline]
        fn pick<T: Copy, R: Rng + ?Sized>(rng: &mut R, a: T, b: T) -> T {
            if rng.random::<bool>() {
                a
            } else {
                b
            }
        }
        let n_qubits = pick(rng, self.n_qubits, other.n_qubits);
        let embedding = pick(rng, self.embedding, other.embedding);
        let mut gate_types = [GateType::Rx; LAYER_SLOTS];
        for (i, slot) in gate_types.iter_mut().enumerate() {
            *slot = pick(rng, self.gate_types[i], other.gate_types[i]);
        }
        Genome {
            n_qubits,
            embedding,
            gate_types,
            ent_gate: pick(rng, self.ent_gate, other.ent_gate),
            topology: pick(rng, self.topology, other.topology),
            n_layers: pick(rng, self.n_layers, other.n_layers),
        }
    }

    /// Pointwise mutation: each gene is independently resampled from its
    /// full domain with probability `p_m` (one coin per gene, field order;
    /// a resample may redraw the current value).
    pub fn mutate<R: Rng + ?Sized>(&self, p_m: f64, rng: &mut R) -> Genome {
        let mut out = *self;
        if rng.random::<f64>() < p_m {
            out.n_qubits = rng.random_range(MIN_QUBITS..=MAX_QUBITS);
        }
        if rng.random::<f64>() < p_m {
            out.embedding = Embedding::ALL[rng.random_range(0..Embedding::ALL.len())];
        }
        for slot in out.gate_types.iter_mut() {
            if rng.random::<f64>() < p_m {
                *slot = GateType::ALL[rng.random_range(0..GateType::ALL.len())];
            }
        }
        if rng.random::<f64>() < p_m {
            out.ent_gate = EntGate::ALL[rng.random_range(0..EntGate::ALL.len())];
        }
        if rng.random::<f64>() < p_m {
            out.topology = Topology::ALL[rng.random_range(0..Topology::ALL.len())];
        }
        if rng.random::<f64>() < p_m {
            out.n_layers = rng.random_range(MIN_LAYERS..=MAX_LAYERS);
        }
        out
    }

    /// Wire pairs (control, target) of one entangling round.
    pub fn entangling_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n_qubits as usize;
        let count = match self.topology {
            Topology::Linear => n - 1,
            Topology::Circular => n,
        };
        (0..count).map(move |i| (i, (i + 1) % n))
    }
}

/// All genomes in canonical code order; yields exactly [`SPACE_SIZE`] items.
pub fn enumerate() -> impl Iterator<Item = Genome> {
    (0..SPACE_SIZE).map(Genome::from_code)
}
