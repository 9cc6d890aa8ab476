//! Textual genome interchange: one fixed CSV column set and a matching
//! JSON object shape, both using uppercase enum tokens.

use anyhow::{bail, Context, Result};
use qpareto_core::genome::{Embedding, EntGate, GateType, Genome, Topology};
use serde::{Deserialize, Serialize};

/// The genome columns every CSV output shares, in order.
pub const GENOME_COLUMNS: &str =
    "n_qubits,embedding,gate0,gate1,gate2,gate3,ent_gate,topology,n_layers";

/// Serializable genome with the same field names as the CSV columns.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GenomeRecord {
    pub n_qubits: u8,
    pub embedding: String,
    pub gate0: String,
    pub gate1: String,
    pub gate2: String,
    pub gate3: String,
    pub ent_gate: String,
    pub topology: String,
    pub n_layers: u8,
}

impl From<&Genome> for GenomeRecord {
    fn from(g: &Genome) -> Self {
        GenomeRecord {
            n_qubits: g.n_qubits,
            embedding: g.embedding.to_string(),
            gate0: g.gate_types[0].to_string(),
            gate1: g.gate_types[1].to_string(),
            gate2: g.gate_types[2].to_string(),
            gate3: g.gate_types[3].to_string(),
            ent_gate: g.ent_gate.to_string(),
            topology: g.topology.to_string(),
            n_layers: g.n_layers,
        }
    }
}

impl TryFrom<&GenomeRecord> for Genome {
    type Error = anyhow::Error;

    fn try_from(r: &GenomeRecord) -> Result<Genome> {
        let gate = |s: &str| -> Result<GateType> {
            s.parse().with_context(|| format!("bad gate token {s:?}"))
        };
        let genome = Genome {
            n_qubits: r.n_qubits,
            embedding: r
                .embedding
                .parse::<Embedding>()
                .with_context(|| format!("bad embedding token {:?}", r.embedding))?,
            gate_types: [
                gate(&r.gate0)?,
                gate(&r.gate1)?,
                gate(&r.gate2)?,
                gate(&r.gate3)?,
            ],
            ent_gate: r
                .ent_gate
                .parse::<EntGate>()
                .with_context(|| format!("bad entangler token {:?}", r.ent_gate))?,
            topology: r
                .topology
                .parse::<Topology>()
                .with_context(|| format!("bad topology token {:?}", r.topology))?,
            n_layers: r.n_layers,
        };
        genome.validate()?;
        Ok(genome)
    }
}

/// The nine genome CSV fields of one row, joined with commas.
pub fn genome_csv_fields(g: &Genome) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        g.n_qubits,
        g.embedding,
        g.gate_types[0],
        g.gate_types[1],
        g.gate_types[2],
        g.gate_types[3],
        g.ent_gate,
        g.topology,
        g.n_layers
    )
}

/// Parses the nine genome fields from the front of a comma-split row.
pub fn parse_genome_fields(fields: &[&str]) -> Result<Genome> {
    if fields.len() < 9 {
        bail!(
            "genome row has {} fields, expected at least 9",
            fields.len()
        );
    }
    let record = GenomeRecord {
        n_qubits: fields[0]
            .parse()
            .with_context(|| format!("bad n_qubits {:?}", fields[0]))?,
        embedding: fields[1].to_string(),
        gate0: fields[2].to_string(),
        gate1: fields[3].to_string(),
        gate2: fields[4].to_string(),
        gate3: fields[5].to_string(),
        ent_gate: fields[6].to_string(),
        topology: fields[7].to_string(),
        n_layers: fields[8]
            .parse()
            .with_context(|| format!("bad n_layers {:?}", fields[8]))?,
    };
    Genome::try_from(&record)
}
