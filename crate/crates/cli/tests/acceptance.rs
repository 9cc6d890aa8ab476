//! End-to-end acceptance checks, one test per criterion. Each test prints a
//! single `criterion N: PASS` line with the measured values (visible under
//! `--nocapture`); the test harness itself reports one ok/FAILED line per
//! criterion either way.
//!
//! The two search runs share fixtures: iris backs criteria 5 and 8, digits
//! backs criteria 6 and 7. Both pin population 20, 8 generations, seed 42,
//! and a 0.05 learning rate: the CLI's default 3e-3 is sized for bigger
//! training budgets and starves the optimizer at this scale (iris trains
//! for only 10 Adam steps per candidate), which would drag every candidate
//! toward chance accuracy.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use qpareto_cli::config::RunConfig;
use qpareto_cli::genome_io::parse_genome_fields;
use qpareto_cli::run::execute_run;
use qpareto_core::genome::{Embedding, EntGate, GateType, Topology, LAYER_SLOTS, SPACE_SIZE};
use qpareto_core::model::HybridModel;
use qpareto_core::nsga::{
    fast_non_dominated_sort, run_search, Evaluation, Individual, Objectives, SearchConfig,
};
use qpareto_core::qsim::{amplitude_embedding, angle_embedding, CircuitRun};
use qpareto_core::seed::stream_rng;
use qpareto_core::Genome;
use rand::Rng;

/// Learning rate for the desk-scale searches (see module docs).
const DESK_LEARNING_RATE: f64 = 0.05;
/// Accuracy floor the iris front must reach.
const IRIS_ACCURACY_FLOOR: f64 = 0.85;
/// Accuracy floor the digits front must reach.
const DIGITS_ACCURACY_FLOOR: f64 = 0.90;
/// Absolute tolerance between adjoint and parameter-shift theta gradients.
const SHIFT_TOL: f64 = 1e-7;
/// Relative tolerance between analytic and finite-difference gradients.
const FDIFF_REL_TOL: f64 = 1e-4;
/// Gradient magnitude below which the comparison switches to absolute.
const FDIFF_ABS_FLOOR: f64 = 1e-7;
/// Norm preservation tolerance over randomized circuits.
const NORM_TOL: f64 = 1e-9;
/// Unitarity round-trip tolerance (max amplitude difference).
const UNITARITY_TOL: f64 = 1e-12;

fn repo_data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn desk_config(dataset: &str, out: PathBuf) -> RunConfig {
    RunConfig {
        dataset: dataset.to_string(),
        data_dir: repo_data_dir(),
        out,
        seed: 42,
        pop_size: 20,
        generations: 8,
        pc: 0.8,
        pm: 0.2,
        stagnation: 2,
        epochs: 5,
        batch_size: 64,
        lr: DESK_LEARNING_RATE,
        top_k: 5,
        parallelism: 1,
    }
}

struct SearchRun {
    out: PathBuf,
    duration: Duration,
}

fn run_desk_search(dataset: &str, out_name: &str) -> SearchRun {
    let out = scratch_dir(out_name);
    let cfg = desk_config(dataset, out.clone());
    let start = Instant::now();
    execute_run(&cfg).expect("search run succeeds");
    SearchRun {
        out,
        duration: start.elapsed(),
    }
}

fn iris_run() -> &'static SearchRun {
    static RUN: OnceLock<SearchRun> = OnceLock::new();
    RUN.get_or_init(|| run_desk_search("iris", "acceptance_iris"))
}

fn digits_run() -> &'static SearchRun {
    static RUN: OnceLock<SearchRun> = OnceLock::new();
    RUN.get_or_init(|| run_desk_search("digits", "acceptance_digits"))
}

/// Best-front accuracies from a run's pareto.json.
fn front_accuracies(out: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(out.join("pareto.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["front"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["best_val_acc"].as_f64().unwrap())
        .collect()
}

#[test]
fn criterion_1_design_space_census() {
    let start = Instant::now();
    let out = scratch_dir("acceptance_census");
    std::fs::create_dir_all(&out).unwrap();
    let csv = out.join("space.csv");
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_qpareto"))
        .args(["enumerate", "--dataset", "iris", "--out"])
        .arg(&csv)
        .output()
        .expect("binary runs");
    assert!(output.status.success());

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut codes = HashSet::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let genome = parse_genome_fields(&fields).expect("census rows are valid genomes");
        codes.insert(genome.code());
    }
    let elapsed = start.elapsed();
    assert_eq!(codes.len() as u64, SPACE_SIZE);
    assert_eq!(text.lines().count() as u64, SPACE_SIZE + 1);
    assert!(
        elapsed < Duration::from_secs(10),
        "census took {elapsed:?}, budget 10s"
    );
    println!(
        "criterion 1: PASS - enumerate wrote {} distinct genomes in {elapsed:?}",
        codes.len()
    );
}

/// 50 genomes with n_qubits <= 4 covering every embedding, gate family,
/// entangler, and topology, plus the index of the first active layer slot
/// using each gate family (for the coverage assertion).
fn gradient_check_genomes() -> Vec<Genome> {
    let mut rng = stream_rng(0xACCE97, &[1]);
    let mut picked = Vec::new();
    while picked.len() < 50 {
        let g = Genome::sample(&mut rng);
        if g.n_qubits <= 4 {
            picked.push(g);
        }
    }
    let mut embeddings = HashSet::new();
    let mut gates = HashSet::new();
    let mut ents = HashSet::new();
    let mut topos = HashSet::new();
    for g in &picked {
        embeddings.insert(g.embedding);
        ents.insert(g.ent_gate);
        topos.insert(g.topology);
        for slot in 0..g.n_layers as usize {
            gates.insert(g.gate_types[slot]);
        }
    }
    assert_eq!(
        embeddings.len(),
        Embedding::ALL.len(),
        "both embeddings drawn"
    );
    assert_eq!(gates.len(), GateType::ALL.len(), "all gate families active");
    assert_eq!(ents.len(), EntGate::ALL.len(), "both entanglers drawn");
    assert_eq!(topos.len(), Topology::ALL.len(), "both topologies drawn");
    picked
}

#[test]
fn criterion_2_gradient_correctness() {
    let start = Instant::now();
    let genomes = gradient_check_genomes();
    let (d_in, n_classes) = (5usize, 3usize);
    let mut rng = stream_rng(0xACCE97, &[2]);
    let mut max_rel = 0.0f64;
    let mut max_shift = 0.0f64;

    for genome in &genomes {
        let n = genome.n_qubits as usize;

        // End-to-end: analytic loss gradient vs central finite differences.
        let mut model = HybridModel::init(genome, d_in, n_classes, &mut rng).unwrap();
        let x: Vec<f64> = (0..d_in).map(|_| rng.random_range(-1.5..1.5)).collect();
        let label = rng.random_range(0..n_classes);
        let (_, analytic) = model.loss_gradient(&x, label).unwrap();
        let h = 1e-5;
        for (i, &a) in analytic.iter().enumerate() {
            let orig = model.params()[i];
            model.params_mut()[i] = orig + h;
            let (plus, _) = model.loss_gradient(&x, label).unwrap();
            model.params_mut()[i] = orig - h;
            let (minus, _) = model.loss_gradient(&x, label).unwrap();
            model.params_mut()[i] = orig;
            let fd = (plus - minus) / (2.0 * h);
            let scale = a.abs().max(fd.abs());
            let diff = (a - fd).abs();
            if scale > FDIFF_ABS_FLOOR {
                let rel = diff / scale;
                max_rel = max_rel.max(rel);
                assert!(
                    rel <= FDIFF_REL_TOL,
                    "param {i} of genome {}: analytic {a} vs fd {fd}",
                    genome.code()
                );
            } else {
                assert!(
                    diff <= FDIFF_ABS_FLOOR,
                    "param {i}: tiny gradients disagree"
                );
            }
        }

        // Simulator level: adjoint theta gradients vs the parameter-shift
        // rule, which is exact for rotation gates.
        let theta: Vec<f64> = (0..LAYER_SLOTS * n)
            .map(|_| rng.random_range(0.0..core::f64::consts::TAU))
            .collect();
        let input: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let upstream: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let weighted = |theta: &[f64]| -> f64 {
            CircuitRun::new(genome, theta, &input)
                .unwrap()
                .outputs()
                .iter()
                .zip(&upstream)
                .map(|(z, w)| z * w)
                .sum()
        };
        let adjoint = CircuitRun::new(genome, &theta, &input)
            .unwrap()
            .gradients(&upstream)
            .unwrap();
        for i in 0..theta.len() {
            let mut shifted = theta.clone();
            shifted[i] += core::f64::consts::FRAC_PI_2;
            let plus = weighted(&shifted);
            shifted[i] = theta[i] - core::f64::consts::FRAC_PI_2;
            let minus = weighted(&shifted);
            let shift = (plus - minus) / 2.0;
            let diff = (adjoint.theta[i] - shift).abs();
            max_shift = max_shift.max(diff);
            assert!(
                diff <= SHIFT_TOL,
                "theta {i} of genome {}: adjoint {} vs shift {shift}",
                genome.code(),
                adjoint.theta[i]
            );
        }
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(120),
        "gradient checks took {elapsed:?}, budget 2min"
    );
    println!(
        "criterion 2: PASS - 50 models, max fd relative error {max_rel:.2e} (tol {FDIFF_REL_TOL:.0e}), \
         max shift deviation {max_shift:.2e} (tol {SHIFT_TOL:.0e}), {elapsed:?}"
    );
}

/// Non-dominated fronts by repeated peeling: a member of the remaining set
/// joins the current front iff nothing else remaining dominates it.
fn oracle_fronts(pop: &[Individual]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..pop.len()).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| {
                !remaining
                    .iter()
                    .any(|&j| pop[j].objectives.dominates(&pop[i].objectives))
            })
            .collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

#[test]
fn criterion_3_sorting_matches_dominance_oracle() {
    let start = Instant::now();
    let mut rng = stream_rng(0xACCE97, &[3]);
    for case in 0..200 {
        let size = rng.random_range(1..=64);
        let mut pop: Vec<Individual> = (0..size)
            .map(|_| Individual {
                genome: Genome::from_code(rng.random_range(0..SPACE_SIZE)),
                objectives: Objectives {
                    // Small ranges force plenty of ties and duplicates.
                    f_quantum: rng.random_range(0..6u64),
                    error: rng.random_range(0..6u32) as f64 / 5.0,
                    params: rng.random_range(0..6u64),
                },
                failed: false,
                rank: 0,
                crowding: 0.0,
            })
            .collect();
        let expected = oracle_fronts(&pop);
        let actual = fast_non_dominated_sort(&mut pop);
        assert_eq!(actual, expected, "case {case} partition mismatch");
        for (rank, front) in expected.iter().enumerate() {
            for &i in front {
                assert_eq!(pop[i].rank, rank, "case {case} rank of {i}");
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(30),
        "oracle comparison took {elapsed:?}, budget 30s"
    );
    println!("criterion 3: PASS - 200 populations partitioned identically, {elapsed:?}");
}

#[test]
fn criterion_4_simulator_invariants() {
    let start = Instant::now();
    let mut rng = stream_rng(0xACCE97, &[4]);
    for case in 0..1000 {
        let genome = Genome::sample(&mut rng);
        let n = genome.n_qubits as usize;
        let theta: Vec<f64> = (0..LAYER_SLOTS * n)
            .map(|_| rng.random_range(-7.0..7.0))
            .collect();
        let input: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();

        let run = CircuitRun::new(&genome, &theta, &input).unwrap();
        let norm = run.final_state().norm_sqr();
        assert!(
            (norm - 1.0).abs() <= NORM_TOL,
            "case {case}: norm {norm} drifted"
        );
        for z in run.outputs() {
            assert!(
                (-1.0..=1.0).contains(&z),
                "case {case}: <Z> {z} out of range"
            );
        }

        // Unitarity round-trip: apply every gate, then the inverse circuit,
        // and compare amplitudes with the embedded state.
        let embedded = match genome.embedding {
            Embedding::Angle => angle_embedding(&input, n).unwrap(),
            Embedding::Amplitude => amplitude_embedding(&input, n).unwrap(),
        };
        let mut state = embedded.clone();
        let layers = genome.n_layers as usize;
        for layer in 0..layers {
            for wire in 0..n {
                state
                    .apply_rotation(genome.gate_types[layer], wire, theta[layer * n + wire])
                    .unwrap();
            }
            for (c, t) in genome.entangling_pairs() {
                state.apply_entangler(genome.ent_gate, c, t).unwrap();
            }
        }
        for layer in (0..layers).rev() {
            // Both entanglers are their own inverse, but chained CNOTs do
            // not commute, so the pair sequence must unwind in reverse.
            // Rotations invert by negating the angle.
            let pairs: Vec<(usize, usize)> = genome.entangling_pairs().collect();
            for &(c, t) in pairs.iter().rev() {
                state.apply_entangler(genome.ent_gate, c, t).unwrap();
            }
            for wire in 0..n {
                state
                    .apply_rotation(genome.gate_types[layer], wire, -theta[layer * n + wire])
                    .unwrap();
            }
        }
        let max_diff = state
            .amplitudes()
            .iter()
            .zip(embedded.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr().sqrt())
            .fold(0.0f64, f64::max);
        assert!(
            max_diff <= UNITARITY_TOL,
            "case {case}: round-trip drift {max_diff}"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(60),
        "invariant sweep took {elapsed:?}, budget 1min"
    );
    println!("criterion 4: PASS - 1000 circuits kept norm, bounds, and unitarity, {elapsed:?}");
}

#[test]
fn criterion_5_desk_scale_iris_search() {
    let run = iris_run();
    let accs = front_accuracies(&run.out);
    let best = accs.iter().copied().fold(0.0f64, f64::max);
    assert!(
        run.duration < Duration::from_secs(600),
        "iris search took {:?}, budget 10min",
        run.duration
    );
    assert!(
        best >= IRIS_ACCURACY_FLOOR,
        "best front accuracy {best} below {IRIS_ACCURACY_FLOOR}"
    );
    println!(
        "criterion 5: PASS - iris front of {} reaches accuracy {best:.4} in {:?}",
        accs.len(),
        run.duration
    );
}

#[test]
fn criterion_6_desk_scale_digits_search() {
    let run = digits_run();
    let accs = front_accuracies(&run.out);
    let best = accs.iter().copied().fold(0.0f64, f64::max);
    assert!(
        run.duration < Duration::from_secs(45 * 60),
        "digits search took {:?}, budget 45min",
        run.duration
    );
    assert!(
        best >= DIGITS_ACCURACY_FLOOR,
        "best front accuracy {best} below {DIGITS_ACCURACY_FLOOR}"
    );
    println!(
        "criterion 6: PASS - digits front of {} reaches accuracy {best:.4} in {:?}",
        accs.len(),
        run.duration
    );
}

#[test]
fn criterion_7_flops_trend_in_digits_scatter() {
    let run = digits_run();
    let text = std::fs::read_to_string(run.out.join("scatter.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|&h| h == name).unwrap();
    let (acc_col, fq_col, fc_col, nq_col) = (
        col("best_val_acc"),
        col("f_quantum"),
        col("f_classical"),
        col("n_qubits"),
    );

    let mut cheapest_accurate: Option<u64> = None;
    let mut classical_by_qubits: Vec<(u64, u64)> = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let acc: f64 = fields[acc_col].parse().unwrap();
        let fq: u64 = fields[fq_col].parse().unwrap();
        let fc: u64 = fields[fc_col].parse().unwrap();
        let nq: u64 = fields[nq_col].parse().unwrap();
        if acc >= DIGITS_ACCURACY_FLOOR {
            cheapest_accurate = Some(cheapest_accurate.map_or(fq, |c| c.min(fq)));
        }
        classical_by_qubits.push((nq, fc));
    }

    // Quantum cost varies across the whole design space; an accurate
    // architecture exists well below the census maximum.
    let census_max = (0..SPACE_SIZE)
        .map(|code| qpareto_core::flops::quantum_flops(&Genome::from_code(code)))
        .max()
        .unwrap();
    let cheapest = cheapest_accurate.expect("criterion 6 guarantees an accurate candidate");
    assert!(
        cheapest < census_max,
        "cheapest accurate candidate ({cheapest}) not below census max ({census_max})"
    );

    // Classical cost is a function of qubit count alone on a fixed dataset.
    for (nq, fc) in &classical_by_qubits {
        let first = classical_by_qubits
            .iter()
            .find(|(other, _)| other == nq)
            .unwrap()
            .1;
        assert_eq!(*fc, first, "f_classical varies within n_qubits {nq}");
    }

    println!(
        "criterion 7: PASS - accurate candidate at {cheapest} quantum flops vs census max \
         {census_max}; f_classical constant within each qubit count"
    );
}

#[test]
fn criterion_8_identical_configs_reproduce_bytes() {
    let first = iris_run();
    let second = run_desk_search("iris", "acceptance_iris_repeat");
    for file in ["generations.csv", "pareto.json", "scatter.csv"] {
        let a = std::fs::read(first.out.join(file)).unwrap();
        let b = std::fs::read(second.out.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    println!("criterion 8: PASS - generations.csv, pareto.json, scatter.csv byte-identical");
}

#[test]
fn criterion_9_stagnation_stops_the_search() {
    let cfg = SearchConfig {
        pop_size: 12,
        generations: 8,
        stagnation_patience: 2,
        seed: 5,
        ..SearchConfig::default()
    };
    // Constant objectives: the front never changes, so the run must stop
    // after patience generations, having observed patience + 1 fronts.
    let result = run_search(&cfg, |genomes| {
        genomes
            .iter()
            .map(|_| Evaluation {
                objectives: Objectives {
                    f_quantum: 100,
                    error: 0.5,
                    params: 10,
                },
                failed: false,
            })
            .collect()
    })
    .unwrap();
    assert!(result.stopped_early);
    assert_eq!(result.generations_executed, cfg.stagnation_patience);
    assert_eq!(result.front_history.len(), cfg.stagnation_patience + 1);
    assert!(result.generations_executed < cfg.generations);
    println!(
        "criterion 9: PASS - constant evaluator stopped after {} generations ({} fronts observed)",
        result.generations_executed,
        result.front_history.len()
    );
}
