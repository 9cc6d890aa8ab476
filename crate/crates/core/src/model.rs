//! The trainable hybrid classifier: linear layer, circuit, linear layer.
//!
//! A genome plus a task shape `(d_in, n_classes)` fixes the whole model. The
//! pre-layer maps the `d_in` standardized features to one value per wire,
//! the circuit turns those into `n_qubits` Z expectations, and the
//! post-layer maps the expectations to class logits. Training minimizes the
//! negative log-likelihood with Adam; the circuit block backpropagates
//! exactly through [`crate::qsim::CircuitRun::gradients`], so the whole
//! model trains end to end like any other differentiable network.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::Dataset;
use crate::fmath;
use crate::genome::{Genome, GenomeError, LAYER_SLOTS};
use crate::qsim::{CircuitRun, QsimError};
use crate::seed;

/// Hyperparameters for one training run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    /// Passes over the training set.
    pub epochs: usize,
    /// Mini-batch size; the last batch of an epoch may be smaller.
    pub batch_size: usize,
    /// Adam step size.
    pub learning_rate: f64,
    /// Adam first-moment decay.
    pub beta1: f64,
    /// Adam second-moment decay.
    pub beta2: f64,
    /// Adam denominator offset.
    pub epsilon: f64,
    /// Seed for weight init and batch shuffling. Callers that train many
    /// genomes should derive a distinct seed per genome.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            batch_size: 64,
            learning_rate: 3e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

/// Errors from model construction or training.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    /// The genome fails validation.
    Genome(GenomeError),
    /// Simulator rejected the circuit (bad theta length or wires).
    Qsim(QsimError),
    /// A sample's feature count does not match the model input width.
    InputWidth {
        /// Expected width.
        expected: usize,
        /// Actual width.
        got: usize,
    },
    /// A label is not below `n_classes`.
    LabelOutOfRange {
        /// The offending label.
        label: usize,
        /// Number of classes the model was built for.
        n_classes: usize,
    },
    /// A config field is out of its valid range.
    BadConfig(&'static str),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Genome(e) => write!(f, "{e}"),
            ModelError::Qsim(e) => write!(f, "{e}"),
            ModelError::InputWidth { expected, got } => {
                write!(f, "sample has {got} features, model expects {expected}")
            }
            ModelError::LabelOutOfRange { label, n_classes } => {
                write!(f, "label {label} out of range for {n_classes} classes")
            }
            ModelError::BadConfig(what) => write!(f, "invalid training config: {what}"),
        }
    }
}

impl core::error::Error for ModelError {}

impl From<GenomeError> for ModelError {
    fn from(e: GenomeError) -> Self {
        ModelError::Genome(e)
    }
}

impl From<QsimError> for ModelError {
    fn from(e: QsimError) -> Self {
        ModelError::Qsim(e)
    }
}

/// Trainable parameter count of the model a genome defines:
/// pre-layer `d_in * n + n`, circuit `4 * n`, post-layer `n * C + C`.
/// All four theta rows count whether or not the genome activates them.
pub fn param_count(genome: &Genome, d_in: usize, n_classes: usize) -> u64 {
    let n = genome.n_qubits as u64;
    let (d, c) = (d_in as u64, n_classes as u64);
    (d * n + n) + (LAYER_SLOTS as u64 * n) + (n * c + c)
}

/// Parameter layout inside the flat vector, in init order.
#[derive(Clone, Debug)]
struct Layout {
    pre_w: Range<usize>,
    pre_b: Range<usize>,
    theta: Range<usize>,
    post_w: Range<usize>,
    post_b: Range<usize>,
}

impl Layout {
    fn new(d_in: usize, n: usize, n_classes: usize) -> Layout {
        let mut at = 0;
        let mut next = |len: usize| {
            let r = at..at + len;
            at += len;
            r
        };
        Layout {
            pre_w: next(d_in * n),
            pre_b: next(n),
            theta: next(LAYER_SLOTS * n),
            post_w: next(n * n_classes),
            post_b: next(n_classes),
        }
    }

    fn len(&self) -> usize {
        self.post_b.end
    }
}

/// One hybrid model with its current parameters.
pub struct HybridModel {
    genome: Genome,
    d_in: usize,
    n_classes: usize,
    layout: Layout,
    /// All parameters, flat: pre_w (row-major by input feature), pre_b,
    /// theta (row-major by layer slot), post_w (row-major by wire), post_b.
    params: Vec<f64>,
}

/// Result of a forward pass, with the pieces backward needs. The circuit
/// input itself lives inside `run`.
struct Trace {
    input: Vec<f64>,
    run: CircuitRun,
    z: Vec<f64>,
    log_probs: Vec<f64>,
}

impl HybridModel {
    /// Builds a model with freshly initialized parameters.
    ///
    /// Linear weights and biases are uniform in (-1/sqrt(fan_in),
    /// 1/sqrt(fan_in)); circuit angles are uniform in [0, 2pi). Draws happen
    /// in flat parameter order, so a given rng state fixes the model.
    pub fn init<R: Rng + ?Sized>(
        genome: &Genome,
        d_in: usize,
        n_classes: usize,
        rng: &mut R,
    ) -> Result<HybridModel, ModelError> {
        genome.validate()?;
        if d_in == 0 {
            return Err(ModelError::BadConfig("d_in must be positive"));
        }
        if n_classes < 2 {
            return Err(ModelError::BadConfig("need at least two classes"));
        }
        let n = genome.n_qubits as usize;
        let layout = Layout::new(d_in, n, n_classes);
        let mut params = vec![0.0; layout.len()];

        let pre_bound = 1.0 / fmath::sqrt(d_in as f64);
        for p in &mut params[layout.pre_w.start..layout.pre_b.end] {
            *p = rng.random_range(-pre_bound..pre_bound);
        }
        for p in &mut params[layout.theta.clone()] {
            *p = rng.random_range(0.0..core::f64::consts::TAU);
        }
        let post_bound = 1.0 / fmath::sqrt(n as f64);
        for p in &mut params[layout.post_w.start..layout.post_b.end] {
            *p = rng.random_range(-post_bound..post_bound);
        }

        Ok(HybridModel {
            genome: *genome,
            d_in,
            n_classes,
            layout,
            params,
        })
    }

    /// The genome this model realizes.
    pub fn genome(&self) -> &Genome {
        &self.genome
    }

    /// Number of trainable parameters.
    pub fn param_count(&self) -> u64 {
        self.params.len() as u64
    }

    /// All parameters as one flat slice: pre_w, pre_b, theta, post_w,
    /// post_b.
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Mutable view of the flat parameter vector, for optimizers and
    /// perturbation tests.
    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn pre_w(&self) -> &[f64] {
        &self.params[self.layout.pre_w.clone()]
    }

    fn pre_b(&self) -> &[f64] {
        &self.params[self.layout.pre_b.clone()]
    }

    fn theta(&self) -> &[f64] {
        &self.params[self.layout.theta.clone()]
    }

    fn post_w(&self) -> &[f64] {
        &self.params[self.layout.post_w.clone()]
    }

    fn post_b(&self) -> &[f64] {
        &self.params[self.layout.post_b.clone()]
    }

    fn trace(&self, x: &[f64]) -> Result<Trace, ModelError> {
        if x.len() != self.d_in {
            return Err(ModelError::InputWidth {
                expected: self.d_in,
                got: x.len(),
            });
        }
        let n = self.genome.n_qubits as usize;
        let (w1, b1) = (self.pre_w(), self.pre_b());
        let mut pre_out = b1.to_vec();
        for (i, &xi) in x.iter().enumerate() {
            for (j, out) in pre_out.iter_mut().enumerate() {
                *out += xi * w1[i * n + j];
            }
        }

        let run = CircuitRun::new(&self.genome, self.theta(), &pre_out)?;
        let z = run.outputs();

        let (w2, b2) = (self.post_w(), self.post_b());
        let mut logits = b2.to_vec();
        for (j, &zj) in z.iter().enumerate() {
            for (k, out) in logits.iter_mut().enumerate() {
                *out += zj * w2[j * self.n_classes + k];
            }
        }

        let log_probs = log_softmax(&logits);
        Ok(Trace {
            input: x.to_vec(),
            run,
            z,
            log_probs,
        })
    }

    /// Log class probabilities for one sample.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        Ok(self.trace(x)?.log_probs)
    }

    /// Predicted class: argmax of the log probabilities, lowest index on
    /// ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize, ModelError> {
        Ok(argmax(&self.forward(x)?))
    }

    /// Adds this sample's loss gradient into `grad` (same layout as the
    /// parameters) and returns its negative log-likelihood.
    fn accumulate_gradients(
        &self,
        x: &[f64],
        label: usize,
        grad: &mut [f64],
    ) -> Result<f64, ModelError> {
        if label >= self.n_classes {
            return Err(ModelError::LabelOutOfRange {
                label,
                n_classes: self.n_classes,
            });
        }
        let t = self.trace(x)?;
        let n = self.genome.n_qubits as usize;
        let c = self.n_classes;

        // d(nll)/d(logit_k) = softmax_k - 1[k == label]
        let mut dlogits: Vec<f64> = t.log_probs.iter().map(|&lp| fmath::exp(lp)).collect();
        dlogits[label] -= 1.0;

        let (post_w_range, post_b_range) = (self.layout.post_w.clone(), self.layout.post_b.clone());
        for (j, &zj) in t.z.iter().enumerate() {
            for (k, &dl) in dlogits.iter().enumerate() {
                grad[post_w_range.start + j * c + k] += zj * dl;
            }
        }
        for (k, &dl) in dlogits.iter().enumerate() {
            grad[post_b_range.start + k] += dl;
        }

        let w2 = self.post_w();
        let mut dz = vec![0.0; n];
        for (j, dzj) in dz.iter_mut().enumerate() {
            for (k, &dl) in dlogits.iter().enumerate() {
                *dzj += w2[j * c + k] * dl;
            }
        }

        let circuit_grads = t.run.gradients(&dz)?;
        let theta_start = self.layout.theta.start;
        for (i, g) in circuit_grads.theta.iter().enumerate() {
            grad[theta_start + i] += g;
        }

        let (pre_w_range, pre_b_range) = (self.layout.pre_w.clone(), self.layout.pre_b.clone());
        for (i, &xi) in t.input.iter().enumerate() {
            for (j, &du) in circuit_grads.input.iter().enumerate() {
                grad[pre_w_range.start + i * n + j] += xi * du;
            }
        }
        for (j, &du) in circuit_grads.input.iter().enumerate() {
            grad[pre_b_range.start + j] += du;
        }

        Ok(-t.log_probs[label])
    }

    /// Negative log-likelihood of one labeled sample and its gradient with
    /// respect to every parameter, in flat layout.
    pub fn loss_gradient(&self, x: &[f64], label: usize) -> Result<(f64, Vec<f64>), ModelError> {
        let mut grad = vec![0.0; self.params.len()];
        let loss = self.accumulate_gradients(x, label, &mut grad)?;
        Ok((loss, grad))
    }

    /// Fraction of samples whose predicted class matches, over a row-major
    /// feature buffer. Samples the model cannot embed count as wrong.
    pub fn accuracy(&self, x: &[f64], y: &[usize]) -> f64 {
        if y.is_empty() {
            return 0.0;
        }
        let d = self.d_in;
        let correct = y
            .iter()
            .enumerate()
            .filter(|(i, &label)| {
                self.predict(&x[i * d..(i + 1) * d])
                    .map(|p| p == label)
                    .unwrap_or(false)
            })
            .count();
        correct as f64 / y.len() as f64
    }
}

/// Numerically stable log-softmax.
fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|&l| fmath::exp(l - max)).sum();
    let lse = max + fmath::ln(sum);
    logits.iter().map(|&l| l - lse).collect()
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Adam with bias correction over one flat parameter vector.
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    fn new(len: usize) -> Adam {
        Adam {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &TrainConfig) {
        self.t += 1;
        let bc1 = 1.0 - fmath::powi(cfg.beta1, self.t as i32);
        let bc2 = 1.0 - fmath::powi(cfg.beta2, self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * g;
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= cfg.learning_rate * m_hat / (fmath::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

/// What one training run produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainReport {
    /// Best validation accuracy seen after any epoch.
    pub best_val_accuracy: f64,
    /// 1-based epoch that reached it (earliest on ties).
    pub best_epoch: usize,
    /// Mean training loss of the final epoch.
    pub final_train_loss: f64,
    /// Training samples skipped because their embedding was degenerate.
    pub skipped_samples: u64,
    /// Trainable parameter count of the model.
    pub param_count: u64,
}

fn validate_config(cfg: &TrainConfig) -> Result<(), ModelError> {
    if cfg.epochs == 0 {
        return Err(ModelError::BadConfig("epochs must be at least 1"));
    }
    if cfg.batch_size == 0 {
        return Err(ModelError::BadConfig("batch size must be at least 1"));
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(ModelError::BadConfig("learning rate must be positive"));
    }
    if !(0.0..1.0).contains(&cfg.beta1) || !(0.0..1.0).contains(&cfg.beta2) {
        return Err(ModelError::BadConfig("Adam betas must be in [0, 1)"));
    }
    if cfg.epsilon <= 0.0 || cfg.epsilon.is_nan() {
        return Err(ModelError::BadConfig("Adam epsilon must be positive"));
    }
    Ok(())
}

/// Trains the model a genome defines and reports its best validation
/// accuracy.
///
/// Runs `cfg.epochs` passes of shuffled mini-batch NLL minimization with
/// Adam, evaluating validation accuracy after every epoch. The whole run is
/// a deterministic function of (genome, data, cfg): init and shuffling come
/// from one ChaCha8 stream seeded by `cfg.seed`. Training samples whose
/// embedding is degenerate (an all-zero amplitude input) are skipped and
/// counted; validation samples that fail to embed count as misclassified.
pub fn train_genome(
    genome: &Genome,
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<TrainReport, ModelError> {
    validate_config(cfg)?;
    if let Some(&label) = data
        .train_y
        .iter()
        .chain(data.val_y.iter())
        .find(|&&l| l >= data.n_classes)
    {
        return Err(ModelError::LabelOutOfRange {
            label,
            n_classes: data.n_classes,
        });
    }

    let mut rng = seed::stream_rng(cfg.seed, &[seed::STREAM_TRAINING]);
    let mut model = HybridModel::init(genome, data.n_features, data.n_classes, &mut rng)?;
    let mut adam = Adam::new(model.params.len());
    let mut grad = vec![0.0; model.params.len()];

    let mut best_val_accuracy = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut final_train_loss = 0.0;
    let mut skipped_samples = 0u64;

    let mut order: Vec<usize> = (0..data.n_train()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut epoch_samples = 0usize;

        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut used = 0usize;
            let mut batch_loss = 0.0;
            for &i in batch {
                match model.accumulate_gradients(data.train_row(i), data.train_y[i], &mut grad) {
                    Ok(loss) => {
                        batch_loss += loss;
                        used += 1;
                    }
                    Err(ModelError::Qsim(QsimError::DegenerateInput)) => {
                        skipped_samples += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
            if used == 0 {
                continue;
            }
            let inv = 1.0 / used as f64;
            grad.iter_mut().for_each(|g| *g *= inv);
            adam.step(&mut model.params, &grad, cfg);
            epoch_loss += batch_loss;
            epoch_samples += used;
        }

        if epoch == cfg.epochs {
            final_train_loss = if epoch_samples > 0 {
                epoch_loss / epoch_samples as f64
            } else {
                f64::INFINITY
            };
        }

        let val_accuracy = model.accuracy(&data.val_x, &data.val_y);
        if val_accuracy > best_val_accuracy {
            best_val_accuracy = val_accuracy;
            best_epoch = epoch;
        }
    }

    Ok(TrainReport {
        best_val_accuracy,
        best_epoch,
        final_train_loss,
        skipped_samples,
        param_count: model.param_count(),
    })
}
