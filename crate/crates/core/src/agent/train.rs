//! Training loop, greedy evaluation policy and model files.

use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::codec::ActionCodec;
use crate::agent::qnet::{Adam, QNetwork};
use crate::agent::replay::{ReplayBuffer, Transition};
use crate::agent::reward::compute_reward;
use crate::agent::state::{encode_state, CppState};
use crate::cache::{Budgets, CacheState, PlacementContext, PlacementPolicy, RequestHistory};
use crate::config::SimConfig;
use crate::content::{ContentId, ContentLibrary, CvPreferenceState, RequestStream};
use crate::error::{Error, Result};
use crate::rng::{child_seed, substream, SimRng, AGENT, REQUESTS};

/// Epsilon-greedy choice; greedy ties go to the lowest index.
pub fn select_action(q: &[f64], epsilon: f64, rng: &mut SimRng) -> usize {
    let explore = rng.random::<f64>() < epsilon;
    if explore {
        return rng.random_range(0..q.len());
    }
    argmax(q)
}

pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate() {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// One gradient step on a sampled batch. Returns the batch loss.
pub fn train_step(online: &mut QNetwork, target: &QNetwork, adam: &mut Adam, batch: &[&Transition], gamma: f64) -> Result<f64> {
    let dim = online.input_dim();
    let n = batch.len();
    let mut x = Array2::zeros((n, dim));
    let mut x_next = Array2::zeros((n, dim));
    for (i, t) in batch.iter().enumerate() {
        x.row_mut(i).assign(&ndarray::ArrayView1::from(&t.state));
        x_next.row_mut(i).assign(&ndarray::ArrayView1::from(&t.next_state));
    }
    let q_next = target.forward_batch(x_next.view());
    let targets: Vec<f64> = batch
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if t.done {
                t.reward
            } else {
                t.reward + gamma * q_next.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        })
        .collect();
    let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
    let (loss, grads) = online.loss_and_gradients(x.view(), &actions, &targets);
    if !loss.is_finite() {
        let worst = targets.iter().copied().fold(0.0f64, |a, b| a.max(b.abs()));
        return Err(Error::Training(format!("non-finite loss {loss} (step {}, max |target| {worst})", adam.step)));
    }
    adam.apply(online, &grads);
    Ok(loss)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub epoch: usize,
    pub epsilon: f64,
    /// Mean reward per DoI over the episode.
    pub mean_return: f64,
    /// Mean training loss of the episode, if any step ran.
    pub loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub net: QNetwork,
    pub curve: Vec<CurvePoint>,
    pub fingerprint: String,
    pub train_steps: usize,
}

/// Identifies the environment shape a model was trained for.
pub fn model_fingerprint(cfg: &SimConfig) -> String {
    format!(
        "U{}-C{}-F{}-k{}-L{}",
        cfg.num_cvs,
        cfg.num_classes,
        cfg.contents_per_class,
        cfg.per_class_budget(),
        cfg.cache_size_units
    )
}

fn layer_dims(cfg: &SimConfig, codec: &ActionCodec) -> Vec<usize> {
    let mut dims = vec![CppState::flat_len(cfg.num_cvs, cfg.num_classes, cfg.contents_per_class)];
    dims.extend(&cfg.agent.hidden);
    dims.push(codec.len());
    dims
}

/// Runs the training episodes. The caching environment needs no radio:
/// requests are served from the cache or not, and the reward depends only on
/// that.
pub fn train_cpp(
    cfg: &SimConfig,
    lib: &ContentLibrary,
    population: &[CvPreferenceState],
    root_seed: u64,
) -> Result<TrainingRun> {
    cfg.validate()?;
    let a = &cfg.agent;
    let budgets = Budgets::from_config(cfg)?;
    let codec = ActionCodec::new(budgets)?;
    let k = budgets.per_class_units;
    let mut rng = substream(root_seed, AGENT);
    let mut online = QNetwork::new(&layer_dims(cfg, &codec), &mut rng)?;
    let mut target = online.clone();
    let mut adam = Adam::new(&online, a.learning_rate);
    let mut buffer = ReplayBuffer::new(a.buffer_capacity)?;
    let doi = cfg.doi_slots;
    let num_dois = cfg.episode_slots / doi;
    let scale = 1.0 / doi as f64;
    let decay = (a.epsilon_max - a.epsilon_min) / (a.nu * a.epochs as f64);
    let mut slots_since_sync = 0u64;
    let mut curve = Vec::with_capacity(a.epochs);
    let mut train_steps = 0;

    for epoch in 0..a.epochs {
        let epsilon = (a.epsilon_max - decay * epoch as f64).max(a.epsilon_min);
        let seed = child_seed(root_seed, "train-episode", epoch as u64);
        let stream = RequestStream::generate(population, lib, cfg.episode_slots as usize, &mut substream(seed, REQUESTS));
        let mut history = RequestHistory::new(cfg.num_cvs, cfg.num_classes, cfg.contents_per_class);
        let mut state = encode_state(&history, lib, 0, k);
        let mut returns = 0.0;
        let mut losses = Vec::new();
        for n in 0..num_dois {
            let x = state.flatten(scale);
            let q = online.forward(&x)?;
            let action = select_action(&q, epsilon, &mut rng);
            let cache = codec.decode(action, n)?;
            history = history.next_doi();
            let start = (n * doi) as usize;
            let log: Vec<Vec<(ContentId, bool)>> = stream.slots[start..start + doi as usize]
                .iter()
                .enumerate()
                .map(|(dt, slot)| {
                    slot.iter()
                        .map(|&(u, c)| {
                            let hit = cache.contains(c);
                            history.record(u, c, hit, (start + dt) as u64);
                            (c, hit)
                        })
                        .collect()
                })
                .collect();
            let reward = compute_reward(&log, &cache, &state.top_rows(), a.delta_pop_sim, a.delta_hit);
            returns += reward;
            let next = encode_state(&history, lib, n + 1, k);
            let next_x = next.flatten(scale);
            buffer.push(Transition { state: x, action, reward, next_state: next_x, done: n + 1 == num_dois });
            if buffer.len() >= a.batch_size {
                let batch = buffer.sample(a.batch_size, &mut rng)?;
                losses.push(train_step(&mut online, &target, &mut adam, &batch, a.gamma)?);
                train_steps += 1;
            }
            slots_since_sync += doi;
            if slots_since_sync >= a.target_sync_slots {
                target = online.clone();
                slots_since_sync = 0;
            }
            state = next;
        }
        curve.push(CurvePoint {
            epoch,
            epsilon,
            mean_return: returns / num_dois as f64,
            loss: (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64),
        });
    }
    Ok(TrainingRun { net: online, curve, fingerprint: model_fingerprint(cfg), train_steps })
}

/// Greedy placement from a trained network.
pub struct CppPolicy {
    net: QNetwork,
    codec: ActionCodec,
    count_scale: f64,
}

impl CppPolicy {
    pub fn new(net: QNetwork, cfg: &SimConfig) -> Result<Self> {
        let codec = ActionCodec::new(Budgets::from_config(cfg)?)?;
        let expected = layer_dims(cfg, &codec);
        if net.input_dim() != expected[0] || net.output_dim() != *expected.last().unwrap() {
            return Err(Error::ModelMismatch(format!(
                "network maps {} -> {}, configuration needs {} -> {}",
                net.input_dim(),
                net.output_dim(),
                expected[0],
                expected.last().unwrap()
            )));
        }
        Ok(Self { net, codec, count_scale: 1.0 / cfg.doi_slots as f64 })
    }
}

impl PlacementPolicy for CppPolicy {
    fn place(&mut self, ctx: &PlacementContext<'_>) -> Result<CacheState> {
        let state = encode_state(ctx.history, ctx.library, ctx.epoch, ctx.budgets.per_class_units);
        let q = self.net.forward(&state.flatten(self.count_scale))?;
        self.codec.decode(argmax(&q), ctx.epoch)
    }
}

/// Serialized network; weights are row-major `out x in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub fingerprint: String,
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl ModelFile {
    pub fn from_network(net: &QNetwork, fingerprint: &str) -> Self {
        Self {
            fingerprint: fingerprint.to_string(),
            layer_dims: net.layer_dims.clone(),
            weights: net.weights.iter().map(|w| w.iter().copied().collect()).collect(),
            biases: net.biases.iter().map(|b| b.to_vec()).collect(),
        }
    }

    pub fn to_network(&self) -> Result<QNetwork> {
        if self.layer_dims.len() != self.weights.len() + 1 || self.weights.len() != self.biases.len() {
            return Err(Error::ModelMismatch("layer count does not match the parameter arrays".into()));
        }
        let weights = self
            .layer_dims
            .windows(2)
            .zip(&self.weights)
            .map(|(d, w)| {
                Array2::from_shape_vec((d[1], d[0]), w.clone())
                    .map_err(|_| Error::ModelMismatch(format!("weight array does not match {} x {}", d[1], d[0])))
            })
            .collect::<Result<Vec<_>>>()?;
        let biases = self.biases.iter().map(|b| ndarray::Array1::from(b.clone())).collect();
        QNetwork::from_parts(weights, biases)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Loads and checks the model against the configuration.
    pub fn load_for(path: impl AsRef<Path>, cfg: &SimConfig) -> Result<QNetwork> {
        let file = Self::load(path)?;
        let expected = model_fingerprint(cfg);
        if file.fingerprint != expected {
            return Err(Error::ModelMismatch(format!(
                "model was trained for {}, configuration is {expected}",
                file.fingerprint
            )));
        }
        file.to_network()
    }
}
