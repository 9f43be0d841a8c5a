//! Command implementations: train, simulate, sweep, validate.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::agent::qnet::QNetwork;
use crate::agent::train::{model_fingerprint, train_cpp, CppPolicy, CurvePoint, ModelFile};
use crate::cache::{write_placement_rows, Genie, Klru, Kpop, PlacementPolicy, Rcr};
use crate::config::{Policy, RatKind, SimConfig};
use crate::delivery::{run_episode, summary_record, write_slot_rows, EpisodeSummary, Scenario, SLOT_HEADER, SUMMARY_HEADER};
use crate::error::{Error, Result};
use crate::rat::PartitionCache;
use crate::rng::{substream, POLICY};
use crate::validate::{run_all, Solver, SuiteReport};

/// Opens a CSV file whose first line records the configuration fingerprint.
pub fn csv_writer(path: &Path, fingerprint: &str, header: &[&str]) -> Result<csv::Writer<BufWriter<File>>> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "# config_fingerprint={fingerprint}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    Ok(w)
}

pub fn make_policy(kind: Policy, cfg: &SimConfig, model: Option<&QNetwork>, seed: u64) -> Result<Box<dyn PlacementPolicy>> {
    Ok(match kind {
        Policy::Genie => Box::new(Genie),
        Policy::Rcr => Box::new(Rcr { rng: substream(seed, POLICY) }),
        Policy::Kpop => Box::new(Kpop),
        Policy::Klru => Box::new(Klru { swaps: cfg.klru_swaps }),
        Policy::Cpp => {
            let net = model.ok_or_else(|| Error::Config("policy cpp needs a trained model (--model)".into()))?;
            Box::new(CppPolicy::new(net.clone(), cfg)?)
        }
    })
}

#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub model_path: PathBuf,
    pub curve_path: PathBuf,
    pub curve: Vec<CurvePoint>,
}

pub fn write_curve(path: &Path, fingerprint: &str, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv_writer(path, fingerprint, &["epoch", "epsilon", "mean_return", "loss"])?;
    for p in curve {
        w.write_record([
            p.epoch.to_string(),
            p.epsilon.to_string(),
            p.mean_return.to_string(),
            p.loss.map(|l| l.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Trains the placement agent; writes `model.json` and `training_curve.csv`.
pub fn cmd_train(cfg: &SimConfig, seed: u64, out: &Path) -> Result<TrainArtifacts> {
    std::fs::create_dir_all(out)?;
    let scenario = Scenario::from_config(cfg)?;
    let run = train_cpp(cfg, &scenario.library, &scenario.population, seed)?;
    let model_path = out.join("model.json");
    let curve_path = out.join("training_curve.csv");
    ModelFile::from_network(&run.net, &run.fingerprint).save(&model_path)?;
    write_curve(&curve_path, &cfg.fingerprint(), &run.curve)?;
    Ok(TrainArtifacts { model_path, curve_path, curve: run.curve })
}

fn episode_tag(cfg: &SimConfig, seed: u64) -> String {
    format!("{}_{}_seed{seed}", cfg.policy, cfg.rat)
}

/// Runs one episode per seed with the configured policy and RAT. Writes
/// per-slot and placement CSVs per seed plus `summary.csv`.
pub fn cmd_simulate(cfg: &SimConfig, model: Option<&Path>, seeds: &[u64], out: &Path) -> Result<Vec<EpisodeSummary>> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let net = match (cfg.policy, model) {
        (Policy::Cpp, Some(path)) => Some(ModelFile::load_for(path, cfg)?),
        (Policy::Cpp, None) => return Err(Error::Config("policy cpp needs a trained model (--model)".into())),
        _ => None,
    };
    let scenario = Scenario::from_config(cfg)?;
    let fp = cfg.fingerprint();
    let mut partitions = PartitionCache::new();
    let mut summaries = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut policy = make_policy(cfg.policy, cfg, net.as_ref(), seed)?;
        let result = run_episode(cfg, &scenario, policy.as_mut(), cfg.policy, seed, &mut partitions)?;
        let tag = episode_tag(cfg, seed);
        let mut w = csv_writer(&out.join(format!("slots_{tag}.csv")), &fp, &SLOT_HEADER)?;
        write_slot_rows(&mut w, &result.slots)?;
        w.flush()?;
        let mut w = csv_writer(&out.join(format!("placements_{tag}.csv")), &fp, &["epoch", "class", "content", "stored"])?;
        for p in &result.placements {
            write_placement_rows(&mut w, p)?;
        }
        w.flush()?;
        summaries.push(result.summary);
    }
    let mut w = csv_writer(&out.join("summary.csv"), &fp, &SUMMARY_HEADER)?;
    for s in &summaries {
        w.write_record(summary_record(s))?;
    }
    w.flush()?;
    Ok(summaries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    CacheSize,
    ContentSize,
    NumCvs,
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cache_size" => Ok(Self::CacheSize),
            "content_size" => Ok(Self::ContentSize),
            "num_cvs" => Ok(Self::NumCvs),
            other => Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

/// Applies one axis value: cache size in content units, content size in
/// kilobits, vehicle count.
pub fn apply_axis(cfg: &SimConfig, axis: SweepAxis, value: f64) -> Result<SimConfig> {
    let integral = |v: f64| {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Error::Config(format!("axis value {v} must be a non-negative integer")))
        }
    };
    let mut c = cfg.clone();
    match axis {
        SweepAxis::CacheSize => c.cache_size_units = integral(value)?,
        SweepAxis::ContentSize => c.content_size_bits = (value * 1000.0).round() as u64,
        SweepAxis::NumCvs => c.num_cvs = integral(value)?,
    }
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub policies: Vec<Policy>,
    pub rats: Vec<RatKind>,
    pub seeds: Vec<u64>,
    /// Root seed for any agent training the sweep needs.
    pub train_seed: u64,
}

/// Cross product of axis values, policies, RATs and seeds; one summary row
/// each, written to `sweep.csv` in that order.
pub fn cmd_sweep(cfg: &SimConfig, req: &SweepRequest, out: &Path) -> Result<Vec<EpisodeSummary>> {
    if req.values.is_empty() || req.policies.is_empty() || req.rats.is_empty() || req.seeds.is_empty() {
        return Err(Error::Config("sweep needs values, policies, RATs and seeds".into()));
    }
    std::fs::create_dir_all(out)?;
    let configs: Vec<SimConfig> = req.values.iter().map(|&v| apply_axis(cfg, req.axis, v)).collect::<Result<_>>()?;
    let scenarios: Vec<Scenario> = configs.iter().map(Scenario::from_config).collect::<Result<_>>()?;

    let mut models: BTreeMap<String, QNetwork> = BTreeMap::new();
    if req.policies.contains(&Policy::Cpp) {
        let mut pending: BTreeMap<String, usize> = BTreeMap::new();
        for (i, c) in configs.iter().enumerate() {
            pending.entry(model_fingerprint(c)).or_insert(i);
        }
        let trained: Vec<(String, QNetwork)> = pending
            .into_par_iter()
            .map(|(fp, i)| {
                let run = train_cpp(&configs[i], &scenarios[i].library, &scenarios[i].population, req.train_seed)?;
                ModelFile::from_network(&run.net, &fp).save(out.join(format!("model_{fp}.json")))?;
                Ok((fp, run.net))
            })
            .collect::<Result<_>>()?;
        models.extend(trained);
    }

    let mut cells = Vec::new();
    for (i, c) in configs.iter().enumerate() {
        for &policy in &req.policies {
            for &rat in &req.rats {
                for &seed in &req.seeds {
                    cells.push((i, SimConfig { policy, rat, ..c.clone() }, seed));
                }
            }
        }
    }
    let summaries: Vec<EpisodeSummary> = cells
        .par_iter()
        .map(|(i, c, seed)| {
            let mut policy = make_policy(c.policy, c, models.get(&model_fingerprint(c)), *seed)?;
            let r = run_episode(c, &scenarios[*i], policy.as_mut(), c.policy, *seed, &mut PartitionCache::new())?;
            Ok(r.summary)
        })
        .collect::<Result<_>>()?;
    let mut w = csv_writer(&out.join("sweep.csv"), &cfg.fingerprint(), &SUMMARY_HEADER)?;
    for s in &summaries {
        w.write_record(summary_record(s))?;
    }
    w.flush()?;
    Ok(summaries)
}

pub fn cmd_validate(solver: Solver) -> (bool, Vec<SuiteReport>) {
    let reports = run_all(solver);
    (reports.iter().all(|r| r.passed), reports)
}
