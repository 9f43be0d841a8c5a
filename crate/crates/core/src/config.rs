//! Simulation configuration.
//!
//! Every field has a default, so an empty JSON object `{}` is a complete
//! configuration reproducing the reference network setup: 6 APs, 5 virtual
//! cells at most, 1 ms slots, 50-slot cache epochs, 3 content classes of 5
//! items with 10 features each, 10-slot hard deadlines and 5-slot cloud
//! extraction on a cache miss.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// 45 miles per hour.
pub const MAX_SPEED_MPS: f64 = 20.1168;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Cpp,
    Genie,
    Rcr,
    Kpop,
    Klru,
}

impl Policy {
    pub const ALL: [Policy; 5] = [Policy::Cpp, Policy::Genie, Policy::Rcr, Policy::Kpop, Policy::Klru];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Cpp => "cpp",
            Policy::Genie => "genie",
            Policy::Rcr => "rcr",
            Policy::Kpop => "kpop",
            Policy::Klru => "klru",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cpp" => Ok(Policy::Cpp),
            "genie" => Ok(Policy::Genie),
            "rcr" => Ok(Policy::Rcr),
            "kpop" => Ok(Policy::Kpop),
            "klru" => Ok(Policy::Klru),
            other => Err(Error::Config(format!("unknown policy `{other}`"))),
        }
    }
}

/// Radio access technique used to deliver contents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum RatKind {
    /// Virtual cells of cooperating APs formed per slot.
    #[serde(rename = "user-centric")]
    UserCentric,
    /// A single base station at the center of the region.
    #[serde(rename = "nc-rat")]
    NetworkCentric,
    /// Cache bookkeeping only, no radio delivery (hit-ratio studies).
    #[serde(rename = "none")]
    CacheOnly,
}

impl RatKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RatKind::UserCentric => "user-centric",
            RatKind::NetworkCentric => "nc-rat",
            RatKind::CacheOnly => "none",
        }
    }
}

impl fmt::Display for RatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RatKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "user-centric" => Ok(RatKind::UserCentric),
            "nc-rat" => Ok(RatKind::NetworkCentric),
            "none" => Ok(RatKind::CacheOnly),
            other => Err(Error::Config(format!("unknown rat `{other}`"))),
        }
    }
}

/// Hyperparameters of the cache placement learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub epsilon_max: f64,
    pub epsilon_min: f64,
    /// Fraction of the training episodes over which epsilon decays.
    pub nu: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Target network sync period in slots.
    pub target_sync_slots: u64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub delta_pop_sim: f64,
    pub delta_hit: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256, 256],
            gamma: 0.995,
            epsilon_max: 1.0,
            epsilon_min: 0.005,
            nu: 0.6,
            buffer_capacity: 15_000,
            batch_size: 512,
            target_sync_slots: 200,
            learning_rate: 1e-3,
            epochs: 2000,
            delta_pop_sim: 1.0,
            delta_hit: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    // road network and AP layout
    pub grid_extent_x: f64,
    pub grid_extent_y: f64,
    pub block_spacing: f64,
    pub lane_offset: f64,
    pub num_aps: usize,
    pub coverage_radius_m: f64,
    pub max_speed_mps: f64,
    pub ap_height_m: f64,
    pub cv_height_m: f64,

    // radio
    pub max_vcs: usize,
    pub num_prbs: usize,
    pub tti_s: f64,
    pub carrier_ghz: f64,
    pub prb_width_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub antennas: usize,
    pub ap_tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub noise_figure_db: f64,
    pub shadow_sigma_db: f64,
    pub nc_tx_power_dbm: f64,

    // content and caching
    pub num_classes: usize,
    pub contents_per_class: usize,
    pub features_per_content: usize,
    pub zipf_exponent: f64,
    pub content_size_bits: u64,
    /// Total cache size in units of the content size.
    pub cache_size_units: usize,
    pub klru_swaps: usize,

    // timing
    pub doi_slots: u64,
    pub episode_slots: u64,
    pub max_deadline_slots: u64,
    pub extraction_delay_slots: u64,

    // vehicles
    pub num_cvs: usize,
    pub request_prob_range: (f64, f64),
    pub exploit_prob_range: (f64, f64),

    // experiment
    /// Seed of the fixed scenario: content library and vehicle population.
    pub scenario_seed: u64,
    /// Episode seeds; each drives requests, mobility and channel draws.
    pub seeds: Vec<u64>,
    pub policy: Policy,
    pub rat: RatKind,
    pub agent: AgentConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            grid_extent_x: 300.0,
            grid_extent_y: 200.0,
            block_spacing: 100.0,
            lane_offset: 0.0,
            num_aps: 6,
            coverage_radius_m: 250.0,
            max_speed_mps: MAX_SPEED_MPS,
            ap_height_m: 25.0,
            cv_height_m: 1.5,

            max_vcs: 5,
            num_prbs: 6,
            tti_s: 1e-3,
            carrier_ghz: 2.0,
            prb_width_hz: 180e3,
            noise_psd_dbm_hz: -174.0,
            antennas: 4,
            ap_tx_power_dbm: 30.0,
            tx_gain_dbi: 8.0,
            rx_gain_dbi: 3.0,
            noise_figure_db: 9.0,
            shadow_sigma_db: 4.0,
            nc_tx_power_dbm: 46.0,

            num_classes: 3,
            contents_per_class: 5,
            features_per_content: 10,
            zipf_exponent: 1.0,
            content_size_bits: 4000,
            cache_size_units: 9,
            klru_swaps: 1,

            doi_slots: 50,
            episode_slots: 1000,
            max_deadline_slots: 10,
            extraction_delay_slots: 5,

            num_cvs: 10,
            request_prob_range: (0.1, 1.0),
            exploit_prob_range: (0.0, 1.0),

            scenario_seed: 1,
            seeds: vec![0],
            policy: Policy::Genie,
            rat: RatKind::UserCentric,
            agent: AgentConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Per-class cache budget in content units (equal split).
    pub fn per_class_budget(&self) -> usize {
        self.cache_size_units / self.num_classes.max(1)
    }

    /// Short hex digest of the canonical JSON form of the configuration.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.grid_extent_x > 0.0 && self.grid_extent_y > 0.0) {
            return err("grid extents must be positive");
        }
        if !(self.block_spacing > 0.0) {
            return err("block spacing must be positive");
        }
        for extent in [self.grid_extent_x, self.grid_extent_y] {
            let blocks = extent / self.block_spacing;
            if (blocks - blocks.round()).abs() > 1e-9 || blocks.round() < 1.0 {
                return err("block spacing must divide the grid extents");
            }
        }
        if self.lane_offset < 0.0 || self.lane_offset > self.block_spacing / 2.0 {
            return err("lane offset must lie within half a block");
        }
        if self.num_aps == 0 || self.num_prbs == 0 || self.max_vcs == 0 {
            return err("APs, pRBs and VC count must be at least 1");
        }
        if self.max_vcs > self.num_aps {
            return err("max_vcs cannot exceed the number of APs");
        }
        if self.num_aps > 12 {
            return err("partition search supports at most 12 APs");
        }
        if self.antennas == 0 {
            return err("antennas must be at least 1");
        }
        if !(self.prb_width_hz > 0.0 && self.tti_s > 0.0 && self.carrier_ghz > 0.0) {
            return err("pRB width, TTI and carrier must be positive");
        }
        if self.num_classes == 0 || self.contents_per_class == 0 || self.features_per_content == 0 {
            return err("classes, contents per class and features must be at least 1");
        }
        if self.content_size_bits == 0 {
            return err("content size must be positive");
        }
        if !self.cache_size_units.is_multiple_of(self.num_classes) {
            return err("cache size must split evenly across classes");
        }
        if self.per_class_budget() > self.contents_per_class {
            return err("per-class cache budget exceeds the class size");
        }
        if self.doi_slots == 0 || self.episode_slots == 0 || self.max_deadline_slots == 0 {
            return err("DoI, episode length and deadline must be positive");
        }
        if !self.episode_slots.is_multiple_of(self.doi_slots) {
            return err("episode length must be a whole number of DoIs");
        }
        if self.num_cvs == 0 {
            return err("at least one CV is required");
        }
        let (plo, phi) = self.request_prob_range;
        if !(0.0 < plo && plo <= phi && phi <= 1.0) {
            return err("request probability range must lie in (0, 1]");
        }
        let (elo, ehi) = self.exploit_prob_range;
        if !(0.0 <= elo && elo <= ehi && ehi <= 1.0) {
            return err("exploit probability range must lie in [0, 1]");
        }
        if self.seeds.is_empty() {
            return err("at least one seed is required");
        }
        let a = &self.agent;
        if !(0.0..=1.0).contains(&a.gamma) {
            return err("gamma must lie in [0, 1]");
        }
        if !(0.0 <= a.epsilon_min && a.epsilon_min <= a.epsilon_max && a.epsilon_max <= 1.0) {
            return err("epsilon bounds must satisfy 0 <= min <= max <= 1");
        }
        if !(a.nu > 0.0) || a.batch_size == 0 || a.buffer_capacity < a.batch_size {
            return err("nu must be positive and the buffer must hold at least one batch");
        }
        if !(a.delta_pop_sim > a.delta_hit && a.delta_hit > 0.0) {
            return err("reward weights must satisfy delta_pop_sim > delta_hit > 0");
        }
        if a.target_sync_slots == 0 || !(a.learning_rate > 0.0) {
            return err("target sync period and learning rate must be positive");
        }
        Ok(())
    }
}
