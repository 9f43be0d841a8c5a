//! Slot-by-slot content delivery.
//!
//! Each slot: refresh the cache at DoI starts, take in the slot's requests,
//! pick eligible vehicles by earliest deadline, allocate radio resources with
//! the configured access technique, drain payloads and expire deadlines.

use std::io::Write;

use crate::cache::{chr, mean_chr, Budgets, CacheState, PlacementContext, PlacementPolicy, RequestHistory};
use crate::config::{Policy, RatKind, SimConfig};
use crate::content::{build_population, library_from_config, ContentLibrary, CvPreferenceState, Request, RequestStream};
use crate::error::{Error, Result};
use crate::mobility::{build_network, init_vehicles, step_positions, ApLayout, RoadNetwork};
use crate::radio::{rate_bps, snr_per_prb, tx_bits, ChannelTable, LinkBudget};
use crate::rat::hungarian::hungarian;
use crate::rat::{eligible_cvs, optimal_vc_and_prb, priorities, schedule, soi, vc_count, PartitionCache};
use crate::rng::{substream, CHANNEL, LIBRARY, MOBILITY, NC_CHANNEL, POPULATION, REQUESTS};

/// The fixed part of an experiment: road network, APs, library and vehicles.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: RoadNetwork,
    pub aps: ApLayout,
    pub library: ContentLibrary,
    pub population: Vec<CvPreferenceState>,
}

impl Scenario {
    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let (network, aps) = build_network(cfg)?;
        let library = library_from_config(cfg, &mut substream(cfg.scenario_seed, LIBRARY))?;
        let population = build_population(cfg, &mut substream(cfg.scenario_seed, POPULATION));
        Ok(Self { network, aps, library, population })
    }

    pub fn request_stream(&self, cfg: &SimConfig, seed: u64) -> RequestStream {
        RequestStream::generate(&self.population, &self.library, cfg.episode_slots as usize, &mut substream(seed, REQUESTS))
    }
}

/// Slots left to deliver a request arriving at `t` in DoI `n`.
pub fn server_deadline(t: u64, n: u64, doi_slots: u64, max_deadline: u64) -> u64 {
    max_deadline.min((n + 1) * doi_slots - t)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlotMetrics {
    pub slot: u64,
    pub requests: usize,
    pub hits: usize,
    pub chr: Option<f64>,
    pub scheduled: usize,
    pub wsr: f64,
    pub completions: usize,
    pub delay_sum: u64,
    pub violations: usize,
}

impl SlotMetrics {
    pub fn mean_delay(&self) -> Option<f64> {
        (self.completions > 0).then(|| self.delay_sum as f64 / self.completions as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletedRequest {
    pub cv: usize,
    pub arrival_slot: u64,
    pub completion_slot: u64,
    pub server_deadline: u64,
    pub cache_hit: bool,
    pub drained_slots: u64,
}

impl CompletedRequest {
    pub fn delay(&self) -> u64 {
        self.completion_slot - self.arrival_slot + 1
    }

    /// `(extraction, queueing, service)` split of the delay.
    pub fn decomposition(&self, extraction_delay: u64) -> (u64, u64, u64) {
        let dm = if self.cache_hit { 0 } else { extraction_delay };
        (dm, self.delay() - dm - self.drained_slots, self.drained_slots)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub policy: Policy,
    pub rat: RatKind,
    pub cache_size: usize,
    pub content_size: u64,
    pub num_cvs: usize,
    pub chr: Option<f64>,
    pub mean_delay: Option<f64>,
    pub violation_pct: Option<f64>,
    pub total_requests: usize,
    pub completed: usize,
    pub violated: usize,
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub slots: Vec<SlotMetrics>,
    pub placements: Vec<CacheState>,
    pub completed: Vec<CompletedRequest>,
    pub violated: Vec<Request>,
    pub summary: EpisodeSummary,
}

/// Outstanding requests, in arrival order.
#[derive(Debug, Clone, Default)]
pub struct Ledger {
    pub requests: Vec<Request>,
    /// Requests dropped on deadline expiry.
    pub expired: Vec<Request>,
}

impl Ledger {
    /// Delivers up to `bits` to the valid requests of `cv`, oldest first.
    /// Bits beyond the outstanding payload are lost.
    pub fn drain(&mut self, cv: usize, mut bits: u64, soi: &[u64], t: u64) {
        for r in self.requests.iter_mut().filter(|r| r.cv == cv) {
            if bits == 0 {
                break;
            }
            let valid = soi.binary_search(&r.arrival_slot).is_ok()
                && r.available_at(t)
                && r.remaining_deadline > 0
                && r.remaining_payload > 0;
            if !valid {
                continue;
            }
            let take = bits.min(r.remaining_payload);
            r.remaining_payload -= take;
            r.drained_slots += 1;
            bits -= take;
            if r.remaining_payload == 0 {
                r.completion_slot = Some(t);
            }
        }
    }

    /// Moves completions out, ages the rest and drops expired ones.
    /// Returns the number of violations.
    pub fn end_slot(&mut self, completed: &mut Vec<CompletedRequest>, metrics: &mut SlotMetrics) -> usize {
        let mut violations = 0;
        self.requests.retain_mut(|r| {
            if let Some(done) = r.completion_slot {
                let c = CompletedRequest {
                    cv: r.cv,
                    arrival_slot: r.arrival_slot,
                    completion_slot: done,
                    server_deadline: r.server_deadline,
                    cache_hit: r.cache_hit,
                    drained_slots: r.drained_slots,
                };
                metrics.completions += 1;
                metrics.delay_sum += c.delay();
                completed.push(c);
                return false;
            }
            r.remaining_deadline -= 1;
            if r.remaining_deadline == 0 {
                violations += 1;
                self.expired.push(r.clone());
                return false;
            }
            true
        });
        metrics.violations += violations;
        violations
    }

    fn audit(&self, t: u64, content_size: u64) -> Result<()> {
        for r in &self.requests {
            if r.remaining_payload > content_size || r.remaining_deadline > r.server_deadline {
                return Err(Error::Simulation { slot: t, msg: format!("inconsistent request state {r:?}") });
            }
            if !r.available_at(t) && r.remaining_payload < content_size {
                return Err(Error::Simulation { slot: t, msg: format!("miss drained before extraction {r:?}") });
            }
        }
        Ok(())
    }
}

/// Runs one episode with the given placement policy.
pub fn run_episode(
    cfg: &SimConfig,
    scenario: &Scenario,
    policy: &mut dyn PlacementPolicy,
    policy_kind: Policy,
    seed: u64,
    partitions: &mut PartitionCache,
) -> Result<EpisodeResult> {
    let stream = scenario.request_stream(cfg, seed);
    run_episode_on(cfg, scenario, &stream, policy, policy_kind, seed, partitions)
}

/// As [`run_episode`] with an explicit request stream.
pub fn run_episode_on(
    cfg: &SimConfig,
    scenario: &Scenario,
    stream: &RequestStream,
    policy: &mut dyn PlacementPolicy,
    policy_kind: Policy,
    seed: u64,
    partitions: &mut PartitionCache,
) -> Result<EpisodeResult> {
    let budgets = Budgets::from_config(cfg)?;
    let doi = cfg.doi_slots;
    let num_slots = cfg.episode_slots;
    if stream.slots.len() as u64 != num_slots {
        return Err(Error::Contract("request stream length differs from the episode".into()));
    }
    let ap_budget = LinkBudget::access_point(cfg);
    let bs_budget = LinkBudget::base_station(cfg);
    let bs = [(cfg.grid_extent_x / 2.0, cfg.grid_extent_y / 2.0, cfg.ap_height_m)];
    let mut mobility_rng = substream(seed, MOBILITY);
    let mut channel_rng = substream(seed, CHANNEL);
    let mut nc_rng = substream(seed, NC_CHANNEL);
    let mut vehicles = init_vehicles(&scenario.network, cfg.num_cvs, cfg.max_speed_mps, &mut mobility_rng);

    let mut ledger = Ledger::default();
    let mut history = RequestHistory::new(cfg.num_cvs, cfg.num_classes, cfg.contents_per_class);
    let mut cache: Option<CacheState> = None;
    let mut placements = Vec::new();
    let mut slots = Vec::with_capacity(num_slots as usize);
    let mut completed = Vec::new();
    let mut total_requests = 0;
    let mut violated = 0;

    for t in 0..num_slots {
        let n = t / doi;
        if t % doi == 0 {
            let ctx = PlacementContext {
                epoch: n,
                history: &history,
                upcoming: &stream.slots[t as usize..(t + doi) as usize],
                library: &scenario.library,
                budgets,
            };
            let placed = policy.place(&ctx)?;
            placed.check()?;
            history = history.next_doi();
            placements.push(placed.clone());
            cache = Some(placed);
        }
        let cache = cache.as_ref().expect("placed at slot 0");
        let mut m = SlotMetrics { slot: t, ..SlotMetrics::default() };

        for &(u, content) in &stream.slots[t as usize] {
            let hit = cache.contains(content);
            history.record(u, content, hit, t);
            m.requests += 1;
            m.hits += hit as usize;
            if cfg.rat != RatKind::CacheOnly {
                let d = server_deadline(t, n, doi, cfg.max_deadline_slots);
                ledger.requests.push(Request {
                    cv: u,
                    content,
                    arrival_slot: t,
                    server_deadline: d,
                    remaining_deadline: d,
                    remaining_payload: cfg.content_size_bits,
                    cache_hit: hit,
                    extraction_ready_slot: if hit { t } else { t + cfg.extraction_delay_slots },
                    completion_slot: None,
                    drained_slots: 0,
                });
            }
        }
        total_requests += m.requests;
        m.chr = chr(m.hits, m.requests)?;

        if cfg.rat != RatKind::CacheOnly {
            let positions: Vec<(f64, f64)> = vehicles.iter().map(|v| v.position(&scenario.network)).collect();
            let window = soi(t, cfg.max_deadline_slots);
            let elig = eligible_cvs(&window, &ledger.requests, t);
            let w = vc_count(elig.len(), cfg.max_vcs);
            let (channels, budget) = match cfg.rat {
                RatKind::UserCentric => (
                    ChannelTable::draw(
                        &mut channel_rng,
                        &positions,
                        &scenario.aps.coordinates,
                        cfg.cv_height_m,
                        cfg.num_prbs,
                        cfg.antennas,
                        cfg.carrier_ghz,
                        cfg.shadow_sigma_db,
                    ),
                    &ap_budget,
                ),
                _ => (
                    ChannelTable::draw(
                        &mut nc_rng,
                        &positions,
                        &bs,
                        cfg.cv_height_m,
                        cfg.num_prbs,
                        cfg.antennas,
                        cfg.carrier_ghz,
                        cfg.shadow_sigma_db,
                    ),
                    &bs_budget,
                ),
            };
            if w > 0 {
                let phi = priorities(&elig.min_remaining_deadline)?;
                let order = schedule(&elig, &phi, w);
                let cvs: Vec<usize> = order.iter().map(|&p| elig.valid_cvs[p]).collect();
                let weights: Vec<f64> = order.iter().map(|&p| phi[p]).collect();
                m.scheduled = w;
                let bits = if cfg.rat == RatKind::UserCentric {
                    uc_allocate(&cvs, &weights, &channels, budget, partitions, cfg, &mut m)?
                } else {
                    nc_allocate(&cvs, &weights, &channels, budget, cfg, &mut m)
                };
                for (&u, &b) in cvs.iter().zip(&bits) {
                    ledger.drain(u, b, &window, t);
                }
            }
            violated += ledger.end_slot(&mut completed, &mut m);
            ledger.audit(t, cfg.content_size_bits)?;
            vehicles = step_positions(&vehicles, &scenario.network, &mut mobility_rng, cfg.tti_s);
        }
        slots.push(m);
    }
    if !ledger.requests.is_empty() {
        return Err(Error::Simulation { slot: num_slots, msg: format!("{} requests outlived the episode", ledger.requests.len()) });
    }

    let radio = cfg.rat != RatKind::CacheOnly;
    let summary = EpisodeSummary {
        seed,
        policy: policy_kind,
        rat: cfg.rat,
        cache_size: cfg.cache_size_units,
        content_size: cfg.content_size_bits,
        num_cvs: cfg.num_cvs,
        chr: mean_chr(slots.iter().map(|s| s.chr)),
        mean_delay: (radio && !completed.is_empty())
            .then(|| completed.iter().map(|c| c.delay() as f64).sum::<f64>() / completed.len() as f64),
        violation_pct: radio.then(|| if total_requests == 0 { 0.0 } else { 100.0 * violated as f64 / total_requests as f64 }),
        total_requests,
        completed: completed.len(),
        violated,
    };
    Ok(EpisodeResult { slots, placements, completed, violated: ledger.expired, summary })
}

/// Virtual-cell search and per-CV transmissible bits.
fn uc_allocate(
    cvs: &[usize],
    phi: &[f64],
    channels: &ChannelTable,
    budget: &LinkBudget,
    partitions: &mut PartitionCache,
    cfg: &SimConfig,
    m: &mut SlotMetrics,
) -> Result<Vec<u64>> {
    let configs = partitions.get(channels.num_tx, cvs.len())?;
    let decision = optimal_vc_and_prb(cvs, phi, channels, budget, &configs)?;
    m.wsr = decision.wsr;
    cvs.iter()
        .enumerate()
        .map(|(i, &u)| {
            let vc = decision.config.block(i);
            let own: Vec<(usize, usize)> = decision.assignment.iter().copied().filter(|(b, _)| vc.contains(b)).collect();
            let snr = snr_per_prb(&vc, u, &own, channels, budget)?;
            Ok(tx_bits(rate_bps(&snr, cfg.prb_width_hz), cfg.tti_s))
        })
        .collect()
}

/// Single base station: power split by normalized priority, each CV's share
/// spread evenly over its pRBs. With fewer CVs than pRBs the rows are
/// replicated round-robin so every pRB is used.
fn nc_allocate(cvs: &[usize], phi: &[f64], channels: &ChannelTable, budget: &LinkBudget, cfg: &SimConfig, m: &mut SlotMetrics) -> Vec<u64> {
    let z = channels.num_prbs;
    let w = cvs.len();
    let rows = w.max(z);
    let owner: Vec<usize> = (0..rows).map(|r| r % w).collect();
    let mut share = vec![0usize; w];
    for &i in &owner {
        share[i] += 1;
    }
    let phi_sum: f64 = phi.iter().sum();
    let power: Vec<f64> = (0..w).map(|i| budget.effective_tx_mw() * phi[i] / phi_sum / share[i] as f64).collect();
    let snr = |i: usize, prb: usize| power[i] * channels.gain(cvs[i], 0, prb) / budget.noise_mw();
    let matrix: Vec<Vec<f64>> =
        owner.iter().map(|&i| (0..z).map(|prb| phi[i] * (1.0 + snr(i, prb)).log2()).collect()).collect();
    let assignment = hungarian(&matrix);
    m.wsr = assignment.weight;
    let mut per_cv = vec![Vec::new(); w];
    for &(r, prb) in &assignment.pairs {
        per_cv[owner[r]].push(snr(owner[r], prb));
    }
    per_cv.iter().map(|s| tx_bits(rate_bps(s, cfg.prb_width_hz), cfg.tti_s)).collect()
}

pub const SLOT_HEADER: [&str; 9] = ["slot", "requests", "hits", "chr", "scheduled", "wsr", "completions", "mean_delay", "violations"];
pub const SUMMARY_HEADER: [&str; 9] =
    ["seed", "policy", "rat", "cache_size", "content_size", "U", "chr", "mean_delay", "violation_pct"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_slot_rows<W: Write>(writer: &mut csv::Writer<W>, slots: &[SlotMetrics]) -> Result<()> {
    for s in slots {
        writer.write_record([
            s.slot.to_string(),
            s.requests.to_string(),
            s.hits.to_string(),
            opt(s.chr),
            s.scheduled.to_string(),
            s.wsr.to_string(),
            s.completions.to_string(),
            opt(s.mean_delay()),
            s.violations.to_string(),
        ])?;
    }
    Ok(())
}

pub fn summary_record(s: &EpisodeSummary) -> [String; 9] {
    [
        s.seed.to_string(),
        s.policy.to_string(),
        s.rat.to_string(),
        s.cache_size.to_string(),
        s.content_size.to_string(),
        s.num_cvs.to_string(),
        opt(s.chr),
        opt(s.mean_delay),
        opt(s.violation_pct),
    ]
}
