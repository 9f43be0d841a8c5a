//! Edge cache state, request history and the baseline placement policies.

use std::io::Write;

use rand::seq::index::sample;

use crate::config::SimConfig;
use crate::content::{ContentId, ContentLibrary};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Cache budgets in content units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    pub classes: usize,
    pub per_class_contents: usize,
    pub per_class_units: usize,
    pub total_units: usize,
}

impl Budgets {
    pub fn new(classes: usize, per_class_contents: usize, per_class_units: usize, total_units: usize) -> Result<Self> {
        if classes == 0 || per_class_contents == 0 {
            return Err(Error::Config("budgets need at least one class and content".into()));
        }
        if per_class_units * classes > total_units {
            return Err(Error::Config(format!(
                "per-class budget {per_class_units} x {classes} classes exceeds total {total_units}"
            )));
        }
        if per_class_units > per_class_contents {
            return Err(Error::Config(format!(
                "per-class budget {per_class_units} exceeds the {per_class_contents} contents of a class"
            )));
        }
        Ok(Self { classes, per_class_contents, per_class_units, total_units })
    }

    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        Self::new(cfg.num_classes, cfg.contents_per_class, cfg.per_class_budget(), cfg.cache_size_units)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheState {
    /// `placement[c][f]` is true when content `f` of class `c` is stored.
    pub placement: Vec<Vec<bool>>,
    pub budgets: Budgets,
    pub epoch: u64,
}

impl CacheState {
    /// Builds a placement from per-class index sets, checking both budgets.
    pub fn from_sets(budgets: Budgets, sets: &[Vec<usize>], epoch: u64) -> Result<Self> {
        if sets.len() != budgets.classes {
            return Err(Error::Contract(format!("{} class sets for {} classes", sets.len(), budgets.classes)));
        }
        let mut placement = vec![vec![false; budgets.per_class_contents]; budgets.classes];
        for (c, set) in sets.iter().enumerate() {
            for &f in set {
                if f >= budgets.per_class_contents || placement[c][f] {
                    return Err(Error::Contract(format!("invalid or repeated content {f} in class {c}")));
                }
                placement[c][f] = true;
            }
        }
        let state = Self { placement, budgets, epoch };
        state.check()?;
        Ok(state)
    }

    pub fn check(&self) -> Result<()> {
        let mut total = 0;
        for (c, row) in self.placement.iter().enumerate() {
            let stored = row.iter().filter(|&&s| s).count();
            if stored != self.budgets.per_class_units {
                return Err(Error::Contract(format!(
                    "class {c} stores {stored} contents, budget is {}",
                    self.budgets.per_class_units
                )));
            }
            total += stored;
        }
        if total > self.budgets.total_units {
            return Err(Error::Contract(format!("{total} contents stored, total budget is {}", self.budgets.total_units)));
        }
        Ok(())
    }

    pub fn contains(&self, content: ContentId) -> bool {
        self.placement[content.class][content.index]
    }

    pub fn stored(&self, class: usize) -> Vec<usize> {
        self.placement[class].iter().enumerate().filter(|(_, &s)| s).map(|(f, _)| f).collect()
    }

    pub fn sets(&self) -> Vec<Vec<usize>> {
        (0..self.budgets.classes).map(|c| self.stored(c)).collect()
    }
}

/// Request and hit counts over one DoI plus content recency.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestHistory {
    pub num_cvs: usize,
    pub classes: usize,
    pub per_class: usize,
    /// `requests[(u * C + c) * F + f]`.
    pub requests: Vec<u32>,
    pub hits: Vec<u32>,
    /// Last slot each content was requested, `[c * F + f]`.
    pub last_used: Vec<Option<u64>>,
}

impl RequestHistory {
    pub fn new(num_cvs: usize, classes: usize, per_class: usize) -> Self {
        let n = num_cvs * classes * per_class;
        Self {
            num_cvs,
            classes,
            per_class,
            requests: vec![0; n],
            hits: vec![0; n],
            last_used: vec![None; classes * per_class],
        }
    }

    fn idx(&self, cv: usize, c: ContentId) -> usize {
        (cv * self.classes + c.class) * self.per_class + c.index
    }

    pub fn record(&mut self, cv: usize, content: ContentId, hit: bool, slot: u64) {
        let i = self.idx(cv, content);
        self.requests[i] += 1;
        if hit {
            self.hits[i] += 1;
        }
        self.last_used[content.class * self.per_class + content.index] = Some(slot);
    }

    pub fn cv_requests(&self, cv: usize, content: ContentId) -> u32 {
        self.requests[self.idx(cv, content)]
    }

    pub fn cv_hits(&self, cv: usize, content: ContentId) -> u32 {
        self.hits[self.idx(cv, content)]
    }

    /// Requests for each content of `class`, summed over vehicles.
    pub fn aggregate(&self, class: usize) -> Vec<u32> {
        (0..self.per_class)
            .map(|f| (0..self.num_cvs).map(|u| self.cv_requests(u, ContentId::new(class, f))).sum())
            .collect()
    }

    pub fn total_requests(&self) -> u64 {
        self.requests.iter().map(|&r| r as u64).sum()
    }

    /// Starts a new DoI: counts are cleared, recency is kept.
    pub fn next_doi(&self) -> Self {
        Self {
            requests: vec![0; self.requests.len()],
            hits: vec![0; self.hits.len()],
            ..self.clone()
        }
    }
}

/// Indices of the `k` largest counts, ties to the lower index, in rank order.
pub fn top_k(counts: &[u32], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

pub fn place_rcr(budgets: Budgets, epoch: u64, rng: &mut SimRng) -> Result<CacheState> {
    let sets: Vec<Vec<usize>> = (0..budgets.classes)
        .map(|_| sample(rng, budgets.per_class_contents, budgets.per_class_units).into_vec())
        .collect();
    CacheState::from_sets(budgets, &sets, epoch)
}

pub fn place_kpop(history: &RequestHistory, budgets: Budgets, epoch: u64) -> Result<CacheState> {
    let sets: Vec<Vec<usize>> = (0..budgets.classes).map(|c| top_k(&history.aggregate(c), budgets.per_class_units)).collect();
    CacheState::from_sets(budgets, &sets, epoch)
}

/// K-PoP, then up to `swaps` replacements per class of the least popular
/// member by the most recently used content outside the set that was
/// requested in the past DoI.
pub fn place_klru(history: &RequestHistory, budgets: Budgets, swaps: usize, epoch: u64) -> Result<CacheState> {
    let mut sets = Vec::with_capacity(budgets.classes);
    for c in 0..budgets.classes {
        let counts = history.aggregate(c);
        let mut set = top_k(&counts, budgets.per_class_units);
        let mut recent: Vec<(u64, usize)> = (0..budgets.per_class_contents)
            .filter(|&f| counts[f] > 0 && !set.contains(&f))
            .filter_map(|f| history.last_used[c * history.per_class + f].map(|s| (s, f)))
            .collect();
        // most recent first, lower index on equal recency
        recent.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut victim = set.len();
        for &(_, f) in recent.iter().take(swaps.min(set.len())) {
            victim -= 1;
            set[victim] = f;
        }
        set.sort_unstable();
        sets.push(set);
    }
    CacheState::from_sets(budgets, &sets, epoch)
}

/// Per-class request counts of the given slots of a request stream.
pub fn upcoming_counts(slots: &[Vec<(usize, ContentId)>], classes: usize, per_class: usize) -> Vec<Vec<u32>> {
    let mut counts = vec![vec![0u32; per_class]; classes];
    for slot in slots {
        for &(_, c) in slot {
            counts[c.class][c.index] += 1;
        }
    }
    counts
}

pub fn place_genie(upcoming: &[Vec<u32>], budgets: Budgets, epoch: u64) -> Result<CacheState> {
    let sets: Vec<Vec<usize>> = upcoming.iter().map(|counts| top_k(counts, budgets.per_class_units)).collect();
    CacheState::from_sets(budgets, &sets, epoch)
}

/// Cache hit ratio of one slot; `None` marks a slot without requests.
pub fn chr(hits: usize, requests: usize) -> Result<Option<f64>> {
    if hits > requests {
        return Err(Error::Contract(format!("{hits} hits exceed {requests} requests")));
    }
    Ok((requests > 0).then(|| hits as f64 / requests as f64))
}

/// Mean over slots that carried requests.
pub fn mean_chr(per_slot: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = per_slot.into_iter().flatten().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Everything a placement policy may look at when acting at a DoI start.
pub struct PlacementContext<'a> {
    pub epoch: u64,
    /// Counts of the previous DoI (empty at epoch 0).
    pub history: &'a RequestHistory,
    /// Requests of the coming DoI; only the genie may use them.
    pub upcoming: &'a [Vec<(usize, ContentId)>],
    pub library: &'a ContentLibrary,
    pub budgets: Budgets,
}

pub trait PlacementPolicy {
    fn place(&mut self, ctx: &PlacementContext<'_>) -> Result<CacheState>;
}

pub struct Genie;

impl PlacementPolicy for Genie {
    fn place(&mut self, ctx: &PlacementContext<'_>) -> Result<CacheState> {
        let counts = upcoming_counts(ctx.upcoming, ctx.budgets.classes, ctx.budgets.per_class_contents);
        place_genie(&counts, ctx.budgets, ctx.epoch)
    }
}

pub struct Rcr {
    pub rng: SimRng,
}

impl PlacementPolicy for Rcr {
    fn place(&mut self, ctx: &PlacementContext<'_>) -> Result<CacheState> {
        place_rcr(ctx.budgets, ctx.epoch, &mut self.rng)
    }
}

pub struct Kpop;

impl PlacementPolicy for Kpop {
    fn place(&mut self, ctx: &PlacementContext<'_>) -> Result<CacheState> {
        place_kpop(ctx.history, ctx.budgets, ctx.epoch)
    }
}

pub struct Klru {
    pub swaps: usize,
}

impl PlacementPolicy for Klru {
    fn place(&mut self, ctx: &PlacementContext<'_>) -> Result<CacheState> {
        place_klru(ctx.history, ctx.budgets, self.swaps, ctx.epoch)
    }
}

/// Appends `epoch,class,content,stored` rows.
pub fn write_placement_rows<W: Write>(writer: &mut csv::Writer<W>, state: &CacheState) -> Result<()> {
    for (c, row) in state.placement.iter().enumerate() {
        for (f, &s) in row.iter().enumerate() {
            writer.write_record([state.epoch.to_string(), c.to_string(), f.to_string(), (s as u8).to_string()])?;
        }
    }
    Ok(())
}
