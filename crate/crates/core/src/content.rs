//! Content library, vehicle request model and the request-count tail bound.
//!
//! A vehicle emits at most one request per slot (Bernoulli with its own
//! probability). Given a request it either exploits, asking for the content
//! most cosine-similar to its previous one within the same class, or explores
//! a different class drawn from its class preferences and then a content from
//! that class's global popularity.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContentId {
    pub class: usize,
    pub index: usize,
}

impl ContentId {
    pub fn new(class: usize, index: usize) -> Self {
        Self { class, index }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentLibrary {
    pub classes: usize,
    pub per_class: usize,
    /// `features[c][f]` is the feature vector of content `f` of class `c`.
    pub features: Vec<Vec<Vec<f64>>>,
    pub content_size_bits: u64,
    /// `popularity[c][f]`, each row sums to one.
    pub popularity: Vec<Vec<f64>>,
    #[serde(skip)]
    similarity: Vec<Vec<Vec<f64>>>,
}

impl ContentLibrary {
    pub fn new(features: Vec<Vec<Vec<f64>>>, popularity: Vec<Vec<f64>>, content_size_bits: u64) -> Result<Self> {
        let classes = features.len();
        let per_class = features.first().map_or(0, Vec::len);
        if classes == 0 || per_class == 0 {
            return Err(Error::Domain("library needs at least one class and one content".into()));
        }
        if popularity.len() != classes || features.iter().any(|c| c.len() != per_class) {
            return Err(Error::Domain("ragged library".into()));
        }
        for row in &popularity {
            let sum: f64 = row.iter().sum();
            if row.len() != per_class || (sum - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < 0.0) {
                return Err(Error::Domain("popularity rows must be distributions".into()));
            }
        }
        let mut lib = Self { classes, per_class, features, content_size_bits, popularity, similarity: Vec::new() };
        lib.similarity = lib
            .features
            .iter()
            .map(|class| {
                class
                    .iter()
                    .map(|a| class.iter().map(|b| cosine_similarity(a, b)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(lib)
    }

    pub fn num_contents(&self) -> usize {
        self.classes * self.per_class
    }

    pub fn similarity(&self, class: usize, a: usize, b: usize) -> f64 {
        self.similarity[class][a][b]
    }

    /// Most similar content to `index` within its class, excluding itself;
    /// ties go to the lowest index. A single-content class returns `index`.
    pub fn most_similar(&self, class: usize, index: usize) -> usize {
        let mut best: Option<(usize, f64)> = None;
        for other in 0..self.per_class {
            if other == index {
                continue;
            }
            let s = self.similarity[class][index][other];
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((other, s));
            }
        }
        best.map_or(index, |(i, _)| i)
    }

    /// The `k` contents most similar to `index` (excluding it), best first.
    pub fn top_similar(&self, class: usize, index: usize, k: usize) -> Vec<usize> {
        let mut others: Vec<usize> = (0..self.per_class).filter(|&o| o != index).collect();
        others.sort_by(|&a, &b| {
            self.similarity[class][index][b]
                .total_cmp(&self.similarity[class][index][a])
                .then(a.cmp(&b))
        });
        others.truncate(k);
        others
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let raw: ContentLibrary = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::new(raw.features, raw.popularity, raw.content_size_bits)
    }
}

/// Draws the library: i.i.d. uniform features and a Zipf-like popularity per
/// class whose ranks are shuffled across the class's contents.
pub fn build_library(
    classes: usize,
    per_class: usize,
    features: usize,
    zipf_exponent: f64,
    content_size_bits: u64,
    rng: &mut SimRng,
) -> Result<ContentLibrary> {
    if classes == 0 || per_class == 0 || features == 0 {
        return Err(Error::Config("library dimensions must be at least 1".into()));
    }
    let mut feats = Vec::with_capacity(classes);
    for _ in 0..classes {
        let mut class = Vec::with_capacity(per_class);
        for _ in 0..per_class {
            let v = loop {
                let v: Vec<f64> = (0..features).map(|_| rng.random::<f64>()).collect();
                if v.iter().any(|&g| g > 0.0) {
                    break v;
                }
            };
            class.push(v);
        }
        feats.push(class);
    }
    let weights: Vec<f64> = (1..=per_class).map(|r| 1.0 / (r as f64).powf(zipf_exponent)).collect();
    let total: f64 = weights.iter().sum();
    let mut popularity = Vec::with_capacity(classes);
    for _ in 0..classes {
        let mut ranks: Vec<usize> = (0..per_class).collect();
        // Fisher-Yates on our own stream keeps the draw order explicit.
        for i in (1..per_class).rev() {
            let j = rng.random_range(0..=i);
            ranks.swap(i, j);
        }
        popularity.push(ranks.iter().map(|&r| weights[r] / total).collect());
    }
    ContentLibrary::new(feats, popularity, content_size_bits)
}

pub fn library_from_config(cfg: &SimConfig, rng: &mut SimRng) -> Result<ContentLibrary> {
    build_library(cfg.num_classes, cfg.contents_per_class, cfg.features_per_content, cfg.zipf_exponent, cfg.content_size_bits, rng)
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Domain("feature vectors differ in length".into()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Domain("cosine similarity of a zero vector".into()));
    }
    Ok(dot / (na * nb))
}

/// Request behaviour of one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct CvPreferenceState {
    pub request_prob: f64,
    pub exploit_prob: f64,
    pub class_prefs: Vec<f64>,
    pub last_request: Option<ContentId>,
}

impl CvPreferenceState {
    pub fn new(request_prob: f64, exploit_prob: f64, class_prefs: Vec<f64>) -> Result<Self> {
        let sum: f64 = class_prefs.iter().sum();
        if !(0.0..=1.0).contains(&request_prob) || !(0.0..=1.0).contains(&exploit_prob) {
            return Err(Error::Domain("probabilities must lie in [0, 1]".into()));
        }
        if class_prefs.is_empty() || (sum - 1.0).abs() > 1e-9 || class_prefs.iter().any(|&p| p < 0.0) {
            return Err(Error::Domain("class preferences must be a distribution".into()));
        }
        Ok(Self { request_prob, exploit_prob, class_prefs, last_request: None })
    }
}

/// Draws the vehicle population: uniform request and exploitation
/// probabilities over the configured ranges, flat-Dirichlet class preferences.
pub fn build_population(cfg: &SimConfig, rng: &mut SimRng) -> Vec<CvPreferenceState> {
    let (plo, phi) = cfg.request_prob_range;
    let (elo, ehi) = cfg.exploit_prob_range;
    (0..cfg.num_cvs)
        .map(|_| {
            let request_prob = plo + (phi - plo) * rng.random::<f64>();
            let exploit_prob = elo + (ehi - elo) * rng.random::<f64>();
            let raw: Vec<f64> = (0..cfg.num_classes).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = raw.iter().sum();
            let class_prefs = raw.iter().map(|r| r / total).collect();
            CvPreferenceState { request_prob, exploit_prob, class_prefs, last_request: None }
        })
        .collect()
}

fn sample_weighted(weights: impl Iterator<Item = (usize, f64)> + Clone, rng: &mut SimRng) -> usize {
    let total: f64 = weights.clone().map(|(_, w)| w).sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, w) in weights {
        if w <= 0.0 {
            continue;
        }
        last = i;
        if u < w {
            return i;
        }
        u -= w;
    }
    last
}

/// One slot of the request process for one vehicle. Updates `last_request`
/// when a request is emitted.
pub fn generate_request(cv: &mut CvPreferenceState, lib: &ContentLibrary, rng: &mut SimRng) -> Option<ContentId> {
    let arrival: f64 = rng.random();
    if arrival >= cv.request_prob {
        return None;
    }
    let mode: f64 = rng.random();
    let chosen = match cv.last_request {
        Some(last) if mode < cv.exploit_prob => ContentId::new(last.class, lib.most_similar(last.class, last.index)),
        last => {
            let prefs = &cv.class_prefs;
            let class = match last {
                Some(prev) if lib.classes > 1 && prefs.iter().enumerate().any(|(c, &p)| c != prev.class && p > 0.0) => {
                    sample_weighted(prefs.iter().copied().enumerate().filter(move |&(c, _)| c != prev.class), rng)
                }
                _ => sample_weighted(prefs.iter().copied().enumerate(), rng),
            };
            let index = sample_weighted(lib.popularity[class].iter().copied().enumerate(), rng);
            ContentId::new(class, index)
        }
    };
    cv.last_request = Some(chosen);
    Some(chosen)
}

/// Requests of a whole episode, slot-major: `slots[t]` lists `(cv, content)`
/// in vehicle order.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestStream {
    pub slots: Vec<Vec<(usize, ContentId)>>,
}

impl RequestStream {
    pub fn generate(population: &[CvPreferenceState], lib: &ContentLibrary, num_slots: usize, rng: &mut SimRng) -> Self {
        let mut cvs: Vec<CvPreferenceState> = population.iter().cloned().map(|mut c| {
            c.last_request = None;
            c
        }).collect();
        let slots = (0..num_slots)
            .map(|_| {
                cvs.iter_mut()
                    .enumerate()
                    .filter_map(|(u, cv)| generate_request(cv, lib, rng).map(|c| (u, c)))
                    .collect()
            })
            .collect();
        Self { slots }
    }

    pub fn total_requests(&self) -> usize {
        self.slots.iter().map(Vec::len).sum()
    }
}

/// An in-flight content demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub cv: usize,
    pub content: ContentId,
    pub arrival_slot: u64,
    /// Edge-server deadline in slots, fixed at arrival.
    pub server_deadline: u64,
    pub remaining_deadline: u64,
    pub remaining_payload: u64,
    pub cache_hit: bool,
    /// First slot in which the payload is available at the edge.
    pub extraction_ready_slot: u64,
    pub completion_slot: Option<u64>,
    /// Slots in which some bits of this request were delivered.
    pub drained_slots: u64,
}

impl Request {
    pub fn available_at(&self, slot: u64) -> bool {
        self.cache_hit || self.extraction_ready_slot <= slot
    }
}

/// Relative entropy `D_p(x)` between Bernoulli(x) and Bernoulli(p).
pub fn relative_entropy(x: f64, p: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    term(x, p) + term(1.0 - x, 1.0 - p)
}

/// Upper bound on `Pr{Psi >= xi}` for a sum of independent Bernoulli
/// variables with success probabilities `p`: `exp(-U * D_pbar(xi / U))`.
pub fn chernoff_bound(p: &[f64], xi: f64) -> Result<f64> {
    if p.is_empty() || p.iter().any(|&q| !(q > 0.0 && q <= 1.0)) {
        return Err(Error::Domain("probabilities must lie in (0, 1]".into()));
    }
    let u = p.len() as f64;
    let mean: f64 = p.iter().sum();
    if !(xi > mean && xi < u) {
        return Err(Error::Domain(format!("threshold {xi} must lie strictly between the mean {mean} and {u}")));
    }
    let chi = xi / u;
    Ok((-u * relative_entropy(chi, mean / u)).exp())
}

/// Exact `Pr{Psi >= k}` for a Poisson-binomial sum.
pub fn poisson_binomial_tail(p: &[f64], k: usize) -> f64 {
    let mut dist = vec![0.0; p.len() + 1];
    dist[0] = 1.0;
    for (n, &q) in p.iter().enumerate() {
        for j in (0..=n + 1).rev() {
            let stay = dist[j] * (1.0 - q);
            let up = if j > 0 { dist[j - 1] * q } else { 0.0 };
            dist[j] = stay + up;
        }
    }
    dist.iter().skip(k).sum()
}
