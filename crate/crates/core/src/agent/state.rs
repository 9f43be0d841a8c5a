//! Agent state built from the previous DoI's request history.

use crate::cache::{top_k, RequestHistory};
use crate::content::{ContentId, ContentLibrary};

#[derive(Debug, Clone, PartialEq)]
pub struct CppState {
    pub num_cvs: usize,
    pub classes: usize,
    pub per_class: usize,
    /// Per-CV request counts, `[(u * C + c) * F + f]`.
    pub requests: Vec<u32>,
    pub hits: Vec<u32>,
    /// `[c * F + f]`.
    pub top: Vec<bool>,
    pub popularity: Vec<f64>,
}

impl CppState {
    pub fn flat_len(num_cvs: usize, classes: usize, per_class: usize) -> usize {
        2 * num_cvs * classes * per_class + 2 * classes * per_class
    }

    /// Network input: counts scaled by `count_scale`, then the top mask and
    /// the measured popularity.
    pub fn flatten(&self, count_scale: f64) -> Vec<f64> {
        let mut x = Vec::with_capacity(Self::flat_len(self.num_cvs, self.classes, self.per_class));
        x.extend(self.requests.iter().map(|&r| r as f64 * count_scale));
        x.extend(self.hits.iter().map(|&h| h as f64 * count_scale));
        x.extend(self.top.iter().map(|&t| t as u8 as f64));
        x.extend(self.popularity.iter().copied());
        x
    }

    pub fn top_rows(&self) -> Vec<Vec<bool>> {
        self.top.chunks(self.per_class).map(<[bool]>::to_vec).collect()
    }
}

/// Per class: the `k` most popular contents and, for each, its `k` most
/// similar contents.
pub fn top_contents(lib: &ContentLibrary, ranked: &[Vec<usize>], k: usize) -> Vec<bool> {
    let mut top = vec![false; lib.classes * lib.per_class];
    for (c, popular) in ranked.iter().enumerate() {
        for &f in popular.iter().take(k) {
            top[c * lib.per_class + f] = true;
            for g in lib.top_similar(c, f, k) {
                top[c * lib.per_class + g] = true;
            }
        }
    }
    top
}

/// State at the start of DoI `epoch`. `history` holds the counts of DoI
/// `epoch - 1`; at epoch 0 only the top mask is set, from the library's
/// popularity.
pub fn encode_state(history: &RequestHistory, lib: &ContentLibrary, epoch: u64, k: usize) -> CppState {
    let (u, c, f) = (history.num_cvs, lib.classes, lib.per_class);
    let mut popularity = vec![0.0; c * f];
    let ranked: Vec<Vec<usize>> = if epoch == 0 {
        lib.popularity
            .iter()
            .map(|p| {
                let mut order: Vec<usize> = (0..f).collect();
                order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
                order
            })
            .collect()
    } else {
        (0..c)
            .map(|class| {
                let counts = history.aggregate(class);
                let total: u32 = counts.iter().sum();
                if total > 0 {
                    for (g, &n) in counts.iter().enumerate() {
                        popularity[class * f + g] = n as f64 / total as f64;
                    }
                }
                top_k(&counts, f)
            })
            .collect()
    };
    let (requests, hits) = if epoch == 0 {
        (vec![0; u * c * f], vec![0; u * c * f])
    } else {
        let mut req = Vec::with_capacity(u * c * f);
        let mut hit = Vec::with_capacity(u * c * f);
        for cv in 0..u {
            for class in 0..c {
                for g in 0..f {
                    req.push(history.cv_requests(cv, ContentId::new(class, g)));
                    hit.push(history.cv_hits(cv, ContentId::new(class, g)));
                }
            }
        }
        (req, hit)
    };
    CppState { num_cvs: u, classes: c, per_class: f, requests, hits, top: top_contents(lib, &ranked, k), popularity }
}
