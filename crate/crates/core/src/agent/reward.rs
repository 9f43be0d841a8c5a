//! Per-DoI placement reward.

use crate::cache::CacheState;
use crate::content::ContentId;

/// Per slot and content: hits of stored top contents earn `delta_pop_sim`
/// each, hits of other stored contents `delta_hit` each, and every request for
/// an unstored content costs 1. The sum is averaged over the slots.
pub fn compute_reward(
    slots: &[Vec<(ContentId, bool)>],
    cache: &CacheState,
    top: &[Vec<bool>],
    delta_pop_sim: f64,
    delta_hit: f64,
) -> f64 {
    if slots.is_empty() {
        return 0.0;
    }
    let classes = cache.placement.len();
    let per_class = cache.placement.first().map_or(0, Vec::len);
    let mut requests = vec![0u32; classes * per_class];
    let mut hits = vec![0u32; classes * per_class];
    let mut total = 0.0;
    for slot in slots {
        requests.iter_mut().for_each(|r| *r = 0);
        hits.iter_mut().for_each(|h| *h = 0);
        for &(c, hit) in slot {
            let i = c.class * per_class + c.index;
            requests[i] += 1;
            hits[i] += hit as u32;
        }
        for c in 0..classes {
            for f in 0..per_class {
                let i = c * per_class + f;
                if requests[i] == 0 {
                    continue;
                }
                total += if cache.placement[c][f] {
                    hits[i] as f64 * if top[c][f] { delta_pop_sim } else { delta_hit }
                } else {
                    -(requests[i] as f64)
                };
            }
        }
    }
    total / slots.len() as f64
}
