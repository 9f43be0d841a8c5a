//! Eligibility, virtual-cell count and earliest-deadline priorities.

use std::collections::BTreeMap;

use crate::content::Request;
use crate::error::{Error, Result};

/// Slots whose requests may still be pending at slot `t`, clamped at 0.
pub fn soi(t: u64, max_deadline: u64) -> Vec<u64> {
    let mut slots: Vec<u64> = (1..=max_deadline).map(|z| (t + z).saturating_sub(max_deadline)).collect();
    slots.dedup();
    slots
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EligibilityResult {
    /// Valid CVs in ascending id order.
    pub valid_cvs: Vec<usize>,
    pub min_remaining_deadline: Vec<u64>,
    pub remaining_payload: Vec<u64>,
    /// Ledger index of the request that set the reported deadline.
    pub request_index: Vec<usize>,
}

impl EligibilityResult {
    pub fn len(&self) -> usize {
        self.valid_cvs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valid_cvs.is_empty()
    }
}

/// A request counts when it arrived in the SoI, is available at the edge at
/// slot `t`, and still has deadline and payload left. Per CV the smallest
/// remaining deadline is reported (earliest arrival on ties) together with
/// that request's payload.
pub fn eligible_cvs(soi: &[u64], requests: &[Request], t: u64) -> EligibilityResult {
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, r) in requests.iter().enumerate() {
        let valid = soi.binary_search(&r.arrival_slot).is_ok()
            && r.available_at(t)
            && r.remaining_deadline > 0
            && r.remaining_payload > 0;
        if !valid {
            continue;
        }
        best.entry(r.cv)
            .and_modify(|j| {
                let cur = &requests[*j];
                if (r.remaining_deadline, r.arrival_slot) < (cur.remaining_deadline, cur.arrival_slot) {
                    *j = i;
                }
            })
            .or_insert(i);
    }
    let mut out = EligibilityResult::default();
    for (cv, i) in best {
        out.valid_cvs.push(cv);
        out.min_remaining_deadline.push(requests[i].remaining_deadline);
        out.remaining_payload.push(requests[i].remaining_payload);
        out.request_index.push(i);
    }
    out
}

pub fn vc_count(num_valid: usize, max_vcs: usize) -> usize {
    num_valid.min(max_vcs)
}

/// Priority weights inversely proportional to the remaining deadlines,
/// normalized to sum to one.
pub fn priorities(deadlines: &[u64]) -> Result<Vec<f64>> {
    if deadlines.contains(&0) {
        return Err(Error::Contract("zero remaining deadline cannot be scheduled".into()));
    }
    let total: f64 = deadlines.iter().map(|&d| d as f64).sum();
    let raw: Vec<f64> = deadlines.iter().map(|&d| total / d as f64).collect();
    let norm: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|p| p / norm).collect())
}

/// Positions (into the eligibility lists) of the top-`w` CVs by priority,
/// highest first; ties go to the larger remaining payload, then the lower id.
pub fn schedule(elig: &EligibilityResult, phi: &[f64], w: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..elig.len()).collect();
    order.sort_by(|&a, &b| {
        phi[b].total_cmp(&phi[a])
            .then(elig.remaining_payload[b].cmp(&elig.remaining_payload[a]))
            .then(elig.valid_cvs[a].cmp(&elig.valid_cvs[b]))
    });
    order.truncate(w);
    order
}
