//! Weighted rate matrices and the linear search over VC configurations.

use crate::error::{Error, Result};
use crate::radio::{single_link_snr, ChannelTable, LinkBudget};
use crate::rat::hungarian::{hungarian, HungarianWorkspace};
use crate::rat::partitions::VcConfiguration;

#[derive(Debug, Clone, PartialEq)]
pub struct VcDecision {
    pub config_index: usize,
    pub config: VcConfiguration,
    /// `(ap, prb)` pairs.
    pub assignment: Vec<(usize, usize)>,
    pub wsr: f64,
}

/// `w[(i * B + b) * Z + z] = phi_i * log2(1 + SNR)` of the i-th scheduled CV
/// served by AP `b` alone on pRB `z`.
pub fn rate_weights(scheduled_cvs: &[usize], phi: &[f64], channels: &ChannelTable, budget: &LinkBudget) -> Vec<f64> {
    let (nb, nz) = (channels.num_tx, channels.num_prbs);
    let mut w = Vec::with_capacity(scheduled_cvs.len() * nb * nz);
    for (i, &u) in scheduled_cvs.iter().enumerate() {
        for b in 0..nb {
            for z in 0..nz {
                w.push((1.0 + single_link_snr(channels.gain(u, b, z), budget)).log2() * phi[i]);
            }
        }
    }
    w
}

/// Rate matrix of one configuration: row `b` is filled with the weighted
/// rates of the CV served by AP `b`'s virtual cell.
pub fn weighted_rate_matrix(
    scheduled_cvs: &[usize],
    config: &VcConfiguration,
    phi: &[f64],
    channels: &ChannelTable,
    budget: &LinkBudget,
) -> Result<Vec<Vec<f64>>> {
    if scheduled_cvs.len() != config.num_blocks || phi.len() != scheduled_cvs.len() {
        return Err(Error::Contract(format!(
            "{} scheduled CVs for {} virtual cells",
            scheduled_cvs.len(),
            config.num_blocks
        )));
    }
    let w = rate_weights(scheduled_cvs, phi, channels, budget);
    Ok(matrix_from_weights(&w, config, channels.num_tx, channels.num_prbs))
}

pub fn matrix_from_weights(w: &[f64], config: &VcConfiguration, nb: usize, nz: usize) -> Vec<Vec<f64>> {
    (0..nb)
        .map(|b| {
            let i = config.labels[b] as usize;
            w[(i * nb + b) * nz..(i * nb + b + 1) * nz].to_vec()
        })
        .collect()
}

/// Exhaustive search over `configs` (all of one block count). Each
/// configuration is scored by its maximum-weight matching; the first
/// configuration attaining the maximum wins. Configurations whose row-wise
/// upper bound cannot beat the incumbent are skipped, which does not change
/// the result.
pub fn optimal_vc_and_prb(
    scheduled_cvs: &[usize],
    phi: &[f64],
    channels: &ChannelTable,
    budget: &LinkBudget,
    configs: &[VcConfiguration],
) -> Result<VcDecision> {
    let w = scheduled_cvs.len();
    if w == 0 || phi.len() != w {
        return Err(Error::Contract("at least one scheduled CV with a priority is required".into()));
    }
    if configs.is_empty() || configs.iter().any(|c| c.num_blocks != w || c.labels.len() != channels.num_tx) {
        return Err(Error::Contract(format!("configurations do not match {w} scheduled CVs")));
    }
    let weights = rate_weights(scheduled_cvs, phi, channels, budget);
    search(&weights, channels.num_tx, channels.num_prbs, configs)
}

/// Search over precomputed weights, laid out as in [`rate_weights`].
pub fn search(weights: &[f64], nb: usize, nz: usize, configs: &[VcConfiguration]) -> Result<VcDecision> {
    let n = nb.max(nz);
    let w = configs.first().map_or(0, |c| c.num_blocks);
    // per (i, b): best pRB weight, for the row bound
    let row_max: Vec<f64> = (0..w * nb)
        .map(|ib| weights[ib * nz..(ib + 1) * nz].iter().copied().fold(0.0, f64::max))
        .collect();
    let mut ws = HungarianWorkspace::new();
    let mut m = vec![0.0; n * n];
    let mut best: Option<(usize, f64)> = None;
    for (k, config) in configs.iter().enumerate() {
        if let Some((_, incumbent)) = best {
            let bound: f64 = (0..nb).map(|b| row_max[config.labels[b] as usize * nb + b]).sum();
            if bound <= incumbent {
                continue;
            }
        }
        for b in 0..nb {
            let i = config.labels[b] as usize;
            m[b * n..b * n + nz].copy_from_slice(&weights[(i * nb + b) * nz..(i * nb + b + 1) * nz]);
        }
        let value = ws.max_weight(&m, n);
        if best.is_none_or(|(_, v)| value > v) {
            best = Some((k, value));
        }
    }
    let (k, wsr) = best.ok_or_else(|| Error::Contract("no configuration to search".into()))?;
    let config = configs[k].clone();
    let matrix: Vec<Vec<f64>> = (0..nb)
        .map(|b| {
            let i = config.labels[b] as usize;
            weights[(i * nb + b) * nz..(i * nb + b + 1) * nz].to_vec()
        })
        .collect();
    let assignment = hungarian(&matrix).pairs;
    Ok(VcDecision { config_index: k, config, assignment, wsr })
}
