//! Ordered partitions of the AP set into labeled virtual cells.
//!
//! A configuration is stored as a label vector: `labels[b]` is the block
//! (virtual cell) of AP `b`. Ordered partitions into `W` non-empty blocks are
//! exactly the surjective label vectors, enumerated here in lexicographic
//! order.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VcConfiguration {
    pub labels: Vec<u8>,
    pub num_blocks: usize,
}

impl VcConfiguration {
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks];
        for (b, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(b);
        }
        blocks
    }

    pub fn block(&self, i: usize) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, &l)| l as usize == i).map(|(b, _)| b).collect()
    }
}

/// Stirling number of the second kind by inclusion-exclusion.
pub fn stirling2(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    if n == 0 {
        return 1;
    }
    let mut sum: i128 = 0;
    let mut binom: i128 = 1;
    for j in 0..=k {
        let term = binom * ((k - j) as i128).pow(n as u32);
        sum += if j % 2 == 0 { term } else { -term };
        binom = binom * (k - j) as i128 / (j + 1) as i128;
    }
    let fact: i128 = (1..=k as i128).product();
    (sum / fact) as u64
}

pub fn enumerate_partitions(num_aps: usize, num_blocks: usize) -> Result<Vec<VcConfiguration>> {
    if num_blocks == 0 || num_blocks > num_aps {
        return Err(Error::Domain(format!("cannot split {num_aps} APs into {num_blocks} non-empty cells")));
    }
    if num_aps > 16 {
        return Err(Error::Domain("too many APs for exhaustive enumeration".into()));
    }
    let mut out = Vec::new();
    let mut labels = vec![0u8; num_aps];
    let mut used = vec![0usize; num_blocks];
    used[0] = num_aps;
    loop {
        if used.iter().all(|&n| n > 0) {
            out.push(VcConfiguration { labels: labels.clone(), num_blocks });
        }
        // odometer, last AP fastest
        let mut pos = num_aps;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            used[labels[pos] as usize] -= 1;
            if (labels[pos] as usize) + 1 < num_blocks {
                labels[pos] += 1;
                used[labels[pos] as usize] += 1;
                break;
            }
            labels[pos] = 0;
            used[0] += 1;
        }
    }
}

/// Enumerations memoized per `(B, W)`.
#[derive(Debug, Default)]
pub struct PartitionCache {
    cache: HashMap<(usize, usize), Arc<Vec<VcConfiguration>>>,
}

impl PartitionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, num_aps: usize, num_blocks: usize) -> Result<Arc<Vec<VcConfiguration>>> {
        if let Some(hit) = self.cache.get(&(num_aps, num_blocks)) {
            return Ok(Arc::clone(hit));
        }
        let configs = Arc::new(enumerate_partitions(num_aps, num_blocks)?);
        self.cache.insert((num_aps, num_blocks), Arc::clone(&configs));
        Ok(configs)
    }
}
