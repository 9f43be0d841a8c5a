//! Bijection between action indices and budget-feasible placements.
//!
//! Each class picks a `k`-subset of its `F` contents, ranked in colex order
//! (`rank = sum_i C(a_i, i + 1)` over the sorted members). Class ranks are
//! combined in mixed radix with class 0 least significant.

use crate::cache::{Budgets, CacheState};
use crate::error::{Error, Result};

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionCodec {
    pub budgets: Budgets,
    pub per_class: u64,
    pub total: u64,
}

impl ActionCodec {
    pub fn new(budgets: Budgets) -> Result<Self> {
        let per_class = binomial(budgets.per_class_contents, budgets.per_class_units);
        let total = (0..budgets.classes)
            .try_fold(1u64, |acc, _| acc.checked_mul(per_class))
            .filter(|&t| t <= 1 << 24)
            .ok_or_else(|| Error::Config("placement action space is too large".into()))?;
        Ok(Self { budgets, per_class, total })
    }

    pub fn len(&self) -> usize {
        self.total as usize
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn decode(&self, index: usize, epoch: u64) -> Result<CacheState> {
        if index as u64 >= self.total {
            return Err(Error::Domain(format!("action {index} out of range 0..{}", self.total)));
        }
        let k = self.budgets.per_class_units;
        let mut rest = index as u64;
        let mut sets = Vec::with_capacity(self.budgets.classes);
        for _ in 0..self.budgets.classes {
            let mut rank = rest % self.per_class;
            rest /= self.per_class;
            let mut set = vec![0; k];
            for i in (1..=k).rev() {
                let mut a = i - 1;
                while binomial(a + 1, i) <= rank {
                    a += 1;
                }
                rank -= binomial(a, i);
                set[i - 1] = a;
            }
            sets.push(set);
        }
        CacheState::from_sets(self.budgets, &sets, epoch)
    }

    pub fn encode(&self, state: &CacheState) -> Result<usize> {
        state.check()?;
        if state.budgets != self.budgets {
            return Err(Error::Domain("placement budgets differ from the codec".into()));
        }
        let mut index = 0u64;
        for c in (0..self.budgets.classes).rev() {
            let rank: u64 = state.stored(c).iter().enumerate().map(|(i, &a)| binomial(a, i + 1)).sum();
            index = index * self.per_class + rank;
        }
        Ok(index as usize)
    }
}
