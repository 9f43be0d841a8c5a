//! Oracle suites behind `vecsim validate`.

use ndarray::Array2;
use rand::Rng;

use crate::agent::codec::ActionCodec;
use crate::agent::qnet::QNetwork;
use crate::cache::Budgets;
use crate::config::SimConfig;
use crate::content::{chernoff_bound, poisson_binomial_tail, ContentId, Request};
use crate::radio::{ChannelTable, LinkBudget};
use crate::rat::hungarian::{brute_force_max, hungarian, Assignment};
use crate::rat::partitions::{enumerate_partitions, stirling2};
use crate::rat::scheduling::{eligible_cvs, soi};
use crate::rat::wsr::{optimal_vc_and_prb, weighted_rate_matrix};
use crate::rng::{substream, SimRng};

pub type Solver = fn(&[Vec<f64>]) -> Assignment;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SuiteReport {
    fn new(name: &'static str, failure: Option<String>, ok: String) -> Self {
        match failure {
            Some(detail) => Self { name, passed: false, detail },
            None => Self { name, passed: true, detail: ok },
        }
    }
}

fn random_matrix(rng: &mut SimRng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.random::<f64>() * 100.0).collect()).collect()
}

/// Compares `solver` with exhaustive search on random square matrices.
pub fn hungarian_suite(solver: Solver, trials: usize, n: usize, seed: u64) -> SuiteReport {
    let mut rng = substream(seed, "validate-hungarian");
    let mut failure = None;
    for trial in 0..trials {
        let m = random_matrix(&mut rng, n, n);
        let got = solver(&m);
        let expected = brute_force_max(&m);
        let used: std::collections::HashSet<usize> = got.pairs.iter().map(|p| p.1).collect();
        let recomputed: f64 = got.pairs.iter().map(|&(i, j)| m[i][j]).sum();
        if got.weight != expected || used.len() != n || got.pairs.len() != n || recomputed != got.weight {
            failure = Some(format!("trial {trial}: weight {} vs optimum {expected}; matrix {m:?}", got.weight));
            break;
        }
    }
    SuiteReport::new("hungarian", failure, format!("{trials} random {n}x{n} matrices"))
}

/// Counts set partitions by growing restricted label strings.
pub fn brute_force_set_partitions(n: usize, k: usize) -> u64 {
    fn rec(i: usize, n: usize, blocks: usize, k: usize) -> u64 {
        if i == n {
            return (blocks == k) as u64;
        }
        let mut total = 0;
        for label in 0..=blocks.min(k.saturating_sub(1)) {
            let next = if label == blocks { blocks + 1 } else { blocks };
            if next <= k {
                total += rec(i + 1, n, next, k);
            }
        }
        total
    }
    rec(0, n, 0, k)
}

pub fn partition_suite(max_aps: usize, max_cells: usize) -> SuiteReport {
    let mut failure = None;
    'outer: for b in 1..=max_aps {
        for w in 1..=max_cells.min(b) {
            let s = brute_force_set_partitions(b, w);
            let fact: u64 = (1..=w as u64).product();
            let count = enumerate_partitions(b, w).map(|v| v.len() as u64).unwrap_or(0);
            if stirling2(b, w) != s || count != fact * s {
                failure = Some(format!("B={b} W={w}: enumerated {count}, expected {}", fact * s));
                break 'outer;
            }
        }
    }
    SuiteReport::new("partitions", failure, format!("B<={max_aps}, W<={max_cells}"))
}

/// Algorithm-4 search against configurations x permutations.
pub fn vc_search_suite(seeds: u64) -> SuiteReport {
    let budget = LinkBudget::access_point(&SimConfig::default());
    let mut failure = None;
    let mut cases = 0;
    'outer: for seed in 0..seeds {
        let mut rng = substream(seed, "validate-vc");
        for nb in 1..=4 {
            for nz in 1..=4 {
                let gains: Vec<f64> = (0..4 * nb * nz).map(|_| rng.random::<f64>() * 1e-8).collect();
                let table = ChannelTable::from_gains(4, nb, nz, gains).expect("sized");
                for w in 1..=nb {
                    let configs = enumerate_partitions(nb, w).expect("valid");
                    let cvs: Vec<usize> = (0..w).collect();
                    let phi: Vec<f64> = (0..w).map(|i| 1.0 / (i + 1) as f64).collect();
                    let got = optimal_vc_and_prb(&cvs, &phi, &table, &budget, &configs).expect("valid").wsr;
                    let best = configs
                        .iter()
                        .map(|c| brute_force_max(&weighted_rate_matrix(&cvs, c, &phi, &table, &budget).expect("valid")))
                        .fold(f64::NEG_INFINITY, f64::max);
                    cases += 1;
                    if got != best {
                        failure = Some(format!("seed {seed} B={nb} Z={nz} W={w}: {got} vs {best}"));
                        break 'outer;
                    }
                }
            }
        }
    }
    SuiteReport::new("vc-search", failure, format!("{cases} cases"))
}

pub fn chernoff_suite(slots: usize, seed: u64) -> SuiteReport {
    let mut rng = substream(seed, "validate-chernoff");
    let mut failure = None;
    let mut checked = 0;
    let exact = poisson_binomial_tail(&[0.5; 10], 8);
    if (exact - 56.0 / 1024.0).abs() > 1e-12 {
        failure = Some(format!("exact tail {exact} differs from 56/1024"));
    }
    'outer: for u in [5usize, 10, 20] {
        let profiles: [Vec<f64>; 3] = [
            vec![0.5; u],
            (0..u).map(|i| 0.1 + 0.9 * i as f64 / (u - 1) as f64).collect(),
            (0..u).map(|i| if i % 2 == 0 { 0.2 } else { 0.7 }).collect(),
        ];
        for p in profiles {
            let mean: f64 = p.iter().sum();
            let xi = mean + 0.35 * (u as f64 - mean);
            let bound = match chernoff_bound(&p, xi) {
                Ok(b) => b,
                Err(e) => {
                    failure = Some(e.to_string());
                    break 'outer;
                }
            };
            let hits = (0..slots)
                .filter(|_| p.iter().filter(|&&q| rng.random::<f64>() < q).count() as f64 >= xi)
                .count();
            let empirical = hits as f64 / slots as f64;
            checked += 1;
            if empirical > bound {
                failure = Some(format!("U={u} xi={xi:.3}: empirical {empirical} exceeds bound {bound}"));
                break 'outer;
            }
        }
    }
    SuiteReport::new("chernoff", failure, format!("{checked} profiles over {slots} slots"))
}

/// Weights of layer `l` in row-major order, then its biases.
fn param_mut(net: &mut QNetwork, l: usize, idx: usize) -> &mut f64 {
    let nw = net.weights[l].len();
    if idx < nw {
        let cols = net.weights[l].ncols();
        &mut net.weights[l][[idx / cols, idx % cols]]
    } else {
        &mut net.biases[l][idx - nw]
    }
}

/// Analytic Q-network gradients against central differences.
pub fn gradient_suite(dims: &[usize], seed: u64) -> (SuiteReport, f64) {
    let mut rng = substream(seed, "validate-gradient");
    let net = QNetwork::new(dims, &mut rng).expect("valid dims");
    let batch = 4;
    let x = Array2::from_shape_simple_fn((batch, dims[0]), || rng.random_range(0.0..1.0));
    let out = *dims.last().unwrap();
    let actions: Vec<usize> = (0..batch).map(|_| rng.random_range(0..out)).collect();
    let targets: Vec<f64> = (0..batch).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (_, grads) = net.loss_and_gradients(x.view(), &actions, &targets);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut probe = net.clone();
    for l in 0..net.weights.len() {
        let analytic: Vec<f64> = grads.weights[l].iter().chain(grads.biases[l].iter()).copied().collect();
        for (idx, &a) in analytic.iter().enumerate() {
            let orig = *param_mut(&mut probe, l, idx);
            *param_mut(&mut probe, l, idx) = orig + h;
            let up = probe.loss(x.view(), &actions, &targets);
            *param_mut(&mut probe, l, idx) = orig - h;
            let down = probe.loss(x.view(), &actions, &targets);
            *param_mut(&mut probe, l, idx) = orig;
            let numeric = (up - down) / (2.0 * h);
            let scale = a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((a - numeric).abs() / scale);
        }
    }
    let failure = (worst >= 1e-4).then(|| format!("max relative error {worst:.3e}"));
    (SuiteReport::new("gradient", failure, format!("max relative error {worst:.3e}")), worst)
}

pub fn codec_suite() -> SuiteReport {
    let mut failure = None;
    'outer: for k in 0..=5 {
        let codec = ActionCodec::new(Budgets::new(3, 5, k, 3 * k).expect("feasible")).expect("small");
        for i in 0..codec.len() {
            let back = codec.decode(i, 0).and_then(|s| codec.encode(&s));
            if back.as_ref().ok() != Some(&i) {
                failure = Some(format!("k={k}: index {i} round-trips to {back:?}"));
                break 'outer;
            }
        }
    }
    SuiteReport::new("codec", failure, "all indices for k=0..5".into())
}

/// Hand traces of the eligibility rules.
pub fn eligibility_suite() -> SuiteReport {
    let req = |cv, arrival, deadline, payload, hit: bool, ready| Request {
        cv,
        content: ContentId::new(0, 0),
        arrival_slot: arrival,
        server_deadline: deadline,
        remaining_deadline: deadline,
        remaining_payload: payload,
        cache_hit: hit,
        extraction_ready_slot: ready,
        completion_slot: None,
        drained_slots: 0,
    };
    let mut failure = None;
    if !eligible_cvs(&soi(10, 10), &[], 10).is_empty() {
        failure = Some("empty ledger produced eligible CVs".to_string());
    }
    let miss = [req(0, 8, 10, 100, false, 13)];
    for t in 10..16 {
        let e = eligible_cvs(&soi(t, 10), &miss, t);
        if e.is_empty() != (t < 13) {
            failure = Some(format!("miss arriving at 8 eligibility wrong at slot {t}"));
        }
    }
    let two = [req(1, 9, 7, 50, true, 9), req(1, 10, 4, 70, true, 10)];
    let e = eligible_cvs(&soi(10, 10), &two, 10);
    if e.min_remaining_deadline != vec![4] || e.remaining_payload != vec![70] {
        failure = Some(format!("two-request trace gave {e:?}"));
    }
    SuiteReport::new("eligibility", failure, "3 traces".into())
}

/// Runs every suite with `solver` standing in for the Hungarian method.
pub fn run_all(solver: Solver) -> Vec<SuiteReport> {
    vec![
        hungarian_suite(solver, 1000, 6, 0),
        partition_suite(8, 5),
        vc_search_suite(5),
        chernoff_suite(100_000, 0),
        gradient_suite(&[330, 16, 10], 0).0,
        codec_suite(),
        eligibility_suite(),
    ]
}

pub fn default_solver(m: &[Vec<f64>]) -> Assignment {
    hungarian(m)
}
