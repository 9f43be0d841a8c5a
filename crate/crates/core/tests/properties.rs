use proptest::prelude::*;

use vecsim::agent::ActionCodec;
use vecsim::cache::Budgets;
use vecsim::content::{chernoff_bound, poisson_binomial_tail};
use vecsim::mobility::{init_vehicles, step_positions, RoadNetwork};
use vecsim::radio::{rate_bps, tx_bits};
use vecsim::rat::{enumerate_partitions, hungarian, priorities, soi, stirling2};
use vecsim::rng::{substream, MOBILITY};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..50.0, cols), rows)
}

/// Best sum over partial matchings, by recursion over rows.
fn exhaustive(m: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
    if row == m.len() {
        return 0.0;
    }
    let mut best = exhaustive(m, row + 1, used);
    for c in 0..used.len() {
        if !used[c] {
            used[c] = true;
            best = best.max(m[row][c] + exhaustive(m, row + 1, used));
            used[c] = false;
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hungarian_is_optimal_on_rectangles((r, c) in (1usize..6, 1usize..6), seed in any::<u64>()) {
        let m = {
            use rand::Rng;
            let mut rng = substream(seed, "prop-hungarian");
            (0..r).map(|_| (0..c).map(|_| rng.random_range(0.0..50.0)).collect::<Vec<f64>>()).collect::<Vec<_>>()
        };
        let a = hungarian(&m);
        let best = exhaustive(&m, 0, &mut vec![false; c]);
        prop_assert!((a.weight - best).abs() <= 1e-9 * best.max(1.0));
        prop_assert_eq!(a.pairs.len(), r.min(c));
        let mut rows: Vec<usize> = a.pairs.iter().map(|p| p.0).collect();
        let mut cols: Vec<usize> = a.pairs.iter().map(|p| p.1).collect();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        prop_assert_eq!(rows.len(), a.pairs.len());
        prop_assert_eq!(cols.len(), a.pairs.len());
    }

    #[test]
    fn hungarian_weight_matches_its_pairs(m in matrix(4, 4)) {
        let a = hungarian(&m);
        let sum: f64 = a.pairs.iter().map(|&(i, j)| m[i][j]).sum();
        prop_assert_eq!(sum, a.weight);
    }

    #[test]
    fn partitions_are_distinct_and_surjective(b in 1usize..8, w in 1usize..6) {
        prop_assume!(w <= b);
        let configs = enumerate_partitions(b, w).unwrap();
        let fact: u64 = (1..=w as u64).product();
        prop_assert_eq!(configs.len() as u64, fact * stirling2(b, w));
        for pair in configs.windows(2) {
            prop_assert!(pair[0].labels < pair[1].labels);
        }
        for c in configs.iter() {
            prop_assert!((0..w as u8).all(|l| c.labels.contains(&l)));
            prop_assert_eq!(c.blocks().iter().map(Vec::len).sum::<usize>(), b);
        }
    }

    #[test]
    fn priorities_favor_short_deadlines(d in prop::collection::vec(1u64..20, 1..8)) {
        let phi = priorities(&d).unwrap();
        prop_assert!((phi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..d.len() {
            for j in 0..d.len() {
                if d[i] < d[j] {
                    prop_assert!(phi[i] > phi[j]);
                }
            }
        }
    }

    #[test]
    fn soi_window(t in 0u64..500, d in 1u64..20) {
        let s = soi(t, d);
        prop_assert!(s.contains(&t));
        prop_assert!(s.len() as u64 <= d);
        prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(s[0], t.saturating_sub(d - 1));
    }

    #[test]
    fn codec_round_trips(k in 0usize..=5, frac in 0.0f64..1.0) {
        let codec = ActionCodec::new(Budgets::new(3, 5, k, 3 * k).unwrap()).unwrap();
        let index = ((codec.len() as f64 * frac) as usize).min(codec.len() - 1);
        let state = codec.decode(index, 2).unwrap();
        prop_assert!(state.check().is_ok());
        prop_assert_eq!(codec.encode(&state).unwrap(), index);
    }

    #[test]
    fn bits_grow_with_snr(a in 0.0f64..1e6, extra in 0.0f64..1e6) {
        let lo = tx_bits(rate_bps(&[a], 180e3), 1e-3);
        let hi = tx_bits(rate_bps(&[a + extra], 180e3), 1e-3);
        prop_assert!(hi >= lo);
    }

    #[test]
    fn chernoff_dominates_exact_tail(p in prop::collection::vec(0.05f64..0.95, 2..12), frac in 0.05f64..0.95) {
        let u = p.len() as f64;
        let mean: f64 = p.iter().sum();
        let xi = mean + frac * (u - mean);
        let bound = chernoff_bound(&p, xi).unwrap();
        let k = xi.ceil() as usize;
        let exact = poisson_binomial_tail(&p, k);
        // tail by enumerating every outcome
        let n = p.len();
        let mut enumerated = 0.0;
        for s in 0u32..(1 << n) {
            if s.count_ones() as usize >= k {
                enumerated += (0..n).map(|i| if s >> i & 1 == 1 { p[i] } else { 1.0 - p[i] }).product::<f64>();
            }
        }
        prop_assert!((exact - enumerated).abs() < 1e-12);
        prop_assert!(exact <= bound + 1e-12);
        prop_assert!(bound > 0.0 && bound <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vehicles_respect_speed_and_lanes(seed in any::<u64>(), vmax in 1.0f64..40.0) {
        let net = RoadNetwork::new(300.0, 200.0, 100.0, 0.0).unwrap();
        let mut rng = substream(seed, MOBILITY);
        let mut cars = init_vehicles(&net, 6, vmax, &mut rng);
        for _ in 0..400 {
            let next = step_positions(&cars, &net, &mut rng, 0.05);
            for (a, b) in cars.iter().zip(&next) {
                let (p, q) = (a.position(&net), b.position(&net));
                let moved = ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
                prop_assert!(moved <= vmax * 0.05 + 1e-9);
                prop_assert!(b.speed <= vmax);
                prop_assert!(net.on_lane(q, 1e-6));
            }
            cars = next;
        }
    }
}
