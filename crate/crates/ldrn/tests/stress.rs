//! Wider random sweeps at the top of the supported instance sizes: more
//! destinations, wider ports, and both assignment modes on every shape.

use ldrn::capacity::multicast_capacity;
use ldrn::gf::Field;
use ldrn::multicast::{build_code, AssignMode, BuildOptions};
use ldrn::network::{gen_random, GenParams, Network};
use ldrn::sim::simulate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(index: u64) -> Network {
    let g = 1 + (index % 6) as usize; // up to six destinations
    let (p, k) = match g {
        1 => [(2, 1), (3, 1), (2, 2)][(index / 6) as usize % 3],
        2 | 3 => [(2, 2), (5, 1), (7, 1)][(index / 6) as usize % 3],
        _ => [(7, 1), (2, 3), (3, 2)][(index / 6) as usize % 3],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x57EE5 ^ index);
    let layers = 3 + (index % 3) as usize; // 3..=5
    let mut node_counts = vec![1];
    for _ in 1..layers {
        node_counts.push(rng.gen_range(2..=3));
    }
    gen_random(&GenParams {
        seed: 0xD1CE ^ index,
        node_counts,
        dim_range: (1, 5),
        density: 0.75 + 0.05 * (index % 5) as f64,
        field: Field::new(p, k).unwrap(),
        destination_count: g,
    })
    .unwrap()
}

fn spot_messages(q: u64, rate: usize, seed: u64) -> Vec<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..25)
        .map(|_| (0..rate).map(|_| rng.gen_range(0..q)).collect())
        .collect()
}

#[test]
fn deterministic_builds_across_the_size_envelope() {
    let mut positive = 0;
    for index in 0..60 {
        let net = instance(index);
        let outcome = build_code(&net, &BuildOptions::default())
            .unwrap_or_else(|e| panic!("instance {index}: {e}"));
        let code = outcome.code;
        if code.rate > 0 {
            positive += 1;
        }
        for w in spot_messages(net.field().order(), code.rate, index) {
            assert!(
                simulate(&net, &code, &w).unwrap().all_ok(),
                "instance {index} message {w:?}"
            );
        }
    }
    assert!(
        positive >= 40,
        "only {positive}/60 instances had positive capacity"
    );
}

#[test]
fn randomized_builds_across_the_size_envelope() {
    for index in 0..30 {
        let net = instance(index);
        // The randomized mode needs headroom to succeed within bounded
        // retries; skip the cases where the union bound is vacuous.
        let g = net.destinations().len() as u64;
        if net.field().order() <= g {
            continue;
        }
        let opts = BuildOptions {
            mode: AssignMode::Randomized,
            seed: 1000 + index,
            max_retries: 40,
            ..Default::default()
        };
        let outcome = build_code(&net, &opts).unwrap_or_else(|e| panic!("instance {index}: {e}"));
        for w in spot_messages(net.field().order(), outcome.code.rate, index) {
            assert!(simulate(&net, &outcome.code, &w).unwrap().all_ok());
        }
    }
}

#[test]
fn destinations_in_mixed_layers_build_and_decode() {
    // Find shapes whose sampled destinations span at least two layers.
    let mut seen_mixed = 0;
    for index in 0..40 {
        let net = instance(index);
        let layers: std::collections::BTreeSet<usize> =
            net.destinations().iter().map(|d| d.layer).collect();
        if layers.len() < 2 {
            continue;
        }
        seen_mixed += 1;
        let code = build_code(&net, &BuildOptions::default()).unwrap().code;
        let rate = code.rate;
        if rate == 0 {
            continue;
        }
        assert_eq!(multicast_capacity(&net), Some(rate));
        for w in spot_messages(net.field().order(), rate, 31 * index) {
            assert!(simulate(&net, &code, &w).unwrap().all_ok());
        }
    }
    assert!(
        seen_mixed >= 5,
        "only {seen_mixed} shapes had mixed-layer destinations"
    );
}
