//! Exact cut capacities, per-destination min-cuts, and the multicast
//! capacity, computed by exhaustive cut enumeration. Because edges only run
//! between consecutive layers, a cut's capacity decomposes into one rank per
//! transfer matrix. This module is the ground-truth oracle for everything
//! downstream; nothing here tries to be polynomial.

use crate::network::{Network, NodeId};
use std::collections::BTreeSet;

/// A source/destination partition: `source_side` holds A (always containing
/// the source); every other node is on the destination side B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub source_side: BTreeSet<NodeId>,
}

impl Cut {
    pub fn new(source_side: BTreeSet<NodeId>) -> Cut {
        Cut { source_side }
    }

    pub fn is_valid(&self, net: &Network, target: NodeId) -> bool {
        self.source_side.contains(&net.source())
            && !self.source_side.contains(&target)
            && self
                .source_side
                .iter()
                .all(|n| n.layer < net.num_layers() && n.node < net.node_count(n.layer))
    }
}

/// Rank of the transfer from the tx ports of A-nodes to the rx ports of
/// B-nodes, summed over layers.
pub fn cut_capacity(net: &Network, cut: &Cut) -> usize {
    assert!(
        cut.source_side.contains(&net.source()),
        "cut must keep the source on the source side"
    );
    let mut total = 0;
    for i in 0..net.num_layers() - 1 {
        let mut cols = Vec::new();
        for j in 0..net.node_count(i) {
            let id = NodeId::new(i, j);
            if cut.source_side.contains(&id) {
                let start = net.tx_block_start(id);
                cols.extend(start..start + net.node_dims(id).tx);
            }
        }
        let mut rows = Vec::new();
        for k in 0..net.node_count(i + 1) {
            let id = NodeId::new(i + 1, k);
            if !cut.source_side.contains(&id) {
                let start = net.rx_block_start(id);
                rows.extend(start..start + net.node_dims(id).rx);
            }
        }
        total += net.transfer_matrix(i).submatrix(&rows, &cols).rank();
    }
    total
}

/// Minimum cut capacity between the source and a declared destination,
/// by exhaustive enumeration of all 2^(|V|-2) valid cuts.
pub fn min_cut(net: &Network, target: NodeId) -> usize {
    min_cut_jobs(net, target, 1)
}

/// Same as [`min_cut`], with the enumeration range split across `jobs`
/// worker threads. The result does not depend on the partitioning.
pub fn min_cut_jobs(net: &Network, target: NodeId, jobs: usize) -> usize {
    assert!(
        net.destinations().contains(&target),
        "{target} is not a declared destination"
    );
    let free: Vec<NodeId> = net
        .nodes()
        .filter(|&n| n != net.source() && n != target)
        .collect();
    let n = free.len();
    assert!(n < 30, "network too large for exhaustive cut enumeration");
    let total: u64 = 1 << n;
    let jobs = jobs.max(1).min(total as usize);

    let eval_range = |lo: u64, hi: u64| -> usize {
        let mut best = usize::MAX;
        for mask in lo..hi {
            let mut side = BTreeSet::new();
            side.insert(net.source());
            for (b, &id) in free.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    side.insert(id);
                }
            }
            best = best.min(cut_capacity(net, &Cut::new(side)));
        }
        best
    };

    if jobs == 1 {
        return eval_range(0, total);
    }
    let chunk = total.div_ceil(jobs as u64);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs as u64)
            .map(|w| {
                let lo = w * chunk;
                let hi = total.min(lo + chunk);
                scope.spawn(move || eval_range(lo, hi))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("cut enumeration worker"))
            .min()
            .unwrap()
    })
}

/// Minimum over destinations of their min-cut capacities; `None` when the
/// network declares no destinations.
pub fn multicast_capacity(net: &Network) -> Option<usize> {
    multicast_capacity_jobs(net, 1)
}

pub fn multicast_capacity_jobs(net: &Network, jobs: usize) -> Option<usize> {
    net.destinations()
        .iter()
        .map(|&t| min_cut_jobs(net, t, jobs))
        .min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{Field, Matrix};
    use crate::network::{gen_random, GenParams, NodeDims};

    fn gf2() -> Field {
        Field::new(2, 1).unwrap()
    }

    fn identity_net(r: usize) -> Network {
        Network::new(
            gf2(),
            vec![
                vec![NodeDims { rx: r, tx: r }],
                vec![NodeDims { rx: r, tx: 0 }],
            ],
            vec![Matrix::identity(gf2(), r)],
            vec![NodeId::new(1, 0)],
        )
        .unwrap()
    }

    #[test]
    fn source_only_cut_is_rank_of_identity() {
        let net = identity_net(3);
        let mut side = BTreeSet::new();
        side.insert(net.source());
        assert_eq!(cut_capacity(&net, &Cut::new(side)), 3);
    }

    #[test]
    fn zero_transfers_give_zero_everywhere() {
        let net = Network::new(
            gf2(),
            vec![
                vec![NodeDims { rx: 2, tx: 2 }],
                vec![NodeDims { rx: 2, tx: 2 }, NodeDims { rx: 1, tx: 1 }],
                vec![NodeDims { rx: 2, tx: 0 }],
            ],
            vec![Matrix::zeros(gf2(), 3, 2), Matrix::zeros(gf2(), 2, 3)],
            vec![NodeId::new(2, 0)],
        )
        .unwrap();
        assert_eq!(min_cut(&net, NodeId::new(2, 0)), 0);
        assert_eq!(multicast_capacity(&net), Some(0));
    }

    #[test]
    fn identity_chain_min_cut_is_rate() {
        let net = identity_net(4);
        assert_eq!(min_cut(&net, NodeId::new(1, 0)), 4);
        assert_eq!(multicast_capacity(&net), Some(4));
    }

    #[test]
    fn symmetric_destinations_share_the_multicast_capacity() {
        // Two destinations fed by identical rows see identical cuts.
        let g = Matrix::from_rows(gf2(), vec![vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]]);
        let net = Network::new(
            gf2(),
            vec![
                vec![NodeDims { rx: 2, tx: 2 }],
                vec![NodeDims { rx: 2, tx: 0 }, NodeDims { rx: 2, tx: 0 }],
            ],
            vec![g],
            vec![NodeId::new(1, 0), NodeId::new(1, 1)],
        )
        .unwrap();
        let a = min_cut(&net, NodeId::new(1, 0));
        let b = min_cut(&net, NodeId::new(1, 1));
        assert_eq!(a, b);
        assert_eq!(multicast_capacity(&net), Some(a));
    }

    #[test]
    fn min_cut_independent_of_jobs() {
        for seed in 0..10 {
            let net = gen_random(&GenParams {
                seed,
                node_counts: vec![1, 2, 2, 2],
                dim_range: (1, 3),
                density: 0.8,
                field: gf2(),
                destination_count: 2,
            })
            .unwrap();
            for &t in net.destinations() {
                let one = min_cut_jobs(&net, t, 1);
                assert_eq!(one, min_cut_jobs(&net, t, 2));
                assert_eq!(one, min_cut_jobs(&net, t, 5));
            }
        }
    }

    #[test]
    fn min_cut_bounded_by_any_specific_cut() {
        let net = gen_random(&GenParams {
            seed: 3,
            node_counts: vec![1, 2, 2],
            dim_range: (1, 3),
            density: 0.9,
            field: gf2(),
            destination_count: 1,
        })
        .unwrap();
        let t = net.destinations()[0];
        let mc = min_cut(&net, t);
        // Compare against every valid cut directly.
        let free: Vec<NodeId> = net
            .nodes()
            .filter(|&n| n != net.source() && n != t)
            .collect();
        for mask in 0..(1u64 << free.len()) {
            let mut side = BTreeSet::new();
            side.insert(net.source());
            for (b, &id) in free.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    side.insert(id);
                }
            }
            let cut = Cut::new(side);
            assert!(cut.is_valid(&net, t));
            assert!(mc <= cut_capacity(&net, &cut));
        }
    }

    #[test]
    fn zeroing_an_entry_never_raises_min_cut() {
        for seed in 0..5 {
            let net = gen_random(&GenParams {
                seed,
                node_counts: vec![1, 2, 2],
                dim_range: (1, 2),
                density: 1.0,
                field: gf2(),
                destination_count: 1,
            })
            .unwrap();
            let t = net.destinations()[0];
            let base = min_cut(&net, t);
            // Zero one entry of the first transfer matrix and recheck.
            let mut g = net.transfer_matrix(0).clone();
            'outer: for r in 0..g.rows() {
                for c in 0..g.cols() {
                    if g.get(r, c) != 0 {
                        g.set(r, c, 0);
                        break 'outer;
                    }
                }
            }
            let layers: Vec<Vec<NodeDims>> = (0..net.num_layers())
                .map(|i| {
                    (0..net.node_count(i))
                        .map(|j| net.node_dims(NodeId::new(i, j)))
                        .collect()
                })
                .collect();
            let mut transfer = vec![g];
            transfer.extend((1..net.num_layers() - 1).map(|i| net.transfer_matrix(i).clone()));
            let worse = Network::new(gf2(), layers, transfer, net.destinations().to_vec()).unwrap();
            assert!(min_cut(&worse, t) <= base);
        }
    }
}
