//! Multi-round operation via field extension: k uses of a GF(p) network are
//! one use of the same network over GF(p^k), packing the k per-round symbols
//! into the power-basis coordinates of one extension element. Transfer
//! entries stay in the prime subfield, so the extension-field transfer acts
//! on each coordinate independently and the per-round channel laws are
//! recovered exactly by unpacking.

use crate::gf::{is_prime, Field, GfError};
use crate::network::{Network, NetworkError, NodeId};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RoundsError {
    #[error("base network must be over a prime field, found extension degree {0}")]
    AlreadyExtension(u32),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// How many rounds are needed so the lifted field has more elements than
/// there are destinations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundPlan {
    pub base: u64,
    pub destination_count: usize,
    pub rounds: u32,
    pub field: Field,
}

/// Smallest k with p^k >= g + 1, by integer arithmetic.
pub fn required_rounds(p: u64, g: usize) -> u32 {
    assert!(is_prime(p), "base {p} must be prime");
    assert!(g >= 1, "need at least one destination");
    let target = g as u64 + 1;
    let mut k = 1;
    let mut acc = p;
    while acc < target {
        acc *= p;
        k += 1;
    }
    k
}

pub fn plan_rounds(p: u64, g: usize) -> Result<RoundPlan, RoundsError> {
    let rounds = required_rounds(p, g);
    let field = Field::new(p, rounds)?;
    Ok(RoundPlan {
        base: p,
        destination_count: g,
        rounds,
        field,
    })
}

/// Re-encode a prime-field network over GF(p^k). The topology, dimensions,
/// and transfer entries are unchanged; entries embed as constants, which is
/// the identity on the integer encoding.
pub fn lift_network(net: &Network, k: u32) -> Result<Network, RoundsError> {
    if net.field().degree() != 1 {
        return Err(RoundsError::AlreadyExtension(net.field().degree()));
    }
    let p = net.field().characteristic();
    let field = Field::new(p, k)?;
    let layers = (0..net.num_layers())
        .map(|i| {
            (0..net.node_count(i))
                .map(|j| net.node_dims(NodeId::new(i, j)))
                .collect()
        })
        .collect();
    let transfer = (0..net.num_layers() - 1)
        .map(|i| {
            let g = net.transfer_matrix(i);
            crate::gf::Matrix::new(field.clone(), g.rows(), g.cols(), g.data().to_vec())
        })
        .collect();
    Ok(Network::new(
        field,
        layers,
        transfer,
        net.destinations().to_vec(),
    )?)
}

/// Pack k same-length prime-field vectors into one extension-field vector:
/// round t lands on the coefficient of x^t, i.e. the t-th base-p digit.
pub fn pack(field: &Field, rounds: &[Vec<u64>]) -> Vec<u64> {
    let k = field.degree() as usize;
    let p = field.characteristic();
    assert_eq!(rounds.len(), k, "expected {k} rounds");
    let len = rounds.first().map_or(0, Vec::len);
    let mut out = vec![0u64; len];
    let mut scale = 1;
    for round in rounds {
        assert_eq!(round.len(), len, "rounds must share a length");
        for (o, &v) in out.iter_mut().zip(round) {
            assert!(v < p, "{v} is not a base-field element");
            *o += v * scale;
        }
        scale *= p;
    }
    out
}

/// Inverse of [`pack`]: split each extension element into its k digits.
pub fn unpack(field: &Field, v: &[u64]) -> Vec<Vec<u64>> {
    let k = field.degree() as usize;
    let p = field.characteristic();
    let mut out = vec![vec![0u64; v.len()]; k];
    for (e, &val) in v.iter().enumerate() {
        assert!(field.contains(val), "{val} is not an element of {field}");
        let mut m = val;
        for round in out.iter_mut() {
            round[e] = m % p;
            m /= p;
        }
    }
    out
}
