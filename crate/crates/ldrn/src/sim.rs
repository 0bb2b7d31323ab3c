//! End-to-end transmission harness: inject a message at the source, apply
//! every node's local encoding matrix, propagate through the transfer
//! matrices, and decode at every destination. The recorded trace is the
//! executable proof that a code works.

use crate::gf::Matrix;
use crate::multicast::MulticastCode;
use crate::network::{Network, NodeId};
use crate::rounds::{pack, unpack, RoundPlan};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("code does not fit the network: {0}")]
    Incompatible(String),
    #[error("message has length {found}, expected {expected}")]
    MessageLength { expected: usize, found: usize },
    #[error("message entry {0} is outside the field")]
    MessageRange(u64),
}

/// Full record of one transmission: every layer's transmitted and received
/// vectors plus each destination's received subvector and decoded message.
#[derive(Debug, Clone, Serialize)]
pub struct Trace {
    pub message: Vec<u64>,
    pub layers: Vec<LayerTrace>,
    pub destinations: Vec<DestTrace>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerTrace {
    pub received: Vec<u64>,
    pub transmitted: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DestTrace {
    pub layer: usize,
    pub node: usize,
    pub received: Vec<u64>,
    pub decoded: Vec<u64>,
    pub ok: bool,
}

impl Trace {
    /// Whether every destination decoded the injected message.
    pub fn all_ok(&self) -> bool {
        self.destinations.iter().all(|d| d.ok)
    }
}

/// Check that a code's shapes match a network before running it.
pub fn check_compatible(net: &Network, code: &MulticastCode) -> Result<(), SimError> {
    if &code.field != net.field() {
        return Err(SimError::Incompatible(format!(
            "code is over {}, network over {}",
            code.field,
            net.field()
        )));
    }
    if code.num_layers() != net.num_layers() {
        return Err(SimError::Incompatible(format!(
            "code covers {} layers, network has {}",
            code.num_layers(),
            net.num_layers()
        )));
    }
    for i in 0..net.num_layers() {
        if code.node_count(i) != net.node_count(i) {
            return Err(SimError::Incompatible(format!(
                "layer {} has {} nodes in the code, {} in the network",
                i + 1,
                code.node_count(i),
                net.node_count(i)
            )));
        }
        for j in 0..net.node_count(i) {
            let dims = net.node_dims(NodeId::new(i, j));
            let theta = code.theta(i, j);
            // A 0-row matrix loses its column count in JSON; accept it.
            if theta.rows() != dims.tx || (theta.rows() > 0 && theta.cols() != dims.rx) {
                return Err(SimError::Incompatible(format!(
                    "encoding matrix at layer {} node {} is {}x{}, expected {}x{}",
                    i + 1,
                    j + 1,
                    theta.rows(),
                    theta.cols(),
                    dims.tx,
                    dims.rx
                )));
            }
        }
    }
    if code.rate > net.node_dims(net.source()).rx {
        return Err(SimError::Incompatible(format!(
            "rate {} exceeds the source's {} message ports",
            code.rate,
            net.node_dims(net.source()).rx
        )));
    }
    if code.decoders().len() != net.destinations().len() {
        return Err(SimError::Incompatible(format!(
            "code has {} decoders, network declares {} destinations",
            code.decoders().len(),
            net.destinations().len()
        )));
    }
    for (l, (d, &dest)) in code.decoders().iter().zip(net.destinations()).enumerate() {
        if d.dest != dest {
            return Err(SimError::Incompatible(format!(
                "decoder {} targets {}, network declares {dest}",
                l + 1,
                d.dest
            )));
        }
        let rx = net.node_dims(dest).rx;
        if d.ports.iter().any(|&p| p >= rx) {
            return Err(SimError::Incompatible(format!(
                "decoder {} reads ports outside {dest}'s {rx} rx positions",
                l + 1
            )));
        }
    }
    Ok(())
}

/// Transmit one message and decode it at every destination.
pub fn simulate(net: &Network, code: &MulticastCode, message: &[u64]) -> Result<Trace, SimError> {
    check_compatible(net, code)?;
    if message.len() != code.rate {
        return Err(SimError::MessageLength {
            expected: code.rate,
            found: message.len(),
        });
    }
    for &v in message {
        if !net.field().contains(v) {
            return Err(SimError::MessageRange(v));
        }
    }

    // The message enters on the source's first `rate` rx positions, matching
    // the canonical flow convention; the rest of the register is zero.
    let mut y = vec![0u64; net.layer_rx_dim(0)];
    y[..code.rate].copy_from_slice(message);

    let mut layers = Vec::with_capacity(net.num_layers());
    for i in 0..net.num_layers() {
        let mut x = vec![0u64; net.layer_tx_dim(i)];
        for j in 0..net.node_count(i) {
            let id = NodeId::new(i, j);
            let dims = net.node_dims(id);
            if dims.tx == 0 {
                continue;
            }
            let rx_start = net.rx_block_start(id);
            let block = &y[rx_start..rx_start + dims.rx];
            let local = code.theta(i, j).mul_vec(block);
            let tx_start = net.tx_block_start(id);
            x[tx_start..tx_start + dims.tx].copy_from_slice(&local);
        }
        layers.push(LayerTrace {
            received: y.clone(),
            transmitted: x.clone(),
        });
        if i + 1 < net.num_layers() {
            y = net.transfer(i, &x);
        }
    }

    let destinations = code
        .decoders()
        .iter()
        .map(|d| {
            let start = net.rx_block_start(d.dest);
            let received: Vec<u64> = d
                .ports
                .iter()
                .map(|&p| layers[d.dest.layer].received[start + p])
                .collect();
            let decoded = d.decoder.mul_vec(&received);
            let ok = decoded == message;
            DestTrace {
                layer: d.dest.layer + 1,
                node: d.dest.node + 1,
                received,
                decoded,
                ok,
            }
        })
        .collect();

    Ok(Trace {
        message: message.to_vec(),
        layers,
        destinations,
    })
}

/// Recompute the per-layer global coding matrices a code induces by feeding
/// the identity through the local encoders. Row r of entry i is the coding
/// vector of layer i's r-th rx port. Used to re-verify decodability from
/// scratch.
pub fn coding_matrices(net: &Network, code: &MulticastCode) -> Result<Vec<Matrix>, SimError> {
    check_compatible(net, code)?;
    let field = net.field().clone();
    let mut y = Matrix::zeros(field.clone(), net.layer_rx_dim(0), code.rate);
    for r in 0..code.rate {
        y.set(r, r, 1);
    }
    let mut out = Vec::with_capacity(net.num_layers());
    for i in 0..net.num_layers() {
        out.push(y.clone());
        if i + 1 == net.num_layers() {
            break;
        }
        let mut x = Matrix::zeros(field.clone(), net.layer_tx_dim(i), code.rate);
        for j in 0..net.node_count(i) {
            let id = NodeId::new(i, j);
            let dims = net.node_dims(id);
            if dims.tx == 0 {
                continue;
            }
            let rx_start = net.rx_block_start(id);
            let rows: Vec<usize> = (rx_start..rx_start + dims.rx).collect();
            let local = code.theta(i, j).mul(&y.select_rows(&rows));
            let tx_start = net.tx_block_start(id);
            for r in 0..dims.tx {
                x.replace_row(tx_start + r, local.row(r));
            }
        }
        y = net.transfer_matrix(i).mul(&x);
    }
    Ok(out)
}

/// Outcome of running k base-field rounds through one extension-field use.
#[derive(Debug, Clone)]
pub struct RoundsOutcome {
    pub trace: Trace,
    /// `decoded[destination][round]` is the recovered base-field message.
    pub decoded: Vec<Vec<Vec<u64>>>,
    pub ok: bool,
}

/// Pack `messages` (one per round, entries over the base field) into one
/// extension-field message, run the lifted network once, and unpack each
/// destination's decode back into per-round messages.
pub fn simulate_rounds(
    net_base: &Network,
    plan: &RoundPlan,
    code: &MulticastCode,
    messages: &[Vec<u64>],
) -> Result<RoundsOutcome, SimError> {
    let lifted = crate::rounds::lift_network(net_base, plan.rounds)
        .map_err(|e| SimError::Incompatible(e.to_string()))?;
    if messages.len() != plan.rounds as usize {
        return Err(SimError::Incompatible(format!(
            "expected {} round messages, found {}",
            plan.rounds,
            messages.len()
        )));
    }
    for round in messages {
        if round.len() != code.rate {
            return Err(SimError::MessageLength {
                expected: code.rate,
                found: round.len(),
            });
        }
    }
    let packed = pack(&plan.field, messages);
    let trace = simulate(&lifted, code, &packed)?;
    let decoded: Vec<Vec<Vec<u64>>> = trace
        .destinations
        .iter()
        .map(|d| unpack(&plan.field, &d.decoded))
        .collect();
    let ok = decoded.iter().all(|rounds| rounds == messages);
    Ok(RoundsOutcome { trace, decoded, ok })
}
