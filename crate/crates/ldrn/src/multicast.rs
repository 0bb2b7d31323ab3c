//! Inductive assignment of coding vectors, layer by layer, so that every
//! destination's selected receive ports always carry linearly independent
//! global coding vectors and can therefore recover the source message.
//!
//! Per destination the state keeps a pair of matrices A and F whose product
//! stays nonsingular across every single port assignment; once a layer is
//! fully assigned, F·A equals the next layer's coding matrix on the
//! destination's flow ports, which is exactly the decodability condition.
//! Each assignment reduces to scalar inequalities 1 + (u - y(p))·γ != 0
//! (ports inside a destination's flow) and 1 + u·γ != 0 (ports outside),
//! with γ = H⁻¹α for the port's transfer column α. Vectors are chosen either
//! by uniform random draws with retry or by the deterministic anchor-set
//! construction (a Jaggi-style combination plus a scalar sweep).

use crate::capacity::multicast_capacity;
use crate::flow::{find_flow, verify_flow, Flow};
use crate::gf::{Field, Matrix};
use crate::network::{Network, NodeId, PortLabel, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("network declares no destinations")]
    NoDestinations,
    #[error("no rate-{rate} flow to {dest}: the rate exceeds its min-cut")]
    FlowInfeasible { dest: NodeId, rate: usize },
    #[error(
        "field order {order} must exceed the destination count {destinations} for the \
         deterministic construction; lift the network to an extension field first"
    )]
    FieldTooSmall { order: u64, destinations: usize },
    #[error("expected one flow per destination, in destination order")]
    FlowMismatch,
    #[error("flows disagree on rate")]
    MismatchedRates,
    #[error("flows must share the canonical source port subset (the first R positions)")]
    MismatchedSourcePorts,
    #[error("flow for {dest} fails verification: {}", .violations.join("; "))]
    InvalidFlow {
        dest: NodeId,
        violations: Vec<String>,
    },
    #[error("no admissible vector for {port} after {retries} draws; zero factors at destinations {factors:?}")]
    RetriesExhausted {
        port: PortLabel,
        retries: usize,
        factors: Vec<usize>,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

/// How coding vectors are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignMode {
    Deterministic,
    Randomized,
}

/// A chosen coding vector for one tx port, together with the local
/// coefficients over the node's rx ports that realize it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub port: PortLabel,
    /// The global coding vector u, length R.
    pub coding_vector: Vec<u64>,
    /// Coefficients over the node's rx ports; u = coeffs · y(node block).
    pub local_coeffs: Vec<u64>,
    pub detail: AssignDetail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssignDetail {
    Deterministic {
        /// Destination indices whose matched port anchors the combination.
        anchors: Vec<usize>,
        /// The anchor combination w before scaling.
        base_vector: Vec<u64>,
        sigma: u64,
    },
    Randomized {
        draws: usize,
    },
}

/// Per-destination bookkeeping while a layer is being assigned.
struct DestTracker {
    finished: bool,
    /// Rows are coding vectors; starts as y on the flow's rx ports.
    a: Matrix,
    /// Columns of the transfer matrix on the destination's next-layer rows;
    /// column r pairs with row r of `a`.
    f: Matrix,
    h_inv: Matrix,
    slot_of_q: HashMap<PortLabel, usize>,
}

/// The in-progress construction state at one layer.
pub struct CodeState<'n> {
    net: &'n Network,
    flows: Vec<Flow>,
    rate: usize,
    layer: usize,
    /// Global coding vectors of the current layer's rx ports.
    y: Matrix,
    /// Global coding vectors of the current layer's tx ports, filled as
    /// assignments are applied.
    x: Matrix,
    assigned: Vec<bool>,
    theta: Vec<Vec<Matrix>>,
    dests: Vec<DestTracker>,
    decoders: Vec<Option<DestCode>>,
}

impl<'n> CodeState<'n> {
    /// Initialize at the first layer: the source's selected rx ports carry
    /// the identity, everything else zero, so every destination's condition
    /// holds at layer 1.
    pub fn new(net: &'n Network, flows: Vec<Flow>) -> Result<CodeState<'n>, CodeError> {
        if net.destinations().is_empty() {
            return Err(CodeError::NoDestinations);
        }
        if flows.len() != net.destinations().len()
            || flows
                .iter()
                .zip(net.destinations())
                .any(|(fl, &d)| fl.destination() != d)
        {
            return Err(CodeError::FlowMismatch);
        }
        let rate = flows[0].rate();
        if flows.iter().any(|fl| fl.rate() != rate) {
            return Err(CodeError::MismatchedRates);
        }
        // The simulator injects the message on the first `rate` rx positions
        // of the source, so the flows must select exactly those.
        let canonical: Vec<usize> = (0..rate).collect();
        if flows.iter().any(|fl| fl.p_hat(0)[0] != canonical) {
            return Err(CodeError::MismatchedSourcePorts);
        }
        for fl in &flows {
            let violations = verify_flow(net, fl);
            if !violations.is_empty() {
                return Err(CodeError::InvalidFlow {
                    dest: fl.destination(),
                    violations,
                });
            }
        }

        let field = net.field().clone();
        let mut y = Matrix::zeros(field.clone(), net.layer_rx_dim(0), rate);
        for (slot, &pos) in flows[0].p_hat(0)[0].iter().enumerate() {
            y.set(pos, slot, 1);
        }
        let theta = (0..net.num_layers())
            .map(|i| {
                (0..net.node_count(i))
                    .map(|j| {
                        let dims = net.node_dims(NodeId::new(i, j));
                        Matrix::zeros(field.clone(), dims.tx, dims.rx)
                    })
                    .collect()
            })
            .collect();
        let mut state = CodeState {
            net,
            flows,
            rate,
            layer: 0,
            x: Matrix::zeros(field.clone(), net.layer_tx_dim(0), rate),
            assigned: vec![false; net.layer_tx_dim(0)],
            y,
            theta,
            dests: Vec::new(),
            decoders: vec![None; net.destinations().len()],
        };
        state.dests = (0..state.flows.len())
            .map(|l| state.init_tracker(l))
            .collect();
        Ok(state)
    }

    fn init_tracker(&self, l: usize) -> DestTracker {
        let flow = &self.flows[l];
        let i = self.layer;
        let p_rows: Vec<usize> = flow
            .p_ports(i)
            .iter()
            .map(|p| self.net.port_index(*p))
            .collect();
        let a = self.y.select_rows(&p_rows);
        let q_ports = flow.q_ports(i);
        let f = self
            .net
            .transfer_submatrix(i, &flow.p_ports(i + 1), &q_ports);
        let h = f.mul(&a);
        let h_inv = h.inverse().unwrap_or_else(|| {
            panic!(
                "invariant breach: F·A singular for destination {} entering layer {}",
                l + 1,
                i + 1
            )
        });
        let slot_of_q = q_ports
            .into_iter()
            .enumerate()
            .map(|(s, q)| (q, s))
            .collect();
        DestTracker {
            finished: false,
            a,
            f,
            h_inv,
            slot_of_q,
        }
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn rate(&self) -> usize {
        self.rate
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    /// Global coding matrix of the current layer's rx ports.
    pub fn coding_matrix(&self) -> &Matrix {
        &self.y
    }

    pub fn is_active(&self, l: usize) -> bool {
        !self.dests[l].finished
    }

    pub fn active_destinations(&self) -> Vec<usize> {
        (0..self.dests.len())
            .filter(|&l| self.is_active(l))
            .collect()
    }

    pub fn all_finished(&self) -> bool {
        self.dests.iter().all(|d| d.finished)
    }

    /// Next unassigned tx port of the current layer, in canonical order.
    pub fn next_port(&self) -> Option<PortLabel> {
        let idx = self.assigned.iter().position(|&a| !a)?;
        Some(self.net.tx_ports(self.layer)[idx])
    }

    /// Snapshot of a destination's (A, F) pair, for from-scratch checks.
    pub fn dest_matrices(&self, l: usize) -> (Matrix, Matrix) {
        (self.dests[l].a.clone(), self.dests[l].f.clone())
    }

    /// The ledger slot a port occupies in destination `l`'s flow, if any.
    pub fn flow_slot(&self, l: usize, q: PortLabel) -> Option<usize> {
        self.dests[l].slot_of_q.get(&q).copied()
    }

    /// Transfer column of `q` restricted to destination `l`'s next-layer rows.
    pub fn alpha(&self, l: usize, q: PortLabel) -> Vec<u64> {
        let flow = &self.flows[l];
        self.net
            .transfer_submatrix(self.layer, &flow.p_ports(self.layer + 1), &[q])
            .col(0)
    }

    /// γ = H⁻¹α for an active destination, where H is the current F·A.
    pub fn gamma(&self, l: usize, q: PortLabel) -> Vec<u64> {
        assert!(
            self.is_active(l),
            "destination {} is already finalized",
            l + 1
        );
        self.dests[l].h_inv.mul_vec(&self.alpha(l, q))
    }

    /// The per-destination factors whose product is τ: zero factors are
    /// exactly the destinations a candidate vector would break.
    pub fn constraint_factors(&self, q: PortLabel, u: &[u64]) -> Vec<(usize, u64)> {
        let f = self.net.field();
        self.active_destinations()
            .into_iter()
            .map(|l| {
                let gamma = self.gamma(l, q);
                let factor = match self.flows[l].matched_rx(q) {
                    Some(p) => {
                        let diff = f.vec_add(
                            u,
                            &f.vec_scale(f.neg(1), self.y.row(self.net.port_index(p))),
                        );
                        f.add(1, f.dot(&diff, &gamma))
                    }
                    None => f.add(1, f.dot(u, &gamma)),
                };
                (l, factor)
            })
            .collect()
    }

    fn node_rx_rows(&self, q: PortLabel) -> Vec<usize> {
        let id = NodeId::new(self.layer, q.node);
        let start = self.net.rx_block_start(id);
        (start..start + self.net.node_dims(id).rx).collect()
    }

    fn vector_from_coeffs(&self, q: PortLabel, coeffs: &[u64]) -> Vec<u64> {
        let f = self.net.field();
        let rows = self.node_rx_rows(q);
        assert_eq!(coeffs.len(), rows.len(), "one coefficient per node rx port");
        let mut u = vec![0u64; self.rate];
        for (&c, &r) in coeffs.iter().zip(&rows) {
            if c != 0 {
                u = f.vec_add(&u, &f.vec_scale(c, self.y.row(r)));
            }
        }
        u
    }

    /// Choose the next port's vector deterministically: build the anchor set
    /// W of destinations whose matched port has nonzero inner product with
    /// its γ, combine their matched rows into w with w·γ != 0 throughout,
    /// then scale by the first σ outside the forbidden set (scanning
    /// 1, 2, .., q-1 and finally 0).
    pub fn assign_deterministic(&self, q: PortLabel) -> Result<Assignment, CodeError> {
        self.assert_next(q);
        let f = self.net.field();
        let node_rows = self.node_rx_rows(q);
        let pos_in_node: HashMap<usize, usize> =
            node_rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();

        struct DestInfo {
            dest: usize,
            gamma: Vec<u64>,
            /// Matched rx row and its y·γ, when the port is in this flow.
            matched: Option<(usize, u64)>,
        }
        let mut infos = Vec::new();
        for l in self.active_destinations() {
            let gamma = self.gamma(l, q);
            let matched = self.flows[l].matched_rx(q).map(|p| {
                let row = self.net.port_index(p);
                let ypg = f.dot(self.y.row(row), &gamma);
                (row, ypg)
            });
            infos.push(DestInfo {
                dest: l,
                gamma,
                matched,
            });
        }

        // Anchor set W and the incremental combination: keep w·γ nonzero for
        // every anchor seen so far, adjusting with λ·y(p_t) when a new
        // anchor's product vanishes.
        let mut anchors: Vec<usize> = Vec::new();
        let mut w = vec![0u64; self.rate];
        let mut theta_w = vec![0u64; node_rows.len()];
        let mut seen: Vec<(&DestInfo, usize)> = Vec::new(); // (info, matched row)
        for info in &infos {
            let Some((row, ypg)) = info.matched else {
                continue;
            };
            if ypg == 0 {
                continue;
            }
            anchors.push(info.dest);
            if seen.is_empty() {
                w = self.y.row(row).to_vec();
                theta_w[pos_in_node[&row]] = 1;
                seen.push((info, row));
                continue;
            }
            if f.dot(&w, &info.gamma) == 0 {
                let a_t = self.y.row(row);
                let mut forbidden = vec![0u64];
                for (prev, _) in &seen {
                    let ab = f.dot(a_t, &prev.gamma);
                    if ab != 0 {
                        let cb = f.dot(&w, &prev.gamma);
                        forbidden.push(f.div(f.neg(cb), ab).unwrap());
                    }
                }
                let lambda = f.elements().find(|v| !forbidden.contains(v)).ok_or(
                    CodeError::FieldTooSmall {
                        order: f.order(),
                        destinations: self.flows.len(),
                    },
                )?;
                w = f.vec_add(&w, &f.vec_scale(lambda, a_t));
                let slot = pos_in_node[&row];
                theta_w[slot] = f.add(theta_w[slot], lambda);
            }
            seen.push((info, row));
        }
        debug_assert!(seen.iter().all(|(info, _)| f.dot(&w, &info.gamma) != 0));

        // Scalar sweep: at most one forbidden value per active destination.
        let mut forbidden: Vec<u64> = Vec::new();
        for info in &infos {
            let wg = f.dot(&w, &info.gamma);
            match info.matched {
                Some((_, ypg)) if ypg != 0 => {
                    // Anchored: w·γ is nonzero by construction.
                    forbidden.push(f.div(f.sub(ypg, 1), wg).unwrap());
                }
                _ => {
                    if wg != 0 {
                        forbidden.push(f.div(f.neg(1), wg).unwrap());
                    }
                }
            }
        }
        let sigma = (1..f.order())
            .chain(std::iter::once(0))
            .find(|v| !forbidden.contains(v))
            .ok_or(CodeError::FieldTooSmall {
                order: f.order(),
                destinations: self.flows.len(),
            })?;

        let coding_vector = f.vec_scale(sigma, &w);
        let local_coeffs = f.vec_scale(sigma, &theta_w);
        debug_assert!(self
            .constraint_factors(q, &coding_vector)
            .iter()
            .all(|&(_, factor)| factor != 0));
        Ok(Assignment {
            port: q,
            coding_vector,
            local_coeffs,
            detail: AssignDetail::Deterministic {
                anchors,
                base_vector: w,
                sigma,
            },
        })
    }

    /// Draw uniform local coefficients and accept when every destination's
    /// factor is nonzero, retrying up to `max_retries` times.
    pub fn assign_randomized(
        &self,
        q: PortLabel,
        rng: &mut impl Rng,
        max_retries: usize,
    ) -> Result<Assignment, CodeError> {
        self.assert_next(q);
        let order = self.net.field().order();
        let n = self.node_rx_rows(q).len();
        let mut last_zero = Vec::new();
        for attempt in 1..=max_retries.max(1) {
            let coeffs: Vec<u64> = (0..n).map(|_| rng.gen_range(0..order)).collect();
            let u = self.vector_from_coeffs(q, &coeffs);
            let factors = self.constraint_factors(q, &u);
            last_zero = factors
                .iter()
                .filter(|&&(_, v)| v == 0)
                .map(|&(l, _)| l)
                .collect();
            if last_zero.is_empty() {
                return Ok(Assignment {
                    port: q,
                    coding_vector: u,
                    local_coeffs: coeffs,
                    detail: AssignDetail::Randomized { draws: attempt },
                });
            }
        }
        Err(CodeError::RetriesExhausted {
            port: q,
            retries: max_retries,
            factors: last_zero,
        })
    }

    /// Commit an assignment: record the coding vector and local row, then
    /// update every active destination's (A, F) pair. Ports inside a flow
    /// replace their matched row of A; ports outside append a row to A and
    /// the port's transfer column to F. The product must stay nonsingular.
    pub fn apply(&mut self, assignment: &Assignment) {
        let q = assignment.port;
        self.assert_next(q);
        debug_assert_eq!(
            assignment.coding_vector,
            self.vector_from_coeffs(q, &assignment.local_coeffs),
            "coding vector must be the stated combination of node rx ports"
        );
        let u = &assignment.coding_vector;
        let idx = self.net.port_index(q);
        self.x.replace_row(idx, u);
        self.theta[self.layer][q.node].replace_row(q.pos, &assignment.local_coeffs);
        self.assigned[idx] = true;

        let active = self.active_destinations();
        let alphas: Vec<Option<Vec<u64>>> = active
            .iter()
            .map(|&l| {
                if self.dests[l].slot_of_q.contains_key(&q) {
                    None
                } else {
                    Some(self.alpha(l, q))
                }
            })
            .collect();
        for (&l, alpha) in active.iter().zip(alphas) {
            let tracker = &mut self.dests[l];
            match tracker.slot_of_q.get(&q) {
                Some(&slot) => tracker.a.replace_row(slot, u),
                None => {
                    let alpha = alpha.expect("alpha precomputed for appended ports");
                    let slot = tracker.f.cols();
                    tracker.f.push_col(&alpha);
                    tracker.a.push_row(u);
                    tracker.slot_of_q.insert(q, slot);
                }
            }
            let h = tracker.f.mul(&tracker.a);
            tracker.h_inv = h.inverse().unwrap_or_else(|| {
                panic!(
                    "invariant breach: F·A singular for destination {} after assigning {q}",
                    l + 1
                )
            });
        }
    }

    /// Finish the current layer: propagate the coding vectors through the
    /// transfer matrix, check that each active destination's F·A equals the
    /// next layer's coding matrix on its flow ports, extract decoders for
    /// destinations living in the next layer, and rebuild the trackers.
    pub fn advance_layer(&mut self) {
        assert!(
            self.assigned.iter().all(|&a| a),
            "layer {} still has unassigned ports",
            self.layer + 1
        );
        assert!(
            self.layer + 1 < self.net.num_layers(),
            "no layer beyond {}",
            self.layer + 1
        );
        let y_next = self.net.transfer_matrix(self.layer).mul(&self.x);
        for l in self.active_destinations() {
            let flow = &self.flows[l];
            let rows: Vec<usize> = flow
                .p_ports(self.layer + 1)
                .iter()
                .map(|p| self.net.port_index(*p))
                .collect();
            let product = self.dests[l].f.mul(&self.dests[l].a);
            let expect = y_next.select_rows(&rows);
            assert_eq!(
                product,
                expect,
                "consistency failure: F·A disagrees with the propagated coding matrix \
                 for destination {} at layer {}",
                l + 1,
                self.layer + 2
            );
        }
        self.layer += 1;
        self.y = y_next;
        self.x = Matrix::zeros(
            self.net.field().clone(),
            self.net.layer_tx_dim(self.layer),
            self.rate,
        );
        self.assigned = vec![false; self.net.layer_tx_dim(self.layer)];
        for l in 0..self.dests.len() {
            if self.dests[l].finished {
                continue;
            }
            let dest = self.flows[l].destination();
            if dest.layer == self.layer {
                let ports = self.flows[l].p_hat(self.layer)[dest.node].clone();
                let rows: Vec<usize> = self.flows[l]
                    .p_ports(self.layer)
                    .iter()
                    .map(|p| self.net.port_index(*p))
                    .collect();
                let received = self.y.select_rows(&rows);
                let decoder = received.inverse().unwrap_or_else(|| {
                    panic!(
                        "invariant breach: coding matrix singular at destination {}",
                        l + 1
                    )
                });
                self.decoders[l] = Some(DestCode {
                    dest,
                    ports,
                    decoder,
                });
                self.dests[l].finished = true;
            } else {
                self.dests[l] = self.init_tracker(l);
            }
        }
    }

    /// Consume the finished state into the code artifact.
    pub fn into_code(self) -> MulticastCode {
        assert!(
            self.all_finished(),
            "construction still has active destinations"
        );
        MulticastCode {
            rate: self.rate,
            field: self.net.field().clone(),
            theta: self.theta,
            decoders: self.decoders.into_iter().map(Option::unwrap).collect(),
        }
    }

    fn assert_next(&self, q: PortLabel) {
        assert_eq!(
            Some(q),
            self.next_port(),
            "ports must be assigned in canonical order"
        );
        assert_eq!(q.side, Side::Tx, "assignments target tx ports");
    }
}

/// Per-destination decoding data: the rx port positions read at the
/// destination node and the R×R inverse applied to them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DestCode {
    pub dest: NodeId,
    pub ports: Vec<usize>,
    pub decoder: Matrix,
}

/// The finished artifact: one local encoding matrix per node and one decoder
/// per destination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastCode {
    pub rate: usize,
    pub field: Field,
    theta: Vec<Vec<Matrix>>,
    decoders: Vec<DestCode>,
}

impl MulticastCode {
    pub fn theta(&self, layer: usize, node: usize) -> &Matrix {
        &self.theta[layer][node]
    }

    pub fn num_layers(&self) -> usize {
        self.theta.len()
    }

    pub fn node_count(&self, layer: usize) -> usize {
        self.theta[layer].len()
    }

    pub fn decoders(&self) -> &[DestCode] {
        &self.decoders
    }

    pub fn save(&self) -> String {
        let schema = CodeSchema {
            rate: self.rate,
            field: CodeFieldSchema {
                p: self.field.characteristic(),
                k: self.field.degree(),
            },
            nodes: self
                .theta
                .iter()
                .map(|layer| layer.iter().map(Matrix::to_nested).collect())
                .collect(),
            destinations: self
                .decoders
                .iter()
                .map(|d| CodeDestSchema {
                    layer: d.dest.layer + 1,
                    node: d.dest.node + 1,
                    ports: d.ports.clone(),
                    decoder: d.decoder.to_nested(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&schema).expect("code serialization");
        s.push('\n');
        s
    }

    pub fn load(bytes: &[u8]) -> Result<MulticastCode, CodeError> {
        let schema: CodeSchema =
            serde_json::from_slice(bytes).map_err(|e| CodeError::Parse(e.to_string()))?;
        let field = Field::new(schema.field.p, schema.field.k)
            .map_err(|e| CodeError::Parse(e.to_string()))?;
        let mut theta = Vec::new();
        for (i, layer) in schema.nodes.iter().enumerate() {
            let mut row = Vec::new();
            for (j, nested) in layer.iter().enumerate() {
                row.push(nested_matrix(&field, nested).map_err(|e| {
                    CodeError::Parse(format!(
                        "node matrix at layer {} node {}: {e}",
                        i + 1,
                        j + 1
                    ))
                })?);
            }
            theta.push(row);
        }
        let mut decoders = Vec::new();
        for (l, d) in schema.destinations.iter().enumerate() {
            if d.layer == 0 || d.node == 0 {
                return Err(CodeError::Parse(format!(
                    "destination {}: layer and node indices are 1-based",
                    l + 1
                )));
            }
            if !d.ports.windows(2).all(|w| w[0] < w[1]) || d.ports.len() != schema.rate {
                return Err(CodeError::Parse(format!(
                    "destination {}: ports must be {} strictly increasing positions",
                    l + 1,
                    schema.rate
                )));
            }
            let decoder = nested_matrix(&field, &d.decoder)
                .map_err(|e| CodeError::Parse(format!("decoder for destination {}: {e}", l + 1)))?;
            if decoder.rows() != schema.rate || decoder.cols() != schema.rate {
                return Err(CodeError::Parse(format!(
                    "decoder for destination {} must be {0}x{0}",
                    l + 1
                )));
            }
            decoders.push(DestCode {
                dest: NodeId::new(d.layer - 1, d.node - 1),
                ports: d.ports.clone(),
                decoder,
            });
        }
        Ok(MulticastCode {
            rate: schema.rate,
            field,
            theta,
            decoders,
        })
    }
}

fn nested_matrix(field: &Field, rows: &[Vec<u64>]) -> Result<Matrix, String> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    let mut data = Vec::with_capacity(r * c);
    for row in rows {
        if row.len() != c {
            return Err("ragged rows".into());
        }
        for &v in row {
            if !field.contains(v) {
                return Err(format!("{v} is not an element of {field}"));
            }
            data.push(v);
        }
    }
    Ok(Matrix::new(field.clone(), r, c, data))
}

#[derive(Serialize, Deserialize)]
struct CodeFieldSchema {
    p: u64,
    k: u32,
}

#[derive(Serialize, Deserialize)]
struct CodeDestSchema {
    layer: usize,
    node: usize,
    ports: Vec<usize>,
    decoder: Vec<Vec<u64>>,
}

#[derive(Serialize, Deserialize)]
struct CodeSchema {
    rate: usize,
    field: CodeFieldSchema,
    nodes: Vec<Vec<Vec<Vec<u64>>>>,
    destinations: Vec<CodeDestSchema>,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub mode: AssignMode,
    /// RNG seed for randomized mode.
    pub seed: u64,
    /// Defaults to the multicast capacity.
    pub rate: Option<usize>,
    pub max_retries: usize,
    pub transcript: bool,
}

impl Default for BuildOptions {
    fn default() -> BuildOptions {
        BuildOptions {
            mode: AssignMode::Deterministic,
            seed: 0,
            rate: None,
            max_retries: 20,
            transcript: false,
        }
    }
}

#[derive(Debug)]
pub struct BuildOutcome {
    pub code: MulticastCode,
    pub flows: Vec<Flow>,
    pub transcript: Option<Transcript>,
}

/// Audit record of every assignment: the chosen vector, the deterministic
/// derivation when applicable, and each destination's det(F·A) afterwards.
#[derive(Debug, Serialize)]
pub struct Transcript {
    pub mode: String,
    pub rate: usize,
    pub entries: Vec<TranscriptEntry>,
}

#[derive(Debug, Serialize)]
pub struct TranscriptEntry {
    pub layer: usize,
    pub node: usize,
    pub pos: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchors: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_vector: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    pub coding_vector: Vec<u64>,
    pub dest_dets: Vec<DestDet>,
}

#[derive(Debug, Serialize)]
pub struct DestDet {
    pub destination: usize,
    pub in_flow: bool,
    pub det: u64,
}

/// Find flows for every destination, then assign every tx port layer by
/// layer until each destination holds a decoder.
pub fn build_code(net: &Network, opts: &BuildOptions) -> Result<BuildOutcome, CodeError> {
    let rate = match opts.rate {
        Some(r) => r,
        None => multicast_capacity(net).ok_or(CodeError::NoDestinations)?,
    };
    let g = net.destinations().len();
    if opts.mode == AssignMode::Deterministic && net.field().order() <= g as u64 {
        return Err(CodeError::FieldTooSmall {
            order: net.field().order(),
            destinations: g,
        });
    }
    let flows: Vec<Flow> = net
        .destinations()
        .iter()
        .map(|&dest| find_flow(net, dest, rate).ok_or(CodeError::FlowInfeasible { dest, rate }))
        .collect::<Result<_, _>>()?;

    let mut state = CodeState::new(net, flows)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut entries = Vec::new();
    while !state.all_finished() {
        while let Some(q) = state.next_port() {
            let assignment = match opts.mode {
                AssignMode::Deterministic => state.assign_deterministic(q)?,
                AssignMode::Randomized => state.assign_randomized(q, &mut rng, opts.max_retries)?,
            };
            state.apply(&assignment);
            if opts.transcript {
                entries.push(transcript_entry(&state, &assignment));
            }
        }
        state.advance_layer();
    }
    let flows = state.flows().to_vec();
    let code = state.into_code();
    let transcript = opts.transcript.then(|| Transcript {
        mode: match opts.mode {
            AssignMode::Deterministic => "deterministic".into(),
            AssignMode::Randomized => "randomized".into(),
        },
        rate,
        entries,
    });
    Ok(BuildOutcome {
        code,
        flows,
        transcript,
    })
}

fn transcript_entry(state: &CodeState, assignment: &Assignment) -> TranscriptEntry {
    let q = assignment.port;
    let dest_dets = state
        .active_destinations()
        .into_iter()
        .map(|l| {
            let (a, f) = state.dest_matrices(l);
            DestDet {
                destination: l + 1,
                in_flow: state.flows()[l].contains_q(q),
                det: f.mul(&a).determinant(),
            }
        })
        .collect();
    let (anchors, base_vector, sigma, draws) = match &assignment.detail {
        AssignDetail::Deterministic {
            anchors,
            base_vector,
            sigma,
        } => (
            Some(anchors.iter().map(|l| l + 1).collect()),
            Some(base_vector.clone()),
            Some(*sigma),
            None,
        ),
        AssignDetail::Randomized { draws } => (None, None, None, Some(*draws)),
    };
    TranscriptEntry {
        layer: q.layer + 1,
        node: q.node + 1,
        pos: q.pos,
        anchors,
        base_vector,
        sigma,
        draws,
        coding_vector: assignment.coding_vector.clone(),
        dest_dets,
    }
}
