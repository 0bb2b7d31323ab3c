//! The layered relay-network model: per-node receive/transmit port counts,
//! block transfer matrices between consecutive layers, destination
//! declarations, JSON (de)serialization, and seeded random instance
//! generation.
//!
//! Layers and nodes are 0-based in code; the JSON format uses 1-based layer
//! and node indices. The received vector of layer i+1 is `G_i x_i` where
//! `G_i` is the layer-i transfer matrix; the source's receive ports act as
//! its message register.

use crate::gf::{Field, GfError, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("invalid network: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("generation failed: {0}")]
    Generate(String),
}

/// A node position: 0-based layer and index within the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub layer: usize,
    pub node: usize,
}

impl NodeId {
    pub fn new(layer: usize, node: usize) -> NodeId {
        NodeId { layer, node }
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // 1-based for humans, matching the file format.
        write!(f, "v_{}({})", self.layer + 1, self.node + 1)
    }
}

/// Which side of a node a port sits on: `Rx` ports index the received vector
/// y_i, `Tx` ports index the transmitted vector x_i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Rx,
    Tx,
}

/// A single symbol position at a node. Ports are globally distinct by
/// construction; the derived ordering (node, then position) is the canonical
/// order used everywhere a layer's ports are listed or processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortLabel {
    pub side: Side,
    pub layer: usize,
    pub node: usize,
    pub pos: usize,
}

impl std::fmt::Display for PortLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let side = match self.side {
            Side::Rx => 'P',
            Side::Tx => 'Q',
        };
        write!(
            f,
            "{side}_{}[{}].{}",
            self.layer + 1,
            self.node + 1,
            self.pos
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeDims {
    pub rx: usize,
    pub tx: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    field: Field,
    layers: Vec<Vec<NodeDims>>,
    transfer: Vec<Matrix>,
    destinations: Vec<NodeId>,
}

impl Network {
    pub fn new(
        field: Field,
        layers: Vec<Vec<NodeDims>>,
        transfer: Vec<Matrix>,
        destinations: Vec<NodeId>,
    ) -> Result<Network, NetworkError> {
        let net = Network {
            field,
            layers,
            transfer,
            destinations,
        };
        let violations = net.validate();
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(NetworkError::Invalid(violations))
        }
    }

    /// Check every structural invariant, returning all violations rather than
    /// stopping at the first. An already-constructed network always passes.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let m = self.layers.len();
        if m < 2 {
            v.push(format!("network must have at least 2 layers, found {m}"));
        }
        if self.layers.first().map_or(0, Vec::len) != 1 {
            v.push("layer 1 must consist of the single source node".into());
        }
        for (i, nodes) in self.layers.iter().enumerate() {
            if nodes.is_empty() {
                v.push(format!("layer {} has no nodes", i + 1));
            }
        }
        if self.transfer.len() + 1 != m {
            v.push(format!(
                "expected {} transfer matrices for {} layers, found {}",
                m.saturating_sub(1),
                m,
                self.transfer.len()
            ));
        }
        for (i, g) in self.transfer.iter().enumerate() {
            if i + 1 >= m {
                break;
            }
            let rows = self.layer_rx_dim(i + 1);
            let cols = self.layer_tx_dim(i);
            if g.rows() != rows || g.cols() != cols {
                v.push(format!(
                    "dimension mismatch at layer {}: transfer is {}x{}, expected {}x{}",
                    i + 1,
                    g.rows(),
                    g.cols(),
                    rows,
                    cols
                ));
            }
            if g.field() != &self.field {
                v.push(format!(
                    "transfer matrix at layer {} uses a different field",
                    i + 1
                ));
            }
        }
        for (l, d) in self.destinations.iter().enumerate() {
            if d.layer == 0 {
                v.push(format!("destination {} sits in the source layer", l + 1));
            } else if d.layer >= m || self.layers.get(d.layer).is_none_or(|n| d.node >= n.len()) {
                v.push(format!(
                    "destination {} refers to missing node (layer {}, node {})",
                    l + 1,
                    d.layer + 1,
                    d.node + 1
                ));
            }
            if self.destinations[..l].contains(d) {
                v.push(format!(
                    "destination {} duplicates an earlier destination",
                    l + 1
                ));
            }
        }
        v
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn node_count(&self, layer: usize) -> usize {
        self.layers[layer].len()
    }

    pub fn node_dims(&self, id: NodeId) -> NodeDims {
        self.layers[id.layer][id.node]
    }

    pub fn source(&self) -> NodeId {
        NodeId::new(0, 0)
    }

    pub fn destinations(&self) -> &[NodeId] {
        &self.destinations
    }

    /// All nodes in (layer, node) order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(i, nodes)| (0..nodes.len()).map(move |j| NodeId::new(i, j)))
    }

    pub fn layer_rx_dim(&self, layer: usize) -> usize {
        self.layers[layer].iter().map(|d| d.rx).sum()
    }

    pub fn layer_tx_dim(&self, layer: usize) -> usize {
        self.layers[layer].iter().map(|d| d.tx).sum()
    }

    /// Offset of a node's rx block within the layer's canonical port order.
    pub fn rx_block_start(&self, id: NodeId) -> usize {
        self.layers[id.layer][..id.node].iter().map(|d| d.rx).sum()
    }

    pub fn tx_block_start(&self, id: NodeId) -> usize {
        self.layers[id.layer][..id.node].iter().map(|d| d.tx).sum()
    }

    /// Receive ports of a layer in canonical (node, position) order.
    pub fn rx_ports(&self, layer: usize) -> Vec<PortLabel> {
        let mut out = Vec::with_capacity(self.layer_rx_dim(layer));
        for (node, dims) in self.layers[layer].iter().enumerate() {
            for pos in 0..dims.rx {
                out.push(PortLabel {
                    side: Side::Rx,
                    layer,
                    node,
                    pos,
                });
            }
        }
        out
    }

    pub fn tx_ports(&self, layer: usize) -> Vec<PortLabel> {
        let mut out = Vec::with_capacity(self.layer_tx_dim(layer));
        for (node, dims) in self.layers[layer].iter().enumerate() {
            for pos in 0..dims.tx {
                out.push(PortLabel {
                    side: Side::Tx,
                    layer,
                    node,
                    pos,
                });
            }
        }
        out
    }

    /// Index of a port within its layer's canonical order.
    pub fn port_index(&self, p: PortLabel) -> usize {
        let id = NodeId::new(p.layer, p.node);
        let dims = self.node_dims(id);
        match p.side {
            Side::Rx => {
                assert!(p.pos < dims.rx, "rx position out of range for {id}");
                self.rx_block_start(id) + p.pos
            }
            Side::Tx => {
                assert!(p.pos < dims.tx, "tx position out of range for {id}");
                self.tx_block_start(id) + p.pos
            }
        }
    }

    /// The transfer matrix mapping layer `i` transmissions to layer `i + 1`
    /// receptions.
    pub fn transfer_matrix(&self, i: usize) -> &Matrix {
        &self.transfer[i]
    }

    /// Submatrix of the layer-`i` transfer matrix addressed by port labels:
    /// rows must be rx ports of layer `i + 1`, columns tx ports of layer `i`.
    pub fn transfer_submatrix(&self, i: usize, rows: &[PortLabel], cols: &[PortLabel]) -> Matrix {
        let row_idx: Vec<usize> = rows
            .iter()
            .map(|p| {
                assert!(
                    p.side == Side::Rx && p.layer == i + 1,
                    "row label must be an rx port of layer {}",
                    i + 2
                );
                self.port_index(*p)
            })
            .collect();
        let col_idx: Vec<usize> = cols
            .iter()
            .map(|p| {
                assert!(
                    p.side == Side::Tx && p.layer == i,
                    "column label must be a tx port of layer {}",
                    i + 1
                );
                self.port_index(*p)
            })
            .collect();
        self.transfer[i].submatrix(&row_idx, &col_idx)
    }

    /// One channel use between layers `i` and `i + 1`: y = G_i x.
    pub fn transfer(&self, i: usize, x: &[u64]) -> Vec<u64> {
        assert!(
            i + 1 < self.layers.len(),
            "no transfer out of the last layer"
        );
        self.transfer[i].mul_vec(x)
    }

    pub fn save(&self) -> String {
        let schema = NetworkSchema {
            field: FieldSchema {
                p: self.field.characteristic(),
                k: self.field.degree(),
            },
            layers: self
                .layers
                .iter()
                .map(|nodes| LayerSchema {
                    nodes: nodes
                        .iter()
                        .map(|d| NodeSchema { rx: d.rx, tx: d.tx })
                        .collect(),
                })
                .collect(),
            transfer: self.transfer.iter().map(Matrix::to_nested).collect(),
            destinations: self
                .destinations
                .iter()
                .map(|d| DestSchema {
                    layer: d.layer + 1,
                    node: d.node + 1,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&schema).expect("network serialization");
        s.push('\n');
        s
    }

    pub fn load(bytes: &[u8]) -> Result<Network, NetworkError> {
        let schema: NetworkSchema =
            serde_json::from_slice(bytes).map_err(|e| NetworkError::Parse(e.to_string()))?;
        let field = Field::new(schema.field.p, schema.field.k)?;
        let layers: Vec<Vec<NodeDims>> = schema
            .layers
            .iter()
            .map(|l| {
                l.nodes
                    .iter()
                    .map(|n| NodeDims { rx: n.rx, tx: n.tx })
                    .collect()
            })
            .collect();
        let mut violations = Vec::new();
        let mut transfer = Vec::new();
        for (i, rows) in schema.transfer.iter().enumerate() {
            // Expected dims come from the layer declarations; a 0xN matrix
            // serializes as an empty array and would otherwise lose its shape.
            let shape = if i + 1 < layers.len() {
                let r = layers[i + 1].iter().map(|d| d.rx).sum();
                let c = layers[i].iter().map(|d| d.tx).sum();
                Some((r, c))
            } else {
                None
            };
            match build_matrix(&field, rows, i, shape) {
                Ok(m) => transfer.push(m),
                Err(msg) => violations.push(msg),
            }
        }
        if !violations.is_empty() {
            return Err(NetworkError::Invalid(violations));
        }
        let mut destinations = Vec::new();
        for (l, d) in schema.destinations.iter().enumerate() {
            if d.layer == 0 || d.node == 0 {
                return Err(NetworkError::Invalid(vec![format!(
                    "destination {}: layer and node indices are 1-based",
                    l + 1
                )]));
            }
            destinations.push(NodeId::new(d.layer - 1, d.node - 1));
        }
        Network::new(field, layers, transfer, destinations)
    }
}

fn build_matrix(
    field: &Field,
    rows: &[Vec<u64>],
    index: usize,
    shape: Option<(usize, usize)>,
) -> Result<Matrix, String> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    let (r, c) = match shape {
        Some((er, ec)) => {
            if r != er || (r > 0 && c != ec) {
                return Err(format!(
                    "transfer[{index}] is {r}x{c}, expected {er}x{ec} from the layer dimensions"
                ));
            }
            (er, ec)
        }
        None => (r, c),
    };
    let mut data = Vec::with_capacity(r * c);
    for (ri, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(format!("transfer[{index}] row {ri} has ragged length"));
        }
        for (ci, &v) in row.iter().enumerate() {
            if !field.contains(v) {
                return Err(format!(
                    "transfer[{index}][{ri}][{ci}] = {v} is not an element of {field}"
                ));
            }
            data.push(v);
        }
    }
    Ok(Matrix::new(field.clone(), r, c, data))
}

#[derive(Serialize, Deserialize)]
struct FieldSchema {
    p: u64,
    k: u32,
}

#[derive(Serialize, Deserialize)]
struct NodeSchema {
    rx: usize,
    tx: usize,
}

#[derive(Serialize, Deserialize)]
struct LayerSchema {
    nodes: Vec<NodeSchema>,
}

#[derive(Serialize, Deserialize)]
struct DestSchema {
    layer: usize,
    node: usize,
}

#[derive(Serialize, Deserialize)]
struct NetworkSchema {
    field: FieldSchema,
    layers: Vec<LayerSchema>,
    transfer: Vec<Vec<Vec<u64>>>,
    destinations: Vec<DestSchema>,
}

/// Parameters for seeded random instance generation.
#[derive(Debug, Clone)]
pub struct GenParams {
    pub seed: u64,
    /// Node count per layer; the first entry must be 1.
    pub node_counts: Vec<usize>,
    /// Inclusive range for per-node rx and tx dimensions.
    pub dim_range: (usize, usize),
    /// Probability that a sampled transfer entry is kept rather than zeroed.
    pub density: f64,
    pub field: Field,
    pub destination_count: usize,
}

/// Generate a random network, deterministic in the seed.
///
/// Every transfer entry is drawn uniformly over the field and then zeroed
/// with probability 1 - density, emulating missing edges. The source's rx
/// dimension is tied to its tx dimension so the message register is never
/// the binding constraint on achievable rates. Destinations are sampled
/// without replacement from all non-source layers and listed in (layer,
/// node) order.
pub fn gen_random(params: &GenParams) -> Result<Network, NetworkError> {
    let m = params.node_counts.len();
    if m < 2 {
        return Err(NetworkError::Generate("need at least 2 layers".into()));
    }
    if params.node_counts[0] != 1 {
        return Err(NetworkError::Generate(
            "layer 1 must have exactly 1 node".into(),
        ));
    }
    if params.node_counts.contains(&0) {
        return Err(NetworkError::Generate(
            "every layer needs at least one node".into(),
        ));
    }
    if params.dim_range.0 > params.dim_range.1 {
        return Err(NetworkError::Generate("empty dimension range".into()));
    }
    if !(0.0..=1.0).contains(&params.density) {
        return Err(NetworkError::Generate("density must be in [0, 1]".into()));
    }
    let available: usize = params.node_counts[1..].iter().sum();
    if params.destination_count > available {
        return Err(NetworkError::Generate(format!(
            "requested {} destinations but only {} non-source nodes exist",
            params.destination_count, available
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (lo, hi) = params.dim_range;
    let mut layers: Vec<Vec<NodeDims>> = Vec::with_capacity(m);
    for (i, &count) in params.node_counts.iter().enumerate() {
        let mut nodes = Vec::with_capacity(count);
        for _ in 0..count {
            if i == 0 {
                let d = rng.gen_range(lo..=hi);
                nodes.push(NodeDims { rx: d, tx: d });
            } else {
                let rx = rng.gen_range(lo..=hi);
                let tx = rng.gen_range(lo..=hi);
                nodes.push(NodeDims { rx, tx });
            }
        }
        layers.push(nodes);
    }

    let q = params.field.order();
    let mut transfer = Vec::with_capacity(m - 1);
    for i in 0..m - 1 {
        let rows: usize = layers[i + 1].iter().map(|d| d.rx).sum();
        let cols: usize = layers[i].iter().map(|d| d.tx).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let v = rng.gen_range(0..q);
            let keep: f64 = rng.gen();
            data.push(if keep < params.density { v } else { 0 });
        }
        transfer.push(Matrix::new(params.field.clone(), rows, cols, data));
    }

    let mut candidates: Vec<NodeId> = Vec::new();
    for (i, &count) in params.node_counts.iter().enumerate().skip(1) {
        for j in 0..count {
            candidates.push(NodeId::new(i, j));
        }
    }
    let mut destinations = Vec::with_capacity(params.destination_count);
    for _ in 0..params.destination_count {
        let idx = rng.gen_range(0..candidates.len());
        destinations.push(candidates.remove(idx));
    }
    destinations.sort();

    Network::new(params.field.clone(), layers, transfer, destinations)
}
