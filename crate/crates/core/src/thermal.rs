//! Classical model of a resistive cooling network.
//!
//! Every node exchanges heat with the environment through `R_env` and with
//! other nodes through optional edges. Energy balance at each node gives the
//! linear system `A(x) T = B`, where `T` holds temperatures relative to the
//! environment and `B` the external heat rates. The direct solve here is the
//! ground truth every quantum routine in the crate is checked against.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{QusoError, Result};

/// Largest edge count for which all `2^m` configurations are enumerated.
pub const MAX_ENUMERABLE_EDGES: usize = 24;

/// A connection between two nodes, resistance in K/W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub resistance: f64,
}

/// Nodes, candidate edges and boundary data of a cooling network.
///
/// Resistances are stored in K/W and heat rates in W. Edges are kept sorted
/// lexicographically by `(i, j)`; that order is the bit order of a
/// [`Configuration`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalNetwork {
    node_count: usize,
    edges: Vec<Edge>,
    r_env: f64,
    heat_rates: Vec<f64>,
    t_env: f64,
}

/// On-disk network description (mK/W and kW, as engineers usually quote them).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkFile {
    pub nodes: usize,
    #[serde(rename = "r_env_mK_per_W")]
    pub r_env_mk_per_w: f64,
    #[serde(rename = "t_env_K")]
    pub t_env_k: f64,
    pub edges: Vec<EdgeFile>,
    #[serde(rename = "q_kW")]
    pub q_kw: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeFile {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "r_mK_per_W")]
    pub r_mk_per_w: f64,
}

impl ThermalNetwork {
    /// Builds a network from SI values. Edges may be given in any order.
    pub fn new(
        node_count: usize,
        mut edges: Vec<Edge>,
        r_env: f64,
        heat_rates: Vec<f64>,
        t_env: f64,
    ) -> Result<Self> {
        if node_count < 2 {
            return Err(QusoError::InvalidNetwork(format!(
                "need at least 2 nodes, got {node_count}"
            )));
        }
        if heat_rates.len() != node_count {
            return Err(QusoError::InvalidNetwork(format!(
                "{} heat rates for {node_count} nodes",
                heat_rates.len()
            )));
        }
        if !(r_env > 0.0) || !r_env.is_finite() {
            return Err(QusoError::InvalidNetwork(format!(
                "environment resistance must be positive, got {r_env}"
            )));
        }
        if heat_rates.iter().any(|q| !q.is_finite()) || !t_env.is_finite() {
            return Err(QusoError::InvalidNetwork("non-finite boundary data".into()));
        }
        for e in &edges {
            if e.i >= e.j || e.j >= node_count {
                return Err(QusoError::InvalidNetwork(format!(
                    "edge ({}, {}) must satisfy i < j < {node_count}",
                    e.i, e.j
                )));
            }
            if !(e.resistance > 0.0) || !e.resistance.is_finite() {
                return Err(QusoError::InvalidNetwork(format!(
                    "edge ({}, {}) has non-positive resistance {}",
                    e.i, e.j, e.resistance
                )));
            }
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = edges.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(QusoError::InvalidNetwork(format!(
                "duplicate edge ({}, {})",
                w[0].i, w[0].j
            )));
        }
        Ok(Self {
            node_count,
            edges,
            r_env,
            heat_rates,
            t_env,
        })
    }

    /// The four-node battery/engine/two-cooler reference network.
    pub fn four_node_reference() -> Self {
        let edge = |i, j, r_mk: f64| Edge {
            i,
            j,
            resistance: r_mk * 1e-3,
        };
        Self::new(
            4,
            vec![
                edge(0, 1, 5.0),
                edge(0, 2, 6.0),
                edge(0, 3, 6.0),
                edge(1, 2, 7.0),
                edge(1, 3, 7.0),
                edge(2, 3, 8.0),
            ],
            10e-3,
            vec![2000.0, 4000.0, -200.0, -2000.0],
            293.0,
        )
        .expect("reference network is valid")
    }

    /// `n` nodes on a cycle, every edge with resistance `r`, uniform heat.
    pub fn ring(n: usize, r: f64, r_env: f64, heat: f64) -> Result<Self> {
        if n < 3 {
            return Err(QusoError::InvalidNetwork(format!("a ring needs 3 nodes, got {n}")));
        }
        let edges = (0..n)
            .map(|i| {
                let j = (i + 1) % n;
                Edge {
                    i: i.min(j),
                    j: i.max(j),
                    resistance: r,
                }
            })
            .collect();
        Self::new(n, edges, r_env, vec![heat; n], 293.0)
    }

    pub fn from_file_format(file: &NetworkFile) -> Result<Self> {
        let edges = file
            .edges
            .iter()
            .map(|e| Edge {
                i: e.i,
                j: e.j,
                resistance: e.r_mk_per_w * 1e-3,
            })
            .collect();
        let q = file.q_kw.iter().map(|q| q * 1e3).collect();
        Self::new(file.nodes, edges, file.r_env_mk_per_w * 1e-3, q, file.t_env_k)
    }

    pub fn to_file_format(&self) -> NetworkFile {
        NetworkFile {
            nodes: self.node_count,
            r_env_mk_per_w: self.r_env * 1e3,
            t_env_k: self.t_env,
            edges: self
                .edges
                .iter()
                .map(|e| EdgeFile {
                    i: e.i,
                    j: e.j,
                    r_mk_per_w: e.resistance * 1e3,
                })
                .collect(),
            q_kw: self.heat_rates.iter().map(|q| q * 1e-3).collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(s)?;
        Self::from_file_format(&file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Number of candidate edges `m`.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn r_env(&self) -> f64 {
        self.r_env
    }

    pub fn t_env(&self) -> f64 {
        self.t_env
    }

    pub fn heat_rates(&self) -> &[f64] {
        &self.heat_rates
    }

    /// Smallest edge resistance, or `R_env` when there are no edges.
    pub fn r_min(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.resistance)
            .fold(self.r_env, f64::min)
    }

    /// Maximum node degree of the candidate graph.
    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.node_count];
        for e in &self.edges {
            deg[e.i] += 1;
            deg[e.j] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// Number of configurations `2^m`, guarded against blow-up.
    pub fn configuration_count(&self) -> Result<usize> {
        let m = self.edge_count();
        if m > MAX_ENUMERABLE_EDGES {
            return Err(QusoError::ResourceLimit(format!(
                "{m} edges give 2^{m} configurations; the limit is 2^{MAX_ENUMERABLE_EDGES}"
            )));
        }
        Ok(1usize << m)
    }

    pub fn configurations(&self) -> Result<impl Iterator<Item = Configuration>> {
        let m = self.edge_count();
        let count = self.configuration_count()?;
        Ok((0..count).map(move |idx| Configuration::from_index(idx, m)))
    }

    fn check(&self, x: &Configuration) -> Result<()> {
        if x.len() != self.edge_count() {
            return Err(QusoError::ConfigurationLength {
                expected: self.edge_count(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Edge-activation bitstring. Bit `e` switches edge `e` of the network on.
///
/// As an integer index, bit `e` has weight `2^e`; as a string, character `e`
/// (left to right) is bit `e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    bits: Vec<bool>,
}

impl Configuration {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_index(index: usize, m: usize) -> Self {
        Self {
            bits: (0..m).map(|e| (index >> e) & 1 == 1).collect(),
        }
    }

    pub fn all(m: usize, value: bool) -> Self {
        Self {
            bits: vec![value; m],
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(QusoError::InvalidArgument(format!(
                    "bad configuration character `{other}` in `{s}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (e, &b)| acc | (usize::from(b) << e))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, e: usize) -> bool {
        self.bits[e]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn with_bit(&self, e: usize, value: bool) -> Self {
        let mut bits = self.bits.clone();
        bits[e] = value;
        Self { bits }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Bitstring label of configuration `index` over `m` edges.
pub fn bitstring(index: usize, m: usize) -> String {
    Configuration::from_index(index, m).to_string()
}

/// Steady-state temperatures for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    /// Temperatures relative to the environment, in K.
    pub temperatures: Vec<f64>,
    pub t_env: f64,
    /// `||A T - B||_inf / ||B||_inf`.
    pub residual: f64,
}

impl SolveResult {
    pub fn absolute_temperatures(&self) -> Vec<f64> {
        self.temperatures.iter().map(|t| t + self.t_env).collect()
    }
}

/// Singular-value data of `A(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralStats {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub kappa_exact: f64,
    /// Gershgorin bound `1 + 2 d_max R_env / R_min`.
    pub kappa_bound: f64,
}

/// Assembles `A(x)`: `1/R_env` on the diagonal plus a graph Laplacian of the
/// active edges weighted by `1/R_ij`.
pub fn assemble_matrix(net: &ThermalNetwork, x: &Configuration) -> Result<DMatrix<f64>> {
    net.check(x)?;
    let n = net.node_count();
    let mut a = DMatrix::from_diagonal_element(n, n, 1.0 / net.r_env());
    for (e, edge) in net.edges().iter().enumerate() {
        if !x.bit(e) {
            continue;
        }
        let g = 1.0 / edge.resistance;
        a[(edge.i, edge.i)] += g;
        a[(edge.j, edge.j)] += g;
        a[(edge.i, edge.j)] -= g;
        a[(edge.j, edge.i)] -= g;
    }
    Ok(a)
}

pub fn rhs(net: &ThermalNetwork) -> DVector<f64> {
    DVector::from_column_slice(net.heat_rates())
}

/// Solves `A(x) T = B` by Cholesky factorization.
pub fn solve_direct(net: &ThermalNetwork, x: &Configuration) -> Result<SolveResult> {
    let a = assemble_matrix(net, x)?;
    let b = rhs(net);
    let chol = a.clone().cholesky().ok_or_else(|| {
        QusoError::InvalidNetwork("system matrix is not positive definite".into())
    })?;
    let t = chol.solve(&b);
    let r = &a * &t - &b;
    let b_norm = b.amax();
    let residual = if b_norm > 0.0 { r.amax() / b_norm } else { r.amax() };
    Ok(SolveResult {
        temperatures: t.iter().copied().collect(),
        t_env: net.t_env(),
        residual,
    })
}

pub fn spectral_stats(net: &ThermalNetwork, x: &Configuration) -> Result<SpectralStats> {
    let a = assemble_matrix(net, x)?;
    let eig = a.symmetric_eigen();
    let sigma_min = eig.eigenvalues.min();
    let sigma_max = eig.eigenvalues.max();
    Ok(SpectralStats {
        sigma_min,
        sigma_max,
        kappa_exact: sigma_max / sigma_min,
        kappa_bound: kappa_bound(net),
    })
}

pub fn kappa_bound(net: &ThermalNetwork) -> f64 {
    1.0 + 2.0 * net.max_degree() as f64 * net.r_env() / net.r_min()
}

/// Per-configuration scalar costs, indexed by configuration index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    edge_count: usize,
    costs: Vec<f64>,
}

impl CostTable {
    pub fn new(edge_count: usize, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != 1usize << edge_count {
            return Err(QusoError::InvalidArgument(format!(
                "cost table for {edge_count} edges needs {} entries, got {}",
                1usize << edge_count,
                costs.len()
            )));
        }
        if let Some(c) = costs.iter().find(|c| !c.is_finite()) {
            return Err(QusoError::NonFinite(format!("cost {c}")));
        }
        Ok(Self { edge_count, costs })
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn get(&self, index: usize) -> f64 {
        self.costs[index]
    }

    pub fn max(&self) -> f64 {
        self.costs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.costs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the smallest cost; ties go to the smaller index.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.costs.iter().enumerate() {
            if c < self.costs[best] {
                best = i;
            }
        }
        best
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.costs.iter().enumerate() {
            if c > self.costs[best] {
                best = i;
            }
        }
        best
    }

    pub fn mean(&self) -> f64 {
        self.costs.iter().sum::<f64>() / self.costs.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let var = self.costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>()
            / self.costs.len() as f64;
        var.sqrt()
    }

    /// Divides every cost by the table maximum, so the largest entry is 1.
    pub fn normalized(&self) -> Result<Self> {
        let max = self.max();
        if !(max > 0.0) {
            return Err(QusoError::Normalization(format!(
                "maximum cost is {max}; need a positive maximum"
            )));
        }
        Ok(Self {
            edge_count: self.edge_count,
            costs: self.costs.iter().map(|c| c / max).collect(),
        })
    }

    /// `a * c + b` applied to every entry.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        Self {
            edge_count: self.edge_count,
            costs: self.costs.iter().map(|c| a * c + b).collect(),
        }
    }
}

/// Tabulates `c(x) = scale * T_target(x)` for every configuration.
pub fn enumerate_costs(net: &ThermalNetwork, target_node: usize, scale: f64) -> Result<CostTable> {
    if target_node >= net.node_count() {
        return Err(QusoError::InvalidArgument(format!(
            "target node {target_node} out of range for {} nodes",
            net.node_count()
        )));
    }
    let costs = net
        .configurations()?
        .map(|x| solve_direct(net, &x).map(|s| s.temperatures[target_node] * scale))
        .collect::<Result<Vec<_>>>()?;
    CostTable::new(net.edge_count(), costs)
}

/// Pairs `(x, x')` where `x'` adds one edge touching a heat sink (a node with
/// negative heat rate) yet the target node gets warmer. Diagnostic only.
pub fn cooling_monotonicity_violations(
    net: &ThermalNetwork,
    target_node: usize,
) -> Result<Vec<(usize, usize)>> {
    let table = enumerate_costs(net, target_node, 1.0)?;
    let q = net.heat_rates();
    let mut out = Vec::new();
    for x in 0..table.len() {
        for (e, edge) in net.edges().iter().enumerate() {
            let toward_sink = q[edge.i] < 0.0 || q[edge.j] < 0.0;
            if !toward_sink || (x >> e) & 1 == 1 {
                continue;
            }
            let y = x | (1 << e);
            if table.get(y) > table.get(x) + 1e-12 {
                out.push((x, y));
            }
        }
    }
    Ok(out)
}
