//! Decentralized compressed sensing with PG-EXTRA.
//!
//! The state stacks the local copies X (one row of length n per node) and the
//! correction W_state of the same shape, each block row-major.

use std::collections::BTreeSet;

use fixpoint_core::{DenseMatrix, Error as CoreError, FixedPointMap, MetricMatrix, Point};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A simple undirected graph on nodes 0..nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Graph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Rejects self-loops, repeated edges and out-of-range endpoints.
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let g = Graph { nodes, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &self.edges {
            if a >= self.nodes || b >= self.nodes {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) leaves the node range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!("repeated edge ({a}, {b})")));
            }
        }
        Ok(())
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.nodes).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        (0..self.nodes).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// A connected graph with exactly `edges` edges: a random spanning tree plus
    /// uniformly chosen extra edges.
    pub fn seeded_connected(nodes: usize, edges: usize, seed: u64) -> Result<Self> {
        let max = nodes * nodes.saturating_sub(1) / 2;
        if nodes == 0 || edges + 1 < nodes || edges > max {
            return Err(Error::InvalidGraph(format!(
                "no connected simple graph has {nodes} nodes and {edges} edges"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..nodes).collect();
        order.shuffle(&mut rng);
        let mut set = BTreeSet::new();
        for i in 1..nodes {
            let j = rng.gen_range(0..i);
            let (a, b) = (order[i], order[j]);
            set.insert((a.min(b), a.max(b)));
        }
        let mut rest: Vec<(usize, usize)> = (0..nodes)
            .flat_map(|a| (a + 1..nodes).map(move |b| (a, b)))
            .filter(|e| !set.contains(e))
            .collect();
        rest.shuffle(&mut rng);
        set.extend(rest.into_iter().take(edges - (nodes - 1)));
        Graph::new(nodes, set.into_iter().collect())
    }
}

/// W_ij = 1 / max(deg i, deg j) on edges, W_ii = 1 - sum_{j != i} W_ij.
pub fn metropolis_weights(graph: &Graph) -> Result<DenseMatrix> {
    graph.validate()?;
    let deg = graph.degrees();
    let n = graph.nodes;
    let mut w = DenseMatrix::zeros(n, n);
    for &(a, b) in &graph.edges {
        let v = 1.0 / deg[a].max(deg[b]) as f64;
        w.set(a, b, v);
        w.set(b, a, v);
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| w.get(i, j)).sum();
        w.set(i, i, (1.0 - off).max(0.0));
    }
    Ok(w)
}

/// A serializable decentralized sensing instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkProblem {
    pub graph: Graph,
    pub dim: usize,
    /// Per node, the rows of A_(i).
    pub sensing: Vec<Vec<Vec<f64>>>,
    pub measurements: Vec<Vec<f64>>,
    pub lambda: f64,
    pub alpha: f64,
    /// Mixing matrix rows.
    pub mixing: Vec<Vec<f64>>,
    /// Ground-truth signal when known.
    #[serde(default)]
    pub signal: Option<Vec<f64>>,
}

/// Parameters of the synthetic compressed sensing instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingSetup {
    pub nodes: usize,
    pub edges: usize,
    pub dim: usize,
    pub sparsity: usize,
    pub sensors_per_node: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SensingSetup {
    fn default() -> Self {
        SensingSetup {
            nodes: 10,
            edges: 18,
            dim: 50,
            sparsity: 10,
            sensors_per_node: 3,
            alpha: 0.005,
            lambda: 0.002,
            noise: 1e-3,
            seed: 0,
        }
    }
}

impl NetworkProblem {
    pub fn compressed_sensing(s: &SensingSetup) -> Result<Self> {
        if s.sparsity > s.dim || s.dim == 0 || s.sensors_per_node == 0 {
            return Err(Error::Instance(format!(
                "sparsity {} / dimension {} / sensors {} are inconsistent",
                s.sparsity, s.dim, s.sensors_per_node
            )));
        }
        let graph = Graph::seeded_connected(s.nodes, s.edges, s.seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed.wrapping_add(1));
        let mut support: Vec<usize> = (0..s.dim).collect();
        support.shuffle(&mut rng);
        let mut signal = vec![0.0; s.dim];
        for &i in &support[..s.sparsity] {
            signal[i] = StandardNormal.sample(&mut rng);
        }
        let mut sensing = Vec::with_capacity(s.nodes);
        let mut measurements = Vec::with_capacity(s.nodes);
        for _ in 0..s.nodes {
            let rows: Vec<Vec<f64>> = (0..s.sensors_per_node)
                .map(|_| (0..s.dim).map(|_| StandardNormal.sample(&mut rng)).collect())
                .collect();
            let b = rows
                .iter()
                .map(|r| {
                    let clean: f64 = r.iter().zip(&signal).map(|(a, x)| a * x).sum();
                    let e: f64 = StandardNormal.sample(&mut rng);
                    clean + s.noise * e
                })
                .collect();
            sensing.push(rows);
            measurements.push(b);
        }
        let w = metropolis_weights(&graph)?;
        let mixing = (0..s.nodes).map(|i| w.row(i).to_vec()).collect();
        let p = NetworkProblem {
            graph,
            dim: s.dim,
            sensing,
            measurements,
            lambda: s.lambda,
            alpha: s.alpha,
            mixing,
            signal: Some(signal),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn nodes(&self) -> usize {
        self.graph.nodes
    }

    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        let c = self.graph.components();
        if c != 1 {
            return Err(Error::Disconnected { components: c });
        }
        let m = self.nodes();
        if self.sensing.len() != m || self.measurements.len() != m || self.mixing.len() != m {
            return Err(Error::Instance("per-node data does not match the node count".into()));
        }
        for (a, b) in self.sensing.iter().zip(&self.measurements) {
            if a.len() != b.len() || a.iter().any(|r| r.len() != self.dim) {
                return Err(Error::Instance("sensing matrix shape does not match measurements".into()));
            }
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "alpha",
                value: self.alpha,
                reason: "must be finite and > 0",
            }
            .into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                reason: "must be finite and >= 0",
            }
            .into());
        }
        let adj: BTreeSet<(usize, usize)> = self.graph.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        for i in 0..m {
            if self.mixing[i].len() != m {
                return Err(Error::Instance("mixing matrix is not square".into()));
            }
            let row: f64 = self.mixing[i].iter().sum();
            if (row - 1.0).abs() > 1e-12 {
                return Err(Error::Instance(format!("mixing row {i} sums to {row}")));
            }
            for j in 0..m {
                let v = self.mixing[i][j];
                if (v - self.mixing[j][i]).abs() > 1e-14 {
                    return Err(Error::Instance("mixing matrix is not symmetric".into()));
                }
                if i != j && v != 0.0 && !adj.contains(&(i.min(j), i.max(j))) {
                    return Err(Error::Instance(format!("mixing weight on non-edge ({i}, {j})")));
                }
            }
        }
        Ok(())
    }
}

/// Soft threshold of every coordinate at `t`.
pub fn prox_l1(v: &[f64], t: f64) -> Vec<f64> {
    v.iter().map(|&x| x.signum() * (x.abs() - t).max(0.0)).collect()
}

/// The PG-EXTRA step on the stacked (X, W_state).
#[derive(Debug, Clone)]
pub struct PgExtra {
    problem: NetworkProblem,
}

pub fn pg_extra(problem: NetworkProblem) -> Result<PgExtra> {
    problem.validate()?;
    Ok(PgExtra { problem })
}

fn mix(w: &[Vec<f64>], block: &[f64], n: usize) -> Vec<f64> {
    let m = w.len();
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..m {
            let c = w[i][j];
            if c == 0.0 {
                continue;
            }
            for k in 0..n {
                out[i * n + k] += c * block[j * n + k];
            }
        }
    }
    out
}

impl PgExtra {
    pub fn problem(&self) -> &NetworkProblem {
        &self.problem
    }

    pub fn block_len(&self) -> usize {
        self.problem.nodes() * self.problem.dim
    }

    /// Condat-Vu metric for this step. Only differences whose W_state part has
    /// zero node-sum (the subspace reached from W_state = 0) are measured faithfully.
    pub fn metric(&self) -> Result<PgExtraMetric> {
        let m = self.problem.nodes();
        let lap = DMatrix::from_fn(m, m, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            (id - self.problem.mixing[i][j]) / 2.0
        });
        let eig = SymmetricEigen::new(lap);
        let tol = 1e-10;
        let mut pinv = vec![vec![0.0; m]; m];
        let mut proj = vec![vec![0.0; m]; m];
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam.abs() <= tol {
                continue;
            }
            if lam > 1.0 + tol {
                return Err(Error::Instance(format!("mixing matrix has eigenvalue {} below -1", 1.0 - 2.0 * lam)));
            }
            let v = eig.eigenvectors.column(k);
            for i in 0..m {
                for j in 0..m {
                    pinv[i][j] += v[i] * v[j] / lam;
                    proj[i][j] += v[i] * v[j];
                }
            }
        }
        Ok(PgExtraMetric {
            dim: 2 * self.block_len(),
            n: self.problem.dim,
            scale: 1.0 / self.problem.alpha,
            pinv,
            proj,
        })
    }
}

impl FixedPointMap for PgExtra {
    fn dim(&self) -> usize {
        2 * self.block_len()
    }

    fn gamma(&self) -> f64 {
        1.0
    }

    fn apply(&self, z: &Point) -> fixpoint_core::Result<Point> {
        z.check_dim(self.dim())?;
        let p = &self.problem;
        let n = p.dim;
        let (x, w) = z.as_slice().split_at(self.block_len());
        let wx = mix(&p.mixing, x, n);
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..p.nodes() {
            let xi = &x[i * n..(i + 1) * n];
            let a = &p.sensing[i];
            let mut g = vec![0.0; n];
            for (row, b) in a.iter().zip(&p.measurements[i]) {
                let r: f64 = row.iter().zip(xi).map(|(u, v)| u * v).sum::<f64>() - b;
                for k in 0..n {
                    g[k] += row[k] * r;
                }
            }
            let arg: Vec<f64> = (0..n).map(|k| wx[i * n + k] - p.alpha * g[k] - w[i * n + k]).collect();
            out.extend(prox_l1(&arg, p.alpha * p.lambda));
        }
        for q in 0..self.block_len() {
            out.push(w[q] + 0.5 * (x[q] - wx[q]));
        }
        Ok(Point::from(out))
    }
}

/// (1/alpha) [[I, P], [P, L^+]] acting node-wise, with L = (I - W)/2 and P the
/// projector onto the range of L.
#[derive(Debug, Clone)]
pub struct PgExtraMetric {
    dim: usize,
    n: usize,
    scale: f64,
    pinv: Vec<Vec<f64>>,
    proj: Vec<Vec<f64>>,
}

impl MetricMatrix for PgExtraMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, z: &Point) -> fixpoint_core::Result<Point> {
        z.check_dim(self.dim)?;
        let half = self.dim / 2;
        let (x, w) = z.as_slice().split_at(half);
        let pw = mix(&self.proj, w, self.n);
        let px = mix(&self.proj, x, self.n);
        let lw = mix(&self.pinv, w, self.n);
        let mut out: Vec<f64> = (0..half).map(|q| self.scale * (x[q] + pw[q])).collect();
        out.extend((0..half).map(|q| self.scale * (px[q] + lw[q])));
        Ok(Point::from(out))
    }
}
