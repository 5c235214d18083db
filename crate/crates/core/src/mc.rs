//! Monte Carlo survival estimates from the embedded grid chain of graph
//! Brownian motion.
//!
//! Each edge is cut into `n_e = max(1, round(l_e / delta))` equal steps.
//! Observed on that grid, Brownian motion inside an edge is a simple
//! symmetric walk. From a vertex it first reaches distance `delta_e` along
//! half-edge `e` with probability proportional to `p_v(e) / delta_e`, and the
//! local time it spends at the vertex meanwhile is exponential with mean
//! `m_v = 1 / sum_e p_v(e) / delta_e`. Conditioning on the path, every visit
//! to an active vertex therefore contributes a survival factor
//! `1 / (1 + kappa m_v)`, and the trajectory's product of factors is an
//! unbiased estimate of the survival probability.
//!
//! Randomness: ChaCha8 keyed by the master seed, one stream per trajectory
//! index. Trajectories are reduced in index order by pairwise summation, so
//! estimates are bit-identical for any thread count.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, MetricGraph, PointOnGraph, Role};
use crate::kac::KappaSpec;
use crate::report::sig;
use crate::scalar::{pairwise_sum, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig<T> {
    /// Target grid step.
    pub delta: T,
    pub trajectories: usize,
    pub seed: u64,
    /// Trajectories still running after this many steps are stopped.
    pub step_cap: u64,
}

impl<T: Real> SimConfig<T> {
    pub const DEFAULT_STEP_CAP: u64 = 50_000_000;

    pub fn new(delta: T, trajectories: usize, seed: u64) -> Self {
        SimConfig {
            delta,
            trajectories,
            seed,
            step_cap: Self::DEFAULT_STEP_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimEstimate<T> {
    pub mean: T,
    /// Sample standard deviation over `sqrt(N)`.
    pub standard_error: T,
    pub trajectories: usize,
    /// Trajectories stopped at the step cap; they contribute their running
    /// product, which biases the mean upward.
    pub capped: usize,
    pub mean_steps: f64,
    pub max_steps: u64,
}

#[derive(Clone, Debug)]
struct VertexMoves<T> {
    /// `(edge, forward, cumulative probability)`
    choices: Vec<(usize, bool, f64)>,
    mean_local_time: T,
}

#[derive(Clone, Debug)]
pub struct Grid<T> {
    steps: Vec<usize>,
    ends: Vec<(usize, usize)>,
    step_len: Vec<T>,
    roles: Vec<Role>,
    moves: Vec<VertexMoves<T>>,
    active: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pos {
    Vertex(usize),
    /// Grid index `k` in `1..n_e` counted from the edge's `from` vertex.
    Edge(usize, usize),
}

impl<T: Real> Grid<T> {
    /// Builds the embedded chain for target step `delta`.
    pub fn build(g: &MetricGraph<T>, w: &EdgeWeights<T>, delta: T) -> Result<Self> {
        g.ensure_valid()?;
        if !(delta > T::zero()) {
            return Err(Error::precondition(format!(
                "grid step {delta} must be positive"
            )));
        }
        let steps: Vec<usize> = g
            .edges()
            .iter()
            .map(|e| (e.length / delta).round().to_usize().unwrap_or(1).max(1))
            .collect();
        let step_len: Vec<T> = g
            .edges()
            .iter()
            .zip(&steps)
            .map(|(e, &n)| e.length / T::from_usize(n).expect("steps"))
            .collect();
        let moves = (0..g.num_vertices())
            .map(|v| {
                let rates: Vec<T> = g
                    .half_edges_from(v)
                    .iter()
                    .map(|&h| w.get(h) / step_len[h.edge])
                    .collect();
                let total: T = rates.iter().copied().sum();
                let mut acc = T::zero();
                let choices = g
                    .half_edges_from(v)
                    .iter()
                    .zip(&rates)
                    .map(|(&h, &r)| {
                        acc += r;
                        (h.edge, h.forward, (acc / total).as_f64())
                    })
                    .collect();
                VertexMoves {
                    choices,
                    mean_local_time: T::one() / total,
                }
            })
            .collect();
        Ok(Grid {
            steps,
            ends: g.edges().iter().map(|e| (e.from, e.to)).collect(),
            step_len,
            roles: g.vertices().iter().map(|v| v.role).collect(),
            moves,
            active: g.active(),
        })
    }

    /// Number of steps on each edge.
    pub fn edge_steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn step_length(&self, edge: usize) -> T {
        self.step_len[edge]
    }

    /// Probability of leaving `v` along each incident half-edge, in
    /// incidence order.
    pub fn vertex_transitions(&self, v: usize) -> Vec<f64> {
        let mut prev = 0.0;
        self.moves[v]
            .choices
            .iter()
            .map(|&(_, _, c)| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    /// Mean local time per visit at `v`.
    pub fn mean_local_time(&self, v: usize) -> T {
        self.moves[v].mean_local_time
    }

    fn start(&self, x: PointOnGraph<T>) -> Result<Pos> {
        match x {
            PointOnGraph::Vertex(v) if v < self.roles.len() => Ok(Pos::Vertex(v)),
            PointOnGraph::Vertex(v) => Err(Error::precondition(format!("no vertex #{v}"))),
            PointOnGraph::Edge { edge, offset } => {
                let h = *self
                    .step_len
                    .get(edge)
                    .ok_or_else(|| Error::precondition(format!("no edge #{edge}")))?;
                let k = (offset / h).round();
                let n = self.steps[edge];
                let ku = k.to_usize().unwrap_or(0);
                if (offset - k * h).abs() > T::lit(1e-9) * h * T::from_usize(n).expect("n")
                    || ku == 0
                    || ku >= n
                {
                    return Err(Error::precondition(format!(
                        "offset {offset} on edge #{edge} is not an interior grid node (step {h})"
                    )));
                }
                Ok(Pos::Edge(edge, ku))
            }
        }
    }

    fn run(&self, start: Pos, factor: &[T], rng: &mut ChaCha8Rng, cap: u64) -> (T, u64, bool) {
        let mut weight = T::one();
        let mut pos = start;
        let mut steps = 0u64;
        let mut bits = 0u64;
        let mut nbits = 0u32;
        loop {
            if let Pos::Vertex(v) = pos {
                match self.roles[v] {
                    Role::Exit => return (weight, steps, false),
                    Role::Active => {
                        weight *= factor[v];
                        if weight == T::zero() {
                            return (weight, steps, false);
                        }
                    }
                    Role::Inert => {}
                }
            }
            if steps >= cap {
                return (weight, steps, true);
            }
            steps += 1;
            pos = match pos {
                Pos::Vertex(v) => {
                    let u: f64 = rng.gen();
                    let choices = &self.moves[v].choices;
                    let &(edge, forward, _) = choices
                        .iter()
                        .find(|c| u < c.2)
                        .unwrap_or_else(|| choices.last().expect("vertex has edges"));
                    let n = self.steps[edge];
                    if n == 1 {
                        let (a, b) = self.ends[edge];
                        Pos::Vertex(if forward { b } else { a })
                    } else {
                        Pos::Edge(edge, if forward { 1 } else { n - 1 })
                    }
                }
                Pos::Edge(edge, k) => {
                    if nbits == 0 {
                        bits = rng.next_u64();
                        nbits = 64;
                    }
                    let up = bits & 1 == 1;
                    bits >>= 1;
                    nbits -= 1;
                    let k = if up { k + 1 } else { k - 1 };
                    let (a, b) = self.ends[edge];
                    if k == 0 {
                        Pos::Vertex(a)
                    } else if k == self.steps[edge] {
                        Pos::Vertex(b)
                    } else {
                        Pos::Edge(edge, k)
                    }
                }
            };
        }
    }
}

/// Estimates the survival probability from `x`; `x` must be a grid node.
pub fn estimate_survival<T: Real>(
    grid: &Grid<T>,
    ks: &KappaSpec<T>,
    x: PointOnGraph<T>,
    cfg: &SimConfig<T>,
) -> Result<SimEstimate<T>> {
    if cfg.trajectories == 0 {
        return Err(Error::precondition("at least one trajectory is required"));
    }
    let start = grid.start(x)?;
    let rates = ks.rates(grid.active.len())?;
    let mut factor = vec![T::one(); grid.roles.len()];
    for (&c, &k) in grid.active.iter().zip(&rates) {
        factor[c] = if k.is_infinite() {
            T::zero()
        } else {
            T::one() / (T::one() + k * grid.mean_local_time(c))
        };
    }
    let runs: Vec<(T, u64, bool)> = (0..cfg.trajectories)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            grid.run(start, &factor, &mut rng, cfg.step_cap)
        })
        .collect();

    let n = T::from_usize(cfg.trajectories).expect("n");
    let weights: Vec<T> = runs.iter().map(|r| r.0).collect();
    let mean = pairwise_sum(&weights) / n;
    let sq: Vec<T> = weights.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let standard_error = if cfg.trajectories > 1 {
        (pairwise_sum(&sq) / (n - T::one())).sqrt() / n.sqrt()
    } else {
        T::zero()
    };
    let steps: Vec<f64> = runs.iter().map(|r| r.1 as f64).collect();
    Ok(SimEstimate {
        mean,
        standard_error,
        trajectories: cfg.trajectories,
        capped: runs.iter().filter(|r| r.2).count(),
        mean_steps: pairwise_sum(&steps) / cfg.trajectories as f64,
        max_steps: runs.iter().map(|r| r.1).max().unwrap_or(0),
    })
}

/// One CSV row of Monte Carlo output.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow<T> {
    pub kappa: T,
    pub estimate: SimEstimate<T>,
    pub delta: T,
    pub seed: u64,
}

/// Columns `kappa,mean,se,n,delta,seed`.
pub fn write_estimates_csv<T: Real, W: Write>(rows: &[EstimateRow<T>], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["kappa", "mean", "se", "n", "delta", "seed"])?;
    for r in rows {
        wtr.write_record([
            sig(r.kappa),
            sig(r.estimate.mean),
            sig(r.estimate.standard_error),
            r.estimate.trajectories.to_string(),
            sig(r.delta),
            r.seed.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
