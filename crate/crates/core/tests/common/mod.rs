#![allow(dead_code)]

use metricreact::{MetricGraph, Role};
use rand::seq::SliceRandom;
use rand::Rng;

pub struct RandomGraph {
    pub graph: MetricGraph<f64>,
    /// A non-exit start vertex.
    pub start: usize,
}

/// Connected graph with at most `max_vertices` vertices, 1..=`max_active`
/// active ones and one or two exits. Edge lengths lie in `[0.2, 2]`; radii are
/// random unless `uniform_radii`.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    max_vertices: usize,
    max_active: usize,
    uniform_radii: bool,
) -> RandomGraph {
    let exits = rng.gen_range(1..=2);
    let active = rng.gen_range(1..=max_active);
    let inert = rng.gen_range(0..=max_vertices - exits - active);
    let mut g = MetricGraph::new();
    let mut core: Vec<usize> = (0..active)
        .map(|k| g.add_vertex(format!("c{k}"), Role::Active))
        .collect();
    core.extend((0..inert).map(|k| g.add_vertex(format!("v{k}"), Role::Inert)));
    core.shuffle(rng);

    let edge = |g: &mut MetricGraph<f64>, rng: &mut R, a: usize, b: usize| {
        let length = rng.gen_range(0.2..2.0);
        let radius = if uniform_radii {
            1.0
        } else {
            rng.gen_range(0.5..2.0)
        };
        g.add_edge_with_radius(a, b, length, radius);
    };
    for k in 1..core.len() {
        let parent = core[rng.gen_range(0..k)];
        edge(&mut g, rng, parent, core[k]);
    }
    if core.len() > 1 {
        for _ in 0..rng.gen_range(0..=3) {
            let a = *core.choose(rng).unwrap();
            let b = *core.choose(rng).unwrap();
            if a != b {
                edge(&mut g, rng, a, b);
            }
        }
    }
    for k in 0..exits {
        let a = g.add_vertex(format!("a{k}"), Role::Exit);
        let at = *core.choose(rng).unwrap();
        edge(&mut g, rng, at, a);
    }
    let start = *core.choose(rng).unwrap();
    assert!(g.validate().is_empty());
    RandomGraph { graph: g, start }
}

/// Chain lengths `[l_1, ..., l_{m+1}]` for `m` sites.
pub fn random_chain<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    (0..=m).map(|_| rng.gen_range(0.1..2.0)).collect()
}
