//! Canonical graph documents with known conversion curves.
//!
//! Every fixture records where its expected value comes from. Three of them
//! carry published formulas whose graph topology is not recoverable; they are
//! listed with [`Expected::Unasserted`] and no document.

use crate::document::{GraphDocument, Network};
use crate::error::{Error, Result};
use crate::kac::chain_alpha_recursive;

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    /// Closed form from the literature.
    Published { anchor: &'static str },
    /// Obtained here by an independent computation.
    Derived { method: &'static str },
    /// Quoted formula whose graph is unknown; never asserted.
    Candidate { note: &'static str },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expected {
    /// `alpha(kappa) = num(kappa) / den(kappa)`, coefficients ascending.
    Rational {
        numerator: Vec<f64>,
        denominator: Vec<f64>,
    },
    /// `alpha(kappa)` equals the unweighted chain recursion at `2 kappa`.
    ChainRecursion {
        lengths: Vec<f64>,
    },
    /// Interval with a degree-1 site at the start: survival with a finite
    /// zone is `1 / (cosh(mu y) + mu sinh(mu y) (L - y))`, `y = h delta`,
    /// tending to `1 / (1 + kappa L)`.
    DiffuseInterval {
        k: f64,
        delta: f64,
        diffusion: f64,
        length: f64,
    },
    /// Probability of reaching a site before an exit.
    HitProbability {
        alpha_inf: f64,
    },
    Unasserted {
        formula: &'static str,
    },
}

impl Expected {
    /// Expected conversion at rate `kappa`, where a curve is known.
    pub fn alpha(&self, kappa: f64) -> Option<f64> {
        match self {
            Expected::Rational {
                numerator,
                denominator,
            } => {
                let ev = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &x| acc * kappa + x);
                Some(ev(numerator) / ev(denominator))
            }
            Expected::ChainRecursion { lengths } => {
                chain_alpha_recursive(lengths, 2.0 * kappa).ok()
            }
            Expected::DiffuseInterval {
                k,
                delta,
                diffusion,
                length,
            } if (kappa - k * delta / diffusion).abs() <= 1e-15 * kappa.abs().max(1.0) => {
                Some(1.0 - 1.0 / (1.0 + kappa * length))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub document: Option<&'static str>,
    pub expected: Expected,
    pub provenance: Provenance,
}

impl Fixture {
    pub fn network(&self) -> Result<Network<f64>> {
        let text = self.document.ok_or_else(|| {
            Error::Document(format!("fixture '{}' has no graph document", self.name))
        })?;
        GraphDocument::from_json(text)?.to_network()
    }
}

macro_rules! doc {
    ($file:literal) => {
        Some(include_str!(concat!("../fixtures/", $file)))
    };
}

fn star(n: usize, document: Option<&'static str>, uneven: bool) -> Fixture {
    let names = [
        ("star_n2", "star_n2_uneven"),
        ("star_n3", "star_n3_uneven"),
        ("star_n4", "star_n4_uneven"),
    ];
    let (even, odd) = names[n - 2];
    Fixture {
        name: if uneven { odd } else { even },
        description: if uneven {
            "site of degree n with n-1 inert leaves of unequal length and a unit exit edge"
        } else {
            "site of degree n with n-1 unit inert leaves and a unit exit edge"
        },
        document,
        expected: Expected::Rational {
            numerator: vec![0.0, n as f64],
            denominator: vec![1.0, n as f64],
        },
        provenance: Provenance::Published {
            anchor: "alpha = deg(v) l kappa / (1 + deg(v) l kappa), independent of leaf lengths",
        },
    }
}

/// All fixtures, asserted ones first.
pub fn fixture_suite() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "single_site",
            description: "v0 -1- c -1- a, start at v0; the site has degree 2",
            document: doc!("single_site.json"),
            expected: Expected::Rational {
                numerator: vec![0.0, 2.0],
                denominator: vec![1.0, 2.0],
            },
            provenance: Provenance::Published {
                anchor: "alpha = 2 l kappa / (1 + 2 l kappa)",
            },
        },
        Fixture {
            name: "single_site_end",
            description: "c -1- a, start at the degree-1 site",
            document: doc!("single_site_end.json"),
            expected: Expected::Rational {
                numerator: vec![0.0, 1.0],
                denominator: vec![1.0, 1.0],
            },
            provenance: Provenance::Published {
                anchor: "without the entrance edge, 2 l kappa becomes l kappa",
            },
        },
        star(2, doc!("star_n2.json"), false),
        star(3, doc!("star_n3.json"), false),
        star(4, doc!("star_n4.json"), false),
        star(2, doc!("star_n2_uneven.json"), true),
        star(3, doc!("star_n3_uneven.json"), true),
        star(4, doc!("star_n4_uneven.json"), true),
        Fixture {
            name: "chain_m1",
            description: "chain with one site, lengths (0.5, 1)",
            document: doc!("chain_m1.json"),
            expected: Expected::ChainRecursion {
                lengths: vec![0.5, 1.0],
            },
            provenance: Provenance::Derived {
                method: "product recursion at doubled rate",
            },
        },
        Fixture {
            name: "chain_m2",
            description: "chain with two sites, lengths (1, 0.5, 0.5)",
            document: doc!("chain_m2.json"),
            expected: Expected::ChainRecursion {
                lengths: vec![1.0, 0.5, 0.5],
            },
            provenance: Provenance::Derived {
                method: "product recursion at doubled rate",
            },
        },
        Fixture {
            name: "chain_m3",
            description: "chain with three sites, lengths (0.5, 1, 0.25, 2)",
            document: doc!("chain_m3.json"),
            expected: Expected::ChainRecursion {
                lengths: vec![0.5, 1.0, 0.25, 2.0],
            },
            provenance: Provenance::Derived {
                method: "product recursion at doubled rate",
            },
        },
        Fixture {
            name: "interval",
            description: "unit interval, degree-1 site at the start, exit at the end",
            document: doc!("interval.json"),
            expected: Expected::DiffuseInterval {
                k: 1.0,
                delta: 1.0,
                diffusion: 1.0,
                length: 1.0,
            },
            provenance: Provenance::Derived {
                method: "closed-form solution of the zone ODE and its small-h expansion",
            },
        },
        Fixture {
            name: "y_graph",
            description: "x -1- j, j -1- c, j -1- a with equal weights at j",
            document: doc!("y_graph.json"),
            expected: Expected::HitProbability { alpha_inf: 0.5 },
            provenance: Provenance::Derived {
                method: "symmetry at j, confirmed by absorbing Monte Carlo",
            },
        },
        Fixture {
            name: "candidate_split_branch",
            description: "hit probability and local time of an unrecovered topology",
            document: None,
            expected: Expected::Unasserted {
                formula: "alpha(inf) = l1/(l0+l1); lambda = 2 l (l0+l1)/(l0+l1+l)",
            },
            provenance: Provenance::Candidate {
                note: "graph not recoverable from the formula alone",
            },
        },
        Fixture {
            name: "candidate_side_branches",
            description: "several inert side branches of an unrecovered topology",
            document: None,
            expected: Expected::Unasserted {
                formula: "alpha = 2 (l0 + n l) kappa / (1 + 2 (l0 + n l) kappa)",
            },
            provenance: Provenance::Candidate {
                note: "graph not recoverable from the formula alone",
            },
        },
        Fixture {
            name: "candidate_nested_sites",
            description: "nested sites of an unrecovered topology",
            document: None,
            expected: Expected::Unasserted {
                formula: "alpha = 3 l (1 + l1 kappa) kappa / (1 + 3 l (1 + l1 kappa) kappa)",
            },
            provenance: Provenance::Candidate {
                note: "graph not recoverable from the formula alone",
            },
        },
    ]
}

pub fn fixture(name: &str) -> Option<Fixture> {
    fixture_suite().into_iter().find(|f| f.name == name)
}
