//! `metricreact`: reaction probabilities on metric graphs from the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use metricreact::diffuse::{collapse_study, write_collapse_csv, ActiveZoneSpec};
use metricreact::document::{self, Network};
use metricreact::feynman_kac::{evaluate_at, solve_survival};
use metricreact::harmonic::{green_matrix, hitting_split};
use metricreact::kac::{conversion, rational_form};
use metricreact::mc::{estimate_survival, write_estimates_csv, EstimateRow, Grid, SimConfig};
use metricreact::report::sig;
use metricreact::{Error, KappaSpec, MetricGraph, PointOnGraph, Result};

#[derive(Parser)]
#[command(
    name = "metricreact",
    version,
    about = "Reaction probabilities for point-like active sites on metric graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a graph document and list every violation.
    Validate { path: PathBuf },
    /// Conversion probability from the injection point, by both exact methods.
    Convert {
        path: PathBuf,
        /// Uniform rate; `inf` for instantaneous reaction.
        #[arg(
            long,
            conflicts_with = "site_kappa",
            required_unless_present = "site_kappa"
        )]
        kappa: Option<f64>,
        /// One rate per active vertex, in document order.
        #[arg(long, value_delimiter = ',')]
        site_kappa: Option<Vec<f64>>,
    },
    /// Conversion over a range of rates, as CSV.
    Sweep {
        path: PathBuf,
        #[arg(long)]
        kappa_min: f64,
        #[arg(long)]
        kappa_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Spacing::Geometric)]
        spacing: Spacing,
        #[arg(long, value_enum, default_value_t = Method::Kac)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coefficients of `alpha(kappa)` as a ratio of polynomials, lowest order first.
    Rational { path: PathBuf },
    /// Green matrix of the active vertices, as CSV.
    Green {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability of reaching the active set and where it is first hit.
    Hit { path: PathBuf },
    /// Monte Carlo survival estimates, as CSV.
    Mc {
        path: PathBuf,
        /// One or more rates, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        kappa: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Survival with finite reaction zones against the point-site limit, as CSV.
    Diffuse {
        path: PathBuf,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        diffusion: f64,
        /// Zone scales, strictly decreasing.
        #[arg(long, value_delimiter = ',', required = true)]
        h_list: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kac formula, linear solve and Monte Carlo side by side.
    Compare {
        path: PathBuf,
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Spacing {
    Linear,
    Geometric,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Kac,
    Fk,
    Both,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { path } => return validate(&path),
        Command::Convert {
            path,
            kappa,
            site_kappa,
        } => {
            let ks = match (kappa, site_kappa) {
                (Some(k), _) => KappaSpec::Uniform(k),
                (None, Some(v)) => KappaSpec::PerSite(v),
                (None, None) => unreachable!("clap requires one of the rate flags"),
            };
            convert(&path, &ks)?
        }
        Command::Sweep {
            path,
            kappa_min,
            kappa_max,
            steps,
            spacing,
            method,
            out,
        } => sweep(
            &path,
            kappa_min,
            kappa_max,
            steps,
            spacing,
            method,
            out.as_deref(),
        )?,
        Command::Rational { path } => {
            let net = load(&path)?;
            let form = rational_form(&net.graph, &net.weights, net.start()?)?;
            let coeffs = |p: &[f64]| p.iter().map(|&c| sig(c)).collect::<Vec<_>>().join(" ");
            let mut out = io::stdout().lock();
            writeln!(out, "numerator: {}", coeffs(form.numerator.coeffs()))?;
            writeln!(out, "denominator: {}", coeffs(form.denominator.coeffs()))?;
        }
        Command::Green { path, out } => {
            let net = load(&path)?;
            let green = green_matrix(&net.graph, &net.weights)?;
            let ids: Vec<&str> = green
                .active
                .iter()
                .map(|&c| net.graph.vertex(c).id.as_str())
                .collect();
            let mut wtr = csv::Writer::from_writer(sink(out.as_deref())?);
            wtr.write_record(std::iter::once("site").chain(ids.iter().copied()))
                .map_err(Error::from)?;
            for (i, id) in ids.iter().enumerate() {
                let row = (0..green.dim()).map(|j| sig(green.get(i, j)));
                wtr.write_record(std::iter::once(id.to_string()).chain(row))
                    .map_err(Error::from)?;
            }
            wtr.flush()?;
        }
        Command::Hit { path } => {
            let net = load(&path)?;
            let split = hitting_split(&net.graph, &net.weights, net.start()?)?;
            let mut out = io::stdout().lock();
            writeln!(out, "alpha_inf: {}", sig(split.alpha_inf))?;
            for (&c, &p) in net.graph.active().iter().zip(&split.p) {
                writeln!(out, "p({}): {}", net.graph.vertex(c).id, sig(p))?;
            }
        }
        Command::Mc {
            path,
            kappa,
            delta,
            n,
            seed,
            out,
        } => {
            let net = load(&path)?;
            let grid = Grid::build(&net.graph, &net.weights, delta)?;
            let cfg = SimConfig::new(delta, n, seed);
            let x = net.start()?;
            let rows = kappa
                .iter()
                .map(|&k| {
                    Ok(EstimateRow {
                        kappa: k,
                        estimate: estimate_survival(&grid, &KappaSpec::Uniform(k), x, &cfg)?,
                        delta,
                        seed,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write_estimates_csv(&rows, sink(out.as_deref())?)?;
        }
        Command::Diffuse {
            path,
            k,
            delta,
            diffusion,
            h_list,
            out,
        } => {
            let net = load(&path)?;
            let first = *h_list.first().expect("clap requires at least one value");
            let zone = ActiveZoneSpec {
                k,
                delta,
                diffusion,
                h: first,
            };
            let rows = collapse_study(&net.graph, &net.weights, &zone, &h_list, net.start()?)?;
            write_collapse_csv(&rows, sink(out.as_deref())?)?;
        }
        Command::Compare {
            path,
            kappa,
            delta,
            n,
            seed,
        } => return compare(&path, kappa, delta, n, seed),
    }
    Ok(ExitCode::SUCCESS)
}

fn load(path: &Path) -> Result<Network<f64>> {
    document::load(path).map_err(|e| match e {
        Error::Io(io) => Error::Document(format!("cannot read {}: {io}", path.display())),
        other => other,
    })
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn describe(g: &MetricGraph<f64>, x: PointOnGraph<f64>) -> String {
    match x {
        PointOnGraph::Vertex(v) => g.vertex(v).id.clone(),
        PointOnGraph::Edge { edge, offset } => {
            let e = g.edge(edge);
            format!(
                "{}-{} at {}",
                g.vertex(e.from).id,
                g.vertex(e.to).id,
                sig(offset)
            )
        }
    }
}

fn validate(path: &Path) -> Result<ExitCode> {
    let net = load(path)?;
    let g = &net.graph;
    let violations = g.validate();
    if violations.is_empty() {
        println!(
            "valid: {} vertices, {} edges, {} active, {} exits",
            g.num_vertices(),
            g.num_edges(),
            g.active().len(),
            g.exits().len()
        );
        if let Some(x) = net.injection {
            g.check_point(x)?;
        }
        return Ok(ExitCode::SUCCESS);
    }
    eprintln!("{} violation(s):", violations.len());
    for v in violations {
        eprintln!("  {v}");
    }
    Ok(ExitCode::from(1))
}

fn convert(path: &Path, ks: &KappaSpec<f64>) -> Result<()> {
    let net = load(path)?;
    let x = net.start()?;
    let kac = conversion(&net.graph, &net.weights, x, ks)?;
    let field = solve_survival(&net.graph, &net.weights, ks)?;
    let fk = 1.0 - evaluate_at(&field, &net.graph, x);
    let mut out = io::stdout().lock();
    writeln!(out, "start: {}", describe(&net.graph, x))?;
    writeln!(out, "alpha (kac): {}", sig(kac.alpha))?;
    writeln!(out, "alpha (fk): {}", sig(fk))?;
    writeln!(out, "difference: {}", sig((kac.alpha - fk).abs()))?;
    writeln!(out, "psi: {}", sig(kac.psi))?;
    writeln!(out, "alpha_inf: {}", sig(kac.alpha_inf))?;
    if !kac.breakdown.is_empty() {
        writeln!(out, "site,first_hit,survival")?;
        for t in &kac.breakdown {
            writeln!(
                out,
                "{},{},{}",
                net.graph.vertex(t.vertex).id,
                sig(t.first_hit),
                sig(t.survival)
            )?;
        }
    }
    Ok(())
}

fn sweep(
    path: &Path,
    min: f64,
    max: f64,
    steps: usize,
    spacing: Spacing,
    method: Method,
    out: Option<&Path>,
) -> Result<()> {
    if !(min.is_finite() && max.is_finite() && min >= 0.0 && min < max) {
        return Err(Error::precondition(format!(
            "need 0 <= kappa-min < kappa-max, got {min} and {max}"
        )));
    }
    if steps < 2 {
        return Err(Error::precondition("at least two steps are required"));
    }
    if spacing == Spacing::Geometric && min == 0.0 {
        return Err(Error::precondition("geometric spacing needs kappa-min > 0"));
    }
    let kappas: Vec<f64> = (0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            match spacing {
                _ if i == steps - 1 => max,
                Spacing::Linear => min + (max - min) * t,
                Spacing::Geometric => min * (max / min).powf(t),
            }
        })
        .collect();
    let net = load(path)?;
    let x = net.start()?;
    let mut wtr = csv::Writer::from_writer(sink(out)?);
    wtr.write_record(["kappa", "alpha", "psi", "method"])
        .map_err(Error::from)?;
    if method != Method::Fk {
        for &k in &kappas {
            let a = conversion(&net.graph, &net.weights, x, &KappaSpec::Uniform(k))?.alpha;
            wtr.write_record([sig(k), sig(a), sig(1.0 - a), "kac".into()])
                .map_err(Error::from)?;
        }
    }
    if method != Method::Kac {
        for &k in &kappas {
            let psi = evaluate_at(
                &solve_survival(&net.graph, &net.weights, &KappaSpec::Uniform(k))?,
                &net.graph,
                x,
            );
            wtr.write_record([sig(k), sig(1.0 - psi), sig(psi), "fk".into()])
                .map_err(Error::from)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

fn compare(path: &Path, kappa: f64, delta: f64, n: usize, seed: u64) -> Result<ExitCode> {
    let net = load(path)?;
    let x = net.start()?;
    let ks = KappaSpec::Uniform(kappa);
    let kac = conversion(&net.graph, &net.weights, x, &ks)?.psi;
    let fk = evaluate_at(
        &solve_survival(&net.graph, &net.weights, &ks)?,
        &net.graph,
        x,
    );
    let grid = Grid::build(&net.graph, &net.weights, delta)?;
    let est = estimate_survival(&grid, &ks, x, &SimConfig::new(delta, n, seed))?;
    let tol = 4.0 * est.standard_error;
    let pass = (est.mean - kac).abs() <= tol && (est.mean - fk).abs() <= tol;
    let mut out = io::stdout().lock();
    writeln!(out, "method,psi,se")?;
    writeln!(out, "kac,{},", sig(kac))?;
    writeln!(out, "fk,{},", sig(fk))?;
    writeln!(out, "mc,{},{}", sig(est.mean), sig(est.standard_error))?;
    writeln!(
        out,
        "{}: |mc - exact| = {} against 4 se = {}",
        if pass { "pass" } else { "fail" },
        sig((est.mean - kac).abs()),
        sig(tol)
    )?;
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
