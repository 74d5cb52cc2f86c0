//! flatcur: build 1/n-translation surfaces, tighten curves, decompose norms,
//! trace multi-foliation leaves and check the length identities.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use flatcur_cli::formats::{
    curve_from_json, geodesic_to_json, measure_to_json, parse_surface, resolve_norm,
    trace_to_json, NormArg,
};
use flatcur_cli::svg::SvgDoc;
use flatcur_core::current::{consistency_report, oracle_report};
use flatcur_core::foliation::{detect_cylinder, trace_leaf, LeafStart, Termination, Turning};
use flatcur_core::geodesic::{tighten_closed, verify_geodesic, TightenOptions};
use flatcur_core::norm::decompose_norm;
use flatcur_core::surface::{build_surface, SurfaceComplex, Tolerances};
use flatcur_core::Vec2;

#[derive(Parser)]
#[command(name = "flatcur", version, about = "Flat cone surfaces, Finsler lengths and multi-foliations")]
struct Cli {
    /// Seed recorded in outputs and used by randomized harnesses.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Length tolerance; defaults to 1e-9 times the largest polygon diameter.
    #[arg(long, global = true)]
    eps_len: Option<f64>,
    /// Angle tolerance in radians.
    #[arg(long, global = true, default_value_t = 1e-9)]
    eps_ang: f64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a surface and report genus, cone angles and the Gauss-Bonnet
    /// residual.
    Validate { surface: PathBuf },
    /// Tighten a closed curve to its CAT(0) geodesic representative.
    Tighten {
        surface: PathBuf,
        curve: PathBuf,
        /// Relative convergence tolerance of the tightening sweep.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Write a layered SVG of the development.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Length report: Finsler lengths vs weighted θ-length combinations.
    Lengths {
        surface: PathBuf,
        curve: PathBuf,
        /// Norm name (l1, hexagonal, octagonal, web:<n>:<theta>, euclidean)
        /// or a norm polygon file; repeatable.
        #[arg(long = "norm", required = true)]
        norms: Vec<String>,
        /// Extra foliation directions to report θ-lengths for; repeatable.
        #[arg(long = "theta")]
        thetas: Vec<f64>,
        /// Sample count for decomposition spot checks.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Approximation depth for oracle norms.
        #[arg(long, default_value_t = 5)]
        depth: u32,
    },
    /// Decompose a Z/n-invariant polygonal norm into a web measure.
    Decompose {
        #[arg(long)]
        norm: String,
        #[arg(short)]
        n: u32,
    },
    /// Trace a leaf of the θ multi-foliation, optionally sweeping its
    /// cylinder.
    Trace {
        surface: PathBuf,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value = "left")]
        turning: String,
        /// Start point "x,y" in the chart of --pid.
        #[arg(long, default_value = "0,0")]
        start: String,
        #[arg(long, default_value_t = 0)]
        pid: u32,
        #[arg(long, default_value_t = 50.0)]
        max_length: f64,
        #[arg(long)]
        cylinder: bool,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Batch length reports over a fixture suite.
    Report { suite: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            println!("{}", serde_json::json!({ "error": format!("{e:#}") }));
            ExitCode::FAILURE
        }
    }
}

fn load_surface(cli: &Cli, path: &Path) -> Result<SurfaceComplex> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let spec = parse_surface(&text)?;
    let mut tol = Tolerances::for_spec(&spec);
    if let Some(e) = cli.eps_len {
        tol.eps_len = e;
    }
    tol.eps_ang = cli.eps_ang;
    build_surface(&spec, tol).map_err(|e| anyhow!("{e}"))
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.cmd {
        Cmd::Validate { surface } => {
            let s = load_surface(cli, surface)?;
            let gb: f64 = s
                .classes()
                .iter()
                .map(|c| c.total - std::f64::consts::TAU)
                .sum::<f64>()
                - 4.0 * std::f64::consts::PI * (f64::from(s.genus) - 1.0);
            if cli.format == Format::Json {
                let angles: Vec<f64> =
                    s.cone_points.iter().map(|c| c.total_angle).collect();
                println!(
                    "{}",
                    serde_json::json!({
                        "n": s.n(),
                        "genus": s.genus,
                        "euler_characteristic": s.euler_characteristic,
                        "cone_angles": angles,
                        "gauss_bonnet_residual": gb.abs(),
                        "seed": cli.seed,
                    })
                );
            } else {
                println!("n                    {}", s.n());
                println!("genus                {}", s.genus);
                println!("euler characteristic {}", s.euler_characteristic);
                for c in &s.cone_points {
                    println!(
                        "cone point {}       angle {:.12} = {}π ({} corners)",
                        c.id,
                        c.total_angle,
                        c.total_angle / std::f64::consts::PI,
                        c.corner_list.len()
                    );
                }
                println!("Gauss-Bonnet residual {:.3e}", gb.abs());
            }
            Ok(true)
        }
        Cmd::Tighten { surface, curve, tol, svg } => {
            let s = load_surface(cli, surface)?;
            let text = std::fs::read_to_string(curve)?;
            let path = curve_from_json(&text)?;
            let rep = tighten_closed(
                &s,
                &path,
                TightenOptions { rel_tol: *tol, max_sweeps: 100_000 },
            )
            .map_err(|e| anyhow!("{e}"))?;
            let report = verify_geodesic(&s, &rep, cli.eps_ang.max(1e-9));
            println!("{}", geodesic_to_json(&rep, cli.seed));
            if let Some(out) = svg {
                let mut doc = SvgDoc::new();
                doc.add_surface(&s);
                doc.add_geodesic(&s, &rep);
                std::fs::write(out, doc.render())?;
            }
            Ok(report.pass)
        }
        Cmd::Lengths { surface, curve, norms, thetas, samples, depth } => {
            let s = load_surface(cli, surface)?;
            let text = std::fs::read_to_string(curve)?;
            let path = curve_from_json(&text)?;
            let mut poly_norms = Vec::new();
            let mut oracles = Vec::new();
            for name in norms {
                match resolve_norm(name, s.tol.eps_len.max(1e-9))? {
                    NormArg::Polygon { name, norm } => poly_norms.push((name, norm)),
                    NormArg::Euclidean => oracles.push(NormArg::Euclidean),
                }
            }
            let reports =
                consistency_report(&s, &[path], &poly_norms, thetas, *samples)
                    .map_err(|e| anyhow!("{e}"))?;
            let r = &reports[0];
            let mut pass = r.pass;
            let mut oracle_entries = Vec::new();
            if !oracles.is_empty() {
                let text = std::fs::read_to_string(curve)?;
                let path = curve_from_json(&text)?;
                let rep = tighten_closed(&s, &path, TightenOptions::default())
                    .map_err(|e| anyhow!("{e}"))?;
                for o in &oracles {
                    let e = oracle_report(&s, &rep, &o.oracle(), *depth)
                        .map_err(|e| anyhow!("{e}"))?;
                    oracle_entries.push(e);
                }
            }
            if cli.format == Format::Json {
                let norms_json: Vec<_> = r
                    .norms
                    .iter()
                    .map(|e| {
                        serde_json::json!({
                            "norm": e.name,
                            "finsler": e.finsler,
                            "liouville": e.liouville,
                            "residual": e.residual,
                            "reconstruction_error": e.reconstruction_error,
                        })
                    })
                    .collect();
                let oracles_json: Vec<_> = oracle_entries
                    .iter()
                    .map(|e| {
                        serde_json::json!({
                            "norm": "euclidean",
                            "depth": e.depth,
                            "finsler": e.finsler,
                            "liouville": e.liouville,
                            "residual": e.residual,
                        })
                    })
                    .collect();
                println!(
                    "{}",
                    serde_json::json!({
                        "cat0_length": r.cat0,
                        "geodesic_ok": r.geodesic_ok,
                        "theta_lengths": r.theta_lengths,
                        "norms": norms_json,
                        "oracle_norms": oracles_json,
                        "pass": pass,
                        "seed": cli.seed,
                    })
                );
            } else {
                println!("cat0 length {:.12}  geodesic ok: {}", r.cat0, r.geodesic_ok);
                for (t, l) in &r.theta_lengths {
                    println!("theta {t:<8.4} length {l:.12}");
                }
                for e in &r.norms {
                    println!(
                        "norm {:<12} finsler {:.12}  liouville {:.12}  residual {:.3e}",
                        e.name, e.finsler, e.liouville, e.residual
                    );
                }
                for e in &oracle_entries {
                    println!(
                        "norm euclidean    depth {}  finsler {:.12}  liouville {:.12}  residual {:.3e}",
                        e.depth, e.finsler, e.liouville, e.residual
                    );
                }
            }
            pass &= r.norms.iter().all(|e| e.residual <= 1e-9);
            Ok(pass)
        }
        Cmd::Decompose { norm, n } => {
            let arg = resolve_norm(norm, 1e-9)?;
            match arg {
                NormArg::Polygon { norm, .. } => {
                    let m = decompose_norm(&norm, *n, cli.eps_ang.max(1e-12))
                        .map_err(|e| anyhow!("{e}"))?;
                    println!("{}", measure_to_json(&m));
                    Ok(true)
                }
                NormArg::Euclidean => {
                    bail!("euclidean is an oracle norm; decompose needs a polygonal unit sphere")
                }
            }
        }
        Cmd::Trace { surface, theta, turning, start, pid, max_length, cylinder, svg } => {
            let s = load_surface(cli, surface)?;
            let turning = match turning.as_str() {
                "left" => Turning::Left,
                "right" => Turning::Right,
                other => bail!("turning must be left or right, got {other}"),
            };
            let (x, y) = start
                .split_once(',')
                .ok_or_else(|| anyhow!("start must be x,y"))?;
            let p = Vec2::new(x.trim().parse()?, y.trim().parse()?);
            let dir = Vec2::from_angle(*theta);
            let leaf = trace_leaf(
                &s,
                &LeafStart::Point { pid: *pid, p, dir },
                *theta,
                turning,
                *max_length,
            )
            .map_err(|e| anyhow!("{e}"))?;
            println!("{}", trace_to_json(&leaf, cli.seed));
            if *cylinder {
                if leaf.termination == Termination::ClosedUp && leaf.events.is_empty() {
                    match detect_cylinder(&s, &leaf).map_err(|e| anyhow!("{e}"))? {
                        Some(c) => println!(
                            "{}",
                            serde_json::json!({
                                "cylinder": {
                                    "direction": c.direction,
                                    "core_length": c.core.length,
                                    "width": c.width,
                                    "boundary_events": [
                                        c.boundary[0].events.len(),
                                        c.boundary[1].events.len(),
                                    ],
                                },
                                "seed": cli.seed,
                            })
                        ),
                        None => println!("{}", serde_json::json!({ "cylinder": null })),
                    }
                } else {
                    println!("{}", serde_json::json!({ "cylinder": null }));
                }
            }
            if let Some(out) = svg {
                let mut doc = SvgDoc::new();
                doc.add_surface(&s);
                doc.add_trace(&s, &leaf);
                std::fs::write(out, doc.render())?;
            }
            Ok(true)
        }
        Cmd::Report { suite } => run_suite(cli, suite),
    }
}

#[derive(Deserialize)]
struct Suite {
    entries: Vec<SuiteEntry>,
}

#[derive(Deserialize)]
struct SuiteEntry {
    surface: String,
    curves: Vec<String>,
    norms: Vec<String>,
    #[serde(default)]
    directions: Vec<f64>,
    #[serde(default = "default_samples")]
    samples: usize,
}

fn default_samples() -> usize {
    1000
}

fn run_suite(cli: &Cli, suite_path: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(suite_path)
        .with_context(|| format!("reading {}", suite_path.display()))?;
    let suite: Suite = serde_json::from_str(&text).context("suite document syntax")?;
    let base = std::env::var("FLATCUR_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|_| {
            suite_path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
        });
    let resolve = |p: &str| -> PathBuf {
        let path = Path::new(p);
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            base.join(path)
        }
    };
    let mut all_pass = true;
    for entry in &suite.entries {
        let s = load_surface(cli, &resolve(&entry.surface))?;
        let mut curves = Vec::new();
        for c in &entry.curves {
            let text = std::fs::read_to_string(resolve(c))?;
            curves.push(curve_from_json(&text)?);
        }
        let mut norms = Vec::new();
        for nm in &entry.norms {
            match resolve_norm(nm, s.tol.eps_len.max(1e-9))? {
                NormArg::Polygon { name, norm } => norms.push((name, norm)),
                NormArg::Euclidean => bail!("suite norms must be polygonal"),
            }
        }
        let reports =
            consistency_report(&s, &curves, &norms, &entry.directions, entry.samples)
                .map_err(|e| anyhow!("{e}"))?;
        for r in &reports {
            all_pass &= r.pass;
            if cli.format == Format::Table {
                println!(
                    "{} curve {}: cat0 {:.9}, {} norms, pass {}",
                    entry.surface,
                    r.curve,
                    r.cat0,
                    r.norms.len(),
                    r.pass
                );
                for e in &r.norms {
                    println!(
                        "    {:<14} finsler {:.12} liouville {:.12} residual {:.3e}",
                        e.name, e.finsler, e.liouville, e.residual
                    );
                }
            }
        }
        if cli.format == Format::Json {
            let json: Vec<_> = reports
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "surface": entry.surface,
                        "curve": r.curve,
                        "cat0": r.cat0,
                        "pass": r.pass,
                        "norms": r.norms.iter().map(|e| serde_json::json!({
                            "norm": e.name,
                            "residual": e.residual,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            println!("{}", serde_json::json!({ "reports": json, "seed": cli.seed }));
        }
    }
    Ok(all_pass)
}
