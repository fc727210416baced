mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use shapeinv_core::catalog::{self, energy_at, load_user_catalog, validate_conventional, Catalog};
use shapeinv_core::expr::DomainSampler;
use shapeinv_core::extension::{extend_morse, scarf_report, ExtensionParams};
use shapeinv_core::spectral::{spectrum, BoxOptions, SpectrumOptions, DEFAULT_INSET, DEFAULT_POINTS};
use shapeinv_core::susy::si_residual_sampled;
use shapeinv_core::transnet::{self, EdgeView, TransnetError};
use shapeinv_core::{Bindings, CatalogError, Error, ExtensionError};

#[derive(Parser, Debug)]
#[command(name = "shapeinv", version, about = "Verify and relate additive shape-invariant superpotentials")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    /// Seed for every randomized sampler.
    #[arg(long, default_value_t = 1, global = true)]
    seed: u64,
    /// Extra catalog entries (JSON array) merged with the built-in ones.
    #[arg(long, global = true, value_name = "FILE")]
    catalog: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Browse the catalog.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Shape-invariance residual over random samples.
    CheckSi {
        /// Catalog id
        id: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Residuals of the two classifying PDEs and the a-linearity check.
    CheckPde {
        /// Catalog id
        id: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Analytic spectrum, optionally compared with the eigensolver.
    Spectrum {
        /// Catalog id
        id: String,
        /// Number of levels.
        #[arg(long = "n", default_value_t = 4)]
        n: usize,
        #[command(flatten)]
        params: ParamArgs,
        /// Also solve numerically and compare.
        #[arg(long)]
        numeric: bool,
        /// Fixed box as LO,HI (default: chosen from the ground state).
        #[arg(long, value_parser = parse_interval)]
        grid: Option<(f64, f64)>,
        /// Grid points including both ends.
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        /// Inset from a singular endpoint.
        #[arg(long, default_value_t = DEFAULT_INSET)]
        eps: f64,
        /// Largest accepted |numeric - analytic|
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Build the hbar-series extension of Morse and check it.
    ExtendMorse {
        #[command(flatten)]
        ext: ExtArgs,
        #[arg(long, default_value_t = 12)]
        orders: usize,
    },
    /// Map the summed Morse extension onto Scarf II.
    MapToScarf {
        #[command(flatten)]
        ext: ExtArgs,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Run a projection along a limit sequence.
    Project {
        /// Edge id, e.g. P_4c or T_ab
        edge: String,
        /// Limit sequence, e.g. 0.1,0.05,0.025.
        #[arg(long, value_delimiter = ',')]
        seq: Option<Vec<f64>>,
        /// Target parameters (default: catalog defaults).
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Check that a PCT edge produces the target potential plus a constant.
    VerifyPct {
        /// Edge id, e.g. P_4c or T_ab
        edge: String,
        /// Source energy.
        #[arg(long = "E", default_value_t = 0.0, allow_negative_numbers = true)]
        e: f64,
        /// Source parameters (default: catalog defaults).
        #[command(flatten)]
        params: ParamArgs,
        /// Target parameters, for edges without a shipped correspondence.
        #[arg(long, value_parser = parse_params)]
        target_params: Option<Bindings>,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Shortest chain of transformations between two entries.
    Path {
        /// Source catalog id
        src: String,
        /// Target catalog id
        dst: String,
    },
    /// The transformation graph (DOT in table mode).
    Graph,
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    List,
    Show { id: String },
}

#[derive(Args, Debug)]
struct ParamArgs {
    /// Parameters as NAME=VALUE,NAME=VALUE.
    #[arg(long, value_parser = parse_params)]
    params: Option<Bindings>,
}

#[derive(Args, Debug)]
struct ExtArgs {
    #[arg(long = "P", default_value_t = 1.0, allow_negative_numbers = true)]
    p: f64,
    #[arg(long = "Q", default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    a: f64,
}

fn parse_params(text: &str) -> Result<Bindings, String> {
    let mut b = Bindings::real();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{item}`"))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
        b.set(k.trim(), v);
    }
    Ok(b)
}

fn parse_interval(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("`{lo}` is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("`{hi}` is not a number"))?;
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("empty interval {lo},{hi}"))
    }
}

/// Why a command did not succeed.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let usage = match &e {
            Error::Catalog(c) => is_usage_catalog(c),
            Error::Transnet(t) => match t {
                TransnetError::Catalog(c) => is_usage_catalog(c),
                TransnetError::UnknownEdge { .. }
                | TransnetError::UnknownNode { .. }
                | TransnetError::WrongKind { .. }
                | TransnetError::NoCorrespondence(_)
                | TransnetError::HbarNotOne(_)
                | TransnetError::Correspondence(_)
                | TransnetError::BadSequence => true,
                _ => false,
            },
            Error::Extension(x) => matches!(
                x,
                ExtensionError::QNotPositive(_)
                    | ExtensionError::HbarNotPositive(_)
                    | ExtensionError::ANotNegative(_)
                    | ExtensionError::ZeroOrder
            ),
            Error::Spectral(shapeinv_core::SpectralError::Catalog(c)) => is_usage_catalog(c),
            Error::Spectral(shapeinv_core::SpectralError::TooManyLevels { .. }) => true,
            Error::Grid(_) => true,
            _ => false,
        };
        if usage {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn is_usage_catalog(c: &CatalogError) -> bool {
    matches!(
        c,
        CatalogError::UnknownId { .. }
            | CatalogError::ConstraintViolated { .. }
            | CatalogError::MissingParam { .. }
            | CatalogError::NotConventional { .. }
            | CatalogError::DuplicateId(_)
            | CatalogError::File(_)
    )
}

fn fail<E: Into<Error>>(e: E) -> Failure {
    Failure::from(e.into())
}

/// A rendered report and whether its verification passed.
struct Output {
    json: serde_json::Value,
    table: String,
    pass: bool,
}

fn output<T: Serialize>(report: &T, table: String, pass: bool) -> Result<Output, Failure> {
    let json = shapeinv_core::report::to_json(report).map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(Output { json, table, pass })
}

fn generic<T: Serialize>(report: &T, pass: bool) -> Result<Output, Failure> {
    let json = shapeinv_core::report::to_json(report).map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(Output { table: render::key_values(&json), json, pass })
}

fn with_defaults(s: &catalog::Superpotential, given: &Option<Bindings>) -> Bindings {
    match given {
        Some(b) => b.clone(),
        None => s.default_bindings(),
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let cat = match &cli.catalog {
        Some(path) => Catalog::with_extra(load_user_catalog(path).map_err(fail)?).map_err(fail)?,
        None => Catalog::builtin().clone(),
    };
    let entry = |id: &str| cat.get(id).map_err(fail);
    match &cli.command {
        Command::Catalog(CatalogCmd::List) => {
            #[derive(Serialize)]
            struct Row<'a> {
                id: &'a str,
                name: &'a str,
                class: catalog::Class,
                #[serde(rename = "W")]
                w: String,
            }
            let rows: Vec<Row> =
                cat.iter().map(|s| Row { id: &s.id, name: &s.name, class: s.class, w: s.w.to_string() }).collect();
            let table = render::table(
                &["id", "class", "name", "W"],
                rows.iter().map(|r| vec![r.id.to_string(), render::class(r.class), r.name.to_string(), r.w.clone()]),
            );
            output(&rows, table, true)
        }
        Command::Catalog(CatalogCmd::Show { id }) => generic(entry(id)?, true),
        Command::CheckSi { id, params, samples } => {
            let s = entry(id)?;
            let sampler = match &params.params {
                Some(p) => {
                    let full = s.complete_bindings(p).map_err(fail)?;
                    s.check_constraints(&full).map_err(fail)?;
                    let (lo, hi) = s.domain.sample_range();
                    DomainSampler::new(cli.seed).range(&s.variable, lo, hi).with_bindings(&full)
                }
                None => s.sampler(cli.seed),
            };
            let r = si_residual_sampled(s, &sampler.samples(*samples)).map_err(fail)?;
            generic(&r, r.pass)
        }
        Command::CheckPde { id, samples } => {
            let s = entry(id)?;
            let r = validate_conventional(s, &s.sampler(cli.seed).samples(*samples)).map_err(fail)?;
            generic(&r, r.pass)
        }
        Command::Spectrum { id, n, params, numeric, grid, points, eps, tol } => {
            let s = entry(id)?;
            let p = with_defaults(s, &params.params);
            if *numeric {
                let opts =
                    SpectrumOptions { grid: BoxOptions { n: *points, eps: *eps }, interval: *grid, tolerance: *tol };
                let r = spectrum(s, &p, *n, &opts).map_err(fail)?;
                let table = render::spectrum(&r);
                output(&r, table, r.pass)
            } else {
                #[derive(Serialize)]
                struct Analytic {
                    entry: String,
                    params: std::collections::BTreeMap<String, f64>,
                    energies: Vec<Option<f64>>,
                }
                let full = s.complete_bindings(&p).map_err(fail)?;
                s.check_constraints(&full).map_err(fail)?;
                let mut energies = Vec::with_capacity(*n);
                for k in 0..*n as u32 {
                    let bound = s.level_is_bound(k, &full).map_err(fail)?;
                    energies.push(if bound { Some(energy_at(s, k, &full).map_err(fail)?) } else { None });
                }
                let r = Analytic { entry: s.id.clone(), params: full.to_real_map(), energies };
                generic(&r, true)
            }
        }
        Command::ExtendMorse { ext, orders } => {
            let p = ExtensionParams::new(ext.p, ext.q, ext.hbar, ext.a).map_err(fail)?;
            let r = extend_morse(&p, *orders, cli.seed).map_err(fail)?;
            generic(&r, r.pass)
        }
        Command::MapToScarf { ext, samples } => {
            let p = ExtensionParams::new(ext.p, ext.q, ext.hbar, ext.a).map_err(fail)?;
            let r = scarf_report(&p, *samples, cli.seed).map_err(fail)?;
            generic(&r, r.pass)
        }
        Command::Project { edge, seq, params } => {
            let r = transnet::verify_projection(edge, seq.as_deref(), params.params.as_ref()).map_err(fail)?;
            let table = render::projection(&r);
            output(&r, table, r.pass)
        }
        Command::VerifyPct { edge, e, params, target_params, samples } => {
            let g = transnet::graph();
            let src = &g.edge(edge).map_err(fail)?.source;
            let p = with_defaults(entry(src)?, &params.params);
            let r = transnet::verify_pct_edge(edge, &p, target_params.as_ref(), *e, *samples).map_err(fail)?;
            generic(&r, r.pass)
        }
        Command::Path { src, dst } => {
            let steps = transnet::find_path(src, dst).map_err(fail)?;
            let table = if steps.is_empty() {
                "(empty path)\n".to_string()
            } else {
                steps.iter().map(|s| s.edge.as_str()).collect::<Vec<_>>().join(" ") + "\n"
            };
            output(&steps, table, true)
        }
        Command::Graph => {
            let g = transnet::graph();
            #[derive(Serialize)]
            struct GraphView {
                nodes: Vec<String>,
                edges: Vec<EdgeView>,
            }
            let view = GraphView { nodes: g.nodes().to_vec(), edges: g.edges().iter().map(EdgeView::from).collect() };
            output(&view, g.to_dot(), true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).unwrap_or_default()),
                Format::Table => {
                    print!("{}", out.table);
                    if !out.pass {
                        println!("FAIL");
                    }
                }
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
