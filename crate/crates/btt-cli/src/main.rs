//! One binary, subcommand style. Inputs are strict JSON (schemas shipped in
//! docs/), every numeric output is an exact rational string, and output
//! bytes are stable for fixed inputs and seed.
//!
//! Exit codes: 0 success, 1 parse or schema error, 2 semantic failure
//! (validation violations, points outside cells, ...), 3 splitting budget
//! exhausted with an unknown verdict.

mod dto;
mod render;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use btt_core::field::{PAdicField, ValuedField};
use btt_core::latnorm::Lattice;
use btt_core::pamap::{PAMap, SplitBudget, SplitVerdict};
use btt_core::polyhedral::CharacterVector;
use btt_core::tree::{self, CommonLine, VertexClass};

use dto::{with_loaded, CliError};

#[derive(Parser)]
#[command(
    name = "btt",
    about = "Lattices, trees, and piecewise affine maps over discretely valued fields",
    version
)]
struct Cli {
    /// Output format: json or text (dot is produced by `tree dot`)
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// Seed reserved for randomized self-checks; outputs do not depend on it
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the polyhedral complex and the gluing of the pieces
    Validate {
        /// Path to a piecewise affine map JSON file
        input: String,
    },
    /// Evaluate the map at a point of a cell, printing the additive norm
    Eval {
        input: String,
        /// Cell id containing the point
        #[arg(long)]
        cell: String,
        /// Point coordinates, comma-separated rationals like "1/2,-3"
        #[arg(long)]
        at: String,
    },
    /// Weight module at a vertex of the complex
    Lattice {
        input: String,
        /// Vertex coordinates, comma-separated rationals
        #[arg(long)]
        vertex: String,
        /// Weight: comma-separated integers of the ambient dimension
        #[arg(long = "char")]
        weight: String,
    },
    /// Boundary filtrations and direction prevaluations of the map
    GenericFiber { input: String },
    /// Decide equivariant splitting
    Split {
        input: String,
        /// Candidate-refinement depth (overrides BTT_BUDGET_DEPTH)
        #[arg(long)]
        budget_depth: Option<u32>,
    },
    /// Check whether a linear map gives a morphism between two maps
    Hom {
        input: String,
        other: String,
        /// Path to the linear map JSON file
        #[arg(long)]
        map: String,
    },
    /// Rank-2 tree operations over a p-adic backend
    Tree {
        #[command(subcommand)]
        sub: TreeCommand,
    },
}

#[derive(Args)]
struct TreeContext {
    /// Prime of the p-adic backend
    #[arg(long)]
    p: u64,
}

#[derive(Subcommand)]
enum TreeCommand {
    /// Neighbors of a lattice class
    Neighbors {
        #[command(flatten)]
        ctx: TreeContext,
        /// Lattice generators as a JSON matrix of scalar strings
        #[arg(long)]
        vertex: String,
    },
    /// Geodesic between two lattice classes
    Geodesic {
        #[command(flatten)]
        ctx: TreeContext,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Triple-collinearity check plus the common line search
    Helly {
        #[command(flatten)]
        ctx: TreeContext,
        /// JSON array of lattice generator matrices
        #[arg(long)]
        vertices: String,
    },
    /// DOT rendering of a ball around a class
    Dot {
        #[command(flatten)]
        ctx: TreeContext,
        #[arg(long)]
        radius: u32,
        /// Center class; the standard lattice when omitted
        #[arg(long)]
        center: Option<String>,
        /// Largest radius the exporter accepts
        #[arg(long, default_value_t = 8)]
        radius_cap: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(CliError::Parse(msg)) => {
            eprintln!("parse error: {}", msg);
            ExitCode::from(1)
        }
        Err(CliError::Semantic(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {}", path, e)))
}

fn parse_coords(s: &str) -> Vec<String> {
    s.split(',').map(|c| c.trim().to_string()).collect()
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Validate { input } => {
            let loaded = dto::load_pamap(&read_input(input)?)?;
            with_loaded!(&loaded, m => {
                let complex_report = m.complex().validate();
                let gluing = m
                    .validate_gluing()
                    .map_err(|e| CliError::semantic(e.to_string()))?;
                let value = render::validation_json(&complex_report, Some(&gluing));
                print!("{}", render::emit(&value, &cli.format));
                if complex_report.violations.is_empty() && gluing.ok() {
                    Ok(ExitCode::SUCCESS)
                } else {
                    Ok(ExitCode::from(2))
                }
            })
        }
        Command::Eval { input, cell, at } => {
            let loaded = dto::load_pamap(&read_input(input)?)?;
            let point = dto::parse_point(&parse_coords(at))?;
            with_loaded!(&loaded, m => {
                let norm = m
                    .eval(cell, &point)
                    .map_err(|e| CliError::semantic(e.to_string()))?;
                let value = render::norm_json(m.field(), &norm);
                print!("{}", render::emit(&value, &cli.format));
                Ok(ExitCode::SUCCESS)
            })
        }
        Command::Lattice {
            input,
            vertex,
            weight,
        } => {
            let loaded = dto::load_pamap(&read_input(input)?)?;
            let point = dto::parse_point(&parse_coords(vertex))?;
            let entries: Vec<i64> = parse_coords(weight)
                .iter()
                .map(|c| {
                    c.parse::<i64>()
                        .map_err(|_| CliError::parse(format!("bad weight entry {}", c)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut full = entries;
            full.push(0);
            let weight = CharacterVector::from_i64(&full);
            with_loaded!(&loaded, m => {
                let lattice = m
                    .vertex_lattice(&point, &weight)
                    .map_err(|e| CliError::semantic(e.to_string()))?;
                let value = render::lattice_json(m.field(), &lattice);
                print!("{}", render::emit(&value, &cli.format));
                Ok(ExitCode::SUCCESS)
            })
        }
        Command::GenericFiber { input } => {
            let loaded = dto::load_pamap(&read_input(input)?)?;
            with_loaded!(&loaded, m => {
                let lp = m
                    .linear_part()
                    .map_err(|e| CliError::semantic(e.to_string()))?;
                let value = render::linear_part_json(m.field(), &lp);
                print!("{}", render::emit(&value, &cli.format));
                Ok(ExitCode::SUCCESS)
            })
        }
        Command::Split {
            input,
            budget_depth,
        } => {
            let loaded = dto::load_pamap(&read_input(input)?)?;
            let depth = budget_depth
                .or_else(|| {
                    std::env::var("BTT_BUDGET_DEPTH")
                        .ok()
                        .and_then(|v| v.parse().ok())
                })
                .unwrap_or(SplitBudget::default().depth);
            let budget = SplitBudget { depth };
            with_loaded!(&loaded, m => {
                let verdict = m
                    .splitting_check(&budget)
                    .map_err(|e| CliError::semantic(e.to_string()))?;
                let value = render::split_verdict_json(m.field(), &verdict);
                print!("{}", render::emit(&value, &cli.format));
                Ok(match verdict {
                    SplitVerdict::Unknown { .. } => ExitCode::from(3),
                    _ => ExitCode::SUCCESS,
                })
            })
        }
        Command::Hom { input, other, map } => {
            let first = dto::load_pamap(&read_input(input)?)?;
            let second = dto::load_pamap(&read_input(other)?)?;
            let map_text = read_input(map)?;
            match (&first, &second) {
                (dto::Loaded::PAdic(a), dto::Loaded::PAdic(b)) => {
                    hom_command(a, b, &map_text, &cli.format)
                }
                (dto::Loaded::Laurent(a), dto::Loaded::Laurent(b)) => {
                    hom_command(a, b, &map_text, &cli.format)
                }
                _ => Err(CliError::semantic("maps live over different fields")),
            }
        }
        Command::Tree { sub } => tree_command(sub, &cli.format),
    }
}

fn hom_command<F: ValuedField>(
    a: &PAMap<F>,
    b: &PAMap<F>,
    map_text: &str,
    format: &str,
) -> Result<ExitCode, CliError> {
    if a.field() != b.field() {
        return Err(CliError::semantic("maps live over different fields"));
    }
    let linear = dto::load_linear_map(a.field(), map_text)?;
    let verdict = a
        .morphism_check(b, &linear)
        .map_err(|e| CliError::semantic(e.to_string()))?;
    let value = render::morphism_json(&verdict);
    print!("{}", render::emit(&value, format));
    Ok(ExitCode::SUCCESS)
}

fn tree_field(ctx: &TreeContext) -> Result<PAdicField, CliError> {
    PAdicField::new(ctx.p).map_err(|e| CliError::parse(e.to_string()))
}

fn tree_vertex(f: &PAdicField, text: &str) -> Result<VertexClass<PAdicField>, CliError> {
    let gens = dto::parse_string_matrix(f, text)?;
    let lattice = Lattice::hnf(f, &gens).map_err(|e| CliError::semantic(e.to_string()))?;
    tree::normalize(&lattice).map_err(|e| CliError::semantic(e.to_string()))
}

fn tree_command(sub: &TreeCommand, format: &str) -> Result<ExitCode, CliError> {
    match sub {
        TreeCommand::Neighbors { ctx, vertex } => {
            let f = tree_field(ctx)?;
            let v = tree_vertex(&f, vertex)?;
            let nbrs = tree::neighbors(&v).map_err(|e| CliError::semantic(e.to_string()))?;
            let value = json!({
                "neighbors": nbrs
                    .iter()
                    .map(|n| render::vertex_class_json(&f, n))
                    .collect::<Vec<_>>(),
            });
            print!("{}", render::emit(&value, format));
            Ok(ExitCode::SUCCESS)
        }
        TreeCommand::Geodesic { ctx, from, to } => {
            let f = tree_field(ctx)?;
            let u = tree_vertex(&f, from)?;
            let v = tree_vertex(&f, to)?;
            let path = tree::geodesic(&u, &v).map_err(|e| CliError::semantic(e.to_string()))?;
            let value = render::tree_path_json(&f, &path);
            print!("{}", render::emit(&value, format));
            Ok(ExitCode::SUCCESS)
        }
        TreeCommand::Helly { ctx, vertices } => {
            let f = tree_field(ctx)?;
            let rows: Vec<Vec<Vec<String>>> =
                serde_json::from_str(vertices).map_err(|e| CliError::parse(e.to_string()))?;
            let classes = rows
                .iter()
                .map(|m| tree_vertex(&f, &serde_json::to_string(m).expect("serializable")))
                .collect::<Result<Vec<_>, _>>()?;
            let helly =
                tree::helly_triples(&classes).map_err(|e| CliError::semantic(e.to_string()))?;
            let line =
                tree::common_line(&classes, &[]).map_err(|e| CliError::semantic(e.to_string()))?;
            let line_json = match &line {
                CommonLine::Frame(frame) => json!({ "frame": render::matrix_json(&f, frame) }),
                CommonLine::None(cert) => json!({ "certificate": format!("{:?}", cert) }),
            };
            let value = json!({
                "helly": helly,
                "common_line": line_json,
            });
            print!("{}", render::emit(&value, format));
            Ok(ExitCode::SUCCESS)
        }
        TreeCommand::Dot {
            ctx,
            radius,
            center,
            radius_cap,
        } => {
            let f = tree_field(ctx)?;
            let center = match center {
                Some(text) => tree_vertex(&f, text)?,
                None => tree::normalize(&Lattice::standard(&f, 2))
                    .map_err(|e| CliError::semantic(e.to_string()))?,
            };
            let dot = tree::export_dot(&center, *radius, *radius_cap)
                .map_err(|e| CliError::semantic(e.to_string()))?;
            print!("{}", dot);
            Ok(ExitCode::SUCCESS)
        }
    }
}
