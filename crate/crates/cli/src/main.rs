use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use z2n_cli::commands::{self, Flags, Outcome};
use z2n_cli::manifest;

/// Checker and builder for Z2^n-graded atlases, group laws, and bundles.
///
/// Manifests are JSON files describing charts, overlaps with transition
/// expressions, group laws, bundle cocycles, vector bundles, actions, and
/// sections; see the shipped schema and fixtures. Exit codes: 0 all checks
/// passed, 1 a check failed, 2 usage or input error.
#[derive(Parser)]
#[command(name = "z2n", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Truncation order override (default: manifest value, else 6).
    #[arg(long, global = true)]
    truncation: Option<usize>,

    /// Seed for sampled comparisons and randomized probes.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Sample points per box for numeric comparisons.
    #[arg(long, global = true, default_value_t = 8)]
    samples: usize,

    /// Absolute/relative tolerance for numeric comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,

    /// Emit a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify the atlas gluing: pair and triple cocycle identities plus
    /// sampled range checks on every declared overlap.
    CheckAtlas { manifest: PathBuf },
    /// Verify bundle cocycles: group-valued transitions and/or vector
    /// bundle matrices, including the reduced degree-0 cocycle.
    CheckCocycle { manifest: PathBuf },
    /// Verify the group law axioms (associativity, unit, inverse) on
    /// generic points at the working truncation.
    CheckGroup { manifest: PathBuf },
    /// Verify the action axioms (unit, compatibility) and probe freeness.
    CheckAction { manifest: PathBuf },
    /// Build the total space of the principal bundle (or, with
    /// --associated, of the associated bundle) and emit its atlas.
    Glue {
        manifest: PathBuf,
        /// Glue the associated bundle for the manifest's action.
        #[arg(long)]
        associated: bool,
        /// Write the emitted manifest here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the tangent bundle: total-space atlas (default) or its
    /// vector-bundle presentation (--vector).
    BuildTangent {
        manifest: PathBuf,
        /// Emit the Jacobian matrix cocycle over the base atlas instead of
        /// the total-space atlas.
        #[arg(long)]
        vector: bool,
        /// Write the emitted manifest here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the frame bundle of the manifest's vector bundle and emit it
    /// as a GL-principal bundle manifest.
    BuildFrame {
        manifest: PathBuf,
        /// Write the emitted manifest here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the manifest's sections against the bundle cocycle; a
    /// compatible family certifies the bundle trivial.
    Trivialize { manifest: PathBuf },
    /// Parse and normalize an expression over a chart.
    Eval {
        expr: String,
        /// Chart supplying the coordinates.
        #[arg(long)]
        chart: String,
        /// Manifest defining the chart.
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Report the Euler weight of an expression and whether it is linear.
    Weight {
        expr: String,
        /// Chart supplying the coordinates.
        #[arg(long)]
        chart: String,
        /// Manifest defining the chart.
        #[arg(long)]
        manifest: PathBuf,
    },
}

impl Cmd {
    fn manifest_path(&self) -> &PathBuf {
        match self {
            Cmd::CheckAtlas { manifest }
            | Cmd::CheckCocycle { manifest }
            | Cmd::CheckGroup { manifest }
            | Cmd::CheckAction { manifest }
            | Cmd::Glue { manifest, .. }
            | Cmd::BuildTangent { manifest, .. }
            | Cmd::BuildFrame { manifest, .. }
            | Cmd::Trivialize { manifest }
            | Cmd::Eval { manifest, .. }
            | Cmd::Weight { manifest, .. } => manifest,
        }
    }
}

fn run(cli: &Cli) -> z2n_core::Result<Outcome> {
    let flags = Flags {
        seed: cli.seed,
        samples: cli.samples,
        tolerance: cli.tolerance,
    };
    let model = manifest::load_file(cli.cmd.manifest_path(), cli.truncation)?;
    match &cli.cmd {
        Cmd::CheckAtlas { .. } => commands::check_atlas(&model, &flags),
        Cmd::CheckCocycle { .. } => commands::check_cocycle(&model, &flags),
        Cmd::CheckGroup { .. } => commands::check_group(&model, &flags),
        Cmd::CheckAction { .. } => commands::check_action(&model, &flags),
        Cmd::Glue { associated, out, .. } => {
            commands::glue(&model, *associated, out.as_deref(), &flags)
        }
        Cmd::BuildTangent { vector, out, .. } => {
            commands::build_tangent(&model, *vector, out.as_deref(), &flags)
        }
        Cmd::BuildFrame { out, .. } => commands::build_frame(&model, out.as_deref(), &flags),
        Cmd::Trivialize { .. } => commands::trivialize(&model, &flags),
        Cmd::Eval { expr, chart, .. } => commands::eval(&model, expr, chart),
        Cmd::Weight { expr, chart, .. } => commands::weight(&model, expr, chart, &flags),
    }
}

/// Write to stdout, tolerating a closed pipe (e.g. `z2n ... | head`).
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if cli.json {
                let text =
                    serde_json::to_string_pretty(&outcome.json).expect("outcome serializes");
                emit(&text);
                emit("\n");
            } else {
                emit(&outcome.human);
            }
            ExitCode::from(u8::try_from(outcome.exit).unwrap_or(1))
        }
        Err(e) => {
            if cli.json {
                let text = serde_json::json!({ "command": "error", "error": e.to_string() });
                emit(&text.to_string());
                emit("\n");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(2)
        }
    }
}
