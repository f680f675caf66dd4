use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use shearlab::{run, Command as RunCommand, Context, DemoSelector, Format, RunConfig};

#[derive(Parser)]
#[command(
    name = "shearlab",
    version,
    about = "Construct and verify shearing in generic graphs and hypergraphs"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// Clique order of the theory (tnk, tn1, chain)
    #[arg(long, global = true)]
    n: Option<u32>,

    /// Hyperedge parameter of the index class (tnk, chain)
    #[arg(long, global = true)]
    k: Option<u32>,

    /// Column count for tn1; base-point count for eq
    #[arg(long, global = true)]
    m: Option<u32>,

    /// Number of chain steps
    #[arg(long, global = true)]
    steps: Option<usize>,

    /// Fresh-point budget; overrides SHEARLAB_BUDGET and the command default
    #[arg(long, global = true)]
    budget: Option<usize>,

    /// Search bounds L,S,N: tuple length, parameter count, model size
    #[arg(long, global = true, value_parser = parse_bounds, value_name = "L,S,N")]
    bounds: Option<(usize, usize, usize)>,

    /// Seed recorded in the report
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Input file (verify, oracle)
    #[arg(long = "in", global = true, value_name = "FILE")]
    input: Option<PathBuf>,

    /// Write the report here instead of stdout
    #[arg(long = "out", global = true, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a ready-made shearing instance and check it
    Demo {
        #[arg(value_enum)]
        kind: DemoArg,
    },
    /// Load a shearing instance from --in and re-check it
    Verify,
    /// Search the coordinate-equality fragment for a circle witness
    SearchCircle {
        #[arg(value_enum, default_value_t = ContextArg::Dense)]
        context: ContextArg,
    },
    /// Grow a chain of shearing steps over one index order and verify it
    Chain,
    /// Build an eq-extension and look for an indistinguishable pair
    Eq {
        #[arg(value_enum, default_value_t = ContextArg::Dense)]
        context: ContextArg,
    },
    /// Evaluate a diagram file against its theory
    Oracle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DemoArg {
    T32,
    Tnk,
    RgLinear,
    Tn1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ContextArg {
    Dense,
    Labelled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

fn parse_bounds(raw: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected L,S,N, got {raw:?}"));
    }
    let mut nums = [0usize; 3];
    for (slot, part) in nums.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("not a bound: {part:?}"))?;
    }
    Ok((nums[0], nums[1], nums[2]))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Demo { kind } => RunCommand::Demo(match kind {
            DemoArg::T32 => DemoSelector::T32,
            DemoArg::Tnk => DemoSelector::Tnk,
            DemoArg::RgLinear => DemoSelector::RgLinear,
            DemoArg::Tn1 => DemoSelector::Tn1,
        }),
        Cmd::Verify => RunCommand::Verify,
        Cmd::SearchCircle { context } => RunCommand::SearchCircle(context.into()),
        Cmd::Chain => RunCommand::Chain,
        Cmd::Eq { context } => RunCommand::Eq(context.into()),
        Cmd::Oracle => RunCommand::Oracle,
    };
    let config = RunConfig {
        command,
        n: args.n,
        k: args.k,
        m: args.m,
        steps: args.steps,
        budget: args.budget,
        bounds: args.bounds,
        seed: args.seed,
        input: args.input,
        output: args.output.clone(),
        format: match args.format {
            FormatArg::Json => Format::Json,
            FormatArg::Text => Format::Text,
        },
    };
    let outcome = run(&config);
    if outcome.exit == 2 {
        eprintln!("{}", outcome.report.trim_end());
        return ExitCode::from(2);
    }
    match &config.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.report) {
                eprintln!("--out {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", outcome.report),
    }
    ExitCode::from(outcome.exit)
}

impl From<ContextArg> for Context {
    fn from(value: ContextArg) -> Self {
        match value {
            ContextArg::Dense => Context::Dense,
            ContextArg::Labelled => Context::Labelled,
        }
    }
}
