use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use klein_parallelisms::{self as app, CliError, Outcome, RunConfig, SearchTarget};
use klein_core::spreads::Side;

#[derive(Parser)]
#[command(name = "klein-parallelisms", version, about = "Build and check regular parallelisms of PG(3,K) through hfd line sets on the Klein quadric")]
struct Cli {
    /// Q, gfP for a prime P, or f2st for GF(2)(s,t)
    #[arg(long, global = true, default_value = "Q")]
    field: String,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    /// Print the JSON report instead of a text summary
    #[arg(long, global = true)]
    json: bool,
    /// Descriptor file for construct-hfd and verify
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// Write the descriptor (or the report, when none is built) here
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        }
    }
}

#[derive(clap::Args, Clone, Copy)]
struct AlgebraArgs {
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    b: i64,
    #[arg(long, value_enum, default_value = "left")]
    side: SideArg,
}

#[derive(Subcommand)]
enum Demo {
    /// Clifford parallelism of the quaternion algebra (a,b)
    Clifford {
        #[command(flatten)]
        algebra: AlgebraArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    ExternalPlanes,
    ZeroSecants,
    All,
}

#[derive(Subcommand)]
enum Command {
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
    /// Validate and classify a descriptor, or build one from a Clifford plane
    ConstructHfd {
        #[arg(long)]
        auto_second_plane: bool,
        #[command(flatten)]
        algebra: AlgebraArgs,
    },
    /// Sampled verification of a descriptor
    Verify {
        #[arg(long)]
        skip_validate: bool,
    },
    /// Exhaustive external-plane and 0-secant counts over gf2 or gf3
    SearchFinite {
        #[arg(long, value_enum, default_value = "all")]
        what: What,
    },
    /// Build a descriptor whose planes span a subspace of the given dimension
    SearchDimension {
        #[arg(long, default_value_t = 4)]
        target: isize,
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[command(flatten)]
        algebra: AlgebraArgs,
    },
}

fn read_input(cli: &Cli) -> Result<Option<String>, CliError> {
    cli.input
        .as_ref()
        .map(|p| fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))))
        .transpose()
}

fn algebra_params(a: &AlgebraArgs) -> BTreeMap<String, String> {
    let side = match a.side {
        SideArg::Left => "left",
        SideArg::Right => "right",
    };
    BTreeMap::from([("a".into(), a.a.to_string()), ("b".into(), a.b.to_string()), ("side".into(), side.into())])
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let (name, parameters) = match &cli.command {
        Command::Demo { which: Demo::Clifford { algebra } } => ("demo clifford", algebra_params(algebra)),
        Command::ConstructHfd { auto_second_plane, algebra } => {
            let mut p = algebra_params(algebra);
            p.insert("auto_second_plane".into(), auto_second_plane.to_string());
            ("construct-hfd", p)
        }
        Command::Verify { skip_validate } => ("verify", BTreeMap::from([("skip_validate".into(), skip_validate.to_string())])),
        Command::SearchFinite { what } => {
            let w = match what {
                What::ExternalPlanes => "external_planes",
                What::ZeroSecants => "zero_secants",
                What::All => "all",
            };
            ("search-finite", BTreeMap::from([("what".into(), w.to_string())]))
        }
        Command::SearchDimension { target, budget, algebra } => {
            let mut p = algebra_params(algebra);
            p.insert("target".into(), target.to_string());
            p.insert("budget".into(), budget.to_string());
            ("search-dimension", p)
        }
    };
    let config = RunConfig {
        command: name.into(),
        field: cli.field.clone(),
        seed: cli.seed,
        samples: cli.samples,
        output: if cli.json { "json" } else { "text" }.into(),
        input: cli.input.as_ref().map(|p| p.display().to_string()),
        out: cli.out.as_ref().map(|p| p.display().to_string()),
        generator: app::GENERATOR,
        parameters,
    };
    let text = read_input(cli)?;
    match &cli.command {
        Command::Demo { which: Demo::Clifford { algebra } } => app::demo_clifford(&config, algebra.a, algebra.b, algebra.side.into()),
        Command::ConstructHfd { auto_second_plane, algebra } => {
            app::construct_hfd(&config, text.as_deref(), *auto_second_plane, algebra.a, algebra.b, algebra.side.into())
        }
        Command::Verify { skip_validate } => {
            let text = text.ok_or_else(|| CliError::Input("verify needs --in FILE".into()))?;
            app::verify(&config, &text, *skip_validate)
        }
        Command::SearchFinite { what } => {
            let what = match what {
                What::ExternalPlanes => SearchTarget::ExternalPlanes,
                What::ZeroSecants => SearchTarget::ZeroSecants,
                What::All => SearchTarget::All,
            };
            app::search_finite(&config, what)
        }
        Command::SearchDimension { target, budget, algebra } => {
            app::search_dimension(&config, *target, *budget, algebra.a, algebra.b, algebra.side.into())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&e.to_json()).expect("error serializes"));
            } else {
                eprintln!("error: {e}");
            }
            return ExitCode::from(2);
        }
    };
    let report = &outcome.report;
    if let Some(path) = &cli.out {
        let body = match &outcome.descriptor {
            Some(d) => serde_json::to_string_pretty(d).expect("descriptor serializes") + "\n",
            None => report.to_json_string(),
        };
        if let Err(e) = fs::write(path, body) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if cli.json {
        print!("{}", report.to_json_string());
    } else {
        print!("{}", report.to_text());
    }
    ExitCode::from(report.exit_code() as u8)
}
