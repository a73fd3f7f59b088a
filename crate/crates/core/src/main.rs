use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use associate_id::analysis::{evpi, fix_below_threshold, tornado};
use associate_id::associate::{consult_deltas, CONSULT};
use associate_id::eval::{joint_size, DEFAULT_JOINT_CAP};
use associate_id::io::render::{render_policy, render_tornado_ascii};
use associate_id::io::{self, TornadoDocument};
use associate_id::mrma::{self, DEVIATION, FIELD_WIDTH};
use associate_id::{
    simulate, solve_with, validate, Assignment, Error, InfluenceDiagram, Result, SolveOptions,
};

const CAP_ENV: &str = "ASSOCIATE_ID_JOINT_CAP";
const DEMO_RUNS: u64 = 200_000;
const DEMO_SEED: u64 = 20_261_019;

#[derive(Parser)]
#[command(
    name = "associate-id",
    version,
    about = "Influence diagram solver and analysis tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Render {
    Ascii,
    Data,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model and print the validation report.
    Validate { model: PathBuf },
    /// Print the maximum expected utility and optimal policy.
    Solve {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Deterministic sensitivity of utility to each chance variable.
    Tornado {
        model: PathBuf,
        /// Decision settings, e.g. `D1=a,D2=b`.
        #[arg(long, default_value = "")]
        decisions: String,
        #[arg(long, value_enum, default_value = "ascii")]
        render: Render,
    },
    /// Replace low-sensitivity variables by their base case.
    Fix {
        model: PathBuf,
        #[arg(long)]
        threshold: f64,
        #[arg(long, default_value = "")]
        decisions: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Value of observing `var` before `decision`.
    Evpi {
        model: PathBuf,
        #[arg(long)]
        var: String,
        #[arg(long)]
        decision: String,
    },
    /// Monte Carlo estimate of a policy's expected utility.
    Simulate {
        model: PathBuf,
        /// Policy file; the optimal policy when omitted.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rover path-deviation scenario.
    Mrma {
        #[command(subcommand)]
        command: MrmaCommand,
    },
}

#[derive(Subcommand)]
enum MrmaCommand {
    /// Write the scenario model.
    Emit {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build, solve and analyse the scenario, printing a combined report.
    Demo {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn options() -> Result<SolveOptions> {
    let joint_cap =
        match std::env::var(CAP_ENV) {
            Ok(v) => v.parse::<f64>().ok().filter(|c| *c > 0.0).ok_or_else(|| {
                Error::Parse(format!("{CAP_ENV}: `{v}` is not a positive number"))
            })?,
            Err(_) => DEFAULT_JOINT_CAP,
        };
    Ok(SolveOptions { joint_cap })
}

fn check_cap(diagram: &InfluenceDiagram, options: &SolveOptions) -> Result<()> {
    let size = joint_size(diagram)?;
    if size > options.joint_cap {
        return Err(Error::JointTooLarge {
            size,
            cap: options.joint_cap,
        });
    }
    Ok(())
}

fn load_config(path: &Option<PathBuf>) -> Result<mrma::ScenarioConfig> {
    match path {
        Some(p) => io::load_config(p),
        None => Ok(mrma::reference_config()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let opts = options()?;
    match cli.command {
        Command::Validate { model } => {
            let text = io::read_text(&model)?;
            let doc: io::ModelDocument =
                serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            if doc.format_version != io::FORMAT_VERSION {
                return Err(Error::Parse(format!(
                    "unsupported format_version {}",
                    doc.format_version
                )));
            }
            let report = validate(&doc.into_diagram()?);
            if report.is_ok() {
                println!("{report}");
                Ok(())
            } else {
                Err(Error::Invalid(report))
            }
        }
        Command::Solve { model, output } => {
            let diagram = io::load_model(&model)?;
            check_cap(&diagram, &opts)?;
            let solution = solve_with(&diagram, &opts)?;
            print!("{}", render_policy(&diagram, &solution.policy));
            if let Some(path) = output {
                io::save_policy(&diagram, &solution.policy, path)?;
            }
            Ok(())
        }
        Command::Tornado {
            model,
            decisions,
            render,
        } => {
            let diagram = io::load_model(&model)?;
            let decisions = io::parse_decision_list(&diagram, &decisions)?;
            let report = tornado(&diagram, &decisions)?;
            match render {
                Render::Ascii => print!("{}", render_tornado_ascii(&report)),
                Render::Data => print!(
                    "{}",
                    io::to_canonical_string(&TornadoDocument::from_report(&diagram, &report))
                ),
            }
            Ok(())
        }
        Command::Fix {
            model,
            threshold,
            decisions,
            output,
        } => {
            let diagram = io::load_model(&model)?;
            check_cap(&diagram, &opts)?;
            let decisions = io::parse_decision_list(&diagram, &decisions)?;
            let reduction = fix_below_threshold(&diagram, threshold, &decisions)?;
            let full = solve_with(&diagram, &opts)?;
            let reduced = solve_with(&reduction.diagram, &opts)?;
            io::save_model(&reduction.diagram, &output)?;
            if reduction.fixed.is_empty() {
                println!("fixed: (none)");
            } else {
                println!("fixed: {}", reduction.fixed.join(", "));
            }
            println!("joint size: {} -> {}", full.joint_size, reduced.joint_size);
            println!("MEU: {} -> {}", full.policy.meu, reduced.policy.meu);
            println!("MEU delta: {}", reduced.policy.meu - full.policy.meu);
            Ok(())
        }
        Command::Evpi {
            model,
            var,
            decision,
        } => {
            let diagram = io::load_model(&model)?;
            check_cap(&diagram, &opts)?;
            println!("{}", evpi(&diagram, &var, &decision)?);
            Ok(())
        }
        Command::Simulate {
            model,
            policy,
            runs,
            seed,
        } => {
            let diagram = io::load_model(&model)?;
            check_cap(&diagram, &opts)?;
            let policy = match policy {
                Some(p) => io::load_policy(&diagram, p)?,
                None => solve_with(&diagram, &opts)?.policy,
            };
            let exact = associate_id::expected_utility(&diagram, &policy)?;
            let report = simulate(&diagram, &policy, runs, seed)?;
            println!("runs: {}", report.runs);
            println!("seed: {}", report.seed);
            println!("mean: {}", report.mean_utility);
            println!("std_error: {}", report.std_error);
            println!("expected utility: {exact}");
            Ok(())
        }
        Command::Mrma { command } => match command {
            MrmaCommand::Emit { config, output } => {
                let diagram = mrma::build_mrma_diagram(&load_config(&config)?)?;
                io::save_model(&diagram, output)
            }
            MrmaCommand::Demo { config } => demo(&load_config(&config)?, &opts),
        },
    }
}

fn demo(config: &mrma::ScenarioConfig, opts: &SolveOptions) -> Result<()> {
    let start = Instant::now();
    let emitted = io::model_to_string(&mrma::build_mrma_diagram(config)?);
    let diagram = io::model_from_str(&emitted)?;
    println!("== model");
    println!(
        "{} nodes, {} bytes emitted, {}",
        diagram.nodes().len(),
        emitted.len(),
        validate(&diagram)
    );

    check_cap(&diagram, opts)?;
    let solution = solve_with(&diagram, opts)?;
    println!();
    println!("== policy");
    print!("{}", render_policy(&diagram, &solution.policy));

    println!();
    println!("== consultation");
    let deltas = consult_deltas(&diagram)?;
    for d in &deltas {
        let when: Vec<String> = d.info.iter().map(|(v, s)| format!("{v}={s}")).collect();
        match d.delta {
            Some(delta) => println!(
                "  {}  p={:.4}  EU(yes)-EU(no)={:.1} s  -> {}",
                when.join(" "),
                d.probability,
                delta,
                if delta > 0.0 { "consult" } else { "act alone" }
            ),
            None => println!("  {}  unreachable", when.join(" ")),
        }
    }
    let rule = solution.policy.rule(CONSULT).expect("scenario has Consult");
    let distinct: std::collections::BTreeSet<_> = rule
        .choices
        .iter()
        .zip(&rule.reachable)
        .filter(|(_, &r)| r)
        .map(|(c, _)| c)
        .collect();
    println!(
        "consult policy: {}",
        if distinct.len() > 1 {
            "mixed (autonomous and consulting)"
        } else {
            "constant"
        }
    );

    println!();
    println!("== tornado at Consult=no, Deviation=0");
    let decisions = Assignment::new().with(CONSULT, 0).with(DEVIATION, 0);
    let report = tornado(&diagram, &decisions)?;
    print!("{}", render_tornado_ascii(&report));

    println!();
    println!("== value of information");
    println!(
        "evpi({FIELD_WIDTH} -> {DEVIATION}) = {}",
        evpi(&diagram, FIELD_WIDTH, DEVIATION)?
    );

    println!();
    println!("== simulation");
    let sim = simulate(&diagram, &solution.policy, DEMO_RUNS, DEMO_SEED)?;
    println!(
        "runs {} seed {}: mean {} std_error {} (MEU {})",
        sim.runs, sim.seed, sim.mean_utility, sim.std_error, solution.policy.meu
    );
    println!();
    println!("elapsed: {:.2} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            if let Error::Invalid(report) = &e {
                eprintln!("{report}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
