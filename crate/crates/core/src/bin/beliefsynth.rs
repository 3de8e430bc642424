//! Command-line front end. Every config key is also a `--kebab-case` flag;
//! flags override values loaded with `--config`.

use std::path::PathBuf;
use std::process::ExitCode;

use beliefsynth::config::RunConfig;
use beliefsynth::io::LoadError;
use beliefsynth::ltl::Verdict;
use beliefsynth::pipeline::{cmd_abstract, cmd_baseline, cmd_simulate, cmd_synthesize, SimulateError};
use beliefsynth::runtime::RuntimeError;
use clap::{Arg, ArgMatches, Command};

const EXIT_VIOLATED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_LOSING: u8 = 3;
const EXIT_DIGEST: u8 = 4;
const EXIT_FAULT: u8 = 5;
const EXIT_UNDETERMINED: u8 = 6;

fn with_config_flags(cmd: Command) -> Command {
    let cmd = cmd.arg(Arg::new("config").long("config").value_name("FILE").value_parser(clap::value_parser!(PathBuf)));
    RunConfig::keys().into_iter().fold(cmd, |cmd, key| {
        let flag = key.replace('_', "-");
        // repeated flags: the last one wins
        cmd.arg(Arg::new(key.clone()).long(flag).value_name("VALUE").num_args(1).overrides_with(key))
    })
}

fn cli() -> Command {
    Command::new("beliefsynth")
        .about("Belief-space abstraction, synthesis and simulation for switched converters")
        .subcommand_required(true)
        .subcommand(with_config_flags(Command::new("abstract").about("Build the raw and belief abstractions")))
        .subcommand(with_config_flags(Command::new("synthesize").about("Solve the game and write the controller")))
        .subcommand(with_config_flags(
            Command::new("simulate").about("Run the closed loop and check the specification").arg(
                Arg::new("controller")
                    .long("controller")
                    .value_name("FILE")
                    .value_parser(clap::value_parser!(PathBuf)),
            ),
        ))
        .subcommand(with_config_flags(Command::new("baseline").about("Periodic open-loop design and simulation")))
}

fn load_config(m: &ArgMatches) -> beliefsynth::Result<RunConfig> {
    let base = match m.get_one::<PathBuf>("config") {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let keys = RunConfig::keys();
    let overrides: Vec<(&str, &str)> = keys
        .iter()
        .filter_map(|k| m.get_one::<String>(k).map(|v| (k.as_str(), v.as_str())))
        .collect();
    let config = base.with_overrides(overrides)?;
    config.validate()?;
    Ok(config)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, m) = matches.subcommand().expect("subcommand required");
    let config = match load_config(m) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    match name {
        "abstract" => match cmd_abstract(&config) {
            Ok(stats) => {
                println!("digest {}", stats.digest);
                println!("raw states {} ({} reachable)", stats.raw_states_total, stats.raw_states_reachable);
                println!("belief states {}", stats.belief_states);
                for s in &stats.stages {
                    println!("  {:<12} {}{}", s.name, s.states, if s.capped { " (capped)" } else { "" });
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_CONFIG, e),
        },
        "synthesize" => match cmd_synthesize(&config) {
            Ok(out) => {
                println!("digest {}", out.digest);
                println!(
                    "belief states {}, stay core {}, winning {}",
                    out.belief_states, out.core_states, out.winning_states
                );
                if out.success() {
                    println!("all initial beliefs winning");
                    ExitCode::SUCCESS
                } else {
                    println!("losing initial beliefs:");
                    for k in &out.uncovered {
                        println!("  [{}, {}] x [{}, {}] m={}", k.i_lo, k.i_hi, k.j_lo, k.j_hi, k.m);
                    }
                    ExitCode::from(EXIT_LOSING)
                }
            }
            Err(e) => fail(EXIT_CONFIG, e),
        },
        "simulate" => match cmd_simulate(&config, m.get_one::<PathBuf>("controller").map(PathBuf::as_path)) {
            Ok(out) => {
                println!("steps {}, max x2 {:.4}, belief misses {}", out.steps, out.max_x2, out.belief_misses);
                println!("trace {}", out.trace_path.display());
                println!("verdict {}", out.verdict.as_str());
                if let Some(f) = &out.fault {
                    return fail(EXIT_FAULT, f);
                }
                match out.verdict {
                    Verdict::Satisfied | Verdict::SatisfiedAtDeskScale => ExitCode::SUCCESS,
                    Verdict::Undetermined => ExitCode::from(EXIT_UNDETERMINED),
                    _ => ExitCode::from(EXIT_VIOLATED),
                }
            }
            Err(SimulateError::Load(LoadError::Io(e))) => fail(EXIT_CONFIG, e),
            Err(SimulateError::Load(e)) => fail(EXIT_DIGEST, e),
            Err(SimulateError::Refused(e @ RuntimeError::NotWinning { .. })) => fail(EXIT_LOSING, e),
            Err(e) => fail(EXIT_CONFIG, e),
        },
        "baseline" => match cmd_baseline(&config) {
            Ok(out) => match out.search.chosen {
                Some(n_off) => {
                    println!("n_on {}, n_off {}", out.search.n_on, n_off);
                    if let Some(v) = out.max_x2 {
                        println!("max x2 {v:.4}");
                    }
                    ExitCode::SUCCESS
                }
                None => {
                    println!("no stable n_off with equilibrium in the target");
                    ExitCode::from(EXIT_VIOLATED)
                }
            },
            Err(e) => fail(EXIT_CONFIG, e),
        },
        _ => unreachable!("unknown subcommand"),
    }
}
