mod commands;
mod config;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Arg, ArgMatches, Command};

use config::{Config, ConfigError, KEYS};

const COLUMNS: &str = "\
CSV columns (every row ends with the seed):
  coeff        n,lambda,divisors,bound,ratio
  kloosterman  m,n,c,value,weil_ratio
  delta        n,C,value,target,abs_err
  voronoi      a,c,X,lhs_re,lhs_im,rhs_re,rhs_im,abs_err,rel_err,dual_terms
  bounds       lemma,param,measured,bound,ratio
  scan         alpha,beta,X,abs,ell,q,branch,small_q_bound,large_q_bound,branch_ratio,ratio
               (sum=linear: alpha,X,abs,ratio)
  pipeline     X,A,bound,ratio,eta,t1,t_top,windows,theta
  all          command,key,value

JSON reports carry schema 1, the seed, the resolved config, rows, summary,
warnings and failures.

Exit status: 0 ok, 1 invariant violated, 2 config error, 3 budget exceeded.";

fn cli() -> Command {
    let run = Command::new("run")
        .bin_name("cusp-sum run")
        .about("Run one verification suite and write its report")
        .after_help(COLUMNS)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("flat key=value file; flags override its entries"),
        )
        .args(
            KEYS.iter()
                .map(|(key, help)| Arg::new(*key).long(*key).value_name("VALUE").help(*help)),
        );
    Command::new("cusp-sum")
        .about("Numerical checks for exponential sums of cusp-form coefficients")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(run)
}

enum Outcome {
    Ok,
    Invariant,
}

fn resolve(m: &ArgMatches) -> Result<Config> {
    let mut cfg = match m.get_one::<PathBuf>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    for (key, _) in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v);
        }
    }
    Ok(cfg)
}

fn threads(cfg: &Config) -> Result<usize> {
    if cfg.raw("threads").is_some() {
        return Ok(cfg.get("threads", 0)?);
    }
    match std::env::var("CUSP_SUM_THREADS") {
        Ok(v) => Ok(v
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("CUSP_SUM_THREADS: cannot parse '{v}'")))?),
        Err(_) => Ok(0),
    }
}

fn execute(cfg: &Config) -> Result<Outcome> {
    let command = cfg.raw("command").unwrap_or_default().to_string();
    let seed: u64 = cfg.get("seed", 0)?;
    let default_format = if matches!(command.as_str(), "pipeline" | "all") {
        "json"
    } else {
        "csv"
    };
    let format = cfg.choice("format", &["csv", "json"], default_format)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads(cfg)?)
        .build_global()
        .context("starting the worker pool")?;

    let report = commands::run(&command, cfg, seed)?;

    let out = cfg.raw("out").unwrap_or("-");
    let mut sink: Box<dyn Write> = if out == "-" {
        Box::new(io::stdout().lock())
    } else {
        Box::new(BufWriter::new(
            File::create(out).with_context(|| format!("creating {out}"))?,
        ))
    };
    match format {
        "json" => report::write_json(&report, seed, cfg, &mut sink)?,
        _ => report::write_csv(&report, seed, &mut sink)?,
    }
    sink.flush()?;

    for (k, v) in &report.summary {
        eprintln!("{command}: {k} = {}", report::cell(v));
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for f in &report.failures {
        eprintln!("FAILED: {f}");
    }
    Ok(if report.failures.is_empty() {
        Outcome::Ok
    } else {
        Outcome::Invariant
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<cusp_sum::Error>() {
        Some(cusp_sum::Error::Budget(_) | cusp_sum::Error::Capacity { .. }) => 3,
        Some(cusp_sum::Error::InvalidInput(_) | cusp_sum::Error::Io { .. } | cusp_sum::Error::Malformed { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let Some(("run", m)) = matches.subcommand() else {
        unreachable!("subcommand is required");
    };
    let cfg = match resolve(m) {
        Ok(c) if c.raw("command").is_some() => c,
        Ok(_) => {
            eprintln!("no command given\n");
            eprintln!("{}", cli().find_subcommand_mut("run").expect("run").render_help());
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    match execute(&cfg) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Invariant) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
