mod build;
mod config;
mod eigen;
mod identities;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dynrefl::models::{Eigenfunction, ExponentMode, Parity};
use rayon::prelude::*;

use config::{Campaign, Config, Item, ItemSpec};
use output::{Record, Summary};

const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "dynrefl", version, about = "Exact verification of dynamical reflection algebras")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification campaign.
    Verify(VerifyArgs),
    /// Build a matrix or operator and print it as JSON.
    Build {
        #[arg(value_enum)]
        what: build::What,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Sites of the monodromy matrix.
        #[arg(long, default_value_t = 2)]
        sites: usize,
        /// Spaces of the dressing matrices.
        #[arg(long, default_value_t = 2)]
        spaces: usize,
        #[arg(long, value_enum, default_value_t = build::SideArg::Left)]
        side: build::SideArg,
        #[arg(long, value_enum, default_value_t = build::GammaArg::Diagonal)]
        gamma: build::GammaArg,
        /// Skip premise checks.
        #[arg(long)]
        lax: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the relative Hamiltonian on a zero mode.
    Eigen {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, value_enum, default_value_t = ParityArg::Cos)]
        parity: ParityArg,
        #[arg(long, default_value_t = 1.0)]
        m1: f64,
        #[arg(long, default_value_t = 1.0)]
        m2: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ExponentArg::Derived)]
        exponent: ExponentArg,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// CSV destination; the summary goes to stdout. Without it the CSV goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate campaign summaries into one markdown report.
    Report {
        /// Campaign output directories or summary.json files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// TOML campaign file; replaces the item flags below.
    #[arg(long, conflicts_with_all = ["suite", "identity"])]
    config: Option<PathBuf>,
    #[arg(long)]
    suite: Option<String>,
    /// Identity name, repeatable.
    #[arg(long)]
    identity: Vec<String>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    trials: u32,
    #[arg(long, default_value = "new")]
    sig: String,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lax: bool,
    /// List identity names and exit.
    #[arg(long)]
    list: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Sin,
    Cos,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExponentArg {
    Derived,
    Printed,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(USAGE)
}

fn campaign_from_flags(a: &VerifyArgs) -> Result<Campaign, config::ConfigError> {
    let mut specs = Vec::new();
    let base = ItemSpec {
        identity: None,
        suite: None,
        n: a.n,
        mode: a.mode.clone(),
        seed: a.seed,
        trials: a.trials,
        sig: a.sig.clone(),
    };
    if let Some(s) = &a.suite {
        specs.push(ItemSpec { suite: Some(s.clone()), ..base.clone() });
    }
    for id in &a.identity {
        specs.push(ItemSpec { identity: Some(id.clone()), ..base.clone() });
    }
    if specs.is_empty() {
        specs.push(ItemSpec { suite: Some("paper".into()), ..base });
    }
    let name = a.suite.clone().unwrap_or_else(|| "campaign".into());
    Config { campaign: config::CampaignSection { name, threads: a.threads, output: a.out.clone(), strict: !a.lax }, items: specs }.resolve()
}

fn warn_growth(items: &[Item]) {
    let heavy = items.iter().filter(|i| identities::is_heavy(&i.identity));
    let worst = heavy
        .filter(|i| i.n >= 5 || (i.n >= 4 && i.mode == dynrefl::exactfield::CheckMode::Exact))
        .max_by_key(|i| i.n);
    if let Some(i) = worst {
        let how = if i.mode == dynrefl::exactfield::CheckMode::Exact { "exact" } else { "random" };
        eprintln!(
            "warning: three-leg checks grow as n^6 entries; {} at n = {} in {how} mode may take a long time",
            i.identity, i.n
        );
    }
}

fn run_verify(a: VerifyArgs) -> ExitCode {
    if a.list {
        for id in identities::IDENTITIES {
            println!("{id}");
        }
        return ExitCode::from(PASS);
    }
    let campaign = match &a.config {
        Some(path) => Config::load(path).and_then(|c| c.resolve()).map(|mut c| {
            if a.threads.is_some() {
                c.threads = a.threads;
            }
            if a.out.is_some() {
                c.output = a.out.clone();
            }
            c
        }),
        None => campaign_from_flags(&a),
    };
    let campaign = match campaign {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    warn_growth(&campaign.items);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = campaign.threads {
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let strict = campaign.strict;
    let results: Vec<(Item, Result<dynrefl::report::VerificationReport, identities::RunError>)> = pool.install(|| {
        campaign
            .items
            .par_iter()
            .map(|it| {
                let p = identities::Params { n: it.n, sig: it.sig, mode: it.mode, strict };
                (it.clone(), identities::run(&it.identity, &p))
            })
            .collect()
    });
    let mut records = Vec::new();
    for (i, (item, res)) in results.into_iter().enumerate() {
        let report = match res {
            Ok(r) => r,
            Err(e) => dynrefl::report::VerificationReport::new(&item.identity, "run failed", item.mode).fail(None).note(e.to_string()),
        };
        println!(
            "{:>3} {} {:<28} n={} {:<6} {:>6} ms  {}",
            i + 1,
            if report.pass { "PASS" } else { "FAIL" },
            item.identity,
            item.n,
            report.mode,
            report.millis,
            report.identity
        );
        records.push(Record { index: i + 1, key: item.identity.clone(), n: item.n, sig: item.sig.label(), report });
    }
    let summary = Summary::new(&campaign.name, records);
    println!("{} of {} pass", summary.passed, summary.total);
    if let Some(dir) = &campaign.output {
        if let Err(e) = output::write_all(dir, &summary) {
            return usage(format!("cannot write reports to {}: {e}", dir.display()));
        }
    }
    ExitCode::from(if summary.all_pass() { PASS } else { FAIL })
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), std::io::Error> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r,
            }
        }
    }
}

fn load_summary(p: &std::path::Path) -> Result<Summary, String> {
    let file = if p.is_dir() { p.join("summary.json") } else { p.to_path_buf() };
    let text = std::fs::read_to_string(&file).map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{} is not a campaign summary: {e}", file.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { PASS });
        }
    };
    match cli.cmd {
        Cmd::Verify(a) => run_verify(a),
        Cmd::Build { what, n, sites, spaces, side, gamma, lax, out } => {
            let args = build::BuildArgs { what, n, sites, spaces, side, gamma, strict: !lax };
            match build::build(&args) {
                Ok(v) => match write_or_print(&out, &serde_json::to_string_pretty(&v).expect("json")) {
                    Ok(()) => ExitCode::from(PASS),
                    Err(e) => usage(e),
                },
                Err(e) => usage(e),
            }
        }
        Cmd::Eigen { k, parity, m1, m2, mu, samples, seed, exponent, tolerance, out } => {
            if !(m1 > 0.0 && m2 > 0.0 && mu > 0.0) || samples == 0 {
                return usage("masses and mu must be positive and samples nonzero");
            }
            let e = Eigenfunction {
                k,
                parity: match parity {
                    ParityArg::Sin => Parity::Sin,
                    ParityArg::Cos => Parity::Cos,
                },
                m1,
                m2,
                mu,
                exponent: match exponent {
                    ExponentArg::Derived => ExponentMode::Derived,
                    ExponentArg::Printed => ExponentMode::Printed,
                },
            };
            let rows = match eigen::sweep(&e, samples, seed) {
                Ok(r) => r,
                Err(err) => return usage(err),
            };
            let summary = eigen::summarize(&e, &rows, seed, tolerance);
            let summary_json = serde_json::to_string_pretty(&summary).expect("json");
            let written = match &out {
                Some(p) => std::fs::File::create(p).map_err(csv::Error::from).and_then(|f| eigen::write_csv(f, &rows)).map(|_| println!("{summary_json}")),
                None => eigen::write_csv(std::io::stdout(), &rows).map(|_| eprintln!("{summary_json}")),
            };
            if let Err(err) = written {
                return usage(err);
            }
            ExitCode::from(if summary.within_tolerance { PASS } else { FAIL })
        }
        Cmd::Report { inputs, out } => {
            let mut summaries = Vec::new();
            for p in &inputs {
                match load_summary(p) {
                    Ok(s) => summaries.push(s),
                    Err(e) => return usage(e),
                }
            }
            let md = output::markdown(&summaries);
            if let Err(e) = write_or_print(&out, &md) {
                return usage(e);
            }
            ExitCode::from(if summaries.iter().all(|s| s.all_pass()) { PASS } else { FAIL })
        }
    }
}
