use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rsmax_core::bruteforce::{conjecture_scan, lemma2_check, minimizer, opt_robust, opt_robust_system};
use rsmax_core::format::{read_instance, write_instance};
use rsmax_core::harness::bounds::bound_table;
use rsmax_core::harness::{run_experiment, write_outputs, AlgorithmConfig, AlgorithmId, ExperimentConfig, RunRecord};
use rsmax_core::instances::{
    augment_with_copies, gen_greedy_failure, gen_hardness_augment, gen_partial_copies, gen_random_coverage,
    gen_random_modular,
};
use rsmax_core::oracle::{exhaustive_properties, sample_properties};
use rsmax_core::subset::combinations;
use rsmax_core::{Budget, Error, Instance, Subset};

const EXPLICIT_CHECK_MAX_N: usize = 16;

#[derive(Parser)]
#[command(name = "rsmax", version, about = "Robust submodular maximization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[command(subcommand)]
        generator: Generator,
        /// Output path; stdout when omitted.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Run an experiment config and write results.csv / results.json.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Exact checks on one instance.
    Verify {
        check: Check,
        #[arg(short, long)]
        instance: PathBuf,
        /// Comma-separated element ids, for `minimizer`.
        #[arg(long, value_delimiter = ',')]
        set: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tabulate closed-form guarantees.
    Bounds {
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        tau: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        m: Vec<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Empirical scan of the subset constant for l-function families.
    Conjecture {
        #[arg(long, default_value_t = 3)]
        l: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        k_max: usize,
    },
}

#[derive(Subcommand)]
enum Generator {
    GreedyFailure {
        #[arg(long)]
        k: usize,
    },
    PartialCopies {
        #[arg(long)]
        k: usize,
    },
    RandomCoverage(RandomCoverage),
    RandomModular {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        max_weight: u32,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        tau: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Copy augmentation of an existing instance.
    Copies {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        c: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        tau: Option<usize>,
    },
    /// Additive embedding of a tau = 0 instance.
    Hardness {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        tau: usize,
    },
}

#[derive(Args)]
struct RandomCoverage {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    universe: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    /// Monotonicity, submodularity and f(empty) = 0.
    Properties,
    /// The removal chain for every X with |X| <= tau.
    Lemma2,
    /// The exact robust optimum.
    Opt,
    /// The worst removal from `--set`.
    Minimizer,
    /// Every applicable algorithm against its finite-k guarantee.
    Guarantees,
}

enum Failure {
    Check(String),
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Json(_) | Error::Io(_) | Error::Csv(_) | Error::Precondition(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Run(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen { generator, output } => generate(generator, output.as_deref()),
        Command::Run { config, output } => run(&config, &output),
        Command::Verify {
            check,
            instance,
            set,
            samples,
            seed,
        } => verify(check, &instance, set, samples, seed),
        Command::Bounds { k, tau, m, json } => bounds(&k, &tau, &m, json),
        Command::Conjecture { l, trials, seed, k_max } => conjecture(l, trials, seed, k_max),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) | Err(Failure::Run(msg)) => {
            eprintln!("rsmax: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("rsmax: {msg}");
            ExitCode::from(2)
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> Outcome {
    println!("{}", serde_json::to_string_pretty(value).map_err(Error::from)?);
    Ok(())
}

fn generate(generator: Generator, output: Option<&Path>) -> Outcome {
    let inst = match generator {
        Generator::GreedyFailure { k } => gen_greedy_failure(k)?,
        Generator::PartialCopies { k } => gen_partial_copies(k)?,
        Generator::RandomCoverage(p) => gen_random_coverage(p.n, p.universe, p.density, p.seed, p.k, p.tau)?,
        Generator::RandomModular {
            n,
            max_weight,
            k,
            tau,
            seed,
        } => gen_random_modular(n, max_weight, seed, k, tau)?,
        Generator::Copies { input, c, k, tau } => {
            let base = read_instance(&input)?;
            let (mut inst, _) = augment_with_copies(&base, c)?;
            if let Some(k) = k {
                inst = inst.with_tau(0)?.with_k(k)?.with_tau(tau.unwrap_or(base.tau))?;
            } else if let Some(t) = tau {
                inst = inst.with_tau(t)?;
            }
            inst
        }
        Generator::Hardness { input, tau } => gen_hardness_augment(&read_instance(&input)?, tau)?,
    };
    match output {
        Some(path) => write_instance(&inst, path)?,
        None => {
            let spec = rsmax_core::format::InstanceSpec::from_instance(&inst)?;
            println!("{}", spec.to_json()?);
        }
    }
    Ok(())
}

fn run(config: &Path, out: &Path) -> Outcome {
    let cfg = ExperimentConfig::load(config)?;
    let records = run_experiment(&cfg)?;
    write_outputs(&cfg, &records, out)?;
    let errors = records.iter().filter(|r| r.error.is_some()).count();
    let violations: Vec<&RunRecord> = records.iter().filter(|r| r.within_bound == Some(false)).collect();
    println!(
        "{} rows, {} algorithm errors, {} bound violations -> {}",
        records.len(),
        errors,
        violations.len(),
        out.display()
    );
    if let Some(first) = violations.first() {
        return Err(Failure::Check(format!(
            "{} on {}: ratio {:?} below guarantee {:?}",
            first.algorithm, first.instance, first.ratio, first.bound
        )));
    }
    Ok(())
}

fn verify(check: Check, path: &Path, set: Option<Vec<usize>>, samples: usize, seed: u64) -> Outcome {
    let inst = read_instance(path)?;
    let budget = Budget::from_env()?;
    match check {
        Check::Properties => {
            let sampled = sample_properties(&inst.oracle, samples, seed)?;
            let exhaustive = if inst.n() <= EXPLICIT_CHECK_MAX_N {
                Some(exhaustive_properties(&inst.oracle)?)
            } else {
                None
            };
            print_json(&serde_json::json!({ "sampled": sampled, "exhaustive": exhaustive }))?;
            if !sampled.passed() || exhaustive.as_ref().is_some_and(|r| !r.passed()) {
                return Err(Failure::Check("property check failed".into()));
            }
        }
        Check::Lemma2 => {
            let ground = inst.oracle.ground().to_vec();
            let mut failures = 0;
            let mut checked = 0;
            for size in 0..=inst.tau.min(ground.len()) {
                for x in combinations(&ground, size) {
                    let report = lemma2_check(&inst, &x, &budget)?;
                    checked += 1;
                    if !report.holds {
                        failures += 1;
                        eprintln!("chain fails for X = {x}: {report:?}");
                    }
                }
            }
            print_json(&serde_json::json!({ "checked": checked, "failures": failures }))?;
            if failures > 0 {
                return Err(Failure::Check(format!("{failures} removal sets break the chain")));
            }
        }
        Check::Opt => {
            let (set, value) = match &inst.constraint {
                Some(c) => opt_robust_system(&inst.oracle, c.build(inst.n())?.as_ref(), inst.tau, &budget)?,
                None => opt_robust(&inst, &budget)?,
            };
            print_json(&serde_json::json!({ "set": set.to_vec(), "g": value, "k": inst.k, "tau": inst.tau }))?;
        }
        Check::Minimizer => {
            let ids = set.ok_or_else(|| Failure::Config("minimizer needs --set".into()))?;
            let a: Subset = ids.into_iter().collect();
            let r = minimizer(&inst.oracle, &a, inst.tau, &budget)?;
            print_json(&r)?;
        }
        Check::Guarantees => return guarantees(&inst),
    }
    Ok(())
}

fn guarantees(inst: &Instance) -> Outcome {
    let dir = std::env::temp_dir().join(format!("rsmax-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(Error::from)?;
    let file = dir.join("instance.json");
    write_instance(inst, &file)?;
    let cfg = ExperimentConfig {
        instances: vec![rsmax_core::harness::InstanceSource::File { path: file }],
        algorithms: AlgorithmId::ALL.into_iter().map(AlgorithmConfig::new).collect(),
        budget: None,
        compute_opt: true,
        check_bounds: true,
        tolerance: rsmax_core::EPS,
        output: Default::default(),
        base_dir: PathBuf::new(),
    };
    let records = run_experiment(&cfg);
    let _ = std::fs::remove_dir_all(&dir);
    let records = records?;
    let rows: Vec<_> = records
        .iter()
        .filter(|r| r.error.is_none())
        .map(|r| {
            serde_json::json!({
                "algorithm": r.algorithm, "g": r.g, "opt": r.opt, "ratio": r.ratio,
                "bound": r.bound, "within_bound": r.within_bound,
            })
        })
        .collect();
    print_json(&rows)?;
    if records.iter().any(|r| r.within_bound == Some(false)) {
        return Err(Failure::Check("a guarantee was violated".into()));
    }
    Ok(())
}

fn bounds(ks: &[usize], taus: &[usize], ms: &[usize], json: bool) -> Outcome {
    if ks.iter().chain(ms).any(|&v| v == 0) {
        return Err(Failure::Config("k and m must be positive".into()));
    }
    let rows = bound_table(ks, taus, ms);
    if json {
        return print_json(&rows);
    }
    println!(
        "{:<18} {:>5} {:>4} {:>4} {:>10}  note",
        "algorithm", "k", "tau", "m", "bound"
    );
    for r in rows {
        let m = r.m.map_or("-".into(), |m| m.to_string());
        let v = r.value.map_or("n/a".into(), |v| format!("{v:.6}"));
        println!(
            "{:<18} {:>5} {:>4} {:>4} {:>10}  {}",
            r.algorithm, r.k, r.tau, m, v, r.note
        );
    }
    Ok(())
}

fn conjecture(l: usize, trials: usize, seed: u64, k_max: usize) -> Outcome {
    let report = conjecture_scan(l, trials, k_max, seed)?;
    print_json(&report)
}
