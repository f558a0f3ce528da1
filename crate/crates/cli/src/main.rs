use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tsql_lab::environments::{build_bias_mdp, build_roulette_mdp, generate_random_mdp, RandomMdpParams};
use tsql_lab::harness::{run_experiment, ExperimentConfig};
use tsql_lab::mdp::{DEFAULT_MAX_ITERS, DEFAULT_TOL};
use tsql_lab::{
    bound_stsql, bound_tsql, fixed_point_gap_bound, validate_theta_schedule, value_iteration, Backup, LabError,
    QTable64, Schedule, TabularMdp64, ValueFunction64,
};

#[derive(Parser)]
#[command(name = "tsql-lab", version, about = "Tabular two-step Q-learning laboratory")]
struct Cli {
    /// Worker threads for experiment runs (default: available parallelism)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an MDP exactly by value iteration
    Solve {
        /// MDP JSON document
        mdp: PathBuf,
        /// Also solve the log-sum-exp operator with this temperature
        #[arg(long, value_name = "N")]
        lse: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
    },
    /// Check a θ schedule (and step size) against the convergence conditions
    ValidateSchedule {
        #[command(flatten)]
        schedules: ScheduleArgs,
    },
    /// Iterate bound for TSQL (M) and, with --lse, S-TSQL (D)
    Bound {
        #[command(flatten)]
        schedules: ScheduleArgs,
        /// Bound on |reward|
        #[arg(long)]
        c_max: f64,
        /// Discount (defaults to the config's discount)
        #[arg(long)]
        discount: Option<f64>,
        #[arg(long, value_name = "N")]
        lse: Option<f64>,
        #[arg(long)]
        num_actions: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tail_tol: f64,
    },
    /// Run an experiment config and write CSV series
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory
        #[arg(long, env = "TSQL_LAB_OUT")]
        out: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Benchmark environments
    Env {
        #[command(subcommand)]
        command: EnvCommand,
    },
}

#[derive(Subcommand)]
enum EnvCommand {
    /// Emit a benchmark MDP as JSON
    Build {
        #[arg(long, value_enum)]
        name: EnvName,
        #[arg(long)]
        discount: Option<f64>,
        /// Seed for the random generator
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        states: usize,
        #[arg(long, default_value_t = 5)]
        actions: usize,
        #[arg(long, default_value_t = 0.0)]
        self_loop_floor: f64,
        /// Draw random rewards per (state, action) instead of per transition
        #[arg(long)]
        reward_per_pair: bool,
        /// Drop reward noise, keeping expected rewards
        #[arg(long)]
        noise_free: bool,
        /// Write to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvName {
    Bias,
    Roulette,
    Random,
}

#[derive(clap::Args)]
struct ScheduleArgs {
    /// Step-size schedule as JSON, e.g. '{"family":"power-law","a":1,"b":1,"p":1}'
    #[arg(long)]
    alpha: Option<String>,
    /// θ schedule as JSON
    #[arg(long)]
    theta: Option<String>,
    /// Take missing schedules (and the discount) from an experiment config
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ScheduleArgs {
    fn resolve(&self) -> Result<(Schedule, Schedule, Option<ExperimentConfig>), LabError> {
        let cfg = self.config.as_deref().map(load_config).transpose()?;
        let pick = |flag: &Option<String>, from_cfg: Option<Schedule>, name: &str| match (flag, from_cfg) {
            (Some(text), _) => parse_schedule(text, name),
            (None, Some(s)) => Ok(s),
            (None, None) => Err(LabError::Config(format!("--{name} or --config is required"))),
        };
        let alpha = pick(&self.alpha, cfg.as_ref().map(|c| c.alpha), "alpha")?;
        let theta = pick(&self.theta, cfg.as_ref().map(|c| c.theta), "theta")?;
        Ok((alpha, theta, cfg))
    }
}

fn parse_schedule(text: &str, name: &str) -> Result<Schedule, LabError> {
    serde_json::from_str(text).map_err(|e| LabError::Config(format!("invalid --{name} schedule: {e}")))
}

fn load_config(path: &Path) -> Result<ExperimentConfig, LabError> {
    let text = fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("cannot read config {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn table_json(q: &QTable64) -> Value {
    json!((0..q.num_states()).map(|i| q.row(i).to_vec()).collect::<Vec<_>>())
}

fn solve(mdp_path: &Path, lse: Option<f64>, tol: f64, max_iters: usize) -> Result<Value, LabError> {
    let mdp = TabularMdp64::from_json(&fs::read_to_string(mdp_path)?)?;
    let (q, j): (QTable64, ValueFunction64) = value_iteration(&mdp, Backup::Max, tol, max_iters)?;
    let mut out = json!({ "q": table_json(&q), "j": j.values });
    if let Some(n) = lse {
        let (qu, ju) = value_iteration(&mdp, Backup::lse(n)?, tol, max_iters)?;
        out["lse"] = json!({
            "N": n,
            "q": table_json(&qu),
            "j": ju.values,
            "gap": qu.sup_distance(&q),
            "gap_bound": fixed_point_gap_bound(n, mdp.discount(), mdp.num_actions())?,
        });
    }
    Ok(out)
}

fn build_env(cmd: &EnvCommand) -> Result<String, LabError> {
    let EnvCommand::Build { name, discount, seed, states, actions, self_loop_floor, reward_per_pair, noise_free, out } =
        cmd;
    let mut mdp = match name {
        EnvName::Bias => build_bias_mdp(discount.unwrap_or(0.95))?,
        EnvName::Roulette => {
            let m = build_roulette_mdp()?;
            match discount {
                Some(d) => m.with_discount(*d)?,
                None => m,
            }
        }
        EnvName::Random => {
            let params = RandomMdpParams {
                num_states: *states,
                num_actions: *actions,
                discount: discount.unwrap_or(0.6),
                self_loop_floor: *self_loop_floor,
                reward_per_transition: !reward_per_pair,
            };
            generate_random_mdp(&params, &mut tsql_lab::rng::seeded(*seed))?
        }
    };
    if *noise_free {
        mdp = mdp.strip_noise();
    }
    let text = mdp.to_json()?;
    match out {
        Some(path) => {
            fs::write(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn execute(cli: Cli) -> Result<(), LabError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(LabError::Config("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(format!("cannot start worker pool: {e}")))?;
    }
    match cli.command {
        Command::Solve { mdp, lse, tol, max_iters } => {
            println!("{}", serde_json::to_string_pretty(&solve(&mdp, lse, tol, max_iters)?)?);
        }
        Command::ValidateSchedule { schedules } => {
            let (alpha, theta, _) = schedules.resolve()?;
            let v = validate_theta_schedule(&theta, &alpha);
            let mut out = serde_json::to_value(v)?;
            out["theta_conditions_hold"] = json!(v.theta_conditions_hold());
            out["step_size_conditions_hold"] = json!(v.step_size_conditions_hold());
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Bound { schedules, c_max, discount, lse, num_actions, tail_tol } => {
            let (alpha, theta, cfg) = schedules.resolve()?;
            let beta = match (discount, &cfg) {
                (Some(b), _) => b,
                (None, Some(c)) => c.resolved_discount(),
                (None, None) => return Err(LabError::Config("--discount or --config is required".into())),
            };
            let mut out = json!({ "M": bound_tsql(c_max, beta, &alpha, &theta, tail_tol)? });
            if let Some(n) = lse {
                let na = num_actions.ok_or_else(|| LabError::Config("--lse needs --num-actions".into()))?;
                out["D"] = json!(bound_stsql(c_max, beta, &alpha, &theta, n, na, tail_tol)?);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Run { config, out, seed } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let record = run_experiment(&cfg)?;
            for path in record.write(&out)? {
                eprintln!("wrote {}", path.display());
            }
            for row in &record.summary {
                println!("{}\t{}\t{:?}", row.algorithm, row.metric, row.value);
            }
        }
        Command::Env { command } => {
            let text = build_env(&command)?;
            if !text.is_empty() {
                println!("{text}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
