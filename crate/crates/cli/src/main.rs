use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use congame::adapt::{run_adaptive, AdaptConfig, RewardSpec};
use congame::compose::{compose, conflict_batch, heatmap_csv, incremental_synthesize, BatchConfig};
use congame::convert::{convert, TurnBasedGame};
use congame::game::{parse_game, GameGraph, Objective, RawObjective};
use congame::simulate::{simulate, with_jobs, OpponentPolicy, SimConfig};
use congame::solver::solve;
use congame::strategy::{
    check_compliance, extract_strategy, ScheduleStrategy, StrategyJson, DEFAULT_COLIVE_BASE,
    DEFAULT_EPS_LIVE,
};
use congame::template::{synthesize, Template, TemplateJson};
use congame::verify::verify_memoryless;
use congame::{Error, Result};

const SCHEMAS: &str = "\
File formats (JSON unless noted):

  game       {\"states\": [..], \"p1_actions\": {state: [..]}, \"p2_actions\": {state: [..]},
              \"transitions\": [{\"from\", \"p1\", \"p2\", \"to\"}],
              \"objective\": {\"kind\": \"safety\"|\"buchi\"|\"cobuchi\", \"target\": [..]}}
             One transition per (state, p1 action, p2 action).
  ranks      {\"winning\": [..], \"ranks\": [[..], ..], \"rank_of\": {state: n}}
  template   {\"winning\": [..], \"unsafe\": {state: [..]}, \"live\": {state: [[..], ..]},
              \"partition\": [[..], ..], \"colive\": {state: [..]}, \"objective_tag\": str}
  strategy   {state: {action: {\"kind\": \"constant\", \"p\": w}
                              | {\"kind\": \"geometric\", \"c\": c, \"r\": r}}}
             Weight of an action on the n-th visit (n = 0, 1, ..) is p or c*r^n,
             renormalized over the state.
  verdict    {\"verdict\": \"compliant\"}
             | {\"verdict\": \"non_compliant\", \"state\", \"clause\": \"unsafe\"|\"colive\"|\"live\", \"witness\": [..]}
             | {\"verdict\": \"unknown\", \"state\", \"reason\", \"witness\": [..]}
  objectives [{\"kind\", \"target\": [..]}, ..]
  opponent   {state: {action: p}}  (states not listed play uniformly)
  reward     {state: r}            (states not listed get 0)
  tb game    {\"states\": [{\"id\", \"owner\": 1|2}], \"transitions\": [{\"from\", \"label\", \"to\"}],
              \"winning\": {\"kind\": \"transitions\"|\"states\", \"items\": [..]},
              \"objective_kind\": \"safety\"|\"buchi\"|\"cobuchi\"}
  episodes   JSON lines: {\"episode\", \"seed\", \"start\", \"steps\": [[state, a, b, next], ..],
              \"visits\", \"visits_in_target\", \"target_suffix\"}
  heatmap    CSV: objective_size,objectives_added,conflict_fraction
  trace      CSV: step,state,chosen_action,opponent_action,reward,cumulative

All randomness comes from --seed through ChaCha8. Exit codes: 0 success,
2 input error, 3 internal non-convergence.";

#[derive(Parser)]
#[command(name = "congame", version, about = "Concurrent games: solving, templates, strategies", after_help = SCHEMAS)]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Opponent {
    Uniform,
    Fixed,
    Greedy,
}

#[derive(clap::Args)]
struct OpponentArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    opponent: Opponent,
    /// Opponent distributions for `--opponent fixed`.
    #[arg(long)]
    opponent_file: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Knobs {
    #[arg(long, default_value_t = DEFAULT_EPS_LIVE)]
    eps_live: f64,
    #[arg(long, default_value_t = DEFAULT_COLIVE_BASE)]
    colive_base: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Almost-sure winning region and rank decomposition.
    Solve { game: PathBuf },
    /// Permissive strategy template for the game's objective.
    Template { game: PathBuf },
    /// Merge templates over one game and report conflicts.
    Compose {
        game: PathBuf,
        #[arg(required = true)]
        templates: Vec<PathBuf>,
    },
    /// Add objectives one at a time; prints the conflict heatmap CSV.
    Incremental { game: PathBuf, objectives: PathBuf },
    /// Conflict heatmap over random games and objectives.
    Batch {
        #[arg(long, default_value_t = 200)]
        games: usize,
        #[arg(long, default_value_t = 4)]
        max_objectives: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Randomized strategy following a template.
    Extract {
        game: PathBuf,
        /// Synthesized from the game when omitted.
        #[arg(long)]
        template: Option<PathBuf>,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Does a strategy follow a template?
    Check {
        game: PathBuf,
        template: PathBuf,
        strategy: PathBuf,
    },
    /// States won almost surely by a memoryless strategy.
    Verify { game: PathBuf, strategy: PathBuf },
    /// Monte-Carlo episodes; prints JSON lines.
    Simulate {
        game: PathBuf,
        strategy: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, default_value_t = 500)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        opponent: OpponentArgs,
    },
    /// Online adaptation within a template; prints the trace CSV.
    Adapt {
        game: PathBuf,
        reward: PathBuf,
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[command(flatten)]
        knobs: Knobs,
        #[command(flatten)]
        opponent: OpponentArgs,
    },
    /// Turn-based game to concurrent game.
    Convert { tb_game: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read(path)?)?)
}

fn load_game(path: &Path) -> Result<(GameGraph, Objective)> {
    let (g, obj) = parse_game(&read(path)?)?;
    let obj = obj.ok_or_else(|| {
        Error::InvalidArgument(format!("{}: game has no objective", path.display()))
    })?;
    Ok((g, obj))
}

fn load_template(g: &GameGraph, path: &Path) -> Result<Template> {
    Template::from_json(g, &read_json::<TemplateJson>(path)?)
}

fn template_or_synth(g: &GameGraph, obj: &Objective, path: Option<&Path>) -> Result<Template> {
    match path {
        Some(p) => load_template(g, p),
        None => synthesize(g, obj),
    }
}

fn load_strategy(g: &GameGraph, path: &Path) -> Result<ScheduleStrategy> {
    ScheduleStrategy::from_json(g, &read_json::<StrategyJson>(path)?)
}

fn opponent(g: &GameGraph, obj: &Objective, a: &OpponentArgs) -> Result<OpponentPolicy> {
    match (a.opponent, &a.opponent_file) {
        (Opponent::Fixed, Some(p)) => {
            let j: BTreeMap<String, BTreeMap<String, f64>> = read_json(p)?;
            OpponentPolicy::fixed_from_json(g, &j)
        }
        (Opponent::Fixed, None) => Err(Error::InvalidArgument(
            "--opponent fixed needs --opponent-file".into(),
        )),
        (_, Some(_)) => Err(Error::InvalidArgument(
            "--opponent-file only applies to --opponent fixed".into(),
        )),
        (Opponent::Uniform, None) => Ok(OpponentPolicy::Uniform),
        (Opponent::Greedy, None) => Ok(OpponentPolicy::greedy(&solve(g, obj)?)),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

#[derive(Serialize)]
struct WinningJson {
    winning: Vec<String>,
}

fn run(cmd: Command) -> Result<String> {
    match cmd {
        Command::Solve { game } => {
            let (g, obj) = load_game(&game)?;
            json(&solve(&g, &obj)?.to_json(&g))
        }
        Command::Template { game } => {
            let (g, obj) = load_game(&game)?;
            json(&synthesize(&g, &obj)?.to_json(&g))
        }
        Command::Compose { game, templates } => {
            let (g, _) = parse_game(&read(&game)?)?;
            let ts = templates
                .iter()
                .map(|p| load_template(&g, p))
                .collect::<Result<Vec<_>>>()?;
            let c = compose(&g, &ts)?;
            if !c.conflicts.is_conflict_free() {
                eprintln!("conflicts: {}", c.conflicts.to_json(&g).len());
            }
            json(&c.to_json(&g))
        }
        Command::Incremental { game, objectives } => {
            let (g, _) = parse_game(&read(&game)?)?;
            let raw: Vec<RawObjective> = read_json(&objectives)?;
            let objs = raw
                .iter()
                .map(|o| Objective::from_raw(&g, o))
                .collect::<Result<Vec<_>>>()?;
            let res = incremental_synthesize(&g, &objs)?;
            if res.unsound {
                eprintln!("warning: unresolved conflict involving a co-Büchi objective");
            }
            Ok(heatmap_csv(&res.rows()))
        }
        Command::Batch {
            games,
            max_objectives,
            seed,
            jobs,
        } => {
            let cfg = BatchConfig {
                games,
                max_objectives,
                seed,
                ..BatchConfig::default()
            };
            let report = with_jobs(Some(jobs.unwrap_or(1)), || conflict_batch(&cfg))??;
            eprintln!(
                "soundness checks: {}, violations: {}, resolved: {}, unsound runs: {}",
                report.soundness_checks,
                report.soundness_violations,
                report.resolved,
                report.unsound_runs
            );
            Ok(heatmap_csv(&report.rows))
        }
        Command::Extract {
            game,
            template,
            knobs,
        } => {
            let (g, obj) = load_game(&game)?;
            let t = template_or_synth(&g, &obj, template.as_deref())?;
            let s = extract_strategy(&g, &t, knobs.eps_live, knobs.colive_base)?;
            json(&s.to_json(&g))
        }
        Command::Check {
            game,
            template,
            strategy,
        } => {
            let (g, _) = parse_game(&read(&game)?)?;
            let t = load_template(&g, &template)?;
            let s = load_strategy(&g, &strategy)?;
            json(&check_compliance(&g, &t, &s).to_json(&g))
        }
        Command::Verify { game, strategy } => {
            let (g, obj) = load_game(&game)?;
            let s = load_strategy(&g, &strategy)?;
            let won = verify_memoryless(&g, &s, &obj)?;
            json(&WinningJson {
                winning: g.set_names(&won),
            })
        }
        Command::Simulate {
            game,
            strategy,
            start,
            episodes,
            horizon,
            seed,
            jobs,
            opponent: opp,
        } => {
            let (g, obj) = load_game(&game)?;
            let s = load_strategy(&g, &strategy)?;
            let opp = opponent(&g, &obj, &opp)?;
            let start = g.state(&start)?;
            let cfg = SimConfig {
                horizon,
                episodes,
                seed,
            };
            let logs = with_jobs(Some(jobs.unwrap_or(1)), || {
                simulate(&g, &s, &opp, &obj.target, start, &cfg)
            })??;
            let mut out = String::new();
            for (i, log) in logs.iter().enumerate() {
                out += &serde_json::to_string(&log.to_json(&g, i))?;
                out.push('\n');
            }
            Ok(out)
        }
        Command::Adapt {
            game,
            reward,
            template,
            start,
            horizon,
            seed,
            alpha,
            knobs,
            opponent: opp,
        } => {
            let (g, obj) = load_game(&game)?;
            let t = template_or_synth(&g, &obj, template.as_deref())?;
            let reward = RewardSpec::from_json(&g, &read_json(&reward)?)?;
            let opp = opponent(&g, &obj, &opp)?;
            let cfg = AdaptConfig {
                eps_live: knobs.eps_live,
                colive_budget: knobs.colive_base,
                alpha,
                horizon,
                seed,
            };
            let run = run_adaptive(&g, &t, &reward, &opp, &obj.target, g.state(&start)?, &cfg)?;
            eprintln!(
                "cumulative reward: {}, violations: {}",
                run.cumulative,
                run.violations.total()
            );
            Ok(run.trace_csv(&g))
        }
        Command::Convert { tb_game } => {
            let tb: TurnBasedGame = read_json(&tb_game)?;
            let c = convert(&tb)?;
            eprintln!(
                "player-1 states: {}, merged transitions: {}, self-loops added: {}",
                c.stats.p1_states, c.stats.merged_transitions, c.stats.self_loops_added
            );
            json(&c.game.to_raw(Some(&c.objective)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli.command).and_then(|out| match &cli.output {
        Some(p) => fs::write(p, out).map_err(Error::from),
        None => {
            print!("{out}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_internal() { 3 } else { 2 })
        }
    }
}
