//! smarket: load a market scenario and run a clearing pass, the group
//! formation game, simulation batches, a three-scheme comparison, or the
//! exhaustive oracle on it. Tabular output is CSV with units in the column
//! names; per-run summaries are JSON documents keyed by a scenario
//! fingerprint.

mod report;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use market_core::{rat_to_f64, Bid, Offer, Scenario, SimulationParams, SupplySchedule};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simulator::{build_stream, run_scheme, SchemeKind, SchemeMetrics, SchemeSummary, SimSetup};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "smarket", version, about = "slotted cloud-instance market tools")]
struct Cli {
    /// Directory for emitted files.
    #[arg(long, global = true, env = "SMARKET_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clear the whole scenario as one group and print the outcome.
    Allocate(AllocateArgs),
    /// Run the formation game from a random start to a stable structure.
    FormGroups(FormGroupsArgs),
    /// Simulate one scheme over seeded random arrival streams.
    Simulate(SimulateArgs),
    /// Run all three schemes on shared streams and summarize side by side.
    Compare(CompareArgs),
    /// Exhaustive optimum of a small scenario and the heuristic's gap.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct AllocateArgs {
    config: PathBuf,
    /// Re-emit the canonical scenario file after validation.
    #[arg(long)]
    export: Option<PathBuf>,
}

#[derive(Args)]
struct FormGroupsArgs {
    config: PathBuf,
    /// Seed for the random initial structure; drawn and printed if absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep cap override; 0 returns the initial structure unchanged.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Write the per-sweep welfare and stability trace to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = SchemeArg::FormedGroups)]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 1)]
    runs: u32,
    /// Base seed; run r uses seed + r. Drawn and printed if absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Report directory for this batch, overriding --out-dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    config: PathBuf,
    #[arg(long, default_value_t = 20)]
    runs: u32,
    /// Base seed; run r uses seed + r. Drawn and printed if absent.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    config: PathBuf,
    /// Search-node budget; exceeding it aborts with exit code 3.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
}

#[derive(Copy, Clone, ValueEnum)]
enum SchemeArg {
    Fcfs,
    SingleGroup,
    FormedGroups,
}

impl From<SchemeArg> for SchemeKind {
    fn from(arg: SchemeArg) -> SchemeKind {
        match arg {
            SchemeArg::Fcfs => SchemeKind::Fcfs,
            SchemeArg::SingleGroup => SchemeKind::SingleGroup,
            SchemeArg::FormedGroups => SchemeKind::FormedGroups,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<oracle::OracleError>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let out_dir = cli.out_dir;
    match cli.command {
        Command::Allocate(args) => allocate(args),
        Command::FormGroups(args) => form_groups(args),
        Command::Simulate(args) => simulate(args, out_dir),
        Command::Compare(args) => compare(args, out_dir),
        Command::Oracle(args) => oracle_gap(args),
    }
}

fn load(path: &Path) -> Result<Scenario> {
    Scenario::load(path).with_context(|| format!("loading {}", path.display()))
}

fn seed_or_draw(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::thread_rng().next_u64())
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn allocate(args: AllocateArgs) -> Result<()> {
    let scenario = load(&args.config)?;
    println!("scenario_fingerprint {}", report::scenario_fingerprint(&scenario));
    if let Some(path) = &args.export {
        write_file(path, &scenario.to_toml_string())?;
    }

    let bids: Vec<&Bid> = scenario.market.users.values().collect();
    let offers: Vec<&Offer> = scenario.market.providers.values().collect();
    let supply = SupplySchedule::new();
    let started = Instant::now();
    let alloc =
        allocation::find_instance_allocation(scenario.market.types, &bids, &offers, &supply, 0);
    let bm = allocation::bid_map(bids.iter().copied());
    let om = allocation::offer_map(offers.iter().copied());
    let welfare = allocation::social_welfare(scenario.market.types, &bm, &om, &alloc);
    let sheet = pricing::price_allocation(scenario.market.types, &bm, &om, &alloc, scenario.kappa());
    let settlement = pricing::settle(&sheet, &bm, &alloc);

    println!("allocation triples:");
    print!("{}", alloc.to_csv());
    println!("winners_count {}", alloc.winner_count());
    println!("social_welfare_cents {} ({})", welfare.cents(), welfare);
    println!("group prices:");
    println!("slot,group_price_cents");
    for (slot, price) in &sheet.group_prices {
        println!("{slot},{:.4}", rat_to_f64(*price));
    }
    println!("settled payments:");
    println!("user,payment_cents");
    for (user, paid) in &settlement.user_payments {
        println!("{},{}", user.0, paid.cents());
    }
    println!("provider revenue:");
    println!("provider,revenue_cents");
    for (provider, revenue) in &settlement.provider_revenue {
        println!("{},{}", provider.0, revenue.cents());
    }
    println!("dropped_remainder_cents {}", settlement.dropped_cents);
    println!(
        "budget_balanced {}",
        settlement.total_paid() == settlement.total_revenue()
    );
    println!("elapsed_ms {}", started.elapsed().as_millis());
    Ok(())
}

fn form_groups(args: FormGroupsArgs) -> Result<()> {
    let scenario = load(&args.config)?;
    println!("scenario_fingerprint {}", report::scenario_fingerprint(&scenario));
    let seed = seed_or_draw(args.seed);
    println!("seed {seed}");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = coalition::random_structure(&scenario.market, &mut rng);
    let mut params = scenario.formation;
    if let Some(cap) = args.max_iters {
        params.max_sweeps = cap;
    }
    let supply = SupplySchedule::new();
    let ctx = coalition::EvalContext::new(
        &scenario.market,
        scenario.kappa(),
        scenario.delay_cost,
        scenario.migration_cost,
        0,
        &supply,
    );
    let started = Instant::now();
    let outcome = coalition::find_group_structure(&ctx, initial, &params);
    let elapsed = started.elapsed();
    let welfare = outcome.final_welfare(&ctx);

    println!("sweeps_count {} converged {}", outcome.sweeps.len(), outcome.converged);
    println!("final_welfare_cents {} ({})", welfare.cents(), welfare);
    println!(
        "epsilon_user {:.6} epsilon_provider {:.6}",
        rat_to_f64(outcome.final_epsilon.0),
        rat_to_f64(outcome.final_epsilon.1)
    );
    println!("final_fingerprint {}", outcome.structure.fingerprint());
    println!("final structure:");
    println!("{}", outcome.structure);

    let mut trace = String::from("sweep,welfare_cents,epsilon_user,epsilon_provider,fingerprint\n");
    for (i, sweep) in outcome.sweeps.iter().enumerate() {
        trace.push_str(&format!(
            "{},{},{:.6},{:.6},{}\n",
            i + 1,
            sweep.welfare.cents(),
            rat_to_f64(sweep.epsilon.0),
            rat_to_f64(sweep.epsilon.1),
            sweep.fingerprint
        ));
    }
    match &args.trace {
        Some(path) => write_file(path, &trace)?,
        None => print!("{trace}"),
    }
    println!("elapsed_ms {}", elapsed.as_millis());
    Ok(())
}

/// Build the shared per-run setup from a scenario; the placement seed is
/// decorrelated from the stream seed so the two draws never align.
fn sim_setup(scenario: &Scenario, params: &SimulationParams, seed: u64) -> SimSetup {
    SimSetup {
        types: scenario.market.types,
        offers: scenario.market.providers.values().cloned().collect(),
        kappa: scenario.kappa(),
        delay_cost: scenario.delay_cost,
        migration_cost: scenario.migration_cost,
        horizon: params.horizon,
        formation: scenario.formation,
        placement_seed: seed ^ 0x9e37_79b9_7f4a_7c15,
    }
}

fn simulate(args: SimulateArgs, out_dir: Option<PathBuf>) -> Result<()> {
    let scenario = load(&args.config)?;
    let fingerprint = report::scenario_fingerprint(&scenario);
    println!("scenario_fingerprint {fingerprint}");
    let params = scenario.simulation.unwrap_or_default();
    let base_seed = seed_or_draw(args.seed);
    let scheme = SchemeKind::from(args.scheme);
    let dir = args.out.or(out_dir).unwrap_or_else(|| PathBuf::from("."));
    println!(
        "scheme {} runs_count {} base_seed {base_seed} horizon_slots {}",
        scheme.label(),
        args.runs,
        params.horizon
    );

    for r in 0..u64::from(args.runs) {
        let seed = base_seed + r;
        let stream = build_stream(&params, scenario.market.types, seed);
        let started = Instant::now();
        let run = run_scheme(&sim_setup(&scenario, &params, seed), scheme, &stream);
        let elapsed = started.elapsed();
        let rep = report::RunReport::from_run(&fingerprint, seed, &run, elapsed.as_millis());
        let m = &run.metrics;
        println!(
            "run seed={seed} arrived_count={} winners_count={} losers_count={} \
             unresolved_count={} acceptance_rate_ratio={:.4} utilization_ratio={:.4} \
             avg_payment_cents={:.1} executed_welfare_cents={} elapsed_ms={}",
            m.arrived,
            m.winners,
            m.losers,
            m.unresolved,
            m.acceptance_rate(),
            m.utilization(),
            m.avg_payment_cents(),
            m.executed_welfare.cents(),
            rep.elapsed_ms
        );
        let tag = format!("{}-{seed}", scheme.label());
        write_file(&dir.join(format!("report-{tag}.json")), &rep.to_json())?;
        write_file(&dir.join(format!("events-{tag}.csv")), &run.events_csv())?;
    }
    Ok(())
}

/// Reference improvement directions for the three-scheme comparison:
/// formed groups vs the immediate baseline.
const REFERENCE_DIRECTIONS: [(&str, f64); 4] = [
    ("acceptance_rate", 13.0),
    ("utilization", 26.0),
    ("avg_payment", -7.0),
    ("provider_revenue", 6.0),
];

fn compare(args: CompareArgs, out_dir: Option<PathBuf>) -> Result<()> {
    let scenario = load(&args.config)?;
    println!("scenario_fingerprint {}", report::scenario_fingerprint(&scenario));
    let params = scenario.simulation.unwrap_or_default();
    let base_seed = seed_or_draw(args.seed);
    println!(
        "runs_count {} base_seed {base_seed} horizon_slots {}",
        args.runs, params.horizon
    );

    let schemes = [SchemeKind::Fcfs, SchemeKind::SingleGroup, SchemeKind::FormedGroups];
    let mut metrics: [Vec<SchemeMetrics>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let started = Instant::now();
    for r in 0..u64::from(args.runs) {
        let seed = base_seed + r;
        let stream = build_stream(&params, scenario.market.types, seed);
        let setup = sim_setup(&scenario, &params, seed);
        for (i, &scheme) in schemes.iter().enumerate() {
            metrics[i].push(run_scheme(&setup, scheme, &stream).metrics);
        }
    }
    let summaries: Vec<SchemeSummary> =
        metrics.iter().map(|runs| SchemeSummary::from_runs(runs)).collect();

    let mut csv = String::from(
        "scheme,runs_count,winners_count_mean,winners_count_sd,losers_count_mean,\
         losers_count_sd,acceptance_rate_ratio_mean,acceptance_rate_ratio_sd,\
         utilization_ratio_mean,utilization_ratio_sd,avg_payment_cents_mean,\
         avg_payment_cents_sd,revenue_cents_mean,revenue_cents_sd,\
         welfare_cents_mean,welfare_cents_sd\n",
    );
    for (scheme, s) in schemes.iter().zip(&summaries) {
        csv.push_str(&format!(
            "{},{},{:.2},{:.2},{:.2},{:.2},{:.4},{:.4},{:.4},{:.4},{:.1},{:.1},{:.1},{:.1},{:.1},{:.1}\n",
            scheme.label(),
            s.runs,
            s.winners.mean,
            s.winners.stddev,
            s.losers.mean,
            s.losers.stddev,
            s.acceptance_rate.mean,
            s.acceptance_rate.stddev,
            s.utilization.mean,
            s.utilization.stddev,
            s.avg_payment_cents.mean,
            s.avg_payment_cents.stddev,
            s.total_revenue_cents.mean,
            s.total_revenue_cents.stddev,
            s.executed_welfare_cents.mean,
            s.executed_welfare_cents.stddev,
        ));
    }
    print!("{csv}");

    let pct = |now: f64, before: f64| (now / before - 1.0) * 100.0;
    let (ia, bct, gf) = (&summaries[0], &summaries[1], &summaries[2]);
    let observed = [
        pct(gf.acceptance_rate.mean, ia.acceptance_rate.mean),
        pct(gf.utilization.mean, ia.utilization.mean),
        pct(gf.avg_payment_cents.mean, ia.avg_payment_cents.mean),
        pct(gf.total_revenue_cents.mean, ia.total_revenue_cents.mean),
    ];
    println!("improvements formed-groups vs fcfs (reference direction in brackets):");
    for ((name, reference), value) in REFERENCE_DIRECTIONS.iter().zip(observed) {
        let same_way = (value >= 0.0) == (*reference >= 0.0);
        println!(
            "{name} {value:+.1}% [reference {reference:+.0}%] {}",
            if same_way { "ok" } else { "FAIL" }
        );
    }
    let orderings = [
        (
            "acceptance_rate formed-groups >= single-group >= fcfs",
            gf.acceptance_rate.mean >= bct.acceptance_rate.mean
                && bct.acceptance_rate.mean >= ia.acceptance_rate.mean,
        ),
        (
            "utilization formed-groups >= single-group >= fcfs",
            gf.utilization.mean >= bct.utilization.mean
                && bct.utilization.mean >= ia.utilization.mean,
        ),
        (
            "avg_payment formed-groups <= fcfs",
            gf.avg_payment_cents.mean <= ia.avg_payment_cents.mean,
        ),
    ];
    for (name, holds) in orderings {
        println!("ordering {name} {}", if holds { "ok" } else { "FAIL" });
    }
    println!("elapsed_ms {}", started.elapsed().as_millis());

    let dir = out_dir.unwrap_or_else(|| PathBuf::from("."));
    write_file(&dir.join("compare-summary.csv"), &csv)?;
    Ok(())
}

fn oracle_gap(args: OracleArgs) -> Result<()> {
    let scenario = load(&args.config)?;
    println!("scenario_fingerprint {}", report::scenario_fingerprint(&scenario));
    let bids: Vec<&Bid> = scenario.market.users.values().collect();
    let offers: Vec<&Offer> = scenario.market.providers.values().collect();
    let types = scenario.market.types;

    let started = Instant::now();
    let optimum = oracle::enumerate_optimum(types, &bids, &offers, args.budget)?;
    let supply = SupplySchedule::new();
    let heuristic = allocation::find_instance_allocation(types, &bids, &offers, &supply, 0);
    let bm = allocation::bid_map(bids.iter().copied());
    let om = allocation::offer_map(offers.iter().copied());
    let heuristic_welfare = allocation::social_welfare(types, &bm, &om, &heuristic);

    println!("nodes_evaluated_count {} (budget {})", optimum.nodes, args.budget);
    println!(
        "optimum_welfare_cents {} ({})",
        optimum.welfare.cents(),
        optimum.welfare
    );
    println!(
        "heuristic_welfare_cents {} ({})",
        heuristic_welfare.cents(),
        heuristic_welfare
    );
    let ratio = if optimum.welfare.cents() == 0 {
        1.0
    } else {
        heuristic_welfare.cents() as f64 / optimum.welfare.cents() as f64
    };
    println!("welfare_ratio {ratio:.4}");
    println!("optimum allocation triples:");
    print!("{}", optimum.allocation.to_csv());
    println!("elapsed_ms {}", started.elapsed().as_millis());
    Ok(())
}
