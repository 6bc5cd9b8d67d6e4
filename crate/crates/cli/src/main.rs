mod groups;

use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use wreathlab::arith::{prime_powers, to_f64};
use wreathlab::chain::{exact_lumped_matrix, lumped_step, run_lumped};
use wreathlab::coupling::{sample_product_coupled, sample_skn_type, WreathTypeSampler};
use wreathlab::error::{Error, Result};
use wreathlab::harness::{
    census_wreath, check_product_bound, check_skn_limit_spec, check_tv_bound_skn, check_tv_bound_wreath,
    companion_seed, product_small_case_tv, triangle, BoundReport, Distribution,
};
use wreathlab::limit_laws::{build_spec, skn_limit_spec, ProductActionSampler, ProductActionSpec};
use wreathlab::mc::{chunk_rng, par_samples, with_threads};
use wreathlab::partition::Partition;
use wreathlab::stats::{
    clt_report, cycle_count_moments_cyclic, descents, inversions, jitter, mean_prime_power_closed,
    second_moment_prime_power_printed, stopped_sum_check, wreath_cycle_moments, wreath_statistic_moments, MomentPair,
};
use wreathlab::wreath::{sample_uniform, GroupSpec, DEFAULT_CAP};
use wreathlab::CycleIndex;

use groups::parse_group;

#[derive(Parser)]
#[command(name = "wreathlab", version, about = "Cycle structure of random elements of wreath products")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for all random draws
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Largest number of objects any exhaustive enumeration may visit
    #[arg(long, global = true, env = "WREATHLAB_CAP", default_value_t = DEFAULT_CAP)]
    cap: u128,
    /// Worker threads for sampling (results do not depend on it)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report wall-clock times; output is then no longer reproducible
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Top {
    Symmetric,
    Cyclic,
}

#[derive(Subcommand)]
enum Command {
    /// Build, compose and print cycle indices
    #[command(subcommand)]
    CycleIndex(CycleIndexCmd),
    /// Draw wreath elements or cycle types
    #[command(subcommand)]
    Sample(SampleCmd),
    /// Limit laws: atom lists, draws and PMFs
    #[command(subcommand)]
    Limit(LimitCmd),
    /// The commuting-graph walk on partitions
    #[command(subcommand)]
    Chain(ChainCmd),
    /// Descents, inversions and cycle counts
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Exact cross-checks and bound experiments
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Args)]
struct GroupArg {
    /// Block group: S<k>, C<k> or @file.json
    #[arg(long)]
    gamma: String,
}

#[derive(Args)]
struct WreathArgs {
    #[command(flatten)]
    group: GroupArg,
    /// Number of blocks
    #[arg(long)]
    n: usize,
    /// Group acting on the blocks
    #[arg(long, value_enum, default_value_t = Top::Symmetric)]
    top: Top,
}

#[derive(Subcommand)]
enum CycleIndexCmd {
    /// Cycle index of the block group itself
    Group(GroupArg),
    /// Cycle index of Γⁿ ⋊ Sₙ (or ⋊ Cₙ)
    Wreath(WreathArgs),
    /// Cycle index of Γ × H acting on the grid
    Product {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Probability of one cycle type
    Prob {
        #[command(flatten)]
        wreath: WreathArgs,
        /// Cycle type, e.g. "1^2 2"
        #[arg(long = "type")]
        cycle_type: String,
    },
    /// Law of the number of cycles
    Gf(WreathArgs),
}

#[derive(Subcommand)]
enum SampleCmd {
    /// Uniform wreath elements with their induced permutations
    Element {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Cycle types through the indicator coupling
    Type {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// (C_1..C_B) for S_kⁿ ⋊ Sₙ
    Skn {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "trunc-B")]
        trunc_b: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// (C_1..C_B) for S_k × S_n on the grid
    Product {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "trunc-B")]
        trunc_b: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

#[derive(Args)]
struct SpecArgs {
    #[command(flatten)]
    group: GroupArg,
    /// Poissonization parameter in (0, 1], e.g. 1/2
    #[arg(long, default_value = "1")]
    t: String,
    #[arg(long = "trunc-B")]
    trunc_b: usize,
}

#[derive(Subcommand)]
enum LimitCmd {
    /// Atom list of the compound Poisson limit
    Spec(SpecArgs),
    /// Atom list for S_kⁿ ⋊ Sₙ as k, n → ∞
    Skn {
        #[arg(long = "trunc-B")]
        trunc_b: usize,
        /// Drop atoms whose mean contribution is below this
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
    },
    /// Draws of (A_1..A_B)
    Sample {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Marginal PMF of A_i, or joint PMF of (A_i, A_j)
    Pmf {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long = "support-max", default_value_t = 30)]
        support_max: usize,
    },
    /// Formulas (and optional draws) of the product-action limit
    Product {
        #[arg(long = "trunc-B")]
        trunc_b: usize,
        #[arg(long, default_value_t = 0)]
        count: usize,
    },
}

#[derive(Subcommand)]
enum ChainCmd {
    /// Independent single steps from one partition
    Step {
        /// Current state, e.g. "1^3 2"
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Visit counts of one trajectory
    Run {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        steps: usize,
        /// Starting partition (default 1^n)
        #[arg(long)]
        start: Option<String>,
    },
    /// Exact transition matrix
    Matrix {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct StatArgs {
    #[command(flatten)]
    group: GroupArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
}

#[derive(Subcommand)]
enum StatsCmd {
    /// Standardized descents against the normal law
    Descents(StatArgs),
    /// Standardized inversions against the normal law
    Inversions(StatArgs),
    /// Standardized cycle counts against the normal law
    Cycles(StatArgs),
    /// Exact means and variances
    Moments {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        n: usize,
    },
    /// Cycle-count moments of C_k
    CyclicMoments {
        #[arg(long)]
        k: usize,
    },
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long = "trunc-B")]
    trunc_b: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Exact law of (a_1..a_B) by enumeration
    Census {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        n: usize,
        /// Defaults to kn
        #[arg(long = "trunc-B")]
        trunc_b: Option<usize>,
    },
    /// Enumeration, exact coupling and cycle index agree
    Triangle {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        n: usize,
    },
    /// Coupling against the limit law, bound 2B/n
    TvWreath {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        n: usize,
        #[arg(long = "trunc-B")]
        trunc_b: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// S_kⁿ ⋊ Sₙ against infinite inner sequences
    TvSkn(BoundArgs),
    /// S_kⁿ ⋊ Sₙ against the independent-atom list
    SknSpec(BoundArgs),
    /// Grid action of S_k × S_n against its limit
    TvProduct(BoundArgs),
    /// Exact grid census against the truncated limit law
    ProductSmall {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "trunc-B")]
        trunc_b: usize,
        #[arg(long, default_value_t = 12)]
        cutoff: usize,
    },
    /// Cycle count of Γⁿ ⋊ H as a randomly stopped sum
    StoppedSum(WreathArgs),
}

/// What a command produced, in each format it supports.
struct Output {
    json: Value,
    text: String,
    csv: Option<String>,
}

impl Output {
    fn new(json: Value, text: String) -> Self {
        Output { json, text, csv: None }
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn rational(q: &BigRational) -> String {
    q.to_string()
}

fn positive(value: usize, name: &str) -> Result<usize> {
    if value == 0 {
        return Err(Error::InvalidArgument(format!("--{name} must be at least 1")));
    }
    Ok(value)
}

fn parse_t(s: &str) -> Result<BigRational> {
    s.trim().parse::<BigRational>().map_err(|_| Error::Parse(format!("t = `{s}`: expected a rational like 1/2")))
}

fn parse_partition(s: &str) -> Result<Partition> {
    s.parse()
}

fn number_of_partitions(n: usize) -> u128 {
    let mut p = vec![0u128; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for m in part..=n {
            p[m] = p[m].saturating_add(p[m - part]);
        }
    }
    p[n]
}

fn guard_terms(degree: usize, cap: u128) -> Result<()> {
    let size = number_of_partitions(degree);
    if size > cap {
        return Err(Error::CapExceeded { what: "cycle index terms", size, cap });
    }
    Ok(())
}

fn top_index(top: Top, n: usize) -> CycleIndex {
    match top {
        Top::Symmetric => CycleIndex::symmetric(n),
        Top::Cyclic => CycleIndex::cyclic(n),
    }
}

fn wreath_index(args: &WreathArgs, cap: u128) -> Result<(GroupSpec, CycleIndex)> {
    let gamma = parse_group(&args.group.gamma, cap)?;
    positive(args.n, "n")?;
    guard_terms(gamma.degree() * args.n, cap)?;
    let z = top_index(args.top, args.n).wreath_compose(&gamma.cycle_index());
    Ok((gamma, z))
}

fn index_output(z: &CycleIndex) -> Output {
    let mut json = z.to_json();
    json["polynomial"] = json!(z.to_string());
    let mut csv = String::from("type,num,den\n");
    for (m, c) in z.sorted_terms() {
        csv.push_str(&format!("{m},{},{}\n", c.numer(), c.denom()));
    }
    Output::new(json, z.to_string()).with_csv(csv)
}

fn counts_csv(header_len: usize, rows: &[Vec<u64>]) -> String {
    let header: Vec<String> = (1..=header_len).map(|i| format!("a{i}")).collect();
    let mut out = header.join(",") + "\n";
    for r in rows {
        out.push_str(&r.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn counts_output(label: Value, seed: u64, b: usize, rows: Vec<Vec<u64>>) -> Output {
    let text = rows
        .iter()
        .map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n");
    let csv = counts_csv(b, &rows);
    Output::new(json!({ "params": label, "seed": seed, "counts": rows }), text).with_csv(csv)
}

fn law_output(law: &BTreeMap<Vec<u32>, BigRational>, params: Value) -> Output {
    let entries: Vec<Value> = law
        .iter()
        .map(|(k, p)| json!({ "counts": k, "prob": rational(p) }))
        .collect();
    let mut text = String::new();
    let mut csv = String::from("counts,prob\n");
    for (k, p) in law {
        let key = k.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        text.push_str(&format!("{key}\t{p}\n"));
        csv.push_str(&format!("{key},{p}\n"));
    }
    Output::new(json!({ "params": params, "law": entries }), text.trim_end().to_string()).with_csv(csv)
}

fn bound_output(mut r: BoundReport, timing: bool) -> Output {
    let mut json = r.to_json();
    if !timing {
        json["runtime_ms"] = Value::Null;
        r.runtime_ms = 0;
    }
    let mut text = format!(
        "{}: empirical_tv {} mc_error {} bound {} pass {} seed {}",
        r.experiment,
        float(r.empirical_tv),
        float(r.mc_error),
        r.bound.map_or("n/a".into(), float),
        r.pass.map_or("n/a".into(), |p| p.to_string()),
        r.seed
    );
    if timing {
        text.push_str(&format!(" runtime_ms {}", r.runtime_ms));
    }
    Output::new(json, text)
}

fn moments_json(m: &MomentPair) -> Value {
    json!({
        "mean": m.mean_f64(),
        "variance": to_f64(&m.variance),
        "mean_exact": rational(&m.mean),
        "variance_exact": rational(&m.variance),
    })
}

fn cycle_index(cmd: &CycleIndexCmd, g: &Global) -> Result<Output> {
    match cmd {
        CycleIndexCmd::Group(a) => Ok(index_output(&parse_group(&a.gamma, g.cap)?.cycle_index())),
        CycleIndexCmd::Wreath(a) => Ok(index_output(&wreath_index(a, g.cap)?.1)),
        CycleIndexCmd::Product { left, right } => {
            let (l, r) = (parse_group(left, g.cap)?, parse_group(right, g.cap)?);
            guard_terms(l.degree() * r.degree(), g.cap)?;
            Ok(index_output(&l.cycle_index().product_compose(&r.cycle_index())))
        }
        CycleIndexCmd::Prob { wreath, cycle_type } => {
            let (_, z) = wreath_index(wreath, g.cap)?;
            let lambda = parse_partition(cycle_type)?;
            let p = z.prob_of_type(&lambda)?;
            let json = json!({ "type": lambda.to_string(), "num": p.numer().to_string(), "den": p.denom().to_string() });
            Ok(Output::new(json, rational(&p)))
        }
        CycleIndexCmd::Gf(a) => {
            let (_, z) = wreath_index(a, g.cap)?;
            let gf = z.cycles_gf();
            let coeffs: Vec<String> = gf.coeffs().iter().map(rational).collect();
            let mut csv = String::from("cycles,prob\n");
            for (j, c) in coeffs.iter().enumerate() {
                csv.push_str(&format!("{j},{c}\n"));
            }
            let text = coeffs.iter().enumerate().map(|(j, c)| format!("{j}\t{c}")).collect::<Vec<_>>().join("\n");
            let json = json!({ "pmf": coeffs, "mean": rational(&gf.mean()) });
            Ok(Output::new(json, text).with_csv(csv))
        }
    }
}

fn sample(cmd: &SampleCmd, g: &Global) -> Result<Output> {
    match cmd {
        SampleCmd::Element { group, n, count } => {
            let gamma = parse_group(&group.gamma, g.cap)?;
            positive(*n, "n")?;
            let draws = par_samples(*count, g.seed, |r| {
                let w = sample_uniform(&gamma, *n, r);
                let s = w.induced();
                (w, s)
            });
            let json_items: Vec<Value> = draws
                .iter()
                .map(|(w, s)| {
                    json!({
                        "element": w.to_string(),
                        "induced": s.images(),
                        "cycles": s.to_cycle_string(),
                        "type": s.cycle_type().to_string(),
                    })
                })
                .collect();
            let text = draws
                .iter()
                .map(|(w, s)| format!("{w} -> {}", s.to_cycle_string()))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output::new(json!({ "gamma": gamma.name(), "n": n, "seed": g.seed, "elements": json_items }), text))
        }
        SampleCmd::Type { group, n, count } => {
            let gamma = parse_group(&group.gamma, g.cap)?;
            positive(*n, "n")?;
            let sampler = WreathTypeSampler::new(&gamma, *n);
            let types: Vec<String> = par_samples(*count, g.seed, |r| sampler.sample(r).to_string());
            let json = json!({ "gamma": gamma.name(), "n": n, "seed": g.seed, "types": types });
            let csv = format!("type\n{}\n", types.join("\n"));
            Ok(Output::new(json, types.join("\n")).with_csv(csv))
        }
        SampleCmd::Skn { k, n, trunc_b, count } => {
            positive(*k, "k")?;
            positive(*n, "n")?;
            let rows = par_samples(*count, g.seed, |r| {
                sample_skn_type(*k, *n, *trunc_b, r).into_iter().map(u64::from).collect()
            });
            Ok(counts_output(json!({ "k": k, "n": n, "b": trunc_b }), g.seed, *trunc_b, rows))
        }
        SampleCmd::Product { k, n, trunc_b, count } => {
            positive(*k, "k")?;
            positive(*n, "n")?;
            let rows = par_samples(*count, g.seed, |r| {
                sample_product_coupled(*k, *n, *trunc_b, r).into_iter().map(u64::from).collect()
            });
            Ok(counts_output(json!({ "k": k, "n": n, "b": trunc_b }), g.seed, *trunc_b, rows))
        }
    }
}

fn limit(cmd: &LimitCmd, g: &Global) -> Result<Output> {
    let spec_of = |a: &SpecArgs| -> Result<_> {
        let gamma = parse_group(&a.group.gamma, g.cap)?;
        build_spec(&gamma, &parse_t(&a.t)?, a.trunc_b)
    };
    match cmd {
        LimitCmd::Spec(a) => {
            let spec = spec_of(a)?;
            let text = spec
                .atoms
                .iter()
                .map(|at| {
                    let coeffs: Vec<String> = at.coeffs.iter().map(|(i, c)| format!("{c}·A{i}")).collect();
                    let rate = at.exact_rate.as_ref().map_or_else(|| float(at.rate), rational);
                    format!("{}\trate {rate}\t{}", at.key, coeffs.join(" "))
                })
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output::new(spec.to_json(), text))
        }
        LimitCmd::Skn { trunc_b, eps } => {
            let spec = skn_limit_spec(*trunc_b, *eps)?;
            let text = format!("{} atoms, truncation bias {}", spec.atoms.len(), float(spec.truncation_bias));
            Ok(Output::new(spec.to_json(), text))
        }
        LimitCmd::Sample { spec, count } => {
            let s = spec_of(spec)?;
            let sampler = s.sampler();
            let rows = par_samples(*count, g.seed, |r| sampler.sample(r));
            Ok(counts_output(json!({ "gamma": spec.group.gamma, "t": spec.t, "b": spec.trunc_b }), g.seed, spec.trunc_b, rows))
        }
        LimitCmd::Pmf { spec, i, j, support_max } => {
            let s = spec_of(spec)?;
            let check = |x: usize| {
                if x == 0 || x > spec.trunc_b {
                    Err(Error::InvalidArgument(format!("coordinate {x} outside 1..={}", spec.trunc_b)))
                } else {
                    Ok(x)
                }
            };
            check(*i)?;
            match j {
                None => {
                    let pmf = s.marginal_pmf(*i, *support_max);
                    let text = pmf.iter().enumerate().map(|(x, p)| format!("{x}\t{}", float(*p))).collect::<Vec<_>>().join("\n");
                    let csv = std::iter::once("value,prob".to_string())
                        .chain(pmf.iter().enumerate().map(|(x, p)| format!("{x},{}", float(*p))))
                        .collect::<Vec<_>>()
                        .join("\n")
                        + "\n";
                    Ok(Output::new(json!({ "i": i, "pmf": pmf }), text).with_csv(csv))
                }
                Some(j) => {
                    check(*j)?;
                    if i == j {
                        return Err(Error::InvalidArgument("--i and --j must differ".into()));
                    }
                    let pmf = s.joint_pmf(*i, *j, *support_max);
                    let mut csv = format!("a{i},a{j},prob\n");
                    for (x, row) in pmf.iter().enumerate() {
                        for (y, p) in row.iter().enumerate() {
                            csv.push_str(&format!("{x},{y},{}\n", float(*p)));
                        }
                    }
                    let text = csv.trim_end().replace(',', "\t");
                    Ok(Output::new(json!({ "i": i, "j": j, "pmf": pmf }), text).with_csv(csv))
                }
            }
        }
        LimitCmd::Product { trunc_b, count } => {
            let spec = ProductActionSpec { b: *trunc_b };
            let formulas: Vec<String> = (1..=*trunc_b).map(|l| spec.formula(l)).collect();
            let sampler = ProductActionSampler::new(spec);
            let rows = par_samples(*count, g.seed, |r| sampler.sample(r));
            let mut text = formulas.join("\n");
            for r in &rows {
                text.push('\n');
                text.push_str(&r.iter().map(u64::to_string).collect::<Vec<_>>().join(" "));
            }
            let json = json!({ "b": trunc_b, "formulas": formulas, "seed": g.seed, "counts": rows });
            Ok(Output::new(json, text))
        }
    }
}

fn chain(cmd: &ChainCmd, g: &Global) -> Result<Output> {
    match cmd {
        ChainCmd::Step { lambda, count } => {
            let lambda = parse_partition(lambda)?;
            let next: Vec<String> = par_samples(*count, g.seed, |r| lumped_step(&lambda, r).to_string());
            let json = json!({ "from": lambda.to_string(), "seed": g.seed, "to": next });
            Ok(Output::new(json, next.join("\n")))
        }
        ChainCmd::Run { n, steps, start } => {
            positive(*n, "n")?;
            let start = match start {
                Some(s) => parse_partition(s)?,
                None => Partition::ones(*n),
            };
            let run = run_lumped(*n, *steps, &start, &mut chunk_rng(g.seed, 0))?;
            let occ: Vec<Value> = run
                .occupancy
                .iter()
                .map(|(p, c)| json!({ "state": p.to_string(), "visits": c }))
                .collect();
            let mut csv = String::from("state,visits\n");
            for (p, c) in &run.occupancy {
                csv.push_str(&format!("{p},{c}\n"));
            }
            let text = csv.lines().skip(1).map(|l| l.replace(',', "\t")).collect::<Vec<_>>().join("\n");
            let json = json!({
                "n": n,
                "steps": steps,
                "start": start.to_string(),
                "seed": g.seed,
                "final": run.trajectory.last().map(|p| p.to_string()),
                "occupancy": occ,
            });
            Ok(Output::new(json, text).with_csv(csv))
        }
        ChainCmd::Matrix { n } => {
            positive(*n, "n")?;
            let m = exact_lumped_matrix(*n, g.cap)?;
            let states: Vec<String> = m.states.iter().map(|p| p.to_string()).collect();
            let rows: Vec<Vec<String>> = m.entries.iter().map(|r| r.iter().map(rational).collect()).collect();
            let text = states
                .iter()
                .zip(&rows)
                .map(|(s, r)| format!("{s}\t{}", r.join("\t")))
                .collect::<Vec<_>>()
                .join("\n");
            let json = json!({ "n": n, "states": states, "entries": rows });
            Ok(Output::new(json, text).with_csv(m.to_csv()))
        }
    }
}

/// KS distance of the standardized values, both as drawn and after
/// uniform(-1/2, 1/2) smoothing of the integer lattice.
fn ks_output(statistic: &str, g: &Global, moments: &MomentPair, samples: &[f64]) -> Result<Output> {
    let (mean, sd) = (moments.mean_f64(), moments.sd_f64());
    let raw = clt_report(samples, mean, sd)?;
    let smoothed = clt_report(&jitter(samples, &mut chunk_rng(companion_seed(g.seed), 0)), mean, sd)?;
    let json = json!({
        "statistic": statistic,
        "mean": mean,
        "variance": to_f64(&moments.variance),
        "ks": smoothed.ks,
        "ks_unsmoothed": raw.ks,
        "ks_critical": raw.critical,
        "n_samples": raw.n_samples,
        "seed": g.seed,
    });
    let text = format!(
        "{statistic}: mean {} variance {} ks {} (unsmoothed {}, critical {}) n_samples {} seed {}",
        float(mean),
        float(to_f64(&moments.variance)),
        float(smoothed.ks),
        float(raw.ks),
        float(raw.critical),
        raw.n_samples,
        g.seed
    );
    Ok(Output::new(json, text))
}

fn stats(cmd: &StatsCmd, g: &Global) -> Result<Output> {
    match cmd {
        StatsCmd::Descents(a) | StatsCmd::Inversions(a) => {
            let gamma = parse_group(&a.group.gamma, g.cap)?;
            positive(a.n, "n")?;
            let (dm, im) = wreath_statistic_moments(&gamma, a.n, g.cap)?;
            let is_descents = matches!(cmd, StatsCmd::Descents(_));
            let values = par_samples(a.count, g.seed, |r| {
                let s = sample_uniform(&gamma, a.n, r).induced();
                if is_descents { descents(&s) as f64 } else { inversions(&s) as f64 }
            });
            if is_descents {
                ks_output("descents", g, &dm, &values)
            } else {
                ks_output("inversions", g, &im, &values)
            }
        }
        StatsCmd::Cycles(a) => {
            let gamma = parse_group(&a.group.gamma, g.cap)?;
            positive(a.n, "n")?;
            let sampler = WreathTypeSampler::new(&gamma, a.n);
            let values = par_samples(a.count, g.seed, |r| sampler.sample(r).num_parts() as f64);
            ks_output("cycles", g, &wreath_cycle_moments(&gamma.cycle_index(), a.n), &values)
        }
        StatsCmd::Moments { group, n } => {
            let gamma = parse_group(&group.gamma, g.cap)?;
            positive(*n, "n")?;
            let (d, i) = wreath_statistic_moments(&gamma, *n, g.cap)?;
            let c = wreath_cycle_moments(&gamma.cycle_index(), *n);
            let text = [("descents", &d), ("inversions", &i), ("cycles", &c)]
                .iter()
                .map(|(name, m)| format!("{name}\tmean {}\tvariance {}", m.mean, m.variance))
                .collect::<Vec<_>>()
                .join("\n");
            let json = json!({
                "gamma": gamma.name(),
                "n": n,
                "descents": moments_json(&d),
                "inversions": moments_json(&i),
                "cycles": moments_json(&c),
            });
            Ok(Output::new(json, text))
        }
        StatsCmd::CyclicMoments { k } => {
            positive(*k, "k")?;
            let m = cycle_count_moments_cyclic(*k);
            let second = &m.variance + &m.mean * &m.mean;
            let mut json = moments_json(&m);
            json["k"] = json!(k);
            json["second_moment_exact"] = json!(rational(&second));
            let mut text = format!("mean {}\tsecond moment {}\tvariance {}", m.mean, second, m.variance);
            let pp = prime_powers(*k);
            if *k > 1 && pp.len() == 1 {
                let (p, a) = pp[0];
                let closed_mean = mean_prime_power_closed(p, a);
                let closed_second = second_moment_prime_power_printed(p, a);
                json["prime_power"] = json!({
                    "p": p,
                    "a": a,
                    "closed_mean": rational(&closed_mean),
                    "closed_mean_agrees": closed_mean == m.mean,
                    "closed_second_moment": rational(&closed_second),
                    "closed_second_moment_agrees": closed_second == second,
                });
                text.push_str(&format!(
                    "\nclosed forms at {p}^{a}: mean {closed_mean} ({}), second moment {closed_second} ({})",
                    if closed_mean == m.mean { "agrees" } else { "differs" },
                    if closed_second == second { "agrees" } else { "differs" },
                ));
            }
            Ok(Output::new(json, text))
        }
    }
}

fn verify(cmd: &VerifyCmd, g: &Global) -> Result<Output> {
    match cmd {
        VerifyCmd::Census { group, n, trunc_b } => {
            let gamma = parse_group(&group.gamma, g.cap)?;
            positive(*n, "n")?;
            let b = trunc_b.unwrap_or(gamma.degree() * n);
            let d = census_wreath(&gamma, *n, b, g.cap)?;
            let law = d.exact_weights().expect("census is exact");
            Ok(law_output(law, json!({ "gamma": gamma.name(), "n": n, "b": b })))
        }
        VerifyCmd::Triangle { group, n } => {
            let gamma = parse_group(&group.gamma, g.cap)?;
            positive(*n, "n")?;
            let t = triangle(&gamma, *n, g.cap)?;
            let size = |d: &Distribution| d.support().len();
            let json = json!({
                "gamma": gamma.name(),
                "n": n,
                "census_equals_coupling": t.census == t.coupling,
                "coupling_equals_cycle_index": t.coupling == t.cycle_index,
                "all_equal": t.all_equal(),
                "support_size": size(&t.census),
            });
            let text = format!("{} wreath S{n}: all_equal {} ({} cycle types)", gamma.name(), t.all_equal(), size(&t.census));
            Ok(Output::new(json, text))
        }
        VerifyCmd::TvWreath { group, n, trunc_b, samples } => {
            let gamma = parse_group(&group.gamma, g.cap)?;
            positive(*n, "n")?;
            positive(*samples, "samples")?;
            Ok(bound_output(check_tv_bound_wreath(&gamma, *n, *trunc_b, *samples, g.seed)?, g.timing))
        }
        VerifyCmd::TvSkn(a) | VerifyCmd::SknSpec(a) | VerifyCmd::TvProduct(a) => {
            positive(a.k, "k")?;
            positive(a.n, "n")?;
            positive(a.samples, "samples")?;
            let r = match cmd {
                VerifyCmd::TvSkn(_) => check_tv_bound_skn(a.k, a.n, a.trunc_b, a.samples, g.seed)?,
                VerifyCmd::SknSpec(_) => check_skn_limit_spec(a.k, a.n, a.trunc_b, a.samples, g.seed)?,
                _ => check_product_bound(a.k, a.n, a.trunc_b, a.samples, g.seed)?,
            };
            Ok(bound_output(r, g.timing))
        }
        VerifyCmd::ProductSmall { k, n, trunc_b, cutoff } => {
            positive(*k, "k")?;
            positive(*n, "n")?;
            let size = wreathlab::arith::factorial(*k) * wreathlab::arith::factorial(*n);
            let size: u128 = size.try_into().unwrap_or(u128::MAX);
            if size > g.cap {
                return Err(Error::CapExceeded { what: "grid enumeration", size, cap: g.cap });
            }
            let tv = product_small_case_tv(*k, *n, *trunc_b, *cutoff)?;
            let json = json!({ "k": k, "n": n, "b": trunc_b, "cutoff": cutoff, "tv": tv });
            Ok(Output::new(json, format!("tv {}", float(tv))))
        }
        VerifyCmd::StoppedSum(a) => {
            let gamma = parse_group(&a.group.gamma, g.cap)?;
            positive(a.n, "n")?;
            guard_terms(gamma.degree() * a.n, g.cap)?;
            let r = stopped_sum_check(&gamma.cycle_index(), &top_index(a.top, a.n));
            let json = json!({
                "holds": r.holds,
                "mean_holds": r.mean_holds,
                "mean": rational(&r.mean),
                "composed": r.composed.coeffs().iter().map(rational).collect::<Vec<_>>(),
            });
            Ok(Output::new(json, format!("holds {} mean {}", r.holds, r.mean)))
        }
    }
}

fn run(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    let start = Instant::now();
    let out = match &cli.command {
        Command::CycleIndex(c) => cycle_index(c, g),
        Command::Sample(c) => sample(c, g),
        Command::Limit(c) => limit(c, g),
        Command::Chain(c) => chain(c, g),
        Command::Stats(c) => stats(c, g),
        Command::Verify(c) => verify(c, g),
    }?;
    if g.timing {
        eprintln!("elapsed_ms {}", start.elapsed().as_millis());
    }
    Ok(out)
}

fn render(out: Output, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&out.json).expect("JSON values serialize")),
        Format::Text => Ok(out.text),
        Format::Csv => out
            .csv
            .map(|s| s.trim_end().to_string())
            .ok_or_else(|| Error::InvalidArgument("this command has no CSV output".into())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.global.threads {
        Some(0) => Err(Error::InvalidArgument("--threads must be at least 1".into())),
        Some(t) => with_threads(t, || run(&cli)),
        None => run(&cli),
    };
    match result.and_then(|out| render(out, cli.global.format)) {
        Ok(s) => {
            // a closed pipe downstream (e.g. `| head`) is not an error
            let _ = writeln!(std::io::stdout().lock(), "{s}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_cap_exceeded() { 2 } else { 1 })
        }
    }
}
