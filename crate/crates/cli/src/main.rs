use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lozenge_core::enumerate::{tgf_symmetric, tgf_with, Engine};
use lozenge_core::exactalg::LaurentPoly;
use lozenge_core::identities::{
    calibrate_all, check_kuo, check_lemma_formula, check_macmahon, check_ratio, check_reciprocity,
    check_recurrence_base, check_recurrence_q, check_recurrence_s, check_symmetric_decomposition, check_tileability,
    kuo_selection_q, kuo_selection_s, random_kuo_cases, random_selection, run_suite, BaseRecurrence, CheckError,
    CheckReport, Dents, KuoVariant, LemmaKind, LemmaParams, RatioKind, SuiteSizes, Verdict,
};
use lozenge_core::qformulas::{
    pp_q, q_fact, q_int, ratio_q, ratio_qprime, ratio_s, ratio_sprime, ratio_sym, tgf_p, tgf_pprime, tgf_s_base,
    tgf_sprime_base, BaseDents, Quartered, SpecError, TwoSided,
};
use lozenge_core::regions::{
    build_p, build_pprime_with, build_q, build_qprime_with, build_s, build_s_base, build_sprime_base_with,
    build_sprime_with, CalibrationTable, Family, Region, RegionError,
};

#[derive(Parser)]
#[command(name = "lozenge", version, about = "Weighted lozenge tilings of dented semi-hexagons and quartered hexagons")]
struct Cli {
    /// Calibration table to use instead of the built-in one.
    #[arg(long, global = true)]
    calibration: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct RegionArgs {
    /// Region family: S, Sprime, Q, Qprime, Sbase, SprimeBase, P, Pprime.
    #[arg(long, default_value = "S")]
    family: String,
    #[arg(long, default_value_t = 0)]
    x: i64,
    /// Left dents (two-sided families), comma separated.
    #[arg(long, value_delimiter = ',')]
    left: Vec<i64>,
    /// Right dents (two-sided families), comma separated.
    #[arg(long, value_delimiter = ',')]
    right: Vec<i64>,
    /// Dents of a quartered hexagon, comma separated.
    #[arg(long, value_delimiter = ',')]
    dents: Vec<i64>,
    /// Base-dented families: number of up triangles left on the base after denting.
    #[arg(long, default_value_t = 0)]
    a: i64,
    /// Base-dented families: number of base dents.
    #[arg(long, default_value_t = 0)]
    b: i64,
    /// Base-dented families: dent positions, comma separated.
    #[arg(long, value_delimiter = ',')]
    s: Vec<i64>,
    /// Halved hexagons: the side parameter.
    #[arg(long, default_value_t = 0)]
    n: i64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Brute,
    Fast,
    Naive,
    Symmetric,
}

#[derive(Subcommand)]
enum Command {
    /// Build a region and print it as ASCII art or JSON.
    Region(RegionArgs),
    /// Tiling generating function of a region.
    Tgf {
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, value_enum, default_value = "brute")]
        engine: EngineArg,
    },
    /// Evaluate a closed formula: pp-q A B C, q-int N, q-fact N, ratio-s X Y, ratio-sprime X Y,
    /// ratio-q X Y, ratio-qprime X Y, ratio-sym X Y, sbase, sprimebase, p X N, pprime X N.
    Formula {
        name: String,
        /// Second width for ratio formulas when not given positionally.
        #[arg(long)]
        y: Option<i64>,
        args: Vec<i64>,
        #[command(flatten)]
        region: RegionArgs,
    },
    /// Run one identity check. Exits with status 1 when the check fails.
    Check {
        /// ratio-s, ratio-sprime, ratio-q, ratio-qprime, ratio-sym, symmetric-decomposition,
        /// lemma-sbase, lemma-sprimebase, lemma-p, lemma-pprime, macmahon, reciprocity,
        /// tileability, kuo-s, kuo-q, kuo-random, recurrence-s, recurrence-q, recurrence-sbase, recurrence-p.
        identity: String,
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = 1)]
        y: i64,
        /// MacMahon box sides.
        #[arg(long, value_delimiter = ',')]
        box_sides: Vec<i64>,
        /// Condensation variant for `kuo`: balanced, plus1 or plus2.
        #[arg(long)]
        variant: Option<String>,
        /// Number of random condensation cases.
        #[arg(long, default_value_t = 30)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Recompute the weight-scheme calibration and print (or write) the table.
    Calibrate {
        #[arg(long, default_value_t = 3)]
        budget: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full acceptance matrix.
    Suite {
        /// Much smaller sweeps.
        #[arg(long)]
        small: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Check(CheckError),
}

impl From<CheckError> for CliError {
    fn from(e: CheckError) -> Self {
        CliError::Check(e)
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Check(e.into())
    }
}

impl From<RegionError> for CliError {
    fn from(e: RegionError) -> Self {
        CliError::Check(e.into())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn family(r: &RegionArgs) -> Result<Family, CliError> {
    Family::parse(&r.family).ok_or_else(|| usage(format!("unknown family {:?}", r.family)))
}

fn two_sided(r: &RegionArgs) -> Result<TwoSided, CliError> {
    Ok(TwoSided::new(r.left.clone(), r.right.clone())?)
}

fn quartered(r: &RegionArgs) -> Result<Quartered, CliError> {
    Ok(Quartered::new(r.dents.clone())?)
}

fn base(r: &RegionArgs) -> Result<BaseDents, CliError> {
    Ok(BaseDents::new(r.a, r.b, r.s.clone())?)
}

fn build(r: &RegionArgs, table: &CalibrationTable) -> Result<Region, CliError> {
    Ok(match family(r)? {
        Family::S => build_s(r.x, &two_sided(r)?)?,
        Family::Sprime => build_sprime_with(r.x, &two_sided(r)?, table)?,
        Family::Q => build_q(r.x, &quartered(r)?)?,
        Family::Qprime => build_qprime_with(r.x, &quartered(r)?, table)?,
        Family::Sbase => build_s_base(&base(r)?)?,
        Family::SprimeBase => build_sprime_base_with(&base(r)?, table)?,
        Family::P => build_p(r.x, r.n)?,
        Family::Pprime => build_pprime_with(r.x, r.n, table)?,
    })
}

fn args_n<const N: usize>(name: &str, args: &[i64]) -> Result<[i64; N], CliError> {
    args.try_into().map_err(|_| usage(format!("{name} takes {N} integer arguments, got {}", args.len())))
}

fn formula(name: &str, args: &[i64], r: &RegionArgs) -> Result<String, CliError> {
    let text = match name {
        "pp-q" => {
            let [a, b, c] = args_n::<3>(name, args)?;
            let f = pp_q(a, b, c);
            f.to_laurent().map(|p| p.to_string()).unwrap_or_else(|| f.to_string())
        }
        "q-int" => q_int(args_n::<1>(name, args)?[0]).to_string(),
        "q-fact" => q_fact(args_n::<1>(name, args)?[0]).to_string(),
        "ratio-s" | "ratio-sprime" => {
            let [x, y] = args_n::<2>(name, args)?;
            let spec = two_sided(r)?;
            let f = if name == "ratio-s" { ratio_s(x, y, &spec) } else { ratio_sprime(x, y, &spec) };
            f.to_string()
        }
        "ratio-q" | "ratio-qprime" => {
            let [x, y] = args_n::<2>(name, args)?;
            let spec = quartered(r)?;
            let f = if name == "ratio-q" { ratio_q(x, y, &spec) } else { ratio_qprime(x, y, &spec) };
            f.to_string()
        }
        "ratio-sym" => {
            let [x, y] = args_n::<2>(name, args)?;
            ratio_sym(x, y, &r.dents)?.to_string()
        }
        "sbase" => tgf_s_base(&base(r)?).to_string(),
        "sprimebase" => tgf_sprime_base(&base(r)?).to_string(),
        "p" => {
            let [x, n] = args_n::<2>(name, args)?;
            tgf_p(x, n).to_string()
        }
        "pprime" => {
            let [x, n] = args_n::<2>(name, args)?;
            tgf_pprime(x, n).to_string()
        }
        other => return Err(usage(format!("unknown formula {other:?}"))),
    };
    Ok(text)
}

fn dents_for(r: &RegionArgs) -> Result<Dents, CliError> {
    match family(r)? {
        Family::S | Family::Sprime => Ok(Dents::TwoSided(two_sided(r)?)),
        _ => Ok(Dents::Quartered(quartered(r)?)),
    }
}

fn check(
    identity: &str,
    r: &RegionArgs,
    y: i64,
    box_sides: &[i64],
    count: usize,
    seed: u64,
    table: &CalibrationTable,
) -> Result<Vec<CheckReport>, CliError> {
    let x = r.x;
    let ratio = |kind: RatioKind, d: Dents| -> Result<Vec<CheckReport>, CliError> {
        Ok(vec![check_ratio(kind, x, y, &d, table)?])
    };
    match identity {
        "ratio-s" => ratio(RatioKind::S, Dents::TwoSided(two_sided(r)?)),
        "ratio-sprime" => ratio(RatioKind::Sprime, Dents::TwoSided(two_sided(r)?)),
        "ratio-q" => ratio(RatioKind::Q, Dents::Quartered(quartered(r)?)),
        "ratio-qprime" => ratio(RatioKind::Qprime, Dents::Quartered(quartered(r)?)),
        "ratio-sym" => ratio(RatioKind::Sym, Dents::Quartered(quartered(r)?)),
        "symmetric-decomposition" => Ok(vec![check_symmetric_decomposition(x, &r.dents)?]),
        "lemma-sbase" => Ok(vec![check_lemma_formula(LemmaKind::Sbase, &LemmaParams::Base(base(r)?), table)?]),
        "lemma-sprimebase" => {
            Ok(vec![check_lemma_formula(LemmaKind::SprimeBase, &LemmaParams::Base(base(r)?), table)?])
        }
        "lemma-p" => Ok(vec![check_lemma_formula(LemmaKind::P, &LemmaParams::Halved { x, n: r.n }, table)?]),
        "lemma-pprime" => Ok(vec![check_lemma_formula(LemmaKind::Pprime, &LemmaParams::Halved { x, n: r.n }, table)?]),
        "macmahon" => {
            let [a, b, c] = args_n::<3>("macmahon --box-sides", box_sides)?;
            Ok(vec![check_macmahon(a, b, c)])
        }
        "reciprocity" => Ok(vec![check_reciprocity(x, y, &quartered(r)?)]),
        "tileability" => Ok(vec![check_tileability(x, &dents_for(r)?)?]),
        "kuo-s" => {
            let (region, sel) = kuo_selection_s(x, &two_sided(r)?)?;
            Ok(vec![check_kuo(&region, &sel)?])
        }
        "kuo-q" => {
            let (region, sel) = kuo_selection_q(x, &quartered(r)?)?;
            Ok(vec![check_kuo(&region, &sel)?])
        }
        "kuo-random" => random_kuo_cases(count, seed)
            .iter()
            .map(|(region, sel)| check_kuo(region, sel).map_err(CliError::from))
            .collect(),
        "recurrence-s" => Ok(vec![check_recurrence_s(x, &two_sided(r)?)?]),
        "recurrence-q" => Ok(vec![check_recurrence_q(x, &quartered(r)?)?]),
        "recurrence-sbase" => Ok(vec![check_recurrence_base(&BaseRecurrence::Sbase(base(r)?))?]),
        "recurrence-p" => Ok(vec![check_recurrence_base(&BaseRecurrence::P { x, n: r.n })?]),
        other => Err(usage(format!("unknown identity {other:?}"))),
    }
}

/// Condensation on the region given by the flags. When the region's up excess
/// matches the variant a seeded random boundary selection is used; otherwise the
/// fixed selections used for the recurrences (two-sided with plus2, quartered
/// with plus1) fill dents first.
fn kuo(r: &RegionArgs, variant: Option<&str>, seed: u64, table: &CalibrationTable) -> Result<CheckReport, CliError> {
    let variant = match variant {
        Some(v) => KuoVariant::parse(v).ok_or_else(|| usage(format!("unknown variant {v:?}")))?,
        None => KuoVariant::Balanced,
    };
    let region = build(r, table)?;
    let excess = region.up_count() as i64 - region.down_count() as i64;
    let wanted = match variant {
        KuoVariant::Balanced => 0,
        KuoVariant::Plus1 => 1,
        KuoVariant::Plus2 => 2,
    };
    if excess == wanted {
        let sel = random_selection(&region, variant, seed)
            .ok_or_else(|| usage("no valid boundary selection found for this region"))?;
        return Ok(check_kuo(&region, &sel)?);
    }
    let (filled, sel) = match (family(r)?, variant) {
        (Family::S, KuoVariant::Plus2) => kuo_selection_s(r.x, &two_sided(r)?)?,
        (Family::Q, KuoVariant::Plus1) => kuo_selection_q(r.x, &quartered(r)?)?,
        _ => return Err(usage(format!("region has up excess {excess}, {variant:?} needs {wanted}"))),
    };
    Ok(check_kuo(&filled, &sel)?)
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let table = match &cli.calibration {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            CalibrationTable::from_json(&text).map_err(|e| usage(format!("bad calibration table: {e}")))?
        }
        None => CalibrationTable::builtin(),
    };
    match &cli.command {
        Command::Region(r) => {
            let region = build(r, &table)?;
            if cli.json {
                println!("{}", region.to_json());
            } else {
                print!("{}", region.render_ascii());
            }
            Ok(true)
        }
        Command::Tgf { region, engine } => {
            let reg = build(region, &table)?;
            let poly: LaurentPoly = match engine {
                EngineArg::Brute => tgf_with(&reg, Engine::Brute),
                EngineArg::Fast => tgf_with(&reg, Engine::Fast),
                EngineArg::Naive => tgf_with(&reg, Engine::Naive),
                EngineArg::Symmetric => tgf_symmetric(&reg),
            }
            .map_err(|e| usage(e.to_string()))?;
            if cli.json {
                println!("{}", serde_json::json!({"family": reg.family.name(), "params": reg.params, "tgf": poly}));
            } else {
                println!("{poly}");
            }
            Ok(true)
        }
        Command::Formula { name, args, region, y } => {
            let args = match (name.starts_with("ratio-"), args.is_empty(), y) {
                (true, true, Some(y)) => vec![region.x, *y],
                _ => args.clone(),
            };
            let text = formula(name, &args, region)?;
            if cli.json {
                println!("{}", serde_json::json!({"formula": name, "args": args, "value": text}));
            } else {
                println!("{text}");
            }
            Ok(true)
        }
        Command::Check { identity, region, y, box_sides, variant, count, seed } => {
            let reports = if identity == "kuo" {
                vec![kuo(region, variant.as_deref(), *seed, &table)?]
            } else {
                check(identity, region, *y, box_sides, *count, *seed, &table)?
            };
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialise"));
            } else {
                for r in &reports {
                    println!("{}", r.summary());
                }
            }
            Ok(reports.iter().all(|r| r.verdict != Verdict::Fail))
        }
        Command::Calibrate { budget, out } => {
            let (new_table, outcomes) = calibrate_all(*budget, &table);
            for o in &outcomes {
                eprintln!("{}", o.report.summary());
            }
            write_or_print(out, &new_table.to_json())?;
            Ok(true)
        }
        Command::Suite { small, out } => {
            let sizes = if *small { SuiteSizes::small() } else { SuiteSizes::default() };
            let report = run_suite(&sizes, &table);
            if cli.json || out.is_some() {
                write_or_print(out, &report.to_json())?;
            }
            if !cli.json {
                for c in &report.criteria {
                    println!("{:>2} {:<12} {}", c.criterion, c.verdict.as_str(), c.title);
                }
            }
            Ok(!report.any_fail())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Check(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
