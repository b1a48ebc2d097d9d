//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 theorem-violation
//! flag (an implementation bug signal — the theorems are proved, so a
//! violating report means the artifact, not the mathematics, is wrong).

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::directions::{
    directions_of_function, directions_of_points, FuncTable, FuncTableFile, PointSet,
};
use crate::field::{build_field, Elem, FieldCtx, FieldSpec};
use crate::linearized::{detect_frobenius_monomial, detect_linearized};
use crate::report::{
    canonical_json, emit, AnalyzeReport, DirectionsQuery, OutputFormat, Payload, ReportEnvelope,
};
use crate::search::{
    corollary_census, small_doubling_sampler, verify_directions_theorem, verify_mcconnel_with,
    SamplerStrategy,
};
use crate::sets::{doubling_report, subgroup_by_index, MulSet};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "dirlab", version, about = "Direction sets, product sets, and quotient searches over GF(p^n)")]
pub struct Cli {
    /// Field spec file (lines p=…, n=…, optional modulus=c0,c1,…).
    #[arg(long, global = true)]
    pub field: Option<PathBuf>,
    /// Characteristic (inline alternative to --field).
    #[arg(long, global = true)]
    pub p: Option<u32>,
    /// Extension degree.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Modulus coefficients c0,c1,…,cn (constant term first, monic).
    #[arg(long, global = true)]
    pub modulus: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the search (also DIRLAB_WORKERS).
    #[arg(long, global = true, env = "DIRLAB_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// RNG seed; required when a strategy draws random elements.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Emit canonical JSON (volatile fields stripped, compact).
    #[arg(long, global = true)]
    pub canonical: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Text,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Text => OutputFormat::Text,
        }
    }
}

/// One way to name a subset of F_q^*.
#[derive(Debug, Args)]
pub struct SetArgs {
    /// Explicit element codes, e.g. "1,2,4".
    #[arg(long)]
    pub set: Option<String>,
    /// The subgroup of this index.
    #[arg(long)]
    pub subgroup_index: Option<u32>,
    /// The coset a·K as "a:d" with K the index-d subgroup.
    #[arg(long)]
    pub coset: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate all f with f(0)=0 whose difference quotients lie in D.
    Search {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Search plus cross-check against the Frobenius-monomial oracle.
    VerifyMcconnel {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Exhaustive sweep of all tables with f(0)=0 (guarded to q ≤ 9).
    VerifyDirections,
    /// Direction-set census over all linearized polynomials.
    Census,
    /// Build small-doubling candidate sets and verify the survivors.
    SampleDoubling {
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long)]
        subgroup_index: u32,
        /// Explicit extra element codes for subgroup-plus-points.
        #[arg(long)]
        extra: Option<String>,
        /// Number of random extra elements to draw (needs --seed).
        #[arg(long, default_value_t = 0)]
        random_extra: u32,
        /// Explicit coset representatives for coset-union.
        #[arg(long)]
        cosets: Option<String>,
        /// Number of random coset representatives to draw (needs --seed).
        #[arg(long, default_value_t = 0)]
        random_cosets: u32,
    },
    /// Direction set of a function table or point set file.
    Directions {
        /// Function table JSON: {"p":…,"n":…,"values":[…]}.
        #[arg(long)]
        func: Option<PathBuf>,
        /// Point set JSON: [[x,y],…].
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Linearized / Frobenius-monomial verdicts and D_f for a function.
    Analyze {
        #[arg(long)]
        func: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    SubgroupPlusPoints,
    CosetUnion,
}

fn parse_codes(s: &str) -> Result<Vec<Elem>> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<Elem>()
                .map_err(|e| Error::Parse(format!("bad element code {c:?}: {e}")))
        })
        .collect()
}

impl Cli {
    fn field_spec(&self) -> Result<Option<FieldSpec>> {
        match (&self.field, self.p, self.n) {
            (Some(path), None, None) => {
                let text = std::fs::read_to_string(path)?;
                Ok(Some(FieldSpec::parse(&text)?))
            }
            (None, Some(p), Some(n)) => {
                let modulus = self.modulus.as_deref().map(parse_codes).transpose()?;
                Ok(Some(FieldSpec { p, n, modulus }))
            }
            (None, None, None) => Ok(None),
            (Some(_), _, _) => Err(Error::Parse(
                "--field conflicts with --p/--n; pass exactly one field source".into(),
            )),
            _ => Err(Error::Parse("both --p and --n are required inline".into())),
        }
    }

    fn require_ctx(&self) -> Result<Arc<FieldCtx>> {
        let spec = self.field_spec()?.ok_or_else(|| {
            Error::Parse("a field is required: --field <path> or --p <p> --n <n>".into())
        })?;
        build_field(spec)
    }
}

fn resolve_set(ctx: &Arc<FieldCtx>, args: &SetArgs) -> Result<MulSet> {
    match (&args.set, args.subgroup_index, &args.coset) {
        (Some(codes), None, None) => MulSet::from_codes(ctx, &parse_codes(codes)?),
        (None, Some(d), None) => subgroup_by_index(ctx, d),
        (None, None, Some(spec)) => {
            let (a, d) = spec
                .split_once(':')
                .ok_or_else(|| Error::Parse("--coset expects a:d".into()))?;
            let a: Elem = a
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad coset representative: {e}")))?;
            let d: u32 = d
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad coset index: {e}")))?;
            let k = subgroup_by_index(ctx, d)?;
            crate::sets::product_set(&MulSet::from_codes(ctx, &[a])?, &k)
        }
        _ => Err(Error::Parse(
            "pass exactly one of --set, --subgroup-index, --coset".into(),
        )),
    }
}

fn load_func(cli: &Cli, path: &PathBuf) -> Result<(Arc<FieldCtx>, FuncTable)> {
    let text = std::fs::read_to_string(path)?;
    let file: FuncTableFile = serde_json::from_str(&text)?;
    let ctx = match cli.field_spec()? {
        Some(spec) => {
            if spec.p != file.p || spec.n != file.n {
                return Err(Error::Parse(format!(
                    "function file is over GF({}^{}), but the field flags say GF({}^{})",
                    file.p, file.n, spec.p, spec.n
                )));
            }
            build_field(spec)?
        }
        None => build_field(FieldSpec::new(file.p, file.n))?,
    };
    let table = FuncTable::new(&ctx, file.values)?;
    Ok((ctx, table))
}

fn command_echo() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn execute(cli: &Cli) -> Result<ReportEnvelope> {
    let workers = cli.workers.max(1);
    match &cli.command {
        Command::Search { set } => {
            let ctx = cli.require_ctx()?;
            let d = resolve_set(&ctx, set)?;
            let report = verify_mcconnel_with(&d, workers, false)?;
            Ok(ReportEnvelope::new(ctx.spec().clone(), command_echo(), Payload::Search(report)))
        }
        Command::VerifyMcconnel { set } => {
            let ctx = cli.require_ctx()?;
            let d = resolve_set(&ctx, set)?;
            let report = verify_mcconnel_with(&d, workers, true)?;
            Ok(ReportEnvelope::new(ctx.spec().clone(), command_echo(), Payload::Search(report)))
        }
        Command::VerifyDirections => {
            let ctx = cli.require_ctx()?;
            let sweep = verify_directions_theorem(&ctx)?;
            Ok(ReportEnvelope::new(
                ctx.spec().clone(),
                command_echo(),
                Payload::DirectionsSweep(sweep),
            ))
        }
        Command::Census => {
            let ctx = cli.require_ctx()?;
            let census = corollary_census(&ctx)?;
            Ok(ReportEnvelope::new(ctx.spec().clone(), command_echo(), Payload::Census(census)))
        }
        Command::SampleDoubling {
            strategy,
            subgroup_index,
            extra,
            random_extra,
            cosets,
            random_cosets,
        } => {
            let ctx = cli.require_ctx()?;
            let strategy = match strategy {
                StrategyArg::SubgroupPlusPoints => SamplerStrategy::SubgroupPlusPoints {
                    index: *subgroup_index,
                    extra: extra.as_deref().map(parse_codes).transpose()?.unwrap_or_default(),
                    random_extra: *random_extra,
                },
                StrategyArg::CosetUnion => SamplerStrategy::CosetUnion {
                    index: *subgroup_index,
                    reps: cosets.as_deref().map(parse_codes).transpose()?.unwrap_or_default(),
                    random_cosets: *random_cosets,
                },
            };
            let randomized = *random_extra > 0 || *random_cosets > 0;
            let seed = match (cli.seed, randomized) {
                (Some(s), _) => s,
                (None, false) => 0,
                (None, true) => {
                    return Err(Error::Parse(
                        "--seed is required when drawing random elements".into(),
                    ))
                }
            };
            let reports = small_doubling_sampler(&ctx, &strategy, seed, workers)?;
            Ok(ReportEnvelope::new(
                ctx.spec().clone(),
                command_echo(),
                Payload::SampleDoubling { reports },
            ))
        }
        Command::Directions { func, points } => match (func, points) {
            (Some(path), None) => {
                let (ctx, table) = load_func(cli, path)?;
                let d = directions_of_function(&table);
                Ok(ReportEnvelope::new(
                    ctx.spec().clone(),
                    command_echo(),
                    Payload::Directions(DirectionsQuery {
                        directions: d.codes(),
                        infinity: d.has_infinity(),
                    }),
                ))
            }
            (None, Some(path)) => {
                let ctx = cli.require_ctx()?;
                let text = std::fs::read_to_string(path)?;
                let pairs: Vec<(Elem, Elem)> = serde_json::from_str(&text)?;
                let u = PointSet::new(&ctx, pairs)?;
                let d = directions_of_points(&u)?;
                Ok(ReportEnvelope::new(
                    ctx.spec().clone(),
                    command_echo(),
                    Payload::Directions(DirectionsQuery {
                        directions: d.codes(),
                        infinity: d.has_infinity(),
                    }),
                ))
            }
            _ => Err(Error::Parse("pass exactly one of --func, --points".into())),
        },
        Command::Analyze { func } => {
            let (ctx, table) = load_func(cli, func)?;
            let d = directions_of_function(&table);
            let doubling = d.as_mul_set().ok().map(|m| doubling_report(&m)).transpose()?;
            let report = AnalyzeReport {
                directions: d.codes(),
                direction_count: d.len() as u32,
                linearized_coeffs: detect_linearized(&table).map(|l| l.coeffs().to_vec()),
                frobenius_monomial: detect_frobenius_monomial(&table),
                doubling,
            };
            Ok(ReportEnvelope::new(ctx.spec().clone(), command_echo(), Payload::Analyze(report)))
        }
    }
}

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version on stdout with exit 0 semantics
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(envelope) => {
            let rendered = if cli.canonical {
                canonical_json(&envelope)
            } else {
                emit(&envelope, cli.format.into())
            };
            let rendered = match rendered {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("dirlab: {e}");
                    return 1;
                }
            };
            let write_result = match &cli.out {
                Some(path) => std::fs::write(path, rendered.as_bytes()),
                None => {
                    println!("{rendered}");
                    Ok(())
                }
            };
            if let Err(e) = write_result {
                eprintln!("dirlab: {e}");
                return 1;
            }
            if envelope.status == "violation" {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("dirlab: {e}");
            1
        }
    }
}
