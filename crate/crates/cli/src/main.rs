mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use unitlat::buchmann_pohst::{bp_reduce, relation_norm_check, BPOutput, BPParams};
use unitlat::cyclotomic::{unit_lattice, CyclotomicReport};
use unitlat::estimator::{self, EstimateRow, FieldProfile, ResourceEstimate};
use unitlat::lattice::BasisMatrix;
use unitlat::linalg::{format_rational, parse_rational, rat_to_f64};
use unitlat::recovery::{
    self, precision_gap_report, recover_baseline, recover_with_sublattice, BaselineOutcome, PrecisionGap,
    RecoveryProblem, RecoveryReport,
};
use unitlat::reduction::{self, lll};
use unitlat::ring::{OKMatrix, RingDescriptor, RingKind};
use unitlat::sampler::{verify_sampler_contract, DualSampler, SamplerConfig, SamplerReport};
use unitlat::{FixedPointVector, MatrixJson};

use output::{Format, Provenance};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] unitlat::Error),
    #[error("{0}")]
    Input(String),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(unitlat::Error::InsufficientSamples { .. }) => 2,
            CliError::Lib(unitlat::Error::ContractViolation(_)) | CliError::Verify(_) => 3,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "unitlat",
    version,
    about = "Exact lattice tools for recovering unit lattices from noisy dual samples",
    long_about = "Exact lattice tools for recovering unit lattices from noisy dual samples.\n\n\
        Exit codes: 0 success, 1 input or parameter error, 2 too few independent samples \
        (retry with another seed), 3 a bound or --verify check failed."
)]
struct Cli {
    /// Seed for every random choice; equal seeds give byte-identical output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Working precision in bits for fixed-point samples and interval logs.
    #[arg(long, global = true, env = "UNITLAT_PRECISION_BITS", default_value_t = 128)]
    precision_bits: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Re-check the result exactly and exit with code 3 if the check fails.
    #[arg(long, global = true)]
    verify: bool,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Recover a hidden lattice L from noisy dual samples and a sublattice M.
    ///
    /// Each sample is Babai-rounded onto M*; the Hermite form of the rounded
    /// coordinates spans L* inside M*, its Smith form gives [L : M], and
    /// B_L = (Hᵗ)⁻¹·B_M. The baseline mode runs Buchmann-Pohst on the raw
    /// samples instead and reports when the sample precision is too low.
    Recover(RecoverArgs),
    /// Logical-qubit estimates, generic and cyclotomic.
    ///
    /// Every implied constant is set to 1, so the counts are orders of
    /// magnitude rather than precise figures.
    Estimate(EstimateArgs),
    /// LLL over Z, Z[i] or Z[zeta3], plus Hermite and Smith normal forms.
    Reduce(ReduceArgs),
    /// Buchmann-Pohst: an exact lattice basis from approximate generators.
    Bp(BpArgs),
    /// Draw noisy dual-lattice points, one JSON object per line.
    ///
    /// Points come from a truncated discrete Gaussian on L*, are perturbed
    /// within delta·λ₁(L*) and rounded to --precision-bits fractional bits.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RecoverMode {
    Sublattice,
    Baseline,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("source").required(true).args(["synthetic", "cyclotomic", "instance"])))]
struct RecoverArgs {
    /// Plant a random L with a sublattice M of the given index.
    #[arg(long)]
    synthetic: bool,
    #[arg(long, default_value_t = 4, requires = "synthetic")]
    dim: usize,
    #[arg(long, default_value_t = 6, requires = "synthetic")]
    index: u64,
    /// Noise as a fraction of the decoding radius of M*. Values of 1 or more
    /// skip the decoding check and may fail.
    #[arg(long, default_value = "9/10", requires = "synthetic")]
    noise: String,
    /// Unit lattice of the real cyclotomic field of this conductor, spanned
    /// by cyclotomic units.
    #[arg(long)]
    cyclotomic: Option<u64>,
    /// JSON instance with b_m, b_l, sampler and the bounds, optionally wrapped
    /// as {"mode", "instance", "seed"}; the wrapper's mode and seed win.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RecoverMode::Sublattice)]
    mode: RecoverMode,
    /// Override the number of samples.
    #[arg(long)]
    k: Option<usize>,
    /// Sample mantissa width for the baseline (defaults to --precision-bits).
    #[arg(long)]
    available_bits: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
struct EstimateArgs {
    /// Unit rank(s) of a generic field; comma separated for a sweep.
    #[arg(long, value_delimiter = ',', requires = "log_d")]
    m: Vec<u64>,
    /// log2 of the discriminant for --m.
    #[arg(long = "logD", id = "log_d")]
    log_d: Option<f64>,
    /// Conductor(s) of cyclotomic fields; comma separated for a sweep.
    #[arg(long, value_delimiter = ',')]
    cyclotomic: Vec<u64>,
    /// Kummer-type field of degree N with log2 discriminant LOGD.
    #[arg(long, num_args = 2, value_names = ["N", "LOGD"])]
    kummer: Vec<f64>,
    /// Also report the generic count on each cyclotomic-shaped profile.
    #[arg(long)]
    compare: bool,
    /// log2 of the target failure probability.
    #[arg(long, default_value_t = -64.0, allow_hyphen_values = true)]
    tau_log2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RingArg {
    Integers,
    Gaussian,
    Eisenstein,
}

impl From<RingArg> for RingKind {
    fn from(r: RingArg) -> Self {
        match r {
            RingArg::Integers => RingKind::Integers,
            RingArg::Gaussian => RingKind::Gaussian,
            RingArg::Eisenstein => RingKind::Eisenstein,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct ReduceArgs {
    /// Matrix file: {"m", "rows"} over Z, or {"rows": [[{"a","b","ring"}]]}
    /// for the other rings.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = RingArg::Integers)]
    ring: RingArg,
    #[arg(long, default_value = "99/100")]
    delta: String,
    /// Also output the Hermite normal form (integer matrices only).
    #[arg(long)]
    hnf: bool,
    /// Also output the Smith invariant factors (integer matrices only).
    #[arg(long)]
    snf: bool,
}

#[derive(Debug, Args, Serialize)]
struct BpArgs {
    /// JSON file with m, mu, d, optional k, delta and ring, and the
    /// generators as {"exponent", "mantissas"} fixed-point vectors.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SampleArgs {
    /// Basis of the dual lattice L* in {"m", "rows"} form.
    #[arg(long)]
    basis: PathBuf,
    #[arg(long, default_value = "0")]
    delta: String,
    #[arg(long, default_value = "0")]
    eta: String,
    /// Gaussian width (defaults to 3/2 of the longest reduced basis vector).
    #[arg(long)]
    sigma: Option<String>,
    /// Concentration radius (defaults to 3 sigma).
    #[arg(long)]
    r: Option<String>,
    #[arg(long, default_value_t = 100)]
    count: usize,
}

fn rational(s: &str, what: &str) -> CliResult<BigRational> {
    parse_rational(s).ok_or_else(|| CliError::Input(format!("{what}: cannot parse {s:?} as a rational")))
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(bytes: &[u8], path: &Path) -> CliResult<T> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn verify(cli: &Cli, ok: bool, what: &str) -> CliResult<()> {
    if cli.verify && !ok {
        return Err(CliError::Verify(what.to_string()));
    }
    Ok(())
}

fn render<T: Serialize>(cli: &Cli, prov: &Provenance, result: &T) -> CliResult<String> {
    match cli.format {
        Format::Json => Ok(output::json(prov, result)),
        Format::Table => Ok(output::table(prov, result)),
        Format::Csv => Err(CliError::Input("csv output is available for `estimate` only".into())),
    }
}

// recover

#[derive(Debug, Deserialize)]
struct InstanceFile {
    b_m: MatrixJson,
    b_l: MatrixJson,
    sampler: SamplerConfig,
    index_bound: String,
    #[serde(default)]
    detl_bound: Option<String>,
    #[serde(default)]
    lambda1_dual_bound: Option<String>,
}

/// Either a bare instance or an experiment record wrapping one. A record's
/// `mode` and `seed` take precedence over the command line; `tau_log2`
/// only matters to the estimator and is ignored here.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum InstanceDoc {
    Experiment {
        #[serde(default)]
        mode: Option<RecoverMode>,
        instance: InstanceFile,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default, rename = "tau_log2")]
        _tau_log2: Option<i64>,
    },
    Bare(InstanceFile),
}

fn problem_from_file(inst: InstanceFile, seed: u64) -> CliResult<RecoveryProblem> {
    let b_m = inst.b_m.to_basis()?;
    let b_l = inst.b_l.to_basis()?;
    let index: BigInt =
        inst.index_bound.trim().parse().map_err(|_| CliError::Input(format!("bad index_bound {:?}", inst.index_bound)))?;
    let detl = match &inst.detl_bound {
        Some(s) => rational(s, "detl_bound")?,
        None => b_l.abs_det(),
    };
    let lambda1 = match &inst.lambda1_dual_bound {
        Some(s) => rational(s, "lambda1_dual_bound")?,
        None => recovery::lambda1_upper(&b_l.dual_basis())?,
    };
    let mut cfg = inst.sampler;
    cfg.seed = seed;
    Ok(RecoveryProblem::new(b_m, &b_l, cfg, index, detl, lambda1)?)
}

#[derive(Serialize)]
struct CyclotomicSummary {
    conductor: u64,
    unit_rank: usize,
    torsion_order: u64,
    /// `|det B_L|` of the recovered lattice.
    regulator: f64,
    lattice: CyclotomicReport,
}

#[derive(Serialize)]
struct RecoverOutput {
    report: RecoveryReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    cyclotomic: Option<CyclotomicSummary>,
    precision_gap: PrecisionGap,
}

#[derive(Serialize)]
struct BaselineOutput {
    mode: &'static str,
    feasible: bool,
    required_q: Option<u32>,
    available_bits: u32,
    k: Option<usize>,
    relation_check: Option<bool>,
    error_log2: Option<f64>,
    det_l_f64: Option<f64>,
    hnf_dual: Option<Vec<Vec<String>>>,
    basis_l: Option<Vec<FixedPointVector>>,
    precision_gap: PrecisionGap,
}

fn true_dual_hnf(problem: &RecoveryProblem) -> Vec<Vec<BigInt>> {
    let rows: Vec<Vec<BigInt>> = problem
        .hidden_dual
        .rows()
        .iter()
        .map(|y| problem.b_m.rows().iter().map(|b| unitlat::linalg::round_half_away(&unitlat::linalg::dot_rat(b, y))).collect())
        .collect();
    reduction::hnf(&rows).basis()
}

fn strings(m: &[Vec<BigInt>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

fn cmd_recover(cli: &Cli, a: &RecoverArgs, config: &mut Vec<u8>) -> CliResult<String> {
    let mut cyclo = None;
    let mut mode = a.mode;
    let mut seed = cli.seed;
    let problem = if a.synthetic {
        let noise = rational(&a.noise, "--noise")?;
        recovery::planted_instance_with(a.dim, a.index, cli.seed, &noise)?.problem
    } else if let Some(m) = a.cyclotomic {
        let (p, field) = recovery::cyclotomic_problem(m, cli.precision_bits, cli.seed)?;
        cyclo = Some(field);
        p
    } else {
        let path = a.instance.as_ref().expect("clap enforces a source");
        let bytes = read(path)?;
        config.extend_from_slice(&bytes);
        match parse_json(&bytes, path)? {
            InstanceDoc::Experiment { mode: m, instance, seed: s, .. } => {
                mode = m.unwrap_or(mode);
                seed = s.unwrap_or(seed);
                problem_from_file(instance, seed)?
            }
            InstanceDoc::Bare(instance) => problem_from_file(instance, cli.seed)?,
        }
    };
    let prov = Provenance::new("recover", seed, cli.precision_bits, config);
    let gap = precision_gap_report(&problem)?;
    match mode {
        RecoverMode::Sublattice => finish_sublattice(cli, &prov, &problem, a.k, cyclo, gap),
        RecoverMode::Baseline => {
            let bits = a.available_bits.unwrap_or(cli.precision_bits);
            let out = match recover_baseline(&problem, a.k, bits)? {
                BaselineOutcome::Infeasible { required_q, available } => BaselineOutput {
                    mode: "baseline",
                    feasible: false,
                    required_q: Some(required_q),
                    available_bits: available,
                    k: None,
                    relation_check: None,
                    error_log2: None,
                    det_l_f64: None,
                    hnf_dual: None,
                    basis_l: None,
                    precision_gap: gap,
                },
                BaselineOutcome::Recovered(r) => {
                    let h = r.dual_hnf_in(&problem.b_m);
                    verify(cli, r.relation_check && h == true_dual_hnf(&problem), "baseline basis differs from L")?;
                    BaselineOutput {
                        mode: "baseline",
                        feasible: true,
                        required_q: Some(r.q),
                        available_bits: bits,
                        k: Some(r.k),
                        relation_check: Some(r.relation_check),
                        error_log2: r.error_log2.is_finite().then_some(r.error_log2),
                        det_l_f64: Some(r.abs_det_l()),
                        hnf_dual: Some(strings(&h)),
                        basis_l: Some(r.basis_l.clone()),
                        precision_gap: gap,
                    }
                }
            };
            render(cli, &prov, &out)
        }
    }
}

fn finish_sublattice(
    cli: &Cli,
    prov: &Provenance,
    problem: &RecoveryProblem,
    k: Option<usize>,
    cyclo: Option<unitlat::cyclotomic::CyclotomicField>,
    gap: PrecisionGap,
) -> CliResult<String> {
    let r = match k {
        Some(k) => recovery::recover_with_k(problem, k)?,
        None => recover_with_sublattice(problem)?,
    };
    let report = RecoveryReport::new(problem, &r);
    verify(cli, report.verified, "recovered basis fails containment, index or determinant check")?;
    let cyclotomic = match cyclo {
        Some(field) => {
            let lat = unit_lattice(&field, cli.precision_bits)?;
            Some(CyclotomicSummary {
                conductor: field.conductor(),
                unit_rank: field.unit_rank(),
                torsion_order: field.torsion_order(),
                regulator: rat_to_f64(&r.abs_det()),
                lattice: CyclotomicReport::new(&lat),
            })
        }
        None => None,
    };
    render(cli, prov, &RecoverOutput { report, cyclotomic, precision_gap: gap })
}

// estimate

#[derive(Serialize)]
struct EstimateOutput {
    rows: Vec<EstimateRow>,
    estimates: Vec<ResourceEstimate>,
    /// generic / cyclotomic total per conductor, with --compare.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    ratios: Vec<(u64, f64)>,
    notes: Vec<String>,
}

fn cmd_estimate(cli: &Cli, a: &EstimateArgs, config: &[u8]) -> CliResult<String> {
    let mut est = Vec::new();
    let mut ratios = Vec::new();
    if !a.m.is_empty() {
        let d = a.log_d.expect("clap requires --logD with --m");
        for &m in &a.m {
            est.push(estimator::qubit_count_generic(&FieldProfile::generic(m, d)?, a.tau_log2)?);
        }
    }
    for &c in &a.cyclotomic {
        let cy = estimator::qubit_count_cyclotomic(c)?;
        if a.compare {
            let g = estimator::qubit_count_generic(&FieldProfile::cyclotomic_shaped(c)?, a.tau_log2)?;
            ratios.push((c, g.total / cy.total));
            est.push(g);
        }
        est.push(cy);
    }
    if !a.kummer.is_empty() {
        let n = a.kummer[0];
        if n < 2.0 || n.fract() != 0.0 {
            return Err(CliError::Input(format!("--kummer degree must be an integer >= 2, got {n}")));
        }
        est.push(estimator::qubit_count_generic(&FieldProfile::kummer(n as u64, a.kummer[1])?, a.tau_log2)?);
    }
    if est.is_empty() {
        return Err(CliError::Input("give --m with --logD, --cyclotomic or --kummer".into()));
    }
    let mut notes = vec!["all implied constants set to 1; totals are logical qubits".to_string()];
    if a.compare {
        notes.push("the hidden-subgroup route is polynomial in m but has no numeric count".into());
    }
    let rows: Vec<EstimateRow> = est.iter().map(EstimateRow::from).collect();
    let prov = Provenance::new("estimate", cli.seed, cli.precision_bits, config);
    Ok(match cli.format {
        Format::Json => output::json(&prov, &EstimateOutput { rows, estimates: est, ratios, notes }),
        Format::Csv => output::estimate_csv(&prov, &rows),
        Format::Table => output::estimate_table(&prov, &rows),
    })
}

// reduce

#[derive(Serialize)]
struct ReduceOutput {
    ring: RingKind,
    delta: String,
    reduced: serde_json::Value,
    transform: serde_json::Value,
    lll_reduced: bool,
    norm_bound_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    hnf: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    invariant_factors: Option<Vec<String>>,
}

fn cmd_reduce(cli: &Cli, a: &ReduceArgs, config: &mut Vec<u8>) -> CliResult<String> {
    let bytes = read(&a.input)?;
    config.extend_from_slice(&bytes);
    let delta = rational(&a.delta, "--delta")?;
    let kind: RingKind = a.ring.into();
    let to_value = |v: serde_json::Result<serde_json::Value>| v.expect("serializable");
    let out = if kind == RingKind::Integers {
        let mj: MatrixJson = parse_json(&bytes, &a.input)?;
        let rows = mj.to_rows()?;
        let (red, u) = lll::lll_reduce_rows(&rows, &delta)?;
        let (hnf, invariant_factors) = if a.hnf || a.snf {
            let ints = mj.to_integer_rows()?;
            (
                a.hnf.then(|| strings(&reduction::hnf(&ints).basis())),
                a.snf.then(|| reduction::snf(&ints).diagonal().iter().map(|x| x.to_string()).collect()),
            )
        } else {
            (None, None)
        };
        ReduceOutput {
            ring: kind,
            delta: format_rational(&delta),
            reduced: to_value(serde_json::to_value(MatrixJson::from_rows(&red))),
            transform: to_value(serde_json::to_value(strings(&u))),
            lll_reduced: lll::is_lll_reduced_rat(&red, &delta),
            norm_bound_holds: lll::check_reduced_bound_rat(&red, &delta),
            hnf,
            invariant_factors,
        }
    } else {
        if a.hnf || a.snf {
            return Err(CliError::Input("--hnf and --snf need an integer matrix".into()));
        }
        let b: OKMatrix = parse_json(&bytes, &a.input)?;
        if b.ring != kind {
            return Err(CliError::Input(format!("matrix entries are over {}, not {}", b.ring.name(), kind.name())));
        }
        let (red, u) = lll::lll_reduce_ok(&b, &delta)?;
        let field = lll::ok_rows_to_field(&red);
        let ring = RingDescriptor::new(kind);
        ReduceOutput {
            ring: kind,
            delta: format_rational(&delta),
            reduced: to_value(serde_json::to_value(&red)),
            transform: to_value(serde_json::to_value(&u)),
            lll_reduced: lll::is_lll_reduced(&field, &delta, ring),
            norm_bound_holds: lll::check_reduced_bound(&field, &delta, ring),
            hnf: None,
            invariant_factors: None,
        }
    };
    verify(cli, out.lll_reduced && out.norm_bound_holds, "output is not LLL-reduced")?;
    let prov = Provenance::new("reduce", cli.seed, cli.precision_bits, config);
    render(cli, &prov, &out)
}

// bp

#[derive(Debug, Deserialize)]
struct BpInput {
    #[serde(default = "default_ring")]
    ring: RingKind,
    m: usize,
    #[serde(default)]
    k: Option<usize>,
    mu: String,
    d: String,
    #[serde(default)]
    delta: Option<String>,
    generators: Vec<FixedPointVector>,
}

fn default_ring() -> RingKind {
    RingKind::Integers
}

#[derive(Serialize)]
struct BpOutput {
    params: BPParams,
    output: BPOutput,
    relation_check: bool,
}

fn cmd_bp(cli: &Cli, a: &BpArgs, config: &mut Vec<u8>) -> CliResult<String> {
    let bytes = read(&a.input)?;
    config.extend_from_slice(&bytes);
    let inp: BpInput = parse_json(&bytes, &a.input)?;
    let delta = match &inp.delta {
        Some(s) => rational(s, "delta")?,
        None => reduction::default_delta(),
    };
    let params = BPParams::new(
        inp.m,
        inp.k.unwrap_or(inp.generators.len()),
        rational(&inp.mu, "mu")?,
        rational(&inp.d, "d")?,
        delta,
        RingDescriptor::new(inp.ring),
    )?;
    let out = bp_reduce(&inp.generators, &params)?;
    let relation_check = relation_norm_check(&out, &params);
    verify(cli, relation_check, "relation rows do not separate from basis rows at the threshold")?;
    let prov = Provenance::new("bp", cli.seed, cli.precision_bits, config);
    render(cli, &prov, &BpOutput { params, output: out, relation_check })
}

// sample

fn cmd_sample(cli: &Cli, a: &SampleArgs, config: &mut Vec<u8>) -> CliResult<String> {
    if cli.format != Format::Json {
        return Err(CliError::Input("`sample` writes JSON lines only".into()));
    }
    let bytes = read(&a.basis)?;
    config.extend_from_slice(&bytes);
    let basis: BasisMatrix = parse_json::<MatrixJson>(&bytes, &a.basis)?.to_basis()?;
    let sigma = match &a.sigma {
        Some(s) => rational(s, "--sigma")?,
        None => recovery::default_sigma(&basis)?,
    };
    let r = match &a.r {
        Some(s) => rational(s, "--r")?,
        None => BigRational::from_integer(3.into()) * &sigma,
    };
    let mut cfg = SamplerConfig::new(rational(&a.delta, "--delta")?, r, rational(&a.eta, "--eta")?, sigma, cli.seed);
    cfg.output_bits = cli.precision_bits;
    let mut sampler = DualSampler::new(&basis, &cfg)?;
    let samples = sampler.sample_n(a.count);
    let prov = Provenance::new("sample", cli.seed, cli.precision_bits, config);
    let mut out = json_line(&serde_json::json!({ "provenance": prov, "config": cfg }));
    for s in &samples {
        out.push_str(&json_line(s));
    }
    if cli.verify {
        let report: SamplerReport = verify_sampler_contract(&samples, &basis, &cfg)?;
        out.push_str(&json_line(&serde_json::json!({ "report": report })));
        if !report.passed() {
            emit(cli, &out)?;
            return Err(CliError::Verify("sampler contract not met".into()));
        }
    }
    Ok(out)
}

fn json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("serializable");
    s.push('\n');
    s
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::Input(e.to_string()))
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let mut config = serde_json::to_vec(cli).expect("serializable");
    let text = match &cli.command {
        Command::Recover(a) => cmd_recover(cli, a, &mut config)?,
        Command::Estimate(a) => cmd_estimate(cli, a, &config)?,
        Command::Reduce(a) => cmd_reduce(cli, a, &mut config)?,
        Command::Bp(a) => cmd_bp(cli, a, &mut config)?,
        Command::Sample(a) => cmd_sample(cli, a, &mut config)?,
    };
    emit(cli, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
