//! Command-line front end: keyed embedding into PGM covers, extraction, and
//! the analysis experiments.
//!
//! Exit codes: 0 success, 2 malformed input, 3 degenerate seed, 4 the
//! decodability cap was hit, 5 undecodable message, 6 an analysis
//! postcondition failed.

use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{bits_to_bytes, bytes_to_bits, BitVector};
use crate::error::Error;
use crate::harness::{exact_distribution, keyed_uniformity_test, uniformity_test};
use crate::keygen::{derive_strategy_triple, Key, PlcmParameter, SeedMode, StrategyTriple, UnitFraction};
use crate::media::{extract_lsc, lsc_count, pgm_read, pgm_write, replace_lsc, PgmImage, DEFAULT_LSC_THRESHOLD};
use crate::scheme::{embed, extract, first_decodable_length, ScismmInput};
use crate::topology::{
    construct_periodic_point, construct_transit_point, d2, random_point, scismm_iterate, sensitivity_probe,
    TruncationDepth,
};

pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_CAP: i32 = 4;
pub const EXIT_UNDECODABLE: i32 = 5;
pub const EXIT_ANALYSIS: i32 = 6;

/// Sidecar format version written by this build.
pub const SIDECAR_VERSION: u32 = 1;

/// `T` is extended up to this multiple of `P`.
pub const DECODABILITY_CAP_FACTOR: usize = 64;

/// Uniform strategy prefix length for random phase-space points; longer than
/// any kept prefix at the supported radii.
const RANDOM_PREFIX: usize = 80;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn malformed(message: impl Into<String>) -> Self {
        Self::new(EXIT_MALFORMED, message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DegenerateSeed(_) => EXIT_DEGENERATE,
            Error::UndecodableMessage { .. } => EXIT_UNDECODABLE,
            Error::ConstructionFailed(_) | Error::ProbeExhausted { .. } | Error::Unreachable(_) => EXIT_ANALYSIS,
            _ => EXIT_MALFORMED,
        };
        Self::new(code, e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "scismm",
    version,
    about = "Chaotic-iteration steganography with a mixed message"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hide a message in the least significant bits of a PGM cover.
    Embed(EmbedArgs),
    /// Recover a message from a stego image and its sidecar.
    Extract(ExtractArgs),
    /// Run an analysis experiment and print a key=value report.
    #[command(subcommand)]
    Analyze(Analysis),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Blind,
    Paper,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Cover image (P5 or P3, maxval 255).
    #[arg(long)]
    pub cover: PathBuf,
    /// File holding the message bytes.
    #[arg(long)]
    pub message: PathBuf,
    /// Key as KEY:P, two 16-digit lowercase hex numerators.
    #[arg(long)]
    pub key: String,
    /// Stego image to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Sidecar to write; defaults to the output path with `.sidecar` appended.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    /// LSC threshold: bit positions with weight at most m are written.
    #[arg(long, default_value_t = DEFAULT_LSC_THRESHOLD)]
    pub m: u8,
    /// Smallest iteration count to try; defaults to the message length.
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Blind)]
    pub mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub stego: PathBuf,
    #[arg(long)]
    pub sidecar: PathBuf,
    #[arg(long)]
    pub key: String,
    /// Where to write the message; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// First 64 message bits as 16 hex digits, required for paper-mode sidecars.
    #[arg(long)]
    pub paper_m: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Analysis {
    /// Monte-Carlo chi-square test with uniform strategies.
    Uniformity(UniformityArgs),
    /// Monte-Carlo chi-square test with one CIIS strategy triple per random key.
    KeyedUniformity(KeyedArgs),
    /// Exact output distribution by enumeration.
    Exact(ExactArgs),
    /// Periodic points near random targets.
    ChaosPeriodic(ChaosArgs),
    /// Orbits from a ball to the center of another.
    ChaosTransit(ChaosArgs),
    /// Nearby points whose orbits separate.
    ChaosSensitivity(SensitivityArgs),
}

#[derive(Debug, Args)]
pub struct UniformityArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub p: usize,
    #[arg(long, default_value_t = 4)]
    pub t: usize,
    #[arg(long, default_value_t = 65536)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct KeyedArgs {
    #[command(flatten)]
    pub base: UniformityArgs,
    /// Number of random keys.
    #[arg(long, default_value_t = 10)]
    pub keys: usize,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub t: usize,
}

#[derive(Debug, Args)]
pub struct ChaosArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Ball radius.
    #[arg(long, default_value_t = 0.3)]
    pub eps: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Largest N and P drawn; both are uniform in 1..=max.
    #[arg(long, default_value_t = 4)]
    pub max_size: usize,
    #[arg(long, default_value_t = 64)]
    pub depth: usize,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Closeness exponent: the probe stays within 10^-k.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub max_size: usize,
    #[arg(long, default_value_t = 64)]
    pub depth: usize,
    /// Smallest tolerated success rate.
    #[arg(long, default_value_t = 0.95)]
    pub min_rate: f64,
}

/// Embedding metadata stored next to the stego image as `key=value` lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StegoSidecar {
    pub version: u32,
    pub lsc_count: usize,
    pub message_bits: usize,
    pub iterations: usize,
    pub mode: ModeArg,
    pub plcm_p: UnitFraction,
    pub threshold: u8,
}

impl fmt::Display for StegoSidecar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "version={}", self.version)?;
        writeln!(f, "lsc_count={}", self.lsc_count)?;
        writeln!(f, "message_bits={}", self.message_bits)?;
        writeln!(f, "iterations={}", self.iterations)?;
        let mode = match self.mode {
            ModeArg::Blind => "blind",
            ModeArg::Paper => "paper-faithful",
        };
        writeln!(f, "mode={mode}")?;
        writeln!(f, "plcm_p={}", self.plcm_p)?;
        writeln!(f, "threshold={}", self.threshold)
    }
}

impl FromStr for StegoSidecar {
    type Err = Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        let bad = |msg: String| Error::MalformedSidecar(msg);
        let mut fields = std::collections::BTreeMap::new();
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {line:?} is not key=value")))?;
            if fields.insert(k, v).is_some() {
                return Err(bad(format!("duplicate field {k}")));
            }
        }
        let mut take = |k: &str| fields.remove(k).ok_or_else(|| bad(format!("missing field {k}")));
        fn num<T: FromStr>(k: &str, v: &str) -> crate::Result<T> {
            v.parse()
                .map_err(|_| Error::MalformedSidecar(format!("{k}={v:?} is not a number")))
        }
        let version: u32 = num("version", take("version")?)?;
        if version != SIDECAR_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let sidecar = Self {
            version,
            lsc_count: num("lsc_count", take("lsc_count")?)?,
            message_bits: num("message_bits", take("message_bits")?)?,
            iterations: num("iterations", take("iterations")?)?,
            mode: match take("mode")? {
                "blind" => ModeArg::Blind,
                "paper-faithful" => ModeArg::Paper,
                other => return Err(bad(format!("unknown mode {other:?}"))),
            },
            plcm_p: take("plcm_p")?.parse().map_err(|e: Error| bad(e.to_string()))?,
            threshold: num("threshold", take("threshold")?)?,
        };
        if let Some(k) = fields.keys().next() {
            return Err(bad(format!("unknown field {k}")));
        }
        Ok(sidecar)
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Reports go to standard output, errors to standard error.
pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_MALFORMED } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> CliResult<()> {
    let report = match &cli.command {
        Command::Embed(a) => cmd_embed(a)?,
        Command::Extract(a) => match cmd_extract(a)? {
            Some(message) => {
                out.write_all(&message).map_err(io_error("standard output"))?;
                return Ok(());
            }
            None => String::new(),
        },
        Command::Analyze(a) => return cmd_analyze(a, out),
    };
    out.write_all(report.as_bytes()).map_err(io_error("standard output"))
}

fn io_error(path: impl fmt::Debug) -> impl Fn(std::io::Error) -> CliError {
    move |e| CliError::malformed(format!("{path:?}: {e}"))
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(io_error(path))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(io_error(path))
}

fn seed_mode(mode: ModeArg, message: &[bool]) -> SeedMode {
    match mode {
        ModeArg::Blind => SeedMode::Blind,
        ModeArg::Paper => SeedMode::PaperFaithful {
            message: UnitFraction::from_bits_msb_first(message),
        },
    }
}

/// Embeds and writes the stego image and sidecar; returns a one-line summary.
pub fn cmd_embed(a: &EmbedArgs) -> CliResult<String> {
    let key: Key = a.key.parse()?;
    let cover = pgm_read(&read_file(&a.cover)?)?;
    let message = bytes_to_bits(&read_file(&a.message)?);
    let (stego, sidecar) = embed_image(&cover, &message, &key, a.m, a.t, a.mode)?;
    let sidecar_path = a.sidecar.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".sidecar");
        p.into()
    });
    write_file(&a.out, &pgm_write(&stego))?;
    write_file(&sidecar_path, sidecar.to_string().as_bytes())?;
    Ok(format!(
        "embedded: bits={} iterations={} lsc={}\n",
        sidecar.message_bits, sidecar.iterations, sidecar.lsc_count
    ))
}

/// Writes `message` into the LSCs of `cover`, extending `T` from
/// `min_steps` (default `P`) until every bit is recoverable.
pub fn embed_image(
    cover: &PgmImage,
    message: &[bool],
    key: &Key,
    threshold: u8,
    min_steps: Option<usize>,
    mode: ModeArg,
) -> CliResult<(PgmImage, StegoSidecar)> {
    let cells = lsc_count(cover, threshold);
    let bits = message.len();
    let mut sidecar = StegoSidecar {
        version: SIDECAR_VERSION,
        lsc_count: cells,
        message_bits: bits,
        iterations: 0,
        mode,
        plcm_p: key.p.value(),
        threshold,
    };
    if bits == 0 {
        return Ok((cover.clone(), sidecar));
    }
    if bits > 8 * cells {
        return Err(CliError::malformed(format!(
            "message of {bits} bits does not fit in {cells} LSCs (limit {})",
            8 * cells
        )));
    }
    let start = min_steps.unwrap_or(bits);
    if start < bits {
        return Err(CliError::malformed(format!(
            "--t must be at least the message length {bits}"
        )));
    }
    let cap = (DECODABILITY_CAP_FACTOR * bits).max(start);
    let full = derive_strategy_triple(key, cells, bits, cap, seed_mode(mode, message))?;
    let steps = first_decodable_length(&full.place, &full.choice, cells, bits, start, cap)?
        .ok_or_else(|| CliError::new(EXIT_CAP, format!("message is not decodable within {cap} iterations")))?;
    let x0 = extract_lsc(cover, threshold).ok_or_else(|| CliError::malformed("cover has no LSCs"))?;
    let input = ScismmInput::new(
        x0,
        BitVector::new(message.to_vec())?,
        full.place,
        full.choice,
        full.mixing,
        steps,
    )?;
    let (y, _) = embed(&input)?;
    sidecar.iterations = steps;
    Ok((replace_lsc(cover, threshold, &y)?, sidecar))
}

/// Returns the message bytes, or writes them to `--out` and returns `None`.
pub fn cmd_extract(a: &ExtractArgs) -> CliResult<Option<Vec<u8>>> {
    let key: Key = a.key.parse()?;
    let stego = pgm_read(&read_file(&a.stego)?)?;
    let text = String::from_utf8(read_file(&a.sidecar)?).map_err(|_| CliError::malformed("sidecar is not UTF-8"))?;
    let sidecar: StegoSidecar = text.parse()?;
    let paper_m = match &a.paper_m {
        Some(hex) => Some(hex.parse::<UnitFraction>()?),
        None => None,
    };
    let bits = extract_image(&stego, &sidecar, &key, paper_m)?;
    let bytes = bits_to_bytes(&bits);
    match &a.out {
        Some(path) => {
            write_file(path, &bytes)?;
            Ok(None)
        }
        None => Ok(Some(bytes)),
    }
}

/// Regenerates the strategies from the key and the sidecar and extracts.
pub fn extract_image(
    stego: &PgmImage,
    sidecar: &StegoSidecar,
    key: &Key,
    paper_m: Option<UnitFraction>,
) -> CliResult<Vec<bool>> {
    let cells = lsc_count(stego, sidecar.threshold);
    if cells != sidecar.lsc_count {
        return Err(CliError::malformed(format!(
            "image has {cells} LSCs but the sidecar records {}",
            sidecar.lsc_count
        )));
    }
    if key.p.value() != sidecar.plcm_p {
        return Err(CliError::malformed("key parameter does not match the sidecar"));
    }
    let bits = sidecar.message_bits;
    if bits == 0 {
        return Ok(Vec::new());
    }
    if sidecar.iterations < bits || bits > 8 * cells {
        return Err(CliError::malformed(
            "sidecar iteration count or message length is inconsistent",
        ));
    }
    let mode = match (sidecar.mode, paper_m) {
        (ModeArg::Blind, _) => SeedMode::Blind,
        (ModeArg::Paper, Some(message)) => SeedMode::PaperFaithful { message },
        (ModeArg::Paper, None) => {
            return Err(CliError::malformed("paper-faithful sidecar requires --paper-m"));
        }
    };
    let StrategyTriple { place, choice, mixing } = derive_strategy_triple(key, cells, bits, sidecar.iterations, mode)?;
    let y = extract_lsc(stego, sidecar.threshold).ok_or_else(|| CliError::malformed("image has no LSCs"))?;
    Ok(extract(&y, &place, &choice, &mixing, bits, sidecar.iterations)?.into_vec())
}

pub fn cmd_analyze<W: Write>(a: &Analysis, out: &mut W) -> CliResult<()> {
    let (report, ok) = match a {
        Analysis::Uniformity(u) => (uniformity_test(u.n, u.p, u.t, u.samples, u.seed)?.to_string(), true),
        Analysis::KeyedUniformity(k) => (keyed_report(k)?, true),
        Analysis::Exact(e) => exact_report(e)?,
        Analysis::ChaosPeriodic(c) => chaos_report(c, false)?,
        Analysis::ChaosTransit(c) => chaos_report(c, true)?,
        Analysis::ChaosSensitivity(s) => sensitivity_report(s)?,
    };
    out.write_all(report.as_bytes()).map_err(io_error("standard output"))?;
    if ok {
        Ok(())
    } else {
        Err(CliError::new(EXIT_ANALYSIS, "analysis postcondition failed"))
    }
}

fn keyed_report(k: &KeyedArgs) -> CliResult<String> {
    let u = &k.base;
    let mut rng = ChaCha8Rng::seed_from_u64(u.seed);
    let keys: Vec<UnitFraction> = (0..k.keys)
        .map(|_| UnitFraction(rng.random_range(1..=u64::MAX)))
        .collect();
    // a fixed parameter away from the dyadic values that collapse the orbit
    let p = PlcmParameter::new(UnitFraction(0x4986_8b3c_1f2a_7d55))?;
    let reports = keyed_uniformity_test(&keys, p, u.n, u.p, u.t, u.samples, u.seed)?;
    let mut s = format!("plcm_p={}\n", p.value());
    for (key, r) in keys.iter().zip(&reports) {
        let _ = writeln!(s, "key={key} statistic={:.6} p_value={:.6e}", r.statistic, r.p_value);
    }
    Ok(s)
}

fn exact_report(e: &ExactArgs) -> CliResult<(String, bool)> {
    let d = exact_distribution(e.n, e.p, e.t)?;
    let mut s = format!("n={}\np={}\nt={}\noutcomes={}\n", e.n, e.p, e.t, d.total);
    if d.is_uniform() {
        let _ = writeln!(s, "uniform: true, prob={}", d.probability(0));
        Ok((s, true))
    } else {
        s.push_str("uniform: false\n");
        for (y, p) in d.probabilities().iter().enumerate() {
            let _ = writeln!(s, "y={y:0width$b} prob={p}", width = e.n);
        }
        Ok((s, false))
    }
}

fn random_shape(rng: &mut ChaCha8Rng, max_size: usize) -> (usize, usize) {
    (rng.random_range(1..=max_size), rng.random_range(1..=max_size))
}

fn check_chaos_args(max_size: usize, depth: usize) -> CliResult<TruncationDepth> {
    if max_size == 0 {
        return Err(CliError::malformed("--max-size must be at least 1"));
    }
    Ok(TruncationDepth::new(depth)?)
}

/// Trials with a random target (and for transit, a random ball center);
/// `unreachable` counts targets without a preimage under the step map.
fn chaos_report(c: &ChaosArgs, transit: bool) -> CliResult<(String, bool)> {
    let depth = check_chaos_args(c.max_size, c.depth)?;
    if !(c.eps > 0.0 && c.eps.is_finite()) {
        return Err(CliError::malformed("--eps must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let (mut verified, mut unreachable, mut failed) = (0usize, 0usize, 0usize);
    for _ in 0..c.trials {
        let (n, p) = random_shape(&mut rng, c.max_size);
        let target = random_point(&mut rng, n, p, RANDOM_PREFIX);
        let result = if transit {
            let center = random_point(&mut rng, n, p, RANDOM_PREFIX);
            construct_transit_point(&center, c.eps, &target, depth).map(|_| ())
        } else {
            construct_periodic_point(&target, c.eps, depth).map(|_| ())
        };
        match result {
            Ok(()) => verified += 1,
            Err(Error::Unreachable(_)) => unreachable += 1,
            Err(Error::ConstructionFailed(_)) => failed += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let report = format!(
        "rng=chacha8\nseed={}\neps={}\ntrials={}\nunreachable={unreachable}\nfailed={failed}\nverified: {verified}/{}\n",
        c.seed, c.eps, c.trials, c.trials
    );
    Ok((report, verified == c.trials))
}

fn sensitivity_report(s: &SensitivityArgs) -> CliResult<(String, bool)> {
    let depth = check_chaos_args(s.max_size, s.depth)?;
    if s.k == 0 {
        return Err(CliError::malformed("--k must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let (mut found, mut exhausted) = (0usize, 0usize);
    let mut max_n = 0usize;
    for _ in 0..s.trials {
        let (n, p) = random_shape(&mut rng, s.max_size);
        let x = random_point(&mut rng, n, p, RANDOM_PREFIX);
        match sensitivity_probe(&x, s.k, s.max_steps, depth) {
            Ok((y, steps)) => {
                let close = d2(&x, &y, depth)?;
                let apart = d2(&scismm_iterate(&x, steps)?, &scismm_iterate(&y, steps)?, depth)?;
                if close < 10f64.powi(-(s.k as i32)) && apart >= 1.0 {
                    found += 1;
                    max_n = max_n.max(steps);
                }
            }
            Err(Error::ProbeExhausted { .. }) => exhausted += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let ok = found as f64 >= s.min_rate * s.trials as f64;
    let report = format!(
        "rng=chacha8\nseed={}\nk={}\nmax_steps={}\ntrials={}\nexhausted={exhausted}\nmax_divergence_step={max_n}\nfound: {found}/{}\n",
        s.seed, s.k, s.max_steps, s.trials, s.trials
    );
    Ok((report, ok))
}
