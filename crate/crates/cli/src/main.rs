//! `etcident`: encrypt, decrypt, extract features, identify and benchmark.
//!
//! Exit codes:
//!   0  success (for `identify`: at least one match)
//!   1  `identify` found no match
//!   2  usage error
//!   3  I/O error
//!   4  image, dimension or JPEG error
//!   5  key or seed error
//!   6  feature file or manifest error
//!   7  benchmark/corpus error

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use etcident::bench::{self, BenchConfig, ConditionGrid, CorpusSource, DatasetSeeds, KeyMode};
use etcident::cipher::{self, KeyFile};
use etcident::feature::{self, format, IdentificationParams};
use etcident::jpeg::{decode_jpeg, encode_jpeg, QualityFactor};
use etcident::{Error, PixelImage};

#[derive(Parser)]
#[command(name = "etcident", version, about = "Encrypted JPEG identification robust to recompression and re-encryption")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt an image and write it as JPEG, plus a sidecar key file.
    Encrypt(EncryptArgs),
    /// Decrypt an encrypted JPEG to PNG.
    Decrypt(DecryptArgs),
    /// Swap the second-layer key of an encrypted JPEG (same k0).
    Reencrypt(ReencryptArgs),
    /// Extract the |DC| feature of an encrypted JPEG into an ETCF file.
    Extract(ExtractArgs),
    /// Look a feature up in a dataset manifest.
    Identify(IdentifyArgs),
    /// Build the encrypted dataset and report precision/recall.
    Bench(BenchArgs),
    /// Sweep the threshold d and report the smallest d with p = r = 100%.
    Calibrate(BenchArgs),
}

#[derive(Args)]
struct SeedArgs {
    /// First-layer seed (decimal or 0x-prefixed hex).
    #[arg(long)]
    k0: String,
    /// Second-layer seed.
    #[arg(long)]
    k: String,
}

#[derive(Args)]
struct EncryptArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    #[command(flatten)]
    seeds: SeedArgs,
    /// Blocks kept in place by the second layer; default 10% of the blocks.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 85)]
    qf: i32,
    /// Crop to multiples of 8 instead of rejecting other sizes.
    #[arg(long)]
    crop: bool,
    /// Key file to write; default is the output path with `.key` appended.
    #[arg(long)]
    keyfile: Option<PathBuf>,
}

#[derive(Args)]
struct KeySource {
    /// Key file written by `encrypt`; falls back to ETCIDENT_SEED_FILE.
    #[arg(long, env = "ETCIDENT_SEED_FILE")]
    keyfile: Option<PathBuf>,
    #[arg(long, requires_all = ["k", "n"], conflicts_with = "keyfile")]
    k0: Option<String>,
    #[arg(long, requires_all = ["k0", "n"])]
    k: Option<String>,
    #[arg(long, requires_all = ["k0", "k"])]
    n: Option<usize>,
}

#[derive(Args)]
struct DecryptArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Output PNG.
    #[arg(long, short)]
    output: PathBuf,
    #[command(flatten)]
    keys: KeySource,
}

#[derive(Args)]
struct ReencryptArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    /// Key file of the input.
    #[arg(long)]
    keyfile: PathBuf,
    /// New second-layer seed.
    #[arg(long = "k-new")]
    k_new: String,
    #[arg(long, default_value_t = 85)]
    qf: i32,
    /// Key file to write; default is the output path with `.key` appended.
    #[arg(long = "keyfile-out")]
    keyfile_out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Feature length; default 10% of the blocks.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, short)]
    output: PathBuf,
    /// Also write one value per line to this path.
    #[arg(long)]
    text: Option<PathBuf>,
}

#[derive(Args)]
struct IdentifyArgs {
    /// Query feature (ETCF).
    #[arg(long, short)]
    query: PathBuf,
    /// Dataset manifest (JSON lines).
    #[arg(long, short)]
    manifest: PathBuf,
    #[arg(long, default_value_t = feature::DEFAULT_THRESHOLD)]
    d: u32,
    /// Feature length to compare; default is the query's length.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Same,
    Rekeyed,
    Both,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of source images; synthetic scenes when omitted.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    condition: ConditionArg,
    /// Number of source images.
    #[arg(long, default_value_t = 50)]
    scale: usize,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    #[arg(long, default_value = "81985529216486895")]
    k0: String,
    #[arg(long, default_value = "1")]
    k: String,
    #[arg(long = "k-prime", default_value = "2")]
    k_prime: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = feature::DEFAULT_THRESHOLD)]
    d: u32,
    /// Comma-separated N values for the sweep.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<usize>>,
    /// Seed for the synthetic corpus.
    #[arg(long, default_value_t = 2024)]
    synthetic_seed: u64,
    #[arg(long, default_value_t = 640)]
    width: usize,
    #[arg(long, default_value_t = 480)]
    height: usize,
    /// Worker threads; default uses every core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the text report here (stdout otherwise).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write images, features and manifests under this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. } => 3,
            Error::TooSmall { .. }
            | Error::NotBlockAligned { .. }
            | Error::InvalidImage(_)
            | Error::QualityOutOfRange(_)
            | Error::MalformedJpeg(_)
            | Error::UnsupportedJpeg(_)
            | Error::TooManyFixedBlocks { .. }
            | Error::Decode(_) => 4,
            Error::SeedMismatch { .. } | Error::KeyFile(_) => 5,
            Error::LengthMismatch { .. } | Error::FeatureFormat(_) | Error::Manifest { .. } => 6,
            Error::Corpus(_) => 7,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type CliResult<T = ExitCode> = Result<T, Failure>;

fn parse_seed(name: &str, text: &str) -> CliResult<u64> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|_| fail(5, format!("--{name}: `{text}` is not an unsigned 64-bit seed")))
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Io { path: path.into(), source: e }.into())
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io { path: path.into(), source: e }.into())
}

fn sidecar(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".key");
    PathBuf::from(s)
}

fn quality(qf: i32) -> CliResult<QualityFactor> {
    QualityFactor::new(qf).map_err(|e| fail(2, e.to_string()))
}

fn load_image(path: &Path) -> CliResult<PixelImage> {
    let bytes = read(path)?;
    // Own decoder first so encrypted files round-trip bit-exactly; anything
    // else (PNG, subsampled JPEG, ...) goes through the image crate.
    match decode_jpeg(&bytes) {
        Ok(img) => Ok(img),
        Err(_) => Ok(PixelImage::from_encoded(&bytes)?),
    }
}

fn cmd_encrypt(a: EncryptArgs) -> CliResult {
    let k0 = parse_seed("k0", &a.seeds.k0)?;
    let k = parse_seed("k", &a.seeds.k)?;
    let qf = quality(a.qf)?;
    let mut img = load_image(&a.input)?;
    if a.crop {
        img = img.crop_to_blocks();
    }
    let n = a
        .n
        .unwrap_or_else(|| cipher::EncryptionParams::default_for_blocks(img.block_count()).n_fixed);
    let keyfile = KeyFile { k0, k, n };
    let enc = cipher::encrypt(&img, &keyfile.keys(), keyfile.params())?;
    write(&a.output, &encode_jpeg(&enc, qf))?;
    keyfile.save(a.keyfile.unwrap_or_else(|| sidecar(&a.output)))?;
    Ok(ExitCode::SUCCESS)
}

fn resolve_keys(src: KeySource) -> CliResult<KeyFile> {
    match (src.k0, src.k, src.n) {
        (Some(k0), Some(k), Some(n)) => Ok(KeyFile {
            k0: parse_seed("k0", &k0)?,
            k: parse_seed("k", &k)?,
            n,
        }),
        _ => match src.keyfile {
            Some(path) => Ok(KeyFile::load(path)?),
            None => Err(fail(
                2,
                "no keys: pass --keyfile, set ETCIDENT_SEED_FILE, or give --k0/--k/--n",
            )),
        },
    }
}

fn cmd_decrypt(a: DecryptArgs) -> CliResult {
    let keyfile = resolve_keys(a.keys)?;
    let img = decode_jpeg(&read(&a.input)?)?;
    let dec = cipher::decrypt(&img, &keyfile.keys(), keyfile.params())?;
    dec.save_png(&a.output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_reencrypt(a: ReencryptArgs) -> CliResult {
    let old = KeyFile::load(&a.keyfile)?;
    let new = KeyFile {
        k: parse_seed("k-new", &a.k_new)?,
        ..old
    };
    let qf = quality(a.qf)?;
    let img = decode_jpeg(&read(&a.input)?)?;
    let out = cipher::re_encrypt(&img, &old.keys(), &new.keys(), old.params())?;
    write(&a.output, &encode_jpeg(&out, qf))?;
    new.save(a.keyfile_out.unwrap_or_else(|| sidecar(&a.output)))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_extract(a: ExtractArgs) -> CliResult {
    let img = decode_jpeg(&read(&a.input)?)?;
    let n = a
        .n
        .unwrap_or_else(|| cipher::EncryptionParams::default_for_blocks(img.block_count()).n_fixed);
    let values = feature::feature_from_pixels(&img, n)?;
    write(&a.output, &format::to_bytes(&values))?;
    if let Some(text) = a.text {
        write(&text, format::to_text(&values).as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_identify(a: IdentifyArgs) -> CliResult {
    let query = format::read(&a.query)?;
    let entries = bench::read_manifest(&a.manifest)?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let db = entries
        .iter()
        .map(|e| {
            let mut f = format::read(base.join(&e.feature))?;
            f.image_id = e.record.id.clone();
            Ok(f)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let n = a.n.unwrap_or(query.len());
    let verdict = feature::identify(&query, &db, IdentificationParams::new(n, a.d))?;
    for id in &verdict.matched_ids {
        println!("{id}");
    }
    Ok(if verdict.is_match() {
        ExitCode::SUCCESS
    } else {
        eprintln!("no match");
        ExitCode::from(1)
    })
}

fn bench_config(a: &BenchArgs, calibrate: bool) -> CliResult<BenchConfig> {
    let seeds = DatasetSeeds {
        k0: parse_seed("k0", &a.k0)?,
        k: parse_seed("k", &a.k)?,
        k_prime: parse_seed("k-prime", &a.k_prime)?,
    };
    if seeds.k == seeds.k_prime {
        return Err(fail(5, "--k and --k-prime must differ"));
    }
    let conditions = match a.condition {
        ConditionArg::One => vec![1],
        ConditionArg::Two => vec![2],
        ConditionArg::Three => vec![3],
        ConditionArg::All => vec![1, 2, 3],
    };
    let modes = match a.mode {
        ModeArg::Same => vec![KeyMode::Same],
        ModeArg::Rekeyed => vec![KeyMode::Rekeyed],
        ModeArg::Both => vec![KeyMode::Same, KeyMode::Rekeyed],
    };
    let corpus = match &a.corpus {
        Some(dir) => CorpusSource::Directory(dir.clone()),
        None => CorpusSource::Synthetic {
            width: a.width,
            height: a.height,
            seed: a.synthetic_seed,
        },
    };
    Ok(BenchConfig {
        corpus,
        count: a.scale,
        conditions: conditions
            .into_iter()
            .filter_map(ConditionGrid::standard)
            .collect(),
        seeds,
        n_fixed: a.n,
        threshold: a.d,
        modes,
        sweep: if calibrate { Some(vec![]) } else { a.sweep.clone() },
        calibrate,
        output_dir: a.out.clone(),
    })
}

fn cmd_bench(a: BenchArgs, calibrate: bool) -> CliResult {
    if a.scale == 0 {
        return Err(fail(2, "--scale must be at least 1"));
    }
    let config = bench_config(&a, calibrate)?;
    let run = || bench::run_bench(&config);
    let report = match a.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| fail(7, e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let text = report.to_text();
    match &a.report {
        Some(path) => write(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    if let Some(path) = &a.json {
        write(path, report.to_json().as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encrypt(a) => cmd_encrypt(a),
        Command::Decrypt(a) => cmd_decrypt(a),
        Command::Reencrypt(a) => cmd_reencrypt(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Identify(a) => cmd_identify(a),
        Command::Bench(a) => cmd_bench(a, false),
        Command::Calibrate(a) => cmd_bench(a, true),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("etcident: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
