use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use lakecover::bench::{generate_lake, generate_workload, run_scenario, BenchConfig};
use lakecover::genomic::{parse_raw, partition_variants, query_range, Chrom, LayoutConfig, Manifest};
use lakecover::index::build_index;
use lakecover::model::LakeMeta;
use lakecover::par::Parallelism;
use lakecover::store::ObjectStore;

/// Coverage-set planning over a simulated object-store data lake.
#[derive(Debug, Parser)]
#[command(name = "lakecover", version)]
struct Cli {
    /// Store directory.
    #[arg(long, global = true, env = "LAKECOVER_STORE")]
    store: Option<PathBuf>,

    /// Latency added to every store read, in microseconds.
    #[arg(long, global = true, env = "LAKECOVER_LATENCY_US")]
    latency_us: Option<u64>,

    /// Run data-parallel steps on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random lake into the store.
    Gen(ConfigArgs),
    /// Build value indexes over a stored lake.
    Index(ConfigArgs),
    /// Run a workload under the configured mode and the baseline.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Write the per-query TSV here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Leave timings out of the TSV so equal seeds give equal files.
        #[arg(long)]
        no_elapsed: bool,
    },
    /// Aggregate raw variant calls and lay them out by region.
    GenomicEtl {
        /// Raw calls: chrom, pos, ref, alt, sample_id (TSV).
        #[arg(long)]
        input: PathBuf,
        /// Bucket width in bases.
        #[arg(long, default_value_t = lakecover::genomic::DEFAULT_BUCKET_WIDTH)]
        bucket_width: u64,
        #[arg(long, default_value = lakecover::genomic::DEFAULT_ROOT)]
        root: String,
    },
    /// Print the variants of one region.
    GenomicQuery {
        #[arg(long)]
        chrom: String,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[arg(long, default_value = lakecover::genomic::DEFAULT_ROOT)]
        root: String,
    },
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// `key=value` settings file; `#` starts a comment.
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Override one setting, e.g. `--set records=50000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    mode: Option<String>,

    #[arg(long)]
    queries: Option<usize>,
}

impl ConfigArgs {
    /// Defaults, then the file, then flags.
    fn resolve(&self, latency_us: Option<u64>) -> Result<BenchConfig> {
        let mut cfg = BenchConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg.apply_text(&text).with_context(|| format!("in {}", path.display()))?;
        }
        let mut overrides: Vec<(String, String)> = Vec::new();
        if let Some(s) = self.seed {
            overrides.push(("seed".into(), s.to_string()));
        }
        if let Some(m) = &self.mode {
            overrides.push(("mode".into(), m.clone()));
        }
        if let Some(q) = self.queries {
            overrides.push(("queries".into(), q.to_string()));
        }
        if let Some(l) = latency_us {
            overrides.push(("latency_us".into(), l.to_string()));
        }
        for s in &self.sets {
            let Some((k, v)) = s.split_once('=') else {
                bail!("--set expects KEY=VALUE, got `{s}`");
            };
            overrides.push((k.into(), v.into()));
        }
        for (k, v) in overrides {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_store(cli: &Cli) -> Result<ObjectStore> {
    let Some(dir) = &cli.store else {
        bail!("no store directory: pass --store or set LAKECOVER_STORE");
    };
    let store = ObjectStore::open_dir(dir).with_context(|| format!("opening store {}", dir.display()))?;
    Ok(store)
}

fn parallelism(cli: &Cli) -> Parallelism {
    if cli.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::default()
    }
}

fn gen(cli: &Cli, args: &ConfigArgs) -> Result<()> {
    let cfg = args.resolve(cli.latency_us)?;
    let store = open_store(cli)?;
    if !store.list(&format!("data/{}/", cfg.table)).is_empty() {
        bail!("table `{}` already exists in the store", cfg.table);
    }
    let lake = generate_lake(&cfg, &store, parallelism(cli))?;
    println!("table {}: {} rows in {} files", lake.table, lake.row_count(), lake.files.len());
    Ok(())
}

fn index(cli: &Cli, args: &ConfigArgs) -> Result<()> {
    let cfg = args.resolve(cli.latency_us)?;
    let store = open_store(cli)?;
    let meta = LakeMeta::load(&store, &cfg.table).with_context(|| format!("table `{}`", cfg.table))?;
    let lake = meta.load_lake(&store)?;
    let cols = cfg.indexed_columns();
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let root = build_index(&lake, &refs, cfg.entries_per_file, &store, parallelism(cli))?;
    for c in &cols {
        println!("{c}: {} index files", root.file_count(c));
    }
    Ok(())
}

fn run(cli: &Cli, args: &ConfigArgs, report: Option<&Path>, no_elapsed: bool) -> Result<()> {
    let cfg = args.resolve(cli.latency_us)?;
    let store = open_store(cli)?;
    let meta = LakeMeta::load(&store, &cfg.table).with_context(|| format!("table `{}`", cfg.table))?;
    let lake = meta.load_lake(&store)?;
    let workload = generate_workload(&cfg, &lake)?;
    store.reset_reads();
    let r = run_scenario(&cfg, &store, &workload)?;
    store.set_latency(Duration::ZERO);
    if let Some(path) = report {
        std::fs::write(path, r.to_tsv(!no_elapsed)).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", r.summary_text());
    Ok(())
}

fn genomic_etl(cli: &Cli, input: &Path, bucket_width: u64, root: &str) -> Result<()> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let raw = parse_raw(&text).with_context(|| format!("in {}", input.display()))?;
    let config = LayoutConfig::new(bucket_width, root)?;
    let store = open_store(cli)?;
    let m = partition_variants(&raw, &config, &store, parallelism(cli))?;
    let rows: usize = m.files.values().map(|(_, n)| n).sum();
    println!("{} raw calls, {rows} variants in {} files under {root}/", raw.len(), m.len());
    Ok(())
}

fn genomic_query(cli: &Cli, chrom: &str, from: u64, to: u64, root: &str) -> Result<()> {
    let store = open_store(cli)?;
    if let Some(l) = cli.latency_us {
        store.set_latency(Duration::from_micros(l));
    }
    let manifest = Manifest::load(&store, root).with_context(|| format!("no variant layout under {root}/"))?;
    let chrom = Chrom::new(chrom)?;
    store.reset_reads();
    let found = query_range(&manifest, &chrom, from, to, &store)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "chrom\tpos\tref\talt\tids")?;
    for v in &found {
        let ids: Vec<String> = v.ids.iter().map(u64::to_string).collect();
        writeln!(out, "{}\t{}\t{}\t{}\t{}", v.chrom, v.pos, v.reference, v.alt, ids.join(","))?;
    }
    eprintln!("{} variants, {} files read", found.len(), store.reads());
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(args) => gen(cli, args),
        Command::Index(args) => index(cli, args),
        Command::Run {
            config,
            report,
            no_elapsed,
        } => run(cli, config, report.as_deref(), *no_elapsed),
        Command::GenomicEtl {
            input,
            bucket_width,
            root,
        } => genomic_etl(cli, input, *bucket_width, root),
        Command::GenomicQuery { chrom, from, to, root } => genomic_query(cli, chrom, *from, *to, root),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let mismatch = e
                .downcast_ref::<lakecover::Error>()
                .is_some_and(|e| matches!(e, lakecover::Error::Mismatch(_)));
            ExitCode::from(if mismatch { 2 } else { 1 })
        }
    }
}
