//! `defectlab` command-line interface.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use defectlab::data::{IngestOptions, SplitPlan};
use defectlab::harness::{
    audit_leakage, dataset_info, leakage_csv, load_checked, reproduce_tables, run_experiment, Balance, DatasetRef,
    ExperimentConfig, HarnessError, ModelEntry, Protocol, ReproduceOptions, DEFAULT_DATASETS, TABLE_MODELS,
};
use defectlab::resample::ResampleSpec;

#[derive(Parser)]
#[command(name = "defectlab", version, about = "Defect-prediction experiments on PROMISE metric datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    PaperFaithful,
    LeakageFree,
}

impl From<ProtocolArg> for Protocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::PaperFaithful => Protocol::PaperFaithful,
            ProtocolArg::LeakageFree => Protocol::LeakageFree,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BalanceArg {
    None,
    Bootstrap,
}

impl From<BalanceArg> for Balance {
    fn from(b: BalanceArg) -> Self {
        match b {
            BalanceArg::None => Balance::None,
            BalanceArg::Bootstrap => Balance::Bootstrap,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    balance: Option<BalanceArg>,
    /// z-score features inside every KNN.
    #[arg(long)]
    standardize: bool,
    /// Train stacking meta-learners on in-sample stage-1 scores.
    #[arg(long)]
    meta_insample: bool,
    #[arg(long)]
    allow_checksum_mismatch: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or from flags.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Comma-separated model names (default: the comparison-table models).
        #[arg(long, value_delimiter = ',')]
        models: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        drop_missing: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Reproduce the comparison tables under both protocols.
    ReproduceTables {
        /// Directory holding <name>.arff fixtures and paper_targets.toml.
        #[arg(long, default_value = "fixtures")]
        fixtures: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DATASETS.map(String::from))]
        datasets: Vec<String>,
        #[arg(long, default_value = "out/tables")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print instance counts, class balance, schema check and checksum.
    DatasetInfo {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        drop_missing: bool,
    },
    /// Count train/test duplicates in every fold a protocol would build.
    AuditLeakage {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn apply(cfg: &mut ExperimentConfig, c: &Common) {
    if let Some(p) = c.protocol {
        cfg.protocol = p.into();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(b) = c.balance {
        cfg.balance = b.into();
    }
    cfg.standardize |= c.standardize;
    cfg.meta_insample |= c.meta_insample;
    cfg.allow_checksum_mismatch |= c.allow_checksum_mismatch;
}

fn dispatch(cmd: Command) -> Result<(), HarnessError> {
    match cmd {
        Command::Run {
            config,
            dataset,
            models,
            out,
            drop_missing,
            common,
        } => {
            let mut cfg = match (&config, &dataset) {
                (Some(path), _) => ExperimentConfig::load(path)?,
                (None, Some(d)) => flag_config(d, common.seed)?,
                (None, None) => return Err(HarnessError::Config("run needs --config or --dataset".into())),
            };
            if config.is_some() {
                if let Some(d) = dataset {
                    cfg.dataset.path = d;
                }
            }
            if !models.is_empty() {
                cfg.models = models.into_iter().map(ModelEntry::Name).collect();
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            cfg.drop_missing |= drop_missing;
            apply(&mut cfg, &common);
            let outcome = run_experiment(&cfg)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for m in &outcome.models {
                let r = &m.report;
                let _ = writeln!(io::stdout(), 
                    "{:<24} accuracy {:>6.2}%  auc {:.4}",
                    r.model_id,
                    r.defective.accuracy * 100.0,
                    r.auc
                );
            }
            let _ = writeln!(io::stdout(), "outputs in {}", outcome.output_dir.display());
            Ok(())
        }
        Command::ReproduceTables {
            fixtures,
            datasets,
            out,
            common,
        } => {
            let mut opts = ReproduceOptions::new(fixtures, out, common.seed.unwrap_or(42));
            opts.datasets = datasets;
            if let Some(p) = common.protocol {
                opts.protocols = vec![p.into()];
            }
            if let Some(b) = common.balance {
                opts.balance = b.into();
            }
            opts.standardize = common.standardize;
            opts.meta_insample = common.meta_insample;
            opts.allow_checksum_mismatch = common.allow_checksum_mismatch;
            let outcome = reproduce_tables(&opts)?;
            for r in &outcome.summary {
                let _ = writeln!(io::stdout(), 
                    "{:<5} {:<15} ensemble {:>6.2}%  paper {}  ordering {}  knn {:>6.2}%{}",
                    r.dataset,
                    r.protocol.as_str(),
                    r.ensemble_accuracy * 100.0,
                    r.paper_accuracy.map(|p| format!("{p:.2}%")).unwrap_or_else(|| "-".into()),
                    if r.ordering_holds { "holds" } else { "fails" },
                    r.knn_accuracy * 100.0,
                    if r.knn_matches_ensemble { " (knn matches ensemble)" } else { "" }
                );
            }
            let _ = writeln!(io::stdout(), "outputs in {}", opts.output_dir.display());
            Ok(())
        }
        Command::DatasetInfo { dataset, drop_missing } => {
            let opts = IngestOptions {
                drop_missing,
                ..IngestOptions::default()
            };
            let _ = write!(io::stdout(), "{}", dataset_info(&dataset, &opts)?.to_text());
            Ok(())
        }
        Command::AuditLeakage { dataset, folds, common } => {
            let mut cfg = flag_config(&dataset, common.seed)?;
            cfg.split = SplitPlan::kfold(folds, true, 0);
            apply(&mut cfg, &common);
            cfg.validate()?;
            let (data, _) = load_checked(&cfg)?;
            let rows = audit_leakage(&data, cfg.protocol, cfg.balance, &cfg.split, &cfg.resample, cfg.seed)?;
            let _ = write!(io::stdout(), "{}", leakage_csv(&rows));
            let resampled: usize = rows.iter().map(|r| r.resampling_duplicates).sum();
            let exact: usize = rows.iter().map(|r| r.exact_duplicates).sum();
            eprintln!(
                "{} {}: {exact} exact duplicate test rows, {resampled} from resampling",
                data.origin(),
                cfg.protocol
            );
            Ok(())
        }
    }
}

fn flag_config(dataset: &Path, seed: Option<u64>) -> Result<ExperimentConfig, HarnessError> {
    let seed = seed.ok_or_else(|| HarnessError::Config("--seed is required without --config".into()))?;
    Ok(ExperimentConfig {
        dataset: DatasetRef {
            path: dataset.to_path_buf(),
            checksum: None,
        },
        protocol: Protocol::default(),
        split: SplitPlan::kfold(10, true, 0),
        resample: ResampleSpec::default(),
        balance: Balance::default(),
        models: TABLE_MODELS.iter().map(|m| ModelEntry::Name(m.to_string())).collect(),
        seed,
        output_dir: PathBuf::from("out"),
        standardize: false,
        meta_insample: false,
        allow_checksum_mismatch: false,
        drop_missing: false,
    })
}
