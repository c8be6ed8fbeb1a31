//! The `silhouette` command line.
//!
//! Exit status is 0 on success (and on a passing experiment), 1 when an
//! experiment fails its gates, 2 on usage, format and file errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::codec;
use crate::experiments::{run_experiment, ExperimentConfig, ExperimentError};
use crate::growth::Model;
use crate::limit::{
    mgf_eta_inf, sample_findim_limit, sample_quicksort_limit, sample_rho_v, sample_zeta,
    LimitError, SeriesSampler, DEFAULT_LEVELS, DEFAULT_MGF_LEVELS,
};
use crate::rng::RngStream;
use crate::shape::SearchShape;
use crate::silhouette::{eta_of, functionals, silhouette_of, SilhouetteError};
use crate::tree::{BinaryTree, TreeError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Tree {
        path: String,
        #[source]
        source: TreeError,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Silhouette(#[from] SilhouetteError),
}

#[derive(Debug, Parser)]
#[command(name = "silhouette", version, about = "Silhouettes of random search trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Bst,
    Dst,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Bst => Model::Bst,
            ModelArg::Dst => Model::Dst,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Zeta,
    EtaInf,
    Rho,
    Findim,
    Quicksort,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grow a random tree and write it as treetext.
    GenTree {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the silhouette of a tree as CSV pieces.
    Silhouette {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the discounted external path length, exactly and as a decimal.
    Eta {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Write the integrated silhouette (or its tied-down version) as CSV.
    Integrated {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        normalized: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw samples from a limit object and write them as CSV.
    Sample {
        #[arg(long, value_enum)]
        which: Which,
        /// Depth for rho and findim.
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Series levels for eta-inf and findim (default 20); recursion
        /// depth for quicksort (default 12).
        #[arg(long)]
        levels: Option<u32>,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the moment generating function of eta_inf at t.
    Mgf {
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = DEFAULT_MGF_LEVELS)]
        levels: u32,
    },
    /// Run a registered experiment from a JSON config and write its report.
    Experiment {
        #[arg(long)]
        name: String,
        #[arg(long)]
        config: PathBuf,
        /// Report file; the config's `output`, then standard output, when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    let text = e.to_string();
                    eprintln!("{}", text.lines().next().unwrap_or("usage error"));
                    2
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".to_string(),
                source,
            }),
    }
}

fn read_tree(path: &Path) -> Result<BinaryTree, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    codec::parse(&text).map_err(|source| CliError::Tree {
        path: path.display().to_string(),
        source,
    })
}

/// Run one subcommand; returns the exit status.
pub fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::GenTree {
            model,
            n,
            seed,
            out,
        } => {
            let mut rng = RngStream::new(seed);
            let tree = SearchShape::random(model.into(), n, &mut rng).to_tree();
            write_out(out.as_deref(), &codec::emit(&tree))?;
        }
        Command::Silhouette { tree, out } => {
            let t = read_tree(&tree)?;
            write_out(out.as_deref(), &silhouette_of(&t).to_csv())?;
        }
        Command::Eta { tree } => {
            let eta = eta_of(&read_tree(&tree)?);
            write_out(None, &format!("{eta} = {}\n", eta.to_f64()))?;
        }
        Command::Integrated {
            tree,
            normalized,
            out,
        } => {
            let t = read_tree(&tree)?;
            let f = functionals(&t, t.height() as u32)?;
            let g = if normalized { f.ynorm } else { f.y };
            write_out(out.as_deref(), &g.to_csv())?;
        }
        Command::Sample {
            which,
            k,
            levels,
            replicates,
            seed,
            out,
        } => {
            let csv = sample_csv(which, k, levels, replicates, seed)?;
            write_out(out.as_deref(), &csv)?;
        }
        Command::Mgf { t, levels } => {
            write_out(None, &format!("{}\n", mgf_eta_inf(t, levels)?))?;
        }
        Command::Experiment { name, config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            if cfg.name != name {
                return Err(CliError::Usage(format!(
                    "--name {name} does not match the config's name {:?}",
                    cfg.name
                )));
            }
            let report = run_experiment(&cfg)?;
            let target = out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
            write_out(target.as_deref(), &report.to_json())?;
            eprint!("{}", report.summary());
            return Ok(if report.pass { 0 } else { 1 });
        }
    }
    Ok(0)
}

/// Replicate `r` draws from `RngStream::new(seed).split(r)`.
pub fn sample_csv(
    which: Which,
    k: u32,
    levels: Option<u32>,
    replicates: usize,
    seed: u64,
) -> Result<String, CliError> {
    let root = RngStream::new(seed);
    let mut text = String::new();
    let row = |text: &mut String, values: &[f64]| {
        let cells: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    };
    let columns = |prefix: &str, count: usize| -> Vec<String> {
        (1..=count).map(|j| format!("{prefix}_{j}")).collect()
    };
    let cells = 1usize << k.min(20);
    let header: Vec<String> = match which {
        Which::Zeta => vec!["zeta".into()],
        Which::EtaInf => vec!["eta_inf".into()],
        Which::Quicksort => vec!["quicksort".into()],
        Which::Rho => columns("rho", cells),
        Which::Findim => {
            let mut h = columns("delta", cells);
            h.push("eta_centered".into());
            h
        }
    };
    text.push_str(&header.join(","));
    text.push('\n');
    let series = match which {
        Which::EtaInf | Which::Findim => Some(SeriesSampler::new(levels.unwrap_or(DEFAULT_LEVELS))?),
        _ => None,
    };
    for r in 0..replicates {
        let mut rng = root.split(r as u64);
        match which {
            Which::Zeta => row(&mut text, &[sample_zeta(&mut rng)]),
            Which::EtaInf => {
                let s = series.as_ref().expect("built above");
                row(&mut text, &[s.sample(&mut rng)])
            }
            Which::Quicksort => {
                let x = sample_quicksort_limit(&mut rng, levels.unwrap_or(12))?;
                row(&mut text, &[x])
            }
            Which::Rho => row(&mut text, &sample_rho_v(k, &mut rng)?.rho),
            Which::Findim => {
                let s = series.as_ref().expect("built above");
                let l = sample_findim_limit(k, &mut rng, s)?;
                let mut v = l.delta;
                v.push(l.eta_centered_limit);
                row(&mut text, &v)
            }
        }
    }
    Ok(text)
}
