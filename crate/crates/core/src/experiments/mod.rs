//! Monte Carlo checks of the limit theorems.
//!
//! Each experiment reads an [`ExperimentConfig`], draws its replicates in
//! parallel from `RngStream::new(seed).split(pool).split(r)` and reduces
//! them in replicate order, so the [`Report`] depends on the config alone.
//! `SILHOUETTE_THREADS` caps the worker count.

mod config;
mod report;
mod runs;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::ExperimentConfig;
pub use report::{Gate, Report};

use crate::codec;
use crate::dyadic::DyadicRational;
use crate::growth::Model;
use crate::limit::LimitError;
use crate::rng::RngStream;
use crate::shape::SearchShape;
use crate::silhouette::{silhouette_of, tree_from_silhouette, SilhouetteError};
use crate::stats::StatsError;
use report::Recorder;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Silhouette(#[from] SilhouetteError),
}

/// A registered experiment: its gated metrics with default tolerances and
/// their justification, and the extra parameters it accepts.
pub struct ExperimentSpec {
    pub name: &'static str,
    pub about: &'static str,
    pub tolerances: &'static [(&'static str, Gate, f64, &'static str)],
    pub params: &'static [&'static str],
    check: fn(&ExperimentConfig) -> Result<(), ExperimentError>,
    run: fn(&mut Ctx) -> Result<(), ExperimentError>,
}

pub use runs::REGISTERED;

pub fn lookup(name: &str) -> Option<&'static ExperimentSpec> {
    REGISTERED.iter().find(|e| e.name == name)
}

/// Run the experiment named in `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    config.validate()?;
    let spec = lookup(&config.name).expect("validated");
    let threads = std::env::var("SILHOUETTE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0);
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| ExperimentError::Config(format!("thread pool: {e}")))?;
            pool.install(|| run_with(spec, config))
        }
        None => run_with(spec, config),
    }
}

fn run_with(spec: &'static ExperimentSpec, config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let start = Instant::now();
    let mut ctx = Ctx {
        config,
        spec,
        rec: Recorder::default(),
        root: RngStream::new(config.seed),
        smoke_failures: 0,
        smoke_used: false,
    };
    (spec.run)(&mut ctx)?;
    if ctx.smoke_used {
        let f = ctx.smoke_failures as f64;
        ctx.gate("smoke_failures", f);
    }
    let mut echo = config.clone();
    for &(name, _, default, _) in spec.tolerances {
        echo.tolerances.entry(name.to_string()).or_insert(default);
    }
    let elapsed = if config.record_timing {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    Ok(ctx.rec.finish(echo, elapsed))
}

/// Run and write the JSON report to `path`.
pub fn run_to_file(config: &ExperimentConfig, path: &Path) -> Result<Report, ExperimentError> {
    let report = run_experiment(config)?;
    std::fs::write(path, report.to_json()).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(report)
}

/// Replicates checked for Kraft and codec round-trip in each tree pool.
const SMOKE_PER_POOL: usize = 2;

pub(crate) struct Ctx<'a> {
    config: &'a ExperimentConfig,
    spec: &'static ExperimentSpec,
    rec: Recorder,
    root: RngStream,
    smoke_failures: usize,
    smoke_used: bool,
}

impl Ctx<'_> {
    fn stream(&self, pool: u64) -> RngStream {
        self.root.split(pool)
    }

    fn tolerance(&self, base: &str) -> (Gate, f64) {
        let &(_, gate, default, _) = self
            .spec
            .tolerances
            .iter()
            .find(|t| t.0 == base)
            .unwrap_or_else(|| panic!("{} has no tolerance {base}", self.spec.name));
        (gate, self.config.tolerances.get(base).copied().unwrap_or(default))
    }

    /// Record a gated metric; the tolerance is looked up by the part of
    /// `name` before any `@`.
    fn gate(&mut self, name: &str, value: f64) {
        let base = name.split('@').next().unwrap_or(name);
        let (gate, tol) = self.tolerance(base);
        self.rec.gated(name, value, gate, tol);
        if let Some(&(_, _, _, why)) = self.spec.tolerances.iter().find(|t| t.0 == base) {
            self.rec.note(base, why);
        }
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.rec.metric(name, value);
    }

    fn target(&mut self, name: &str, value: f64) {
        self.rec.target(name, value);
    }

    /// Suffix for per-size metrics when the config sweeps several sizes.
    fn at(&self, base: &str, n: u64, sizes: &[u64]) -> String {
        if sizes.len() > 1 {
            format!("{base}@n{n}")
        } else {
            base.to_string()
        }
    }

    /// `count` replicates of `f`, replicate `r` drawing from
    /// `stream(pool).split(r)`, results in replicate order.
    fn replicate<T: Send>(
        &self,
        pool: u64,
        count: usize,
        f: impl Fn(usize, &mut RngStream) -> T + Sync,
    ) -> Vec<T> {
        let base = self.stream(pool);
        (0..count)
            .into_par_iter()
            .map(|r| f(r, &mut base.split(r as u64)))
            .collect()
    }

    /// `count` random trees of size `n`, each passed to `f`; the first few
    /// are also checked for Kraft and codec round-trip.
    fn tree_pool<T: Send>(
        &mut self,
        pool: u64,
        model: Model,
        n: usize,
        count: usize,
        f: impl Fn(&SearchShape, &mut RngStream) -> T + Sync,
    ) -> Vec<T> {
        let out = self.replicate(pool, count, |r, rng| {
            let shape = SearchShape::random(model, n, rng);
            let ok = r >= SMOKE_PER_POOL || smoke_check(&shape);
            (f(&shape, rng), ok)
        });
        self.smoke_used = true;
        self.smoke_failures += out.iter().filter(|(_, ok)| !ok).count();
        out.into_iter().map(|(v, _)| v).collect()
    }

    /// Write a single-column CSV of a sample pool when `pool_dir` is set.
    fn dump(&self, file: &str, header: &str, values: &[f64]) -> Result<(), ExperimentError> {
        let Some(dir) = self.config.pool_dir.as_deref() else {
            return Ok(());
        };
        let path = Path::new(dir).join(format!("{}_{file}.csv", self.config.name));
        let mut text = String::with_capacity(values.len() * 20);
        text.push_str(header);
        text.push('\n');
        for v in values {
            text.push_str(&format!("{v}\n"));
        }
        std::fs::write(&path, text).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Kraft identity on the level profile and `treetext` round-trip.
pub fn smoke_check(shape: &SearchShape) -> bool {
    let tree = shape.to_tree();
    let kraft = tree.level_profile().kraft_sum() == DyadicRational::one();
    let round_trip = codec::parse(&codec::emit(&tree)).as_ref() == Ok(&tree);
    kraft && round_trip
}

/// Kraft identity and silhouette round-trip for one tree; used by the
/// `structure` experiment at every replicate.
pub fn structure_check(shape: &SearchShape) -> (bool, bool) {
    let tree = shape.to_tree();
    let kraft = tree.level_profile().kraft_sum() == DyadicRational::one()
        && shape.external_levels().kraft_sum() == DyadicRational::one();
    let back = tree_from_silhouette(&silhouette_of(&tree));
    (kraft, back.as_ref() == Ok(&tree))
}
