use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::dependence::FairnessNotion;
use crate::error::{FateError, Result};
use crate::rng;

use super::curve::{PointFailure, PointSource, TradeoffCurve};
use super::pipeline::{estimate_dst_point, estimate_lst_point, PipelineConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Dst,
    Lst,
}

impl SweepMode {
    pub fn source(self) -> PointSource {
        match self {
            SweepMode::Dst => PointSource::Dst,
            SweepMode::Lst => PointSource::Lst,
        }
    }
}

/// `{0, 0.1, …, 0.9, 0.99}`.
pub fn default_lambda_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..10).map(|k| k as f64 / 10.0).collect();
    grid.push(0.99);
    grid
}

#[derive(Debug, Clone)]
pub struct SweepRequest<'a> {
    pub dataset: &'a Dataset,
    pub mode: SweepMode,
    pub notion: FairnessNotion,
    pub lambdas: &'a [f64],
    /// Seed labels; job `(i, seed)` runs with `derive(root_seed, [i, seed])`.
    pub seeds: &'a [u64],
    pub root_seed: u64,
    pub config: &'a PipelineConfig,
    pub bin_width: f64,
    /// Worker count; `None` uses the global pool.
    pub threads: Option<usize>,
}

/// Evaluates every `(λ, seed)` pair. Failed jobs are recorded on the curve
/// instead of aborting the sweep.
pub fn sweep(request: &SweepRequest<'_>) -> Result<TradeoffCurve> {
    if request.lambdas.is_empty() || request.seeds.is_empty() {
        return Err(FateError::BadConfig("sweep needs at least one λ and one seed".into()));
    }
    if !(request.bin_width > 0.0 && request.bin_width.is_finite()) {
        return Err(FateError::BadConfig(format!("bin width must be > 0, got {}", request.bin_width)));
    }
    request.config.validate()?;
    let jobs: Vec<(usize, u64)> =
        (0..request.lambdas.len()).flat_map(|i| request.seeds.iter().map(move |&s| (i, s))).collect();
    let run = |&(i, seed): &(usize, u64)| {
        let lambda = request.lambdas[i];
        let job_seed = rng::derive(request.root_seed, &[i as u64, seed]);
        let result = match request.mode {
            SweepMode::Dst => estimate_dst_point(request.dataset, lambda, request.notion, request.config, job_seed),
            SweepMode::Lst => estimate_lst_point(
                request.dataset,
                lambda,
                request.notion,
                request.config,
                job_seed,
                request.config.lst_include_x,
            ),
        };
        result
            .map(|mut p| {
                p.seed = seed;
                p
            })
            .map_err(|e| PointFailure { lambda, seed, kind: e.kind().to_string(), message: e.to_string() })
    };
    let results: Vec<_> = match request.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| FateError::BadConfig(format!("cannot start worker pool: {e}")))?
            .install(|| jobs.par_iter().map(run).collect()),
        None => jobs.par_iter().map(run).collect(),
    };
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(p) => points.push(p),
            Err(f) => {
                log::warn!("sweep point λ={} seed={} failed: {}", f.lambda, f.seed, f.message);
                failures.push(f);
            }
        }
    }
    Ok(TradeoffCurve::from_points(request.mode.source(), request.notion, request.bin_width, points, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticSpec};
    use crate::kernels::{Bandwidth, KernelConfig};
    use crate::nn::SgdConfig;
    use crate::tradeoff::curve::DEFAULT_BIN_WIDTH;

    fn config() -> PipelineConfig {
        PipelineConfig {
            kernel: KernelConfig::gaussian(32, Bandwidth::MedianHeuristic, 0),
            rounds: 1,
            sgd: SgdConfig { epochs: 1, batch_size: 64, ..SgdConfig::default() },
            extractor_widths: vec![8, 4],
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn grid_and_products() {
        let grid = default_lambda_grid();
        assert_eq!(grid.len(), 11);
        assert_eq!(grid.len() * 5, 55);
        assert_eq!(*grid.last().unwrap(), 0.99);

        let d = generate_synthetic(&SyntheticSpec { n: 200, ..SyntheticSpec::default() }).unwrap();
        let c = config();
        let req = SweepRequest {
            dataset: &d,
            mode: SweepMode::Dst,
            notion: FairnessNotion::Dp,
            lambdas: &[0.5],
            seeds: &[7],
            root_seed: 1,
            config: &c,
            bin_width: DEFAULT_BIN_WIDTH,
            threads: Some(1),
        };
        let one = sweep(&req).unwrap();
        assert_eq!(one.points.len(), 1);
        assert_eq!(one.points[0].seed, 7);

        let lambdas = [0.0, 0.5, 1.0];
        let req = SweepRequest { lambdas: &lambdas, seeds: &[0, 1], threads: Some(2), ..req };
        let curve = sweep(&req).unwrap();
        assert_eq!(curve.points.len(), 4);
        assert_eq!(curve.failures.len(), 2);
        assert!(curve.failures.iter().all(|f| f.lambda == 1.0 && f.kind == "BadConfig"));
        let again = sweep(&SweepRequest { threads: Some(1), ..req.clone() }).unwrap();
        assert_eq!(curve, again);
        assert!(sweep(&SweepRequest { seeds: &[], ..req }).is_err());
    }
}
