use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use log::info;
use rankgauge::analysis::{convergence_curve, correlation_report, parse_pairs_csv};
use rankgauge::ingest::{load_manifest, load_matrix};
use rankgauge::selection::{manifest_alphas, select_by_alpha, select_by_rank};
use rankgauge::{
    rank_report, ConvergenceCurve, CorrelationReport, EmbeddingMatrix, MetricConfig, RankReport,
    SelectionResult,
};

use crate::args::{ComputeArgs, ConvergeArgs, CorrelateArgs, InputArgs, SelectArgs, StrategyArg};
use crate::error::CliError;
use crate::report::display_path;

pub struct Outcome<T> {
    pub inputs: Vec<String>,
    pub outputs: T,
}

fn load(path: &Path, input: &InputArgs) -> Result<EmbeddingMatrix, CliError> {
    let m = load_matrix(path, input.matrix_format())?;
    info!(
        "loaded {} ({} x {}, {})",
        path.display(),
        m.n_rows(),
        m.n_cols(),
        m.dtype().as_str()
    );
    Ok(m)
}

pub fn compute(args: &ComputeArgs) -> Result<Outcome<RankReport>, CliError> {
    let m = load(&args.input, &args.estimate.input)?;
    let report = rank_report(&m, &args.estimate.rank_options(false))?;
    Ok(Outcome {
        inputs: vec![display_path(&args.input)],
        outputs: report,
    })
}

pub fn select(args: &SelectArgs) -> Result<Outcome<SelectionResult>, CliError> {
    let mut manifest = load_manifest(&args.manifest)?;
    let mut inputs = vec![display_path(&args.manifest)];
    let want_alpha = args.strategy == StrategyArg::Alpha;

    // Fill in missing scores from the runs' embeddings.
    for i in 0..manifest.runs.len() {
        let run = &manifest.runs[i];
        let needs_rank = run.rank.is_none();
        let needs_alpha = want_alpha && run.alpha.is_none();
        if !(needs_rank || needs_alpha) {
            continue;
        }
        let Some(path) = manifest.embeddings_path(run) else {
            continue;
        };
        let m = load(&path, &args.estimate.input)?;
        let report = rank_report(&m, &args.estimate.rank_options(needs_alpha))?;
        inputs.push(display_path(&path));
        let run = &mut manifest.runs[i];
        if needs_rank {
            run.rank = Some(report.rankme);
        }
        if needs_alpha {
            run.alpha = report.alpha;
        }
    }

    let result = match args.strategy {
        StrategyArg::Rankme => select_by_rank(&manifest, args.tie_tol)?,
        StrategyArg::Alpha => select_by_alpha(&manifest, &manifest_alphas(&manifest))?,
    };
    Ok(Outcome {
        inputs,
        outputs: result,
    })
}

pub fn converge(args: &ConvergeArgs) -> Result<Outcome<ConvergenceCurve>, CliError> {
    let m = load(&args.input, &args.read)?;
    let cfg = MetricConfig::for_dtype(m.dtype()).with_entropy_epsilon(args.epsilon);
    let curve = convergence_curve(&m, &args.sizes, args.seed, &cfg)?;
    if let Some(out) = &args.out {
        std::fs::write(out, curve.to_csv())
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", out.display())))?;
    }
    Ok(Outcome {
        inputs: vec![display_path(&args.input)],
        outputs: curve,
    })
}

pub fn correlate(args: &CorrelateArgs) -> Result<Outcome<CorrelationReport>, CliError> {
    let file = File::open(&args.pairs)
        .map_err(|e| CliError::input(format!("cannot open {}: {e}", args.pairs.display())))?;
    let pairs = parse_pairs_csv(BufReader::new(file))?;
    Ok(Outcome {
        inputs: vec![display_path(&args.pairs)],
        outputs: correlation_report(pairs)?,
    })
}
