use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use boltzknn::normalizer::{build_zgrid, default_k_knots, Integration};
use boltzknn::posterior::max_pseudo_likelihood;
use boltzknn::prediction::{
    classify_test_set, knn_test_errors, level_set_map, loo_cv_error, write_predictions,
};
use boltzknn::samplers::{phase_scan as scan, saturation_beta};
use boltzknn::{
    run_chain, ChainConfig, ChainTrace, DistanceMetric, GridSpec, InnerSampler, Method, Model,
    ModelParams, MollerConfig, NeighborGraph, PluginEstimate, PosteriorContext, Predictor, Prior,
    ProposalConfig, Target, ZGrid,
};

use crate::io::{output, write_json, Training};
use crate::{
    BaselineArgs, CompareArgs, ConfigError, DataArgs, FitArgs, GridArgs, MethodArg, PhaseScanArgs,
    PmleArgs, PredictArgs, PriorArgs, ZgridArgs,
};

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn resolve_k_max(prior: &PriorArgs, train: &Training) -> Result<usize> {
    let k_max = prior.k_max.unwrap_or_else(|| train.min_class_size());
    let n = train.ds.n();
    if k_max < 1 || k_max >= n {
        return Err(config_err(format!(
            "--k-max must lie in 1..{} for {n} training points, got {k_max}",
            n - 1
        )));
    }
    Ok(k_max)
}

fn build_graph(train: &Training, k_max: usize) -> Result<NeighborGraph> {
    Ok(NeighborGraph::build(&train.ds.x, k_max, DistanceMetric::Euclidean)?)
}

fn context<'g>(graph: &'g NeighborGraph, train: &Training, beta_max: f64, k_max: usize) -> Result<PosteriorContext<'g>> {
    let g = train.ds.num_classes();
    let model = Model::new(graph, g)?;
    let prior = Prior::new(beta_max, k_max, g)?;
    Ok(PosteriorContext::new(model, train.ds.y.clone(), prior)?)
}

fn grid_spec(args: &GridArgs, beta_max: f64, k_max: usize) -> Result<GridSpec> {
    if args.grid_beta_knots < 2 {
        return Err(config_err("--grid-beta-knots must be at least 2"));
    }
    if args.grid_beta_knots < 3 {
        eprintln!("warning: a two-knot beta grid integrates E[S] with a single trapezoid");
    }
    let mut spec = GridSpec::equally_spaced(beta_max, args.grid_beta_knots, k_max);
    spec.k_knots = match &args.grid_k_knots {
        Some(ks) => ks.clone(),
        None => default_k_knots(k_max),
    };
    if args.grid_quadratic {
        spec.integration = Integration::Quadratic;
    }
    spec.smoothness = args.grid_smoothness;
    Ok(spec)
}

/// Effective configuration of a fit, echoed into `fit.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: MethodArg,
    pub data: DataArgs,
    pub iters: usize,
    pub burnin: usize,
    pub tau2: f64,
    pub r: usize,
    pub beta_max: f64,
    pub k_max: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plugin_update_at: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plugin: Option<PluginEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cftp_max_site_updates: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zgrid: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridArgs>,
}

/// Posterior summaries of a chain after burn-in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainSummary {
    pub method: Method,
    pub draws: usize,
    pub acceptance_rate: f64,
    pub mean_beta: f64,
    pub median_beta: f64,
    pub mean_k: f64,
    /// `(k, count)` for every visited `k`.
    pub k_counts: Vec<(usize, usize)>,
    pub timeouts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plugin_updated: Option<PluginEstimate>,
}

impl ChainSummary {
    fn of(trace: &ChainTrace) -> Self {
        let post = trace.posterior();
        let mut betas: Vec<f64> = post.iter().map(|d| d.beta).collect();
        betas.sort_by(f64::total_cmp);
        let m = betas.len();
        let median_beta = if m == 0 {
            f64::NAN
        } else if m % 2 == 1 {
            betas[m / 2]
        } else {
            0.5 * (betas[m / 2 - 1] + betas[m / 2])
        };
        let mut counts = vec![0usize; trace.header.proposal.k_max + 1];
        for d in post {
            counts[d.k] += 1;
        }
        Self {
            method: trace.header.method,
            draws: m,
            acceptance_rate: trace.acceptance_rate(),
            mean_beta: trace.mean_beta(),
            median_beta,
            mean_k: trace.mean_k(),
            k_counts: counts
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .collect(),
            timeouts: trace.header.timeouts,
            plugin_updated: trace.header.plugin_updated,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitReport {
    pub config: RunConfig,
    pub trace: PathBuf,
    pub summary: ChainSummary,
}

/// Default envelope: 0.8 times the scanned saturation beta at `k`.
fn default_envelope(model: &Model<'_>, beta_max: f64, k: usize, seed: u64) -> Result<Option<f64>> {
    let betas: Vec<f64> = (0..=30).map(|i| 2.0 * beta_max * i as f64 / 30.0).collect();
    let points = scan(model, &betas, k, 200, seed)?;
    Ok(saturation_beta(&points, 0.95).map(|b| 0.8 * b))
}

pub fn fit(a: &FitArgs) -> Result<()> {
    let train = Training::load(&a.data)?;
    let k_max = resolve_k_max(&a.prior, &train)?;
    let moller = matches!(a.method, MethodArg::MollerGibbs | MethodArg::MollerPerfect);
    let (iters, burnin) = match (a.iters, a.burnin, moller) {
        (i, b, true) => (i.unwrap_or(20_000), b.unwrap_or(10_000)),
        (i, b, false) => (i.unwrap_or(50_000), b.unwrap_or(40_000)),
    };
    if a.method == MethodArg::MollerPerfect {
        if !a.allow_perfect {
            return Err(config_err(
                "moller-perfect can take days on real data; pass --allow-perfect to run it",
            ));
        }
        if train.ds.num_classes() != 2 {
            return Err(config_err("moller-perfect requires exactly two classes"));
        }
    }
    if a.plugin.is_some() && !moller {
        return Err(config_err("--plugin only applies to the moller methods"));
    }
    let trace_path = output(&a.out_dir, "trace.csv", a.force)?;
    let report_path = output(&a.out_dir, "fit.json", a.force)?;

    let graph = build_graph(&train, k_max)?;
    let ctx = context(&graph, &train, a.prior.beta_max, k_max)?;
    let proposal = ProposalConfig::new(a.tau2, a.r, a.prior.beta_max, k_max)?;
    let cfg = ChainConfig::new(iters, burnin, proposal, a.seed)?;

    let mut config = RunConfig {
        method: a.method,
        data: a.data.clone(),
        iters,
        burnin,
        tau2: a.tau2,
        r: a.r,
        beta_max: a.prior.beta_max,
        k_max,
        seed: a.seed,
        inner_sweeps: None,
        plugin_update_at: None,
        plugin: None,
        envelope_beta: None,
        cftp_max_site_updates: None,
        zgrid: None,
        grid: None,
    };

    let grid;
    let target = match a.method {
        MethodArg::Pseudo => Target::Pseudo,
        MethodArg::Path => {
            grid = match &a.zgrid {
                Some(p) => {
                    let g = ZGrid::read(p).with_context(|| format!("reading {}", p.display()))?;
                    if g.meta().n != train.ds.n() || g.meta().num_classes != train.ds.num_classes() {
                        return Err(config_err(format!(
                            "{} was built for different data (n={}, G={})",
                            p.display(),
                            g.meta().n,
                            g.meta().num_classes
                        )));
                    }
                    config.zgrid = Some(p.clone());
                    g
                }
                None => {
                    let spec = grid_spec(&a.grid, a.prior.beta_max, k_max)?;
                    config.grid = Some(a.grid.clone());
                    eprintln!(
                        "building {}x{} normaliser grid",
                        spec.beta_knots.len(),
                        spec.k_knots.len()
                    );
                    let g = build_zgrid(
                        ctx.model(),
                        ctx.prior(),
                        &spec,
                        a.grid.grid_sweeps,
                        a.grid.grid_burnin,
                        a.seed,
                    )?;
                    let path = output(&a.out_dir, "zgrid.csv", a.force)?;
                    g.write(&path)?;
                    config.zgrid = Some(path);
                    g
                }
            };
            Target::Path(&grid)
        }
        MethodArg::MollerGibbs | MethodArg::MollerPerfect => {
            let plugin = match &a.plugin {
                Some(v) => {
                    let &[beta, k] = v.as_slice() else {
                        return Err(config_err("--plugin takes two values: beta,k"));
                    };
                    if k.fract() != 0.0 || k < 1.0 {
                        return Err(config_err(format!("plug-in k must be a positive integer, got {k}")));
                    }
                    PluginEstimate::new(beta, k as usize)
                }
                None => max_pseudo_likelihood(&ctx, 1e-6),
            };
            let inner = if a.method == MethodArg::MollerGibbs {
                config.inner_sweeps = Some(a.inner_sweeps);
                InnerSampler::Gibbs {
                    sweeps: a.inner_sweeps,
                }
            } else {
                let envelope_beta = match a.envelope_beta {
                    Some(b) => Some(b),
                    None => default_envelope(ctx.model(), a.prior.beta_max, plugin.k_hat, a.seed)?,
                };
                config.envelope_beta = envelope_beta;
                config.cftp_max_site_updates = Some(a.cftp_max_site_updates);
                InnerSampler::Cftp {
                    max_site_updates: a.cftp_max_site_updates,
                    envelope_beta,
                }
            };
            let update_at = (a.plugin_update_at > 0).then_some(a.plugin_update_at);
            config.plugin = Some(plugin);
            config.plugin_update_at = update_at;
            Target::Moller(MollerConfig {
                inner,
                plugin,
                plugin_update_at: update_at,
            })
        }
    };

    let trace = run_chain(&ctx, target, &cfg)?;
    trace.write_csv(&trace_path)?;
    let summary = ChainSummary::of(&trace);
    if summary.timeouts > 0 {
        eprintln!(
            "warning: {} perfect-sampling draws timed out and were rejected",
            summary.timeouts
        );
    }
    println!(
        "{}: acceptance {:.3}, mean beta {:.3}, mean k {:.1}",
        summary.method, summary.acceptance_rate, summary.mean_beta, summary.mean_k
    );
    write_json(
        &report_path,
        &FitReport {
            config,
            trace: trace_path,
            summary,
        },
    )
}

#[derive(Debug, Serialize)]
struct ZgridReport<'a> {
    data: &'a DataArgs,
    beta_max: f64,
    k_max: usize,
    grid: &'a GridArgs,
    seed: u64,
}

pub fn zgrid(a: &ZgridArgs) -> Result<()> {
    let train = Training::load(&a.data)?;
    let k_max = resolve_k_max(&a.prior, &train)?;
    let spec = grid_spec(&a.grid, a.prior.beta_max, k_max)?;
    let path = output(&a.out_dir, "zgrid.csv", a.force)?;
    let graph = build_graph(&train, k_max)?;
    let model = Model::new(&graph, train.ds.num_classes())?;
    let prior = Prior::new(a.prior.beta_max, k_max, train.ds.num_classes())?;
    let grid = build_zgrid(&model, &prior, &spec, a.grid.grid_sweeps, a.grid.grid_burnin, a.seed)?;
    grid.write(&path)?;
    write_json(
        &path.with_extension("config.json"),
        &ZgridReport {
            data: &a.data,
            beta_max: a.prior.beta_max,
            k_max,
            grid: &a.grid,
            seed: a.seed,
        },
    )?;
    println!(
        "wrote {}x{} grid to {}",
        grid.beta_knots().len(),
        grid.k_knots().len(),
        path.display()
    );
    Ok(())
}

fn read_trace(path: &Path) -> Result<ChainTrace> {
    ChainTrace::read_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn check_trace(trace: &ChainTrace, path: &Path, train: &Training) -> Result<()> {
    let h = &trace.header;
    let (n, p, g) = (train.ds.n(), train.ds.x.cols(), train.ds.num_classes());
    if (h.n, h.p, h.num_classes) != (n, p, g) {
        return Err(boltzknn::Error::Incompatible(format!(
            "{} was fitted on n={}, p={}, G={} but the training data has n={n}, p={p}, G={g}",
            path.display(),
            h.n,
            h.p,
            h.num_classes
        ))
        .into());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct PredictReport {
    trace: PathBuf,
    data: DataArgs,
    test: PathBuf,
    credible_level: f64,
    points: usize,
    uncertain: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    map: Option<PathBuf>,
}

fn training_for(trace_path: &Path, train: &Option<PathBuf>, label_column: &Option<String>, standardize: bool) -> Result<DataArgs> {
    if let Some(t) = train {
        return Ok(DataArgs {
            train: t.clone(),
            label_column: label_column.clone(),
            standardize,
        });
    }
    let report = trace_path.with_file_name("fit.json");
    let text = std::fs::read_to_string(&report).map_err(|_| {
        config_err(format!(
            "no --train given and {} not found next to the trace",
            report.display()
        ))
    })?;
    let fit: FitReport =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", report.display()))?;
    Ok(fit.config.data)
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let trace_path = a.trace.clone().unwrap_or_else(|| a.out_dir.join("trace.csv"));
    let trace = read_trace(&trace_path)?;
    let data = training_for(&trace_path, &a.train, &a.label_column, a.standardize)?;
    let train = Training::load(&data)?;
    check_trace(&trace, &trace_path, &train)?;
    let p = train.ds.x.cols();
    if a.map_axes.as_ref().is_some_and(|v| v.len() != 2) {
        return Err(config_err("--map-axes takes two values: i,j"));
    }
    if a.map_box.as_ref().is_some_and(|v| v.len() != 4) {
        return Err(config_err("--map-box takes four values: x_lo,x_hi,y_lo,y_hi"));
    }
    let axes = match (&a.map_axes, a.map) {
        (Some(v), true) => Some((v[0], v[1])),
        (Some(_), false) => None,
        (None, true) if p == 2 => Some((0, 1)),
        (None, true) => {
            return Err(config_err(format!(
                "--map over {p} covariates needs --map-axes i,j to select the plane"
            )))
        }
        (None, false) => None,
    };
    let points = train.load_points(&a.test)?;
    let pred_path = output(&a.out_dir, "predictions.csv", a.force)?;
    let map_path = if a.map {
        Some(output(&a.out_dir, "map.csv", a.force)?)
    } else {
        None
    };
    let report_path = output(&a.out_dir, "predict.json", a.force)?;

    let graph = build_graph(&train, trace.header.proposal.k_max)?;
    let model = Model::new(&graph, train.ds.num_classes())?;
    let predictor = Predictor::new(
        model,
        train.ds.y.clone(),
        trace.posterior().to_vec(),
        a.credible_level,
    )?;
    let (summaries, error_rate) = match &points.y {
        Some(y) => {
            let r = classify_test_set(&predictor, &points.x, y)?;
            (r.summaries, Some(r.error_rate))
        }
        None => (
            points
                .x
                .iter_rows()
                .map(|x| predictor.predict(x))
                .collect::<boltzknn::Result<Vec<_>>>()?,
            None,
        ),
    };
    write_predictions(&pred_path, &summaries)?;

    if let (Some(path), Some(axes)) = (&map_path, axes) {
        let bbox = map_box(a, &train, axes)?;
        let mut grid = level_set_map(&predictor, &bbox)?;
        if let Some(s) = &train.standardizer {
            for c in &mut grid.cells {
                c.x1 = c.x1 * s.sd[axes.0] + s.mean[axes.0];
                c.x2 = c.x2 * s.sd[axes.1] + s.mean[axes.1];
            }
        }
        grid.write_csv(path)?;
    }

    let uncertain = summaries.iter().filter(|s| s.uncertain).count();
    match error_rate {
        Some(e) => println!("{} points, error rate {e:.4}, {uncertain} uncertain", summaries.len()),
        None => println!("{} points, {uncertain} uncertain", summaries.len()),
    }
    write_json(
        &report_path,
        &PredictReport {
            trace: trace_path,
            data,
            test: a.test.clone(),
            credible_level: a.credible_level,
            points: summaries.len(),
            uncertain,
            error_rate,
            map: map_path,
        },
    )
}

/// Map rectangle on the model's covariate scale; the other covariates are
/// held at their training means.
fn map_box(a: &PredictArgs, train: &Training, axes: (usize, usize)) -> Result<boltzknn::prediction::MapBox> {
    let x = &train.ds.x;
    let p = x.cols();
    if axes.0 >= p || axes.1 >= p || axes.0 == axes.1 {
        return Err(config_err(format!(
            "--map-axes must be two distinct indices below {p}"
        )));
    }
    let n = x.rows() as f64;
    let mut base = vec![0.0; p];
    for row in x.iter_rows() {
        for (b, v) in base.iter_mut().zip(row) {
            *b += v / n;
        }
    }
    let range = |c: usize| {
        x.iter_rows().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r[c]), hi.max(r[c]))
        })
    };
    let (x_range, y_range) = match &a.map_box {
        Some(b) => {
            let scale = |c: usize, v: f64| match &train.standardizer {
                Some(s) => (v - s.mean[c]) / s.sd[c],
                None => v,
            };
            (
                (scale(axes.0, b[0]), scale(axes.0, b[1])),
                (scale(axes.1, b[2]), scale(axes.1, b[3])),
            )
        }
        None => (range(axes.0), range(axes.1)),
    };
    Ok(boltzknn::prediction::MapBox {
        axes,
        x_range,
        y_range,
        resolution: (a.map_resolution, a.map_resolution),
        base,
    })
}

#[derive(Debug, Serialize)]
struct Discrepancy {
    against: String,
    beta_tv: f64,
    k_tv: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_abs_prob_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_abs_prob_diff: Option<f64>,
}

#[derive(Debug, Serialize)]
struct CompareReport {
    traces: Vec<PathBuf>,
    names: Vec<String>,
    summaries: Vec<ChainSummary>,
    /// Each trace against the first.
    discrepancies: Vec<Discrepancy>,
}

fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn unique_names(traces: &[ChainTrace]) -> Vec<String> {
    let base: Vec<String> = traces.iter().map(|t| t.header.method.to_string()).collect();
    base.iter()
        .enumerate()
        .map(|(i, b)| {
            if base.iter().filter(|o| *o == b).count() > 1 {
                format!("{b}_{}", i + 1)
            } else {
                b.clone()
            }
        })
        .collect()
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("writing {}", path.display()))?);
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    if a.traces.len() < 2 {
        return Err(config_err("compare needs at least two --trace files"));
    }
    if a.bins == 0 {
        return Err(config_err("--bins must be positive"));
    }
    let train = Training::load(&a.data)?;
    let traces = a
        .traces
        .iter()
        .map(|p| {
            let t = read_trace(p)?;
            check_trace(&t, p, &train)?;
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let beta_max = traces
        .iter()
        .map(|t| t.header.proposal.beta_max)
        .fold(0.0, f64::max);
    let k_max = traces.iter().map(|t| t.header.proposal.k_max).max().unwrap_or(1);
    let names = unique_names(&traces);

    let beta_path = output(&a.out_dir, "compare_beta.csv", a.force)?;
    let k_path = output(&a.out_dir, "compare_k.csv", a.force)?;
    let probs_path = match &a.test {
        Some(_) => Some(output(&a.out_dir, "compare_probs.csv", a.force)?),
        None => None,
    };
    let report_path = output(&a.out_dir, "compare.json", a.force)?;

    let hist_beta: Vec<Vec<f64>> = traces
        .iter()
        .map(|t| {
            let post = t.posterior();
            let mut h = vec![0.0; a.bins];
            for d in post {
                let b = ((d.beta / beta_max * a.bins as f64) as usize).min(a.bins - 1);
                h[b] += 1.0 / post.len() as f64;
            }
            h
        })
        .collect();
    let hist_k: Vec<Vec<f64>> = traces
        .iter()
        .map(|t| {
            let post = t.posterior();
            let mut h = vec![0.0; k_max];
            for d in post {
                h[d.k - 1] += 1.0 / post.len() as f64;
            }
            h
        })
        .collect();
    let width = beta_max / a.bins as f64;
    write_rows(
        &beta_path,
        &format!("beta_lo,beta_hi,{}", names.join(",")),
        (0..a.bins).map(|b| {
            let cols: Vec<String> = hist_beta.iter().map(|h| h[b].to_string()).collect();
            format!("{},{},{}", b as f64 * width, (b + 1) as f64 * width, cols.join(","))
        }),
    )?;
    write_rows(
        &k_path,
        &format!("k,{}", names.join(",")),
        (0..k_max).map(|k| {
            let cols: Vec<String> = hist_k.iter().map(|h| h[k].to_string()).collect();
            format!("{},{}", k + 1, cols.join(","))
        }),
    )?;

    let probs: Option<Vec<Vec<f64>>> = match &a.test {
        Some(test) => {
            let points = train.load_points(test)?;
            let graph = build_graph(&train, k_max)?;
            let per_trace = traces
                .iter()
                .map(|t| {
                    let model = Model::new(&graph, train.ds.num_classes())?;
                    let pred = Predictor::new(model, train.ds.y.clone(), t.posterior().to_vec(), 0.95)?;
                    points
                        .x
                        .iter_rows()
                        .map(|x| Ok(pred.predict(x)?.probs[0]))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let path = probs_path.as_ref().expect("set with --test");
            write_rows(
                path,
                &format!("point_id,{}", names.join(",")),
                (0..points.x.rows()).map(|i| {
                    let cols: Vec<String> = per_trace.iter().map(|v| v[i].to_string()).collect();
                    format!("{},{}", i + 1, cols.join(","))
                }),
            )?;
            Some(per_trace)
        }
        None => None,
    };

    let discrepancies = (1..traces.len())
        .map(|i| {
            let (mean_abs, max_abs) = match &probs {
                Some(p) => {
                    let d: Vec<f64> = p[0].iter().zip(&p[i]).map(|(a, b)| (a - b).abs()).collect();
                    (
                        Some(d.iter().sum::<f64>() / d.len() as f64),
                        Some(d.iter().cloned().fold(0.0, f64::max)),
                    )
                }
                None => (None, None),
            };
            Discrepancy {
                against: names[0].clone(),
                beta_tv: tv(&hist_beta[0], &hist_beta[i]),
                k_tv: tv(&hist_k[0], &hist_k[i]),
                mean_abs_prob_diff: mean_abs,
                max_abs_prob_diff: max_abs,
            }
        })
        .collect();
    let summaries: Vec<ChainSummary> = traces.iter().map(ChainSummary::of).collect();
    for (n, s) in names.iter().zip(&summaries) {
        println!(
            "{n}: mean beta {:.3}, mean k {:.1}, acceptance {:.3}",
            s.mean_beta, s.mean_k, s.acceptance_rate
        );
    }
    write_json(
        &report_path,
        &CompareReport {
            traces: a.traces.clone(),
            names,
            summaries,
            discrepancies,
        },
    )
}

pub fn baseline(a: &BaselineArgs) -> Result<()> {
    let train = Training::load(&a.data)?;
    let n = train.ds.n();
    if a.k.is_empty() {
        return Err(config_err("--k needs at least one value"));
    }
    let k_top = *a.k.iter().max().expect("non-empty");
    if a.k.contains(&0) || k_top >= n {
        return Err(boltzknn::Error::KOutOfRange { k: k_top, k_max: n - 1 }.into());
    }
    let test = train.load_test(&a.test)?;
    let table_path = output(&a.out_dir, "baseline.csv", a.force)?;
    let loo_path = output(&a.out_dir, "loo.csv", a.force)?;
    let graph = build_graph(&train, k_top)?;
    let errors = knn_test_errors(&graph, &train.ds.y, &test.x, &test.y, &a.k)?;
    write_rows(
        &table_path,
        "k,error",
        a.k.iter().zip(&errors).map(|(k, e)| format!("{k},{e}")),
    )?;
    let ks: Vec<usize> = (1..n).collect();
    let curve = loo_cv_error(&graph, &train.ds.y, &ks)?;
    write_rows(
        &loo_path,
        "k,errors,rate",
        curve
            .ks
            .iter()
            .zip(&curve.errors)
            .map(|(k, e)| format!("{k},{e},{}", *e as f64 / n as f64)),
    )?;
    for (k, e) in a.k.iter().zip(&errors) {
        println!("k={k:<4} test error {e:.3}");
    }
    println!("LOO minimisers: {:?}", curve.argmin());
    Ok(())
}

pub fn phase_scan(a: &PhaseScanArgs) -> Result<()> {
    if a.points < 2 || !(a.beta_top > 0.0) {
        return Err(config_err("--points must be at least 2 and --beta-top positive"));
    }
    let train = Training::load(&a.data)?;
    if a.k < 1 || a.k >= train.ds.n() {
        bail!(boltzknn::Error::KOutOfRange { k: a.k, k_max: train.ds.n() - 1 });
    }
    let path = output(&a.out_dir, "phase_scan.csv", a.force)?;
    let graph = build_graph(&train, a.k)?;
    let model = Model::new(&graph, train.ds.num_classes())?;
    let betas: Vec<f64> = (0..a.points)
        .map(|i| a.beta_top * i as f64 / (a.points - 1) as f64)
        .collect();
    let points = scan(&model, &betas, a.k, a.sweeps, a.seed)?;
    write_rows(
        &path,
        "beta,mean_agreement",
        points.iter().map(|p| format!("{},{}", p.beta, p.mean_agreement)),
    )?;
    match saturation_beta(&points, a.level) {
        Some(b) => println!("agreement reaches {} at beta = {b:.3}", a.level),
        None => println!("agreement stays below {} up to beta = {}", a.level, a.beta_top),
    }
    Ok(())
}

pub fn pmle(a: &PmleArgs) -> Result<()> {
    let train = Training::load(&a.data)?;
    let k_max = resolve_k_max(&a.prior, &train)?;
    let graph = build_graph(&train, k_max)?;
    let ctx = context(&graph, &train, a.prior.beta_max, k_max)?;
    let est = max_pseudo_likelihood(&ctx, 1e-6);
    let value = ctx
        .stats()
        .pseudo_log_likelihood(ModelParams::new(est.beta_hat, est.k_hat));
    println!(
        "{}",
        serde_json::json!({
            "beta_hat": est.beta_hat,
            "k_hat": est.k_hat,
            "log_pseudo_likelihood": value,
        })
    );
    Ok(())
}
