//! Posterior-predictive classification and the classical k-NN baseline.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{CovariateMatrix, NeighborGraph};
use crate::model::{Labels, Model, ModelParams};

/// Monte Carlo posterior predictive at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSummary {
    /// Mean over draws of the per-draw predictive probabilities.
    pub probs: Vec<f64>,
    /// Most probable class (0-based).
    pub bayes_class: usize,
    /// Per-class lower and upper empirical quantiles of the per-draw
    /// probabilities.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub uncertain: bool,
}

impl PredictiveSummary {
    /// Interval reported alongside a prediction: class 1 for two classes,
    /// otherwise the Bayes class.
    pub fn reported_interval(&self) -> (f64, f64) {
        let c = if self.probs.len() == 2 { 0 } else { self.bayes_class };
        (self.lower[c], self.upper[c])
    }
}

/// `x_(ceil(p M))` of the sorted sample.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    let rank = ((p * m as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(m) - 1]
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(0, |best, (i, &x)| if x > v[best] { i } else { best })
}

/// Averages the predictive conditional over posterior draws of `(beta, k)`.
#[derive(Debug, Clone)]
pub struct Predictor<'g> {
    model: Model<'g>,
    labels: Labels,
    draws: Vec<ModelParams>,
    level: f64,
}

impl<'g> Predictor<'g> {
    /// `level` is the credible level of the reported intervals (e.g. 0.95).
    pub fn new(model: Model<'g>, labels: Labels, draws: Vec<ModelParams>, level: f64) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::EmptyChain);
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(invalid(format!("credible level must lie in (0, 1), got {level}")));
        }
        if labels.len() != model.n() {
            return Err(Error::DimensionMismatch {
                expected: model.n(),
                got: labels.len(),
            });
        }
        let k_max = model.graph().k_max();
        if let Some(d) = draws.iter().find(|d| d.k < 1 || d.k > k_max || !(d.beta >= 0.0)) {
            return Err(Error::KOutOfRange { k: d.k, k_max });
        }
        Ok(Self {
            model,
            labels,
            draws,
            level,
        })
    }

    pub fn draws(&self) -> &[ModelParams] {
        &self.draws
    }

    pub fn num_classes(&self) -> usize {
        self.model.num_classes()
    }

    /// Predictive summary at covariates `x_new`.
    pub fn predict(&self, x_new: &[f64]) -> Result<PredictiveSummary> {
        let nb = self.model.graph().new_point_neighbors(x_new)?;
        let counts = self.model.predictive_counts(&nb, &self.labels)?;
        let g = self.num_classes();
        let m = self.draws.len();
        let mut per_class = vec![Vec::with_capacity(m); g];
        let mut buf = vec![0.0; g];
        for &d in &self.draws {
            counts.conditional_into(d, &mut buf);
            for (c, &v) in buf.iter().enumerate() {
                per_class[c].push(v);
            }
        }
        let mut probs: Vec<f64> = per_class.iter().map(|v| v.iter().sum::<f64>() / m as f64).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let alpha = 1.0 - self.level;
        let (mut lower, mut upper) = (Vec::with_capacity(g), Vec::with_capacity(g));
        for v in per_class.iter_mut() {
            v.sort_by(f64::total_cmp);
            lower.push(quantile_sorted(v, alpha / 2.0));
            upper.push(quantile_sorted(v, 1.0 - alpha / 2.0));
        }
        let bayes_class = argmax(&probs);
        let uncertain = if g == 2 {
            lower[0] <= 0.5 && 0.5 <= upper[0]
        } else {
            let runner_up = (0..g)
                .filter(|&c| c != bayes_class)
                .max_by(|&a, &b| probs[a].total_cmp(&probs[b]).then(b.cmp(&a)))
                .expect("at least two classes");
            lower[bayes_class] <= upper[runner_up]
        };
        Ok(PredictiveSummary {
            probs,
            bayes_class,
            lower,
            upper,
            uncertain,
        })
    }
}

/// Per-point predictions and the misclassification rate on a labelled set.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub error_rate: f64,
    pub summaries: Vec<PredictiveSummary>,
}

/// Predicts every row of `x_test` independently and scores against `y_test`.
pub fn classify_test_set(
    predictor: &Predictor<'_>,
    x_test: &CovariateMatrix,
    y_test: &Labels,
) -> Result<TestReport> {
    if x_test.rows() != y_test.len() {
        return Err(Error::DimensionMismatch {
            expected: x_test.rows(),
            got: y_test.len(),
        });
    }
    let summaries = x_test
        .iter_rows()
        .map(|x| predictor.predict(x))
        .collect::<Result<Vec<_>>>()?;
    let errors = summaries
        .iter()
        .zip(y_test.as_slice())
        .filter(|(s, &y)| s.bayes_class != y as usize)
        .count();
    Ok(TestReport {
        error_rate: errors as f64 / summaries.len().max(1) as f64,
        summaries,
    })
}

/// Writes `point_id,prob_1..prob_G,bayes_class,lo,hi,uncertain` with
/// 1-based point ids and classes.
pub fn write_predictions(path: &Path, summaries: &[PredictiveSummary]) -> Result<()> {
    let g = summaries.first().map_or(0, |s| s.probs.len());
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "point_id")?;
    for c in 1..=g {
        write!(w, ",prob_{c}")?;
    }
    writeln!(w, ",bayes_class,lo,hi,uncertain")?;
    for (i, s) in summaries.iter().enumerate() {
        write!(w, "{}", i + 1)?;
        for p in &s.probs {
            write!(w, ",{p}")?;
        }
        let (lo, hi) = s.reported_interval();
        writeln!(w, ",{},{lo},{hi},{}", s.bayes_class + 1, s.uncertain as u8)?;
    }
    w.flush()?;
    Ok(())
}

/// Three-way classification of a map cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Zone {
    Sure(usize),
    Uncertain,
}

impl Zone {
    fn of(s: &PredictiveSummary) -> Self {
        if s.uncertain {
            Zone::Uncertain
        } else {
            Zone::Sure(s.bayes_class)
        }
    }
}

/// Rectangle spanned by two covariates, the others held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapBox {
    pub axes: (usize, usize),
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub resolution: (usize, usize),
    /// Values of the remaining covariates (full-length; the two axes are
    /// overwritten).
    pub base: Vec<f64>,
}

impl MapBox {
    /// Plane of a two-covariate problem.
    pub fn plane(x_range: (f64, f64), y_range: (f64, f64), resolution: (usize, usize)) -> Self {
        Self {
            axes: (0, 1),
            x_range,
            y_range,
            resolution,
            base: vec![0.0, 0.0],
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let (a, b) = self.axes;
        if a == b || a >= dim || b >= dim || self.base.len() != dim {
            return Err(invalid("map axes must be two distinct covariates"));
        }
        if !(self.x_range.1 > self.x_range.0 && self.y_range.1 > self.y_range.0) {
            return Err(invalid("degenerate map box"));
        }
        if self.resolution.0 == 0 || self.resolution.1 == 0 {
            return Err(invalid("map resolution must be positive"));
        }
        Ok(())
    }

    /// Centre of cell `(ix, iy)`.
    pub fn centre(&self, ix: usize, iy: usize) -> (f64, f64) {
        let (nx, ny) = self.resolution;
        let x = self.x_range.0 + (ix as f64 + 0.5) * (self.x_range.1 - self.x_range.0) / nx as f64;
        let y = self.y_range.0 + (iy as f64 + 0.5) * (self.y_range.1 - self.y_range.0) / ny as f64;
        (x, y)
    }
}

/// One evaluated map cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MapCell {
    pub x1: f64,
    pub x2: f64,
    pub summary: PredictiveSummary,
    pub zone: Zone,
}

/// Predictive summaries over a regular grid of cell centres, row-major in
/// the second axis.
#[derive(Debug, Clone, PartialEq)]
pub struct MapGrid {
    pub bbox: MapBox,
    pub cells: Vec<MapCell>,
}

pub fn level_set_map(predictor: &Predictor<'_>, bbox: &MapBox) -> Result<MapGrid> {
    bbox.validate(predictor.model.graph().dim())?;
    let (nx, ny) = bbox.resolution;
    let mut point = bbox.base.clone();
    let mut cells = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let (x1, x2) = bbox.centre(ix, iy);
            point[bbox.axes.0] = x1;
            point[bbox.axes.1] = x2;
            let summary = predictor.predict(&point)?;
            cells.push(MapCell {
                x1,
                x2,
                zone: Zone::of(&summary),
                summary,
            });
        }
    }
    Ok(MapGrid {
        bbox: bbox.clone(),
        cells,
    })
}

impl MapGrid {
    /// Writes `x1,x2,prob_1,zone`; zone is the 1-based sure class or
    /// `uncertain`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "x1,x2,prob_1,zone")?;
        for c in &self.cells {
            let zone = match c.zone {
                Zone::Sure(g) => (g + 1).to_string(),
                Zone::Uncertain => "uncertain".into(),
            };
            writeln!(w, "{},{},{},{zone}", c.x1, c.x2, c.summary.probs[0])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Majority-vote predictions for `k = 1..=neighbours.len()` from a list of
/// neighbour labels sorted by distance. A tied vote at `k` falls back to
/// the prediction at `k - 1`.
fn vote_all_k(neighbour_classes: impl Iterator<Item = usize>, g: usize) -> Vec<usize> {
    let mut counts = vec![0usize; g];
    let mut out: Vec<usize> = Vec::new();
    for c in neighbour_classes {
        counts[c] += 1;
        let max = *counts.iter().max().unwrap();
        let mut winners = counts.iter().enumerate().filter(|&(_, &v)| v == max);
        let first = winners.next().unwrap().0;
        let pred = if winners.next().is_none() {
            first
        } else {
            *out.last().unwrap_or(&c)
        };
        out.push(pred);
    }
    out
}

/// Classical k-NN vote for a new point; requires `k <= graph.k_max()`.
pub fn knn_baseline(graph: &NeighborGraph, y: &Labels, x_new: &[f64], k: usize) -> Result<usize> {
    if k < 1 || k > graph.k_max() {
        return Err(Error::KOutOfRange {
            k,
            k_max: graph.k_max(),
        });
    }
    let nb = graph.new_point_neighbors(x_new)?;
    let votes = vote_all_k(
        nb.forward(k).iter().map(|&i| y.get(i as usize)),
        y.num_classes(),
    );
    Ok(votes[k - 1])
}

/// Test-set error of the k-NN vote for every `k` in `ks`.
pub fn knn_test_errors(
    graph: &NeighborGraph,
    y: &Labels,
    x_test: &CovariateMatrix,
    y_test: &Labels,
    ks: &[usize],
) -> Result<Vec<f64>> {
    let k_top = ks.iter().copied().max().unwrap_or(0);
    if ks.iter().any(|&k| k < 1) || k_top > graph.k_max() {
        return Err(Error::KOutOfRange {
            k: k_top,
            k_max: graph.k_max(),
        });
    }
    if x_test.rows() != y_test.len() {
        return Err(Error::DimensionMismatch {
            expected: x_test.rows(),
            got: y_test.len(),
        });
    }
    let mut wrong = vec![0usize; ks.len()];
    for (x, &truth) in x_test.iter_rows().zip(y_test.as_slice()) {
        let nb = graph.new_point_neighbors(x)?;
        let votes = vote_all_k(
            nb.forward(k_top).iter().map(|&i| y.get(i as usize)),
            y.num_classes(),
        );
        for (w, &k) in wrong.iter_mut().zip(ks) {
            *w += (votes[k - 1] != truth as usize) as usize;
        }
    }
    Ok(wrong.iter().map(|&w| w as f64 / x_test.rows() as f64).collect())
}

/// Leave-one-out error curve of the k-NN vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooCurve {
    pub ks: Vec<usize>,
    pub errors: Vec<usize>,
    pub n: usize,
}

impl LooCurve {
    pub fn rates(&self) -> Vec<f64> {
        self.errors.iter().map(|&e| e as f64 / self.n as f64).collect()
    }

    /// Every `k` attaining the minimum error.
    pub fn argmin(&self) -> Vec<usize> {
        let Some(&min) = self.errors.iter().min() else {
            return Vec::new();
        };
        self.ks
            .iter()
            .zip(&self.errors)
            .filter(|(_, &e)| e == min)
            .map(|(&k, _)| k)
            .collect()
    }
}

/// Leave-one-out error for each `k` in `ks` (each in `1..n`), using every
/// training point's full neighbour order.
pub fn loo_cv_error(graph: &NeighborGraph, y: &Labels, ks: &[usize]) -> Result<LooCurve> {
    let n = graph.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let k_top = ks.iter().copied().max().unwrap_or(0);
    if ks.iter().any(|&k| k < 1) || k_top >= n {
        return Err(Error::KOutOfRange {
            k: k_top,
            k_max: n.saturating_sub(1),
        });
    }
    let mut errors = vec![0usize; ks.len()];
    for i in 0..n {
        let votes = vote_all_k(
            graph.order(i)[..k_top].iter().map(|&l| y.get(l as usize)),
            y.num_classes(),
        );
        for (e, &k) in errors.iter_mut().zip(ks) {
            *e += (votes[k - 1] != y.get(i)) as usize;
        }
    }
    Ok(LooCurve {
        ks: ks.to_vec(),
        errors,
        n,
    })
}
