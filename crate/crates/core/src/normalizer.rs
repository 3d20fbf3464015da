//! Path-sampling estimate of `log Z(beta, k)`.
//!
//! `d log Z / d beta = E_beta[S]`, so with the exact anchor
//! `log Z(0, k) = n log G` the normaliser follows by integrating Monte Carlo
//! estimates of the mean potential over a ladder of `beta` knots. The
//! resulting table is interpolated bilinearly in `(beta, k)`.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{log_sum_exp, Model, ModelParams, Prior};
use crate::samplers::{uniform_labels, GibbsChain};

/// Anything that can evaluate `log Z(beta, k)`.
pub trait LogNormalizer {
    fn log_z(&self, p: ModelParams) -> Result<f64>;

    /// Whether every `(beta, k)` in `[0, beta_max] x {1..k_max}` can be
    /// evaluated.
    fn covers(&self, beta_max: f64, k_max: usize) -> bool;
}

/// Monte Carlo estimate of `E[S]` with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanPotential {
    pub mean: f64,
    pub std_error: f64,
}

/// Exact `E[S]` at `beta = 0`, where labels are i.i.d. uniform:
/// `n * sum_g a_g / G^2`, i.e. `n / G` for unit weights.
pub fn mean_potential_at_zero(model: &Model<'_>) -> f64 {
    let g = model.num_classes() as f64;
    model.n() as f64 * model.class_weights().iter().sum::<f64>() / (g * g)
}

/// Average of `S(y)` over the post-burn-in states of a Gibbs run of
/// `sweeps` sweeps (burn-in included) from uniform labels.
pub fn estimate_mean_potential(
    model: &Model<'_>,
    params: ModelParams,
    sweeps: usize,
    burnin: usize,
    seed: u64,
) -> Result<MeanPotential> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    estimate_with_rng(model, params, sweeps, burnin, &mut rng)
}

fn estimate_with_rng(
    model: &Model<'_>,
    params: ModelParams,
    sweeps: usize,
    burnin: usize,
    rng: &mut ChaCha8Rng,
) -> Result<MeanPotential> {
    if sweeps <= burnin {
        return Err(invalid(format!("sweeps ({sweeps}) must exceed burn-in ({burnin})")));
    }
    if params.beta == 0.0 {
        model.graph().adjacency(params.k)?;
        return Ok(MeanPotential {
            mean: mean_potential_at_zero(model),
            std_error: 0.0,
        });
    }
    let init = uniform_labels(model.n(), model.num_classes(), rng);
    let mut chain = GibbsChain::new(model, params, &init)?;
    for _ in 0..burnin {
        chain.sweep(rng);
    }
    let kept = sweeps - burnin;
    let mut values = Vec::with_capacity(kept);
    for _ in 0..kept {
        chain.sweep(rng);
        values.push(chain.potential());
    }
    let mean = values.iter().sum::<f64>() / kept as f64;
    Ok(MeanPotential {
        mean,
        std_error: batch_means_se(&values, mean),
    })
}

fn batch_means_se(values: &[f64], mean: f64) -> f64 {
    let batches = (values.len() as f64).sqrt().floor() as usize;
    if batches < 2 {
        return f64::NAN;
    }
    let size = values.len() / batches;
    let var = values
        .chunks_exact(size)
        .take(batches)
        .map(|c| {
            let m = c.iter().sum::<f64>() / size as f64;
            (m - mean) * (m - mean)
        })
        .sum::<f64>()
        / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// How `E[S]` is interpolated between `beta` knots before integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integration {
    /// Piecewise linear, i.e. the trapezoidal rule.
    #[default]
    Linear,
    /// Piecewise quadratic through three neighbouring knots.
    Quadratic,
}

/// Knot layout of a normaliser grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub beta_knots: Vec<f64>,
    pub k_knots: Vec<usize>,
    #[serde(default)]
    pub integration: Integration,
    /// Largest allowed change of the normalised slope `d(E[S]/n)/d beta`
    /// between adjacent intervals; `None` disables the check.
    #[serde(default)]
    pub smoothness: Option<f64>,
}

impl GridSpec {
    /// `beta_count` equally spaced knots on `[0, beta_max]` and the default
    /// `k` knots for `k_max`.
    pub fn equally_spaced(beta_max: f64, beta_count: usize, k_max: usize) -> Self {
        let beta_knots = (0..beta_count)
            .map(|i| beta_max * i as f64 / (beta_count - 1).max(1) as f64)
            .collect();
        Self {
            beta_knots,
            k_knots: default_k_knots(k_max),
            integration: Integration::Linear,
            smoothness: None,
        }
    }

    /// 50 `beta` knots on `[0, beta_max]`; `k` knots from [`default_k_knots`].
    pub fn standard(beta_max: f64, k_max: usize) -> Self {
        Self::equally_spaced(beta_max, 50, k_max)
    }

    fn validate(&self, k_max: usize) -> Result<()> {
        if self.beta_knots.len() < 2 {
            return Err(invalid("grid needs at least two beta knots"));
        }
        if self.beta_knots[0] != 0.0 {
            return Err(invalid("first beta knot must be 0"));
        }
        if self.beta_knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("beta knots must be strictly increasing"));
        }
        if self.k_knots.is_empty() || self.k_knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("k knots must be non-empty and strictly increasing"));
        }
        if self.k_knots[0] < 1 || *self.k_knots.last().unwrap() > k_max {
            return Err(Error::KOutOfRange {
                k: *self.k_knots.last().unwrap(),
                k_max,
            });
        }
        Ok(())
    }
}

/// The `k` knots `1, 10, 20, ..., 110, 125`, rescaled to `k_max / 125` and
/// deduplicated, with `k_max` as the last knot.
pub fn default_k_knots(k_max: usize) -> Vec<usize> {
    let base = [1usize, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 125];
    let mut out: Vec<usize> = base
        .iter()
        .map(|&b| ((b as f64 * k_max as f64 / 125.0).round() as usize).clamp(1, k_max))
        .collect();
    *out.last_mut().unwrap() = k_max;
    out.dedup();
    out
}

/// Provenance of a grid build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZGridMeta {
    pub n: usize,
    pub num_classes: usize,
    pub sweeps: usize,
    pub burnin: usize,
    pub seed: u64,
    pub integration: Integration,
}

/// Tabulated `log Z` over a `(beta, k)` lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZGrid {
    beta_knots: Vec<f64>,
    k_knots: Vec<usize>,
    /// `[k_index * n_beta + beta_index]`.
    logz: Vec<f64>,
    /// Estimated `E[S]` at each knot (empty when loaded from CSV).
    mean_potential: Vec<f64>,
    meta: ZGridMeta,
}

/// Integrates `E[S]` samples over the knots into cumulative `log Z` values.
fn integrate(betas: &[f64], means: &[f64], anchor: f64, scheme: Integration) -> Vec<f64> {
    let m = betas.len();
    let mut out = Vec::with_capacity(m);
    out.push(anchor);
    for j in 0..m - 1 {
        let (a, b) = (betas[j], betas[j + 1]);
        let piece = match scheme {
            Integration::Quadratic if m >= 3 => {
                let s = if j + 2 < m { j } else { j - 1 };
                let (x, y) = (&betas[s..s + 3], &means[s..s + 3]);
                gauss3(a, b, |t| lagrange3(x, y, t))
            }
            _ => 0.5 * (b - a) * (means[j] + means[j + 1]),
        };
        out.push(out[j] + piece);
    }
    out
}

fn lagrange3(x: &[f64], y: &[f64], t: f64) -> f64 {
    let l0 = (t - x[1]) * (t - x[2]) / ((x[0] - x[1]) * (x[0] - x[2]));
    let l1 = (t - x[0]) * (t - x[2]) / ((x[1] - x[0]) * (x[1] - x[2]));
    let l2 = (t - x[0]) * (t - x[1]) / ((x[2] - x[0]) * (x[2] - x[1]));
    y[0] * l0 + y[1] * l1 + y[2] * l2
}

/// Three-point Gauss-Legendre rule, exact for polynomials of degree 5.
fn gauss3(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let r = (0.6f64).sqrt();
    h * (5.0 * f(c - h * r) + 8.0 * f(c) + 5.0 * f(c + h * r)) / 9.0
}

/// Builds the grid. Each `(beta, k)` cell runs its own Gibbs chain on an
/// independent random stream derived from `seed`.
pub fn build_zgrid(
    model: &Model<'_>,
    prior: &Prior,
    spec: &GridSpec,
    sweeps: usize,
    burnin: usize,
    seed: u64,
) -> Result<ZGrid> {
    spec.validate(prior.k_max.min(model.graph().k_max()))?;
    if sweeps <= burnin {
        return Err(invalid(format!("sweeps ({sweeps}) must exceed burn-in ({burnin})")));
    }
    let n = model.n();
    let nb = spec.beta_knots.len();
    let anchor = n as f64 * (model.num_classes() as f64).ln();
    let mut logz = Vec::with_capacity(nb * spec.k_knots.len());
    let mut means = Vec::with_capacity(nb * spec.k_knots.len());
    for (ki, &k) in spec.k_knots.iter().enumerate() {
        let column: Vec<f64> = spec
            .beta_knots
            .iter()
            .enumerate()
            .map(|(bi, &beta)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((ki * nb + bi) as u64 + 1);
                estimate_with_rng(model, ModelParams::new(beta, k), sweeps, burnin, &mut rng)
                    .map(|m| m.mean)
            })
            .collect::<Result<_>>()?;
        if let Some(limit) = spec.smoothness {
            check_smoothness(&spec.beta_knots, &column, n, k, limit)?;
        }
        logz.extend(integrate(&spec.beta_knots, &column, anchor, spec.integration));
        means.extend(column);
    }
    Ok(ZGrid {
        beta_knots: spec.beta_knots.clone(),
        k_knots: spec.k_knots.clone(),
        logz,
        mean_potential: means,
        meta: ZGridMeta {
            n,
            num_classes: model.num_classes(),
            sweeps,
            burnin,
            seed,
            integration: spec.integration,
        },
    })
}

fn check_smoothness(betas: &[f64], means: &[f64], n: usize, k: usize, limit: f64) -> Result<()> {
    let slopes: Vec<f64> = betas
        .windows(2)
        .zip(means.windows(2))
        .map(|(b, m)| (m[1] - m[0]) / (b[1] - b[0]) / n as f64)
        .collect();
    for (j, w) in slopes.windows(2).enumerate() {
        let jump = (w[1] - w[0]).abs();
        if jump > limit {
            return Err(Error::GridNotSmooth {
                k,
                beta: betas[j + 1],
                jump,
            });
        }
    }
    Ok(())
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else if t == 1.0 {
        b
    } else {
        a + t * (b - a)
    }
}

/// Index `j` and weight `t` with `x` between `knots[j]` and `knots[j+1]`.
fn bracket(knots: &[f64], x: f64) -> (usize, f64) {
    if knots.len() == 1 {
        return (0, 0.0);
    }
    let j = knots.partition_point(|&v| v <= x).clamp(1, knots.len() - 1) - 1;
    let t = (x - knots[j]) / (knots[j + 1] - knots[j]);
    (j, t.clamp(0.0, 1.0))
}

impl ZGrid {
    pub fn beta_knots(&self) -> &[f64] {
        &self.beta_knots
    }

    pub fn k_knots(&self) -> &[usize] {
        &self.k_knots
    }

    pub fn meta(&self) -> &ZGridMeta {
        &self.meta
    }

    pub fn beta_max(&self) -> f64 {
        *self.beta_knots.last().unwrap()
    }

    /// Stored value at knot indices.
    pub fn knot_value(&self, beta_index: usize, k_index: usize) -> f64 {
        self.logz[k_index * self.beta_knots.len() + beta_index]
    }

    /// Estimated `E[S]` at knot indices, when the grid was built in-process.
    pub fn knot_mean_potential(&self, beta_index: usize, k_index: usize) -> Option<f64> {
        self.mean_potential
            .get(k_index * self.beta_knots.len() + beta_index)
            .copied()
    }

    /// Whether `(beta, k)` lies inside the tabulated region.
    pub fn covers(&self, beta_max: f64, k_max: usize) -> bool {
        self.beta_max() >= beta_max && self.k_knots[0] == 1 && *self.k_knots.last().unwrap() >= k_max
    }

    /// Bilinear interpolation of `log Z` at `(beta, k)`.
    pub fn interp_log_z(&self, beta: f64, k: usize) -> Result<f64> {
        let k_last = *self.k_knots.last().unwrap();
        if !(beta >= 0.0 && beta <= self.beta_max()) || k < self.k_knots[0] || k > k_last {
            return Err(Error::OutsideGrid { beta, k });
        }
        let (bj, bt) = bracket(&self.beta_knots, beta);
        let kf: Vec<f64> = self.k_knots.iter().map(|&k| k as f64).collect();
        let (kj, kt) = bracket(&kf, k as f64);
        let along_beta = |ki: usize| {
            if self.beta_knots.len() == 1 {
                self.knot_value(0, ki)
            } else {
                lerp(self.knot_value(bj, ki), self.knot_value(bj + 1, ki), bt)
            }
        };
        let lo = along_beta(kj);
        if self.k_knots.len() == 1 {
            return Ok(lo);
        }
        Ok(lerp(lo, along_beta(kj + 1), kt))
    }

    /// Path of the metadata sidecar for a grid CSV.
    pub fn sidecar_path(csv: &Path) -> PathBuf {
        csv.with_extension("meta.json")
    }

    /// Writes `beta,k,logz` rows (k-major) plus the metadata sidecar.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "beta,k,logz")?;
        for (ki, &k) in self.k_knots.iter().enumerate() {
            for (bi, &beta) in self.beta_knots.iter().enumerate() {
                writeln!(w, "{beta},{k},{}", self.knot_value(bi, ki))?;
            }
        }
        w.flush()?;
        let meta = serde_json::to_string_pretty(&self.meta)?;
        std::fs::write(Self::sidecar_path(path), meta + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let meta: ZGridMeta =
            serde_json::from_str(&std::fs::read_to_string(Self::sidecar_path(path))?)?;
        let mut rdr = csv::Reader::from_path(path)?;
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse_err = |column: &str, message: String| Error::Parse {
                path: path.to_path_buf(),
                row: line + 1,
                column: column.to_string(),
                message,
            };
            let beta: f64 = rec[0].trim().parse().map_err(|e| parse_err("beta", format!("{e}")))?;
            let k: usize = rec[1].trim().parse().map_err(|e| parse_err("k", format!("{e}")))?;
            let v: f64 = rec[2].trim().parse().map_err(|e| parse_err("logz", format!("{e}")))?;
            rows.push((beta, k, v));
        }
        let betas: Vec<f64> = {
            let mut b: Vec<f64> = rows.iter().map(|r| r.0).collect();
            b.sort_by(f64::total_cmp);
            b.dedup();
            b
        };
        let ks: Vec<usize> = rows.iter().map(|r| r.1).collect::<BTreeSet<_>>().into_iter().collect();
        if rows.len() != betas.len() * ks.len() || betas.len() < 2 {
            return Err(invalid(format!("{}: grid is not a complete lattice", path.display())));
        }
        let mut logz = vec![f64::NAN; rows.len()];
        for (beta, k, v) in rows {
            let bi = betas.iter().position(|&b| b == beta).unwrap();
            let ki = ks.iter().position(|&kk| kk == k).unwrap();
            logz[ki * betas.len() + bi] = v;
        }
        if logz.iter().any(|v| v.is_nan()) {
            return Err(invalid(format!("{}: duplicate grid rows", path.display())));
        }
        Ok(Self {
            beta_knots: betas,
            k_knots: ks,
            logz,
            mean_potential: Vec::new(),
            meta,
        })
    }
}

impl LogNormalizer for ZGrid {
    fn log_z(&self, p: ModelParams) -> Result<f64> {
        self.interp_log_z(p.beta, p.k)
    }

    fn covers(&self, beta_max: f64, k_max: usize) -> bool {
        ZGrid::covers(self, beta_max, k_max)
    }
}

/// Exact normaliser for tiny instances: the distribution of `S` over all
/// `G^n` labelings is tabulated once per `k`.
#[derive(Debug, Clone)]
pub struct ExactNormalizer {
    /// Per k: distinct potentials and log multiplicities.
    levels: Vec<Vec<(f64, f64)>>,
}

impl ExactNormalizer {
    pub fn new(model: &Model<'_>, k_max: usize) -> Result<Self> {
        let (n, g) = (model.n(), model.num_classes());
        if n > 20 || (g as f64).powi(n as i32) > crate::model::ENUMERATION_LIMIT as f64 {
            return Err(Error::TooLargeForEnumeration { n, limit: 20 });
        }
        model.graph().check_k(k_max)?;
        let mut levels = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let mut s_values = Vec::new();
            let mut y = vec![0u16; n];
            'outer: loop {
                s_values.push(model.potential_unchecked(&y, k));
                let mut pos = 0;
                loop {
                    if pos == n {
                        break 'outer;
                    }
                    y[pos] += 1;
                    if (y[pos] as usize) < g {
                        break;
                    }
                    y[pos] = 0;
                    pos += 1;
                }
            }
            s_values.sort_by(f64::total_cmp);
            let mut lv: Vec<(f64, f64)> = Vec::new();
            for s in s_values {
                match lv.last_mut() {
                    Some((v, c)) if (*v - s).abs() < 1e-9 => *c += 1.0,
                    _ => lv.push((s, 1.0)),
                }
            }
            levels.push(lv.into_iter().map(|(s, c)| (s, c.ln())).collect());
        }
        Ok(Self { levels })
    }
}

impl LogNormalizer for ExactNormalizer {
    fn log_z(&self, p: ModelParams) -> Result<f64> {
        let lv = self
            .levels
            .get(p.k.wrapping_sub(1))
            .ok_or(Error::KOutOfRange { k: p.k, k_max: self.levels.len() })?;
        let terms: Vec<f64> = lv.iter().map(|&(s, lc)| lc + p.beta * s).collect();
        Ok(log_sum_exp(&terms))
    }

    fn covers(&self, _beta_max: f64, k_max: usize) -> bool {
        k_max <= self.levels.len()
    }
}
