//! Random-walk Metropolis-Hastings over `(beta, k)`.
//!
//! Three targets share one proposal: the pseudo-likelihood, the
//! path-sampling likelihood (tabulated normaliser), and the exact posterior
//! via the auxiliary-variable scheme, whose auxiliary labels are drawn by
//! coupling from the past or by a fixed number of Gibbs sweeps.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{log_sum_exp, Labels, Model, ModelParams, Prior};
use crate::normalizer::LogNormalizer;
use crate::samplers::{cftp_sample, cftp_with_envelope, uniform_labels, GibbsChain};

/// Random-walk proposal on `theta = logit(beta / beta_max)` and on `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposalConfig {
    pub tau2: f64,
    pub r: usize,
    pub beta_max: f64,
    pub k_max: usize,
}

impl ProposalConfig {
    pub fn new(tau2: f64, r: usize, beta_max: f64, k_max: usize) -> Result<Self> {
        if !(tau2 > 0.0 && tau2.is_finite()) {
            return Err(invalid(format!("tau2 must be positive, got {tau2}")));
        }
        if !(beta_max > 0.0 && beta_max.is_finite()) {
            return Err(invalid(format!("beta_max must be positive, got {beta_max}")));
        }
        if k_max < 2 {
            return Err(invalid("k proposal needs K >= 2"));
        }
        if r < 1 || r > k_max {
            return Err(invalid(format!("r must lie in 1..={k_max}, got {r}")));
        }
        Ok(Self {
            tau2,
            r,
            beta_max,
            k_max,
        })
    }

    /// `tau2 = 0.05`, `r = 3` on the given prior.
    pub fn standard(prior: &Prior) -> Result<Self> {
        Self::new(0.05, 3, prior.beta_max, prior.k_max)
    }

    /// Size of `{k-r..k+r} \ {k}` clipped to `1..=K`.
    pub fn neighbourhood_size(&self, k: usize) -> usize {
        let lo = k.saturating_sub(self.r).max(1);
        let hi = (k + self.r).min(self.k_max);
        hi - lo
    }

    fn theta(&self, beta: f64) -> f64 {
        (beta / (self.beta_max - beta)).ln()
    }

    fn beta(&self, theta: f64) -> f64 {
        self.beta_max * sigmoid(theta)
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(e^t / (1 + e^t)^2)`.
fn log_logistic_density(t: f64) -> f64 {
    -t.abs() - 2.0 * (-t.abs()).exp().ln_1p()
}

/// A proposed move with its Hastings corrections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub params: ModelParams,
    /// `log Q(k' -> k) - log Q(k -> k')`.
    pub log_q_ratio: f64,
    /// Log of the ratio of Jacobians of the logistic map.
    pub log_jacobian: f64,
}

impl Proposal {
    pub fn log_correction(&self) -> f64 {
        self.log_q_ratio + self.log_jacobian
    }
}

/// Draws `(beta', k')` from the random walk at `state`.
pub fn propose<R: Rng + ?Sized>(state: ModelParams, cfg: &ProposalConfig, rng: &mut R) -> Proposal {
    let theta = cfg.theta(state.beta);
    let step = Normal::new(0.0, cfg.tau2.sqrt()).expect("tau2 validated");
    let theta_new = theta + step.sample(rng);
    let k = state.k;
    let lo = k.saturating_sub(cfg.r).max(1);
    let hi = (k + cfg.r).min(cfg.k_max);
    let m = hi - lo;
    let mut k_new = rng.random_range(lo..hi);
    if k_new >= k {
        k_new += 1;
    }
    Proposal {
        params: ModelParams::new(cfg.beta(theta_new), k_new),
        log_q_ratio: (m as f64 / cfg.neighbourhood_size(k_new) as f64).ln(),
        log_jacobian: log_logistic_density(theta_new) - log_logistic_density(theta),
    }
}

/// Per-`k` sufficient statistics of the training labels.
#[derive(Debug, Clone)]
pub struct TrainingStats {
    n: usize,
    g: usize,
    k_max: usize,
    weights: Vec<f64>,
    labels: Vec<u16>,
    /// `S(y; k)` for `k = 1..=K`.
    potential: Vec<f64>,
    /// Per k: `n * G` symmetric-neighbourhood class counts.
    counts: Vec<Vec<u32>>,
}

impl TrainingStats {
    pub fn new(model: &Model<'_>, y: &Labels, k_max: usize) -> Result<Self> {
        model.potential(y, k_max)?;
        let (n, g) = (model.n(), model.num_classes());
        let graph = model.graph();
        let ys = y.as_slice();
        let mut potential = Vec::with_capacity(k_max);
        let mut counts = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            potential.push(model.potential_unchecked(ys, k));
            let mut c = vec![0u32; n * g];
            for i in 0..n {
                let row = &mut c[i * g..(i + 1) * g];
                for &l in graph.forward_unchecked(i, k) {
                    row[ys[l as usize] as usize] += 1;
                }
                for &l in graph.reverse_unchecked(i, k) {
                    row[ys[l as usize] as usize] += 1;
                }
            }
            counts.push(c);
        }
        Ok(Self {
            n,
            g,
            k_max,
            weights: model.class_weights().to_vec(),
            labels: ys.to_vec(),
            potential,
            counts,
        })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `S(y; k)`.
    pub fn potential(&self, k: usize) -> f64 {
        self.potential[k - 1]
    }

    /// Pseudo-log-likelihood at `(beta, k)`.
    pub fn pseudo_log_likelihood(&self, p: ModelParams) -> f64 {
        let c = &self.counts[p.k - 1];
        let s = p.beta / p.k as f64;
        let mut w = vec![0.0; self.g];
        let mut total = 0.0;
        for i in 0..self.n {
            let row = &c[i * self.g..(i + 1) * self.g];
            for (gi, v) in w.iter_mut().enumerate() {
                *v = s * self.weights[gi] * row[gi] as f64;
            }
            total += w[self.labels[i] as usize] - log_sum_exp(&w);
        }
        total
    }
}

/// Preliminary point estimate that fixes the auxiliary density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PluginEstimate {
    pub beta_hat: f64,
    pub k_hat: usize,
}

impl PluginEstimate {
    pub fn new(beta_hat: f64, k_hat: usize) -> Self {
        Self { beta_hat, k_hat }
    }

    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.beta_hat, self.k_hat)
    }

    /// Posterior mean of a set of draws, with `k` rounded to the nearest
    /// integer (ties toward the smaller) and clamped to `1..=k_max`.
    pub fn from_mean(draws: &[ModelParams], k_max: usize) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::EmptyChain);
        }
        let m = draws.len() as f64;
        let beta = draws.iter().map(|d| d.beta).sum::<f64>() / m;
        let k = draws.iter().map(|d| d.k as f64).sum::<f64>() / m;
        let k_hat = ((k - 0.5).ceil() as usize).clamp(1, k_max);
        Ok(Self::new(beta, k_hat))
    }
}

/// Exact auxiliary draws for the auxiliary-variable kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InnerSampler {
    /// Final state of `sweeps` Gibbs sweeps from uniform labels.
    Gibbs { sweeps: usize },
    /// Coupling from the past; with `envelope_beta` set, draws above that
    /// value go through the rejection envelope at `min(beta, envelope_beta)`.
    Cftp {
        max_site_updates: u64,
        envelope_beta: Option<f64>,
    },
}

/// Settings of the auxiliary-variable target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollerConfig {
    pub inner: InnerSampler,
    pub plugin: PluginEstimate,
    /// Iteration after which the plug-in is reset to the running mean.
    pub plugin_update_at: Option<usize>,
}

/// Target distribution of a chain.
#[derive(Clone, Copy)]
pub enum Target<'a> {
    Pseudo,
    Path(&'a dyn LogNormalizer),
    Moller(MollerConfig),
}

impl fmt::Debug for Target<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Pseudo => f.write_str("Pseudo"),
            Target::Path(_) => f.write_str("Path(..)"),
            Target::Moller(c) => f.debug_tuple("Moller").field(c).finish(),
        }
    }
}

/// Method names as used in traces and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pseudo,
    Path,
    MollerGibbs,
    MollerPerfect,
}

impl Target<'_> {
    pub fn method(&self) -> Method {
        match self {
            Target::Pseudo => Method::Pseudo,
            Target::Path(_) => Method::Path,
            Target::Moller(MollerConfig {
                inner: InnerSampler::Gibbs { .. },
                ..
            }) => Method::MollerGibbs,
            Target::Moller(_) => Method::MollerPerfect,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pseudo => "pseudo",
            Method::Path => "path",
            Method::MollerGibbs => "moller-gibbs",
            Method::MollerPerfect => "moller-perfect",
        })
    }
}

/// Training data and model shared by every kernel.
#[derive(Debug, Clone)]
pub struct PosteriorContext<'g> {
    model: Model<'g>,
    labels: Labels,
    stats: TrainingStats,
    prior: Prior,
}

impl<'g> PosteriorContext<'g> {
    pub fn new(model: Model<'g>, labels: Labels, prior: Prior) -> Result<Self> {
        prior.check_labels(&labels)?;
        if prior.num_classes() != model.num_classes() {
            return Err(Error::Incompatible(format!(
                "prior has {} classes, model has {}",
                prior.num_classes(),
                model.num_classes()
            )));
        }
        let stats = TrainingStats::new(&model, &labels, prior.k_max)?;
        Ok(Self {
            model,
            labels,
            stats,
            prior,
        })
    }

    pub fn model(&self) -> &Model<'g> {
        &self.model
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn stats(&self) -> &TrainingStats {
        &self.stats
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    fn aux_potential(&self, z: &[u16], k: usize) -> f64 {
        self.model.potential_unchecked(z, k)
    }
}

fn accept<R: Rng + ?Sized>(log_rho: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    log_rho >= 0.0 || u.ln() < log_rho
}

/// One step targeting the pseudo-posterior.
pub fn mh_step_pseudo<R: Rng + ?Sized>(
    state: ModelParams,
    cfg: &ProposalConfig,
    ctx: &PosteriorContext<'_>,
    rng: &mut R,
) -> (ModelParams, bool) {
    let prop = propose(state, cfg, rng);
    let st = ctx.stats();
    let log_rho = st.pseudo_log_likelihood(prop.params) - st.pseudo_log_likelihood(state)
        + prop.log_correction();
    if accept(log_rho, rng) {
        (prop.params, true)
    } else {
        (state, false)
    }
}

/// One step targeting the posterior with a tabulated normaliser.
pub fn mh_step_path<R: Rng + ?Sized>(
    state: ModelParams,
    cfg: &ProposalConfig,
    ctx: &PosteriorContext<'_>,
    normalizer: &dyn LogNormalizer,
    rng: &mut R,
) -> Result<(ModelParams, bool)> {
    let prop = propose(state, cfg, rng);
    let st = ctx.stats();
    let target = |p: ModelParams| -> Result<f64> {
        Ok(p.beta * st.potential(p.k) - normalizer.log_z(p)?)
    };
    let log_rho = target(prop.params)? - target(state)? + prop.log_correction();
    Ok(if accept(log_rho, rng) {
        (prop.params, true)
    } else {
        (state, false)
    })
}

/// Outcome of one auxiliary-variable step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollerStep {
    pub state: ModelParams,
    pub accepted: bool,
    /// The inner perfect sampler failed to coalesce; the move was rejected.
    pub timed_out: bool,
}

/// Draws auxiliary labels at `params`; `None` on a perfect-sampling timeout.
fn draw_auxiliary<R: Rng + ?Sized>(
    model: &Model<'_>,
    params: ModelParams,
    inner: InnerSampler,
    rng: &mut R,
) -> Result<(Labels, bool)> {
    match inner {
        InnerSampler::Gibbs { sweeps } => {
            let init = uniform_labels(model.n(), model.num_classes(), rng);
            let mut chain = GibbsChain::new(model, params, &init)?;
            for _ in 0..sweeps {
                chain.sweep(rng);
            }
            Ok((chain.to_labels(), true))
        }
        InnerSampler::Cftp {
            max_site_updates,
            envelope_beta,
        } => {
            let seed: u64 = rng.random();
            let res = match envelope_beta {
                Some(b0) if b0 < params.beta => {
                    cftp_with_envelope(model, params, b0, seed, max_site_updates)?
                }
                _ => cftp_sample(model, params, seed, max_site_updates)?,
            };
            Ok((res.sample, res.coalesced))
        }
    }
}

/// One auxiliary-variable step. `z` is replaced by the proposal's auxiliary
/// draw on acceptance and kept otherwise.
///
/// The auxiliary density `exp(beta_hat * S(z; k_hat))` enters unnormalised:
/// its constant appears in both numerator and denominator.
pub fn mh_step_moller<R: Rng + ?Sized>(
    state: ModelParams,
    z: &mut Labels,
    cfg: &ProposalConfig,
    ctx: &PosteriorContext<'_>,
    inner: InnerSampler,
    plugin: PluginEstimate,
    rng: &mut R,
) -> Result<MollerStep> {
    let prop = propose(state, cfg, rng);
    let (z_new, ok) = draw_auxiliary(ctx.model(), prop.params, inner, rng)?;
    if !ok {
        return Ok(MollerStep {
            state,
            accepted: false,
            timed_out: true,
        });
    }
    let log_rho = moller_log_ratio(ctx, state, z.as_slice(), prop, z_new.as_slice(), plugin);
    if accept(log_rho, rng) {
        *z = z_new;
        Ok(MollerStep {
            state: prop.params,
            accepted: true,
            timed_out: false,
        })
    } else {
        Ok(MollerStep {
            state,
            accepted: false,
            timed_out: false,
        })
    }
}

/// Log acceptance ratio of the auxiliary-variable move
/// `(state, z) -> (prop, z_new)`.
pub fn moller_log_ratio(
    ctx: &PosteriorContext<'_>,
    state: ModelParams,
    z: &[u16],
    prop: Proposal,
    z_new: &[u16],
    plugin: PluginEstimate,
) -> f64 {
    let st = ctx.stats();
    let (p, q) = (state, prop.params);
    let likelihood = q.beta * st.potential(q.k) - p.beta * st.potential(p.k);
    let aux = plugin.beta_hat
        * (ctx.aux_potential(z_new, plugin.k_hat) - ctx.aux_potential(z, plugin.k_hat));
    let swap = p.beta * ctx.aux_potential(z, p.k) - q.beta * ctx.aux_potential(z_new, q.k);
    likelihood + aux + swap + prop.log_correction()
}

/// Iteration budget and randomness of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub iters: usize,
    pub burnin: usize,
    pub proposal: ProposalConfig,
    pub seed: u64,
}

impl ChainConfig {
    pub fn new(iters: usize, burnin: usize, proposal: ProposalConfig, seed: u64) -> Result<Self> {
        if iters <= burnin {
            return Err(invalid(format!("iters ({iters}) must exceed burn-in ({burnin})")));
        }
        Ok(Self {
            iters,
            burnin,
            proposal,
            seed,
        })
    }

    /// `beta_max / 2` and `ceil(K / 2)`.
    pub fn initial_state(&self) -> ModelParams {
        ModelParams::new(
            self.proposal.beta_max / 2.0,
            self.proposal.k_max.div_ceil(2),
        )
    }
}

/// Provenance written at the top of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub method: Method,
    pub seed: u64,
    pub iters: usize,
    pub burnin: usize,
    pub proposal: ProposalConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moller: Option<MollerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plugin_updated: Option<PluginEstimate>,
    pub n: usize,
    pub p: usize,
    pub num_classes: usize,
    pub timeouts: usize,
}

/// Full record of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub header: TraceHeader,
    pub draws: Vec<ModelParams>,
    pub accepted: Vec<bool>,
    /// `S(z; k)/n` of the auxiliary labels after each step.
    pub aux_potential: Option<Vec<f64>>,
}

/// Runs a chain from [`ChainConfig::initial_state`].
pub fn run_chain(ctx: &PosteriorContext<'_>, target: Target<'_>, cfg: &ChainConfig) -> Result<ChainTrace> {
    let prop = &cfg.proposal;
    if prop.beta_max > ctx.prior().beta_max || prop.k_max > ctx.prior().k_max {
        return Err(invalid("proposal support exceeds the prior support"));
    }
    if let Target::Path(z) = target {
        if !z.covers(prop.beta_max, prop.k_max) {
            return Err(invalid("normaliser does not cover the prior support"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = cfg.initial_state();
    let mut draws = Vec::with_capacity(cfg.iters);
    let mut accepted = Vec::with_capacity(cfg.iters);
    let mut aux = Vec::new();
    let mut timeouts = 0;
    let mut plugin_updated = None;

    match target {
        Target::Pseudo => {
            for _ in 0..cfg.iters {
                let (s, a) = mh_step_pseudo(state, prop, ctx, &mut rng);
                state = s;
                draws.push(s);
                accepted.push(a);
            }
        }
        Target::Path(z) => {
            for _ in 0..cfg.iters {
                let (s, a) = mh_step_path(state, prop, ctx, z, &mut rng)?;
                state = s;
                draws.push(s);
                accepted.push(a);
            }
        }
        Target::Moller(mc) => {
            if !ctx.prior().contains(mc.plugin.params()) {
                return Err(invalid("plug-in estimate lies outside the prior support"));
            }
            let mut plugin = mc.plugin;
            let (mut z, ok) = draw_auxiliary(ctx.model(), state, mc.inner, &mut rng)?;
            if !ok {
                timeouts += 1;
            }
            let n = ctx.model().n() as f64;
            for it in 0..cfg.iters {
                let step = mh_step_moller(state, &mut z, prop, ctx, mc.inner, plugin, &mut rng)?;
                state = step.state;
                timeouts += step.timed_out as usize;
                draws.push(state);
                accepted.push(step.accepted);
                aux.push(ctx.aux_potential(z.as_slice(), state.k) / n);
                if mc.plugin_update_at == Some(it + 1) {
                    plugin = PluginEstimate::from_mean(&draws, prop.k_max)?;
                    plugin_updated = Some(plugin);
                }
            }
        }
    }

    let graph = ctx.model().graph();
    Ok(ChainTrace {
        header: TraceHeader {
            method: target.method(),
            seed: cfg.seed,
            iters: cfg.iters,
            burnin: cfg.burnin,
            proposal: *prop,
            moller: match target {
                Target::Moller(mc) => Some(mc),
                _ => None,
            },
            plugin_updated,
            n: graph.n(),
            p: graph.dim(),
            num_classes: ctx.model().num_classes(),
            timeouts,
        },
        draws,
        accepted,
        aux_potential: matches!(target, Target::Moller(_)).then_some(aux),
    })
}

impl ChainTrace {
    /// Draws after burn-in.
    pub fn posterior(&self) -> &[ModelParams] {
        &self.draws[self.header.burnin.min(self.draws.len())..]
    }

    /// Fraction of accepted moves after burn-in.
    pub fn acceptance_rate(&self) -> f64 {
        let post = &self.accepted[self.header.burnin.min(self.accepted.len())..];
        post.iter().filter(|&&a| a).count() as f64 / post.len().max(1) as f64
    }

    pub fn mean_beta(&self) -> f64 {
        let p = self.posterior();
        p.iter().map(|d| d.beta).sum::<f64>() / p.len() as f64
    }

    pub fn mean_k(&self) -> f64 {
        let p = self.posterior();
        p.iter().map(|d| d.k as f64).sum::<f64>() / p.len() as f64
    }

    /// Writes a `# {json}` provenance line followed by
    /// `iter,beta,k,accepted[,aux_potential]` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "# {}", serde_json::to_string(&self.header)?)?;
        let has_aux = self.aux_potential.is_some();
        writeln!(
            w,
            "iter,beta,k,accepted{}",
            if has_aux { ",aux_potential" } else { "" }
        )?;
        for (t, (d, a)) in self.draws.iter().zip(&self.accepted).enumerate() {
            write!(w, "{},{},{},{}", t + 1, d.beta, d.k, *a as u8)?;
            if let Some(aux) = &self.aux_potential {
                write!(w, ",{}", aux[t])?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = BufReader::new(File::open(path)?);
        let mut first = String::new();
        rdr.read_line(&mut first)?;
        let json = first
            .strip_prefix("# ")
            .ok_or_else(|| invalid(format!("{}: missing trace header", path.display())))?;
        let header: TraceHeader = serde_json::from_str(json.trim())?;
        let mut csv = csv::Reader::from_reader(rdr);
        let has_aux = csv.headers()?.len() == 5;
        let (mut draws, mut accepted) = (Vec::new(), Vec::new());
        let mut aux = Vec::new();
        for (row, rec) in csv.records().enumerate() {
            let rec = rec?;
            let field = |i: usize, name: &str| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| invalid(format!("missing column {name}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse {
                        path: path.to_path_buf(),
                        row: row + 1,
                        column: name.into(),
                        message: e.to_string(),
                    })
            };
            draws.push(ModelParams::new(field(1, "beta")?, field(2, "k")? as usize));
            accepted.push(field(3, "accepted")? != 0.0);
            if has_aux {
                aux.push(field(4, "aux_potential")?);
            }
        }
        Ok(Self {
            header,
            draws,
            accepted,
            aux_potential: has_aux.then_some(aux),
        })
    }
}

/// Maximiser of the pseudo-likelihood: exhaustive over `k`, golden-section
/// search over `beta` (the objective is concave in `beta`).
pub fn max_pseudo_likelihood(ctx: &PosteriorContext<'_>, tol: f64) -> PluginEstimate {
    let st = ctx.stats();
    let beta_max = ctx.prior().beta_max;
    let mut best = (f64::NEG_INFINITY, PluginEstimate::new(0.0, 1));
    for k in 1..=st.k_max() {
        let f = |b: f64| st.pseudo_log_likelihood(ModelParams::new(b, k));
        let (b, v) = golden_max(f, 0.0, beta_max, tol);
        if v > best.0 {
            best = (v, PluginEstimate::new(b, k));
        }
    }
    best.1
}

fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(lo, f(lo)), (mid, f(mid)), (hi, f(hi))]
        .into_iter()
        .fold((mid, f64::NEG_INFINITY), |acc, (x, v)| if v > acc.1 { (x, v) } else { acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CovariateMatrix, DistanceMetric, NeighborGraph};

    fn cfg(r: usize, k_max: usize) -> ProposalConfig {
        ProposalConfig::new(0.05, r, 4.0, k_max).unwrap()
    }

    fn line(xs: &[f64], k_max: usize) -> NeighborGraph {
        let x = CovariateMatrix::new(xs.len(), 1, xs.to_vec()).unwrap();
        NeighborGraph::build(&x, k_max, DistanceMetric::Euclidean).unwrap()
    }

    #[test]
    fn proposal_neighbourhoods() {
        let c = cfg(3, 125);
        assert_eq!(c.neighbourhood_size(1), 3);
        assert_eq!(c.neighbourhood_size(2), 4);
        assert_eq!(c.neighbourhood_size(60), 6);
        assert_eq!(c.neighbourhood_size(125), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = [0usize; 5];
        for _ in 0..3000 {
            let p = propose(ModelParams::new(2.0, 1), &c, &mut rng);
            assert!((2..=4).contains(&p.params.k));
            seen[p.params.k] += 1;
            let expect = (3.0 / c.neighbourhood_size(p.params.k) as f64).ln();
            assert!((p.log_q_ratio - expect).abs() < 1e-15);
            assert!(p.params.beta > 0.0 && p.params.beta < 4.0);
        }
        assert!(seen[2..].iter().all(|&s| s > 900));
        for _ in 0..200 {
            let p = propose(ModelParams::new(1.0, 60), &c, &mut rng);
            assert_eq!(p.log_q_ratio, 0.0);
            assert!(p.params.k != 60 && p.params.k.abs_diff(60) <= 3);
        }
    }

    #[test]
    fn jacobian_identity_and_symmetry() {
        assert_eq!(log_logistic_density(0.3) - log_logistic_density(0.3), 0.0);
        assert!((log_logistic_density(0.7) - log_logistic_density(-0.7)).abs() < 1e-15);
        let t: f64 = 1.3;
        let direct = (t.exp() / (1.0 + t.exp()).powi(2)).ln();
        assert!((log_logistic_density(t) - direct).abs() < 1e-14);
        let c = cfg(1, 5);
        assert!((c.beta(c.theta(1.234)) - 1.234).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(ProposalConfig::new(0.0, 1, 1.0, 5).is_err());
        assert!(ProposalConfig::new(0.1, 0, 1.0, 5).is_err());
        assert!(ProposalConfig::new(0.1, 6, 1.0, 5).is_err());
        assert!(ProposalConfig::new(0.1, 1, 1.0, 1).is_err());
        assert!(ChainConfig::new(10, 10, cfg(1, 5), 0).is_err());
    }

    #[test]
    fn plugin_rounding() {
        let d = |k| ModelParams::new(1.0, k);
        assert_eq!(PluginEstimate::from_mean(&[d(12), d(13)], 20).unwrap().k_hat, 12);
        assert_eq!(PluginEstimate::from_mean(&[d(12), d(13), d(13)], 20).unwrap().k_hat, 13);
        assert_eq!(PluginEstimate::from_mean(&[d(19), d(20)], 19).unwrap().k_hat, 19);
        assert!(PluginEstimate::from_mean(&[], 5).is_err());
    }

    fn ctx_for<'g>(g: &'g NeighborGraph, y: &[u16], k_max: usize) -> PosteriorContext<'g> {
        let model = Model::new(g, 2).unwrap();
        let labels = Labels::new(y.to_vec(), 2).unwrap();
        let prior = Prior::new(4.0, k_max, 2).unwrap();
        PosteriorContext::new(model, labels, prior).unwrap()
    }

    #[test]
    fn stats_match_model() {
        let g = line(&[0.0, 0.5, 1.7, 2.0, 3.5, 3.6, 5.0, 9.0], 3);
        let y = [0, 0, 1, 0, 1, 1, 0, 1];
        let ctx = ctx_for(&g, &y, 3);
        let labels = Labels::new(y.to_vec(), 2).unwrap();
        for k in 1..=3 {
            for beta in [0.0, 0.9, 3.1] {
                let p = ModelParams::new(beta, k);
                let a = ctx.stats().pseudo_log_likelihood(p);
                let b = ctx.model().pseudo_log_likelihood(&labels, p).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
            assert_eq!(ctx.stats().potential(k), ctx.model().potential(&labels, k).unwrap());
        }
    }

    #[test]
    fn pmle_boundaries() {
        let g = line(&[0.0, 1.0, 2.0, 3.0], 2);
        let ctx = ctx_for(&g, &[1, 1, 1, 1], 2);
        let est = max_pseudo_likelihood(&ctx, 1e-8);
        assert_eq!(est.beta_hat, 4.0);

        let g2 = line(&[0.0, 1.0], 1);
        let model = Model::new(&g2, 2).unwrap();
        let labels = Labels::new(vec![0, 0], 2).unwrap();
        let prior = Prior::new(3.0, 1, 2).unwrap();
        let ctx2 = PosteriorContext::new(model, labels, prior).unwrap();
        let est = max_pseudo_likelihood(&ctx2, 1e-8);
        assert_eq!((est.k_hat, est.beta_hat), (1, 3.0));
    }

    #[test]
    fn moller_ratio_n2_closed_form() {
        let g = line(&[0.0, 1.0], 1);
        let model = Model::new(&g, 2).unwrap();
        let labels = Labels::new(vec![0, 0], 2).unwrap();
        let prior = Prior::new(4.0, 1, 2).unwrap();
        let ctx = PosteriorContext::new(model, labels, prior).unwrap();
        // S(y) = 2 for agreeing labels, 0 otherwise.
        let (b, b2, bh) = (1.0, 1.7, 1.2);
        let z = [0u16, 1];
        let z_new = [1u16, 1];
        let prop = Proposal {
            params: ModelParams::new(b2, 1),
            log_q_ratio: 0.0,
            log_jacobian: 0.0,
        };
        let got = moller_log_ratio(
            &ctx,
            ModelParams::new(b, 1),
            &z,
            prop,
            &z_new,
            PluginEstimate::new(bh, 1),
        );
        let expect = (b2 - b) * 2.0 + bh * (2.0 - 0.0) + b * 0.0 - b2 * 2.0;
        assert!((got - expect).abs() < 1e-12);
        let same = Proposal {
            params: ModelParams::new(b, 1),
            ..prop
        };
        assert_eq!(
            moller_log_ratio(&ctx, ModelParams::new(b, 1), &z, same, &z, PluginEstimate::new(bh, 1)),
            0.0
        );
    }

    #[test]
    fn chains_are_deterministic_and_in_support() {
        let g = line(&[0.0, 0.5, 1.7, 2.0, 3.5, 3.6, 5.0, 9.0], 3);
        let ctx = ctx_for(&g, &[0, 0, 1, 0, 1, 1, 0, 1], 3);
        let cc = ChainConfig::new(300, 100, ProposalConfig::new(0.3, 1, 4.0, 3).unwrap(), 7).unwrap();
        let targets = [
            Target::Pseudo,
            Target::Moller(MollerConfig {
                inner: InnerSampler::Gibbs { sweeps: 20 },
                plugin: PluginEstimate::new(1.0, 2),
                plugin_update_at: Some(150),
            }),
            Target::Moller(MollerConfig {
                inner: InnerSampler::Cftp {
                    max_site_updates: 1 << 16,
                    envelope_beta: None,
                },
                plugin: PluginEstimate::new(1.0, 2),
                plugin_update_at: None,
            }),
        ];
        for t in targets {
            let a = run_chain(&ctx, t, &cc).unwrap();
            let b = run_chain(&ctx, t, &cc).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.draws.len(), 300);
            assert!(a.draws.iter().all(|d| d.beta >= 0.0 && d.beta <= 4.0 && (1..=3).contains(&d.k)));
            assert!(a.acceptance_rate() > 0.0);
        }
        let t = run_chain(&ctx, targets[1], &cc).unwrap();
        assert!(t.header.plugin_updated.is_some());
        assert_eq!(t.aux_potential.as_ref().unwrap().len(), 300);
    }

    #[test]
    fn trace_round_trip() {
        let g = line(&[0.0, 0.5, 1.7, 2.0, 3.5], 2);
        let ctx = ctx_for(&g, &[0, 0, 1, 1, 1], 2);
        let cc = ChainConfig::new(50, 10, ProposalConfig::new(0.1, 1, 4.0, 2).unwrap(), 3).unwrap();
        let mc = MollerConfig {
            inner: InnerSampler::Gibbs { sweeps: 5 },
            plugin: PluginEstimate::new(1.0, 1),
            plugin_update_at: None,
        };
        for t in [Target::Pseudo, Target::Moller(mc)] {
            let trace = run_chain(&ctx, t, &cc).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("trace.csv");
            trace.write_csv(&path).unwrap();
            assert_eq!(ChainTrace::read_csv(&path).unwrap(), trace);
        }
    }
}
