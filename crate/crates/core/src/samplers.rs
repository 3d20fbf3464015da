//! Label simulation at fixed `(beta, k)`.
//!
//! [`GibbsChain`] runs systematic-scan Gibbs sweeps (sites in index order,
//! one uniform variate per site update) while keeping per-site class counts
//! and the potential up to date incrementally, so a site update costs `O(G)`
//! plus `O(deg)` when the label actually changes.
//!
//! For two classes the same site update is monotone for the order
//! `class 0 < class 1`, which [`cftp_sample`] uses for coupling from the
//! past.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::Adjacency;
use crate::model::{Labels, Model, ModelParams};

/// Default cap on the coupling-from-the-past horizon, in site updates.
pub const DEFAULT_CFTP_SITE_UPDATES: u64 = 1 << 20;

const MAX_ENVELOPE_ATTEMPTS: usize = 1_000_000;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Single-site Gibbs chain with incremental neighbour counts.
#[derive(Debug, Clone)]
pub struct GibbsChain<'g> {
    model: Model<'g>,
    adj: Adjacency,
    params: ModelParams,
    scale: f64,
    labels: Vec<u16>,
    counts: Vec<u32>,
    /// `k * S(y; k)`.
    agree: f64,
}

impl<'g> GibbsChain<'g> {
    pub fn new(model: &Model<'g>, params: ModelParams, init: &Labels) -> Result<Self> {
        if !(params.beta >= 0.0 && params.beta.is_finite()) {
            return Err(invalid(format!("beta must be finite and non-negative, got {}", params.beta)));
        }
        if init.len() != model.n() || init.num_classes() != model.num_classes() {
            return Err(Error::DimensionMismatch {
                expected: model.n(),
                got: init.len(),
            });
        }
        let adj = model.graph().adjacency(params.k)?;
        let mut chain = Self {
            model: model.clone(),
            adj,
            params,
            scale: params.beta / params.k as f64,
            labels: init.as_slice().to_vec(),
            counts: Vec::new(),
            agree: 0.0,
        };
        chain.reset(init.as_slice());
        Ok(chain)
    }

    /// Restarts the chain from `labels`, keeping `(beta, k)`.
    pub fn reset(&mut self, labels: &[u16]) {
        let g = self.model.num_classes();
        self.labels.copy_from_slice(labels);
        self.counts.clear();
        self.counts.resize(labels.len() * g, 0);
        for i in 0..labels.len() {
            for &l in self.adj.of(i) {
                self.counts[i * g + labels[l as usize] as usize] += 1;
            }
        }
        self.agree = self.model.potential_unchecked(labels, self.params.k) * self.params.k as f64;
    }

    /// Draws fresh i.i.d. uniform labels.
    pub fn randomize<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let g = self.model.num_classes();
        let init: Vec<u16> = (0..self.labels.len())
            .map(|_| rng.random_range(0..g) as u16)
            .collect();
        self.reset(&init);
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn to_labels(&self) -> Labels {
        Labels::new(self.labels.clone(), self.model.num_classes())
            .expect("chain labels stay in range")
    }

    /// Current `S(y; k)`.
    pub fn potential(&self) -> f64 {
        self.agree / self.params.k as f64
    }

    /// Updates site `i` from its full conditional using the uniform `u`:
    /// the new class is the first `g` whose cumulative probability exceeds
    /// `u`.
    #[inline]
    pub fn update_site(&mut self, i: usize, u: f64) {
        let g = self.model.num_classes();
        let weights = self.model.class_weights();
        let c = &self.counts[i * g..(i + 1) * g];
        let new = if g == 2 {
            let d = self.scale * (weights[1] * c[1] as f64 - weights[0] * c[0] as f64);
            let p0 = 1.0 / (1.0 + d.exp());
            if u < p0 {
                0
            } else {
                1
            }
        } else {
            let mut w = [0.0f64; 16];
            let mut buf;
            let w: &mut [f64] = if g <= 16 {
                &mut w[..g]
            } else {
                buf = vec![0.0; g];
                &mut buf
            };
            let mut m = f64::NEG_INFINITY;
            for h in 0..g {
                w[h] = self.scale * weights[h] * c[h] as f64;
                m = m.max(w[h]);
            }
            let mut total = 0.0;
            for v in w.iter_mut() {
                *v = (*v - m).exp();
                total += *v;
            }
            let target = u * total;
            let mut acc = 0.0;
            let mut chosen = g - 1;
            for (h, v) in w.iter().enumerate() {
                acc += v;
                if target < acc {
                    chosen = h;
                    break;
                }
            }
            chosen
        };
        let old = self.labels[i] as usize;
        if new != old {
            self.agree += weights[new] * c[new] as f64 - weights[old] * c[old] as f64;
            self.labels[i] = new as u16;
            for &l in self.adj.of(i) {
                let base = l as usize * g;
                self.counts[base + old] -= 1;
                self.counts[base + new] += 1;
            }
        }
    }

    /// One systematic-scan sweep over all sites.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for i in 0..self.labels.len() {
            let u: f64 = rng.random();
            self.update_site(i, u);
        }
    }

    /// Probability that site `i` takes class 0 under the current state.
    pub fn prob_class0(&self, i: usize) -> f64 {
        let g = self.model.num_classes();
        let weights = self.model.class_weights();
        let c = &self.counts[i * g..(i + 1) * g];
        let mut w: Vec<f64> = (0..g)
            .map(|h| self.scale * weights[h] * c[h] as f64)
            .collect();
        crate::model::softmax_in_place(&mut w);
        w[0]
    }
}

/// One systematic-scan sweep from `y`.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    model: &Model<'_>,
    y: &Labels,
    params: ModelParams,
    rng: &mut R,
) -> Result<Labels> {
    let mut chain = GibbsChain::new(model, params, y)?;
    chain.sweep(rng);
    Ok(chain.to_labels())
}

/// Runs `n_sweeps` sweeps from `init` (i.i.d. uniform labels when `None`)
/// and returns the final state.
pub fn gibbs_sample(
    model: &Model<'_>,
    params: ModelParams,
    n_sweeps: usize,
    seed: u64,
    init: Option<&Labels>,
) -> Result<Labels> {
    if n_sweeps == 0 {
        return Err(invalid("n_sweeps must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    let start = match init {
        Some(y) => y.clone(),
        None => uniform_labels(model.n(), model.num_classes(), &mut rng),
    };
    let mut chain = GibbsChain::new(model, params, &start)?;
    for _ in 0..n_sweeps {
        chain.sweep(&mut rng);
    }
    Ok(chain.to_labels())
}

pub fn uniform_labels<R: Rng + ?Sized>(n: usize, g: usize, rng: &mut R) -> Labels {
    let classes = (0..n).map(|_| rng.random_range(0..g) as u16).collect();
    Labels::new(classes, g).expect("uniform labels are in range")
}

/// Outcome of a coupling-from-the-past run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CftpResult {
    pub sample: Labels,
    /// Sweeps into the past of the epoch that coalesced (or of the last
    /// epoch tried).
    pub start_epoch: usize,
    pub coalesced: bool,
    /// Total site updates spent, summed over both chains of every epoch.
    pub site_updates: u64,
}

/// Random source for the sweep at time `-t`; identical across epochs.
fn sweep_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

/// Exact draw from the two-class model by monotone coupling from the past.
///
/// Chains started from the all-0 and all-1 states at time `-T` share the
/// uniforms of every sweep; `T` doubles (1, 2, 4, ... sweeps) until they
/// agree at time 0 or `T * n` would exceed `max_site_updates`.
pub fn cftp_sample(
    model: &Model<'_>,
    params: ModelParams,
    seed: u64,
    max_site_updates: u64,
) -> Result<CftpResult> {
    if model.num_classes() != 2 {
        return Err(Error::NotBinary(model.num_classes()));
    }
    let n = model.n();
    let lower_init = Labels::constant(n, 0, 2)?;
    let upper_init = Labels::constant(n, 1, 2)?;
    let mut lower = GibbsChain::new(model, params, &lower_init)?;
    let mut upper = GibbsChain::new(model, params, &upper_init)?;
    let mut horizon = 1usize;
    let mut spent = 0u64;
    loop {
        lower.reset(lower_init.as_slice());
        upper.reset(upper_init.as_slice());
        for t in (1..=horizon).rev() {
            let mut rng = sweep_rng(seed, t);
            for i in 0..n {
                let u: f64 = rng.random();
                lower.update_site(i, u);
                upper.update_site(i, u);
            }
            debug_assert!(
                dominates(upper.labels(), lower.labels()),
                "sandwich violated at time -{t}"
            );
        }
        spent += 2 * (horizon as u64) * n as u64;
        if lower.labels() == upper.labels() {
            return Ok(CftpResult {
                sample: lower.to_labels(),
                start_epoch: horizon,
                coalesced: true,
                site_updates: spent,
            });
        }
        if (2 * horizon as u64) * n as u64 > max_site_updates {
            return Ok(CftpResult {
                sample: lower.to_labels(),
                start_epoch: horizon,
                coalesced: false,
                site_updates: spent,
            });
        }
        horizon *= 2;
    }
}

/// Whether `upper >= lower` componentwise.
pub fn dominates(upper: &[u16], lower: &[u16]) -> bool {
    upper.iter().zip(lower).all(|(u, l)| u >= l)
}

/// Exact draw at `params.beta` by rejection from coupling-from-the-past
/// draws at `beta0 <= beta`.
///
/// A draw `z` at `beta0` is accepted with probability
/// `exp((beta - beta0) * (S(z) - S_max))`, where `S_max = n * max_g a_g`
/// bounds the potential.
pub fn cftp_with_envelope(
    model: &Model<'_>,
    params: ModelParams,
    beta0: f64,
    seed: u64,
    max_site_updates: u64,
) -> Result<CftpResult> {
    if !(beta0 >= 0.0 && beta0 <= params.beta) {
        return Err(invalid(format!(
            "envelope beta0={beta0} must lie in [0, beta={}]",
            params.beta
        )));
    }
    let s_max = model.n() as f64 * model.max_weight();
    let mut master = rng_from_seed(seed);
    let mut spent = 0u64;
    let inner = ModelParams::new(beta0, params.k);
    for _ in 0..MAX_ENVELOPE_ATTEMPTS {
        let draw_seed: u64 = master.random();
        let mut res = cftp_sample(model, inner, draw_seed, max_site_updates)?;
        spent += res.site_updates;
        if !res.coalesced {
            res.site_updates = spent;
            return Ok(res);
        }
        let s = model.potential_unchecked(res.sample.as_slice(), params.k);
        let log_accept = (params.beta - beta0) * (s - s_max);
        let u: f64 = master.random();
        if log_accept >= 0.0 || u.ln() < log_accept {
            res.site_updates = spent;
            return Ok(res);
        }
    }
    Ok(CftpResult {
        sample: Labels::constant(model.n(), 0, 2)?,
        start_epoch: 0,
        coalesced: false,
        site_updates: spent,
    })
}

/// Mean agreement fraction `S(y)/n` at one `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub beta: f64,
    pub mean_agreement: f64,
}

/// Gibbs simulation over a ladder of `beta` values at fixed `k`, reporting
/// the mean of `S(y)/n` over the second half of `sweeps` sweeps started from
/// uniform labels.
pub fn phase_scan(
    model: &Model<'_>,
    betas: &[f64],
    k: usize,
    sweeps: usize,
    seed: u64,
) -> Result<Vec<PhasePoint>> {
    if betas.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("betas must be sorted ascending"));
    }
    if sweeps < 2 {
        return Err(invalid("phase scan needs at least two sweeps"));
    }
    let n = model.n() as f64;
    let mut rng = rng_from_seed(seed);
    betas
        .iter()
        .map(|&beta| {
            let init = uniform_labels(model.n(), model.num_classes(), &mut rng);
            let mut chain = GibbsChain::new(model, ModelParams::new(beta, k), &init)?;
            let keep = sweeps / 2;
            for _ in 0..sweeps - keep {
                chain.sweep(&mut rng);
            }
            let mut total = 0.0;
            for _ in 0..keep {
                chain.sweep(&mut rng);
                total += chain.potential();
            }
            Ok(PhasePoint {
                beta,
                mean_agreement: total / (keep as f64 * n),
            })
        })
        .collect()
}

/// First `beta` (linearly interpolated) at which the scanned agreement
/// reaches `level`, if any.
pub fn saturation_beta(scan: &[PhasePoint], level: f64) -> Option<f64> {
    let first = scan.first()?;
    if first.mean_agreement >= level {
        return Some(first.beta);
    }
    scan.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if b.mean_agreement >= level {
            let t = (level - a.mean_agreement) / (b.mean_agreement - a.mean_agreement);
            Some(a.beta + t * (b.beta - a.beta))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CovariateMatrix, DistanceMetric, NeighborGraph};

    fn graph(xs: &[f64], k_max: usize) -> NeighborGraph {
        let x = CovariateMatrix::new(xs.len(), 1, xs.to_vec()).unwrap();
        NeighborGraph::build(&x, k_max, DistanceMetric::Euclidean).unwrap()
    }

    const XS: [f64; 7] = [0.0, 0.3, 1.1, 1.5, 2.9, 3.0, 4.2];

    #[test]
    fn incremental_state_matches_recomputation() {
        let g = graph(&XS, 3);
        let m = Model::with_class_weights(&g, vec![1.0, 1.7, 0.6]).unwrap();
        let mut rng = rng_from_seed(3);
        let init = uniform_labels(7, 3, &mut rng);
        let mut chain = GibbsChain::new(&m, ModelParams::new(1.3, 2), &init).unwrap();
        for _ in 0..50 {
            chain.sweep(&mut rng);
            let y = chain.to_labels();
            let s = m.potential(&y, 2).unwrap();
            assert!((chain.potential() - s).abs() < 1e-9);
            for i in 0..7 {
                let fc = m.full_conditional(i, &y, ModelParams::new(1.3, 2)).unwrap();
                assert!((chain.prob_class0(i) - fc[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sweep_is_deterministic_given_seed() {
        let g = graph(&XS, 3);
        let m = Model::new(&g, 2).unwrap();
        let p = ModelParams::new(2.0, 3);
        let a = gibbs_sample(&m, p, 20, 11, None).unwrap();
        let b = gibbs_sample(&m, p, 20, 11, None).unwrap();
        assert_eq!(a, b);
        let y = Labels::constant(7, 0, 2).unwrap();
        let one = gibbs_sample(&m, p, 1, 5, Some(&y)).unwrap();
        let mut rng = rng_from_seed(5);
        assert_eq!(one, gibbs_sweep(&m, &y, p, &mut rng).unwrap());
        assert!(gibbs_sample(&m, p, 0, 5, None).is_err());
    }

    #[test]
    fn beta_zero_sweep_ignores_state() {
        let g = graph(&XS, 3);
        let m = Model::new(&g, 2).unwrap();
        let p = ModelParams::new(0.0, 2);
        let a = gibbs_sample(&m, p, 1, 9, Some(&Labels::constant(7, 0, 2).unwrap())).unwrap();
        let b = gibbs_sample(&m, p, 1, 9, Some(&Labels::constant(7, 1, 2).unwrap())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monotone_site_update() {
        // For every site and pairs of ordered states, P(class 0) is larger in
        // the lower state.
        let g = graph(&XS, 3);
        let m = Model::with_class_weights(&g, vec![1.0, 1.4]).unwrap();
        let p = ModelParams::new(2.5, 3);
        let mut rng = rng_from_seed(1);
        for _ in 0..200 {
            let upper = uniform_labels(7, 2, &mut rng);
            let lower: Vec<u16> = upper
                .as_slice()
                .iter()
                .map(|&c| if c == 1 && rng.random_bool(0.5) { 0 } else { c })
                .collect();
            let lower = Labels::new(lower, 2).unwrap();
            let cu = GibbsChain::new(&m, p, &upper).unwrap();
            let cl = GibbsChain::new(&m, p, &lower).unwrap();
            for i in 0..7 {
                assert!(cl.prob_class0(i) >= cu.prob_class0(i) - 1e-15);
            }
        }
    }

    #[test]
    fn cftp_requires_two_classes() {
        let g = graph(&XS, 3);
        let m = Model::new(&g, 3).unwrap();
        assert!(matches!(
            cftp_sample(&m, ModelParams::new(1.0, 1), 0, 1 << 16),
            Err(Error::NotBinary(3))
        ));
    }

    #[test]
    fn cftp_at_beta_zero_coalesces_in_one_sweep() {
        let g = graph(&XS, 3);
        let m = Model::new(&g, 2).unwrap();
        let r = cftp_sample(&m, ModelParams::new(0.0, 2), 4, 1 << 16).unwrap();
        assert!(r.coalesced);
        assert_eq!(r.start_epoch, 1);
    }

    #[test]
    fn cftp_extending_horizon_keeps_sample() {
        // Once coalesced from -T the same variates give the same value from
        // any earlier start, since times -T..-1 reuse their uniforms.
        let g = graph(&XS, 3);
        let m = Model::new(&g, 2).unwrap();
        let p = ModelParams::new(1.5, 2);
        for seed in 0..20 {
            let r = cftp_sample(&m, p, seed, 1 << 16).unwrap();
            assert!(r.coalesced);
            let longer = 4 * r.start_epoch;
            for start in [0u16, 1] {
                let init = Labels::constant(7, start, 2).unwrap();
                let mut chain = GibbsChain::new(&m, p, &init).unwrap();
                for t in (1..=longer).rev() {
                    let mut rng = sweep_rng(seed, t);
                    for i in 0..7 {
                        let u: f64 = rng.random();
                        chain.update_site(i, u);
                    }
                }
                assert_eq!(chain.labels(), r.sample.as_slice());
            }
        }
    }

    #[test]
    fn cftp_reports_timeout() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let g = graph(&xs, 5);
        let m = Model::new(&g, 2).unwrap();
        let r = cftp_sample(&m, ModelParams::new(60.0, 5), 2, 200).unwrap();
        assert!(!r.coalesced);
    }

    #[test]
    fn envelope_with_equal_beta_accepts_first_draw() {
        let g = graph(&XS, 3);
        let m = Model::new(&g, 2).unwrap();
        let p = ModelParams::new(1.0, 2);
        let r = cftp_with_envelope(&m, p, 1.0, 8, 1 << 16).unwrap();
        let mut master = rng_from_seed(8);
        let first: u64 = master.random();
        let direct = cftp_sample(&m, p, first, 1 << 16).unwrap();
        assert_eq!(r.sample, direct.sample);
        assert!(cftp_with_envelope(&m, p, 1.5, 8, 1 << 16).is_err());
    }

    #[test]
    fn large_beta_saturates() {
        let xs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin() * 5.0).collect();
        let g = graph(&xs, 4);
        let m = Model::new(&g, 2).unwrap();
        let init = Labels::constant(30, 1, 2).unwrap();
        let y = gibbs_sample(&m, ModelParams::new(40.0, 4), 200, 3, Some(&init)).unwrap();
        assert_eq!(y.class_counts(), vec![0, 30]);
    }

    #[test]
    fn phase_scan_rises_from_one_over_g() {
        let xs: Vec<f64> = (0..60).map(|i| (i as f64 * 0.71).sin() * 5.0 + i as f64 * 0.1).collect();
        let g = graph(&xs, 5);
        let m = Model::new(&g, 2).unwrap();
        let betas: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let scan = phase_scan(&m, &betas, 5, 400, 7).unwrap();
        assert!((scan[0].mean_agreement - 0.5).abs() < 0.03, "{scan:?}");
        assert!(scan.last().unwrap().mean_agreement > 0.97);
        for w in scan.windows(2) {
            assert!(w[1].mean_agreement >= w[0].mean_agreement - 0.03, "{scan:?}");
        }
        let knee = saturation_beta(&scan, 0.9).unwrap();
        assert!(knee > 0.0 && knee < 8.0);
        assert!(phase_scan(&m, &[1.0, 0.5], 5, 10, 0).is_err());
    }
}
