//! The symmetrised Boltzmann k-NN model.
//!
//! For labels `y` the potential is
//! `S(y; k) = (1/k) * sum_i a_{y_i} * #{l in N^k_i : y_l = y_i}`
//! and the joint density is `exp(beta * S(y; k)) / Z(beta, k)`. The class
//! weights `a_g` default to 1.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{NeighborGraph, NewPointNeighbors};

/// Class labels, stored 0-based (`0..num_classes`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Labels {
    classes: Vec<u16>,
    num_classes: usize,
}

impl Labels {
    pub fn new(classes: Vec<u16>, num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(invalid(format!("need at least two classes, got {num_classes}")));
        }
        if let Some(&c) = classes.iter().find(|&&c| c as usize >= num_classes) {
            return Err(invalid(format!("label {c} outside 0..{num_classes}")));
        }
        Ok(Self {
            classes,
            num_classes,
        })
    }

    /// Builds labels from 1-based class numbers.
    pub fn from_one_based(classes: &[usize], num_classes: usize) -> Result<Self> {
        let zero: Vec<u16> = classes
            .iter()
            .map(|&c| {
                if c == 0 || c > num_classes {
                    Err(invalid(format!("class {c} outside 1..={num_classes}")))
                } else {
                    Ok((c - 1) as u16)
                }
            })
            .collect::<Result<_>>()?;
        Self::new(zero, num_classes)
    }

    /// All points in `class`.
    pub fn constant(n: usize, class: u16, num_classes: usize) -> Result<Self> {
        Self::new(vec![class; n], num_classes)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.classes[i] as usize
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.classes
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &c in &self.classes {
            counts[c as usize] += 1;
        }
        counts
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            classes: idx.iter().map(|&i| self.classes[i]).collect(),
            num_classes: self.num_classes,
        }
    }

    /// Applies a permutation of the class names.
    pub fn relabel(&self, perm: &[u16]) -> Result<Self> {
        if perm.len() != self.num_classes {
            return Err(invalid("relabelling must cover every class"));
        }
        Self::new(
            self.classes.iter().map(|&c| perm[c as usize]).collect(),
            self.num_classes,
        )
    }
}

/// Model parameters `(beta, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub k: usize,
}

impl ModelParams {
    pub fn new(beta: f64, k: usize) -> Self {
        Self { beta, k }
    }
}

/// Uniform prior on `{1..k_max} x [0, beta_max]`, plus the class weights of
/// the (possibly reweighted) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub beta_max: f64,
    pub k_max: usize,
    pub class_weights: Vec<f64>,
}

impl Prior {
    pub fn new(beta_max: f64, k_max: usize, num_classes: usize) -> Result<Self> {
        Self::with_weights(beta_max, k_max, vec![1.0; num_classes])
    }

    pub fn with_weights(beta_max: f64, k_max: usize, class_weights: Vec<f64>) -> Result<Self> {
        if !(beta_max > 0.0 && beta_max.is_finite()) {
            return Err(invalid(format!("beta_max must be positive, got {beta_max}")));
        }
        if k_max == 0 {
            return Err(invalid("k_max must be at least 1"));
        }
        if class_weights.len() < 2 {
            return Err(invalid("need at least two classes"));
        }
        if class_weights.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(invalid("class weights must be positive"));
        }
        Ok(Self {
            beta_max,
            k_max,
            class_weights,
        })
    }

    /// Weights `a_g = p_g * n / n_g` for known population class probabilities.
    pub fn unbalanced_weights(labels: &Labels, population: &[f64]) -> Result<Vec<f64>> {
        if population.len() != labels.num_classes() {
            return Err(Error::DimensionMismatch {
                expected: labels.num_classes(),
                got: population.len(),
            });
        }
        let n = labels.len() as f64;
        labels
            .class_counts()
            .iter()
            .zip(population)
            .map(|(&ng, &pg)| {
                if ng == 0 {
                    Err(invalid("class absent from training data"))
                } else {
                    Ok(pg * n / ng as f64)
                }
            })
            .collect()
    }

    pub fn num_classes(&self) -> usize {
        self.class_weights.len()
    }

    /// Checks the prior against the training labels: `k_max` may not exceed
    /// the smallest non-empty class.
    pub fn check_labels(&self, labels: &Labels) -> Result<()> {
        if labels.num_classes() != self.num_classes() {
            return Err(Error::DimensionMismatch {
                expected: self.num_classes(),
                got: labels.num_classes(),
            });
        }
        let min_class = labels
            .class_counts()
            .into_iter()
            .filter(|&c| c > 0)
            .min()
            .unwrap_or(0);
        if self.k_max > min_class {
            return Err(invalid(format!(
                "k_max={} exceeds the smallest class size {min_class}",
                self.k_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: ModelParams) -> bool {
        p.beta >= 0.0 && p.beta <= self.beta_max && p.k >= 1 && p.k <= self.k_max
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Normalises log-weights in place into probabilities.
pub(crate) fn softmax_in_place(w: &mut [f64]) {
    let m = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in w.iter_mut() {
        *v = (*v - m).exp();
        total += *v;
    }
    for v in w.iter_mut() {
        *v /= total;
    }
}

/// Largest configuration count `exact_log_z` will enumerate.
pub const ENUMERATION_LIMIT: usize = 1 << 20;

/// The model bound to a neighbour graph.
#[derive(Debug, Clone)]
pub struct Model<'g> {
    graph: &'g NeighborGraph,
    weights: Vec<f64>,
}

impl<'g> Model<'g> {
    pub fn new(graph: &'g NeighborGraph, num_classes: usize) -> Result<Self> {
        Self::with_class_weights(graph, vec![1.0; num_classes])
    }

    pub fn with_class_weights(graph: &'g NeighborGraph, weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(invalid("need at least two classes"));
        }
        if weights.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(invalid("class weights must be positive"));
        }
        Ok(Self { graph, weights })
    }

    pub fn from_prior(graph: &'g NeighborGraph, prior: &Prior) -> Result<Self> {
        Self::with_class_weights(graph, prior.class_weights.clone())
    }

    pub fn graph(&self) -> &'g NeighborGraph {
        self.graph
    }

    pub fn num_classes(&self) -> usize {
        self.weights.len()
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn class_weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    fn check_labels(&self, y: &Labels) -> Result<()> {
        if y.len() != self.graph.n() {
            return Err(Error::DimensionMismatch {
                expected: self.graph.n(),
                got: y.len(),
            });
        }
        if y.num_classes() != self.num_classes() {
            return Err(invalid(format!(
                "labels have {} classes, model has {}",
                y.num_classes(),
                self.num_classes()
            )));
        }
        Ok(())
    }

    fn check_params(&self, p: ModelParams) -> Result<()> {
        if !(p.beta >= 0.0 && p.beta.is_finite()) {
            return Err(invalid(format!("beta must be finite and non-negative, got {}", p.beta)));
        }
        self.graph.check_k(p.k)
    }

    /// `S(y; k)`.
    pub fn potential(&self, y: &Labels, k: usize) -> Result<f64> {
        self.check_labels(y)?;
        self.graph.check_k(k)?;
        Ok(self.potential_unchecked(y.as_slice(), k))
    }

    pub(crate) fn potential_unchecked(&self, y: &[u16], k: usize) -> f64 {
        let mut total = 0.0;
        for (i, &yi) in y.iter().enumerate() {
            let agree = self
                .graph
                .forward_unchecked(i, k)
                .iter()
                .filter(|&&l| y[l as usize] == yi)
                .count();
            total += self.weights[yi as usize] * agree as f64;
        }
        total / k as f64
    }

    /// `beta * S(y; k)`, the log of the unnormalised joint.
    pub fn log_joint_unnorm(&self, y: &Labels, p: ModelParams) -> Result<f64> {
        self.check_params(p)?;
        Ok(p.beta * self.potential(y, p.k)?)
    }

    /// Per-class counts over forward plus reverse neighbours of `i`.
    fn neighbour_counts(&self, i: usize, y: &[u16], k: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|c| *c = 0.0);
        for &l in self.graph.forward_unchecked(i, k) {
            out[y[l as usize] as usize] += 1.0;
        }
        for &l in self.graph.reverse_unchecked(i, k) {
            out[y[l as usize] as usize] += 1.0;
        }
    }

    /// Full conditional of `y_i` given the other labels. Mutual neighbours
    /// count twice.
    pub fn full_conditional(&self, i: usize, y: &Labels, p: ModelParams) -> Result<Vec<f64>> {
        self.check_labels(y)?;
        self.check_params(p)?;
        if i >= y.len() {
            return Err(Error::IndexOutOfRange { index: i, len: y.len() });
        }
        let mut w = vec![0.0; self.num_classes()];
        self.neighbour_counts(i, y.as_slice(), p.k, &mut w);
        let scale = p.beta / p.k as f64;
        for (g, v) in w.iter_mut().enumerate() {
            *v *= scale * self.weights[g];
        }
        softmax_in_place(&mut w);
        Ok(w)
    }

    /// The forward-only conditional that has no compatible joint
    /// distribution. Unweighted; kept for comparison.
    pub fn ha_conditional(&self, i: usize, y: &Labels, p: ModelParams) -> Result<Vec<f64>> {
        self.check_labels(y)?;
        self.check_params(p)?;
        if i >= y.len() {
            return Err(Error::IndexOutOfRange { index: i, len: y.len() });
        }
        let mut w = vec![0.0; self.num_classes()];
        for &l in self.graph.forward_unchecked(i, p.k) {
            w[y.get(l as usize)] += 1.0;
        }
        let scale = p.beta / p.k as f64;
        w.iter_mut().for_each(|v| *v *= scale);
        softmax_in_place(&mut w);
        Ok(w)
    }

    /// `sum_i log P(y_i | y_{-i})`.
    pub fn pseudo_log_likelihood(&self, y: &Labels, p: ModelParams) -> Result<f64> {
        self.check_labels(y)?;
        self.check_params(p)?;
        let ys = y.as_slice();
        let scale = p.beta / p.k as f64;
        let mut w = vec![0.0; self.num_classes()];
        let mut total = 0.0;
        for (i, &yi) in ys.iter().enumerate() {
            self.neighbour_counts(i, ys, p.k, &mut w);
            for (g, v) in w.iter_mut().enumerate() {
                *v *= scale * self.weights[g];
            }
            total += w[yi as usize] - log_sum_exp(&w);
        }
        Ok(total)
    }

    /// `log Z(beta, k)` by exhaustive enumeration of all `G^n` labelings.
    pub fn exact_log_z(&self, p: ModelParams) -> Result<f64> {
        self.check_params(p)?;
        let (n, g) = (self.n(), self.num_classes());
        let configs = (g as f64).powi(n as i32);
        if n > 20 || configs > ENUMERATION_LIMIT as f64 {
            return Err(Error::TooLargeForEnumeration { n, limit: 20 });
        }
        let mut y = vec![0u16; n];
        let mut terms = Vec::with_capacity(configs as usize);
        loop {
            terms.push(p.beta * self.potential_unchecked(&y, p.k));
            // odometer increment
            let mut pos = 0;
            loop {
                if pos == n {
                    return Ok(log_sum_exp(&terms));
                }
                y[pos] += 1;
                if (y[pos] as usize) < g {
                    break;
                }
                y[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Class counts of a new point's neighbourhood for every `k`, against
    /// the training labels `y`.
    pub fn predictive_counts(&self, nb: &NewPointNeighbors, y: &Labels) -> Result<PredictiveCounts> {
        self.check_labels(y)?;
        let (k_max, g) = (nb.k_max(), self.num_classes());
        let mut fwd = vec![0u32; (k_max + 1) * g];
        for (r, &i) in nb.forward(k_max).iter().enumerate() {
            let (prev, cur) = fwd.split_at_mut((r + 1) * g);
            cur[..g].copy_from_slice(&prev[r * g..]);
            cur[y.get(i as usize)] += 1;
        }
        let mut rev = vec![0u32; (k_max + 2) * g];
        for (i, &e) in nb.entry_k().iter().enumerate() {
            let e = (e as usize).min(k_max + 1);
            rev[e * g + y.get(i)] += 1;
        }
        for k in 1..=k_max {
            for c in 0..g {
                rev[k * g + c] += rev[(k - 1) * g + c];
            }
        }
        rev.truncate((k_max + 1) * g);
        Ok(PredictiveCounts {
            g,
            fwd,
            rev,
            weights: self.weights.clone(),
        })
    }

    /// Predictive distribution of the class of a new point.
    pub fn predictive_conditional(
        &self,
        nb: &NewPointNeighbors,
        y: &Labels,
        p: ModelParams,
    ) -> Result<Vec<f64>> {
        self.check_params(p)?;
        let counts = self.predictive_counts(nb, y)?;
        let mut out = vec![0.0; self.num_classes()];
        counts.conditional_into(p, &mut out);
        Ok(out)
    }
}

/// Cumulative class counts in the forward and reverse neighbourhoods of a
/// new point, indexed by `k`.
#[derive(Debug, Clone)]
pub struct PredictiveCounts {
    g: usize,
    fwd: Vec<u32>,
    rev: Vec<u32>,
    weights: Vec<f64>,
}

impl PredictiveCounts {
    pub fn num_classes(&self) -> usize {
        self.g
    }

    pub fn forward(&self, k: usize) -> &[u32] {
        &self.fwd[k * self.g..(k + 1) * self.g]
    }

    pub fn reverse(&self, k: usize) -> &[u32] {
        &self.rev[k * self.g..(k + 1) * self.g]
    }

    /// Writes the predictive class probabilities at `p` into `out`.
    pub fn conditional_into(&self, p: ModelParams, out: &mut [f64]) {
        let scale = p.beta / p.k as f64;
        let (f, r) = (self.forward(p.k), self.reverse(p.k));
        for g in 0..self.g {
            out[g] = scale * self.weights[g] * (f[g] + r[g]) as f64;
        }
        softmax_in_place(out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CovariateMatrix, DistanceMetric};

    fn graph(xs: &[f64], k_max: usize) -> NeighborGraph {
        let x = CovariateMatrix::new(xs.len(), 1, xs.to_vec()).unwrap();
        NeighborGraph::build(&x, k_max, DistanceMetric::Euclidean).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn potential_examples() {
        let g = graph(&[0.0, 1.0, 3.0], 2);
        let m = Model::new(&g, 2).unwrap();
        let same = Labels::constant(3, 1, 2).unwrap();
        assert_eq!(m.potential(&same, 1).unwrap(), 3.0);
        assert_eq!(m.potential(&same, 2).unwrap(), 3.0);
        let y = Labels::from_one_based(&[1, 1, 2], 2).unwrap();
        assert_eq!(m.potential(&y, 1).unwrap(), 2.0);

        let g2 = graph(&[0.0, 1.0], 1);
        let m2 = Model::new(&g2, 2).unwrap();
        let y2 = Labels::from_one_based(&[1, 2], 2).unwrap();
        assert_eq!(m2.potential(&y2, 1).unwrap(), 0.0);
        assert!(m2.potential(&y, 1).is_err());
    }

    #[test]
    fn log_joint_examples() {
        let g = graph(&[0.0, 1.0], 1);
        let m = Model::new(&g, 2).unwrap();
        let y = Labels::from_one_based(&[1, 1], 2).unwrap();
        assert_eq!(m.log_joint_unnorm(&y, ModelParams::new(2.0, 1)).unwrap(), 4.0);
        assert_eq!(m.log_joint_unnorm(&y, ModelParams::new(0.0, 1)).unwrap(), 0.0);
        assert_eq!(m.log_joint_unnorm(&y, ModelParams::new(4.0, 1)).unwrap(), 8.0);
    }

    #[test]
    fn full_conditional_examples() {
        let g = graph(&[0.0, 1.0], 1);
        let m = Model::new(&g, 2).unwrap();
        let y = Labels::from_one_based(&[2, 1], 2).unwrap();
        let uniform = m.full_conditional(0, &y, ModelParams::new(0.0, 1)).unwrap();
        assert_eq!(uniform, vec![0.5, 0.5]);
        let p = m.full_conditional(0, &y, ModelParams::new(3f64.ln(), 1)).unwrap();
        assert!(close(p[0], 0.9, 1e-14), "{p:?}");
        assert!(m.full_conditional(5, &y, ModelParams::new(1.0, 1)).is_err());
    }

    #[test]
    fn symmetric_graph_doubles_ha_conditional() {
        let g = graph(&[0.0, 1.0], 1);
        let m = Model::new(&g, 2).unwrap();
        let y = Labels::from_one_based(&[1, 2], 2).unwrap();
        for beta in [0.3, 1.0, 2.5] {
            let full = m.full_conditional(1, &y, ModelParams::new(beta, 1)).unwrap();
            let ha = m.ha_conditional(1, &y, ModelParams::new(2.0 * beta, 1)).unwrap();
            assert!(close(full[0], ha[0], 1e-14));
        }
    }

    #[test]
    fn ha_conditional_degenerates_at_large_beta() {
        let g = graph(&[0.0, 1.0, 2.0, 10.0], 2);
        let m = Model::new(&g, 2).unwrap();
        let y = Labels::from_one_based(&[1, 1, 1, 2], 2).unwrap();
        let p = m.ha_conditional(3, &y, ModelParams::new(200.0, 2)).unwrap();
        assert!(p[0] > 1.0 - 1e-12);
        let u = m.ha_conditional(3, &y, ModelParams::new(0.0, 2)).unwrap();
        assert_eq!(u, vec![0.5, 0.5]);
    }

    #[test]
    fn pseudo_likelihood_examples() {
        let g = graph(&[0.0, 1.0, 3.0, 4.5], 2);
        let m = Model::new(&g, 3).unwrap();
        let y = Labels::from_one_based(&[1, 3, 2, 2], 3).unwrap();
        let pl = m.pseudo_log_likelihood(&y, ModelParams::new(0.0, 2)).unwrap();
        assert!(close(pl, -4.0 * 3f64.ln(), 1e-14));

        let g2 = graph(&[0.0, 1.0], 1);
        let m2 = Model::new(&g2, 2).unwrap();
        let y2 = Labels::from_one_based(&[1, 1], 2).unwrap();
        for beta in [0.5, 1.0, 3.0] {
            let pl = m2.pseudo_log_likelihood(&y2, ModelParams::new(beta, 1)).unwrap();
            let e = (2.0 * beta).exp();
            assert!(close(pl, 2.0 * (e / (e + 1.0)).ln(), 1e-13));
        }
    }

    #[test]
    fn exact_log_z_examples() {
        let g = graph(&[0.0, 1.0], 1);
        let m = Model::new(&g, 2).unwrap();
        for beta in [0.0, 0.7, 2.0, 4.0] {
            let lz = m.exact_log_z(ModelParams::new(beta, 1)).unwrap();
            let expect = (2.0 * (2.0 * beta).exp() + 2.0).ln();
            assert!(close(lz, expect, 1e-14));
        }
        let g5 = graph(&[0.0, 1.0, 3.0, 4.0, 9.0], 3);
        let m5 = Model::new(&g5, 3).unwrap();
        let lz0 = m5.exact_log_z(ModelParams::new(0.0, 2)).unwrap();
        assert!(close(lz0, 5.0 * 3f64.ln(), 1e-14));
        let mut prev = lz0;
        for i in 1..10 {
            let lz = m5.exact_log_z(ModelParams::new(0.4 * i as f64, 2)).unwrap();
            assert!(lz > prev);
            prev = lz;
        }
    }

    #[test]
    fn exact_log_z_refuses_large_instances() {
        let xs: Vec<f64> = (0..21).map(|i| i as f64).collect();
        let g = graph(&xs, 2);
        let m = Model::new(&g, 2).unwrap();
        assert!(matches!(
            m.exact_log_z(ModelParams::new(1.0, 1)),
            Err(Error::TooLargeForEnumeration { .. })
        ));
    }

    #[test]
    fn predictive_far_point() {
        let g = graph(&[0.0, 1.0, 2.0, 10.0], 3);
        let m = Model::new(&g, 2).unwrap();
        // forward classes of a far-left point at k=3: points 0,1,2 -> (1,1,2)
        let y = Labels::from_one_based(&[1, 1, 2, 2], 2).unwrap();
        let nb = g.new_point_neighbors(&[-1000.0]).unwrap();
        assert!(nb.reverse(3).is_empty());
        for beta in [0.0, 0.8, 3.0] {
            let p = m.predictive_conditional(&nb, &y, ModelParams::new(beta, 3)).unwrap();
            let a = (2.0 * beta / 3.0).exp();
            let b = (beta / 3.0).exp();
            assert!(close(p[0], a / (a + b), 1e-14));
        }
        let big = m.predictive_conditional(&nb, &y, ModelParams::new(500.0, 3)).unwrap();
        assert!(big[0] > 1.0 - 1e-12);
    }

    #[test]
    fn predictive_counts_match_direct_sets() {
        let xs = [0.0, 0.4, 1.3, 2.0, 2.2, 5.0, 5.5];
        let g = graph(&xs, 4);
        let m = Model::new(&g, 2).unwrap();
        let y = Labels::from_one_based(&[1, 2, 1, 2, 2, 1, 1], 2).unwrap();
        for x_new in [-1.0, 0.9, 2.1, 4.0, 7.0] {
            let nb = g.new_point_neighbors(&[x_new]).unwrap();
            let counts = m.predictive_counts(&nb, &y).unwrap();
            for k in 1..=4 {
                let (fwd, rev) = g.query_new_point(&[x_new], k).unwrap();
                let mut f = [0u32; 2];
                let mut r = [0u32; 2];
                fwd.iter().for_each(|&i| f[y.get(i)] += 1);
                rev.iter().for_each(|&i| r[y.get(i)] += 1);
                assert_eq!(counts.forward(k), &f);
                assert_eq!(counts.reverse(k), &r);
            }
        }
    }

    #[test]
    fn weighted_potential_uses_centre_class() {
        let g = graph(&[0.0, 1.0, 3.0], 2);
        let m = Model::with_class_weights(&g, vec![2.0, 0.5]).unwrap();
        let y = Labels::from_one_based(&[1, 1, 2], 2).unwrap();
        // k=1 agreeing pairs: 1->2 and 2->1, both centred on class 1.
        assert_eq!(m.potential(&y, 1).unwrap(), 4.0);
    }

    #[test]
    fn unbalanced_weights() {
        let y = Labels::from_one_based(&[1, 1, 1, 2], 2).unwrap();
        let a = Prior::unbalanced_weights(&y, &[0.5, 0.5]).unwrap();
        assert!(close(a[0], 0.5 * 4.0 / 3.0, 1e-15));
        assert!(close(a[1], 2.0, 1e-15));
    }

    #[test]
    fn prior_checks_class_sizes() {
        let y = Labels::from_one_based(&[1, 1, 1, 2, 2], 2).unwrap();
        assert!(Prior::new(4.0, 2, 2).unwrap().check_labels(&y).is_ok());
        assert!(Prior::new(4.0, 3, 2).unwrap().check_labels(&y).is_err());
        assert!(Prior::new(0.0, 3, 2).is_err());
    }
}
