//! Independent reference computations for tests: brute-force neighbour
//! sets, exhaustive enumeration, and quadrature over `(beta, k)`.

#![allow(dead_code)]

use std::path::PathBuf;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Forward neighbour lists by sorting squared distances, ties by index.
pub fn brute_neighbours(x: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    (0..x.len())
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..x.len())
                .filter(|&j| j != i)
                .map(|j| {
                    let s: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                    (s, j)
                })
                .collect();
            d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            d.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// `S(y; k)` with unit weights.
pub fn potential(nb: &[Vec<usize>], y: &[u16], k: usize) -> f64 {
    let agree: usize = nb
        .iter()
        .enumerate()
        .map(|(i, l)| l.iter().filter(|&&j| y[j] == y[i]).count())
        .sum();
    agree as f64 / k as f64
}

/// Every labelling of `n` sites with `g` classes.
pub fn all_labelings(n: usize, g: usize) -> Vec<Vec<u16>> {
    let total = g.pow(n as u32);
    (0..total)
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let c = (code % g) as u16;
                    code /= g;
                    c
                })
                .collect()
        })
        .collect()
}

fn lse(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Exact `log Z(beta, k)` by enumeration.
pub fn log_z(x: &[Vec<f64>], g: usize, beta: f64, k: usize) -> f64 {
    let nb = brute_neighbours(x, k);
    let terms: Vec<f64> = all_labelings(x.len(), g)
        .iter()
        .map(|y| beta * potential(&nb, y, k))
        .collect();
    lse(&terms)
}

/// Exact distribution over labelings at `(beta, k)`, indexed like
/// [`all_labelings`].
pub fn label_distribution(x: &[Vec<f64>], g: usize, beta: f64, k: usize) -> Vec<f64> {
    let nb = brute_neighbours(x, k);
    let w: Vec<f64> = all_labelings(x.len(), g)
        .iter()
        .map(|y| beta * potential(&nb, y, k))
        .collect();
    let z = lse(&w);
    w.iter().map(|v| (v - z).exp()).collect()
}

/// Index of a labelling in [`all_labelings`] order.
pub fn labeling_index(y: &[u16], g: usize) -> usize {
    y.iter().rev().fold(0, |acc, &c| acc * g + c as usize)
}

/// Pseudo-log-likelihood with unit weights: symmetric counts (forward plus
/// reverse, mutual neighbours twice).
pub fn pseudo_ll(x: &[Vec<f64>], y: &[u16], g: usize, beta: f64, k: usize) -> f64 {
    let nb = brute_neighbours(x, k);
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut c = vec![0.0; g];
        for &j in &nb[i] {
            c[y[j] as usize] += 1.0;
        }
        for l in 0..n {
            if nb[l].contains(&i) {
                c[y[l] as usize] += 1.0;
            }
        }
        let w: Vec<f64> = c.iter().map(|v| beta / k as f64 * v).collect();
        total += w[y[i] as usize] - lse(&w);
    }
    total
}

/// Which log-target a quadrature oracle integrates.
#[derive(Clone, Copy)]
pub enum OracleTarget {
    Pseudo,
    Exact,
}

/// Posterior mass of each `(k, beta-bin)` cell under a uniform prior on
/// `{1..k_max} x [0, beta_max]`, by midpoint quadrature with `sub` points
/// per bin. Returned row-major in k.
pub fn posterior_cells(
    x: &[Vec<f64>],
    y: &[u16],
    g: usize,
    beta_max: f64,
    k_max: usize,
    bins: usize,
    sub: usize,
    target: OracleTarget,
) -> Vec<f64> {
    let h = beta_max / (bins * sub) as f64;
    let mut logs = Vec::with_capacity(k_max * bins);
    for k in 1..=k_max {
        let nb = brute_neighbours(x, k);
        let s = potential(&nb, y, k);
        for b in 0..bins {
            let vals: Vec<f64> = (0..sub)
                .map(|j| {
                    let beta = (b * sub + j) as f64 * h + 0.5 * h;
                    match target {
                        OracleTarget::Pseudo => pseudo_ll(x, y, g, beta, k),
                        OracleTarget::Exact => beta * s - log_z(x, g, beta, k),
                    }
                })
                .collect();
            logs.push(lse(&vals) + h.ln());
        }
    }
    let z = lse(&logs);
    logs.iter().map(|v| (v - z).exp()).collect()
}

/// Histogram of draws over the same cells as [`posterior_cells`].
pub fn draw_cells(draws: &[(f64, usize)], beta_max: f64, k_max: usize, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; k_max * bins];
    for &(beta, k) in draws {
        let b = ((beta / beta_max * bins as f64) as usize).min(bins - 1);
        h[(k - 1) * bins + b] += 1.0;
    }
    let m = draws.len() as f64;
    h.iter_mut().for_each(|v| *v /= m);
    h
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
