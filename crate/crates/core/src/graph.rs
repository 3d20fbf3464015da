//! Asymmetric k-nearest-neighbour structure over the training covariates.
//!
//! Every training point keeps the full list of the other points sorted by
//! increasing distance (ties broken by ascending index), so the forward
//! neighbourhood `N^k_i` of any `k` is a prefix of that list. Reverse
//! neighbourhoods, the points `l` with `i` in `N^k_l`, are stored once per
//! point sorted by the rank `i` holds in `l`'s list, which makes the reverse
//! set of every `k <= K` a prefix as well.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Row-major `n x p` matrix of real covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CovariateMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(invalid("covariate matrix needs at least one column"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New matrix holding the selected rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub(crate) fn map_rows(&self, mut f: impl FnMut(&[f64], &mut [f64])) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for (src, dst) in self.iter_rows().zip(data.chunks_exact_mut(self.cols)) {
            f(src, dst);
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

/// Distance used to rank neighbours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistanceMetric {
    Euclidean,
    /// Euclidean distance after whitening with the Cholesky factor of a
    /// covariance matrix (stored row-major, lower triangular).
    Mahalanobis { cholesky: Vec<f64>, dim: usize },
}

impl DistanceMetric {
    /// Mahalanobis metric scaled by the sample covariance of `x`.
    ///
    /// A diagonal jitter of `1e-9 * trace / p` is added when the covariance
    /// is numerically singular.
    pub fn mahalanobis_from(x: &CovariateMatrix) -> Result<Self> {
        let (n, p) = (x.rows(), x.cols());
        if n < 2 {
            return Err(Error::SingularCovariance);
        }
        let mut mean = vec![0.0; p];
        for r in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut cov = vec![0.0; p * p];
        for r in x.iter_rows() {
            for a in 0..p {
                let da = r[a] - mean[a];
                for b in 0..=a {
                    cov[a * p + b] += da * (r[b] - mean[b]);
                }
            }
        }
        for a in 0..p {
            for b in 0..=a {
                cov[a * p + b] /= (n - 1) as f64;
                cov[b * p + a] = cov[a * p + b];
            }
        }
        let trace: f64 = (0..p).map(|a| cov[a * p + a]).sum();
        if !(trace > 0.0) {
            return Err(Error::SingularCovariance);
        }
        let floor = 1e-12 * trace / p as f64;
        let chol = match cholesky(&cov, p, floor) {
            Some(l) => l,
            None => {
                let jitter = 1e-9 * trace / p as f64;
                for a in 0..p {
                    cov[a * p + a] += jitter;
                }
                cholesky(&cov, p, 0.0).ok_or(Error::SingularCovariance)?
            }
        };
        Ok(DistanceMetric::Mahalanobis {
            cholesky: chol,
            dim: p,
        })
    }

    fn check_dim(&self, p: usize) -> Result<()> {
        match self {
            DistanceMetric::Euclidean => Ok(()),
            DistanceMetric::Mahalanobis { dim, .. } if *dim == p => Ok(()),
            DistanceMetric::Mahalanobis { dim, .. } => Err(Error::DimensionMismatch {
                expected: *dim,
                got: p,
            }),
        }
    }

    /// Maps a point into the space where this metric is Euclidean.
    fn transform(&self, x: &[f64], out: &mut [f64]) {
        match self {
            DistanceMetric::Euclidean => out.copy_from_slice(x),
            DistanceMetric::Mahalanobis { cholesky, dim } => {
                // forward substitution: L z = x
                for a in 0..*dim {
                    let mut s = x[a];
                    for b in 0..a {
                        s -= cholesky[a * dim + b] * out[b];
                    }
                    out[a] = s / cholesky[a * dim + a];
                }
            }
        }
    }
}

fn cholesky(a: &[f64], p: usize, floor: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = a[i * p + j];
            for m in 0..j {
                s -= l[i * p + m] * l[j * p + m];
            }
            if i == j {
                if !(s > floor) {
                    return None;
                }
                l[i * p + i] = s.sqrt();
            } else {
                l[i * p + j] = s / l[j * p + j];
            }
        }
    }
    Some(l)
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Forward and reverse k-NN structure for all `k <= k_max`.
///
/// Indices are 0-based throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    n: usize,
    k_max: usize,
    metric: DistanceMetric,
    /// Training points mapped into metric space.
    points: CovariateMatrix,
    /// `order[i * (n-1) + r]`: the r-th nearest other point of i.
    order: Vec<u32>,
    /// `kth_dist[i * k_max + r]`: squared distance from i to `order[i][r]`.
    kth_dist: Vec<f64>,
    /// Reverse lists, CSR layout sorted by the rank held in the source list.
    rev_start: Vec<usize>,
    rev_src: Vec<u32>,
    /// `rev_count[i * (k_max+1) + k]`: size of the reverse set of i at k.
    rev_count: Vec<u32>,
}

impl NeighborGraph {
    pub fn build(x: &CovariateMatrix, k_max: usize, metric: DistanceMetric) -> Result<Self> {
        let n = x.rows();
        if n < 2 {
            return Err(invalid(format!("need at least two training points, got {n}")));
        }
        if k_max == 0 || k_max > n - 1 {
            return Err(Error::KOutOfRange { k: k_max, k_max: n - 1 });
        }
        metric.check_dim(x.cols())?;
        let points = x.map_rows(|src, dst| metric.transform(src, dst));

        let m = n - 1;
        let mut order = vec![0u32; n * m];
        let mut kth_dist = vec![0.0; n * k_max];
        let mut row: Vec<(f64, u32)> = Vec::with_capacity(m);
        for i in 0..n {
            row.clear();
            let pi = points.row(i);
            row.extend(
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (sq_dist(pi, points.row(j)), j as u32)),
            );
            row.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (r, &(d, j)) in row.iter().enumerate() {
                order[i * m + r] = j;
                if r < k_max {
                    kth_dist[i * k_max + r] = d;
                }
            }
        }

        // Transpose the first k_max columns of `order`.
        let mut lists: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        for l in 0..n {
            for r in 0..k_max {
                let i = order[l * m + r] as usize;
                lists[i].push((r as u32, l as u32));
            }
        }
        let mut rev_start = Vec::with_capacity(n + 1);
        let mut rev_src = Vec::with_capacity(n * k_max);
        let mut rev_count = vec![0u32; n * (k_max + 1)];
        rev_start.push(0);
        for (i, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            let mut pos = 0;
            for k in 0..=k_max {
                while pos < list.len() && (list[pos].0 as usize) < k {
                    pos += 1;
                }
                rev_count[i * (k_max + 1) + k] = pos as u32;
            }
            rev_src.extend(list.iter().map(|&(_, l)| l));
            rev_start.push(rev_src.len());
        }

        Ok(Self {
            n,
            k_max,
            metric,
            points,
            order,
            kth_dist,
            rev_start,
            rev_src,
            rev_count,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn metric(&self) -> &DistanceMetric {
        &self.metric
    }

    pub(crate) fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.k_max {
            Err(Error::KOutOfRange { k, k_max: self.k_max })
        } else {
            Ok(())
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            Err(Error::IndexOutOfRange { index: i, len: self.n })
        } else {
            Ok(())
        }
    }

    /// All other training points sorted by distance to `i`.
    pub fn order(&self, i: usize) -> &[u32] {
        let m = self.n - 1;
        &self.order[i * m..(i + 1) * m]
    }

    /// `N^k_i`: the `k` nearest neighbours of training point `i`.
    pub fn forward_neighbors(&self, i: usize, k: usize) -> Result<&[u32]> {
        self.check_index(i)?;
        self.check_k(k)?;
        Ok(self.forward_unchecked(i, k))
    }

    #[inline]
    pub(crate) fn forward_unchecked(&self, i: usize, k: usize) -> &[u32] {
        let m = self.n - 1;
        &self.order[i * m..i * m + k]
    }

    /// Points `l` such that `i` belongs to `N^k_l`, ordered by the rank of
    /// `i` in `l`'s neighbour list.
    pub fn reverse_neighbors(&self, i: usize, k: usize) -> Result<&[u32]> {
        self.check_index(i)?;
        self.check_k(k)?;
        Ok(self.reverse_unchecked(i, k))
    }

    #[inline]
    pub(crate) fn reverse_unchecked(&self, i: usize, k: usize) -> &[u32] {
        let start = self.rev_start[i];
        let len = self.rev_count[i * (self.k_max + 1) + k] as usize;
        &self.rev_src[start..start + len]
    }

    /// Symmetrised adjacency at `k`: forward plus reverse neighbours of each
    /// point, mutual neighbours listed twice.
    pub fn adjacency(&self, k: usize) -> Result<Adjacency> {
        self.check_k(k)?;
        let mut start = Vec::with_capacity(self.n + 1);
        let mut nbrs = Vec::with_capacity(2 * self.n * k);
        start.push(0);
        for i in 0..self.n {
            nbrs.extend_from_slice(self.forward_unchecked(i, k));
            nbrs.extend_from_slice(self.reverse_unchecked(i, k));
            start.push(nbrs.len());
        }
        Ok(Adjacency { k, start, nbrs })
    }

    /// Neighbourhood of a new covariate vector for every `k <= k_max`.
    pub fn new_point_neighbors(&self, x_new: &[f64]) -> Result<NewPointNeighbors> {
        if x_new.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x_new.len(),
            });
        }
        if x_new.iter().any(|v| !v.is_finite()) {
            return Err(invalid("new point has non-finite covariates"));
        }
        let mut z = vec![0.0; x_new.len()];
        self.metric.transform(x_new, &mut z);
        let mut dist: Vec<(f64, u32)> = self
            .points
            .iter_rows()
            .enumerate()
            .map(|(i, p)| (sq_dist(p, &z), i as u32))
            .collect();
        // x_new joins the reverse set of i once its distance beats the k-th
        // neighbour of i strictly.
        let entry_k: Vec<u32> = dist
            .iter()
            .enumerate()
            .map(|(i, &(d, _))| {
                let kd = &self.kth_dist[i * self.k_max..(i + 1) * self.k_max];
                (kd.partition_point(|&v| v <= d) + 1) as u32
            })
            .collect();
        dist.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let keep = self.k_max.min(self.n);
        let forward: Vec<u32> = dist[..keep].iter().map(|&(_, i)| i).collect();
        Ok(NewPointNeighbors {
            k_max: self.k_max,
            forward,
            entry_k,
        })
    }

    /// Forward and reverse sets of a new point at a single `k`.
    pub fn query_new_point(&self, x_new: &[f64], k: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        self.check_k(k)?;
        let nb = self.new_point_neighbors(x_new)?;
        Ok((nb.forward(k).iter().map(|&i| i as usize).collect(), nb.reverse(k)))
    }

    #[cfg(test)]
    pub(crate) fn kth_distance(&self, i: usize, k: usize) -> f64 {
        self.kth_dist[i * self.k_max + k - 1].sqrt()
    }
}

/// CSR adjacency of the symmetrised neighbour relation at a fixed `k`.
#[derive(Debug, Clone)]
pub struct Adjacency {
    k: usize,
    start: Vec<usize>,
    nbrs: Vec<u32>,
}

impl Adjacency {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.start.len() - 1
    }

    #[inline]
    pub fn of(&self, i: usize) -> &[u32] {
        &self.nbrs[self.start[i]..self.start[i + 1]]
    }
}

/// Neighbourhood of a point outside the training set, for all `k <= k_max`.
#[derive(Debug, Clone)]
pub struct NewPointNeighbors {
    k_max: usize,
    /// Nearest training points, closest first.
    forward: Vec<u32>,
    /// `entry_k[i]`: smallest k at which the new point is among the k nearest
    /// neighbours of training point i (`> k_max` if never).
    entry_k: Vec<u32>,
}

impl NewPointNeighbors {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn forward(&self, k: usize) -> &[u32] {
        &self.forward[..k.min(self.forward.len())]
    }

    pub fn reverse(&self, k: usize) -> Vec<usize> {
        self.entry_k
            .iter()
            .enumerate()
            .filter(|&(_, &e)| e as usize <= k)
            .map(|(i, _)| i)
            .collect()
    }

    pub(crate) fn entry_k(&self) -> &[u32] {
        &self.entry_k
    }
}
