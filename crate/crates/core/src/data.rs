//! Dataset ingestion, standardisation, splitting and class relabelling.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::CovariateMatrix;
use crate::model::Labels;

/// Where a dataset came from and what was done to it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub transforms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Original label string of each class, in class order.
    pub label_mapping: Vec<String>,
}

/// Covariates, labels and their names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: CovariateMatrix,
    pub y: Labels,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    pub provenance: Provenance,
}

/// Options shared by the loaders.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Label column; defaults to the last column.
    pub label_column: Option<String>,
    /// Fixed class order, e.g. from a training set. Labels outside it are
    /// rejected. Without it classes are numbered in first-seen order.
    pub class_order: Option<Vec<String>>,
}

impl LoadOptions {
    pub fn with_classes(class_order: Vec<String>) -> Self {
        Self {
            label_column: None,
            class_order: Some(class_order),
        }
    }
}

struct Builder {
    path: String,
    header: Vec<String>,
    label_col: usize,
    classes: Vec<String>,
    fixed: bool,
    data: Vec<f64>,
    y: Vec<u16>,
}

impl Builder {
    fn new(path: &Path, header: Vec<String>, opts: &LoadOptions) -> Result<Self> {
        let label_col = match &opts.label_column {
            Some(name) => header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| invalid(format!("{}: no column named {name:?}", path.display())))?,
            None => header
                .len()
                .checked_sub(1)
                .ok_or_else(|| invalid(format!("{}: no columns", path.display())))?,
        };
        if header.len() < 2 {
            return Err(invalid(format!("{}: need at least one covariate column", path.display())));
        }
        Ok(Self {
            path: path.display().to_string(),
            header,
            label_col,
            classes: opts.class_order.clone().unwrap_or_default(),
            fixed: opts.class_order.is_some(),
            data: Vec::new(),
            y: Vec::new(),
        })
    }

    fn push(&mut self, row: usize, fields: &[&str]) -> Result<()> {
        if fields.len() != self.header.len() {
            return Err(Error::Parse {
                path: self.path.clone().into(),
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", self.header.len(), fields.len()),
            });
        }
        for (c, f) in fields.iter().enumerate() {
            let f = f.trim();
            if c == self.label_col {
                let idx = match self.classes.iter().position(|k| k == f) {
                    Some(i) => i,
                    None if self.fixed => return Err(Error::UnknownLabel(f.to_string())),
                    None => {
                        self.classes.push(f.to_string());
                        self.classes.len() - 1
                    }
                };
                self.y.push(idx as u16);
                continue;
            }
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                path: self.path.clone().into(),
                row,
                column: self.header[c].clone(),
                message: if f.is_empty() || f.eq_ignore_ascii_case("na") {
                    "missing value".into()
                } else {
                    format!("not a number: {f:?}")
                },
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: self.path.clone().into(),
                    row,
                    column: self.header[c].clone(),
                    message: "non-finite value".into(),
                });
            }
            self.data.push(v);
        }
        Ok(())
    }

    fn finish(self) -> Result<Dataset> {
        if self.y.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = self.y.len();
        let p = self.header.len() - 1;
        let feature_names = self
            .header
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != self.label_col)
            .map(|(_, h)| h.clone())
            .collect();
        Ok(Dataset {
            x: CovariateMatrix::new(n, p, self.data)?,
            y: Labels::new(self.y, self.classes.len())?,
            feature_names,
            class_names: self.classes.clone(),
            provenance: Provenance {
                source: self.path,
                transforms: Vec::new(),
                seed: None,
                label_mapping: self.classes,
            },
        })
    }
}

/// Reads a comma-separated file with a header row.
pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut b = Builder::new(path, header, opts)?;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let fields: Vec<&str> = rec.iter().collect();
        b.push(row + 1, &fields)?;
    }
    b.finish()
}

/// Reads the whitespace-separated format with a header line of column
/// names (`xs ys yc`).
pub fn load_ripley(path: &Path, opts: &LoadOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or(Error::EmptyDataset)?
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let mut b = Builder::new(path, header, opts)?;
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        b.push(row + 1, &fields)?;
    }
    b.finish()
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// [`load_csv`] for `.csv` files, [`load_ripley`] otherwise.
pub fn load_auto(path: &Path, opts: &LoadOptions) -> Result<Dataset> {
    if is_csv(path) {
        load_csv(path, opts)
    } else {
        load_ripley(path, opts)
    }
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    if is_csv(path) {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
        let header = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let rows = rdr
            .records()
            .map(|r| Ok(r?.iter().map(|f| f.trim().to_string()).collect()))
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok((header, rows))
    } else {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or(Error::EmptyDataset)?
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let rows = lines
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect();
        Ok((header, rows))
    }
}

/// Column names of a file readable by [`load_auto`].
pub fn read_header(path: &Path) -> Result<Vec<String>> {
    Ok(read_table(path)?.0)
}

/// Covariates only, picking `feature_names` by name; other columns (such as
/// a label) are ignored.
pub fn load_points(path: &Path, feature_names: &[String]) -> Result<CovariateMatrix> {
    let (header, rows) = read_table(path)?;
    let cols = feature_names
        .iter()
        .map(|f| {
            header
                .iter()
                .position(|h| h == f)
                .ok_or_else(|| invalid(format!("{}: no column named {f:?}", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut data = Vec::with_capacity(rows.len() * cols.len());
    for (r, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::Parse {
                path: path.into(),
                row: r + 1,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), row.len()),
            });
        }
        for &c in &cols {
            let v = row[c]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    path: path.into(),
                    row: r + 1,
                    column: header[c].clone(),
                    message: format!("not a finite number: {:?}", row[c]),
                })?;
            data.push(v);
        }
    }
    CovariateMatrix::new(rows.len(), cols.len(), data)
}

/// Writes the dataset as CSV (label last) plus a `.provenance.json` sidecar.
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = ds.feature_names.clone();
    header.push("class".into());
    w.write_record(&header)?;
    for (i, row) in ds.x.iter_rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(ds.class_names[ds.y.get(i)].clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    std::fs::write(
        provenance_path(path),
        serde_json::to_string_pretty(&ds.provenance)? + "\n",
    )?;
    Ok(())
}

pub fn provenance_path(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("provenance.json")
}

/// Per-column affine map to zero mean and unit (population) variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &CovariateMatrix) -> Result<Self> {
        let (n, p) = (x.rows() as f64, x.cols());
        let mut mean = vec![0.0; p];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; p];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        if let Some(c) = var.iter().position(|&v| !(v > 0.0)) {
            return Err(invalid(format!("column {c} is constant")));
        }
        Ok(Self {
            mean,
            sd: var.into_iter().map(f64::sqrt).collect(),
        })
    }

    pub fn apply_point(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.sd)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn apply(&self, x: &CovariateMatrix) -> Result<CovariateMatrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: x.cols(),
            });
        }
        let data = x.iter_rows().flat_map(|r| self.apply_point(r)).collect();
        CovariateMatrix::new(x.rows(), x.cols(), data)
    }

    pub fn apply_dataset(&self, ds: &Dataset) -> Result<Dataset> {
        let mut out = ds.clone();
        out.x = self.apply(&ds.x)?;
        out.provenance.transforms.push("standardize".into());
        Ok(out)
    }
}

/// Standardises a dataset with its own column statistics.
pub fn standardize(ds: &Dataset) -> Result<(Dataset, Standardizer)> {
    let s = Standardizer::fit(&ds.x)?;
    Ok((s.apply_dataset(ds)?, s))
}

/// Random train/test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_size: usize,
    pub seed: u64,
    pub stratified: bool,
    /// Exact number of training points per class (stratified only); must
    /// sum to `train_size`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_counts: Option<Vec<usize>>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Rows `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(idx),
            y: self.y.select(idx),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Rows of `self` followed by rows of `other`, which must share the
    /// covariates and class names.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.feature_names != other.feature_names || self.class_names != other.class_names {
            return Err(Error::Incompatible("datasets differ in columns or classes".into()));
        }
        let mut data = self.x.as_slice().to_vec();
        data.extend_from_slice(other.x.as_slice());
        let mut y = self.y.as_slice().to_vec();
        y.extend_from_slice(other.y.as_slice());
        let mut provenance = self.provenance.clone();
        provenance.source = format!("{} + {}", self.provenance.source, other.provenance.source);
        Ok(Self {
            x: CovariateMatrix::new(y.len(), self.x.cols(), data)?,
            y: Labels::new(y, self.num_classes())?,
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            provenance,
        })
    }
}

/// Largest-remainder allocation of `total` proportional to `sizes`.
fn proportional(sizes: &[usize], total: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    let exact: Vec<f64> = sizes.iter().map(|&s| s as f64 * total as f64 / n as f64).collect();
    let mut out: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - out[b] as f64).total_cmp(&(exact[a] - out[a] as f64)).then(a.cmp(&b)));
    let short = total - out.iter().sum::<usize>();
    for &c in order.iter().take(short) {
        out[c] += 1;
    }
    out
}

/// Deterministic random partition; both halves keep the original row order.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let n = ds.n();
    if spec.train_size == 0 || spec.train_size >= n {
        return Err(invalid(format!("train_size must lie in 1..{n}, got {}", spec.train_size)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train: Vec<usize> = if spec.stratified {
        let g = ds.num_classes();
        let mut by_class = vec![Vec::new(); g];
        for i in 0..n {
            by_class[ds.y.get(i)].push(i);
        }
        let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
        let counts = match &spec.class_counts {
            Some(c) => {
                if c.len() != g || c.iter().sum::<usize>() != spec.train_size {
                    return Err(invalid("class_counts must give one count per class summing to train_size"));
                }
                if let Some(k) = (0..g).find(|&k| c[k] > sizes[k]) {
                    return Err(invalid(format!("class {} has only {} rows", ds.class_names[k], sizes[k])));
                }
                c.clone()
            }
            None => proportional(&sizes, spec.train_size),
        };
        by_class
            .iter_mut()
            .zip(counts)
            .flat_map(|(rows, take)| {
                rows.shuffle(&mut rng);
                rows[..take].to_vec()
            })
            .collect()
    } else {
        if spec.class_counts.is_some() {
            return Err(invalid("class_counts requires a stratified split"));
        }
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        all.truncate(spec.train_size);
        all
    };
    train.sort_unstable();
    let mut in_train = vec![false; n];
    train.iter().for_each(|&i| in_train[i] = true);
    let test: Vec<usize> = (0..n).filter(|&i| !in_train[i]).collect();
    let tag = |mut d: Dataset, name: &str| {
        d.provenance.seed = Some(spec.seed);
        d.provenance.transforms.push(format!(
            "split:{name}(train_size={},stratified={})",
            spec.train_size, spec.stratified
        ));
        d
    };
    Ok((tag(ds.select(&train), "train"), tag(ds.select(&test), "test")))
}

/// Renames classes via `mapping` (old name -> new name), merging classes
/// mapped to the same name. Every observed class must be mapped.
pub fn coalesce_classes(ds: &Dataset, mapping: &HashMap<String, String>) -> Result<Dataset> {
    let counts = ds.y.class_counts();
    let mut new_names: Vec<String> = Vec::new();
    let mut relabel = vec![u16::MAX; ds.num_classes()];
    for (c, name) in ds.class_names.iter().enumerate() {
        let Some(target) = mapping.get(name) else {
            if counts[c] > 0 {
                return Err(invalid(format!("class mapping does not cover {name:?}")));
            }
            continue;
        };
        let idx = new_names.iter().position(|t| t == target).unwrap_or_else(|| {
            new_names.push(target.clone());
            new_names.len() - 1
        });
        relabel[c] = idx as u16;
    }
    let y: Vec<u16> = ds.y.as_slice().iter().map(|&c| relabel[c as usize]).collect();
    let mut out = ds.clone();
    out.y = Labels::new(y, new_names.len())?;
    out.class_names = new_names.clone();
    out.provenance.label_mapping = new_names;
    let mut pairs: Vec<_> = mapping.iter().map(|(a, b)| format!("{a}->{b}")).collect();
    pairs.sort();
    out.provenance.transforms.push(format!("coalesce({})", pairs.join(",")));
    Ok(out)
}

/// Removes every row of the named classes and renumbers the rest.
pub fn drop_classes(ds: &Dataset, names: &[&str]) -> Result<Dataset> {
    if let Some(bad) = names.iter().find(|n| !ds.class_names.iter().any(|c| c == *n)) {
        return Err(Error::UnknownLabel(bad.to_string()));
    }
    let keep: Vec<usize> = (0..ds.n())
        .filter(|&i| !names.contains(&ds.class_names[ds.y.get(i)].as_str()))
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut out = ds.select(&keep);
    let mapping: HashMap<String, String> = ds
        .class_names
        .iter()
        .filter(|c| !names.contains(&c.as_str()))
        .map(|c| (c.clone(), c.clone()))
        .collect();
    out = coalesce_classes(&out, &mapping)?;
    out.provenance.transforms.pop();
    out.provenance.transforms.push(format!("drop({})", names.join(",")));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn first_seen_labels() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "x,y\n1,a\n2,b\n3,a\n");
        let ds = load_csv(&p, &LoadOptions::default()).unwrap();
        assert_eq!(ds.y.as_slice(), &[0, 1, 0]);
        assert_eq!(ds.num_classes(), 2);
        assert_eq!(ds.class_names, vec!["a", "b"]);
        let fixed = load_csv(&p, &LoadOptions::with_classes(vec!["b".into(), "a".into()])).unwrap();
        assert_eq!(fixed.y.as_slice(), &[1, 0, 1]);
        assert!(matches!(
            load_csv(&p, &LoadOptions::with_classes(vec!["a".into()])),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let empty = write(dir.path(), "e.csv", "x,y\n");
        assert!(matches!(load_csv(&empty, &LoadOptions::default()), Err(Error::EmptyDataset)));
        let missing = write(dir.path(), "m.csv", "x,z,y\n1,,a\n");
        match load_csv(&missing, &LoadOptions::default()) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column.as_str()), (1, "z")),
            other => panic!("{other:?}"),
        }
        let text = write(dir.path(), "t.csv", "x,y\n1,a\nfoo,b\n");
        assert!(matches!(load_csv(&text, &LoadOptions::default()), Err(Error::Parse { row: 2, .. })));
        let opts = LoadOptions {
            label_column: Some("nope".into()),
            class_order: None,
        };
        assert!(load_csv(&text, &opts).is_err());
    }

    #[test]
    fn standardize_population_sd() {
        let x = CovariateMatrix::new(2, 1, vec![0.0, 2.0]).unwrap();
        let s = Standardizer::fit(&x).unwrap();
        assert_eq!(s.apply(&x).unwrap().as_slice(), &[-1.0, 1.0]);
        let again = Standardizer::fit(&s.apply(&x).unwrap()).unwrap();
        assert!((again.mean[0]).abs() < 1e-12 && (again.sd[0] - 1.0).abs() < 1e-12);
        let c = CovariateMatrix::new(2, 1, vec![3.0, 3.0]).unwrap();
        assert!(Standardizer::fit(&c).is_err());
    }

    fn toy(n: usize, g: usize) -> Dataset {
        let x = CovariateMatrix::new(n, 1, (0..n).map(|i| i as f64).collect()).unwrap();
        let y = Labels::new((0..n).map(|i| (i % g) as u16).collect(), g).unwrap();
        Dataset {
            x,
            y,
            feature_names: vec!["x".into()],
            class_names: (0..g).map(|c| format!("c{c}")).collect(),
            provenance: Provenance::default(),
        }
    }

    #[test]
    fn split_partitions() {
        let ds = toy(30, 3);
        let spec = SplitSpec {
            train_size: 20,
            seed: 4,
            stratified: true,
            class_counts: None,
        };
        let (a, b) = split(&ds, &spec).unwrap();
        let (a2, _) = split(&ds, &spec).unwrap();
        assert_eq!(a, a2);
        assert_eq!(a.n() + b.n(), 30);
        let mut all: Vec<f64> = a.x.as_slice().iter().chain(b.x.as_slice()).copied().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..30).map(|i| i as f64).collect::<Vec<_>>());
        for c in a.y.class_counts() {
            assert!((6..=7).contains(&c));
        }
        let explicit = SplitSpec {
            class_counts: Some(vec![10, 5, 5]),
            ..spec.clone()
        };
        assert_eq!(split(&ds, &explicit).unwrap().0.y.class_counts(), vec![10, 5, 5]);
        let one = SplitSpec {
            train_size: 29,
            stratified: false,
            ..spec.clone()
        };
        assert_eq!(split(&ds, &one).unwrap().1.n(), 1);
        assert!(split(&ds, &SplitSpec { train_size: 30, ..spec }).is_err());
    }

    #[test]
    fn coalesce_and_drop() {
        let ds = toy(9, 3);
        let id: HashMap<String, String> = ds.class_names.iter().map(|c| (c.clone(), c.clone())).collect();
        let same = coalesce_classes(&ds, &id).unwrap();
        assert_eq!((same.x.clone(), same.y.clone(), same.class_names.clone()), (ds.x.clone(), ds.y.clone(), ds.class_names.clone()));
        let mut m = id.clone();
        m.insert("c2".into(), "c1".into());
        let two = coalesce_classes(&ds, &m).unwrap();
        assert_eq!(two.num_classes(), 2);
        assert_eq!(two.y.class_counts(), vec![3, 6]);
        m.remove("c0");
        assert!(coalesce_classes(&ds, &m).is_err());
        let dropped = drop_classes(&ds, &["c1"]).unwrap();
        assert_eq!(dropped.class_names, vec!["c0", "c2"]);
        assert_eq!(dropped.n(), 6);
        assert!(drop_classes(&ds, &["zz"]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "u,v,y\n0.1,-3e-7,a\n2,1.25,b\n");
        let ds = load_csv(&p, &LoadOptions::default()).unwrap();
        let out = dir.path().join("out.csv");
        write_csv(&ds, &out).unwrap();
        let back = load_csv(&out, &LoadOptions::default()).unwrap();
        assert_eq!((back.x, back.y, back.class_names), (ds.x, ds.y, ds.class_names));
        assert!(provenance_path(&out).exists());
    }

    #[test]
    fn ripley_format() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "synth.tr",
            "        xs            ys  yc\n   0.051   0.16  0\n  -0.74  0.089  1\n",
        );
        let ds = load_ripley(&p, &LoadOptions::default()).unwrap();
        assert_eq!((ds.n(), ds.x.cols(), ds.num_classes()), (2, 2, 2));
        assert_eq!(ds.feature_names, vec!["xs", "ys"]);
    }
}
