mod common;

use boltzknn::data::{load_csv, split, write_csv, Provenance};
use boltzknn::samplers::{cftp_with_envelope, GibbsChain};
use boltzknn::{
    CovariateMatrix, Dataset, DistanceMetric, Labels, LoadOptions, Model, ModelParams,
    NeighborGraph, SplitSpec,
};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn line(xs: &[f64]) -> (Vec<Vec<f64>>, NeighborGraph) {
    let rows: Vec<Vec<f64>> = xs.iter().map(|&v| vec![v]).collect();
    let x = CovariateMatrix::from_rows(&rows).unwrap();
    let g = NeighborGraph::build(&x, 3, DistanceMetric::Euclidean).unwrap();
    (rows, g)
}

fn chi_square_p(counts: &[f64], probs: &[f64]) -> f64 {
    let m: f64 = counts.iter().sum();
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut po, mut pe) = (0.0, 0.0);
    for (&o, &p) in counts.iter().zip(probs) {
        let e = p * m;
        if e < 5.0 {
            po += o;
            pe += e;
        } else {
            stat += (o - e) * (o - e) / e;
            cells += 1;
        }
    }
    if pe > 0.0 {
        stat += (po - pe) * (po - pe) / pe;
        cells += 1;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn exact_log_z_matches_enumeration() {
    let (rows, g) = line(&[0.0, 0.5, 1.7, 2.0, 3.3]);
    let model = Model::new(&g, 2).unwrap();
    for k in 1..=3 {
        for beta in [0.0, 0.7, 2.5] {
            let got = model.exact_log_z(ModelParams::new(beta, k)).unwrap();
            assert!((got - log_z(&rows, 2, beta, k)).abs() < 1e-10);
        }
    }
}

#[test]
fn gibbs_chain_matches_enumeration() {
    let (rows, g) = line(&[0.0, 0.4, 1.1, 1.3, 2.4]);
    let model = Model::new(&g, 2).unwrap();
    let (beta, k) = (1.5, 2);
    let exact = label_distribution(&rows, 2, beta, k);
    let init = Labels::constant(rows.len(), 0, 2).unwrap();
    let mut chain = GibbsChain::new(&model, ModelParams::new(beta, k), &init).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut counts = vec![0.0; exact.len()];
    for _ in 0..200 {
        chain.sweep(&mut rng);
    }
    for _ in 0..40_000 {
        chain.sweep(&mut rng);
        counts[labeling_index(chain.labels(), 2)] += 1.0;
    }
    // Successive sweeps are correlated; thin the statistic accordingly.
    let thinned: Vec<f64> = counts.iter().map(|c| c / 4.0).collect();
    let p = chi_square_p(&thinned, &exact);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn three_class_gibbs_matches_enumeration() {
    let (rows, g) = line(&[0.0, 0.9, 1.4, 2.8]);
    let model = Model::new(&g, 3).unwrap();
    let (beta, k) = (2.0, 2);
    let exact = label_distribution(&rows, 3, beta, k);
    let init = Labels::constant(rows.len(), 0, 3).unwrap();
    let mut chain = GibbsChain::new(&model, ModelParams::new(beta, k), &init).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut counts = vec![0.0; exact.len()];
    for _ in 0..30_000 {
        chain.sweep(&mut rng);
        counts[labeling_index(chain.labels(), 3)] += 1.0;
    }
    let thinned: Vec<f64> = counts.iter().map(|c| c / 4.0).collect();
    let p = chi_square_p(&thinned, &exact);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn envelope_draws_match_enumeration() {
    let (rows, g) = line(&[0.0, 0.4, 1.1, 1.3, 2.4, 3.0]);
    let model = Model::new(&g, 2).unwrap();
    let (beta, k) = (3.0, 2);
    let exact = label_distribution(&rows, 2, beta, k);
    let mut counts = vec![0.0; exact.len()];
    for s in 0..6_000u64 {
        let r = cftp_with_envelope(&model, ModelParams::new(beta, k), 1.5, s, 1 << 20).unwrap();
        counts[labeling_index(r.sample.as_slice(), 2)] += 1.0;
    }
    let p = chi_square_p(&counts, &exact);
    assert!(p > 0.001, "p = {p}");
}

fn toy_dataset() -> Dataset {
    let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 * 0.25, (i * i) as f64 - 3.5]).collect();
    let classes: Vec<u16> = (0..12).map(|i| (i % 3 == 0) as u16).collect();
    Dataset {
        x: CovariateMatrix::from_rows(&rows).unwrap(),
        y: Labels::new(classes, 2).unwrap(),
        feature_names: vec!["u".into(), "v".into()],
        class_names: vec!["no".into(), "yes".into()],
        provenance: Provenance {
            source: "toy".into(),
            transforms: vec![],
            seed: None,
            label_mapping: vec!["no".into(), "yes".into()],
        },
    }
}

#[test]
fn csv_round_trip_preserves_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.csv");
    let ds = toy_dataset();
    write_csv(&ds, &path).unwrap();
    let back = load_csv(&path, &LoadOptions::with_classes(ds.class_names.clone())).unwrap();
    assert_eq!(back.x, ds.x);
    assert_eq!(back.y, ds.y);
    assert_eq!(back.feature_names, ds.feature_names);
    assert!(dir.path().join("toy.provenance.json").exists());
}

#[test]
fn stratified_split_keeps_class_shares() {
    let ds = toy_dataset();
    let spec = SplitSpec {
        train_size: 6,
        seed: 3,
        stratified: true,
        class_counts: None,
    };
    let (train, test) = split(&ds, &spec).unwrap();
    assert_eq!(train.n() + test.n(), ds.n());
    assert_eq!(train.y.class_counts(), vec![4, 2]);
    let again = split(&ds, &spec).unwrap();
    assert_eq!(again.0.x, train.x);
}
