use dsom_core::baseline::{batch_som_epoch, gaussian_neighborhood, online_som_train, OnlineSomConfig};
use dsom_core::dataset::synthetic_blobs;
use dsom_core::kernel::GridCoord;
use dsom_core::linalg::{squared_distance, Matrix};
use dsom_core::trainer::{init_codebook, InitStrategy};
use dsom_core::Dataset;

fn instance(seed: u64) -> (Dataset, Matrix) {
    let x = synthetic_blobs(4, 5, 6, 2.0, seed).unwrap();
    let u = init_codebook(2, 6, InitStrategy::RandomGaussian, seed + 100, None).unwrap().into_weights();
    (x, u)
}

fn nearest(row: &[f32], u: &Matrix) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (k, w) in u.iter_rows().enumerate() {
        let d = squared_distance(row, w);
        if d < best.0 {
            best = (d, k);
        }
    }
    best.1
}

#[test]
fn batch_update_matches_double_loop() {
    for seed in 0..10 {
        let (x, u) = instance(seed);
        let sigma = 0.8;
        let (next, _) = batch_som_epoch(&x, 2, &u, sigma).unwrap();
        let winners: Vec<usize> = x.samples().iter_rows().map(|r| nearest(r, &u)).collect();
        for k in 0..4 {
            let (mut num, mut den) = (vec![0.0f64; 6], 0.0f64);
            for (n, row) in x.samples().iter_rows().enumerate() {
                let c = winners[n];
                let h = gaussian_neighborhood(GridCoord::new(c / 2, c % 2), GridCoord::new(k / 2, k % 2), sigma, 2);
                den += h;
                for (a, v) in num.iter_mut().zip(row) {
                    *a += h * *v as f64;
                }
            }
            for (a, b) in num.iter().zip(next.row(k)) {
                assert!((a / den - *b as f64).abs() < 1e-5, "seed {seed} node {k}");
            }
        }
    }
}

#[test]
fn vanishing_sigma_is_a_lloyd_step() {
    for seed in 0..20 {
        let (x, u) = instance(seed);
        let (next, _) = batch_som_epoch(&x, 2, &u, 1e-3).unwrap();
        let mut sums = vec![vec![0.0f64; 6]; 4];
        let mut counts = [0usize; 4];
        for row in x.samples().iter_rows() {
            let c = nearest(row, &u);
            counts[c] += 1;
            for (a, v) in sums[c].iter_mut().zip(row) {
                *a += *v as f64;
            }
        }
        for k in 0..4 {
            for (m, (s, old)) in next.row(k).iter().zip(sums[k].iter().zip(u.row(k))) {
                let want = if counts[k] == 0 { *old as f64 } else { s / counts[k] as f64 };
                assert!((*m as f64 - want).abs() < 1e-5, "seed {seed} node {k}");
            }
        }
    }
}

#[test]
fn online_step_matches_hand_update() {
    let (x, u) = instance(5);
    let mut cfg = OnlineSomConfig::new(2);
    cfg.max_steps = 1;
    cfg.seed = 9;
    let (after, report) = online_som_train(&x, 2, &u, &cfg).unwrap();
    // Recover the drawn sample: the winner moves towards it by exactly α.
    let n = (0..x.len())
        .find(|&n| {
            let s = x.samples().row(n);
            let c = nearest(s, &u);
            after.row(c).iter().zip(u.row(c)).zip(s).all(|((a, o), v)| {
                let want = (1.0 - cfg.alpha0) * *o as f64 + cfg.alpha0 * *v as f64;
                (*a as f64 - want).abs() < 1e-6
            })
        })
        .expect("some sample explains the step");
    let s = x.samples().row(n);
    let c = nearest(s, &u);
    let mut change = 0.0f64;
    for k in 0..4 {
        let h = gaussian_neighborhood(GridCoord::new(c / 2, c % 2), GridCoord::new(k / 2, k % 2), cfg.sigma0, 2);
        let w = cfg.alpha0 * h;
        for ((a, o), v) in after.row(k).iter().zip(u.row(k)).zip(s) {
            let want = (1.0 - w) * *o as f64 + w * *v as f64;
            assert!((*a as f64 - want).abs() < 1e-6);
            change += (*a as f64 - *o as f64).powi(2);
        }
    }
    assert!((report.changes[0] - change.sqrt() / 4.0).abs() < 1e-9);
}
