use dsom_core::classify::{label_neurons, predict};
use dsom_core::dataset::{normalize_dataset, synthetic_blobs};
use dsom_core::linalg::{self, Matrix};
use dsom_core::trainer::{init_codebook, Codebook, InitStrategy};
use dsom_core::viz::correlation_map;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_ignores_global_rescaling(
        data in prop::collection::vec(0.0f32..255.0, 24), c in 0.01f32..100.0
    ) {
        let raw = Matrix::new(6, 4, data.clone()).unwrap();
        let scaled = Matrix::new(6, 4, data.iter().map(|v| v * c).collect()).unwrap();
        let a = normalize_dataset(&raw, None);
        let b = normalize_dataset(&scaled, None);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                // Rows whose centred norm is borderline may drop on one side only.
                prop_assume!(a.dropped == b.dropped);
                for (p, q) in a.dataset.samples().as_slice().iter().zip(b.dataset.samples().as_slice()) {
                    prop_assert!((p - q).abs() < 1e-5, "{p} vs {q}");
                }
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn predict_ignores_query_rescaling(seed in 0u64..500, c in 0.001f32..1000.0) {
        let x = synthetic_blobs(3, 10, 8, 3.0, seed).unwrap();
        let u = init_codebook(3, 8, InitStrategy::RandomGaussian, seed, None).unwrap();
        let nl = label_neurons(&x, &u).unwrap();
        for q in x.samples().iter_rows() {
            let mut scaled: Vec<f32> = q.iter().map(|v| v * c).collect();
            let norm = linalg::norm(&scaled) as f32;
            scaled.iter_mut().for_each(|v| *v /= norm);
            let a = predict(&u, &nl, q).unwrap();
            let b = predict(&u, &nl, &scaled).unwrap();
            if a != b {
                // Only a near-tie between the two best neurons may flip.
                let mut dots: Vec<f64> = u.weights().iter_rows().map(|w| linalg::dot(w, q)).collect();
                dots.sort_by(|p, q| q.total_cmp(p));
                prop_assert!(dots[0] - dots[1] < 1e-5);
            }
        }
    }

    #[test]
    fn confidence_is_the_best_dot(seed in 0u64..500) {
        let x = synthetic_blobs(2, 12, 5, 1.0, seed).unwrap();
        let u = init_codebook(2, 5, InitStrategy::RandomGaussian, seed, None).unwrap();
        let nl = label_neurons(&x, &u).unwrap();
        for k in 0..u.len() {
            prop_assert!((-1.0..=1.0).contains(&nl.confidences[k]));
            for n in 0..x.len() {
                prop_assert!(nl.confidences[k] as f64 >= linalg::dot(u.neuron(k), x.samples().row(n)) as f32 as f64);
            }
        }
    }

    #[test]
    fn correlation_map_follows_grid_shifts(seed in 0u64..500, l in 2usize..7, si in 0usize..7, sj in 0usize..7) {
        let u = init_codebook(l, 5, InitStrategy::RandomGaussian, seed, None).unwrap();
        let (si, sj) = (si % l, sj % l);
        let mut rows = vec![vec![0.0f32; 5]; l * l];
        for i in 0..l {
            for j in 0..l {
                rows[((i + si) % l) * l + (j + sj) % l] = u.neuron(i * l + j).to_vec();
            }
        }
        let shifted = Codebook::new(l, Matrix::from_rows(&rows).unwrap()).unwrap();
        let (a, b) = (correlation_map(&u), correlation_map(&shifted));
        for i in 0..l {
            for j in 0..l {
                prop_assert!((a.get(i, j) - b.get((i + si) % l, (j + sj) % l)).abs() < 1e-6);
            }
        }
    }
}
