//! Epoch cost should grow linearly in the number of samples.

use std::time::Instant;

use dsom_core::dataset::synthetic_blobs;
use dsom_core::kernel::compute_kernel;
use dsom_core::trainer::{init_codebook, run_epoch, EpochWorkspace, InitStrategy};

fn fastest_epoch_seconds(n: usize) -> f64 {
    let x = synthetic_blobs(8, n / 8, 256, 4.0, 1).unwrap();
    let u = init_codebook(10, 256, InitStrategy::RandomGaussian, 2, None).unwrap();
    let kernel = compute_kernel(10, 0.25, 3).unwrap();
    let mut ws = EpochWorkspace::new(&x, u.len()).unwrap();
    run_epoch(&mut ws, &x, &u, &kernel).unwrap();
    // The fastest run is the least disturbed by other load on the machine.
    (0..9)
        .map(|_| {
            let t = Instant::now();
            run_epoch(&mut ws, &x, &u, &kernel).unwrap();
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn doubling_samples_roughly_doubles_epoch_time() {
    let mut seen = Vec::new();
    for _ in 0..3 {
        let small = fastest_epoch_seconds(4000);
        let large = fastest_epoch_seconds(8000);
        let ratio = large / small;
        if (1.4..=2.6).contains(&ratio) {
            return;
        }
        seen.push(format!("{ratio:.2} ({small:.4}s -> {large:.4}s)"));
    }
    panic!("ratio outside [1.4, 2.6] on every attempt: {}", seen.join(", "));
}
