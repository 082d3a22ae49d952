//! Times the two products of one D-SOM epoch at desk scale.
use std::time::Instant;

use dsom_core::linalg::{matmul_nt, matmul_tn, Matrix};

fn main() {
    let (n, k, d) = (10_000, 400, 784);
    let a = Matrix::new(n, d, (0..n * d).map(|i| ((i * 7919) % 1000) as f32 / 1000.0).collect()).unwrap();
    let b = Matrix::new(k, d, (0..k * d).map(|i| ((i * 104729) % 997) as f32 / 997.0).collect()).unwrap();
    let t = Instant::now();
    let r = matmul_nt(&a, &b).unwrap();
    let s = t.elapsed().as_secs_f64();
    println!("x uT  {n}x{d} by {k}x{d}: {s:.3}s ({:.1} GFLOP/s)", 2.0 * (n * k * d) as f64 / s / 1e9);
    let t = Instant::now();
    let _ = matmul_tn(&r, &a).unwrap();
    let s = t.elapsed().as_secs_f64();
    println!("rT x  {k}x{n} by {n}x{d}: {s:.3}s ({:.1} GFLOP/s)", 2.0 * (n * k * d) as f64 / s / 1e9);
}
