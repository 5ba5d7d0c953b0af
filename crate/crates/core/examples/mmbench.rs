// scratch throughput probe
use std::time::Instant;
fn main() {
    // f32 196x768 * 768x2304 (ViT-B qkv-like)
    let (m, k, n) = (196usize, 768usize, 2304usize);
    let a: Vec<f32> = (0..m*k).map(|i| (i % 7) as f32 * 0.1).collect();
    let b: Vec<f32> = (0..k*n).map(|i| (i % 5) as f32 * 0.1).collect();
    let t0 = Instant::now();
    let iters = 30;
    let mut sink = 0.0f32;
    for _ in 0..iters {
        let c = vittm_core::bench_matmul_f32(&a, &b, m, k, n);
        sink += c[0];
    }
    let dt = t0.elapsed().as_secs_f64();
    let gmacs = (m*k*n*iters) as f64 / dt / 1e9;
    println!("sink={sink} {gmacs:.2} GMAC/s ({:.2} GFLOP/s)", gmacs*2.0);
}
