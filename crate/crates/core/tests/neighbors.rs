use std::time::Instant;

use fwf_core::neighbors::linear_scan;
use fwf_core::{Matrix, NeighborIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_vec(n, dim, (0..n * dim).map(|_| rng.random::<f64>()).collect()).unwrap()
}

#[test]
fn full_k_returns_everything_sorted() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts = uniform(64, 4, &mut rng);
    let index = NeighborIndex::build(pts.clone()).unwrap();
    let q = [0.5, 0.5, 0.5, 0.5];
    let all = index.query(&q, 64).unwrap();
    let mut seen: Vec<usize> = all.iter().map(|n| n.index).collect();
    seen.sort_unstable();
    assert_eq!(seen, (0..64).collect::<Vec<_>>());
    assert!(all.windows(2).all(|w| w[0].distance <= w[1].distance));
    assert_eq!(all, linear_scan(&pts, &q, 64));
    assert!(index.query(&q, 65).is_err());
    assert!(index.query(&q[..3], 1).is_err());
}

#[test]
fn thousand_rows_find_themselves() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts = uniform(1000, 6, &mut rng);
    let index = NeighborIndex::build(pts.clone()).unwrap();
    for i in 0..1000 {
        let nb = index.query(pts.row(i), 1).unwrap();
        assert_eq!(nb[0].index, i);
        assert_eq!(nb[0].distance, 0.0);
    }
}

#[test]
fn query_time_grows_sublinearly() {
    let dim = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let median_query = |n: usize, rng: &mut ChaCha8Rng| {
        let index = NeighborIndex::build(uniform(n, dim, rng)).unwrap();
        let mut times: Vec<f64> = (0..10_000)
            .map(|_| {
                let q: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
                let t = Instant::now();
                std::hint::black_box(index.query(&q, 2).unwrap());
                t.elapsed().as_secs_f64()
            })
            .collect();
        times.sort_by(f64::total_cmp);
        times[times.len() / 2]
    };
    let small = median_query(1_000, &mut rng);
    let large = median_query(100_000, &mut rng);
    let ratio = large / small;
    assert!(
        ratio < 20.0,
        "median query time ratio {ratio:.1} ({small:e} s -> {large:e} s)"
    );
}
