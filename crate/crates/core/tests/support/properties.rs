//! Randomized invariants shared by the property tests and the acceptance run.

#![allow(clippy::needless_range_loop)]

use fwf_core::fwf::{
    compute_g, compute_partner, single_partner_output, solve_residual, solve_weights,
};
use fwf_core::kernel::{self, rkhs_inner, windowed};
use fwf_core::neighbors::linear_scan;
use fwf_core::{
    embed, fit, gaussian, gaussian_inverse, AlphaSetting, FwfConfig, KernelWidth, LagKind,
    LagProfile, Matrix, NeighborIndex, Series, WidthSetting,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 1000;

fn run<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn width(s: f64) -> KernelWidth {
    KernelWidth::new(s).unwrap()
}

fn series(v: Vec<f64>) -> Series {
    Series::new(v, 1.0).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

pub fn inverse_kernel_round_trip() -> Result<(), String> {
    run((1e-12f64..=1.0, 0.01f64..50.0), |(g, sigma)| {
        let w = width(sigma);
        let d = gaussian_inverse(g, w).unwrap();
        prop_assert!(d >= 0.0);
        let back = gaussian(d, 0.0, w);
        prop_assert!(
            (back - g).abs() <= 1e-12 * g.max(1e-300) + 1e-15,
            "{} vs {}",
            back,
            g
        );
        Ok(())
    })
}

pub fn partner_similarity_is_g_to_the_alpha_squared() -> Result<(), String> {
    run(
        (
            prop::collection::vec(-2.0f64..2.0, 1..12),
            -3.0f64..3.0,
            prop::collection::vec(-3.0f64..3.0, 12),
            0.01f64..2.0,
            0.05f64..5.0,
            0.05f64..5.0,
        ),
        |(weights, z, x_seed, alpha, sigma, sigma_w)| {
            let w = width(sigma);
            let x = &x_seed[..weights.len()];
            let g = compute_g(z, &weights, width(sigma_w));
            let p = compute_partner(x, &g, alpha, w).unwrap();
            for tau in 0..x.len() {
                let lhs = gaussian(p[tau], x[tau], w);
                let rhs = g.values()[tau].powf(alpha * alpha);
                prop_assert!(
                    (lhs - rhs).abs() <= 1e-12,
                    "tau {}: {} vs {}",
                    tau,
                    lhs,
                    rhs
                );
            }
            Ok(())
        },
    )
}

pub fn correntropy_is_bounded_with_unit_zero_lag() -> Result<(), String> {
    run(
        (
            prop::collection::vec(-5.0f64..5.0, 12..200),
            1usize..10,
            0.2f64..10.0,
        ),
        |(v, order, sigma)| {
            let p = kernel::autocorrentropy(&series(v), order, width(sigma)).unwrap();
            prop_assert_eq!(p.values()[0], 1.0);
            for &c in p.values() {
                prop_assert!(c > 0.0 && c <= 1.0);
            }
            Ok(())
        },
    )
}

pub fn wide_kernel_correntropy_approaches_covariance() -> Result<(), String> {
    run(
        (0.05f64..0.95, 400usize..1500, 2usize..8, any::<u64>()),
        |(flip, n, order, seed)| {
            // +-1 Markov chain: unit power on every sub-range, so edge terms of
            // the per-lag averages cancel exactly
            let mut state = seed | 1;
            let mut x = 1.0f64;
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    if ((state >> 11) as f64 / (1u64 << 53) as f64) < flip {
                        x = -x;
                    }
                    x
                })
                .collect();
            let s = series(v);
            let std = fwf_core::signal::moments(s.values()).1;
            prop_assume!(std > 0.1);
            let sigma = 100.0 * std;
            let c = kernel::autocorrentropy(&s, order, width(sigma)).unwrap();
            let r = kernel::autocovariance(&s, order).unwrap();
            for tau in 1..order {
                let lhs = sigma * sigma * (1.0 - c.values()[tau]);
                let rhs = r.values()[0] - r.values()[tau];
                prop_assume!(rhs > 1e-3);
                prop_assert!(
                    (lhs - rhs).abs() <= 0.01 * rhs,
                    "lag {}: {} vs {}",
                    tau,
                    lhs,
                    rhs
                );
            }
            Ok(())
        },
    )
}

pub fn kd_tree_equals_linear_scan() -> Result<(), String> {
    run(
        (
            1usize..250,
            1usize..7,
            prop::collection::vec(-4i32..=4, 250 * 6),
            prop::collection::vec(-5.0f64..5.0, 6),
            0.0f64..1.0,
            any::<bool>(),
        ),
        |(n, dim, coords, query, k_frac, coarse)| {
            // coarse lattices force many exact distance ties
            let scale = if coarse { 1.0 } else { 0.37 };
            let pts: Vec<f64> = coords[..n * dim]
                .iter()
                .map(|&c| c as f64 * scale)
                .collect();
            let m = Matrix::from_vec(n, dim, pts).unwrap();
            let q: Vec<f64> = if coarse {
                query[..dim].iter().map(|v| v.round()).collect()
            } else {
                query[..dim].to_vec()
            };
            let k = 1 + ((n - 1) as f64 * k_frac) as usize;
            let tree = NeighborIndex::build(m.clone()).unwrap();
            let got = tree.query(&q, k).unwrap();
            let want = linear_scan(&m, &q, k);
            prop_assert_eq!(got.len(), k);
            for (a, b) in got.iter().zip(&want) {
                prop_assert_eq!(a.index, b.index);
                prop_assert_eq!(a.distance.to_bits(), b.distance.to_bits());
            }
            Ok(())
        },
    )
}

pub fn one_neighbor_prediction_is_the_nearest_partner_output() -> Result<(), String> {
    run(
        (
            prop::collection::vec(-2.0f64..2.0, 30..90),
            1usize..5,
            0.01f64..2.0,
            prop::collection::vec(-2.0f64..2.0, 5),
        ),
        |(v, order, alpha, query)| {
            let data = embed(&series(v), order, 1).unwrap();
            let cfg = FwfConfig {
                order,
                alpha: AlphaSetting::Fixed(alpha),
                sigma_input: WidthSetting::Fixed(width(0.7)),
                k_neighbors: 1,
                ridge: Some(1e-3),
                ..FwfConfig::default()
            };
            let m = fit(&data, &cfg).unwrap();
            let q = &query[..order];
            let j = m.neighbor_index().query(q, 1).unwrap()[0].index;
            let direct = single_partner_output(&m, j, q).unwrap() - m.bias();
            prop_assert_eq!(m.predict_k(q, 1).unwrap().to_bits(), direct.to_bits());
            Ok(())
        },
    )
}

pub fn weight_solve_residual_is_tiny() -> Result<(), String> {
    run(
        (
            1usize..16,
            prop::collection::vec(-1.0f64..1.0, 16 * 32),
            prop::collection::vec(-1.0f64..1.0, 16),
            0.0f64..1e-2,
        ),
        |(l, b, p, ridge)| {
            // V = B^T B / m + 0.05 I: symmetric positive definite, moderate condition
            let m = 32;
            let mut v = Matrix::zeros(l, l);
            for i in 0..l {
                for j in 0..l {
                    let s: f64 = (0..m).map(|r| b[r * 16 + i] * b[r * 16 + j]).sum();
                    v.row_mut(i)[j] = s / m as f64 + if i == j { 0.05 } else { 0.0 };
                }
            }
            let pv = &p[..l];
            prop_assume!(pv.iter().any(|x| x.abs() > 1e-6));
            let prof = LagProfile::new(LagKind::CrossCorrentropy, pv.to_vec()).unwrap();
            let w = solve_weights(&v, &prof, ridge).unwrap();
            prop_assert!(solve_residual(&v, &w, pv, ridge) <= 1e-10);
            Ok(())
        },
    )
}

pub fn estimators_match_double_loop() -> Result<(), String> {
    run(
        (
            prop::collection::vec(-3.0f64..3.0, 12..200),
            prop::collection::vec(-3.0f64..3.0, 200),
            1usize..11,
            0.1f64..4.0,
        ),
        |(x, z_seed, order, sigma)| {
            let n = x.len();
            let z = z_seed[..n].to_vec();
            let w = width(sigma);
            let (sx, sz) = (series(x.clone()), series(z.clone()));
            let checks = [
                (
                    kernel::autocorrentropy(&sx, order, w).unwrap(),
                    x.clone(),
                    true,
                ),
                (
                    kernel::crosscorrentropy(&sx, &sz, order, w).unwrap(),
                    z.clone(),
                    true,
                ),
                (
                    kernel::autocovariance(&sx, order).unwrap(),
                    x.clone(),
                    false,
                ),
                (
                    kernel::crosscovariance(&sx, &sz, order).unwrap(),
                    z.clone(),
                    false,
                ),
            ];
            for (profile, lead, kernelized) in checks {
                for lag in 0..order {
                    let mut sum = 0.0;
                    let mut count = 0usize;
                    for t in 0..n {
                        for s in 0..n {
                            if t == s + lag {
                                sum += if kernelized {
                                    gaussian(lead[t], x[s], w)
                                } else {
                                    lead[t] * x[s]
                                };
                                count += 1;
                            }
                        }
                    }
                    let want = sum / count as f64;
                    prop_assert!(
                        close(profile.values()[lag], want, 1e-12),
                        "lag {}: {} vs {}",
                        lag,
                        profile.values()[lag],
                        want
                    );
                }
            }

            // window estimators: per-lag mean over rows
            let data = embed(&sx, order, 0).unwrap();
            let win = windowed::autocorrentropy(data.windows(), w).unwrap();
            let cov = windowed::autocovariance(data.windows()).unwrap();
            for lag in 0..order {
                let (mut a, mut c) = (0.0, 0.0);
                for row in data.windows().iter_rows() {
                    a += gaussian(row[0], row[lag], w);
                    c += row[0] * row[lag];
                }
                let rows = data.len() as f64;
                prop_assert!(close(win.values()[lag], a / rows, 1e-12));
                prop_assert!(close(cov.values()[lag], c / rows, 1e-12));
            }
            Ok(())
        },
    )
}

pub fn rkhs_inner_is_symmetric_and_bilinear() -> Result<(), String> {
    run(
        (
            prop::collection::vec(0.01f64..1.0, 8),
            prop::collection::vec((-2.0f64..2.0, 0usize..8), 1..6),
            prop::collection::vec((-2.0f64..2.0, 0usize..8), 1..6),
            prop::collection::vec((-2.0f64..2.0, 0usize..8), 1..6),
            -3.0f64..3.0,
        ),
        |(prof, a, b, c, k)| {
            let mut values = prof;
            values[0] = 1.0;
            let p = LagProfile::new(LagKind::Correntropy, values).unwrap();
            let ab = rkhs_inner(&a, &b, &p).unwrap();
            prop_assert!(close(ab, rkhs_inner(&b, &a, &p).unwrap(), 1e-14));
            let ka: Vec<(f64, usize)> = a.iter().map(|&(v, t)| (k * v, t)).collect();
            prop_assert!(close(rkhs_inner(&ka, &b, &p).unwrap(), k * ab, 1e-13));
            let ac: Vec<(f64, usize)> = a.iter().chain(&c).copied().collect();
            let split = ab + rkhs_inner(&c, &b, &p).unwrap();
            prop_assert!(close(rkhs_inner(&ac, &b, &p).unwrap(), split, 1e-13));
            Ok(())
        },
    )
}

pub fn wide_kernel_limit_on_mackey_glass() {
    // On a smooth series R(0) - R(tau) is small enough that the O(tau/N)
    // edge terms of the per-lag averages matter, so compare against the
    // matched-range half mean squared increment instead.
    use fwf_core::signal::gen_mackey_glass;
    let s = fwf_core::standardize(&gen_mackey_glass(&Default::default(), 2000, 3000, 1.2).unwrap())
        .unwrap();
    let x = s.values();
    let sigma = 100.0;
    let c = kernel::autocorrentropy(&s, 10, width(sigma)).unwrap();
    for tau in 1..10 {
        let lhs = sigma * sigma * (1.0 - c.values()[tau]);
        let rhs = (tau..x.len())
            .map(|t| 0.5 * (x[t] - x[t - tau]).powi(2))
            .sum::<f64>()
            / (x.len() - tau) as f64;
        assert!((lhs - rhs).abs() <= 0.01 * rhs, "lag {tau}: {lhs} vs {rhs}");
    }
}

pub type Property = fn() -> Result<(), String>;

#[allow(dead_code)]
pub const ALL: &[(&str, Property)] = &[
    ("inverse_kernel_round_trip", inverse_kernel_round_trip),
    (
        "partner_similarity_is_g_to_the_alpha_squared",
        partner_similarity_is_g_to_the_alpha_squared,
    ),
    (
        "correntropy_is_bounded_with_unit_zero_lag",
        correntropy_is_bounded_with_unit_zero_lag,
    ),
    (
        "wide_kernel_correntropy_approaches_covariance",
        wide_kernel_correntropy_approaches_covariance,
    ),
    ("kd_tree_equals_linear_scan", kd_tree_equals_linear_scan),
    (
        "one_neighbor_prediction_is_the_nearest_partner_output",
        one_neighbor_prediction_is_the_nearest_partner_output,
    ),
    (
        "weight_solve_residual_is_tiny",
        weight_solve_residual_is_tiny,
    ),
    ("estimators_match_double_loop", estimators_match_double_loop),
    (
        "rkhs_inner_is_symmetric_and_bilinear",
        rkhs_inner_is_symmetric_and_bilinear,
    ),
];
