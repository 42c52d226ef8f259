//! Gaussian kernel primitives and empirical correntropy / covariance lag
//! profiles.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{param, FwfError, Result};
use crate::fmt_f64;
use crate::linalg::Matrix;
use crate::signal::{moments, Series};

/// Gaussian kernel width `sigma > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct KernelWidth(f64);

impl KernelWidth {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(KernelWidth(sigma))
        } else {
            Err(param(
                "sigma",
                format!("must be positive and finite, got {sigma}"),
            ))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for KernelWidth {
    type Error = FwfError;
    fn try_from(v: f64) -> Result<Self> {
        KernelWidth::new(v)
    }
}

impl From<KernelWidth> for f64 {
    fn from(w: KernelWidth) -> f64 {
        w.0
    }
}

/// Unnormalized Gaussian kernel `exp(-(x-y)^2 / (2 sigma^2))`.
#[inline]
pub fn gaussian(x: f64, y: f64, w: KernelWidth) -> f64 {
    let d = x - y;
    (-(d * d) / (2.0 * w.0 * w.0)).exp()
}

/// Gaussian kernel between two vectors (squared Euclidean distance).
pub fn gaussian_vec(a: &[f64], b: &[f64], w: KernelWidth) -> f64 {
    (-crate::linalg::sq_dist(a, b) / (2.0 * w.0 * w.0)).exp()
}

/// Non-negative distance `d` with `gaussian(x, x - d) == g`.
pub fn gaussian_inverse(g: f64, w: KernelWidth) -> Result<f64> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(FwfError::Domain {
            value: g,
            domain: "(0, 1]",
        });
    }
    Ok(w.0 * (-2.0 * g.ln()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagKind {
    Correntropy,
    Covariance,
    CrossCorrentropy,
    CrossCovariance,
}

/// Per-lag statistic for lags `0..L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagProfile {
    kind: LagKind,
    values: Vec<f64>,
}

impl LagProfile {
    pub fn new(kind: LagKind, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(param("order", "lag profile must have at least one lag"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FwfError::Degenerate(
                "lag profile has non-finite entries".into(),
            ));
        }
        Ok(LagProfile { kind, values })
    }

    pub fn kind(&self) -> LagKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, lag: usize) -> Result<f64> {
        self.values.get(lag).copied().ok_or(FwfError::Range {
            lag,
            len: self.values.len(),
        })
    }

    /// Two-column `lag,value` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lag,value")?;
        for (lag, v) in self.values.iter().enumerate() {
            writeln!(w, "{lag},{}", fmt_f64(*v))?;
        }
        Ok(())
    }
}

fn check_order(len: usize, order: usize) -> Result<()> {
    if order == 0 {
        return Err(param("order", "must be at least 1"));
    }
    if len <= order {
        return Err(FwfError::Dimension(format!(
            "series of length {len} is too short for {order} lags"
        )));
    }
    Ok(())
}

/// Lag-wise average of `f(z(t), x(t - lag))` over every valid `t`.
fn lag_average(x: &[f64], z: &[f64], order: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let n = x.len();
    (0..order)
        .map(|lag| {
            let s: f64 = (lag..n).map(|t| f(z[t], x[t - lag])).sum();
            s / (n - lag) as f64
        })
        .collect()
}

/// `v(lag) = mean_t G(X(t), X(t - lag))`, normalized by the number of pairs.
pub fn autocorrentropy(s: &Series, order: usize, w: KernelWidth) -> Result<LagProfile> {
    check_order(s.len(), order)?;
    let x = s.values();
    LagProfile::new(
        LagKind::Correntropy,
        lag_average(x, x, order, |a, b| gaussian(a, b, w)),
    )
}

/// `P_v(lag) = mean_t G(Z(t), X(t - lag))` for aligned series.
pub fn crosscorrentropy(
    x: &Series,
    z: &Series,
    order: usize,
    w: KernelWidth,
) -> Result<LagProfile> {
    aligned(x, z)?;
    check_order(x.len(), order)?;
    LagProfile::new(
        LagKind::CrossCorrentropy,
        lag_average(x.values(), z.values(), order, |a, b| gaussian(a, b, w)),
    )
}

/// `R(lag) = mean_t X(t) X(t - lag)`; assumes a zero-mean series.
pub fn autocovariance(s: &Series, order: usize) -> Result<LagProfile> {
    check_order(s.len(), order)?;
    let x = s.values();
    LagProfile::new(LagKind::Covariance, lag_average(x, x, order, |a, b| a * b))
}

/// `P(lag) = mean_t Z(t) X(t - lag)`.
pub fn crosscovariance(x: &Series, z: &Series, order: usize) -> Result<LagProfile> {
    aligned(x, z)?;
    check_order(x.len(), order)?;
    LagProfile::new(
        LagKind::CrossCovariance,
        lag_average(x.values(), z.values(), order, |a, b| a * b),
    )
}

fn aligned(x: &Series, z: &Series) -> Result<()> {
    if x.len() != z.len() {
        return Err(FwfError::Alignment {
            left: x.len(),
            right: z.len(),
        });
    }
    Ok(())
}

/// Window-based estimators used when fitting from an embedded dataset.
///
/// Each row contributes the pair `(x_i(0), x_i(lag))` to the auto profile
/// and `(z_i, x_i(lag))` to the cross profile, so the estimate only uses
/// samples that belong to the training rows.
pub mod windowed {
    use super::*;

    fn profile(
        windows: &Matrix,
        targets: Option<&[f64]>,
        kind: LagKind,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<LagProfile> {
        let n = windows.rows();
        if n == 0 {
            return Err(FwfError::Dimension("no windows".into()));
        }
        if let Some(t) = targets {
            if t.len() != n {
                return Err(FwfError::Alignment {
                    left: n,
                    right: t.len(),
                });
            }
        }
        let values = (0..windows.cols())
            .map(|lag| {
                let s: f64 = windows
                    .iter_rows()
                    .enumerate()
                    .map(|(i, row)| {
                        let lead = targets.map_or(row[0], |t| t[i]);
                        f(lead, row[lag])
                    })
                    .sum();
                s / n as f64
            })
            .collect();
        LagProfile::new(kind, values)
    }

    pub fn autocorrentropy(windows: &Matrix, w: KernelWidth) -> Result<LagProfile> {
        profile(windows, None, LagKind::Correntropy, |a, b| {
            gaussian(a, b, w)
        })
    }

    pub fn crosscorrentropy(
        windows: &Matrix,
        targets: &[f64],
        w: KernelWidth,
    ) -> Result<LagProfile> {
        profile(windows, Some(targets), LagKind::CrossCorrentropy, |a, b| {
            gaussian(a, b, w)
        })
    }

    pub fn autocovariance(windows: &Matrix) -> Result<LagProfile> {
        profile(windows, None, LagKind::Covariance, |a, b| a * b)
    }

    pub fn crosscovariance(windows: &Matrix, targets: &[f64]) -> Result<LagProfile> {
        profile(windows, Some(targets), LagKind::CrossCovariance, |a, b| {
            a * b
        })
    }

    /// Second-moment matrix `mean_i x_i x_i^T` of the windows. Unlike a
    /// Toeplitz matrix built from a lag profile it is positive
    /// semi-definite for any sample.
    pub fn second_moment(windows: &Matrix) -> Result<Matrix> {
        let (n, l) = (windows.rows(), windows.cols());
        if n == 0 {
            return Err(FwfError::Dimension("no windows".into()));
        }
        let mut m = Matrix::zeros(l, l);
        for row in windows.iter_rows() {
            for s in 0..l {
                for t in 0..=s {
                    m[(s, t)] += row[s] * row[t];
                }
            }
        }
        for s in 0..l {
            for t in 0..=s {
                let v = m[(s, t)] / n as f64;
                m[(s, t)] = v;
                m[(t, s)] = v;
            }
        }
        Ok(m)
    }
}

/// Symmetric Toeplitz matrix with `entry(i, j) = profile(|i - j|)`.
pub fn toeplitz(profile: &LagProfile) -> Matrix {
    let l = profile.len();
    let mut m = Matrix::zeros(l, l);
    for i in 0..l {
        for j in 0..l {
            m[(i, j)] = profile.values[i.abs_diff(j)];
        }
    }
    m
}

/// A finite expansion `sum_i c_i G(X(t_i), .)`: coefficient and time index.
pub type Expansion = [(f64, usize)];

/// Inner product of two expansions through the lag profile:
/// `sum_{i,j} a_i b_j profile(|t_i - s_j|)`.
pub fn rkhs_inner(a: &Expansion, b: &Expansion, profile: &LagProfile) -> Result<f64> {
    let mut total = 0.0;
    for &(ca, ta) in a {
        for &(cb, tb) in b {
            total += ca * cb * profile.at(ta.abs_diff(tb))?;
        }
    }
    Ok(total)
}

/// Silverman's rule `1.06 std N^(-1/5)`.
pub fn silverman_sigma(values: &[f64]) -> Result<KernelWidth> {
    if values.len() < 2 {
        return Err(FwfError::Degenerate(
            "bandwidth rule needs at least two samples".into(),
        ));
    }
    let (_, std) = moments(values);
    if !(std > 0.0) {
        return Err(FwfError::Degenerate("series has zero variance".into()));
    }
    KernelWidth::new(1.06 * std * (values.len() as f64).powf(-0.2))
}
