//! Benchmark process generators (Mackey-Glass, Lorenz, white-noise FIR) and
//! the time-delay embedding that turns a series into a supervised dataset.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, FwfError, Result};
use crate::fmt_f64;
use crate::linalg::Matrix;

/// A uniformly sampled scalar series.
///
/// `mean` and `std` are the statistics removed by [`standardize`]; a series
/// that was never standardized carries `mean = 0`, `std = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    dt: f64,
    mean: f64,
    std: f64,
}

impl Series {
    pub fn new(values: Vec<f64>, dt: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(FwfError::Degenerate("series is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FwfError::Degenerate(format!(
                "sample {i} is not finite ({})",
                values[i]
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(param("dt", format!("must be positive, got {dt}")));
        }
        Ok(Series {
            values,
            dt,
            mean: 0.0,
            std: 1.0,
        })
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

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    /// Maps a standardized value back to the original scale.
    pub fn destandardize(&self, v: f64) -> f64 {
        v * self.std + self.mean
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "value")?;
        for v in &self.values {
            writeln!(w, "{}", fmt_f64(*v))?;
        }
        Ok(())
    }

    /// Reads a single-column CSV with header `value`. The sample period is
    /// not stored in the file and is set to 1.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.len() != 1 || &headers[0] != "value" {
            return Err(FwfError::Dimension(format!(
                "expected a single `value` column, found header {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let v: f64 = rec[0].trim().parse().map_err(|_| {
                FwfError::Degenerate(format!("row {}: `{}` is not a number", line + 1, &rec[0]))
            })?;
            values.push(v);
        }
        Series::new(values, 1.0)
    }
}

/// Population moments `(mean, std)`.
pub fn moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Rescales to zero mean and unit population variance, recording the
/// removed statistics.
pub fn standardize(s: &Series) -> Result<Series> {
    if s.len() < 2 {
        return Err(FwfError::Degenerate(
            "standardization needs at least two samples".into(),
        ));
    }
    let (mean, std) = moments(&s.values);
    if !(std > 0.0) {
        return Err(FwfError::Degenerate("series has zero variance".into()));
    }
    let mut values: Vec<f64> = s.values.iter().map(|v| (v - mean) / std).collect();
    // one correction pass removes the rounding left by the first
    let (m2, s2) = moments(&values);
    for v in &mut values {
        *v = (*v - m2) / s2;
    }
    Ok(Series {
        values,
        dt: s.dt,
        mean,
        std,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MgParams {
    pub beta: f64,
    pub gamma: f64,
    pub n_exp: f64,
    pub tau_delay: f64,
    pub step: f64,
    pub downsample: usize,
}

impl Default for MgParams {
    fn default() -> Self {
        MgParams {
            beta: 0.2,
            gamma: 0.1,
            n_exp: 10.0,
            tau_delay: 30.0,
            step: 0.1,
            downsample: 6,
        }
    }
}

impl MgParams {
    /// Number of integration steps spanned by the delay.
    pub fn delay_slots(&self) -> Result<usize> {
        self.validate()?;
        Ok((self.tau_delay / self.step).round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("n_exp", self.n_exp),
            ("tau_delay", self.tau_delay),
            ("step", self.step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(param(name, format!("must be positive, got {v}")));
            }
        }
        if self.downsample == 0 {
            return Err(param("downsample", "must be at least 1"));
        }
        let slots = self.tau_delay / self.step;
        if (slots - slots.round()).abs() > 1e-9 * slots.max(1.0) {
            return Err(param(
                "tau_delay",
                format!("tau_delay/step = {slots} is not an integer"),
            ));
        }
        Ok(())
    }
}

/// Integrates the Mackey-Glass delay equation
/// `dx/dt = beta x(t-tau) / (1 + x(t-tau)^n) - gamma x(t)`
/// with RK4 over a constant initial history equal to `init`.
///
/// `warmup` counts raw integration steps discarded before sampling; the
/// delayed value at the RK4 midpoint is the mean of its two neighbouring
/// history slots.
pub fn gen_mackey_glass(p: &MgParams, n: usize, warmup: usize, init: f64) -> Result<Series> {
    let d = p.delay_slots()?;
    if n == 0 {
        return Err(param("n", "must be at least 1"));
    }
    if warmup < d {
        return Err(param(
            "warmup",
            format!("must cover the delay ({d} steps), got {warmup}"),
        ));
    }
    if !init.is_finite() {
        return Err(param("init", "must be finite"));
    }
    let h = p.step;
    let rhs = |x: f64, xd: f64| p.beta * xd / (1.0 + xd.abs().powf(p.n_exp)) - p.gamma * x;

    // ring buffer of the last d+1 states; hist[k % (d+1)] = x(t_k)
    let cap = d + 1;
    let mut hist = vec![init; cap];
    let mut x = init;
    let total = warmup + (n - 1) * p.downsample;
    let mut out = Vec::with_capacity(n);
    if warmup == 0 {
        out.push(x);
    }
    for k in 0..total {
        // x(t_k - tau) and x(t_{k+1} - tau)
        let xd0 = hist[(k + cap - d) % cap];
        let xd1 = hist[(k + 1 + cap - d) % cap];
        let xdm = 0.5 * (xd0 + xd1);
        let k1 = rhs(x, xd0);
        let k2 = rhs(x + 0.5 * h * k1, xdm);
        let k3 = rhs(x + 0.5 * h * k2, xdm);
        let k4 = rhs(x + h * k3, xd1);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !x.is_finite() {
            return Err(FwfError::Divergence { step: k });
        }
        hist[(k + 1) % cap] = x;
        let done = k + 1;
        if done >= warmup && (done - warmup).is_multiple_of(p.downsample) {
            out.push(x);
        }
    }
    Series::new(out, h * p.downsample as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub step: f64,
    pub downsample: usize,
}

impl Default for LorenzParams {
    fn default() -> Self {
        LorenzParams {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            step: 0.01,
            downsample: 5,
        }
    }
}

impl LorenzParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma", self.sigma),
            ("rho", self.rho),
            ("beta", self.beta),
            ("step", self.step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(param(name, format!("must be positive, got {v}")));
            }
        }
        if self.downsample == 0 {
            return Err(param("downsample", "must be at least 1"));
        }
        Ok(())
    }

    pub fn derivative(&self, s: [f64; 3]) -> [f64; 3] {
        [
            self.sigma * (s[1] - s[0]),
            s[0] * (self.rho - s[2]) - s[1],
            s[0] * s[1] - self.beta * s[2],
        ]
    }

    /// One classical RK4 step of length `h`.
    pub fn rk4_step(&self, s: [f64; 3], h: f64) -> [f64; 3] {
        let add =
            |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
        let k1 = self.derivative(s);
        let k2 = self.derivative(add(s, k1, 0.5 * h));
        let k3 = self.derivative(add(s, k2, 0.5 * h));
        let k4 = self.derivative(add(s, k3, h));
        let mut out = s;
        for i in 0..3 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }
}

/// RK4 integration of the Lorenz system; returns the x component.
pub fn gen_lorenz(p: &LorenzParams, n: usize, warmup: usize, init: [f64; 3]) -> Result<Series> {
    p.validate()?;
    if n == 0 {
        return Err(param("n", "must be at least 1"));
    }
    let mut s = init;
    let mut out = Vec::with_capacity(n);
    if warmup == 0 {
        out.push(s[0]);
    }
    let total = warmup + (n - 1) * p.downsample;
    for k in 0..total {
        s = p.rk4_step(s, p.step);
        if s.iter().any(|v| !v.is_finite()) {
            return Err(FwfError::Divergence { step: k });
        }
        let done = k + 1;
        if done >= warmup && (done - warmup).is_multiple_of(p.downsample) {
            out.push(s[0]);
        }
    }
    Series::new(out, p.step * p.downsample as f64)
}

/// Unit-variance white Gaussian input passed through the FIR filter
/// `coeffs` (zero initial state). The noise comes from a ChaCha8 stream
/// seeded with `seed`.
pub fn gen_fir_process(coeffs: &[f64], n: usize, seed: u64) -> Result<(Series, Series)> {
    if coeffs.is_empty() {
        return Err(param("coeffs", "must not be empty"));
    }
    if n == 0 {
        return Err(param("n", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let desired = convolve(coeffs, &input);
    Ok((Series::new(input, 1.0)?, Series::new(desired, 1.0)?))
}

/// Causal convolution truncated to the input length.
pub fn convolve(coeffs: &[f64], input: &[f64]) -> Vec<f64> {
    (0..input.len())
        .map(|t| {
            coeffs
                .iter()
                .enumerate()
                .take(t + 1)
                .map(|(k, c)| c * input[t - k])
                .sum()
        })
        .collect()
}

/// Embedded windows paired with their targets.
///
/// Row `i` holds `[X(t), X(t-1), ..., X(t-L+1)]` with `t = i + L - 1`
/// (newest sample first) and target `Z(t + horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    windows: Matrix,
    targets: Vec<f64>,
    order: usize,
    horizon: usize,
}

impl Dataset {
    pub fn new(windows: Matrix, targets: Vec<f64>, horizon: usize) -> Result<Self> {
        if windows.rows() != targets.len() {
            return Err(FwfError::Dimension(format!(
                "{} windows but {} targets",
                windows.rows(),
                targets.len()
            )));
        }
        if windows.cols() == 0 {
            return Err(param("order", "windows must have at least one column"));
        }
        Ok(Dataset {
            order: windows.cols(),
            windows,
            targets,
            horizon,
        })
    }

    pub fn windows(&self) -> &Matrix {
        &self.windows
    }

    pub fn window(&self, i: usize) -> &[f64] {
        self.windows.row(i)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Rows picked by index, in the given order.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            windows: self.windows.select_rows(idx),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
            order: self.order,
            horizon: self.horizon,
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Dataset {
        let idx: Vec<usize> = range.collect();
        self.select(&idx)
    }
}

/// Time-delay embedding of a single series: the target is the series itself
/// `horizon` steps ahead.
pub fn embed(s: &Series, order: usize, horizon: usize) -> Result<Dataset> {
    embed_pair(s, s, order, horizon)
}

/// Embeds `input` and takes targets from `desired`, aligned so that the
/// target of the window ending at `t` is `desired(t + horizon)`.
pub fn embed_pair(
    input: &Series,
    desired: &Series,
    order: usize,
    horizon: usize,
) -> Result<Dataset> {
    if order == 0 {
        return Err(param("order", "must be at least 1"));
    }
    if input.len() != desired.len() {
        return Err(FwfError::Alignment {
            left: input.len(),
            right: desired.len(),
        });
    }
    let len = input.len();
    if len < order + horizon {
        return Err(FwfError::Dimension(format!(
            "series of length {len} is shorter than order {order} + horizon {horizon}"
        )));
    }
    let rows = len - (order - 1) - horizon;
    let x = input.values();
    let mut data = Vec::with_capacity(rows * order);
    let mut targets = Vec::with_capacity(rows);
    for i in 0..rows {
        let t = i + order - 1;
        data.extend((0..order).map(|tau| x[t - tau]));
        targets.push(desired.values()[t + horizon]);
    }
    Dataset::new(Matrix::from_vec(rows, order, data)?, targets, horizon)
}
