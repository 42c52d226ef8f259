//! Functional Wiener filter with nearest-neighbor evaluation.
//!
//! Fitting solves the correntropy normal equations `(V + ridge I) W = P_v`
//! for a weight function over lags, then gives every training window `x_i`
//! a *partner* `p_i(tau) = x_i(tau) - alpha * G^-1(g_i(tau))` where
//! `g_i(tau) = G(W(tau), z_i)`. A query window is scored by evaluating the
//! functional `sum_tau W(tau) G(p_j(tau), x(tau))` at the partners of its K
//! nearest training windows, averaging, and removing the training bias.

use rayon::prelude::*;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{param, FwfError, Result};
use crate::kernel::{
    gaussian, gaussian_inverse, silverman_sigma, toeplitz, windowed, KernelWidth, LagProfile,
};
use crate::linalg::{norm, Cholesky, Matrix};
use crate::neighbors::NeighborIndex;
use crate::signal::Dataset;

/// Smallest similarity handed to the inverse kernel; `G^-1` diverges at 0.
pub const MIN_G: f64 = 1e-300;

/// Absolute ridges tried, in order, when a searched width fails to factor
/// with the default ridge (correntropy matrices have unit diagonal, so these
/// are also relative to `trace(V) / L`).
pub const AUTO_RIDGE_LADDER: [f64; 3] = [1e-7, 1e-6, 1e-5];

/// Relative ridge used when the configuration leaves it unset.
pub const DEFAULT_RELATIVE_RIDGE: f64 = 1e-8;

/// `count` log-spaced points covering `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut g: Vec<f64> = (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect();
            g[0] = lo;
            g[count - 1] = hi;
            g
        }
    }
}

/// 50 log-spaced values in `[0.01, 2]`.
pub fn default_alpha_grid() -> Vec<f64> {
    log_grid(0.01, 2.0, 50)
}

/// Multipliers of the bandwidth-rule width searched when `sigma_input` is
/// `"auto"`: 13 log-spaced values in `[1, 100]`.
pub fn default_sigma_scales() -> Vec<f64> {
    log_grid(1.0, 100.0, 13)
}

/// How the evaluation scale `alpha` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSetting {
    Fixed(f64),
    /// minimize training MSE over [`default_alpha_grid`]
    Auto,
}

/// How the input-space kernel width is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WidthSetting {
    /// Silverman's rule on the training inputs
    Rule,
    Fixed(KernelWidth),
    /// minimize training MSE over multiples of the rule width
    Auto,
}

macro_rules! keyword_or_number {
    ($ty:ident, $visitor:ident, $expect:literal, $num:expr, [$($kw:literal => $val:expr),*]) => {
        struct $visitor;
        impl<'de> Visitor<'de> for $visitor {
            type Value = $ty;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str($expect)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<$ty, E> {
                ($num)(v).map_err(E::custom)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<$ty, E> {
                self.visit_f64(v as f64)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<$ty, E> {
                self.visit_f64(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<$ty, E> {
                match v {
                    $($kw => Ok($val),)*
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
    };
}

keyword_or_number!(AlphaSetting, AlphaVisitor, "a positive number or \"auto\"",
    |v: f64| if v >= 0.0 && v.is_finite() { Ok(AlphaSetting::Fixed(v)) } else { Err(format!("alpha must be non-negative, got {v}")) },
    ["auto" => AlphaSetting::Auto]);

keyword_or_number!(WidthSetting, WidthVisitor, "a positive number, \"rule\" or \"auto\"",
    |v: f64| KernelWidth::new(v).map(WidthSetting::Fixed).map_err(|e| e.to_string()),
    ["rule" => WidthSetting::Rule, "silverman" => WidthSetting::Rule, "auto" => WidthSetting::Auto]);

impl<'de> Deserialize<'de> for AlphaSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(AlphaVisitor)
    }
}

impl Serialize for AlphaSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlphaSetting::Fixed(v) => s.serialize_f64(*v),
            AlphaSetting::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for WidthSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(WidthVisitor)
    }
}

impl Serialize for WidthSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            WidthSetting::Rule => s.serialize_str("rule"),
            WidthSetting::Fixed(w) => s.serialize_f64(w.get()),
            WidthSetting::Auto => s.serialize_str("auto"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FwfConfig {
    pub order: usize,
    pub sigma_input: WidthSetting,
    /// width of the weight-vs-target kernel; `None` reuses the input width
    pub sigma_weight: Option<KernelWidth>,
    pub alpha: AlphaSetting,
    pub k_neighbors: usize,
    /// absolute ridge; `None` means `1e-8 * trace(V) / L`
    pub ridge: Option<f64>,
    pub horizon: usize,
}

impl Default for FwfConfig {
    fn default() -> Self {
        FwfConfig {
            order: 10,
            sigma_input: WidthSetting::Rule,
            sigma_weight: None,
            alpha: AlphaSetting::Auto,
            k_neighbors: 2,
            ridge: None,
            horizon: 1,
        }
    }
}

impl FwfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(param("order", "must be at least 1"));
        }
        if self.k_neighbors == 0 {
            return Err(param("k_neighbors", "must be at least 1"));
        }
        if let Some(r) = self.ridge {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(param("ridge", format!("must be non-negative, got {r}")));
            }
        }
        Ok(())
    }
}

/// Fully resolved hyperparameters of a fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedConfig {
    pub order: usize,
    pub horizon: usize,
    pub sigma_input: KernelWidth,
    pub sigma_weight: KernelWidth,
    pub alpha: f64,
    pub k_neighbors: usize,
    pub ridge: f64,
}

/// Per-lag similarities between a target and the weight function.
#[derive(Debug, Clone, PartialEq)]
pub struct GVector(Vec<f64>);

impl GVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&g) = values.iter().find(|&&g| !(g > 0.0 && g <= 1.0)) {
            return Err(FwfError::Domain {
                value: g,
                domain: "(0, 1]",
            });
        }
        Ok(GVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Solves `(V + ridge I) W = P_v` by Cholesky with one refinement step.
pub fn solve_weights(v: &Matrix, pv: &LagProfile, ridge: f64) -> Result<Vec<f64>> {
    if !v.is_square() || v.rows() != pv.len() {
        return Err(FwfError::Dimension(format!(
            "matrix is {}x{}, profile has {} lags",
            v.rows(),
            v.cols(),
            pv.len()
        )));
    }
    let a = v.with_ridge(ridge);
    let chol = Cholesky::new(&a)?;
    let b = pv.values();
    let mut w = chol.solve(b)?;
    let ax = a.mul_vec(&w)?;
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let dw = chol.solve(&r)?;
    for (w, d) in w.iter_mut().zip(dw) {
        *w += d;
    }
    Ok(w)
}

/// Relative residual `||(V + ridge I) W - P|| / ||P||`.
pub fn solve_residual(v: &Matrix, w: &[f64], p: &[f64], ridge: f64) -> f64 {
    let ax = v
        .with_ridge(ridge)
        .mul_vec(w)
        .expect("dimensions checked by caller");
    let r: Vec<f64> = p.iter().zip(ax).map(|(p, a)| p - a).collect();
    norm(&r) / norm(p)
}

/// `sum_tau weights(tau) * G(centers(tau), point(tau))`.
pub fn evaluate_functional(
    weights: &[f64],
    centers: &[f64],
    point: &[f64],
    w: KernelWidth,
) -> Result<f64> {
    if weights.len() != centers.len() || centers.len() != point.len() {
        return Err(FwfError::Dimension(format!(
            "weights {}, centers {}, point {}",
            weights.len(),
            centers.len(),
            point.len()
        )));
    }
    Ok(functional(weights, centers, point, w))
}

#[inline]
fn functional(weights: &[f64], centers: &[f64], point: &[f64], w: KernelWidth) -> f64 {
    let mut s = 0.0;
    for tau in 0..weights.len() {
        s += weights[tau] * gaussian(centers[tau], point[tau], w);
    }
    s
}

/// `g(tau) = G(weights(tau), z)`, floored at [`MIN_G`].
pub fn compute_g(z: f64, weights: &[f64], w_weight: KernelWidth) -> GVector {
    GVector(
        weights
            .iter()
            .map(|&wt| gaussian(wt, z, w_weight).max(MIN_G))
            .collect(),
    )
}

/// `partner(tau) = x(tau) - alpha * G^-1(g(tau))` on the non-negative branch.
pub fn compute_partner(x: &[f64], g: &GVector, alpha: f64, w: KernelWidth) -> Result<Vec<f64>> {
    if x.len() != g.0.len() {
        return Err(FwfError::Dimension(format!(
            "window has {} lags, g has {}",
            x.len(),
            g.0.len()
        )));
    }
    x.iter()
        .zip(&g.0)
        .map(|(&xv, &gv)| Ok(xv - alpha * gaussian_inverse(gv, w)?))
        .collect()
}

/// The α-independent part of a fit: weights, inverse-kernel offsets and the
/// training neighbor lists.
struct Prepared {
    weights: Vec<f64>,
    sigma_input: KernelWidth,
    sigma_weight: KernelWidth,
    ridge: f64,
    k: usize,
    /// offsets[i][tau] = G^-1(g_i(tau)) so that partner = x - alpha * offset
    offsets: Matrix,
    /// flattened training neighbor lists, `k` per row
    train_neighbors: Vec<usize>,
}

/// Input-sample bandwidth rule over the rows' newest samples plus the older
/// samples of the first row (the whole source series for contiguous data).
fn rule_width(windows: &Matrix) -> Result<KernelWidth> {
    let mut vals: Vec<f64> = windows.iter_rows().map(|r| r[0]).collect();
    if let Some(first) = windows.iter_rows().next() {
        vals.extend_from_slice(&first[1..]);
    }
    silverman_sigma(&vals)
}

fn weights_for(data: &Dataset, sigma: KernelWidth, ridge: Option<f64>) -> Result<(Vec<f64>, f64)> {
    let v = toeplitz(&windowed::autocorrentropy(data.windows(), sigma)?);
    let pv = windowed::crosscorrentropy(data.windows(), data.targets(), sigma)?;
    let ridge = ridge.unwrap_or(DEFAULT_RELATIVE_RIDGE * v.trace() / v.rows() as f64);
    Ok((solve_weights(&v, &pv, ridge)?, ridge))
}

fn training_neighbors(index: &NeighborIndex, data: &Dataset, k: usize) -> Result<Vec<usize>> {
    let lists: Result<Vec<Vec<usize>>> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            Ok(index
                .query(data.window(i), k)?
                .into_iter()
                .map(|n| n.index)
                .collect())
        })
        .collect();
    Ok(lists?.concat())
}

impl Prepared {
    fn new(
        data: &Dataset,
        sigma_input: KernelWidth,
        sigma_weight: Option<KernelWidth>,
        ridge: Option<f64>,
        k: usize,
        index: &NeighborIndex,
        neighbors: Option<&[usize]>,
    ) -> Result<Self> {
        let sigma_weight = sigma_weight.unwrap_or(sigma_input);
        let (weights, ridge) = weights_for(data, sigma_input, ridge)?;
        let l = data.order();
        let mut offsets = Matrix::zeros(data.len(), l);
        for (i, &z) in data.targets().iter().enumerate() {
            let g = compute_g(z, &weights, sigma_weight);
            for (tau, &gv) in g.values().iter().enumerate() {
                offsets[(i, tau)] = gaussian_inverse(gv, sigma_input)?;
            }
        }
        let train_neighbors = match neighbors {
            Some(n) => n.to_vec(),
            None => training_neighbors(index, data, k)?,
        };
        Ok(Prepared {
            weights,
            sigma_input,
            sigma_weight,
            ridge,
            k,
            offsets,
            train_neighbors,
        })
    }

    fn partners(&self, data: &Dataset, alpha: f64) -> Matrix {
        let mut p = Matrix::zeros(data.len(), data.order());
        for i in 0..data.len() {
            let x = data.window(i);
            let off = self.offsets.row(i);
            for (tau, dst) in p.row_mut(i).iter_mut().enumerate() {
                *dst = x[tau] - alpha * off[tau];
            }
        }
        p
    }

    /// Raw (uncorrected) outputs on the training rows.
    fn raw_training_outputs(&self, data: &Dataset, partners: &Matrix) -> Vec<f64> {
        (0..data.len())
            .map(|i| {
                let nb = &self.train_neighbors[i * self.k..(i + 1) * self.k];
                average_output(
                    &self.weights,
                    partners,
                    nb,
                    data.window(i),
                    self.sigma_input,
                )
            })
            .collect()
    }

    /// `(bias, training mse)` at a given alpha.
    fn score(&self, data: &Dataset, alpha: f64) -> (f64, f64) {
        let raw = self.raw_training_outputs(data, &self.partners(data, alpha));
        bias_and_mse(&raw, data.targets())
    }
}

fn average_output(
    weights: &[f64],
    partners: &Matrix,
    neighbors: &[usize],
    x: &[f64],
    w: KernelWidth,
) -> f64 {
    let mut s = 0.0;
    for &j in neighbors {
        s += functional(weights, partners.row(j), x, w);
    }
    s / neighbors.len() as f64
}

fn bias_and_mse(raw: &[f64], targets: &[f64]) -> (f64, f64) {
    let n = raw.len() as f64;
    let bias = raw.iter().sum::<f64>() / n - targets.iter().sum::<f64>() / n;
    let mse = raw
        .iter()
        .zip(targets)
        .map(|(r, z)| (r - bias - z).powi(2))
        .sum::<f64>()
        / n;
    (bias, mse)
}

/// A fitted filter. Immutable; `predict` may be called concurrently.
#[derive(Debug, Clone)]
pub struct FwfModel {
    weights: Vec<f64>,
    partners: Matrix,
    index: NeighborIndex,
    bias: f64,
    config: FittedConfig,
    training_mse: f64,
}

/// Outcome of a hyperparameter search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneReport {
    pub sigma_input: KernelWidth,
    pub alpha: f64,
    pub training_mse: f64,
    /// absolute ridge the winning width was solved with
    pub ridge: f64,
    /// every evaluated `(sigma, alpha, training mse)`; failed solves are absent
    pub evaluated: Vec<(f64, f64, f64)>,
}

fn check_data(data: &Dataset, cfg: &FwfConfig) -> Result<()> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(param("data", "training set is empty"));
    }
    if data.order() != cfg.order {
        return Err(FwfError::Dimension(format!(
            "dataset order {} differs from configured order {}",
            data.order(),
            cfg.order
        )));
    }
    Ok(())
}

/// Picks the alpha in `grid` with the lowest training MSE (ties go to the
/// smaller alpha). `cfg.sigma_input` must not be `Auto`; see [`tune`].
pub fn tune_alpha(data: &Dataset, cfg: &FwfConfig, grid: &[f64]) -> Result<f64> {
    if cfg.sigma_input == WidthSetting::Auto {
        return Err(param(
            "sigma_input",
            "tune_alpha needs a fixed or rule width",
        ));
    }
    Ok(tune(data, cfg, grid, &[1.0])?.alpha)
}

/// Searches alpha over `alpha_grid` and, when `cfg.sigma_input` is `Auto`,
/// the input width over `sigma_scales` times the rule width. A width whose
/// correntropy system cannot be factorized is skipped.
/// Ridge used for one width and its `(sigma, alpha, mse)` grid.
type WidthScan = (f64, Vec<(f64, f64, f64)>);

pub fn tune(
    data: &Dataset,
    cfg: &FwfConfig,
    alpha_grid: &[f64],
    sigma_scales: &[f64],
) -> Result<TuneReport> {
    check_data(data, cfg)?;
    if alpha_grid.is_empty() {
        return Err(param("alpha_grid", "must not be empty"));
    }
    if let Some(a) = alpha_grid.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(param(
            "alpha_grid",
            format!("entries must be positive, got {a}"),
        ));
    }
    search(data, cfg, alpha_grid, sigma_scales)
}

fn search(
    data: &Dataset,
    cfg: &FwfConfig,
    alpha_grid: &[f64],
    sigma_scales: &[f64],
) -> Result<TuneReport> {
    let mut alphas = alpha_grid.to_vec();
    alphas.sort_by(f64::total_cmp);

    let widths: Vec<KernelWidth> = match cfg.sigma_input {
        WidthSetting::Fixed(w) => vec![w],
        WidthSetting::Rule => vec![rule_width(data.windows())?],
        WidthSetting::Auto => {
            if sigma_scales.is_empty() {
                return Err(param("sigma_scales", "must not be empty"));
            }
            let base = rule_width(data.windows())?.get();
            sigma_scales
                .iter()
                .map(|s| KernelWidth::new(base * s))
                .collect::<Result<_>>()?
        }
    };

    let k = cfg.k_neighbors.min(data.len());
    let index = NeighborIndex::build(data.windows().clone())?;
    let neighbors = training_neighbors(&index, data, k)?;

    // A wide kernel can leave the Toeplitz V indefinite; when the width is
    // being searched and the ridge is unset, retry with a few larger ridges
    // before giving up on that width.
    let ladder: Vec<Option<f64>> = match (cfg.sigma_input, cfg.ridge) {
        (WidthSetting::Auto, None) => std::iter::once(None)
            .chain(AUTO_RIDGE_LADDER.iter().map(|&r| Some(r)))
            .collect(),
        _ => vec![cfg.ridge],
    };
    let per_width: Vec<Result<WidthScan>> = widths
        .par_iter()
        .map(|&w| {
            let mut failure = None;
            for &ridge in &ladder {
                match Prepared::new(
                    data,
                    w,
                    cfg.sigma_weight,
                    ridge,
                    k,
                    &index,
                    Some(&neighbors),
                ) {
                    Ok(prep) => {
                        let rows = alphas
                            .iter()
                            .map(|&a| (w.get(), a, prep.score(data, a).1))
                            .collect();
                        return Ok((prep.ridge, rows));
                    }
                    Err(e @ FwfError::Conditioning { .. }) => failure = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(failure.expect("ladder is non-empty"))
        })
        .collect();

    let mut evaluated = Vec::new();
    let mut ridges = Vec::new();
    let mut last_err = None;
    for r in per_width {
        match r {
            Ok((ridge, rows)) => {
                ridges.push((rows.first().map_or(f64::NAN, |r| r.0), ridge));
                evaluated.extend(rows);
            }
            Err(e @ FwfError::Conditioning { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let best =
        evaluated
            .iter()
            .filter(|r| r.2.is_finite())
            .fold(None::<(f64, f64, f64)>, |best, &r| match best {
                Some(b) if b.2 <= r.2 => Some(b),
                _ => Some(r),
            });
    match best {
        Some((s, a, mse)) => Ok(TuneReport {
            sigma_input: KernelWidth::new(s)?,
            alpha: a,
            training_mse: mse,
            ridge: ridges.iter().find(|r| r.0 == s).map_or(f64::NAN, |r| r.1),
            evaluated,
        }),
        None => Err(last_err.unwrap_or_else(|| param("alpha_grid", "no finite training error"))),
    }
}

/// Fits the filter. `Auto` settings are resolved with [`tune`] over the
/// default grids first.
pub fn fit(data: &Dataset, cfg: &FwfConfig) -> Result<FwfModel> {
    check_data(data, cfg)?;
    let mut cfg = cfg.clone();
    if cfg.sigma_input == WidthSetting::Auto || cfg.alpha == AlphaSetting::Auto {
        let alphas = match cfg.alpha {
            AlphaSetting::Fixed(a) => vec![a],
            AlphaSetting::Auto => default_alpha_grid(),
        };
        let report = search(data, &cfg, &alphas, &default_sigma_scales())?;
        cfg.sigma_input = WidthSetting::Fixed(report.sigma_input);
        cfg.ridge = Some(report.ridge);
        if cfg.alpha == AlphaSetting::Auto {
            cfg.alpha = AlphaSetting::Fixed(report.alpha);
        }
    }
    let sigma = match cfg.sigma_input {
        WidthSetting::Fixed(w) => w,
        WidthSetting::Rule => rule_width(data.windows())?,
        WidthSetting::Auto => unreachable!("resolved above"),
    };
    let alpha = match cfg.alpha {
        AlphaSetting::Fixed(a) => a,
        AlphaSetting::Auto => unreachable!("resolved above"),
    };
    let k = cfg.k_neighbors.min(data.len());
    let index = NeighborIndex::build(data.windows().clone())?;
    let prep = Prepared::new(data, sigma, cfg.sigma_weight, cfg.ridge, k, &index, None)?;
    let partners = prep.partners(data, alpha);
    let raw = prep.raw_training_outputs(data, &partners);
    let (bias, training_mse) = bias_and_mse(&raw, data.targets());
    Ok(FwfModel {
        config: FittedConfig {
            order: data.order(),
            horizon: data.horizon(),
            sigma_input: prep.sigma_input,
            sigma_weight: prep.sigma_weight,
            alpha,
            k_neighbors: k,
            ridge: prep.ridge,
        },
        weights: prep.weights,
        partners,
        index,
        bias,
        training_mse,
    })
}

impl FwfModel {
    /// Reassembles a model from stored parts, rebuilding the neighbor index.
    pub fn from_parts(
        weights: Vec<f64>,
        partners: Matrix,
        train_windows: Matrix,
        bias: f64,
        config: FittedConfig,
        training_mse: f64,
    ) -> Result<Self> {
        let l = config.order;
        if weights.len() != l || partners.cols() != l || train_windows.cols() != l {
            return Err(FwfError::Dimension(format!(
                "order {l} but weights {}, partners {}, windows {}",
                weights.len(),
                partners.cols(),
                train_windows.cols()
            )));
        }
        if partners.rows() != train_windows.rows() {
            return Err(FwfError::Dimension(format!(
                "{} partners for {} training windows",
                partners.rows(),
                train_windows.rows()
            )));
        }
        if partners
            .as_slice()
            .iter()
            .chain(&weights)
            .any(|v| !v.is_finite())
        {
            return Err(FwfError::Degenerate(
                "model contains non-finite values".into(),
            ));
        }
        if config.k_neighbors == 0 || config.k_neighbors > train_windows.rows() {
            return Err(param("k_neighbors", "must be in 1..=N"));
        }
        Ok(FwfModel {
            weights,
            partners,
            index: NeighborIndex::build(train_windows)?,
            bias,
            config,
            training_mse,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn partners(&self) -> &Matrix {
        &self.partners
    }

    pub fn train_windows(&self) -> &Matrix {
        self.index.points()
    }

    pub fn neighbor_index(&self) -> &NeighborIndex {
        &self.index
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn config(&self) -> &FittedConfig {
        &self.config
    }

    pub fn training_mse(&self) -> f64 {
        self.training_mse
    }

    pub fn len(&self) -> usize {
        self.partners.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.partners.rows() == 0
    }

    /// Prediction with the fitted neighbor count.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.predict_k(x, self.config.k_neighbors)
    }

    /// Averages the functional evaluated at the partners of the `k` nearest
    /// training windows, then removes the bias.
    pub fn predict_k(&self, x: &[f64], k: usize) -> Result<f64> {
        let nb: Vec<usize> = self
            .index
            .query(x, k)?
            .into_iter()
            .map(|n| n.index)
            .collect();
        Ok(average_output(
            &self.weights,
            &self.partners,
            &nb,
            x,
            self.config.sigma_input,
        ) - self.bias)
    }

    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<f64>> {
        (0..data.len())
            .map(|i| self.predict(data.window(i)))
            .collect()
    }
}

/// Output for window `x` using only training row `j`'s partner, before bias
/// removal. Useful for checking the K=1 reduction.
pub fn single_partner_output(m: &FwfModel, j: usize, x: &[f64]) -> Result<f64> {
    evaluate_functional(&m.weights, m.partners.row(j), x, m.config.sigma_input)
}
