//! Cross-validated MSE-versus-N experiments and fit/predict timing scans.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::Range;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{klms_fit, krls_fit, krr_fit, wiener_fit};
use crate::error::{param, FwfError, Result};
use crate::fmt_f64;
use crate::fwf::{self, AlphaSetting, FwfConfig, WidthSetting};
use crate::kernel::{silverman_sigma, KernelWidth};
use crate::persist::AnyModel;
use crate::signal::{
    embed_pair, gen_fir_process, gen_lorenz, gen_mackey_glass, standardize, Dataset, LorenzParams,
    MgParams, Series,
};

fn default_true() -> bool {
    true
}

fn default_mg_warmup() -> usize {
    3000
}

fn default_mg_init() -> f64 {
    1.2
}

fn default_lorenz_warmup() -> usize {
    1000
}

fn default_lorenz_init() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

/// Source process of an experiment. Mackey-Glass and Lorenz are
/// self-prediction tasks (the desired signal is the input itself); the FIR
/// process has a separate desired signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    MackeyGlass {
        #[serde(default)]
        params: MgParams,
        #[serde(default = "default_mg_warmup")]
        warmup: usize,
        #[serde(default = "default_mg_init")]
        init: f64,
        #[serde(default = "default_true")]
        standardize: bool,
    },
    Lorenz {
        #[serde(default)]
        params: LorenzParams,
        #[serde(default = "default_lorenz_warmup")]
        warmup: usize,
        #[serde(default = "default_lorenz_init")]
        init: [f64; 3],
        #[serde(default = "default_true")]
        standardize: bool,
    },
    Fir {
        coeffs: Vec<f64>,
        /// std of white noise added to the desired signal
        #[serde(default)]
        noise_std: f64,
    },
}

impl SignalSpec {
    pub fn mackey_glass() -> Self {
        SignalSpec::MackeyGlass {
            params: MgParams::default(),
            warmup: default_mg_warmup(),
            init: default_mg_init(),
            standardize: true,
        }
    }

    pub fn lorenz() -> Self {
        SignalSpec::Lorenz {
            params: LorenzParams::default(),
            warmup: default_lorenz_warmup(),
            init: default_lorenz_init(),
            standardize: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SignalSpec::MackeyGlass {
                params,
                warmup,
                init,
                ..
            } => {
                let d = params.delay_slots()?;
                if *warmup < d {
                    return Err(param("warmup", format!("must cover the delay ({d} steps)")));
                }
                if !init.is_finite() {
                    return Err(param("init", "must be finite"));
                }
                Ok(())
            }
            SignalSpec::Lorenz { params, init, .. } => {
                params.validate()?;
                if init.iter().any(|v| !v.is_finite()) {
                    return Err(param("init", "must be finite"));
                }
                Ok(())
            }
            SignalSpec::Fir { coeffs, noise_std } => {
                if coeffs.is_empty() {
                    return Err(param("coeffs", "must not be empty"));
                }
                if !(*noise_std >= 0.0 && noise_std.is_finite()) {
                    return Err(param("noise_std", "must be non-negative"));
                }
                Ok(())
            }
        }
    }

    /// Generates `(input, desired)` of length `n`.
    pub fn generate(&self, n: usize, seed: u64) -> Result<(Series, Series)> {
        self.validate()?;
        let std_if = |s: Series, on: bool| if on { standardize(&s) } else { Ok(s) };
        match self {
            SignalSpec::MackeyGlass {
                params,
                warmup,
                init,
                standardize,
            } => {
                let s = std_if(gen_mackey_glass(params, n, *warmup, *init)?, *standardize)?;
                Ok((s.clone(), s))
            }
            SignalSpec::Lorenz {
                params,
                warmup,
                init,
                standardize,
            } => {
                let s = std_if(gen_lorenz(params, n, *warmup, *init)?, *standardize)?;
                Ok((s.clone(), s))
            }
            SignalSpec::Fir { coeffs, noise_std } => {
                let (x, z) = gen_fir_process(coeffs, n, seed)?;
                if *noise_std == 0.0 {
                    return Ok((x, z));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
                let noisy: Vec<f64> = z
                    .values()
                    .iter()
                    .map(|v| {
                        let e: f64 = StandardNormal.sample(&mut rng);
                        v + noise_std * e
                    })
                    .collect();
                Ok((x, Series::new(noisy, 1.0)?))
            }
        }
    }
}

fn default_eta() -> f64 {
    0.5
}

fn default_lambda() -> f64 {
    1e-2
}

fn default_k() -> usize {
    2
}

fn default_alpha() -> AlphaSetting {
    AlphaSetting::Auto
}

/// A method and its hyperparameters. Kernel widths default to the
/// bandwidth rule on the training inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Fwf {
        #[serde(default = "rule")]
        sigma_input: WidthSetting,
        #[serde(default)]
        sigma_weight: Option<KernelWidth>,
        #[serde(default = "default_alpha")]
        alpha: AlphaSetting,
        #[serde(default = "default_k")]
        k_neighbors: usize,
        #[serde(default)]
        ridge: Option<f64>,
    },
    Wiener {
        #[serde(default)]
        ridge: Option<f64>,
    },
    Klms {
        #[serde(default = "default_eta")]
        eta: f64,
        #[serde(default = "rule")]
        sigma: WidthSetting,
    },
    Krls {
        #[serde(default = "default_lambda")]
        lambda: f64,
        #[serde(default = "rule")]
        sigma: WidthSetting,
    },
    Krr {
        #[serde(default = "default_lambda")]
        lambda: f64,
        #[serde(default = "rule")]
        sigma: WidthSetting,
    },
}

fn rule() -> WidthSetting {
    WidthSetting::Rule
}

pub const METHOD_NAMES: [&str; 5] = ["fwf", "wiener", "klms", "krls", "krr"];

impl MethodSpec {
    pub fn fwf_default() -> Self {
        MethodSpec::Fwf {
            sigma_input: WidthSetting::Rule,
            sigma_weight: None,
            alpha: AlphaSetting::Auto,
            k_neighbors: 2,
            ridge: None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Fwf { .. } => "fwf",
            MethodSpec::Wiener { .. } => "wiener",
            MethodSpec::Klms { .. } => "klms",
            MethodSpec::Krls { .. } => "krls",
            MethodSpec::Krr { .. } => "krr",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MethodSpec::Fwf {
                k_neighbors, ridge, ..
            } => FwfConfig {
                k_neighbors: *k_neighbors,
                ridge: *ridge,
                ..FwfConfig::default()
            }
            .validate(),
            MethodSpec::Wiener { ridge } => match ridge {
                Some(r) if !(*r >= 0.0 && r.is_finite()) => {
                    Err(param("ridge", "must be non-negative"))
                }
                _ => Ok(()),
            },
            MethodSpec::Klms { eta, sigma } => {
                if !(*eta >= 0.0 && eta.is_finite()) {
                    return Err(param("eta", "must be non-negative"));
                }
                kaf_width_ok(sigma)
            }
            MethodSpec::Krls { lambda, sigma } | MethodSpec::Krr { lambda, sigma } => {
                if !(*lambda >= 0.0 && lambda.is_finite()) {
                    return Err(param("lambda", "must be non-negative"));
                }
                kaf_width_ok(sigma)
            }
        }
    }

    /// Fits this method on `train`.
    pub fn fit(&self, train: &Dataset) -> Result<AnyModel> {
        match self {
            MethodSpec::Fwf {
                sigma_input,
                sigma_weight,
                alpha,
                k_neighbors,
                ridge,
            } => {
                let cfg = FwfConfig {
                    order: train.order(),
                    horizon: train.horizon(),
                    sigma_input: *sigma_input,
                    sigma_weight: *sigma_weight,
                    alpha: *alpha,
                    k_neighbors: *k_neighbors,
                    ridge: *ridge,
                };
                Ok(AnyModel::Fwf(fwf::fit(train, &cfg)?))
            }
            MethodSpec::Wiener { ridge } => Ok(AnyModel::Wiener(wiener_fit(train, *ridge)?)),
            MethodSpec::Klms { eta, sigma } => Ok(AnyModel::Kaf(klms_fit(
                train,
                *eta,
                kaf_width(sigma, train)?,
            )?)),
            MethodSpec::Krls { lambda, sigma } => Ok(AnyModel::Kaf(krls_fit(
                train,
                *lambda,
                kaf_width(sigma, train)?,
            )?)),
            MethodSpec::Krr { lambda, sigma } => Ok(AnyModel::Kaf(krr_fit(
                train,
                *lambda,
                kaf_width(sigma, train)?,
            )?)),
        }
    }
}

fn kaf_width_ok(w: &WidthSetting) -> Result<()> {
    if *w == WidthSetting::Auto {
        return Err(param("sigma", "\"auto\" is only supported by fwf"));
    }
    Ok(())
}

fn kaf_width(w: &WidthSetting, train: &Dataset) -> Result<KernelWidth> {
    match w {
        WidthSetting::Fixed(w) => Ok(*w),
        WidthSetting::Rule => {
            let x: Vec<f64> = train.windows().iter_rows().map(|r| r[0]).collect();
            silverman_sigma(&x)
        }
        WidthSetting::Auto => Err(param("sigma", "\"auto\" is only supported by fwf")),
    }
}

fn default_order() -> usize {
    10
}

fn default_horizon() -> usize {
    1
}

fn default_sizes() -> Vec<usize> {
    vec![500, 1000, 1500, 2000]
}

fn default_folds() -> usize {
    5
}

fn default_test_size() -> usize {
    200
}

fn default_methods() -> Vec<MethodSpec> {
    vec![
        MethodSpec::fwf_default(),
        MethodSpec::Wiener { ridge: None },
        MethodSpec::Klms {
            eta: default_eta(),
            sigma: WidthSetting::Rule,
        },
        MethodSpec::Krls {
            lambda: default_lambda(),
            sigma: WidthSetting::Rule,
        },
    ]
}

/// Settings for [`timing_scaling`] runs launched by the bench command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    pub sizes: Vec<usize>,
    pub methods: Vec<MethodSpec>,
    pub fit_reps: usize,
    pub predict_reps: usize,
    pub queries: usize,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            sizes: vec![1000, 4000, 16000],
            methods: vec![MethodSpec::Fwf {
                sigma_input: WidthSetting::Rule,
                sigma_weight: None,
                alpha: AlphaSetting::Fixed(0.445),
                k_neighbors: 2,
                ridge: None,
            }],
            fit_reps: 5,
            predict_reps: 5,
            queries: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: SignalSpec,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_sizes")]
    pub train_sizes: Vec<usize>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub seed: u64,
    /// optional timing scan run by the bench command
    #[serde(default)]
    pub timing: Option<TimingConfig>,
}

impl ExperimentConfig {
    pub fn new(dataset: SignalSpec) -> Self {
        ExperimentConfig {
            dataset,
            order: default_order(),
            horizon: default_horizon(),
            train_sizes: default_sizes(),
            folds: default_folds(),
            test_size: default_test_size(),
            methods: default_methods(),
            seed: 0,
            timing: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        if self.order == 0 {
            return Err(param("order", "must be at least 1"));
        }
        if self.train_sizes.is_empty() || self.train_sizes.contains(&0) {
            return Err(param(
                "train_sizes",
                "must be a non-empty list of positive sizes",
            ));
        }
        if self.train_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(param("train_sizes", "must be strictly ascending"));
        }
        if self.folds < 2 {
            return Err(param("folds", "must be at least 2"));
        }
        if self.test_size == 0 {
            return Err(param("test_size", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(param("methods", "must list at least one method"));
        }
        for m in &self.methods {
            m.validate()?;
        }
        if let Some(t) = &self.timing {
            if t.sizes.len() < 3 || t.sizes.windows(2).any(|w| w[0] >= w[1]) {
                return Err(param(
                    "timing.sizes",
                    "needs at least three ascending sizes",
                ));
            }
            if t.fit_reps == 0 || t.predict_reps == 0 || t.queries == 0 {
                return Err(param(
                    "timing",
                    "repetition and query counts must be positive",
                ));
            }
            for m in &t.methods {
                m.validate()?;
            }
        }
        Ok(())
    }

    /// Gap between a test block and the training rows around it.
    pub fn gap(&self) -> usize {
        self.order + self.horizon
    }

    /// Dataset rows needed so every fold has `max(train_sizes)` training rows.
    pub fn rows_needed(&self) -> usize {
        let max_n = *self.train_sizes.last().expect("validated");
        (self.folds * self.test_size).max(max_n + self.test_size + 2 * self.gap())
    }

    /// Builds the embedded dataset the experiment runs on.
    pub fn dataset(&self) -> Result<Dataset> {
        let len = self.rows_needed() + self.order - 1 + self.horizon;
        let (x, z) = self.dataset.generate(len, self.seed)?;
        embed_pair(&x, &z, self.order, self.horizon)
    }
}

/// One cross-validation fold.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    /// chronological training rows
    pub train: Vec<usize>,
    pub test: Range<usize>,
}

/// Blocked K-fold for time series: fold `f` tests on a contiguous block
/// starting at `floor(f * len / folds)`; its training rows are all rows at
/// least `gap` away from that block.
pub fn kfold(len: usize, folds: usize, test_size: usize, gap: usize) -> Result<Vec<Split>> {
    if folds < 2 {
        return Err(param("folds", "must be at least 2"));
    }
    if test_size == 0 {
        return Err(param("test_size", "must be at least 1"));
    }
    if len < folds * test_size {
        return Err(param(
            "test_size",
            format!("{folds} blocks of {test_size} do not fit in {len} rows"),
        ));
    }
    Ok((0..folds)
        .map(|f| {
            let start = f * len / folds;
            let test = start..start + test_size;
            let lo = start.saturating_sub(gap);
            let hi = test.end + gap;
            let train = (0..len).filter(|&i| i < lo || i >= hi).collect();
            Split { train, test }
        })
        .collect())
}

pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(FwfError::Alignment {
            left: pred.len(),
            right: target.len(),
        });
    }
    if pred.is_empty() {
        return Err(FwfError::Dimension("mse of zero samples".into()));
    }
    Ok(pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / pred.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub method: String,
    pub n_train: usize,
    pub fold: usize,
    /// `None` when the method failed on this cell
    pub mse: Option<f64>,
    pub fit_seconds: f64,
    pub predict_us_per_query: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// Per-(method, N) aggregate over successful folds. `std` is the
/// population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub method: String,
    pub n_train: usize,
    pub folds_ok: usize,
    pub folds_failed: usize,
    pub mean_mse: Option<f64>,
    pub std_mse: Option<f64>,
}

pub const CSV_HEADER: &str = "method,n_train,fold,mse,fit_seconds,predict_us_per_query";

impl ResultTable {
    /// CSV with header [`CSV_HEADER`]; failed cells leave the numeric
    /// fields empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            match r.mse {
                Some(m) => writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    r.method,
                    r.n_train,
                    r.fold,
                    fmt_f64(m),
                    fmt_f64(r.fit_seconds),
                    fmt_f64(r.predict_us_per_query)
                )?,
                None => writeln!(w, "{},{},{},,,", r.method, r.n_train, r.fold)?,
            }
        }
        Ok(())
    }

    pub fn aggregate(&self) -> Vec<Aggregate> {
        let mut groups: BTreeMap<(usize, usize), (String, Vec<f64>, usize)> = BTreeMap::new();
        let mut order: Vec<String> = Vec::new();
        for r in &self.rows {
            let mi = match order.iter().position(|m| *m == r.method) {
                Some(i) => i,
                None => {
                    order.push(r.method.clone());
                    order.len() - 1
                }
            };
            let e = groups
                .entry((mi, r.n_train))
                .or_insert_with(|| (r.method.clone(), Vec::new(), 0));
            match r.mse {
                Some(m) if r.error.is_none() => e.1.push(m),
                _ => e.2 += 1,
            }
        }
        groups
            .into_iter()
            .map(|((_, n), (method, v, failed))| {
                let (mean, std) = if v.is_empty() {
                    (None, None)
                } else {
                    let k = v.len() as f64;
                    let mean = v.iter().sum::<f64>() / k;
                    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k;
                    (Some(mean), Some(var.sqrt()))
                };
                Aggregate {
                    method,
                    n_train: n,
                    folds_ok: v.len(),
                    folds_failed: failed,
                    mean_mse: mean,
                    std_mse: std,
                }
            })
            .collect()
    }

    /// MSE values of one (method, N), by fold.
    pub fn mse_by_fold(&self, method: &str, n_train: usize) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .filter(|r| r.method == method && r.n_train == n_train)
            .map(|r| r.mse)
            .collect()
    }
}

fn evaluate_cell(method: &MethodSpec, data: &Dataset, split: &Split, n: usize) -> ResultRow {
    let mut row = ResultRow {
        method: method.name().to_string(),
        n_train: n,
        fold: 0,
        mse: None,
        fit_seconds: 0.0,
        predict_us_per_query: 0.0,
        error: None,
    };
    let outcome = (|| -> Result<(f64, f64, f64)> {
        if split.train.len() < n {
            return Err(param(
                "train_sizes",
                format!("fold has only {} training rows", split.train.len()),
            ));
        }
        let train_idx = &split.train[..n];
        if train_idx.iter().any(|i| split.test.contains(i)) {
            return Err(FwfError::Degenerate(
                "training rows overlap the test block".into(),
            ));
        }
        let train = data.select(train_idx);
        let test = data.slice(split.test.clone());
        let t0 = Instant::now();
        let model = method.fit(&train)?;
        let fit_s = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let pred: Vec<f64> = (0..test.len())
            .map(|i| model.predict(test.window(i)))
            .collect::<Result<_>>()?;
        let pred_us = t1.elapsed().as_secs_f64() * 1e6 / test.len() as f64;
        let m = mse(&pred, test.targets())?;
        if !m.is_finite() {
            return Err(FwfError::Degenerate(format!("non-finite test MSE {m}")));
        }
        Ok((m, fit_s, pred_us))
    })();
    match outcome {
        Ok((m, f, p)) => {
            row.mse = Some(m);
            row.fit_seconds = f;
            row.predict_us_per_query = p;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs every (method, N, fold) cell. Cells run in parallel on the current
/// rayon pool; rows come back ordered by method, N, fold. A failing cell is
/// recorded as an error row.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let data = cfg.dataset()?;
    let splits = kfold(data.len(), cfg.folds, cfg.test_size, cfg.gap())?;
    let mut cells = Vec::new();
    for (mi, _) in cfg.methods.iter().enumerate() {
        for &n in &cfg.train_sizes {
            for f in 0..cfg.folds {
                cells.push((mi, n, f));
            }
        }
    }
    let rows = cells
        .par_iter()
        .map(|&(mi, n, f)| {
            let mut r = evaluate_cell(&cfg.methods[mi], &data, &splits[f], n);
            r.fold = f;
            r
        })
        .collect();
    Ok(ResultTable { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingPoint {
    pub n_train: usize,
    pub fit_seconds: f64,
    pub predict_us_per_query: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingTable {
    pub method: String,
    pub points: Vec<TimingPoint>,
    /// log-log least-squares slope of fit time against N
    pub fit_slope: f64,
    /// log-log least-squares slope of per-query predict time against N
    pub predict_slope: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(1e-300).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Wall-clock scan of fit time and per-query predict time over training
/// sizes. Each size trains on the first N rows; the `queries` rows after
/// the largest training block are the query set. Timings are medians over
/// the repetitions, measured inside a single-thread pool.
#[allow(clippy::too_many_arguments)]
pub fn timing_scaling(
    method: &MethodSpec,
    signal: &SignalSpec,
    order: usize,
    horizon: usize,
    sizes: &[usize],
    fit_reps: usize,
    predict_reps: usize,
    queries: usize,
) -> Result<TimingTable> {
    method.validate()?;
    if sizes.len() < 3 || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(param(
            "sizes",
            "needs at least three ascending positive sizes",
        ));
    }
    if fit_reps == 0 || predict_reps == 0 || queries == 0 {
        return Err(param("reps", "repetitions and queries must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| FwfError::Degenerate(format!("timing pool: {e}")))?;
    pool.install(|| {
        scan(
            method,
            signal,
            order,
            horizon,
            sizes,
            fit_reps,
            predict_reps,
            queries,
        )
    })
}

#[allow(clippy::too_many_arguments)]
fn scan(
    method: &MethodSpec,
    signal: &SignalSpec,
    order: usize,
    horizon: usize,
    sizes: &[usize],
    fit_reps: usize,
    predict_reps: usize,
    queries: usize,
) -> Result<TimingTable> {
    let max_n = *sizes.last().expect("non-empty");
    let rows = max_n + order + horizon + queries;
    let (x, z) = signal.generate(rows + order - 1 + horizon, 0)?;
    let data = embed_pair(&x, &z, order, horizon)?;
    let query = data.slice(rows - queries..rows);
    let mut points = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let train = data.slice(0..n);
        let mut fit_times = Vec::with_capacity(fit_reps);
        let mut model = None;
        for _ in 0..fit_reps {
            let t = Instant::now();
            let m = method.fit(&train)?;
            fit_times.push(t.elapsed().as_secs_f64());
            model = Some(m);
        }
        let model = model.expect("fit_reps > 0");
        let mut pred_times = Vec::with_capacity(predict_reps);
        let mut sink = 0.0;
        for _ in 0..predict_reps {
            let t = Instant::now();
            for i in 0..query.len() {
                sink += model.predict(query.window(i))?;
            }
            pred_times.push(t.elapsed().as_secs_f64() * 1e6 / query.len() as f64);
        }
        std::hint::black_box(sink);
        points.push(TimingPoint {
            n_train: n,
            fit_seconds: median(fit_times),
            predict_us_per_query: median(pred_times),
        });
    }
    let ns: Vec<f64> = points.iter().map(|p| p.n_train as f64).collect();
    let fit: Vec<f64> = points.iter().map(|p| p.fit_seconds).collect();
    let pred: Vec<f64> = points.iter().map(|p| p.predict_us_per_query).collect();
    Ok(TimingTable {
        method: method.name().to_string(),
        fit_slope: loglog_slope(&ns, &fit),
        predict_slope: loglog_slope(&ns, &pred),
        points,
    })
}
