use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::anyhow;
use fwf_core::evalbench::{timing_scaling, TimingTable};
use fwf_core::fwf::{default_alpha_grid, default_sigma_scales};
use fwf_core::persist::{AnyModel, ModelFile};
use fwf_core::signal::moments;
use fwf_core::{
    embed_pair, fmt_f64, mse, run_experiment, tune as tune_search, Dataset, ExperimentConfig,
    FwfConfig, FwfError, KernelWidth, MethodSpec, Series, SignalSpec, WidthSetting,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// A failed command: configuration problems exit with 2, everything else
/// with 3.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(anyhow!(msg.into()))
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        Failure::Runtime(anyhow!(msg.into()))
    }

    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Runtime(e) => e,
        }
    }
}

trait Classify<T> {
    fn config_err(self, ctx: impl FnOnce() -> String) -> Result<T, Failure>;
    fn runtime_err(self, ctx: impl FnOnce() -> String) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config_err(self, ctx: impl FnOnce() -> String) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into().context(ctx())))
    }

    fn runtime_err(self, ctx: impl FnOnce() -> String) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into().context(ctx())))
    }
}

fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text =
        fs::read_to_string(path).config_err(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).config_err(|| format!("parsing config {}", path.display()))
}

fn read_series(path: &Path) -> Result<Series, Failure> {
    let f = File::open(path).runtime_err(|| format!("opening series {}", path.display()))?;
    Series::read_csv(BufReader::new(f)).runtime_err(|| format!("reading series {}", path.display()))
}

fn load_pair(series: &Path, desired: Option<&Path>) -> Result<(Series, Series), Failure> {
    let x = read_series(series)?;
    let z = match desired {
        Some(p) => read_series(p)?,
        None => x.clone(),
    };
    Ok((x, z))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .runtime_err(|| format!("creating {}", path.display()))
}

fn echo<T: Serialize>(cfg: &T) {
    println!(
        "config: {}",
        serde_json::to_string(cfg).expect("configs serialize")
    );
}

/// Fitting errors: bad hyperparameters are the caller's fault, everything
/// else (conditioning, degenerate data) is a runtime failure.
fn classify_fit(e: FwfError) -> Failure {
    match e {
        FwfError::Parameter { .. } => Failure::Config(e.into()),
        other => Failure::Runtime(anyhow::Error::from(other).context("fitting failed")),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub dataset: SignalSpec,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Sibling file holding the desired signal of a two-signal dataset.
pub fn desired_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.desired.csv"))
}

pub fn generate(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let mut cfg: GenerateConfig = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.dataset
        .validate()
        .config_err(|| "invalid dataset".into())?;
    if cfg.n == 0 {
        return Err(Failure::config("n must be at least 1"));
    }
    echo(&cfg);
    let (x, z) = cfg
        .dataset
        .generate(cfg.n, cfg.seed)
        .runtime_err(|| "generation failed".into())?;
    let mut w = create(out)?;
    x.write_csv(&mut w)
        .runtime_err(|| format!("writing {}", out.display()))?;
    w.flush()
        .runtime_err(|| format!("writing {}", out.display()))?;
    let (mean, std) = moments(x.values());
    println!(
        "wrote {} samples to {} (mean {}, std {})",
        x.len(),
        out.display(),
        fmt_f64(mean),
        fmt_f64(std)
    );
    if matches!(cfg.dataset, SignalSpec::Fir { .. }) {
        let dp = desired_path(out);
        let mut w = create(&dp)?;
        z.write_csv(&mut w)
            .runtime_err(|| format!("writing {}", dp.display()))?;
        w.flush()
            .runtime_err(|| format!("writing {}", dp.display()))?;
        println!("wrote desired signal to {}", dp.display());
    }
    Ok(())
}

fn default_order() -> usize {
    10
}

fn default_horizon() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub method: MethodSpec,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

fn embed_checked(x: &Series, z: &Series, order: usize, horizon: usize) -> Result<Dataset, Failure> {
    if order == 0 {
        return Err(Failure::config("order must be at least 1"));
    }
    embed_pair(x, z, order, horizon).runtime_err(|| "embedding the series".into())
}

fn predict_rows(model: &AnyModel, data: &Dataset) -> Result<Vec<f64>, Failure> {
    (0..data.len())
        .map(|i| model.predict(data.window(i)))
        .collect::<Result<_, _>>()
        .runtime_err(|| "prediction failed".into())
}

pub fn fit(
    config: &Path,
    series: &Path,
    desired: Option<&Path>,
    out: &Path,
) -> Result<(), Failure> {
    let cfg: FitConfig = load_config(config)?;
    cfg.method
        .validate()
        .config_err(|| "invalid method".into())?;
    if cfg.order == 0 {
        return Err(Failure::config("order must be at least 1"));
    }
    echo(&cfg);
    let (x, z) = load_pair(series, desired)?;
    let data = embed_checked(&x, &z, cfg.order, cfg.horizon)?;
    let t = Instant::now();
    let model = cfg.method.fit(&data).map_err(classify_fit)?;
    let secs = t.elapsed().as_secs_f64();
    let training_mse = match &model {
        AnyModel::Fwf(m) => m.training_mse(),
        other => mse(&predict_rows(other, &data)?, data.targets())
            .runtime_err(|| "training error".into())?,
    };
    let file = ModelFile {
        order: cfg.order,
        horizon: cfg.horizon,
        training_mse,
        model,
    };
    let mut w = create(out)?;
    file.write(&mut w)
        .runtime_err(|| format!("writing {}", out.display()))?;
    w.flush()
        .runtime_err(|| format!("writing {}", out.display()))?;
    match &file.model {
        AnyModel::Wiener(m) => {
            let ws: Vec<String> = m.weights.iter().map(|v| fmt_f64(*v)).collect();
            println!("weights: [{}]", ws.join(", "));
        }
        AnyModel::Fwf(m) => {
            let c = m.config();
            println!(
                "sigma_input {} alpha {} ridge {}",
                fmt_f64(c.sigma_input.get()),
                fmt_f64(c.alpha),
                fmt_f64(c.ridge)
            );
        }
        AnyModel::Kaf(m) => println!("{} centers", m.len()),
    }
    println!("training_mse {}", fmt_f64(training_mse));
    println!("fit_seconds {}", fmt_f64(secs));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn predict(
    model: &Path,
    series: &Path,
    desired: Option<&Path>,
    out: &Path,
    order: Option<usize>,
    start: Option<usize>,
    end: Option<usize>,
) -> Result<(), Failure> {
    let f = File::open(model).runtime_err(|| format!("opening model {}", model.display()))?;
    let file = ModelFile::read(BufReader::new(f))
        .runtime_err(|| format!("reading model {}", model.display()))?;
    if let Some(l) = order {
        if l != file.order {
            return Err(Failure::config(format!(
                "order mismatch: requested order {l}, model order {}",
                file.order
            )));
        }
    }
    let (x, z) = load_pair(series, desired)?;
    let data = embed_checked(&x, &z, file.order, file.horizon)?;
    let start = start.unwrap_or(0);
    let end = end.unwrap_or(data.len());
    if start >= end {
        return Err(Failure::config(format!(
            "empty prediction range {start}..{end}"
        )));
    }
    if end > data.len() {
        return Err(Failure::config(format!(
            "range end {end} exceeds the {} embedded rows",
            data.len()
        )));
    }
    let rows = data.slice(start..end);
    let pred = predict_rows(&file.model, &rows)?;
    let mut w = create(out)?;
    let io = |e: std::io::Error| {
        Failure::Runtime(anyhow::Error::from(e).context(format!("writing {}", out.display())))
    };
    writeln!(w, "index,prediction,target,squared_error").map_err(io)?;
    for (i, (p, t)) in pred.iter().zip(rows.targets()).enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            start + i,
            fmt_f64(*p),
            fmt_f64(*t),
            fmt_f64((p - t).powi(2))
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)?;
    let m = mse(&pred, rows.targets()).runtime_err(|| "computing mse".into())?;
    println!("predicted {} rows with {}", pred.len(), file.model.method());
    println!("mse {}", fmt_f64(m));
    Ok(())
}

pub fn bench(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let mut cfg: ExperimentConfig = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().config_err(|| "invalid experiment".into())?;
    fs::create_dir_all(out).runtime_err(|| format!("creating {}", out.display()))?;
    let cfg_path = out.join("config.json");
    fs::write(
        &cfg_path,
        serde_json::to_string_pretty(&cfg).expect("configs serialize"),
    )
    .runtime_err(|| format!("writing {}", cfg_path.display()))?;

    let table = run_experiment(&cfg).runtime_err(|| "experiment failed".into())?;
    let csv_path = out.join("results.csv");
    let mut w = create(&csv_path)?;
    table
        .write_csv(&mut w)
        .runtime_err(|| format!("writing {}", csv_path.display()))?;
    w.flush()
        .runtime_err(|| format!("writing {}", csv_path.display()))?;
    for r in table.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} N={} fold {}: {}",
            r.method,
            r.n_train,
            r.fold,
            r.error.as_deref().unwrap_or_default()
        );
    }

    let summary = table.aggregate();
    let sum_path = out.join("summary.json");
    fs::write(
        &sum_path,
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )
    .runtime_err(|| format!("writing {}", sum_path.display()))?;
    for a in &summary {
        println!(
            "{:<8} N={:<6} mean_mse {} std {} ({} ok, {} failed)",
            a.method,
            a.n_train,
            a.mean_mse.map(fmt_f64).unwrap_or_else(|| "-".into()),
            a.std_mse.map(fmt_f64).unwrap_or_else(|| "-".into()),
            a.folds_ok,
            a.folds_failed
        );
    }

    if let Some(t) = &cfg.timing {
        let mut tables: Vec<TimingTable> = Vec::new();
        for m in &t.methods {
            match timing_scaling(
                m,
                &cfg.dataset,
                cfg.order,
                cfg.horizon,
                &t.sizes,
                t.fit_reps,
                t.predict_reps,
                t.queries,
            ) {
                Ok(tt) => {
                    println!(
                        "timing {:<8} fit slope {} predict slope {}",
                        tt.method,
                        fmt_f64(tt.fit_slope),
                        fmt_f64(tt.predict_slope)
                    );
                    tables.push(tt);
                }
                Err(e) => eprintln!("warning: timing {} failed: {e}", m.name()),
            }
        }
        let tp = out.join("timing.json");
        fs::write(
            &tp,
            serde_json::to_string_pretty(&tables).expect("timing serializes"),
        )
        .runtime_err(|| format!("writing {}", tp.display()))?;
    }
    println!("wrote results to {}", out.display());
    Ok(())
}

fn default_k() -> usize {
    2
}

fn auto() -> WidthSetting {
    WidthSetting::Auto
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "auto")]
    pub sigma_input: WidthSetting,
    #[serde(default)]
    pub sigma_weight: Option<KernelWidth>,
    #[serde(default = "default_k")]
    pub k_neighbors: usize,
    #[serde(default)]
    pub ridge: Option<f64>,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    /// multiples of the rule width searched when `sigma_input` is "auto"
    #[serde(default = "default_sigma_scales")]
    pub sigma_scales: Vec<f64>,
}

pub fn tune(
    config: &Path,
    series: &Path,
    desired: Option<&Path>,
    out: &Path,
) -> Result<(), Failure> {
    let cfg: TuneConfig = load_config(config)?;
    let fcfg = FwfConfig {
        order: cfg.order,
        horizon: cfg.horizon,
        sigma_input: cfg.sigma_input,
        sigma_weight: cfg.sigma_weight,
        k_neighbors: cfg.k_neighbors,
        ridge: cfg.ridge,
        ..FwfConfig::default()
    };
    fcfg.validate()
        .config_err(|| "invalid tuning config".into())?;
    let bad = |v: &[f64]| v.is_empty() || v.iter().any(|a| !(*a > 0.0 && a.is_finite()));
    if bad(&cfg.alpha_grid) {
        return Err(Failure::config(
            "alpha_grid must be a non-empty list of positive values",
        ));
    }
    if bad(&cfg.sigma_scales) {
        return Err(Failure::config(
            "sigma_scales must be a non-empty list of positive values",
        ));
    }
    echo(&cfg);
    let (x, z) = load_pair(series, desired)?;
    let data = embed_checked(&x, &z, cfg.order, cfg.horizon)?;
    let t = Instant::now();
    let report =
        tune_search(&data, &fcfg, &cfg.alpha_grid, &cfg.sigma_scales).map_err(classify_fit)?;
    let mut w = create(out)?;
    serde_json::to_writer_pretty(&mut w, &report)
        .runtime_err(|| format!("writing {}", out.display()))?;
    w.flush()
        .runtime_err(|| format!("writing {}", out.display()))?;
    println!(
        "sigma_input {} alpha {} ridge {}",
        fmt_f64(report.sigma_input.get()),
        fmt_f64(report.alpha),
        fmt_f64(report.ridge)
    );
    println!("training_mse {}", fmt_f64(report.training_mse));
    println!("tune_seconds {}", fmt_f64(t.elapsed().as_secs_f64()));
    Ok(())
}
