//! Reference filters: the linear Wiener solution and kernel expansions
//! `f(x) = sum_i a_i G(c_i, x)` fitted by KLMS, KRLS and kernel ridge
//! regression.

use serde::{Deserialize, Serialize};

use crate::error::{FwfError, Result};
use crate::fwf::DEFAULT_RELATIVE_RIDGE;
use crate::kernel::{self, gaussian_vec, toeplitz, windowed, KernelWidth};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::signal::{Dataset, Series};

/// Linear FIR filter over lags `0..L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerModel {
    pub weights: Vec<f64>,
    pub ridge: f64,
}

fn default_ridge(r: &Matrix, ridge: Option<f64>) -> f64 {
    ridge.unwrap_or(DEFAULT_RELATIVE_RIDGE * r.trace() / r.rows() as f64)
}

/// Wiener solution `(R + ridge I) W = P` from an embedded dataset, with
/// `R` the window second-moment matrix (the least-squares normal
/// equations). A Toeplitz estimate from the lag profile of a smooth series
/// is often indefinite.
pub fn wiener_fit(data: &Dataset, ridge: Option<f64>) -> Result<WienerModel> {
    if data.is_empty() {
        return Err(FwfError::Dimension("no training rows".into()));
    }
    let r = windowed::second_moment(data.windows())?;
    let p = windowed::crosscovariance(data.windows(), data.targets())?;
    let ridge = default_ridge(&r, ridge);
    let weights = Cholesky::new(&r.with_ridge(ridge))?.solve(p.values())?;
    Ok(WienerModel { weights, ridge })
}

/// Wiener solution from aligned input/desired series (no prediction
/// horizon), using the lag estimators over the full series.
pub fn wiener_fit_series(
    input: &Series,
    desired: &Series,
    order: usize,
    ridge: Option<f64>,
) -> Result<WienerModel> {
    let r = toeplitz(&kernel::autocovariance(input, order)?);
    let p = kernel::crosscovariance(input, desired, order)?;
    let ridge = default_ridge(&r, ridge);
    let weights = Cholesky::new(&r.with_ridge(ridge))?.solve(p.values())?;
    Ok(WienerModel { weights, ridge })
}

impl WienerModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(FwfError::Dimension(format!(
                "window has {} lags, filter has {}",
                x.len(),
                self.weights.len()
            )));
        }
        Ok(dot(&self.weights, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KafVariant {
    Klms,
    Krls,
    Krr,
}

/// Kernel expansion over stored centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KafModel {
    pub centers: Matrix,
    pub coefficients: Vec<f64>,
    pub sigma: KernelWidth,
    pub variant: KafVariant,
}

impl KafModel {
    pub fn new(
        centers: Matrix,
        coefficients: Vec<f64>,
        sigma: KernelWidth,
        variant: KafVariant,
    ) -> Result<Self> {
        if centers.rows() != coefficients.len() {
            return Err(FwfError::Dimension(format!(
                "{} centers but {} coefficients",
                centers.rows(),
                coefficients.len()
            )));
        }
        Ok(KafModel {
            centers,
            coefficients,
            sigma,
            variant,
        })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `sum_i a_i G(c_i, x)`; an empty expansion predicts 0.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if !self.is_empty() && x.len() != self.centers.cols() {
            return Err(FwfError::Dimension(format!(
                "window has {} lags, centers have {}",
                x.len(),
                self.centers.cols()
            )));
        }
        Ok(expansion(
            &self.centers,
            &self.coefficients,
            self.coefficients.len(),
            x,
            self.sigma,
        ))
    }
}

fn expansion(centers: &Matrix, coef: &[f64], upto: usize, x: &[f64], w: KernelWidth) -> f64 {
    let mut s = 0.0;
    for (i, a) in coef.iter().enumerate().take(upto) {
        s += a * gaussian_vec(centers.row(i), x, w);
    }
    s
}

/// Kernel least-mean-squares: a single pass with `a_i = eta * e_i`, where
/// `e_i` is the a-priori error of the expansion built so far.
pub fn klms_fit(data: &Dataset, eta: f64, sigma: KernelWidth) -> Result<KafModel> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(crate::error::param(
            "eta",
            format!("must be non-negative, got {eta}"),
        ));
    }
    let mut coef = Vec::with_capacity(data.len());
    for (i, &z) in data.targets().iter().enumerate() {
        let prior = expansion(data.windows(), &coef, i, data.window(i), sigma);
        coef.push(eta * (z - prior));
    }
    KafModel::new(data.windows().clone(), coef, sigma, KafVariant::Klms)
}

/// Kernel recursive least squares without sparsification: maintains
/// `Q = (K + lambda I)^-1` and `a = Q z` through block-inverse updates, one
/// O(i^2) step per sample.
pub fn krls_fit(data: &Dataset, lambda: f64, sigma: KernelWidth) -> Result<KafModel> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(crate::error::param(
            "lambda",
            format!("must be non-negative, got {lambda}"),
        ));
    }
    let n = data.len();
    let centers = data.windows();
    // q holds the leading i x i block of the running inverse, stride n
    let mut q = vec![0.0; n * n];
    let mut coef: Vec<f64> = Vec::with_capacity(n);
    let mut k = vec![0.0; n];
    let mut h = vec![0.0; n];
    for i in 0..n {
        let x = data.window(i);
        for j in 0..i {
            k[j] = gaussian_vec(centers.row(j), x, sigma);
        }
        for r in 0..i {
            h[r] = dot(&q[r * n..r * n + i], &k[..i]);
        }
        let schur = 1.0 + lambda - dot(&k[..i], &h[..i]);
        if !(schur > 1e-13 * (1.0 + lambda)) {
            return Err(FwfError::Conditioning {
                pivot: schur,
                row: i,
            });
        }
        let err = data.targets()[i] - dot(&k[..i], &coef);
        for r in 0..i {
            let hr = h[r] / schur;
            let row = &mut q[r * n..r * n + i];
            for (c, v) in row.iter_mut().enumerate() {
                *v += hr * h[c];
            }
            q[r * n + i] = -hr;
            q[i * n + r] = -hr;
            coef[r] -= hr * err;
        }
        q[i * n + i] = 1.0 / schur;
        coef.push(err / schur);
    }
    KafModel::new(centers.clone(), coef, sigma, KafVariant::Krls)
}

/// Kernel ridge regression: `a = (K + lambda I)^-1 z` by a dense Cholesky
/// solve.
pub fn krr_fit(data: &Dataset, lambda: f64, sigma: KernelWidth) -> Result<KafModel> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(crate::error::param(
            "lambda",
            format!("must be non-negative, got {lambda}"),
        ));
    }
    let n = data.len();
    let c = data.windows();
    let mut gram = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = gaussian_vec(c.row(i), c.row(j), sigma);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let coef = Cholesky::new(&gram.with_ridge(lambda))?.solve(data.targets())?;
    KafModel::new(c.clone(), coef, sigma, KafVariant::Krr)
}
