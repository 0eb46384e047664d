use std::io::{BufRead, BufReader, Read, Write};

use super::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Ridge regression of `response` on `features` plus an intercept.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub features: Vec<String>,
    pub response: String,
    pub lambda: f64,
    /// Step size; defaults to `1 / (trace(M_FF) + lambda)`.
    pub alpha: Option<f64>,
    /// Stop once `‖g‖₂ ≤ tol · max(1, ‖M_Fy‖₂)`.
    pub tol: f64,
    pub max_iters: usize,
    /// Train on features centred and scaled using means and deviations read
    /// off the matrix, then map the weights back.
    pub standardise: bool,
}

impl ModelSpec {
    pub fn new<S: AsRef<str>>(features: &[S], response: &str) -> Self {
        ModelSpec {
            features: features.iter().map(|f| f.as_ref().to_string()).collect(),
            response: response.to_string(),
            lambda: 0.0,
            alpha: None,
            tol: 1e-10,
            max_iters: 100_000,
            standardise: false,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    fn check(&self) -> Result<()> {
        if self.features.contains(&self.response) {
            return Err(Error::Config(format!("response `{}` is also a feature", self.response)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be finite and non-negative, got {}", self.lambda)));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("alpha must be positive, got {a}")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// A trained model: `theta[0]` is the intercept, `theta[i]` the weight of
/// `features[i - 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    pub features: Vec<String>,
    pub response: String,
    pub theta: Vec<f64>,
    /// Gradient evaluations performed.
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    pub lambda: f64,
    pub alpha: f64,
}

impl LinearModel {
    pub fn weight(&self, feature: &str) -> Option<f64> {
        self.features.iter().position(|f| f == feature).map(|i| self.theta[i + 1])
    }

    pub fn intercept(&self) -> f64 {
        self.theta[0]
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.theta[0] + self.theta[1..].iter().zip(x).map(|(t, v)| t * v).sum::<f64>()
    }

    /// Text format: `key,value` metadata lines and one
    /// `weight,feature,value` line per weight.
    pub fn write(&self, mut out: impl Write) -> Result<()> {
        let io = |e| Error::io("<model>", e);
        writeln!(out, "response,{}", self.response).map_err(io)?;
        writeln!(out, "lambda,{}", self.lambda).map_err(io)?;
        writeln!(out, "alpha,{}", self.alpha).map_err(io)?;
        writeln!(out, "iterations,{}", self.iterations).map_err(io)?;
        writeln!(out, "gradient_norm,{}", self.gradient_norm).map_err(io)?;
        writeln!(out, "converged,{}", self.converged).map_err(io)?;
        writeln!(out, "weight,intercept,{}", self.theta[0]).map_err(io)?;
        for (f, t) in self.features.iter().zip(&self.theta[1..]) {
            writeln!(out, "weight,{f},{t}").map_err(io)?;
        }
        Ok(())
    }

    pub fn read(input: impl Read) -> Result<LinearModel> {
        let mut m = LinearModel {
            features: Vec::new(),
            response: String::new(),
            theta: vec![0.0],
            iterations: 0,
            gradient_norm: 0.0,
            converged: false,
            lambda: 0.0,
            alpha: 0.0,
        };
        for (i, line) in BufReader::new(input).lines().enumerate() {
            let line = line.map_err(|e| Error::io("<model>", e))?;
            let bad = |what: &str| Error::Parse {
                path: "<model>".into(),
                row: i + 1,
                column: 1,
                message: what.to_string(),
            };
            let fields: Vec<&str> = line.trim().split(',').collect();
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad("expected a number"));
            match fields.as_slice() {
                [""] => {}
                ["response", r] => m.response = r.to_string(),
                ["lambda", v] => m.lambda = num(v)?,
                ["alpha", v] => m.alpha = num(v)?,
                ["iterations", v] => m.iterations = v.parse().map_err(|_| bad("expected an integer"))?,
                ["gradient_norm", v] => m.gradient_norm = num(v)?,
                ["converged", v] => m.converged = *v == "true",
                ["weight", "intercept", v] => m.theta[0] = num(v)?,
                ["weight", f, v] => {
                    m.features.push(f.to_string());
                    m.theta.push(num(v)?);
                }
                _ => return Err(bad("unrecognised model line")),
            }
        }
        Ok(m)
    }
}

/// The pieces of the matrix the loss needs: `M_FF` (intercept first) and
/// `M_Fy`.
struct Normal {
    ff: Vec<Vec<f64>>,
    fy: Vec<f64>,
}

fn normal_equations<S: Scalar>(m: &CovarianceMatrix<S>, spec: &ModelSpec) -> Result<Normal> {
    let idx = |a: &str| m.index_of(a).ok_or_else(|| Error::UnknownAttribute(a.to_string()));
    let mut cols = vec![0];
    for f in &spec.features {
        cols.push(idx(f)?);
    }
    let y = idx(&spec.response)?;
    let ff = cols.iter().map(|&i| cols.iter().map(|&j| m.get(i, j).as_f64()).collect()).collect();
    let fy = cols.iter().map(|&i| m.get(i, y).as_f64()).collect();
    Ok(Normal { ff, fy })
}

fn grad(n: &Normal, lambda: f64, theta: &[f64]) -> Vec<f64> {
    n.ff
        .iter()
        .zip(&n.fy)
        .zip(theta)
        .map(|((row, fy), t)| row.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() - fy + lambda * t)
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `M_FF θ − M_Fy + λθ`, the gradient of the ridge least-squares loss.
pub fn gradient<S: Scalar>(m: &CovarianceMatrix<S>, spec: &ModelSpec, theta: &[f64]) -> Result<Vec<f64>> {
    let n = normal_equations(m, spec)?;
    if theta.len() != n.fy.len() {
        return Err(Error::Dimension {
            expected: n.fy.len(),
            got: theta.len(),
        });
    }
    Ok(grad(&n, spec.lambda, theta))
}

/// Gradient descent from zero.
pub fn train_linreg<S: Scalar>(m: &CovarianceMatrix<S>, spec: &ModelSpec) -> Result<LinearModel> {
    train_linreg_from(m, spec, None)
}

/// Gradient descent from `start` (matched to the spec's features by name;
/// missing features start at zero), e.g. a model trained before an update.
pub fn train_linreg_from<S: Scalar>(m: &CovarianceMatrix<S>, spec: &ModelSpec, start: Option<&LinearModel>) -> Result<LinearModel> {
    spec.check()?;
    let mut n = normal_equations(m, spec)?;
    let k = n.fy.len();
    let mut theta = vec![0.0; k];
    if let Some(s) = start {
        theta[0] = s.intercept();
        for (i, f) in spec.features.iter().enumerate() {
            theta[i + 1] = s.weight(f).unwrap_or(0.0);
        }
    }

    let scaling = spec.standardise.then(|| standardise(&mut n, &mut theta));

    let trace: f64 = (0..k).map(|i| n.ff[i][i]).sum::<f64>() + spec.lambda;
    let alpha = spec.alpha.unwrap_or(if trace > 0.0 { 1.0 / trace } else { 1.0 });
    let threshold = spec.tol * norm(&n.fy).max(1.0);

    let mut iterations = 0;
    let mut gnorm = f64::INFINITY;
    let mut converged = false;
    while iterations < spec.max_iters {
        iterations += 1;
        let g = grad(&n, spec.lambda, &theta);
        gnorm = norm(&g);
        if !gnorm.is_finite() || theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Diverged { iteration: iterations });
        }
        if gnorm <= threshold {
            converged = true;
            break;
        }
        for (t, gi) in theta.iter_mut().zip(&g) {
            *t -= alpha * gi;
        }
    }

    if let Some((mu, sigma)) = scaling {
        let mut shift = 0.0;
        for i in 1..k {
            theta[i] /= sigma[i];
            shift += theta[i] * mu[i];
        }
        theta[0] -= shift;
    }
    Ok(LinearModel {
        features: spec.features.clone(),
        response: spec.response.clone(),
        theta,
        iterations,
        gradient_norm: gnorm,
        converged,
        lambda: spec.lambda,
        alpha,
    })
}

/// Rewrites the normal equations for features `zᵢ = (xᵢ − μᵢ) / σᵢ` and maps
/// `theta` into those coordinates. Returns `(μ, σ)` (index 0 unused).
fn standardise(n: &mut Normal, theta: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
    let k = n.fy.len();
    let c = n.ff[0][0];
    let mut mu = vec![0.0; k];
    let mut sigma = vec![1.0; k];
    if c > 0.0 {
        for i in 1..k {
            mu[i] = n.ff[0][i] / c;
            let var = n.ff[i][i] / c - mu[i] * mu[i];
            if var > 0.0 {
                sigma[i] = var.sqrt();
            }
        }
    }
    let ff = n.ff.clone();
    let fy = n.fy.clone();
    for i in 0..k {
        for j in 0..k {
            let v = match (i, j) {
                (0, 0) => c,
                (0, j) | (j, 0) => (ff[0][j] - c * mu[j]) / sigma[j],
                (i, j) => (ff[i][j] - mu[i] * ff[0][j] - mu[j] * ff[0][i] + c * mu[i] * mu[j]) / (sigma[i] * sigma[j]),
            };
            n.ff[i][j] = v;
        }
    }
    for i in 1..k {
        n.fy[i] = (fy[i] - mu[i] * fy[0]) / sigma[i];
    }
    let shift: f64 = (1..k).map(|i| theta[i] * mu[i]).sum();
    theta[0] += shift;
    for i in 1..k {
        theta[i] *= sigma[i];
    }
    (mu, sigma)
}
