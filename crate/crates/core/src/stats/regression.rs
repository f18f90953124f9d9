//! OLS and logistic fits with classical inference.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::dist::{normal_two_sided, t_two_sided};
use super::linalg::{Collinear, Qr};
use crate::{Error, Result};

/// Name and display label of a design column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMeta {
    pub name: String,
    pub label: String,
    /// The column is one level of a categorical variable.
    pub level: bool,
}

impl ColumnMeta {
    pub fn new(name: impl Into<String>, label: impl Into<String>, level: bool) -> Self {
        Self { name: name.into(), label: label.into(), level }
    }

    pub fn intercept() -> Self {
        Self::new("intercept", "Intercept", false)
    }
}

/// Row-major design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub columns: Vec<ColumnMeta>,
    pub rows: Vec<Vec<f64>>,
}

impl Design {
    pub fn new(columns: Vec<ColumnMeta>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(Error::InvalidInput(format!("row has {} values for {} columns", r.len(), columns.len())));
        }
        Ok(Self { columns, rows })
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    fn column_major(&self) -> Vec<Vec<f64>> {
        (0..self.ncols()).map(|j| self.column(j)).collect()
    }

    fn factorize(&self, cols: Vec<Vec<f64>>) -> Result<Qr> {
        Qr::new(cols, self.nrows()).map_err(|c| self.collinear(c))
    }

    fn collinear(&self, c: Collinear) -> Error {
        Error::RankDeficient {
            column: self.columns[c.column].name.clone(),
            with: c.with.iter().map(|&i| self.columns[i].name.clone()).collect(),
        }
    }

    /// Fails with [`Error::RankDeficient`] when the columns are not
    /// linearly independent.
    pub fn check_rank(&self) -> Result<()> {
        if self.nrows() <= self.ncols() {
            return Err(Error::TooFewSamples { samples: self.nrows(), columns: self.ncols() });
        }
        self.factorize(self.column_major()).map(|_| ())
    }

    /// Removes 0/1 indicator columns that are constant over the rows (an
    /// unobserved level, or a flag nobody has). Returns the removed names.
    pub fn drop_constant_indicators(&mut self, is_indicator: impl Fn(&ColumnMeta) -> bool) -> Vec<String> {
        let keep: Vec<bool> = (0..self.ncols())
            .map(|j| {
                if !is_indicator(&self.columns[j]) {
                    return true;
                }
                let first = self.rows.first().map_or(0.0, |r| r[j]);
                self.rows.iter().any(|r| r[j] != first)
            })
            .collect();
        let dropped = self.columns.iter().zip(&keep).filter(|(_, &k)| !k).map(|(c, _)| c.name.clone()).collect();
        let mut it = keep.iter();
        self.columns.retain(|_| *it.next().unwrap());
        for row in &mut self.rows {
            let mut it = keep.iter();
            row.retain(|_| *it.next().unwrap());
        }
        dropped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Ols,
    Logistic,
}

/// Coefficients with standard errors, t/z statistics and two-sided p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub model: Model,
    pub columns: Vec<ColumnMeta>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub statistics: Vec<f64>,
    pub p_values: Vec<f64>,
    pub n_samples: usize,
    pub r_squared: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub iterations: usize,
}

impl RegressionFit {
    pub fn significance_mask(&self, alpha: f64) -> Vec<bool> {
        self.p_values.iter().map(|&p| p <= alpha).collect()
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.columns.iter().position(|c| c.name == name).map(|i| self.coefficients[i])
    }

    pub fn p_value(&self, name: &str) -> Option<f64> {
        self.columns.iter().position(|c| c.name == name).map(|i| self.p_values[i])
    }
}

/// Ordinary least squares through a Householder QR of the design.
///
/// Standard errors are `sqrt(s^2 diag((X^T X)^{-1}))` with
/// `s^2 = RSS / (n - k)`; p-values come from the t distribution with
/// `n - k` degrees of freedom. `r_squared` is centered when the design has a
/// column named `intercept`.
pub fn ols_fit(design: &Design, y: &[f64]) -> Result<RegressionFit> {
    let (n, k) = (design.nrows(), design.ncols());
    if y.len() != n {
        return Err(Error::InvalidInput(format!("response has {} values for {} rows", y.len(), n)));
    }
    if n <= k {
        return Err(Error::TooFewSamples { samples: n, columns: k });
    }
    let qr = design.factorize(design.column_major())?;
    let beta = qr.solve(y);
    let resid: Vec<f64> = design
        .rows
        .iter()
        .zip(y)
        .map(|(row, &yi)| yi - row.iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>())
        .collect();
    let rss: f64 = resid.iter().map(|r| r * r).sum();
    let dof = (n - k) as f64;
    let s2 = rss / dof;
    let std_errors: Vec<f64> = qr.inverse_gram_diag().iter().map(|d| libm::sqrt(s2 * d)).collect();
    let statistics: Vec<f64> = beta.iter().zip(&std_errors).map(|(&b, &se)| ratio(b, se)).collect();
    let p_values = statistics.iter().map(|&t| t_two_sided(t, dof)).collect();

    let centered = design.columns.iter().any(|c| c.name == "intercept");
    let mean = if centered { y.iter().sum::<f64>() / n as f64 } else { 0.0 };
    let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r_squared = if tss > 0.0 { Some(1.0 - rss / tss) } else { None };

    Ok(RegressionFit {
        model: Model::Ols,
        columns: design.columns.clone(),
        coefficients: beta,
        std_errors,
        statistics,
        p_values,
        n_samples: n,
        r_squared,
        log_likelihood: None,
        iterations: 1,
    })
}

fn ratio(b: f64, se: f64) -> f64 {
    if se > 0.0 {
        b / se
    } else if b == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(b)
    }
}

/// Convergence threshold on the score (gradient) norm.
pub const LOGISTIC_GRADIENT_TOL: f64 = 1e-8;
const LOGISTIC_MAX_ITER: usize = 100;
/// Linear predictors this large mean fitted probabilities of exactly 0 or 1.
const SEPARATION_ETA: f64 = 12.0;

fn log1p_exp(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + libm::log1p(libm::exp(-eta))
    } else {
        libm::log1p(libm::exp(eta))
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + libm::exp(-eta))
    } else {
        let e = libm::exp(eta);
        e / (1.0 + e)
    }
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Log-likelihood drop treated as rounding noise when accepting a step.
pub const LOGLIK_SLACK: f64 = 1e-12;

struct LogitState {
    eta: Vec<f64>,
    loglik: f64,
}

fn logit_state(design: &Design, y: &[f64], beta: &[f64]) -> LogitState {
    let eta: Vec<f64> = design.rows.iter().map(|r| r.iter().zip(beta).map(|(x, b)| x * b).sum()).collect();
    let loglik = neumaier_sum(eta.iter().zip(y).map(|(&e, &yi)| yi * e - log1p_exp(e)));
    LogitState { eta, loglik }
}

/// Logistic regression by iteratively reweighted least squares.
///
/// Each Newton step solves a weighted least-squares problem by QR and is
/// halved until the log-likelihood does not decrease (beyond
/// [`LOGLIK_SLACK`] relative rounding). Iteration stops when
/// the score norm falls below [`LOGISTIC_GRADIENT_TOL`]. Diverging
/// coefficients with fitted probabilities pinned at 0 or 1 are reported as
/// [`Error::Separation`]. Standard errors come from the inverse Fisher
/// information; p-values are two-sided Wald tests.
pub fn logistic_fit(design: &Design, y: &[f64]) -> Result<RegressionFit> {
    logistic_fit_traced(design, y).map(|(fit, _)| fit)
}

/// Like [`logistic_fit`], also returning the log-likelihood after each iteration.
pub fn logistic_fit_traced(design: &Design, y: &[f64]) -> Result<(RegressionFit, Vec<f64>)> {
    let (n, k) = (design.nrows(), design.ncols());
    if y.len() != n {
        return Err(Error::InvalidInput(format!("response has {} values for {} rows", y.len(), n)));
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidInput("logistic response must be 0 or 1".into()));
    }
    let positives = y.iter().filter(|&&v| v == 1.0).count();
    if positives == 0 || positives == n {
        return Err(Error::SingleClass);
    }
    if n <= k {
        return Err(Error::TooFewSamples { samples: n, columns: k });
    }
    design.check_rank()?;

    let mut beta = vec![0.0; k];
    let mut state = logit_state(design, y, &beta);
    let mut history = vec![state.loglik];
    let mut iterations = 0;
    loop {
        let p: Vec<f64> = state.eta.iter().map(|&e| sigmoid(e)).collect();
        let grad: Vec<f64> = (0..k)
            .map(|j| design.rows.iter().zip(&p).zip(y).map(|((r, pi), yi)| r[j] * (yi - pi)).sum())
            .collect();
        let gnorm = libm::sqrt(grad.iter().map(|g| g * g).sum::<f64>());
        // the score also vanishes along a separating direction, so check this first
        if state.eta.iter().any(|e| e.abs() > SEPARATION_ETA) && diverging(&beta) {
            return Err(separation(design, &beta));
        }
        if gnorm < LOGISTIC_GRADIENT_TOL {
            break;
        }
        if iterations >= LOGISTIC_MAX_ITER {
            return Err(Error::NoConvergence { iterations, residual: gnorm });
        }
        iterations += 1;

        // Newton step: weighted least squares of (y - p) / w on X with weights w
        let w: Vec<f64> = p.iter().map(|&pi| (pi * (1.0 - pi)).max(1e-300)).collect();
        let sw: Vec<f64> = w.iter().map(|&v| libm::sqrt(v)).collect();
        let cols: Vec<Vec<f64>> = (0..k).map(|j| design.rows.iter().zip(&sw).map(|(r, s)| r[j] * s).collect()).collect();
        let qr = match Qr::new(cols, n) {
            Ok(qr) => qr,
            Err(_) => return Err(separation(design, &beta)),
        };
        let rhs: Vec<f64> = (0..n).map(|i| (y[i] - p[i]) / sw[i]).collect();
        let step = qr.solve(&rhs);

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + scale * s).collect();
            let st = logit_state(design, y, &trial);
            if st.loglik >= state.loglik - LOGLIK_SLACK * (1.0 + state.loglik.abs()) {
                accepted = Some((trial, st));
                break;
            }
            scale *= 0.5;
        }
        match accepted {
            Some((b, st)) => {
                beta = b;
                state = st;
                history.push(state.loglik);
            }
            None => return Err(Error::NoConvergence { iterations, residual: gnorm }),
        }
    }

    let p: Vec<f64> = state.eta.iter().map(|&e| sigmoid(e)).collect();
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|j| design.rows.iter().zip(&p).map(|(r, &pi)| r[j] * libm::sqrt(pi * (1.0 - pi))).collect())
        .collect();
    let qr = Qr::new(cols, n).map_err(|_| separation(design, &beta))?;
    let std_errors: Vec<f64> = qr.inverse_gram_diag().iter().map(|&d| libm::sqrt(d)).collect();
    let statistics: Vec<f64> = beta.iter().zip(&std_errors).map(|(&b, &se)| ratio(b, se)).collect();
    let p_values = statistics.iter().map(|&z| normal_two_sided(z)).collect();
    Ok((
        RegressionFit {
            model: Model::Logistic,
            columns: design.columns.clone(),
            coefficients: beta,
            std_errors,
            statistics,
            p_values,
            n_samples: n,
            r_squared: None,
            log_likelihood: Some(state.loglik),
            iterations,
        },
        history,
    ))
}

fn diverging(beta: &[f64]) -> bool {
    beta.iter().any(|b| b.abs() > 10.0)
}

fn separation(design: &Design, beta: &[f64]) -> Error {
    let j = (0..beta.len())
        .filter(|&j| design.columns[j].name != "intercept")
        .max_by(|&a, &b| beta[a].abs().total_cmp(&beta[b].abs()))
        .unwrap_or(0);
    Error::Separation { column: design.columns[j].name.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_design(xs: &[f64]) -> Design {
        Design::new(
            vec![ColumnMeta::intercept(), ColumnMeta::new("x", "x", false)],
            xs.iter().map(|&x| vec![1.0, x]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = ols_fit(&line_design(&xs), &y).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.std_errors.iter().all(|&s| s < 1e-6));
        assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_column_collides_with_intercept() {
        let d = Design::new(
            vec![ColumnMeta::intercept(), ColumnMeta::new("x", "x", false), ColumnMeta::new("c", "c", false)],
            (0..6).map(|i| vec![1.0, i as f64, 3.0]).collect(),
        )
        .unwrap();
        match ols_fit(&d, &[1.0, 2.0, 0.0, 4.0, 3.0, 1.0]) {
            Err(Error::RankDeficient { column, with }) => {
                assert_eq!(column, "c");
                assert_eq!(with, vec!["intercept"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_few_samples() {
        let d = line_design(&[0.0, 1.0]);
        assert!(matches!(ols_fit(&d, &[0.0, 1.0]), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn logistic_single_class_and_separation() {
        let xs = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];
        let d = line_design(&xs);
        assert_eq!(logistic_fit(&d, &[1.0; 6]), Err(Error::SingleClass));
        let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        match logistic_fit(&d, &y) {
            Err(Error::Separation { column }) => assert_eq!(column, "x"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn logistic_overlapping_classes_converge() {
        let xs = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 0.5];
        let y = [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
        let (fit, hist) = logistic_fit_traced(&line_design(&xs), &y).unwrap();
        assert!(hist.windows(2).all(|w| w[1] >= w[0]));
        assert!(fit.coefficients[1] > 0.0);
        assert!(fit.p_values.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn drops_constant_indicators_only() {
        let mut d = Design::new(
            vec![ColumnMeta::intercept(), ColumnMeta::new("a", "a", true), ColumnMeta::new("b", "b", true)],
            vec![vec![1.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]],
        )
        .unwrap();
        let dropped = d.drop_constant_indicators(|c| c.level);
        assert_eq!(dropped, vec!["a"]);
        assert_eq!(d.rows, vec![vec![1.0, 1.0], vec![1.0, 0.0]]);
    }
}
