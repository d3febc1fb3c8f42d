//! OLS core, piecewise and quadratic polarization regressions with fixed
//! effects, the loss-family trend oracle, and the functional-form classifier.
//!
//! Coefficients come from a column-pivoted QR solve; rank is decided at a
//! 1e-10 relative tolerance and rank deficiency is reported by naming the
//! offending columns. Standard errors are classical (homoskedastic).

use crate::loss::LossFamily;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Relative tolerance below which a design column counts as dependent.
const RANK_TOL: f64 = 1e-10;

/// Errors from regression fitting and classification.
#[derive(Debug, Error)]
pub enum RegressError {
    #[error("need more observations than parameters: n_obs={n}, params={k}")]
    TooFewObs { n: usize, k: usize },
    #[error("design is rank deficient; dependent columns: {0:?}")]
    RankDeficient(Vec<String>),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("the {side} side of the piecewise split at {threshold} is empty")]
    EmptySide { side: &'static str, threshold: f64 },
    #[error("need at least 3 distinct polarization values, got {0}")]
    TooFewDistinct(usize),
    #[error("voter {0} appears in only one race; within-voter variation is undefined")]
    InsufficientWithinVariation(u64),
    #[error("multi-dimensional concave trends require beta")]
    BetaRequired,
    #[error("beta {0} is invalid for {1} loss")]
    BadBeta(f64, LossFamily),
    #[error("classification needs >= 5 points over >= 3 distinct proxies, got {points} over {distinct}")]
    DegenerateInput { points: usize, distinct: usize },
    #[error("numerical failure: {0}")]
    Numerical(&'static str),
}

/// Which fixed effects a fit absorbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedEffects {
    None,
    Voter,
    Race,
}

/// A fitted regression. Every coefficient has a standard error under the
/// same name; `r_squared` is the within-unit fit when `fe_absorbed != None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub coefficients: BTreeMap<String, f64>,
    pub standard_errors: BTreeMap<String, f64>,
    pub r_squared: f64,
    pub n_obs: usize,
    pub fe_absorbed: FixedEffects,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> f64 {
        self.coefficients[name]
    }

    pub fn standard_error(&self, name: &str) -> f64 {
        self.standard_errors[name]
    }
}

/// Finds columns that add no direction beyond their predecessors, by modified
/// Gram-Schmidt with the 1e-10 relative drop tolerance.
fn dependent_columns(names: &[String], cols: &[Vec<f64>]) -> Vec<String> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut dependent = Vec::new();
    for (name, col) in names.iter().zip(cols) {
        let original = DVector::from_column_slice(col);
        let scale = original.norm();
        if scale == 0.0 {
            dependent.push(name.clone());
            continue;
        }
        let mut v = original;
        for q in &basis {
            let proj = q.dot(&v);
            v.axpy(-proj, q, 1.0);
        }
        if v.norm() <= RANK_TOL * scale {
            dependent.push(name.clone());
        } else {
            let norm = v.norm();
            basis.push(v / norm);
        }
    }
    dependent
}

/// Core least-squares fit with `absorbed` extra degrees of freedom already
/// spent (used by the fixed-effects path, where demeaning consumed one mean
/// per unit).
fn ols_core(
    y: &[f64],
    names: &[String],
    cols: &[Vec<f64>],
    absorbed: usize,
    fe: FixedEffects,
) -> Result<RegressionResult, RegressError> {
    let n = y.len();
    let k = cols.len();
    for col in cols {
        if col.len() != n {
            return Err(RegressError::LengthMismatch(col.len(), n));
        }
    }
    if n <= k + absorbed {
        return Err(RegressError::TooFewObs { n, k: k + absorbed });
    }
    let dependent = dependent_columns(names, cols);
    if !dependent.is_empty() {
        return Err(RegressError::RankDeficient(dependent));
    }

    let x = DMatrix::from_fn(n, k, |i, j| cols[j][i]);
    let yv = DVector::from_column_slice(y);
    // Least squares through the pivoted QR pieces: with X P = Q R the
    // minimizer is beta = P R^-1 Q^T y. (The decomposition's own solve only
    // accepts square systems.)
    let qr = x.clone().col_piv_qr();
    let mut beta = qr.q().transpose() * &yv;
    if !qr.r().solve_upper_triangular_mut(&mut beta) {
        return Err(RegressError::Numerical("QR back-substitution failed"));
    }
    qr.p().inv_permute_rows(&mut beta);

    let residuals = &yv - &x * &beta;
    let rss: f64 = residuals.norm_squared();
    let dof = (n - k - absorbed) as f64;
    let sigma2 = rss / dof;

    let xtx = x.transpose() * &x;
    let xtx_inv = xtx
        .try_inverse()
        .ok_or(RegressError::Numerical("normal matrix not invertible"))?;

    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r_squared = if sst <= f64::EPSILON * n as f64 * mean.abs().max(1.0) {
        0.0
    } else {
        (1.0 - rss / sst).clamp(0.0, 1.0)
    };

    let mut coefficients = BTreeMap::new();
    let mut standard_errors = BTreeMap::new();
    for (j, name) in names.iter().enumerate() {
        coefficients.insert(name.clone(), beta[j]);
        standard_errors.insert(name.clone(), (sigma2 * xtx_inv[(j, j)]).max(0.0).sqrt());
    }
    Ok(RegressionResult {
        coefficients,
        standard_errors,
        r_squared,
        n_obs: n,
        fe_absorbed: fe,
    })
}

/// Ordinary least squares of `y` on named columns (the caller supplies the
/// intercept column explicitly). Exact on noiseless data; errors name any
/// collinear columns.
pub fn ols(y: &[f64], names: &[String], cols: &[Vec<f64>]) -> Result<RegressionResult, RegressError> {
    ols_core(y, names, cols, 0, FixedEffects::None)
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Fits y ~ intercept + pol separately on races with pol <= threshold and
/// pol > threshold. Errors when either side is empty.
pub fn piecewise_polarization(
    y: &[f64],
    pol: &[f64],
    threshold: f64,
) -> Result<(RegressionResult, RegressionResult), RegressError> {
    if y.len() != pol.len() {
        return Err(RegressError::LengthMismatch(y.len(), pol.len()));
    }
    let fit_side = |keep: &dyn Fn(f64) -> bool, side: &'static str| {
        let mut ys = Vec::new();
        let mut ones = Vec::new();
        let mut xs = Vec::new();
        for (yi, pi) in y.iter().zip(pol) {
            if keep(*pi) {
                ys.push(*yi);
                ones.push(1.0);
                xs.push(*pi);
            }
        }
        if ys.is_empty() {
            return Err(RegressError::EmptySide { side, threshold });
        }
        ols(&ys, &names(&["intercept", "pol"]), &[ones, xs])
    };
    let low = fit_side(&|p| p <= threshold, "low")?;
    let high = fit_side(&|p| p > threshold, "high")?;
    Ok((low, high))
}

/// Fixed-effects request for `quadratic_polarization`; the Voter variant
/// carries one unit id per observation.
#[derive(Debug, Clone, Copy)]
pub enum FeSpec<'a> {
    None,
    Voter(&'a [u64]),
}

/// Fits y ~ pol + pol^2 (plus an intercept without fixed effects). With voter
/// fixed effects the fit demeans y, pol, and pol^2 within each voter, and
/// standard errors spend one degree of freedom per voter.
pub fn quadratic_polarization(
    y: &[f64],
    pol: &[f64],
    fe: FeSpec,
) -> Result<RegressionResult, RegressError> {
    if y.len() != pol.len() {
        return Err(RegressError::LengthMismatch(y.len(), pol.len()));
    }
    let mut distinct: Vec<f64> = pol.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("pol values must not be NaN"));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(RegressError::TooFewDistinct(distinct.len()));
    }
    let pol2: Vec<f64> = pol.iter().map(|p| p * p).collect();

    match fe {
        FeSpec::None => {
            let ones = vec![1.0; y.len()];
            ols_core(
                y,
                &names(&["intercept", "pol", "pol2"]),
                &[ones, pol.to_vec(), pol2],
                0,
                FixedEffects::None,
            )
        }
        FeSpec::Voter(units) => {
            if units.len() != y.len() {
                return Err(RegressError::LengthMismatch(units.len(), y.len()));
            }
            let mut sums: BTreeMap<u64, (f64, f64, f64, u64)> = BTreeMap::new();
            for i in 0..y.len() {
                let e = sums.entry(units[i]).or_insert((0.0, 0.0, 0.0, 0));
                e.0 += y[i];
                e.1 += pol[i];
                e.2 += pol2[i];
                e.3 += 1;
            }
            for (unit, (_, _, _, count)) in &sums {
                if *count < 2 {
                    return Err(RegressError::InsufficientWithinVariation(*unit));
                }
            }
            let mut yd = Vec::with_capacity(y.len());
            let mut p1 = Vec::with_capacity(y.len());
            let mut p2 = Vec::with_capacity(y.len());
            for i in 0..y.len() {
                let (sy, sp, sp2, c) = sums[&units[i]];
                let c = c as f64;
                yd.push(y[i] - sy / c);
                p1.push(pol[i] - sp / c);
                p2.push(pol2[i] - sp2 / c);
            }
            ols_core(
                &yd,
                &names(&["pol", "pol2"]),
                &[p1, p2],
                sums.len(),
                FixedEffects::Voter,
            )
        }
    }
}

/// The comparative-statics setting: same-party contests read off spatial
/// distance (Case1), cross-party contests read off candidate polarization
/// (Case2). The predicted label is the same in both; the parameter keeps the
/// full grid of combinations explicit and checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseSetting {
    Case1,
    Case2,
}

/// Whether the policy space has one dimension or several.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimensionality {
    Uni,
    Multi,
}

/// Predicted direction of voter indifference as the candidate configuration
/// spreads out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrendLabel {
    Constant,
    Decreasing,
    Increasing,
    UShaped,
}

impl std::fmt::Display for TrendLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TrendLabel::Constant => "constant",
            TrendLabel::Decreasing => "decreasing",
            TrendLabel::Increasing => "increasing",
            TrendLabel::UShaped => "u_shaped",
        };
        f.write_str(s)
    }
}

/// The theory's trend table: how indifference moves with the candidates'
/// spread, per loss family and dimensionality. Multi-dimensional concave
/// trends depend on beta: exactly quadratic (beta = 2) is flat, steeper is
/// decreasing, and 1 < beta < 2 rises like the convex case.
pub fn predict_trend(
    family: LossFamily,
    _setting: CaseSetting,
    dims: Dimensionality,
    beta: Option<f64>,
) -> Result<TrendLabel, RegressError> {
    Ok(match dims {
        Dimensionality::Uni => match family {
            LossFamily::Linear => TrendLabel::Constant,
            LossFamily::Concave => TrendLabel::Decreasing,
            LossFamily::Convex => TrendLabel::Increasing,
            LossFamily::ReverseS => TrendLabel::UShaped,
        },
        Dimensionality::Multi => match family {
            LossFamily::Linear => TrendLabel::Increasing,
            LossFamily::Convex => TrendLabel::Increasing,
            LossFamily::ReverseS => TrendLabel::UShaped,
            LossFamily::Concave => {
                let b = beta.ok_or(RegressError::BetaRequired)?;
                if !(b > 1.0) || !b.is_finite() {
                    return Err(RegressError::BadBeta(b, LossFamily::Concave));
                }
                if b == 2.0 {
                    TrendLabel::Constant
                } else if b > 2.0 {
                    TrendLabel::Decreasing
                } else {
                    TrendLabel::Increasing
                }
            }
        },
    })
}

/// Loss families whose predicted trend matches `label` in the given
/// dimensionality (the trend table read backwards).
pub fn consistent_families(label: TrendLabel, dims: Dimensionality) -> Vec<LossFamily> {
    let mut out = Vec::new();
    for family in [
        LossFamily::Linear,
        LossFamily::Concave,
        LossFamily::Convex,
        LossFamily::ReverseS,
    ] {
        let matches = match (dims, family) {
            // Concave spans several trends in the multi-dimensional table
            // depending on beta, so it is consistent with all three
            // non-U-shaped labels there.
            (Dimensionality::Multi, LossFamily::Concave) => label != TrendLabel::UShaped,
            _ => predict_trend(family, CaseSetting::Case1, dims, Some(2.5))
                .expect("beta supplied for every family")
                == label,
        };
        if matches {
            out.push(family);
        }
    }
    out
}

/// Slopes of a piecewise fit count as zero when within two standard errors of
/// zero, with a small absolute floor so exact fits are robust to rounding.
fn slope_is_zero(slope: f64, se: f64, y_scale: f64) -> bool {
    slope.abs() <= 2.0 * se + 1e-9 * y_scale.max(1e-12)
}

/// Classifies the shape of indifference against a distance proxy and returns
/// the label plus the loss families consistent with it.
///
/// The rule fits a piecewise-linear model split at the proxy median and a
/// quadratic model. Both slopes near zero is Constant; agreeing slope signs
/// give Decreasing or Increasing; a (-, +) sign pattern with the quadratic
/// term positive beyond one standard error is UShaped. Any other pattern
/// falls back to the overall slope (two-standard-error rule, else Constant).
pub fn classify_form(
    points: &[(f64, f64)],
    dims: Dimensionality,
) -> Result<(TrendLabel, Vec<LossFamily>), RegressError> {
    let mut proxies: Vec<f64> = points.iter().map(|(x, _)| *x).collect();
    proxies.sort_by(|a, b| a.partial_cmp(b).expect("proxies must not be NaN"));
    let mut distinct = proxies.clone();
    distinct.dedup();
    if points.len() < 5 || distinct.len() < 3 {
        return Err(RegressError::DegenerateInput {
            points: points.len(),
            distinct: distinct.len(),
        });
    }
    let mid = proxies.len() / 2;
    let median = if proxies.len() % 2 == 1 {
        proxies[mid]
    } else {
        0.5 * (proxies[mid - 1] + proxies[mid])
    };

    let x: Vec<f64> = points.iter().map(|(x, _)| *x).collect();
    let y: Vec<f64> = points.iter().map(|(_, y)| *y).collect();
    let y_scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let (low, high) = piecewise_polarization(&y, &x, median)?;
    let quad = quadratic_polarization(&y, &x, FeSpec::None)?;

    let b_low = low.coefficient("pol");
    let b_high = high.coefficient("pol");
    let se_low = low.standard_error("pol");
    let se_high = high.standard_error("pol");
    let low_zero = slope_is_zero(b_low, se_low, y_scale);
    let high_zero = slope_is_zero(b_high, se_high, y_scale);
    let c2 = quad.coefficient("pol2");
    let se_c2 = quad.standard_error("pol2");

    let label = if low_zero && high_zero {
        TrendLabel::Constant
    } else if b_low > 0.0 && b_high > 0.0 {
        TrendLabel::Increasing
    } else if b_low < 0.0 && b_high < 0.0 {
        TrendLabel::Decreasing
    } else if b_low < 0.0 && b_high > 0.0 && c2 > se_c2 {
        TrendLabel::UShaped
    } else {
        let ones = vec![1.0; y.len()];
        let overall = ols(&y, &names(&["intercept", "pol"]), &[ones, x.clone()])?;
        let b = overall.coefficient("pol");
        let se = overall.standard_error("pol");
        if slope_is_zero(b, se, y_scale) {
            TrendLabel::Constant
        } else if b > 0.0 {
            TrendLabel::Increasing
        } else {
            TrendLabel::Decreasing
        }
    };
    Ok((label, consistent_families(label, dims)))
}

/// Writes regression results as CSV rows `model,term,coefficient,se,n_obs,r_squared`.
pub fn write_regression_csv<W: std::io::Write>(
    fits: &[(&str, &RegressionResult)],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "model,term,coefficient,se,n_obs,r_squared")?;
    for (model, fit) in fits {
        for (term, coef) in &fit.coefficients {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                model, term, coef, fit.standard_errors[term], fit.n_obs, fit.r_squared
            )?;
        }
    }
    Ok(())
}
