//! Newton-family baselines for `f(r) = r^d - k` and convergence-order
//! estimation.

use std::fmt;

use crate::error::{Result, RootError};
use crate::iteration::{
    residual_tolerance, run_iteration, IterationConfig, IterationTrace, Recovery, RootQuery,
    SignConvention, Verdict, DEFAULT_MAX_RESTARTS, DEFAULT_ZERO_GUARD,
};

/// Errors outside this window are ignored by [`estimate_convergence`].
pub const ERROR_WINDOW: (f64, f64) = (1e-13, 1e-2);

/// Usable iterates needed for one order estimate (a single ratio triple).
pub const MIN_USABLE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineMethod {
    NewtonRaphson,
    /// Square roots only.
    Babylonian,
    Halley,
    /// The offset iteration with the given offset; the start value is `c1`.
    OffsetFixedPoint { b: f64, convention: SignConvention },
}

impl BaselineMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineMethod::NewtonRaphson => "newton",
            BaselineMethod::Babylonian => "babylonian",
            BaselineMethod::Halley => "halley",
            BaselineMethod::OffsetFixedPoint { .. } => "offset",
        }
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn guard(x_n: f64, denominator: f64) -> Result<()> {
    if denominator.abs() >= DEFAULT_ZERO_GUARD {
        Ok(())
    } else {
        Err(RootError::ZeroDivisor { at: x_n, denominator })
    }
}

/// `x - (x^d - k) / (d x^(d-1))`.
pub fn newton_step(x_n: f64, k: f64, d: u32) -> Result<f64> {
    guard(x_n, x_n)?;
    let df = f64::from(d) * x_n.powi(d as i32 - 1);
    guard(x_n, df)?;
    Ok(x_n - (x_n.powi(d as i32) - k) / df)
}

/// `(x + k/x) / 2`.
pub fn babylonian_step(x_n: f64, k: f64) -> Result<f64> {
    guard(x_n, x_n)?;
    Ok((x_n + k / x_n) / 2.0)
}

/// Halley's update `x - 2 f f' / (2 f'^2 - f f'')`.
pub fn halley_step(x_n: f64, k: f64, d: u32) -> Result<f64> {
    guard(x_n, x_n)?;
    let d_f = f64::from(d);
    let f = x_n.powi(d as i32) - k;
    let df = d_f * x_n.powi(d as i32 - 1);
    let d2f = d_f * (d_f - 1.0) * x_n.powi(d as i32 - 2);
    let denominator = 2.0 * df * df - f * d2f;
    guard(x_n, denominator)?;
    Ok(x_n - 2.0 * f * df / denominator)
}

/// Iterates a method from `x1` until the step drops below `tol` or the
/// budget runs out. Verdicts follow [`run_iteration`].
pub fn run_baseline(
    method: BaselineMethod,
    q: &RootQuery,
    x1: f64,
    tol: f64,
    max_iter: usize,
) -> Result<IterationTrace> {
    let (x, d) = (q.x(), q.d());
    let step: fn(f64, f64, u32) -> Result<f64> = match method {
        BaselineMethod::OffsetFixedPoint { b, convention } => {
            let cfg = IterationConfig {
                tol,
                max_iter,
                max_restarts: DEFAULT_MAX_RESTARTS,
                ..IterationConfig::new(b, x1).with_convention(convention)
            };
            return run_iteration(q, &cfg);
        }
        BaselineMethod::NewtonRaphson => newton_step,
        BaselineMethod::Halley => halley_step,
        BaselineMethod::Babylonian => {
            if d != 2 {
                return Err(RootError::InvalidConfig(
                    "the Babylonian method is defined for square roots only".into(),
                ));
            }
            |v, k, _| babylonian_step(v, k)
        }
    };
    if !(x1.is_finite() && x1 != 0.0) {
        return Err(RootError::InvalidConfig(format!(
            "start value must be finite and nonzero, got {x1}"
        )));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(RootError::InvalidConfig(
            "tolerance must be positive and max_iter at least 1".into(),
        ));
    }

    let bound = 1e12 * (1.0 + x);
    let mut iterates = vec![x1];
    let mut current = x1;
    let mut verdict = Verdict::MaxIterExceeded;
    for _ in 0..max_iter {
        let next = match step(current, x, d) {
            Ok(v) => v,
            Err(_) => {
                verdict = Verdict::ZeroDivisorExhausted;
                break;
            }
        };
        if !next.is_finite() {
            verdict = Verdict::Diverged;
            break;
        }
        iterates.push(next);
        if next.abs() > bound {
            verdict = Verdict::Diverged;
            break;
        }
        if (next - current).abs() <= tol {
            verdict = Verdict::ConvergedCorrect;
            break;
        }
        current = next;
    }

    let last = *iterates.last().expect("nonempty");
    let residual = (last.powi(d as i32) - x).abs();
    let mut root_estimate = None;
    if verdict == Verdict::ConvergedCorrect {
        root_estimate = Some(last);
        if !(last > 0.0 && residual <= residual_tolerance(tol, x)) {
            verdict = Verdict::ConvergedWrong;
        }
    }
    Ok(IterationTrace {
        iterates,
        verdict,
        restarts_used: 0,
        root_estimate,
        residual: if residual.is_nan() { f64::INFINITY } else { residual },
        recovery: Recovery::Direct,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceEstimate {
    /// Median of `ln(e_{n+1}/e_n) / ln(e_n/e_{n-1})`.
    pub order: f64,
    /// Median of `e_{n+1} / e_n`; meaningful for order-one sequences.
    pub rate: f64,
    pub samples_used: usize,
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Estimates order and rate from absolute errors of consecutive iterates.
pub fn estimate_from_errors(errors: &[f64]) -> Result<ConvergenceEstimate> {
    let usable = |e: f64| e > ERROR_WINDOW.0 && e < ERROR_WINDOW.1;
    let samples_used = errors.iter().filter(|&&e| usable(e)).count();

    let rates: Vec<f64> = errors
        .windows(2)
        .filter(|w| usable(w[0]) && usable(w[1]))
        .map(|w| w[1] / w[0])
        .collect();
    let orders: Vec<f64> = errors
        .windows(3)
        .filter(|w| w.iter().all(|&e| usable(e)))
        .map(|w| (w[2] / w[1]).ln() / (w[1] / w[0]).ln())
        .filter(|q| q.is_finite())
        .collect();

    if samples_used < MIN_USABLE || orders.is_empty() {
        return Err(RootError::InsufficientData {
            usable: samples_used,
            needed: MIN_USABLE,
        });
    }
    Ok(ConvergenceEstimate {
        order: median(orders),
        rate: median(rates),
        samples_used,
    })
}

/// Order and rate of a trace measured against a reference root.
pub fn estimate_convergence(trace: &IterationTrace, true_root: f64) -> Result<ConvergenceEstimate> {
    let errors: Vec<f64> = trace
        .approximations()
        .into_iter()
        .map(|r| (r - true_root).abs())
        .collect();
    estimate_from_errors(&errors)
}
