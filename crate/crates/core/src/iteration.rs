//! The offset fixed-point iteration for d-th roots.
//!
//! Writing the root as `r = b/2 + c` (the *plus* convention) and expanding
//! `(b/2 + c)^d = x` gives the map
//!
//! ```text
//! c' = (x - (b/2)^d) / Q(c),   Q(c) = ((b/2 + c)^d - (b/2)^d) / c
//! ```
//!
//! where `Q` is kept as an explicit polynomial so that `c = 0` needs no
//! special casing. For `d = 2` under the *minus* convention (`r = b/2 - c`)
//! the same map reads `c' = (x - b^2/4) / (c - b)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, RootError};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_MAX_RESTARTS: usize = 3;
pub const DEFAULT_ZERO_GUARD: f64 = 1e-12;

/// Radicand and root degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootQuery {
    x: f64,
    d: u32,
}

impl RootQuery {
    pub fn new(x: f64, d: u32) -> Result<Self> {
        if !(x.is_finite() && x > 0.0) {
            return Err(RootError::InvalidQuery(format!(
                "radicand must be a positive real, got {x}"
            )));
        }
        if d < 2 {
            return Err(RootError::InvalidQuery(format!(
                "root degree must be at least 2, got {d}"
            )));
        }
        Ok(Self { x, d })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Reference value `x^(1/d)` from the platform power primitives.
    pub fn principal_root(&self) -> f64 {
        principal_root(self.x, self.d)
    }
}

/// `x^(1/d)` using `sqrt`/`cbrt` where available, `powf` otherwise.
pub fn principal_root(x: f64, d: u32) -> f64 {
    match d {
        2 => x.sqrt(),
        3 => x.cbrt(),
        _ => x.powf(1.0 / f64::from(d)),
    }
}

/// How the root is recovered from the offset variable `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignConvention {
    /// `r = b/2 - c`, the square-root presentation.
    Minus,
    /// `r = b/2 + c`, the general d-th root presentation.
    Plus,
}

impl SignConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignConvention::Minus => "minus",
            SignConvention::Plus => "plus",
        }
    }
}

impl fmt::Display for SignConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "minus" => Ok(SignConvention::Minus),
            "plus" => Ok(SignConvention::Plus),
            other => Err(format!("unknown sign convention '{other}'")),
        }
    }
}

/// Parameters of a single run of the offset iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    pub b: f64,
    pub c1: f64,
    /// Convergence tolerance on `|c_{n+1} - c_n|`.
    pub tol: f64,
    pub max_iter: usize,
    pub max_restarts: usize,
    /// Smallest admissible `|denominator|`.
    pub zero_guard: f64,
    pub convention: SignConvention,
}

impl IterationConfig {
    /// Config with default budgets and the plus convention.
    pub fn new(b: f64, c1: f64) -> Self {
        Self {
            b,
            c1,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            max_restarts: DEFAULT_MAX_RESTARTS,
            zero_guard: DEFAULT_ZERO_GUARD,
            convention: SignConvention::Plus,
        }
    }

    pub fn with_convention(mut self, convention: SignConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.b == 0.0 {
            return Err(RootError::InvalidConfig(
                "b = 0 has only neutral stability: the iterates alternate between \
                 c1 and x/c1 and never converge"
                    .into(),
            ));
        }
        if !self.b.is_finite() || !self.c1.is_finite() {
            return Err(RootError::InvalidConfig("b and c1 must be finite".into()));
        }
        if !(self.tol > 0.0) {
            return Err(RootError::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(RootError::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.zero_guard > 0.0) {
            return Err(RootError::InvalidConfig(format!(
                "zero guard must be positive, got {}",
                self.zero_guard
            )));
        }
        Ok(())
    }
}

/// Terminal classification of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    ConvergedCorrect,
    ConvergedWrong,
    Diverged,
    MaxIterExceeded,
    ZeroDivisorExhausted,
}

impl Verdict {
    pub fn is_converged(&self) -> bool {
        matches!(self, Verdict::ConvergedCorrect | Verdict::ConvergedWrong)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ConvergedCorrect => "converged_correct",
            Verdict::ConvergedWrong => "converged_wrong",
            Verdict::Diverged => "diverged",
            Verdict::MaxIterExceeded => "max_iter_exceeded",
            Verdict::ZeroDivisorExhausted => "zero_divisor_exhausted",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the values stored in a trace map onto root approximations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recovery {
    /// Iterates are root approximations already (Newton-family methods).
    Direct,
    /// Iterates are offsets `c`; the root is `b/2 -/+ c`.
    Offset { b: f64, convention: SignConvention },
}

impl Recovery {
    pub fn root(&self, value: f64) -> f64 {
        match *self {
            Recovery::Direct => value,
            Recovery::Offset { b, convention } => recover_root(value, b, convention),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// Iterates of the final attempt, starting with its initial value.
    pub iterates: Vec<f64>,
    pub verdict: Verdict,
    pub restarts_used: usize,
    /// Present iff the run converged.
    pub root_estimate: Option<f64>,
    /// `|r^d - x|` for the root recovered from the last iterate.
    pub residual: f64,
    pub recovery: Recovery,
}

impl IterationTrace {
    /// Root approximation implied by each iterate.
    pub fn approximations(&self) -> Vec<f64> {
        self.iterates.iter().map(|&v| self.recovery.root(v)).collect()
    }

    /// Number of steps taken in the final attempt.
    pub fn steps(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }

    pub fn last(&self) -> f64 {
        *self.iterates.last().expect("trace is never empty")
    }
}

/// Residual threshold separating a correct from a wrong convergence.
pub fn residual_tolerance(tol: f64, x: f64) -> f64 {
    (100.0 * tol).max(1e-8) * (1.0 + x)
}

/// Bound on `|c_n|` beyond which a run is declared divergent.
pub fn divergence_bound(x: f64, b: f64) -> f64 {
    1e12 * (1.0 + b.abs() + x)
}

/// `b/2 - c` (minus) or `b/2 + c` (plus).
pub fn recover_root(c: f64, b: f64, convention: SignConvention) -> f64 {
    match convention {
        SignConvention::Minus => b / 2.0 - c,
        SignConvention::Plus => b / 2.0 + c,
    }
}

/// Ballpark offset from the digit count of `x`: a d-th root of an n-digit
/// number has about n/d digits, so `b = 2 * 10^((n - 1/2) / d)`.
pub fn guess_offset(x: f64, d: u32) -> f64 {
    let digits = x.log10().floor() + 1.0;
    2.0 * 10f64.powf((digits - 0.5) / f64::from(d))
}

/// One step of the square-root map `(x - b^2/4) / (c - b)` (minus convention).
pub fn sqrt_step(c: f64, x: f64, b: f64) -> Result<f64> {
    sqrt_step_guarded(c, x, b, DEFAULT_ZERO_GUARD)
}

pub fn sqrt_step_guarded(c: f64, x: f64, b: f64, zero_guard: f64) -> Result<f64> {
    let denominator = c - b;
    if !(denominator.abs() >= zero_guard) {
        return Err(RootError::ZeroDivisor { at: c, denominator });
    }
    Ok((x - b * b / 4.0) / denominator)
}

/// One step of the general d-th root map (plus convention).
pub fn nth_step(c: f64, x: f64, b: f64, d: u32) -> Result<f64> {
    OffsetMap::new(x, b, d).step(c)
}

/// Binomial coefficient as a float; exact while it fits in 53 bits.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// The plus-convention map for a fixed `(x, b, d)`, with the divided
/// difference polynomial precomputed.
#[derive(Debug, Clone)]
pub struct OffsetMap {
    x: f64,
    b: f64,
    d: u32,
    numerator: f64,
    /// Coefficients of `Q`, lowest power of `c` first.
    coeffs: Vec<f64>,
    zero_guard: f64,
}

impl OffsetMap {
    pub fn new(x: f64, b: f64, d: u32) -> Self {
        Self::with_zero_guard(x, b, d, DEFAULT_ZERO_GUARD)
    }

    pub fn with_zero_guard(x: f64, b: f64, d: u32, zero_guard: f64) -> Self {
        assert!(d >= 2, "root degree must be at least 2");
        let half = b / 2.0;
        // Q(c) = sum_{k=1..d} C(d,k) (b/2)^(d-k) c^(k-1)
        let coeffs = (1..=d)
            .map(|k| binomial(d, k) * half.powi((d - k) as i32))
            .collect();
        Self {
            x,
            b,
            d,
            numerator: x - half.powi(d as i32),
            coeffs,
            zero_guard,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// `x - (b/2)^d`.
    pub fn numerator(&self) -> f64 {
        self.numerator
    }

    /// `Q(c)`, the divided difference `((b/2 + c)^d - (b/2)^d) / c`.
    pub fn divided_difference(&self, c: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * c + a)
    }

    /// `Q'(c)`.
    pub fn divided_difference_slope(&self, c: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (power, &a)| acc * c + power as f64 * a)
    }

    fn checked_q(&self, c: f64) -> Result<f64> {
        let q = self.divided_difference(c);
        if !(q.abs() >= self.zero_guard) {
            return Err(RootError::ZeroDivisor { at: c, denominator: q });
        }
        Ok(q)
    }

    pub fn step(&self, c: f64) -> Result<f64> {
        Ok(self.numerator / self.checked_q(c)?)
    }

    /// Derivative of the map, `-P Q'(c) / Q(c)^2`.
    pub fn derivative(&self, c: f64) -> Result<f64> {
        let q = self.checked_q(c)?;
        Ok(-self.numerator * self.divided_difference_slope(c) / (q * q))
    }

    /// Step in the given convention; the minus map is `c -> -step(-c)`.
    pub fn step_in(&self, c: f64, convention: SignConvention) -> Result<f64> {
        match convention {
            SignConvention::Plus => self.step(c),
            SignConvention::Minus => self.step(-c).map(|v| -v),
        }
    }
}

enum Attempt {
    Converged,
    Diverged,
    Exhausted,
    ZeroDivisor,
}

/// Runs the offset iteration to convergence, divergence or budget.
///
/// A zero divisor restarts from `c1 + 1 + |b|/2` (relative to the previous
/// start) at most `max_restarts` times.
pub fn run_iteration(q: &RootQuery, cfg: &IterationConfig) -> Result<IterationTrace> {
    cfg.validate()?;
    let map = OffsetMap::with_zero_guard(q.x, cfg.b, q.d, cfg.zero_guard);
    let bound = divergence_bound(q.x, cfg.b);

    let mut start = cfg.c1;
    let mut restarts = 0;
    let (iterates, attempt) = loop {
        let mut iterates = Vec::with_capacity(cfg.max_iter.min(1024) + 1);
        iterates.push(start);
        let mut c = start;
        let mut attempt = Attempt::Exhausted;
        for _ in 0..cfg.max_iter {
            let next = match map.step_in(c, cfg.convention) {
                Ok(v) => v,
                Err(_) => {
                    attempt = Attempt::ZeroDivisor;
                    break;
                }
            };
            if !next.is_finite() {
                attempt = Attempt::Diverged;
                break;
            }
            iterates.push(next);
            if next.abs() > bound {
                attempt = Attempt::Diverged;
                break;
            }
            if (next - c).abs() <= cfg.tol {
                attempt = Attempt::Converged;
                break;
            }
            c = next;
        }
        match attempt {
            Attempt::ZeroDivisor if restarts < cfg.max_restarts => {
                restarts += 1;
                start += 1.0 + cfg.b.abs() / 2.0;
            }
            _ => break (iterates, attempt),
        }
    };

    let recovery = Recovery::Offset {
        b: cfg.b,
        convention: cfg.convention,
    };
    let estimate = recovery.root(*iterates.last().expect("nonempty"));
    let residual = (estimate.powi(q.d as i32) - q.x).abs();
    let (verdict, root_estimate) = match attempt {
        Attempt::Converged => {
            let correct = estimate > 0.0 && residual <= residual_tolerance(cfg.tol, q.x);
            let verdict = if correct {
                Verdict::ConvergedCorrect
            } else {
                Verdict::ConvergedWrong
            };
            (verdict, Some(estimate))
        }
        Attempt::Diverged => (Verdict::Diverged, None),
        Attempt::Exhausted => (Verdict::MaxIterExceeded, None),
        Attempt::ZeroDivisor => (Verdict::ZeroDivisorExhausted, None),
    };

    Ok(IterationTrace {
        iterates,
        verdict,
        restarts_used: restarts,
        root_estimate,
        residual: if residual.is_nan() { f64::INFINITY } else { residual },
        recovery,
    })
}
