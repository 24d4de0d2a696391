//! Fixed points of the offset map, their classification by derivative
//! magnitude, and empirical scans over the offset `b`.
//!
//! For `d = 2` everything here uses the minus convention, `c' = (x - b^2/4)
//! / (c - b)` with fixed points `b/2 -/+ sqrt(x)`. For `d >= 3` the plus
//! convention map of [`OffsetMap`] is used, with fixed points
//! `+/- x^(1/d) - b/2`.

use std::fmt;

use crate::error::{Result, RootError};
use crate::iteration::{
    principal_root, run_iteration, sqrt_step, IterationConfig, OffsetMap, RootQuery, Verdict,
    DEFAULT_ZERO_GUARD,
};

pub const DEFAULT_CLASS_TOL: f64 = 1e-9;

/// Iteration budget for scan runs. Close to a stability edge the contraction
/// factor tends to one, so the default run budget would mark slowly
/// converging offsets as failures.
pub const SCAN_MAX_ITER: usize = 200_000;

/// Absolute width to which the least positive convergent offset is refined.
pub const REFINE_WIDTH: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilityClass {
    Unstable,
    Neutral,
    Stable,
    Superstable,
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::Unstable => "unstable",
            StabilityClass::Neutral => "neutral",
            StabilityClass::Stable => "stable",
            StabilityClass::Superstable => "superstable",
        }
    }

    /// Stable or superstable.
    pub fn attracts(&self) -> bool {
        matches!(self, StabilityClass::Stable | StabilityClass::Superstable)
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classify a fixed point by `|f'|`.
pub fn classify(derivative_magnitude: f64, class_tol: f64) -> StabilityClass {
    debug_assert!(class_tol < 0.5);
    let m = derivative_magnitude;
    if m <= class_tol {
        StabilityClass::Superstable
    } else if (m - 1.0).abs() <= class_tol {
        StabilityClass::Neutral
    } else if m > 1.0 + class_tol || m.is_nan() {
        StabilityClass::Unstable
    } else {
        StabilityClass::Stable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FixedPointKind {
    /// `b/2 - sqrt(x)` (d = 2).
    CMinus,
    /// `b/2 + sqrt(x)` (d = 2).
    CPlus,
    /// `+/- x^(1/d) - b/2` (d >= 3).
    General,
}

impl FixedPointKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FixedPointKind::CMinus => "c_minus",
            FixedPointKind::CPlus => "c_plus",
            FixedPointKind::General => "general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointInfo {
    pub location: f64,
    /// `|f'(location)|`; infinite when the fixed point sits on the pole.
    pub derivative_magnitude: f64,
    pub class: StabilityClass,
    pub which: FixedPointKind,
    /// The real root this fixed point recovers.
    pub root: f64,
}

/// The seven ranges of `b` relative to `+/- 2 sqrt(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    BelowMinusTwoRoot,
    AtMinusTwoRoot,
    NegativeInside,
    Zero,
    PositiveInside,
    AtTwoRoot,
    AboveTwoRoot,
}

impl Regime {
    pub const ALL: [Regime; 7] = [
        Regime::BelowMinusTwoRoot,
        Regime::AtMinusTwoRoot,
        Regime::NegativeInside,
        Regime::Zero,
        Regime::PositiveInside,
        Regime::AtTwoRoot,
        Regime::AboveTwoRoot,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Regime::BelowMinusTwoRoot => "b<-2sqrt(x)",
            Regime::AtMinusTwoRoot => "b=-2sqrt(x)",
            Regime::NegativeInside => "-2sqrt(x)<b<0",
            Regime::Zero => "b=0",
            Regime::PositiveInside => "0<b<2sqrt(x)",
            Regime::AtTwoRoot => "b=2sqrt(x)",
            Regime::AboveTwoRoot => "2sqrt(x)<b",
        }
    }

    /// Regime containing `b`; the boundaries are matched to a relative 1e-12.
    pub fn of(x: f64, b: f64) -> Regime {
        let edge = 2.0 * x.sqrt();
        let near = |v: f64| (b - v).abs() <= 1e-12 * edge;
        if b == 0.0 {
            Regime::Zero
        } else if near(-edge) {
            Regime::AtMinusTwoRoot
        } else if near(edge) {
            Regime::AtTwoRoot
        } else if b < -edge {
            Regime::BelowMinusTwoRoot
        } else if b < 0.0 {
            Regime::NegativeInside
        } else if b < edge {
            Regime::PositiveInside
        } else {
            Regime::AboveTwoRoot
        }
    }

    /// Representative offset: the exact boundary value, or the midpoint of
    /// the regime clipped to `[-10 sqrt(x), 10 sqrt(x)]`.
    pub fn sample_b(&self, x: f64) -> f64 {
        let r = x.sqrt();
        match self {
            Regime::BelowMinusTwoRoot => -6.0 * r,
            Regime::AtMinusTwoRoot => -2.0 * r,
            Regime::NegativeInside => -r,
            Regime::Zero => 0.0,
            Regime::PositiveInside => r,
            Regime::AtTwoRoot => 2.0 * r,
            Regime::AboveTwoRoot => 6.0 * r,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The analysed map: minus-convention square-root map for `d = 2`, the
/// plus-convention general map otherwise.
pub fn map_value(c: f64, x: f64, b: f64, d: u32) -> Result<f64> {
    if d == 2 {
        sqrt_step(c, x, b)
    } else {
        OffsetMap::new(x, b, d).step(c)
    }
}

/// Signed derivative of [`map_value`] with respect to `c`.
pub fn map_derivative(c: f64, x: f64, b: f64, d: u32) -> Result<f64> {
    if d == 2 {
        let denominator = c - b;
        if !(denominator.abs() >= DEFAULT_ZERO_GUARD) {
            return Err(RootError::ZeroDivisor { at: c, denominator });
        }
        Ok(-(x - b * b / 4.0) / (denominator * denominator))
    } else {
        OffsetMap::new(x, b, d).derivative(c)
    }
}

fn info(location: f64, x: f64, b: f64, d: u32, which: FixedPointKind, root: f64) -> FixedPointInfo {
    let derivative_magnitude = match map_derivative(location, x, b, d) {
        Ok(v) => v.abs(),
        // sits on the pole: |f'| grows without bound as b approaches this value
        Err(_) => f64::INFINITY,
    };
    FixedPointInfo {
        location,
        derivative_magnitude,
        class: classify(derivative_magnitude, DEFAULT_CLASS_TOL),
        which,
        root,
    }
}

/// All real fixed points of the analysed map.
pub fn fixed_points(x: f64, b: f64, d: u32) -> Vec<FixedPointInfo> {
    let root = principal_root(x, d);
    if d == 2 {
        vec![
            info(b / 2.0 - root, x, b, d, FixedPointKind::CMinus, root),
            info(b / 2.0 + root, x, b, d, FixedPointKind::CPlus, -root),
        ]
    } else if d % 2 == 1 {
        vec![info(root - b / 2.0, x, b, d, FixedPointKind::General, root)]
    } else {
        vec![
            info(root - b / 2.0, x, b, d, FixedPointKind::General, root),
            info(-root - b / 2.0, x, b, d, FixedPointKind::General, -root),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub query: RootQuery,
    pub b: f64,
    pub fixed_points: Vec<FixedPointInfo>,
    /// Only defined for `d = 2`.
    pub regime: Option<Regime>,
}

pub fn analyze(q: &RootQuery, b: f64) -> StabilityReport {
    StabilityReport {
        query: *q,
        b,
        fixed_points: fixed_points(q.x(), b, q.d()),
        regime: (q.d() == 2).then(|| Regime::of(q.x(), b)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeRow {
    pub regime: Regime,
    pub b: f64,
    pub c_minus: FixedPointInfo,
    pub c_plus: FixedPointInfo,
}

/// Classes of `c_-` and `c_+` at one representative `b` per regime.
pub fn regime_table(x: f64) -> Vec<RegimeRow> {
    Regime::ALL
        .iter()
        .map(|&regime| {
            let b = regime.sample_b(x);
            let points = fixed_points(x, b, 2);
            RegimeRow {
                regime,
                b,
                c_minus: points[0],
                c_plus: points[1],
            }
        })
        .collect()
}

/// Offsets at which the cubic fixed point changes stability:
/// `(cbrt(x) (sqrt(3) - 1), cbrt(x) (-sqrt(3) - 1))`.
pub fn cubic_validity_bounds(x: f64) -> (f64, f64) {
    let r = x.cbrt();
    let s3 = 3f64.sqrt();
    (r * (s3 - 1.0), r * (-s3 - 1.0))
}

/// `b^d / x`.
pub fn threshold_ratio(least_positive_b: f64, q: &RootQuery) -> f64 {
    least_positive_b.powi(q.d() as i32) / q.x()
}

/// Default per-point configuration for scans: `c1 = 1`, plus convention.
pub fn scan_config() -> IterationConfig {
    IterationConfig::new(1.0, 1.0).with_max_iter(SCAN_MAX_ITER)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    /// Position in the grid.
    pub index: usize,
    pub b: f64,
    pub verdict: Verdict,
    pub root_estimate: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub query: RootQuery,
    pub grid: Vec<f64>,
    /// One entry per grid value, with `b = 0` left out.
    pub points: Vec<ScanPoint>,
    /// Maximal runs of adjacent `ConvergedCorrect` grid points, as `(first, last)`.
    pub intervals: Vec<(f64, f64)>,
    pub least_positive_b: Option<f64>,
}

/// Evenly spaced grid of `steps` points from `b_min` to `b_max` inclusive.
pub fn scan_grid(b_min: f64, b_max: f64, steps: usize) -> Vec<f64> {
    let h = (b_max - b_min) / (steps - 1) as f64;
    (0..steps)
        .map(|i| if i + 1 == steps { b_max } else { b_min + i as f64 * h })
        .collect()
}

fn evaluate(q: &RootQuery, template: &IterationConfig, index: usize, b: f64) -> ScanPoint {
    let cfg = IterationConfig { b, ..*template };
    let trace = run_iteration(q, &cfg).expect("template validated");
    ScanPoint {
        index,
        b,
        verdict: trace.verdict,
        root_estimate: trace.root_estimate,
        residual: trace.residual,
    }
}

fn converges(q: &RootQuery, template: &IterationConfig, b: f64) -> bool {
    evaluate(q, template, 0, b).verdict == Verdict::ConvergedCorrect
}

fn validate_scan(b_min: f64, b_max: f64, steps: usize, template: &IterationConfig) -> Result<()> {
    if !(b_min.is_finite() && b_max.is_finite() && b_min < b_max) {
        return Err(RootError::InvalidConfig(format!(
            "scan range must satisfy b_min < b_max, got [{b_min}, {b_max}]"
        )));
    }
    if steps < 2 {
        return Err(RootError::InvalidConfig(format!(
            "scan needs at least 2 grid points, got {steps}"
        )));
    }
    IterationConfig { b: 1.0, ..*template }.validate()
}

fn nonzero(grid: &[f64]) -> Vec<(usize, f64)> {
    let scale = grid.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    grid.iter()
        .copied()
        .enumerate()
        .filter(|&(_, b)| b.abs() > 1e-12 * scale)
        .collect()
}

/// Evaluates every grid point on the calling thread.
pub fn scan_b_sequential(
    q: &RootQuery,
    b_min: f64,
    b_max: f64,
    steps: usize,
    template: &IterationConfig,
) -> Result<ScanResult> {
    validate_scan(b_min, b_max, steps, template)?;
    let grid = scan_grid(b_min, b_max, steps);
    let points = nonzero(&grid)
        .into_iter()
        .map(|(i, b)| evaluate(q, template, i, b))
        .collect();
    Ok(assemble(q, template, grid, points))
}

/// Evaluates grid points on the rayon pool; results keep grid order.
#[cfg(feature = "parallel")]
pub fn scan_b_parallel(
    q: &RootQuery,
    b_min: f64,
    b_max: f64,
    steps: usize,
    template: &IterationConfig,
) -> Result<ScanResult> {
    use rayon::prelude::*;

    validate_scan(b_min, b_max, steps, template)?;
    let grid = scan_grid(b_min, b_max, steps);
    let points = nonzero(&grid)
        .into_par_iter()
        .map(|(i, b)| evaluate(q, template, i, b))
        .collect();
    Ok(assemble(q, template, grid, points))
}

/// Runs the iteration at each grid offset and extracts the convergent
/// intervals and the least positive convergent offset.
pub fn scan_b(
    q: &RootQuery,
    b_min: f64,
    b_max: f64,
    steps: usize,
    template: &IterationConfig,
) -> Result<ScanResult> {
    #[cfg(feature = "parallel")]
    {
        scan_b_parallel(q, b_min, b_max, steps, template)
    }
    #[cfg(not(feature = "parallel"))]
    {
        scan_b_sequential(q, b_min, b_max, steps, template)
    }
}

fn assemble(
    q: &RootQuery,
    template: &IterationConfig,
    grid: Vec<f64>,
    points: Vec<ScanPoint>,
) -> ScanResult {
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<(f64, f64, usize)> = None;
    for p in &points {
        let ok = p.verdict == Verdict::ConvergedCorrect;
        open = match (open, ok) {
            (Some((lo, _, last)), true) if p.index == last + 1 => Some((lo, p.b, p.index)),
            (Some((lo, hi, _)), true) => {
                intervals.push((lo, hi));
                Some((p.b, p.b, p.index))
            }
            (None, true) => Some((p.b, p.b, p.index)),
            (Some((lo, hi, _)), false) => {
                intervals.push((lo, hi));
                None
            }
            (None, false) => None,
        };
    }
    if let Some((lo, hi, _)) = open {
        intervals.push((lo, hi));
    }

    let least_positive_b = points
        .iter()
        .position(|p| p.b > 0.0 && p.verdict == Verdict::ConvergedCorrect)
        .map(|k| {
            let hit = points[k];
            match k.checked_sub(1).map(|j| points[j]) {
                Some(prev) if prev.b > 0.0 && prev.index + 1 == hit.index => {
                    refine_edge(q, template, prev.b, hit.b)
                }
                _ => hit.b,
            }
        });

    ScanResult {
        query: *q,
        grid,
        points,
        intervals,
        least_positive_b,
    }
}

/// Bisects between a failing and a convergent offset; returns the
/// convergent end once the bracket is narrower than [`REFINE_WIDTH`].
fn refine_edge(q: &RootQuery, template: &IterationConfig, mut failing: f64, mut good: f64) -> f64 {
    while good - failing > REFINE_WIDTH {
        let mid = 0.5 * (failing + good);
        if converges(q, template, mid) {
            good = mid;
        } else {
            failing = mid;
        }
    }
    good
}
