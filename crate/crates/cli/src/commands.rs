use std::fmt;
use std::fmt::Write as _;
use std::io;

use serde_json::{json, Value};

use offset_root_core::baselines::{estimate_convergence, run_baseline, BaselineMethod};
use offset_root_core::contfrac::{build_gcf, gcf_iteration_equivalence, truncations};
use offset_root_core::iteration::{guess_offset, recover_root, IterationTrace};
use offset_root_core::stability::{
    analyze, regime_table, scan_b, scan_config, threshold_ratio, FixedPointInfo,
};
use offset_root_core::{
    run_iteration, IterationConfig, RootError, RootQuery, SignConvention, Verdict,
};

use crate::output::{
    csv_string, emit, envelope, float17, num, opt_float17, opt_num, to_json, OutputFormat,
};
use crate::{ApproxArgs, CfArgs, Command, Common, CompareArgs, RunArgs, ScanArgs, StabilityArgs};

/// Error level used when comparing methods by iterations to accuracy.
const TARGET_ERROR: f64 = 1e-12;

/// Text tables longer than this are shown head and tail only.
const TEXT_ROWS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    NotConverged,
}

impl Status {
    pub fn code(&self) -> u8 {
        match self {
            Status::Done => 0,
            Status::NotConverged => 2,
        }
    }

    fn from_verdict(v: Verdict) -> Self {
        if v == Verdict::ConvergedCorrect {
            Status::Done
        } else {
            Status::NotConverged
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io(io::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        1
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(msg) => f.write_str(msg),
            CliError::Io(err) => write!(f, "could not write output: {err}"),
        }
    }
}

impl From<RootError> for CliError {
    fn from(err: RootError) -> Self {
        CliError::Invalid(err.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::Io(err)
    }
}

type CmdResult = Result<Status, CliError>;

pub fn run(command: &Command) -> CmdResult {
    match command {
        Command::Approx(args) => cmd_approx(args),
        Command::Stability(args) => cmd_stability(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Cf(args) => cmd_cf(args),
    }
}

fn default_convention(d: u32) -> SignConvention {
    if d == 2 {
        SignConvention::Minus
    } else {
        SignConvention::Plus
    }
}

fn query(common: &Common) -> Result<RootQuery, CliError> {
    Ok(RootQuery::new(common.x, common.d)?)
}

fn iteration_config(q: &RootQuery, run: &RunArgs) -> Result<IterationConfig, CliError> {
    let b = run.b.unwrap_or_else(|| guess_offset(q.x(), q.d()));
    let cfg = IterationConfig {
        tol: run.tol,
        max_iter: run.max_iter,
        ..IterationConfig::new(b, run.c1)
            .with_convention(run.convention.unwrap_or(default_convention(q.d())))
    };
    cfg.validate()?;
    Ok(cfg)
}

fn finish(common: &Common, report: String) -> Result<(), CliError> {
    emit(&report, common.out.as_deref())?;
    Ok(())
}

fn inputs(common: &Common, extra: Value) -> Value {
    let mut v = json!({ "x": num(common.x), "d": common.d });
    if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
        base.extend(more);
    }
    v
}

fn config_json(cfg: &IterationConfig) -> Value {
    json!({
        "b": num(cfg.b),
        "c1": num(cfg.c1),
        "tol": num(cfg.tol),
        "max_iter": cfg.max_iter,
        "max_restarts": cfg.max_restarts,
        "zero_guard": num(cfg.zero_guard),
        "convention": cfg.convention.as_str(),
    })
}

fn trace_json(trace: &IterationTrace) -> Value {
    json!({
        "iterates": trace.iterates.iter().map(|&c| num(c)).collect::<Vec<_>>(),
        "verdict": trace.verdict.as_str(),
        "restarts_used": trace.restarts_used,
        "root_estimate": opt_num(trace.root_estimate),
        "residual": num(trace.residual),
    })
}

/// Row indices shown in a text table of `len` rows.
fn shown_rows(len: usize) -> Vec<Option<usize>> {
    if len <= TEXT_ROWS {
        return (0..len).map(Some).collect();
    }
    let head = TEXT_ROWS - 10;
    (0..head)
        .map(Some)
        .chain(std::iter::once(None))
        .chain((len - 10..len).map(Some))
        .collect()
}

fn cmd_approx(args: &ApproxArgs) -> CmdResult {
    let q = query(&args.common)?;
    let cfg = iteration_config(&q, &args.run)?;
    let trace = run_iteration(&q, &cfg)?;

    let report = match args.common.format {
        OutputFormat::Text => {
            let sign = match cfg.convention {
                SignConvention::Minus => "-",
                SignConvention::Plus => "+",
            };
            let mut s = String::new();
            let _ = writeln!(
                s,
                "offset iteration for x^(1/{}) with x = {}, b = {}, c1 = {} ({} convention)",
                q.d(),
                q.x(),
                cfg.b,
                cfg.c1,
                cfg.convention
            );
            let _ = writeln!(s, "{:>6} | c_n", "n");
            let _ = writeln!(s, "{:-<7}+{:-<20}", "", "");
            for row in shown_rows(trace.iterates.len()) {
                match row {
                    Some(i) => {
                        let _ = writeln!(s, "{:>6} | {:.11}", i + 1, trace.iterates[i]);
                    }
                    None => {
                        let _ = writeln!(s, "{:>6} |", "...");
                    }
                }
            }
            let _ = writeln!(
                s,
                "verdict: {} after {} steps ({} restarts)",
                trace.verdict,
                trace.steps(),
                trace.restarts_used
            );
            match trace.root_estimate {
                Some(r) => {
                    let _ = writeln!(s, "estimate: b/2 {sign} c_n = {r:.11}");
                }
                None => {
                    let _ = writeln!(s, "estimate: none");
                }
            }
            let _ = writeln!(s, "residual: {:e}", trace.residual);
            s
        }
        OutputFormat::Csv => csv_string(
            &["n", "c_n"],
            trace
                .iterates
                .iter()
                .enumerate()
                .map(|(i, &c)| vec![(i + 1).to_string(), float17(c)]),
        ),
        OutputFormat::Json => to_json(&envelope(
            "approx",
            inputs(&args.common, config_json(&cfg)),
            trace_json(&trace),
        )),
    };
    finish(&args.common, report)?;
    Ok(Status::from_verdict(trace.verdict))
}

fn fixed_point_json(p: &FixedPointInfo) -> Value {
    json!({
        "which": p.which.as_str(),
        "location": num(p.location),
        "derivative_magnitude": num(p.derivative_magnitude),
        "class": p.class.as_str(),
        "root": num(p.root),
    })
}

fn fixed_point_row(regime: &str, b: f64, p: &FixedPointInfo) -> Vec<String> {
    vec![
        regime.to_string(),
        float17(b),
        p.which.as_str().to_string(),
        float17(p.location),
        opt_float17(Some(p.derivative_magnitude)),
        p.class.as_str().to_string(),
    ]
}

const STABILITY_HEADER: [&str; 6] = ["regime", "b", "which", "location", "derivative_magnitude", "class"];

fn magnitude(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "inf".to_string()
    }
}

fn cmd_stability(args: &StabilityArgs) -> CmdResult {
    let q = query(&args.common)?;
    if let Some(b) = args.b {
        if !b.is_finite() {
            return Err(CliError::Invalid(format!("b must be finite, got {b}")));
        }
    }

    // Regime table for square roots without an explicit offset.
    if q.d() == 2 && args.b.is_none() {
        let rows = regime_table(q.x());
        let report = match args.common.format {
            OutputFormat::Text => {
                let mut s = String::new();
                let _ = writeln!(s, "stability regimes for x = {}", q.x());
                let _ = writeln!(
                    s,
                    "{:<15} {:>12} | {:>12} {:>10} {:<12} | {:>12} {:>10} {:<12}",
                    "regime", "b", "c_minus", "|f'|", "class", "c_plus", "|f'|", "class"
                );
                for r in &rows {
                    let _ = writeln!(
                        s,
                        "{:<15} {:>12.6} | {:>12.6} {:>10} {:<12} | {:>12.6} {:>10} {:<12}",
                        r.regime.label(),
                        r.b,
                        r.c_minus.location,
                        magnitude(r.c_minus.derivative_magnitude),
                        r.c_minus.class.as_str(),
                        r.c_plus.location,
                        magnitude(r.c_plus.derivative_magnitude),
                        r.c_plus.class.as_str(),
                    );
                }
                s
            }
            OutputFormat::Csv => csv_string(
                &STABILITY_HEADER,
                rows.iter().flat_map(|r| {
                    [
                        fixed_point_row(r.regime.label(), r.b, &r.c_minus),
                        fixed_point_row(r.regime.label(), r.b, &r.c_plus),
                    ]
                }),
            ),
            OutputFormat::Json => to_json(&envelope(
                "stability",
                inputs(&args.common, json!({})),
                json!({
                    "regimes": rows.iter().map(|r| json!({
                        "regime": r.regime.label(),
                        "b": num(r.b),
                        "c_minus": fixed_point_json(&r.c_minus),
                        "c_plus": fixed_point_json(&r.c_plus),
                    })).collect::<Vec<_>>(),
                }),
            )),
        };
        finish(&args.common, report)?;
        return Ok(Status::Done);
    }

    let b = args.b.unwrap_or_else(|| guess_offset(q.x(), q.d()));
    let report_data = analyze(&q, b);
    let regime = report_data.regime.map(|r| r.label()).unwrap_or("");
    let report = match args.common.format {
        OutputFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "fixed points for x = {}, d = {}, b = {}", q.x(), q.d(), b);
            if !regime.is_empty() {
                let _ = writeln!(s, "regime: {regime}");
            }
            let _ = writeln!(
                s,
                "{:<8} {:>20} {:>20} {:>14} {:<12}",
                "which", "location", "root", "|f'|", "class"
            );
            for p in &report_data.fixed_points {
                let _ = writeln!(
                    s,
                    "{:<8} {:>20.10} {:>20.10} {:>14} {:<12}",
                    p.which.as_str(),
                    p.location,
                    p.root,
                    magnitude(p.derivative_magnitude),
                    p.class.as_str()
                );
            }
            s
        }
        OutputFormat::Csv => csv_string(
            &STABILITY_HEADER,
            report_data
                .fixed_points
                .iter()
                .map(|p| fixed_point_row(regime, b, p)),
        ),
        OutputFormat::Json => to_json(&envelope(
            "stability",
            inputs(&args.common, json!({ "b": num(b) })),
            json!({
                "regime": if regime.is_empty() { Value::Null } else { json!(regime) },
                "fixed_points": report_data.fixed_points.iter().map(fixed_point_json).collect::<Vec<_>>(),
            }),
        )),
    };
    finish(&args.common, report)?;
    Ok(Status::Done)
}

fn cmd_scan(args: &ScanArgs) -> CmdResult {
    let q = query(&args.common)?;
    let template = IterationConfig {
        c1: args.c1,
        tol: args.tol,
        max_iter: args.max_iter,
        ..scan_config()
    };
    let result = scan_b(&q, args.b_min, args.b_max, args.steps, &template)?;
    let ratio = result.least_positive_b.map(|b| threshold_ratio(b, &q));

    let report = match args.common.format {
        OutputFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "scan of b in [{}, {}] ({} points) for x^(1/{}) with x = {}, c1 = {}",
                args.b_min,
                args.b_max,
                args.steps,
                q.d(),
                q.x(),
                args.c1
            );
            let converged = result
                .points
                .iter()
                .filter(|p| p.verdict == Verdict::ConvergedCorrect)
                .count();
            let _ = writeln!(s, "converged to the root at {converged} of {} offsets", result.points.len());
            if result.intervals.is_empty() {
                let _ = writeln!(s, "intervals: none");
            }
            for (lo, hi) in &result.intervals {
                let _ = writeln!(s, "interval: [{lo:.6}, {hi:.6}]");
            }
            match (result.least_positive_b, ratio) {
                (Some(b), Some(r)) => {
                    let _ = writeln!(s, "least positive convergent b: {b:.6}");
                    let _ = writeln!(s, "b^{}/x: {r:.6}", q.d());
                }
                _ => {
                    let _ = writeln!(s, "least positive convergent b: none");
                }
            }
            s
        }
        OutputFormat::Csv => csv_string(
            &["b", "verdict", "root_estimate", "residual"],
            result.points.iter().map(|p| {
                vec![
                    float17(p.b),
                    p.verdict.as_str().to_string(),
                    opt_float17(p.root_estimate),
                    opt_float17(Some(p.residual)),
                ]
            }),
        ),
        OutputFormat::Json => to_json(&envelope(
            "scan",
            inputs(
                &args.common,
                json!({
                    "b_min": num(args.b_min),
                    "b_max": num(args.b_max),
                    "steps": args.steps,
                    "config": config_json(&template),
                }),
            ),
            json!({
                "points": result.points.iter().map(|p| json!({
                    "b": num(p.b),
                    "verdict": p.verdict.as_str(),
                    "root_estimate": opt_num(p.root_estimate),
                    "residual": num(p.residual),
                })).collect::<Vec<_>>(),
                "intervals": result.intervals.iter().map(|(lo, hi)| json!([num(*lo), num(*hi)])).collect::<Vec<_>>(),
                "least_positive_b": opt_num(result.least_positive_b),
                "threshold_ratio": opt_num(ratio),
            }),
        )),
    };
    finish(&args.common, report)?;
    Ok(Status::Done)
}

struct MethodRun {
    method: BaselineMethod,
    trace: IterationTrace,
    errors: Vec<f64>,
    order: Option<f64>,
    rate: Option<f64>,
    steps_to_target: Option<usize>,
}

fn method_run(method: BaselineMethod, trace: IterationTrace, root: f64) -> MethodRun {
    let errors: Vec<f64> = trace
        .approximations()
        .iter()
        .map(|r| (r - root).abs())
        .collect();
    let estimate = estimate_convergence(&trace, root).ok();
    MethodRun {
        method,
        steps_to_target: errors.iter().position(|&e| e <= TARGET_ERROR),
        order: estimate.map(|e| e.order),
        rate: estimate.map(|e| e.rate),
        errors,
        trace,
    }
}

fn cmd_compare(args: &CompareArgs) -> CmdResult {
    let q = query(&args.common)?;
    let run = RunArgs {
        b: args.b,
        c1: args.c1,
        tol: args.tol,
        max_iter: args.max_iter,
        convention: args.convention,
    };
    let cfg = iteration_config(&q, &run)?;
    let root = q.principal_root();
    let x1 = args
        .x1
        .unwrap_or_else(|| recover_root(cfg.c1, cfg.b, cfg.convention));

    let offset = BaselineMethod::OffsetFixedPoint {
        b: cfg.b,
        convention: cfg.convention,
    };
    let mut runs = vec![method_run(offset, run_iteration(&q, &cfg)?, root)];
    let mut methods = vec![BaselineMethod::NewtonRaphson];
    if q.d() == 2 {
        methods.push(BaselineMethod::Babylonian);
    }
    methods.push(BaselineMethod::Halley);
    for method in methods {
        let trace = run_baseline(method, &q, x1, cfg.tol, cfg.max_iter)?;
        runs.push(method_run(method, trace, root));
    }
    let column = |name: &str| runs.iter().find(|r| r.method.name() == name);
    let rows = runs.iter().map(|r| r.errors.len()).max().unwrap_or(0);

    let report = match args.common.format {
        OutputFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "x^(1/{}) with x = {}: offset b = {}, c1 = {}; Newton-family start {}",
                q.d(),
                q.x(),
                cfg.b,
                cfg.c1,
                x1
            );
            let _ = writeln!(
                s,
                "{:<11} {:<24} {:>6} {:>10} {:>8} {:>10}",
                "method", "verdict", "steps", "to 1e-12", "order", "rate"
            );
            let opt = |v: Option<f64>, p: usize| v.map_or("n/a".to_string(), |v| format!("{v:.p$}"));
            for r in &runs {
                let _ = writeln!(
                    s,
                    "{:<11} {:<24} {:>6} {:>10} {:>8} {:>10}",
                    r.method.name(),
                    r.trace.verdict.as_str(),
                    r.trace.steps(),
                    r.steps_to_target.map_or("n/a".to_string(), |n| n.to_string()),
                    opt(r.order, 3),
                    opt(r.rate, 5),
                );
            }
            let _ = writeln!(s);
            let names: Vec<&str> = runs.iter().map(|r| r.method.name()).collect();
            let _ = write!(s, "{:>6}", "n");
            for name in &names {
                let _ = write!(s, " {:>12}", format!("err_{name}"));
            }
            let _ = writeln!(s);
            for row in shown_rows(rows) {
                match row {
                    Some(i) => {
                        let _ = write!(s, "{:>6}", i + 1);
                        for r in &runs {
                            match r.errors.get(i) {
                                Some(e) => {
                                    let _ = write!(s, " {e:>12.3e}");
                                }
                                None => {
                                    let _ = write!(s, " {:>12}", "");
                                }
                            }
                        }
                        let _ = writeln!(s);
                    }
                    None => {
                        let _ = writeln!(s, "{:>6}", "...");
                    }
                }
            }
            s
        }
        OutputFormat::Csv => {
            let cell = |name: &str, i: usize| {
                opt_float17(column(name).and_then(|r| r.errors.get(i).copied()))
            };
            csv_string(
                &["n", "err_offset", "err_newton", "err_babylonian", "err_halley"],
                (0..rows).map(|i| {
                    vec![
                        (i + 1).to_string(),
                        cell("offset", i),
                        cell("newton", i),
                        cell("babylonian", i),
                        cell("halley", i),
                    ]
                }),
            )
        }
        OutputFormat::Json => to_json(&envelope(
            "compare",
            inputs(
                &args.common,
                json!({ "config": config_json(&cfg), "x1": num(x1) }),
            ),
            json!({
                "true_root": num(root),
                "methods": runs.iter().map(|r| json!({
                    "method": r.method.name(),
                    "trace": trace_json(&r.trace),
                    "errors": r.errors.iter().map(|&e| num(e)).collect::<Vec<_>>(),
                    "order": opt_num(r.order),
                    "rate": opt_num(r.rate),
                    "steps_to_1e-12": r.steps_to_target,
                })).collect::<Vec<_>>(),
            }),
        )),
    };
    finish(&args.common, report)?;
    Ok(Status::from_verdict(runs[0].trace.verdict))
}

fn cmd_cf(args: &CfArgs) -> CmdResult {
    let q = query(&args.common)?;
    if q.d() != 2 {
        return Err(CliError::Invalid(
            "continued fraction defined for d=2 only".to_string(),
        ));
    }
    let g = build_gcf(q.x(), args.b, args.depth)?;
    let values = truncations(&g)?;
    let equivalent = gcf_iteration_equivalence(q.x(), args.b, args.depth);
    let limit = args.b / 2.0 - q.x().sqrt();

    let report = match args.common.format {
        OutputFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "partial numerator: {}", g.partial_numerator);
            let _ = writeln!(s, "partial denominator: {}", g.partial_denominator);
            let _ = writeln!(s, "simple: {}", g.is_simple());
            let _ = writeln!(s, "compact: {}", g.compact(3));
            let _ = writeln!(s, "{}", g.nested(3));
            let _ = writeln!(s, "{:>6} | value", "depth");
            for row in shown_rows(values.len()) {
                match row {
                    Some(i) => {
                        let _ = writeln!(s, "{:>6} | {:.10}", i + 1, values[i]);
                    }
                    None => {
                        let _ = writeln!(s, "{:>6} |", "...");
                    }
                }
            }
            let _ = writeln!(s, "b/2 - sqrt(x): {limit:.10}");
            let _ = writeln!(s, "matches iteration from c1 = 0: {equivalent}");
            s
        }
        OutputFormat::Csv => csv_string(
            &["depth", "value"],
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![(i + 1).to_string(), float17(v)]),
        ),
        OutputFormat::Json => to_json(&envelope(
            "cf",
            inputs(&args.common, json!({ "b": num(args.b), "depth": args.depth })),
            json!({
                "partial_numerator": num(g.partial_numerator),
                "partial_denominator": num(g.partial_denominator),
                "simple": g.is_simple(),
                "compact": g.compact(3),
                "truncations": values.iter().map(|&v| num(v)).collect::<Vec<_>>(),
                "limit": num(limit),
                "equivalent_to_iteration": equivalent,
            }),
        )),
    };
    finish(&args.common, report)?;
    Ok(Status::Done)
}
