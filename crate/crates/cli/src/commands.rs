use lagfib_core::classify::{self, DeformationPair, VerdictOptions};
use lagfib_core::models::{FibrationModel, PhasePoint};
use lagfib_core::monodromy::{self, Family, IntMatrix, LoopSpec};
use lagfib_core::periods::{self, DeformationH, PeriodBasis, PeriodContext};
use lagfib_core::poly_geometry::{self, BaseParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::args::{Command, FlowMethod, LoopName, Quantity, Range};
use crate::config::RunConfig;
use crate::criteria;
use crate::emit::{Cell, Output, Table};
use crate::error::{CliError, CliResult};

const MAX_GRID_POINTS: usize = 2_000_000;
/// Relative gap below which the two α oracles count as agreeing.
pub const ORACLE_AGREEMENT: f64 = 1e-5;
const FF22_DISC_TOL: f64 = 1e-12;

/// Worker pool for the sweep engine, capped by `LAGFIB_THREADS`.
pub fn pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let threads = match threads {
        Some(t) => Some(t),
        None => match std::env::var("LAGFIB_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|t| *t > 0)
                    .ok_or_else(|| CliError::config(format!("LAGFIB_THREADS must be a positive integer, got {v:?}")))?,
            ),
            Err(_) => None,
        },
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    builder.build().map_err(|e| CliError::config(e.to_string()))
}

fn b_of(model: &FibrationModel, v: &[f64]) -> CliResult<BaseParams> {
    if v.len() != model.n() {
        return Err(CliError::usage(format!(
            "base point has {} coordinates, the {} model needs {}",
            v.len(),
            model.name(),
            model.n()
        )));
    }
    Ok(BaseParams::from_slice(v)?)
}

fn require_hl(cfg: &RunConfig, what: &str) -> CliResult<()> {
    if cfg.is_hl() {
        Ok(())
    } else {
        Err(CliError::usage(format!("{what} is only defined for the hl family")))
    }
}

fn error_class(e: &lagfib_core::Error) -> String {
    e.class().to_string()
}

pub fn run(cmd: &Command, cfg: &RunConfig, threads: Option<usize>) -> CliResult<Output> {
    match cmd {
        Command::Discriminant { grid, lo, hi } => discriminant(cfg, *grid, *lo, *hi, threads),
        Command::Alpha { b } => alpha(cfg, b),
        Command::Periods { h, from, to, samples } => periods_along(cfg, h, from, to, *samples),
        Command::Monodromy {
            loop_name,
            radius,
            k,
            height,
            h,
        } => monodromy(cfg, *loop_name, *radius, *k, *height, h, threads),
        Command::Flow {
            z,
            component,
            t,
            samples,
            method,
        } => flow(cfg, z, *component, *t, *samples, *method),
        Command::Classify { h, hp, k_max } => classify_cmd(cfg, h, hp, *k_max),
        Command::Sweep {
            quantity,
            x_axis,
            y_axis,
            x_range,
            y_range,
            at,
            random,
        } => sweep(cfg, *quantity, (*x_axis, *y_axis), (*x_range, *y_range), at.as_deref(), *random, threads),
        Command::Check { only } => check(cfg, only.as_deref()),
    }
}

// ---------------------------------------------------------------- discriminant

struct DiscSample {
    b: Vec<f64>,
    zeta0: f64,
    dp: f64,
    on_delta: bool,
    dist: f64,
}

fn disc_sample(cfg: &RunConfig, model: &FibrationModel, b: Vec<f64>) -> DiscSample {
    if cfg.is_hl() {
        let bp = BaseParams::new(b.clone()).expect("grid points are finite");
        let p = poly_geometry::build_poly(&bp);
        let tol = cfg.tol_disc.unwrap_or_else(|| poly_geometry::default_tol_disc(&bp));
        let (zeta0, dp) = match poly_geometry::max_real_root(&p, 0.0) {
            Ok(z) => (z, p.derivative(z)),
            Err(_) => (f64::NAN, f64::NAN),
        };
        DiscSample {
            zeta0,
            dp,
            on_delta: dp.abs() <= tol,
            dist: poly_geometry::dist_to_discriminant(&bp),
            b,
        }
    } else {
        let d = model.base_distance(&b);
        DiscSample {
            zeta0: f64::NAN,
            dp: f64::NAN,
            on_delta: d <= cfg.tol_disc.unwrap_or(FF22_DISC_TOL),
            dist: d,
            b,
        }
    }
}

fn grid_points(n: usize, axis: &[f64]) -> Vec<Vec<f64>> {
    let total = axis.len().pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut b = vec![0.0; n];
            for slot in b.iter_mut().rev() {
                *slot = axis[idx % axis.len()];
                idx /= axis.len();
            }
            b
        })
        .collect()
}

fn discriminant(cfg: &RunConfig, grid: usize, lo: f64, hi: f64, threads: Option<usize>) -> CliResult<Output> {
    if grid < 2 || !(hi > lo) {
        return Err(CliError::usage("discriminant needs --grid ≥ 2 and --hi > --lo"));
    }
    let model = cfg.model()?;
    let n = model.n();
    if (grid as f64).powi(n as i32) > MAX_GRID_POINTS as f64 {
        return Err(CliError::usage(format!("grid of {grid}^{n} points is too large")));
    }
    let axis = Range { lo, hi, count: grid }.values();
    let pts = grid_points(n, &axis);
    let samples: Vec<DiscSample> = pool(threads)?.install(|| pts.into_par_iter().map(|b| disc_sample(cfg, &model, b)).collect());
    let mut header: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
    header.extend(["zeta0", "dp", "on_delta", "dist"].map(String::from));
    let mut table = Table::new(header);
    let mut on = Vec::new();
    for s in &samples {
        let mut row: Vec<Cell> = s.b.iter().map(|&v| v.into()).collect();
        row.extend([s.zeta0.into(), s.dp.into(), s.on_delta.into(), s.dist.into()]);
        table.push(row);
        if s.on_delta {
            on.push(s.b.clone());
        }
    }
    let result = json!({
        "grid": grid,
        "axis": axis,
        "points": samples.len(),
        "on_delta_count": on.len(),
        "on_delta": on,
    });
    Ok(Output::new(result, Some(table)))
}

// ---------------------------------------------------------------- alpha

fn alpha(cfg: &RunConfig, b: &[f64]) -> CliResult<Output> {
    require_hl(cfg, "alpha")?;
    let model = cfg.model()?;
    let bp = b_of(&model, b)?;
    let (q, pieces) = periods::alpha_quadrature_with(&bp, &cfg.quad())?;
    let bound = periods::alpha_bound(&bp)?;
    let flow = periods::alpha_flow_oracle_with(&bp, &cfg.ode(), 1e3);
    let (flow_v, flow_err) = match &flow {
        Ok((t, _)) => (Some(*t), None),
        Err(e) => (None, Some(error_class(e))),
    };
    let gap = flow_v.map(|f| ((q - f) / q).abs());
    let agree = gap.is_some_and(|g| g <= ORACLE_AGREEMENT);
    let result = json!({
        "b": b,
        "value": q,
        "quadrature": q,
        "quadrature_intervals": pieces,
        "flow_oracle": flow_v,
        "flow_error": flow_err,
        "relative_gap": gap,
        "oracles_agree": agree,
        "agreement_tol": ORACLE_AGREEMENT,
        "bound": bound,
        "ratio_to_bound": q / bound,
        "dist": poly_geometry::dist_to_discriminant(&bp),
    });
    let mut header: Vec<String> = (1..=b.len()).map(|i| format!("b{i}")).collect();
    header.extend(["alpha", "flow_oracle", "relative_gap", "oracles_agree", "bound"].map(String::from));
    let mut table = Table::new(header);
    let mut row: Vec<Cell> = b.iter().map(|&v| v.into()).collect();
    row.extend([
        q.into(),
        flow_v.unwrap_or(f64::NAN).into(),
        gap.unwrap_or(f64::NAN).into(),
        agree.into(),
        bound.into(),
    ]);
    table.push(row);
    Ok(Output::new(result, Some(table)))
}

// ---------------------------------------------------------------- periods

fn context(cfg: &RunConfig, model: FibrationModel) -> CliResult<PeriodContext> {
    Ok(PeriodContext::with_options(model, cfg.quad(), cfg.ode())?)
}

fn periods_along(cfg: &RunConfig, h: &str, from: &[f64], to: &[f64], samples: usize) -> CliResult<Output> {
    if samples < 1 {
        return Err(CliError::usage("--samples must be at least 1"));
    }
    let model = cfg.model()?;
    let n = model.n();
    b_of(&model, from)?;
    b_of(&model, to)?;
    let hd = DeformationH::parse(h, n)?;
    let ctx = context(cfg, model)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("b{i}")));
    header.push("dist".into());
    for j in 1..=n {
        header.extend((1..=n).map(|i| format!("tau{j}_{i}")));
    }
    header.extend((1..=n).map(|i| format!("T{i}")));
    header.extend((1..=n).map(|i| format!("branch{i}")));
    let mut table = Table::new(header);
    let mut out = Vec::new();
    let mut prev: Option<PeriodBasis> = None;
    for k in 0..samples {
        let t = if samples == 1 { 0.0 } else { k as f64 / (samples - 1) as f64 };
        let b: Vec<f64> = from.iter().zip(to).map(|(a, c)| a + t * (c - a)).collect();
        let bp = BaseParams::from_slice(&b)?;
        let basis = periods::period_basis(&ctx, &hd, &bp, prev.as_ref())?;
        let dist = ctx.model.base_distance(&b);
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend(b.iter().map(|&v| Cell::from(v)));
        row.push(dist.into());
        for tau in &basis.tau {
            row.extend(tau.comps.iter().map(|&v| Cell::from(v)));
        }
        row.extend(basis.multitime.iter().map(|&v| Cell::from(v)));
        row.extend(basis.tau[0].branch.iter().map(|&v| Cell::from(v)));
        table.push(row);
        out.push(json!({
            "t": t,
            "b": b,
            "dist": dist,
            "tau": basis.tau.iter().map(|s| &s.comps).collect::<Vec<_>>(),
            "multitime": basis.multitime,
            "branch": basis.tau[0].branch,
        }));
        prev = Some(basis);
    }
    let result = json!({
        "H": hd.expr().to_string(),
        "regular_periods": ctx.regular_periods,
        "samples": out,
    });
    Ok(Output::new(result, Some(table)))
}

// ---------------------------------------------------------------- monodromy

pub fn family_of(model: &FibrationModel) -> Option<Family> {
    if !model.is_hl() {
        Some(Family::Ff22)
    } else if model.n() == 3 {
        Some(Family::Hl3)
    } else {
        None
    }
}

/// Loops selected by `--loop` for the configured family.
pub fn loops_for(
    model: &FibrationModel,
    name: Option<LoopName>,
    radius: Option<f64>,
    k: usize,
    height: f64,
) -> CliResult<Vec<LoopSpec>> {
    if let Some(r) = radius {
        if !(r > 0.0 && r.is_finite()) {
            return Err(CliError::usage("--radius must be positive"));
        }
    }
    if model.is_hl() {
        if model.n() != 3 {
            return Err(CliError::usage("HL monodromy loops are defined for n = 3"));
        }
        let r = radius.unwrap_or(0.3);
        let leg = |i: usize| LoopSpec::hl_leg(i, r, k);
        Ok(match name.unwrap_or(LoopName::All) {
            LoopName::Leg1 => vec![leg(0)?],
            LoopName::Leg2 => vec![leg(1)?],
            LoopName::Leg3 => vec![leg(2)?],
            LoopName::Vertex => vec![LoopSpec::hl_vertex(k)?],
            LoopName::All => vec![leg(0)?, leg(1)?, leg(2)?, LoopSpec::hl_vertex(k)?],
            LoopName::Circle => return Err(CliError::usage("--loop circle belongs to the ff22 family")),
        })
    } else {
        match name.unwrap_or(LoopName::Circle) {
            LoopName::Circle | LoopName::All => Ok(vec![LoopSpec::ff22_circle(radius.unwrap_or(0.5), height, k)?]),
            _ => Err(CliError::usage("the ff22 family has a single loop, --loop circle")),
        }
    }
}

pub struct LoopResult {
    pub label: String,
    pub matrix: IntMatrix,
    pub computed: IntMatrix,
    pub residual: f64,
    pub raw: Vec<Vec<f64>>,
    pub identified: Option<String>,
}

pub fn run_loops(ctx: &PeriodContext, h: &DeformationH, loops: &[LoopSpec], threads: Option<usize>) -> CliResult<Vec<LoopResult>> {
    let generators = family_of(&ctx.model).map(monodromy::expected_matrices).unwrap_or_default();
    let results: Vec<lagfib_core::Result<LoopResult>> = pool(threads)?.install(|| {
        loops
            .par_iter()
            .map(|lp| {
                let m = monodromy::transport_basis(ctx, h, lp)?;
                let matrix = monodromy::normalize(&ctx.model, &m.entries);
                Ok(LoopResult {
                    label: lp.label.clone(),
                    identified: monodromy::identify(&matrix, &generators),
                    matrix,
                    computed: m.entries,
                    residual: m.residual,
                    raw: m.raw,
                })
            })
            .collect()
    });
    results.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

fn monodromy(
    cfg: &RunConfig,
    name: Option<LoopName>,
    radius: Option<f64>,
    k: usize,
    height: f64,
    h: &str,
    threads: Option<usize>,
) -> CliResult<Output> {
    let model = cfg.model()?;
    let loops = loops_for(&model, name, radius, k, height)?;
    let hd = DeformationH::parse(h, model.n())?;
    let ctx = context(cfg, model)?;
    let results = run_loops(&ctx, &hd, &loops, threads)?;
    let n = model.n();
    let mut header = vec!["loop".to_string()];
    for i in 1..=n {
        header.extend((1..=n).map(|j| format!("m{i}{j}")));
    }
    header.extend(["residual", "identified"].map(String::from));
    let mut table = Table::new(header);
    let mut items = Vec::new();
    for r in &results {
        let mut row: Vec<Cell> = vec![r.label.clone().into()];
        row.extend(r.matrix.0.iter().flatten().map(|&v| Cell::from(v)));
        row.push(r.residual.into());
        row.push(r.identified.clone().unwrap_or_default().into());
        table.push(row);
        items.push(json!({
            "label": r.label,
            "matrix": r.matrix.0,
            "computed_basis_matrix": r.computed.0,
            "raw": r.raw,
            "residual": r.residual,
            "identified_as": r.identified,
            "unipotent": r.matrix.is_unipotent(),
            "det": r.matrix.det(),
        }));
    }
    let basis = if model.is_hl() { "tau1, tau2, -tau3" } else { "tau1, tau2, tau3" };
    let mut result = json!({
        "basis": basis,
        "k": k,
        "loops": items,
    });
    if results.len() == 1 {
        result["matrix"] = json!(results[0].matrix.0);
        result["residual"] = json!(results[0].residual);
    }
    if results.len() == 4 {
        let product = results[1].matrix.mul(&results[2].matrix);
        result["vertex_is_product"] = json!(product == results[3].matrix);
    }
    Ok(Output::new(result, Some(table)))
}

// ---------------------------------------------------------------- flow

fn flow(cfg: &RunConfig, z: &[f64], component: usize, t_end: f64, samples: usize, method: FlowMethod) -> CliResult<Output> {
    let model = cfg.model()?;
    let n = model.n();
    if component == 0 || component > n {
        return Err(CliError::usage(format!("--component must lie in 1..={n}")));
    }
    if samples < 2 || !t_end.is_finite() {
        return Err(CliError::usage("flow needs --samples ≥ 2 and a finite --t"));
    }
    let i = component - 1;
    let p0 = PhasePoint::new(z.to_vec())?;
    model.validate(&p0)?;
    if method == FlowMethod::Closed && !model.has_closed_flow(i) {
        return Err(CliError::usage(format!("F{component} of the {} model has no closed-form flow", model.name())));
    }
    let ode = cfg.ode();
    let f0 = model.eval_f(&p0);
    let dim = model.phase_dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|k| format!("z{k}")));
    header.extend((1..=n).map(|k| format!("F{k}")));
    let mut table = Table::new(header);
    let mut traj = Vec::new();
    let mut drift: f64 = 0.0;
    for k in 0..samples {
        let t = t_end * k as f64 / (samples - 1) as f64;
        let p = match method {
            FlowMethod::Closed => model.flow_closed(i, t, &p0).expect("checked above"),
            FlowMethod::Ode => model.flow_ode(i, t, &p0, &ode)?,
            FlowMethod::Auto => match model.flow_closed(i, t, &p0) {
                Some(p) => p,
                None => model.flow_ode(i, t, &p0, &ode)?,
            },
        };
        let f = model.eval_f(&p);
        drift = drift.max(f.iter().zip(&f0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend(p.coords().iter().map(|&v| Cell::from(v)));
        row.extend(f.iter().map(|&v| Cell::from(v)));
        table.push(row);
        traj.push(json!({"t": t, "z": p.coords(), "F": f}));
    }
    let used = match method {
        FlowMethod::Auto if model.has_closed_flow(i) => "closed",
        FlowMethod::Auto | FlowMethod::Ode => "ode",
        FlowMethod::Closed => "closed",
    };
    let result = json!({
        "component": component,
        "method": used,
        "max_fibre_drift": drift,
        "trajectory": traj,
    });
    Ok(Output::new(result, Some(table)))
}

// ---------------------------------------------------------------- classify

fn classify_cmd(cfg: &RunConfig, h: &str, hp: &str, k_max: usize) -> CliResult<Output> {
    let model = cfg.model()?;
    let pair = DeformationPair::parse(h, hp, model)?;
    let opts = VerdictOptions {
        k_max,
        ..VerdictOptions::default()
    };
    let v = classify::equivalence_verdict_with(&pair, &opts);
    let mut table = Table::new(["index", "order", "exponent", "threshold", "nearest_value", "vanishes", "superpoly"]);
    for r in &v.flatness.rows {
        let idx = r.index.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ");
        table.push(vec![
            idx.into(),
            (r.order as i64).into(),
            r.exponent.unwrap_or(f64::NAN).into(),
            r.threshold.into(),
            r.nearest_value.into(),
            r.vanishes.into(),
            r.superpoly.into(),
        ]);
    }
    let mut result = serde_json::to_value(&v).map_err(|e| CliError::io(e.to_string()))?;
    result["H"] = json!(pair.h.expr().to_string());
    result["Hp"] = json!(pair.hp.expr().to_string());
    result["difference"] = json!(pair.difference().expr().to_string());
    result["scope"] = json!(criteria::CLASSIFICATION_SCOPE);
    Ok(Output::new(result, Some(table)))
}

// ---------------------------------------------------------------- sweep

pub fn eval_quantity(cfg: &RunConfig, model: &FibrationModel, q: Quantity, b: &[f64]) -> lagfib_core::Result<f64> {
    let hl_only = || {
        lagfib_core::Error::InvalidInput(format!("{q:?} is only defined for the hl family").to_lowercase())
    };
    match q {
        Quantity::Dist => Ok(model.base_distance(b)),
        Quantity::Disc => Ok(disc_sample(cfg, model, b.to_vec()).on_delta as i64 as f64),
        Quantity::Alpha if model.is_hl() => periods::alpha_quadrature_with(&BaseParams::from_slice(b)?, &cfg.quad()).map(|r| r.0),
        Quantity::Alpha => classify::singular_alpha(model, b),
        Quantity::Bound if model.is_hl() => periods::alpha_bound(&BaseParams::from_slice(b)?),
        Quantity::Zeta0 if model.is_hl() => poly_geometry::zeta0(&BaseParams::from_slice(b)?),
        Quantity::Bound | Quantity::Zeta0 => Err(hl_only()),
    }
}

fn sweep(
    cfg: &RunConfig,
    q: Quantity,
    axes: (usize, usize),
    ranges: (Range, Range),
    at: Option<&[f64]>,
    random: Option<usize>,
    threads: Option<usize>,
) -> CliResult<Output> {
    let model = cfg.model()?;
    let n = model.n();
    let (xa, ya) = axes;
    if xa == 0 || ya == 0 || xa > n || ya > n || xa == ya {
        return Err(CliError::usage(format!("--x-axis and --y-axis must be distinct and lie in 1..={n}")));
    }
    if !model.is_hl() && matches!(q, Quantity::Bound | Quantity::Zeta0) {
        return Err(CliError::usage("bound and zeta0 are only defined for the hl family"));
    }
    let base = match at {
        Some(v) => b_of(&model, v)?.into_vec(),
        None => vec![0.0; n],
    };
    let place = |x: f64, y: f64| {
        let mut b = base.clone();
        b[xa - 1] = x;
        b[ya - 1] = y;
        b
    };
    let (xr, yr) = ranges;
    let pts: Vec<Vec<f64>> = match random {
        Some(count) => {
            if count > MAX_GRID_POINTS {
                return Err(CliError::usage("too many random points"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let draw = |rng: &mut ChaCha8Rng, r: Range| {
                if r.hi > r.lo {
                    rng.random_range(r.lo..r.hi)
                } else {
                    r.lo
                }
            };
            (0..count)
                .map(|_| {
                    let x = draw(&mut rng, xr);
                    let y = draw(&mut rng, yr);
                    place(x, y)
                })
                .collect()
        }
        None => {
            if xr.count.saturating_mul(yr.count) > MAX_GRID_POINTS {
                return Err(CliError::usage("sweep grid is too large"));
            }
            let ys = yr.values();
            xr.values().iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).map(|(x, y)| place(x, y)).collect()
        }
    };
    let values: Vec<(f64, Option<String>)> = pool(threads)?.install(|| {
        pts.par_iter()
            .map(|b| match eval_quantity(cfg, &model, q, b) {
                Ok(v) => (v, None),
                Err(e) => (f64::NAN, Some(error_class(&e))),
            })
            .collect()
    });
    let qname = format!("{q:?}").to_lowercase();
    let mut header = vec!["index".to_string()];
    header.extend((1..=n).map(|i| format!("b{i}")));
    header.extend([qname.clone(), "error".into()]);
    let mut table = Table::new(header);
    let mut items = Vec::with_capacity(pts.len());
    let mut failures = 0usize;
    for (idx, (b, (v, err))) in pts.iter().zip(&values).enumerate() {
        let mut row: Vec<Cell> = vec![(idx as i64).into()];
        row.extend(b.iter().map(|&x| Cell::from(x)));
        row.push((*v).into());
        row.push(err.clone().unwrap_or_default().into());
        table.push(row);
        failures += err.is_some() as usize;
        items.push(json!({"b": b, "value": v, "error": err}));
    }
    let result = json!({
        "quantity": qname,
        "mode": if random.is_some() { "random" } else { "grid" },
        "count": pts.len(),
        "failures": failures,
        "points": items,
    });
    Ok(Output::new(result, Some(table)))
}

// ---------------------------------------------------------------- check

fn check(cfg: &RunConfig, only: Option<&[u8]>) -> CliResult<Output> {
    let ids: Vec<u8> = match only {
        Some(ids) => {
            if let Some(bad) = ids.iter().find(|i| !criteria::ALL.contains(i)) {
                return Err(CliError::usage(format!("unknown criterion {bad}; valid ids are 1..=11")));
            }
            ids.to_vec()
        }
        None => criteria::ALL.to_vec(),
    };
    let reports = criteria::run_all(&ids, cfg.seed);
    let mut table = Table::new(["id", "criterion", "pass", "measurement", "value", "threshold", "measurement_pass"]);
    for r in &reports {
        for m in &r.measurements {
            table.push(vec![
                (r.id as i64).into(),
                r.name.into(),
                r.pass.into(),
                m.name.clone().into(),
                m.value.into(),
                m.threshold.clone().into(),
                m.pass.into(),
            ]);
        }
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    let result = json!({
        "passed": reports.len() - failed,
        "failed": failed,
        "criteria": reports,
    });
    Ok(Output {
        result,
        table: Some(table),
        failed: failed > 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_row_major() {
        let pts = grid_points(2, &[0.0, 1.0]);
        assert_eq!(pts, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn range_values_hit_endpoints() {
        let v = Range { lo: -1.0, hi: 1.0, count: 11 }.values();
        assert_eq!(v.len(), 11);
        assert_eq!(v[0], -1.0);
        assert_eq!(v[10], 1.0);
        assert!((v[5]).abs() < 1e-15);
    }
}
