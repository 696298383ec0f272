use kahlerflow::closed_form::{self, CurvatureSign, ModeParams, ModeSolution, Regime};
use kahlerflow::cqm::{self, SpectralInputs};
use kahlerflow::flow::{self, FlowParams, PhaseState, Termination};
use kahlerflow::geometry::{self, ChartPoint};
use kahlerflow::sweep::{self, SweepAxis, SweepConfig};
use kahlerflow::{exec, validate, CVector, Error as CoreError, Execution, ManifoldSpec};
use serde_json::{json, Map, Value};

use crate::config::{self, AxisCfg, ClosedFormCfg, CollapseCfg, FlowCfg, GeodesicCfg, LimitCfg, SweepCfg};
use crate::error::CliError;
use crate::output::{complex_columns, push_complex, Cell, Outcome, Table};

fn meta(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(config::VERSION));
    m
}

fn termination_label(t: Termination) -> &'static str {
    match t {
        Termination::Completed => "Completed",
        Termination::BoundaryGuard => "BoundaryGuard",
        Termination::PoleOfChart => "PoleOfChart",
        Termination::StepFailure => "StepFailure",
    }
}

fn stride(n: usize) -> Result<usize, CliError> {
    if n == 0 {
        return Err(CliError::Config("sample_stride must be at least 1".into()));
    }
    Ok(n)
}

/// Every `step`-th index of `0..len`, always including the last one.
fn strided(len: usize, step: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).step_by(step).collect();
    if len > 0 && idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

/// Earliest time at which a positively curved block of the geodesic
/// reaches the pole of the chart.
fn first_pole(spec: &ManifoldSpec, u: &CVector) -> Option<f64> {
    spec.blocks()
        .into_iter()
        .filter(|b| b.c > 0.0)
        .filter_map(|b| {
            let speed = b.range().map(|i| u[i].norm_sqr()).sum::<f64>().sqrt();
            (speed > 0.0).then(|| std::f64::consts::FRAC_PI_2 / (b.c.sqrt() * speed))
        })
        .min_by(f64::total_cmp)
}

pub fn geodesic(cfg: &GeodesicCfg) -> Result<Outcome, CliError> {
    let spec = cfg.manifold.spec();
    spec.validate()?;
    let u = config::complex_vec(&cfg.u);
    if u.len() != spec.dim() {
        return Err(CoreError::DimensionMismatch { expected: spec.dim(), found: u.len() }.into());
    }
    let times = cfg.time.points()?;
    let mut cols = vec!["t".to_owned()];
    cols.extend(complex_columns("z", spec.dim()));
    cols.push("speed_sq".into());
    let mut table = Table::new(cols);

    let mut termination = Termination::Completed;
    let mut t_stop = None;
    let t_pole = first_pole(&spec, &u);
    for i in strided(times.len(), stride(cfg.output.sample_stride)?) {
        let t = times[i];
        if t_pole.is_some_and(|tp| t >= tp) {
            termination = Termination::PoleOfChart;
            t_stop = t_pole;
            break;
        }
        let (z, dz, _) = match geometry::geodesic_jet(&spec, &u, t) {
            Ok(v) => v,
            Err(CoreError::PoleOfChart { .. }) => {
                termination = Termination::PoleOfChart;
                t_stop = Some(t);
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let g = geometry::metric(&spec, &ChartPoint { z: z.clone() })?.g;
        let mut row = vec![Cell::Num(t)];
        push_complex(&mut row, z.iter().copied());
        row.push(Cell::Num(geometry::squared_speed(&g, &dz)));
        table.push(row);
    }

    let mut m = meta("geodesic");
    m.insert("termination".into(), json!(termination_label(termination)));
    m.insert("pole_time".into(), json!(t_stop));
    m.insert("rows".into(), json!(table.rows.len()));
    let exit = if termination == Termination::Completed { 0 } else { 3 };
    Ok(Outcome { table, meta: m, exit })
}

pub fn flow(cfg: &FlowCfg) -> Result<Outcome, CliError> {
    let spec = cfg.manifold.spec();
    let mag = cfg.magnetic.spec();
    let xi = config::complex_vec(&cfg.xi);
    let mut params = FlowParams::new(spec.clone(), mag, cfg.time.dt, cfg.time.t_end);
    params.method = cfg.method.method();
    params.sample_every = stride(cfg.output.sample_stride)?;
    if let Some(r) = cfg.stop_radius {
        params.stop_radius = r;
    }
    params.validate()?;
    if xi.len() != spec.dim() {
        return Err(CoreError::DimensionMismatch { expected: spec.dim(), found: xi.len() }.into());
    }
    let traj = flow::integrate(&PhaseState::at_origin(xi), &params)?;

    let m_dim = spec.dim();
    let mut cols = vec!["t".to_owned()];
    cols.extend(complex_columns("z", m_dim));
    cols.extend(complex_columns("psi", m_dim));
    cols.extend(["energy".to_owned(), "norm_sq".to_owned()]);
    let mut table = Table::new(cols);
    for ((s, e), n) in traj.samples.iter().zip(&traj.energy_series).zip(&traj.norm_series) {
        let mut row = vec![Cell::Num(s.t)];
        push_complex(&mut row, s.z.iter().copied());
        push_complex(&mut row, s.psi.iter().copied());
        row.push(Cell::Num(*e));
        row.push(Cell::Num(*n));
        table.push(row);
    }

    let mut m = meta("flow");
    m.insert("termination".into(), json!(termination_label(traj.termination)));
    m.insert("t_final".into(), json!(traj.last().t));
    m.insert("energy_drift".into(), json!(traj.energy_drift()));
    m.insert("norm_drift".into(), json!(traj.norm_drift()));
    m.insert("richardson_error".into(), json!(traj.richardson_error));
    m.insert("rows".into(), json!(table.rows.len()));
    let exit = if traj.termination == Termination::Completed { 0 } else { 3 };
    if exit != 0 {
        log::warn!("flow stopped at t = {} ({})", traj.last().t, termination_label(traj.termination));
    }
    Ok(Outcome { table, meta: m, exit })
}

fn regime_meta(m: &mut Map<String, Value>, solution: &ModeSolution) {
    let r = &solution.report;
    m.insert("k".into(), json!(r.k));
    m.insert("regime".into(), json!(r.regime.label()));
    m.insert("omega_or_mu".into(), json!(r.omega_or_mu));
    m.insert("period".into(), json!(r.period));
    m.insert("blowup_time".into(), json!(r.blowup_time));
    m.insert("orbit_length".into(), json!(r.orbit_length));
}

pub fn closed_form(cfg: &ClosedFormCfg, exec: Execution) -> Result<Outcome, CliError> {
    let spec = cfg.manifold.spec();
    let params = ModeParams::from_flow(&spec, &cfg.magnetic.spec(), config::complex_vec(&cfg.xi))?;
    let solution = ModeSolution::new(params)?;
    let regime = solution.regime();
    let p = &solution.params;
    if cfg.limit == LimitCfg::Auto && regime == Regime::Critical {
        return Err(CoreError::CriticalRegime { k: solution.report.k }.into());
    }
    if cfg.limit == LimitCfg::Critical && p.sign != CurvatureSign::Negative {
        return Err(CliError::Config("the critical solution needs negative curvature".into()));
    }
    let polar = p.sign == CurvatureSign::Positive && regime == Regime::Quantum && cfg.limit == LimitCfg::Auto;
    let gap = p.sign == CurvatureSign::Negative && p.qh() != 0.0 && cfg.limit == LimitCfg::Auto;

    let times = cfg.time.points()?;
    let keep = strided(times.len(), stride(cfg.output.sample_stride)?);
    let rows = exec::map(exec, &keep, |&i| -> Result<Vec<Cell>, CoreError> {
        let t = times[i];
        let (z, psi) = match cfg.limit {
            LimitCfg::Auto => solution.eval(t)?,
            LimitCfg::Schrodinger => closed_form::limit_schrodinger(p, t)?,
            LimitCfg::Geodesic => closed_form::limit_geodesic(p, t)?,
            LimitCfg::Critical => closed_form::critical_solution(p, t)?,
        };
        let mut row = vec![Cell::Num(t)];
        push_complex(&mut row, z.iter().copied());
        push_complex(&mut row, psi.iter().copied());
        if polar {
            let (r, chi) = closed_form::polar_reduction(p, t)?;
            row.extend([Cell::Num(r), Cell::Num(chi)]);
        }
        if gap {
            row.push(Cell::Num(closed_form::boundary_gap(p, t)?));
        }
        Ok(row)
    });

    let n = p.xi.len();
    let mut cols = vec!["t".to_owned()];
    cols.extend(complex_columns("z", n));
    cols.extend(complex_columns("psi", n));
    if polar {
        cols.extend(["r".to_owned(), "chi".to_owned()]);
    }
    if gap {
        cols.push("boundary_gap".into());
    }
    let mut table = Table::new(cols);
    for row in rows {
        table.push(row?);
    }

    let mut m = meta("closed-form");
    regime_meta(&mut m, &solution);
    m.insert("limit".into(), json!(format!("{:?}", cfg.limit).to_lowercase()));
    m.insert("rows".into(), json!(table.rows.len()));
    Ok(Outcome { table, meta: m, exit: 0 })
}

pub fn sweep(cfg: &SweepCfg, exec: Execution) -> Result<Outcome, CliError> {
    let points = match (&cfg.range, &cfg.values) {
        (Some(r), None) => {
            if matches!(cfg.axis, AxisCfg::Radius) && r.exclude != 0.0 {
                return Err(CliError::Config("exclude only applies to the k axis".into()));
            }
            sweep::k_grid(r.start, r.stop, r.step, r.exclude)?
        }
        (None, Some(v)) if !v.is_empty() => v.clone(),
        _ => return Err(CliError::Config("give exactly one of \"range\" or a non-empty \"values\"".into())),
    };
    let axis = match cfg.axis {
        AxisCfg::K => SweepAxis::K(points),
        AxisCfg::Radius => SweepAxis::Radius(points),
    };
    let sc = SweepConfig { sign: cfg.sign.sign(), q: cfg.q, h: cfg.h, xi_abs: cfg.xi_abs, t_probe: cfg.t_probe };
    let rows = sweep::sweep(&sc, &axis, exec)?;

    let mut table = Table::new(["k", "radius", "regime", "omega_or_mu", "period", "l2_at_probe"]);
    for r in rows.iter().step_by(stride(cfg.output.sample_stride)?) {
        table.push(vec![r.k.into(), r.radius.into(), r.regime.label().into(), r.omega_or_mu.into(), r.period.into(), r.l2_at_probe.into()]);
    }
    let mut m = meta("sweep");
    m.insert("points".into(), json!(rows.len()));
    m.insert("regime_flips".into(), json!(sweep::regime_flips(&rows)));
    Ok(Outcome { table, meta: m, exit: 0 })
}

pub fn collapse(cfg: &CollapseCfg, exec: Execution) -> Result<Outcome, CliError> {
    let s = &cfg.system;
    let mass_big_m = match (&cfg.planck, s.mass_big_m) {
        (Some(p), None) => cqm::planck_mass(s.hbar, p.g, p.c)?,
        (None, Some(m)) => m,
        (Some(_), Some(_)) => return Err(CliError::Config("give either system.mass_M or planck, not both".into())),
        (None, None) => return Err(CliError::Config("one of system.mass_M or planck is required".into())),
    };
    let inputs = SpectralInputs {
        eigenvalues: s.eigenvalues.clone(),
        xi: s.xi.iter().map(|[re, im]| kahlerflow::C64::new(*re, *im)).collect(),
        hbar: s.hbar,
        mass_m: s.mass_m,
        mass_big_m,
        radii_override: s.radii.clone(),
    };
    let sys = cqm::build(inputs)?;
    let report = cqm::collapse_report(&sys);

    let per_mode: Vec<Value> = report
        .per_mode
        .iter()
        .map(|e| json!({ "mode": e.index + 1, "k": e.k, "regime": e.regime.label(), "rate": e.rate, "radius": sys.radii[e.index] }))
        .collect();
    let mut m = meta("collapse");
    m.insert("mass_M".into(), json!(mass_big_m));
    m.insert("per_mode".into(), Value::Array(per_mode));
    m.insert("dominant_mode".into(), json!(report.dominant_mode.map(|j| j + 1)));
    m.insert("tau_c".into(), json!(report.tau_c));
    m.insert("verdict".into(), json!(report.verdict.label()));
    m.insert("threshold_consistent".into(), json!(report.threshold_consistent));
    if let Some(p) = &cfg.planck {
        m.insert("planck_k".into(), json!(cqm::planck_mass_k(&sys.inputs.xi, s.mass_m, s.hbar, p.g, p.c)?));
    }

    let n = sys.len();
    let mut cols = vec!["t".to_owned()];
    cols.extend((1..=n).map(|j| format!("abs_psi{j}")));
    cols.extend(["l2".to_owned(), "geometric".to_owned()]);
    let mut table = Table::new(cols);

    if let Some(e) = report.per_mode.iter().find(|e| e.regime == Regime::Critical) {
        m.insert("error".into(), json!(format!("mode {} is critical (k = {})", e.index + 1, e.k)));
        return Ok(Outcome { table, meta: m, exit: 4 });
    }

    let times = cfg.time.points()?;
    let keep: Vec<f64> = strided(times.len(), stride(cfg.output.sample_stride)?).into_iter().map(|i| times[i]).collect();
    let series = cqm::evolve_series(&sys, &keep, exec)?;
    let norms: Vec<Result<(f64, f64), CoreError>> = exec::map(exec, &keep, |&t| cqm::norms(&sys, t));
    for ((t, (_, psi)), nrm) in keep.iter().zip(&series).zip(norms) {
        let (l2, geo) = nrm?;
        let mut row = vec![Cell::Num(*t)];
        row.extend(psi.iter().map(|p| Cell::Num(p.norm())));
        row.extend([Cell::Num(l2), Cell::Num(geo)]);
        table.push(row);
    }
    m.insert("rows".into(), json!(table.rows.len()));
    Ok(Outcome { table, meta: m, exit: 0 })
}

pub fn validate(seed: u64) -> Result<Outcome, CliError> {
    let checks = validate::run_suite(seed)?;
    let mut table = Table::new(["check", "value", "tolerance", "passed"]);
    for c in &checks {
        table.push(vec![Cell::Text(c.name.clone()), c.value.into(), c.tolerance.into(), if c.passed { "true" } else { "false" }.into()]);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let mut m = meta("validate");
    m.insert("seed".into(), json!(seed));
    m.insert("checks".into(), json!(checks.len()));
    m.insert("failed".into(), json!(failed));
    Ok(Outcome { table, meta: m, exit: if failed == 0 { 0 } else { 3 } })
}
