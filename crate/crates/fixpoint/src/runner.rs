//! Experiment execution: builds operators from a config, runs the solvers and
//! writes one CSV per solver plus `manifest.json`.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use fixpoint_core::analysis::{ppm_uniform_bounds, restarted_bound};
use fixpoint_core::lowerbound::lower_bound_value;
use fixpoint_core::problems::{rotation_contraction, toy_monotone};
use fixpoint_core::restart::{make_schedule, restarted_oc_halpern, restarted_os_ppm, schedule_from_scale, RestartSchedule};
use fixpoint_core::solvers::{halpern, km, oc_halpern, ohm, os_ppm, os_ppm_anchored, picard, ppm};
use fixpoint_core::{FixedPointMap, IterationTrace, MetricMatrix, NormKind, Point, Probe, ResolventOracle};
use serde_json::{json, Map, Value};

use crate::apps::ct::CtProblem;
use crate::apps::emd::{default_tau, GridMeasurePair};
use crate::apps::network::{pg_extra, NetworkProblem, SensingSetup};
use crate::config::{Experiment, LoadedConfig, NormChoice, SolverKind};
use crate::instance::{self, matrix_to_rows, EmdInstance, Instance};
use crate::output::{trace_csv, write_file};
use crate::{Error, Result};

/// Restart scale (lambda, beta) used by the application experiments when the
/// config does not set one.
pub const CT_SCHEDULE: (f64, f64) = (2.0, 0.2);
pub const EMD_SCHEDULE: (f64, f64) = (10.0, 0.5);
pub const PGEXTRA_SCHEDULE: (f64, f64) = (2.0, 0.25);
const GENERIC_SCHEDULE: (f64, f64) = (2.0, 0.5);

struct FixedSetup {
    map: Box<dyn FixedPointMap>,
    gamma: f64,
    y0: Point,
    solution: Option<Point>,
    metric: Option<Box<dyn MetricMatrix>>,
}

struct ProxSetup {
    oracle: Box<dyn ResolventOracle>,
    mu: f64,
    y0: Point,
    solution: Option<Point>,
    /// (mu, alpha) of a uniformly monotone operator with zero at the origin.
    uniform: Option<(f64, f64)>,
}

/// Everything an experiment needs before solvers run.
pub struct Prepared {
    fixed: Option<FixedSetup>,
    prox: Option<ProxSetup>,
    steps: usize,
    default_solvers: Vec<SolverKind>,
    schedule_scale: Option<(f64, f64)>,
    params: Map<String, Value>,
}

/// Outcome of `run`.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: Value,
}

struct Resolver<'a> {
    lc: &'a LoadedConfig,
    params: Map<String, Value>,
}

impl<'a> Resolver<'a> {
    fn real(&mut self, field: &'static str, value: Option<f64>, default: f64, check: fn(f64) -> bool, what: &str) -> Result<f64> {
        let v = value.unwrap_or(default);
        if !v.is_finite() || !check(v) {
            return Err(self.lc.error(field, format!("{v} {what}")));
        }
        self.params.insert(field.into(), json!(v));
        Ok(v)
    }

    fn positive(&mut self, field: &'static str, value: Option<f64>, default: f64) -> Result<f64> {
        self.real(field, value, default, |v| v > 0.0, "must be > 0")
    }

    fn count(&mut self, field: &'static str, value: Option<usize>, default: usize, min: usize) -> Result<usize> {
        let v = value.unwrap_or(default);
        if v < min {
            return Err(self.lc.error(field, format!("{v} must be >= {min}")));
        }
        self.params.insert(field.into(), json!(v));
        Ok(v)
    }
}

fn fixed_only() -> Vec<SolverKind> {
    vec![SolverKind::Picard, SolverKind::Ohm, SolverKind::RestartedOcHalpern]
}

/// Builds operators and resolves every default for the configured experiment.
pub fn prepare(lc: &LoadedConfig) -> Result<Prepared> {
    let c = &lc.config;
    let exp = c.experiment.ok_or_else(|| lc.error("experiment", "is required"))?;
    let mut r = Resolver {
        lc,
        params: Map::new(),
    };
    let mut prepared = Prepared {
        fixed: None,
        prox: None,
        steps: 0,
        default_solvers: fixed_only(),
        schedule_scale: None,
        params: Map::new(),
    };
    match exp {
        Experiment::Toy2d => {
            let total = r.count("iterations", c.iterations, 101, 2)?;
            let theta = r.real("theta_deg", c.theta_deg, 15.0, |_| true, "")?;
            let gamma = r.real("gamma", c.gamma, 1.0 / 0.95, |g| g >= 1.0, "must be >= 1")?;
            let mu = r.real("mu", c.mu, 0.035, |m| m >= 0.0, "must be >= 0")?;
            let y0 = Point::from(vec![1.0, 0.0]);
            prepared.steps = total - 1;
            prepared.fixed = Some(FixedSetup {
                map: Box::new(rotation_contraction(theta.to_radians(), gamma)?),
                gamma,
                y0: y0.clone(),
                solution: Some(Point::zeros(2)),
                metric: None,
            });
            prepared.prox = Some(ProxSetup {
                oracle: Box::new(toy_monotone(mu, total)?),
                mu,
                y0,
                solution: Some(Point::zeros(2)),
                uniform: None,
            });
            prepared.default_solvers = vec![
                SolverKind::Picard,
                SolverKind::Halpern,
                SolverKind::OcHalpern,
                SolverKind::Ppm,
                SolverKind::Appm,
                SolverKind::OsPpm,
            ];
        }
        Experiment::Worstcase => {
            let n = r.count("iterations", c.iterations, 10, 1)?;
            let gamma = r.real("gamma", c.gamma, 1.05, |g| g >= 1.0, "must be >= 1")?;
            let radius = r.positive("radius", c.radius, 1.0)?;
            let w = instance::worst_case(n, gamma, radius, &vec![0.0; n + 1])?;
            let lb = lower_bound_value(n, gamma, radius);
            r.params.insert("lower_bound".into(), json!(lb));
            prepared.steps = n;
            prepared.fixed = Some(FixedSetup {
                y0: w.y0.clone(),
                solution: Some(w.y_star.clone()),
                map: Box::new(w),
                gamma,
                metric: None,
            });
            prepared.default_solvers = vec![SolverKind::Picard, SolverKind::Halpern, SolverKind::OcHalpern];
        }
        Experiment::RestartPower => {
            let n = r.count("iterations", c.iterations, 2000, 2)?;
            let mu = r.positive("mu", c.mu, 1.0)?;
            let alpha = r.real("alpha", c.alpha, 2.0, |a| a > 1.0, "must be > 1")?;
            let dim = r.count("dim", c.dim, 5, 1)?;
            let radius = r.positive("radius", c.radius, 1.0)?;
            let y0 = seeded_direction(dim, c.seed, radius);
            prepared.steps = n;
            prepared.prox = Some(ProxSetup {
                oracle: Box::new(fixpoint_core::problems::power_monotone(mu, alpha, dim)?),
                mu: 0.0,
                y0,
                solution: Some(Point::zeros(dim)),
                uniform: Some((mu, alpha)),
            });
            prepared.default_solvers = vec![SolverKind::Ppm, SolverKind::Appm, SolverKind::RestartedOsPpm];
        }
        Experiment::Ct => {
            prepared.steps = r.count("iterations", c.iterations, 1000, 1)?;
            let p = ct_problem(&mut r)?;
            let (op, metric) = p.build()?;
            prepared.fixed = Some(app_setup(&mut r, Box::new(op), Box::new(metric), NormChoice::Metric)?);
            prepared.schedule_scale = Some(CT_SCHEDULE);
        }
        Experiment::Emd => {
            prepared.steps = r.count("iterations", c.iterations, 2000, 1)?;
            let inst = emd_instance(&mut r)?;
            let op = inst.build()?;
            let metric = op.metric();
            prepared.fixed = Some(app_setup(&mut r, Box::new(op), Box::new(metric), NormChoice::Metric)?);
            prepared.schedule_scale = Some(EMD_SCHEDULE);
        }
        Experiment::Pgextra => {
            prepared.steps = r.count("iterations", c.iterations, 100, 1)?;
            let p = network_problem(&mut r)?;
            let op = pg_extra(p)?;
            let metric = op.metric()?;
            prepared.fixed = Some(app_setup(&mut r, Box::new(op), Box::new(metric), NormChoice::Euclidean)?);
            prepared.schedule_scale = Some(PGEXTRA_SCHEDULE);
        }
        Experiment::Custom => {
            let path = c.instance.clone().ok_or_else(|| lc.error("instance", "is required for custom experiments"))?;
            let path = match lc.path.parent() {
                Some(dir) if path.is_relative() => dir.join(path),
                _ => path,
            };
            let inst = Instance::load(&path)?;
            r.params.insert("instance_kind".into(), json!(inst.kind()));
            prepared.steps = r.count("iterations", c.iterations, 100, 1)?;
            custom_setup(&mut r, &mut prepared, inst)?;
        }
    }
    prepared.params = r.params;
    Ok(prepared)
}

fn seeded_direction(dim: usize, seed: u64, radius: f64) -> Point {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Point::from(v.into_iter().map(|x| radius * x / nrm).collect::<Vec<_>>())
}

fn ct_problem(r: &mut Resolver<'_>) -> Result<CtProblem> {
    let c = &r.lc.config;
    let size = r.count("image_size", c.image_size, 32, 2)?;
    let angles = r.count("n_angles", c.n_angles, 16, 1)?;
    let a = r.positive("pdhg_alpha", c.pdhg_alpha, 0.01)?;
    let b = r.positive("pdhg_beta", c.pdhg_beta, 0.03)?;
    let l = r.real("lambda_reg", c.lambda_reg, 1.0, |v| v >= 0.0, "must be >= 0")?;
    Ok(CtProblem::shepp_logan(size, angles, a, b, l))
}

fn emd_instance(r: &mut Resolver<'_>) -> Result<EmdInstance> {
    let c = &r.lc.config;
    let n = r.count("grid_size", c.grid_size, 32, 2)?;
    let mu = r.positive("emd_mu", c.emd_mu, 1e-6)?;
    let eps = r.real("epsilon", c.epsilon, 1.0, |v| v >= 0.0, "must be >= 0")?;
    let tau = r.positive("tau", c.tau, default_tau(mu))?;
    Ok(EmdInstance {
        measures: GridMeasurePair::two_circles(n)?,
        mu,
        epsilon: eps,
        tau,
    })
}

fn network_problem(r: &mut Resolver<'_>) -> Result<NetworkProblem> {
    let c = &r.lc.config;
    let d = SensingSetup::default();
    let setup = SensingSetup {
        nodes: r.count("nodes", c.nodes, d.nodes, 1)?,
        edges: r.count("edges", c.edges, d.edges, 0)?,
        dim: r.count("signal_dim", c.signal_dim, d.dim, 1)?,
        sparsity: r.count("sparsity", c.sparsity, d.sparsity, 0)?,
        sensors_per_node: r.count("sensors_per_node", c.sensors_per_node, d.sensors_per_node, 1)?,
        alpha: r.positive("step_size", c.step_size, d.alpha)?,
        lambda: r.real("lambda_reg", c.lambda_reg, d.lambda, |v| v >= 0.0, "must be >= 0")?,
        noise: r.real("noise", c.noise, d.noise, |v| v >= 0.0, "must be >= 0")?,
        seed: c.seed,
    };
    NetworkProblem::compressed_sensing(&setup)
}

fn app_setup(
    r: &mut Resolver<'_>,
    map: Box<dyn FixedPointMap>,
    metric: Box<dyn MetricMatrix>,
    default_norm: NormChoice,
) -> Result<FixedSetup> {
    let norm = r.lc.config.norm.unwrap_or(default_norm);
    r.params.insert("norm".into(), json!(norm));
    let y0 = Point::zeros(map.dim());
    Ok(FixedSetup {
        map,
        gamma: 1.0,
        y0,
        solution: None,
        metric: (norm == NormChoice::Metric).then_some(metric),
    })
}

fn custom_setup(r: &mut Resolver<'_>, p: &mut Prepared, inst: Instance) -> Result<()> {
    match inst {
        Instance::Linear { matrix, gamma, y0 } => {
            let (map, y0) = instance::linear_map(&matrix, gamma, &y0)?;
            p.fixed = Some(FixedSetup {
                map: Box::new(map),
                gamma,
                y0,
                solution: None,
                metric: None,
            });
            p.default_solvers = vec![SolverKind::Picard, SolverKind::Halpern, SolverKind::OcHalpern];
        }
        Instance::Monotone { matrix, mu, y0 } => {
            let (oracle, y0) = instance::monotone(&matrix, mu, &y0)?;
            let dim = y0.dim();
            p.prox = Some(ProxSetup {
                oracle: Box::new(oracle),
                mu,
                y0,
                solution: Some(Point::zeros(dim)),
                uniform: None,
            });
            p.default_solvers = vec![SolverKind::Ppm, SolverKind::Appm, SolverKind::OsPpm];
        }
        Instance::Power { mu, alpha, dim, y0 } => {
            let (oracle, y0) = instance::power(mu, alpha, dim, &y0)?;
            p.prox = Some(ProxSetup {
                oracle: Box::new(oracle),
                mu: 0.0,
                y0,
                solution: Some(Point::zeros(dim)),
                uniform: Some((mu, alpha)),
            });
            p.default_solvers = vec![SolverKind::Ppm, SolverKind::Appm, SolverKind::RestartedOsPpm];
        }
        Instance::WorstCase {
            horizon,
            gamma,
            radius,
            y0,
        } => {
            let w = instance::worst_case(horizon, gamma, radius, &y0)?;
            r.params.insert("lower_bound".into(), json!(lower_bound_value(horizon, gamma, radius)));
            p.fixed = Some(FixedSetup {
                y0: w.y0.clone(),
                solution: Some(w.y_star.clone()),
                map: Box::new(w),
                gamma,
                metric: None,
            });
            p.default_solvers = vec![SolverKind::Picard, SolverKind::Halpern, SolverKind::OcHalpern];
        }
        Instance::Ct(ct) => {
            let (op, metric) = ct.build()?;
            p.fixed = Some(app_setup(r, Box::new(op), Box::new(metric), NormChoice::Metric)?);
            p.schedule_scale = Some(CT_SCHEDULE);
        }
        Instance::Emd(e) => {
            let op = e.build()?;
            let metric = op.metric();
            p.fixed = Some(app_setup(r, Box::new(op), Box::new(metric), NormChoice::Metric)?);
            p.schedule_scale = Some(EMD_SCHEDULE);
        }
        Instance::Network(np) => {
            let op = pg_extra(np)?;
            let metric = op.metric()?;
            p.fixed = Some(app_setup(r, Box::new(op), Box::new(metric), NormChoice::Euclidean)?);
            p.schedule_scale = Some(PGEXTRA_SCHEDULE);
        }
    }
    Ok(())
}

/// Wraps an operator and timestamps every evaluation.
struct Timed<T> {
    inner: T,
    start: Instant,
    stamps: Mutex<Vec<u64>>,
}

impl<T> Timed<T> {
    fn new(inner: T) -> Self {
        Timed {
            inner,
            start: Instant::now(),
            stamps: Mutex::new(Vec::new()),
        }
    }

    fn stamp(&self) {
        let ns = self.start.elapsed().as_nanos() as u64;
        self.stamps.lock().unwrap().push(ns);
    }
}

impl<T: FixedPointMap> FixedPointMap for Timed<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }
    fn apply(&self, y: &Point) -> fixpoint_core::Result<Point> {
        let out = self.inner.apply(y);
        self.stamp();
        out
    }
}

impl<T: ResolventOracle> ResolventOracle for Timed<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn mu(&self) -> f64 {
        self.inner.mu()
    }
    fn resolve(&self, y: &Point) -> fixpoint_core::Result<Point> {
        let out = self.inner.resolve(y);
        self.stamp();
        out
    }
}

/// One finished solver run.
pub struct SolverRun {
    pub kind: SolverKind,
    pub trace: IterationTrace,
    pub wall_ns: Option<Vec<u64>>,
    pub schedule: Option<RestartSchedule>,
}

fn schedule_for(p: &Prepared, lc: &LoadedConfig, y0: &Point, uniform: Option<(f64, f64)>) -> Result<RestartSchedule> {
    let c = &lc.config;
    match (c.restart_lambda, c.restart_beta) {
        (Some(l), Some(b)) => Ok(schedule_from_scale(l, b, p.steps).map_err(|e| lc.error("restart_lambda", e))?),
        (None, None) => {
            if let Some((mu, alpha)) = uniform {
                let d0 = y0.norm();
                return Ok(make_schedule(mu, alpha, d0, p.steps)?);
            }
            let (l, b) = p.schedule_scale.unwrap_or(GENERIC_SCHEDULE);
            Ok(schedule_from_scale(l, b, p.steps)?)
        }
        (Some(_), None) => Err(lc.error("restart_lambda", "needs `restart_beta` as well")),
        (None, Some(_)) => Err(lc.error("restart_beta", "needs `restart_lambda` as well")),
    }
}

fn run_fixed(kind: SolverKind, s: &FixedSetup, steps: usize, km_lambda: f64, schedule: Option<&RestartSchedule>, timing: bool) -> Result<SolverRun> {
    let timed = Timed::new(&s.map);
    let mut probe = match &s.solution {
        Some(x) => Probe::with_solution(x),
        None => Probe::none(),
    };
    if let Some(m) = &s.metric {
        probe = probe.metric(m.as_ref());
    }
    let t = &timed;
    let trace = match kind {
        SolverKind::Picard => picard(t, &s.y0, steps, &probe)?,
        SolverKind::Km => km(t, &s.y0, |_| km_lambda, steps, &probe)?,
        SolverKind::Halpern => halpern(t, &s.y0, |k| 1.0 / (k as f64 + 2.0), steps, &probe)?,
        SolverKind::Ohm => ohm(t, &s.y0, steps, &probe)?,
        SolverKind::OcHalpern => oc_halpern(t, s.gamma, &s.y0, steps, &probe)?,
        SolverKind::RestartedOcHalpern => restarted_oc_halpern(t, &s.y0, schedule.expect("schedule"), &probe)?,
        _ => unreachable!("proximal solver on a fixed-point setup"),
    };
    Ok(SolverRun {
        kind,
        trace,
        wall_ns: timing.then(|| timed.stamps.into_inner().unwrap()),
        schedule: schedule.cloned(),
    })
}

fn run_prox(kind: SolverKind, s: &ProxSetup, steps: usize, schedule: Option<&RestartSchedule>, timing: bool) -> Result<SolverRun> {
    let timed = Timed::new(&s.oracle);
    let probe = match &s.solution {
        Some(x) => Probe::with_solution(x),
        None => Probe::none(),
    };
    let a = &timed;
    let trace = match kind {
        SolverKind::OsPpm => os_ppm(a, s.mu, &s.y0, steps, &probe)?,
        SolverKind::OsPpmAnchored => os_ppm_anchored(a, s.mu, &s.y0, steps, &probe)?,
        SolverKind::Appm => os_ppm(a, 0.0, &s.y0, steps, &probe)?,
        SolverKind::Ppm => ppm(a, &s.y0, steps, &probe)?,
        SolverKind::RestartedOsPpm => restarted_os_ppm(a, &s.y0, schedule.expect("schedule"), &probe)?,
        _ => unreachable!("fixed-point solver on a proximal setup"),
    };
    // record 0 is the start, record k follows the k-th resolvent call
    let wall = timing.then(|| {
        let mut w = vec![0];
        w.extend(timed.stamps.into_inner().unwrap());
        w
    });
    Ok(SolverRun {
        kind,
        trace,
        wall_ns: wall,
        schedule: schedule.cloned(),
    })
}

/// Runs the configured solvers concurrently. Results keep the configured order.
pub fn execute(lc: &LoadedConfig, p: &Prepared) -> Result<Vec<SolverRun>> {
    let c = &lc.config;
    let solvers = c.solvers.clone().unwrap_or_else(|| p.default_solvers.clone());
    let km_lambda = c.km_lambda.unwrap_or(0.5);
    if !(km_lambda > 0.0 && km_lambda < 1.0) {
        return Err(lc.error("km_lambda", format!("{km_lambda} must lie in (0, 1)")));
    }
    for (i, s) in solvers.iter().enumerate() {
        if solvers[..i].contains(s) {
            return Err(lc.error("solvers", format!("`{}` is listed twice", s.name())));
        }
        let ok = if s.is_fixed_point() { p.fixed.is_some() } else { p.prox.is_some() };
        if !ok {
            return Err(lc.error("solvers", format!("`{}` does not apply to this experiment", s.name())));
        }
    }
    let mut schedules = Vec::new();
    for s in &solvers {
        schedules.push(match s {
            SolverKind::RestartedOcHalpern => {
                let f = p.fixed.as_ref().unwrap();
                Some(schedule_for(p, lc, &f.y0, None)?)
            }
            SolverKind::RestartedOsPpm => {
                let x = p.prox.as_ref().unwrap();
                let shift = match &x.solution {
                    Some(z) => &x.y0 - z,
                    None => x.y0.clone(),
                };
                Some(schedule_for(p, lc, &shift, x.uniform)?)
            }
            _ => None,
        });
    }
    let timing = c.record_timing;
    let results: Vec<Result<SolverRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = solvers
            .iter()
            .zip(&schedules)
            .map(|(&kind, sched)| {
                scope.spawn(move || {
                    if kind.is_fixed_point() {
                        run_fixed(kind, p.fixed.as_ref().unwrap(), p.steps, km_lambda, sched.as_ref(), timing)
                    } else {
                        run_prox(kind, p.prox.as_ref().unwrap(), p.steps, sched.as_ref(), timing)
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    results.into_iter().collect()
}

fn norm_name(n: NormKind) -> &'static str {
    match n {
        NormKind::Euclidean => "euclidean",
        NormKind::Metric => "metric",
    }
}

/// `run <config>`: executes and writes CSVs and the manifest.
pub fn run(lc: &LoadedConfig) -> Result<RunSummary> {
    let p = prepare(lc)?;
    let runs = execute(lc, &p)?;
    let dir = lc.output_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for run in &runs {
        let name = run.kind.name();
        let bound: Option<Box<dyn Fn(usize) -> Option<f64>>> = match (&p.prox, run.kind) {
            (Some(x), SolverKind::Ppm) if x.uniform.is_some() => {
                let (mu, alpha) = x.uniform.unwrap();
                let d0 = x.y0.norm();
                Some(Box::new(move |k| if k == 0 { None } else { ppm_uniform_bounds(k, mu, alpha, d0).ok().map(|b| b.1) }))
            }
            _ => None,
        };
        let csv = trace_csv(&run.trace, bound.as_deref(), run.wall_ns.as_deref());
        let file = dir.join(format!("{name}.csv"));
        write_file(&file, &csv)?;
        files.push(file);
        let mut e = Map::new();
        e.insert("name".into(), json!(name));
        e.insert("file".into(), json!(format!("{name}.csv")));
        e.insert("records".into(), json!(run.trace.len()));
        e.insert("norm".into(), json!(norm_name(run.trace.norm)));
        e.insert("final_residual_sq".into(), json!(run.trace.final_residual_sq()));
        if let Some(s) = &run.schedule {
            e.insert("restart_lambda".into(), json!(s.lambda));
            e.insert("restart_beta".into(), json!(s.beta));
            e.insert("inner_counts".into(), json!(s.inner_counts));
        }
        entries.push(Value::Object(e));
    }
    let mut manifest = Map::new();
    let exp = lc.config.experiment.unwrap();
    manifest.insert("experiment".into(), json!(exp.name()));
    manifest.insert("seed".into(), json!(lc.config.seed));
    manifest.insert("steps".into(), json!(p.steps));
    manifest.insert("parameters".into(), Value::Object(p.params.clone()));
    manifest.insert("solvers".into(), Value::Array(entries));
    if let Some(lb) = p.params.get("lower_bound").and_then(Value::as_f64) {
        if let Some(oc) = runs.iter().find(|r| r.kind == SolverKind::OcHalpern) {
            let fin = oc.trace.final_residual_sq().unwrap_or(f64::NAN);
            manifest.insert(
                "lower_bound_check".into(),
                json!({"bound": lb, "oc_halpern_final_residual_sq": fin, "ratio": fin / lb}),
            );
        }
    }
    if let Some(x) = &p.prox {
        if let (Some((mu, alpha)), Some(_)) = (x.uniform, runs.iter().find(|r| r.kind == SolverKind::RestartedOsPpm)) {
            let b = restarted_bound(p.steps, mu, alpha, x.y0.norm()).ok();
            manifest.insert("restarted_bound".into(), json!(b));
        }
    }
    let manifest = Value::Object(manifest);
    let mpath = dir.join("manifest.json");
    write_file(&mpath, &(serde_json::to_string_pretty(&manifest).unwrap() + "\n"))?;
    files.push(mpath);
    Ok(RunSummary {
        output_dir: dir,
        files,
        manifest,
    })
}

/// `export-instance <config>`: writes the experiment's instance document(s).
pub fn export_instance(lc: &LoadedConfig) -> Result<Vec<PathBuf>> {
    let c = &lc.config;
    let exp = c.experiment.ok_or_else(|| lc.error("experiment", "is required"))?;
    let mut r = Resolver {
        lc,
        params: Map::new(),
    };
    let docs: Vec<(&str, Instance)> = match exp {
        Experiment::Toy2d => {
            let total = r.count("iterations", c.iterations, 101, 2)?;
            let theta = r.real("theta_deg", c.theta_deg, 15.0, |_| true, "")?;
            let gamma = r.real("gamma", c.gamma, 1.0 / 0.95, |g| g >= 1.0, "must be >= 1")?;
            let mu = r.real("mu", c.mu, 0.035, |m| m >= 0.0, "must be >= 0")?;
            let rot = rotation_contraction(theta.to_radians(), gamma)?;
            let toy = toy_monotone(mu, total)?;
            vec![
                (
                    "toy2d-rotation",
                    Instance::Linear {
                        matrix: matrix_to_rows(&rot.matrix()),
                        gamma,
                        y0: Some(vec![1.0, 0.0]),
                    },
                ),
                (
                    "toy2d-monotone",
                    Instance::Monotone {
                        matrix: matrix_to_rows(&toy.matrix()),
                        mu,
                        y0: Some(vec![1.0, 0.0]),
                    },
                ),
            ]
        }
        Experiment::Worstcase => {
            let n = r.count("iterations", c.iterations, 10, 1)?;
            let gamma = r.real("gamma", c.gamma, 1.05, |g| g >= 1.0, "must be >= 1")?;
            let radius = r.positive("radius", c.radius, 1.0)?;
            vec![(
                "worstcase",
                Instance::WorstCase {
                    horizon: n,
                    gamma,
                    radius,
                    y0: vec![0.0; n + 1],
                },
            )]
        }
        Experiment::RestartPower => {
            let mu = r.positive("mu", c.mu, 1.0)?;
            let alpha = r.real("alpha", c.alpha, 2.0, |a| a > 1.0, "must be > 1")?;
            let dim = r.count("dim", c.dim, 5, 1)?;
            let radius = r.positive("radius", c.radius, 1.0)?;
            let y0 = seeded_direction(dim, c.seed, radius).into_vec();
            vec![(
                "restart-power",
                Instance::Power {
                    mu,
                    alpha,
                    dim,
                    y0: Some(y0),
                },
            )]
        }
        Experiment::Ct => vec![("ct", Instance::Ct(ct_problem(&mut r)?))],
        Experiment::Emd => vec![("emd", Instance::Emd(emd_instance(&mut r)?))],
        Experiment::Pgextra => vec![("pgextra", Instance::Network(network_problem(&mut r)?))],
        Experiment::Custom => return Err(Error::Usage("custom experiments already read an instance file".into())),
    };
    let dir = lc.output_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut out = Vec::new();
    for (name, doc) in docs {
        let path = dir.join(format!("{name}.instance.json"));
        doc.save(&path)?;
        out.push(path);
    }
    Ok(out)
}

/// Loads a config and runs it; used by the CLI and the integration tests.
pub fn run_path(path: &Path) -> Result<RunSummary> {
    run(&LoadedConfig::load(path)?)
}
