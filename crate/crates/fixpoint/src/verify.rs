//! `verify`: seeded property checks of the solvers against their guarantees.

use fixpoint_core::lowerbound::{build_worst_case, lower_bound_value, verify_span_condition, verify_span_condition_proximal};
use fixpoint_core::phi::PhiSequence;
use fixpoint_core::problems::rotation_contraction;
use fixpoint_core::solvers::{halpern, oc_halpern, oc_halpern_with_phi, os_ppm, os_ppm_anchored};
use fixpoint_core::transforms::contraction_from_resolvent;
use fixpoint_core::{FixedPointMap, IterationTrace, LinearMap, Point, Probe};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::LoadedConfig;
use crate::fixtures::{random_linear_problem, random_monotone_matrix, random_point};
use crate::{Error, Result};

/// Property keys accepted in `properties`, in run order.
pub const PROPERTIES: [&str; 6] = [
    "lyapunov",
    "exact-optimality",
    "method-equivalence",
    "form-equivalence",
    "span-condition",
    "upper-bounds",
];

/// Injected faults accepted in `fault`.
pub const FAULTS: [&str; 1] = ["phi_recurrence"];

const MUS: [f64; 4] = [0.0, 0.01, 0.1, 1.0];
const GAMMAS: [f64; 4] = [1.0, 1.01, 1.05, 1.2];

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub key: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl PropertyResult {
    /// Human-readable name, e.g. "method equivalence".
    pub fn name(&self) -> String {
        self.key.replace('-', " ")
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name(), self.detail)
    }
}

struct Ctx {
    seed: u64,
    n: usize,
    broken_phi: bool,
}

impl Ctx {
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9e37_79b9).wrapping_add(salt))
    }

    fn oc<T: FixedPointMap + ?Sized>(&self, t: &T, gamma: f64, y0: &Point, n: usize, probe: &Probe<'_>) -> Result<IterationTrace> {
        if self.broken_phi {
            let phi = PhiSequence::with_increment(gamma, n, 2.0)?;
            Ok(oc_halpern_with_phi(t, &phi, y0, n, probe)?)
        } else {
            Ok(oc_halpern(t, gamma, y0, n, probe)?)
        }
    }
}

type Outcome = Result<(bool, String)>;

fn lyapunov(c: &Ctx) -> Outcome {
    let mut rng = c.rng(1);
    let mut worst = f64::NEG_INFINITY;
    for &mu in &MUS {
        // gamma^k amplifies roundoff once the residual reaches machine precision
        let n = if mu >= 1.0 { c.n.min(20) } else { c.n };
        for _ in 0..4 {
            let (a, xs) = random_linear_problem(&mut rng, 6, mu);
            let y0 = random_point(&mut rng, 6, 2.0);
            let tr = os_ppm(&a, mu, &y0, n, &Probe::with_solution(&xs))?;
            let v: Vec<f64> = tr.records.iter().map(|r| r.lyapunov.unwrap_or(f64::NAN)).collect();
            for w in v.windows(2) {
                worst = worst.max((w[1] - w[0]) / v[0]);
            }
        }
    }
    Ok((worst <= 1e-9, format!("largest relative increase {worst:.3e}")))
}

fn exact_optimality(c: &Ctx) -> Outcome {
    let mut rng = c.rng(2);
    let mut worst: f64 = 0.0;
    for n in 1..=c.n.min(25) {
        for &g in &GAMMAS {
            let y0 = random_point(&mut rng, n + 1, 1.0);
            let w = build_worst_case(n, g, 1.0, y0.clone())?;
            let got = c.oc(&w, g, &y0, n, &Probe::none())?.final_residual_sq().unwrap_or(f64::NAN);
            let lb = lower_bound_value(n, g, 1.0);
            worst = worst.max(((got - lb) / lb).abs());
        }
    }
    Ok((worst <= 1e-8, format!("largest relative gap to the lower bound {worst:.3e}")))
}

fn method_equivalence(c: &Ctx) -> Outcome {
    let mut rng = c.rng(3);
    let mut worst: f64 = 0.0;
    for &mu in &MUS {
        let n = if mu >= 1.0 { c.n.min(20) } else { c.n };
        let (a, _) = random_linear_problem(&mut rng, 6, mu);
        let y0 = random_point(&mut rng, 6, 1.0);
        let t = contraction_from_resolvent(&a, mu)?;
        let oc = c.oc(&t, 1.0 + 2.0 * mu, &y0, n, &Probe::none())?;
        let os = os_ppm(&a, mu, &y0, n, &Probe::none())?;
        for (u, v) in oc.records.iter().zip(&os.records) {
            worst = worst.max(u.y.max_abs_diff(&v.y) / (1.0 + v.y.norm()));
        }
    }
    Ok((worst <= 1e-10, format!("largest iterate difference {worst:.3e}")))
}

fn form_equivalence(c: &Ctx) -> Outcome {
    let mut rng = c.rng(4);
    let mut worst: f64 = 0.0;
    for &mu in &MUS {
        let n = if mu >= 1.0 { c.n.min(20) } else { c.n };
        let (a, _) = random_linear_problem(&mut rng, 6, mu);
        let y0 = random_point(&mut rng, 6, 1.0);
        let p = os_ppm(&a, mu, &y0, n, &Probe::none())?;
        let q = os_ppm_anchored(&a, mu, &y0, n, &Probe::none())?;
        for (u, v) in p.records.iter().zip(&q.records) {
            worst = worst.max(u.y.max_abs_diff(&v.y) / (1.0 + v.y.norm()));
        }
    }
    Ok((worst <= 1e-10, format!("largest iterate difference {worst:.3e}")))
}

fn span_condition(c: &Ctx) -> Outcome {
    let mut rng = c.rng(5);
    // the span only stays informative while it has not filled the space
    let n = c.n.min(12);
    let dim = n + 4;
    let mut ok = true;
    for &g in &GAMMAS {
        let m = random_monotone_matrix(&mut rng, dim, 0.0);
        let scale = 1.0 / (g * (1.0 + m.as_slice().iter().map(|v| v.abs()).sum::<f64>()));
        let scaled = m.lincomb(scale, &m, 0.0)?;
        let t = LinearMap::new(scaled, g)?.with_offset(random_point(&mut rng, dim, 1.0))?;
        let y0 = random_point(&mut rng, dim, 1.0);
        ok &= verify_span_condition(&c.oc(&t, g, &y0, n, &Probe::none())?, 1e-8)?;
        ok &= verify_span_condition(&halpern(&t, &y0, |k| 1.0 / (k as f64 + 2.0), n, &Probe::none())?, 1e-8)?;
    }
    for &mu in &MUS {
        let (a, _) = random_linear_problem(&mut rng, dim, mu);
        let y0 = random_point(&mut rng, dim, 1.0);
        let m = if mu >= 1.0 { n.min(10) } else { n };
        ok &= verify_span_condition_proximal(&os_ppm(&a, mu, &y0, m, &Probe::none())?, 1e-8)?;
    }
    Ok((ok, format!("{} traces checked", 2 * GAMMAS.len() + MUS.len())))
}

fn upper_bounds(c: &Ctx) -> Outcome {
    let mut rng = c.rng(6);
    let mut worst = f64::NEG_INFINITY;
    let mut ratio = |tr: &IterationTrace| {
        for r in &tr.records {
            if let (Some(res), Some(b)) = (r.residual_sq, r.bound) {
                if b > 0.0 {
                    worst = worst.max(res / b);
                }
            }
        }
    };
    for &g in &GAMMAS {
        for theta in [5.0f64, 15.0, 90.0] {
            let t = rotation_contraction(theta.to_radians(), g)?;
            let y0 = random_point(&mut rng, 2, 1.0);
            let zero = Point::zeros(2);
            ratio(&c.oc(&t, g, &y0, c.n, &Probe::with_solution(&zero))?);
        }
    }
    for &mu in &MUS {
        let n = if mu >= 1.0 { c.n.min(20) } else { c.n };
        let (a, xs) = random_linear_problem(&mut rng, 6, mu);
        let y0 = random_point(&mut rng, 6, 2.0);
        ratio(&os_ppm(&a, mu, &y0, n, &Probe::with_solution(&xs))?);
    }
    Ok((worst <= 1.0 + 1e-9, format!("largest residual/bound ratio {worst:.6}")))
}

/// Runs the configured properties; the caller decides what failures mean.
pub fn verify(lc: &LoadedConfig) -> Result<Vec<PropertyResult>> {
    let cfg = &lc.config;
    let keys: Vec<&'static str> = match &cfg.properties {
        None => PROPERTIES.to_vec(),
        Some(list) => {
            let mut keys = Vec::new();
            for p in list {
                let norm = p.replace([' ', '_'], "-");
                match PROPERTIES.iter().find(|k| **k == norm) {
                    Some(k) => keys.push(*k),
                    None => {
                        return Err(lc.error("properties", format!("unknown property `{p}`; expected one of {}", PROPERTIES.join(", "))))
                    }
                }
            }
            keys
        }
    };
    let broken_phi = match cfg.fault.as_deref() {
        None => false,
        Some("phi_recurrence") => true,
        Some(f) => return Err(lc.error("fault", format!("unknown fault `{f}`; expected one of {}", FAULTS.join(", ")))),
    };
    let n = cfg.iterations.unwrap_or(40);
    if n < 2 {
        return Err(lc.error("iterations", format!("{n} must be >= 2")));
    }
    let ctx = Ctx {
        seed: cfg.seed,
        n,
        broken_phi,
    };
    let mut out = Vec::new();
    for key in keys {
        let f: fn(&Ctx) -> Outcome = match key {
            "lyapunov" => lyapunov,
            "exact-optimality" => exact_optimality,
            "method-equivalence" => method_equivalence,
            "form-equivalence" => form_equivalence,
            "span-condition" => span_condition,
            _ => upper_bounds,
        };
        let (passed, detail) = match f(&ctx) {
            Ok(r) => r,
            Err(Error::Core(e)) => (false, format!("error: {e}")),
            Err(e) => return Err(e),
        };
        out.push(PropertyResult { key, passed, detail });
    }
    Ok(out)
}

/// Turns a report into the error the CLI exits with, if anything failed.
pub fn summarize(results: &[PropertyResult]) -> Result<()> {
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.name()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::PropertiesFailed {
            failed: failed.len(),
            total: results.len(),
            names: failed,
        })
    }
}
