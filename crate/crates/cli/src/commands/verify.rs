use serde::Serialize;

use combkit::network::estimate_fg_trajectories;
use combkit::tradeoff::{mc_f, mc_g, reduced_seed_for_p};
use combkit::{Estimate, McConfig, Result, TradeoffPoint};

use crate::args::VerifyArgs;

/// Monte Carlo agreement: `|mean - target| <= max(3 stderr, 5e-3)`.
pub const MC_SIGMAS: f64 = 3.0;
pub const MC_FLOOR: f64 = 5e-3;
pub const CONSTRAINT_TOL: f64 = 1e-10;
pub const CURVE_TOL: f64 = 1e-8;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn residual(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self { name, value, target: 0.0, tolerance, pass: value.abs() <= tolerance }
    }

    fn estimate(name: &'static str, e: &Estimate, target: f64) -> Self {
        let tolerance = (MC_SIGMAS * e.stderr).max(MC_FLOOR);
        Self { name, value: e.mean, target, tolerance, pass: e.agrees_with(target, MC_SIGMAS, MC_FLOOR) }
    }
}

#[derive(Debug, Serialize)]
pub struct Spec {
    pub by: &'static str,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct McBlock {
    pub samples: usize,
    pub seed: u64,
    pub chunks: usize,
    pub f: Estimate,
    pub g: Estimate,
    pub f_trajectory: Estimate,
    pub g_trajectory: Estimate,
    pub acceptance_rate: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub d: usize,
    pub spec: Spec,
    pub point: TradeoffPoint,
    pub monte_carlo: McBlock,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub fn report(args: &VerifyArgs) -> Result<Report> {
    let d = args.common.d();
    let point = args.point.point(d)?;
    let (by, value) = args.point.describe();
    let cfg = McConfig::new(args.samples as usize, args.seed);
    let f = mc_f(point.x, point.y, d, &cfg)?;
    let g = mc_g(point.x, point.y, d, &cfg)?;
    let t = estimate_fg_trajectories(point.x, point.y, d, &cfg)?;

    let mut checks = vec![
        Check::residual("constraint", point.constraint_residual(), CONSTRAINT_TOL),
        Check::residual("curve", point.curve_residual(), CURVE_TOL),
    ];
    if let Some(p) = args.point.p {
        // the dense eigensolver and the reduced problem must pick the same seed
        let reduced = reduced_seed_for_p(p, d)?;
        let gap = (reduced.x - point.x).abs().max((reduced.y - point.y).abs());
        checks.push(Check::residual("reduced_vs_dense_seed", gap, 1e-8));
    }
    checks.extend([
        Check::estimate("mc_f", &f, point.f),
        Check::estimate("mc_g", &g, point.g),
        Check::estimate("trajectory_f", &t.f, point.f),
        Check::estimate("trajectory_g", &t.g, point.g),
    ]);
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        d,
        spec: Spec { by, value },
        point,
        monte_carlo: McBlock {
            samples: cfg.samples,
            seed: cfg.seed,
            chunks: cfg.chunks,
            f,
            g,
            f_trajectory: t.f,
            g_trajectory: t.g,
            acceptance_rate: t.acceptance_rate,
        },
        checks,
        pass,
    })
}
