use serde::Serialize;

use combkit::realization::{realize, recompose, v1, v2};
use combkit::tradeoff::r_total;
use combkit::{RealizedNetwork, Result, TradeoffPoint};

use crate::args::RealizeArgs;

pub const ISOMETRY_TOL: f64 = 1e-10;
pub const RECOMPOSE_TOL: f64 = 1e-8;

#[derive(Debug, Serialize)]
pub struct SelfCheck {
    pub isometry_residuals: Vec<f64>,
    /// `‖recompose(realize(R)) - R‖_F`.
    pub recomposition_residual: f64,
    /// Same for the closed-form stages.
    pub closed_form_isometry_residuals: Vec<f64>,
    pub closed_form_recomposition_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct Dump {
    pub d: usize,
    pub x: f64,
    pub y: f64,
    pub point: TradeoffPoint,
    /// Ranks of `R⁽ᵏ⁾*`, one per stage.
    pub ancilla_dims: Vec<usize>,
    pub network: RealizedNetwork,
    pub self_check: SelfCheck,
}

pub fn dump(args: &RealizeArgs) -> Result<Dump> {
    let d = args.common.d();
    let point = args.point.point(d)?;
    let r = r_total(point.x, point.y, d)?;
    let network = realize(&r)?;
    let back = network.recompose()?;
    let closed = [v1(point.x, point.y, d)?, v2(point.x, point.y, d)?];
    let closed_back = recompose(&closed)?;

    let isometry_residuals: Vec<f64> = network.stages.iter().map(|s| s.isometry_residual()).collect();
    let closed_iso: Vec<f64> = closed.iter().map(|s| s.isometry_residual()).collect();
    let recomposition_residual = back.op().dist(r.op())?;
    let closed_res = closed_back.op().dist(r.op())?;
    let pass = isometry_residuals.iter().chain(&closed_iso).all(|&v| v <= ISOMETRY_TOL)
        && recomposition_residual <= RECOMPOSE_TOL
        && closed_res <= RECOMPOSE_TOL;
    Ok(Dump {
        d,
        x: point.x,
        y: point.y,
        point,
        ancilla_dims: network.ancilla_dims(),
        network,
        self_check: SelfCheck {
            isometry_residuals,
            recomposition_residual,
            closed_form_isometry_residuals: closed_iso,
            closed_form_recomposition_residual: closed_res,
            pass,
        },
    })
}
