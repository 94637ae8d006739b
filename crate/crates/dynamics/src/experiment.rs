//! Slow-motion runs: integrate to `T = M/ε` and record how far the solution
//! strays from the sharp-interface state `u_{E₀}`.

use crate::error::Result;
use crate::field::Field2D;
use crate::geometry::Geometry;
use crate::init::{well_prepared_init, InitReport};
use crate::potential_ext::BoxedPotential;
use crate::scheme::{Flow, SimConfig, Simulator};
use gammalab_core::{LayerModel, Potential};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub l1: f64,
    pub dual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub flow: Flow,
    pub eps: f64,
    pub n: usize,
    pub steps: usize,
    pub t_end: f64,
    pub mass0: f64,
    pub max_mass_drift: f64,
    pub energy0: f64,
    pub energy_final: f64,
    /// Largest `E(uⁿ⁺¹) − E(uⁿ)` relative to `E(u⁰)`.
    pub max_energy_increase: f64,
    pub initial_l1: f64,
    /// `sup_t ‖u(t) − u_{E₀}‖_{L¹}`.
    pub sup_l1: f64,
    /// `sup_t ‖u(t) − u(0)‖_{L¹}`.
    pub sup_motion_l1: f64,
    pub initial_dual: f64,
    /// `sup_t ‖u(t) − u_{E₀}‖_{(H¹)'}` (only sampled on diagnostic steps).
    pub sup_dual: f64,
    pub final_lambda: f64,
    pub init: Option<InitReport>,
    pub series: Vec<SeriesRow>,
}

impl RunReport {
    pub fn energy_monotone(&self, tol: f64) -> bool {
        self.max_energy_increase <= tol
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Evaluate the dual norm every this many steps (the L¹ distance,
    /// mass and energy are checked every step).
    pub dual_every: usize,
    /// Keep a series row every this many steps (plus the last one).
    pub record_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            dual_every: 1,
            record_every: 50,
        }
    }
}

/// Integrates `u0` to `cfg.t_end()` and collects the drift diagnostics.
pub fn run(
    u0: Field2D,
    geometry: &Geometry,
    pot: &BoxedPotential,
    cfg: SimConfig,
    opts: RunOptions,
) -> Result<RunReport> {
    let reference = geometry.indicator_field(&u0, pot.a(), pot.b(), 8);
    let start = u0.clone();
    let mut sim = Simulator::new(u0, pot.clone(), cfg)?;
    let mass0 = sim.field.mass();
    let energy0 = sim.energy();
    let initial_l1 = sim.field.l1_distance(&reference);
    let initial_dual = sim.dual_distance(&reference);
    let mut report = RunReport {
        flow: cfg.flow,
        eps: cfg.eps,
        n: sim.field.nx,
        steps: 0,
        t_end: cfg.t_end(),
        mass0,
        max_mass_drift: 0.0,
        energy0,
        energy_final: energy0,
        max_energy_increase: f64::NEG_INFINITY,
        initial_l1,
        sup_l1: initial_l1,
        sup_motion_l1: 0.0,
        initial_dual,
        sup_dual: initial_dual,
        final_lambda: 0.0,
        init: None,
        series: vec![SeriesRow {
            t: 0.0,
            mass: mass0,
            energy: energy0,
            l1: initial_l1,
            dual: initial_dual,
        }],
    };
    let scale = energy0.abs().max(f64::MIN_POSITIVE);
    let mut energy = energy0;
    loop {
        let dt = sim.next_dt();
        if dt <= 1e-14 * report.t_end.max(1.0) {
            break;
        }
        sim.step(dt)?;
        let e = sim.energy();
        report.max_energy_increase = report.max_energy_increase.max((e - energy) / scale);
        energy = e;
        let mass = sim.field.mass();
        report.max_mass_drift = report.max_mass_drift.max((mass - mass0).abs());
        let l1 = sim.field.l1_distance(&reference);
        report.sup_l1 = report.sup_l1.max(l1);
        report.sup_motion_l1 = report.sup_motion_l1.max(sim.field.l1_distance(&start));
        let last = sim.next_dt() <= 1e-14 * report.t_end.max(1.0);
        let mut dual = f64::NAN;
        if sim.steps % opts.dual_every.max(1) == 0 || last {
            dual = sim.dual_distance(&reference);
            report.sup_dual = report.sup_dual.max(dual);
        }
        if sim.steps % opts.record_every.max(1) == 0 || last {
            report.series.push(SeriesRow {
                t: sim.t,
                mass,
                energy: e,
                l1,
                dual,
            });
        }
    }
    if report.max_energy_increase == f64::NEG_INFINITY {
        report.max_energy_increase = 0.0;
    }
    report.steps = sim.steps;
    report.energy_final = energy;
    report.final_lambda = sim.lambda;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub flow: Flow,
    pub geometry: Geometry,
    pub potential: Potential,
    pub eps: Vec<f64>,
    pub horizon_m: f64,
    /// Grid cells per unit of ε (`n = ⌈cells_per_eps/ε⌉`).
    pub cells_per_eps: f64,
    /// Allen–Cahn only; `false` is the non-conserving control.
    pub conserve_mass: bool,
    pub options: RunOptions,
}

impl Scenario {
    pub fn grid_size(&self, eps: f64) -> usize {
        (self.cells_per_eps / eps).ceil() as usize
    }

    /// Well-prepared run at one ε.
    pub fn run_one(&self, eps: f64, layer: &LayerModel) -> Result<RunReport> {
        let pot = BoxedPotential::new(self.potential.clone());
        let n = self.grid_size(eps);
        let (u0, init) = well_prepared_init(&self.geometry, n, eps, layer, &pot, None)?;
        let mut cfg = SimConfig::new(self.flow, eps, u0.h, &pot);
        cfg.horizon_m = self.horizon_m;
        cfg.conserve_mass = self.conserve_mass;
        let mut r = run(u0, &self.geometry, &pot, cfg, self.options)?;
        r.init = Some(init);
        Ok(r)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderReport {
    pub runs: Vec<RunReport>,
    /// `sup_l1(ε_k)/sup_l1(ε_{k+1})` along decreasing ε.
    pub l1_ratios: Vec<f64>,
    pub dual_ratios: Vec<f64>,
}

/// Runs every ladder point (concurrently) and collects them by decreasing ε.
pub fn slow_motion_experiment(s: &Scenario) -> Result<LadderReport> {
    let layer = LayerModel::new(&s.potential)?;
    let mut eps = s.eps.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    let runs: Vec<RunReport> = eps
        .par_iter()
        .map(|&e| s.run_one(e, &layer))
        .collect::<Result<_>>()?;
    let ratio = |f: fn(&RunReport) -> f64| -> Vec<f64> { runs.windows(2).map(|w| f(&w[0]) / f(&w[1])).collect() };
    Ok(LadderReport {
        l1_ratios: ratio(|r| r.sup_l1),
        dual_ratios: ratio(|r| r.sup_dual),
        runs,
    })
}
