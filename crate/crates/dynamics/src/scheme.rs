//! Semi-implicit spectral steppers.
//!
//! Allen–Cahn: `(u⁺ − u)/Δt = ε²Δ_h u⁺ − W'(u) + ελ`, with `ελ` the mean of
//! `W'(u)` so the zero mode is untouched.
//!
//! Cahn–Hilliard (stabilised): `(u⁺ − u)/Δt = Δ_h(W'(u) + S(u⁺ − u)) − ε²Δ_h²u⁺`.
//!
//! Both are gradient flows of `E(u) = ∫ W(u) + ½ε²|∇u|²` (in L² and in the
//! `H⁻¹` metric respectively) and decrease it whenever
//! `1/Δt ≥ sup W''/2` (Allen–Cahn) or `S ≥ sup W''/2` (Cahn–Hilliard).

use crate::error::{Error, Result};
use crate::field::Field2D;
use crate::potential_ext::BoxedPotential;
use crate::spectral::Dct2d;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flow {
    AllenCahn,
    CahnHilliard,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimConfig {
    pub flow: Flow,
    pub eps: f64,
    /// Horizon factor: runs cover `t ∈ [0, M/ε]`.
    pub horizon_m: f64,
    /// Allen–Cahn step, or the largest Cahn–Hilliard step.
    pub dt: f64,
    /// First Cahn–Hilliard step; steps grow geometrically up to `dt`.
    pub dt_start: f64,
    pub dt_growth: f64,
    /// Cahn–Hilliard stabilisation `S`.
    pub stabilization: f64,
    /// Allen–Cahn only: `false` drops the multiplier (plain Allen–Cahn).
    pub conserve_mass: bool,
}

impl SimConfig {
    /// Defaults: Allen–Cahn `Δt = min(h²/(8ε²), 0.1/sup W'')`; Cahn–Hilliard
    /// `S = sup W''` with steps growing by 5% from `0.01ε²` to `0.01`.
    pub fn new(flow: Flow, eps: f64, h: f64, pot: &BoxedPotential) -> Self {
        let l = pot.lipschitz;
        match flow {
            Flow::AllenCahn => Self {
                flow,
                eps,
                horizon_m: 1.0,
                dt: (h * h / (8.0 * eps * eps)).min(0.1 / l),
                dt_start: 0.0,
                dt_growth: 1.0,
                stabilization: 0.0,
                conserve_mass: true,
            },
            Flow::CahnHilliard => Self {
                flow,
                eps,
                horizon_m: 1.0,
                dt: 0.01,
                dt_start: 0.01 * eps * eps,
                dt_growth: 1.05,
                stabilization: l,
                conserve_mass: true,
            },
        }
    }

    pub fn t_end(&self) -> f64 {
        self.horizon_m / self.eps
    }

    pub fn validate(&self, pot: &BoxedPotential) -> Result<()> {
        if !(self.eps > 0.0 && self.dt > 0.0 && self.horizon_m >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ε = {}, Δt = {}, M = {}",
                self.eps, self.dt, self.horizon_m
            )));
        }
        let l = pot.lipschitz;
        match self.flow {
            Flow::AllenCahn => {
                if self.dt > 2.0 / l {
                    return Err(Error::Unstable {
                        dt: self.dt,
                        rule: format!("Δt ≤ 2/sup W'' = {}", 2.0 / l),
                    });
                }
            }
            Flow::CahnHilliard => {
                if self.stabilization < 0.5 * l {
                    return Err(Error::Unstable {
                        dt: self.dt,
                        rule: format!("S = {} < sup W''/2 = {}", self.stabilization, 0.5 * l),
                    });
                }
                if !(self.dt_start > 0.0 && self.dt_start <= self.dt && self.dt_growth >= 1.0) {
                    return Err(Error::InvalidParameter("Cahn–Hilliard step schedule".into()));
                }
            }
        }
        Ok(())
    }
}

pub struct Simulator {
    pub field: Field2D,
    pub pot: BoxedPotential,
    pub cfg: SimConfig,
    pub t: f64,
    pub steps: usize,
    /// Last Allen–Cahn multiplier `λ`.
    pub lambda: f64,
    dct: Dct2d,
    /// Pinned `(0,0)` coefficient: `nx·ny ×` initial mean.
    zero_mode: f64,
    work: Vec<f64>,
    work2: Vec<f64>,
}

impl Simulator {
    pub fn new(field: Field2D, pot: BoxedPotential, cfg: SimConfig) -> Result<Self> {
        cfg.validate(&pot)?;
        field.check_finite(0)?;
        let dct = Dct2d::new(field.nx, field.ny, field.h);
        let zero_mode = field.mean() * (field.nx * field.ny) as f64;
        let n = field.u.len();
        Ok(Self {
            field,
            pot,
            cfg,
            t: 0.0,
            steps: 0,
            lambda: 0.0,
            dct,
            zero_mode,
            work: vec![0.0; n],
            work2: vec![0.0; n],
        })
    }

    /// Next step size on the schedule (clipped to land on `t_end`).
    pub fn next_dt(&self) -> f64 {
        let dt = match self.cfg.flow {
            Flow::AllenCahn => self.cfg.dt,
            Flow::CahnHilliard => (self.cfg.dt_start * self.cfg.dt_growth.powi(self.steps as i32)).min(self.cfg.dt),
        };
        dt.min((self.cfg.t_end() - self.t).max(0.0))
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        match self.cfg.flow {
            Flow::AllenCahn => self.step_ac(dt),
            Flow::CahnHilliard => self.step_ch(dt),
        }
    }

    pub fn step_ac(&mut self, dt: f64) -> Result<()> {
        let eps2 = self.cfg.eps * self.cfg.eps;
        let n = self.field.u.len();
        let mean_dw = self.field.u.iter().map(|&v| self.pot.dw(v)).sum::<f64>() / n as f64;
        let shift = if self.cfg.conserve_mass { mean_dw } else { 0.0 };
        self.lambda = shift / self.cfg.eps;
        for (w, &v) in self.work.iter_mut().zip(&self.field.u) {
            *w = v - dt * (self.pot.dw(v) - shift);
        }
        self.dct.forward(&mut self.work);
        for (w, &lam) in self.work.iter_mut().zip(self.dct.laplacian()) {
            *w /= 1.0 - dt * eps2 * lam;
        }
        if self.cfg.conserve_mass {
            self.work[0] = self.zero_mode;
        }
        self.dct.inverse(&mut self.work);
        std::mem::swap(&mut self.field.u, &mut self.work);
        self.finish(dt)
    }

    pub fn step_ch(&mut self, dt: f64) -> Result<()> {
        let eps2 = self.cfg.eps * self.cfg.eps;
        let s = self.cfg.stabilization;
        self.work.copy_from_slice(&self.field.u);
        for (w, &v) in self.work2.iter_mut().zip(&self.field.u) {
            *w = self.pot.dw(v);
        }
        self.dct.forward(&mut self.work);
        self.dct.forward(&mut self.work2);
        for ((u, &g), &lam) in self.work.iter_mut().zip(&self.work2).zip(self.dct.laplacian()) {
            *u = (*u * (1.0 - dt * s * lam) + dt * lam * g) / (1.0 - dt * s * lam + dt * eps2 * lam * lam);
        }
        self.work[0] = self.zero_mode;
        self.dct.inverse(&mut self.work);
        std::mem::swap(&mut self.field.u, &mut self.work);
        self.finish(dt)
    }

    fn finish(&mut self, dt: f64) -> Result<()> {
        self.steps += 1;
        self.t += dt;
        self.field.check_finite(self.steps)
    }

    /// Lyapunov functional `∫ W(u) + ½ε²|∇_h u|²` of the discrete flows.
    pub fn energy(&self) -> f64 {
        lyapunov(&self.field, &self.pot, self.cfg.eps)
    }

    /// `F_ε(u) = ∫ W(u) + ε²|∇_h u|²`.
    pub fn f_eps(&self) -> f64 {
        f_eps(&self.field, &self.pot, self.cfg.eps)
    }

    /// `(H¹)'` norm of `self.field − other`, reusing this simulator's plans.
    pub fn dual_distance(&mut self, other: &Field2D) -> f64 {
        for ((w, a), b) in self.work2.iter_mut().zip(&self.field.u).zip(&other.u) {
            *w = a - b;
        }
        let f = self.work2.clone();
        dual_norm_with(&mut self.dct, &f, &mut self.work2, self.field.cell_area())
    }
}

pub fn lyapunov(f: &Field2D, pot: &BoxedPotential, eps: f64) -> f64 {
    let bulk: f64 = f.u.iter().map(|&v| pot.w(v)).sum::<f64>() * f.cell_area();
    bulk + 0.5 * eps * eps * f.gradient_energy()
}

pub fn f_eps(f: &Field2D, pot: &BoxedPotential, eps: f64) -> f64 {
    let bulk: f64 = f.u.iter().map(|&v| pot.w(v)).sum::<f64>() * f.cell_area();
    bulk + eps * eps * f.gradient_energy()
}

fn dual_norm_with(dct: &mut Dct2d, f: &[f64], work: &mut Vec<f64>, cell_area: f64) -> f64 {
    work.clear();
    work.extend_from_slice(f);
    dct.forward(work);
    for (w, &lam) in work.iter_mut().zip(dct.laplacian()) {
        *w /= 1.0 - lam;
    }
    dct.inverse(work);
    let pairing: f64 = f.iter().zip(work.iter()).map(|(a, b)| a * b).sum::<f64>() * cell_area;
    pairing.max(0.0).sqrt()
}

/// `‖f‖_{(H¹)'} = (∫ f φ)^{1/2}` with `(−Δ_h + 1)φ = f` under Neumann
/// conditions.
pub fn h1_dual_norm(f: &Field2D) -> f64 {
    let mut dct = Dct2d::new(f.nx, f.ny, f.h);
    let mut work = Vec::new();
    dual_norm_with(&mut dct, &f.u, &mut work, f.cell_area())
}

/// One Allen–Cahn step of `u` (plans are rebuilt; use [`Simulator`] for runs).
pub fn step_ac(u: &Field2D, pot: &BoxedPotential, cfg: SimConfig) -> Result<Field2D> {
    let mut sim = Simulator::new(u.clone(), pot.clone(), SimConfig { flow: Flow::AllenCahn, ..cfg })?;
    sim.step_ac(cfg.dt)?;
    Ok(sim.field)
}

/// One Cahn–Hilliard step of `u` with step `cfg.dt`.
pub fn step_ch(u: &Field2D, pot: &BoxedPotential, cfg: SimConfig) -> Result<Field2D> {
    let cfg = SimConfig {
        flow: Flow::CahnHilliard,
        dt_start: cfg.dt_start.min(cfg.dt).max(f64::MIN_POSITIVE),
        ..cfg
    };
    let mut sim = Simulator::new(u.clone(), pot.clone(), cfg)?;
    sim.step_ch(cfg.dt)?;
    Ok(sim.field)
}
