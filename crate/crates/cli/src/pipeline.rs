//! The scenario pipeline: constants → profile → iso → weight → minimize1d →
//! predict → dynamics. Each stage writes one record (and possibly tables);
//! later stages read the records they need back from the store.

use crate::config::{DomainSpec, DynamicsSpec, ScenarioConfig, Stage};
use crate::error::{Error, Result};
use crate::store::{num, ResultStore, Table};
use gammalab_core::gamma2::{predict_f2, select_minimizer, MinimizerGeometry};
use gammalab_core::profile::{energy_integral, shift_integral};
use gammalab_core::report::Check;
use gammalab_core::{LayerModel, Potential};
use gammalab_dynamics::{slow_motion_experiment, Flow, RunOptions, Scenario};
use gammalab_iso::{one_sided_derivatives, semiconcavity_estimate, IsoProfile, Provenance, Rect};
use gammalab_weighted::analysis::{extract_lambda_limit, extrapolate_gap, solve_tau0, theorem31_rhs, LambdaLimit};
use gammalab_weighted::solver::limit_mass;
use gammalab_weighted::{
    build_eta, build_touching_iso, minimize_ladder, solve_v, validate_eta, MinimizeOptions, TouchingParams,
    WeightFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

type StageResult = std::result::Result<(), Box<dyn std::error::Error + Send + Sync>>;

/// A reported number and the tolerance it was computed to (or, where
/// marked, an a-posteriori error estimate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub tol: f64,
}

fn measured(value: f64, tol: f64) -> Measured {
    Measured { value, tol }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub samples: usize,
    pub seed: u64,
    pub max_error: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsRecord {
    pub potential: String,
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub c_w: Measured,
    pub c_sym: Measured,
    pub i0: Measured,
    pub w2_a: Option<f64>,
    /// `∫(z(t − τ) − sgn(t)) dt = I₀ − τ(b − a)` at seeded random shifts.
    pub shift_identity: IdentityCheck,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub window: (f64, f64),
    pub rows: usize,
    /// `∫ W(z) + z'²`, which equals `2c_W` along the exact layer.
    pub energy: Measured,
    pub equipartition_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub kappa: f64,
    pub perimeter: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsoRecord {
    pub kind: String,
    pub n: u32,
    pub vm: f64,
    pub value: Measured,
    /// One-sided derivatives at `vm`; `tol` is the change between the two
    /// finest stencil fits (zero when known in closed form).
    pub d_minus: Measured,
    pub d_plus: Measured,
    /// Semi-concavity constant estimated on the sampled profile.
    pub semiconcavity: Option<f64>,
    /// First-order minimizers at `vm`.
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightRecord {
    pub a: f64,
    pub b: f64,
    pub t0: f64,
    pub vm: f64,
    pub eta0: f64,
    pub deta_minus: f64,
    pub deta_plus: f64,
    pub total_mass: f64,
    pub endpoint_exponent: f64,
    pub hypotheses_hold: bool,
    pub checks: Vec<CheckRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub measured: Option<f64>,
}

impl From<&Check> for CheckRow {
    fn from(c: &Check) -> Self {
        Self {
            name: c.name.clone(),
            passed: c.passed,
            measured: c.measured,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderRow {
    pub eps: f64,
    pub gap: f64,
    pub lambda: f64,
    pub tau_eps: f64,
    pub el_residual: f64,
    pub mass_residual: f64,
    pub locality_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Minimize1dRecord {
    /// Newton tolerance on the scaled Euler–Lagrange residual.
    pub solver_tol: f64,
    pub ladder: Vec<LadderRow>,
    /// Extrapolated gap; `tol` is its distance to the finest raw gap.
    pub gap_limit: Option<Measured>,
    pub lambda_limit: LambdaLimitRecord,
    pub tau0: f64,
    /// Liminf lower bound at `(λ₀, τ₀)`.
    pub rhs: f64,
    /// `gap_limit ≥ rhs − 5%·|rhs|`.
    pub bound_holds: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaLimitRecord {
    pub estimate: f64,
    pub extrapolated: bool,
    pub bracket: (f64, f64),
    pub margin: f64,
}

impl From<&LambdaLimit> for LambdaLimitRecord {
    fn from(l: &LambdaLimit) -> Self {
        Self {
            estimate: l.estimate,
            extrapolated: l.extrapolated,
            bracket: l.bracket,
            margin: l.margin,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ranked {
    pub label: String,
    pub kappa: f64,
    pub perimeter: f64,
    pub f2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictRecord {
    /// Candidates sorted by increasing second-order value.
    pub ranking: Vec<Ranked>,
    pub selected: String,
    pub ties: Vec<String>,
    pub tie_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub eps: f64,
    pub n: usize,
    pub steps: usize,
    pub t_end: f64,
    pub sup_l1: f64,
    pub sup_motion_l1: f64,
    pub sup_dual: f64,
    pub max_mass_drift: f64,
    pub max_energy_increase: f64,
    pub energy_monotone: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsRecord {
    pub flow: String,
    pub runs: Vec<RunSummary>,
    pub l1_ratios: Vec<f64>,
    pub dual_ratios: Vec<f64>,
    /// Relative tolerance for "energy nonincreasing".
    pub energy_tol: f64,
}

const SHIFT_TOL: f64 = 1e-6;
const ENERGY_TOL: f64 = 1e-10;
const TIE_TOL: f64 = 1e-9;

struct Context<'a> {
    cfg: &'a ScenarioConfig,
    potential: Option<Potential>,
    layer: Option<LayerModel>,
    weight: Option<WeightFunction>,
}

impl Context<'_> {
    fn layer(&self) -> std::result::Result<&LayerModel, Box<dyn std::error::Error + Send + Sync>> {
        self.layer.as_ref().ok_or_else(|| "the constants stage has not run".into())
    }

    fn domain(&self) -> std::result::Result<DomainSpec, Box<dyn std::error::Error + Send + Sync>> {
        self.cfg.domain.ok_or_else(|| "no domain block".into())
    }
}

/// Runs the configured stages in order. On a stage failure the store keeps
/// what was written and gains a failure record.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ResultStore> {
    cfg.validate()?;
    let mut store = ResultStore::create(cfg, &cfg.stages)?;
    let mut ctx = Context {
        cfg,
        potential: None,
        layer: None,
        weight: None,
    };
    for &stage in &cfg.stages {
        let outcome = match stage {
            Stage::Constants => constants(&mut ctx, &mut store),
            Stage::Profile => profile(&mut ctx, &mut store),
            Stage::Iso => iso(&mut ctx, &mut store),
            Stage::Weight => weight(&mut ctx, &mut store),
            Stage::Minimize1d => minimize1d(&mut ctx, &mut store),
            Stage::Predict => predict(&mut ctx, &mut store),
            Stage::Dynamics => dynamics(&mut ctx, &mut store),
        };
        if let Err(e) = outcome {
            let message = e.to_string();
            store.fail(stage, &message)?;
            return Err(Error::Stage {
                stage: stage.name().into(),
                message,
            });
        }
    }
    Ok(store)
}

fn constants(ctx: &mut Context, store: &mut ResultStore) -> StageResult {
    let p = ctx.cfg.potential.build()?;
    let layer = LayerModel::new(&p)?;
    let k = layer.constants;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let mut max_error: f64 = 0.0;
    let samples = 20;
    for _ in 0..samples {
        let tau: f64 = rng.gen_range(-3.0..3.0);
        let v = shift_integral(&layer.profile, tau)?;
        max_error = max_error.max((v - (k.i0 - tau * k.gap())).abs());
    }
    store.record(
        Stage::Constants,
        &ConstantsRecord {
            potential: p.name().into(),
            a: k.a,
            b: k.b,
            q: k.q,
            c_w: measured(k.c_w, 1e-12),
            c_sym: measured(k.c_sym, 1e-10),
            i0: measured(k.i0, 1e-10),
            w2_a: k.w2_a,
            shift_identity: IdentityCheck {
                samples,
                seed: ctx.cfg.seed,
                max_error,
                tol: SHIFT_TOL,
                passed: max_error <= SHIFT_TOL,
            },
        },
    )?;
    ctx.potential = Some(p);
    ctx.layer = Some(layer);
    Ok(())
}

fn profile(ctx: &mut Context, store: &mut ResultStore) -> StageResult {
    let layer = ctx.layer()?;
    let c: ConstantsRecord = store.read(Stage::Constants)?;
    let mut t = Table::new("profile", &["t", "z", "dz"]);
    let window = (-8.0, 8.0);
    let rows = 321;
    for i in 0..rows {
        let s = window.0 + (window.1 - window.0) * i as f64 / (rows - 1) as f64;
        t.push(vec![num(s), num(layer.profile.z(s)), num(layer.profile.dz(s))]);
    }
    store.write_table(&t)?;
    let e = energy_integral(&layer.profile)?;
    store.record(
        Stage::Profile,
        &ProfileRecord {
            window,
            rows,
            energy: measured(e, 1e-8),
            equipartition_error: (e - 2.0 * c.c_w.value).abs(),
        },
    )?;
    Ok(())
}

/// Unit-area rectangle samples `(v, 𝓘(v))` used as the domination reference.
fn rectangle_reference(rect: &Rect, count: usize) -> Vec<(f64, f64)> {
    (1..count)
        .filter_map(|i| {
            let v = i as f64 / count as f64;
            rect.profile(v).ok().map(|(p, _)| (v, p))
        })
        .collect()
}

fn iso(ctx: &mut Context, store: &mut ResultStore) -> StageResult {
    let grid: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
    let mut table = Table::new("iso_profile", &["v", "value", "branch"]);
    let record = match ctx.domain()? {
        DomainSpec::Flat { level, vm } => {
            for &v in &grid {
                table.push(vec![num(v), num(level), "flat".into()]);
            }
            IsoRecord {
                kind: "flat".into(),
                n: 2,
                vm,
                value: measured(level, 0.0),
                d_minus: measured(0.0, 0.0),
                d_plus: measured(0.0, 0.0),
                semiconcavity: Some(0.0),
                candidates: vec![Candidate {
                    label: "flat".into(),
                    kappa: 0.0,
                    perimeter: level,
                }],
            }
        }
        DomainSpec::Smooth { perimeter, kappa, n, vm } => {
            let slope = (n as f64 - 1.0) * kappa;
            let surrogate = build_touching_iso(&TouchingParams::smooth(perimeter, slope, vm, n), &[])?;
            for &v in &grid {
                table.push(vec![num(v), num(surrogate.value(v)), "surrogate".into()]);
            }
            IsoRecord {
                kind: "smooth".into(),
                n,
                vm,
                value: measured(perimeter, 0.0),
                d_minus: measured(slope, 0.0),
                d_plus: measured(slope, 0.0),
                semiconcavity: None,
                candidates: vec![Candidate {
                    label: "smooth".into(),
                    kappa,
                    perimeter,
                }],
            }
        }
        DomainSpec::Rectangle { width, vm } => {
            let rect = Rect::unit_area(width)?;
            for &v in &grid {
                let (p, shape) = rect.profile(v)?;
                table.push(vec![num(v), num(p), shape.branch().label().into()]);
            }
            let (value, _) = rect.profile(vm)?;
            let fit = |levels| {
                let pts = IsoProfile::stencil(vm, 0.02, levels);
                let prof = IsoProfile::from_fn(&pts, Provenance::Analytic, |x| rect.profile(x).ok().map(|r| r.0));
                one_sided_derivatives(&prof, vm)
            };
            let (fine, coarse) = (fit(6)?, fit(5)?);
            let dense: Vec<f64> = (1..400).map(|i| i as f64 / 400.0).collect();
            let sampled = IsoProfile::from_fn(&dense, Provenance::Analytic, |x| rect.profile(x).ok().map(|r| r.0));
            let mut candidates: Vec<Candidate> = Vec::new();
            for s in rect.competitors(vm) {
                if (s.perimeter() - value).abs() <= 1e-9 * value {
                    let c = Candidate {
                        label: s.branch().label().into(),
                        kappa: s.curvature(),
                        perimeter: s.perimeter(),
                    };
                    let seen = candidates.iter().any(|d| {
                        d.label == c.label && (d.kappa - c.kappa).abs() <= 1e-12 && (d.perimeter - c.perimeter).abs() <= 1e-12
                    });
                    if !seen {
                        candidates.push(c);
                    }
                }
            }
            IsoRecord {
                kind: "rectangle".into(),
                n: 2,
                vm,
                value: measured(value, 1e-12),
                d_minus: measured(fine.d_minus, (fine.d_minus - coarse.d_minus).abs()),
                d_plus: measured(fine.d_plus, (fine.d_plus - coarse.d_plus).abs()),
                semiconcavity: semiconcavity_estimate(&sampled, (0.0, 1.0)).ok(),
                candidates,
            }
        }
    };
    store.write_table(&table)?;
    store.record(Stage::Iso, &record)?;
    Ok(())
}

fn weight(ctx: &mut Context, store: &mut ResultStore) -> StageResult {
    let iso: IsoRecord = store.read(Stage::Iso)?;
    let w = match ctx.domain()? {
        DomainSpec::Flat { .. } => WeightFunction::flat(iso.value.value, iso.vm)?,
        domain => {
            let reference = match domain {
                DomainSpec::Rectangle { width, .. } => rectangle_reference(&Rect::unit_area(width)?, 4000),
                _ => Vec::new(),
            };
            // Round-off in the fitted slopes must not flip their order.
            let d_plus = iso.d_plus.value.min(iso.d_minus.value);
            let params = TouchingParams::new(iso.value.value, iso.d_minus.value, d_plus, iso.vm, iso.n);
            let surrogate = build_touching_iso(&params, &reference)?;
            build_eta(&surrogate, &solve_v(&surrogate)?)
        }
    };
    let report = validate_eta(&w);
    let mut t = Table::new("eta", &["t", "eta"]);
    for (x, e) in w.samples(400) {
        t.push(vec![num(x), num(e)]);
    }
    store.write_table(&t)?;
    store.record(
        Stage::Weight,
        &WeightRecord {
            a: w.a,
            b: w.b,
            t0: w.t0,
            vm: w.vm,
            eta0: w.eta0,
            deta_minus: w.deta_minus,
            deta_plus: w.deta_plus,
            total_mass: w.total_mass(),
            endpoint_exponent: w.endpoint_exponent,
            hypotheses_hold: report.passed(),
            checks: report.checks.iter().map(CheckRow::from).collect(),
        },
    )?;
    ctx.weight = Some(w);
    Ok(())
}

fn minimize1d(ctx: &mut Context, store: &mut ResultStore) -> StageResult {
    let layer = ctx.layer()?;
    let w = ctx.weight.as_ref().ok_or("the weight stage has not run")?;
    let opts = MinimizeOptions::default();
    let m = limit_mass(w, layer.potential());
    let rs = minimize_ladder(w, layer, m, &ctx.cfg.eps, &opts)?;
    let lam = extract_lambda_limit(&rs, w, &layer.constants)?;
    let tau0 = solve_tau0(w, &layer.constants, lam.estimate)?;
    let rhs = theorem31_rhs(w, layer, lam.estimate, tau0)?;
    let gap = extrapolate_gap(&rs);
    let finest = rs.iter().min_by(|a, b| a.eps.total_cmp(&b.eps)).map(|r| r.best_gap());
    let mut t = Table::new(
        "minimize1d",
        &["eps", "gap", "lambda", "tau_eps", "el_residual", "mass_residual", "rhs"],
    );
    let ladder: Vec<LadderRow> = rs
        .iter()
        .map(|r| LadderRow {
            eps: r.eps,
            gap: r.best_gap(),
            lambda: r.best_lambda(),
            tau_eps: r.tau_eps,
            el_residual: r.el_residual,
            mass_residual: r.mass_residual,
            locality_ok: r.locality_ok,
        })
        .collect();
    for r in &ladder {
        t.push(vec![
            num(r.eps),
            num(r.gap),
            num(r.lambda),
            num(r.tau_eps),
            num(r.el_residual),
            num(r.mass_residual),
            num(rhs),
        ]);
    }
    store.write_table(&t)?;
    store.record(
        Stage::Minimize1d,
        &Minimize1dRecord {
            solver_tol: opts.tol,
            ladder,
            gap_limit: gap.map(|g| measured(g, finest.map_or(f64::NAN, |f| (f - g).abs()))),
            lambda_limit: LambdaLimitRecord::from(&lam),
            tau0,
            rhs,
            bound_holds: gap.map(|g| g >= rhs - 0.05 * rhs.abs()),
        },
    )?;
    Ok(())
}

fn predict(ctx: &mut Context, store: &mut ResultStore) -> StageResult {
    let layer = ctx.layer()?;
    let iso: IsoRecord = store.read(Stage::Iso)?;
    let geoms: Vec<MinimizerGeometry> = iso
        .candidates
        .iter()
        .map(|c| MinimizerGeometry {
            vm: iso.vm,
            ..MinimizerGeometry::new(c.kappa, c.perimeter, iso.n)
        })
        .collect();
    let sel = select_minimizer(&geoms, &layer.constants, TIE_TOL)?;
    let mut ranking: Vec<Ranked> = iso
        .candidates
        .iter()
        .zip(&geoms)
        .map(|(c, g)| {
            Ok(Ranked {
                label: c.label.clone(),
                kappa: c.kappa,
                perimeter: c.perimeter,
                f2: predict_f2(g, &layer.constants)?,
            })
        })
        .collect::<gammalab_core::Result<_>>()?;
    ranking.sort_by(|a, b| a.f2.total_cmp(&b.f2));
    let mut t = Table::new("predict", &["rank", "label", "kappa", "perimeter", "f2"]);
    for (i, r) in ranking.iter().enumerate() {
        t.push(vec![(i + 1).to_string(), r.label.clone(), num(r.kappa), num(r.perimeter), num(r.f2)]);
    }
    store.write_table(&t)?;
    store.record(
        Stage::Predict,
        &PredictRecord {
            ranking,
            selected: iso.candidates[sel.index].label.clone(),
            ties: sel.ties.iter().map(|&i| iso.candidates[i].label.clone()).collect(),
            tie_tol: TIE_TOL,
        },
    )?;
    Ok(())
}

fn dynamics(ctx: &mut Context, store: &mut ResultStore) -> StageResult {
    let spec: &DynamicsSpec = ctx.cfg.dynamics.as_ref().ok_or("no dynamics block")?;
    let potential = ctx.potential.clone().ok_or("the constants stage has not run")?;
    let scenario = Scenario {
        flow: spec.flow,
        geometry: spec.shape.geometry(),
        potential,
        eps: spec.eps.clone(),
        horizon_m: spec.horizon_m,
        cells_per_eps: spec.cells_per_eps,
        conserve_mass: true,
        options: RunOptions {
            dual_every: 1,
            record_every: 25,
        },
    };
    let ladder = slow_motion_experiment(&scenario)?;
    let mut summary = Table::new(
        "dynamics",
        &["eps", "n", "steps", "sup_l1", "sup_motion_l1", "sup_dual", "mass_drift", "energy_increase"],
    );
    let mut series = Table::new("dynamics_series", &["eps", "t", "mass", "energy", "l1", "dual"]);
    let mut runs = Vec::new();
    for r in &ladder.runs {
        summary.push(vec![
            num(r.eps),
            r.n.to_string(),
            r.steps.to_string(),
            num(r.sup_l1),
            num(r.sup_motion_l1),
            num(r.sup_dual),
            num(r.max_mass_drift),
            num(r.max_energy_increase),
        ]);
        for row in &r.series {
            series.push(vec![num(r.eps), num(row.t), num(row.mass), num(row.energy), num(row.l1), num(row.dual)]);
        }
        runs.push(RunSummary {
            eps: r.eps,
            n: r.n,
            steps: r.steps,
            t_end: r.t_end,
            sup_l1: r.sup_l1,
            sup_motion_l1: r.sup_motion_l1,
            sup_dual: r.sup_dual,
            max_mass_drift: r.max_mass_drift,
            max_energy_increase: r.max_energy_increase,
            energy_monotone: r.energy_monotone(ENERGY_TOL),
        });
    }
    store.write_table(&summary)?;
    store.write_table(&series)?;
    store.record(
        Stage::Dynamics,
        &DynamicsRecord {
            flow: match spec.flow {
                Flow::AllenCahn => "allen-cahn".into(),
                Flow::CahnHilliard => "cahn-hilliard".into(),
            },
            runs,
            l1_ratios: ladder.l1_ratios,
            dual_ratios: ladder.dual_ratios,
            energy_tol: ENERGY_TOL,
        },
    )?;
    Ok(())
}
