//! One line per acceptance criterion; exits non-zero when any fails.

use gammalab_cli::config::Stage;
use gammalab_cli::pipeline::Minimize1dRecord;
use gammalab_cli::{builtin, run_scenario};
use gammalab_core::gamma2::{predict_f2_q1, MinimizerGeometry};
use gammalab_core::potential::{make_asymmetric, make_quartic};
use gammalab_core::profile::{shift_integral, solve_tau_q1, weighted_moment, LayerModel};
use gammalab_dynamics::{slow_motion_experiment, Flow, Geometry, RunOptions, Scenario};
use gammalab_iso::analytic::{Corner, CutSide};
use gammalab_iso::brute::swap_local_minimizers;
use gammalab_iso::checks::indicator_field;
use gammalab_iso::*;
use gammalab_weighted::analysis::{lambda_bracket, solve_tau0, theorem31_rhs};
use gammalab_weighted::iso::{build_touching_iso, TouchingParams};
use gammalab_weighted::weight::{build_eta, solve_v};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

type Outcome = anyhow::Result<(bool, String)>;

fn quartic() -> LayerModel {
    LayerModel::new(&make_quartic()).expect("quartic layer")
}

fn c1_quartic_constants() -> Outcome {
    let m = quartic();
    let k = m.constants;
    let mut sup: f64 = 0.0;
    for i in 0..=200_000 {
        let t = -10.0 + i as f64 * 1e-4;
        sup = sup.max((m.profile.z(t) - t.tanh()).abs());
    }
    let tau = solve_tau_q1(1.0, 1.0, 2, &k)?;
    let ok = (k.c_w - 4.0 / 3.0).abs() <= 1e-10
        && sup <= 1e-8
        && k.c_sym.abs() <= 1e-10
        && (tau + 1.0 / 12.0).abs() <= 1e-8;
    Ok((
        ok,
        format!(
            "|c_W-4/3|={:.1e} (1e-10), sup|z-tanh|={sup:.1e} (1e-8), |c_sym|={:.1e} (1e-10), |τ+1/12|={:.1e} (1e-8)",
            (k.c_w - 4.0 / 3.0).abs(),
            k.c_sym.abs(),
            (tau + 1.0 / 12.0).abs()
        ),
    ))
}

fn c2_shift_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut shift_err: f64 = 0.0;
    let mut moment_err: f64 = 0.0;
    for p in [make_quartic(), make_asymmetric(0.5)?] {
        let m = LayerModel::new(&p)?;
        let k = m.constants;
        for _ in 0..20 {
            let tau = rng.gen_range(-3.0..3.0);
            shift_err = shift_err.max((shift_integral(&m.profile, tau)? - (k.i0 - tau * k.gap())).abs());
        }
        for _ in 0..10 {
            let tau = rng.gen_range(-3.0..3.0);
            moment_err = moment_err.max((weighted_moment(&m.profile, tau, None)? - (k.c_sym + tau * k.c_w)).abs());
        }
    }
    Ok((
        shift_err <= 1e-6 && moment_err <= 1e-6,
        format!("shift integral err={shift_err:.1e} (1e-6), weighted moment err={moment_err:.1e} (1e-6)"),
    ))
}

fn c3_cross_formula() -> Outcome {
    let layer = quartic();
    let k = &layer.constants;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let kappa = rng.gen_range(-2.0..2.0);
        let p = rng.gen_range(0.5..2.0);
        let n = rng.gen_range(2..=3u32);
        let iso = build_touching_iso(&TouchingParams::smooth(p, (n as f64 - 1.0) * kappa, 0.5, n), &[])?;
        let w = build_eta(&iso, &solve_v(&iso)?);
        let lambda0 = lambda_bracket(&w, k).0;
        let tau0 = solve_tau0(&w, k, lambda0)?;
        let rhs = theorem31_rhs(&w, &layer, lambda0, tau0)?;
        let f2 = predict_f2_q1(&MinimizerGeometry::new(kappa, p, n), k)?;
        worst = worst.max((rhs - f2).abs());
    }
    Ok((worst <= 1e-6, format!("5 random geometries, max |rhs - F2|={worst:.1e} (1e-6)")))
}

fn ladder_record(name: &str) -> anyhow::Result<Minimize1dRecord> {
    let dir = tempfile::tempdir()?;
    let mut cfg = builtin(name)?;
    cfg.output = dir.path().to_path_buf();
    let store = run_scenario(&cfg)?;
    Ok(store.read(Stage::Minimize1d)?)
}

fn c4_flat_weight() -> Outcome {
    let rec = ladder_record("flat")?;
    let cw = quartic().constants.c_w;
    let last = rec
        .ladder
        .iter()
        .find(|r| r.eps == 1.0 / 256.0)
        .ok_or_else(|| anyhow::anyhow!("no ε = 2⁻⁸ rung"))?;
    let lam = rec.ladder.iter().map(|r| r.lambda.abs()).fold(0.0, f64::max);
    let accepted = rec.ladder.iter().all(|r| r.el_residual <= rec.solver_tol && r.locality_ok);
    Ok((
        last.gap.abs() <= 1e-3 * cw && lam <= 1e-6 && accepted,
        format!(
            "|gap(2⁻⁸)|={:.1e} (≤{:.1e}), max|λ_ε| over ladder={lam:.1e} (1e-6), solves accepted={accepted}",
            last.gap.abs(),
            1e-3 * cw
        ),
    ))
}

fn c5_smooth_weight() -> Outcome {
    let rec = ladder_record("smooth")?;
    let target = -1.0 / 9.0;
    let gap = rec.gap_limit.ok_or_else(|| anyhow::anyhow!("gap not extrapolated"))?.value;
    let rel_gap = ((gap - target) / target).abs();
    let lam = rec.lambda_limit.estimate;
    let rel_lam = (lam - 4.0 / 3.0).abs() / (4.0 / 3.0);
    Ok((
        rel_gap <= 0.05 && rel_lam <= 0.01,
        format!("gap→{gap:.7} vs -1/9 rel={rel_gap:.1e} (5%), λ₀={lam:.7} vs 4/3 rel={rel_lam:.1e} (1%)"),
    ))
}

fn c6_rectangle_crossover() -> Outcome {
    let rec = ladder_record("rect-crossover")?;
    let cw = quartic().constants.c_w;
    let hi = 2.0 * cw * (PI / 2.0) / 2.0;
    let (lo_b, hi_b) = rec.lambda_limit.bracket;
    let lam = rec.lambda_limit.estimate;
    let margin = (lam - 0.0).min(hi - lam);
    let gap = rec.gap_limit.ok_or_else(|| anyhow::anyhow!("gap not extrapolated"))?.value;
    let bound = rec.rhs - 0.05 * rec.rhs.abs();
    // The pipeline's bracket comes from the measured slope of the profile.
    let ok = lo_b.abs() < 1e-12 && (hi_b - hi).abs() < 1e-6 && margin >= 1e-2 && gap >= bound;
    Ok((
        ok,
        format!(
            "λ₀={lam:.5} in [0, {hi:.4}] margin={margin:.3} (1e-2), |bracket-exact|={:.1e} (1e-6), gap→{gap:.7} ≥ rhs-5%={bound:.7} (rhs={:.7})",
            (hi_b - hi).abs(),
            rec.rhs
        ),
    ))
}

fn c7_pixel_suite() -> Outcome {
    let domains = [
        PixelDomain::rectangle(4, 4)?,
        PixelDomain::rectangle(2, 8)?,
        PixelDomain::rectangle(3, 5)?,
        PixelDomain::from_ascii("##..\n##..\n####\n####")?,
        PixelDomain::from_ascii(".##.\n####\n####\n.##.")?,
        PixelDomain::from_ascii("##.##\n##.##\n#####")?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut profiles, mut swaps, mut violations) = (0usize, 0usize, 0usize);
    for d in &domains {
        let n = d.n_cells();
        let a = d.cell_area();
        let free = profile_exhaustive(d, None)?;
        let mut e0s: Vec<Region> = (1..n).map(|k| iso_bruteforce(d, k as f64 * a, None).map(|r| r.argmin)).collect::<Result<_>>()?;
        for _ in 0..6 {
            let p = rng.gen_range(0.2..0.8);
            e0s.push(d.region_where(|_, _| rng.gen_bool(p)));
        }
        for e0 in &e0s {
            let mut prev: Vec<Option<f64>> = vec![None; n + 1];
            for j in 0..=n / 2 {
                let table = profile_exhaustive(d, Some((e0, j as f64 * a)))?;
                profiles += 1;
                for k in 0..=n {
                    // Unconstrained minimum is a lower bound; widening δ never
                    // loses a competitor nor raises the minimum.
                    if let Some(v) = table[k] {
                        if v < free[k].unwrap_or(f64::INFINITY) - 1e-12 {
                            violations += 1;
                        }
                    }
                    match (prev[k], table[k]) {
                        (Some(_), None) => violations += 1,
                        (Some(p), Some(v)) if v > p + 1e-12 => violations += 1,
                        _ => {}
                    }
                }
                prev = table;
            }
        }
        for m in swap_local_minimizers(d)? {
            let e0 = d.region_from_bits(m as u64);
            let local = iso_bruteforce(d, e0.count() as f64 * a, Some((&e0, a)))?;
            swaps += 1;
            if (local.value - perimeter_rel(&e0, d)).abs() > 1e-12 {
                violations += 1;
            }
        }
    }
    Ok((
        violations == 0,
        format!("{} domains, {profiles} constrained profiles, {swaps} swap minimizers, violations={violations} (0)", domains.len()),
    ))
}

fn c8_level_sets() -> Outcome {
    let d = PixelDomain::rectangle(12, 12)?;
    let h = d.h;
    let area = d.cell_area();
    let n = d.n_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut holds, mut violated, mut not_met) = (0usize, 0usize, 0usize);
    for i in 0..1000 {
        let e0 = match i % 3 {
            0 => {
                let (r0, c0) = (rng.gen_range(0..12), rng.gen_range(0..12));
                let (r1, c1) = (rng.gen_range(r0..12), rng.gen_range(c0..12));
                d.region_where(|r, c| (r0..=r1).contains(&r) && (c0..=c1).contains(&c))
            }
            1 => {
                let (cx, cy, rad) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen_range(0.05..0.6));
                d.region_where(|r, c| ((c as f64 + 0.5) * h - cx).hypot((r as f64 + 0.5) * h - cy) < rad)
            }
            _ => {
                let p = rng.gen_range(0.1..0.9);
                d.region_where(|_, _| rng.gen_bool(p))
            }
        };
        let base = indicator_field(&e0, -1.0, 1.0);
        let delta = rng.gen_range(0.002..0.3);
        let raw: Vec<f64> = match i % 5 {
            0 | 1 => {
                let (kx, ky, ph) = (rng.gen_range(0.5..6.0), rng.gen_range(0.5..6.0), rng.gen_range(0.0..6.3));
                (0..n).map(|j| ((j % 12) as f64 * h * kx + ph).sin() * ((j / 12) as f64 * h * ky).cos()).collect()
            }
            2 | 3 => (0..n)
                .map(|_| if rng.gen_bool(0.05) { rng.gen_range(-3.0..3.0) } else { 0.0 })
                .collect(),
            _ => base.iter().map(|&u| if rng.gen_bool(0.1) { -2.0 * u } else { 0.0 }).collect(),
        };
        let norm = area * raw.iter().map(|x| x.abs()).sum::<f64>();
        let scale = if norm > 0.0 { 2.0 * delta * (1.0 - 1e-9) * rng.gen_range(0.1..=1.0) / norm } else { 0.0 };
        let u: Vec<f64> = base.iter().zip(&raw).map(|(b, p)| b + scale * p).collect();
        match level_set_alpha_check(&d, &u, &e0, delta, -1.0, 1.0)? {
            LevelSetOutcome::Holds { .. } => holds += 1,
            LevelSetOutcome::Violated { .. } => violated += 1,
            LevelSetOutcome::HypothesisNotMet { .. } => not_met += 1,
        }
    }
    Ok((
        violated == 0 && not_met == 0,
        format!("1000 fields on 12×12: holds={holds}, violated={violated} (0), hypothesis not met={not_met} (0)"),
    ))
}

fn c9_analytic_sweeps() -> Outcome {
    let sq = Rect::unit_area(1.0)?;
    let cut = sq.shape(Family::Cut(CutSide::Left), 1.0 / PI).ok_or_else(|| anyhow::anyhow!("no straight cut"))?;
    let deltas: Vec<f64> = (0..6).map(|k| 0.2 * 0.5f64.powi(k)).collect();
    let s = curvature_limit_sweep(&cut, 0.0, &deltas, 0.01, 5)?;
    let cut_err = s.final_error();
    let mono = s.monotone(1e-9);
    let disk = sq.shape(Family::Disk(Corner::LowerLeft), 0.2).ok_or_else(|| anyhow::anyhow!("no quarter disk"))?;
    let kappa = disk.curvature();
    let q = curvature_limit_sweep(&disk, kappa, &[0.1, 0.01, 0.001], 0.01, 5)?;
    let rel = q.final_error() / kappa;
    Ok((
        cut_err <= 0.05 && mono && rel <= 0.02,
        format!("straight cut |D±| at δ={:.5}: {cut_err:.1e} (0.05), monotone={mono}; quarter disk err/κ={rel:.1e} (0.02)", deltas[5]),
    ))
}

fn c10_dynamics() -> Outcome {
    let scenario = |flow, geometry| Scenario {
        flow,
        geometry,
        potential: make_quartic(),
        eps: vec![0.08, 0.04, 0.02],
        horizon_m: 1.0,
        cells_per_eps: 4.0,
        conserve_mass: true,
        options: RunOptions {
            dual_every: 1,
            record_every: 100,
        },
    };
    let ac = slow_motion_experiment(&scenario(Flow::AllenCahn, Geometry::centred_disk(0.2)))?;
    let ch = slow_motion_experiment(&scenario(Flow::CahnHilliard, Geometry::Strip { width: 0.4 }))?;
    let max = |r: &gammalab_dynamics::LadderReport, f: fn(&gammalab_dynamics::RunReport) -> f64| {
        r.runs.iter().map(f).fold(0.0, f64::max)
    };
    let (ac_mass, ac_rise) = (max(&ac, |r| r.max_mass_drift), max(&ac, |r| r.max_energy_increase));
    let (ch_mass, ch_rise) = (max(&ch, |r| r.max_mass_drift), max(&ch, |r| r.max_energy_increase));
    let ok = ac.l1_ratios.iter().all(|&r| r >= 1.5)
        && ac_mass <= 1e-10
        && ac_rise <= 1e-12
        && ch_mass <= 1e-12
        && ch_rise <= 1e-12
        && ch.dual_ratios.iter().all(|&r| r > 1.0);
    Ok((
        ok,
        format!(
            "AC disk L¹ ratios={:.2?} (≥1.5) mass={ac_mass:.1e} (1e-10) energy rise={ac_rise:.1e} (1e-12); \
             CH strip dual ratios={:.2?} (>1) mass={ch_mass:.1e} (1e-12) energy rise={ch_rise:.1e} (1e-12)",
            ac.l1_ratios, ch.dual_ratios
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("quartic constants", c1_quartic_constants),
        ("shift identity", c2_shift_identity),
        ("cross-formula keystone", c3_cross_formula),
        ("flat weight", c4_flat_weight),
        ("smooth weight", c5_smooth_weight),
        ("rectangle crossover", c6_rectangle_crossover),
        ("pixel oracle suite", c7_pixel_suite),
        ("level-set property", c8_level_sets),
        ("analytic sweeps", c9_analytic_sweeps),
        ("dynamics ladder", c10_dynamics),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(Ok(r)) => r,
            Ok(Err(e)) => (false, format!("error: {e:#}")),
            Err(_) => (false, "panicked".into()),
        };
        if !ok {
            failed += 1;
        }
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2} {name}: {detail} [{:.1}s]", i + 1, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
