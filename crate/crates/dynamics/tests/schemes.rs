use gammalab_core::potential::{make_asymmetric, make_quartic};
use gammalab_core::LayerModel;
use gammalab_dynamics::checkpoint;
use gammalab_dynamics::spectral::Dct2d;
use gammalab_dynamics::*;
use std::f64::consts::PI;

fn quartic() -> BoxedPotential {
    BoxedPotential::new(make_quartic())
}

fn bumpy(n: usize) -> Field2D {
    Field2D::from_fn(n, n, 1.0 / n as f64, |x, y| {
        0.3 * (3.0 * x).sin() * (2.0 * y + 0.4).cos() + 0.2 * (7.0 * x * y).cos() - 0.1
    })
}

#[test]
fn dct_round_trip_and_laplacian() {
    let (nx, ny) = (12, 9);
    let h = 0.1;
    let mut dct = Dct2d::new(nx, ny, h);
    let f = Field2D::from_fn(nx, ny, h, |x, y| (x * 3.0).sin() + y * y);
    let mut w = f.u.clone();
    dct.forward(&mut w);
    assert!((w[0] - f.u.iter().sum::<f64>()).abs() < 1e-12);
    dct.inverse(&mut w);
    let err = w.iter().zip(&f.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-13);

    // Spectral Laplacian equals the five-point stencil with mirrored ghosts.
    let mut w = f.u.clone();
    dct.forward(&mut w);
    for (c, l) in w.iter_mut().zip(dct.laplacian()) {
        *c *= l;
    }
    dct.inverse(&mut w);
    let at = |i: isize, j: isize| {
        let i = i.clamp(0, nx as isize - 1) as usize;
        let j = j.clamp(0, ny as isize - 1) as usize;
        f.u[j * nx + i]
    };
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            let lap = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) / (h * h);
            assert!((w[j as usize * nx + i as usize] - lap).abs() < 1e-9);
        }
    }
}

#[test]
fn dual_norm_examples() {
    let zero = Field2D::unit_square(16, 0.0);
    assert_eq!(h1_dual_norm(&zero), 0.0);
    let one = Field2D::unit_square(16, 1.0);
    assert!((h1_dual_norm(&one) - 1.0).abs() < 1e-13);
    let f = bumpy(20);
    let f2 = f.same_grid(f.u.iter().map(|v| 2.0 * v).collect());
    assert!((h1_dual_norm(&f2) - 2.0 * h1_dual_norm(&f)).abs() < 1e-13);
    // The dual norm is weaker than L²: ‖f‖' ≤ ‖f‖_{L²}.
    let l2 = (f.u.iter().map(|v| v * v).sum::<f64>() * f.cell_area()).sqrt();
    assert!(h1_dual_norm(&f) <= l2);
    // A cosine mode is an eigenfunction: ‖cos(πx)‖' = ‖cos(πx)‖/√(1+μ).
    let n = 64;
    let c = Field2D::from_fn(n, n, 1.0 / n as f64, |x, _| (PI * x).cos());
    let mu = 4.0 * (n as f64).powi(2) * (PI / (2.0 * n as f64)).sin().powi(2);
    let l2 = (c.u.iter().map(|v| v * v).sum::<f64>() * c.cell_area()).sqrt();
    assert!((h1_dual_norm(&c) - l2 / (1.0 + mu).sqrt()).abs() < 1e-12);
}

#[test]
fn constants_are_stationary() {
    let pot = quartic();
    for s in [-1.0, 0.0, 1.0, 0.37] {
        let u = Field2D::unit_square(16, s);
        let cfg = SimConfig::new(Flow::AllenCahn, 0.1, u.h, &pot);
        let next = step_ac(&u, &pot, cfg).unwrap();
        assert!(next.u.iter().all(|v| (v - s).abs() < 1e-14), "AC moved constant {s}");
        let cfg = SimConfig::new(Flow::CahnHilliard, 0.1, u.h, &pot);
        let next = step_ch(&u, &pot, cfg).unwrap();
        assert!(next.u.iter().all(|v| (v - s).abs() < 1e-14), "CH moved constant {s}");
    }
}

#[test]
fn stability_rules_are_enforced() {
    let pot = quartic();
    let u = Field2D::unit_square(8, 0.0);
    let mut cfg = SimConfig::new(Flow::AllenCahn, 0.1, u.h, &pot);
    cfg.dt = 1.0;
    assert!(matches!(Simulator::new(u.clone(), pot.clone(), cfg), Err(Error::Unstable { .. })));
    let mut cfg = SimConfig::new(Flow::CahnHilliard, 0.1, u.h, &pot);
    cfg.stabilization = 0.1;
    assert!(matches!(Simulator::new(u, pot, cfg), Err(Error::Unstable { .. })));
}

#[test]
fn time_step_rule() {
    let pot = quartic();
    // sup W'' on [−1.4, 1.4] is 12·1.96 − 4.
    assert!((pot.lipschitz - 19.52).abs() < 1e-9);
    let cfg = SimConfig::new(Flow::AllenCahn, 0.04, 0.01, &pot);
    assert!((cfg.dt - 0.1 / 19.52).abs() < 1e-15);
    let cfg = SimConfig::new(Flow::AllenCahn, 0.04, 0.002, &pot);
    assert!((cfg.dt - 0.002f64.powi(2) / (8.0 * 0.04f64.powi(2))).abs() < 1e-15);
}

#[test]
fn extension_is_c2_and_grows_linearly() {
    let pot = quartic();
    for e in [pot.lo, pot.hi] {
        for d in [1e-7, -1e-7] {
            assert!((pot.w(e + d) - pot.inner.w(e + d)).abs() < 1e-12);
            assert!((pot.dw(e + d) - pot.inner.dw(e + d)).abs() < 1e-5);
        }
    }
    let g = pot.growth_check(1.0, 50.0);
    assert!(g.c1.is_finite() && g.c1 < 100.0);
}

fn run_steps(sim: &mut Simulator, steps: usize) -> (f64, f64) {
    let m0 = sim.field.mass();
    let mut e = sim.energy();
    let mut drift: f64 = 0.0;
    let mut rise: f64 = f64::NEG_INFINITY;
    for _ in 0..steps {
        sim.step(sim.cfg.dt).unwrap();
        drift = drift.max((sim.field.mass() - m0).abs());
        let e1 = sim.energy();
        rise = rise.max(e1 - e);
        e = e1;
    }
    (drift, rise)
}

#[test]
fn allen_cahn_conserves_mass_and_decreases_energy() {
    let pot = quartic();
    let u = bumpy(32);
    let mut cfg = SimConfig::new(Flow::AllenCahn, 0.05, u.h, &pot);
    cfg.horizon_m = 1e9;
    let mut sim = Simulator::new(u, pot, cfg).unwrap();
    let (drift, rise) = run_steps(&mut sim, 10_000);
    assert!(drift <= 1e-10, "mass drift {drift:e}");
    assert!(rise <= 1e-10 * sim.energy().abs().max(1e-3), "energy rise {rise:e}");
}

#[test]
fn plain_allen_cahn_loses_mass() {
    let pot = quartic();
    let u = bumpy(32);
    let mut cfg = SimConfig::new(Flow::AllenCahn, 0.05, u.h, &pot);
    cfg.conserve_mass = false;
    cfg.horizon_m = 1e9;
    let mut sim = Simulator::new(u, pot, cfg).unwrap();
    let (drift, _) = run_steps(&mut sim, 200);
    assert!(drift > 1e-3, "non-conserving control kept its mass (drift {drift:e})");
}

#[test]
fn cahn_hilliard_conserves_mass_and_decreases_energy() {
    let pot = BoxedPotential::new(make_asymmetric(0.5).unwrap());
    let u = bumpy(32);
    let mut cfg = SimConfig::new(Flow::CahnHilliard, 0.05, u.h, &pot);
    cfg.dt = 1e-4;
    cfg.dt_start = 1e-4;
    cfg.horizon_m = 1e9;
    let mut sim = Simulator::new(u, pot, cfg).unwrap();
    let e0 = sim.energy();
    let (drift, rise) = run_steps(&mut sim, 10_000);
    assert!(drift <= 1e-12, "mass drift {drift:e}");
    assert!(rise <= 1e-10 * e0, "energy rise {rise:e}");
    assert!(sim.energy() < e0);
}

#[test]
fn well_prepared_disk() {
    let p = make_quartic();
    let layer = LayerModel::new(&p).unwrap();
    let pot = BoxedPotential::new(p);
    let g = Geometry::centred_disk(0.2);
    let eps = 0.02;
    let (u0, rep) = well_prepared_init(&g, 200, eps, &layer, &pot, None).unwrap();
    assert!(rep.mass_residual <= 1e-12, "{rep:?}");
    let rel = (rep.energy_over_eps - rep.first_order).abs() / rep.first_order;
    assert!(rel < 0.03, "F/ε = {} vs 2c_W P = {}", rep.energy_over_eps, rep.first_order);
    assert!((u0.mass() - (-0.2 + 0.8)).abs() < 1e-12);
    // An impossible mass is rejected.
    let err = well_prepared_init(&g, 64, eps, &layer, &pot, Some(0.95)).unwrap_err();
    assert!(matches!(err, Error::MassMismatch { .. }));
}

#[test]
fn zero_horizon_reports_initial_distance() {
    let p = make_quartic();
    let layer = LayerModel::new(&p).unwrap();
    let pot = BoxedPotential::new(p);
    let g = Geometry::centred_disk(0.2);
    let (u0, _) = well_prepared_init(&g, 40, 0.1, &layer, &pot, None).unwrap();
    let mut cfg = SimConfig::new(Flow::AllenCahn, 0.1, u0.h, &pot);
    cfg.horizon_m = 0.0;
    let r = run(u0, &g, &pot, cfg, RunOptions::default()).unwrap();
    assert_eq!(r.steps, 0);
    assert_eq!(r.sup_l1, r.initial_l1);
    assert_eq!(r.sup_dual, r.initial_dual);
}

#[test]
fn checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.bin");
    let f = bumpy(10);
    checkpoint::save(&path, &f, 0.05, 1.25, 40).unwrap();
    let (g, header) = checkpoint::load(&path).unwrap();
    assert_eq!(g.u, f.u);
    assert_eq!((header.nx, header.ny, header.step), (10, 10, 40));
    assert_eq!(header.t, 1.25);
    std::fs::write(&path, [0u8; 12]).unwrap();
    assert!(checkpoint::load(&path).is_err());
}
