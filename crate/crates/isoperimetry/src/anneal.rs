//! Simulated annealing for domains too large to enumerate. Results are
//! upper bounds only and are meant for plots.

use crate::brute::attainable_count;
use crate::error::{Error, Result};
use crate::pixel::{alpha, PixelDomain, Region};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct AnnealOptions {
    pub sweeps: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub seed: u64,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        Self {
            sweeps: 400,
            t_start: 2.0,
            t_end: 0.02,
            seed: 7,
        }
    }
}

/// Swap-move annealing of the edge count at fixed volume `v`, optionally
/// keeping `α(E₀, E) ≤ δ`. Starts from the first `k` cells, or from `E₀`
/// when constrained.
pub fn anneal(
    omega: &PixelDomain,
    v: f64,
    constraint: Option<(&Region, f64)>,
    opts: AnnealOptions,
) -> Result<(f64, Region)> {
    let n = omega.n_cells();
    let k = attainable_count(omega, v)?;
    if k == 0 || k == n {
        let r = if k == 0 { omega.empty_region() } else { omega.full_region() };
        return Ok((0.0, r));
    }
    let mut e = match constraint {
        Some((e0, _)) if e0.count() == k => e0.clone(),
        Some((e0, delta)) => {
            // Grow or shrink E₀ greedily in index order to the target volume.
            let mut e = e0.clone();
            let mut i = 0;
            while e.count() != k && i < n {
                if (e.count() < k) != e.mask[i] {
                    e.mask[i] = !e.mask[i];
                }
                i += 1;
            }
            if alpha(e0, &e) > delta + 1e-12 {
                return Err(Error::InvalidParameter("no admissible starting set".into()));
            }
            e
        }
        None => {
            let mut e = omega.empty_region();
            e.mask[..k].iter_mut().for_each(|b| *b = true);
            e
        }
    };
    let adj = omega.adjacency();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut edges = omega.boundary_edges(&e) as i64;
    let mut best = (edges, e.clone());
    let moves = opts.sweeps * n;
    let ratio = (opts.t_end / opts.t_start).powf(1.0 / moves.max(1) as f64);
    let mut temp = opts.t_start;
    let local = |e: &Region, i: usize| -> i64 {
        adj[i].iter().filter(|&&j| e.mask[j] != e.mask[i]).count() as i64
    };
    for _ in 0..moves {
        temp *= ratio;
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if e.mask[i] == e.mask[j] {
            continue;
        }
        let before = local(&e, i) + local(&e, j) - adj[i].contains(&j) as i64;
        e.mask.swap(i, j);
        let after = local(&e, i) + local(&e, j) - adj[i].contains(&j) as i64;
        let delta_e = after - before;
        let admissible = constraint.map_or(true, |(e0, d)| alpha(e0, &e) <= d + 1e-12);
        if admissible && (delta_e <= 0 || rng.gen::<f64>() < (-(delta_e as f64) / temp).exp()) {
            edges += delta_e;
            if edges < best.0 {
                best = (edges, e.clone());
            }
        } else {
            e.mask.swap(i, j);
        }
    }
    Ok((best.0 as f64 * omega.h, best.1))
}
