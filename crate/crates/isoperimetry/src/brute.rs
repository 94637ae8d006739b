//! Exhaustive subset enumeration for the discrete (local) isoperimetric
//! problem on small pixel domains.

use crate::error::{Error, Result};
use crate::pixel::{PixelDomain, Region};
use rayon::prelude::*;
use serde::Serialize;

pub const MAX_CELLS: usize = 24;
const CHUNK: u32 = 1 << 14;

/// Best subset found by the enumeration.
///
/// Ties are broken towards the smallest bit mask, where bit `i` is cell `i`
/// (row-major over Ω).
#[derive(Debug, Clone, Serialize)]
pub struct BruteForceResult {
    pub value: f64,
    pub edges: usize,
    pub argmin: Region,
    /// Number of subsets attaining the minimum.
    pub ties: usize,
}

/// Perimeter bookkeeping on bit masks.
pub(crate) struct MaskGraph {
    n: usize,
    neighbours: Vec<u32>,
}

impl MaskGraph {
    pub(crate) fn new(omega: &PixelDomain) -> Result<Self> {
        let n = omega.n_cells();
        if n > MAX_CELLS {
            return Err(Error::TooManyCells { cells: n, max: MAX_CELLS });
        }
        let mut neighbours = vec![0u32; n];
        for &(i, j) in omega.edges() {
            neighbours[i] |= 1 << j;
            neighbours[j] |= 1 << i;
        }
        Ok(Self { n, neighbours })
    }

    #[inline]
    pub(crate) fn edges(&self, mask: u32) -> usize {
        let mut rest = mask;
        let mut count = 0;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            count += (self.neighbours[i] & !mask).count_ones() as usize;
        }
        count
    }

    pub(crate) fn full(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }
}

#[derive(Clone, Copy)]
struct Best {
    edges: usize,
    mask: u32,
    ties: usize,
}

impl Best {
    const NONE: Best = Best {
        edges: usize::MAX,
        mask: u32::MAX,
        ties: 0,
    };

    fn offer(&mut self, edges: usize, mask: u32) {
        if edges < self.edges {
            *self = Best { edges, mask, ties: 1 };
        } else if edges == self.edges {
            self.ties += 1;
            self.mask = self.mask.min(mask);
        }
    }

    fn merge(a: Best, b: Best) -> Best {
        match a.edges.cmp(&b.edges) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Equal => Best {
                edges: a.edges,
                mask: a.mask.min(b.mask),
                ties: a.ties + b.ties,
            },
        }
    }
}

/// Number of cells `k` with `k h² = v`, or an error naming the neighbours.
pub fn attainable_count(omega: &PixelDomain, v: f64) -> Result<usize> {
    let area = omega.cell_area();
    let n = omega.n_cells();
    if !(v.is_finite() && v >= -1e-12 && v <= omega.measure() + 1e-12) {
        return Err(Error::InvalidParameter(format!("volume {v} outside [0, |Ω|]")));
    }
    let k = (v / area).round();
    if (k * area - v).abs() <= 1e-9 {
        return Ok(k as usize);
    }
    let lo = (v / area).floor().clamp(0.0, n as f64);
    let hi = (v / area).ceil().clamp(0.0, n as f64);
    Err(Error::Unattainable {
        volume: v,
        below: lo * area,
        above: hi * area,
    })
}

/// `min { P(E;Ω) : |E| = v, α(E₀,E) ≤ δ }` by enumerating every subset; the
/// α-constraint is dropped when `constraint` is `None`.
pub fn iso_bruteforce(
    omega: &PixelDomain,
    v: f64,
    constraint: Option<(&Region, f64)>,
) -> Result<BruteForceResult> {
    let graph = MaskGraph::new(omega)?;
    let k = attainable_count(omega, v)? as u32;
    let (e0, budget) = match constraint {
        Some((e0, delta)) => {
            if e0.mask.len() != omega.n_cells() {
                return Err(Error::InvalidParameter("E₀ belongs to another domain".into()));
            }
            (e0.to_bits() as u32, alpha_budget(omega, delta)?)
        }
        None => (0, u32::MAX),
    };
    let total: u64 = 1u64 << graph.n;
    let chunks = total.div_ceil(CHUNK as u64);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK as u64;
            let end = (start + CHUNK as u64).min(total);
            let mut best = Best::NONE;
            for m in start..end {
                let m = m as u32;
                if m.count_ones() != k {
                    continue;
                }
                if budget != u32::MAX {
                    let a = (e0 & !m).count_ones().min((m & !e0).count_ones());
                    if a > budget {
                        continue;
                    }
                }
                best.offer(graph.edges(m), m);
            }
            best
        })
        .reduce(|| Best::NONE, Best::merge);
    if best.ties == 0 {
        return Err(Error::InvalidParameter(format!(
            "no subset of volume {v} satisfies the α-constraint"
        )));
    }
    Ok(BruteForceResult {
        value: best.edges as f64 * omega.h,
        edges: best.edges,
        argmin: omega.region_from_bits(best.mask as u64),
        ties: best.ties,
    })
}

/// Largest admissible cell count for `α ≤ δ` (closed constraint).
fn alpha_budget(omega: &PixelDomain, delta: f64) -> Result<u32> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("δ = {delta} must be ≥ 0")));
    }
    // Ties at exactly δ are admitted.
    Ok(((delta / omega.cell_area()) * (1.0 + 1e-12) + 1e-12).floor().min(64.0) as u32)
}

/// The whole discrete profile `k ↦ 𝓘^{E₀,δ}(k h²)` for `k = 0..=N` in one
/// pass; `None` where no subset is admissible.
pub fn profile_exhaustive(
    omega: &PixelDomain,
    constraint: Option<(&Region, f64)>,
) -> Result<Vec<Option<f64>>> {
    let graph = MaskGraph::new(omega)?;
    let (e0, budget) = match constraint {
        Some((e0, delta)) => (e0.to_bits() as u32, alpha_budget(omega, delta)?),
        None => (0, u32::MAX),
    };
    let n = graph.n;
    let total: u64 = 1u64 << n;
    let chunks = total.div_ceil(CHUNK as u64);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK as u64;
            let end = (start + CHUNK as u64).min(total);
            let mut best = vec![usize::MAX; n + 1];
            for m in start..end {
                let m = m as u32;
                if budget != u32::MAX {
                    let a = (e0 & !m).count_ones().min((m & !e0).count_ones());
                    if a > budget {
                        continue;
                    }
                }
                let k = m.count_ones() as usize;
                let e = graph.edges(m);
                if e < best[k] {
                    best[k] = e;
                }
            }
            best
        })
        .reduce(
            || vec![usize::MAX; n + 1],
            |a, b| a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect(),
        );
    Ok(best
        .into_iter()
        .map(|e| (e != usize::MAX).then(|| e as f64 * omega.h))
        .collect())
}

/// Whether `e0` is a discrete volume-constrained local minimizer: no single
/// swap of a cell in `E₀` for one outside lowers the perimeter. Swaps are
/// exactly the equal-volume competitors with `α(E₀,E) ≤ h²`.
pub fn is_swap_local_minimizer(omega: &PixelDomain, e0: &Region) -> bool {
    let base = omega.boundary_edges(e0);
    let mut e = e0.clone();
    let inside: Vec<usize> = (0..omega.n_cells()).filter(|&i| e0.contains(i)).collect();
    let outside: Vec<usize> = (0..omega.n_cells()).filter(|&i| !e0.contains(i)).collect();
    for &i in &inside {
        for &j in &outside {
            e.mask[i] = false;
            e.mask[j] = true;
            let p = omega.boundary_edges(&e);
            e.mask[i] = true;
            e.mask[j] = false;
            if p < base {
                return false;
            }
        }
    }
    true
}

/// All swap-local minimizers of the domain with `0 < |E₀| < |Ω|`, as bit masks.
pub fn swap_local_minimizers(omega: &PixelDomain) -> Result<Vec<u32>> {
    let graph = MaskGraph::new(omega)?;
    let n = graph.n;
    let full = graph.full();
    let found: Vec<u32> = (1..full)
        .into_par_iter()
        .filter(|&m| {
            let base = graph.edges(m);
            let mut ins = m;
            while ins != 0 {
                let i = ins.trailing_zeros();
                ins &= ins - 1;
                let mut outs = full & !m;
                while outs != 0 {
                    let j = outs.trailing_zeros();
                    outs &= outs - 1;
                    if graph.edges(m & !(1 << i) | 1 << j) < base {
                        return false;
                    }
                }
            }
            true
        })
        .collect();
    debug_assert!(found.iter().all(|&m| m.count_ones() as usize <= n));
    Ok(found)
}
