//! Pixel stand-ins for planar domains: a union of congruent square cells of
//! side `h`, scaled so the union has unit area.

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::VecDeque;

#[derive(Debug, Clone, Serialize)]
pub struct PixelDomain {
    pub rows: usize,
    pub cols: usize,
    pub h: f64,
    /// Row-major membership mask over the full `rows × cols` grid.
    pub mask: Vec<bool>,
    /// Grid coordinates `(row, col)` of the cells of Ω, in row-major order.
    /// Regions are indexed by position in this list.
    cells: Vec<(usize, usize)>,
    /// Grid index -> cell index.
    index: Vec<Option<usize>>,
    /// Interior edges of Ω as pairs of cell indices `(i, j)` with `i < j`.
    edges: Vec<(usize, usize)>,
}

impl PixelDomain {
    /// Full `rows × cols` rectangle of cells.
    pub fn rectangle(rows: usize, cols: usize) -> Result<Self> {
        Self::from_mask(rows, cols, vec![true; rows * cols])
    }

    /// Domain from a row-major mask; `h` is chosen so the measure is 1.
    pub fn from_mask(rows: usize, cols: usize, mask: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 || mask.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "mask of length {} does not match a {rows}×{cols} grid",
                mask.len()
            )));
        }
        let mut cells = Vec::new();
        let mut index = vec![None; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                if mask[r * cols + c] {
                    index[r * cols + c] = Some(cells.len());
                    cells.push((r, c));
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::InvalidParameter("empty mask".into()));
        }
        let mut edges = Vec::new();
        for (i, &(r, c)) in cells.iter().enumerate() {
            if c + 1 < cols {
                if let Some(j) = index[r * cols + c + 1] {
                    edges.push((i, j));
                }
            }
            if r + 1 < rows {
                if let Some(j) = index[(r + 1) * cols + c] {
                    edges.push((i, j));
                }
            }
        }
        let h = 1.0 / (cells.len() as f64).sqrt();
        let dom = Self {
            rows,
            cols,
            h,
            mask,
            cells,
            index,
            edges,
        };
        let components = dom.components();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(dom)
    }

    /// Parses rows of `#` (in Ω) and `.` (outside).
    pub fn from_ascii(art: &str) -> Result<Self> {
        let lines: Vec<&str> = art.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let rows = lines.len();
        let cols = lines.first().map_or(0, |l| l.chars().count());
        let mut mask = Vec::with_capacity(rows * cols);
        for l in &lines {
            if l.chars().count() != cols {
                return Err(Error::InvalidParameter("ragged ascii mask".into()));
            }
            for ch in l.chars() {
                match ch {
                    '#' => mask.push(true),
                    '.' => mask.push(false),
                    other => {
                        return Err(Error::InvalidParameter(format!("unexpected character {other:?}")))
                    }
                }
            }
        }
        Self::from_mask(rows, cols, mask)
    }

    fn components(&self) -> usize {
        let mut seen = vec![false; self.cells.len()];
        let adj = self.adjacency();
        let mut count = 0;
        for s in 0..self.cells.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(i) = queue.pop_front() {
                for &j in &adj[i] {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        count
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.cells.len()];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    pub fn measure(&self) -> f64 {
        self.cells.len() as f64 * self.cell_area()
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn cell_index(&self, row: usize, col: usize) -> Option<usize> {
        if row < self.rows && col < self.cols {
            self.index[row * self.cols + col]
        } else {
            None
        }
    }

    /// Center of cell `i` in physical coordinates (origin at the grid's
    /// lower-left corner, rows counted from the bottom).
    pub fn center(&self, i: usize) -> (f64, f64) {
        let (r, c) = self.cells[i];
        ((c as f64 + 0.5) * self.h, (r as f64 + 0.5) * self.h)
    }

    pub fn empty_region(&self) -> Region {
        Region::new(vec![false; self.n_cells()], self.cell_area())
    }

    pub fn full_region(&self) -> Region {
        Region::new(vec![true; self.n_cells()], self.cell_area())
    }

    /// Region of the cells whose grid coordinates satisfy `pred(row, col)`.
    pub fn region_where<F: FnMut(usize, usize) -> bool>(&self, mut pred: F) -> Region {
        let mask = self.cells.iter().map(|&(r, c)| pred(r, c)).collect();
        Region::new(mask, self.cell_area())
    }

    /// Region from a bit mask over cell indices (bit `i` = cell `i`).
    pub fn region_from_bits(&self, bits: u64) -> Region {
        let mask = (0..self.n_cells()).map(|i| bits >> i & 1 == 1).collect();
        Region::new(mask, self.cell_area())
    }

    /// Edge count of the relative boundary of `e`.
    pub fn boundary_edges(&self, e: &Region) -> usize {
        self.edges.iter().filter(|&&(i, j)| e.mask[i] != e.mask[j]).count()
    }
}

/// A subset of the cells of a [`PixelDomain`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Region {
    pub mask: Vec<bool>,
    #[serde(skip)]
    cell_area_bits: u64,
}

impl Region {
    pub fn new(mask: Vec<bool>, cell_area: f64) -> Self {
        Self {
            mask,
            cell_area_bits: cell_area.to_bits(),
        }
    }

    pub fn cell_area(&self) -> f64 {
        f64::from_bits(self.cell_area_bits)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.cell_area()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn complement(&self) -> Region {
        Region::new(self.mask.iter().map(|b| !b).collect(), self.cell_area())
    }

    /// Bit mask over cell indices; only meaningful for at most 64 cells.
    pub fn to_bits(&self) -> u64 {
        assert!(self.mask.len() <= 64);
        self.mask
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| if b { acc | 1 << i } else { acc })
    }

    /// Cell counts `(|self ∖ other|, |other ∖ self|)`.
    pub fn difference_counts(&self, other: &Region) -> (usize, usize) {
        assert_eq!(self.mask.len(), other.mask.len(), "regions of different domains");
        self.mask.iter().zip(&other.mask).fold((0, 0), |(a, b), (&x, &y)| {
            (a + (x && !y) as usize, b + (y && !x) as usize)
        })
    }
}

pub fn perimeter_rel(e: &Region, omega: &PixelDomain) -> f64 {
    omega.boundary_edges(e) as f64 * omega.h
}

/// `min{|E₁ ∖ E₂|, |E₂ ∖ E₁|}`.
pub fn alpha(e1: &Region, e2: &Region) -> f64 {
    let (a, b) = e1.difference_counts(e2);
    a.min(b) as f64 * e1.cell_area()
}

/// The eight symmetries of the square acting on an `n × n` grid; `k` in `0..8`.
pub fn dihedral(k: usize, n: usize, r: usize, c: usize) -> (usize, usize) {
    let m = n - 1;
    let (r, c) = match k % 4 {
        0 => (r, c),
        1 => (c, m - r),
        2 => (m - r, m - c),
        _ => (m - c, r),
    };
    if k >= 4 {
        (r, m - c)
    } else {
        (r, c)
    }
}
