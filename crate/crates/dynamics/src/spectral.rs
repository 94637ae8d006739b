//! Cosine transforms diagonalising the five-point Neumann Laplacian on a
//! cell-centred grid.

use rustdct::{DctPlanner, TransformType2And3};
use std::f64::consts::PI;
use std::sync::Arc;

pub struct Dct2d {
    nx: usize,
    ny: usize,
    x: Arc<dyn TransformType2And3<f64>>,
    y: Arc<dyn TransformType2And3<f64>>,
    column: Vec<f64>,
    /// Eigenvalues `−(4/h²)(sin²(πk/2nx) + sin²(πl/2ny))`, row-major.
    laplacian: Vec<f64>,
}

impl Dct2d {
    pub fn new(nx: usize, ny: usize, h: f64) -> Self {
        let mut planner = DctPlanner::new();
        let x = planner.plan_dct2(nx);
        let y = planner.plan_dct2(ny);
        let sx: Vec<f64> = (0..nx).map(|k| (PI * k as f64 / (2 * nx) as f64).sin().powi(2)).collect();
        let sy: Vec<f64> = (0..ny).map(|l| (PI * l as f64 / (2 * ny) as f64).sin().powi(2)).collect();
        let mut laplacian = Vec::with_capacity(nx * ny);
        for &b in &sy {
            for &a in &sx {
                laplacian.push(-4.0 / (h * h) * (a + b));
            }
        }
        Self {
            nx,
            ny,
            x,
            y,
            column: vec![0.0; ny],
            laplacian,
        }
    }

    pub fn laplacian(&self) -> &[f64] {
        &self.laplacian
    }

    /// Unnormalised DCT-II in both directions, in place. The `(0, 0)`
    /// coefficient is the plain sum of the values.
    pub fn forward(&mut self, data: &mut [f64]) {
        debug_assert_eq!(data.len(), self.nx * self.ny);
        for row in data.chunks_exact_mut(self.nx) {
            self.x.process_dct2(row);
        }
        for i in 0..self.nx {
            for j in 0..self.ny {
                self.column[j] = data[j * self.nx + i];
            }
            self.y.process_dct2(&mut self.column);
            for j in 0..self.ny {
                data[j * self.nx + i] = self.column[j];
            }
        }
    }

    /// Inverse of [`Dct2d::forward`].
    pub fn inverse(&mut self, data: &mut [f64]) {
        for row in data.chunks_exact_mut(self.nx) {
            self.x.process_dct3(row);
        }
        for i in 0..self.nx {
            for j in 0..self.ny {
                self.column[j] = data[j * self.nx + i];
            }
            self.y.process_dct3(&mut self.column);
            for j in 0..self.ny {
                data[j * self.nx + i] = self.column[j];
            }
        }
        let scale = 4.0 / (self.nx * self.ny) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}
