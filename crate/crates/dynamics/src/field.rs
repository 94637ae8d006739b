use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Neumann,
}

/// Cell-centred values on `[0, nx h] × [0, ny h]`; `u[j * nx + i]` sits at
/// `((i + ½)h, (j + ½)h)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Field2D {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub u: Vec<f64>,
    pub boundary: Boundary,
}

impl Field2D {
    pub fn constant(nx: usize, ny: usize, h: f64, value: f64) -> Self {
        Self {
            nx,
            ny,
            h,
            u: vec![value; nx * ny],
            boundary: Boundary::Neumann,
        }
    }

    /// `n × n` grid on the unit square.
    pub fn unit_square(n: usize, value: f64) -> Self {
        Self::constant(n, n, 1.0 / n as f64, value)
    }

    pub fn from_fn<F: FnMut(f64, f64) -> f64>(nx: usize, ny: usize, h: f64, mut f: F) -> Self {
        let mut u = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                u.push(f((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
            }
        }
        Self {
            nx,
            ny,
            h,
            u,
            boundary: Boundary::Neumann,
        }
    }

    pub fn same_grid(&self, u: Vec<f64>) -> Self {
        assert_eq!(u.len(), self.u.len());
        Self { u, ..self.clone() }
    }

    pub fn area(&self) -> f64 {
        (self.nx * self.ny) as f64 * self.h * self.h
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    /// `∫ u` by compensated summation.
    pub fn mass(&self) -> f64 {
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for &v in &self.u {
            let y = v - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
        s * self.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.mass() / self.area()
    }

    pub fn l1_distance(&self, other: &Field2D) -> f64 {
        self.cell_area() * self.u.iter().zip(&other.u).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// `Σ_edges (u_p − u_q)²`, i.e. `∫|∇_h u|²`.
    pub fn gradient_energy(&self) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let mut s = 0.0;
        for j in 0..ny {
            for i in 0..nx {
                let p = self.u[j * nx + i];
                if i + 1 < nx {
                    s += (self.u[j * nx + i + 1] - p).powi(2);
                }
                if j + 1 < ny {
                    s += (self.u[(j + 1) * nx + i] - p).powi(2);
                }
            }
        }
        s
    }

    pub fn check_finite(&self, step: usize) -> Result<()> {
        if self.u.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { step })
        }
    }
}
