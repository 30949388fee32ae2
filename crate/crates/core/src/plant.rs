//! Plant matrices and the a-priori bounds on the initial state, input and
//! disturbance.

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};
use crate::sets::Hyperrectangle;

/// `ẋ = Ax + Bu + Ed`, `y = Hx`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub a: Matrix,
    pub b: Matrix,
    pub e: Matrix,
    pub h: Matrix,
}

impl PlantModel {
    pub fn new(a: Matrix, b: Matrix, e: Matrix, h: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        for (name, rows) in [("B", b.rows()), ("E", e.rows())] {
            if rows != n {
                return Err(Error::Config(format!(
                    "{name} has {rows} rows but A is {n}x{n}"
                )));
            }
        }
        if h.cols() != n {
            return Err(Error::Config(format!(
                "H has {} columns but A is {n}x{n}",
                h.cols()
            )));
        }
        Ok(Self { a, b, e, h })
    }

    /// State dimension `n`.
    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn disturbance_dim(&self) -> usize {
        self.e.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.h.rows()
    }

    /// Rank of `[H; HA; …; HA^{n-1}]`.
    pub fn observability_rank(&self) -> usize {
        let n = self.state_dim();
        let ny = self.output_dim();
        let mut obs = Matrix::zeros(n * ny, n);
        let mut block = self.h.clone();
        for k in 0..n {
            for i in 0..ny {
                for j in 0..n {
                    obs[(k * ny + i, j)] = block[(i, j)];
                }
            }
            block = &block * &self.a;
        }
        let tol = 1e-10 * obs.max_abs().max(1.0);
        obs.rank(tol)
    }

    pub fn is_observable(&self) -> bool {
        self.observability_rank() == self.state_dim()
    }
}

/// Hypercube bounds: `x(0) ∈ B(x_c, x_b)`, `|Bu| ≤ u_b`, `|Ed| ≤ d_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub x_c: Vector,
    pub x_b: f64,
    pub u_b: f64,
    pub d_b: f64,
}

impl BoundsConfig {
    pub fn new(x_c: Vector, x_b: f64, u_b: f64, d_b: f64) -> Result<Self> {
        for (name, r) in [("x_b", x_b), ("u_b", u_b), ("d_b", d_b)] {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::Config(format!(
                    "{name} must be a finite nonnegative radius"
                )));
            }
        }
        if !x_c.is_finite() {
            return Err(Error::NonFinite("x_c"));
        }
        Ok(Self { x_c, x_b, u_b, d_b })
    }

    /// The initial-state set `X`.
    pub fn initial_set(&self) -> Hyperrectangle {
        Hyperrectangle::cube(self.x_c.clone(), self.x_b).expect("validated radius")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_plant() -> PlantModel {
        PlantModel::new(
            Matrix::from_rows(&[vec![-1.0, -4.0], vec![4.0, -1.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn observability_diagnostic() {
        let p = reference_plant();
        assert_eq!(p.observability_rank(), 2);
        assert!(p.is_observable());

        let decoupled = PlantModel::new(
            Matrix::diag(&[-1.0, -2.0]),
            Matrix::zeros(2, 1),
            Matrix::zeros(2, 1),
            Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(decoupled.observability_rank(), 1);
    }

    #[test]
    fn dimension_checks() {
        let a = Matrix::identity(2);
        let bad_b = Matrix::zeros(3, 1);
        assert!(
            PlantModel::new(a.clone(), bad_b, Matrix::zeros(2, 1), Matrix::zeros(1, 2)).is_err()
        );
        assert!(PlantModel::new(
            a,
            Matrix::zeros(2, 1),
            Matrix::zeros(2, 1),
            Matrix::zeros(1, 3)
        )
        .is_err());
        assert!(BoundsConfig::new(Vector::zeros(2), -1.0, 0.0, 0.0).is_err());
    }
}
