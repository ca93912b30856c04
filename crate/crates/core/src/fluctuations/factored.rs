//! Propagator stored as `U = Q · diag(e^{s}) · T`, with `Q` orthogonal and
//! `T` unit upper triangular.
//!
//! Every pushed step is re-balanced by a QR decomposition, so growth is
//! carried in the log-scales `s` instead of in the matrix entries. Volumes
//! and sub-volumes of the evolved fluctuation ellipsoid are then available
//! without cancellation even when `‖U‖` is astronomically large.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::phase_space::{CorrelationMatrix, SymplecticForm};

use super::Propagator;

#[derive(Debug, Clone)]
pub struct FactoredPropagator {
    orthogonal: DMatrix<f64>,
    log_scales: Vec<f64>,
    unit_upper: DMatrix<f64>,
    t: f64,
    steps: usize,
    max_step_residual: f64,
}

fn sub_lists(dim: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, dim: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(i + 1, dim, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, dim, k, &mut Vec::new(), &mut out);
    out
}

fn minor(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    let sub = DMatrix::from_fn(k, k, |i, j| m[(rows[i], cols[j])]);
    match k {
        1 => sub[(0, 0)],
        2 => sub[(0, 0)] * sub[(1, 1)] - sub[(0, 1)] * sub[(1, 0)],
        _ => sub.determinant(),
    }
}

impl FactoredPropagator {
    pub fn identity(dim: usize) -> Self {
        FactoredPropagator {
            orthogonal: DMatrix::identity(dim, dim),
            log_scales: vec![0.0; dim],
            unit_upper: DMatrix::identity(dim, dim),
            t: 0.0,
            steps: 0,
            max_step_residual: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.log_scales.len()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn log_scales(&self) -> &[f64] {
        &self.log_scales
    }

    /// Largest `‖MᵀJM − J‖` over the pushed step matrices.
    pub fn max_step_residual(&self) -> f64 {
        self.max_step_residual
    }

    /// Left-multiplies by the step matrix `m` covering a time `dt`.
    pub fn push(&mut self, m: &DMatrix<f64>, dt: f64) -> Result<()> {
        let dim = self.dim();
        if m.shape() != (dim, dim) {
            return Err(Error::Dimension(format!("step is {:?}, propagator is {dim}×{dim}", m.shape())));
        }
        let residual = SymplecticForm::pairwise(dim / 2).residual(m);
        self.max_step_residual = self.max_step_residual.max(residual);

        let qr = (m * &self.orthogonal).qr();
        let mut q = qr.q();
        let mut r = qr.r();
        for i in 0..dim {
            if r[(i, i)] < 0.0 {
                for k in 0..dim {
                    q[(k, i)] = -q[(k, i)];
                }
                for k in i..dim {
                    r[(i, k)] = -r[(i, k)];
                }
            }
            if r[(i, i)] == 0.0 || !r[(i, i)].is_finite() {
                return Err(Error::RankDeficient { norm: r[(i, i)] });
            }
        }
        // D⁻¹ R D, then rows normalised to a unit diagonal.
        let mut balanced = r.clone();
        for i in 0..dim {
            let d = r[(i, i)];
            for j in i..dim {
                let w = if j == i { 1.0 } else { (self.log_scales[j] - self.log_scales[i]).exp() };
                balanced[(i, j)] = r[(i, j)] * w / d;
            }
        }
        self.unit_upper = balanced * &self.unit_upper;
        for i in 0..dim {
            self.log_scales[i] += r[(i, i)].ln();
        }
        self.orthogonal = q;
        self.t += dt;
        self.steps += 1;
        Ok(())
    }

    /// Materialised `U`. Entries overflow once the largest scale passes
    /// roughly `e^{700}`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut du = self.unit_upper.clone();
        for i in 0..dim {
            let e = self.log_scales[i].exp();
            for j in 0..dim {
                du[(i, j)] *= e;
            }
        }
        &self.orthogonal * du
    }

    pub fn to_propagator(&self) -> Propagator {
        Propagator { matrix: self.matrix(), t: self.t }
    }

    /// `ln |det U|`.
    pub fn log_determinant(&self) -> f64 {
        let det_q = self.orthogonal.clone().determinant().abs();
        self.log_scales.iter().sum::<f64>() + det_q.ln()
    }

    /// `det(2G) − 1` for `G = U G₀ Uᵀ` with `det(2G₀) = 1`.
    pub fn purity_deviation(&self) -> f64 {
        (2.0 * self.log_determinant()).exp_m1()
    }

    /// `‖UᵀJU − J‖ / max(1, ‖U‖²)` on the materialised propagator.
    pub fn relative_symplectic_residual(&self) -> f64 {
        let u = self.matrix();
        let norm = u.amax();
        SymplecticForm::pairwise(self.dim() / 2).residual(&u) / norm.powi(2).max(1.0)
    }

    /// `G(t) = U G₀ Uᵀ`, materialised.
    pub fn correlation(&self, g0: &CorrelationMatrix) -> Result<CorrelationMatrix> {
        let u = self.matrix();
        CorrelationMatrix::new(&u * g0.matrix() * u.transpose())
    }

    /// `ln det` of the reduced correlation matrix on the coordinate set
    /// `rows`, computed from the factors by Cauchy–Binet.
    pub fn reduced_log_determinant(&self, g0: &CorrelationMatrix, rows: &[usize]) -> Result<f64> {
        let dim = self.dim();
        if g0.matrix().nrows() != dim {
            return Err(Error::Dimension("initial correlation does not match propagator".into()));
        }
        let k = rows.len();
        let chol = g0.matrix().clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
        let right = &self.unit_upper * chol.l();
        let subsets = sub_lists(dim, k);
        let left: Vec<f64> = subsets.iter().map(|ks| minor(&self.orthogonal, rows, ks)).collect();
        let weights: Vec<f64> = subsets.iter().map(|ks| ks.iter().map(|&i| self.log_scales[i]).sum()).collect();
        let top = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for cols in &subsets {
            let mut acc = 0.0;
            for (idx, ks) in subsets.iter().enumerate() {
                if left[idx] == 0.0 {
                    continue;
                }
                acc += left[idx] * (weights[idx] - top).exp() * minor(&right, ks, cols);
            }
            total += acc * acc;
        }
        if !(total > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(2.0 * top + total.ln())
    }
}
