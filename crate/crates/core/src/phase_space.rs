//! Phase-space types shared across the crate: spin configuration, points on
//! the Bloch sphere, symplectic forms and Gaussian correlation matrices.
//!
//! Coordinates of a correlation matrix are ordered pair by pair,
//! `(q₁, p₁, q₂, p₂, …)`. For the Dicke model the boson pair comes first and
//! the spin pair second.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinConfig {
    /// Number of elementary spins.
    pub n_spins: usize,
    /// Spin length of each site.
    pub spin: f64,
}

impl SpinConfig {
    pub fn new(n_spins: usize, spin: f64) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::InvalidParameter("number of spins must be positive".into()));
        }
        let twice = 2.0 * spin;
        if spin <= 0.0 || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("spin length {spin} is not a positive half-integer")));
        }
        Ok(SpinConfig { n_spins, spin })
    }

    pub fn spin_half(n_spins: usize) -> Result<Self> {
        Self::new(n_spins, 0.5)
    }

    /// Effective Planck constant, `1/N`.
    pub fn hbar_eff(&self) -> f64 {
        1.0 / self.n_spins as f64
    }

    /// Total spin of the symmetric multiplet, `N·s`.
    pub fn total_spin(&self) -> f64 {
        self.n_spins as f64 * self.spin
    }
}

/// Point on the unit sphere; `phi` is kept in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochAngles<R = f64> {
    pub theta: R,
    pub phi: R,
}

impl<R: Real> BlochAngles<R> {
    pub fn new(theta: R, phi: R) -> Result<Self> {
        let t = theta.to_f64();
        if !(t > 0.0 && t < std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!("polar angle {t} outside (0, π)")));
        }
        Ok(BlochAngles { theta, phi: phi.rem_two_pi() })
    }

    /// Angles from `(cos θ, φ)`.
    pub fn from_cos_theta(cos_theta: R, phi: R) -> Result<Self> {
        let c = cos_theta.to_f64();
        if !(c > -1.0 && c < 1.0) {
            return Err(Error::InvalidParameter(format!("cos(theta) = {c} outside (-1, 1)")));
        }
        Self::new(cos_theta.acos(), phi)
    }

    /// Cartesian unit vector `(sinθ cosφ, sinθ sinφ, cosθ)`.
    pub fn unit_vector(&self) -> [R; 3] {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        [st.clone() * cp, st * sp, ct]
    }

    /// Transverse frame `(X, Y)` attached to the point; together with the
    /// unit vector it forms a right-handed orthonormal triad.
    pub fn transverse_frame(&self) -> ([R; 3], [R; 3]) {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        let x = [ct.clone() * cp.clone(), ct * sp.clone(), -st];
        let y = [-sp, cp.clone(), cp.zero()];
        (x, y)
    }

    pub fn to_f64(&self) -> BlochAngles<f64> {
        BlochAngles { theta: self.theta.to_f64(), phi: self.phi.to_f64() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `(q₁…qₙ, p₁…pₙ)` with `J = [[0, I], [−I, 0]]`.
    Block,
    /// `(q₁, p₁, …, qₙ, pₙ)` with `J = diag([[0, 1], [−1, 0]], …)`.
    Pairwise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    pub n: usize,
    pub layout: Layout,
    pub matrix: DMatrix<f64>,
}

/// Symplectic unit in block layout.
pub fn symplectic_unit(n: usize) -> SymplecticForm {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    SymplecticForm { n, layout: Layout::Block, matrix: j }
}

impl SymplecticForm {
    /// Symplectic unit in the pairwise layout used by [`CorrelationMatrix`].
    pub fn pairwise(n: usize) -> SymplecticForm {
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(2 * i, 2 * i + 1)] = 1.0;
            j[(2 * i + 1, 2 * i)] = -1.0;
        }
        SymplecticForm { n, layout: Layout::Pairwise, matrix: j }
    }

    /// `‖SᵀJS − J‖∞` (max-abs entry).
    pub fn residual(&self, s: &DMatrix<f64>) -> f64 {
        (s.transpose() * &self.matrix * s - &self.matrix).amax()
    }
}

/// Symmetric `2n × 2n` second-moment matrix of Gaussian fluctuations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::Dimension(format!("correlation matrix must be 2n×2n, got {r}×{c}")));
        }
        let scale = entries.amax().max(1.0);
        if (&entries - entries.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidParameter("correlation matrix is not symmetric".into()));
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        Ok(CorrelationMatrix { entries: sym })
    }

    /// Single-mode matrix from its three independent entries.
    pub fn single_mode(qq: f64, qp: f64, pp: f64) -> Self {
        CorrelationMatrix { entries: DMatrix::from_row_slice(2, 2, &[qq, qp, qp, pp]) }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn determinant(&self) -> f64 {
        if self.n() == 1 {
            let m = &self.entries;
            m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        } else {
            self.entries.clone().determinant()
        }
    }

    /// `det(2G)`, equal to one for pure Gaussian states.
    pub fn purity_determinant(&self) -> f64 {
        (self.entries.clone() * 2.0).determinant()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }
}

/// Vacuum (coherent-state) correlation matrix `½·I`.
pub fn vacuum_correlation(n: usize) -> CorrelationMatrix {
    CorrelationMatrix { entries: DMatrix::identity(2 * n, 2 * n) * 0.5 }
}

/// Symplectic eigenvalues `ν₁ ≥ … ≥ νₙ` of `2G`.
pub fn symplectic_eigenvalues(g: &CorrelationMatrix) -> Result<Vec<f64>> {
    let n = g.n();
    let m = g.matrix();
    if n == 1 {
        let det = g.determinant();
        if m[(0, 0)] <= 0.0 || det <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        return Ok(vec![2.0 * det.sqrt()]);
    }
    // 2G = L Lᵀ makes Lᵀ J L antisymmetric and similar to J·2G.
    let chol = (m * 2.0).cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let j = SymplecticForm::pairwise(n).matrix;
    let k = l.transpose() * j * &l;
    let ktk = k.transpose() * &k;
    let mut eig: Vec<f64> = ktk.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok((0..n).map(|i| (0.5 * (eig[2 * i] + eig[2 * i + 1])).max(0.0).sqrt()).collect())
}
