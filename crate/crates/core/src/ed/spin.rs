//! Collective spin of `N` spins-½ in the symmetric multiplet `S = N/2`.
//!
//! Basis index `k` holds `|S, M = S − k⟩`.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Ladder coefficients and dense matrices of `Sx`, `Sy`, `Sz`.
#[derive(Debug, Clone)]
pub struct CollectiveSpinOps {
    pub n: usize,
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    /// `m[k] = S − k`.
    pub(crate) m: Vec<f64>,
    /// `raise[k] = ⟨k−1|S₊|k⟩` for `k ≥ 1`; `raise[0] = 0`.
    pub(crate) raise: Vec<f64>,
}

impl CollectiveSpinOps {
    pub fn dimension(&self) -> usize {
        self.n + 1
    }

    pub fn spin(&self) -> f64 {
        self.n as f64 / 2.0
    }

    /// Eigenvalue of `Sz` on basis state `k`.
    pub fn m(&self, k: usize) -> f64 {
        self.m[k]
    }
}

fn ladder(n: usize) -> (Vec<f64>, Vec<f64>) {
    let s = n as f64 / 2.0;
    let m: Vec<f64> = (0..=n).map(|k| s - k as f64).collect();
    let raise = (0..=n)
        .map(|k| if k == 0 { 0.0 } else { (s * (s + 1.0) - m[k] * (m[k] + 1.0)).max(0.0).sqrt() })
        .collect();
    (m, raise)
}

pub fn collective_spin_matrices(n: usize) -> Result<CollectiveSpinOps> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one spin".into()));
    }
    let (m, raise) = ladder(n);
    let d = n + 1;
    let mut sx = CMatrix::zeros(d, d);
    let mut sy = CMatrix::zeros(d, d);
    let mut sz = CMatrix::zeros(d, d);
    for k in 0..d {
        sz[(k, k)] = Complex64::from(m[k]);
        if k >= 1 {
            let a = raise[k];
            // S₊ has (k−1, k); S₋ has (k, k−1).
            sx[(k - 1, k)] = Complex64::from(a / 2.0);
            sx[(k, k - 1)] = Complex64::from(a / 2.0);
            sy[(k - 1, k)] = Complex64::new(0.0, -a / 2.0);
            sy[(k, k - 1)] = Complex64::new(0.0, a / 2.0);
        }
    }
    Ok(CollectiveSpinOps { n, sx, sy, sz, m, raise })
}

/// Hilbert space of a state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Spin { n: usize },
    /// Spin index major: entry `k·n_cut + m`.
    SpinBoson { n: usize, n_cut: usize },
}

impl Basis {
    pub fn dimension(&self) -> usize {
        match *self {
            Basis::Spin { n } => n + 1,
            Basis::SpinBoson { n, n_cut } => (n + 1) * n_cut,
        }
    }

    pub fn spins(&self) -> usize {
        match *self {
            Basis::Spin { n } | Basis::SpinBoson { n, .. } => n,
        }
    }

    pub fn boson_dim(&self) -> usize {
        match *self {
            Basis::Spin { .. } => 1,
            Basis::SpinBoson { n_cut, .. } => n_cut,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: CVector,
    pub basis: Basis,
}

impl QuantumState {
    pub fn new(amplitudes: CVector, basis: Basis) -> Result<Self> {
        if amplitudes.len() != basis.dimension() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a {}-dimensional space",
                amplitudes.len(),
                basis.dimension()
            )));
        }
        if let Basis::SpinBoson { n_cut, .. } = basis {
            if n_cut < 1 {
                return Err(Error::InvalidParameter("boson cutoff must be at least 1".into()));
            }
        }
        Ok(QuantumState { amplitudes, basis })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Amplitudes arranged as a `(N+1) × n_boson` matrix.
    pub fn as_matrix(&self) -> CMatrix {
        let nb = self.basis.boson_dim();
        CMatrix::from_fn(self.basis.spins() + 1, nb, |k, m| self.amplitudes[k * nb + m])
    }
}

/// Applies a collective spin component to the spin factor of `psi`.
pub fn apply_spin(ops: &CollectiveSpinOps, axis: usize, psi: &CVector, basis: Basis) -> CVector {
    let nb = basis.boson_dim();
    let d = ops.dimension();
    let mut out = CVector::zeros(psi.len());
    for k in 0..d {
        for b in 0..nb {
            let v = psi[k * nb + b];
            match axis {
                2 => out[k * nb + b] += v * ops.m[k],
                _ => {
                    // S₊|k⟩ = raise[k]|k−1⟩, S₋|k⟩ = raise[k+1]|k+1⟩.
                    let up = if k >= 1 { ops.raise[k] } else { 0.0 };
                    let down = if k + 1 < d { ops.raise[k + 1] } else { 0.0 };
                    let (cu, cd) = if axis == 0 {
                        (Complex64::from(0.5), Complex64::from(0.5))
                    } else {
                        (-I * 0.5, I * 0.5)
                    };
                    if k >= 1 {
                        out[(k - 1) * nb + b] += cu * up * v;
                    }
                    if k + 1 < d {
                        out[(k + 1) * nb + b] += cd * down * v;
                    }
                }
            }
        }
    }
    out
}

/// Eigen-decomposition of `Sx`, which is real symmetric in this basis.
#[derive(Debug, Clone)]
pub struct SxEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SxEigen {
    pub fn new(ops: &CollectiveSpinOps) -> Self {
        let sx = ops.sx.map(|z| z.re);
        let eig = SymmetricEigen::new(sx);
        SxEigen { values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
    }

    /// `exp(−iθ Sx)·psi`.
    pub fn rotate(&self, theta: f64, psi: &CVector) -> CVector {
        let vt = self.vectors.transpose();
        let re = &vt * psi.map(|z| z.re);
        let im = &vt * psi.map(|z| z.im);
        let rotated = CVector::from_fn(psi.len(), |i, _| {
            Complex64::new(re[i], im[i]) * Complex64::from_polar(1.0, -theta * self.values[i])
        });
        let re = &self.vectors * rotated.map(|z| z.re);
        let im = &self.vectors * rotated.map(|z| z.im);
        CVector::from_fn(psi.len(), |i, _| Complex64::new(re[i], im[i]))
    }

    /// Dense `exp(−iθ Sx)`.
    pub fn rotation_matrix(&self, theta: f64) -> CMatrix {
        let d = self.values.len();
        let v = self.vectors.map(Complex64::from);
        let phases = CMatrix::from_diagonal(&CVector::from_fn(d, |i, _| {
            Complex64::from_polar(1.0, -theta * self.values[i])
        }));
        &v * phases * v.transpose()
    }
}

/// `exp(−iφ Sz)·exp(−iθ Sy)|S, S⟩`, with `exp(−iθSy)` obtained from the
/// `Sx` rotation conjugated by a quarter turn about `z`.
pub fn spin_coherent_state_with(ops: &CollectiveSpinOps, eig: &SxEigen, theta: f64, phi: f64) -> QuantumState {
    let d = ops.dimension();
    // Sy = R Sx R† with R = exp(−i(π/2) Sz).
    let quarter = |k: usize, sign: f64| Complex64::from_polar(1.0, -sign * std::f64::consts::FRAC_PI_2 * ops.m[k]);
    let mut psi = CVector::zeros(d);
    psi[0] = quarter(0, -1.0);
    let mut psi = eig.rotate(theta, &psi);
    for k in 0..d {
        psi[k] *= quarter(k, 1.0) * Complex64::from_polar(1.0, -phi * ops.m[k]);
    }
    QuantumState { amplitudes: psi, basis: Basis::Spin { n: ops.n } }
}

pub fn spin_coherent_state(n: usize, theta: f64, phi: f64) -> Result<QuantumState> {
    let ops = collective_spin_matrices(n)?;
    let eig = SxEigen::new(&ops);
    Ok(spin_coherent_state_with(&ops, &eig, theta, phi))
}

/// Closed-form coherent-state amplitudes, evaluated in log space.
pub fn spin_coherent_amplitudes(n: usize, theta: f64, phi: f64) -> CVector {
    let s = n as f64 / 2.0;
    let lf = log_factorials(n);
    let (c, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    CVector::from_fn(n + 1, |k, _| {
        let mag = if (k < n && c == 0.0) || (k > 0 && sn == 0.0) {
            0.0
        } else {
            let lb = 0.5 * (lf[n] - lf[k] - lf[n - k]);
            let lc = if n - k == 0 { 0.0 } else { (n - k) as f64 * c.abs().ln() };
            let ls = if k == 0 { 0.0 } else { k as f64 * sn.abs().ln() };
            let sign = c.signum().powi((n - k) as i32) * sn.signum().powi(k as i32);
            sign * (lb + lc + ls).exp()
        };
        Complex64::from_polar(1.0, -phi * (s - k as f64)) * mag
    })
}

/// `ln k!` for `k = 0..=n`.
pub fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `⟨Sx⟩, ⟨Sy⟩, ⟨Sz⟩` and the symmetrised covariance
/// `½⟨{Sμ, Sν}⟩ − ⟨Sμ⟩⟨Sν⟩`.
pub fn spin_moments(ops: &CollectiveSpinOps, state: &QuantumState) -> ([f64; 3], Matrix3<f64>) {
    let psi = &state.amplitudes;
    let applied: Vec<CVector> = (0..3).map(|a| apply_spin(ops, a, psi, state.basis)).collect();
    let mean: [f64; 3] = std::array::from_fn(|a| psi.dotc(&applied[a]).re);
    let mut cov = Matrix3::zeros();
    for a in 0..3 {
        for b in a..3 {
            // ⟨SaSb⟩ = (Sa ψ)†(Sb ψ) for Hermitian Sa.
            let ab = applied[a].dotc(&applied[b]).re;
            let v = ab - mean[a] * mean[b];
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    (mean, cov)
}

/// QFI density `4·λ_max(cov)/N` over collective spin directions.
pub fn qfi_exact(state: &QuantumState, ops: &CollectiveSpinOps) -> f64 {
    let (_, cov) = spin_moments(ops, state);
    let l = SymmetricEigen::new(cov).eigenvalues.max();
    4.0 * l / ops.n as f64
}

/// Squeezing `4·min Var(n·S)/N` over directions transverse to `⟨S⟩`.
pub fn squeezing_exact(state: &QuantumState, ops: &CollectiveSpinOps) -> f64 {
    let (mean, cov) = spin_moments(ops, state);
    let m = nalgebra::Vector3::from(mean);
    let z = if m.norm() > 0.0 { m.normalize() } else { nalgebra::Vector3::z() };
    let helper = if z.x.abs() < 0.9 { nalgebra::Vector3::x() } else { nalgebra::Vector3::y() };
    let e1 = z.cross(&helper).normalize();
    let e2 = z.cross(&e1);
    let p = nalgebra::Matrix3x2::from_columns(&[e1, e2]);
    let sub = p.transpose() * cov * p;
    let l = SymmetricEigen::new(sub).eigenvalues.min();
    4.0 * l / ops.n as f64
}
