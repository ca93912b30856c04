//! Reduced states and entanglement entropies of exact wave functions.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::spin::{log_factorials, Basis, CMatrix, QuantumState};
use crate::error::{Error, Result};

/// Eigenvalues of a reduced density matrix in `[−EIGEN_FLOOR, 0]` are
/// treated as zero.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Schmidt matrix `Ψ[a, b]` of a symmetric state split into `n_a` and
/// `N − n_a` spins, with `a`, `b` counting flipped spins in each part.
pub fn spin_schmidt_matrix(state: &QuantumState, n_a: usize) -> Result<CMatrix> {
    let Basis::Spin { n } = state.basis else {
        return Err(Error::InvalidParameter("spin bipartition needs a pure spin state".into()));
    };
    if n_a == 0 || n_a >= n {
        return Err(Error::InvalidParameter(format!("subsystem size {n_a} outside 1..{n}")));
    }
    let n_b = n - n_a;
    let lf = log_factorials(n);
    let ln_binom = |m: usize, k: usize| lf[m] - lf[k] - lf[m - k];
    Ok(CMatrix::from_fn(n_a + 1, n_b + 1, |a, b| {
        let w = 0.5 * (ln_binom(n_a, a) + ln_binom(n_b, b) - ln_binom(n, a + b));
        state.amplitudes[a + b] * w.exp()
    }))
}

/// Reduced density matrix of `n_a` spins, `ρ_A = ΨΨ†`.
pub fn spin_bipartition_rdm(state: &QuantumState, n_a: usize) -> Result<CMatrix> {
    let psi = spin_schmidt_matrix(state, n_a)?;
    Ok(&psi * psi.adjoint())
}

fn entropies_from_probabilities(p: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut s = 0.0;
    let mut purity = 0.0;
    for x in p {
        if x < -EIGEN_FLOOR {
            continue;
        }
        let x = x.max(0.0);
        if x > 0.0 {
            s -= x * x.ln();
        }
        purity += x * x;
    }
    // An eigenvalue a few ulps above one would give a negative entropy.
    (s.max(0.0), (-purity.ln()).max(0.0))
}

/// Von Neumann and Rényi-2 entropies of the Schmidt matrix `psi`.
pub fn schmidt_entropies(psi: &CMatrix) -> (f64, f64) {
    let sv = psi.clone().svd(false, false).singular_values;
    entropies_from_probabilities(sv.iter().map(|s| s * s))
}

/// Von Neumann and Rényi-2 entropies of `n_a` spins.
pub fn spin_entanglement(state: &QuantumState, n_a: usize) -> Result<(f64, f64)> {
    Ok(schmidt_entropies(&spin_schmidt_matrix(state, n_a)?))
}

/// Von Neumann and Rényi-2 entropies of a Hermitian density matrix.
pub fn density_entropies(rho: &CMatrix) -> (f64, f64) {
    // Hermitian eigenproblem via its real 2d×2d embedding, whose spectrum is
    // that of ρ with every eigenvalue doubled in multiplicity.
    let d = rho.nrows();
    let real = DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let z: Complex64 = rho[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(real).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    entropies_from_probabilities(ev.into_iter().step_by(2))
}

/// Page value `ln m − m/(2n)` for subsystem dimensions `m ≤ n`.
pub fn page_entropy(m: usize, n: usize) -> f64 {
    let (m, n) = if m <= n { (m, n) } else { (n, m) };
    (m as f64).ln() - m as f64 / (2.0 * n as f64)
}
