//! Exact Floquet dynamics of the quantum kicked top.

use num_complex::Complex64;

use super::entropy::spin_entanglement;
use super::spin::{
    apply_spin, collective_spin_matrices, qfi_exact, spin_coherent_state_with, squeezing_exact, Basis, CMatrix,
    CVector, CollectiveSpinOps, QuantumState, SxEigen,
};
use crate::classical::KickedTopParams;
use crate::error::Result;
use crate::par::{self, Exec};
use crate::quantifiers::QuantifierSeries;

/// Dense one-period evolution operator.
#[derive(Debug, Clone)]
pub struct FloquetOperator {
    pub matrix: CMatrix,
}

impl FloquetOperator {
    /// `max |U†U − I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let d = self.matrix.nrows();
        (self.matrix.adjoint() * &self.matrix - CMatrix::identity(d, d)).camax()
    }
}

/// Kicked top of `N` spins: precession `exp(−iα Sx)` followed by the kick
/// `exp(−i β Sz²/(2S))`.
#[derive(Debug, Clone)]
pub struct KickedTopEd {
    pub ops: CollectiveSpinOps,
    eig: SxEigen,
    alpha: f64,
    kick: Vec<Complex64>,
}

impl KickedTopEd {
    pub fn new(n: usize, params: &KickedTopParams) -> Result<Self> {
        params.validate()?;
        let ops = collective_spin_matrices(n)?;
        let eig = SxEigen::new(&ops);
        let s = ops.spin();
        let kick = (0..=n).map(|k| Complex64::from_polar(1.0, -params.beta * ops.m(k).powi(2) / (2.0 * s))).collect();
        Ok(KickedTopEd { ops, eig, alpha: params.alpha, kick })
    }

    pub fn n(&self) -> usize {
        self.ops.n
    }

    pub fn coherent_state(&self, theta: f64, phi: f64) -> QuantumState {
        spin_coherent_state_with(&self.ops, &self.eig, theta, phi)
    }

    pub fn forward(&self, psi: &CVector) -> CVector {
        let mut out = self.eig.rotate(self.alpha, psi);
        for (x, k) in out.iter_mut().zip(&self.kick) {
            *x *= k;
        }
        out
    }

    pub fn backward(&self, psi: &CVector) -> CVector {
        let undone = CVector::from_fn(psi.len(), |i, _| psi[i] * self.kick[i].conj());
        self.eig.rotate(-self.alpha, &undone)
    }

    pub fn floquet(&self) -> FloquetOperator {
        let kick = CMatrix::from_diagonal(&CVector::from_vec(self.kick.clone()));
        FloquetOperator { matrix: kick * self.eig.rotation_matrix(self.alpha) }
    }

    fn sz(&self, psi: &CVector) -> CVector {
        apply_spin(&self.ops, 2, psi, Basis::Spin { n: self.ops.n })
    }

    /// `c(t) = −⟨[Sz(t)/S, Sz/S]²⟩` for `t = 0..=kicks`.
    pub fn square_commutator(&self, psi0: &CVector, kicks: usize, exec: Exec) -> Vec<f64> {
        let s = self.ops.spin();
        let mut u1 = vec![psi0.clone()];
        let mut u2 = vec![self.sz(psi0)];
        for t in 0..kicks {
            u1.push(self.forward(&u1[t]));
            u2.push(self.forward(&u2[t]));
        }
        par::map_range(exec, kicks + 1, |t| {
            let mut ab = self.sz(&u2[t]);
            let mut b = self.sz(&u1[t]);
            for _ in 0..t {
                ab = self.backward(&ab);
                b = self.backward(&b);
            }
            let c = ab - self.sz(&b);
            c.norm_squared() / s.powi(4)
        })
    }
}

pub fn kicked_top_floquet(n: usize, params: &KickedTopParams) -> Result<FloquetOperator> {
    Ok(KickedTopEd::new(n, params)?.floquet())
}

/// Options for [`kicked_top_ed_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickedTopEdOptions {
    /// Spins in subsystem `A`.
    pub n_a: usize,
    /// Square commutator is computed up to this many kicks (quadratic cost).
    pub commutator_kicks: usize,
    pub exec: Exec,
}

/// Exact quantifiers after every kick, starting from a coherent state.
pub fn kicked_top_ed_series(
    n: usize,
    params: &KickedTopParams,
    theta0: f64,
    phi0: f64,
    kicks: usize,
    options: &KickedTopEdOptions,
) -> Result<QuantifierSeries> {
    let ed = KickedTopEd::new(n, params)?;
    let psi0 = ed.coherent_state(theta0, phi0);
    let mut states = vec![psi0.amplitudes.clone()];
    for t in 0..kicks {
        states.push(ed.forward(&states[t]));
    }
    let rows = par::map(options.exec, &states, |psi| -> Result<(f64, f64, f64, f64)> {
        let st = QuantumState { amplitudes: psi.clone(), basis: Basis::Spin { n } };
        let (vn, r2) = spin_entanglement(&st, options.n_a)?;
        Ok((vn, r2, qfi_exact(&st, &ed.ops), squeezing_exact(&st, &ed.ops)))
    });
    let c = ed.square_commutator(&psi0.amplitudes, options.commutator_kicks.min(kicks), options.exec);
    let mut out = QuantifierSeries::default();
    for (t, row) in rows.into_iter().enumerate() {
        let (vn, r2, fq, xi) = row?;
        out.times.push(t as f64 * params.tau);
        out.s_a.push(vn);
        out.s2_a.push(r2);
        out.f_q.push(fq);
        out.xi2.push(xi);
        out.c_ab.push(c.get(t).copied().unwrap_or(f64::NAN));
    }
    Ok(out)
}
