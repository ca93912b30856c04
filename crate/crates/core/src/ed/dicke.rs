//! Exact Dicke dynamics in the symmetric spin multiplet times a truncated
//! oscillator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chebyshev::{chebyshev_evolve, SpectralBounds};
use super::entropy::schmidt_entropies;
use super::spin::{
    collective_spin_matrices, qfi_exact, spin_coherent_state, Basis, CVector, CollectiveSpinOps, QuantumState,
};
use crate::classical::DickeParams;
use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Default cap on the dimension of a dense Hamiltonian.
pub const DENSE_DIMENSION_CAP: usize = 4096;

/// Largest cutoff factor `N_cut / N` accepted by [`estimate_cutoff`].
pub const MAX_CUTOFF_FACTOR: usize = 8;

/// Sparse Dicke Hamiltonian
/// `ω₀Sz + ω b†b + (γ/√N) Sx (b + b†)/√2`.
#[derive(Debug, Clone)]
pub struct DickeOperator {
    pub ops: CollectiveSpinOps,
    pub n_cut: usize,
    pub params: DickeParams,
    pub exec: Exec,
}

impl DickeOperator {
    pub fn new(n: usize, n_cut: usize, params: &DickeParams) -> Result<Self> {
        params.validate()?;
        if n_cut < 2 {
            return Err(Error::InvalidParameter(format!("boson cutoff {n_cut} below 2")));
        }
        Ok(DickeOperator { ops: collective_spin_matrices(n)?, n_cut, params: *params, exec: Exec::default() })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn basis(&self) -> Basis {
        Basis::SpinBoson { n: self.ops.n, n_cut: self.n_cut }
    }

    pub fn dimension(&self) -> usize {
        self.basis().dimension()
    }

    fn coupling(&self) -> f64 {
        self.params.gamma / (self.ops.n as f64).sqrt() / std::f64::consts::SQRT_2
    }

    /// Row `k` of the spin index: `(Hψ)[k·n_cut + m]` for all `m`.
    fn apply_row(&self, k: usize, psi: &CVector) -> Vec<Complex64> {
        let nc = self.n_cut;
        let d = self.ops.dimension();
        let g = self.coupling();
        let (m_k, raise) = (self.ops.m[k], &self.ops.raise);
        let mut neighbours: [(usize, f64); 2] = [(0, 0.0); 2];
        let mut count = 0;
        if k >= 1 {
            neighbours[count] = (k - 1, 0.5 * raise[k]);
            count += 1;
        }
        if k + 1 < d {
            neighbours[count] = (k + 1, 0.5 * raise[k + 1]);
            count += 1;
        }
        (0..nc)
            .map(|m| {
                let mut acc = psi[k * nc + m] * (self.params.omega0 * m_k + self.params.omega * m as f64);
                for &(kk, sx) in &neighbours[..count] {
                    let base = kk * nc;
                    let mut x = Complex64::new(0.0, 0.0);
                    if m >= 1 {
                        x += psi[base + m - 1] * (m as f64).sqrt();
                    }
                    if m + 1 < nc {
                        x += psi[base + m + 1] * ((m + 1) as f64).sqrt();
                    }
                    acc += x * (g * sx);
                }
                acc
            })
            .collect()
    }

    pub fn apply(&self, psi: &CVector) -> CVector {
        let rows = par::map_range(self.exec, self.ops.dimension(), |k| self.apply_row(k, psi));
        CVector::from_iterator(psi.len(), rows.into_iter().flatten())
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn spectral_bounds(&self) -> SpectralBounds {
        let s = self.ops.spin();
        let raise = &self.ops.raise;
        let sx_row = (0..self.ops.dimension())
            .map(|k| 0.5 * (raise[k] + raise.get(k + 1).copied().unwrap_or(0.0)))
            .fold(0.0, f64::max);
        let nc = self.n_cut as f64;
        let radius = self.coupling() * sx_row * (nc.sqrt() + (nc - 1.0).sqrt());
        SpectralBounds {
            e_min: -self.params.omega0 * s - radius,
            e_max: self.params.omega0 * s + self.params.omega * (nc - 1.0) + radius,
        }
    }

    /// `exp(−iHt)·psi`.
    pub fn evolve(&self, psi: &CVector, t: f64) -> CVector {
        chebyshev_evolve(&|v: &CVector| self.apply(v), self.spectral_bounds(), psi, t)
    }

    /// Dense real symmetric matrix, refused above `cap`.
    pub fn dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        let dim = self.dimension();
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        let mut h = DMatrix::zeros(dim, dim);
        let mut e = CVector::zeros(dim);
        for j in 0..dim {
            e[j] = Complex64::from(1.0);
            let col = self.apply(&e);
            for i in 0..dim {
                h[(i, j)] = col[i].re;
            }
            e[j] = Complex64::from(0.0);
        }
        Ok(h)
    }
}

/// Dense Dicke Hamiltonian on the `(N+1)·N_cut` space.
pub fn dicke_hamiltonian(n: usize, n_cut: usize, params: &DickeParams) -> Result<DMatrix<f64>> {
    DickeOperator::new(n, n_cut, params)?.dense(DENSE_DIMENSION_CAP)
}

/// Coherent-state amplitudes `e^{−|α|²/2} αᵐ/√m!` for `m < n_cut`, and the
/// probability lost to truncation.
pub fn boson_coherent_amplitudes(alpha: Complex64, n_cut: usize) -> (CVector, f64) {
    let r = alpha.norm();
    let arg = alpha.arg();
    let mut ln_fact = 0.0;
    let amps = CVector::from_fn(n_cut, |m, _| {
        if m > 0 {
            ln_fact += (m as f64).ln();
        }
        if r == 0.0 {
            return Complex64::from(if m == 0 { 1.0 } else { 0.0 });
        }
        let ln_mag = -0.5 * r * r + m as f64 * r.ln() - 0.5 * ln_fact;
        Complex64::from_polar(ln_mag.exp(), m as f64 * arg)
    });
    let tail = (1.0 - amps.norm_squared()).max(0.0);
    (amps, tail)
}

/// Spin coherent state times the boson coherent state of amplitude
/// `α = √N (Q₀ + iP₀)/√2`, renormalised after truncation.
pub fn dicke_initial_state(theta0: f64, phi0: f64, q0: f64, p0: f64, n: usize, n_cut: usize) -> Result<QuantumState> {
    let alpha = Complex64::new(q0, p0) * ((n as f64) / 2.0).sqrt();
    let mean = alpha.norm_sqr();
    if mean + 5.0 * mean.sqrt() >= n_cut as f64 {
        return Err(Error::CutoffTooSmall { cutoff: n_cut, mean_occupation: mean });
    }
    let (boson, _) = boson_coherent_amplitudes(alpha, n_cut);
    let boson = boson.normalize();
    let spin = spin_coherent_state(n, theta0, phi0)?.amplitudes;
    let amps = CVector::from_fn((n + 1) * n_cut, |i, _| spin[i / n_cut] * boson[i % n_cut]);
    QuantumState::new(amps, Basis::SpinBoson { n, n_cut })
}

/// Cutoff `Δ·N` holding an occupation of `N·max_density` with a wide
/// Poisson margin. Fails when `Δ` would exceed [`MAX_CUTOFF_FACTOR`].
pub fn estimate_cutoff(max_density: f64, n: usize) -> Result<usize> {
    let mean = n as f64 * max_density.max(0.0);
    let needed = mean + 8.0 * mean.sqrt() + 20.0;
    let delta = (needed / n as f64).ceil().max(2.0) as usize;
    if delta > MAX_CUTOFF_FACTOR {
        return Err(Error::CutoffTooSmall { cutoff: MAX_CUTOFF_FACTOR * n, mean_occupation: mean });
    }
    Ok(delta * n)
}

/// Like [`estimate_cutoff`] but caps `Δ` at [`MAX_CUTOFF_FACTOR`]; the flag
/// reports whether the cap was hit, in which case the tail-mass series is
/// the only convergence evidence.
pub fn capped_cutoff(max_density: f64, n: usize) -> (usize, bool) {
    match estimate_cutoff(max_density, n) {
        Ok(c) => (c, false),
        Err(_) => (MAX_CUTOFF_FACTOR * n, true),
    }
}

/// `⟨b†b⟩` and the population of the top tenth of the boson ladder.
pub fn boson_occupation(state: &QuantumState) -> (f64, f64) {
    let psi = state.as_matrix();
    let nc = psi.ncols();
    let top = nc - (nc / 10).max(1);
    let mut mean = 0.0;
    let mut tail = 0.0;
    for (m, col) in psi.column_iter().enumerate() {
        let p = col.norm_squared();
        mean += m as f64 * p;
        if m >= top {
            tail += p;
        }
    }
    (mean, tail)
}

/// Exact time series for the atoms–cavity bipartition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DickeEdSeries {
    pub times: Vec<f64>,
    /// Von Neumann entropy of the spins.
    pub s_a: Vec<f64>,
    pub s2_a: Vec<f64>,
    /// QFI density over collective spin directions.
    pub f_q: Vec<f64>,
    /// `⟨b†b⟩/N`.
    pub boson_density: Vec<f64>,
    /// Population of the top tenth of the cutoff.
    pub cutoff_population: Vec<f64>,
    /// `|‖ψ‖ − 1|`.
    pub norm_drift: Vec<f64>,
}

impl DickeEdSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest population seen near the cutoff.
    pub fn max_cutoff_population(&self) -> f64 {
        self.cutoff_population.iter().copied().fold(0.0, f64::max)
    }
}

/// Evolves `state0` to each of the increasing `times` and records the
/// spin–boson entanglement.
pub fn evolve_and_entropy_dicke(state0: &QuantumState, op: &DickeOperator, times: &[f64]) -> Result<DickeEdSeries> {
    if state0.basis != op.basis() {
        return Err(Error::Dimension(format!("state basis {:?}, operator basis {:?}", state0.basis, op.basis())));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("sample times must be non-decreasing".into()));
    }
    let n = op.ops.n as f64;
    let mut out = DickeEdSeries::default();
    let mut psi = state0.amplitudes.clone();
    let mut t_now = 0.0;
    for &t in times {
        if t > t_now {
            psi = op.evolve(&psi, t - t_now);
            t_now = t;
        }
        let st = QuantumState { amplitudes: psi.clone(), basis: state0.basis };
        let (vn, r2) = schmidt_entropies(&st.as_matrix());
        let (mean, tail) = boson_occupation(&st);
        out.times.push(t);
        out.s_a.push(vn);
        out.s2_a.push(r2);
        out.f_q.push(qfi_exact(&st, &op.ops));
        out.boson_density.push(mean / n);
        out.cutoff_population.push(tail);
        out.norm_drift.push((psi.norm() - 1.0).abs());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::spin::spin_moments;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;

    fn quadrature_mean(state: &QuantumState) -> Complex64 {
        // ⟨b⟩ from the column structure.
        let psi = state.as_matrix();
        let mut b = Complex64::new(0.0, 0.0);
        for m in 1..psi.ncols() {
            b += psi.column(m - 1).dotc(&psi.column(m)) * (m as f64).sqrt();
        }
        b
    }

    #[test]
    fn decoupled_spectrum() {
        let h = dicke_hamiltonian(4, 5, &DickeParams { omega: 1.3, omega0: 0.7, gamma: 0.0 }).unwrap();
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let mut expect: Vec<f64> =
            (0..5).flat_map(|k| (0..5).map(move |m| 0.7 * (2.0 - k as f64) + 1.3 * m as f64)).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expect) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn dense_is_symmetric_and_matches_sparse() {
        let op = DickeOperator::new(20, 80, &DickeParams::resonant(0.85)).unwrap();
        let h = op.dense(DENSE_DIMENSION_CAP).unwrap();
        assert!((&h - h.transpose()).camax() < 1e-12);
        let psi = CVector::from_fn(op.dimension(), |i, _| Complex64::new((i as f64 * 0.01).sin(), (i as f64 * 0.3).cos()));
        let dense = h.map(Complex64::from) * &psi;
        assert!((op.apply(&psi) - dense).camax() < 1e-10);
        let seq = op.clone().with_exec(Exec::Sequential).apply(&psi);
        assert_eq!(seq, op.apply(&psi));
    }

    #[test]
    fn dimension_cap() {
        let op = DickeOperator::new(10, 50, &DickeParams::resonant(1.0)).unwrap();
        assert!(matches!(op.dense(100), Err(Error::DimensionCap { dim: 550, cap: 100 })));
    }

    #[test]
    fn bounds_enclose_spectrum() {
        let op = DickeOperator::new(8, 30, &DickeParams::resonant(5.0)).unwrap();
        let ev = SymmetricEigen::new(op.dense(1000).unwrap()).eigenvalues;
        let b = op.spectral_bounds();
        assert!(ev.min() >= b.e_min && ev.max() <= b.e_max);
    }

    #[test]
    fn normal_phase_ground_energy() {
        let p = DickeParams::resonant(0.3);
        let gap = |n: usize| {
            let ev = SymmetricEigen::new(dicke_hamiltonian(n, 20, &p).unwrap()).eigenvalues;
            (ev.min() / n as f64 + 0.5).abs()
        };
        let (g10, g40) = (gap(10), gap(40));
        assert!(g40 < g10 && g40 < 2e-3, "{g10} {g40}");
    }

    #[test]
    fn initial_state_moments() {
        let s = dicke_initial_state(1.0, 0.4, 0.0, 0.0, 6, 4).unwrap();
        assert_relative_eq!(s.as_matrix().column(0).norm(), 1.0, epsilon = 1e-14);

        let (n, q0, p0) = (40, 1.1, -0.6);
        let s = dicke_initial_state(1.47, 1.4, q0, p0, n, 8 * n).unwrap();
        assert_relative_eq!(s.norm(), 1.0, epsilon = 1e-12);
        let b = quadrature_mean(&s);
        let nf = n as f64;
        assert!((b.re * 2f64.sqrt() / nf.sqrt() - q0).abs() < 1e-8);
        assert!((b.im * 2f64.sqrt() / nf.sqrt() - p0).abs() < 1e-8);
        let (_, tail) = boson_coherent_amplitudes(Complex64::new(q0, p0) * (nf / 2.0).sqrt(), 8 * n);
        assert!(tail < 1e-8);
        let ops = collective_spin_matrices(n).unwrap();
        let (mean, _) = spin_moments(&ops, &s);
        assert_relative_eq!(mean[2] / 20.0, 1.47f64.cos(), epsilon = 1e-10);
    }

    #[test]
    fn cutoff_violation() {
        assert!(matches!(dicke_initial_state(1.0, 0.0, 3.0, 0.0, 20, 40), Err(Error::CutoffTooSmall { cutoff: 40, .. })));
        assert_eq!(estimate_cutoff(1.5, 40).unwrap(), 4 * 40);
        assert!(estimate_cutoff(20.0, 40).is_err());
        assert_eq!(capped_cutoff(20.0, 40), (320, true));
        assert_eq!(capped_cutoff(1.5, 40), (160, false));
    }

    #[test]
    fn decoupled_state_stays_product() {
        let op = DickeOperator::new(10, 30, &DickeParams::resonant(0.0)).unwrap();
        let s = dicke_initial_state(1.0, 0.3, 1.0, 0.5, 10, 30).unwrap();
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.7).collect();
        let out = evolve_and_entropy_dicke(&s, &op, &times).unwrap();
        assert!(out.s_a.iter().all(|x| x.abs() < 1e-10));
        assert!(out.norm_drift.iter().all(|x| *x < 1e-10));
        assert!(out.f_q.iter().all(|f| (f - 1.0).abs() < 1e-9));
    }

    #[test]
    fn chebyshev_matches_eigendecomposition() {
        let op = DickeOperator::new(4, 12, &DickeParams::resonant(2.0)).unwrap();
        let eig = SymmetricEigen::new(op.dense(1000).unwrap());
        let s = dicke_initial_state(0.8, 1.4, 0.5, 0.0, 4, 12).unwrap();
        let t = 4.3;
        let v = eig.eigenvectors.map(Complex64::from);
        let c = v.transpose() * &s.amplitudes;
        let phased = CVector::from_fn(c.len(), |i, _| c[i] * Complex64::from_polar(1.0, -eig.eigenvalues[i] * t));
        let exact = &v * phased;
        assert!((op.evolve(&s.amplitudes, t) - exact).camax() < 1e-11);
    }

    #[test]
    fn coupling_builds_entanglement_and_cutoff_converges() {
        let p = DickeParams::resonant(1.0);
        let n = 8;
        let s1 = dicke_initial_state(1.47, 1.4, 0.5, 0.0, n, 48).unwrap();
        let s2 = dicke_initial_state(1.47, 1.4, 0.5, 0.0, n, 96).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.25).collect();
        let a = evolve_and_entropy_dicke(&s1, &DickeOperator::new(n, 48, &p).unwrap(), &times).unwrap();
        let b = evolve_and_entropy_dicke(&s2, &DickeOperator::new(n, 96, &p).unwrap(), &times).unwrap();
        assert!(a.s_a[20] > 0.1);
        for (x, y) in a.s_a.iter().zip(&b.s_a) {
            assert!((x - y).abs() < 1e-6, "{x} {y} {:?}", a.cutoff_population);
        }
        assert!(a.max_cutoff_population() < 1e-10, "{}", a.max_cutoff_population());
    }
}
