//! Entanglement and scrambling quantifiers of Gaussian fluctuations.

pub mod regime;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluctuations::{pair_indices, Propagator};
use crate::phase_space::{symplectic_eigenvalues, CorrelationMatrix};

/// Symplectic eigenvalues in `[1 − HEISENBERG_SLACK, 1]` are read as 1.
pub const HEISENBERG_SLACK: f64 = 1e-10;

/// How a system is split into `A` and its complement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BipartitionSpec {
    /// A fraction `f_A` of the spins.
    SpinFraction(f64),
    /// Whole canonical pairs of a multi-mode correlation matrix.
    SubsystemPairs(Vec<usize>),
}

impl BipartitionSpec {
    pub fn validate(&self, modes: usize) -> Result<()> {
        match self {
            BipartitionSpec::SpinFraction(f) if *f > 0.0 && *f < 1.0 => Ok(()),
            BipartitionSpec::SpinFraction(f) => {
                Err(Error::InvalidParameter(format!("spin fraction must lie in (0, 1), got {f}")))
            }
            BipartitionSpec::SubsystemPairs(idx) => pair_indices(modes, idx).map(|_| ()),
        }
    }
}

/// Quantifier time series along one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuantifierSeries {
    pub times: Vec<f64>,
    /// Von Neumann entanglement entropy.
    pub s_a: Vec<f64>,
    /// Rényi-2 entropy.
    pub s2_a: Vec<f64>,
    /// Quantum Fisher information density.
    pub f_q: Vec<f64>,
    /// Squeezing parameter.
    pub xi2: Vec<f64>,
    /// Square commutator.
    pub c_ab: Vec<f64>,
}

impl QuantifierSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `½ ln det(2G_A)`.
pub fn renyi2_entropy(g_a: &CorrelationMatrix) -> Result<f64> {
    let d = g_a.purity_determinant();
    if !(d > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(0.5 * d.ln())
}

/// Entropy of one thermal mode with symplectic eigenvalue `ν ≥ 1`.
pub fn mode_entropy(nu: f64) -> f64 {
    if nu <= 1.0 {
        return 0.0;
    }
    thermal_entropy((nu - 1.0) / 2.0)
}

/// `(b+1) ln(b+1) − b ln b` for mean occupation `b`, written without the
/// cancellation between the two terms at large `b`.
fn thermal_entropy(b: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    (1.0 + b).ln() + b * (1.0 / b).ln_1p()
}

/// Von Neumann entropy from the symplectic spectrum.
pub fn vn_entropy(g_a: &CorrelationMatrix) -> Result<f64> {
    let mut s = 0.0;
    for nu in symplectic_eigenvalues(g_a)? {
        if nu < 1.0 - HEISENBERG_SLACK {
            return Err(Error::BelowHeisenberg { value: nu });
        }
        s += mode_entropy(nu.max(1.0));
    }
    Ok(s)
}

/// Single-mode von Neumann entropy as a function of `det G_A`.
pub fn vn_entropy_from_det(det_ga: f64) -> Result<f64> {
    // ν = 2√d; ν − 1 is formed as (4d − 1)/(ν + 1) to keep it accurate near 1.
    let excess = 4.0 * det_ga - 1.0;
    if excess < -4.0 * HEISENBERG_SLACK || det_ga.is_nan() {
        return Err(Error::DeterminantBelowQuarter { value: det_ga });
    }
    if excess <= 0.0 {
        return Ok(0.0);
    }
    let nu = 2.0 * det_ga.sqrt();
    Ok(thermal_entropy(0.5 * excess / (nu + 1.0)))
}

/// `det G_A` of a spin fraction `f_A` carrying `n_exc` collective excitations.
pub fn det_ga_spin(f_a: f64, n_exc: f64) -> f64 {
    0.25 + f_a * (1.0 - f_a) * n_exc
}

fn largest_eigen(g: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(g.clone());
    let (i, &l) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    (l, eig.eigenvectors.column(i).iter().copied().collect())
}

/// `4·λ_max(G)` on the full matrix.
pub fn qfi_from_correlation(g: &CorrelationMatrix) -> f64 {
    4.0 * largest_eigen(g.matrix()).0
}

/// Spin QFI density for a pure single-mode state with `n_exc` excitations.
pub fn qfi_spin(n_exc: f64) -> f64 {
    1.0 + 2.0 * n_exc + 2.0 * (n_exc * (n_exc + 1.0)).sqrt()
}

/// Spin squeezing `1 + 2n − 2√(n(n+1))`, evaluated as `1/qfi_spin(n)` to
/// avoid cancellation at large `n`.
pub fn squeezing_spin(n_exc: f64) -> f64 {
    1.0 / qfi_spin(n_exc)
}

/// `2·λ_max` of the spin block `(q, p)` and the lab-frame direction of the
/// maximal variance, given the transverse frame `(X, Y)`.
pub fn qfi_spin_block(g_spin: &CorrelationMatrix, frame: &([f64; 3], [f64; 3])) -> Result<(f64, [f64; 3])> {
    if g_spin.n() != 1 {
        return Err(Error::Dimension(format!("spin block must have one mode, got {}", g_spin.n())));
    }
    let (l, v) = largest_eigen(g_spin.matrix());
    let (x, y) = frame;
    let dir = [v[0] * x[0] + v[1] * y[0], v[0] * x[1] + v[1] * y[1], v[0] * x[2] + v[1] * y[2]];
    Ok((2.0 * l, dir))
}

/// Cartesian axis of a collective spin component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Semiclassical square commutator of spin components `α(t)` and `β(0)`
/// from the single-mode propagator and the transverse frames at both ends.
pub fn square_commutator_semiclassical(
    u: &Propagator,
    frame0: &([f64; 3], [f64; 3]),
    frame_t: &([f64; 3], [f64; 3]),
    alpha: Axis,
    beta: Axis,
) -> Result<f64> {
    if u.dim() != 2 {
        return Err(Error::Dimension(format!("square commutator needs a single mode, got {}", u.dim())));
    }
    let m = &u.matrix;
    Ok(square_commutator_entries(
        [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]],
        frame0,
        frame_t,
        alpha,
        beta,
    ))
}

/// As [`square_commutator_semiclassical`] with `U` given as
/// `[U_qq, U_qp, U_pq, U_pp]`.
pub fn square_commutator_entries(
    u: [f64; 4],
    frame0: &([f64; 3], [f64; 3]),
    frame_t: &([f64; 3], [f64; 3]),
    alpha: Axis,
    beta: Axis,
) -> f64 {
    let (a, b) = (alpha.index(), beta.index());
    let (x0, y0) = (frame0.0[b], frame0.1[b]);
    let (xt, yt) = (frame_t.0[a], frame_t.1[a]);
    let [uqq, uqp, upq, upp] = u;
    let v = xt * (uqq * y0 - uqp * x0) + yt * (upq * y0 - upp * x0);
    v * v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::BlochAngles;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    #[test]
    fn renyi_examples() {
        assert_eq!(renyi2_entropy(&CorrelationMatrix::single_mode(0.5, 0.0, 0.5)).unwrap(), 0.0);
        let e = 1f64.exp();
        let g = CorrelationMatrix::single_mode(e / 2.0, 0.0, 0.5);
        assert_relative_eq!(renyi2_entropy(&g).unwrap(), 0.5, epsilon = 1e-15);
        let g = CorrelationMatrix::single_mode(e / 2.0, 0.0, e / 2.0);
        assert_relative_eq!(renyi2_entropy(&g).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn von_neumann_examples() {
        assert_eq!(vn_entropy(&crate::phase_space::vacuum_correlation(3)).unwrap(), 0.0);
        // ν = 3 is a thermal mode with mean occupation 1: S = 2 ln 2.
        let g = CorrelationMatrix::single_mode(1.5, 0.0, 1.5);
        assert_relative_eq!(vn_entropy(&g).unwrap(), 2.0 * LN_2, epsilon = 1e-14);
        let bad = CorrelationMatrix::single_mode(0.4, 0.0, 0.4);
        assert!(matches!(vn_entropy(&bad), Err(Error::BelowHeisenberg { .. })));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(vn_entropy_from_det(0.25).unwrap(), 0.0);
        assert_eq!(vn_entropy_from_det(0.25 - 1e-12).unwrap(), 0.0);
        // Oracle: mode entropy at ν = √2.
        let nu = 2f64.sqrt();
        let oracle = (nu + 1.0) / 2.0 * ((nu + 1.0) / 2.0).ln() - (nu - 1.0) / 2.0 * ((nu - 1.0) / 2.0).ln();
        assert_relative_eq!(vn_entropy_from_det(0.5).unwrap(), oracle, epsilon = 1e-15);
        assert_relative_eq!(vn_entropy_from_det(0.5).unwrap(), 0.5534, epsilon = 1e-4);
        assert!(matches!(vn_entropy_from_det(0.2), Err(Error::DeterminantBelowQuarter { .. })));
        // Closed form: x·arccoth(x) + ½ln(d − ¼) with x = 2√d.
        let d = 3.7f64;
        let x = 2.0 * d.sqrt();
        let closed = x * 0.5 * ((x + 1.0) / (x - 1.0)).ln() + 0.5 * (d - 0.25).ln();
        assert_relative_eq!(vn_entropy_from_det(d).unwrap(), closed, epsilon = 1e-13);
    }

    #[test]
    fn large_determinant_keeps_precision() {
        for d in [1e10f64, 1e30, 1e200] {
            assert_relative_eq!(vn_entropy_from_det(d).unwrap(), 0.5 * d.ln() + 1.0, epsilon = 1e-9);
        }
        assert_relative_eq!(mode_entropy(1e20), (0.5e20f64).ln() + 1.0, epsilon = 1e-9);
    }

    #[test]
    fn spin_determinant_examples() {
        assert_eq!(det_ga_spin(0.3, 0.0), 0.25);
        assert_eq!(det_ga_spin(0.5, 1.0), 0.5);
        let half = vn_entropy_from_det(det_ga_spin(0.5, 4.0)).unwrap();
        let tenth = vn_entropy_from_det(det_ga_spin(0.1, 4.0)).unwrap();
        assert!(half > tenth);
    }

    #[test]
    fn qfi_and_squeezing_examples() {
        assert_eq!(qfi_spin(0.0), 1.0);
        assert_relative_eq!(qfi_spin(1.0), 3.0 + 2.0 * 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(squeezing_spin(0.0), 1.0);
        assert_relative_eq!(squeezing_spin(1.0), 3.0 - 2.0 * 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(qfi_from_correlation(&crate::phase_space::vacuum_correlation(2)), 2.0);
    }

    #[test]
    fn qfi_identities_for_one_mode() {
        // Pure state with n = 2 excitations: G = ½ S Sᵀ with a squeeze.
        let r: f64 = 1.3;
        let g = CorrelationMatrix::single_mode(0.5 * (2.0 * r).exp(), 0.0, 0.5 * (-2.0 * r).exp());
        let n = (g.trace() - 1.0) / 2.0;
        let frame = BlochAngles::new(1.0, 0.4).unwrap().transverse_frame();
        let (f, dir) = qfi_spin_block(&g, &frame).unwrap();
        assert_relative_eq!(f, qfi_spin(n), epsilon = 1e-12);
        assert_relative_eq!(qfi_from_correlation(&g), 2.0 * qfi_spin(n), epsilon = 1e-12);
        // Maximal variance along δq, i.e. along X.
        for (d, f) in dir.iter().zip(&frame.0) {
            assert_relative_eq!(d.abs(), f.abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn square_commutator_vanishes_at_start() {
        let f = BlochAngles::new(0.8, 0.3).unwrap().transverse_frame();
        let c = square_commutator_semiclassical(&Propagator::identity(2), &f, &f, Axis::Z, Axis::Z).unwrap();
        assert!(c.abs() < 1e-30);
        let x = square_commutator_semiclassical(&Propagator::identity(2), &f, &f, Axis::X, Axis::Y).unwrap();
        // At t = 0 the bracket is the z component of X × Y, i.e. the polarisation.
        let z = BlochAngles::new(0.8, 0.3).unwrap().unit_vector();
        assert_relative_eq!(x, z[2] * z[2], epsilon = 1e-14);
    }

    #[test]
    fn bipartition_validation() {
        assert!(BipartitionSpec::SpinFraction(0.5).validate(1).is_ok());
        assert!(BipartitionSpec::SpinFraction(1.0).validate(1).is_err());
        assert!(BipartitionSpec::SubsystemPairs(vec![2, 3]).validate(2).is_ok());
        assert!(BipartitionSpec::SubsystemPairs(vec![1, 2]).validate(2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn closed_form_matches_symplectic_route(qq in 0.05f64..20.0, qp in -10.0f64..10.0, extra in 0.0f64..50.0) {
            // Any physical single mode: det ≥ ¼.
            let pp = (0.25 + qp * qp + extra) / qq;
            let g = CorrelationMatrix::single_mode(qq, qp, pp);
            let a = vn_entropy(&g).unwrap();
            let b = vn_entropy_from_det(g.determinant()).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * a.max(1.0), "{} vs {}", a, b);
        }

        #[test]
        fn qfi_times_squeezing_is_one(n in 0.0f64..1e12) {
            prop_assert!((qfi_spin(n) * squeezing_spin(n) - 1.0).abs() < 1e-12);
            prop_assert!(squeezing_spin(n) <= 1.0);
        }

        #[test]
        fn closed_form_is_monotone(d in 0.25f64..100.0, step in 1e-6f64..1.0) {
            prop_assert!(vn_entropy_from_det(d + step).unwrap() > vn_entropy_from_det(d).unwrap());
        }

        #[test]
        fn square_commutator_is_nonnegative(
            a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0,
            th in 0.1f64..3.0, ph in 0.0f64..6.0,
        ) {
            let f = BlochAngles::new(th, ph).unwrap().transverse_frame();
            let d = (1.0 + b * c) / a.abs().max(0.1);
            prop_assert!(square_commutator_entries([a, b, c, d], &f, &f, Axis::Z, Axis::X) >= 0.0);
        }
    }
}
