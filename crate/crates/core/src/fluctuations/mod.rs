//! Linearised dynamics around classical trajectories: the symplectic tangent
//! propagator `U(t)` and the Gaussian correlation matrix `G(t)`.
//!
//! Coordinates are ordered pairwise, `(δQ, δP, δq, δp)` for the Dicke model
//! and `(δq, δp)` for the kicked top, with the spin pair taken in the frame
//! transverse to the instantaneous spin direction.

pub mod dicke;
pub mod factored;
pub mod kicked_top;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::classical::{DickeParams, DickeState, KickedTopParams, Trajectory};
use crate::error::{Error, Result};
use crate::phase_space::{BlochAngles, CorrelationMatrix, SymplecticForm};

pub use dicke::{dicke_stability_matrix, DickeTangent};
pub use factored::FactoredPropagator;
pub use kicked_top::{
    fluct_step_moments, frame_angle, kicked_top_fluct_step, kicked_top_tangent_step, FactoredTangent,
    KickedTopTangent, Mat2, ModeMoments,
};

/// Which model a tangent computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TangentSystem {
    KickedTop(KickedTopParams),
    Dicke(DickeParams),
}

impl TangentSystem {
    /// Number of canonical pairs.
    pub fn modes(&self) -> usize {
        match self {
            TangentSystem::KickedTop(_) => 1,
            TangentSystem::Dicke(_) => 2,
        }
    }
}

/// Classical state of either model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhasePoint {
    Spin(BlochAngles),
    Dicke(DickeState),
}

impl PhasePoint {
    pub fn modes(&self) -> usize {
        match self {
            PhasePoint::Spin(_) => 1,
            PhasePoint::Dicke(_) => 2,
        }
    }
}

/// A set of tangent vectors attached to a phase-space point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFrame {
    pub vectors: Vec<DVector<f64>>,
    pub base_point: PhasePoint,
}

impl TangentFrame {
    pub fn new(vectors: Vec<DVector<f64>>, base_point: PhasePoint) -> Result<Self> {
        let dim = 2 * base_point.modes();
        if vectors.len() > dim {
            return Err(Error::Dimension(format!("{} vectors in a {dim}-dimensional tangent space", vectors.len())));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::Dimension(format!("tangent vector of length {}, expected {dim}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("tangent vector is not finite".into()));
            }
        }
        Ok(TangentFrame { vectors, base_point })
    }

    /// The coordinate basis at `base_point`.
    pub fn canonical(base_point: PhasePoint) -> Self {
        let dim = 2 * base_point.modes();
        let vectors = (0..dim).map(|i| DVector::from_fn(dim, |k, _| if k == i { 1.0 } else { 0.0 })).collect();
        TangentFrame { vectors, base_point }
    }

    fn transported(&self, u: &DMatrix<f64>, base_point: PhasePoint) -> TangentFrame {
        TangentFrame { vectors: self.vectors.iter().map(|v| u * v).collect(), base_point }
    }
}

/// Tangent propagator `U(t)` mapping initial fluctuations to those at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub matrix: DMatrix<f64>,
    pub t: f64,
}

impl Propagator {
    pub fn identity(dim: usize) -> Self {
        Propagator { matrix: DMatrix::identity(dim, dim), t: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |UᵀJU − J|`.
    pub fn symplectic_residual(&self) -> f64 {
        SymplecticForm::pairwise(self.dim() / 2).residual(&self.matrix)
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.clone().determinant()
    }
}

/// `G(t) = U G₀ Uᵀ`.
pub fn correlation_evolve(g0: &CorrelationMatrix, u: &Propagator) -> Result<CorrelationMatrix> {
    if g0.matrix().nrows() != u.dim() {
        return Err(Error::Dimension(format!(
            "correlation is {0}×{0}, propagator is {1}×{1}",
            g0.matrix().nrows(),
            u.dim()
        )));
    }
    CorrelationMatrix::new(&u.matrix * g0.matrix() * u.matrix.transpose())
}

/// Checks that `indices` selects whole conjugate pairs `(2k, 2k+1)` and
/// returns them sorted.
pub fn pair_indices(n: usize, indices: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != indices.len() {
        return Err(Error::PairSelection("repeated index".into()));
    }
    if sorted.is_empty() {
        return Err(Error::PairSelection("empty selection".into()));
    }
    if let Some(&i) = sorted.iter().find(|&&i| i >= 2 * n) {
        return Err(Error::PairSelection(format!("index {i} out of range for {n} modes")));
    }
    for chunk in sorted.chunks(2) {
        if chunk.len() != 2 || chunk[0] % 2 != 0 || chunk[1] != chunk[0] + 1 {
            return Err(Error::PairSelection(format!("{indices:?} splits a conjugate pair")));
        }
    }
    Ok(sorted)
}

/// Principal submatrix of `g` on whole conjugate pairs.
pub fn reduced_correlation(g: &CorrelationMatrix, indices: &[usize]) -> Result<CorrelationMatrix> {
    let idx = pair_indices(g.n(), indices)?;
    let m = g.matrix();
    CorrelationMatrix::new(DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]))
}

/// Mean number of excitations of a single mode, `(G_qq + G_pp − 1)/2`.
pub fn excitation_number(g: &CorrelationMatrix) -> Result<f64> {
    if g.n() != 1 {
        return Err(Error::Dimension(format!("excitation number needs one mode, got {}", g.n())));
    }
    Ok((g.trace() - 1.0) / 2.0)
}

/// Central-difference Jacobian of `f` at `x`.
pub fn jacobian_fd<F>(f: F, x: &[f64], epsilon: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    jacobian_fd_periodic(f, x, epsilon, &[])
}

/// As [`jacobian_fd`], with output components flagged in `periodic` treated
/// as angles whose differences are wrapped to `(−π, π]`.
pub fn jacobian_fd_periodic<F>(f: F, x: &[f64], epsilon: f64, periodic: &[bool]) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut columns = Vec::with_capacity(x.len());
    let mut rows = 0;
    for j in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += epsilon;
        xm[j] -= epsilon;
        let (fp, fm) = (f(&xp), f(&xm));
        rows = fp.len();
        let col: Vec<f64> = fp
            .iter()
            .zip(&fm)
            .enumerate()
            .map(|(i, (a, b))| {
                let mut d = a - b;
                if periodic.get(i).copied().unwrap_or(false) {
                    d -= two_pi * (d / two_pi).round();
                }
                d / (2.0 * epsilon)
            })
            .collect();
        columns.push(col);
    }
    DMatrix::from_fn(rows, x.len(), |i, j| columns[j][i])
}

/// Output of [`propagate_tangent`]; every vector is indexed by sample.
#[derive(Debug, Clone)]
pub struct TangentRun {
    pub trajectory: Trajectory<PhasePoint>,
    pub frames: Vec<TangentFrame>,
    /// Materialised propagators. Entries overflow for very long chaotic runs;
    /// use `factored` there.
    pub propagators: Vec<Propagator>,
    pub factored: Vec<FactoredPropagator>,
}

/// Integration settings for [`propagate_tangent`]. The kicked top is
/// sampled after every kick and ignores both fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentOptions {
    pub sample_dt: f64,
    pub tol: f64,
}

impl Default for TangentOptions {
    fn default() -> Self {
        TangentOptions { sample_dt: 0.1, tol: 1e-12 }
    }
}

/// Co-evolves a trajectory and the tangent propagator along it.
pub fn propagate_tangent(
    system: &TangentSystem,
    x0: &PhasePoint,
    frame0: &TangentFrame,
    t_final: f64,
    options: &TangentOptions,
) -> Result<TangentRun> {
    if x0.modes() != system.modes() || frame0.base_point.modes() != system.modes() {
        return Err(Error::Dimension("initial state or frame does not belong to the model".into()));
    }
    let dim = 2 * system.modes();
    let mut run = TangentRun {
        trajectory: Trajectory::new(),
        frames: vec![frame0.clone()],
        propagators: vec![Propagator::identity(dim)],
        factored: vec![FactoredPropagator::identity(dim)],
    };
    run.trajectory.push(0.0, x0.clone(), None)?;
    let record = |run: &mut TangentRun, t: f64, point: PhasePoint, f: FactoredPropagator| -> Result<()> {
        let p = f.to_propagator();
        run.frames.push(frame0.transported(&p.matrix, point.clone()));
        run.propagators.push(p);
        run.factored.push(f);
        run.trajectory.push(t, point, None)
    };
    match (system, x0) {
        (TangentSystem::KickedTop(params), PhasePoint::Spin(a0)) => {
            params.validate()?;
            let mut stepper = KickedTopTangent::new(params, a0.clone());
            let mut f = FactoredPropagator::identity(2);
            let kicks = (t_final / params.tau + 1e-9).floor() as usize;
            for k in 1..=kicks {
                let m = stepper.kick()?;
                f.push(&DMatrix::from_row_slice(2, 2, &[m.a, m.b, m.c, m.d]), params.tau)?;
                record(&mut run, k as f64 * params.tau, PhasePoint::Spin(stepper.point().clone()), f.clone())?;
            }
        }
        (TangentSystem::Dicke(params), PhasePoint::Dicke(s0)) => {
            if !(options.sample_dt > 0.0) {
                return Err(Error::InvalidParameter("sample_dt must be positive".into()));
            }
            let mut stepper = DickeTangent::new(s0, params, options.tol)?;
            let n = (t_final / options.sample_dt + 1e-9).floor() as usize;
            for k in 1..=n {
                let t = k as f64 * options.sample_dt;
                stepper.advance(t)?;
                record(&mut run, t, PhasePoint::Dicke(stepper.state()), stepper.factored().clone())?;
            }
        }
        _ => return Err(Error::Dimension("initial state does not belong to the model".into())),
    }
    Ok(run)
}
