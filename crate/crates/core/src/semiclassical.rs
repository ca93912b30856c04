//! Quantifier time series along classical reference trajectories.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::classical::{DickeParams, DickeState, KickedTopParams};
use crate::error::{Error, Result};
use crate::fluctuations::{reduced_correlation, DickeTangent, KickedTopTangent, ModeMoments};
use crate::phase_space::{vacuum_correlation, BlochAngles, CorrelationMatrix};
use crate::precision::{lift_angle, BigReal, PrecisionConfig, Real};
use crate::quantifiers::{
    det_ga_spin, qfi_spin, qfi_spin_block, square_commutator_entries, squeezing_spin, vn_entropy_from_det, Axis,
    QuantifierSeries,
};

/// Above this determinant the single-mode entropy is taken from its
/// asymptote `½ ln d + 1`, which is exact to `O(1/d)`.
const LARGE_DET: f64 = 1e250;

fn entropies_from_log_det(ln_det: f64) -> Result<(f64, f64)> {
    let s2 = 0.5 * (4f64.ln() + ln_det);
    if ln_det > LARGE_DET.ln() {
        return Ok((0.5 * ln_det + 1.0, s2));
    }
    Ok((vn_entropy_from_det(ln_det.exp())?, s2.max(0.0)))
}

/// Single-spin semiclassical run of the kicked top.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpinRun {
    /// `S_A`, `S₂_A` for the chosen spin fraction, `f_Q`, `ξ²` and
    /// `c` with `c·S²` normalisation.
    pub series: QuantifierSeries,
    pub points: Vec<BlochAngles>,
    /// Collective excitations `(tr G − 1)/2`.
    pub n_exc: Vec<f64>,
    /// `det(2G) − 1`.
    pub purity_deviation: Vec<f64>,
    /// `ln det(2G)` rendered at the working precision.
    pub log_det_2g: Vec<String>,
    /// Leading log-stretch of the tangent map; divided by `t` it is the
    /// finite-time exponent.
    pub log_stretch: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinRunOptions {
    /// Spin fraction of subsystem `A`.
    pub f_a: f64,
    pub precision: PrecisionConfig,
    /// Square commutator `c_{αβ}`.
    pub axes: (Axis, Axis),
}

impl Default for SpinRunOptions {
    fn default() -> Self {
        SpinRunOptions { f_a: 0.5, precision: PrecisionConfig::Machine, axes: (Axis::Z, Axis::Z) }
    }
}

fn spin_record<R: Real>(
    run: &mut SpinRun,
    tangent: &KickedTopTangent<R>,
    frame0: &([f64; 3], [f64; 3]),
    t: f64,
    opts: &SpinRunOptions,
) -> Result<()> {
    let proto = tangent.point().theta.clone();
    let f = tangent.tangent();
    let g0 = ModeMoments::vacuum(&proto);
    let n = (f.trace_correlation(&g0) - proto.one()) / proto.lit(2.0);
    let n_f = n.to_f64().max(0.0);
    let ln_det = if n_f > 1e100 {
        (opts.f_a * (1.0 - opts.f_a)).ln() + n.ln().to_f64()
    } else {
        det_ga_spin(opts.f_a, n_f).ln()
    };
    let (vn, r2) = entropies_from_log_det(ln_det)?;
    let point = tangent.point().to_f64();
    let u = f.matrix().to_f64();
    let c = square_commutator_entries(
        [u[0][0], u[0][1], u[1][0], u[1][1]],
        frame0,
        &point.transverse_frame(),
        opts.axes.0,
        opts.axes.1,
    );
    let s = &mut run.series;
    s.times.push(t);
    s.s_a.push(vn);
    s.s2_a.push(r2);
    s.f_q.push(qfi_spin(n_f));
    s.xi2.push(squeezing_spin(n_f));
    s.c_ab.push(c);
    run.points.push(point);
    run.n_exc.push(n_f);
    run.purity_deviation.push(f.purity_deviation().to_f64());
    run.log_det_2g.push((f.log_determinant() * proto.lit(2.0)).decimal_string());
    run.log_stretch.push(f.log_scales().0.to_f64());
    Ok(())
}

fn kicked_top_run_in<R: Real>(
    params: &KickedTopParams,
    start: BlochAngles<R>,
    kicks: usize,
    opts: &SpinRunOptions,
) -> Result<SpinRun> {
    let frame0 = start.to_f64().transverse_frame();
    let mut tangent = KickedTopTangent::new(params, start);
    let mut run = SpinRun::default();
    spin_record(&mut run, &tangent, &frame0, 0.0, opts)?;
    for k in 1..=kicks {
        tangent.kick()?;
        spin_record(&mut run, &tangent, &frame0, k as f64 * params.tau, opts)?;
    }
    Ok(run)
}

/// Semiclassical quantifiers after every kick, starting from the coherent
/// state at `start`.
pub fn kicked_top_semiclassical(
    params: &KickedTopParams,
    start: &BlochAngles,
    kicks: usize,
    opts: &SpinRunOptions,
) -> Result<SpinRun> {
    params.validate()?;
    opts.precision.validate()?;
    if !(opts.f_a > 0.0 && opts.f_a < 1.0) {
        return Err(Error::InvalidParameter(format!("spin fraction must lie in (0, 1), got {}", opts.f_a)));
    }
    match opts.precision {
        PrecisionConfig::Machine => kicked_top_run_in(params, start.clone(), kicks, opts),
        PrecisionConfig::Extended { digits } => {
            let proto = BigReal::from_f64(0.0, digits);
            let lifted = BlochAngles { theta: lift_angle(start.theta, &proto), phi: lift_angle(start.phi, &proto) };
            kicked_top_run_in(params, lifted, kicks, opts)
        }
    }
}

/// Semiclassical run of the Dicke model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DickeRun {
    /// Atoms–cavity entropies, spin-only `f_Q` and `ξ²`, and `c` for the
    /// chosen spin components.
    pub series: QuantifierSeries,
    /// `2λ_max` over all four quadratures.
    pub f_q_all: Vec<f64>,
    pub states: Vec<DickeState>,
    pub purity_deviation: Vec<f64>,
    pub log_stretch: Vec<f64>,
    /// `‖UᵀJU − J‖ / ‖U‖²`.
    pub symplectic_residual: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeRunOptions {
    pub sample_dt: f64,
    pub tol: f64,
    pub axes: (Axis, Axis),
}

impl Default for DickeRunOptions {
    fn default() -> Self {
        DickeRunOptions { sample_dt: 0.1, tol: 1e-12, axes: (Axis::Z, Axis::Z) }
    }
}

fn largest_two_lambda(g: &CorrelationMatrix) -> f64 {
    2.0 * SymmetricEigen::new(g.matrix().clone()).eigenvalues.max()
}

/// Semiclassical quantifiers every `sample_dt` up to `t_final`.
pub fn dicke_semiclassical(
    params: &DickeParams,
    x0: &DickeState,
    t_final: f64,
    opts: &DickeRunOptions,
) -> Result<DickeRun> {
    if !(opts.sample_dt > 0.0 && t_final >= 0.0) {
        return Err(Error::InvalidParameter("need sample_dt > 0 and t_final >= 0".into()));
    }
    let g0 = vacuum_correlation(2);
    let frame0 = x0.angles.transverse_frame();
    let mut tangent = DickeTangent::new(x0, params, opts.tol)?;
    let steps = (t_final / opts.sample_dt).round() as usize;
    let mut run = DickeRun::default();
    for k in 0..=steps {
        let t = k as f64 * opts.sample_dt;
        if k > 0 {
            tangent.advance(t)?;
        }
        let f = tangent.factored();
        let (vn, r2) = entropies_from_log_det(f.reduced_log_determinant(&g0, &[2, 3])?)?;
        let g = f.correlation(&g0)?;
        let spin = reduced_correlation(&g, &[2, 3])?;
        let state = tangent.state();
        let frame_t = state.angles.transverse_frame();
        let (fq, _) = qfi_spin_block(&spin, &frame_t)?;
        let xi2 = 2.0 * SymmetricEigen::new(spin.matrix().clone()).eigenvalues.min();
        let u = f.matrix();
        let c = square_commutator_entries(
            [u[(2, 2)], u[(2, 3)], u[(3, 2)], u[(3, 3)]],
            &frame0,
            &frame_t,
            opts.axes.0,
            opts.axes.1,
        );
        let s = &mut run.series;
        s.times.push(t);
        s.s_a.push(vn);
        s.s2_a.push(r2);
        s.f_q.push(fq);
        s.xi2.push(xi2);
        s.c_ab.push(c);
        run.f_q_all.push(largest_two_lambda(&g));
        run.states.push(state);
        run.purity_deviation.push(f.purity_deviation());
        run.log_stretch.push(f.log_scales().iter().copied().fold(f64::NEG_INFINITY, f64::max));
        run.symplectic_residual.push(f.relative_symplectic_residual());
    }
    Ok(run)
}
