//! Classical Dicke dynamics: a collective spin of length 1/2 coupled to one
//! oscillator mode.

use serde::{Deserialize, Serialize};

use super::ode::{Dopri5, OdeCursor};
use super::{check_pole, Trajectory};
use crate::error::{Error, Result};
use crate::phase_space::BlochAngles;

/// Classical spin length per unit `N`.
pub const SPIN_LENGTH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeParams {
    /// Oscillator frequency.
    #[serde(default = "unit")]
    pub omega: f64,
    /// Spin splitting.
    #[serde(default = "unit")]
    pub omega0: f64,
    /// Spin–oscillator coupling.
    pub gamma: f64,
}

fn unit() -> f64 {
    1.0
}

impl DickeParams {
    /// Resonant parameters, `ω = ω₀ = 1`.
    pub fn resonant(gamma: f64) -> Self {
        DickeParams { omega: 1.0, omega0: 1.0, gamma }
    }

    pub fn critical_coupling(&self) -> f64 {
        (self.omega * self.omega0).sqrt() / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega0 > 0.0 && self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need omega > 0, omega0 > 0, gamma >= 0; got {:?}",
                self
            )));
        }
        Ok(())
    }
}

/// Point of the classical phase space: oscillator quadratures (rescaled by
/// `√N`) and the spin direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DickeState {
    pub q: f64,
    pub p: f64,
    pub angles: BlochAngles,
}

impl DickeState {
    pub fn new(q: f64, p: f64, angles: BlochAngles) -> Self {
        DickeState { q, p, angles }
    }

    /// Flat layout `(Q, P, φ, θ)` used by the integrator.
    pub(crate) fn to_flat(&self) -> [f64; 4] {
        [self.q, self.p, self.angles.phi, self.angles.theta]
    }

    pub(crate) fn from_flat(y: &[f64]) -> Self {
        DickeState {
            q: y[0],
            p: y[1],
            angles: BlochAngles { theta: y[3], phi: y[2].rem_euclid(2.0 * std::f64::consts::PI) },
        }
    }

    /// Mirror image under time reversal, `(Q, P, θ, φ) → (Q, −P, θ, −φ)`.
    pub fn time_reversed(&self) -> Self {
        DickeState {
            q: self.q,
            p: -self.p,
            angles: BlochAngles {
                theta: self.angles.theta,
                phi: (-self.angles.phi).rem_euclid(2.0 * std::f64::consts::PI),
            },
        }
    }

    /// Mean oscillator occupation per spin, `(Q² + P²)/2`.
    pub fn boson_density(&self) -> f64 {
        0.5 * (self.q * self.q + self.p * self.p)
    }
}

pub(crate) fn flow(y: &[f64], params: &DickeParams, out: &mut [f64]) -> Result<()> {
    let (q, p, phi, theta) = (y[0], y[1], y[2], y[3]);
    let (st, ct) = theta.sin_cos();
    check_pole(&st)?;
    let (sp, cp) = phi.sin_cos();
    let g = params.gamma;
    out[0] = params.omega * p;
    out[1] = -params.omega * q - 0.5 * g * st * cp;
    out[2] = params.omega0 - g * q * cp * ct / st;
    out[3] = -g * q * sp;
    Ok(())
}

/// Time derivative `(dQ/dt, dP/dt, dφ/dt, dθ/dt)`.
pub fn dicke_rhs(x: &DickeState, params: &DickeParams) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    flow(&x.to_flat(), params, &mut out)?;
    Ok(out)
}

/// Classical energy per spin.
pub fn dicke_energy(x: &DickeState, params: &DickeParams) -> f64 {
    let (st, ct) = x.angles.theta.sin_cos();
    params.omega0 * ct * SPIN_LENGTH
        + 0.5 * params.omega * (x.q * x.q + x.p * x.p)
        + params.gamma * x.q * st * x.angles.phi.cos() * SPIN_LENGTH
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootChoice {
    /// Larger root, which is positive.
    Positive,
    /// No positive root exists; the larger one was taken.
    LargerNonPositive,
    /// Double root.
    Tangent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRoot {
    pub state: DickeState,
    pub choice: RootChoice,
}

/// Initial point with `P = 0` on the energy shell `E`, solving the quadratic
/// in `Q`.
pub fn dicke_point_from_energy(energy: f64, angles: &BlochAngles, params: &DickeParams) -> Result<EnergyRoot> {
    let (st, ct) = angles.theta.sin_cos();
    let a = 0.5 * params.omega;
    let b = params.gamma * st * angles.phi.cos() * SPIN_LENGTH;
    let c = params.omega0 * ct * SPIN_LENGTH - energy;
    let disc = b * b - 4.0 * a * c;
    let scale = (b * b).max((4.0 * a * c).abs()).max(f64::MIN_POSITIVE);
    let (q, choice) = if disc.abs() <= 4.0 * f64::EPSILON * scale {
        (-b / (2.0 * a), RootChoice::Tangent)
    } else if disc < 0.0 {
        return Err(Error::EnergyUnreachable { energy });
    } else {
        // Stable form of the larger root.
        let sq = disc.sqrt();
        let q = if b <= 0.0 { (-b + sq) / (2.0 * a) } else { (2.0 * c) / (-b - sq) };
        (q, if q > 0.0 { RootChoice::Positive } else { RootChoice::LargerNonPositive })
    };
    Ok(EnergyRoot { state: DickeState::new(q, 0.0, angles.clone()), choice })
}

/// Integrates the classical flow, sampling every `sample_dt` up to
/// `t_final`. Relative and absolute local error are both held at `tol`.
pub fn integrate_dicke(
    x0: &DickeState,
    params: &DickeParams,
    t_final: f64,
    tol: f64,
    sample_dt: f64,
) -> Result<Trajectory<DickeState>> {
    if !(tol > 0.0) || !(sample_dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::InvalidParameter("tol, sample_dt must be positive and t_final non-negative".into()));
    }
    params.validate()?;
    let solver = Dopri5::new(tol);
    let mut rhs = |_t: f64, y: &[f64], d: &mut [f64]| flow(y, params, d);
    let mut cursor = OdeCursor::new(0.0, x0.to_flat().to_vec());
    let mut tr = Trajectory::with_energy();
    tr.push(0.0, x0.clone(), Some(dicke_energy(x0, params)))?;
    let n = (t_final / sample_dt + 1e-9).floor() as usize;
    for k in 1..=n {
        let t = k as f64 * sample_dt;
        solver.advance(&mut rhs, &mut cursor, t)?;
        let s = DickeState::from_flat(&cursor.y);
        let e = dicke_energy(&s, params);
        tr.push(t, s, Some(e))?;
    }
    Ok(tr)
}
