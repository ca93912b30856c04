//! Stroboscopic map of the classical kicked top: a precession by `alpha`
//! about the x axis followed by a twist of the azimuth proportional to
//! `cos θ`.

use serde::{Deserialize, Serialize};

use super::{check_pole, Trajectory};
use crate::error::{Error, Result};
use crate::phase_space::BlochAngles;
use crate::precision::{lift_angle, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickedTopParams {
    /// Precession angle per period.
    pub alpha: f64,
    /// Kick strength.
    pub beta: f64,
    #[serde(default = "unit_period")]
    pub tau: f64,
}

fn unit_period() -> f64 {
    1.0
}

impl KickedTopParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        KickedTopParams { alpha, beta, tau: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau != 1.0 {
            return Err(Error::InvalidParameter(format!("kick period must be 1, got {}", self.tau)));
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::InvalidParameter("non-finite kicked-top parameter".into()));
        }
        Ok(())
    }
}

/// Map coefficients evaluated once at the working precision.
#[derive(Debug, Clone)]
pub struct KickedTopMap<R> {
    cos_alpha: R,
    sin_alpha: R,
    beta: R,
}

impl<R: Real> KickedTopMap<R> {
    pub fn new(params: &KickedTopParams, proto: &R) -> Self {
        let alpha = lift_angle(params.alpha, proto);
        KickedTopMap { cos_alpha: alpha.cos(), sin_alpha: alpha.sin(), beta: proto.lit(params.beta) }
    }

    pub fn beta(&self) -> &R {
        &self.beta
    }

    fn precess(&self, a: &BlochAngles<R>, cos_alpha: &R, sin_alpha: &R) -> Result<BlochAngles<R>> {
        let (st, ct) = (a.theta.sin(), a.theta.cos());
        check_pole(&st)?;
        let (sp, cp) = (a.phi.sin(), a.phi.cos());
        let tan_phi = sp.clone() / cp.clone();
        let arg = tan_phi * cos_alpha.clone() - sin_alpha.clone() * ct.clone() / (st.clone() * cp.clone());
        let mut phi = arg.atan();
        if cp < cp.zero() {
            phi = phi + cp.pi();
        }
        let one = ct.one();
        let mut cos_theta = ct * cos_alpha.clone() + st * sp * sin_alpha.clone();
        if cos_theta > one {
            cos_theta = one.clone();
        } else if cos_theta < -one.clone() {
            cos_theta = -one.clone();
        }
        check_pole(&(one - cos_theta.square()).sqrt())?;
        Ok(BlochAngles { theta: cos_theta.acos(), phi: phi.rem_two_pi() })
    }

    /// One period. Returns the point after the precession and the point
    /// after the kick.
    pub fn step(&self, a: &BlochAngles<R>) -> Result<(BlochAngles<R>, BlochAngles<R>)> {
        let mid = self.precess(a, &self.cos_alpha, &self.sin_alpha)?;
        let phi = (mid.phi.clone() + self.beta.clone() * mid.theta.cos()).rem_two_pi();
        let fin = BlochAngles { theta: mid.theta.clone(), phi };
        Ok((mid, fin))
    }

    /// Inverse period: untwist, then precess by `−alpha`.
    pub fn inverse_step(&self, a: &BlochAngles<R>) -> Result<BlochAngles<R>> {
        let phi = (a.phi.clone() - self.beta.clone() * a.theta.cos()).rem_two_pi();
        let untwisted = BlochAngles { theta: a.theta.clone(), phi };
        self.precess(&untwisted, &self.cos_alpha, &-self.sin_alpha.clone())
    }

    /// Orbit of `kicks` periods, sampled every period (time `t = kick index`).
    pub fn orbit(&self, a0: &BlochAngles<R>, kicks: usize) -> Result<Trajectory<BlochAngles<R>>> {
        let mut tr = Trajectory::new();
        let mut a = a0.clone();
        tr.push(0.0, a.clone(), None)?;
        for k in 1..=kicks {
            a = self.step(&a)?.1;
            tr.push(k as f64, a.clone(), None)?;
        }
        Ok(tr)
    }
}

/// One period of the map at the precision of `a`.
pub fn kicked_top_step<R: Real>(
    a: &BlochAngles<R>,
    params: &KickedTopParams,
) -> Result<(BlochAngles<R>, BlochAngles<R>)> {
    KickedTopMap::new(params, &a.theta).step(a)
}
