//! Classical limiting dynamics of the two models.

pub mod dicke;
pub mod kicked_top;
pub mod ode;
pub mod poincare;

use crate::error::{Error, Result};
use crate::precision::Real;

pub use dicke::{
    dicke_energy, dicke_point_from_energy, dicke_rhs, integrate_dicke, DickeParams, DickeState, SPIN_LENGTH,
    EnergyRoot, RootChoice,
};
pub use kicked_top::{kicked_top_step, KickedTopMap, KickedTopParams};
pub use poincare::{poincare_section, SectionPoint};

/// Half-width of the excluded band around the coordinate poles, on `|sin θ|`.
pub const POLE_EPSILON: f64 = 1e-8;

pub(crate) fn check_pole<R: Real>(sin_theta: &R) -> Result<()> {
    let s = sin_theta.to_f64().abs();
    if s < POLE_EPSILON || !s.is_finite() {
        Err(Error::PoleProximity { sin_theta: s, threshold: POLE_EPSILON })
    } else {
        Ok(())
    }
}

/// Sampled orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub energy: Option<Vec<f64>>,
}

impl<S> Default for Trajectory<S> {
    fn default() -> Self {
        Trajectory { times: Vec::new(), states: Vec::new(), energy: None }
    }
}

impl<S> Trajectory<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_energy() -> Self {
        Trajectory { times: Vec::new(), states: Vec::new(), energy: Some(Vec::new()) }
    }

    /// Appends a sample. Times must be strictly increasing.
    pub fn push(&mut self, t: f64, state: S, energy: Option<f64>) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::InvalidParameter(format!("sample time {t} not after {last}")));
            }
        }
        match (&mut self.energy, energy) {
            (Some(es), Some(e)) => es.push(e),
            (None, None) => {}
            _ => return Err(Error::InvalidParameter("energy column present on some samples only".into())),
        }
        self.times.push(t);
        self.states.push(state);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }
}
