//! Linearised Dicke flow for `(δQ, δP, δq, δp)`, with the spin pair in the
//! frame transverse to the instantaneous spin direction.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, Matrix4};

use super::FactoredPropagator;
use crate::classical::ode::{Dopri5, OdeCursor, OdeStats};
use crate::classical::{check_pole, dicke, DickeParams, DickeState};
use crate::error::{Error, Result};

/// Generator `A` of `d(δx)/dt = A·δx`.
pub fn dicke_stability_matrix(x: &DickeState, p: &DickeParams) -> Result<Matrix4<f64>> {
    let (st, ct) = x.angles.theta.sin_cos();
    check_pole(&st)?;
    let (sp, cp) = x.angles.phi.sin_cos();
    let g = p.gamma / SQRT_2;
    let r = p.gamma * x.q * cp / st;
    #[rustfmt::skip]
    let a = Matrix4::new(
        0.0, p.omega, 0.0, 0.0,
        -p.omega, 0.0, -g * ct * cp, g * sp,
        -g * sp, 0.0, 0.0, -r,
        -g * ct * cp, 0.0, r, 0.0,
    );
    Ok(a)
}

fn joint_rhs(y: &[f64], params: &DickeParams, out: &mut [f64]) -> Result<()> {
    dicke::flow(&y[..4], params, &mut out[..4])?;
    let a = dicke_stability_matrix(&DickeState::from_flat(&y[..4]), params)?;
    // U is stored column-major in y[4..20].
    for col in 0..4 {
        for row in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                s += a[(row, k)] * y[4 + 4 * col + k];
            }
            out[4 + 4 * col + row] = s;
        }
    }
    Ok(())
}

fn identity_block() -> [f64; 16] {
    let mut u = [0.0; 16];
    for i in 0..4 {
        u[5 * i] = 1.0;
    }
    u
}

/// Trajectory and tangent propagator integrated jointly. Each call to
/// [`DickeTangent::advance`] integrates one interval from `U = I` and
/// appends the interval propagator to a QR-balanced product.
#[derive(Debug, Clone)]
pub struct DickeTangent {
    params: DickeParams,
    solver: Dopri5,
    cursor: OdeCursor,
    factored: FactoredPropagator,
}

impl DickeTangent {
    pub fn new(x0: &DickeState, params: &DickeParams, tol: f64) -> Result<Self> {
        params.validate()?;
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        check_pole(&x0.angles.theta.sin())?;
        let mut y = x0.to_flat().to_vec();
        y.extend_from_slice(&identity_block());
        Ok(DickeTangent {
            params: *params,
            solver: Dopri5::new(tol),
            cursor: OdeCursor::new(0.0, y),
            factored: FactoredPropagator::identity(4),
        })
    }

    pub fn t(&self) -> f64 {
        self.cursor.t
    }

    pub fn state(&self) -> DickeState {
        DickeState::from_flat(&self.cursor.y[..4])
    }

    pub fn factored(&self) -> &FactoredPropagator {
        &self.factored
    }

    pub fn stats(&self) -> OdeStats {
        self.cursor.stats
    }

    /// Integrates to `t_end` and returns the propagator of that interval.
    pub fn advance(&mut self, t_end: f64) -> Result<DMatrix<f64>> {
        let t0 = self.cursor.t;
        let params = self.params;
        let mut rhs = |_t: f64, y: &[f64], d: &mut [f64]| joint_rhs(y, &params, d);
        self.solver.advance(&mut rhs, &mut self.cursor, t_end)?;
        let u = DMatrix::from_column_slice(4, 4, &self.cursor.y[4..20]);
        self.factored.push(&u, t_end - t0)?;
        let mut y = self.cursor.y.clone();
        // Keep φ bounded; the flow is periodic in it.
        y[2] = y[2].rem_euclid(2.0 * std::f64::consts::PI);
        y[4..20].copy_from_slice(&identity_block());
        self.cursor.reset_state(y);
        Ok(u)
    }
}
