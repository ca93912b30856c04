//! Linearised kicked-top map in the frame co-moving with the spin.
//!
//! One period acts on the fluctuation pair `(δq, δp)` as a rotation by the
//! change of frame angle followed by a shear proportional to the kick.

use crate::classical::{check_pole, KickedTopMap, KickedTopParams};
use crate::error::{Error, Result};
use crate::phase_space::{BlochAngles, CorrelationMatrix};
use crate::precision::Real;

/// 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat2<R> {
    pub a: R,
    pub b: R,
    pub c: R,
    pub d: R,
}

impl<R: Real> Mat2<R> {
    pub fn identity(proto: &R) -> Self {
        Mat2 { a: proto.one(), b: proto.zero(), c: proto.zero(), d: proto.one() }
    }

    pub fn mul(&self, o: &Mat2<R>) -> Mat2<R> {
        Mat2 {
            a: self.a.clone() * o.a.clone() + self.b.clone() * o.c.clone(),
            b: self.a.clone() * o.b.clone() + self.b.clone() * o.d.clone(),
            c: self.c.clone() * o.a.clone() + self.d.clone() * o.c.clone(),
            d: self.c.clone() * o.b.clone() + self.d.clone() * o.d.clone(),
        }
    }

    pub fn determinant(&self) -> R {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }

    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        [[self.a.to_f64(), self.b.to_f64()], [self.c.to_f64(), self.d.to_f64()]]
    }
}

/// Entries `(qq, qp, pp)` of a single-mode correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMoments<R> {
    pub qq: R,
    pub qp: R,
    pub pp: R,
}

impl<R: Real> ModeMoments<R> {
    pub fn vacuum(proto: &R) -> Self {
        ModeMoments { qq: proto.lit(0.5), qp: proto.zero(), pp: proto.lit(0.5) }
    }

    pub fn determinant(&self) -> R {
        self.qq.clone() * self.pp.clone() - self.qp.square()
    }

    pub fn to_correlation(&self) -> CorrelationMatrix {
        CorrelationMatrix::single_mode(self.qq.to_f64(), self.qp.to_f64(), self.pp.to_f64())
    }
}

/// Orientation of the transverse frame, `ψ = −arctan(tan φ / cos θ)`.
pub fn frame_angle<R: Real>(a: &BlochAngles<R>) -> R {
    -(a.phi.tan() / a.theta.cos()).atan()
}

fn rotation_and_shear<R: Real>(a: &BlochAngles<R>, mid: &BlochAngles<R>, beta: &R) -> Result<(R, R, R)> {
    check_pole(&a.theta.sin())?;
    let sin_mid = mid.theta.sin();
    check_pole(&sin_mid)?;
    let delta = frame_angle(a) - frame_angle(mid);
    let shear = beta.clone() * sin_mid.square();
    // The arctangent fixes the frame angle only modulo π; the branch of
    // atan2(sin φ, cos φ cos θ) is restored by this parity.
    let branch = |x: &BlochAngles<R>| (x.phi.cos() * x.theta.cos()).to_f64() < 0.0;
    if branch(a) != branch(mid) {
        Ok((-delta.cos(), -delta.sin(), shear))
    } else {
        Ok((delta.cos(), delta.sin(), shear))
    }
}

/// One-period tangent matrix acting on `(δq, δp)`; `mid` is the point after
/// the precession.
pub fn kicked_top_tangent_step<R: Real>(a: &BlochAngles<R>, mid: &BlochAngles<R>, beta: &R) -> Result<Mat2<R>> {
    let (c, s, k) = rotation_and_shear(a, mid, beta)?;
    // [[1, 0], [−k, 1]] · [[c, s], [−s, c]]
    Ok(Mat2 {
        a: c.clone(),
        b: s.clone(),
        c: -(k.clone() * c.clone()) - s.clone(),
        d: c - k * s,
    })
}

/// Correlation update over one period, written directly on the moments.
pub fn fluct_step_moments<R: Real>(
    g: &ModeMoments<R>,
    a: &BlochAngles<R>,
    mid: &BlochAngles<R>,
    beta: &R,
) -> Result<ModeMoments<R>> {
    let (c, s, k) = rotation_and_shear(a, mid, beta)?;
    let two = c.lit(2.0);
    let sin2 = two.clone() * s.clone() * c.clone();
    let cos2 = c.square() - s.square();
    let (cc, ss) = (c.square(), s.square());
    let half_sin2 = sin2.clone() / two.clone();

    let qq = cc.clone() * g.qq.clone() + sin2.clone() * g.qp.clone() + ss.clone() * g.pp.clone();
    let pp = ss * g.qq.clone() - sin2 * g.qp.clone() + cc * g.pp.clone();
    let qp = -(half_sin2.clone() * g.qq.clone()) + cos2 * g.qp.clone() + half_sin2 * g.pp.clone();

    let pp2 = pp - two * k.clone() * qp.clone() + k.square() * qq.clone();
    let qp2 = qp - k * qq.clone();
    Ok(ModeMoments { qq, qp: qp2, pp: pp2 })
}

/// Correlation update over one period for a single-mode matrix.
pub fn kicked_top_fluct_step(
    g: &CorrelationMatrix,
    a: &BlochAngles,
    mid: &BlochAngles,
    beta: f64,
) -> Result<CorrelationMatrix> {
    if g.n() != 1 {
        return Err(Error::Dimension(format!("kicked top has one mode, got {}", g.n())));
    }
    let m = ModeMoments { qq: g.get(0, 0), qp: g.get(0, 1), pp: g.get(1, 1) };
    Ok(fluct_step_moments(&m, a, mid, &beta)?.to_correlation())
}

/// Two-dimensional analogue of [`super::FactoredPropagator`] in any working
/// precision: `U = Q · diag(e^{s₁}, e^{s₂}) · [[1, x], [0, 1]]` with `Q` a
/// rotation.
#[derive(Debug, Clone)]
pub struct FactoredTangent<R> {
    cos_q: R,
    sin_q: R,
    s1: R,
    s2: R,
    x: R,
    steps: usize,
}

impl<R: Real> FactoredTangent<R> {
    pub fn identity(proto: &R) -> Self {
        FactoredTangent {
            cos_q: proto.one(),
            sin_q: proto.zero(),
            s1: proto.zero(),
            s2: proto.zero(),
            x: proto.zero(),
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Log-scales `(s₁, s₂)`.
    pub fn log_scales(&self) -> (&R, &R) {
        (&self.s1, &self.s2)
    }

    pub fn push(&mut self, m: &Mat2<R>) {
        // A = M·Q, first column of Q is (cos, sin).
        let a11 = m.a.clone() * self.cos_q.clone() + m.b.clone() * self.sin_q.clone();
        let a21 = m.c.clone() * self.cos_q.clone() + m.d.clone() * self.sin_q.clone();
        let a12 = -(m.a.clone() * self.sin_q.clone()) + m.b.clone() * self.cos_q.clone();
        let a22 = -(m.c.clone() * self.sin_q.clone()) + m.d.clone() * self.cos_q.clone();
        let r11 = (a11.square() + a21.square()).sqrt();
        let (c, s) = (a11 / r11.clone(), a21 / r11.clone());
        let r12 = c.clone() * a12.clone() + s.clone() * a22.clone();
        let r22 = c.clone() * a22 - s.clone() * a12;
        let w = (self.s2.clone() - self.s1.clone()).exp();
        self.x = self.x.clone() + r12 * w / r11.clone();
        self.s1 = self.s1.clone() + r11.ln();
        self.s2 = self.s2.clone() + r22.ln();
        self.cos_q = c;
        self.sin_q = s;
        self.steps += 1;
    }

    pub fn matrix(&self) -> Mat2<R> {
        let e1 = self.s1.exp();
        let e2 = self.s2.exp();
        let (c, s) = (self.cos_q.clone(), self.sin_q.clone());
        // Q · [[e1, e1·x], [0, e2]]
        Mat2 {
            a: c.clone() * e1.clone(),
            b: c.clone() * e1.clone() * self.x.clone() - s.clone() * e2.clone(),
            c: s.clone() * e1.clone(),
            d: s * e1 * self.x.clone() + c * e2,
        }
    }

    /// `ln det U`.
    pub fn log_determinant(&self) -> R {
        let det_q = self.cos_q.square() + self.sin_q.square();
        self.s1.clone() + self.s2.clone() + det_q.ln()
    }

    /// `det(2G) − 1` starting from a pure state.
    pub fn purity_deviation(&self) -> R {
        (self.log_determinant() * self.s1.lit(2.0)).exp() - self.s1.one()
    }

    /// `tr G` for `G = U G₀ Uᵀ`, without forming `U`.
    pub fn trace_correlation(&self, g0: &ModeMoments<R>) -> R {
        // Q drops out of the trace; T = diag(e^s)·[[1, x], [0, 1]].
        let x = self.x.clone();
        let two = x.lit(2.0);
        let t11 = g0.qq.clone() + two * x.clone() * g0.qp.clone() + x.square() * g0.pp.clone();
        (self.s1.clone() * x.lit(2.0)).exp() * t11 + (self.s2.clone() * x.lit(2.0)).exp() * g0.pp.clone()
    }

    pub fn correlation(&self, g0: &ModeMoments<R>) -> ModeMoments<R> {
        let u = self.matrix();
        let (a, b, c, d) = (u.a, u.b, u.c, u.d);
        let two = a.lit(2.0);
        ModeMoments {
            qq: a.square() * g0.qq.clone() + two.clone() * a.clone() * b.clone() * g0.qp.clone() + b.square() * g0.pp.clone(),
            qp: a.clone() * c.clone() * g0.qq.clone()
                + (a.clone() * d.clone() + b.clone() * c.clone()) * g0.qp.clone()
                + b.clone() * d.clone() * g0.pp.clone(),
            pp: c.square() * g0.qq.clone() + two * c * d.clone() * g0.qp.clone() + d.square() * g0.pp.clone(),
        }
    }
}

/// Orbit and factored tangent propagation for the kicked top.
#[derive(Debug, Clone)]
pub struct KickedTopTangent<R> {
    map: KickedTopMap<R>,
    point: BlochAngles<R>,
    tangent: FactoredTangent<R>,
    kicks: usize,
}

impl<R: Real> KickedTopTangent<R> {
    pub fn new(params: &KickedTopParams, start: BlochAngles<R>) -> Self {
        let map = KickedTopMap::new(params, &start.theta);
        let tangent = FactoredTangent::identity(&start.theta);
        KickedTopTangent { map, point: start, tangent, kicks: 0 }
    }

    pub fn point(&self) -> &BlochAngles<R> {
        &self.point
    }

    pub fn tangent(&self) -> &FactoredTangent<R> {
        &self.tangent
    }

    pub fn kicks(&self) -> usize {
        self.kicks
    }

    /// Advances one period and returns the one-period tangent matrix.
    pub fn kick(&mut self) -> Result<Mat2<R>> {
        let (mid, fin) = self.map.step(&self.point)?;
        let m = kicked_top_tangent_step(&self.point, &mid, self.map.beta())?;
        self.tangent.push(&m);
        self.point = fin;
        self.kicks += 1;
        Ok(m)
    }
}
