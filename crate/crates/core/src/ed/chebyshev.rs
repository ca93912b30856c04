//! Chebyshev expansion of `exp(−iHt)` applied to a vector.

use num_complex::Complex64;

use super::spin::CVector;

/// `J_0(x) … J_{kmax}(x)` by Miller's backward recurrence, normalised with
/// `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = kmax.max(x.abs().ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let mut j_next = 0.0;
    let mut j = 1e-300;
    let mut seq = vec![0.0; start + 1];
    seq[start] = j;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j - j_next;
        j_next = j;
        j = j_prev;
        seq[k - 1] = j;
        if j.abs() > 1e250 {
            for v in seq[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
            j *= 1e-250;
            j_next *= 1e-250;
        }
    }
    let norm = seq[0] + 2.0 * seq.iter().skip(2).step_by(2).sum::<f64>();
    for (o, s) in out.iter_mut().zip(&seq) {
        *o = s / norm;
    }
    out
}

/// Spectral interval `[e_min, e_max]` of a Hermitian operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub e_min: f64,
    pub e_max: f64,
}

/// Applies `exp(−iHt)` to `psi` where `apply` computes `H·v` and `bounds`
/// enclose the spectrum. Terms are added until the Bessel weights fall
/// below `1e-16`.
pub fn chebyshev_evolve<F>(apply: &F, bounds: SpectralBounds, psi: &CVector, t: f64) -> CVector
where
    F: Fn(&CVector) -> CVector,
{
    let half = 0.5 * (bounds.e_max - bounds.e_min);
    let center = 0.5 * (bounds.e_max + bounds.e_min);
    let x = half * t;
    let kmax = (x.abs() * 1.2 + 40.0 + 10.0 * x.abs().powf(1.0 / 3.0)) as usize;
    let bessel = bessel_j_sequence(x, kmax);
    let scaled = |v: &CVector| -> CVector {
        let mut hv = apply(v);
        hv.axpy(Complex64::from(-center / half), v, Complex64::from(1.0 / half));
        hv
    };
    let mut phase = Complex64::new(1.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut t_prev = psi.clone();
    let mut t_cur = scaled(psi);
    let mut acc = psi * Complex64::from(bessel[0]);
    phase *= minus_i;
    acc.axpy(phase * 2.0 * bessel[1], &t_cur, Complex64::from(1.0));
    for (k, &jk) in bessel.iter().enumerate().skip(2) {
        let mut t_next = scaled(&t_cur) * Complex64::from(2.0);
        t_next -= &t_prev;
        phase *= minus_i;
        acc.axpy(phase * 2.0 * jk, &t_next, Complex64::from(1.0));
        t_prev = t_cur;
        t_cur = t_next;
        if k as f64 > x.abs() && jk.abs() < 1e-16 {
            break;
        }
    }
    acc * Complex64::from_polar(1.0, -center * t)
}
