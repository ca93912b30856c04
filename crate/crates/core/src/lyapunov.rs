//! Finite-time Lyapunov spectra by repeated Gram–Schmidt renormalisation of
//! an evolved tangent basis, and the Kolmogorov–Sinai rate.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluctuations::{DickeTangent, KickedTopTangent, PhasePoint, TangentSystem};
use crate::par::{self, Exec};

/// Residual norms below this are treated as loss of rank.
pub const RANK_THRESHOLD: f64 = 1e-250;

/// Exponents counted as positive must also exceed this floor.
pub const KS_FLOOR: f64 = 1e-3;

/// Running exponents `λ_k^{(r)}` at accumulated times `r = n·s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSeries {
    pub r_values: Vec<f64>,
    pub exponents: Vec<Vec<f64>>,
    pub k: usize,
    pub s: f64,
    /// Times at which a collapsed tangent vector was replaced.
    pub reseeds: Vec<f64>,
}

impl LyapunovSeries {
    pub fn len(&self) -> usize {
        self.r_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_values.is_empty()
    }

    /// Time series of one exponent.
    pub fn exponent(&self, k: usize) -> Vec<f64> {
        self.exponents.iter().map(|row| row[k]).collect()
    }

    /// Last recorded spectrum.
    pub fn last(&self) -> Option<&[f64]> {
        self.exponents.last().map(|v| v.as_slice())
    }

    /// `λ₁` at the sample closest to time `r`.
    pub fn leading_at(&self, r: f64) -> Option<f64> {
        let idx = self.r_values.partition_point(|&x| x < r);
        let idx = match idx {
            0 => 0,
            i if i >= self.len() => self.len().checked_sub(1)?,
            i if (self.r_values[i] - r).abs() < (r - self.r_values[i - 1]).abs() => i,
            i => i - 1,
        };
        self.exponents.get(idx).map(|row| row[0])
    }
}

/// Mean exponents and their spread over the last two decades of `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub lambda: Vec<f64>,
    pub uncertainty: Vec<f64>,
}

/// Classical Gram–Schmidt. Returns the orthonormal set and the residual
/// norms before normalisation.
pub fn gram_schmidt(vectors: &[DVector<f64>]) -> Result<(Vec<DVector<f64>>, Vec<f64>)> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    let mut norms = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for e in &out {
            w -= e * e.dot(v);
        }
        let a = w.norm();
        if !(a > RANK_THRESHOLD) || !a.is_finite() {
            return Err(Error::RankDeficient { norm: a });
        }
        out.push(w / a);
        norms.push(a);
    }
    Ok((out, norms))
}

/// Gram–Schmidt that replaces any collapsed vector by a fresh random one.
/// Returns the index of each replaced vector alongside the usual output.
fn gram_schmidt_reseeding(
    vectors: &mut [DVector<f64>],
    rng: &mut ChaCha20Rng,
) -> (Vec<f64>, Vec<usize>) {
    let dim = vectors.first().map_or(0, |v| v.len());
    let mut norms = vec![0.0; vectors.len()];
    let mut replaced = Vec::new();
    for i in 0..vectors.len() {
        loop {
            let mut w = vectors[i].clone();
            for j in 0..i {
                let e = vectors[j].clone();
                w -= &e * e.dot(&vectors[i]);
            }
            let a = w.norm();
            if a > RANK_THRESHOLD && a.is_finite() {
                vectors[i] = w / a;
                norms[i] = a;
                break;
            }
            replaced.push(i);
            vectors[i] = random_vector(dim, rng);
        }
    }
    (norms, replaced)
}

fn random_vector(dim: usize, rng: &mut ChaCha20Rng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..=1.0))
}

/// Seeded random orthonormal tangent basis of `k` vectors in dimension `dim`.
pub fn random_frame(dim: usize, k: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut vs: Vec<DVector<f64>> = (0..k).map(|_| random_vector(dim, &mut rng)).collect();
    gram_schmidt_reseeding(&mut vs, &mut rng);
    vs
}

/// Advances the base trajectory by one renormalisation interval and returns
/// the tangent propagator over it.
enum Stepper {
    Kicked { inner: KickedTopTangent<f64>, kicks: usize },
    Dicke { inner: Box<DickeTangent>, s: f64 },
}

impl Stepper {
    fn new(system: &TangentSystem, x0: &PhasePoint, s: f64, tol: f64) -> Result<Self> {
        match (system, x0) {
            (TangentSystem::KickedTop(p), PhasePoint::Spin(a)) => {
                p.validate()?;
                let kicks = (s / p.tau).round();
                if kicks < 1.0 || ((s / p.tau) - kicks).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "renormalisation interval {s} is not a whole number of kicks"
                    )));
                }
                Ok(Stepper::Kicked { inner: KickedTopTangent::new(p, a.clone()), kicks: kicks as usize })
            }
            (TangentSystem::Dicke(p), PhasePoint::Dicke(x)) => {
                if !(s > 0.0) {
                    return Err(Error::InvalidParameter("renormalisation interval must be positive".into()));
                }
                Ok(Stepper::Dicke { inner: Box::new(DickeTangent::new(x, p, tol)?), s })
            }
            _ => Err(Error::Dimension("initial state does not belong to the model".into())),
        }
    }

    fn interval(&mut self, n: usize) -> Result<DMatrix<f64>> {
        match self {
            Stepper::Kicked { inner, kicks } => {
                let mut u = [[1.0, 0.0], [0.0, 1.0]];
                for _ in 0..*kicks {
                    let m = inner.kick()?;
                    u = [
                        [m.a * u[0][0] + m.b * u[1][0], m.a * u[0][1] + m.b * u[1][1]],
                        [m.c * u[0][0] + m.d * u[1][0], m.c * u[0][1] + m.d * u[1][1]],
                    ];
                }
                Ok(DMatrix::from_row_slice(2, 2, &[u[0][0], u[0][1], u[1][0], u[1][1]]))
            }
            Stepper::Dicke { inner, s } => inner.advance(n as f64 * *s),
        }
    }
}

/// Integration tolerance used for Dicke spectra.
pub const DICKE_TOL: f64 = 1e-12;

/// Runs `n_steps` renormalisation intervals of length `s` with `k` tangent
/// vectors drawn from `seed`.
pub fn benettin_spectrum(
    system: &TangentSystem,
    x0: &PhasePoint,
    k: usize,
    s: f64,
    n_steps: usize,
    seed: u64,
) -> Result<LyapunovSeries> {
    let dim = 2 * system.modes();
    if k == 0 || k > dim {
        return Err(Error::InvalidParameter(format!("need 1 <= K <= {dim}, got {k}")));
    }
    let mut stepper = Stepper::new(system, x0, s, DICKE_TOL)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut vectors: Vec<DVector<f64>> = (0..k).map(|_| random_vector(dim, &mut rng)).collect();
    gram_schmidt_reseeding(&mut vectors, &mut rng);

    let mut sums = vec![0.0; k];
    let mut series =
        LyapunovSeries { r_values: Vec::with_capacity(n_steps), exponents: Vec::with_capacity(n_steps), k, s, reseeds: vec![] };
    for n in 1..=n_steps {
        let u = stepper.interval(n)?;
        for v in vectors.iter_mut() {
            *v = &u * &*v;
        }
        let (norms, replaced) = gram_schmidt_reseeding(&mut vectors, &mut rng);
        let r = n as f64 * s;
        for (i, a) in norms.iter().enumerate() {
            if !replaced.contains(&i) {
                sums[i] += a.ln();
            }
        }
        if !replaced.is_empty() {
            series.reseeds.push(r);
        }
        let mut row: Vec<f64> = sums.iter().map(|x| x / r).collect();
        row.sort_by(|a, b| b.total_cmp(a));
        series.r_values.push(r);
        series.exponents.push(row);
    }
    Ok(series)
}

/// Averages each exponent over the last two decades of `r`; the series must
/// span at least three decades.
pub fn lyapunov_estimate(series: &LyapunovSeries) -> Result<LyapunovEstimate> {
    let (Some(&r0), Some(&r1)) = (series.r_values.first(), series.r_values.last()) else {
        return Err(Error::InsufficientSpan { decades: 0.0, required: 3.0 });
    };
    let decades = (r1 / r0).log10();
    if !(decades >= 3.0 - 1e-12) {
        return Err(Error::InsufficientSpan { decades, required: 3.0 });
    }
    let start = series.r_values.partition_point(|&r| r < r1 / 100.0);
    let rows = &series.exponents[start..];
    let n = rows.len() as f64;
    let mut lambda = vec![0.0; series.k];
    let mut uncertainty = vec![0.0; series.k];
    for i in 0..series.k {
        let mean = rows.iter().map(|row| row[i]).sum::<f64>() / n;
        let var = rows.iter().map(|row| (row[i] - mean).powi(2)).sum::<f64>() / n;
        lambda[i] = mean;
        uncertainty[i] = var.sqrt();
    }
    Ok(LyapunovEstimate { lambda, uncertainty })
}

/// Sum of exponents exceeding `max(uncertainty, KS_FLOOR)`. A missing
/// uncertainty counts as zero.
pub fn ks_rate(lambda: &[f64], uncertainty: &[f64]) -> f64 {
    lambda
        .iter()
        .enumerate()
        .filter(|(i, &l)| l > uncertainty.get(*i).copied().unwrap_or(0.0).max(KS_FLOOR))
        .map(|(_, &l)| l)
        .sum()
}

/// Spectra for many initial points, one independent run each.
pub fn benettin_sweep(
    system: &TangentSystem,
    points: &[PhasePoint],
    k: usize,
    s: f64,
    n_steps: usize,
    seed: u64,
    exec: Exec,
) -> Vec<Result<LyapunovSeries>> {
    par::map(exec, points, |x0| benettin_spectrum(system, x0, k, s, n_steps, seed))
}
