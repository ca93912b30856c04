//! Acceptance run: one PASS/RED line per criterion.
//!
//! Criteria whose red result is understood and written up in the README are
//! listed in `KNOWN_RED`; any other red line fails the target.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use entchaos::classical::{
    dicke_point_from_energy, integrate_dicke, kicked_top_step, DickeParams, DickeState, KickedTopParams,
};
use entchaos::compare::{max_deviation, time_average};
use entchaos::ed::spin::CVector;
use entchaos::ed::{
    dicke_initial_state, evolve_and_entropy_dicke, kicked_top_ed_series, page_entropy, spin_entanglement, Basis,
    DickeOperator, KickedTopEdOptions, QuantumState,
};
use entchaos::fluctuations::{jacobian_fd_periodic, kicked_top_tangent_step, DickeTangent, PhasePoint, TangentSystem};
use entchaos::lyapunov::{benettin_spectrum, lyapunov_estimate, LyapunovEstimate};
use entchaos::par::Exec;
use entchaos::phase_space::{symplectic_eigenvalues, BlochAngles, CorrelationMatrix};
use entchaos::precision::PrecisionConfig;
use entchaos::quantifiers::regime::{
    ehrenfest_time, envelope, exponential_rate, linear_slope, logarithmic_coefficient, power_law_exponent, window,
    Regime,
};
use entchaos::quantifiers::{vn_entropy, vn_entropy_from_det};
use entchaos::semiclassical::{dicke_semiclassical, kicked_top_semiclassical, DickeRunOptions, SpinRunOptions};

const KNOWN_RED: &[u32] = &[1, 3, 4, 5];

const LAMBDA_KT: f64 = 1.12;
const LAMBDA_DICKE: f64 = 0.7;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, detail: String::new() }
    }

    fn check(&mut self, ok: bool, text: impl AsRef<str>) {
        self.pass &= ok;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(text.as_ref());
        if !ok {
            self.detail.push_str(" [x]");
        }
    }

    fn note(&mut self, text: impl AsRef<str>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(text.as_ref());
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn rel(x: f64, target: f64) -> f64 {
    (x - target).abs() / target.abs()
}

fn dicke_start(energy: f64, gamma: f64, phi: f64) -> (DickeParams, DickeState) {
    let p = DickeParams::resonant(gamma);
    let a = BlochAngles::from_cos_theta(0.1, phi).unwrap();
    let x0 = dicke_point_from_energy(energy, &a, &p).unwrap().state;
    (p, x0)
}

fn kt_exponent(beta: f64, theta: f64, phi: f64, s: f64, steps: usize) -> LyapunovEstimate {
    let sys = TangentSystem::KickedTop(KickedTopParams::new(FRAC_PI_2, beta));
    let x0 = PhasePoint::Spin(BlochAngles::new(theta, phi).unwrap());
    lyapunov_estimate(&benettin_spectrum(&sys, &x0, 2, s, steps, 11).unwrap()).unwrap()
}

/// Two nearby Cartesian orbits renormalised every kick; shares no code with
/// the tangent map.
fn kt_exponent_cartesian(beta: f64, theta: f64, phi: f64, kicks: usize) -> f64 {
    let step = |v: [f64; 3]| {
        let r = [v[0], -v[2], v[1]];
        let (s, c) = (beta * r[2]).sin_cos();
        [c * r[0] - s * r[1], s * r[0] + c * r[1], r[2]]
    };
    let d0 = 1e-8;
    let mut x = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let mut y = [x[0], x[1] + d0, x[2]];
    let mut sum = 0.0;
    for _ in 0..kicks {
        x = step(x);
        y = step(y);
        let d = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        sum += (norm / d0).ln();
        for i in 0..3 {
            y[i] = x[i] + d[i] * d0 / norm;
        }
    }
    sum / kicks as f64
}

fn lyapunov_reproduction() -> Outcome {
    let mut o = Outcome::new();
    let e = kt_exponent(8.0, FRAC_PI_4, 0.0, 1.0, 10_000);
    o.check(
        within(e.lambda[0], 1.12, 0.06),
        format!("KT β=8 λ₁={:.4}±{:.4} (independent orbit pair {:.4})", e.lambda[0], e.uncertainty[0], kt_exponent_cartesian(8.0, FRAC_PI_4, 0.0, 100_000)),
    );
    let e = kt_exponent(2.3, FRAC_PI_4, 2.7, 5.0, 20_000);
    o.check(within(e.lambda[0], 0.08, 0.02), format!("KT β=2.3 (π/4, 2.7) λ₁={:.4}±{:.4}", e.lambda[0], e.uncertainty[0]));
    let alt = kt_exponent(2.3, FRAC_PI_2, 2.7, 5.0, 20_000);
    let alt2 = kt_exponent(2.3, FRAC_PI_4, 0.0, 4.0, 25_000);
    o.note(format!("(π/2, 2.7) λ₁={:.4}, (π/4, 0) λ₁={:.4}", alt.lambda[0], alt2.lambda[0]));
    let e = kt_exponent(0.5, FRAC_PI_4, 0.0, 1.0, 100_000);
    o.check(e.lambda[0].abs() < 0.01, format!("KT β=0.5 λ₁={:.2e}", e.lambda[0]));

    for (energy, gamma, target, tol) in [(1.5, 5.0, 0.7, 0.07), (1.5, 0.85, 0.03, 0.01)] {
        let (p, x0) = dicke_start(energy, gamma, 1.4);
        let series =
            benettin_spectrum(&TangentSystem::Dicke(p), &PhasePoint::Dicke(x0), 2, 0.5, 20_000, 11).unwrap();
        let e = lyapunov_estimate(&series).unwrap();
        let l2_ok = e.lambda[1].abs() <= (2.0 * e.uncertainty[1]).max(0.01);
        o.check(
            within(e.lambda[0], target, tol) && l2_ok,
            format!("Dicke E={energy} γ={gamma} λ₁={:.4} λ₂={:.4}±{:.4}", e.lambda[0], e.lambda[1], e.uncertainty[1]),
        );
    }
    o
}

struct Fits {
    s_slope: f64,
    s_log: f64,
    s_log_r2: f64,
    fq_rate: f64,
    c_rate: f64,
    fq_power: f64,
    c_power: f64,
}

fn fits(t: &[f64], s: &[f64], f: &[f64], c: &[f64], a: f64, b: f64) -> Fits {
    let r = window(t, a, b);
    let (tt, ss, ff, cc) = (&t[r.clone()], &s[r.clone()], &f[r.clone()], &c[r]);
    let log = logarithmic_coefficient(tt, ss, a, b).unwrap();
    Fits {
        s_slope: linear_slope(tt, ss, a, b).unwrap().slope,
        s_log: log.slope,
        s_log_r2: log.r2,
        fq_rate: exponential_rate(tt, ff, a, b).unwrap().slope,
        c_rate: exponential_rate(tt, &envelope(cc), a, b).unwrap().slope,
        fq_power: power_law_exponent(tt, &envelope(ff), a, b).unwrap().slope,
        c_power: power_law_exponent(tt, &envelope(cc), a, b).unwrap().slope,
    }
}

fn check_chaotic(o: &mut Outcome, name: &str, f: &Fits, lambda_ft: f64) {
    o.check(
        rel(f.s_slope, lambda_ft) <= 0.2 && rel(f.fq_rate, 2.0 * lambda_ft) <= 0.2 && rel(f.c_rate, 2.0 * lambda_ft) <= 0.2,
        format!(
            "{name}: S slope {:.3}, f_Q rate {:.3}, c rate {:.3} vs λ₁(t)={lambda_ft:.3}",
            f.s_slope, f.fq_rate, f.c_rate
        ),
    );
}

fn check_regular(o: &mut Outcome, name: &str, f: &Fits) {
    let integer = f.s_log.round();
    o.check(
        within(f.fq_power, 2.0, 0.2) && within(f.c_power, 2.0, 0.2) && integer >= 1.0 && within(f.s_log, integer, 0.3),
        format!(
            "{name}: f_Q power {:.3}, c power {:.3}, S = {:.3}·ln t (r²={:.3})",
            f.fq_power, f.c_power, f.s_log, f.s_log_r2
        ),
    );
}

fn regime_classification() -> Outcome {
    let mut o = Outcome::new();
    let start = BlochAngles { theta: FRAC_PI_4, phi: 0.0 };

    let (a, b) = (5.0 / LAMBDA_KT, 30.0 / LAMBDA_KT);
    let opts = SpinRunOptions { precision: PrecisionConfig::extended(100), ..Default::default() };
    let r = kicked_top_semiclassical(&KickedTopParams::new(FRAC_PI_2, 8.0), &start, b.ceil() as usize, &opts).unwrap();
    let s = &r.series;
    let end = window(&s.times, a, b).end - 1;
    let f = fits(&s.times, &s.s_a, &s.f_q, &s.c_ab, a, b);
    check_chaotic(&mut o, "KT β=8", &f, r.log_stretch[end] / s.times[end]);

    let (p, x0) = dicke_start(1.5, 5.0, 1.4);
    let (a, b) = (5.0 / LAMBDA_DICKE, 30.0 / LAMBDA_DICKE);
    let r = dicke_semiclassical(&p, &x0, b, &DickeRunOptions::default()).unwrap();
    let s = &r.series;
    let end = window(&s.times, a, b).end - 1;
    let f = fits(&s.times, &s.s_a, &s.f_q, &s.c_ab, a, b);
    check_chaotic(&mut o, "Dicke γ=5", &f, r.log_stretch[end] / s.times[end]);

    let r = kicked_top_semiclassical(&KickedTopParams::new(FRAC_PI_2, 0.5), &start, 10_000, &SpinRunOptions::default())
        .unwrap();
    let s = &r.series;
    check_regular(&mut o, "KT β=0.5", &fits(&s.times, &s.s_a, &s.f_q, &s.c_ab, 10.0, 10_000.0));

    let (p, x0) = dicke_start(3.0, 0.85, 1.4);
    let r = dicke_semiclassical(&p, &x0, 5000.0, &DickeRunOptions { sample_dt: 0.5, ..Default::default() }).unwrap();
    let s = &r.series;
    check_regular(&mut o, "Dicke E=3 γ=0.85", &fits(&s.times, &s.s_a, &s.f_q, &s.c_ab, 10.0, 5000.0));
    o
}

fn is_non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn kicked_top_convergence() -> Outcome {
    let mut o = Outcome::new();
    let ns = [50usize, 200, 800];
    let kicks = 30;
    let start = BlochAngles { theta: FRAC_PI_4, phi: 0.0 };
    for (beta, regime) in [(8.0, Regime::Chaotic), (0.5, Regime::Regular)] {
        let p = KickedTopParams::new(FRAC_PI_2, beta);
        let sc = kicked_top_semiclassical(&p, &start, kicks, &SpinRunOptions::default()).unwrap().series;
        let mut devs = [vec![], vec![], vec![]];
        let mut near = (0.0, 0.0, 0.0);
        let mut common = vec![];
        let mut first_kick = vec![];
        let t_common = 0.8 * ehrenfest_time(regime, ns[2], LAMBDA_KT);
        let t0 = Instant::now();
        for &n in &ns {
            let opts = KickedTopEdOptions { n_a: n / 2, commutator_kicks: kicks, exec: Exec::default() };
            let ed = kicked_top_ed_series(n, &p, FRAC_PI_4, 0.0, kicks, &opts).unwrap();
            let spin = n as f64 / 2.0;
            let c: Vec<f64> = ed.c_ab.iter().map(|c| c * spin * spin).collect();
            let t_end = 0.8 * ehrenfest_time(regime, n, LAMBDA_KT);
            devs[0].push(max_deviation(&ed.times, &ed.s_a, &sc.s_a, t_end).unwrap());
            devs[1].push(max_deviation(&ed.times, &ed.f_q, &sc.f_q, t_end).unwrap());
            devs[2].push(max_deviation(&ed.times, &c, &sc.c_ab, t_end).unwrap());
            common.push(max_deviation(&ed.times, &ed.f_q, &sc.f_q, t_common).unwrap());
            first_kick.push(ed.f_q[1]);
            if n == 800 && regime == Regime::Chaotic {
                let t_agree = (n as f64).ln() / (2.0 * LAMBDA_KT);
                near = (
                    max_deviation(&ed.times, &ed.s_a, &sc.s_a, t_agree).unwrap(),
                    max_deviation(&ed.times, &ed.f_q, &sc.f_q, t_agree).unwrap(),
                    max_deviation(&ed.times, &c, &sc.c_ab, t_agree).unwrap(),
                );
            }
        }
        let mut line = String::new();
        for (name, d) in ["S", "f_Q", "c"].iter().zip(&devs) {
            let _ = write!(line, "{name} {:.4}/{:.4}/{:.4} ", d[0], d[1], d[2]);
        }
        o.check(devs.iter().all(|d| is_non_increasing(d)), format!("β={beta} deviations N=50/200/800: {}", line.trim_end()));
        if regime == Regime::Chaotic {
            o.check(
                near.0 <= 0.1 && near.1 <= 0.1 && near.2 <= 0.1,
                format!("N=800 up to ln N/2λ₁: S {:.3}, f_Q {:.3}, c {:.3}", near.0, near.1, near.2),
            );
        }
        o.note(format!(
            "β={beta} f_Q deviation on common [0, {t_common:.2}]: {:.3}/{:.3}/{:.3}; f_Q after one kick ED {:.1}/{:.1}/{:.1} vs {:.1}; ED {:.1?}",
            common[0], common[1], common[2], first_kick[0], first_kick[1], first_kick[2], sc.f_q[1], t0.elapsed()
        ));
    }
    o
}

fn dicke_convergence() -> Outcome {
    let mut o = Outcome::new();
    for (energy, gamma, regime, t_final) in [(3.0, 0.85, Regime::Regular, 7.0), (1.5, 5.0, Regime::Chaotic, 3.0)] {
        let (p, x0) = dicke_start(energy, gamma, 1.4);
        let sc = dicke_semiclassical(&p, &x0, t_final, &DickeRunOptions::default()).unwrap().series;
        let mut devs = vec![];
        let mut tails = vec![];
        let mut elapsed = 0.0;
        for n in [10usize, 20, 40] {
            let t0 = Instant::now();
            let n_cut = 8 * n;
            let st = dicke_initial_state(x0.angles.theta, x0.angles.phi, x0.q, x0.p, n, n_cut).unwrap();
            let op = DickeOperator::new(n, n_cut, &p).unwrap();
            let ed = evolve_and_entropy_dicke(&st, &op, &sc.times).unwrap();
            let t_end = ehrenfest_time(regime, n, LAMBDA_DICKE);
            devs.push(max_deviation(&ed.times, &ed.s_a, &sc.s_a, t_end).unwrap());
            let w = window(&ed.times, 0.0, t_end);
            tails.push(ed.cutoff_population[w].iter().copied().fold(0.0, f64::max));
            elapsed = t0.elapsed().as_secs_f64();
        }
        o.check(
            devs.iter().all(|&d| d <= 0.15),
            format!(
                "E={energy} γ={gamma} Δ=8 S deviation N=10/20/40: {:.3}/{:.3}/{:.3} (cutoff tail {:.1e}/{:.1e}/{:.1e})",
                devs[0], devs[1], devs[2], tails[0], tails[1], tails[2]
            ),
        );
        o.check(elapsed < 1800.0, format!("N=40 {elapsed:.1} s"));
        if regime == Regime::Chaotic {
            // Doubling the cutoff beyond Δ=8 separates truncation error from
            // the finite-N deviation.
            let n = 20;
            let t_end = ehrenfest_time(regime, n, LAMBDA_DICKE);
            let mut s_by_cut = vec![];
            for n_cut in [8 * n, 16 * n] {
                let st = dicke_initial_state(x0.angles.theta, x0.angles.phi, x0.q, x0.p, n, n_cut).unwrap();
                let op = DickeOperator::new(n, n_cut, &p).unwrap();
                s_by_cut.push(evolve_and_entropy_dicke(&st, &op, &sc.times).unwrap().s_a);
            }
            let w = window(&sc.times, 0.0, t_end);
            let cut_gap = w.clone().map(|i| (s_by_cut[0][i] - s_by_cut[1][i]).abs()).fold(0.0, f64::max);
            let d16 = max_deviation(&sc.times, &s_by_cut[1], &sc.s_a, t_end).unwrap();
            let dev = deviation_peak(&sc.times, &s_by_cut[1], &sc.s_a, t_end);
            o.note(format!(
                "N=20 Δ=16: deviation {d16:.3} peaking at t={:.1} (S_ED {:.3} vs {:.3}, spin bound ln(N+1)={:.3}), max |S(Δ=8) − S(Δ=16)| {cut_gap:.1e}",
                dev.0, dev.1, dev.2, ((n + 1) as f64).ln()
            ));
        }
    }
    o
}

/// Time and values where the scale-relative deviation peaks.
fn deviation_peak(t: &[f64], ed: &[f64], sc: &[f64], t_end: f64) -> (f64, f64, f64) {
    let dev = entchaos::compare::scale_relative_deviation(ed, sc).unwrap();
    let i = (0..t.len()).filter(|&i| t[i] <= t_end).max_by(|&a, &b| dev[a].total_cmp(&dev[b])).unwrap();
    (t[i], ed[i], sc[i])
}

fn saturation() -> Outcome {
    let mut o = Outcome::new();
    let n = 50;
    let opts = KickedTopEdOptions { n_a: n / 2, commutator_kicks: 0, exec: Exec::default() };
    let ed = kicked_top_ed_series(n, &KickedTopParams::new(FRAC_PI_2, 8.0), FRAC_PI_4, 0.0, 2000, &opts).unwrap();
    let fq = time_average(&ed.times, &ed.f_q, 100.0, 2000.0).unwrap();
    let target = 1.0 + n as f64 / 3.0;
    o.check(rel(fq, target) <= 0.15, format!("f_Q∞ {fq:.3} vs {target:.3} ({:+.1}%)", 100.0 * (fq / target - 1.0)));
    let s = time_average(&ed.times, &ed.s_a, 100.0, 2000.0).unwrap();
    let page = page_entropy(n / 2 + 1, n - n / 2 + 1);
    o.check(rel(s, page) <= 0.1, format!("S_A∞ {s:.4} vs Page {page:.4} ({:+.1}%)", 100.0 * (s / page - 1.0)));
    o
}

fn rotation_oracle(theta: f64, phi: f64, beta: f64) -> (f64, f64) {
    let v = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let r = [v[0], -v[2], v[1]];
    let (s, c) = (beta * r[2]).sin_cos();
    let f = [c * r[0] - s * r[1], s * r[0] + c * r[1], r[2]];
    (f[2].acos(), f[1].atan2(f[0]).rem_euclid(2.0 * PI))
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Tangent closed form against a finite-difference Jacobian in
/// `(φ, cosθ)`, converted to `(δθ, sinθ δφ)`.
fn kicked_top_tangent_error(theta: f64, phi: f64, beta: f64) -> f64 {
    let p = KickedTopParams::new(FRAC_PI_2, beta);
    let chart = |th: f64| DMatrix::from_row_slice(2, 2, &[0.0, -1.0 / th.sin(), th.sin(), 0.0]);
    let map = |x: &[f64]| {
        let (_, f) = kicked_top_step(&BlochAngles { theta: x[1].acos(), phi: x[0] }, &p).unwrap();
        vec![f.phi, f.theta.cos()]
    };
    let a = BlochAngles { theta, phi };
    let (mid, end) = kicked_top_step(&a, &p).unwrap();
    let fd = chart(end.theta) * jacobian_fd_periodic(map, &[phi, theta.cos()], 1e-6, &[true, false])
        * chart(theta).try_inverse().unwrap();
    let m = kicked_top_tangent_step(&a, &mid, &beta).unwrap().to_f64();
    let cf = DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]);
    (fd - &cf).amax() / cf.amax().max(1.0)
}

fn conservation() -> Outcome {
    let mut o = Outcome::new();
    let start = BlochAngles { theta: FRAC_PI_4, phi: 0.0 };
    let p8 = KickedTopParams::new(FRAC_PI_2, 8.0);

    let r = kicked_top_semiclassical(&p8, &start, 30, &SpinRunOptions::default()).unwrap();
    let d = r.purity_deviation.iter().map(|d| d.abs()).fold(0.0, f64::max);
    o.check(d < 1e-8, format!("det(2G)−1 machine 30 kicks {d:.1e}"));
    let fx = r.series.f_q.iter().zip(&r.series.xi2).map(|(f, x)| (f * x - 1.0).abs()).fold(0.0, f64::max);
    o.check(fx < 1e-12, format!("|f_Q·ξ²−1| {fx:.1e}"));

    let opts = SpinRunOptions { precision: PrecisionConfig::extended(400), ..Default::default() };
    let r = kicked_top_semiclassical(&p8, &start, 200, &opts).unwrap();
    let d = r.purity_deviation.iter().map(|d| d.abs()).fold(0.0, f64::max);
    o.check(d < 1e-100, format!("det(2G)−1 400 digits 200 kicks {d:.1e}"));

    let (p, x0) = dicke_start(1.5, 5.0, 1.4);
    let run = dicke_semiclassical(&p, &x0, 30.0, &DickeRunOptions::default()).unwrap();
    let res = run.symplectic_residual.iter().copied().fold(0.0, f64::max);
    o.check(res < 1e-8, format!("Dicke UᵀJU−J residual {res:.1e}"));

    let t_final = 100.0;
    let tr = integrate_dicke(&x0, &p, t_final, 1e-12, 0.5).unwrap();
    let e = tr.energy.as_ref().unwrap();
    let drift = e.iter().map(|v| (v - e[0]).abs()).fold(0.0, f64::max) / t_final;
    o.check(drift < 1e-10, format!("Dicke energy drift {drift:.1e} per unit time"));

    let e = kt_exponent(8.0, FRAC_PI_4, 0.3, 1.0, 2000);
    let sum = e.lambda[0] + e.lambda[1];
    o.check(sum.abs() <= 2.0 * e.uncertainty[0].max(1e-12), format!("KT λ₁+λ₂ {sum:.1e}"));

    let mut map_err: f64 = 0.0;
    let mut tangent_err: f64 = 0.0;
    for k in 0..200 {
        let theta = 0.1 + 2.9 * ((k as f64 * 0.618_034) % 1.0);
        let phi = 2.0 * PI * ((k as f64 * 0.414_214) % 1.0);
        let beta = [0.5, 2.3, 8.0][k % 3];
        let (_, f) = kicked_top_step(&BlochAngles { theta, phi }, &KickedTopParams::new(FRAC_PI_2, beta)).unwrap();
        let (th, ph) = rotation_oracle(theta, phi, beta);
        map_err = map_err.max((f.theta - th).abs()).max(angle_gap(f.phi, ph));
        if k % 10 == 0 {
            tangent_err = tangent_err.max(kicked_top_tangent_error(theta, phi, beta));
        }
    }
    o.check(map_err < 1e-12, format!("KT map vs rotation {map_err:.1e}"));
    o.check(tangent_err < 1e-7, format!("KT tangent vs finite differences {tangent_err:.1e}"));

    let mut tangent = DickeTangent::new(&x0, &p, 1e-13).unwrap();
    let u = tangent.advance(0.7).unwrap();
    let x1 = tangent.state();
    let dicke_err = dicke_fd_error(&p, &x0, &x1, &u, 0.7);
    o.check(dicke_err < 1e-6, format!("Dicke propagator vs finite differences {dicke_err:.1e}"));
    o
}

/// `(φ, s cosθ)` chart of the spin with `s = ½`.
fn dicke_fd_error(p: &DickeParams, x0: &DickeState, x1: &DickeState, u: &DMatrix<f64>, t: f64) -> f64 {
    let s = 0.5f64;
    let chart = |th: f64| {
        let mut m = DMatrix::identity(4, 4);
        m[(2, 2)] = 0.0;
        m[(2, 3)] = -1.0 / (s.sqrt() * th.sin());
        m[(3, 2)] = s.sqrt() * th.sin();
        m[(3, 3)] = 0.0;
        m
    };
    let canonical = |x: &DickeState| vec![x.q, x.p, x.angles.phi, s * x.angles.theta.cos()];
    let flow = |y: &[f64]| {
        let x = DickeState::new(y[0], y[1], BlochAngles { theta: (y[3] / s).acos(), phi: y[2] });
        canonical(integrate_dicke(&x, p, t, 1e-13, t).unwrap().last().unwrap())
    };
    let j = jacobian_fd_periodic(flow, &canonical(x0), 1e-6, &[false, false, true, false]);
    let oracle = chart(x1.angles.theta) * j * chart(x0.angles.theta).try_inverse().unwrap();
    (u - &oracle).amax() / oracle.amax()
}

fn gaussian_cross_checks() -> Outcome {
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    let mut seed: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut uniform = || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..10_000 {
        let nu = 1.0 + 20.0 * uniform().powi(3);
        let r = 3.0 * (uniform() - 0.5);
        let a = PI * uniform();
        let (s, c) = a.sin_cos();
        let (e1, e2) = (0.5 * nu * r.exp(), 0.5 * nu * (-r).exp());
        let g = CorrelationMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[c * c * e1 + s * s * e2, c * s * (e1 - e2), c * s * (e1 - e2), s * s * e1 + c * c * e2],
        ))
        .unwrap();
        let via_det = vn_entropy_from_det(g.determinant()).unwrap();
        let via_sym = vn_entropy(&g).unwrap();
        worst = worst.max((via_det - via_sym).abs());
    }
    o.check(worst < 1e-12, format!("10⁴ random modes, max |Δ S| {worst:.1e}"));
    let nu = symplectic_eigenvalues(&CorrelationMatrix::single_mode(0.5, 0.0, 0.5)).unwrap()[0];
    o.check(within(nu, 1.0, 1e-15), format!("vacuum ν={nu}"));

    let mut amp = CVector::zeros(3);
    amp[1] = Complex64::new(1.0, 0.0);
    let triplet = QuantumState::new(amp, Basis::Spin { n: 2 }).unwrap();
    let (s, _) = spin_entanglement(&triplet, 1).unwrap();
    o.check(within(s, 2f64.ln(), 1e-14), format!("triplet S={s:.16} vs ln 2"));
    o
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 7] = [
        (1, "Lyapunov reproduction", lyapunov_reproduction),
        (2, "regime classification", regime_classification),
        (3, "ED convergence, kicked top", kicked_top_convergence),
        (4, "ED convergence, Dicke", dicke_convergence),
        (5, "saturation values", saturation),
        (6, "conservation and property suites", conservation),
        (7, "Gaussian formula cross-checks", gaussian_cross_checks),
    ];
    let mut unexpected = vec![];
    for (id, name, run) in criteria {
        let t0 = Instant::now();
        let out = run();
        let status = match (out.pass, KNOWN_RED.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "RED (known)",
            (false, false) => {
                unexpected.push(id);
                "RED"
            }
        };
        println!("criterion {id} {status}: {name} [{:.1?}] {}", t0.elapsed(), out.detail);
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected red criteria: {unexpected:?}");
        std::process::exit(1);
    }
}
