//! Executes a validated experiment: independent jobs run concurrently, each
//! writing its own files, and a manifest records provenance and aborts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use entchaos::classical::{integrate_dicke, poincare_section, KickedTopMap, KickedTopParams};
use entchaos::compare::{divergence_time, scale_relative_deviation};
use entchaos::ed::{
    capped_cutoff, dicke_initial_state, evolve_and_entropy_dicke, kicked_top_ed_series, DickeOperator,
    KickedTopEdOptions,
};
use entchaos::fluctuations::{PhasePoint, TangentSystem};
use entchaos::lyapunov::{benettin_spectrum, lyapunov_estimate};
use entchaos::par::{self, Exec};
use entchaos::phase_space::BlochAngles;
use entchaos::precision::{lift_angle, BigReal, PrecisionConfig, Real};
use entchaos::quantifiers::QuantifierSeries;
use entchaos::semiclassical::{dicke_semiclassical, kicked_top_semiclassical, DickeRunOptions, SpinRunOptions};

use crate::config::{ExperimentConfig, Model, Output};
use crate::emit::{emit_series, Cell, Table};

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "ENTCHAOS_OUTPUT_ROOT";

/// Tolerance of the Dicke integrator used for trajectories and sections.
const DICKE_TOL: f64 = 1e-12;

/// Deviation marking the divergence of exact and semiclassical curves.
const DIVERGENCE_THRESHOLD: f64 = 0.1;

/// Boson population in the top tenth of the ladder above which a run is
/// flagged as cutoff-limited.
const CUTOFF_WARNING: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct Abort {
    pub job: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub name: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub precision: PrecisionConfig,
    pub versions: BTreeMap<String, String>,
    pub timings: BTreeMap<String, f64>,
    pub aborts: Vec<Abort>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

pub fn config_hash(raw: &str) -> String {
    format!("{:x}", Sha256::digest(raw.as_bytes()))
}

/// `output_dir` resolved against the override root when one is set.
pub fn resolve_output_dir(cfg: &ExperimentConfig, root: Option<&Path>) -> PathBuf {
    match root {
        Some(r) => r.join(&cfg.output_dir),
        None => PathBuf::from(&cfg.output_dir),
    }
}

/// Result of one job: files written and summary entries.
#[derive(Default)]
struct JobOutput {
    files: Vec<PathBuf>,
    summary: Vec<(String, serde_json::Value)>,
    warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Trajectory,
    Poincare,
    Lyapunov,
    Exact(usize),
}

impl Job {
    fn label(self) -> String {
        match self {
            Job::Trajectory => "trajectory".into(),
            Job::Poincare => "poincare".into(),
            Job::Lyapunov => "lyapunov".into(),
            Job::Exact(n) => format!("ed_N{n}"),
        }
    }
}

/// Semiclassical reference shared by the exact-comparison jobs.
struct Reference {
    series: QuantifierSeries,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    dir: &'a Path,
}

impl Ctx<'_> {
    fn write(&self, out: &mut JobOutput, table: &Table) -> Result<()> {
        out.files.push(emit_series(self.dir, table, self.cfg.format)?);
        Ok(())
    }
}

pub struct RunReport {
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
}

/// Runs every job of `cfg` into `dir`. Job failures are recorded as aborts;
/// only I/O on the manifest itself is an error.
pub fn run(cfg: &ExperimentConfig, raw: &str, dir: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let ctx = Ctx { cfg, dir };
    let started = Instant::now();
    let mut manifest = Manifest {
        name: cfg.name.clone(),
        config_hash: config_hash(raw),
        seed: cfg.lyapunov.as_ref().and_then(|l| l.rng_seed),
        precision: cfg.precision,
        versions: BTreeMap::from([
            ("entchaos".to_string(), entchaos_version().to_string()),
            ("entchaos-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ]),
        timings: BTreeMap::new(),
        aborts: vec![],
        warnings: vec![],
        files: vec![],
        summary: BTreeMap::new(),
    };

    let mut reference = None;
    if cfg.wants_quantifiers() {
        let t0 = Instant::now();
        let mut out = JobOutput::default();
        match semiclassical(&ctx, &mut out) {
            Ok(r) => reference = Some(r),
            Err(e) => manifest.aborts.push(Abort { job: "semiclassical".into(), error: format!("{e:#}") }),
        }
        absorb(&mut manifest, out);
        manifest.timings.insert("semiclassical".into(), t0.elapsed().as_secs_f64());
    }

    let mut jobs = vec![];
    if cfg.wants(Output::Trajectory) {
        jobs.push(Job::Trajectory);
    }
    if cfg.wants(Output::Poincare) {
        jobs.push(Job::Poincare);
    }
    if cfg.wants(Output::Lyapunov) {
        jobs.push(Job::Lyapunov);
    }
    if cfg.wants_quantifiers() {
        jobs.extend(cfg.n_list.iter().map(|&n| Job::Exact(n)));
    }
    let results = par::map(Exec::Parallel, &jobs, |&job| {
        let t0 = Instant::now();
        let mut out = JobOutput::default();
        let r = match job {
            Job::Trajectory => trajectory(&ctx, &mut out),
            Job::Poincare => poincare(&ctx, &mut out),
            Job::Lyapunov => lyapunov(&ctx, &mut out),
            Job::Exact(n) => exact(&ctx, n, reference.as_ref(), &mut out),
        };
        (job, r, out, t0.elapsed().as_secs_f64())
    });
    for (job, r, out, secs) in results {
        if let Err(e) = r {
            manifest.aborts.push(Abort { job: job.label(), error: format!("{e:#}") });
        }
        absorb(&mut manifest, out);
        manifest.timings.insert(job.label(), secs);
    }
    manifest.timings.insert("total".into(), started.elapsed().as_secs_f64());
    manifest.files.sort();

    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&manifest_path, text + "\n").with_context(|| format!("writing {}", manifest_path.display()))?;
    Ok(RunReport { manifest_path, manifest })
}

fn absorb(manifest: &mut Manifest, out: JobOutput) {
    manifest.files.extend(out.files.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()));
    manifest.summary.extend(out.summary);
    manifest.warnings.extend(out.warnings);
}

fn entchaos_version() -> &'static str {
    // Both crates share the workspace version.
    env!("CARGO_PKG_VERSION")
}

fn kt_params(cfg: &ExperimentConfig) -> Result<KickedTopParams> {
    cfg.kicked_top_params().ok_or_else(|| anyhow!("kicked-top parameters missing"))
}

fn start_angles(cfg: &ExperimentConfig) -> Result<BlochAngles> {
    cfg.angles().map_err(|e| anyhow!(e))
}

fn semiclassical(ctx: &Ctx, out: &mut JobOutput) -> Result<Reference> {
    let cfg = ctx.cfg;
    match cfg.model {
        Model::KickedTop => {
            let opts = SpinRunOptions { f_a: cfg.f_a, precision: cfg.precision, axes: cfg.axes() };
            let run = kicked_top_semiclassical(&kt_params(cfg)?, &start_angles(cfg)?, cfg.kicks(), &opts)?;
            let s = &run.series;
            for o in [Output::Entropy, Output::Qfi, Output::Squeezing, Output::Otoc] {
                if !cfg.wants(o) {
                    continue;
                }
                let name = format!("{}_semiclassical", o.name());
                let table = match o {
                    Output::Entropy => {
                        let mut t = Table::new(name, &["t", "s_a", "s2_a", "ln_det_2g", "lambda_ft"]);
                        for i in 0..s.len() {
                            let lam = if s.times[i] > 0.0 { run.log_stretch[i] / s.times[i] } else { f64::NAN };
                            t.push(vec![
                                s.times[i].into(),
                                s.s_a[i].into(),
                                s.s2_a[i].into(),
                                run.log_det_2g[i].clone().into(),
                                lam.into(),
                            ]);
                        }
                        t
                    }
                    Output::Qfi => column_table(name, s, &[("f_q", &s.f_q), ("n_exc", &run.n_exc)]),
                    Output::Squeezing => column_table(name, s, &[("xi2", &s.xi2)]),
                    _ => column_table(name, s, &[("c", &s.c_ab)]),
                };
                ctx.write(out, &table)?;
            }
            let dev = run.purity_deviation.iter().map(|d| d.abs()).fold(0.0, f64::max);
            out.summary.push(("semiclassical_max_purity_deviation".into(), json!(dev)));
            Ok(Reference { series: run.series })
        }
        Model::Dicke => {
            let params = cfg.dicke_params().ok_or_else(|| anyhow!("Dicke parameters missing"))?;
            let x0 = cfg.dicke_start().map_err(|e| anyhow!(e))?;
            let opts = DickeRunOptions { sample_dt: cfg.sample_dt, tol: DICKE_TOL, axes: cfg.axes() };
            let run = dicke_semiclassical(&params, &x0, cfg.t_final, &opts)?;
            let s = &run.series;
            let lam: Vec<f64> = s
                .times
                .iter()
                .zip(&run.log_stretch)
                .map(|(t, l)| if *t > 0.0 { l / t } else { f64::NAN })
                .collect();
            for o in [Output::Entropy, Output::Qfi, Output::Squeezing, Output::Otoc] {
                if !cfg.wants(o) {
                    continue;
                }
                let name = format!("{}_semiclassical", o.name());
                let table = match o {
                    Output::Entropy => column_table(name, s, &[("s_a", &s.s_a), ("s2_a", &s.s2_a), ("lambda_ft", &lam)]),
                    Output::Qfi => column_table(name, s, &[("f_q", &s.f_q), ("f_q_all", &run.f_q_all)]),
                    Output::Squeezing => column_table(name, s, &[("xi2", &s.xi2)]),
                    _ => column_table(name, s, &[("c", &s.c_ab)]),
                };
                ctx.write(out, &table)?;
            }
            let res = run.symplectic_residual.iter().copied().fold(0.0, f64::max);
            out.summary.push(("semiclassical_max_symplectic_residual".into(), json!(res)));
            Ok(Reference { series: run.series })
        }
    }
}

fn column_table(name: String, s: &QuantifierSeries, cols: &[(&str, &Vec<f64>)]) -> Table {
    let mut header = vec!["t"];
    header.extend(cols.iter().map(|(n, _)| *n));
    let mut t = Table::new(name, &header);
    for i in 0..s.len() {
        let mut row = vec![Cell::Num(s.times[i])];
        row.extend(cols.iter().map(|(_, v)| Cell::Num(v[i])));
        t.push(row);
    }
    t
}

fn trajectory(ctx: &Ctx, out: &mut JobOutput) -> Result<()> {
    let cfg = ctx.cfg;
    let table = match cfg.model {
        Model::KickedTop => {
            let a = start_angles(cfg)?;
            let p = kt_params(cfg)?;
            let mut t = Table::new("trajectory", &["t", "theta", "phi", "cos_theta"]);
            match cfg.precision {
                PrecisionConfig::Machine => {
                    let orbit = KickedTopMap::new(&p, &0.0f64).orbit(&a, cfg.kicks())?;
                    for (time, s) in orbit.times.iter().zip(&orbit.states) {
                        t.push(vec![(*time).into(), s.theta.into(), s.phi.into(), s.theta.cos().into()]);
                    }
                }
                PrecisionConfig::Extended { digits } => {
                    let proto = BigReal::from_f64(0.0, digits);
                    let lifted = BlochAngles { theta: lift_angle(a.theta, &proto), phi: lift_angle(a.phi, &proto) };
                    let orbit = KickedTopMap::new(&p, &proto).orbit(&lifted, cfg.kicks())?;
                    for (time, s) in orbit.times.iter().zip(&orbit.states) {
                        t.push(vec![
                            (*time).into(),
                            s.theta.decimal_string().into(),
                            s.phi.decimal_string().into(),
                            s.theta.cos().decimal_string().into(),
                        ]);
                    }
                }
            }
            t
        }
        Model::Dicke => {
            let params = cfg.dicke_params().ok_or_else(|| anyhow!("Dicke parameters missing"))?;
            let x0 = cfg.dicke_start().map_err(|e| anyhow!(e))?;
            let tr = integrate_dicke(&x0, &params, cfg.t_final, DICKE_TOL, cfg.sample_dt)?;
            let energy = tr.energy.clone().unwrap_or_default();
            let mut t = Table::new("trajectory", &["t", "q", "p", "theta", "phi", "energy"]);
            for (i, (time, s)) in tr.times.iter().zip(&tr.states).enumerate() {
                t.push(vec![
                    (*time).into(),
                    s.q.into(),
                    s.p.into(),
                    s.angles.theta.into(),
                    s.angles.phi.into(),
                    energy.get(i).copied().unwrap_or(f64::NAN).into(),
                ]);
            }
            let drift = energy.iter().map(|e| (e - energy[0]).abs()).fold(0.0, f64::max);
            out.summary.push(("trajectory_max_energy_drift".into(), json!(drift)));
            t
        }
    };
    ctx.write(out, &table)
}

fn poincare(ctx: &Ctx, out: &mut JobOutput) -> Result<()> {
    let cfg = ctx.cfg;
    let horizon = cfg.poincare.t_final.unwrap_or(cfg.t_final);
    let mut t = Table::new("poincare", &["t", "phi", "cos_theta"]);
    match cfg.model {
        Model::KickedTop => {
            let orbit = KickedTopMap::new(&kt_params(cfg)?, &0.0f64).orbit(&start_angles(cfg)?, horizon.round() as usize)?;
            for (time, s) in orbit.times.iter().zip(&orbit.states) {
                t.push(vec![(*time).into(), s.phi.into(), s.theta.cos().into()]);
            }
        }
        Model::Dicke => {
            let params = cfg.dicke_params().ok_or_else(|| anyhow!("Dicke parameters missing"))?;
            let x0 = cfg.dicke_start().map_err(|e| anyhow!(e))?;
            let tr = integrate_dicke(&x0, &params, horizon, DICKE_TOL, cfg.sample_dt)?;
            for p in poincare_section(&tr, &params) {
                t.push(vec![p.t.into(), p.phi.into(), p.cos_theta.into()]);
            }
        }
    }
    out.summary.push(("poincare_points".into(), json!(t.rows.len())));
    ctx.write(out, &t)
}

fn lyapunov(ctx: &Ctx, out: &mut JobOutput) -> Result<()> {
    let cfg = ctx.cfg;
    let l = cfg.lyapunov.as_ref().ok_or_else(|| anyhow!("lyapunov section missing"))?;
    let seed = l.rng_seed.ok_or_else(|| anyhow!("lyapunov.rng_seed missing"))?;
    let (system, x0) = match cfg.model {
        Model::KickedTop => (TangentSystem::KickedTop(kt_params(cfg)?), PhasePoint::Spin(start_angles(cfg)?)),
        Model::Dicke => (
            TangentSystem::Dicke(cfg.dicke_params().ok_or_else(|| anyhow!("Dicke parameters missing"))?),
            PhasePoint::Dicke(cfg.dicke_start().map_err(|e| anyhow!(e))?),
        ),
    };
    let series = benettin_spectrum(&system, &x0, l.k, l.s, l.n_steps, seed)?;
    let mut header = vec!["r".to_string()];
    header.extend((1..=l.k).map(|k| format!("lambda_{k}")));
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut t = Table::new("lyapunov", &header);
    for (r, row) in series.r_values.iter().zip(&series.exponents) {
        let mut cells = vec![Cell::Num(*r)];
        cells.extend(row.iter().map(|x| Cell::Num(*x)));
        t.push(cells);
    }
    ctx.write(out, &t)?;
    match lyapunov_estimate(&series) {
        Ok(e) => out.summary.push((
            "lyapunov".into(),
            json!({ "lambda": e.lambda, "uncertainty": e.uncertainty, "reseeds": series.reseeds.len() }),
        )),
        Err(e) => out.warnings.push(format!("lyapunov estimate unavailable: {e}")),
    }
    Ok(())
}

fn exact(ctx: &Ctx, n: usize, reference: Option<&Reference>, out: &mut JobOutput) -> Result<()> {
    let cfg = ctx.cfg;
    // The exact series uses the same grid as the semiclassical one.
    let ed = match cfg.model {
        Model::KickedTop => {
            let kicks = cfg.kicks();
            let opts = KickedTopEdOptions {
                n_a: (cfg.f_a * n as f64).round() as usize,
                commutator_kicks: cfg.ed.commutator_kicks.unwrap_or(kicks).min(kicks),
                exec: Exec::Parallel,
            };
            let a = start_angles(cfg)?;
            let mut s = kicked_top_ed_series(n, &kt_params(cfg)?, a.theta, a.phi, kicks, &opts)?;
            let spin = n as f64 / 2.0;
            for c in s.c_ab.iter_mut() {
                *c *= spin * spin;
            }
            s
        }
        Model::Dicke => dicke_exact(ctx, n, out)?,
    };
    let suffix = format!("N{n}");
    for o in [Output::Entropy, Output::Qfi, Output::Squeezing, Output::Otoc] {
        if !cfg.wants(o) {
            continue;
        }
        let name = format!("{}_{suffix}", o.name());
        let table = match (o, cfg.model) {
            (Output::Entropy, _) => column_table(name, &ed, &[("s_a", &ed.s_a), ("s2_a", &ed.s2_a)]),
            (Output::Qfi, _) => column_table(name, &ed, &[("f_q", &ed.f_q)]),
            (Output::Squeezing, Model::KickedTop) => column_table(name, &ed, &[("xi2", &ed.xi2)]),
            (Output::Otoc, Model::KickedTop) => column_table(name, &ed, &[("c", &ed.c_ab)]),
            _ => continue,
        };
        ctx.write(out, &table)?;
    }
    if cfg.wants(Output::EdCompare) {
        let r = reference.ok_or_else(|| anyhow!("no semiclassical reference to compare with"))?;
        compare(ctx, n, &ed, &r.series, out)?;
    }
    Ok(())
}

fn dicke_exact(ctx: &Ctx, n: usize, out: &mut JobOutput) -> Result<QuantifierSeries> {
    let cfg = ctx.cfg;
    let params = cfg.dicke_params().ok_or_else(|| anyhow!("Dicke parameters missing"))?;
    let x0 = cfg.dicke_start().map_err(|e| anyhow!(e))?;
    let times = cfg.dicke_times();
    let n_cut = match cfg.ed.cutoff_factor {
        Some(d) => d * n,
        None => {
            let tr = integrate_dicke(&x0, &params, cfg.t_final, DICKE_TOL, cfg.sample_dt)?;
            let density = tr.states.iter().map(|s| s.boson_density()).fold(0.0, f64::max);
            let (cut, capped) = capped_cutoff(density, n);
            if capped {
                out.warnings.push(format!("N={n}: boson cutoff capped at {cut}"));
            }
            cut
        }
    };
    let st = dicke_initial_state(x0.angles.theta, x0.angles.phi, x0.q, x0.p, n, n_cut)?;
    let op = DickeOperator::new(n, n_cut, &params)?;
    let ed = evolve_and_entropy_dicke(&st, &op, &times)?;
    let tail = ed.max_cutoff_population();
    if tail > CUTOFF_WARNING {
        out.warnings.push(format!("N={n}: population {tail:.2e} near the boson cutoff {n_cut}"));
    }
    out.summary.push((format!("ed_N{n}_boson_cutoff"), json!(n_cut)));
    let mut t = Table::new(
        format!("boson_N{n}"),
        &["t", "boson_density", "cutoff_population", "norm_drift"],
    );
    for i in 0..ed.len() {
        t.push(vec![
            ed.times[i].into(),
            ed.boson_density[i].into(),
            ed.cutoff_population[i].into(),
            ed.norm_drift[i].into(),
        ]);
    }
    ctx.write(out, &t)?;
    let len = ed.len();
    Ok(QuantifierSeries {
        times: ed.times,
        s_a: ed.s_a,
        s2_a: ed.s2_a,
        f_q: ed.f_q,
        xi2: vec![f64::NAN; len],
        c_ab: vec![f64::NAN; len],
    })
}

fn compare(ctx: &Ctx, n: usize, ed: &QuantifierSeries, sc: &QuantifierSeries, out: &mut JobOutput) -> Result<()> {
    let len = ed.len().min(sc.len());
    let mut cols: Vec<(&str, &[f64], &[f64])> = vec![("s_a", &ed.s_a[..len], &sc.s_a[..len]), ("f_q", &ed.f_q[..len], &sc.f_q[..len])];
    if ctx.cfg.model == Model::KickedTop {
        cols.push(("c", &ed.c_ab[..len], &sc.c_ab[..len]));
    }
    let times = &ed.times[..len];
    let mut header = vec!["t".to_string()];
    let mut devs = vec![];
    let mut summary = serde_json::Map::new();
    for (name, e, s) in &cols {
        header.push(format!("dev_{name}"));
        let d = scale_relative_deviation(e, s)?;
        let max = d.iter().copied().filter(|x| x.is_finite()).fold(0.0, f64::max);
        let t_div = divergence_time(times, e, s, DIVERGENCE_THRESHOLD)?;
        summary.insert(name.to_string(), json!({ "max_deviation": max, "divergence_time": t_div }));
        devs.push(d);
    }
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut t = Table::new(format!("ed_compare_N{n}"), &header);
    for i in 0..len {
        let mut row = vec![Cell::Num(times[i])];
        row.extend(devs.iter().map(|d| Cell::Num(d[i])));
        t.push(row);
    }
    ctx.write(out, &t)?;
    out.summary.push((format!("ed_compare_N{n}"), serde_json::Value::Object(summary)));
    Ok(())
}
