use crate::config::{ForcingSpec, InitialData, RadiusChoice, RunConfig};
use gevrey_nse::mild::{
    picard_iterate, theorem_quantities, time_grid, EtdStepper, PicardOptions, TheoremQuantities,
};
use gevrey_nse::norms::{
    compute_data_numbers, energy, enstrophy, gevrey_norm, sobolev_l1_norm, DataNumbers,
    GevreyWeight, LambdaSchedule,
};
use gevrey_nse::radius::{
    compare_to_bound, estimate_radius_bisect, estimate_radius_fit, write_shell_csv, RadiusEstimate,
};
use gevrey_nse::spectral::{random_field, retruncate, snapshot, taylor_green, AmplitudeProfile};
use gevrey_nse::turbulence::{
    dissipation_report, dyadic_spectrum, fit_power_law, write_spectrum_csv, DiagnosticSample,
    DissipationReport, SpectrumReport,
};
use gevrey_nse::verifier::{calibrate, run_suite, Suite, CALIBRATION_SEED};
use gevrey_nse::{Calibration, Error, Forcing, PhysicalParams, SpectralField};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Outcome classes mapped onto process exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration, input or constants file.
    Config(String),
    /// Non-finite state during stepping; the last good state was dumped.
    Numerical(String),
    Nonconvergence(String),
    Verify(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Nonconvergence(_) => 3,
            Failure::Verify(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Nonconvergence(m) | Failure::Verify(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Nonconvergence { .. } => Failure::Nonconvergence(e.to_string()),
            Error::Numerical { .. } => Failure::Numerical(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("i/o: {e}"))
    }
}

pub type Outcome = std::result::Result<(), Failure>;

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::Config(format!("output directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn writer(&self, name: &str) -> Result<BufWriter<File>, Failure> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Outcome {
        let mut w = self.writer(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Config(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn text(&self, name: &str, body: &str) -> Outcome {
        std::fs::write(self.path(name), body)?;
        Ok(())
    }
}

pub fn load_calibration(cfg: &RunConfig) -> Result<Calibration, Failure> {
    match &cfg.calibration {
        None => Ok(Calibration::embedded()),
        Some(p) => Calibration::from_path(p)
            .map_err(|e| Failure::Config(format!("constants file {}: {e}", p.display()))),
    }
}

fn params(cfg: &RunConfig) -> Result<PhysicalParams, Failure> {
    Ok(PhysicalParams::new(cfg.dim, cfg.box_len, cfg.nu)?)
}

pub fn initial_data(cfg: &RunConfig) -> Result<SpectralField, Failure> {
    let p = params(cfg)?;
    let u = match &cfg.u0 {
        InitialData::TaylorGreen => taylor_green(p, cfg.k_max, 1.0)?,
        InitialData::Zero => SpectralField::zeros(p, cfg.k_max)?,
        InitialData::Random { band, profile, seed } => random_field(p, cfg.k_max, *band, *seed, *profile)?,
        InitialData::File(path) => {
            let u = snapshot::load(path)
                .map_err(|e| Failure::Config(format!("key `u0_file`: {}: {e}", path.display())))?;
            let q = u.params();
            if q.dim() != p.dim() || q.box_len() != p.box_len() || q.nu() != p.nu() {
                return Err(Failure::Config(format!(
                    "key `u0_file`: snapshot has n = {}, L = {}, ν = {}, config has n = {}, L = {}, ν = {}",
                    q.dim(), q.box_len(), q.nu(), p.dim(), p.box_len(), p.nu()
                )));
            }
            retruncate(&u, cfg.k_max)?
        }
    };
    Ok(u.scaled(cfg.u0_amplitude))
}

pub fn forcing(cfg: &RunConfig) -> Result<Forcing, Failure> {
    match cfg.forcing {
        ForcingSpec::None => Ok(Forcing::None),
        ForcingSpec::Random { kappa_bar, amplitude, seed } => {
            let p = params(cfg)?;
            let band = [1.0, kappa_bar / p.kappa0()];
            let f = random_field(p, cfg.k_max, band, seed, AmplitudeProfile::Flat)?;
            Ok(Forcing::steady(&f.scaled(amplitude)))
        }
    }
}

#[derive(Serialize)]
struct SeriesLine {
    step: usize,
    t: f64,
    energy: f64,
    enstrophy: f64,
    /// `‖u‖_{√(νt),σ}`; null once the weight saturates.
    gevrey_norm: Option<f64>,
    lambda_hat: Option<f64>,
    eps_to_date: f64,
    grashof: f64,
    m0: f64,
    mf: f64,
    m: f64,
}

struct Flow {
    samples: Vec<DiagnosticSample>,
    window_times: Vec<f64>,
    window_fields: Vec<SpectralField>,
    last: SpectralField,
    data: DataNumbers,
    t_avg: f64,
}

fn radius_of(u: &SpectralField, cfg: &RunConfig) -> gevrey_nse::Result<RadiusEstimate> {
    match cfg.radius_method {
        RadiusChoice::Bisect => estimate_radius_bisect(u, cfg.sigma, cfg.radius_budget),
        RadiusChoice::Fit => estimate_radius_fit(u, cfg.radius_band, cfg.sigma),
    }
}

fn state_dump(out: &Output, u: &SpectralField) -> Outcome {
    snapshot::save(u, &out.path("abort_state.snap"))?;
    Ok(())
}

/// Step the flow, streaming one JSON line per recorded snapshot into `series`.
fn run_flow(cfg: &RunConfig, out: &Output, mut series: Option<BufWriter<File>>) -> Result<Flow, Failure> {
    cfg.check_stability().map_err(|e| Failure::Config(e.0))?;
    let u0 = initial_data(cfg)?;
    let forcing = forcing(cfg)?;
    let data = compute_data_numbers(&u0, &forcing, cfg.sigma, cfg.q, cfg.forcing_horizon, LambdaSchedule::SqrtNuT)?;
    let stepper = EtdStepper::new(&u0, forcing, cfg.dt, cfg.stability_cap)?;
    let p = *u0.params();
    let (nu, k0) = (p.nu(), p.kappa0());
    let norm = nu * k0.powi(p.dim() as i32);
    let m0_scale = k0.powf(-cfg.sigma) / (nu * k0);
    let steps = cfg.steps();
    let t_avg = cfg.t_avg.unwrap_or(0.5 * cfg.t_end);
    let window_start = cfg.t_end - t_avg;

    let mut samples: Vec<DiagnosticSample> = vec![];
    let mut window_times = vec![];
    let mut window_fields = vec![];
    let mut dissipated = 0.0;
    let mut last_good = u0.clone();
    let mut record = |step: usize, t: f64, u: &SpectralField, series: &mut Option<BufWriter<File>>| -> gevrey_nse::Result<()> {
        let s = DiagnosticSample::of(t, u);
        if let Some(prev) = samples.last() {
            dissipated += 0.5 * (t - prev.t) * (prev.grad_sq + s.grad_sq);
        }
        let eps_to_date = norm * if t > 0.0 { dissipated / t } else { s.grad_sq };
        samples.push(s);
        if t >= window_start * (1.0 - 1e-12) {
            window_times.push(t);
            window_fields.push(u.clone());
        }
        last_good = u.clone();
        if let Some(w) = series.as_mut() {
            let line = SeriesLine {
                step,
                t,
                energy: energy(u),
                enstrophy: enstrophy(u),
                gevrey_norm: GevreyWeight::new((nu * t).sqrt(), cfg.sigma)
                    .and_then(|wt| gevrey_norm(u, wt))
                    .ok(),
                lambda_hat: radius_of(u, cfg).ok().map(|r| r.lambda_hat),
                eps_to_date,
                grashof: data.g,
                m0: m0_scale * sobolev_l1_norm(u, cfg.sigma),
                mf: data.mf,
                m: data.m,
            };
            serde_json::to_writer(&mut *w, &line).map_err(|e| Error::Format(e.to_string()))?;
            writeln!(w)?;
        }
        Ok(())
    };
    record(0, 0.0, &u0, &mut series)?;
    let result = stepper.run(&u0, 0.0, steps, |i, t, u| {
        if i % cfg.snapshot_stride == 0 || i == steps {
            record(i, t, u, &mut series)?;
        }
        Ok(())
    });
    if let Some(w) = series.as_mut() {
        w.flush()?;
    }
    let last = match result {
        Ok(u) => u,
        Err(Error::Numerical { time, reason, last_good: state }) => {
            let dump = state.map(|b| *b).unwrap_or_else(|| last_good.clone());
            state_dump(out, &dump)?;
            out.json(
                "summary.json",
                &serde_json::json!({ "status": "numerical_abort", "time": time, "reason": reason }),
            )?;
            return Err(Failure::Numerical(format!(
                "numerical breakdown at t = {time}: {reason}; state written to {}",
                out.path("abort_state.snap").display()
            )));
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Flow { samples, window_times, window_fields, last, data, t_avg })
}

#[derive(Serialize)]
struct SpectrumOutput {
    kappa_start: f64,
    t_avg: f64,
    snapshots: usize,
    fit: Option<SpectrumReport>,
    fit_error: Option<String>,
}

fn spectrum_of(cfg: &RunConfig, flow: &Flow, out: &Output) -> Result<SpectrumOutput, Failure> {
    let k0 = cfg.kappa0();
    let kappa_start = cfg.spectrum_kappa_start.unwrap_or(k0);
    let (times, fields) = if flow.window_times.len() >= 2 {
        (flow.window_times.clone(), flow.window_fields.clone())
    } else {
        (vec![0.0, 1.0], vec![flow.last.clone(), flow.last.clone()])
    };
    let span = times[times.len() - 1] - times[0];
    let bands = dyadic_spectrum(&times, &fields, kappa_start, span)?;
    write_spectrum_csv(&bands, out.writer("spectrum.csv")?)?;
    let (fit, fit_error) = match fit_power_law(&bands, cfg.fit_range) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SpectrumOutput { kappa_start, t_avg: flow.t_avg, snapshots: times.len(), fit, fit_error })
}

fn dissipation_of(flow: &Flow) -> Option<DissipationReport> {
    let window: Vec<DiagnosticSample> = flow
        .samples
        .iter()
        .copied()
        .filter(|s| flow.window_times.first().is_some_and(|&t0| s.t >= t0))
        .collect();
    if window.len() < 2 {
        return None;
    }
    let span = window[window.len() - 1].t - window[0].t;
    dissipation_report(flow.last.params(), &window, span).ok()
}

#[derive(Serialize)]
struct RadiusOutput {
    estimate: Option<RadiusEstimate>,
    error: Option<String>,
}

impl RadiusOutput {
    fn of(r: gevrey_nse::Result<RadiusEstimate>) -> Self {
        match r {
            Ok(e) => Self { estimate: Some(e), error: None },
            Err(e) => Self { estimate: None, error: Some(e.to_string()) },
        }
    }
}

pub fn simulate(cfg: &RunConfig) -> Outcome {
    cfg.check_stability().map_err(|e| Failure::Config(e.0))?;
    let out = Output::create(&cfg.output_dir)?;
    let series = out.writer("timeseries.jsonl")?;
    let flow = run_flow(cfg, &out, Some(series))?;
    snapshot::save(&flow.last, &out.path("final.snap"))?;
    let spectrum = spectrum_of(cfg, &flow, &out)?;
    let radius = RadiusOutput::of(radius_of(&flow.last, cfg));
    if let Some(e) = &radius.estimate {
        write_shell_csv(e, cfg.kappa0(), out.writer("shells.csv")?)?;
    }
    out.json(
        "summary.json",
        &serde_json::json!({
            "status": "ok",
            "steps": cfg.steps(),
            "t_end": cfg.t_end,
            "data_numbers": flow.data,
            "dissipation": dissipation_of(&flow),
            "spectrum": spectrum,
            "radius": radius,
        }),
    )
}

pub fn spectrum(cfg: &RunConfig) -> Outcome {
    let out = Output::create(&cfg.output_dir)?;
    let flow = run_flow(cfg, &out, None)?;
    let spectrum = spectrum_of(cfg, &flow, &out)?;
    out.json(
        "spectrum.json",
        &serde_json::json!({
            "spectrum": spectrum,
            "dissipation": dissipation_of(&flow),
            "grashof": flow.data.g,
        }),
    )
}

/// Radius of the evolved field at `t_end`, by both methods.
pub fn radius(cfg: &RunConfig) -> Outcome {
    let out = Output::create(&cfg.output_dir)?;
    let flow = run_flow(cfg, &out, None)?;
    let bisect = RadiusOutput::of(estimate_radius_bisect(&flow.last, cfg.sigma, cfg.radius_budget));
    let fit = RadiusOutput::of(estimate_radius_fit(&flow.last, cfg.radius_band, cfg.sigma));
    let chosen = match cfg.radius_method {
        RadiusChoice::Bisect => &bisect,
        RadiusChoice::Fit => &fit,
    };
    if let Some(e) = &chosen.estimate {
        write_shell_csv(e, cfg.kappa0(), out.writer("shells.csv")?)?;
    }
    out.json(
        "radius.json",
        &serde_json::json!({ "t": cfg.t_end, "sqrt_nu_t": (cfg.nu * cfg.t_end).sqrt(), "bisect": bisect, "fit": fit }),
    )
}

pub fn picard(cfg: &RunConfig) -> Outcome {
    let out = Output::create(&cfg.output_dir)?;
    let cal = load_calibration(cfg)?;
    let u0 = initial_data(cfg)?;
    let forcing = forcing(cfg)?;
    let tq: TheoremQuantities =
        theorem_quantities(&u0, &forcing, cfg.sigma, cfg.q, cfg.theorem, cfg.forcing_horizon, &cal)?;
    let grid = time_grid(tq.t_star, cfg.picard_steps, cfg.picard_refine)?;
    let opts = PicardOptions { tol: cfg.picard_tol, max_iters: cfg.picard_max_iters };
    let (traj, report) = match picard_iterate(&u0, &forcing, &tq, &grid, opts) {
        Ok(x) => x,
        Err(Error::Nonconvergence { ratios }) => {
            out.json(
                "picard_report.json",
                &serde_json::json!({ "status": "nonconvergent", "theorem": tq, "ratios": ratios }),
            )?;
            let worst = ratios.iter().copied().fold(0.0, f64::max);
            return Err(Failure::Nonconvergence(format!(
                "picard iteration diverged on [0, T* = {}]: largest contraction ratio {worst:.4}",
                tq.t_star
            )));
        }
        Err(e) => return Err(e.into()),
    };
    let estimate = radius_of(traj.last(), cfg);
    let comparison = estimate.as_ref().ok().map(|e| compare_to_bound(e, &tq));
    if let Ok(e) = &estimate {
        write_shell_csv(e, cfg.kappa0(), out.writer("shells.csv")?)?;
    }
    snapshot::save(traj.last(), &out.path("picard_final.snap"))?;
    out.json(
        "picard_report.json",
        &serde_json::json!({
            "status": "converged",
            "theorem": tq,
            "picard": report,
            "radius": RadiusOutput::of(estimate),
            "comparison": comparison,
        }),
    )
}

pub fn verify(cfg: &RunConfig, suite: &str) -> Outcome {
    let suite: Suite = suite.parse().map_err(|e: Error| Failure::Config(e.to_string()))?;
    let out = Output::create(&cfg.output_dir)?;
    let cal = load_calibration(cfg)?;
    let report = run_suite(suite, cfg.seed, &cal)?;
    out.json("verify_report.json", &report)?;
    let mut summary = String::new();
    for s in &report.summary {
        let status = if s.failures == 0 { "PASS" } else { "FAIL" };
        summary.push_str(&format!(
            "{status} {:<22} cases {:>5}  failures {:>3}  max lhs/rhs {:.6}\n",
            s.name, s.cases, s.failures, s.max_ratio
        ));
    }
    print!("{summary}");
    out.text("verify_summary.txt", &summary)?;
    let failures: Vec<_> = report.failures().collect();
    if failures.is_empty() {
        return Ok(());
    }
    out.json("failures.json", &failures)?;
    Err(Failure::Verify(format!(
        "{} of {} cases violated their bound; see {}",
        failures.len(),
        report.cases.len(),
        out.path("failures.json").display()
    )))
}

pub fn run_calibration(cfg: &RunConfig, seed: Option<u64>) -> Outcome {
    let out = Output::create(&cfg.output_dir)?;
    let report = calibrate(seed.unwrap_or(CALIBRATION_SEED), &cfg.calibration_version)?;
    out.text("calibration.toml", &report.calibration.to_toml_string())?;
    out.json("calibration_report.json", &report)
}
