//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key is optional except the
//! ones a subcommand needs; unknown keys are rejected.

use gevrey_nse::mild::TheoremId;
use gevrey_nse::spectral::AmplitudeProfile;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Documented keys with their defaults; `None` marks keys without a default.
pub const KEYS: &[(&str, Option<&str>, &str)] = &[
    ("dim", Some("2"), "spatial dimension, 2 or 3"),
    ("box_len", Some("6.283185307179586"), "period L; κ₀ = 2π/L"),
    ("nu", Some("1.0"), "kinematic viscosity"),
    ("k_max", Some("16"), "truncation |k|_∞ ≤ K"),
    ("dt", Some("1e-3"), "time step of the exponential integrator"),
    ("t_end", Some("1.0"), "run length"),
    ("stability_cap", Some("10.0"), "upper bound on dt·νκ₀²K²"),
    ("seed", Some("0"), "base seed; random data use seed and seed + 1 unless overridden"),
    ("u0", Some("taylor_green"), "taylor_green | random | file | zero"),
    ("u0_amplitude", Some("1.0"), "amplitude multiplier of the initial data"),
    ("u0_band", Some("1,4"), "lattice |k| band of random initial data"),
    ("u0_profile", Some("uniform"), "flat | uniform | exponential:λ₀ | power_law:p"),
    ("u0_seed", None, "seed of random initial data"),
    ("u0_file", None, "binary snapshot when u0 = file"),
    ("forcing", Some("none"), "none | random (time-independent)"),
    ("forcing_kappa_bar", Some("3.0"), "force supported on κ₀|k| ≤ κ̄ (dimensional)"),
    ("forcing_amplitude", Some("1.0"), "coefficient magnitude of the force"),
    ("forcing_seed", None, "seed of the random force"),
    ("sigma", Some("0.0"), "Sobolev index σ; fractions like -3/4 accepted"),
    ("q", Some("2"), "time integrability q of the force, a fraction, or inf"),
    ("theorem", Some("general"), "general | grashof-2d | grashof-3d | force-dominated"),
    ("forcing_horizon", None, "T_f for the general and force-dominated windows; default t_end"),
    ("lambda_schedule", Some("sqrt_nu_t"), "radius schedule λ(t); only sqrt_nu_t"),
    ("snapshot_stride", Some("10"), "steps between recorded snapshots"),
    ("t_avg", None, "averaging horizon ending at t_end; default second half of the run"),
    ("spectrum_kappa_start", None, "lowest dyadic band edge; default κ₀"),
    ("fit_range", None, "κ range lo,hi of the power-law fit"),
    ("radius_method", Some("bisect"), "bisect | fit"),
    ("radius_budget", Some("100"), "growth budget of the bisection estimate"),
    ("radius_band", None, "lattice |k| band lo,hi of the log-linear fit"),
    ("picard_steps", Some("64"), "uniform intervals of the Picard grid"),
    ("picard_refine", Some("8"), "geometric refinements of its first interval"),
    ("picard_tol", Some("1e-10"), "relative stopping tolerance"),
    ("picard_max_iters", Some("60"), "iteration cap"),
    ("calibration", None, "constants file; default the embedded constants"),
    ("calibration_version", Some("2"), "version written by the calibrate subcommand"),
    ("output_dir", Some("out"), "directory for all artifacts"),
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

type Res<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Res<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    TaylorGreen,
    Random { band: [f64; 2], profile: AmplitudeProfile, seed: u64 },
    File(PathBuf),
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    None,
    Random { kappa_bar: f64, amplitude: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RadiusChoice {
    Bisect,
    Fit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub box_len: f64,
    pub nu: f64,
    pub k_max: i32,
    pub dt: f64,
    pub t_end: f64,
    pub stability_cap: f64,
    pub seed: u64,
    pub u0: InitialData,
    pub u0_amplitude: f64,
    pub forcing: ForcingSpec,
    pub sigma: f64,
    pub q: f64,
    pub theorem: TheoremId,
    pub forcing_horizon: f64,
    pub snapshot_stride: usize,
    pub t_avg: Option<f64>,
    pub spectrum_kappa_start: Option<f64>,
    pub fit_range: Option<[f64; 2]>,
    pub radius_method: RadiusChoice,
    pub radius_budget: f64,
    pub radius_band: Option<[f64; 2]>,
    pub picard_steps: usize,
    pub picard_refine: u32,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub calibration: Option<PathBuf>,
    pub calibration_version: String,
    pub output_dir: PathBuf,
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_entries(text: &str) -> Res<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("line {}: expected `key = value`, got `{line}`", no + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.iter().any(|(name, _, _)| *name == k) {
            return err(format!("line {}: unknown key `{k}`", no + 1));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return err(format!("line {}: key `{k}` given twice", no + 1));
        }
    }
    Ok(out)
}

struct Lookup<'a> {
    entries: &'a BTreeMap<String, String>,
    base: &'a Path,
}

impl Lookup<'_> {
    fn raw(&self, key: &str) -> Option<String> {
        self.entries.get(key).cloned().or_else(|| {
            KEYS.iter().find(|(k, _, _)| *k == key).and_then(|(_, d, _)| d.map(str::to_string))
        })
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Res<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("key `{key}`: cannot parse `{v}`"))),
        }
    }

    fn req<T: std::str::FromStr>(&self, key: &str) -> Res<T> {
        self.parse(key)?.ok_or_else(|| ConfigError(format!("key `{key}` is required")))
    }

    /// A real number, also accepting a fraction `a/b`.
    fn real(&self, key: &str) -> Res<f64> {
        let v = self.raw(key).ok_or_else(|| ConfigError(format!("key `{key}` is required")))?;
        let parsed = match v.split_once('/') {
            Some((a, b)) => a.trim().parse::<f64>().ok().zip(b.trim().parse::<f64>().ok()).map(|(a, b)| a / b),
            None => v.parse().ok(),
        };
        parsed.ok_or_else(|| ConfigError(format!("key `{key}`: cannot parse `{v}`")))
    }

    fn positive(&self, key: &str) -> Res<f64> {
        let v: f64 = self.req(key)?;
        if !(v > 0.0 && v.is_finite()) {
            return err(format!("key `{key}`: must be positive and finite, got {v}"));
        }
        Ok(v)
    }

    fn pair(&self, key: &str) -> Res<Option<[f64; 2]>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        let nums: Vec<f64> = parts.iter().filter_map(|p| p.parse().ok()).collect();
        if parts.len() != 2 || nums.len() != 2 || !(nums[0] < nums[1]) {
            return err(format!("key `{key}`: expected `lo,hi` with lo < hi, got `{v}`"));
        }
        Ok(Some([nums[0], nums[1]]))
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(|p| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                self.base.join(p)
            }
        })
    }
}

fn parse_profile(v: &str) -> Res<AmplitudeProfile> {
    let (kind, arg) = match v.split_once(':') {
        Some((k, a)) => (k.trim(), Some(a.trim())),
        None => (v.trim(), None),
    };
    let num = |a: Option<&str>| -> Res<f64> {
        a.and_then(|s| s.parse().ok())
            .ok_or_else(|| ConfigError(format!("key `u0_profile`: `{v}` needs a numeric argument")))
    };
    match kind {
        "flat" => Ok(AmplitudeProfile::Flat),
        "uniform" => Ok(AmplitudeProfile::Uniform),
        "exponential" => Ok(AmplitudeProfile::Exponential { lambda0: num(arg)? }),
        "power_law" => Ok(AmplitudeProfile::PowerLaw { exponent: num(arg)? }),
        _ => err(format!("key `u0_profile`: unknown profile `{v}`")),
    }
}

impl RunConfig {
    pub fn from_entries(entries: &BTreeMap<String, String>, base: &Path) -> Res<Self> {
        let l = Lookup { entries, base };
        let dim: usize = l.req("dim")?;
        if dim != 2 && dim != 3 {
            return err(format!("key `dim`: must be 2 or 3, got {dim}"));
        }
        let k_max: i32 = l.req("k_max")?;
        if k_max < 1 {
            return err(format!("key `k_max`: must be ≥ 1, got {k_max}"));
        }
        let seed: u64 = l.req("seed")?;
        let t_end = l.positive("t_end")?;
        let u0 = match l.raw("u0").as_deref() {
            Some("taylor_green") => InitialData::TaylorGreen,
            Some("zero") => InitialData::Zero,
            Some("random") => InitialData::Random {
                band: l.pair("u0_band")?.expect("has default"),
                profile: parse_profile(&l.raw("u0_profile").expect("has default"))?,
                seed: l.parse("u0_seed")?.unwrap_or(seed),
            },
            Some("file") => {
                let p = l.path("u0_file").ok_or_else(|| ConfigError("key `u0_file` is required when u0 = file".into()))?;
                if !p.is_file() {
                    return err(format!("key `u0_file`: {} does not exist", p.display()));
                }
                InitialData::File(p)
            }
            other => return err(format!("key `u0`: unknown initial data `{}`", other.unwrap_or(""))),
        };
        let forcing = match l.raw("forcing").as_deref() {
            Some("none") => ForcingSpec::None,
            Some("random") => ForcingSpec::Random {
                kappa_bar: l.positive("forcing_kappa_bar")?,
                amplitude: l.req("forcing_amplitude")?,
                seed: l.parse("forcing_seed")?.unwrap_or(seed.wrapping_add(1)),
            },
            other => return err(format!("key `forcing`: unknown forcing `{}`", other.unwrap_or(""))),
        };
        let q = match l.raw("q").as_deref() {
            Some("inf") | Some("infinity") => f64::INFINITY,
            _ => l.real("q")?,
        };
        if !(q > 1.0) {
            return err(format!("key `q`: must exceed 1, got {q}"));
        }
        let sigma = l.real("sigma")?;
        if !(sigma > -1.0 && sigma.is_finite()) {
            return err(format!("key `sigma`: must exceed −1, got {sigma}"));
        }
        let theorem: TheoremId = l
            .raw("theorem")
            .expect("has default")
            .parse()
            .map_err(|_| ConfigError(format!("key `theorem`: unknown theorem `{}`", l.raw("theorem").unwrap_or_default())))?;
        if l.raw("lambda_schedule").as_deref() != Some("sqrt_nu_t") {
            return err("key `lambda_schedule`: only `sqrt_nu_t` is supported");
        }
        let radius_method = match l.raw("radius_method").as_deref() {
            Some("bisect") => RadiusChoice::Bisect,
            Some("fit") => RadiusChoice::Fit,
            other => return err(format!("key `radius_method`: unknown method `{}`", other.unwrap_or(""))),
        };
        let stride: usize = l.req("snapshot_stride")?;
        if stride == 0 {
            return err("key `snapshot_stride`: must be ≥ 1");
        }
        let t_avg = match l.parse::<f64>("t_avg")? {
            Some(v) if !(v > 0.0 && v <= t_end) => {
                return err(format!("key `t_avg`: must lie in (0, t_end], got {v}"))
            }
            other => other,
        };
        let calibration = l.path("calibration");
        if let Some(p) = &calibration {
            if !p.is_file() {
                return err(format!("key `calibration`: {} does not exist", p.display()));
            }
        }
        let budget = l.positive("radius_budget")?;
        if budget <= 1.0 {
            return err(format!("key `radius_budget`: must exceed 1, got {budget}"));
        }
        let cfg = RunConfig {
            dim,
            box_len: l.positive("box_len")?,
            nu: l.positive("nu")?,
            k_max,
            dt: l.positive("dt")?,
            t_end,
            stability_cap: l.positive("stability_cap")?,
            seed,
            u0,
            u0_amplitude: l.req("u0_amplitude")?,
            forcing,
            sigma,
            q,
            theorem,
            forcing_horizon: l.parse::<f64>("forcing_horizon")?.unwrap_or(t_end),
            snapshot_stride: stride,
            t_avg,
            spectrum_kappa_start: l.parse("spectrum_kappa_start")?,
            fit_range: l.pair("fit_range")?,
            radius_method,
            radius_budget: budget,
            radius_band: l.pair("radius_band")?,
            picard_steps: l.req("picard_steps")?,
            picard_refine: l.req("picard_refine")?,
            picard_tol: l.positive("picard_tol")?,
            picard_max_iters: l.req("picard_max_iters")?,
            calibration,
            calibration_version: l.req("calibration_version")?,
            output_dir: l.path("output_dir").expect("has default"),
        };
        cfg.check_ranges()?;
        Ok(cfg)
    }

    pub fn kappa0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_len
    }

    fn check_ranges(&self) -> Res<()> {
        if let ForcingSpec::Random { kappa_bar, .. } = self.forcing {
            let top = self.k_max as f64 * self.kappa0();
            if kappa_bar > top * (1.0 + 1e-12) {
                return err(format!("key `forcing_kappa_bar`: κ̄ = {kappa_bar} exceeds Kκ₀ = {top}"));
            }
            if kappa_bar < self.kappa0() {
                return err(format!("key `forcing_kappa_bar`: κ̄ = {kappa_bar} lies below κ₀ = {}", self.kappa0()));
            }
        }
        if let InitialData::Random { band, .. } = self.u0 {
            if band[0] < 0.0 || band[1] > self.k_max as f64 {
                return err(format!("key `u0_band`: [{}, {}] must lie in [0, K = {}]", band[0], band[1], self.k_max));
            }
        }
        if matches!(self.u0, InitialData::TaylorGreen) && self.dim != 2 {
            return err("key `u0`: taylor_green needs dim = 2");
        }
        if !(self.forcing_horizon > 0.0) {
            return err("key `forcing_horizon`: must be positive");
        }
        if self.picard_steps == 0 || self.picard_max_iters == 0 {
            return err("keys `picard_steps` and `picard_max_iters` must be ≥ 1");
        }
        Ok(())
    }

    /// `dt·νκ₀²K² ≤ stability_cap`, checked before any stepping.
    pub fn check_stability(&self) -> Res<()> {
        let stiff = self.dt * self.nu * self.kappa0().powi(2) * (self.k_max as f64).powi(2);
        if stiff > self.stability_cap {
            return err(format!(
                "key `dt`: dt·νκ₀²K² = {stiff:.4} exceeds stability_cap = {}",
                self.stability_cap
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

/// Reference text for `--help`-style listings and the README.
pub fn key_table() -> String {
    KEYS.iter()
        .map(|(k, d, doc)| format!("{k:<22} {:<20} {doc}\n", d.unwrap_or("-")))
        .collect()
}
