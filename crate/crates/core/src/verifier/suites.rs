use super::{
    check_agmon, check_beta_integral, check_brezis_gallouet, check_linear_lemma, check_linear_limit,
    check_mf_grashof, check_nonlinear_lemma, lemma_grid, InequalityCase,
};
use crate::calibration::Calibration;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::forcing::Forcing;
use crate::mild::{beta_exponent, evaluate_phi};
use crate::params::PhysicalParams;
use crate::semigroup::{
    check_algebra_bound, check_heat_bilinear, check_heat_smoothing, check_schedule_absorption,
    SmoothingEstimateReport, CHECK_SLACK,
};
use crate::spectral::{random_field, AmplitudeProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Semigroup,
    Appendix,
    Lemmas,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semigroup" => Ok(Suite::Semigroup),
            "appendix" => Ok(Suite::Appendix),
            "lemmas" => Ok(Suite::Lemmas),
            "all" => Ok(Suite::All),
            other => Err(Error::arg(format!(
                "unknown suite `{other}`; expected semigroup, appendix, lemmas or all"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Semigroup => "semigroup",
            Suite::Appendix => "appendix",
            Suite::Lemmas => "lemmas",
            Suite::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub calibration_version: String,
    pub summary: Vec<CheckSummary>,
    pub cases: Vec<InequalityCase>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &InequalityCase> {
        self.cases.iter().filter(|c| !c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }
}

fn summarize(cases: &[InequalityCase]) -> Vec<CheckSummary> {
    let mut out: Vec<CheckSummary> = Vec::new();
    for c in cases {
        let entry = match out.iter_mut().find(|s| s.name == c.name) {
            Some(s) => s,
            None => {
                out.push(CheckSummary { name: c.name.clone(), cases: 0, failures: 0, max_ratio: 0.0 });
                out.last_mut().expect("just pushed")
            }
        };
        entry.cases += 1;
        entry.failures += usize::from(!c.passed);
        entry.max_ratio = entry.max_ratio.max(c.ratio());
    }
    out
}

/// Cases per semigroup check.
pub const SEMIGROUP_CASES: usize = 1000;

/// Independent generator for case `i` of sweep `stream`.
pub(crate) fn case_rng(seed: u64, stream: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(0);
    let key: u64 = rng.random();
    ChaCha8Rng::seed_from_u64(key ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub(crate) fn random_profile(rng: &mut ChaCha8Rng) -> AmplitudeProfile {
    match rng.random_range(0..4) {
        0 => AmplitudeProfile::Flat,
        1 => AmplitudeProfile::Uniform,
        2 => AmplitudeProfile::Exponential { lambda0: rng.random_range(0.0..0.6) },
        _ => AmplitudeProfile::PowerLaw { exponent: rng.random_range(0.0..3.0) },
    }
}

/// Random dimension, box, viscosity and truncation, with `K` kept small in 3D.
pub(crate) fn random_setup(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<(PhysicalParams, i32)> {
    let n = dims[rng.random_range(0..dims.len())];
    let box_len = 2.0 * PI * rng.random_range(0.25..2.0);
    let nu = 10f64.powf(rng.random_range(-2.0..0.0));
    let k_max = if n == 2 { rng.random_range(3..=8) } else { rng.random_range(2..=4) };
    Ok((PhysicalParams::new(n, box_len, nu)?, k_max))
}

pub(crate) fn random_data(
    rng: &mut ChaCha8Rng,
    params: PhysicalParams,
    k_max: i32,
    band: [f64; 2],
) -> Result<SpectralField> {
    let profile = random_profile(rng);
    let scale = 10f64.powf(rng.random_range(-2.0..1.0));
    Ok(random_field(params, k_max, band, rng.random(), profile)?.scaled(scale))
}

fn from_report(name: &str, params: &[(&str, f64)], r: SmoothingEstimateReport) -> InequalityCase {
    InequalityCase::with_slack(name, params, r.lhs, r.rhs, r.constant_used, CHECK_SLACK)
}

fn semigroup_case(seed: u64, kind: u64, i: usize) -> Result<InequalityCase> {
    let mut rng = case_rng(seed, 100 + kind, i);
    let (p, k_max) = random_setup(&mut rng, &[2, 3])?;
    let k0 = p.kappa0();
    let tau = 1.0 / p.viscous_rate();
    let band = [1.0, k_max as f64];
    let u = random_data(&mut rng, p, k_max, band)?;
    let lambda = rng.random_range(0.0..0.8) / k0;
    let base = [("dim", p.dim() as f64), ("k_max", k_max as f64), ("lambda", lambda)];
    let with = |extra: &[(&'static str, f64)]| {
        let mut v = base.to_vec();
        v.extend_from_slice(extra);
        v
    };
    Ok(match kind {
        0 => {
            let sigma = rng.random_range(-1.5..1.5);
            let beta = rng.random_range(0.0..2.0);
            let t = tau * 10f64.powf(rng.random_range(-3.0..1.0));
            let r = check_heat_smoothing(&u, lambda, sigma, beta, t)?;
            from_report("heat_smoothing", &with(&[("sigma", sigma), ("beta", beta), ("t", t)]), r)
        }
        1 => {
            let sigma = rng.random_range(-1.5..1.5);
            let t = tau * 10f64.powf(rng.random_range(-3.0..0.5));
            let s = t * rng.random_range(0.0..1.0);
            let r = check_schedule_absorption(&u, s, t, sigma)?;
            from_report("schedule_absorption", &with(&[("sigma", sigma), ("s", s), ("t", t)]), r)
        }
        2 => {
            let v = random_data(&mut rng, p, k_max, band)?;
            let gamma = rng.random_range(0.0..2.0);
            let r = check_algebra_bound(&u, &v, lambda, gamma)?;
            from_report("algebra_bound", &with(&[("gamma", gamma)]), r)
        }
        _ => {
            let v = random_data(&mut rng, p, k_max, band)?;
            let gamma = rng.random_range(0.0..2.0);
            let delta = gamma + rng.random_range(-1.0..1.0);
            let t = tau * 10f64.powf(rng.random_range(-3.0..0.5));
            let r = check_heat_bilinear(&u, &v, lambda, gamma, delta, t)?;
            from_report("heat_bilinear", &with(&[("gamma", gamma), ("delta", delta), ("t", t)]), r)
        }
    })
}

fn semigroup_suite(seed: u64) -> Result<Vec<InequalityCase>> {
    (0..4u64)
        .flat_map(|kind| (0..SEMIGROUP_CASES).map(move |i| (kind, i)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(kind, i)| semigroup_case(seed, kind, i))
        .collect()
}

/// `(b, c, d, t)` grid: 5 × 5 × 5 × 4 points plus the closed-form cases.
pub fn beta_grid() -> Vec<[f64; 4]> {
    let bs = [0.0, 0.5, 1.0, 3.0, 10.0];
    let cs = [0.0, 0.25, 0.5, 0.75, 0.9];
    let ts = [0.1, 1.0, 5.0, 20.0];
    let mut out = vec![[0.0, 0.0, 0.0, 1.0], [0.0, 0.5, 0.0, 1.0], [0.0, 0.5, 0.5, 1.0]];
    for &b in &bs {
        for &c in &cs {
            for &d in &cs {
                for &t in &ts {
                    out.push([b, c, d, t]);
                }
            }
        }
    }
    out
}

pub const MF_FORCES: usize = 50;
pub const BG_ENSEMBLES: usize = 20;
pub const AGMON_FIELDS: usize = 200;
pub const AGMON_SIGMAS: [f64; 4] = [-1.4, -1.0, -0.75, -0.6];

fn mf_case(seed: u64, i: usize) -> Result<[InequalityCase; 2]> {
    let mut rng = case_rng(seed, 200, i);
    let (p, k_max) = random_setup(&mut rng, &[2, 3])?;
    let kbar = rng.random_range(1..=k_max.min(4)) as f64;
    let f = random_data(&mut rng, p, k_max, [1.0, kbar])?;
    let (sigma, q) = match i % 3 {
        0 => (0.0, 2.0),
        1 => (-0.75, 2.0),
        _ => (-0.75, 59.0 / 49.0),
    };
    let tau = rng.random_range(0.2..1.0) / p.viscous_rate();
    let lambda_f = (p.nu() * tau).sqrt() * rng.random_range(1.0..1.5);
    let (lo, hi) = check_mf_grashof(&f, sigma, q, tau, lambda_f, kbar * p.kappa0())?;
    Ok([lo, hi])
}

/// Snapshot ensemble with amplitudes decaying or oscillating along a uniform time grid.
pub(crate) fn synthetic_ensemble(
    rng: &mut ChaCha8Rng,
    dims: &[usize],
    len: usize,
) -> Result<(Vec<f64>, Vec<SpectralField>)> {
    let (p, _) = random_setup(rng, dims)?;
    let k_max = if p.dim() == 2 { rng.random_range(4..=12) } else { rng.random_range(2..=4) };
    let hi = rng.random_range(1.0..=k_max as f64);
    let base = random_data(rng, p, k_max, [1.0, hi])?;
    let extra = random_data(rng, p, k_max, [1.0, k_max as f64])?;
    let times: Vec<f64> = (0..len).map(|j| j as f64 / (len - 1) as f64).collect();
    let phase = rng.random_range(0.0..2.0 * PI);
    let mix = rng.random_range(0.0..1.0);
    let fields = times
        .iter()
        .map(|&t| base.axpy(mix * (2.0 * PI * t + phase).sin(), &extra))
        .collect::<Result<Vec<_>>>()?;
    Ok((times, fields))
}

fn appendix_suite(seed: u64, cal: &Calibration) -> Result<Vec<InequalityCase>> {
    let mut cases: Vec<InequalityCase> = beta_grid()
        .into_par_iter()
        .map(|[b, c, d, t]| check_beta_integral(b, c, d, t))
        .collect::<Result<_>>()?;
    let mf: Vec<[InequalityCase; 2]> =
        (0..MF_FORCES).into_par_iter().map(|i| mf_case(seed, i)).collect::<Result<_>>()?;
    cases.extend(mf.into_iter().flatten());
    let bg: Vec<InequalityCase> = (0..BG_ENSEMBLES)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(seed, 300, i);
            let (times, fields) = synthetic_ensemble(&mut rng, &[2], 12)?;
            check_brezis_gallouet(&times, &fields, 1.0, cal)
        })
        .collect::<Result<_>>()?;
    cases.extend(bg);
    let agmon: Vec<InequalityCase> = (0..AGMON_FIELDS)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(seed, 400, i);
            let (p, k_max) = random_setup(&mut rng, &[3])?;
            let hi = rng.random_range(1.0..=k_max as f64);
            let u = random_data(&mut rng, p, k_max, [1.0, hi])?;
            check_agmon(&u, AGMON_SIGMAS[i % AGMON_SIGMAS.len()], cal)
        })
        .collect::<Result<_>>()?;
    cases.extend(agmon);
    Ok(cases)
}

/// `(σ, q)` pairs used by the lemma sweeps, keyed by dimension.
pub(crate) fn lemma_pair(n: usize, i: usize) -> (f64, f64) {
    match (n, i % 3) {
        (2, 0) => (0.0, 2.0),
        (2, 1) => (-0.5, 2.0),
        (2, _) => (0.5, 3.0),
        (_, 0) => (-0.75, 59.0 / 49.0),
        (_, 1) => (0.0, 2.0),
        _ => (-0.5, 1.5),
    }
}

/// Random initial data and steady force, either of which may vanish.
pub(crate) fn random_problem(
    rng: &mut ChaCha8Rng,
    dims: &[usize],
) -> Result<(SpectralField, Forcing)> {
    let (p, k_max) = random_setup(rng, dims)?;
    let u0 = random_data(rng, p, k_max, [1.0, k_max as f64])?;
    let kbar = rng.random_range(1.0..=k_max as f64);
    let f = random_data(rng, p, k_max, [1.0, kbar])?;
    Ok(match rng.random_range(0..4) {
        0 => (u0, Forcing::None),
        1 => (u0.zeros_like(), Forcing::steady(&f)),
        _ => (u0, Forcing::steady(&f)),
    })
}

pub const LINEAR_CASES: usize = 40;
pub const LIMIT_CASES: usize = 10;
pub const NONLINEAR_CASES: usize = 20;

pub(crate) fn linear_case(seed: u64, stream: u64, i: usize, cal: &Calibration) -> Result<[InequalityCase; 2]> {
    let mut rng = case_rng(seed, stream, i);
    let (u0, forcing) = random_problem(&mut rng, &[2, 3])?;
    let (sigma, q) = lemma_pair(u0.dim(), i);
    let t_end = rng.random_range(0.05..1.5) / u0.params().viscous_rate();
    let r = check_linear_lemma(&u0, &forcing, sigma, q, t_end, cal)?;
    Ok([r.x_bound, r.y_bound])
}

pub(crate) fn nonlinear_case(seed: u64, stream: u64, i: usize, cal: &Calibration) -> Result<InequalityCase> {
    let mut rng = case_rng(seed, stream, i);
    let (u0, forcing) = random_problem(&mut rng, &[2, 3])?;
    let k = u0.k_max();
    let v0 = random_data(&mut rng, *u0.params(), k, [1.0, k as f64])?;
    let (sigma, q) = lemma_pair(u0.dim(), i);
    let beta = beta_exponent(sigma, q)?;
    let t_end = rng.random_range(0.05..1.5) / u0.params().viscous_rate();
    let grid = lemma_grid(t_end)?;
    let u = evaluate_phi(&u0, &forcing, &grid)?;
    let v = evaluate_phi(&v0, &Forcing::None, &grid)?;
    check_nonlinear_lemma(&u, &v, sigma, beta, cal)
}

fn lemma_suite(seed: u64, cal: &Calibration) -> Result<Vec<InequalityCase>> {
    let linear: Vec<[InequalityCase; 2]> = (0..LINEAR_CASES)
        .into_par_iter()
        .map(|i| linear_case(seed, 500, i, cal))
        .collect::<Result<_>>()?;
    let limits: Vec<Vec<InequalityCase>> = (0..LIMIT_CASES)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(seed, 600, i);
            let (u0, forcing) = random_problem(&mut rng, &[2, 3])?;
            let (sigma, beta) = if u0.dim() == 2 { (-0.5, 0.5) } else { (-0.75, 15.0 / 59.0) };
            check_linear_limit(&u0, &forcing, sigma, beta)
        })
        .collect::<Result<_>>()?;
    let nonlinear: Vec<InequalityCase> = (0..NONLINEAR_CASES)
        .into_par_iter()
        .map(|i| nonlinear_case(seed, 700, i, cal))
        .collect::<Result<_>>()?;
    let mut cases: Vec<InequalityCase> = linear.into_iter().flatten().collect();
    cases.extend(limits.into_iter().flatten());
    cases.extend(nonlinear);
    Ok(cases)
}

/// Run a pinned-seed sweep; identical `(suite, seed, calibration)` give identical reports.
pub fn run_suite(suite: Suite, seed: u64, calibration: &Calibration) -> Result<SuiteReport> {
    let cases = match suite {
        Suite::Semigroup => semigroup_suite(seed)?,
        Suite::Appendix => appendix_suite(seed, calibration)?,
        Suite::Lemmas => lemma_suite(seed, calibration)?,
        Suite::All => {
            let mut all = semigroup_suite(seed)?;
            all.extend(appendix_suite(seed, calibration)?);
            all.extend(lemma_suite(seed, calibration)?);
            all
        }
    };
    Ok(SuiteReport {
        suite,
        seed,
        calibration_version: calibration.version.clone(),
        summary: summarize(&cases),
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        assert_eq!("appendix".parse::<Suite>().unwrap(), Suite::Appendix);
        assert_eq!(Suite::Lemmas.to_string(), "lemmas");
        assert!(matches!("bogus".parse::<Suite>(), Err(Error::Argument(_))));
    }

    #[test]
    fn grid_is_large_enough() {
        let g = beta_grid();
        assert!(g.len() >= 500);
        assert!(g.contains(&[0.0, 0.5, 0.0, 1.0]));
    }

    #[test]
    fn case_streams_are_reproducible_and_distinct() {
        let a: u64 = case_rng(7, 1, 3).random();
        let b: u64 = case_rng(7, 1, 3).random();
        let c: u64 = case_rng(7, 2, 3).random();
        let d: u64 = case_rng(7, 1, 4).random();
        assert_eq!(a, b);
        assert!(a != c && a != d);
    }

    #[test]
    fn summaries_count_failures() {
        let cases = vec![
            InequalityCase::new("x", &[], 1.0, 2.0, 1.0),
            InequalityCase::new("x", &[], 3.0, 2.0, 1.0),
            InequalityCase::new("y", &[], 0.0, 0.0, 1.0),
        ];
        let s = summarize(&cases);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].cases, s[0].failures, s[0].max_ratio), (2, 1, 1.5));
        assert_eq!((s[1].cases, s[1].failures), (1, 0));
    }
}
