use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::spectral::leray_project;
use std::borrow::Cow;

/// Body force `f(t)`, stored Leray-projected.
#[derive(Debug, Clone, Default)]
pub enum Forcing {
    #[default]
    None,
    Steady(SpectralField),
    /// Piecewise-linear in time between samples.
    Sampled {
        times: Vec<f64>,
        fields: Vec<SpectralField>,
    },
}

impl Forcing {
    pub fn steady(f: &SpectralField) -> Self {
        Forcing::Steady(leray_project(f))
    }

    pub fn sampled(times: Vec<f64>, fields: Vec<SpectralField>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::arg("sampled forcing needs one field per sample time"));
        }
        if times[0] != 0.0 {
            return Err(Error::arg("sampled forcing must start at t = 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::arg("forcing sample times must be strictly increasing"));
        }
        for f in &fields[1..] {
            fields[0].ensure_compatible(f)?;
        }
        let fields = fields.iter().map(leray_project).collect();
        Ok(Forcing::Sampled { times, fields })
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Forcing::None)
    }

    pub fn is_steady(&self) -> bool {
        !matches!(self, Forcing::Sampled { .. })
    }

    /// Last time at which the forcing is defined.
    pub fn horizon(&self) -> f64 {
        match self {
            Forcing::Sampled { times, .. } => *times.last().expect("nonempty"),
            _ => f64::INFINITY,
        }
    }

    /// `𝒫f(t)`, or `None` when there is no forcing.
    pub fn at(&self, t: f64) -> Result<Option<Cow<'_, SpectralField>>> {
        match self {
            Forcing::None => Ok(None),
            Forcing::Steady(f) => Ok(Some(Cow::Borrowed(f))),
            Forcing::Sampled { times, fields } => {
                let last = *times.last().expect("nonempty");
                if !(t >= 0.0 && t <= last * (1.0 + 1e-12)) {
                    return Err(Error::arg(format!(
                        "forcing requested at t = {t} outside its samples [0, {last}]"
                    )));
                }
                let j = times.partition_point(|&s| s <= t);
                if j == times.len() {
                    return Ok(Some(Cow::Borrowed(&fields[j - 1])));
                }
                if j == 0 || times[j - 1] == t {
                    return Ok(Some(Cow::Borrowed(&fields[j.saturating_sub(1)])));
                }
                let (t0, t1) = (times[j - 1], times[j]);
                let w = (t - t0) / (t1 - t0);
                let f = fields[j - 1].scaled(1.0 - w).axpy(w, &fields[j])?;
                Ok(Some(Cow::Owned(f)))
            }
        }
    }

    pub fn check_compatible(&self, u: &SpectralField) -> Result<()> {
        match self {
            Forcing::None => Ok(()),
            Forcing::Steady(f) => u.ensure_compatible(f),
            Forcing::Sampled { fields, .. } => u.ensure_compatible(&fields[0]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;
    use crate::spectral::{random_field, random_raw_field, AmplitudeProfile};

    #[test]
    fn steady_forcing_is_projected() {
        let p = PhysicalParams::unit(3, 1.0).unwrap();
        let raw = random_raw_field(p, 3, [1.0, 2.0], 4, AmplitudeProfile::Flat).unwrap();
        let f = Forcing::steady(&raw);
        let at = f.at(7.0).unwrap().unwrap();
        assert!(at.is_divergence_free(1e-14));
        assert!(f.is_steady() && !f.is_none());
    }

    #[test]
    fn sampled_interpolates_linearly() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let a = random_field(p, 3, [1.0, 3.0], 1, AmplitudeProfile::Flat).unwrap();
        let b = random_field(p, 3, [1.0, 3.0], 2, AmplitudeProfile::Flat).unwrap();
        let f = Forcing::sampled(vec![0.0, 2.0], vec![a.clone(), b.clone()]).unwrap();
        let mid = f.at(0.5).unwrap().unwrap();
        let want = a.scaled(0.75).axpy(0.25, &b).unwrap();
        assert!(mid.max_abs_diff(&want).unwrap() < 1e-15);
        assert!(f.at(2.0).unwrap().unwrap().max_abs_diff(&b).unwrap() < 1e-15);
        assert!(f.at(2.5).is_err());
        assert!(Forcing::sampled(vec![0.0, 0.0], vec![a.clone(), b]).is_err());
        assert!(Forcing::sampled(vec![1.0], vec![a]).is_err());
    }
}
