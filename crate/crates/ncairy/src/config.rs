//! Run configuration: defaults, `key = value` files and command-line
//! overrides.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fredholm::DEFAULT_NODES;
use crate::kernels::{CouplingMatrix, ShiftVector};
use crate::ncp2::{HmOptions, DEFAULT_S0, DEFAULT_SPAN, DEFAULT_STEP, DEFAULT_TOL};
use crate::table::Format;

pub const CONFIG_ENV: &str = "NCAIRY_CONFIG";
pub const DEFAULT_SEED: u64 = 7;

/// Settings that may come from a file or flags; unset fields fall back to
/// the defaults of [`RunConfig`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PartialConfig {
    pub r: Option<usize>,
    pub shifts: Option<Vec<f64>>,
    pub coupling_re: Option<Vec<f64>>,
    pub coupling_im: Option<Vec<f64>>,
    pub quad_nodes: Option<usize>,
    pub quad_cutoff: Option<f64>,
    pub hm_s0: Option<f64>,
    pub hm_smax: Option<f64>,
    pub hm_step: Option<f64>,
    pub hm_tol: Option<f64>,
    pub output_format: Option<Format>,
    pub seed: Option<u64>,
}

impl PartialConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key = value", n + 1)))?;
            let value = value.trim();
            let bad = |e: Error| Error::InvalidInput(format!("config line {}: {e}", n + 1));
            match key.trim() {
                "r" => c.r = Some(parse_num(value).map_err(bad)?),
                "shifts" => c.shifts = Some(parse_list(value).map_err(bad)?),
                "coupling" | "coupling_re" => c.coupling_re = Some(parse_list(value).map_err(bad)?),
                "coupling_im" => c.coupling_im = Some(parse_list(value).map_err(bad)?),
                "nodes" | "quad_nodes" => c.quad_nodes = Some(parse_num(value).map_err(bad)?),
                "cutoff" | "quad_cutoff" => c.quad_cutoff = Some(parse_num(value).map_err(bad)?),
                "s0" | "hm_s0" => c.hm_s0 = Some(parse_num(value).map_err(bad)?),
                "hm_smax" => c.hm_smax = Some(parse_num(value).map_err(bad)?),
                "hm_step" => c.hm_step = Some(parse_num(value).map_err(bad)?),
                "hm_tol" => c.hm_tol = Some(parse_num(value).map_err(bad)?),
                "format" | "output_format" => c.output_format = Some(value.parse().map_err(bad)?),
                "seed" => c.seed = Some(parse_num(value).map_err(bad)?),
                other => return Err(Error::InvalidInput(format!("config line {}: unknown key '{other}'", n + 1))),
            }
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: PartialConfig) -> Self {
        Self {
            r: over.r.or(self.r),
            shifts: over.shifts.or(self.shifts),
            coupling_re: over.coupling_re.or(self.coupling_re),
            coupling_im: over.coupling_im.or(self.coupling_im),
            quad_nodes: over.quad_nodes.or(self.quad_nodes),
            quad_cutoff: over.quad_cutoff.or(self.quad_cutoff),
            hm_s0: over.hm_s0.or(self.hm_s0),
            hm_smax: over.hm_smax.or(self.hm_smax),
            hm_step: over.hm_step.or(self.hm_step),
            hm_tol: over.hm_tol.or(self.hm_tol),
            output_format: over.output_format.or(self.output_format),
            seed: over.seed.or(self.seed),
        }
    }

    /// Fills defaults: `r` from the shifts or coupling when not given, zero
    /// shifts and identity coupling of that size.
    pub fn resolve(self) -> Result<RunConfig> {
        let r = self
            .r
            .or(self.shifts.as_ref().map(Vec::len))
            .or(self.coupling_re.as_ref().map(|c| (c.len() as f64).sqrt().round() as usize))
            .unwrap_or(1);
        if r == 0 {
            return Err(Error::InvalidInput("r must be at least 1".into()));
        }
        let identity: Vec<f64> = (0..r * r).map(|k| if k % (r + 1) == 0 { 1.0 } else { 0.0 }).collect();
        let cfg = RunConfig {
            r,
            shifts: self.shifts.unwrap_or_else(|| vec![0.0; r]),
            coupling_re: self.coupling_re.unwrap_or(identity),
            coupling_im: self.coupling_im.unwrap_or_default(),
            quad_nodes: self.quad_nodes.unwrap_or(DEFAULT_NODES),
            quad_cutoff: self.quad_cutoff,
            hm_s0: self.hm_s0.unwrap_or(DEFAULT_S0),
            hm_smax: self.hm_smax.unwrap_or(self.hm_s0.unwrap_or(DEFAULT_S0) + DEFAULT_SPAN),
            hm_step: self.hm_step.unwrap_or(DEFAULT_STEP),
            hm_tol: self.hm_tol.unwrap_or(DEFAULT_TOL),
            output_format: self.output_format.unwrap_or_default(),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub r: usize,
    pub shifts: Vec<f64>,
    /// Row-major, `r²` entries.
    pub coupling_re: Vec<f64>,
    /// Row-major, `r²` entries or empty for a real coupling.
    pub coupling_im: Vec<f64>,
    pub quad_nodes: usize,
    /// Half-line cutoff; `None` uses the shift-dependent default.
    pub quad_cutoff: Option<f64>,
    pub hm_s0: f64,
    pub hm_smax: f64,
    pub hm_step: f64,
    pub hm_tol: f64,
    pub output_format: Format,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        PartialConfig::default().resolve().expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let r = self.r;
        if self.shifts.len() != r {
            return Err(Error::InvalidInput(format!("{} shifts given for r = {r}", self.shifts.len())));
        }
        if self.coupling_re.len() != r * r {
            return Err(Error::InvalidInput(format!(
                "{} coupling entries given for r = {r} (need {})",
                self.coupling_re.len(),
                r * r
            )));
        }
        if !self.coupling_im.is_empty() && self.coupling_im.len() != r * r {
            return Err(Error::InvalidInput(format!(
                "{} imaginary coupling entries given for r = {r}",
                self.coupling_im.len()
            )));
        }
        if !(2..=512).contains(&self.quad_nodes) {
            return Err(Error::InvalidInput(format!("node count {} outside 2..=512", self.quad_nodes)));
        }
        if self.quad_cutoff.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidInput("cutoff must be positive".into()));
        }
        if !(self.hm_smax > self.hm_s0) || !(self.hm_step > 0.0 && self.hm_step <= 1e-2) || !(self.hm_tol > 0.0) {
            return Err(Error::InvalidInput(
                "need hm_smax > hm_s0, 0 < hm_step <= 1e-2 and hm_tol > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn shift_vector(&self) -> Result<ShiftVector> {
        ShiftVector::new(self.shifts.clone())
    }

    pub fn coupling(&self) -> Result<CouplingMatrix> {
        let im = (!self.coupling_im.is_empty()).then_some(self.coupling_im.as_slice());
        CouplingMatrix::from_parts(self.r, &self.coupling_re, im)
    }

    pub fn hm_options(&self) -> HmOptions {
        HmOptions {
            s0: self.hm_s0,
            span: self.hm_smax - self.hm_s0,
            step: self.hm_step,
            tol: self.hm_tol,
            ..Default::default()
        }
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e: T::Err| Error::InvalidInput(format!("'{s}': {e}")))
}

/// Comma- or whitespace-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(parse_num)
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::InvalidInput("empty list".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite entry in '{s}'")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.r, 1);
        assert_eq!(c.shifts, vec![0.0]);
        assert_eq!(c.coupling_re, vec![1.0]);
        assert_eq!(c.hm_smax, DEFAULT_S0 + DEFAULT_SPAN);
        assert_eq!(c.output_format, Format::Csv);
    }

    #[test]
    fn file_then_flags() {
        let file = PartialConfig::parse(
            "# two levels\nr = 2\nshifts = 0.1, -0.1\ncoupling = 1 0 0 1  # identity\nformat = json\nseed=3\n",
        )
        .unwrap();
        let flags = PartialConfig {
            seed: Some(11),
            ..Default::default()
        };
        let c = file.overlay(flags).resolve().unwrap();
        assert_eq!(c.r, 2);
        assert_eq!(c.shifts, vec![0.1, -0.1]);
        assert_eq!(c.output_format, Format::Json);
        assert_eq!(c.seed, 11);
        assert!(c.coupling().unwrap().is_hermitean());
    }

    #[test]
    fn r_inferred_and_identity_default() {
        let c = PartialConfig {
            shifts: Some(vec![0.0, 1.0, 2.0]),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(c.r, 3);
        assert_eq!(c.coupling_re, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn bad_inputs() {
        assert!(PartialConfig::parse("r 2").is_err());
        assert!(PartialConfig::parse("colour = red").is_err());
        assert!(PartialConfig::parse("r = two").is_err());
        let mismatch = PartialConfig {
            r: Some(2),
            shifts: Some(vec![0.0]),
            ..Default::default()
        };
        assert!(mismatch.resolve().is_err());
        assert!(parse_list("1, nan").is_err());
        assert!(parse_list(" , ").is_err());
    }
}
