use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::Serialize;

use crate::bounds::{BoundOptions, UnionForm};
use crate::decoders::DecoderKind;
use crate::ensemble::SignMode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// Fresh design every trial; signal signs per `sign_mode`.
    #[default]
    Generic,
    /// One realised design shared by all trials and all-positive values
    /// equal to `M`: the hypothesis family of the Fano bound.
    Restricted,
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(Self::Generic),
            "restricted" => Ok(Self::Restricted),
            other => Err(Error::Domain(format!(
                "unknown ensemble `{other}` (expected generic or restricted)"
            ))),
        }
    }
}

impl std::fmt::Display for Ensemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Generic => "generic",
            Self::Restricted => "restricted",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Preset name, if built from one.
    pub preset: Option<String>,
    pub p: usize,
    pub s: usize,
    pub n_grid: Vec<usize>,
    pub sigma: f64,
    /// Squared minimum magnitude `M²` of the signal, in raw units.
    pub m2: f64,
    pub sign_mode: SignMode,
    /// Decoders run on the same instances, in this order.
    pub decoders: Vec<DecoderKind>,
    pub ensemble: Ensemble,
    pub trials: usize,
    pub base_seed: u64,
    pub bounds: BoundOptions,
    pub out: Option<PathBuf>,
    /// Enumeration budget for the exhaustive decoder.
    pub budget: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: None,
            p: 16,
            s: 2,
            n_grid: vec![8],
            sigma: 1.0,
            m2: 1.0,
            sign_mode: SignMode::default(),
            decoders: vec![DecoderKind::Exhaustive],
            ensemble: Ensemble::default(),
            trials: 100,
            base_seed: 1,
            bounds: BoundOptions::default(),
            out: None,
            budget: crate::decoders::DEFAULT_BUDGET,
        }
    }
}

pub(crate) const KEYS: [&str; 15] = [
    "p",
    "s",
    "n",
    "n_grid",
    "sigma",
    "m2",
    "sign_mode",
    "decoder",
    "ensemble",
    "trials",
    "base_seed",
    "bound_C",
    "bound_Cprime",
    "union_form",
    "out",
];

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| bad(key, format!("`{value}`: {e}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|v| parse_num(key, v.trim())).collect()
}

impl ExperimentConfig {
    /// Parses the `key = value` config format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad(&format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(bad(key, "unknown key"));
            }
            if !seen.insert(key.to_string()) {
                return Err(bad(key, "duplicate key"));
            }
            cfg.set(key, value)?;
        }
        if seen.contains("n") && seen.contains("n_grid") {
            return Err(bad("n_grid", "give either n or n_grid, not both"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let domain_err = |e: Error| bad(key, e.to_string());
        match key {
            "p" => self.p = parse_num(key, value)?,
            "s" => self.s = parse_num(key, value)?,
            "n" => self.n_grid = vec![parse_num(key, value)?],
            "n_grid" => self.n_grid = parse_list(key, value)?,
            "sigma" => self.sigma = parse_num(key, value)?,
            "m2" => self.m2 = parse_num(key, value)?,
            "sign_mode" => self.sign_mode = value.parse().map_err(domain_err)?,
            "decoder" => {
                self.decoders = value
                    .split(',')
                    .map(|v| v.trim().parse::<DecoderKind>())
                    .collect::<Result<_>>()
                    .map_err(domain_err)?
            }
            "ensemble" => self.ensemble = value.parse().map_err(domain_err)?,
            "trials" => self.trials = parse_num(key, value)?,
            "base_seed" => self.base_seed = parse_num(key, value)?,
            "bound_C" => self.bounds.c = parse_num(key, value)?,
            "bound_Cprime" => self.bounds.c_prime = parse_num(key, value)?,
            "union_form" => self.bounds.union_form = value.parse::<UnionForm>().map_err(domain_err)?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(bad(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(bad("p", "must be >= 1"));
        }
        if self.s == 0 || self.s > self.p {
            return Err(bad("s", format!("must satisfy 1 <= s <= p = {}", self.p)));
        }
        if self.n_grid.is_empty() {
            return Err(bad("n_grid", "must be nonempty"));
        }
        if self.n_grid.contains(&0) {
            return Err(bad("n_grid", "sample sizes must be >= 1"));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("n_grid", "must be strictly increasing"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(bad("sigma", "must be finite and >= 0"));
        }
        if !(self.m2 > 0.0 && self.m2.is_finite()) {
            return Err(bad("m2", "must be finite and > 0"));
        }
        if self.decoders.is_empty() {
            return Err(bad("decoder", "at least one decoder is required"));
        }
        if self.trials == 0 {
            return Err(bad("trials", "must be >= 1"));
        }
        if !(self.bounds.c > 0.0 && self.bounds.c.is_finite()) {
            return Err(bad("bound_C", "must be > 0"));
        }
        if !(self.bounds.c_prime > 0.0 && self.bounds.c_prime.is_finite()) {
            return Err(bad("bound_Cprime", "must be > 0"));
        }
        Ok(())
    }

    /// Minimum magnitude `M = √m2` of generated signals.
    pub fn magnitude(&self) -> f64 {
        self.m2.sqrt()
    }

    /// `M²/σ²`, or `None` when `σ = 0`.
    pub fn normalized_m2(&self) -> Option<f64> {
        (self.sigma > 0.0).then(|| self.m2 / (self.sigma * self.sigma))
    }

    pub fn sign_mode_effective(&self) -> SignMode {
        match self.ensemble {
            Ensemble::Generic => self.sign_mode,
            Ensemble::Restricted => SignMode::AllPositive,
        }
    }

    /// Renders the config in the file format accepted by [`Self::parse`].
    pub fn to_config_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut out = String::new();
        if let Some(name) = &self.preset {
            out.push_str(&format!("# preset: {name}\n"));
        }
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        line("p", self.p.to_string());
        line("s", self.s.to_string());
        line("n_grid", join(self.n_grid.iter().map(|n| n.to_string()).collect()));
        line("sigma", self.sigma.to_string());
        line("m2", self.m2.to_string());
        line("sign_mode", self.sign_mode.to_string());
        line("decoder", join(self.decoders.iter().map(|d| d.to_string()).collect()));
        line("ensemble", self.ensemble.to_string());
        line("trials", self.trials.to_string());
        line("base_seed", self.base_seed.to_string());
        line("bound_C", self.bounds.c.to_string());
        line("bound_Cprime", self.bounds.c_prime.to_string());
        line("union_form", self.bounds.union_form.to_string());
        if let Some(out_path) = &self.out {
            line("out", out_path.display().to_string());
        }
        out
    }

    /// Stable identifier: preset name (or `custom`) plus a hash of the
    /// canonical config text.
    pub fn experiment_id(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut canon = self.clone();
        canon.out = None;
        let digest = Sha256::digest(canon.to_config_text().as_bytes());
        let hex: String = digest.iter().take(4).map(|b| format!("{b:02x}")).collect();
        format!("{}-{hex}", self.preset.as_deref().unwrap_or("custom"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# desk-scale phase run
p = 64
s = 4
n_grid = 8, 16,32
sigma = 1
m2 = 0.25   # M = 0.5
sign_mode = all-positive
decoder = exhaustive,lasso
ensemble = generic
trials = 200
base_seed = 42
bound_C = 24
bound_Cprime = 0.25
union_form = simplified
out = run.csv
";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!((c.p, c.s), (64, 4));
        assert_eq!(c.n_grid, vec![8, 16, 32]);
        assert_eq!(c.decoders, vec![DecoderKind::Exhaustive, DecoderKind::Lasso]);
        assert_eq!(c.sign_mode, SignMode::AllPositive);
        assert_eq!(c.bounds.union_form, UnionForm::Simplified);
        assert_eq!(c.out.as_deref(), Some(std::path::Path::new("run.csv")));
        let again = ExperimentConfig::parse(&c.to_config_text()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_input_naming_the_key() {
        let err = |t: &str| match ExperimentConfig::parse(t) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(err("p = 10\nwidth = 3\n"), "width");
        assert_eq!(err("p = 10\np = 11\n"), "p");
        assert_eq!(err("p = ten\n"), "p");
        assert_eq!(err("p = 4\ns = 5\n"), "s");
        assert_eq!(err("n_grid = 16, 8\n"), "n_grid");
        assert_eq!(err("n = 4\nn_grid = 8\n"), "n_grid");
        assert_eq!(err("decoder = magic\n"), "decoder");
        assert_eq!(err("trials = 0\n"), "trials");
        assert_eq!(err("just words\n"), "line 1");
    }

    #[test]
    fn experiment_id_is_stable() {
        let c = ExperimentConfig::default();
        assert_eq!(c.experiment_id(), ExperimentConfig::default().experiment_id());
        let mut d = c.clone();
        d.trials += 1;
        assert_ne!(c.experiment_id(), d.experiment_id());
        assert!(c.experiment_id().starts_with("custom-"));
    }
}
