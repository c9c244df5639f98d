//! Run configuration shared by the CLI and the benchmark harness, and the
//! single entry point that turns a sample into a decision.

use std::collections::BTreeMap;
use std::path::Path;

use crate::copula::TieRule;
use crate::error::{Error, Result};
use crate::rng::mix;
use crate::sample::PairSample;
use crate::scoring::{
    decide, score, stability_threshold, Decision, Method, PipelineConfig, ResidualScaling,
    ScoreResult, ScoreVariant, ThresholdConfig,
};
use crate::trac::{trac_pvalue, TracConfig};

pub const DEFAULT_MAX_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub pipeline: PipelineConfig,
    pub threshold: ThresholdConfig,
    pub trac: TracConfig,
    pub seed: u64,
    pub max_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::Tra,
            pipeline: PipelineConfig::default(),
            threshold: ThresholdConfig::default(),
            trac: TracConfig::default(),
            seed: 0,
            max_samples: DEFAULT_MAX_SAMPLES,
        }
    }
}

fn variant_name(v: ScoreVariant) -> &'static str {
    match v {
        ScoreVariant::Tra => "tra",
        ScoreVariant::Tras => "tras",
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        self.threshold.validate()?;
        self.trac.validate()?;
        if self.max_samples < 2 {
            return Err(Error::InvalidConfig(format!(
                "max_samples must be >= 2, got {}",
                self.max_samples
            )));
        }
        Ok(())
    }

    /// Flat `key=value` pairs, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let ties = match self.pipeline.ties {
            TieRule::StableOrder => "stable",
            TieRule::Average => "average",
        };
        let scaling = match self.pipeline.scaling {
            ResidualScaling::Standardized => "standardized",
            ResidualScaling::Raw => "raw",
        };
        vec![
            ("method", self.method.to_string()),
            ("kappa", self.pipeline.window.kappa.to_string()),
            ("c_beta", self.pipeline.window.c_beta.to_string()),
            ("folds", self.pipeline.folds.to_string()),
            (
                "basis_knots",
                self.pipeline.smoother.basis_knots.to_string(),
            ),
            ("ties", ties.to_string()),
            ("scaling", scaling.to_string()),
            ("stability_r", self.threshold.r.to_string()),
            ("fraction", self.threshold.fraction.to_string()),
            ("tau_alpha", self.threshold.alpha.to_string()),
            ("boot", self.trac.b.to_string()),
            ("trac_alpha", self.trac.alpha.to_string()),
            (
                "trac_score",
                variant_name(self.trac.score_variant).to_string(),
            ),
            ("rho_clip", self.trac.rho_clip.to_string()),
            ("seed", self.seed.to_string()),
            ("max_samples", self.max_samples.to_string()),
        ]
    }

    /// Single-line echo used in output headers.
    pub fn echo(&self) -> String {
        self.to_pairs()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Set one key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {value:?}")))
        }
        match key {
            "method" => self.method = value.parse()?,
            "kappa" => self.pipeline.window.kappa = num(key, value)?,
            "c_beta" => self.pipeline.window.c_beta = num(key, value)?,
            "folds" => self.pipeline.folds = num(key, value)?,
            "basis_knots" => self.pipeline.smoother.basis_knots = num(key, value)?,
            "ties" => {
                self.pipeline.ties = match value {
                    "stable" => TieRule::StableOrder,
                    "average" => TieRule::Average,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "ties: unknown rule {value:?}"
                        )))
                    }
                }
            }
            "scaling" => {
                self.pipeline.scaling = match value {
                    "standardized" => ResidualScaling::Standardized,
                    "raw" => ResidualScaling::Raw,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "scaling: unknown mode {value:?}"
                        )))
                    }
                }
            }
            "stability_r" => self.threshold.r = num(key, value)?,
            "fraction" => self.threshold.fraction = num(key, value)?,
            "tau_alpha" => self.threshold.alpha = num(key, value)?,
            "boot" => self.trac.b = num(key, value)?,
            "trac_alpha" => self.trac.alpha = num(key, value)?,
            "trac_score" => {
                self.trac.score_variant = match value {
                    "tra" => ScoreVariant::Tra,
                    "tras" | "tra-s" => ScoreVariant::Tras,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "trac_score: unknown score {value:?}"
                        )))
                    }
                }
            }
            "rho_clip" => self.trac.rho_clip = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "max_samples" => self.max_samples = num(key, value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Apply `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            self.set(k.trim(), v.trim()).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, path)?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        self.to_pairs()
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

/// A decision together with the quantities behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub decision: Decision,
    pub score: ScoreResult,
    pub tau: Option<f64>,
    pub p_value: Option<f64>,
    pub rho_hat: Option<f64>,
}

impl Outcome {
    pub fn diagnostics(&self) -> &BTreeMap<String, f64> {
        &self.score.diagnostics
    }
}

/// Run `method` on `sample`. Folds use `cfg.seed`; stability subsamples and
/// bootstrap replicates use seeds derived from it.
pub fn run_method(sample: &PairSample, method: Method, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let seed = cfg.seed;
    match method {
        Method::Tra | Method::Tras => {
            let variant = if method == Method::Tra {
                ScoreVariant::Tra
            } else {
                ScoreVariant::Tras
            };
            let observed = score(variant, sample, seed, &cfg.pipeline)?;
            let threshold = ThresholdConfig {
                seed: mix(seed, 1),
                ..cfg.threshold
            };
            let tau = stability_threshold(
                sample,
                |sub| score(variant, sub, seed, &cfg.pipeline).map(|r| r.score),
                &threshold,
            )?;
            let mut decision = decide(observed.score, tau);
            decision.method = method;
            Ok(Outcome {
                decision,
                score: observed,
                tau: Some(tau),
                p_value: None,
                rho_hat: None,
            })
        }
        Method::Trac => {
            let trac = TracConfig { seed, ..cfg.trac };
            let observed = score(trac.score_variant, sample, seed, &cfg.pipeline)?;
            let result = trac_pvalue(sample, &trac, &cfg.pipeline)?;
            Ok(Outcome {
                decision: result.verdict,
                score: observed,
                tau: None,
                p_value: Some(result.p_value),
                rho_hat: Some(result.rho_hat),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::Verdict;
    use crate::synth::{generate, Scenario, ScenarioKind};

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig {
            method: Method::Trac,
            seed: 42,
            ..RunConfig::default()
        };
        cfg.pipeline.window.kappa = 0.75;
        cfg.pipeline.ties = TieRule::Average;
        cfg.trac.score_variant = ScoreVariant::Tras;
        cfg.trac.b = 99;
        let mut back = RunConfig::default();
        back.apply_text(&cfg.to_text(), Path::new("cfg")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_lines_report_position() {
        let mut cfg = RunConfig::default();
        let err = cfg
            .apply_text("# header\nseed=1\nkappa\n", Path::new("c.conf"))
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = cfg
            .apply_text("colour=blue\n", Path::new("c.conf"))
            .unwrap_err();
        assert!(err.to_string().contains("unknown key"));
        assert!(cfg.set("boot", "-3").is_err());
    }

    #[test]
    fn validation_covers_sub_configs() {
        let mut cfg = RunConfig::default();
        cfg.pipeline.window.c_beta = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.trac.b = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn methods_tag_their_decisions() {
        let s =
            generate(&Scenario::new(ScenarioKind::CubicAnm, 120, 3).with_param("sigma_eps", 0.02))
                .unwrap();
        let mut cfg = RunConfig::default();
        cfg.threshold.r = 5;
        cfg.trac.b = 5;
        for m in Method::ALL {
            let out = run_method(&s, m, &cfg).unwrap();
            assert_eq!(out.decision.method, m);
            assert_eq!(out.decision.score, out.score.score);
            assert_eq!(out.tau.is_some(), m != Method::Trac);
            assert_eq!(out.p_value.is_some(), m == Method::Trac);
        }
        let out = run_method(&s, Method::Tra, &cfg).unwrap();
        assert_eq!(out.decision.verdict, Verdict::XtoY);
    }
}
