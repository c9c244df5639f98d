//! Confounding-aware abstention: fit a Gaussian copula to the pair, resample
//! "dependence without direction" datasets from it, and only report a
//! direction when the observed `|score|` is extreme against that null.

use rayon::prelude::*;

use crate::copula::{normal_cdf, rank_gaussianize};
use crate::error::{Error, Result};
use crate::rng::{mix, normal_vec, rng_from_seed};
use crate::sample::PairSample;
use crate::scoring::{score, Decision, Method, PipelineConfig, ScoreVariant, Verdict};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracConfig {
    pub b: usize,
    pub alpha: f64,
    pub score_variant: ScoreVariant,
    pub seed: u64,
    /// `ρ̂` is clipped to `±(1 - rho_clip)`.
    pub rho_clip: f64,
}

impl Default for TracConfig {
    fn default() -> Self {
        Self {
            b: 500,
            alpha: 0.10,
            score_variant: ScoreVariant::Tra,
            seed: 0,
            rho_clip: 1e-3,
        }
    }
}

impl TracConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b == 0 {
            return Err(Error::InvalidConfig(
                "bootstrap count B must be >= 1".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.rho_clip > 0.0 && self.rho_clip < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "rho_clip must lie in (0, 1), got {}",
                self.rho_clip
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracResult {
    pub p_value: f64,
    pub rho_hat: f64,
    /// `|score|` on the observed sample.
    pub s_obs: f64,
    pub verdict: Decision,
    /// `|score|` on each null replicate, in replicate order.
    pub null_scores: Vec<f64>,
}

/// Pearson correlation of the rank-Gaussianized margins, clipped.
pub fn fit_gaussian_copula_rho(sample: &PairSample, rho_clip: f64) -> Result<f64> {
    if sample.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "copula fit needs at least 3 observations, got {}",
            sample.len()
        )));
    }
    let zx = rank_gaussianize(sample.x())?;
    let zy = rank_gaussianize(sample.y())?;
    let n = zx.len() as f64;
    let mx = zx.iter().sum::<f64>() / n;
    let my = zy.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in zx.iter().zip(&zy) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateInput(
            "zero variance after Gaussianization".into(),
        ));
    }
    let bound = 1.0 - rho_clip;
    Ok((sxy / (sxx * syy).sqrt()).clamp(-bound, bound))
}

/// Type-1 inverse: the order statistic at `⌈u·n⌉`, clamped to `[1, n]`.
pub fn empirical_inverse_cdf(sorted: &[f64], u: f64) -> f64 {
    let n = sorted.len();
    let k = (u * n as f64).ceil().clamp(1.0, n as f64) as usize;
    sorted[k - 1]
}

/// `n` draws from the fitted Gaussian copula pushed through the empirical
/// marginals.
pub fn sample_null(
    rho_hat: f64,
    x_sorted: &[f64],
    y_sorted: &[f64],
    n: usize,
    seed: u64,
) -> Result<PairSample> {
    let mut rng = rng_from_seed(seed);
    let zx = normal_vec(&mut rng, n);
    let w = normal_vec(&mut rng, n);
    let c = (1.0 - rho_hat * rho_hat).sqrt();
    let (x, y) = zx
        .iter()
        .zip(&w)
        .map(|(&zx, &w)| {
            let zy = rho_hat * zx + c * w;
            (
                empirical_inverse_cdf(x_sorted, normal_cdf(zx)),
                empirical_inverse_cdf(y_sorted, normal_cdf(zy)),
            )
        })
        .unzip();
    PairSample::with_source(
        x,
        y,
        format!("gaussian-copula-null rho={rho_hat} seed={seed}"),
    )
}

/// `(1 + #{null ≥ s_obs}) / (B + 1)`.
pub fn monte_carlo_pvalue(s_obs: f64, null_scores: &[f64]) -> f64 {
    let exceed = null_scores.iter().filter(|&&s| s >= s_obs).count();
    (1 + exceed) as f64 / (null_scores.len() + 1) as f64
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Bootstrap test with an arbitrary signed scorer `(sample, seed) -> score`.
pub fn trac_with_scorer<F>(sample: &PairSample, cfg: &TracConfig, scorer: F) -> Result<TracResult>
where
    F: Fn(&PairSample, u64) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let n = sample.len();
    let rho_hat = fit_gaussian_copula_rho(sample, cfg.rho_clip)?;
    let signed = scorer(sample, cfg.seed)?;
    let s_obs = signed.abs();
    let xs = sorted(sample.x());
    let ys = sorted(sample.y());
    let null_scores = (0..cfg.b)
        .into_par_iter()
        .map(|b| {
            let rep_seed = mix(cfg.seed, b as u64);
            sample_null(rho_hat, &xs, &ys, n, rep_seed)
                .and_then(|null| scorer(&null, mix(rep_seed, 0)))
                .map(f64::abs)
                .map_err(|e| Error::BootstrapFailure {
                    index: b,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    let p_value = monte_carlo_pvalue(s_obs, &null_scores);
    let verdict = if p_value > cfg.alpha || signed == 0.0 {
        Verdict::Abstain
    } else if signed > 0.0 {
        Verdict::XtoY
    } else {
        Verdict::YtoX
    };
    Ok(TracResult {
        p_value,
        rho_hat,
        s_obs,
        verdict: Decision {
            verdict,
            score: signed,
            threshold_or_pvalue: p_value,
            method: Method::Trac,
        },
        null_scores,
    })
}

/// TRA-C with the configured TRA or TRA-s score.
pub fn trac_pvalue(
    sample: &PairSample,
    cfg: &TracConfig,
    pipeline: &PipelineConfig,
) -> Result<TracResult> {
    pipeline.validate()?;
    trac_with_scorer(sample, cfg, |s, seed| {
        score(cfg.score_variant, s, seed, pipeline).map(|r| r.score)
    })
}
