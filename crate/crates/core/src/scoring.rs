//! TRA and TRA-s direction scores, stability thresholds and the symmetric
//! reject rule.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::copula::{copula_standardize_with, normal_quantile, rank_transform_with, TieRule};
use crate::error::{Error, Result};
use crate::regression::{assign_folds, cross_fit_residuals, ResidualCloud, SmootherConfig};
use crate::rng::{mix, rng_from_seed, subsample_indices};
use crate::sample::PairSample;
use crate::topology::{mesoscopic_window, tp_profile, WindowConfig};

pub const MIN_TRA_SAMPLES: usize = 20;
pub const MIN_TRAS_SAMPLES: usize = 40;

/// Scale applied to reverse residuals before bin-averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualScaling {
    /// Divide by the sample standard deviation.
    #[default]
    Standardized,
    Raw,
}

/// Everything a scorer needs besides the data and the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub window: WindowConfig,
    pub folds: usize,
    pub smoother: SmootherConfig,
    pub ties: TieRule,
    pub scaling: ResidualScaling,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window: WindowConfig::default(),
            folds: 5,
            smoother: SmootherConfig::default(),
            ties: TieRule::StableOrder,
            scaling: ResidualScaling::Standardized,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        self.smoother.validate()?;
        if self.folds < 2 {
            return Err(Error::InvalidConfig(format!(
                "fold count must be >= 2, got {}",
                self.folds
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScoreVariant {
    Tra,
    Tras,
}

/// A signed direction score.
///
/// `score = tp_forward - tp_reverse` for both variants. For TRA the two terms
/// are the persistence profiles of the `Y|X` and `X|Y` copula clouds; for
/// TRA-s they are the one-orientation statistics for `X→Y` and `Y→X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreResult {
    pub score: f64,
    pub tp_forward: f64,
    pub tp_reverse: f64,
    pub variant: ScoreVariant,
    pub diagnostics: BTreeMap<String, f64>,
}

fn cross_fit_copula(
    sample: &PairSample,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<(ResidualCloud, ResidualCloud)> {
    cfg.validate()?;
    let folds = assign_folds(sample.len(), cfg.folds, seed)?;
    cross_fit_residuals(sample, &folds, &cfg.smoother)
}

/// TRA score: TP of the `Y|X` copula cloud minus TP of the `X|Y` copula cloud.
pub fn tra_score(sample: &PairSample, seed: u64, cfg: &PipelineConfig) -> Result<ScoreResult> {
    let n = sample.len();
    if n < MIN_TRA_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "TRA needs at least {MIN_TRA_SAMPLES} observations, got {n}"
        )));
    }
    let (yx, xy) = cross_fit_copula(sample, seed, cfg)?;
    let (alpha, beta) = mesoscopic_window(n, &cfg.window)?;
    let fwd = copula_standardize_with(&yx, cfg.ties)?;
    let rev = copula_standardize_with(&xy, cfg.ties)?;
    let tp_forward = tp_profile(&fwd.points, alpha, beta)?;
    let tp_reverse = tp_profile(&rev.points, alpha, beta)?;
    let diagnostics = BTreeMap::from([("alpha".to_string(), alpha), ("beta".to_string(), beta)]);
    Ok(ScoreResult {
        score: tp_forward - tp_reverse,
        tp_forward,
        tp_reverse,
        variant: ScoreVariant::Tra,
        diagnostics,
    })
}

/// Bin count `max(4, ⌈n^(2/5)⌉)`, computed exactly in integers.
pub fn choose_bins(n: usize) -> usize {
    let target = (n as u128) * (n as u128);
    // float guess, then correct to the smallest b with b^5 >= n^2
    let mut b = ((n as f64).powf(0.4).ceil() as u128).max(1);
    while b > 1 && (b - 1).pow(5) >= target {
        b -= 1;
    }
    while b.pow(5) < target {
        b += 1;
    }
    (b as usize).max(4)
}

/// Bin-averaged cloud along the copula axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedCloud {
    /// `(mean u, mean residual)` for each nonempty bin, in bin order.
    pub points: Vec<[f64; 2]>,
    pub bins: usize,
    /// Occupancy `N_b` of every bin, empty ones included.
    pub occupancy: Vec<usize>,
}

impl BinnedCloud {
    pub fn nonempty(&self) -> usize {
        self.points.len()
    }
}

/// 0-based index of the bin `((b-1)/B, b/B]` containing `u`.
fn bin_of(u: f64, bins: usize) -> usize {
    let bf = bins as f64;
    let mut b = ((u * bf).ceil() as usize).clamp(1, bins);
    // correct for rounding in u * B at bin edges
    while b > 1 && u <= (b - 1) as f64 / bf {
        b -= 1;
    }
    while b < bins && u > b as f64 / bf {
        b += 1;
    }
    b - 1
}

/// Average residuals within equal-width bins of `u` on `(0, 1]`.
pub fn bin_reverse_cloud(u: &[f64], residuals: &[f64], bins: usize) -> Result<BinnedCloud> {
    if u.len() != residuals.len() {
        return Err(Error::InvalidInput(format!(
            "{} copula coordinates but {} residuals",
            u.len(),
            residuals.len()
        )));
    }
    if bins < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    let mut occupancy = vec![0usize; bins];
    let mut sum_u = vec![0.0; bins];
    let mut sum_r = vec![0.0; bins];
    for (&ui, &ri) in u.iter().zip(residuals) {
        let b = bin_of(ui, bins);
        occupancy[b] += 1;
        sum_u[b] += ui;
        sum_r[b] += ri;
    }
    let points = (0..bins)
        .filter(|&b| occupancy[b] > 0)
        .map(|b| {
            let n = occupancy[b] as f64;
            [sum_u[b] / n, sum_r[b] / n]
        })
        .collect();
    Ok(BinnedCloud {
        points,
        bins,
        occupancy,
    })
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.iter().all(|x| *x == v[0]) {
        return 0.0;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

struct Orientation {
    statistic: f64,
    tp_cloud: f64,
    tp_binned: f64,
    nonempty: usize,
}

/// One-orientation TRA-s statistic: TP of the copula cloud of `forward` minus
/// TP of the binned `reverse` cloud at the window of its nonempty-bin count.
fn tras_orientation(
    forward: &ResidualCloud,
    reverse: &ResidualCloud,
    bins: usize,
    cfg: &PipelineConfig,
) -> Result<Orientation> {
    let n = forward.len();
    let (alpha, beta) = mesoscopic_window(n, &cfg.window)?;
    let tp_cloud = tp_profile(
        &copula_standardize_with(forward, cfg.ties)?.points,
        alpha,
        beta,
    )?;

    let u = rank_transform_with(&reverse.regressors(), cfg.ties)?;
    let mut r = reverse.residuals();
    if cfg.scaling == ResidualScaling::Standardized {
        let sd = sample_sd(&r);
        if sd > 0.0 {
            r.iter_mut().for_each(|v| *v /= sd);
        }
    }
    let binned = bin_reverse_cloud(&u, &r, bins)?;
    let m = binned.nonempty();
    let (a_bin, b_bin) = mesoscopic_window(m, &cfg.window)?;
    let tp_binned = tp_profile(&binned.points, a_bin, b_bin)?;
    Ok(Orientation {
        statistic: tp_cloud - tp_binned,
        tp_cloud,
        tp_binned,
        nonempty: m,
    })
}

/// Symmetrized TRA-s score `S = Δ̃(X→Y) − Δ̃(Y→X)`.
pub fn tras_score(sample: &PairSample, seed: u64, cfg: &PipelineConfig) -> Result<ScoreResult> {
    let n = sample.len();
    if n < MIN_TRAS_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "TRA-s needs at least {MIN_TRAS_SAMPLES} observations, got {n}"
        )));
    }
    let (yx, xy) = cross_fit_copula(sample, seed, cfg)?;
    let bins = choose_bins(n);
    let xy_dir = tras_orientation(&yx, &xy, bins, cfg)?;
    let yx_dir = tras_orientation(&xy, &yx, bins, cfg)?;
    let diagnostics = BTreeMap::from([
        ("bins".to_string(), bins as f64),
        ("tp_yx".to_string(), xy_dir.tp_cloud),
        ("tp_xy_binned".to_string(), xy_dir.tp_binned),
        ("nonempty_xy".to_string(), xy_dir.nonempty as f64),
        ("tp_xy".to_string(), yx_dir.tp_cloud),
        ("tp_yx_binned".to_string(), yx_dir.tp_binned),
        ("nonempty_yx".to_string(), yx_dir.nonempty as f64),
    ]);
    Ok(ScoreResult {
        score: xy_dir.statistic - yx_dir.statistic,
        tp_forward: xy_dir.statistic,
        tp_reverse: yx_dir.statistic,
        variant: ScoreVariant::Tras,
        diagnostics,
    })
}

pub fn score(
    variant: ScoreVariant,
    sample: &PairSample,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<ScoreResult> {
    match variant {
        ScoreVariant::Tra => tra_score(sample, seed, cfg),
        ScoreVariant::Tras => tras_score(sample, seed, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    pub r: usize,
    pub fraction: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            r: 50,
            fraction: 0.8,
            alpha: 0.10,
            seed: 0,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r < 2 {
            return Err(Error::InvalidConfig(format!(
                "stability R must be >= 2, got {}",
                self.r
            )));
        }
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "subsample fraction must lie in (0, 1), got {}",
                self.fraction
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Two-sided normal multiplier `z_{1-alpha/2}`.
    pub fn multiplier(&self) -> f64 {
        normal_quantile(1.0 - self.alpha / 2.0)
    }
}

/// Scores of `R` seeded subsamples without replacement, in subsample order.
pub fn stability_scores<F>(
    sample: &PairSample,
    scorer: F,
    cfg: &ThresholdConfig,
) -> Result<Vec<f64>>
where
    F: Fn(&PairSample) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let n = sample.len();
    let size = (cfg.fraction * n as f64).floor() as usize;
    (0..cfg.r)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(mix(cfg.seed, r as u64));
            let idx = subsample_indices(&mut rng, n, size);
            scorer(&sample.select(&idx)).map_err(|e| Error::StabilityFailure {
                index: r,
                source: Box::new(e),
            })
        })
        .collect()
}

/// `tau = z_{1-alpha/2} · sd(scores)` with the `R - 1` divisor.
pub fn threshold_from_scores(scores: &[f64], cfg: &ThresholdConfig) -> f64 {
    cfg.multiplier() * sample_sd(scores)
}

/// Stability threshold from subsample score spread.
pub fn stability_threshold<F>(sample: &PairSample, scorer: F, cfg: &ThresholdConfig) -> Result<f64>
where
    F: Fn(&PairSample) -> Result<f64> + Sync,
{
    let scores = stability_scores(sample, scorer, cfg)?;
    Ok(threshold_from_scores(&scores, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    XtoY,
    YtoX,
    Abstain,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::XtoY => "X->Y",
            Verdict::YtoX => "Y->X",
            Verdict::Abstain => "abstain",
        })
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X->Y" => Ok(Verdict::XtoY),
            "Y->X" => Ok(Verdict::YtoX),
            "abstain" => Ok(Verdict::Abstain),
            other => Err(Error::InvalidInput(format!("unknown verdict {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Tra,
    Tras,
    Trac,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Tra, Method::Tras, Method::Trac];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Tra => "tra",
            Method::Tras => "tras",
            Method::Trac => "trac",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tra" => Ok(Method::Tra),
            "tras" | "tra-s" => Ok(Method::Tras),
            "trac" | "tra-c" => Ok(Method::Trac),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

/// A verdict with the evidence behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub verdict: Verdict,
    pub score: f64,
    /// `tau` for thresholded scores, the p-value for TRA-C.
    pub threshold_or_pvalue: f64,
    pub method: Method,
}

/// Symmetric reject rule; `|score| == tau` abstains.
pub fn decide(score: f64, tau: f64) -> Decision {
    let verdict = if score > tau {
        Verdict::XtoY
    } else if score < -tau {
        Verdict::YtoX
    } else {
        Verdict::Abstain
    };
    Decision {
        verdict,
        score,
        threshold_or_pvalue: tau,
        method: Method::Tra,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal_vec, rng_from_seed};
    use rand::Rng as _;

    fn cubic(n: usize, sigma: f64, seed: u64) -> PairSample {
        let mut rng = rng_from_seed(seed);
        let x = normal_vec(&mut rng, n);
        let e = normal_vec(&mut rng, n);
        let y = x
            .iter()
            .zip(&e)
            .map(|(a, b)| a.powi(3) + sigma * b)
            .collect();
        PairSample::new(x, y).unwrap()
    }

    #[test]
    fn bins_examples() {
        assert_eq!(choose_bins(32), 4);
        assert_eq!(choose_bins(20), 4);
        assert_eq!(choose_bins(1000), 16);
        assert_eq!(choose_bins(1_000_000), 252);
        assert_eq!(choose_bins(2000), 21);
        // B^(7/3) log B / n decays (slowly: the exponent is n^(-1/15))
        let rate = |n: usize| {
            let b = choose_bins(n) as f64;
            b.powf(7.0 / 3.0) * b.ln() / n as f64
        };
        assert!(rate(1_000_000_000_000_000_000) < rate(1_000_000_000_000));
        assert!(rate(1_000_000_000_000) < rate(1_000_000));
        assert!((choose_bins(1_000_000_000_000) as f64) < 1e-7 * 1e12);
    }

    #[test]
    fn binning_examples() {
        let u: Vec<f64> = (1..=40).map(|i| i as f64 / 41.0).collect();
        let c = bin_reverse_cloud(&u, &[0.0; 40], 8).unwrap();
        assert_eq!(c.nonempty(), 8);
        assert!(c.points.iter().all(|p| p[1] == 0.0));

        let c = bin_reverse_cloud(&[0.1, 0.2, 0.9], &[1.0, 3.0, -5.0], 2).unwrap();
        assert_eq!(c.points.len(), 2);
        assert!((c.points[0][0] - 0.15).abs() < 1e-15);
        assert_eq!(c.points[0][1], 2.0);
        assert_eq!(c.points[1], [0.9, -5.0]);
        assert_eq!(c.occupancy, vec![2, 1]);

        // edges go to the lower bin: (0, 0.5] and (0.5, 1]
        let c = bin_reverse_cloud(&[0.5, 0.3, 0.1 * 3.0], &[0.0; 3], 2).unwrap();
        assert_eq!(c.occupancy, vec![3, 0]);
        assert_eq!(c.nonempty(), 1);
        assert!(bin_reverse_cloud(&[0.5], &[0.0], 1).is_err());
    }

    #[test]
    fn bin_membership_and_conservation() {
        let mut rng = rng_from_seed(3);
        for bins in [2, 3, 7, 10, 16, 33] {
            let u: Vec<f64> = (0..500).map(|_| rng.random::<f64>().max(1e-12)).collect();
            let r = vec![1.0; 500];
            let c = bin_reverse_cloud(&u, &r, bins).unwrap();
            assert_eq!(c.occupancy.iter().sum::<usize>(), 500);
            assert_eq!(c.nonempty(), c.occupancy.iter().filter(|&&k| k > 0).count());
            for &ui in &u {
                let b = bin_of(ui, bins);
                assert!((b as f64) / (bins as f64) < ui && ui <= (b + 1) as f64 / bins as f64);
            }
            let mut k = 0;
            for (b, &occ) in c.occupancy.iter().enumerate() {
                if occ > 0 {
                    let ub = c.points[k][0];
                    assert!((b as f64) / (bins as f64) < ub && ub <= (b + 1) as f64 / bins as f64);
                    k += 1;
                }
            }
        }
    }

    #[test]
    fn binned_rademacher_means_shrink() {
        // 20 bins x 100 points; P(|mean| >= 0.5) per bin <= 2exp(-12.5) by Hoeffding
        let mut hits = 0;
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let n = 2000;
            let u: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
            let r: Vec<f64> = (0..n)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let c = bin_reverse_cloud(&u, &r, 20).unwrap();
            let worst = c.points.iter().map(|p| p[1].abs()).fold(0.0, f64::max);
            if worst < 0.5 {
                hits += 1;
            }
        }
        assert!(hits >= 19);
    }

    #[test]
    fn decide_examples() {
        assert_eq!(decide(0.5, 0.1).verdict, Verdict::XtoY);
        assert_eq!(decide(-0.05, 0.1).verdict, Verdict::Abstain);
        assert_eq!(decide(-0.5, 0.1).verdict, Verdict::YtoX);
        assert_eq!(decide(0.1, 0.1).verdict, Verdict::Abstain);
        assert_eq!(decide(-0.1, 0.1).verdict, Verdict::Abstain);
        assert_eq!(decide(0.0, 0.0).verdict, Verdict::Abstain);
    }

    #[test]
    fn threshold_examples() {
        let cfg = ThresholdConfig::default();
        assert!((cfg.multiplier() - 1.6449).abs() < 1e-4);
        assert_eq!(threshold_from_scores(&[0.3; 10], &cfg), 0.0);
        let s = [0.1, 0.4, -0.2, 0.3];
        let d: Vec<f64> = s.iter().map(|v| 2.0 * v).collect();
        let t1 = threshold_from_scores(&s, &cfg);
        assert!((threshold_from_scores(&d, &cfg) - 2.0 * t1).abs() < 1e-15);
        // sd with divisor R-1 of [0.1, 0.4, -0.2, 0.3] is sqrt(0.07)
        assert!((t1 - cfg.multiplier() * 0.07f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_scorer_gives_zero_threshold() {
        let s = cubic(100, 0.1, 1);
        let tau = stability_threshold(&s, |_| Ok(0.25), &ThresholdConfig::default()).unwrap();
        assert_eq!(tau, 0.0);
    }

    #[test]
    fn stability_is_order_independent_and_reports_failures() {
        let s = cubic(60, 0.1, 2);
        let cfg = ThresholdConfig {
            r: 12,
            ..Default::default()
        };
        let scorer = |p: &PairSample| Ok(p.x().iter().sum::<f64>());
        let a = stability_scores(&s, scorer, &cfg).unwrap();
        let b = stability_scores(&s, scorer, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
        let err = stability_scores(&s, |_| Err(Error::DegenerateRegressor), &cfg).unwrap_err();
        assert!(matches!(err, Error::StabilityFailure { .. }));
        assert!(stability_scores(&s, scorer, &ThresholdConfig { r: 1, ..cfg }).is_err());
        assert!(stability_scores(
            &s,
            scorer,
            &ThresholdConfig {
                fraction: 1.0,
                ..cfg
            }
        )
        .is_err());
    }

    #[test]
    fn tra_score_is_antisymmetric_and_bounded() {
        let cfg = PipelineConfig::default();
        for seed in 0..5 {
            let s = cubic(120, 0.3, seed);
            let a = tra_score(&s, 9, &cfg).unwrap();
            let b = tra_score(&s.swapped(), 9, &cfg).unwrap();
            assert_eq!(a.score, -b.score);
            assert_eq!(a.tp_forward, b.tp_reverse);
            assert!((-1.0..=1.0).contains(&a.score));
            assert!((0.0..=1.0).contains(&a.tp_forward) && (0.0..=1.0).contains(&a.tp_reverse));
        }
    }

    #[test]
    fn tras_score_is_antisymmetric_and_bounded() {
        let cfg = PipelineConfig::default();
        for seed in 0..5 {
            let s = cubic(150, 0.5, seed);
            let a = tras_score(&s, 4, &cfg).unwrap();
            let b = tras_score(&s.swapped(), 4, &cfg).unwrap();
            assert_eq!(a.score, -b.score);
            assert!((-1.0..=1.0).contains(&a.tp_forward));
            assert!((-1.0..=1.0).contains(&a.tp_reverse));
            assert_eq!(a.diagnostics["bins"], choose_bins(150) as f64);
        }
    }

    #[test]
    fn scores_reject_small_samples() {
        let cfg = PipelineConfig::default();
        assert!(matches!(
            tra_score(&cubic(19, 0.1, 0), 0, &cfg),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            tras_score(&cubic(39, 0.1, 0), 0, &cfg),
            Err(Error::InsufficientData(_))
        ));
        assert!(tra_score(&cubic(20, 0.1, 0), 0, &cfg).is_ok());
    }

    #[test]
    fn copula_step_ignores_monotone_marginal_maps() {
        let s = cubic(200, 0.2, 5);
        let folds = assign_folds(200, 5, 1).unwrap();
        let (yx, _) = cross_fit_residuals(&s, &folds, &SmootherConfig::default()).unwrap();
        let warped = ResidualCloud {
            points: yx
                .points
                .iter()
                .map(|p| [p[0].exp(), p[1].powi(3) + p[1]])
                .collect(),
            direction: yx.direction,
        };
        assert_eq!(
            copula_standardize_with(&yx, TieRule::StableOrder).unwrap(),
            copula_standardize_with(&warped, TieRule::StableOrder).unwrap()
        );
    }

    #[test]
    fn method_and_verdict_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        for v in [Verdict::XtoY, Verdict::YtoX, Verdict::Abstain] {
            assert_eq!(v.to_string().parse::<Verdict>().unwrap(), v);
        }
        assert!("resit".parse::<Method>().is_err());
    }
}
