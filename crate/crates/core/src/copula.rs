//! Rank-based copula coordinates.
//!
//! `rank_transform` maps a sample to pseudo-observations `rank/(n+1)`, and
//! `rank_gaussianize` pushes those through the standard normal quantile.

use crate::error::{Error, Result};
use crate::regression::ResidualCloud;

/// How tied values are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    /// Ties are broken by ascending original index.
    #[default]
    StableOrder,
    /// Tied values share the mean of their ranks.
    Average,
}

/// A copula-standardized cloud: both coordinates lie in `[1/(n+1), n/(n+1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaCloud {
    pub points: Vec<[f64; 2]>,
}

impl CopulaCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::InvalidInput(format!(
            "non-finite value at index {i}"
        ))),
        None => Ok(()),
    }
}

/// 1-based ranks of `v` as reals.
pub fn ranks(v: &[f64], ties: TieRule) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::InsufficientData(
            "cannot rank an empty vector".into(),
        ));
    }
    check_finite(v)?;
    let mut order: Vec<usize> = (0..v.len()).collect();
    // sort_by is stable, so equal values keep index order
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    match ties {
        TieRule::StableOrder => {
            for (r, &i) in order.iter().enumerate() {
                out[i] = (r + 1) as f64;
            }
        }
        TieRule::Average => {
            let mut start = 0;
            while start < order.len() {
                let mut end = start + 1;
                while end < order.len() && v[order[end]] == v[order[start]] {
                    end += 1;
                }
                let avg = (start + 1 + end) as f64 / 2.0;
                for &i in &order[start..end] {
                    out[i] = avg;
                }
                start = end;
            }
        }
    }
    Ok(out)
}

/// Pseudo-observations `rank(v_i)/(n+1)` with stable tie-breaking.
pub fn rank_transform(v: &[f64]) -> Result<Vec<f64>> {
    rank_transform_with(v, TieRule::StableOrder)
}

pub fn rank_transform_with(v: &[f64], ties: TieRule) -> Result<Vec<f64>> {
    let denom = (v.len() + 1) as f64;
    Ok(ranks(v, ties)?.into_iter().map(|r| r / denom).collect())
}

/// Rank-transform the regressor and residual coordinates independently.
pub fn copula_standardize(cloud: &ResidualCloud) -> Result<CopulaCloud> {
    copula_standardize_with(cloud, TieRule::StableOrder)
}

pub fn copula_standardize_with(cloud: &ResidualCloud, ties: TieRule) -> Result<CopulaCloud> {
    let (reg, res): (Vec<f64>, Vec<f64>) = cloud.points.iter().map(|p| (p[0], p[1])).unzip();
    let u = rank_transform_with(&reg, ties)?;
    let v = rank_transform_with(&res, ties)?;
    Ok(CopulaCloud {
        points: u.into_iter().zip(v).map(|(a, b)| [a, b]).collect(),
    })
}

/// `Φ⁻¹(rank(v_i)/(n+1))` for every entry.
pub fn rank_gaussianize(v: &[f64]) -> Result<Vec<f64>> {
    if v.len() < 2 {
        return Err(Error::InsufficientData(
            "rank-Gaussianization needs at least 2 values".into(),
        ));
    }
    Ok(rank_transform(v)?
        .into_iter()
        .map(normal_quantile)
        .collect())
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile, Wichura's AS 241 (PPND16).
///
/// Relative accuracy is about 1e-16 on the open unit interval. Returns
/// `-inf`/`inf` at 0 and 1 and NaN outside `[0, 1]`.
#[allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]
pub fn normal_quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r
                + 67265.770_927_008_700)
                * r
                + 45921.953_931_549_871)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5226.495_278_852_545_5 * r + 28729.085_735_721_943) * r
                + 39307.895_800_092_710)
                * r
                + 21213.794_301_586_595)
                * r
                + 5394.196_021_424_751_1)
                * r
                + 687.187_007_492_057_91)
                * r
                + 42.313_330_701_600_911)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        (((((((7.745_450_142_783_413_7e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_61)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691_4)
            * r
            + 4.630_337_846_156_545_3)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_344_9e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_07)
                * r
                + 0.689_767_334_985_100_05)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_758_8)
                * r
                + 1.0)
    } else {
        let r = r - 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 0.026_532_189_526_576_123)
            * r
            + 0.296_560_571_828_504_89)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114_4)
            * r
            + 6.657_904_643_501_103_3)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_132_6e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_81)
                * r
                + 0.599_832_206_555_887_94)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::Direction;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Quantile by bisection on the erfc-based CDF.
    fn bisect_quantile(p: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0f64, 40.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn cloud(points: Vec<[f64; 2]>) -> ResidualCloud {
        ResidualCloud {
            points,
            direction: Direction::YgivenX,
        }
    }

    #[test]
    fn rank_transform_examples() {
        assert_eq!(
            rank_transform(&[3.2, -1.0, 7.5]).unwrap(),
            vec![0.5, 0.25, 0.75]
        );
        assert_eq!(
            rank_transform(&[1.0, 1.0, 2.0]).unwrap(),
            vec![0.25, 0.5, 0.75]
        );
        assert_eq!(
            rank_transform_with(&[1.0, 1.0, 2.0], TieRule::Average).unwrap(),
            vec![0.375, 0.375, 0.75]
        );
    }

    #[test]
    fn rank_transform_rejects_bad_input() {
        assert!(matches!(
            rank_transform(&[1.0, f64::INFINITY]),
            Err(Error::InvalidInput(_))
        ));
        assert!(rank_transform(&[]).is_err());
    }

    #[test]
    fn copula_standardize_examples() {
        let c = copula_standardize(&cloud(vec![[5.0, -1.0], [9.0, 4.0]])).unwrap();
        assert_eq!(
            c.points,
            vec![[1.0 / 3.0, 1.0 / 3.0], [2.0 / 3.0, 2.0 / 3.0]]
        );

        let base = vec![[0.3, 1.0], [-2.0, -0.5], [1.1, 0.2], [0.0, 3.0]];
        let scaled: Vec<[f64; 2]> = base.iter().map(|p| [p[0], 10.0 * p[1]]).collect();
        let a = copula_standardize(&cloud(base)).unwrap();
        let b = copula_standardize(&cloud(scaled)).unwrap();
        assert_eq!(a, b);
        for p in &a.points {
            assert!(p[0] >= 0.2 && p[0] <= 0.8 && p[1] >= 0.2 && p[1] <= 0.8);
        }
    }

    #[test]
    fn quantile_matches_independent_oracle() {
        let mut p = 1e-12;
        while p < 1.0 - 1e-12 {
            let want = bisect_quantile(p);
            assert_abs_diff_eq!(normal_quantile(p), want, epsilon = 1e-9);
            p = if p < 0.01 { p * 3.0 } else { p + 0.0037 };
        }
        assert_eq!(normal_quantile(0.5), 0.0);
        assert_abs_diff_eq!(
            normal_quantile(0.95),
            1.644_853_626_951_472_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            normal_quantile(0.975),
            1.959_963_984_540_054,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cdf_inverts_quantile() {
        for &p in &[1e-9, 0.001, 0.1, 0.5, 0.77, 0.999] {
            assert_abs_diff_eq!(normal_cdf(normal_quantile(p)), p, epsilon = 1e-13);
        }
    }

    #[test]
    fn rank_gaussianize_three_points() {
        let z = rank_gaussianize(&[10.0, -3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(z[1], bisect_quantile(0.25), epsilon = 1e-12);
        assert_eq!(z[2], 0.0);
        assert_abs_diff_eq!(z[0], bisect_quantile(0.75), epsilon = 1e-12);
        assert_abs_diff_eq!(z[0], 0.6745, epsilon = 1e-4);
        assert!(rank_gaussianize(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn rank_transform_is_monotone_invariant(
            v in prop::collection::vec(-1e3f64..1e3, 1..60),
            shift in -5.0f64..5.0,
            scale in 0.01f64..10.0,
        ) {
            let g: Vec<f64> = v.iter().map(|x| scale * x.powi(3) + (x / 100.0).exp() + shift).collect();
            // rounding can merge nearly equal inputs; only compare when order survived
            let kept = (0..v.len()).all(|i| (0..v.len()).all(|j| (v[i] < v[j]) == (g[i] < g[j])));
            prop_assume!(kept);
            prop_assert_eq!(rank_transform(&v).unwrap(), rank_transform(&g).unwrap());
        }

        #[test]
        fn tie_free_ranks_are_a_permutation(v in prop::collection::hash_set(-100_000i64..100_000, 1..80)) {
            let v: Vec<f64> = v.into_iter().map(|x| x as f64 * 0.5).collect();
            let n = v.len();
            let mut u = rank_transform(&v).unwrap();
            u.sort_by(f64::total_cmp);
            for (i, x) in u.iter().enumerate() {
                prop_assert_eq!(*x, (i + 1) as f64 / (n + 1) as f64);
            }
        }

        #[test]
        fn gaussianized_scores_are_centered_and_odd(v in prop::collection::hash_set(-100_000i64..100_000, 2..200)) {
            let v: Vec<f64> = v.into_iter().map(|x| x as f64).collect();
            let n = v.len() as f64;
            let z = rank_gaussianize(&v).unwrap();
            let mean = z.iter().sum::<f64>() / n;
            prop_assert!(mean.abs() < 3.0 / n.sqrt());
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let zn = rank_gaussianize(&neg).unwrap();
            for (a, b) in z.iter().zip(&zn) {
                prop_assert!((a + b).abs() < 1e-12);
            }
        }
    }
}
