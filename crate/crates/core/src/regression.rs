//! Cross-fitted nonparametric regression in both directions.
//!
//! The smoother is a penalized cubic B-spline (P-spline) with interior knots at
//! empirical quantiles of the regressor. The roughness penalty is the sum of
//! squared second differences of the coefficients (divided differences over
//! the Greville abscissae, so affine functions carry no penalty). The penalty
//! weight is picked by GCV over a fixed grid.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::sample::PairSample;

const DEGREE: usize = 3;

/// Penalty selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    #[default]
    Gcv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmootherConfig {
    /// Upper bound on the number of interior knots. The effective count for a
    /// training set of size `n` is `clamp(n / 4, 4, basis_knots)`.
    pub basis_knots: usize,
    pub penalty_grid: Vec<f64>,
    pub selection: Selection,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            basis_knots: 35,
            penalty_grid: log_grid(1e-6, 1e2, 20),
            selection: Selection::Gcv,
        }
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

impl SmootherConfig {
    pub fn validate(&self) -> Result<()> {
        if self.basis_knots < 4 {
            return Err(Error::InvalidConfig(format!(
                "basis_knots must be >= 4, got {}",
                self.basis_knots
            )));
        }
        if self.penalty_grid.is_empty() {
            return Err(Error::InvalidConfig("penalty_grid is empty".into()));
        }
        if self.penalty_grid.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidConfig(
                "penalty_grid entries must be finite and nonnegative".into(),
            ));
        }
        if self.penalty_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "penalty_grid must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    fn knots_for(&self, n: usize) -> usize {
        (n / 4).clamp(4, self.basis_knots)
    }
}

/// Anything that can be evaluated at a regressor value.
pub trait Predictor {
    fn predict(&self, x: f64) -> f64;
}

/// A fitted penalized cubic spline with linear extrapolation.
#[derive(Debug, Clone)]
pub struct SmootherModel {
    lo: f64,
    width: f64,
    /// Clamped knot vector on the normalized axis `[0, 1]`.
    knots: Vec<f64>,
    coef: Vec<f64>,
    value_lo: f64,
    value_hi: f64,
    slope_lo: f64,
    slope_hi: f64,
    pub lambda: f64,
    pub edf: f64,
    pub gcv: f64,
}

impl Predictor for SmootherModel {
    fn predict(&self, x: f64) -> f64 {
        let t = (x - self.lo) / self.width;
        if t < 0.0 {
            self.value_lo + self.slope_lo * (x - self.lo)
        } else if t > 1.0 {
            self.value_hi + self.slope_hi * (x - self.lo - self.width)
        } else {
            self.eval_normalized(t)
        }
    }
}

impl SmootherModel {
    fn eval_normalized(&self, t: f64) -> f64 {
        let (first, vals) = basis_row(&self.knots, self.coef.len(), t);
        vals.iter()
            .enumerate()
            .map(|(j, b)| b * self.coef[first + j])
            .sum()
    }

    pub fn predict_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.predict(x)).collect()
    }
}

/// Index of the knot span containing `t` (clamped to the valid range).
fn find_span(knots: &[f64], n_basis: usize, t: f64) -> usize {
    if t >= knots[n_basis] {
        return n_basis - 1;
    }
    if t <= knots[DEGREE] {
        return DEGREE;
    }
    // knots[DEGREE..=n_basis] is sorted; find last index with knots[i] <= t
    let slice = &knots[DEGREE..=n_basis];
    DEGREE + slice.partition_point(|&k| k <= t) - 1
}

/// The four nonzero cubic B-spline values at `t` and the index of the first.
fn basis_row(knots: &[f64], n_basis: usize, t: f64) -> (usize, [f64; DEGREE + 1]) {
    let span = find_span(knots, n_basis, t);
    let mut n = [0.0; DEGREE + 1];
    let mut left = [0.0; DEGREE + 1];
    let mut right = [0.0; DEGREE + 1];
    n[0] = 1.0;
    for j in 1..=DEGREE {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom > 0.0 { n[r] / denom } else { 0.0 };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    (span - DEGREE, n)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Roughness penalty matrix `DᵀD`.
///
/// Row `j` of `D` is the second divided difference of the coefficients over
/// the Greville abscissae, scaled by the squared mean abscissa spacing. On
/// equally spaced abscissae this is the ordinary P-spline second difference
/// `c[j+1] - 2c[j] + c[j-1]`; in general it annihilates affine functions.
fn penalty_matrix(knots: &[f64], n_basis: usize) -> DMatrix<f64> {
    let greville: Vec<f64> = (0..n_basis)
        .map(|j| knots[j + 1..=j + DEGREE].iter().sum::<f64>() / DEGREE as f64)
        .collect();
    let mean_h = (greville[n_basis - 1] - greville[0]) / (n_basis - 1) as f64;
    let mut p = DMatrix::zeros(n_basis, n_basis);
    for j in 1..n_basis - 1 {
        let h0 = greville[j] - greville[j - 1];
        let h1 = greville[j + 1] - greville[j];
        let half = 0.5 * (h0 + h1);
        let s = mean_h * mean_h / half;
        let row = [s / h0, -s * (1.0 / h0 + 1.0 / h1), s / h1];
        for a in 0..3 {
            for b in 0..3 {
                p[(j - 1 + a, j - 1 + b)] += row[a] * row[b];
            }
        }
    }
    p
}

/// Fit a penalized cubic spline of `y` on `x`.
pub fn fit_smoother(x: &[f64], y: &[f64], cfg: &SmootherConfig) -> Result<SmootherModel> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "x has {} values but y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "smoother needs at least 8 points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "non-finite value in smoother input".into(),
        ));
    }
    let n = x.len();
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Err(Error::DegenerateRegressor);
    }
    let width = hi - lo;
    let t: Vec<f64> = x
        .iter()
        .map(|v| ((v - lo) / width).clamp(0.0, 1.0))
        .collect();

    let mut sorted = t.clone();
    sorted.sort_by(f64::total_cmp);
    let k = cfg.knots_for(n);
    let mut interior: Vec<f64> = (1..=k)
        .map(|j| quantile_sorted(&sorted, j as f64 / (k + 1) as f64))
        .filter(|&q| q > 1e-9 && q < 1.0 - 1e-9)
        .collect();
    interior.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let mut knots = vec![0.0; DEGREE + 1];
    knots.extend_from_slice(&interior);
    knots.extend(std::iter::repeat_n(1.0, DEGREE + 1));
    let p = knots.len() - DEGREE - 1;

    let rows: Vec<(usize, [f64; DEGREE + 1])> =
        t.iter().map(|&ti| basis_row(&knots, p, ti)).collect();
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    for ((first, vals), &yi) in rows.iter().zip(y) {
        for a in 0..=DEGREE {
            rhs[first + a] += vals[a] * yi;
            for b in 0..=DEGREE {
                gram[(first + a, first + b)] += vals[a] * vals[b];
            }
        }
    }
    let penalty = penalty_matrix(&knots, p);

    let nf = n as f64;
    let mut best: Option<(f64, f64, f64, DVector<f64>)> = None;
    for &lambda in &cfg.penalty_grid {
        let system = &gram + &penalty * lambda;
        let Some(chol) = cholesky_with_jitter(system) else {
            continue;
        };
        let coef = chol.solve(&rhs);
        let edf = chol.solve(&gram).trace();
        let rss: f64 = rows
            .iter()
            .zip(y)
            .map(|((first, vals), &yi)| {
                let fit: f64 = (0..=DEGREE).map(|a| vals[a] * coef[first + a]).sum();
                (yi - fit).powi(2)
            })
            .sum();
        let dof = nf - edf;
        if dof <= 0.0 {
            continue;
        }
        let gcv = nf * rss / (dof * dof);
        if best.as_ref().is_none_or(|b| gcv < b.0) {
            best = Some((gcv, lambda, edf, coef));
        }
    }
    let (gcv, lambda, edf, coef) = best.ok_or_else(|| {
        Error::InvalidInput("no penalty in the grid produced a solvable fit".into())
    })?;

    let coef: Vec<f64> = coef.iter().copied().collect();
    let value_lo = coef[0];
    let value_hi = coef[p - 1];
    // endpoint derivatives of a clamped spline, converted back to x units
    let slope_lo = DEGREE as f64 * (coef[1] - coef[0]) / (knots[DEGREE + 1] - knots[1]) / width;
    let slope_hi = DEGREE as f64 * (coef[p - 1] - coef[p - 2])
        / (knots[p + DEGREE - 1] - knots[p - 1])
        / width;

    Ok(SmootherModel {
        lo,
        width,
        knots,
        coef,
        value_lo,
        value_hi,
        slope_lo,
        slope_hi,
        lambda,
        edf,
        gcv,
    })
}

fn cholesky_with_jitter(system: DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = system.clone().cholesky() {
        return Some(c);
    }
    let scale = system.trace() / system.nrows() as f64;
    let mut jitter = 1e-12 * scale.max(1e-300);
    for _ in 0..8 {
        let mut m = system.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(c) = m.cholesky() {
            return Some(c);
        }
        jitter *= 100.0;
    }
    None
}

/// A deterministic K-fold partition of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub n: usize,
    pub k: usize,
    /// Fold index in `0..k` for every observation.
    pub fold_of: Vec<usize>,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle of `0..n`, then a contiguous split into `k` near-equal folds.
pub fn assign_folds(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "fold count must be >= 2, got {k}"
        )));
    }
    if n < 2 * k {
        return Err(Error::InsufficientData(format!(
            "{n} observations are too few for {k} folds (need {})",
            2 * k
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng_from_seed(seed));
    let base = n / k;
    let extra = n % k;
    let mut fold_of = vec![0; n];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &i in &perm[pos..pos + size] {
            fold_of[i] = fold;
        }
        pos += size;
    }
    Ok(FoldAssignment {
        n,
        k,
        fold_of,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    YgivenX,
    XgivenY,
}

/// Points `(regressor, out-of-fold residual)` for one regression direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCloud {
    pub points: Vec<[f64; 2]>,
    pub direction: Direction,
}

impl ResidualCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn regressors(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[0]).collect()
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[1]).collect()
    }
}

/// Out-of-fold residuals of `target` regressed on `regressor`.
pub(crate) fn cross_fit_direction<M, F>(
    regressor: &[f64],
    target: &[f64],
    folds: &FoldAssignment,
    mut fit: F,
) -> Result<Vec<f64>>
where
    M: Predictor,
    F: FnMut(&[f64], &[f64]) -> Result<M>,
{
    let mut residuals = vec![0.0; regressor.len()];
    for fold in 0..folds.k {
        let train = folds.train_indices(fold);
        let tx: Vec<f64> = train.iter().map(|&i| regressor[i]).collect();
        let ty: Vec<f64> = train.iter().map(|&i| target[i]).collect();
        let model = fit(&tx, &ty)?;
        for i in folds.test_indices(fold) {
            residuals[i] = target[i] - model.predict(regressor[i]);
        }
    }
    Ok(residuals)
}

/// Cross-fitted residual clouds for `Y|X` and `X|Y`.
pub fn cross_fit_residuals(
    sample: &PairSample,
    folds: &FoldAssignment,
    cfg: &SmootherConfig,
) -> Result<(ResidualCloud, ResidualCloud)> {
    if folds.n != sample.len() {
        return Err(Error::InvalidInput(format!(
            "fold assignment covers {} points but sample has {}",
            folds.n,
            sample.len()
        )));
    }
    let (x, y) = (sample.x(), sample.y());
    let fit = |a: &[f64], b: &[f64]| fit_smoother(a, b, cfg);
    let r_yx = cross_fit_direction(x, y, folds, fit)?;
    let r_xy = cross_fit_direction(y, x, folds, fit)?;
    let cloud = |reg: &[f64], res: Vec<f64>, direction| ResidualCloud {
        points: reg.iter().zip(res).map(|(&a, b)| [a, b]).collect(),
        direction,
    };
    Ok((
        cloud(x, r_yx, Direction::YgivenX),
        cloud(y, r_xy, Direction::XgivenY),
    ))
}
