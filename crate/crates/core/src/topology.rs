//! Euclidean minimum spanning trees and the windowed 0-dimensional persistence
//! profile.
//!
//! In the Vietoris–Rips filtration every finite H₀ death time is an MST edge
//! length, so the persistence profile only needs the MST length multiset.

use crate::error::{Error, Result};

/// Mesoscopic scale parameters: `alpha = kappa * n^(-2/3)`, `beta = c_beta * alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowConfig {
    pub kappa: f64,
    pub c_beta: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            c_beta: 2.0,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !(self.c_beta > 1.0 && self.c_beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "c_beta must exceed 1, got {}",
                self.c_beta
            )));
        }
        Ok(())
    }
}

/// `(alpha, beta)` for a cloud of `n` points.
pub fn mesoscopic_window(n: usize, cfg: &WindowConfig) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "window needs n >= 2, got {n}"
        )));
    }
    cfg.validate()?;
    let alpha = cfg.kappa * (n as f64).powf(-2.0 / 3.0);
    Ok((alpha, cfg.c_beta * alpha))
}

/// Edge lengths of a Euclidean minimum spanning tree (n − 1 values).
#[derive(Debug, Clone, PartialEq)]
pub struct MstEdges {
    pub lengths: Vec<f64>,
}

impl MstEdges {
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.lengths.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn max(&self) -> f64 {
        self.lengths.iter().copied().fold(0.0, f64::max)
    }
}

fn check_points(points: &[[f64; 2]]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    Ok(())
}

#[inline]
fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Dense Prim: O(n²) time, O(n) memory, distances computed on the fly.
pub fn euclidean_mst(points: &[[f64; 2]]) -> Result<MstEdges> {
    check_points(points)?;
    let n = points.len();
    let mut best = vec![f64::INFINITY; n];
    let mut in_tree = vec![false; n];
    let mut lengths = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let p = points[current];
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = dist2(&p, &points[j]);
            if d < best[j] {
                best[j] = d;
            }
            if best[j] < next_d || next == usize::MAX {
                next_d = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        lengths.push(next_d.sqrt());
        current = next;
    }
    Ok(MstEdges { lengths })
}

/// `(min(t, beta) − alpha)₊`.
pub fn psi_window(t: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_window(alpha, beta)?;
    Ok(psi(t, alpha, beta))
}

#[inline]
fn psi(t: f64, alpha: f64, beta: f64) -> f64 {
    (t.min(beta) - alpha).max(0.0)
}

fn check_window(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha < beta && beta.is_finite()) {
        return Err(Error::InvalidWindow { alpha, beta });
    }
    Ok(())
}

/// Normalized windowed persistence of an MST length multiset, in `[0, 1]`.
pub fn tp_from_edges(edges: &MstEdges, alpha: f64, beta: f64) -> Result<f64> {
    check_window(alpha, beta)?;
    if edges.lengths.is_empty() {
        return Err(Error::InsufficientData("no MST edges".into()));
    }
    let total: f64 = edges.lengths.iter().map(|&w| psi(w, alpha, beta)).sum();
    Ok(total / (edges.lengths.len() as f64 * (beta - alpha)))
}

/// Windowed 0-persistence profile of a point cloud at scales `[alpha, beta]`.
///
/// Near 1 when most MST edges are longer than `beta` (bulk), near 0 when most
/// fall below `alpha` (tube).
pub fn tp_profile(points: &[[f64; 2]], alpha: f64, beta: f64) -> Result<f64> {
    check_window(alpha, beta)?;
    tp_from_edges(&euclidean_mst(points)?, alpha, beta)
}

/// Largest cloud accepted by [`single_linkage_deaths`].
pub const ORACLE_MAX_POINTS: usize = 200;

/// Merge heights of naive agglomerative single-linkage clustering.
///
/// O(n³) reference used to cross-check [`euclidean_mst`]; it shares no code
/// with the Prim implementation.
pub fn single_linkage_deaths(points: &[[f64; 2]]) -> Result<Vec<f64>> {
    check_points(points)?;
    let n = points.len();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::OracleSizeExceeded {
            n,
            max: ORACLE_MAX_POINTS,
        });
    }
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut deaths = Vec::with_capacity(n - 1);
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 1);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut link = f64::INFINITY;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        let (dx, dy) = (points[i][0] - points[j][0], points[i][1] - points[j][1]);
                        link = link.min(dx.hypot(dy));
                    }
                }
                if link < best.0 {
                    best = (link, a, b);
                }
            }
        }
        let (h, a, b) = best;
        let merged = clusters.swap_remove(b);
        clusters[a].extend(merged);
        deaths.push(h);
    }
    Ok(deaths)
}
