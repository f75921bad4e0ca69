//! Large-`N` behaviour of the peeling decoder by and-or tree evaluation.
//!
//! With Poisson slot degrees (mean `G`) and Poisson user degrees (mean
//! `(M/N) G`) the edge- and node-perspective distributions coincide, and the
//! probability `x` that a user is still unresolved obeys
//!
//! ```text
//! x <- exp(-(M/N) G exp(-G x)),   x_0 = 1
//! ```
//!
//! The limit gives `P_R = 1 - x` and throughput `T = P_R / (M/N)`.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::report::fmt_sig;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// A jump in `P_R` between adjacent grid points larger than this marks the
/// avalanche.
pub const AVALANCHE_JUMP: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub p_resolve: f64,
    pub throughput: f64,
    pub iterations: usize,
    /// False if `max_iter` ran out before the step fell below `tol`.
    pub converged: bool,
}

fn check_inputs(target_degree: f64, ratio: f64) -> Result<()> {
    if !(target_degree > 0.0) {
        return Err(Error::param("target_degree", "must be positive"));
    }
    if !(ratio > 0.0) {
        return Err(Error::param("ratio", "must be positive"));
    }
    Ok(())
}

/// The iteration map `x -> exp(-ratio G exp(-G x))`.
#[inline]
pub fn and_or_map(target_degree: f64, ratio: f64, x: f64) -> f64 {
    (-ratio * target_degree * (-target_degree * x).exp()).exp()
}

pub fn and_or_fixed_point(target_degree: f64, ratio: f64, tol: f64, max_iter: usize) -> Result<FixedPoint> {
    check_inputs(target_degree, ratio)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let mut x = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let next = and_or_map(target_degree, ratio, x);
        iterations += 1;
        let step = (next - x).abs();
        x = next;
        if step < tol {
            converged = true;
            break;
        }
    }
    let p_resolve = (1.0 - x).clamp(0.0, 1.0);
    Ok(FixedPoint {
        p_resolve,
        throughput: p_resolve / ratio,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub ratio: f64,
    pub p_resolve: f64,
    pub throughput: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticCurve {
    pub target_degree: f64,
    pub points: Vec<CurvePoint>,
    /// Grid ratios at which the iteration did not converge.
    pub unconverged: Vec<f64>,
}

impl AsymptoticCurve {
    /// Point of largest throughput (first one on ties).
    pub fn max_throughput(&self) -> CurvePoint {
        let mut best = self.points[0];
        for &p in &self.points[1..] {
            if p.throughput > best.throughput {
                best = p;
            }
        }
        best
    }

    /// First pair of adjacent points whose `P_R` rises by more than
    /// [`AVALANCHE_JUMP`].
    pub fn avalanche(&self) -> Option<(CurvePoint, CurvePoint)> {
        self.points
            .windows(2)
            .find(|w| w[1].p_resolve - w[0].p_resolve > AVALANCHE_JUMP)
            .map(|w| (w[0], w[1]))
    }

    /// CSV with header `ratio,p_resolve,throughput`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "ratio,p_resolve,throughput")?;
        for p in &self.points {
            writeln!(out, "{},{},{}", fmt_sig(p.ratio), fmt_sig(p.p_resolve), fmt_sig(p.throughput))?;
        }
        Ok(())
    }
}

pub fn sweep_curve(target_degree: f64, ratio_grid: &[f64]) -> Result<AsymptoticCurve> {
    if ratio_grid.is_empty() {
        return Err(Error::param("ratio_grid", "must not be empty"));
    }
    if ratio_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("ratio_grid", "must be strictly increasing"));
    }
    let mut points = Vec::with_capacity(ratio_grid.len());
    let mut unconverged = Vec::new();
    for &ratio in ratio_grid {
        let fp = and_or_fixed_point(target_degree, ratio, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        if !fp.converged {
            unconverged.push(ratio);
        }
        points.push(CurvePoint {
            ratio,
            p_resolve: fp.p_resolve,
            throughput: fp.throughput,
        });
    }
    Ok(AsymptoticCurve {
        target_degree,
        points,
        unconverged,
    })
}

/// `lo, lo + step, ...` up to and including `hi` (within rounding).
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(g: f64, r: f64) -> FixedPoint {
        and_or_fixed_point(g, r, 1e-10, DEFAULT_MAX_ITER).unwrap()
    }

    #[test]
    fn past_avalanche() {
        let p = fp(3.12, 1.3);
        assert!(p.converged);
        assert!(p.p_resolve >= 0.93, "{}", p.p_resolve);
        assert!((p.throughput - p.p_resolve / 1.3).abs() < 1e-15);
    }

    #[test]
    fn vanishing_ratio() {
        assert!(fp(3.12, 1e-6).p_resolve < 1e-4);
    }

    #[test]
    fn before_avalanche() {
        assert!(fp(3.12, 1.0).p_resolve < 0.5);
    }

    #[test]
    fn iterates_decrease_monotonically() {
        for &(g, r) in &[(3.12, 1.0), (3.12, 1.07), (3.12, 1.3), (0.5, 2.0), (2.0, 0.8)] {
            let mut x = 1.0;
            for _ in 0..10_000 {
                let next = and_or_map(g, r, x);
                assert!(next <= x + 1e-15, "G={g} r={r}");
                x = next;
            }
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let p = and_or_fixed_point(3.12, 1.066, 1e-15, 3).unwrap();
        assert!(!p.converged);
        assert_eq!(p.iterations, 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(and_or_fixed_point(0.0, 1.0, 1e-9, 10).is_err());
        assert!(and_or_fixed_point(1.0, 0.0, 1e-9, 10).is_err());
        assert!(and_or_fixed_point(1.0, 1.0, 0.0, 10).is_err());
        assert!(sweep_curve(3.0, &[]).is_err());
        assert!(sweep_curve(3.0, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn curve_properties() {
        let grid = linear_grid(0.5, 1.5, 0.005);
        assert_eq!(grid.len(), 201);
        for g in [0.5, 2.0, 3.12] {
            let c = sweep_curve(g, &grid).unwrap();
            assert!(c.unconverged.is_empty());
            for w in c.points.windows(2) {
                assert!(w[1].ratio > w[0].ratio);
                assert!(w[1].p_resolve >= w[0].p_resolve - 1e-12);
            }
            for p in &c.points {
                assert!((0.0..=1.0).contains(&p.p_resolve));
                assert_eq!(p.throughput, p.p_resolve / p.ratio);
            }
        }
    }

    #[test]
    fn fig_anchor_values() {
        let c = sweep_curve(3.12, &linear_grid(0.5, 1.5, 0.005)).unwrap();
        let best = c.max_throughput();
        assert!((0.87..=0.88).contains(&best.throughput), "{best:?}");
        assert!((best.ratio - 1.07).abs() <= 0.005, "{best:?}");
        let (lo, hi) = c.avalanche().unwrap();
        assert!(hi.throughput - lo.throughput >= 0.3);
        assert!(hi.ratio <= best.ratio);
    }

    #[test]
    fn small_degree_has_no_jump() {
        // For G = 0.5 the map's slope G * ratio * G * exp(..) stays below one,
        // so the fixed point is unique and moves continuously.
        let c = sweep_curve(0.5, &linear_grid(0.1, 5.0, 0.01)).unwrap();
        assert!(c.avalanche().is_none());
        let max_step = c
            .points
            .windows(2)
            .map(|w| w[1].p_resolve - w[0].p_resolve)
            .fold(0.0, f64::max);
        assert!(max_step < 0.01, "{max_step}");
    }

    #[test]
    fn csv_layout() {
        let c = sweep_curve(3.12, &[1.0, 1.1]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "ratio,p_resolve,throughput");
        assert!(lines[1].starts_with("1,"));
        assert!(lines[2].starts_with("1.1,"));
    }
}
