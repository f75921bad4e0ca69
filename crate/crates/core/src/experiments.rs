//! Monte Carlo aggregation and the parameter studies built on it.
//!
//! Run `i` of an experiment uses seed `base_seed + i`. Every grid cell reuses
//! the same seeds (common random numbers), so differences between cells are
//! not swamped by sampling noise. Runs execute on the rayon pool; results are
//! reduced in seed order so output is bit-identical for any thread count.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::asymptotic::linear_grid;
use crate::error::{Error, Result};
use crate::report::fmt_sig;
use crate::simulator::{genie_run, run_contention, RunConfig, RunStats};
use crate::termination::TerminationPolicy;

/// Sample means and standard errors over a batch of runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateStats {
    pub mean_throughput: f64,
    pub mean_fraction: f64,
    pub mean_slots_norm: f64,
    pub mean_replicas: f64,
    /// Mean `N_R`.
    pub mean_resolved: f64,
    /// Mean `M + L - 1`, the slots charged to a contention period.
    pub mean_charged_slots: f64,
    pub se_throughput: f64,
    pub se_fraction: f64,
    pub se_slots_norm: f64,
    pub se_replicas: f64,
    pub run_count: usize,
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

impl AggregateStats {
    pub fn from_runs(runs: &[RunStats], n_users: u32) -> Self {
        assert!(!runs.is_empty(), "at least one run is required");
        let n = runs.len();
        let it = runs.iter();
        let (mean_throughput, se_throughput) = mean_se(it.clone().map(|r| r.throughput), n);
        let (mean_fraction, se_fraction) = mean_se(it.clone().map(|r| r.fraction_resolved), n);
        let (mean_slots_norm, se_slots_norm) = mean_se(it.clone().map(|r| r.slots as f64 / n_users as f64), n);
        let (mean_replicas, se_replicas) = mean_se(it.clone().map(|r| r.replicas_per_user), n);
        let mean_resolved = it.clone().map(|r| r.resolved as f64).sum::<f64>() / n as f64;
        let mean_charged_slots = it.map(|r| r.charged_slots() as f64).sum::<f64>() / n as f64;
        AggregateStats {
            mean_throughput,
            mean_fraction,
            mean_slots_norm,
            mean_replicas,
            mean_resolved,
            mean_charged_slots,
            se_throughput,
            se_fraction,
            se_slots_norm,
            se_replicas,
            run_count: n,
        }
    }

    /// Expected decoded users over expected charged slots, `E[N_R] / E[M + L - 1]`.
    /// Unlike `mean_throughput` this is not the average of per-run ratios.
    pub fn pooled_throughput(&self) -> f64 {
        self.mean_resolved / self.mean_charged_slots
    }

    pub const CSV_HEADER: &'static str = "mean_throughput,mean_fraction,mean_slots_norm,mean_replicas,\
se_throughput,se_fraction,se_slots_norm,se_replicas,run_count";

    pub fn csv_fields(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            fmt_sig(self.mean_throughput),
            fmt_sig(self.mean_fraction),
            fmt_sig(self.mean_slots_norm),
            fmt_sig(self.mean_replicas),
            fmt_sig(self.se_throughput),
            fmt_sig(self.se_fraction),
            fmt_sig(self.se_slots_norm),
            fmt_sig(self.se_replicas),
            self.run_count
        )
    }
}

fn check_runs(runs: usize) -> Result<()> {
    if runs == 0 {
        return Err(Error::param("runs", "must be at least 1"));
    }
    Ok(())
}

/// Runs seeds `config.seed .. config.seed + runs` and returns them in order.
pub fn simulate_runs(config: &RunConfig, runs: usize) -> Result<Vec<RunStats>> {
    check_runs(runs)?;
    config.validate()?;
    (0..runs as u64)
        .into_par_iter()
        .map(|i| run_contention(&config.with_seed(config.seed.wrapping_add(i))))
        .collect()
}

pub fn monte_carlo(config: &RunConfig, runs: usize) -> Result<AggregateStats> {
    let stats = simulate_runs(config, runs)?;
    Ok(AggregateStats::from_runs(&stats, config.n_users))
}

/// Mean over runs of the per-run genie maximum.
pub fn genie_monte_carlo(config: &RunConfig, runs: usize) -> Result<AggregateStats> {
    check_runs(runs)?;
    config.validate()?;
    let stats: Vec<RunStats> = (0..runs as u64)
        .into_par_iter()
        .map(|i| genie_run(&config.with_seed(config.seed.wrapping_add(i))))
        .collect::<Result<_>>()?;
    Ok(AggregateStats::from_runs(&stats, config.n_users))
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub target_degree: f64,
    pub threshold_s: Option<f64>,
    pub threshold_v: Option<f64>,
    pub stats: AggregateStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub n_users: u32,
    pub beacon_len: u32,
    pub cells: Vec<Cell>,
    best: usize,
}

impl SweepResult {
    fn from_cells(n_users: u32, beacon_len: u32, cells: Vec<Cell>) -> Self {
        let mut best = 0;
        for (i, c) in cells.iter().enumerate() {
            if c.stats.mean_throughput > cells[best].stats.mean_throughput {
                best = i;
            }
        }
        SweepResult {
            n_users,
            beacon_len,
            cells,
            best,
        }
    }

    /// Cell with the largest mean throughput (first one on ties).
    pub fn best(&self) -> &Cell {
        &self.cells[self.best]
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "n_users,beacon_len,target_degree,threshold_s,threshold_v,{},best",
            AggregateStats::CSV_HEADER
        )?;
        let opt = |x: Option<f64>| x.map(fmt_sig).unwrap_or_default();
        for (i, c) in self.cells.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.n_users,
                self.beacon_len,
                fmt_sig(c.target_degree),
                opt(c.threshold_s),
                opt(c.threshold_v),
                c.stats.csv_fields(),
                u8::from(i == self.best)
            )?;
        }
        Ok(())
    }
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::param(name, "grid must not be empty"));
    }
    Ok(())
}

/// Evaluates the dual-threshold policy on every `(G, S, V)` combination,
/// with the remaining parameters taken from `base`.
pub fn sweep_optimize(
    base: &RunConfig,
    g_grid: &[f64],
    s_grid: &[f64],
    v_grid: &[f64],
    runs: usize,
) -> Result<SweepResult> {
    check_grid("g_grid", g_grid)?;
    check_grid("s_grid", s_grid)?;
    check_grid("v_grid", v_grid)?;
    let mut cells = Vec::with_capacity(g_grid.len() * s_grid.len() * v_grid.len());
    for &g in g_grid {
        for &s in s_grid {
            for &v in v_grid {
                let cfg = RunConfig {
                    target_degree: g,
                    policy: TerminationPolicy::dual(s, v)?,
                    ..base.clone()
                };
                cells.push(Cell {
                    target_degree: g,
                    threshold_s: Some(s),
                    threshold_v: Some(v),
                    stats: monte_carlo(&cfg, runs)?,
                });
            }
        }
    }
    Ok(SweepResult::from_cells(base.n_users, base.beacon_len, cells))
}

/// Maximizes throughput of the fraction-only policy over `(G, V)` with a
/// beacon of `beacon_len` slots, `T_I = N_R / (M + L - 1)`.
pub fn beacon_experiment(
    base: &RunConfig,
    beacon_len: u32,
    g_grid: &[f64],
    v_grid: &[f64],
    runs: usize,
) -> Result<SweepResult> {
    check_grid("g_grid", g_grid)?;
    check_grid("v_grid", v_grid)?;
    if beacon_len == 0 {
        return Err(Error::param("beacon_len", "must be at least 1"));
    }
    let mut cells = Vec::with_capacity(g_grid.len() * v_grid.len());
    for &g in g_grid {
        for &v in v_grid {
            let cfg = RunConfig {
                target_degree: g,
                policy: TerminationPolicy::fraction_only(v)?,
                beacon_len,
                ..base.clone()
            };
            cells.push(Cell {
                target_degree: g,
                threshold_s: None,
                threshold_v: Some(v),
                stats: monte_carlo(&cfg, runs)?,
            });
        }
    }
    Ok(SweepResult::from_cells(base.n_users, beacon_len, cells))
}

/// Grid bounds for a two-stage search: a coarse pass over `[lo, hi]`, then a
/// fine pass within one coarse step of the coarse incumbent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub lo: f64,
    pub hi: f64,
    pub coarse_step: f64,
    pub fine_step: f64,
}

impl Refinement {
    pub fn new(lo: f64, hi: f64) -> Self {
        Refinement {
            lo,
            hi,
            coarse_step: 0.05,
            fine_step: 0.01,
        }
    }

    pub fn coarse(&self) -> Vec<f64> {
        rounded(linear_grid(self.lo, self.hi, self.coarse_step))
    }

    pub fn fine_around(&self, center: f64) -> Vec<f64> {
        let lo = (center - self.coarse_step).max(self.lo);
        let hi = (center + self.coarse_step).min(self.hi);
        rounded(linear_grid(lo, hi, self.fine_step))
    }
}

fn rounded(grid: Vec<f64>) -> Vec<f64> {
    grid.into_iter().map(|x| (x * 1e6).round() / 1e6).collect()
}

/// Coarse-then-fine version of [`sweep_optimize`] over `G` and `V`.
pub fn sweep_optimize_refined(
    base: &RunConfig,
    g: Refinement,
    s_grid: &[f64],
    v: Refinement,
    runs: usize,
) -> Result<SweepResult> {
    let coarse = sweep_optimize(base, &g.coarse(), s_grid, &v.coarse(), runs)?;
    let c = *coarse.best();
    let fine = sweep_optimize(
        base,
        &g.fine_around(c.target_degree),
        s_grid,
        &v.fine_around(c.threshold_v.unwrap_or(1.0)),
        runs,
    )?;
    Ok(merge(coarse, fine))
}

/// Coarse-then-fine version of [`beacon_experiment`].
pub fn beacon_experiment_refined(
    base: &RunConfig,
    beacon_len: u32,
    g: Refinement,
    v: Refinement,
    runs: usize,
) -> Result<SweepResult> {
    let coarse = beacon_experiment(base, beacon_len, &g.coarse(), &v.coarse(), runs)?;
    let c = *coarse.best();
    let fine = beacon_experiment(
        base,
        beacon_len,
        &g.fine_around(c.target_degree),
        &v.fine_around(c.threshold_v.unwrap_or(1.0)),
        runs,
    )?;
    Ok(merge(coarse, fine))
}

fn merge(coarse: SweepResult, fine: SweepResult) -> SweepResult {
    let mut cells = coarse.cells;
    for c in fine.cells {
        let dup = cells.iter().any(|o| {
            o.target_degree == c.target_degree && o.threshold_s == c.threshold_s && o.threshold_v == c.threshold_v
        });
        if !dup {
            cells.push(c);
        }
    }
    SweepResult::from_cells(coarse.n_users, coarse.beacon_len, cells)
}

/// Genie-aided benchmark maximized over `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenieBenchmark {
    pub n_users: u32,
    pub best_degree: f64,
    /// `T_GA`: the largest mean of per-run maxima.
    pub mean_throughput: f64,
    pub per_degree: Vec<(f64, AggregateStats)>,
}

impl GenieBenchmark {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n_users,target_degree,{},best", AggregateStats::CSV_HEADER)?;
        for &(g, s) in &self.per_degree {
            writeln!(
                out,
                "{},{},{},{}",
                self.n_users,
                fmt_sig(g),
                s.csv_fields(),
                u8::from(g == self.best_degree)
            )?;
        }
        Ok(())
    }
}

pub fn genie_benchmark(base: &RunConfig, g_grid: &[f64], runs: usize) -> Result<GenieBenchmark> {
    check_grid("g_grid", g_grid)?;
    let mut per_degree = Vec::with_capacity(g_grid.len());
    for &g in g_grid {
        let cfg = RunConfig {
            target_degree: g,
            policy: TerminationPolicy::genie(),
            ..base.clone()
        };
        per_degree.push((g, genie_monte_carlo(&cfg, runs)?));
    }
    let &(best_degree, best) = per_degree
        .iter()
        .reduce(|a, b| if b.1.mean_throughput > a.1.mean_throughput { b } else { a })
        .expect("non-empty grid");
    Ok(GenieBenchmark {
        n_users: base.n_users,
        best_degree,
        mean_throughput: best.mean_throughput,
        per_degree,
    })
}

/// Parameters of the estimation-error study.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityPlan {
    /// Allowed relative loss against the genie benchmark.
    pub loss_budget: f64,
    pub g_grid: Vec<f64>,
    pub v_grid: Vec<f64>,
    pub alpha_step: f64,
    pub alpha_max: f64,
    pub runs: usize,
    /// `T_GA`; computed by [`genie_benchmark`] over `g_grid` when absent.
    pub baseline: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityResult {
    pub n_users: u32,
    /// `alpha_UB`: largest `a` on the grid such that some `(G, V)` keeps the
    /// mean throughput at or above `(1 - loss_budget) T_GA` for every
    /// `alpha` in `[-a, a]`.
    pub alpha_ub: f64,
    pub g_at_ub: f64,
    pub v_at_ub: f64,
    pub loss_budget: f64,
    pub baseline: f64,
    /// Mean throughput of `(g_at_ub, v_at_ub)` with no estimation error.
    pub throughput_at_zero: f64,
    /// False when no cell meets the budget even at `alpha = 0`.
    pub feasible: bool,
}

impl SensitivityResult {
    pub const CSV_HEADER: &'static str =
        "n_users,loss_budget,baseline,alpha_ub,g_at_ub,v_at_ub,throughput_at_zero,feasible";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n_users,
            fmt_sig(self.loss_budget),
            fmt_sig(self.baseline),
            fmt_sig(self.alpha_ub),
            fmt_sig(self.g_at_ub),
            fmt_sig(self.v_at_ub),
            fmt_sig(self.throughput_at_zero),
            u8::from(self.feasible)
        )
    }
}

/// Worst case over `alpha` is taken on the grid `k * alpha_step`,
/// `|k| <= alpha_max / alpha_step`. Cells are scanned in grid order; a cell is
/// first probed at the edges of the incumbent's range, so cells that cannot
/// match the incumbent cost two evaluations. Ties in `alpha_UB` go to the
/// higher throughput at `alpha = 0`.
pub fn sensitivity_alpha(base: &RunConfig, plan: &SensitivityPlan) -> Result<SensitivityResult> {
    if !(plan.loss_budget > 0.0 && plan.loss_budget <= 1.0) {
        return Err(Error::param("loss_budget", "must lie in (0, 1]"));
    }
    if !(plan.alpha_step > 0.0) {
        return Err(Error::param("alpha_step", "must be positive"));
    }
    if !(plan.alpha_max >= 0.0 && plan.alpha_max < 1.0) {
        return Err(Error::param("alpha_max", "must lie in [0, 1)"));
    }
    check_grid("g_grid", &plan.g_grid)?;
    check_grid("v_grid", &plan.v_grid)?;
    check_runs(plan.runs)?;

    let baseline = match plan.baseline {
        Some(b) => b,
        None => genie_benchmark(base, &plan.g_grid, plan.runs)?.mean_throughput,
    };
    let floor = (1.0 - plan.loss_budget) * baseline;
    let k_max = (plan.alpha_max / plan.alpha_step + 1e-9).floor() as i64;

    // (k, cell index, T at alpha = 0)
    let mut best: Option<(i64, usize, f64)> = None;
    let cells: Vec<(f64, f64)> = plan
        .g_grid
        .iter()
        .flat_map(|&g| plan.v_grid.iter().map(move |&v| (g, v)))
        .collect();

    for (idx, &(g, v)) in cells.iter().enumerate() {
        let mut cache = std::collections::HashMap::new();
        let mut mean_at = |k: i64| -> Result<f64> {
            if let Some(&t) = cache.get(&k) {
                return Ok(t);
            }
            let cfg = RunConfig {
                target_degree: g,
                policy: TerminationPolicy::dual(1.0, v)?,
                alpha: k as f64 * plan.alpha_step,
                ..base.clone()
            };
            let t = monte_carlo(&cfg, plan.runs)?.mean_throughput;
            cache.insert(k, t);
            Ok(t)
        };
        let passes = |k: i64, f: &mut dyn FnMut(i64) -> Result<f64>| -> Result<bool> {
            Ok(f(k)? >= floor && f(-k)? >= floor)
        };

        let target = best.map_or(0, |b| b.0);
        if target > 0 && !passes(target, &mut mean_at)? {
            continue;
        }
        let t0 = mean_at(0)?;
        if t0 < floor {
            if best.is_none() {
                best = Some((-1, idx, t0));
            } else if let Some((-1, _, bt)) = best {
                if t0 > bt {
                    best = Some((-1, idx, t0));
                }
            }
            continue;
        }
        let mut reached = 0;
        let mut ok = true;
        for k in 1..=target {
            if !passes(k, &mut mean_at)? {
                ok = false;
                break;
            }
            reached = k;
        }
        if ok {
            while reached < k_max && passes(reached + 1, &mut mean_at)? {
                reached += 1;
            }
        }
        let better = match best {
            None => true,
            Some((bk, _, bt)) => reached > bk || (reached == bk && t0 > bt),
        };
        if better {
            best = Some((reached, idx, t0));
        }
    }

    let (k, idx, t0) = best.expect("non-empty grid");
    let (g, v) = cells[idx];
    Ok(SensitivityResult {
        n_users: base.n_users,
        alpha_ub: k.max(0) as f64 * plan.alpha_step,
        g_at_ub: g,
        v_at_ub: v,
        loss_budget: plan.loss_budget,
        baseline,
        throughput_at_zero: t0,
        feasible: k >= 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(n: u32) -> RunConfig {
        RunConfig::new(n, 2.8, TerminationPolicy::dual(1.0, 0.85).unwrap())
    }

    #[test]
    fn single_run_aggregate_equals_run() {
        let cfg = base(80).with_seed(3);
        let agg = monte_carlo(&cfg, 1).unwrap();
        let run = run_contention(&cfg).unwrap();
        assert_eq!(agg.mean_throughput, run.throughput);
        assert_eq!(agg.mean_fraction, run.fraction_resolved);
        assert_eq!(agg.mean_slots_norm, run.slots as f64 / 80.0);
        assert_eq!(agg.mean_replicas, run.replicas_per_user);
        assert_eq!(agg.se_throughput, 0.0);
        assert_eq!(agg.run_count, 1);
    }

    #[test]
    fn standard_error_definition() {
        let cfg = base(50);
        let runs = simulate_runs(&cfg, 40).unwrap();
        let agg = AggregateStats::from_runs(&runs, 50);
        let xs: Vec<f64> = runs.iter().map(|r| r.throughput).collect();
        let m = xs.iter().sum::<f64>() / 40.0;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 39.0).sqrt();
        assert!((agg.se_throughput - sd / 40f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_runs_rejected() {
        assert!(monte_carlo(&base(10), 0).is_err());
    }

    #[test]
    fn degenerate_sweep_is_its_cell() {
        let b = base(60);
        let sweep = sweep_optimize(&b, &[2.7], &[1.0], &[0.8], 30).unwrap();
        assert_eq!(sweep.cells.len(), 1);
        let direct = monte_carlo(
            &RunConfig {
                target_degree: 2.7,
                policy: TerminationPolicy::dual(1.0, 0.8).unwrap(),
                ..b
            },
            30,
        )
        .unwrap();
        assert_eq!(sweep.best().stats, direct);
    }

    #[test]
    fn sweep_best_is_max() {
        let sweep = sweep_optimize(&base(50), &[2.5, 2.8], &[1.0], &[0.7, 0.85], 50).unwrap();
        let max = sweep.cells.iter().map(|c| c.stats.mean_throughput).fold(f64::MIN, f64::max);
        assert_eq!(sweep.best().stats.mean_throughput, max);
        let again = sweep_optimize(&base(50), &[2.5, 2.8], &[1.0], &[0.7, 0.85], 50).unwrap();
        assert_eq!(sweep, again);
    }

    #[test]
    fn unit_beacon_fraction_only_matches_v_only_sweep() {
        let b = base(50);
        let beacon = beacon_experiment(&b, 1, &[2.8], &[0.85], 40).unwrap();
        let cfg = RunConfig {
            target_degree: 2.8,
            policy: TerminationPolicy::fraction_only(0.85).unwrap(),
            ..b
        };
        assert_eq!(beacon.best().stats, monte_carlo(&cfg, 40).unwrap());
    }

    #[test]
    fn refinement_grids() {
        let r = Refinement::new(2.6, 3.0);
        assert_eq!(r.coarse(), vec![2.6, 2.65, 2.7, 2.75, 2.8, 2.85, 2.9, 2.95, 3.0]);
        let fine = r.fine_around(2.6);
        assert_eq!(fine.first(), Some(&2.6));
        assert_eq!(fine.last(), Some(&2.65));
        assert_eq!(r.fine_around(2.8).len(), 11);
    }

    #[test]
    fn full_loss_budget_gives_max_alpha() {
        let plan = SensitivityPlan {
            loss_budget: 1.0,
            g_grid: vec![2.8],
            v_grid: vec![0.8],
            alpha_step: 0.05,
            alpha_max: 0.2,
            runs: 10,
            baseline: Some(0.84),
        };
        let r = sensitivity_alpha(&base(50), &plan).unwrap();
        assert!((r.alpha_ub - 0.2).abs() < 1e-12);
        assert!(r.feasible);
    }

    #[test]
    fn unreachable_budget_is_infeasible() {
        let plan = SensitivityPlan {
            loss_budget: 0.01,
            g_grid: vec![2.8, 2.9],
            v_grid: vec![0.8],
            alpha_step: 0.05,
            alpha_max: 0.2,
            runs: 10,
            baseline: Some(5.0),
        };
        let r = sensitivity_alpha(&base(50), &plan).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.alpha_ub, 0.0);
        assert!(sensitivity_alpha(&base(50), &SensitivityPlan { loss_budget: 0.0, ..plan }).is_err());
    }

    #[test]
    fn genie_benchmark_picks_best_degree() {
        let gb = genie_benchmark(&base(40), &[2.0, 2.8], 30).unwrap();
        let best = gb
            .per_degree
            .iter()
            .map(|(_, s)| s.mean_throughput)
            .fold(f64::MIN, f64::max);
        assert_eq!(gb.mean_throughput, best);
    }
}
