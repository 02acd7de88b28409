//! Experiment runner: convergence sweeps against the manufactured solution,
//! the vanishing-viscosity sweep and the stability monitor report.

mod config;
mod results;
pub mod selftest;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manufactured::{difference_report, error_report, exact_solution, ErrorReport, ManufacturedCase};
use crate::solver::{ForcingTime, Solver, SolverConfig, StabilityReport, Trajectory};
use crate::spectral::Grid2D;

pub use config::{parse_config_text, parse_list, ConfigOverrides};
pub use results::{emit_csv, parse_csv, read_csv, write_csv, ResultRow, CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Converge,
    Viscosity,
    Stability,
    Selftest,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Converge => "converge",
            ExperimentKind::Viscosity => "viscosity",
            ExperimentKind::Stability => "stability",
            ExperimentKind::Selftest => "selftest",
        }
    }
}

/// One sweep. `halvings` halves `τ` for `converge`/`stability` and `ν` for `viscosity`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub nu_list: Vec<f64>,
    pub tau_base: f64,
    pub halvings: usize,
    pub horizon: f64,
    pub n_points: usize,
    pub truncation: usize,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub forcing_time: ForcingTime,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Defaults reproducing the reference tables for each kind.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = Self {
            kind,
            nu_list: vec![1.0, 0.1, 0.01, 1e-5],
            tau_base: 0.01,
            halvings: 5,
            horizon: 2.0,
            n_points: 64,
            truncation: 21,
            picard_tol: 1e-12,
            picard_max: 100,
            forcing_time: ForcingTime::Current,
            out: None,
        };
        match kind {
            ExperimentKind::Viscosity => Self {
                nu_list: vec![0.1],
                tau_base: 1e-4,
                horizon: 0.1,
                ..base
            },
            ExperimentKind::Stability => Self {
                nu_list: vec![1.0, 0.1, 0.01, 1e-5, 0.0],
                halvings: 0,
                ..base
            },
            _ => base,
        }
    }

    /// `(ν, τ)` cells in output order.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let scale = |h: usize| 0.5f64.powi(h as i32);
        match self.kind {
            ExperimentKind::Viscosity => self
                .nu_list
                .iter()
                .flat_map(|&nu| (0..=self.halvings).map(move |h| (nu * scale(h), self.tau_base)))
                .collect(),
            _ => self
                .nu_list
                .iter()
                .flat_map(|&nu| (0..=self.halvings).map(move |h| (nu, self.tau_base * scale(h))))
                .collect(),
        }
    }

    pub fn solver_config(&self, nu: f64, tau: f64) -> SolverConfig<f64> {
        SolverConfig::new(nu, tau, self.horizon)
            .with_grid(self.n_points, self.truncation)
            .with_picard(self.picard_tol, self.picard_max)
            .with_forcing_time(self.forcing_time)
    }

    /// Checks every cell configuration before any simulation starts.
    pub fn validate(&self) -> Result<()> {
        if self.nu_list.is_empty() {
            return Err(Error::Config("empty viscosity list".into()));
        }
        for (nu, tau) in self.cells() {
            let cfg = self.solver_config(nu, tau);
            cfg.validate()?;
            cfg.step_count()?;
        }
        Ok(())
    }
}

/// Stability outcome of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCell {
    pub nu: f64,
    pub tau: f64,
    pub report: StabilityReport<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySummary {
    pub rows: Vec<ResultRow>,
    pub cells: Vec<StabilityCell>,
}

impl StabilitySummary {
    /// Largest `sup_n ‖u^n‖/‖u^0‖` over all cells.
    pub fn max_ratio(&self) -> f64 {
        self.cells.iter().fold(0.0, |m, c| m.max(c.report.max_ratio))
    }
}

struct CellOutcome {
    row: ResultRow,
    stability: Option<StabilityReport<f64>>,
}

fn row_from(
    spec: &ExperimentSpec,
    nu: f64,
    tau: f64,
    outcome: Result<(Trajectory<f64>, ErrorReport<f64>)>,
    wall: f64,
) -> CellOutcome {
    let mut row = ResultRow {
        experiment: spec.kind.name().to_string(),
        nu,
        tau,
        n_points: spec.n_points,
        truncation: spec.truncation,
        horizon: spec.horizon,
        err_l2: None,
        err_b0inf1: None,
        err_b0inf2: None,
        picard_mean_iters: None,
        stability_flag: None,
        wall_seconds: wall,
        note: None,
    };
    match outcome {
        Ok((traj, err)) => {
            row.err_l2 = Some(err.err_l2);
            row.err_b0inf1 = Some(err.err_b0_inf_1);
            row.err_b0inf2 = Some(err.err_b0_inf_2);
            row.picard_mean_iters = Some(traj.mean_picard_iters());
            row.stability_flag = Some(traj.stability.flagged());
            CellOutcome {
                row,
                stability: Some(traj.stability),
            }
        }
        Err(e) => {
            row.note = Some(e.to_string());
            CellOutcome { row, stability: None }
        }
    }
}

fn run_cells<F>(spec: &ExperimentSpec, cell: F) -> Vec<CellOutcome>
where
    F: Fn(f64, f64) -> Result<(Trajectory<f64>, ErrorReport<f64>)> + Sync,
{
    spec.cells()
        .into_par_iter()
        .map(|(nu, tau)| {
            let start = Instant::now();
            let outcome = cell(nu, tau);
            row_from(spec, nu, tau, outcome, start.elapsed().as_secs_f64())
        })
        .collect()
}

fn forced_run(
    spec: &ExperimentSpec,
    nu: f64,
    tau: f64,
    case: ManufacturedCase<f64>,
) -> Result<(Trajectory<f64>, ErrorReport<f64>)> {
    let cfg = spec.solver_config(nu, tau);
    let grid = Grid2D::new(spec.n_points)?;
    let solver = Solver::new(cfg)?.with_forcing(&case);
    let traj = solver.run(&exact_solution(0.0, grid), &[])?;
    let err = error_report(traj.final_field(), spec.horizon)?;
    Ok((traj, err))
}

/// Forced Navier-Stokes runs with `P f = (2ν − 1) u_e`, compared against `u_e(T)`.
pub fn convergence_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    Ok(run_cells(spec, |nu, tau| forced_run(spec, nu, tau, ManufacturedCase::NsForced { nu }))
        .into_iter()
        .map(|c| c.row)
        .collect())
}

/// Euler-forced runs with solver viscosity `ν`, compared against `u_e(T)`.
pub fn viscosity_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    Ok(run_cells(spec, |nu, tau| forced_run(spec, nu, tau, ManufacturedCase::EulerForced))
        .into_iter()
        .map(|c| c.row)
        .collect())
}

/// Unforced runs from `Π_N u_0`; errors are against the exact decay `e^{−2νt} u_0`.
pub fn stability_check(spec: &ExperimentSpec) -> Result<StabilitySummary> {
    spec.validate()?;
    let outcomes = run_cells(spec, |nu, tau| {
        let cfg = spec.solver_config(nu, tau);
        let grid = Grid2D::new(spec.n_points)?;
        let u0 = exact_solution(0.0, grid);
        let traj = Solver::new(cfg)?.run(&u0, &[])?;
        let reference = u0.scale((-2.0 * nu * spec.horizon).exp());
        let err = difference_report(traj.final_field(), &reference, spec.horizon)?;
        Ok((traj, err))
    });
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut cells = Vec::new();
    for c in outcomes {
        if let Some(report) = c.stability {
            cells.push(StabilityCell {
                nu: c.row.nu,
                tau: c.row.tau,
                report,
            });
        }
        rows.push(c.row);
    }
    Ok(StabilitySummary { rows, cells })
}

/// `err(τ)/err(τ/2)` (or `ν`) between consecutive rows of one series.
pub fn consecutive_ratios(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[0] / w[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cells() {
        let c = ExperimentSpec::defaults(ExperimentKind::Converge).cells();
        assert_eq!(c.len(), 24);
        assert_eq!(c[0], (1.0, 0.01));
        assert_eq!(c[5], (1.0, 0.01 / 32.0));
        let v = ExperimentSpec::defaults(ExperimentKind::Viscosity).cells();
        assert_eq!(v.len(), 6);
        assert_eq!(v[5], (0.1 / 32.0, 1e-4));
        assert!(ExperimentSpec::defaults(ExperimentKind::Converge).validate().is_ok());
        assert!(ExperimentSpec::defaults(ExperimentKind::Viscosity).validate().is_ok());
    }

    #[test]
    fn invalid_step_is_a_config_error() {
        let spec = ExperimentSpec {
            tau_base: 0.03,
            horizon: 0.1,
            ..ExperimentSpec::defaults(ExperimentKind::Converge)
        };
        assert!(matches!(convergence_sweep(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn small_sweep_rows_in_spec_order() {
        let spec = ExperimentSpec {
            nu_list: vec![0.5, 0.0],
            tau_base: 0.05,
            halvings: 1,
            horizon: 0.2,
            n_points: 16,
            truncation: 5,
            ..ExperimentSpec::defaults(ExperimentKind::Converge)
        };
        let rows = convergence_sweep(&spec).unwrap();
        let cells: Vec<(f64, f64)> = rows.iter().map(|r| (r.nu, r.tau)).collect();
        assert_eq!(cells, spec.cells());
        // ν = 1/2 gives zero projected forcing and the exact decay rate e^{-t}
        // only approximated by 1/(1+τ)^n.
        assert!(rows.iter().all(|r| r.note.is_none() && r.err_b0inf1.unwrap() > 0.0));
        let again = convergence_sweep(&spec).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.err_b0inf1, b.err_b0inf1);
            assert_eq!(a.err_l2, b.err_l2);
        }
    }
}
