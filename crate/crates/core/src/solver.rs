//! Leray projection and the semi-implicit time stepper
//!
//! `(u^{n+1} − u^n)/τ + P Π_N (u^n·∇u^{n+1}) = νΔu^{n+1} + P f`
//!
//! solved at each step by the Picard iteration
//! `u^{(m+1)} = (I − τνΔ)^{-1} [u^n − τ P Π_N(u^n·∇u^{(m)}) + τ P f]`, `u^{(0)} = u^n`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::littlewood_paley::{BesovIndex, LittlewoodPaley};
use crate::scalar::Real;
use crate::spectral::{truncate_in_place, truncate_modes, wavenumber, Advection, Grid2D, VectorField};

/// Mode-wise `I − k kᵀ/|k|²`; the mean mode passes through unchanged.
pub fn leray_project<T: Real>(v: &VectorField<T>) -> VectorField<T> {
    let grid = v.grid();
    let n = grid.n_points();
    let mut out = v.clone();
    let ks: Vec<T> = (0..n).map(|p| T::from_i64_lossy(wavenumber(p, n))).collect();
    let (c1, c2) = (out.u1.coeffs_mut(), out.u2.coeffs_mut());
    for (p, &f1) in ks.iter().enumerate() {
        let row = p * n;
        for (q, &f2) in ks.iter().enumerate() {
            let k2n = f1 * f1 + f2 * f2;
            if k2n == T::zero() {
                continue;
            }
            let (x, y) = (c1[row + q], c2[row + q]);
            let dot = (x * f1 + y * f2) / k2n;
            c1[row + q] = x - dot * f1;
            c2[row + q] = y - dot * f2;
        }
    }
    out.with_flag(true)
}

/// Time level at which the forcing enters a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForcingTime {
    /// `f(t_n)`, the level of the known state. Reproduces the reference tables.
    #[default]
    Current,
    /// `f(t_{n+1})`, fully implicit with the unknown.
    Next,
}

/// Source term of the forced scheme.
pub trait Forcing<T: Real>: Sync {
    /// Leray-projected forcing at time `t`.
    fn projected(&self, t: T, grid: Grid2D) -> VectorField<T>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub nu: T,
    pub tau: T,
    pub horizon: T,
    pub n_points: usize,
    /// Working truncation `N` (`|k|_∞ ≤ N`).
    pub truncation: usize,
    pub picard_tol: T,
    pub picard_max: usize,
    pub forcing_time: ForcingTime,
    /// Constant of the stability monitor: flag steps with `‖u^n‖ > c ‖u^0‖` in `B¹_{∞,1}`.
    pub stability_factor: T,
}

impl<T: Real> SolverConfig<T> {
    /// Defaults: 64² grid, `N = 21`, Picard tolerance `1e-12`, at most 100 iterations.
    pub fn new(nu: T, tau: T, horizon: T) -> Self {
        Self {
            nu,
            tau,
            horizon,
            n_points: 64,
            truncation: 21,
            picard_tol: T::lit(1e-12),
            picard_max: 100,
            forcing_time: ForcingTime::Current,
            stability_factor: T::lit(8.0),
        }
    }

    pub fn with_grid(mut self, n_points: usize, truncation: usize) -> Self {
        self.n_points = n_points;
        self.truncation = truncation;
        self
    }

    pub fn with_picard(mut self, tol: T, max_iters: usize) -> Self {
        self.picard_tol = tol;
        self.picard_max = max_iters;
        self
    }

    pub fn with_forcing_time(mut self, when: ForcingTime) -> Self {
        self.forcing_time = when;
        self
    }

    pub fn validate(&self) -> Result<Grid2D> {
        let grid = Grid2D::new(self.n_points)?;
        if self.nu < T::zero() || !self.nu.is_finite() {
            return Err(Error::Config(format!("viscosity must be finite and non-negative, got {}", self.nu)));
        }
        if self.tau <= T::zero() || !self.tau.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {}", self.tau)));
        }
        if self.horizon <= T::zero() || !self.horizon.is_finite() {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.tau > self.horizon {
            return Err(Error::Config(format!(
                "time step {} exceeds horizon {}",
                self.tau, self.horizon
            )));
        }
        let headroom = 2 * self.n_points / 3;
        if self.truncation == 0 || self.truncation > grid.k_max() || self.truncation > headroom {
            return Err(Error::Config(format!(
                "truncation {} must lie in 1..={} for a {}-point grid",
                self.truncation,
                grid.k_max().min(headroom),
                self.n_points
            )));
        }
        if self.picard_tol.is_nan() || self.picard_tol <= T::zero() || self.picard_max == 0 {
            return Err(Error::Config("picard tolerance and iteration cap must be positive".into()));
        }
        Ok(grid)
    }

    /// `M = T/τ`, required to be an integer up to rounding of the quotient.
    pub fn step_count(&self) -> Result<usize> {
        let q = self.horizon / self.tau;
        let m = q.round();
        let slack = T::lit(16.0) * T::epsilon() * m.max(T::one());
        if (q - m).abs() > slack || m < T::one() {
            return Err(Error::Config(format!(
                "horizon {} is not an integer multiple of the time step {}",
                self.horizon, self.tau
            )));
        }
        m.to_usize()
            .ok_or_else(|| Error::Config(format!("step count {m} out of range")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics<T> {
    pub picard_iters: usize,
    /// Max coefficient modulus of the implicit-equation defect at the accepted iterate.
    pub residual: T,
    /// Relative change between the last two iterates.
    pub last_change: T,
    /// Relative divergence defect of the accepted iterate.
    pub divergence: T,
    /// `‖u^{n+1}‖_{B¹_{∞,1}}`.
    pub besov_s1_norm: T,
}

/// Outcome of the stability monitor over one run.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport<T> {
    pub initial_norm: T,
    /// `max_n ‖u^n‖ / ‖u^0‖` in `B¹_{∞,1}` (0 when `u^0 = 0` and the run stays at zero).
    pub max_ratio: T,
    /// Steps (1-based) where the bound was exceeded.
    pub violations: Vec<usize>,
}

impl<T: Real> StabilityReport<T> {
    pub fn flagged(&self) -> bool {
        !self.violations.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot<T> {
    pub step: usize,
    pub time: T,
    pub field: VectorField<T>,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub config: SolverConfig<T>,
    pub snapshots: Vec<Snapshot<T>>,
    pub diagnostics: Vec<StepDiagnostics<T>>,
    pub stability: StabilityReport<T>,
    pub wall_seconds: f64,
}

impl<T: Real> Trajectory<T> {
    /// Field at the final time.
    pub fn final_field(&self) -> &VectorField<T> {
        &self.snapshots.last().expect("final snapshot is always stored").field
    }

    pub fn mean_picard_iters(&self) -> f64 {
        if self.diagnostics.is_empty() {
            return 0.0;
        }
        let total: usize = self.diagnostics.iter().map(|d| d.picard_iters).sum();
        total as f64 / self.diagnostics.len() as f64
    }

    pub fn max_residual(&self) -> T {
        self.diagnostics.iter().fold(T::zero(), |m, d| m.max(d.residual))
    }

    pub fn max_divergence(&self) -> T {
        self.diagnostics.iter().fold(T::zero(), |m, d| m.max(d.divergence))
    }
}

/// Semi-implicit Fourier-spectral solver for one configuration.
pub struct Solver<'a, T: Real> {
    cfg: SolverConfig<T>,
    grid: Grid2D,
    steps: usize,
    lp: LittlewoodPaley<T>,
    forcing: Option<&'a dyn Forcing<T>>,
    /// `1 / (1 + τν|k|²)` per stored mode.
    viscous: Vec<T>,
}

impl<'a, T: Real> Solver<'a, T> {
    pub fn new(cfg: SolverConfig<T>) -> Result<Self> {
        let grid = cfg.validate()?;
        let steps = cfg.step_count()?;
        let n = grid.n_points();
        let viscous = (0..grid.len())
            .map(|idx| {
                let k1 = wavenumber(idx / n, n);
                let k2 = wavenumber(idx % n, n);
                T::one() / (T::one() + cfg.tau * cfg.nu * T::from_i64_lossy(k1 * k1 + k2 * k2))
            })
            .collect();
        Ok(Self {
            lp: LittlewoodPaley::new(grid),
            cfg,
            grid,
            steps,
            forcing: None,
            viscous,
        })
    }

    pub fn with_forcing(mut self, forcing: &'a dyn Forcing<T>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    #[inline]
    pub fn config(&self) -> &SolverConfig<T> {
        &self.cfg
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn step_count(&self) -> usize {
        self.steps
    }

    #[inline]
    pub fn littlewood_paley(&self) -> &LittlewoodPaley<T> {
        &self.lp
    }

    fn time(&self, step: usize) -> T {
        T::from_usize_lossy(step) * self.cfg.tau
    }

    fn projected_forcing(&self, t: T) -> Option<VectorField<T>> {
        self.forcing.map(|f| {
            let mut p = leray_project(&f.projected(t, self.grid));
            truncate_in_place(&mut p.u1, self.cfg.truncation);
            truncate_in_place(&mut p.u2, self.cfg.truncation);
            p
        })
    }

    /// `P Π_N (u^n·∇w)`.
    fn projected_advection(&self, adv: &Advection<T>, w: &VectorField<T>) -> Result<VectorField<T>> {
        let mut a = adv.apply(w)?;
        truncate_in_place(&mut a.u1, self.cfg.truncation);
        truncate_in_place(&mut a.u2, self.cfg.truncation);
        Ok(leray_project(&a))
    }

    /// Max coefficient modulus of `(w − u^n)/τ + PΠ_N(u^n·∇w) − νΔw − Pf`.
    fn defect(
        &self,
        u_n: &VectorField<T>,
        w: &VectorField<T>,
        nonlinear: &VectorField<T>,
        forcing: Option<&VectorField<T>>,
    ) -> T {
        let n = self.grid.n_points();
        let inv_tau = T::one() / self.cfg.tau;
        let mut worst = T::zero();
        for comp in 0..2 {
            let (un, wc, nl) = match comp {
                0 => (u_n.u1.coeffs(), w.u1.coeffs(), nonlinear.u1.coeffs()),
                _ => (u_n.u2.coeffs(), w.u2.coeffs(), nonlinear.u2.coeffs()),
            };
            let fc = forcing.map(|f| if comp == 0 { f.u1.coeffs() } else { f.u2.coeffs() });
            for idx in 0..self.grid.len() {
                let k1 = wavenumber(idx / n, n);
                let k2 = wavenumber(idx % n, n);
                let lap = T::from_i64_lossy(k1 * k1 + k2 * k2);
                let mut d = (wc[idx] - un[idx]) * inv_tau + nl[idx] + wc[idx] * (self.cfg.nu * lap);
                if let Some(fc) = fc {
                    d = d - fc[idx];
                }
                worst = worst.max(d.norm_sqr());
            }
        }
        worst.sqrt()
    }

    /// One step from `u^n` at `t_n = step·τ`.
    pub fn step(&self, u_n: &VectorField<T>, step: usize) -> Result<(VectorField<T>, StepDiagnostics<T>)> {
        self.grid.check_same(&u_n.grid())?;
        if !u_n.is_div_free() {
            return Err(Error::Contract("picard step requires a divergence-free state".into()));
        }
        if let Some(r) = u_n.u1.support_radius_inf().max(u_n.u2.support_radius_inf()) {
            if r > self.cfg.truncation {
                return Err(Error::Contract(format!(
                    "state carries modes up to |k|_inf = {r}, beyond truncation {}",
                    self.cfg.truncation
                )));
            }
        }
        let t_force = match self.cfg.forcing_time {
            ForcingTime::Current => self.time(step),
            ForcingTime::Next => self.time(step + 1),
        };
        let forcing = self.projected_forcing(t_force);
        let tau = self.cfg.tau;

        // u^n + τ P f
        let mut base = u_n.clone();
        if let Some(f) = &forcing {
            base.u1.axpy(tau, &f.u1);
            base.u2.axpy(tau, &f.u2);
        }

        let adv = Advection::banded(u_n, self.cfg.truncation);
        let mut current = u_n.clone();
        let mut nonlinear = self.projected_advection(&adv, &current)?;
        let mut last_change = T::infinity();
        for iter in 1..=self.cfg.picard_max {
            let mut next = base.clone();
            next.u1.axpy(-tau, &nonlinear.u1);
            next.u2.axpy(-tau, &nonlinear.u2);
            for (c, &w) in next.u1.coeffs_mut().iter_mut().zip(&self.viscous) {
                *c = *c * w;
            }
            for (c, &w) in next.u2.coeffs_mut().iter_mut().zip(&self.viscous) {
                *c = *c * w;
            }
            let next = next.with_flag(true);

            let diff = next.sub(&current).max_abs();
            let scale = next.max_abs();
            last_change = if scale > T::zero() { diff / scale } else { diff };
            nonlinear = self.projected_advection(&adv, &next)?;
            current = next;

            if diff <= self.cfg.picard_tol * scale {
                let residual = self.defect(u_n, &current, &nonlinear, forcing.as_ref());
                let diag = StepDiagnostics {
                    picard_iters: iter,
                    residual,
                    last_change,
                    divergence: current.divergence_defect(),
                    besov_s1_norm: self.lp.besov_norm_vector(&current, BesovIndex::inf_1(T::one()))?,
                };
                return Ok((current, diag));
            }
        }
        Err(Error::NonConvergence {
            iterations: self.cfg.picard_max,
            last_change: last_change.to_f64_lossy(),
            residual: self.defect(u_n, &current, &nonlinear, forcing.as_ref()).to_f64_lossy(),
        })
    }

    /// One step landing at `t_next`; `t_next − τ` must lie on the step grid.
    pub fn picard_step(&self, u_n: &VectorField<T>, t_next: T) -> Result<(VectorField<T>, StepDiagnostics<T>)> {
        let k = (t_next / self.cfg.tau).round();
        if k < T::one() || ((t_next / self.cfg.tau) - k).abs() > T::lit(1e-6) {
            return Err(Error::Config(format!("time {t_next} is not on the step grid")));
        }
        let k = k.to_usize().ok_or_else(|| Error::Config(format!("time {t_next} out of range")))?;
        self.step(u_n, k - 1)
    }

    /// Steps from `Π_N u0` to the horizon. Snapshots are kept at step indices
    /// in `snapshot_steps` plus the final step.
    pub fn run(&self, u0: &VectorField<T>, snapshot_steps: &[usize]) -> Result<Trajectory<T>> {
        let start = Instant::now();
        self.grid.check_same(&u0.grid())?;
        let mut u = VectorField::new(
            truncate_modes(u0.u1(), self.cfg.truncation)?,
            truncate_modes(u0.u2(), self.cfg.truncation)?,
        )?
        .try_into_div_free()?;

        let initial_norm = self.lp.besov_norm_vector(&u, BesovIndex::inf_1(T::one()))?;
        let bound = self.cfg.stability_factor * initial_norm;
        let mut stability = StabilityReport {
            initial_norm,
            max_ratio: if initial_norm > T::zero() { T::one() } else { T::zero() },
            violations: Vec::new(),
        };

        let mut snapshots = Vec::new();
        if snapshot_steps.contains(&0) {
            snapshots.push(Snapshot {
                step: 0,
                time: T::zero(),
                field: u.clone(),
            });
        }
        let mut diagnostics = Vec::with_capacity(self.steps);
        for n in 0..self.steps {
            let (next, diag) = self.step(&u, n)?;
            let norm = diag.besov_s1_norm;
            if initial_norm > T::zero() {
                stability.max_ratio = stability.max_ratio.max(norm / initial_norm);
            }
            if norm > bound {
                stability.violations.push(n + 1);
            }
            diagnostics.push(diag);
            u = next;
            if n + 1 == self.steps || snapshot_steps.contains(&(n + 1)) {
                snapshots.push(Snapshot {
                    step: n + 1,
                    time: self.time(n + 1),
                    field: u.clone(),
                });
            }
        }
        Ok(Trajectory {
            config: self.cfg.clone(),
            snapshots,
            diagnostics,
            stability,
            wall_seconds: start.elapsed().as_secs_f64(),
        })
    }
}

/// Convenience wrapper: one Picard step at `t_next` for the given configuration.
pub fn picard_step<T: Real>(
    u_n: &VectorField<T>,
    cfg: &SolverConfig<T>,
    forcing: Option<&dyn Forcing<T>>,
    t_next: T,
) -> Result<(VectorField<T>, StepDiagnostics<T>)> {
    let mut solver = Solver::new(cfg.clone())?;
    solver.forcing = forcing;
    solver.picard_step(u_n, t_next)
}

/// Convenience wrapper: full run keeping only the final snapshot.
pub fn run_simulation<T: Real>(
    u0: &VectorField<T>,
    cfg: &SolverConfig<T>,
    forcing: Option<&dyn Forcing<T>>,
) -> Result<Trajectory<T>> {
    let mut solver = Solver::new(cfg.clone())?;
    solver.forcing = forcing;
    solver.run(u0, &[])
}
