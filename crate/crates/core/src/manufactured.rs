//! Manufactured Taylor-Green solution `u_e = 0.5 e^{-t} (−sin x cos y, cos x sin y)`
//! and its forcing.
//!
//! With `∂_t u_e = −u_e`, `Δu_e = −2u_e` and `P(u_e·∇u_e) = 0`, the projected
//! forcing is `(2ν − 1) u_e` for the Navier-Stokes problem and `−u_e` for Euler.

use num_complex::Complex;

use crate::error::Result;
use crate::littlewood_paley::{besov_norm_vector, l2_norm, BesovIndex};
use crate::scalar::Real;
use crate::solver::Forcing;
use crate::spectral::{Grid2D, SpectralField, VectorField};

/// Which forced problem the manufactured solution solves exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManufacturedCase<T> {
    /// Navier-Stokes with viscosity `nu`.
    NsForced { nu: T },
    /// Euler; the forcing does not depend on the solver viscosity.
    EulerForced,
}

impl<T: Real> ManufacturedCase<T> {
    /// Factor `c` with `P f_e(t) = c u_e(t)`.
    pub fn forcing_factor(&self) -> T {
        match *self {
            ManufacturedCase::NsForced { nu } => nu + nu - T::one(),
            ManufacturedCase::EulerForced => -T::one(),
        }
    }
}

impl<T: Real> Forcing<T> for ManufacturedCase<T> {
    fn projected(&self, t: T, grid: Grid2D) -> VectorField<T> {
        forcing(t, *self, grid)
    }
}

/// Amplitude of the velocity at time `t`.
pub const AMPLITUDE: f64 = 0.5;

/// `u_e(t)` on the given grid, supported exactly on the four modes `(±1, ±1)`.
pub fn exact_solution<T: Real>(t: T, grid: Grid2D) -> VectorField<T> {
    let a = T::lit(AMPLITUDE) * (-t).exp();
    let q = a / T::lit(4.0);
    let z = T::zero();
    // −a sin x cos y: −a/(4i) (e^{i(x+y)} + e^{i(x−y)} − e^{−i(x−y)} − e^{−i(x+y)})
    let u1 = SpectralField::from_modes(
        grid,
        [
            ((1, 1), Complex::new(z, q)),
            ((1, -1), Complex::new(z, q)),
            ((-1, 1), Complex::new(z, -q)),
            ((-1, -1), Complex::new(z, -q)),
        ],
    )
    .expect("unit modes are stored on every grid");
    // a cos x sin y: a/(4i) (e^{i(x+y)} − e^{i(x−y)} + e^{−i(x−y)} − e^{−i(x+y)})
    let u2 = SpectralField::from_modes(
        grid,
        [
            ((1, 1), Complex::new(z, -q)),
            ((1, -1), Complex::new(z, q)),
            ((-1, 1), Complex::new(z, -q)),
            ((-1, -1), Complex::new(z, q)),
        ],
    )
    .expect("unit modes are stored on every grid");
    VectorField {
        u1,
        u2,
        div_free: true,
    }
}

/// Leray-projected forcing `P f_e(t)`.
pub fn forcing<T: Real>(t: T, case: ManufacturedCase<T>, grid: Grid2D) -> VectorField<T> {
    exact_solution(t, grid).scale(case.forcing_factor())
}

/// Errors of a numerical field against `u_e(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport<T> {
    pub time: T,
    pub err_l2: T,
    pub err_b0_inf_1: T,
    pub err_b0_inf_2: T,
}

/// Differences `u_num − reference` in `L²`, `B^0_{∞,1}` and `B^0_{∞,2}`.
pub fn difference_report<T: Real>(u_num: &VectorField<T>, reference: &VectorField<T>, time: T) -> Result<ErrorReport<T>> {
    u_num.grid().check_same(&reference.grid())?;
    let e = u_num.sub(reference);
    Ok(ErrorReport {
        time,
        err_l2: (l2_norm(e.u1()).powi(2) + l2_norm(e.u2()).powi(2)).sqrt(),
        err_b0_inf_1: besov_norm_vector(&e, BesovIndex::inf_1(T::zero()))?,
        err_b0_inf_2: besov_norm_vector(&e, BesovIndex::inf_2(T::zero()))?,
    })
}

/// Errors of `u_num` against the exact solution at time `t`.
pub fn error_report<T: Real>(u_num: &VectorField<T>, t: T) -> Result<ErrorReport<T>> {
    difference_report(u_num, &exact_solution(t, u_num.grid()), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward_transform, RealField};

    #[test]
    fn exact_solution_matches_samples() {
        let g = Grid2D::new(16).unwrap();
        for &t in &[0.0f64, 0.7, 2.0] {
            let a = 0.5 * (-t).exp();
            let u1 = forward_transform(&RealField::from_fn(g, |x: f64, y: f64| -a * x.sin() * y.cos()));
            let u2 = forward_transform(&RealField::from_fn(g, |x: f64, y: f64| a * x.cos() * y.sin()));
            let ue = exact_solution(t, g);
            assert!((ue.u1() - &u1).max_abs() < 1e-16);
            assert!((ue.u2() - &u2).max_abs() < 1e-16);
        }
    }

    #[test]
    fn amplitude_decays_exponentially() {
        let g = Grid2D::new(8).unwrap();
        let u0 = exact_solution(0.0f64, g);
        let u2 = exact_solution(2.0f64, g);
        assert!(u2.sub(&u0.scale((-2.0f64).exp())).max_abs() < 1e-17);
        assert!(u2.divergence_defect() < 1e-16);
    }

    #[test]
    fn forcing_factors() {
        let g = Grid2D::new(8).unwrap();
        assert_eq!(forcing(0.3, ManufacturedCase::NsForced { nu: 0.5 }, g).max_abs(), 0.0);
        let u0 = exact_solution(0.0f64, g);
        assert_eq!(forcing(0.0, ManufacturedCase::EulerForced, g), u0.scale(-1.0));
        assert_eq!(forcing(0.0, ManufacturedCase::NsForced { nu: 1.0 }, g), u0);
    }

    #[test]
    fn zero_error_against_itself() {
        let g = Grid2D::new(16).unwrap();
        let r = error_report(&exact_solution(1.0f64, g), 1.0).unwrap();
        assert_eq!((r.err_l2, r.err_b0_inf_1, r.err_b0_inf_2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn grid_mismatch() {
        let a = exact_solution(0.0f64, Grid2D::new(8).unwrap());
        let b = exact_solution(0.0f64, Grid2D::new(16).unwrap());
        assert!(difference_report(&a, &b, 0.0).is_err());
    }
}
