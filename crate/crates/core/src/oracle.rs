//! Reference evaluations that bypass the FFT path, plus seeded random fields,
//! used by the self-test suites and the test harnesses.

use num_complex::Complex;
use rand::Rng;

use crate::scalar::Real;
use crate::spectral::{
    forward_transform, truncate_modes, Derivative, Grid2D, RealField, SpectralField, VectorField,
};

/// Random real field whose coefficients vanish outside `|k|_∞ ≤ band`.
pub fn random_band_limited<T: Real, R: Rng>(grid: Grid2D, band: usize, rng: &mut R) -> SpectralField<T> {
    let samples: Vec<T> = (0..grid.len()).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    let f = forward_transform(&RealField::new(grid, samples).expect("sample count matches grid"));
    truncate_modes(&f, band.min(grid.k_max())).expect("band within resolvable range")
}

/// Random real field with arbitrary samples (Nyquist content included).
pub fn random_real_field<T: Real, R: Rng>(grid: Grid2D, rng: &mut R) -> RealField<T> {
    let samples = (0..grid.len()).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    RealField::new(grid, samples).expect("sample count matches grid")
}

pub fn random_vector_field<T: Real, R: Rng>(grid: Grid2D, band: usize, rng: &mut R) -> VectorField<T> {
    VectorField::new(random_band_limited(grid, band, rng), random_band_limited(grid, band, rng))
        .expect("components share a grid")
}

/// Resolvable part of `a · b` by direct summation over mode pairs.
pub fn direct_product<T: Real>(a: &SpectralField<T>, b: &SpectralField<T>) -> SpectralField<T> {
    let grid = a.grid();
    let km = grid.k_max() as i64;
    let nonzero = |f: &SpectralField<T>| -> Vec<(i64, i64, Complex<T>)> {
        f.modes()
            .filter(|&(k1, k2, c)| k1.abs() <= km && k2.abs() <= km && c.norm() > T::zero())
            .collect()
    };
    let (ma, mb) = (nonzero(a), nonzero(b));
    let mut out = SpectralField::zeros(grid);
    for &(p1, p2, ca) in &ma {
        for &(q1, q2, cb) in &mb {
            let (k1, k2) = (p1 + q1, p2 + q2);
            if k1.abs() <= km && k2.abs() <= km {
                let cur = out.get(k1, k2);
                out.set(k1, k2, cur + ca * cb).expect("resolvable mode");
            }
        }
    }
    out
}

/// Derivative by direct per-mode multiplication.
fn direct_derivative<T: Real>(f: &SpectralField<T>, op: Derivative) -> SpectralField<T> {
    let km = f.grid().k_max() as i64;
    let mut out = SpectralField::zeros(f.grid());
    for (k1, k2, c) in f.modes() {
        if k1.abs() > km || k2.abs() > km {
            continue;
        }
        let i = Complex::new(T::zero(), T::one());
        let m = match op {
            Derivative::Ddx => i * T::from_i64_lossy(k1),
            Derivative::Ddy => i * T::from_i64_lossy(k2),
            Derivative::Laplacian => Complex::new(-T::from_i64_lossy(k1 * k1 + k2 * k2), T::zero()),
        };
        out.set(k1, k2, c * m).expect("stored mode");
    }
    out
}

/// `(u·∇) v` by direct convolution.
pub fn direct_advection<T: Real>(u: &VectorField<T>, v: &VectorField<T>) -> VectorField<T> {
    let comp = |f: &SpectralField<T>| {
        let mut acc = direct_product(u.u1(), &direct_derivative(f, Derivative::Ddx));
        acc += &direct_product(u.u2(), &direct_derivative(f, Derivative::Ddy));
        acc
    };
    VectorField::new(comp(v.u1()), comp(v.u2())).expect("components share a grid")
}

/// Leray projection by explicit mode loop.
pub fn direct_projection<T: Real>(v: &VectorField<T>) -> VectorField<T> {
    let grid = v.grid();
    let mut a = SpectralField::zeros(grid);
    let mut b = SpectralField::zeros(grid);
    for (k1, k2, x) in v.u1().modes() {
        let y = v.u2().get(k1, k2);
        let (p, q) = if k1 == 0 && k2 == 0 {
            (x, y)
        } else {
            let (f1, f2) = (T::from_i64_lossy(k1), T::from_i64_lossy(k2));
            let k2n = f1 * f1 + f2 * f2;
            (
                x * (T::one() - f1 * f1 / k2n) - y * (f1 * f2 / k2n),
                y * (T::one() - f2 * f2 / k2n) - x * (f1 * f2 / k2n),
            )
        };
        a.set(k1, k2, p).expect("stored mode");
        b.set(k1, k2, q).expect("stored mode");
    }
    VectorField::new(a, b).expect("components share a grid")
}

/// `Δ_j f` from per-mode cutoff evaluations.
pub fn direct_block<T: Real>(f: &SpectralField<T>, j: usize) -> SpectralField<T> {
    let mut out = SpectralField::zeros(f.grid());
    for (k1, k2, c) in f.modes() {
        let w = if j == 0 {
            if k1 == 0 && k2 == 0 {
                T::one()
            } else {
                T::zero()
            }
        } else {
            let r = T::from_i64_lossy(k1 * k1 + k2 * k2).sqrt() / T::lit(2f64.powi(j as i32));
            crate::littlewood_paley::chi_eval(r).expect("non-negative")
                - crate::littlewood_paley::chi_eval(r * T::lit(2.0)).expect("non-negative")
        };
        out.set(k1, k2, c * w).expect("stored mode");
    }
    out
}

/// `u·∇(PΔ_j f) − PΔ_j(u·∇f)` composed from the direct evaluations above.
pub fn direct_commutator<T: Real>(u: &VectorField<T>, f: &VectorField<T>, j: usize) -> VectorField<T> {
    let block = |w: &VectorField<T>| {
        VectorField::new(direct_block(w.u1(), j), direct_block(w.u2(), j)).expect("same grid")
    };
    let first = direct_advection(u, &direct_projection(&block(f)));
    let second = direct_projection(&block(&direct_advection(u, f)));
    first.sub(&second)
}
