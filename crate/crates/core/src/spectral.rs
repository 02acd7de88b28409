//! Fourier representation of fields on the torus `[0, 2π)²`.
//!
//! A field is expanded as `f(x) = Σ_k f̂(k) e^{i k·x}` over the integer
//! lattice. The forward transform divides by `n²`, so `f̂(0,0)` is the mean.
//!
//! Coefficients are stored in FFT order on the full `n × n` index grid:
//! index `p` carries wavenumber `p` for `p < n/2` and `p - n` otherwise.
//! Only modes with `|k_i| ≤ k_max = n/2 - 1` are *resolvable*; the Nyquist
//! row and column are carried so that forward and inverse transforms are
//! exact inverses on arbitrary real samples, but every spectral operator
//! (differentiation, truncation, products) drops them.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_complex::Complex;
use rustfft::Fft;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform collocation grid with `n` points per dimension on `[0, 2π)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid2D {
    n: usize,
}

impl Grid2D {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 4 || !n_points.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "grid size must be even and at least 4, got {n_points}"
            )));
        }
        Ok(Self { n: n_points })
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n
    }

    /// Largest resolvable wavenumber per dimension.
    #[inline]
    pub fn k_max(&self) -> usize {
        self.n / 2 - 1
    }

    /// Number of samples (and stored coefficients).
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed wavenumber stored at FFT index `p`.
    #[inline]
    pub fn wavenumber(&self, p: usize) -> i64 {
        wavenumber(p, self.n)
    }

    /// FFT index of wavenumber `k`, or `None` if `k` is not stored.
    #[inline]
    pub fn index_of(&self, k: i64) -> Option<usize> {
        index_of(k, self.n)
    }

    #[inline]
    pub fn is_resolvable(&self, k1: i64, k2: i64) -> bool {
        let km = self.k_max() as i64;
        k1.abs() <= km && k2.abs() <= km
    }

    /// Collocation coordinate `2πa/n`.
    pub fn coordinate<T: Real>(&self, a: usize) -> T {
        T::TAU() * T::from_usize_lossy(a) / T::from_usize_lossy(self.n)
    }

    pub(crate) fn check_same(&self, other: &Grid2D) -> Result<()> {
        if self != other {
            return Err(Error::Config(format!(
                "grid mismatch: {} vs {} points",
                self.n, other.n
            )));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn wavenumber(p: usize, n: usize) -> i64 {
    if p < n / 2 {
        p as i64
    } else {
        p as i64 - n as i64
    }
}

#[inline]
pub(crate) fn index_of(k: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if k >= -half && k < half {
        Some(if k >= 0 { k as usize } else { (k + n as i64) as usize })
    } else {
        None
    }
}

/// Real samples at the collocation points, row-major: `values[i*n + j] = f(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField<T> {
    grid: Grid2D,
    values: Vec<T>,
}

impl<T: Real> RealField<T> {
    pub fn new(grid: Grid2D, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` at every collocation point.
    pub fn from_fn(grid: Grid2D, f: impl Fn(T, T) -> T) -> Self {
        let n = grid.n_points();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x = grid.coordinate::<T>(i);
            for j in 0..n {
                values.push(f(x, grid.coordinate::<T>(j)));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Grid average of `f²`.
    pub fn mean_square(&self) -> T {
        let s = self.values.iter().fold(T::zero(), |s, &v| s + v * v);
        s / T::from_usize_lossy(self.values.len())
    }
}

/// Fourier coefficients of a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    grid: Grid2D,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            coeffs: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    /// Wraps raw coefficients in FFT order.
    pub fn from_coeffs(grid: Grid2D, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Config(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Builds a field from explicit `(k1, k2) -> f̂` assignments; later entries overwrite earlier ones.
    pub fn from_modes(
        grid: Grid2D,
        modes: impl IntoIterator<Item = ((i64, i64), Complex<T>)>,
    ) -> Result<Self> {
        let mut field = Self::zeros(grid);
        for ((k1, k2), c) in modes {
            field.set(k1, k2, c)?;
        }
        Ok(field)
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    #[inline]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    /// Coefficient of mode `(k1, k2)`; zero for modes that are not stored.
    pub fn get(&self, k1: i64, k2: i64) -> Complex<T> {
        let n = self.grid.n_points();
        match (index_of(k1, n), index_of(k2, n)) {
            (Some(p), Some(q)) => self.coeffs[p * n + q],
            _ => Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn set(&mut self, k1: i64, k2: i64, c: Complex<T>) -> Result<()> {
        let n = self.grid.n_points();
        match (index_of(k1, n), index_of(k2, n)) {
            (Some(p), Some(q)) => {
                self.coeffs[p * n + q] = c;
                Ok(())
            }
            _ => Err(Error::Range(format!(
                "mode ({k1}, {k2}) is not stored on a {n}-point grid"
            ))),
        }
    }

    /// Zero-frequency coefficient, i.e. the mean of the field.
    #[inline]
    pub fn mean(&self) -> Complex<T> {
        self.coeffs[0]
    }

    /// Iterates `(k1, k2, f̂)` over all stored modes.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64, Complex<T>)> + '_ {
        let n = self.grid.n_points();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(idx, &c)| (wavenumber(idx / n, n), wavenumber(idx % n, n), c))
    }

    /// Mode-wise multiplication by `m(k1, k2)`.
    pub fn apply_multiplier(&self, m: impl Fn(i64, i64) -> Complex<T>) -> Self {
        let mut out = self.clone();
        out.multiply_in_place(m);
        out
    }

    pub(crate) fn multiply_in_place(&mut self, m: impl Fn(i64, i64) -> Complex<T>) {
        let n = self.grid.n_points();
        for p in 0..n {
            let k1 = wavenumber(p, n);
            for q in 0..n {
                let c = &mut self.coeffs[p * n + q];
                *c = *c * m(k1, wavenumber(q, n));
            }
        }
    }

    /// Mode-wise real weighting.
    pub(crate) fn weighted(&self, w: &[T]) -> Self {
        debug_assert_eq!(w.len(), self.coeffs.len());
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(w).map(|(&c, &w)| c * w).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: T, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (c, &o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c = *c + o * a;
        }
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm_sqr())).sqrt()
    }

    /// `Σ_k |f̂(k)|²`, the grid mean of `|f|²` by Parseval.
    pub fn energy(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |s, c| s + c.norm_sqr())
    }

    /// Largest `|f̂(-k) - conj f̂(k)|` over the stored lattice.
    pub fn hermitian_defect(&self) -> T {
        let n = self.grid.n_points();
        let mut worst = T::zero();
        for p in 0..n {
            let pm = (n - p) % n;
            for q in 0..n {
                let qm = (n - q) % n;
                let d = self.coeffs[pm * n + qm] - self.coeffs[p * n + q].conj();
                worst = worst.max(d.norm_sqr());
            }
        }
        worst.sqrt()
    }

    /// Largest `|k|_∞` carrying a nonzero coefficient, or `None` for the zero field.
    pub fn support_radius_inf(&self) -> Option<usize> {
        self.modes()
            .filter(|(_, _, c)| c.re != T::zero() || c.im != T::zero())
            .map(|(k1, k2, _)| k1.unsigned_abs().max(k2.unsigned_abs()) as usize)
            .max()
    }
}

impl<T: Real> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        debug_assert_eq!(self.grid, rhs.grid);
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        debug_assert_eq!(self.grid, rhs.grid);
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> AddAssign<&SpectralField<T>> for SpectralField<T> {
    fn add_assign(&mut self, rhs: &SpectralField<T>) {
        debug_assert_eq!(self.grid, rhs.grid);
        for (a, &b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a = *a + b;
        }
    }
}

impl<T: Real> SubAssign<&SpectralField<T>> for SpectralField<T> {
    fn sub_assign(&mut self, rhs: &SpectralField<T>) {
        debug_assert_eq!(self.grid, rhs.grid);
        for (a, &b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a = *a - b;
        }
    }
}

impl<T: Real> Neg for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn neg(self) -> SpectralField<T> {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, s: T) -> SpectralField<T> {
        self.scale(s)
    }
}

/// Velocity field `(u1, u2)` with a divergence-free flag.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    pub(crate) u1: SpectralField<T>,
    pub(crate) u2: SpectralField<T>,
    pub(crate) div_free: bool,
}

impl<T: Real> VectorField<T> {
    /// Pairs two components; the divergence-free flag starts unset.
    pub fn new(u1: SpectralField<T>, u2: SpectralField<T>) -> Result<Self> {
        u1.grid.check_same(&u2.grid)?;
        Ok(Self {
            u1,
            u2,
            div_free: false,
        })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            u1: SpectralField::zeros(grid),
            u2: SpectralField::zeros(grid),
            div_free: true,
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.u1.grid
    }

    #[inline]
    pub fn u1(&self) -> &SpectralField<T> {
        &self.u1
    }

    #[inline]
    pub fn u2(&self) -> &SpectralField<T> {
        &self.u2
    }

    #[inline]
    pub fn components(&self) -> [&SpectralField<T>; 2] {
        [&self.u1, &self.u2]
    }

    pub fn into_components(self) -> (SpectralField<T>, SpectralField<T>) {
        (self.u1, self.u2)
    }

    #[inline]
    pub fn is_div_free(&self) -> bool {
        self.div_free
    }

    /// `∂₁u1 + ∂₂u2`.
    pub fn divergence(&self) -> SpectralField<T> {
        let mut d = differentiate(&self.u1, Derivative::Ddx);
        d += &differentiate(&self.u2, Derivative::Ddy);
        d
    }

    /// `max_k |k·û(k)| / max_k(|û1(k)| + |û2(k)|)`, zero for the zero field.
    pub fn divergence_defect(&self) -> T {
        let n = self.grid().n_points();
        let half = (n / 2) as i64;
        // Nyquist modes carry no derivative.
        let ks: Vec<T> = (0..n)
            .map(|p| match wavenumber(p, n) {
                k if k == -half => T::zero(),
                k => T::from_i64_lossy(k),
            })
            .collect();
        let mut num = T::zero();
        let mut den = T::zero();
        for (p, &f1) in ks.iter().enumerate() {
            let (r1, r2) = (&self.u1.coeffs[p * n..(p + 1) * n], &self.u2.coeffs[p * n..(p + 1) * n]);
            for ((&a, &b), &f2) in r1.iter().zip(r2).zip(&ks) {
                num = num.max((a * f1 + b * f2).norm_sqr());
                den = den.max(a.norm_sqr().sqrt() + b.norm_sqr().sqrt());
            }
        }
        if den == T::zero() {
            T::zero()
        } else {
            num.sqrt() / den
        }
    }

    /// Sets the divergence-free flag after checking the invariant numerically.
    pub fn try_into_div_free(mut self) -> Result<Self> {
        let defect = self.divergence_defect();
        if defect > T::structural_tol() {
            return Err(Error::Contract(format!(
                "field is not divergence-free (relative defect {defect:e})"
            )));
        }
        self.div_free = true;
        Ok(self)
    }

    pub(crate) fn with_flag(mut self, div_free: bool) -> Self {
        self.div_free = div_free;
        self
    }

    pub fn map(&self, f: impl Fn(&SpectralField<T>) -> SpectralField<T>) -> Self {
        Self {
            u1: f(&self.u1),
            u2: f(&self.u2),
            div_free: false,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            u1: self.u1.scale(s),
            u2: self.u2.scale(s),
            div_free: self.div_free,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            u1: &self.u1 - &other.u1,
            u2: &self.u2 - &other.u2,
            div_free: self.div_free && other.div_free,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            u1: &self.u1 + &other.u1,
            u2: &self.u2 + &other.u2,
            div_free: self.div_free && other.div_free,
        }
    }

    /// Largest coefficient modulus over both components.
    pub fn max_abs(&self) -> T {
        self.u1.max_abs().max(self.u2.max_abs())
    }

    pub fn energy(&self) -> T {
        self.u1.energy() + self.u2.energy()
    }
}

fn plan<T: Real>(len: usize, inverse: bool) -> Arc<dyn Fft<T>> {
    let mut planner = T::planner().lock().unwrap_or_else(|e| e.into_inner());
    if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    }
}

fn transpose_in_place<T: Copy>(buf: &mut [T], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

/// Unnormalized 2D DFT of an `m × m` row-major buffer.
pub(crate) fn fft2<T: Real>(buf: &mut [Complex<T>], m: usize, inverse: bool) {
    debug_assert_eq!(buf.len(), m * m);
    let fft = plan::<T>(m, inverse);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
    transpose_in_place(buf, m);
    fft.process_with_scratch(buf, &mut scratch);
    transpose_in_place(buf, m);
}

/// Samples → coefficients, `f̂(k) = n⁻² Σ_x f(x) e^{-ik·x}`.
pub fn forward_transform<T: Real>(f: &RealField<T>) -> SpectralField<T> {
    let n = f.grid.n_points();
    let mut buf: Vec<Complex<T>> = f.values.iter().map(|&v| Complex::new(v, T::zero())).collect();
    fft2(&mut buf, n, false);
    let inv = T::one() / T::from_usize_lossy(n * n);
    for c in &mut buf {
        *c = *c * inv;
    }
    SpectralField {
        grid: f.grid,
        coeffs: buf,
    }
}

/// Coefficients → samples; the input must be Hermitian-symmetric.
pub fn inverse_transform<T: Real>(f: &SpectralField<T>) -> Result<RealField<T>> {
    let scale = f.max_abs();
    let tol = T::structural_tol() * scale;
    let defect = f.hermitian_defect();
    if defect > tol {
        return Err(Error::Data(format!(
            "coefficients violate Hermitian symmetry (defect {defect:e}, magnitude {scale:e})"
        )));
    }
    let n = f.grid.n_points();
    let mut buf = f.coeffs.clone();
    fft2(&mut buf, n, true);
    let residue = buf.iter().fold(T::zero(), |m, c| m.max(c.im.abs()));
    let l1 = f.coeffs.iter().fold(T::zero(), |s, c| s + c.norm_sqr().sqrt());
    if residue > T::structural_tol() * l1 {
        return Err(Error::Data(format!(
            "inverse transform left imaginary residue {residue:e}"
        )));
    }
    Ok(RealField {
        grid: f.grid,
        values: buf.into_iter().map(|c| c.re).collect(),
    })
}

/// Zeros every mode with `|k|_∞ > n_trunc` (Nyquist included).
pub fn truncate_modes<T: Real>(f: &SpectralField<T>, n_trunc: usize) -> Result<SpectralField<T>> {
    let km = f.grid.k_max();
    if n_trunc > km {
        return Err(Error::Config(format!(
            "truncation {n_trunc} exceeds resolvable bound {km}"
        )));
    }
    let mut out = f.clone();
    truncate_in_place(&mut out, n_trunc);
    Ok(out)
}

pub(crate) fn truncate_in_place<T: Real>(f: &mut SpectralField<T>, n_trunc: usize) {
    let bound = n_trunc as i64;
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    f.multiply_in_place(|k1, k2| {
        if k1.abs() > bound || k2.abs() > bound {
            zero
        } else {
            one
        }
    });
}

/// Spectral differential operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Ddx,
    Ddy,
    Laplacian,
}

pub fn differentiate<T: Real>(f: &SpectralField<T>, op: Derivative) -> SpectralField<T> {
    let half = (f.grid.n_points() / 2) as i64;
    let zero = T::zero();
    match op {
        Derivative::Ddx => f.apply_multiplier(|k1, _| {
            if k1 == -half {
                Complex::new(zero, zero)
            } else {
                Complex::new(zero, T::from_i64_lossy(k1))
            }
        }),
        Derivative::Ddy => f.apply_multiplier(|_, k2| {
            if k2 == -half {
                Complex::new(zero, zero)
            } else {
                Complex::new(zero, T::from_i64_lossy(k2))
            }
        }),
        Derivative::Laplacian => {
            f.apply_multiplier(|k1, k2| Complex::new(-T::from_i64_lossy(k1 * k1 + k2 * k2), zero))
        }
    }
}

/// Smallest `2^a 3^b ≥ x`.
pub(crate) fn smooth_size(x: usize) -> usize {
    let mut best = usize::MAX;
    let mut p2 = 1usize;
    while p2 < 2 * x.max(1) {
        let mut v = p2;
        while v < x {
            v *= 3;
        }
        best = best.min(v);
        p2 *= 2;
    }
    best
}

/// Size of the zero-padded grid used for quadratic products.
#[inline]
pub fn padded_size(n: usize) -> usize {
    3 * n / 2
}

/// Places the resolvable modes of `f` on an `m × m` index grid and returns physical samples.
pub(crate) fn to_padded_physical<T: Real>(f: &SpectralField<T>, m: usize) -> Vec<T> {
    let n = f.grid.n_points();
    let km = f.grid.k_max() as i64;
    debug_assert!(m > 2 * km as usize);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m * m];
    for k1 in -km..=km {
        let p = index_of(k1, n).unwrap();
        let pm = index_of(k1, m).unwrap();
        for k2 in -km..=km {
            let q = index_of(k2, n).unwrap();
            let qm = index_of(k2, m).unwrap();
            buf[pm * m + qm] = f.coeffs[p * n + q];
        }
    }
    fft2(&mut buf, m, true);
    buf.into_iter().map(|c| c.re).collect()
}

/// Inverse of [`to_padded_physical`] restricted to the resolvable modes of `grid`.
pub(crate) fn from_padded_physical<T: Real>(values: &[T], m: usize, grid: Grid2D) -> SpectralField<T> {
    let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
    fft2(&mut buf, m, false);
    let inv = T::one() / T::from_usize_lossy(m * m);
    let n = grid.n_points();
    let km = grid.k_max() as i64;
    let mut out = SpectralField::zeros(grid);
    for k1 in -km..=km {
        let p = index_of(k1, n).unwrap();
        let pm = index_of(k1, m).unwrap();
        for k2 in -km..=km {
            let q = index_of(k2, n).unwrap();
            let qm = index_of(k2, m).unwrap();
            out.coeffs[p * n + q] = buf[pm * m + qm] * inv;
        }
    }
    out
}

/// Product `a·b` restricted to the resolvable modes, free of aliasing.
///
/// Uses 3/2 zero padding, so the result equals the exact mode convolution of
/// the resolvable parts of `a` and `b` on every resolvable output mode.
pub fn dealiased_product<T: Real>(a: &SpectralField<T>, b: &SpectralField<T>) -> Result<SpectralField<T>> {
    a.grid.check_same(&b.grid)?;
    let m = padded_size(a.grid.n_points());
    let pa = to_padded_physical(a, m);
    let pb = to_padded_physical(b, m);
    let prod: Vec<T> = pa.iter().zip(&pb).map(|(&x, &y)| x * y).collect();
    Ok(from_padded_physical(&prod, m, a.grid))
}

/// Advecting velocity cached in padded physical space, so `u·∇v` can be
/// evaluated repeatedly for a fixed `u`.
#[derive(Debug, Clone)]
pub struct Advection<T> {
    grid: Grid2D,
    band: usize,
    m: usize,
    u1: Vec<T>,
    u2: Vec<T>,
}

/// Places modes `|k|_∞ ≤ band` of the lattice on an `m × m` index grid,
/// mapping each coefficient through `f(k1, k2, idx)`, and inverse-transforms.
fn padded_with<T: Real>(
    n: usize,
    band: usize,
    m: usize,
    f: impl Fn(i64, i64, usize) -> Complex<T>,
) -> Vec<Complex<T>> {
    let km = band as i64;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m * m];
    for k1 in -km..=km {
        let (p, pm) = (index_of(k1, n).unwrap(), index_of(k1, m).unwrap());
        for k2 in -km..=km {
            let (q, qm) = (index_of(k2, n).unwrap(), index_of(k2, m).unwrap());
            buf[pm * m + qm] = f(k1, k2, p * n + q);
        }
    }
    fft2(&mut buf, m, true);
    buf
}

/// Samples of two real fields from one complex FFT: `a + i b` maps to `a(x) + i b(x)`.
fn padded_pair<T: Real>(a: &SpectralField<T>, b: &SpectralField<T>, band: usize, m: usize) -> (Vec<T>, Vec<T>) {
    let i = Complex::new(T::zero(), T::one());
    padded_with(a.grid.n_points(), band, m, |_, _, idx| a.coeffs[idx] + i * b.coeffs[idx])
        .into_iter()
        .map(|c| (c.re, c.im))
        .unzip()
}

/// Samples of `(∂_x f, ∂_y f)`; `ik₁f̂ + i·ik₂f̂ = (−k₂ + ik₁) f̂`.
fn padded_gradient<T: Real>(f: &SpectralField<T>, band: usize, m: usize) -> Vec<Complex<T>> {
    padded_with(f.grid.n_points(), band, m, |k1, k2, idx| {
        f.coeffs[idx] * Complex::new(-T::from_i64_lossy(k2), T::from_i64_lossy(k1))
    })
}

/// Inverse of [`padded_pair`]: splits `FFT(a + i b)` by Hermitian symmetry.
fn unpad_pair<T: Real>(a: &[T], b: &[T], m: usize, grid: Grid2D, band: usize) -> (SpectralField<T>, SpectralField<T>) {
    let mut buf: Vec<Complex<T>> = a.iter().zip(b).map(|(&x, &y)| Complex::new(x, y)).collect();
    fft2(&mut buf, m, false);
    let half = T::lit(0.5) / T::from_usize_lossy(m * m);
    let n = grid.n_points();
    let km = band as i64;
    let mut fa = SpectralField::zeros(grid);
    let mut fb = SpectralField::zeros(grid);
    for k1 in -km..=km {
        let p = index_of(k1, n).unwrap();
        let (pm, pr) = (index_of(k1, m).unwrap(), index_of(-k1, m).unwrap());
        for k2 in -km..=km {
            let q = index_of(k2, n).unwrap();
            let (qm, qr) = (index_of(k2, m).unwrap(), index_of(-k2, m).unwrap());
            let z = buf[pm * m + qm];
            let zr = buf[pr * m + qr].conj();
            fa.coeffs[p * n + q] = (z + zr) * half;
            let d = (z - zr) * half;
            fb.coeffs[p * n + q] = Complex::new(d.im, -d.re);
        }
    }
    (fa, fb)
}

impl<T: Real> Advection<T> {
    /// Products on the 3/2-padded grid, exact on every resolvable mode.
    pub fn new(u: &VectorField<T>) -> Self {
        let grid = u.grid();
        Self::with_band(u, grid.k_max(), padded_size(grid.n_points()))
    }

    /// For `u` and arguments supported in `|k|_∞ ≤ band`; the result is exact on
    /// those modes and zero outside. A grid of `3·band + 1` points suffices.
    pub fn banded(u: &VectorField<T>, band: usize) -> Self {
        let band = band.min(u.grid().k_max());
        let mut m = smooth_size(3 * band + 1);
        if m % 2 == 1 {
            m += 1;
        }
        Self::with_band(u, band, m)
    }

    fn with_band(u: &VectorField<T>, band: usize, m: usize) -> Self {
        let (u1, u2) = padded_pair(&u.u1, &u.u2, band, m);
        Self {
            grid: u.grid(),
            band,
            m,
            u1,
            u2,
        }
    }

    /// Dealiased `(u·∇) v`.
    pub fn apply(&self, v: &VectorField<T>) -> Result<VectorField<T>> {
        self.grid.check_same(&v.grid())?;
        let w1 = self.physical(&v.u1);
        let w2 = self.physical(&v.u2);
        let (u1, u2) = unpad_pair(&w1, &w2, self.m, self.grid, self.band);
        Ok(VectorField {
            u1,
            u2,
            div_free: false,
        })
    }

    /// Dealiased `u·∇f` for a scalar `f` on the same grid.
    pub fn apply_scalar(&self, f: &SpectralField<T>) -> SpectralField<T> {
        debug_assert_eq!(self.grid, f.grid);
        let w = self.physical(f);
        let zero = vec![T::zero(); w.len()];
        unpad_pair(&w, &zero, self.m, self.grid, self.band).0
    }

    /// Samples of `u·∇f` on the padded grid.
    fn physical(&self, f: &SpectralField<T>) -> Vec<T> {
        let grad = padded_gradient(f, self.band, self.m);
        self.u1
            .iter()
            .zip(&self.u2)
            .zip(&grad)
            .map(|((&a, &b), g)| a * g.re + b * g.im)
            .collect()
    }
}

/// Dealiased `(u·∇) v`, restricted to the resolvable modes.
pub fn advection_term<T: Real>(u: &VectorField<T>, v: &VectorField<T>) -> Result<VectorField<T>> {
    u.grid().check_same(&v.grid())?;
    Advection::new(u).apply(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn banded_advection_matches_padded() {
        let g = grid(32);
        let field = |a: f64, b: f64| {
            forward_transform(&RealField::from_fn(g, move |x: f64, y: f64| {
                (a * x + 2.0 * y).sin() + 0.3 * (3.0 * x - b * y).cos() + (5.0 * x + 5.0 * y).sin()
            }))
        };
        let u = VectorField::new(field(1.0, 4.0), field(2.0, 1.0)).unwrap();
        let v = VectorField::new(field(3.0, 2.0), field(4.0, 5.0)).unwrap();
        let full = Advection::new(&u).apply(&v).unwrap();
        let banded = Advection::banded(&u, 10).apply(&v).unwrap();
        let full = full.map(|c| truncate_modes(c, 10).unwrap());
        assert!(full.sub(&banded).max_abs() < 1e-14 * full.max_abs());
        assert_eq!(banded.u1().support_radius_inf(), Some(10));
    }

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(matches!(Grid2D::new(7), Err(Error::Config(_))));
        assert!(matches!(Grid2D::new(2), Err(Error::Config(_))));
        assert_eq!(grid(64).k_max(), 31);
    }

    #[test]
    fn wavenumber_index_roundtrip() {
        let g = grid(8);
        for p in 0..8 {
            assert_eq!(g.index_of(g.wavenumber(p)), Some(p));
        }
        assert_eq!(g.wavenumber(4), -4);
        assert_eq!(g.index_of(4), None);
    }

    #[test]
    fn constant_field_has_only_mean() {
        let g = grid(8);
        let f = forward_transform(&RealField::from_fn(g, |_, _| 2.5));
        assert!((f.mean() - c(2.5, 0.0)).norm() < 1e-15);
        for (k1, k2, v) in f.modes() {
            if (k1, k2) != (0, 0) {
                assert!(v.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sine_coefficients() {
        let g = grid(16);
        let f = forward_transform(&RealField::from_fn(g, |x: f64, _| x.sin()));
        assert!((f.get(1, 0) - c(0.0, -0.5)).norm() < 1e-15);
        assert!((f.get(-1, 0) - c(0.0, 0.5)).norm() < 1e-15);
        let rest = f
            .modes()
            .filter(|&(k1, k2, _)| !((k1 == 1 || k1 == -1) && k2 == 0))
            .fold(0.0f64, |m, (_, _, v)| m.max(v.norm()));
        assert!(rest < 1e-15);
    }

    #[test]
    fn inverse_of_single_mean() {
        let g = grid(8);
        let f = SpectralField::from_modes(g, [((0, 0), c(3.0, 0.0))]).unwrap();
        let r = inverse_transform(&f).unwrap();
        assert!(r.values().iter().all(|&v| (v - 3.0).abs() < 1e-15));
    }

    #[test]
    fn inverse_recovers_sine_samples() {
        let g = grid(16);
        let samples = RealField::from_fn(g, |x: f64, _| x.sin());
        let back = inverse_transform(&forward_transform(&samples)).unwrap();
        for (a, b) in back.values().iter().zip(samples.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_rejects_asymmetric_coefficients() {
        let g = grid(8);
        let mut f = forward_transform(&RealField::from_fn(g, |x: f64, y: f64| (x + 2.0 * y).cos()));
        let v = f.get(1, 2);
        f.set(1, 2, v + c(1e-3, 0.0)).unwrap();
        assert!(matches!(inverse_transform(&f), Err(Error::Data(_))));
    }

    #[test]
    fn truncation_kills_high_modes() {
        let g = grid(16);
        let f = SpectralField::from_modes(g, [((3, 0), c(1.0, 0.0)), ((-3, 0), c(1.0, 0.0))]).unwrap();
        assert_eq!(truncate_modes(&f, 2).unwrap().max_abs(), 0.0);
        assert_eq!(truncate_modes(&f, 3).unwrap(), f);
        assert!(matches!(truncate_modes(&f, 8), Err(Error::Config(_))));
    }

    #[test]
    fn derivative_eigenrelations() {
        let g = grid(16);
        let s = forward_transform(&RealField::from_fn(g, |x: f64, _| x.sin()));
        let cx = forward_transform(&RealField::from_fn(g, |x: f64, _| x.cos()));
        assert!((&differentiate(&s, Derivative::Ddx) - &cx).max_abs() < 1e-15);
        assert!(differentiate(&s, Derivative::Ddy).max_abs() < 1e-15);

        let tg = forward_transform(&RealField::from_fn(g, |x: f64, y: f64| x.sin() * y.cos()));
        let lap = differentiate(&tg, Derivative::Laplacian);
        assert!((&lap - &tg.scale(-2.0)).max_abs() < 1e-14);
    }

    #[test]
    fn constant_advection_is_a_shift_derivative() {
        let g = grid(16);
        let (c1, c2) = (0.3, -1.2);
        let u = VectorField::new(
            forward_transform(&RealField::from_fn(g, |_, _| c1)),
            forward_transform(&RealField::from_fn(g, |_, _| c2)),
        )
        .unwrap();
        let v = VectorField::new(
            forward_transform(&RealField::from_fn(g, |x: f64, _| x.sin())),
            SpectralField::zeros(g),
        )
        .unwrap();
        let w = advection_term(&u, &v).unwrap();
        let expected = forward_transform(&RealField::from_fn(g, |x: f64, _| c1 * x.cos()));
        assert!((w.u1() - &expected).max_abs() < 1e-14);
        assert!(w.u2().max_abs() < 1e-14);

        let zero = advection_term(&VectorField::zeros(g), &v).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn advection_grid_mismatch() {
        let a = VectorField::<f64>::zeros(grid(8));
        let b = VectorField::<f64>::zeros(grid(16));
        assert!(matches!(advection_term(&a, &b), Err(Error::Config(_))));
        assert!(VectorField::new(SpectralField::<f64>::zeros(grid(8)), SpectralField::zeros(grid(16))).is_err());
    }

    #[test]
    fn f32_roundtrip() {
        let g = grid(16);
        let f = RealField::from_fn(g, |x: f32, y: f32| (x + y).sin() + 0.25 * (3.0 * x).cos());
        let back = inverse_transform(&forward_transform(&f)).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}
