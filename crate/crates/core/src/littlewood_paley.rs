//! Littlewood-Paley analysis on the torus: dyadic blocks, Besov norms,
//! Bony's paraproduct decomposition and the advection/projection commutator.
//!
//! Block `j ≥ 1` multiplies each coefficient by `φ(|k|/2^j)` with
//! `φ(x) = χ(x) − χ(2x)`; block 0 keeps the mean. `|k|` is the Euclidean
//! norm of the wavenumber.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solver::leray_project;
use crate::spectral::{
    dealiased_product, fft2, index_of, smooth_size, wavenumber, Advection, Grid2D, SpectralField, VectorField,
};

/// Smooth monotone cutoff `χ` with `χ = 1` on `[0, 1/2]`, `χ(3/4) = 1/2`, `χ = 0` on `[1, ∞)`.
///
/// The transition on `[1/2, 1]` is `ψ(2(1 − x))` with
/// `ψ(t) = g(t) / (g(t) + g(1 − t))` and `g(t) = exp(−1/t)` for `t > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CutoffProfile;

impl CutoffProfile {
    pub fn chi<T: Real>(&self, x: T) -> Result<T> {
        if x < T::zero() || x.is_nan() {
            return Err(Error::Domain(format!("cutoff evaluated at negative argument {x}")));
        }
        Ok(chi_unchecked(x))
    }

    pub fn phi<T: Real>(&self, x: T) -> Result<T> {
        Ok(self.chi(x)? - self.chi(x + x)?)
    }
}

#[inline]
fn smooth_step_g<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else {
        (-t.recip()).exp()
    }
}

#[inline]
fn chi_unchecked<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x <= half {
        T::one()
    } else if x >= T::one() {
        T::zero()
    } else {
        let t = (T::one() - x) / half;
        let a = smooth_step_g(t);
        let b = smooth_step_g(T::one() - t);
        a / (a + b)
    }
}

/// `χ(x)` for the fixed cutoff profile.
pub fn chi_eval<T: Real>(x: T) -> Result<T> {
    CutoffProfile.chi(x)
}

/// Highest block index carrying a nonzero weight somewhere on the stored lattice.
///
/// It is the smallest `J` with `2^{J−1} ≥ max|k|`, which makes
/// `χ(|k|) + Σ_{j=1}^{J} φ(|k|/2^j) = χ(|k|/2^J) = 1` at every stored mode.
pub fn j_max(grid: Grid2D) -> usize {
    let half = (grid.n_points() / 2) as u128;
    let max_k_sq = 2 * half * half;
    let mut j = 1usize;
    while 4u128.pow((j - 1) as u32) < max_k_sq {
        j += 1;
    }
    j
}

/// Integrability exponent `p` of a Besov norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrability {
    Two,
    Infinity,
}

/// Summation exponent `r` of a Besov norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Summability {
    One,
    Two,
    Infinity,
}

/// Index `(s, p, r)` of the Besov norm `B^s_{p,r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex<T> {
    pub s: T,
    pub p: Integrability,
    pub r: Summability,
}

impl<T: Real> BesovIndex<T> {
    pub fn new(s: T, p: Integrability, r: Summability) -> Self {
        Self { s, p, r }
    }

    /// Parses numeric `(p, r)`; `f64::INFINITY` stands for `∞`.
    pub fn from_exponents(s: T, p: f64, r: f64) -> Result<Self> {
        let p = match p {
            2.0 => Integrability::Two,
            x if x.is_infinite() && x > 0.0 => Integrability::Infinity,
            _ => return Err(Error::Config(format!("unsupported integrability exponent p = {p}"))),
        };
        let r = match r {
            1.0 => Summability::One,
            2.0 => Summability::Two,
            x if x.is_infinite() && x > 0.0 => Summability::Infinity,
            _ => return Err(Error::Config(format!("unsupported summation exponent r = {r}"))),
        };
        Ok(Self { s, p, r })
    }

    /// `B^s_{∞,1}`.
    pub fn inf_1(s: T) -> Self {
        Self::new(s, Integrability::Infinity, Summability::One)
    }

    /// `B^s_{∞,2}`.
    pub fn inf_2(s: T) -> Self {
        Self::new(s, Integrability::Infinity, Summability::Two)
    }

    /// `B^s_{∞,∞}`.
    pub fn inf_inf(s: T) -> Self {
        Self::new(s, Integrability::Infinity, Summability::Infinity)
    }
}

/// Precomputed block weights for one grid.
#[derive(Debug, Clone)]
pub struct LittlewoodPaley<T> {
    grid: Grid2D,
    weights: Vec<Vec<T>>,
}

impl<T: Real> LittlewoodPaley<T> {
    pub fn new(grid: Grid2D) -> Self {
        let jm = j_max(grid);
        let weights = (0..=jm).map(|j| block_weights(grid, j)).collect();
        Self { grid, weights }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn j_max(&self) -> usize {
        self.weights.len() - 1
    }

    /// Weight of mode `(k1, k2)` in block `j`.
    pub fn weight(&self, j: usize, k1: i64, k2: i64) -> Option<T> {
        let n = self.grid.n_points();
        let w = self.weights.get(j)?;
        Some(w[index_of(k1, n)? * n + index_of(k2, n)?])
    }

    pub fn block(&self, f: &SpectralField<T>, j: usize) -> Result<SpectralField<T>> {
        self.grid.check_same(&f.grid())?;
        let w = self.weights.get(j).ok_or_else(|| {
            Error::Range(format!("block index {j} exceeds j_max = {}", self.j_max()))
        })?;
        Ok(f.weighted(w))
    }

    pub fn decompose(&self, f: &SpectralField<T>) -> Result<DyadicDecomposition<T>> {
        self.grid.check_same(&f.grid())?;
        Ok(DyadicDecomposition {
            grid: self.grid,
            blocks: self.weights.iter().map(|w| f.weighted(w)).collect(),
        })
    }

    /// The sequence `2^{js} ‖Δ_j f‖_{L^p}`, `j = 0..=j_max`.
    pub fn weighted_block_norms(&self, f: &SpectralField<T>, s: T, p: Integrability) -> Result<Vec<T>> {
        let dec = self.decompose(f)?;
        let scale = f.max_abs();
        Ok(dec
            .blocks
            .iter()
            .enumerate()
            .map(|(j, b)| {
                let norm = match p {
                    Integrability::Two => l2_norm(b),
                    Integrability::Infinity => sup_norm_relative(b, scale),
                };
                T::lit(2.0).powf(s * T::from_usize_lossy(j)) * norm
            })
            .collect())
    }

    pub fn besov_norm(&self, f: &SpectralField<T>, idx: BesovIndex<T>) -> Result<T> {
        let seq = self.weighted_block_norms(f, idx.s, idx.p)?;
        Ok(sequence_norm(&seq, idx.r))
    }

    /// Vector norm: sum of the two component norms.
    pub fn besov_norm_vector(&self, u: &VectorField<T>, idx: BesovIndex<T>) -> Result<T> {
        Ok(self.besov_norm(u.u1(), idx)? + self.besov_norm(u.u2(), idx)?)
    }
}

fn block_weights<T: Real>(grid: Grid2D, j: usize) -> Vec<T> {
    let n = grid.n_points();
    let mut w = Vec::with_capacity(grid.len());
    let scale = T::lit(2.0).powi(j as i32);
    for p in 0..n {
        let k1 = wavenumber(p, n);
        for q in 0..n {
            let k2 = wavenumber(q, n);
            let value = if j == 0 {
                // χ(|k|) on the lattice: only k = 0 survives.
                if k1 == 0 && k2 == 0 {
                    T::one()
                } else {
                    T::zero()
                }
            } else {
                let r = T::from_i64_lossy(k1 * k1 + k2 * k2).sqrt() / scale;
                chi_unchecked(r) - chi_unchecked(r + r)
            };
            w.push(value);
        }
    }
    w
}

/// Ordered blocks `Δ_0 f, …, Δ_{j_max} f`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDecomposition<T> {
    grid: Grid2D,
    blocks: Vec<SpectralField<T>>,
}

impl<T: Real> DyadicDecomposition<T> {
    pub fn new(f: &SpectralField<T>) -> Self {
        LittlewoodPaley::new(f.grid())
            .decompose(f)
            .expect("decomposition on the field's own grid")
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn j_max(&self) -> usize {
        self.blocks.len() - 1
    }

    #[inline]
    pub fn blocks(&self) -> &[SpectralField<T>] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> Option<&SpectralField<T>> {
        self.blocks.get(j)
    }

    /// `S_j f = Σ_{l ≤ j} Δ_l f`; `None` stands for `S_{−1} = 0`.
    pub fn partial_sum(&self, j: Option<usize>) -> SpectralField<T> {
        let mut acc = SpectralField::zeros(self.grid);
        if let Some(j) = j {
            for b in self.blocks.iter().take(j + 1) {
                acc += b;
            }
        }
        acc
    }

    /// `Σ_j Δ_j f`.
    pub fn reconstruct(&self) -> SpectralField<T> {
        self.partial_sum(Some(self.j_max()))
    }
}

/// `Δ_j f` for a single block.
pub fn dyadic_block<T: Real>(f: &SpectralField<T>, j: usize) -> Result<SpectralField<T>> {
    let jm = j_max(f.grid());
    if j > jm {
        return Err(Error::Range(format!("block index {j} exceeds j_max = {jm}")));
    }
    Ok(f.weighted(&block_weights(f.grid(), j)))
}

/// `sup |f|`, sampled on a grid oversampled 4× relative to the field's
/// effective bandwidth (the smallest grid resolving its highest `|k|_∞`
/// whose coefficient exceeds machine epsilon times `max |f̂|`).
pub fn sup_norm<T: Real>(f: &SpectralField<T>) -> T {
    sup_norm_relative(f, f.max_abs())
}

/// As [`sup_norm`], with the bandwidth cut relative to `scale` instead of
/// `max |f̂|`. Coefficients that do not fit the sampling grid are dropped,
/// which perturbs the result by at most `n² ε scale`.
pub(crate) fn sup_norm_relative<T: Real>(f: &SpectralField<T>, scale: T) -> T {
    let Some(support) = f.support_radius_inf() else {
        return T::zero();
    };
    let cut = T::epsilon() * scale;
    let band = f
        .modes()
        .filter(|(_, _, c)| c.norm_sqr().sqrt() > cut)
        .map(|(k1, k2, _)| k1.unsigned_abs().max(k2.unsigned_abs()) as usize)
        .max()
        .unwrap_or(0);
    let grid = f.grid();
    let n = grid.n_points();
    let m = smooth_size(8 * (band + 1));
    let b = support as i64;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m * m];
    for k1 in -b..=b {
        let (Some(p), Some(pm)) = (index_of(k1, n), index_of(k1, m)) else {
            continue;
        };
        for k2 in -b..=b {
            let (Some(q), Some(qm)) = (index_of(k2, n), index_of(k2, m)) else {
                continue;
            };
            buf[pm * m + qm] = f.coeffs()[p * n + q];
        }
    }
    // The Nyquist mode of an n-grid is its own conjugate partner; split it
    // across ±n/2 so the oversampled function is the real one it aliases to.
    let half = (n / 2) as i64;
    if b == half && index_of(half, m).is_some() {
        for (k1, k2, c) in f.modes() {
            if k1 != -half && k2 != -half {
                continue;
            }
            let targets: Vec<(i64, i64)> = {
                let s1: &[i64] = if k1 == -half { &[-half, half] } else { &[k1] };
                let s2: &[i64] = if k2 == -half { &[-half, half] } else { &[k2] };
                s1.iter().flat_map(|&a| s2.iter().map(move |&b| (a, b))).collect()
            };
            let share = c / T::from_usize_lossy(targets.len());
            for (a, bb) in targets {
                let (pm, qm) = (index_of(a, m).unwrap(), index_of(bb, m).unwrap());
                buf[pm * m + qm] = share;
            }
        }
    }
    fft2(&mut buf, m, true);
    buf.iter().fold(T::zero(), |acc, c| acc.max(c.re.abs()))
}

/// `‖f‖_{L²(T²)} = 2π (Σ_k |f̂(k)|²)^{1/2}`.
pub fn l2_norm<T: Real>(f: &SpectralField<T>) -> T {
    T::TAU() * f.energy().sqrt()
}

pub fn block_norm<T: Real>(f: &SpectralField<T>, p: Integrability) -> T {
    match p {
        Integrability::Two => l2_norm(f),
        Integrability::Infinity => sup_norm(f),
    }
}

fn sequence_norm<T: Real>(seq: &[T], r: Summability) -> T {
    match r {
        Summability::One => seq.iter().fold(T::zero(), |s, &x| s + x),
        Summability::Two => seq.iter().fold(T::zero(), |s, &x| s + x * x).sqrt(),
        Summability::Infinity => seq.iter().fold(T::zero(), |s, &x| s.max(x)),
    }
}

/// `‖f‖_{B^s_{p,r}}` of a scalar field.
pub fn besov_norm<T: Real>(f: &SpectralField<T>, idx: BesovIndex<T>) -> Result<T> {
    LittlewoodPaley::new(f.grid()).besov_norm(f, idx)
}

/// `‖u‖_{B^s_{p,r}}` of a vector field, taken as the sum of the component norms.
pub fn besov_norm_vector<T: Real>(u: &VectorField<T>, idx: BesovIndex<T>) -> Result<T> {
    LittlewoodPaley::new(u.grid()).besov_norm_vector(u, idx)
}

/// Constant `C = (Σ_{j=0}^{J} 2^{−2εj})^{1/2}` of the finite-block embedding
/// `‖f‖_{B^s_{∞,1}} ≤ C ‖f‖_{B^{s+ε}_{∞,2}}`.
pub fn embedding_constant<T: Real>(eps: T, j_max: usize) -> T {
    (0..=j_max)
        .map(|j| T::lit(2.0).powf(-(eps + eps) * T::from_usize_lossy(j)))
        .fold(T::zero(), |s, x| s + x)
        .sqrt()
}

/// Bony decomposition `uv = T_u v + T_v u + R(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BonyDecomposition<T> {
    /// `T_u v = Σ_j S_{j−1}u Δ_j v`.
    pub para_uv: SpectralField<T>,
    /// `T_v u = Σ_j S_{j−1}v Δ_j u`.
    pub para_vu: SpectralField<T>,
    /// `R(u, v) = Σ_{|k−j| ≤ 1} Δ_k u Δ_j v`.
    pub remainder: SpectralField<T>,
}

impl<T: Real> BonyDecomposition<T> {
    pub fn total(&self) -> SpectralField<T> {
        let mut s = &self.para_uv + &self.para_vu;
        s += &self.remainder;
        s
    }
}

fn paraproduct<T: Real>(a: &DyadicDecomposition<T>, b: &DyadicDecomposition<T>) -> Result<SpectralField<T>> {
    let mut acc = SpectralField::zeros(a.grid());
    let mut low = SpectralField::zeros(a.grid());
    for j in 2..=b.j_max() {
        // S_{j-1} a = Σ_{k ≤ j-2} Δ_k a, leaving |k − j| ≤ 1 to the remainder.
        low += &a.blocks()[j - 2];
        acc += &dealiased_product(&low, &b.blocks()[j])?;
    }
    Ok(acc)
}

pub fn bony_decompose<T: Real>(u: &SpectralField<T>, v: &SpectralField<T>) -> Result<BonyDecomposition<T>> {
    u.grid().check_same(&v.grid())?;
    let lp = LittlewoodPaley::new(u.grid());
    let du = lp.decompose(u)?;
    let dv = lp.decompose(v)?;
    let jm = lp.j_max();
    let mut remainder = SpectralField::zeros(u.grid());
    for k in 0..=jm {
        let mut near = SpectralField::zeros(u.grid());
        for j in k.saturating_sub(1)..=(k + 1).min(jm) {
            near += &dv.blocks()[j];
        }
        remainder += &dealiased_product(&du.blocks()[k], &near)?;
    }
    Ok(BonyDecomposition {
        para_uv: paraproduct(&du, &dv)?,
        para_vu: paraproduct(&dv, &du)?,
        remainder,
    })
}

/// `[u·∇, PΔ_j] f = u·∇(PΔ_j f) − PΔ_j(u·∇f)` for a divergence-free `u`.
pub fn lp_commutator<T: Real>(u: &VectorField<T>, f: &VectorField<T>, j: usize) -> Result<VectorField<T>> {
    u.grid().check_same(&f.grid())?;
    let defect = u.divergence_defect();
    if defect > T::structural_tol() {
        return Err(Error::Contract(format!(
            "commutator requires a divergence-free advecting field (relative defect {defect:e})"
        )));
    }
    let lp = LittlewoodPaley::new(u.grid());
    let block = |w: &VectorField<T>| -> Result<VectorField<T>> {
        VectorField::new(lp.block(w.u1(), j)?, lp.block(w.u2(), j)?)
    };
    let adv = Advection::new(u);
    let first = adv.apply(&leray_project(&block(f)?))?;
    let second = leray_project(&block(&adv.apply(f)?)?);
    Ok(first.sub(&second))
}
