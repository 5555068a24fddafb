//! Spectral calculus on smooth 2π-periodic functions sampled on a uniform grid.
//!
//! A [`GridFunction`] holds samples at `x_j = 2πj/N`. Linear constant-coefficient
//! operators act modewise on the discrete Fourier coefficients; pointwise products
//! are formed on a zero-padded grid of size `2N` and truncated back, so products
//! of band-limited inputs whose combined band fits below `N/2` are exact.
//!
//! Coefficients are normalized so that `f(x) = Σ c_n e^{inx}` with
//! `n ∈ {−N/2+1, …, N/2}`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default grid size.
pub const DEFAULT_N: usize = 256;
/// Default tolerance on `|mean(f)|` for [`GridFunction::antiderivative_zero_mean`].
pub const DEFAULT_TOL_MEAN: f64 = 1e-10;
/// Highest wavenumber produced by the band-limited random generator.
pub const RANDOM_MODES: usize = 8;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Signed wavenumber of FFT-ordered index `j` on a grid of size `n`.
#[inline]
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn check_grid(n: usize) -> Result<()> {
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(n));
    }
    Ok(())
}

/// Fourier coefficients of a real grid function, stored in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `e^{ikx}`; `k` is reduced modulo `N`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.n() as i64;
        self.coeffs[k.rem_euclid(n) as usize]
    }

    /// Raw coefficients in FFT order (index `j` ↔ wavenumber [`wavenumber`]`(j, N)`).
    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficients ordered by wavenumber `−N/2+1, …, N/2`.
    pub fn signed_coeffs(&self) -> Vec<Complex64> {
        let n = self.n() as i64;
        (-n / 2 + 1..=n / 2).map(|k| self.coeff(k)).collect()
    }

    /// Inverse of [`Spectrum::signed_coeffs`]. Enforces Hermitian symmetry by
    /// symmetrizing the input and treating the Nyquist coefficient as real.
    pub fn from_signed_coeffs(signed: &[Complex64]) -> Result<Self> {
        let n = signed.len();
        check_grid(n)?;
        let half = (n / 2) as i64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (i, c) in signed.iter().enumerate() {
            let k = i as i64 - half + 1;
            coeffs[k.rem_euclid(n as i64) as usize] = *c;
        }
        let mut spec = Spectrum { coeffs };
        spec.make_hermitian();
        Ok(spec)
    }

    fn make_hermitian(&mut self) {
        let n = self.n();
        self.coeffs[0].im = 0.0;
        self.coeffs[n / 2].im = 0.0;
        for j in 1..n / 2 {
            let avg = 0.5 * (self.coeffs[j] + self.coeffs[n - j].conj());
            self.coeffs[j] = avg;
            self.coeffs[n - j] = avg.conj();
        }
    }

    pub fn to_grid(&self) -> GridFunction {
        let n = self.n();
        let mut buf = self.coeffs.clone();
        inverse_plan(n).process(&mut buf);
        GridFunction {
            samples: buf.into_iter().map(|c| c.re).collect(),
        }
    }
}

/// A real 2π-periodic function sampled at `x_j = 2πj/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        check_grid(samples.len())?;
        Ok(Self { samples })
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn constant(n: usize, value: f64) -> Self {
        assert!(n >= 16 && n.is_power_of_two(), "invalid grid size {n}");
        Self {
            samples: vec![value; n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(n >= 16 && n.is_power_of_two(), "invalid grid size {n}");
        Self {
            samples: (0..n).map(|j| f(grid_point(j, n))).collect(),
        }
    }

    /// Unit sample at index `j` (a discrete delta, not divided by the weight).
    pub fn unit(n: usize, j: usize) -> Self {
        let mut f = Self::zeros(n);
        f.samples[j] = 1.0;
        f
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n()).map(|j| grid_point(j, self.n())).collect()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.n() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    /// Discrete L² norm `sqrt(2π/N Σ f_j²)`.
    pub fn l2_norm(&self) -> f64 {
        let w = 2.0 * PI / self.n() as f64;
        (w * self.samples.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        same_grid(self, other)?;
        Ok(Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(x, y)| x + a * y)
                .collect(),
        })
    }

    pub fn add_constant(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn remove_mean(&self) -> Self {
        self.add_constant(-self.mean())
    }

    pub fn spectrum(&self) -> Spectrum {
        let n = self.n();
        let mut buf: Vec<Complex64> = self
            .samples
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        forward_plan(n).process(&mut buf);
        let inv = 1.0 / n as f64;
        for c in &mut buf {
            *c *= inv;
        }
        let mut spec = Spectrum { coeffs: buf };
        spec.make_hermitian();
        spec
    }

    /// Multiplies each Fourier mode by `symbol(n)`. The Nyquist mode is scaled
    /// by the real part of the symbol so the output stays real.
    pub fn apply_symbol(&self, symbol: impl Fn(i64) -> Complex64) -> Self {
        let n = self.n();
        let mut spec = self.spectrum();
        for (j, c) in spec.coeffs.iter_mut().enumerate() {
            let k = wavenumber(j, n);
            let s = symbol(k);
            if j == n / 2 {
                *c *= s.re;
            } else {
                *c *= s;
            }
        }
        spec.to_grid()
    }

    /// Spectral derivative `f_x`.
    pub fn derivative(&self) -> Self {
        self.derivative_n(1)
    }

    /// Spectral derivative of order `order`.
    pub fn derivative_n(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        let i_pow = Complex64::new(0.0, 1.0).powu(order);
        self.apply_symbol(|k| i_pow * (k as f64).powi(order as i32))
    }

    /// Zero-mean primitive `D⁻¹f` of a zero-mean function.
    pub fn antiderivative_zero_mean(&self) -> Result<Self> {
        self.antiderivative_zero_mean_tol(DEFAULT_TOL_MEAN)
    }

    pub fn antiderivative_zero_mean_tol(&self, tol_mean: f64) -> Result<Self> {
        let mean = self.mean();
        if mean.abs() > tol_mean {
            return Err(Error::NotZeroMean { mean, tol: tol_mean });
        }
        Ok(self.apply_symbol(|k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / k as f64)
            }
        }))
    }

    /// `∫₀^{2π} f dx`.
    pub fn integral(&self) -> f64 {
        2.0 * PI * self.mean()
    }

    /// Dealiased pointwise product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        same_grid(self, other)?;
        let n = self.n();
        let big = 2 * n;
        let fa = pad(&self.spectrum(), big);
        let fb = pad(&other.spectrum(), big);
        let mut prod: Vec<Complex64> = fa
            .iter()
            .zip(&fb)
            .map(|(a, b)| Complex64::new(a * b, 0.0))
            .collect();
        forward_plan(big).process(&mut prod);
        let inv = 1.0 / big as f64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let k = wavenumber(j, n);
            if k.unsigned_abs() as usize >= n / 2 {
                continue;
            }
            *c = prod[k.rem_euclid(big as i64) as usize] * inv;
        }
        let mut spec = Spectrum { coeffs };
        spec.make_hermitian();
        Ok(spec.to_grid())
    }

    /// `⟨f, g⟩ = ∫ f g dx`.
    pub fn l2_inner(&self, other: &Self) -> Result<f64> {
        Ok(self.multiply(other)?.integral())
    }

    /// `∫ f g h dx` evaluated on the 2× oversampled grid.
    pub fn triple_integral(&self, g: &Self, h: &Self) -> Result<f64> {
        same_grid(self, g)?;
        same_grid(self, h)?;
        let big = 2 * self.n();
        let a = pad(&self.spectrum(), big);
        let b = pad(&g.spectrum(), big);
        let c = pad(&h.spectrum(), big);
        let sum: f64 = a.iter().zip(&b).zip(&c).map(|((x, y), z)| x * y * z).sum();
        Ok(2.0 * PI * sum / big as f64)
    }
}

/// Samples of the band-limited interpolant on a finer grid of size `big`;
/// the Nyquist mode of the source grid is dropped.
fn pad(spec: &Spectrum, big: usize) -> Vec<f64> {
    let n = spec.n();
    let mut buf = vec![Complex64::new(0.0, 0.0); big];
    for (j, c) in spec.coeffs.iter().enumerate() {
        let k = wavenumber(j, n);
        if k.unsigned_abs() as usize >= n / 2 {
            continue;
        }
        buf[k.rem_euclid(big as i64) as usize] = *c;
    }
    inverse_plan(big).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

pub fn grid_point(j: usize, n: usize) -> f64 {
    2.0 * PI * j as f64 / n as f64
}

pub(crate) fn same_grid(a: &GridFunction, b: &GridFunction) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::GridMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(())
}

macro_rules! impl_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&GridFunction> for &GridFunction {
            type Output = GridFunction;
            /// Panics on grid mismatch; use [`GridFunction::axpy`] for a checked variant.
            fn $method(self, rhs: &GridFunction) -> GridFunction {
                assert_eq!(self.n(), rhs.n(), "grid size mismatch");
                GridFunction {
                    samples: self
                        .samples
                        .iter()
                        .zip(&rhs.samples)
                        .map(|(a, b)| a $op b)
                        .collect(),
                }
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);

impl Mul<&GridFunction> for f64 {
    type Output = GridFunction;
    fn mul(self, rhs: &GridFunction) -> GridFunction {
        rhs.scale(self)
    }
}

impl Neg for &GridFunction {
    type Output = GridFunction;
    fn neg(self) -> GridFunction {
        self.scale(-1.0)
    }
}

/// Deterministic stream of band-limited random functions
/// `Σ_{k=1}^{8} a_k cos kx + b_k sin kx` with `a_k, b_k ~ U[−1, 1]`.
#[derive(Clone, Debug)]
pub struct RandomFunctions {
    rng: ChaCha8Rng,
    n: usize,
}

impl RandomFunctions {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            n,
        }
    }

    pub fn next_function(&mut self) -> GridFunction {
        let coeffs: Vec<(f64, f64)> = (0..RANDOM_MODES)
            .map(|_| (self.rng.gen_range(-1.0..=1.0), self.rng.gen_range(-1.0..=1.0)))
            .collect();
        GridFunction::from_fn(self.n, |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let k = (i + 1) as f64;
                    a * (k * x).cos() + b * (k * x).sin()
                })
                .sum()
        })
    }

    pub fn next_scalar(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }
}

impl Iterator for RandomFunctions {
    type Item = GridFunction;
    fn next(&mut self) -> Option<GridFunction> {
        Some(self.next_function())
    }
}

/// One band-limited random function for `seed`.
pub fn random_band_limited(n: usize, seed: u64) -> GridFunction {
    RandomFunctions::new(n, seed).next_function()
}
