//! Regular functionals on the regular dual, their L² gradients, and Poisson
//! brackets of functionals.
//!
//! Functionals are behavioral: an evaluation map plus an optional gradient map.
//! When the gradient is missing, [`fd_gradient`] supplies it.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{GridFunction, RandomFunctions};
use crate::lie_ops::{lie_poisson_apply, CocycleOperator, InertiaOperator};

pub const DEFAULT_FD_EPS: f64 = 1e-5;
pub const DEFAULT_QUAD_POINTS: usize = 32;

type EvalFn = Arc<dyn Fn(&GridFunction) -> Result<f64> + Send + Sync>;
type GradFn = Arc<dyn Fn(&GridFunction) -> Result<GridFunction> + Send + Sync>;

#[derive(Clone)]
pub struct RegularFunctional {
    eval: EvalFn,
    grad: Option<GradFn>,
}

impl std::fmt::Debug for RegularFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RegularFunctional")
            .field("has_gradient", &self.grad.is_some())
            .finish()
    }
}

impl RegularFunctional {
    pub fn new(
        eval: impl Fn(&GridFunction) -> Result<f64> + Send + Sync + 'static,
        grad: impl Fn(&GridFunction) -> Result<GridFunction> + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            grad: Some(Arc::new(grad)),
        }
    }

    pub fn eval_only(eval: impl Fn(&GridFunction) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            grad: None,
        }
    }

    /// `F_u(m) = ∫ u m dx`, `δF_u = u`.
    pub fn linear(u: GridFunction) -> Self {
        let g = u.clone();
        Self::new(move |m| u.l2_inner(m), move |_| Ok(g.clone()))
    }

    /// `½ ∫ m² dx`, gradient `m`.
    pub fn half_l2() -> Self {
        Self::new(|m| Ok(0.5 * m.l2_inner(m)?), |m| Ok(m.clone()))
    }

    /// Kinetic energy `½ ∫ m A⁻¹m dx`, gradient `A⁻¹m`.
    pub fn energy(a: InertiaOperator) -> Self {
        let a2 = a.clone();
        Self::new(
            move |m| Ok(0.5 * m.l2_inner(&a.invert(m)?)?),
            move |m| a2.invert(m),
        )
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| Ok(c), |m| Ok(GridFunction::zeros(m.n())))
    }

    pub fn eval(&self, m: &GridFunction) -> Result<f64> {
        (self.eval)(m)
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// `δF(m)`, by finite differences when no gradient map was supplied.
    pub fn gradient(&self, m: &GridFunction) -> Result<GridFunction> {
        match &self.grad {
            Some(g) => g(m),
            None => fd_gradient(|x| self.eval(x), m, DEFAULT_FD_EPS),
        }
    }
}

/// Central-difference L² gradient: Gâteaux derivatives along the `N` unit
/// sample directions, divided by the quadrature weight `2π/N`.
pub fn fd_gradient<F>(f: F, m: &GridFunction, eps: f64) -> Result<GridFunction>
where
    F: Fn(&GridFunction) -> Result<f64> + Sync,
{
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let n = m.n();
    let weight = 2.0 * PI / n as f64;
    let samples = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut plus = m.samples().to_vec();
            let mut minus = plus.clone();
            plus[j] += eps;
            minus[j] -= eps;
            let fp = f(&GridFunction::new(plus)?)?;
            let fm = f(&GridFunction::new(minus)?)?;
            Ok((fp - fm) / (2.0 * eps) / weight)
        })
        .collect::<Result<Vec<f64>>>()?;
    GridFunction::new(samples)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(points: usize) -> Vec<(f64, f64)> {
    assert!(points > 0);
    let n = points;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// `F(m) = ∫₀¹ ⟨X(tm), m⟩ dt` by Gauss–Legendre quadrature, so `F(0) = 0`.
pub fn reconstruct_hamiltonian<X>(x: X, m: &GridFunction, quad_points: usize) -> Result<f64>
where
    X: Fn(&GridFunction) -> Result<GridFunction>,
{
    let mut total = 0.0;
    for (t, w) in gauss_legendre(quad_points) {
        total += w * x(&m.scale(t))?.l2_inner(m)?;
    }
    Ok(total)
}

/// Probe configuration shared by the symmetry checks.
#[derive(Clone, Copy, Debug)]
pub struct ProbeConfig {
    pub pairs: usize,
    pub seed: u64,
    pub eps: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            pairs: 4,
            seed: 0x5eed,
            eps: DEFAULT_FD_EPS,
        }
    }
}

/// `max |⟨X′(m)M, N⟩ − ⟨X′(m)N, M⟩|` over random probe pairs, with `X′` by
/// central differences. Near zero iff `X` is (locally) a gradient field.
pub fn gradient_symmetry_residual<X>(x: X, m: &GridFunction) -> Result<f64>
where
    X: Fn(&GridFunction) -> Result<GridFunction>,
{
    gradient_symmetry_residual_with(x, m, &ProbeConfig::default())
}

pub fn gradient_symmetry_residual_with<X>(x: X, m: &GridFunction, cfg: &ProbeConfig) -> Result<f64>
where
    X: Fn(&GridFunction) -> Result<GridFunction>,
{
    let mut probes = RandomFunctions::new(m.n(), cfg.seed);
    let derivative = |dir: &GridFunction| -> Result<GridFunction> {
        let plus = x(&m.axpy(cfg.eps, dir)?)?;
        let minus = x(&m.axpy(-cfg.eps, dir)?)?;
        Ok((&plus - &minus).scale(0.5 / cfg.eps))
    };
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.pairs {
        let mm = probes.next_function();
        let nn = probes.next_function();
        let lhs = derivative(&mm)?.l2_inner(&nn)?;
        let rhs = derivative(&nn)?.l2_inner(&mm)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// A Poisson structure on the regular dual.
#[derive(Clone, Debug, PartialEq)]
pub enum PoissonStructure {
    /// `P_m = mD + Dm`.
    LiePoisson,
    /// Constant structure `Q = m₀D + Dm₀ + βD³`.
    Cocycle(CocycleOperator),
    /// Constant structure `Q = DA`.
    InertiaCocycle(InertiaOperator),
}

impl PoissonStructure {
    pub fn apply(&self, m: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
        match self {
            PoissonStructure::LiePoisson => lie_poisson_apply(m, f),
            PoissonStructure::Cocycle(q) => q.apply(f),
            PoissonStructure::InertiaCocycle(a) => Ok(a.apply(f).derivative()),
        }
    }
}

/// `{F, G}(m) = ∫ δF(m) S δG(m) dx`.
pub fn poisson_bracket(
    f: &RegularFunctional,
    g: &RegularFunctional,
    structure: &PoissonStructure,
    m: &GridFunction,
) -> Result<f64> {
    let df = f.gradient(m)?;
    let dg = g.gradient(m)?;
    df.l2_inner(&structure.apply(m, &dg)?)
}

/// `X_F(m) = S δF(m)`.
pub fn hamiltonian_vector_field(
    f: &RegularFunctional,
    structure: &PoissonStructure,
    m: &GridFunction,
) -> Result<GridFunction> {
    structure.apply(m, &f.gradient(m)?)
}
