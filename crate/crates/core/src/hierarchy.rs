//! Lenard ladder `P_m G_k = Q G_{k+1}` with `Q = DA`, starting from `G₁ = 1`.
//!
//! `Q⁻¹` only determines `G_{k+1}` up to an additive constant. To fix it, the
//! ladder runs on the split `m = m̃ + s` (zero-mean part plus mean) and keeps
//! every gradient as a polynomial in `s` with grid-function coefficients,
//! `G_k = Σ_i s^i G_{k,i}(m̃)`. Homogeneity of each coefficient then pins the
//! constants so that every `G_k` is the gradient of a functional. The leading
//! constant (the value at constant `m`) matches the long-wave limit, where the
//! ladder reduces to the Burgers one scaled by `1/a₀` per level.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier::GridFunction;
use crate::functionals::{gauss_legendre, PoissonStructure, DEFAULT_QUAD_POINTS};
use crate::lie_ops::{lie_poisson_apply, InertiaOperator};

pub const DEFAULT_DEPTH: usize = 5;
pub const LADDER_TOL_MEAN: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyLevel {
    pub k: usize,
    pub h_value: f64,
    /// `G_k = δH_k(m)`.
    pub g: GridFunction,
    /// `X_k = P_m G_k`.
    pub x: GridFunction,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    /// `mean(X_k)` for each level.
    pub x_means: Vec<f64>,
    /// `lenard_residual(k)` for `k = 1..K−1`.
    pub lenard_residuals: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyResult {
    pub levels: Vec<HierarchyLevel>,
    pub m: GridFunction,
    pub inertia: InertiaOperator,
    pub diagnostics: Diagnostics,
}

impl HierarchyResult {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn h_values(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.h_value).collect()
    }

    pub fn level(&self, k: usize) -> Result<&HierarchyLevel> {
        if k == 0 || k > self.levels.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                min: 1,
                max: self.levels.len(),
            });
        }
        Ok(&self.levels[k - 1])
    }
}

struct Break {
    level: usize,
    mean: f64,
}

/// `κ_k = C(2k, k) / 2^k`: 1, 1, 3/2, 5/2, 35/8, …
fn top_constant(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * (2 * j - 1) as f64 / j as f64)
}

fn eval_poly(coeffs: &[GridFunction], s: f64) -> GridFunction {
    let mut acc = coeffs.last().expect("non-empty").clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = c.axpy(s, &acc).expect("same grid");
    }
    acc
}

/// Gradients `G_1..G_depth` at `m`.
fn ladder(a: &InertiaOperator, m: &GridFunction, depth: usize) -> std::result::Result<Vec<GridFunction>, Break> {
    let n = m.n();
    let s = m.mean();
    let mt = m.remove_mean();
    let mut coeffs = vec![GridFunction::constant(n, 1.0)];
    let mut out = vec![eval_poly(&coeffs, s)];
    let a0 = a.a0();
    for k in 1..depth {
        // X_{k,i} = P_{m̃} G_{k,i} + 2 D G_{k,i−1}, i = 0..k
        let mut hats = Vec::with_capacity(k + 1);
        for i in 0..=k {
            let mut x = match coeffs.get(i) {
                Some(g) => lie_poisson_apply(&mt, g).expect("same grid"),
                None => GridFunction::zeros(n),
            };
            if i > 0 {
                x = x.axpy(2.0, &coeffs[i - 1].derivative()).expect("same grid");
            }
            let tol = LADDER_TOL_MEAN * x.max_abs().max(1.0);
            let mean = x.mean();
            if mean.abs() > tol {
                return Err(Break { level: k, mean });
            }
            let prim = x.remove_mean().antiderivative_zero_mean().expect("zero mean");
            hats.push(a.invert(&prim).expect("checked invertible"));
        }
        let mut next = Vec::with_capacity(k + 1);
        for i in 0..=k {
            let gamma = if i < k {
                let h = hats[i + 1].l2_inner(&mt).expect("same grid");
                (i + 1) as f64 * h / (2.0 * PI) / (k - i) as f64
            } else {
                top_constant(k) / a0.powi(k as i32)
            };
            next.push(hats[i].add_constant(gamma));
        }
        out.push(eval_poly(&next, s));
        coeffs = next;
    }
    Ok(out)
}

fn check_inertia(a: &InertiaOperator, n: usize) -> Result<()> {
    a.check_invertible(n)
}

/// Gradients `G_1..G_K` of the hierarchy at `m`.
pub fn gradients(a: &InertiaOperator, m: &GridFunction, depth: usize) -> Result<Vec<GridFunction>> {
    check_inertia(a, m.n())?;
    match ladder(a, m, depth) {
        Ok(g) => Ok(g),
        Err(b) => Err(Error::LadderBreak {
            level: b.level,
            mean: b.mean,
            partial: Box::new(generate(a, m, b.level)?),
        }),
    }
}

/// `H_1..H_K` at `m` by line-integral reconstruction from the gradients.
pub fn hamiltonians(a: &InertiaOperator, m: &GridFunction, depth: usize) -> Result<Vec<f64>> {
    hamiltonians_with(a, m, depth, DEFAULT_QUAD_POINTS)
}

pub fn hamiltonians_with(
    a: &InertiaOperator,
    m: &GridFunction,
    depth: usize,
    quad_points: usize,
) -> Result<Vec<f64>> {
    check_inertia(a, m.n())?;
    let per_node = gauss_legendre(quad_points)
        .into_par_iter()
        .map(|(t, w)| {
            let gs = ladder(a, &m.scale(t), depth).map_err(|b| (b.level, b.mean))?;
            Ok(gs
                .iter()
                .map(|g| w * g.l2_inner(m).expect("same grid"))
                .collect::<Vec<f64>>())
        })
        .collect::<Vec<std::result::Result<Vec<f64>, (usize, f64)>>>();
    let mut h = vec![0.0; depth];
    for node in per_node {
        match node {
            Ok(vals) => h.iter_mut().zip(vals).for_each(|(acc, v)| *acc += v),
            Err((level, mean)) => {
                return Err(Error::LadderBreak {
                    level,
                    mean,
                    partial: Box::new(generate(a, m, level)?),
                })
            }
        }
    }
    Ok(h)
}

/// Builds the ladder to depth `K` at `m`, with Hamiltonian values and diagnostics.
pub fn generate(a: &InertiaOperator, m: &GridFunction, depth: usize) -> Result<HierarchyResult> {
    if depth == 0 {
        return Err(Error::InvalidArgument("hierarchy depth must be at least 1".into()));
    }
    check_inertia(a, m.n())?;
    let gs = match ladder(a, m, depth) {
        Ok(gs) => gs,
        Err(b) => {
            return Err(Error::LadderBreak {
                level: b.level,
                mean: b.mean,
                partial: Box::new(generate(a, m, b.level)?),
            })
        }
    };
    let h = hamiltonians(a, m, depth)?;
    let levels: Vec<HierarchyLevel> = gs
        .into_iter()
        .zip(h)
        .enumerate()
        .map(|(i, (g, h_value))| {
            let x = lie_poisson_apply(m, &g).expect("same grid");
            HierarchyLevel { k: i + 1, h_value, g, x }
        })
        .collect();
    let mut result = HierarchyResult {
        diagnostics: Diagnostics {
            x_means: levels.iter().map(|l| l.x.mean()).collect(),
            lenard_residuals: Vec::new(),
        },
        levels,
        m: m.clone(),
        inertia: a.clone(),
    };
    result.diagnostics.lenard_residuals = (1..depth)
        .map(|k| lenard_residual(&result, k))
        .collect::<Result<_>>()?;
    Ok(result)
}

/// `‖P_m G_k − Q G_{k+1}‖ / ‖P_m G_k‖`.
pub fn lenard_residual(result: &HierarchyResult, k: usize) -> Result<f64> {
    let depth = result.depth();
    if k == 0 || k + 1 > depth {
        return Err(Error::IndexOutOfRange {
            index: k,
            min: 1,
            max: depth.saturating_sub(1),
        });
    }
    let lhs = lie_poisson_apply(&result.m, &result.levels[k - 1].g)?;
    let rhs = result.inertia.apply(&result.levels[k].g).derivative();
    let num = (&lhs - &rhs).l2_norm();
    let den = lhs.l2_norm();
    Ok(if den > 0.0 { num / den } else { num })
}

/// Poisson structures the hierarchy is in involution for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketKind {
    LiePoisson,
    Cocycle,
}

/// `{H_j, H_k}` at the base point; diagonal entries vanish by skewness.
pub fn involution_matrix(result: &HierarchyResult, kind: BracketKind) -> Result<Vec<Vec<f64>>> {
    let structure = match kind {
        BracketKind::LiePoisson => PoissonStructure::LiePoisson,
        BracketKind::Cocycle => PoissonStructure::InertiaCocycle(result.inertia.clone()),
    };
    let applied = result
        .levels
        .iter()
        .map(|l| structure.apply(&result.m, &l.g))
        .collect::<Result<Vec<_>>>()?;
    let k = result.depth();
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                out[i][j] = result.levels[i].g.l2_inner(&applied[j])?;
            }
        }
    }
    Ok(out)
}

/// `c_k = (2k)! / (2^k (k!)² (k+1))`.
pub fn burgers_coefficient(k: usize) -> f64 {
    top_constant(k) / (k + 1) as f64
}

/// `c_k ∫ m^{k+1} dx`, the Burgers Hamiltonian `H_{k+1}`.
pub fn burgers_closed_form(k: usize, m: &GridFunction) -> f64 {
    let power = m.map(|v| v.powi(k as i32 + 1));
    burgers_coefficient(k) * power.integral()
}

/// The three explicit Camassa–Holm Hamiltonians, with `u = (I − D²)⁻¹m`.
pub fn ch_explicit(k: usize, m: &GridFunction) -> Result<f64> {
    let a = InertiaOperator::camassa_holm();
    match k {
        1 => Ok(m.integral()),
        2 | 3 => {
            let u = a.invert(m)?;
            let ux = u.derivative();
            let density = GridFunction::new(
                u.samples()
                    .iter()
                    .zip(ux.samples())
                    .map(|(u, ux)| {
                        let q = u * u + ux * ux;
                        if k == 2 {
                            0.5 * q
                        } else {
                            0.5 * u * q
                        }
                    })
                    .collect(),
            )?;
            Ok(density.integral())
        }
        _ => Err(Error::UnsupportedLevel(k)),
    }
}
