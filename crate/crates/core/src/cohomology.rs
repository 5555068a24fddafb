//! Low-degree Gelfand–Fuks cohomology of vector fields on the circle: local
//! 2-cochains `γ(u, v) = ⟨u, Kv⟩` with `K = Σ a_k D^k`, the coboundary of a
//! 1-cochain, cocycle checks and the normal form `K = λD³ + ∂m`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{GridFunction, RandomFunctions};
use crate::io::read_grid;
use crate::lie_ops::bracket;

pub const MAX_COCHAIN_ORDER: usize = 5;
pub const COCYCLE_TOL: f64 = 1e-8;
pub const DEFAULT_TRIPLES: usize = 4;
const TRIPLE_SEED: u64 = 0x2c0c;
const FIT_MODES: std::ops::RangeInclusive<i64> = 2..=8;
const PROBE_MODES: usize = 8;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Skew-adjoint differential operator `K = Σ a_k(x) D^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoCochain {
    coeffs: Vec<GridFunction>,
}

impl TwoCochain {
    /// Builds the cochain of `(K − K*)/2`. Fails with `DegenerateCochain` when
    /// the skew part vanishes, e.g. for `K = D²`.
    pub fn new(coeffs: Vec<GridFunction>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > MAX_COCHAIN_ORDER + 1 {
            return Err(Error::InvalidArgument(format!(
                "cochain needs 1..={} coefficients, got {}",
                MAX_COCHAIN_ORDER + 1,
                coeffs.len()
            )));
        }
        let n = coeffs[0].n();
        if let Some(bad) = coeffs.iter().find(|c| c.n() != n) {
            return Err(Error::GridMismatch { left: n, right: bad.n() });
        }
        let adjoint = adjoint_coeffs(&coeffs);
        let skew: Vec<GridFunction> = coeffs
            .iter()
            .zip(&adjoint)
            .map(|(a, b)| (a - b).scale(0.5))
            .collect();
        let scale = coeffs.iter().map(GridFunction::max_abs).fold(0.0, f64::max);
        let size = skew.iter().map(GridFunction::max_abs).fold(0.0, f64::max);
        if size <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateCochain);
        }
        Ok(Self { coeffs: trim(skew) })
    }

    /// `K = c_0 + c_1 D + …` with constant coefficients.
    pub fn constant(n: usize, coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| GridFunction::constant(n, c)).collect())
    }

    /// `K = D³`; its cochain is `−½ vir`.
    pub fn virasoro(n: usize) -> Self {
        Self::constant(n, &[0.0, 0.0, 0.0, 1.0]).expect("D³ is skew")
    }

    pub fn coeffs(&self) -> &[GridFunction] {
        &self.coeffs
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].n()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn apply(&self, v: &GridFunction) -> Result<GridFunction> {
        let mut out = GridFunction::zeros(v.n());
        for (k, a) in self.coeffs.iter().enumerate() {
            let dv = v.derivative_n(k as u32);
            out = &out + &a.multiply(&dv)?;
        }
        Ok(out)
    }

    /// `γ(u, v) = ⟨u, Kv⟩`.
    pub fn evaluate(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        u.l2_inner(&self.apply(v)?)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let len = self.coeffs.len().max(other.coeffs.len());
        let n = self.n();
        let zero = GridFunction::zeros(n);
        let coeffs = (0..len)
            .map(|k| {
                let a = self.coeffs.get(k).unwrap_or(&zero);
                let b = other.coeffs.get(k).unwrap_or(&zero);
                a.axpy(1.0, b)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.coeffs.iter().map(|a| a.scale(c)).collect())
    }
}

/// Coefficients of `K* = Σ (−D)^k a_k`: `b_j = Σ_{k≥j} (−1)^k C(k, j) D^{k−j} a_k`.
fn adjoint_coeffs(coeffs: &[GridFunction]) -> Vec<GridFunction> {
    let n = coeffs[0].n();
    (0..coeffs.len())
        .map(|j| {
            let mut b = GridFunction::zeros(n);
            for (k, a) in coeffs.iter().enumerate().skip(j) {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let term = a.derivative_n((k - j) as u32);
                b = b.axpy(sign * binomial(k, j), &term).expect("same grid");
            }
            b
        })
        .collect()
}

fn trim(mut coeffs: Vec<GridFunction>) -> Vec<GridFunction> {
    let scale = coeffs.iter().map(GridFunction::max_abs).fold(0.0, f64::max);
    while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.max_abs() <= 1e-13 * scale) {
        coeffs.pop();
    }
    coeffs
}

/// `∂m`, the operator `u ↦ 2m u_x + m_x u`, so `γ(u, v) = ∫ m [u, v]`.
/// Returns `None` for `m = 0`.
pub fn coboundary_1(m: &GridFunction) -> Option<TwoCochain> {
    if m.max_abs() == 0.0 {
        return None;
    }
    Some(TwoCochain {
        coeffs: vec![m.derivative(), m.scale(2.0)],
    })
}

/// Largest normalized `|∂γ(u, v, w)|` over random triples, where
/// `∂γ(u,v,w) = −γ([u,v],w) − γ([v,w],u) − γ([w,u],v)`.
pub fn cocycle_residual_2(gamma: &TwoCochain, triples: usize) -> Result<f64> {
    let mut rf = RandomFunctions::new(gamma.n(), TRIPLE_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..triples {
        let (u, v, w) = (rf.next_function(), rf.next_function(), rf.next_function());
        let t1 = gamma.evaluate(&bracket(&u, &v)?, &w)?;
        let t2 = gamma.evaluate(&bracket(&v, &w)?, &u)?;
        let t3 = gamma.evaluate(&bracket(&w, &u)?, &v)?;
        let scale = t1.abs() + t2.abs() + t3.abs();
        if scale > 0.0 {
            worst = worst.max((t1 + t2 + t3).abs() / scale);
        }
    }
    Ok(worst)
}

/// `vir(u, v) = ∫ (u′v″ − v′u″) dx = 2⟨u′, v″⟩`.
pub fn virasoro(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    let du = u.derivative();
    let dv = v.derivative();
    Ok(du.l2_inner(&dv.derivative())? - dv.l2_inner(&du.derivative())?)
}

/// `u = [1, W] + c[cos, sin]` with `c = mean(u)` and `W = D⁻¹(u − c)`.
pub fn decompose_commutators(u: &GridFunction) -> Result<(GridFunction, f64)> {
    let c = u.mean();
    let w = u.add_constant(-c).remove_mean().antiderivative_zero_mean()?;
    Ok((w, c))
}

/// `‖[1, W] + c[cos, sin] − u‖∞`.
pub fn commutator_certificate(u: &GridFunction, w: &GridFunction, c: f64) -> Result<f64> {
    let n = u.n();
    let one = GridFunction::constant(n, 1.0);
    let cos = GridFunction::from_fn(n, f64::cos);
    let sin = GridFunction::from_fn(n, f64::sin);
    let rebuilt = bracket(&one, w)?.axpy(c, &bracket(&cos, &sin)?)?;
    Ok((&rebuilt - u).max_abs())
}

/// Norm of what is left of `m` after forcing `⟨m, [u, v]⟩ = 0` on the
/// brackets `[1, cos kx]`, `[1, sin kx]` (`k < N/2`) and `[cos, sin]`.
pub fn h1_annihilator_residual(m: &GridFunction) -> Result<f64> {
    let n = m.n();
    let one = GridFunction::constant(n, 1.0);
    let mut span = vec![bracket(
        &GridFunction::from_fn(n, f64::cos),
        &GridFunction::from_fn(n, f64::sin),
    )?];
    for k in 1..n / 2 {
        let kf = k as f64;
        span.push(bracket(&one, &GridFunction::from_fn(n, |x| (kf * x).cos()))?);
        span.push(bracket(&one, &GridFunction::from_fn(n, |x| (kf * x).sin()))?);
    }
    // modified Gram–Schmidt
    let mut basis: Vec<GridFunction> = Vec::with_capacity(span.len());
    for mut v in span {
        for e in &basis {
            let c = v.l2_inner(e)?;
            v = v.axpy(-c, e)?;
        }
        let norm = v.l2_norm();
        if norm > 1e-12 {
            basis.push(v.scale(1.0 / norm));
        }
    }
    let mut rest = m.clone();
    for e in &basis {
        let c = rest.l2_inner(e)?;
        rest = rest.axpy(-c, e)?;
    }
    Ok(rest.l2_norm())
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleClass {
    pub lambda: f64,
    pub m: GridFunction,
    pub residual: f64,
}

/// Writes a cocycle as `λD³ + ∂m`.
pub fn classify_cocycle(gamma: &TwoCochain) -> Result<CocycleClass> {
    let cocycle = cocycle_residual_2(gamma, DEFAULT_TRIPLES)?;
    if cocycle > COCYCLE_TOL {
        return Err(Error::NotACocycle { residual: cocycle });
    }
    let n = gamma.n();
    let two_pi = 2.0 * std::f64::consts::PI;
    // Im⟨K e_k, e_{−k}⟩ = 2π(2k·mean(m) − λk³): least squares for (mean, λ)
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in FIT_MODES {
        let kf = k as f64;
        let c = GridFunction::from_fn(n, |x| (kf * x).cos());
        let s = GridFunction::from_fn(n, |x| (kf * x).sin());
        let im = gamma.apply(&s)?.l2_inner(&c)? - gamma.apply(&c)?.l2_inner(&s)?;
        let y = im / two_pi;
        let (x1, x2) = (2.0 * kf, -kf.powi(3));
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        r1 += x1 * y;
        r2 += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    let mean = (r1 * s22 - r2 * s12) / det;
    let lambda = (s11 * r2 - s12 * r1) / det;
    let k1 = gamma.apply(&GridFunction::constant(n, 1.0))?;
    let m = k1.remove_mean().antiderivative_zero_mean()?.add_constant(mean);

    let normal = match coboundary_1(&m) {
        Some(dm) => dm,
        None => TwoCochain {
            coeffs: vec![GridFunction::zeros(n)],
        },
    };
    let mut residual: f64 = 0.0;
    for k in 1..=PROBE_MODES {
        let kf = k as f64;
        for phi in [
            GridFunction::from_fn(n, |x| (kf * x).cos()),
            GridFunction::from_fn(n, |x| (kf * x).sin()),
        ] {
            let kphi = gamma.apply(&phi)?;
            let model = normal.apply(&phi)?.axpy(lambda, &phi.derivative_n(3))?;
            let scale = kphi.l2_norm().max(phi.l2_norm());
            residual = residual.max((&kphi - &model).l2_norm() / scale);
        }
    }
    Ok(CocycleClass { lambda, m, residual })
}

/// A cochain coefficient in JSON: a constant, an inline grid function, or a
/// path to one.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Constant(f64),
    Function(GridFunction),
    Path(String),
}

/// `{"coeffs": [a_0, a_1, …]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CochainSpec {
    pub coeffs: Vec<CoefficientSpec>,
}

impl CochainSpec {
    pub fn build(&self, n: usize, base: &Path) -> Result<TwoCochain> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| match c {
                CoefficientSpec::Constant(v) => Ok(GridFunction::constant(n, *v)),
                CoefficientSpec::Function(f) => Ok(f.clone()),
                CoefficientSpec::Path(p) => read_grid(&base.join(p)),
            })
            .collect::<Result<Vec<_>>>()?;
        TwoCochain::new(coeffs)
    }
}

impl Serialize for TwoCochain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CochainSpec {
            coeffs: self.coeffs.iter().cloned().map(CoefficientSpec::Function).collect(),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::random_band_limited;
    use std::f64::consts::PI;

    const N: usize = 64;

    fn cos() -> GridFunction {
        GridFunction::from_fn(N, f64::cos)
    }
    fn sin() -> GridFunction {
        GridFunction::from_fn(N, f64::sin)
    }

    #[test]
    fn construction() {
        assert!(matches!(TwoCochain::constant(N, &[0.0, 0.0, 1.0]), Err(Error::DegenerateCochain)));
        let k = TwoCochain::virasoro(N);
        let (u, v) = (random_band_limited(N, 1), random_band_limited(N, 2));
        let a = k.evaluate(&u, &v).unwrap();
        let b = k.evaluate(&v, &u).unwrap();
        assert!((a + b).abs() < 1e-10);
        // γ_{D³} = −½ vir
        assert!((a + 0.5 * virasoro(&u, &v).unwrap()).abs() < 1e-9);
        // skew part of cos·D³
        let mut coeffs = vec![GridFunction::zeros(N); 3];
        coeffs.push(cos());
        let c = TwoCochain::new(coeffs).unwrap();
        assert!((c.evaluate(&u, &v).unwrap() + c.evaluate(&v, &u).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn coboundary_examples() {
        assert!(coboundary_1(&GridFunction::zeros(N)).is_none());
        let c = 0.7;
        let d = coboundary_1(&GridFunction::constant(N, c)).unwrap();
        assert!((d.evaluate(&cos(), &sin()).unwrap() - 2.0 * PI * c).abs() < 1e-12);
        let m = random_band_limited(N, 3);
        let dm = coboundary_1(&m).unwrap();
        let one = GridFunction::constant(N, 1.0);
        assert!((&dm.apply(&one).unwrap() - &m.derivative()).max_abs() < 1e-12);
        // γ(u, v) = ∫ m [u, v]
        let (u, v) = (random_band_limited(N, 4), random_band_limited(N, 5));
        let expect = m.l2_inner(&bracket(&u, &v).unwrap()).unwrap();
        assert!((dm.evaluate(&u, &v).unwrap() - expect).abs() < 1e-9);
        assert_eq!(TwoCochain::new(dm.coeffs().to_vec()).unwrap(), dm);
    }

    #[test]
    fn cocycle_examples() {
        let m = random_band_limited(N, 6);
        assert!(cocycle_residual_2(&coboundary_1(&m).unwrap(), DEFAULT_TRIPLES).unwrap() <= 1e-9);
        assert!(cocycle_residual_2(&TwoCochain::virasoro(N), DEFAULT_TRIPLES).unwrap() <= 1e-9);
        let mut coeffs = vec![GridFunction::zeros(N); 3];
        coeffs.push(cos());
        let bad = TwoCochain::new(coeffs).unwrap();
        assert!(cocycle_residual_2(&bad, DEFAULT_TRIPLES).unwrap() >= 1e-2);
        assert!(matches!(classify_cocycle(&bad), Err(Error::NotACocycle { .. })));
    }

    #[test]
    fn virasoro_examples() {
        let u = random_band_limited(N, 7);
        assert!(virasoro(&u, &u).unwrap().abs() < 1e-12);
        assert!((virasoro(&cos(), &sin()).unwrap() - 2.0 * PI).abs() < 1e-12);
        let sin2 = GridFunction::from_fn(N, |x| (2.0 * x).sin());
        assert!(virasoro(&cos(), &sin2).unwrap().abs() < 1e-12);
        assert!((virasoro(&sin(), &cos()).unwrap() + 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn decompose_examples() {
        let (w, c) = decompose_commutators(&GridFunction::constant(N, 1.0)).unwrap();
        assert!(w.max_abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
        let (w, c) = decompose_commutators(&cos()).unwrap();
        assert!((&w - &sin()).max_abs() < 1e-13 && c.abs() < 1e-15);
        let u = GridFunction::from_fn(N, |x| 2.0 + (3.0 * x).sin());
        let (w, c) = decompose_commutators(&u).unwrap();
        let expect = GridFunction::from_fn(N, |x| -(3.0 * x).cos() / 3.0);
        assert!((&w - &expect).max_abs() < 1e-13 && (c - 2.0).abs() < 1e-14);
        for seed in 0..5 {
            let u = random_band_limited(N, seed).add_constant(0.3);
            let (w, c) = decompose_commutators(&u).unwrap();
            assert!(commutator_certificate(&u, &w, c).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn h1_is_trivial() {
        assert!(h1_annihilator_residual(&random_band_limited(N, 8).add_constant(1.0)).unwrap() <= 1e-8);
    }

    #[test]
    fn classify_examples() {
        let m0 = random_band_limited(N, 9).add_constant(0.4);
        let r = classify_cocycle(&coboundary_1(&m0).unwrap()).unwrap();
        assert!(r.lambda.abs() < 1e-10);
        assert!((&r.m - &m0).max_abs() < 1e-9);
        assert!(r.residual <= 1e-8);

        let r = classify_cocycle(&TwoCochain::virasoro(N)).unwrap();
        assert!((r.lambda - 1.0).abs() < 1e-12 && r.m.max_abs() < 1e-12);

        let k = TwoCochain::virasoro(N).scale(5.0).unwrap().add(&coboundary_1(&cos()).unwrap()).unwrap();
        let r = classify_cocycle(&k).unwrap();
        assert!((r.lambda - 5.0).abs() < 1e-10);
        assert!((&r.m - &cos()).max_abs() < 1e-10);
        assert!(r.residual <= 1e-8);

        let shifted = k.add(&coboundary_1(&m0).unwrap()).unwrap();
        assert!((classify_cocycle(&shifted).unwrap().lambda - 5.0).abs() < 1e-8);
    }

    #[test]
    fn cochain_json() {
        let spec: CochainSpec = serde_json::from_str(r#"{"coeffs": [0.0, 0.0, 0.0, 2.0]}"#).unwrap();
        let k = spec.build(N, Path::new(".")).unwrap();
        assert_eq!(k.order(), 3);
        let text = serde_json::to_string(&k).unwrap();
        let back: CochainSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build(N, Path::new(".")).unwrap(), k);
    }
}
