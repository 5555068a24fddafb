//! Bracket, coadjoint action and the Poisson/inertia operators on Vect(S¹).
//!
//! Constant-coefficient operators act in spectral space. Variable-coefficient
//! pieces (`m₀D + Dm₀` with non-constant `m₀`) use dealiased physical-space
//! products.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{same_grid, GridFunction};

/// Lie bracket `[u, v] = u v_x − u_x v`.
pub fn bracket(u: &GridFunction, v: &GridFunction) -> Result<GridFunction> {
    same_grid(u, v)?;
    let a = u.multiply(&v.derivative())?;
    let b = u.derivative().multiply(v)?;
    Ok(&a - &b)
}

/// Coadjoint action `ad*_u m = m u_x + (m u)_x = 2 m u_x + m_x u`.
pub fn coadjoint(u: &GridFunction, m: &GridFunction) -> Result<GridFunction> {
    same_grid(u, m)?;
    let a = m.multiply(&u.derivative())?;
    let b = m.derivative().multiply(u)?;
    Ok(&a.scale(2.0) + &b)
}

/// Lie–Poisson operator `P_m f = m f_x + (m f)_x`.
pub fn lie_poisson_apply(m: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    same_grid(m, f)?;
    let a = m.multiply(&f.derivative())?;
    let b = m.multiply(f)?.derivative();
    Ok(&a + &b)
}

/// Constant-coefficient symmetric inertia operator `A = Σ a_{2j} D^{2j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InertiaOperator {
    even_coeffs: Vec<f64>,
}

impl InertiaOperator {
    /// `even_coeffs = (a₀, a₂, …, a_{2N})`. Trailing zeros are trimmed.
    pub fn new(even_coeffs: Vec<f64>) -> Result<Self> {
        let mut even_coeffs = even_coeffs;
        while even_coeffs.len() > 1 && even_coeffs.last() == Some(&0.0) {
            even_coeffs.pop();
        }
        if even_coeffs.is_empty() || even_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "inertia coefficients must be a non-empty list of finite reals".into(),
            ));
        }
        Ok(Self { even_coeffs })
    }

    /// `A = aI + bD²`.
    pub fn ab(a: f64, b: f64) -> Self {
        Self::new(vec![a, b]).expect("finite coefficients")
    }

    pub fn identity() -> Self {
        Self::ab(1.0, 0.0)
    }

    /// `I − D²`, the H¹ (Camassa–Holm) operator.
    pub fn camassa_holm() -> Self {
        Self::ab(1.0, -1.0)
    }

    pub fn even_coeffs(&self) -> &[f64] {
        &self.even_coeffs
    }

    /// Differential order `2N`.
    pub fn order(&self) -> usize {
        2 * (self.even_coeffs.len() - 1)
    }

    pub fn a0(&self) -> f64 {
        self.even_coeffs[0]
    }

    /// Symbol `s_A(n) = Σ a_{2j} (−1)^j n^{2j}`.
    pub fn symbol(&self, n: i64) -> f64 {
        let n2 = (n as f64) * (n as f64);
        self.even_coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &a| acc * (-n2) + a)
    }

    fn symbol_scale(&self, n: i64) -> f64 {
        let n2 = (n as f64) * (n as f64);
        self.even_coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| a.abs() * n2.powi(j as i32))
            .sum()
    }

    /// Smallest `|n| ≤ max_wavenumber` with `s_A(n) = 0`, if any.
    pub fn first_root(&self, max_wavenumber: usize) -> Option<i64> {
        (0..=max_wavenumber as i64).find(|&n| {
            self.symbol(n).abs() <= 1e-12 * self.symbol_scale(n).max(f64::MIN_POSITIVE)
        })
    }

    /// Checks invertibility against the Nyquist range of a grid of size `n`.
    pub fn check_invertible(&self, n: usize) -> Result<()> {
        match self.first_root(n / 2) {
            Some(k) => Err(Error::SingularSymbol { wavenumber: k }),
            None => Ok(()),
        }
    }

    /// `m = A u`.
    pub fn apply(&self, u: &GridFunction) -> GridFunction {
        u.apply_symbol(|k| Complex64::new(self.symbol(k), 0.0))
    }

    /// `u = A⁻¹ m`.
    pub fn invert(&self, m: &GridFunction) -> Result<GridFunction> {
        self.check_invertible(m.n())?;
        Ok(m.apply_symbol(|k| Complex64::new(1.0 / self.symbol(k), 0.0)))
    }
}

/// The affine part `m₀` of a cocycle operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AffinePart {
    Constant(f64),
    Function(GridFunction),
}

/// Cocycle operator `Q = m₀D + Dm₀ + βD³` of a modified Lie–Poisson structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleOperator {
    pub m0: AffinePart,
    pub beta: f64,
}

impl CocycleOperator {
    pub fn constant(m0: f64, beta: f64) -> Self {
        Self {
            m0: AffinePart::Constant(m0),
            beta,
        }
    }

    /// `Q = αD + βD³`, i.e. `m₀ = α/2`.
    pub fn alpha_beta(alpha: f64, beta: f64) -> Self {
        Self::constant(alpha / 2.0, beta)
    }

    pub fn with_function(m0: GridFunction, beta: f64) -> Self {
        Self {
            m0: AffinePart::Function(m0),
            beta,
        }
    }

    /// `Q = DA` for `A = aI + bD²`.
    pub fn from_inertia(a: &InertiaOperator) -> Result<Self> {
        if a.order() > 2 {
            return Err(Error::InvalidArgument(format!(
                "DA is not a cocycle operator for an inertia operator of order {}",
                a.order()
            )));
        }
        let b = a.even_coeffs().get(1).copied().unwrap_or(0.0);
        Ok(Self::alpha_beta(a.a0(), b))
    }

    /// `α = 2m₀` when `m₀` is constant.
    pub fn alpha(&self) -> Option<f64> {
        match &self.m0 {
            AffinePart::Constant(c) => Some(2.0 * c),
            AffinePart::Function(_) => None,
        }
    }

    fn constant_symbol(&self, m0: f64, k: i64) -> Complex64 {
        let kf = k as f64;
        Complex64::new(0.0, kf * (2.0 * m0 - self.beta * kf * kf))
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        match &self.m0 {
            AffinePart::Constant(m0) => Ok(f.apply_symbol(|k| self.constant_symbol(*m0, k))),
            AffinePart::Function(m0) => {
                let affine = lie_poisson_apply(m0, f)?;
                Ok(&affine + &f.derivative_n(3).scale(self.beta))
            }
        }
    }

    /// Zero-mean `g` with `Q g = f`; only defined for constant `m₀`.
    pub fn invert(&self, f: &GridFunction, tol_mean: f64) -> Result<GridFunction> {
        let m0 = match &self.m0 {
            AffinePart::Constant(c) => *c,
            AffinePart::Function(_) => return Err(Error::NonConstantAffinePart),
        };
        let mean = f.mean();
        if mean.abs() > tol_mean {
            return Err(Error::NotZeroMean { mean, tol: tol_mean });
        }
        let scale = |k: i64| 2.0 * m0.abs() + self.beta.abs() * (k * k) as f64;
        if let Some(k) = (1..=(f.n() / 2) as i64).find(|&k| {
            self.constant_symbol(m0, k).norm() <= 1e-12 * k as f64 * scale(k).max(f64::MIN_POSITIVE)
        }) {
            return Err(Error::SingularSymbol { wavenumber: k });
        }
        Ok(f.apply_symbol(|k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                1.0 / self.constant_symbol(m0, k)
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::RandomFunctions;

    const N: usize = 64;

    fn cos() -> GridFunction {
        GridFunction::from_fn(N, f64::cos)
    }
    fn sin() -> GridFunction {
        GridFunction::from_fn(N, f64::sin)
    }

    #[test]
    fn bracket_examples() {
        let u = RandomFunctions::new(N, 1).next_function();
        assert!(bracket(&u, &u).unwrap().max_abs() < 1e-12);
        let one = GridFunction::constant(N, 1.0);
        assert!((&bracket(&cos(), &sin()).unwrap() - &one).max_abs() < 1e-13);
        let w = RandomFunctions::new(N, 2).next_function();
        assert!((&bracket(&one, &w).unwrap() - &w.derivative()).max_abs() < 1e-12);
    }

    #[test]
    fn coadjoint_examples() {
        let mut rf = RandomFunctions::new(N, 5);
        let (u, v, m) = (rf.next_function(), rf.next_function(), rf.next_function());
        let one = GridFunction::constant(N, 1.0);
        assert!((&coadjoint(&one, &m).unwrap() - &m.derivative()).max_abs() < 1e-12);
        assert!(coadjoint(&u, &GridFunction::zeros(N)).unwrap().max_abs() == 0.0);
        // ⟨ad*_u m, v⟩ = −⟨m, [u, v]⟩
        let lhs = coadjoint(&u, &m).unwrap().l2_inner(&v).unwrap();
        let rhs = -m.l2_inner(&bracket(&u, &v).unwrap()).unwrap();
        assert!((lhs - rhs).abs() <= 1e-9);
    }

    #[test]
    fn lie_poisson_examples() {
        let mut rf = RandomFunctions::new(N, 8);
        let (m, f) = (rf.next_function(), rf.next_function());
        let one = GridFunction::constant(N, 1.0);
        assert!((&lie_poisson_apply(&m, &one).unwrap() - &m.derivative()).max_abs() < 1e-12);
        assert_eq!(
            lie_poisson_apply(&GridFunction::zeros(N), &f).unwrap().max_abs(),
            0.0
        );
        // ∫ P_m f = ∫ m f_x, which is −⟨f, P_m 1⟩ by skewness
        let total = lie_poisson_apply(&m, &f).unwrap().integral();
        assert!((total - m.l2_inner(&f.derivative()).unwrap()).abs() < 1e-11);
        assert!((total + f.l2_inner(&m.derivative()).unwrap()).abs() < 1e-11);
    }

    #[test]
    fn inertia_examples() {
        let a = InertiaOperator::camassa_holm();
        assert!((&a.apply(&cos()) - &cos().scale(2.0)).max_abs() < 1e-12);
        let u = RandomFunctions::new(N, 4).next_function();
        assert!((&InertiaOperator::identity().apply(&u) - &u).max_abs() < 1e-13);
        let one = GridFunction::constant(N, 1.0);
        assert!((&a.apply(&one) - &one).max_abs() < 1e-15);

        assert!((&a.invert(&cos().scale(2.0)).unwrap() - &cos()).max_abs() < 1e-13);
        assert_eq!(a.invert(&GridFunction::zeros(N)).unwrap().max_abs(), 0.0);
        let singular = InertiaOperator::ab(1.0, 1.0);
        assert!(matches!(
            singular.invert(&cos()),
            Err(Error::SingularSymbol { wavenumber: 1 })
        ));
    }

    #[test]
    fn symbol_and_order() {
        let a = InertiaOperator::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(a.order(), 4);
        assert_eq!(a.symbol(2), 17.0);
        assert_eq!(InertiaOperator::new(vec![2.0, 0.0, 0.0]).unwrap().order(), 0);
        assert_eq!(InertiaOperator::camassa_holm().symbol(3), 10.0);
        assert!(InertiaOperator::new(vec![]).is_err());
    }

    #[test]
    fn cocycle_examples() {
        let f = RandomFunctions::new(N, 9).next_function();
        let q = CocycleOperator::constant(0.5, 0.0);
        assert!((&q.apply(&f).unwrap() - &f.derivative()).max_abs() < 1e-12);

        // symbol of DA on cos/sin: Q cos(nx) = −n(a − b n²) sin(nx)
        let (a, b, n) = (2.0, -0.5, 3.0);
        let q = CocycleOperator::alpha_beta(a, b);
        let c = GridFunction::from_fn(N, |x| (n * x).cos());
        let expect = GridFunction::from_fn(N, |x| -n * (a - b * n * n) * (n * x).sin());
        assert!((&q.apply(&c).unwrap() - &expect).max_abs() < 1e-11);

        let one = GridFunction::constant(N, 1.0);
        assert!(q.apply(&one).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn cocycle_function_part_matches_constant_part() {
        let f = RandomFunctions::new(N, 10).next_function();
        let qc = CocycleOperator::constant(0.7, 1.5);
        let qf = CocycleOperator::with_function(GridFunction::constant(N, 0.7), 1.5);
        assert!((&qc.apply(&f).unwrap() - &qf.apply(&f).unwrap()).max_abs() < 1e-10);
    }

    #[test]
    fn cocycle_invert_examples() {
        let a = InertiaOperator::camassa_holm();
        let q = CocycleOperator::from_inertia(&a).unwrap();
        let m = a.apply(&cos());
        let g = q.invert(&m.derivative(), 1e-10).unwrap();
        assert!((&g - &cos()).max_abs() < 1e-13);
        assert_eq!(q.invert(&GridFunction::zeros(N), 1e-10).unwrap().max_abs(), 0.0);
        assert!(matches!(
            q.invert(&GridFunction::constant(N, 1.0), 1e-10),
            Err(Error::NotZeroMean { .. })
        ));
        let qs = CocycleOperator::from_inertia(&InertiaOperator::ab(1.0, 1.0)).unwrap();
        assert!(matches!(
            qs.invert(&sin(), 1e-10),
            Err(Error::SingularSymbol { wavenumber: 1 })
        ));
        let qf = CocycleOperator::with_function(cos(), 1.0);
        assert!(matches!(qf.invert(&sin(), 1e-10), Err(Error::NonConstantAffinePart)));
    }

    #[test]
    fn from_inertia_rejects_higher_order() {
        let a = InertiaOperator::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert!(CocycleOperator::from_inertia(&a).is_err());
    }
}
