//! Invariant suites behind `biham verify`. Each suite returns a list of named
//! checks with the measured value, its bound and a pass flag.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::classification::{
    mode_equality_residual, nonconstant_affine_witness, scan_admissible, symmetry_probe, ScanConfig,
    DEFAULT_PROBES, MODE_RANGE,
};
use crate::cohomology::{
    classify_cocycle, coboundary_1, cocycle_residual_2, commutator_certificate, decompose_commutators,
    h1_annihilator_residual, virasoro, TwoCochain, DEFAULT_TRIPLES,
};
use crate::error::{Error, Result};
use crate::flow::{evolve_with, EvolveOptions, FlowState};
use crate::fourier::{GridFunction, RandomFunctions, DEFAULT_N};
use crate::functionals::{
    fd_gradient, gradient_symmetry_residual_with, poisson_bracket, PoissonStructure, ProbeConfig,
    RegularFunctional, DEFAULT_FD_EPS,
};
use crate::hierarchy::{
    burgers_closed_form, ch_explicit, generate, gradients, hamiltonians, hamiltonians_with,
    involution_matrix, lenard_residual, BracketKind,
};
use crate::lie_ops::{bracket, coadjoint, AffinePart, lie_poisson_apply, CocycleOperator, InertiaOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Poisson,
    Lenard,
    Involution,
    Classification,
    Cohomology,
    All,
}

impl Suite {
    pub const NAMED: [Suite; 5] = [
        Suite::Poisson,
        Suite::Lenard,
        Suite::Involution,
        Suite::Classification,
        Suite::Cohomology,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Poisson => "poisson",
            Suite::Lenard => "lenard",
            Suite::Involution => "involution",
            Suite::Classification => "classification",
            Suite::Cohomology => "cohomology",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::NAMED
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol,
            bound: Bound::AtMost,
            pass: value <= tol,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol,
            bound: Bound::AtLeast,
            pass: value >= tol,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub n: usize,
    pub depth: usize,
    /// Overrides every upper-bound tolerance when set.
    pub tol: Option<f64>,
    pub base_points: usize,
    /// Cocycle used by the Poisson suite.
    pub cocycle: Option<CocycleOperator>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n: DEFAULT_N,
            depth: 4,
            tol: None,
            base_points: 5,
            cocycle: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub n: usize,
    pub suites: Vec<SuiteReport>,
    pub failures: Vec<String>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative_cases_failed_as_expected: Option<bool>,
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

fn rel_l2(got: &GridFunction, want: &GridFunction) -> f64 {
    (got - want).l2_norm() / want.l2_norm().max(f64::MIN_POSITIVE)
}

/// Base point for hierarchy checks: random data with a nonzero mean.
fn base_point(n: usize, seed: u64) -> GridFunction {
    RandomFunctions::new(n, seed).next_function().scale(0.5).add_constant(0.25)
}

pub fn run(suite: Suite, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let suites = match suite {
        Suite::All => Suite::NAMED.to_vec(),
        s => vec![s],
    };
    let mut reports = Vec::new();
    let mut negative = None;
    for s in suites {
        let mut checks = match s {
            Suite::Poisson => poisson_suite(cfg)?,
            Suite::Lenard => lenard_suite(cfg)?,
            Suite::Involution => involution_suite(cfg)?,
            Suite::Classification => {
                let (checks, neg) = classification_suite(cfg)?;
                negative = Some(neg);
                checks
            }
            Suite::Cohomology => cohomology_suite(cfg)?,
            Suite::All => unreachable!(),
        };
        if let Some(t) = cfg.tol {
            for c in checks.iter_mut().filter(|c| c.bound == Bound::AtMost) {
                c.tol = t;
                c.pass = c.value <= t;
            }
        }
        let passed = checks.iter().all(|c| c.pass);
        reports.push(SuiteReport {
            suite: s.name().to_string(),
            checks,
            passed,
        });
    }
    let failures: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.checks
                .iter()
                .filter(|c| !c.pass)
                .map(move |c| format!("{}/{}", r.suite, c.name))
        })
        .collect();
    Ok(VerifyReport {
        seed: cfg.seed,
        n: cfg.n,
        passed: failures.is_empty(),
        failures,
        suites: reports,
        negative_cases_failed_as_expected: negative,
    })
}

pub fn poisson_suite(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let n = cfg.n;
    let mut rf = RandomFunctions::new(n, cfg.seed);
    let mut checks = Vec::new();
    let (mut roundtrip, mut int_dx, mut skew_d, mut commute) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut jacobi, mut lp_skew, mut a_sym, mut cocycle_id, mut two_cocycle) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut pb_anti, mut pb_jacobi) = (0.0f64, 0.0f64);
    let inertias = [InertiaOperator::camassa_holm(), InertiaOperator::new(vec![1.0, 0.0, 1.0])?];
    let q = cfg.cocycle.clone().unwrap_or_else(|| CocycleOperator::alpha_beta(1.3, -0.7));
    if !matches!(q.m0, AffinePart::Constant(_)) {
        return Err(Error::NonConstantAffinePart);
    }
    let qs = PoissonStructure::Cocycle(q.clone());
    for _ in 0..3 {
        let (u, v, w) = (rf.next_function(), rf.next_function(), rf.next_function());
        let f = u.add_constant(0.4);
        let centered = f.remove_mean();
        let back = centered.antiderivative_zero_mean()?.derivative();
        roundtrip = roundtrip.max((&back - &centered).max_abs());
        int_dx = int_dx.max(f.derivative().integral().abs());
        skew_d = skew_d.max((f.l2_inner(&v.derivative())? + v.l2_inner(&f.derivative())?).abs());
        commute = commute.max((&u.multiply(&v)? - &v.multiply(&u)?).max_abs());

        let uv_w = bracket(&bracket(&u, &v)?, &w)?;
        let vw_u = bracket(&bracket(&v, &w)?, &u)?;
        let wu_v = bracket(&bracket(&w, &u)?, &v)?;
        jacobi = jacobi.max((&(&uv_w + &vw_u) + &wu_v).max_abs());

        lp_skew = lp_skew.max((v.l2_inner(&lie_poisson_apply(&u, &w)?)? + w.l2_inner(&lie_poisson_apply(&u, &v)?)?).abs());
        for a in &inertias {
            a_sym = a_sym.max((a.apply(&u).l2_inner(&v)? - u.l2_inner(&a.apply(&v))?).abs());
        }
        // Q[u, v] = ad*_u Qv − ad*_v Qu
        let lhs = q.apply(&bracket(&u, &v)?)?;
        let rhs = &coadjoint(&u, &q.apply(&v)?)? - &coadjoint(&v, &q.apply(&u)?)?;
        cocycle_id = cocycle_id.max((&lhs - &rhs).l2_norm() / lhs.l2_norm().max(1.0));
        let gamma = |a: &GridFunction, b: &GridFunction| -> Result<f64> { a.l2_inner(&q.apply(b)?) };
        let cyc = gamma(&bracket(&u, &v)?, &w)? + gamma(&bracket(&v, &w)?, &u)? + gamma(&bracket(&w, &u)?, &v)?;
        two_cocycle = two_cocycle.max(cyc.abs());

        let (fu, fv, fw) = (
            RegularFunctional::linear(u.clone()),
            RegularFunctional::linear(v.clone()),
            RegularFunctional::linear(w.clone()),
        );
        let fuv = RegularFunctional::linear(bracket(&u, &v)?);
        let fvw = RegularFunctional::linear(bracket(&v, &w)?);
        let fwu = RegularFunctional::linear(bracket(&w, &u)?);
        let sum = poisson_bracket(&fuv, &fw, &qs, &f)?
            + poisson_bracket(&fvw, &fu, &qs, &f)?
            + poisson_bracket(&fwu, &fv, &qs, &f)?;
        pb_jacobi = pb_jacobi.max(sum.abs());

        let quad = RegularFunctional::half_l2();
        let energy = RegularFunctional::energy(InertiaOperator::camassa_holm());
        for s in [&PoissonStructure::LiePoisson, &qs] {
            let ab = poisson_bracket(&quad, &energy, s, &f)?;
            let ba = poisson_bracket(&energy, &quad, s, &f)?;
            pb_anti = pb_anti.max((ab + ba).abs());
        }
    }
    checks.push(Check::at_most("antiderivative_roundtrip", roundtrip, 1e-10));
    checks.push(Check::at_most("integral_of_derivative", int_dx, 1e-12));
    checks.push(Check::at_most("derivative_skew_adjoint", skew_d, 1e-10));
    checks.push(Check::at_most("multiply_commutative", commute, 1e-12));
    checks.push(Check::at_most("bracket_jacobi", jacobi, 1e-9));
    checks.push(Check::at_most("lie_poisson_skew", lp_skew, 1e-9));
    checks.push(Check::at_most("inertia_symmetric", a_sym, 1e-10));
    checks.push(Check::at_most("cocycle_identity", cocycle_id, 1e-9));
    checks.push(Check::at_most("two_cocycle_condition", two_cocycle, 1e-9));
    checks.push(Check::at_most("poisson_bracket_antisymmetry", pb_anti, 1e-10));
    checks.push(Check::at_most("linear_jacobi_cocycle", pb_jacobi, 1e-9));

    // δ{F, G}_LP for F = ½∫m², G = ½⟨m, A⁻¹m⟩
    let a = InertiaOperator::camassa_holm();
    let m = rf.next_function().add_constant(0.3);
    let (fq, ge) = (RegularFunctional::half_l2(), RegularFunctional::energy(a.clone()));
    let lp = PoissonStructure::LiePoisson;
    let fd = fd_gradient(|x| poisson_bracket(&fq, &ge, &lp, x), &m, DEFAULT_FD_EPS)?;
    let u = a.invert(&m)?;
    let closed = &(&lie_poisson_apply(&m, &u)? - &a.invert(&lie_poisson_apply(&m, &m)?)?)
        + &(&m.multiply(&u.derivative())? - &u.multiply(&m.derivative())?);
    checks.push(Check::at_most("bracket_gradient_closed_form", rel_l2(&fd, &closed), 1e-5));
    Ok(checks)
}

pub fn lenard_suite(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let n = cfg.n;
    let m = RandomFunctions::new(n, cfg.seed).next_function();
    let mut checks = Vec::new();
    let burgers = generate(&InertiaOperator::identity(), &m, 5)?;
    for (k, lvl) in burgers.levels.iter().enumerate() {
        let oracle = burgers_closed_form(k, &m);
        checks.push(Check::at_most(format!("burgers_oracle_h{}", k + 1), rel_err(lvl.h_value, oracle), 1e-9));
    }
    let ch_op = InertiaOperator::camassa_holm();
    let ch = generate(&ch_op, &m, 5)?;
    for k in 1..=3 {
        let oracle = ch_explicit(k, &m)?;
        checks.push(Check::at_most(format!("ch_oracle_h{k}"), rel_err(ch.levels[k - 1].h_value, oracle), 1e-9));
    }
    for (label, r) in [("burgers", &burgers), ("ch", &ch)] {
        for k in 1..=4 {
            checks.push(Check::at_most(format!("{label}_lenard_residual_{k}"), lenard_residual(r, k)?, 1e-9));
        }
        for lvl in &r.levels {
            let scale = lvl.x.max_abs().max(1.0);
            checks.push(Check::at_most(
                format!("{label}_zero_mean_x{}", lvl.k),
                lvl.x.integral().abs() / scale,
                1e-10,
            ));
        }
    }
    let base = base_point(n, cfg.seed ^ 0x1e4a);
    let probe = ProbeConfig {
        seed: cfg.seed,
        ..ProbeConfig::default()
    };
    let ch_at_base = generate(&ch_op, &base, 4)?;
    for k in 1..=4 {
        let field = |x: &GridFunction| Ok(gradients(&ch_op, x, k)?.pop().expect("depth k"));
        let sym = gradient_symmetry_residual_with(field, &base, &probe)?;
        checks.push(Check::at_most(format!("ch_gradient_symmetry_g{k}"), sym, 1e-5));
        let fd = fd_gradient(|x| Ok(hamiltonians_with(&ch_op, x, k, k)?[k - 1]), &base, DEFAULT_FD_EPS)?;
        checks.push(Check::at_most(
            format!("ch_fd_gradient_h{k}"),
            rel_l2(&fd, &ch_at_base.levels[k - 1].g),
            1e-5,
        ));
    }
    let id = InertiaOperator::identity();
    let h = hamiltonians(&id, &m, 5)?;
    let lambda = 1.7;
    let hs = hamiltonians(&id, &m.scale(lambda), 5)?;
    let scaling = (0..5)
        .map(|k| rel_err(hs[k], lambda.powi(k as i32 + 1) * h[k]))
        .fold(0.0, f64::max);
    checks.push(Check::at_most("burgers_scaling_covariance", scaling, 1e-8));
    Ok(checks)
}

pub fn involution_suite(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let n = cfg.n;
    let depth = cfg.depth.max(2);
    let mut checks = Vec::new();
    for (label, a) in [("burgers", InertiaOperator::identity()), ("ch", InertiaOperator::camassa_holm())] {
        let (mut lp, mut co) = (0.0f64, 0.0f64);
        for p in 0..cfg.base_points {
            let m = base_point(n, cfg.seed.wrapping_add(1000 + p as u64));
            let r = generate(&a, &m, depth)?;
            let max_abs = |mat: Vec<Vec<f64>>| mat.into_iter().flatten().map(f64::abs).fold(0.0, f64::max);
            lp = lp.max(max_abs(involution_matrix(&r, BracketKind::LiePoisson)?));
            co = co.max(max_abs(involution_matrix(&r, BracketKind::Cocycle)?));
        }
        checks.push(Check::at_most(format!("{label}_involution_lie_poisson"), lp, 1e-8));
        checks.push(Check::at_most(format!("{label}_involution_cocycle"), co, 1e-8));
    }
    // the hierarchy is conserved along the Euler flow
    let a = InertiaOperator::camassa_holm();
    let m0 = base_point(n, cfg.seed ^ 0xf10e).scale(0.4);
    let opts = EvolveOptions {
        dt: 1e-3,
        steps: 200,
        depth: 3,
        record_interval: 50,
        filter: false,
    };
    let (_, series) = evolve_with(&FlowState::new(m0, a), &opts)?;
    for (k, d) in series.max_drifts().into_iter().enumerate() {
        checks.push(Check::at_most(format!("ch_flow_drift_h{}", k + 1), d, 1e-9));
    }
    Ok(checks)
}

/// Returns the checks and whether every order-4 negative case failed.
pub fn classification_suite(cfg: &VerifyConfig) -> Result<(Vec<Check>, bool)> {
    let n = cfg.n;
    let m = RandomFunctions::new(n, cfg.seed).next_function();
    let lattice = [-2.0, -1.0, 1.0, 2.0];
    let (mut sym, mut modes) = (0.0f64, 0.0f64);
    let mut skipped = 0usize;
    for &a in &lattice {
        for &b in &lattice {
            let op = InertiaOperator::ab(a, b);
            if op.check_invertible(n).is_err() {
                skipped += 1;
                continue;
            }
            let q = CocycleOperator::from_inertia(&op)?;
            sym = sym.max(symmetry_probe(&op, &q, &m, DEFAULT_PROBES)?);
            for k in MODE_RANGE {
                modes = modes.max(mode_equality_residual(&op, a, b, k)?);
            }
        }
    }
    let mut checks = vec![
        Check::at_most("positive_symmetry_probe", sym, 1e-9),
        Check::at_most("positive_mode_equality", modes, 1e-10),
        Check::at_least("positive_candidates_tested", (16 - skipped) as f64, 1.0),
    ];

    let quartic = InertiaOperator::new(vec![1.0, 0.0, 1.0])?;
    let grid = crate::classification::default_alpha_beta_grid();
    let (mut min_mode, mut min_sym) = (f64::INFINITY, f64::INFINITY);
    for &alpha in &grid {
        for &beta in &grid {
            if alpha == 0.0 && beta == 0.0 {
                continue;
            }
            let worst = MODE_RANGE
                .map(|k| mode_equality_residual(&quartic, alpha, beta, k))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            min_mode = min_mode.min(worst);
            let q = CocycleOperator::alpha_beta(alpha, beta);
            min_sym = min_sym.min(symmetry_probe(&quartic, &q, &m, DEFAULT_PROBES)?);
        }
    }
    checks.push(Check::at_least("negative_min_mode_residual", min_mode, 1.0));
    checks.push(Check::at_least("negative_min_symmetry_probe", min_sym, 1e-3));

    let report = scan_admissible(&ScanConfig {
        n: n.min(64),
        seed: cfg.seed,
        ..ScanConfig::default()
    })?;
    checks.push(Check::at_most("scan_mismatches", report.mismatches as f64, 0.0));
    checks.push(Check::flag("scan_probe_consistent", report.probe_consistent));
    checks.push(Check::flag("scan_negative_cases_failed", report.negative_cases_failed_as_expected));
    checks.push(Check::at_least(
        "nonconstant_affine_witness",
        nonconstant_affine_witness(&InertiaOperator::camassa_holm(), n)?,
        1e-3,
    ));
    let negative = min_mode >= 1.0 && min_sym >= 1e-3 && report.negative_cases_failed_as_expected;
    Ok((checks, negative))
}

pub fn cohomology_suite(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let n = cfg.n;
    let mut rf = RandomFunctions::new(n, cfg.seed);
    let mut checks = Vec::new();
    let mut dd = 0.0f64;
    for _ in 0..3 {
        let m = rf.next_function();
        dd = dd.max(cocycle_residual_2(&coboundary_1(&m).expect("nonzero"), DEFAULT_TRIPLES)?);
    }
    checks.push(Check::at_most("coboundary_is_cocycle", dd, 1e-9));
    checks.push(Check::at_most(
        "virasoro_is_cocycle",
        cocycle_residual_2(&TwoCochain::virasoro(n), DEFAULT_TRIPLES)?,
        1e-9,
    ));
    let mut top = vec![GridFunction::zeros(n); 3];
    top.push(GridFunction::from_fn(n, f64::cos));
    checks.push(Check::at_least(
        "nonconstant_top_coefficient_fails",
        cocycle_residual_2(&TwoCochain::new(top)?, DEFAULT_TRIPLES)?,
        1e-2,
    ));
    let sin = GridFunction::from_fn(n, f64::sin);
    let cos = GridFunction::from_fn(n, f64::cos);
    checks.push(Check::at_most(
        "virasoro_sin_cos",
        (virasoro(&sin, &cos)? + 2.0 * std::f64::consts::PI).abs(),
        1e-10,
    ));

    let mut cert = 0.0f64;
    for _ in 0..20 {
        let u = rf.next_function().add_constant(rf.next_scalar(-1.0, 1.0));
        let (w, c) = decompose_commutators(&u)?;
        cert = cert.max(commutator_certificate(&u, &w, c)?);
    }
    checks.push(Check::at_most("commutator_certificate", cert, 1e-10));
    checks.push(Check::at_most(
        "h1_annihilator",
        h1_annihilator_residual(&rf.next_function().add_constant(0.5))?,
        1e-8,
    ));

    let (mut lam_err, mut m_err, mut resid, mut shift) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let lambda = rf.next_scalar(-3.0, 3.0);
        let m = rf.next_function().add_constant(rf.next_scalar(-1.0, 1.0));
        let k = TwoCochain::virasoro(n).scale(lambda)?.add(&coboundary_1(&m).expect("nonzero"))?;
        let c = classify_cocycle(&k)?;
        lam_err = lam_err.max((c.lambda - lambda).abs());
        m_err = m_err.max((&c.m - &m).max_abs() / m.max_abs());
        resid = resid.max(c.residual);
        let extra = coboundary_1(&rf.next_function()).expect("nonzero");
        shift = shift.max((classify_cocycle(&k.add(&extra)?)?.lambda - c.lambda).abs());
    }
    checks.push(Check::at_most("classify_lambda_roundtrip", lam_err, 1e-8));
    checks.push(Check::at_most("classify_m_roundtrip", m_err, 1e-8));
    checks.push(Check::at_most("classify_residual", resid, 1e-8));
    checks.push(Check::at_most("classify_lambda_coboundary_invariance", shift, 1e-8));
    Ok(checks)
}
