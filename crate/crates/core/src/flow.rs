//! Time integration of `m_t = 2m u_x + m_x u`, `m = Au`, with drift tracking
//! for the hierarchy Hamiltonians.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::GridFunction;
use crate::hierarchy::hamiltonians;
use crate::io::format_f64;
use crate::lie_ops::{coadjoint, InertiaOperator};

pub const BLOWUP_GUARD: f64 = 1e8;
pub const DRIFT_FLOOR: f64 = 1e-12;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_RECORD_INTERVAL: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowState {
    pub t: f64,
    pub m: GridFunction,
    pub inertia: InertiaOperator,
}

impl FlowState {
    pub fn new(m: GridFunction, inertia: InertiaOperator) -> Self {
        Self { t: 0.0, m, inertia }
    }

    /// `u = A⁻¹m`.
    pub fn velocity(&self) -> Result<GridFunction> {
        self.inertia.invert(&self.m)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DriftSeries {
    pub times: Vec<f64>,
    /// `h_values[k][j] = H_{k+1}(t_j)`.
    pub h_values: Vec<Vec<f64>>,
    pub relative_drifts: Vec<Vec<f64>>,
}

impl DriftSeries {
    fn with_levels(depth: usize) -> Self {
        Self {
            times: Vec::new(),
            h_values: vec![Vec::new(); depth],
            relative_drifts: vec![Vec::new(); depth],
        }
    }

    fn push(&mut self, t: f64, h: &[f64]) {
        self.times.push(t);
        for (k, &v) in h.iter().enumerate() {
            let h0 = self.h_values[k].first().copied().unwrap_or(v);
            self.h_values[k].push(v);
            self.relative_drifts[k].push((v - h0).abs() / h0.abs().max(DRIFT_FLOOR));
        }
    }

    pub fn depth(&self) -> usize {
        self.h_values.len()
    }

    /// Largest relative drift of each `H_k` over the run.
    pub fn max_drifts(&self) -> Vec<f64> {
        self.relative_drifts
            .iter()
            .map(|d| d.iter().copied().fold(0.0, f64::max))
            .collect()
    }

    /// Columns `t, H_1..H_K, drift_1..drift_K`.
    pub fn to_csv(&self) -> String {
        let k = self.depth();
        let mut header = vec!["t".to_string()];
        header.extend((1..=k).map(|i| format!("H_{i}")));
        header.extend((1..=k).map(|i| format!("drift_{i}")));
        let mut out = header.join(",");
        out.push('\n');
        for (j, t) in self.times.iter().enumerate() {
            let mut row = vec![format_f64(*t)];
            row.extend(self.h_values.iter().map(|h| format_f64(h[j])));
            row.extend(self.relative_drifts.iter().map(|d| format_f64(d[j])));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// `2m u_x + m_x u` with `u = A⁻¹m`.
pub fn rhs(state: &FlowState) -> Result<GridFunction> {
    coadjoint(&state.velocity()?, &state.m)
}

fn rhs_at(a: &InertiaOperator, m: &GridFunction) -> Result<GridFunction> {
    coadjoint(&a.invert(m)?, m)
}

fn blown_up(m: &GridFunction) -> bool {
    !m.is_finite() || m.max_abs() > BLOWUP_GUARD
}

/// One classical Runge–Kutta step.
pub fn step_rk4(state: &FlowState, dt: f64) -> Result<FlowState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let a = &state.inertia;
    let m = &state.m;
    let k1 = rhs_at(a, m)?;
    let k2 = rhs_at(a, &m.axpy(0.5 * dt, &k1)?)?;
    let k3 = rhs_at(a, &m.axpy(0.5 * dt, &k2)?)?;
    let k4 = rhs_at(a, &m.axpy(dt, &k3)?)?;
    let incr = &(&k1 + &k4) + &(&k2 + &k3).scale(2.0);
    let next = m.axpy(dt / 6.0, &incr)?;
    let t = state.t + dt;
    if blown_up(&next) {
        return Err(Error::BlowUp {
            t,
            partial: Box::new(DriftSeries::default()),
        });
    }
    Ok(FlowState {
        t,
        m: next,
        inertia: a.clone(),
    })
}

/// `m(t) ↦ −m(−t)` maps solutions to solutions, so negating, integrating
/// forward and negating again runs the flow backward in time.
pub fn reflect(state: &FlowState) -> FlowState {
    FlowState {
        t: -state.t,
        m: -&state.m,
        inertia: state.inertia.clone(),
    }
}

/// Exponential spectral filter `exp(−36 (|k|/k_max)^36)`.
pub fn exponential_filter(m: &GridFunction) -> GridFunction {
    let kmax = (m.n() / 2) as f64;
    m.apply_symbol(|k| {
        let r = (k as f64).abs() / kmax;
        num_complex::Complex64::new((-36.0 * r.powi(36)).exp(), 0.0)
    })
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub dt: f64,
    pub steps: usize,
    pub depth: usize,
    pub record_interval: usize,
    pub filter: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            steps: 1000,
            depth: 3,
            record_interval: DEFAULT_RECORD_INTERVAL,
            filter: false,
        }
    }
}

/// Integrates `steps` RK4 steps, recording `H_1..H_K` at the start, every
/// `record_interval` steps and at the end.
pub fn evolve(state: &FlowState, dt: f64, steps: usize, depth: usize) -> Result<(FlowState, DriftSeries)> {
    evolve_with(
        state,
        &EvolveOptions {
            dt,
            steps,
            depth,
            ..EvolveOptions::default()
        },
    )
}

pub fn evolve_with(state: &FlowState, opts: &EvolveOptions) -> Result<(FlowState, DriftSeries)> {
    if opts.record_interval == 0 {
        return Err(Error::InvalidArgument("record interval must be positive".into()));
    }
    state.inertia.check_invertible(state.m.n())?;
    let mut series = DriftSeries::with_levels(opts.depth);
    let record = |s: &FlowState, series: &mut DriftSeries| -> Result<()> {
        if opts.depth > 0 {
            let h = hamiltonians(&s.inertia, &s.m, opts.depth)?;
            series.push(s.t, &h);
        } else {
            series.times.push(s.t);
        }
        Ok(())
    };
    let mut cur = state.clone();
    record(&cur, &mut series)?;
    for step in 1..=opts.steps {
        cur = match step_rk4(&cur, opts.dt) {
            Ok(s) => s,
            Err(Error::BlowUp { t, .. }) => {
                return Err(Error::BlowUp {
                    t,
                    partial: Box::new(series),
                })
            }
            Err(e) => return Err(e),
        };
        // keep the clock exact over long runs
        cur.t = state.t + step as f64 * opts.dt;
        if opts.filter {
            cur.m = exponential_filter(&cur.m);
        }
        if step % opts.record_interval == 0 || step == opts.steps {
            record(&cur, &mut series)?;
        }
    }
    Ok((cur, series))
}

/// Runs the flow backward for `steps` steps of size `dt`.
pub fn evolve_backward(state: &FlowState, opts: &EvolveOptions) -> Result<(FlowState, DriftSeries)> {
    let (end, mut series) = evolve_with(&reflect(state), opts)?;
    for t in &mut series.times {
        *t = -*t;
    }
    Ok((reflect(&end), series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::random_band_limited;

    const N: usize = 64;

    #[test]
    fn steady_states() {
        let a = InertiaOperator::ab(2.0, -1.0);
        let s = FlowState::new(GridFunction::constant(N, 2.0 * 0.7), a);
        assert_eq!(rhs(&s).unwrap().max_abs(), 0.0);
        let next = step_rk4(&s, 1e-2).unwrap();
        assert!((&next.m - &s.m).max_abs() <= 1e-14);
    }

    #[test]
    fn burgers_rhs() {
        let m = random_band_limited(N, 1);
        let s = FlowState::new(m.clone(), InertiaOperator::identity());
        let expect = m.multiply(&m.derivative()).unwrap().scale(3.0);
        assert!((&rhs(&s).unwrap() - &expect).max_abs() < 1e-12);
    }

    #[test]
    fn ch_rhs_trig() {
        let m = GridFunction::from_fn(N, |x| 2.0 * x.cos());
        let s = FlowState::new(m, InertiaOperator::camassa_holm());
        // 2(2cos)(−sin) + (−2sin)cos = −6 sin cos
        let expect = GridFunction::from_fn(N, |x| -6.0 * x.sin() * x.cos());
        assert!((&rhs(&s).unwrap() - &expect).max_abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_dt() {
        let s = FlowState::new(GridFunction::zeros(N), InertiaOperator::identity());
        assert!(step_rk4(&s, 0.0).is_err());
        assert!(step_rk4(&s, -1.0).is_err());
    }

    #[test]
    fn zero_data_has_zero_drift() {
        let s = FlowState::new(GridFunction::zeros(N), InertiaOperator::camassa_holm());
        let (_, series) = evolve(&s, 1e-2, 20, 3).unwrap();
        assert!(series.max_drifts().iter().all(|&d| d == 0.0));
        assert_eq!(series.times.len(), 2);
    }

    #[test]
    fn blow_up_carries_partial_series() {
        // Burgers steepens; a large step size overflows quickly
        let m = GridFunction::from_fn(N, |x| 50.0 * x.sin());
        let s = FlowState::new(m, InertiaOperator::identity());
        let opts = EvolveOptions {
            dt: 0.05,
            steps: 2000,
            depth: 1,
            record_interval: 1,
            filter: false,
        };
        match evolve_with(&s, &opts) {
            Err(Error::BlowUp { partial, .. }) => assert!(!partial.times.is_empty()),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn csv_columns() {
        let m = GridFunction::from_fn(N, |x| 0.2 * x.cos());
        let s = FlowState::new(m, InertiaOperator::camassa_holm());
        let (_, series) = evolve(&s, 1e-2, 10, 2).unwrap();
        let csv = series.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,H_1,H_2,drift_1,drift_2");
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn mean_is_conserved() {
        let m = random_band_limited(N, 2).scale(0.2).add_constant(0.1);
        let s = FlowState::new(m.clone(), InertiaOperator::camassa_holm());
        let (end, _) = evolve(&s, 1e-2, 50, 1).unwrap();
        assert!((end.m.integral() - m.integral()).abs() < 1e-12);
    }

    #[test]
    fn backward_undoes_forward() {
        let m = GridFunction::from_fn(N, |x| 0.2 * x.cos());
        let s = FlowState::new(m.clone(), InertiaOperator::camassa_holm());
        let opts = EvolveOptions {
            dt: 1e-2,
            steps: 50,
            depth: 0,
            ..EvolveOptions::default()
        };
        let (fwd, _) = evolve_with(&s, &opts).unwrap();
        let (back, _) = evolve_backward(&fwd, &opts).unwrap();
        assert!((&back.m - &m).max_abs() < 1e-8);
        assert!(back.t.abs() < 1e-12);
    }
}
