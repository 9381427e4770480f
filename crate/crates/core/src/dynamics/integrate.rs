//! Time integration of the truncated flows: embedded Dormand–Prince 5(4)
//! with adaptive steps (default) and the implicit midpoint rule.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{check_compatible, RhsWorkspace};
use super::{energy, mass, CoefficientState, Projector};
use crate::coupling::CouplingTensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AdaptiveRk,
    ImplicitMidpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on |h|; also the fixed step of the implicit midpoint rule.
    pub max_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { method: Method::AdaptiveRk, rel_tol: 1e-10, abs_tol: 1e-12, max_step: 0.05 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_step > 0.0) {
            return Err(Error::Config("integrator tolerances and max-step must be positive".into()));
        }
        Ok(())
    }
}

/// One row per accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub hamiltonian: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservationLog {
    pub records: Vec<ConservationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub mass: f64,
    pub energy: f64,
    pub hamiltonian: f64,
}

impl ConservationLog {
    /// Largest relative deviation from the initial value of each quantity.
    pub fn max_relative_drift(&self) -> Drift {
        let Some(first) = self.records.first() else {
            return Drift { mass: 0.0, energy: 0.0, hamiltonian: 0.0 };
        };
        let rel = |v: f64, v0: f64| if v0 == 0.0 { v.abs() } else { ((v - v0) / v0).abs() };
        self.records.iter().fold(Drift { mass: 0.0, energy: 0.0, hamiltonian: 0.0 }, |d, r| Drift {
            mass: d.mass.max(rel(r.mass, first.mass)),
            energy: d.energy.max(rel(r.energy, first.energy)),
            hamiltonian: d.hamiltonian.max(rel(r.hamiltonian, first.hamiltonian)),
        })
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const MIDPOINT_MAX_ITERS: usize = 100;

/// Stateful integrator for one trajectory. The step size carries over
/// between calls to [`Integrator::advance_to`].
pub struct Integrator<'a> {
    tensor: &'a CouplingTensor,
    ws: RhsWorkspace,
    config: IntegratorConfig,
    h: Option<f64>,
    k: [Vec<Complex64>; 7],
    y_stage: Vec<Complex64>,
    y_new: Vec<Complex64>,
    fsal_valid: bool,
}

impl<'a> Integrator<'a> {
    pub fn new(tensor: &'a CouplingTensor, proj: &Projector, config: IntegratorConfig) -> Result<Self> {
        config.validate()?;
        let dim = tensor.dim();
        let zeros = || vec![Complex64::default(); dim];
        Ok(Self {
            tensor,
            ws: RhsWorkspace::new(tensor, proj),
            config,
            h: None,
            k: [zeros(), zeros(), zeros(), zeros(), zeros(), zeros(), zeros()],
            y_stage: zeros(),
            y_new: zeros(),
            fsal_valid: false,
        })
    }

    /// Advance `state` in place to time `t_end` (either direction), calling
    /// `on_step` after every accepted step.
    pub fn advance_to<F>(&mut self, state: &mut CoefficientState, t_end: f64, mut on_step: F) -> Result<()>
    where
        F: FnMut(&CoefficientState) -> Result<()>,
    {
        check_compatible(state, self.tensor)?;
        if !t_end.is_finite() {
            return Err(Error::Config(format!("final time must be finite, got {t_end}")));
        }
        match self.config.method {
            Method::AdaptiveRk => self.dopri(state, t_end, &mut on_step),
            Method::ImplicitMidpoint => self.midpoint(state, t_end, &mut on_step),
        }
    }

    fn f(&mut self, y: &[Complex64], slot: usize) {
        let mut out = std::mem::take(&mut self.k[slot]);
        self.ws.eval(self.tensor, y, &mut out);
        self.k[slot] = out;
    }

    fn error_norm(&self, y: &[Complex64]) -> f64 {
        let (rtol, atol) = (self.config.rel_tol, self.config.abs_tol);
        let mut acc = 0.0;
        for i in 0..y.len() {
            let e = (self.k[0][i] * E1
                + self.k[2][i] * E3
                + self.k[3][i] * E4
                + self.k[4][i] * E5
                + self.k[5][i] * E6
                + self.k[6][i] * E7)
                * self.h.unwrap();
            let sc_re = atol + rtol * y[i].re.abs().max(self.y_new[i].re.abs());
            let sc_im = atol + rtol * y[i].im.abs().max(self.y_new[i].im.abs());
            acc += (e.re / sc_re).powi(2) + (e.im / sc_im).powi(2);
        }
        (acc / (2 * y.len()) as f64).sqrt()
    }

    fn initial_step(&mut self, y: &[Complex64], direction: f64) -> f64 {
        // Hairer–Nørsett–Wanner starting step heuristic
        let (rtol, atol) = (self.config.rel_tol, self.config.abs_tol);
        self.f(y, 0);
        let scale: Vec<f64> = y.iter().map(|v| atol + rtol * v.norm()).collect();
        let norm = |v: &[Complex64]| {
            (v.iter().zip(&scale).map(|(a, s)| a.norm_sqr() / (s * s)).sum::<f64>() / v.len() as f64).sqrt()
        };
        let d0 = norm(y);
        let d1 = norm(&self.k[0]);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.config.max_step);
        let y1: Vec<Complex64> = y.iter().zip(&self.k[0]).map(|(a, k)| a + k * (direction * h0)).collect();
        self.f(&y1, 1);
        let diff: Vec<Complex64> = self.k[1].iter().zip(&self.k[0]).map(|(a, b)| a - b).collect();
        let d2 = norm(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        self.fsal_valid = true;
        (100.0 * h0).min(h1).min(self.config.max_step)
    }

    fn dopri<F>(&mut self, state: &mut CoefficientState, t_end: f64, on_step: &mut F) -> Result<()>
    where
        F: FnMut(&CoefficientState) -> Result<()>,
    {
        let direction = if t_end >= state.time { 1.0 } else { -1.0 };
        if state.time == t_end {
            return Ok(());
        }
        let dim = state.len();
        if self.h.is_none() || self.h.unwrap().signum() != direction {
            let h = self.initial_step(&state.coeffs.clone(), direction);
            self.h = Some(direction * h);
        }
        if !self.fsal_valid {
            let y = state.coeffs.clone();
            self.f(&y, 0);
            self.fsal_valid = true;
        }
        let mut last_rejected = false;
        loop {
            let remaining = t_end - state.time;
            if remaining * direction <= 0.0 {
                break;
            }
            let mut h = self.h.unwrap();
            h = direction * h.abs().min(self.config.max_step);
            let final_step = h.abs() >= remaining.abs();
            if final_step {
                h = remaining;
            }
            if h.abs() < 1e-14 * state.time.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t: state.time, h });
            }
            self.h = Some(h);
            let y = &state.coeffs;
            macro_rules! stage {
                ($slot:expr, $($coef:expr => $k:expr),+) => {{
                    for i in 0..dim {
                        self.y_stage[i] = y[i] + ($(self.k[$k][i] * $coef +)+ Complex64::default()) * h;
                    }
                    let ys = std::mem::take(&mut self.y_stage);
                    self.f(&ys, $slot);
                    self.y_stage = ys;
                }};
            }
            stage!(1, A21 => 0);
            stage!(2, A31 => 0, A32 => 1);
            stage!(3, A41 => 0, A42 => 1, A43 => 2);
            stage!(4, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
            stage!(5, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
            for i in 0..dim {
                self.y_new[i] = y[i]
                    + (self.k[0][i] * A71
                        + self.k[2][i] * A73
                        + self.k[3][i] * A74
                        + self.k[4][i] * A75
                        + self.k[5][i] * A76)
                        * h;
            }
            let yn = std::mem::take(&mut self.y_new);
            self.f(&yn, 6);
            self.y_new = yn;
            let _ = (C2, C3, C4, C5);

            let err = self.error_norm(&state.coeffs.clone());
            if !err.is_finite() {
                return Err(Error::NonFinite { t: state.time });
            }
            let fac = if err == 0.0 { FAC_MAX } else { (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX) };
            if err <= 1.0 {
                if !self.y_new.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                    return Err(Error::NonFinite { t: state.time + h });
                }
                state.coeffs.copy_from_slice(&self.y_new);
                state.time = if final_step { t_end } else { state.time + h };
                self.k.swap(0, 6);
                let fac = if last_rejected { fac.min(1.0) } else { fac };
                last_rejected = false;
                // keep the natural step, not the truncated final one
                if !final_step {
                    self.h = Some(h * fac);
                }
                on_step(state)?;
            } else {
                last_rejected = true;
                self.h = Some(h * fac);
            }
        }
        Ok(())
    }

    fn midpoint<F>(&mut self, state: &mut CoefficientState, t_end: f64, on_step: &mut F) -> Result<()>
    where
        F: FnMut(&CoefficientState) -> Result<()>,
    {
        let direction = if t_end >= state.time { 1.0 } else { -1.0 };
        let dim = state.len();
        let mut mid = vec![Complex64::default(); dim];
        while (t_end - state.time) * direction > 0.0 {
            let remaining = t_end - state.time;
            let final_step = self.config.max_step >= remaining.abs();
            let h = if final_step { remaining } else { direction * self.config.max_step };
            // fixed point on the midpoint value m = y + h/2 f(m)
            mid.copy_from_slice(&state.coeffs);
            let mut converged = false;
            for _ in 0..MIDPOINT_MAX_ITERS {
                self.f(&mid.clone(), 0);
                let mut delta = 0.0;
                let mut size = 0.0;
                for i in 0..dim {
                    let next = state.coeffs[i] + self.k[0][i] * (0.5 * h);
                    delta += (next - mid[i]).norm_sqr();
                    size += next.norm_sqr();
                    mid[i] = next;
                }
                if delta.sqrt() <= 1e-15 * size.sqrt().max(1e-300) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::ImplicitSolve { t: state.time });
            }
            for i in 0..dim {
                state.coeffs[i] = mid[i] * 2.0 - state.coeffs[i];
            }
            if !state.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite { t: state.time + h });
            }
            state.time = if final_step { t_end } else { state.time + h };
            on_step(state)?;
        }
        self.fsal_valid = false;
        Ok(())
    }
}

/// Advance `state` to `t_final`, logging mass, energy and Hamiltonian of
/// the truncated system at every accepted step.
pub fn evolve(
    state: &CoefficientState,
    tensor: &CouplingTensor,
    proj: &Projector,
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<(CoefficientState, ConservationLog)> {
    state.validate()?;
    let mut integ = Integrator::new(tensor, proj, *config)?;
    let mut current = state.clone();
    let chi = proj.weights(tensor.family(), tensor.dim());
    let record = |s: &CoefficientState| -> Result<ConservationRecord> {
        Ok(ConservationRecord {
            t: s.time,
            mass: mass(s),
            energy: energy(s),
            hamiltonian: super::projected_hamiltonian_with(s, tensor, &chi)?,
        })
    };
    let mut log = ConservationLog { records: vec![record(&current)?] };
    integ.advance_to(&mut current, state.time + t_final, |s| {
        log.records.push(record(s)?);
        Ok(())
    })?;
    Ok((current, log))
}

/// Advance without a conservation log.
pub fn advance(
    state: &CoefficientState,
    tensor: &CouplingTensor,
    proj: &Projector,
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<CoefficientState> {
    let mut integ = Integrator::new(tensor, proj, *config)?;
    let mut current = state.clone();
    integ.advance_to(&mut current, state.time + t_final, |_| Ok(()))?;
    Ok(current)
}
