//! Cubic nonlinearity T(c, c, c)_n = Σ W(n1, n2, n3, n) c_{n1} c_{n2} c̄_{n3}
//! and the quartic Hamiltonian, in two orderings: a direct pass over the
//! sparse entries, and a pass grouped by S = n1 + n2 that uses the
//! factorized holomorphic weights.

use num_complex::Complex64;

use super::{CoefficientState, Projector};
use crate::coupling::{CouplingTensor, GroupedWeights};
use crate::error::{Error, Result};

const HAMILTONIAN_IMAG_TOL: f64 = 1e-12;

pub(crate) fn check_compatible(state: &CoefficientState, tensor: &CouplingTensor) -> Result<()> {
    if state.family != tensor.family() {
        return Err(Error::DimensionMismatch(format!(
            "state family {} but tensor family {}",
            state.family,
            tensor.family()
        )));
    }
    if state.len() != tensor.dim() {
        return Err(Error::DimensionMismatch(format!("state has {} modes, tensor has {}", state.len(), tensor.dim())));
    }
    Ok(())
}

/// Trilinear sum over the stored entries.
pub fn nonlinearity_sparse(tensor: &CouplingTensor, c: &[Complex64], out: &mut [Complex64]) {
    out.iter_mut().for_each(|v| *v = Complex64::default());
    for e in tensor.entries() {
        let [a, b, k, n] = e.n.map(|v| v as usize);
        out[n] += c[a] * c[b] * c[k].conj() * (e.weight * e.multiplicity());
    }
}

/// Grouped-by-S evaluation with α = c·β(S, n1)·β(S, n3): O(N²) instead of O(N³).
pub fn nonlinearity_grouped(g: &GroupedWeights, c: &[Complex64], out: &mut [Complex64], pairs: &mut Vec<Complex64>) {
    let n_max = g.cutoff();
    pairs.clear();
    pairs.resize(2 * n_max + 1, Complex64::default());
    for (s, p) in pairs.iter_mut().enumerate() {
        let lo = s.saturating_sub(n_max);
        let hi = s.min(n_max);
        let mut acc = Complex64::default();
        for n1 in lo..=hi {
            acc += c[n1] * c[s - n1] * g.beta(s, n1);
        }
        *p = acc;
    }
    for (n, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::default();
        for (k, ck) in c.iter().enumerate() {
            let s = n + k;
            acc += pairs[s] * ck.conj() * g.beta(s, k);
        }
        *o = acc * g.prefactor();
    }
}

/// Preallocated buffers for repeated RHS evaluations.
pub struct RhsWorkspace {
    chi: Vec<f64>,
    projected: Vec<Complex64>,
    pairs: Vec<Complex64>,
    grouped: bool,
}

impl RhsWorkspace {
    pub fn new(tensor: &CouplingTensor, projector: &Projector) -> Self {
        Self::with_ordering(tensor, projector, tensor.grouped().is_some())
    }

    /// Force the sparse ordering (`grouped = false`) or the grouped one.
    pub fn with_ordering(tensor: &CouplingTensor, projector: &Projector, grouped: bool) -> Self {
        let dim = tensor.dim();
        Self {
            chi: projector.weights(tensor.family(), dim),
            projected: vec![Complex64::default(); dim],
            pairs: Vec::new(),
            grouped: grouped && tensor.grouped().is_some(),
        }
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    /// out = χ · T(χc, χc, χc), the projected nonlinearity.
    pub fn projected_nonlinearity(&mut self, tensor: &CouplingTensor, c: &[Complex64], out: &mut [Complex64]) {
        for ((p, &ci), &w) in self.projected.iter_mut().zip(c).zip(&self.chi) {
            *p = ci * w;
        }
        match (self.grouped, tensor.grouped()) {
            (true, Some(g)) => nonlinearity_grouped(g, &self.projected, out, &mut self.pairs),
            _ => nonlinearity_sparse(tensor, &self.projected, out),
        }
        for (o, &w) in out.iter_mut().zip(&self.chi) {
            *o *= w;
        }
    }

    /// ∂_t c = −i χ T(χc, χc, χc).
    pub fn eval(&mut self, tensor: &CouplingTensor, c: &[Complex64], out: &mut [Complex64]) {
        self.projected_nonlinearity(tensor, c, out);
        for o in out.iter_mut() {
            *o = Complex64::new(o.im, -o.re);
        }
    }
}

/// Right-hand side of the truncated flow i∂_t c = χ T(χc, χc, χc).
pub fn rhs(state: &CoefficientState, tensor: &CouplingTensor, proj: &Projector) -> Result<Vec<Complex64>> {
    check_compatible(state, tensor)?;
    let mut ws = RhsWorkspace::new(tensor, proj);
    let mut out = vec![Complex64::default(); state.len()];
    ws.eval(tensor, &state.coeffs, &mut out);
    Ok(out)
}

/// Same as [`rhs`], forcing the sparse entry ordering.
pub fn rhs_sparse(state: &CoefficientState, tensor: &CouplingTensor, proj: &Projector) -> Result<Vec<Complex64>> {
    check_compatible(state, tensor)?;
    let mut ws = RhsWorkspace::with_ordering(tensor, proj, false);
    let mut out = vec![Complex64::default(); state.len()];
    ws.eval(tensor, &state.coeffs, &mut out);
    Ok(out)
}

/// Same as [`rhs`], using the grouped ordering (holomorphic tensors only).
pub fn rhs_grouped(state: &CoefficientState, tensor: &CouplingTensor, proj: &Projector) -> Result<Vec<Complex64>> {
    check_compatible(state, tensor)?;
    if tensor.grouped().is_none() {
        return Err(Error::Config(format!("no grouped ordering for {} tensors", tensor.family())));
    }
    let mut ws = RhsWorkspace::with_ordering(tensor, proj, true);
    let mut out = vec![Complex64::default(); state.len()];
    ws.eval(tensor, &state.coeffs, &mut out);
    Ok(out)
}

/// Σ over ordered quadruples of W c1 c2 c̄3 c̄4, on the given coefficients.
pub(crate) fn quartic_form(tensor: &CouplingTensor, c: &[Complex64]) -> Result<f64> {
    if let Some(g) = tensor.grouped() {
        let n_max = g.cutoff();
        let mut total = 0.0;
        for s in 0..=2 * n_max {
            let mut p = Complex64::default();
            for n1 in s.saturating_sub(n_max)..=s.min(n_max) {
                p += c[n1] * c[s - n1] * g.beta(s, n1);
            }
            total += p.norm_sqr();
        }
        return Ok(g.prefactor() * total);
    }
    quartic_form_sparse(tensor, c)
}

pub(crate) fn quartic_form_sparse(tensor: &CouplingTensor, c: &[Complex64]) -> Result<f64> {
    let mut total = Complex64::default();
    let mut magnitude = 0.0;
    for e in tensor.entries() {
        let [a, b, k, n] = e.n.map(|v| v as usize);
        let term = c[a] * c[b] * (c[k] * c[n]).conj() * (e.weight * e.multiplicity());
        magnitude += term.norm();
        total += term;
    }
    if total.im.abs() > HAMILTONIAN_IMAG_TOL * magnitude.max(1.0) {
        return Err(Error::HamiltonianResidual { residual: total.im.abs() });
    }
    Ok(total.re)
}
