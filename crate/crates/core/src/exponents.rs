//! Variable exponent fields and the log-Hölder modulus.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{pdist, GridDomain, SpaceTimePoint};
use crate::norms::pairs::{scan_pairs, PairStrategy};
use crate::norms::{GridFunction, Witness};

pub type ExponentFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Lower bound on `gamma` for the example exponent.
pub const EXAMPLE_GAMMA_MIN: f64 = 0.135_335_283_236_612_7; // e^-2

#[derive(Clone)]
pub enum ExponentForm {
    Constant(f64),
    /// `(gamma + |x|)(gamma + t)` with the max-norm on `x`.
    Example { gamma: f64, zeta: f64 },
    Tabulated(GridFunction),
    Custom(ExponentFn),
    /// `base - delta`.
    Shifted { base: Box<VariableExponent>, delta: f64 },
}

impl fmt::Debug for ExponentForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentForm::Constant(v) => write!(f, "Constant({v})"),
            ExponentForm::Example { gamma, zeta } => {
                write!(f, "Example {{ gamma: {gamma}, zeta: {zeta} }}")
            }
            ExponentForm::Tabulated(_) => write!(f, "Tabulated"),
            ExponentForm::Custom(_) => write!(f, "Custom"),
            ExponentForm::Shifted { base, delta } => write!(f, "Shifted({:?}, {delta})", base.form),
        }
    }
}

/// An exponent field with declared range `0 < alpha_minus <= alpha_plus < 1`.
#[derive(Debug, Clone)]
pub struct VariableExponent {
    pub form: ExponentForm,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub clog_estimate: Option<f64>,
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if !(lo > 0.0 && lo <= hi && hi < 1.0) {
        return Err(invalid(format!("exponent range must satisfy 0 < {lo} <= {hi} < 1")));
    }
    Ok(())
}

impl VariableExponent {
    pub fn constant(value: f64) -> Result<Self> {
        check_range(value, value)?;
        Ok(Self::from_parts(ExponentForm::Constant(value), value, value))
    }

    /// The exponent of the optimality example; requires `e^-2 < gamma < 1`
    /// and `0 < zeta < 1 - gamma`. The range is taken over `|x| <= zeta`,
    /// `0 <= t <= zeta`.
    pub fn example(gamma: f64, zeta: f64) -> Result<Self> {
        if !(gamma > EXAMPLE_GAMMA_MIN && gamma < 1.0) {
            return Err(invalid(format!("gamma = {gamma} must lie in (e^-2, 1)")));
        }
        if !(zeta > 0.0 && zeta < 1.0 - gamma) {
            return Err(invalid(format!("zeta = {zeta} must lie in (0, 1 - gamma)")));
        }
        let lo = gamma * gamma;
        let hi = (gamma + zeta) * (gamma + zeta);
        check_range(lo, hi)?;
        Ok(Self::from_parts(ExponentForm::Example { gamma, zeta }, hi, lo))
    }

    /// Exponent given by node values; the range is the sampled range.
    pub fn tabulated(values: GridFunction) -> Result<Self> {
        let dom = values.domain();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &id in dom.in_domain_nodes() {
            lo = lo.min(values.value(id));
            hi = hi.max(values.value(id));
        }
        check_range(lo, hi)?;
        Ok(Self::from_parts(ExponentForm::Tabulated(values), hi, lo))
    }

    /// Tabulated exponent with a declared range containing every sample.
    pub fn tabulated_with_range(values: GridFunction, alpha_minus: f64, alpha_plus: f64) -> Result<Self> {
        check_range(alpha_minus, alpha_plus)?;
        let dom = values.domain();
        for &id in dom.in_domain_nodes() {
            let v = values.value(id);
            if v < alpha_minus || v > alpha_plus {
                return Err(invalid(format!(
                    "sample {v} at node {id} outside [{alpha_minus}, {alpha_plus}]"
                )));
            }
        }
        Ok(Self::from_parts(ExponentForm::Tabulated(values), alpha_plus, alpha_minus))
    }

    /// User closure with a declared range.
    pub fn custom<F>(f: F, alpha_minus: f64, alpha_plus: f64) -> Result<Self>
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        check_range(alpha_minus, alpha_plus)?;
        Ok(Self::from_parts(ExponentForm::Custom(Arc::new(f)), alpha_plus, alpha_minus))
    }

    fn from_parts(form: ExponentForm, alpha_plus: f64, alpha_minus: f64) -> Self {
        VariableExponent { form, alpha_plus, alpha_minus, clog_estimate: None }
    }

    /// `alpha - delta`; requires `0 <= delta < alpha_minus`.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta < self.alpha_minus) {
            return Err(invalid(format!(
                "shift {delta} must lie in [0, alpha_minus = {})",
                self.alpha_minus
            )));
        }
        Ok(VariableExponent {
            form: ExponentForm::Shifted { base: Box::new(self.clone()), delta },
            alpha_plus: self.alpha_plus - delta,
            alpha_minus: self.alpha_minus - delta,
            clog_estimate: self.clog_estimate,
        })
    }

    pub fn is_constant(&self) -> bool {
        match &self.form {
            ExponentForm::Constant(_) => true,
            ExponentForm::Shifted { base, .. } => base.is_constant(),
            _ => false,
        }
    }

    /// Raw evaluation without a domain check. Tabulated exponents are
    /// interpolated and yield `NaN` off their grid.
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        match &self.form {
            ExponentForm::Constant(v) => *v,
            ExponentForm::Example { gamma, .. } => {
                let r = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                (gamma + r) * (gamma + t)
            }
            ExponentForm::Tabulated(g) => g.interpolate(x, t).unwrap_or(f64::NAN),
            ExponentForm::Custom(f) => f(x, t),
            ExponentForm::Shifted { base, delta } => base.eval(x, t) - delta,
        }
    }

    /// Exponent at every node of `dom` (`NaN` outside the domain).
    pub fn sample(&self, dom: &GridDomain) -> Vec<f64> {
        match &self.form {
            ExponentForm::Tabulated(g) if g.domain() == dom => g.values().to_vec(),
            ExponentForm::Shifted { base, delta } => {
                base.sample(dom).into_iter().map(|a| a - delta).collect()
            }
            _ => {
                let mut out = vec![f64::NAN; dom.node_count()];
                for &id in dom.in_domain_nodes() {
                    out[id] = self.eval(dom.node_x(id), dom.node_t(id));
                }
                out
            }
        }
    }

    /// Node-sampled range `(min, max)` over the domain.
    pub fn grid_range(&self, dom: &GridDomain) -> (f64, f64) {
        let s = self.sample(dom);
        dom.in_domain_nodes().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &id| {
            (lo.min(s[id]), hi.max(s[id]))
        })
    }

    /// Stores the log-Hölder estimate on `dom`.
    pub fn with_clog(mut self, dom: &GridDomain) -> Self {
        self.clog_estimate = Some(estimate_clog(&self, dom).value);
        self
    }
}

/// Exponent value at a point of the closed cylinder.
pub fn eval_exponent(alpha: &VariableExponent, dom: &GridDomain, p: &SpaceTimePoint) -> Result<f64> {
    if p.x.len() != dom.dim() {
        return Err(invalid("dimension mismatch"));
    }
    if !dom.contains(&p.x, p.t) {
        return Err(Error::OutOfDomain(format!("{p:?}")));
    }
    let v = alpha.eval(&p.x, p.t);
    if !v.is_finite() {
        return Err(Error::OutOfDomain(format!("exponent undefined at {p:?}")));
    }
    Ok(v)
}

/// Result of a log-Hölder scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClogEstimate {
    pub value: f64,
    pub witness: Option<Witness>,
}

/// `max |alpha(P) - alpha(Q)| * |ln d(P, Q)|` over node pairs.
pub fn estimate_clog(alpha: &VariableExponent, dom: &GridDomain) -> ClogEstimate {
    estimate_clog_with(alpha, dom, PairStrategy::Auto)
}

pub fn estimate_clog_with(
    alpha: &VariableExponent,
    dom: &GridDomain,
    strategy: PairStrategy,
) -> ClogEstimate {
    let a = alpha.sample(dom);
    let nodes = dom.in_domain_nodes();
    let best = scan_pairs(dom, nodes, strategy, |p, q| {
        let d = pdist(dom.node_x(p), dom.node_t(p), dom.node_x(q), dom.node_t(q));
        if d == 0.0 {
            return f64::NAN;
        }
        (a[p] - a[q]).abs() * d.ln().abs()
    });
    match best {
        Some(b) => ClogEstimate { value: b.value, witness: Some(Witness::new(dom, b.p, b.q, b.value)) },
        None => ClogEstimate { value: 0.0, witness: None },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogHolderCheck {
    pub pass: bool,
    pub estimate: f64,
    pub bound: f64,
    pub witness: Option<Witness>,
}

/// Checks `estimate_clog <= m`.
pub fn check_log_holder(alpha: &VariableExponent, dom: &GridDomain, m: f64) -> LogHolderCheck {
    let est = estimate_clog(alpha, dom);
    LogHolderCheck { pass: est.value <= m, estimate: est.value, bound: m, witness: est.witness }
}
