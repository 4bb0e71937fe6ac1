//! Experiment drivers: the optimality example, the interpolation check and
//! the smooth test-field corpus.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exponents::VariableExponent;
use crate::geometry::{parabolic_distance, GridDomain, Shape, SpaceTimePoint};
use crate::norms::{seminorm_var, sup_norm, weighted_interior_seminorm, FieldFn, GridFunction, Witness};
use crate::solver::{fd_solve, schauder_constant, ParabolicProblem, SchauderReport};

/// Relative change `|b - a| / |a|` (0 when both vanish).
pub fn drift(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExampleParams {
    pub gamma: f64,
    pub zeta: f64,
    pub beta_probe: f64,
    pub n_max: usize,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams { gamma: 0.5, zeta: 0.4, beta_probe: 0.35, n_max: 64 }
    }
}

impl ExampleParams {
    pub fn validate(&self) -> Result<VariableExponent> {
        let alpha = VariableExponent::example(self.gamma, self.zeta)?;
        if !(self.beta_probe > alpha.alpha_minus && self.beta_probe < 1.0) {
            return Err(invalid(format!(
                "beta_probe = {} must lie in (alpha_minus = {}, 1)",
                self.beta_probe, alpha.alpha_minus
            )));
        }
        if self.n_max < 2 {
            return Err(invalid(format!("n_max = {} must be at least 2", self.n_max)));
        }
        Ok(alpha)
    }

    /// `f = (|x| + sqrt t)^{alpha(x, t)}`.
    pub fn source(&self) -> FieldFn {
        let alpha = VariableExponent::example(self.gamma, self.zeta).expect("validated parameters");
        Arc::new(move |x: &[f64], t: f64| {
            let r = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            (r + t.max(0.0).sqrt()).powf(alpha.eval(x, t))
        })
    }

    /// `Ω = B(0, zeta)`, `T = zeta`, with `nt = nx - 1` steps.
    pub fn domain(&self, dim: usize, nx: usize) -> Result<Arc<GridDomain>> {
        let shape = Shape::Ball { center: vec![0.0; dim], radius: self.zeta };
        Ok(Arc::new(GridDomain::new(shape, self.zeta, nx, nx - 1)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeTerm {
    pub n: usize,
    /// `|f(theta_n) - f(0)| / d(theta_n, 0)^beta`.
    pub q: f64,
    /// `(zeta + 1)^{alpha_minus - beta} n^{beta - (gamma + zeta/n)(gamma + 1/n)}`.
    pub lower_bound: f64,
}

/// Quotients along `theta_n = (zeta/n, 0, ..., 0, 1/n^2)` against the
/// constant exponent `beta_probe`.
pub fn probe_sequence(params: &ExampleParams, dim: usize) -> Result<Vec<ProbeTerm>> {
    let alpha = params.validate()?;
    let f = params.source();
    let origin = SpaceTimePoint::new(vec![0.0; dim], 0.0);
    let f0 = f(&origin.x, 0.0);
    (1..=params.n_max)
        .map(|n| {
            let nf = n as f64;
            let mut x = vec![0.0; dim];
            x[0] = params.zeta / nf;
            let theta = SpaceTimePoint::new(x, 1.0 / (nf * nf));
            let d = parabolic_distance(&theta, &origin)?;
            let q = (f(&theta.x, theta.t) - f0).abs() / d.powf(params.beta_probe);
            let a_n = (params.gamma + params.zeta / nf) * (params.gamma + 1.0 / nf);
            let lower_bound = (params.zeta + 1.0).powf(alpha.alpha_minus - params.beta_probe)
                * nf.powf(params.beta_probe - a_n);
            Ok(ProbeTerm { n, q, lower_bound })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleLevel {
    pub nx: usize,
    pub nt: usize,
    pub nodes: usize,
    pub seminorm: f64,
    pub witness: Option<Witness>,
    pub schauder: Option<SchauderReport>,
    pub residual: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleReport {
    pub params: ExampleParams,
    pub dim: usize,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    pub probe: Vec<ProbeTerm>,
    /// `q_{n_max} / q_1`.
    pub q_ratio: f64,
    /// `q_n` increases over the second half of the sequence.
    pub eventually_increasing: bool,
    pub levels: Vec<ExampleLevel>,
    /// Largest ratio between seminorm values at consecutive levels.
    pub seminorm_drift: f64,
}

/// The optimality example: the variable seminorm of `f` per level, the probe
/// sequence, and (when `solve` is set) the heat problem with zero data and
/// its Schauder report.
pub fn run_example(params: &ExampleParams, dim: usize, levels: &[usize], solve: bool) -> Result<ExampleReport> {
    let alpha = params.validate()?;
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("refinement levels must be strictly increasing"));
    }
    let probe = probe_sequence(params, dim)?;
    let q_ratio = probe[probe.len() - 1].q / probe[0].q;
    let half = probe.len() / 2;
    let eventually_increasing = probe[half..].windows(2).all(|w| w[1].q > w[0].q);
    let mut out = Vec::new();
    for &nx in levels {
        let dom = params.domain(dim, nx)?;
        let f = GridFunction::from_closure(dom.clone(), params.source());
        let semi = seminorm_var(&f, &alpha)?;
        let (schauder, residual, warnings) = if solve {
            let p = ParabolicProblem::heat(f.clone(), GridFunction::zeros(dom.clone()))?;
            let sol = fd_solve(&p)?;
            let rep = schauder_constant(&p, &sol, &alpha)?;
            (Some(rep), Some(sol.residual), sol.warnings)
        } else {
            (None, None, Vec::new())
        };
        out.push(ExampleLevel {
            nx,
            nt: dom.nt(),
            nodes: dom.in_domain_nodes().len(),
            seminorm: semi.value,
            witness: semi.witness,
            schauder,
            residual,
            warnings,
        });
    }
    let seminorm_drift = out
        .windows(2)
        .map(|w| (w[1].seminorm / w[0].seminorm).max(w[0].seminorm / w[1].seminorm))
        .fold(1.0, f64::max);
    Ok(ExampleReport {
        params: *params,
        dim,
        alpha_minus: alpha.alpha_minus,
        alpha_plus: alpha.alpha_plus,
        probe,
        q_ratio,
        eventually_increasing,
        levels: out,
        seminorm_drift,
    })
}

/// Ten smooth fields on any cylinder: polynomials, trigonometric and
/// exponential products, and Gaussian bumps.
pub fn test_field_corpus() -> Vec<(String, FieldFn)> {
    let mut out: Vec<(String, FieldFn)> = Vec::new();
    let mut push = |name: &str, f: FieldFn| out.push((name.to_string(), f));
    push("quadratic", Arc::new(|x, t| x.iter().map(|v| v * v).sum::<f64>() + 0.5 * t));
    push("cubic", Arc::new(|x, t| x[0] * x[0] * x[0] - x.iter().sum::<f64>() * t));
    push("sine", Arc::new(|x, t| (PI * x[0]).sin() * (-t).exp()));
    push("cosine-product", Arc::new(|x, t| x.iter().map(|v| (2.0 * v).cos()).product::<f64>() * (1.0 + t)));
    push("exponential", Arc::new(|x, t| (x.iter().sum::<f64>() - t).exp()));
    push("gaussian", Arc::new(|x, t| (-(x.iter().map(|v| v * v).sum::<f64>()) / (0.5 + t)).exp()));
    push("narrow-gaussian", Arc::new(|x, t| (-4.0 * x.iter().map(|v| (v - 0.1) * (v - 0.1)).sum::<f64>() - t).exp()));
    push("oscillation", Arc::new(|x, t| (3.0 * x[0] + t).sin() + 0.5 * (2.0 * x[x.len() - 1]).cos()));
    push("rational", Arc::new(|x, t| 1.0 / (1.5 + x[0] + 0.5 * t)));
    push("mixed", Arc::new(|x, t| x[0] * (x[x.len() - 1] + 1.0) * (1.0 + t * t)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpRow {
    pub eps: f64,
    /// Smallest `C` with `[u]*_{j,beta} <= C |u|_0 + eps [u]*_{k,alpha}` on the corpus.
    pub c_min: f64,
    /// Index of the corpus field attaining `c_min`.
    pub worst: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpReport {
    pub j: usize,
    pub k: usize,
    pub rows: Vec<InterpRow>,
    /// Per field: `(|u|_0, [u]*_{j,beta}, [u]*_{k,alpha})`.
    pub terms: Vec<(f64, f64, f64)>,
}

/// Minimal empirical constant of the interior interpolation inequality for
/// every `eps`.
pub fn run_interp_check(
    corpus: &[GridFunction],
    alpha: &VariableExponent,
    beta: &VariableExponent,
    k: usize,
    j: usize,
    eps: &[f64],
) -> Result<InterpReport> {
    if !((j as f64) + beta.alpha_plus < (k as f64) + alpha.alpha_minus) {
        return Err(invalid(format!(
            "need j + beta_plus < k + alpha_minus, got {} + {} >= {} + {}",
            j, beta.alpha_plus, k, alpha.alpha_minus
        )));
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0)) {
        return Err(invalid(format!("eps must be positive, got {e}")));
    }
    let terms: Vec<(f64, f64, f64)> = corpus
        .iter()
        .map(|u| {
            Ok((
                sup_norm(u),
                weighted_interior_seminorm(u, beta, j, 0.0)?.value,
                weighted_interior_seminorm(u, alpha, k, 0.0)?.value,
            ))
        })
        .collect::<Result<_>>()?;
    let rows = eps
        .iter()
        .map(|&e| {
            let (worst, c_min) = terms.iter().enumerate().fold((0, 0.0f64), |(wi, wc), (i, &(u0, lhs, rhs))| {
                let excess = lhs - e * rhs;
                let c = if excess <= 0.0 { 0.0 } else if u0 > 0.0 { excess / u0 } else { f64::INFINITY };
                if c > wc {
                    (i, c)
                } else {
                    (wi, wc)
                }
            });
            InterpRow { eps: e, c_min, worst }
        })
        .collect();
    Ok(InterpReport { j, k, rows, terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_matches_closed_form() {
        let p = ExampleParams::default();
        let seq = probe_sequence(&p, 2).unwrap();
        for t in &seq {
            let nf = t.n as f64;
            let a = (0.5 + 0.4 / nf) * (0.5 + 1.0 / (nf * nf));
            let expect = 1.4f64.powf(a) * nf.powf(0.35 - a);
            assert!((t.q - expect).abs() < 1e-12 * expect);
            assert!(t.q >= t.lower_bound);
        }
    }

    #[test]
    fn beta_at_alpha_minus_rejected() {
        let p = ExampleParams { beta_probe: 0.25, ..Default::default() };
        assert!(p.validate().is_err());
        let p = ExampleParams { n_max: 1, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn constants_need_no_constant() {
        let dom = Arc::new(GridDomain::new(Shape::Box { lower: vec![0.0], upper: vec![1.0] }, 0.5, 9, 8).unwrap());
        let u = GridFunction::constant(dom, 2.0);
        let a = VariableExponent::constant(0.5).unwrap();
        let b = VariableExponent::constant(0.3).unwrap();
        let r = run_interp_check(&[u], &a, &b, 2, 1, &[0.1, 0.2]).unwrap();
        assert!(r.rows.iter().all(|row| row.c_min <= 1.0));
        assert!(run_interp_check(&[], &a, &b, 0, 1, &[0.1]).is_err());
    }
}
