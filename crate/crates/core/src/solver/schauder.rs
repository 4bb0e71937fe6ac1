use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exponents::VariableExponent;
use crate::geometry::{BoundaryPiece, Shape};
use crate::norms::{norm_0_alpha, norm_2_1_alpha, sup_norm, weighted_norm, PairStrategy, Weighting};

use super::problem::ParabolicProblem;
use super::SolveResult;

/// One `numerator / denominator` ratio of the estimate family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchauderVariant {
    pub numerator: f64,
    pub denominator: f64,
    /// `None` when the report is vacuous.
    pub c_emp: Option<f64>,
    pub vacuous: bool,
    pub terms: BTreeMap<String, f64>,
}

impl SchauderVariant {
    fn new(numerator: f64, terms: BTreeMap<String, f64>, label: &str) -> Result<Self> {
        let denominator: f64 = terms.values().sum();
        let scale = numerator.abs().max(1.0);
        if denominator > 0.0 {
            return Ok(SchauderVariant { numerator, denominator, c_emp: Some(numerator / denominator), vacuous: false, terms });
        }
        if numerator > 1e-12 * scale {
            return Err(Error::Inconsistency(format!(
                "{label} estimate: zero data and bound terms but solution norm {numerator:e}"
            )));
        }
        Ok(SchauderVariant { numerator, denominator, c_emp: None, vacuous: true, terms })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchauderReport {
    /// Global ratio `|u|_{2,1,alpha} / (|u|_0 + |f|_{0,alpha} + |phi|_{2,1,alpha})`.
    pub c_emp: Option<f64>,
    pub vacuous: bool,
    pub global: SchauderVariant,
    /// `|u|*_{2,alpha} / (|u|_0 + |f|^{(2)}_{0,alpha})`.
    pub interior: SchauderVariant,
    /// As `interior` with weights measured from the parabolic boundary minus `gamma`.
    pub boundary: SchauderVariant,
    pub gamma: Vec<BoundaryPiece>,
}

/// Pieces of `{x_n = lower face} ∪ {t = t_start}` on which `phi` vanishes.
pub fn boundary_gamma(p: &ParabolicProblem) -> Vec<BoundaryPiece> {
    let dom = p.domain();
    let n = dom.dim();
    let tol = 1e-14 * p.phi.sup_abs().max(1.0);
    let nodes = dom.in_domain_nodes();
    let vanish = |pred: &dyn Fn(usize) -> bool| nodes.iter().filter(|&&id| pred(id)).all(|&id| p.phi.value(id).abs() <= tol);
    let mut gamma = Vec::new();
    if matches!(dom.shape(), Shape::Box { .. }) && vanish(&|id| dom.axis_index(dom.node_spatial(id), n - 1) == 0) {
        gamma.push(BoundaryPiece::Face { axis: n - 1, upper: false });
    }
    if vanish(&|id| dom.node_level(id) == 0) {
        gamma.push(BoundaryPiece::Initial);
    }
    gamma
}

/// Empirical constants of the global, interior and boundary estimates for a
/// discrete solution of `p`.
pub fn schauder_constant(p: &ParabolicProblem, sol: &SolveResult, alpha: &VariableExponent) -> Result<SchauderReport> {
    let u = &sol.u;
    if u.domain() != p.domain() {
        return Err(invalid("solution and problem live on different grids"));
    }
    let u0 = sup_norm(u);
    let strategy = PairStrategy::Auto;

    let mut terms = BTreeMap::new();
    terms.insert("|u|_0".to_string(), u0);
    terms.insert("|f|_{0,alpha}".to_string(), norm_0_alpha(&p.f, alpha)?.value);
    terms.insert("|phi|_{2,1,alpha}".to_string(), norm_2_1_alpha(&p.phi, alpha)?.value);
    let global = SchauderVariant::new(norm_2_1_alpha(u, alpha)?.value, terms, "global")?;

    let weighted = |w: &Weighting| -> Result<SchauderVariant> {
        let num = weighted_norm(u, alpha, 2, 0.0, w, strategy)?.value;
        let mut terms = BTreeMap::new();
        terms.insert("|u|_0".to_string(), u0);
        terms.insert("|f|^(2)_{0,alpha}".to_string(), weighted_norm(&p.f, alpha, 0, 2.0, w, strategy)?.value);
        SchauderVariant::new(num, terms, "weighted")
    };
    let interior = weighted(&Weighting::Interior)?;
    let gamma = boundary_gamma(p);
    let boundary = weighted(&Weighting::Boundary(gamma.clone()))?;
    Ok(SchauderReport { c_emp: global.c_emp, vacuous: global.vacuous, global, interior, boundary, gamma })
}
