//! Backward-Euler finite differences for `u_t - Lu = f`, with the checks and
//! harnesses built on top of the discrete solution.

mod linalg;
mod manufactured;
mod problem;
mod schauder;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exponents::VariableExponent;
use crate::geometry::{GridDomain, NodeKind};
use crate::norms::{finite_differences, pointed_with_exponent, GridFunction};

use linalg::{bicgstab, BandedLu, Csr};

pub use manufactured::{manufactured_corpus, Jet, Manufactured, TimeFactor};
pub use problem::{frozen_coefficient_view, CoefficientBounds, Coefficients, ParabolicProblem};
pub use schauder::{boundary_gamma, schauder_constant, SchauderReport, SchauderVariant};

/// Cell Péclet number above which drift terms switch to upwinding.
pub const PECLET_LIMIT: f64 = 2.0;
/// Relative residual target of every linear solve.
pub const LINEAR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub u: GridFunction,
    pub steps: usize,
    pub factorizations: usize,
    pub iterations: usize,
    pub max_linear_residual: f64,
    /// Sup of the discrete equation residual over interior nodes.
    pub residual: f64,
    /// Sup of `|phi_t - L phi - f|` over `∂Ω × {0}`.
    pub compatibility_defect: f64,
    pub warnings: Vec<String>,
}

/// One row of the step matrix, scaled by `tau`.
fn assemble_row(p: &ParabolicProblem, level: usize, s: usize) -> Result<Vec<(usize, f64)>> {
    let dom = p.domain();
    let n = dom.dim();
    let tau = dom.tau();
    let h = dom.spacing();
    let id = dom.node_id(level, s);
    let a = p.a_at(id);
    let b = p.b_at(id);
    let c = p.c.value(id);
    let mut row = vec![(s, 1.0 - tau * c)];
    let nb = |s: usize, axis: usize, o: isize| -> Result<usize> {
        dom.shift_spatial(s, axis, o).filter(|&q| dom.spatial_in_domain(q)).ok_or_else(|| {
            Error::Precondition(format!("stencil of spatial node {s} leaves the domain"))
        })
    };
    for i in 0..n {
        let aii = a[i * n + i];
        let h2 = h[i] * h[i];
        let (m, pl) = (nb(s, i, -1)?, nb(s, i, 1)?);
        let mut wm = aii / h2;
        let mut wp = aii / h2;
        let mut wc = -2.0 * aii / h2;
        if b[i] != 0.0 {
            if b[i].abs() * h[i] / aii > PECLET_LIMIT {
                if b[i] > 0.0 {
                    wp += b[i] / h[i];
                    wc -= b[i] / h[i];
                } else {
                    wm -= b[i] / h[i];
                    wc += b[i] / h[i];
                }
            } else {
                wp += b[i] / (2.0 * h[i]);
                wm -= b[i] / (2.0 * h[i]);
            }
        }
        row.push((m, -tau * wm));
        row.push((pl, -tau * wp));
        row[0].1 -= tau * wc;
        for j in i + 1..n {
            let aij = a[i * n + j];
            if aij == 0.0 {
                continue;
            }
            let w = tau * 2.0 * aij / (4.0 * h[i] * h[j]);
            for (oi, oj, sign) in [(1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)] {
                let q = nb(nb(s, i, oi)?, j, oj)?;
                row.push((q, -sign * w));
            }
        }
    }
    Ok(row)
}

fn step_matrix(p: &ParabolicProblem, level: usize) -> Result<Csr> {
    let dom = p.domain();
    let rows: Result<Vec<_>> = (0..dom.n_space())
        .into_par_iter()
        .map(|s| {
            if dom.spatial_in_domain(s) && !dom.spatial_on_boundary(s) {
                assemble_row(p, level, s)
            } else {
                Ok(vec![(s, 1.0)])
            }
        })
        .collect();
    Ok(Csr::from_rows(rows?))
}

/// Backward Euler in time, central differences in space (first-order upwind
/// drift above the Péclet limit), identity rows carrying `phi` on the
/// lateral boundary. Banded LU for `n <= 2`, BiCGSTAB for `n = 3`.
pub fn fd_solve(p: &ParabolicProblem) -> Result<SolveResult> {
    let dom = p.domain();
    let ns = dom.n_space();
    let tau = dom.tau();
    let mut u = vec![f64::NAN; dom.node_count()];
    for s in 0..ns {
        if dom.spatial_in_domain(s) {
            u[s] = p.phi.value(s);
        }
    }
    let mut factorizations = 0;
    let mut iterations = 0;
    let mut max_linear_residual = 0.0f64;
    let mut cached: Option<(Csr, BandedLu)> = None;
    for level in 1..dom.levels() {
        let a = step_matrix(p, level)?;
        let mut rhs = vec![0.0; ns];
        for s in 0..ns {
            if !dom.spatial_in_domain(s) {
                continue;
            }
            let id = dom.node_id(level, s);
            rhs[s] = if dom.spatial_on_boundary(s) {
                p.phi.value(id)
            } else {
                u[dom.node_id(level - 1, s)] + tau * p.f.value(id)
            };
        }
        let mut x;
        if dom.dim() <= 2 {
            if cached.as_ref().map_or(true, |(m, _)| *m != a) {
                let lu = BandedLu::factor(&a).map_err(|row| Error::SolverFailure {
                    step: level,
                    detail: format!("vanishing pivot in row {row}"),
                })?;
                factorizations += 1;
                cached = Some((a, lu));
            }
            let (m, lu) = cached.as_ref().expect("factorization present");
            x = rhs.clone();
            lu.solve(&mut x);
            let r = m.relative_residual(&x, &rhs);
            if !(r <= LINEAR_TOLERANCE) {
                return Err(Error::SolverFailure {
                    step: level,
                    detail: format!("direct solve residual {r:e}"),
                });
            }
            max_linear_residual = max_linear_residual.max(r);
        } else {
            x = (0..ns)
                .map(|s| if dom.spatial_in_domain(s) { u[dom.node_id(level - 1, s)] } else { 0.0 })
                .collect();
            let stats = bicgstab(&a, &rhs, &mut x, LINEAR_TOLERANCE, 20 * ns.max(50)).map_err(|st| {
                Error::SolverFailure {
                    step: level,
                    detail: format!(
                        "BiCGSTAB stalled after {} iterations at residual {:e}",
                        st.iterations, st.relative_residual
                    ),
                }
            })?;
            iterations += stats.iterations;
            max_linear_residual = max_linear_residual.max(a.relative_residual(&x, &rhs));
        }
        for s in 0..ns {
            if dom.spatial_in_domain(s) {
                let id = dom.node_id(level, s);
                u[id] = if dom.spatial_on_boundary(s) { p.phi.value(id) } else { x[s] };
            }
        }
    }
    let u = GridFunction::from_values(p.f.domain_arc().clone(), u)?;
    let residual = discrete_residual(p, &u)?;
    let compatibility_defect = compatibility_defect(p)?;
    let mut warnings = Vec::new();
    let scale = 1.0 + p.f.sup_abs() + p.phi.sup_abs();
    if compatibility_defect > 10.0 * (dom.spacing()[0] + tau) * scale {
        warnings.push(format!(
            "compatibility condition on the initial corner violated: defect {compatibility_defect:.3e}"
        ));
    }
    Ok(SolveResult {
        u,
        steps: dom.nt(),
        factorizations,
        iterations,
        max_linear_residual,
        residual,
        compatibility_defect,
        warnings,
    })
}

/// Sup over interior nodes of `|(u^l - u^{l-1}) / tau - L_h u^l - f|`.
pub fn discrete_residual(p: &ParabolicProblem, u: &GridFunction) -> Result<f64> {
    let dom = p.domain();
    let tau = dom.tau();
    let mut worst = 0.0f64;
    for level in 1..dom.levels() {
        let a = step_matrix(p, level)?;
        for s in 0..dom.n_space() {
            if !dom.spatial_in_domain(s) || dom.spatial_on_boundary(s) {
                continue;
            }
            let id = dom.node_id(level, s);
            let lhs: f64 = a.row(s).map(|(c, v)| v * u.value(dom.node_id(level, c))).sum();
            let r = (lhs - u.value(dom.node_id(level - 1, s))) / tau - p.f.value(id);
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// `sup |phi_t - L phi - f|` over lateral nodes at the initial level, with
/// the one-sided stencils of the finite-difference bundle.
pub fn compatibility_defect(p: &ParabolicProblem) -> Result<f64> {
    let dom = p.domain();
    if dom.nx() < 3 || dom.levels() < 3 {
        return Ok(0.0);
    }
    let d = finite_differences(&p.phi)?;
    let n = dom.dim();
    let mut worst = 0.0f64;
    for s in 0..dom.n_space() {
        if !dom.spatial_on_boundary(s) || !d.valid[s] {
            continue;
        }
        let a = p.a_at(s);
        let b = p.b_at(s);
        let mut lphi = p.c.value(s) * p.phi.value(s);
        for k in 0..n * n {
            lphi += a[k] * d.hess_at(s)[k];
        }
        for i in 0..n {
            lphi += b[i] * d.grad_at(s)[i];
        }
        worst = worst.max((d.ut_at(s) - lphi - p.f.value(s)).abs());
    }
    Ok(worst)
}

/// Discrete maximum-principle bound
/// `(1 - tau c+)^{-nt} (sup_boundary |phi| + T sup |f|)`; infinite when
/// `tau c+ >= 1`.
pub fn max_principle_bound(p: &ParabolicProblem) -> f64 {
    let dom = p.domain();
    let mut phi_sup = 0.0f64;
    let mut f_sup = 0.0f64;
    let mut c_plus = 0.0f64;
    for &id in dom.in_domain_nodes() {
        if dom.kind(id).on_parabolic_boundary() {
            phi_sup = phi_sup.max(p.phi.value(id).abs());
        }
        f_sup = f_sup.max(p.f.value(id).abs());
        c_plus = c_plus.max(p.c.value(id));
    }
    let growth = 1.0 - dom.tau() * c_plus;
    if growth <= 0.0 {
        return f64::INFINITY;
    }
    growth.powi(-(dom.nt() as i32)) * (phi_sup + (dom.t_end() - dom.t_start()) * f_sup)
}

/// `sup` over interior nodes of `|v L0 u - u L0* v - (sum_i D_i(v u_i - u v_i) - (uv)_t)|`
/// with `L0 = Δ - ∂_t` and `L0* = Δ + ∂_t`, all derivatives by finite
/// differences. Nodes next to the lateral boundary are skipped, since the
/// flux divergence there would difference one-sided gradients.
pub fn green_identity_check(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    let dom = u.domain_arc().clone();
    if v.domain() != &*dom {
        return Err(invalid("u and v must share one grid"));
    }
    let n = dom.dim();
    let du = finite_differences(u)?;
    let dv = finite_differences(v)?;
    let nodes = dom.in_domain_nodes();
    let mut uv = vec![f64::NAN; dom.node_count()];
    let mut flux = vec![vec![f64::NAN; dom.node_count()]; n];
    for &id in nodes {
        uv[id] = u.value(id) * v.value(id);
        if du.valid[id] && dv.valid[id] {
            for i in 0..n {
                flux[i][id] = v.value(id) * du.grad_at(id)[i] - u.value(id) * dv.grad_at(id)[i];
            }
        } else {
            for f in flux.iter_mut() {
                f[id] = 0.0;
            }
        }
    }
    let duv = finite_differences(&GridFunction::from_values(dom.clone(), uv)?)?;
    let div: Vec<_> = flux
        .into_iter()
        .map(|f| finite_differences(&GridFunction::from_values(dom.clone(), f)?))
        .collect::<Result<_>>()?;
    let lap = |d: &crate::norms::DerivativeBundle, id: usize| (0..n).map(|i| d.hess_at(id)[i * n + i]).sum::<f64>();
    let mut worst = 0.0f64;
    for &id in nodes {
        if dom.kind(id) != NodeKind::Interior || !du.valid[id] || !dv.valid[id] {
            continue;
        }
        let sp = dom.node_spatial(id);
        let inner = (0..n).all(|i| {
            [-1, 1].iter().all(|&o| {
                dom.shift_spatial(sp, i, o).is_some_and(|q| {
                    let nid = dom.node_id(dom.node_level(id), q);
                    dom.kind(nid) == NodeKind::Interior && du.valid[nid] && dv.valid[nid]
                })
            })
        });
        if !inner {
            continue;
        }
        let lhs = v.value(id) * (lap(&du, id) - du.ut_at(id)) - u.value(id) * (lap(&dv, id) + dv.ut_at(id));
        let rhs = (0..n).map(|i| div[i].grad_at(id)[i]).sum::<f64>() - duv.ut_at(id);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Interior estimate ratio on the semicube `N(P, d)`:
/// `|D^2 u(P)| / (|f|_{0,N} + d^{alpha(P)} [f]_{alpha(P),P,N} + d^{-2} |u|_{0,N})`.
/// The semicube must avoid the parabolic boundary.
pub fn semicube_ratio(u: &GridFunction, f: &GridFunction, alpha: &VariableExponent, p: usize, d: f64) -> Result<f64> {
    let dom = u.domain();
    if f.domain() != dom {
        return Err(invalid("u and f must share one grid"));
    }
    if !(d > 0.0) {
        return Err(invalid(format!("semicube radius must be positive, got {d}")));
    }
    let (xp, tp) = (dom.node_x(p).to_vec(), dom.node_t(p));
    let nodes = semicube_nodes(dom, p, d);
    if nodes.iter().any(|&q| dom.kind(q) != NodeKind::Interior) {
        return Err(Error::Precondition(format!("semicube at node {p} of radius {d} meets the boundary")));
    }
    let du = finite_differences(u)?;
    if !du.valid[p] {
        return Err(Error::Precondition(format!("no second derivatives at node {p}")));
    }
    let d2 = du.hess_at(p).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let a = alpha.eval(&xp, tp);
    let f0 = nodes.iter().fold(0.0f64, |m, &q| m.max(f.value(q).abs()));
    let u0 = nodes.iter().fold(0.0f64, |m, &q| m.max(u.value(q).abs()));
    let fp = pointed_with_exponent(f, a, p, &nodes)?;
    let den = f0 + d.powf(a) * fp + u0 / (d * d);
    Ok(if den > 0.0 { d2 / den } else { 0.0 })
}

/// Nodes `Q` with `d(P, Q) <= d` and `t_Q <= t_P`.
pub fn semicube_nodes(dom: &GridDomain, p: usize, d: f64) -> Vec<usize> {
    let (xp, tp) = (dom.node_x(p), dom.node_t(p));
    dom.in_domain_nodes()
        .iter()
        .copied()
        .filter(|&q| {
            let tq = dom.node_t(q);
            tq <= tp && crate::geometry::pdist(xp, tp, dom.node_x(q), tq) <= d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::Shape;

    fn unit_box(n: usize, nx: usize, nt: usize, t: f64) -> Arc<GridDomain> {
        Arc::new(GridDomain::new(Shape::Box { lower: vec![0.0; n], upper: vec![1.0; n] }, t, nx, nt).unwrap())
    }

    #[test]
    fn zero_data_gives_zero() {
        let dom = unit_box(2, 9, 5, 0.1);
        let p = ParabolicProblem::heat(GridFunction::zeros(dom.clone()), GridFunction::zeros(dom.clone())).unwrap();
        let r = fd_solve(&p).unwrap();
        assert!(r.u.sup_abs() == 0.0);
        assert_eq!(r.factorizations, 1);
    }

    #[test]
    fn boundary_values_are_copied() {
        let dom = unit_box(1, 11, 8, 0.2);
        let phi = GridFunction::from_fn(dom.clone(), |x, t| 1.0 + x[0] + t);
        let p = ParabolicProblem::heat(GridFunction::zeros(dom.clone()), phi.clone()).unwrap();
        let r = fd_solve(&p).unwrap();
        for &id in dom.in_domain_nodes() {
            if dom.kind(id).on_parabolic_boundary() {
                assert_eq!(r.u.value(id).to_bits(), phi.value(id).to_bits());
            }
        }
        assert!(r.residual < 1e-7);
    }

    #[test]
    fn three_dimensional_iterative_path() {
        let dom = unit_box(3, 7, 4, 0.05);
        let f = GridFunction::from_fn(dom.clone(), |x, _| x[0] * (1.0 - x[0]));
        let p = ParabolicProblem::heat(f, GridFunction::zeros(dom.clone())).unwrap();
        let r = fd_solve(&p).unwrap();
        assert!(r.iterations > 0);
        assert!(r.max_linear_residual < 1e-9);
        assert!(r.u.sup_abs() > 0.0);
    }

    #[test]
    fn ellipticity_violation() {
        let dom = unit_box(1, 5, 3, 0.1);
        let a = vec![GridFunction::constant(dom.clone(), 0.5)];
        let b = vec![GridFunction::zeros(dom.clone())];
        let z = GridFunction::zeros(dom.clone());
        let err = ParabolicProblem::new(a, b, z.clone(), z.clone(), z, 1.0, 2.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn green_identity_exact_on_quadratics() {
        let dom = unit_box(2, 7, 6, 0.5);
        let c = GridFunction::constant(dom.clone(), 3.0);
        assert_eq!(green_identity_check(&c, &c).unwrap(), 0.0);
        let u = GridFunction::from_fn(dom.clone(), |x, _| x[0] * x[0]);
        let v = GridFunction::from_fn(dom.clone(), |_, t| t);
        assert!(green_identity_check(&u, &v).unwrap() < 1e-10);
    }
}
