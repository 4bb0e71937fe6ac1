use serde::Serialize;

use crate::error::{invalid, Result};
use crate::geometry::GridDomain;

use super::GridFunction;

/// Finite-difference derivatives of a grid function.
///
/// Entries are laid out node-major: `grad[id * n + i]`,
/// `hess[(id * n + i) * n + j]`. `valid[id]` is false where a stencil could
/// not be formed (outside the domain, or cut off by a ball's stair-step
/// boundary).
#[derive(Debug, Clone, Serialize)]
pub struct DerivativeBundle {
    pub n: usize,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    pub ut: Vec<f64>,
    pub valid: Vec<bool>,
    pub stencil_order: usize,
}

impl DerivativeBundle {
    pub fn grad_at(&self, id: usize) -> &[f64] {
        &self.grad[id * self.n..(id + 1) * self.n]
    }
    pub fn hess_at(&self, id: usize) -> &[f64] {
        let w = self.n * self.n;
        &self.hess[id * w..(id + 1) * w]
    }
    pub fn ut_at(&self, id: usize) -> f64 {
        self.ut[id]
    }
    /// Ids of nodes with a complete bundle, increasing.
    pub fn valid_nodes(&self) -> Vec<usize> {
        (0..self.valid.len()).filter(|&id| self.valid[id]).collect()
    }
}

/// Second-order first derivative from samples `get(k) = u(x + k h)`.
pub(crate) fn first_derivative(get: impl Fn(isize) -> Option<f64>, h: f64) -> Option<f64> {
    let c = get(0)?;
    match (get(-1), get(1)) {
        (Some(m), Some(p)) => return Some((p - m) / (2.0 * h)),
        _ => {}
    }
    if let (Some(p1), Some(p2)) = (get(1), get(2)) {
        return Some((-3.0 * c + 4.0 * p1 - p2) / (2.0 * h));
    }
    if let (Some(m1), Some(m2)) = (get(-1), get(-2)) {
        return Some((3.0 * c - 4.0 * m1 + m2) / (2.0 * h));
    }
    None
}

/// Second derivative; central where possible, four-point one-sided
/// (second order) near edges, three-point one-sided as a last resort.
pub(crate) fn second_derivative(get: impl Fn(isize) -> Option<f64>, h: f64) -> Option<f64> {
    let c = get(0)?;
    let h2 = h * h;
    if let (Some(m), Some(p)) = (get(-1), get(1)) {
        return Some((m - 2.0 * c + p) / h2);
    }
    for dir in [1isize, -1] {
        if let (Some(a), Some(b), Some(d)) = (get(dir), get(2 * dir), get(3 * dir)) {
            return Some((2.0 * c - 5.0 * a + 4.0 * b - d) / h2);
        }
    }
    for dir in [1isize, -1] {
        if let (Some(a), Some(b)) = (get(dir), get(2 * dir)) {
            return Some((c - 2.0 * a + b) / h2);
        }
    }
    None
}

/// Gradient, Hessian and time derivative with second-order stencils.
pub fn finite_differences(u: &GridFunction) -> Result<DerivativeBundle> {
    let dom: &GridDomain = u.domain();
    let n = dom.dim();
    if dom.nx() < 3 || dom.levels() < 3 {
        return Err(invalid(format!(
            "finite differences need at least 3 nodes per axis and 3 time levels (nx={}, levels={})",
            dom.nx(),
            dom.levels()
        )));
    }
    let count = dom.node_count();
    let vals = u.values();
    let at = |id: usize, axis: usize, k: isize| -> Option<usize> {
        let s = dom.shift_spatial(dom.node_spatial(id), axis, k)?;
        dom.spatial_in_domain(s).then(|| dom.node_id(dom.node_level(id), s))
    };

    let mut grad = vec![f64::NAN; count * n];
    let mut grad_ok = vec![false; count];
    for &id in dom.in_domain_nodes() {
        let mut ok = true;
        for i in 0..n {
            let h = dom.spacing()[i];
            match first_derivative(|k| at(id, i, k).map(|q| vals[q]), h) {
                Some(g) => grad[id * n + i] = g,
                None => ok = false,
            }
        }
        grad_ok[id] = ok;
    }

    let mut hess = vec![f64::NAN; count * n * n];
    let mut hess_ok = vec![false; count];
    for &id in dom.in_domain_nodes() {
        let mut ok = true;
        for i in 0..n {
            let h = dom.spacing()[i];
            match second_derivative(|k| at(id, i, k).map(|q| vals[q]), h) {
                Some(v) => hess[(id * n + i) * n + i] = v,
                None => ok = false,
            }
            for j in (i + 1)..n {
                let g_along = |axis: usize, comp: usize| {
                    first_derivative(
                        |k| {
                            at(id, axis, k)
                                .filter(|&q| grad_ok[q])
                                .map(|q| grad[q * n + comp])
                        },
                        dom.spacing()[axis],
                    )
                };
                match (g_along(i, j), g_along(j, i)) {
                    (Some(a), Some(b)) => {
                        let m = 0.5 * (a + b);
                        hess[(id * n + i) * n + j] = m;
                        hess[(id * n + j) * n + i] = m;
                    }
                    _ => ok = false,
                }
            }
        }
        hess_ok[id] = ok;
    }

    let mut ut = vec![f64::NAN; count];
    let levels = dom.levels() as isize;
    for &id in dom.in_domain_nodes() {
        let level = dom.node_level(id) as isize;
        let s = dom.node_spatial(id);
        let get = |k: isize| {
            let l = level + k;
            (0..levels).contains(&l).then(|| vals[dom.node_id(l as usize, s)])
        };
        ut[id] = first_derivative(get, dom.tau()).unwrap_or(f64::NAN);
    }

    let valid = (0..count)
        .map(|id| grad_ok[id] && hess_ok[id] && ut[id].is_finite())
        .collect();
    Ok(DerivativeBundle { n, grad, hess, ut, valid, stencil_order: 2 })
}
