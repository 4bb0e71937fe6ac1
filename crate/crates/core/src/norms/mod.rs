//! Variable Hölder seminorms and norms on grid functions.
//!
//! Pair quotients are evaluated as `|u(P) - u(Q)| / d(P, Q).powf(a)` and, for
//! the weighted families, multiplied by `min(w_P, w_Q).powf(k + s + a)`.

mod derivatives;
mod field;
pub(crate) mod pairs;
mod report;

pub use derivatives::{finite_differences, DerivativeBundle};
pub use field::{FieldFn, GridFunction};
pub use pairs::{PairStrategy, EXHAUSTIVE_LIMIT};
pub use report::{HolderReport, Witness};


use crate::error::{Error, Result};
use crate::exponents::VariableExponent;
use crate::geometry::{pdist, BoundaryPiece, GridDomain};
use pairs::scan_pairs;

/// Which point of a pair carries the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentAt {
    First,
    Second,
}

/// Vector-valued node data: `width` entries per node, compared in max-norm.
pub(crate) struct NodeData<'a> {
    pub data: &'a [f64],
    pub width: usize,
}

impl NodeData<'_> {
    #[inline]
    pub fn diff(&self, p: usize, q: usize) -> f64 {
        let w = self.width;
        let mut m = 0.0f64;
        for c in 0..w {
            m = m.max((self.data[p * w + c] - self.data[q * w + c]).abs());
        }
        m
    }

    #[inline]
    pub fn abs(&self, p: usize) -> f64 {
        let w = self.width;
        self.data[p * w..(p + 1) * w].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Weighted pair scan configuration: per-node weights and the order `k + s`.
pub(crate) struct PairWeight<'a> {
    pub w: &'a [f64],
    pub order: f64,
}

/// Sup of the Hölder quotient over ordered pairs from `nodes`.
pub(crate) fn holder_scan(
    dom: &GridDomain,
    data: &NodeData<'_>,
    nodes: &[usize],
    alpha: &[f64],
    at: ExponentAt,
    weight: Option<&PairWeight<'_>>,
    strategy: PairStrategy,
) -> (f64, Option<Witness>) {
    let best = scan_pairs(dom, nodes, strategy, |p, q| {
        let d = pdist(dom.node_x(p), dom.node_t(p), dom.node_x(q), dom.node_t(q));
        let a = match at {
            ExponentAt::First => alpha[p],
            ExponentAt::Second => alpha[q],
        };
        let v = data.diff(p, q) / d.powf(a);
        match weight {
            Some(pw) => v * pw.w[p].min(pw.w[q]).powf(pw.order + a),
            None => v,
        }
    });
    match best {
        Some(b) => (b.value, Some(Witness::new(dom, b.p, b.q, b.value))),
        None => (0.0, None),
    }
}

fn scalar(u: &GridFunction) -> NodeData<'_> {
    NodeData { data: u.values(), width: 1 }
}

fn sup_over(data: &NodeData<'_>, nodes: &[usize]) -> f64 {
    nodes.iter().fold(0.0, |m, &id| m.max(data.abs(id)))
}

/// `|u|_0`, the sup over in-domain nodes.
pub fn sup_norm(u: &GridFunction) -> f64 {
    u.sup_abs()
}

/// `[u]_{alpha(.)}`: sup over ordered pairs of `|u(P) - u(Q)| / d^{alpha(Q)}`.
pub fn seminorm_var(u: &GridFunction, alpha: &VariableExponent) -> Result<HolderReport> {
    seminorm_var_with(u, alpha, PairStrategy::Auto)
}

pub fn seminorm_var_with(
    u: &GridFunction,
    alpha: &VariableExponent,
    strategy: PairStrategy,
) -> Result<HolderReport> {
    let dom = u.domain();
    let a = alpha.sample(dom);
    let (v, w) =
        holder_scan(dom, &scalar(u), dom.in_domain_nodes(), &a, ExponentAt::Second, None, strategy);
    let mut r = HolderReport::new("[u]_alpha");
    r.add_pair_term("[u]_alpha", v, w);
    Ok(r.finish_sum())
}

/// `[u]_{alpha(P),P}` at node `p`: sup over in-domain `Q != P` of
/// `|u(P) - u(Q)| / d^{alpha(P)}`.
pub fn pointed_seminorm(u: &GridFunction, alpha: &VariableExponent, p: usize) -> Result<f64> {
    pointed_seminorm_over(u, alpha, p, u.domain().in_domain_nodes())
}

/// Pointed seminorm with `Q` restricted to `nodes`.
pub fn pointed_seminorm_over(
    u: &GridFunction,
    alpha: &VariableExponent,
    p: usize,
    nodes: &[usize],
) -> Result<f64> {
    let dom = u.domain();
    if p >= dom.node_count() || !dom.kind(p).in_domain() {
        return Err(Error::OutOfDomain(format!("node {p}")));
    }
    let a = alpha.eval(dom.node_x(p), dom.node_t(p));
    pointed_with_exponent(u, a, p, nodes)
}

pub(crate) fn pointed_with_exponent(u: &GridFunction, a: f64, p: usize, nodes: &[usize]) -> Result<f64> {
    let dom = u.domain();
    let vals = u.values();
    let (xp, tp) = (dom.node_x(p), dom.node_t(p));
    Ok(nodes
        .iter()
        .filter(|&&q| q != p)
        .map(|&q| (vals[p] - vals[q]).abs() / pdist(xp, tp, dom.node_x(q), dom.node_t(q)).powf(a))
        .fold(0.0, f64::max))
}

/// `|u|_{0,alpha(.)} = |u|_0 + [u]_{alpha(.)}`.
pub fn norm_0_alpha(u: &GridFunction, alpha: &VariableExponent) -> Result<HolderReport> {
    norm_0_alpha_with(u, alpha, PairStrategy::Auto)
}

pub fn norm_0_alpha_with(
    u: &GridFunction,
    alpha: &VariableExponent,
    strategy: PairStrategy,
) -> Result<HolderReport> {
    let semi = seminorm_var_with(u, alpha, strategy)?;
    let mut r = HolderReport::new("|u|_0,alpha");
    r.add_term("|u|_0", u.sup_abs());
    r.add_pair_term("[u]_alpha", semi.value, semi.witness);
    Ok(r.finish_sum())
}

/// `|u|_{2,1,alpha(.)} = |u|_0 + |Du|_0 + |D^2u|_{0,alpha(.)} + |u_t|_{0,alpha(.)}`.
pub fn norm_2_1_alpha(u: &GridFunction, alpha: &VariableExponent) -> Result<HolderReport> {
    let d = finite_differences(u)?;
    norm_2_1_alpha_with(u, &d, alpha, PairStrategy::Auto)
}

pub fn norm_2_1_alpha_with(
    u: &GridFunction,
    d: &DerivativeBundle,
    alpha: &VariableExponent,
    strategy: PairStrategy,
) -> Result<HolderReport> {
    let dom = u.domain();
    let n = dom.dim();
    let a = alpha.sample(dom);
    let nodes = d.valid_nodes();
    let grad = NodeData { data: &d.grad, width: n };
    let hess = NodeData { data: &d.hess, width: n * n };
    let ut = NodeData { data: &d.ut, width: 1 };
    let mut r = HolderReport::new("|u|_2,1,alpha");
    r.add_term("|u|_0", u.sup_abs());
    r.add_term("|Du|_0", sup_over(&grad, &nodes));
    r.add_term("|D2u|_0", sup_over(&hess, &nodes));
    let (v, w) = holder_scan(dom, &hess, &nodes, &a, ExponentAt::Second, None, strategy);
    r.add_pair_term("[D2u]_alpha", v, w);
    r.add_term("|u_t|_0", sup_over(&ut, &nodes));
    let (v, w) = holder_scan(dom, &ut, &nodes, &a, ExponentAt::Second, None, strategy);
    r.add_pair_term("[u_t]_alpha", v, w);
    Ok(r.finish_sum())
}

/// Source of the distance weights in the weighted families.
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// `d_P = min(t - t_start, dist(x, boundary))`.
    Interior,
    /// `d̄_P`: parabolic distance to the parabolic boundary minus the listed
    /// pieces.
    Boundary(Vec<BoundaryPiece>),
}

impl Weighting {
    pub fn weights(&self, dom: &GridDomain) -> Result<Vec<f64>> {
        Ok(match self {
            Weighting::Interior => {
                dom.node_boundary_distances(&[])?.into_iter().map(|b| b.d_p).collect()
            }
            Weighting::Boundary(gamma) => {
                dom.node_boundary_distances(gamma)?.into_iter().map(|b| b.d_bar).collect()
            }
        })
    }

    fn label(&self) -> &'static str {
        match self {
            Weighting::Interior => "*",
            Weighting::Boundary(_) => "bar",
        }
    }
}

/// `D^k u` at every node together with the nodes where it is available.
fn order_data(u: &GridFunction, k: usize) -> Result<(Vec<f64>, usize, Vec<usize>)> {
    let dom = u.domain();
    let n = dom.dim();
    match k {
        0 => Ok((u.values().to_vec(), 1, dom.in_domain_nodes().to_vec())),
        1 | 2 => {
            let d = finite_differences(u)?;
            let nodes = d.valid_nodes();
            if k == 1 {
                Ok((d.grad, n, nodes))
            } else {
                Ok((d.hess, n * n, nodes))
            }
        }
        _ => Err(Error::UnsupportedOrder(format!("k = {k}; only k <= 2 is supported"))),
    }
}

/// Weighted sup `sup_P w_P^{k+s} |D^k u(P)|`.
pub fn weighted_sup(u: &GridFunction, k: usize, s: f64, weighting: &Weighting) -> Result<f64> {
    let w = weighting.weights(u.domain())?;
    let (data, width, nodes) = order_data(u, k)?;
    let nd = NodeData { data: &data, width };
    let order = k as f64 + s;
    Ok(nodes.iter().fold(0.0, |m, &id| m.max(w[id].powf(order) * nd.abs(id))))
}

/// Weighted pair seminorm
/// `sup_{P != Q} w_{PQ}^{k+alpha(P)+s} |D^k u(P) - D^k u(Q)| / d^{alpha(P)}`
/// with `w_{PQ} = min(w_P, w_Q)`.
pub fn weighted_seminorm(
    u: &GridFunction,
    alpha: &VariableExponent,
    k: usize,
    s: f64,
    weighting: &Weighting,
    strategy: PairStrategy,
) -> Result<HolderReport> {
    let dom = u.domain();
    let w = weighting.weights(dom)?;
    let (data, width, nodes) = order_data(u, k)?;
    let a = alpha.sample(dom);
    let pw = PairWeight { w: &w, order: k as f64 + s };
    let nd = NodeData { data: &data, width };
    let (v, wit) = holder_scan(dom, &nd, &nodes, &a, ExponentAt::First, Some(&pw), strategy);
    let key = format!("[u]{}_{k},alpha^({s})", weighting.label());
    let mut r = HolderReport::new(key.clone());
    r.add_pair_term(&key, v, wit);
    Ok(r.finish_sum())
}

/// Interior seminorm `[u]^{(s)}_{k,alpha(.)}`; `s = 0` gives `[u]*_{k,alpha(.)}`.
pub fn weighted_interior_seminorm(
    u: &GridFunction,
    alpha: &VariableExponent,
    k: usize,
    s: f64,
) -> Result<HolderReport> {
    weighted_seminorm(u, alpha, k, s, &Weighting::Interior, PairStrategy::Auto)
}

/// Boundary seminorm over `Omega_T ∪ Gamma`, weighted by `d̄`.
pub fn boundary_seminorm(
    u: &GridFunction,
    alpha: &VariableExponent,
    k: usize,
    s: f64,
    gamma: &[BoundaryPiece],
) -> Result<HolderReport> {
    weighted_seminorm(u, alpha, k, s, &Weighting::Boundary(gamma.to_vec()), PairStrategy::Auto)
}

/// Full weighted norm `sum_{j<=k} sup w^{j+s}|D^j u| + [u]^{(s)}_{k,alpha(.)}`.
pub fn weighted_norm(
    u: &GridFunction,
    alpha: &VariableExponent,
    k: usize,
    s: f64,
    weighting: &Weighting,
    strategy: PairStrategy,
) -> Result<HolderReport> {
    let semi = weighted_seminorm(u, alpha, k, s, weighting, strategy)?;
    let mut r = HolderReport::new(format!("|u|{}_{k},alpha^({s})", weighting.label()));
    for j in 0..=k {
        r.add_term(&format!("[u]_{j}"), weighted_sup(u, j, s, weighting)?);
    }
    r.add_pair_term(&semi.name, semi.value, semi.witness);
    Ok(r.finish_sum())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::Shape;

    fn line(nx: usize, nt: usize) -> Arc<GridDomain> {
        let shape = Shape::Box { lower: vec![0.0], upper: vec![1.0] };
        Arc::new(GridDomain::new(shape, 0.5, nx, nt).unwrap())
    }

    #[test]
    fn constant_field_has_zero_seminorm() {
        let u = GridFunction::constant(line(5, 4), 3.0);
        let a = VariableExponent::constant(0.5).unwrap();
        assert_eq!(seminorm_var(&u, &a).unwrap().value, 0.0);
        assert_eq!(pointed_seminorm(&u, &a, 3).unwrap(), 0.0);
        assert_eq!(norm_0_alpha(&u, &a).unwrap().value, 3.0);
    }

    #[test]
    fn linear_field_norm_2_1() {
        let dom = line(9, 6);
        let u = GridFunction::from_fn(dom, |x, _| x[0]);
        let a = VariableExponent::constant(0.5).unwrap();
        let r = norm_2_1_alpha(&u, &a).unwrap();
        assert_eq!(r.term("|u|_0"), Some(1.0));
        assert!((r.term("|Du|_0").unwrap() - 1.0).abs() < 1e-12);
        assert!(r.term("|D2u|_0").unwrap() < 1e-9);
        assert!(r.term("[u_t]_alpha").unwrap() < 1e-9);
    }

    #[test]
    fn witness_reproduces_value() {
        let dom = line(7, 5);
        let u = GridFunction::from_fn(dom.clone(), |x, t| (3.0 * x[0]).sin() + t * t);
        let a = VariableExponent::custom(|x, t| 0.3 + 0.2 * x[0] + 0.1 * t, 0.3, 0.6).unwrap();
        let r = seminorm_var(&u, &a).unwrap();
        let w = r.witness.unwrap();
        let d = pdist(&w.p_point.x, w.p_point.t, &w.q_point.x, w.q_point.t);
        let q = (u.value(w.p) - u.value(w.q)).abs() / d.powf(a.eval(&w.q_point.x, w.q_point.t));
        assert_eq!(q, r.value);
    }

    #[test]
    fn order_three_is_rejected() {
        let u = GridFunction::zeros(line(5, 4));
        let a = VariableExponent::constant(0.5).unwrap();
        assert!(matches!(
            weighted_interior_seminorm(&u, &a, 3, 0.0),
            Err(Error::UnsupportedOrder(_))
        ));
    }

    #[test]
    fn weighted_k0_constant_equals_sup() {
        let u = GridFunction::constant(line(5, 4), -2.0);
        assert_eq!(weighted_sup(&u, 0, 0.0, &Weighting::Interior).unwrap(), 2.0);
    }
}
