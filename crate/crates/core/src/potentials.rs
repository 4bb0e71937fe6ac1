//! Heat potentials `v(y, s) = int_0^s int f(x, t) K(x, t; y, s) dx dt`.
//!
//! Space uses the tensor trapezoid rule on the grid of `f`. Time uses the
//! trapezoid rule over the levels up to `s - tau` plus the cutoff layer
//! `tau * f(y, s)`. The time derivative comes from
//! `v_s = f(y, s) + int int f K_s`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exponents::VariableExponent;
use crate::geometry::{pdist, GridDomain, Shape};
use crate::kernels::{
    eval_kernel, eval_kernel_derivative, heat_1d, heat_1d_zz, KernelKind, KernelSpec,
};
use crate::norms::{pointed_seminorm, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PotentialOptions {
    /// Also compute `v_s`.
    pub time_derivative: bool,
    /// Skip the support checks on `f` (for whole-space comparisons where the
    /// grid box is large against the support of the kernel mass).
    pub whole_space: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureMeta {
    pub time_cutoff: f64,
    pub spatial_rule: String,
    pub time_rule: String,
    pub space_nodes: usize,
    pub time_levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialResult {
    pub eval_nodes: Vec<usize>,
    pub v: Vec<f64>,
    pub vs: Option<Vec<f64>>,
    pub meta: QuadratureMeta,
}

impl PotentialResult {
    /// CSV with node id, coordinates, time, `v` and (if present) `v_s`.
    pub fn to_csv(&self, dom: &GridDomain) -> String {
        let mut out = String::from("node");
        for a in 0..dom.dim() {
            out.push_str(&format!(",x{a}"));
        }
        out.push_str(",t,v");
        if self.vs.is_some() {
            out.push_str(",vs");
        }
        out.push('\n');
        for (i, &id) in self.eval_nodes.iter().enumerate() {
            out.push_str(&id.to_string());
            for x in dom.node_x(id) {
                out.push_str(&format!(",{x:e}"));
            }
            out.push_str(&format!(",{:e},{:e}", dom.node_t(id), self.v[i]));
            if let Some(vs) = &self.vs {
                out.push_str(&format!(",{:e}", vs[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn meta_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta).expect("meta serializes")
    }
}

/// `v` at the given nodes of `f`'s grid.
pub fn heat_potential(f: &GridFunction, spec: &KernelSpec, eval_nodes: &[usize]) -> Result<PotentialResult> {
    heat_potential_with(f, spec, eval_nodes, PotentialOptions::default())
}

pub fn heat_potential_with(
    f: &GridFunction,
    spec: &KernelSpec,
    eval_nodes: &[usize],
    opts: PotentialOptions,
) -> Result<PotentialResult> {
    let dom = f.domain();
    if spec.n != dom.dim() {
        return Err(invalid("kernel and grid dimensions differ"));
    }
    for &e in eval_nodes {
        if e >= dom.node_count() || !dom.kind(e).in_domain() {
            return Err(Error::OutOfDomain(format!("evaluation node {e}")));
        }
        if dom.node_level(e) == 0 {
            return Err(invalid(format!(
                "evaluation time must exceed the initial time (node {e})"
            )));
        }
    }
    if opts.time_derivative && !opts.whole_space {
        check_support(f)?;
    }
    let axis_weights: Vec<Vec<f64>> = (0..dom.dim())
        .map(|a| {
            let h = dom.spacing()[a];
            (0..dom.nx())
                .map(|i| if i == 0 || i + 1 == dom.nx() { 0.5 * h } else { h })
                .collect()
        })
        .collect();
    let spatial: Vec<usize> =
        (0..dom.n_space()).filter(|&s| dom.spatial_in_domain(s)).collect();
    let results: Vec<(f64, f64)> = eval_nodes
        .par_iter()
        .map(|&e| evaluate(f, spec, &axis_weights, &spatial, e, opts.time_derivative))
        .collect();
    let (v, vs): (Vec<f64>, Vec<f64>) = results.into_iter().unzip();
    Ok(PotentialResult {
        eval_nodes: eval_nodes.to_vec(),
        v,
        vs: opts.time_derivative.then_some(vs),
        meta: QuadratureMeta {
            time_cutoff: dom.tau(),
            spatial_rule: "tensor trapezoid".into(),
            time_rule: "trapezoid to s - tau; cutoff layer tau * f(y, s) for v, tau * (K_s f)(s - tau) for v_s".into(),
            space_nodes: spatial.len(),
            time_levels: dom.levels(),
        },
    })
}

/// `f` must vanish on the lateral fences `x_i = lower_i, upper_i` (`i < n`),
/// on `x_n = lower_n`, and at the initial time.
fn check_support(f: &GridFunction) -> Result<()> {
    let dom = f.domain();
    let n = dom.dim();
    let tol = 1e-14 * f.sup_abs().max(f64::MIN_POSITIVE);
    for &id in dom.in_domain_nodes() {
        if f.value(id).abs() <= tol {
            continue;
        }
        let s = dom.node_spatial(id);
        let on_fence = match dom.shape() {
            Shape::Box { .. } => (0..n).any(|a| {
                let i = dom.axis_index(s, a);
                i == 0 || (a + 1 < n && i + 1 == dom.nx())
            }),
            Shape::Ball { .. } => dom.spatial_on_boundary(s),
        };
        if on_fence || dom.node_level(id) == 0 {
            return Err(Error::Precondition(format!(
                "f is nonzero at node {id}, which touches a fence or the initial time"
            )));
        }
    }
    Ok(())
}

fn evaluate(
    f: &GridFunction,
    spec: &KernelSpec,
    axis_weights: &[Vec<f64>],
    spatial: &[usize],
    e: usize,
    want_vs: bool,
) -> (f64, f64) {
    let dom = f.domain();
    let level = dom.node_level(e);
    let y = dom.node_x(e);
    let s = dom.node_t(e);
    let tau = dom.tau();
    let fy = f.value(e);
    let mut v = tau * fy;
    let mut vs = fy;
    if level >= 2 {
        for l in 0..level {
            let wt = if l == 0 || l + 1 == level { 0.5 * tau } else { tau };
            let (i0, i1) = level_integrals(f, spec, axis_weights, spatial, l, y, s, want_vs);
            v += wt * i0;
            // the last level also stands in for the omitted layer [s - tau, s]
            vs += if l + 1 == level { wt + tau } else { wt } * i1;
        }
    }
    (v, vs)
}

/// Spatial integrals of `f K` and `f K_s` on time level `l`.
#[allow(clippy::too_many_arguments)]
fn level_integrals(
    f: &GridFunction,
    spec: &KernelSpec,
    axis_weights: &[Vec<f64>],
    spatial: &[usize],
    l: usize,
    y: &[f64],
    s: f64,
    want_vs: bool,
) -> (f64, f64) {
    let dom = f.domain();
    let n = dom.dim();
    let t = dom.level_time(l);
    let tau = s - t;
    let vals = f.values();
    match &spec.kind {
        KernelKind::Standard | KernelKind::Reflected { .. } => {
            let coord = |a: usize, i: usize| dom.origin()[a] + i as f64 * dom.spacing()[a];
            let table = |a: usize, y_a: f64, second: bool| -> Vec<f64> {
                (0..dom.nx())
                    .map(|i| {
                        let z = coord(a, i) - y_a;
                        let g = if second { heat_1d_zz(z, tau) } else { heat_1d(z, tau) };
                        axis_weights[a][i] * g
                    })
                    .collect()
            };
            let g: Vec<Vec<f64>> = (0..n).map(|a| table(a, y[a], false)).collect();
            let gzz: Vec<Vec<f64>> =
                if want_vs { (0..n).map(|a| table(a, y[a], true)).collect() } else { Vec::new() };
            let image = match spec.kind {
                KernelKind::Reflected { d_bar } => {
                    let ys = 2.0 * d_bar - y[n - 1];
                    Some((table(n - 1, ys, false), if want_vs { table(n - 1, ys, true) } else { Vec::new() }))
                }
                _ => None,
            };
            let mut i0 = 0.0;
            let mut i1 = 0.0;
            let mut idx = [0usize; 3];
            for &sp in spatial {
                let fv = vals[dom.node_id(l, sp)];
                if fv == 0.0 {
                    continue;
                }
                for (a, slot) in idx.iter_mut().enumerate().take(n) {
                    *slot = dom.axis_index(sp, a);
                }
                let mut k = 1.0;
                for a in 0..n {
                    k *= g[a][idx[a]];
                }
                let mut ks = 0.0;
                if want_vs {
                    for a in 0..n {
                        let mut term = gzz[a][idx[a]];
                        for b in 0..n {
                            if b != a {
                                term *= g[b][idx[b]];
                            }
                        }
                        ks += term;
                    }
                }
                if let Some((gi, gizz)) = &image {
                    let last = n - 1;
                    let mut rest = 1.0;
                    for b in 0..last {
                        rest *= g[b][idx[b]];
                    }
                    k -= rest * gi[idx[last]];
                    if want_vs {
                        let mut img = gizz[idx[last]] * rest;
                        for a in 0..last {
                            let mut term = gzz[a][idx[a]] * gi[idx[last]];
                            for b in 0..last {
                                if b != a {
                                    term *= g[b][idx[b]];
                                }
                            }
                            img += term;
                        }
                        ks -= img;
                    }
                }
                i0 += fv * k;
                i1 += fv * ks;
            }
            (i0, i1)
        }
        KernelKind::Anisotropic { .. } => {
            let zero = vec![0usize; n];
            let mut i0 = 0.0;
            let mut i1 = 0.0;
            for &sp in spatial {
                let fv = vals[dom.node_id(l, sp)];
                if fv == 0.0 {
                    continue;
                }
                let x = dom.spatial_x(sp);
                let w: f64 = (0..n).map(|a| axis_weights[a][dom.axis_index(sp, a)]).product();
                i0 += w * fv * eval_kernel(spec, x, t, y, s).unwrap_or(0.0);
                if want_vs {
                    i1 += w * fv * eval_kernel_derivative(spec, 1, &zero, x, t, y, s).unwrap_or(0.0);
                }
            }
            (i0, i1)
        }
    }
}

/// Residual of `v_t - Delta v = f` at interior nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuhamelResidual {
    pub sup: f64,
    pub per_center: Vec<f64>,
}

/// Evaluates `v` on the five-point (per axis) stencil around each center
/// and returns `(v(s+tau) - v(s-tau)) / 2tau - Delta_h v - f` there.
pub fn duhamel_residual(f: &GridFunction, spec: &KernelSpec, centers: &[usize]) -> Result<DuhamelResidual> {
    let dom = f.domain();
    let n = dom.dim();
    let mut nodes = Vec::new();
    for &c in centers {
        let level = dom.node_level(c);
        if level < 2 || level + 1 >= dom.levels() {
            return Err(invalid(format!("center {c} needs a level above and two below")));
        }
        let sp = dom.node_spatial(c);
        nodes.push(c);
        nodes.push(dom.node_id(level - 1, sp));
        nodes.push(dom.node_id(level + 1, sp));
        for a in 0..n {
            for off in [-1isize, 1] {
                let nb = dom
                    .shift_spatial(sp, a, off)
                    .filter(|&q| dom.spatial_in_domain(q))
                    .ok_or_else(|| invalid(format!("center {c} lacks a neighbour on axis {a}")))?;
                nodes.push(dom.node_id(level, nb));
            }
        }
    }
    let res = heat_potential(f, spec, &nodes)?;
    let per = 3 + 2 * n;
    let per_center: Vec<f64> = centers
        .iter()
        .enumerate()
        .map(|(ci, &c)| {
            let v = &res.v[ci * per..(ci + 1) * per];
            let vt = (v[2] - v[1]) / (2.0 * dom.tau());
            let lap: f64 = (0..n)
                .map(|a| {
                    let h = dom.spacing()[a];
                    (v[3 + 2 * a] - 2.0 * v[0] + v[4 + 2 * a]) / (h * h)
                })
                .sum();
            vt - lap - f.value(c)
        })
        .collect();
    let sup = per_center.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(DuhamelResidual { sup, per_center })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeDerivativeBoundReport {
    /// Sup of quotient over the four-term seminorm sum.
    pub c: f64,
    pub vacuous: bool,
    pub pairs_used: usize,
    pub worst_pair: Option<(usize, usize)>,
}

/// Measures the constant in
/// `|v_s(P1) - v_s(P2)| / d^{alpha(P1)} <= C * sum of four pointed seminorms`
/// of `f` at `(y1,s1), (y1,s2), (y2,s1), (y2,s2)`.
pub fn verify_time_derivative_bound(
    f: &GridFunction,
    alpha: &VariableExponent,
    spec: &KernelSpec,
    pairs: &[(usize, usize)],
) -> Result<TimeDerivativeBoundReport> {
    let dom = f.domain();
    let mut nodes: Vec<usize> = pairs.iter().flat_map(|&(p, q)| [p, q]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let opts = PotentialOptions { time_derivative: true, whole_space: false };
    let res = heat_potential_with(f, spec, &nodes, opts)?;
    let vs = res.vs.expect("time derivative requested");
    let lookup = |id: usize| vs[nodes.binary_search(&id).expect("node evaluated")];
    let scale = vs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f.sup_abs());
    let mut report = TimeDerivativeBoundReport { c: 0.0, vacuous: true, pairs_used: 0, worst_pair: None };
    for &(p1, p2) in pairs {
        if p1 == p2 {
            continue;
        }
        let (x1, s1) = (dom.node_x(p1), dom.node_t(p1));
        let (x2, s2) = (dom.node_x(p2), dom.node_t(p2));
        let a = alpha.eval(x1, s1);
        let quotient = (lookup(p1) - lookup(p2)).abs() / pdist(x1, s1, x2, s2).powf(a);
        let (l1, l2) = (dom.node_level(p1), dom.node_level(p2));
        let (sp1, sp2) = (dom.node_spatial(p1), dom.node_spatial(p2));
        let corners = [
            dom.node_id(l1, sp1),
            dom.node_id(l2, sp1),
            dom.node_id(l1, sp2),
            dom.node_id(l2, sp2),
        ];
        let mut sum = 0.0;
        for c in corners {
            sum += pointed_seminorm(f, alpha, c)?;
        }
        if sum == 0.0 {
            if quotient > 1e-10 * scale.max(1.0) {
                return Err(Error::Inconsistency(format!(
                    "v_s varies between nodes {p1} and {p2} while f has zero seminorms"
                )));
            }
            continue;
        }
        report.vacuous = false;
        report.pairs_used += 1;
        let ratio = quotient / sum;
        if ratio > report.c {
            report.c = ratio;
            report.worst_pair = Some((p1, p2));
        }
    }
    Ok(report)
}
