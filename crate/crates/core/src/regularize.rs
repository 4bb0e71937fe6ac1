//! Extension to a neighbourhood of the cylinder and space-time mollification.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exponents::VariableExponent;
use crate::geometry::{euclid, GridDomain, Shape};
use crate::norms::pairs::{scan_pairs, PairStrategy};
use crate::norms::{norm_0_alpha, GridFunction};

/// A field and exponent extended from `base` to a grid covering the
/// `sigma`-neighbourhood. The extended grid shares the spacing of `base`;
/// node `(level, i)` of `base` sits at `(level + time_shift, i + space_shift)`.
#[derive(Debug, Clone)]
pub struct ExtendedField {
    pub f_bar: GridFunction,
    pub alpha_bar: VariableExponent,
    pub sigma: f64,
    pub base: Arc<GridDomain>,
    pub space_shift: usize,
    pub time_shift: usize,
}

impl ExtendedField {
    pub fn domain(&self) -> &GridDomain {
        self.f_bar.domain()
    }

    /// Node of the extended grid at the position of `base` node `id`.
    pub fn ext_node(&self, id: usize) -> usize {
        map_node(&self.base, self.domain(), id, self.space_shift, self.time_shift)
    }

    /// Values of `f_bar` at the nodes of `base`.
    pub fn restrict(&self) -> Result<GridFunction> {
        let mut vals = vec![f64::NAN; self.base.node_count()];
        for &id in self.base.in_domain_nodes() {
            vals[id] = self.f_bar.value(self.ext_node(id));
        }
        GridFunction::from_values(self.base.clone(), vals)
    }
}

fn map_node(base: &GridDomain, ext: &GridDomain, id: usize, ds: usize, dt: usize) -> usize {
    let sp = base.node_spatial(id);
    let mut out = 0;
    for a in 0..base.dim() {
        out += (base.axis_index(sp, a) + ds) * ext.stride(a);
    }
    ext.node_id(base.node_level(id) + dt, out)
}

fn steps(sigma: f64, h: f64) -> usize {
    ((sigma / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Time extension by clamping: `f(x, t_start)` before the cylinder and
/// `f(x, t_end)` after it. The time window grows by at least `sigma` on each
/// side.
pub fn extend_time(f: &GridFunction, alpha: &VariableExponent, sigma: f64) -> Result<ExtendedField> {
    if !(sigma > 0.0) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    let base = f.domain_arc().clone();
    let m = steps(sigma, base.tau());
    let ext = Arc::new(GridDomain::with_time_window(
        base.shape().clone(),
        base.t_start() - m as f64 * base.tau(),
        base.t_end() + m as f64 * base.tau(),
        base.nx(),
        base.nt() + 2 * m,
    )?);
    build(f, alpha, sigma, base, ext, 0, m, |_, _| None)
}

/// Radial reflection across the sphere combined with the time clamp:
/// outside the ball `f_bar(x, t) = f(c + (2R - r) n, clamp(t))`.
pub fn reflect_extension_ball(
    f: &GridFunction,
    alpha: &VariableExponent,
    sigma: f64,
) -> Result<ExtendedField> {
    let base = f.domain_arc().clone();
    let (center, radius) = match base.shape() {
        Shape::Ball { center, radius } => (center.clone(), *radius),
        other => {
            return Err(Error::UnsupportedShape(format!(
                "reflection extension needs a ball, got {other:?}"
            )))
        }
    };
    if !(sigma > 0.0) || sigma >= radius {
        return Err(invalid(format!("sigma must lie in (0, radius = {radius}), got {sigma}")));
    }
    let h = base.spacing()[0];
    let ms = steps(sigma, h);
    let mt = steps(sigma, base.tau());
    let ext = Arc::new(GridDomain::with_time_window(
        Shape::Ball { center: center.clone(), radius: radius + ms as f64 * h },
        base.t_start() - mt as f64 * base.tau(),
        base.t_end() + mt as f64 * base.tau(),
        base.nx() + 2 * ms,
        base.nt() + 2 * mt,
    )?);
    let reflect = move |x: &[f64], _t: f64| -> Option<Vec<f64>> {
        let r = euclid(x, &center);
        if r <= radius {
            return None;
        }
        let scale = (2.0 * radius - r) / r;
        Some(center.iter().zip(x).map(|(c, xi)| c + scale * (xi - c)).collect())
    };
    build(f, alpha, sigma, base, ext, ms, mt, reflect)
}

#[allow(clippy::too_many_arguments)]
fn build(
    f: &GridFunction,
    alpha: &VariableExponent,
    sigma: f64,
    base: Arc<GridDomain>,
    ext: Arc<GridDomain>,
    ds: usize,
    dt: usize,
    reflect: impl Fn(&[f64], f64) -> Option<Vec<f64>>,
) -> Result<ExtendedField> {
    let n = base.dim();
    let a_base = alpha.sample(&base);
    let a_grid = GridFunction::from_values(base.clone(), a_base)?;
    let mut fv = vec![f64::NAN; ext.node_count()];
    let mut av = vec![f64::NAN; ext.node_count()];
    for &id in ext.in_domain_nodes() {
        let level = ext.node_level(id) as isize - dt as isize;
        let level = level.clamp(0, base.nt() as isize) as usize;
        let sp = ext.node_spatial(id);
        let mut base_sp = Some(0usize);
        for a in 0..n {
            let i = ext.axis_index(sp, a) as isize - ds as isize;
            base_sp = match base_sp {
                Some(acc) if i >= 0 && (i as usize) < base.nx() => {
                    Some(acc + i as usize * base.stride(a))
                }
                _ => None,
            };
        }
        if let Some(bs) = base_sp.filter(|&bs| base.spatial_in_domain(bs)) {
            let src = base.node_id(level, bs);
            fv[id] = f.value(src);
            av[id] = a_grid.value(src);
            continue;
        }
        let t = base.level_time(level);
        let x = ext.node_x(id);
        let xs = reflect(x, t).ok_or_else(|| {
            Error::Inconsistency(format!("extended node {id} has no source point"))
        })?;
        fv[id] = f.interpolate(&xs, t)?;
        av[id] = a_grid.interpolate(&xs, t)?;
    }
    let f_bar = GridFunction::from_values(ext.clone(), fv)?;
    let alpha_bar = VariableExponent::tabulated_with_range(
        GridFunction::from_values(ext, av)?,
        alpha.alpha_minus.min(alpha.grid_range(&base).0),
        alpha.alpha_plus.max(alpha.grid_range(&base).1),
    )?;
    Ok(ExtendedField { f_bar, alpha_bar, sigma, base, space_shift: ds, time_shift: dt })
}

/// Standard bump `exp(-1 / (1 - |z|^2))` on the unit ball.
fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Normalized stencil `(axis offsets, level offset, weight)` of the
/// mollifier at scale `eps` on a grid with the given spacings.
pub fn mollifier_stencil(spacing: &[f64], tau: f64, eps: f64) -> Vec<(Vec<isize>, isize, f64)> {
    let n = spacing.len();
    let rx: Vec<isize> = spacing.iter().map(|h| (eps / h).floor() as isize).collect();
    let rt = (eps / tau).floor() as isize;
    let mut out = Vec::new();
    let mut off = vec![0isize; n];
    let total: usize = rx.iter().map(|r| (2 * r + 1) as usize).product::<usize>() * (2 * rt + 1) as usize;
    for code in 0..total {
        let mut c = code;
        for a in 0..n {
            let w = (2 * rx[a] + 1) as usize;
            off[a] = (c % w) as isize - rx[a];
            c /= w;
        }
        let dl = c as isize - rt;
        let mut r2 = (dl as f64 * tau / eps).powi(2);
        for a in 0..n {
            r2 += (off[a] as f64 * spacing[a] / eps).powi(2);
        }
        let w = bump(r2);
        if w > 0.0 {
            out.push((off.clone(), dl, w));
        }
    }
    let sum: f64 = out.iter().map(|e| e.2).sum();
    for e in &mut out {
        e.2 /= sum;
    }
    out
}

/// `f_eps = f_bar * phi_eps` at the nodes of the base cylinder, with the
/// Euclidean ball in space-time as support. Requires `eps <= sigma`.
pub fn mollify(ext: &ExtendedField, eps: f64) -> Result<GridFunction> {
    if !(eps > 0.0) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    if eps > ext.sigma {
        return Err(Error::Precondition(format!("eps = {eps} exceeds sigma = {}", ext.sigma)));
    }
    let base = &ext.base;
    let dom = ext.domain();
    let stencil = mollifier_stencil(dom.spacing(), dom.tau(), eps);
    let fb = ext.f_bar.values();
    let nodes = base.in_domain_nodes();
    let values: Vec<Result<f64>> = nodes
        .par_iter()
        .map(|&id| {
            let centre = ext.ext_node(id);
            let level = dom.node_level(centre) as isize;
            let sp = dom.node_spatial(centre);
            let fc = fb[centre];
            let mut acc = 0.0;
            for (off, dl, w) in &stencil {
                let mut q = Some(sp);
                for (a, &o) in off.iter().enumerate() {
                    q = q.and_then(|s| dom.shift_spatial(s, a, o));
                }
                let l = level + dl;
                let q = q
                    .filter(|&s| dom.spatial_in_domain(s))
                    .filter(|_| l >= 0 && (l as usize) < dom.levels())
                    .ok_or_else(|| {
                        Error::Precondition(format!(
                            "mollifier stencil at node {id} leaves the extended domain"
                        ))
                    })?;
                acc += w * (fb[dom.node_id(l as usize, q)] - fc);
            }
            Ok(fc + acc)
        })
        .collect();
    let mut out = vec![f64::NAN; base.node_count()];
    for (&id, v) in nodes.iter().zip(values) {
        out[id] = v?;
    }
    GridFunction::from_values(base.clone(), out)
}

/// `eps'(delta)`: half the smallest space-time Euclidean distance between
/// nodes whose exponents differ by at least `delta` (the extended grid's
/// diagonal when no such pair exists).
pub fn epsilon_prime(alpha: &VariableExponent, dom: &GridDomain, delta: f64) -> f64 {
    let a = alpha.sample(dom);
    let best = scan_pairs(dom, dom.in_domain_nodes(), PairStrategy::Auto, |p, q| {
        if (a[p] - a[q]).abs() >= delta {
            let dt = dom.node_t(p) - dom.node_t(q);
            let dx2: f64 = dom
                .node_x(p)
                .iter()
                .zip(dom.node_x(q))
                .map(|(u, v)| (u - v) * (u - v))
                .sum();
            -(dx2 + dt * dt).sqrt()
        } else {
            f64::NAN
        }
    });
    match best {
        Some(b) => -b.value / 2.0,
        None => {
            let span = dom.spacing()[0] * (dom.nx() - 1) as f64;
            let time = dom.t_end() - dom.t_start();
            (dom.dim() as f64 * span * span + time * time).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MollifyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub eps: f64,
    pub eps_prime: f64,
    /// Whether `eps <= eps'(delta)`, the regime where the bound is claimed.
    pub within_hypotheses: bool,
}

/// `|f_eps|_{0, alpha - delta}` on the base cylinder against
/// `3 |f_bar|_{0, alpha_bar}` on the extended one.
pub fn check_mollify_bound(ext: &ExtendedField, alpha: &VariableExponent, delta: f64, eps: f64) -> Result<MollifyCheck> {
    if !(delta > 0.0 && delta < alpha.alpha_minus) {
        return Err(invalid(format!(
            "delta = {delta} must lie in (0, alpha_minus = {})",
            alpha.alpha_minus
        )));
    }
    let eps_prime = epsilon_prime(&ext.alpha_bar, ext.domain(), delta);
    let f_eps = mollify(ext, eps)?;
    let lhs = norm_0_alpha(&f_eps, &alpha.shifted(delta)?)?.value;
    let rhs = 3.0 * norm_0_alpha(&ext.f_bar, &ext.alpha_bar)?.value;
    Ok(MollifyCheck { lhs, rhs, pass: lhs <= rhs, eps, eps_prime, within_hypotheses: eps <= eps_prime })
}

/// Measured extension constant `|f_bar|_{0, alpha_bar} / |f|_{0, alpha}`
/// (`None` when `f` vanishes).
pub fn extension_constant(f: &GridFunction, alpha: &VariableExponent, ext: &ExtendedField) -> Result<Option<f64>> {
    let num = norm_0_alpha(&ext.f_bar, &ext.alpha_bar)?.value;
    let den = norm_0_alpha(f, alpha)?.value;
    Ok((den > 0.0).then(|| num / den))
}
