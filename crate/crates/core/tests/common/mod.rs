//! Independent brute-force oracles and fixtures shared by the integration
//! tests. Nothing here calls into the scans under test.

#![allow(dead_code)]

use std::sync::Arc;

use holdervar::{GridDomain, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Field = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

pub fn box_domain(n: usize, lo: f64, hi: f64, t: f64, nx: usize, nt: usize) -> Arc<GridDomain> {
    let shape = Shape::Box { lower: vec![lo; n], upper: vec![hi; n] };
    Arc::new(GridDomain::new(shape, t, nx, nt).unwrap())
}

pub fn ball_domain(n: usize, radius: f64, t: f64, nx: usize, nt: usize) -> Arc<GridDomain> {
    let shape = Shape::Ball { center: vec![0.0; n], radius };
    Arc::new(GridDomain::new(shape, t, nx, nt).unwrap())
}

pub fn pdist(x1: &[f64], t1: f64, x2: &[f64], t2: f64) -> f64 {
    let mut m = 0.0f64;
    for (a, b) in x1.iter().zip(x2) {
        m = m.max((a - b).abs());
    }
    m.max((t1 - t2).abs().sqrt())
}

fn diff(data: &[f64], width: usize, p: usize, q: usize) -> f64 {
    let mut m = 0.0f64;
    for c in 0..width {
        m = m.max((data[p * width + c] - data[q * width + c]).abs());
    }
    m
}

pub fn sup_abs(data: &[f64], width: usize, nodes: &[usize]) -> f64 {
    let mut m = 0.0f64;
    for &p in nodes {
        for c in 0..width {
            m = m.max(data[p * width + c].abs());
        }
    }
    m
}

/// Which point of a pair carries the exponent.
#[derive(Clone, Copy)]
pub enum At {
    First,
    Second,
}

/// Sequential sup over ordered pairs of `|D(P) - D(Q)| / d^a`, optionally
/// times `min(w_P, w_Q)^(order + a)`.
pub fn holder_sup(
    dom: &GridDomain,
    data: &[f64],
    width: usize,
    nodes: &[usize],
    alpha: &[f64],
    at: At,
    weight: Option<(&[f64], f64)>,
) -> f64 {
    let mut best = 0.0f64;
    for &p in nodes {
        for &q in nodes {
            if p == q {
                continue;
            }
            let d = pdist(dom.node_x(p), dom.node_t(p), dom.node_x(q), dom.node_t(q));
            let a = match at {
                At::First => alpha[p],
                At::Second => alpha[q],
            };
            let mut v = diff(data, width, p, q) / d.powf(a);
            if let Some((w, order)) = weight {
                v *= w[p].min(w[q]).powf(order + a);
            }
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// Exponent closure sampled at the in-domain nodes, `NaN` elsewhere.
pub fn sample_exponent(dom: &GridDomain, a: &Field) -> Vec<f64> {
    let mut out = vec![f64::NAN; dom.node_count()];
    for &id in dom.in_domain_nodes() {
        out[id] = a(dom.node_x(id), dom.node_t(id));
    }
    out
}

pub fn log_holder_sup(dom: &GridDomain, alpha: &[f64]) -> f64 {
    let nodes = dom.in_domain_nodes();
    let mut best = 0.0f64;
    for &p in nodes {
        for &q in nodes {
            if p == q {
                continue;
            }
            let d = pdist(dom.node_x(p), dom.node_t(p), dom.node_x(q), dom.node_t(q));
            let v = (alpha[p] - alpha[q]).abs() * d.ln().abs();
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// `min(t - t_start, distance to the faces)` on a box.
pub fn box_interior_weight(lower: &[f64], upper: &[f64], x: &[f64], elapsed: f64) -> f64 {
    let mut d = elapsed;
    for i in 0..x.len() {
        d = d.min(x[i] - lower[i]).min(upper[i] - x[i]);
    }
    d.max(0.0)
}

/// Parabolic distance to the lateral boundary of a box, with the initial
/// slice excluded.
pub fn box_lateral_weight(lower: &[f64], upper: &[f64], x: &[f64]) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..x.len() {
        d = d.min((x[i] - lower[i]).abs()).min((upper[i] - x[i]).abs());
    }
    d
}

/// Random smooth field: a seeded sum of four plane waves in space-time.
pub fn random_field(seed: u64, n: usize) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(Vec<f64>, f64, f64, f64)> = (0..4)
        .map(|_| {
            let k = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
            (k, rng.gen_range(-3.0..3.0), rng.gen_range(0.0..6.3), rng.gen_range(-1.0..1.0))
        })
        .collect();
    Arc::new(move |x: &[f64], t: f64| {
        waves
            .iter()
            .map(|(k, w, ph, c)| c * (k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w * t + ph).sin())
            .sum()
    })
}

/// Random smooth exponent with values in `[lo, hi]`.
pub fn random_exponent(seed: u64, lo: f64, hi: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let k: f64 = rng.gen_range(0.5..3.0);
    let w: f64 = rng.gen_range(0.5..3.0);
    let ph: f64 = rng.gen_range(0.0..6.3);
    Arc::new(move |x: &[f64], t: f64| lo + (hi - lo) * 0.5 * (1.0 + (k * x[0] + w * t + ph).sin()))
}

/// Smooth bump `exp(-1 / (1 - q))` with
/// `q = |x|^2 / r^2 + ((t - t0) / rt)^2`, zero for `q >= 1`.
pub fn bump(r: f64, t0: f64, rt: f64) -> Field {
    Arc::new(move |x: &[f64], t: f64| {
        let r2 = x.iter().map(|v| v * v).sum::<f64>() / (r * r);
        let tt = (t - t0) / rt;
        let q = r2 + tt * tt;
        if q >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - q)).exp()
        }
    })
}

/// Largest relative change between consecutive entries.
pub fn max_drift(v: &[f64]) -> f64 {
    v.windows(2).map(|w| ((w[1] - w[0]) / w[0]).abs()).fold(0.0, f64::max)
}
