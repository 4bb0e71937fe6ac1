//! Heat kernels: the standard fundamental solution, its reflection across a
//! plane, and the constant-coefficient anisotropic kernel.
//!
//! Every kernel is written `K(x, t; y, s)` with `s > t`, a function of
//! `z = x - y` and `tau = s - t`.

mod tables;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use tables::{build_tables, Poly};

/// Exponent arguments below this evaluate to an exact zero.
pub const UNDERFLOW_ARG: f64 = -700.0;

/// Highest total derivative order `k + |j|` supported.
pub const MAX_DERIVATIVE_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum KernelKind {
    Standard,
    /// Standard kernel minus its image across `y_n = d_bar`.
    Reflected { d_bar: f64 },
    /// Row-major symmetric positive definite `n x n` matrix.
    Anisotropic { a: Vec<f64> },
}

#[derive(Debug, Clone)]
struct AnisoData {
    sqrt_det: f64,
    inverse: Vec<f64>,
    eigen_min: f64,
    eigen_max: f64,
    tables: BTreeMap<(usize, Vec<usize>), Poly>,
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub n: usize,
    aniso: Option<AnisoData>,
}

impl KernelSpec {
    pub fn standard(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(KernelSpec { kind: KernelKind::Standard, n, aniso: None })
    }

    pub fn reflected(n: usize, d_bar: f64) -> Result<Self> {
        check_dim(n)?;
        if !d_bar.is_finite() {
            return Err(invalid("reflection height must be finite"));
        }
        Ok(KernelSpec { kind: KernelKind::Reflected { d_bar }, n, aniso: None })
    }

    /// Anisotropic kernel for a symmetric matrix whose eigenvalues lie in
    /// `[lambda, big_lambda]`.
    pub fn anisotropic(a: Vec<Vec<f64>>, lambda: f64, big_lambda: f64) -> Result<Self> {
        let spec = Self::anisotropic_unchecked(a)?;
        let data = spec.aniso.as_ref().expect("anisotropic data");
        if !(lambda > 0.0) || data.eigen_min < lambda || data.eigen_max > big_lambda {
            return Err(invalid(format!(
                "eigenvalues [{}, {}] outside [{lambda}, {big_lambda}]",
                data.eigen_min, data.eigen_max
            )));
        }
        Ok(spec)
    }

    /// Anisotropic kernel requiring only symmetry and positive definiteness.
    pub fn anisotropic_unchecked(a: Vec<Vec<f64>>) -> Result<Self> {
        let n = a.len();
        check_dim(n)?;
        if a.iter().any(|row| row.len() != n) {
            return Err(invalid("coefficient matrix must be square"));
        }
        let flat: Vec<f64> = a.iter().flatten().copied().collect();
        for i in 0..n {
            for j in 0..n {
                let (p, q) = (flat[i * n + j], flat[j * n + i]);
                if (p - q).abs() > 1e-12 * (1.0 + p.abs()) {
                    return Err(invalid("coefficient matrix must be symmetric"));
                }
            }
        }
        let eig = sym_eigenvalues(&flat, n);
        let eigen_min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let eigen_max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(eigen_min > 0.0) {
            return Err(invalid("coefficient matrix must be positive definite"));
        }
        let det: f64 = eig.iter().product();
        let inverse = invert(&flat, n).ok_or_else(|| invalid("singular coefficient matrix"))?;
        let tables = build_tables(&flat, n, MAX_DERIVATIVE_ORDER);
        Ok(KernelSpec {
            kind: KernelKind::Anisotropic { a: flat },
            n,
            aniso: Some(AnisoData { sqrt_det: det.sqrt(), inverse, eigen_min, eigen_max, tables }),
        })
    }

    /// Inverse of the anisotropic matrix, row-major. The anisotropic kernel
    /// solves `K_s = sum_ij inv_ij D_{y_i y_j} K`.
    pub fn anisotropic_inverse(&self) -> Option<&[f64]> {
        self.aniso.as_ref().map(|d| d.inverse.as_slice())
    }

    pub fn eigen_bounds(&self) -> Option<(f64, f64)> {
        self.aniso.as_ref().map(|d| (d.eigen_min, d.eigen_max))
    }

    fn image(&self, y: &[f64]) -> Option<Vec<f64>> {
        match self.kind {
            KernelKind::Reflected { d_bar } => {
                let mut ys = y.to_vec();
                let last = self.n - 1;
                ys[last] = 2.0 * d_bar - y[last];
                Some(ys)
            }
            _ => None,
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("spatial dimension must be positive"));
    }
    Ok(())
}

/// One-dimensional heat kernel `(4 pi tau)^{-1/2} exp(-z^2 / 4tau)`.
#[inline]
pub(crate) fn heat_1d(z: f64, tau: f64) -> f64 {
    let arg = -z * z / (4.0 * tau);
    if arg < UNDERFLOW_ARG {
        return 0.0;
    }
    (4.0 * PI * tau).powf(-0.5) * arg.exp()
}

/// Second `z`-derivative (equal to the `tau`-derivative) of [`heat_1d`].
#[inline]
pub(crate) fn heat_1d_zz(z: f64, tau: f64) -> f64 {
    let g = heat_1d(z, tau);
    g * (z * z / (4.0 * tau * tau) - 0.5 / tau)
}

/// Physicists' Hermite polynomial `H_r(u)`.
fn hermite(r: usize, u: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * u);
    if r == 0 {
        return h0;
    }
    for m in 1..r {
        let h2 = 2.0 * u * h1 - 2.0 * m as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// `d_z^r` of the one-dimensional kernel, relative to the kernel itself.
fn heat_1d_factor(r: usize, z: f64, tau: f64) -> f64 {
    let scale = 2.0 * tau.sqrt();
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    sign * hermite(r, z / scale) / scale.powi(r as i32)
}

/// Multi-indices of length `n` summing to `k`, with multinomial weights.
fn compositions(n: usize, k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n - 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for m in 0..=k {
            prefix.push(m);
            rec(n, k - m, prefix, out);
            prefix.pop();
        }
    }
    let mut all = Vec::new();
    rec(n, k, &mut Vec::new(), &mut all);
    let fact = |m: usize| (1..=m).product::<usize>() as f64;
    all.into_iter()
        .map(|m| {
            let w = fact(k) / m.iter().map(|&mi| fact(mi)).product::<f64>();
            (m, w)
        })
        .collect()
}

/// `d_tau^k d_z^j` of the standard kernel at `(z, tau)`.
fn standard_raw(k: usize, j: &[usize], z: &[f64], tau: f64) -> f64 {
    let n = z.len();
    let r2: f64 = z.iter().map(|v| v * v).sum();
    let arg = -r2 / (4.0 * tau);
    if arg < UNDERFLOW_ARG {
        return 0.0;
    }
    let base = (4.0 * PI * tau).powf(-(n as f64) / 2.0) * arg.exp();
    if k == 0 && j.iter().all(|&v| v == 0) {
        return base;
    }
    let mut acc = 0.0;
    for (m, w) in compositions(n, k) {
        let mut prod = w;
        for i in 0..n {
            prod *= heat_1d_factor(j[i] + 2 * m[i], z[i], tau);
        }
        acc += prod;
    }
    acc * base
}

fn aniso_raw(data: &AnisoData, a: &[f64], k: usize, j: &[usize], z: &[f64], tau: f64) -> f64 {
    let n = z.len();
    let mut q = 0.0;
    for i in 0..n {
        for l in 0..n {
            q += a[i * n + l] * z[i] * z[l];
        }
    }
    let arg = -q / (4.0 * tau);
    if arg < UNDERFLOW_ARG {
        return 0.0;
    }
    let base = data.sqrt_det * (2.0 * PI.sqrt()).powi(-(n as i32)) * tau.powf(-(n as f64) / 2.0)
        * arg.exp();
    if k == 0 && j.iter().all(|&v| v == 0) {
        return base;
    }
    data.tables[&(k, j.to_vec())].eval(z, tau) * base
}

fn raw(spec: &KernelSpec, k: usize, j: &[usize], z: &[f64], tau: f64) -> f64 {
    match (&spec.kind, &spec.aniso) {
        (KernelKind::Anisotropic { a }, Some(data)) => aniso_raw(data, a, k, j, z, tau),
        _ => standard_raw(k, j, z, tau),
    }
}

fn check_args(spec: &KernelSpec, x: &[f64], t: f64, y: &[f64], s: f64) -> Result<f64> {
    if x.len() != spec.n || y.len() != spec.n {
        return Err(invalid(format!(
            "kernel of dimension {} called with |x| = {}, |y| = {}",
            spec.n,
            x.len(),
            y.len()
        )));
    }
    let tau = s - t;
    if !(tau > 0.0) {
        return Err(Error::TimeOrdering { t, s });
    }
    Ok(tau)
}

fn check_order(spec: &KernelSpec, k: usize, j: &[usize]) -> Result<()> {
    if j.len() != spec.n {
        return Err(invalid(format!("multi-index of length {} for n = {}", j.len(), spec.n)));
    }
    let order = k + j.iter().sum::<usize>();
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::UnsupportedOrder(format!(
            "k + |j| = {order} exceeds {MAX_DERIVATIVE_ORDER}"
        )));
    }
    Ok(())
}

fn diff(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// Kernel value `K(x, t; y, s)`; requires `s > t`.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], t: f64, y: &[f64], s: f64) -> Result<f64> {
    let tau = check_args(spec, x, t, y, s)?;
    let zero = vec![0; spec.n];
    let direct = raw(spec, 0, &zero, &diff(x, y), tau);
    Ok(match spec.image(y) {
        Some(ys) => direct - raw(spec, 0, &zero, &diff(x, &ys), tau),
        None => direct,
    })
}

/// `D_s^k D_y^j K(x, t; y, s)` in closed form, `k + |j| <= 4`.
pub fn eval_kernel_derivative(
    spec: &KernelSpec,
    k: usize,
    j: &[usize],
    x: &[f64],
    t: f64,
    y: &[f64],
    s: f64,
) -> Result<f64> {
    let tau = check_args(spec, x, t, y, s)?;
    check_order(spec, k, j)?;
    let total: usize = j.iter().sum();
    let sign = |m: usize| if m % 2 == 0 { 1.0 } else { -1.0 };
    let direct = sign(total) * raw(spec, k, j, &diff(x, y), tau);
    Ok(match spec.image(y) {
        Some(ys) => {
            let image_sign = sign(total - j[spec.n - 1]);
            direct - image_sign * raw(spec, k, j, &diff(x, &ys), tau)
        }
        None => direct,
    })
}

/// `D_t^k D_x^j K(x, t; y, s)`, derivatives in the first pair of arguments.
pub fn eval_kernel_derivative_tx(
    spec: &KernelSpec,
    k: usize,
    j: &[usize],
    x: &[f64],
    t: f64,
    y: &[f64],
    s: f64,
) -> Result<f64> {
    let tau = check_args(spec, x, t, y, s)?;
    check_order(spec, k, j)?;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let direct = raw(spec, k, j, &diff(x, y), tau);
    Ok(sign
        * match spec.image(y) {
            Some(ys) => direct - raw(spec, k, j, &diff(x, &ys), tau),
            None => direct,
        })
}

/// A kernel evaluation point `(x, t; y, s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSample {
    pub x: Vec<f64>,
    pub t: f64,
    pub y: Vec<f64>,
    pub s: f64,
}

/// Sup of the normalized derivative over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundMeasurement {
    pub c: f64,
    pub argmax: Option<usize>,
    pub samples: usize,
}

/// `sup |D_s^k D_y^j K| tau^{(n+2k+|j|)/2} exp(|x - y|^2 / (5 tau))` over
/// `samples`.
pub fn verify_derivative_bound(
    spec: &KernelSpec,
    k: usize,
    j: &[usize],
    samples: &[KernelSample],
) -> Result<BoundMeasurement> {
    check_order(spec, k, j)?;
    let n = spec.n as f64;
    let power = (n + 2.0 * k as f64 + j.iter().sum::<usize>() as f64) / 2.0;
    let mut best = BoundMeasurement { c: 0.0, argmax: None, samples: samples.len() };
    for (idx, p) in samples.iter().enumerate() {
        let d = eval_kernel_derivative(spec, k, j, &p.x, p.t, &p.y, p.s)?;
        if d == 0.0 {
            continue;
        }
        let tau = p.s - p.t;
        let r2: f64 = p.x.iter().zip(&p.y).map(|(a, b)| (a - b) * (a - b)).sum();
        let v = d.abs() * tau.powf(power) * (r2 / (5.0 * tau)).exp();
        if v > best.c {
            best.c = v;
            best.argmax = Some(idx);
        }
    }
    Ok(best)
}

/// Every multi-index pair `(k, j)` with `k + |j| <= max_order`.
pub fn derivative_orders(n: usize, max_order: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for total in 0..=max_order {
        for k in 0..=total {
            for (j, _) in compositions(n, total - k) {
                out.push((k, j));
            }
        }
    }
    out
}

/// Structured samples for bound measurements: for each `tau` in
/// `{1e-3, 1e-2, 1e-1, 1}`, a tensor lattice of `density` points per axis in
/// the similarity variable `z / sqrt(tau)` over `[-24, 24]`, anchored at a
/// seeded random base point. Doubling `density` refines the lattice.
pub fn derivative_bound_samples(n: usize, density: usize, seed: u64) -> Vec<KernelSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_width = 24.0;
    let density = density.max(2);
    let mut out = Vec::new();
    for tau in [1e-3, 1e-2, 1e-1, 1.0] {
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t: f64 = rng.gen_range(0.0..1.0);
        let total = density.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    let idx = c % density;
                    c /= density;
                    let w = -half_width + 2.0 * half_width * idx as f64 / (density - 1) as f64;
                    y[i] + w * f64::sqrt(tau)
                })
                .collect();
            out.push(KernelSample { x, t, y: y.clone(), s: t + tau });
        }
    }
    out
}

/// Uniform random samples with `x, y` in `[-spread, spread]^n` and
/// `0 < s - t <= 1`.
pub fn random_samples(n: usize, count: usize, seed: u64, spread: f64) -> Vec<KernelSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = (0..n).map(|_| rng.gen_range(-spread..spread)).collect();
            let y = (0..n).map(|_| rng.gen_range(-spread..spread)).collect();
            let t = rng.gen_range(0.0..1.0);
            let tau = rng.gen_range(0.05..1.0);
            KernelSample { x, t, y, s: t + tau }
        })
        .collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (mrp, mrq) = (m[r * n + p], m[r * n + q]);
                    m[r * n + p] = c * mrp - s * mrq;
                    m[r * n + q] = s * mrp + c * mrq;
                }
                for r in 0..n {
                    let (mpr, mqr) = (m[p * n + r], m[q * n + r]);
                    m[p * n + r] = c * mpr - s * mqr;
                    m[q * n + r] = s * mpr + c * mqr;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub(crate) fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv: Vec<f64> = (0..n * n).map(|i| if i / n == i % n { 1.0 } else { 0.0 }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[piv * n + col].abs() < 1e-300 {
            return None;
        }
        for c in 0..n {
            m.swap(col * n + c, piv * n + c);
            inv.swap(col * n + c, piv * n + c);
        }
        let d = m[col * n + col];
        for c in 0..n {
            m[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * n + col];
                for c in 0..n {
                    m[r * n + c] -= f * m[col * n + c];
                    inv[r * n + c] -= f * inv[col * n + c];
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_centre() {
        let g = KernelSpec::standard(1).unwrap();
        let v = eval_kernel(&g, &[0.3], 0.0, &[0.3], 1.0).unwrap();
        assert!((v - 0.5 / PI.sqrt()).abs() < 1e-15);
        assert!(matches!(eval_kernel(&g, &[0.0], 1.0, &[0.0], 1.0), Err(Error::TimeOrdering { .. })));
    }

    #[test]
    fn unit_mass() {
        let g = KernelSpec::standard(1).unwrap();
        let h = 1e-3;
        let mass: f64 = (-20000..=20000)
            .map(|i| eval_kernel(&g, &[i as f64 * h], 0.0, &[0.0], 0.5).unwrap() * h)
            .sum();
        assert!((mass - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 0.7), 1.0);
        assert_eq!(hermite(3, 1.0), 8.0 - 12.0);
        assert!((hermite(4, 0.5) - (16.0 * 0.0625 - 48.0 * 0.25 + 12.0)).abs() < 1e-12);
    }

    #[test]
    fn odd_derivative_vanishes_on_diagonal() {
        let g = KernelSpec::standard(1).unwrap();
        assert_eq!(eval_kernel_derivative(&g, 0, &[1], &[0.2], 0.0, &[0.2], 0.5).unwrap(), 0.0);
    }

    #[test]
    fn order_five_is_rejected() {
        let g = KernelSpec::standard(2).unwrap();
        let e = eval_kernel_derivative(&g, 2, &[2, 1], &[0.0, 0.0], 0.0, &[0.0, 0.0], 1.0);
        assert!(matches!(e, Err(Error::UnsupportedOrder(_))));
    }

    #[test]
    fn anisotropic_identity_matches_standard_derivatives() {
        let a = KernelSpec::anisotropic(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1.0, 1.0).unwrap();
        let g = KernelSpec::standard(2).unwrap();
        for (k, j) in derivative_orders(2, 4) {
            let x = [0.3, -0.2];
            let y = [0.1, 0.25];
            let u = eval_kernel_derivative(&a, k, &j, &x, 0.1, &y, 0.6).unwrap();
            let v = eval_kernel_derivative(&g, k, &j, &x, 0.1, &y, 0.6).unwrap();
            assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()), "k={k} j={j:?}: {u} vs {v}");
        }
    }

    #[test]
    fn eigen_and_inverse() {
        let a = [2.0, 1.0, 1.0, 2.0];
        let mut e = sym_eigenvalues(&a, 2);
        e.sort_by(f64::total_cmp);
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12);
        let inv = invert(&a, 2).unwrap();
        assert!((inv[0] - 2.0 / 3.0).abs() < 1e-14 && (inv[1] + 1.0 / 3.0).abs() < 1e-14);
        assert!(KernelSpec::anisotropic(vec![vec![2.0, 1.0], vec![1.0, 2.0]], 1.5, 3.0).is_err());
    }

    #[test]
    fn orders_enumeration() {
        assert_eq!(derivative_orders(1, 4).len(), 15);
        assert_eq!(derivative_orders(2, 4).len(), 35);
    }
}
