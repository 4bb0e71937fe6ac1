use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exponents::VariableExponent;
use crate::geometry::{GridDomain, SpaceTimePoint};
use crate::kernels::sym_eigenvalues;
use crate::norms::{finite_differences, norm_0_alpha, DerivativeBundle, FieldFn, GridFunction};

/// Coefficient closures of `L = a^{ij} D_ij + b^i D_i + c`.
#[derive(Clone)]
pub struct Coefficients {
    /// Row-major `n x n`.
    pub a: Vec<FieldFn>,
    pub b: Vec<FieldFn>,
    pub c: FieldFn,
}

impl std::fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Coefficients {{ n: {} }}", self.b.len())
    }
}

fn constant_fn(v: f64) -> FieldFn {
    Arc::new(move |_: &[f64], _: f64| v)
}

impl Coefficients {
    /// The Laplacian.
    pub fn laplacian(n: usize) -> Self {
        Self::constant(&identity(n), &vec![0.0; n], 0.0)
    }

    pub fn constant(a: &[f64], b: &[f64], c: f64) -> Self {
        Coefficients {
            a: a.iter().map(|&v| constant_fn(v)).collect(),
            b: b.iter().map(|&v| constant_fn(v)).collect(),
            c: constant_fn(c),
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Value of every coefficient at `(x, t)`: `(a, b, c)`.
    pub fn eval(&self, x: &[f64], t: f64) -> (Vec<f64>, Vec<f64>, f64) {
        (
            self.a.iter().map(|g| g(x, t)).collect(),
            self.b.iter().map(|g| g(x, t)).collect(),
            (self.c)(x, t),
        )
    }
}

pub(crate) fn identity(n: usize) -> Vec<f64> {
    (0..n * n).map(|i| if i / n == i % n { 1.0 } else { 0.0 }).collect()
}

/// `u_t - (a^{ij} D_ij u + b^i D_i u + c u) = f` in the cylinder, `u = phi`
/// on the parabolic boundary. `phi` is a field on the whole grid; only its
/// parabolic-boundary values are data.
#[derive(Debug, Clone)]
pub struct ParabolicProblem {
    /// Row-major `n x n`.
    pub a: Vec<GridFunction>,
    pub b: Vec<GridFunction>,
    pub c: GridFunction,
    pub f: GridFunction,
    pub phi: GridFunction,
    pub lambda: f64,
    pub big_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientBounds {
    /// Largest `|.|_{0, alpha}` norm over all coefficients.
    pub max_norm: f64,
    pub within: bool,
}

impl ParabolicProblem {
    pub fn new(
        a: Vec<GridFunction>,
        b: Vec<GridFunction>,
        c: GridFunction,
        f: GridFunction,
        phi: GridFunction,
        lambda: f64,
        big_lambda: f64,
    ) -> Result<Self> {
        let dom = f.domain_arc().clone();
        let n = dom.dim();
        if a.len() != n * n || b.len() != n {
            return Err(invalid(format!(
                "expected {} diffusion and {n} drift coefficients, got {} and {}",
                n * n,
                a.len(),
                b.len()
            )));
        }
        if !(lambda > 0.0) || !(big_lambda >= lambda) {
            return Err(invalid(format!("need 0 < lambda <= Lambda, got {lambda}, {big_lambda}")));
        }
        for g in a.iter().chain(&b).chain([&c, &phi]) {
            if g.domain() != &*dom {
                return Err(invalid("coefficients, data and right-hand side must share one grid"));
            }
        }
        let p = ParabolicProblem { a, b, c, f, phi, lambda, big_lambda };
        p.check_ellipticity()?;
        Ok(p)
    }

    /// Samples the closures on `dom`.
    pub fn from_coefficients(
        dom: Arc<GridDomain>,
        coeffs: &Coefficients,
        f: FieldFn,
        phi: FieldFn,
        lambda: f64,
        big_lambda: f64,
    ) -> Result<Self> {
        if coeffs.dim() != dom.dim() || coeffs.a.len() != dom.dim() * dom.dim() {
            return Err(invalid("coefficient dimension does not match the grid"));
        }
        let sample = |g: &FieldFn| GridFunction::from_closure(dom.clone(), g.clone());
        Self::new(
            coeffs.a.iter().map(sample).collect(),
            coeffs.b.iter().map(sample).collect(),
            sample(&coeffs.c),
            sample(&f),
            sample(&phi),
            lambda,
            big_lambda,
        )
    }

    /// Heat equation `u_t - Δu = f`.
    pub fn heat(f: GridFunction, phi: GridFunction) -> Result<Self> {
        let dom = f.domain_arc().clone();
        let n = dom.dim();
        let a = identity(n).into_iter().map(|v| GridFunction::constant(dom.clone(), v)).collect();
        let b = (0..n).map(|_| GridFunction::zeros(dom.clone())).collect();
        Self::new(a, b, GridFunction::zeros(dom), f, phi, 1.0, 1.0)
    }

    pub fn domain(&self) -> &GridDomain {
        self.f.domain()
    }

    pub fn dim(&self) -> usize {
        self.domain().dim()
    }

    /// Symmetric part of `a` at node `id`.
    pub fn a_at(&self, id: usize) -> Vec<f64> {
        let n = self.dim();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = 0.5 * (self.a[i * n + j].value(id) + self.a[j * n + i].value(id));
            }
        }
        m
    }

    pub fn b_at(&self, id: usize) -> Vec<f64> {
        self.b.iter().map(|g| g.value(id)).collect()
    }

    fn check_ellipticity(&self) -> Result<()> {
        let n = self.dim();
        for &id in self.domain().in_domain_nodes() {
            let m = self.a_at(id);
            let low = sym_eigenvalues(&m, n).into_iter().fold(f64::INFINITY, f64::min);
            if !(low >= self.lambda * (1.0 - 1e-12)) {
                return Err(Error::Precondition(format!(
                    "ellipticity fails at node {id}: smallest eigenvalue {low} < lambda = {}",
                    self.lambda
                )));
            }
        }
        Ok(())
    }

    /// `c >= 0` everywhere, required for the existence mode.
    pub fn require_nonnegative_c(&self) -> Result<()> {
        match self.domain().in_domain_nodes().iter().find(|&&id| self.c.value(id) < 0.0) {
            Some(id) => Err(Error::Precondition(format!("c < 0 at node {id}"))),
            None => Ok(()),
        }
    }

    /// Largest `|.|_{0, alpha}` norm over the coefficients against `Lambda`.
    pub fn check_coefficient_bounds(&self, alpha: &VariableExponent) -> Result<CoefficientBounds> {
        let mut max_norm = 0.0f64;
        for g in self.a.iter().chain(&self.b).chain([&self.c]) {
            max_norm = max_norm.max(norm_0_alpha(g, alpha)?.value);
        }
        Ok(CoefficientBounds { max_norm, within: max_norm <= self.big_lambda })
    }

    /// Copy with a new right-hand side and boundary data.
    pub fn with_data(&self, f: GridFunction, phi: GridFunction) -> Result<Self> {
        if f.domain() != self.domain() || phi.domain() != self.domain() {
            return Err(invalid("data must live on the problem grid"));
        }
        Ok(ParabolicProblem { f, phi, ..self.clone() })
    }
}

/// `a^{ij}(P)` frozen, with the remaining terms moved to the right-hand side:
/// `u_t - a^{ij}(P) D_ij u = f + (a^{ij} - a^{ij}(P)) D_ij u + b^i D_i u + c u`.
pub fn frozen_coefficient_view(p: &ParabolicProblem, at: &SpaceTimePoint, u: &GridFunction) -> Result<ParabolicProblem> {
    let dom = p.f.domain_arc().clone();
    if u.domain() != &*dom {
        return Err(invalid("u must live on the problem grid"));
    }
    let node = dom
        .nearest_node(&at.x, at.t)
        .ok_or_else(|| Error::OutOfDomain(format!("point {:?} at t = {}", at.x, at.t)))?;
    let d = finite_differences(u)?;
    frozen_from_bundle(p, node, u, &d)
}

pub(crate) fn frozen_from_bundle(p: &ParabolicProblem, node: usize, u: &GridFunction, d: &DerivativeBundle) -> Result<ParabolicProblem> {
    let dom = p.f.domain_arc().clone();
    let n = dom.dim();
    let frozen: Vec<f64> = p.a.iter().map(|g| g.value(node)).collect();
    let mut rhs = vec![f64::NAN; dom.node_count()];
    for &id in dom.in_domain_nodes() {
        let mut v = p.f.value(id);
        if d.valid[id] {
            let hess = d.hess_at(id);
            let grad = d.grad_at(id);
            for k in 0..n * n {
                v += (p.a[k].value(id) - frozen[k]) * hess[k];
            }
            for i in 0..n {
                v += p.b[i].value(id) * grad[i];
            }
        }
        v += p.c.value(id) * u.value(id);
        rhs[id] = v;
    }
    let f = GridFunction::from_values(dom.clone(), rhs)?;
    Ok(ParabolicProblem {
        a: frozen.iter().map(|&v| GridFunction::constant(dom.clone(), v)).collect(),
        b: (0..n).map(|_| GridFunction::zeros(dom.clone())).collect(),
        c: GridFunction::zeros(dom.clone()),
        f,
        phi: p.phi.clone(),
        lambda: p.lambda,
        big_lambda: p.big_lambda,
    })
}
