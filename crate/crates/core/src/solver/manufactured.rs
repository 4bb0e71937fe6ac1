//! Manufactured solutions `u*(x, t) = g(t) prod_i sin(pi x_i)(1 + m x_i)` on
//! the unit box. They vanish on the lateral boundary, so the data `phi` is
//! the time-constant extension of `u*(., 0)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::geometry::{GridDomain, Shape};
use crate::norms::{FieldFn, GridFunction};

use super::problem::{identity, Coefficients, ParabolicProblem};

/// Value and derivatives of an exact solution at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub ut: f64,
    pub grad: Vec<f64>,
    /// Row-major `n x n`.
    pub hess: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeFactor {
    Decay,
    Linear,
    Cosine,
    Growth,
}

impl TimeFactor {
    fn eval(self, t: f64) -> (f64, f64) {
        match self {
            TimeFactor::Decay => ((-t).exp(), -(-t).exp()),
            TimeFactor::Linear => (1.0 + t, 1.0),
            TimeFactor::Cosine => (t.cos(), -t.sin()),
            TimeFactor::Growth => ((0.5 * t).exp(), 0.5 * (0.5 * t).exp()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Manufactured {
    pub name: String,
    pub coeffs: Coefficients,
    pub time: TimeFactor,
    /// Slope `m` of the spatial factor `sin(pi x)(1 + m x)`.
    pub tilt: f64,
    pub lambda: f64,
    pub big_lambda: f64,
}

fn factor(m: f64, x: f64) -> [f64; 3] {
    let (s, c) = (PI * x).sin_cos();
    [
        s * (1.0 + m * x),
        PI * c * (1.0 + m * x) + m * s,
        -PI * PI * s * (1.0 + m * x) + 2.0 * m * PI * c,
    ]
}

impl Manufactured {
    /// `e^{-t} prod sin(pi x_i)` for the heat equation.
    pub fn sine_heat(n: usize) -> Self {
        Manufactured {
            name: "sine-heat".into(),
            coeffs: Coefficients::laplacian(n),
            time: TimeFactor::Decay,
            tilt: 0.0,
            lambda: 1.0,
            big_lambda: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    pub fn jet(&self, x: &[f64], t: f64) -> Jet {
        let n = x.len();
        let (g, gt) = self.time.eval(t);
        let fs: Vec<[f64; 3]> = x.iter().map(|&xi| factor(self.tilt, xi)).collect();
        let prod = |skip: &[usize], order: &dyn Fn(usize) -> usize| -> f64 {
            (0..n).map(|k| if skip.contains(&k) { fs[k][order(k)] } else { fs[k][0] }).product()
        };
        let s = prod(&[], &|_| 0);
        let grad = (0..n).map(|i| g * prod(&[i], &|_| 1)).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = if i == j { g * prod(&[i], &|_| 2) } else { g * prod(&[i, j], &|_| 1) };
            }
        }
        Jet { u: g * s, ut: gt * s, grad, hess }
    }

    /// `f = u*_t - L u*`.
    pub fn rhs(&self) -> FieldFn {
        let me = self.clone();
        Arc::new(move |x: &[f64], t: f64| {
            let j = me.jet(x, t);
            let (a, b, c) = me.coeffs.eval(x, t);
            let n = x.len();
            let mut lu = c * j.u;
            for k in 0..n * n {
                lu += a[k] * j.hess[k];
            }
            for i in 0..n {
                lu += b[i] * j.grad[i];
            }
            j.ut - lu
        })
    }

    pub fn exact(&self) -> FieldFn {
        let me = self.clone();
        Arc::new(move |x: &[f64], t: f64| me.jet(x, t).u)
    }

    pub fn phi(&self) -> FieldFn {
        let me = self.clone();
        Arc::new(move |x: &[f64], _t: f64| me.jet(x, 0.0).u)
    }

    /// Unit box `(0, 1)^n x (0, t_final)`.
    pub fn domain(&self, nx: usize, nt: usize, t_final: f64) -> Result<Arc<GridDomain>> {
        let n = self.dim();
        Ok(Arc::new(GridDomain::new(Shape::Box { lower: vec![0.0; n], upper: vec![1.0; n] }, t_final, nx, nt)?))
    }

    pub fn problem(&self, dom: Arc<GridDomain>) -> Result<ParabolicProblem> {
        if dom.dim() != self.dim() {
            return Err(invalid("grid dimension does not match the manufactured solution"));
        }
        ParabolicProblem::from_coefficients(dom, &self.coeffs, self.rhs(), self.phi(), self.lambda, self.big_lambda)
    }

    pub fn exact_field(&self, dom: Arc<GridDomain>) -> GridFunction {
        GridFunction::from_closure(dom, self.exact())
    }
}

fn field(f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> FieldFn {
    Arc::new(f)
}

/// Five problems on the unit box: the heat equation, variable and
/// time-dependent diffusion, drift with reaction, and (for `n >= 2`) a
/// cross-diffusion term.
pub fn manufactured_corpus(n: usize) -> Vec<Manufactured> {
    let zeros = || (0..n).map(|_| field(|_, _| 0.0)).collect::<Vec<_>>();
    let diag = |f: FieldFn| -> Vec<FieldFn> {
        identity(n)
            .into_iter()
            .map(|v| if v == 1.0 { f.clone() } else { field(|_, _| 0.0) })
            .collect()
    };
    let mut out = vec![Manufactured::sine_heat(n)];
    out.push(Manufactured {
        name: "variable-diffusion".into(),
        coeffs: Coefficients {
            a: diag(field(|x, _| 1.0 + 0.5 * x[0] * (1.0 - x[0]))),
            b: zeros(),
            c: field(|_, _| 0.0),
        },
        time: TimeFactor::Linear,
        tilt: 0.5,
        lambda: 1.0,
        big_lambda: 4.0,
    });
    out.push(Manufactured {
        name: "time-dependent-diffusion".into(),
        coeffs: Coefficients { a: diag(field(|_, t| 1.0 + 0.5 * t)), b: zeros(), c: field(|_, _| 0.0) },
        time: TimeFactor::Cosine,
        tilt: 0.0,
        lambda: 1.0,
        big_lambda: 4.0,
    });
    out.push(Manufactured {
        name: "drift-reaction".into(),
        coeffs: Coefficients {
            a: diag(field(|_, _| 1.0)),
            b: (0..n).map(|i| field(move |x, _| if i == 0 { 1.0 + 0.5 * x[0] } else { -0.5 })).collect(),
            c: field(|x, _| 0.5 * (1.0 + x[0])),
        },
        time: TimeFactor::Growth,
        tilt: -0.3,
        lambda: 1.0,
        big_lambda: 4.0,
    });
    let mut cross = diag(field(|x, _| 1.0 + 0.25 * (PI * x[0]).sin()));
    if n >= 2 {
        cross[1] = field(|x, _| 0.2 * x[1]);
        cross[n] = field(|x, _| 0.2 * x[1]);
    }
    out.push(Manufactured {
        name: "cross-diffusion".into(),
        coeffs: Coefficients { a: cross, b: zeros(), c: field(|_, _| 0.0) },
        time: TimeFactor::Decay,
        tilt: 0.25,
        lambda: 0.75,
        big_lambda: 4.0,
    });
    out
}
