use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::geometry::GridDomain;

/// Analytic closure `(x, t) -> value`.
pub type FieldFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// A scalar field sampled on the nodes of a [`GridDomain`].
///
/// Values are stored for every node of the bounding grid; nodes outside the
/// domain hold `NaN` and are never read by the norm routines.
#[derive(Clone)]
pub struct GridFunction {
    dom: Arc<GridDomain>,
    values: Vec<f64>,
    analytic: Option<FieldFn>,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFunction")
            .field("nodes", &self.values.len())
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

impl GridFunction {
    /// Samples `f` at every in-domain node and keeps it as the analytic
    /// reference.
    pub fn from_fn<F>(dom: Arc<GridDomain>, f: F) -> Self
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_closure(dom, Arc::new(f))
    }

    pub fn from_closure(dom: Arc<GridDomain>, f: FieldFn) -> Self {
        let mut values = vec![f64::NAN; dom.node_count()];
        for &id in dom.in_domain_nodes() {
            values[id] = f(dom.node_x(id), dom.node_t(id));
        }
        Self { dom, values, analytic: Some(f) }
    }

    /// Wraps raw node values. Entries outside the domain are overwritten with
    /// `NaN`; in-domain entries must be finite.
    pub fn from_values(dom: Arc<GridDomain>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != dom.node_count() {
            return Err(invalid(format!(
                "expected {} node values, got {}",
                dom.node_count(),
                values.len()
            )));
        }
        let mut inside = vec![false; values.len()];
        for &id in dom.in_domain_nodes() {
            inside[id] = true;
            if !values[id].is_finite() {
                return Err(invalid(format!("non-finite value at node {id}")));
            }
        }
        for (v, keep) in values.iter_mut().zip(inside) {
            if !keep {
                *v = f64::NAN;
            }
        }
        Ok(Self { dom, values, analytic: None })
    }

    pub fn zeros(dom: Arc<GridDomain>) -> Self {
        Self::constant(dom, 0.0)
    }

    pub fn constant(dom: Arc<GridDomain>, c: f64) -> Self {
        Self::from_fn(dom, move |_, _| c)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.dom
    }
    pub fn domain_arc(&self) -> &Arc<GridDomain> {
        &self.dom
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn value(&self, id: usize) -> f64 {
        self.values[id]
    }
    pub fn analytic(&self) -> Option<&FieldFn> {
        self.analytic.as_ref()
    }

    /// Drops the analytic reference, keeping only the samples.
    pub fn without_analytic(mut self) -> Self {
        self.analytic = None;
        self
    }

    pub fn sup_abs(&self) -> f64 {
        self.dom
            .in_domain_nodes()
            .iter()
            .map(|&id| self.values[id].abs())
            .fold(0.0, f64::max)
    }

    /// `a * self + b * other` on a shared domain.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        if self.dom != other.dom && *self.dom != *other.dom {
            return Err(invalid("grid functions live on different domains"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let analytic = match (&self.analytic, &other.analytic) {
            (Some(f), Some(g)) => {
                let (f, g) = (f.clone(), g.clone());
                Some(Arc::new(move |x: &[f64], t: f64| a * f(x, t) + b * g(x, t)) as FieldFn)
            }
            _ => None,
        };
        Ok(GridFunction { dom: self.dom.clone(), values, analytic })
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        let analytic = self.analytic.clone().map(|f| {
            Arc::new(move |x: &[f64], t: f64| c * f(x, t)) as FieldFn
        });
        GridFunction {
            dom: self.dom.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            analytic,
        }
    }

    /// Multilinear interpolation from the surrounding cell, using only
    /// in-domain corners (weights renormalized).
    pub fn interpolate(&self, x: &[f64], t: f64) -> Result<f64> {
        let dom = &*self.dom;
        let n = dom.dim();
        if x.len() != n {
            return Err(invalid("dimension mismatch"));
        }
        let mut base = Vec::with_capacity(n);
        let mut frac = Vec::with_capacity(n);
        for a in 0..n {
            let (i, w) = cell(x[a] - dom.origin()[a], dom.spacing()[a], dom.nx() - 1)
                .ok_or_else(|| Error::OutOfDomain(format!("x = {x:?}")))?;
            base.push(i);
            frac.push(w);
        }
        let (level, wt) = cell(t - dom.t_start(), dom.tau(), dom.nt())
            .ok_or_else(|| Error::OutOfDomain(format!("t = {t}")))?;
        let mut acc = 0.0;
        let mut total = 0.0;
        for corner in 0..(1usize << (n + 1)) {
            let mut weight = 1.0;
            let mut spatial = 0;
            for a in 0..n {
                let up = (corner >> a) & 1 == 1;
                weight *= if up { frac[a] } else { 1.0 - frac[a] };
                spatial += (base[a] + up as usize) * dom.stride(a);
            }
            let up_t = (corner >> n) & 1 == 1;
            weight *= if up_t { wt } else { 1.0 - wt };
            if weight == 0.0 || !dom.spatial_in_domain(spatial) {
                continue;
            }
            let id = dom.node_id(level + up_t as usize, spatial);
            acc += weight * self.values[id];
            total += weight;
        }
        if total == 0.0 {
            return Err(Error::OutOfDomain(format!("no in-domain corner near x = {x:?}, t = {t}")));
        }
        Ok(acc / total)
    }
}

/// Cell index and fractional offset of `offset / spacing` on `0..=cells`.
fn cell(offset: f64, spacing: f64, cells: usize) -> Option<(usize, f64)> {
    let p = offset / spacing;
    let slack = 1e-9;
    if p < -slack || p > cells as f64 + slack {
        return None;
    }
    let p = p.clamp(0.0, cells as f64);
    let i = (p.floor() as usize).min(cells.saturating_sub(1));
    Some((i, p - i as f64))
}
