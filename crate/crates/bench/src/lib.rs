//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use holdervar::{GridDomain, GridFunction, Shape};

/// A smooth field on `[-1, 1]^dim x [0, 1]` with `nx` points per axis.
pub fn smooth_field(dim: usize, nx: usize, nt: usize) -> GridFunction {
    let shape = Shape::Box { lower: vec![-1.0; dim], upper: vec![1.0; dim] };
    let dom = Arc::new(GridDomain::new(shape, 1.0, nx, nt).expect("valid grid"));
    GridFunction::from_fn(dom, |x: &[f64], t: f64| (x.iter().sum::<f64>() + t).sin())
}
