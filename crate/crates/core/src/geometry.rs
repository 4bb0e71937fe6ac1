//! Discretized space-time cylinders, the parabolic metric and distances to
//! the parabolic boundary.
//!
//! Time is stored in parabolic units: a time gap `dt` is comparable to a
//! spatial gap `dx` when `dt ~ dx^2`. No other unit conversions happen
//! anywhere in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Spatial cross-section of the cylinder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    /// Axis-aligned box `[lower_i, upper_i]`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Euclidean ball, discretized by a stair-step mask on its bounding cube.
    Ball { center: Vec<f64>, radius: f64 },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Box { lower, .. } => lower.len(),
            Shape::Ball { center, .. } => center.len(),
        }
    }

    /// Exact distance from `x` to the boundary of the shape: max-norm distance
    /// for boxes, `radius - |x - center|_2` for balls. Clamped at zero.
    pub fn dist_to_boundary(&self, x: &[f64]) -> f64 {
        match self {
            Shape::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .zip(x)
                .map(|((lo, hi), xi)| (xi - lo).min(hi - xi))
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
            Shape::Ball { center, radius } => (radius - euclid(x, center)).max(0.0),
        }
    }

    /// Max-norm diameter of the closed shape.
    pub fn diameter(&self) -> f64 {
        match self {
            Shape::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(lo, hi)| hi - lo)
                .fold(0.0, f64::max),
            Shape::Ball { radius, .. } => 2.0 * radius,
        }
    }
}

/// A point `(x, t)` of space-time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: Vec<f64>,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        Self { x, t }
    }
}

/// Classification of a node of the bounding grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    /// Not part of the closed cylinder (only occurs for balls).
    Outside,
    /// Spatially interior and strictly after the initial time.
    Interior,
    /// Spatial boundary node, at any time level.
    Lateral,
    /// Spatially interior node on the initial time level.
    Initial,
}

impl NodeKind {
    pub fn in_domain(self) -> bool {
        self != NodeKind::Outside
    }

    pub fn on_parabolic_boundary(self) -> bool {
        matches!(self, NodeKind::Lateral | NodeKind::Initial)
    }
}

/// A portion of the parabolic boundary, used to select Γ in the boundary
/// weighted norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryPiece {
    /// The initial slice `Ω × {t_start}`.
    Initial,
    /// The whole lateral boundary `∂Ω × [t_start, t_end]`.
    Lateral,
    /// One face `{x_axis = lower/upper}` of a box.
    Face { axis: usize, upper: bool },
    /// The top slice `Ω × {t_end}`. Not part of the parabolic boundary; only
    /// present so that configs naming it can be rejected.
    Top,
}

/// Distances of a point to the parabolic boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDistances {
    /// `min(t - t_start, dist(x, ∂Ω))`.
    pub d_p: f64,
    /// Parabolic distance to the parabolic boundary with Γ removed.
    pub d_bar: f64,
}

/// Regular tensor grid over a space-time cylinder `Ω × [t_start, t_end]`.
///
/// Nodes are numbered `level * n_space + spatial`, with spatial axis 0
/// varying fastest. There are `nx` nodes per spatial axis and `nt + 1` time
/// levels, so `tau = (t_end - t_start) / nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    shape: Shape,
    t_start: f64,
    t_end: f64,
    nx: usize,
    nt: usize,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    tau: f64,
    n_space: usize,
    strides: Vec<usize>,
    space_coords: Vec<f64>,
    spatial_boundary: Vec<Option<bool>>,
    in_domain: Vec<usize>,
}

impl GridDomain {
    /// Cylinder `Ω × [0, t_final]`.
    pub fn new(shape: Shape, t_final: f64, nx: usize, nt: usize) -> Result<Self> {
        Self::with_time_window(shape, 0.0, t_final, nx, nt)
    }

    pub fn with_time_window(
        shape: Shape,
        t_start: f64,
        t_end: f64,
        nx: usize,
        nt: usize,
    ) -> Result<Self> {
        let n = shape.dim();
        if n == 0 || n > 3 {
            return Err(invalid(format!("spatial dimension {n} not in 1..=3")));
        }
        if nx < 2 || nt < 1 {
            return Err(invalid(format!("need nx >= 2 and nt >= 1, got nx={nx}, nt={nt}")));
        }
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(invalid(format!("empty time window [{t_start}, {t_end}]")));
        }
        let (origin, spacing) = match &shape {
            Shape::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return Err(invalid("box corners have different dimensions"));
                }
                if lower.iter().zip(upper).any(|(lo, hi)| !(hi > lo)) {
                    return Err(invalid("box upper corner must exceed lower corner on every axis"));
                }
                let spacing = lower
                    .iter()
                    .zip(upper)
                    .map(|(lo, hi)| (hi - lo) / (nx - 1) as f64)
                    .collect();
                (lower.clone(), spacing)
            }
            Shape::Ball { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(invalid("ball radius must be positive"));
                }
                let origin = center.iter().map(|c| c - radius).collect();
                (origin, vec![2.0 * radius / (nx - 1) as f64; n])
            }
        };
        let n_space = nx.pow(n as u32);
        let strides: Vec<usize> = (0..n).map(|a| nx.pow(a as u32)).collect();
        let mut space_coords = Vec::with_capacity(n_space * n);
        let mut spatial_boundary = Vec::with_capacity(n_space);
        for s in 0..n_space {
            let mut on_face = false;
            for a in 0..n {
                let i = (s / strides[a]) % nx;
                space_coords.push(origin[a] + i as f64 * spacing[a]);
                on_face |= i == 0 || i == nx - 1;
            }
            let x = &space_coords[s * n..(s + 1) * n];
            let class = match &shape {
                Shape::Box { .. } => Some(on_face),
                Shape::Ball { center, radius } => {
                    let h = spacing[0];
                    let r = euclid(x, center);
                    if r < radius - 0.5 * h {
                        Some(false)
                    } else if r < radius + 0.5 * h {
                        Some(true)
                    } else {
                        None
                    }
                }
            };
            spatial_boundary.push(class);
        }
        let levels = nt + 1;
        let mut in_domain = Vec::new();
        for level in 0..levels {
            for (s, class) in spatial_boundary.iter().enumerate() {
                if class.is_some() {
                    in_domain.push(level * n_space + s);
                }
            }
        }
        let tau = (t_end - t_start) / nt as f64;
        Ok(Self {
            shape,
            t_start,
            t_end,
            nx,
            nt,
            origin,
            spacing,
            tau,
            n_space,
            strides,
            space_coords,
            spatial_boundary,
            in_domain,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }
    pub fn dim(&self) -> usize {
        self.shape.dim()
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn levels(&self) -> usize {
        self.nt + 1
    }
    pub fn t_start(&self) -> f64 {
        self.t_start
    }
    pub fn t_end(&self) -> f64 {
        self.t_end
    }
    /// Largest spatial spacing.
    pub fn h(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }
    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn n_space(&self) -> usize {
        self.n_space
    }
    pub fn node_count(&self) -> usize {
        self.n_space * self.levels()
    }
    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn node_id(&self, level: usize, spatial: usize) -> usize {
        level * self.n_space + spatial
    }
    pub fn node_level(&self, id: usize) -> usize {
        id / self.n_space
    }
    pub fn node_spatial(&self, id: usize) -> usize {
        id % self.n_space
    }
    pub fn level_time(&self, level: usize) -> f64 {
        if level == self.nt {
            self.t_end
        } else {
            self.t_start + level as f64 * self.tau
        }
    }
    pub fn node_t(&self, id: usize) -> f64 {
        self.level_time(self.node_level(id))
    }
    pub fn spatial_x(&self, spatial: usize) -> &[f64] {
        let n = self.dim();
        &self.space_coords[spatial * n..(spatial + 1) * n]
    }
    pub fn node_x(&self, id: usize) -> &[f64] {
        self.spatial_x(self.node_spatial(id))
    }
    pub fn node_point(&self, id: usize) -> SpaceTimePoint {
        SpaceTimePoint::new(self.node_x(id).to_vec(), self.node_t(id))
    }

    /// Grid index of `spatial` along `axis`.
    pub fn axis_index(&self, spatial: usize, axis: usize) -> usize {
        (spatial / self.strides[axis]) % self.nx
    }

    /// Spatial index displaced by `offset` along `axis`, if it stays on the
    /// bounding grid.
    pub fn shift_spatial(&self, spatial: usize, axis: usize, offset: isize) -> Option<usize> {
        let i = self.axis_index(spatial, axis) as isize + offset;
        if i < 0 || i >= self.nx as isize {
            None
        } else {
            Some((spatial as isize + offset * self.strides[axis] as isize) as usize)
        }
    }

    pub fn spatial_in_domain(&self, spatial: usize) -> bool {
        self.spatial_boundary[spatial].is_some()
    }
    pub fn spatial_on_boundary(&self, spatial: usize) -> bool {
        self.spatial_boundary[spatial] == Some(true)
    }

    pub fn kind(&self, id: usize) -> NodeKind {
        match self.spatial_boundary[self.node_spatial(id)] {
            None => NodeKind::Outside,
            Some(true) => NodeKind::Lateral,
            Some(false) if self.node_level(id) == 0 => NodeKind::Initial,
            Some(false) => NodeKind::Interior,
        }
    }

    /// Ids of all nodes of the closed cylinder, in increasing order.
    pub fn in_domain_nodes(&self) -> &[usize] {
        &self.in_domain
    }

    pub fn interior_mask(&self) -> Vec<bool> {
        (0..self.node_count()).map(|id| self.kind(id) == NodeKind::Interior).collect()
    }

    pub fn parabolic_boundary_mask(&self) -> Vec<bool> {
        (0..self.node_count()).map(|id| self.kind(id).on_parabolic_boundary()).collect()
    }

    /// Parabolic diameter of the closed cylinder.
    pub fn diameter(&self) -> f64 {
        self.shape.diameter().max((self.t_end - self.t_start).sqrt())
    }

    /// Whether `(x, t)` lies in the closed cylinder, allowing the stair-step
    /// slack of one spacing around balls.
    pub fn contains(&self, x: &[f64], t: f64) -> bool {
        let tol = 1e-12 * (1.0 + self.t_end.abs().max(self.t_start.abs()));
        if t < self.t_start - tol || t > self.t_end + tol || x.len() != self.dim() {
            return false;
        }
        match &self.shape {
            Shape::Box { lower, upper } => x.iter().zip(lower).zip(upper).all(|((xi, lo), hi)| {
                let eps = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
                *xi >= lo - eps && *xi <= hi + eps
            }),
            Shape::Ball { center, radius } => euclid(x, center) <= radius + self.spacing[0],
        }
    }

    /// Index of the grid node closest to `(x, t)` on the bounding grid.
    pub fn nearest_node(&self, x: &[f64], t: f64) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut spatial = 0;
        for (a, xi) in x.iter().enumerate() {
            let r = ((xi - self.origin[a]) / self.spacing[a]).round();
            if r < 0.0 || r > (self.nx - 1) as f64 {
                return None;
            }
            spatial += r as usize * self.strides[a];
        }
        let l = ((t - self.t_start) / self.tau).round();
        if l < 0.0 || l > self.nt as f64 {
            return None;
        }
        Some(self.node_id(l as usize, spatial))
    }

    /// Distances of every node to the parabolic boundary (`NaN` entries for
    /// nodes outside the domain).
    pub fn node_boundary_distances(&self, gamma: &[BoundaryPiece]) -> Result<Vec<BoundaryDistances>> {
        let nan = BoundaryDistances { d_p: f64::NAN, d_bar: f64::NAN };
        let mut out = vec![nan; self.node_count()];
        for &id in &self.in_domain {
            out[id] = boundary_distances(self, &self.node_point(id), gamma)?;
        }
        Ok(out)
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Parabolic metric on raw coordinates; shared by every pair scan so that
/// all code paths produce bit-identical distances.
#[inline]
pub(crate) fn pdist(x1: &[f64], t1: f64, x2: &[f64], t2: f64) -> f64 {
    let mut m = 0.0f64;
    for (a, b) in x1.iter().zip(x2) {
        m = m.max((a - b).abs());
    }
    m.max((t1 - t2).abs().sqrt())
}

/// `d(P, Q) = max(|x_P - x_Q|_∞, sqrt|t_P - t_Q|)`.
pub fn parabolic_distance(p: &SpaceTimePoint, q: &SpaceTimePoint) -> Result<f64> {
    if p.x.len() != q.x.len() {
        return Err(invalid(format!(
            "dimension mismatch: {} vs {}",
            p.x.len(),
            q.x.len()
        )));
    }
    Ok(pdist(&p.x, p.t, &q.x, q.t))
}

/// Euclidean distance in `R^{n+1}`, treating time as one more coordinate.
pub fn spacetime_euclidean_distance(p: &SpaceTimePoint, q: &SpaceTimePoint) -> Result<f64> {
    if p.x.len() != q.x.len() {
        return Err(invalid("dimension mismatch"));
    }
    let dt = p.t - q.t;
    Ok((p.x.iter().zip(&q.x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + dt * dt).sqrt())
}

/// Membership in the backward semicube `N(top, delta)`.
pub fn semicube_contains(top: &SpaceTimePoint, delta: f64, q: &SpaceTimePoint) -> Result<bool> {
    if !(delta > 0.0) {
        return Err(invalid(format!("semicube radius must be positive, got {delta}")));
    }
    Ok(parabolic_distance(top, q)? <= delta && q.t <= top.t)
}

/// `d_P` and `d̄_P` for a point of the closed cylinder. `gamma` lists the
/// pieces of the parabolic boundary excluded from `d̄_P`; when nothing is
/// left the distance is capped at the parabolic diameter.
pub fn boundary_distances(
    dom: &GridDomain,
    p: &SpaceTimePoint,
    gamma: &[BoundaryPiece],
) -> Result<BoundaryDistances> {
    let n = dom.dim();
    if p.x.len() != n {
        return Err(invalid("dimension mismatch"));
    }
    for piece in gamma {
        match piece {
            BoundaryPiece::Top => {
                return Err(invalid("the top slice is not part of the parabolic boundary"))
            }
            BoundaryPiece::Face { axis, .. } => {
                if !matches!(dom.shape, Shape::Box { .. }) {
                    return Err(invalid("faces can only be selected on box domains"));
                }
                if *axis >= n {
                    return Err(invalid(format!("face axis {axis} out of range for n = {n}")));
                }
            }
            _ => {}
        }
    }
    if !dom.contains(&p.x, p.t) {
        return Err(Error::OutOfDomain(format!("{:?}", p)));
    }
    let elapsed = (p.t - dom.t_start).max(0.0);
    let d_p = elapsed.min(dom.shape.dist_to_boundary(&p.x));

    let mut d_bar = f64::INFINITY;
    if !gamma.contains(&BoundaryPiece::Initial) {
        d_bar = d_bar.min(elapsed.sqrt());
    }
    if !gamma.contains(&BoundaryPiece::Lateral) {
        match &dom.shape {
            Shape::Box { lower, upper } => {
                for axis in 0..n {
                    for (upper_side, bound) in [(false, lower[axis]), (true, upper[axis])] {
                        let piece = BoundaryPiece::Face { axis, upper: upper_side };
                        if !gamma.contains(&piece) {
                            d_bar = d_bar.min((p.x[axis] - bound).abs());
                        }
                    }
                }
            }
            Shape::Ball { .. } => d_bar = d_bar.min(dom.shape.dist_to_boundary(&p.x)),
        }
    }
    if d_bar.is_infinite() {
        d_bar = dom.diameter();
    }
    Ok(BoundaryDistances { d_p, d_bar })
}
