//! Sparse rows, banded LU and Jacobi-preconditioned BiCGSTAB.

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Csr {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).find(|e| e.0 == i).map_or(0.0, |e| e.1))
            .collect()
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.n {
            for (c, _) in self.row(i) {
                if c < i {
                    kl = kl.max(i - c);
                } else {
                    ku = ku.max(c - i);
                }
            }
        }
        (kl, ku)
    }

    /// `|b - Ax|_inf / max(|b|_inf, tiny)`.
    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.n];
        self.matvec(x, &mut ax);
        let r = ax.iter().zip(b).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let s = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        r / s.max(f64::MIN_POSITIVE)
    }
}

/// LU factors of a banded matrix without pivoting, stored row-wise with
/// columns `i - kl ..= i + ku`.
#[derive(Debug, Clone)]
pub(crate) struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandedLu {
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + (j + self.kl - i)]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let w = self.width();
        &mut self.data[i * w + (j + self.kl - i)]
    }

    /// Factorizes `a`; on a vanishing pivot returns its row.
    pub fn factor(a: &Csr) -> Result<BandedLu, usize> {
        let (kl, ku) = a.bandwidths();
        let mut lu = BandedLu { n: a.n, kl, ku, data: vec![0.0; a.n * (kl + ku + 1)] };
        for i in 0..a.n {
            for (c, v) in a.row(i) {
                *lu.at_mut(i, c) = v;
            }
        }
        for k in 0..lu.n {
            let pivot = lu.at(k, k);
            if !(pivot.abs() > 1e-300) || !pivot.is_finite() {
                return Err(k);
            }
            let last_row = (k + kl).min(lu.n - 1);
            let last_col = (k + ku).min(lu.n - 1);
            for i in k + 1..=last_row {
                let m = lu.at(i, k) / pivot;
                if m == 0.0 {
                    continue;
                }
                *lu.at_mut(i, k) = m;
                for j in k + 1..=last_col {
                    let ukj = lu.at(k, j);
                    *lu.at_mut(i, j) -= m * ukj;
                }
            }
        }
        Ok(lu)
    }

    pub fn solve(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let first = i.saturating_sub(self.kl);
            let s: f64 = (first..i).map(|j| self.at(i, j) * b[j]).sum();
            b[i] -= s;
        }
        for i in (0..self.n).rev() {
            let last = (i + self.ku).min(self.n - 1);
            let s: f64 = (i + 1..=last).map(|j| self.at(i, j) * b[j]).sum();
            b[i] = (b[i] - s) / self.at(i, i);
        }
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct IterStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// BiCGSTAB with Jacobi preconditioning; `x` holds the initial guess.
pub(crate) fn bicgstab(a: &Csr, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<IterStats, IterStats> {
    let n = a.n;
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|d| if *d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r0 = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut res = norm(&r) / bnorm;
    if res <= tol {
        return Ok(IterStats { iterations: 0, relative_residual: res });
    }
    for it in 1..=max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 {
            return Err(IterStats { iterations: it, relative_residual: res });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = inv_diag[i] * p[i];
        }
        a.matvec(&y, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm <= tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            return Ok(IterStats { iterations: it, relative_residual: norm(&s) / bnorm });
        }
        for i in 0..n {
            z[i] = inv_diag[i] * s[i];
        }
        a.matvec(&z, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        res = norm(&r) / bnorm;
        if !res.is_finite() || omega == 0.0 {
            return Err(IterStats { iterations: it, relative_residual: res });
        }
        if res <= tol {
            return Ok(IterStats { iterations: it, relative_residual: res });
        }
    }
    Err(IterStats { iterations: max_iter, relative_residual: res })
}
