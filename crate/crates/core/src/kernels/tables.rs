//! Polynomial factor tables for derivatives of Gaussian kernels.
//!
//! Every derivative `d_tau^k d_z^j K` of `K = c tau^{-n/2} exp(-z'Az / 4tau)`
//! has the form `P(z, 1/tau) K`; a table stores the terms of `P`.

use std::collections::BTreeMap;

/// `coef * z^powers * tau^{-inv_tau}`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Term {
    pub coef: f64,
    pub powers: Vec<u8>,
    pub inv_tau: u8,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Poly {
    pub terms: Vec<Term>,
}

impl Poly {
    fn one(n: usize) -> Poly {
        Poly { terms: vec![Term { coef: 1.0, powers: vec![0; n], inv_tau: 0 }] }
    }

    fn from_map(map: BTreeMap<(Vec<u8>, u8), f64>) -> Poly {
        Poly {
            terms: map
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|((powers, inv_tau), coef)| Term { coef, powers, inv_tau })
                .collect(),
        }
    }

    fn add(map: &mut BTreeMap<(Vec<u8>, u8), f64>, powers: Vec<u8>, inv_tau: u8, c: f64) {
        *map.entry((powers, inv_tau)).or_insert(0.0) += c;
    }

    /// `d/dz_i (P K) / K`.
    fn dz(&self, a: &[f64], n: usize, i: usize) -> Poly {
        let mut map = BTreeMap::new();
        for t in &self.terms {
            if t.powers[i] > 0 {
                let mut p = t.powers.clone();
                p[i] -= 1;
                Self::add(&mut map, p, t.inv_tau, t.coef * t.powers[i] as f64);
            }
            for l in 0..n {
                let c = -0.5 * a[i * n + l];
                if c != 0.0 {
                    let mut p = t.powers.clone();
                    p[l] += 1;
                    Self::add(&mut map, p, t.inv_tau + 1, t.coef * c);
                }
            }
        }
        Self::from_map(map)
    }

    /// `d/dtau (P K) / K`.
    fn dtau(&self, a: &[f64], n: usize) -> Poly {
        let mut map = BTreeMap::new();
        for t in &self.terms {
            if t.inv_tau > 0 {
                Self::add(&mut map, t.powers.clone(), t.inv_tau + 1, -(t.inv_tau as f64) * t.coef);
            }
            Self::add(&mut map, t.powers.clone(), t.inv_tau + 1, -0.5 * n as f64 * t.coef);
            for i in 0..n {
                for l in 0..n {
                    let c = 0.25 * a[i * n + l];
                    if c != 0.0 {
                        let mut p = t.powers.clone();
                        p[i] += 1;
                        p[l] += 1;
                        Self::add(&mut map, p, t.inv_tau + 2, t.coef * c);
                    }
                }
            }
        }
        Self::from_map(map)
    }

    pub fn eval(&self, z: &[f64], tau: f64) -> f64 {
        let inv = 1.0 / tau;
        self.terms
            .iter()
            .map(|t| {
                let mut v = t.coef * inv.powi(t.inv_tau as i32);
                for (zi, &p) in z.iter().zip(&t.powers) {
                    v *= zi.powi(p as i32);
                }
                v
            })
            .sum()
    }
}

/// All `(k, j)` tables with `k + |j| <= max_order`, keyed by `(k, j)`.
pub(crate) fn build_tables(a: &[f64], n: usize, max_order: usize) -> BTreeMap<(usize, Vec<usize>), Poly> {
    let mut out = BTreeMap::new();
    let mut stack = vec![(0usize, vec![0usize; n], Poly::one(n))];
    while let Some((k, j, poly)) = stack.pop() {
        let order = k + j.iter().sum::<usize>();
        if out.contains_key(&(k, j.clone())) {
            continue;
        }
        if order < max_order {
            stack.push((k + 1, j.clone(), poly.dtau(a, n)));
            for i in 0..n {
                let mut jj = j.clone();
                jj[i] += 1;
                stack.push((k, jj, poly.dz(a, n, i)));
            }
        }
        out.insert((k, j), poly);
    }
    out
}
