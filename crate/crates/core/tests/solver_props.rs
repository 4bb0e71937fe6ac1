mod common;

use std::sync::Arc;

use common::*;
use holdervar::norms::finite_differences;
use holdervar::solver::*;
use holdervar::{GridFunction, SpaceTimePoint, VariableExponent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(seed: u64, n: usize, nx: usize, nt: usize) -> ParabolicProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = box_domain(n, 0.0, 1.0, 0.25, nx, nt);
    let a: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { rng.gen_range(0.5..2.0) } else { 0.0 }).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c = rng.gen_range(0.0..1.0);
    let coeffs = Coefficients::constant(&a, &b, c);
    ParabolicProblem::from_coefficients(dom, &coeffs, random_field(seed, n), random_field(seed + 1, n), 0.5, 2.0)
        .unwrap()
}

#[test]
fn solve_is_bitwise_deterministic() {
    let p = random_problem(7, 2, 13, 10);
    let a = fd_solve(&p).unwrap();
    let b = fd_solve(&p).unwrap();
    let bits = |u: &GridFunction| u.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.u), bits(&b.u));
}

#[test]
fn solution_is_linear_in_data() {
    let p = random_problem(3, 1, 33, 32);
    let dom = p.f.domain_arc().clone();
    let f2 = GridFunction::from_closure(dom.clone(), random_field(11, 1));
    let phi2 = GridFunction::from_closure(dom.clone(), random_field(12, 1));
    let (a, b) = (1.7, -0.6);
    let u1 = fd_solve(&p).unwrap().u;
    let u2 = fd_solve(&p.with_data(f2.clone(), phi2.clone()).unwrap()).unwrap().u;
    let mixed = p.with_data(p.f.combine(a, &f2, b).unwrap(), p.phi.combine(a, &phi2, b).unwrap()).unwrap();
    let u = fd_solve(&mixed).unwrap().u;
    let scale = u1.sup_abs().max(u2.sup_abs());
    for &id in dom.in_domain_nodes() {
        assert!((u.value(id) - (a * u1.value(id) + b * u2.value(id))).abs() <= 1e-8 * scale);
    }
}

#[test]
fn maximum_principle_on_random_problems() {
    for seed in 0..5 {
        let p = random_problem(100 + seed, 1 + (seed as usize % 2), 17, 16);
        p.require_nonnegative_c().unwrap();
        let u = fd_solve(&p).unwrap().u;
        let bound = max_principle_bound(&p);
        assert!(u.sup_abs() <= bound * (1.0 + 1e-12), "seed {seed}: {} > {bound}", u.sup_abs());
    }
}

#[test]
fn green_identity_is_exact_on_simple_pairs() {
    let dom = box_domain(1, 0.0, 1.0, 0.5, 9, 8);
    let c = GridFunction::constant(dom.clone(), 2.5);
    assert_eq!(green_identity_check(&c, &c).unwrap(), 0.0);
    let u = GridFunction::from_fn(dom.clone(), |x, _| x[0] * x[0]);
    let v = GridFunction::from_fn(dom.clone(), |_, t| t);
    assert!(green_identity_check(&u, &v).unwrap() < 1e-10);
}

#[test]
fn green_identity_defect_converges_at_second_order() {
    let defect = |nx: usize| {
        let dom = box_domain(1, 0.0, 1.0, 0.5, nx, nx - 1);
        let u = GridFunction::from_fn(dom.clone(), |x, t| (2.0 * x[0]).sin() * (-t).exp());
        let v = GridFunction::from_fn(dom.clone(), |x, t| (x[0] + t).cos());
        green_identity_check(&u, &v).unwrap()
    };
    let order = (defect(33) / defect(65)).log2();
    assert!(order >= 1.9, "observed order {order}");
}

#[test]
fn frozen_view_with_constant_coefficients() {
    let dom = box_domain(1, 0.0, 1.0, 0.5, 17, 16);
    let coeffs = Coefficients::constant(&[1.5], &[0.7], 0.3);
    let f = random_field(1, 1);
    let p = ParabolicProblem::from_coefficients(dom.clone(), &coeffs, f, random_field(2, 1), 1.0, 2.0).unwrap();
    let u = GridFunction::from_closure(dom.clone(), random_field(3, 1));
    let view = frozen_coefficient_view(&p, &SpaceTimePoint::new(vec![0.5], 0.25), &u).unwrap();
    let d = finite_differences(&u).unwrap();
    for &id in dom.in_domain_nodes() {
        let mut expect = p.f.value(id) + 0.3 * u.value(id);
        if d.valid[id] {
            expect += 0.7 * d.grad_at(id)[0];
        }
        assert!((view.f.value(id) - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
    }

    let heat = ParabolicProblem::heat(p.f.clone(), p.phi.clone()).unwrap();
    let view = frozen_coefficient_view(&heat, &SpaceTimePoint::new(vec![0.25], 0.5), &u).unwrap();
    for &id in dom.in_domain_nodes() {
        assert_eq!(view.f.value(id), heat.f.value(id));
    }
}

#[test]
fn frozen_view_with_variable_coefficients() {
    let m = &manufactured_corpus(2)[4];
    let dom = m.domain(9, 8, 0.25).unwrap();
    let p = m.problem(dom.clone()).unwrap();
    let u = GridFunction::from_closure(dom.clone(), random_field(5, 2));
    let at = SpaceTimePoint::new(vec![0.5, 0.75], 0.125);
    let node = dom.nearest_node(&at.x, at.t).unwrap();
    let view = frozen_coefficient_view(&p, &at, &u).unwrap();
    let d = finite_differences(&u).unwrap();
    for &id in dom.in_domain_nodes() {
        let mut expect = p.f.value(id) + p.c.value(id) * u.value(id);
        if d.valid[id] {
            for i in 0..2 {
                expect += p.b[i].value(id) * d.grad_at(id)[i];
                for j in 0..2 {
                    let k = 2 * i + j;
                    expect += (p.a[k].value(id) - p.a[k].value(node)) * d.hess_at(id)[k];
                }
            }
        }
        assert!((view.f.value(id) - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
        for k in 0..4 {
            assert_eq!(view.a[k].value(id), p.a[k].value(node));
        }
    }
}

#[test]
fn semicube_ratio_is_refinement_stable() {
    let m = Manufactured::sine_heat(1);
    let alpha = VariableExponent::constant(0.5).unwrap();
    let ratios: Vec<f64> = [33usize, 65, 129]
        .iter()
        .map(|&nx| {
            let dom: Arc<_> = m.domain(nx, nx - 1, 0.5).unwrap();
            let p = m.problem(dom.clone()).unwrap();
            let u = fd_solve(&p).unwrap().u;
            let node = dom.nearest_node(&[0.5], 0.4).unwrap();
            semicube_ratio(&u, &p.f, &alpha, node, 0.25).unwrap()
        })
        .collect();
    assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
    assert!(max_drift(&ratios) < 0.05, "{ratios:?}");
}
