//! One driver per command. Each reads its keys from the config, runs the
//! refinement levels on the worker pool and returns tables in level order.

use std::sync::Arc;

use holdervar::config::{
    coefficients_from_config, domain_at, example_params, exponent_from_config, field_from_config, field_spec,
    parse_list, Config,
};
use holdervar::experiments::{drift, run_example, run_interp_check, test_field_corpus};
use holdervar::kernels::{
    derivative_bound_samples, derivative_orders, eval_kernel_derivative, eval_kernel_derivative_tx,
    random_samples, verify_derivative_bound, KernelSpec,
};
use holdervar::norms::{norm_0_alpha, norm_2_1_alpha, seminorm_var, sup_norm, FieldFn, Witness};
use holdervar::potentials::{duhamel_residual, heat_potential};
use holdervar::regularize::{check_mollify_bound, epsilon_prime, extend_time, reflect_extension_ball};
use holdervar::solver::{
    fd_solve, manufactured_corpus, max_principle_bound, schauder_constant, Coefficients, Manufactured,
    ParabolicProblem,
};
use holdervar::geometry::NodeKind;
use holdervar::{Error, GridDomain, GridFunction, Shape};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::report::{num, opt_num, Output, Table};
use crate::CliError;

type Res<T> = std::result::Result<T, Error>;

pub struct Ctx {
    pub cfg: Config,
    pub levels: Option<Vec<usize>>,
    pub seed: u64,
}

impl Ctx {
    fn levels(&self, default: &[usize]) -> Res<Vec<usize>> {
        let levels = match &self.levels {
            Some(l) => {
                self.cfg.raw("levels");
                l.clone()
            }
            None => match self.cfg.list("levels")? {
                Some(l) => l,
                None => match self.cfg.get("nx")? {
                    Some(nx) => vec![nx],
                    None => default.to_vec(),
                },
            },
        };
        holdervar::config::check_levels(&levels)?;
        Ok(levels)
    }
}

/// Runs `f` for every level on the worker pool; results stay in level order.
fn per_level<T: Send>(levels: &[usize], f: impl Fn(usize) -> Res<T> + Sync) -> Res<Vec<T>> {
    levels.par_iter().map(|&nx| f(nx)).collect()
}

fn witness_json(nx: usize, quantity: &str, w: &Witness) -> Value {
    json!({ "nx": nx, "quantity": quantity, "witness": w })
}

/// Largest relative change between consecutive entries.
fn max_drift(values: &[f64]) -> f64 {
    values.windows(2).map(|w| drift(w[0], w[1])).fold(0.0, f64::max)
}

fn corpus_from_config(cfg: &Config) -> Res<Vec<(String, FieldFn)>> {
    if let Some((line, spec)) = cfg.raw("field") {
        return Ok(vec![(spec.to_string(), field_spec(cfg, spec, line)?)]);
    }
    let all = test_field_corpus();
    match cfg.raw("fields") {
        None => Ok(all),
        Some((_, "all")) => Ok(all),
        Some((line, names)) => {
            let names: Vec<String> =
                parse_list(names).map_err(|d| Error::Config { line, detail: d })?;
            names
                .into_iter()
                .map(|n| {
                    all.iter()
                        .find(|(m, _)| *m == n)
                        .cloned()
                        .ok_or_else(|| Error::Config { line, detail: format!("unknown corpus field {n:?}") })
                })
                .collect()
        }
    }
}

fn sample(dom: &Arc<GridDomain>, f: &FieldFn) -> GridFunction {
    GridFunction::from_closure(dom.clone(), f.clone())
}

pub fn norms(ctx: &Ctx) -> Res<Output> {
    let cfg = &ctx.cfg;
    let alpha = exponent_from_config(cfg, "alpha", "constant:0.5")?;
    let field = field_from_config(cfg, "field", "corpus:sine")?;
    let second_order: bool = cfg.get_or("second_order", true)?;
    let levels = ctx.levels(&[9, 17])?;
    let per = per_level(&levels, |nx| {
        let dom = Arc::new(domain_at(cfg, nx)?);
        let u = sample(&dom, &field);
        let mut reports = vec![("seminorm", seminorm_var(&u, &alpha)?), ("norm_0_alpha", norm_0_alpha(&u, &alpha)?)];
        if second_order {
            reports.push(("norm_2_1_alpha", norm_2_1_alpha(&u, &alpha)?));
        }
        Ok((dom, sup_norm(&u), reports))
    })?;
    let mut out = Output::default();
    let mut table = Table::new("norms", &["check", "nx", "nt", "nodes", "value", "witness_p", "witness_q", "quotient"]);
    let mut terms = Table::new("norm_terms", &["check", "nx", "term", "value"]);
    let mut series: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
    for (dom, sup, reports) in &per {
        let base = vec![dom.nx().to_string(), dom.nt().to_string(), dom.in_domain_nodes().len().to_string()];
        let mut row = vec!["sup".to_string()];
        row.extend(base.clone());
        row.extend([num(*sup), String::new(), String::new(), String::new()]);
        table.push(row);
        series.entry("sup".into()).or_default().push(*sup);
        for (label, r) in reports {
            let mut row = vec![label.to_string()];
            row.extend(base.clone());
            row.push(num(r.value));
            match &r.witness {
                Some(w) => row.extend([w.p.to_string(), w.q.to_string(), num(w.quotient)]),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
            table.push(row);
            for (k, v) in &r.breakdown {
                terms.push(vec![label.to_string(), dom.nx().to_string(), k.clone(), num(*v)]);
            }
            if let Some(w) = &r.witness {
                out.witnesses.push(witness_json(dom.nx(), label, w));
            }
            series.entry(label.to_string()).or_default().push(r.value);
        }
    }
    let drifts: std::collections::BTreeMap<_, _> = series.iter().map(|(k, v)| (k.clone(), max_drift(v))).collect();
    out.result("levels", &levels);
    out.result("max_drift", drifts);
    out.tables = vec![table, terms];
    Ok(out)
}

fn kernel_from_config(cfg: &Config, n: usize) -> Res<KernelSpec> {
    let (line, spec) = cfg.raw("kernel").unwrap_or((0, "standard"));
    let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
    let nums = || parse_list::<f64>(args).map_err(|d| Error::Config { line, detail: d });
    match kind.trim() {
        "standard" => KernelSpec::standard(n),
        "reflected" => KernelSpec::reflected(n, nums()?.first().copied().unwrap_or(0.0)),
        "anisotropic" => {
            let a = nums()?;
            if a.len() != n * n {
                return Err(Error::Config { line, detail: format!("anisotropic needs {} entries", n * n) });
            }
            KernelSpec::anisotropic_unchecked(a.chunks(n).map(|r| r.to_vec()).collect())
        }
        other => Err(Error::Config { line, detail: format!("unknown kernel {other:?}") }),
    }
}

/// `(K_s - sum inv_ij D_{y_i y_j} K, K_t + sum inv_ij D_{x_i x_j} K)`,
/// each relative to the size of its terms.
fn identity_residuals(spec: &KernelSpec, s: &holdervar::kernels::KernelSample) -> Res<(f64, f64)> {
    let n = spec.n;
    let inv: Vec<f64> = match spec.anisotropic_inverse() {
        Some(m) => m.to_vec(),
        None => (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect(),
    };
    let mut out = [0.0; 2];
    for (slot, tx) in [false, true].into_iter().enumerate() {
        let d = |k: usize, j: &[usize]| {
            if tx {
                eval_kernel_derivative_tx(spec, k, j, &s.x, s.t, &s.y, s.s)
            } else {
                eval_kernel_derivative(spec, k, j, &s.x, s.t, &s.y, s.s)
            }
        };
        let time = d(1, &vec![0; n])?;
        let mut space = 0.0;
        let mut scale = time.abs();
        for i in 0..n {
            for k in 0..n {
                if inv[i * n + k] == 0.0 {
                    continue;
                }
                let mut j = vec![0; n];
                j[i] += 1;
                j[k] += 1;
                let term = inv[i * n + k] * d(0, &j)?;
                space += term;
                scale += term.abs();
            }
        }
        let res = if tx { time + space } else { time - space };
        out[slot] = if scale > 0.0 { res.abs() / scale } else { 0.0 };
    }
    Ok((out[0], out[1]))
}

pub fn kernel_check(ctx: &Ctx) -> Res<Output> {
    let cfg = &ctx.cfg;
    let n: usize = cfg.get_or("dim", 1)?;
    let spec = kernel_from_config(cfg, n)?;
    let max_order: usize = cfg.get_or("max_order", 4)?;
    let count: usize = cfg.get_or("samples", 100)?;
    let spread: f64 = cfg.get_or("spread", 1.0)?;
    let densities = ctx.levels(&[8, 16])?;
    let orders = derivative_orders(n, max_order);
    let per = per_level(&densities, |density| {
        let samples = derivative_bound_samples(n, density, ctx.seed);
        orders
            .iter()
            .map(|(k, j)| Ok((samples.len(), verify_derivative_bound(&spec, *k, j, &samples)?)))
            .collect::<Res<Vec<_>>>()
    })?;
    let mut out = Output::default();
    let mut bounds = Table::new("bounds", &["k", "j", "density", "samples", "c", "argmax"]);
    let mut growth = Vec::new();
    for (oi, (k, j)) in orders.iter().enumerate() {
        let jl = j.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(":");
        let cs: Vec<f64> = per.iter().map(|p| p[oi].1.c).collect();
        for (li, &density) in densities.iter().enumerate() {
            let (count, m) = &per[li][oi];
            bounds.push(vec![
                k.to_string(),
                jl.clone(),
                density.to_string(),
                count.to_string(),
                num(m.c),
                m.argmax.map(|a| a.to_string()).unwrap_or_default(),
            ]);
        }
        let g = cs.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] - 1.0 } else { 0.0 }).fold(0.0, f64::max);
        growth.push(json!({ "k": k, "j": j, "max_growth": g }));
    }
    let mut ident = Table::new("identities", &["sample", "forward_residual", "backward_residual"]);
    let mut worst = (0.0f64, 0.0f64);
    for (i, s) in random_samples(n, count, ctx.seed, spread).iter().enumerate() {
        let (f, b) = identity_residuals(&spec, s)?;
        worst = (worst.0.max(f), worst.1.max(b));
        ident.push(vec![i.to_string(), num(f), num(b)]);
    }
    out.result("kernel", &spec.kind);
    out.result("densities", &densities);
    out.result("growth", growth);
    out.result("max_forward_residual", worst.0);
    out.result("max_backward_residual", worst.1);
    out.tables = vec![bounds, ident];
    Ok(out)
}

/// Up to `max` interior nodes on the middle time level whose stencil
/// neighbours are interior too, evenly spread.
fn duhamel_centers(dom: &GridDomain, max: usize) -> Vec<usize> {
    let level = (dom.nt() / 2).max(2);
    if level + 1 >= dom.levels() {
        return Vec::new();
    }
    let ok: Vec<usize> = (0..dom.n_space())
        .filter(|&s| {
            dom.kind(dom.node_id(level, s)) == NodeKind::Interior
                && (0..dom.dim()).all(|a| {
                    [-1isize, 1].iter().all(|&o| {
                        dom.shift_spatial(s, a, o).is_some_and(|q| dom.kind(dom.node_id(level, q)) == NodeKind::Interior)
                    })
                })
        })
        .map(|s| dom.node_id(level, s))
        .collect();
    if ok.len() <= max {
        return ok;
    }
    (0..max).map(|i| ok[i * (ok.len() - 1) / (max - 1).max(1)]).collect()
}

pub fn potential(ctx: &Ctx) -> Res<Output> {
    let cfg = &ctx.cfg;
    let n: usize = cfg.get_or("dim", 1)?;
    let spec = kernel_from_config(cfg, n)?;
    let field = field_from_config(cfg, "field", "corpus:gaussian")?;
    let max_centers: usize = cfg.get_or("max_centers", 16)?;
    let levels = ctx.levels(&[17, 33])?;
    let per = per_level(&levels, |nx| {
        let dom = Arc::new(domain_at(cfg, nx)?);
        let f = sample(&dom, &field);
        let top: Vec<usize> =
            dom.in_domain_nodes().iter().copied().filter(|&id| dom.node_level(id) == dom.nt()).collect();
        let v = heat_potential(&f, &spec, &top)?;
        let centers = duhamel_centers(&dom, max_centers);
        let res = if centers.is_empty() { None } else { Some(duhamel_residual(&f, &spec, &centers)?) };
        Ok((dom, v, centers.len(), res))
    })?;
    let mut out = Output::default();
    let mut summary = Table::new("duhamel", &["nx", "nt", "centers", "sup_residual"]);
    let mut sups = Vec::new();
    for (dom, v, centers, res) in &per {
        let mut header = vec!["node".to_string()];
        header.extend((0..n).map(|a| format!("x{a}")));
        header.extend(["t".to_string(), "v".to_string()]);
        let mut t = Table { name: format!("potential_nx{}", dom.nx()), header, rows: Vec::new() };
        for (i, &id) in v.eval_nodes.iter().enumerate() {
            let mut row = vec![id.to_string()];
            row.extend(dom.node_x(id).iter().map(|&x| num(x)));
            row.extend([num(dom.node_t(id)), num(v.v[i])]);
            t.push(row);
        }
        out.tables.push(t);
        let sup = res.as_ref().map(|r| r.sup);
        sups.extend(sup);
        summary.push(vec![dom.nx().to_string(), dom.nt().to_string(), centers.to_string(), opt_num(sup)]);
    }
    let ratios: Vec<f64> = sups.windows(2).map(|w| w[0] / w[1]).collect();
    out.result("levels", &levels);
    out.result("residual_ratios", ratios);
    out.result("quadrature", &per[0].1.meta);
    out.tables.insert(0, summary);
    Ok(out)
}

enum ProblemSpec {
    Manufactured(Manufactured),
    General { coeffs: Coefficients, f: FieldFn, phi: FieldFn, exact: Option<FieldFn>, lambda: f64, big_lambda: f64 },
}

impl ProblemSpec {
    fn from_config(cfg: &Config) -> Res<Self> {
        let n: usize = cfg.get_or("dim", 1)?;
        if let Some((line, name)) = cfg.raw("manufactured") {
            return manufactured_corpus(n)
                .into_iter()
                .find(|m| m.name == name)
                .map(ProblemSpec::Manufactured)
                .ok_or_else(|| Error::Config { line, detail: format!("unknown manufactured problem {name:?}") });
        }
        let exact = if cfg.has("exact") { Some(field_from_config(cfg, "exact", "zero")?) } else { None };
        Ok(ProblemSpec::General {
            coeffs: coefficients_from_config(cfg, n)?,
            f: field_from_config(cfg, "f", "zero")?,
            phi: field_from_config(cfg, "phi", "zero")?,
            exact,
            lambda: cfg.get_or("lambda", 1.0)?,
            big_lambda: cfg.get_or("big_lambda", 1.0)?,
        })
    }

    fn build(&self, cfg: &Config, nx: usize) -> Res<(ParabolicProblem, Option<GridFunction>)> {
        let dom = Arc::new(domain_at(cfg, nx)?);
        match self {
            ProblemSpec::Manufactured(m) => {
                let unit = m.domain(nx, dom.nt(), dom.t_end() - dom.t_start())?;
                Ok((m.problem(unit.clone())?, Some(m.exact_field(unit))))
            }
            ProblemSpec::General { coeffs, f, phi, exact, lambda, big_lambda } => {
                let p = ParabolicProblem::from_coefficients(dom.clone(), coeffs, f.clone(), phi.clone(), *lambda, *big_lambda)?;
                Ok((p, exact.as_ref().map(|e| sample(&dom, e))))
            }
        }
    }
}

pub fn solve(ctx: &Ctx) -> Res<Output> {
    let cfg = &ctx.cfg;
    let spec = ProblemSpec::from_config(cfg)?;
    let write_solution: bool = cfg.get_or("write_solution", true)?;
    let levels = ctx.levels(&[17, 33])?;
    let per = per_level(&levels, |nx| {
        let (p, exact) = spec.build(cfg, nx)?;
        let sol = fd_solve(&p)?;
        let err = exact.as_ref().map(|e| {
            p.domain().in_domain_nodes().iter().map(|&id| (sol.u.value(id) - e.value(id)).abs()).fold(0.0, f64::max)
        });
        let bound = max_principle_bound(&p);
        Ok((p, sol, exact, err, bound))
    })?;
    let mut out = Output::default();
    let mut table = Table::new(
        "solve",
        &[
            "nx", "nt", "h", "tau", "steps", "sup_u", "error", "residual", "max_linear_residual",
            "compatibility_defect", "max_principle_bound", "warnings",
        ],
    );
    let mut errs = Vec::new();
    let mut warnings = Vec::new();
    for (p, sol, exact, err, bound) in &per {
        let dom = p.domain();
        table.push(vec![
            dom.nx().to_string(),
            dom.nt().to_string(),
            num(dom.h()),
            num(dom.tau()),
            sol.steps.to_string(),
            num(sup_norm(&sol.u)),
            opt_num(*err),
            num(sol.residual),
            num(sol.max_linear_residual),
            num(sol.compatibility_defect),
            num(*bound),
            sol.warnings.len().to_string(),
        ]);
        if let Some(e) = err {
            errs.push((dom.h(), *e));
        }
        for w in &sol.warnings {
            warnings.push(json!({ "nx": dom.nx(), "warning": w }));
        }
        if write_solution {
            let mut header = vec!["node".to_string()];
            header.extend((0..dom.dim()).map(|a| format!("x{a}")));
            header.extend(["t".to_string(), "u".to_string()]);
            if exact.is_some() {
                header.push("exact".into());
            }
            let mut t = Table { name: format!("solution_nx{}", dom.nx()), header, rows: Vec::new() };
            for &id in dom.in_domain_nodes() {
                let mut row = vec![id.to_string()];
                row.extend(dom.node_x(id).iter().map(|&x| num(x)));
                row.extend([num(dom.node_t(id)), num(sol.u.value(id))]);
                if let Some(e) = exact {
                    row.push(num(e.value(id)));
                }
                t.push(row);
            }
            out.tables.push(t);
        }
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()).collect();
    out.result("levels", &levels);
    out.result("observed_orders", orders);
    out.result("warnings", warnings);
    out.tables.insert(0, table);
    Ok(out)
}

pub fn schauder(ctx: &Ctx) -> Res<Output> {
    let cfg = &ctx.cfg;
    let spec = ProblemSpec::from_config(cfg)?;
    let alpha = exponent_from_config(cfg, "alpha", "constant:0.5")?;
    let levels = ctx.levels(&[9, 17, 33])?;
    let per = per_level(&levels, |nx| {
        let (p, _) = spec.build(cfg, nx)?;
        let sol = fd_solve(&p)?;
        let rep = schauder_constant(&p, &sol, &alpha)?;
        Ok((p.domain().nx(), p.domain().nt(), rep))
    })?;
    let mut out = Output::default();
    let mut table =
        Table::new("schauder", &["check", "nx", "nt", "numerator", "denominator", "c_emp", "vacuous"]);
    let mut terms = Table::new("schauder_terms", &["check", "nx", "term", "value"]);
    let mut drifts = serde_json::Map::new();
    for label in ["global", "interior", "boundary"] {
        let mut cs = Vec::new();
        for (nx, nt, rep) in &per {
            let v = match label {
                "global" => &rep.global,
                "interior" => &rep.interior,
                _ => &rep.boundary,
            };
            table.push(vec![
                label.to_string(),
                nx.to_string(),
                nt.to_string(),
                num(v.numerator),
                num(v.denominator),
                opt_num(v.c_emp),
                v.vacuous.to_string(),
            ]);
            for (k, t) in &v.terms {
                terms.push(vec![label.to_string(), nx.to_string(), k.clone(), num(*t)]);
            }
            cs.extend(v.c_emp);
        }
        let pct: Vec<f64> = cs.windows(2).map(|w| 100.0 * drift(w[0], w[1])).collect();
        drifts.insert(label.to_string(), json!(pct));
    }
    out.result("levels", &levels);
    out.result("drift_percent", drifts);
    out.result("gamma", &per[0].2.gamma);
    out.tables = vec![table, terms];
    Ok(out)
}

pub fn mollify_check(ctx: &Ctx) -> Res<Output> {
    let cfg = &ctx.cfg;
    let alpha = exponent_from_config(cfg, "alpha", "example:0.5,0.4")?;
    let corpus = corpus_from_config(cfg)?;
    let fractions: Vec<f64> = cfg.list("delta_fractions")?.unwrap_or(vec![0.25, 0.5]);
    let eps_factor: f64 = cfg.get_or("eps_factor", 0.5)?;
    let sigma_max: f64 = cfg.get_or("sigma_max", 0.3)?;
    let levels = ctx.levels(&[33])?;
    let per = per_level(&levels, |nx| {
        let dom = Arc::new(domain_at(cfg, nx)?);
        let mut rows = Vec::new();
        for &fr in &fractions {
            let delta = fr * alpha.alpha_minus;
            let eps = eps_factor * epsilon_prime(&alpha, &dom, delta);
            let sigma = (2.0 * eps).min(sigma_max);
            for (name, field) in &corpus {
                let f = sample(&dom, field);
                let ext = match dom.shape() {
                    Shape::Ball { .. } => reflect_extension_ball(&f, &alpha, sigma)?,
                    Shape::Box { .. } => extend_time(&f, &alpha, sigma)?,
                };
                rows.push((name.clone(), delta, sigma, check_mollify_bound(&ext, &alpha, delta, eps)?));
            }
        }
        Ok((nx, rows))
    })?;
    let mut out = Output::default();
    let mut table = Table::new(
        "mollify",
        &["field", "nx", "delta", "eps", "eps_prime", "sigma", "lhs", "rhs", "pass", "within_hypotheses"],
    );
    let mut all_pass = true;
    for (nx, rows) in &per {
        for (name, delta, sigma, c) in rows {
            all_pass &= c.pass;
            table.push(vec![
                name.clone(),
                nx.to_string(),
                num(*delta),
                num(c.eps),
                num(c.eps_prime),
                num(*sigma),
                num(c.lhs),
                num(c.rhs),
                c.pass.to_string(),
                c.within_hypotheses.to_string(),
            ]);
        }
    }
    out.result("levels", &levels);
    out.result("all_pass", all_pass);
    out.tables = vec![table];
    Ok(out)
}

pub fn interp_check(ctx: &Ctx) -> Res<Output> {
    let cfg = &ctx.cfg;
    let alpha = exponent_from_config(cfg, "alpha", "constant:0.5")?;
    let beta = exponent_from_config(cfg, "beta", "example:0.5,0.4")?;
    let k: usize = cfg.get_or("k", 2)?;
    let j: usize = cfg.get_or("j", 1)?;
    let eps: Vec<f64> = cfg.list("eps")?.unwrap_or(vec![0.1, 0.01]);
    let corpus = corpus_from_config(cfg)?;
    let levels = ctx.levels(&[9, 17])?;
    let per = per_level(&levels, |nx| {
        let dom = Arc::new(domain_at(cfg, nx)?);
        let fields: Vec<GridFunction> = corpus.iter().map(|(_, f)| sample(&dom, f)).collect();
        Ok((nx, run_interp_check(&fields, &alpha, &beta, k, j, &eps)?))
    })?;
    let mut out = Output::default();
    let mut table = Table::new("interp", &["nx", "eps", "c_min", "worst_field"]);
    let mut terms = Table::new("interp_terms", &["nx", "field", "sup", "lower_seminorm", "upper_seminorm"]);
    for (nx, rep) in &per {
        for r in &rep.rows {
            table.push(vec![nx.to_string(), num(r.eps), num(r.c_min), corpus[r.worst].0.clone()]);
        }
        for (i, (u0, lo, hi)) in rep.terms.iter().enumerate() {
            terms.push(vec![nx.to_string(), corpus[i].0.clone(), num(*u0), num(*lo), num(*hi)]);
        }
    }
    let drifts: Vec<f64> = (0..eps.len())
        .map(|e| max_drift(&per.iter().map(|(_, r)| r.rows[e].c_min).collect::<Vec<_>>()))
        .collect();
    out.result("levels", &levels);
    out.result("eps", &eps);
    out.result("max_drift", drifts);
    out.tables = vec![table, terms];
    Ok(out)
}

pub fn example(ctx: &Ctx) -> Res<Output> {
    let cfg = &ctx.cfg;
    let params = example_params(cfg)?;
    params.validate()?;
    let dim: usize = cfg.get_or("dim", 1)?;
    let solve: bool = cfg.get_or("solve", true)?;
    let levels = ctx.levels(&[17, 33, 65])?;
    let per = per_level(&levels, |nx| run_example(&params, dim, &[nx], solve))?;
    let mut out = Output::default();
    let mut probe = Table::new("probe", &["n", "q", "lower_bound"]);
    for t in &per[0].probe {
        probe.push(vec![t.n.to_string(), num(t.q), num(t.lower_bound)]);
    }
    let mut table = Table::new(
        "example",
        &["nx", "nt", "nodes", "seminorm", "witness_p", "witness_q", "c_global", "c_interior", "c_boundary", "residual"],
    );
    let mut semis = Vec::new();
    for rep in &per {
        let l = &rep.levels[0];
        semis.push(l.seminorm);
        let (wp, wq) = l.witness.as_ref().map_or((String::new(), String::new()), |w| (w.p.to_string(), w.q.to_string()));
        let c = |f: fn(&holdervar::solver::SchauderReport) -> Option<f64>| opt_num(l.schauder.as_ref().and_then(f));
        table.push(vec![
            l.nx.to_string(),
            l.nt.to_string(),
            l.nodes.to_string(),
            num(l.seminorm),
            wp,
            wq,
            c(|r| r.global.c_emp),
            c(|r| r.interior.c_emp),
            c(|r| r.boundary.c_emp),
            opt_num(l.residual),
        ]);
        if let Some(w) = &l.witness {
            out.witnesses.push(witness_json(l.nx, "seminorm", w));
        }
    }
    let seminorm_drift =
        semis.windows(2).map(|w| (w[1] / w[0]).max(w[0] / w[1])).fold(1.0, f64::max);
    out.result("params", params);
    out.result("dim", dim);
    out.result("alpha_minus", per[0].alpha_minus);
    out.result("alpha_plus", per[0].alpha_plus);
    out.result("q_ratio", per[0].q_ratio);
    out.result("eventually_increasing", per[0].eventually_increasing);
    out.result("seminorm_drift", seminorm_drift);
    out.result("levels", &levels);
    out.tables = vec![probe, table];
    Ok(out)
}

pub fn run(command: &str, ctx: &Ctx) -> std::result::Result<Output, CliError> {
    let out = match command {
        "norms" => norms(ctx),
        "kernel-check" => kernel_check(ctx),
        "potential" => potential(ctx),
        "solve" => solve(ctx),
        "schauder" => schauder(ctx),
        "mollify-check" => mollify_check(ctx),
        "interp-check" => interp_check(ctx),
        "example" => example(ctx),
        other => return Err(CliError::Usage(format!("unknown command {other:?}"))),
    };
    Ok(out?)
}
