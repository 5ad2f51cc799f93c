use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{Record, SuiteReport, Value};
use super::RunConfig;
use crate::error::Result;
use crate::flow::{
    factorization_residual, graded_picard, ordered_exp, picard_terms, positivity_probe_with, texp_matrix_element,
    triple_pairing, vacuum_expectation, FlowProblem,
};
use crate::fock::{annihilation_apply, creation_apply, exponential_vector_of, fock_inner, FockVector, NoiseBasis};
use crate::sampling;
use crate::spectral::growth::{
    commutator_residual, laplacian_bound_margin, laplacian_power_growth, product_rule_residual,
    product_rule_tensor_residual,
};
use crate::spectral::{OneForm, TrigPoly};
use crate::structure::{
    cocycle_residual, constant_range_m, delta, delta_squared, generator_l, kernel_eval, kernel_eval_oracle,
    nested_phi_growth, sobolev_w2inf_norm, theta_apply,
};
use crate::trace::{auto_cutoff, heat_trace_direct, heat_trace_via_flow, spectral_action_auto, theta_reference, weyl_fit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Growth,
    Flow,
    Trace,
    Action,
}

const CHECK_COLUMNS: [&str; 5] = ["check", "sample", "residual", "bound", "pass"];

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Identities, Suite::Growth, Suite::Flow, Suite::Trace, Suite::Action];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Growth => "growth",
            Suite::Flow => "flow",
            Suite::Trace => "trace",
            Suite::Action => "action",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    pub fn summary(self) -> &'static str {
        match self {
            Suite::Identities => "structure-map and Fock-space identities",
            Suite::Growth => "product rules, commutators and growth bounds",
            Suite::Flow => "matrix elements, Picard series, factorization, positivity",
            Suite::Trace => "heat trace: direct, via the flow, theta resummation",
            Suite::Action => "spectral-action scaling against the Weyl term",
        }
    }

    pub fn columns(self) -> Vec<&'static str> {
        match self {
            Suite::Trace => vec!["t", "trace_direct", "trace_flow", "theta_ref", "abs_err", "theta_err", "pass"],
            Suite::Action => {
                vec!["lambda", "cutoff", "action", "slope_fit", "prefactor_fit", "prefactor_expected", "pass"]
            }
            _ => CHECK_COLUMNS.to_vec(),
        }
    }

    fn salt(self) -> u64 {
        (Suite::ALL.iter().position(|s| *s == self).unwrap() as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
    }
}

/// Text for `qflow explain <suite>`.
pub fn explain(s: Suite) -> String {
    let lines: &[&str] = match s {
        Suite::Identities => &[
            "cocycle      ⟨δx, δy⟩ = L(x*y) - x*L(y) - L(x*)y, with L = -Δ/2 and δ = d",
            "leibniz      δ(xy) = x δy + y δx",
            "star         L(x*) = L(x)*",
            "theta_one    Θ(1) v = 0 for the structure matrix Θ",
            "delta_sq     (δ ⊗ 1)δ(x) = 0",
            "kernel       closed-form kernel ⟨da₁, db₁⟩ a₂* b₂ equals the four-term defining expression",
            "ccr          [a(u), a†(w)] v = ⟨u, w⟩ v below the top Fock level",
            "adjoint      ⟨a†(u) v, w⟩ = ⟨v, a(u) w⟩",
        ],
        Suite::Growth => &[
            "product_rule         Δ(fg) = fΔg + gΔf - 2⟨∇f*, ∇g⟩",
            "product_rule_k       Δ⟨∇^k f, ∇^k g⟩ = ⟨∇^kΔf, ∇^k g⟩ + ⟨∇^k f, ∇^kΔg⟩ - 2⟨∇^{k+1} f, ∇^{k+1} g⟩",
            "commutator           [Δ, ∇^k] f = 0 on the flat torus",
            "laplacian_bound      |Δf| ≤ √d ℓ(∇²f) pointwise on a grid",
            "sobolev              ‖Θ(a)v‖ ≤ 4d ‖a‖_{W^{2,∞}} ‖v‖",
            "power_growth         ‖Δ^k f‖_∞ ≤ Σ|f_k| · λ_max^k (ratio reported)",
            "nested_phi           ‖Φ_{ξ_n}∘…∘Φ_{ξ_1}(x)‖_∞ ≤ C (2√d M²)^n for constant ranges (ratio reported)",
        ],
        Suite::Flow => &[
            "vacuum         ⟨u E(0), j_t(x) v E(0)⟩ = ⟨u, e^{-tΔ/2}(x) v⟩",
            "unital         ⟨u E(g), j_t(1) v E(f)⟩ = e^{⟨g,f⟩} ⟨u, v⟩",
            "picard         |Σ_{n≤8} Picard terms - time-ordered exponential| ≤ analytic tail bound",
            "picard_decay   ‖M_{n+1}x‖ (n+1) / (t max‖Ψ_j‖ ‖M_n x‖) ≤ 1",
            "ordering       graded Picard series equals the ordered product of exponentials for non-commuting generators",
            "factorization  ⟨J(a₁⊗Ef₁)v₁, J(a₂⊗Ef₂)v₂⟩ = ⟨v₁Ef₁, J(a₁*a₂⊗Ef₂)v₂⟩ within truncation bounds",
            "pos_pairing    -min Re⟨θ, j_t(2+cos)θ⟩/‖θ‖² ≤ 1e-8",
            "pos_ratio      max ‖j_t(2+cos)θ‖/‖θ‖ ≤ ‖2+cos‖_∞ + 1e-6",
        ],
        Suite::Trace => &[
            "abs_err     |Σ_{|k|≤z} ⟨φ_k, j_{2t}(φ_k)1⟩/‖φ_k‖² - Σ_{|k|≤z} e^{-t|k|²}|",
            "theta_err   |Σ_k e^{-t|k|²} - (π/t)^{d/2} Σ_k e^{-π²|k|²/t}| with a tail-controlled cutoff",
        ],
        Suite::Action => &[
            "action      S(Λ) = 2^{⌊d/2⌋} Σ_k e^{-|k|²/Λ²}",
            "slope_fit   least-squares slope of log S against log Λ, expected d",
            "prefactor   fitted prefactor against 2^{⌊d/2⌋} (2π)^d / (4π)^{d/2}",
        ],
    };
    let mut out = format!("{}: {}\n", s.name(), s.summary());
    for l in lines {
        out.push_str("  ");
        out.push_str(l);
        out.push('\n');
    }
    out
}

fn row(check: &str, sample: usize, residual: f64, bound: f64) -> Record {
    Record(vec![
        ("check", check.into()),
        ("sample", sample.into()),
        ("residual", residual.into()),
        ("bound", bound.into()),
        ("pass", (residual <= bound).into()),
    ])
}

pub fn run_suite(s: Suite, cfg: &RunConfig) -> SuiteReport {
    let mut records = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ s.salt());
    let result = match s {
        Suite::Identities => identities(cfg, &mut rng, &mut records),
        Suite::Growth => growth(cfg, &mut rng, &mut records),
        Suite::Flow => flow(cfg, &mut rng, &mut records),
        Suite::Trace => trace(cfg, &mut records),
        Suite::Action => action(cfg, &mut records),
    };
    let error = result.err().map(|(ctx, e)| format!("{} suite, {ctx}: {e}", s.name()));
    SuiteReport { name: s.name(), columns: s.columns(), records, error }
}

type SuiteResult = std::result::Result<(), (String, crate::error::Error)>;

fn ctx<T>(r: Result<T>, what: impl FnOnce() -> String) -> std::result::Result<T, (String, crate::error::Error)> {
    r.map_err(|e| (what(), e))
}

fn identities(cfg: &RunConfig, rng: &mut ChaCha8Rng, out: &mut Vec<Record>) -> SuiteResult {
    let (d, tol) = (cfg.dim, cfg.tol("identities"));
    let cap = cfg.cap.max(4);
    let (r2, r4) = (cap / 2, cap / 4);
    for i in 0..cfg.samples {
        let x = sampling::poly(rng, d, cap, r2, 4);
        let y = sampling::poly(rng, d, cap, r2, 4);
        let inputs = || format!("sample {i}: x = {x:?}, y = {y:?}");
        out.push(row("cocycle", i, ctx(cocycle_residual(&x, &y), inputs)?, tol));
        let lhs = delta(&ctx(x.multiply(&y), inputs)?);
        let rhs = ctx(delta(&y).mul_fn(&x), inputs)?.add(&ctx(delta(&x).mul_fn(&y), inputs)?);
        out.push(row("leibniz", i, lhs.max_abs_diff(&rhs), tol));
        out.push(row("star", i, generator_l(&x.conj()).max_abs_diff(&generator_l(&x).conj()), tol));
        let v = sampling::augmented_unit(rng, d, cap, r2);
        let th = ctx(theta_apply(&TrigPoly::one(d, cap), &v), inputs)?;
        out.push(row("theta_one", i, th.norm(), tol));
        out.push(row("delta_sq", i, delta_squared(&x).norm(), tol));
        let q: Vec<TrigPoly> = (0..4).map(|_| sampling::poly(rng, d, cap, r4.max(1), 4)).collect();
        let kin = || format!("sample {i}: kernel inputs {q:?}");
        let closed = ctx(kernel_eval(&q[0], &q[1], &q[2], &q[3]), kin)?;
        let oracle = ctx(kernel_eval_oracle(&q[0], &q[1], &q[2], &q[3]), kin)?;
        out.push(row("kernel", i, closed.max_abs_diff(&oracle), tol));
    }
    let depth = cfg.depth.max(1);
    for i in 0..cfg.samples.min(10) {
        let forms: Vec<OneForm> = (0..2).map(|_| sampling::one_form(rng, d, 2, 1, 2)).collect();
        let basis = NoiseBasis::new(vec![0.0, 0.4, 1.0], &forms);
        let n = basis.len();
        let vec_of = |rng: &mut ChaCha8Rng| -> Vec<Complex64> { (0..n).map(|_| sampling::complex(rng) * 0.5).collect() };
        let (u, w, s) = (vec_of(rng), vec_of(rng), vec_of(rng));
        let v = creation_apply(&w, &exponential_vector_of(&basis, &s, depth));
        let lhs = annihilation_apply(&u, &creation_apply(&w, &v));
        let mut comm = lhs.clone();
        comm.add_scaled(&creation_apply(&w, &annihilation_apply(&u, &v)), Complex64::new(-1.0, 0.0));
        let uw: Complex64 = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
        comm.add_scaled(&v, -uw);
        out.push(row("ccr", i, max_below_top(&comm), tol * (1.0 + v.norm())));
        let z = exponential_vector_of(&basis, &u, depth);
        let a = ctx(fock_inner(&creation_apply(&s, &v), &z), || format!("fock sample {i}"))?;
        let b = ctx(fock_inner(&v, &annihilation_apply(&s, &z)), || format!("fock sample {i}"))?;
        out.push(row("adjoint", i, (a - b).norm(), tol * (1.0 + v.norm() * z.norm())));
    }
    Ok(())
}

fn max_below_top(v: &FockVector) -> f64 {
    (0..v.depth()).flat_map(|n| v.level(n).values().map(|c| c.norm())).fold(0.0, f64::max)
}

fn growth(cfg: &RunConfig, rng: &mut ChaCha8Rng, out: &mut Vec<Record>) -> SuiteResult {
    let (d, tol) = (cfg.dim, cfg.tol("growth"));
    let cap = cfg.cap.max(4);
    let (r2, r4) = (cap / 2, (cap / 4).max(1));
    for i in 0..cfg.samples {
        let f = sampling::poly(rng, d, cap, r2, 3);
        let g = sampling::poly(rng, d, cap, r2, 3);
        let inputs = || format!("sample {i}: f = {f:?}, g = {g:?}");
        out.push(row("product_rule", i, ctx(product_rule_residual(&f, &g), inputs)?, tol));
        let mut pk: f64 = 0.0;
        for k in 1..=2 {
            pk = pk.max(ctx(product_rule_tensor_residual(&f, &g, k), inputs)?);
        }
        out.push(row("product_rule_k", i, pk, tol));
        let comm = (0..=3).map(|k| commutator_residual(&f, k)).fold(0.0, f64::max);
        out.push(row("commutator", i, comm, tol));
        let grid = (4 * f.degree() as usize + 4).max(16);
        out.push(row("laplacian_bound", i, laplacian_bound_margin(&f, grid), tol));

        let a = sampling::poly(rng, d, cap, r4, 3);
        let v = sampling::augmented_unit(rng, d, cap, r4);
        let th = ctx(theta_apply(&a, &v), || format!("sample {i}: a = {a:?}"))?;
        let bound = 4.0 * d as f64 * sobolev_w2inf_norm(&a) * v.norm();
        out.push(row("sobolev", i, th.norm(), bound + tol));

        let ratio = laplacian_power_growth(&f, 6).iter().filter(|(_, b)| *b > 0.0).map(|(m, b)| m / b).fold(0.0, f64::max);
        out.push(row("power_growth", i, ratio, 1.0 + tol));

        let x = sampling::poly(rng, d, cap, r4, 3);
        let range: Vec<OneForm> = (0..2).map(|_| sampling::constant_form(rng, d, cap, 1.0)).collect();
        let word: Vec<usize> = (0..6).map(|_| rng.gen_range(0..2)).collect();
        let g = ctx(nested_phi_growth(&x, &range, &word), || format!("sample {i}: x = {x:?}"))?;
        let m = constant_range_m(&x, &range);
        let rate = 2.0 * (d as f64).sqrt() * m * m;
        let c0 = x.abs_sum();
        let worst = g.norms.iter().enumerate().map(|(n, v)| v / (c0 * rate.powi(n as i32))).fold(0.0, f64::max);
        out.push(row("nested_phi", i, worst, 1.0 + tol));
    }
    Ok(())
}

fn flow(cfg: &RunConfig, rng: &mut ChaCha8Rng, out: &mut Vec<Record>) -> SuiteResult {
    let (d, tol) = (cfg.dim, cfg.tol("flow"));
    let cap = cfg.cap.max(2);
    let radius = cap.min(6);
    for i in 0..cfg.samples {
        let x = sampling::poly(rng, d, cap, radius, 6);
        let u = sampling::poly(rng, d, cap, radius, 6);
        let v = sampling::poly(rng, d, cap, radius, 6);
        for &t in &cfg.t_grid {
            let got = ctx(vacuum_expectation(&x, &u, &v, t), || format!("sample {i}, t = {t}: x = {x:?}"))?;
            let expected = triple_pairing(&u, &x.heat(t, true), &v);
            out.push(row("vacuum", i, (got - expected).norm(), tol));
        }
    }
    // Path values normalized against the torus volume so that ‖f‖² stays O(t) in every dimension.
    let unit = (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
    let horizon_path = |rng: &mut ChaCha8Rng, t: f64, pieces: usize, scale: f64| {
        sampling::path(rng, t, pieces, |r| {
            let bumps = sampling::one_form(r, d, cap, 1, 2).scale(Complex64::new(0.1 * unit, 0.0));
            sampling::constant_form(r, d, cap, scale * unit).add(&bumps)
        })
    };
    for i in 0..cfg.samples.min(20) {
        let t = rng.gen_range(0.2..1.0);
        let x = sampling::poly(rng, d, cap, 2.min(cap), 4);
        let u = sampling::poly(rng, d, cap, 2.min(cap), 4);
        let v = sampling::poly(rng, d, cap, 2.min(cap), 4);
        let f = horizon_path(rng, t, 2, 0.3);
        let g = horizon_path(rng, t, 2, 0.3);
        let p = FlowProblem::new(x, u.clone(), v.clone(), f, g, t);
        let inputs = || format!("picard sample {i}: {p:?}");
        let exact = ctx(texp_matrix_element(&p), inputs)?;
        let series = ctx(picard_terms(&p, 8), inputs)?;
        let resid = (series.partial_sum(8) - exact).norm();
        out.push(row("picard", i, resid, series.tail_after(8) + 1e-12 * (1.0 + exact.norm())));
        let worst = series
            .term_norms
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] > 0.0)
            .map(|(n, w)| w[1] * (n + 1) as f64 / (series.step_rate * w[0]))
            .fold(0.0, f64::max);
        out.push(row("picard_decay", i, worst, 1.0 + 1e-12));

        let one = TrigPoly::one(d, cap);
        let unit = FlowProblem { x: one, ..p.clone() };
        let got = ctx(texp_matrix_element(&unit), inputs)?;
        out.push(row("unital", i, (got - p.prefactor() * u.l2_inner(&v)).norm(), tol * (1.0 + got.norm())));

        let steps: Vec<_> = (0..2).map(|_| (rng.gen_range(0.1..0.6), sampling::matrix(rng, 3))).collect();
        let xv = nalgebra::DVector::from_fn(3, |_, _| sampling::complex(rng));
        let exact = ordered_exp(&steps) * &xv;
        let sum = graded_picard(&steps, &xv, 40).into_iter().fold(nalgebra::DVector::zeros(3), |a, b| a + b);
        out.push(row("ordering", i, (exact - sum).norm(), tol * (1.0 + xv.norm())));
    }
    for i in 0..cfg.samples.min(10) {
        let t = rng.gen_range(0.05..0.25);
        let r = if d == 1 { 2.min(cap) } else { 1 };
        let a1 = sampling::self_adjoint_poly(rng, d, cap, r, 2);
        let a2 = sampling::self_adjoint_poly(rng, d, cap, r, 2);
        let f1 = horizon_path(rng, t, cfg.mesh, 0.1);
        let f2 = horizon_path(rng, t, cfg.mesh, 0.1);
        let v1 = sampling::poly(rng, d, cap, 1, 2);
        let v2 = sampling::poly(rng, d, cap, 1, 2);
        let rep = ctx(factorization_residual(&a1, &a2, &f1, &f2, &v1, &v2, t, 14, cfg.depth), || {
            format!("factorization sample {i}: a1 = {a1:?}, a2 = {a2:?}, t = {t}")
        })?;
        out.push(row("factorization", i, rep.residual, rep.bound));
    }
    let x = &TrigPoly::constant(d, cap, Complex64::new(2.0, 0.0)) + &TrigPoly::cos(d, cap, 0, 1).expect("cap ≥ 1");
    let rep = ctx(positivity_probe_with(&x, 0.25, cfg.samples.min(8), cfg.seed, cfg.depth, 14), || {
        "positivity probe on 2 + cos x".to_string()
    })?;
    out.push(row("pos_pairing", 0, -rep.min_pairing, 1e-8));
    out.push(row("pos_ratio", 0, rep.max_ratio, rep.sup_norm + 1e-6));
    Ok(())
}

fn trace(cfg: &RunConfig, out: &mut Vec<Record>) -> SuiteResult {
    let d = cfg.dim;
    for &t in &cfg.t_grid {
        let direct = ctx(heat_trace_direct(d, t, cfg.cutoff), || format!("t = {t}"))?;
        let via_flow = ctx(heat_trace_via_flow(d, cfg.cap, t, cfg.cutoff), || format!("t = {t}"))?;
        let theta = theta_reference(d, t);
        let full = ctx(heat_trace_direct(d, t, auto_cutoff(d, t, 1e-12)), || format!("t = {t}"))?;
        let abs_err = (via_flow - direct).abs();
        let theta_err = (full - theta).abs();
        let pass = abs_err <= cfg.tol("trace") && theta_err <= cfg.tol("theta");
        out.push(Record(vec![
            ("t", t.into()),
            ("trace_direct", direct.into()),
            ("trace_flow", via_flow.into()),
            ("theta_ref", theta.into()),
            ("abs_err", abs_err.into()),
            ("theta_err", theta_err.into()),
            ("pass", pass.into()),
        ]));
    }
    Ok(())
}

fn action(cfg: &RunConfig, out: &mut Vec<Record>) -> SuiteResult {
    let d = cfg.dim;
    let fit = ctx(weyl_fit(d, &cfg.lambda_grid), || format!("lambda grid {:?}", cfg.lambda_grid))?;
    let tol = cfg.tol("action");
    let pass = (fit.slope - d as f64).abs() <= tol && fit.prefactor_rel_err() <= tol;
    for &l in &cfg.lambda_grid {
        let s = ctx(spectral_action_auto(d, l), || format!("lambda = {l}"))?;
        out.push(Record(vec![
            ("lambda", l.into()),
            ("cutoff", Value::Float(auto_cutoff(d, l.powi(-2), 1e-14))),
            ("action", s.into()),
            ("slope_fit", fit.slope.into()),
            ("prefactor_fit", fit.prefactor.into()),
            ("prefactor_expected", fit.expected_prefactor.into()),
            ("pass", pass.into()),
        ]));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(s: Suite) -> RunConfig {
        RunConfig { suites: vec![s], samples: 3, ..RunConfig::default() }
    }

    #[test]
    fn every_suite_passes_small() {
        for s in Suite::ALL {
            let r = run_suite(s, &small(s));
            assert!(r.passed(), "{} failed: {:?} {:?}", s.name(), r.error, r.records.iter().filter(|x| !x.passed()).collect::<Vec<_>>());
            assert!(!r.records.is_empty());
            for rec in &r.records {
                let keys: Vec<_> = rec.0.iter().map(|(k, _)| *k).collect();
                assert_eq!(keys, s.columns());
            }
        }
    }

    #[test]
    fn explain_names_checks() {
        assert!(explain(Suite::Trace).contains("abs_err"));
        assert!(explain(Suite::Flow).contains("factorization"));
    }

    #[test]
    fn deterministic_records() {
        let cfg = small(Suite::Growth);
        assert_eq!(run_suite(Suite::Growth, &cfg).records, run_suite(Suite::Growth, &cfg).records);
    }

    #[test]
    fn failing_tolerance_is_reported() {
        let mut cfg = small(Suite::Trace);
        cfg.tol.insert("theta".into(), 1e-300);
        cfg.t_grid = vec![0.05];
        let r = run_suite(Suite::Trace, &cfg);
        assert!(!r.passed());
    }
}
