//! Report sections. Every number carries the cutoff it was computed at and
//! whether an exact rational value backs it.

use std::collections::BTreeMap;

use lcm_kms::kms::{
    ground_state, kms_residual, phi_finite_type, phi_kms_infty, SpanElement, Trace, TraceSpec,
    Truncation,
};
use lcm_kms::measure::{
    boundary_factor_check, existence_check, foundation_candidate_check, zeta_partial,
    MeasureValue,
};
use lcm_kms::scale::{int, Certificate};
use lcm_kms::uniqueness::{
    default_tolerance, gs_check, kernel_pairs, uniqueness_report, PairReport, TruncationLadder,
};
use lcm_kms::{Element, Error, NClass, Result, Scale};
use num_rational::BigRational;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::Config;

pub const SCHEMA: &str = "kms-lcm/1";

/// `β` as text: `"3"`, `"0.9"`, `"inf"`.
pub fn beta_text(beta: f64) -> String {
    if beta.is_infinite() {
        if beta > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{beta}")
    }
}

/// Sections that need the quotient by `ker N` are skipped, not failed, when
/// the scale is not admissible; the structure section carries the witness.
pub fn or_skipped(r: Result<Value>) -> Result<Value> {
    match r {
        Err(Error::NotAdmissible(m)) => Ok(json!({ "skipped": m })),
        other => other,
    }
}

fn exact(v: &Option<BigRational>) -> Value {
    v.as_ref().map_or(Value::Null, |r| Value::String(r.to_string()))
}

fn measure(v: &MeasureValue) -> (Value, Value) {
    (json!(v.value), exact(&v.exact))
}

fn render(scale: &Scale, s: &Element) -> String {
    scale.monoid().render(s)
}

fn classes(scale: &Scale, cs: &[NClass]) -> Vec<String> {
    cs.iter().map(|c| scale.render_class(c)).collect()
}

fn certificate(scale: &Scale, c: &Certificate, depth: usize) -> Value {
    match c {
        Certificate::Pass => json!({ "passed": true, "depth": depth, "counterexample": null }),
        Certificate::Counterexample(s, t) => json!({
            "passed": false,
            "depth": depth,
            "counterexample": [render(scale, s), render(scale, t)],
        }),
    }
}

pub fn config_echo(cfg: &Config) -> Value {
    let weights: Map<String, Value> = cfg
        .scale
        .weights()
        .into_iter()
        .map(|(n, w)| (n, Value::String(w.to_string())))
        .collect();
    json!({
        "monoid": cfg.scale.monoid(),
        "scale": weights,
        "beta": cfg.betas.iter().map(|&b| beta_text(b)).collect::<Vec<_>>(),
        "class_cutoff": cfg.class_cutoff.to_string(),
        "existence_cutoff": cfg.existence_cutoff.to_string(),
        "max_antichain": cfg.max_antichain,
        "subset_budget": cfg.subset_budget,
        "depth": cfg.depth,
        "ladder_height": cfg.ladder_height,
        "kernel_sample": cfg.kernel_sample,
        "traces": cfg.traces,
    })
}

pub fn structure(cfg: &Config) -> Result<Value> {
    let s = &cfg.scale;
    let directed = s.check_kernel_directed(cfg.depth)?;
    let admissible = s.check_admissibility(cfg.depth)?;
    let levels = or_skipped(s.levels(&cfg.existence_cutoff).map(|ls| {
        ls.iter()
            .map(|l| json!({ "key": render(s, &l.key), "n": l.n.to_string(), "classes": l.size }))
            .collect()
    }))?;
    let gs = match cfg.existence_cutoff.to_integer().try_into() {
        Ok(cutoff) => or_skipped(gs_check(s, cutoff).map(|v| {
            json!({
                "passed": v.passed,
                "axioms": v.axioms,
                "integer_valued": v.integer_valued,
                "failure": v.failure.map(|(k, m)| json!({ "axiom": k, "detail": m })),
                "class_cutoff": cfg.existence_cutoff.to_string(),
            })
        }))?,
        Err(_) => Value::Null,
    };
    Ok(json!({
        "kernel_directed": certificate(s, &directed, cfg.depth),
        "admissibility": certificate(s, &admissible, cfg.depth),
        "levels": levels,
        "generalized_scale": gs,
    }))
}

pub const EXISTENCE_COLUMNS: &[&str] = &[
    "beta", "passed", "reason", "class_cutoff", "max_size", "subsets_checked", "partial", "value",
    "exact", "witness",
];

pub fn existence(cfg: &Config, beta: f64) -> Result<Value> {
    let s = &cfg.scale;
    let base = |passed: bool, reason: &str| {
        json!({
            "beta": beta_text(beta),
            "passed": passed,
            "reason": reason,
            "class_cutoff": cfg.existence_cutoff.to_string(),
            "max_size": cfg.max_antichain,
            "subsets_checked": 0,
            "partial": false,
            "value": null,
            "exact": null,
            "witness": [],
        })
    };
    if beta < 0.0 {
        return Ok(base(false, "no KMS states for β < 0: positivity of the state forces β = 0 or β > 0"));
    }
    if beta.is_infinite() {
        return Ok(base(true, "KMS∞ states exist for every trace on the kernel algebra"));
    }
    if beta > 0.0 && !s.check_admissibility(cfg.depth)?.passed() {
        return Ok(base(false, "the scale is not admissible, which rules out KMS states for β > 0"));
    }
    let v = existence_check(s, beta, &cfg.existence_cutoff, cfg.max_antichain, cfg.subset_budget)?;
    let reason = match (v.passed, v.partial) {
        (false, _) => "negative measure on a cylinder set: no KMS state",
        (true, false) => "all antichains in range have nonnegative measure (certificate, not proof)",
        (true, true) => "subset budget exhausted before the range was covered",
    };
    Ok(json!({
        "beta": beta_text(beta),
        "passed": v.passed,
        "reason": reason,
        "class_cutoff": cfg.existence_cutoff.to_string(),
        "max_size": cfg.max_antichain,
        "subsets_checked": v.subsets_checked,
        "partial": v.partial,
        "value": v.value,
        "exact": exact(&v.exact_value),
        "witness": classes(s, v.witness.as_deref().unwrap_or(&[])),
    }))
}

pub const ZETA_COLUMNS: &[&str] =
    &["beta", "class_cutoff", "partial", "closed_form", "classes", "finite_type"];

pub fn zeta(cfg: &Config, beta: f64) -> Result<Value> {
    if !beta.is_finite() {
        return Ok(json!({
            "beta": beta_text(beta), "class_cutoff": cfg.class_cutoff.to_string(),
            "partial": null, "closed_form": null, "classes": null, "finite_type": false,
        }));
    }
    let z = zeta_partial(&cfg.scale, beta, &cfg.class_cutoff)?;
    Ok(json!({
        "beta": beta_text(beta),
        "class_cutoff": cfg.class_cutoff.to_string(),
        "partial": z.partial,
        "closed_form": z.closed_form,
        "classes": z.classes,
        "finite_type": z.closed_form.is_some(),
    }))
}

fn pair_json(scale: &Scale, p: &PairReport) -> Value {
    let rungs: Vec<Value> = p
        .rungs
        .iter()
        .map(|r| {
            let (triv, triv_exact) = measure(&r.mu_triv);
            let (fix, fix_exact) = measure(&r.mu_fix);
            json!({
                "F_size": r.f_size,
                "mu_triv": triv,
                "mu_fix": fix,
                "mu_triv_exact": triv_exact,
                "mu_fix_exact": fix_exact,
                "T_size": r.t_size,
                "top_slice": r.top_slice,
            })
        })
        .collect();
    json!({
        "a": render(scale, &p.a),
        "b": render(scale, &p.b),
        "rungs": rungs,
        "verdict": p.verdict.name(),
        "stabilized": p.stabilized,
    })
}

pub fn uniqueness(cfg: &Config, beta: f64, exists: bool) -> Result<Value> {
    let s = &cfg.scale;
    if !exists || !(beta > 0.0 && beta.is_finite()) {
        return Ok(json!({
            "beta": beta_text(beta),
            "verdict": null,
            "reason": if exists { "uniqueness is decided only for finite β > 0" } else { "no KMS state" },
        }));
    }
    let tolerance = default_tolerance(beta);
    let ladder = TruncationLadder::default_for(s, cfg.ladder_height)?;
    let pairs = kernel_pairs(s, cfg.kernel_sample);
    let r = uniqueness_report(s, beta, &pairs, &ladder, cfg.depth, tolerance)?;
    Ok(json!({
        "beta": beta_text(beta),
        "verdict": r.verdict.name(),
        "tolerance": tolerance,
        "ladder_height": cfg.ladder_height,
        "kernel_sample": cfg.kernel_sample,
        "witness": r.witness.map(|i| pair_json(s, &r.pairs[i])),
        "caveat": r.caveat,
        "pairs": r.pairs.iter().map(|p| pair_json(s, p)).collect::<Vec<_>>(),
    }))
}

pub const UNIQUENESS_COLUMNS: &[&str] = &[
    "beta", "verdict", "a", "b", "rung", "F_size", "T_size", "top_slice", "mu_triv", "mu_fix",
    "mu_triv_exact", "mu_fix_exact", "pair_verdict", "stabilized",
];

/// One row per pair and rung.
pub fn uniqueness_rows(section: &Value) -> Vec<Value> {
    let mut rows = Vec::new();
    let empty = Vec::new();
    for p in section["pairs"].as_array().unwrap_or(&empty) {
        for (i, r) in p["rungs"].as_array().unwrap_or(&empty).iter().enumerate() {
            let mut row = r.as_object().cloned().unwrap_or_default();
            row.insert("beta".into(), section["beta"].clone());
            row.insert("verdict".into(), section["verdict"].clone());
            row.insert("a".into(), p["a"].clone());
            row.insert("b".into(), p["b"].clone());
            row.insert("rung".into(), json!(i));
            row.insert("pair_verdict".into(), p["verdict"].clone());
            row.insert("stabilized".into(), p["stabilized"].clone());
            rows.push(Value::Object(row));
        }
    }
    if rows.is_empty() {
        rows.push(json!({ "beta": section["beta"], "verdict": section["verdict"] }));
    }
    rows
}

/// Classes of minimal `N > 1`: a foundation set for every built-in family
/// whose smallest weight is attained on enough generators.
fn default_boundary_set(scale: &Scale) -> Result<Vec<Element>> {
    let Some(w) = scale.weights().into_iter().map(|(_, w)| w).filter(|w| *w > int(1)).min()
    else {
        return Ok(Vec::new());
    };
    let mut set = Vec::new();
    for level in scale.levels(&w)?.iter().filter(|l| l.n == w) {
        set.extend(scale.level_classes(level)?.into_iter().map(|c| c.rep));
    }
    Ok(set)
}

pub const BOUNDARY_COLUMNS: &[&str] = &["beta", "set", "foundation_probe", "probe_cutoff", "value", "exact"];

pub fn boundary(cfg: &Config, beta: f64) -> Result<Vec<Value>> {
    let s = &cfg.scale;
    let sets = if cfg.boundary.is_empty() {
        vec![default_boundary_set(s)?]
    } else {
        cfg.boundary.clone()
    };
    let mut rows = Vec::new();
    for f in sets.iter().filter(|f| !f.is_empty()) {
        let probe = foundation_candidate_check(s, f, &cfg.existence_cutoff)?;
        let (value, exact) = if beta.is_finite() {
            measure(&boundary_factor_check(s, beta, f)?)
        } else {
            (Value::Null, Value::Null)
        };
        rows.push(json!({
            "beta": beta_text(beta),
            "set": f.iter().map(|e| render(s, e)).collect::<Vec<_>>(),
            "foundation_probe": probe,
            "probe_cutoff": cfg.existence_cutoff.to_string(),
            "value": value,
            "exact": exact,
        }));
    }
    Ok(rows)
}

pub const KMS_COLUMNS: &[&str] = &[
    "beta", "trace", "s", "t", "method", "re", "im", "tail_bound", "heuristic_tail", "class_cutoff",
    "note",
];

pub fn kms_eval(cfg: &Config) -> Result<Vec<Value>> {
    let s = &cfg.scale;
    let e = s.monoid().identity();
    let pairs = if cfg.pairs.is_empty() {
        vec![(e.clone(), e)]
    } else {
        cfg.pairs.clone()
    };
    let mut rows = Vec::new();
    for &beta in &cfg.betas {
        let trunc = if beta.is_finite() && beta > 0.0 {
            let t = Truncation::new(s, beta, &cfg.class_cutoff)?;
            t.zeta_closed.is_some().then_some(t)
        } else {
            None
        };
        for (ti, trace) in cfg.traces.iter().enumerate() {
            for (a, b) in &pairs {
                let row = |method: &str, v: Option<(f64, f64)>, tail: Value, heuristic: Value, note: &str| {
                    json!({
                        "beta": beta_text(beta),
                        "trace": ti,
                        "s": render(s, a),
                        "t": render(s, b),
                        "method": method,
                        "re": v.map(|v| v.0),
                        "im": v.map(|v| v.1),
                        "tail_bound": tail,
                        "heuristic_tail": heuristic,
                        "class_cutoff": if method == "finite_type" { json!(cfg.class_cutoff.to_string()) } else { Value::Null },
                        "note": note,
                    })
                };
                if beta == f64::INFINITY {
                    let v = phi_kms_infty(s, trace, a, b)?;
                    rows.push(row("kms_infty", Some((v.re, v.im)), Value::Null, Value::Null, ""));
                    let x = SpanElement::monomial(a.clone(), b.clone());
                    let g = ground_state(s, |p, q| trace.eval(p, q), &x)?;
                    rows.push(row("ground", Some((g.re, g.im)), Value::Null, Value::Null, ""));
                } else if let Some(t) = &trunc {
                    let v = phi_finite_type(s, t, trace, a, b)?;
                    rows.push(row(
                        "finite_type",
                        Some((v.value.re, v.value.im)),
                        json!(v.tail_bound),
                        json!(v.heuristic_tail),
                        "",
                    ));
                } else {
                    rows.push(row("none", None, Value::Null, Value::Null, "outside the finite-type regime"));
                }
            }
        }
    }
    Ok(rows)
}

/// Largest KMS residual of the first trace's finite-type state over sampled
/// monomial pairs `v_s v_t*` with `N(s) = N(t)` (other monomials are killed
/// by every KMS state and test nothing), per finite-type β.
pub fn kms_diagnostics(cfg: &Config, seed: u64) -> Result<Vec<Value>> {
    let s = &cfg.scale;
    let mut by_level: BTreeMap<BigRational, Vec<Element>> = BTreeMap::new();
    for x in s.monoid().enumerate(2) {
        by_level.entry(s.n_value(&x)?).or_default().push(x);
    }
    let groups: Vec<Vec<Element>> = by_level.into_values().collect();
    let trace: &TraceSpec = &cfg.traces[0];
    let mut out = Vec::new();
    for &beta in cfg.betas.iter().filter(|b| b.is_finite() && **b > 0.0) {
        let t = Truncation::new(s, beta, &cfg.class_cutoff)?;
        if t.zeta_closed.is_none() {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut monomial = || {
            let g = groups.choose(&mut rng).expect("the identity is always enumerated");
            let a = g.choose(&mut rng).expect("levels are nonempty").clone();
            let b = g.choose(&mut rng).expect("levels are nonempty").clone();
            SpanElement::monomial(a, b)
        };
        let mut worst = 0.0f64;
        for _ in 0..cfg.samples {
            let (x, y) = (monomial(), monomial());
            let state = |p: &Element, q: &Element| Ok(phi_finite_type(s, &t, trace, p, q)?.value);
            worst = worst.max(kms_residual(s, beta, state, &x, &y)?);
        }
        out.push(json!({
            "beta": beta_text(beta),
            "seed": seed,
            "samples": cfg.samples,
            "class_cutoff": cfg.class_cutoff.to_string(),
            "max_residual": worst,
        }));
    }
    Ok(out)
}
