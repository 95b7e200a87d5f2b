use serde_json::{json, Value};

use crate::deformation::{InvariantProfile, Verdict};
use crate::fuchsian::{ExponentCheck, BASE_POINT_ROTATION_DEG, GUARD_FRACTION};
use crate::halphen::{Prop0Config, Prop0Report};
use crate::numcore::{Complex, ComplexMatrix};

/// Conventions echoed into every report.
pub const CONVENTIONS: &[(&str, &str)] = &[
    ("loop_orientation", "counterclockwise"),
    (
        "loop_shape",
        "straight line from the base point, full circle about the pole starting at the line's end, straight line back",
    ),
    ("fundamental_solution", "Y(x0) = I; M_i is Y(x0) after continuation around loop i"),
    (
        "loop_radius",
        "half the distance from the pole to the nearest other pole or the base point, floored at 1e-6",
    ),
    (
        "base_point_rule",
        "|x0| = 2(1 + max|x_i|), starting on the positive real axis and rotating until every connecting line keeps clear of the other poles",
    ),
    ("log_branch", "principal logarithm, eigenvalue arguments in (-pi, pi); exponent L = log(M)/(2 pi i)"),
    ("commutator", "K_ij = M_i M_j M_i^-1 M_j^-1"),
    ("projective_invariants", "trace(M)^n/det(M) with n the system dimension"),
    ("deviation", "|q(t_k) - q(t_0)| / max(1, |q(t_0)|)"),
];

pub(crate) fn conventions_json() -> Value {
    let mut m = serde_json::Map::new();
    for (k, v) in CONVENTIONS {
        m.insert((*k).to_string(), json!(v));
    }
    m.insert("guard_fraction".into(), json!(GUARD_FRACTION));
    m.insert("base_point_rotation_deg".into(), json!(BASE_POINT_ROTATION_DEG));
    Value::Object(m)
}

pub(crate) fn timestamp() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn complex_json(z: Complex) -> Value {
    json!([z.re, z.im])
}

/// Nested rows of [re, im] pairs.
pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(m.rows().into_iter().map(|row| Value::Array(row.iter().map(|&z| complex_json(z)).collect())).collect())
}

fn complexes(v: &[Complex]) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

pub fn verdict_json(v: &Verdict) -> Value {
    json!({
        "kind": v.kind.as_str(),
        "max_deviation": v.max_deviation,
        "threshold": v.threshold,
        "witness": v.witness.as_ref().map(|w| json!({ "quantity": w.quantity.to_string(), "t": w.t })),
        "epistemic_status": v.note,
    })
}

pub fn profile_json(p: &InvariantProfile) -> Value {
    json!({
        "parameters": p.parameters,
        "quantities": p.quantities.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
        "rows": p.rows.iter().map(|r| complexes(r)).collect::<Vec<_>>(),
    })
}

/// Columns: t, then `<quantity>.re`, `<quantity>.im` for every tracked invariant.
pub fn profile_csv(p: &InvariantProfile) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    for q in &p.quantities {
        header.push(format!("{q}.re"));
        header.push(format!("{q}.im"));
    }
    w.write_record(&header).expect("in-memory write");
    for (t, row) in p.parameters.iter().zip(&p.rows) {
        let mut rec = vec![t.to_string()];
        for z in row {
            rec.push(z.re.to_string());
            rec.push(z.im.to_string());
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub(crate) fn exponent_check_json(c: &ExponentCheck) -> Value {
    match c {
        ExponentCheck::Deviation(d) => json!({ "deviation": d }),
        ExponentCheck::NotApplicable(why) => json!({ "not_applicable": why }),
    }
}

pub(crate) fn prop0_config_json(cfg: &Prop0Config) -> Value {
    json!({
        "s0": complexes(&cfg.s0.x()),
        "halphen": { "a": complex_json(cfg.halphen.a), "b": complex_json(cfg.halphen.b), "c": complex_json(cfg.halphen.c) },
        "S": matrix_json(&cfg.lax.s),
        "lambda": complexes(&cfg.lax.lambda),
        "mu": complex_json(cfg.lax.mu),
        "grid": cfg.grid,
    })
}

pub(crate) fn prop0_json(r: &Prop0Report) -> Value {
    let samples: Vec<Value> = r
        .samples
        .iter()
        .map(|s| {
            json!({
                "t": s.t,
                "poles": complexes(&s.state.x()),
                "monodromy": s.monodromy.entries.iter().map(|e| matrix_json(&e.matrix)).collect::<Vec<_>>(),
                "alpha_integral": complexes(&s.alpha_integral),
                "predicted": complexes(&s.predicted),
                "twist_scalar": complexes(&s.twist_scalar),
                "extracted": complexes(&s.extracted),
                "scalar_residual": s.scalar_residual,
                "mismatch": s.mismatch,
                "twist_mismatch": s.twist_mismatch,
            })
        })
        .collect();
    json!({
        "reference": r.reference.iter().map(matrix_json).collect::<Vec<_>>(),
        "sign_convention": r.sign.as_str(),
        "max_direct_mismatch": r.max_direct_mismatch,
        "max_inverse_mismatch": r.max_inverse_mismatch,
        "max_scalar_residual": r.max_scalar_residual,
        "max_mismatch": r.max_mismatch,
        "max_twist_mismatch": r.max_twist_mismatch,
        "samples": samples,
    })
}
