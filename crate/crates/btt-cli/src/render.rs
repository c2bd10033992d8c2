//! JSON and text rendering. Every numeric value is emitted as an exact
//! string, never a decimal; serde_json's sorted object keys keep the bytes
//! stable for fixed inputs.

use num_traits::{One, ToPrimitive};
use serde_json::{json, Value};

use btt_core::field::ValuedField;
use btt_core::latnorm::{AdaptedNorm, Lattice, Prevaluation};
use btt_core::matrix::Matrix;
use btt_core::pamap::{
    GluingReport, KlyachkoRay, LinearPart, MorphismVerdict, MorphismWitness, SplitCertificate,
    SplitVerdict,
};
use btt_core::polyhedral::{CharacterVector, ComplexReport, QPoint, RayDir};
use btt_core::tree::{TreePath, VertexClass};
use btt_core::BigRational;

pub fn rational_str(q: &BigRational) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn matrix_json<F: ValuedField>(f: &F, m: &Matrix<F::Elem>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    (0..m.cols())
                        .map(|j| Value::String(f.format_elem(m.at(i, j))))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn vector_json<F: ValuedField>(f: &F, v: &[F::Elem]) -> Value {
    Value::Array(v.iter().map(|c| Value::String(f.format_elem(c))).collect())
}

pub fn point_json(p: &QPoint) -> Value {
    Value::Array(
        p.coords
            .iter()
            .map(|c| Value::String(rational_str(c)))
            .collect(),
    )
}

pub fn ray_json(r: &RayDir) -> Value {
    Value::Array(
        r.coords()
            .iter()
            .map(|c| {
                Value::Number(serde_json::Number::from(
                    c.to_i64().expect("ray coordinate fits i64"),
                ))
            })
            .collect(),
    )
}

pub fn char_json(u: &CharacterVector) -> Value {
    Value::Array(
        u.entries
            .iter()
            .map(|c| {
                Value::Number(serde_json::Number::from(
                    c.to_i64().expect("character entry fits i64"),
                ))
            })
            .collect(),
    )
}

pub fn norm_json<F: ValuedField>(f: &F, n: &AdaptedNorm<F>) -> Value {
    json!({
        "basis": matrix_json(f, n.basis()),
        "values": n.values().iter().map(rational_str).collect::<Vec<_>>(),
    })
}

pub fn lattice_json<F: ValuedField>(f: &F, l: &Lattice<F>) -> Value {
    json!({
        "generators": matrix_json(f, l.generators()),
        "pivots": l.pivot_exponents(),
    })
}

pub fn vertex_class_json<F: ValuedField>(f: &F, v: &VertexClass<F>) -> Value {
    matrix_json(f, v.representative().generators())
}

pub fn prevaluation_json<F: ValuedField>(f: &F, p: &Prevaluation<F>) -> Value {
    json!({
        "basis": matrix_json(f, p.basis()),
        "values": p.values().iter().map(rational_str).collect::<Vec<_>>(),
    })
}

pub fn klyachko_json<F: ValuedField>(f: &F, kr: &KlyachkoRay<F>) -> Value {
    json!({
        "ray": ray_json(&kr.ray),
        "filtration": kr.filtration.iter().map(|(j, s)| json!({
            "j": j,
            "subspace": matrix_json(f, s),
        })).collect::<Vec<_>>(),
    })
}

pub fn linear_part_json<F: ValuedField>(f: &F, lp: &LinearPart<F>) -> Value {
    json!({
        "klyachko": lp.klyachko.iter().map(|kr| klyachko_json(f, kr)).collect::<Vec<_>>(),
        "directions": lp.directions.iter().map(|(cell, ray, pv)| json!({
            "cell": cell,
            "ray": ray_json(ray),
            "prevaluation": prevaluation_json(f, pv),
        })).collect::<Vec<_>>(),
    })
}

pub fn split_verdict_json<F: ValuedField>(f: &F, v: &SplitVerdict<F>) -> Value {
    match v {
        SplitVerdict::Split { frame } => json!({
            "verdict": "split",
            "frame": matrix_json(f, frame),
        }),
        SplitVerdict::NotSplit { certificate } => json!({
            "verdict": "not_split",
            "certificate": match certificate {
                SplitCertificate::Tripod(center) => json!({
                    "type": "tripod",
                    "vertex": vertex_class_json(f, center),
                }),
                SplitCertificate::IncompatibleEnd { line, vertex } => json!({
                    "type": "incompatible_end",
                    "line": vector_json(f, line.line()),
                    "vertex": vertex_class_json(f, vertex),
                }),
                SplitCertificate::TooManyEnds(lines) => json!({
                    "type": "too_many_ends",
                    "lines": lines.iter().map(|l| vector_json(f, l.line())).collect::<Vec<_>>(),
                }),
                SplitCertificate::Distributivity { first, second, third } => json!({
                    "type": "distributivity",
                    "first": lattice_json(f, first),
                    "second": lattice_json(f, second),
                    "third": lattice_json(f, third),
                }),
            },
        }),
        SplitVerdict::Unknown { note } => json!({
            "verdict": "unknown",
            "note": note,
        }),
    }
}

pub fn morphism_json(v: &MorphismVerdict) -> Value {
    match &v.witness {
        None => json!({ "is_morphism": v.holds }),
        Some(MorphismWitness::Vertex { vertex, weight }) => json!({
            "is_morphism": v.holds,
            "witness": {
                "type": "vertex",
                "vertex": point_json(vertex),
                "weight": char_json(weight),
            },
        }),
        Some(MorphismWitness::Ray { ray, level }) => json!({
            "is_morphism": v.holds,
            "witness": {
                "type": "ray",
                "ray": ray_json(ray),
                "level": level,
            },
        }),
    }
}

pub fn validation_json(complex: &ComplexReport, gluing: Option<&GluingReport>) -> Value {
    let ok = complex.violations.is_empty() && gluing.map_or(true, |g| g.ok());
    json!({
        "ok": ok,
        "complex_violations": complex
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>(),
        "gluing_failures": gluing
            .map(|g| g.failures.iter().map(|f| f.to_string()).collect::<Vec<_>>())
            .unwrap_or_default(),
        "warnings": gluing
            .map(|g| g.warnings.clone())
            .unwrap_or_default(),
    })
}

pub fn tree_path_json<F: ValuedField>(f: &F, p: &TreePath<F>) -> Value {
    json!({
        "distance": p.len_edges(),
        "path": p
            .vertices
            .iter()
            .map(|v| vertex_class_json(f, v))
            .collect::<Vec<_>>(),
    })
}

/// Render a JSON value either as canonical JSON or as indented lines of
/// text, depending on the requested format.
pub fn emit(value: &Value, format: &str) -> String {
    match format {
        "text" => {
            let mut out = String::new();
            fn walk(v: &Value, indent: usize, out: &mut String) {
                let pad = "  ".repeat(indent);
                match v {
                    Value::Object(map) => {
                        for (k, val) in map {
                            match val {
                                Value::Object(_) | Value::Array(_) => {
                                    out.push_str(&format!("{}{}:\n", pad, k));
                                    walk(val, indent + 1, out);
                                }
                                _ => out.push_str(&format!("{}{}: {}\n", pad, k, val)),
                            }
                        }
                    }
                    Value::Array(items) => {
                        for item in items {
                            match item {
                                Value::Object(_) | Value::Array(_) => {
                                    out.push_str(&format!("{}-\n", pad));
                                    walk(item, indent + 1, out);
                                }
                                _ => out.push_str(&format!("{}- {}\n", pad, item)),
                            }
                        }
                    }
                    other => out.push_str(&format!("{}{}\n", pad, other)),
                }
            }
            walk(value, 0, &mut out);
            out
        }
        _ => format!(
            "{}\n",
            serde_json::to_string_pretty(value).expect("serializable")
        ),
    }
}
