//! JSON rendering of reports and Husimi suprema.

use ncd_core::bounds::{Bound, BoundReport, Witness};
use ncd_core::husimi::QSupremum;
use ncd_core::states::{ClassicalEnsemble, ClassicalKind};
use ncd_core::{CoherentPoint, C64};
use serde_json::{json, Value};

fn complex(z: &C64) -> Value {
    json!([z.re, z.im])
}

fn point(p: &CoherentPoint) -> Value {
    Value::Array(p.amplitudes().iter().map(complex).collect())
}

pub fn ensemble(e: &ClassicalEnsemble) -> Value {
    let comps: Vec<Value> = e
        .components()
        .iter()
        .map(|c| match &c.kind {
            ClassicalKind::Coherent(a) => {
                json!({"weight": c.weight, "kind": "coherent", "alpha": point(a)})
            }
            ClassicalKind::PhaseRing { center, groups } => json!({
                "weight": c.weight,
                "kind": "phase_ring",
                "center": point(center),
                "groups": groups,
            }),
        })
        .collect();
    json!({"modes": e.modes(), "components": comps})
}

fn witness(w: &Witness) -> Value {
    match w {
        Witness::Ensemble(e) => json!({"type": "ensemble", "ensemble": ensemble(e)}),
        Witness::Point(p) => json!({"type": "point", "alpha": point(p)}),
    }
}

pub fn bound(b: &Bound) -> Value {
    json!({
        "name": b.name,
        "value": b.value,
        "provenance": b.provenance,
        "witness": b.witness.as_ref().map(witness),
    })
}

pub fn qsup(q: &QSupremum) -> Value {
    json!({
        "value": q.value,
        "argmax": q.argmax.iter().map(point).collect::<Vec<_>>(),
        "method": q.method.as_str(),
        "certificate": q.certificate,
    })
}

pub fn report(r: &BoundReport) -> Value {
    json!({
        "state_id": r.state_id,
        "lowers": r.lowers.iter().map(bound).collect::<Vec<_>>(),
        "uppers": r.uppers.iter().map(bound).collect::<Vec<_>>(),
        "best_lower": r.best_lower,
        "best_upper": r.best_upper,
        "exact": r.exact,
        "q": qsup(&r.q),
        "saturation": r.saturation.as_ref().map(|s| json!({
            "eigenvalue": s.eigenvalue,
            "eigen_residual": s.eigen_residual,
            "min_component_q": s.min_component_q,
            "m": s.m,
        })),
        "skipped": r.skipped,
    })
}
