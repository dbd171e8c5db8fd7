//! JSON state descriptions.
//!
//! ```json
//! {"kind": "cat", "parity": "odd", "beta": 1.2, "trunc": {"cutoffs": [40], "tail_tol": 1e-12}}
//! ```
//!
//! Complex numbers are `[re, im]` pairs; a bare number is read as real.
//! Unknown fields are rejected. Errors carry the JSON pointer of the
//! offending value.

use std::fmt;

use ncd_core::states::{CatParams, Parity, StateSpec};
use ncd_core::{CoherentPoint, TruncationSpec, C64};
use serde_json::{Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() {
            "/"
        } else {
            &self.pointer
        };
        write!(f, "{at}: {}", self.message)
    }
}

impl std::error::Error for SchemaError {}

/// Truncation fields given in the document; missing ones fall back to the
/// command-line flags and then to the recipe defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TruncFields {
    pub cutoffs: Option<Vec<usize>>,
    pub tail_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedState {
    pub spec: StateSpec,
    pub trunc: TruncFields,
}

impl ParsedState {
    /// Flags override the document, the document overrides the defaults.
    /// `cutoff` applies to every mode.
    pub fn truncation(
        &self,
        cutoff: Option<usize>,
        tail_tol: Option<f64>,
    ) -> ncd_core::Result<TruncationSpec> {
        let base = self.spec.default_trunc()?;
        let cutoffs = match (cutoff, &self.trunc.cutoffs) {
            (Some(n), _) => vec![n; self.spec.modes()],
            (None, Some(c)) => c.clone(),
            (None, None) => base.cutoffs().to_vec(),
        };
        let tol = tail_tol.or(self.trunc.tail_tol).unwrap_or(base.tail_tol());
        TruncationSpec::new(cutoffs, tol)
    }
}

fn err(pointer: &str, message: impl Into<String>) -> SchemaError {
    SchemaError {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

fn child(pointer: &str, key: &str) -> String {
    format!("{pointer}/{}", key.replace('~', "~0").replace('/', "~1"))
}

struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: String,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, path: &str) -> Result<Self, SchemaError> {
        match v {
            Value::Object(map) => Ok(Obj {
                map,
                path: path.to_string(),
            }),
            _ => Err(err(path, "expected an object")),
        }
    }

    fn at(&self, key: &str) -> String {
        child(&self.path, key)
    }

    fn only(&self, allowed: &[&str]) -> Result<(), SchemaError> {
        match self.map.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(err(
                &self.at(k),
                format!("unknown field; expected one of {allowed:?}"),
            )),
            None => Ok(()),
        }
    }

    fn req(&self, key: &str) -> Result<&'a Value, SchemaError> {
        self.map
            .get(key)
            .ok_or_else(|| err(&self.path, format!("missing field \"{key}\"")))
    }

    fn f64(&self, key: &str) -> Result<f64, SchemaError> {
        number(self.req(key)?, &self.at(key))
    }

    fn usize(&self, key: &str) -> Result<usize, SchemaError> {
        count(self.req(key)?, &self.at(key))
    }

    fn str(&self, key: &str) -> Result<&'a str, SchemaError> {
        self.req(key)?
            .as_str()
            .ok_or_else(|| err(&self.at(key), "expected a string"))
    }

    fn array(&self, key: &str) -> Result<&'a Vec<Value>, SchemaError> {
        self.req(key)?
            .as_array()
            .ok_or_else(|| err(&self.at(key), "expected an array"))
    }

    fn complex_vec(&self, key: &str) -> Result<Vec<C64>, SchemaError> {
        let arr = self.array(key)?;
        if arr.is_empty() {
            return Err(err(&self.at(key), "expected at least one mode"));
        }
        arr.iter()
            .enumerate()
            .map(|(i, v)| complex(v, &child(&self.at(key), &i.to_string())))
            .collect()
    }
}

fn number(v: &Value, path: &str) -> Result<f64, SchemaError> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(err(path, "expected a finite number")),
    }
}

fn count(v: &Value, path: &str) -> Result<usize, SchemaError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| err(path, "expected a non-negative integer"))
}

fn complex(v: &Value, path: &str) -> Result<C64, SchemaError> {
    if let Some(x) = v.as_f64() {
        return Ok(C64::new(x, 0.0));
    }
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(C64::new(
            number(re, &child(path, "0"))?,
            number(im, &child(path, "1"))?,
        )),
        _ => Err(err(path, "expected a complex number [re, im]")),
    }
}

fn unit_interval(x: f64, path: &str) -> Result<f64, SchemaError> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(err(path, format!("{x} is outside [0, 1]")))
    }
}

fn cat_params(o: &Obj) -> Result<CatParams, SchemaError> {
    let parity = match o.str("parity")? {
        "even" => Parity::Even,
        "odd" => Parity::Odd,
        other => {
            return Err(err(
                &o.at("parity"),
                format!("expected \"even\" or \"odd\", got \"{other}\""),
            ))
        }
    };
    let beta = o.f64("beta")?;
    CatParams::new(parity, beta).map_err(|e| err(&o.at("beta"), e.to_string()))
}

fn parse_trunc(v: &Value, path: &str) -> Result<TruncFields, SchemaError> {
    let o = Obj::new(v, path)?;
    o.only(&["cutoffs", "tail_tol"])?;
    let cutoffs = match o.map.get("cutoffs") {
        Some(_) => Some(
            o.array("cutoffs")?
                .iter()
                .enumerate()
                .map(|(i, c)| count(c, &child(&o.at("cutoffs"), &i.to_string())))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let tail_tol = match o.map.get("tail_tol") {
        Some(_) => Some(o.f64("tail_tol")?),
        None => None,
    };
    Ok(TruncFields { cutoffs, tail_tol })
}

fn parse_spec(v: &Value, path: &str, top: bool) -> Result<(StateSpec, TruncFields), SchemaError> {
    let o = Obj::new(v, path)?;
    let kind = o.str("kind")?;
    let with = |fields: &[&str]| {
        let mut all = vec!["kind"];
        if top {
            all.push("trunc");
        }
        all.extend_from_slice(fields);
        o.only(&all)
    };
    let spec = match kind {
        "number" => {
            with(&["ns"])?;
            let ns = o
                .array("ns")?
                .iter()
                .enumerate()
                .map(|(i, n)| count(n, &child(&o.at("ns"), &i.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            if ns.is_empty() {
                return Err(err(&o.at("ns"), "expected at least one mode"));
            }
            StateSpec::Number { ns }
        }
        "single_photon" => {
            with(&["c"])?;
            StateSpec::SinglePhoton {
                c: o.complex_vec("c")?,
            }
        }
        "noon" => {
            with(&["n", "c"])?;
            let n = o.usize("n")?;
            if n == 0 {
                return Err(err(&o.at("n"), "photon number must be at least 1"));
            }
            StateSpec::Noon {
                n,
                c: o.complex_vec("c")?,
            }
        }
        "cat" => {
            with(&["parity", "beta"])?;
            StateSpec::Cat(cat_params(&o)?)
        }
        "entangled_coherent" => {
            with(&["parity", "beta", "eta"])?;
            StateSpec::EntangledCoherent {
                params: cat_params(&o)?,
                eta: unit_interval(o.f64("eta")?, &o.at("eta"))?,
            }
        }
        "coherent" => {
            with(&["alpha"])?;
            StateSpec::Coherent {
                alpha: CoherentPoint(o.complex_vec("alpha")?),
            }
        }
        "phase_randomized" => {
            with(&["n"])?;
            let n = o.f64("n")?;
            if n < 0.0 {
                return Err(err(&o.at("n"), "mean photon number must be non-negative"));
            }
            StateSpec::PhaseRandomized { energy: n }
        }
        "vacuum_number_mixture" => {
            with(&["n", "eta"])?;
            let n = o.usize("n")?;
            if n == 0 {
                return Err(err(&o.at("n"), "photon number must be at least 1"));
            }
            StateSpec::VacuumNumberMixture {
                n,
                eta: unit_interval(o.f64("eta")?, &o.at("eta"))?,
            }
        }
        "mixture" => {
            with(&["terms"])?;
            let arr = o.array("terms")?;
            if arr.is_empty() {
                return Err(err(&o.at("terms"), "expected at least one term"));
            }
            let mut terms = Vec::with_capacity(arr.len());
            for (i, t) in arr.iter().enumerate() {
                let tp = child(&o.at("terms"), &i.to_string());
                let to = Obj::new(t, &tp)?;
                to.only(&["w", "state"])?;
                let w = to.f64("w")?;
                if w < 0.0 {
                    return Err(err(&to.at("w"), "weight must be non-negative"));
                }
                let (s, _) = parse_spec(to.req("state")?, &to.at("state"), false)?;
                terms.push((w, s));
            }
            let modes = terms[0].1.modes();
            if let Some(i) = terms.iter().position(|(_, s)| s.modes() != modes) {
                return Err(err(
                    &child(&o.at("terms"), &i.to_string()),
                    format!(
                        "term has {} modes, the first term has {modes}",
                        terms[i].1.modes()
                    ),
                ));
            }
            let total: f64 = terms.iter().map(|(w, _)| w).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(err(&o.at("terms"), format!("weights sum to {total}")));
            }
            StateSpec::Mixture { terms }
        }
        other => {
            return Err(err(
                &o.at("kind"),
                format!("unknown state kind \"{other}\""),
            ))
        }
    };
    let trunc = match (top, o.map.get("trunc")) {
        (true, Some(t)) => parse_trunc(t, &o.at("trunc"))?,
        _ => TruncFields::default(),
    };
    if let Some(c) = &trunc.cutoffs {
        if c.len() != spec.modes() {
            return Err(err(
                &child(&o.at("trunc"), "cutoffs"),
                format!("{} cutoffs for a {}-mode state", c.len(), spec.modes()),
            ));
        }
    }
    Ok((spec, trunc))
}

pub fn parse_value(v: &Value) -> Result<ParsedState, SchemaError> {
    let (spec, trunc) = parse_spec(v, "", true)?;
    Ok(ParsedState { spec, trunc })
}

pub fn parse_state(text: &str) -> Result<ParsedState, SchemaError> {
    let v: Value = serde_json::from_str(text).map_err(|e| err("", format!("invalid JSON: {e}")))?;
    parse_value(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let p = parse_state(r#"{"kind":"number","ns":[1,1]}"#).unwrap();
        assert_eq!(p.spec, StateSpec::Number { ns: vec![1, 1] });
        let p = parse_state(r#"{"kind":"cat","parity":"odd","beta":1.2}"#).unwrap();
        assert_eq!(p.spec, StateSpec::Cat(CatParams::odd(1.2).unwrap()));
        let p = parse_state(
            r#"{"kind":"mixture","terms":[{"w":0.5,"state":{"kind":"number","ns":[0]}},{"w":0.5,"state":{"kind":"number","ns":[2]}}]}"#,
        )
        .unwrap();
        let t = p.truncation(None, None).unwrap();
        let rho = p.spec.build(&t).unwrap().density();
        let want = ncd_core::states::vacuum_number_mixture(2, 0.5, &t).unwrap();
        assert!((rho.mat() - want.mat()).norm() < 1e-15);
    }

    #[test]
    fn complex_and_trunc_fields() {
        let p = parse_state(
            r#"{"kind":"single_photon","c":[[0.6,0],[0,0.8]],"trunc":{"cutoffs":[2,3],"tail_tol":1e-10}}"#,
        )
        .unwrap();
        assert_eq!(
            p.spec,
            StateSpec::SinglePhoton {
                c: vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]
            }
        );
        let t = p.truncation(None, None).unwrap();
        assert_eq!(t.cutoffs(), &[2, 3]);
        assert_eq!(t.tail_tol(), 1e-10);
        let t = p.truncation(Some(4), Some(1e-8)).unwrap();
        assert_eq!(t.cutoffs(), &[4, 4]);
        assert_eq!(t.tail_tol(), 1e-8);
    }

    #[test]
    fn errors_point_at_the_offending_value() {
        let cases = [
            (r#"{"kind":"cat","parity":"odd"}"#, ""),
            (r#"{"kind":"cat","parity":"sideways","beta":1}"#, "/parity"),
            (r#"{"kind":"cat","parity":"odd","beta":-1}"#, "/beta"),
            (r#"{"kind":"number","ns":[1,-2]}"#, "/ns/1"),
            (r#"{"kind":"coherent","alpha":[[1,"x"]]}"#, "/alpha/0/1"),
            (r#"{"kind":"squeezed"}"#, "/kind"),
            (r#"{"kind":"number","ns":[1],"extra":0}"#, "/extra"),
            (
                r#"{"kind":"vacuum_number_mixture","n":1,"eta":1.5}"#,
                "/eta",
            ),
            (
                r#"{"kind":"mixture","terms":[{"w":1,"state":{"kind":"number","ns":[1],"trunc":{}}}]}"#,
                "/terms/0/state/trunc",
            ),
            (
                r#"{"kind":"mixture","terms":[{"w":0.5,"state":{"kind":"number","ns":[1]}},{"w":0.5,"state":{"kind":"number","ns":[1,0]}}]}"#,
                "/terms/1",
            ),
            (
                r#"{"kind":"mixture","terms":[{"w":0.7,"state":{"kind":"number","ns":[1]}}]}"#,
                "/terms",
            ),
            (
                r#"{"kind":"number","ns":[1],"trunc":{"cutoffs":[1,1]}}"#,
                "/trunc/cutoffs",
            ),
        ];
        for (text, pointer) in cases {
            let e = parse_state(text).unwrap_err();
            assert_eq!(e.pointer, pointer, "{text}: {e}");
        }
    }

    #[test]
    fn pointer_escaping() {
        assert_eq!(child("/a", "x/y~z"), "/a/x~1y~0z");
    }
}
