//! JSON formats: the canonical system input, certificate and witness
//! documents, and the complexity report.
//!
//! System input:
//! ```json
//! { "dim": 2, "locations": ["l1","l2"],
//!   "transitions": [ {"from":"l1","to":"l2","update":[-1,1]} ] }
//! ```
//! Updates are arrays of exactly `dim` integers; duplicate transitions are
//! allowed and get distinct ids in input order. Certificates reference
//! locations by name and transitions by id. Integers of any size are
//! written as plain JSON number literals.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cert::{CycleWitness, LevelNode, RankingCertificate, Verdict};
use crate::complexity::{ComplexityReport, LinearVerdict, UpperBound};
use crate::model::{ModelError, Path, TransId, Vass};
use crate::rat::{rat_display, Int};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("{0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Shape { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Certificate documents can be structurally fine but name locations or
/// transitions that the system does not have; those are binding errors and
/// are reported as rejections rather than parse failures.
#[derive(Debug, Error)]
pub enum CertParseError {
    #[error(transparent)]
    Malformed(#[from] JsonError),
    #[error("certificate does not match the system: {0}")]
    Binding(String),
}

fn shape(path: impl Into<String>, message: impl Into<String>) -> JsonError {
    JsonError::Shape {
        path: path.into(),
        message: message.into(),
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, JsonError> {
    v.as_object().ok_or_else(|| shape(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, JsonError> {
    v.as_array().ok_or_else(|| shape(path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str, JsonError> {
    v.as_str().ok_or_else(|| shape(path, "expected a string"))
}

fn get<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, JsonError> {
    m.get(key)
        .ok_or_else(|| shape(path, format!("missing field {key:?}")))
}

fn value_to_int(v: &Value, path: &str) -> Result<Int, JsonError> {
    match v {
        Value::Number(n) => Int::from_str(&n.to_string())
            .map_err(|_| shape(path, format!("expected an integer, got {n}"))),
        _ => Err(shape(path, "expected an integer")),
    }
}

fn int_to_value(x: &Int) -> Value {
    let n = serde_json::Number::from_str(&x.to_string()).expect("integer literal");
    Value::Number(n)
}

fn value_to_usize(v: &Value, path: &str) -> Result<usize, JsonError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| shape(path, "expected a nonnegative integer"))
}

/// Parses the canonical system JSON.
pub fn parse_vass(text: &str) -> Result<Vass, JsonError> {
    let root: Value = serde_json::from_str(text)?;
    let obj = as_object(&root, "$")?;
    let dim = value_to_usize(get(obj, "dim", "$")?, "$.dim")?;
    let locations = as_array(get(obj, "locations", "$")?, "$.locations")?
        .iter()
        .enumerate()
        .map(|(i, v)| Ok(as_str(v, &format!("$.locations[{i}]"))?.to_string()))
        .collect::<Result<Vec<_>, JsonError>>()?;
    let transitions = as_array(get(obj, "transitions", "$")?, "$.transitions")?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let path = format!("$.transitions[{i}]");
            let t = as_object(v, &path)?;
            let from = as_str(get(t, "from", &path)?, &format!("{path}.from"))?.to_string();
            let to = as_str(get(t, "to", &path)?, &format!("{path}.to"))?.to_string();
            let update = as_array(get(t, "update", &path)?, &format!("{path}.update"))?
                .iter()
                .enumerate()
                .map(|(j, u)| value_to_int(u, &format!("{path}.update[{j}]")))
                .collect::<Result<Vec<_>, JsonError>>()?;
            Ok((from, to, update))
        })
        .collect::<Result<Vec<_>, JsonError>>()?;
    Ok(Vass::new(dim, locations, transitions)?)
}

/// Canonical pretty-printed system JSON; `parse_vass` inverts it.
pub fn vass_to_json(vass: &Vass) -> String {
    let transitions: Vec<Value> = vass
        .transitions()
        .iter()
        .map(|tr| {
            json!({
                "from": vass.location_name(tr.source),
                "to": vass.location_name(tr.target),
                "update": tr.update.iter().map(int_to_value).collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = json!({
        "dim": vass.dim(),
        "locations": vass.locations(),
        "transitions": transitions,
    });
    serde_json::to_string_pretty(&doc).expect("serializable")
}

fn level_to_value(vass: &Vass, node: &LevelNode) -> Value {
    let scope: Vec<&str> = node.scope.iter().map(|&l| vass.location_name(l)).collect();
    let z: Map<String, Value> = node
        .z
        .iter()
        .map(|(&l, x)| (vass.location_name(l).to_string(), int_to_value(x)))
        .collect();
    json!({
        "scope": scope,
        "r": node.r.iter().map(int_to_value).collect::<Vec<_>>(),
        "z": z,
        "children": node.children.iter().map(|c| level_to_value(vass, c)).collect::<Vec<_>>(),
    })
}

/// Serializes an analysis verdict to the certificate document.
pub fn verdict_to_json(vass: &Vass, verdict: &Verdict) -> String {
    let doc = match verdict {
        Verdict::Terminating(cert) => {
            let levels = cert
                .root
                .as_ref()
                .map(|n| level_to_value(vass, n))
                .unwrap_or(Value::Null);
            let transition_levels: Map<String, Value> = cert
                .transition_levels
                .iter()
                .map(|(t, l)| (t.to_string(), json!(l)))
                .collect();
            json!({
                "verdict": "terminating",
                "order": cert.order,
                "levels": levels,
                "transition_levels": transition_levels,
            })
        }
        Verdict::NonTerminating(w) => json!({
            "verdict": "non_terminating",
            "witness": {
                "start": vass.location_name(w.start),
                "transitions": w.cycle.steps,
            },
        }),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

/// A certificate document bound to a concrete system.
#[derive(Debug, Clone)]
pub enum ParsedCertificate {
    Ranking(RankingCertificate),
    Witness(CycleWitness),
}

/// Parses a certificate document and resolves its names against a system.
pub fn parse_certificate(vass: &Vass, text: &str) -> Result<ParsedCertificate, CertParseError> {
    let root: Value = serde_json::from_str(text).map_err(JsonError::from)?;
    let obj = as_object(&root, "$")?;
    match as_str(get(obj, "verdict", "$")?, "$.verdict")? {
        "terminating" => {
            let order = value_to_usize(get(obj, "order", "$")?, "$.order")?;
            let levels = get(obj, "levels", "$")?;
            let node = match levels {
                Value::Null => None,
                v => Some(parse_level(vass, v, "$.levels")?),
            };
            let tl_value = get(obj, "transition_levels", "$")?;
            let tl_obj = as_object(tl_value, "$.transition_levels")?;
            let mut transition_levels = BTreeMap::new();
            for (k, v) in tl_obj {
                let t: TransId = k.parse().map_err(|_| {
                    CertParseError::Binding(format!("transition key {k:?} is not an id"))
                })?;
                if t >= vass.transitions().len() {
                    return Err(CertParseError::Binding(format!(
                        "transition id {t} out of range"
                    )));
                }
                let level =
                    value_to_usize(v, &format!("$.transition_levels[{k}]")).map_err(JsonError::from)?;
                transition_levels.insert(t, level);
            }
            Ok(ParsedCertificate::Ranking(RankingCertificate {
                root: node,
                transition_levels,
                order,
            }))
        }
        "non_terminating" => {
            let w = as_object(get(obj, "witness", "$")?, "$.witness")?;
            let start_name = as_str(get(w, "start", "$.witness")?, "$.witness.start")?;
            let start = vass.location_id(start_name).ok_or_else(|| {
                CertParseError::Binding(format!("unknown location {start_name:?}"))
            })?;
            let steps = as_array(get(w, "transitions", "$.witness")?, "$.witness.transitions")?
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    value_to_usize(v, &format!("$.witness.transitions[{i}]"))
                        .map_err(CertParseError::from)
                        .and_then(|t| {
                            if t < vass.transitions().len() {
                                Ok(t)
                            } else {
                                Err(CertParseError::Binding(format!(
                                    "transition id {t} out of range"
                                )))
                            }
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let cycle = Path::new(steps);
            let value = vass
                .path_value(&cycle)
                .unwrap_or_else(|_| vec![Int::from(0); vass.dim()]);
            Ok(ParsedCertificate::Witness(CycleWitness {
                start,
                cycle,
                value,
            }))
        }
        other => Err(CertParseError::Malformed(shape(
            "$.verdict",
            format!("unknown verdict {other:?}"),
        ))),
    }
}

fn parse_level(vass: &Vass, v: &Value, path: &str) -> Result<LevelNode, CertParseError> {
    let obj = as_object(v, path)?;
    let mut scope = std::collections::BTreeSet::new();
    for (i, s) in as_array(get(obj, "scope", path)?, &format!("{path}.scope"))?
        .iter()
        .enumerate()
    {
        let name = as_str(s, &format!("{path}.scope[{i}]"))?;
        let l = vass
            .location_id(name)
            .ok_or_else(|| CertParseError::Binding(format!("unknown location {name:?}")))?;
        scope.insert(l);
    }
    let r = as_array(get(obj, "r", path)?, &format!("{path}.r"))?
        .iter()
        .enumerate()
        .map(|(i, x)| value_to_int(x, &format!("{path}.r[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let mut z = BTreeMap::new();
    for (name, x) in as_object(get(obj, "z", path)?, &format!("{path}.z"))? {
        let l = vass
            .location_id(name)
            .ok_or_else(|| CertParseError::Binding(format!("unknown location {name:?}")))?;
        z.insert(l, value_to_int(x, &format!("{path}.z[{name}]"))?);
    }
    let children = as_array(get(obj, "children", path)?, &format!("{path}.children"))?
        .iter()
        .enumerate()
        .map(|(i, c)| parse_level(vass, c, &format!("{path}.children[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LevelNode {
        scope,
        r,
        z,
        children,
    })
}

/// Report JSON for the complexity command.
pub fn report_to_json(report: &ComplexityReport) -> String {
    let power = |k: usize| format!("N^{k}");
    let linear = match &report.linear {
        None => Value::Null,
        Some(LinearVerdict::ExactLinear(c)) => Value::String(rat_display(c)),
        Some(LinearVerdict::AtLeastQuadratic) => Value::String("at_least_quadratic".into()),
        Some(LinearVerdict::NotApplicable) => Value::String("not_applicable".into()),
    };
    let doc = json!({
        "terminating": report.terminating,
        "order": report.order,
        "conservative": report.conservative,
        "conservative_generalized": report.conservative_generalized,
        "theta": report.theta().map(power),
        "lower": report.lower.map(power),
        "upper": match &report.upper {
            UpperBound::PolyOrder(k) => Value::String(power(*k)),
            UpperBound::Unknown => Value::Null,
        },
        "linear": linear,
        "bound": report.bound.as_ref().map(|b| {
            b.factors
                .iter()
                .map(|f| format!("{}N+{}", f.coefficient, f.offset))
                .collect::<Vec<_>>()
        }),
    });
    serde_json::to_string_pretty(&doc).expect("serializable")
}
