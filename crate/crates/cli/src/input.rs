//! Loading instances from JSON files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use bstone_core::basicmaps::DiscreteMap;
use bstone_core::exact::{fmt_gauss, parse_q, GaussQ};
use bstone_core::funcrel::{AnyFamily, BlackBoxMap, DiscreteFamily, FamilyJson};
use bstone_core::haarconv::{HaarJson, HaarSystem, MeasureJson, UnitMeasure};
use bstone_core::steinberg::{FiniteGroupoid, GroupoidJson, RingSpec};

use crate::report::InputError;

type Res<T> = Result<T, InputError>;

/// Rewrites `{"re": .., "im": ..}` objects as Gaussian strings so every
/// loader accepts either form.
fn normalize(v: Value) -> Res<Value> {
    Ok(match v {
        Value::Object(m) if m.len() == 2 && m.contains_key("re") && m.contains_key("im") => {
            let part = |k: &str| -> Res<_> {
                match &m[k] {
                    Value::String(s) => Ok(parse_q(s)?),
                    Value::Number(n) => Ok(parse_q(&n.to_string())?),
                    other => Err(InputError(format!("bad Gaussian component {other}"))),
                }
            };
            Value::String(fmt_gauss(&GaussQ::new(part("re")?, part("im")?)))
        }
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| Ok((k, normalize(v)?))).collect::<Res<_>>()?),
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect::<Res<_>>()?),
        other => other,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Res<T> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    serde_json::from_value(normalize(v)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

pub fn load_family(path: &Path) -> Res<AnyFamily> {
    Ok(read_json::<FamilyJson>(path)?.load()?)
}

#[derive(Debug, Deserialize)]
struct MapFile {
    source: FamilyJson,
    #[serde(default)]
    target: Option<FamilyJson>,
    /// Value vectors of `T f` for each source member, in member order.
    #[serde(default)]
    images: Option<Vec<Vec<String>>>,
    /// Index of `T f` in the target family for each source member.
    #[serde(default)]
    mapping: Option<Vec<usize>>,
}

fn discrete(f: AnyFamily, side: &str) -> Res<DiscreteFamily<String>> {
    match f {
        AnyFamily::Discrete(d) => Ok(d),
        AnyFamily::Pl(_) => Err(InputError(format!("{side} family must be discrete"))),
    }
}

/// Family of the given images, with values in first-seen order.
fn image_family(images: &[Vec<String>], theta: usize) -> Res<DiscreteFamily<String>> {
    let mut codomain: Vec<String> = Vec::new();
    for v in images.iter().flatten() {
        if !codomain.contains(v) {
            codomain.push(v.clone());
        }
    }
    let j = FamilyJson::Discrete {
        space: None,
        points: Some(images.first().map_or(0, Vec::len)),
        codomain,
        theta: images.get(theta).cloned().ok_or_else(|| InputError("no images".into()))?,
        members: images.to_vec(),
    };
    discrete(j.load()?, "target")
}

pub fn load_map(path: &Path) -> Res<DiscreteMap<String, String>> {
    let m: MapFile = read_json(path)?;
    let source = discrete(m.source.load()?, "source")?;
    match (m.images, m.mapping) {
        (Some(images), None) => {
            let target = match m.target {
                Some(t) => discrete(t.load()?, "target")?,
                None => image_family(&images, source.theta_index())?,
            };
            BlackBoxMap::from_images(source, target, &images).map_err(|e| InputError(e.to_string()))
        }
        (None, Some(mapping)) => {
            let target = m.target.ok_or_else(|| InputError("a mapping needs a target family".into()))?;
            BlackBoxMap::new(source, discrete(target.load()?, "target")?, mapping).map_err(|e| InputError(e.to_string()))
        }
        _ => Err(InputError("give exactly one of `images` and `mapping`".into())),
    }
}

/// One object for both sides, or `{"source": .., "target": ..}`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Sided<T> {
    Both { source: T, target: T },
    Same(T),
}

fn read_sided<T: DeserializeOwned + Clone>(path: &Path) -> Res<(T, T)> {
    Ok(match read_json::<Sided<T>>(path)? {
        Sided::Both { source, target } => (source, target),
        Sided::Same(t) => (t.clone(), t),
    })
}

pub fn load_groupoids(path: &Path) -> Res<(FiniteGroupoid, FiniteGroupoid)> {
    let (s, t) = read_sided::<GroupoidJson>(path)?;
    Ok((FiniteGroupoid::from_json(&s)?, FiniteGroupoid::from_json(&t)?))
}

pub fn load_haar(path: Option<&Path>, g: &FiniteGroupoid, h: &FiniteGroupoid) -> Res<(HaarSystem, HaarSystem)> {
    let Some(path) = path else {
        return Ok((HaarSystem::counting(g), HaarSystem::counting(h)));
    };
    let (s, t) = read_sided::<HaarJson>(path)?;
    Ok((HaarSystem::from_json(g, &s)?, HaarSystem::from_json(h, &t)?))
}

pub fn load_measures(path: &Path, g: &FiniteGroupoid, h: &FiniteGroupoid) -> Res<(UnitMeasure, UnitMeasure)> {
    let (s, t) = read_sided::<MeasureJson>(path)?;
    Ok((UnitMeasure::from_json(g, &s)?, UnitMeasure::from_json(h, &t)?))
}

#[derive(Debug, Clone, Deserialize)]
pub struct DensityFile {
    pub source: Vec<String>,
    pub target: Vec<String>,
}

pub fn load_density(path: &Path) -> Res<DensityFile> {
    read_json(path)
}

/// `Z`, `Z/n`, or a product `Z/2xZ/3` (also `×`).
pub fn parse_ring(s: &str) -> Res<RingSpec> {
    let t = s.trim();
    if t == "Z" {
        return Ok(RingSpec::Integer);
    }
    let moduli = t
        .split(['x', '×', '*'])
        .map(|part| {
            part.trim()
                .strip_prefix("Z/")
                .and_then(|n| n.trim().parse::<u64>().ok())
                .ok_or_else(|| InputError(format!("bad ring {s:?}")))
        })
        .collect::<Res<Vec<u64>>>()?;
    let ring = match moduli.as_slice() {
        [n] => RingSpec::zn(*n),
        _ => RingSpec::Product { moduli },
    };
    ring.validate()?;
    Ok(ring)
}

/// Arrow-name keyed view of per-arrow values.
pub fn by_name<T>(g: &FiniteGroupoid, values: impl IntoIterator<Item = T>) -> BTreeMap<String, T> {
    g.names().iter().cloned().zip(values).collect()
}
