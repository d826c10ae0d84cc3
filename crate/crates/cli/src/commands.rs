use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde_json::{json, Value};

use bstone_core::basicmaps::{
    basic_phis, basic_violation, extract_transform, is_nonvanishing, nonvanishing_to_homeo, nonvanishing_violation, DiscreteMap,
};
use bstone_core::classify::{
    additive_decompose, kaplansky_recover_phi, scalar_family, weighted_decompose, ChainFamily, ChainMap, ClassifyError, PointDensity, ScalarMap,
    WeightedMode,
};
use bstone_core::exact::{fmt_q, parse_gauss, parse_q};
use bstone_core::fintop::{FiniteSpace, PointSet, SpaceJson};
use bstone_core::funcrel::{AnyFamily, BlackBoxMap, Discrepancy, Item, ItemReport};
use bstone_core::haarconv::{verify_ir_decomposition, verify_measured_decomposition, GaussMap, GaussMapJson, HaarData, MeasuredGroupoid};
use bstone_core::ideals::{kappa_is_homeomorphism, recover_homeo, spectrum, IdealError, DEFAULT_IDEAL_CAP};
use bstone_core::steinberg::{
    decompose_diagonal_preserving, enumerate_aut, AlgebraMap, AlgebraMapJson, Steinberg, SteinbergError, DEFAULT_ENUMERATION_CAP, EXHAUSTIVE_AUT_CAP,
};
use bstone_core::stone::{duality_roundtrip, duality_roundtrip_space, ro_equals_ko, AlgebraJson, GenBoolAlg};
use bstone_core::suite::{run_suite, SuiteConfig, SUITE_IDS};

use crate::input::{by_name, load_density, load_family, load_groupoids, load_haar, load_map, load_measures, parse_ring, read_json};
use crate::report::{gauss_json, InputError, Outcome};

type Res = Result<Outcome, InputError>;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare the semantic relations with their syntactic characterizations.
    VerifyRelations(VerifyRelations),
    /// Build the ideal spectrum of a family, or the point map of a `⊥⊥`-isomorphism.
    Reconstruct(Reconstruct),
    /// Round-trip a Boolean algebra or a space through Stone duality.
    StoneDuality(StoneDuality),
    /// Extract `φ` and the sections of a basic map.
    BasicExtract(BasicExtract),
    /// Decompose a lattice, additive or linear map as a weighted composition.
    ClassifyDecompose(ClassifyDecompose),
    /// Decompose a diagonal-preserving Steinberg algebra isomorphism.
    SteinbergDecompose(SteinbergDecompose),
    /// Enumerate the diagonal-preserving automorphisms of a Steinberg algebra.
    EnumerateAutomorphisms(EnumerateAutomorphisms),
    /// Verify an isometric isomorphism of groupoid convolution algebras.
    HaarVerify(HaarVerify),
    /// Run the seeded self-check suites.
    Suite(Suite),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyRelations(_) => "verify-relations",
            Command::Reconstruct(_) => "reconstruct",
            Command::StoneDuality(_) => "stone-duality",
            Command::BasicExtract(_) => "basic-extract",
            Command::ClassifyDecompose(_) => "classify-decompose",
            Command::SteinbergDecompose(_) => "steinberg-decompose",
            Command::EnumerateAutomorphisms(_) => "enumerate-automorphisms",
            Command::HaarVerify(_) => "haar-verify",
            Command::Suite(_) => "suite",
        }
    }

    pub fn run(&self) -> Res {
        match self {
            Command::VerifyRelations(a) => verify_relations(a),
            Command::Reconstruct(a) => reconstruct(a),
            Command::StoneDuality(a) => stone_duality(a),
            Command::BasicExtract(a) => basic_extract(a),
            Command::ClassifyDecompose(a) => classify_decompose(a),
            Command::SteinbergDecompose(a) => steinberg_decompose(a),
            Command::EnumerateAutomorphisms(a) => enumerate_automorphisms(a),
            Command::HaarVerify(a) => haar_verify(a),
            Command::Suite(a) => suite(a),
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyRelations {
    #[arg(long)]
    family: PathBuf,
    /// Item letters to check, e.g. `ace`.
    #[arg(long, default_value = "abcdef")]
    items: String,
}

fn item_outcome(reports: Vec<ItemReport>) -> Outcome {
    let mut witnesses = Vec::new();
    let mut summary = Vec::new();
    for r in &reports {
        let refuted = r.mismatches.iter().filter(|m| m.kind == Discrepancy::Refuted).count();
        summary.push(json!({
            "item": r.item.letter().to_string(),
            "pairs": r.pairs,
            "refuted": refuted,
            "not_witnessed": r.mismatches.len() - refuted,
        }));
        for m in r.mismatches.iter().filter(|m| m.kind == Discrepancy::Refuted) {
            witnesses.push(json!({ "item": r.item.letter().to_string(), "f": m.f, "g": m.g, "semantic": m.semantic, "syntactic": m.syntactic }));
        }
    }
    Outcome {
        witnesses,
        artifacts: json!({ "items": summary }),
    }
}

fn verify_relations(a: &VerifyRelations) -> Res {
    let items = Item::parse_list(&a.items.to_ascii_lowercase()).ok_or_else(|| InputError(format!("bad item list {:?}", a.items)))?;
    Ok(match load_family(&a.family)? {
        AnyFamily::Discrete(f) => item_outcome(f.check_items(&items, f.len())),
        AnyFamily::Pl(f) => item_outcome(f.check_items(&items, f.len())),
    })
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Reconstruct {
    #[arg(long)]
    family: Option<PathBuf>,
    #[arg(long)]
    map: Option<PathBuf>,
}

fn phi_json(ys: &FiniteSpace, xs: &FiniteSpace, phi: &[usize]) -> Value {
    let m: BTreeMap<String, String> = phi
        .iter()
        .enumerate()
        .map(|(y, &x)| (ys.labels()[y].clone(), xs.labels()[x].clone()))
        .collect();
    json!(m)
}

fn ideal_refutation(e: IdealError) -> Res {
    match e {
        IdealError::NotPerpPerpIso(f, g) => Ok(Outcome::refuted(json!({ "relation": "perp_perp", "f": f, "g": g }), Value::Null)),
        IdealError::NoSuchHomeo => Ok(Outcome::refuted(json!({ "homeomorphism": "none matches the supports" }), Value::Null)),
        IdealError::NotWeaklyRegular | IdealError::NotT1 => Ok(Outcome::refuted(json!({ "hypothesis": e.to_string() }), Value::Null)),
        other => Err(other.into()),
    }
}

fn reconstruct(a: &Reconstruct) -> Res {
    if let Some(path) = &a.map {
        let t = load_map(path)?;
        return match recover_homeo(&t) {
            Ok(h) => Ok(Outcome::verified(json!({
                "phi": phi_json(t.target.space(), t.source.space(), &h.phi),
                "candidates": h.candidates,
            }))),
            Err(e) => ideal_refutation(e),
        };
    }
    let path = a.family.as_ref().expect("clap enforces one input");
    let AnyFamily::Discrete(fam) = load_family(path)? else {
        return Err(InputError("spectra are computed for discrete families".into()));
    };
    let spec = match spectrum(&fam, DEFAULT_IDEAL_CAP) {
        Ok(s) => s,
        Err(e) => return ideal_refutation(e),
    };
    let homeo = kappa_is_homeomorphism(&fam, &spec)?;
    let artifacts = json!({
        "points": spec.points.len(),
        "ideals": spec.points.iter().map(|p| p.members().iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
        "basic_opens": spec.basic_opens.iter().map(|s| s.points().collect::<Vec<_>>()).collect::<Vec<_>>(),
        "space": spec.space.to_json(),
        "kappa_homeomorphism": homeo,
    });
    Ok(if homeo {
        Outcome::verified(artifacts)
    } else {
        Outcome::refuted(json!({ "kappa": "not a homeomorphism onto the spectrum" }), artifacts)
    })
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct StoneDuality {
    /// `{"atoms": n}` or `{"elements": [..], "leq": [[a, b], ..]}`.
    #[arg(long)]
    algebra: Option<PathBuf>,
    /// `{"points": [..], "opens": [[..], ..]}`.
    #[arg(long)]
    space: Option<PathBuf>,
}

fn stone_duality(a: &StoneDuality) -> Res {
    if let Some(path) = &a.algebra {
        let b = GenBoolAlg::from_json(&read_json::<AlgebraJson>(path)?)?;
        let rt = duality_roundtrip(&b)?;
        let artifacts = json!({ "elements": b.len(), "map": rt.map });
        return Ok(if rt.isomorphism {
            Outcome::verified(artifacts)
        } else {
            Outcome::refuted(json!({ "round_trip": "a -> [a] is not an isomorphism" }), artifacts)
        });
    }
    let path = a.space.as_ref().expect("clap enforces one input");
    let x = FiniteSpace::from_json(&read_json::<SpaceJson>(path)?)?;
    let rt = duality_roundtrip_space(&x)?;
    let ro_ko = ro_equals_ko(&x)?;
    let artifacts = json!({ "points": x.len(), "map": rt.map, "ro_equals_ko": ro_ko });
    let mut out = Outcome::verified(artifacts);
    if !rt.isomorphism {
        out.witnesses
            .push(json!({ "round_trip": "x -> ultrafilter of x is not a homeomorphism" }));
    }
    if !ro_ko {
        out.witnesses.push(json!({ "ro_equals_ko": false }));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasicMode {
    Basic,
    Nonvanishing,
}

#[derive(Debug, Args)]
pub struct BasicExtract {
    #[arg(long)]
    map: PathBuf,
    #[arg(long, value_enum, default_value = "basic")]
    mode: BasicMode,
}

fn basic_extract(a: &BasicExtract) -> Res {
    let t = load_map(&a.map)?;
    let (xs, ys) = (t.source.space().clone(), t.target.space().clone());
    if a.mode == BasicMode::Nonvanishing {
        if !is_nonvanishing(&t)? {
            let sub = nonvanishing_violation(&t)?.unwrap_or(0);
            return Ok(Outcome::refuted(
                json!({ "subfamily": PointSet(sub).points().collect::<Vec<_>>() }),
                Value::Null,
            ));
        }
        let phi = nonvanishing_to_homeo(&t)?;
        return Ok(Outcome::verified(json!({ "phi": phi_json(&ys, &xs, &phi) })));
    }
    let phis = basic_phis(&t);
    let Some(phi) = phis.first() else {
        let witness = match recover_homeo(&t).ok().and_then(|h| basic_violation(&t, &h.phi).map(|v| (h.phi, v))) {
            Some((phi, (f, g, y))) => json!({ "phi": phi_json(&ys, &xs, &phi), "f": f, "g": g, "y": ys.labels()[y] }),
            None => json!({ "basic": "no point map makes the map basic" }),
        };
        return Ok(Outcome::refuted(witness, Value::Null));
    };
    let ex = extract_transform(&t, phi)?;
    let sections: BTreeMap<String, Vec<[String; 2]>> = ex
        .transform
        .sections
        .iter()
        .enumerate()
        .map(|(y, s)| (ys.labels()[y].clone(), s.iter().map(|(v, w)| [v.clone(), w.clone()]).collect()))
        .collect();
    Ok(Outcome::verified(json!({
        "phi": phi_json(&ys, &xs, phi),
        "unique": phis.len() == 1,
        "basic_phis": phis.iter().map(|p| phi_json(&ys, &xs, p)).collect::<Vec<_>>(),
        "sections": sections,
        "sections_injective": ex.sections_injective,
        "sections_surjective": ex.sections_surjective,
    })))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifyMode {
    Kaplansky,
    Additive,
    Liwong,
    Jarosz,
    Banachstone,
    L1,
}

#[derive(Debug, Args)]
pub struct ClassifyDecompose {
    #[arg(long)]
    map: PathBuf,
    #[arg(long, value_enum)]
    mode: ClassifyMode,
    /// `{"source": [..], "target": [..]}` point masses, for `l1`.
    #[arg(long)]
    density: Option<PathBuf>,
}

fn classify_refutation(e: ClassifyError) -> Res {
    match e {
        ClassifyError::NotLatticeIso(f, g) => Ok(Outcome::refuted(
            json!({ "lattice": "min/max not preserved", "f": f, "g": g }),
            Value::Null,
        )),
        ClassifyError::FormulaMismatch { f, y } => Ok(Outcome::refuted(json!({ "formula": "mismatch", "f": f, "y": y }), Value::Null)),
        ClassifyError::MissingIndicators(x) => Ok(Outcome::refuted(json!({ "hypothesis": "missing point indicator", "x": x }), Value::Null)),
        ClassifyError::NoConsistentPhi | ClassifyError::HypothesisFailed(_) | ClassifyError::NotBijection => {
            Ok(Outcome::refuted(json!({ "decomposition": e.to_string() }), Value::Null))
        }
        other => Err(other.into()),
    }
}

fn parsed<T>(t: &DiscreteMap<String, String>, parse: impl Fn(&str) -> Result<T, InputError>) -> Result<(Vec<Vec<T>>, Vec<Vec<T>>), InputError> {
    let conv = |members: &[Vec<String>]| {
        members
            .iter()
            .map(|f| f.iter().map(|v| parse(v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()
    };
    Ok((conv(t.source.members())?, conv(t.target.members())?))
}

fn density(values: &[String]) -> Result<PointDensity, InputError> {
    Ok(PointDensity(values.iter().map(|s| parse_q(s)).collect::<Result<_, _>>()?))
}

fn classify_decompose(a: &ClassifyDecompose) -> Res {
    let t = load_map(&a.map)?;
    let (xs, ys) = (t.source.space().clone(), t.target.space().clone());
    let mapping: Vec<usize> = (0..t.len()).map(|i| t.apply(i)).collect();
    let (nx, ny) = (xs.len(), ys.len());
    match a.mode {
        ClassifyMode::Kaplansky | ClassifyMode::Additive => {
            let (src, tgt) = parsed(&t, |s| Ok(parse_q(s)?))?;
            let cm = ChainMap::new(ChainFamily::new(nx, src)?, ChainFamily::new(ny, tgt)?, mapping)?;
            if a.mode == ClassifyMode::Kaplansky {
                return match kaplansky_recover_phi(&cm) {
                    Ok(k) => Ok(Outcome::verified(json!({ "phi": phi_json(&ys, &xs, &k.phi), "bases": k.bases }))),
                    Err(e) => classify_refutation(e),
                };
            }
            match additive_decompose(&cm) {
                Ok(d) => Ok(Outcome::verified(json!({
                    "phi": phi_json(&ys, &xs, &d.phi),
                    "p": d.p.iter().map(fmt_q).collect::<Vec<_>>(),
                }))),
                Err(e) => classify_refutation(e),
            }
        }
        mode => {
            let (src, tgt) = parsed(&t, |s| Ok(parse_gauss(s)?))?;
            let sm: ScalarMap = BlackBoxMap::new(scalar_family(nx, src)?, scalar_family(ny, tgt)?, mapping).map_err(|e| InputError(e.to_string()))?;
            let wm = match mode {
                ClassifyMode::Liwong => WeightedMode::LiWong,
                ClassifyMode::Jarosz => WeightedMode::Jarosz,
                ClassifyMode::Banachstone => WeightedMode::BanachStone,
                _ => {
                    let d = match &a.density {
                        Some(p) => load_density(p)?,
                        None => return Err(InputError("l1 mode needs --density".into())),
                    };
                    WeightedMode::L1 {
                        source: density(&d.source)?,
                        target: density(&d.target)?,
                    }
                }
            };
            match weighted_decompose(&sm, &wm) {
                Ok(d) => Ok(Outcome::verified(json!({
                    "phi": phi_json(&ys, &xs, &d.phi),
                    "p": d.p.iter().map(gauss_json).collect::<Vec<_>>(),
                    "density_ratio": d.density_ratio.map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()),
                    "unit": d.unit.map(|u| u.iter().map(gauss_json).collect::<Vec<_>>()),
                }))),
                Err(e) => classify_refutation(e),
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct SteinbergDecompose {
    /// One groupoid, or `{"source": .., "target": ..}`.
    #[arg(long)]
    groupoid: PathBuf,
    /// `Z`, `Z/n` or a product such as `Z/2xZ/3`.
    #[arg(long)]
    ring: String,
    /// `{"images": {arrow: {arrow: element}}}`, giving `T(1_arrow)`.
    #[arg(long)]
    map: PathBuf,
}

fn steinberg_refutation(e: SteinbergError) -> Res {
    match e {
        SteinbergError::NotDiagonalPreserving(_)
        | SteinbergError::NotRingIso(_)
        | SteinbergError::DecompositionFailed(_)
        | SteinbergError::InvalidCocycle(_)
        | SteinbergError::NotGroupoidIso => Ok(Outcome::refuted(json!({ "decomposition": e.to_string() }), Value::Null)),
        other => Err(other.into()),
    }
}

fn steinberg_decompose(a: &SteinbergDecompose) -> Res {
    let ring = parse_ring(&a.ring)?;
    let (g, h) = load_groupoids(&a.groupoid)?;
    let src = Steinberg::new(g, ring.clone())?;
    let tgt = Steinberg::new(h, ring)?;
    let t = AlgebraMap::from_json(&read_json::<AlgebraMapJson>(&a.map)?, &src, &tgt)?;
    let d = match decompose_diagonal_preserving(&t, &src, &tgt, DEFAULT_ENUMERATION_CAP) {
        Ok(d) => d,
        Err(e) => return steinberg_refutation(e),
    };
    let (gn, hn) = (src.groupoid.names(), tgt.groupoid.names());
    let phi: BTreeMap<String, String> = d.phi.iter().enumerate().map(|(y, &x)| (hn[y].clone(), gn[x].clone())).collect();
    Ok(Outcome::verified(json!({
        "phi": phi,
        "chi": by_name(&src.groupoid, d.chi.multipliers.iter().map(|c| c.to_string())),
        "source_hypothesis": d.source_hypothesis,
        "target_hypothesis": d.target_hypothesis,
    })))
}

#[derive(Debug, Args)]
pub struct EnumerateAutomorphisms {
    #[arg(long)]
    groupoid: PathBuf,
    #[arg(long)]
    ring: String,
}

fn enumerate_automorphisms(a: &EnumerateAutomorphisms) -> Res {
    let ring = parse_ring(&a.ring)?;
    let (g, _) = load_groupoids(&a.groupoid)?;
    let alg = Steinberg::new(g, ring)?;
    let aut = enumerate_aut(&alg, EXHAUSTIVE_AUT_CAP)?;
    let artifacts = json!({
        "order": aut.order(),
        "cocycles": aut.cocycles.len(),
        "groupoid_automorphisms": aut.groupoid_automorphisms.len(),
        "homomorphism": aut.homomorphism,
        "round_trip": aut.round_trip,
        "exhaustive_count": aut.exhaustive_count,
    });
    let mut out = Outcome::verified(artifacts);
    if !aut.homomorphism {
        out.witnesses.push(json!({ "homomorphism": "Θ does not respect the semidirect product" }));
    }
    if !aut.round_trip {
        out.witnesses.push(json!({ "round_trip": "decomposition does not invert Θ" }));
    }
    if let Some(c) = aut.exhaustive_count.filter(|&c| c != aut.order()) {
        out.witnesses.push(json!({ "exhaustive_count": c, "order": aut.order() }));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Norm {
    /// L¹ norms from a Haar system and a measure on the units.
    L1,
    /// The `(I, r)` norm: supremum of fiber integrals.
    Ir,
}

#[derive(Debug, Args)]
pub struct HaarVerify {
    #[arg(long)]
    groupoid: PathBuf,
    /// Weights of both sides; counting measures when omitted.
    #[arg(long)]
    haar: Option<PathBuf>,
    /// Unit measures, needed for `l1`.
    #[arg(long)]
    measure: Option<PathBuf>,
    /// `{"images": {arrow: {arrow: value}}}`, giving `T(1_arrow)`.
    #[arg(long)]
    map: PathBuf,
    #[arg(long, value_enum, conflicts_with = "theorem")]
    norm: Option<Norm>,
    /// Alias of `--norm`: `measured` for `l1`, `ir` for `ir`.
    #[arg(long)]
    theorem: Option<String>,
}

fn haar_verify(a: &HaarVerify) -> Res {
    let norm = match (a.norm, a.theorem.as_deref()) {
        (Some(n), _) => n,
        (None, Some("measured" | "l1")) => Norm::L1,
        (None, Some("ir")) => Norm::Ir,
        (None, Some(other)) => return Err(InputError(format!("unknown theorem {other:?}; use measured or ir"))),
        (None, None) => Norm::L1,
    };
    let (g, h) = load_groupoids(&a.groupoid)?;
    let (lg, lh) = load_haar(a.haar.as_deref(), &g, &h)?;
    let t = GaussMap::from_json(&g, &h, &read_json::<GaussMapJson>(&a.map)?)?;
    let report = match norm {
        Norm::L1 => {
            let path = a.measure.as_ref().ok_or_else(|| InputError("l1 verification needs --measure".into()))?;
            let (mg, mh) = load_measures(path, &g, &h)?;
            let src = MeasuredGroupoid {
                groupoid: &g,
                lambda: &lg,
                mu: Some(&mg),
            };
            let tgt = MeasuredGroupoid {
                groupoid: &h,
                lambda: &lh,
                mu: Some(&mh),
            };
            verify_measured_decomposition(&t, &src, &tgt, None)?
        }
        Norm::Ir => {
            let src = MeasuredGroupoid {
                groupoid: &g,
                lambda: &lg,
                mu: None,
            };
            let tgt = MeasuredGroupoid {
                groupoid: &h,
                lambda: &lh,
                mu: None,
            };
            verify_ir_decomposition(&t, &src, &tgt, None)?
        }
    };
    let checks: Vec<Value> = report.checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed })).collect();
    let data = report.data.as_ref().map(|d: &HaarData| {
        let phi: BTreeMap<String, String> = d
            .phi
            .iter()
            .enumerate()
            .map(|(y, &x)| (h.names()[y].clone(), g.names()[x].clone()))
            .collect();
        json!({
            "phi": phi,
            "p": by_name(&h, d.p.iter().map(gauss_json)),
            "d": by_name(&g, d.d.iter().map(fmt_q)),
        })
    });
    let witnesses = report.failed().iter().map(|c| json!({ "check": c.name, "witness": c.witness })).collect();
    Ok(Outcome {
        witnesses,
        artifacts: json!({ "norm": format!("{norm:?}").to_lowercase(), "checks": checks, "data": data }),
    })
}

#[derive(Debug, Args)]
pub struct Suite {
    /// Upper bound on each suite's size parameter.
    #[arg(long, default_value_t = 3)]
    max_size: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Suites to run; all when omitted.
    #[arg(long = "id")]
    ids: Vec<String>,
}

fn suite(a: &Suite) -> Res {
    let cfg = SuiteConfig {
        max_size: a.max_size,
        seed: a.seed,
    };
    let ids: Vec<String> = if a.ids.is_empty() {
        SUITE_IDS.iter().map(|s| s.to_string()).collect()
    } else {
        a.ids.clone()
    };
    let mut results = Vec::new();
    let mut witnesses = Vec::new();
    for id in &ids {
        let r = run_suite(id, &cfg)?;
        if !r.passed() {
            let shown = if r.witnesses.is_empty() {
                vec!["no cases ran".to_string()]
            } else {
                r.witnesses.clone()
            };
            witnesses.extend(shown.into_iter().map(|w| json!({ "suite": r.id, "witness": w })));
        }
        results.push(r);
    }
    Ok(Outcome {
        witnesses,
        artifacts: json!({ "max_size": a.max_size, "seed": a.seed, "suites": results }),
    })
}
