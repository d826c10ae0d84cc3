//! Seeded self-check suites over small exhaustive and random instances.
//!
//! Each suite counts the cases it ran and records the first few failures.
//! Output depends only on the suite id, `max_size` and `seed`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basicmaps::{
    basic_phis, build_basic, extract_transform, is_nonvanishing, is_phi_basic, nonvanishing_to_homeo, unique_basic_phi, BasicError, DiscreteMap,
    Transform,
};
use crate::classify::{
    additive_decompose, kaplansky_recover_phi, l1_disjointness, scalar_grid, weighted_decompose, weighted_map, ChainFamily, ChainMap, PointDensity,
    WeightedMode,
};
use crate::combinat::{all_maps, permutations};
use crate::exact::{gi, q, qf, unit_probes, GaussQ, Q};
use crate::fintop::{FiniteSpace, PointSet};
use crate::funcrel::{BlackBoxMap, DiscreteFamily, Item, PlFamily, Relation};
use crate::haarconv::{
    build_haar_map, radon_nikodym, support_product, verify_ir_decomposition, verify_measured_decomposition, weighted_convolve, GaussMap, HaarData,
    HaarError, HaarReport, HaarSystem, MeasuredGroupoid, UnitMeasure,
};
use crate::ideals::{all_ideals, ideal_of_open, open_of_ideal, recover_homeo, PerpIdeal, DEFAULT_IDEAL_CAP};
use crate::plspace::{tent, IntervalSet, PLFunction};
use crate::steinberg::{enumerate_aut, FiniteGroupoid, RingSpec, Steinberg, SteinbergError, DEFAULT_ENUMERATION_CAP, EXHAUSTIVE_AUT_CAP};
use crate::stone::{duality_roundtrip, duality_roundtrip_space, ro_equals_ko, GenBoolAlg};

pub const SUITE_IDS: [&str; 11] = [
    "REL-1", "REL-2", "IDE-1", "IDE-2", "STO-1", "BAS-1", "BAS-2", "CLA-1", "CLA-2", "STE-1", "HAA-1",
];

const MAX_WITNESSES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    /// Upper bound on the size parameter of every suite.
    pub max_size: usize,
    pub seed: u64,
}

impl SuiteConfig {
    fn bound(&self, b: usize) -> usize {
        b.min(self.max_size.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub id: String,
    pub cases: u64,
    pub failures: u64,
    pub witnesses: Vec<String>,
    pub facts: BTreeMap<String, String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown suite {0:?}")]
pub struct UnknownSuite(pub String);

pub fn run_suite(id: &str, cfg: &SuiteConfig) -> Result<SuiteResult, UnknownSuite> {
    let run: fn(&SuiteConfig) -> SuiteResult = match id.to_ascii_uppercase().as_str() {
        "REL-1" => rel1,
        "REL-2" => rel2,
        "IDE-1" => ide1,
        "IDE-2" => ide2,
        "STO-1" => sto1,
        "BAS-1" => bas1,
        "BAS-2" => bas2,
        "CLA-1" => cla1,
        "CLA-2" => cla2,
        "STE-1" => ste1,
        "HAA-1" => haa1,
        _ => return Err(UnknownSuite(id.into())),
    };
    Ok(run(cfg))
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<SuiteResult> {
    SUITE_IDS.iter().map(|id| run_suite(id, cfg).expect("known id")).collect()
}

struct Tally(SuiteResult);

impl Tally {
    fn new(id: &str) -> Self {
        Tally(SuiteResult {
            id: id.into(),
            cases: 0,
            failures: 0,
            witnesses: Vec::new(),
            facts: BTreeMap::new(),
        })
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.0.cases += 1;
        if !ok {
            self.fail(witness());
        }
    }

    fn fail(&mut self, w: String) {
        self.0.failures += 1;
        if self.0.witnesses.len() < MAX_WITNESSES {
            self.0.witnesses.push(w);
        }
    }

    /// Unwraps a library result, counting an error as a failed case.
    fn get<T, E: fmt::Display>(&mut self, r: Result<T, E>, ctx: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.0.cases += 1;
                self.fail(format!("{}: {e}", ctx()));
                None
            }
        }
    }

    fn fact(&mut self, k: &str, v: impl ToString) {
        self.0.facts.insert(k.into(), v.to_string());
    }
}

fn rng(id: &str, seed: u64) -> ChaCha8Rng {
    // FNV-1a of the id keeps suites independent under a shared seed
    let h = id
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn bits(n: usize) -> DiscreteFamily<u8> {
    DiscreteFamily::full(FiniteSpace::discrete(n), vec![0, 1], vec![0; n]).expect("small full family")
}

fn random_perm(n: usize, r: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(r);
    p
}

fn rel1(cfg: &SuiteConfig) -> SuiteResult {
    let mut t = Tally::new("REL-1");
    for n in 1..=cfg.bound(3) {
        let fam = bits(n);
        for rep in fam.check_items(&Item::ALL, fam.len()) {
            t.0.cases += rep.pairs as u64;
            for m in &rep.mismatches {
                t.fail(format!(
                    "|X|={n} item ({}) f={} g={} semantic={} syntactic={}",
                    rep.item.letter(),
                    m.f,
                    m.g,
                    m.semantic,
                    m.syntactic
                ));
            }
        }
        for f in 0..fam.len() {
            for g in 0..fam.len() {
                t.check(fam.rel(Relation::Perp, f, g) == fam.perp_via_sigma(f, g), || {
                    format!("|X|={n} perp via sigma differs on ({f}, {g})")
                });
            }
        }
    }
    t.0
}

const PL_DEN: i64 = 24;

struct Tent {
    lo: i64,
    hi: i64,
    f: PLFunction,
}

fn grid_tent(domain: &IntervalSet, lo: i64, peak: i64, hi: i64, height: i64) -> Result<Tent, String> {
    let f = tent(domain, &qf(peak, PL_DEN), (&qf(lo, PL_DEN), &qf(hi, PL_DEN)), &q(height)).map_err(|e| e.to_string())?;
    Ok(Tent { lo, hi, f })
}

fn random_tent(domain: &IntervalSet, r: &mut ChaCha8Rng) -> Result<Tent, String> {
    let lo = r.gen_range(0..=PL_DEN - 2);
    let hi = r.gen_range(lo + 2..=PL_DEN);
    let peak = r.gen_range(lo + 1..hi);
    let height = *[-2i64, -1, 1, 2, 3].choose(r).expect("nonempty");
    grid_tent(domain, lo, peak, hi, height)
}

/// `⊥` and `⊥⊥` against the interval endpoints: a tent is nonzero exactly
/// on the open interval `(lo, hi)` and supported on `[lo, hi]`.
fn check_tent_pair(t: &mut Tally, domain: &IntervalSet, a: &Tent, b: &Tent, label: &str) {
    let zero = PLFunction::zero(domain).expect("zero");
    let Some(fam) = t.get(PlFamily::new_pl(domain.clone(), vec![zero, a.f.clone(), b.f.clone()]), || {
        format!("{label}: family")
    }) else {
        return;
    };
    let perp = fam.rel(Relation::Perp, 1, 2);
    let pp = fam.rel(Relation::PerpPerp, 1, 2);
    let span = |x: &Tent| format!("[{}/{PL_DEN}, {}/{PL_DEN}]", x.lo, x.hi);
    let expect_perp = a.hi <= b.lo || b.hi <= a.lo;
    let expect_pp = a.hi < b.lo || b.hi < a.lo;
    t.check(perp == fam.perp_via_sigma(1, 2), || {
        format!("{label}: perp via sigma differs on {} {}", span(a), span(b))
    });
    t.check(!pp || perp, || format!("{label}: perp-perp without perp on {} {}", span(a), span(b)));
    t.check(perp == expect_perp, || format!("{label}: perp = {perp} on {} {}", span(a), span(b)));
    t.check(pp == expect_pp, || format!("{label}: perp-perp = {pp} on {} {}", span(a), span(b)));
}

fn rel2(cfg: &SuiteConfig) -> SuiteResult {
    let mut t = Tally::new("REL-2");
    let mut r = rng("REL-2", cfg.seed);
    let domain = IntervalSet::closed(q(0), q(1));
    let mut pairs = 0;
    while pairs < 500 {
        let (a, b) = (random_tent(&domain, &mut r), random_tent(&domain, &mut r));
        let (Some(a), Some(b)) = (t.get(a, || "random tent".into()), t.get(b, || "random tent".into())) else {
            continue;
        };
        if a.f == b.f {
            continue;
        }
        check_tent_pair(&mut t, &domain, &a, &b, "random");
        pairs += 1;
    }
    let mut touching = 0;
    for lo in (0..PL_DEN).step_by(3) {
        for mid in (lo + 2..PL_DEN).step_by(3) {
            for hi in (mid + 2..=PL_DEN).step_by(3) {
                let a = grid_tent(&domain, lo, lo + 1, mid, 1);
                let b = grid_tent(&domain, mid, hi - 1, hi, 2);
                let (Some(a), Some(b)) = (t.get(a, || "grid tent".into()), t.get(b, || "grid tent".into())) else {
                    continue;
                };
                check_tent_pair(&mut t, &domain, &a, &b, "touching");
                touching += 1;
            }
        }
    }
    t.fact("random_pairs", pairs);
    t.fact("touching_pairs", touching);
    t.0
}

fn ide1(cfg: &SuiteConfig) -> SuiteResult {
    let mut t = Tally::new("IDE-1");
    for n in 1..=cfg.bound(3) {
        let fam = bits(n);
        let Some(ideals) = t.get(all_ideals(&fam, DEFAULT_IDEAL_CAP), || format!("|X|={n}: ideals")) else {
            continue;
        };
        let opens: Vec<PointSet> = fam.space().opens().collect();
        let mut of_opens = Vec::new();
        for &u in &opens {
            let Some(i) = t.get(ideal_of_open(&fam, &u), || format!("|X|={n}: I({u:?})")) else {
                continue;
            };
            t.check(open_of_ideal(&fam, &i) == u, || format!("|X|={n}: U(I({u:?})) != {u:?}"));
            of_opens.push(i);
        }
        let listed: BTreeSet<&BTreeSet<usize>> = ideals.iter().map(PerpIdeal::members).collect();
        let built: BTreeSet<&BTreeSet<usize>> = of_opens.iter().map(PerpIdeal::members).collect();
        t.check(listed == built, || {
            format!("|X|={n}: {} ideals but {} ideals of opens", listed.len(), built.len())
        });
        for i in &ideals {
            let u = open_of_ideal(&fam, i);
            let back = t.get(ideal_of_open(&fam, &u), || format!("|X|={n}: I(U)"));
            t.check(back.is_some_and(|b| b.members() == i.members()), || {
                format!("|X|={n}: I(U({:?})) differs", i.members())
            });
        }
        for (u, iu) in opens.iter().zip(&of_opens) {
            for (v, iv) in opens.iter().zip(&of_opens) {
                t.check(u.is_subset(*v) == iu.members().is_subset(iv.members()), || {
                    format!("|X|={n}: order differs on {u:?}, {v:?}")
                });
            }
        }
    }
    t.0
}

const SECTIONS_PER_SIZE: usize = 200;

fn ide2(cfg: &SuiteConfig) -> SuiteResult {
    let mut t = Tally::new("IDE-2");
    let mut r = rng("IDE-2", cfg.seed);
    let h: Vec<u8> = vec![0, 1, 2];
    for n in 1..=cfg.bound(4) {
        let fam = DiscreteFamily::full(FiniteSpace::discrete(n), h.clone(), vec![0; n]).expect("small full family");
        let perms = permutations(n);
        let per = SECTIONS_PER_SIZE.div_ceil(perms.len());
        let mut count = 0;
        for phi in &perms {
            for _ in 0..per {
                let sections = (0..n)
                    .map(|_| h.iter().copied().zip(random_perm(3, &mut r).into_iter().map(|v| v as u8)).collect())
                    .collect();
                let tr = Transform { phi: phi.clone(), sections };
                let Some(map) = t.get(build_basic(&fam, FiniteSpace::discrete(n), h.clone(), &tr), || format!("|X|={n}: build")) else {
                    continue;
                };
                let got = t.get(recover_homeo(&map), || format!("|X|={n}: recover for φ={phi:?}"));
                if let Some(got) = got {
                    t.check(got.phi == *phi && got.is_unique(), || {
                        format!("|X|={n}: recovered {:?} for φ={phi:?}", got.phi)
                    });
                }
                count += 1;
            }
        }
        t.fact(&format!("section_families_{n}"), count);
    }
    t.0
}

fn sto1(cfg: &SuiteConfig) -> SuiteResult {
    let mut t = Tally::new("STO-1");
    let mut r = rng("STO-1", cfg.seed);
    for k in 1..=cfg.bound(3) {
        let b = GenBoolAlg::power_set(k);
        let m = b.len();
        let relabelings = if m <= 4 {
            permutations(m)
        } else {
            (0..50).map(|_| random_perm(m, &mut r)).collect()
        };
        for perm in &relabelings {
            let c = b.relabel(perm);
            let rt = t.get(duality_roundtrip(&c), || format!("{k} atoms, relabeling {perm:?}"));
            if let Some(rt) = rt {
                t.check(rt.isomorphism, || {
                    format!("{k} atoms, relabeling {perm:?}: round trip is not an isomorphism")
                });
            }
        }
    }
    t.check(
        GenBoolAlg::power_set(0).len() == 1 && crate::stone::spec(&GenBoolAlg::power_set(0)).is_err(),
        || "the trivial algebra was accepted".into(),
    );
    for n in 1..=cfg.bound(5) {
        let x = FiniteSpace::discrete(n);
        if let Some(rt) = t.get(duality_roundtrip_space(&x), || format!("|X|={n}")) {
            t.check(rt.isomorphism, || format!("|X|={n}: round trip is not a homeomorphism"));
        }
        if let Some(eq) = t.get(ro_equals_ko(&x), || format!("|X|={n}")) {
            t.check(eq, || format!("|X|={n}: RO(X) != KO(X)"));
        }
    }
    t.0
}

/// Images of every member under `t`, as value vectors.
fn images<VX: Clone + PartialEq + fmt::Debug, VY: Clone + PartialEq + fmt::Debug>(t: &DiscreteMap<VX, VY>) -> Vec<Vec<VY>> {
    (0..t.len()).map(|f| t.target.member(t.apply(f)).clone()).collect()
}

fn permuted_map(fam: &DiscreteFamily<u8>, perm: &[usize]) -> DiscreteMap<u8, u8> {
    BlackBoxMap::new(fam.clone(), fam.clone(), perm.to_vec()).expect("permutation of members")
}

/// One map: `is_phi_basic` agrees with constructive extraction for every `φ`,
/// and the basic `φ` agrees with the `⊥⊥` homeomorphism when both exist.
/// `brute` additionally confirms non-basic cases against every section family.
fn basic_case(t: &mut Tally, map: &DiscreteMap<u8, u8>, label: &str, brute: bool) {
    let (nx, ny) = (map.source.space().len(), map.target.space().len());
    let h = map.source.backend().codomain.clone();
    let want = images(map);
    for phi in all_maps(ny, nx) {
        let basic = is_phi_basic(map, &phi);
        match extract_transform(map, &phi) {
            Ok(ex) => {
                let rebuilt: Option<Vec<Vec<u8>>> = map.source.members().iter().map(|f| ex.transform.apply(f)).collect();
                t.check(basic && rebuilt.as_ref() == Some(&want), || {
                    format!("{label} φ={phi:?}: extraction does not rebuild the map")
                });
            }
            Err(BasicError::NotBasic { f, g, y }) => {
                let (a, b) = (map.source.members(), &want);
                let genuine = a[f][phi[y]] == a[g][phi[y]] && b[f][y] != b[g][y];
                t.check(!basic && genuine, || format!("{label} φ={phi:?}: bad non-basic witness ({f}, {g}, {y})"));
                if brute {
                    let k = h.len();
                    let hit = all_maps(ny, k.pow(k as u32)).any(|codes| {
                        let sections = codes
                            .iter()
                            .map(|&c| (0..k).map(|i| (h[i], h[(c / k.pow(i as u32)) % k])).collect())
                            .collect();
                        let tr = Transform { phi: phi.clone(), sections };
                        map.source.members().iter().map(|f| tr.apply(f)).collect::<Option<Vec<_>>>().as_ref() == Some(&want)
                    });
                    t.check(!hit, || format!("{label} φ={phi:?}: a section family reproduces a non-basic map"));
                }
            }
            Err(e) => t.fail(format!("{label} φ={phi:?}: {e}")),
        }
    }
    let phis = basic_phis(map);
    if let (Ok(hr), false) = (recover_homeo(map), phis.is_empty()) {
        t.check(phis == vec![hr.phi.clone()], || {
            format!("{label}: basic φ {phis:?} but homeomorphism {:?}", hr.phi)
        });
    }
}

fn bas1(cfg: &SuiteConfig) -> SuiteResult {
    let mut t = Tally::new("BAS-1");
    let mut r = rng("BAS-1", cfg.seed);
    let n = cfg.bound(2);
    let fam = bits(n);
    let mut basic_count = 0;
    for perm in permutations(fam.len()) {
        let map = permuted_map(&fam, &perm);
        basic_count += usize::from(!basic_phis(&map).is_empty());
        basic_case(&mut t, &map, &format!("bits({n}) perm {perm:?}"), true);
    }
    t.fact("exhaustive_basic_maps", basic_count);
    let m = cfg.bound(3);
    let h: Vec<u8> = vec![0, 1, 2];
    let big = DiscreteFamily::full(FiniteSpace::discrete(m), h.clone(), vec![0; m]).expect("small full family");
    for i in 0..500 {
        let phi = random_perm(m, &mut r);
        let sections = (0..m)
            .map(|_| h.iter().copied().zip(random_perm(3, &mut r).into_iter().map(|v| v as u8)).collect())
            .collect();
        let tr = Transform { phi: phi.clone(), sections };
        let Some(map) = t.get(build_basic(&big, FiniteSpace::discrete(m), h.clone(), &tr), || {
            format!("random basic {i}")
        }) else {
            continue;
        };
        let label = format!("random basic {i} φ={phi:?}");
        let unique = unique_basic_phi(&map);
        t.check(unique.as_ref().ok() == Some(&phi), || format!("{label}: unique basic φ {unique:?}"));
        basic_case(&mut t, &map, &label, false);
    }
    for i in 0..500 {
        let map = permuted_map(&big, &random_perm(big.len(), &mut r));
        basic_case(&mut t, &map, &format!("random bijection {i}"), false);
    }
    t.0
}

fn bas2(cfg: &SuiteConfig) -> SuiteResult {
    let mut t = Tally::new("BAS-2");
    let n = cfg.bound(2);
    let fam = bits(n);
    let (mut nonvanishing, mut pp_isos) = (0, 0);
    for perm in permutations(fam.len()) {
        let map = permuted_map(&fam, &perm);
        let pp = map.preserves(Relation::PerpPerp);
        pp_isos += usize::from(pp);
        let Some(nv) = t.get(is_nonvanishing(&map), || format!("perm {perm:?}")) else {
            continue;
        };
        if !nv {
            continue;
        }
        nonvanishing += 1;
        t.check(pp, || format!("perm {perm:?}: non-vanishing but not a perp-perp isomorphism"));
        let Some(phi) = t.get(nonvanishing_to_homeo(&map), || format!("perm {perm:?}")) else {
            continue;
        };
        let zero_set = |f: &[u8]| PointSet::from_points((0..f.len()).filter(|&i| f[i] == 0));
        let ok = (0..map.len()).all(|f| {
            let pushed = PointSet::from_points(zero_set(map.target.member(map.apply(f))).points().map(|y| phi[y]));
            pushed == zero_set(map.source.member(f))
        });
        t.check(ok, || format!("perm {perm:?}: φ={phi:?} does not carry zero sets"));
    }
    t.fact("nonvanishing", nonvanishing);
    t.fact("perp_perp_isomorphisms", pp_isos);
    t.0
}

const CLA_SAMPLES: usize = 12;

/// Value chain per point count: `[-3, 3]` while the full family stays small.
fn chain_values(n: usize) -> Vec<i64> {
    if n <= 3 {
        (-3..=3).collect()
    } else {
        (-1..=2).collect()
    }
}

fn cla1(cfg: &SuiteConfig) -> SuiteResult {
    let mut t = Tally::new("CLA-1");
    let mut r = rng("CLA-1", cfg.seed);
    for n in 1..=cfg.bound(4) {
        let vals = chain_values(n);
        t.fact(&format!("values_{n}"), format!("{}..{}", vals[0], vals[vals.len() - 1]));
        let ints = ChainFamily::full(n, &vals).expect("full chain family");
        let rats = ChainFamily::full(n, &vals.iter().map(|&v| q(v)).collect::<Vec<_>>()).expect("full chain family");
        for s in 0..CLA_SAMPLES {
            let phi = random_perm(n, &mut r);
            let slope: Vec<i64> = (0..n).map(|_| r.gen_range(1..=3)).collect();
            let shift: Vec<i64> = (0..n).map(|_| r.gen_range(-3..=3)).collect();
            let label = format!("|X|={n} sample {s} φ={phi:?}");
            let (p2, s2, f2) = (phi.clone(), slope.clone(), shift.clone());
            let map = ChainMap::from_fn(ints.clone(), n, move |f| (0..n).map(|y| s2[y] * f[p2[y]] + f2[y]).collect());
            if let Some(map) = t.get(map, || label.clone()) {
                let got = t.get(kaplansky_recover_phi(&map), || format!("{label}: kaplansky"));
                if let Some(got) = got {
                    t.check(got.phi == phi, || format!("{label}: kaplansky recovered {:?}", got.phi));
                }
            }
            let p: Vec<Q> = (0..n)
                .map(|_| [qf(1, 2), q(1), q(2), q(3)].choose(&mut r).expect("nonempty").clone())
                .collect();
            let (p2, pp) = (phi.clone(), p.clone());
            let map = ChainMap::from_fn(rats.clone(), n, move |f| (0..n).map(|y| &pp[y] * &f[p2[y]]).collect());
            if let Some(map) = t.get(map, || label.clone()) {
                if let Some(d) = t.get(additive_decompose(&map), || format!("{label}: additive")) {
                    t.check(d.phi == phi && d.p == p, || {
                        format!("{label}: additive recovered φ={:?} p={:?}", d.phi, d.p)
                    });
                }
            }
        }
    }
    t.0
}

fn random_gauss(n: usize, r: &mut ChaCha8Rng) -> Vec<GaussQ> {
    (0..n).map(|_| gi(r.gen_range(-3..=3), r.gen_range(-3..=3))).collect()
}

fn random_density(n: usize, r: &mut ChaCha8Rng) -> PointDensity {
    PointDensity((0..n).map(|_| qf(r.gen_range(1..=5), r.gen_range(1..=3))).collect())
}

fn cla2(cfg: &SuiteConfig) -> SuiteResult {
    let mut t = Tally::new("CLA-2");
    let mut r = rng("CLA-2", cfg.seed);
    for i in 0..2000 {
        let n = r.gen_range(1..=4);
        let (mut f, mut g) = (random_gauss(n, &mut r), random_gauss(n, &mut r));
        if i % 2 == 0 {
            // force disjoint supports on half of the pairs
            for x in 0..n {
                if r.gen_bool(0.5) {
                    f[x] = GaussQ::zero();
                } else {
                    g[x] = GaussQ::zero();
                }
            }
        }
        let disjoint = f.iter().zip(&g).all(|(a, b)| a.is_zero() || b.is_zero());
        let dens = random_density(n, &mut r);
        if let Some(d) = t.get(l1_disjointness(&f, &g, &dens), || format!("pair {i}")) {
            t.check(d.identity_holds == disjoint && d.disjoint == disjoint, || {
                format!("pair {i}: f={f:?} g={g:?} identity={}", d.identity_holds)
            });
        }
    }
    let probes: Vec<GaussQ> = std::iter::once(GaussQ::zero()).chain(unit_probes()).collect();
    for n in 2..=cfg.bound(3).max(2) {
        let grid = scalar_grid(n, &probes).expect("scalar grid");
        for s in 0..10 {
            let (mx, my) = (random_density(n, &mut r), random_density(n, &mut r));
            let phi = random_perm(n, &mut r);
            let units: Vec<GaussQ> = (0..n).map(|_| unit_probes().choose(&mut r).expect("nonempty").clone()).collect();
            let ratio: Vec<Q> = (0..n).map(|y| &mx.0[phi[y]] / &my.0[y]).collect();
            let p: Vec<GaussQ> = (0..n).map(|y| units[y].scale(ratio[y].clone())).collect();
            let label = format!("|X|={n} sample {s} φ={phi:?}");
            let Some(map) = t.get(weighted_map(&grid, &phi, &p), || label.clone()) else {
                continue;
            };
            let mode = WeightedMode::L1 { source: mx, target: my };
            if let Some(d) = t.get(weighted_decompose(&map, &mode), || format!("{label}: decompose")) {
                t.check(d.phi == phi && d.p == p, || format!("{label}: recovered φ={:?} p={:?}", d.phi, d.p));
                t.check(d.density_ratio.as_ref() == Some(&ratio), || {
                    format!("{label}: density ratio {:?}, expected {ratio:?}", d.density_ratio)
                });
                t.check(d.unit.as_ref() == Some(&units), || {
                    format!("{label}: unit {:?}, expected {units:?}", d.unit)
                });
            }
        }
    }
    t.0
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn ste1(cfg: &SuiteConfig) -> SuiteResult {
    let mut t = Tally::new("STE-1");
    for n in 1..=cfg.bound(3) {
        for m in [2u64, 3] {
            let label = format!("pair({n}) over Z/{m}");
            let Some(alg) = t.get(Steinberg::new(FiniteGroupoid::pair(n), RingSpec::zn(m)), || label.clone()) else {
                continue;
            };
            let Some(aut) = t.get(enumerate_aut(&alg, EXHAUSTIVE_AUT_CAP), || label.clone()) else {
                continue;
            };
            let expected = factorial(n) * (m as usize - 1).pow(n as u32 - 1);
            t.check(aut.homomorphism, || format!("{label}: Θ is not a homomorphism"));
            t.check(aut.round_trip, || format!("{label}: decomposition does not invert Θ"));
            t.check(aut.order() == expected, || {
                format!("{label}: |Aut| = {}, expected {expected}", aut.order())
            });
            if let Some(c) = aut.exhaustive_count {
                t.check(c == aut.order(), || format!("{label}: exhaustive count {c} != {}", aut.order()));
            }
            t.fact(&format!("aut_pair{n}_z{m}"), aut.order());
            if n == 2 && m == 2 {
                t.check(aut.exhaustive_count == Some(2), || {
                    format!("{label}: exhaustive count {:?}", aut.exhaustive_count)
                });
                if let Some(lb) = t.get(alg.local_bisection_check(DEFAULT_ENUMERATION_CAP), || label.clone()) {
                    t.check(lb.holds, || format!("{label}: local bisection hypothesis fails"));
                }
            }
            if let Some(cs) = t.get(alg.condition_s_check(DEFAULT_ENUMERATION_CAP), || label.clone()) {
                t.check(cs.holds, || format!("{label}: condition (S) fails"));
            }
        }
    }
    let z6 = Steinberg::new(FiniteGroupoid::pair(2), RingSpec::zn(6)).and_then(|a| enumerate_aut(&a, EXHAUSTIVE_AUT_CAP));
    t.check(matches!(z6, Err(SteinbergError::NotIndecomposable(_))), || {
        format!("Z/6 was not rejected: {:?}", z6.map(|a| a.order()))
    });
    t.0
}

fn haar_groupoids(max_arrows: usize) -> Vec<(String, FiniteGroupoid)> {
    let mut out: Vec<(String, FiniteGroupoid)> = Vec::new();
    for n in 1..=3 {
        out.push((format!("trivial({n})"), FiniteGroupoid::trivial(n)));
    }
    for n in 2..=6 {
        out.push((format!("cyclic({n})"), FiniteGroupoid::cyclic_group(n)));
    }
    out.push(("pair(2)".into(), FiniteGroupoid::pair(2)));
    out.push(("c2⋉c2".into(), FiniteGroupoid::c2_ltimes_c2()));
    let unions = [
        ("cyclic(2)+trivial(1)", FiniteGroupoid::cyclic_group(2), FiniteGroupoid::trivial(1)),
        ("cyclic(2)+cyclic(3)", FiniteGroupoid::cyclic_group(2), FiniteGroupoid::cyclic_group(3)),
        ("pair(2)+trivial(2)", FiniteGroupoid::pair(2), FiniteGroupoid::trivial(2)),
    ];
    for (name, a, b) in unions {
        out.push((name.into(), a.disjoint_union(&b).expect("disjoint union")));
    }
    out.retain(|(_, g)| g.len() <= max_arrows);
    out
}

fn weight_levels() -> [Q; 3] {
    [q(1), q(2), qf(1, 3)]
}

/// Every assignment of a weight level to each unit.
fn weight_patterns(g: &FiniteGroupoid) -> Vec<Vec<Q>> {
    let units = g.units();
    let lv = weight_levels();
    all_maps(units.len(), lv.len())
        .map(|c| {
            let mut w = vec![Q::zero(); g.len()];
            for (i, &u) in units.iter().enumerate() {
                w[u] = lv[c[i]].clone();
            }
            w
        })
        .collect()
}

fn from_unit_weights(g: &FiniteGroupoid, w: &[Q]) -> Result<HaarSystem, HaarError> {
    HaarSystem::from_source_weights(g, |x| w[x].clone())
}

/// Groupoid morphisms into `{±1, ±i}`, by brute force.
fn characters(g: &FiniteGroupoid) -> Vec<Vec<GaussQ>> {
    let vals = unit_probes();
    all_maps(g.len(), 4)
        .map(|c| c.into_iter().map(|k| vals[k].clone()).collect::<Vec<_>>())
        .filter(|p| (0..g.len()).all(|a| (0..g.len()).all(|b| g.product(a, b).map_or(true, |ab| p[ab] == &p[a] * &p[b]))))
        .collect()
}

fn haa1(cfg: &SuiteConfig) -> SuiteResult {
    let mut t = Tally::new("HAA-1");
    let mut r = rng("HAA-1", cfg.seed);
    let max_arrows = (2 * cfg.max_size).clamp(1, 6);
    t.fact("max_arrows", max_arrows);
    for (name, g) in haar_groupoids(max_arrows) {
        let patterns = weight_patterns(&g);
        for w in &patterns {
            let Some(lam) = t.get(from_unit_weights(&g, w), || format!("{name}: weights {w:?}")) else {
                continue;
            };
            t.check(HaarSystem::validate_haar(&g, lam.weights().to_vec()).is_ok(), || {
                format!("{name}: weights {w:?} rejected")
            });
            t.check((0..g.len()).all(|a| *lam.weight(a) == w[g.source(a)]), || {
                format!("{name}: λ is not constant on source fibers")
            });
            for a in (0..g.len()).filter(|&a| !g.is_unit(a)) {
                let mut bad = lam.weights().to_vec();
                bad[a] = &bad[a] * q(2);
                let res = HaarSystem::validate_haar(&g, bad);
                t.check(matches!(res, Err(HaarError::InvarianceViolation(..))), || {
                    format!("{name}: perturbed weight at {} accepted", g.names()[a])
                });
            }
            for bad_value in [Q::zero(), -q(1)] {
                let mut bad = lam.weights().to_vec();
                bad[0] = bad_value;
                let res = HaarSystem::validate_haar(&g, bad);
                t.check(matches!(res, Err(HaarError::NotFullySupported(_))), || {
                    format!("{name}: non-positive weight accepted")
                });
            }
            let (f, h, k) = (
                random_gauss(g.len(), &mut r),
                random_gauss(g.len(), &mut r),
                random_gauss(g.len(), &mut r),
            );
            let left = weighted_convolve(&g, &lam, &weighted_convolve(&g, &lam, &f, &h), &k);
            let right = weighted_convolve(&g, &lam, &f, &weighted_convolve(&g, &lam, &h, &k));
            t.check(left == right, || format!("{name}: convolution is not associative for weights {w:?}"));
            let mut sparse = f.clone();
            for x in sparse.iter_mut() {
                if r.gen_bool(0.4) {
                    *x = GaussQ::zero();
                }
            }
            let prod = weighted_convolve(&g, &lam, &sparse, &h);
            let allowed = support_product(&g, &sparse, &h);
            t.check(prod.iter().zip(&allowed).all(|(v, &ok)| ok || v.is_zero()), || {
                format!("{name}: convolution leaves the product support")
            });
        }
        let autos = g.automorphisms();
        let chars = characters(&g);
        t.fact(&format!("characters_{name}"), chars.len());
        for s in 0..20 {
            let wg = patterns.choose(&mut r).expect("nonempty");
            let wh = patterns.choose(&mut r).expect("nonempty");
            let phi = autos.choose(&mut r).expect("identity").clone();
            let (Ok(lg), Ok(lh)) = (from_unit_weights(&g, wg), from_unit_weights(&g, wh)) else {
                continue;
            };
            let src = MeasuredGroupoid {
                groupoid: &g,
                lambda: &lg,
                mu: None,
            };
            let tgt = MeasuredGroupoid {
                groupoid: &g,
                lambda: &lh,
                mu: None,
            };
            let d = radon_nikodym(&src, &tgt, &phi);
            let invariant = (0..g.len()).all(|a| (0..g.len()).all(|b| g.product(a, b).map_or(true, |ab| d[ab] == d[b])));
            t.check(invariant, || format!("{name} sample {s}: D is not invariant"));
            t.check((0..g.len()).all(|a| d[a] == d[g.source(a)]), || {
                format!("{name} sample {s}: D is not constant on source fibers")
            });
            t.check(d.iter().all(Signed::is_positive), || format!("{name} sample {s}: D is not positive"));
        }
        for s in 0..3 {
            let label = format!("{name} instance {s}");
            let phi = autos.choose(&mut r).expect("identity").clone();
            let p = chars.choose(&mut r).expect("trivial character").clone();
            let (Ok(lg), Ok(lh)) = (
                from_unit_weights(&g, patterns.choose(&mut r).expect("nonempty")),
                from_unit_weights(&g, patterns.choose(&mut r).expect("nonempty")),
            ) else {
                continue;
            };
            let masses: Vec<Q> = (0..g.len()).map(|_| weight_levels().choose(&mut r).expect("nonempty").clone()).collect();
            let Some(mh) = t.get(UnitMeasure::new(&g, |y| masses[y].clone()), || label.clone()) else {
                continue;
            };
            let mut pushed = vec![Q::zero(); g.len()];
            for &y in g.units() {
                pushed[phi[y]] = masses[y].clone();
            }
            let Some(mg) = t.get(UnitMeasure::new(&g, |x| pushed[x].clone()), || label.clone()) else {
                continue;
            };
            let src = MeasuredGroupoid {
                groupoid: &g,
                lambda: &lg,
                mu: Some(&mg),
            };
            let tgt = MeasuredGroupoid {
                groupoid: &g,
                lambda: &lh,
                mu: Some(&mh),
            };
            let data = HaarData {
                phi: phi.clone(),
                p,
                d: radon_nikodym(&src, &tgt, &phi),
            };
            let Some(map) = t.get(build_haar_map(&src, &tgt, &data), || label.clone()) else {
                continue;
            };
            mutation_tests(&mut t, &map, &src, &tgt, &data, &label, Mode::L1);
            let src_ir = MeasuredGroupoid { mu: None, ..src.clone() };
            let tgt_ir = MeasuredGroupoid { mu: None, ..tgt.clone() };
            mutation_tests(&mut t, &map, &src_ir, &tgt_ir, &data, &label, Mode::Ir);
        }
    }
    t.0
}

#[derive(Clone, Copy, Debug)]
enum Mode {
    L1,
    Ir,
}

fn verify(mode: Mode, map: &GaussMap, src: &MeasuredGroupoid, tgt: &MeasuredGroupoid, declared: Option<&HaarData>) -> Result<HaarReport, HaarError> {
    match mode {
        Mode::L1 => verify_measured_decomposition(map, src, tgt, declared),
        Mode::Ir => verify_ir_decomposition(map, src, tgt, declared),
    }
}

fn mutation_tests(t: &mut Tally, map: &GaussMap, src: &MeasuredGroupoid, tgt: &MeasuredGroupoid, data: &HaarData, label: &str, mode: Mode) {
    let label = format!("{label} {mode:?}");
    if let Some(rep) = t.get(verify(mode, map, src, tgt, Some(data)), || label.clone()) {
        t.check(rep.verified(), || {
            format!("{label}: exact build rejected at {:?}", rep.failed().first().map(|c| c.name))
        });
        t.check(
            rep.data.as_ref().is_some_and(|d| d.phi == data.phi && d.p == data.p && d.d == data.d),
            || format!("{label}: recovered data differs"),
        );
    }
    let rejected = |t: &mut Tally, r: Result<HaarReport, HaarError>, what: String| match r {
        Ok(rep) => t.check(!rep.verified(), || format!("{label}: {what} accepted")),
        Err(_) => t.check(true, String::new),
    };
    for a in 0..map.images.len() {
        for h in 0..map.images[a].len() {
            let mut bad = map.clone();
            // doubling breaks the modulus and filling a zero breaks the support;
            // adding a constant can land on the map of another character
            bad.images[a][h] = if bad.images[a][h].is_zero() {
                GaussQ::one()
            } else {
                &bad.images[a][h] * &gi(2, 0)
            };
            rejected(t, verify(mode, &bad, src, tgt, None), format!("T with entry ({a}, {h}) perturbed"));
        }
    }
    let i = gi(0, 1);
    for h in 0..data.p.len() {
        let mut bad = data.clone();
        bad.p[h] = &bad.p[h] * &i;
        rejected(t, verify(mode, map, src, tgt, Some(&bad)), format!("p perturbed at {h}"));
    }
    for a in 0..data.d.len() {
        let mut bad = data.clone();
        bad.d[a] = &bad.d[a] + q(1);
        rejected(t, verify(mode, map, src, tgt, Some(&bad)), format!("D perturbed at {a}"));
    }
    for h in 1..data.phi.len() {
        let mut bad = data.clone();
        bad.phi.swap(0, h);
        rejected(t, verify(mode, map, src, tgt, Some(&bad)), format!("φ with 0 and {h} swapped"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_id_is_rejected() {
        assert!(run_suite("XYZ-9", &SuiteConfig { max_size: 2, seed: 1 }).is_err());
    }

    #[test]
    fn results_are_deterministic() {
        let cfg = SuiteConfig { max_size: 2, seed: 7 };
        let a = run_suite("REL-2", &cfg).unwrap();
        let b = run_suite("REL-2", &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.passed(), "{:?}", a.witnesses);
    }
}
