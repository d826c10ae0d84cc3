use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

use bstone_core::exact::{gi, q};
use bstone_core::haarconv::{build_haar_map, HaarData, HaarSystem, MeasuredGroupoid, UnitMeasure};
use bstone_core::steinberg::{AlgebraMap, FiniteGroupoid, RingSpec, Steinberg};

fn bstone(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bstone")).args(args).output().expect("binary runs");
    let stdout = String::from_utf8(out.stdout).expect("utf-8");
    let report = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().expect("exit code"), report, stdout)
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn two_point() -> Value {
    json!({"backend": "discrete", "points": 2, "codomain": ["0", "1"], "theta": ["0", "0"],
           "members": [["0", "0"], ["1", "0"], ["0", "1"], ["1", "1"]]})
}

#[test]
fn reconstruct_two_point_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let fam = write(dir.path(), "two_point.json", &two_point());
    let (code, r, _) = bstone(&["reconstruct", "--family", s(&fam)]);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "verified");
    assert_eq!(r["artifacts"]["points"], 2);
    assert_eq!(r["witnesses"], json!([]));
}

#[test]
fn malformed_json_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"backend\": ").unwrap();
    let (code, r, _) = bstone(&["reconstruct", "--family", s(&p)]);
    assert_eq!(code, 2);
    assert_eq!(r["status"], "error");
    let (code, _, _) = bstone(&["reconstruct"]);
    assert_eq!(code, 2);
    let (code, _, _) = bstone(&["no-such-command"]);
    assert_eq!(code, 2);
}

#[test]
fn swapping_values_is_recovered_as_a_point_swap() {
    let dir = tempfile::tempdir().unwrap();
    let images = json!([["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]]);
    let map = write(dir.path(), "swap.json", &json!({"source": two_point(), "images": images}));
    let (code, r, _) = bstone(&["reconstruct", "--map", s(&map)]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["artifacts"]["phi"], json!({"x0": "x1", "x1": "x0"}));
    let (code, r, _) = bstone(&["basic-extract", "--map", s(&map)]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["artifacts"]["unique"], true);
}

#[test]
fn refutation_carries_a_replayable_witness() {
    let dir = tempfile::tempdir().unwrap();
    // (1,0) and (0,1) have disjoint supports but their images do not
    let images = json!([["0", "0"], ["1", "1"], ["0", "1"], ["1", "0"]]);
    let map = write(dir.path(), "bad.json", &json!({"source": two_point(), "images": images}));
    let (code, r, _) = bstone(&["reconstruct", "--map", s(&map)]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "refuted");
    let w = &r["witnesses"][0];
    let (f, g) = (w["f"].as_u64().unwrap() as usize, w["g"].as_u64().unwrap() as usize);
    let members = two_point()["members"].clone();
    let supp = |v: &Value| -> Vec<bool> { v.as_array().unwrap().iter().map(|x| x != "0").collect() };
    let disjoint = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(x, y)| !(x & y));
    let before = disjoint(&supp(&members[f]), &supp(&members[g]));
    let after = disjoint(&supp(&images[f]), &supp(&images[g]));
    assert_ne!(before, after);
}

#[test]
fn stone_duality_on_algebra_and_space() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "alg.json", &json!({"atoms": 3}));
    let (code, r, _) = bstone(&["stone-duality", "--algebra", s(&a)]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["artifacts"]["elements"], 8);
    let x = write(
        dir.path(),
        "space.json",
        &json!({"points": ["a", "b"], "opens": [[], ["a"], ["b"], ["a", "b"]]}),
    );
    let (code, r, _) = bstone(&["stone-duality", "--space", s(&x)]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["artifacts"]["ro_equals_ko"], true);
}

#[test]
fn l1_decomposition_with_densities() {
    let dir = tempfile::tempdir().unwrap();
    let vals = ["0", "1", "i"];
    let members: Vec<Vec<&str>> = vals.iter().flat_map(|a| vals.iter().map(move |b| vec![*a, *b])).collect();
    let fam = json!({"backend": "discrete", "points": 2, "codomain": vals, "theta": ["0", "0"], "members": members});
    // Tf = (f(x1)/2, 2i f(x0))
    let images: Vec<Value> = members
        .iter()
        .map(|f| {
            let t = |v: &str, c: &str| match (v, c) {
                ("0", _) => json!({"re": "0", "im": "0"}),
                ("1", "a") => json!({"re": "1/2", "im": "0"}),
                ("i", "a") => json!({"re": "0", "im": "1/2"}),
                ("1", _) => json!({"re": "0", "im": "2"}),
                _ => json!({"re": "-2", "im": "0"}),
            };
            json!([t(f[1], "a"), t(f[0], "b")])
        })
        .collect();
    let map = write(dir.path(), "map.json", &json!({"source": fam, "images": images}));
    // ratio(y) = mu_X(phi y) / mu_Y(y): y0 -> x1 gives 1/2, y1 -> x0 gives 2
    let dens = write(dir.path(), "density.json", &json!({"source": ["1", "1"], "target": ["2", "1/2"]}));
    let (code, r, _) = bstone(&["classify-decompose", "--map", s(&map), "--mode", "l1", "--density", s(&dens)]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["artifacts"]["density_ratio"], json!(["1/2", "2"]));
    assert_eq!(r["artifacts"]["unit"], json!([{"re": "1", "im": "0"}, {"re": "0", "im": "1"}]));
}

#[test]
fn steinberg_and_automorphisms() {
    let dir = tempfile::tempdir().unwrap();
    let g = FiniteGroupoid::pair(2);
    let gp = write(dir.path(), "pair2.json", &serde_json::to_value(g.to_json()).unwrap());
    let (code, r, _) = bstone(&["enumerate-automorphisms", "--groupoid", s(&gp), "--ring", "Z/2"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["artifacts"]["order"], 2);
    let a = Steinberg::new(g, RingSpec::zn(3)).unwrap();
    let conj = AlgebraMap {
        images: (0..4).map(|e| a.basis(3 - e, &a.ring.one())).collect(),
    };
    let mp = write(dir.path(), "conj.json", &serde_json::to_value(conj.to_json(&a, &a)).unwrap());
    let (code, r, _) = bstone(&["steinberg-decompose", "--groupoid", s(&gp), "--ring", "Z/3", "--map", s(&mp)]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["artifacts"]["phi"]["(1,2)"], "(2,1)");
    let (code, r, _) = bstone(&["enumerate-automorphisms", "--groupoid", s(&gp), "--ring", "Z/6"]);
    assert_eq!(code, 2, "{r}");
}

#[test]
fn haar_verify_both_norms() {
    let dir = tempfile::tempdir().unwrap();
    let g = FiniteGroupoid::cyclic_group(4);
    let l = HaarSystem::counting(&g);
    let m = UnitMeasure::uniform(&g);
    let side = MeasuredGroupoid {
        groupoid: &g,
        lambda: &l,
        mu: Some(&m),
    };
    let data = HaarData {
        phi: (0..4).collect(),
        p: vec![gi(1, 0), gi(0, 1), gi(-1, 0), gi(0, -1)],
        d: vec![q(1); 4],
    };
    let t = build_haar_map(&side, &side, &data).unwrap();
    let gp = write(dir.path(), "c4.json", &serde_json::to_value(g.to_json()).unwrap());
    let mp = write(dir.path(), "map.json", &serde_json::to_value(t.to_json(&g, &g)).unwrap());
    let mu = write(dir.path(), "mu.json", &serde_json::to_value(m.to_json(&g)).unwrap());
    let (code, r, _) = bstone(&["haar-verify", "--groupoid", s(&gp), "--map", s(&mp), "--measure", s(&mu), "--norm", "l1"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["artifacts"]["data"]["p"]["g1"], json!({"re": "0", "im": "1"}));
    let (code, r, _) = bstone(&["haar-verify", "--groupoid", s(&gp), "--map", s(&mp), "--theorem", "ir"]);
    assert_eq!(code, 0, "{r}");
    let mut bad = t.clone();
    bad.images[1][1] = gi(0, 2);
    let bp = write(dir.path(), "bad.json", &serde_json::to_value(bad.to_json(&g, &g)).unwrap());
    let (code, r, _) = bstone(&["haar-verify", "--groupoid", s(&gp), "--map", s(&bp), "--measure", s(&mu)]);
    assert_eq!(code, 1, "{r}");
    assert!(!r["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn suite_reports_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let (code, r, first) = bstone(&["suite", "--max-size", "2", "--seed", "7", "--json-out", s(&out)]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["timing"], Value::Null);
    let (_, _, second) = bstone(&["suite", "--max-size", "2", "--seed", "7"]);
    assert_eq!(first, second);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);
    let (code, _, _) = bstone(&["suite", "--id", "NOPE-1"]);
    assert_eq!(code, 2);
}
