//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p bstone-cli --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use bstone_core::suite::{run_suite, SuiteConfig, SuiteResult};

/// Large enough that every suite runs at its full size.
const FULL: SuiteConfig = SuiteConfig { max_size: 5, seed: 42 };

struct Line {
    ok: bool,
    text: String,
}

fn fact(r: &SuiteResult, k: &str) -> Option<usize> {
    r.facts.get(k).and_then(|v| v.parse().ok())
}

fn summary(r: &SuiteResult, elapsed: Duration) -> String {
    let w = r.witnesses.first().map(|w| format!("; first failure: {w}")).unwrap_or_default();
    format!("{}: {} cases, {} failures, {:.1}s{w}", r.id, r.cases, r.failures, elapsed.as_secs_f64())
}

/// `fns` are all maps `{0,1}² -> {0,1}`, coded as 2-bit masks of the
/// points where the value is 1. Counts bijections of the four functions that
/// preserve emptiness of every finite intersection of zero sets, and those
/// preserving disjointness of supports.
fn nonvanishing_oracle() -> (usize, usize) {
    let zero = |f: u8| !f & 0b11;
    let mut perms = Vec::new();
    for a in 0..4u8 {
        for b in 0..4u8 {
            for c in 0..4u8 {
                for d in 0..4u8 {
                    let p = [a, b, c, d];
                    if (0..4).all(|i| (0..i).all(|j| p[i] != p[j])) {
                        perms.push(p);
                    }
                }
            }
        }
    }
    let (mut nv, mut pp) = (0, 0);
    for p in &perms {
        let keeps = (1u8..16).all(|sub| {
            let meet = |img: bool| {
                (0..4u8)
                    .filter(|i| sub >> i & 1 == 1)
                    .fold(0b11, |acc, i| acc & zero(if img { p[i as usize] } else { i }))
            };
            (meet(false) == 0) == (meet(true) == 0)
        });
        nv += usize::from(keeps);
        let disjoint = (0..4u8).all(|f| (0..4u8).all(|g| (f & g == 0) == (p[f as usize] & p[g as usize] == 0)));
        pp += usize::from(disjoint);
    }
    (nv, pp)
}

type M2 = [[u64; 2]; 2];

fn mat_mul(a: &M2, b: &M2, m: u64) -> M2 {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = (a[i][0] * b[0][j] + a[i][1] * b[1][j]) % m;
        }
    }
    c
}

fn unit_matrix(i: usize, j: usize) -> M2 {
    let mut e = [[0; 2]; 2];
    e[i][j] = 1;
    e
}

/// Ring automorphisms of `M₂(Z/m)` mapping diagonal matrices onto diagonal
/// matrices, by search over images of the matrix units. The images of the
/// diagonal units range over diagonal idempotents.
fn matrix_aut_oracle(m: u64) -> usize {
    let units = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let e: Vec<M2> = units.iter().map(|&(i, j)| unit_matrix(i, j)).collect();
    let all: Vec<M2> = (0..m.pow(4))
        .map(|c| [[c % m, c / m % m], [c / m.pow(2) % m, c / m.pow(3) % m]])
        .collect();
    let diag_idem: Vec<M2> = all
        .iter()
        .copied()
        .filter(|x| x[0][1] == 0 && x[1][0] == 0 && mat_mul(x, x, m) == *x)
        .collect();
    let add = |a: &M2, b: &M2| -> M2 {
        [
            [(a[0][0] + b[0][0]) % m, (a[0][1] + b[0][1]) % m],
            [(a[1][0] + b[1][0]) % m, (a[1][1] + b[1][1]) % m],
        ]
    };
    let scale = |k: u64, a: &M2| -> M2 { [[k * a[0][0] % m, k * a[0][1] % m], [k * a[1][0] % m, k * a[1][1] % m]] };
    let mut count = 0;
    for d0 in &diag_idem {
        for d1 in &diag_idem {
            for x01 in &all {
                for x10 in &all {
                    let img = [*d0, *x01, *x10, *d1];
                    let ok = (0..4).all(|a| {
                        (0..4).all(|b| {
                            let prod = mat_mul(&e[a], &e[b], m);
                            let want = (0..4).fold([[0; 2]; 2], |acc, k| add(&acc, &scale(prod[units[k].0][units[k].1], &img[k])));
                            mat_mul(&img[a], &img[b], m) == want
                        })
                    });
                    if !ok {
                        continue;
                    }
                    // linear extension is bijective iff the four images span M₂(Z/m)
                    let hit: std::collections::BTreeSet<M2> = all
                        .iter()
                        .map(|c| (0..4).fold([[0; 2]; 2], |acc, k| add(&acc, &scale(c[units[k].0][units[k].1], &img[k]))))
                        .collect();
                    if hit.len() == all.len() {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

fn criterion(n: usize, id: &str, extra: impl FnOnce(&SuiteResult) -> Result<(), String>) -> Line {
    let start = Instant::now();
    let r = run_suite(id, &FULL).expect("known suite");
    let elapsed = start.elapsed();
    let mut text = summary(&r, elapsed);
    let mut ok = r.passed();
    if let Err(why) = extra(&r) {
        ok = false;
        text.push_str(&format!("; {why}"));
    }
    Line {
        ok,
        text: format!("criterion {n:>2} {text}"),
    }
}

fn end_to_end() -> Line {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_bstone"))
        .args(["suite", "--max-size", "3", "--seed", "42"])
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    let code = out.status.code();
    let ok = code == Some(0) && elapsed < Duration::from_secs(600);
    Line {
        ok,
        text: format!(
            "criterion 12 end-to-end suite --max-size 3 --seed 42: exit {code:?}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    }
}

fn require(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

#[test]
fn acceptance_criteria() {
    let (nv, pp) = nonvanishing_oracle();
    let (aut2, aut3) = (matrix_aut_oracle(2), matrix_aut_oracle(3));
    let mut lines: BTreeMap<usize, Line> = BTreeMap::new();
    std::thread::scope(|s| {
        let handles = vec![
            s.spawn(|| {
                let start = Instant::now();
                let l = criterion(1, "REL-1", |_| Ok(()));
                let ok = l.ok && start.elapsed() < Duration::from_secs(60);
                (1, Line { ok, ..l })
            }),
            s.spawn(|| {
                (
                    2,
                    criterion(2, "REL-2", |r| {
                        require(fact(r, "random_pairs") >= Some(500) && fact(r, "touching_pairs") > Some(0), || {
                            format!("facts {:?}", r.facts)
                        })
                    }),
                )
            }),
            s.spawn(|| (3, criterion(3, "IDE-1", |_| Ok(())))),
            s.spawn(|| {
                (
                    4,
                    criterion(4, "IDE-2", |r| {
                        require((1..=4).all(|n| fact(r, &format!("section_families_{n}")) >= Some(200)), || {
                            format!("facts {:?}", r.facts)
                        })
                    }),
                )
            }),
            s.spawn(|| (5, criterion(5, "STO-1", |_| Ok(())))),
            s.spawn(|| (6, criterion(6, "BAS-1", |r| require(r.cases >= 1000, || "fewer than 1000 cases".into())))),
            s.spawn(move || {
                (
                    7,
                    criterion(7, "BAS-2", |r| {
                        let got = (fact(r, "nonvanishing"), fact(r, "perp_perp_isomorphisms"));
                        require(got == (Some(nv), Some(pp)), || format!("counts {got:?}, brute force ({nv}, {pp})"))
                    }),
                )
            }),
            s.spawn(|| (8, criterion(8, "CLA-1", |_| Ok(())))),
            s.spawn(|| (9, criterion(9, "CLA-2", |_| Ok(())))),
            s.spawn(move || {
                (
                    10,
                    criterion(10, "STE-1", |r| {
                        let got = (fact(r, "aut_pair2_z2"), fact(r, "aut_pair2_z3"));
                        require(got == (Some(2), Some(aut3)) && aut2 == 2, || {
                            format!("orders {got:?}, brute force ({aut2}, {aut3})")
                        })
                    }),
                )
            }),
            s.spawn(|| {
                (
                    11,
                    criterion(11, "HAA-1", |r| {
                        require(fact(r, "max_arrows") == Some(6), || "arrow bound below 6".into())
                    }),
                )
            }),
            s.spawn(|| (12, end_to_end())),
        ];
        for h in handles {
            let (n, l) = h.join().expect("criterion thread");
            lines.insert(n, l);
        }
    });
    println!("brute force: {nv} non-vanishing bijections, {pp} perp-perp isomorphisms; |Aut| of M2(Z/2) = {aut2}, of M2(Z/3) = {aut3}");
    for l in lines.values() {
        println!("{} {}", if l.ok { "PASS" } else { "FAIL" }, l.text);
    }
    let failed: Vec<&str> = lines.values().filter(|l| !l.ok).map(|l| l.text.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:#?}");
}
