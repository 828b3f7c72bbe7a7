use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use crl_core::groups::{write_group_table, FiniteGroupTable};
use crl_core::structures::{write_structure, ClassPreset, PresetKind};
use crl_core::Structure;
use tempfile::TempDir;

fn crl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crl"))
        .current_dir(dir)
        .env_remove("CRL_JOBS")
        .args(args)
        .output()
        .expect("spawn crl")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn preset(dir: &Path, kind: PresetKind, n: usize) -> PathBuf {
    let s: Structure = ClassPreset::new(kind).generate(n).unwrap();
    let path = dir.join(format!("{}-{n}.crl", kind.name()));
    std::fs::write(&path, write_structure(&s)).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = preset(dir.path(), PresetKind::Graphs, 4);
    assert_eq!(
        crl(dir.path(), &["validate", p(&good)]).status.code(),
        Some(0)
    );

    let bad = dir.path().join("triangle.crl");
    std::fs::write(
        &bad,
        "crl-structure v1\nsignature 0\npoints 3\n x y z\ndist\n 1 3\n 1\nend\n",
    )
    .unwrap();
    let o = crl(dir.path(), &["validate", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stdout(&o).contains("triangle violation at"),
        "{}",
        stdout(&o)
    );

    let malformed = dir.path().join("malformed.crl");
    std::fs::write(
        &malformed,
        "crl-structure v1\nsignature 0\npoints 2\n x y\ndist\n 1/0\nend\n",
    )
    .unwrap();
    assert_eq!(
        crl(dir.path(), &["validate", p(&malformed)]).status.code(),
        Some(1)
    );
}

#[test]
fn preset_round_trips_through_validate() {
    let dir = TempDir::new().unwrap();
    let o = crl(
        dir.path(),
        &["preset", "two-level-ultrametric", "5", "-o", "u.crl"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        crl(dir.path(), &["validate", "u.crl"]).status.code(),
        Some(0)
    );
}

#[test]
fn enumerate_lists_embeddings() {
    let dir = TempDir::new().unwrap();
    let l2 = preset(dir.path(), PresetKind::LinearOrders, 2);
    let l4 = preset(dir.path(), PresetKind::LinearOrders, 4);
    let o = crl(dir.path(), &["enumerate", p(&l2), p(&l4)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("6 embeddings\n"));
}

#[test]
fn value_examples_and_certificates() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (p1, p2) = (
        preset(d, PresetKind::PureSets, 1),
        preset(d, PresetKind::PureSets, 2),
    );
    let o = crl(
        d,
        &[
            "value",
            p(&p1),
            p(&p2),
            p(&p2),
            "--eps",
            "1/2",
            "--cert",
            "pure.crlcert",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("0, YES\n"));

    let (l1, l2) = (
        preset(d, PresetKind::LinearOrders, 1),
        preset(d, PresetKind::LinearOrders, 2),
    );
    let o = crl(
        d,
        &[
            "value",
            p(&l1),
            p(&l2),
            p(&l2),
            "--eps",
            "1/2",
            "--cert",
            "lin.crlcert",
        ],
    );
    assert!(stdout(&o).starts_with("1, NO\n"));
    let o = crl(
        d,
        &[
            "value",
            p(&l1),
            p(&l2),
            p(&l2),
            "--eps",
            "1",
            "--cert",
            "lin1.crlcert",
        ],
    );
    assert!(stdout(&o).starts_with("1, YES\n"));

    for cert in ["pure.crlcert", "lin.crlcert", "lin1.crlcert"] {
        assert_eq!(crl(d, &["verify", cert]).status.code(), Some(0), "{cert}");
    }

    let text = std::fs::read_to_string(d.join("pure.crlcert")).unwrap();
    assert!(text.contains("  [0,1] 1/2\n"));
    std::fs::write(
        d.join("tampered.crlcert"),
        text.replacen("  [0,1] 1/2\n", "  [0,1] 1/3\n", 1),
    )
    .unwrap();
    let o = crl(d, &["verify", "tampered.crlcert"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("mass failure"));

    std::fs::write(d.join("truncated.crlcert"), &text[..text.len() / 2]).unwrap();
    assert_eq!(
        crl(d, &["verify", "truncated.crlcert"]).status.code(),
        Some(1)
    );
}

#[test]
fn degenerate_triples_are_reported() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (p1, p3) = (
        preset(d, PresetKind::PureSets, 1),
        preset(d, PresetKind::PureSets, 3),
    );
    let o = crl(d, &["value", p(&p1), p(&p3), p(&p1), "--eps", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Emb(B,C) is empty"));
    assert!(stdout(&o).contains("NO"));
}

#[test]
fn adaptive_certificate_verifies() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let l1 = preset(d, PresetKind::LinearOrders, 1);
    let l2 = preset(d, PresetKind::LinearOrders, 2);
    let l3 = preset(d, PresetKind::LinearOrders, 3);
    let o = crl(
        d,
        &[
            "value",
            p(&l1),
            p(&l2),
            p(&l3),
            "--eps",
            "1/4",
            "--mode",
            "adaptive",
            "--cert",
            "a.crlcert",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("1/2, NO\n"));
    assert_eq!(crl(d, &["verify", "a.crlcert"]).status.code(), Some(0));
}

#[test]
fn search_stops_or_exhausts() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let l1 = preset(d, PresetKind::LinearOrders, 1);
    let l2 = preset(d, PresetKind::LinearOrders, 2);
    let args = |max: &'static str, jobs: &'static str| {
        vec![
            "search",
            p(&l1),
            p(&l2),
            "--eps",
            "1/4",
            "--preset",
            "linear-orders",
            "--max-size",
            max,
            "--jobs",
            jobs,
        ]
    };
    let serial = crl(d, &args("8", "1"));
    assert_eq!(serial.status.code(), Some(0));
    assert!(stdout(&serial).contains("witness: linear-orders of size 5"));
    let parallel = crl(d, &args("8", "3"));
    assert_eq!(stdout(&serial), stdout(&parallel));

    let o = crl(d, &args("4", "2"));
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("exhausted"));

    let p1 = preset(d, PresetKind::PureSets, 1);
    let p2 = preset(d, PresetKind::PureSets, 2);
    let o = crl(
        d,
        &[
            "search",
            p(&p1),
            p(&p2),
            "--eps",
            "1/8",
            "--preset",
            "pure-sets",
            "--max-size",
            "6",
            "--cert",
            "s.crlcert",
        ],
    );
    assert!(stdout(&o).contains("witness: pure-sets of size 2"));
    assert_eq!(crl(d, &["verify", "s.crlcert"]).status.code(), Some(0));
}

#[test]
fn group_profiles() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let o = crl(
        d,
        &[
            "group",
            "--group",
            "abelian 1",
            "--F",
            "0,1",
            "--radius",
            "4",
        ],
    );
    assert_eq!(
        stdout(&o),
        "radius,value,decimal\n1,1/3,0.333333333333\n2,1/5,0.200000000000\n3,1/7,0.142857142857\n4,1/9,0.111111111111\n"
    );
    let o = crl(
        d,
        &[
            "group", "--group", "free 2", "--F", "e,a,b", "--radius", "3", "-o", "f2.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.join("f2.csv")).unwrap();
    assert_eq!(
        csv,
        "radius,value,decimal\n1,2/3,0.666666666667\n2,6/11,0.545454545455\n3,18/35,0.514285714286\n"
    );
    let o = crl(
        d,
        &["group", "--group", "free 2", "--F", "e,c", "--radius", "1"],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn finite_table_gives_zero() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let on: Arc<Structure> = Arc::new(ClassPreset::new(PresetKind::PureSets).generate(3).unwrap());
    let s3 = FiniteGroupTable::symmetric(3, Some(on)).unwrap();
    std::fs::write(d.join("s3.crlgroup"), write_group_table(&s3)).unwrap();
    let o = crl(
        d,
        &[
            "group",
            "--group",
            "s3.crlgroup",
            "--F",
            "0-1-2,1-0-2,1-2-0",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "radius,value,decimal\nall,0,0.000000000000\n");
    let o = crl(
        d,
        &[
            "group",
            "--group",
            "s3.crlgroup",
            "--F",
            "0-1-2,2-1-0",
            "--metric",
            "action",
        ],
    );
    assert_eq!(stdout(&o), "radius,value,decimal\nall,0,0.000000000000\n");
}

#[test]
fn reports_are_deterministic() {
    let run = || {
        let dir = TempDir::new().unwrap();
        let d = dir.path();
        for n in [1, 2, 4] {
            preset(d, PresetKind::LinearOrders, n);
        }
        let o = crl(
            d,
            &[
                "value",
                "linear-orders-1.crl",
                "linear-orders-2.crl",
                "linear-orders-4.crl",
                "--eps",
                "1/3",
                "--cert",
                "w.crlcert",
                "--report",
                "r.json",
            ],
        );
        assert_eq!(o.status.code(), Some(0));
        let text = std::fs::read_to_string(d.join("r.json")).unwrap();
        let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
        json.as_object_mut().unwrap().remove("elapsed_ms");
        (std::fs::read(d.join("w.crlcert")).unwrap(), json)
    };
    let (c1, r1) = run();
    let (c2, r2) = run();
    assert_eq!(c1, c2);
    assert_eq!(r1, r2);
    assert_eq!(r1["outputs"][0]["exact"], "1/3");
    assert_eq!(r1["outputs"][0]["decimal"], "0.333333333333");
    assert_eq!(r1["verdict"], "YES");
    assert_eq!(r1["certificates"][0], "w.crlcert");
}
