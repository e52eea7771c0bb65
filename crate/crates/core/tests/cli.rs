//! End-to-end runs of the `reflex` binary and catalog I/O.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

use reflex::cli::{
    canonical, load_catalog, save_catalog, Catalog, CatalogEntry, CuspEntry, HermEntry,
};
use reflex::hlat;
use reflex::Error;

fn reflex(args: &[&str], catalog: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_reflex"));
    c.env_remove("REFLEX_CATALOG")
        .env("SOURCE_DATE_EPOCH", "1700000000");
    if let Some(dir) = catalog {
        c.env("REFLEX_CATALOG", dir);
    }
    c.args(args).output().unwrap()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

#[test]
fn classify_ii_2_26() {
    let o = reflex(
        &[
            "classify",
            "--lattice",
            "II_2_26",
            "--form",
            "Phi12",
            "--group",
            "full_plus",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["result"]["slope"]["verdict"], "CanonicalModel");
    assert_eq!(r["result"]["slope"]["s"], "3/13");
    assert_eq!(r["timestamp"], 1700000000);
    assert!(r["inputs"]["II_2_26"].as_str().unwrap().len() == 64);
    assert!(r["inputs"]["Phi12"].is_string());
}

#[test]
fn ramify_rare_is_empty() {
    let o = reflex(&["ramify", "--herm", "Lambda_UU_E8_d-2_rank14"], None);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["result"]["classes"], json!([]));
    assert_eq!(r["exhaustive"], true);
}

#[test]
fn enriques_has_no_naked_cusps() {
    let o = reflex(
        &[
            "cusp",
            "--lattice",
            "Lambda_Enr",
            "--cusps",
            "sterk1,sterk2",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&o)["result"]["cusps"]["naked_count"], 0);
}

#[test]
fn no_cusps_gives_empty_report() {
    let o = reflex(&["cusp", "--lattice", "Lambda_Enr"], None);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["result"]["cusps"]["cusps"], json!([]));
    assert_eq!(r["result"]["cusps"]["naked_count"], 0);
}

#[test]
fn no_match_and_no_conclusion_exit_2() {
    let o = reflex(
        &["classify", "--lattice", "Lambda_Enr", "--form", "Phi4"],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(report(&o)["result"]["slope"]["verdict"], "NoMatch");
    let o = reflex(
        &[
            "classify",
            "--herm",
            "Lambda_m1_d-1",
            "--form",
            "Psi12",
            "--assumption",
            "ii",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    let r = report(&o);
    assert_eq!(r["result"]["slope"]["verdict"], "NoConclusion");
    assert_eq!(r["result"]["slope"]["s"], "1/2");
}

#[test]
fn errors_exit_1() {
    let o = reflex(&["lattice", "info", "--lattice", "nope"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));
    // usage error: schema help goes to stderr
    let o = reflex(&["frobnicate"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("catalog entries"));
}

#[test]
fn lattice_and_herm_queries() {
    let r = report(&reflex(
        &["lattice", "info", "--lattice", "Lambda_Enr"],
        None,
    ));
    assert_eq!(r["result"]["signature"], json!([2, 10]));
    assert_eq!(
        r["result"]["disc_group"],
        json!([2, 2, 2, 2, 2, 2, 2, 2, 2, 2])
    );
    let r = report(&reflex(&["lattice", "roots", "--lattice", "E8(-1)"], None));
    assert_eq!(r["result"]["count"], 240);
    let r = report(&reflex(
        &["herm", "trace-form", "--herm", "Lambda_UU2_E8x2_d-1_rank6"],
        None,
    ));
    assert_eq!(r["result"]["associated"]["invariants_match"], true);
    assert_eq!(r["result"]["trace_form"]["signature"], json!([2, 10]));
    let r = report(&reflex(&["ledger", "list"], None));
    assert_eq!(r["result"].as_array().unwrap().len(), 19);
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let args = [
        "combine",
        "--herm",
        "Lambda_UU2_E8x2_d-1_rank6",
        "--forms",
        "Phi4,Phi124",
        "--out",
        out.to_str().unwrap(),
    ];
    let mut texts = Vec::new();
    for _ in 0..2 {
        let o = reflex(&args, None);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        texts.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let v: Value = serde_json::from_slice(&texts[0]).unwrap();
    assert_eq!(v["result"]["slope"]["s"], "65/12");
    assert!(v["notes"]
        .as_array()
        .unwrap()
        .iter()
        .any(|n| n.as_str().unwrap().contains("62")));
}

#[test]
fn empty_catalog_dir_is_builtins() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(load_catalog(dir.path()).unwrap(), Catalog::builtin());
}

#[test]
fn catalog_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let c = Catalog::builtin();
    save_catalog(&c, &dir.path().join("all.json")).unwrap();
    let loaded = load_catalog(dir.path()).unwrap();
    assert_eq!(loaded, c);
    let again = tempfile::tempdir().unwrap();
    save_catalog(&loaded, &again.path().join("all.json")).unwrap();
    assert_eq!(
        std::fs::read(dir.path().join("all.json")).unwrap(),
        std::fs::read(again.path().join("all.json")).unwrap()
    );
}

#[test]
fn iyanaga_entry_loads() {
    let dir = tempfile::tempdir().unwrap();
    let mut l = hlat::lambda_e8_d1();
    l.name = "Iyanaga".into();
    let e = CatalogEntry::Herm(HermEntry {
        lattice: l,
        associated: Some("E8(-1)".into()),
        source: "Iyanaga's matrix".into(),
    });
    std::fs::write(dir.path().join("iyanaga.json"), canonical(&e.to_json())).unwrap();
    let c = load_catalog(dir.path()).unwrap();
    let inv = c.herm("Iyanaga").unwrap().lattice.invariants().unwrap();
    assert_eq!(inv.signature, (0, 4));
    assert!(inv.is_unimodular && inv.is_even);
    let o = reflex(
        &["herm", "trace-form", "--herm", "Iyanaga"],
        Some(dir.path()),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&o)["result"]["associated"]["invariants_match"], true);
}

#[test]
fn user_entries_are_usable() {
    let dir = tempfile::tempdir().unwrap();
    let entries = json!([
        {"kind": "form", "name": "Phi12sq", "ambient": "II_2_26", "weight": "24",
         "divisor": [{"norm": -2, "special_even": false, "mult": "2"}], "source": "square"},
        {"kind": "cusp", "name": "plane", "lattice": "U_U_E8m1",
         "cusp_basis": [[1,0,0,0,0,0,0,0,0,0,0,0], [0,0,1,0,0,0,0,0,0,0,0,0]]}
    ]);
    std::fs::write(dir.path().join("mine.json"), entries.to_string()).unwrap();
    let r = report(&reflex(
        &["classify", "--lattice", "II_2_26", "--form", "Phi12sq"],
        Some(dir.path()),
    ));
    assert_eq!(r["result"]["slope"]["s"], "3/13");
    let r = report(&reflex(
        &["cusp", "--lattice", "U_U_E8m1", "--cusps", "plane"],
        Some(dir.path()),
    ));
    assert_eq!(r["result"]["cusps"]["naked_count"], 0);
    // --catalog wins over the environment
    let o = reflex(
        &["--catalog", "/nonexistent/dir", "ledger", "list"],
        Some(dir.path()),
    );
    assert_eq!(o.status.code(), Some(1));
}

fn schema_error(entry: Value) -> (String, String) {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), entry.to_string()).unwrap();
    match load_catalog(dir.path()) {
        Err(Error::Schema { entry, path, .. }) => (entry, path),
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn schema_errors_name_entry_and_path() {
    assert_eq!(
        schema_error(json!({"kind": "quad_lattice", "name": "asym", "gram": [[2, 1], [0, 2]]})),
        ("asym".into(), "gram".into())
    );
    assert_eq!(
        schema_error(
            serde_json::from_str(
                r#"{"kind": "quad_lattice", "name": "fl", "gram": [[2.5, 1], [1, 2]]}"#
            )
            .unwrap()
        )
        .1,
        "gram[0][0]"
    );
    assert_eq!(
        schema_error(
            json!({"kind": "form", "name": "f", "ambient": "II_2_26", "weight": "12",
                            "divisor": [{"norm": 2, "special_even": false, "mult": "1"}]})
        ),
        ("f".into(), "divisor[0].norm".into())
    );
    assert_eq!(
        schema_error(json!({"kind": "cusp", "name": "c", "lattice": "U_U_E8m1",
                            "cusp_basis": [[1,1,0,0,0,0,0,0,0,0,0,0]]})),
        ("c".into(), "cusp_basis".into())
    );
    assert_eq!(
        schema_error(json!({"kind": "widget", "name": "w"})).1,
        "kind"
    );
    assert_eq!(
        schema_error(json!({"kind": "quad_lattice", "name": "U", "gram": [[0, 2], [2, 0]]})),
        ("U".into(), "name".into())
    );
    // a conflicting catalog entry file is rejected by the CLI too
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        json!({"kind": "herm_lattice", "name": "h", "field_d": -5, "gram": [["1"]]}).to_string(),
    )
    .unwrap();
    let o = reflex(&["ledger", "list"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("field_d") && err.contains("catalog entries"),
        "{err}"
    );
}

#[test]
fn duplicate_identical_entries_are_fine() {
    let dir = tempfile::tempdir().unwrap();
    let c = Catalog::builtin();
    let u = CatalogEntry::Quad(c.quad("U").unwrap().clone());
    std::fs::write(dir.path().join("u.json"), canonical(&u.to_json())).unwrap();
    let s = CatalogEntry::Cusp(CuspEntry {
        ..c.cusp("sterk1").unwrap().clone()
    });
    std::fs::write(dir.path().join("s.json"), canonical(&s.to_json())).unwrap();
    assert_eq!(load_catalog(dir.path()).unwrap(), c);
}
