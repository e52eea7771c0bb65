//! Catalog ingestion, JSON reports and the command-line surface.
//!
//! Every number written is exact: integers as JSON integers (strings when
//! they exceed i64), rationals as "p/q" strings, field elements as
//! "a + b*sqrt(d)" strings. Objects are emitted with sorted keys.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::cusp::{self, CuspReport, IsotropicSubspace};
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational, FieldElem, ImagQuadField, Rational};
use crate::hlat::{self, HermLattice};
use crate::latalg::{enumerate_norm_vectors, EnumBudget, IntMatrix, Matrix};
use crate::ledger::{self, FormRecord};
use crate::qlat::{self, GroupChoice, QuadLattice};
use crate::ramify::{self, BranchReport, ClassDetail, ClassKey, Family, SearchBudget, Witness};
use crate::slope::{self, Assumption, SlopeVerdict};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

// -- JSON encoding -------------------------------------------------------

pub fn int_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn rat_json(x: &Rational) -> Value {
    json!(format_rational(x))
}

/// "a", "b*sqrt(d)", "a + b*sqrt(d)" or "a - b*sqrt(d)".
pub fn field_str(x: &FieldElem) -> String {
    x.to_string()
}

fn ints_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(int_json).collect())
}

fn int_matrix_json(m: &IntMatrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| ints_json(r)).collect())
}

fn field_matrix_json(m: &Matrix<FieldElem>) -> Value {
    Value::Array(
        m.to_rows()
            .iter()
            .map(|r| Value::Array(r.iter().map(|x| json!(field_str(x))).collect()))
            .collect(),
    )
}

/// Canonical text: sorted keys (serde_json's default map), two-space indent.
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn sha256_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

// -- JSON decoding -------------------------------------------------------

struct Ctx<'a> {
    entry: &'a str,
}

impl Ctx<'_> {
    fn err(&self, path: &str, message: impl Into<String>) -> Error {
        Error::Schema {
            entry: self.entry.to_string(),
            path: path.to_string(),
            message: message.into(),
        }
    }

    fn field<'v>(&self, obj: &'v Map<String, Value>, key: &str) -> Result<&'v Value> {
        obj.get(key).ok_or_else(|| self.err(key, "missing field"))
    }

    fn string(&self, v: &Value, path: &str) -> Result<String> {
        v.as_str()
            .map(str::to_string)
            .ok_or_else(|| self.err(path, "expected a string"))
    }

    fn int(&self, v: &Value, path: &str) -> Result<BigInt> {
        match v {
            Value::Number(n) if n.is_i64() => Ok(BigInt::from(n.as_i64().unwrap())),
            Value::Number(n) if n.is_u64() => Ok(BigInt::from(n.as_u64().unwrap())),
            Value::Number(_) => Err(self.err(path, "non-integral numbers are not allowed")),
            Value::String(s) => s
                .trim()
                .parse::<BigInt>()
                .map_err(|_| self.err(path, format!("`{s}` is not an integer"))),
            _ => Err(self.err(path, "expected an integer")),
        }
    }

    fn rat(&self, v: &Value, path: &str) -> Result<Rational> {
        match v {
            Value::String(s) => parse_rational(s).map_err(|e| self.err(path, e.to_string())),
            _ => self.int(v, path).map(Rational::from_integer),
        }
    }

    fn array<'v>(&self, v: &'v Value, path: &str) -> Result<&'v Vec<Value>> {
        v.as_array()
            .ok_or_else(|| self.err(path, "expected an array"))
    }

    fn int_rows(&self, v: &Value, path: &str) -> Result<Vec<Vec<BigInt>>> {
        self.array(v, path)?
            .iter()
            .enumerate()
            .map(|(i, row)| {
                self.array(row, &format!("{path}[{i}]"))?
                    .iter()
                    .enumerate()
                    .map(|(j, x)| self.int(x, &format!("{path}[{i}][{j}]")))
                    .collect()
            })
            .collect()
    }
}

// -- catalog -------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadEntry {
    pub lattice: QuadLattice,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermEntry {
    pub lattice: HermLattice,
    /// Quadratic lattice identified with the trace form.
    pub associated: Option<String>,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspEntry {
    pub cusp: IsotropicSubspace,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CatalogEntry {
    Quad(QuadEntry),
    Herm(HermEntry),
    Form(FormRecord),
    Cusp(CuspEntry),
}

impl CatalogEntry {
    pub fn kind(&self) -> &'static str {
        match self {
            CatalogEntry::Quad(_) => "quad_lattice",
            CatalogEntry::Herm(_) => "herm_lattice",
            CatalogEntry::Form(_) => "form",
            CatalogEntry::Cusp(_) => "cusp",
        }
    }

    pub fn name(&self) -> &str {
        match self {
            CatalogEntry::Quad(e) => &e.lattice.name,
            CatalogEntry::Herm(e) => &e.lattice.name,
            CatalogEntry::Form(f) => &f.name,
            CatalogEntry::Cusp(c) => &c.cusp.label,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("kind".into(), json!(self.kind()));
        m.insert("name".into(), json!(self.name()));
        match self {
            CatalogEntry::Quad(e) => {
                m.insert("gram".into(), int_matrix_json(&e.lattice.gram));
                m.insert("source".into(), json!(e.source));
            }
            CatalogEntry::Herm(e) => {
                m.insert("field_d".into(), json!(e.lattice.d()));
                m.insert("gram".into(), field_matrix_json(&e.lattice.gram));
                if let Some(a) = &e.associated {
                    m.insert("associated".into(), json!(a));
                }
                m.insert("source".into(), json!(e.source));
            }
            CatalogEntry::Form(f) => {
                m.insert("ambient".into(), json!(f.ambient));
                m.insert("weight".into(), rat_json(&f.weight));
                m.insert(
                    "divisor".into(),
                    Value::Array(
                        f.divisor
                            .iter()
                            .map(|(k, mult)| {
                                json!({
                                    "norm": rat_json(&k.norm),
                                    "special_even": k.special_even,
                                    "mult": rat_json(mult),
                                })
                            })
                            .collect(),
                    ),
                );
                m.insert("character_note".into(), json!(f.character_note));
                m.insert("source".into(), json!(f.source));
            }
            CatalogEntry::Cusp(c) => {
                m.insert("lattice".into(), json!(c.cusp.lattice));
                m.insert(
                    "cusp_basis".into(),
                    Value::Array(c.cusp.basis.iter().map(|v| ints_json(v)).collect()),
                );
                m.insert("source".into(), json!(c.source));
            }
        }
        Value::Object(m)
    }
}

/// An entry parsed from JSON; cusps are validated once lattices are known.
enum Parsed {
    Ready(CatalogEntry),
    Cusp {
        name: String,
        lattice: String,
        basis: Vec<Vec<BigInt>>,
        source: String,
    },
}

fn parse_entry(v: &Value) -> Result<Parsed> {
    let unnamed = Ctx { entry: "<unnamed>" };
    let obj = v
        .as_object()
        .ok_or_else(|| unnamed.err("", "entry must be a JSON object"))?;
    let name = unnamed.string(unnamed.field(obj, "name")?, "name")?;
    let cx = Ctx { entry: &name };
    let kind = cx.string(cx.field(obj, "kind")?, "kind")?;
    let source = match obj.get("source") {
        Some(s) => cx.string(s, "source")?,
        None => String::new(),
    };
    match kind.as_str() {
        "quad_lattice" => {
            let rows = cx.int_rows(cx.field(obj, "gram")?, "gram")?;
            let g = IntMatrix::from_rows(rows).map_err(|e| cx.err("gram", e.to_string()))?;
            if !g.is_square() {
                return Err(cx.err("gram", "Gram matrix must be square"));
            }
            let lattice =
                QuadLattice::new(name.clone(), g).map_err(|e| cx.err("gram", e.to_string()))?;
            Ok(Parsed::Ready(CatalogEntry::Quad(QuadEntry {
                lattice,
                source,
            })))
        }
        "herm_lattice" => {
            let d = cx.int(cx.field(obj, "field_d")?, "field_d")?;
            let d = d
                .to_i64()
                .ok_or_else(|| cx.err("field_d", "out of range"))?;
            let field = ImagQuadField::new(d).map_err(|e| cx.err("field_d", e.to_string()))?;
            let rows = cx.array(cx.field(obj, "gram")?, "gram")?;
            let mut grid = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                let mut r = Vec::new();
                for (j, x) in cx.array(row, &format!("gram[{i}]"))?.iter().enumerate() {
                    let path = format!("gram[{i}][{j}]");
                    let e = match x {
                        Value::String(s) => {
                            FieldElem::parse(s, d).map_err(|e| cx.err(&path, e.to_string()))?
                        }
                        _ => FieldElem::from_rational(
                            d,
                            cx.int(x, &path).map(Rational::from_integer)?,
                        ),
                    };
                    r.push(e);
                }
                grid.push(r);
            }
            let g = Matrix::from_rows(grid).map_err(|e| cx.err("gram", e.to_string()))?;
            if !g.is_square() {
                return Err(cx.err("gram", "Gram matrix must be square"));
            }
            let lattice = HermLattice::new(name.clone(), field, g)
                .map_err(|e| cx.err("gram", e.to_string()))?;
            let associated = match obj.get("associated") {
                Some(a) => Some(cx.string(a, "associated")?),
                None => None,
            };
            Ok(Parsed::Ready(CatalogEntry::Herm(HermEntry {
                lattice,
                associated,
                source,
            })))
        }
        "form" => {
            let ambient = cx.string(cx.field(obj, "ambient")?, "ambient")?;
            let weight = cx.rat(cx.field(obj, "weight")?, "weight")?;
            if !weight.is_positive() {
                return Err(cx.err("weight", "weight must be positive"));
            }
            let mut divisor = Vec::new();
            for (i, d) in cx
                .array(cx.field(obj, "divisor")?, "divisor")?
                .iter()
                .enumerate()
            {
                let p = format!("divisor[{i}]");
                let o = d
                    .as_object()
                    .ok_or_else(|| cx.err(&p, "expected an object"))?;
                let norm = cx.rat(
                    cx.field(o, "norm")
                        .map_err(|_| cx.err(&format!("{p}.norm"), "missing field"))?,
                    &format!("{p}.norm"),
                )?;
                let se = match o.get("special_even") {
                    Some(Value::Bool(b)) => *b,
                    None => false,
                    Some(_) => {
                        return Err(cx.err(&format!("{p}.special_even"), "expected a boolean"))
                    }
                };
                let mult = cx.rat(
                    cx.field(o, "mult")
                        .map_err(|_| cx.err(&format!("{p}.mult"), "missing field"))?,
                    &format!("{p}.mult"),
                )?;
                if !norm.is_negative() {
                    return Err(cx.err(&format!("{p}.norm"), "norm must be negative"));
                }
                divisor.push((ClassKey::new(norm, se), mult));
            }
            let note = match obj.get("character_note") {
                Some(n) => cx.string(n, "character_note")?,
                None => String::new(),
            };
            let f = FormRecord::new(name.clone(), ambient, weight, divisor, note, source)
                .map_err(|e| cx.err("divisor", e.to_string()))?;
            Ok(Parsed::Ready(CatalogEntry::Form(f)))
        }
        "cusp" => {
            let lattice = cx.string(cx.field(obj, "lattice")?, "lattice")?;
            let basis = cx.int_rows(cx.field(obj, "cusp_basis")?, "cusp_basis")?;
            Ok(Parsed::Cusp {
                name,
                lattice,
                basis,
                source,
            })
        }
        other => Err(cx.err("kind", format!("unknown kind `{other}`"))),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Catalog {
    pub quad: BTreeMap<String, QuadEntry>,
    pub herm: BTreeMap<String, HermEntry>,
    pub forms: BTreeMap<String, FormRecord>,
    pub cusps: BTreeMap<String, CuspEntry>,
}

fn herm_sum(name: &str, parts: &[&HermLattice]) -> HermLattice {
    HermLattice::direct_sum(name, parts).expect("built-in Hermitian lattice")
}

fn doubled(l: &HermLattice) -> HermLattice {
    l.scaled(&Rational::from_integer(2.into()), format!("{}(2)", l.name))
        .expect("scaling by 2")
}

impl Catalog {
    /// Built-in lattices, balls, forms and cusps.
    pub fn builtin() -> Catalog {
        let mut c = Catalog::default();
        let std = "standard lattice";
        let quads = vec![
            qlat::u(),
            qlat::u_scaled(2),
            qlat::a1(1),
            qlat::a1(-1),
            qlat::a1(2),
            qlat::a1(-2),
            qlat::e8(1),
            qlat::e8(-1),
            qlat::e8(-2),
            qlat::leech(1),
            qlat::leech(-1),
            qlat::ii_2_26(),
            qlat::ii_2_26_leech(),
            qlat::u_u_e8(),
            qlat::lambda_enr(),
            qlat::lambda_m1_q(),
        ];
        for l in quads {
            c.quad.insert(
                l.name.clone(),
                QuadEntry {
                    lattice: l,
                    source: std.into(),
                },
            );
        }
        for k in 1..=7 {
            let l = qlat::lambda_log_enr(k);
            c.quad.insert(
                l.name.clone(),
                QuadEntry {
                    lattice: l,
                    source: "log Enriques lattice U(2)+A1+A1(-1)^(9-k)".into(),
                },
            );
        }

        let (uu1, uu21, e81) = (
            hlat::lambda_uu_d1(),
            hlat::lambda_uu2_d1(),
            hlat::lambda_e8_d1(),
        );
        let (uu2, uu22, e82) = (
            hlat::lambda_uu_d2(),
            hlat::lambda_uu2_d2(),
            hlat::lambda_e8_d2(),
        );
        let piece_src = "explicit Hermitian Gram matrix";
        for l in [&uu1, &uu21, &e81, &uu2, &uu22, &e82] {
            c.add_herm(l.clone(), None, piece_src);
        }
        let balls: Vec<(HermLattice, &str)> = vec![
            (
                herm_sum("Lambda_UU_E8_d-1_rank14", &[&uu1, &e81, &e81, &e81]),
                "II_2_26",
            ),
            (
                herm_sum("Lambda_UU_E8_d-2_rank14", &[&uu2, &e82, &e82, &e82]),
                "II_2_26",
            ),
            (
                herm_sum("Lambda_UU_E8_d-1_rank6", &[&uu1, &e81]),
                "U_U_E8m1",
            ),
            (
                herm_sum("Lambda_UU_E8_d-2_rank6", &[&uu2, &e82]),
                "U_U_E8m1",
            ),
            (
                herm_sum("Lambda_UU2_E8x2_d-1_rank6", &[&uu21, &doubled(&e81)]),
                "Lambda_Enr",
            ),
            (
                herm_sum("Lambda_UU2_E8x2_d-2_rank6", &[&uu22, &doubled(&e82)]),
                "Lambda_Enr",
            ),
            (
                herm_sum("Lambda_m1_d-1", &[&uu1, &doubled(&e81)]),
                "Lambda_m1_Q",
            ),
            (
                herm_sum("Lambda_m2_d-2", &[&uu2, &doubled(&e82)]),
                "Lambda_m1_Q",
            ),
        ];
        for (l, a) in balls {
            c.add_herm(
                l,
                Some(a.into()),
                "orthogonal direct sum of the explicit pieces",
            );
        }

        for f in ledger::builtin_forms() {
            c.forms.insert(f.name.clone(), f);
        }

        let enr = qlat::lambda_enr();
        let [s1, s2] = cusp::sterk_planes(&enr).expect("Enriques cusps");
        let ii = qlat::ii_2_26();
        let mut leech = cusp::leech_plane_e8_cubed(&ii).expect("Leech plane");
        leech.label = "leech".into();
        let ll = qlat::ii_2_26_leech();
        let cusps = vec![
            (s1, "1-dimensional boundary component with quotient E8(-2)"),
            (s2, "1-dimensional boundary component orthogonal to e-f"),
            (
                leech,
                "isotropic plane with Leech quotient in the E8^3 model",
            ),
            (
                cusp::standard_plane(&ii, "e8cubed").unwrap(),
                "standard plane, quotient E8(-1)^3",
            ),
            (
                cusp::standard_plane(&ll, "leech_model").unwrap(),
                "standard plane of U+U+Leech(-1)",
            ),
            (
                cusp::standard_plane(&qlat::u_u_e8(), "e8").unwrap(),
                "standard plane, quotient E8(-1)",
            ),
        ];
        for (e, s) in cusps {
            c.cusps.insert(
                e.label.clone(),
                CuspEntry {
                    cusp: e,
                    source: s.into(),
                },
            );
        }
        c
    }

    fn add_herm(&mut self, l: HermLattice, associated: Option<String>, source: &str) {
        self.herm.insert(
            l.name.clone(),
            HermEntry {
                lattice: l,
                associated,
                source: source.into(),
            },
        );
    }

    pub fn entries(&self) -> Vec<CatalogEntry> {
        let mut out: Vec<CatalogEntry> = Vec::new();
        out.extend(self.quad.values().cloned().map(CatalogEntry::Quad));
        out.extend(self.herm.values().cloned().map(CatalogEntry::Herm));
        out.extend(self.forms.values().cloned().map(CatalogEntry::Form));
        out.extend(self.cusps.values().cloned().map(CatalogEntry::Cusp));
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.entries().iter().map(CatalogEntry::to_json).collect())
    }

    /// Adds an entry; re-adding an identical entry is a no-op.
    fn insert(&mut self, e: CatalogEntry) -> Result<()> {
        let dup = |name: &str, kind: &str| Error::Schema {
            entry: name.to_string(),
            path: "name".into(),
            message: format!("duplicate {kind} name with different payload"),
        };
        macro_rules! put {
            ($map:expr, $key:expr, $val:expr, $kind:expr) => {{
                match $map.get(&$key) {
                    Some(old) if *old != $val => return Err(dup(&$key, $kind)),
                    Some(_) => {}
                    None => {
                        $map.insert($key.clone(), $val);
                    }
                }
            }};
        }
        match e {
            CatalogEntry::Quad(q) => put!(self.quad, q.lattice.name.clone(), q, "quad_lattice"),
            CatalogEntry::Herm(h) => put!(self.herm, h.lattice.name.clone(), h, "herm_lattice"),
            CatalogEntry::Form(f) => put!(self.forms, f.name.clone(), f, "form"),
            CatalogEntry::Cusp(c) => put!(self.cusps, c.cusp.label.clone(), c, "cusp"),
        }
        Ok(())
    }

    /// Merges entries from a JSON value (one entry or an array of them).
    pub fn merge_json(&mut self, v: &Value) -> Result<()> {
        let items: Vec<&Value> = match v {
            Value::Array(a) => a.iter().collect(),
            other => vec![other],
        };
        let mut cusps = Vec::new();
        let mut names: BTreeMap<(String, String), ()> = BTreeMap::new();
        for item in items {
            let parsed = parse_entry(item)?;
            let (kind, name) = match &parsed {
                Parsed::Ready(e) => (e.kind().to_string(), e.name().to_string()),
                Parsed::Cusp { name, .. } => ("cusp".to_string(), name.clone()),
            };
            if names.insert((kind.clone(), name.clone()), ()).is_some() {
                return Err(Error::Schema {
                    entry: name,
                    path: "name".into(),
                    message: format!("{kind} name used twice"),
                });
            }
            match parsed {
                Parsed::Ready(e) => self.insert(e)?,
                Parsed::Cusp { .. } => cusps.push(parsed),
            }
        }
        for p in cusps {
            let Parsed::Cusp {
                name,
                lattice,
                basis,
                source,
            } = p
            else {
                unreachable!()
            };
            let cx = Ctx { entry: &name };
            let l = self
                .quad
                .get(&lattice)
                .ok_or_else(|| cx.err("lattice", format!("unknown quad_lattice `{lattice}`")))?;
            let cusp = IsotropicSubspace::new(&l.lattice, basis, name.clone())
                .map_err(|e| cx.err("cusp_basis", e.to_string()))?;
            self.insert(CatalogEntry::Cusp(CuspEntry { cusp, source }))?;
        }
        for (name, h) in &self.herm {
            if let Some(a) = &h.associated {
                if !self.quad.contains_key(a) {
                    return Err(Error::Schema {
                        entry: name.clone(),
                        path: "associated".into(),
                        message: format!("unknown quad_lattice `{a}`"),
                    });
                }
            }
        }
        for (name, f) in &self.forms {
            if !self.quad.contains_key(&f.ambient) && !self.herm.contains_key(&f.ambient) {
                return Err(Error::Schema {
                    entry: name.clone(),
                    path: "ambient".into(),
                    message: format!("unknown lattice `{}`", f.ambient),
                });
            }
        }
        Ok(())
    }

    pub fn from_json(v: &Value) -> Result<Catalog> {
        let mut c = Catalog::default();
        c.merge_json(v)?;
        Ok(c)
    }

    pub fn quad(&self, name: &str) -> Result<&QuadEntry> {
        self.quad
            .get(name)
            .ok_or_else(|| unknown("quad_lattice", name))
    }

    pub fn herm(&self, name: &str) -> Result<&HermEntry> {
        self.herm
            .get(name)
            .ok_or_else(|| unknown("herm_lattice", name))
    }

    pub fn form(&self, name: &str) -> Result<&FormRecord> {
        self.forms.get(name).ok_or_else(|| unknown("form", name))
    }

    pub fn cusp(&self, name: &str) -> Result<&CuspEntry> {
        self.cusps.get(name).ok_or_else(|| unknown("cusp", name))
    }

    /// Canonical JSON of one entry, used for input hashes.
    pub fn entry_hash(&self, kind: &str, name: &str) -> Result<String> {
        let e = match kind {
            "quad_lattice" => CatalogEntry::Quad(self.quad(name)?.clone()),
            "herm_lattice" => CatalogEntry::Herm(self.herm(name)?.clone()),
            "form" => CatalogEntry::Form(self.form(name)?.clone()),
            _ => CatalogEntry::Cusp(self.cusp(name)?.clone()),
        };
        Ok(sha256_hex(&canonical(&e.to_json())))
    }
}

fn unknown(kind: &str, name: &str) -> Error {
    Error::UnknownEntry {
        kind: kind.into(),
        name: name.into(),
    }
}

/// Built-ins plus every `*.json` file in `dir` (in file-name order).
pub fn load_catalog(dir: &Path) -> Result<Catalog> {
    let mut c = Catalog::builtin();
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    for f in files {
        let text = std::fs::read_to_string(&f)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::Schema {
            entry: f.display().to_string(),
            path: String::new(),
            message: e.to_string(),
        })?;
        reject_floats(&v, &f.display().to_string(), "")?;
        c.merge_json(&v)?;
    }
    Ok(c)
}

fn reject_floats(v: &Value, file: &str, path: &str) -> Result<()> {
    match v {
        Value::Number(n) if !n.is_i64() && !n.is_u64() => Err(Error::Schema {
            entry: file.into(),
            path: path.into(),
            message: "floating-point numbers are not allowed".into(),
        }),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .try_for_each(|(i, x)| reject_floats(x, file, &format!("{path}[{i}]"))),
        Value::Object(o) => o.iter().try_for_each(|(k, x)| {
            let sub = if path.is_empty() {
                k.clone()
            } else {
                format!("{path}.{k}")
            };
            reject_floats(x, file, &sub)
        }),
        _ => Ok(()),
    }
}

/// Writes the whole catalog as one canonical JSON file.
pub fn save_catalog(c: &Catalog, path: &Path) -> Result<()> {
    std::fs::write(path, canonical(&c.to_json()))?;
    Ok(())
}

// -- report payloads -----------------------------------------------------

fn key_json(k: &ClassKey) -> Value {
    json!({
        "label": k.label(),
        "norm": rat_json(&k.norm),
        "special_even": k.special_even,
    })
}

pub fn family_json(f: &Family) -> Value {
    match *f {
        Family::Orthogonal { n } => json!({"kind": "orthogonal", "n": n}),
        Family::Unitary { n, d } => json!({"kind": "unitary", "n": n, "d": d}),
    }
}

pub fn branch_json(b: &BranchReport) -> Value {
    let classes: Vec<Value> = b
        .classes
        .iter()
        .map(|c| {
            let mut v = key_json(&c.key);
            let o = v.as_object_mut().unwrap();
            o.insert("degree".into(), json!(c.degree));
            o.insert("exhaustive".into(), json!(c.exhaustive));
            o.insert(
                "witness".into(),
                match &c.witness {
                    Some(Witness::Quad(w)) => ints_json(w),
                    Some(Witness::Herm(w)) => {
                        Value::Array(w.iter().map(|x| json!(field_str(x))).collect())
                    }
                    None => Value::Null,
                },
            );
            match &c.detail {
                ClassDetail::Orth { divs } => {
                    o.insert("divs".into(), ints_json(divs));
                }
                ClassDetail::Herm { contents, units } => {
                    o.insert(
                        "contents".into(),
                        Value::Array(contents.iter().map(|x| json!(field_str(x))).collect()),
                    );
                    o.insert(
                        "admissible_units".into(),
                        Value::Array(units.iter().map(|x| json!(field_str(x))).collect()),
                    );
                }
            }
            v
        })
        .collect();
    json!({
        "lattice": b.lattice,
        "family": family_json(&b.family),
        "group": b.group.map(|g| g.to_string()),
        "classes": classes,
        "unresolved": b.unresolved.iter().map(|u| {
            let mut v = key_json(&u.key);
            v.as_object_mut().unwrap().insert("description".into(), json!(u.description));
            v
        }).collect::<Vec<_>>(),
        "exhaustive": b.exhaustive,
        "all_special_even": b.all_special_even,
        "candidates_examined": b.candidates_examined,
        "notes": b.notes,
    })
}

pub fn slope_json(s: &SlopeVerdict) -> Value {
    let per: Map<String, Value> = s
        .per_class_slopes
        .iter()
        .map(|(k, x)| (k.label(), rat_json(x)))
        .collect();
    json!({
        "s": s.s.as_ref().map(format_rational),
        "verdict": s.verdict.as_str(),
        "assumption": match s.assumption { Assumption::I => "I", Assumption::II => "II" },
        "form": s.form,
        "exponents": s.exponents,
        "per_class_slopes": per,
        "minimal_power": s.minimal_power,
        "notes": s.notes,
    })
}

pub fn cusp_json(r: &CuspReport) -> Value {
    json!({
        "lattice": r.lattice,
        "naked_count": r.naked_count,
        "cusps": r.rows.iter().map(|row| json!({
            "cusp": row.cusp,
            "quotient_rank": row.quotient_rank,
            "quotient_definite": row.quotient_definite,
            "naked": row.naked,
            "inconclusive": row.inconclusive,
            "classes": row.incidences.iter().map(|i| {
                let mut v = key_json(&i.key);
                let o = v.as_object_mut().unwrap();
                o.insert("contained".into(), json!(i.contained));
                o.insert("exhaustive".into(), json!(i.exhaustive));
                o.insert("witness".into(), i.witness.as_ref().map_or(Value::Null, |w| ints_json(w)));
                v
            }).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn invariants_json(l: &QuadLattice) -> Result<Value> {
    let inv = l.invariants()?;
    Ok(json!({
        "name": l.name,
        "rank": inv.rank,
        "signature": [inv.signature.0, inv.signature.1],
        "determinant": int_json(&inv.determinant),
        "is_even": inv.is_even,
        "disc_group": ints_json(&inv.disc_group),
    }))
}

/// The report envelope.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub result: Value,
    pub notes: Vec<String>,
    pub exhaustive: bool,
    pub timestamp: Option<u64>,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "version": VERSION,
            "command": self.command,
            "inputs": self.inputs,
            "result": self.result,
            "notes": self.notes,
            "exhaustive": self.exhaustive,
        });
        if let Some(t) = self.timestamp {
            v.as_object_mut()
                .unwrap()
                .insert("timestamp".into(), json!(t));
        }
        v
    }

    /// Hash of the result payload alone.
    pub fn result_hash(&self) -> String {
        sha256_hex(&canonical(&self.result))
    }
}

// -- command line --------------------------------------------------------

#[derive(Parser, Debug)]
#[command(name = "reflex", version = VERSION, about = "Exact branch-divisor, slope and cusp computations for orthogonal and unitary modular varieties")]
pub struct Cli {
    /// Catalog directory (overrides REFLEX_CATALOG).
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for enumeration (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Omit the timestamp field from the report.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct BudgetArgs {
    /// Node budget for definite enumeration.
    #[arg(long, global = true, default_value_t = EnumBudget::DEFAULT_NODES)]
    pub max_nodes: u64,
    /// Candidate budget for witness searches in indefinite lattices.
    #[arg(long, global = true, default_value_t = SearchBudget::default().max_candidates)]
    pub max_candidates: u64,
    /// Largest coordinate in witness searches.
    #[arg(long, global = true, default_value_t = SearchBudget::default().max_coeff)]
    pub max_coeff: i64,
    /// Largest support in witness searches.
    #[arg(long, global = true, default_value_t = SearchBudget::default().max_support)]
    pub max_support: usize,
}

impl BudgetArgs {
    fn enum_budget(&self) -> EnumBudget {
        EnumBudget::new(self.max_nodes)
    }
    fn search_budget(&self) -> SearchBudget {
        SearchBudget {
            max_support: self.max_support,
            max_coeff: self.max_coeff,
            max_candidates: self.max_candidates,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quadratic lattice queries.
    Lattice {
        #[command(subcommand)]
        cmd: LatticeCmd,
    },
    /// Hermitian lattice queries.
    Herm {
        #[command(subcommand)]
        cmd: HermCmd,
    },
    /// Branch-divisor report.
    Ramify(Target),
    /// Slope and verdict for one form.
    Classify {
        #[command(flatten)]
        target: Target,
        /// Form name from the ledger.
        #[arg(long)]
        form: String,
        /// Which assumption to test: i or ii.
        #[arg(long, default_value = "i")]
        assumption: String,
    },
    /// Search for a product of forms satisfying assumption (i).
    Combine {
        #[command(flatten)]
        target: Target,
        /// Comma-separated form names.
        #[arg(long, value_delimiter = ',')]
        forms: Vec<String>,
    },
    /// Cusp incidence and naked cusps.
    Cusp {
        /// Ambient quadratic lattice.
        #[arg(long)]
        lattice: String,
        /// Comma-separated cusp names; omit for an empty report.
        #[arg(long, value_delimiter = ',')]
        cusps: Vec<String>,
        /// Arithmetic group: full_plus or stable.
        #[arg(long, default_value = "full_plus")]
        group: GroupChoice,
    },
    /// Form ledger queries.
    Ledger {
        #[command(subcommand)]
        cmd: LedgerCmd,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Target {
    /// Quadratic lattice (orthogonal case).
    #[arg(long, conflicts_with = "herm", required_unless_present = "herm")]
    pub lattice: Option<String>,
    /// Hermitian lattice (unitary case).
    #[arg(long)]
    pub herm: Option<String>,
    /// Arithmetic group for quadratic targets: full_plus or stable.
    #[arg(long, default_value = "full_plus")]
    pub group: GroupChoice,
    /// Most negative norm considered ("p/q" allowed for Hermitian lattices).
    #[arg(long, allow_hyphen_values = true)]
    pub norm_bound: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum LatticeCmd {
    /// Rank, signature, determinant, parity and discriminant group.
    Info {
        #[arg(long)]
        lattice: String,
    },
    /// Vectors of a given norm in a definite lattice.
    Roots {
        #[arg(long)]
        lattice: String,
        #[arg(long, allow_hyphen_values = true, default_value = "-2")]
        norm: String,
        /// Include the vectors themselves, not just the count.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum HermCmd {
    /// Trace form and its invariants.
    TraceForm {
        #[arg(long)]
        herm: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum LedgerCmd {
    /// All forms in the catalog.
    List,
}

pub const SCHEMA_HELP: &str = "\
catalog entries (JSON, one object or an array per *.json file):
  {\"kind\": \"quad_lattice\", \"name\": ..., \"gram\": [[int]], \"source\": ...}
  {\"kind\": \"herm_lattice\", \"name\": ..., \"field_d\": int, \"gram\": [[\"a + b*sqrt(d)\"]],
   \"associated\": quad_lattice?, \"source\": ...}
  {\"kind\": \"form\", \"name\": ..., \"ambient\": lattice, \"weight\": \"p/q\",
   \"divisor\": [{\"norm\": int|\"p/q\", \"special_even\": bool, \"mult\": \"p/q\"}],
   \"character_note\": ..., \"source\": ...}
  {\"kind\": \"cusp\", \"name\": ..., \"lattice\": quad_lattice, \"cusp_basis\": [[int]], \"source\": ...}
numbers are integers or \"p/q\" strings; floats are rejected.
exit codes: 0 success, 2 NoMatch/NoConclusion verdict, 1 error.";

/// Outcome of one command.
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

fn parse_norm_bound_int(s: &Option<String>) -> Result<Option<BigInt>> {
    s.as_ref()
        .map(|x| {
            x.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("norm bound `{x}` is not an integer")))
        })
        .transpose()
}

/// Resolves a form for a target lattice, restricting to the ball when the
/// form lives on the associated quadratic lattice.
fn resolve_form(
    cat: &Catalog,
    form: &str,
    herm: Option<&HermEntry>,
    inputs: &mut BTreeMap<String, String>,
) -> Result<FormRecord> {
    let f = cat.form(form)?;
    inputs.insert(form.to_string(), cat.entry_hash("form", form)?);
    match herm {
        Some(h) if f.ambient != h.lattice.name => {
            let assoc = h.associated.as_deref().ok_or_else(|| {
                Error::AmbientMismatch(format!(
                    "{} has no associated quadratic lattice",
                    h.lattice.name
                ))
            })?;
            ledger::restrict_to_ball(f, &h.lattice, assoc)
        }
        _ => Ok(f.clone()),
    }
}

struct Branch {
    report: BranchReport,
    herm: Option<HermEntry>,
}

fn branch_for(
    cat: &Catalog,
    t: &Target,
    b: &BudgetArgs,
    inputs: &mut BTreeMap<String, String>,
) -> Result<Branch> {
    if let Some(name) = &t.herm {
        let h = cat.herm(name)?;
        inputs.insert(name.clone(), cat.entry_hash("herm_lattice", name)?);
        let bound = t.norm_bound.as_deref().map(parse_rational).transpose()?;
        let report = ramify::unitary_branch_report(&h.lattice, bound, &b.search_budget())?;
        Ok(Branch {
            report,
            herm: Some(h.clone()),
        })
    } else {
        let name = t.lattice.as_ref().expect("clap enforces a target");
        let q = cat.quad(name)?;
        inputs.insert(name.clone(), cat.entry_hash("quad_lattice", name)?);
        let report = ramify::orth_branch_report(
            &q.lattice,
            t.group,
            parse_norm_bound_int(&t.norm_bound)?,
            &b.search_budget(),
        )?;
        Ok(Branch { report, herm: None })
    }
}

/// Executes a parsed command against a catalog.
pub fn execute(cli: &Cli, cat: &Catalog, command_line: String) -> Result<Outcome> {
    let mut inputs = BTreeMap::new();
    let mut notes = Vec::new();
    let mut exhaustive = true;
    let mut exit_code = 0;
    let result = match &cli.command {
        Command::Lattice {
            cmd: LatticeCmd::Info { lattice },
        } => {
            let q = cat.quad(lattice)?;
            inputs.insert(lattice.clone(), cat.entry_hash("quad_lattice", lattice)?);
            invariants_json(&q.lattice)?
        }
        Command::Lattice {
            cmd:
                LatticeCmd::Roots {
                    lattice,
                    norm,
                    list,
                },
        } => {
            let q = cat.quad(lattice)?;
            inputs.insert(lattice.clone(), cat.entry_hash("quad_lattice", lattice)?);
            let target: BigInt = norm
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("norm `{norm}` is not an integer")))?;
            let en =
                enumerate_norm_vectors(&q.lattice.gram, &target, &cli.budget.enum_budget(), false)?;
            exhaustive = en.exhaustive;
            if !en.exhaustive {
                notes.push("node budget exhausted: count is a lower bound".into());
            }
            let mut v = json!({
                "lattice": lattice,
                "norm": int_json(&target),
                "count": en.vectors.len(),
                "nodes": en.nodes,
                "exhaustive": en.exhaustive,
            });
            if *list {
                v.as_object_mut().unwrap().insert(
                    "vectors".into(),
                    Value::Array(en.vectors.iter().map(|x| ints_json(x)).collect()),
                );
            }
            v
        }
        Command::Herm {
            cmd: HermCmd::TraceForm { herm },
        } => {
            let h = cat.herm(herm)?;
            inputs.insert(herm.clone(), cat.entry_hash("herm_lattice", herm)?);
            let inv = h.lattice.invariants()?;
            let tf = h.lattice.trace_form()?;
            let mut v = json!({
                "herm": herm,
                "field_d": h.lattice.d(),
                "herm_signature": [inv.signature.0, inv.signature.1],
                "herm_unimodular": inv.is_unimodular,
                "herm_even": inv.is_even,
                "trace_form": invariants_json(&tf)?,
                "trace_gram": int_matrix_json(&tf.gram),
            });
            if let Some(a) = &h.associated {
                let q = cat.quad(a)?;
                let ok = ledger::identification_plausible(&h.lattice, &q.lattice)?;
                v.as_object_mut().unwrap().insert(
                    "associated".into(),
                    json!({"lattice": a, "invariants_match": ok}),
                );
            }
            v
        }
        Command::Ramify(t) => {
            let b = branch_for(cat, t, &cli.budget, &mut inputs)?;
            exhaustive = b.report.exhaustive;
            notes.extend(b.report.notes.clone());
            branch_json(&b.report)
        }
        Command::Classify {
            target,
            form,
            assumption,
        } => {
            let b = branch_for(cat, target, &cli.budget, &mut inputs)?;
            let f = resolve_form(cat, form, b.herm.as_ref(), &mut inputs)?;
            let v = match assumption.as_str() {
                "i" | "I" => slope::check_assumption_i(&b.report, &f, b.report.family)?,
                "ii" | "II" => slope::check_assumption_ii(&b.report, &f, b.report.family)?,
                other => {
                    return Err(Error::Parse(format!(
                        "unknown assumption `{other}` (i | ii)"
                    )))
                }
            };
            exhaustive = b.report.exhaustive;
            notes.extend(b.report.notes.clone());
            notes.extend(
                v.notes
                    .iter()
                    .filter(|n| n.starts_with("discrepancy"))
                    .cloned(),
            );
            if v.verdict.is_negative() {
                exit_code = 2;
            }
            json!({"branch": branch_json(&b.report), "form": f.name, "slope": slope_json(&v)})
        }
        Command::Combine { target, forms } => {
            let b = branch_for(cat, target, &cli.budget, &mut inputs)?;
            let fs = forms
                .iter()
                .map(|f| resolve_form(cat, f, b.herm.as_ref(), &mut inputs))
                .collect::<Result<Vec<_>>>()?;
            let v = slope::find_assumption_i_combination(&b.report, &fs, b.report.family)?;
            exhaustive = b.report.exhaustive;
            notes.extend(b.report.notes.clone());
            notes.extend(
                v.notes
                    .iter()
                    .filter(|n| n.starts_with("discrepancy"))
                    .cloned(),
            );
            if v.verdict.is_negative() {
                exit_code = 2;
            }
            json!({"branch": branch_json(&b.report), "slope": slope_json(&v)})
        }
        Command::Cusp {
            lattice,
            cusps,
            group,
        } => {
            let q = cat.quad(lattice)?;
            inputs.insert(lattice.clone(), cat.entry_hash("quad_lattice", lattice)?);
            let mut subs = Vec::new();
            for c in cusps {
                subs.push(cat.cusp(c)?.cusp.clone());
                inputs.insert(c.clone(), cat.entry_hash("cusp", c)?);
            }
            let b =
                ramify::orth_branch_report(&q.lattice, *group, None, &cli.budget.search_budget())?;
            let r = cusp::naked_report(&q.lattice, &subs, &b, &cli.budget.enum_budget())?;
            exhaustive = b.exhaustive && r.rows.iter().all(|x| !x.inconclusive);
            notes.extend(b.notes.clone());
            json!({"branch": branch_json(&b), "cusps": cusp_json(&r)})
        }
        Command::Ledger {
            cmd: LedgerCmd::List,
        } => Value::Array(
            cat.forms
                .values()
                .map(|f| CatalogEntry::Form(f.clone()).to_json())
                .collect(),
        ),
    };
    let timestamp = if cli.no_timestamp {
        None
    } else {
        Some(
            std::env::var("SOURCE_DATE_EPOCH")
                .ok()
                .and_then(|s| s.parse().ok())
                .unwrap_or_else(|| {
                    std::time::SystemTime::now()
                        .duration_since(std::time::UNIX_EPOCH)
                        .map(|d| d.as_secs())
                        .unwrap_or(0)
                }),
        )
    };
    Ok(Outcome {
        report: Report {
            command: command_line,
            inputs,
            result,
            notes,
            exhaustive,
            timestamp,
        },
        exit_code,
    })
}

/// Resolves the catalog directory: flag, then REFLEX_CATALOG, else
/// built-ins only.
pub fn catalog_for(cli: &Cli) -> Result<Catalog> {
    let dir = cli
        .catalog
        .clone()
        .or_else(|| std::env::var_os("REFLEX_CATALOG").map(PathBuf::from));
    match dir {
        Some(d) => load_catalog(&d),
        None => Ok(Catalog::builtin()),
    }
}

/// Entry point for the binary. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let _ = e.print();
            eprintln!("\n{SCHEMA_HELP}");
            return 1;
        }
    };
    let command_line = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .filter(|a| !a.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    let go = || -> Result<Outcome> {
        let cat = catalog_for(&cli)?;
        execute(&cli, &cat, command_line)
    };
    let outcome = if cli.threads > 0 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build()
        {
            Ok(pool) => pool.install(go),
            Err(e) => Err(Error::InvalidArgument(e.to_string())),
        }
    } else {
        go()
    };
    match outcome {
        Ok(o) => {
            let text = canonical(&o.report.to_json());
            let written = match &cli.out {
                Some(p) => std::fs::write(p, &text).map_err(Error::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => o.exit_code,
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Schema { .. }) {
                eprintln!("\n{SCHEMA_HELP}");
            }
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_strings_roundtrip() {
        for (a, b) in [(0, 1), (1, 0), (1, -1), (-3, 2), (0, -1), (0, 0)] {
            for d in [-1, -2, -3] {
                let x = FieldElem::new(
                    d,
                    Rational::new(a.into(), 2.into()),
                    Rational::from_integer(b.into()),
                );
                assert_eq!(
                    FieldElem::parse(&field_str(&x), d).unwrap(),
                    x,
                    "{}",
                    field_str(&x)
                );
            }
        }
    }

    #[test]
    fn builtin_roundtrip() {
        let c = Catalog::builtin();
        let text = canonical(&c.to_json());
        let v: Value = serde_json::from_str(&text).unwrap();
        let c2 = Catalog::from_json(&v).unwrap();
        assert_eq!(c, c2);
        assert_eq!(canonical(&c2.to_json()), text);
    }

    #[test]
    fn associated_identifications() {
        let c = Catalog::builtin();
        for h in c.herm.values() {
            if let Some(a) = &h.associated {
                let q = &c.quad(a).unwrap().lattice;
                assert!(
                    ledger::identification_plausible(&h.lattice, q).unwrap(),
                    "{}",
                    h.lattice.name
                );
            }
        }
    }

    #[test]
    fn schema_errors() {
        let bad = json!({"kind": "quad_lattice", "name": "bad", "gram": [[2, 1], [0, 2]]});
        match Catalog::from_json(&bad) {
            Err(Error::Schema { entry, path, .. }) => {
                assert_eq!(entry, "bad");
                assert_eq!(path, "gram");
            }
            other => panic!("{other:?}"),
        }
        let bad = json!({"kind": "form", "name": "f", "ambient": "nowhere", "weight": "2", "divisor": []});
        assert!(matches!(
            Catalog::from_json(&bad),
            Err(Error::Schema { .. })
        ));
    }
}
