//! The JSON document format: ring, element, matrix and complex literals and
//! the named-object workspace that the command line reads and writes.
//!
//! Element literals: integers are decimal strings, group-ring elements are
//! lists of `[coefficient, index]`, Laurent elements are lists of
//! `[base literal, exponent]` and quadratic elements are `[a, b]`. Printing
//! is canonical (sorted keys, canonical elements), so `parse . print` is the
//! identity on printed documents.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chain::{ChainEquivalence, ChainError, ChainMap, Homotopy, ProjComplex, ProjModule};
use crate::k0::{ObstructionReport, StableFreenessWitness};
use crate::linalg::Mat;
use crate::ranicki::Domination;
use crate::ring::{group_canonical, laurent_canonical, GroupTable, RingDescriptor, RingElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DocError {
    #[error("malformed document: {0}")]
    Json(String),
    #[error("invalid literal at {path}: {msg}")]
    Literal { path: String, msg: String },
    #[error("unresolved {kind} reference `{name}`")]
    Unresolved { kind: &'static str, name: String },
    #[error("ring mismatch at {0}")]
    RingMismatch(String),
    #[error("invalid object at {path}: {source}")]
    Object { path: String, source: ChainError },
}

impl DocError {
    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            DocError::Json(_) => "malformed_json",
            DocError::Literal { .. } => "invalid_literal",
            DocError::Unresolved { .. } => "unresolved_reference",
            DocError::RingMismatch(_) => "ring_mismatch",
            DocError::Object { .. } => "invalid_object",
        }
    }
}

fn lit(path: &str, msg: impl Into<String>) -> DocError {
    DocError::Literal { path: path.to_string(), msg: msg.into() }
}

fn object(path: &str) -> impl FnOnce(ChainError) -> DocError + '_ {
    move |source| DocError::Object { path: path.to_string(), source }
}

/// Object with keys inserted in sorted order, whatever the map backend.
fn obj(mut pairs: Vec<(&str, Value)>) -> Value {
    pairs.sort_by(|a, b| a.0.cmp(b.0));
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

fn fields<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>, DocError> {
    let m = v.as_object().ok_or_else(|| lit(path, "expected an object"))?;
    if let Some(k) = m.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(lit(path, format!("unknown field `{k}`")));
    }
    Ok(m)
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, DocError> {
    m.get(key).ok_or_else(|| lit(path, format!("missing field `{key}`")))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, DocError> {
    v.as_array().ok_or_else(|| lit(path, "expected a list"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str, DocError> {
    v.as_str().ok_or_else(|| lit(path, "expected a string"))
}

fn as_i64(v: &Value, path: &str) -> Result<i64, DocError> {
    v.as_i64().ok_or_else(|| lit(path, "expected an integer"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, DocError> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| lit(path, "expected a non-negative integer"))
}

fn as_bigint(v: &Value, path: &str) -> Result<BigInt, DocError> {
    match v {
        Value::String(s) => s.parse().map_err(|_| lit(path, format!("`{s}` is not an integer"))),
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from))
            .ok_or_else(|| lit(path, "expected an integer")),
        _ => Err(lit(path, "expected an integer or decimal string")),
    }
}

fn pair<'a>(v: &'a Value, path: &str) -> Result<(&'a Value, &'a Value), DocError> {
    match as_array(v, path)?.as_slice() {
        [a, b] => Ok((a, b)),
        _ => Err(lit(path, "expected a pair")),
    }
}

pub fn ring_to_value(ring: &RingDescriptor) -> Value {
    match ring {
        RingDescriptor::Integers => obj(vec![("kind", "integers".into())]),
        RingDescriptor::GroupRing(t) => obj(vec![
            ("kind", "group_ring".into()),
            ("table", Value::Array(t.rows().iter().map(|r| r.iter().map(|&g| Value::from(g)).collect()).collect())),
        ]),
        RingDescriptor::Laurent(base) => obj(vec![("kind", "laurent".into()), ("base", ring_to_value(base))]),
        RingDescriptor::Quadratic(d) => obj(vec![("kind", "quadratic".into()), ("d", (*d).into())]),
    }
}

pub fn parse_ring(v: &Value, path: &str) -> Result<RingDescriptor, DocError> {
    let m = fields(v, path, &["kind", "table", "cyclic", "d", "base"])?;
    let bad = |e: crate::ring::RingError| lit(path, e.to_string());
    match as_str(field(m, "kind", path)?, path)? {
        "integers" => Ok(RingDescriptor::Integers),
        "group_ring" => {
            if let Some(n) = m.get("cyclic") {
                let n = as_usize(n, path)?;
                if n == 0 {
                    return Err(lit(path, "cyclic group of order 0"));
                }
                return Ok(RingDescriptor::group_ring(GroupTable::cyclic(n)));
            }
            let rows = as_array(field(m, "table", path)?, path)?
                .iter()
                .map(|r| as_array(r, path)?.iter().map(|g| as_usize(g, path)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            Ok(RingDescriptor::group_ring(GroupTable::new(rows).map_err(bad)?))
        }
        "quadratic" => RingDescriptor::quadratic(as_i64(field(m, "d", path)?, path)?).map_err(bad),
        "laurent" => RingDescriptor::laurent(parse_ring(field(m, "base", path)?, path)?).map_err(bad),
        other => Err(lit(path, format!("unknown ring kind `{other}`"))),
    }
}

pub fn elem_to_value(ring: &RingDescriptor, e: &RingElem) -> Value {
    match e {
        RingElem::Int(n) => Value::String(n.to_string()),
        RingElem::Quad(a, b) => Value::Array(vec![a.to_string().into(), b.to_string().into()]),
        RingElem::Group(t) => {
            Value::Array(t.iter().map(|(c, g)| Value::Array(vec![c.to_string().into(), (*g).into()])).collect())
        }
        RingElem::Laurent(t) => {
            let base = ring.laurent_base().unwrap_or(ring);
            Value::Array(t.iter().map(|(c, k)| Value::Array(vec![elem_to_value(base, c), (*k).into()])).collect())
        }
    }
}

pub fn parse_elem(ring: &RingDescriptor, v: &Value, path: &str) -> Result<RingElem, DocError> {
    let e = match ring {
        RingDescriptor::Integers => RingElem::Int(as_bigint(v, path)?),
        RingDescriptor::Quadratic(_) => {
            let (a, b) = pair(v, path)?;
            RingElem::Quad(as_bigint(a, path)?, as_bigint(b, path)?)
        }
        RingDescriptor::GroupRing(_) => {
            let terms = as_array(v, path)?
                .iter()
                .map(|t| {
                    let (c, g) = pair(t, path)?;
                    Ok((as_bigint(c, path)?, as_usize(g, path)?))
                })
                .collect::<Result<Vec<_>, DocError>>()?;
            group_canonical(terms)
        }
        RingDescriptor::Laurent(base) => {
            let terms = as_array(v, path)?
                .iter()
                .map(|t| {
                    let (c, k) = pair(t, path)?;
                    Ok((parse_elem(base, c, path)?, as_i64(k, path)?))
                })
                .collect::<Result<Vec<_>, DocError>>()?;
            laurent_canonical(base, terms)
        }
    };
    ring.check(&e).map_err(|err| lit(path, err.to_string()))?;
    Ok(e)
}

pub fn matrix_to_value(m: &Mat) -> Value {
    obj(vec![
        ("rows", m.rows().into()),
        ("cols", m.cols().into()),
        ("entries", Value::Array(m.entries().iter().map(|e| elem_to_value(m.ring(), e)).collect())),
    ])
}

pub fn parse_matrix(ring: &RingDescriptor, v: &Value, path: &str) -> Result<Mat, DocError> {
    let m = fields(v, path, &["rows", "cols", "entries"])?;
    let rows = as_usize(field(m, "rows", path)?, path)?;
    let cols = as_usize(field(m, "cols", path)?, path)?;
    let entries = as_array(field(m, "entries", path)?, path)?;
    if entries.len() != rows * cols {
        return Err(lit(path, format!("{rows}x{cols} matrix with {} entries", entries.len())));
    }
    let entries = entries
        .iter()
        .enumerate()
        .map(|(k, e)| parse_elem(ring, e, &format!("{path}.entries[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Mat::new(ring, rows, cols, entries).map_err(|e| lit(path, e.to_string()))
}

pub fn module_to_value(p: &ProjModule) -> Value {
    let idem = if p.is_free() { "free".into() } else { matrix_to_value(p.idempotent()) };
    obj(vec![("ambient_rank", p.ambient_rank().into()), ("idempotent", idem)])
}

pub fn parse_module(ring: &RingDescriptor, v: &Value, path: &str) -> Result<ProjModule, DocError> {
    let m = fields(v, path, &["ambient_rank", "idempotent"])?;
    let rank = as_usize(field(m, "ambient_rank", path)?, path)?;
    let idem = field(m, "idempotent", path)?;
    if idem.as_str() == Some("free") {
        return Ok(ProjModule::free(ring, rank));
    }
    let e = parse_matrix(ring, idem, &format!("{path}.idempotent"))?;
    if e.rows() != rank {
        return Err(lit(path, format!("ambient rank {rank} but idempotent is {}x{}", e.rows(), e.cols())));
    }
    ProjModule::new_unchecked(e).map_err(object(path))
}

pub fn complex_to_value(x: &ProjComplex) -> Value {
    let mut pairs = vec![
        ("bottom_degree", x.bottom().into()),
        ("modules", Value::Array(x.modules().iter().map(module_to_value).collect())),
        ("boundaries", Value::Array(x.boundaries().iter().map(matrix_to_value).collect())),
    ];
    if x.ring().laurent_base().is_some() {
        pairs.push(("laurent", true.into()));
    }
    obj(pairs)
}

/// `ring` is the document ring; a `laurent: true` marker moves the complex
/// to the Laurent extension.
pub fn parse_complex(ring: &RingDescriptor, v: &Value, path: &str) -> Result<ProjComplex, DocError> {
    let m = fields(v, path, &["bottom_degree", "modules", "boundaries", "laurent"])?;
    let ring = match m.get("laurent") {
        Some(Value::Bool(true)) => RingDescriptor::laurent(ring.clone()).map_err(|e| lit(path, e.to_string()))?,
        Some(Value::Bool(false)) | None => ring.clone(),
        Some(_) => return Err(lit(path, "`laurent` must be a boolean")),
    };
    let bottom = as_i64(field(m, "bottom_degree", path)?, path)?;
    let modules = as_array(field(m, "modules", path)?, path)?
        .iter()
        .enumerate()
        .map(|(k, p)| parse_module(&ring, p, &format!("{path}.modules[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let boundaries = as_array(field(m, "boundaries", path)?, path)?
        .iter()
        .enumerate()
        .map(|(k, d)| parse_matrix(&ring, d, &format!("{path}.boundaries[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    ProjComplex::new(&ring, bottom, modules, boundaries).map_err(object(path))
}

fn components_to_value(c: &BTreeMap<i64, Mat>) -> Value {
    Value::Array(c.iter().map(|(n, m)| obj(vec![("degree", (*n).into()), ("matrix", matrix_to_value(m))])).collect())
}

fn parse_components(ring: &RingDescriptor, v: &Value, path: &str) -> Result<BTreeMap<i64, Mat>, DocError> {
    let mut out = BTreeMap::new();
    for (k, c) in as_array(v, path)?.iter().enumerate() {
        let p = format!("{path}[{k}]");
        let m = fields(c, &p, &["degree", "matrix"])?;
        let n = as_i64(field(m, "degree", &p)?, &p)?;
        if out.insert(n, parse_matrix(ring, field(m, "matrix", &p)?, &p)?).is_some() {
            return Err(lit(&p, format!("degree {n} given twice")));
        }
    }
    Ok(out)
}

pub fn witness_to_value(w: &StableFreenessWitness) -> Value {
    obj(vec![
        ("a", w.a.into()),
        ("b", w.b.into()),
        ("iso", matrix_to_value(&w.iso)),
        ("iso_inverse", matrix_to_value(&w.iso_inverse)),
    ])
}

pub fn parse_witness(ring: &RingDescriptor, v: &Value, path: &str) -> Result<StableFreenessWitness, DocError> {
    let m = fields(v, path, &["a", "b", "iso", "iso_inverse", "module"])?;
    Ok(StableFreenessWitness {
        a: as_usize(field(m, "a", path)?, path)?,
        b: as_usize(field(m, "b", path)?, path)?,
        iso: parse_matrix(ring, field(m, "iso", path)?, &format!("{path}.iso"))?,
        iso_inverse: parse_matrix(ring, field(m, "iso_inverse", path)?, &format!("{path}.iso_inverse"))?,
    })
}

/// `{ chi, sigma: { plus, minus }, witness }`.
pub fn obstruction_to_value(r: &ObstructionReport) -> Value {
    let list = |ms: &[ProjModule]| Value::Array(ms.iter().map(module_to_value).collect());
    obj(vec![
        ("chi", r.chi.into()),
        ("sigma", obj(vec![("plus", list(&r.sigma.plus)), ("minus", list(&r.sigma.minus))])),
        ("witness", r.sigma_zero_witness.as_ref().map(witness_to_value).unwrap_or(Value::Null)),
    ])
}

/// A map or homotopy together with the names of its ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Named<T> {
    pub source: String,
    pub target: String,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominationRefs {
    pub a: String,
    pub c: String,
    pub i: String,
    pub r: String,
    pub s: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceRefs {
    pub forward: String,
    pub backward: String,
    pub source_homotopy: String,
    pub target_homotopy: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessDoc {
    pub module: Option<String>,
    pub witness: StableFreenessWitness,
}

/// Where a derived document came from: the source object's name and the
/// SHA-256 of its canonical text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub source: String,
    pub digest: String,
}

/// One ring and named tables of objects over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    pub ring: RingDescriptor,
    pub modules: BTreeMap<String, ProjModule>,
    pub complexes: BTreeMap<String, ProjComplex>,
    pub maps: BTreeMap<String, Named<ChainMap>>,
    pub homotopies: BTreeMap<String, Named<Homotopy>>,
    pub dominations: BTreeMap<String, DominationRefs>,
    pub witnesses: BTreeMap<String, WitnessDoc>,
    pub equivalences: BTreeMap<String, EquivalenceRefs>,
    pub provenance: Option<Provenance>,
}

const TOP_LEVEL: &[&str] =
    &["ring", "modules", "complexes", "maps", "homotopies", "dominations", "witnesses", "equivalences", "provenance"];

fn table<'a>(m: &'a Map<String, Value>, key: &str) -> Result<Vec<(&'a String, &'a Value)>, DocError> {
    match m.get(key) {
        None => Ok(Vec::new()),
        Some(Value::Object(t)) => Ok(t.iter().collect()),
        Some(_) => Err(lit(key, "expected a table of named objects")),
    }
}

fn string_field(m: &Map<String, Value>, key: &str, path: &str) -> Result<String, DocError> {
    Ok(as_str(field(m, key, path)?, path)?.to_string())
}

impl Workspace {
    pub fn new(ring: &RingDescriptor) -> Self {
        Workspace {
            ring: ring.clone(),
            modules: BTreeMap::new(),
            complexes: BTreeMap::new(),
            maps: BTreeMap::new(),
            homotopies: BTreeMap::new(),
            dominations: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            equivalences: BTreeMap::new(),
            provenance: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, DocError> {
        let v: Value = serde_json::from_str(text).map_err(|e| DocError::Json(e.to_string()))?;
        Workspace::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self, DocError> {
        let m = fields(v, "document", TOP_LEVEL)?;
        let ring = parse_ring(field(m, "ring", "document")?, "ring")?;
        let mut ws = Workspace::new(&ring);
        for (name, v) in table(m, "modules")? {
            ws.modules.insert(name.clone(), parse_module(&ring, v, &format!("modules.{name}"))?);
        }
        for (name, v) in table(m, "complexes")? {
            ws.complexes.insert(name.clone(), parse_complex(&ring, v, &format!("complexes.{name}"))?);
        }
        for (name, v) in table(m, "maps")? {
            let path = format!("maps.{name}");
            let (src, tgt, comps) = ws.parse_graded(v, &path)?;
            let f = ChainMap::new(ws.complex(&src)?, ws.complex(&tgt)?, comps).map_err(object(&path))?;
            ws.maps.insert(name.clone(), Named { source: src, target: tgt, value: f });
        }
        for (name, v) in table(m, "homotopies")? {
            let path = format!("homotopies.{name}");
            let (src, tgt, comps) = ws.parse_graded(v, &path)?;
            let h = Homotopy::new(ws.complex(&src)?, ws.complex(&tgt)?, comps).map_err(object(&path))?;
            ws.homotopies.insert(name.clone(), Named { source: src, target: tgt, value: h });
        }
        for (name, v) in table(m, "dominations")? {
            let path = format!("dominations.{name}");
            let d = fields(v, &path, &["A", "C", "i", "r", "s"])?;
            let refs = DominationRefs {
                a: string_field(d, "A", &path)?,
                c: string_field(d, "C", &path)?,
                i: string_field(d, "i", &path)?,
                r: string_field(d, "r", &path)?,
                s: string_field(d, "s", &path)?,
            };
            ws.dominations.insert(name.clone(), refs);
            ws.domination(name)?;
        }
        for (name, v) in table(m, "witnesses")? {
            let path = format!("witnesses.{name}");
            let module = match v.get("module") {
                Some(p) => Some(as_str(p, &path)?.to_string()),
                None => None,
            };
            if let Some(p) = &module {
                ws.module(p)?;
            }
            let witness = parse_witness(&ring, v, &path)?;
            ws.witnesses.insert(name.clone(), WitnessDoc { module, witness });
        }
        for (name, v) in table(m, "equivalences")? {
            let path = format!("equivalences.{name}");
            let e = fields(v, &path, &["forward", "backward", "source_homotopy", "target_homotopy"])?;
            let refs = EquivalenceRefs {
                forward: string_field(e, "forward", &path)?,
                backward: string_field(e, "backward", &path)?,
                source_homotopy: string_field(e, "source_homotopy", &path)?,
                target_homotopy: string_field(e, "target_homotopy", &path)?,
            };
            ws.equivalences.insert(name.clone(), refs);
            ws.equivalence(name)?;
        }
        if let Some(p) = m.get("provenance") {
            let pm = fields(p, "provenance", &["source", "digest"])?;
            ws.provenance = Some(Provenance {
                source: string_field(pm, "source", "provenance")?,
                digest: string_field(pm, "digest", "provenance")?,
            });
        }
        Ok(ws)
    }

    fn parse_graded(&self, v: &Value, path: &str) -> Result<(String, String, BTreeMap<i64, Mat>), DocError> {
        let m = fields(v, path, &["source", "target", "components"])?;
        let src = string_field(m, "source", path)?;
        let tgt = string_field(m, "target", path)?;
        let ring = self.complex(&src)?.ring().clone();
        if self.complex(&tgt)?.ring() != &ring {
            return Err(DocError::RingMismatch(format!("{path}: `{src}` and `{tgt}` are over different rings")));
        }
        let comps = parse_components(&ring, field(m, "components", path)?, &format!("{path}.components"))?;
        Ok((src, tgt, comps))
    }

    pub fn to_value(&self) -> Value {
        let named = |t: Vec<(&String, Value)>| {
            let mut m = Map::new();
            for (k, v) in t {
                m.insert(k.clone(), v);
            }
            Value::Object(m)
        };
        let graded = |s: &String, t: &String, c: &BTreeMap<i64, Mat>| {
            obj(vec![
                ("source", s.as_str().into()),
                ("target", t.as_str().into()),
                ("components", components_to_value(c)),
            ])
        };
        let mut pairs = vec![("ring", ring_to_value(&self.ring))];
        if !self.modules.is_empty() {
            pairs.push(("modules", named(self.modules.iter().map(|(k, p)| (k, module_to_value(p))).collect())));
        }
        if !self.complexes.is_empty() {
            pairs.push(("complexes", named(self.complexes.iter().map(|(k, x)| (k, complex_to_value(x))).collect())));
        }
        if !self.maps.is_empty() {
            let t = self.maps.iter().map(|(k, f)| (k, graded(&f.source, &f.target, f.value.components()))).collect();
            pairs.push(("maps", named(t)));
        }
        if !self.homotopies.is_empty() {
            let t =
                self.homotopies.iter().map(|(k, h)| (k, graded(&h.source, &h.target, h.value.components()))).collect();
            pairs.push(("homotopies", named(t)));
        }
        if !self.dominations.is_empty() {
            let t = self
                .dominations
                .iter()
                .map(|(k, d)| {
                    let v = obj(vec![
                        ("A", d.a.as_str().into()),
                        ("C", d.c.as_str().into()),
                        ("i", d.i.as_str().into()),
                        ("r", d.r.as_str().into()),
                        ("s", d.s.as_str().into()),
                    ]);
                    (k, v)
                })
                .collect();
            pairs.push(("dominations", named(t)));
        }
        if !self.witnesses.is_empty() {
            let t = self
                .witnesses
                .iter()
                .map(|(k, w)| {
                    let mut v = witness_to_value(&w.witness);
                    if let (Some(p), Value::Object(m)) = (&w.module, &mut v) {
                        m.insert("module".into(), p.as_str().into());
                        v = obj(m.iter().map(|(k, v)| (k.as_str(), v.clone())).collect());
                    }
                    (k, v)
                })
                .collect();
            pairs.push(("witnesses", named(t)));
        }
        if !self.equivalences.is_empty() {
            let t = self
                .equivalences
                .iter()
                .map(|(k, e)| {
                    let v = obj(vec![
                        ("forward", e.forward.as_str().into()),
                        ("backward", e.backward.as_str().into()),
                        ("source_homotopy", e.source_homotopy.as_str().into()),
                        ("target_homotopy", e.target_homotopy.as_str().into()),
                    ]);
                    (k, v)
                })
                .collect();
            pairs.push(("equivalences", named(t)));
        }
        if let Some(p) = &self.provenance {
            pairs.push((
                "provenance",
                obj(vec![("source", p.source.as_str().into()), ("digest", p.digest.as_str().into())]),
            ));
        }
        obj(pairs)
    }

    /// Canonical text: pretty-printed, sorted keys, trailing newline.
    pub fn to_text(&self) -> String {
        to_text(&self.to_value())
    }

    pub fn module(&self, name: &str) -> Result<&ProjModule, DocError> {
        self.modules.get(name).ok_or_else(|| DocError::Unresolved { kind: "module", name: name.into() })
    }

    pub fn complex(&self, name: &str) -> Result<&ProjComplex, DocError> {
        self.complexes.get(name).ok_or_else(|| DocError::Unresolved { kind: "complex", name: name.into() })
    }

    pub fn map(&self, name: &str) -> Result<&ChainMap, DocError> {
        self.maps.get(name).map(|n| &n.value).ok_or_else(|| DocError::Unresolved { kind: "map", name: name.into() })
    }

    pub fn homotopy(&self, name: &str) -> Result<&Homotopy, DocError> {
        self.homotopies
            .get(name)
            .map(|n| &n.value)
            .ok_or_else(|| DocError::Unresolved { kind: "homotopy", name: name.into() })
    }

    pub fn witness(&self, name: &str) -> Result<&WitnessDoc, DocError> {
        self.witnesses.get(name).ok_or_else(|| DocError::Unresolved { kind: "witness", name: name.into() })
    }

    pub fn domination(&self, name: &str) -> Result<Domination, DocError> {
        let d =
            self.dominations.get(name).ok_or_else(|| DocError::Unresolved { kind: "domination", name: name.into() })?;
        Ok(Domination {
            a: self.complex(&d.a)?.clone(),
            c: self.complex(&d.c)?.clone(),
            i: self.map(&d.i)?.clone(),
            r: self.map(&d.r)?.clone(),
            s: self.homotopy(&d.s)?.clone(),
        })
    }

    pub fn equivalence(&self, name: &str) -> Result<ChainEquivalence, DocError> {
        let e = self
            .equivalences
            .get(name)
            .ok_or_else(|| DocError::Unresolved { kind: "equivalence", name: name.into() })?;
        Ok(ChainEquivalence {
            forward: self.map(&e.forward)?.clone(),
            backward: self.map(&e.backward)?.clone(),
            source_homotopy: self.homotopy(&e.source_homotopy)?.clone(),
            target_homotopy: self.homotopy(&e.target_homotopy)?.clone(),
        })
    }

    /// Adds `f` under `name`, with its ends stored as the named complexes.
    pub fn insert_map(&mut self, name: &str, source: &str, target: &str, f: ChainMap) {
        self.complexes.insert(source.into(), f.source().clone());
        self.complexes.insert(target.into(), f.target().clone());
        self.maps.insert(name.into(), Named { source: source.into(), target: target.into(), value: f });
    }

    pub fn insert_homotopy(&mut self, name: &str, source: &str, target: &str, h: Homotopy) {
        self.complexes.insert(source.into(), h.source().clone());
        self.complexes.insert(target.into(), h.target().clone());
        self.homotopies.insert(name.into(), Named { source: source.into(), target: target.into(), value: h });
    }

    /// Stores a domination as `name` with parts `name.A`, `name.C`,
    /// `name.i`, `name.r` and `name.s`.
    pub fn insert_domination(&mut self, name: &str, d: &Domination) {
        let part = |p: &str| format!("{name}.{p}");
        let refs = DominationRefs { a: part("A"), c: part("C"), i: part("i"), r: part("r"), s: part("s") };
        self.insert_map(&refs.i, &refs.a, &refs.c, d.i.clone());
        self.insert_map(&refs.r, &refs.c, &refs.a, d.r.clone());
        self.insert_homotopy(&refs.s, &refs.a, &refs.a, d.s.clone());
        self.dominations.insert(name.into(), refs);
    }

    /// Stores an equivalence as `name` with parts `name.forward`, ... and
    /// the given complex names.
    pub fn insert_equivalence(&mut self, name: &str, source: &str, target: &str, e: &ChainEquivalence) {
        let part = |p: &str| format!("{name}.{p}");
        let refs = EquivalenceRefs {
            forward: part("forward"),
            backward: part("backward"),
            source_homotopy: part("source_homotopy"),
            target_homotopy: part("target_homotopy"),
        };
        self.insert_map(&refs.forward, source, target, e.forward.clone());
        self.insert_map(&refs.backward, target, source, e.backward.clone());
        self.insert_homotopy(&refs.source_homotopy, source, source, e.source_homotopy.clone());
        self.insert_homotopy(&refs.target_homotopy, target, target, e.target_homotopy.clone());
        self.equivalences.insert(name.into(), refs);
    }

    /// SHA-256 of the canonical text of the domination and the objects it
    /// references.
    pub fn domination_digest(&self, name: &str) -> Result<String, DocError> {
        let refs =
            self.dominations.get(name).ok_or_else(|| DocError::Unresolved { kind: "domination", name: name.into() })?;
        let mut sub = Workspace::new(&self.ring);
        for c in [&refs.a, &refs.c] {
            sub.complexes.insert(c.clone(), self.complex(c)?.clone());
        }
        for f in [&refs.i, &refs.r] {
            sub.maps.insert(f.clone(), self.maps[f].clone());
        }
        sub.homotopies.insert(refs.s.clone(), self.homotopies[&refs.s].clone());
        sub.dominations.insert(name.into(), refs.clone());
        Ok(digest(&sub.to_text()))
    }
}

pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::verify_chain_map;

    const RP2: &str = r#"{
      "ring": {"kind": "integers"},
      "complexes": {
        "X": {
          "bottom_degree": 0,
          "modules": [
            {"ambient_rank": 1, "idempotent": "free"},
            {"ambient_rank": 1, "idempotent": "free"},
            {"ambient_rank": 1, "idempotent": "free"}
          ],
          "boundaries": [
            {"rows": 1, "cols": 1, "entries": ["0"]},
            {"rows": 1, "cols": 1, "entries": [2]}
          ]
        }
      },
      "maps": {
        "twice": {"source": "X", "target": "X", "components": [
          {"degree": 1, "matrix": {"rows": 1, "cols": 1, "entries": ["2"]}}
        ]}
      }
    }"#;

    #[test]
    fn parse_and_round_trip() {
        let ws = Workspace::parse(RP2).unwrap();
        assert_eq!(ws.complex("X").unwrap().len(), 3);
        let text = ws.to_text();
        let again = Workspace::parse(&text).unwrap();
        assert_eq!(again, ws);
        assert_eq!(again.to_text(), text);
        // 2 in degree 1 alone: 2 d_2 = 4 but d_2 0 = 0
        assert!(!verify_chain_map(ws.map("twice").unwrap()).is_ok());
    }

    #[test]
    fn element_literals() {
        let c2 = RingDescriptor::group_ring(GroupTable::cyclic(2));
        let e = parse_elem(&c2, &serde_json::json!([[1, 1], ["2", 0], [-1, 1]]), "x").unwrap();
        assert_eq!(e, c2.from_int(2));
        assert_eq!(elem_to_value(&c2, &e), serde_json::json!([["2", 0]]));
        let l = RingDescriptor::laurent(c2.clone()).unwrap();
        let v = serde_json::json!([[[[1, 0]], 0], [[[-1, 1]], 1]]);
        let x = parse_elem(&l, &v, "y").unwrap();
        assert_eq!(parse_elem(&l, &elem_to_value(&l, &x), "y").unwrap(), x);
        let q = RingDescriptor::quadratic(-5).unwrap();
        assert_eq!(parse_elem(&q, &serde_json::json!(["1", -1]), "z").unwrap(), q.quad(1, -1).unwrap());
        assert!(parse_elem(&c2, &serde_json::json!([[1, 5]]), "w").is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(Workspace::parse("{").unwrap_err().code(), "malformed_json");
        let bad_ref =
            r#"{"ring": {"kind": "integers"}, "maps": {"f": {"source": "X", "target": "X", "components": []}}}"#;
        assert_eq!(Workspace::parse(bad_ref).unwrap_err().code(), "unresolved_reference");
        let bad_shape = r#"{"ring": {"kind": "integers"}, "complexes": {"X": {"bottom_degree": 0,
            "modules": [{"ambient_rank": 1, "idempotent": "free"}, {"ambient_rank": 2, "idempotent": "free"}],
            "boundaries": [{"rows": 1, "cols": 1, "entries": ["1"]}]}}}"#;
        assert_eq!(Workspace::parse(bad_shape).unwrap_err().code(), "invalid_object");
        let unknown = r#"{"ring": {"kind": "integers"}, "extra": 1}"#;
        assert_eq!(Workspace::parse(unknown).unwrap_err().code(), "invalid_literal");
    }

    #[test]
    fn digest_is_stable() {
        let x = ProjComplex::free(&RingDescriptor::Integers, 0, &[1], vec![]).unwrap();
        let id = ChainMap::identity(&x);
        let d = Domination { a: x.clone(), c: x.clone(), i: id.clone(), r: id, s: Homotopy::zero(&x, &x) };
        let mut ws = Workspace::new(&RingDescriptor::Integers);
        ws.insert_domination("dom", &d);
        let h1 = ws.domination_digest("dom").unwrap();
        let parsed = Workspace::parse(&ws.to_text()).unwrap();
        assert_eq!(parsed.domination_digest("dom").unwrap(), h1);
        assert_eq!(h1.len(), 64);
        assert_eq!(parsed.domination("dom").unwrap(), d);
    }
}
