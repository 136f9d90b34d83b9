use std::fs;

use finob_core::chain::{
    homology as lattice_homology, validate_complex, verify_chain_map, verify_equivalence, HomologyResult, ProjComplex,
    ProjModule,
};
use finob_core::constructions::{
    algebraic_mapping_torus, laurent_resolution, realize as realize_module, swindle_prefix, torus_invariance_check,
};
use finob_core::corpus::generate_corpus_over;
use finob_core::doc::{self, complex_to_value, obstruction_to_value, Provenance, Workspace};
use finob_core::k0::{integer_basis_witness, rank, verify_stable_freeness, StableFreenessWitness};
use finob_core::quadratic::{verify_certificate, ClassVerdict};
use finob_core::ranicki::{
    build_instant, finite_projective_reduction, finiteness_obstruction, finiteness_obstruction_with_witness,
    free_replacement, instant_equivalence, trim_below, verify_domination, verify_splitting, RanickiError, SigmaStatus,
};
use finob_core::report::VerifyReport;
use finob_core::ring::{GroupTable, RingDescriptor, RingKind};
use serde_json::{json, Value};

use crate::report::{Failure, Report};
use crate::{Common, CorpusRing};

fn load(c: &Common) -> Result<Workspace, Failure> {
    let path = c.input.as_ref().ok_or_else(|| Failure::new("missing_input", "--input is required"))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::new("io_error", format!("{}: {e}", path.display())))?;
    Ok(Workspace::parse(&text)?)
}

fn name(c: &Common) -> Result<&str, Failure> {
    c.name.as_deref().ok_or_else(|| Failure::new("missing_name", "--name is required"))
}

/// Writes the produced document to `--output` and records its digest.
fn emit(c: &Common, report: &mut Report, ws: &Workspace) -> Result<(), Failure> {
    let text = ws.to_text();
    report.set("digest", doc::digest(&text).into());
    report.line("document_digest", doc::digest(&text));
    if let Some(path) = &c.output {
        fs::write(path, &text).map_err(|e| Failure::new("io_error", format!("{}: {e}", path.display())))?;
        report.line("written", path.display());
    }
    Ok(())
}

fn homology_value(h: &HomologyResult) -> Value {
    Value::Array(
        h.groups()
            .iter()
            .map(|(n, g)| {
                json!({
                    "degree": n,
                    "betti": g.betti,
                    "torsion": g.torsion.iter().map(ToString::to_string).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn lattice_ring(x: &ProjComplex) -> Result<(), Failure> {
    if x.ring().kind() == RingKind::Laurent {
        return Err(Failure::new("unsupported_ring", "homology is not computed over Laurent rings"));
    }
    Ok(())
}

pub fn verify(c: &Common) -> Result<Report, Failure> {
    let ws = load(c)?;
    let n = name(c)?;
    let mut r = Report::new("verify", Some(n));
    let (kind, rep) = if ws.dominations.contains_key(n) {
        ("domination", verify_domination(&ws.domination(n)?))
    } else if ws.equivalences.contains_key(n) {
        ("equivalence", verify_equivalence(&ws.equivalence(n)?))
    } else if ws.maps.contains_key(n) {
        ("map", verify_chain_map(ws.map(n)?))
    } else if ws.complexes.contains_key(n) {
        ("complex", validate_complex(ws.complex(n)?))
    } else if ws.modules.contains_key(n) {
        let mut rep = VerifyReport::new();
        if let Some((row, col)) = ws.module(n)?.idempotency_defect()? {
            rep.push("not_idempotent", None, format!("e*e differs from e at ({row},{col})"));
        }
        ("module", rep)
    } else if ws.witnesses.contains_key(n) {
        let w = ws.witness(n)?;
        let m = w.module.as_deref().ok_or_else(|| Failure::new("unresolved_reference", "witness names no module"))?;
        ("witness", verify_stable_freeness(ws.module(m)?, &w.witness))
    } else if ws.homotopies.contains_key(n) {
        return Err(Failure::new(
            "unsupported_object",
            "a homotopy is verified as part of a domination or equivalence",
        ));
    } else {
        return Err(Failure::new("unresolved_reference", format!("no object named `{n}`")));
    };
    r.line("kind", kind);
    r.set("kind", kind.into());
    r.violations = rep;
    Ok(r)
}

pub fn homology(c: &Common) -> Result<Report, Failure> {
    let ws = load(c)?;
    let n = name(c)?;
    let x = ws.complex(n)?;
    lattice_ring(x)?;
    let mut r = Report::new("homology", Some(n));
    let rep = validate_complex(x);
    if !rep.is_ok() {
        r.violations = rep;
        return Ok(r);
    }
    let h = lattice_homology(x)?;
    r.line("homology", &h);
    r.set("homology", homology_value(&h));
    Ok(r)
}

/// Runs a ranicki operation, turning an invalid domination into a violation
/// report rather than a failure.
fn domination_step<T>(r: &mut Report, res: Result<T, RanickiError>) -> Result<Option<T>, Failure> {
    match res {
        Ok(v) => Ok(Some(v)),
        Err(RanickiError::InvalidDomination(rep)) => {
            r.violations = rep;
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn instant(c: &Common) -> Result<Report, Failure> {
    let ws = load(c)?;
    let n = name(c)?;
    let d = ws.domination(n)?;
    let mut r = Report::new("instant", Some(n));
    let Some(inst) = domination_step(&mut r, build_instant(&d))? else { return Ok(r) };
    let g = finite_projective_reduction(&inst)?;
    let eq = instant_equivalence(&d, &inst, &g)?;
    let mut out = Workspace::new(&ws.ring);
    out.insert_equivalence("equivalence", "G", "A", &eq);
    out.modules.insert("P".into(), g.module(0).expect("degree 0 exists").clone());
    out.provenance = Some(Provenance { source: n.to_string(), digest: ws.domination_digest(n)? });
    r.line("f_rank", inst.f_rank);
    r.line("c_ranks", format!("{:?}", inst.c_ranks));
    r.line("reduction_degrees", format!("0..={}", g.top()));
    r.line("identities", "ok");
    r.set("f_rank", inst.f_rank.into());
    r.set("c_ranks", json!(inst.c_ranks));
    r.set("reduction", complex_to_value(&g));
    r.set("provenance", json!({ "source": n, "digest": ws.domination_digest(n)? }));
    emit(c, &mut r, &out)?;
    Ok(r)
}

fn verdict_value(v: &ClassVerdict) -> Value {
    match v {
        ClassVerdict::Principal { ideal, generator } => json!({
            "verdict": v.label(),
            "ideal": ideal.to_string(),
            "generator": [generator.0.to_string(), generator.1.to_string()],
        }),
        ClassVerdict::NonPrincipal(cert) => json!({
            "verdict": v.label(),
            "ideal": cert.ideal.to_string(),
            "searched": cert.searched.to_string(),
            "norm": cert.searched.norm().to_string(),
            "candidates": cert.candidates.len(),
            "bound": cert.bound,
            "minkowski": cert.minkowski,
            "certificate_verified": verify_certificate(cert),
        }),
        ClassVerdict::Inconclusive { ideal, bound, minkowski } => json!({
            "verdict": v.label(),
            "ideal": ideal.to_string(),
            "bound": bound,
            "minkowski": minkowski,
        }),
    }
}

pub fn obstruction(c: &Common, class_bound: Option<u64>, witness: Option<&str>) -> Result<Report, Failure> {
    let ws = load(c)?;
    let n = name(c)?;
    let d = ws.domination(n)?;
    let mut r = Report::new("obstruction", Some(n));
    let res = match witness {
        Some(w) => match finiteness_obstruction_with_witness(&d, &ws.witness(w)?.witness, class_bound) {
            Err(RanickiError::Witness(rep)) => {
                r.violations = rep.scoped("witness");
                return Ok(r);
            }
            other => other,
        },
        None => finiteness_obstruction(&d, class_bound),
    };
    let Some(res) = domination_step(&mut r, res)? else { return Ok(r) };
    r.line("chi", res.report.chi);
    r.line("sigma", res.status.label());
    r.set("chi", res.report.chi.into());
    r.set("sigma", res.status.label().into());
    r.set("class", obstruction_to_value(&res.report));
    match &res.status {
        SigmaStatus::Witnessed => {
            r.line("witness", "verified");
            r.set("oracle", Value::Null);
        }
        SigmaStatus::Oracle(v) => {
            r.line("oracle", v.label());
            if let ClassVerdict::NonPrincipal(cert) = v {
                r.line("certificate", format!("no element of norm {} in {}", cert.searched.norm(), cert.searched));
            }
            r.set("oracle", verdict_value(v));
        }
        SigmaStatus::Unknown(why) => {
            r.line("oracle", format!("unknown ({why})"));
            r.set("oracle", json!({ "verdict": "unknown", "reason": why }));
        }
    }
    Ok(r)
}

pub fn trim(c: &Common, degree: i64) -> Result<Report, Failure> {
    let ws = load(c)?;
    let n = name(c)?;
    let x = ws.complex(n)?;
    let mut r = Report::new("trim", Some(n));
    let t = match trim_below(x, degree) {
        Ok(t) => t,
        Err(RanickiError::Precondition { degree, group }) => {
            r.violations.push("homology_nonzero", Some(degree), format!("H_{degree} = {group}"));
            return Ok(r);
        }
        Err(e) => return Err(e.into()),
    };
    for s in &t.splittings {
        r.violations.absorb(verify_splitting(s).scoped("splitting"));
    }
    let before = lattice_homology(x)?;
    let after = lattice_homology(&t.complex)?;
    if before != after {
        r.violations.push("homology_changed", None, format!("{before} became {after}"));
    }
    r.line("length_before", x.len());
    r.line("length_after", t.complex.len());
    r.line("homology", &after);
    r.set("length_before", x.len().into());
    r.set("length_after", t.complex.len().into());
    r.set("homology", homology_value(&after));
    let mut out = Workspace::new(&ws.ring);
    out.complexes.insert(format!("{n}.trimmed"), t.complex.clone());
    emit(c, &mut r, &out)?;
    Ok(r)
}

fn default_witness(x: &ProjComplex) -> Result<Option<StableFreenessWitness>, Failure> {
    let Some(p) = x.modules().iter().find(|m| !m.is_free()) else { return Ok(None) };
    if let Some(w) = StableFreenessWitness::coordinate(p) {
        return Ok(Some(w));
    }
    match integer_basis_witness(p) {
        Ok(w) => Ok(Some(w)),
        Err(e) => Err(Failure::new("no_witness", format!("pass --witness: {e}"))),
    }
}

pub fn free_replace(c: &Common, witness: Option<&str>) -> Result<Report, Failure> {
    let ws = load(c)?;
    let n = name(c)?;
    let x = ws.complex(n)?;
    let mut r = Report::new("free-replace", Some(n));
    let w = match witness {
        Some(w) => Some(ws.witness(w)?.witness.clone()),
        None => default_witness(x)?,
    };
    let w = w.unwrap_or(StableFreenessWitness {
        a: 0,
        b: 0,
        iso: finob_core::linalg::Mat::zero(x.ring(), 0, 0),
        iso_inverse: finob_core::linalg::Mat::zero(x.ring(), 0, 0),
    });
    let (y, eq) = match free_replacement(x, &w) {
        Ok(v) => v,
        Err(RanickiError::Witness(rep)) => {
            r.violations = rep.scoped("witness");
            return Ok(r);
        }
        Err(e) => return Err(e.into()),
    };
    r.violations.absorb(verify_equivalence(&eq).scoped("equivalence"));
    if !y.is_free() {
        r.violations.push("not_free", None, "replacement still has a non-free module");
    }
    r.line("free", y.is_free());
    r.line("ranks", format!("{:?}", y.degrees().map(|k| y.ambient_rank(k)).collect::<Vec<_>>()));
    r.set("ranks", json!(y.degrees().map(|k| y.ambient_rank(k)).collect::<Vec<_>>()));
    let mut out = Workspace::new(&ws.ring);
    out.insert_equivalence("equivalence", n, &format!("{n}.free"), &eq);
    emit(c, &mut r, &out)?;
    Ok(r)
}

pub fn laurent_resolve(c: &Common, window: usize) -> Result<Report, Failure> {
    let ws = load(c)?;
    let n = name(c)?;
    let p = ws.module(n)?;
    if p.idempotency_defect()?.is_some() {
        return Err(Failure::new("invalid_object", format!("`{n}` is not idempotent")));
    }
    let mut r = Report::new("laurent-resolve", Some(n));
    let (x, check) = laurent_resolution(p, window)?;
    r.violations = check.report();
    r.line("window", window);
    r.line("injective", check.injective);
    r.line("cokernel_rank", check.cokernel_rank);
    r.line("details", check.details());
    r.set(
        "window_check",
        json!({
            "N": window,
            "injective": check.injective,
            "cokernel_rank": check.cokernel_rank,
            "details": check.details(),
        }),
    );
    let mut out = Workspace::new(&ws.ring);
    out.complexes.insert(format!("{n}.resolution"), x);
    emit(c, &mut r, &out)?;
    Ok(r)
}

pub fn swindle(c: &Common, degree: usize) -> Result<Report, Failure> {
    let ws = load(c)?;
    let nm = name(c)?;
    let p = ws.module(nm)?;
    let s = swindle_prefix(p, degree)?;
    let mut r = Report::new("swindle", Some(nm));
    let h = lattice_homology(&s.complex)?;
    let lattice_rank = |m: &ProjModule| -> Result<usize, Failure> {
        Ok(finob_core::linalg::rank(&m.idempotent().flatten().map_err(finob_core::chain::ChainError::from)?))
    };
    for k in 1..s.top_degree {
        if !h.at(k).is_zero() {
            r.violations.push("interior_homology", Some(k), h.at(k).to_string());
        }
    }
    let expected = lattice_rank(p)?;
    if h.at(0).betti != expected || !h.at(0).torsion.is_empty() {
        r.violations.push("degree_zero_homology", Some(0), format!("{} but im(e) has rank {expected}", h.at(0)));
    }
    r.line("homology", &h);
    r.line("truncation", format!("H_{} = {} from the cut at the top", s.top_degree, h.at(s.top_degree)));
    r.set("homology", homology_value(&h));
    r.set("truncation_degree", s.top_degree.into());
    r.set("truncation_rank", lattice_rank(&s.top_module)?.into());
    let mut out = Workspace::new(&ws.ring);
    out.complexes.insert(format!("{nm}.swindle"), s.complex);
    emit(c, &mut r, &out)?;
    Ok(r)
}

pub fn torus(c: &Common, against: Option<&str>, witness: Option<&str>) -> Result<Report, Failure> {
    let ws = load(c)?;
    let n = name(c)?;
    let f = ws.map(n)?;
    let mut r = Report::new("torus", Some(n));
    match (against, witness) {
        (Some(g), Some(w)) => {
            r.violations = torus_invariance_check(f, ws.map(g)?, &ws.equivalence(w)?);
            r.line("against", g);
            r.line("certificate", w);
            return Ok(r);
        }
        (None, None) => {}
        _ => return Err(Failure::new("missing_flag", "--against and --witness go together")),
    }
    let t = algebraic_mapping_torus(f)?;
    r.line("degrees", format!("{}..={}", t.bottom(), t.top()));
    r.line("free", t.is_free());
    r.set("bottom_degree", t.bottom().into());
    r.set("top_degree", t.top().into());
    let mut out = Workspace::new(&ws.ring);
    out.complexes.insert(format!("{n}.torus"), t);
    emit(c, &mut r, &out)?;
    Ok(r)
}

pub fn realize(c: &Common, degree: i64) -> Result<Report, Failure> {
    let ws = load(c)?;
    let n = name(c)?;
    let p = ws.module(n)?;
    let (_, d) = realize_module(p, degree)?;
    let mut r = Report::new("realize", Some(n));
    r.violations = verify_domination(&d);
    r.line("degree", degree);
    r.line("rank", rank(p)?);
    r.set("degree", degree.into());
    r.set("rank", rank(p)?.into());
    let mut out = Workspace::new(&ws.ring);
    out.modules.insert(n.to_string(), p.clone());
    out.insert_domination(&format!("{n}.realized"), &d);
    emit(c, &mut r, &out)?;
    Ok(r)
}

pub fn corpus(c: &Common, seed: u64, count: usize, ring: CorpusRing) -> Result<Report, Failure> {
    if count == 0 {
        return Err(Failure::new("invalid_flag", "--count must be at least 1"));
    }
    let ring = match ring {
        CorpusRing::Integers => RingDescriptor::Integers,
        CorpusRing::C2 => RingDescriptor::group_ring(GroupTable::cyclic(2)),
    };
    let ws = generate_corpus_over(&ring, seed, count);
    let mut r = Report::new("corpus", None);
    for name in ws.dominations.keys() {
        r.violations.absorb(verify_domination(&ws.domination(name)?).scoped(name));
    }
    r.line("seed", seed);
    r.line("count", count);
    r.set("seed", seed.into());
    r.set("count", count.into());
    emit(c, &mut r, &ws)?;
    Ok(r)
}
