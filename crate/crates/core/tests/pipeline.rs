use finob_core::chain::{homology, validate_complex};
use finob_core::corpus::mixed_members;
use finob_core::k0::rank;
use finob_core::ranicki::{
    build_instant, finite_projective_reduction, finiteness_obstruction, trim_below, SigmaStatus,
};

#[test]
fn corpus_pipeline() {
    for m in mixed_members(11, 40) {
        let d = &m.domination;
        let inst = build_instant(d).unwrap_or_else(|e| panic!("{}: {e}", m.name));
        let g = finite_projective_reduction(&inst).unwrap();
        assert!(validate_complex(&g).is_ok());
        assert_eq!(homology(&g).unwrap(), homology(&d.a).unwrap(), "{}", m.name);
        let r = finiteness_obstruction(d, None).unwrap_or_else(|e| panic!("{}: {e}", m.name));
        let chi: i64 =
            d.a.degrees()
                .map(|n| {
                    let k = rank(d.a.module(n).unwrap()).unwrap() as i64;
                    if n % 2 == 0 {
                        k
                    } else {
                        -k
                    }
                })
                .sum();
        assert_eq!(r.report.chi, chi, "{}", m.name);
        assert_eq!(r.status, SigmaStatus::Witnessed, "{}", m.name);
        if m.acyclic_bottom {
            let t = trim_below(&m.x, 0).unwrap_or_else(|e| panic!("{}: {e}", m.name));
            assert!(t.complex.len() < m.x.len());
            assert_eq!(homology(&t.complex).unwrap(), homology(&m.x).unwrap());
        }
    }
}
