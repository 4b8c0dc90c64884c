//! Cross-checks between the Keel and F-curve oracles, and the relations
//! specialized to the no-map case.

use taut0::context::section_name;
use taut0::mbar::*;
use taut0::poly::Q;
use taut0::relations::*;
use taut0::{BaseExpr, Context, CurveExpr, StabilityMode};

fn s(i: usize) -> CurveExpr {
    CurveExpr::sym(&section_name(i))
}

#[test]
fn keel_relations_pair_to_zero() {
    for n in 4..=7 {
        let curves = fcurves(n);
        for v in keel_kernel(n) {
            for f in &curves {
                assert_eq!(fcurve_pair(n, f, &v), Q::from_integer(0.into()), "n={n} {f}");
            }
        }
    }
}

#[test]
fn fcurves_detect_the_quotient() {
    // the pairing matrix has rank equal to the Picard rank
    for n in 4..=6 {
        let basis = boundary_basis(n);
        let rows = fcurves(n)
            .iter()
            .map(|f| basis.iter().map(|p| Q::from_integer(f.pair_basis(n, *p).into())).collect())
            .collect();
        let e = RowEchelon::new(rows, basis.len());
        assert_eq!(e.rank(), KeelReducer::new(n).unwrap().quotient_rank());
    }
}

#[test]
fn psi_choice_is_irrelevant_modulo_keel() {
    for n in 4..=6 {
        let keel = KeelReducer::new(n).unwrap();
        for i in 1..=n {
            let base = psi(n, i).unwrap();
            for j in 1..=n {
                for k in 1..=n {
                    if let Ok(other) = psi_vector(n, i, j, k) {
                        assert!(keel.reduce(&base.sub(&other)).is_zero());
                    }
                }
            }
        }
    }
}

#[test]
fn relations_vanish_without_a_map() {
    for n in 4..=6 {
        let c = Context::sections_only(n, StabilityMode::DeligneMumford);
        let mut checks: Vec<(String, BaseExpr)> = Vec::new();
        for i in 1..=n {
            checks.push((format!("rel1 s{i}"), rel1(&c, &s(i)).unwrap()));
            checks.push((format!("rel3 {i}"), rel3(&c, i).unwrap()));
            checks.push((format!("rel7 {i}"), rel7(&c, i).unwrap()));
            checks.push((format!("rel8 {i}"), rel8_first(&c, i).unwrap()));
            checks.push((format!("rel8_psi {i}"), rel8_psi(&c, i).unwrap()));
            checks.push((format!("rel8_sum {i}"), rel8_sum(&c, i).unwrap()));
            checks.push((format!("rel11 {i}"), rel11(&c, i).unwrap()));
            for j in (1..=n).filter(|&j| j != i) {
                checks.push((format!("rel2 s{i} s{j}"), rel2(&c, &s(i), &s(j)).unwrap()));
                checks.push((format!("rel4 {i} s{j}"), rel4(&c, i, &s(j)).unwrap()));
                checks.push((format!("rel6 {i} {j}"), rel6(&c, i, j).unwrap()));
                checks.push((format!("rel9 {i} {j}"), rel9(&c, i, j).unwrap()));
                checks.push((format!("rel10 {i} s{j}"), rel10(&c, i, &s(j)).unwrap()));
            }
        }
        let verifier = Verifier::new(n).unwrap();
        for (name, e) in checks {
            let v = verifier.verify(&specialize(&c, &e).unwrap()).unwrap();
            assert!(v.is_zero_class(), "n={n} {name}: {} / {}", v.vector, v.remainder);
        }
    }
}

#[test]
fn psi_against_boundary_on_four_markings() {
    let c = Context::sections_only(4, StabilityMode::DeligneMumford);
    let psi1 = BaseExpr::atom(taut0::BaseAtom::Psi(1));
    let lhs = specialize(&c, &psi1.scale_q(&Q::from_integer(6.into()))).unwrap();
    let rhs = specialize(&c, &BaseExpr::total_boundary().scale_q(&Q::from_integer(2.into()))).unwrap();
    let v = verify_vector(&lhs.sub(&rhs)).unwrap();
    assert!(v.is_zero_class());
    let f = &fcurves(4)[0];
    assert_eq!(fcurve_pair(4, f, &lhs), Q::from_integer(6.into()));
}

#[test]
fn a_nonzero_class_is_detected() {
    let c = Context::sections_only(5, StabilityMode::DeligneMumford);
    let psi1 = BaseExpr::atom(taut0::BaseAtom::Psi(1));
    let v = specialize_and_verify(&c, &psi1).unwrap();
    assert!(!v.is_zero_class());
    assert!(!v.keel_zero() && !v.pairings_zero());
}

#[test]
fn general_symbols_are_rejected() {
    let c = Context::sections_only(4, StabilityMode::DeligneMumford)
        .with_symbol("D", taut0::Poly::int(1), taut0::Effectivity::Nonnegative)
        .unwrap();
    assert!(matches!(
        specialize(&c, &BaseExpr::push_syms("D", "D")),
        Err(taut0::Error::NotNoMap(_))
    ));
    let c4 = Context::sections_only(4, StabilityMode::DeligneMumford);
    assert!(matches!(specialize(&c4, &BaseExpr::c2()), Err(taut0::Error::NotNoMap(_))));
}
