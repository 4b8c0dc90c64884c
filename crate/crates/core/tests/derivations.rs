//! Symbolic derivation chains between the relations: each combination must
//! normalize to the empty expression.

use taut0::context::section_name;
use taut0::relations::*;
use taut0::{
    push_product, BaseExpr, Context, CurveExpr, Effectivity, Poly, StabilityMode,
};

fn ctx(r: usize) -> Context {
    Context::sections_only(r, StabilityMode::Artin)
        .with_symbol("D", Poly::param("e"), Effectivity::Unbounded)
        .unwrap()
        .with_symbol("E", Poly::param("f"), Effectivity::Unbounded)
        .unwrap()
}

fn sym(name: &str) -> CurveExpr {
    CurveExpr::sym(name)
}

fn s(i: usize) -> CurveExpr {
    sym(&section_name(i))
}

fn assert_zero(ctx: &Context, e: BaseExpr) {
    let n = e.normalize(ctx);
    assert!(n.is_zero(), "{}", taut0::text::render_base(ctx, &n));
}

#[test]
fn rel2_by_polarization() {
    for r in 0..=2 {
        let c = ctx(r);
        let (d, e) = (sym("D"), sym("E"));
        let sum = &d + &e;
        let combo = rel2(&c, &d, &e).unwrap()
            - (rel1(&c, &sum).unwrap() - rel1(&c, &d).unwrap() - rel1(&c, &e).unwrap());
        assert_zero(&c, combo);
    }
}

#[test]
fn rel2_with_pullback_arguments() {
    let c = ctx(1);
    let twisted = &sym("D") + &CurveExpr::pullback(BaseExpr::named("y"));
    let combo = rel2(&c, &twisted, &s(1)).unwrap()
        - (rel1(&c, &(&twisted + &s(1))).unwrap() - rel1(&c, &twisted).unwrap() - rel1(&c, &s(1)).unwrap());
    assert_zero(&c, combo);
}

#[test]
fn rel4_by_its_proof() {
    for r in 1..=3 {
        let c = ctx(r);
        let d = sym("D");
        let e = Poly::param("e");
        for i in 1..=r {
            let combo = rel4(&c, i, &d).unwrap()
                - (rel2(&c, &d, &s(i)).unwrap().scale(&e)
                    - rel3(&c, i).unwrap().scale(&e.pow(2))
                    - rel1(&c, &d).unwrap());
            assert_zero(&c, combo);
        }
    }
}

#[test]
fn rel4_on_sections() {
    for r in 1..=4 {
        let c = Context::sections_only(r, StabilityMode::Artin);
        for i in 1..=r {
            // e = 1: the proof combination is rel2(s, s) - rel3 - rel1(s) = 0 * rel3
            assert_zero(&c, rel4(&c, i, &s(i)).unwrap());
            for j in (1..=r).filter(|&j| j != i) {
                assert_zero(&c, rel4(&c, i, &s(j)).unwrap() + rel6(&c, i, j).unwrap());
            }
        }
    }
}

#[test]
fn rel6_from_rel2_and_rel3() {
    let c = ctx(3);
    for (i, j) in [(1, 2), (2, 3), (3, 1)] {
        let combo = rel6(&c, i, j).unwrap()
            - (rel3(&c, i).unwrap() + rel3(&c, j).unwrap() - rel2(&c, &s(i), &s(j)).unwrap());
        assert_zero(&c, combo);
    }
}

#[test]
fn rel7_from_rel6_by_induction() {
    for r in 2..=6 {
        let c = Context::sections_only(r, StabilityMode::Artin);
        let direct: BaseExpr = (2..=r).map(|j| rel6(&c, 1, j).unwrap()).sum();
        assert_zero(&c, rel7(&c, 1).unwrap() + direct);
        if r > 2 {
            // one induction step: adding a section adds one rel6 instance
            let smaller = Context::sections_only(r - 1, StabilityMode::Artin);
            let prev = rel7(&smaller, 1).unwrap();
            let step = rel7(&c, 1).unwrap() - (prev - rel6(&c, 1, r).unwrap());
            assert_zero(&c, step);
        }
    }
}

#[test]
fn rel8_forms_are_consistent() {
    for r in 2..=6 {
        let c = ctx(r);
        for i in [1, r] {
            let first = rel8_first(&c, i).unwrap();
            let psi = rel8_psi(&c, i).unwrap();
            let sum = rel8_sum(&c, i).unwrap();
            // first form from rel4 applied to the sum of the other sections
            let others: CurveExpr = (1..=r)
                .filter(|&k| k != i)
                .map(s)
                .fold(CurveExpr::zero(), |a, b| a + b);
            assert_zero(&c, first.clone() - rel4(&c, i, &others).unwrap());
            assert_zero(&c, psi.clone() - (rel7(&c, i).unwrap() - first.clone()));
            let rn = Poly::int(r as i64);
            let combo = sum - (first.scale(&(&rn - &Poly::one())) + psi.scale(&rn));
            assert_zero(&c, combo);
        }
    }
}

#[test]
fn rel8_partition_forms_agree_with_split_forms() {
    for r in 2..=6 {
        for mode in [StabilityMode::Artin, StabilityMode::DeligneMumford] {
            let c = Context::sections_only(r, mode);
            let psi = rel8_psi(&c, 1).unwrap() + rel8_psi_partitions(&c, 1).unwrap();
            assert!(psi.is_zero_class(&c).unwrap(), "r={r}");
            let sum = rel8_sum(&c, 1).unwrap() - rel8_sum_partitions(&c, 1).unwrap();
            assert!(sum.is_zero_class(&c).unwrap(), "r={r}");
        }
    }
}

#[test]
fn rel9_from_rel8_sum() {
    for r in 2..=6 {
        let c = ctx(r);
        for i in 1..=r {
            for j in 1..=r {
                let combo = rel9(&c, i, j).unwrap() - (rel8_sum(&c, j).unwrap() - rel8_sum(&c, i).unwrap());
                assert_zero(&c, combo);
                assert_zero(&c, rel9(&c, i, j).unwrap());
            }
        }
        let finite = Context::sections_only(r, StabilityMode::DeligneMumford);
        assert!(rel9_partitions(&finite, 1, r).unwrap().is_zero());
    }
}

#[test]
fn rel10_from_rel4_and_rel8_psi() {
    for r in 2..=5 {
        let c = ctx(r);
        let d = sym("D");
        let e = Poly::param("e");
        let k = Poly::int(((r - 1) * (r - 2)) as i64);
        for i in 1..=r {
            let combo = rel10(&c, i, &d).unwrap()
                - (rel4(&c, i, &d).unwrap().scale(&k) + rel8_psi(&c, i).unwrap().scale(&e.pow(2)));
            assert_zero(&c, combo);
        }
    }
}

#[test]
fn rel11_is_a_multiple_of_rel8_sum() {
    for r in 2..=5 {
        let c = ctx(r);
        let inv = Poly::constant(taut0::poly::q_frac(1, r as i64 - 1));
        assert_zero(&c, rel11(&c, 1).unwrap() - rel8_sum(&c, 1).unwrap().scale(&inv));
    }
}

#[test]
fn rel1_from_rel5() {
    for r in 0..=3 {
        let c = ctx(r);
        for d in [sym("D"), &sym("D") + &s(r.max(1)).scale(&Poly::int(if r == 0 { 0 } else { 2 }))] {
            let e = d.degree(&c).unwrap();
            let pushed = push_product(&c, &d, &rel5(&c, &d).unwrap()).unwrap();
            assert_zero(&c, pushed - rel1(&c, &d).unwrap().scale(&e));
        }
    }
}

#[test]
fn rel5_paired_with_a_pullback() {
    let c = ctx(2);
    let y = CurveExpr::pullback(BaseExpr::named("y"));
    let pushed = push_product(&c, &y, &rel5(&c, &sym("D")).unwrap()).unwrap();
    assert!(pushed.is_zero());
    assert!(rel5(&c, &CurveExpr::zero()).unwrap().is_zero());
}

#[test]
fn rel1_by_its_proof() {
    for r in 0..=2 {
        let c = ctx(r);
        let d = sym("D");
        let e = Poly::param("e");
        let shifted = d.scale(&Poly::int(2)) + CurveExpr::omega().scale(&e);
        let lcomp = BaseExpr::boundary_sum(
            shifted.prime(&c).unwrap() * shifted.dprime(&c).unwrap(),
            taut0::Convention::Unordered,
        );
        let omega_part = q_pi(&c, &CurveExpr::omega(), &BaseExpr::zero()).unwrap() + BaseExpr::total_boundary();
        let combo = rel1(&c, &d).unwrap().scale(&Poly::int(4))
            - (q_pi(&c, &shifted, &BaseExpr::zero()).unwrap() - lcomp - omega_part.scale(&e.pow(2)));
        assert_zero(&c, combo);
    }
}
