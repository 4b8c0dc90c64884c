//! The acceptance suite as a deterministic report: one entry per
//! criterion, each made of named exact checks.

use std::fmt;

use serde::Serialize;

use crate::context::{section_name, Context, Effectivity, StabilityMode};
use crate::error::Result;
use crate::expr::{push_product, BaseAtom, BaseExpr, CurveExpr};
use crate::mbar::{self, fcurve_pair, Verifier};
use crate::poly::{Poly, Q};
use crate::relations::*;
use crate::splitting::{expand_sum, Convention};
use crate::vcb::{self, TargetData};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(label: impl Into<String>, passed: bool) -> Self {
        Check {
            label: label.into(),
            passed,
            note: None,
        }
    }

    fn from_result(label: impl Into<String>, r: Result<bool>) -> Self {
        match r {
            Ok(passed) => Check::new(label, passed),
            Err(e) => Check {
                label: label.into(),
                passed: false,
                note: Some(e.to_string()),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub summary: String,
    pub checks: Vec<Check>,
}

impl Criterion {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub criteria: Vec<Criterion>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(Criterion::passed)
    }

    pub fn criterion(&self, id: u8) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let passed = self.checks.iter().filter(|c| c.passed).count();
        write!(
            f,
            "criterion {} {}: {} ({}/{} checks; {})",
            self.id,
            self.title,
            if self.passed() { "PASS" } else { "FAIL" },
            passed,
            self.checks.len(),
            self.summary
        )?;
        for c in self.checks.iter().filter(|c| !c.passed) {
            write!(f, "\n  failed: {}", c.label)?;
            if let Some(note) = &c.note {
                write!(f, " ({note})")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.criteria {
            writeln!(f, "{c}")?;
        }
        let passed = self.criteria.iter().filter(|c| c.passed()).count();
        write!(f, "{passed}/{} criteria passed", self.criteria.len())
    }
}

/// Runs every criterion; `jobs > 1` spreads the no-map suite over threads.
pub fn run(jobs: usize) -> Report {
    let mut criteria = run_exact(jobs);
    let again = run_exact(jobs);
    let first = Report { criteria: criteria.clone() }.to_string();
    let second = Report { criteria: again }.to_string();
    criteria.push(Criterion {
        id: 8,
        title: "determinism",
        summary: "criteria 1-7 evaluated twice render byte-identically".to_string(),
        checks: vec![Check::new("identical rerun", first == second)],
    });
    Report { criteria }
}

fn run_exact(jobs: usize) -> Vec<Criterion> {
    vec![
        oracle_consistency(),
        no_map_suite(jobs),
        desk_instance(),
        derivation_chains(),
        q_pi_suite(),
        vcb_assembly(),
        filtration_arithmetic(),
    ]
}

pub fn oracle_consistency() -> Criterion {
    let mut checks = Vec::new();
    let mut sizes = Vec::new();
    for n in 4..=7 {
        let basis = mbar::boundary_basis(n);
        let expected = (1usize << (n - 1)) - 1 - n;
        checks.push(Check::new(format!("n={n}: {expected} boundary divisors"), basis.len() == expected));
        let verifier = match Verifier::new(n) {
            Ok(v) => v,
            Err(e) => {
                checks.push(Check::from_result(format!("n={n}: oracles"), Err(e)));
                continue;
            }
        };
        let kernel = mbar::keel_kernel(n);
        let all_zero = kernel
            .iter()
            .all(|v| verifier.fcurves().iter().all(|f| fcurve_pair(n, f, v) == Q::from_integer(0.into())));
        checks.push(Check::new(
            format!("n={n}: {} keel vectors x {} F-curves pair to 0", kernel.len(), verifier.fcurves().len()),
            all_zero,
        ));
        let pic = (1usize << (n - 1)) - n * (n - 1) / 2 - 1;
        checks.push(Check::new(
            format!("n={n}: quotient rank {pic}"),
            verifier.reducer().quotient_rank() == pic,
        ));
        sizes.push(format!("{}/{}", basis.len(), verifier.fcurves().len()));
    }
    Criterion {
        id: 1,
        title: "oracle consistency",
        summary: format!("divisors/F-curves for n=4..7: {}", sizes.join(", ")),
        checks,
    }
}

/// Every relation instance that needs no map, for `n` sections.
pub fn no_map_instances(ctx: &Context) -> Vec<(String, Result<BaseExpr>)> {
    let n = ctx.section_count();
    let s = |i: usize| CurveExpr::sym(&section_name(i));
    let mut out = Vec::new();
    for i in 1..=n {
        out.push((format!("rel1 s{i}"), rel1(ctx, &s(i))));
        out.push((format!("rel3 {i}"), rel3(ctx, i)));
        out.push((format!("rel7 {i}"), rel7(ctx, i)));
        out.push((format!("rel8_first {i}"), rel8_first(ctx, i)));
        out.push((format!("rel8_psi {i}"), rel8_psi(ctx, i)));
        out.push((format!("rel8_sum {i}"), rel8_sum(ctx, i)));
        for j in 1..=n {
            out.push((format!("rel2 s{i} s{j}"), rel2(ctx, &s(i), &s(j))));
            out.push((format!("rel4 {i} s{j}"), rel4(ctx, i, &s(j))));
            out.push((format!("rel10 {i} s{j}"), rel10(ctx, i, &s(j))));
            out.push((format!("rel9 {i} {j}"), rel9(ctx, i, j)));
            if i != j {
                out.push((format!("rel6 {i} {j}"), rel6(ctx, i, j)));
            }
        }
    }
    out
}

fn no_map_for(n: usize) -> Vec<Check> {
    let ctx = Context::sections_only(n, StabilityMode::DeligneMumford);
    let verifier = match Verifier::new(n) {
        Ok(v) => v,
        Err(e) => return vec![Check::from_result(format!("n={n}"), Err(e))],
    };
    no_map_instances(&ctx)
        .into_iter()
        .map(|(name, e)| {
            let verdict = e.and_then(|e| mbar::specialize(&ctx, &e)).and_then(|v| verifier.verify(&v));
            Check::from_result(format!("n={n} {name}"), verdict.map(|v| v.is_zero_class()))
        })
        .collect()
}

pub fn no_map_suite(jobs: usize) -> Criterion {
    let ns: Vec<usize> = (4..=7).collect();
    let per_n: Vec<Vec<Check>> = if jobs > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ns.iter().map(|&n| scope.spawn(move || no_map_for(n))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| vec![Check::new("worker panicked", false)]))
                .collect()
        })
    } else {
        ns.iter().map(|&n| no_map_for(n)).collect()
    };
    let counts: Vec<String> = ns.iter().zip(&per_n).map(|(n, c)| format!("n={n}: {}", c.len())).collect();
    Criterion {
        id: 2,
        title: "no-map relation suite",
        summary: format!("zero under Keel reduction and F-curve pairing; instances {}", counts.join(", ")),
        checks: per_n.into_iter().flatten().collect(),
    }
}

pub fn desk_instance() -> Criterion {
    let ctx = Context::sections_only(4, StabilityMode::DeligneMumford);
    let psi1 = BaseExpr::atom(BaseAtom::Psi(1)).scale_q(&Q::from_integer(6.into()));
    let boundary = BaseExpr::total_boundary().scale_q(&Q::from_integer(2.into()));
    let run = || -> Result<Vec<Check>> {
        let lhs = mbar::specialize(&ctx, &psi1)?;
        let rhs = mbar::specialize(&ctx, &boundary)?;
        let verifier = Verifier::new(4)?;
        let f = &verifier.fcurves()[0];
        let six = Q::from_integer(6.into());
        let expected_rhs = mbar::boundary_basis(4)
            .into_iter()
            .fold(mbar::MbarVector::zero(4), |mut v, p| {
                v.add(p, Q::from_integer(2.into()));
                v
            });
        Ok(vec![
            Check::new("2 Sum' Delta = 2(D12|34 + D13|24 + D14|23)", rhs == expected_rhs),
            Check::new("6 psi_1 - 2 Sum' Delta is the zero class", verifier.verify(&lhs.sub(&rhs))?.is_zero_class()),
            Check::new("F-pairing of 6 psi_1 is 6", fcurve_pair(4, f, &lhs) == six),
            Check::new("F-pairing of 2 Sum' Delta is 6", fcurve_pair(4, f, &rhs) == six),
            Check::new(
                "rel8_sum at n=4 is the zero class",
                verifier.verify(&mbar::specialize(&ctx, &rel8_sum(&ctx, 1)?)?)?.is_zero_class(),
            ),
        ])
    };
    Criterion {
        id: 3,
        title: "desk-checked instance",
        summary: "n=4: 6 psi_1 = 2 (D12|34 + D13|24 + D14|23), pairing 6".to_string(),
        checks: run().unwrap_or_else(|e| vec![Check::from_result("n=4", Err(e))]),
    }
}

fn symbolic(r: usize) -> Context {
    Context::sections_only(r, StabilityMode::Artin)
        .with_symbol("D", Poly::param("e"), Effectivity::Unbounded)
        .and_then(|c| c.with_symbol("E", Poly::param("f"), Effectivity::Unbounded))
        .expect("fresh symbols")
}

fn vanishes(ctx: &Context, e: Result<BaseExpr>) -> Result<bool> {
    Ok(e?.normalize(ctx).is_zero())
}

fn chain(checks: &mut Vec<Check>, label: String, ctx: &Context, e: impl FnOnce() -> Result<BaseExpr>) {
    checks.push(Check::from_result(label, vanishes(ctx, e())));
}

pub fn derivation_chains() -> Criterion {
    let mut checks = Vec::new();
    let d = CurveExpr::sym("D");
    let e2 = CurveExpr::sym("E");
    let e = Poly::param("e");
    let s = |i: usize| CurveExpr::sym(&section_name(i));

    for r in 0..=2 {
        let c = symbolic(r);
        chain(&mut checks, format!("rel2 by polarization, r={r}"), &c, || {
            Ok(rel2(&c, &d, &e2)? - (rel1(&c, &(&d + &e2))? - rel1(&c, &d)? - rel1(&c, &e2)?))
        });
    }
    for r in 1..=3 {
        let c = symbolic(r);
        for i in 1..=r {
            chain(&mut checks, format!("rel4 from rel1, rel2, rel3, r={r} i={i}"), &c, || {
                Ok(rel4(&c, i, &d)? - (rel2(&c, &d, &s(i))?.scale(&e) - rel3(&c, i)?.scale(&e.pow(2)) - rel1(&c, &d)?))
            });
        }
    }
    let c3 = symbolic(3);
    for (i, j) in [(1, 2), (2, 3), (3, 1)] {
        chain(&mut checks, format!("rel6 from rel2 and rel3, ({i},{j})"), &c3, || {
            Ok(rel6(&c3, i, j)? - (rel3(&c3, i)? + rel3(&c3, j)? - rel2(&c3, &s(i), &s(j))?))
        });
    }
    for r in 2..=6 {
        let c = Context::sections_only(r, StabilityMode::Artin);
        chain(&mut checks, format!("rel7 from rel6, r={r}"), &c, || {
            let direct: BaseExpr = (2..=r).map(|j| rel6(&c, 1, j)).sum::<Result<BaseExpr>>()?;
            Ok(rel7(&c, 1)? + direct)
        });
    }
    for r in 2..=6 {
        let c = symbolic(r);
        let rn = Poly::int(r as i64);
        chain(&mut checks, format!("rel8 first form from rel4, r={r}"), &c, || {
            let others = (2..=r).map(s).fold(CurveExpr::zero(), |a, b| a + b);
            Ok(rel8_first(&c, 1)? - rel4(&c, 1, &others)?)
        });
        chain(&mut checks, format!("rel8 psi form from rel7, r={r}"), &c, || {
            Ok(rel8_psi(&c, 1)? - (rel7(&c, 1)? - rel8_first(&c, 1)?))
        });
        chain(&mut checks, format!("rel8 sum form from the other two, r={r}"), &c, || {
            Ok(rel8_sum(&c, 1)? - (rel8_first(&c, 1)?.scale(&(&rn - &Poly::one())) + rel8_psi(&c, 1)?.scale(&rn)))
        });
        chain(&mut checks, format!("rel9 from rel8_sum, r={r}"), &c, || {
            Ok(rel9(&c, 1, r)? - (rel8_sum(&c, r)? - rel8_sum(&c, 1)?))
        });
    }
    for r in 2..=5 {
        let c = symbolic(r);
        let k = Poly::int(((r - 1) * (r - 2)) as i64);
        chain(&mut checks, format!("rel10 from rel4 and rel8_psi, r={r}"), &c, || {
            Ok(rel10(&c, 1, &d)? - (rel4(&c, 1, &d)?.scale(&k) + rel8_psi(&c, 1)?.scale(&e.pow(2))))
        });
    }
    for r in 0..=3 {
        let c = symbolic(r);
        chain(&mut checks, format!("rel1 from rel5 via push_product, r={r}"), &c, || {
            let pushed = push_product(&c, &d, &rel5(&c, &d)?)?;
            Ok(pushed - rel1(&c, &d)?.scale(&e))
        });
    }
    Criterion {
        id: 4,
        title: "derivation chains",
        summary: "each combination normalizes to the empty expression".to_string(),
        checks,
    }
}

pub fn q_pi_suite() -> Criterion {
    let mut checks = Vec::new();
    let omega = CurveExpr::omega();
    for r in 0..=3 {
        let c = symbolic(r);
        chain(&mut checks, format!("q_pi(omega) = -Sum' Delta modulo rel1(omega), r={r}"), &c, || {
            Ok(q_pi(&c, &omega, &BaseExpr::zero())? + BaseExpr::total_boundary() + rel1(&c, &omega)?)
        });
    }
    for bound in 1..=10u64 {
        let label = format!("degree-0 L bounded by {bound}: coefficients -a^2");
        let run = || -> Result<bool> {
            let c = Context::new(StabilityMode::Artin).with_symbol("L", Poly::zero(), Effectivity::Bounded(bound))?;
            let l = CurveExpr::sym("L");
            let lcomp = cor_lcomp(&c, &l)?;
            let via_rel1 = (q_pi(&c, &l, &BaseExpr::zero())? - lcomp.clone() - rel1(&c, &l)?).normalize(&c);
            let coeffs = expand_sum(&c, &(&Poly::prime("L") * &Poly::dprime("L")), Convention::Unordered)?;
            let mut seen = std::collections::BTreeSet::new();
            let mut ok = via_rel1.is_zero() && !coeffs.is_empty();
            for (idx, coeff) in &coeffs {
                let a = idx.parts()[0].0;
                seen.insert(a.abs());
                ok &= *coeff == Q::from_integer((-a * a).into());
            }
            Ok(ok && seen == (0..=bound as i64).collect())
        };
        checks.push(Check::from_result(label, run()));
    }
    for r in 0..=2 {
        let c = symbolic(r);
        let y = CurveExpr::pullback(BaseExpr::named("y"));
        let d = CurveExpr::sym("D");
        chain(&mut checks, format!("twist by a pullback adds 2e y, r={r}"), &c, || {
            let diff = q_pi(&c, &(&d + &y), &BaseExpr::zero())? - q_pi(&c, &d, &BaseExpr::zero())?;
            Ok(diff - BaseExpr::named("y").scale(&(&Poly::param("e") * &Poly::int(2))))
        });
        let flat = Context::sections_only(r, StabilityMode::Artin)
            .with_symbol("L", Poly::zero(), Effectivity::Unbounded)
            .expect("fresh symbol");
        let l = CurveExpr::sym("L");
        chain(&mut checks, format!("twist invariance at e=0, r={r}"), &flat, || {
            Ok(q_pi(&flat, &(&l + &y), &BaseExpr::zero())? - q_pi(&flat, &l, &BaseExpr::zero())?)
        });
    }
    Criterion {
        id: 5,
        title: "Q_pi suite",
        summary: "omega, degree-0 boundary coefficients, twist invariance".to_string(),
        checks,
    }
}

pub fn vcb_assembly() -> Criterion {
    let mut checks = Vec::new();
    for r in 0..=5 {
        let run = || -> Result<bool> {
            let c = Context::sections_only(r, StabilityMode::Artin).with_symbol(
                "K",
                Poly::param("k"),
                Effectivity::Unbounded,
            )?;
            let t = TargetData::new(Poly::param("n"), "K");
            let defect = vcb::assembly_defect(&c, &t)?;
            let rank = vcb::virtual_canonical(&c, &t)?.rank;
            let expected = -Poly::param("k") + Poly::param("n") + Poly::int(r as i64 - 3);
            Ok(defect.is_zero() && rank == expected)
        };
        checks.push(Check::from_result(format!("symbolic assembly and rank, r={r}"), run()));
    }
    for (n, d, r) in [(1i64, 1i64, 0usize), (2, 1, 0), (2, 2, 0), (3, 1, 2)] {
        let run = || -> Result<bool> {
            let c = Context::sections_only(r, StabilityMode::Artin).with_symbol(
                "K",
                Poly::int(-(n + 1) * d),
                Effectivity::Unbounded,
            )?;
            let t = TargetData::new(Poly::int(n), "K");
            let rank = vcb::virtual_canonical(&c, &t)?.rank;
            Ok(rank == Poly::int((n + 1) * d + n + r as i64 - 3) && vcb::assembly_defect(&c, &t)?.is_zero())
        };
        checks.push(Check::from_result(format!("projective space (N,d,r)=({n},{d},{r})"), run()));
    }
    Criterion {
        id: 6,
        title: "vcb assembly",
        summary: "virtual canonical = sections side + tangent side, r=0..5".to_string(),
        checks,
    }
}

pub fn filtration_arithmetic() -> Criterion {
    let mut bad = Vec::new();
    for a in 1..=1000i64 {
        let ok = filtration_lengths(a)
            .map(|l| l.iter().sum::<u64>() == (a * a) as u64 && l.len() == a as usize)
            .unwrap_or(false);
        if !ok {
            bad.push(a);
        }
    }
    let check = Check {
        label: "lengths sum to a^2 for a=1..1000".to_string(),
        passed: bad.is_empty(),
        note: (!bad.is_empty()).then(|| format!("first failure at a={}", bad[0])),
    };
    Criterion {
        id: 7,
        title: "filtration arithmetic",
        summary: format!("{} values of a", 1000),
        checks: vec![check],
    }
}
