//! Property checks shared by the `properties` and `acceptance` targets.
//! Each takes a case count and returns a failure message on error.

#![allow(dead_code)]

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use reflex::cusp::{self, Quotient};
use reflex::exactnum::{int, rat, FieldElem, ImagQuadField, Rational};
use reflex::hlat::{self, preserves_form, same_module, HermLattice};
use reflex::latalg::{snf, IntMatrix, Matrix, RatMatrix};
use reflex::ledger::{self, FormRecord};
use reflex::qlat::{self, GroupChoice, QuadLattice};
use reflex::ramify::{self, BranchReport, ClassKey, SearchBudget};
use reflex::slope::{self, Verdict};

pub const MANY: u32 = 10_000;

pub type Outcome = std::result::Result<(), String>;

fn run<S: Strategy>(
    cases: u32,
    strat: S,
    test: impl Fn(S::Value) -> std::result::Result<(), TestCaseError>,
) -> Outcome {
    let mut runner = proptest::test_runner::TestRunner::new(cfg(cases));
    runner.run(&strat, test).map_err(|e| e.to_string())
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        max_global_rejects: cases * 50,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

// -- strategies ------------------------------------------------------------

/// Symmetric integer Gram of size n with small entries.
fn sym_gram(n: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-6i64..=6, n * n).prop_map(move |e| {
        IntMatrix::from_fn(n, n, |i, j| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            BigInt::from(e[a * n + b])
        })
    })
}

fn gram_and_vec() -> impl Strategy<Value = (IntMatrix, Vec<BigInt>)> {
    (2usize..=5).prop_flat_map(|n| {
        (
            sym_gram(n),
            prop::collection::vec(-4i64..=4, n).prop_map(|v| big(&v)),
        )
    })
}

fn field_of(d: i64) -> ImagQuadField {
    ImagQuadField::new(d).unwrap()
}

/// An element of O_F from ω-coordinates.
fn ring_elem(d: i64, m: i64, n: i64) -> FieldElem {
    FieldElem::from_omega_coords(d, int(m), int(n))
}

/// Hermitian Gram with δO_F values: h_ij = δ·x_ij with x_ji = −x̄_ij.
fn herm_gram(d: i64, n: usize) -> impl Strategy<Value = HermLattice> {
    prop::collection::vec((-3i64..=3, -3i64..=3), n * n).prop_map(move |e| {
        let f = field_of(d);
        let delta = f.delta().clone();
        let sd = FieldElem::sqrt_d(d);
        let g = Matrix::from_fn(n, n, |i, j| {
            let x = if i == j {
                sd.scale(&int(e[i * n + i].0))
            } else if i < j {
                ring_elem(d, e[i * n + j].0, e[i * n + j].1)
            } else {
                -&ring_elem(d, e[j * n + i].0, e[j * n + i].1).conj()
            };
            &delta * &x
        });
        HermLattice::new("random", f, g).expect("δO_F-valued Hermitian")
    })
}

fn herm_vec(d: i64, n: usize) -> impl Strategy<Value = Vec<FieldElem>> {
    prop::collection::vec((-3i64..=3, -3i64..=3), n)
        .prop_map(move |v| v.into_iter().map(|(a, b)| ring_elem(d, a, b)).collect())
}

fn herm_case(
    d: i64,
) -> impl Strategy<Value = (HermLattice, Vec<FieldElem>, Vec<FieldElem>, usize)> {
    (2usize..=4)
        .prop_flat_map(move |n| (herm_gram(d, n), herm_vec(d, n), herm_vec(d, n), 0usize..6))
}

fn identity_like(n: usize, d: i64) -> Matrix<FieldElem> {
    Matrix::identity_like(n, &FieldElem::one(d))
}

// -- orthogonal reflections -----------------------------------------------

pub fn reflection_preserves_form_and_is_involution(cases: u32) -> Outcome {
    run(cases, gram_and_vec(), |(g, r)| {
        let l = QuadLattice::new("random", g.clone()).unwrap();
        prop_assume!(!l.norm(&r).is_zero());
        let s = l.reflection(&r).unwrap();
        let gq = g.to_rational();
        prop_assert_eq!(s.transpose().mul(&gq).mul(&s), gq);
        prop_assert_eq!(s.mul(&s), RatMatrix::identity(g.rows()));
        Ok(())
    })
}

pub fn snf_certificate(cases: u32) -> Outcome {
    run(
        cases,
        (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| {
            prop::collection::vec(-20i64..=20, r * c)
                .prop_map(move |e| IntMatrix::from_fn(r, c, |i, j| BigInt::from(e[i * c + j])))
        }),
        |m| {
            let s = snf(&m);
            prop_assert!(s.verify(&m));
            prop_assert_eq!(s.u.mul(&m).mul(&s.v), s.d.clone());
            prop_assert!(s.u.is_unimodular() && s.v.is_unimodular());
            Ok(())
        },
    )
}

pub fn disc_group_order_is_abs_det(cases: u32) -> Outcome {
    run(cases, (1usize..=5).prop_flat_map(sym_gram), |g| {
        let det = g.det();
        prop_assume!(!det.is_zero());
        let order: BigInt = snf(&g).diagonal().iter().product();
        prop_assert_eq!(order, det.abs());
        let l = QuadLattice::new("random", g).unwrap();
        let inv = l.invariants().unwrap();
        let from_inv: BigInt = inv.disc_group.iter().product();
        prop_assert_eq!(from_inv, det.abs());
        Ok(())
    })
}

pub fn verdict_trichotomy(cases: u32) -> Outcome {
    run(cases, (-400i64..400, 1i64..60), |(p, q)| {
        let s = rat(p, q);
        let v = Verdict::from_slope(&s);
        let one = Rational::one();
        let expected = if s > one {
            Verdict::Fano
        } else if s == one {
            Verdict::CalabiYau
        } else {
            Verdict::CanonicalModel
        };
        prop_assert_eq!(v, expected);
        Ok(())
    })
}

// -- unitary quasi-reflections ------------------------------------------------

/// Checks τ_{r,ξ} for the nontrivial unit picked by `pick`.
fn check_tau(
    l: &HermLattice,
    r: &[FieldElem],
    pick: usize,
) -> std::result::Result<(), TestCaseError> {
    let f = &l.field;
    let d = l.d();
    let n = l.rank();
    let units: Vec<&FieldElem> = f.nontrivial_units().collect();
    {
        let xi = units[pick % units.len()];
        let t = l.quasi_reflection(r, xi).unwrap();
        prop_assert!(
            preserves_form(&l.gram, &t),
            "τ_(r,{}) does not preserve the form",
            xi
        );
        let ord = f.unit_order(xi).unwrap();
        let id = identity_like(n, d);
        let mut p = t.clone();
        for _ in 1..ord {
            prop_assert_ne!(&p, &id);
            p = p.mul(&t);
        }
        prop_assert_eq!(p, id);
    }
    Ok(())
}

pub fn tau_gaussian(cases: u32) -> Outcome {
    run(cases, herm_case(-1), |(l, r, _, k)| {
        prop_assume!(!l.norm(&r).is_zero());
        check_tau(&l, &r, k)?;
        // τ_{r,i}² = τ_{r,−1}
        let i = FieldElem::sqrt_d(-1);
        let t = l.quasi_reflection(&r, &i).unwrap();
        prop_assert_eq!(
            t.mul(&t),
            l.quasi_reflection(&r, &FieldElem::from_int(-1, -1))
                .unwrap()
        );
        Ok(())
    })
}

pub fn tau_eisenstein(cases: u32) -> Outcome {
    run(cases, herm_case(-3), |(l, r, _, k)| {
        prop_assume!(!l.norm(&r).is_zero());
        check_tau(&l, &r, k)?;
        // ω a primitive cube root of unity: τ_{r,ω}² = τ_{r,ω̄}
        let w = FieldElem::new(-3, rat(-1, 2), rat(1, 2));
        let t = l.quasi_reflection(&r, &w).unwrap();
        prop_assert_eq!(t.mul(&t), l.quasi_reflection(&r, &w.conj()).unwrap());
        Ok(())
    })
}

pub fn tau_d2(cases: u32) -> Outcome {
    run(cases, herm_case(-2), |(l, r, _, k)| {
        prop_assume!(!l.norm(&r).is_zero());
        check_tau(&l, &r, k)?;
        Ok(())
    })
}

fn pullback(
    d: i64,
    l: &HermLattice,
    x: &[FieldElem],
    r: &[FieldElem],
    pick: usize,
) -> std::result::Result<(), TestCaseError> {
    prop_assume!(!l.norm(r).is_zero());
    let units: Vec<FieldElem> = l.field.nontrivial_units().cloned().collect();
    let xi = &units[pick % units.len()];
    let c = l.pullback_check(x, r, xi).unwrap();
    prop_assert!(c.implication_holds(d), "{:?} for ξ = {}", c, xi);
    Ok(())
}

pub fn pullback_gaussian(cases: u32) -> Outcome {
    run(cases, herm_case(-1), |(l, x, r, k)| {
        pullback(-1, &l, &x, &r, k)?;
        Ok(())
    })
}

pub fn pullback_d2(cases: u32) -> Outcome {
    run(cases, herm_case(-2), |(l, x, r, k)| {
        pullback(-2, &l, &x, &r, k)?;
        Ok(())
    })
}

pub fn pullback_eisenstein(cases: u32) -> Outcome {
    run(cases, herm_case(-3), |(l, x, r, k)| {
        pullback(-3, &l, &x, &r, k)?;
        Ok(())
    })
}

pub fn double_dual_is_identity(cases: u32) -> Outcome {
    run(
        cases,
        (prop_oneof![Just(-1i64), Just(-2), Just(-3)]).prop_flat_map(herm_case),
        |(l, _, _, _)| {
            prop_assume!(l.gram.inverse().is_some());
            let b = l.dual().unwrap();
            let ld = l.dual_lattice().unwrap();
            let b2 = ld.dual().unwrap().mul(&b);
            prop_assert!(same_module(&b2, &identity_like(l.rank(), l.d())));
            Ok(())
        },
    )
}

// -- forms and slopes -----------------------------------------------------------

struct Fixtures {
    cases: Vec<(BranchReport, FormRecord)>,
    balls: Vec<(HermLattice, &'static str)>,
}

fn fixtures() -> &'static Fixtures {
    static F: OnceLock<Fixtures> = OnceLock::new();
    F.get_or_init(|| {
        let forms = ledger::builtin_forms();
        let get = |n: &str| forms.iter().find(|f| f.name == n).unwrap().clone();
        let b = SearchBudget::default();
        let orth = |l: &QuadLattice| {
            ramify::orth_branch_report(l, GroupChoice::FullPlus, None, &b).unwrap()
        };
        let cases = vec![
            (orth(&qlat::ii_2_26()), get("Phi12")),
            (orth(&qlat::u_u_e8()), get("Phi252")),
            (
                orth(&qlat::lambda_enr()),
                ledger::product(&get("Phi4"), &get("Phi124")).unwrap(),
            ),
            (
                orth(&qlat::lambda_log_enr(3)),
                ledger::product(&get("Psi7_logEnr3"), &get("Psi124_logEnr3")).unwrap(),
            ),
        ];
        let balls = vec![
            (hlat::lambda_uu_d1(), "U_U"),
            (hlat::lambda_uu_d2(), "U_U"),
            (
                HermLattice::direct_sum("eis", &[&eisenstein_plane()]).unwrap(),
                "U_U",
            ),
        ];
        Fixtures { cases, balls }
    })
}

/// A δO_F-valued hyperbolic plane over Z[ω], d = −3.
fn eisenstein_plane() -> HermLattice {
    let f = field_of(-3);
    let delta = f.delta().clone();
    let z = f.zero();
    let g = Matrix::from_rows(vec![vec![z.clone(), delta.clone()], vec![delta.conj(), z]]).unwrap();
    HermLattice::new("eis_plane", f, g).unwrap()
}

pub fn slope_invariant_under_powers(cases: u32) -> Outcome {
    run(cases, (0usize..4, 1u64..60), |(idx, t)| {
        let (b, f) = &fixtures().cases[idx];
        let base = slope::check_assumption_i(b, f, b.family).unwrap();
        let p = ledger::power(f, t).unwrap();
        let v = slope::check_assumption_i(b, &p, b.family).unwrap();
        prop_assert_eq!(&v.s, &base.s);
        prop_assert_eq!(v.verdict, base.verdict);
        Ok(())
    })
}

pub fn restriction_factor(cases: u32) -> Outcome {
    run(
        cases,
        (
            0usize..3,
            1i64..300,
            prop::collection::btree_map((1i64..6, any::<bool>()), 1i64..20, 1..4),
        ),
        |(idx, w, div)| {
            let (ball, assoc) = &fixtures().balls[idx];
            let divisor: Vec<(ClassKey, Rational)> = div
                .iter()
                .map(|(&(k, se), &m)| (ClassKey::new(int(-2 * k), se), int(m)))
                .collect();
            let f = FormRecord::new("f", *assoc, int(w), divisor.clone(), "", "").unwrap();
            let r = ledger::restrict_to_ball(&f, ball, assoc).unwrap();
            let units = ball.field.units().len() as i64;
            prop_assert_eq!(&r.weight, &f.weight);
            prop_assert_eq!(r.divisor.len(), divisor.len());
            for (k, m) in &divisor {
                let kk = ClassKey::new(&k.norm / int(2), k.special_even);
                prop_assert_eq!(r.multiplicity(&kk).cloned(), Some(m * rat(units, 2)));
            }
            Ok(())
        },
    )
}

// -- cusp quotients -------------------------------------------------------------

fn quotients() -> &'static Vec<(QuadLattice, Quotient, IntMatrix)> {
    static Q: OnceLock<Vec<(QuadLattice, Quotient, IntMatrix)>> = OnceLock::new();
    Q.get_or_init(|| {
        let enr = qlat::lambda_enr();
        let [s1, s2] = cusp::sterk_planes(&enr).unwrap();
        let ii = qlat::ii_2_26();
        let leech = cusp::leech_plane_e8_cubed(&ii).unwrap();
        let std = cusp::standard_plane(&qlat::u_u_e8(), "e8").unwrap();
        let mut out = Vec::new();
        for (l, e) in [
            (enr.clone(), s1),
            (enr, s2),
            (ii, leech),
            (qlat::u_u_e8(), std),
        ] {
            let q = cusp::quotient(&l, &e).unwrap();
            // E^⊥ as the Z-kernel of the pairing with E.
            let eg = IntMatrix::from_rows(e.basis.clone()).unwrap().mul(&l.gram);
            let perp = reflex::latalg::integer_kernel(&eg);
            out.push((l, q, perp));
        }
        out
    })
}

pub fn quotient_norms_on_random_lifts(cases: u32) -> Outcome {
    run(
        cases,
        (0usize..4, prop::collection::vec(-5i64..=5, 28)),
        |(idx, coeffs)| {
            let (l, q, perp) = &quotients()[idx];
            let c = big(&coeffs[..perp.rows()]);
            let x: Vec<BigInt> = (0..l.rank())
                .map(|j| (0..perp.rows()).map(|i| &c[i] * perp.get(i, j)).sum())
                .collect();
            let y = q.project(&x).expect("vector of E^⊥ projects");
            prop_assert_eq!(q.lattice.norm(&y), l.norm(&x));
            let back = q.lift(&y);
            prop_assert_eq!(l.norm(&back), l.norm(&x));
            Ok(())
        },
    )
}

/// Every property with its name.
pub const SUITE: &[(&str, fn(u32) -> Outcome)] = &[
    (
        "reflection_preserves_form_and_is_involution",
        reflection_preserves_form_and_is_involution,
    ),
    ("snf_certificate", snf_certificate),
    ("disc_group_order_is_abs_det", disc_group_order_is_abs_det),
    ("verdict_trichotomy", verdict_trichotomy),
    ("tau_gaussian", tau_gaussian),
    ("tau_eisenstein", tau_eisenstein),
    ("tau_d2", tau_d2),
    ("pullback_gaussian", pullback_gaussian),
    ("pullback_d2", pullback_d2),
    ("pullback_eisenstein", pullback_eisenstein),
    ("double_dual_is_identity", double_dual_is_identity),
    ("slope_invariant_under_powers", slope_invariant_under_powers),
    ("restriction_factor", restriction_factor),
    (
        "quotient_norms_on_random_lifts",
        quotient_norms_on_random_lifts,
    ),
];
