//! Branch divisors of D → Γ\D: which reflective hyperplane classes ramify,
//! with degrees and witness vectors.
//!
//! Candidate (norm, divisibility) types are first cut down by exact
//! arithmetic: a primitive r with ⟨r, Λ⟩ = δD must lie in
//! M_D = {x : ⟨x, Λ⟩ ⊆ δD}, so its norm lies in the norm ideal of M_D.
//! Survivors need a witness, found by a bounded small-support search and
//! re-verified from scratch.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, FieldElem, ImagQuadField, Rational};
use crate::hlat::{HermLattice, HermVector};
use crate::latalg::{integral_preimage, IntMatrix, RatMatrix};
use crate::qlat::{GroupChoice, QuadLattice};

/// Limits for the witness search in indefinite lattices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Largest number of nonzero coordinates tried.
    pub max_support: usize,
    /// Largest absolute coordinate value tried.
    pub max_coeff: i64,
    /// Hard cap on candidate vectors examined.
    pub max_candidates: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_support: 4,
            max_coeff: 5,
            max_candidates: 20_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    Orthogonal { n: usize },
    Unitary { n: usize, d: i64 },
}

impl Family {
    pub fn n(&self) -> usize {
        match *self {
            Family::Orthogonal { n } | Family::Unitary { n, .. } => n,
        }
    }
}

/// Branch classes are keyed by norm and the special-even flag.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassKey {
    pub norm: Rational,
    pub special_even: bool,
}

impl ClassKey {
    pub fn new(norm: Rational, special_even: bool) -> Self {
        ClassKey { norm, special_even }
    }

    pub fn label(&self) -> String {
        format!(
            "H({}{})",
            format_rational(&self.norm),
            if self.special_even { ",se" } else { "" }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Quad(Vec<BigInt>),
    Herm(HermVector),
}

/// What pins a class down beyond its key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassDetail {
    /// Values of div(r) realized by the class.
    Orth { divs: Vec<BigInt> },
    /// Content generators D with ⟨r, Λ⟩ = δD, and the admissible units.
    Herm {
        contents: Vec<FieldElem>,
        units: Vec<FieldElem>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchClass {
    pub key: ClassKey,
    pub degree: usize,
    pub witness: Option<Witness>,
    pub exhaustive: bool,
    pub detail: ClassDetail,
}

/// An arithmetically admissible type for which no witness turned up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unresolved {
    pub key: ClassKey,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchReport {
    pub lattice: String,
    pub family: Family,
    pub group: Option<GroupChoice>,
    pub classes: Vec<BranchClass>,
    pub unresolved: Vec<Unresolved>,
    /// No admissible type was left without a witness.
    pub exhaustive: bool,
    /// Every vector of the lattice is special-even, so the flag carries no
    /// information when matching divisors against classes.
    pub all_special_even: bool,
    pub candidates_examined: u64,
    pub notes: Vec<String>,
}

impl BranchReport {
    pub fn class(&self, key: &ClassKey) -> Option<&BranchClass> {
        self.classes.iter().find(|c| &c.key == key)
    }

    /// Whether a divisor keyed `k` names class `c` of this report.
    pub fn key_matches(&self, k: &ClassKey, c: &ClassKey) -> bool {
        k.norm == c.norm && (self.all_special_even || k.special_even == c.special_even)
    }

    pub fn keys(&self) -> Vec<ClassKey> {
        self.classes.iter().map(|c| c.key.clone()).collect()
    }
}

// -- small-support search ------------------------------------------------

/// The (support, bound) levels in search order.
fn levels(dim: usize, budget: &SearchBudget) -> Vec<(usize, i64)> {
    let mut out = Vec::new();
    for s in 1..=budget.max_support.min(dim) {
        for b in 1..=budget.max_coeff.max(1) {
            out.push((s, b));
        }
    }
    out.sort_by_key(|&(s, b)| (s as i64 + b, s));
    out
}

/// Visits the vectors of Zⁿ with exactly `support` nonzero entries, all of
/// absolute value ≤ `bound` with at least one equal to `bound`, and first
/// nonzero entry positive. The callback returns false to stop.
fn visit_level(n: usize, support: usize, bound: i64, f: &mut dyn FnMut(&[i64]) -> bool) -> bool {
    fn rec(
        v: &mut Vec<i64>,
        start: usize,
        left: usize,
        bound: i64,
        hit: bool,
        f: &mut dyn FnMut(&[i64]) -> bool,
    ) -> bool {
        if left == 0 {
            return !hit || f(v);
        }
        let n = v.len();
        for pos in start..=n - left {
            let first = v.iter().all(|&x| x == 0);
            for a in -bound..=bound {
                if a == 0 || (first && a < 0) {
                    continue;
                }
                if left == 1 && !hit && a.abs() != bound {
                    continue;
                }
                v[pos] = a;
                let go = rec(v, pos + 1, left - 1, bound, hit || a.abs() == bound, f);
                v[pos] = 0;
                if !go {
                    return false;
                }
            }
        }
        true
    }
    if support == 0 || support > n {
        return true;
    }
    let mut v = vec![0i64; n];
    rec(&mut v, 0, support, bound, false, f)
}

/// Runs the level schedule until `f` asks to stop or the candidate cap is
/// hit. Returns (candidates examined, cap hit).
pub(crate) fn small_vector_search(
    dim: usize,
    budget: &SearchBudget,
    f: &mut dyn FnMut(&[i64]) -> bool,
) -> (u64, bool) {
    let mut count = 0u64;
    let mut capped = false;
    for (s, b) in levels(dim, budget) {
        let mut stop = false;
        let go = visit_level(dim, s, b, &mut |v| {
            if count >= budget.max_candidates {
                capped = true;
                return false;
            }
            count += 1;
            if f(v) {
                true
            } else {
                stop = true;
                false
            }
        });
        if !go || stop || capped {
            break;
        }
    }
    (count, capped)
}

fn small_gram(g: &IntMatrix) -> Option<Vec<Vec<i64>>> {
    g.to_rows()
        .into_iter()
        .map(|r| r.iter().map(|x| x.to_i64()).collect())
        .collect()
}

fn sparse_norm(g: &[Vec<i64>], v: &[i64]) -> i128 {
    let supp: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0).collect();
    let mut acc: i128 = 0;
    for &i in &supp {
        for &j in &supp {
            acc += v[i] as i128 * v[j] as i128 * g[i][j] as i128;
        }
    }
    acc
}

fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Gcd of the diagonal halves and off-diagonal entries of a Gram matrix:
/// the ideal generated by ⟨x,x⟩ = (x,x)/2 over the lattice.
fn half_norm_ideal(g: &IntMatrix) -> Rational {
    let two = BigInt::from(2);
    let mut acc = BigInt::zero();
    for i in 0..g.rows() {
        acc = acc.gcd(g.get(i, i));
        for j in i + 1..g.cols() {
            acc = acc.gcd(&(&two * g.get(i, j)));
        }
    }
    Rational::new(acc, two)
}

fn positive_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut k = BigInt::one();
    while &k * &k <= n {
        if n.is_multiple_of(&k) {
            out.push(k.clone());
            let q = &n / &k;
            if q != k {
                out.push(q);
            }
        }
        k += 1;
    }
    out.sort();
    out
}

// -- orthogonal ----------------------------------------------------------

#[derive(Clone, Debug)]
struct OrthType {
    m: BigInt,
    t: BigInt,
    key: ClassKey,
    witness: Option<Vec<BigInt>>,
}

/// Reflective classes of O(2,n): primitive r with (r,r) = −m and
/// div(r) = t, m | 2t, and σ_r in the chosen group.
pub fn orth_branch_report(
    l: &QuadLattice,
    g: GroupChoice,
    norm_bound: Option<BigInt>,
    budget: &SearchBudget,
) -> Result<BranchReport> {
    let (p, q, z) = l.signature();
    if p != 2 || z != 0 || q <= 2 {
        return Err(Error::WrongSignature {
            expected: "(2,n) with n > 2".into(),
            p,
            q,
        });
    }
    let n = l.rank();
    let gram = &l.gram;
    let exponent = l.disc_exponent();
    let mut notes = Vec::new();

    // div(r) is always a multiple of the scale
    let scale = gram.entries().iter().fold(BigInt::zero(), |a, x| a.gcd(x));
    let mut types: Vec<OrthType> = Vec::new();
    for t in positive_divisors(&exponent) {
        if !t.is_multiple_of(&scale) {
            continue;
        }
        // M_t = {x : G x ≡ 0 mod t}
        let phi = RatMatrix::from_fn(n, n, |i, j| {
            Rational::new(gram.get(i, j).clone(), t.clone())
        });
        let basis = integral_preimage(&phi);
        let nu = basis_norm_ideal(gram, &basis);
        for m in [t.clone(), &t * 2] {
            if !m.is_multiple_of(&nu) {
                continue;
            }
            if let Some(b) = &norm_bound {
                if -&m < *b {
                    continue;
                }
            }
            if g == GroupChoice::Stable && !BigInt::from(2).is_multiple_of(&m) {
                continue;
            }
            let key = ClassKey::new(Rational::from_integer(-&m), t.is_even());
            types.push(OrthType {
                m,
                t: t.clone(),
                key,
                witness: None,
            });
        }
    }

    let mut examined = 0u64;
    if !types.is_empty() {
        let g64 = small_gram(gram);
        let mut pending = types.len();
        let (cnt, _) = small_vector_search(n, budget, &mut |v| {
            let norm = match &g64 {
                Some(g) => BigInt::from(sparse_norm(g, v)),
                None => l.norm(&to_big(v)),
            };
            if !norm.is_negative() {
                return true;
            }
            let m = -norm;
            if !types.iter().any(|ty| ty.witness.is_none() && ty.m == m) {
                return true;
            }
            let r = to_big(v);
            let div = match l.div(&r) {
                Ok(d) => d,
                Err(_) => return true,
            };
            for ty in types.iter_mut() {
                if ty.witness.is_none() && ty.m == m && ty.t == div && orth_witness_ok(l, g, &r, ty)
                {
                    ty.witness = Some(r.clone());
                    pending -= 1;
                }
            }
            pending > 0
        });
        examined = cnt;
    }

    let mut by_key: BTreeMap<ClassKey, BranchClass> = BTreeMap::new();
    let mut unresolved = Vec::new();
    for ty in &types {
        match &ty.witness {
            Some(w) => {
                let e = by_key.entry(ty.key.clone()).or_insert_with(|| BranchClass {
                    key: ty.key.clone(),
                    degree: 2,
                    witness: Some(Witness::Quad(w.clone())),
                    exhaustive: true,
                    detail: ClassDetail::Orth { divs: vec![] },
                });
                if let ClassDetail::Orth { divs } = &mut e.detail {
                    if !divs.contains(&ty.t) {
                        divs.push(ty.t.clone());
                    }
                }
            }
            None => unresolved.push(Unresolved {
                key: ty.key.clone(),
                description: format!(
                    "norm -{} with div {}: arithmetically possible, no witness within budget",
                    ty.m, ty.t
                ),
            }),
        }
    }
    if !unresolved.is_empty() {
        notes.push(format!(
            "{} admissible type(s) without witness; report may be incomplete",
            unresolved.len()
        ));
    }
    let all_se = gram.entries().iter().all(|x| x.is_even());
    Ok(BranchReport {
        lattice: l.name.clone(),
        family: Family::Orthogonal { n: n - 2 },
        group: Some(g),
        classes: by_key.into_values().collect(),
        exhaustive: unresolved.is_empty(),
        unresolved,
        all_special_even: all_se,
        candidates_examined: examined,
        notes,
    })
}

fn basis_norm_ideal(gram: &IntMatrix, basis: &IntMatrix) -> BigInt {
    let sub = basis.mul(gram).mul(&basis.transpose());
    let mut acc = BigInt::zero();
    for i in 0..sub.rows() {
        acc = acc.gcd(sub.get(i, i));
        for j in i + 1..sub.cols() {
            acc = acc.gcd(&(BigInt::from(2) * sub.get(i, j)));
        }
    }
    acc
}

fn orth_witness_ok(l: &QuadLattice, g: GroupChoice, r: &[BigInt], ty: &OrthType) -> bool {
    l.reflection_in_group(r, g).unwrap_or(false) && l.div(r).map_or(false, |d| d == ty.t)
}

/// Independent check of an orthogonal class witness.
pub fn verify_orth_class(l: &QuadLattice, g: GroupChoice, c: &BranchClass) -> bool {
    let Some(Witness::Quad(r)) = &c.witness else {
        return false;
    };
    let Ok(div) = l.div(r) else { return false };
    let norm = Rational::from_integer(l.norm(r));
    let prim = r.iter().fold(BigInt::zero(), |a, x| a.gcd(x)).is_one();
    prim && norm == c.key.norm
        && c.degree == 2
        && div.is_even() == c.key.special_even
        && l.reflection_in_group(r, g).unwrap_or(false)
}

// -- unitary -------------------------------------------------------------

#[derive(Clone, Debug)]
struct HermType {
    norm: Rational,
    content: FieldElem,
    units: Vec<FieldElem>,
    key: ClassKey,
    witness: Option<HermVector>,
}

/// Generator of {a ∈ O_F : a·x ∈ O_F}.
fn denominator_ideal(f: &ImagQuadField, x: &FieldElem) -> FieldElem {
    let n = FieldElem::from_rational(f.d(), Rational::from_integer(x.denominator()));
    let nx = &n * x;
    f.normalize(&n.div(&f.gcd(&n, &nx)).expect("nonzero"))
}

fn lcm_elem(f: &ImagQuadField, a: &FieldElem, b: &FieldElem) -> FieldElem {
    let g = f.gcd(a, b);
    f.normalize(&(a * b).div(&g).expect("nonzero gcd"))
}

/// Exponent of Λ^∨/Λ as an element of O_F.
fn herm_exponent(l: &HermLattice) -> Result<FieldElem> {
    let dual = l.dual()?;
    let f = &l.field;
    Ok(dual.entries().iter().fold(f.one(), |acc, x| {
        lcm_elem(f, &acc, &denominator_ideal(f, x))
    }))
}

/// Re(δD·a) ∈ Z for all a ∈ O_F.
fn content_special_even(f: &ImagQuadField, dd: &FieldElem) -> bool {
    let x = f.delta() * dd;
    x.re().is_integer() && (&x * &f.omega().conj()).re().is_integer()
}

/// Unitary branch classes: primitive r with norm N < 0 and τ_{r,ξ} ∈ U(Λ)
/// for some unit ξ ≠ 1. Degree is the order of the generated unit group.
pub fn unitary_branch_report(
    l: &HermLattice,
    norm_bound: Option<Rational>,
    budget: &SearchBudget,
) -> Result<BranchReport> {
    let (p, q) = l.signature()?;
    if p != 1 || q <= 1 {
        return Err(Error::WrongSignature {
            expected: "Hermitian (1,n) with n > 1".into(),
            p,
            q,
        });
    }
    let f = l.field.clone();
    let d = f.d();
    let n = l.rank();
    let delta = f.delta().clone();
    let tf = l.trace_form()?;
    let zeta = [f.one(), f.omega()];
    let mut notes = Vec::new();

    let exponent = herm_exponent(l)?;
    let scale = f.gcd_all(
        l.gram
            .entries()
            .iter()
            .map(|x| x.div(&delta).unwrap())
            .collect::<Vec<_>>()
            .iter(),
    );
    let even = tf.is_even();

    let mut types: Vec<HermType> = Vec::new();
    for dd in f.divisors(&exponent) {
        if !f.divides(&scale, &dd) {
            continue;
        }
        let dd = f.normalize(&dd);
        let target = &delta * &dd;
        // φ: Z-basis vector b_k ↦ ω-coordinates of ⟨b_k, e_j⟩/(δD)
        let phi = RatMatrix::from_fn(2 * n, 2 * n, |row, col| {
            let (i, a) = (col / 2, &zeta[col % 2]);
            let j = row / 2;
            let v = (a * l.gram.get(i, j)).div(&target).unwrap();
            let (m, k) = v.omega_coords();
            if row % 2 == 0 {
                m
            } else {
                k
            }
        });
        let basis = integral_preimage(&phi);
        let sub = basis.mul(&tf.gram).mul(&basis.transpose());
        let nu = half_norm_ideal(&sub);
        if nu.is_zero() {
            continue;
        }
        let se = content_special_even(&f, &dd);
        let cbar = target.conj();
        let max_sq = f
            .nontrivial_units()
            .map(|xi| (&(&f.one() - xi) * &cbar).norm())
            .max()
            .unwrap_or_else(Rational::zero);
        let mut k = BigInt::one();
        loop {
            let norm = -(nu.clone() * Rational::from_integer(k.clone()));
            k += 1;
            if &norm * &norm > max_sq {
                break;
            }
            if let Some(b) = &norm_bound {
                if norm < *b {
                    break;
                }
            }
            if even && !norm.is_integer() {
                continue;
            }
            // ⟨r,r⟩ ∈ δD
            let nf = FieldElem::from_rational(d, norm.clone());
            if !nf.div(&target).unwrap().is_integer() {
                continue;
            }
            let units: Vec<FieldElem> = f
                .nontrivial_units()
                .filter(|xi| {
                    let a = (&(&f.one() - *xi) * &cbar).scale(&norm.recip());
                    let b = (&(&f.one() - &xi.conj()) * &cbar).scale(&norm.recip());
                    a.is_integer() && b.is_integer()
                })
                .cloned()
                .collect();
            if units.is_empty() {
                continue;
            }
            types.push(HermType {
                key: ClassKey::new(norm.clone(), se),
                norm,
                content: dd.clone(),
                units,
                witness: None,
            });
        }
    }

    let mut examined = 0u64;
    if !types.is_empty() {
        let g64 = small_gram(&tf.gram);
        let mut pending = types.len();
        let (cnt, _) = small_vector_search(2 * n, budget, &mut |v| {
            let twice = match &g64 {
                Some(g) => BigInt::from(sparse_norm(g, v)),
                None => tf.norm(&to_big(v)),
            };
            if !twice.is_negative() {
                return true;
            }
            let norm = Rational::new(twice, BigInt::from(2));
            if !types
                .iter()
                .any(|ty| ty.witness.is_none() && ty.norm == norm)
            {
                return true;
            }
            let r = match l.from_z_coords(&to_big(v)) {
                Ok(r) => r,
                Err(_) => return true,
            };
            if !l.is_primitive(&r) {
                return true;
            }
            let Ok(c) = l.ideal_content(&r) else {
                return true;
            };
            let dd = f.normalize(&c.div(&delta).unwrap());
            for ty in types.iter_mut() {
                if ty.witness.is_none()
                    && ty.norm == norm
                    && ty.content == dd
                    && herm_witness_ok(l, &r, ty)
                {
                    ty.witness = Some(r.clone());
                    pending -= 1;
                }
            }
            pending > 0
        });
        examined = cnt;
    }

    let mut by_key: BTreeMap<ClassKey, BranchClass> = BTreeMap::new();
    let mut unresolved = Vec::new();
    for ty in &types {
        let degree = f.generated_subgroup_order(&ty.units);
        match &ty.witness {
            Some(w) => {
                let e = by_key.entry(ty.key.clone()).or_insert_with(|| BranchClass {
                    key: ty.key.clone(),
                    degree,
                    witness: Some(Witness::Herm(w.clone())),
                    exhaustive: true,
                    detail: ClassDetail::Herm {
                        contents: vec![],
                        units: ty.units.clone(),
                    },
                });
                if e.degree != degree {
                    notes.push(format!(
                        "{}: content types with degrees {} and {}; keeping the larger",
                        ty.key.label(),
                        e.degree,
                        degree
                    ));
                    if degree > e.degree {
                        e.degree = degree;
                        e.witness = Some(Witness::Herm(w.clone()));
                        if let ClassDetail::Herm { units, .. } = &mut e.detail {
                            *units = ty.units.clone();
                        }
                    }
                }
                if let ClassDetail::Herm { contents, .. } = &mut e.detail {
                    if !contents.contains(&ty.content) {
                        contents.push(ty.content.clone());
                    }
                }
            }
            None => unresolved.push(Unresolved {
                key: ty.key.clone(),
                description: format!(
                    "norm {} with content delta*({}): admissible for {} unit(s), no witness within budget",
                    format_rational(&ty.norm),
                    ty.content,
                    ty.units.len()
                ),
            }),
        }
    }
    if !unresolved.is_empty() {
        notes.push(format!(
            "{} admissible type(s) without witness; report may be incomplete",
            unresolved.len()
        ));
    }
    Ok(BranchReport {
        lattice: l.name.clone(),
        family: Family::Unitary { n: n - 1, d },
        group: None,
        classes: by_key.into_values().collect(),
        exhaustive: unresolved.is_empty(),
        unresolved,
        all_special_even: content_special_even(&f, &scale),
        candidates_examined: examined,
        notes,
    })
}

fn herm_witness_ok(l: &HermLattice, r: &[FieldElem], ty: &HermType) -> bool {
    l.field.nontrivial_units().all(|xi| {
        let want = ty.units.contains(xi);
        l.tau_in_unitary_group(r, xi).map_or(false, |ok| ok == want)
    }) && l
        .herm_special_even(r)
        .map_or(false, |se| se == ty.key.special_even)
}

/// Independent check of a unitary class witness: norm, primitivity,
/// special-even flag, and that the admissible units generate a group of
/// the stated degree.
pub fn verify_herm_class(l: &HermLattice, c: &BranchClass) -> bool {
    let Some(Witness::Herm(r)) = &c.witness else {
        return false;
    };
    if l.norm(r) != c.key.norm || !l.is_primitive(r) {
        return false;
    }
    if l.herm_special_even(r).ok() != Some(c.key.special_even) {
        return false;
    }
    let adm: Vec<FieldElem> = l
        .field
        .nontrivial_units()
        .filter(|xi| l.tau_in_unitary_group(r, xi).unwrap_or(false))
        .cloned()
        .collect();
    !adm.is_empty() && l.field.generated_subgroup_order(&adm) == c.degree
}

pub fn verify_report_witnesses_orth(l: &QuadLattice, rep: &BranchReport) -> bool {
    let g = rep.group.unwrap_or(GroupChoice::FullPlus);
    rep.classes.iter().all(|c| verify_orth_class(l, g, c))
}

pub fn verify_report_witnesses_herm(l: &HermLattice, rep: &BranchReport) -> bool {
    rep.classes.iter().all(|c| verify_herm_class(l, c))
}
