//! Cusps given by isotropic subspaces: quotient lattices E^⊥/E, incidence
//! with branch classes, and naked cusps (those in no branch closure).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::latalg::{
    definiteness, enumerate_norm_vectors, integer_kernel, lll_default, saturation_and_complement,
    snf, EnumBudget, IntMatrix, RatMatrix,
};
use crate::qlat::{GroupChoice, QuadLattice};
use crate::ramify::{
    small_vector_search, BranchClass, BranchReport, ClassDetail, ClassKey, SearchBudget,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropicSubspace {
    pub lattice: String,
    pub basis: Vec<Vec<BigInt>>,
    pub label: String,
}

impl IsotropicSubspace {
    /// Checks dimension, isotropy and saturation against `l`.
    pub fn new(l: &QuadLattice, basis: Vec<Vec<BigInt>>, label: impl Into<String>) -> Result<Self> {
        if basis.is_empty() || basis.len() > 2 {
            return Err(Error::Dimension(format!(
                "isotropic subspace needs 1 or 2 basis vectors, got {}",
                basis.len()
            )));
        }
        for v in &basis {
            if v.len() != l.rank() {
                return Err(Error::Dimension(format!(
                    "basis vector of length {} in a rank {} lattice",
                    v.len(),
                    l.rank()
                )));
            }
        }
        for a in &basis {
            for b in &basis {
                if !l.pair(a, b).is_zero() {
                    return Err(Error::NotIsotropic);
                }
            }
        }
        let m = IntMatrix::from_rows(basis.clone())?;
        let d = snf(&m).diagonal();
        if d.len() != basis.len() || d.iter().any(|x| !x.is_one()) {
            return Err(Error::NotSaturated);
        }
        Ok(IsotropicSubspace {
            lattice: l.name.clone(),
            basis,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// E^⊥/E together with the data needed to move between it and Λ.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub lattice: QuadLattice,
    /// Rows: lifts to Λ of the quotient basis.
    pub lifts: IntMatrix,
    /// Rows: basis of E.
    pub e_basis: IntMatrix,
}

impl Quotient {
    /// Coordinates of the image of x ∈ E^⊥ ∩ Λ in the quotient basis.
    pub fn project(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut rows = self.lifts.to_rows();
        rows.extend(self.e_basis.to_rows());
        let m = IntMatrix::from_rows(rows).ok()?.to_rational();
        // x = y M, solved through y = x Mᵀ (M Mᵀ)⁻¹
        let mt = m.transpose();
        let inv = m.mul(&mt).inverse()?;
        let xr = RatMatrix::from_rows(vec![x
            .iter()
            .map(|a| Rational::from_integer(a.clone()))
            .collect()])
        .ok()?;
        let y = xr.mul(&mt).mul(&inv);
        if y.mul(&m) != xr {
            return None;
        }
        let q = self.lifts.rows();
        (0..q)
            .map(|i| y.get(0, i).is_integer().then(|| y.get(0, i).to_integer()))
            .collect::<Option<Vec<_>>>()
            .filter(|_| (q..y.cols()).all(|i| y.get(0, i).is_integer()))
    }

    /// Lift of a quotient vector to Λ (the representative with zero E part).
    pub fn lift(&self, q: &[BigInt]) -> Vec<BigInt> {
        let n = self.lifts.cols();
        (0..n)
            .map(|j| {
                q.iter()
                    .enumerate()
                    .fold(BigInt::zero(), |a, (i, c)| a + c * self.lifts.get(i, j))
            })
            .collect()
    }
}

fn check_cusp(l: &QuadLattice, e: &IsotropicSubspace) -> Result<()> {
    if e.lattice != l.name {
        return Err(Error::AmbientMismatch(format!(
            "cusp {} is on {}, not {}",
            e.label, e.lattice, l.name
        )));
    }
    // re-validate: the caller may have built the struct by hand
    IsotropicSubspace::new(l, e.basis.clone(), e.label.clone()).map(|_| ())
}

/// (E^⊥ ∩ Λ)/E with a reduced basis when the quotient is definite.
pub fn quotient(l: &QuadLattice, e: &IsotropicSubspace) -> Result<Quotient> {
    check_cusp(l, e)?;
    let eb = IntMatrix::from_rows(e.basis.clone())?;
    let perp = integer_kernel(&eb.mul(&l.gram));
    let gk = l.gram.congruent(&perp);
    // radical of the form on E^⊥ is E itself
    let rad = integer_kernel(&gk);
    let (_, comp) = saturation_and_complement(&rad);
    let mut lifts = comp.mul(&perp);
    let mut g = l.gram.congruent(&lifts);
    if let Some(s) = definiteness(&g) {
        let pos = if s > 0 { g.clone() } else { g.map(|x| -x) };
        let t = lll_default(&pos)?;
        lifts = t.mul(&lifts);
        g = l.gram.congruent(&lifts);
    }
    Ok(Quotient {
        lattice: QuadLattice::new(format!("{}/{}", l.name, e.label), g)?,
        lifts,
        e_basis: eb,
    })
}

pub fn quotient_lattice(l: &QuadLattice, e: &IsotropicSubspace) -> Result<QuadLattice> {
    Ok(quotient(l, e)?.lattice)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub key: ClassKey,
    pub contained: bool,
    pub witness: Option<Vec<BigInt>>,
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspRow {
    pub cusp: String,
    pub quotient_rank: usize,
    pub quotient_definite: bool,
    pub incidences: Vec<Incidence>,
    pub naked: bool,
    /// Some class was neither found nor excluded.
    pub inconclusive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspReport {
    pub lattice: String,
    pub rows: Vec<CuspRow>,
    pub naked_count: usize,
}

fn class_div_ok(c: &BranchClass, div: &BigInt) -> bool {
    match &c.detail {
        ClassDetail::Orth { divs } => divs.contains(div),
        ClassDetail::Herm { .. } => false,
    }
}

/// Re-checks a containment witness in Λ: right norm, orthogonal to E,
/// primitive, admissible div, reflection in the group.
pub fn verify_cusp_witness(
    l: &QuadLattice,
    e: &IsotropicSubspace,
    c: &BranchClass,
    g: GroupChoice,
    w: &[BigInt],
) -> bool {
    if w.len() != l.rank() || w.iter().all(Zero::is_zero) {
        return false;
    }
    let prim = w.iter().fold(BigInt::zero(), |a, x| a.gcd(x)).is_one();
    let orth = e.basis.iter().all(|b| l.pair(b, w).is_zero());
    let norm_ok = Rational::from_integer(l.norm(w)) == c.key.norm;
    let div_ok = l.div(w).map_or(false, |d| {
        class_div_ok(c, &d) && d.is_even() == c.key.special_even
    });
    prim && orth && norm_ok && div_ok && l.reflection_in_group(w, g).unwrap_or(false)
}

/// Lift radius for the E-part of a candidate.
const LIFT_RADIUS: i64 = 2;

/// For each branch class, whether E lies in the closure of one of its
/// hyperplanes: some class vector orthogonal to E.
pub fn cusp_branch_incidence(
    l: &QuadLattice,
    e: &IsotropicSubspace,
    branch: &BranchReport,
    budget: &EnumBudget,
) -> Result<CuspRow> {
    if branch.lattice != l.name {
        return Err(Error::AmbientMismatch(format!(
            "branch report is for {}, cusp lattice is {}",
            branch.lattice, l.name
        )));
    }
    let g = branch.group.ok_or_else(|| {
        Error::AmbientMismatch("cusp analysis needs an orthogonal branch report".into())
    })?;
    let q = quotient(l, e)?;
    let qg = &q.lattice.gram;
    let definite = definiteness(qg).is_some();
    // lifts only matter modulo div, which divides the discriminant exponent
    let lift_box_complete = l.disc_exponent() <= BigInt::from(2 * LIFT_RADIUS + 1);

    let mut incidences = Vec::new();
    for c in &branch.classes {
        let target = c.key.norm.to_integer();
        let mut found: Option<Vec<BigInt>> = None;
        let try_lifts = |qv: &[BigInt], found: &mut Option<Vec<BigInt>>| {
            let base = q.lift(qv);
            for_each_offset(e.dim(), LIFT_RADIUS, &mut |off| {
                let mut w = base.clone();
                for (k, &o) in off.iter().enumerate() {
                    for (wj, bj) in w.iter_mut().zip(&e.basis[k]) {
                        *wj += bj * BigInt::from(o);
                    }
                }
                if verify_cusp_witness(l, e, c, g, &w) {
                    *found = Some(w);
                    false
                } else {
                    true
                }
            });
        };
        let exhaustive;
        if definite && qg.rows() > 0 && target.is_negative() == (definiteness(qg) == Some(-1)) {
            let en = enumerate_norm_vectors(qg, &target, budget, false)?;
            for v in &en.vectors {
                try_lifts(v, &mut found);
                if found.is_some() {
                    break;
                }
            }
            exhaustive =
                found.is_some() || (en.exhaustive && (en.vectors.is_empty() || lift_box_complete));
        } else if definite {
            // norm of the wrong sign for this quotient
            exhaustive = true;
        } else {
            let g64: Vec<Vec<i64>> = qg
                .to_rows()
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|x| i64::try_from(x).unwrap_or(i64::MAX))
                        .collect()
                })
                .collect();
            small_vector_search(qg.rows(), &SearchBudget::default(), &mut |v| {
                let mut n: i128 = 0;
                for i in 0..v.len() {
                    for j in 0..v.len() {
                        n += v[i] as i128 * v[j] as i128 * g64[i][j] as i128;
                    }
                }
                if BigInt::from(n) != target {
                    return true;
                }
                let qv: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
                try_lifts(&qv, &mut found);
                found.is_none()
            });
            exhaustive = found.is_some();
        }
        incidences.push(Incidence {
            key: c.key.clone(),
            contained: found.is_some(),
            witness: found,
            exhaustive,
        });
    }
    let inconclusive = incidences.iter().any(|i| !i.contained && !i.exhaustive);
    let naked = !inconclusive && incidences.iter().all(|i| !i.contained);
    Ok(CuspRow {
        cusp: e.label.clone(),
        quotient_rank: qg.rows(),
        quotient_definite: definite,
        incidences,
        naked,
        inconclusive,
    })
}

fn for_each_offset(dim: usize, r: i64, f: &mut dyn FnMut(&[i64]) -> bool) {
    let mut off = vec![-r; dim];
    // zero offset first: the plain lift is the likeliest witness
    if !f(&vec![0; dim]) {
        return;
    }
    loop {
        if off.iter().any(|&x| x != 0) && !f(&off) {
            return;
        }
        let mut i = 0;
        loop {
            if i == dim {
                return;
            }
            off[i] += 1;
            if off[i] > r {
                off[i] = -r;
                i += 1;
            } else {
                break;
            }
        }
    }
}

pub fn naked_report(
    l: &QuadLattice,
    cusps: &[IsotropicSubspace],
    branch: &BranchReport,
    budget: &EnumBudget,
) -> Result<CuspReport> {
    let rows = cusps
        .iter()
        .map(|e| cusp_branch_incidence(l, e, branch, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(CuspReport {
        lattice: l.name.clone(),
        naked_count: rows.iter().filter(|r| r.naked).count(),
        rows,
    })
}

// -- standard cusps ------------------------------------------------------

fn unit_vec(n: usize, i: usize) -> Vec<BigInt> {
    (0..n).map(|j| BigInt::from((i == j) as i64)).collect()
}

/// span(e₁, e₂) for a lattice starting with U ⊕ U (or U ⊕ U(k)).
pub fn standard_plane(l: &QuadLattice, label: &str) -> Result<IsotropicSubspace> {
    IsotropicSubspace::new(l, vec![unit_vec(l.rank(), 0), unit_vec(l.rank(), 2)], label)
}

/// In U ⊕ U ⊕ E8(−1)³: span(e₁, 30e₂ + 31f₂ + ρ) with ρ the Weyl vector in
/// each block. The quotient is the Leech lattice.
pub fn leech_plane_e8_cubed(l: &QuadLattice) -> Result<IsotropicSubspace> {
    let n = l.rank();
    let rho = crate::qlat::e8_weyl_vector();
    let mut v = vec![BigInt::zero(); n];
    v[2] = BigInt::from(30);
    v[3] = BigInt::from(31);
    for b in 0..3 {
        for (k, x) in rho.iter().enumerate() {
            v[4 + 8 * b + k] = x.clone();
        }
    }
    IsotropicSubspace::new(l, vec![unit_vec(n, 0), v], "leech")
}

/// The two 1-dimensional-boundary cusps of the Enriques lattice
/// U ⊕ U(2) ⊕ E8(−2): span(e, e′) and span(e′, 2e + 2f + α) with α a norm
/// −8 vector of E8(−2).
pub fn sterk_planes(l: &QuadLattice) -> Result<[IsotropicSubspace; 2]> {
    let n = l.rank();
    let p1 = IsotropicSubspace::new(l, vec![unit_vec(n, 0), unit_vec(n, 2)], "sterk1")?;
    let mut v = vec![BigInt::zero(); n];
    v[0] = BigInt::from(2);
    v[1] = BigInt::from(2);
    // two orthogonal simple roots: norm 2·(−4) = −8
    v[4] = BigInt::one();
    v[5] = BigInt::one();
    let p2 = IsotropicSubspace::new(l, vec![unit_vec(n, 2), v], "sterk2")?;
    Ok([p1, p2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::int;
    use crate::qlat::*;
    use crate::ramify::{orth_branch_report, SearchBudget};

    fn count(g: &IntMatrix, t: i64) -> usize {
        enumerate_norm_vectors(g, &BigInt::from(t), &EnumBudget::default(), false)
            .unwrap()
            .require_exhaustive()
            .unwrap()
            .len()
    }

    #[test]
    fn isotropy_and_saturation() {
        let l = u_u_e8();
        let n = l.rank();
        assert!(matches!(
            IsotropicSubspace::new(&l, vec![unit_vec(n, 0), unit_vec(n, 1)], "x"),
            Err(Error::NotIsotropic)
        ));
        let two: Vec<BigInt> = unit_vec(n, 0).iter().map(|x| x * 2).collect();
        assert!(matches!(
            IsotropicSubspace::new(&l, vec![two, unit_vec(n, 2)], "x"),
            Err(Error::NotSaturated)
        ));
    }

    #[test]
    fn e8_quotient() {
        let l = u_u_e8();
        let q = quotient_lattice(&l, &standard_plane(&l, "std").unwrap()).unwrap();
        assert_eq!(q.rank(), 8);
        assert_eq!(q.determinant(), BigInt::one());
        assert_eq!(count(&q.gram, -2), 240);
    }

    #[test]
    fn enriques_cusps() {
        let l = lambda_enr();
        let b =
            orth_branch_report(&l, GroupChoice::FullPlus, None, &SearchBudget::default()).unwrap();
        let [p1, p2] = sterk_planes(&l).unwrap();
        let q = quotient_lattice(&l, &p1).unwrap();
        assert_eq!(q.invariants().unwrap(), e8(-2).invariants().unwrap());
        assert_eq!(count(&q.gram, -4), 240);
        assert_eq!(count(&q.gram, -2), 0);

        let rep = naked_report(&l, &[p1.clone(), p2.clone()], &b, &EnumBudget::default()).unwrap();
        assert_eq!(rep.naked_count, 0);
        let r1 = &rep.rows[0];
        let h2 = r1
            .incidences
            .iter()
            .find(|i| i.key == ClassKey::new(int(-2), false))
            .unwrap();
        let h4 = r1
            .incidences
            .iter()
            .find(|i| i.key == ClassKey::new(int(-4), true))
            .unwrap();
        assert!(!h2.contained && h2.exhaustive);
        assert!(h4.contained);
        let r2 = &rep.rows[1];
        assert!(r2
            .incidences
            .iter()
            .any(|i| i.key == ClassKey::new(int(-2), false) && i.contained));

        // e − f
        let mut w = vec![BigInt::zero(); l.rank()];
        w[0] = BigInt::one();
        w[1] = -BigInt::one();
        let c = b.class(&ClassKey::new(int(-2), false)).unwrap();
        assert!(verify_cusp_witness(&l, &p2, c, GroupChoice::FullPlus, &w));
        assert!(!verify_cusp_witness(&l, &p1, c, GroupChoice::FullPlus, &w));
    }

    #[test]
    fn projection_roundtrip() {
        let l = lambda_enr();
        let [_, p2] = sterk_planes(&l).unwrap();
        let q = quotient(&l, &p2).unwrap();
        for i in 0..q.lattice.rank() {
            let mut qv = vec![BigInt::zero(); q.lattice.rank()];
            qv[i] = BigInt::from(3);
            let mut x = q.lift(&qv);
            for (xj, ej) in x.iter_mut().zip(&p2.basis[1]) {
                *xj += ej * BigInt::from(-2);
            }
            assert_eq!(q.project(&x).unwrap(), qv);
            assert_eq!(l.norm(&x), q.lattice.norm(&qv));
        }
    }

    #[test]
    fn leech_cusps() {
        let l = ii_2_26();
        let b =
            orth_branch_report(&l, GroupChoice::FullPlus, None, &SearchBudget::default()).unwrap();
        let leech = leech_plane_e8_cubed(&l).unwrap();
        let std = standard_plane(&l, "e8cubed").unwrap();
        let rep = naked_report(&l, &[leech, std], &b, &EnumBudget::default()).unwrap();
        assert_eq!(rep.naked_count, 1);
        assert!(rep.rows[0].naked && !rep.rows[1].naked);
        assert_eq!(rep.rows[0].quotient_rank, 24);

        let ll = ii_2_26_leech();
        let q = quotient_lattice(&ll, &standard_plane(&ll, "leech").unwrap()).unwrap();
        assert_eq!(count(&q.gram, -2), 0);
    }
}
