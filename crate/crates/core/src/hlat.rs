//! Hermitian lattices over the ring of integers of an imaginary quadratic
//! field. The form is linear in the first slot: ⟨x, y⟩ = xᵀ H ȳ.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{FieldElem, ImagQuadField, Rational};
use crate::latalg::{IntMatrix, Matrix};
use crate::qlat::QuadLattice;

pub type FieldMatrix = Matrix<FieldElem>;
pub type HermVector = Vec<FieldElem>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermLattice {
    pub name: String,
    pub field: ImagQuadField,
    pub gram: FieldMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermInvariants {
    pub signature: (usize, usize),
    pub is_unimodular: bool,
    pub is_even: bool,
}

/// Outcome of the ramification pullback check for one (ℓ, r, ξ).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PullbackCheck {
    /// (1−ξ)⟨ℓ,r⟩/⟨r,r⟩ ∈ O_F
    pub herm_ok: bool,
    /// 2(ℓ,r)/(r,r) ∈ Z in the trace form
    pub quad_ok: bool,
    /// quad_ok for some unit multiple u·r (the orbit form used for d = −3)
    pub quad_ok_orbit: bool,
}

impl PullbackCheck {
    /// Whether the pullback implication holds for this sample in field `d`.
    pub fn implication_holds(&self, d: i64) -> bool {
        if !self.herm_ok {
            return true;
        }
        match d {
            -3 => self.quad_ok_orbit,
            _ if d.rem_euclid(4) != 1 => self.quad_ok,
            _ => true,
        }
    }
}

fn pair_raw(gram: &FieldMatrix, v: &[FieldElem], w: &[FieldElem]) -> FieldElem {
    let d = gram.get(0, 0).d();
    let mut acc = FieldElem::zero(d);
    for (i, vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        for (j, wj) in w.iter().enumerate() {
            if wj.is_zero() {
                continue;
            }
            acc = &acc + &(&(vi * gram.get(i, j)) * &wj.conj());
        }
    }
    acc
}

impl HermLattice {
    /// Validates conjugate symmetry and δO_F-valuedness.
    pub fn new(name: impl Into<String>, field: ImagQuadField, gram: FieldMatrix) -> Result<Self> {
        let lat = Self::new_unchecked(name, field, gram)?;
        let n = lat.rank();
        for i in 0..n {
            for j in 0..n {
                let x = lat.gram.get(i, j);
                let y = x.div(lat.field.delta()).unwrap();
                if !y.is_integer() {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i},{j}) = {x} of `{}` is not in δO_F",
                        lat.name
                    )));
                }
            }
        }
        Ok(lat)
    }

    /// Only checks shape, field and conjugate symmetry; used for duals and
    /// rescaled forms that need not be δO_F-valued.
    pub fn new_unchecked(
        name: impl Into<String>,
        field: ImagQuadField,
        gram: FieldMatrix,
    ) -> Result<Self> {
        let name = name.into();
        if !gram.is_square() || gram.rows() == 0 {
            return Err(Error::Dimension(format!(
                "Gram of `{name}` must be square and nonempty"
            )));
        }
        let n = gram.rows();
        for i in 0..n {
            for j in 0..n {
                let x = gram.get(i, j);
                if x.d() != field.d() {
                    return Err(Error::FieldMismatch(x.d(), field.d()));
                }
                if *gram.get(j, i) != x.conj() {
                    return Err(Error::InvalidArgument(format!(
                        "Gram of `{name}` is not Hermitian at ({i},{j})"
                    )));
                }
            }
        }
        Ok(HermLattice { name, field, gram })
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn d(&self) -> i64 {
        self.field.d()
    }

    pub fn pair(&self, v: &[FieldElem], w: &[FieldElem]) -> FieldElem {
        pair_raw(&self.gram, v, w)
    }

    /// ⟨v, v⟩ as a rational.
    pub fn norm(&self, v: &[FieldElem]) -> Rational {
        self.pair(v, v).re().clone()
    }

    pub fn basis_vector(&self, i: usize) -> HermVector {
        (0..self.rank())
            .map(|k| {
                if k == i {
                    self.field.one()
                } else {
                    self.field.zero()
                }
            })
            .collect()
    }

    fn check_vec(&self, v: &[FieldElem]) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::Dimension(format!(
                "vector of length {} in rank-{} lattice `{}`",
                v.len(),
                self.rank(),
                self.name
            )));
        }
        if let Some(x) = v.iter().find(|x| x.d() != self.d()) {
            return Err(Error::FieldMismatch(x.d(), self.d()));
        }
        Ok(())
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(name: impl Into<String>, parts: &[&HermLattice]) -> Result<HermLattice> {
        let field = parts[0].field.clone();
        let mut gram: Option<FieldMatrix> = None;
        for p in parts {
            if p.d() != field.d() {
                return Err(Error::FieldMismatch(p.d(), field.d()));
            }
            gram = Some(match gram {
                None => p.gram.clone(),
                Some(g) => g.direct_sum(&p.gram, &field.zero()),
            });
        }
        HermLattice::new(name, field, gram.expect("at least one summand"))
    }

    /// Λ(a): the form multiplied by a rational scalar.
    pub fn scaled(&self, a: &Rational, name: impl Into<String>) -> Result<HermLattice> {
        HermLattice::new(name, self.field.clone(), self.gram.map(|x| x.scale(a)))
    }

    // -- dual, invariants, trace form ------------------------------------

    /// Rows form an O_F-basis of Λ^∨ in Λ-coordinates: δ(Hᵀ)⁻¹ read by
    /// columns.
    pub fn dual(&self) -> Result<FieldMatrix> {
        let inv = self
            .gram
            .transpose()
            .inverse()
            .ok_or(Error::DegenerateForm)?;
        let delta = self.field.delta().clone();
        Ok(inv.transpose().map(|x| x * &delta))
    }

    /// Λ^∨ as a Hermitian lattice in its own basis.
    pub fn dual_lattice(&self) -> Result<HermLattice> {
        let b = self.dual()?;
        let n = self.rank();
        let g = Matrix::from_fn(n, n, |i, j| self.pair(b.row(i), b.row(j)));
        HermLattice::new_unchecked(format!("{}^dual", self.name), self.field.clone(), g)
    }

    pub fn is_unimodular(&self) -> Result<bool> {
        Ok(self.dual()?.entries().iter().all(FieldElem::is_integer))
    }

    /// (positive, negative) inertia of the Hermitian form by congruence
    /// diagonalization over F.
    pub fn signature(&self) -> Result<(usize, usize)> {
        let n = self.rank();
        let mut a = self.gram.clone();
        let mut active: Vec<usize> = (0..n).collect();
        let (mut pos, mut neg) = (0, 0);
        while !active.is_empty() {
            let p = match active.iter().copied().find(|&i| !a.get(i, i).is_zero()) {
                Some(p) => p,
                None => {
                    let pair = active.iter().find_map(|&i| {
                        active
                            .iter()
                            .find(|&&j| j != i && !a.get(i, j).is_zero())
                            .map(|&j| (i, j))
                    });
                    let Some((i, j)) = pair else {
                        return Err(Error::DegenerateForm);
                    };
                    // e_i <- e_i + c e_j with c = a_ij makes the diagonal 2|a_ij|²
                    let c = a.get(i, j).clone();
                    for &k in &active {
                        let x = a.get(i, k) + &(&c * a.get(j, k));
                        a.set(i, k, x);
                    }
                    let cb = c.conj();
                    for &k in &active {
                        let x = a.get(k, i) + &(&cb * a.get(k, j));
                        a.set(k, i, x);
                    }
                    i
                }
            };
            let piv = a.get(p, p).re().clone();
            if piv.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            active.retain(|&i| i != p);
            let inv = Rational::one() / &piv;
            for &i in &active {
                if a.get(i, p).is_zero() {
                    continue;
                }
                let f = a.get(i, p).scale(&inv);
                for &j in &active {
                    let x = a.get(i, j) - &(&f * a.get(p, j));
                    a.set(i, j, x);
                }
            }
        }
        Ok((pos, neg))
    }

    pub fn invariants(&self) -> Result<HermInvariants> {
        let signature = self.signature()?;
        Ok(HermInvariants {
            signature,
            is_unimodular: self.is_unimodular()?,
            is_even: self.trace_form()?.is_even(),
        })
    }

    /// The Z-basis (e₁, ωe₁, e₂, ωe₂, …) used for trace forms.
    fn z_basis_scalars(&self) -> [FieldElem; 2] {
        [self.field.one(), self.field.omega()]
    }

    /// (x, y) = Tr⟨x, y⟩ on the Z-basis (e₁, ωe₁, …).
    pub fn trace_form(&self) -> Result<QuadLattice> {
        let n = self.rank();
        let s = self.z_basis_scalars();
        let mut g = IntMatrix::zeros(2 * n, 2 * n);
        for i in 0..2 * n {
            for j in 0..2 * n {
                let x = &(&s[i % 2] * &s[j % 2].conj()) * self.gram.get(i / 2, j / 2);
                let t = x.trace();
                if !t.is_integer() {
                    return Err(Error::NonIntegralTraceForm(i, j));
                }
                g.set(i, j, t.to_integer());
            }
        }
        QuadLattice::new(format!("{}_Q", self.name), g)
    }

    /// O_F coordinates -> Z coordinates on (e₁, ωe₁, …). Integral input only.
    pub fn to_z_coords(&self, v: &[FieldElem]) -> Result<Vec<BigInt>> {
        self.check_vec(v)?;
        let mut out = Vec::with_capacity(2 * v.len());
        for x in v {
            let (m, n) = x.omega_coords();
            if !m.is_integer() || !n.is_integer() {
                return Err(Error::InvalidArgument(format!("{x} is not in O_F")));
            }
            out.push(m.to_integer());
            out.push(n.to_integer());
        }
        Ok(out)
    }

    pub fn from_z_coords(&self, z: &[BigInt]) -> Result<HermVector> {
        if z.len() != 2 * self.rank() {
            return Err(Error::Dimension(format!(
                "expected {} integer coordinates, got {}",
                2 * self.rank(),
                z.len()
            )));
        }
        Ok(z.chunks(2)
            .map(|c| {
                FieldElem::from_omega_coords(
                    self.d(),
                    Rational::from_integer(c[0].clone()),
                    Rational::from_integer(c[1].clone()),
                )
            })
            .collect())
    }

    // -- quasi-reflections -----------------------------------------------

    fn check_unit(&self, xi: &FieldElem) -> Result<()> {
        if xi.d() != self.d() {
            return Err(Error::FieldMismatch(xi.d(), self.d()));
        }
        if !self.field.is_unit(xi) || xi.is_one() {
            return Err(Error::NotUnit(xi.to_string()));
        }
        Ok(())
    }

    /// Matrix of τ_{r,ξ}(ℓ) = ℓ − (1−ξ)⟨ℓ,r⟩/⟨r,r⟩·r on coordinate columns.
    pub fn quasi_reflection(&self, r: &[FieldElem], xi: &FieldElem) -> Result<FieldMatrix> {
        self.check_vec(r)?;
        self.check_unit(xi)?;
        let rr = self.norm(r);
        if rr.is_zero() {
            return Err(if r.iter().all(FieldElem::is_zero) {
                Error::ZeroVector
            } else {
                Error::IsotropicVector
            });
        }
        let one_minus = &self.field.one() - xi;
        let f = one_minus.scale(&rr.recip());
        let n = self.rank();
        // ⟨e_j, r⟩ = (H r̄)_j
        let hr: Vec<FieldElem> = (0..n)
            .map(|j| self.pair(&self.basis_vector(j), r))
            .collect();
        Ok(Matrix::from_fn(n, n, |i, j| {
            let id = if i == j {
                self.field.one()
            } else {
                self.field.zero()
            };
            &id - &(&f * &(&r[i] * &hr[j]))
        }))
    }

    /// O_F-gcd of the coordinates is a unit.
    pub fn is_primitive(&self, r: &[FieldElem]) -> bool {
        let g = self.field.gcd_all(r.iter());
        !g.is_zero() && self.field.is_unit(&g)
    }

    /// τ_{r,ξ} ∈ U(Λ): both (1−ξ)c_j and (1−ξ̄)c_j are integral for
    /// c_j = ⟨e_j, r⟩/⟨r,r⟩.
    pub fn tau_in_unitary_group(&self, r: &[FieldElem], xi: &FieldElem) -> Result<bool> {
        self.check_vec(r)?;
        self.check_unit(xi)?;
        let rr = self.norm(r);
        if rr.is_zero() {
            return Err(Error::IsotropicVector);
        }
        if rr.is_positive() {
            return Err(Error::NonNegativeNorm(rr.to_string()));
        }
        if !self.is_primitive(r) {
            return Err(Error::NotPrimitive);
        }
        let a = &self.field.one() - xi;
        let b = &self.field.one() - &xi.conj();
        let inv = rr.recip();
        Ok((0..self.rank()).all(|j| {
            let c = self.pair(&self.basis_vector(j), r).scale(&inv);
            (&a * &c).is_integer() && (&b * &c).is_integer()
        }))
    }

    /// Normalized generator of the ideal {⟨v, w⟩ : w ∈ Λ}.
    pub fn ideal_content(&self, v: &[FieldElem]) -> Result<FieldElem> {
        self.check_vec(v)?;
        if v.iter().all(FieldElem::is_zero) {
            return Err(Error::ZeroVector);
        }
        let row: Vec<FieldElem> = (0..self.rank())
            .map(|j| self.pair(v, &self.basis_vector(j)))
            .collect();
        Ok(self.field.gcd_all(row.iter()))
    }

    /// Re⟨r, v⟩ ∈ Z for every v ∈ Λ; tested on the Z-basis e_j, ωe_j.
    pub fn herm_special_even(&self, r: &[FieldElem]) -> Result<bool> {
        self.check_vec(r)?;
        if r.iter().all(FieldElem::is_zero) {
            return Err(Error::ZeroVector);
        }
        let w = self.field.omega();
        Ok((0..self.rank()).all(|j| {
            let x = self.pair(r, &self.basis_vector(j));
            x.re().is_integer() && (&x * &w.conj()).re().is_integer()
        }))
    }

    /// Checks the pullback implication on one sample. The quadratic side is
    /// evaluated in the trace form on Z coordinates, independently of the
    /// Hermitian side.
    pub fn pullback_check(
        &self,
        l: &[FieldElem],
        r: &[FieldElem],
        xi: &FieldElem,
    ) -> Result<PullbackCheck> {
        self.check_vec(l)?;
        self.check_unit(xi)?;
        let rr = self.norm(r);
        if rr.is_zero() {
            return Err(Error::IsotropicVector);
        }
        let lr = self.pair(l, r);
        let herm_ok = (&(&self.field.one() - xi) * &lr.scale(&rr.recip())).is_integer();

        let q = self.trace_form()?;
        let lz = self.to_z_coords(l)?;
        let quad_for = |v: &[FieldElem]| -> Result<bool> {
            let vz = self.to_z_coords(v)?;
            let num = BigInt::from(2) * q.pair(&lz, &vz);
            Ok(num.is_multiple_of(&q.norm(&vz)))
        };
        let quad_ok = quad_for(r)?;
        let mut quad_ok_orbit = false;
        for u in self.field.units() {
            let ur: Vec<FieldElem> = r.iter().map(|x| u * x).collect();
            if quad_for(&ur)? {
                quad_ok_orbit = true;
                break;
            }
        }
        Ok(PullbackCheck {
            herm_ok,
            quad_ok,
            quad_ok_orbit,
        })
    }
}

/// Matrix power by repeated multiplication.
pub fn matrix_pow(m: &FieldMatrix, e: usize) -> FieldMatrix {
    let sample = m.get(0, 0).clone();
    (0..e).fold(Matrix::identity_like(m.rows(), &sample), |acc, _| {
        acc.mul(m)
    })
}

/// Conjugate transpose.
pub fn adjoint(m: &FieldMatrix) -> FieldMatrix {
    m.transpose().map(FieldElem::conj)
}

/// Tᵀ H T̄ = H: the form is preserved by T acting on columns.
pub fn preserves_form(h: &FieldMatrix, t: &FieldMatrix) -> bool {
    t.transpose().mul(h).mul(&t.map(FieldElem::conj)) == *h
}

/// Every entry lies in O_F.
pub fn is_integral_matrix(m: &FieldMatrix) -> bool {
    m.entries().iter().all(FieldElem::is_integer)
}

/// Inverse of a matrix over F.
pub fn invert(m: &FieldMatrix) -> Option<FieldMatrix> {
    m.inverse()
}

/// Whether the rows of `b` generate the same O_F-module as the rows of `c`
/// (both square, nonsingular): b c⁻¹ ∈ GL_n(O_F).
pub fn same_module(b: &FieldMatrix, c: &FieldMatrix) -> bool {
    let Some(ci) = c.inverse() else { return false };
    let Some(bi) = b.inverse() else { return false };
    is_integral_matrix(&b.mul(&ci)) && is_integral_matrix(&c.mul(&bi))
}

// ---------------------------------------------------------------------------
// Explicit Gram pieces

fn fe(d: i64, a: (i64, i64), b: (i64, i64)) -> FieldElem {
    FieldElem::new(
        d,
        Rational::new(a.0.into(), a.1.into()),
        Rational::new(b.0.into(), b.1.into()),
    )
}

fn herm(name: &str, d: i64, entries: Vec<Vec<FieldElem>>) -> HermLattice {
    let field = ImagQuadField::new(d).expect("supported field");
    let gram = Matrix::from_rows(entries).expect("square");
    HermLattice::new(name, field, gram).expect("explicit Gram pieces are valid")
}

/// (1/(2√−1))·[[0,1],[−1,0]] over Q(√−1).
pub fn lambda_uu_d1() -> HermLattice {
    let d = -1;
    let z = FieldElem::zero(d);
    let c = fe(d, (0, 1), (-1, 2)); // 1/(2i) = −i/2
    herm(
        "Lambda_UU_d-1",
        d,
        vec![vec![z.clone(), c.clone()], vec![-&c, z]],
    )
}

/// ½·[[0,1+√−1],[1−√−1,0]] over Q(√−1).
pub fn lambda_uu2_d1() -> HermLattice {
    let d = -1;
    let z = FieldElem::zero(d);
    let c = fe(d, (1, 2), (1, 2));
    herm(
        "Lambda_UU2_d-1",
        d,
        vec![vec![z.clone(), c.clone()], vec![c.conj(), z]],
    )
}

/// Iyanaga's matrix: −½·[[2,−i,−i,1],[i,2,1,i],[i,1,2,1],[1,−i,1,2]].
pub fn lambda_e8_d1() -> HermLattice {
    let d = -1;
    let raw = [
        [(2, 0), (0, -1), (0, -1), (1, 0)],
        [(0, 1), (2, 0), (1, 0), (0, 1)],
        [(0, 1), (1, 0), (2, 0), (1, 0)],
        [(1, 0), (0, -1), (1, 0), (2, 0)],
    ];
    let rows = raw
        .iter()
        .map(|r| r.iter().map(|&(a, b)| fe(d, (-a, 2), (-b, 2))).collect())
        .collect();
    herm("Lambda_E8_d-1", d, rows)
}

/// (1/(2√−2))·[[0,1],[−1,0]] over Q(√−2).
pub fn lambda_uu_d2() -> HermLattice {
    let d = -2;
    let z = FieldElem::zero(d);
    let c = fe(d, (0, 1), (-1, 4)); // 1/(2√−2) = −√−2/4
    herm(
        "Lambda'_UU_d-2",
        d,
        vec![vec![z.clone(), c.clone()], vec![-&c, z]],
    )
}

/// [[0,½],[½,0]] over Q(√−2).
pub fn lambda_uu2_d2() -> HermLattice {
    let d = -2;
    let z = FieldElem::zero(d);
    let h = fe(d, (1, 2), (0, 1));
    herm(
        "Lambda'_UU2_d-2",
        d,
        vec![vec![z.clone(), h.clone()], vec![h, z]],
    )
}

/// −½·[[2,0,1+√−2,½√−2],[0,2,½√−2,1−√−2],[1−√−2,−½√−2,2,0],
///     [−½√−2,1+√−2,0,2]] over Q(√−2).
pub fn lambda_e8_d2() -> HermLattice {
    let d = -2;
    // entries as (a, b) meaning a + b√−2, before the −½ factor
    let raw: [[((i64, i64), (i64, i64)); 4]; 4] = [
        [
            ((2, 1), (0, 1)),
            ((0, 1), (0, 1)),
            ((1, 1), (1, 1)),
            ((0, 1), (1, 2)),
        ],
        [
            ((0, 1), (0, 1)),
            ((2, 1), (0, 1)),
            ((0, 1), (1, 2)),
            ((1, 1), (-1, 1)),
        ],
        [
            ((1, 1), (-1, 1)),
            ((0, 1), (-1, 2)),
            ((2, 1), (0, 1)),
            ((0, 1), (0, 1)),
        ],
        [
            ((0, 1), (-1, 2)),
            ((1, 1), (1, 1)),
            ((0, 1), (0, 1)),
            ((2, 1), (0, 1)),
        ],
    ];
    let half = Rational::new((-1).into(), 2.into());
    let rows = raw
        .iter()
        .map(|r| r.iter().map(|&(a, b)| fe(d, a, b).scale(&half)).collect())
        .collect();
    herm("Lambda'_E8_d-2", d, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latalg::{enumerate_norm_vectors, EnumBudget};

    fn two() -> Rational {
        Rational::from_integer(BigInt::from(2))
    }

    #[test]
    fn explicit_piece_invariants() {
        let cases = [
            (lambda_uu_d1(), (1, 1), true, true, BigInt::one()),
            (lambda_uu2_d1(), (1, 1), false, true, BigInt::from(4)),
            (lambda_e8_d1(), (0, 4), true, true, BigInt::one()),
            (lambda_uu_d2(), (1, 1), true, true, BigInt::one()),
            (lambda_uu2_d2(), (1, 1), false, true, BigInt::from(4)),
            (lambda_e8_d2(), (0, 4), true, true, BigInt::one()),
        ];
        for (l, sig, unimod, even, det) in cases {
            let i = l.invariants().unwrap();
            assert_eq!(i.signature, sig, "{}", l.name);
            assert_eq!(i.is_unimodular, unimod, "{}", l.name);
            assert_eq!(i.is_even, even, "{}", l.name);
            let q = l.trace_form().unwrap();
            assert_eq!(q.determinant().abs(), det, "{}", l.name);
            let (p, n, _) = q.signature();
            assert_eq!((p, n), (2 * sig.0, 2 * sig.1), "{}", l.name);
        }
    }

    #[test]
    fn e8_trace_forms_have_240_roots() {
        for l in [lambda_e8_d1(), lambda_e8_d2()] {
            let q = l.trace_form().unwrap();
            let e =
                enumerate_norm_vectors(&q.gram, &BigInt::from(-2), &EnumBudget::default(), false)
                    .unwrap();
            assert_eq!(e.len(), 240, "{}", l.name);
        }
    }

    #[test]
    fn duals() {
        let l = lambda_uu_d1();
        assert!(same_module(
            &l.dual().unwrap(),
            &Matrix::identity_like(2, &l.field.one())
        ));
        let l2 = l.scaled(&two(), "UU(2)").unwrap();
        assert!(!l2.is_unimodular().unwrap());
        // rank one with ⟨e,e⟩ = 1 = 2i·δ: the dual is generated by e/2
        let f = ImagQuadField::new(-1).unwrap();
        let g = Matrix::from_rows(vec![vec![f.one()]]).unwrap();
        let r1 = HermLattice::new("r1", f.clone(), g).unwrap();
        let b = r1.dual().unwrap();
        assert!(f.associated(
            b.get(0, 0),
            &FieldElem::from_rational(-1, Rational::new(1.into(), 2.into()))
        ));
    }

    #[test]
    fn quasi_reflection_identities() {
        let l = HermLattice::direct_sum("t", &[&lambda_uu_d1(), &lambda_e8_d1()]).unwrap();
        let f = &l.field;
        let mut r = l.basis_vector(2);
        r[3] = f.one();
        let i = FieldElem::sqrt_d(-1);
        let minus = f.from_int(-1);
        let t_i = l.quasi_reflection(&r, &i).unwrap();
        let t_m = l.quasi_reflection(&r, &minus).unwrap();
        assert_eq!(t_i.mul(&t_i), t_m);
        assert_eq!(t_m.mul(&t_m), Matrix::identity_like(6, &f.one()));
        assert!(preserves_form(&l.gram, &t_i));
        assert_eq!(matrix_pow(&t_i, 4), Matrix::identity_like(6, &f.one()));
        assert!(matches!(
            l.quasi_reflection(&r, &f.one()),
            Err(Error::NotUnit(_))
        ));
    }

    #[test]
    fn membership_unimodular() {
        let l = lambda_e8_d1();
        let r = l.basis_vector(0); // norm −1
        assert_eq!(l.norm(&r), Rational::from_integer(BigInt::from(-1)));
        assert!(l.tau_in_unitary_group(&r, &l.field.from_int(-1)).unwrap());
        assert!(!l.tau_in_unitary_group(&r, &FieldElem::sqrt_d(-1)).unwrap());
        let l2 = lambda_e8_d2();
        let r = l2.basis_vector(0);
        assert!(!l2.tau_in_unitary_group(&r, &l2.field.from_int(-1)).unwrap());
    }

    #[test]
    fn content_and_special_even() {
        let l = lambda_uu_d1();
        let f = &l.field;
        let v = l.basis_vector(0);
        assert!(f.associated(&l.ideal_content(&v).unwrap(), f.delta()));
        let v2: Vec<FieldElem> = v.iter().map(|x| x.scale(&two())).collect();
        assert!(f.associated(&l.ideal_content(&v2).unwrap(), &f.delta().scale(&two())));
        // pairing 1/(2i) = −i/2: Re is 0 but Re⟨r, i·e₂⟩ = 1/2
        assert!(!l.herm_special_even(&v).unwrap());
        // Iyanaga(2): all pairings in O_F
        let e2 = lambda_e8_d1().scaled(&two(), "E8(2)").unwrap();
        assert!(e2.herm_special_even(&e2.basis_vector(1)).unwrap());
        let u2 = lambda_uu2_d1();
        assert!(!u2.herm_special_even(&u2.basis_vector(0)).unwrap());
    }

    #[test]
    fn pullback_examples() {
        let l = HermLattice::direct_sum("t", &[&lambda_uu_d1(), &lambda_e8_d1()]).unwrap();
        let r = l.basis_vector(2);
        for xi in l.field.nontrivial_units() {
            for j in 0..l.rank() {
                let c = l.pullback_check(&l.basis_vector(j), &r, xi).unwrap();
                assert!(c.implication_holds(-1));
            }
        }
    }
}
