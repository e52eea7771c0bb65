//! Integral quadratic lattices: invariants, div, reflections and their
//! membership in O⁺(Λ) or the stable subgroup.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::latalg::{
    int_signature, lll_default, row_lattice_basis, saturation_and_complement, snf, IntMatrix,
    RatMatrix,
};

/// A lattice given by its Gram matrix on a fixed basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadLattice {
    pub name: String,
    pub gram: IntMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeInvariants {
    pub rank: usize,
    pub signature: (usize, usize),
    pub determinant: BigInt,
    pub is_even: bool,
    /// Elementary divisors of Λ^∨/Λ greater than one.
    pub disc_group: Vec<BigInt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupChoice {
    FullPlus,
    Stable,
}

impl std::str::FromStr for GroupChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full_plus" => Ok(GroupChoice::FullPlus),
            "stable" => Ok(GroupChoice::Stable),
            _ => Err(Error::Parse(format!(
                "unknown group `{s}` (full_plus | stable)"
            ))),
        }
    }
}

impl std::fmt::Display for GroupChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GroupChoice::FullPlus => "full_plus",
            GroupChoice::Stable => "stable",
        })
    }
}

pub fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

impl QuadLattice {
    pub fn new(name: impl Into<String>, gram: IntMatrix) -> Result<Self> {
        let name = name.into();
        if !gram.is_symmetric() {
            return Err(Error::InvalidArgument(format!(
                "Gram matrix of `{name}` is not square and symmetric"
            )));
        }
        Ok(QuadLattice { name, gram })
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn pair(&self, v: &[BigInt], w: &[BigInt]) -> BigInt {
        self.gram.bilinear(v, w)
    }

    pub fn norm(&self, v: &[BigInt]) -> BigInt {
        self.pair(v, v)
    }

    fn check_dim(&self, v: &[BigInt]) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::Dimension(format!(
                "vector of length {} in rank-{} lattice `{}`",
                v.len(),
                self.rank(),
                self.name
            )));
        }
        Ok(())
    }

    /// Lattice with the form multiplied by `k`.
    pub fn scaled(&self, k: i64, name: impl Into<String>) -> QuadLattice {
        let k = BigInt::from(k);
        QuadLattice {
            name: name.into(),
            gram: self.gram.map(|x| x * &k),
        }
    }

    pub fn direct_sum(name: impl Into<String>, parts: &[&QuadLattice]) -> QuadLattice {
        let gram = parts.iter().fold(IntMatrix::zeros(0, 0), |acc, p| {
            acc.direct_sum(&p.gram, &BigInt::zero())
        });
        QuadLattice {
            name: name.into(),
            gram,
        }
    }

    pub fn determinant(&self) -> BigInt {
        self.gram.det()
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram.get(i, i).is_even())
    }

    pub fn signature(&self) -> (usize, usize, usize) {
        int_signature(&self.gram)
    }

    pub fn invariants(&self) -> Result<LatticeInvariants> {
        let det = self.determinant();
        if det.is_zero() {
            return Err(Error::DegenerateLattice(self.name.clone()));
        }
        let (p, q, _) = self.signature();
        let disc_group = snf(&self.gram)
            .diagonal()
            .into_iter()
            .filter(|x| !x.is_one())
            .collect();
        Ok(LatticeInvariants {
            rank: self.rank(),
            signature: (p, q),
            determinant: det,
            is_even: self.is_even(),
            disc_group,
        })
    }

    /// Exponent of the discriminant group (1 when unimodular).
    pub fn disc_exponent(&self) -> BigInt {
        snf(&self.gram)
            .diagonal()
            .into_iter()
            .fold(BigInt::one(), |e, d| e.lcm(&d))
    }

    /// Generators of Λ^∨/Λ in Λ⊗Q coordinates with their orders; the SNF
    /// columns of V scaled by 1/dᵢ.
    pub fn disc_generators(&self) -> Result<Vec<(Vec<Rational>, BigInt)>> {
        if self.determinant().is_zero() {
            return Err(Error::DegenerateLattice(self.name.clone()));
        }
        let s = snf(&self.gram);
        Ok(s.diagonal()
            .into_iter()
            .enumerate()
            .filter(|(_, d)| !d.is_one())
            .map(|(i, d)| {
                let g = (0..self.rank())
                    .map(|k| Rational::new(s.v.get(k, i).clone(), d.clone()))
                    .collect();
                (g, d)
            })
            .collect())
    }

    /// Positive generator of the ideal (Λ, r).
    pub fn div(&self, r: &[BigInt]) -> Result<BigInt> {
        self.check_dim(r)?;
        if r.iter().all(Zero::is_zero) {
            return Err(Error::ZeroVector);
        }
        let g = content(&self.gram.mul_vec(r));
        if g.is_zero() {
            return Err(Error::DegenerateLattice(self.name.clone()));
        }
        Ok(g)
    }

    pub fn is_special_even(&self, r: &[BigInt]) -> Result<bool> {
        Ok(self.div(r)?.is_even())
    }

    /// Matrix of σ_r(ℓ) = ℓ − 2(ℓ,r)/(r,r)·r acting on coordinate columns.
    pub fn reflection(&self, r: &[BigInt]) -> Result<RatMatrix> {
        self.check_dim(r)?;
        let rr = self.norm(r);
        if rr.is_zero() {
            return Err(if r.iter().all(Zero::is_zero) {
                Error::ZeroVector
            } else {
                Error::IsotropicVector
            });
        }
        let gr = self.gram.mul_vec(r);
        let n = self.rank();
        Ok(RatMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j {
                Rational::one()
            } else {
                Rational::zero()
            };
            delta - Rational::new(BigInt::from(2) * &r[i] * &gr[j], rr.clone())
        }))
    }

    /// Whether σ_r lies in O⁺(Λ) (integrality) or in the stable group
    /// (integrality plus trivial action on Λ^∨/Λ).
    pub fn reflection_in_group(&self, r: &[BigInt], g: GroupChoice) -> Result<bool> {
        self.check_dim(r)?;
        let rr = self.norm(r);
        if !rr.is_negative() {
            return Err(Error::NonNegativeNorm(rr.to_string()));
        }
        if !content(r).is_one() {
            return Err(Error::NotPrimitive);
        }
        let div = self.div(r)?;
        if !(BigInt::from(2) * &div).is_multiple_of(&rr) {
            return Ok(false);
        }
        if g == GroupChoice::FullPlus {
            return Ok(true);
        }
        let sigma = self.reflection(r)?;
        for (gen, _) in self.disc_generators()? {
            let image = sigma.mul_vec(&gen);
            if image.iter().zip(&gen).any(|(a, b)| !(a - b).is_integer()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn primitive_part(&self, r: &[BigInt]) -> Result<Vec<BigInt>> {
        self.check_dim(r)?;
        let c = content(r);
        if c.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(r.iter().map(|x| x / &c).collect())
    }

    /// Basis of (Q·S) ∩ Λ.
    pub fn saturate(&self, s: &[Vec<BigInt>]) -> Result<Vec<Vec<BigInt>>> {
        for v in s {
            self.check_dim(v)?;
        }
        let m = IntMatrix::from_rows_with_cols(s.to_vec(), self.rank())?;
        Ok(saturation_and_complement(&m).0.to_rows())
    }

    /// Gram matrix of the sublattice spanned by the given vectors.
    pub fn restrict(&self, basis: &IntMatrix, name: impl Into<String>) -> QuadLattice {
        QuadLattice {
            name: name.into(),
            gram: self.gram.congruent(basis),
        }
    }
}

// ---------------------------------------------------------------------------
// Standard lattices

pub fn u() -> QuadLattice {
    QuadLattice {
        name: "U".into(),
        gram: IntMatrix::from_i64(&[[0, 1], [1, 0]]),
    }
}

pub fn u_scaled(k: i64) -> QuadLattice {
    u().scaled(k, format!("U({k})"))
}

/// A1(k) has Gram (2k); A1 is k = 1 and A1(−1) is k = −1.
pub fn a1(k: i64) -> QuadLattice {
    QuadLattice {
        name: if k == 1 {
            "A1".into()
        } else {
            format!("A1({k})")
        },
        gram: IntMatrix::from_i64(&[[2 * k]]),
    }
}

/// Positive definite E8 on simple roots, Bourbaki labelling
/// (1-3-4-5-6-7-8 chain, 2 attached to 4).
pub fn e8_cartan() -> IntMatrix {
    let edges = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];
    let mut m = IntMatrix::diag(&[2; 8]);
    for (a, b) in edges {
        m.set(a, b, BigInt::from(-1));
        m.set(b, a, BigInt::from(-1));
    }
    m
}

/// E8(k): the E8 form scaled by k.
pub fn e8(k: i64) -> QuadLattice {
    let name = if k == 1 {
        "E8".into()
    } else {
        format!("E8({k})")
    };
    QuadLattice {
        name: String::new(),
        gram: e8_cartan(),
    }
    .scaled(k, name)
}

/// Weyl vector of E8 in simple-root coordinates: the sum of the
/// fundamental weights, i.e. the column sums of the inverse Cartan matrix.
pub fn e8_weyl_vector() -> Vec<BigInt> {
    let inv = e8_cartan()
        .to_rational()
        .inverse()
        .expect("E8 is nondegenerate");
    (0..8)
        .map(|j| {
            (0..8)
                .map(|i| inv.get(i, j).clone())
                .sum::<Rational>()
                .to_integer()
        })
        .collect()
}

/// Basis of the extended binary Golay code: cyclic shifts of the quadratic
/// residues mod 23 with a parity bit, reduced to 12 independent words.
pub fn golay_basis() -> Vec<[u8; 24]> {
    let residues: Vec<usize> = (1..23).map(|x| x * x % 23).collect();
    let mut basis: Vec<[u8; 24]> = Vec::new();
    for s in 0..23 {
        let mut w = [0u8; 24];
        for &q in &residues {
            w[(q + s) % 23] = 1;
        }
        w[23] = w[..23].iter().sum::<u8>() % 2;
        // GF(2) elimination against the current basis
        let mut r = w;
        for b in &basis {
            let p = b.iter().position(|&x| x == 1).unwrap();
            if r[p] == 1 {
                for k in 0..24 {
                    r[k] ^= b[k];
                }
            }
        }
        if r.iter().any(|&x| x == 1) {
            // keep pivots distinct by reducing older rows too
            let p = r.iter().position(|&x| x == 1).unwrap();
            for b in basis.iter_mut() {
                if b[p] == 1 {
                    for k in 0..24 {
                        b[k] ^= r[k];
                    }
                }
            }
            basis.push(r);
        }
    }
    basis
}

/// The Leech lattice (positive definite, even unimodular, rank 24) on an
/// LLL-reduced basis. Built from the standard generators 2c (c in the
/// Golay code), 4(eᵢ ± eⱼ) and (−3, 1²³) of √8·Λ₂₄ ⊂ Z²⁴.
pub fn leech_gram() -> &'static IntMatrix {
    static LEECH: OnceLock<IntMatrix> = OnceLock::new();
    LEECH.get_or_init(|| {
        let mut gens: Vec<Vec<i64>> = golay_basis()
            .iter()
            .map(|c| c.iter().map(|&b| 2 * b as i64).collect())
            .collect();
        for i in 1..24 {
            let mut v = vec![0i64; 24];
            v[0] = 4;
            v[i] = -4;
            gens.push(v);
        }
        let mut v = vec![0i64; 24];
        v[0] = 4;
        v[1] = 4;
        gens.push(v);
        let mut v = vec![1i64; 24];
        v[0] = -3;
        gens.push(v);
        let basis = row_lattice_basis(&IntMatrix::from_i64(&gens));
        let eight = BigInt::from(8);
        let raw = basis.mul(&basis.transpose()).map(|x| {
            debug_assert!(x.is_multiple_of(&eight));
            x / &eight
        });
        let t = lll_default(&raw).expect("Leech form is positive definite");
        raw.congruent(&t)
    })
}

pub fn leech(k: i64) -> QuadLattice {
    let name = match k {
        1 => "Leech".to_string(),
        _ => format!("Leech({k})"),
    };
    QuadLattice {
        name: String::new(),
        gram: leech_gram().clone(),
    }
    .scaled(k, name)
}

/// U ⊕ U ⊕ E8(−1)³ with the ordering e₁, f₁, e₂, f₂, then three E8 blocks.
pub fn ii_2_26() -> QuadLattice {
    let e = e8(-1);
    QuadLattice::direct_sum("II_2_26", &[&u(), &u(), &e, &e, &e])
}

pub fn ii_2_26_leech() -> QuadLattice {
    QuadLattice::direct_sum("II_2_26_leech", &[&u(), &u(), &leech(-1)])
}

pub fn u_u_e8() -> QuadLattice {
    QuadLattice::direct_sum("U_U_E8m1", &[&u(), &u(), &e8(-1)])
}

/// U ⊕ U(2) ⊕ E8(−2).
pub fn lambda_enr() -> QuadLattice {
    QuadLattice::direct_sum("Lambda_Enr", &[&u(), &u_scaled(2), &e8(-2)])
}

/// U(2) ⊕ A1 ⊕ A1(−1)^{9−k}.
pub fn lambda_log_enr(k: usize) -> QuadLattice {
    assert!(k <= 9);
    let mut parts = vec![u_scaled(2), a1(1)];
    parts.extend(std::iter::repeat(a1(-1)).take(9 - k));
    let refs: Vec<&QuadLattice> = parts.iter().collect();
    QuadLattice::direct_sum(format!("Lambda_logEnr_{k}"), &refs)
}

/// U ⊕ U ⊕ E8(−2), the quadratic lattice behind the Λ₋₁ ball example.
pub fn lambda_m1_q() -> QuadLattice {
    QuadLattice::direct_sum("Lambda_m1_Q", &[&u(), &u(), &e8(-2)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latalg::{enumerate_norm_vectors, EnumBudget};

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn invariants_examples() {
        let i = u_u_e8().invariants().unwrap();
        assert_eq!(
            (i.rank, i.signature, i.determinant.clone()),
            (10 + 2, (2, 10), b(1))
        );
        assert!(i.is_even && i.disc_group.is_empty());

        let i = u_scaled(2).invariants().unwrap();
        assert_eq!(i.determinant, b(-4));
        assert_eq!(i.disc_group, vec![b(2), b(2)]);

        let i = lambda_enr().invariants().unwrap();
        assert_eq!(i.signature, (2, 10));
        assert_eq!(i.disc_group, vec![b(2); 10]);
        assert_eq!(
            QuadLattice::new("z", IntMatrix::zeros(2, 2))
                .unwrap()
                .invariants(),
            Err(Error::DegenerateLattice("z".into()))
        );
    }

    #[test]
    fn div_examples() {
        assert_eq!(u().div(&ints(&[1, 1])).unwrap(), b(1));
        let e = e8(-2);
        let r = ints(&[1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(e.div(&r).unwrap(), b(2));
        assert!(e.is_special_even(&r).unwrap());
        assert_eq!(u_scaled(2).div(&ints(&[1, 0])).unwrap(), b(2));
        assert!(!u().is_special_even(&ints(&[1, 1])).unwrap());
        assert_eq!(u().div(&ints(&[0, 0])), Err(Error::ZeroVector));
    }

    #[test]
    fn reflections() {
        let r = a1(-1).reflection(&ints(&[1])).unwrap();
        assert_eq!(
            r,
            RatMatrix::from_fn(1, 1, |_, _| Rational::from_integer(b(-1)))
        );
        let s = u()
            .reflection(&ints(&[1, -1]))
            .unwrap()
            .to_integer()
            .unwrap();
        assert_eq!(s, IntMatrix::from_i64(&[[0, 1], [1, 0]]));
        assert_eq!(u().reflection(&ints(&[1, 0])), Err(Error::IsotropicVector));
    }

    #[test]
    fn group_membership() {
        let l = u_u_e8();
        let r = ints(&[1, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert!(l.reflection_in_group(&r, GroupChoice::FullPlus).unwrap());
        // norm −4, div 1
        let r = ints(&[1, -2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert!(!l.reflection_in_group(&r, GroupChoice::FullPlus).unwrap());

        let enr = lambda_enr();
        let mut r = vec![b(0); 12];
        r[4] = b(1);
        assert_eq!(enr.norm(&r), b(-4));
        assert!(enr.reflection_in_group(&r, GroupChoice::FullPlus).unwrap());
        let mut two = r.clone();
        two[4] = b(2);
        assert_eq!(
            enr.reflection_in_group(&two, GroupChoice::FullPlus),
            Err(Error::NotPrimitive)
        );
    }

    #[test]
    fn primitive_and_saturate() {
        assert_eq!(u().primitive_part(&ints(&[2, 4])).unwrap(), ints(&[1, 2]));
        assert_eq!(u().primitive_part(&ints(&[1, 2])).unwrap(), ints(&[1, 2]));
        let s = u().saturate(&[ints(&[2, 0])]).unwrap();
        assert!(s == vec![ints(&[1, 0])] || s == vec![ints(&[-1, 0])]);
    }

    #[test]
    fn weyl_vector_and_golay() {
        let rho = e8_weyl_vector();
        assert_eq!(rho, ints(&[46, 68, 91, 135, 110, 84, 57, 29]));
        assert_eq!(e8(1).norm(&rho), b(620));
        let g = golay_basis();
        assert_eq!(g.len(), 12);
    }

    #[test]
    fn leech_is_even_unimodular_rootless() {
        let l = leech(1);
        let i = l.invariants().unwrap();
        assert_eq!(i.signature, (24, 0));
        assert!(i.is_even && i.disc_group.is_empty() && i.determinant == b(1));
        let roots = enumerate_norm_vectors(&l.gram, &b(2), &EnumBudget::default(), true).unwrap();
        assert!(roots.exhaustive && roots.is_empty());
    }
}
