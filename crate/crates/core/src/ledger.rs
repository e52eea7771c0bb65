//! Reflective modular forms as bookkeeping records: weight plus divisor,
//! with products, powers and restriction to unitary balls.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, int, Rational};
use crate::hlat::HermLattice;
use crate::qlat::QuadLattice;
use crate::ramify::ClassKey;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormRecord {
    pub name: String,
    /// Catalog id of the lattice the form lives on.
    pub ambient: String,
    pub weight: Rational,
    /// Sorted by key, multiplicities positive.
    pub divisor: Vec<(ClassKey, Rational)>,
    pub character_note: String,
    pub source: String,
}

fn merge(parts: impl IntoIterator<Item = (ClassKey, Rational)>) -> Vec<(ClassKey, Rational)> {
    let mut m: BTreeMap<ClassKey, Rational> = BTreeMap::new();
    for (k, v) in parts {
        *m.entry(k).or_insert_with(Rational::zero) += v;
    }
    m.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

impl FormRecord {
    pub fn new(
        name: impl Into<String>,
        ambient: impl Into<String>,
        weight: Rational,
        divisor: Vec<(ClassKey, Rational)>,
        character_note: impl Into<String>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let name = name.into();
        if !weight.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "{name}: weight must be positive, got {}",
                format_rational(&weight)
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (k, m) in &divisor {
            if !m.is_positive() {
                return Err(Error::InvalidArgument(format!(
                    "{name}: multiplicity of {} must be positive",
                    k.label()
                )));
            }
            if !seen.insert(k.clone()) {
                return Err(Error::InvalidArgument(format!(
                    "{name}: divisor class {} listed twice",
                    k.label()
                )));
            }
        }
        Ok(FormRecord {
            name,
            ambient: ambient.into(),
            weight,
            divisor: merge(divisor),
            character_note: character_note.into(),
            source: source.into(),
        })
    }

    pub fn multiplicity(&self, k: &ClassKey) -> Option<&Rational> {
        self.divisor.iter().find(|(c, _)| c == k).map(|(_, m)| m)
    }

    pub fn support(&self) -> Vec<ClassKey> {
        self.divisor.iter().map(|(k, _)| k.clone()).collect()
    }
}

/// f·g: weights and divisors add.
pub fn product(f: &FormRecord, g: &FormRecord) -> Result<FormRecord> {
    if f.ambient != g.ambient {
        return Err(Error::AmbientMismatch(format!(
            "{} lives on {}, {} on {}",
            f.name, f.ambient, g.name, g.ambient
        )));
    }
    let note = match (f.character_note.is_empty(), g.character_note.is_empty()) {
        (true, true) => String::new(),
        (false, true) => f.character_note.clone(),
        (true, false) => g.character_note.clone(),
        (false, false) if f.character_note == g.character_note => f.character_note.clone(),
        (false, false) => format!("{}; {}", f.character_note, g.character_note),
    };
    Ok(FormRecord {
        name: format!("{}*{}", f.name, g.name),
        ambient: f.ambient.clone(),
        weight: &f.weight + &g.weight,
        divisor: merge(f.divisor.iter().chain(&g.divisor).cloned()),
        character_note: note,
        source: format!("product of {} and {}", f.name, g.name),
    })
}

/// fᵗ for t ≥ 1.
pub fn power(f: &FormRecord, t: u64) -> Result<FormRecord> {
    if t == 0 {
        return Err(Error::InvalidArgument(
            "power exponent must be positive".into(),
        ));
    }
    if t == 1 {
        return Ok(f.clone());
    }
    let tr = int(t as i64);
    Ok(FormRecord {
        name: format!("{}^{}", f.name, t),
        ambient: f.ambient.clone(),
        weight: &f.weight * &tr,
        divisor: f
            .divisor
            .iter()
            .map(|(k, m)| (k.clone(), m * &tr))
            .collect(),
        character_note: f.character_note.clone(),
        source: format!("power {} of {}", t, f.name),
    })
}

/// Π fᵢ^{aᵢ} over the nonzero exponents.
pub fn monomial(forms: &[FormRecord], exps: &[u64]) -> Result<FormRecord> {
    let mut acc: Option<FormRecord> = None;
    for (f, &a) in forms.iter().zip(exps) {
        if a == 0 {
            continue;
        }
        let p = power(f, a)?;
        acc = Some(match acc {
            None => p,
            Some(x) => product(&x, &p)?,
        });
    }
    acc.ok_or_else(|| Error::InvalidArgument("all exponents are zero".into()))
}

/// Pull back a form on Λ_Q to the ball of Λ. `associated` is the catalog
/// id of the quadratic lattice identified with trace_form(Λ).
///
/// Weight is kept. A class of norm −2k becomes the Hermitian class of norm
/// −k with the same special-even flag, and each multiplicity is scaled by
/// #O_F^×/2.
pub fn restrict_to_ball(
    f: &FormRecord,
    ball: &HermLattice,
    associated: &str,
) -> Result<FormRecord> {
    if f.ambient != associated {
        return Err(Error::AmbientMismatch(format!(
            "{} lives on {}, but {} is associated with {}",
            f.name, f.ambient, ball.name, associated
        )));
    }
    let factor = multiplicity_factor(ball.d())?;
    let half = Rational::new(1.into(), 2.into());
    Ok(FormRecord {
        name: format!("{}|{}", f.name, ball.name),
        ambient: ball.name.clone(),
        weight: f.weight.clone(),
        divisor: merge(
            f.divisor
                .iter()
                .map(|(k, m)| (ClassKey::new(&k.norm * &half, k.special_even), m * &factor)),
        ),
        character_note: f.character_note.clone(),
        source: format!("restriction of {} to {}", f.name, ball.name),
    })
}

/// #O_F^× / 2.
pub fn multiplicity_factor(d: i64) -> Result<Rational> {
    let f = crate::exactnum::ImagQuadField::new(d)?;
    Ok(Rational::new(
        BigInt::from(f.units().len()),
        BigInt::from(2),
    ))
}

/// Whether the trace form of `ball` has the invariants of `q` (rank,
/// signature, determinant, parity, discriminant group). A sanity check on
/// the identification that restriction takes as given.
pub fn identification_plausible(ball: &HermLattice, q: &QuadLattice) -> Result<bool> {
    let t = ball.trace_form()?.invariants()?;
    let qi = q.invariants()?;
    Ok(t == qi)
}

fn key(norm: i64, se: bool) -> ClassKey {
    ClassKey::new(int(norm), se)
}

/// The forms cited by name in the catalog.
pub fn builtin_forms() -> Vec<FormRecord> {
    let one = int(1);
    let mut out = vec![
        FormRecord::new(
            "Phi12",
            "II_2_26",
            int(12),
            vec![(key(-2, false), one.clone())],
            "",
            "Borcherds form on II_{2,26}",
        ),
        FormRecord::new(
            "Phi252",
            "U_U_E8m1",
            int(252),
            vec![(key(-2, false), one.clone())],
            "",
            "Borcherds form on U+U+E8(-1)",
        ),
        FormRecord::new(
            "Phi4",
            "Lambda_Enr",
            int(4),
            vec![(key(-2, false), one.clone())],
            "nontrivial character; its square is trivial",
            "Borcherds form on the Enriques lattice",
        ),
        FormRecord::new(
            "Phi124",
            "Lambda_Enr",
            int(124),
            vec![(key(-4, true), one.clone())],
            "nontrivial character; its square is trivial",
            "Borcherds form on the Enriques lattice",
        ),
        FormRecord::new(
            "Psi12",
            "Lambda_m1_Q",
            int(12),
            vec![(key(-2, false), one.clone())],
            "",
            "reflective form on U+U+E8(-2)",
        ),
    ];
    for k in 1..=7i64 {
        out.push(FormRecord::new(
            format!("Psi{}_logEnr{k}", 4 + k),
            format!("Lambda_logEnr_{k}"),
            int(4 + k),
            vec![(key(-2, true), one.clone())],
            "",
            "Yoshikawa form on the log Enriques lattice",
        ));
        out.push(FormRecord::new(
            format!("Psi124_logEnr{k}"),
            format!("Lambda_logEnr_{k}"),
            int(-k * k - 9 * k + 124),
            vec![(key(-4, true), one.clone())],
            "",
            "Ma-Yoshikawa form on the log Enriques lattice",
        ));
    }
    out.into_iter().map(|r| r.expect("built-in form")).collect()
}
