//! Slopes and verdicts for single reflective forms.

use reflex::cli::Catalog;
use reflex::ledger::{self, FormRecord};
use reflex::qlat::GroupChoice;
use reflex::ramify::{self, SearchBudget};
use reflex::slope;

fn main() -> reflex::Result<()> {
    let cat = Catalog::builtin();
    let budget = SearchBudget::default();
    let form = |n: &str| cat.form(n).map(Clone::clone);
    let orth: Vec<(&str, FormRecord)> = vec![
        ("II_2_26", form("Phi12")?),
        ("U_U_E8m1", form("Phi252")?),
        (
            "Lambda_Enr",
            ledger::product(&form("Phi4")?, &form("Phi124")?)?,
        ),
    ];
    for (lat, f) in orth {
        let b = ramify::orth_branch_report(
            &cat.quad(lat)?.lattice,
            GroupChoice::FullPlus,
            None,
            &budget,
        )?;
        let v = slope::check_assumption_i(&b, &f, b.family)?;
        println!(
            "{lat:>26} {:<16} s = {:<6} {}",
            f.name,
            v.s.unwrap().to_string(),
            v.verdict
        );
    }
    for k in 1..=7 {
        println!(
            "{:>26} s = {}",
            format!("Lambda_logEnr_{k}"),
            slope::log_enriques_slope(k)
        );
    }
    for (ball, f) in [
        ("Lambda_UU_E8_d-1_rank14", "Phi12"),
        ("Lambda_UU_E8_d-1_rank6", "Phi252"),
        ("Lambda_UU2_E8x2_d-2_rank6", "Phi4"),
    ] {
        let h = cat.herm(ball)?;
        let r =
            ledger::restrict_to_ball(cat.form(f)?, &h.lattice, h.associated.as_deref().unwrap())?;
        let b = ramify::unitary_branch_report(&h.lattice, None, &budget)?;
        let v = slope::check_assumption_i(&b, &r, b.family)?;
        println!(
            "{ball:>26} {f:<16} s = {:<6} {}",
            v.s.unwrap().to_string(),
            v.verdict
        );
        for n in v.notes.iter().filter(|n| n.starts_with("discrepancy")) {
            println!("{:>28}{n}", "");
        }
    }
    Ok(())
}
