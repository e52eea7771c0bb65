//! Branch divisors of orthogonal and unitary quotients, with witnesses.

use reflex::cli::Catalog;
use reflex::qlat::GroupChoice;
use reflex::ramify::{self, BranchReport, SearchBudget};

fn show(b: &BranchReport) {
    let classes: Vec<String> = b
        .classes
        .iter()
        .map(|c| format!("{} (degree {})", c.key.label(), c.degree))
        .collect();
    println!(
        "{:>26}: [{}] exhaustive: {}",
        b.lattice,
        classes.join(", "),
        b.exhaustive
    );
}

fn main() -> reflex::Result<()> {
    let cat = Catalog::builtin();
    let budget = SearchBudget::default();
    for name in ["II_2_26", "U_U_E8m1", "Lambda_Enr", "Lambda_logEnr_3"] {
        let l = &cat.quad(name)?.lattice;
        let b = ramify::orth_branch_report(l, GroupChoice::FullPlus, None, &budget)?;
        assert!(ramify::verify_report_witnesses_orth(l, &b));
        show(&b);
    }
    for name in [
        "Lambda_UU_E8_d-1_rank14",
        "Lambda_UU_E8_d-2_rank14",
        "Lambda_UU2_E8x2_d-1_rank6",
        "Lambda_m1_d-1",
    ] {
        let l = &cat.herm(name)?.lattice;
        let b = ramify::unitary_branch_report(l, None, &budget)?;
        assert!(ramify::verify_report_witnesses_herm(l, &b));
        show(&b);
    }
    Ok(())
}
