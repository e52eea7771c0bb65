//! Solving for a product of forms whose divisor matches the branch data.

use reflex::cli::Catalog;
use reflex::ledger;
use reflex::ramify::{self, SearchBudget};
use reflex::slope;

fn main() -> reflex::Result<()> {
    let cat = Catalog::builtin();
    let h = cat.herm("Lambda_UU2_E8x2_d-1_rank6")?;
    let assoc = h.associated.as_deref().unwrap();
    let b = ramify::unitary_branch_report(&h.lattice, None, &SearchBudget::default())?;
    let forms = ["Phi4", "Phi124"]
        .iter()
        .map(|n| ledger::restrict_to_ball(cat.form(n)?, &h.lattice, assoc))
        .collect::<reflex::Result<Vec<_>>>()?;
    let v = slope::find_assumption_i_combination(&b, &forms, b.family)?;
    println!("exponents: {:?}", v.exponents);
    println!("s = {}, verdict {}", v.s.unwrap(), v.verdict);
    for n in &v.notes {
        println!("note: {n}");
    }
    Ok(())
}
