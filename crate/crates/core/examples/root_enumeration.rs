//! Counting vectors of fixed norm in definite lattices.

use num_bigint::BigInt;
use reflex::latalg::{enumerate_norm_vectors, EnumBudget};
use reflex::qlat;

fn main() -> reflex::Result<()> {
    let budget = EnumBudget::default();
    for (l, norm) in [
        (qlat::e8(-1), -2),
        (qlat::e8(-2), -4),
        (qlat::e8(-2), -2),
        (qlat::leech(-1), -2),
        (qlat::leech(-1), -4),
    ] {
        let en = enumerate_norm_vectors(&l.gram, &BigInt::from(norm), &budget, false)?;
        println!(
            "{:>10}: {:>6} vectors of norm {norm} ({} nodes, exhaustive: {})",
            l.name,
            en.vectors.len(),
            en.nodes,
            en.exhaustive
        );
    }
    Ok(())
}
