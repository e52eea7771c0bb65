//! Invariants of the built-in quadratic lattices.

use reflex::cli::Catalog;

fn main() -> reflex::Result<()> {
    let cat = Catalog::builtin();
    for (name, e) in &cat.quad {
        let inv = e.lattice.invariants()?;
        println!(
            "{name:>18}: rank {:>2}, signature {:?}, det {:>6}, {}, disc {:?}",
            inv.rank,
            inv.signature,
            inv.determinant.to_string(),
            if inv.is_even { "even" } else { "odd" },
            inv.disc_group
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
        );
    }
    Ok(())
}
