//! The explicit Hermitian Gram matrices and their trace forms.

use reflex::hlat;

fn main() -> reflex::Result<()> {
    let pieces = [
        hlat::lambda_uu_d1(),
        hlat::lambda_uu2_d1(),
        hlat::lambda_e8_d1(),
        hlat::lambda_uu_d2(),
        hlat::lambda_uu2_d2(),
        hlat::lambda_e8_d2(),
    ];
    for h in &pieces {
        let hi = h.invariants()?;
        let t = h.trace_form()?.invariants()?;
        println!(
            "{:>16} (d={}): herm signature {:?}, unimodular {}, even {} | trace form {:?} det {} disc {:?}",
            h.name,
            h.d(),
            hi.signature,
            hi.is_unimodular,
            hi.is_even,
            t.signature,
            t.determinant,
            t.disc_group.iter().map(ToString::to_string).collect::<Vec<_>>()
        );
    }
    Ok(())
}
