//! Arithmetic in imaginary quadratic fields: units, gcds, inverse different.

use reflex::exactnum::{rat, FieldElem, ImagQuadField};

fn main() -> reflex::Result<()> {
    for d in [-1, -2, -3] {
        let f = ImagQuadField::new(d)?;
        let units: Vec<String> = f
            .units()
            .iter()
            .map(|u| format!("{u} (order {})", f.unit_order(u).unwrap()))
            .collect();
        println!(
            "Q(sqrt({d})): delta = {}, units = {}",
            f.delta(),
            units.join(", ")
        );
    }
    let f = ImagQuadField::new(-1)?;
    let a = FieldElem::parse("3 + 1*sqrt(-1)", -1)?;
    let b = FieldElem::parse("1 - 1*sqrt(-1)", -1)?;
    println!("gcd({a}, {b}) = {}", f.gcd(&a, &b));
    println!(
        "norm({a}) = {}, ({a})/({b}) = {}",
        a.norm(),
        a.div(&b).unwrap()
    );
    let x = FieldElem::new(-3, rat(-1, 2), rat(1, 2));
    println!("omega = {x}, omega^3 = {}", x.pow(3));
    Ok(())
}
