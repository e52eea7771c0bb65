//! Writing the catalog to disk, adding an entry and reloading it.

use serde_json::json;

use reflex::cli::{load_catalog, save_catalog, Catalog};

fn main() -> reflex::Result<()> {
    let dir = std::env::temp_dir().join(format!("reflex-catalog-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    save_catalog(&Catalog::builtin(), &dir.join("builtin.json"))?;
    let extra = json!({
        "kind": "quad_lattice",
        "name": "A1(-1)+A1(-1)",
        "gram": [[-2, 0], [0, -2]],
        "source": "example entry"
    });
    std::fs::write(dir.join("extra.json"), extra.to_string())?;
    let cat = load_catalog(&dir)?;
    let inv = cat.quad("A1(-1)+A1(-1)")?.lattice.invariants()?;
    println!(
        "{} quadratic lattices, {} Hermitian, {} forms, {} cusps",
        cat.quad.len(),
        cat.herm.len(),
        cat.forms.len(),
        cat.cusps.len()
    );
    println!(
        "new entry: signature {:?}, det {}",
        inv.signature, inv.determinant
    );

    std::fs::write(
        dir.join("broken.json"),
        json!({"kind": "form", "name": "bad", "ambient": "II_2_26", "weight": "0", "divisor": []})
            .to_string(),
    )?;
    match load_catalog(&dir) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
