//! Cusp quotients and naked-cusp reports.

use reflex::cli::Catalog;
use reflex::cusp;
use reflex::latalg::EnumBudget;
use reflex::qlat::GroupChoice;
use reflex::ramify::{self, SearchBudget};

fn main() -> reflex::Result<()> {
    let cat = Catalog::builtin();
    for (lat, cusps) in [
        ("Lambda_Enr", vec!["sterk1", "sterk2"]),
        ("II_2_26", vec!["leech", "e8cubed"]),
    ] {
        let l = &cat.quad(lat)?.lattice;
        let b =
            ramify::orth_branch_report(l, GroupChoice::FullPlus, None, &SearchBudget::default())?;
        let planes = cusps
            .iter()
            .map(|c| cat.cusp(c).map(|e| e.cusp.clone()))
            .collect::<reflex::Result<Vec<_>>>()?;
        let r = cusp::naked_report(l, &planes, &b, &EnumBudget::default())?;
        println!("{lat}: {} naked", r.naked_count);
        for row in &r.rows {
            let inc: Vec<String> = row
                .incidences
                .iter()
                .map(|i| {
                    format!(
                        "{}: {}",
                        i.key.label(),
                        if i.contained {
                            "contained"
                        } else {
                            "not contained"
                        }
                    )
                })
                .collect();
            println!(
                "  {:<8} quotient rank {:>2}, naked {:<5} [{}]",
                row.cusp,
                row.quotient_rank,
                row.naked,
                inc.join(", ")
            );
        }
    }
    Ok(())
}
