//! Observed refinement order of the discrete identity checks.
//!
//! ```text
//! cargo run --release --example identities [n_theta]
//! ```

use sigmak::geometry::IdentityOptions;
use sigmak::grid::refinement_order;
use sigmak::workbench::verify::{models, IDENTITY_CHECKS, IDENTITY_FIELDS};
use sigmak::ScalarField;

fn main() -> sigmak::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(16, |a| a.parse().expect("n_theta must be an integer"));
    for model in models() {
        for (field, f) in IDENTITY_FIELDS {
            for (name, check) in IDENTITY_CHECKS {
                let ord = refinement_order(n, 2 * n, |g| check(&model, &ScalarField::from_fn(g, f)?, &IdentityOptions::default()))?;
                println!(
                    "K={:+} {field:<13} {name:<21} {:.3e} -> {:.3e}  order {:.3}",
                    model.curvature().sign(),
                    ord.coarse_error,
                    ord.fine_error,
                    ord.order().unwrap_or(f64::NAN)
                );
            }
        }
    }
    Ok(())
}
