//! Elementary symmetric functions and Gårding cone membership.

use sigmak::algebra::{cone_slack, sigma_all, sigma_partial};

fn main() {
    let samples: [&[f64]; 4] = [&[1.0, 1.0], &[2.0, -0.5], &[3.0, -1.0, 0.5], &[1.0, 2.0, 3.0, 4.0]];
    for l in samples {
        let n = l.len();
        println!("lambda = {l:?}");
        println!("  sigma_0..{n} = {:?}", sigma_all(l, n));
        for k in 1..=n {
            println!(
                "  k = {k}: d sigma_k = {:?}, cone slack = {:+.4}",
                sigma_partial(l, k),
                cone_slack(l, k)
            );
        }
    }
}
