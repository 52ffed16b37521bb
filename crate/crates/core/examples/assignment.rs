//! Maximum-weight assignment on rectangular and tied matrices, checked
//! against exhaustive search.
//!
//!     cargo run --example assignment

use multiscore::{brute_force_matching, max_weight_matching, ScoreMatrix};

fn main() -> multiscore::Result<()> {
    let cases = [
        (
            "square",
            vec![vec![32.0, 56.0, 21.0], vec![40.0, 18.0, 50.0], vec![58.0, 27.0, 35.0]],
        ),
        ("wide", vec![vec![10.0, 20.0, 30.0], vec![25.0, 5.0, 1.0]]),
        ("tall", vec![vec![10.0], vec![90.0], vec![40.0]]),
        // Identity and the swap of the first two rows tie; the smaller edge list wins.
        (
            "tied",
            vec![vec![5.0, 5.0, 0.0], vec![5.0, 5.0, 0.0], vec![0.0, 0.0, 5.0]],
        ),
    ];
    for (name, rows) in cases {
        let m = ScoreMatrix::new(rows)?;
        let fast = max_weight_matching(&m);
        let slow = brute_force_matching(&m)?;
        assert_eq!(fast, slow);
        println!("{name:>6}: edges {:?} total {}", fast.edges, fast.total);
    }
    Ok(())
}
