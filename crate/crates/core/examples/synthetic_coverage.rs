//! The repetitive bound on gaps with a known distribution: how often does
//! the maximum of R uniform draws reach the 99% quantile?

use gapcert::percentile::confidence_of;
use gapcert::repetitive::{build_certificate_from, UniformGaps};

fn main() -> gapcert::Result<()> {
    let source = UniformGaps { lo: 0.0, hi: 1.0 };
    let q = source.quantile(0.99);
    for r in [50, 100, 230, 459, 1000] {
        let runs = 1000;
        let mut hits = 0;
        for seed in 0..runs {
            let (cert, _) = build_certificate_from(&source, r, 1, 0.01, seed)?;
            hits += (cert.gamma_star >= q) as u32;
        }
        println!(
            "R = {r:>4}: {:.3} of certificates reach the quantile (theory {:.3})",
            hits as f64 / runs as f64,
            confidence_of(0.01, r)?
        );
    }
    Ok(())
}
