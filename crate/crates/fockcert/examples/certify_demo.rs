//! End-to-end tour: generate Fock distributions for a few state
//! families, certify nonclassicality, and decompose a classical triple.

use fockcert::{certify, decide, decompose, CertifyOptions, StateFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let options = CertifyOptions::default();

    for (label, family) in [
        ("noisy single photon, mu = 0.2", StateFamily::NoisyFock { k: 1, mu: 0.2 }),
        ("thermal, mu = 1.0", StateFamily::Thermal { mu: 1.0 }),
        (
            "photon-added coherent, mu = 1.5, l = 2",
            StateFamily::BosonAddedCoherent { mu: 1.5, ell: 2 },
        ),
    ] {
        let dist = family.distribution(6)?;
        let report = certify(&dist, &options)?;
        println!("{label}:");
        println!("  nonclassical = {}", report.nonclassical);
        let shown: Vec<&str> = report.witnesses.iter().take(6).map(|s| s.as_str()).collect();
        println!("  witnesses    = {} total, first {:?}", report.witnesses.len(), shown);
    }

    let (p0, p1, p2) = (0.3, 0.2, 0.1);
    let verdict = decide(p0, p1, p2)?;
    println!("triple ({p0}, {p1}, {p2}): k1 = {:.6}, kinf2 = {:.6}, classical = {}",
             verdict.k1, verdict.kinf2, verdict.classical);
    let d = decompose(p0, p1, p2)?;
    println!("  decomposition: {}", d.to_json());
    let rec = d.reconstruct();
    println!("  reconstruction: ({:.12}, {:.12}, {:.12})", rec[0], rec[1], rec[2]);

    let check = fockcert::cross_validate(p0, p1, p2, 2000)?;
    println!("  membership cross-check: {}", serde_json::to_string(&check)?);
    Ok(())
}
