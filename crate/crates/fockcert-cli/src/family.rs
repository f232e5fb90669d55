//! Building state families from flags and overriding swept parameters.

use crate::opts::FamilyArgs;
use fockcert::StateFamily;

fn need(name: &str, value: Option<f64>, family: &str) -> Result<f64, String> {
    value.ok_or_else(|| format!("family {family} needs --{name}"))
}

/// Construct the family named by the merged flags.
pub fn build(args: &FamilyArgs) -> Result<StateFamily, String> {
    let name = args
        .family
        .as_deref()
        .ok_or("missing --family (see --help for the list)")?;
    Ok(match name {
        "coherent" => StateFamily::Coherent {
            mu: need("mu", args.mu, name)?,
        },
        "fock" => StateFamily::Fock {
            n: args
                .n
                .or(args.k)
                .ok_or("family fock needs --n (the Fock index)")?,
        },
        "thermal" => StateFamily::Thermal {
            mu: need("mu", args.mu, name)?,
        },
        "noisy-fock" => StateFamily::NoisyFock {
            k: args
                .k
                .or(args.n)
                .ok_or("family noisy-fock needs --k (the Fock index)")?,
            mu: need("mu", args.mu, name)?,
        },
        "boson-added-coherent" => StateFamily::BosonAddedCoherent {
            mu: need("mu", args.mu, name)?,
            ell: args.ell.unwrap_or(1),
        },
        "prob-boson-added-coherent" | "mixed-boson-added-poisson" => {
            StateFamily::ProbBosonAddedCoherent {
                mu: need("mu", args.mu, name)?,
                p: need("p", args.p, name)?,
            }
        }
        "boson-added-thermal" => StateFamily::BosonAddedThermal {
            mu: need("mu", args.mu, name)?,
        },
        "mixed-boson-added-thermal" => StateFamily::MixedBosonAddedThermal {
            mu: need("mu", args.mu, name)?,
            p: need("p", args.p, name)?,
        },
        "thermally-averaged-fock" => StateFamily::ThermallyAveragedFock1 {
            mu: need("mu", args.mu, name)?,
        },
        "squeezed-thermal" => StateFamily::SqueezedThermal {
            mu: need("mu", args.mu, name)?,
            xi: need("xi", args.xi, name)?,
        },
        other => return Err(format!("unknown family {other:?}")),
    })
}

/// Copy of the family with one continuous parameter replaced.
pub fn with_param(family: &StateFamily, name: &str, value: f64) -> Result<StateFamily, String> {
    use StateFamily::*;
    let unsupported = || {
        Err(format!(
            "family {} has no sweepable parameter {name:?}",
            family.label()
        ))
    };
    Ok(match (family, name) {
        (Coherent { .. }, "mu") => Coherent { mu: value },
        (Thermal { .. }, "mu") => Thermal { mu: value },
        (NoisyFock { k, .. }, "mu") => NoisyFock { k: *k, mu: value },
        (BosonAddedCoherent { ell, .. }, "mu") => BosonAddedCoherent {
            mu: value,
            ell: *ell,
        },
        (ProbBosonAddedCoherent { p, .. }, "mu") => ProbBosonAddedCoherent {
            mu: value,
            p: *p,
        },
        (ProbBosonAddedCoherent { mu, .. }, "p") => ProbBosonAddedCoherent {
            mu: *mu,
            p: value,
        },
        (BosonAddedThermal { .. }, "mu") => BosonAddedThermal { mu: value },
        (MixedBosonAddedThermal { p, .. }, "mu") => MixedBosonAddedThermal {
            mu: value,
            p: *p,
        },
        (MixedBosonAddedThermal { mu, .. }, "p") => MixedBosonAddedThermal {
            mu: *mu,
            p: value,
        },
        (ThermallyAveragedFock1 { .. }, "mu") => ThermallyAveragedFock1 { mu: value },
        (SqueezedThermal { xi, .. }, "mu") => SqueezedThermal { mu: value, xi: *xi },
        (SqueezedThermal { mu, .. }, "xi") => SqueezedThermal { mu: *mu, xi: value },
        _ => return unsupported()?,
    })
}
