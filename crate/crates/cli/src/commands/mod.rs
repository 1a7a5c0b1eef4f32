mod betaconst;
mod diagrams;
mod moment;
mod simulate;
mod verify;

pub use betaconst::{betaconst, BetaconstArgs};
pub use diagrams::{diagrams, DiagramsArgs};
pub use moment::{moment, MomentArgs};
pub use simulate::{simulate, SimulateArgs};
pub use verify::{verify, Suite, VerifyArgs};

use critshe::mollifier::{beta_phi, pair_profile, Mollifier, RadialGrid};

use crate::error::CliError;

/// `β_φ` with the change under a doubled radial grid as its error.
pub(crate) fn beta_phi_estimate(m: &Mollifier, intervals: usize) -> Result<(f64, f64), CliError> {
    let coarse = beta_phi(&pair_profile(m, &RadialGrid { intervals })?)?;
    let fine = beta_phi(&pair_profile(m, &RadialGrid { intervals: 2 * intervals })?)?;
    Ok((fine, (fine - coarse).abs()))
}
