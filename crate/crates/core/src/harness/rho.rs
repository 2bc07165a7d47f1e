//! Closed-form correlation references for the measured ρ̂ trajectories.

use super::turbo::TurboRunner;
use crate::analysis::{ideal_bidfe_snr, noise_variance_for_snr_db};
use crate::bidfe::{analytic_rho, RhoMode};
use crate::dfe::compute_tiv_filters;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoReference {
    pub snr_db: f64,
    pub perfect_tv: f64,
    pub perfect_tiv: f64,
    pub no_apriori: f64,
    /// Infinite-length value.
    pub rho_inf: f64,
}

pub fn rho_reference(runner: &TurboRunner, snr_db: f64) -> Result<RhoReference> {
    let n0 = noise_variance_for_snr_db(snr_db);
    let (mf, mb) = runner.dfe_matrices();
    let ff = compute_tiv_filters(mf, n0)?;
    let fb = compute_tiv_filters(mb, n0)?;
    let (rho_inf, _) = ideal_bidfe_snr(&runner.config().channel, 1.0, n0)?;
    Ok(RhoReference {
        snr_db,
        perfect_tv: analytic_rho(RhoMode::PerfectTv, mf, &ff, mb, &fb),
        perfect_tiv: analytic_rho(RhoMode::PerfectTiv, mf, &ff, mb, &fb),
        no_apriori: analytic_rho(RhoMode::NoApriori, mf, &ff, mb, &fb),
        rho_inf,
    })
}
