//! Multi-threaded drivers. Work is split per campaign instance or per grid
//! point; results come back in input order, so output does not depend on
//! scheduling.

use bosecanon_core::numerics::Backend;
use bosecanon_core::occupancy::{check_beta_grid, condensate_point, CurvePoint};
use bosecanon_core::spectrum::{InverseTemperature, LevelSet};
use bosecanon_core::verify::{run_instance, CampaignConfig, CampaignSummary, Verifier};
use bosecanon_core::{Error, Result};
use rayon::prelude::*;

pub fn run_campaign<S: Backend>(config: &CampaignConfig) -> Result<CampaignSummary> {
    run_campaign_with(config, &Verifier::<S>::new().with_limits(config.limits))
}

pub fn run_campaign_with<S: Backend>(
    config: &CampaignConfig,
    verifier: &Verifier<S>,
) -> Result<CampaignSummary> {
    config.validate()?;
    let per_instance = (0..config.instances)
        .into_par_iter()
        .map(|id| run_instance(config, id, verifier))
        .collect::<Result<Vec<_>>>()?;
    Ok(CampaignSummary::new(
        config.seed,
        config.instances,
        per_instance.into_iter().flatten().collect(),
    ))
}

pub fn condensate_curve<S: Backend>(
    levels: &LevelSet,
    n: usize,
    grid: &[InverseTemperature],
) -> Result<Vec<CurvePoint<S>>> {
    check_beta_grid(grid)?;
    if n == 0 {
        return Err(Error::NoParticles);
    }
    grid.par_iter()
        .map(|beta| condensate_point(levels, n, beta))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use bosecanon_core::numerics::Rational;

    #[test]
    fn parallel_campaign_matches_sequential() {
        let config = CampaignConfig {
            seed: 5,
            instances: 8,
            max_n: 6,
            ..Default::default()
        };
        let parallel = run_campaign::<Rational>(&config).unwrap();
        let sequential = bosecanon_core::verify::run_campaign::<Rational>(&config).unwrap();
        assert_eq!(parallel, sequential);
    }
}
