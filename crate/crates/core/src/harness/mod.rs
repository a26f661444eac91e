//! Monte Carlo checks of the bound against sampled permutations, and
//! spectrum dumps.

mod spectrum;
mod trials;

pub use spectrum::{
    dump_spectrum, modulus, power_norm, restricted_spectrum, second_eigmod, EigMethod,
    PowerNormEstimate, SpectrumDump, POWER_NORM_MAX_ELL, POWER_NORM_TOL,
};
pub use trials::{
    default_ell, run_trials, trial_matrix, trial_seed, EpsilonConfig, EpsilonExceedance, Mixture,
    TrialConfig, TrialReport, SCHEMA_VERSION,
};
