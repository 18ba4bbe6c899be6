//! Exact references for the stochastic solver.

mod analytic;
mod ctmc;
mod expm;
mod fit;

pub use analytic::{analytic_bright_dark, low_power_decay_curve, BrightDark};
pub use ctmc::{ctmc_emission_probability, ClassProbabilities, CtmcModel};
pub use expm::expm;
pub use fit::{fit_exponentials, BiExponential, ExpFit, FitOrder, SingleExponential};
