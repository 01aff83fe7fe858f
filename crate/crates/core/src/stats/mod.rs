//! Condensate observables, limit laws and goodness-of-fit machinery.

mod condensate;
mod gof;
mod laws;
mod tail;

pub use condensate::{condensate_stats, CondensateStats};
pub use gof::{
    chi_square_gof, chi_square_two_sample, chi_square_sf, empirical_quantile, gamma_cdf, ks_distance,
    normal_cdf, ChiSquare, GammaParams,
};
pub use laws::{
    fitness_law, fluctuation_regime, kappa, rank_law, scale_fluctuations, symmetry_breaking,
    theorem_laws, FluctuationRegime, FluctuationResult, SymmetryBreaking, TheoremLaws,
};
/// `Γ(x)`.
pub use statrs::function::gamma::gamma as gamma_function;
pub use tail::{hill_estimator, u_diag, v_diag};
