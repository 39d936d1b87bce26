//! Model curves, fit objective and hyperparameter estimation.

mod crossover;
mod curve;
mod fit;
mod objective;
pub mod regress;
mod simplex;

pub use crossover::{crossover_fit, CrossoverFit};
pub use curve::{model_curve, CurvePoint};
pub use fit::{fit_parameters, latin_hypercube_starts, Bounds, FitConfig, FitResult, StartOutcome};
pub use objective::{objective, objective_against, summarize, CurveSummary, DataSetPoint};
pub use simplex::{minimize, SimplexOptions, SimplexResult};
