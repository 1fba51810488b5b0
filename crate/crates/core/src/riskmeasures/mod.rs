//! Return risk measures on finite probability spaces.

mod axioms;
mod dual;
mod measures;
mod orlicz;
mod space;

pub use axioms::{
    axiom_check, gg_convexity_suite, replay, AxiomConfig, AxiomReport, Counterexample, Flag, SuiteReport,
};
pub use dual::{
    dual_representation_eval, dual_representation_eval_with, entropy_dual_objective, entropy_dual_pnorm,
    entropy_duality_gap, rho_gg_conjugate, rho_gg_conjugate_with, ConjugateCertificate, ConjugateSearch,
    DualRepresentation, EntropyDual, RhoConjugate, DIVERGENCE_LEVEL,
};
pub use measures::{
    avar, evaluate, geometric_mean, geometric_mean_under, log_risk, p_norm, MonetaryRisk, RiskMeasureSpec,
};
pub use orlicz::{
    orlicz_premium, orlicz_premium_detailed, OrliczPremium, OrliczSpec, OrliczTable, ORLICZ_MAX_ITER, ORLICZ_TOL,
};
pub use space::{FiniteProbSpace, PositiveRandomVariable, ScenarioMeasure, PROB_SUM_TOL};
