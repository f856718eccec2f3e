//! Correlation-gated driver behavior modelling for intersection trajectories.
//!
//! The crate turns synchronized multi-agent trajectory trials into
//! predictor/target design matrices, scores every traffic participant's
//! feature group by its first canonical correlation with the host vehicle's
//! behavior signal, gates groups against a correlation threshold, and
//! predicts the behavior signal with Gaussian mixture regression (GMR) and
//! Gaussian process regression (GPR).
//!
//! Module map:
//!
//! * [`dataset`] — trial ingestion (CSV), a deterministic scenario
//!   synthesizer with known ground-truth relevance, windowing into lagged
//!   design matrices, and standardization.
//! * [`cca`] — canonical correlation analysis via covariance whitening and
//!   SVD, plus threshold-based feature-group selection.
//! * [`gmm`] — Gaussian mixture fitting by EM (k-means++ seeding) and GMR
//!   prediction by mixture-weighted Gaussian conditioning.
//! * [`gpr`] — Gaussian process regression with an exponential kernel,
//!   Cholesky-based posterior, and gradient descent on the negative log
//!   marginal likelihood.
//! * [`pipeline`] — the experiment harness: seeded trial-level train/test
//!   splits, the method x threshold comparison grid, RMSE evaluation, and
//!   CSV/JSON/SVG report emission.
//!
//! Runnable walkthroughs for each capability live in `examples/`; the
//! `ccadrive` binary exposes the same pipeline as `synth`, `analyze`,
//! `run`, and `report` subcommands.

pub mod cca;
pub mod dataset;
pub mod gmm;
pub mod gpr;
pub mod pipeline;

pub use dataset::{
    build_design_matrices, load_trials, standardize, synthesize_scenario, write_trials, Channel,
    DesignMatrices, FeatureFrame, FeatureGroup, ParticipantKind, Scenario, SynthConfig,
    TargetSpec, Trial,
};
