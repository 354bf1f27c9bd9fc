//! Chart-level decision procedure for the dimension of the space of
//! conservation laws, with the normalizing transformations it uses.

mod decide;
mod invert;
mod normalize;
mod potential;
mod transform;

use thiserror::Error;

use crate::claws::ClawsError;
use crate::jet::JetError;

pub use decide::{
    canonical_forms, decide, CanonicalForms, ChartStep, ClassificationReport, DecideOptions, Route, Verdict,
};
pub use normalize::{normalize_char1, normalize_pair, EmittedSystem, Normalization};
pub use potential::{emit_potential_system, PotentialSystem};
pub use transform::{apply_transformation, transform_conserved_vector, ContactTransformation, TransformationKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("degenerate transformation ({0})")]
    DegenerateTransformation(String),
    #[error("cannot re-express in the new chart: {0}")]
    InversionFailure(String),
    #[error("the conserved vector is trivial")]
    TrivialInput,
    #[error("the conservation laws are linearly dependent")]
    DependentLaws,
    #[error("the equation has no divergence form")]
    NoDivergenceForm,
    #[error(transparent)]
    Claws(#[from] ClawsError),
    #[error(transparent)]
    Jet(#[from] JetError),
}
