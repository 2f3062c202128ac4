use thiserror::Error;

use crate::report::{Report, Witness};

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("determinant is not constant: {0}")]
    NonConstantDeterminant(String),
    #[error("determinant is zero")]
    ZeroDeterminant,
    #[error("affine map is singular")]
    SingularMap,
    #[error("connection is not flat: {0}")]
    NotFlat(Box<Witness>),
    #[error("check failed:\n{0}")]
    CheckFailed(Box<Report>),
    #[error("algebroid is not an action algebroid of the required kind")]
    NotActionAlgebroid,
    #[error("curvature does not match -i*omega: {0}")]
    CurvatureMismatch(Box<Witness>),
    #[error("moment map does not generate the action: {0}")]
    MomentMapMismatch(Box<Witness>),
    #[error("moment map does not preserve brackets: {0}")]
    PoissonBracketMismatch(Box<Witness>),
    #[error("2-form is degenerate or not constant antisymmetric")]
    DegenerateForm,
    #[error("base operator is not an affine pullback")]
    NonAffineBaseMap,
    #[error("fiber data is not invertible: {0}")]
    NonInvertibleFiberData(String),
    #[error("relator `{word}` does not act as the identity: {witness}")]
    RelatorFailure { word: String, witness: Box<Witness> },
    #[error("elements are not composable")]
    NotComposable,
    #[error("invalid descriptor field `{field}`: {msg}")]
    Descriptor { field: String, msg: String },
    #[error("anchor condition violated: {0}")]
    AnchorMismatch(Box<Witness>),
}

impl Error {
    pub fn descriptor(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Descriptor { field: field.into(), msg: msg.into() }
    }

    pub fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub fn chart(msg: impl Into<String>) -> Self {
        Error::ChartMismatch(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
