use thiserror::Error;

/// Errors raised by the geometry, flow and experiment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("log map undefined for antipodal points")]
    AntipodalPair,
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("curve is not simple")]
    NonSimpleCurve,
    #[error("no offset in the bracket keeps the curve simple")]
    OffsetMakesNonSimple,
    #[error("area 2π not attained for offsets |s| <= π/4")]
    RootNotBracketed,
    #[error("moved polygon self-intersects after flow step")]
    NonSimpleAfterStep,
    #[error("degenerate great-circle fit: no preferred plane")]
    DegenerateFit,
    #[error("vertex {0} lies on the band boundary")]
    BandDegenerate(usize),
    #[error("degenerate (tangential or coplanar) intersection between edges {0} and {1}")]
    DegenerateIntersection(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("curve generation failed: {0}")]
    GenerationFailed(String),
    #[error("curve is not star-shaped about its fitted pole")]
    NotStarShaped,
    #[error("chord meets the curve away from its endpoints")]
    ChordTouchesCurve,
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
