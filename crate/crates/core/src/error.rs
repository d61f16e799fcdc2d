use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("ground set must be non-empty")]
    EmptyGroundSet,
    #[error("multiset has {got} elements, expected uniformity {expected}")]
    WrongUniformity { expected: u32, got: u32 },
    #[error("multiset lives on [{got}], pattern ground set is [{expected}]")]
    GroundSetMismatch { expected: usize, got: usize },
    #[error("element {element} is outside the ground set [{m}]")]
    ElementOutOfRange { element: usize, m: usize },
    #[error("multiset elements must be listed in non-decreasing order")]
    UnsortedMultiset,
    #[error("duplicate multiset {0:?} in pattern")]
    DuplicateMultiset(Vec<u32>),
    #[error("uniformity must be at least {min}, got {got}")]
    UniformityTooSmall { min: u32, got: u32 },
    #[error("vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("vertex {0} is not covered by the partition")]
    VertexOutsidePartition(usize),
    #[error("edge must consist of distinct vertices")]
    RepeatedVertex,
    #[error("not a point of the simplex: {0}")]
    NotOnSimplex(String),
    #[error("n = {n} is too small to realize the requested part fractions")]
    TooSmall { n: usize },
    #[error("grid certification supports at most {max} variables, got {got}")]
    TooManyVariables { max: usize, got: usize },
    #[error("invalid composition {parts:?}: {reason}")]
    InvalidComposition { parts: Vec<u32>, reason: &'static str },
    #[error("compositions have different shapes (r, s) = {left:?} vs {right:?}")]
    ShapeMismatch { left: (u32, usize), right: (u32, usize) },
    #[error("member set is not down-closed: {0:?} is missing")]
    NotDownClosed(Vec<u32>),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
