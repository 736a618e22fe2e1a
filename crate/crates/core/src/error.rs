use thiserror::Error;

/// Failures raised by the permutation-group engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("image array is not a bijection on {degree} points")]
    NotABijection { degree: usize },
    #[error("degree {degree} exceeds the supported maximum of {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("cannot parse cycle notation {text:?}: {reason}")]
    CycleSyntax { text: String, reason: String },
    #[error("generator has degree {found}, expected {expected}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("group order exceeds the configured bound of {bound}")]
    SizeBoundExceeded { bound: usize },
    #[error("element {0} is not in the group")]
    ElementNotInGroup(String),
    #[error("{0} is not prime")]
    NotPrime(u32),
}

/// Failures raised by partial-group queries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartialGroupError {
    #[error("word {0:?} is not in the domain")]
    NotInDomain(Vec<u32>),
    #[error("word {0:?} is longer than the enumerated domain covers")]
    DomainUnknown(Vec<u32>),
    #[error("element {x} is not in D({g}); conjugate undefined")]
    NotConjugatable { x: u32, g: u32 },
    #[error("subset is not a partial subgroup: {0}")]
    NotAPartialSubgroup(String),
    #[error("element id {0} out of range")]
    NoSuchElement(u32),
    #[error("structure is inconsistent: {0}")]
    Inconsistent(String),
}

/// Failures raised while building or querying localities.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalityError {
    #[error("object set is not closed under fusion and overgroups: {0}")]
    GammaNotClosed(String),
    #[error("object set is empty")]
    EmptyObjectSet,
    #[error("object set is not a subset of the current objects: {0}")]
    NotASubObjectSet(String),
    #[error("subgroup {0} is not an object")]
    ObjectNotInDelta(String),
    #[error("no decomposition of element {element} within word length {bound}")]
    DecompositionNotFound { element: u32, bound: usize },
    #[error("Sylow subgroup has {0} elements; at most 64 are supported")]
    SylowTooLarge(usize),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Partial(#[from] PartialGroupError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

/// Failures raised by fusion-system operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FusionError {
    #[error("seed map is not an injective homomorphism: {0}")]
    NonInjectiveSeed(String),
    #[error("fusion system is not saturated: {0}")]
    NotSaturated(String),
    #[error("support is not strongly closed: {0}")]
    SupportNotStronglyClosed(String),
    #[error("subsystem is not saturated: {0}")]
    SubsystemNotSaturated(String),
    #[error("subgroup is not fully normalized: {0}")]
    NotFullyNormalized(String),
    #[error("subsystem enumeration exceeded the bound of {0} candidates without a model")]
    NoModelAndBoundExceeded(usize),
    #[error("model does not fit the fusion system: {0}")]
    ModelMismatch(String),
}

/// Failures raised by expansions, quotients and products.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("expansion hypothesis ({clause}) violated: {witness}")]
    HypothesisViolation { clause: String, witness: String },
    #[error("maps disagree on N_L(R): {0}")]
    AgreementFailure(String),
    #[error("image of R is not an object of the target: {0}")]
    ImageObjectMissing(String),
    #[error("not a partial normal subgroup: {0}")]
    NotPartialNormal(String),
    #[error("construction produced an inconsistent structure: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Locality(#[from] LocalityError),
    #[error(transparent)]
    Partial(#[from] PartialGroupError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

/// Failures raised by the correspondence layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorrespondenceError {
    #[error("locality has {size} elements; enumeration bound is {bound}")]
    SizeBoundExceeded { size: usize, bound: usize },
    #[error("object set is outside the range F^q <= Delta <= F^s")]
    DeltaRegimeUnsupported,
    #[error("image subsystem is not normal: {0}")]
    ImageNotNormal(String),
    #[error("enumeration audit disagrees: {0}")]
    AuditMismatch(String),
    #[error("no partial normal subgroup realizes the subsystem over {0}")]
    LiftNotFound(String),
    #[error("localities are not a restriction pair: {0}")]
    NotARestrictionPair(String),
    #[error(transparent)]
    Locality(#[from] LocalityError),
    #[error(transparent)]
    Partial(#[from] PartialGroupError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Malformed group files and dumps.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("missing field `{0}`")]
    Missing(&'static str),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("dump is inconsistent: {0}")]
    Dump(String),
}
