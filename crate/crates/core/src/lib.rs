//! Exact tools for compact Ramsey-type questions on finite metric structures:
//! embedding spaces, measures on them, linear programming with certificates,
//! Wasserstein oscillation bounds, and group-level finite criteria.

pub mod embeddings;
pub mod groups;
pub mod lp;
pub mod measures;
pub mod minimax;
pub mod ramsey;
pub mod scalar;
pub mod structures;
pub mod text;
pub mod transport;

pub use scalar::Scalar;

pub type Rational = num_rational::BigRational;
pub type Structure = structures::MetricStructure<Rational>;
pub type Space = embeddings::EmbeddingSpace<Rational>;
pub type RationalMeasure = measures::Measure<Rational>;
pub type RationalColoring = measures::Coloring<Rational>;
pub type RationalLp = lp::LinearProgram<Rational>;
