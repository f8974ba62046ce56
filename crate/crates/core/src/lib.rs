//! Inscribed rectangles and cyclic quadrilaterals on Fourier Jordan curves,
//! found as intersection points of two tori in C^2.

pub mod cli;
pub mod curve;
pub mod error;
pub mod geometry;
pub mod intersection;
pub mod residual;
pub mod solver;
pub mod svg;

pub use curve::{EmbeddingVerdict, FourierCurve};
pub use error::{PegError, Result};
pub use geometry::{ComplexPair, Peg, PegKind, QuadData};
pub use intersection::{Certificate, TopologyBlock};
pub use residual::{Problem, RectAngle, TorusQuadruple};
pub use solver::{solve, PegOrbit, Solution, SolveConfig, SolveReport};
