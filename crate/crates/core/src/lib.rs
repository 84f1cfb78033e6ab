//! Waveguide QED of a single qubit coupled to a discretized transmission
//! line, simulated with matrix product states.

pub mod circuit;
pub mod ed;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod mps;
pub mod observables;
pub mod propagate;

pub use error::{Error, Result};
pub use linalg::C64;
pub use mps::{CompressionParams, MpoOperator, MpoTensor, MpsState, SiteTensor};
pub use model::{ChainSpec, CouplingKind, ModeBasis, SpectralFit, SpinBosonModel};
