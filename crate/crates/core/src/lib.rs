//! Sum-of-squares certificates for nonnegative ternary quartics.
//!
//! The crate builds Gram-matrix representations `p = v^T A v` over the
//! monomial vector `v = (x^2, xy, xz, y^2, yz, z^2)`, searches the Gram
//! spectrahedron with a small interior-point SDP solver, and decomposes
//! elements of the moment cone `PSD_6 ∩ W^perp` into weighted rank-one
//! moment matrices `v(x,y,z) v(x,y,z)^T`. Dual certificates of
//! infeasibility are turned into explicit points where the quartic is
//! negative.

pub mod config;
pub mod cone;
pub mod error;
pub mod gram;
pub mod pipeline;
pub mod quartic;
pub mod sdp;
pub mod symkernel;

pub use config::Tolerances;
pub use cone::{decompose, reconstruct, Atom, AtomicMeasure};

pub use error::{Error, Result};

pub use pipeline::{sos_representation, squares_from_gram, verify, AnalysisReport, SosCertificate, Verdict, VerifyReport};
pub use sdp::{find_gram, find_rank3, negativity_witness, GramResult, InfeasibilityCertificate, SdpOptions};
pub use quartic::{expand_squares, gram_to_quartic, monomial_vector, QuadraticForm, TernaryQuartic};

pub use symkernel::{FactorMatrix, SymMatrix};
