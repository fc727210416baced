//! Shape-invariant superpotentials of supersymmetric quantum mechanics:
//! a small symbolic core, the catalog of known superpotentials, shape
//! invariance and spectral checks, the ħ-series extension of Morse and the
//! graph of transformations connecting every entry.

pub mod catalog;
pub mod expr;
pub mod extension;
pub mod grid;
pub mod report;
pub mod spectral;
pub mod susy;
pub mod transnet;

pub use catalog::{Catalog, CatalogError, Class, Superpotential};
pub use expr::{parse, Bindings, DomainSampler, Expr, ExprError};
pub use extension::{ExtensionError, ExtensionParams};
pub use grid::{Grid, GridError, GridFunction};
pub use spectral::SpectralError;
pub use susy::SusyError;
pub use transnet::{TransformEdge, TransnetError};

/// Any error raised by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Susy(#[from] SusyError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Transnet(#[from] TransnetError),
}
