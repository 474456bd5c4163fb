//! Recursive HNN towers `G_n`, `H_n` built from the palindromic automorphism
//! `φ(ξ) = ξνξ, φ(ν) = ξ` of the free group of rank two.
//!
//! The crate constructs the presentations of the tower, explicit van Kampen
//! diagrams and sphere complexes at small scale, exact area/volume inventories
//! of the embedded spheres and balls at any scale the integer budget allows,
//! corridor rewriting inside the edge groups, and a symbolic calculus of the
//! function classes `exp^n(x^a)` that make up the Dehn-function column.
//!
//! Modules, bottom-up:
//!
//! * [`words`] — free-group words over structured alphabets.
//! * [`growth`] — `φ` as a substitution, lengths `L(N) = |φ^N(ξ)|`, towers `w_n(r)`.
//! * [`presentations`] — generators, relators and edge groups of each level.
//! * [`complexes`] — labelled cell complexes and the `Δ`, `Θ`, slab constructors.
//! * [`balls`] — Type I/II moves, sphere and ball inventories, explicit spheres.
//! * [`distortion`] — corridor rewriting and area-distortion witnesses.
//! * [`dehncalc`] — symbolic composition and normalisation of `exp^n(x^a)`.
//! * [`config`], [`exec`] — budgets, environment overrides and the execution mode.

pub mod balls;
pub mod complexes;
pub mod config;
pub mod dehncalc;
pub mod distortion;
pub mod exec;
pub mod growth;
pub mod presentations;
pub mod words;

pub use config::Config;
pub use words::{Gen, GenVector, Letter, Word};

/// Version tag carried by every JSON document the crate emits.
pub const SCHEMA_VERSION: u32 = 1;

/// Umbrella error for callers that combine several modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Word(#[from] words::WordError),
    #[error(transparent)]
    Growth(#[from] growth::GrowthError),
    #[error(transparent)]
    Presentation(#[from] presentations::PresentationError),
    #[error(transparent)]
    Complex(#[from] complexes::ComplexError),
    #[error(transparent)]
    Ball(#[from] balls::BallError),
    #[error(transparent)]
    Distortion(#[from] distortion::DistortionError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
}

impl Error {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Word(e) => e.kind(),
            Error::Growth(e) => e.kind(),
            Error::Presentation(e) => e.kind(),
            Error::Complex(e) => e.kind(),
            Error::Ball(e) => e.kind(),
            Error::Distortion(e) => e.kind(),
            Error::Config(_) => "ConfigError",
        }
    }
}
