//! Extraction of ordered geographic trajectories from narrative text.
//!
//! The pipeline cleans a narrative ([`textprep`]), cuts it into single- or
//! multi-word tokens, joins the tokens with a GeoNames-derived
//! [`gazetteer`], resolves homonyms and aliases with a locality window
//! ([`disambiguator`]) and emits the route as GeoJSON and a static map
//! ([`trajectory`]). [`evaluation`] scores the four extraction methods
//! against ground-truth routes.

pub mod cli;
pub mod disambiguator;
pub mod evaluation;
pub mod gazetteer;
pub mod pipeline;
pub mod textprep;
pub mod trajectory;

pub use disambiguator::{AugmentedToken, DisambiguationConfig, Fallback, ResolvedPlace};
pub use gazetteer::{Gazetteer, LocationRecord};
pub use pipeline::{Method, Pipeline};
pub use textprep::{Lexicon, Narrative, Token};
pub use trajectory::Trajectory;
