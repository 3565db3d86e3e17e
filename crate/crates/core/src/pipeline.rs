//! The four extraction methods, end to end from cleaned text to trajectory.

use std::fmt;
use std::str::FromStr;

use crate::disambiguator::{
    augment, disambiguate, DisambiguationConfig, DisambiguationError, ResolvedPlace,
};
use crate::gazetteer::Gazetteer;
use crate::textprep::{tag_geospatial, tokenize_mwt, tokenize_st, Lexicon, Narrative, Token};
use crate::trajectory::{build_trajectory, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Significant-entity tokens, tagger-selected, no disambiguation.
    St,
    /// Multi-word tokens, tagger-selected, no disambiguation.
    Mwt,
    /// Significant-entity tokens joined with the gazetteer and disambiguated.
    StAugDisambig,
    /// Multi-word tokens joined with the gazetteer and disambiguated.
    MwtAugDisambig,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Self::St,
        Self::Mwt,
        Self::StAugDisambig,
        Self::MwtAugDisambig,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::St => "ST",
            Self::Mwt => "MWT",
            Self::StAugDisambig => "ST+Aug+DisAmbig",
            Self::MwtAugDisambig => "MWT+Aug+DisAmbig",
        }
    }

    /// Whether the method joins every token with the gazetteer and resolves
    /// countries, rather than relying on the tagger.
    pub fn is_augmented(self) -> bool {
        matches!(self, Self::StAugDisambig | Self::MwtAugDisambig)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase().replace(' ', "");
        Self::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == wanted)
            .ok_or_else(|| {
                format!("unknown method {s:?} (expected one of ST, MWT, ST+Aug+DisAmbig, MWT+Aug+DisAmbig)")
            })
    }
}

/// Result of running one method over one narrative.
#[derive(Debug, Clone)]
pub struct NarrativeRun {
    pub trajectory: Trajectory,
    /// Tokens that produced no place (not probed, or no gazetteer match).
    pub rejected: Vec<Token>,
}

/// Shared, read-only inputs for running the methods.
#[derive(Debug, Clone)]
pub struct Pipeline<'a> {
    pub gazetteer: &'a Gazetteer,
    pub lexicon: &'a Lexicon,
    pub config: DisambiguationConfig,
}

impl<'a> Pipeline<'a> {
    pub fn new(
        gazetteer: &'a Gazetteer,
        lexicon: &'a Lexicon,
        config: DisambiguationConfig,
    ) -> Self {
        Self {
            gazetteer,
            lexicon,
            config,
        }
    }

    pub fn tokens(&self, method: Method, clean_text: &str) -> Vec<Token> {
        match method {
            Method::St | Method::StAugDisambig => tokenize_st(clean_text),
            Method::Mwt => tag_geospatial(clean_text, tokenize_mwt(clean_text, self.lexicon)),
            Method::MwtAugDisambig => tokenize_mwt(clean_text, self.lexicon),
        }
    }

    /// Resolved places in mention order, before adjacent repeats collapse.
    pub fn places(
        &self,
        method: Method,
        tokens: &[Token],
    ) -> Result<Vec<ResolvedPlace>, DisambiguationError> {
        let aug = augment(tokens, self.gazetteer, !method.is_augmented());
        if method.is_augmented() {
            return disambiguate(&aug, self.gazetteer, &self.config);
        }
        // Baselines report the surface form at its top-ranked candidate.
        Ok(aug
            .into_iter()
            .map(|a| {
                let top = &a.candidates[0];
                ResolvedPlace {
                    name: a.token.text,
                    country: top.country.clone(),
                    longitude: top.longitude,
                    latitude: top.latitude,
                    ordinal: a.token.ordinal,
                }
            })
            .collect())
    }

    pub fn run(
        &self,
        method: Method,
        narrative: &Narrative,
    ) -> Result<NarrativeRun, DisambiguationError> {
        let tokens = self.tokens(method, &narrative.clean_text);
        let places = self.places(method, &tokens)?;
        let mut emitted = places.iter().map(|p| p.ordinal).peekable();
        let rejected = tokens
            .into_iter()
            .filter(|t| {
                while emitted.next_if(|&o| o < t.ordinal).is_some() {}
                emitted.peek() != Some(&t.ordinal)
            })
            .collect();
        Ok(NarrativeRun {
            trajectory: build_trajectory(&narrative.id, places),
            rejected,
        })
    }
}
