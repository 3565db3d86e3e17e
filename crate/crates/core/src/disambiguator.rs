//! Augmentation join and locality-window toponym disambiguation.
//!
//! Tokens are joined with the gazetteer in narrative order. Tokens whose
//! candidates all lie in one country are resolved immediately; aliases that
//! pin one country resolve to their formal name. The remaining homonyms take
//! the country of the nearest resolved neighbor inside the window, preferring
//! the prior place over the next one, provided one of their own candidates
//! lies in that country. Sweeps repeat until nothing changes, then an
//! optional fallback resolves the rest.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::gazetteer::{Gazetteer, LocationRecord};
use crate::textprep::Token;

#[derive(Debug, thiserror::Error)]
pub enum DisambiguationError {
    #[error("token {token:?} resolved to {name:?}/{country} which is not in the gazetteer")]
    Inconsistent {
        token: String,
        name: String,
        country: String,
    },
}

/// A narrative token joined with its gazetteer candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedToken {
    pub token: Token,
    pub candidates: Vec<LocationRecord>,
    pub resolved_country: Option<String>,
    pub homonym_count: u32,
    /// Formal name when the token is an alias that pins a single country.
    pub synonym_canonical: Option<String>,
}

impl AugmentedToken {
    fn has_candidate_in(&self, country: &str) -> bool {
        self.candidates.iter().any(|c| c.country == country)
    }

    fn alias_country(&self) -> Option<&str> {
        self.synonym_canonical.as_ref()?;
        self.candidates
            .iter()
            .find(|c| c.is_alias())
            .map(|c| c.country.as_str())
    }
}

/// A fully resolved place in narrative order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedPlace {
    pub name: String,
    pub country: String,
    pub longitude: f64,
    pub latitude: f64,
    /// Ordinal of the token this place was read from.
    pub ordinal: usize,
}

/// What to do with tokens the locality rules could not resolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fallback {
    /// Highest-population candidate, ties broken by country code.
    #[default]
    Population,
    /// First candidate in gazetteer order.
    First,
    /// Drop the token.
    None,
}

impl FromStr for Fallback {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "population" => Ok(Self::Population),
            "first" => Ok(Self::First),
            "none" => Ok(Self::None),
            other => Err(format!(
                "unknown fallback {other:?} (expected population, first or none)"
            )),
        }
    }
}

impl fmt::Display for Fallback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Population => "population",
            Self::First => "first",
            Self::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisambiguationConfig {
    /// Window radius; 1 looks at the immediate neighbors only.
    pub window_k: usize,
    /// Single sweep and no fallback.
    pub paper_strict: bool,
    pub fallback: Fallback,
}

impl Default for DisambiguationConfig {
    fn default() -> Self {
        Self {
            window_k: 1,
            paper_strict: false,
            fallback: Fallback::Population,
        }
    }
}

fn is_capitalized(text: &str) -> bool {
    text.chars()
        .find(|c| c.is_alphabetic())
        .is_some_and(char::is_uppercase)
}

/// Joins tokens with the gazetteer, keeping narrative order and dropping
/// tokens without a match.
///
/// With `use_tags` only tokens tagged as geospatial candidates are probed.
/// Otherwise every capitalized token is probed, whatever its tag.
pub fn augment(tokens: &[Token], g: &Gazetteer, use_tags: bool) -> Vec<AugmentedToken> {
    tokens
        .iter()
        .filter(|t| {
            if use_tags {
                t.is_geospatial_candidate()
            } else {
                is_capitalized(&t.text)
            }
        })
        .filter_map(|token| {
            let candidates = g.lookup(&token.text);
            if candidates.is_empty() {
                return None;
            }
            let homonym_count = candidates
                .iter()
                .map(|c| c.homonym_count)
                .max()
                .unwrap_or(0);
            let alias_countries: BTreeSet<&str> = candidates
                .iter()
                .filter(|c| c.is_alias())
                .map(|c| c.country.as_str())
                .collect();
            let synonym_canonical = (alias_countries.len() == 1)
                .then(|| candidates.iter().find(|c| c.is_alias()))
                .flatten()
                .and_then(|c| c.synonym_canonical.clone());
            let countries: BTreeSet<&str> = candidates.iter().map(|c| c.country.as_str()).collect();
            let resolved_country = (alias_countries.is_empty() && countries.len() == 1)
                .then(|| candidates[0].country.clone());
            Some(AugmentedToken {
                token: token.clone(),
                candidates: candidates.to_vec(),
                resolved_country,
                homonym_count,
                synonym_canonical,
            })
        })
        .collect()
}

/// Countries of the nearest resolved elements within `k` positions before
/// and after `i`.
pub fn window_context(aug: &[AugmentedToken], i: usize, k: usize) -> (Option<&str>, Option<&str>) {
    let prior = (i.saturating_sub(k)..i)
        .rev()
        .find_map(|j| aug[j].resolved_country.as_deref());
    let next = (i + 1..aug.len().min(i + k + 1)).find_map(|j| aug[j].resolved_country.as_deref());
    (prior, next)
}

/// Per-token countries after the locality sweeps and fallback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub countries: Vec<Option<String>>,
    pub sweeps: usize,
    pub fallbacks: usize,
}

fn sweep(work: &mut [AugmentedToken], k: usize) -> bool {
    let n = work.len();
    let mut changed = false;
    for i in 0..n {
        if work[i].resolved_country.is_some() {
            continue;
        }
        let resolved = if let Some(country) = work[i].alias_country() {
            Some(country.to_string())
        } else {
            let (prior, next) = window_context(work, i, k);
            let token = &work[i];
            let pick =
                |c: Option<&'_ str>| c.filter(|c| token.has_candidate_in(c)).map(str::to_string);
            if i == 0 {
                pick(next)
            } else if i == n - 1 {
                pick(prior)
            } else {
                pick(prior).or_else(|| pick(next))
            }
        };
        if resolved.is_some() {
            work[i].resolved_country = resolved;
            changed = true;
        }
    }
    changed
}

/// Runs the locality sweeps to a fixpoint (one sweep in strict mode) and
/// applies the configured fallback.
pub fn resolve_countries(aug: &[AugmentedToken], config: &DisambiguationConfig) -> Resolution {
    let mut work = aug.to_vec();
    let k = config.window_k.max(1);
    let mut sweeps = 0;
    while work.iter().any(|t| t.resolved_country.is_none()) {
        sweeps += 1;
        let changed = sweep(&mut work, k);
        if config.paper_strict || !changed {
            break;
        }
    }

    let mut fallbacks = 0;
    if !config.paper_strict {
        for token in work.iter_mut().filter(|t| t.resolved_country.is_none()) {
            let choice = match config.fallback {
                Fallback::Population => token.candidates.iter().min_by(|a, b| {
                    b.population
                        .cmp(&a.population)
                        .then_with(|| a.country.cmp(&b.country))
                }),
                Fallback::First => token.candidates.first(),
                Fallback::None => None,
            };
            if let Some(record) = choice {
                token.resolved_country = Some(record.country.clone());
                fallbacks += 1;
            }
        }
    }

    Resolution {
        countries: work.into_iter().map(|t| t.resolved_country).collect(),
        sweeps,
        fallbacks,
    }
}

/// Resolves every augmented token to a place with coordinates. Tokens left
/// unresolved (strict mode or `Fallback::None`) are omitted; repeats are
/// kept.
pub fn disambiguate(
    aug: &[AugmentedToken],
    g: &Gazetteer,
    config: &DisambiguationConfig,
) -> Result<Vec<ResolvedPlace>, DisambiguationError> {
    let resolution = resolve_countries(aug, config);
    let mut places = Vec::with_capacity(aug.len());
    for (token, country) in aug.iter().zip(resolution.countries) {
        let Some(country) = country else {
            log::debug!("{:?} left unresolved", token.token.text);
            continue;
        };
        let inconsistent = |name: &str| DisambiguationError::Inconsistent {
            token: token.token.text.clone(),
            name: name.to_string(),
            country: country.clone(),
        };
        let chosen = token
            .candidates
            .iter()
            .filter(|c| c.country == country)
            // a pinned alias wins over same-country homonyms
            .min_by_key(|c| token.synonym_canonical.is_some() && !c.is_alias())
            .ok_or_else(|| inconsistent(&token.token.text))?;
        let name = chosen.canonical_name();
        let record = g
            .find_canonical(name, &country)
            .ok_or_else(|| inconsistent(name))?;
        places.push(ResolvedPlace {
            name: record.name.clone(),
            country: record.country.clone(),
            longitude: record.longitude,
            latitude: record.latitude,
            ordinal: token.token.ordinal,
        });
    }
    Ok(places)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gazetteer::fixtures;

    fn tokens(words: &[&str]) -> Vec<Token> {
        words
            .iter()
            .enumerate()
            .map(|(i, w)| Token::new(*w, i, 0))
            .collect()
    }

    fn resolve(words: &[&str]) -> Vec<(String, String)> {
        let g = fixtures::small();
        let aug = augment(&tokens(words), &g, false);
        disambiguate(&aug, &g, &DisambiguationConfig::default())
            .unwrap()
            .into_iter()
            .map(|p| (p.name, p.country))
            .collect()
    }

    fn pair(name: &str, country: &str) -> (String, String) {
        (name.to_string(), country.to_string())
    }

    #[test]
    fn augment_drops_non_locations_and_resolves_unique() {
        let g = fixtures::small();
        let aug = augment(&tokens(&["He", "left", "Aleppo"]), &g, false);
        assert_eq!(aug.len(), 1);
        assert_eq!(aug[0].resolved_country.as_deref(), Some("SY"));
        assert_eq!(aug[0].token.ordinal, 2);
    }

    #[test]
    fn augment_leaves_homonyms_open() {
        let g = fixtures::small();
        let aug = augment(&tokens(&["Tripoli"]), &g, false);
        assert_eq!(aug.len(), 1);
        assert_eq!(aug[0].candidates.len(), 3);
        assert_eq!(aug[0].homonym_count, 3);
        assert_eq!(aug[0].resolved_country, None);
    }

    #[test]
    fn augment_empty() {
        assert!(augment(&[], &fixtures::small(), false).is_empty());
    }

    #[test]
    fn augment_with_tags_probes_only_candidates() {
        let g = fixtures::small();
        let mut toks = tokens(&["Aleppo", "Beirut"]);
        toks[1].tag = Some(crate::textprep::Tag::GeospatialCandidate);
        toks[0].tag = Some(crate::textprep::Tag::Other);
        let aug = augment(&toks, &g, true);
        assert_eq!(aug.len(), 1);
        assert_eq!(aug[0].token.text, "Beirut");
    }

    #[test]
    fn augment_skips_lowercase_words() {
        let g = fixtures::small();
        assert!(augment(&tokens(&["aleppo"]), &g, false).is_empty());
    }

    #[test]
    fn homonym_takes_country_of_next_neighbor() {
        assert_eq!(
            resolve(&["Aleppo", "Tripoli", "Beirut"]),
            vec![
                pair("Aleppo", "SY"),
                pair("Tripoli", "LB"),
                pair("Beirut", "LB")
            ]
        );
    }

    #[test]
    fn homonym_prefers_prior_neighbor() {
        assert_eq!(
            resolve(&["Beirut", "Tripoli", "Athens"]),
            vec![
                pair("Beirut", "LB"),
                pair("Tripoli", "LB"),
                pair("Athens", "GR")
            ]
        );
    }

    #[test]
    fn first_token_uses_next() {
        assert_eq!(
            resolve(&["Tripoli", "Athens"]),
            vec![pair("Tripoli", "GR"), pair("Athens", "GR")]
        );
    }

    #[test]
    fn last_token_uses_prior() {
        assert_eq!(
            resolve(&["Athens", "Tripoli"]),
            vec![pair("Athens", "GR"), pair("Tripoli", "GR")]
        );
    }

    #[test]
    fn alias_resolves_to_formal_name() {
        let g = fixtures::small();
        let aug = augment(&tokens(&["Bombay"]), &g, false);
        assert_eq!(aug[0].synonym_canonical.as_deref(), Some("Mumbai"));
        let places = disambiguate(&aug, &g, &DisambiguationConfig::default()).unwrap();
        assert_eq!(places.len(), 1);
        assert_eq!(places[0].name, "Mumbai");
        assert_eq!(places[0].country, "IN");
        assert_eq!(
            (places[0].latitude, places[0].longitude),
            (19.07283, 72.88261)
        );
    }

    #[test]
    fn lone_homonym_falls_back_to_population() {
        // Tripoli LY has 1,150,989 inhabitants, LB 229,398, GR 30,866.
        assert_eq!(resolve(&["Tripoli"]), vec![pair("Tripoli", "LY")]);
    }

    #[test]
    fn strict_mode_leaves_unresolvable_tokens_out() {
        let g = fixtures::small();
        let aug = augment(&tokens(&["Tripoli", "Tripoli", "Athens"]), &g, false);
        let strict = DisambiguationConfig {
            paper_strict: true,
            ..Default::default()
        };
        let resolution = resolve_countries(&aug, &strict);
        // one left-to-right sweep: the first Tripoli sees an unresolved neighbor
        assert_eq!(
            resolution.countries,
            vec![None, Some("GR".to_string()), Some("GR".to_string())]
        );
        assert_eq!(disambiguate(&aug, &g, &strict).unwrap().len(), 2);

        let fixpoint = resolve_countries(&aug, &DisambiguationConfig::default());
        assert_eq!(fixpoint.countries, vec![Some("GR".to_string()); 3]);
        assert_eq!(fixpoint.sweeps, 2);
        assert_eq!(fixpoint.fallbacks, 0);
    }

    #[test]
    fn fallback_none_drops_token() {
        let g = fixtures::small();
        let aug = augment(&tokens(&["Tripoli"]), &g, false);
        let config = DisambiguationConfig {
            fallback: Fallback::None,
            ..Default::default()
        };
        assert!(disambiguate(&aug, &g, &config).unwrap().is_empty());
    }

    #[test]
    fn window_radius_limits_context() {
        let g = fixtures::small();
        let aug = augment(
            &tokens(&["Beirut", "Tripoli", "Tripoli", "Athens"]),
            &g,
            false,
        );
        assert_eq!(window_context(&aug, 1, 1), (Some("LB"), None));
        assert_eq!(window_context(&aug, 0, 1), (None, None));
        assert_eq!(window_context(&aug, 2, 1), (None, Some("GR")));
        assert_eq!(window_context(&aug, 3, 1), (None, None));
        assert_eq!(window_context(&aug, 3, 3), (Some("LB"), None));
        assert_eq!(window_context(&aug, 1, 2), (Some("LB"), Some("GR")));
    }

    #[test]
    fn inconsistent_gazetteer_is_reported() {
        let g = fixtures::small();
        let aug = augment(&tokens(&["Aleppo"]), &g, false);
        let other = g.with_min_population(2_000_000);
        let err = disambiguate(&aug, &other, &DisambiguationConfig::default()).unwrap_err();
        assert!(matches!(err, DisambiguationError::Inconsistent { .. }));
    }

    #[test]
    fn synonym_resolution_is_idempotent() {
        let first = resolve(&["Aleppo", "Bombay", "Tripoli", "Beirut"]);
        let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(resolve(&names), first);
    }

    #[test]
    fn fallback_parses() {
        assert_eq!(
            "Population".parse::<Fallback>().unwrap(),
            Fallback::Population
        );
        assert_eq!("none".parse::<Fallback>().unwrap(), Fallback::None);
        assert!("nearest".parse::<Fallback>().is_err());
    }
}
