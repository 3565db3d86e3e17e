//! Ordered routes built from resolved places, with GeoJSON and static map
//! output.

mod map;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::disambiguator::ResolvedPlace;

pub use map::to_map_html;

#[derive(Debug, thiserror::Error)]
pub enum GeoJsonError {
    #[error("invalid GeoJSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a trajectory document: {0}")]
    Shape(String),
}

/// One stop on a route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub place: ResolvedPlace,
    /// How many times this (name, country) has been visited so far,
    /// counting this stop.
    pub visit_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub narrative_id: String,
    pub stops: Vec<Stop>,
}

impl Trajectory {
    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    pub fn len(&self) -> usize {
        self.stops.len()
    }

    pub fn places(&self) -> impl Iterator<Item = &ResolvedPlace> {
        self.stops.iter().map(|s| &s.place)
    }
}

fn same_place(a: &ResolvedPlace, b: &ResolvedPlace) -> bool {
    a.name == b.name && a.country == b.country
}

/// Visit indices recomputed from the stop sequence alone.
pub fn visit_indices(places: &[&ResolvedPlace]) -> Vec<usize> {
    places
        .iter()
        .enumerate()
        .map(|(i, p)| places[..=i].iter().filter(|q| same_place(p, q)).count())
        .collect()
}

/// Builds a route from places in mention order. Adjacent mentions of the
/// same place collapse into one stop; later returns are new stops.
pub fn build_trajectory(narrative_id: &str, places: Vec<ResolvedPlace>) -> Trajectory {
    let mut kept: Vec<ResolvedPlace> = Vec::with_capacity(places.len());
    for place in places {
        if kept.last().is_some_and(|last| same_place(last, &place)) {
            continue;
        }
        kept.push(place);
    }
    let indices = visit_indices(&kept.iter().collect::<Vec<_>>());
    Trajectory {
        narrative_id: narrative_id.to_string(),
        stops: kept
            .into_iter()
            .zip(indices)
            .map(|(place, visit_index)| Stop { place, visit_index })
            .collect(),
    }
}

/// RFC 7946 FeatureCollection: one Point per stop, then a LineString
/// through all stops when there are at least two. The narrative id is a
/// foreign member of the collection.
pub fn to_geojson(t: &Trajectory) -> String {
    let mut features: Vec<Value> = t
        .stops
        .iter()
        .map(|s| {
            json!({
                "type": "Feature",
                "geometry": {
                    "type": "Point",
                    "coordinates": [s.place.longitude, s.place.latitude],
                },
                "properties": {
                    "name": s.place.name,
                    "country": s.place.country,
                    "ordinal": s.place.ordinal,
                    "visit_index": s.visit_index,
                },
            })
        })
        .collect();
    if t.stops.len() >= 2 {
        let line: Vec<[f64; 2]> = t.places().map(|p| [p.longitude, p.latitude]).collect();
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": line },
            "properties": { "narrative_id": t.narrative_id },
        }));
    }
    let doc = json!({
        "type": "FeatureCollection",
        "narrative_id": t.narrative_id,
        "features": features,
    });
    serde_json::to_string_pretty(&doc).expect("GeoJSON value serializes")
}

#[derive(Deserialize)]
struct PointProperties {
    name: String,
    country: String,
    ordinal: usize,
    visit_index: usize,
}

/// Reads back a document produced by [`to_geojson`].
pub fn from_geojson(text: &str) -> Result<Trajectory, GeoJsonError> {
    let doc: Value = serde_json::from_str(text)?;
    if doc["type"] != "FeatureCollection" {
        return Err(GeoJsonError::Shape(
            "top-level type is not FeatureCollection".into(),
        ));
    }
    let narrative_id = doc["narrative_id"].as_str().unwrap_or_default().to_string();
    let features = doc["features"]
        .as_array()
        .ok_or_else(|| GeoJsonError::Shape("missing features array".into()))?;
    let mut stops = Vec::new();
    for feature in features {
        if feature["geometry"]["type"] != "Point" {
            continue;
        }
        let coords = feature["geometry"]["coordinates"]
            .as_array()
            .filter(|c| c.len() == 2)
            .and_then(|c| Some((c[0].as_f64()?, c[1].as_f64()?)))
            .ok_or_else(|| GeoJsonError::Shape("point without [lon, lat]".into()))?;
        let props: PointProperties = serde_json::from_value(feature["properties"].clone())?;
        stops.push(Stop {
            place: ResolvedPlace {
                name: props.name,
                country: props.country,
                longitude: coords.0,
                latitude: coords.1,
                ordinal: props.ordinal,
            },
            visit_index: props.visit_index,
        });
    }
    Ok(Trajectory {
        narrative_id,
        stops,
    })
}

#[cfg(test)]
pub(crate) fn place(
    name: &str,
    country: &str,
    lon: f64,
    lat: f64,
    ordinal: usize,
) -> ResolvedPlace {
    ResolvedPlace {
        name: name.to_string(),
        country: country.to_string(),
        longitude: lon,
        latitude: lat,
        ordinal,
    }
}
