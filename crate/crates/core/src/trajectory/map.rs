//! Static, self-contained HTML rendering of a trajectory (inline SVG, no
//! scripts or network resources).

use std::fmt::Write;

use super::{to_geojson, Trajectory};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 48.0;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Equirectangular projection of the stops' bounding box onto the canvas,
/// keeping the aspect ratio.
struct Projection {
    min_lon: f64,
    max_lat: f64,
    scale: f64,
    offset_x: f64,
    offset_y: f64,
}

impl Projection {
    fn fit(t: &Trajectory) -> Self {
        let lons: Vec<f64> = t.places().map(|p| p.longitude).collect();
        let lats: Vec<f64> = t.places().map(|p| p.latitude).collect();
        let min_lon = lons.iter().copied().fold(f64::INFINITY, f64::min);
        let max_lon = lons.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_lat = lats.iter().copied().fold(f64::INFINITY, f64::min);
        let max_lat = lats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // pad degenerate extents so a single stop lands mid-canvas
        let span_lon = (max_lon - min_lon).max(1.0);
        let span_lat = (max_lat - min_lat).max(1.0);
        let scale = ((WIDTH - 2.0 * MARGIN) / span_lon).min((HEIGHT - 2.0 * MARGIN) / span_lat);
        Self {
            min_lon,
            max_lat,
            scale,
            offset_x: (WIDTH - (max_lon - min_lon) * scale) / 2.0,
            offset_y: (HEIGHT - (max_lat - min_lat) * scale) / 2.0,
        }
    }

    fn project(&self, lon: f64, lat: f64) -> (f64, f64) {
        (
            self.offset_x + (lon - self.min_lon) * self.scale,
            self.offset_y + (self.max_lat - lat) * self.scale,
        )
    }
}

/// Renders the trajectory as one HTML file with the GeoJSON embedded in a
/// data block and the route drawn as an SVG polyline with one marker per
/// stop. Output bytes depend only on the trajectory.
pub fn to_map_html(t: &Trajectory) -> String {
    let geojson = to_geojson(t).replace("</", "<\\/");
    let title = escape(&t.narrative_id);
    let mut html = String::new();
    let _ = write!(
        html,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n\
         <title>Trajectory: {title}</title>\n<style>\n\
         body {{ font-family: sans-serif; margin: 1.5em; }}\n\
         svg {{ background: #eef3f7; border: 1px solid #9ab; }}\n\
         .route {{ fill: none; stroke: #c0392b; stroke-width: 2; }}\n\
         .stop {{ fill: #2c3e50; stroke: #fff; stroke-width: 1.5; }}\n\
         .label {{ font-size: 12px; fill: #222; }}\n\
         .notice {{ font-style: italic; }}\n\
         </style>\n</head>\n<body>\n<h1>Trajectory: {title}</h1>\n"
    );

    if t.is_empty() {
        html.push_str(
            "<p class=\"notice\">No stops: no places were resolved in this narrative.</p>\n",
        );
    } else {
        let projection = Projection::fit(t);
        let points: Vec<(f64, f64)> = t
            .places()
            .map(|p| projection.project(p.longitude, p.latitude))
            .collect();
        let _ = writeln!(
            html,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        if points.len() >= 2 {
            let path: Vec<String> = points
                .iter()
                .map(|(x, y)| format!("{x:.2},{y:.2}"))
                .collect();
            let _ = writeln!(
                html,
                "<polyline class=\"route\" points=\"{}\"/>",
                path.join(" ")
            );
        }
        for (i, (stop, (x, y))) in t.stops.iter().zip(&points).enumerate() {
            let name = escape(&stop.place.name);
            let country = escape(&stop.place.country);
            let _ = writeln!(
                html,
                "<g><circle class=\"stop\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"6\"><title>{n}. {name}, {country} (visit {v})</title></circle>\
                 <text class=\"label\" x=\"{lx:.2}\" y=\"{ly:.2}\">{n}. {name}</text></g>",
                n = i + 1,
                v = stop.visit_index,
                lx = x + 8.0,
                ly = y - 8.0,
            );
        }
        html.push_str("</svg>\n<ol>\n");
        for stop in &t.stops {
            let _ = writeln!(
                html,
                "<li>{} ({}) {:.5}, {:.5}</li>",
                escape(&stop.place.name),
                escape(&stop.place.country),
                stop.place.latitude,
                stop.place.longitude
            );
        }
        html.push_str("</ol>\n");
    }

    let _ = write!(
        html,
        "<script type=\"application/geo+json\" id=\"trajectory-data\">\n{geojson}\n</script>\n</body>\n</html>\n"
    );
    html
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{build_trajectory, place};

    fn three_stops() -> Trajectory {
        build_trajectory(
            "story",
            vec![
                place("Aleppo", "SY", 37.16117, 36.20124, 0),
                place("Tripoli", "LB", 35.84972, 34.43667, 4),
                place("Beirut", "LB", 35.50157, 33.89332, 9),
            ],
        )
    }

    #[test]
    fn embeds_geojson_verbatim() {
        let t = three_stops();
        assert!(to_map_html(&t).contains(&to_geojson(&t)));
    }

    #[test]
    fn one_marker_per_stop() {
        let html = to_map_html(&three_stops());
        assert_eq!(html.matches("<circle class=\"stop\"").count(), 3);
        assert_eq!(html.matches("<polyline").count(), 1);
    }

    #[test]
    fn empty_trajectory_notice() {
        let html = to_map_html(&build_trajectory("quiet", vec![]));
        assert!(html.contains("No stops"));
        assert!(!html.contains("<circle"));
    }

    #[test]
    fn deterministic_and_offline() {
        let t = three_stops();
        let html = to_map_html(&t);
        assert_eq!(html, to_map_html(&t));
        // the SVG namespace is the only URL
        assert_eq!(html.matches("http").count(), 1);
    }

    #[test]
    fn names_are_escaped() {
        let t = build_trajectory("<x>", vec![place("A&B", "ZZ", 1.0, 1.0, 0)]);
        let html = to_map_html(&t);
        assert!(html.contains("A&amp;B"));
        assert!(html.contains("Trajectory: &lt;x&gt;"));
    }
}
