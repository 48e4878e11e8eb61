use std::fmt::Write;

use vstates::contour::{BranchRecord, PatchPair};

use crate::failure::Failure;

/// Samples per boundary: at least 512 and a multiple of `m`, so that the
/// vertex set is closed under rotation by `2π/m`.
pub fn samples_per_boundary(m: usize) -> usize {
    512usize.div_ceil(m) * m
}

/// Parses a branch JSON document, naming the offending field on failure.
pub fn parse_record(text: &str) -> Result<BranchRecord, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let record: BranchRecord = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        Failure::usage(format!("invalid branch file at `{path}`: {}", err.inner()))
    })?;
    if !(record.b > 0.0 && record.b < 1.0) {
        return Err(Failure::usage(format!(
            "invalid branch file at `b`: {} is not in (0, 1)",
            record.b
        )));
    }
    if record.m < 2 {
        return Err(Failure::usage(format!(
            "invalid branch file at `m`: fold {} must be at least 2",
            record.m
        )));
    }
    Ok(record)
}

/// Resolves the point selection: all points when `spec` is `None`, otherwise
/// a comma-separated index list, possibly empty.
pub fn select(record: &BranchRecord, spec: Option<&str>) -> Result<Vec<PatchPair>, Failure> {
    let indices: Vec<usize> = match spec {
        None => (0..record.points.len()).collect(),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| Failure::usage(format!("point index {s:?} is not an integer")))
            })
            .collect::<Result<_, _>>()?,
    };
    indices
        .into_iter()
        .map(|i| {
            record
                .patch(i)
                .map_err(|e| Failure::usage(format!("invalid branch file: {e}")))
        })
        .collect()
}

struct Bounds {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Bounds {
    fn include(&mut self, x: f64, y: f64) {
        self.min_x = self.min_x.min(x);
        self.max_x = self.max_x.max(x);
        self.min_y = self.min_y.min(y);
        self.max_y = self.max_y.max(y);
    }
}

fn polyline(out: &mut String, pts: &[(f64, f64)], class: &str) {
    out.push_str("  <polyline class=\"");
    out.push_str(class);
    out.push_str("\" points=\"");
    for (i, &(x, y)) in pts.iter().chain(pts.first()).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        // SVG's y axis points down
        let _ = write!(out, "{:.12},{:.12}", x, -y);
    }
    out.push_str("\"/>\n");
}

/// Renders the selected points as an SVG document. Each point contributes
/// its outer and inner boundary as closed polylines.
pub fn render_svg(b: f64, patches: &[PatchPair]) -> String {
    let mut bounds = Bounds {
        min_x: -1.0,
        max_x: 1.0,
        min_y: -1.0,
        max_y: 1.0,
    };
    let mut curves = Vec::with_capacity(patches.len());
    for patch in patches {
        let samples = patch.boundary_samples(samples_per_boundary(patch.m));
        let outer: Vec<_> = samples.iter().map(|s| (s.x1, s.y1)).collect();
        let inner: Vec<_> = samples.iter().map(|s| (s.x2, s.y2)).collect();
        for &(x, y) in outer.iter().chain(&inner) {
            bounds.include(x, y);
        }
        curves.push((outer, inner));
    }
    let width = bounds.max_x - bounds.min_x;
    let height = bounds.max_y - bounds.min_y;
    let mx = 0.05 * width;
    let my = 0.05 * height;
    let (x0, x1) = (bounds.min_x - mx, bounds.max_x + mx);
    // flipped: SVG y = -y
    let (y0, y1) = (-bounds.max_y - my, -bounds.min_y + my);
    let stroke = 0.004 * width.max(height);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">",
        x0,
        y0,
        x1 - x0,
        y1 - y0
    );
    let _ = writeln!(
        out,
        "  <g fill=\"none\" stroke-width=\"{stroke:.6}\" stroke-linejoin=\"round\">"
    );
    let _ = writeln!(
        out,
        "  <line class=\"axis\" x1=\"{x0:.6}\" y1=\"0\" x2=\"{x1:.6}\" y2=\"0\" stroke=\"#999\"/>"
    );
    let _ = writeln!(
        out,
        "  <line class=\"axis\" x1=\"0\" y1=\"{y0:.6}\" x2=\"0\" y2=\"{y1:.6}\" stroke=\"#999\"/>"
    );
    if !curves.is_empty() {
        let dash = 4.0 * stroke;
        for (class, r) in [("reference-outer", 1.0), ("reference-inner", b)] {
            let _ = writeln!(
                out,
                "  <circle class=\"{class}\" cx=\"0\" cy=\"0\" r=\"{r:.12}\" stroke=\"#bbb\" stroke-dasharray=\"{dash:.6} {dash:.6}\"/>"
            );
        }
    }
    out.push_str("  <g stroke=\"#1f4e9c\">\n");
    for (outer, inner) in &curves {
        polyline(&mut out, outer, "outer");
        polyline(&mut out, inner, "inner");
    }
    out.push_str("  </g>\n  </g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_count_is_multiple_of_fold() {
        for m in 2..12 {
            let n = samples_per_boundary(m);
            assert!(n >= 512 && n.is_multiple_of(m) && n < 512 + m);
        }
    }

    #[test]
    fn empty_selection_has_axes_only() {
        let svg = render_svg(0.5, &[]);
        assert_eq!(svg.matches("class=\"axis\"").count(), 2);
        assert!(!svg.contains("<polyline") && !svg.contains("<circle"));
    }

    #[test]
    fn selection_parsing() {
        let record = BranchRecord {
            b: 0.5,
            m: 3,
            k: 1,
            p: 512,
            sign: "plus".into(),
            points: vec![],
            stopped_reason: None,
        };
        assert!(select(&record, Some("")).unwrap().is_empty());
        assert!(select(&record, Some("0")).is_err());
        assert!(select(&record, Some("x")).is_err());
        assert!(select(&record, None).unwrap().is_empty());
    }
}
