//! Trajectory CSV and JSON writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use superfact_core::dynamics::Sample;
use superfact_core::systems;
use superfact_core::{Family, SystemSpec};

use crate::config::Plane;

pub const BASE_COLUMNS: [&str; 9] = ["t", "q1", "q2", "p1", "p2", "H", "I2", "X", "Y"];

/// Extra columns appended to the base schema.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Columns {
    /// TTW only: the external polar angle `φ = θ/γ`.
    pub external_angle: bool,
    pub plane: Option<Plane>,
}

impl Columns {
    pub fn header(&self, spec: &SystemSpec) -> Vec<&'static str> {
        let mut h = BASE_COLUMNS.to_vec();
        if self.external_angle && spec.family() == Family::Ttw {
            h.push("phi");
        }
        match self.plane {
            Some(Plane::Rtheta) => h.extend(["r", "theta"]),
            Some(Plane::Xy) => h.extend(["x", "y"]),
            None => {}
        }
        h
    }

    fn row(&self, spec: &SystemSpec, s: &Sample) -> Vec<f64> {
        let p = s.point;
        let nan = f64::NAN;
        let mut row = vec![
            s.t,
            p.q1,
            p.q2,
            p.p1,
            p.p2,
            s.h,
            s.i2,
            s.x.unwrap_or(nan),
            s.y.unwrap_or(nan),
        ];
        if self.external_angle && spec.family() == Family::Ttw {
            row.push(p.q2 / spec.g());
        }
        if let Some(plane) = self.plane {
            row.extend(plane_coords(spec, s, plane));
        }
        row
    }
}

/// Two-dimensional projection of a sample's configuration.
///
/// For TTW, `rtheta` gives the internal `(r, θ)` and `xy` the Cartesian
/// position `(r cos φ, r sin φ)`. For the oscillators `xy` is the external
/// position and `rtheta` its polar form: Euclidean polar coordinates, or on
/// the sphere the geodesic distance from the origin with its azimuth.
pub fn plane_coords(spec: &SystemSpec, s: &Sample, plane: Plane) -> [f64; 2] {
    let ext = systems::to_external(spec, &s.point);
    let (a, b) = (ext.q1, ext.q2);
    match (spec.family(), plane) {
        (Family::Ttw, Plane::Rtheta) => [s.point.q1, s.point.q2],
        (Family::Ttw, Plane::Xy) => [a * b.cos(), a * b.sin()],
        (_, Plane::Xy) => [a, b],
        (Family::EuclideanAniso, Plane::Rtheta) => [a.hypot(b), b.atan2(a)],
        (Family::SphereAniso, Plane::Rtheta) => {
            let (r, theta) = systems::geodesic_polar(a, b);
            [r, theta]
        }
    }
}

/// 17 significant digits, so every value round-trips exactly.
fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(mut w: W, spec: &SystemSpec, samples: &[Sample], cols: Columns) -> io::Result<()> {
    writeln!(w, "{}", cols.header(spec).join(","))?;
    for s in samples {
        let row: Vec<String> = cols.row(spec, s).into_iter().map(fmt_value).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

pub fn write_csv_file(path: &Path, spec: &SystemSpec, samples: &[Sample], cols: Columns) -> io::Result<()> {
    write_csv(BufWriter::new(File::create(path)?), spec, samples, cols)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}
