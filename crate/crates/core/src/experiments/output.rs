use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};

use super::{CoveragePoint, DetectionPoint, PatternPoint, PowerPoint};

pub const DETECTION_HEADER: [&str; 6] = [
    "method",
    "n_antennas",
    "gamma_u_db",
    "angle_deg",
    "distance_m",
    "status",
];
pub const COVERAGE_HEADER: [&str; 3] = ["user_x", "user_y", "coverage_ratio"];
pub const POWER_HEADER: [&str; 4] = ["method", "angle_deg", "power_w", "status"];
pub const PATTERN_HEADER: [&str; 3] = ["beam", "angle_deg", "gain_db"];

fn io(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_rows<W: Write, const K: usize>(
    out: W,
    header: [&str; K],
    rows: impl IntoIterator<Item = [String; K]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_detection_csv<W: Write>(out: W, points: &[DetectionPoint]) -> Result<()> {
    write_rows(
        out,
        DETECTION_HEADER,
        points.iter().map(|p| {
            [
                p.method.to_string(),
                p.n_antennas.to_string(),
                p.gamma_user_db.to_string(),
                p.bearing_deg.to_string(),
                format!("{:.4}", p.distance),
                p.status.as_str().to_string(),
            ]
        }),
    )
}

pub fn write_coverage_csv<W: Write>(out: W, points: &[CoveragePoint]) -> Result<()> {
    write_rows(
        out,
        COVERAGE_HEADER,
        points.iter().map(|p| {
            [
                format!("{:.6}", p.user.x),
                format!("{:.6}", p.user.y),
                format!("{:.6}", p.ratio),
            ]
        }),
    )
}

/// Infeasible points leave `power_w` empty.
pub fn write_power_csv<W: Write>(out: W, points: &[PowerPoint]) -> Result<()> {
    write_rows(
        out,
        POWER_HEADER,
        points.iter().map(|p| {
            [
                p.method.to_string(),
                p.bearing_deg.to_string(),
                p.power.map(|w| format!("{w:.9e}")).unwrap_or_default(),
                p.status.as_str().to_string(),
            ]
        }),
    )
}

pub fn write_pattern_csv<W: Write>(out: W, points: &[PatternPoint]) -> Result<()> {
    write_rows(
        out,
        PATTERN_HEADER,
        points.iter().map(|p| {
            [
                p.beam.to_string(),
                p.bearing_deg.to_string(),
                format!("{:.6}", p.gain_db),
            ]
        }),
    )
}

/// Plain-text `key = value` sidecar. Comment lines start with `#`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    lines: Vec<Line>,
}

#[derive(Debug, Clone, PartialEq)]
enum Line {
    Entry(String, String),
    Comment(String),
}

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entry(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        self.lines.push(Line::Entry(key.into(), value.to_string()));
        self
    }

    pub fn comment(&mut self, text: impl Into<String>) -> &mut Self {
        self.lines.push(Line::Comment(text.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find_map(|l| match l {
            Line::Entry(k, v) if k == key => Some(v.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for Metadata {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            match line {
                Line::Entry(k, v) => writeln!(f, "{k} = {v}")?,
                Line::Comment(c) => writeln!(f, "# {c}")?,
            }
        }
        Ok(())
    }
}
