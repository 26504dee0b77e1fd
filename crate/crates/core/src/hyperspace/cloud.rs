//! Point-cloud CSV.
//!
//! ```text
//! # space=euclidean:2
//! 0,0
//! 0.5,0.25
//! ```
//!
//! Coordinates are written in the shortest decimal form that parses back to
//! the same `f64`, so write → read → write is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hyperspace::FiniteCompact;
use crate::io::write_atomic;
use crate::space::{Point, Space};

pub fn write_cloud(set: &FiniteCompact) -> String {
    let mut out = format!("# space={}\n", set.space());
    for p in set.points() {
        for (i, c) in p.coords().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{c}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_cloud(text: &str) -> Result<FiniteCompact> {
    let mut lines = text.lines().enumerate();
    let space = loop {
        match lines.next() {
            None => return Err(Error::parse(1, "missing `# space=...` header")),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => {
                let spec = l
                    .trim()
                    .strip_prefix('#')
                    .map(str::trim)
                    .and_then(|h| h.strip_prefix("space="))
                    .ok_or_else(|| Error::parse(i + 1, "expected header `# space=<space>`"))?;
                break spec
                    .parse::<Space>()
                    .map_err(|e| Error::parse(i + 1, e.to_string()))?;
            }
        }
    };
    let mut pts = Vec::new();
    for (i, l) in lines {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let coords = l
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(i + 1, format!("bad number {:?}", f.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = Point::new(space, &coords).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        pts.push(p);
    }
    if pts.is_empty() {
        return Err(Error::parse(text.lines().count().max(1), "cloud has no points"));
    }
    FiniteCompact::new(space, pts)
}

pub fn read_cloud(path: &Path) -> Result<FiniteCompact> {
    parse_cloud(&std::fs::read_to_string(path)?)
}

pub fn write_cloud_file(path: &Path, set: &FiniteCompact) -> Result<()> {
    write_atomic(path, write_cloud(set).as_bytes())
}
