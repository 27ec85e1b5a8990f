//! Point-cloud files and grid dumps.
//!
//! Two cloud formats are read: plain `x y z` lines with `#` comments, and
//! ASCII PCD (a header ending in `DATA ascii`, then one point per line with
//! the `x y z` fields in the declared order).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use linkplan_core::{EsdfGrid, PointCloud};

use crate::ConfigError;

pub fn load_point_cloud(path: impl AsRef<Path>) -> Result<PointCloud, ConfigError> {
    parse_point_cloud(&fs::read_to_string(path)?)
}

pub fn parse_point_cloud(text: &str) -> Result<PointCloud, ConfigError> {
    let is_pcd = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.split_whitespace().next().is_some_and(is_pcd_keyword));
    if is_pcd {
        parse_pcd(text)
    } else {
        parse_xyz(text)
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, message: message.into() }
}

fn is_pcd_keyword(word: &str) -> bool {
    matches!(word, "VERSION" | "FIELDS" | "SIZE" | "TYPE" | "COUNT" | "WIDTH" | "HEIGHT" | "VIEWPOINT" | "POINTS" | "DATA")
}

fn parse_point(fields: &[&str], columns: [usize; 3], line: usize) -> Result<[f64; 3], ConfigError> {
    let mut p = [0.0; 3];
    for (slot, &col) in p.iter_mut().zip(&columns) {
        let raw = fields.get(col).ok_or_else(|| parse_error(line, format!("expected at least {} values", col + 1)))?;
        let v: f64 = raw.parse().map_err(|_| parse_error(line, format!("`{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(parse_error(line, format!("non-finite coordinate `{raw}`")));
        }
        *slot = v;
    }
    Ok(p)
}

fn parse_xyz(text: &str) -> Result<PointCloud, ConfigError> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_error(i + 1, format!("expected `x y z`, found {} values", fields.len())));
        }
        points.push(parse_point(&fields, [0, 1, 2], i + 1)?);
    }
    Ok(PointCloud::new(points))
}

fn parse_pcd(text: &str) -> Result<PointCloud, ConfigError> {
    let mut columns: Option<[usize; 3]> = None;
    let mut expected: Option<usize> = None;
    let mut lines = text.lines().enumerate();
    for (i, raw) in lines.by_ref() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let key = words.next().unwrap_or("");
        let rest: Vec<&str> = words.collect();
        match key {
            "FIELDS" => {
                let find = |name: &str| rest.iter().position(|f| *f == name);
                match (find("x"), find("y"), find("z")) {
                    (Some(x), Some(y), Some(z)) => columns = Some([x, y, z]),
                    _ => return Err(parse_error(i + 1, "FIELDS must include x, y and z")),
                }
            }
            "POINTS" => {
                let n = rest.first().and_then(|v| v.parse().ok());
                expected = Some(n.ok_or_else(|| parse_error(i + 1, "POINTS needs a count"))?);
            }
            "DATA" => {
                if rest.first() != Some(&"ascii") {
                    return Err(parse_error(i + 1, "only `DATA ascii` is supported"));
                }
                break;
            }
            k if is_pcd_keyword(k) => {}
            _ => return Err(parse_error(i + 1, format!("unknown PCD header entry `{key}`"))),
        }
    }
    let columns = columns.unwrap_or([0, 1, 2]);
    let mut points = Vec::new();
    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        points.push(parse_point(&fields, columns, i + 1)?);
    }
    if let Some(n) = expected {
        if n != points.len() {
            return Err(ConfigError::Invalid(format!("PCD header declares {n} points, found {}", points.len())));
        }
    }
    Ok(PointCloud::new(points))
}

/// Writes `x y z` lines readable by [`load_point_cloud`].
pub fn write_xyz(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<(), ConfigError> {
    let mut out = String::with_capacity(cloud.len() * 24);
    for p in &cloud.points {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    Ok(fs::write(path, out)?)
}

/// Row-major distance dump, one grid row per line, lowest y first.
pub fn esdf_csv(esdf: &EsdfGrid) -> String {
    let g = esdf.geometry;
    let mut out = String::new();
    for iy in 0..g.ny {
        let row: Vec<String> = (0..g.nx).map(|ix| esdf.at(ix, iy).to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_plain_lines() {
        let cloud = parse_point_cloud("0 0 0\n1 2 0").unwrap();
        assert_eq!(cloud.points, vec![[0.0, 0.0, 0.0], [1.0, 2.0, 0.0]]);
    }

    #[test]
    fn empty_file_is_an_empty_cloud() {
        assert!(parse_point_cloud("").unwrap().is_empty());
        assert!(parse_point_cloud("# nothing\n\n").unwrap().is_empty());
    }

    #[test]
    fn malformed_line_reports_its_number() {
        match parse_point_cloud("a b c") {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse_point_cloud("# header\n0 0 0\n1 2\n") {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trailing_comments_are_ignored() {
        let cloud = parse_point_cloud("1 2 3 # corner\n").unwrap();
        assert_eq!(cloud.points, vec![[1.0, 2.0, 3.0]]);
    }

    #[test]
    fn reads_ascii_pcd_with_reordered_fields() {
        let text = "# .PCD v0.7\nVERSION 0.7\nFIELDS z x y\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n\
                    WIDTH 2\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS 2\nDATA ascii\n0.5 1 2\n0 3 4\n";
        let cloud = parse_point_cloud(text).unwrap();
        assert_eq!(cloud.points, vec![[1.0, 2.0, 0.5], [3.0, 4.0, 0.0]]);
    }

    #[test]
    fn binary_pcd_is_rejected() {
        let text = "VERSION 0.7\nFIELDS x y z\nPOINTS 0\nDATA binary\n";
        assert!(matches!(parse_point_cloud(text), Err(ConfigError::Parse { line: 4, .. })));
    }

    #[test]
    fn round_trips_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.xyz");
        let cloud = PointCloud::new(vec![[0.05, -1.25, 0.1], [3.0, 2.0, -0.1]]);
        write_xyz(&cloud, &path).unwrap();
        assert_eq!(load_point_cloud(&path).unwrap(), cloud);
    }
}
