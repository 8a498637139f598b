//! ASCII PLY clouds and CSV organized scans.
//!
//! Scan CSV grammar: header `ring,col,x,y,z,valid`, then one row per cell in
//! any order. `(ring, col)` pairs are unique; cells without a row are treated
//! as no-return.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use super::{OrganizedScan, PointCloud};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudFormat {
    AsciiPly,
}

pub fn load_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        CloudFormat::AsciiPly => parse_ply(path, &text),
    }
}

pub fn save_cloud(path: &Path, cloud: &PointCloud, format: CloudFormat) -> Result<()> {
    let CloudFormat::AsciiPly = format;
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.len());
    out.push_str("property float x\nproperty float y\nproperty float z\n");
    if cloud.edges().is_some() {
        out.push_str("property uchar edge\n");
    }
    out.push_str("end_header\n");
    for (i, p) in cloud.points().iter().enumerate() {
        let _ = write!(out, "{} {} {}", p.x as f32, p.y as f32, p.z as f32);
        if let Some(e) = cloud.edges() {
            let _ = write!(out, " {}", u8::from(e[i]));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn parse_ply(path: &Path, text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let err = |line: usize, msg: &str| Error::parse(path, line, msg);

    match lines.next() {
        Some((_, "ply")) => {}
        Some((n, _)) => return Err(err(n, "missing 'ply' magic")),
        None => return Err(err(1, "empty file")),
    }

    let mut vertex_count = None;
    let mut properties: Vec<String> = Vec::new();
    let mut in_vertex = false;
    let mut header_done = false;
    for (n, line) in lines.by_ref() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => continue,
            ["format", "ascii", _] => {}
            ["format", other, ..] => return Err(err(n, &format!("unsupported format '{other}'"))),
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", "vertex", count] => {
                let c = count.parse::<usize>().map_err(|_| err(n, "bad vertex count"))?;
                vertex_count = Some(c);
                in_vertex = true;
            }
            ["element", _, count] => {
                if *count != "0" {
                    return Err(err(n, "only the vertex element is supported"));
                }
                in_vertex = false;
            }
            ["property", ty, name] if in_vertex => {
                let ok = match *name {
                    "x" | "y" | "z" => matches!(*ty, "float" | "float32" | "double" | "float64"),
                    "edge" => matches!(*ty, "uchar" | "uint8"),
                    _ => true,
                };
                if !ok {
                    return Err(err(n, &format!("unexpected type '{ty}' for property '{name}'")));
                }
                properties.push(name.to_string());
            }
            ["property", ..] => {}
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => return Err(err(n, &format!("unrecognized header line '{line}'"))),
        }
    }
    if !header_done {
        return Err(err(text.lines().count().max(1), "missing end_header"));
    }
    let count = vertex_count.ok_or_else(|| err(1, "no vertex element"))?;
    let col = |name: &str| properties.iter().position(|p| p == name);
    let (ix, iy, iz) = match (col("x"), col("y"), col("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(err(1, "vertex element needs x, y and z")),
    };
    let iedge = col("edge");

    let mut points = Vec::with_capacity(count);
    let mut edges = iedge.map(|_| Vec::with_capacity(count));
    for (n, line) in lines {
        if points.len() == count {
            if line.is_empty() {
                continue;
            }
            return Err(err(n, "more rows than declared vertices"));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != properties.len() {
            return Err(err(n, &format!("expected {} values, found {}", properties.len(), fields.len())));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| err(n, &format!("'{}' is not a number", fields[i])))
        };
        let p = Vector3::new(num(ix)?, num(iy)?, num(iz)?);
        if !p.iter().all(|c| c.is_finite()) {
            return Err(Error::Validation(format!("{}:{n}: non-finite coordinate", path.display())));
        }
        points.push(p);
        if let (Some(flags), Some(ie)) = (edges.as_mut(), iedge) {
            match fields[ie] {
                "0" => flags.push(false),
                "1" => flags.push(true),
                other => return Err(err(n, &format!("edge flag must be 0 or 1, found '{other}'"))),
            }
        }
    }
    if points.len() != count {
        return Err(err(text.lines().count(), &format!("expected {count} vertices, found {}", points.len())));
    }
    match edges {
        Some(e) => PointCloud::with_edges(points, e),
        None => PointCloud::new(points),
    }
}

pub fn load_scan(path: &Path, rings: usize, columns: usize) -> Result<OrganizedScan> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ring,col,x,y,z,valid")) => {}
        Some((n, other)) => return Err(Error::parse(path, n, format!("bad header '{other}'"))),
        None => return Err(Error::parse(path, 1, "empty file")),
    }
    let mut scan = OrganizedScan::new(rings, columns)?;
    let mut seen = vec![false; rings * columns];
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 6 {
            return Err(Error::parse(path, n, format!("expected 6 fields, found {}", f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(path, n, format!("'{s}' is not an index")));
        let float = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(path, n, format!("'{s}' is not a number")));
        let (ring, col) = (int(f[0])?, int(f[1])?);
        if ring >= rings || col >= columns {
            return Err(Error::Validation(format!(
                "{}:{n}: cell ({ring}, {col}) outside {rings}x{columns} scan",
                path.display()
            )));
        }
        if std::mem::replace(&mut seen[ring * columns + col], true) {
            return Err(Error::Validation(format!("{}:{n}: duplicate cell ({ring}, {col})", path.display())));
        }
        let p = Vector3::new(float(f[2])?, float(f[3])?, float(f[4])?);
        let valid = match f[5] {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(path, n, format!("valid must be 0 or 1, found '{other}'"))),
        };
        if valid {
            scan.set(ring, col, Some(p))
                .map_err(|e| Error::Validation(format!("{}:{n}: {e}", path.display())))?;
        }
    }
    Ok(scan)
}

pub fn save_scan(path: &Path, scan: &OrganizedScan) -> Result<()> {
    let mut out = String::from("ring,col,x,y,z,valid\n");
    for ring in 0..scan.rings() {
        for (col, cell) in scan.ring(ring).iter().enumerate() {
            match cell {
                Some(p) => {
                    let _ = writeln!(out, "{ring},{col},{},{},{},1", p.x, p.y, p.z);
                }
                None => {
                    let _ = writeln!(out, "{ring},{col},0,0,0,0");
                }
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
