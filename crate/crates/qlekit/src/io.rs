//! Output formats: CSV tables, JSON, binary field snapshots and PPM images.
//!
//! Floats are written with Rust's shortest round-trip formatting, so the same
//! values always produce the same bytes.

use serde::Serialize;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::field::{Boundary, LatticeField};

/// Formats a float for CSV output.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0".
        "0".to_string()
    } else {
        format!("{x:?}")
    }
}

/// An in-memory CSV table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row; panics if the width does not match the header.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let line = |s: &mut String, cells: &[String]| {
            let cells: Vec<String> = cells.iter().map(|c| quote(c)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        };
        line(&mut s, &self.header);
        for r in &self.rows {
            line(&mut s, r);
        }
        s
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_csv())
    }
}

fn quote(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    s.push('\n');
    fs::write(path, s)
}

const SNAPSHOT_MAGIC: &str = "QLEF 1";

/// Writes a field as a short text header followed by n² little-endian f64
/// values in row-major order.
pub fn write_field_snapshot(path: &Path, field: &LatticeField) -> io::Result<()> {
    let bc = match field.bc {
        Boundary::Zero => "zero",
        Boundary::Free => "free",
    };
    let mut buf = format!(
        "{SNAPSHOT_MAGIC}\nn={}\nbc={bc}\nnormalization={}\nseed={}\n\n",
        field.n, field.normalization, field.seed
    )
    .into_bytes();
    for v in &field.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)
}

pub fn read_field_snapshot(path: &Path) -> io::Result<LatticeField> {
    let mut raw = Vec::new();
    fs::File::open(path)?.read_to_end(&mut raw)?;
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let split = raw.windows(2).position(|w| w == b"\n\n").ok_or_else(|| bad("missing header"))?;
    let header = std::str::from_utf8(&raw[..split]).map_err(|_| bad("header is not utf-8"))?;
    let mut lines = header.lines();
    if lines.next() != Some(SNAPSHOT_MAGIC) {
        return Err(bad("not a field snapshot"));
    }
    let (mut n, mut bc, mut normalization, mut seed) = (None, None, None, None);
    for l in lines {
        let (k, v) = l.split_once('=').ok_or_else(|| bad("malformed header line"))?;
        match k {
            "n" => n = v.parse::<usize>().ok(),
            "bc" => {
                bc = match v {
                    "zero" => Some(Boundary::Zero),
                    "free" => Some(Boundary::Free),
                    _ => None,
                }
            }
            "normalization" => normalization = v.parse::<f64>().ok(),
            "seed" => seed = v.parse::<u64>().ok(),
            _ => {}
        }
    }
    let (n, bc, normalization, seed) = match (n, bc, normalization, seed) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return Err(bad("incomplete header")),
    };
    let body = &raw[split + 2..];
    if body.len() != n * n * 8 {
        return Err(bad("payload size does not match n"));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(LatticeField { n, bc, normalization, seed, values })
}

/// An RGB raster.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[u8; 3]>,
}

impl Image {
    pub fn new(width: usize, height: usize, background: [u8; 3]) -> Self {
        Self { width, height, data: vec![background; width * height] }
    }

    /// Sets pixel (x, y), with y counted from the top. Out-of-range writes are
    /// ignored.
    pub fn set(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.data[y as usize * self.width + x as usize] = c;
        }
    }

    pub fn fill_rect(&mut self, x: usize, y: usize, w: usize, h: usize, c: [u8; 3]) {
        for yy in y..(y + h).min(self.height) {
            for xx in x..(x + w).min(self.width) {
                self.data[yy * self.width + xx] = c;
            }
        }
    }

    /// Bresenham segment.
    pub fn line(&mut self, a: (i64, i64), b: (i64, i64), c: [u8; 3]) {
        let (mut x, mut y) = a;
        let dx = (b.0 - a.0).abs();
        let dy = -(b.1 - a.1).abs();
        let sx = if a.0 < b.0 { 1 } else { -1 };
        let sy = if a.1 < b.1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.set(x, y, c);
            if (x, y) == b {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    /// Binary PPM (P6).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        for p in &self.data {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn write_ppm(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_ppm())
    }
}

/// Growth-time color scale: t ∈ [0, 1] runs through the rainbow from blue
/// (early) to red (late).
pub fn rainbow(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    hsv((1.0 - t) * 240.0, 1.0, 1.0)
}

/// Diverging blue-white-red scale for signed fields, saturating at ±scale.
pub fn diverging(x: f64, scale: f64) -> [u8; 3] {
    let s = if scale > 0.0 { (x / scale).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |v: f64| (255.0 * (1.0 - v.abs())).round() as u8;
    if s >= 0.0 {
        [255, fade(s), fade(s)]
    } else {
        [fade(s), fade(s), 255]
    }
}

fn hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = (h / 60.0).rem_euclid(6.0);
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |u: f64| ((u + m) * 255.0).round() as u8;
    [q(r), q(g), q(b)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting_and_numbers() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![num(-0.0), "x,y".into()]);
        t.push(vec![num(0.1), num(1e-300)]);
        assert_eq!(num(2.0), "2.0");
        assert_eq!(t.to_csv(), "a,b\n0,\"x,y\"\n0.1,1e-300\n");
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = std::env::temp_dir().join(format!("qlekit-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("f.bin");
        let mut f = LatticeField::from_fn(5, |x, y| x - 2.0 * y + 0.125);
        f.seed = 42;
        write_field_snapshot(&p, &f).unwrap();
        let g = read_field_snapshot(&p).unwrap();
        assert_eq!(f, g);
        fs::write(&p, b"junk").unwrap();
        assert!(read_field_snapshot(&p).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn color_scales() {
        assert_eq!(rainbow(0.0), [0, 0, 255]);
        assert_eq!(rainbow(1.0), [255, 0, 0]);
        assert_eq!(rainbow(f64::NAN), rainbow(0.0));
        assert_eq!(diverging(0.0, 1.0), [255, 255, 255]);
        assert_eq!(diverging(5.0, 1.0), [255, 0, 0]);
        assert_eq!(diverging(-1.0, 1.0), [0, 0, 255]);
    }

    #[test]
    fn ppm_header_and_lines() {
        let mut im = Image::new(4, 3, [0, 0, 0]);
        im.line((0, 0), (3, 2), [9, 9, 9]);
        assert_eq!(im.data[0], [9, 9, 9]);
        assert_eq!(im.data[2 * 4 + 3], [9, 9, 9]);
        let ppm = im.to_ppm();
        assert!(ppm.starts_with(b"P6\n4 3\n255\n"));
        assert_eq!(ppm.len(), 11 + 36);
    }
}
