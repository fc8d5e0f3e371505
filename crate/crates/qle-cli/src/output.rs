//! Output directory handling and the run manifest.

use clap::ValueEnum;
use qlekit::io::{self, Image, Table};
use serde::Serialize;
use serde_json::{Map, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{CliError, CliResult};

/// Manifest schema version.
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Tables as CSV, no images.
    Csv,
    /// Tables as JSON arrays of records, no images.
    Json,
    /// Tables as CSV plus PPM renderings.
    Ppm,
    /// Tables as CSV plus PNG renderings (needs the `png` feature).
    Png,
}

#[derive(Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    subcommand: &'a str,
    params: &'a Value,
    seed: u64,
    version: &'a str,
    outputs: &'a [String],
    wall_clock_seconds: f64,
}

/// Collects the files written by one subcommand.
pub struct Ctx {
    pub seed: u64,
    pub format: Format,
    out: PathBuf,
    subcommand: String,
    params: Value,
    outputs: Vec<String>,
    start: Instant,
}

impl Ctx {
    pub fn new(out: &Path, format: Format, seed: u64, subcommand: String, params: Value) -> CliResult<Self> {
        if format == Format::Png && !cfg!(feature = "png") {
            return Err(CliError::Usage("--format png needs a build with the `png` feature".into()));
        }
        fs::create_dir_all(out)?;
        Ok(Self { seed, format, out: out.to_path_buf(), subcommand, params, outputs: Vec::new(), start: Instant::now() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn record(&mut self, name: String) {
        if !self.outputs.contains(&name) {
            self.outputs.push(name);
        }
    }

    /// Writes `stem.csv`, or `stem.json` under `--format json`.
    pub fn table(&mut self, stem: &str, t: &Table) -> CliResult<()> {
        let name = if self.format == Format::Json {
            let name = format!("{stem}.json");
            io::write_json(&self.path(&name), &table_records(t))?;
            name
        } else {
            let name = format!("{stem}.csv");
            t.write(&self.path(&name))?;
            name
        };
        self.record(name);
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, stem: &str, v: &T) -> CliResult<()> {
        let name = format!("{stem}.json");
        io::write_json(&self.path(&name), v)?;
        self.record(name);
        Ok(())
    }

    /// Registers a file the caller wrote itself.
    pub fn file(&mut self, name: &str) {
        self.record(name.to_string());
    }

    pub fn wants_image(&self) -> bool {
        matches!(self.format, Format::Ppm | Format::Png)
    }

    /// Writes a rendering when the format asks for images.
    pub fn image(&mut self, stem: &str, im: &Image) -> CliResult<()> {
        match self.format {
            Format::Ppm => {
                let name = format!("{stem}.ppm");
                im.write_ppm(&self.path(&name))?;
                self.record(name);
            }
            Format::Png => {
                let name = format!("{stem}.png");
                write_png(&self.path(&name), im)?;
                self.record(name);
            }
            _ => {}
        }
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.record("manifest.json".into());
        let m = Manifest {
            manifest_version: MANIFEST_VERSION,
            subcommand: &self.subcommand,
            params: &self.params,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
            outputs: &self.outputs,
            wall_clock_seconds: self.start.elapsed().as_secs_f64(),
        };
        io::write_json(&self.path("manifest.json"), &m)?;
        Ok(())
    }
}

/// Rows as JSON objects; numeric cells become numbers.
fn table_records(t: &Table) -> Value {
    let rows = t
        .rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            for (k, c) in t.header.iter().zip(r) {
                let v = match c.parse::<f64>() {
                    Ok(x) if x.is_finite() => serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null),
                    _ => Value::String(c.clone()),
                };
                m.insert(k.clone(), v);
            }
            Value::Object(m)
        })
        .collect();
    Value::Array(rows)
}

#[cfg(feature = "png")]
fn write_png(path: &Path, im: &Image) -> CliResult<()> {
    let flat: Vec<u8> = im.data.iter().flatten().copied().collect();
    let buf = image::RgbImage::from_raw(im.width as u32, im.height as u32, flat)
        .ok_or_else(|| CliError::Usage("image buffer size mismatch".into()))?;
    buf.save(path).map_err(|e| CliError::Io(std::io::Error::other(e)))
}

#[cfg(not(feature = "png"))]
fn write_png(_: &Path, _: &Image) -> CliResult<()> {
    Err(CliError::Usage("--format png needs a build with the `png` feature".into()))
}
