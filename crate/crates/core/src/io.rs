//! File formats: grid functions as CSV or JSON, spectra as `[re, im]` pairs,
//! and a JSON writer that prints every float with 17 significant digits.

use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fourier::{GridFunction, Spectrum};

#[derive(Serialize, Deserialize)]
struct GridFunctionRepr {
    n: usize,
    samples: Vec<f64>,
}

impl Serialize for GridFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridFunctionRepr {
            n: self.n(),
            samples: self.samples().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GridFunctionRepr::deserialize(d)?;
        if repr.n != repr.samples.len() {
            return Err(D::Error::custom(format!(
                "n = {} but {} samples given",
                repr.n,
                repr.samples.len()
            )));
        }
        GridFunction::new(repr.samples).map_err(D::Error::custom)
    }
}

impl Serialize for Spectrum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.signed_coeffs().iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Spectrum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        let coeffs: Vec<Complex64> = pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        Spectrum::from_signed_coeffs(&coeffs).map_err(D::Error::custom)
    }
}

/// One sample per line.
pub fn grid_to_csv(f: &GridFunction) -> String {
    let mut out = String::with_capacity(f.n() * 24);
    for v in f.samples() {
        out.push_str(&format_f64(*v));
        out.push('\n');
    }
    out
}

pub fn grid_from_csv(text: &str) -> Result<GridFunction> {
    let samples = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad sample {l:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(samples)
}

pub fn grid_from_json(text: &str) -> Result<GridFunction> {
    Ok(serde_json::from_str(text)?)
}

/// Reads a grid function from `.json` or CSV (anything else).
pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        grid_from_json(&text)
    } else {
        grid_from_csv(&text)
    }
}

/// `{:.16e}`: 17 significant digits, stable across platforms.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct FixedDigits<F> {
    inner: F,
}

impl<F: serde_json::ser::Formatter> serde_json::ser::Formatter for FixedDigits<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Pretty JSON with floats printed to 17 significant digits.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let fmt = FixedDigits {
        inner: serde_json::ser::PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}
