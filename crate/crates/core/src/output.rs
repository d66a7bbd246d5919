//! Deterministic JSON and CSV rendering.
//!
//! Floats are written with 17 significant digits so that identical runs are
//! byte-identical and every `f64` round-trips.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

pub const SCHEMA_VERSION: u32 = 1;

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // CSV only; JSON writes non-finite values as null
        format!("{x}")
    }
}

/// Wraps another formatter and overrides float output.
struct FixedFloat<F>(F);

macro_rules! delegate {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.$name(w)
            }
        )*
    };
}

impl<F: Formatter> Formatter for FixedFloat<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    delegate!(begin_array, end_array, end_array_value, begin_object, end_object, begin_object_value, end_object_value);
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn render<T: Serialize, F: Formatter>(value: &T, formatter: F) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat(formatter));
    Envelope {
        schema: SCHEMA_VERSION,
        body: value,
    }
    .serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Single-line JSON document with a top-level `"schema"` field.
///
/// `value` must serialize as a map (a struct or a map type).
pub fn to_json(value: &impl Serialize) -> serde_json::Result<String> {
    render(value, CompactFormatter)
}

/// Indented variant of [`to_json`].
pub fn to_json_pretty(value: &impl Serialize) -> serde_json::Result<String> {
    render(value, PrettyFormatter::new())
}
