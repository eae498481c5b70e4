//! JSON helpers shared by every file format: scalar decoding with field paths,
//! and an encoder that writes every float with 17 significant digits.

use std::io;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::{Error, Result};

/// Writes floats as `{:.16e}` so that every double survives a text round trip.
#[derive(Clone, Copy, Debug, Default)]
pub struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub(crate) fn field<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    let map = obj
        .as_object()
        .ok_or_else(|| Error::schema(path, "expected an object"))?;
    map.get(key)
        .ok_or_else(|| Error::schema(path, format!("missing field \"{key}\"")))
}

pub(crate) fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::schema(path, "expected an array"))
}

fn finite(x: f64, path: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite {
            context: path.to_string(),
        })
    }
}

fn number(v: &Value, path: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| Error::schema(path, "expected a number"))?;
    finite(x, path)
}

/// A scalar is `[re, im]` or a bare real number.
pub(crate) fn scalar(v: &Value, path: &str) -> Result<Complex64> {
    match v {
        Value::Number(_) => Ok(Complex64::new(number(v, path)?, 0.0)),
        Value::Array(parts) if parts.len() == 2 => Ok(Complex64::new(
            number(&parts[0], &format!("{path}[0]"))?,
            number(&parts[1], &format!("{path}[1]"))?,
        )),
        _ => Err(Error::schema(path, "expected a number or a [re, im] pair")),
    }
}

pub(crate) fn scalars(v: &Value, path: &str) -> Result<Vec<Complex64>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(k, s)| scalar(s, &format!("{path}[{k}]")))
        .collect()
}

pub(crate) fn exponents(v: &Value, path: &str) -> Result<Vec<u32>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(k, e)| {
            e.as_u64()
                .and_then(|e| u32::try_from(e).ok())
                .ok_or_else(|| {
                    Error::schema(format!("{path}[{k}]"), "expected a nonnegative integer")
                })
        })
        .collect()
}
