//! JSON output with every float written to 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

#[derive(Clone, Copy, Debug, Default)]
pub struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{}", sig17(value))
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// `{:.16e}` with Rust's `e` exponent, e.g. `1.2665147955292222e-2`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Nine significant digits for human-readable tables.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || (1e-4..1e9).contains(&x.abs()) {
        let digits = 8 - x.abs().log10().floor().max(0.0) as i32;
        format!("{x:.*}", digits.max(0) as usize)
    } else {
        format!("{x:.8e}")
    }
}

/// One compact JSON line.
pub fn to_line<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip() {
        for x in [1.0 / (8.0 * std::f64::consts::PI.powi(2)), -0.1, 1e300, 5e-324, 0.0] {
            let line = to_line(&json!({ "x": x })).unwrap();
            let back: serde_json::Value = serde_json::from_str(&line).unwrap();
            assert_eq!(back["x"].as_f64().unwrap(), x);
        }
        assert_eq!(to_line(&json!([f64::NAN])).unwrap(), "[null]");
        assert_eq!(to_line(&json!({ "n": 91 })).unwrap(), r#"{"n":91}"#);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(0.1), "1.0000000000000001e-1");
        assert_eq!(sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(sig9(91.0), "91.0000000");
        assert_eq!(sig9(1.5e-7), "1.50000000e-7");
    }
}
