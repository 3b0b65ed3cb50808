// SPDX-License-Identifier: Apache-2.0

//! JSON with every float written as 17 significant digits.

use std::io;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};

/// Compact output; floats as `d.dddddddddddddddde±x`, non-finite as `null`.
#[derive(Default)]
pub struct FixedDigits(CompactFormatter);

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

pub fn to_bytes<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FixedDigits::default());
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

pub fn from_bytes<T: DeserializeOwned>(bytes: &[u8]) -> serde_json::Result<T> {
    serde_json::from_slice(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits_and_round_trip() {
        let v = vec![0.1f64, -2.5e-13, 1.0 / 3.0, 0.0];
        let text = String::from_utf8(to_bytes(&v).unwrap()).unwrap();
        assert_eq!(
            text,
            "[1.0000000000000001e-1,-2.4999999999999999e-13,3.3333333333333331e-1,0.0000000000000000e0]\n"
        );
        let back: Vec<f64> = from_bytes(text.as_bytes()).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn integers_stay_integers() {
        assert_eq!(to_bytes(&(3i64, 7u32)).unwrap(), b"[3,7]\n");
    }
}
