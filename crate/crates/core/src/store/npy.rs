// SPDX-License-Identifier: Apache-2.0

//! NPY v1.0 writer and a reader for the same subset (C order, little endian).

use super::StoreError;

pub trait NpyElement: Copy {
    const DESCR: &'static str;
    const SIZE: usize;
    fn put(self, out: &mut Vec<u8>);
    fn get(bytes: &[u8]) -> Self;
}

impl NpyElement for f32 {
    const DESCR: &'static str = "<f4";
    const SIZE: usize = 4;
    fn put(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn get(b: &[u8]) -> Self {
        f32::from_le_bytes(b.try_into().expect("4 bytes"))
    }
}

impl NpyElement for f64 {
    const DESCR: &'static str = "<f8";
    const SIZE: usize = 8;
    fn put(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn get(b: &[u8]) -> Self {
        f64::from_le_bytes(b.try_into().expect("8 bytes"))
    }
}

impl NpyElement for i64 {
    const DESCR: &'static str = "<i8";
    const SIZE: usize = 8;
    fn put(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn get(b: &[u8]) -> Self {
        i64::from_le_bytes(b.try_into().expect("8 bytes"))
    }
}

const MAGIC: &[u8] = b"\x93NUMPY";

fn shape_text(shape: &[usize]) -> String {
    match shape {
        [] => "()".to_string(),
        [n] => format!("({n},)"),
        _ => format!("({})", shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")),
    }
}

/// Serializes `values` with the given shape. The header is space padded and
/// newline terminated so the data starts at a multiple of 64 bytes.
pub fn write_npy<T: NpyElement>(values: &[T], shape: &[usize]) -> Result<Vec<u8>, StoreError> {
    let count: usize = shape.iter().product();
    if count != values.len() {
        return Err(StoreError::Shape(format!("shape {shape:?} holds {count} values, got {}", values.len())));
    }
    let mut header =
        format!("{{'descr': '{}', 'fortran_order': False, 'shape': {}, }}", T::DESCR, shape_text(shape));
    let unpadded = MAGIC.len() + 2 + 2 + header.len() + 1;
    header.push_str(&" ".repeat((64 - unpadded % 64) % 64));
    header.push('\n');
    let hlen = u16::try_from(header.len()).map_err(|_| StoreError::Shape("header too long".into()))?;
    let mut out = Vec::with_capacity(MAGIC.len() + 4 + header.len() + values.len() * T::SIZE);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&hlen.to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for &v in values {
        v.put(&mut out);
    }
    Ok(out)
}

/// Reads a file produced by [`write_npy`]; returns `(values, shape)`.
pub fn read_npy<T: NpyElement>(bytes: &[u8]) -> Result<(Vec<T>, Vec<usize>), StoreError> {
    let bad = |m: &str| StoreError::Shape(format!("not an NPY v1.0 array: {m}"));
    if bytes.len() < 10 || &bytes[..6] != MAGIC || bytes[6] != 1 {
        return Err(bad("magic/version"));
    }
    let hlen = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let header = std::str::from_utf8(bytes.get(10..10 + hlen).ok_or_else(|| bad("short header"))?)
        .map_err(|_| bad("header encoding"))?;
    if !header.contains(&format!("'descr': '{}'", T::DESCR)) || !header.contains("'fortran_order': False") {
        return Err(bad("dtype or order"));
    }
    let start = header.find("'shape': (").ok_or_else(|| bad("shape"))? + "'shape': (".len();
    let end = start + header[start..].find(')').ok_or_else(|| bad("shape"))?;
    let shape: Vec<usize> = header[start..end]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| bad("shape entry")))
        .collect::<Result<_, _>>()?;
    let data = &bytes[10 + hlen..];
    let count: usize = shape.iter().product();
    if data.len() != count * T::SIZE {
        return Err(bad("data length"));
    }
    Ok((data.chunks_exact(T::SIZE).map(T::get).collect(), shape))
}
