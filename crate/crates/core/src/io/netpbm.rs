use super::FormatError;
use crate::camera::DepthMap;
use crate::mask::BinaryMask;

/// Header fields after the magic number; returns values and the data offset.
fn header(bytes: &[u8], magic: &[u8; 2], fields: usize) -> Result<(Vec<u32>, usize), FormatError> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(FormatError::new(format!("expected magic number {}", String::from_utf8_lossy(magic))));
    }
    let mut pos = 2;
    let mut values = Vec::new();
    while values.len() < fields {
        // Whitespace and comments between tokens.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(FormatError::new("truncated or malformed header"));
        }
        let v: u32 = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| FormatError::new("header value out of range"))?;
        values.push(v);
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(FormatError::new("missing whitespace after header"));
    }
    Ok((values, pos + 1))
}

/// Binary PGM with millimeter samples, returned in centimeters.
pub fn decode_pgm16(bytes: &[u8]) -> Result<DepthMap, FormatError> {
    let (h, off) = header(bytes, b"P5", 3)?;
    let (w, ht, maxval) = (h[0], h[1], h[2]);
    if maxval == 0 || maxval > 65535 {
        return Err(FormatError::new(format!("maxval {maxval} out of range")));
    }
    let n = w as usize * ht as usize;
    let width_bytes = if maxval < 256 { 1 } else { 2 };
    let data = &bytes[off..];
    if data.len() < n * width_bytes {
        return Err(FormatError::new(format!("expected {} raster bytes, found {}", n * width_bytes, data.len())));
    }
    let values = (0..n)
        .map(|i| {
            let mm = if width_bytes == 2 {
                u16::from_be_bytes([data[2 * i], data[2 * i + 1]]) as f64
            } else {
                data[i] as f64
            };
            mm / 10.0
        })
        .collect();
    DepthMap::new(w, ht, values).map_err(|e| FormatError::new(e.to_string()))
}

/// Depth in centimeters to a 16-bit PGM in whole millimeters.
pub fn encode_pgm16(depth: &DepthMap) -> Result<Vec<u8>, FormatError> {
    let mut out = format!("P5\n{} {}\n65535\n", depth.width(), depth.height()).into_bytes();
    for &d in depth.values() {
        let mm = (d * 10.0).round();
        if !(0.0..=65535.0).contains(&mm) {
            return Err(FormatError::new(format!("depth {d} cm does not fit in 16-bit millimeters")));
        }
        out.extend_from_slice(&(mm as u16).to_be_bytes());
    }
    Ok(out)
}

/// Binary PBM; set (black) bits are foreground.
pub fn decode_pbm(bytes: &[u8]) -> Result<BinaryMask, FormatError> {
    let (h, off) = header(bytes, b"P4", 2)?;
    let (w, ht) = (h[0] as usize, h[1] as usize);
    let row = w.div_ceil(8);
    let data = &bytes[off..];
    if data.len() < row * ht {
        return Err(FormatError::new(format!("expected {} raster bytes, found {}", row * ht, data.len())));
    }
    let mut bits = Vec::with_capacity(w * ht);
    for y in 0..ht {
        for x in 0..w {
            bits.push(data[y * row + x / 8] >> (7 - x % 8) & 1 == 1);
        }
    }
    BinaryMask::from_bits(w as u32, ht as u32, bits).map_err(|e| FormatError::new(e.to_string()))
}

pub fn encode_pbm(mask: &BinaryMask) -> Vec<u8> {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let row = w.div_ceil(8);
    let mut out = format!("P4\n{w} {h}\n").into_bytes();
    let mut data = vec![0u8; row * h];
    for y in 0..h {
        for x in 0..w {
            if mask.bits()[y * w + x] {
                data[y * row + x / 8] |= 0x80 >> (x % 8);
            }
        }
    }
    out.extend(data);
    out
}
