use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::localize::GrayImage;

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(self.pos) {
                None => parse_err(self.pos, format!("unexpected end of data, expected {what}")),
                Some(_) => parse_err(self.pos, format!("expected {what}")),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(start, format!("{what} is too large")))
    }
}

/// Decodes a P2 (ASCII) or P5 (binary) greymap with maxval <= 255.
/// Samples are rescaled to 0..=255 when maxval is smaller.
pub fn pgm_decode(bytes: &[u8]) -> Result<GrayImage> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(parse_err(0, "bad magic number, expected P2 or P5")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(parse_err(maxval_at, format!("image dimensions must be positive, got {width}x{height}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(parse_err(maxval_at, format!("maxval must be in 1..=255, got {maxval}")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| parse_err(maxval_at, "image dimensions overflow"))?;

    let raw: Vec<u8> = if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(parse_err(cur.pos, "expected whitespace after maxval")),
        }
        let end = cur.pos + count;
        if end > bytes.len() {
            return Err(parse_err(
                bytes.len(),
                format!("truncated raster: need {count} bytes, found {}", bytes.len() - cur.pos),
            ));
        }
        bytes[cur.pos..end].to_vec()
    } else {
        let mut v = Vec::with_capacity(count);
        for _ in 0..count {
            let at = cur.pos;
            let n = cur.number("pixel value")?;
            v.push(u8::try_from(n).map_err(|_| parse_err(at, format!("pixel value {n} exceeds maxval {maxval}")))?);
        }
        v
    };

    let mut pixels = raw;
    if let Some(i) = pixels.iter().position(|&p| p as usize > maxval) {
        return Err(parse_err(maxval_at, format!("pixel {i} exceeds maxval {maxval}")));
    }
    if maxval != 255 {
        for p in &mut pixels {
            *p = ((*p as usize * 255 + maxval / 2) / maxval) as u8;
        }
    }
    GrayImage::new(width, height, pixels)
}

/// Binary (P5) encoding with maxval 255.
pub fn pgm_encode(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

pub fn pgm_load(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    pgm_decode(&bytes).map_err(|e| e.in_file(path))
}

pub fn pgm_save(image: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, pgm_encode(image)).map_err(|e| Error::from(e).in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ascii_example() {
        let img = pgm_decode(b"P2\n2 2\n255\n0 64 128 255").unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0, 64, 128, 255]);
    }

    #[test]
    fn binary_matches_ascii() {
        let a = pgm_decode(b"P2\n2 2\n255\n0 64 128 255").unwrap();
        let b = pgm_decode(b"P5\n2 2\n255\n\x00\x40\x80\xff").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn comments_are_skipped() {
        let img = pgm_decode(b"P2 # magic\n# a comment line\n3 1 # dims\n255\n1 2 # px\n 3\n").unwrap();
        assert_eq!(img.pixels(), &[1, 2, 3]);
    }

    #[test]
    fn truncated_binary_is_rejected() {
        match pgm_decode(b"P5\n2 2\n255\n\x00\x01\x02") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 14),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(pgm_decode(b"P2\n2 2\n255\n1 2 3"), Err(Error::Parse { .. })));
    }

    #[test]
    fn header_errors() {
        assert!(matches!(pgm_decode(b"P6\n1 1\n255\n\x00"), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(pgm_decode(b""), Err(Error::Parse { .. })));
        assert!(matches!(pgm_decode(b"P5\n1 1\n65535\n\x00\x00"), Err(Error::Parse { .. })));
        assert!(matches!(pgm_decode(b"P2\n1 1\n15\n16"), Err(Error::Parse { .. })));
        assert!(matches!(pgm_decode(b"P2\n0 1\n255\n"), Err(Error::Parse { .. })));
        assert!(matches!(pgm_decode(b"P2\nx 1\n255\n"), Err(Error::Parse { offset: 3, .. })));
    }

    #[test]
    fn small_maxval_is_rescaled() {
        let img = pgm_decode(b"P2\n3 1\n15\n0 8 15").unwrap();
        assert_eq!(img.pixels(), &[0, 136, 255]);
    }

    #[test]
    fn minimal_and_saturated_images() {
        let one = GrayImage::new(1, 1, vec![7]).unwrap();
        let bytes = pgm_encode(&one);
        assert_eq!(bytes, b"P5\n1 1\n255\n\x07");
        assert_eq!(pgm_decode(&bytes).unwrap(), one);
        let white = GrayImage::new(5, 3, vec![255; 15]).unwrap();
        assert_eq!(pgm_decode(&pgm_encode(&white)).unwrap(), white);
    }

    #[test]
    fn file_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.pgm");
        std::fs::write(&p, b"nope").unwrap();
        let err = pgm_load(&p).unwrap_err();
        assert!(err.to_string().contains("bad.pgm"));
        assert!(pgm_load(dir.path().join("missing.pgm")).is_err());
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let img = GrayImage::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap();
            prop_assert_eq!(pgm_decode(&pgm_encode(&img)).unwrap(), img);
        }
    }
}
