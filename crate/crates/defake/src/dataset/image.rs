use std::path::Path;

use ndarray::Array3;

use super::{DatasetError, Result};

/// RGB image as `[3, w, h]` with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    pub pixels: Array3<f64>,
}

impl ImageTensor {
    pub fn width(&self) -> usize {
        self.pixels.dim().1
    }

    pub fn height(&self) -> usize {
        self.pixels.dim().2
    }
}

/// Reference image hook: read an 8-bit binary PPM (P6) file.
///
/// Pixels are stored row-major in the file and reordered to `[3, w, h]`,
/// scaled by 1/255. No resizing: a payload that disagrees with the header
/// dimensions is an error.
pub fn reference_transform(path: &Path) -> Result<ImageTensor> {
    let bytes = std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |detail: String| DatasetError::BadImage {
        path: path.to_path_buf(),
        detail,
    };

    fn next_token(bytes: &[u8], pos: &mut usize) -> Option<(usize, usize)> {
        let mut i = *pos;
        loop {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            break;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start < i {
            *pos = i;
            Some((start, i))
        } else {
            None
        }
    }

    let mut pos = 0usize;
    let mut read_token = |bytes: &[u8]| -> Result<String> {
        let (start, end) = next_token(bytes, &mut pos).ok_or_else(|| DatasetError::BadImage {
            path: path.to_path_buf(),
            detail: "truncated header".into(),
        })?;
        Ok(String::from_utf8_lossy(&bytes[start..end]).into_owned())
    };

    let magic = read_token(&bytes)?;
    if magic != "P6" {
        return Err(bad(format!("unsupported magic number {magic:?}")));
    }
    let width: usize = read_token(&bytes)?
        .parse()
        .map_err(|_| bad("invalid width".into()))?;
    let height: usize = read_token(&bytes)?
        .parse()
        .map_err(|_| bad("invalid height".into()))?;
    let maxval: usize = read_token(&bytes)?
        .parse()
        .map_err(|_| bad("invalid maxval".into()))?;
    if maxval != 255 {
        return Err(bad(format!("unsupported bit depth (maxval {maxval})")));
    }
    // exactly one whitespace byte separates the header from the payload
    if pos + 1 > bytes.len() {
        return Err(bad("missing pixel payload".into()));
    }
    let payload = &bytes[pos + 1..];
    let expected = width * height * 3;
    if payload.len() != expected {
        return Err(bad(format!(
            "payload is {} bytes, header implies {expected}",
            payload.len()
        )));
    }

    let mut pixels = Array3::<f64>::zeros((3, width, height));
    for y in 0..height {
        for x in 0..width {
            for c in 0..3 {
                pixels[(c, x, y)] = payload[(y * width + x) * 3 + c] as f64 / 255.0;
            }
        }
    }
    Ok(ImageTensor { pixels })
}

/// Serialize an image back to binary PPM; used by tests and data generators.
pub fn write_ppm(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    assert_eq!(rgb.len(), width * height * 3);
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(rgb);
    std::fs::write(path, out).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}
