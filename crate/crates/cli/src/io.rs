//! Matrix CSV and grayscale PGM files.
//!
//! Matrices are headerless CSV, one row per line, integer entries. Images
//! are PGM, read as P2 or P5 and always written as P5.

use std::fs;
use std::io::Read;
use std::path::Path;

use lrmf_core::{Algebra, Matrix};

use crate::error::{io_error, CliError, Result};

pub fn parse_matrix_csv<R: Read>(reader: R, algebra: Algebra) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Csv(e.to_string()))?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|field| {
                field.parse::<u32>().map_err(|_| CliError::BadEntry {
                    line,
                    field: field.to_string(),
                })
            })
            .collect::<Result<Vec<u32>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::RaggedRow {
                    line,
                    expected: first.len(),
                    actual: row.len(),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::EmptyInput);
    }
    Ok(Matrix::from_rows(algebra, &rows)?)
}

pub fn load_matrix_csv(path: &Path, algebra: Algebra) -> Result<Matrix> {
    let file = fs::File::open(path).map_err(io_error(path))?;
    parse_matrix_csv(file, algebra)
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 0..m.rows() {
        wtr.write_record(m.row(i).iter().map(|v| v.to_string()))
            .expect("writing to memory");
    }
    String::from_utf8(wtr.into_inner().expect("writing to memory")).expect("digits and commas")
}

pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<()> {
    fs::write(path, matrix_to_csv(m)).map_err(io_error(path))
}

/// An 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u8,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, maxval: u8, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(CliError::Pgm(format!("empty image {width}x{height}")));
        }
        if maxval == 0 {
            return Err(CliError::Pgm("maxval must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(CliError::Pgm(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(&v) = pixels.iter().find(|&&v| v > maxval) {
            return Err(CliError::Pgm(format!("pixel {v} exceeds maxval {maxval}")));
        }
        Ok(Self {
            width,
            height,
            maxval,
            pixels,
        })
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }
}

/// Cursor over a PGM header: whitespace-separated tokens, `#` comments.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self
            .token()
            .ok_or_else(|| CliError::Pgm(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::Pgm(format!("bad {what} {:?}", String::from_utf8_lossy(tok))))
    }
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut h = Header { bytes, pos: 0 };
    let binary = match h.token() {
        Some(b"P2") => false,
        Some(b"P5") => true,
        other => {
            return Err(CliError::Pgm(format!(
                "unsupported magic {:?}",
                other.map(String::from_utf8_lossy).unwrap_or_default()
            )))
        }
    };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(CliError::Pgm(format!("maxval {maxval} outside 1..=255")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| CliError::Pgm("image dimensions overflow".into()))?;
    let pixels = if binary {
        // exactly one whitespace byte separates the header from the raster
        if !h.bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(CliError::Pgm("missing whitespace after maxval".into()));
        }
        let raster = &bytes[h.pos + 1..];
        if raster.len() < count {
            return Err(CliError::Pgm(format!(
                "truncated raster: expected {count} bytes, found {}",
                raster.len()
            )));
        }
        raster[..count].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(count);
        for i in 0..count {
            let v = h.token().ok_or_else(|| {
                CliError::Pgm(format!("truncated raster: expected {count} values, found {i}"))
            })?;
            let v: usize = std::str::from_utf8(v)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Pgm(format!("bad pixel {:?}", String::from_utf8_lossy(v))))?;
            if v > maxval {
                return Err(CliError::Pgm(format!("pixel {v} exceeds maxval {maxval}")));
            }
            pixels.push(v as u8);
        }
        pixels
    };
    GrayImage::new(width, height, maxval as u8, pixels)
}

pub fn load_pgm(path: &Path) -> Result<GrayImage> {
    parse_pgm(&fs::read(path).map_err(io_error(path))?)
}

/// Binary (P5) encoding.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", img.width, img.height, img.maxval).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    fs::write(path, encode_pgm(img)).map_err(io_error(path))
}
