//! NPY format version 1.0, restricted to 2-D C-ordered little-endian float arrays.
//!
//! Layout: `\x93NUMPY`, version bytes `01 00`, little-endian `u16` header
//! length, an ASCII Python dict literal padded with spaces and terminated by
//! `\n`, then the raw payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::IngestError;
use crate::matrix::{Dtype, EmbeddingMatrix};

pub const NPY_MAGIC: &[u8; 6] = b"\x93NUMPY";

/// Header blocks are padded so the payload starts on this boundary.
const HEADER_ALIGN: usize = 64;

pub fn load_npy(path: &Path) -> Result<EmbeddingMatrix, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_npy(BufReader::new(file)).map(|m| m.with_label(path.display().to_string()))
}

pub fn read_npy<R: Read>(mut reader: R) -> Result<EmbeddingMatrix, IngestError> {
    let mut preamble = [0u8; 10];
    let got = read_up_to(&mut reader, &mut preamble)?;
    if got < 6 || &preamble[..6] != NPY_MAGIC {
        return Err(IngestError::MagicMismatch);
    }
    if got < 10 {
        return Err(IngestError::HeaderError("file ends inside the preamble".into()));
    }
    let (major, minor) = (preamble[6], preamble[7]);
    if (major, minor) != (1, 0) {
        return Err(IngestError::UnsupportedVersion { major, minor });
    }
    let header_len = u16::from_le_bytes([preamble[8], preamble[9]]) as usize;
    let mut header = vec![0u8; header_len];
    if read_up_to(&mut reader, &mut header)? != header_len {
        return Err(IngestError::HeaderError("file ends inside the header".into()));
    }
    let header = std::str::from_utf8(&header)
        .map_err(|_| IngestError::HeaderError("header is not ASCII".into()))?;
    let header = Header::parse(header)?;

    let n_values = header.n_rows * header.n_cols;
    let expected = n_values * header.dtype.size_of();
    let mut payload = Vec::with_capacity(expected);
    reader
        .take(expected as u64)
        .read_to_end(&mut payload)
        .map_err(|e| IngestError::HeaderError(format!("payload read failed: {e}")))?;
    if payload.len() != expected {
        return Err(IngestError::Truncated {
            expected,
            found: payload.len(),
        });
    }

    let data: Vec<f64> = match header.dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect(),
    };
    EmbeddingMatrix::new(header.n_rows, header.n_cols, data, header.dtype)
}

/// Writes `m` in its own dtype. `f32` matrices are narrowed, which is exact
/// for anything that was loaded as `f32`.
pub fn write_npy(path: &Path, m: &EmbeddingMatrix) -> Result<(), IngestError> {
    let file = File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_npy_to(&mut w, m).map_err(|e| IngestError::io(path, e))?;
    w.flush().map_err(|e| IngestError::io(path, e))
}

pub fn write_npy_to<W: Write>(w: &mut W, m: &EmbeddingMatrix) -> std::io::Result<()> {
    let descr = match m.dtype() {
        Dtype::F32 => "<f4",
        Dtype::F64 => "<f8",
    };
    let mut dict = format!(
        "{{'descr': '{descr}', 'fortran_order': False, 'shape': ({}, {}), }}",
        m.n_rows(),
        m.n_cols()
    );
    let unpadded = NPY_MAGIC.len() + 4 + dict.len() + 1;
    let pad = (HEADER_ALIGN - unpadded % HEADER_ALIGN) % HEADER_ALIGN;
    dict.push_str(&" ".repeat(pad));
    dict.push('\n');

    w.write_all(NPY_MAGIC)?;
    w.write_all(&[1, 0])?;
    w.write_all(&(dict.len() as u16).to_le_bytes())?;
    w.write_all(dict.as_bytes())?;
    match m.dtype() {
        Dtype::F32 => {
            for &v in m.as_slice() {
                w.write_all(&(v as f32).to_le_bytes())?;
            }
        }
        Dtype::F64 => {
            for &v in m.as_slice() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_up_to<R: Read>(reader: &mut R, buf: &mut [u8]) -> Result<usize, IngestError> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(IngestError::HeaderError(format!("read failed: {e}"))),
        }
    }
    Ok(filled)
}

#[derive(Debug)]
struct Header {
    dtype: Dtype,
    n_rows: usize,
    n_cols: usize,
}

/// Values that can appear in an NPY header dict.
#[derive(Debug, PartialEq)]
enum Literal {
    Str(String),
    Bool(bool),
    Tuple(Vec<usize>),
}

impl Header {
    fn parse(text: &str) -> Result<Self, IngestError> {
        let entries = parse_dict(text.trim_end())?;
        let lookup = |key: &str| {
            entries
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v)
                .ok_or_else(|| IngestError::HeaderError(format!("missing key '{key}'")))
        };

        let dtype = match lookup("descr")? {
            Literal::Str(s) if s == "<f4" => Dtype::F32,
            Literal::Str(s) if s == "<f8" => Dtype::F64,
            Literal::Str(s) => return Err(IngestError::UnsupportedDtype(s.clone())),
            other => return Err(IngestError::HeaderError(format!("descr is {other:?}"))),
        };
        match lookup("fortran_order")? {
            Literal::Bool(false) => {}
            Literal::Bool(true) => return Err(IngestError::UnsupportedOrder),
            other => {
                return Err(IngestError::HeaderError(format!("fortran_order is {other:?}")))
            }
        }
        let (n_rows, n_cols) = match lookup("shape")? {
            Literal::Tuple(dims) if dims.len() == 2 => (dims[0], dims[1]),
            Literal::Tuple(dims) => {
                return Err(IngestError::ShapeError(format!(
                    "expected a 2-D array, found {} dimension(s)",
                    dims.len()
                )))
            }
            other => return Err(IngestError::HeaderError(format!("shape is {other:?}"))),
        };
        Ok(Header {
            dtype,
            n_rows,
            n_cols,
        })
    }
}

fn parse_dict(text: &str) -> Result<Vec<(String, Literal)>, IngestError> {
    let bad = |msg: &str| IngestError::HeaderError(format!("{msg} in {text:?}"));
    let mut p = Cursor::new(text);
    p.skip_ws();
    if !p.eat('{') {
        return Err(bad("expected '{'"));
    }
    let mut entries = Vec::new();
    loop {
        p.skip_ws();
        if p.eat('}') {
            break;
        }
        let key = p.string().ok_or_else(|| bad("expected a quoted key"))?;
        p.skip_ws();
        if !p.eat(':') {
            return Err(bad("expected ':'"));
        }
        p.skip_ws();
        let value = p.literal().ok_or_else(|| bad("unsupported value"))?;
        entries.push((key, value));
        p.skip_ws();
        if p.eat(',') {
            continue;
        }
        p.skip_ws();
        if p.eat('}') {
            break;
        }
        return Err(bad("expected ',' or '}'"));
    }
    p.skip_ws();
    if !p.rest().is_empty() {
        return Err(bad("trailing characters"));
    }
    Ok(entries)
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Self { s, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> bool {
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn string(&mut self) -> Option<String> {
        let quote = self.rest().chars().next().filter(|c| *c == '\'' || *c == '"')?;
        let body = &self.rest()[1..];
        let end = body.find(quote)?;
        let out = body[..end].to_string();
        self.pos += end + 2;
        Some(out)
    }

    fn literal(&mut self) -> Option<Literal> {
        let rest = self.rest();
        if rest.starts_with('\'') || rest.starts_with('"') {
            return self.string().map(Literal::Str);
        }
        if rest.starts_with("True") {
            self.pos += 4;
            return Some(Literal::Bool(true));
        }
        if rest.starts_with("False") {
            self.pos += 5;
            return Some(Literal::Bool(false));
        }
        if self.eat('(') {
            let mut dims = Vec::new();
            loop {
                self.skip_ws();
                if self.eat(')') {
                    return Some(Literal::Tuple(dims));
                }
                let digits: String = self
                    .rest()
                    .chars()
                    .take_while(|c| c.is_ascii_digit())
                    .collect();
                if digits.is_empty() {
                    return None;
                }
                self.pos += digits.len();
                // numpy may write `3L` for longs on old Python 2 dumps.
                self.eat('L');
                dims.push(digits.parse().ok()?);
                self.skip_ws();
                if !self.eat(',') {
                    self.skip_ws();
                    if self.eat(')') {
                        return Some(Literal::Tuple(dims));
                    }
                    return None;
                }
            }
        }
        None
    }
}
