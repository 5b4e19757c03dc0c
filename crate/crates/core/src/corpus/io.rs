//! Interaction lists and the SGUR tensor format.
//!
//! SGUR layout, all little-endian, no padding or trailer:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SGUR"
//! 4       4     u32 version (= 1)
//! 8       4     u32 rows
//! 12      4     u32 cols
//! 16      4*r*c binary32 values, row-major
//! ```

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::corpus::{InteractionGraph, ModalityFeatures, Vocab};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 4] = b"SGUR";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

/// Parses `user<TAB>item` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_interactions<R: BufRead>(reader: R, source: &Path) -> Result<(InteractionGraph, Vocab)> {
    let mut vocab = Vocab::default();
    let mut edges = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                path: source.to_path_buf(),
                line: n + 1,
                message: format!("expected user<TAB>item, got {} field(s)", fields.len()),
            });
        }
        let u = vocab.users.intern(fields[0]);
        let i = vocab.items.intern(fields[1]);
        edges.push((u, i));
    }
    if edges.is_empty() {
        return Err(Error::EmptyCorpus(source.to_path_buf()));
    }
    let graph = InteractionGraph::from_edges(vocab.users.len(), vocab.items.len(), &edges)?;
    Ok((graph, vocab))
}

pub fn load_interactions(path: &Path) -> Result<(InteractionGraph, Vocab)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_interactions(BufReader::new(file), path)
}

/// Writes the graph as `user<TAB>item` lines using the vocab's external ids.
pub fn write_interactions(graph: &InteractionGraph, vocab: &Vocab, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (u, i) in graph.edges() {
        let user = vocab.users.id_of(u).ok_or_else(|| Error::param(format!("user {u} missing from vocab")))?;
        let item = vocab.items.id_of(i).ok_or_else(|| Error::param(format!("item {i} missing from vocab")))?;
        writeln!(w, "{user}\t{item}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn encode_tensor(matrix: &Matrix) -> Result<Vec<u8>> {
    let rows = u32::try_from(matrix.rows()).map_err(|_| Error::Format("row count exceeds u32".into()))?;
    let cols = u32::try_from(matrix.cols()).map_err(|_| Error::Format("column count exceeds u32".into()))?;
    let mut buf = Vec::with_capacity(HEADER_LEN + 4 * matrix.as_slice().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&rows.to_le_bytes());
    buf.extend_from_slice(&cols.to_le_bytes());
    for v in matrix.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    Ok(buf)
}

pub fn decode_tensor(bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("header truncated ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic (expected \"SGUR\")".into()));
    }
    let word = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let rows = word(8) as usize;
    let cols = word(12) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("declared shape overflows".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload is {} bytes, header declares {rows}x{cols} ({expected} bytes)",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Matrix::from_vec(rows, cols, data)
}

pub fn write_tensor(matrix: &Matrix, path: &Path) -> Result<()> {
    let bytes = encode_tensor(matrix)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_tensor(path: &Path) -> Result<Matrix> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_tensor(&bytes)
}

/// Comma-separated rows of decimal floats; blank lines skipped.
pub fn parse_csv_matrix(text: &str, source: &Path) -> Result<Matrix> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f32>, _> = line.split(',').map(|f| f.trim().parse::<f32>()).collect();
        let row = row.map_err(|e| Error::Parse {
            path: source.to_path_buf(),
            line: n + 1,
            message: e.to_string(),
        })?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(Error::Parse {
                    path: source.to_path_buf(),
                    line: n + 1,
                    message: format!("expected {first} columns, got {}", row.len()),
                });
            }
        }
        rows.push(row);
    }
    Matrix::from_rows(&rows)
}

/// Loads a feature matrix. Files ending in `.csv` are parsed as CSV; everything else must be SGUR.
pub fn load_features(path: &Path, modality: &str) -> Result<ModalityFeatures> {
    let is_csv = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
    let matrix = if is_csv {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_csv_matrix(&text, path)?
    } else {
        read_tensor(path)?
    };
    ModalityFeatures::new(modality, matrix)
}

pub fn write_features(features: &ModalityFeatures, path: &Path) -> Result<()> {
    write_tensor(features.matrix(), path)
}
