use std::collections::HashSet;
use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;

use super::{EmbeddingError, WordEmbedding};

/// Reads a text vector file from disk.
pub fn load_pretrained(path: &Path) -> Result<WordEmbedding, EmbeddingError> {
    let io_err = |source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    read_embedding(io::BufReader::new(file)).map_err(|e| match e {
        EmbeddingError::Io { source, .. } => io_err(source),
        other => other,
    })
}

/// Parses `token v1 ... vd` lines, with an optional leading
/// `<vocab_size> <dim>` header.
pub fn read_embedding<R: BufRead>(input: R) -> Result<WordEmbedding, EmbeddingError> {
    let mut tokens = Vec::new();
    let mut values = Vec::new();
    let mut seen = HashSet::new();
    let mut dim: Option<usize> = None;
    let mut header: Option<(usize, usize)> = None;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| EmbeddingError::Io {
            path: "<input>".into(),
            source,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-empty line");
        let rest: Vec<&str> = fields.collect();
        if idx == 0 && rest.len() == 1 {
            if let (Ok(n), Ok(d)) = (token.parse::<usize>(), rest[0].parse::<usize>()) {
                header = Some((n, d));
                dim = Some(d);
                continue;
            }
        }
        let expected = *dim.get_or_insert(rest.len());
        if rest.len() != expected || expected == 0 {
            return Err(EmbeddingError::Dimension {
                line: line_no,
                expected,
                found: rest.len(),
            });
        }
        if !seen.insert(token.to_owned()) {
            return Err(EmbeddingError::DuplicateToken {
                line: line_no,
                token: token.to_owned(),
            });
        }
        for field in rest {
            let v: f64 = field.parse().map_err(|_| EmbeddingError::Parse {
                line: line_no,
                message: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(EmbeddingError::Parse {
                    line: line_no,
                    message: format!("non-finite component {field:?}"),
                });
            }
            values.push(v);
        }
        tokens.push(token.to_owned());
    }
    let Some(dim) = dim.filter(|_| !tokens.is_empty()) else {
        return Err(EmbeddingError::Empty);
    };
    if let Some((n, _)) = header {
        if n != tokens.len() {
            return Err(EmbeddingError::Parse {
                line: 1,
                message: format!("header announces {n} vectors, file has {}", tokens.len()),
            });
        }
    }
    Ok(WordEmbedding::new(dim, tokens, values))
}

/// Writes the text vector format. Components use the shortest decimal that
/// reads back to the same `f64`.
pub fn write_embedding(emb: &WordEmbedding, path: &Path, header: bool) -> Result<(), EmbeddingError> {
    let io_err = |source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    write_to(emb, &mut out, header).and_then(|_| out.flush()).map_err(io_err)
}

fn write_to<W: Write>(emb: &WordEmbedding, out: &mut W, header: bool) -> io::Result<()> {
    if header {
        writeln!(out, "{} {}", emb.len(), emb.dim())?;
    }
    for (i, token) in emb.tokens().iter().enumerate() {
        out.write_all(token.as_bytes())?;
        for v in emb.vector(i) {
            write!(out, " {v}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}
