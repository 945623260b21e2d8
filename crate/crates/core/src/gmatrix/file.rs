//! Versioned text format for matrices.
//!
//! ```text
//! saw-bounds matrix
//! format_version 1
//! lattice square
//! scheme general
//! mode saw
//! m 1
//! n 2
//! dim 2
//! d 2
//! t 2
//! labels x y
//! partition
//! class 2 1,0 0 (-1,0,0)
//! class 2 0,1 0 (0,-1,1)
//! entries
//! 0 0 1 * x^1
//! 0 1 2 * y^1
//! 1 0 2 * x^1
//! 1 1 1 * y^1
//! checksum <sha256 of all preceding bytes, hex>
//! ```
//!
//! A class line is `class <size> <weight exponents> <walk>`, the walk in the
//! dump format of [`Walk::to_dump`]. Entries are listed in row-major order.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::GMatrix;
use crate::error::{Error, Result};
use crate::poly::{Monomial, Poly};
use crate::walks::{Partition, PartitionClass, Walk};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "saw-bounds matrix";

fn to_text(g: &GMatrix) -> Result<String> {
    if let Some(bad) = g
        .labels
        .iter()
        .find(|l| l.is_empty() || l.chars().any(char::is_whitespace))
    {
        return Err(Error::Precondition(format!("edge-class label `{bad}` cannot be stored")));
    }
    let mut out = String::new();
    let w = &mut out;
    // Writing to a String cannot fail.
    let _ = writeln!(w, "{MAGIC}");
    let _ = writeln!(w, "format_version {FORMAT_VERSION}");
    let _ = writeln!(w, "lattice {}", g.lattice_name);
    let _ = writeln!(w, "scheme {}", g.scheme);
    let _ = writeln!(w, "mode {}", g.mode);
    let _ = writeln!(w, "m {}", g.m);
    let _ = writeln!(w, "n {}", g.n);
    let _ = writeln!(w, "dim {}", g.dim);
    let _ = writeln!(w, "d {}", g.labels.len());
    let _ = writeln!(w, "t {}", g.size());
    let _ = writeln!(w, "labels {}", g.labels.join(" "));
    let _ = writeln!(w, "partition");
    for c in g.partition.classes() {
        let exps: Vec<String> = c.weight.exponents().iter().map(u32::to_string).collect();
        let _ = writeln!(w, "class {} {} {}", c.size, exps.join(","), c.rep.to_dump(g.dim));
    }
    let _ = writeln!(w, "entries");
    for (r, row) in g.entries.iter().enumerate() {
        for (s, p) in row.iter().enumerate() {
            let _ = writeln!(w, "{r} {s} {}", p.to_text(&g.labels));
        }
    }
    let digest = hex::encode(Sha256::digest(out.as_bytes()));
    let _ = writeln!(out, "checksum {digest}");
    Ok(out)
}

pub fn save_gmatrix(g: &GMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_text(g)?).map_err(|e| Error::io(path, e))
}

pub fn load_gmatrix(path: impl AsRef<Path>) -> Result<GMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gmatrix(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Error::Malformed(format!("unexpected end of file, expected {what}")))
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let (no, line) = self.next(key)?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| Error::Malformed(format!("line {no}: expected `{key} …`")))
    }

    fn number<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.field(key)?;
        v.parse()
            .map_err(|_| Error::Malformed(format!("`{key}` has invalid value `{v}`")))
    }

    fn marker(&mut self, key: &str) -> Result<()> {
        let (no, line) = self.next(key)?;
        if line != key {
            return Err(Error::Malformed(format!("line {no}: expected `{key}`")));
        }
        Ok(())
    }
}

/// Parses the text format; the checksum is verified before any field is
/// interpreted.
pub fn parse_gmatrix(text: &str) -> Result<GMatrix> {
    let body_end = text
        .rfind("checksum ")
        .filter(|&i| i == 0 || text.as_bytes()[i - 1] == b'\n')
        .ok_or_else(|| Error::Malformed("missing checksum line".to_string()))?;
    let (body, trailer) = text.split_at(body_end);
    let stored = trailer
        .strip_prefix("checksum ")
        .map(|s| s.trim_end_matches('\n'))
        .filter(|s| !s.contains('\n'))
        .ok_or_else(|| Error::Malformed("content after checksum line".to_string()))?;
    if !body.starts_with(MAGIC) {
        return Err(Error::Malformed("not a matrix file".to_string()));
    }

    let mut lines = Lines {
        inner: body.lines().enumerate(),
    };
    lines.marker(MAGIC)?;
    let version: u32 = lines.number("format_version")?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if hex::encode(Sha256::digest(body.as_bytes())) != stored {
        return Err(Error::ChecksumMismatch);
    }

    let lattice_name = lines.field("lattice")?.to_string();
    let scheme = lines.field("scheme")?.to_string();
    let mode = lines.field("mode")?.parse().map_err(|_| Error::Malformed("bad mode".into()))?;
    let m: usize = lines.number("m")?;
    let n: usize = lines.number("n")?;
    let dim: usize = lines.number("dim")?;
    let d: usize = lines.number("d")?;
    let t: usize = lines.number("t")?;
    let labels: Vec<String> = lines.field("labels")?.split(' ').map(str::to_string).collect();
    if labels.len() != d {
        return Err(Error::Malformed(format!("{} labels for d = {d}", labels.len())));
    }
    if m >= n {
        return Err(Error::Malformed(format!("m = {m} is not below n = {n}")));
    }

    lines.marker("partition")?;
    let mut classes = Vec::with_capacity(t);
    for _ in 0..t {
        let (no, line) = lines.next("class")?;
        let bad = || Error::Malformed(format!("line {no}: bad class line"));
        let rest = line.strip_prefix("class ").ok_or_else(bad)?;
        let mut parts = rest.splitn(3, ' ');
        let size: u64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let exps = parts
            .next()
            .ok_or_else(bad)?
            .split(',')
            .map(|e| e.parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        if exps.len() != d {
            return Err(bad());
        }
        let rep = Walk::parse_dump(parts.next().ok_or_else(bad)?, dim)?;
        if rep.exponents(d) != exps {
            return Err(Error::Malformed(format!("line {no}: weight does not match walk")));
        }
        classes.push(PartitionClass {
            rep,
            size,
            weight: Monomial::new(exps),
        });
    }
    let partition = Partition::from_classes(m, mode, dim, classes)?;

    lines.marker("entries")?;
    let mut entries = vec![Vec::with_capacity(t); t];
    for r in 0..t {
        for s in 0..t {
            let (no, line) = lines.next("entry")?;
            let bad = || Error::Malformed(format!("line {no}: bad entry line"));
            let mut parts = line.splitn(3, ' ');
            let rr: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let ss: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if (rr, ss) != (r, s) {
                return Err(Error::Malformed(format!("line {no}: expected entry ({r},{s})")));
            }
            entries[r].push(Poly::parse(parts.next().ok_or_else(bad)?, &labels)?);
        }
    }
    if let Ok((no, _)) = lines.next("end") {
        return Err(Error::Malformed(format!("line {no}: unexpected content")));
    }

    Ok(GMatrix {
        lattice_name,
        scheme,
        mode,
        m,
        n,
        dim,
        labels,
        partition,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmatrix::{build_gmatrix, matrix_info};
    use crate::lattice::builtin_lattice;
    use crate::walks::Mode;

    fn square13() -> GMatrix {
        build_gmatrix(&builtin_lattice("square", "general").unwrap(), 1, 3, Mode::Saw).unwrap()
    }

    #[test]
    fn round_trip() {
        let g = square13();
        let text = to_text(&g).unwrap();
        let back = parse_gmatrix(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(matrix_info(&back), matrix_info(&g));
        assert_eq!(to_text(&back).unwrap(), text);
    }

    #[test]
    fn round_trip_through_file() {
        let g = build_gmatrix(&builtin_lattice("hexagonal", "general").unwrap(), 0, 2, Mode::Sat).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.mat");
        save_gmatrix(&g, &path).unwrap();
        assert_eq!(load_gmatrix(&path).unwrap(), g);
    }

    #[test]
    fn truncated_is_malformed() {
        let text = to_text(&square13()).unwrap();
        let cut = &text[..text.len() / 2];
        assert!(matches!(parse_gmatrix(cut), Err(Error::Malformed(_))));
        assert!(matches!(parse_gmatrix(""), Err(Error::Malformed(_))));
    }

    #[test]
    fn edited_coefficient_fails_checksum() {
        let text = to_text(&square13()).unwrap();
        let edited = text.replacen("0 0 1 *", "0 0 7 *", 1);
        assert_ne!(edited, text);
        assert!(matches!(parse_gmatrix(&edited), Err(Error::ChecksumMismatch)));
    }

    #[test]
    fn version_mismatch() {
        let text = to_text(&square13()).unwrap();
        let edited = text.replacen("format_version 1", "format_version 2", 1);
        assert!(matches!(
            parse_gmatrix(&edited),
            Err(Error::VersionMismatch { found: 2, expected: 1 })
        ));
    }
}
