//! Plain-text mesh files.
//!
//! ```text
//! meshfmt 1
//! nodes N
//! x y            (N lines)
//! elements M
//! i j k          (M lines, 0-based, counter-clockwise)
//! clamped K
//! i ...          (K indices, any line layout)
//! tip i_le i_te  (optional)
//! ```
//!
//! Tokens are whitespace-delimited and `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh, TipMarkers};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Flip clockwise elements instead of rejecting the file.
    pub reorient: bool,
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        let mut last_line = 1;
        for (i, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("");
            for tok in body.split_whitespace() {
                items.push((i + 1, tok));
            }
            last_line = i + 1;
        }
        Tokens {
            items,
            pos: 0,
            last_line,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let t = self.items.get(self.pos).copied().ok_or_else(|| Error::MeshParse {
            line: self.last_line,
            msg: format!("unexpected end of file, expected {what}"),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.items.get(self.pos).copied()
    }

    fn keyword(&mut self, kw: &str) -> Result<usize> {
        let (line, tok) = self.next(kw)?;
        if tok != kw {
            return Err(Error::MeshParse {
                line,
                msg: format!("expected `{kw}`, found `{tok}`"),
            });
        }
        Ok(line)
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let (line, tok) = self.next(what)?;
        tok.parse().map_err(|_| Error::MeshParse {
            line,
            msg: format!("expected {what} (non-negative integer), found `{tok}`"),
        })
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let (line, tok) = self.next(what)?;
        tok.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::MeshParse {
                line,
                msg: format!("expected {what} (finite number), found `{tok}`"),
            })
    }
}

pub fn parse_mesh(text: &str, options: LoadOptions) -> Result<Mesh> {
    let mut t = Tokens::new(text);
    t.keyword("meshfmt")?;
    let (line, version) = t.next("format version")?;
    if version != "1" {
        return Err(Error::MeshParse {
            line,
            msg: format!("unsupported format version `{version}`"),
        });
    }

    t.keyword("nodes")?;
    let n = t.usize("node count")?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        nodes.push([t.f64("x coordinate")?, t.f64("y coordinate")?]);
    }

    t.keyword("elements")?;
    let m = t.usize("element count")?;
    let mut elements = Vec::with_capacity(m);
    for _ in 0..m {
        elements.push([t.usize("node index")?, t.usize("node index")?, t.usize("node index")?]);
    }

    t.keyword("clamped")?;
    let k = t.usize("clamped count")?;
    let mut clamped = Vec::with_capacity(k);
    for _ in 0..k {
        clamped.push(t.usize("clamped node index")?);
    }

    let mut tip = None;
    if let Some((_, "tip")) = t.peek() {
        t.keyword("tip")?;
        tip = Some(TipMarkers {
            leading: t.usize("leading-edge node")?,
            trailing: t.usize("trailing-edge node")?,
        });
    }
    if let Some((line, tok)) = t.peek() {
        return Err(Error::MeshParse {
            line,
            msg: format!("unexpected trailing token `{tok}`"),
        });
    }

    if options.reorient {
        Mesh::new_reoriented(nodes, elements, clamped, tip)
    } else {
        Mesh::new(nodes, elements, clamped, tip)
    }
}

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    s.push_str("meshfmt 1\n");
    let _ = writeln!(s, "nodes {}", mesh.node_count());
    for p in mesh.nodes() {
        // Display for f64 is the shortest exact round-trip form
        let _ = writeln!(s, "{} {}", p[0], p[1]);
    }
    let _ = writeln!(s, "elements {}", mesh.element_count());
    for c in mesh.elements() {
        let _ = writeln!(s, "{} {} {}", c[0], c[1], c[2]);
    }
    let _ = writeln!(s, "clamped {}", mesh.clamped_nodes().len());
    for chunk in mesh.clamped_nodes().chunks(16) {
        let line: Vec<String> = chunk.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    if let Some(t) = mesh.tip() {
        let _ = writeln!(s, "tip {} {}", t.leading, t.trailing);
    }
    s
}

pub fn load_mesh(path: impl AsRef<Path>, options: LoadOptions) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text, options)
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mesh(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gen_rect_mesh;

    #[test]
    fn round_trip_rect() {
        let m = gen_rect_mesh(0.4, 0.2, 5, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plate.mesh");
        save_mesh(&m, &path).unwrap();
        let back = load_mesh(&path, LoadOptions::default()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn comments_and_layout() {
        let text = "# plate\nmeshfmt 1\nnodes 3 # three\n0 0\n1 0\n0 1\nelements 1\n0 1 2\nclamped 2 0\n2\n";
        let m = parse_mesh(text, LoadOptions::default()).unwrap();
        assert_eq!(m.clamped_nodes(), &[0, 2]);
        assert!(m.tip().is_none());
    }

    #[test]
    fn dangling_index_is_validation_error() {
        let mut text = write_mesh(&gen_rect_mesh(0.4, 0.2, 5, 5).unwrap());
        text = text.replacen("elements 32\n0 1 5", "elements 32\n0 1 9999", 1);
        let err = parse_mesh(&text, LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(ref m) if m.contains("9999")), "{err}");
    }

    #[test]
    fn malformed_token_names_line() {
        let text = "meshfmt 1\nnodes 2\n0 0\n1 abc\nelements 0\nclamped 0\n";
        match parse_mesh(text, LoadOptions::default()) {
            Err(Error::MeshParse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let text = "meshfmt 1\nnodes 3\n0 0\n1 0\n";
        assert!(matches!(
            parse_mesh(text, LoadOptions::default()),
            Err(Error::MeshParse { line: 4, .. })
        ));
    }

    #[test]
    fn clockwise_default_reject() {
        let text = "meshfmt 1\nnodes 3\n0 0\n1 0\n0 1\nelements 1\n0 2 1\nclamped 1 0\n";
        assert!(matches!(
            parse_mesh(text, LoadOptions::default()),
            Err(Error::InvalidMesh(_))
        ));
        let m = parse_mesh(text, LoadOptions { reorient: true }).unwrap();
        assert_eq!(m.elements()[0], [0, 1, 2]);
    }
}
