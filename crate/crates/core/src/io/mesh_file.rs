use std::fmt::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{is_simple, signed_area_of, Point2, Polygon};
use crate::mesher::Mesh;
use crate::model::{Direction, ProblemConditions};

use super::{fmt_f64, tokens};

/// First line of every mesh file: format name and version.
pub const MESH_HEADER: &str = "veamy-mesh 1";

/// A mesh plus the index-based boundary data that may accompany it.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshFile {
    pub mesh: Mesh,
    /// (node, direction, value)
    pub essential: Vec<(usize, Direction, f64)>,
    /// (i0, i1, tx, ty) on a boundary edge
    pub natural: Vec<(usize, usize, f64, f64)>,
}

impl MeshFile {
    pub fn new(mesh: Mesh) -> Self {
        MeshFile {
            mesh,
            essential: Vec::new(),
            natural: Vec::new(),
        }
    }

    /// Copies the boundary data into `conditions`.
    pub fn apply_to(&self, conditions: &mut ProblemConditions) {
        conditions.nodal_essential.extend(self.essential.iter().copied());
        conditions.edge_tractions.extend(self.natural.iter().copied());
    }
}

type NumberedTokens<'a> = Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>;

/// Non-blank, comment-free lines with their 1-based line numbers.
pub(crate) struct LineReader<'a> {
    lines: std::iter::Peekable<NumberedTokens<'a>>,
    last_line: usize,
}

impl<'a> LineReader<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, tokens(l)))
                .filter(|(_, t)| !t.is_empty()),
        );
        LineReader {
            lines: it.peekable(),
            last_line: text.lines().count(),
        }
    }

    pub(crate) fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        self.lines.next().ok_or_else(|| Error::Syntax {
            line: self.last_line + 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }

    pub(crate) fn peek_keyword(&mut self) -> Option<&'a str> {
        self.lines.peek().map(|(_, t)| t[0])
    }

    pub(crate) fn finish(&mut self) -> Result<()> {
        match self.lines.next() {
            None => Ok(()),
            Some((line, t)) => Err(Error::Syntax {
                line,
                message: format!("unexpected content '{}'", t.join(" ")),
            }),
        }
    }
}

pub(crate) fn parse_num<T: FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Syntax {
        line,
        message: format!("cannot read {what} from '{tok}'"),
    })
}

pub(crate) fn expect_len(line: usize, toks: &[&str], n: usize, what: &str) -> Result<()> {
    if toks.len() != n {
        return Err(Error::Syntax {
            line,
            message: format!("{what} needs {n} fields, found {}", toks.len()),
        });
    }
    Ok(())
}

/// `<keyword> <count>` section header.
pub(crate) fn section(reader: &mut LineReader, keyword: &str) -> Result<usize> {
    let (line, t) = reader.next(keyword)?;
    if t[0] != keyword {
        return Err(Error::Syntax {
            line,
            message: format!("expected '{keyword} <count>', found '{}'", t.join(" ")),
        });
    }
    expect_len(line, &t, 2, keyword)?;
    parse_num(line, t[1], "count")
}

pub(crate) fn check_index(line: usize, index: usize, len: usize) -> Result<usize> {
    if index >= len {
        return Err(Error::IndexError { line, index, len });
    }
    Ok(index)
}

pub(crate) fn finite_point(line: usize, x: f64, y: f64) -> Result<Point2> {
    let p = Point2::new(x, y);
    if !p.is_finite() {
        return Err(Error::Syntax {
            line,
            message: "non-finite coordinate".into(),
        });
    }
    Ok(p)
}

/// Checks one element at parse time so errors point at its line.
pub(crate) fn check_element(line: usize, ids: Vec<usize>, nodes: &[Point2]) -> Result<Polygon> {
    let poly = Polygon::new(ids).map_err(|e| Error::Syntax {
        line,
        message: e.to_string(),
    })?;
    let pts = poly.coords(nodes);
    signed_area_of(&pts).map_err(|e| Error::Syntax {
        line,
        message: e.to_string(),
    })?;
    if !is_simple(&pts) {
        return Err(Error::Syntax {
            line,
            message: "element is not a simple polygon".into(),
        });
    }
    Ok(poly)
}

pub fn parse_mesh(text: &str) -> Result<MeshFile> {
    let mut r = LineReader::new(text);
    let (line, header) = r.next("header")?;
    if header.join(" ") != MESH_HEADER {
        return Err(Error::Syntax {
            line,
            message: format!("expected header '{MESH_HEADER}'"),
        });
    }
    let n = section(&mut r, "nodes")?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, t) = r.next("node coordinates")?;
        expect_len(line, &t, 2, "node")?;
        nodes.push(finite_point(line, parse_num(line, t[0], "x")?, parse_num(line, t[1], "y")?)?);
    }
    let m = section(&mut r, "elements")?;
    let mut elements = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, t) = r.next("element")?;
        let k: usize = parse_num(line, t[0], "node count")?;
        expect_len(line, &t, k + 1, "element")?;
        let ids = t[1..]
            .iter()
            .map(|s| check_index(line, parse_num(line, s, "node index")?, n))
            .collect::<Result<Vec<_>>>()?;
        elements.push(check_element(line, ids, &nodes)?);
    }
    let mesh = Mesh::new(nodes, elements)?;

    let mut file = MeshFile::new(mesh);
    if r.peek_keyword() == Some("essential") {
        let p = section(&mut r, "essential")?;
        for _ in 0..p {
            let (line, t) = r.next("essential entry")?;
            expect_len(line, &t, 4, "essential entry")?;
            if t[0] != "node" {
                return Err(Error::Syntax {
                    line,
                    message: format!("expected 'node', found '{}'", t[0]),
                });
            }
            let idx = check_index(line, parse_num(line, t[1], "node index")?, n)?;
            let dir = match t[2] {
                "x" => Direction::Horizontal,
                "y" => Direction::Vertical,
                "b" => Direction::Both,
                other => {
                    return Err(Error::Syntax {
                        line,
                        message: format!("axis must be x, y or b, found '{other}'"),
                    })
                }
            };
            file.essential.push((idx, dir, parse_num(line, t[3], "value")?));
        }
    }
    if r.peek_keyword() == Some("natural") {
        let q = section(&mut r, "natural")?;
        for _ in 0..q {
            let (line, t) = r.next("natural entry")?;
            expect_len(line, &t, 5, "natural entry")?;
            if t[0] != "segment" {
                return Err(Error::Syntax {
                    line,
                    message: format!("expected 'segment', found '{}'", t[0]),
                });
            }
            let a = check_index(line, parse_num(line, t[1], "node index")?, n)?;
            let b = check_index(line, parse_num(line, t[2], "node index")?, n)?;
            let boundary = file.mesh.boundary_segments();
            if !boundary.contains(&(a, b)) && !boundary.contains(&(b, a)) {
                return Err(Error::Syntax {
                    line,
                    message: format!("({a}, {b}) is not a boundary edge"),
                });
            }
            file.natural
                .push((a, b, parse_num(line, t[3], "tx")?, parse_num(line, t[4], "ty")?));
        }
    }
    r.finish()?;
    Ok(file)
}

pub fn render_mesh(file: &MeshFile) -> String {
    let mesh = &file.mesh;
    let mut s = String::new();
    writeln!(s, "{MESH_HEADER}").unwrap();
    if let Some(seed) = mesh.seed {
        writeln!(s, "# seed {seed}").unwrap();
    }
    writeln!(s, "nodes {}", mesh.num_nodes()).unwrap();
    for p in mesh.nodes() {
        writeln!(s, "{} {}", fmt_f64(p.x), fmt_f64(p.y)).unwrap();
    }
    writeln!(s, "elements {}", mesh.num_elements()).unwrap();
    for poly in mesh.elements() {
        write!(s, "{}", poly.len()).unwrap();
        for i in poly.nodes() {
            write!(s, " {i}").unwrap();
        }
        s.push('\n');
    }
    if !file.essential.is_empty() {
        writeln!(s, "essential {}", file.essential.len()).unwrap();
        for &(n, dir, v) in &file.essential {
            let axis = match dir {
                Direction::Horizontal => "x",
                Direction::Vertical => "y",
                Direction::Both => "b",
            };
            writeln!(s, "node {n} {axis} {}", fmt_f64(v)).unwrap();
        }
    }
    if !file.natural.is_empty() {
        writeln!(s, "natural {}", file.natural.len()).unwrap();
        for &(a, b, tx, ty) in &file.natural {
            writeln!(s, "segment {a} {b} {} {}", fmt_f64(tx), fmt_f64(ty)).unwrap();
        }
    }
    s
}
