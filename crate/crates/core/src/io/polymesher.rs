//! Reader for a plain-text export of PolyMesher's output tables.
//!
//! Layout (indices are 1-based, `#` starts a comment):
//!
//! ```text
//! <NNodes> <NElems>
//! x y                      (NNodes lines)
//! k v1 ... vk              (NElems lines)
//! supp <ns>
//! node fx_flag fy_flag     (ns lines, flags 0 or 1)
//! load <nl>
//! node Fx Fy               (nl lines)
//! ```
//!
//! The `supp` and `load` sections may be omitted.

use crate::error::{Error, Result};
use crate::mesher::Mesh;
use crate::model::{Direction, Material, ProblemConditions};

use super::mesh_file::{check_element, check_index, expect_len, finite_point, parse_num, section, LineReader};

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesherData {
    pub mesh: Mesh,
    /// (node, fix x, fix y), 0-based
    pub supports: Vec<(usize, bool, bool)>,
    /// (node, Fx, Fy), 0-based
    pub loads: Vec<(usize, f64, f64)>,
}

impl PolyMesherData {
    /// Supports become zero essential conditions on the flagged axes; loads
    /// become concentrated nodal forces.
    pub fn conditions(&self, material: Material) -> ProblemConditions {
        let mut c = ProblemConditions::new(Some(material));
        for &(n, fx, fy) in &self.supports {
            let dir = match (fx, fy) {
                (true, true) => Direction::Both,
                (true, false) => Direction::Horizontal,
                (false, true) => Direction::Vertical,
                (false, false) => continue,
            };
            c.nodal_essential.push((n, dir, 0.0));
        }
        c.point_loads.extend(self.loads.iter().copied());
        c
    }
}

fn one_based(line: usize, tok: &str, len: usize) -> Result<usize> {
    let i: usize = parse_num(line, tok, "node index")?;
    if i == 0 {
        return Err(Error::Syntax {
            line,
            message: "node indices are 1-based".into(),
        });
    }
    check_index(line, i - 1, len)
}

fn flag(line: usize, tok: &str) -> Result<bool> {
    match tok {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Syntax {
            line,
            message: format!("support flag must be 0 or 1, found '{other}'"),
        }),
    }
}

pub fn parse_polymesher(text: &str) -> Result<PolyMesherData> {
    let mut r = LineReader::new(text);
    let (line, t) = r.next("'<NNodes> <NElems>' header")?;
    expect_len(line, &t, 2, "header")?;
    let n: usize = parse_num(line, t[0], "node count")?;
    let m: usize = parse_num(line, t[1], "element count")?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, t) = r.next("node coordinates")?;
        expect_len(line, &t, 2, "node")?;
        nodes.push(finite_point(line, parse_num(line, t[0], "x")?, parse_num(line, t[1], "y")?)?);
    }
    let mut elements = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, t) = r.next("element")?;
        let k: usize = parse_num(line, t[0], "node count")?;
        expect_len(line, &t, k + 1, "element")?;
        let ids = t[1..]
            .iter()
            .map(|s| one_based(line, s, n))
            .collect::<Result<Vec<_>>>()?;
        elements.push(check_element(line, ids, &nodes)?);
    }
    let mesh = Mesh::new(nodes, elements)?;

    let mut supports = Vec::new();
    if r.peek_keyword() == Some("supp") {
        for _ in 0..section(&mut r, "supp")? {
            let (line, t) = r.next("support row")?;
            expect_len(line, &t, 3, "support row")?;
            supports.push((one_based(line, t[0], n)?, flag(line, t[1])?, flag(line, t[2])?));
        }
    }
    let mut loads = Vec::new();
    if r.peek_keyword() == Some("load") {
        for _ in 0..section(&mut r, "load")? {
            let (line, t) = r.next("load row")?;
            expect_len(line, &t, 3, "load row")?;
            loads.push((
                one_based(line, t[0], n)?,
                parse_num(line, t[1], "Fx")?,
                parse_num(line, t[2], "Fy")?,
            ));
        }
    }
    r.finish()?;
    Ok(PolyMesherData { mesh, supports, loads })
}
