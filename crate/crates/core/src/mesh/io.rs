//! Triangle / TetGen `.node` and `.ele` text formats.
//!
//! The `.node` header is `<count> <dim> <n_attributes> <n_markers>`, followed
//! by `<index> <x> <y> [z] [attributes...] [marker]` rows. The `.ele` header
//! is `<count> <nodes_per_elem> <n_attributes>`, followed by
//! `<index> <v...> [attributes...]` rows. Indices may be 0- or 1-based; the
//! base is detected from the first data row of each file. Attributes and
//! markers are ignored.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{MeshError, MeshTopology};

struct Rows<'a> {
    path: &'a Path,
    lines: std::io::Lines<BufReader<File>>,
    line_no: usize,
}

impl<'a> Rows<'a> {
    fn open(path: &'a Path) -> Result<Self, MeshError> {
        Ok(Rows {
            path,
            lines: BufReader::new(File::open(path)?).lines(),
            line_no: 0,
        })
    }

    fn error(&self, msg: impl Into<String>) -> MeshError {
        MeshError::Parse {
            path: self.path.display().to_string(),
            line: self.line_no,
            msg: msg.into(),
        }
    }

    /// Next non-empty, non-comment row split on whitespace.
    fn next_fields(&mut self) -> Result<Option<Vec<String>>, MeshError> {
        loop {
            let line = match self.lines.next() {
                None => return Ok(None),
                Some(l) => l?,
            };
            self.line_no += 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            return Ok(Some(body.split_whitespace().map(String::from).collect()));
        }
    }

    fn require_fields(&mut self, what: &str) -> Result<Vec<String>, MeshError> {
        self.next_fields()?
            .ok_or_else(|| self.error(format!("unexpected end of file, expected {what}")))
    }
}

fn parse_usize(rows: &Rows, s: &str, what: &str) -> Result<usize, MeshError> {
    s.parse::<usize>()
        .map_err(|_| rows.error(format!("invalid {what} `{s}`")))
}

fn parse_f64(rows: &Rows, s: &str, what: &str) -> Result<f64, MeshError> {
    s.parse::<f64>()
        .map_err(|_| rows.error(format!("invalid {what} `{s}`")))
}

pub(super) fn load_mesh(node_path: &Path, ele_path: &Path) -> Result<MeshTopology, MeshError> {
    let (coords, node_base, dim) = read_node_file(node_path)?;
    let elems = read_ele_file(ele_path, coords.len(), node_base)?;
    // `from_parts` re-checks orientation and manifoldness, reporting the
    // offending element id.
    MeshTopology::from_parts(dim, coords, elems)
}

fn read_node_file(path: &Path) -> Result<(Vec<[f64; 3]>, usize, usize), MeshError> {
    let mut rows = Rows::open(path)?;
    let header = rows.require_fields("node header")?;
    if header.len() < 4 {
        return Err(rows.error(format!(
            "node header needs 4 fields (count dim attrs markers), got {}",
            header.len()
        )));
    }
    let count = parse_usize(&rows, &header[0], "node count")?;
    let dim = parse_usize(&rows, &header[1], "dimension")?;
    if dim != 2 && dim != 3 {
        return Err(rows.error(format!("dimension must be 2 or 3, got {dim}")));
    }
    let n_attr = parse_usize(&rows, &header[2], "attribute count")?;
    let n_marker = parse_usize(&rows, &header[3], "marker count")?;
    let _ = (n_attr, n_marker);

    let mut coords = vec![[0.0f64; 3]; count];
    let mut seen = vec![false; count];
    let mut base: Option<usize> = None;
    for _ in 0..count {
        let fields = rows.require_fields("node row")?;
        if fields.len() < 1 + dim {
            return Err(rows.error("node row too short"));
        }
        let raw = parse_usize(&rows, &fields[0], "node index")?;
        let base = *base.get_or_insert_with(|| if raw == 0 { 0 } else { 1 });
        if raw < base {
            return Err(rows.error(format!(
                "node index {raw} mixes 0-based and 1-based numbering"
            )));
        }
        let idx = raw - base;
        if idx >= count {
            return Err(rows.error(format!("node index {raw} out of range (count {count})")));
        }
        if seen[idx] {
            return Err(rows.error(format!("duplicate node index {raw}")));
        }
        seen[idx] = true;
        for d in 0..dim {
            coords[idx][d] = parse_f64(&rows, &fields[1 + d], "coordinate")?;
        }
    }
    let base = base.unwrap_or(1);
    Ok((coords, base, dim))
}

fn read_ele_file(path: &Path, n_nodes: usize, node_base: usize) -> Result<Vec<usize>, MeshError> {
    let mut rows = Rows::open(path)?;
    let header = rows.require_fields("element header")?;
    if header.len() < 3 {
        return Err(rows.error(format!(
            "element header needs 3 fields (count nodes-per-elem attrs), got {}",
            header.len()
        )));
    }
    let count = parse_usize(&rows, &header[0], "element count")?;
    let npe = parse_usize(&rows, &header[1], "nodes per element")?;
    if npe != 3 && npe != 4 {
        return Err(rows.error(format!(
            "only linear simplices are supported (3 or 4 nodes per element), got {npe}"
        )));
    }

    let mut elems = vec![usize::MAX; count * npe];
    let mut seen = vec![false; count];
    let mut base: Option<usize> = None;
    for _ in 0..count {
        let fields = rows.require_fields("element row")?;
        if fields.len() < 1 + npe {
            return Err(rows.error("element row too short"));
        }
        let raw = parse_usize(&rows, &fields[0], "element index")?;
        let base = *base.get_or_insert_with(|| if raw == 0 { 0 } else { 1 });
        if raw < base {
            return Err(rows.error(format!(
                "element index {raw} mixes 0-based and 1-based numbering"
            )));
        }
        let idx = raw - base;
        if idx >= count {
            return Err(rows.error(format!("element index {raw} out of range (count {count})")));
        }
        if seen[idx] {
            return Err(rows.error(format!("duplicate element index {raw}")));
        }
        seen[idx] = true;
        for v in 0..npe {
            let r = parse_usize(&rows, &fields[1 + v], "node reference")?;
            if r < node_base {
                return Err(rows.error(format!(
                    "node reference {r} mixes 0-based and 1-based numbering"
                )));
            }
            let node = r - node_base;
            if node >= n_nodes {
                return Err(rows.error(format!(
                    "node reference {r} out of range ({n_nodes} nodes)"
                )));
            }
            elems[idx * npe + v] = node;
        }
    }
    Ok(elems)
}

pub(super) fn write_mesh(
    mesh: &MeshTopology,
    node_path: &Path,
    ele_path: &Path,
) -> Result<(), MeshError> {
    let dim = mesh.dim();
    let mut out = BufWriter::new(File::create(node_path)?);
    writeln!(out, "{} {} 0 0", mesh.n_nodes(), dim)?;
    for v in 0..mesh.n_nodes() {
        let c = mesh.coord(v);
        write!(out, "{}", v + 1)?;
        for d in 0..dim {
            write!(out, " {}", c[d])?;
        }
        writeln!(out)?;
    }
    out.flush()?;

    let mut out = BufWriter::new(File::create(ele_path)?);
    writeln!(out, "{} {} 0", mesh.n_elems(), dim + 1)?;
    for e in 0..mesh.n_elems() {
        write!(out, "{}", e + 1)?;
        for &v in mesh.elem(e) {
            write!(out, " {}", v + 1)?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}
