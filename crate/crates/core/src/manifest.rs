//! Expected sizes of the ISPD98 benchmark hypergraphs used in experiments.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub num_vertices: usize,
    pub num_edges: usize,
}

/// ibm07 through ibm18: (name, #vertices, #hyperedges).
const ISPD98: [(&str, usize, usize); 12] = [
    ("ibm07", 45926, 48117),
    ("ibm08", 51309, 50513),
    ("ibm09", 53395, 60902),
    ("ibm10", 69429, 75196),
    ("ibm11", 70558, 81454),
    ("ibm12", 71076, 77240),
    ("ibm13", 84199, 99666),
    ("ibm14", 147605, 152772),
    ("ibm15", 161570, 186608),
    ("ibm16", 183484, 190048),
    ("ibm17", 185495, 189581),
    ("ibm18", 210613, 201920),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
}

impl Default for DatasetManifest {
    fn default() -> Self {
        Self::ispd98()
    }
}

impl DatasetManifest {
    /// The built-in ISPD98 table.
    pub fn ispd98() -> Self {
        let entries = ISPD98
            .iter()
            .map(|&(name, n, m)| ManifestEntry {
                name: name.to_string(),
                num_vertices: n,
                num_edges: m,
            })
            .collect();
        DatasetManifest { entries }
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Finds the entry whose name matches the file stem of `path`
    /// (`/data/ibm07.hgr` → `ibm07`).
    pub fn lookup_path(&self, path: &Path) -> Option<&ManifestEntry> {
        let stem = path.file_stem()?.to_str()?;
        self.get(stem)
    }

    /// Parses override rows `name,n,m`. Blank lines and `#` comments are
    /// ignored; a leading `name,n,m` header row is accepted.
    pub fn parse_overrides(text: &str) -> Result<Vec<ManifestEntry>> {
        let mut out = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("manifest row needs 3 columns, got {}", cols.len()),
                });
            }
            if out.is_empty() && cols[1] == "n" && cols[2] == "m" {
                continue;
            }
            let count = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("bad count {s:?}"),
                })
            };
            out.push(ManifestEntry {
                name: cols[0].to_string(),
                num_vertices: count(cols[1])?,
                num_edges: count(cols[2])?,
            });
        }
        Ok(out)
    }

    /// Applies override rows: existing names are replaced, new names appended.
    pub fn with_overrides(mut self, rows: Vec<ManifestEntry>) -> Self {
        for row in rows {
            match self.entries.iter_mut().find(|e| e.name == row.name) {
                Some(slot) => *slot = row,
                None => self.entries.push(row),
            }
        }
        self
    }

    pub fn load_overrides(self, path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let rows = Self::parse_overrides(&text)?;
        Ok(self.with_overrides(rows))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestCheck {
    pub name: String,
    pub expected_vertices: usize,
    pub expected_edges: usize,
    pub actual_vertices: usize,
    pub actual_edges: usize,
    pub matches: bool,
}

impl ManifestCheck {
    pub fn vertex_delta(&self) -> i64 {
        self.actual_vertices as i64 - self.expected_vertices as i64
    }

    pub fn edge_delta(&self) -> i64 {
        self.actual_edges as i64 - self.expected_edges as i64
    }
}

impl fmt::Display for ManifestCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.matches {
            write!(
                f,
                "{}: OK (n={}, m={})",
                self.name, self.actual_vertices, self.actual_edges
            )
        } else {
            write!(
                f,
                "{}: MISMATCH expected n={} m={}, found n={} m={} (delta n {:+}, m {:+})",
                self.name,
                self.expected_vertices,
                self.expected_edges,
                self.actual_vertices,
                self.actual_edges,
                self.vertex_delta(),
                self.edge_delta()
            )
        }
    }
}

/// Compares the vertex and (kept) edge counts of `h` against `entry`.
pub fn verify_manifest(h: &Hypergraph, entry: &ManifestEntry) -> ManifestCheck {
    let actual_vertices = h.num_vertices();
    let actual_edges = h.num_edges();
    ManifestCheck {
        name: entry.name.clone(),
        expected_vertices: entry.num_vertices,
        expected_edges: entry.num_edges,
        actual_vertices,
        actual_edges,
        matches: actual_vertices == entry.num_vertices && actual_edges == entry.num_edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let m = DatasetManifest::ispd98();
        assert_eq!(m.entries().len(), 12);
        let e07 = m.get("ibm07").unwrap();
        assert_eq!((e07.num_vertices, e07.num_edges), (45926, 48117));
        let e14 = m.get("ibm14").unwrap();
        assert_eq!((e14.num_vertices, e14.num_edges), (147605, 152772));
        let e18 = m.get("ibm18").unwrap();
        assert_eq!((e18.num_vertices, e18.num_edges), (210613, 201920));
        assert!(m.get("ibm01").is_none());
        assert_eq!(
            m.lookup_path(Path::new("/data/ibm15.hgr")).unwrap().num_edges,
            186608
        );
    }

    fn chain(n: usize, m: usize) -> Hypergraph {
        Hypergraph::from_edges(n, (0..m).map(|e| vec![e % n, (e + 1) % n])).unwrap()
    }

    #[test]
    fn detects_mismatch() {
        let entry = ManifestEntry {
            name: "toy".into(),
            num_vertices: 10,
            num_edges: 12,
        };
        let ok = verify_manifest(&chain(10, 12), &entry);
        assert!(ok.matches);
        let short = verify_manifest(&chain(10, 11), &entry);
        assert!(!short.matches);
        assert_eq!(short.edge_delta(), -1);
        assert_eq!(short.vertex_delta(), 0);
        assert!(short.to_string().contains("m -1"));
    }

    #[test]
    fn overrides() {
        let rows = DatasetManifest::parse_overrides("name,n,m\n# c\nibm07,1,2\nmine, 4 ,5\n").unwrap();
        let m = DatasetManifest::ispd98().with_overrides(rows);
        assert_eq!(m.get("ibm07").unwrap().num_vertices, 1);
        assert_eq!(m.get("mine").unwrap().num_edges, 5);
        assert_eq!(m.entries().len(), 13);
        assert!(DatasetManifest::parse_overrides("a,b\n").is_err());
        assert!(DatasetManifest::parse_overrides("a,1,x\n").is_err());
    }
}
