//! Sparse hypergraph storage and the hMetis `.hgr` reader/writer.
//!
//! A [`Hypergraph`] keeps the incidence structure twice, once per direction,
//! in compressed (offset + flat index) form:
//!
//! * edge → sorted, distinct member vertices
//! * vertex → incident edges, in increasing edge order
//!
//! Indices are 0-based. The `.hgr` format is 1-based and the conversion
//! happens only in [`parse_hgr`] and [`Hypergraph::to_hgr`].

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Immutable hypergraph with unit vertex and edge weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    num_vertices: usize,
    edge_offsets: Vec<usize>,
    edge_pins: Vec<u32>,
    vertex_offsets: Vec<usize>,
    vertex_edges: Vec<u32>,
    dropped_edges: usize,
}

impl Hypergraph {
    /// Builds a hypergraph from 0-based edge lists.
    ///
    /// Vertices inside an edge are sorted and deduplicated. Edges left with
    /// fewer than two distinct vertices are dropped and counted in
    /// [`Hypergraph::dropped_edges`]; they can never be cut.
    pub fn from_edges<E, I>(num_vertices: usize, edges: E) -> Result<Self>
    where
        E: IntoIterator<Item = I>,
        I: IntoIterator<Item = usize>,
    {
        if num_vertices == 0 {
            return Err(Error::EmptyHypergraph);
        }
        if num_vertices > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "{num_vertices} vertices exceed the u32 index range"
            )));
        }
        let mut edge_offsets = vec![0];
        let mut edge_pins: Vec<u32> = Vec::new();
        let mut dropped = 0;
        let mut scratch: Vec<u32> = Vec::new();
        for (e, edge) in edges.into_iter().enumerate() {
            scratch.clear();
            for v in edge {
                if v >= num_vertices {
                    return Err(Error::Dimension(format!(
                        "edge {e} references vertex {v}, but n = {num_vertices}"
                    )));
                }
                scratch.push(v as u32);
            }
            scratch.sort_unstable();
            scratch.dedup();
            if scratch.len() < 2 {
                dropped += 1;
                continue;
            }
            edge_pins.extend_from_slice(&scratch);
            edge_offsets.push(edge_pins.len());
        }
        Ok(Self::assemble(num_vertices, edge_offsets, edge_pins, dropped))
    }

    fn assemble(
        num_vertices: usize,
        edge_offsets: Vec<usize>,
        edge_pins: Vec<u32>,
        dropped_edges: usize,
    ) -> Self {
        let mut counts = vec![0usize; num_vertices + 1];
        for &v in &edge_pins {
            counts[v as usize + 1] += 1;
        }
        for v in 0..num_vertices {
            counts[v + 1] += counts[v];
        }
        let vertex_offsets = counts;
        let mut cursor = vertex_offsets.clone();
        let mut vertex_edges = vec![0u32; edge_pins.len()];
        for e in 0..edge_offsets.len() - 1 {
            for &v in &edge_pins[edge_offsets[e]..edge_offsets[e + 1]] {
                let slot = &mut cursor[v as usize];
                vertex_edges[*slot] = e as u32;
                *slot += 1;
            }
        }
        Hypergraph {
            num_vertices,
            edge_offsets,
            edge_pins,
            vertex_offsets,
            vertex_edges,
            dropped_edges,
        }
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edge_offsets.len() - 1
    }

    /// Total number of pins, `Σ_e |e|`.
    #[inline]
    pub fn num_pins(&self) -> usize {
        self.edge_pins.len()
    }

    /// Edges discarded at construction because they had fewer than two
    /// distinct vertices.
    pub fn dropped_edges(&self) -> usize {
        self.dropped_edges
    }

    /// Sorted member vertices of edge `e`.
    #[inline]
    pub fn edge(&self, e: usize) -> &[u32] {
        &self.edge_pins[self.edge_offsets[e]..self.edge_offsets[e + 1]]
    }

    #[inline]
    pub fn edge_size(&self, e: usize) -> usize {
        self.edge_offsets[e + 1] - self.edge_offsets[e]
    }

    /// Edges incident to vertex `v`, in increasing order.
    #[inline]
    pub fn vertex_edges(&self, v: usize) -> &[u32] {
        &self.vertex_edges[self.vertex_offsets[v]..self.vertex_offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.vertex_offsets[v + 1] - self.vertex_offsets[v]
    }

    /// Per-vertex degree `D(v, v)`, the number of edges containing `v`.
    pub fn degrees(&self) -> Vec<usize> {
        self.vertex_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.edge_offsets
            .windows(2)
            .map(move |w| &self.edge_pins[w[0]..w[1]])
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges().map(<[u32]>::len).max().unwrap_or(0)
    }

    /// Serializes to unweighted hMetis text (1-based indices).
    pub fn to_hgr(&self) -> String {
        let mut out = String::with_capacity(self.num_pins() * 7 + 32);
        let _ = writeln!(out, "{} {}", self.num_edges(), self.num_vertices);
        for edge in self.edges() {
            let mut first = true;
            for &v in edge {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{}", v + 1);
            }
            out.push('\n');
        }
        out
    }
}

/// Parses unweighted hMetis `.hgr` text.
///
/// The header holds `m n` and an optional format code; each of the next `m`
/// lines lists the 1-based vertices of one hyperedge. Lines starting with
/// `%` and blank lines are skipped. Weighted formats (1, 10, 11) are
/// rejected.
pub fn parse_hgr(bytes: &[u8]) -> Result<Hypergraph> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("invalid UTF-8: {e}"),
    })?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));

    let (hline, header) = lines.next().ok_or(Error::EmptyHypergraph)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if !(2..=3).contains(&fields.len()) {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header must be `m n [fmt]`, got {header:?}"),
        });
    }
    let parse_count = |s: &str, what: &str| {
        s.parse::<usize>().map_err(|_| Error::Parse {
            line: hline,
            msg: format!("bad {what} {s:?} in header"),
        })
    };
    let declared_edges = parse_count(fields[0], "edge count")?;
    let num_vertices = parse_count(fields[1], "vertex count")?;
    if let Some(code) = fields.get(2) {
        match code.parse::<u32>() {
            Ok(0) => {}
            Ok(c @ (1 | 10 | 11)) => return Err(Error::UnsupportedFormat(c)),
            _ => {
                return Err(Error::Parse {
                    line: hline,
                    msg: format!("unknown format code {code:?}"),
                })
            }
        }
    }
    if declared_edges == 0 || num_vertices == 0 {
        return Err(Error::EmptyHypergraph);
    }

    let mut edges: Vec<Vec<usize>> = Vec::with_capacity(declared_edges);
    for (lineno, line) in lines.by_ref().take(declared_edges) {
        let mut edge = Vec::new();
        for tok in line.split_whitespace() {
            let index: u64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad vertex index {tok:?}"),
            })?;
            if index == 0 || index > num_vertices as u64 {
                return Err(Error::VertexOutOfRange {
                    index,
                    n: num_vertices,
                    line: lineno,
                });
            }
            edge.push(index as usize - 1);
        }
        edges.push(edge);
    }
    if edges.len() < declared_edges {
        return Err(Error::MissingEdges {
            expected: declared_edges,
            found: edges.len(),
        });
    }
    if let Some((lineno, _)) = lines.next() {
        return Err(Error::Parse {
            line: lineno,
            msg: "unexpected content after the last edge".into(),
        });
    }

    let h = Hypergraph::from_edges(num_vertices, edges)?;
    if h.dropped_edges() > 0 {
        log::warn!(
            "dropped {} edges with fewer than two distinct vertices",
            h.dropped_edges()
        );
    }
    if h.num_edges() == 0 {
        return Err(Error::EmptyHypergraph);
    }
    Ok(h)
}

/// Reads and parses an `.hgr` file.
pub fn read_hgr(path: impl AsRef<Path>) -> Result<Hypergraph> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    parse_hgr(&buf)
}
