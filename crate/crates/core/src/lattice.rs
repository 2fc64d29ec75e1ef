//! Kagome lattice fragments and reciprocal-space grids.
//!
//! The two fragments studied here are a single triangle and a kagome star:
//! six corner-sharing triangles arranged around a central hexagon. Sites are
//! labeled along the entangling chain of the star ansatz, so even indices sit
//! on the hexagon corners and odd indices on the outer tips. All coordinates
//! are in units of the nearest-neighbor spacing.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Geometric tolerance for unit-length edge checks.
const EDGE_LENGTH_TOL: f64 = 1e-9;

/// A lattice site with a 0-based index and a 2D position.
#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub index: usize,
    pub position: [f64; 2],
}

/// An undirected coupled pair of sites, normalized so `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub coupling: f64,
}

impl Edge {
    /// Normalizes the endpoint order; rejects self-loops and non-positive
    /// couplings (the antiferromagnetic regime has J > 0).
    pub fn new(i: usize, j: usize, coupling: f64) -> Result<Self> {
        if i == j {
            return Err(Error::InvalidArgument(format!("self-loop edge at site {i}")));
        }
        if !coupling.is_finite() || coupling <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "edge ({i},{j}) has non-positive coupling {coupling}"
            )));
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        Ok(Self { i, j, coupling })
    }
}

/// A finite fragment of the kagome lattice: sites plus its coupling graph.
#[derive(Debug, Clone)]
pub struct LatticeFragment {
    name: String,
    sites: Vec<Site>,
    edges: Vec<Edge>,
}

impl LatticeFragment {
    /// Validates and constructs a fragment.
    ///
    /// Checks index contiguity, duplicate edges, unit edge lengths, and
    /// connectivity of the coupling graph.
    pub fn new(name: impl Into<String>, sites: Vec<Site>, edges: Vec<Edge>) -> Result<Self> {
        let name = name.into();
        if sites.is_empty() {
            return Err(Error::InvalidArgument("fragment has no sites".into()));
        }
        for (k, site) in sites.iter().enumerate() {
            if site.index != k {
                return Err(Error::InvalidArgument(format!(
                    "site indices must be contiguous 0..N-1; found {} at position {k}",
                    site.index
                )));
            }
        }
        let n = sites.len();
        let mut seen = BTreeSet::new();
        for edge in &edges {
            if edge.j >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({},{}) references a missing site",
                    edge.i, edge.j
                )));
            }
            if !seen.insert((edge.i, edge.j)) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate edge ({},{})",
                    edge.i, edge.j
                )));
            }
            let d = site_distance(&sites[edge.i], &sites[edge.j]);
            if (d - 1.0).abs() > EDGE_LENGTH_TOL {
                return Err(Error::InvalidArgument(format!(
                    "edge ({},{}) has length {d}, expected 1",
                    edge.i, edge.j
                )));
            }
        }
        let fragment = Self { name, sites, edges };
        if !fragment.is_connected() {
            return Err(Error::InvalidArgument(
                "fragment coupling graph is not connected".into(),
            ));
        }
        Ok(fragment)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    /// Degree of a site in the coupling graph.
    pub fn degree(&self, site: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.i == site || e.j == site)
            .count()
    }

    /// Enumerates all 3-cliques of the coupling graph, each sorted ascending.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let n = self.num_sites();
        let mut adj = vec![vec![false; n]; n];
        for e in &self.edges {
            adj[e.i][e.j] = true;
            adj[e.j][e.i] = true;
        }
        let mut out = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if !adj[a][b] {
                    continue;
                }
                for c in (b + 1)..n {
                    if adj[a][c] && adj[b][c] {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }

    fn is_connected(&self) -> bool {
        let n = self.num_sites();
        let mut reached = vec![false; n];
        let mut stack = vec![0usize];
        reached[0] = true;
        while let Some(s) = stack.pop() {
            for e in &self.edges {
                let other = if e.i == s {
                    e.j
                } else if e.j == s {
                    e.i
                } else {
                    continue;
                };
                if !reached[other] {
                    reached[other] = true;
                    stack.push(other);
                }
            }
        }
        reached.into_iter().all(|r| r)
    }

    /// Serializes the fragment to the structured text form consumed by the CLI.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("fragment {}\n", self.name));
        out.push_str(&format!("sites {}\n", self.sites.len()));
        for s in &self.sites {
            out.push_str(&format!("{} {:.15} {:.15}\n", s.index, s.position[0], s.position[1]));
        }
        out.push_str(&format!("edges {}\n", self.edges.len()));
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", e.i, e.j, e.coupling));
        }
        out
    }

    /// Parses the text form produced by [`LatticeFragment::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty fragment file".into()))?;
        let name = header
            .strip_prefix("fragment ")
            .ok_or_else(|| Error::Parse(format!("expected 'fragment <name>', got '{header}'")))?
            .to_string();
        let nsites = parse_count(lines.next(), "sites")?;
        let mut sites = Vec::with_capacity(nsites);
        for _ in 0..nsites {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("truncated site list".into()))?;
            let mut it = line.split_whitespace();
            let index = parse_field::<usize>(it.next(), "site index")?;
            let x = parse_field::<f64>(it.next(), "site x")?;
            let y = parse_field::<f64>(it.next(), "site y")?;
            sites.push(Site { index, position: [x, y] });
        }
        let nedges = parse_count(lines.next(), "edges")?;
        let mut edges = Vec::with_capacity(nedges);
        for _ in 0..nedges {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("truncated edge list".into()))?;
            let mut it = line.split_whitespace();
            let i = parse_field::<usize>(it.next(), "edge i")?;
            let j = parse_field::<usize>(it.next(), "edge j")?;
            let coupling = match it.next() {
                Some(tok) => tok
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad coupling '{tok}'")))?,
                None => 1.0,
            };
            edges.push(Edge::new(i, j, coupling)?);
        }
        Self::new(name, sites, edges)
    }
}

fn parse_count(line: Option<&str>, key: &str) -> Result<usize> {
    let line = line.ok_or_else(|| Error::Parse(format!("missing '{key} <count>' line")))?;
    let rest = line
        .strip_prefix(key)
        .ok_or_else(|| Error::Parse(format!("expected '{key} <count>', got '{line}'")))?;
    rest.trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("bad count in '{line}'")))
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("bad {what}")))
}

fn site_distance(a: &Site, b: &Site) -> f64 {
    let dx = a.position[0] - b.position[0];
    let dy = a.position[1] - b.position[1];
    (dx * dx + dy * dy).sqrt()
}

/// Builds the three-site unit triangle with edges (0,1), (1,2), (0,2).
pub fn build_triangle() -> LatticeFragment {
    let sites = vec![
        Site { index: 0, position: [0.0, 0.0] },
        Site { index: 1, position: [1.0, 0.0] },
        Site { index: 2, position: [0.5, 3f64.sqrt() / 2.0] },
    ];
    let edges = vec![
        Edge::new(0, 1, 1.0).expect("static edge"),
        Edge::new(1, 2, 1.0).expect("static edge"),
        Edge::new(0, 2, 1.0).expect("static edge"),
    ];
    LatticeFragment::new("triangle", sites, edges).expect("triangle construction is static")
}

/// Builds the 12-site kagome star: six corner-sharing triangles around a
/// central hexagon.
///
/// Even sites 2k are the hexagon corners (flat-top orientation, circumradius
/// 1) and odd sites 2k+1 are the outward triangle tips, so the chain
/// 0-1-2-...-11-0 walks lattice edges. This puts qubit k of the star ansatz
/// on site k and aligns the dimer covering (1,2),(3,4),...,(11,0) with the
/// ansatz output.
pub fn build_star() -> LatticeFragment {
    let corner = |k: usize| -> [f64; 2] {
        let phi = k as f64 * PI / 3.0;
        [phi.cos(), phi.sin()]
    };
    let mut sites = Vec::with_capacity(12);
    for k in 0..6 {
        let c = corner(k);
        let c_next = corner(k + 1);
        // Tip of the outward equilateral triangle on edge (c_k, c_{k+1}).
        let tip = [c[0] + c_next[0], c[1] + c_next[1]];
        sites.push(Site { index: 2 * k, position: c });
        sites.push(Site { index: 2 * k + 1, position: tip });
    }
    let mut edges = Vec::with_capacity(18);
    for k in 0..6 {
        let c = 2 * k;
        let tip = 2 * k + 1;
        let c_next = (2 * k + 2) % 12;
        edges.push(Edge::new(c, c_next, 1.0).expect("static edge"));
        edges.push(Edge::new(tip, c, 1.0).expect("static edge"));
        edges.push(Edge::new(tip, c_next, 1.0).expect("static edge"));
    }
    LatticeFragment::new("star", sites, edges).expect("star construction is static")
}

/// Underlying triangular Bravais lattice constant in nearest-neighbor units.
/// Kagome sites sit at bond midpoints of a triangular lattice of constant 2.
const BRAVAIS_CONSTANT: f64 = 2.0;

/// Length of a primitive reciprocal lattice vector, 4π/(√3·a).
pub fn reciprocal_basis_length() -> f64 {
    4.0 * PI / (3f64.sqrt() * BRAVAIS_CONSTANT)
}

/// Circumradius of the first-Brillouin-zone hexagon (distance Γ→K).
pub fn brillouin_zone_circumradius() -> f64 {
    4.0 * PI / (3.0 * BRAVAIS_CONSTANT)
}

/// Tests whether a momentum vector lies in the first Brillouin zone of the
/// underlying triangular lattice. The zone is a flat-top hexagon with
/// corners on the qx axis; boundary points count as inside.
pub fn inside_brillouin_zone(q: [f64; 2]) -> bool {
    let apothem = reciprocal_basis_length() / 2.0;
    let tol = apothem * 1e-12;
    // Edge normals at 30°, 90°, 150°; ±pairs cover all six edges.
    for k in 0..3 {
        let phi = PI / 6.0 + k as f64 * PI / 3.0;
        let proj = q[0] * phi.cos() + q[1] * phi.sin();
        if proj.abs() > apothem + tol {
            return false;
        }
    }
    true
}

/// A reciprocal-space grid point with its Brillouin-zone membership flag.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumPoint {
    pub q: [f64; 2],
    pub inside_bz: bool,
}

/// Uniform `resolution × resolution` grid over the square
/// `[-extent·|b|, extent·|b|]²` where `|b|` is the reciprocal basis length.
/// `extent ≥ 1/√3` covers the full first Brillouin zone.
pub fn momentum_grid(resolution: usize, extent: f64) -> Result<Vec<MomentumPoint>> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least 2, got {resolution}"
        )));
    }
    if !extent.is_finite() || extent <= 0.0 {
        return Err(Error::InvalidArgument(format!("bad grid extent {extent}")));
    }
    let half = extent * reciprocal_basis_length();
    let step = 2.0 * half / (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for iy in 0..resolution {
        for ix in 0..resolution {
            let q = [-half + ix as f64 * step, -half + iy as f64 * step];
            out.push(MomentumPoint { q, inside_bz: inside_brillouin_zone(q) });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn triangle_counts_and_geometry() {
        let t = build_triangle();
        assert_eq!(t.num_sites(), 3);
        assert_eq!(t.edges().len(), 3);
        // All pairwise distances are 1 (unit equilateral triangle).
        for a in 0..3 {
            for b in (a + 1)..3 {
                let d = site_distance(&t.sites()[a], &t.sites()[b]);
                assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn star_counts_degrees_and_triangles() {
        let s = build_star();
        assert_eq!(s.num_sites(), 12);
        assert_eq!(s.edges().len(), 18);
        // Hexagon corners (even) have degree 4, tips (odd) degree 2.
        for k in 0..12 {
            let expected = if k % 2 == 0 { 4 } else { 2 };
            assert_eq!(s.degree(k), expected, "site {k}");
        }
        assert_eq!(s.triangles().len(), 6);
        // Each triangle is {2k, 2k+1, (2k+2) mod 12} as a set.
        for tri in s.triangles() {
            let tip = tri.iter().find(|&&v| v % 2 == 1).copied().unwrap();
            let k = (tip - 1) / 2;
            let mut expected = [2 * k, 2 * k + 1, (2 * k + 2) % 12];
            expected.sort_unstable();
            assert_eq!(tri, expected);
        }
    }

    #[test]
    fn star_edges_have_unit_length() {
        let s = build_star();
        for e in s.edges() {
            let d = site_distance(&s.sites()[e.i], &s.sites()[e.j]);
            assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn star_edge_set_invariant_under_c6_rotation() {
        // The geometric C6 rotation maps site s to (s+2) mod 12.
        let s = build_star();
        let mut edges: Vec<(usize, usize)> = s.edges().iter().map(|e| (e.i, e.j)).collect();
        let mut rotated: Vec<(usize, usize)> = s
            .edges()
            .iter()
            .map(|e| {
                let a = (e.i + 2) % 12;
                let b = (e.j + 2) % 12;
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        rotated.sort_unstable();
        assert_eq!(edges, rotated);
    }

    #[test]
    fn builders_are_deterministic() {
        let a = build_star();
        let b = build_star();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn zone_center_and_vertex_are_inside() {
        assert!(inside_brillouin_zone([0.0, 0.0]));
        // Hexagon vertex on the qx axis; boundary convention is closed.
        let k = brillouin_zone_circumradius();
        assert!(inside_brillouin_zone([k, 0.0]));
        // Just beyond the vertex is outside.
        assert!(!inside_brillouin_zone([k * 1.001, 0.0]));
        // Just beyond an edge midpoint is outside.
        let apothem = reciprocal_basis_length() / 2.0;
        let (c, s) = ((PI / 6.0).cos(), (PI / 6.0).sin());
        assert!(inside_brillouin_zone([apothem * c, apothem * s]));
        assert!(!inside_brillouin_zone([apothem * c * 1.001, apothem * s * 1.001]));
    }

    #[test]
    fn grid_size_and_bounds() {
        let g = momentum_grid(11, 1.0).unwrap();
        assert_eq!(g.len(), 121);
        assert!(g.iter().any(|p| p.inside_bz));
        assert!(g.iter().any(|p| !p.inside_bz));
        assert!(momentum_grid(1, 1.0).is_err());
    }

    #[test]
    fn fragment_text_round_trip() {
        let s = build_star();
        let parsed = LatticeFragment::from_text(&s.to_text()).unwrap();
        assert_eq!(parsed.num_sites(), 12);
        assert_eq!(parsed.edges().len(), 18);
        assert_eq!(parsed.name(), "star");
    }

    #[test]
    fn fragment_validation_rejects_bad_input() {
        // Non-unit edge length.
        let sites = vec![
            Site { index: 0, position: [0.0, 0.0] },
            Site { index: 1, position: [2.0, 0.0] },
        ];
        let edges = vec![Edge::new(0, 1, 1.0).unwrap()];
        assert!(LatticeFragment::new("bad", sites, edges).is_err());
        // Self-loop and non-positive coupling.
        assert!(Edge::new(3, 3, 1.0).is_err());
        assert!(Edge::new(0, 1, 0.0).is_err());
        assert!(Edge::new(0, 1, -1.0).is_err());
    }
}
