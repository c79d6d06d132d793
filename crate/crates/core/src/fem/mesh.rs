use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point};

/// Upper bound on the projected node count accepted by [`triangulate`].
pub const MAX_NODES: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub nodes: Vec<Point>,
    /// Counterclockwise index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Consecutive pairs along the boundary, counterclockwise, closing up.
    pub boundary_edges: Vec<[usize; 2]>,
    /// Longest edge.
    pub h: f64,
    pub target_h: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Centre,
    /// Row `a` on the ray towards vertex `j` (`a = n_r` is the vertex).
    Ray(usize, usize),
    /// Interior node `i` of the boundary row of fan `j`.
    Rim(usize, usize),
    /// Interior node `i` of row `a` in fan `j`.
    Inner(usize, usize, usize),
}

struct Builder {
    nodes: Vec<Point>,
    index: HashMap<Key, usize>,
}

impl Builder {
    fn node(&mut self, key: Key, at: impl FnOnce() -> Point) -> usize {
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(at());
        self.index.insert(key, i);
        i
    }
}

struct Layout {
    rows: usize,
    /// Per fan, segment count of each row (row 0 is the centre).
    counts: Vec<Vec<usize>>,
}

fn layout(poly: &ConvexPolygon, c: Point, target_h: f64) -> Result<Layout> {
    let v = poly.vertices();
    let n = v.len();
    // radial steps and row segments are each held to h/2, which bounds
    // the connecting edges by h
    let half = 0.5 * target_h;
    let reach = v.iter().map(|p| p.dist(c)).fold(0.0, f64::max);
    let want = (reach / half).ceil().max(1.0);
    if want > MAX_NODES as f64 {
        return Err(Error::MeshTooFine {
            projected: usize::MAX,
            limit: MAX_NODES,
        });
    }
    let rows = (want as usize).next_power_of_two();
    let mut counts = Vec::with_capacity(n);
    let mut projected = 1usize;
    for j in 0..n {
        let len = v[j].dist(v[(j + 1) % n]);
        let mut row = Vec::with_capacity(rows + 1);
        row.push(0);
        for a in 1..=rows {
            let l = len * a as f64 / rows as f64;
            let q = (l / half).ceil().max(1.0);
            if q > MAX_NODES as f64 {
                return Err(Error::MeshTooFine {
                    projected: usize::MAX,
                    limit: MAX_NODES,
                });
            }
            projected += q as usize;
            row.push(q as usize);
        }
        if projected > MAX_NODES {
            return Err(Error::MeshTooFine {
                projected,
                limit: MAX_NODES,
            });
        }
        counts.push(row);
    }
    Ok(Layout { rows, counts })
}

/// Graded fan mesh: rays from the centroid to every vertex are cut into a
/// power-of-two number of rows, and each row of a fan triangle is split
/// evenly into pieces no longer than `target_h / 2`. Every edge ends up at
/// most `target_h`, boundary nodes sit on the polygon edges, and halving
/// `target_h` doubles the number of rows.
pub fn triangulate(poly: &ConvexPolygon, target_h: f64) -> Result<TriangleMesh> {
    if !(target_h > 0.0) || !target_h.is_finite() {
        return Err(Error::InvalidInput(format!(
            "target_h must be positive and finite, got {target_h}"
        )));
    }
    let v = poly.vertices();
    let n = v.len();
    let c = poly.centroid();
    let lay = layout(poly, c, target_h)?;
    let rows = lay.rows;
    let mut b = Builder {
        nodes: Vec::new(),
        index: HashMap::new(),
    };
    let mut triangles = Vec::new();
    let mut boundary_edges = Vec::new();
    let ray = |j: usize, a: usize| -> Point {
        if a == rows {
            v[j]
        } else {
            c + (v[j] - c) * (a as f64 / rows as f64)
        }
    };
    for j in 0..n {
        let k = (j + 1) % n;
        let row_nodes = |b: &mut Builder, a: usize| -> Vec<usize> {
            if a == 0 {
                return vec![b.node(Key::Centre, || c)];
            }
            let q = lay.counts[j][a];
            let (p0, p1) = (ray(j, a), ray(k, a));
            let mut out = Vec::with_capacity(q + 1);
            out.push(b.node(Key::Ray(j, a), || p0));
            for i in 1..q {
                let s = i as f64 / q as f64;
                let key = if a == rows { Key::Rim(j, i) } else { Key::Inner(j, a, i) };
                out.push(b.node(key, || p0 + (p1 - p0) * s));
            }
            out.push(b.node(Key::Ray(k, a), || p1));
            out
        };
        let mut lower = row_nodes(&mut b, 0);
        for a in 0..rows {
            let upper = row_nodes(&mut b, a + 1);
            stitch(&lower, &upper, &mut triangles);
            lower = upper;
        }
        for w in lower.windows(2) {
            boundary_edges.push([w[0], w[1]]);
        }
    }
    let nodes = b.nodes;
    let mut h: f64 = 0.0;
    for t in &triangles {
        for e in 0..3 {
            h = h.max(nodes[t[e]].dist(nodes[t[(e + 1) % 3]]));
        }
    }
    let mesh = TriangleMesh {
        nodes,
        triangles,
        boundary_edges,
        h,
        target_h,
    };
    mesh.validate(poly.area())?;
    Ok(mesh)
}

/// Triangulates the strip between two parallel rows, walking both by
/// their fractional position.
fn stitch(lower: &[usize], upper: &[usize], out: &mut Vec<[usize; 3]>) {
    let ql = lower.len() - 1;
    let qu = upper.len() - 1;
    let (mut i, mut k) = (0, 0);
    while i < ql || k < qu {
        let advance_lower = if i == ql {
            false
        } else if k == qu {
            true
        } else {
            // compare (i+1)/ql with (k+1)/qu without division
            (i + 1) * qu < (k + 1) * ql
        };
        if advance_lower {
            out.push([lower[i], upper[k], lower[i + 1]]);
            i += 1;
        } else {
            out.push([lower[i], upper[k], upper[k + 1]]);
            k += 1;
        }
    }
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (b - a).cross(c - a)
}

impl TriangleMesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Boundary nodes in loop order.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        self.boundary_edges.iter().map(|e| e[0]).collect()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| self.nodes[e[0]].dist(self.nodes[e[1]]))
            .sum()
    }

    /// Orientation, minimum area, conformity and a single closed boundary
    /// loop matching the edges used by exactly one triangle.
    pub fn validate(&self, domain_area: f64) -> Result<()> {
        let min_area = 1e-14 * domain_area;
        let mut count: HashMap<(usize, usize), (u32, i32)> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            let area = self.triangle_area(t);
            if !(area > min_area) {
                return Err(Error::DegenerateTriangle { index: t, area });
            }
            for e in 0..3 {
                let (p, q) = (tri[e], tri[(e + 1) % 3]);
                let key = (p.min(q), p.max(q));
                let entry = count.entry(key).or_insert((0, 0));
                entry.0 += 1;
                entry.1 += if p < q { 1 } else { -1 };
            }
        }
        let mut boundary = HashMap::new();
        for (key, (n, dir)) in &count {
            match (n, dir) {
                (2, 0) => {}
                (1, _) => {
                    boundary.insert(*key, ());
                }
                _ => return Err(Error::Geometry(format!("non-conforming edge {key:?} used {n} times"))),
            }
        }
        if boundary.len() != self.boundary_edges.len() {
            return Err(Error::Geometry(format!(
                "{} free edges but {} boundary edges listed",
                boundary.len(),
                self.boundary_edges.len()
            )));
        }
        for (i, e) in self.boundary_edges.iter().enumerate() {
            if !boundary.contains_key(&(e[0].min(e[1]), e[0].max(e[1]))) {
                return Err(Error::Geometry(format!("boundary edge {e:?} is interior")));
            }
            let next = self.boundary_edges[(i + 1) % self.boundary_edges.len()];
            if e[1] != next[0] {
                return Err(Error::Geometry("boundary edges do not form a loop".into()));
            }
        }
        Ok(())
    }

    /// Plain-text dump: `nodes N`, `triangles T`, `boundary_edges B`
    /// sections, one item per line.
    pub fn dump_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{:.17e} {:.17e}", p.x, p.y);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "boundary_edges {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{} {}", e[0], e[1]);
        }
        s
    }

    pub fn write_dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.dump_string()).map_err(|e| Error::io(path, e))
    }
}
