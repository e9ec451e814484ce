//! Planar triangle meshes and nodal functions.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{FinslerError, Result};
use crate::measure::{shoot, MeasureSpace};
use crate::scalar::{Real, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    pub nodes: Vec<[T; 2]>,
    pub cells: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    /// Polar radius of each node for meshes built in polar coordinates.
    pub radial: Option<Vec<T>>,
    areas: Vec<T>,
    grads: Vec<[[T; 2]; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub nodes: [usize; 2],
    pub cells: [usize; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction<T> {
    pub values: Vec<T>,
}

impl<T: Real> DiscreteFunction<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn from_fn<F: Fn(&[T; 2]) -> T>(mesh: &Mesh<T>, f: F) -> Self {
        Self {
            values: mesh.nodes.iter().map(f).collect(),
        }
    }

    pub fn constant(mesh: &Mesh<T>, c: T) -> Self {
        Self {
            values: vec![c; mesh.nodes.len()],
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }
}

// Degree-5 rule on the reference triangle (barycentric points, weights
// summing to one).
const QUAD7: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([0.059715871789770, 0.470142064105115, 0.470142064105115], 0.132394152788506),
    ([0.470142064105115, 0.059715871789770, 0.470142064105115], 0.132394152788506),
    ([0.470142064105115, 0.470142064105115, 0.059715871789770], 0.132394152788506),
    ([0.797426985353087, 0.101286507323456, 0.101286507323456], 0.125939180544827),
    ([0.101286507323456, 0.797426985353087, 0.101286507323456], 0.125939180544827),
    ([0.101286507323456, 0.101286507323456, 0.797426985353087], 0.125939180544827),
];

impl<T: Real> Mesh<T> {
    /// Builds a mesh, orienting cells counter-clockwise and rejecting
    /// cells of non-positive area.
    pub fn new(nodes: Vec<[T; 2]>, mut cells: Vec<[usize; 3]>, boundary: Vec<bool>) -> Result<Self> {
        if boundary.len() != nodes.len() {
            return Err(FinslerError::DimensionMismatch {
                expected: nodes.len(),
                found: boundary.len(),
            });
        }
        let mut areas = Vec::with_capacity(cells.len());
        let mut grads = Vec::with_capacity(cells.len());
        let scale = nodes
            .iter()
            .fold(T::zero(), |m, p| m.max(p[0].abs()).max(p[1].abs()))
            .max(T::one());
        for (ci, cell) in cells.iter_mut().enumerate() {
            if cell.iter().any(|&i| i >= nodes.len()) {
                return Err(FinslerError::DegenerateMesh(format!("cell {ci} references a missing node")));
            }
            let [a, b, c] = cell.map(|i| nodes[i]);
            let mut det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            if det < T::zero() {
                cell.swap(1, 2);
                det = -det;
            }
            if det <= T::epsilon() * T::lit(16.0) * scale * scale {
                return Err(FinslerError::DegenerateMesh(format!("cell {ci} has zero area")));
            }
            let [a, b, c] = cell.map(|i| nodes[i]);
            // gradient of barycentric coordinate i is rot90(opposite edge)/det
            let g = |p: [T; 2], q: [T; 2]| [(p[1] - q[1]) / det, (q[0] - p[0]) / det];
            grads.push([g(b, c), g(c, a), g(a, b)]);
            areas.push(det / T::lit(2.0));
        }
        Ok(Self {
            nodes,
            cells,
            boundary,
            radial: None,
            areas,
            grads,
        })
    }

    /// Union-jack triangulation of `[x0,x1] x [y0,y1]` with `nx * ny` squares.
    pub fn rectangle(x0: T, x1: T, y0: T, y1: T, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(FinslerError::DegenerateMesh("empty grid".into()));
        }
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut boundary = Vec::with_capacity(nodes.capacity());
        for j in 0..=ny {
            for i in 0..=nx {
                let x = x0 + (x1 - x0) * T::from_usize_lossy(i) / T::from_usize_lossy(nx);
                let y = y0 + (y1 - y0) * T::from_usize_lossy(j) / T::from_usize_lossy(ny);
                nodes.push([x, y]);
                boundary.push(i == 0 || j == 0 || i == nx || j == ny);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut cells = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                if (i + j) % 2 == 0 {
                    cells.push([a, b, c]);
                    cells.push([a, c, d]);
                } else {
                    cells.push([a, b, d]);
                    cells.push([b, c, d]);
                }
            }
        }
        Self::new(nodes, cells, boundary)
    }

    /// Unit square with spacing `1/n`.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::rectangle(T::zero(), T::one(), T::zero(), T::one(), n, n)
    }

    /// Polar mesh of a Euclidean disk.
    pub fn disk(center: [T; 2], radius: T, rings: usize, sectors: usize) -> Result<Self> {
        let rings_pos: Vec<Vec<[T; 2]>> = (1..=rings)
            .map(|i| {
                let r = radius * T::from_usize_lossy(i) / T::from_usize_lossy(rings);
                (0..sectors)
                    .map(|j| {
                        let t = T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(sectors);
                        [center[0] + r * t.cos(), center[1] + r * t.sin()]
                    })
                    .collect()
            })
            .collect();
        let radii = (0..=rings)
            .map(|i| radius * T::from_usize_lossy(i) / T::from_usize_lossy(rings))
            .collect::<Vec<_>>();
        Self::polar(center, &rings_pos, &radii)
    }

    /// Polar mesh of the annulus `r_in <= |x - center| <= r_out`.
    pub fn annulus(center: [T; 2], r_in: T, r_out: T, rings: usize, sectors: usize) -> Result<Self> {
        if !(r_in > T::zero() && r_in < r_out) || rings == 0 || sectors < 3 {
            return Err(FinslerError::DegenerateMesh("invalid annulus".into()));
        }
        let mut nodes = Vec::new();
        let mut boundary = Vec::new();
        let mut radial = Vec::new();
        for i in 0..=rings {
            let r = r_in + (r_out - r_in) * T::from_usize_lossy(i) / T::from_usize_lossy(rings);
            for j in 0..sectors {
                let t = T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(sectors);
                nodes.push([center[0] + r * t.cos(), center[1] + r * t.sin()]);
                boundary.push(i == 0 || i == rings);
                radial.push(r);
            }
        }
        let id = |i: usize, j: usize| i * sectors + (j % sectors);
        let mut cells = Vec::new();
        for i in 0..rings {
            for j in 0..sectors {
                quad_split(&mut cells, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), i + j);
            }
        }
        let mut m = Self::new(nodes, cells, boundary)?;
        m.radial = Some(radial);
        Ok(m)
    }

    /// Mesh of a forward geodesic ball: nodes `exp_{x0}(r_i theta_j)` for
    /// unit-F directions at equally spaced Euclidean angles. The polar
    /// radius of every node is kept in `radial`.
    pub fn geodesic_ball(space: &MeasureSpace<T>, center: [T; 2], radius: T, rings: usize, sectors: usize) -> Result<Self> {
        if space.dim() != 2 {
            return Err(FinslerError::DimensionMismatch { expected: 2, found: space.dim() });
        }
        if rings == 0 || sectors < 3 {
            return Err(FinslerError::DegenerateMesh("too few rings or sectors".into()));
        }
        let m0 = space.metric.at(&center)?;
        let step = radius / T::from_usize_lossy(rings);
        let shots: Vec<Result<Vec<[T; 2]>>> = (0..sectors)
            .into_par_iter()
            .map(|j| {
                let t = T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(sectors);
                let e = [t.cos(), t.sin()];
                let f = m0.f(&e);
                let y = [e[0] / f, e[1] / f];
                let path = shoot(&space.metric, &center, &y, radius, step)?;
                Ok(path.samples.iter().skip(1).map(|s| [s.x[0], s.x[1]]).collect())
            })
            .collect();
        let shots = shots.into_iter().collect::<Result<Vec<_>>>()?;
        let rings_pos: Vec<Vec<[T; 2]>> = (0..rings).map(|i| shots.iter().map(|s| s[i]).collect()).collect();
        let radii = (0..=rings).map(|i| step * T::from_usize_lossy(i)).collect::<Vec<_>>();
        Self::polar(center, &rings_pos, &radii)
    }

    fn polar(center: [T; 2], rings: &[Vec<[T; 2]>], radii: &[T]) -> Result<Self> {
        let sectors = rings.first().map_or(0, |r| r.len());
        if rings.is_empty() || sectors < 3 {
            return Err(FinslerError::DegenerateMesh("too few rings or sectors".into()));
        }
        let mut nodes = vec![center];
        let mut boundary = vec![false];
        let mut radial = vec![T::zero()];
        for (i, ring) in rings.iter().enumerate() {
            for p in ring {
                nodes.push(*p);
                boundary.push(i + 1 == rings.len());
                radial.push(radii[i + 1]);
            }
        }
        let id = |i: usize, j: usize| 1 + (i - 1) * sectors + (j % sectors);
        let mut cells = Vec::new();
        for j in 0..sectors {
            cells.push([0, id(1, j), id(1, j + 1)]);
        }
        for i in 1..rings.len() {
            for j in 0..sectors {
                quad_split(&mut cells, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), i + j);
            }
        }
        let mut m = Self::new(nodes, cells, boundary)?;
        m.radial = Some(radial);
        Ok(m)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn area(&self, c: usize) -> T {
        self.areas[c]
    }

    /// Gradients of the three barycentric coordinates of cell `c`.
    pub fn basis_gradients(&self, c: usize) -> &[[T; 2]; 3] {
        &self.grads[c]
    }

    pub fn centroid(&self, c: usize) -> [T; 2] {
        let [a, b, d] = self.cells[c].map(|i| self.nodes[i]);
        let three = T::lit(3.0);
        [(a[0] + b[0] + d[0]) / three, (a[1] + b[1] + d[1]) / three]
    }

    /// `du` on cell `c` of the piecewise-linear interpolant of `values`.
    pub fn cell_differential(&self, c: usize, values: &[T]) -> Vector<T> {
        let g = &self.grads[c];
        let cell = self.cells[c];
        let mut du: Vector<T> = smallvec::smallvec![T::zero(); 2];
        for i in 0..3 {
            du[0] += values[cell[i]] * g[i][0];
            du[1] += values[cell[i]] * g[i][1];
        }
        du
    }

    /// Degree-5 quadrature points of cell `c`: `(point, weight, barycentric)`.
    pub fn cell_quadrature(&self, c: usize) -> Vec<([T; 2], T, [T; 3])> {
        let [a, b, d] = self.cells[c].map(|i| self.nodes[i]);
        QUAD7
            .iter()
            .map(|(l, w)| {
                let l = l.map(T::lit);
                let p = [
                    l[0] * a[0] + l[1] * b[0] + l[2] * d[0],
                    l[0] * a[1] + l[1] * b[1] + l[2] * d[1],
                ];
                (p, T::lit(*w) * self.areas[c], l)
            })
            .collect()
    }

    /// `int_c e^Phi` per cell by the edge-midpoint rule.
    pub fn cell_masses(&self, space: &MeasureSpace<T>) -> Result<Vec<T>> {
        (0..self.cells.len())
            .into_par_iter()
            .map(|c| {
                let [a, b, d] = self.cells[c].map(|i| self.nodes[i]);
                let half = T::lit(0.5);
                let mids = [
                    [(a[0] + b[0]) * half, (a[1] + b[1]) * half],
                    [(b[0] + d[0]) * half, (b[1] + d[1]) * half],
                    [(d[0] + a[0]) * half, (d[1] + a[1]) * half],
                ];
                let mut s = T::zero();
                for m in &mids {
                    s += space.density(m)?;
                }
                Ok(s * self.areas[c] / T::lit(3.0))
            })
            .collect()
    }

    /// Lumped nodal volumes: each cell mass split equally among its vertices.
    pub fn node_masses(&self, cell_masses: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.nodes.len()];
        for (c, cell) in self.cells.iter().enumerate() {
            for &i in cell {
                out[i] += cell_masses[c] / T::lit(3.0);
            }
        }
        out
    }

    fn edge_map(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (c, cell) in self.cells.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (cell[k], cell[(k + 1) % 3]);
                map.entry((a.min(b), a.max(b))).or_default().push(c);
            }
        }
        map
    }

    pub fn interior_edges(&self) -> Vec<Edge> {
        self.edge_map()
            .into_iter()
            .filter(|(_, cs)| cs.len() == 2)
            .map(|((a, b), cs)| Edge { nodes: [a, b], cells: [cs[0], cs[1]] })
            .collect()
    }

    /// Node-to-node adjacency through cell edges.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in self.edge_map().keys() {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| !self.boundary[i]).collect()
    }

    pub fn check_function(&self, u: &DiscreteFunction<T>) -> Result<()> {
        if u.values.len() != self.nodes.len() {
            return Err(FinslerError::DimensionMismatch {
                expected: self.nodes.len(),
                found: u.values.len(),
            });
        }
        if u.values.iter().any(|v| !v.is_finite()) {
            return Err(FinslerError::DomainError("nodal values must be finite".into()));
        }
        Ok(())
    }

    /// Smallest edge length; a proxy for the mesh spacing.
    pub fn min_edge(&self) -> T {
        self.edge_map()
            .keys()
            .map(|&(a, b)| {
                let (p, q) = (self.nodes[a], self.nodes[b]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            })
            .fold(T::infinity(), |m, v| m.min(v))
    }

    /// Writes `node_id,x1,x2,boundary[,radial]` rows.
    pub fn write_nodes_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["node_id", "x1", "x2", "boundary"];
        if self.radial.is_some() {
            header.push("radial");
        }
        wr.write_record(&header)?;
        for (i, p) in self.nodes.iter().enumerate() {
            let mut row = vec![
                i.to_string(),
                p[0].to_f64_lossy().to_string(),
                p[1].to_f64_lossy().to_string(),
                u8::from(self.boundary[i]).to_string(),
            ];
            if let Some(r) = &self.radial {
                row.push(r[i].to_f64_lossy().to_string());
            }
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Writes `cell_id,n1,n2,n3` rows.
    pub fn write_cells_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["cell_id", "n1", "n2", "n3"])?;
        for (c, cell) in self.cells.iter().enumerate() {
            wr.write_record([c.to_string(), cell[0].to_string(), cell[1].to_string(), cell[2].to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R1: Read, R2: Read>(nodes: R1, cells: R2) -> Result<Self> {
        let mut pts = Vec::new();
        let mut bnd = Vec::new();
        let mut radial = Vec::new();
        let mut rd = csv::Reader::from_reader(nodes);
        let has_radial = rd.headers()?.iter().any(|h| h == "radial");
        for rec in rd.records() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| FinslerError::Parse(format!("missing column {k}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| FinslerError::Parse(e.to_string()))
            };
            pts.push([T::lit(num(1)?), T::lit(num(2)?)]);
            bnd.push(num(3)? != 0.0);
            if has_radial {
                radial.push(T::lit(num(4)?));
            }
        }
        let mut cs = Vec::new();
        let mut rd = csv::Reader::from_reader(cells);
        for rec in rd.records() {
            let rec = rec?;
            let mut c = [0usize; 3];
            for (k, slot) in c.iter_mut().enumerate() {
                *slot = rec
                    .get(k + 1)
                    .ok_or_else(|| FinslerError::Parse("missing cell column".into()))?
                    .trim()
                    .parse()
                    .map_err(|e: std::num::ParseIntError| FinslerError::Parse(e.to_string()))?;
            }
            cs.push(c);
        }
        let mut m = Self::new(pts, cs, bnd)?;
        if has_radial {
            m.radial = Some(radial);
        }
        Ok(m)
    }

    /// Writes `node_id,x1,x2,u` rows.
    pub fn write_function_csv<W: Write>(&self, u: &DiscreteFunction<T>, w: W) -> Result<()> {
        self.check_function(u)?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["node_id", "x1", "x2", "u"])?;
        for (i, p) in self.nodes.iter().enumerate() {
            wr.write_record([
                i.to_string(),
                p[0].to_f64_lossy().to_string(),
                p[1].to_f64_lossy().to_string(),
                u.values[i].to_f64_lossy().to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn quad_split(cells: &mut Vec<[usize; 3]>, a: usize, b: usize, c: usize, d: usize, parity: usize) {
    if parity % 2 == 0 {
        cells.push([a, b, c]);
        cells.push([a, c, d]);
    } else {
        cells.push([a, b, d]);
        cells.push([b, c, d]);
    }
}
