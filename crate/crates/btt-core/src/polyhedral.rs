//! Rational polyhedral complexes in the affine slice at height one, given by
//! V-representations (vertices plus recession rays). Face relations are
//! declared by the input and verified exactly with rational linear
//! feasibility, never discovered.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A rational point of the height-one slice (the final coordinate 1 is
/// implicit).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct QPoint {
    pub coords: Vec<BigRational>,
}

impl QPoint {
    pub fn new(coords: Vec<BigRational>) -> Self {
        QPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Smallest positive integer l with l * self integral: the order of
    /// vanishing of the uniformizer along the component this vertex names.
    pub fn multiplicity(&self) -> BigInt {
        let mut l = BigInt::one();
        for c in &self.coords {
            l = l.lcm(c.denom());
        }
        l
    }
}

impl fmt::Display for QPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, ")")
    }
}

/// A primitive integer direction in the height-zero slice.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct RayDir {
    coords: Vec<BigInt>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PolyError {
    ZeroRay,
    DimensionMismatch,
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::ZeroRay => write!(f, "ray direction must be nonzero"),
            PolyError::DimensionMismatch => write!(f, "dimension mismatch"),
        }
    }
}

impl RayDir {
    /// Normalizes to the primitive vector on the same ray.
    pub fn new(coords: Vec<BigInt>) -> Result<Self, PolyError> {
        let mut g = BigInt::zero();
        for c in &coords {
            g = g.gcd(c);
        }
        if g.is_zero() {
            return Err(PolyError::ZeroRay);
        }
        Ok(RayDir {
            coords: coords.into_iter().map(|c| c / &g).collect(),
        })
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn negated(&self) -> RayDir {
        RayDir {
            coords: self.coords.iter().map(|c| -c.clone()).collect(),
        }
    }
}

impl fmt::Display for RayDir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, ")")
    }
}

/// An integral affine character: n linear entries plus a constant term,
/// pairing with (x, 1).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CharacterVector {
    pub entries: Vec<BigInt>,
}

impl CharacterVector {
    pub fn new(entries: Vec<BigInt>) -> Self {
        CharacterVector { entries }
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        CharacterVector {
            entries: entries.iter().map(|&e| BigInt::from(e)).collect(),
        }
    }

    /// Number of linear coordinates (one less than the stored length).
    pub fn linear_dim(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn linear_part(&self) -> &[BigInt] {
        &self.entries[..self.entries.len() - 1]
    }

    pub fn constant(&self) -> &BigInt {
        &self.entries[self.entries.len() - 1]
    }

    pub fn sub(&self, other: &CharacterVector) -> CharacterVector {
        assert_eq!(self.entries.len(), other.entries.len());
        CharacterVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Affine value <u, (x, 1)>.
pub fn pairing(u: &CharacterVector, x: &QPoint) -> Result<BigRational, PolyError> {
    if u.linear_dim() != x.dim() {
        return Err(PolyError::DimensionMismatch);
    }
    let mut acc = BigRational::from(u.constant().clone());
    for (c, xi) in u.linear_part().iter().zip(&x.coords) {
        acc += BigRational::from(c.clone()) * xi;
    }
    Ok(acc)
}

/// Linear value <u, (w, 0)>: the constant term plays no role on directions.
pub fn pairing_ray(u: &CharacterVector, w: &RayDir) -> Result<BigInt, PolyError> {
    if u.linear_dim() != w.dim() {
        return Err(PolyError::DimensionMismatch);
    }
    let mut acc = BigInt::zero();
    for (c, wi) in u.linear_part().iter().zip(w.coords()) {
        acc += c * wi;
    }
    Ok(acc)
}

/// V-representation polyhedron: convex hull of the vertices plus the cone
/// spanned by the rays.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polyhedron {
    pub id: String,
    pub vertices: Vec<QPoint>,
    pub rays: Vec<RayDir>,
}

impl Polyhedron {
    pub fn new(id: &str, vertices: Vec<QPoint>, rays: Vec<RayDir>) -> Self {
        Polyhedron {
            id: id.to_string(),
            vertices,
            rays,
        }
    }

    pub fn dim_ambient(&self) -> usize {
        self.vertices.first().map_or(0, |v| v.dim())
    }

    /// Recession directions; immediate from the V-representation.
    pub fn recession(&self) -> &[RayDir] {
        &self.rays
    }

    /// Exact membership: the point is a convex combination of the vertices
    /// plus a nonnegative combination of the rays.
    pub fn contains_point(&self, q: &QPoint) -> bool {
        if q.dim() != self.dim_ambient() {
            return false;
        }
        let n = q.dim();
        let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let mut row: Vec<BigRational> = Vec::new();
            for v in &self.vertices {
                row.push(v.coords[i].clone());
            }
            for r in &self.rays {
                row.push(BigRational::from(r.coords()[i].clone()));
            }
            row.push(q.coords[i].clone());
            rows.push(row);
        }
        let mut convexity: Vec<BigRational> = vec![BigRational::one(); self.vertices.len()];
        convexity.extend(vec![BigRational::zero(); self.rays.len()]);
        convexity.push(BigRational::one());
        rows.push(convexity);
        feasible(&rows)
    }

    /// Whether the direction lies in the recession cone spanned by the rays.
    pub fn contains_ray(&self, w: &RayDir) -> bool {
        if w.dim() != self.dim_ambient() || self.rays.is_empty() {
            return false;
        }
        let n = w.dim();
        let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut row: Vec<BigRational> = Vec::new();
            for r in &self.rays {
                row.push(BigRational::from(r.coords()[i].clone()));
            }
            row.push(BigRational::from(w.coords()[i].clone()));
            rows.push(row);
        }
        feasible(&rows)
    }

    /// Whether `other` is contained in this polyhedron.
    pub fn contains_polyhedron(&self, other: &Polyhedron) -> bool {
        other.vertices.iter().all(|v| self.contains_point(v))
            && other.rays.iter().all(|r| self.contains_ray(r))
    }
}

/// Phase-one simplex with Bland's rule over exact rationals. Each row is a
/// constraint `sum a_j x_j = b` (b last), all x_j >= 0; returns whether the
/// system is feasible.
fn feasible(rows: &[Vec<BigRational>]) -> bool {
    let m = rows.len();
    if m == 0 {
        return true;
    }
    let n = rows[0].len() - 1;
    let width = n + m + 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        let flip = row[n].is_negative();
        let mut r: Vec<BigRational> = vec![BigRational::zero(); width];
        for j in 0..n {
            r[j] = if flip {
                -row[j].clone()
            } else {
                row[j].clone()
            };
        }
        r[n + i] = BigRational::one();
        r[width - 1] = if flip {
            -row[n].clone()
        } else {
            row[n].clone()
        };
        t.push(r);
    }
    // minimize the artificial sum; with the artificial basis the reduced
    // costs on structural columns are minus the column sums
    let mut obj: Vec<BigRational> = vec![BigRational::zero(); width];
    for r in &t {
        for j in 0..width {
            obj[j] -= &r[j];
        }
    }
    for j in n..n + m {
        obj[j] = BigRational::zero();
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let entering = (0..n + m).find(|&j| obj[j].is_negative());
        let Some(e) = entering else { break };
        let mut leaving: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if t[i][e].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][e];
                match &leaving {
                    None => leaving = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < *br || (ratio == *br && basis[i] < basis[*bi]) {
                            leaving = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((li, _)) = leaving else {
            return false;
        };
        let pivot = t[li][e].clone();
        for j in 0..width {
            t[li][j] /= &pivot;
        }
        for i in 0..m {
            if i != li && !t[i][e].is_zero() {
                let factor = t[i][e].clone();
                for j in 0..width {
                    let sub = &t[li][j] * &factor;
                    t[i][j] -= sub;
                }
            }
        }
        if !obj[e].is_zero() {
            let factor = obj[e].clone();
            for j in 0..width {
                let sub = &t[li][j] * &factor;
                obj[j] -= sub;
            }
        }
        basis[li] = e;
    }
    let mut total = BigRational::zero();
    for i in 0..m {
        if basis[i] >= n {
            total += &t[i][width - 1];
        }
    }
    total.is_zero()
}

/// A declared shared face between two cells.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FaceDecl {
    pub cells: (String, String),
    pub face: Polyhedron,
}

/// A polyhedral complex: cells plus declared shared faces. Whether every
/// geometric intersection is declared is the input's responsibility; the
/// validator checks exactly what is declared.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Complex {
    pub cells: Vec<Polyhedron>,
    pub faces: Vec<FaceDecl>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ComplexViolation {
    DuplicateCellId(String),
    EmptyCell(String),
    MixedDimension(String),
    UnknownFaceCell(String),
    DuplicateRay { cell: String, ray: RayDir },
    RedundantVertex { cell: String, vertex: QPoint },
    FaceVertexOutsideCell { cell: String, vertex: QPoint },
    FaceRayOutsideCell { cell: String, ray: RayDir },
}

impl fmt::Display for ComplexViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexViolation::DuplicateCellId(id) => write!(f, "duplicate cell id {}", id),
            ComplexViolation::EmptyCell(id) => write!(f, "cell {} has no vertices", id),
            ComplexViolation::MixedDimension(id) => {
                write!(f, "cell {} mixes ambient dimensions", id)
            }
            ComplexViolation::UnknownFaceCell(id) => {
                write!(f, "face references unknown cell {}", id)
            }
            ComplexViolation::DuplicateRay { cell, ray } => {
                write!(f, "cell {} repeats ray {}", cell, ray)
            }
            ComplexViolation::RedundantVertex { cell, vertex } => write!(
                f,
                "cell {} vertex {} is in the hull of the others",
                cell, vertex
            ),
            ComplexViolation::FaceVertexOutsideCell { cell, vertex } => {
                write!(f, "face vertex {} lies outside cell {}", vertex, cell)
            }
            ComplexViolation::FaceRayOutsideCell { cell, ray } => {
                write!(f, "face ray {} lies outside cell {}", ray, cell)
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ComplexReport {
    pub violations: Vec<ComplexViolation>,
}

impl ComplexReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Complex {
    pub fn new(cells: Vec<Polyhedron>, faces: Vec<FaceDecl>) -> Self {
        Complex { cells, faces }
    }

    pub fn cell(&self, id: &str) -> Option<&Polyhedron> {
        self.cells.iter().find(|c| c.id == id)
    }

    pub fn ambient_dim(&self) -> usize {
        self.cells.first().map_or(0, |c| c.dim_ambient())
    }

    /// Cells not contained in any other cell.
    pub fn maximal_cells(&self) -> Vec<&Polyhedron> {
        self.cells
            .iter()
            .filter(|c| {
                !self
                    .cells
                    .iter()
                    .any(|d| d.id != c.id && d.contains_polyhedron(c))
            })
            .collect()
    }

    /// Distinct vertices over the maximal cells, sorted.
    pub fn vertex_set(&self) -> Vec<QPoint> {
        let mut out: Vec<QPoint> = Vec::new();
        for c in self.maximal_cells() {
            for v in &c.vertices {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out.sort();
        out
    }

    /// Distinct recession ray directions over the maximal cells.
    pub fn recession_rays(&self) -> Vec<RayDir> {
        let mut out: BTreeSet<RayDir> = BTreeSet::new();
        for c in self.maximal_cells() {
            for r in &c.rays {
                out.insert(r.clone());
            }
        }
        out.into_iter().collect()
    }

    /// Per-cell recession cones with the deduplicated global ray list.
    pub fn recession_fan(&self) -> (Vec<(String, Vec<RayDir>)>, Vec<RayDir>) {
        let per_cell = self
            .cells
            .iter()
            .map(|c| (c.id.clone(), c.rays.clone()))
            .collect();
        (per_cell, self.recession_rays())
    }

    pub fn validate(&self) -> ComplexReport {
        let mut report = ComplexReport::default();
        let mut seen = BTreeSet::new();
        let dim = self.ambient_dim();
        for c in &self.cells {
            if !seen.insert(c.id.clone()) {
                report
                    .violations
                    .push(ComplexViolation::DuplicateCellId(c.id.clone()));
            }
            if c.vertices.is_empty() {
                report
                    .violations
                    .push(ComplexViolation::EmptyCell(c.id.clone()));
                continue;
            }
            if c.vertices.iter().any(|v| v.dim() != dim) || c.rays.iter().any(|r| r.dim() != dim) {
                report
                    .violations
                    .push(ComplexViolation::MixedDimension(c.id.clone()));
                continue;
            }
            let mut ray_seen = BTreeSet::new();
            for r in &c.rays {
                if !ray_seen.insert(r.clone()) {
                    report.violations.push(ComplexViolation::DuplicateRay {
                        cell: c.id.clone(),
                        ray: r.clone(),
                    });
                }
            }
            for (i, v) in c.vertices.iter().enumerate() {
                let others: Vec<QPoint> = c
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, w)| w.clone())
                    .collect();
                if others.is_empty() {
                    continue;
                }
                let hull = Polyhedron::new("check", others, c.rays.clone());
                if hull.contains_point(v) {
                    report.violations.push(ComplexViolation::RedundantVertex {
                        cell: c.id.clone(),
                        vertex: v.clone(),
                    });
                }
            }
        }
        for fd in &self.faces {
            for id in [&fd.cells.0, &fd.cells.1] {
                let Some(cell) = self.cell(id) else {
                    report
                        .violations
                        .push(ComplexViolation::UnknownFaceCell(id.clone()));
                    continue;
                };
                for v in &fd.face.vertices {
                    if !cell.contains_point(v) {
                        report
                            .violations
                            .push(ComplexViolation::FaceVertexOutsideCell {
                                cell: id.clone(),
                                vertex: v.clone(),
                            });
                    }
                }
                for r in &fd.face.rays {
                    if !cell.contains_ray(r) {
                        report
                            .violations
                            .push(ComplexViolation::FaceRayOutsideCell {
                                cell: id.clone(),
                                ray: r.clone(),
                            });
                    }
                }
            }
        }
        report
    }
}
