//! The rank-2 affine building: an infinite (q+1)-regular tree whose vertices
//! are homothety classes of lattices in K^2. Provides neighbor enumeration
//! over finite residue fields, algebraic geodesics, apartment (common line)
//! searches with checkable certificates, Helly-style collinearity tests, and
//! DOT export of finite balls.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::field::{FieldError, Val, ValuedField};
use crate::latnorm::{
    common_basis_of_pair, invariant_factors, norm_from_lattice, Lattice, LatticeError,
};
use crate::matrix::{self, Matrix};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TreeError {
    RankDeficient,
    NotRankTwo,
    UnsupportedEnumeration,
    RadiusTooLarge { radius: u32, cap: u32 },
    InsufficientVertices,
    Lattice(LatticeError),
    Field(FieldError),
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::RankDeficient => write!(f, "rank-deficient lattice data"),
            TreeError::NotRankTwo => write!(f, "tree operations need rank 2"),
            TreeError::UnsupportedEnumeration => {
                write!(f, "neighbor enumeration needs a finite residue field")
            }
            TreeError::RadiusTooLarge { radius, cap } => {
                write!(f, "radius {} exceeds the configured cap {}", radius, cap)
            }
            TreeError::InsufficientVertices => write!(f, "need at least 3 vertices"),
            TreeError::Lattice(e) => write!(f, "{}", e),
            TreeError::Field(e) => write!(f, "{}", e),
        }
    }
}

impl From<LatticeError> for TreeError {
    fn from(e: LatticeError) -> Self {
        TreeError::Lattice(e)
    }
}

impl From<FieldError> for TreeError {
    fn from(e: FieldError) -> Self {
        TreeError::Field(e)
    }
}

/// A homothety class of rank-2 lattices, stored as the representative whose
/// canonical form has minimal pivot exponent 0. Classes are equal exactly
/// when these representatives are equal.
#[derive(Clone, PartialEq, Debug)]
pub struct VertexClass<F: ValuedField> {
    rep: Lattice<F>,
}

impl<F: ValuedField> Eq for VertexClass<F> {}

impl<F: ValuedField> PartialOrd for VertexClass<F> {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: ValuedField> Ord for VertexClass<F> {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.rep.cmp(&other.rep)
    }
}

impl<F: ValuedField> VertexClass<F> {
    pub fn normalize(l: &Lattice<F>) -> Result<Self, TreeError> {
        if l.rank() != 2 {
            return Err(TreeError::NotRankTwo);
        }
        let min = *l.pivot_exponents().iter().min().expect("rank 2");
        Ok(VertexClass {
            rep: l.scaled(-min),
        })
    }

    pub fn representative(&self) -> &Lattice<F> {
        &self.rep
    }

    pub fn field(&self) -> &F {
        self.rep.field()
    }

    /// Stable identifier: the canonical representative rendered as a matrix.
    pub fn key(&self) -> String {
        matrix::format_matrix(self.field(), self.rep.generators())
    }

    pub fn pivot_exponents(&self) -> &[i64] {
        self.rep.pivot_exponents()
    }
}

/// A path of pairwise-adjacent vertex classes without immediate backtracking.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TreePath<F: ValuedField> {
    pub vertices: Vec<VertexClass<F>>,
}

impl<F: ValuedField> TreePath<F> {
    pub fn len_edges(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }
}

/// A boundary direction of the tree: a line in K^2 (the unique proper flag
/// subspace of the prevaluation attached to a parallelism class of rays),
/// stored with its generator scaled so the first nonzero coordinate is 1.
#[derive(Clone, PartialEq, Debug)]
pub struct End<F: ValuedField> {
    line: Vec<F::Elem>,
}

impl<F: ValuedField> Eq for End<F> {}

impl<F: ValuedField> PartialOrd for End<F> {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: ValuedField> Ord for End<F> {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.line.cmp(&other.line)
    }
}

impl<F: ValuedField> End<F> {
    pub fn new(f: &F, gen: Vec<F::Elem>) -> Result<Self, TreeError> {
        if gen.len() != 2 {
            return Err(TreeError::NotRankTwo);
        }
        let lead = gen.iter().find(|c| !f.is_zero(c)).cloned();
        let lead = lead.ok_or(TreeError::RankDeficient)?;
        let inv = f.inv(&lead).expect("nonzero");
        Ok(End {
            line: gen.iter().map(|c| f.mul(c, &inv)).collect(),
        })
    }

    pub fn line(&self) -> &[F::Elem] {
        &self.line
    }

    /// The direction as a prevaluation: value 1 on the line, 0 on a
    /// complement, so the unique proper flag subspace is the line itself.
    pub fn prevaluation(&self, f: &F) -> crate::latnorm::Prevaluation<F> {
        let complement = if f.is_zero(&self.line[0]) {
            vec![f.one(), f.zero()]
        } else {
            vec![f.zero(), f.one()]
        };
        let basis = Matrix::from_cols(2, vec![self.line.clone(), complement]);
        crate::latnorm::Prevaluation::new(
            f,
            basis,
            vec![
                BigRational::from(num_bigint::BigInt::from(1)),
                BigRational::zero(),
            ],
        )
        .expect("line plus complement is a basis")
    }
}

/// Witness that a vertex/end configuration fits in no single apartment.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum NoLineCertificate<F: ValuedField> {
    /// A vertex of degree >= 3 in the union of pairwise geodesics.
    Tripod(VertexClass<F>),
    /// A required boundary line that no apartment through the vertices has.
    IncompatibleEnd {
        line: End<F>,
        vertex: VertexClass<F>,
    },
    /// More than two distinct boundary lines were required.
    TooManyEnds(Vec<End<F>>),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CommonLine<F: ValuedField> {
    Frame(Matrix<F::Elem>),
    None(NoLineCertificate<F>),
}

pub fn normalize<F: ValuedField>(l: &Lattice<F>) -> Result<VertexClass<F>, TreeError> {
    VertexClass::normalize(l)
}

/// The q+1 classes adjacent to `v`, one for each line of the rank-2 space
/// over the residue field. Needs a finite residue field.
pub fn neighbors<F: ValuedField>(v: &VertexClass<F>) -> Result<Vec<VertexClass<F>>, TreeError> {
    let f = v.field().clone();
    let reps = f.residue_transversal().map_err(|e| match e {
        FieldError::UnsupportedEnumeration => TreeError::UnsupportedEnumeration,
        other => TreeError::Field(other),
    })?;
    let gens = v.representative().generators();
    let g1 = gens.col(0);
    let g2 = gens.col(1);
    let mut lifts: Vec<Vec<F::Elem>> = Vec::with_capacity(reps.len() + 1);
    for s in &reps {
        lifts.push(vec![
            f.add(&g1[0], &f.mul(s, &g2[0])),
            f.add(&g1[1], &f.mul(s, &g2[1])),
        ]);
    }
    lifts.push(g2.clone());
    let scaled = {
        let mut m = gens.clone();
        matrix::scale_col(&f, &mut m, 0, &f.uniformizer_pow(1));
        matrix::scale_col(&f, &mut m, 1, &f.uniformizer_pow(1));
        m
    };
    let mut out = Vec::with_capacity(lifts.len());
    for lift in lifts {
        let stacked = scaled.hstack(&Matrix::from_cols(2, vec![lift]));
        let l = Lattice::hnf(&f, &stacked)?;
        out.push(VertexClass::normalize(&l)?);
    }
    out.sort();
    out.dedup();
    debug_assert_eq!(out.len(), reps.len() + 1);
    Ok(out)
}

pub fn distance<F: ValuedField>(u: &VertexClass<F>, v: &VertexClass<F>) -> Result<u64, TreeError> {
    let (inv, _) = invariant_factors(u.representative(), v.representative())?;
    Ok((inv.exponents[0] - inv.exponents[1]) as u64)
}

/// The unique geodesic, built by interpolating exponents on a basis adapted
/// to both endpoints rather than by search.
pub fn geodesic<F: ValuedField>(
    u: &VertexClass<F>,
    v: &VertexClass<F>,
) -> Result<TreePath<F>, TreeError> {
    let f = u.field().clone();
    let (exps, basis) = common_basis_of_pair(u.representative(), v.representative())?;
    let d = exps[0] - exps[1];
    let mut vertices = Vec::with_capacity(d as usize + 1);
    for k in 0..=d {
        let l = Lattice::diagonal(&f, &basis, &[k, 0])?;
        vertices.push(VertexClass::normalize(&l)?);
    }
    debug_assert_eq!(vertices.first(), Some(u));
    debug_assert_eq!(vertices.last(), Some(v));
    Ok(TreePath { vertices })
}

/// Largest exponent k with pi^{-k} e in the lattice.
fn lattice_valuation<F: ValuedField>(l: &Lattice<F>, e: &[F::Elem]) -> Result<i64, TreeError> {
    let f = l.field();
    let coords = matrix::solve_vec(f, l.generators(), e).map_err(LatticeError::from)?;
    let mut best: Option<i64> = None;
    for c in &coords {
        if let Val::Finite(v) = f.val(c) {
            best = Some(best.map_or(v, |b| b.min(v)));
        }
    }
    best.ok_or(TreeError::RankDeficient)
}

/// Primitive generator of `line` inside the lattice: an element of the line
/// lying in the lattice but not in pi times it.
fn primitive_in<F: ValuedField>(
    l: &Lattice<F>,
    line: &[F::Elem],
) -> Result<Vec<F::Elem>, TreeError> {
    let f = l.field().clone();
    let v = lattice_valuation(l, line)?;
    let factor = f.uniformizer_pow(v);
    Ok(line.iter().map(|c| f.mul(c, &factor)).collect())
}

/// k-th vertex on the ray from `x` toward the end `line`.
fn ray_vertex<F: ValuedField>(
    x: &VertexClass<F>,
    line: &End<F>,
    k: i64,
) -> Result<VertexClass<F>, TreeError> {
    let f = x.field().clone();
    let rep = x.representative();
    let prim = primitive_in(rep, line.line())?;
    let mut scaled = rep.generators().clone();
    let factor = f.uniformizer_pow(k);
    matrix::scale_col(&f, &mut scaled, 0, &factor);
    matrix::scale_col(&f, &mut scaled, 1, &factor);
    let stacked = scaled.hstack(&Matrix::from_cols(2, vec![prim]));
    VertexClass::normalize(&Lattice::hnf(&f, &stacked)?)
}

struct UnionGraph<F: ValuedField> {
    adj: BTreeMap<String, BTreeSet<String>>,
    by_key: BTreeMap<String, VertexClass<F>>,
}

impl<F: ValuedField> UnionGraph<F> {
    fn build(points: &[VertexClass<F>]) -> Result<Self, TreeError> {
        let mut adj: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut by_key = BTreeMap::new();
        for p in points {
            by_key.insert(p.key(), p.clone());
            adj.entry(p.key()).or_default();
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let path = geodesic(&points[i], &points[j])?;
                for w in path.vertices.windows(2) {
                    let (a, b) = (w[0].key(), w[1].key());
                    by_key.insert(a.clone(), w[0].clone());
                    by_key.insert(b.clone(), w[1].clone());
                    adj.entry(a.clone()).or_default().insert(b.clone());
                    adj.entry(b).or_default().insert(a);
                }
            }
        }
        Ok(UnionGraph { adj, by_key })
    }

    fn branch_vertex(&self) -> Option<&VertexClass<F>> {
        self.adj
            .iter()
            .find(|(_, nbrs)| nbrs.len() >= 3)
            .map(|(k, _)| &self.by_key[k])
    }

    /// Endpoints of the path (degree <= 1); meaningful when no branch exists.
    fn endpoints(&self) -> Vec<&VertexClass<F>> {
        self.adj
            .iter()
            .filter(|(_, nbrs)| nbrs.len() <= 1)
            .map(|(k, _)| &self.by_key[k])
            .collect()
    }
}

/// Returns the first vertex whose class is not diagonal in the frame, or
/// None when the frame admits every vertex.
fn frame_rejects<F: ValuedField>(
    frame: &Matrix<F::Elem>,
    vertices: &[VertexClass<F>],
) -> Result<Option<VertexClass<F>>, TreeError> {
    for v in vertices {
        if !norm_from_lattice(v.representative()).is_adapted(frame)? {
            return Ok(Some(v.clone()));
        }
    }
    Ok(None)
}

/// Searches for a frame whose apartment contains every vertex of `s` and has
/// every listed end among its boundary lines. Returns either the frame
/// (verified before returning) or an independently checkable certificate
/// that none exists.
pub fn common_line<F: ValuedField>(
    s: &[VertexClass<F>],
    ends: &[End<F>],
) -> Result<CommonLine<F>, TreeError> {
    assert!(!s.is_empty(), "need at least one vertex");
    let f = s[0].field().clone();
    let mut vertices: Vec<VertexClass<F>> = s.to_vec();
    vertices.sort();
    vertices.dedup();
    let mut lines: Vec<End<F>> = ends.to_vec();
    lines.sort();
    lines.dedup();
    if lines.len() > 2 {
        return Ok(CommonLine::None(NoLineCertificate::TooManyEnds(lines)));
    }

    let mut diameter = 0u64;
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            diameter = diameter.max(distance(&vertices[i], &vertices[j])?);
        }
    }
    // A far vertex on the ray toward each required end exposes, inside the
    // union of geodesics, any branching that the end forces.
    let reach = diameter as i64 + 2;
    let mut augmented = vertices.clone();
    let mut ray_far: Vec<(End<F>, VertexClass<F>)> = Vec::new();
    for end in &lines {
        let far = ray_vertex(&vertices[0], end, reach)?;
        ray_far.push((end.clone(), far.clone()));
        augmented.push(far);
    }
    augmented.sort();
    augmented.dedup();

    let graph = UnionGraph::build(&augmented)?;
    if let Some(branch) = graph.branch_vertex() {
        return Ok(CommonLine::None(NoLineCertificate::Tripod(branch.clone())));
    }

    let frame = match lines.len() {
        2 => Matrix::from_cols(2, vec![lines[0].line().to_vec(), lines[1].line().to_vec()]),
        1 => {
            let end = &lines[0];
            let far = &ray_far[0].1;
            let endpoints = graph.endpoints();
            let anchor = endpoints
                .iter()
                .find(|v| v.key() != far.key())
                .cloned()
                .unwrap_or(far)
                .clone();
            let g1 = primitive_in(anchor.representative(), end.line())?;
            let (exps, basis) =
                common_basis_of_pair(anchor.representative(), far.representative())?;
            debug_assert!(exps[0] > exps[1]);
            Matrix::from_cols(2, vec![g1, basis.col(0)])
        }
        _ => {
            let endpoints = graph.endpoints();
            if endpoints.len() < 2 {
                vertices[0].representative().generators().clone()
            } else {
                let (_, basis) = common_basis_of_pair(
                    endpoints[0].representative(),
                    endpoints[1].representative(),
                )?;
                basis
            }
        }
    };

    if matrix::inverse(&f, &frame).is_err() {
        return Ok(CommonLine::None(NoLineCertificate::TooManyEnds(lines)));
    }
    match frame_rejects(&frame, &augmented)? {
        None => Ok(CommonLine::Frame(frame)),
        Some(vertex) => match lines.first() {
            Some(end) => Ok(CommonLine::None(NoLineCertificate::IncompatibleEnd {
                line: end.clone(),
                vertex,
            })),
            // without end constraints the pair basis diagonalizes every
            // vertex of a branch-free union
            None => unreachable!("pair basis rejected a vertex on its own geodesic"),
        },
    }
}

/// Re-checks a tripod certificate from geodesics alone: the vertex must see
/// at least three distinct first steps toward members of the configuration.
pub fn verify_tripod<F: ValuedField>(
    center: &VertexClass<F>,
    s: &[VertexClass<F>],
    ends: &[End<F>],
) -> Result<bool, TreeError> {
    let mut first_steps: BTreeSet<String> = BTreeSet::new();
    for v in s {
        if v == center {
            continue;
        }
        let path = geodesic(center, v)?;
        if path.vertices.len() > 1 {
            first_steps.insert(path.vertices[1].key());
        }
    }
    for end in ends {
        let step = ray_vertex(center, end, 1)?;
        first_steps.insert(step.key());
    }
    Ok(first_steps.len() >= 3)
}

/// Whether every 3-element subset lies on a single path.
pub fn helly_triples<F: ValuedField>(s: &[VertexClass<F>]) -> Result<bool, TreeError> {
    if s.len() < 3 {
        return Err(TreeError::InsufficientVertices);
    }
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            for k in j + 1..s.len() {
                let dij = distance(&s[i], &s[j])?;
                let dik = distance(&s[i], &s[k])?;
                let djk = distance(&s[j], &s[k])?;
                let collinear = dij + djk == dik || dij + dik == djk || dik + djk == dij;
                if !collinear {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// All classes within the given radius of the center, sorted by key.
pub fn ball<F: ValuedField>(
    center: &VertexClass<F>,
    radius: u32,
) -> Result<Vec<VertexClass<F>>, TreeError> {
    let mut seen: BTreeMap<String, VertexClass<F>> = BTreeMap::new();
    seen.insert(center.key(), center.clone());
    let mut fringe = vec![center.clone()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for v in &fringe {
            for n in neighbors(v)? {
                if !seen.contains_key(&n.key()) {
                    seen.insert(n.key(), n.clone());
                    next.push(n);
                }
            }
        }
        fringe = next;
    }
    Ok(seen.into_values().collect())
}

/// DOT rendering of the ball around `center`; node labels carry the pivot
/// exponents of the canonical representative. Output is deterministic.
pub fn export_dot<F: ValuedField>(
    center: &VertexClass<F>,
    radius: u32,
    cap: u32,
) -> Result<String, TreeError> {
    use core::fmt::Write;
    if radius > cap {
        return Err(TreeError::RadiusTooLarge { radius, cap });
    }
    let nodes = ball(center, radius)?;
    let keys: BTreeSet<String> = nodes.iter().map(|n| n.key()).collect();
    let mut edges: BTreeSet<(String, String)> = BTreeSet::new();
    for n in &nodes {
        for nb in neighbors(n)? {
            let (a, b) = (n.key(), nb.key());
            if keys.contains(&b) {
                let pair = if a <= b { (a, b) } else { (b, a) };
                edges.insert(pair);
            }
        }
    }
    let mut out = String::from("graph bruhat_tits_ball {\n");
    for n in &nodes {
        let exps = n.pivot_exponents();
        writeln!(
            out,
            "  \"{}\" [label=\"({},{})\"];",
            n.key(),
            exps[0],
            exps[1]
        )
        .unwrap();
    }
    for (a, b) in &edges {
        writeln!(out, "  \"{}\" -- \"{}\";", a, b).unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}
