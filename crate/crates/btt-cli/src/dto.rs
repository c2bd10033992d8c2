//! Wire formats: strict JSON schemas for maps, complexes and linear maps.
//! Scalars travel as exact strings ("a/b" fractions for the p-adic backend,
//! "(poly)/(poly)" for the Laurent backend); unknown keys are rejected.

use serde::Deserialize;

use btt_core::field::{LaurentField, PAdicField, ValuedField};
use btt_core::matrix::Matrix;
use btt_core::pamap::{PAMap, PAPiece};
use btt_core::polyhedral::{CharacterVector, Complex, FaceDecl, Polyhedron, QPoint, RayDir};
use btt_core::{BigInt, BigRational};

#[derive(Debug)]
pub enum CliError {
    /// Input could not be read or violates the schema (exit 1).
    Parse(String),
    /// Input is well-formed but the requested operation fails (exit 2).
    Semantic(String),
}

impl CliError {
    pub fn parse(msg: impl Into<String>) -> Self {
        CliError::Parse(msg.into())
    }

    pub fn semantic(msg: impl Into<String>) -> Self {
        CliError::Semantic(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {}", m),
            CliError::Semantic(m) => write!(f, "error: {}", m),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDto {
    pub backend: String,
    #[serde(default)]
    pub p: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDto {
    pub id: String,
    pub vertices: Vec<Vec<String>>,
    #[serde(default)]
    pub rays: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacePolyDto {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub vertices: Vec<Vec<String>>,
    #[serde(default)]
    pub rays: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceDto {
    pub cells: (String, String),
    pub face: FacePolyDto,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDto {
    pub cells: Vec<CellDto>,
    #[serde(default)]
    pub faces: Vec<FaceDto>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDto {
    pub cell: String,
    pub basis: Vec<Vec<String>>,
    pub chars: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PamapDto {
    pub field: FieldDto,
    pub rank: usize,
    pub complex: ComplexDto,
    pub pieces: Vec<PieceDto>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearMapDto {
    pub matrix: Vec<Vec<String>>,
}

/// A loaded piecewise affine map over either backend.
pub enum Loaded {
    PAdic(PAMap<PAdicField>),
    Laurent(PAMap<LaurentField>),
}

/// Runs the same generic expression against whichever backend is loaded.
macro_rules! with_loaded {
    ($loaded:expr, $m:ident => $body:expr) => {
        match $loaded {
            $crate::dto::Loaded::PAdic($m) => $body,
            $crate::dto::Loaded::Laurent($m) => $body,
        }
    };
}
pub(crate) use with_loaded;

pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    let s = s.trim();
    let err = || CliError::parse(format!("bad rational: {}", s));
    if let Some(idx) = s.find('/') {
        let n: BigInt = s[..idx].trim().parse().map_err(|_| err())?;
        let d: BigInt = s[idx + 1..].trim().parse().map_err(|_| err())?;
        if d == BigInt::from(0) {
            return Err(err());
        }
        Ok(BigRational::new(n, d))
    } else {
        Ok(BigRational::from(s.parse::<BigInt>().map_err(|_| err())?))
    }
}

pub fn parse_point(coords: &[String]) -> Result<QPoint, CliError> {
    Ok(QPoint::new(
        coords
            .iter()
            .map(|c| parse_rational(c))
            .collect::<Result<Vec<_>, _>>()?,
    ))
}

pub fn parse_ray(coords: &[i64]) -> Result<RayDir, CliError> {
    RayDir::new(coords.iter().map(|&c| BigInt::from(c)).collect())
        .map_err(|e| CliError::parse(e.to_string()))
}

fn parse_matrix<F: ValuedField>(f: &F, rows: &[Vec<String>]) -> Result<Matrix<F::Elem>, CliError> {
    let width = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != width) {
        return Err(CliError::parse("ragged matrix rows"));
    }
    let data = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| f.parse_elem(s).map_err(|e| CliError::parse(e.to_string())))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(data))
}

pub fn build_complex(dto: &ComplexDto) -> Result<Complex, CliError> {
    let mut cells = Vec::new();
    for c in &dto.cells {
        let vertices = c
            .vertices
            .iter()
            .map(|v| parse_point(v))
            .collect::<Result<Vec<_>, _>>()?;
        let rays = c
            .rays
            .iter()
            .map(|r| parse_ray(r))
            .collect::<Result<Vec<_>, _>>()?;
        cells.push(Polyhedron::new(&c.id, vertices, rays));
    }
    let mut faces = Vec::new();
    for (k, fd) in dto.faces.iter().enumerate() {
        let vertices = fd
            .face
            .vertices
            .iter()
            .map(|v| parse_point(v))
            .collect::<Result<Vec<_>, _>>()?;
        let rays = fd
            .face
            .rays
            .iter()
            .map(|r| parse_ray(r))
            .collect::<Result<Vec<_>, _>>()?;
        let id = fd.face.id.clone().unwrap_or_else(|| format!("face-{}", k));
        faces.push(FaceDecl {
            cells: fd.cells.clone(),
            face: Polyhedron::new(&id, vertices, rays),
        });
    }
    Ok(Complex::new(cells, faces))
}

fn build_pamap<F: ValuedField>(f: &F, dto: &PamapDto) -> Result<PAMap<F>, CliError> {
    let complex = build_complex(&dto.complex)?;
    let mut pieces = Vec::new();
    for p in &dto.pieces {
        let basis = parse_matrix(f, &p.basis)?;
        let chars = p
            .chars
            .iter()
            .map(|u| CharacterVector::from_i64(u))
            .collect();
        pieces.push(PAPiece::new(&p.cell, basis, chars));
    }
    PAMap::new(f, complex, dto.rank, pieces).map_err(|e| CliError::semantic(e.to_string()))
}

pub fn load_pamap(text: &str) -> Result<Loaded, CliError> {
    let dto: PamapDto = serde_json::from_str(text).map_err(|e| CliError::parse(e.to_string()))?;
    match dto.field.backend.as_str() {
        "padic" => {
            let p = dto
                .field
                .p
                .ok_or_else(|| CliError::parse("padic backend needs a prime p"))?;
            let f = PAdicField::new(p).map_err(|e| CliError::parse(e.to_string()))?;
            Ok(Loaded::PAdic(build_pamap(&f, &dto)?))
        }
        "laurent" => {
            if dto.field.p.is_some() {
                return Err(CliError::parse("laurent backend takes no prime"));
            }
            let f = LaurentField::new();
            Ok(Loaded::Laurent(build_pamap(&f, &dto)?))
        }
        other => Err(CliError::parse(format!("unknown backend {:?}", other))),
    }
}

pub fn load_linear_map<F: ValuedField>(f: &F, text: &str) -> Result<Matrix<F::Elem>, CliError> {
    let dto: LinearMapDto =
        serde_json::from_str(text).map_err(|e| CliError::parse(e.to_string()))?;
    parse_matrix(f, &dto.matrix)
}

pub fn parse_string_matrix<F: ValuedField>(f: &F, text: &str) -> Result<Matrix<F::Elem>, CliError> {
    let rows: Vec<Vec<String>> =
        serde_json::from_str(text).map_err(|e| CliError::parse(e.to_string()))?;
    parse_matrix(f, &rows)
}
