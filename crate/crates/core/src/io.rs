//! JSON formats.
//!
//! An element is stored with its algebra and one `{re, im}` pair of
//! row-major matrices per block:
//!
//! ```json
//! {"algebra":{"blocks":[{"dim":2,"weight":1.0}]},
//!  "blocks":[{"re":[[1.0,0.0],[0.0,2.0]],"im":[[0.0,0.0],[0.0,0.0]]}]}
//! ```
//!
//! A subspace lists its generators, each a list of blocks:
//!
//! ```json
//! {"algebra":{"blocks":[{"dim":2,"weight":1.0}]},
//!  "generators":[[{"re":[[1.0,0.0],[0.0,0.0]],"im":[[0.0,0.0],[0.0,0.0]]}]]}
//! ```
//!
//! Floats are written in shortest round-trip form, so serializing a parsed
//! document reproduces it byte for byte.

use serde::{Deserialize, Serialize};

use crate::algebra::{
    Algebra, AlgebraElement, Block, BlockSpec, HermitianElement, PositiveElement, TracialAlgebra, C64,
};
use crate::convexity::{standard_subspace, Closure, ClosureWitness, Subspace, SubspaceKind};
use crate::error::{Error, Result};
use crate::projection::{IwasawaFactorization, MasaFactorization, ProjectionResult, SymmetricFactorization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub blocks: Vec<BlockSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementJson {
    pub algebra: AlgebraJson,
    pub blocks: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceJson {
    pub algebra: AlgebraJson,
    pub generators: Vec<Vec<MatrixJson>>,
}

impl AlgebraJson {
    pub fn from_algebra(alg: &Algebra) -> Self {
        Self {
            blocks: alg.blocks().to_vec(),
        }
    }

    pub fn to_algebra(&self) -> Result<Algebra> {
        TracialAlgebra::new(self.blocks.clone())
    }
}

impl MatrixJson {
    pub fn from_block(b: &Block) -> Self {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..b.nrows())
                .map(|i| (0..b.ncols()).map(|j| f(&b[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_block(&self, dim: usize) -> Result<Block> {
        let square = |m: &Vec<Vec<f64>>| m.len() == dim && m.iter().all(|r| r.len() == dim);
        if !square(&self.re) || !square(&self.im) {
            return Err(Error::Shape(format!("expected {dim}x{dim} real and imaginary parts")));
        }
        if self.re.iter().chain(&self.im).flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Block::from_fn(dim, dim, |i, j| C64::new(self.re[i][j], self.im[i][j])))
    }
}

fn blocks_to_json(blocks: &[Block]) -> Vec<MatrixJson> {
    blocks.iter().map(MatrixJson::from_block).collect()
}

fn blocks_from_json(alg: &Algebra, blocks: &[MatrixJson]) -> Result<Vec<Block>> {
    if blocks.len() != alg.num_blocks() {
        return Err(Error::Shape(format!(
            "expected {} blocks, got {}",
            alg.num_blocks(),
            blocks.len()
        )));
    }
    blocks
        .iter()
        .zip(alg.blocks())
        .map(|(m, shape)| m.to_block(shape.dim))
        .collect()
}

impl ElementJson {
    pub fn from_element(x: &AlgebraElement) -> Self {
        Self {
            algebra: AlgebraJson::from_algebra(x.algebra()),
            blocks: blocks_to_json(x.blocks()),
        }
    }

    pub fn from_hermitian(x: &HermitianElement) -> Self {
        Self::from_element(x.as_element())
    }

    pub fn to_element(&self) -> Result<AlgebraElement> {
        let alg = self.algebra.to_algebra()?;
        AlgebraElement::from_blocks(&alg, blocks_from_json(&alg, &self.blocks)?)
    }

    /// Symmetrizes the input.
    pub fn to_hermitian(&self) -> Result<HermitianElement> {
        Ok(HermitianElement::new(self.to_element()?))
    }

    pub fn to_positive(&self) -> Result<PositiveElement> {
        PositiveElement::new(self.to_hermitian()?)
    }
}

impl SubspaceJson {
    pub fn from_subspace(h: &Subspace) -> Self {
        Self {
            algebra: AlgebraJson::from_algebra(h.algebra()),
            generators: h.basis().iter().map(|b| blocks_to_json(b.blocks())).collect(),
        }
    }

    /// Orthonormalizes the generators; they need not be independent.
    pub fn to_subspace(&self) -> Result<Subspace> {
        let alg = self.algebra.to_algebra()?;
        let gens = self
            .generators
            .iter()
            .map(|g| HermitianElement::from_blocks(&alg, blocks_from_json(&alg, g)?))
            .collect::<Result<Vec<_>>>()?;
        standard_subspace(&alg, &SubspaceKind::Span(gens))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionJson {
    pub foot: ElementJson,
    pub normal: ElementJson,
    pub distance: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl From<&ProjectionResult> for ProjectionJson {
    fn from(r: &ProjectionResult) -> Self {
        Self {
            foot: ElementJson::from_hermitian(r.foot.value()),
            normal: ElementJson::from_hermitian(&r.normal),
            distance: r.distance,
            residual: r.residual,
            tolerance: r.tolerance,
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum FactorizationJson {
    /// `e^z = e^y e^w e^y`.
    Symmetric {
        y: ElementJson,
        w: ElementJson,
        residual: f64,
        orthogonality: f64,
        iterations: usize,
    },
    /// `e^x = d e^v d`.
    Masa {
        d: ElementJson,
        v: ElementJson,
        residual: f64,
        diagonal_defect: f64,
        iterations: usize,
    },
    /// `g = e^x e^y u`.
    Iwasawa {
        x: ElementJson,
        y: ElementJson,
        u: ElementJson,
        residual: f64,
        unitarity: f64,
        orthogonality: f64,
        iterations: usize,
    },
}

impl From<&SymmetricFactorization> for FactorizationJson {
    fn from(f: &SymmetricFactorization) -> Self {
        Self::Symmetric {
            y: ElementJson::from_hermitian(&f.y),
            w: ElementJson::from_hermitian(&f.w),
            residual: f.residual,
            orthogonality: f.orthogonality,
            iterations: f.iterations,
        }
    }
}

impl From<&MasaFactorization> for FactorizationJson {
    fn from(f: &MasaFactorization) -> Self {
        Self::Masa {
            d: ElementJson::from_hermitian(f.d.value()),
            v: ElementJson::from_hermitian(&f.v),
            residual: f.residual,
            diagonal_defect: f.diagonal_defect,
            iterations: f.iterations,
        }
    }
}

impl From<&IwasawaFactorization> for FactorizationJson {
    fn from(f: &IwasawaFactorization) -> Self {
        Self::Iwasawa {
            x: ElementJson::from_hermitian(&f.x),
            y: ElementJson::from_hermitian(&f.y),
            u: ElementJson::from_element(&f.u),
            residual: f.residual,
            unitarity: f.unitarity,
            orthogonality: f.orthogonality,
            iterations: f.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub x: ElementJson,
    pub y: ElementJson,
    pub triple: [usize; 3],
    pub offending: ElementJson,
    pub residual: f64,
}

impl From<&ClosureWitness> for WitnessJson {
    fn from(w: &ClosureWitness) -> Self {
        Self {
            x: ElementJson::from_hermitian(&w.x),
            y: ElementJson::from_hermitian(&w.y),
            triple: [w.triple.0, w.triple.1, w.triple.2],
            offending: ElementJson::from_hermitian(&w.offending),
            residual: w.residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureJson {
    pub closed: bool,
    pub dim: usize,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
}

impl ClosureJson {
    pub fn new(h: &Subspace, tolerance: f64, c: &Closure) -> Self {
        let (max_residual, witness) = match c {
            Closure::Pass { max_residual } => (Some(*max_residual), None),
            Closure::Fail(w) => (None, Some(WitnessJson::from(w.as_ref()))),
        };
        Self {
            closed: c.passed(),
            dim: h.dim(),
            tolerance,
            max_residual,
            witness,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn element_to_json(x: &AlgebraElement) -> Result<String> {
    to_json(&ElementJson::from_element(x))
}

pub fn hermitian_to_json(x: &HermitianElement) -> Result<String> {
    element_to_json(x.as_element())
}

pub fn parse_element(text: &str) -> Result<AlgebraElement> {
    from_json::<ElementJson>(text)?.to_element()
}

pub fn parse_hermitian(text: &str) -> Result<HermitianElement> {
    from_json::<ElementJson>(text)?.to_hermitian()
}

pub fn parse_positive(text: &str) -> Result<PositiveElement> {
    from_json::<ElementJson>(text)?.to_positive()
}

pub fn subspace_to_json(h: &Subspace) -> Result<String> {
    to_json(&SubspaceJson::from_subspace(h))
}

pub fn parse_subspace(text: &str) -> Result<Subspace> {
    from_json::<SubspaceJson>(text)?.to_subspace()
}

/// Serde adapter writing non-finite floats as the strings `"inf"`,
/// `"-inf"` and `"nan"`, which plain JSON numbers cannot express.
pub mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("invalid float {other:?}"))),
            },
        }
    }
}
