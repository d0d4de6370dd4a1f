//! JSON representations of algebras, elements, maps and estimates.
//!
//! Complex numbers are `[re, im]` pairs. Element matrices nest as
//! `blocks[block][point][row][col]`. A map matrix is a flat row-major list of
//! `dim(target) × dim(source)` pairs. Coordinates run block-major, then
//! point-major, then row-major inside each matrix. Row `r` is the `r`-th
//! target coordinate and column `c` the `c`-th source coordinate.

use std::sync::Arc;

use anyhow::{anyhow, bail, ensure, Context};
use serde::{Deserialize, Serialize};

use nclp_core::algebra::{AlgebraSpec, Block, Element};
use nclp_core::linalg::{Mat, C64};
use nclp_core::lp::{AmplifiedElement, Exponent};
use nclp_core::map::LinearMap;
use nclp_core::valued::NormEstimate;

pub type Complex = [f64; 2];

fn cx(z: C64) -> Complex {
    [z.re, z.im]
}

fn from_cx(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockJson {
    pub n: usize,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecJson {
    pub blocks: Vec<BlockJson>,
}

impl SpecJson {
    pub fn from_spec(spec: &AlgebraSpec) -> Self {
        Self { blocks: spec.blocks().iter().map(|b| BlockJson { n: b.size, weights: b.weights.clone() }).collect() }
    }

    pub fn to_spec(&self) -> anyhow::Result<AlgebraSpec> {
        Ok(AlgebraSpec::new(self.blocks.iter().map(|b| Block::new(b.n, b.weights.clone())).collect())?)
    }
}

/// `{"spec": ..., "blocks": [[[[re, im], ...], ...], ...]}`. Without `spec`,
/// block sizes and point counts come from the nesting and every weight is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecJson>,
    pub blocks: Vec<Vec<Vec<Vec<Complex>>>>,
}

impl ElementJson {
    pub fn from_element(x: &Element) -> Self {
        let mut blocks = Vec::new();
        let mut slot = 0;
        for b in x.spec().blocks() {
            let mut points = Vec::new();
            for _ in &b.weights {
                let m = x.slot(slot);
                points.push((0..m.nrows()).map(|r| (0..m.ncols()).map(|c| cx(m[(r, c)])).collect()).collect());
                slot += 1;
            }
            blocks.push(points);
        }
        Self { spec: Some(SpecJson::from_spec(x.spec())), blocks }
    }

    fn inferred_spec(&self) -> anyhow::Result<AlgebraSpec> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, pts)| {
                let n = pts.first().map_or(0, |m| m.len());
                ensure!(!pts.is_empty(), "block {i} has no points");
                Ok(Block::new(n, vec![1.0; pts.len()]))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(AlgebraSpec::new(blocks)?)
    }

    pub fn to_element(&self, spec: Option<&Arc<AlgebraSpec>>) -> anyhow::Result<Element> {
        let spec = match (spec, &self.spec) {
            (Some(s), _) => s.clone(),
            (None, Some(s)) => Arc::new(s.to_spec()?),
            (None, None) => Arc::new(self.inferred_spec()?),
        };
        let mut mats = Vec::new();
        ensure!(self.blocks.len() == spec.blocks().len(), "expected {} blocks, found {}", spec.blocks().len(), self.blocks.len());
        for (i, (pts, b)) in self.blocks.iter().zip(spec.blocks()).enumerate() {
            ensure!(pts.len() == b.weights.len(), "block {i}: expected {} points, found {}", b.weights.len(), pts.len());
            for (k, rows) in pts.iter().enumerate() {
                ensure!(
                    rows.len() == b.size && rows.iter().all(|r| r.len() == b.size),
                    "block {i}, point {k}: expected a {}x{} matrix",
                    b.size,
                    b.size
                );
                mats.push(Mat::from_fn(b.size, b.size, |r, c| from_cx(&rows[r][c])));
            }
        }
        Ok(Element::from_slots(spec, mats)?)
    }
}

/// `{"spec": ..., "m": m, "entries": [[Element, ...], ...]}` with `m × m` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplifiedJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecJson>,
    pub m: usize,
    pub entries: Vec<Vec<ElementJson>>,
}

impl AmplifiedJson {
    pub fn from_amplified(x: &AmplifiedElement) -> Self {
        let m = x.m();
        let entries = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| ElementJson { spec: None, ..ElementJson::from_element(x.entry(i, j)) })
                    .collect()
            })
            .collect();
        Self { spec: Some(SpecJson::from_spec(x.base())), m, entries }
    }

    pub fn to_amplified(&self) -> anyhow::Result<AmplifiedElement> {
        ensure!(self.m >= 1, "m must be at least 1");
        ensure!(
            self.entries.len() == self.m && self.entries.iter().all(|r| r.len() == self.m),
            "entries must form an {}x{} array",
            self.m,
            self.m
        );
        let spec = match &self.spec {
            Some(s) => Arc::new(s.to_spec()?),
            None => {
                let first = &self.entries[0][0];
                Arc::new(match &first.spec {
                    Some(s) => s.to_spec()?,
                    None => first.inferred_spec()?,
                })
            }
        };
        let mut entries = Vec::with_capacity(self.m * self.m);
        for row in &self.entries {
            for e in row {
                entries.push(e.to_element(Some(&spec))?);
            }
        }
        Ok(AmplifiedElement::new(spec, self.m, entries)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapJson {
    pub source: SpecJson,
    pub target: SpecJson,
    pub p: f64,
    /// Row-major, `dim(target)` rows of `dim(source)` entries.
    pub matrix: Vec<Complex>,
}

impl MapJson {
    pub fn from_map(t: &LinearMap) -> Self {
        let m = t.matrix();
        let mut matrix = Vec::with_capacity(m.nrows() * m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                matrix.push(cx(m[(r, c)]));
            }
        }
        Self { source: SpecJson::from_spec(t.source()), target: SpecJson::from_spec(t.target()), p: t.p().value(), matrix }
    }

    pub fn to_map(&self) -> anyhow::Result<LinearMap> {
        let source = Arc::new(self.source.to_spec()?);
        let target = Arc::new(self.target.to_spec()?);
        let (rows, cols) = (target.dim(), source.dim());
        if self.matrix.len() != rows * cols {
            bail!("matrix has {} entries, expected {rows}x{cols} = {}", self.matrix.len(), rows * cols);
        }
        let m = Mat::from_fn(rows, cols, |r, c| from_cx(&self.matrix[r * cols + c]));
        Ok(LinearMap::new(source, target, Exponent::new(self.p)?, m)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateJson {
    pub lower: f64,
    pub upper: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub witness: Option<AmplifiedJson>,
}

impl EstimateJson {
    pub fn from_estimate(e: &NormEstimate) -> Self {
        Self {
            lower: e.lower,
            upper: e.upper,
            converged: e.converged,
            iterations: e.iterations,
            witness: e.witness.as_ref().map(AmplifiedJson::from_amplified),
        }
    }
}

/// Either a plain element or an amplified one, told apart by the `m` key.
pub enum Input {
    Element(Element),
    Amplified(AmplifiedElement),
}

pub fn parse_input(text: &str) -> anyhow::Result<Input> {
    let v: serde_json::Value = serde_json::from_str(text).context("malformed JSON")?;
    if v.get("m").is_some() {
        let a: AmplifiedJson = serde_json::from_value(v).context("not an amplified element")?;
        Ok(Input::Amplified(a.to_amplified()?))
    } else {
        let e: ElementJson = serde_json::from_value(v).context("not an element")?;
        Ok(Input::Element(e.to_element(None)?))
    }
}

pub fn parse_element(text: &str) -> anyhow::Result<Element> {
    match parse_input(text)? {
        Input::Element(e) => Ok(e),
        Input::Amplified(_) => Err(anyhow!("expected an element, found an amplified element")),
    }
}

pub fn parse_amplified(text: &str) -> anyhow::Result<AmplifiedElement> {
    match parse_input(text)? {
        Input::Amplified(a) => Ok(a),
        // a plain element is the m = 1 case
        Input::Element(e) => Ok(AmplifiedElement::new(e.spec().clone(), 1, vec![e])?),
    }
}

pub fn parse_map(text: &str) -> anyhow::Result<LinearMap> {
    let m: MapJson = serde_json::from_str(text).context("malformed map JSON")?;
    m.to_map()
}
