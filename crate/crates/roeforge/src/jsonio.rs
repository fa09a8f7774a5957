//! JSON file formats: spaces, maps, matrices, involutions, homotopies.
//! Everything is plain hand-editable JSON; spaces may be given inline or as a
//! path to another file (resolved relative to the referencing file).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cylinder::{build_cylinder, CoarseHomotopyData};
use crate::error::{Error, Result};
use crate::index::IndexSpace;
use crate::label::Label;
use crate::maps::PointMap;
use crate::matrix::{BlockMatrix, CBlock};
use crate::metric::FiniteMetricSpace;
use crate::rotation::Involution;

/// `{"labels": [...], "dist": [[...], ...]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceFile {
    pub labels: Vec<Label>,
    pub dist: Vec<Vec<f64>>,
}

impl SpaceFile {
    pub fn into_space(self) -> Result<Arc<FiniteMetricSpace>> {
        Ok(Arc::new(FiniteMetricSpace::new(self.labels, self.dist)?))
    }

    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        SpaceFile {
            labels: space.labels().to_vec(),
            dist: space.dist_rows(),
        }
    }
}

/// A space given inline or as a path to a space file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Path(String),
    Inline(SpaceFile),
}

impl SpaceRef {
    pub fn load(&self, base_dir: &Path) -> Result<Arc<FiniteMetricSpace>> {
        match self {
            SpaceRef::Inline(f) => f.clone().into_space(),
            SpaceRef::Path(p) => {
                let path = base_dir.join(p);
                let file: SpaceFile = read_json(&path)?;
                file.into_space()
            }
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(format!("{}: {e}", path.display())))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Finds the label a key string denotes: integer form first, then string.
fn label_index(space: &FiniteMetricSpace, key: &str) -> Option<usize> {
    if let Ok(n) = key.parse::<i64>() {
        if let Some(i) = space.index_of(&Label::Int(n)) {
            return Some(i);
        }
    }
    space.index_of(&Label::Str(key.to_owned()))
}

/// Splits a `"i,j"` key into two label indices, rejecting ambiguous keys.
fn split_pair_key(space: &FiniteMetricSpace, key: &str) -> Result<(usize, usize)> {
    let mut found = None;
    for (pos, _) in key.match_indices(',') {
        let (left, right) = (&key[..pos], &key[pos + 1..]);
        if let (Some(i), Some(j)) = (label_index(space, left), label_index(space, right)) {
            if found.is_some() {
                return Err(Error::parse(format!("ambiguous block key `{key}`")));
            }
            found = Some((i, j));
        }
    }
    found.ok_or_else(|| Error::parse(format!("block key `{key}` names no label pair")))
}

/// `{"source": <space>, "target": <space>, "values": [...labels...]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapFile {
    pub source: SpaceRef,
    pub target: SpaceRef,
    pub values: Vec<Label>,
}

impl MapFile {
    pub fn into_map(self, dir: &Path) -> Result<PointMap> {
        let source = self.source.load(dir)?;
        let target = self.target.load(dir)?;
        PointMap::new(source, target, &self.values)
    }

    pub fn from_map(map: &PointMap) -> Self {
        MapFile {
            source: SpaceRef::Inline(SpaceFile::from_space(map.source())),
            target: SpaceRef::Inline(SpaceFile::from_space(map.target())),
            values: map.image_labels(),
        }
    }
}

pub fn load_map(path: &Path) -> Result<PointMap> {
    let file: MapFile = read_json(path)?;
    file.into_map(&base_dir(path))
}

/// `{"index": <space>, "d": k, "blocks": {"i,j": [[[re,im],...],...]}}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub index: SpaceRef,
    pub d: usize,
    pub blocks: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

impl MatrixFile {
    pub fn into_matrix(self, dir: &Path) -> Result<BlockMatrix> {
        let space = self.index.load(dir)?;
        let index = IndexSpace::from_space(space.clone());
        let mut m = BlockMatrix::zero(index, self.d);
        for (key, rows) in self.blocks {
            let (i, j) = split_pair_key(&space, &key)?;
            if rows.len() != self.d || rows.iter().any(|r| r.len() != self.d) {
                return Err(Error::parse(format!(
                    "block `{key}` is not {d}x{d}",
                    d = self.d
                )));
            }
            let block = CBlock::from_fn(self.d, self.d, |r, c| {
                Complex64::new(rows[r][c][0], rows[r][c][1])
            });
            m.set_block(i, j, block)?;
        }
        Ok(m)
    }
}

pub fn load_matrix(path: &Path) -> Result<BlockMatrix> {
    let file: MatrixFile = read_json(path)?;
    file.into_matrix(&base_dir(path))
}

pub fn matrix_to_file(m: &BlockMatrix) -> Result<MatrixFile> {
    let space = m
        .index()
        .as_plain()
        .ok_or_else(|| Error::structural("only plain-index matrices serialize to files"))?;
    let mut blocks = BTreeMap::new();
    for (&(i, j), b) in m.blocks() {
        let key = format!("{},{}", space.label(i as usize), space.label(j as usize));
        let rows: Vec<Vec<[f64; 2]>> = (0..m.block_dim())
            .map(|r| (0..m.block_dim()).map(|c| [b[(r, c)].re, b[(r, c)].im]).collect())
            .collect();
        blocks.insert(key, rows);
    }
    Ok(MatrixFile {
        index: SpaceRef::Inline(SpaceFile::from_space(space)),
        d: m.block_dim(),
        blocks,
    })
}

/// `{"index": <space>, "sigma": [...labels...]}`: the involution by image
/// labels in enumeration order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SigmaFile {
    pub index: SpaceRef,
    pub sigma: Vec<Label>,
}

impl SigmaFile {
    pub fn into_involution(self, dir: &Path) -> Result<Involution> {
        let space = self.index.load(dir)?;
        let sigma = self
            .sigma
            .iter()
            .map(|l| space.require_index(l))
            .collect::<Result<Vec<_>>>()?;
        Involution::new(IndexSpace::from_space(space), sigma)
    }
}

pub fn load_involution(path: &Path) -> Result<Involution> {
    let file: SigmaFile = read_json(path)?;
    file.into_involution(&base_dir(path))
}

/// `{"base": <space>, "target": <space>, "p": [...],
///   "H": {"x,n": <label>, ...}, "f": [...], "g": [...]}`
/// H is keyed by base label and level; f and g are optional and checked
/// against the faces of H when present.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomotopyFile {
    pub base: SpaceRef,
    pub target: SpaceRef,
    pub p: Vec<i64>,
    #[serde(rename = "H")]
    pub h: BTreeMap<String, Label>,
    #[serde(default)]
    pub f: Option<Vec<Label>>,
    #[serde(default)]
    pub g: Option<Vec<Label>>,
}

impl HomotopyFile {
    pub fn into_data(self, dir: &Path) -> Result<CoarseHomotopyData> {
        let base = self.base.load(dir)?;
        let target = self.target.load(dir)?;
        let cyl = build_cylinder(base.clone(), &self.p)?;
        let mut values: Vec<Option<usize>> = vec![None; cyl.space().n()];
        for (key, image) in &self.h {
            let pos = key
                .rfind(',')
                .ok_or_else(|| Error::parse(format!("H key `{key}` has no level")))?;
            let (xs, ns) = (&key[..pos], &key[pos + 1..]);
            let x = label_index(&base, xs)
                .ok_or_else(|| Error::UnknownPoint(xs.to_owned()))?;
            let n: u32 = ns
                .parse()
                .map_err(|_| Error::parse(format!("H key `{key}`: bad level `{ns}`")))?;
            let i = cyl
                .index_of(x, n)
                .ok_or_else(|| Error::parse(format!("H key `{key}`: no such cylinder point")))?;
            values[i] = Some(target.require_index(image)?);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    let (x, n) = cyl.point(i);
                    Error::parse(format!(
                        "H is missing a value at ({},{n})",
                        cyl.base().label(x)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let h = PointMap::from_indices(cyl.space().clone(), target.clone(), values)?;
        match (self.f, self.g) {
            (Some(f), Some(g)) => {
                let f = PointMap::new(base.clone(), target.clone(), &f)?;
                let g = PointMap::new(base, target, &g)?;
                CoarseHomotopyData::new(cyl, h, f, g)
            }
            (None, None) => CoarseHomotopyData::from_h(cyl, h),
            _ => Err(Error::parse("give both f and g or neither")),
        }
    }
}

pub fn load_homotopy(path: &Path) -> Result<CoarseHomotopyData> {
    let file: HomotopyFile = read_json(path)?;
    file.into_data(&base_dir(path))
}

pub fn load_space(path: &Path) -> Result<Arc<FiniteMetricSpace>> {
    let file: SpaceFile = read_json(path)?;
    file.into_space()
}
