//! Block matrices over an index space: the finite model of the algebra of
//! finite-propagation matrices with coefficient blocks.
//!
//! Blocks are d x d complex; absent blocks are zero. A block whose largest
//! entry modulus falls below [`PRUNE_TOL`] is dropped at insertion, so
//! numerical noise never inflates propagation. Propagation uses the index
//! space's designated metric (the outer factor for products); compact
//! coefficients are modeled by the block dimension.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::index::IndexSpace;
use crate::maps::PointMap;
use crate::metric::FiniteMetricSpace;

/// Blocks with every entry modulus below this are treated as zero.
pub const PRUNE_TOL: f64 = 1e-14;

pub type CBlock = DMatrix<Complex64>;

/// A sparse matrix of d x d complex blocks indexed by an [`IndexSpace`].
#[derive(Clone, Debug)]
pub struct BlockMatrix {
    index: Arc<IndexSpace>,
    d: usize,
    blocks: BTreeMap<(u32, u32), CBlock>,
}

impl BlockMatrix {
    pub fn zero(index: Arc<IndexSpace>, d: usize) -> Self {
        BlockMatrix {
            index,
            d,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(index: Arc<IndexSpace>, d: usize) -> Self {
        let mut m = Self::zero(index, d);
        for i in 0..m.index.n_points() {
            m.blocks
                .insert((i as u32, i as u32), CBlock::identity(d, d));
        }
        m
    }

    pub fn from_blocks<I>(index: Arc<IndexSpace>, d: usize, blocks: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), CBlock)>,
    {
        let mut m = Self::zero(index, d);
        for ((i, j), b) in blocks {
            m.set_block(i, j, b)?;
        }
        Ok(m)
    }

    /// Inserts a block, replacing any previous one; near-zero blocks are
    /// pruned instead of stored.
    pub fn set_block(&mut self, i: usize, j: usize, b: CBlock) -> Result<()> {
        if i >= self.index.n_points() || j >= self.index.n_points() {
            return Err(Error::structural(format!(
                "block position ({i},{j}) outside a {}-point index",
                self.index.n_points()
            )));
        }
        if b.nrows() != self.d || b.ncols() != self.d {
            return Err(Error::structural(format!(
                "block at ({i},{j}) is {}x{}, expected {}x{}",
                b.nrows(),
                b.ncols(),
                self.d,
                self.d
            )));
        }
        if block_max_abs(&b) < PRUNE_TOL {
            self.blocks.remove(&(i as u32, j as u32));
        } else {
            self.blocks.insert((i as u32, j as u32), b);
        }
        Ok(())
    }

    /// Scalar convenience for d = 1 matrices.
    pub fn set_scalar(&mut self, i: usize, j: usize, v: Complex64) -> Result<()> {
        self.set_block(i, j, CBlock::from_element(1, 1, v))
    }

    pub fn index(&self) -> &Arc<IndexSpace> {
        &self.index
    }

    pub fn block_dim(&self) -> usize {
        self.d
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&CBlock> {
        self.blocks.get(&(i as u32, j as u32))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(u32, u32), &CBlock)> {
        self.blocks.iter()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `max { pdist(i,j) : block(i,j) != 0 }`, 0 for the zero matrix.
    pub fn propagation(&self) -> f64 {
        self.blocks
            .keys()
            .map(|&(i, j)| self.index.pdist(i as usize, j as usize))
            .fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &Self, op: &str) -> Result<()> {
        if self.index != other.index {
            return Err(Error::structural(format!("{op}: index spaces differ")));
        }
        if self.d != other.d {
            return Err(Error::structural(format!(
                "{op}: block dimensions differ ({} vs {})",
                self.d, other.d
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "add")?;
        let mut out = Self::zero(self.index.clone(), self.d);
        for (&(i, j), b) in &self.blocks {
            let sum = match other.blocks.get(&(i, j)) {
                Some(c) => b + c,
                None => b.clone(),
            };
            out.set_block(i as usize, j as usize, sum)?;
        }
        for (&(i, j), c) in &other.blocks {
            if !self.blocks.contains_key(&(i, j)) {
                out.set_block(i as usize, j as usize, c.clone())?;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.index.clone(), self.d);
        for (&(i, j), b) in &self.blocks {
            // pruning applies to the scaled block
            let _ = out.set_block(i as usize, j as usize, b.map(|v| v * c));
        }
        out
    }

    /// Conjugate transpose: block (i,j) becomes the adjoint of block (j,i).
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.index.clone(), self.d);
        for (&(i, j), b) in &self.blocks {
            let _ = out.set_block(j as usize, i as usize, b.adjoint());
        }
        out
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "multiply")?;
        let mut acc: BTreeMap<(u32, u32), CBlock> = BTreeMap::new();
        for (&(i, k), a) in &self.blocks {
            let lo = (k, 0u32);
            let hi = (k, u32::MAX);
            for (&(_, j), b) in other.blocks.range(lo..=hi) {
                let prod = a * b;
                acc.entry((i, j))
                    .and_modify(|s| *s += &prod)
                    .or_insert(prod);
            }
        }
        let mut out = Self::zero(self.index.clone(), self.d);
        for ((i, j), b) in acc {
            out.set_block(i as usize, j as usize, b)?;
        }
        Ok(out)
    }

    /// Index points that carry a nonzero row or column, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .blocks
            .keys()
            .flat_map(|&(i, j)| [i as usize, j as usize])
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Dense flattening restricted to the support, in index order. The
    /// operator norm and singular values are invariant under dropping zero
    /// rows and columns, and the support of every matrix built here is small.
    pub fn flatten_support(&self) -> CBlock {
        let support = self.support();
        let pos: BTreeMap<usize, usize> =
            support.iter().enumerate().map(|(a, &i)| (i, a)).collect();
        let s = support.len();
        let d = self.d;
        let mut dense = CBlock::zeros(s * d, s * d);
        for (&(i, j), b) in &self.blocks {
            let (bi, bj) = (pos[&(i as usize)] * d, pos[&(j as usize)] * d);
            dense.view_mut((bi, bj), (d, d)).copy_from(b);
        }
        dense
    }

    /// Largest singular value of the flattened matrix.
    pub fn operator_norm(&self) -> f64 {
        if self.blocks.is_empty() {
            return 0.0;
        }
        let dense = self.flatten_support();
        max_singular_value(&dense)
    }

    /// Nonzero-part singular values, descending. Values of the full matrix
    /// differ from these only by zeros.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.blocks.is_empty() {
            return Vec::new();
        }
        let dense = self.flatten_support();
        let mut sv: Vec<f64> = dense.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
        sv
    }

    /// `sup_{x,y} ||b_{x,y}||`: the largest block operator norm.
    pub fn max_block_norm(&self) -> f64 {
        self.blocks
            .values()
            .map(block_norm)
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        self.blocks
            .iter()
            .filter(|(&(i, j), _)| i == j)
            .map(|(_, b)| b.diagonal().sum())
            .sum()
    }

    /// Largest entry modulus of the difference; compares by value, so it is 0
    /// exactly when the matrices are equal entrywise.
    pub fn max_entry_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other, "compare")?;
        let zero = CBlock::zeros(self.d, self.d);
        let mut worst = 0.0f64;
        for (&(i, j), b) in &self.blocks {
            let c = other.blocks.get(&(i, j)).unwrap_or(&zero);
            worst = worst.max(block_max_abs(&(b - c)));
        }
        for (&(i, j), c) in &other.blocks {
            if !self.blocks.contains_key(&(i, j)) {
                worst = worst.max(block_max_abs(c));
            }
        }
        Ok(worst)
    }
}

pub fn block_max_abs(b: &CBlock) -> f64 {
    b.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Operator norm of a single block.
pub fn block_norm(b: &CBlock) -> f64 {
    if block_max_abs(b) == 0.0 {
        return 0.0;
    }
    max_singular_value(b)
}

fn max_singular_value(m: &CBlock) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// The constant `N = sup_x |B_R(x)|`: by the Schur test, any matrix over this
/// space with propagation at most R has `||m|| <= N * sup ||b_{x,y}||`.
pub fn schur_constant(space: &FiniteMetricSpace, r: f64) -> usize {
    (0..space.n())
        .map(|i| space.ball_indices(i, r).len())
        .max()
        .unwrap_or(0)
}

/// The pushforward along f: the matrix re-placed along the graph embedding
/// `x -> (f(x), x)`. The result is indexed by the product of f's target with
/// the whole original index set; propagation is measured in the target only.
pub fn pushforward(f: &PointMap, m: &BlockMatrix) -> Result<BlockMatrix> {
    if m.index().outer() != f.source() {
        return Err(Error::structural(
            "pushforward: matrix index does not sit over the map's source",
        ));
    }
    let new_index = IndexSpace::product(f.target().clone(), m.index());
    let n_inner = m.index().n_points();
    debug_assert_eq!(new_index.inner_size(), n_inner);
    let mut out = BlockMatrix::zero(new_index, m.block_dim());
    for (&(i, j), b) in m.blocks() {
        let (i, j) = (i as usize, j as usize);
        let yi = f.apply_idx(m.index().outer_of(i));
        let yj = f.apply_idx(m.index().outer_of(j));
        out.set_block(yi * n_inner + i, yj * n_inner + j, b.clone())?;
    }
    Ok(out)
}

/// Places a single block at the diagonal position (x0, x0).
pub fn corner_embed(index: Arc<IndexSpace>, x0: usize, b: CBlock) -> Result<BlockMatrix> {
    if x0 >= index.n_points() {
        return Err(Error::UnknownPoint(format!("index point {x0}")));
    }
    if b.nrows() != b.ncols() {
        return Err(Error::structural("corner block must be square"));
    }
    let d = b.nrows();
    let mut out = BlockMatrix::zero(index, d);
    out.set_block(x0, x0, b)?;
    Ok(out)
}

/// Conjugation by the permutation induced by a bijection of index points:
/// a *-isomorphism, preserving norm and spectrum.
pub fn reindex(m: &BlockMatrix, target: Arc<IndexSpace>, map: &[usize]) -> Result<BlockMatrix> {
    if map.len() != m.index().n_points() || target.n_points() != m.index().n_points() {
        return Err(Error::structural("reindex requires a bijection"));
    }
    let mut seen = vec![false; target.n_points()];
    for &t in map {
        if t >= target.n_points() || seen[t] {
            return Err(Error::structural("reindex map is not a bijection"));
        }
        seen[t] = true;
    }
    embed(m, target, map)
}

/// Conjugation by the isometry induced by an injection of index points.
pub fn embed(m: &BlockMatrix, target: Arc<IndexSpace>, map: &[usize]) -> Result<BlockMatrix> {
    if map.len() != m.index().n_points() {
        return Err(Error::structural("embedding must cover the source index"));
    }
    let mut seen = vec![false; target.n_points()];
    for &t in map {
        if t >= target.n_points() || seen[t] {
            return Err(Error::structural("embedding is not injective"));
        }
        seen[t] = true;
    }
    let mut out = BlockMatrix::zero(target, m.block_dim());
    for (&(i, j), b) in m.blocks() {
        out.set_block(map[i as usize], map[j as usize], b.clone())?;
    }
    Ok(out)
}

/// Complex block with the given real entries, for tests and small examples.
pub fn real_block(rows: usize, cols: usize, entries: &[f64]) -> CBlock {
    CBlock::from_row_slice(
        rows,
        cols,
        &entries
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect::<Vec<_>>(),
    )
}
