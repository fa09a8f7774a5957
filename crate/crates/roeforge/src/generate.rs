//! Seeded random instance generation. The same seed and config always yield
//! the same instances; every generated space passes the exact metric
//! validator and every generated map is total.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cylinder::{build_cylinder, CoarseHomotopyData};
use crate::error::{Error, Result};
use crate::index::IndexSpace;
use crate::label::Label;
use crate::maps::PointMap;
use crate::matrix::{BlockMatrix, CBlock};
use crate::metric::FiniteMetricSpace;
use crate::rotation::Involution;
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Line,
    Grid,
    Tree,
    PerturbedLattice,
}

impl SpaceKind {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "line" => Ok(SpaceKind::Line),
            "grid" => Ok(SpaceKind::Grid),
            "tree" => Ok(SpaceKind::Tree),
            "perturbed_lattice" => Ok(SpaceKind::PerturbedLattice),
            other => Err(Error::structural(format!("unknown generator `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    RandomCoarse,
    Shift,
    Collapse,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SpaceConfig {
    pub kinds: Vec<SpaceKind>,
    pub max_points: usize,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig {
            kinds: vec![
                SpaceKind::Line,
                SpaceKind::Grid,
                SpaceKind::Tree,
                SpaceKind::PerturbedLattice,
            ],
            max_points: 30,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct MapConfig {
    pub kinds: Vec<MapKind>,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            kinds: vec![MapKind::RandomCoarse, MapKind::Shift, MapKind::Collapse],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct MatrixConfig {
    /// Probability that an index pair carries a block.
    pub density: f64,
    pub max_block_dim: usize,
    /// Optional cap on generated propagation.
    pub propagation_cap: Option<f64>,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        MatrixConfig {
            density: 0.3,
            max_block_dim: 4,
            propagation_cap: None,
        }
    }
}

/// Samples per suite section; the defaults are the sizes the acceptance
/// criteria pin.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleCounts {
    pub metric_spaces: usize,
    pub propagation_pairs: usize,
    pub norm_matrices: usize,
    pub pushforward_triples: usize,
    pub rotation_involutions: usize,
    pub closeness_triples: usize,
    pub functoriality_tuples: usize,
    pub identity_samples: usize,
    pub homotopy_instances: usize,
}

impl Default for SampleCounts {
    fn default() -> Self {
        SampleCounts {
            metric_spaces: 200,
            propagation_pairs: 500,
            norm_matrices: 500,
            pushforward_triples: 300,
            rotation_involutions: 100,
            closeness_triples: 200,
            functoriality_tuples: 100,
            identity_samples: 100,
            homotopy_instances: 50,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Entrywise identity checks.
    pub entry: f64,
    /// Operator-norm equality checks, relative to max(1, scale).
    pub isometry: f64,
    /// Slack allowed against the Schur bound, relative to max(1, bound).
    pub schur: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            entry: 1e-12,
            isometry: 1e-9,
            schur: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub spaces: SpaceConfig,
    pub maps: MapConfig,
    pub matrices: MatrixConfig,
    pub samples: SampleCounts,
    /// Number of equispaced t samples on [0,1], endpoints included.
    pub t_grid: usize,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 7,
            spaces: SpaceConfig::default(),
            maps: MapConfig::default(),
            matrices: MatrixConfig::default(),
            samples: SampleCounts::default(),
            t_grid: 21,
            tolerances: Tolerances::default(),
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Deterministic generator stream for one suite section.
pub struct InstanceGenerator {
    rng: ChaCha8Rng,
    cfg: SuiteConfig,
}

impl InstanceGenerator {
    pub fn new(cfg: &SuiteConfig, section: &str) -> Self {
        InstanceGenerator {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ fnv1a(section)),
            cfg: cfg.clone(),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn space(&mut self, min_points: usize, max_points: usize) -> Arc<FiniteMetricSpace> {
        let kind = *self
            .cfg
            .spaces
            .kinds
            .choose(&mut self.rng)
            .expect("space kinds configured");
        self.space_of_kind(kind, min_points, max_points)
    }

    pub fn space_of_kind(
        &mut self,
        kind: SpaceKind,
        min_points: usize,
        max_points: usize,
    ) -> Arc<FiniteMetricSpace> {
        let max = max_points.min(self.cfg.spaces.max_points).max(min_points);
        let n = self.rng.gen_range(min_points..=max);
        match kind {
            SpaceKind::Line => FiniteMetricSpace::line(n),
            SpaceKind::Grid => self.grid(n),
            SpaceKind::Tree => self.tree(n),
            SpaceKind::PerturbedLattice => self.perturbed_lattice(n),
        }
    }

    fn grid(&mut self, n: usize) -> Arc<FiniteMetricSpace> {
        let w = self.rng.gen_range(1..=n);
        let h = n / w;
        let (w, h) = if h == 0 { (n, 1) } else { (w, h) };
        let pts: Vec<(i64, i64)> = (0..w * h).map(|i| ((i % w) as i64, (i / w) as i64)).collect();
        let labels: Vec<Label> = (0..pts.len() as i64).map(Label::Int).collect();
        let rows: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| {
                pts.iter()
                    .map(|b| ((a.0 - b.0).abs() + (a.1 - b.1).abs()) as f64)
                    .collect()
            })
            .collect();
        Arc::new(FiniteMetricSpace::new(labels, rows).expect("grid metric is valid"))
    }

    fn tree(&mut self, n: usize) -> Arc<FiniteMetricSpace> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 1..n {
            let parent = self.rng.gen_range(0..i);
            adj[i].push(parent);
            adj[parent].push(i);
        }
        let mut rows = vec![vec![0.0; n]; n];
        for start in 0..n {
            // BFS graph distances
            let mut seen = vec![usize::MAX; n];
            seen[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if seen[w] == usize::MAX {
                        seen[w] = seen[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            for (j, &d) in seen.iter().enumerate() {
                rows[start][j] = d as f64;
            }
        }
        let labels: Vec<Label> = (0..n as i64).map(Label::Int).collect();
        Arc::new(FiniteMetricSpace::new(labels, rows).expect("tree metric is valid"))
    }

    /// Lattice positions jittered by dyadic offsets, l1 distances. Dyadic
    /// coordinates keep every distance sum exact in doubles, so the triangle
    /// inequality survives the zero-tolerance validator.
    fn perturbed_lattice(&mut self, n: usize) -> Arc<FiniteMetricSpace> {
        let side = (n as f64).sqrt().ceil() as usize;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let jx = self.rng.gen_range(-256i32..=256) as f64 / 1024.0;
                let jy = self.rng.gen_range(-256i32..=256) as f64 / 1024.0;
                ((i % side) as f64 + jx, (i / side) as f64 + jy)
            })
            .collect();
        let labels: Vec<Label> = (0..n as i64).map(Label::Int).collect();
        let rows: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| {
                pts.iter()
                    .map(|b| (a.0 - b.0).abs() + (a.1 - b.1).abs())
                    .collect()
            })
            .collect();
        Arc::new(FiniteMetricSpace::new(labels, rows).expect("lattice metric is valid"))
    }

    pub fn map(
        &mut self,
        source: &Arc<FiniteMetricSpace>,
        target: &Arc<FiniteMetricSpace>,
    ) -> PointMap {
        let kind = *self
            .cfg
            .maps
            .kinds
            .choose(&mut self.rng)
            .expect("map kinds configured");
        let n = source.n();
        let ny = target.n();
        let values: Vec<usize> = match kind {
            MapKind::RandomCoarse => (0..n).map(|_| self.rng.gen_range(0..ny)).collect(),
            MapKind::Shift => {
                let k = self.rng.gen_range(0..=3usize);
                (0..n).map(|i| (i + k).min(ny - 1)).collect()
            }
            MapKind::Collapse => {
                let k = self.rng.gen_range(2..=3usize);
                (0..n).map(|i| (i / k).min(ny - 1)).collect()
            }
        };
        PointMap::from_indices(source.clone(), target.clone(), values)
            .expect("generated maps are total")
    }

    pub fn block_dim(&mut self) -> usize {
        self.rng.gen_range(1..=self.cfg.matrices.max_block_dim)
    }

    pub fn block(&mut self, d: usize) -> CBlock {
        CBlock::from_fn(d, d, |_, _| {
            Complex64::new(
                self.rng.gen_range(-1.0..1.0),
                self.rng.gen_range(-1.0..1.0),
            )
        })
    }

    pub fn matrix(&mut self, index: &Arc<IndexSpace>, d: usize) -> BlockMatrix {
        let n = index.n_points();
        let mut m = BlockMatrix::zero(index.clone(), d);
        for i in 0..n {
            for j in 0..n {
                if let Some(cap) = self.cfg.matrices.propagation_cap {
                    if index.pdist(i, j) > cap {
                        continue;
                    }
                }
                if self.rng.gen::<f64>() < self.cfg.matrices.density {
                    let b = self.block(d);
                    m.set_block(i, j, b).expect("generated block fits");
                }
            }
        }
        m
    }

    /// Random involution moving at most `max_moved` points.
    pub fn involution(&mut self, index: &Arc<IndexSpace>, max_moved: usize) -> Involution {
        let n = index.n_points();
        let mut points: Vec<usize> = (0..n).collect();
        points.shuffle(&mut self.rng);
        let pairs_avail = (n / 2).min(max_moved / 2);
        let n_pairs = if pairs_avail == 0 {
            0
        } else {
            self.rng.gen_range(0..=pairs_avail)
        };
        let pairs: Vec<(usize, usize)> = (0..n_pairs)
            .map(|k| (points[2 * k], points[2 * k + 1]))
            .collect();
        Involution::from_pairs(index.clone(), &pairs).expect("disjoint pairs")
    }

    /// A coarse homotopy built from a random bottom face and a random walk
    /// upward: each level moves every image point within a small ball.
    pub fn homotopy(&mut self, max_base: usize, max_levels: u32) -> CoarseHomotopyData {
        let base = self.space(2, max_base);
        let target = self.space(2, max_base);
        let p: Vec<i64> = (0..base.n())
            .map(|_| self.rng.gen_range(0..max_levels as i64))
            .collect();
        let cyl = build_cylinder(base.clone(), &p).expect("non-negative profile");

        let radii = target.distinct_distances();
        let small = radii.get(1).copied().unwrap_or(0.0);
        let step = radii.get(2).copied().unwrap_or(small);

        let mut h_values = vec![0usize; cyl.space().n()];
        for x in 0..base.n() {
            let mut current = self.rng.gen_range(0..target.n());
            for nlevel in 1..=(cyl.heights()[x] + 1) {
                if nlevel > 1 {
                    let r = if self.rng.gen::<bool>() { small } else { step };
                    let ball = target.ball_indices(current, r);
                    current = *ball.choose(&mut self.rng).expect("ball contains center");
                }
                let i = cyl.index_of(x, nlevel).expect("cylinder point exists");
                h_values[i] = current;
            }
        }
        let h = PointMap::from_indices(cyl.space().clone(), target, h_values)
            .expect("H is total");
        CoarseHomotopyData::from_h(cyl, h).expect("faces restrict to endpoints")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instances() {
        let cfg = SuiteConfig::default();
        let mut a = InstanceGenerator::new(&cfg, "test");
        let mut b = InstanceGenerator::new(&cfg, "test");
        for _ in 0..5 {
            let s1 = a.space(2, 12);
            let s2 = b.space(2, 12);
            assert_eq!(*s1, *s2);
            let m1 = a.matrix(&IndexSpace::from_space(s1.clone()), 2);
            let m2 = b.matrix(&IndexSpace::from_space(s2), 2);
            assert_eq!(m1.max_entry_diff(&m2).unwrap(), 0.0);
        }
    }

    #[test]
    fn generated_spaces_validate_exactly() {
        let cfg = SuiteConfig::default();
        let mut g = InstanceGenerator::new(&cfg, "spaces");
        for kind in [
            SpaceKind::Line,
            SpaceKind::Grid,
            SpaceKind::Tree,
            SpaceKind::PerturbedLattice,
        ] {
            for _ in 0..10 {
                let s = g.space_of_kind(kind, 1, 20);
                let v = s.validate();
                assert!(v.passed(), "{kind:?}: {:?}", v.violations);
            }
        }
    }

    #[test]
    fn unknown_generator_name_errors() {
        assert!(SpaceKind::from_name("moebius").is_err());
        assert_eq!(SpaceKind::from_name("line").unwrap(), SpaceKind::Line);
    }

    #[test]
    fn generated_homotopies_are_valid() {
        let cfg = SuiteConfig::default();
        let mut g = InstanceGenerator::new(&cfg, "homotopy");
        for _ in 0..5 {
            let data = g.homotopy(8, 6);
            // constructor enforced the face conditions; sanity-check one
            let (i0, _) = data.cylinder.inclusions();
            let f0 = crate::maps::compose(&data.h, &i0).unwrap();
            assert_eq!(f0, data.f);
        }
    }

    #[test]
    fn involutions_respect_moved_bound() {
        let cfg = SuiteConfig::default();
        let mut g = InstanceGenerator::new(&cfg, "inv");
        let ix = IndexSpace::from_space(FiniteMetricSpace::line(20));
        for _ in 0..20 {
            let inv = g.involution(&ix, 12);
            assert!(inv.moved_points().len() <= 12);
        }
    }
}
