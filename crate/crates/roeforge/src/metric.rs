//! Finite discrete metric spaces: validation, balls, growth profiles.
//!
//! A space is a list of distinct labels together with a square distance
//! matrix in label order. Metric axioms are checked exactly (zero tolerance):
//! inputs are user-supplied constants, not computed quantities. Balls are
//! closed, `{ y : dist(x,y) <= R }`, one convention throughout.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::label::Label;

/// A finite metric space with a fixed enumeration order (the label order).
#[derive(Clone, Debug)]
pub struct FiniteMetricSpace {
    labels: Vec<Label>,
    index: HashMap<Label, usize>,
    dist: Vec<f64>,
    n: usize,
}

impl PartialEq for FiniteMetricSpace {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.dist == other.dist
    }
}

impl FiniteMetricSpace {
    /// Builds a space from labels and distance rows. Structural requirements
    /// (distinct labels, square finite matrix) are enforced here; the metric
    /// axioms themselves are the business of [`FiniteMetricSpace::validate`].
    pub fn new(labels: Vec<Label>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::structural("a space needs at least one point"));
        }
        if rows.len() != n {
            return Err(Error::structural(format!(
                "distance matrix has {} rows for {} labels",
                rows.len(),
                n
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::structural(format!("duplicate label `{l}`")));
            }
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::structural(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::structural(format!(
                        "non-finite distance in row {i}"
                    )));
                }
                dist.push(v);
            }
        }
        Ok(FiniteMetricSpace {
            labels,
            index,
            dist,
            n,
        })
    }

    /// Convenience constructor: the n-point unit line `0..n-1`, dist |i-j|.
    pub fn line(n: usize) -> Arc<Self> {
        let labels: Vec<Label> = (0..n as i64).map(Label::Int).collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        Arc::new(Self::new(labels, rows).expect("line metric is structurally valid"))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &Label {
        &self.labels[i]
    }

    pub fn index_of(&self, l: &Label) -> Option<usize> {
        self.index.get(l).copied()
    }

    pub fn require_index(&self, l: &Label) -> Result<usize> {
        self.index_of(l)
            .ok_or_else(|| Error::UnknownPoint(l.to_string()))
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn dist_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.dist(i, j)).collect())
            .collect()
    }

    /// Checks every metric axiom exactly and reports each violation with its
    /// witnessing pair or triple.
    pub fn validate(&self) -> MetricValidation {
        let mut violations = Vec::new();
        let n = self.n;
        for i in 0..n {
            if self.dist(i, i) != 0.0 {
                violations.push(MetricViolation::NonzeroDiagonal {
                    point: self.labels[i].clone(),
                    value: self.dist(i, i),
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let dij = self.dist(i, j);
                let dji = self.dist(j, i);
                if dij != dji {
                    violations.push(MetricViolation::Asymmetric {
                        pair: (self.labels[i].clone(), self.labels[j].clone()),
                        forward: dij,
                        backward: dji,
                    });
                }
                if dij <= 0.0 {
                    violations.push(MetricViolation::NonpositiveOffDiagonal {
                        pair: (self.labels[i].clone(), self.labels[j].clone()),
                        value: dij,
                    });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let direct = self.dist(i, k);
                    let via = self.dist(i, j) + self.dist(j, k);
                    if direct > via {
                        violations.push(MetricViolation::Triangle {
                            triple: (
                                self.labels[i].clone(),
                                self.labels[j].clone(),
                                self.labels[k].clone(),
                            ),
                            direct,
                            via,
                        });
                    }
                }
            }
        }
        let min_gap = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| self.dist(i, j))
            .fold(None, |acc: Option<f64>, d| {
                Some(acc.map_or(d, |m| m.min(d)))
            });
        MetricValidation {
            violations,
            min_gap,
        }
    }

    /// Closed ball `{ y : dist(x,y) <= r }`, in enumeration order.
    pub fn ball(&self, x: &Label, r: f64) -> Result<Vec<Label>> {
        let i = self.require_index(x)?;
        Ok(self
            .ball_indices(i, r)
            .into_iter()
            .map(|j| self.labels[j].clone())
            .collect())
    }

    pub fn ball_indices(&self, i: usize, r: f64) -> Vec<usize> {
        (0..self.n).filter(|&j| self.dist(i, j) <= r).collect()
    }

    /// All distinct distance values occurring in the matrix, ascending.
    pub fn distinct_distances(&self) -> Vec<f64> {
        let mut ds: Vec<f64> = self.dist.clone();
        ds.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
        ds.dedup();
        ds
    }

    /// For each occurring distance value R, the largest closed-ball
    /// cardinality `sup_x |B_R(x)|`.
    pub fn growth_profile(&self) -> Vec<(f64, usize)> {
        self.distinct_distances()
            .into_iter()
            .map(|r| {
                let sup = (0..self.n)
                    .map(|i| self.ball_indices(i, r).len())
                    .max()
                    .unwrap_or(0);
                (r, sup)
            })
            .collect()
    }
}

/// Result of the exact metric-axiom check.
#[derive(Clone, Debug, Serialize)]
pub struct MetricValidation {
    pub violations: Vec<MetricViolation>,
    /// Smallest off-diagonal distance: the discreteness gap. `None` for a
    /// single-point space.
    pub min_gap: Option<f64>,
}

impl MetricValidation {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricViolation {
    Asymmetric {
        pair: (Label, Label),
        forward: f64,
        backward: f64,
    },
    NonzeroDiagonal {
        point: Label,
        value: f64,
    },
    NonpositiveOffDiagonal {
        pair: (Label, Label),
        value: f64,
    },
    Triangle {
        triple: (Label, Label, Label),
        direct: f64,
        via: f64,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: i64) -> Vec<Label> {
        (0..n).map(Label::Int).collect()
    }

    #[test]
    fn three_point_line_passes() {
        let s = FiniteMetricSpace::line(3);
        assert!(s.validate().passed());
        assert_eq!(s.validate().min_gap, Some(1.0));
    }

    #[test]
    fn asymmetric_two_points_fails_with_witness() {
        let s =
            FiniteMetricSpace::new(labels(2), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let v = s.validate();
        assert!(!v.passed());
        assert!(v.violations.iter().any(|w| matches!(
            w,
            MetricViolation::Asymmetric { pair: (Label::Int(0), Label::Int(1)), forward, backward }
                if *forward == 1.0 && *backward == 2.0
        )));
    }

    #[test]
    fn triangle_violation_witnessed() {
        // dist(0,2)=5 but dist(0,1)+dist(1,2)=2: hand check 5 > 1+1
        let s = FiniteMetricSpace::new(
            labels(3),
            vec![
                vec![0.0, 1.0, 5.0],
                vec![1.0, 0.0, 1.0],
                vec![5.0, 1.0, 0.0],
            ],
        )
        .unwrap();
        let v = s.validate();
        assert!(!v.passed());
        let found = v.violations.iter().any(|w| match w {
            MetricViolation::Triangle { triple, direct, via } => {
                *triple == (Label::Int(0), Label::Int(1), Label::Int(2))
                    && *direct == 5.0
                    && *via == 2.0
            }
            _ => false,
        });
        assert!(found, "expected the (0,1,2) witness, got {:?}", v.violations);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let err = FiniteMetricSpace::new(labels(2), vec![vec![0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn balls_on_the_line() {
        let s = FiniteMetricSpace::line(3);
        assert_eq!(
            s.ball(&Label::Int(1), 1.0).unwrap(),
            labels(3) // ball(1,1) = {0,1,2}
        );
        assert_eq!(s.ball(&Label::Int(0), 0.0).unwrap(), vec![Label::Int(0)]);
        assert_eq!(
            s.ball(&Label::Int(0), 1.5).unwrap(),
            vec![Label::Int(0), Label::Int(1)]
        );
        assert!(s.ball(&Label::Int(7), 1.0).is_err());
    }

    #[test]
    fn growth_profile_line_and_single_point() {
        let s = FiniteMetricSpace::new(labels(1), vec![vec![0.0]]).unwrap();
        assert_eq!(s.growth_profile(), vec![(0.0, 1)]);

        let line = FiniteMetricSpace::line(3);
        assert_eq!(
            line.growth_profile(),
            vec![(0.0, 1), (1.0, 3), (2.0, 3)]
        );
    }

    #[test]
    fn growth_profile_grid_by_enumeration() {
        // 2x2 grid, l1 metric; oracle: enumerate every ball by hand below
        let pts: [(f64, f64); 4] = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)];
        let rows: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| {
                pts.iter()
                    .map(|b| (a.0 - b.0).abs() + (a.1 - b.1).abs())
                    .collect()
            })
            .collect();
        let s = FiniteMetricSpace::new(labels(4), rows.clone()).unwrap();
        assert!(s.validate().passed());

        // independent oracle: brute-force ball sizes straight off the rows
        let brute = |r: f64| -> usize {
            (0..4)
                .map(|i| (0..4).filter(|&j| rows[i][j] <= r).count())
                .max()
                .unwrap()
        };
        assert_eq!(brute(0.0), 1);
        assert_eq!(brute(1.0), 3);
        assert_eq!(brute(2.0), 4);
        assert_eq!(s.growth_profile(), vec![(0.0, 1), (1.0, 3), (2.0, 4)]);
    }

    #[test]
    fn growth_profile_is_monotone_and_tops_out() {
        let s = FiniteMetricSpace::line(7);
        let gp = s.growth_profile();
        assert!(gp.windows(2).all(|w| w[0].1 <= w[1].1));
        assert_eq!(gp.last().unwrap().1, 7);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn symmetric_space(off_diag: &[f64]) -> FiniteMetricSpace {
            // 4 points, 6 off-diagonal entries
            let mut rows = vec![vec![0.0; 4]; 4];
            let mut k = 0;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    rows[i][j] = off_diag[k];
                    rows[j][i] = off_diag[k];
                    k += 1;
                }
            }
            FiniteMetricSpace::new(labels(4), rows).unwrap()
        }

        proptest! {
            // every reported triangle witness violates the inequality when
            // re-checked from the raw matrix, and silence means no violation
            #[test]
            fn triangle_witnesses_recheck(off in proptest::collection::vec(0.5f64..4.0, 6)) {
                let s = symmetric_space(&off);
                let v = s.validate();
                let reported: Vec<_> = v
                    .violations
                    .iter()
                    .filter_map(|w| match w {
                        MetricViolation::Triangle { triple, direct, via } => {
                            Some((triple.clone(), *direct, *via))
                        }
                        _ => None,
                    })
                    .collect();
                for (triple, direct, via) in &reported {
                    let i = s.index_of(&triple.0).unwrap();
                    let j = s.index_of(&triple.1).unwrap();
                    let k = s.index_of(&triple.2).unwrap();
                    prop_assert_eq!(s.dist(i, k), *direct);
                    prop_assert_eq!(s.dist(i, j) + s.dist(j, k), *via);
                    prop_assert!(direct > via);
                }
                if reported.is_empty() {
                    for i in 0..4 {
                        for j in 0..4 {
                            for k in 0..4 {
                                if i != j && j != k && i != k {
                                    prop_assert!(s.dist(i, k) <= s.dist(i, j) + s.dist(j, k));
                                }
                            }
                        }
                    }
                }
            }

            // balls grow with the radius, over all points and occurring radii
            #[test]
            fn balls_are_nested(off in proptest::collection::vec(0.5f64..4.0, 6)) {
                let s = symmetric_space(&off);
                let radii = s.distinct_distances();
                for x in 0..4 {
                    for w in radii.windows(2) {
                        let small = s.ball_indices(x, w[0]);
                        let big = s.ball_indices(x, w[1]);
                        prop_assert!(small.iter().all(|i| big.contains(i)));
                    }
                }
            }
        }
    }
}
