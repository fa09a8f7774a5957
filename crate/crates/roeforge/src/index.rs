//! Index sets for block matrices: either a metric space, or a product of
//! label sets whose propagation metric is the metric of the outermost factor
//! only. The remaining factors are internal coordinates; the pushforward
//! places the source index inside the entry, not in the propagation metric.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::metric::FiniteMetricSpace;

/// An enumeration of index points with a designated propagation metric.
/// Points of a product are ordered with the outer factor slowest, which is
/// lexicographic in (outer enumeration, inner enumeration).
#[derive(Debug)]
pub struct IndexSpace {
    factors: Vec<Arc<FiniteMetricSpace>>,
    sizes: Vec<usize>,
    n: usize,
}

impl PartialEq for IndexSpace {
    fn eq(&self, other: &Self) -> bool {
        self.factors.len() == other.factors.len()
            && self
                .factors
                .iter()
                .zip(&other.factors)
                .all(|(a, b)| Arc::ptr_eq(a, b) || a == b)
    }
}

impl IndexSpace {
    pub fn from_space(space: Arc<FiniteMetricSpace>) -> Arc<Self> {
        let n = space.n();
        Arc::new(IndexSpace {
            factors: vec![space],
            sizes: vec![n],
            n,
        })
    }

    /// Prepends an outer factor; the result's propagation metric is the outer
    /// space's metric.
    pub fn product(outer: Arc<FiniteMetricSpace>, inner: &Arc<IndexSpace>) -> Arc<Self> {
        let mut factors = Vec::with_capacity(1 + inner.factors.len());
        factors.push(outer.clone());
        factors.extend(inner.factors.iter().cloned());
        let mut sizes = Vec::with_capacity(factors.len());
        sizes.push(outer.n());
        sizes.extend(inner.sizes.iter().copied());
        let n = outer.n() * inner.n;
        Arc::new(IndexSpace { factors, sizes, n })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[Arc<FiniteMetricSpace>] {
        &self.factors
    }

    /// The space carrying the propagation metric.
    pub fn outer(&self) -> &Arc<FiniteMetricSpace> {
        &self.factors[0]
    }

    /// Number of points sharing each outer coordinate.
    pub fn inner_size(&self) -> usize {
        self.n / self.sizes[0]
    }

    #[inline]
    pub fn outer_of(&self, i: usize) -> usize {
        i / self.inner_size()
    }

    #[inline]
    pub fn inner_of(&self, i: usize) -> usize {
        i % self.inner_size()
    }

    /// Point built from an outer coordinate and a point of the inner block.
    #[inline]
    pub fn compose_point(&self, outer: usize, inner: usize) -> usize {
        outer * self.inner_size() + inner
    }

    /// Propagation distance: the outer factor's metric on outer coordinates.
    #[inline]
    pub fn pdist(&self, i: usize, j: usize) -> f64 {
        self.factors[0].dist(self.outer_of(i), self.outer_of(j))
    }

    /// True when this is a plain metric space, no product structure.
    pub fn is_plain(&self) -> bool {
        self.factors.len() == 1
    }

    pub fn as_plain(&self) -> Option<&Arc<FiniteMetricSpace>> {
        if self.is_plain() {
            Some(&self.factors[0])
        } else {
            None
        }
    }

    /// Per-factor coordinates of a point, outer first.
    pub fn coords(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for k in (0..self.factors.len()).rev() {
            out[k] = i % self.sizes[k];
            i /= self.sizes[k];
        }
        out
    }

    /// Display form of a point: the label for plain spaces, `(a|b|c)` for
    /// products.
    pub fn display_point(&self, i: usize) -> String {
        if self.is_plain() {
            return self.factors[0].label(i).to_string();
        }
        let mut out = String::from("(");
        for (k, c) in self.coords(i).into_iter().enumerate() {
            if k > 0 {
                out.push('|');
            }
            let _ = write!(out, "{}", self.factors[k].label(c));
        }
        out.push(')');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_enumeration_is_outer_major() {
        let y = FiniteMetricSpace::line(2);
        let x = FiniteMetricSpace::line(3);
        let ix = IndexSpace::from_space(x);
        let yx = IndexSpace::product(y, &ix);
        assert_eq!(yx.n_points(), 6);
        assert_eq!(yx.outer_of(0), 0);
        assert_eq!(yx.outer_of(3), 1);
        assert_eq!(yx.inner_of(4), 1);
        assert_eq!(yx.compose_point(1, 2), 5);
        assert_eq!(yx.coords(5), vec![1, 2]);
        assert_eq!(yx.display_point(5), "(1|2)");
    }

    #[test]
    fn pdist_sees_only_the_outer_factor() {
        let y = FiniteMetricSpace::line(2);
        let x = FiniteMetricSpace::line(3);
        let yx = IndexSpace::product(y, &IndexSpace::from_space(x));
        // same outer coordinate, different inner: distance 0
        assert_eq!(yx.pdist(0, 2), 0.0);
        // different outer coordinate: the Y metric
        assert_eq!(yx.pdist(0, 3), 1.0);
        assert_eq!(yx.pdist(2, 5), 1.0);
    }

    #[test]
    fn triple_products_nest() {
        let z = FiniteMetricSpace::line(2);
        let y = FiniteMetricSpace::line(2);
        let x = FiniteMetricSpace::line(2);
        let yx = IndexSpace::product(y, &IndexSpace::from_space(x));
        let zyx = IndexSpace::product(z, &yx);
        assert_eq!(zyx.n_points(), 8);
        assert_eq!(zyx.coords(7), vec![1, 1, 1]);
        assert_eq!(zyx.coords(5), vec![1, 0, 1]);
        assert_eq!(zyx.display_point(5), "(1|0|1)");
    }
}
