//! Maps between finite metric spaces with their computed coarse data:
//! expansion moduli, closeness distance, fiber profiles, family moduli.
//!
//! Every total map between finite spaces is proper and bornologous; the point
//! of these operations is to quantify the constants. Moduli are tabulated at
//! the occurring distance values (finitely many), which is exact and
//! sufficient for every downstream bound.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::label::Label;
use crate::metric::FiniteMetricSpace;

/// A total map between the point sets of two spaces, stored by index.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMap {
    source: Arc<FiniteMetricSpace>,
    target: Arc<FiniteMetricSpace>,
    values: Vec<usize>,
}

impl PointMap {
    /// Builds a map from target labels listed in source-label order.
    pub fn new(
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
        images: &[Label],
    ) -> Result<Self> {
        if images.len() != source.n() {
            return Err(Error::structural(format!(
                "map lists {} values for {} source points",
                images.len(),
                source.n()
            )));
        }
        let values = images
            .iter()
            .map(|l| target.require_index(l))
            .collect::<Result<Vec<_>>>()?;
        Ok(PointMap {
            source,
            target,
            values,
        })
    }

    pub fn from_indices(
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
        values: Vec<usize>,
    ) -> Result<Self> {
        if values.len() != source.n() {
            return Err(Error::structural("value list does not cover the source"));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= target.n()) {
            return Err(Error::structural(format!(
                "image index {bad} outside the target"
            )));
        }
        Ok(PointMap {
            source,
            target,
            values,
        })
    }

    pub fn identity(space: Arc<FiniteMetricSpace>) -> Self {
        let values = (0..space.n()).collect();
        PointMap {
            source: space.clone(),
            target: space,
            values,
        }
    }

    pub fn constant(
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
        y: &Label,
    ) -> Result<Self> {
        let j = target.require_index(y)?;
        let values = vec![j; source.n()];
        Ok(PointMap {
            source,
            target,
            values,
        })
    }

    pub fn source(&self) -> &Arc<FiniteMetricSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteMetricSpace> {
        &self.target
    }

    #[inline]
    pub fn apply_idx(&self, i: usize) -> usize {
        self.values[i]
    }

    pub fn apply(&self, x: &Label) -> Result<&Label> {
        let i = self.source.require_index(x)?;
        Ok(self.target.label(self.values[i]))
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn image_labels(&self) -> Vec<Label> {
        self.values
            .iter()
            .map(|&j| self.target.label(j).clone())
            .collect()
    }
}

/// Tabulated expansion bound: for each occurring source distance N, the exact
/// sup of image distances over pairs at source distance <= N.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionModulus {
    /// (threshold N, bound M) pairs, ascending in N; monotone in M.
    pub table: Vec<(f64, f64)>,
}

impl ExpansionModulus {
    /// Evaluates the modulus at an arbitrary radius:
    /// `sup { dist(f(x),f(y)) : dist(x,y) <= r }`.
    pub fn eval(&self, r: f64) -> f64 {
        self.table
            .iter()
            .take_while(|(n, _)| *n <= r)
            .last()
            .map(|(_, m)| *m)
            .unwrap_or(0.0)
    }

    pub fn max_bound(&self) -> f64 {
        self.table.last().map(|(_, m)| *m).unwrap_or(0.0)
    }
}

/// Exact expansion modulus of a map, tabulated over all occurring source
/// distances (0 included).
pub fn expansion_modulus(f: &PointMap) -> ExpansionModulus {
    let src = f.source();
    let tgt = f.target();
    let n = src.n();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let dn = src.dist(i, j);
            let dm = tgt.dist(f.apply_idx(i), f.apply_idx(j));
            pairs.push((dn, dm));
        }
    }
    pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let mut table = Vec::new();
    let mut running = 0.0f64;
    for (dn, dm) in pairs {
        running = running.max(dm);
        match table.last_mut() {
            Some((n0, m0)) if *n0 == dn => *m0 = running,
            _ => table.push((dn, running)),
        }
    }
    ExpansionModulus { table }
}

/// `(max fiber cardinality, max fiber diameter)`: the finite-scale surrogate
/// for properness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiberProfile {
    pub max_cardinality: usize,
    pub max_diameter: f64,
}

pub fn fiber_profile(f: &PointMap) -> FiberProfile {
    let src = f.source();
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); f.target().n()];
    for i in 0..src.n() {
        fibers[f.apply_idx(i)].push(i);
    }
    let mut max_card = 0;
    let mut max_diam = 0.0f64;
    for fiber in &fibers {
        max_card = max_card.max(fiber.len());
        for (a, &i) in fiber.iter().enumerate() {
            for &j in &fiber[a + 1..] {
                max_diam = max_diam.max(src.dist(i, j));
            }
        }
    }
    FiberProfile {
        max_cardinality: max_card,
        max_diameter: max_diam,
    }
}

/// `sup_x dist(f(x), g(x))`; requires equal source and target.
pub fn closeness_distance(f: &PointMap, g: &PointMap) -> Result<f64> {
    if f.source() != g.source() || f.target() != g.target() {
        return Err(Error::structural(
            "closeness needs maps with the same source and target",
        ));
    }
    let tgt = f.target();
    Ok((0..f.source().n())
        .map(|i| tgt.dist(f.apply_idx(i), g.apply_idx(i)))
        .fold(0.0, f64::max))
}

/// `g` after `f`; requires `f.target = g.source`.
pub fn compose(g: &PointMap, f: &PointMap) -> Result<PointMap> {
    if f.target() != g.source() {
        return Err(Error::structural(
            "compose needs f.target equal to g.source",
        ));
    }
    let values = f.values().iter().map(|&i| g.apply_idx(i)).collect();
    PointMap::from_indices(f.source().clone(), g.target().clone(), values)
}

/// One modulus valid for the whole family: the pointwise max of the
/// individual tables.
pub fn equibornologous_modulus(family: &[PointMap]) -> Result<ExpansionModulus> {
    let first = family
        .first()
        .ok_or_else(|| Error::structural("empty family has no modulus"))?;
    for f in &family[1..] {
        if f.source() != first.source() || f.target() != first.target() {
            return Err(Error::structural(
                "family members must share source and target",
            ));
        }
    }
    let moduli: Vec<ExpansionModulus> = family.iter().map(expansion_modulus).collect();
    // all maps share a source, so the threshold sets coincide
    let mut table = moduli[0].table.clone();
    for m in &moduli[1..] {
        for ((_, acc), (_, v)) in table.iter_mut().zip(&m.table) {
            *acc = acc.max(*v);
        }
    }
    Ok(ExpansionModulus { table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::FiniteMetricSpace;

    fn ints(ns: &[i64]) -> Vec<Label> {
        ns.iter().map(|&n| Label::Int(n)).collect()
    }

    #[test]
    fn identity_modulus_is_identity_table() {
        let s = FiniteMetricSpace::line(4);
        let id = PointMap::identity(s);
        let m = expansion_modulus(&id);
        for (n, b) in &m.table {
            assert_eq!(n, b);
        }
    }

    #[test]
    fn constant_map_modulus_is_zero() {
        let s = FiniteMetricSpace::line(4);
        let c = PointMap::constant(s.clone(), s, &Label::Int(0)).unwrap();
        let m = expansion_modulus(&c);
        assert!(m.table.iter().all(|(_, b)| *b == 0.0));
    }

    #[test]
    fn doubling_map_modulus() {
        // f: line{0,1,2} -> line{0,2,4} by i -> 2i: M(1)=2, M(2)=4
        let x = FiniteMetricSpace::line(3);
        let y = Arc::new(
            FiniteMetricSpace::new(
                ints(&[0, 2, 4]),
                vec![
                    vec![0.0, 2.0, 4.0],
                    vec![2.0, 0.0, 2.0],
                    vec![4.0, 2.0, 0.0],
                ],
            )
            .unwrap(),
        );
        let f = PointMap::new(x, y, &ints(&[0, 2, 4])).unwrap();
        let m = expansion_modulus(&f);
        assert_eq!(m.eval(1.0), 2.0);
        assert_eq!(m.eval(2.0), 4.0);
    }

    #[test]
    fn fiber_profiles() {
        let s = FiniteMetricSpace::line(3);
        let id = PointMap::identity(s.clone());
        assert_eq!(
            fiber_profile(&id),
            FiberProfile { max_cardinality: 1, max_diameter: 0.0 }
        );
        let c = PointMap::constant(s.clone(), s, &Label::Int(0)).unwrap();
        assert_eq!(
            fiber_profile(&c),
            FiberProfile { max_cardinality: 3, max_diameter: 2.0 }
        );
        // i -> floor(i/2) on {0,1,2,3}: fibers {0,1} and {2,3}
        let x4 = FiniteMetricSpace::line(4);
        let h = PointMap::new(x4.clone(), x4, &ints(&[0, 0, 1, 1])).unwrap();
        assert_eq!(
            fiber_profile(&h),
            FiberProfile { max_cardinality: 2, max_diameter: 1.0 }
        );
    }

    #[test]
    fn closeness_examples() {
        let s = FiniteMetricSpace::line(5);
        let id = PointMap::identity(s.clone());
        assert_eq!(closeness_distance(&id, &id).unwrap(), 0.0);

        let shift = PointMap::new(s.clone(), s.clone(), &ints(&[1, 2, 3, 4, 4])).unwrap();
        assert_eq!(closeness_distance(&id, &shift).unwrap(), 1.0);

        let c0 = PointMap::constant(s.clone(), s.clone(), &Label::Int(0)).unwrap();
        let c4 = PointMap::constant(s.clone(), s, &Label::Int(4)).unwrap();
        assert_eq!(closeness_distance(&c0, &c4).unwrap(), 4.0);
    }

    #[test]
    fn closeness_requires_shared_spaces() {
        let a = FiniteMetricSpace::line(3);
        let b = FiniteMetricSpace::line(4);
        let f = PointMap::identity(a);
        let g = PointMap::identity(b);
        assert!(closeness_distance(&f, &g).is_err());
    }

    #[test]
    fn composition_laws_and_pointwise_values() {
        let x = FiniteMetricSpace::line(3);
        let f = PointMap::new(x.clone(), x.clone(), &ints(&[1, 2, 2])).unwrap();
        let id = PointMap::identity(x);
        assert_eq!(compose(&id, &f).unwrap(), f);
        assert_eq!(compose(&f, &id).unwrap(), f);

        // g: i -> 2i into line{0..5} after f: i -> i+1 on line{0,1,2}
        let y = FiniteMetricSpace::line(3);
        let z = FiniteMetricSpace::line(6);
        let f2 = PointMap::new(y.clone(), y.clone(), &ints(&[1, 2, 2])).unwrap();
        let g2 = PointMap::new(y, z, &ints(&[0, 2, 4])).unwrap();
        let gf = compose(&g2, &f2).unwrap();
        assert_eq!(gf.image_labels(), ints(&[2, 4, 4]));
    }

    #[test]
    fn singleton_family_is_its_own_modulus() {
        let s = FiniteMetricSpace::line(4);
        let id = PointMap::identity(s);
        let fam = equibornologous_modulus(std::slice::from_ref(&id)).unwrap();
        assert_eq!(fam, expansion_modulus(&id));
    }

    #[test]
    fn family_of_id_and_constant_maxes_to_id() {
        let s = FiniteMetricSpace::line(4);
        let id = PointMap::identity(s.clone());
        let c = PointMap::constant(s.clone(), s, &Label::Int(0)).unwrap();
        let fam = equibornologous_modulus(&[id.clone(), c]).unwrap();
        assert_eq!(fam, expansion_modulus(&id));
    }

    #[test]
    fn empty_family_is_an_error() {
        assert!(equibornologous_modulus(&[]).is_err());
    }

    #[test]
    fn composition_modulus_law() {
        // expansion_modulus(g o f)(N) <= expansion_modulus(g)(expansion_modulus(f)(N))
        let x = FiniteMetricSpace::line(5);
        let f = PointMap::new(x.clone(), x.clone(), &ints(&[0, 0, 2, 2, 4])).unwrap();
        let g = PointMap::new(x.clone(), x, &ints(&[4, 3, 2, 1, 0])).unwrap();
        let mf = expansion_modulus(&f);
        let mg = expansion_modulus(&g);
        let mgf = expansion_modulus(&compose(&g, &f).unwrap());
        for (n, m) in &mgf.table {
            assert!(
                *m <= mg.eval(mf.eval(*n)),
                "composition law fails at N={n}: {m} > {}",
                mg.eval(mf.eval(*n))
            );
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn map_on_line(values: &[usize]) -> PointMap {
            let s = FiniteMetricSpace::line(5);
            let values = values.iter().map(|&v| v % 5).collect();
            PointMap::from_indices(s.clone(), s, values).unwrap()
        }

        proptest! {
            // closeness is a pseudometric on maps X -> Y
            #[test]
            fn closeness_is_a_pseudometric(
                a in proptest::collection::vec(0usize..5, 5),
                b in proptest::collection::vec(0usize..5, 5),
                c in proptest::collection::vec(0usize..5, 5),
            ) {
                let (f, g, h) = (map_on_line(&a), map_on_line(&b), map_on_line(&c));
                prop_assert_eq!(closeness_distance(&f, &f).unwrap(), 0.0);
                prop_assert_eq!(
                    closeness_distance(&f, &g).unwrap(),
                    closeness_distance(&g, &f).unwrap()
                );
                let (fg, gh, fh) = (
                    closeness_distance(&f, &g).unwrap(),
                    closeness_distance(&g, &h).unwrap(),
                    closeness_distance(&f, &h).unwrap(),
                );
                prop_assert!(fh <= fg + gh);
            }

            // the coarse composition law on random endomap pairs
            #[test]
            fn composition_modulus_bound(
                a in proptest::collection::vec(0usize..5, 5),
                b in proptest::collection::vec(0usize..5, 5),
            ) {
                let (f, g) = (map_on_line(&a), map_on_line(&b));
                let (mf, mg) = (expansion_modulus(&f), expansion_modulus(&g));
                let mgf = expansion_modulus(&compose(&g, &f).unwrap());
                for (n, m) in &mgf.table {
                    prop_assert!(*m <= mg.eval(mf.eval(*n)));
                }
            }
        }
    }
}
