//! p-cylinders, their face inclusions, coarse homotopies, and the sliced
//! family of maps a homotopy induces.
//!
//! The cylinder over a base X with height profile p has points (x,n) for
//! 1 <= n <= p(x)+1 and metric dist(x,y) + |n-m|. Levels start at 1 so that
//! the bottom face inclusion is x -> (x,1) and the top face is
//! x -> (x, p(x)+1).

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::label::Label;
use crate::maps::{
    closeness_distance, equibornologous_modulus, expansion_modulus, ExpansionModulus, PointMap,
};
use crate::metric::FiniteMetricSpace;
use crate::report::VerificationReport;

/// The cylinder `I_pX`, realized as an ordinary finite metric space with
/// composite labels `"x|n"`, plus the bookkeeping to move between base points
/// with levels and cylinder points.
#[derive(Clone, Debug)]
pub struct PCylinder {
    base: Arc<FiniteMetricSpace>,
    p: Vec<u32>,
    space: Arc<FiniteMetricSpace>,
    point_of: Vec<(usize, u32)>,
    idx_of: HashMap<(usize, u32), usize>,
}

/// Builds the cylinder with point set {(x,n) : 1 <= n <= p(x)+1} and metric
/// dist(x,y) + |n-m|.
pub fn build_cylinder(base: Arc<FiniteMetricSpace>, p: &[i64]) -> Result<PCylinder> {
    if p.len() != base.n() {
        return Err(Error::structural(format!(
            "height profile has {} entries for {} base points",
            p.len(),
            base.n()
        )));
    }
    if let Some(bad) = p.iter().position(|&v| v < 0) {
        return Err(Error::structural(format!(
            "negative height p({}) = {}",
            base.label(bad),
            p[bad]
        )));
    }
    let p: Vec<u32> = p.iter().map(|&v| v as u32).collect();
    let mut labels = Vec::new();
    let mut point_of = Vec::new();
    let mut idx_of = HashMap::new();
    for (x, &px) in p.iter().enumerate() {
        for n in 1..=(px + 1) {
            idx_of.insert((x, n), point_of.len());
            point_of.push((x, n));
            labels.push(Label::Str(format!("{}|{}", base.label(x), n)));
        }
    }
    let rows: Vec<Vec<f64>> = point_of
        .iter()
        .map(|&(x, n)| {
            point_of
                .iter()
                .map(|&(y, m)| base.dist(x, y) + (n as f64 - m as f64).abs())
                .collect()
        })
        .collect();
    let space = Arc::new(FiniteMetricSpace::new(labels, rows)?);
    Ok(PCylinder {
        base,
        p,
        space,
        point_of,
        idx_of,
    })
}

impl PCylinder {
    pub fn base(&self) -> &Arc<FiniteMetricSpace> {
        &self.base
    }

    pub fn heights(&self) -> &[u32] {
        &self.p
    }

    pub fn max_height(&self) -> u32 {
        self.p.iter().copied().max().unwrap_or(0)
    }

    /// The cylinder as a plain metric space (labels `"x|n"`).
    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn point(&self, i: usize) -> (usize, u32) {
        self.point_of[i]
    }

    pub fn index_of(&self, x: usize, n: u32) -> Option<usize> {
        self.idx_of.get(&(x, n)).copied()
    }

    /// The face inclusions: i0(x) = (x,1) and i1(x) = (x, p(x)+1).
    pub fn inclusions(&self) -> (PointMap, PointMap) {
        let bottom: Vec<usize> = (0..self.base.n())
            .map(|x| self.idx_of[&(x, 1)])
            .collect();
        let top: Vec<usize> = (0..self.base.n())
            .map(|x| self.idx_of[&(x, self.p[x] + 1)])
            .collect();
        let i0 = PointMap::from_indices(self.base.clone(), self.space.clone(), bottom)
            .expect("bottom face is total");
        let i1 = PointMap::from_indices(self.base.clone(), self.space.clone(), top)
            .expect("top face is total");
        (i0, i1)
    }
}

/// A coarse homotopy: a map H off the cylinder restricting to f on the bottom
/// face and to g on the top face, exactly.
#[derive(Clone, Debug)]
pub struct CoarseHomotopyData {
    pub cylinder: PCylinder,
    pub h: PointMap,
    pub f: PointMap,
    pub g: PointMap,
}

impl CoarseHomotopyData {
    pub fn new(cylinder: PCylinder, h: PointMap, f: PointMap, g: PointMap) -> Result<Self> {
        if h.source() != cylinder.space() {
            return Err(Error::structural("H must be defined on the cylinder"));
        }
        if f.source() != cylinder.base() || g.source() != cylinder.base() {
            return Err(Error::structural("endpoints must be defined on the base"));
        }
        if f.target() != h.target() || g.target() != h.target() {
            return Err(Error::structural("endpoints must land in H's target"));
        }
        let (i0, i1) = cylinder.inclusions();
        let h0 = crate::maps::compose(&h, &i0)?;
        let h1 = crate::maps::compose(&h, &i1)?;
        if h0 != f {
            return Err(Error::structural("H restricted to the bottom face is not f"));
        }
        if h1 != g {
            return Err(Error::structural("H restricted to the top face is not g"));
        }
        Ok(CoarseHomotopyData { cylinder, h, f, g })
    }

    /// Derives the endpoint maps from H itself.
    pub fn from_h(cylinder: PCylinder, h: PointMap) -> Result<Self> {
        if h.source() != cylinder.space() {
            return Err(Error::structural("H must be defined on the cylinder"));
        }
        let (i0, i1) = cylinder.inclusions();
        let f = crate::maps::compose(&h, &i0)?;
        let g = crate::maps::compose(&h, &i1)?;
        Ok(CoarseHomotopyData { cylinder, h, f, g })
    }

    /// Value of H at (x, n) by base index and level.
    pub fn h_at(&self, x: usize, n: u32) -> usize {
        let i = self.cylinder.idx_of[&(x, n)];
        self.h.apply_idx(i)
    }
}

/// The sliced family f_n(x) = H(x, min(n, p(x)+1)) for n = 1..=n_max.
pub fn slice_family(data: &CoarseHomotopyData, n_max: u32) -> Result<Vec<PointMap>> {
    let needed = data.cylinder.max_height() + 1;
    if n_max < needed {
        return Err(Error::structural(format!(
            "n_max = {n_max} is too small: the family is stationary only from 1 + max p(x) = {needed}"
        )));
    }
    let base = data.cylinder.base().clone();
    let target = data.h.target().clone();
    let mut family = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let values: Vec<usize> = (0..base.n())
            .map(|x| data.h_at(x, n.min(data.cylinder.heights()[x] + 1)))
            .collect();
        family.push(PointMap::from_indices(base.clone(), target.clone(), values)?);
    }
    Ok(family)
}

/// Per-point stationarity index: the least N with f_n(x) = f_N(x) for all
/// n >= N within the (stationary-by-the-end) family.
pub fn stationarity_indices(family: &[PointMap]) -> Vec<u32> {
    let n_pts = family[0].source().n();
    (0..n_pts)
        .map(|x| {
            let mut last_change = 0; // slice numbering is 1-based
            for n in 0..family.len() - 1 {
                if family[n].apply_idx(x) != family[n + 1].apply_idx(x) {
                    last_change = n + 1;
                }
            }
            (last_change + 1) as u32
        })
        .collect()
}

/// The modulus N -> sup { dist(x,y) + |p(x)-p(y)| : dist(x,y) <= N } that
/// controls the sliced family (top-face displacement in the cylinder).
pub fn height_displacement_modulus(cyl: &PCylinder) -> ExpansionModulus {
    let base = cyl.base();
    let n = base.n();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let dn = base.dist(i, j);
            let disp = dn + (cyl.heights()[i] as f64 - cyl.heights()[j] as f64).abs();
            pairs.push((dn, disp));
        }
    }
    pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let mut table = Vec::new();
    let mut running = 0.0f64;
    for (dn, disp) in pairs {
        running = running.max(disp);
        match table.last_mut() {
            Some((n0, m0)) if *n0 == dn => *m0 = running,
            _ => table.push((dn, running)),
        }
    }
    ExpansionModulus { table }
}

/// Everything the sliced family is supposed to satisfy, checked on the nose:
/// equibornologous modulus (with its controlling bound), the unit step bound,
/// stationarity indices, visited-fiber cardinalities, and exact endpoints.
pub fn verify_family_properties(
    family: &[PointMap],
    data: &CoarseHomotopyData,
) -> VerificationReport {
    let mut report = VerificationReport::new("family_properties");
    if family.is_empty() {
        report.fail("nonempty", None, None, Some("empty family".into()));
        return report;
    }
    let h_mod = expansion_modulus(&data.h);

    // property 1: one modulus for the whole family, controlled by H's modulus
    // composed with the cylinder displacement bound
    match equibornologous_modulus(family) {
        Ok(fam_mod) => {
            let disp = height_displacement_modulus(&data.cylinder);
            let mut ok = true;
            let mut tightest: Option<(f64, f64)> = None; // (measured, bound) at min slack
            for (n, m) in &fam_mod.table {
                let bound = h_mod.eval(disp.eval(*n));
                if *m > bound {
                    ok = false;
                }
                if tightest.map_or(true, |(tm, tb)| bound - m < tb - tm) {
                    tightest = Some((*m, bound));
                }
            }
            report.record(
                "equibornologous_modulus_bound",
                ok,
                tightest.map(|(m, _)| m),
                tightest.map(|(_, b)| b),
                Some(format!("modulus table {:?}", fam_mod.table)),
            );
        }
        Err(e) => report.fail("equibornologous_modulus_bound", None, None, Some(e.to_string())),
    }

    // property 2: consecutive slices move points by at most H's 1-step bound
    let step_bound = h_mod.eval(1.0);
    let mut max_step = 0.0f64;
    for w in family.windows(2) {
        let d = closeness_distance(&w[0], &w[1]).expect("family shares spaces");
        max_step = max_step.max(d);
    }
    report.record(
        "consecutive_step_bound",
        max_step <= step_bound,
        Some(max_step),
        Some(step_bound),
        None,
    );

    // property 3: stationarity index per point
    let stat = stationarity_indices(family);
    let max_stat = stat.iter().copied().max().unwrap_or(1);
    report.info(
        "stationarity_indices",
        Some(max_stat as f64),
        Some(format!("per-point N(x): {stat:?}")),
    );

    // property 4: per target point, how many x ever visit it
    let base_n = family[0].source().n();
    let mut visited: Vec<usize> = vec![0; family[0].target().n()];
    for y in 0..visited.len() {
        visited[y] = (0..base_n)
            .filter(|&x| family.iter().any(|f| f.apply_idx(x) == y))
            .count();
    }
    report.info(
        "visited_fiber_cardinalities",
        Some(*visited.iter().max().unwrap_or(&0) as f64),
        Some(format!("per-target counts: {visited:?}")),
    );

    // property 5: exact endpoints
    let first_is_f = family[0] == data.f;
    let last_is_g = family[family.len() - 1] == data.g;
    report.record("first_slice_equals_f", first_is_f, None, None, None);
    report.record("stationary_limit_equals_g", last_is_g, None, None, None);
    // the family really is stationary where the indices say it is
    let mut stationary_ok = true;
    for (x, &nx) in stat.iter().enumerate() {
        let v = family[(nx - 1) as usize].apply_idx(x);
        if family[(nx as usize - 1)..].iter().any(|f| f.apply_idx(x) != v) {
            stationary_ok = false;
        }
    }
    report.record("stationary_beyond_index", stationary_ok, None, None, None);
    report
}

/// JSON shape of a cylinder for the CLI: the underlying space plus profile.
#[derive(Serialize)]
pub struct CylinderDescription {
    pub labels: Vec<Label>,
    pub dist: Vec<Vec<f64>>,
    pub base_labels: Vec<Label>,
    pub p: Vec<u32>,
}

impl From<&PCylinder> for CylinderDescription {
    fn from(c: &PCylinder) -> Self {
        CylinderDescription {
            labels: c.space().labels().to_vec(),
            dist: c.space().dist_rows(),
            base_labels: c.base().labels().to_vec(),
            p: c.heights().to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Label;

    fn one_point() -> Arc<FiniteMetricSpace> {
        Arc::new(
            FiniteMetricSpace::new(vec![Label::Int(0)], vec![vec![0.0]]).unwrap(),
        )
    }

    #[test]
    fn degenerate_cylinder_is_the_base() {
        let cyl = build_cylinder(one_point(), &[0]).unwrap();
        assert_eq!(cyl.space().n(), 1);
        let (i0, i1) = cyl.inclusions();
        assert_eq!(i0, i1);
    }

    #[test]
    fn three_level_cylinder_over_a_point_is_a_line() {
        let cyl = build_cylinder(one_point(), &[2]).unwrap();
        assert_eq!(cyl.space().n(), 3);
        assert!(cyl.space().validate().passed());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(cyl.space().dist(i, j), (i as f64 - j as f64).abs());
            }
        }
        let (_, i1) = cyl.inclusions();
        assert_eq!(
            i1.apply(&Label::Int(0)).unwrap(),
            &Label::Str("0|3".into())
        );
    }

    #[test]
    fn mixed_profile_cylinder_metric() {
        // base line{0,1}, p = [1,0]: points (0,1),(0,2),(1,1); dist((0,2),(1,1)) = 2
        let base = FiniteMetricSpace::line(2);
        let cyl = build_cylinder(base, &[1, 0]).unwrap();
        assert_eq!(cyl.space().n(), 3);
        let a = cyl.index_of(0, 2).unwrap();
        let b = cyl.index_of(1, 1).unwrap();
        assert_eq!(cyl.space().dist(a, b), 2.0);
        assert!(cyl.space().validate().passed());
    }

    #[test]
    fn negative_height_is_structural() {
        assert!(build_cylinder(one_point(), &[-1]).is_err());
    }

    #[test]
    fn bottom_inclusion_is_isometric() {
        let base = FiniteMetricSpace::line(4);
        let cyl = build_cylinder(base, &[2, 1, 0, 3]).unwrap();
        let (i0, _) = cyl.inclusions();
        let m = expansion_modulus(&i0);
        for (n, b) in &m.table {
            assert_eq!(n, b);
        }
    }

    fn shift_homotopy_on_line5() -> CoarseHomotopyData {
        // H((x,n)) = min(x + n - 1, 4), p = 4 everywhere
        let base = FiniteMetricSpace::line(5);
        let cyl = build_cylinder(base.clone(), &[4, 4, 4, 4, 4]).unwrap();
        let values: Vec<usize> = (0..cyl.space().n())
            .map(|i| {
                let (x, n) = cyl.point(i);
                (x + n as usize - 1).min(4)
            })
            .collect();
        let h = PointMap::from_indices(cyl.space().clone(), base, values).unwrap();
        CoarseHomotopyData::from_h(cyl, h).unwrap()
    }

    #[test]
    fn slice_formula_matches_min_branch() {
        // p(x) = 3 everywhere: f_5(x) = H(x,4), f_2(x) = H(x,2)
        let base = FiniteMetricSpace::line(3);
        let cyl = build_cylinder(base.clone(), &[3, 3, 3]).unwrap();
        let values: Vec<usize> = (0..cyl.space().n())
            .map(|i| {
                let (x, n) = cyl.point(i);
                (x + n as usize) % 3
            })
            .collect();
        let h = PointMap::from_indices(cyl.space().clone(), base, values).unwrap();
        let data = CoarseHomotopyData::from_h(cyl, h).unwrap();
        let family = slice_family(&data, 5).unwrap();
        for x in 0..3 {
            assert_eq!(family[4].apply_idx(x), data.h_at(x, 4));
            assert_eq!(family[1].apply_idx(x), data.h_at(x, 2));
        }
    }

    #[test]
    fn n_max_too_small_names_the_bound() {
        let data = shift_homotopy_on_line5();
        let err = slice_family(&data, 3).unwrap_err();
        assert!(err.to_string().contains("5"), "{err}");
    }

    #[test]
    fn constant_homotopy_passes_with_zero_step() {
        let base = FiniteMetricSpace::line(4);
        let cyl = build_cylinder(base.clone(), &[2, 2, 2, 2]).unwrap();
        let values: Vec<usize> = (0..cyl.space().n()).map(|i| cyl.point(i).0).collect();
        let h = PointMap::from_indices(cyl.space().clone(), base, values).unwrap();
        let data = CoarseHomotopyData::from_h(cyl, h).unwrap();
        let family = slice_family(&data, 3).unwrap();
        let report = verify_family_properties(&family, &data);
        assert!(report.passed(), "{report:#?}");
        let step = report.entry("consecutive_step_bound").unwrap();
        assert_eq!(step.measured, Some(0.0));
        assert_eq!(stationarity_indices(&family), vec![1, 1, 1, 1]);
    }

    #[test]
    fn zero_height_cylinder_has_single_slice() {
        let base = FiniteMetricSpace::line(3);
        let cyl = build_cylinder(base.clone(), &[0, 0, 0]).unwrap();
        let values: Vec<usize> = (0..cyl.space().n()).map(|i| cyl.point(i).0).collect();
        let h = PointMap::from_indices(cyl.space().clone(), base, values).unwrap();
        let data = CoarseHomotopyData::from_h(cyl, h).unwrap();
        let family = slice_family(&data, 4).unwrap();
        assert!(family.iter().all(|f| *f == data.f && *f == data.g));
        assert_eq!(stationarity_indices(&family), vec![1, 1, 1]);
    }

    #[test]
    fn shift_homotopy_step_bound_is_tight() {
        let data = shift_homotopy_on_line5();
        let family = slice_family(&data, 5).unwrap();
        let report = verify_family_properties(&family, &data);
        assert!(report.passed(), "{report:#?}");
        let step = report.entry("consecutive_step_bound").unwrap();
        assert_eq!(step.measured, Some(1.0));
        assert_eq!(step.bound, Some(1.0));
    }

    #[test]
    fn endpoint_mismatch_is_rejected() {
        let base = FiniteMetricSpace::line(2);
        let cyl = build_cylinder(base.clone(), &[1, 1]).unwrap();
        let values: Vec<usize> = (0..cyl.space().n()).map(|i| cyl.point(i).0).collect();
        let h = PointMap::from_indices(cyl.space().clone(), base.clone(), values).unwrap();
        let f_wrong = PointMap::constant(base.clone(), base.clone(), &Label::Int(1)).unwrap();
        let g = crate::maps::compose(&h, &cyl.inclusions().1).unwrap();
        assert!(CoarseHomotopyData::new(cyl, h, f_wrong, g).is_err());
    }
}
