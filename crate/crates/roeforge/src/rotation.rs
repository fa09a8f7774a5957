//! The explicit rotation path interpolating the identity and the signed
//! permutation of an involution, its propagation law, and the conjugation
//! homotopy connecting the pushforwards of two close maps.
//!
//! The five-case matrix formula needs the two elements of each swapped pair
//! ordered. Only the relative order inside a pair ever enters the formula, so
//! an `Involution` carries a designated first element per pair. The default
//! designation is enumeration order. Conjugating by the t = 1 endpoint sends
//! entry (k, l) to (sigma(k), sigma(l)) scaled by t_k t_l, where t_k is +1 on
//! fixed points and +1 on a moved point exactly when its partner is the
//! designated first. Homotopy builders therefore designate the destination
//! side of each pair first: every support point of the conjugated matrix then
//! carries t = +1 and the endpoint lands on the other pushforward exactly.
//! Enumeration order guarantees none of this once pair orientations mix.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::index::IndexSpace;
use crate::label::Label;
use crate::maps::{closeness_distance, PointMap};
use crate::matrix::{pushforward, BlockMatrix, CBlock};
use crate::report::VerificationReport;

/// Entrywise tolerance for algebraic identity checks.
pub const ENTRY_TOL: f64 = 1e-12;

/// A self-inverse bijection of index points with a designated first element
/// in each swapped pair.
#[derive(Clone, Debug)]
pub struct Involution {
    index: Arc<IndexSpace>,
    sigma: Vec<usize>,
    first: Vec<bool>,
}

impl Involution {
    /// Checks sigma(sigma(i)) = i; pairs are oriented by enumeration order.
    pub fn new(index: Arc<IndexSpace>, sigma: Vec<usize>) -> Result<Self> {
        if sigma.len() != index.n_points() {
            return Err(Error::structural("sigma must cover the index set"));
        }
        for (i, &s) in sigma.iter().enumerate() {
            if s >= sigma.len() || sigma[s] != i {
                return Err(Error::structural(format!(
                    "not an involution at point {i}"
                )));
            }
        }
        let first = sigma.iter().enumerate().map(|(i, &s)| i <= s).collect();
        Ok(Involution {
            index,
            sigma,
            first,
        })
    }

    /// Builds the involution swapping each listed pair, the pair's left
    /// element designated first. Pairs must be disjoint.
    pub fn from_pairs(index: Arc<IndexSpace>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = index.n_points();
        let mut sigma: Vec<usize> = (0..n).collect();
        let mut first = vec![true; n];
        let mut used = vec![false; n];
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::structural("pair outside the index set"));
            }
            if a == b {
                continue;
            }
            if used[a] || used[b] {
                return Err(Error::structural("pairs must be disjoint"));
            }
            used[a] = true;
            used[b] = true;
            sigma[a] = b;
            sigma[b] = a;
            first[a] = true;
            first[b] = false;
        }
        Ok(Involution {
            index,
            sigma,
            first,
        })
    }

    pub fn index(&self) -> &Arc<IndexSpace> {
        &self.index
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.sigma[i]
    }

    pub fn moved_points(&self) -> Vec<usize> {
        (0..self.sigma.len())
            .filter(|&i| self.sigma[i] != i)
            .collect()
    }

    /// `sup_x dist(x, sigma(x))` in the index space's propagation metric.
    pub fn propagation(&self) -> f64 {
        self.moved_points()
            .into_iter()
            .map(|i| self.index.pdist(i, self.sigma[i]))
            .fold(0.0, f64::max)
    }

    /// The rotation matrix at time t as a dense real matrix.
    pub fn rotation_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        check_t(t)?;
        let n = self.sigma.len();
        let (c, s) = cos_sin(t);
        let mut out = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let j = self.sigma[i];
            if j == i {
                out[(i, i)] = 1.0;
            } else {
                out[(i, i)] = c;
                out[(i, j)] = if self.first[i] { s } else { -s };
            }
        }
        Ok(out)
    }

    /// The rotation at time t acting blockwise: each scalar entry times the
    /// d x d identity. Near-zero entries prune, so t = 1 is exactly the
    /// signed permutation.
    pub fn rotation_blocks(&self, t: f64, d: usize) -> Result<BlockMatrix> {
        check_t(t)?;
        let (c, s) = cos_sin(t);
        let eye = CBlock::identity(d, d);
        let scaled = |v: f64| eye.map(|e| e * Complex64::new(v, 0.0));
        let mut out = BlockMatrix::zero(self.index.clone(), d);
        for i in 0..self.sigma.len() {
            let j = self.sigma[i];
            if j == i {
                out.set_block(i, i, eye.clone())?;
            } else {
                out.set_block(i, i, scaled(c))?;
                out.set_block(i, j, scaled(if self.first[i] { s } else { -s }))?;
            }
        }
        Ok(out)
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::structural(format!("t = {t} outside [0,1]")));
    }
    Ok(())
}

fn cos_sin(t: f64) -> (f64, f64) {
    let theta = std::f64::consts::FRAC_PI_2 * t;
    (theta.cos(), theta.sin())
}

/// k equispaced samples of [0,1], endpoints included.
pub fn t_grid(k: usize) -> Vec<f64> {
    let k = k.max(2);
    (0..k).map(|i| i as f64 / (k - 1) as f64).collect()
}

/// The sampled conjugation path `t -> Rot(t) (f_push m) Rot(t)^*` for a pair
/// of close maps, with the swap involution on the product index.
#[derive(Clone, Debug)]
pub struct ClosenessHomotopy {
    pub f: PointMap,
    pub g: PointMap,
    pub f_push: BlockMatrix,
    pub g_push: BlockMatrix,
    pub involution: Involution,
    pub closeness: f64,
}

/// Builds the conjugation homotopy connecting the pushforwards of f and g,
/// swapping `(f(x), x)` with `(g(x), x)` for every source point x and fixing
/// everything else.
pub fn closeness_homotopy(f: &PointMap, g: &PointMap, m: &BlockMatrix) -> Result<ClosenessHomotopy> {
    if f.source() != g.source() || f.target() != g.target() {
        return Err(Error::structural(
            "homotopy needs maps with the same source and target",
        ));
    }
    if m.index().outer() != f.source() {
        return Err(Error::structural(
            "matrix index does not sit over the maps' source",
        ));
    }
    let closeness = closeness_distance(f, g)?;
    let f_push = pushforward(f, m)?;
    let g_push = pushforward(g, m)?;
    let index = f_push.index().clone();
    let n_inner = m.index().n_points();
    let mut pairs = Vec::new();
    for s in 0..n_inner {
        let x = m.index().outer_of(s);
        let (fy, gy) = (f.apply_idx(x), g.apply_idx(x));
        if fy != gy {
            // destination side first, so conjugation moves f-support with
            // sign +1 everywhere
            pairs.push((gy * n_inner + s, fy * n_inner + s));
        }
    }
    let involution = Involution::from_pairs(index, &pairs)?;
    Ok(ClosenessHomotopy {
        f: f.clone(),
        g: g.clone(),
        f_push,
        g_push,
        involution,
        closeness,
    })
}

impl ClosenessHomotopy {
    pub fn index(&self) -> &Arc<IndexSpace> {
        self.f_push.index()
    }

    /// `Rot(t) (f_push m) Rot(t)^*`.
    pub fn eval(&self, t: f64) -> Result<BlockMatrix> {
        let rot = self
            .involution
            .rotation_blocks(t, self.f_push.block_dim())?;
        rot.multiply(&self.f_push)?.multiply(&rot.adjoint())
    }

    /// Both endpoint identities: the t = 0 end is the f-pushforward on the
    /// nose, the t = 1 end is the g-pushforward entrywise.
    pub fn endpoint_check(&self) -> VerificationReport {
        let mut report = VerificationReport::new("endpoints");
        match self.eval(0.0).and_then(|e| e.max_entry_diff(&self.f_push)) {
            Ok(d0) => report.record("endpoint_t0_exact", d0 == 0.0, Some(d0), Some(0.0), None),
            Err(e) => report.fail("endpoint_t0_exact", None, None, Some(e.to_string())),
        }
        match self.eval(1.0).and_then(|e| e.max_entry_diff(&self.g_push)) {
            Ok(d1) => {
                report.assert_le("endpoint_t1_entrywise", d1, ENTRY_TOL, None);
            }
            Err(e) => report.fail("endpoint_t1_entrywise", None, None, Some(e.to_string())),
        }
        report
    }

    /// The propagation inequality along the sampled path, plus the rotation
    /// ingredient `prop(Rot_sigma) <= sup dist(f(x), g(x))`.
    pub fn propagation_bound_check(&self, ts: &[f64]) -> VerificationReport {
        let mut report = VerificationReport::new("propagation");
        let bound = self.f_push.propagation() + 2.0 * self.closeness;
        let mut worst = (0.0f64, 0.0f64);
        let mut ok = true;
        for &t in ts {
            match self.eval(t) {
                Ok(eta) => {
                    let p = eta.propagation();
                    if p > worst.0 {
                        worst = (p, t);
                    }
                    if p > bound {
                        ok = false;
                    }
                }
                Err(e) => {
                    report.fail("path_propagation_bound", None, None, Some(e.to_string()));
                    return report;
                }
            }
        }
        report.record(
            "path_propagation_bound",
            ok,
            Some(worst.0),
            Some(bound),
            Some(format!("max at t={}", worst.1)),
        );
        report.assert_le(
            "rotation_propagation_bound",
            self.involution.propagation(),
            self.closeness,
            None,
        );
        report
    }

    /// The target-pair block of the path value: all blocks at positions whose
    /// outer coordinates are (y1, y2), keyed by inner point pair.
    fn outer_block(&self, eta: &BlockMatrix, y1: usize, y2: usize) -> BTreeMap<(usize, usize), CBlock> {
        let idx = self.index();
        eta.blocks()
            .filter(|(&(i, j), _)| {
                idx.outer_of(i as usize) == y1 && idx.outer_of(j as usize) == y2
            })
            .map(|(&(i, j), b)| ((idx.inner_of(i as usize), idx.inner_of(j as usize)), b.clone()))
            .collect()
    }

    /// If f and g agree on every point that either map sends into {y1, y2},
    /// the (y1, y2) outer block of the path is time-independent; otherwise
    /// the hypothesis is reported as not met and nothing is asserted.
    pub fn constancy_check(&self, ts: &[f64], y1: &Label, y2: &Label) -> Result<VerificationReport> {
        let mut report = VerificationReport::new("block_constancy");
        let target = self.f.target();
        let y1i = target.require_index(y1)?;
        let y2i = target.require_index(y2)?;
        let hypothesis = (0..self.f.source().n()).all(|x| {
            let (fy, gy) = (self.f.apply_idx(x), self.g.apply_idx(x));
            let touches = fy == y1i || fy == y2i || gy == y1i || gy == y2i;
            !touches || fy == gy
        });
        if !hypothesis {
            report.info(
                "constant_block",
                None,
                Some(format!("hypothesis not met for ({y1},{y2})")),
            );
            return Ok(report);
        }
        let mut reference: Option<BTreeMap<(usize, usize), CBlock>> = None;
        let mut worst = 0.0f64;
        for &t in ts {
            let eta = self.eval(t)?;
            let block = self.outer_block(&eta, y1i, y2i);
            if let Some(r) = &reference {
                worst = worst.max(block_map_diff(r, &block, self.f_push.block_dim()));
            } else {
                reference = Some(block);
            }
        }
        report.assert_le(
            "constant_block",
            worst,
            ENTRY_TOL,
            Some(format!("outer block ({y1},{y2})")),
        );
        Ok(report)
    }
}

fn block_map_diff(
    a: &BTreeMap<(usize, usize), CBlock>,
    b: &BTreeMap<(usize, usize), CBlock>,
    d: usize,
) -> f64 {
    let zero = CBlock::zeros(d, d);
    let mut worst = 0.0f64;
    for (k, x) in a {
        let y = b.get(k).unwrap_or(&zero);
        worst = worst.max(crate::matrix::block_max_abs(&(x - y)));
    }
    for (k, y) in b {
        if !a.contains_key(k) {
            worst = worst.max(crate::matrix::block_max_abs(y));
        }
    }
    worst
}

/// All the pointwise rotation-path checks for one involution: orthogonality
/// along the grid, exact endpoints, the signed permutation at t = 1, the
/// Lipschitz bound, and the propagation equality for t > 0.
pub fn rotation_suite_report(inv: &Involution, ts: &[f64]) -> VerificationReport {
    let mut report = VerificationReport::new("rotation_path");
    let n = inv.sigma().len();
    let eye = DMatrix::<f64>::identity(n, n);

    let mats: Vec<(f64, DMatrix<f64>)> = match ts
        .iter()
        .map(|&t| inv.rotation_matrix(t).map(|m| (t, m)))
        .collect::<Result<Vec<_>>>()
    {
        Ok(v) => v,
        Err(e) => {
            report.fail("rotation_matrix", None, None, Some(e.to_string()));
            return report;
        }
    };

    let mut worst_orth = (0.0f64, 0.0f64);
    for (t, r) in &mats {
        let err = operator_norm_real(&(r * r.transpose() - &eye));
        if err > worst_orth.0 {
            worst_orth = (err, *t);
        }
    }
    report.record(
        "orthogonality",
        worst_orth.0 <= ENTRY_TOL,
        Some(worst_orth.0),
        Some(ENTRY_TOL),
        Some(format!("worst at t={}", worst_orth.1)),
    );

    let r0 = inv.rotation_matrix(0.0).expect("t=0 in range");
    let exact0 = r0 == eye;
    report.record("identity_at_t0", exact0, None, None, None);

    // t = 1 is a signed permutation: |entry (sigma(x), x)| = 1 and everything
    // else negligible
    let r1 = inv.rotation_matrix(1.0).expect("t=1 in range");
    let mut signed_ok = true;
    for x in 0..n {
        if (r1[(inv.apply(x), x)].abs() - 1.0).abs() != 0.0 {
            signed_ok = false;
        }
        for i in 0..n {
            if i != inv.apply(x) && r1[(i, x)].abs() > ENTRY_TOL {
                signed_ok = false;
            }
        }
    }
    report.record("signed_permutation_at_t1", signed_ok, None, None, None);

    let lipschitz = std::f64::consts::FRAC_PI_2;
    let mut worst_lip = (0.0f64, 0.0f64); // (measured - bound, |dt|)
    let mut lip_ok = true;
    for (a, (t1, r_a)) in mats.iter().enumerate() {
        for (t2, r_b) in mats.iter().skip(a + 1) {
            let lhs = operator_norm_real(&(r_a - r_b));
            let rhs = lipschitz * (t1 - t2).abs();
            if lhs > rhs {
                lip_ok = false;
            }
            if lhs - rhs > worst_lip.0 {
                worst_lip = (lhs - rhs, (t1 - t2).abs());
            }
        }
    }
    report.record(
        "lipschitz_bound",
        lip_ok,
        None,
        None,
        Some(format!("worst margin {} at |dt|={}", -worst_lip.0, worst_lip.1)),
    );

    // propagation equality away from t = 0, zero at t = 0
    let expected = inv.propagation();
    let mut prop_ok = true;
    for &t in ts {
        let p = inv
            .rotation_blocks(t, 1)
            .expect("t in range")
            .propagation();
        let want = if t == 0.0 { 0.0 } else { expected };
        if p != want {
            prop_ok = false;
        }
    }
    report.record(
        "propagation_equality",
        prop_ok,
        Some(expected),
        None,
        None,
    );
    report
}

fn operator_norm_real(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::FiniteMetricSpace;

    fn two_point_swap() -> Involution {
        let ix = IndexSpace::from_space(FiniteMetricSpace::line(2));
        Involution::new(ix, vec![1, 0]).unwrap()
    }

    #[test]
    fn identity_involution_gives_identity_matrix() {
        let ix = IndexSpace::from_space(FiniteMetricSpace::line(3));
        let inv = Involution::new(ix, vec![0, 1, 2]).unwrap();
        for &t in &[0.0, 0.3, 1.0] {
            let r = inv.rotation_matrix(t).unwrap();
            assert_eq!(r, DMatrix::<f64>::identity(3, 3));
        }
        assert_eq!(inv.propagation(), 0.0);
    }

    #[test]
    fn swap_matrix_at_half_and_one() {
        let inv = two_point_swap();
        let r = inv.rotation_matrix(0.5).unwrap();
        let h = (2.0f64).sqrt() / 2.0;
        assert!((r[(0, 0)] - h).abs() < 1e-15);
        assert!((r[(0, 1)] - h).abs() < 1e-15);
        assert!((r[(1, 0)] + h).abs() < 1e-15);
        assert!((r[(1, 1)] - h).abs() < 1e-15);

        let r1 = inv.rotation_matrix(1.0).unwrap();
        assert!((r1[(0, 1)] - 1.0).abs() == 0.0);
        assert!((r1[(1, 0)] + 1.0).abs() == 0.0);
        assert!(r1[(0, 0)].abs() < 1e-12);
        assert!(r1[(1, 1)].abs() < 1e-12);
        // the block form prunes the residue: exactly the signed permutation
        let b1 = inv.rotation_blocks(1.0, 1).unwrap();
        assert_eq!(b1.n_blocks(), 2);
    }

    #[test]
    fn non_involution_is_rejected() {
        let ix = IndexSpace::from_space(FiniteMetricSpace::line(3));
        assert!(Involution::new(ix.clone(), vec![1, 2, 0]).is_err());
        assert!(Involution::new(ix, vec![0, 1]).is_err());
    }

    #[test]
    fn t_outside_range_is_rejected() {
        let inv = two_point_swap();
        assert!(inv.rotation_matrix(1.5).is_err());
        assert!(inv.rotation_matrix(-0.1).is_err());
    }

    #[test]
    fn propagation_of_a_long_swap() {
        let ix = IndexSpace::from_space(FiniteMetricSpace::line(3));
        let inv = Involution::new(ix, vec![2, 1, 0]).unwrap();
        assert_eq!(inv.propagation(), 2.0);
        assert_eq!(inv.rotation_blocks(0.0, 1).unwrap().propagation(), 0.0);
        for &t in &[0.25, 0.5, 1.0] {
            assert_eq!(inv.rotation_blocks(t, 1).unwrap().propagation(), 2.0);
        }
    }

    #[test]
    fn rotation_suite_passes_on_samples() {
        let ix = IndexSpace::from_space(FiniteMetricSpace::line(6));
        let inv = Involution::new(ix, vec![3, 1, 5, 0, 4, 2]).unwrap();
        let report = rotation_suite_report(&inv, &t_grid(21));
        assert!(report.passed(), "{}", report.render_text());
    }

    fn one_point_two_target() -> (PointMap, PointMap, BlockMatrix) {
        let x = Arc::new(
            FiniteMetricSpace::new(vec![Label::Int(0)], vec![vec![0.0]]).unwrap(),
        );
        let y = Arc::new(
            FiniteMetricSpace::new(
                vec!["a".into(), "b".into()],
                vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            )
            .unwrap(),
        );
        let f = PointMap::new(x.clone(), y.clone(), &["a".into()]).unwrap();
        let g = PointMap::new(x.clone(), y, &["b".into()]).unwrap();
        let mut m = BlockMatrix::zero(IndexSpace::from_space(x), 1);
        m.set_scalar(0, 0, Complex64::new(2.0, 0.0)).unwrap();
        (f, g, m)
    }

    #[test]
    fn one_point_homotopy_matches_hand_conjugation() {
        let (f, g, m) = one_point_two_target();
        let path = closeness_homotopy(&f, &g, &m).unwrap();
        // Y x X points: (a,0)=0, (b,0)=1
        for &t in &[0.0, 0.3, 0.7, 1.0] {
            let eta = path.eval(t).unwrap();
            let theta = std::f64::consts::FRAC_PI_2 * t;
            let (c, s) = (theta.cos(), theta.sin());
            // oracle: dense 2x2 conjugation of diag(2, 0); the pair is
            // oriented (b,0)-first, so the sin sits below the diagonal
            let u = DMatrix::<f64>::from_row_slice(2, 2, &[c, -s, s, c]);
            let m2 = DMatrix::<f64>::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
            let want = &u * &m2 * u.transpose();
            for i in 0..2 {
                for j in 0..2 {
                    let got = eta
                        .block(i, j)
                        .map(|b| b[(0, 0)].re)
                        .unwrap_or(0.0);
                    assert!(
                        (got - want[(i, j)]).abs() < 1e-13,
                        "t={t} entry ({i},{j}): got {got}, want {}",
                        want[(i, j)]
                    );
                }
            }
        }
        let report = path.endpoint_check();
        assert!(report.passed(), "{}", report.render_text());
    }

    #[test]
    fn one_point_propagation_strictly_inside_bound() {
        let (f, g, m) = one_point_two_target();
        let path = closeness_homotopy(&f, &g, &m).unwrap();
        let report = path.propagation_bound_check(&t_grid(21));
        assert!(report.passed(), "{}", report.render_text());
        let e = report.entry("path_propagation_bound").unwrap();
        assert_eq!(e.measured, Some(1.0)); // dist(a,b), off-diagonal terms
        assert_eq!(e.bound, Some(2.0)); // 0 + 2 * closeness
    }

    #[test]
    fn mixed_orientation_endpoints_are_exact() {
        // f above g at one point and below at the other: the case where
        // enumeration-ordered signs fail to cancel
        let x = FiniteMetricSpace::line(2);
        let y = FiniteMetricSpace::line(4);
        let f = PointMap::new(x.clone(), y.clone(), &[Label::Int(1), Label::Int(2)]).unwrap();
        let g = PointMap::new(x.clone(), y, &[Label::Int(0), Label::Int(3)]).unwrap();
        let mut m = BlockMatrix::zero(IndexSpace::from_space(x), 1);
        m.set_scalar(0, 1, Complex64::new(1.0, 0.0)).unwrap();
        let path = closeness_homotopy(&f, &g, &m).unwrap();
        let eta1 = path.eval(1.0).unwrap();
        assert_eq!(eta1.max_entry_diff(&path.g_push).unwrap(), 0.0);
        let eta0 = path.eval(0.0).unwrap();
        assert_eq!(eta0.max_entry_diff(&path.f_push).unwrap(), 0.0);
    }

    #[test]
    fn fixed_and_moved_points_coupled_still_exact() {
        // f = g at point 0 (fixed by sigma), f != g at point 1 (moved), with
        // a block coupling the two: the entry mixes t=+1 and t=+-1 factors
        let x = FiniteMetricSpace::line(2);
        let y = FiniteMetricSpace::line(3);
        let f = PointMap::new(x.clone(), y.clone(), &[Label::Int(0), Label::Int(1)]).unwrap();
        let g = PointMap::new(x.clone(), y, &[Label::Int(0), Label::Int(2)]).unwrap();
        let mut m = BlockMatrix::zero(IndexSpace::from_space(x), 1);
        m.set_scalar(0, 1, Complex64::new(1.0, 0.0)).unwrap();
        m.set_scalar(1, 0, Complex64::new(0.0, 1.0)).unwrap();
        let path = closeness_homotopy(&f, &g, &m).unwrap();
        assert_eq!(
            path.eval(1.0).unwrap().max_entry_diff(&path.g_push).unwrap(),
            0.0
        );
        assert_eq!(
            path.eval(0.0).unwrap().max_entry_diff(&path.f_push).unwrap(),
            0.0
        );
    }

    #[test]
    fn equal_maps_give_constant_path() {
        let x = FiniteMetricSpace::line(3);
        let f = PointMap::identity(x.clone());
        let mut m = BlockMatrix::zero(IndexSpace::from_space(x), 1);
        m.set_scalar(0, 2, Complex64::new(1.0, -1.0)).unwrap();
        let path = closeness_homotopy(&f, &f, &m).unwrap();
        for &t in &[0.0, 0.5, 1.0] {
            let eta = path.eval(t).unwrap();
            assert_eq!(eta.max_entry_diff(&path.f_push).unwrap(), 0.0);
        }
    }

    #[test]
    fn zero_matrix_gives_zero_path() {
        let (f, g, _) = one_point_two_target();
        let m = BlockMatrix::zero(
            IndexSpace::from_space(f.source().clone()),
            1,
        );
        let path = closeness_homotopy(&f, &g, &m).unwrap();
        assert!(path.eval(0.5).unwrap().is_zero());
    }

    #[test]
    fn constancy_of_untouched_blocks() {
        // f, g agree on the fibers of {a, b} but differ at the point sent to
        // {c, e}: the (a, b) block stays put, the (c, c) block moves
        let x = FiniteMetricSpace::line(3);
        let y = Arc::new(
            FiniteMetricSpace::new(
                vec!["a".into(), "b".into(), "c".into(), "e".into()],
                FiniteMetricSpace::line(4).dist_rows(),
            )
            .unwrap(),
        );
        let f = PointMap::new(x.clone(), y.clone(), &["a".into(), "b".into(), "c".into()])
            .unwrap();
        let g = PointMap::new(x.clone(), y, &["a".into(), "b".into(), "e".into()]).unwrap();
        let mut m = BlockMatrix::zero(IndexSpace::from_space(x), 1);
        for i in 0..3 {
            for j in 0..3 {
                m.set_scalar(i, j, Complex64::new(1.0 + i as f64, j as f64))
                    .unwrap();
            }
        }
        let path = closeness_homotopy(&f, &g, &m).unwrap();
        let ts = t_grid(5);
        let ok = path
            .constancy_check(&ts, &"a".into(), &"b".into())
            .unwrap();
        assert!(ok.passed(), "{}", ok.render_text());
        assert_eq!(ok.entry("constant_block").unwrap().measured, Some(0.0));

        // hypothesis fails for (c, c): reported, not asserted
        let info = path
            .constancy_check(&ts, &"c".into(), &"c".into())
            .unwrap();
        assert!(info.passed());
        assert!(info
            .entry("constant_block")
            .unwrap()
            .witness
            .as_deref()
            .unwrap()
            .contains("hypothesis not met"));

        // and the (c,c) outer block genuinely varies along the path
        let b0 = path.eval(0.0).unwrap();
        let b5 = path.eval(0.5).unwrap();
        let cc0 = path.outer_block(&b0, 2, 2);
        let cc5 = path.outer_block(&b5, 2, 2);
        assert!(block_map_diff(&cc0, &cc5, 1) > 0.1);
    }

    #[test]
    fn blocks_outside_both_images_stay_zero() {
        let (f, g, m) = one_point_two_target();
        // enlarge Y so some label is outside both images
        let y2 = Arc::new(
            FiniteMetricSpace::new(
                vec!["a".into(), "b".into(), "z".into()],
                FiniteMetricSpace::line(3).dist_rows(),
            )
            .unwrap(),
        );
        let f2 = PointMap::new(f.source().clone(), y2.clone(), &["a".into()]).unwrap();
        let g2 = PointMap::new(g.source().clone(), y2, &["b".into()]).unwrap();
        let path = closeness_homotopy(&f2, &g2, &m).unwrap();
        let report = path
            .constancy_check(&t_grid(5), &"z".into(), &"z".into())
            .unwrap();
        assert!(report.passed());
        assert_eq!(report.entry("constant_block").unwrap().measured, Some(0.0));
    }
}
