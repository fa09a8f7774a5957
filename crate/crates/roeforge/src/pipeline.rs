//! End-to-end verifiers: functoriality of the pushforward, the identity law,
//! the corner diagram in the finite model, full homotopy invariance via the
//! chained rotation path, and the demonstration that the multiplicative
//! propagation bound fails where the additive one holds.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::cylinder::{slice_family, CoarseHomotopyData};
use crate::error::{Error, Result};
use crate::index::IndexSpace;
use crate::label::Label;
use crate::maps::{closeness_distance, compose, equibornologous_modulus, expansion_modulus, PointMap};
use crate::matrix::{
    block_norm, corner_embed, embed, pushforward, BlockMatrix, CBlock,
};
use crate::metric::FiniteMetricSpace;
use crate::report::VerificationReport;
use crate::rotation::{closeness_homotopy, ClosenessHomotopy, Involution, ENTRY_TOL};

/// Tolerance for sorted singular-value comparisons.
pub const SINGULAR_TOL: f64 = 1e-10;

/// Conjugates by the rotation at time t for the given involution.
fn conjugate(inv: &Involution, m: &BlockMatrix, t: f64) -> Result<BlockMatrix> {
    let rot = inv.rotation_blocks(t, m.block_dim())?;
    rot.multiply(m)?.multiply(&rot.adjoint())
}

/// The swap involution used by the functoriality square on a Z x Y x X index:
/// for every z and x it swaps (z, f(x), x) with (z, y0, x). The destination
/// side (z, y0, x) is designated first so the conjugation carries the
/// f-support over with sign +1 everywhere.
fn functoriality_involution(
    zyx: &Arc<IndexSpace>,
    f: &PointMap,
    y0: usize,
) -> Result<Involution> {
    let nz = zyx.factors()[0].n();
    let ny = zyx.factors()[1].n();
    let nx = zyx.factors()[2].n();
    debug_assert_eq!(zyx.n_points(), nz * ny * nx);
    let mut pairs = Vec::new();
    for z in 0..nz {
        for x in 0..nx {
            let fy = f.apply_idx(x);
            if fy != y0 {
                pairs.push((z * ny * nx + y0 * nx + x, z * ny * nx + fy * nx + x));
            }
        }
    }
    Involution::from_pairs(zyx.clone(), &pairs)
}

/// Embeds a matrix over Z x X into Z x Y x X at the fixed middle coordinate.
fn embed_at_middle(
    b: &BlockMatrix,
    zyx: &Arc<IndexSpace>,
    y0: usize,
) -> Result<BlockMatrix> {
    let zx = b.index();
    let nx = zx.inner_size();
    let map: Vec<usize> = (0..zx.n_points())
        .map(|i| zx.outer_of(i) * zyx.inner_size() + y0 * nx + zx.inner_of(i))
        .collect();
    embed(b, zyx.clone(), &map)
}

fn functoriality_once(
    f: &PointMap,
    g: &PointMap,
    m: &BlockMatrix,
    y0: usize,
    ts: &[f64],
) -> Result<(f64, f64, f64)> {
    let fm = pushforward(f, m)?;
    let a = pushforward(g, &fm)?;
    let gf = compose(g, f)?;
    let b = pushforward(&gf, m)?;
    let b_embedded = embed_at_middle(&b, a.index(), y0)?;
    let inv = functoriality_involution(a.index(), f, y0)?;
    let conj_end = conjugate(&inv, &a, 1.0)?;
    let diff = conj_end.max_entry_diff(&b_embedded)?;
    // along the path the swapped points share their Z coordinate, so the
    // rotation contributes nothing to Z-propagation
    let bound = a.propagation() + 2.0 * inv.propagation();
    let mut worst_prop = 0.0f64;
    for &t in ts {
        worst_prop = worst_prop.max(conjugate(&inv, &a, t)?.propagation());
    }
    Ok((diff, worst_prop, bound))
}

/// Functoriality of the pushforward: conjugating the iterated pushforward by
/// the swap rotation lands exactly on the composite pushforward embedded at
/// the base point, for every sample and independently of the base point.
pub fn verify_functoriality(
    f: &PointMap,
    g: &PointMap,
    samples: &[BlockMatrix],
    y0: &Label,
    ts: &[f64],
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("functoriality");
    if f.target() != g.source() {
        return Err(Error::structural("need composable maps X -> Y -> Z"));
    }
    let y = f.target();
    let y0i = y.require_index(y0)?;
    // a second base point to witness independence of the choice
    let y0_alt = if y.n() > 1 { y.n() - 1 } else { 0 };
    let y0_alt = if y0_alt == y0i && y.n() > 1 { 0 } else { y0_alt };

    let mut worst_diff = (0.0f64, 0usize);
    let mut worst_prop: Option<(f64, f64)> = None;
    let mut independent = true;
    for (k, m) in samples.iter().enumerate() {
        let (diff, prop, bound) = functoriality_once(f, g, m, y0i, ts)?;
        if diff > worst_diff.0 {
            worst_diff = (diff, k);
        }
        if worst_prop.map_or(true, |(p, b)| prop - bound > p - b) {
            worst_prop = Some((prop, bound));
        }
        let (diff_alt, _, _) = functoriality_once(f, g, m, y0_alt, ts)?;
        if (diff <= ENTRY_TOL) != (diff_alt <= ENTRY_TOL) {
            independent = false;
        }
    }
    report.assert_le(
        "conjugation_identity",
        worst_diff.0,
        ENTRY_TOL,
        Some(format!("worst at sample {}", worst_diff.1)),
    );
    if let Some((prop, bound)) = worst_prop {
        report.assert_le("path_propagation_bound", prop, bound, None);
    }
    report.record("y0_independence", independent, None, None, None);
    Ok(report)
}

/// The identity law: pushing forward along the identity and rotating the
/// graph onto the base-point corner recovers the corner embedding of the
/// original matrix.
pub fn verify_identity_law(
    x: &Arc<FiniteMetricSpace>,
    samples: &[BlockMatrix],
    ts: &[f64],
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("identity_law");
    let id = PointMap::identity(x.clone());
    let x0 = 0usize;
    let nx = x.n();
    let mut worst_diff = (0.0f64, 0usize);
    let mut worst_prop: Option<(f64, f64)> = None;
    for (k, m) in samples.iter().enumerate() {
        let idm = pushforward(&id, m)?;
        let xx = idm.index().clone();
        // corner target: x -> (x0, x)
        let map: Vec<usize> = (0..nx).map(|i| x0 * nx + i).collect();
        let corner = embed(m, xx.clone(), &map)?;
        let pairs: Vec<(usize, usize)> = (0..nx)
            .filter(|&i| i != x0)
            .map(|i| (x0 * nx + i, i * nx + i)) // corner destination first
            .collect();
        let inv = Involution::from_pairs(xx, &pairs)?;
        let end = conjugate(&inv, &idm, 1.0)?;
        let diff = end.max_entry_diff(&corner)?;
        if diff > worst_diff.0 {
            worst_diff = (diff, k);
        }
        let bound = idm.propagation() + 2.0 * inv.propagation();
        for &t in ts {
            let p = conjugate(&inv, &idm, t)?.propagation();
            if worst_prop.map_or(true, |(wp, wb)| p - bound > wp - wb) {
                worst_prop = Some((p, bound));
            }
        }
    }
    report.assert_le(
        "corner_endpoint",
        worst_diff.0,
        ENTRY_TOL,
        Some(format!("worst at sample {}", worst_diff.1)),
    );
    if let Some((p, b)) = worst_prop {
        report.assert_le("path_propagation_bound", p, b, None);
    }
    Ok(report)
}

/// Flattens a block matrix over an n-point index into the scalar matrix over
/// an n*d-point line: the explicit enumeration standing in for the stability
/// isomorphism.
fn flatten_to_scalar(m: &BlockMatrix) -> Result<BlockMatrix> {
    let n = m.index().n_points();
    let d = m.block_dim();
    let flat_index = IndexSpace::from_space(FiniteMetricSpace::line(n * d));
    let mut out = BlockMatrix::zero(flat_index, 1);
    for (&(i, j), b) in m.blocks() {
        for r in 0..d {
            for c in 0..d {
                out.set_scalar(i as usize * d + r, j as usize * d + c, b[(r, c)])?;
            }
        }
    }
    Ok(out)
}

/// The corner diagram in the finite model: placing a block at a diagonal
/// corner and re-enumerating is conjugation by an isometry; it preserves
/// norm and singular values, and a rotation path connects the image back to
/// the block at the standard corner inside the enlarged algebra.
pub fn verify_corner_lemma(d: usize, samples: &[CBlock], ts: &[f64]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("corner_lemma");
    let n = 4usize;
    let x0 = 2usize;
    let space = FiniteMetricSpace::line(n);
    let index = IndexSpace::from_space(space);
    let flat_index = IndexSpace::from_space(FiniteMetricSpace::line(n * d));

    let mut worst_sv = 0.0f64;
    let mut worst_norm = 0.0f64;
    let mut worst_end = 0.0f64;
    for b in samples {
        if b.nrows() != d || b.ncols() != d {
            return Err(Error::structural("sample block has the wrong dimension"));
        }
        // iota then the enumeration: W b W* with W e_k = e_{x0 d + k}
        let image = flatten_to_scalar(&corner_embed(index.clone(), x0, b.clone())?)?;

        // singular values agree with b's, padded by zeros
        let mut b_sv: Vec<f64> = b.singular_values().iter().copied().collect();
        b_sv.sort_by(|p, q| q.partial_cmp(p).expect("finite"));
        let im_sv = image.singular_values();
        for (k, v) in im_sv.iter().enumerate() {
            let want = b_sv.get(k).copied().unwrap_or(0.0);
            worst_sv = worst_sv.max((v - want).abs());
        }
        worst_norm = worst_norm.max((image.operator_norm() - block_norm(b)).abs());

        // rotation path from W b W* to the block at the standard corner
        let mut standard = BlockMatrix::zero(flat_index.clone(), 1);
        for r in 0..d {
            for c in 0..d {
                standard.set_scalar(r, c, b[(r, c)])?;
            }
        }
        let pairs: Vec<(usize, usize)> = (0..d).map(|k| (k, x0 * d + k)).collect();
        let inv = Involution::from_pairs(flat_index.clone(), &pairs)?;
        let end = conjugate(&inv, &image, 1.0)?;
        worst_end = worst_end.max(end.max_entry_diff(&standard)?);
        for &t in ts {
            // the path stays inside the enlarged algebra by construction;
            // evaluate to make sure it is defined at every sample
            let _ = conjugate(&inv, &image, t)?;
        }
    }
    report.assert_le("singular_values_preserved", worst_sv, SINGULAR_TOL, None);
    report.assert_le("norm_preserved", worst_norm, SINGULAR_TOL, None);
    report.assert_le("rotation_path_endpoint", worst_end, ENTRY_TOL, None);
    Ok(report)
}

/// The per-step paths of a chained homotopy with the global schedule
/// `u in [1, n_max]`, step n covering [n, n+1] with local time u - n.
pub struct ChainedHomotopy {
    pub steps: Vec<ClosenessHomotopy>,
}

impl ChainedHomotopy {
    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    /// (step index, local t) for a global parameter in [1, n_steps + 1].
    pub fn schedule(&self, u: f64) -> (usize, f64) {
        let step = ((u - 1.0).floor() as usize).min(self.steps.len() - 1);
        (step, u - 1.0 - step as f64)
    }

    pub fn eval_global(&self, u: f64) -> Result<BlockMatrix> {
        let (step, t) = self.schedule(u);
        self.steps[step].eval(t)
    }
}

/// Per-target-pair constancy data: the set of source points whose slice
/// values ever visit the pair, and the index from which the pair's outer
/// block is provably constant.
struct PairConstancy {
    threshold: u32,
}

fn pair_constancy(family: &[PointMap], y1: usize, y2: usize) -> PairConstancy {
    let n_max = family.len();
    let stat = &family[n_max - 1];
    let n_pts = stat.source().n();
    let x_prime: Vec<usize> = (0..n_pts)
        .filter(|&x| {
            let v = stat.apply_idx(x);
            v == y1 || v == y2
        })
        .collect();
    let in_x_prime = |x: usize| x_prime.binary_search(&x).is_ok();
    // smallest N with: for all n >= N the preimage of {y1,y2} is exactly X'
    // and the family is frozen on X'
    let mut threshold = 1u32;
    for n in (1..=n_max).rev() {
        let f_n = &family[n - 1];
        let frozen = x_prime.iter().all(|&x| f_n.apply_idx(x) == stat.apply_idx(x));
        let preimage_ok = (0..n_pts).all(|x| {
            let v = f_n.apply_idx(x);
            let hits = v == y1 || v == y2;
            hits == in_x_prime(x)
        });
        if !(frozen && preimage_ok) {
            threshold = (n + 1) as u32;
            break;
        }
    }
    PairConstancy { threshold }
}

/// The full homotopy-invariance verifier: slices the coarse homotopy, chains
/// the per-step conjugation paths, and checks junctions, global endpoints,
/// the uniform propagation bound, and eventual constancy of every outer
/// block past its computed threshold.
pub fn verify_homotopy_invariance(
    data: &CoarseHomotopyData,
    samples: &[BlockMatrix],
    local_ts: &[f64],
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("homotopy_invariance");
    let n_max = data.cylinder.max_height() + 1;
    let family = slice_family(data, n_max)?;
    let h_mod = expansion_modulus(&data.h);

    // consecutive slices are close, bounded by H's unit-step expansion
    let step_bound = h_mod.eval(1.0);
    let mut worst_step = 0.0f64;
    for w in family.windows(2) {
        worst_step = worst_step.max(closeness_distance(&w[0], &w[1])?);
    }
    report.assert_le("slice_step_bound", worst_step, step_bound, None);

    let fam_mod = equibornologous_modulus(&family)?;
    let max_step = worst_step;

    let ny = data.h.target().n();
    let mut worst_junction = 0.0f64;
    let mut worst_end0 = 0.0f64;
    let mut worst_end1 = 0.0f64;
    let mut worst_prop: Option<(f64, f64)> = None;
    let mut worst_constancy = 0.0f64;
    let mut max_threshold = 1u32;

    for m in samples {
        let mut steps = Vec::new();
        for w in family.windows(2) {
            steps.push(closeness_homotopy(&w[0], &w[1], m)?);
        }
        if steps.is_empty() {
            // single slice: the theorem degenerates to f = g
            let fm = pushforward(&data.f, m)?;
            let gm = pushforward(&data.g, m)?;
            worst_end0 = worst_end0.max(fm.max_entry_diff(&fm)?);
            worst_end1 = worst_end1.max(fm.max_entry_diff(&gm)?);
            let bound = fam_mod.eval(m.propagation()) + 2.0 * max_step;
            let p = fm.propagation();
            if worst_prop.map_or(true, |(wp, wb)| p - bound > wp - wb) {
                worst_prop = Some((p, bound));
            }
            continue;
        }
        let chain = ChainedHomotopy { steps };

        // junction consistency between consecutive steps
        for k in 0..chain.n_steps().saturating_sub(1) {
            let left = chain.steps[k].eval(1.0)?;
            let right = chain.steps[k + 1].eval(0.0)?;
            worst_junction = worst_junction.max(left.max_entry_diff(&right)?);
        }

        // global endpoints are the two pushforwards
        let start = chain.steps[0].eval(0.0)?;
        worst_end0 = worst_end0.max(start.max_entry_diff(&pushforward(&data.f, m)?)?);
        let finish = chain.steps[chain.n_steps() - 1].eval(1.0)?;
        worst_end1 = worst_end1.max(finish.max_entry_diff(&pushforward(&data.g, m)?)?);

        // uniform propagation bound across the whole chain
        let bound = fam_mod.eval(m.propagation()) + 2.0 * max_step;

        // sample the chain on the global grid, bucketing outer blocks once
        let mut by_pair: BTreeMap<(usize, usize), Vec<(f64, BTreeMap<(usize, usize), CBlock>)>> =
            BTreeMap::new();
        for step in 0..chain.n_steps() {
            for &t in local_ts {
                let u = (step + 1) as f64 + t;
                let eta = chain.steps[step].eval(t)?;
                let p = eta.propagation();
                if worst_prop.map_or(true, |(wp, wb)| p - bound > wp - wb) {
                    worst_prop = Some((p, bound));
                }
                let idx = eta.index().clone();
                let mut buckets: BTreeMap<(usize, usize), BTreeMap<(usize, usize), CBlock>> =
                    BTreeMap::new();
                for (&(i, j), b) in eta.blocks() {
                    let (i, j) = (i as usize, j as usize);
                    buckets
                        .entry((idx.outer_of(i), idx.outer_of(j)))
                        .or_default()
                        .insert((idx.inner_of(i), idx.inner_of(j)), b.clone());
                }
                for (pair, blockmap) in buckets {
                    by_pair.entry(pair).or_default().push((u, blockmap));
                }
            }
        }

        // eventual constancy: past each pair's threshold all sampled values
        // of its outer block agree
        for y1 in 0..ny {
            for y2 in 0..ny {
                let samples_for_pair = match by_pair.get(&(y1, y2)) {
                    Some(v) => v,
                    None => continue, // identically zero block
                };
                let pc = pair_constancy(&family, y1, y2);
                max_threshold = max_threshold.max(pc.threshold);
                let mut reference: Option<&BTreeMap<(usize, usize), CBlock>> = None;
                for (u, blockmap) in samples_for_pair {
                    if *u < pc.threshold as f64 {
                        continue;
                    }
                    match reference {
                        None => reference = Some(blockmap),
                        Some(r) => {
                            worst_constancy =
                                worst_constancy.max(block_maps_diff(r, blockmap, m.block_dim()));
                        }
                    }
                }
            }
        }
    }

    report.assert_le("junction_consistency", worst_junction, ENTRY_TOL, None);
    report.record(
        "global_endpoint_f",
        worst_end0 == 0.0,
        Some(worst_end0),
        Some(0.0),
        None,
    );
    report.assert_le("global_endpoint_g", worst_end1, ENTRY_TOL, None);
    if let Some((p, b)) = worst_prop {
        report.assert_le("uniform_propagation_bound", p, b, None);
    }
    report.assert_le("eventual_constancy", worst_constancy, ENTRY_TOL, None);
    report.info(
        "max_constancy_threshold",
        Some(max_threshold as f64),
        None,
    );
    Ok(report)
}

fn block_maps_diff(
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

/// The scaled-line counterexample: with the line metric halved, the shift
/// matrix has propagation 1/2 while its square has propagation 1, violating
/// the multiplicative bound; the additive bound holds with equality. On the
/// unit line the multiplicative form fails as well (2 > 1), so the additive
/// bound is the one asserted everywhere in this artifact.
pub fn demonstrate_propmult_gap() -> VerificationReport {
    let mut report = VerificationReport::new("propmult_gap");

    let scaled = Arc::new(
        FiniteMetricSpace::new(
            (0..3).map(Label::Int).collect(),
            vec![
                vec![0.0, 0.5, 1.0],
                vec![0.5, 0.0, 0.5],
                vec![1.0, 0.5, 0.0],
            ],
        )
        .expect("scaled line is structurally valid"),
    );
    for (name, space) in [
        ("scaled_line", scaled),
        ("unit_line", FiniteMetricSpace::line(3)),
    ] {
        let ix = IndexSpace::from_space(space);
        let mut s = BlockMatrix::zero(ix, 1);
        s.set_scalar(0, 1, Complex64::new(1.0, 0.0)).expect("in range");
        s.set_scalar(1, 2, Complex64::new(1.0, 0.0)).expect("in range");
        let s2 = s.multiply(&s).expect("same index");
        let (p, pp) = (s.propagation(), s2.propagation());
        report.info(
            &format!("{name}_multiplicative"),
            Some(pp),
            Some(format!(
                "prop(m1)=prop(m2)={p}; multiplicative bound {} {} measured {pp}",
                p * p,
                if pp <= p * p { "holds at" } else { "violated by" },
            )),
        );
        report.assert_le(&format!("{name}_additive"), pp, p + p, None);
    }

    // diagonal matrices: everything trivially zero
    let ix = IndexSpace::from_space(FiniteMetricSpace::line(3));
    let mut dgn = BlockMatrix::zero(ix, 1);
    dgn.set_scalar(0, 0, Complex64::new(3.0, 0.0)).expect("in range");
    dgn.set_scalar(2, 2, Complex64::new(-1.0, 0.0)).expect("in range");
    let d2 = dgn.multiply(&dgn).expect("same index");
    report.info(
        "diagonal_trivial",
        Some(d2.propagation()),
        Some("diagonal product keeps propagation 0".into()),
    );
    report
}
