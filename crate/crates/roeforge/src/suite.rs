//! The full verification suite: every verifier run over seeded generated
//! instances, aggregated into one deterministic report. Identical seed and
//! config produce byte-identical JSON output.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::generate::{InstanceGenerator, SuiteConfig};
use crate::index::IndexSpace;
use crate::maps::{closeness_distance, expansion_modulus};
use crate::matrix::{pushforward, schur_constant, BlockMatrix};
use crate::pipeline::{
    demonstrate_propmult_gap, verify_corner_lemma, verify_functoriality,
    verify_homotopy_invariance, verify_identity_law,
};
use crate::report::{CheckEntry, CheckStatus, VerificationReport};
use crate::rotation::{closeness_homotopy, rotation_suite_report, t_grid};

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub info: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub config: SuiteConfig,
    pub sections: Vec<VerificationReport>,
    pub summary: Summary,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            out.push_str(&s.render_text());
        }
        out.push_str(&format!(
            "{} checks: {} passed, {} failed, {} informational\n",
            self.summary.checks, self.summary.passed, self.summary.failed, self.summary.info
        ));
        out
    }
}

/// Folds many per-instance reports into one: per check name, the worst
/// measurement and the overall status, with a witness naming the first
/// failing instance.
fn aggregate(name: &str, reports: &[VerificationReport]) -> VerificationReport {
    let mut out = VerificationReport::new(name);
    let mut order: Vec<String> = Vec::new();
    let mut by_name: BTreeMap<String, Vec<(usize, &CheckEntry)>> = BTreeMap::new();
    for (k, r) in reports.iter().enumerate() {
        for e in &r.entries {
            if !by_name.contains_key(&e.name) {
                order.push(e.name.clone());
            }
            by_name.entry(e.name.clone()).or_default().push((k, e));
        }
    }
    for check in order {
        let entries = &by_name[&check];
        let any_fail = entries.iter().find(|(_, e)| e.status == CheckStatus::Fail);
        let all_info = entries.iter().all(|(_, e)| e.status == CheckStatus::Info);
        // worst = largest measured relative to its bound when bounds exist,
        // otherwise largest measured
        let worst = entries
            .iter()
            .filter(|(_, e)| e.measured.is_some())
            .max_by(|(_, a), (_, b)| {
                let ka = a.measured.unwrap() - a.bound.unwrap_or(0.0);
                let kb = b.measured.unwrap() - b.bound.unwrap_or(0.0);
                ka.partial_cmp(&kb).expect("finite measurements")
            });
        let (measured, bound) = worst
            .map(|(_, e)| (e.measured, e.bound))
            .unwrap_or((None, None));
        let witness = any_fail
            .map(|(k, e)| format!("instance {k}: {}", e.witness.clone().unwrap_or_default()));
        out.entries.push(CheckEntry {
            name: format!("{check} [n={}]", entries.len()),
            status: if any_fail.is_some() {
                CheckStatus::Fail
            } else if all_info {
                CheckStatus::Info
            } else {
                CheckStatus::Pass
            },
            measured,
            bound,
            witness,
        });
    }
    out
}

pub fn metric_growth_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "metric_growth");
    let mut report = VerificationReport::new("metric_growth");
    let mut validated = 0usize;
    let mut monotone = 0usize;
    let mut first_fail: Option<String> = None;
    let n = cfg.samples.metric_spaces;
    for k in 0..n {
        let s = gen.space(1, cfg.spaces.max_points);
        let v = s.validate();
        if v.passed() {
            validated += 1;
        } else if first_fail.is_none() {
            first_fail = Some(format!("space {k}: {:?}", v.violations.first()));
        }
        let gp = s.growth_profile();
        let mono = gp.windows(2).all(|w| w[0].1 <= w[1].1)
            && gp.last().map(|&(_, c)| c == s.n()).unwrap_or(false);
        if mono {
            monotone += 1;
        } else if first_fail.is_none() {
            first_fail = Some(format!("space {k}: growth profile not monotone"));
        }
    }
    report.record(
        "all_spaces_validate",
        validated == n,
        Some(validated as f64),
        Some(n as f64),
        first_fail.clone(),
    );
    report.record(
        "growth_profiles_monotone",
        monotone == n,
        Some(monotone as f64),
        Some(n as f64),
        first_fail,
    );
    report
}

pub fn propagation_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "propagation_subadditivity");
    let mut report = VerificationReport::new("propagation_subadditivity");
    let mut violations = 0usize;
    let mut worst: Option<(f64, f64)> = None;
    let n = cfg.samples.propagation_pairs;
    for _ in 0..n {
        let space = gen.space(2, 20);
        let ix = IndexSpace::from_space(space);
        let d = gen.block_dim().min(3);
        let m1 = gen.matrix(&ix, d);
        let m2 = gen.matrix(&ix, d);
        let prod = m1.multiply(&m2).expect("same index");
        let (p, bound) = (prod.propagation(), m1.propagation() + m2.propagation());
        if p > bound {
            violations += 1;
        }
        if worst.map_or(true, |(wp, wb)| p - bound > wp - wb) {
            worst = Some((p, bound));
        }
    }
    report.record(
        "subadditive_under_product",
        violations == 0,
        worst.map(|(p, _)| p),
        worst.map(|(_, b)| b),
        Some(format!("{violations} violations in {n} pairs")),
    );
    report.merge(demonstrate_propmult_gap());
    report
}

pub fn norm_inequality_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "norm_inequality");
    let mut report = VerificationReport::new("norm_inequality");
    let mut violations = 0usize;
    let mut tightest: Option<(f64, f64)> = None;
    let n = cfg.samples.norm_matrices;
    for _ in 0..n {
        let space = gen.space(2, 20);
        let ix = IndexSpace::from_space(space.clone());
        let d = gen.block_dim();
        let m = gen.matrix(&ix, d);
        let norm = m.operator_norm();
        let constant = schur_constant(&space, m.propagation()) as f64;
        let bound = constant * m.max_block_norm();
        if norm > bound + cfg.tolerances.schur * bound.max(1.0) {
            violations += 1;
        }
        if tightest.map_or(true, |(tn, tb)| norm - bound > tn - tb) {
            tightest = Some((norm, bound));
        }
    }
    report.record(
        "schur_bound",
        violations == 0,
        tightest.map(|(nm, _)| nm),
        tightest.map(|(_, b)| b),
        Some(format!("{violations} violations in {n} matrices")),
    );
    report
}

/// The *-homomorphism, isometry, and propagation checks for one pushforward
/// instance. Also the engine behind the verify-pushforward subcommand.
pub fn pushforward_report(
    f: &crate::maps::PointMap,
    m1: &BlockMatrix,
    m2: &BlockMatrix,
    alpha: num_complex::Complex64,
    tol: &crate::generate::Tolerances,
) -> crate::error::Result<VerificationReport> {
    let mut report = VerificationReport::new("pushforward");
    let p1 = pushforward(f, m1)?;
    let p2 = pushforward(f, m2)?;

    let sum = pushforward(f, &m1.add(m2)?)?;
    report.assert_le(
        "additive",
        sum.max_entry_diff(&p1.add(&p2)?)?,
        tol.entry,
        None,
    );
    let prod = pushforward(f, &m1.multiply(m2)?)?;
    report.assert_le(
        "multiplicative",
        prod.max_entry_diff(&p1.multiply(&p2)?)?,
        tol.entry,
        None,
    );
    let adj = pushforward(f, &m1.adjoint())?;
    report.assert_le("adjoint", adj.max_entry_diff(&p1.adjoint())?, tol.entry, None);
    let scaled = pushforward(f, &m1.scale(alpha))?;
    report.assert_le(
        "linear",
        scaled.max_entry_diff(&p1.scale(alpha))?,
        tol.entry,
        None,
    );
    let (na, nb) = (p1.operator_norm(), m1.operator_norm());
    report.assert_le(
        "isometry_relative",
        (na - nb).abs() / nb.max(1.0),
        tol.isometry,
        None,
    );
    let modulus = expansion_modulus(f);
    report.assert_le(
        "propagation_bound",
        p1.propagation(),
        modulus.eval(m1.propagation()),
        None,
    );
    Ok(report)
}

pub fn pushforward_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "pushforward");
    let n = cfg.samples.pushforward_triples;
    let mut reports = Vec::with_capacity(n);
    for _ in 0..n {
        let x = gen.space(2, 14);
        let y = gen.space(2, 14);
        let f = gen.map(&x, &y);
        let ix = IndexSpace::from_space(x);
        let d = gen.block_dim().min(3);
        let m1 = gen.matrix(&ix, d);
        let m2 = gen.matrix(&ix, d);
        let alpha = num_complex::Complex64::new(
            gen.rng().gen_range(-2.0..2.0),
            gen.rng().gen_range(-2.0..2.0),
        );
        reports.push(
            pushforward_report(&f, &m1, &m2, alpha, &cfg.tolerances)
                .expect("generated triple is compatible"),
        );
    }
    aggregate("pushforward", &reports)
}

pub fn rotation_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "rotation");
    let ts = t_grid(cfg.t_grid);
    let n = cfg.samples.rotation_involutions;
    let mut reports = Vec::with_capacity(n);
    for _ in 0..n {
        let space = gen.space(2, cfg.spaces.max_points);
        let ix = IndexSpace::from_space(space);
        let inv = gen.involution(&ix, 12);
        reports.push(rotation_suite_report(&inv, &ts));
    }
    aggregate("rotation", &reports)
}

/// Endpoint, propagation, and block-constancy checks for one close pair and
/// one matrix. Also the engine behind the verify-homotopy subcommand.
pub fn closeness_report(
    f: &crate::maps::PointMap,
    g: &crate::maps::PointMap,
    m: &BlockMatrix,
    ts: &[f64],
) -> crate::error::Result<VerificationReport> {
    let path = closeness_homotopy(f, g, m)?;
    let mut r = VerificationReport::new("closeness_homotopy");
    r.merge(path.endpoint_check());
    r.merge(path.propagation_bound_check(ts));
    r.merge(constancy_sweep(&path, ts));
    Ok(r)
}

pub fn closeness_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "closeness_homotopy");
    let ts = t_grid(cfg.t_grid);
    let n = cfg.samples.closeness_triples;
    let mut reports = Vec::with_capacity(n);
    for _ in 0..n {
        let x = gen.space(2, 12);
        let y = gen.space(2, 12);
        let f = gen.map(&x, &y);
        let g = gen.map(&x, &y);
        let ix = IndexSpace::from_space(x);
        let d = gen.block_dim().min(2);
        let m = gen.matrix(&ix, d);
        reports.push(closeness_report(&f, &g, &m, &ts).expect("compatible triple"));
    }
    aggregate("closeness_homotopy", &reports)
}

/// Constancy of every outer block whose hypothesis holds, in one pass over
/// the sampled path.
pub fn constancy_sweep(
    path: &crate::rotation::ClosenessHomotopy,
    ts: &[f64],
) -> VerificationReport {
    let mut report = VerificationReport::new("constancy");
    let ny = path.f.target().n();
    let nx = path.f.source().n();
    // hypothesis per target pair: every x either misses {y1,y2} under both
    // maps or is a coincidence point
    let mut eligible: Vec<(usize, usize)> = Vec::new();
    for y1 in 0..ny {
        for y2 in 0..ny {
            let ok = (0..nx).all(|x| {
                let (fy, gy) = (path.f.apply_idx(x), path.g.apply_idx(x));
                let touches = fy == y1 || fy == y2 || gy == y1 || gy == y2;
                !touches || fy == gy
            });
            if ok {
                eligible.push((y1, y2));
            }
        }
    }
    let mut worst = 0.0f64;
    let mut reference: BTreeMap<(usize, usize), BTreeMap<(u32, u32), crate::matrix::CBlock>> =
        BTreeMap::new();
    let mut first = true;
    for &t in ts {
        let eta = path.eval(t).expect("t in range");
        let idx = eta.index().clone();
        let mut buckets: BTreeMap<(usize, usize), BTreeMap<(u32, u32), crate::matrix::CBlock>> =
            BTreeMap::new();
        for (&(i, j), b) in eta.blocks() {
            let pair = (idx.outer_of(i as usize), idx.outer_of(j as usize));
            buckets.entry(pair).or_default().insert((i, j), b.clone());
        }
        if first {
            for &pair in &eligible {
                reference.insert(pair, buckets.remove(&pair).unwrap_or_default());
            }
            first = false;
        } else {
            for &pair in &eligible {
                let current = buckets.remove(&pair).unwrap_or_default();
                let r = &reference[&pair];
                let d = path.f_push.block_dim();
                let zero = crate::matrix::CBlock::zeros(d, d);
                for (k, v) in r.iter() {
                    let w = current.get(k).unwrap_or(&zero);
                    worst = worst.max(crate::matrix::block_max_abs(&(v - w)));
                }
                for (k, w) in current.iter() {
                    if !r.contains_key(k) {
                        worst = worst.max(crate::matrix::block_max_abs(w));
                    }
                }
            }
        }
    }
    report.assert_le(
        "eligible_blocks_constant",
        worst,
        crate::rotation::ENTRY_TOL,
        Some(format!("{} eligible pairs", eligible.len())),
    );
    report
}

/// Associativity, the unit law, and the adjoint involution on random
/// triples: the *-algebra structure behind every other check.
pub fn star_algebra_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "star_algebra");
    let mut report = VerificationReport::new("star_algebra");
    let mut worst_assoc = 0.0f64;
    let mut worst_adj_norm = 0.0f64;
    let mut involution_exact = true;
    let mut unit_exact = true;
    for _ in 0..100 {
        let space = gen.space(2, 12);
        let ix = IndexSpace::from_space(space);
        let d = gen.block_dim().min(3);
        let a = gen.matrix(&ix, d);
        let b = gen.matrix(&ix, d);
        let c = gen.matrix(&ix, d);
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        worst_assoc = worst_assoc.max(left.max_entry_diff(&right).unwrap());

        if a.adjoint().adjoint().max_entry_diff(&a).unwrap() != 0.0 {
            involution_exact = false;
        }
        worst_adj_norm = worst_adj_norm
            .max((a.adjoint().operator_norm() - a.operator_norm()).abs());

        let id = BlockMatrix::identity(ix, d);
        if a.multiply(&id).unwrap().max_entry_diff(&a).unwrap() != 0.0
            || id.multiply(&a).unwrap().max_entry_diff(&a).unwrap() != 0.0
        {
            unit_exact = false;
        }
    }
    report.assert_le("associativity", worst_assoc, cfg.tolerances.entry, None);
    report.record("adjoint_involution_exact", involution_exact, None, None, None);
    report.assert_le(
        "adjoint_isometric",
        worst_adj_norm,
        cfg.tolerances.isometry,
        None,
    );
    report.record("unit_law_exact", unit_exact, None, None, None);
    report
}

pub fn functoriality_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "functoriality");
    let ts = t_grid(5);
    let n = cfg.samples.functoriality_tuples;
    let mut reports = Vec::with_capacity(n);
    for _ in 0..n {
        let x = gen.space(2, 6);
        let y = gen.space(2, 6);
        let z = gen.space(2, 6);
        let f = gen.map(&x, &y);
        let g = gen.map(&y, &z);
        let ix = IndexSpace::from_space(x);
        let d = gen.block_dim().min(2);
        let m = gen.matrix(&ix, d);
        let y0 = y.label(gen.rng().gen_range(0..y.n())).clone();
        reports.push(
            verify_functoriality(&f, &g, &[m], &y0, &ts).expect("composable tuple"),
        );
    }
    aggregate("functoriality", &reports)
}

pub fn identity_law_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "identity_law");
    let ts = t_grid(5);
    let n = cfg.samples.identity_samples;
    let mut reports = Vec::with_capacity(n);
    for _ in 0..n {
        let x = gen.space(1, 8);
        let ix = IndexSpace::from_space(x.clone());
        let d = gen.block_dim().min(2);
        let m = gen.matrix(&ix, d);
        reports.push(verify_identity_law(&x, &[m], &ts).expect("valid space"));
    }
    aggregate("identity_law", &reports)
}

pub fn corner_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "corner_lemma");
    let ts = t_grid(5);
    let d = 2usize;
    let blocks: Vec<crate::matrix::CBlock> = (0..20).map(|_| gen.block(d)).collect();
    verify_corner_lemma(d, &blocks, &ts).expect("well-formed blocks")
}

pub fn homotopy_invariance_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "homotopy_invariance");
    let local_ts = t_grid(5);
    let n = cfg.samples.homotopy_instances;
    let mut reports = Vec::with_capacity(n);
    for _ in 0..n {
        let data = gen.homotopy(15, 12);
        let ix = IndexSpace::from_space(data.f.source().clone());
        let d = gen.block_dim().min(2);
        let m = gen.matrix(&ix, d);
        reports.push(
            verify_homotopy_invariance(&data, &[m], &local_ts).expect("valid homotopy"),
        );
    }
    aggregate("homotopy_invariance", &reports)
}

/// Consistency checks tying the closeness pseudometric and composition law
/// to random instances; cheap, so they ride along with every run.
pub fn coarse_map_section(cfg: &SuiteConfig) -> VerificationReport {
    let mut gen = InstanceGenerator::new(cfg, "coarse_maps");
    let mut report = VerificationReport::new("coarse_maps");
    let mut worst_tri = 0.0f64;
    let mut comp_ok = true;
    let mut sym_ok = true;
    for _ in 0..100 {
        let x = gen.space(2, 15);
        let y = gen.space(2, 15);
        let f = gen.map(&x, &y);
        let g = gen.map(&x, &y);
        let h = gen.map(&x, &y);
        let (dfg, dgh, dfh) = (
            closeness_distance(&f, &g).unwrap(),
            closeness_distance(&g, &h).unwrap(),
            closeness_distance(&f, &h).unwrap(),
        );
        worst_tri = worst_tri.max(dfh - (dfg + dgh));
        if closeness_distance(&g, &f).unwrap() != dfg {
            sym_ok = false;
        }
        let z = gen.space(2, 15);
        let k = gen.map(&y, &z);
        let mk = expansion_modulus(&k);
        let mf = expansion_modulus(&f);
        let mkf = expansion_modulus(&crate::maps::compose(&k, &f).unwrap());
        for (nn, m) in &mkf.table {
            if *m > mk.eval(mf.eval(*nn)) {
                comp_ok = false;
            }
        }
    }
    report.assert_le("closeness_triangle", worst_tri, 0.0, None);
    report.record("closeness_symmetric", sym_ok, None, None, None);
    report.record("composition_modulus_law", comp_ok, None, None, None);
    report
}

/// Runs every section and aggregates the summary.
pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let sections = vec![
        metric_growth_section(cfg),
        coarse_map_section(cfg),
        star_algebra_section(cfg),
        propagation_section(cfg),
        norm_inequality_section(cfg),
        pushforward_section(cfg),
        rotation_section(cfg),
        closeness_section(cfg),
        functoriality_section(cfg),
        identity_law_section(cfg),
        corner_section(cfg),
        homotopy_invariance_section(cfg),
    ];
    let mut summary = Summary {
        checks: 0,
        passed: 0,
        failed: 0,
        info: 0,
    };
    for s in &sections {
        for e in &s.entries {
            summary.checks += 1;
            match e.status {
                CheckStatus::Pass => summary.passed += 1,
                CheckStatus::Fail => summary.failed += 1,
                CheckStatus::Info => summary.info += 1,
            }
        }
    }
    SuiteReport {
        seed: cfg.seed,
        config: cfg.clone(),
        sections,
        summary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> SuiteConfig {
        let mut cfg = SuiteConfig::default();
        cfg.samples.metric_spaces = 5;
        cfg.samples.propagation_pairs = 5;
        cfg.samples.norm_matrices = 5;
        cfg.samples.pushforward_triples = 5;
        cfg.samples.rotation_involutions = 3;
        cfg.samples.closeness_triples = 3;
        cfg.samples.functoriality_tuples = 3;
        cfg.samples.identity_samples = 3;
        cfg.samples.homotopy_instances = 2;
        cfg.t_grid = 5;
        cfg
    }

    #[test]
    fn tiny_suite_passes() {
        let report = run_suite(&tiny_config());
        assert!(report.passed(), "{}", report.render_text());
    }

    #[test]
    fn suite_is_deterministic() {
        let a = run_suite(&tiny_config()).to_json();
        let b = run_suite(&tiny_config()).to_json();
        assert_eq!(a, b);
    }
}
