//! Property batteries over seeded random instances, grouped by module.
//!
//! Each battery produces one [`Check`]. A battery that errors is reported as
//! failed with the error in its detail.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::affine::{affine_is_maximal, affine_pi, maximal_convex_affinity_falsifier, AffineSet};
use crate::error::{QposError, Result};
use crate::fitzpatrick::{conj_eval, g_phi_member, hull_samples, phi_build, repr_hull_member, MaxAffineFn};
use crate::gen::{self, rng_for, Rng8};
use crate::hilbert::{
    closed_repr_member, g_phi_closed_member, line_corollary_check, midpoint_ball_check, phi_closed_eval,
    phi_conj_closed_eval, policy_box, ClosedSetDescriptor,
};
use crate::lipschitz::{
    closed_domain_repr_probe, identity_example_check, lipschitz_check, mcshane_extend_scalar,
    mcshane_extend_scalar_upper, phi_graph_eval, GraphSet, LipschitzSpace,
};
use crate::maximality::{
    extension_continuum, ni_type_check, premax_certify, third_polar_check, Classification, PremaxTarget,
};
use crate::minimal::{convmin_check_max_affine, envelope_eval, fund_ineq_check, minimal_selfconj_probe, EnvelopeQuery};
use crate::numerics::grid::BoxGrid;
use crate::numerics::linalg::{null_space, sym_eigen};
use crate::numerics::lp::{lp_min, LpOutcome, SimplexLp};
use crate::numerics::{min_q_over_affine, psd_on_subspace, AffineMin};
use crate::space::{conv_w_hull_member, is_q_positive, pi_member, PointSet, SsdSpace};
use crate::ssdb::{
    decompose_sum, isometry_check, make_hilbert_ssdb, make_monotone_ssdb, maximality_via_decomposition, pq_g0_member,
    Sign,
};
use crate::verdict::Status;
use crate::{Matrix, Vector};

pub const SUITES: [&str; 9] =
    ["core", "fitzpatrick", "affine", "maximality", "minimal", "ssdb", "lipschitz", "hilbert", "all"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub outcome: Status,
    pub detail: String,
}

/// Runs the named suite; `all` runs every module suite in order.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<Check>> {
    let batteries: Vec<(&str, &str, Battery)> = match name {
        "all" => SUITES[..8].iter().flat_map(|s| batteries(s)).collect(),
        s if SUITES.contains(&s) => batteries(s),
        other => return Err(QposError::InvalidArgument(format!("unknown suite '{other}'"))),
    };
    Ok(batteries
        .into_iter()
        .map(|(suite, check, f)| {
            let (outcome, detail) = match f(seed) {
                Ok(t) => t.finish(),
                Err(e) => (Status::Fails, format!("error: {e}")),
            };
            Check { suite: suite.into(), name: check.into(), outcome, detail }
        })
        .collect())
}

type Battery = fn(u64) -> Result<Tally>;

fn batteries(suite: &str) -> Vec<(&'static str, &'static str, Battery)> {
    let list: Vec<(&'static str, Battery)> = match suite {
        "core" => vec![
            ("pairing_symmetry", core_symmetry),
            ("parallelogram", core_parallelogram),
            ("set_inside_polar", core_inside_polar),
            ("antitone_polarity", core_antitone),
            ("lp_weak_duality", core_lp_duality),
            ("lp_permutation", core_lp_permutation),
            ("psd_on_subspace_sampling", core_psd_sampling),
            ("affine_min_lower_bound", core_affine_min),
        ],
        "fitzpatrick" => vec![
            ("conjugate_sandwich", fitz_sandwich),
            ("domain_lemma", fitz_domain),
            ("membership_chain", fitz_chain),
            ("polar_via_phi", fitz_mu),
            ("conjugate_is_largest", fitz_largest),
            ("hull_keeps_phi", fitz_hull_phi),
        ],
        "affine" => vec![
            ("polar_vs_sampling", affine_vs_sampling),
            ("maximal_rejects_outside", affine_maximal_rejects),
            ("maximal_is_symmetric", affine_symmetric),
        ],
        "maximality" => vec![
            ("third_polar", max_third_polar),
            ("extension_continuum", max_continuum),
            ("trichotomy", max_trichotomy),
            ("ni_vs_phi_above_q", max_ni),
            ("superset_on_pq", max_superset_pq),
            ("premaximal_polar_positive", max_polar_positive),
        ],
        "minimal" => vec![
            ("fundamental_inequality", min_fund),
            ("envelope_sandwich", min_envelope),
            ("envelope_cap", min_envelope_cap),
            ("convmin_identity", min_convmin),
            ("selfconj_identity", min_selfconj),
        ],
        "ssdb" => vec![
            ("isometry", ssdb_isometry),
            ("decomposition", ssdb_decomposition),
            ("g0_sets_sum", ssdb_g0_sum),
            ("pq_g0_maximal", ssdb_pq_maximal),
            ("g0_conjugate_refinement", ssdb_refinement),
            ("maximality_by_decomposition", ssdb_via_decomposition),
        ],
        "lipschitz" => vec![
            ("lipschitz_iff_q_positive", lip_equiv),
            ("phi_graph_vs_generic", lip_phi),
            ("mcshane", lip_mcshane),
            ("identity_example", lip_identity),
            ("nondegenerate", lip_nondegenerate),
            ("separating_extensions", lip_separating),
        ],
        "hilbert" => vec![
            ("phi_closed_vs_generic", hil_phi),
            ("conjugate_lower_bound", hil_conj_lower),
            ("descriptors_q_positive", hil_q_positive),
            ("representation", hil_repr),
            ("two_points", hil_two_points),
            ("cross_example", hil_cross),
            ("line_corollary", hil_line),
        ],
        _ => vec![],
    };
    let s: &'static str = SUITES.iter().find(|x| **x == suite).copied().unwrap_or("");
    list.into_iter().map(|(n, f)| (s, n, f)).collect()
}

struct Tally {
    checked: usize,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checked: 0, failures: 0, first: None }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn finish(self) -> (Status, String) {
        match self.first {
            None => (Status::Holds, format!("{} checks", self.checked)),
            Some(f) => (Status::Fails, format!("{}/{} failed; first: {f}", self.failures, self.checked)),
        }
    }
}

fn v(x: &[f64]) -> Vector {
    Vector::from_column_slice(x)
}

fn mono(k: usize) -> Result<Arc<SsdSpace>> {
    Ok(Arc::new(SsdSpace::monotone(k)?))
}

fn random_symmetric(rng: &mut Rng8, n: usize) -> Result<SsdSpace> {
    let a = gen::uniform_mat(rng, n, n, 1.0);
    SsdSpace::new(&a + a.transpose())
}

/// The model spaces plus one random symmetric space.
fn assorted_spaces(rng: &mut Rng8) -> Result<Vec<SsdSpace>> {
    Ok(vec![
        SsdSpace::monotone(2)?,
        SsdSpace::hilbert(3)?,
        (*LipschitzSpace::new(1.5, 2, 1)?.space().as_ref()).clone(),
        random_symmetric(rng, 4)?,
    ])
}

fn random_sets(rng: &mut Rng8, count: usize) -> Result<Vec<PointSet>> {
    (0..count)
        .map(|_| {
            let k = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=10);
            gen::monotone_set(rng, k, m)
        })
        .collect()
}

// ---- core ----

fn core_symmetry(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "core_symmetry");
    let mut t = Tally::new();
    for sp in assorted_spaces(&mut rng)? {
        for _ in 0..250 {
            let b = gen::uniform_vec(&mut rng, sp.dim(), 5.0);
            let c = gen::uniform_vec(&mut rng, sp.dim(), 5.0);
            let (x, y) = (sp.pairing(&b, &c)?, sp.pairing(&c, &b)?);
            t.check(x == y, || format!("{x} != {y}"));
        }
    }
    Ok(t)
}

fn core_parallelogram(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "core_parallelogram");
    let mut t = Tally::new();
    for sp in assorted_spaces(&mut rng)? {
        for _ in 0..250 {
            let b = gen::uniform_vec(&mut rng, sp.dim(), 5.0);
            let c = gen::uniform_vec(&mut rng, sp.dim(), 5.0);
            let lhs = sp.q_value(&(&b - &c))?;
            let rhs = sp.q_value(&b)? - sp.pairing(&b, &c)? + sp.q_value(&c)?;
            let scale = 1.0 + lhs.abs().max(rhs.abs());
            t.check((lhs - rhs).abs() <= 1e-12 * scale * 10.0, || format!("{lhs} vs {rhs}"));
        }
    }
    Ok(t)
}

fn core_inside_polar(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "core_inside_polar");
    let mut t = Tally::new();
    for a in random_sets(&mut rng, 50)? {
        t.check(is_q_positive(&a).holds_p(), || "generated set not q-positive".into());
        for p in a.points() {
            t.check(pi_member(&a, p)?.holds_p(), || format!("{:?} not in polar", p.as_slice()));
        }
    }
    Ok(t)
}

fn core_antitone(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "core_antitone");
    let mut t = Tally::new();
    for big in random_sets(&mut rng, 30)? {
        let keep = rng.gen_range(1..=big.len());
        let small = PointSet::new(big.space_arc().clone(), big.points()[..keep].to_vec())?;
        for b in gen::probes(&mut rng, big.space().dim(), 3.0, 50) {
            if pi_member(&big, &b)?.holds_p() {
                t.check(pi_member(&small, &b)?.holds_p(), || format!("{:?}", b.as_slice()));
            }
        }
    }
    Ok(t)
}

fn random_feasible_lp(rng: &mut Rng8) -> (SimplexLp, Vector) {
    let k = rng.gen_range(1..=3);
    let m = rng.gen_range(k + 1..=8);
    let moments = gen::uniform_mat(rng, k, m, 2.0);
    let costs = gen::uniform_vec(rng, m, 2.0);
    let raw = Vector::from_fn(m, |_, _| rng.gen_range(0.01..1.0));
    let lambda = &raw / raw.sum();
    let target = &moments * &lambda;
    (SimplexLp { costs, moments, target }, lambda)
}

fn core_lp_duality(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "core_lp_duality");
    let mut t = Tally::new();
    for _ in 0..100 {
        let (lp, lambda) = random_feasible_lp(&mut rng);
        let LpOutcome::Optimal { value, .. } = lp_min(&lp)? else {
            t.check(false, || "feasible instance reported infeasible".into());
            continue;
        };
        let m = lp.costs.len();
        let mut eq = Matrix::zeros(lp.moments.nrows() + 1, m);
        eq.view_mut((0, 0), (lp.moments.nrows(), m)).copy_from(&lp.moments);
        eq.row_mut(lp.moments.nrows()).fill(1.0);
        let null = null_space(&eq);
        for _ in 0..20 {
            let mut cand = lambda.clone();
            if null.ncols() > 0 {
                let d = &null * gen::uniform_vec(&mut rng, null.ncols(), 1.0);
                let mut smax = f64::INFINITY;
                for i in 0..m {
                    if d[i] < 0.0 {
                        smax = smax.min(-lambda[i] / d[i]);
                    }
                }
                let s = if smax.is_finite() { rng.gen_range(0.0..=smax) } else { 1.0 };
                cand += d * s;
            }
            let c = lp.costs.dot(&cand);
            t.check(value <= c + 1e-8, || format!("optimum {value} above feasible {c}"));
        }
    }
    Ok(t)
}

fn core_lp_permutation(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "core_lp_permutation");
    let mut t = Tally::new();
    for _ in 0..100 {
        let (lp, _) = random_feasible_lp(&mut rng);
        let m = lp.costs.len();
        let mut perm: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let permuted = SimplexLp {
            costs: Vector::from_fn(m, |i, _| lp.costs[perm[i]]),
            moments: Matrix::from_fn(lp.moments.nrows(), m, |r, c| lp.moments[(r, perm[c])]),
            target: lp.target.clone(),
        };
        let (a, b) = (lp_min(&lp)?.value(), lp_min(&permuted)?.value());
        t.check((a - b).abs() <= 1e-9 * (1.0 + a.abs()), || format!("{a} vs {b}"));
    }
    Ok(t)
}

fn core_psd_sampling(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "core_psd_sampling");
    let mut t = Tally::new();
    for _ in 0..20 {
        let sp = random_symmetric(&mut rng, 4)?;
        let d = rng.gen_range(1..=3);
        let basis = gen::uniform_mat(&mut rng, 4, d, 1.0);
        let verdict = psd_on_subspace(sp.matrix(), &basis)?;
        let m = basis.transpose() * sp.matrix() * &basis;
        let sampled_min = (0..1000)
            .map(|_| {
                let u = gen::uniform_vec(&mut rng, d, 1.0);
                u.dot(&(&m * &u)) / u.norm_squared()
            })
            .fold(f64::INFINITY, f64::min);
        if verdict.holds_p() {
            t.check(sampled_min >= -1e-9, || format!("holds but sampled {sampled_min}"));
        } else {
            let w = verdict.witness.as_ref().and_then(|w| w.as_point()).unwrap_or_default();
            let qw = w.dot(&(sp.matrix() * &w));
            t.check(qw < 0.0, || format!("witness has form value {qw}"));
        }
    }
    Ok(t)
}

fn core_affine_min(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "core_affine_min");
    let mut t = Tally::new();
    let mut tried = 0;
    while tried < 20 {
        let sp = random_symmetric(&mut rng, 4)?;
        let d = rng.gen_range(1..=2);
        let basis = gen::uniform_mat(&mut rng, 4, d, 1.0);
        let r = gen::uniform_vec(&mut rng, 4, 2.0);
        let res = match min_q_over_affine(&sp, &r, &basis) {
            Ok(x) => x,
            Err(QposError::Precondition(_)) => continue,
            Err(e) => return Err(e),
        };
        tried += 1;
        let AffineMin::Value { value, minimizer } = res else {
            continue;
        };
        let at = sp.q_value(&(&r - &basis * &minimizer))?;
        t.check((at - value).abs() <= 1e-8 * (1.0 + value.abs()), || format!("{at} vs {value}"));
        for _ in 0..1000 {
            let tt = gen::uniform_vec(&mut rng, d, 5.0);
            let q = sp.q_value(&(&r - &basis * &tt))?;
            t.check(value <= q + 1e-8 * (1.0 + q.abs()), || format!("{value} above {q}"));
        }
    }
    Ok(t)
}

// ---- fitzpatrick ----

fn fitz_instances(seed: u64, label: &str) -> Result<(Rng8, Vec<PointSet>)> {
    let mut rng = rng_for(seed, label);
    let sets = random_sets(&mut rng, 50)?;
    Ok((rng, sets))
}

fn fitz_sandwich(seed: u64) -> Result<Tally> {
    let (mut rng, sets) = fitz_instances(seed, "fitz_sandwich")?;
    let mut t = Tally::new();
    for a in &sets {
        let f = phi_build(a);
        let sp = a.space();
        let mut probes = gen::probes(&mut rng, sp.dim(), 2.5, 200);
        probes.extend(hull_samples(a, 4, 200, rng.gen()));
        for b in probes {
            let c = conj_eval(&f, &b)?.value;
            if c.is_finite() {
                let fb = f.eval(&b)?;
                let qb = sp.q_value(&b)?;
                t.check(fb <= c + 1e-8 && qb <= c + 1e-8, || {
                    format!("phi {fb}, q {qb}, conj {c} at {:?}", b.as_slice())
                });
            }
        }
        for p in a.points() {
            let (fp, qp, cp) = (f.eval(p)?, sp.q_value(p)?, conj_eval(&f, p)?.value);
            t.check((fp - qp).abs() <= 1e-8 && (cp - qp).abs() <= 1e-8, || {
                format!("on A: phi {fp}, q {qp}, conj {cp}")
            });
        }
    }
    Ok(t)
}

fn fitz_domain(seed: u64) -> Result<Tally> {
    let (mut rng, sets) = fitz_instances(seed, "fitz_domain")?;
    let mut t = Tally::new();
    for a in &sets {
        let f = phi_build(a);
        let mut probes = gen::probes(&mut rng, a.space().dim(), 2.5, 100);
        probes.extend(hull_samples(a, 3, 100, rng.gen()));
        for b in probes {
            let finite = conj_eval(&f, &b)?.is_finite();
            let hull = conv_w_hull_member(a, &b)?.holds_p();
            t.check(finite == hull, || format!("conj finite {finite}, hull {hull} at {:?}", b.as_slice()));
        }
    }
    Ok(t)
}

fn fitz_chain(seed: u64) -> Result<Tally> {
    let (mut rng, mut sets) = fitz_instances(seed, "fitz_chain")?;
    let diag: Vec<Vector> = (-4..=4).map(|i| v(&[i as f64 * 0.5, i as f64 * 0.5])).collect();
    sets.push(PointSet::new(mono(1)?, diag)?);
    let mut t = Tally::new();
    for a in &sets {
        let mut probes = gen::probes(&mut rng, a.space().dim(), 2.5, 50);
        probes.extend(hull_samples(a, 4, 200, rng.gen()));
        for b in probes {
            let in_a = a.contains(&b);
            let repr = repr_hull_member(a, &b)?.holds_p();
            let g = g_phi_member(a, &b)?.holds_p();
            let last = pi_member(a, &b)?.holds_p() && conv_w_hull_member(a, &b)?.holds_p();
            let ok = (!in_a || repr) && (!repr || g) && (!g || last);
            t.check(ok, || format!("chain {in_a} {repr} {g} {last} at {:?}", b.as_slice()));
        }
    }
    Ok(t)
}

fn fitz_mu(seed: u64) -> Result<Tally> {
    let (mut rng, sets) = fitz_instances(seed, "fitz_mu")?;
    let mut t = Tally::new();
    for a in &sets {
        let f = phi_build(a);
        for b in gen::probes(&mut rng, a.space().dim(), 2.5, 200) {
            let pi = pi_member(a, &b)?;
            let gap = f.eval(&b)? - a.space().q_value(&b)?;
            if gap.abs() > 1e-8 {
                t.check(pi.holds_p() == (gap <= 1e-9), || format!("polar {} with gap {gap}", pi.status));
            }
        }
    }
    Ok(t)
}

fn fitz_largest(seed: u64) -> Result<Tally> {
    let (mut rng, sets) = fitz_instances(seed, "fitz_largest")?;
    let mut t = Tally::new();
    for a in sets.iter().take(20) {
        let sp = a.space();
        let n = sp.dim();
        let f = phi_build(a);
        let pieces: Vec<(Vector, f64)> = (0..5)
            .map(|_| {
                let s = gen::uniform_vec(&mut rng, n, 2.0);
                let o = a.points().iter().map(|p| s.dot(p) - sp.q(p)).fold(f64::NEG_INFINITY, f64::max);
                (s, o + rng.gen_range(0.0..0.5))
            })
            .collect();
        let h = MaxAffineFn::new(a.space_arc().clone(), pieces)?;
        let mut probes = gen::probes(&mut rng, n, 2.5, 50);
        probes.extend(hull_samples(a, 3, 50, rng.gen()));
        for b in probes {
            let c = conj_eval(&f, &b)?.value;
            if c.is_finite() {
                let hb = h.eval(&b)?;
                t.check(hb <= c + 1e-8, || format!("h {hb} above conj {c}"));
            }
        }
    }
    Ok(t)
}

fn fitz_hull_phi(seed: u64) -> Result<Tally> {
    let (mut rng, mut sets) = fitz_instances(seed, "fitz_hull_phi")?;
    sets.truncate(20);
    let flat: Vec<Vector> = (-4..=4).map(|i| v(&[i as f64 * 0.5, 0.0])).collect();
    sets.push(PointSet::new(mono(1)?, flat)?);
    let cross = [[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
    sets.push(PointSet::new(mono(1)?, cross.iter().map(|p| v(p)).collect())?);
    let mut t = Tally::new();
    let mut grown = 0;
    for a in &sets {
        let accepted: Vec<Vector> = hull_samples(a, 4, 200, rng.gen())
            .into_iter()
            .filter(|b| !a.contains(b))
            .filter(|b| repr_hull_member(a, b).map(|r| r.holds_p()).unwrap_or(false))
            .collect();
        if accepted.is_empty() {
            continue;
        }
        grown += 1;
        let c = a.extended(accepted)?;
        let (fa, fc) = (phi_build(a), phi_build(&c));
        for x in gen::probes(&mut rng, a.space().dim(), 3.0, 100) {
            let (va, vc) = (fa.eval(&x)?, fc.eval(&x)?);
            t.check((va - vc).abs() <= 1e-8 * (1.0 + va.abs()), || format!("{va} vs {vc}"));
        }
    }
    t.check(grown > 0, || "no instance gained hull points".into());
    Ok(t)
}

// ---- affine ----

fn random_q_positive_line(rng: &mut Rng8) -> Result<AffineSet> {
    let k = rng.gen_range(1..=2);
    let sp = mono(k)?;
    let tm = gen::monotone_matrix(rng, k);
    let u = gen::uniform_vec(rng, k, 1.0);
    let dir = Vector::from_iterator(2 * k, u.iter().copied().chain((&tm * &u).iter().copied()));
    let x0 = gen::uniform_vec(rng, 2 * k, 1.0);
    AffineSet::line(sp, x0, dir)
}

fn affine_vs_sampling(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "affine_vs_sampling");
    let mut t = Tally::new();
    for _ in 0..10 {
        let a = random_q_positive_line(&mut rng)?;
        let pi = affine_pi(&a)?;
        let scale = a.basis().norm();
        let sample = a.sample(40.0 / scale, 0.01 / scale)?;
        for b in gen::probes(&mut rng, a.space().dim(), 2.0, 1000) {
            let exact = pi.residual(&b)?;
            if exact.abs() <= 1e-3 {
                continue;
            }
            let sampled = pi_member(&sample, &b)?.holds_p();
            t.check(sampled == (exact >= 0.0), || format!("residual {exact}, sampled {sampled}"));
        }
    }
    Ok(t)
}

fn maximal_affine_instances(rng: &mut Rng8) -> Result<Vec<AffineSet>> {
    let mut out = vec![
        AffineSet::line(mono(1)?, v(&[0.0, 0.0]), v(&[1.0, 1.0]))?,
        AffineSet::line(mono(1)?, v(&[0.0, 0.0]), v(&[1.0, 0.0]))?,
    ];
    for k in 1..=3 {
        let tm = gen::monotone_matrix(rng, k);
        let basis = Matrix::from_fn(2 * k, k, |r, c| {
            if r < k {
                if r == c {
                    1.0
                } else {
                    0.0
                }
            } else {
                tm[(r - k, c)]
            }
        });
        out.push(AffineSet::new(mono(k)?, gen::uniform_vec(rng, 2 * k, 1.0), basis)?);
    }
    Ok(out)
}

fn affine_maximal_rejects(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "affine_maximal_rejects");
    let mut t = Tally::new();
    for a in maximal_affine_instances(&mut rng)? {
        let m = affine_is_maximal(&a)?;
        t.check(m.holds_p(), || format!("instance not maximal: {:?}", m.note));
        if !m.holds_p() {
            continue;
        }
        let pi = affine_pi(&a)?;
        for b in gen::probes(&mut rng, a.space().dim(), 3.0, 1000) {
            if a.distance(&b) > 1e-6 {
                t.check(!pi.contains(&b)?, || format!("{:?} accepted", b.as_slice()));
            }
        }
    }
    Ok(t)
}

fn affine_symmetric(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "affine_symmetric");
    let mut t = Tally::new();
    for a in maximal_affine_instances(&mut rng)? {
        for _ in 0..50 {
            let p = a.point(&gen::uniform_vec(&mut rng, a.dim(), 3.0));
            let refl = a.anchor() * 2.0 - &p;
            let scaled = a.anchor() + (&p - a.anchor()) * rng.gen_range(-3.0..3.0);
            t.check(a.contains(&refl) && a.contains(&scaled), || "not closed under reflection".into());
        }
    }
    // a closed half-line claimed maximal must be refuted
    let sp = mono(1)?;
    let half = |x: &Vector| (x[0] - x[1]).abs() <= 1e-12 && x[0] >= -1e-12;
    let probes: Vec<Vector> = (0..=20).map(|i| v(&[i as f64 * 0.1, i as f64 * 0.1])).collect();
    let r = maximal_convex_affinity_falsifier(&sp, half, &v(&[0.0, 0.0]), &probes, &[0.5, 2.0])?;
    t.check(r.fails_p(), || "half-line not refuted".into());
    Ok(t)
}

// ---- maximality ----

fn max_third_polar(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "max_third_polar");
    let mut t = Tally::new();
    let net: Vec<Vector> = BoxGrid::cube(2, 1.0, 0.1, 1)?.points().collect();
    for _ in 0..20 {
        let m = rng.gen_range(1..=5);
        let a = gen::monotone_set(&mut rng, 1, m)?;
        let r = third_polar_check(&a, &net, 0.1)?;
        t.check(!r.fails_p(), || format!("falsified: {:?}", r.note));
    }
    Ok(t)
}

fn max_continuum(_seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let o = PointSet::from_rows(mono(1)?, &[&[0.0, 0.0]])?;
    let fam = extension_continuum(&o, &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), 101)?;
    t.check(fam.lambdas.len() == 101, || "wrong family size".into());
    t.check(fam.q_x1x2 == -1.0, || format!("q(x1 - x2) = {}", fam.q_x1x2));
    t.check(fam.scaling_error <= 1e-12, || format!("scaling error {}", fam.scaling_error));
    for (l, m) in fam.lambdas.iter().zip(&fam.margins) {
        t.check((m - l * (1.0 - l)).abs() <= 1e-12, || format!("margin {m} at {l}"));
    }
    Ok(t)
}

fn max_trichotomy(_seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let g = BoxGrid::cube(2, 3.0, 0.05, 3)?;
    let d = AffineSet::line(mono(1)?, v(&[0.0, 0.0]), v(&[1.0, 1.0]))?;
    let r = premax_certify(PremaxTarget::Affine(&d), &g)?;
    t.check(r.classification == Classification::PremaximalVia202, || format!("identity: {}", r.classification));
    let h = AffineSet::line(mono(1)?, v(&[0.0, 0.0]), v(&[1.0, 0.0]))?;
    let r = premax_certify(PremaxTarget::Affine(&h), &g)?;
    t.check(r.classification == Classification::PremaximalViaAffinePi && r.pi_equals_domain == Some(true), || {
        format!("horizontal: {}", r.classification)
    });
    let o = PointSet::from_rows(mono(1)?, &[&[0.0, 0.0]])?;
    let r = premax_certify(PremaxTarget::Points(&o), &BoxGrid::cube(2, 2.0, 0.1, 3)?)?;
    let pair_ok = r.pi_positive.witness.as_ref().and_then(|w| w.as_pair()).is_some_and(|(p, q)| {
        o.space().q(&(&p - &q)) < 0.0
            && pi_member(&o, &p).map(|x| x.holds_p()).unwrap_or(false)
            && pi_member(&o, &q).map(|x| x.holds_p()).unwrap_or(false)
    });
    t.check(r.classification == Classification::NotPremaximal && pair_ok, || format!("origin: {}", r.classification));
    Ok(t)
}

fn max_ni(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "max_ni");
    let mut t = Tally::new();
    let g = BoxGrid::cube(2, 1.0, 0.25, 1)?;
    for i in 0..20 {
        let a = if i % 2 == 0 {
            gen::lattice_monotone_graph(&mut rng, 1.0, 0.25)?
        } else {
            let m = rng.gen_range(1..=6);
            gen::monotone_set(&mut rng, 1, m)?
        };
        let r = ni_type_check(&a, &g)?;
        t.check(r.agree, || format!("NI {} vs phi-above-q {}", r.verdict.status, r.condition202.status));
    }
    Ok(t)
}

fn max_superset_pq(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "max_superset_pq");
    let mut t = Tally::new();
    let g = BoxGrid::cube(2, 1.0, 0.25, 1)?;
    let mut certified = 0;
    for _ in 0..10 {
        let a = gen::lattice_monotone_graph(&mut rng, 1.0, 0.25)?;
        let r = premax_certify(PremaxTarget::Points(&a), &g)?;
        if !r.condition202.is_grid_certified() {
            continue;
        }
        certified += 1;
        let f = phi_build(&a);
        for b in g.points() {
            if pi_member(&a, &b)?.holds_p() {
                let gap = f.eval(&b)? - a.space().q_value(&b)?;
                t.check(gap.abs() <= 1e-8, || format!("gap {gap} at {:?}", b.as_slice()));
            }
        }
    }
    t.check(certified > 0, || "no instance certified".into());
    Ok(t)
}

fn max_polar_positive(_seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let g = BoxGrid::cube(2, 2.0, 0.1, 2)?;
    let lines = [v(&[1.0, 1.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 2.0])];
    for dir in lines {
        let a = AffineSet::line(mono(1)?, v(&[0.0, 0.0]), dir)?;
        let r = premax_certify(PremaxTarget::Affine(&a), &g)?;
        if matches!(r.classification, Classification::PremaximalVia202 | Classification::PremaximalViaAffinePi) {
            t.check(!r.pi_positive.fails_p(), || format!("{} with a violating pair", r.classification));
        }
    }
    Ok(t)
}

// ---- minimal ----

fn min_fund(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "min_fund");
    let mut t = Tally::new();
    for _ in 0..500 {
        let n = rng.gen_range(1..=6);
        let sp = Arc::new(random_symmetric(&mut rng, n)?);
        let pieces = rng.gen_range(1..=8);
        let f = gen::max_affine(&mut rng, sp, pieces)?;
        for _ in 0..20 {
            let x = gen::uniform_vec(&mut rng, n, 2.0);
            let y = gen::uniform_vec(&mut rng, n, 2.0);
            let alpha = rng.gen_range(0.0..=1.0);
            let r = fund_ineq_check(&f, &x, &y, alpha)?;
            t.check(!r.fails_p(), || format!("violated by {:?}", r.measure));
        }
    }
    Ok(t)
}

fn min_envelope(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "min_envelope");
    let mut t = Tally::new();
    for _ in 0..10 {
        let n = rng.gen_range(1..=4);
        let sp = Arc::new(gen::negative_definite_space(&mut rng, n)?);
        let f = gen::certified_above_q(&mut rng, sp.clone(), 6)?;
        let x = gen::uniform_vec(&mut rng, n, 1.0);
        let e = EnvelopeQuery::new(f.clone(), x)?;
        for y in gen::probes(&mut rng, n, 3.0, 100) {
            let h = envelope_eval(&e, &y)?;
            let (fy, qy) = (f.eval(&y)?, sp.q_value(&y)?);
            t.check(h <= fy + 1e-12 && h >= qy - 1e-8, || format!("f {fy} h {h} q {qy}"));
        }
    }
    Ok(t)
}

fn min_envelope_cap(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "min_envelope_cap");
    let mut t = Tally::new();
    for _ in 0..50 {
        let n = rng.gen_range(1..=4);
        let sp = Arc::new(random_symmetric(&mut rng, n)?);
        let f = gen::max_affine(&mut rng, sp, 5)?;
        let x = gen::uniform_vec(&mut rng, n, 0.5);
        let e = EnvelopeQuery::new(f, x.clone())?;
        let h = envelope_eval(&e, &x)?;
        t.check(h <= e.cap + 1e-9, || format!("h(x) {h} above cap {}", e.cap));
    }
    Ok(t)
}

fn identity_phi(pitch: f64, half: f64) -> Result<MaxAffineFn> {
    let n = (half / pitch).round() as i64;
    let diag: Vec<Vector> = (-n..=n).map(|i| v(&[i as f64 * pitch, i as f64 * pitch])).collect();
    Ok(phi_build(&PointSet::new(mono(1)?, diag)?))
}

fn min_convmin(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "min_convmin");
    let mut t = Tally::new();
    let f = identity_phi(0.25, 2.0)?;
    let bx = BoxGrid::cube(2, 1.0, 0.25, 1)?;
    // f >= q holds exactly where x1 + x2 is twice a sample abscissa
    let probes: Vec<Vector> = (0..200)
        .map(|_| {
            let c = rng.gen_range(-3..=3) as f64 * 0.25;
            let d = rng.gen_range(-0.5..0.5);
            v(&[c + d, c - d])
        })
        .collect();
    let r = convmin_check_max_affine(&f, &probes, &bx)?;
    t.check(!r.fails_p(), || format!("violated at {:?}", r.witness));
    Ok(t)
}

fn min_selfconj(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "min_selfconj");
    let mut t = Tally::new();
    let diag: Vec<Vector> = (-10..=10).map(|i| v(&[i as f64 * 0.2, i as f64 * 0.2])).collect();
    let m = PointSet::new(mono(1)?, diag)?;
    let mut probes = gen::probes(&mut rng, 2, 2.0, 100);
    probes.extend((0..200).map(|_| {
        let x = rng.gen_range(-2.0..2.0);
        v(&[x, x])
    }));
    let r = minimal_selfconj_probe(&m, &probes)?;
    t.check(r.holds_p(), || format!("{:?}", r.witness));
    Ok(t)
}

// ---- ssdb ----

fn ssdb_isometry(seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for k in 1..=5 {
        let sp = make_monotone_ssdb(k)?;
        t.check(sp.isometry_residual() < 1e-10, || format!("k={k}: {}", sp.isometry_residual()));
        t.check(isometry_check(&sp, 1000, seed ^ k as u64).holds_p(), || format!("k={k} norms differ"));
    }
    let h = make_hilbert_ssdb(3)?;
    t.check(h.isometry_residual() < 1e-10, || "hilbert".into());
    let l = LipschitzSpace::new(1.0, 2, 2)?.ssdb()?;
    t.check(l.isometry_residual() < 1e-10, || "lipschitz K=1".into());
    Ok(t)
}

fn ssdb_decomposition(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "ssdb_decomposition");
    let mut t = Tally::new();
    let sp = make_monotone_ssdb(1)?;
    let a = AffineSet::line(sp.base_arc().clone(), v(&[0.0, 0.0]), v(&[1.0, 1.0]))?;
    for _ in 0..1000 {
        let x = gen::uniform_vec(&mut rng, 2, 5.0);
        let (av, cv) = decompose_sum(&sp, &a, &x)?;
        let m = 0.5 * (x[0] + x[1]);
        let res = (&av + &cv - &x).amax();
        t.check(res < 1e-10 && (&av - v(&[m, m])).amax() < 1e-10, || format!("residual {res}"));
        t.check(a.contains(&av) && pq_g0_member(&sp, &cv, Sign::Minus)?.holds_p(), || "membership".into());
    }
    Ok(t)
}

fn ssdb_g0_sum(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "ssdb_g0_sum");
    let mut t = Tally::new();
    for k in 1..=3 {
        let sp = make_monotone_ssdb(k)?;
        let a = AffineSet::new(sp.base_arc().clone(), Vector::zeros(2 * k), sp.pq_g0_basis(Sign::Plus))?;
        for _ in 0..100 {
            let x = gen::uniform_vec(&mut rng, 2 * k, 5.0);
            let (av, cv) = decompose_sum(&sp, &a, &x)?;
            t.check(
                (&av + &cv - &x).amax() < 1e-10
                    && pq_g0_member(&sp, &av, Sign::Plus)?.holds_p()
                    && pq_g0_member(&sp, &cv, Sign::Minus)?.holds_p(),
                || format!("k={k} split failed"),
            );
        }
    }
    Ok(t)
}

fn ssdb_pq_maximal(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "ssdb_pq_maximal");
    let mut t = Tally::new();
    for k in 1..=3 {
        let sp = make_monotone_ssdb(k)?;
        let basis = sp.pq_g0_basis(Sign::Plus);
        let a = AffineSet::new(sp.base_arc().clone(), Vector::zeros(2 * k), basis)?;
        let samples: Vec<Vector> = (0..20)
            .map(|_| {
                let u = gen::uniform_vec(&mut rng, k, 2.0);
                Vector::from_iterator(2 * k, u.iter().chain(u.iter()).copied())
            })
            .collect();
        t.check(is_q_positive(&PointSet::new(sp.base_arc().clone(), samples)?).holds_p(), || "not q-positive".into());
        t.check(affine_is_maximal(&a)?.holds_p(), || format!("k={k} not maximal"));
        let pi = affine_pi(&a)?;
        for b in gen::probes(&mut rng, 2 * k, 2.0, 100) {
            t.check(pi.contains(&b)? == a.contains(&b), || format!("{:?}", b.as_slice()));
        }
    }
    Ok(t)
}

fn ssdb_refinement(_seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let sp = make_monotone_ssdb(1)?;
    let g0 = sp.g0();
    let probes = [v(&[0.3, -0.2]), v(&[0.0, 0.5]), v(&[-0.45, 0.1]), v(&[0.7, 0.7])];
    let mut prev = vec![f64::INFINITY; probes.len()];
    for pitch in [1.0, 0.5, 0.25] {
        let f = g0.under_approx(&BoxGrid::cube(2, 2.0, pitch, 1)?)?;
        for (i, b) in probes.iter().enumerate() {
            let c = conj_eval(&f, b)?.value;
            t.check(c >= g0.eval(b) - 1e-9 && c <= prev[i] + 1e-9, || format!("level {pitch}: {c}"));
            prev[i] = c;
        }
    }
    for (i, b) in probes.iter().enumerate() {
        t.check(prev[i] - g0.eval(b) < 0.05, || format!("finest gap {}", prev[i] - g0.eval(b)));
    }
    Ok(t)
}

fn ssdb_via_decomposition(_seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let sp = make_monotone_ssdb(1)?;
    let graph: Vec<Vector> = (-10..=10).map(|i| v(&[i as f64 * 0.1, i as f64 * 0.1])).collect();
    let a = PointSet::new(sp.base_arc().clone(), graph.clone())?;
    let p = v(&[0.0, 0.0]);
    let r = maximality_via_decomposition(&sp, &a, &p, &graph, 1e-9)?;
    t.check(r.is_grid_certified(), || format!("graph probes: {}", r.status));
    let single = PointSet::from_rows(sp.base_arc().clone(), &[&[0.0, 0.0]])?;
    let r = maximality_via_decomposition(&sp, &single, &p, &[v(&[1.0, 1.0])], 1e-9)?;
    t.check(r.fails_p(), || "singleton not refuted".into());
    let r = maximality_via_decomposition(&sp, &a, &p, &[], 1e-9)?;
    t.check(r.status == Status::Undecided, || "empty probes decided".into());
    Ok(t)
}

// ---- lipschitz ----

fn random_graph(rng: &mut Rng8, sp: &LipschitzSpace, len: usize, slope: f64) -> Result<GraphSet> {
    let dom: Vec<Vector> = (0..len).map(|_| gen::uniform_vec(rng, sp.n1(), 2.0)).collect();
    let a = gen::uniform_mat(rng, sp.n2(), sp.n1(), 1.0);
    let a = &a / a.norm().max(1e-12) * slope;
    let vals: Vec<Vector> = dom.iter().map(|d| &a * d + gen::uniform_vec(rng, sp.n2(), 0.1)).collect();
    GraphSet::new(sp, dom, vals)
}

fn lip_equiv(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "lip_equiv");
    let mut t = Tally::new();
    let (mut holds, mut fails) = (0, 0);
    for _ in 0..1000 {
        let sp = LipschitzSpace::new(rng.gen_range(0.3..2.0), rng.gen_range(1..=2), rng.gen_range(1..=2))?;
        let slope = sp.k() * rng.gen_range(0.3..2.0);
        let len = rng.gen_range(2..=6);
        let g = random_graph(&mut rng, &sp, len, slope)?;
        match lipschitz_check(&g) {
            Ok(r) => {
                if r.holds_p() {
                    holds += 1
                } else {
                    fails += 1
                }
                t.check(true, String::new);
            }
            Err(e) => t.check(false, || e.to_string()),
        }
    }
    t.check(holds > 0 && fails > 0, || format!("one-sided sample: {holds} holds, {fails} fails"));
    Ok(t)
}

fn lip_phi(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "lip_phi");
    let mut t = Tally::new();
    for _ in 0..50 {
        let sp = LipschitzSpace::new(rng.gen_range(0.3..2.0), rng.gen_range(1..=2), rng.gen_range(1..=2))?;
        let slope = rng.gen_range(0.1..3.0);
        let g = random_graph(&mut rng, &sp, 5, slope)?;
        let f = phi_build(g.point_set());
        for _ in 0..20 {
            let x1 = gen::uniform_vec(&mut rng, sp.n1(), 3.0);
            let x2 = gen::uniform_vec(&mut rng, sp.n2(), 3.0);
            let d = phi_graph_eval(&g, &x1, &x2)?;
            let gv = f.eval(&sp.join(&x1, &x2)?)?;
            t.check((d - gv).abs() <= 1e-10 * (1.0 + gv.abs()), || format!("{d} vs {gv}"));
        }
    }
    Ok(t)
}

fn lip_mcshane(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "lip_mcshane");
    let mut t = Tally::new();
    for _ in 0..50 {
        let sp = LipschitzSpace::new(rng.gen_range(0.5..2.0), rng.gen_range(1..=3), 1)?;
        let g = random_graph(&mut rng, &sp, 6, sp.k() * 0.9)?;
        if !lipschitz_check(&g)?.holds_p() {
            continue;
        }
        for (d, val) in g.domain().iter().zip(g.values()) {
            let e = mcshane_extend_scalar(&g, d)?;
            t.check((e - val[0]).abs() < 1e-12, || "restriction differs".into());
        }
        for _ in 0..20 {
            let a = gen::uniform_vec(&mut rng, sp.n1(), 3.0);
            let b = gen::uniform_vec(&mut rng, sp.n1(), 3.0);
            let (ea, eb) = (mcshane_extend_scalar(&g, &a)?, mcshane_extend_scalar(&g, &b)?);
            let (la, lb) = (mcshane_extend_scalar_upper(&g, &a)?, mcshane_extend_scalar_upper(&g, &b)?);
            let lim = sp.k() * (&a - &b).norm() + 1e-9;
            t.check((ea - eb).abs() <= lim && (la - lb).abs() <= lim && la <= ea + 1e-9, || {
                format!("extension not {}-Lipschitz", sp.k())
            });
        }
    }
    Ok(t)
}

fn lip_identity(_seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let off = vec![v(&[2.0, 2.0]), v(&[-0.5, -0.5]), v(&[0.5, 0.6])];
    let r = identity_example_check(&grid, &off)?;
    t.check(r.holds_p(), || format!("{:?}", r.note));
    Ok(t)
}

fn lip_nondegenerate(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "lip_nondegenerate");
    let mut t = Tally::new();
    for _ in 0..20 {
        let k = rng.gen_range(0.1..3.0);
        let sp = LipschitzSpace::new(k, rng.gen_range(1..=3), rng.gen_range(1..=3))?;
        let eig = sym_eigen(sp.space().matrix())?;
        let floor = (k * k).min(1.0) - 1e-12;
        t.check(eig.values.iter().all(|l| l.abs() >= floor), || format!("K={k}"));
        let q = sp.space().q_value(&Vector::from_element(sp.n1() + sp.n2(), 1.0))?;
        let expect = 0.5 * (k * k * sp.n1() as f64 - sp.n2() as f64);
        t.check((q - expect).abs() <= 1e-12 * (1.0 + expect.abs()), || format!("q {q} vs {expect}"));
    }
    Ok(t)
}

fn lip_separating(seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let sp = LipschitzSpace::new(1.0, 1, 1)?;
    let g = GraphSet::scalar(&sp, &[(0.0, 0.0), (2.0, 1.0)])?;
    let r = closed_domain_repr_probe(&g, 0.5, &v(&[1.0]), 200, seed)?;
    t.check(r.verdict.is_grid_certified() && (r.radius - 0.5).abs() < 1e-12, || format!("{:?}", r.verdict));
    t.check(matches!(closed_domain_repr_probe(&g, 0.5, &v(&[0.0]), 10, seed), Err(QposError::Precondition(_))), || {
        "domain point accepted".into()
    });
    Ok(t)
}

// ---- hilbert ----

fn hil_phi(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "hil_phi");
    let mut t = Tally::new();
    for _ in 0..10 {
        let k = rng.gen_range(1..=3);
        let pts: Vec<Vec<f64>> =
            (0..rng.gen_range(1..=6)).map(|_| gen::uniform_vec(&mut rng, k, 2.0).as_slice().to_vec()).collect();
        let a = ClosedSetDescriptor::Finite { points: pts };
        let f = phi_build(&a.point_set()?);
        for x in gen::probes(&mut rng, k, 3.0, 100) {
            let (d, g) = (phi_closed_eval(&a, &x)?, f.eval(&x)?);
            t.check((d - g).abs() <= 1e-10 * (1.0 + g.abs()), || format!("{d} vs {g}"));
        }
    }
    Ok(t)
}

fn descriptors() -> Vec<ClosedSetDescriptor> {
    vec![
        ClosedSetDescriptor::finite(&[&[-1.0], &[1.0]]),
        ClosedSetDescriptor::intervals(&[(0.0, 1.0), (2.0, 3.0)]),
        ClosedSetDescriptor::finite(&[&[0.0, 0.0], &[1.0, 0.5], &[-0.5, 1.0]]),
        ClosedSetDescriptor::Segments { segments: vec![(vec![0.0, 0.0], vec![1.0, 1.0])] },
        ClosedSetDescriptor::AxisCross,
    ]
}

fn hil_conj_lower(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "hil_conj_lower");
    let mut t = Tally::new();
    for a in descriptors() {
        for x in gen::probes(&mut rng, a.dim(), 1.5, 5) {
            let s = phi_conj_closed_eval(&a, &x, &policy_box(&a, &x, 0.1, 2)?)?;
            t.check(s.value >= 0.5 * x.norm_squared() - 1e-12, || format!("{} below q", s.value));
        }
    }
    Ok(t)
}

fn hil_q_positive(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "hil_q_positive");
    let mut t = Tally::new();
    for _ in 0..20 {
        let k = rng.gen_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..8).map(|_| gen::uniform_vec(&mut rng, k, 3.0).as_slice().to_vec()).collect();
        let a = ClosedSetDescriptor::Finite { points: pts };
        t.check(is_q_positive(&a.point_set()?).holds_p(), || "finite set not q-positive".into());
    }
    Ok(t)
}

fn hil_repr(seed: u64) -> Result<Tally> {
    let mut rng = rng_for(seed, "hil_repr");
    let mut t = Tally::new();
    for a in descriptors() {
        let mut probes = gen::probes(&mut rng, a.dim(), 1.5, 5);
        probes.push(match &a {
            ClosedSetDescriptor::Finite { points } => Vector::from_column_slice(&points[0]),
            ClosedSetDescriptor::Segments { segments } => Vector::from_column_slice(&segments[0].0),
            ClosedSetDescriptor::AxisCross => v(&[0.0, 0.7]),
        });
        for x in probes {
            if a.distance(&x) > 0.0 && a.distance(&x) < 1e-2 {
                continue;
            }
            let r = closed_repr_member(&a, &x, &policy_box(&a, &x, 0.05, 3)?)?;
            t.check(r.holds_p() == a.contains(&x), || format!("{:?}: {}", x.as_slice(), r.status));
        }
    }
    Ok(t)
}

fn hil_two_points(_seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let a = ClosedSetDescriptor::finite(&[&[-1.0], &[1.0]]);
    let o = v(&[0.0]);
    let phi = phi_closed_eval(&a, &o)?;
    t.check((phi + 0.5).abs() < 1e-6, || format!("phi(0) = {phi}"));
    let c = phi_conj_closed_eval(&a, &o, &policy_box(&a, &o, 0.01, 2)?)?.value;
    t.check((c - 0.5).abs() < 1e-6, || format!("conj(0) = {c}"));
    t.check(g_phi_closed_member(&a, &o, &policy_box(&a, &o, 0.01, 2)?)?.holds_p(), || "0 not in G".into());
    t.check(midpoint_ball_check(&a, &v(&[-1.0]), &v(&[1.0]))?.fails_p(), || "midpoint ball holds".into());
    Ok(t)
}

fn hil_cross(_seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let a = ClosedSetDescriptor::AxisCross;
    for x in BoxGrid::cube(2, 2.0, 0.1, 1)?.points() {
        let d = x[0].abs().min(x[1].abs());
        if d > 1e-9 && d < 1e-3 {
            continue;
        }
        let r = g_phi_closed_member(&a, &x, &policy_box(&a, &x, 0.1, 2)?)?;
        t.check(r.holds_p() == (d <= 1e-9), || format!("{:?}: {}", x.as_slice(), r.status));
    }
    Ok(t)
}

fn hil_line(_seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let probes: Vec<f64> = (-8..=16).map(|i| i as f64 * 0.25).collect();
    for iv in [vec![(0.0, 1.0)], vec![(-1.0, -1.0), (1.0, 1.0)], vec![(0.0, 1.0), (2.0, 3.0)]] {
        let r = line_corollary_check(&iv, &probes, 0.01)?;
        t.check(r.verdict.holds_p(), || format!("{iv:?}: {}", r.verdict.status));
    }
    Ok(t)
}
