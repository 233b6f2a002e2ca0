//! Lipschitz model: `R^{n1} × R^{n2}` with `S = diag(K² I, −I)`. A set is
//! q-positive exactly when it is the graph of a `K`-Lipschitz map.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, QposError, Result};
use crate::fitzpatrick::repr_hull_member;
use crate::space::{is_q_positive, ModelKind, PointSet, SsdSpace};
use crate::ssdb::SsdbSpace;
use crate::tol;
use crate::verdict::{Verdict, Witness};
use crate::{Matrix, Vector};

#[derive(Debug, Clone)]
pub struct LipschitzSpace {
    k: f64,
    n1: usize,
    n2: usize,
    space: Arc<SsdSpace>,
}

impl LipschitzSpace {
    pub fn new(k: f64, n1: usize, n2: usize) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(QposError::InvalidArgument(format!("K must be positive, got {k}")));
        }
        if n1 == 0 || n2 == 0 {
            return Err(QposError::InvalidArgument("n1 and n2 must be positive".into()));
        }
        let n = n1 + n2;
        let s = Matrix::from_fn(n, n, |i, j| match (i == j, i < n1) {
            (true, true) => k * k,
            (true, false) => -1.0,
            _ => 0.0,
        });
        let space = Arc::new(SsdSpace::with_kind(s, ModelKind::Lipschitz { k_const: k, n1, n2 })?);
        Ok(LipschitzSpace { k, n1, n2, space })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn space(&self) -> &Arc<SsdSpace> {
        &self.space
    }

    pub fn is_ssdb(&self) -> bool {
        self.k == 1.0
    }

    /// The SSDB structure with `G = I`; only for `K = 1`.
    pub fn ssdb(&self) -> Result<SsdbSpace> {
        if !self.is_ssdb() {
            return Err(QposError::Precondition(format!("K = {} is not 1", self.k)));
        }
        let n = self.n1 + self.n2;
        SsdbSpace::new(self.space.clone(), Matrix::identity(n, n))
    }

    pub fn join(&self, x1: &Vector, x2: &Vector) -> Result<Vector> {
        check_dim(self.n1, x1.len())?;
        check_dim(self.n2, x2.len())?;
        Ok(Vector::from_iterator(self.n1 + self.n2, x1.iter().chain(x2.iter()).copied()))
    }
}

/// A finite graph `{(dᵢ, f(dᵢ))}` with distinct domain points.
#[derive(Debug, Clone)]
pub struct GraphSet {
    space: LipschitzSpace,
    domain: Vec<Vector>,
    values: Vec<Vector>,
    set: PointSet,
}

impl GraphSet {
    pub fn new(space: &LipschitzSpace, domain: Vec<Vector>, values: Vec<Vector>) -> Result<Self> {
        if domain.len() != values.len() {
            return Err(QposError::InvalidArgument(format!(
                "{} domain points but {} values",
                domain.len(),
                values.len()
            )));
        }
        for (d, v) in domain.iter().zip(&values) {
            check_dim(space.n1, d.len())?;
            check_dim(space.n2, v.len())?;
        }
        for i in 0..domain.len() {
            for j in 0..i {
                if (&domain[i] - &domain[j]).norm() <= 1e-12 {
                    return Err(QposError::InvalidArgument(format!("domain points {j} and {i} coincide")));
                }
            }
        }
        let pts = domain.iter().zip(&values).map(|(d, v)| space.join(d, v)).collect::<Result<Vec<_>>>()?;
        let set = PointSet::new(space.space.clone(), pts)?;
        Ok(GraphSet { space: space.clone(), domain, values, set })
    }

    /// Scalar-valued graph on a scalar domain.
    pub fn scalar(space: &LipschitzSpace, pairs: &[(f64, f64)]) -> Result<Self> {
        GraphSet::new(
            space,
            pairs.iter().map(|p| Vector::from_element(1, p.0)).collect(),
            pairs.iter().map(|p| Vector::from_element(1, p.1)).collect(),
        )
    }

    pub fn lipschitz_space(&self) -> &LipschitzSpace {
        &self.space
    }

    pub fn domain(&self) -> &[Vector] {
        &self.domain
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    pub fn point_set(&self) -> &PointSet {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }
}

/// `‖y₁ − y₂‖ ≤ K ‖x₁ − x₂‖` on all pairs, compared in squared form; must
/// agree with `is_q_positive` on the induced set.
pub fn lipschitz_check(g: &GraphSet) -> Result<Verdict> {
    let v = lipschitz_at(g, g.space.k);
    let q = is_q_positive(&g.set);
    if v.status != q.status {
        return Err(QposError::Internal(format!(
            "Lipschitz test says {} but q-positivity says {}",
            v.status, q.status
        )));
    }
    Ok(v)
}

fn lipschitz_at(g: &GraphSet, k: f64) -> Verdict {
    let mut worst = f64::INFINITY;
    for i in 0..g.len() {
        for j in 0..i {
            let dx = (&g.domain[i] - &g.domain[j]).norm_squared();
            let dy = (&g.values[i] - &g.values[j]).norm_squared();
            let slack = k * k * dx - dy;
            if slack < -2.0 * tol::eps() {
                let pts = g.set.points();
                return Verdict::fails(Witness::pair(&pts[i], &pts[j])).with_measure(slack);
            }
            worst = worst.min(slack);
        }
    }
    Verdict::holds().with_measure(worst)
}

/// `½ maxᵢ {−K²‖dᵢ − x1‖² + ‖f(dᵢ) − x2‖²} + ½K²‖x1‖² − ½‖x2‖²`.
pub fn phi_graph_eval(g: &GraphSet, x1: &Vector, x2: &Vector) -> Result<f64> {
    check_dim(g.space.n1, x1.len())?;
    check_dim(g.space.n2, x2.len())?;
    let k2 = g.space.k * g.space.k;
    let sup = g
        .domain
        .iter()
        .zip(&g.values)
        .map(|(d, v)| -k2 * (d - x1).norm_squared() + (v - x2).norm_squared())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(0.5 * sup + 0.5 * k2 * x1.norm_squared() - 0.5 * x2.norm_squared())
}

fn scalar_graph_precondition(g: &GraphSet, query: &Vector) -> Result<()> {
    if g.space.n2 != 1 {
        return Err(QposError::Precondition("extension needs scalar values".into()));
    }
    check_dim(g.space.n1, query.len())?;
    if !lipschitz_at(g, g.space.k).holds_p() {
        return Err(QposError::Precondition("graph is not K-Lipschitz".into()));
    }
    Ok(())
}

fn inf_conv(g: &GraphSet, k: f64, query: &Vector) -> f64 {
    g.domain.iter().zip(&g.values).map(|(d, v)| v[0] + k * (query - d).norm()).fold(f64::INFINITY, f64::min)
}

fn sup_conv(g: &GraphSet, k: f64, query: &Vector) -> f64 {
    g.domain.iter().zip(&g.values).map(|(d, v)| v[0] - k * (query - d).norm()).fold(f64::NEG_INFINITY, f64::max)
}

/// `minᵢ (f(dᵢ) + K ‖query − dᵢ‖)`, the largest `K`-Lipschitz extension.
pub fn mcshane_extend_scalar(g: &GraphSet, query: &Vector) -> Result<f64> {
    scalar_graph_precondition(g, query)?;
    Ok(inf_conv(g, g.space.k, query))
}

/// `maxᵢ (f(dᵢ) − K ‖query − dᵢ‖)`, the smallest `K`-Lipschitz extension.
pub fn mcshane_extend_scalar_upper(g: &GraphSet, query: &Vector) -> Result<f64> {
    scalar_graph_precondition(g, query)?;
    Ok(sup_conv(g, g.space.k, query))
}

/// With `A = {(0,0), (1,1)}` at `K = 1`: `(t,t)` must be in the smallest
/// q-representable superset for every `t` in `t_grid`, and every off-probe
/// must be outside it.
pub fn identity_example_check(t_grid: &[f64], off_probes: &[Vector]) -> Result<Verdict> {
    let sp = LipschitzSpace::new(1.0, 1, 1)?;
    let g = GraphSet::scalar(&sp, &[(0.0, 0.0), (1.0, 1.0)])?;
    for &t in t_grid {
        if !(0.0..=1.0).contains(&t) {
            return Err(QposError::InvalidArgument(format!("t = {t} is outside [0, 1]")));
        }
        let b = Vector::from_column_slice(&[t, t]);
        if !repr_hull_member(g.point_set(), &b)?.holds_p() {
            return Ok(Verdict::fails(Witness::point(&b)).with_note("diagonal point not represented"));
        }
    }
    for b in off_probes {
        if repr_hull_member(g.point_set(), b)?.holds_p() {
            return Ok(Verdict::fails(Witness::point(b)).with_note("off-probe represented"));
        }
    }
    Ok(Verdict::holds())
}

/// Two extensions separating at `x1`.
#[derive(Debug, Clone)]
pub struct SeparatingPair {
    pub verdict: Verdict,
    /// `K′`-extension value at `x1`.
    pub base_value: f64,
    /// The other extension's value at `x1`.
    pub other_value: f64,
    pub radius: f64,
}

/// Treats `g` as samples of a `K′`-Lipschitz scalar map and builds two
/// `K`-Lipschitz extensions with different values at `x1`: the `K′`
/// McShane extension, and the `K` McShane extension of `g ∪ {(x1, y)}` with
/// `y` at half the admissible radius `(K − K′)·dist(x1, dom g)`. Both graphs
/// are checked for q-positivity on `count` random points around the domain.
pub fn closed_domain_repr_probe(
    g: &GraphSet,
    k_prime: f64,
    x1: &Vector,
    count: usize,
    seed: u64,
) -> Result<SeparatingPair> {
    let sp = &g.space;
    if sp.n2 != 1 {
        return Err(QposError::Precondition("extension needs scalar values".into()));
    }
    check_dim(sp.n1, x1.len())?;
    if !(k_prime > 0.0 && k_prime < sp.k) {
        return Err(QposError::Precondition(format!("need 0 < K' < K, got K' = {k_prime}, K = {}", sp.k)));
    }
    if !lipschitz_at(g, k_prime).holds_p() {
        return Err(QposError::Precondition(format!("graph is not {k_prime}-Lipschitz")));
    }
    let dist = g.domain.iter().map(|d| (x1 - d).norm()).fold(f64::INFINITY, f64::min);
    if dist <= 1e-12 {
        return Err(QposError::Precondition("x1 is a domain point".into()));
    }
    let radius = (sp.k - k_prime) * dist;
    let base_value = inf_conv(g, k_prime, x1);
    let other_value = base_value + 0.5 * radius;
    let mut dom2 = g.domain.clone();
    dom2.push(x1.clone());
    let mut val2 = g.values.clone();
    val2.push(Vector::from_element(1, other_value));
    let g2 = GraphSet::new(sp, dom2, val2)?;

    let mut lo = x1.clone();
    let mut hi = x1.clone();
    for d in &g.domain {
        lo = lo.inf(d);
        hi = hi.sup(d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries: Vec<Vector> = g2.domain.clone();
    while queries.len() < g2.len() + count {
        let z = Vector::from_fn(sp.n1, |i, _| rng.gen_range(lo[i] - 1.0..hi[i] + 1.0));
        if queries.iter().all(|w| (w - &z).norm() > 1e-9) {
            queries.push(z);
        }
    }
    let ext1: Vec<Vector> = queries.iter().map(|z| Vector::from_element(1, inf_conv(g, k_prime, z))).collect();
    let ext2: Vec<Vector> = queries.iter().map(|z| Vector::from_element(1, inf_conv(&g2, sp.k, z))).collect();
    let e1 = GraphSet::new(sp, queries.clone(), ext1)?;
    let e2 = GraphSet::new(sp, queries, ext2)?;
    let v1 = lipschitz_check(&e1)?;
    let v2 = lipschitz_check(&e2)?;
    let at_x1 = inf_conv(&g2, sp.k, x1);
    let verdict = if !v1.holds_p() {
        v1.with_note("K'-extension graph is not q-positive")
    } else if !v2.holds_p() {
        v2.with_note("K-extension graph is not q-positive")
    } else if (at_x1 - base_value).abs() <= tol::eps() {
        Verdict::fails(Witness::point(x1)).with_note("extensions agree at x1")
    } else {
        Verdict::grid_certified(0.0)
            .with_measure((at_x1 - base_value).abs())
            .with_note(format!("{count} sample points"))
    };
    Ok(SeparatingPair { verdict, base_value, other_value: at_x1, radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitzpatrick::phi_build;
    use crate::numerics::linalg::sym_eigen;
    use proptest::prelude::*;
    use rand::Rng;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn q_matches_squared_norms() {
        let sp = LipschitzSpace::new(2.0, 2, 1).unwrap();
        let b = v(&[1.0, -1.0, 3.0]);
        assert_eq!(sp.space().q_value(&b).unwrap(), 0.5 * (4.0 * 2.0 - 9.0));
        assert!(!sp.is_ssdb());
        assert!(sp.ssdb().is_err());
        let one = LipschitzSpace::new(1.0, 1, 2).unwrap();
        assert!(one.ssdb().unwrap().isometry_residual() < 1e-12);
    }

    #[test]
    fn singular_values_bounded_below() {
        for k in [0.3, 1.0, 2.5] {
            let sp = LipschitzSpace::new(k, 2, 2).unwrap();
            let eig = sym_eigen(sp.space().matrix()).unwrap();
            assert!(eig.values.iter().all(|l| l.abs() >= (k * k).min(1.0) - 1e-12));
            assert!(!sp.space().is_degenerate());
        }
    }

    #[test]
    fn lipschitz_examples() {
        let one = LipschitzSpace::new(1.0, 1, 1).unwrap();
        let two = LipschitzSpace::new(2.0, 1, 1).unwrap();
        let id = GraphSet::scalar(&one, &[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(lipschitz_check(&id).unwrap().holds_p());
        let steep = GraphSet::scalar(&one, &[(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert!(lipschitz_check(&steep).unwrap().fails_p());
        let steep2 = GraphSet::scalar(&two, &[(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert!(lipschitz_check(&steep2).unwrap().holds_p());
        assert!(GraphSet::scalar(&one, &[(0.0, 0.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn phi_graph_examples() {
        let sp = LipschitzSpace::new(1.5, 1, 1).unwrap();
        let g = GraphSet::scalar(&sp, &[(0.0, 0.0)]).unwrap();
        for (a, b) in [(1.0, 2.0), (-3.0, 0.5)] {
            assert!(phi_graph_eval(&g, &v(&[a]), &v(&[b])).unwrap().abs() < 1e-12);
        }
        let one = LipschitzSpace::new(1.0, 1, 1).unwrap();
        let id = GraphSet::scalar(&one, &[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(phi_graph_eval(&id, &v(&[0.0]), &v(&[1.0])).unwrap().abs() < 1e-12);
    }

    #[test]
    fn mcshane_examples() {
        let one = LipschitzSpace::new(1.0, 1, 1).unwrap();
        let id = GraphSet::scalar(&one, &[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(mcshane_extend_scalar(&id, &v(&[0.5])).unwrap(), 0.5);
        assert_eq!(mcshane_extend_scalar(&id, &v(&[1.0])).unwrap(), 1.0);
        assert_eq!(mcshane_extend_scalar(&id, &v(&[2.0])).unwrap(), 2.0);
        assert_eq!(mcshane_extend_scalar_upper(&id, &v(&[2.0])).unwrap(), 0.0);
        let steep = GraphSet::scalar(&one, &[(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert!(matches!(mcshane_extend_scalar(&steep, &v(&[0.5])), Err(QposError::Precondition(_))));
    }

    #[test]
    fn identity_example() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let off = vec![v(&[2.0, 2.0]), v(&[0.5, 0.6]), v(&[-0.5, -0.5]), v(&[0.3, 0.0])];
        assert!(identity_example_check(&grid, &off).unwrap().holds_p());
        let r = identity_example_check(&[0.5], &[v(&[0.25, 0.25])]).unwrap();
        assert!(r.fails_p());
    }

    #[test]
    fn separating_extensions() {
        let sp = LipschitzSpace::new(1.0, 1, 1).unwrap();
        let g = GraphSet::scalar(&sp, &[(0.0, 0.0), (2.0, 1.0)]).unwrap();
        let r = closed_domain_repr_probe(&g, 0.5, &v(&[1.0]), 200, 7).unwrap();
        assert!((r.radius - 0.5).abs() < 1e-12);
        assert!(r.verdict.is_grid_certified(), "{:?}", r.verdict);
        assert!((r.other_value - r.base_value - 0.25).abs() < 1e-12);
        assert!(matches!(closed_domain_repr_probe(&g, 0.5, &v(&[2.0]), 10, 7), Err(QposError::Precondition(_))));
        assert!(matches!(closed_domain_repr_probe(&g, 1.0, &v(&[1.0]), 10, 7), Err(QposError::Precondition(_))));
    }

    fn random_graph(seed: u64, k: f64, n1: usize, n2: usize, len: usize) -> GraphSet {
        let sp = LipschitzSpace::new(k, n1, n2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dom: Vec<Vector> = (0..len).map(|_| Vector::from_fn(n1, |_, _| rng.gen_range(-2.0..2.0))).collect();
        let val: Vec<Vector> = (0..len).map(|_| Vector::from_fn(n2, |_, _| rng.gen_range(-2.0..2.0))).collect();
        GraphSet::new(&sp, dom, val).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn lipschitz_iff_q_positive(seed in any::<u64>(), k in 0.2f64..3.0, n1 in 1usize..3, n2 in 1usize..3, len in 2usize..6) {
            let g = random_graph(seed, k, n1, n2, len);
            // the internal agreement check errors on mismatch
            prop_assert!(lipschitz_check(&g).is_ok());
        }

        #[test]
        fn phi_graph_matches_generic(seed in any::<u64>(), k in 0.2f64..3.0, x1 in -3.0f64..3.0, x2 in -3.0f64..3.0) {
            let g = random_graph(seed, k, 1, 1, 5);
            let f = phi_build(g.point_set());
            let direct = phi_graph_eval(&g, &v(&[x1]), &v(&[x2])).unwrap();
            let generic = f.eval(&v(&[x1, x2])).unwrap();
            prop_assert!((direct - generic).abs() <= 1e-10 * (1.0 + generic.abs()));
        }

        #[test]
        fn mcshane_is_k_lipschitz(seed in any::<u64>(), a in -4.0f64..4.0, b in -4.0f64..4.0) {
            let sp = LipschitzSpace::new(1.5, 1, 1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pairs = vec![(0.0, 0.0)];
            for i in 1..5 {
                let prev = pairs[i - 1];
                let x = prev.0 + rng.gen_range(0.1..1.0);
                pairs.push((x, prev.1 + rng.gen_range(-1.5..1.5) * (x - prev.0)));
            }
            let g = GraphSet::scalar(&sp, &pairs).unwrap();
            let (fa, fb) = (mcshane_extend_scalar(&g, &v(&[a])).unwrap(), mcshane_extend_scalar(&g, &v(&[b])).unwrap());
            prop_assert!((fa - fb).abs() <= 1.5 * (a - b).abs() + 1e-9);
            let (la, lb) = (mcshane_extend_scalar_upper(&g, &v(&[a])).unwrap(), mcshane_extend_scalar_upper(&g, &v(&[b])).unwrap());
            prop_assert!((la - lb).abs() <= 1.5 * (a - b).abs() + 1e-9);
            prop_assert!(la <= fa + 1e-9);
            for (x, y) in &pairs {
                prop_assert!((mcshane_extend_scalar(&g, &v(&[*x])).unwrap() - y).abs() < 1e-12);
            }
        }
    }
}
