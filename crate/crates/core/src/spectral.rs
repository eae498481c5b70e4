//! Semisimplicity tests, the commuting/semisimple verdict, and root recovery
//! from joint eigenvectors of the multiplication matrices.
//!
//! A border system over `I` has `#I` distinct solutions exactly when its
//! multiplication matrices commute and each is diagonalizable. Both sides of
//! that equivalence are computed independently here: the verdict from the
//! matrices, the distinct count from residual-checked roots. A disagreement
//! between them is reported as a tolerance inconsistency.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Serialize, Serializer};

use crate::config::{Config, StrategyHint};
use crate::eigen::{eigen, frobenius, EigenDecomposition, EigenSummary};
use crate::error::{Error, Result};
use crate::indexsets::MultiIndex;
use crate::matrices::{build_family, commutation_report, CommutationReport, MultMatrixFamily};
use crate::system::{BorderSystem, Point, Scalar};

#[derive(Clone, Debug, Serialize)]
pub struct Cluster {
    pub representative: Scalar,
    pub algebraic: usize,
    pub geometric: usize,
    /// `#I − rank(A − λ̄ I)`, before clamping.
    pub nullity: usize,
    /// Numerical rank of the cluster's unit eigenvectors.
    pub independent_eigenvectors: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SemisimplicityReport {
    pub clusters: Vec<Cluster>,
    pub semisimple: bool,
    /// Smallest distance between eigenvalues of different clusters.
    pub worst_gap: f64,
    pub cluster_threshold: f64,
}

/// Single-linkage clusters of `values` at distance `delta`, each listed by
/// member indices in ascending order; clusters ordered by their first member.
pub fn cluster_eigenvalues(values: &[Scalar], delta: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut k: usize) -> usize {
        while parent[k] != k {
            parent[k] = parent[parent[k]];
            k = parent[k];
        }
        k
    }
    for a in 0..n {
        for b in a + 1..n {
            if (values[a] - values[b]).norm() <= delta {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for k in 0..n {
        let r = find(&mut parent, k);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(k);
    }
    groups
}

fn numerical_rank(m: DMatrix<Scalar>, tol_rank: f64) -> usize {
    let sv = m.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol_rank * smax).count()
}

/// Clusters the spectrum and estimates each cluster's geometric multiplicity
/// as the larger of `#I − rank(A − λ̄ I)` and the number of independent
/// computed eigenvectors in the cluster, clamped to `[1, algebraic]`.
///
/// The nullity alone undercounts when a cluster holds distinct eigenvalues
/// closer than the cluster threshold: `A − λ̄ I` then has small but nonzero
/// singular values. Their eigenvectors stay well separated, while those of a
/// Jordan block coincide to within roughly `sqrt(eps)`. Eigenvectors count as
/// independent above singular value `sqrt(tol_rank)`.
pub fn semisimplicity(a: &DMatrix<Scalar>, dec: &EigenDecomposition, cfg: &Config) -> SemisimplicityReport {
    let size = a.nrows();
    let delta = cfg.tol_cluster * (1.0 + frobenius(a));
    let groups = cluster_eigenvalues(&dec.eigenvalues, delta);
    let clusters: Vec<Cluster> = groups
        .iter()
        .map(|g| {
            let representative =
                g.iter().map(|&k| dec.eigenvalues[k]).sum::<Scalar>() / g.len() as f64;
            let shifted = a - DMatrix::<Scalar>::identity(size, size) * representative;
            let nullity = size - numerical_rank(shifted, cfg.tol_rank);
            let block = DMatrix::from_fn(size, g.len(), |r, c| dec.eigenvectors[(r, g[c])]);
            let floor = cfg.tol_rank.sqrt();
            let independent = block.singular_values().iter().filter(|&&s| s > floor).count();
            Cluster {
                representative,
                algebraic: g.len(),
                geometric: nullity.max(independent).clamp(1, g.len()),
                nullity,
                independent_eigenvectors: independent,
            }
        })
        .collect();
    let mut worst_gap = f64::INFINITY;
    for (x, gx) in groups.iter().enumerate() {
        for gy in &groups[x + 1..] {
            for &p in gx {
                for &q in gy {
                    worst_gap = worst_gap.min((dec.eigenvalues[p] - dec.eigenvalues[q]).norm());
                }
            }
        }
    }
    SemisimplicityReport {
        semisimple: clusters.iter().all(|c| c.geometric == c.algebraic),
        clusters,
        worst_gap,
        cluster_threshold: delta,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub commuting: bool,
    pub all_semisimple: bool,
    /// `commuting ∧ all_semisimple`: the system has the maximal number `#I` of distinct solutions.
    pub maximal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub verdict: Verdict,
    pub commutation: CommutationReport,
    pub semisimplicity: Vec<SemisimplicityReport>,
    pub eigen: Vec<EigenSummary>,
}

fn analyze(fam: &MultMatrixFamily, cfg: &Config) -> Result<(CriterionReport, Vec<EigenDecomposition>)> {
    cfg.validate()?;
    let commutation = commutation_report(fam, cfg.tol_commute);
    let decs = fam
        .matrices
        .iter()
        .map(|a| eigen(a, cfg.tol_eig))
        .collect::<Result<Vec<_>>>()?;
    let semisimplicity: Vec<SemisimplicityReport> = fam
        .matrices
        .iter()
        .zip(&decs)
        .map(|(a, d)| semisimplicity(a, d, cfg))
        .collect();
    let all_semisimple = semisimplicity.iter().all(|r| r.semisimple);
    let verdict = Verdict {
        commuting: commutation.commuting,
        all_semisimple,
        maximal: commutation.commuting && all_semisimple,
    };
    let report = CriterionReport {
        verdict,
        commutation,
        semisimplicity,
        eigen: decs.iter().map(EigenDecomposition::summary).collect(),
    };
    Ok((report, decs))
}

pub fn criterion(fam: &MultMatrixFamily, cfg: &Config) -> Result<CriterionReport> {
    analyze(fam, cfg).map(|(r, _)| r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Eigenvectors of one coordinate matrix (zero-based axis) with a separated spectrum.
    Single(usize),
    /// Eigenvectors of a random combination `Σ c_i A_i`.
    Generic,
    /// No separated spectrum was found; candidates come from the last combination tried.
    Degenerate,
}

impl Serialize for Strategy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Single(i) => write!(f, "single({})", i + 1),
            Strategy::Generic => write!(f, "generic"),
            Strategy::Degenerate => write!(f, "degenerate"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Root {
    pub z: Point,
    pub residual: f64,
    pub real: bool,
    /// `residual ≤ tol_accept`.
    pub accepted: bool,
    pub residual_before_refinement: f64,
    /// `max_i ‖A_i v − z_i v‖ / ‖v‖` for the eigenvector the root came from.
    pub extraction_residual: f64,
    /// Largest gap between the Rayleigh quotient and the ratio `v[e_i] / v[0]`,
    /// when that ratio is available.
    pub ratio_discrepancy: Option<f64>,
    /// Number of eigenvectors that collapsed onto this root.
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveDiagnostics {
    pub commutation: CommutationReport,
    pub semisimplicity: Vec<SemisimplicityReport>,
    pub eigen: Vec<EigenSummary>,
    /// Coefficients of the random combination, when one was used.
    pub combination: Option<Vec<f64>>,
    pub combination_attempts: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionSet {
    pub verdict: Verdict,
    pub strategy: Strategy,
    pub roots: Vec<Root>,
    /// Distinct roots that pass `tol_accept`.
    pub distinct_count: usize,
    pub basis_size: usize,
    pub diagnostics: SolveDiagnostics,
}

impl SolutionSet {
    pub fn accepted_roots(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.accepted)
    }
}

/// A direction drawn uniformly from the real unit sphere in `R^n`.
fn unit_sphere(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let c: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return c.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn separated(a: &DMatrix<Scalar>, dec: &EigenDecomposition, cfg: &Config) -> bool {
    dec.min_gap() > cfg.tol_cluster * (1.0 + frobenius(a))
}

fn rayleigh(a: &DMatrix<Scalar>, v: &DVector<Scalar>) -> (Scalar, f64) {
    let av = a * v;
    let vv = v.dotc(v);
    let z = v.dotc(&av) / vv;
    let res = (av - v * z).norm() / vv.re.sqrt();
    (z, res)
}

struct Candidate {
    z: Point,
    extraction_residual: f64,
    ratio_discrepancy: Option<f64>,
}

fn extract(sys: &BorderSystem, fam: &MultMatrixFamily, v: &DVector<Scalar>) -> Candidate {
    let n = fam.dim();
    let mut coords = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for a in &fam.matrices {
        let (z, res) = rayleigh(a, v);
        coords.push(z);
        worst = worst.max(res);
    }
    let origin = sys.basis().position(&MultiIndex::zero(n));
    let vnorm = v.norm();
    let ratio_discrepancy = origin
        .filter(|&o| v[o].norm() > 1e-8 * vnorm)
        .and_then(|o| {
            let mut gap = None::<f64>;
            for (i, zi) in coords.iter().enumerate() {
                if let Some(p) = sys.basis().position(&MultiIndex::unit(n, i)) {
                    let d = (v[p] / v[o] - zi).norm();
                    gap = Some(gap.map_or(d, |g| g.max(d)));
                }
            }
            gap
        });
    Candidate {
        z: Point::new(coords),
        extraction_residual: worst,
        ratio_discrepancy,
    }
}

/// Gauss–Newton on `Σ_α |P_α(z)|²`; a step is taken only if it lowers the residual.
pub fn refine(sys: &BorderSystem, z: &Point, iters: usize) -> (Point, f64) {
    let mut best = z.clone();
    let mut best_res = sys.residual(&best);
    for _ in 0..iters {
        if best_res == 0.0 {
            break;
        }
        let f = DVector::from_vec(sys.relation_values(&best));
        let jac = sys.jacobian(&best);
        let svd = jac.svd(true, true);
        let eps = 1e-14 * svd.singular_values.max();
        let Ok(step) = svd.solve(&(-f), eps) else { break };
        let mut next = best.clone();
        for (x, dx) in next.coords_mut().iter_mut().zip(step.iter()) {
            *x += dx;
        }
        if !next.is_finite() {
            break;
        }
        let res = sys.residual(&next);
        if res < best_res {
            best = next;
            best_res = res;
        } else {
            break;
        }
    }
    (best, best_res)
}

fn is_real(z: &Point, cfg: &Config) -> bool {
    let tol = cfg.tol_dedup * (1.0 + z.max_abs());
    z.coords().iter().all(|x| x.im.abs() <= tol)
}

fn canonical_cmp(a: &Point, b: &Point) -> Ordering {
    for (x, y) in a.coords().iter().zip(b.coords()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

pub fn solve(sys: &BorderSystem, cfg: &Config) -> Result<SolutionSet> {
    let fam = build_family(sys)?;
    let (report, decs) = analyze(&fam, cfg)?;
    let n = fam.dim();
    let size = fam.size();

    let mut chosen: Option<(Strategy, DMatrix<Scalar>)> = None;
    if cfg.strategy == StrategyHint::Auto {
        chosen = (0..n)
            .find(|&i| separated(&fam.matrices[i], &decs[i], cfg))
            .map(|i| (Strategy::Single(i), decs[i].eigenvectors.clone()));
    }
    let mut combination = None;
    let mut attempts = 0;
    if chosen.is_none() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut last = None;
        for _ in 0..cfg.max_retries {
            attempts += 1;
            let c = unit_sphere(n, &mut rng);
            let a = fam.combination(&c);
            let dec = eigen(&a, cfg.tol_eig)?;
            let ok = separated(&a, &dec, cfg);
            combination = Some(c);
            if ok {
                chosen = Some((Strategy::Generic, dec.eigenvectors));
                break;
            }
            last = Some(dec);
        }
        if chosen.is_none() {
            if report.verdict.maximal {
                return Err(Error::DegenerateSpectrum { attempts });
            }
            let dec = last.expect("at least one attempt");
            chosen = Some((Strategy::Degenerate, dec.eigenvectors));
        }
    }
    let (strategy, vectors) = chosen.expect("strategy selected");

    let mut roots: Vec<Root> = Vec::new();
    for v in vectors.column_iter() {
        let cand = extract(sys, &fam, &v.clone_owned());
        let before = sys.residual(&cand.z);
        let (z, residual) = refine(sys, &cand.z, cfg.refine_iters);
        let root = Root {
            real: is_real(&z, cfg),
            accepted: residual <= cfg.tol_accept,
            z,
            residual,
            residual_before_refinement: before,
            extraction_residual: cand.extraction_residual,
            ratio_discrepancy: cand.ratio_discrepancy,
            multiplicity: 1,
        };
        let near = roots.iter().position(|r| {
            let scale = 1.0 + r.z.max_abs().max(root.z.max_abs());
            r.z.distance(&root.z) <= cfg.tol_dedup * scale
        });
        match near {
            Some(k) => {
                let count = roots[k].multiplicity + 1;
                if root.residual < roots[k].residual {
                    roots[k] = root;
                }
                roots[k].multiplicity = count;
            }
            None => roots.push(root),
        }
    }
    roots.sort_by(|a, b| canonical_cmp(&a.z, &b.z));
    let distinct_count = roots.iter().filter(|r| r.accepted).count();

    let mut warnings = Vec::new();
    let rejected = roots.len() - distinct_count;
    if rejected > 0 {
        warnings.push(format!(
            "{rejected} candidate root(s) exceed tol_accept = {:e}",
            cfg.tol_accept
        ));
    }
    if report.verdict.maximal && distinct_count != size {
        warnings.push(format!(
            "tolerance inconsistency: the matrices commute and are semisimple but \
             {distinct_count} distinct roots were accepted, expected {size}"
        ));
    }
    if !report.verdict.maximal && distinct_count == size {
        warnings.push(format!(
            "tolerance inconsistency: {size} distinct roots were accepted but the \
             commuting/semisimple test failed"
        ));
    }
    if decs.iter().any(|d| !d.accepted) {
        warnings.push("an eigendecomposition exceeded the tol_eig residual bound".into());
    }

    Ok(SolutionSet {
        verdict: report.verdict,
        strategy,
        roots,
        distinct_count,
        basis_size: size,
        diagnostics: SolveDiagnostics {
            commutation: report.commutation,
            semisimplicity: report.semisimplicity,
            eigen: report.eigen,
            combination,
            combination_attempts: attempts,
            warnings,
        },
    })
}
