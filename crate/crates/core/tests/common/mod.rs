#![allow(dead_code)]

use border_eig::indexsets::{total_degree_set, LowerSet};
use border_eig::interp::{poisedness, NodeSet};
use border_eig::system::{BorderSystem, Point, Scalar};
use rand::Rng;

pub fn c(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

/// Real nodes uniform in [−1, 1]^n with pairwise separation ≥ `min_sep`,
/// redrawn until the set is poised for `basis`.
pub fn random_nodes<R: Rng>(basis: &LowerSet, min_sep: f64, rng: &mut R) -> NodeSet {
    let n = basis.dim();
    loop {
        let mut pts: Vec<Point> = Vec::with_capacity(basis.len());
        while pts.len() < basis.len() {
            let cand: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let cand = Point::real(&cand);
            if pts.iter().all(|p| p.distance(&cand) >= min_sep) {
                pts.push(cand);
            }
        }
        let set = NodeSet::new(n, pts).unwrap();
        if poisedness(basis, &set, 1e-10).unwrap().poised {
            return set;
        }
    }
}

/// Smallest achievable maximum displacement over perfect matchings of `a` onto `b`
/// (infinite when the sizes differ).
pub fn bottleneck_distance(a: &[Point], b: &[Point]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    let dist: Vec<Vec<f64>> = a.iter().map(|p| b.iter().map(|q| p.distance(q)).collect()).collect();
    let mut levels: Vec<f64> = dist.iter().flatten().copied().collect();
    levels.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (0, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(&dist, levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    levels[lo]
}

fn perfect_matching(dist: &[Vec<f64>], limit: f64) -> bool {
    let n = dist.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(u: usize, dist: &[Vec<f64>], limit: f64, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for v in 0..dist.len() {
            if dist[u][v] <= limit && !seen[v] {
                seen[v] = true;
                if owner[v].is_none_or(|w| augment(w, dist, limit, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    (0..n).all(|u| augment(u, dist, limit, &mut vec![false; n], &mut owner))
}

fn system_2d(xx: [f64; 3], xy: [f64; 3], yy: [f64; 3]) -> BorderSystem {
    BorderSystem::new(
        total_degree_set(2, 1).unwrap(),
        [xx, xy, yy].iter().map(|r| r.iter().map(|&v| c(v)).collect()).collect(),
    )
    .unwrap()
}

/// x² = x, xy = 0, y² = y: solutions (0,0), (1,0), (0,1).
pub fn idempotent() -> BorderSystem {
    system_2d([0.0, 1.0, 0.0], [0.0; 3], [0.0, 0.0, 1.0])
}

/// x² = 1, xy = 0, y² = 1: the multiplication matrices do not commute.
pub fn non_commuting() -> BorderSystem {
    system_2d([1.0, 0.0, 0.0], [0.0; 3], [1.0, 0.0, 0.0])
}

/// x² = 0: a nilpotent companion matrix.
pub fn nilpotent() -> BorderSystem {
    BorderSystem::new(total_degree_set(1, 1).unwrap(), vec![vec![c(0.0), c(0.0)]]).unwrap()
}

/// x² = 1.
pub fn plus_minus_one() -> BorderSystem {
    BorderSystem::new(total_degree_set(1, 1).unwrap(), vec![vec![c(1.0), c(0.0)]]).unwrap()
}

/// Coefficients of Π (x − r_k), lowest degree first, leading 1 included.
pub fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; p.len() + 1];
        for (k, &a) in p.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= r * a;
        }
        p = next;
    }
    p
}

/// The relation x^{m+1} = Σ a_j x^j whose roots are `roots` (m + 1 of them).
pub fn univariate_from_roots(roots: &[f64]) -> BorderSystem {
    let p = poly_from_roots(roots);
    let m = roots.len() as u32 - 1;
    let a: Vec<Scalar> = p[..p.len() - 1].iter().map(|&x| c(-x)).collect();
    BorderSystem::new(total_degree_set(1, m).unwrap(), vec![a]).unwrap()
}
