//! Lagrange interpolation on a lower set and synthesis of the border system
//! vanishing on a node set.

use nalgebra::{DMatrix, DVector, LU};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::indexsets::{border, LowerSet};
use crate::json;
use crate::system::{monomial_eval, monomial_vector, BorderSystem, Point, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    dim: usize,
    nodes: Vec<Point>,
}

impl NodeSet {
    pub fn new(dim: usize, nodes: Vec<Point>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension n must be at least 1".into()));
        }
        for (k, z) in nodes.iter().enumerate() {
            if z.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: z.dim(),
                });
            }
            if !z.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("points[{k}]"),
                });
            }
        }
        Ok(NodeSet { dim, nodes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }
}

impl Serialize for NodeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            n: usize,
            points: &'a [Point],
        }
        Doc {
            n: self.dim,
            points: &self.nodes,
        }
        .serialize(s)
    }
}

pub fn parse_points(text: &str) -> Result<NodeSet> {
    let doc: Value = serde_json::from_str(text)?;
    points_from_value(&doc)
}

pub fn points_from_value(doc: &Value) -> Result<NodeSet> {
    let n = json::field(doc, "n", "$")?
        .as_u64()
        .ok_or_else(|| Error::schema("n", "expected a positive integer"))? as usize;
    let points = json::array(json::field(doc, "points", "$")?, "points")?
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let path = format!("points[{k}]");
            let coords = json::scalars(p, &path)?;
            if coords.len() != n {
                return Err(Error::schema(path, format!("expected {n} coordinates, found {}", coords.len())));
            }
            Ok(Point::new(coords))
        })
        .collect::<Result<Vec<_>>>()?;
    NodeSet::new(n, points)
}

fn check_sizes(basis: &LowerSet, nodes: &NodeSet) -> Result<()> {
    if nodes.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: nodes.dim(),
        });
    }
    if nodes.len() != basis.len() {
        return Err(Error::NodeCount {
            expected: basis.len(),
            found: nodes.len(),
        });
    }
    Ok(())
}

/// Entry `[s][k]` is `nodes[s]^{β_k}`.
pub fn vandermonde(basis: &LowerSet, nodes: &NodeSet) -> Result<DMatrix<Scalar>> {
    check_sizes(basis, nodes)?;
    let rows: Vec<Vec<Scalar>> = nodes.nodes().iter().map(|z| monomial_vector(basis, z)).collect();
    Ok(DMatrix::from_fn(nodes.len(), basis.len(), |s, k| rows[s][k]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoisednessReport {
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
    /// `σ_max / σ_min`; infinite when the node set is not poised.
    pub condition: f64,
    pub poised: bool,
    pub tolerance_used: f64,
}

fn report_for(vander: &DMatrix<Scalar>, tol: f64) -> PoisednessReport {
    let sv = vander.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let poised = smin > tol * smax;
    PoisednessReport {
        smallest_singular_value: smin,
        largest_singular_value: smax,
        condition: if poised { smax / smin } else { f64::INFINITY },
        poised,
        tolerance_used: tol,
    }
}

pub fn poisedness(basis: &LowerSet, nodes: &NodeSet, tol: f64) -> Result<PoisednessReport> {
    Ok(report_for(&vandermonde(basis, nodes)?, tol))
}

/// A factored Vandermonde matrix, reused across right-hand sides.
pub struct Interpolator {
    vander: DMatrix<Scalar>,
    lu: LU<Scalar, nalgebra::Dyn, nalgebra::Dyn>,
    report: PoisednessReport,
}

impl Interpolator {
    pub fn new(basis: &LowerSet, nodes: &NodeSet, tol: f64) -> Result<Self> {
        let vander = vandermonde(basis, nodes)?;
        let report = report_for(&vander, tol);
        if !report.poised {
            return Err(Error::NotPoised(Box::new(report)));
        }
        let lu = LU::new(vander.clone());
        Ok(Interpolator { vander, lu, report })
    }

    pub fn report(&self) -> &PoisednessReport {
        &self.report
    }

    /// Coefficients `c` with `Σ_β c_β z_s^β = values[s]`, polished by one step of
    /// iterative refinement.
    pub fn solve(&self, values: &[Scalar]) -> Vec<Scalar> {
        let b = DVector::from_column_slice(values);
        let mut c = self.lu.solve(&b).expect("poised matrix is invertible");
        let r = &b - &self.vander * &c;
        if let Some(dc) = self.lu.solve(&r) {
            let candidate = &c + dc;
            let r2 = &b - &self.vander * &candidate;
            if r2.norm() <= r.norm() {
                c = candidate;
            }
        }
        c.iter().copied().collect()
    }
}

pub fn interpolate(
    basis: &LowerSet,
    nodes: &NodeSet,
    values: &[Scalar],
    tol: f64,
) -> Result<Vec<Scalar>> {
    if values.len() != nodes.len() {
        return Err(Error::NodeCount {
            expected: nodes.len(),
            found: values.len(),
        });
    }
    Ok(Interpolator::new(basis, nodes, tol)?.solve(values))
}

/// A synthesized system together with the diagnostics of its construction.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub system: BorderSystem,
    pub poisedness: PoisednessReport,
    /// `max_s residual(system, nodes[s])`.
    pub max_node_residual: f64,
}

/// The unique border system over `basis` whose solutions include every node:
/// each border monomial is replaced by its interpolant on the nodes.
pub fn system_from_nodes(basis: &LowerSet, nodes: &NodeSet, tol: f64) -> Result<BorderSystem> {
    synthesize(basis, nodes, tol).map(|s| s.system)
}

pub fn synthesize(basis: &LowerSet, nodes: &NodeSet, tol: f64) -> Result<Synthesis> {
    let interp = Interpolator::new(basis, nodes, tol)?;
    let j = border(basis);
    let coeffs = j
        .members()
        .iter()
        .map(|alpha| {
            let values: Vec<Scalar> = nodes.nodes().iter().map(|z| monomial_eval(alpha, z)).collect();
            interp.solve(&values)
        })
        .collect();
    let system = BorderSystem::new(basis.clone(), coeffs)?;
    let max_node_residual = nodes
        .nodes()
        .iter()
        .map(|z| system.residual(z))
        .fold(0.0, f64::max);
    Ok(Synthesis {
        system,
        poisedness: interp.report,
        max_node_residual,
    })
}
