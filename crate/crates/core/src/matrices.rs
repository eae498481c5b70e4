//! Multiplication matrices `A_1..A_n` of a border system and their commutators.
//!
//! Row `β` of `A_i` expands `x_i · x^β` in the basis `{x^β : β ∈ I}`: a unit
//! row when `β + e_i` stays in `I`, the relation row `a_{β+e_i,·}` when it
//! lands on the border. Evaluation vectors of solutions are right eigenvectors.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::eigen::frobenius;
use crate::error::{Error, Result};
use crate::indexsets::{LowerSet, MultiIndex};
use crate::system::{BorderSystem, Scalar};

#[derive(Clone, Debug)]
pub struct MultMatrixFamily {
    pub basis: LowerSet,
    pub matrices: Vec<DMatrix<Scalar>>,
    pub unit_row_count: Vec<usize>,
    pub coeff_row_count: Vec<usize>,
}

impl MultMatrixFamily {
    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    /// `Σ c_i A_i`.
    pub fn combination(&self, c: &[f64]) -> DMatrix<Scalar> {
        let k = self.size();
        self.matrices
            .iter()
            .zip(c)
            .fold(DMatrix::zeros(k, k), |acc, (a, &ci)| acc + a * Scalar::new(ci, 0.0))
    }
}

/// Which rule produced a row of `A_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    /// `β + e_i ∈ I`: a single 1 at column `position(β + e_i)`.
    Unit(usize),
    /// `β + e_i` is border element number `k`.
    Relation(usize),
}

/// Classifies every row of `A_axis` (axis is zero-based).
pub fn row_kinds(sys: &BorderSystem, axis: usize) -> Result<Vec<RowKind>> {
    sys.basis()
        .members()
        .iter()
        .map(|b| {
            let up = b.step_up(axis);
            if let Some(p) = sys.basis().position(&up) {
                Ok(RowKind::Unit(p))
            } else if let Some(k) = sys.border().position(&up) {
                Ok(RowKind::Relation(k))
            } else {
                Err(Error::Inconsistent(up))
            }
        })
        .collect()
}

/// The multiplication matrix for coordinate `axis` (zero-based).
pub fn build_matrix(sys: &BorderSystem, axis: usize) -> Result<DMatrix<Scalar>> {
    if axis >= sys.dim() {
        return Err(Error::InvalidParameter(format!(
            "axis {axis} out of range for dimension {}",
            sys.dim()
        )));
    }
    let size = sys.basis().len();
    let mut a = DMatrix::zeros(size, size);
    for (row, kind) in row_kinds(sys, axis)?.into_iter().enumerate() {
        match kind {
            RowKind::Unit(col) => a[(row, col)] = Scalar::new(1.0, 0.0),
            RowKind::Relation(k) => {
                for (col, &coef) in sys.coeffs()[k].iter().enumerate() {
                    a[(row, col)] = coef;
                }
            }
        }
    }
    Ok(a)
}

pub fn build_family(sys: &BorderSystem) -> Result<MultMatrixFamily> {
    let n = sys.dim();
    let mut matrices = Vec::with_capacity(n);
    let mut unit_row_count = Vec::with_capacity(n);
    let mut coeff_row_count = Vec::with_capacity(n);
    for axis in 0..n {
        let kinds = row_kinds(sys, axis)?;
        let units = kinds.iter().filter(|k| matches!(k, RowKind::Unit(_))).count();
        unit_row_count.push(units);
        coeff_row_count.push(kinds.len() - units);
        matrices.push(build_matrix(sys, axis)?);
    }
    Ok(MultMatrixFamily {
        basis: sys.basis().clone(),
        matrices,
        unit_row_count,
        coeff_row_count,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutationReport {
    /// `‖A_iA_j − A_jA_i‖_F / max(1, ‖A_i‖_F ‖A_j‖_F)`.
    pub defects: Vec<Vec<f64>>,
    pub max_defect: f64,
    pub tolerance_used: f64,
    pub commuting: bool,
}

pub fn commutation_report(fam: &MultMatrixFamily, tol: f64) -> CommutationReport {
    let n = fam.dim();
    let norms: Vec<f64> = fam.matrices.iter().map(frobenius).collect();
    let mut defects = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&fam.matrices[i], &fam.matrices[j]);
            let comm = a * b - b * a;
            let d = frobenius(&comm) / (norms[i] * norms[j]).max(1.0);
            defects[i][j] = d;
            defects[j][i] = d;
        }
    }
    let max_defect = defects.iter().flatten().copied().fold(0.0, f64::max);
    CommutationReport {
        defects,
        max_defect,
        tolerance_used: tol,
        commuting: max_defect <= tol,
    }
}

/// JSON view used by the `matrices` command.
#[derive(Serialize)]
pub struct FamilyDoc<'a> {
    pub basis: &'a [MultiIndex],
    #[serde(rename = "A")]
    pub matrices: Vec<Vec<Vec<Scalar>>>,
    pub unit_row_count: &'a [usize],
    pub coeff_row_count: &'a [usize],
}

impl MultMatrixFamily {
    pub fn doc(&self) -> FamilyDoc<'_> {
        FamilyDoc {
            basis: self.basis.members(),
            matrices: self
                .matrices
                .iter()
                .map(|a| a.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect(),
            unit_row_count: &self.unit_row_count,
            coeff_row_count: &self.coeff_row_count,
        }
    }
}
