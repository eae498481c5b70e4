//! Border-form systems `x^α = Σ_{β∈I} a_{α,β} x^β`, one relation per `α` in the border of `I`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::indexsets::{border, BorderSet, IndexSetSpec, LowerSet, MultiIndex, DEFAULT_SIZE_CAP};
use crate::json;

pub type Scalar = Complex64;

/// A point of `C^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point(Vec<Scalar>);

impl Point {
    pub fn new(coords: Vec<Scalar>) -> Self {
        Point(coords)
    }

    pub fn real(coords: &[f64]) -> Self {
        Point(coords.iter().map(|&x| Scalar::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [Scalar] {
        &mut self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, t: Scalar) -> Point {
        Point(self.0.iter().map(|z| z * t).collect())
    }

    /// Coordinate `k` of the result is coordinate `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Point {
        Point(perm.iter().map(|&p| self.0[p]).collect())
    }
}

/// `z^β = Π z_i^{β_i}`, with `0^0 = 1`.
pub fn monomial_eval(beta: &MultiIndex, z: &Point) -> Scalar {
    debug_assert_eq!(beta.dim(), z.dim());
    beta.exponents()
        .iter()
        .zip(z.coords())
        .fold(Scalar::new(1.0, 0.0), |acc, (&e, &x)| acc * x.powu(e))
}

/// The evaluation vector `(z^β)_{β∈I}` in canonical order.
pub fn monomial_vector(basis: &LowerSet, z: &Point) -> Vec<Scalar> {
    let mut v = vec![Scalar::new(1.0, 0.0); basis.len()];
    for (k, pred) in basis.predecessors().iter().enumerate() {
        if let Some((p, axis)) = *pred {
            v[k] = v[p] * z.coords()[axis];
        }
    }
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct BorderSystem {
    basis: LowerSet,
    border: BorderSet,
    coeffs: Vec<Vec<Scalar>>,
}

impl BorderSystem {
    /// `coeffs[k]` holds `a_{α,·}` for the `k`-th border element in canonical order.
    pub fn new(basis: LowerSet, coeffs: Vec<Vec<Scalar>>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        let border = border(&basis);
        if coeffs.len() != border.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} relations, found {}",
                border.len(),
                coeffs.len()
            )));
        }
        for (k, row) in coeffs.iter().enumerate() {
            let alpha = &border.members()[k];
            if row.len() != basis.len() {
                return Err(Error::CoefficientLength {
                    path: format!("relation {alpha}"),
                    expected: basis.len(),
                    found: row.len(),
                });
            }
            if row.iter().any(|a| !a.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("relation {alpha}"),
                });
            }
        }
        Ok(BorderSystem {
            basis,
            border,
            coeffs,
        })
    }

    /// Builds a system from a rule giving the coefficient row of each border index.
    pub fn from_fn<F>(basis: LowerSet, mut row: F) -> Result<Self>
    where
        F: FnMut(&MultiIndex) -> Vec<Scalar>,
    {
        let coeffs = border(&basis).members().iter().map(&mut row).collect();
        BorderSystem::new(basis, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &LowerSet {
        &self.basis
    }

    pub fn border(&self) -> &BorderSet {
        &self.border
    }

    pub fn coeffs(&self) -> &[Vec<Scalar>] {
        &self.coeffs
    }

    pub fn relation(&self, alpha: &MultiIndex) -> Option<&[Scalar]> {
        self.border.position(alpha).map(|k| &self.coeffs[k][..])
    }

    fn check_point(&self, z: &Point) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.dim(),
            });
        }
        Ok(())
    }

    /// `P_α(z) = z^α − Σ_β a_{α,β} z^β`.
    pub fn eval_relation(&self, alpha: &MultiIndex, z: &Point) -> Result<Scalar> {
        self.check_point(z)?;
        let k = self
            .border
            .position(alpha)
            .ok_or_else(|| Error::UnknownRelation(alpha.clone()))?;
        let v = monomial_vector(&self.basis, z);
        Ok(self.relation_at(k, &v, z))
    }

    fn relation_at(&self, k: usize, v: &[Scalar], z: &Point) -> Scalar {
        let (b, axis) = self.border.generators()[k];
        let lead = v[b] * z.coords()[axis];
        let tail: Scalar = self.coeffs[k].iter().zip(v).map(|(a, m)| a * m).sum();
        lead - tail
    }

    /// All `P_α(z)` in canonical border order.
    pub fn relation_values(&self, z: &Point) -> Vec<Scalar> {
        let v = monomial_vector(&self.basis, z);
        (0..self.border.len())
            .map(|k| self.relation_at(k, &v, z))
            .collect()
    }

    /// `max_α |P_α(z)| / max(1, max_{β∈I} |z^β|)`.
    pub fn residual(&self, z: &Point) -> f64 {
        let v = monomial_vector(&self.basis, z);
        let scale = v.iter().map(|m| m.norm()).fold(1.0, f64::max);
        let worst = (0..self.border.len())
            .map(|k| self.relation_at(k, &v, z).norm())
            .fold(0.0, f64::max);
        worst / scale
    }

    /// `∂P_α/∂z_j`, one row per border index.
    pub fn jacobian(&self, z: &Point) -> DMatrix<Scalar> {
        let n = self.dim();
        let deriv = |beta: &MultiIndex, j: usize| -> Scalar {
            match beta.step_down(j) {
                Some(lower) => monomial_eval(&lower, z) * f64::from(beta.exponents()[j]),
                None => Scalar::new(0.0, 0.0),
            }
        };
        // derivatives of the basis monomials are shared by all rows
        let basis_deriv: Vec<Vec<Scalar>> = self
            .basis
            .members()
            .iter()
            .map(|b| (0..n).map(|j| deriv(b, j)).collect())
            .collect();
        DMatrix::from_fn(self.border.len(), n, |k, j| {
            let alpha = &self.border.members()[k];
            let tail: Scalar = self.coeffs[k]
                .iter()
                .zip(&basis_deriv)
                .map(|(a, d)| a * d[j])
                .sum();
            deriv(alpha, j) - tail
        })
    }

    /// The same system with coordinates reordered: new variable `k` is old variable `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<BorderSystem> {
        let basis = self.basis.permuted(perm);
        let old_of_new: Vec<usize> = basis
            .members()
            .iter()
            .map(|b| {
                let mut inverse = vec![0; perm.len()];
                for (k, &p) in perm.iter().enumerate() {
                    inverse[p] = k;
                }
                self.basis.position(&b.permuted(&inverse)).expect("permuted basis")
            })
            .collect();
        let rows: HashMap<MultiIndex, Vec<Scalar>> = self
            .border
            .members()
            .iter()
            .zip(&self.coeffs)
            .map(|(a, row)| {
                let new_row = old_of_new.iter().map(|&o| row[o]).collect();
                (a.permuted(perm), new_row)
            })
            .collect();
        BorderSystem::from_fn(basis, |a| rows[a].clone())
    }
}

#[derive(Serialize)]
struct RelationDoc<'a> {
    alpha: &'a MultiIndex,
    coeffs: &'a [Scalar],
}

#[derive(Serialize)]
struct SystemDoc<'a> {
    index_set: IndexSetSpec,
    basis: &'a [MultiIndex],
    relations: Vec<RelationDoc<'a>>,
}

impl Serialize for BorderSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SystemDoc {
            index_set: self.basis.to_spec(),
            basis: self.basis.members(),
            relations: self
                .border
                .members()
                .iter()
                .zip(&self.coeffs)
                .map(|(alpha, coeffs)| RelationDoc { alpha, coeffs })
                .collect(),
        }
        .serialize(serializer)
    }
}

pub fn serialize_system(sys: &BorderSystem) -> String {
    json::to_string(sys).expect("systems hold only finite scalars")
}

pub fn parse_system(text: &str) -> Result<BorderSystem> {
    parse_system_capped(text, DEFAULT_SIZE_CAP)
}

pub fn parse_system_capped(text: &str, cap: usize) -> Result<BorderSystem> {
    let doc: Value = serde_json::from_str(text)?;
    system_from_value(&doc, cap)
}

pub(crate) fn index_set_from_value(v: &Value, path: &str, cap: usize) -> Result<LowerSet> {
    let spec: IndexSetSpec = serde_json::from_value(v.clone())
        .map_err(|e| Error::schema(path, e.to_string()))?;
    spec.build(cap)
}

/// Reads a system document; unknown top-level keys are ignored.
pub fn system_from_value(doc: &Value, cap: usize) -> Result<BorderSystem> {
    let basis = index_set_from_value(json::field(doc, "index_set", "$")?, "index_set", cap)?;
    let n = basis.dim();

    if let Some(listed) = doc.get("basis") {
        let listed = json::array(listed, "basis")?;
        let ok = listed.len() == basis.len()
            && listed.iter().enumerate().all(|(k, b)| {
                json::exponents(b, "basis").ok().as_deref() == Some(basis.members()[k].exponents())
            });
        if !ok {
            return Err(Error::schema(
                "basis",
                "does not match the canonical ordering of index_set",
            ));
        }
    }

    let j = border(&basis);
    let mut rows: Vec<Option<Vec<Scalar>>> = vec![None; j.len()];
    let relations = json::array(json::field(doc, "relations", "$")?, "relations")?;
    for (r, rel) in relations.iter().enumerate() {
        let path = format!("relations[{r}]");
        let exps = json::exponents(json::field(rel, "alpha", &path)?, &format!("{path}.alpha"))?;
        if exps.len() != n {
            return Err(Error::schema(
                format!("{path}.alpha"),
                format!("expected {n} exponents, found {}", exps.len()),
            ));
        }
        let alpha = MultiIndex::new(exps);
        if basis.contains(&alpha) {
            return Err(Error::AlphaInsideBasis {
                path: format!("{path}.alpha"),
                alpha,
            });
        }
        let k = j.position(&alpha).ok_or_else(|| Error::AlphaNotInBorder {
            path: format!("{path}.alpha"),
            alpha: alpha.clone(),
        })?;
        let coeff_path = format!("{path}.coeffs");
        let coeffs = json::scalars(json::field(rel, "coeffs", &path)?, &coeff_path)?;
        if coeffs.len() != basis.len() {
            return Err(Error::CoefficientLength {
                path: coeff_path,
                expected: basis.len(),
                found: coeffs.len(),
            });
        }
        if rows[k].replace(coeffs).is_some() {
            return Err(Error::DuplicateRelation { path, alpha });
        }
    }
    let coeffs = rows
        .into_iter()
        .enumerate()
        .map(|(k, row)| row.ok_or_else(|| Error::MissingRelation(j.members()[k].clone())))
        .collect::<Result<Vec<_>>>()?;
    BorderSystem::new(basis, coeffs)
}
