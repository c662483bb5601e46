//! Concrete operator models with resolvent solves, spectra and an
//! eigenprojection oracle that every contour computation is validated
//! against.
//!
//! Four models: dense matrices, diagonal operators, diagonal plus a finite
//! series of rank-one terms (resolvents through the low-rank update
//! formula), and discretized multiplication operators given by point masses.

use crate::contour::{Cycle, Region};
use crate::error::{Result, SpectralCutError};
use crate::geom::complex_pair;
use crate::{linalg, C64, CMatrix, CVector};
use serde::{Deserialize, Serialize};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Coefficient data for `T = D_Λ + Σ_k u_k ⊗ v_k` where
/// `u_k = Σ_n alpha[k][n] e_n` and `v_k = Σ_n beta[k][n] e_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagPlusSeries {
    pub lambda: Vec<C64>,
    pub alpha: Vec<Vec<C64>>,
    pub beta: Vec<Vec<C64>>,
}

impl DiagPlusSeries {
    pub fn new(lambda: Vec<C64>, alpha: Vec<Vec<C64>>, beta: Vec<Vec<C64>>) -> Result<Self> {
        let n = lambda.len();
        if n == 0 {
            return Err(SpectralCutError::Other("empty diagonal".into()));
        }
        if alpha.len() != beta.len() {
            return Err(SpectralCutError::Other(
                "alpha and beta must have the same number of rank-one terms".into(),
            ));
        }
        for row in alpha.iter().chain(beta.iter()) {
            if row.len() != n {
                return Err(SpectralCutError::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            if row.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(SpectralCutError::Other("non-finite coefficient".into()));
            }
        }
        if lambda.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SpectralCutError::Other("non-finite eigenvalue".into()));
        }
        Ok(DiagPlusSeries { lambda, alpha, beta })
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn rank_terms(&self) -> usize {
        self.alpha.len()
    }

    /// Σ_k ‖u_k‖·‖v_k‖ at the truncation.
    pub fn series_norm_sum(&self) -> f64 {
        let nrm = |row: &Vec<C64>| row.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        self.alpha
            .iter()
            .zip(self.beta.iter())
            .map(|(a, b)| nrm(a) * nrm(b))
            .sum()
    }

    /// Explicit dense assembly `D + Σ u_k v_k^*`.
    pub fn densify(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.lambda[i];
        }
        for (a, b) in self.alpha.iter().zip(self.beta.iter()) {
            for i in 0..n {
                if a[i] == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    m[(i, j)] += a[i] * b[j].conj();
                }
            }
        }
        m
    }
}

/// A concrete linear operator exposing apply, resolvent and spectrum.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorModel {
    Dense(CMatrix),
    Diagonal(Vec<C64>),
    DiagonalPlusSeries(DiagPlusSeries),
    PointMass { nodes: Vec<C64>, weights: Vec<f64> },
}

/// Eigenvalues with algebraic multiplicity (repeated entries).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
}

impl Spectrum {
    pub fn distance_to(&self, p: C64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|e| (e - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum distance from any eigenvalue to the cycle.
    pub fn gap_to_cycle(&self, cycle: &Cycle) -> f64 {
        self.eigenvalues
            .iter()
            .map(|e| cycle.distance_to_point(*e))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bounding_values(&self) -> (f64, f64, f64, f64) {
        let mut re_lo = f64::INFINITY;
        let mut re_hi = f64::NEG_INFINITY;
        let mut im_lo = f64::INFINITY;
        let mut im_hi = f64::NEG_INFINITY;
        for e in &self.eigenvalues {
            re_lo = re_lo.min(e.re);
            re_hi = re_hi.max(e.re);
            im_lo = im_lo.min(e.im);
            im_hi = im_hi.max(e.im);
        }
        (re_lo, re_hi, im_lo, im_hi)
    }
}

/// Membership test used by the spectral-subspace oracle: a region with a
/// boundary-distance estimate.
pub trait SpectralRegion {
    fn region_contains(&self, p: C64) -> bool;
    fn region_boundary_distance(&self, p: C64) -> f64;
}

impl SpectralRegion for Region {
    fn region_contains(&self, p: C64) -> bool {
        self.contains(p, 0.0)
    }

    fn region_boundary_distance(&self, p: C64) -> f64 {
        self.boundary_distance(p)
    }
}

/// A cycle acts as the closure of its interior.
impl SpectralRegion for Cycle {
    fn region_contains(&self, p: C64) -> bool {
        self.distance_to_point(p) <= 1e-12 * self.diameter().max(1.0)
            || self.winding_unchecked(p) == 1
    }

    fn region_boundary_distance(&self, p: C64) -> f64 {
        self.distance_to_point(p)
    }
}

/// Prefactored resolvent `(zI − T)⁻¹` for repeated right-hand sides.
pub enum ResolventFactor {
    DenseLu {
        lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
        z: C64,
    },
    Diagonal {
        inv: Vec<C64>,
    },
    LowRank {
        inv_diag: Vec<C64>,
        ru: CMatrix,
        beta: Vec<Vec<C64>>,
        cap_lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    },
}

impl ResolventFactor {
    pub fn solve(&self, x: &CVector) -> CVector {
        match self {
            ResolventFactor::DenseLu { lu, .. } => lu.solve(x).expect("factored LU solves"),
            ResolventFactor::Diagonal { inv } => {
                CVector::from_fn(inv.len(), |i, _| inv[i] * x[i])
            }
            ResolventFactor::LowRank {
                inv_diag,
                ru,
                beta,
                cap_lu,
            } => {
                let n = inv_diag.len();
                let k = beta.len();
                let r = CVector::from_fn(n, |i, _| inv_diag[i] * x[i]);
                let t = CVector::from_fn(k, |m, _| {
                    (0..n).map(|i| beta[m][i].conj() * r[i]).sum::<C64>()
                });
                let s = cap_lu.solve(&t).expect("capacitance solve");
                &r + ru * s
            }
        }
    }

    /// Full resolvent matrix (columns are solves against the identity).
    pub fn solve_identity(&self, n: usize) -> CMatrix {
        match self {
            ResolventFactor::Diagonal { inv } => {
                let mut m = CMatrix::zeros(n, n);
                for i in 0..n {
                    m[(i, i)] = inv[i];
                }
                m
            }
            _ => {
                let mut m = CMatrix::zeros(n, n);
                for j in 0..n {
                    let mut e = CVector::zeros(n);
                    e[j] = c(1.0, 0.0);
                    m.set_column(j, &self.solve(&e));
                }
                m
            }
        }
    }
}

impl OperatorModel {
    pub fn dense(m: CMatrix) -> Self {
        OperatorModel::Dense(m)
    }

    pub fn diagonal(lambda: Vec<C64>) -> Self {
        OperatorModel::Diagonal(lambda)
    }

    pub fn point_mass(nodes: Vec<C64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(SpectralCutError::DimensionMismatch {
                expected: nodes.len(),
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| *w <= 0.0 || !w.is_finite()) {
            return Err(SpectralCutError::Other("weights must be strictly positive".into()));
        }
        Ok(OperatorModel::PointMass { nodes, weights })
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorModel::Dense(m) => m.nrows(),
            OperatorModel::Diagonal(l) => l.len(),
            OperatorModel::DiagonalPlusSeries(d) => d.dim(),
            OperatorModel::PointMass { nodes, .. } => nodes.len(),
        }
    }

    /// Diagonal of the model when it acts diagonally (diagonal and
    /// point-mass models).
    pub fn diagonal_entries(&self) -> Option<&[C64]> {
        match self {
            OperatorModel::Diagonal(l) => Some(l),
            OperatorModel::PointMass { nodes, .. } => Some(nodes),
            _ => None,
        }
    }

    pub fn apply(&self, x: &CVector) -> Result<CVector> {
        if x.len() != self.dim() {
            return Err(SpectralCutError::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(match self {
            OperatorModel::Dense(m) => m * x,
            OperatorModel::Diagonal(l) => CVector::from_fn(l.len(), |i, _| l[i] * x[i]),
            OperatorModel::PointMass { nodes, .. } => {
                CVector::from_fn(nodes.len(), |i, _| nodes[i] * x[i])
            }
            OperatorModel::DiagonalPlusSeries(d) => {
                let mut y = CVector::from_fn(d.dim(), |i, _| d.lambda[i] * x[i]);
                for (a, b) in d.alpha.iter().zip(d.beta.iter()) {
                    let inner: C64 = (0..d.dim()).map(|i| x[i] * b[i].conj()).sum();
                    for i in 0..d.dim() {
                        y[i] += inner * a[i];
                    }
                }
                y
            }
        })
    }

    /// `max(1, induced 1-norm estimate)`: the scale entering every relative
    /// error threshold.
    pub fn scale(&self) -> f64 {
        let raw = match self {
            OperatorModel::Dense(m) => linalg::one_norm(m),
            OperatorModel::Diagonal(l) => l.iter().map(|v| v.norm()).fold(0.0, f64::max),
            OperatorModel::PointMass { nodes, .. } => {
                nodes.iter().map(|v| v.norm()).fold(0.0, f64::max)
            }
            OperatorModel::DiagonalPlusSeries(d) => {
                d.lambda.iter().map(|v| v.norm()).fold(0.0, f64::max) + d.series_norm_sum()
            }
        };
        raw.max(1.0)
    }

    /// Operator 2-norm (power iteration; exact for diagonal models).
    pub fn norm_2(&self) -> f64 {
        match self {
            OperatorModel::Dense(m) => linalg::operator_norm(m),
            OperatorModel::Diagonal(l) => l.iter().map(|v| v.norm()).fold(0.0, f64::max),
            OperatorModel::PointMass { nodes, .. } => {
                nodes.iter().map(|v| v.norm()).fold(0.0, f64::max)
            }
            OperatorModel::DiagonalPlusSeries(d) => {
                // power iteration on T*T through apply
                let n = d.dim();
                let adj = self.adjoint();
                let mut v = CVector::from_fn(n, |i, _| c(1.0 + 0.1 * i as f64, 0.0));
                let nv = v.norm();
                v /= c(nv, 0.0);
                let mut sigma = 0.0;
                for _ in 0..500 {
                    let av = self.apply(&v).expect("dims match");
                    let s = av.norm();
                    let w = adj.apply(&av).expect("dims match");
                    let nw = w.norm();
                    if nw == 0.0 {
                        return s;
                    }
                    v = w / c(nw, 0.0);
                    if (s - sigma).abs() <= 1e-12 * s.max(1e-300) {
                        return s;
                    }
                    sigma = s;
                }
                sigma
            }
        }
    }

    /// Conjugate-transpose model.
    pub fn adjoint(&self) -> OperatorModel {
        match self {
            OperatorModel::Dense(m) => OperatorModel::Dense(m.adjoint()),
            OperatorModel::Diagonal(l) => {
                OperatorModel::Diagonal(l.iter().map(|v| v.conj()).collect())
            }
            OperatorModel::PointMass { nodes, weights } => OperatorModel::PointMass {
                nodes: nodes.iter().map(|v| v.conj()).collect(),
                weights: weights.clone(),
            },
            OperatorModel::DiagonalPlusSeries(d) => {
                OperatorModel::DiagonalPlusSeries(DiagPlusSeries {
                    lambda: d.lambda.iter().map(|v| v.conj()).collect(),
                    alpha: d.beta.clone(),
                    beta: d.alpha.clone(),
                })
            }
        }
    }

    /// Distance from `z` to the set of diagonal poles / eigenvalues that
    /// make the resolvent singular.
    fn pole_distance(&self, z: C64) -> f64 {
        match self {
            OperatorModel::Diagonal(l) => l.iter().map(|v| (z - v).norm()).fold(f64::INFINITY, f64::min),
            OperatorModel::PointMass { nodes, .. } => {
                nodes.iter().map(|v| (z - v).norm()).fold(f64::INFINITY, f64::min)
            }
            OperatorModel::DiagonalPlusSeries(d) => d
                .lambda
                .iter()
                .map(|v| (z - v).norm())
                .fold(f64::INFINITY, f64::min),
            OperatorModel::Dense(_) => f64::INFINITY, // guarded by the LU residual instead
        }
    }

    /// Factorizes `(zI − T)` for repeated solves.
    pub fn resolvent_factor(&self, z: C64) -> Result<ResolventFactor> {
        let scale = self.scale();
        let singular_tol = 1e-13 * scale;
        match self {
            OperatorModel::Dense(m) => {
                let n = m.nrows();
                let mut a = -m.clone();
                for i in 0..n {
                    a[(i, i)] += z;
                }
                let lu = a.lu();
                // cheap singularity guard through the diagonal of U
                let umin = (0..n).map(|i| lu.u()[(i, i)].norm()).fold(f64::INFINITY, f64::min);
                if umin <= 1e-13 * scale.max(z.norm()) {
                    return Err(SpectralCutError::SingularResolvent { z, distance: umin });
                }
                Ok(ResolventFactor::DenseLu { lu, z })
            }
            OperatorModel::Diagonal(l) => {
                let d = self.pole_distance(z);
                if d <= singular_tol {
                    return Err(SpectralCutError::SingularResolvent { z, distance: d });
                }
                Ok(ResolventFactor::Diagonal {
                    inv: l.iter().map(|v| c(1.0, 0.0) / (z - v)).collect(),
                })
            }
            OperatorModel::PointMass { nodes, .. } => {
                let d = self.pole_distance(z);
                if d <= singular_tol {
                    return Err(SpectralCutError::SingularResolvent { z, distance: d });
                }
                Ok(ResolventFactor::Diagonal {
                    inv: nodes.iter().map(|v| c(1.0, 0.0) / (z - v)).collect(),
                })
            }
            OperatorModel::DiagonalPlusSeries(d) => {
                let dist = self.pole_distance(z);
                if dist <= singular_tol {
                    return Err(SpectralCutError::SingularResolvent { z, distance: dist });
                }
                let n = d.dim();
                let k = d.rank_terms();
                let inv_diag: Vec<C64> = d.lambda.iter().map(|v| c(1.0, 0.0) / (z - v)).collect();
                // RU: columns R u_k; capacitance I − V* R U
                let mut ru = CMatrix::zeros(n, k);
                for (kk, a) in d.alpha.iter().enumerate() {
                    for i in 0..n {
                        ru[(i, kk)] = inv_diag[i] * a[i];
                    }
                }
                let mut cap = CMatrix::identity(k, k);
                for row in 0..k {
                    for col in 0..k {
                        let mut s = c(0.0, 0.0);
                        for i in 0..n {
                            s += d.beta[row][i].conj() * ru[(i, col)];
                        }
                        cap[(row, col)] -= s;
                    }
                }
                let cap_lu = cap.lu();
                let umin = (0..k)
                    .map(|i| cap_lu.u()[(i, i)].norm())
                    .fold(f64::INFINITY, f64::min);
                if umin <= 1e-14 {
                    return Err(SpectralCutError::SingularResolvent { z, distance: umin });
                }
                Ok(ResolventFactor::LowRank {
                    inv_diag,
                    ru,
                    beta: d.beta.clone(),
                    cap_lu,
                })
            }
        }
    }

    /// Solves `(zI − T) y = x`, with a residual guard on dense models.
    pub fn resolvent_apply(&self, z: C64, x: &CVector) -> Result<CVector> {
        if x.len() != self.dim() {
            return Err(SpectralCutError::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let f = self.resolvent_factor(z)?;
        let y = f.solve(x);
        if let OperatorModel::Dense(_) = self {
            let zy = CVector::from_fn(y.len(), |i, _| z * y[i]);
            let res = (&zy - self.apply(&y)? - x).norm();
            let bound = 1e-10 * (z.norm() + self.scale()) * y.norm().max(1e-300);
            if res > bound && res > 1e-12 * x.norm() {
                return Err(SpectralCutError::SingularResolvent {
                    z,
                    distance: res,
                });
            }
        }
        Ok(y)
    }

    /// Eigenvalues with multiplicity. Diagonal models report their entries
    /// verbatim; dense (and densified series) models go through the Schur
    /// form.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let eigenvalues = match self {
            OperatorModel::Diagonal(l) => l.clone(),
            OperatorModel::PointMass { nodes, .. } => nodes.clone(),
            OperatorModel::Dense(m) => linalg::eigenvalues(m)?,
            OperatorModel::DiagonalPlusSeries(d) => linalg::eigenvalues(&d.densify())?,
        };
        Ok(Spectrum { eigenvalues })
    }

    /// Basis of the span of all generalized eigenvectors whose eigenvalues
    /// lie in `region`. Coordinate vectors for diagonal models, reordered
    /// Schur vectors for dense ones.
    pub fn spectral_subspace_oracle(&self, region: &dyn SpectralRegion) -> Result<CMatrix> {
        let scale = self.scale();
        let spec = self.spectrum()?;
        for e in &spec.eigenvalues {
            let bd = region.region_boundary_distance(*e);
            if bd <= 1e-9 * scale {
                return Err(SpectralCutError::BoundaryEigenvalue {
                    eigenvalue: *e,
                    distance: bd,
                });
            }
        }
        match self {
            OperatorModel::Diagonal(l) => Ok(coordinate_basis(l, region)),
            OperatorModel::PointMass { nodes, .. } => Ok(coordinate_basis(nodes, region)),
            OperatorModel::Dense(m) => linalg::invariant_subspace(m, |e| region.region_contains(e)),
            OperatorModel::DiagonalPlusSeries(d) => {
                linalg::invariant_subspace(&d.densify(), |e| region.region_contains(e))
            }
        }
    }

    /// Dense assembly of any model.
    pub fn to_dense(&self) -> CMatrix {
        match self {
            OperatorModel::Dense(m) => m.clone(),
            OperatorModel::Diagonal(l) => {
                let mut m = CMatrix::zeros(l.len(), l.len());
                for i in 0..l.len() {
                    m[(i, i)] = l[i];
                }
                m
            }
            OperatorModel::PointMass { nodes, .. } => {
                let mut m = CMatrix::zeros(nodes.len(), nodes.len());
                for i in 0..nodes.len() {
                    m[(i, i)] = nodes[i];
                }
                m
            }
            OperatorModel::DiagonalPlusSeries(d) => d.densify(),
        }
    }

    /// True when the model acts diagonally, so projections stay diagonal.
    pub fn is_diagonal_model(&self) -> bool {
        matches!(
            self,
            OperatorModel::Diagonal(_) | OperatorModel::PointMass { .. }
        )
    }
}

fn coordinate_basis(entries: &[C64], region: &dyn SpectralRegion) -> CMatrix {
    let idx: Vec<usize> = (0..entries.len())
        .filter(|&i| region.region_contains(entries[i]))
        .collect();
    let mut b = CMatrix::zeros(entries.len(), idx.len());
    for (j, &i) in idx.iter().enumerate() {
        b[(i, j)] = c(1.0, 0.0);
    }
    b
}

// --- JSON wire format ---------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum OperatorWire {
    Dense {
        data: Vec<Vec<[f64; 2]>>,
    },
    Diagonal {
        lambda: Vec<[f64; 2]>,
    },
    DiagPlusSeries {
        lambda: Vec<[f64; 2]>,
        alpha: Vec<Vec<[f64; 2]>>,
        beta: Vec<Vec<[f64; 2]>>,
    },
    PointMass {
        nodes: Vec<[f64; 2]>,
        weights: Vec<f64>,
    },
}

fn pairs_to_vec(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|p| c(p[0], p[1])).collect()
}

fn vec_to_pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl Serialize for OperatorModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = match self {
            OperatorModel::Dense(m) => OperatorWire::Dense {
                data: (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect(),
            },
            OperatorModel::Diagonal(l) => OperatorWire::Diagonal {
                lambda: vec_to_pairs(l),
            },
            OperatorModel::DiagonalPlusSeries(d) => OperatorWire::DiagPlusSeries {
                lambda: vec_to_pairs(&d.lambda),
                alpha: d.alpha.iter().map(|r| vec_to_pairs(r)).collect(),
                beta: d.beta.iter().map(|r| vec_to_pairs(r)).collect(),
            },
            OperatorModel::PointMass { nodes, weights } => OperatorWire::PointMass {
                nodes: vec_to_pairs(nodes),
                weights: weights.clone(),
            },
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let wire = OperatorWire::deserialize(d)?;
        match wire {
            OperatorWire::Dense { data } => {
                let n = data.len();
                if n == 0 || data.iter().any(|row| row.len() != n) {
                    return Err(D::Error::custom("field 'data' must be a non-empty square matrix"));
                }
                let mut m = CMatrix::zeros(n, n);
                for (i, row) in data.iter().enumerate() {
                    for (j, p) in row.iter().enumerate() {
                        m[(i, j)] = c(p[0], p[1]);
                    }
                }
                Ok(OperatorModel::Dense(m))
            }
            OperatorWire::Diagonal { lambda } => {
                if lambda.is_empty() {
                    return Err(D::Error::custom("field 'lambda' must be non-empty"));
                }
                Ok(OperatorModel::Diagonal(pairs_to_vec(&lambda)))
            }
            OperatorWire::DiagPlusSeries { lambda, alpha, beta } => {
                let dps = DiagPlusSeries::new(
                    pairs_to_vec(&lambda),
                    alpha.iter().map(|r| pairs_to_vec(r)).collect(),
                    beta.iter().map(|r| pairs_to_vec(r)).collect(),
                )
                .map_err(|e| D::Error::custom(format!("field 'alpha'/'beta': {e}")))?;
                Ok(OperatorModel::DiagonalPlusSeries(dps))
            }
            OperatorWire::PointMass { nodes, weights } => {
                OperatorModel::point_mass(pairs_to_vec(&nodes), weights)
                    .map_err(|e| D::Error::custom(format!("field 'weights': {e}")))
            }
        }
    }
}

/// Serializable complex number wrapper used in reports.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexPair(#[serde(with = "complex_pair")] pub C64);
