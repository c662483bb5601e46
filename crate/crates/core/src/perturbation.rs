//! Series machinery for diagonal-plus-trace-class models
//! `T = D_Λ + Σ_k u_k ⊗ v_k`: the decomposability score of real
//! coordinates, appropriate grids and curves, the auxiliary factor
//! operators `X(z)`, `Y(z)` and coefficient matrix `a(z) = (I + YX)⁻¹`, and
//! the explicit series formulas for the projection and the calculus along
//! appropriate curves — all cross-validated against the densified model.
//!
//! The index convention tying the factor operators to the kernel functions
//! is `(Y(z)X(z))_{i,j} = f_T^{(j,i)}(z)`; with `a_{i,j}(z)` the plain
//! matrix entries of `(I + YX)⁻¹`, the closure identity
//! `Σ_k (Σ_j x_j a_{k,j})(δ_{k,n} + f^{(k,n)}) = x_n` holds to roundoff and
//! is asserted on every coefficient solve.

use crate::contour::{Curve, Cycle, Rect};
use crate::cuts::{diagnostics_with_cycle, ProjectionMatrix, ProjectionResult};
use crate::error::{Result, SpectralCutError};
use crate::geom::Segment;
use crate::operators::{DiagPlusSeries, OperatorModel};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::calculus::FunctionExpr;
use crate::{linalg, two_pi_i, C64, CMatrix, CVector};
use serde::Serialize;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Summability diagnostics recorded at construction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SummabilityReport {
    /// Σ |α|² log(1 + 1/|α|) + Σ |β|² log(1 + 1/|β|) over nonzero entries.
    pub score: f64,
    /// Σ (|α|² + |β|²).
    pub l2_sum: f64,
    /// Σ |α|² log(1/|α|) + Σ |β|² log(1/|β|) over nonzero entries.
    pub log_sum: f64,
}

/// A diagonal-plus-series model together with its summability metadata.
#[derive(Debug, Clone)]
pub struct PerturbedDiagonal {
    pub ops: DiagPlusSeries,
    pub summability: SummabilityReport,
}

impl PerturbedDiagonal {
    /// Validates the coefficient arrays and the spread of the diagonal (the
    /// decomposability set needs Λ off a single vertical or horizontal
    /// line, within 1e−12).
    pub fn new(lambda: Vec<C64>, alpha: Vec<Vec<C64>>, beta: Vec<Vec<C64>>) -> Result<Self> {
        let ops = DiagPlusSeries::new(lambda, alpha, beta)?;
        let re_span = span(ops.lambda.iter().map(|v| v.re));
        let im_span = span(ops.lambda.iter().map(|v| v.im));
        if re_span <= 1e-12 || im_span <= 1e-12 {
            return Err(SpectralCutError::Other(
                "diagonal lies in a single vertical or horizontal line".into(),
            ));
        }
        let summability = summability_score(&ops);
        Ok(PerturbedDiagonal { ops, summability })
    }

    pub fn from_ops(ops: DiagPlusSeries) -> Result<Self> {
        PerturbedDiagonal::new(ops.lambda, ops.alpha, ops.beta)
    }

    pub fn dim(&self) -> usize {
        self.ops.dim()
    }

    pub fn rank_terms(&self) -> usize {
        self.ops.rank_terms()
    }

    pub fn model(&self) -> OperatorModel {
        OperatorModel::DiagonalPlusSeries(self.ops.clone())
    }

    /// Default membership cap: 10³ × summability score + 10³.
    pub fn default_cap(&self) -> f64 {
        1e3 * self.summability.score + 1e3
    }
}

fn span(vals: impl Iterator<Item = f64>) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

/// The summability functional of the coefficient arrays.
pub fn summability_score(ops: &DiagPlusSeries) -> SummabilityReport {
    let mut score = 0.0;
    let mut l2_sum = 0.0;
    let mut log_sum = 0.0;
    for row in ops.alpha.iter().chain(ops.beta.iter()) {
        for v in row {
            let a = v.norm();
            l2_sum += a * a;
            if a > 0.0 {
                score += a * a * (1.0 + 1.0 / a).ln();
                log_sum += a * a * (1.0 / a).ln();
            }
        }
    }
    SummabilityReport {
        score,
        l2_sum,
        log_sum,
    }
}

/// Membership decision for a real coordinate in the decomposability set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaMembership {
    pub member: bool,
    pub score: f64,
}

/// Weighted inverse-distance score of `x` against the diagonal's real and
/// imaginary parts; `member` when the score stays below `cap`. Errors when
/// `x` sits on one of the eigenvalue lines (distance ≤ 1e−12).
pub fn delta_membership(pd: &PerturbedDiagonal, x: f64, cap: f64) -> Result<DeltaMembership> {
    let ops = &pd.ops;
    let mut min_dist = f64::INFINITY;
    for lam in &ops.lambda {
        min_dist = min_dist.min((lam.re - x).abs()).min((lam.im - x).abs());
    }
    if min_dist <= 1e-12 {
        return Err(SpectralCutError::OnEigenvalueLine { x, distance: min_dist });
    }
    let mut score = 0.0;
    for k in 0..ops.rank_terms() {
        for n in 0..ops.dim() {
            let a2 = ops.alpha[k][n].norm_sqr();
            let b2 = ops.beta[k][n].norm_sqr();
            let dre = (ops.lambda[n].re - x).abs();
            let dim_ = (ops.lambda[n].im - x).abs();
            score += (a2 + b2) / dre + (a2 + b2) / dim_;
        }
    }
    Ok(DeltaMembership {
        member: score <= cap,
        score,
    })
}

/// Grid of decomposability-set coordinates covering the spectrum box.
#[derive(Debug, Clone, Serialize)]
pub struct AppropriateGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    #[serde(rename = "box")]
    pub bounds: [f64; 4],
    pub x_scores: Vec<f64>,
    pub y_scores: Vec<f64>,
}

impl AppropriateGrid {
    pub fn rect(&self) -> Rect {
        Rect::new(self.bounds[0], self.bounds[1], self.bounds[2], self.bounds[3])
    }
}

/// Spectrum box `[a,b]×[c,d]` of the densified model, one unit beyond the
/// extreme real and imaginary parts.
pub fn spectrum_box(pd: &PerturbedDiagonal) -> Result<Rect> {
    let spec = pd.model().spectrum()?;
    let (re_lo, re_hi, im_lo, im_hi) = spec.bounding_values();
    Ok(Rect::new(re_lo - 1.0, re_hi + 1.0, im_lo - 1.0, im_hi + 1.0))
}

/// Selects `nx` x-coordinates and `ny` y-coordinates with the smallest
/// membership scores under `cap`, always keeping the box endpoints.
/// Candidates are the midpoints between consecutive eigenvalue lines plus a
/// uniform fill.
pub fn build_appropriate_grid(
    pd: &PerturbedDiagonal,
    nx: usize,
    ny: usize,
    cap: f64,
) -> Result<AppropriateGrid> {
    if nx < 2 || ny < 2 {
        return Err(SpectralCutError::Other("grid needs nx, ny ≥ 2".into()));
    }
    let bounds = spectrum_box(pd)?;
    let pick = |lo: f64, hi: f64, n_pick: usize, lines: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut candidates: Vec<f64> = Vec::new();
        let mut sorted = lines.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        for w in sorted.windows(2) {
            let mid = (w[0] + w[1]) / 2.0;
            if mid > lo && mid < hi {
                candidates.push(mid);
            }
        }
        let fill = 8 * n_pick;
        for i in 1..fill {
            candidates.push(lo + (hi - lo) * i as f64 / fill as f64);
        }
        let mut scored: Vec<(f64, f64)> = Vec::new();
        for x in candidates {
            if let Ok(m) = delta_membership(pd, x, cap) {
                if m.member {
                    scored.push((x, m.score));
                }
            }
        }
        scored.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        scored.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14);
        if scored.len() + 2 < n_pick {
            return Err(SpectralCutError::InsufficientCandidates {
                found: scored.len() + 2,
                needed: n_pick,
            });
        }
        // endpoints always belong (they sit one unit away from the
        // spectrum); nudge outward in the rare case a diagonal entry
        // protrudes past the spectrum box
        let mut lo_ok = lo;
        while delta_membership(pd, lo_ok, cap).map(|m| !m.member).unwrap_or(true) {
            lo_ok -= 0.01 * (hi - lo);
        }
        let mut hi_ok = hi;
        while delta_membership(pd, hi_ok, cap).map(|m| !m.member).unwrap_or(true) {
            hi_ok += 0.01 * (hi - lo);
        }
        let mut chosen: Vec<f64> = scored.iter().take(n_pick - 2).map(|s| s.0).collect();
        chosen.push(lo_ok);
        chosen.push(hi_ok);
        chosen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scores: Vec<f64> = chosen
            .iter()
            .map(|&x| delta_membership(pd, x, cap).map(|m| m.score).unwrap_or(f64::INFINITY))
            .collect();
        Ok((chosen, scores))
    };
    let re_lines: Vec<f64> = pd.ops.lambda.iter().map(|v| v.re).collect();
    let im_lines: Vec<f64> = pd.ops.lambda.iter().map(|v| v.im).collect();
    // both axes score against both line families (the membership sum mixes
    // real and imaginary distances), so candidate seeds come from both
    let mut all_lines = re_lines;
    all_lines.extend(im_lines);
    let (xs, x_scores) = pick(bounds.x0, bounds.x1, nx, &all_lines)?;
    let (ys, y_scores) = pick(bounds.y0, bounds.y1, ny, &all_lines)?;
    Ok(AppropriateGrid {
        xs,
        ys,
        bounds: [bounds.x0, bounds.x1, bounds.y0, bounds.y1],
        x_scores,
        y_scores,
    })
}

/// Truncated kernel function `f_T^{(i,j)}(z) = Σ_n α_n^{(i)} β̄_n^{(j)} /
/// (λ_n − z)`.
pub fn f_kernel(pd: &PerturbedDiagonal, i: usize, j: usize, z: C64) -> Result<C64> {
    let ops = &pd.ops;
    let dist = ops
        .lambda
        .iter()
        .map(|l| (l - z).norm())
        .fold(f64::INFINITY, f64::min);
    if dist <= 1e-14 * (1.0 + z.norm()) {
        return Err(SpectralCutError::PoleHit { z, distance: dist });
    }
    let mut s = c(0.0, 0.0);
    for n in 0..ops.dim() {
        s += ops.alpha[i][n] * ops.beta[j][n].conj() / (ops.lambda[n] - z);
    }
    Ok(s)
}

/// The factor operators at `z` and their product `M(z) = I + Y X`.
#[derive(Debug, Clone)]
pub struct XyOperators {
    /// N×K, column k holds `(D_Λ − zI)^{−1/2} u_k`.
    pub x_mat: CMatrix,
    /// K×N, row k holds the adjoint pairing with `(D_Λ* − z̄I)^{−1/2} v_k`.
    pub y_mat: CMatrix,
    /// K×K, `I + Y X`.
    pub m_mat: CMatrix,
    /// max entrywise defect of `(YX)_{i,j} = f^{(j,i)}(z)`.
    pub kernel_defect: f64,
}

/// Builds `X(z)`, `Y(z)` with the principal square-root branch and checks
/// the kernel identity (the branch factors cancel in the product).
pub fn xy_operators(pd: &PerturbedDiagonal, z: C64) -> Result<XyOperators> {
    let ops = &pd.ops;
    let n = ops.dim();
    let k = ops.rank_terms();
    let dist = ops
        .lambda
        .iter()
        .map(|l| (l - z).norm())
        .fold(f64::INFINITY, f64::min);
    if dist <= 1e-14 * (1.0 + z.norm()) {
        return Err(SpectralCutError::PoleHit { z, distance: dist });
    }
    let mut x_mat = CMatrix::zeros(n, k);
    let mut y_mat = CMatrix::zeros(k, n);
    for kk in 0..k {
        for i in 0..n {
            let w = ops.lambda[i] - z;
            let inv_sqrt = c(1.0, 0.0) / w.sqrt();
            x_mat[(i, kk)] = inv_sqrt * ops.alpha[kk][i];
            // pairing against (D* − z̄)^{−1/2} v_k conjugates the weight
            let wbar = ops.lambda[i].conj() - z.conj();
            let inv_sqrt_bar = c(1.0, 0.0) / wbar.sqrt();
            y_mat[(kk, i)] = inv_sqrt_bar.conj() * ops.beta[kk][i].conj();
        }
    }
    let mut m_mat = &y_mat * &x_mat;
    for i in 0..k {
        m_mat[(i, i)] += c(1.0, 0.0);
    }
    let mut kernel_defect = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let expect = f_kernel(pd, j, i, z)?;
            let got = m_mat[(i, j)] - if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
            kernel_defect = kernel_defect.max((got - expect).norm());
        }
    }
    Ok(XyOperators {
        x_mat,
        y_mat,
        m_mat,
        kernel_defect,
    })
}

/// Coefficient matrix `a(z) = (I + YX)⁻¹` with its closure diagnostics.
#[derive(Debug, Clone)]
pub struct ACoefficients {
    pub a: CMatrix,
    pub condition: f64,
    /// Operator norm of `a(z)`, the empirical stand-in for the boundedness
    /// constant along the curve.
    pub norm: f64,
    /// Worst residual of the closure identity over the test vectors.
    pub master_residual: f64,
}

/// Solves `M(z) A = I` and asserts the closure identity on five
/// deterministic pseudo-random vectors.
pub fn a_coefficients(pd: &PerturbedDiagonal, z: C64) -> Result<ACoefficients> {
    let xy = xy_operators(pd, z)?;
    let k = xy.m_mat.nrows();
    let cond = linalg::cond_2(&xy.m_mat);
    if !cond.is_finite() || cond > 1e14 {
        return Err(SpectralCutError::SingularM { z, cond });
    }
    let a = linalg::lu_solve_matrix(&xy.m_mat, &linalg::identity(k))
        .map_err(|_| SpectralCutError::SingularM { z, cond })?;
    // closure identity: (s + Fᵀ s) = x with s = A x and F_{k,n} = f^{(k,n)}
    let mut f_t = CMatrix::zeros(k, k);
    for kk in 0..k {
        for nn in 0..k {
            f_t[(nn, kk)] = f_kernel(pd, kk, nn, z)?; // transpose placement
        }
    }
    let mut state = 0x9E3779B97F4A7C15u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) as f64) / (u32::MAX as f64) - 0.5
    };
    let mut master_residual = 0.0f64;
    for _ in 0..5 {
        let x = CVector::from_fn(k, |_, _| c(next(), next()));
        let s = &a * &x;
        let lhs = &s + &f_t * &s;
        master_residual = master_residual.max((lhs - &x).norm() / x.norm().max(1e-300));
    }
    Ok(ACoefficients {
        a,
        condition: cond,
        norm: linalg::operator_norm(&xy.m_mat.clone().lu().try_inverse().unwrap_or_else(|| linalg::identity(k))),
        master_residual,
    })
}

/// Checks that a curve is appropriate for the model: an axis-parallel
/// polyline whose corner coordinates pass the membership cap, with both
/// sides of the curve meeting the densified spectrum.
pub fn check_appropriate_curve(
    pd: &PerturbedDiagonal,
    curve: &Curve,
    cap: f64,
) -> Result<()> {
    for (i, seg) in curve.segments.iter().enumerate() {
        match seg {
            Segment::Line { start, end } => {
                let horizontal = start.im == end.im;
                let vertical = start.re == end.re;
                if !(horizontal ^ vertical) {
                    return Err(SpectralCutError::NotAppropriateCurve {
                        detail: format!("segment {i} is not axis-parallel"),
                    });
                }
            }
            Segment::Arc { .. } => {
                return Err(SpectralCutError::NotAppropriateCurve {
                    detail: format!("segment {i} is an arc; appropriate curves are polygonal"),
                });
            }
        }
    }
    let mut coords: Vec<f64> = Vec::new();
    for seg in &curve.segments {
        coords.push(seg.start().re);
        coords.push(seg.start().im);
    }
    coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
    coords.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    for x in coords {
        let m = delta_membership(pd, x, cap).map_err(|e| match e {
            SpectralCutError::OnEigenvalueLine { x, distance } => {
                SpectralCutError::NotAppropriateCurve {
                    detail: format!("coordinate {x} lies on an eigenvalue line (distance {distance:.3e})"),
                }
            }
            other => other,
        })?;
        if !m.member {
            return Err(SpectralCutError::NotAppropriateCurve {
                detail: format!("coordinate {x} has membership score {:.3e} above cap {cap:.3e}", m.score),
            });
        }
    }
    let spec = pd.model().spectrum()?;
    let cycle = Cycle::single(curve.clone());
    let inside = spec
        .eigenvalues
        .iter()
        .filter(|e| cycle.winding_unchecked(**e) != 0)
        .count();
    if inside == 0 {
        return Err(SpectralCutError::NotAppropriateCurve {
            detail: "interior misses the spectrum".into(),
        });
    }
    if inside == spec.eigenvalues.len() {
        return Err(SpectralCutError::NotAppropriateCurve {
            detail: "exterior misses the spectrum".into(),
        });
    }
    Ok(())
}

/// Rank-K resolvent correction at `ξ`: the matrix
/// `V(ξ) = D_ξ (A_mat a(ξ)) (B* D_ξ)` with `D_ξ = diag(1/(λ_n − ξ))`, so
/// that `(ξI − T)⁻¹ = D_ξ + V(ξ)`. Organized as two rank-K products per
/// node instead of the literal triple sum.
fn series_node_matrix(
    pd: &PerturbedDiagonal,
    a_mat: &CMatrix,
    b_mat: &CMatrix,
    xi: C64,
    weight: C64,
) -> Result<CMatrix> {
    let acoef = a_coefficients(pd, xi)?;
    let n = pd.dim();
    let dinv: Vec<C64> = pd.ops.lambda.iter().map(|l| c(1.0, 0.0) / (l - xi)).collect();
    let ga = a_mat * &acoef.a; // N×K
    let mut left = CMatrix::zeros(n, pd.rank_terms());
    for i in 0..n {
        for kk in 0..pd.rank_terms() {
            left[(i, kk)] = dinv[i] * ga[(i, kk)] * weight;
        }
    }
    let mut right = CMatrix::zeros(pd.rank_terms(), n);
    for kk in 0..pd.rank_terms() {
        for j in 0..n {
            right[(kk, j)] = b_mat[(j, kk)].conj() * dinv[j];
        }
    }
    Ok(left * right)
}

fn coefficient_matrices(pd: &PerturbedDiagonal) -> (CMatrix, CMatrix) {
    let n = pd.dim();
    let k = pd.rank_terms();
    let mut a_mat = CMatrix::zeros(n, k);
    let mut b_mat = CMatrix::zeros(n, k);
    for kk in 0..k {
        for i in 0..n {
            a_mat[(i, kk)] = pd.ops.alpha[kk][i];
            b_mat[(i, kk)] = pd.ops.beta[kk][i];
        }
    }
    (a_mat, b_mat)
}

/// Series projection over an arbitrary admissible cycle of appropriate
/// curves: `P x = Σ_{n: ind=1} x_n e_n + (1/2πi) ∮ V(ξ) x dξ`, optionally
/// with an `f(ξ)` weight and `f(λ_n)` on the diagonal part.
fn series_operator_over_cycle(
    pd: &PerturbedDiagonal,
    cycle: &Cycle,
    f: Option<&FunctionExpr>,
    cfg: &QuadratureConfig,
) -> Result<(CMatrix, f64, usize)> {
    let n = pd.dim();
    let (a_mat, b_mat) = coefficient_matrices(pd);
    let r = integrate(
        |xi| {
            let weight = match f {
                Some(fx) => fx.eval(xi)?,
                None => c(1.0, 0.0),
            };
            series_node_matrix(pd, &a_mat, &b_mat, xi, weight)
        },
        cycle,
        cfg,
    )?;
    let tpi = two_pi_i();
    let mut m = r.value;
    m.iter_mut().for_each(|v| *v /= tpi);
    for (idx, lam) in pd.ops.lambda.iter().enumerate() {
        if cycle.winding_unchecked(*lam) == 1 {
            let diag_val = match f {
                Some(fx) => {
                    if !fx.domain.contains(*lam, 1e-9) {
                        return Err(SpectralCutError::DomainViolation { z: *lam });
                    }
                    fx.eval_unchecked(*lam)?
                }
                None => c(1.0, 0.0),
            };
            m[(idx, idx)] += diag_val;
        }
    }
    let _ = n;
    Ok((m, r.error_estimate / tpi.norm(), r.panels_used))
}

/// Series projection along an appropriate curve, with the complement
/// projection over `∂box ∪ (−γ)` and the sum-to-identity defect recorded.
pub fn series_projection(
    pd: &PerturbedDiagonal,
    curve: &Curve,
    cfg: &QuadratureConfig,
) -> Result<ProjectionResult> {
    check_appropriate_curve(pd, curve, pd.default_cap())?;
    let cycle = Cycle::single(curve.clone());
    let (p, qerr, panels) = series_operator_over_cycle(pd, &cycle, None, cfg)?;

    // complement per the box-minus-curve cycle
    let bounds = spectrum_box(pd)?;
    let tau = bounds.boundary_curve();
    let comp_cycle = Cycle::new_unchecked(vec![tau, curve.reversed()]);
    let (q, _, _) = series_operator_over_cycle(pd, &comp_cycle, None, cfg)?;
    let ident = linalg::identity(pd.dim());
    let complement_defect = linalg::operator_norm(&(&p + &q - &ident));

    let model = pd.model();
    let matrix = ProjectionMatrix::Dense(p);
    let mut diagnostics = diagnostics_with_cycle(&model, &matrix, &cycle, qerr, panels)?;
    diagnostics.complement_defect = Some(complement_defect);
    Ok(ProjectionResult { matrix, diagnostics })
}

/// Series projection along a whole cycle of appropriate curves (used when a
/// cover split produces several boundary curves).
pub fn series_projection_cycle(
    pd: &PerturbedDiagonal,
    cycle: &Cycle,
    cfg: &QuadratureConfig,
) -> Result<ProjectionResult> {
    let (p, qerr, panels) = series_operator_over_cycle(pd, cycle, None, cfg)?;
    let model = pd.model();
    let matrix = ProjectionMatrix::Dense(p);
    let diagnostics = diagnostics_with_cycle(&model, &matrix, cycle, qerr, panels)?;
    Ok(ProjectionResult { matrix, diagnostics })
}

/// Series functional calculus along an appropriate curve, with the
/// densified two-route oracle agreement recorded.
#[derive(Debug, Clone)]
pub struct SeriesCalculus {
    pub matrix: CMatrix,
    /// ‖F_series − F_restrict(densified)‖.
    pub dense_agreement: f64,
    pub quadrature_error: f64,
}

pub fn series_calculus(
    pd: &PerturbedDiagonal,
    curve: &Curve,
    f: &FunctionExpr,
    cfg: &QuadratureConfig,
) -> Result<SeriesCalculus> {
    check_appropriate_curve(pd, curve, pd.default_cap())?;
    let cycle = Cycle::single(curve.clone());
    let (m, qerr, _) = series_operator_over_cycle(pd, &cycle, Some(f), cfg)?;

    // densified oracle through the restricted-calculus route
    let dense_model = OperatorModel::Dense(pd.ops.densify());
    let p = crate::cuts::riesz_projection(&dense_model, &cycle, cfg)?;
    let oracle = crate::calculus::calculus_restrict(&dense_model, &p, f, cfg)?;
    let dense_agreement = linalg::operator_norm(&(&m - oracle.matrix.to_dense()));

    Ok(SeriesCalculus {
        matrix: m,
        dense_agreement,
        quadrature_error: qerr,
    })
}

/// Densified model (oracle bridge).
pub fn densify(pd: &PerturbedDiagonal) -> OperatorModel {
    OperatorModel::Dense(pd.ops.densify())
}

/// Searches for an appropriate rectangle splitting the spectrum: corners on
/// the spectrum box and on membership-passing midpoints between eigenvalue
/// lines. Returns `None` when no candidate pair separates the eigenvalues.
pub fn splitting_rectangle(pd: &PerturbedDiagonal) -> Option<Curve> {
    let bounds = spectrum_box(pd).ok()?;
    let spec = pd.model().spectrum().ok()?;
    let cap = pd.default_cap();
    let midpoints = |vals: &mut Vec<f64>| -> Vec<f64> {
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        vals.windows(2)
            .map(|w| (w[0] + w[1]) / 2.0)
            .filter(|&m| {
                delta_membership(pd, m, cap)
                    .map(|r| r.member)
                    .unwrap_or(false)
            })
            .collect()
    };
    let mut re_lines: Vec<f64> = pd.ops.lambda.iter().map(|v| v.re).collect();
    let mut im_lines: Vec<f64> = pd.ops.lambda.iter().map(|v| v.im).collect();
    let x_mids = midpoints(&mut re_lines);
    let y_mids = midpoints(&mut im_lines);
    for &x in &x_mids {
        for &y in &y_mids {
            let rect = Curve::polygon(&[
                c(bounds.x0, bounds.y0),
                c(x, bounds.y0),
                c(x, y),
                c(bounds.x0, y),
            ])
            .ok()?;
            if check_appropriate_curve(pd, &rect, cap).is_ok() {
                let cyc = Cycle::single(rect.clone());
                let inside = spec
                    .eigenvalues
                    .iter()
                    .filter(|e| cyc.winding_unchecked(**e) == 1)
                    .count();
                if inside > 0 && inside < spec.eigenvalues.len() {
                    return Some(rect);
                }
            }
        }
    }
    None
}
