//! Cover splitting, super-decomposability witnesses, line-family
//! decompositions and hyperinvariant-subspace witnesses.
//!
//! `cover_split` turns an open cover {U, V} of the spectrum into a
//! grid-aligned admissible cycle whose closed interior captures the
//! U-side eigenvalues; `super_decompose` computes the witness projection R
//! for it. `line_family_decompose` builds cell projections from cuts along
//! vertical and horizontal lines closed through the outer circle, and
//! checks the partition of identity. `hyperinvariant_witness` evaluates the
//! two contour vectors of the hyperinvariant-subspace criterion and their
//! pairing defect.

use crate::contour::{grid_cover_cycle, Curve, Cycle, Rect, Region};
use crate::cuts::{riesz_projection, ProjectionMatrix, ProjectionResult};
use crate::error::{Result, SpectralCutError};
use crate::geom::Segment;
use crate::operators::OperatorModel;
use crate::perturbation::{delta_membership, PerturbedDiagonal};
use crate::quadrature::{integrability_probe, integrate, QuadratureConfig};
use crate::{linalg, two_pi_i, C64, CMatrix, CVector};
use serde::{Deserialize, Serialize};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// An open cover {U, V} of the spectrum, as finite unions of rectangles and
/// discs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverPair {
    #[serde(rename = "U")]
    pub u: Region,
    #[serde(rename = "V")]
    pub v: Region,
}

impl CoverPair {
    pub fn new(u: Region, v: Region) -> CoverPair {
        CoverPair { u, v }
    }

    /// Every eigenvalue must lie in at least one region.
    pub fn validate(&self, op: &OperatorModel) -> Result<()> {
        let spec = op.spectrum()?;
        for e in &spec.eigenvalues {
            if !self.u.contains(*e, 1e-12) && !self.v.contains(*e, 1e-12) {
                return Err(SpectralCutError::CoverInvalid {
                    detail: format!("eigenvalue {e} is covered by neither region"),
                });
            }
        }
        Ok(())
    }
}

/// Result of splitting a cover along a grid cycle.
#[derive(Debug, Clone)]
pub struct CoverSplit {
    pub cycle: Cycle,
    /// Separation margin min(dist(Ḡ₁, ℂ∖U), dist(Ḡ₂, ℂ∖V)).
    pub delta: f64,
    /// Grid mesh actually used (< δ/4).
    pub mesh: f64,
    /// The whole box is enclosed; the exterior condition is vacuous.
    pub exterior_vacuous: bool,
    /// No cell met the U-side; the interior is (spectrally) empty.
    pub interior_vacuous: bool,
}

fn erode_cover(cover: &CoverPair, op: &OperatorModel) -> Result<(Region, Region)> {
    let g1 = cover.u.eroded_fraction(0.1);
    let g2 = cover.v.eroded_fraction(0.1);
    let spec = op.spectrum()?;
    for e in &spec.eigenvalues {
        if !g1.contains(*e, 0.0) && !g2.contains(*e, 0.0) {
            return Err(SpectralCutError::CoverTooTight {
                detail: format!("eigenvalue {e} escapes both shrunk regions"),
            });
        }
    }
    Ok((g1, g2))
}

fn separation_delta(cover: &CoverPair, g1: &Region, g2: &Region) -> f64 {
    let sample_min = |shrunk: &Region, parent: &Region| -> f64 {
        let mut best = f64::INFINITY;
        for shape in &shrunk.shapes {
            for p in shape.boundary_samples(512) {
                best = best.min(parent.distance_to_complement(p));
            }
        }
        best
    };
    let d1 = if g1.is_empty() {
        f64::INFINITY
    } else {
        sample_min(g1, &cover.u)
    };
    let d2 = if g2.is_empty() {
        f64::INFINITY
    } else {
        sample_min(g2, &cover.v)
    };
    d1.min(d2)
}

/// Dyadic grid coordinates of mesh `h = 2^{−k}` covering `[lo, hi]`, with an
/// optional dyadic shift to keep eigenvalue lines clear of the grid.
fn dyadic_coords(lo: f64, hi: f64, h: f64, shift: f64) -> Vec<f64> {
    let start = ((lo - shift) / h).floor() * h + shift;
    let mut xs = Vec::new();
    let mut x = start;
    while x < hi + h * 0.5 {
        xs.push(x);
        x += h;
    }
    if xs.len() < 2 {
        xs.push(start + h);
    }
    xs
}

fn min_line_distance(values: &[f64], lines: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for v in values {
        for l in lines {
            best = best.min((v - l).abs());
        }
    }
    best
}

/// Splits an open cover of the spectrum along a grid cycle: the returned
/// admissible cycle has every interior eigenvalue in Ū and every exterior
/// eigenvalue in V̄. Dyadic grid coordinates for matrix models; coordinates
/// from the decomposability set for diagonal-plus-series models.
pub fn cover_split(
    op: &OperatorModel,
    cover: &CoverPair,
    delta_override: Option<f64>,
) -> Result<CoverSplit> {
    cover.validate(op)?;
    let (g1, g2) = erode_cover(cover, op)?;
    let delta = match delta_override {
        Some(d) if d > 0.0 => d,
        _ => separation_delta(cover, &g1, &g2),
    };
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(SpectralCutError::CoverTooTight {
            detail: format!("no positive separation margin (δ = {delta:.3e})"),
        });
    }
    let spec = op.spectrum()?;
    let (re_lo, re_hi, im_lo, im_hi) = spec.bounding_values();
    let bounds = Rect::new(re_lo - 1.0, re_hi + 1.0, im_lo - 1.0, im_hi + 1.0);

    let target_mesh = (delta / 4.0).min(0.5);
    let (xs, ys, mesh) = match op {
        OperatorModel::DiagonalPlusSeries(d) => {
            let pd = PerturbedDiagonal::from_ops(d.clone())?;
            let xs = delta_set_coords(&pd, bounds.x0, bounds.x1, target_mesh)?;
            let ys = delta_set_coords(&pd, bounds.y0, bounds.y1, target_mesh)?;
            let mesh = xs
                .windows(2)
                .chain(ys.windows(2))
                .map(|w| w[1] - w[0])
                .fold(0.0f64, f64::max);
            (xs, ys, mesh)
        }
        _ => {
            // dyadic mesh at most δ/4, shifted if an eigenvalue line sits on
            // the grid
            let k = (4.0f64 / delta).log2().ceil().max(1.0) as i32;
            let h = 0.5f64.powi(k).min(0.5);
            let cells_estimate = ((bounds.width() / h) + 2.0) * ((bounds.height() / h) + 2.0);
            if cells_estimate > 4_000_000.0 {
                return Err(SpectralCutError::CoverTooTight {
                    detail: format!(
                        "separation δ = {delta:.3e} needs {cells_estimate:.0} grid cells"
                    ),
                });
            }
            let re_lines: Vec<f64> = spec.eigenvalues.iter().map(|e| e.re).collect();
            let im_lines: Vec<f64> = spec.eigenvalues.iter().map(|e| e.im).collect();
            let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
            for shift_idx in 0..8 {
                let shift = h * shift_idx as f64 / 8.0;
                let xs = dyadic_coords(bounds.x0, bounds.x1, h, shift);
                let ys = dyadic_coords(bounds.y0, bounds.y1, h, shift);
                let d = min_line_distance(&xs, &re_lines).min(min_line_distance(&ys, &im_lines));
                if best.as_ref().map(|b| b.2).unwrap_or(-1.0) < d {
                    best = Some((xs, ys, d));
                }
            }
            let (xs, ys, line_gap) = best.unwrap();
            if line_gap <= 1e-7 * op.scale() {
                return Err(SpectralCutError::CoverTooTight {
                    detail: format!("eigenvalue sits on every shifted grid (gap {line_gap:.3e})"),
                });
            }
            (xs, ys, h)
        }
    };

    let grid_box = Rect::new(xs[0], xs[xs.len() - 1], ys[0], ys[ys.len() - 1]);
    let mark = |k: usize, l: usize| -> bool {
        let cell = Rect::new(xs[k], xs[k + 1], ys[l], ys[l + 1]);
        g1.shapes.iter().any(|s| s.intersects_rect(&cell))
    };
    let (cycle, exterior_vacuous, interior_vacuous) =
        match grid_cover_cycle(grid_box, &xs, &ys, mark) {
            Ok(cyc) => (cyc, false, false),
            Err(SpectralCutError::AllMarked) => {
                // one region alone swallows the spectrum box: full-box cycle,
                // the exterior condition is vacuous
                (Cycle::single(grid_box.boundary_curve()), true, false)
            }
            Err(SpectralCutError::NoneMarked) => {
                // the U-side misses the spectrum: an eigenvalue-free corner
                // cell gives the zero projection
                let cell = Rect::new(xs[0], xs[1], ys[0], ys[1]);
                (Cycle::single(cell.boundary_curve()), false, true)
            }
            Err(e) => return Err(e),
        };

    // concrete postconditions on the eigenvalue sets
    for e in &spec.eigenvalues {
        let w = cycle.winding_unchecked(*e);
        if w == 1 && !cover.u.contains(*e, 1e-9) {
            return Err(SpectralCutError::SplitPostconditionFailed {
                detail: format!("interior eigenvalue {e} is not in the closed U side"),
            });
        }
        if w == 0 && !exterior_vacuous && !cover.v.contains(*e, 1e-9) {
            return Err(SpectralCutError::SplitPostconditionFailed {
                detail: format!("exterior eigenvalue {e} is not in the closed V side"),
            });
        }
    }

    Ok(CoverSplit {
        cycle,
        delta,
        mesh,
        exterior_vacuous,
        interior_vacuous,
    })
}

/// Decomposability-set coordinates covering `[lo, hi]` with gaps ≤ `mesh`.
fn delta_set_coords(pd: &PerturbedDiagonal, lo: f64, hi: f64, mesh: f64) -> Result<Vec<f64>> {
    let cap = pd.default_cap();
    let fill = (((hi - lo) / mesh).ceil() as usize * 4).max(8);
    let mut candidates: Vec<f64> = Vec::with_capacity(fill + 2);
    for i in 0..=fill {
        let x = lo + (hi - lo) * i as f64 / fill as f64;
        if let Ok(m) = delta_membership(pd, x, cap) {
            if m.member {
                candidates.push(x);
            }
        }
    }
    if candidates.len() < 2 {
        return Err(SpectralCutError::GridUnavailable {
            required_mesh: mesh,
            achievable_mesh: f64::INFINITY,
        });
    }
    let achievable = candidates
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    if achievable > mesh {
        return Err(SpectralCutError::GridUnavailable {
            required_mesh: mesh,
            achievable_mesh: achievable,
        });
    }
    // greedy sweep: keep gaps ≤ mesh with as few coordinates as possible
    let mut coords = vec![candidates[0]];
    let mut i = 0;
    while *coords.last().unwrap() < hi - 1e-12 {
        let current = *coords.last().unwrap();
        let mut next = None;
        for (j, &x) in candidates.iter().enumerate().skip(i + 1) {
            if x - current <= mesh {
                next = Some(j);
            } else {
                break;
            }
        }
        match next {
            Some(j) => {
                coords.push(candidates[j]);
                i = j;
            }
            None => {
                return Err(SpectralCutError::GridUnavailable {
                    required_mesh: mesh,
                    achievable_mesh: achievable,
                })
            }
        }
    }
    Ok(coords)
}

/// Super-decomposability witness: the split cycle, the projection R along
/// it, and the two spectral inclusions.
#[derive(Debug, Clone)]
pub struct DecompositionWitness {
    pub cycle: Cycle,
    pub result: ProjectionResult,
    pub interior_spec_in_u: bool,
    pub exterior_spec_in_v: bool,
    pub exterior_vacuous: bool,
}

/// Splits the cover and computes the witness projection (series route for
/// diagonal-plus-series models, contour route otherwise), checking the
/// commutation and inclusion requirements.
pub fn super_decompose(
    op: &OperatorModel,
    cover: &CoverPair,
    cfg: &QuadratureConfig,
) -> Result<DecompositionWitness> {
    let split = cover_split(op, cover, None)?;
    let result = match op {
        OperatorModel::DiagonalPlusSeries(d) => {
            let pd = PerturbedDiagonal::from_ops(d.clone())?;
            crate::perturbation::series_projection_cycle(&pd, &split.cycle, cfg)?
        }
        _ => riesz_projection(op, &split.cycle, cfg)?,
    };
    let tol = 1e-7 * op.scale();
    let interior_spec_in_u = result
        .diagnostics
        .interior_spectrum
        .iter()
        .all(|e| cover.u.boundary_distance(*e) <= tol || cover.u.contains(*e, tol));
    let exterior_spec_in_v = split.exterior_vacuous
        || result
            .diagnostics
            .exterior_spectrum
            .iter()
            .all(|e| cover.v.boundary_distance(*e) <= tol || cover.v.contains(*e, tol));
    Ok(DecompositionWitness {
        cycle: split.cycle,
        result,
        interior_spec_in_u,
        exterior_spec_in_v,
        exterior_vacuous: split.exterior_vacuous,
    })
}

/// A vertical line `Re = x` inside the disc of radius ρ, closed through the
/// right arc of the circle: the boundary of `{Re > x} ∩ D(0, ρ)`.
pub fn half_plane_right_curve(x: f64, rho: f64) -> Result<Curve> {
    if x.abs() >= rho {
        return Err(SpectralCutError::InvalidGeometry(format!(
            "line Re = {x} misses the disc of radius {rho}"
        )));
    }
    let h = (rho * rho - x * x).sqrt();
    let theta = h.atan2(x);
    Curve::new(vec![
        Segment::line(c(x, h), c(x, -h)),
        Segment::arc(c(0.0, 0.0), rho, -theta, theta),
    ])
}

/// The boundary of `{Im > y} ∩ D(0, ρ)`.
pub fn half_plane_upper_curve(y: f64, rho: f64) -> Result<Curve> {
    if y.abs() >= rho {
        return Err(SpectralCutError::InvalidGeometry(format!(
            "line Im = {y} misses the disc of radius {rho}"
        )));
    }
    let w = (rho * rho - y * y).sqrt();
    let phi = y.atan2(w);
    Curve::new(vec![
        Segment::line(c(-w, y), c(w, y)),
        Segment::arc(c(0.0, 0.0), rho, phi, std::f64::consts::PI - phi),
    ])
}

/// One grid cell of the line family with its projection.
#[derive(Debug, Clone)]
pub struct CellProjection {
    pub rect: Rect,
    pub matrix: ProjectionMatrix,
    pub rank: usize,
    pub occupied: bool,
}

/// Outcome of the line-family decomposition.
#[derive(Debug, Clone)]
pub struct LineFamilyReport {
    pub cells: Vec<CellProjection>,
    pub p1: ProjectionMatrix,
    pub p2: ProjectionMatrix,
    /// ‖Σ_{occupied cells} P_R − I‖.
    pub partition_defect: f64,
    /// Rank of the concatenated range bases of P₁ and P₂.
    pub span_rank: usize,
    /// Worst ‖[P_v, P_h]‖ over the strip pairs.
    pub max_cell_commutator: f64,
}

/// Builds rectangle projections from cuts along the given vertical and
/// horizontal lines (each closed through the arc of the circle of radius
/// ‖T‖+1), assembles the cover sums P₁, P₂, and checks the partition of
/// identity over the occupied cells.
pub fn line_family_decompose(
    op: &OperatorModel,
    vertical_lines: &[f64],
    horizontal_lines: &[f64],
    cover: &CoverPair,
    cfg: &QuadratureConfig,
) -> Result<LineFamilyReport> {
    cover.validate(op)?;
    let scale = op.scale();
    let spec = op.spectrum()?;
    let rho = op.norm_2() + 1.0;
    let mut xs = vertical_lines.to_vec();
    let mut ys = horizontal_lines.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &x in &xs {
        for e in &spec.eigenvalues {
            if (e.re - x).abs() <= 1e-7 * scale {
                return Err(SpectralCutError::LineHitsEigenvalue {
                    line: x,
                    eigenvalue: *e,
                    distance: (e.re - x).abs(),
                });
            }
        }
    }
    for &y in &ys {
        for e in &spec.eigenvalues {
            if (e.im - y).abs() <= 1e-7 * scale {
                return Err(SpectralCutError::LineHitsEigenvalue {
                    line: y,
                    eigenvalue: *e,
                    distance: (e.im - y).abs(),
                });
            }
        }
    }

    let n = op.dim();
    let ident = ProjectionMatrix::Dense(linalg::identity(n));
    let proj = |curve: Curve| -> Result<ProjectionMatrix> {
        let cyc = Cycle::single(curve);
        Ok(riesz_projection(op, &cyc, cfg)?.matrix)
    };
    let p_right: Vec<ProjectionMatrix> = xs
        .iter()
        .map(|&x| proj(half_plane_right_curve(x, rho)?))
        .collect::<Result<_>>()?;
    let p_upper: Vec<ProjectionMatrix> = ys
        .iter()
        .map(|&y| proj(half_plane_upper_curve(y, rho)?))
        .collect::<Result<_>>()?;

    // strip projections by telescoping: S_0 = I − P(x_0), …, S_p = P(x_{p-1})
    let neg = |m: &ProjectionMatrix| -> ProjectionMatrix {
        match m {
            ProjectionMatrix::Dense(d) => ProjectionMatrix::Dense(-d),
            ProjectionMatrix::Diagonal(d) => ProjectionMatrix::Diagonal(-d),
        }
    };
    let strips = |ps: &[ProjectionMatrix]| -> Vec<ProjectionMatrix> {
        let mut out = Vec::with_capacity(ps.len() + 1);
        for i in 0..=ps.len() {
            let left = if i == 0 { ident.clone() } else { ps[i - 1].clone() };
            let strip = if i == ps.len() {
                left
            } else {
                left.add(&neg(&ps[i]))
            };
            out.push(strip);
        }
        out
    };
    let v_strips = strips(&p_right);
    let h_strips = strips(&p_upper);

    let clamp = rho + 1.0;
    let edges = |lines: &[f64]| -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for i in 0..=lines.len() {
            let lo = if i == 0 { -clamp } else { lines[i - 1] };
            let hi = if i == lines.len() { clamp } else { lines[i] };
            out.push((lo, hi));
        }
        out
    };
    let x_iv = edges(&xs);
    let y_iv = edges(&ys);

    let g1 = cover.u.eroded_fraction(0.1);
    let g2 = cover.v.eroded_fraction(0.1);

    let mut cells = Vec::new();
    let mut partition = ProjectionMatrix::Dense(CMatrix::zeros(n, n));
    let mut p1 = ProjectionMatrix::Dense(CMatrix::zeros(n, n));
    let mut p2 = ProjectionMatrix::Dense(CMatrix::zeros(n, n));
    let mut max_comm = 0.0f64;
    for (i, sv) in v_strips.iter().enumerate() {
        for (j, sh) in h_strips.iter().enumerate() {
            let comm = sv.mul(sh).distance(&sh.mul(sv));
            max_comm = max_comm.max(comm);
            if comm > 1e-6 * scale {
                return Err(SpectralCutError::CellProductNotCommuting { norm: comm });
            }
            let cell_matrix = sv.mul(sh);
            let rect = Rect::new(x_iv[i].0, x_iv[i].1, y_iv[j].0, y_iv[j].1);
            let occupied = spec
                .eigenvalues
                .iter()
                .any(|e| rect.contains(*e, 1e-9 * scale));
            if occupied {
                partition = partition.add(&cell_matrix);
            }
            if g1.shapes.iter().any(|s| s.intersects_rect(&rect)) {
                p1 = p1.add(&cell_matrix);
            }
            if g2.shapes.iter().any(|s| s.intersects_rect(&rect)) {
                p2 = p2.add(&cell_matrix);
            }
            cells.push(CellProjection {
                rect,
                rank: cell_matrix.rank(),
                matrix: cell_matrix,
                occupied,
            });
        }
    }
    let partition_defect = linalg::operator_norm(&(partition.to_dense() - linalg::identity(n)));

    // ran P₁ + ran P₂ must span the space
    let b1 = linalg::range_basis(&p1.to_dense(), 1e-8);
    let b2 = linalg::range_basis(&p2.to_dense(), 1e-8);
    let mut joint = CMatrix::zeros(n, b1.ncols() + b2.ncols());
    for j in 0..b1.ncols() {
        joint.set_column(j, &b1.column(j));
    }
    for j in 0..b2.ncols() {
        joint.set_column(b1.ncols() + j, &b2.column(j));
    }
    let span_rank = linalg::rank_with_cutoff(&joint, 1e-8);

    Ok(LineFamilyReport {
        cells,
        p1,
        p2,
        partition_defect,
        span_rank,
        max_cell_commutator: max_comm,
    })
}

/// Contour vectors of the hyperinvariant-subspace criterion.
#[derive(Debug, Clone)]
pub struct HyperinvariantWitness {
    pub x1: CVector,
    pub x2_star: CVector,
    pub x1_norm: f64,
    pub x2_star_norm: f64,
    /// max |⟨y, x₂*⟩| over unit vectors y in the oracle subspace for the
    /// closed interior of γ₁.
    pub pairing_defect: f64,
}

/// Computes `x₁ = (1/2πi)∮_{γ1}(zI−T)⁻¹x dz` and
/// `x₂* = (1/2πi)∮_{γ2}(zI−T*)⁻¹x* dz`, requiring disjoint interior
/// closures and integrable resolvents; errors with `ZeroWitness` when either
/// integral vanishes.
pub fn hyperinvariant_witness(
    op: &OperatorModel,
    gamma1: &Curve,
    gamma2: &Curve,
    x: &CVector,
    xstar: &CVector,
    cfg: &QuadratureConfig,
) -> Result<HyperinvariantWitness> {
    if gamma1.distance_to_curve(gamma2) <= 0.0 {
        return Err(SpectralCutError::InteriorsOverlap {
            detail: "the two curves touch".into(),
        });
    }
    let c1 = Cycle::single(gamma1.clone());
    let c2 = Cycle::single(gamma2.clone());
    if c1.winding_unchecked(gamma2.sample_point()) != 0
        || c2.winding_unchecked(gamma1.sample_point()) != 0
    {
        return Err(SpectralCutError::InteriorsOverlap {
            detail: "interior closures are not disjoint".into(),
        });
    }

    let adj = op.adjoint();
    let near_points = |curve: &Curve| -> Vec<C64> {
        cfg.singular_points
            .iter()
            .map(|sp| sp.point)
            .filter(|p| curve.distance_to_point(*p) <= 1e-6 * curve.length())
            .collect()
    };
    let pts1 = near_points(gamma1);
    let pts2 = near_points(gamma2);
    for (model, vec, curve, pts) in [
        (op, x, gamma1, &pts1),
        (&adj, xstar, gamma2, &pts2),
    ] {
        let rep = integrability_probe(model, vec, curve, pts)?;
        if !rep.finite {
            let bad = rep
                .per_point
                .iter()
                .max_by(|a, b| a.exponent.partial_cmp(&b.exponent).unwrap())
                .unwrap();
            return Err(SpectralCutError::NonIntegrableResolvent {
                point: bad.point,
                exponent: bad.exponent,
            });
        }
    }

    let tpi = two_pi_i();
    let r1 = integrate(|z| op.resolvent_apply(z, x), &c1, cfg)?;
    let x1 = r1.value / tpi;
    let r2 = integrate(|z| adj.resolvent_apply(z, xstar), &c2, cfg)?;
    let x2_star = r2.value / tpi;

    let x1_norm = x1.norm();
    let x2_star_norm = x2_star.norm();
    if x1_norm <= 1e-10 * x.norm() {
        return Err(SpectralCutError::ZeroWitness {
            detail: format!("∮ over γ1 vanished (‖x₁‖ = {x1_norm:.3e})"),
        });
    }
    if x2_star_norm <= 1e-10 * xstar.norm() {
        return Err(SpectralCutError::ZeroWitness {
            detail: format!("∮ over γ2 vanished (‖x₂*‖ = {x2_star_norm:.3e})"),
        });
    }

    let oracle = op.spectral_subspace_oracle(&c1)?;
    let pairing_defect = if oracle.ncols() == 0 {
        0.0
    } else {
        let q = linalg::orthonormalize(&oracle);
        (q.adjoint() * &x2_star).norm()
    };

    Ok(HyperinvariantWitness {
        x1,
        x2_star,
        x1_norm,
        x2_star_norm,
        pairing_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::RegionShape;

    fn diag(vals: &[(f64, f64)]) -> OperatorModel {
        OperatorModel::diagonal(vals.iter().map(|&(re, im)| c(re, im)).collect())
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn cover_split_separates_two_eigenvalues() {
        let t = diag(&[(0.0, 0.0), (2.0, 0.0)]);
        let cover = CoverPair::new(
            Region::new(vec![RegionShape::disc(c(0.0, 0.0), 1.2)]),
            Region::new(vec![RegionShape::disc(c(2.0, 0.0), 1.2)]),
        );
        let split = cover_split(&t, &cover, None).unwrap();
        assert!(!split.exterior_vacuous);
        // eigenvalue membership oracle
        assert_eq!(split.cycle.winding_unchecked(c(0.0, 0.0)), 1);
        assert_eq!(split.cycle.winding_unchecked(c(2.0, 0.0)), 0);
        assert!(split.mesh < split.delta / 4.0 + 1e-12);
    }

    #[test]
    fn cover_split_degenerates_when_u_swallows_the_spectrum() {
        let t = diag(&[(0.0, 0.0), (2.0, 0.0)]);
        let cover = CoverPair::new(
            Region::new(vec![RegionShape::disc(c(1.0, 0.0), 8.0)]),
            Region::new(vec![RegionShape::disc(c(9.0, 9.0), 0.5)]),
        );
        let split = cover_split(&t, &cover, None).unwrap();
        assert!(split.exterior_vacuous);
        assert_eq!(split.cycle.winding_unchecked(c(0.0, 0.0)), 1);
        assert_eq!(split.cycle.winding_unchecked(c(2.0, 0.0)), 1);
    }

    #[test]
    fn cover_split_overlapping_strips() {
        // strips with a generous overlap band; the boundary must thread
        // through U ∩ V
        let t = diag(&[(-1.0, 0.0), (1.0, 0.0), (0.0, 0.1)]);
        let cover = CoverPair::new(
            Region::new(vec![RegionShape::rect(-3.0, 0.8, -2.0, 2.0)]),
            Region::new(vec![RegionShape::rect(-0.8, 3.0, -2.0, 2.0)]),
        );
        let split = cover_split(&t, &cover, None).unwrap();
        // postconditions on a dense sample of eigenvalues (membership)
        for e in [c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.1)] {
            let w = split.cycle.winding_unchecked(e);
            if w == 1 {
                assert!(cover.u.contains(e, 1e-9));
            } else {
                assert!(cover.v.contains(e, 1e-9));
            }
        }
    }

    #[test]
    fn cover_split_rejects_uncovered_spectrum() {
        let t = diag(&[(0.0, 0.0), (5.0, 5.0)]);
        let cover = CoverPair::new(
            Region::new(vec![RegionShape::disc(c(0.0, 0.0), 1.0)]),
            Region::new(vec![RegionShape::disc(c(2.0, 0.0), 1.0)]),
        );
        match cover_split(&t, &cover, None) {
            Err(SpectralCutError::CoverInvalid { .. }) => {}
            other => panic!("expected CoverInvalid, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn super_decompose_diagonal_witness() {
        let t = diag(&[(0.0, 0.0), (2.0, 0.0)]);
        let cover = CoverPair::new(
            Region::new(vec![RegionShape::disc(c(0.0, 0.0), 1.2)]),
            Region::new(vec![RegionShape::disc(c(2.0, 0.0), 1.2)]),
        );
        let w = super_decompose(&t, &cover, &cfg()).unwrap();
        assert!(w.interior_spec_in_u && w.exterior_spec_in_v);
        let expect = ProjectionMatrix::Diagonal(CVector::from_iterator(
            2,
            [c(1.0, 0.0), c(0.0, 0.0)],
        ));
        assert!(w.result.matrix.distance(&expect) < 1e-9);
        assert!(w.result.diagnostics.commutator_defect <= 1e-8);
    }

    #[test]
    fn super_decompose_dense_random_halfplane_cover() {
        // 6×6 dense matrix with two spectral clusters separated by an
        // eigenvalue-free band
        let mut state = 11u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        let n = 6;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            let base = if i < 3 { c(-2.0, 0.0) } else { c(2.0, 0.0) };
            m[(i, i)] = base + c(0.4 * next(), 0.4 * next());
            for j in (i + 1)..n {
                m[(i, j)] = c(0.2 * next(), 0.2 * next());
            }
        }
        let t = OperatorModel::dense(m);
        let cover = CoverPair::new(
            Region::new(vec![RegionShape::rect(-4.0, 0.5, -2.0, 2.0)]),
            Region::new(vec![RegionShape::rect(-0.5, 4.0, -2.0, 2.0)]),
        );
        let w = super_decompose(&t, &cover, &cfg()).unwrap();
        assert!(w.interior_spec_in_u && w.exterior_spec_in_v);
        assert!(w.result.diagnostics.idempotency_defect < 1e-7);
        assert!(w.result.diagnostics.commutator_defect < 1e-8);
        assert_eq!(w.result.diagnostics.rank, 3);
    }

    #[test]
    fn super_decompose_series_route_matches_dense_route() {
        let pd = crate::perturbation::tests::fixture_12_2();
        let t = pd.model();
        // split the spectrum box down the middle with overlapping rects
        let spec = t.spectrum().unwrap();
        let (re_lo, re_hi, im_lo, im_hi) = spec.bounding_values();
        let mid = (re_lo + re_hi) / 2.0;
        let cover = CoverPair::new(
            Region::new(vec![RegionShape::rect(re_lo - 1.5, mid + 0.8, im_lo - 1.5, im_hi + 1.5)]),
            Region::new(vec![RegionShape::rect(mid - 0.8, re_hi + 1.5, im_lo - 1.5, im_hi + 1.5)]),
        );
        let w_series = super_decompose(&t, &cover, &cfg()).unwrap();
        // dense route over the same cycle
        let dense = OperatorModel::Dense(t.to_dense());
        let w_dense = riesz_projection(&dense, &w_series.cycle, &cfg()).unwrap();
        let dist = w_series.result.matrix.distance(&w_dense.matrix);
        assert!(dist < 1e-6, "series vs dense witness {dist}");
        assert!(w_series.interior_spec_in_u && w_series.exterior_spec_in_v);
    }

    #[test]
    fn line_family_on_four_quadrant_eigenvalues() {
        let t = diag(&[(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]);
        let cover = CoverPair::new(
            Region::new(vec![RegionShape::rect(-2.0, 0.3, -2.0, 2.0)]),
            Region::new(vec![RegionShape::rect(-0.3, 2.0, -2.0, 2.0)]),
        );
        let rep = line_family_decompose(&t, &[0.0], &[0.0], &cover, &cfg()).unwrap();
        assert_eq!(rep.cells.len(), 4);
        for cell in &rep.cells {
            assert!(cell.occupied);
            assert_eq!(cell.rank, 1, "cell {:?} rank {}", cell.rect, cell.rank);
        }
        assert!(rep.partition_defect < 1e-7, "partition defect {}", rep.partition_defect);
        assert_eq!(rep.span_rank, 4);
        assert!(rep.max_cell_commutator < 1e-8);
    }

    #[test]
    fn line_family_empty_cell_projects_to_zero() {
        let t = diag(&[(1.2, 1.2), (-1.2, -1.2)]);
        let cover = CoverPair::new(
            Region::new(vec![RegionShape::rect(-3.0, 0.3, -3.0, 3.0)]),
            Region::new(vec![RegionShape::rect(-0.3, 3.0, -3.0, 3.0)]),
        );
        let rep = line_family_decompose(&t, &[0.0], &[0.0], &cover, &cfg()).unwrap();
        // the two anti-diagonal quadrants hold no eigenvalues
        let empty: Vec<_> = rep.cells.iter().filter(|cl| !cl.occupied).collect();
        assert_eq!(empty.len(), 2);
        for cell in empty {
            assert!(cell.matrix.norm() < 1e-8, "empty cell norm {}", cell.matrix.norm());
        }
        assert!(rep.partition_defect < 1e-7);
    }

    #[test]
    fn line_family_rejects_line_through_eigenvalue() {
        let t = diag(&[(0.0, 1.0), (1.0, -1.0)]);
        let cover = CoverPair::new(
            Region::new(vec![RegionShape::rect(-2.0, 2.0, -2.0, 2.0)]),
            Region::new(vec![RegionShape::rect(-2.0, 2.0, -2.0, 2.0)]),
        );
        match line_family_decompose(&t, &[0.0], &[], &cover, &cfg()) {
            Err(SpectralCutError::LineHitsEigenvalue { .. }) => {}
            other => panic!("expected LineHitsEigenvalue, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn hyperinvariant_witness_on_diagonal_model() {
        let t = diag(&[(0.0, 0.0), (2.0, 0.0)]);
        let g1 = Curve::circle(c(0.0, 0.0), 0.5, true);
        let g2 = Curve::circle(c(2.0, 0.0), 0.5, true);
        let x = CVector::from_iterator(2, [c(1.0, 0.0), c(1.0, 0.0)]);
        let w = hyperinvariant_witness(&t, &g1, &g2, &x, &x, &cfg()).unwrap();
        assert!((w.x1[0] - c(1.0, 0.0)).norm() < 1e-10 && w.x1[1].norm() < 1e-10);
        assert!((w.x2_star[1] - c(1.0, 0.0)).norm() < 1e-10 && w.x2_star[0].norm() < 1e-10);
        assert!(w.pairing_defect < 1e-10);
    }

    #[test]
    fn hyperinvariant_witness_zero_when_mass_misses_the_curve() {
        let t = diag(&[(0.0, 0.0), (2.0, 0.0)]);
        let g1 = Curve::circle(c(0.0, 0.0), 0.5, true);
        let g2 = Curve::circle(c(2.0, 0.0), 0.5, true);
        let x_out = CVector::from_iterator(2, [c(0.0, 0.0), c(1.0, 0.0)]);
        let x_in = CVector::from_iterator(2, [c(1.0, 0.0), c(1.0, 0.0)]);
        match hyperinvariant_witness(&t, &g1, &g2, &x_out, &x_in, &cfg()) {
            Err(SpectralCutError::ZeroWitness { .. }) => {}
            other => panic!("expected ZeroWitness, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn hyperinvariant_witness_on_clustered_dense_matrix() {
        // real similarity with two real spectral clusters keeps the adjoint
        // geometry symmetric about the real axis
        let mut state = 3u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        let n = 6;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = if i < 3 {
                c(-2.0 + 0.3 * next(), 0.0)
            } else {
                c(2.0 + 0.3 * next(), 0.0)
            };
            for j in (i + 1)..n {
                m[(i, j)] = c(0.15 * next(), 0.0);
            }
        }
        let t = OperatorModel::dense(m);
        let g1 = Curve::circle(c(-2.0, 0.0), 1.0, true);
        let g2 = Curve::circle(c(2.0, 0.0), 1.0, true);
        let x = CVector::from_fn(n, |i, _| c(1.0 + i as f64 * 0.1, 0.2));
        let w = hyperinvariant_witness(&t, &g1, &g2, &x, &x, &cfg()).unwrap();
        assert!(w.x1_norm > 1e-6 && w.x2_star_norm > 1e-6);
        assert!(w.pairing_defect < 1e-7, "pairing defect {}", w.pairing_defect);
    }
}
