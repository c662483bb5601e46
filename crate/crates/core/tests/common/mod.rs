//! Shared fixtures for the integration and acceptance suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_cuts::contour::{Curve, Cycle};
use spectral_cuts::operators::OperatorModel;
use spectral_cuts::perturbation::PerturbedDiagonal;
use spectral_cuts::{C64, CMatrix, CVector};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(r: &mut ChaCha8Rng, scale: f64) -> C64 {
    c(
        scale * (r.gen::<f64>() - 0.5),
        scale * (r.gen::<f64>() - 0.5),
    )
}

/// Random dense matrix with entries in a disc of the given radius.
pub fn random_dense(r: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| random_complex(r, scale))
}

pub fn random_vector(r: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| random_complex(r, 2.0))
}

/// A circle through a spectral gap around `center`: its radius sits between
/// two consecutive eigenvalue moduli with a gap of at least `2·margin`,
/// leaving at least one eigenvalue on each side. `None` when no gap exists.
pub fn gap_circle_at(center: C64, eigenvalues: &[C64], margin: f64) -> Option<(C64, f64)> {
    let mut moduli: Vec<f64> = eigenvalues.iter().map(|e| (e - center).norm()).collect();
    moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for i in 0..moduli.len() - 1 {
        if moduli[i + 1] - moduli[i] >= 2.0 * margin {
            return Some((center, (moduli[i] + moduli[i + 1]) / 2.0));
        }
    }
    None
}

/// Gap circle centered at the eigenvalue mean, then at each eigenvalue
/// cluster seed, whichever works first.
pub fn gap_circle(eigenvalues: &[C64], margin: f64) -> Option<(C64, f64)> {
    let n = eigenvalues.len() as f64;
    let mean = eigenvalues.iter().sum::<C64>() / c(n, 0.0);
    if let Some(hit) = gap_circle_at(mean, eigenvalues, margin) {
        return Some(hit);
    }
    for e in eigenvalues {
        if let Some(hit) = gap_circle_at(*e, eigenvalues, margin) {
            return Some(hit);
        }
    }
    None
}

/// Point-mass discretization of two tangent discs `D̄(−1,1) ∪ D̄(1,1)` with
/// every node at distance ≥ `clearance` from the separating curve; exactly
/// `target` nodes with uniform area weights.
pub fn tangent_disc_model(target: usize, clearance: f64, curve: &Curve) -> OperatorModel {
    let mut nodes = Vec::with_capacity(2 * target);
    // polar grids in each disc, dense enough to overshoot the target
    let rings = ((target as f64 / 6.0).sqrt() as usize + 2).max(8);
    let per_ring = 6 * rings;
    for &center in &[c(-1.0, 0.0), c(1.0, 0.0)] {
        for i in 0..rings {
            let rho = (i as f64 + 0.5) / rings as f64 * 0.995;
            for j in 0..per_ring {
                let th = std::f64::consts::TAU * (j as f64 + 0.5 * (i % 2) as f64) / per_ring as f64;
                let p = center + C64::from_polar(rho, th);
                if curve.distance_to_point(p) >= clearance {
                    nodes.push(p);
                }
            }
        }
    }
    assert!(
        nodes.len() >= target,
        "generator produced {} nodes, need {target}",
        nodes.len()
    );
    nodes.truncate(target);
    let w = 1.0 / target as f64;
    OperatorModel::point_mass(nodes, vec![w; target]).expect("valid point masses")
}

/// The separating curve of the tangent-disc example: the segment through
/// `[−i, i]` closed around the right disc.
pub fn tangent_disc_curve() -> Curve {
    Curve::polygon(&[
        c(0.0, -1.0),
        c(0.4, -2.4),
        c(3.4, -2.4),
        c(3.4, 2.4),
        c(0.4, 2.4),
        c(0.0, 1.0),
    ])
    .expect("tangent-disc curve is simple")
}

/// Deterministic N=12, K=2 diagonal-plus-series fixture.
pub fn perturbed_fixture_12_2() -> PerturbedDiagonal {
    let mut r = rng(2024);
    let lambda: Vec<C64> = (0..12)
        .map(|_| c(1.0 + 1.9 * (r.gen::<f64>() - 0.5), 1.0 + 1.9 * (r.gen::<f64>() - 0.5)))
        .collect();
    let coeffs = |r: &mut ChaCha8Rng| -> Vec<Vec<C64>> {
        (0..2)
            .map(|_| (0..12).map(|_| random_complex(r, 0.2)).collect())
            .collect()
    };
    let alpha = coeffs(&mut r);
    let beta = coeffs(&mut r);
    PerturbedDiagonal::new(lambda, alpha, beta).expect("fixture is valid")
}

/// Deterministic N=40, K=3 stress fixture.
pub fn perturbed_fixture_40_3() -> PerturbedDiagonal {
    let mut r = rng(4040);
    let lambda: Vec<C64> = (0..40)
        .map(|_| c(1.0 + 2.4 * (r.gen::<f64>() - 0.5), 1.0 + 2.4 * (r.gen::<f64>() - 0.5)))
        .collect();
    let coeffs = |r: &mut ChaCha8Rng| -> Vec<Vec<C64>> {
        (0..3)
            .map(|_| (0..40).map(|_| random_complex(r, 0.1)).collect())
            .collect()
    };
    let alpha = coeffs(&mut r);
    let beta = coeffs(&mut r);
    PerturbedDiagonal::new(lambda, alpha, beta).expect("fixture is valid")
}

/// Weighted L²(μ) norm for point-mass models.
pub fn weighted_norm(weights: &[f64], v: &CVector) -> f64 {
    weights
        .iter()
        .zip(v.iter())
        .map(|(w, x)| w * x.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Cycle consisting of one circle.
pub fn circle_cycle(center: C64, radius: f64) -> Cycle {
    Cycle::single(Curve::circle(center, radius, true))
}
