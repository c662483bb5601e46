//! Acceptance suite: each test exercises one acceptance criterion end to
//! end at the stated tolerance and prints one pass line. Fixtures are
//! seeded, so the suite is deterministic.

mod common;

use common::*;
use rand::seq::SliceRandom;
use rand::Rng;
use spectral_cuts::calculus::{
    calculus_both, calculus_restrict, check_calculus_axioms, FunctionExpr,
};
use spectral_cuts::contour::{Curve, Cycle, Region, RegionShape};
use spectral_cuts::cuts::{
    cut_overlapping_sum, cut_product, cut_sum, local_split, plain_spectral_cut, riesz_projection,
    ProjectionMatrix,
};
use spectral_cuts::decompose::{line_family_decompose, super_decompose, CoverPair};
use spectral_cuts::error::SpectralCutError;
use spectral_cuts::linalg;
use spectral_cuts::operators::OperatorModel;
use spectral_cuts::perturbation::{
    a_coefficients, densify, series_calculus, series_projection, splitting_rectangle,
    xy_operators, PerturbedDiagonal,
};
use spectral_cuts::quadrature::{integrate, QuadratureConfig, SingularPoint};
use spectral_cuts::{two_pi_i, C64, CMatrix, CVector};
use std::time::Instant;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Criterion 1: contour Riesz projections match the eigenprojection oracle
/// on 50 random dense 8×8 matrices with eigenvalue–cycle gap ≥ 0.05;
/// idempotency and commutator defects ≤ 1e−8; total runtime ≤ 5 s.
#[test]
fn criterion_1_riesz_oracle_equivalence() {
    let start = Instant::now();
    let mut r = rng(101);
    let mut done = 0usize;
    let mut draws = 0usize;
    while done < 50 {
        draws += 1;
        assert!(draws < 500, "fixture generation stalled");
        let m = random_dense(&mut r, 8, 2.0);
        let t = OperatorModel::dense(m.clone());
        let spec = t.spectrum().expect("spectrum");
        let Some((center, radius)) = gap_circle(&spec.eigenvalues, 0.05) else {
            continue;
        };
        let cycle = circle_cycle(center, radius);
        if spec.gap_to_cycle(&cycle) < 0.05 {
            continue;
        }
        let result = riesz_projection(&t, &cycle, &cfg()).expect("riesz projection");
        // independent oracle: oblique projector from reordered Schur bases
        let b_in = linalg::invariant_subspace(&m, |e| (e - center).norm() < radius).unwrap();
        let b_out = linalg::invariant_subspace(&m, |e| (e - center).norm() >= radius).unwrap();
        let oracle = linalg::oblique_projector(&b_in, &b_out).unwrap();
        let delta = linalg::operator_norm(&(result.matrix.to_dense() - oracle));
        assert!(delta <= 1e-7, "‖P_contour − P_oracle‖ = {delta:.3e}");
        assert!(
            result.diagnostics.idempotency_defect <= 1e-8,
            "idempotency {:.3e}",
            result.diagnostics.idempotency_defect
        );
        assert!(
            result.diagnostics.commutator_defect <= 1e-8,
            "commutator {:.3e}",
            result.diagnostics.commutator_defect
        );
        done += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() <= 5.0, "runtime {elapsed:?} > 5 s");
    println!("[PASS] criterion 1 — Riesz-oracle equivalence on 50 random 8×8 matrices ({elapsed:?})");
}

/// Criterion 2: cycle algebra on 20 fixtures — disjoint sums, products over
/// intersections, and shared-boundary sums at their stated tolerances.
#[test]
fn criterion_2_cycle_algebra() {
    let mut r = rng(202);
    for trial in 0..20 {
        // diagonal fixture with eigenvalues in three clusters
        let n_each = 2 + (trial % 3);
        let mut lambda = Vec::new();
        for &centre in &[c(0.0, 0.0), c(4.0, 0.0), c(2.0, 3.0)] {
            for _ in 0..n_each {
                lambda.push(centre + random_complex(&mut r, 0.8));
            }
        }
        let t = OperatorModel::diagonal(lambda.clone());

        // sum over disjoint closures
        let c1 = circle_cycle(c(0.0, 0.0), 1.1);
        let c2 = circle_cycle(c(4.0, 0.0), 1.1);
        let r1 = riesz_projection(&t, &c1, &cfg()).unwrap();
        let r2 = riesz_projection(&t, &c2, &cfg()).unwrap();
        let (sum, merged) = cut_sum(&t, &r1, &r2, &c1, &c2, &cfg()).unwrap();
        let direct = riesz_projection(&t, &merged, &cfg()).unwrap();
        let d_sum = sum.matrix.distance(&direct.matrix);
        assert!(d_sum <= 1e-8, "‖P₁+P₂ − P_union‖ = {d_sum:.3e}");

        // product over an explicit intersection cycle
        let ra = Cycle::single(
            Curve::polygon(&[c(-1.4, -1.4), c(1.4, -1.4), c(1.4, 1.4), c(-1.4, 1.4)]).unwrap(),
        );
        let rb = Cycle::single(
            Curve::polygon(&[c(-0.9, -2.0), c(0.9, -2.0), c(0.9, 2.0), c(-0.9, 2.0)]).unwrap(),
        );
        let ri = Cycle::single(
            Curve::polygon(&[c(-0.9, -1.4), c(0.9, -1.4), c(0.9, 1.4), c(-0.9, 1.4)]).unwrap(),
        );
        let pa = riesz_projection(&t, &ra, &cfg()).unwrap();
        let pb = riesz_projection(&t, &rb, &cfg()).unwrap();
        let prod = cut_product(&t, &pa, &pb, &ra, &rb, &ri, &cfg()).unwrap();
        let d_prod = prod.diagnostics.direct_agreement.unwrap();
        assert!(d_prod <= 1e-8, "‖P₁P₂ − P_∩‖ = {d_prod:.3e}");

        // shared-boundary sum: two squares sharing an edge
        let sq1 = Curve::polygon(&[c(-1.4, -1.4), c(0.0, -1.4), c(0.0, 1.4), c(-1.4, 1.4)])
            .unwrap();
        let sq2 = Curve::polygon(&[c(0.0, -1.4), c(1.4, -1.4), c(1.4, 1.4), c(0.0, 1.4)]).unwrap();
        let p1 = riesz_projection(&t, &Cycle::single(sq1.clone()), &cfg()).unwrap();
        let p2 = riesz_projection(&t, &Cycle::single(sq2.clone()), &cfg()).unwrap();
        let beta = cut_overlapping_sum(&t, &[p1.clone(), p2.clone()], &[sq1, sq2]).unwrap();
        let expect = p1.matrix.add(&p2.matrix);
        let d_beta = beta.matrix.distance(&expect);
        assert!(d_beta <= 1e-7, "‖ΣP_{{γ_k}} − P_β‖ = {d_beta:.3e}");
        assert!(beta.diagnostics.idempotency_defect <= 1e-7);
    }
    println!("[PASS] criterion 2 — cycle algebra (sums, products, shared-boundary sums) on 20 fixtures");
}

/// Criterion 3: functional-calculus axioms — identity, additivity,
/// multiplicativity ≤ 1e−7, spectral mapping ≤ 1e−6 Hausdorff, monotone
/// Taylor convergence for exp beyond 2× the spectral radius, curve
/// equivalence ≤ 1e−8, and restrict-vs-integral agreement ≤ 1e−7.
#[test]
fn criterion_3_calculus_axioms() {
    let dom = Region::new(vec![RegionShape::rect(-12.0, 12.0, -12.0, 12.0)]);
    let f = FunctionExpr::parse("exp(z)", dom.clone()).unwrap();
    let g = FunctionExpr::parse("z^2 - z + 1", dom.clone()).unwrap();

    let mut r = rng(303);
    let mut fixtures: Vec<(OperatorModel, Cycle)> = Vec::new();
    // diagonal fixture
    fixtures.push((
        OperatorModel::diagonal(vec![c(0.3, 0.1), c(-0.4, -0.2), c(2.5, 0.3), c(3.0, -0.4)]),
        circle_cycle(c(0.0, 0.0), 1.2),
    ));
    // dense fixtures with clustered spectra
    for _ in 0..2 {
        let mut m = random_dense(&mut r, 6, 0.3);
        for i in 0..6 {
            m[(i, i)] += if i < 3 { c(-1.5, 0.0) } else { c(1.5, 0.0) };
        }
        let t = OperatorModel::dense(m);
        let spec = t.spectrum().unwrap();
        let (center, radius) =
            gap_circle_at(c(-1.5, 0.0), &spec.eigenvalues, 0.1).expect("gap exists");
        fixtures.push((t, circle_cycle(center, radius)));
    }

    for (t, cycle) in &fixtures {
        let rep = check_calculus_axioms(t, cycle, &f, &g, &cfg()).unwrap();
        for name in ["identity", "additivity", "multiplicativity"] {
            let chk = rep.check(name).unwrap();
            assert!(
                chk.measured <= 1e-7,
                "{name} measured {:.3e} on fixture",
                chk.measured
            );
        }
        let sm = rep.check("spectral_mapping").unwrap();
        assert!(sm.measured <= 1e-6, "spectral mapping {:.3e}", sm.measured);
        assert!(rep.check("continuity").unwrap().pass, "Taylor convergence not monotone");
        let eq = rep.check("curve_equivalence").unwrap();
        assert!(eq.measured <= 1e-8, "curve equivalence {:.3e}", eq.measured);

        let (_, ri) = calculus_both(t, cycle, &f, &cfg()).unwrap();
        let agree = ri.agreement_with_other_route.unwrap();
        assert!(agree <= 1e-7, "route agreement {agree:.3e}");
    }
    println!("[PASS] criterion 3 — calculus axioms and route agreement on {} fixtures", fixtures.len());
}

/// Criterion 4: the touching-curve case on the two tangent discs with 10⁴
/// point masses avoiding the curve by ≥ 1e−3: the computed projection
/// matches multiplication by the interior indicator entrywise to 1e−5, and
/// the measured ∮-norm ratio respects the 2π bound for 20 indicator
/// combinations. Runtime ≤ 60 s.
#[test]
fn criterion_4_tangent_disc_touching_cut() {
    let start = Instant::now();
    let curve = tangent_disc_curve();
    let t = tangent_disc_model(10_000, 1e-3, &curve);
    let cycle = Cycle::single(curve.clone());
    let mut qcfg = cfg();
    qcfg.tol = 1e-8;
    qcfg.singular_points = vec![SingularPoint::new(c(0.0, 0.0))];

    let result = plain_spectral_cut(&t, &cycle, &qcfg).expect("touching cut");
    let (nodes, weights) = match &t {
        OperatorModel::PointMass { nodes, weights } => (nodes.clone(), weights.clone()),
        _ => unreachable!(),
    };
    let ProjectionMatrix::Diagonal(p) = &result.matrix else {
        panic!("point-mass cut must stay diagonal");
    };
    // entrywise indicator oracle via winding numbers
    let mut max_err = 0.0f64;
    for (i, node) in nodes.iter().enumerate() {
        let expect = if cycle.winding_unchecked(*node) == 1 { 1.0 } else { 0.0 };
        max_err = max_err.max((p[i] - c(expect, 0.0)).norm());
    }
    assert!(max_err <= 1e-5, "entrywise indicator error {max_err:.3e}");

    // ∮ bound for 20 indicator combinations: Borel sets at positive
    // distance from the curve
    let mut r = rng(404);
    let mut ratios = Vec::new();
    for combo in 0..20 {
        let k_sets = 1 + combo % 3;
        // regenerate until the indicator combination hits some node
        let (f_vec, f_norm) = loop {
            let mut f_vec = CVector::zeros(nodes.len());
            for _ in 0..k_sets {
                let center = loop {
                    let candidate = if r.gen::<bool>() { c(-1.0, 0.0) } else { c(1.0, 0.0) }
                        + random_complex(&mut r, 1.2);
                    if curve.distance_to_point(candidate) >= 0.25 {
                        break candidate;
                    }
                };
                let radius = 0.1 + 0.15 * r.gen::<f64>();
                let a_k = random_complex(&mut r, 2.0);
                for (i, node) in nodes.iter().enumerate() {
                    if (node - center).norm() <= radius {
                        f_vec[i] += a_k;
                    }
                }
            }
            let f_norm = weighted_norm(&weights, &f_vec);
            if f_norm > 0.0 {
                break (f_vec, f_norm);
            }
        };
        let integral_norm = if combo < 3 {
            // direct vector quadrature for the first few combinations
            let fr = integrate(
                |z| {
                    Ok(CVector::from_fn(nodes.len(), |i, _| {
                        f_vec[i] / (z - nodes[i])
                    }))
                },
                &cycle,
                &qcfg,
            )
            .unwrap();
            // consistency with the projection route
            let via_p = CVector::from_fn(nodes.len(), |i, _| p[i] * f_vec[i]) * two_pi_i();
            let diff = weighted_norm(&weights, &(fr.value.clone() - via_p));
            assert!(diff <= 1e-4 * f_norm, "direct vs projection route {diff:.3e}");
            weighted_norm(&weights, &fr.value)
        } else {
            let via_p = CVector::from_fn(nodes.len(), |i, _| p[i] * f_vec[i]) * two_pi_i();
            weighted_norm(&weights, &via_p)
        };
        let ratio = integral_norm / f_norm;
        let bound = 2.0 * std::f64::consts::PI * (1.0 + 1e-6);
        assert!(ratio <= bound, "∮ ratio {ratio:.9} exceeds 2π(1+1e−6)");
        ratios.push(ratio);
    }
    assert_eq!(ratios.len(), 20, "twenty indicator combinations");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() <= 60.0, "runtime {elapsed:?} > 60 s");
    println!(
        "[PASS] criterion 4 — tangent-disc touching cut on 10⁴ nodes (max entry error {max_err:.2e}, {} ∮ ratios ≤ 2π, {elapsed:?})",
        ratios.len()
    );
}

/// Criterion 5: the local split x = x⁺ + x⁻ reconstructs to 1e−8 with
/// subspace residuals ≤ 1e−6 on integrable fixtures; vectors with mass at
/// the touching point are rejected with growth exponent ≥ 0.95.
#[test]
fn criterion_5_local_split() {
    // regular fixtures: diagonal and dense, curve clear of the spectrum
    let mut r = rng(505);
    for _ in 0..5 {
        let t = OperatorModel::diagonal(vec![
            random_complex(&mut r, 0.8),
            c(2.0, 0.0) + random_complex(&mut r, 0.5),
            c(-2.0, 1.0) + random_complex(&mut r, 0.5),
        ]);
        let circle = Curve::circle(c(0.0, 0.0), 1.2, true);
        let x = random_vector(&mut r, 3);
        let s = local_split(&t, &circle, &x, &cfg()).unwrap();
        assert!(s.reconstruction_error <= 1e-8, "reconstruction {:.3e}", s.reconstruction_error);
        assert!(s.interior_residual <= 1e-6 * x.norm());
        assert!(s.exterior_residual <= 1e-6 * x.norm());
    }

    // touching fixture: small tangent-disc model, vectors supported away
    // from the touching point are integrable
    let curve = tangent_disc_curve();
    let t = tangent_disc_model(400, 1e-2, &curve);
    let nodes = match &t {
        OperatorModel::PointMass { nodes, .. } => nodes.clone(),
        _ => unreachable!(),
    };
    let mut qcfg = cfg();
    qcfg.tol = 1e-9;
    qcfg.singular_points = vec![SingularPoint::new(c(0.0, 0.0))];
    let x = CVector::from_fn(nodes.len(), |i, _| {
        if (nodes[i] - c(1.0, 0.0)).norm() < 0.5 || (nodes[i] + c(1.0, 0.0)).norm() < 0.5 {
            c(1.0, 0.2)
        } else {
            c(0.0, 0.0)
        }
    });
    let s = local_split(&t, &curve, &x, &qcfg).unwrap();
    assert!(s.reconstruction_error <= 1e-8, "touching reconstruction {:.3e}", s.reconstruction_error);
    assert!(s.interior_residual <= 1e-6 * x.norm());
    assert!(s.exterior_residual <= 1e-6 * x.norm());

    // non-integrable: eigenvector mass exactly at the touching point
    let t_bad = OperatorModel::diagonal(vec![c(0.0, 0.0), c(2.0, 0.0), c(-2.0, 0.5)]);
    let gamma = Curve::polygon(&[c(0.0, -1.0), c(1.2, -1.0), c(1.2, 1.0), c(0.0, 1.0)]).unwrap();
    let x_bad = CVector::from_fn(3, |i, _| if i == 0 { c(1.0, 0.0) } else { c(0.3, 0.0) });
    let mut qb = cfg();
    qb.singular_points = vec![SingularPoint::new(c(0.0, 0.0))];
    match local_split(&t_bad, &gamma, &x_bad, &qb) {
        Err(SpectralCutError::NonIntegrableResolvent { exponent, .. }) => {
            assert!(exponent >= 0.95, "reported exponent {exponent}");
        }
        other => panic!("expected NonIntegrableResolvent, got {:?}", other.map(|_| ())),
    }
    println!("[PASS] criterion 5 — local split reconstruction and non-integrable rejection");
}

/// Criterion 6: the series machinery on the N=12, K=2 fixture and the
/// N=40, K=3 stress fixture — master identity ≤ 1e−9, kernel identity
/// ≤ 1e−12, series-vs-dense projection ≤ 1e−6 at tol 1e−10, idempotency
/// ≤ 1e−7, series calculus vs densified two-route ≤ 1e−5, sum-to-identity
/// ≤ 1e−7; the stress fixture completes within 120 s.
#[test]
fn criterion_6_series_machinery() {
    let dom = Region::new(vec![RegionShape::rect(-20.0, 20.0, -20.0, 20.0)]);
    let f = FunctionExpr::parse("exp(z)", dom).unwrap();
    let mut r = rng(606);
    for (label, pd, budget_s) in [
        ("N=12 K=2", perturbed_fixture_12_2(), f64::INFINITY),
        ("N=40 K=3", perturbed_fixture_40_3(), 120.0),
    ] {
        let start = Instant::now();
        // kernel and master identities at random off-spectrum points
        let mut kernel_worst = 0.0f64;
        let mut master_worst = 0.0f64;
        let mut checked = 0;
        while checked < 40 {
            let z = random_complex(&mut r, 8.0);
            let Ok(xy) = xy_operators(&pd, z) else { continue };
            let Ok(ac) = a_coefficients(&pd, z) else { continue };
            kernel_worst = kernel_worst.max(xy.kernel_defect);
            master_worst = master_worst.max(ac.master_residual);
            checked += 1;
        }
        assert!(kernel_worst <= 1e-12, "{label}: kernel identity {kernel_worst:.3e}");
        assert!(master_worst <= 1e-9, "{label}: master identity {master_worst:.3e}");

        let curve = splitting_rectangle(&pd).expect("splitting rectangle");
        let mut qcfg = cfg();
        qcfg.tol = 1e-10;
        let proj = series_projection(&pd, &curve, &qcfg).unwrap();
        let dense = densify(&pd);
        let oracle = riesz_projection(&dense, &Cycle::single(curve.clone()), &qcfg).unwrap();
        let d_proj = proj.matrix.distance(&oracle.matrix);
        assert!(d_proj <= 1e-6, "{label}: ‖P_series − P_dense‖ = {d_proj:.3e}");
        assert!(
            proj.diagnostics.idempotency_defect <= 1e-7,
            "{label}: idempotency {:.3e}",
            proj.diagnostics.idempotency_defect
        );
        let sum_id = proj.diagnostics.complement_defect.unwrap();
        assert!(sum_id <= 1e-7, "{label}: sum-to-identity {sum_id:.3e}");

        let calc = series_calculus(&pd, &curve, &f, &qcfg).unwrap();
        assert!(
            calc.dense_agreement <= 1e-5,
            "{label}: series calculus vs densified {:.3e}",
            calc.dense_agreement
        );
        let elapsed = start.elapsed();
        assert!(
            elapsed.as_secs_f64() <= budget_s,
            "{label}: runtime {elapsed:?} over budget"
        );
        println!("[PASS] criterion 6 — series machinery on {label} (P delta {d_proj:.2e}, {elapsed:?})");
    }
}

/// Criterion 7: super-decomposability — for 20 random cover pairs per
/// fixture, the split cycle satisfies both spectral inclusions exactly on
/// the eigenvalue sets, and the witness commutes with T to 1e−8·‖T‖ with
/// compression spectra inside the closed cover sides within 1e−7.
#[test]
fn criterion_7_super_decomposability() {
    let mut r = rng(707);
    let fixtures: Vec<OperatorModel> = vec![
        OperatorModel::diagonal((0..8).map(|_| random_complex(&mut r, 2.4)).collect()),
        {
            let mut m = random_dense(&mut r, 6, 0.25);
            for i in 0..6 {
                m[(i, i)] += if i < 3 { c(-1.2, -0.4) } else { c(1.2, 0.6) };
            }
            OperatorModel::dense(m)
        },
        perturbed_fixture_12_2().model(),
    ];
    for (fi, t) in fixtures.iter().enumerate() {
        let spec = t.spectrum().unwrap();
        let eigs = spec.eigenvalues.clone();
        let mut done = 0;
        let mut attempts = 0;
        while done < 20 {
            attempts += 1;
            assert!(attempts < 400, "cover generation stalled on fixture {fi}");
            // split along a random direction at the widest projected gap
            let theta = std::f64::consts::TAU * r.gen::<f64>();
            let dir = c(theta.cos(), theta.sin());
            let mut order: Vec<usize> = (0..eigs.len()).collect();
            let proj = |e: &C64| e.re * dir.re + e.im * dir.im;
            order.sort_by(|&a, &b| proj(&eigs[a]).partial_cmp(&proj(&eigs[b])).unwrap());
            let mut best_gap = 0.0;
            let mut best_k = 0;
            for k in 1..order.len() {
                let gap = proj(&eigs[order[k]]) - proj(&eigs[order[k - 1]]);
                if gap > best_gap {
                    best_gap = gap;
                    best_k = k;
                }
            }
            if best_gap < 0.45 {
                continue;
            }
            let (side_u, side_v) = order.split_at(best_k);
            let mut d = f64::INFINITY;
            for &i in side_u {
                for &j in side_v {
                    d = d.min((eigs[i] - eigs[j]).norm());
                }
            }
            if d < 0.45 {
                continue;
            }
            let radius = 0.45 * d;
            let u = Region::new(side_u.iter().map(|&i| RegionShape::disc(eigs[i], radius)).collect());
            let v = Region::new(side_v.iter().map(|&i| RegionShape::disc(eigs[i], radius)).collect());
            let cover = CoverPair::new(u, v);
            let w = match super_decompose(t, &cover, &cfg()) {
                Ok(w) => w,
                Err(SpectralCutError::CoverTooTight { .. }) => continue,
                Err(e) => panic!("fixture {fi}: {e}"),
            };
            // exact inclusion on the eigenvalue sets
            for e in &eigs {
                let win = w.cycle.winding_unchecked(*e);
                if win == 1 {
                    assert!(cover.u.contains(*e, 1e-9), "interior eigenvalue {e} outside Ū");
                } else {
                    assert!(cover.v.contains(*e, 1e-9), "exterior eigenvalue {e} outside V̄");
                }
            }
            assert!(
                w.result.diagnostics.commutator_defect <= 1e-8,
                "fixture {fi}: ‖RT−TR‖/‖T‖ = {:.3e}",
                w.result.diagnostics.commutator_defect
            );
            let tol = 1e-7 * t.scale();
            for e in &w.result.diagnostics.interior_spectrum {
                assert!(
                    cover.u.contains(*e, tol),
                    "fixture {fi}: compression eigenvalue {e} escapes Ū"
                );
            }
            for e in &w.result.diagnostics.exterior_spectrum {
                assert!(
                    cover.v.contains(*e, tol),
                    "fixture {fi}: compression eigenvalue {e} escapes V̄"
                );
            }
            done += 1;
        }
    }
    println!("[PASS] criterion 7 — super-decomposability witnesses for 20 random covers × 3 fixtures");
}

/// Criterion 8: line-family decomposability — on Diagonal(±1±i) and 5
/// random diagonal fixtures, the occupied cell projections sum to the
/// identity within 1e−7 and ran P₁ + ran P₂ has full rank.
#[test]
fn criterion_8_line_family_decomposability() {
    let quadrant = OperatorModel::diagonal(vec![
        c(1.0, 1.0),
        c(-1.0, 1.0),
        c(-1.0, -1.0),
        c(1.0, -1.0),
    ]);
    let mut cases: Vec<(OperatorModel, Vec<f64>, Vec<f64>)> =
        vec![(quadrant, vec![0.0], vec![0.0])];

    let mut r = rng(808);
    for _ in 0..5 {
        let n = 6;
        let lambda: Vec<C64> = (0..n).map(|_| random_complex(&mut r, 2.0)).collect();
        // lines at the widest gaps of the sorted real and imaginary parts
        let lines_of = |vals: Vec<f64>| -> Vec<f64> {
            let mut sorted = vals;
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut gaps: Vec<(f64, f64)> = sorted
                .windows(2)
                .map(|w| (w[1] - w[0], (w[0] + w[1]) / 2.0))
                .collect();
            gaps.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            gaps.iter().take(2).filter(|g| g.0 > 0.1).map(|g| g.1).collect()
        };
        let xs = lines_of(lambda.iter().map(|e| e.re).collect());
        let ys = lines_of(lambda.iter().map(|e| e.im).collect());
        if xs.is_empty() || ys.is_empty() {
            continue;
        }
        cases.push((OperatorModel::diagonal(lambda), xs, ys));
    }
    assert!(cases.len() >= 5, "need enough line-family fixtures");

    for (t, xs, ys) in &cases {
        let n = t.dim();
        let spec = t.spectrum().unwrap();
        let (re_lo, re_hi, im_lo, im_hi) = spec.bounding_values();
        let mid = xs[0];
        let cover = CoverPair::new(
            Region::new(vec![RegionShape::rect(re_lo - 1.0, mid + 0.4, im_lo - 1.0, im_hi + 1.0)]),
            Region::new(vec![RegionShape::rect(mid - 0.4, re_hi + 1.0, im_lo - 1.0, im_hi + 1.0)]),
        );
        let rep = line_family_decompose(t, xs, ys, &cover, &cfg()).unwrap();
        assert!(
            rep.partition_defect <= 1e-7,
            "partition defect {:.3e}",
            rep.partition_defect
        );
        assert_eq!(rep.span_rank, n, "ran P₁ + ran P₂ must span");
    }
    println!("[PASS] criterion 8 — line-family decomposability on {} fixtures", cases.len());
}

/// Criterion 1 companion: the regular-path and touching-path projections
/// agree when no touching point is declared (cross-path comparison used
/// throughout the suite).
#[test]
fn plain_cut_and_riesz_agree_on_regular_cycles() {
    let mut r = rng(909);
    let m = random_dense(&mut r, 8, 2.0);
    let t = OperatorModel::dense(m);
    let spec = t.spectrum().unwrap();
    let (center, radius) = gap_circle(&spec.eigenvalues, 0.05).expect("gap");
    let cycle = circle_cycle(center, radius);
    let a = riesz_projection(&t, &cycle, &cfg()).unwrap();
    let b = plain_spectral_cut(&t, &cycle, &cfg()).unwrap();
    let d = a.matrix.distance(&b.matrix);
    assert!(d <= 1e-10, "cross-path distance {d:.3e}");
    // f = 1 reproduces the projection through the restricted calculus
    let dom = Region::new(vec![RegionShape::rect(-30.0, 30.0, -30.0, 30.0)]);
    let one = FunctionExpr::one(dom);
    let f1 = calculus_restrict(&t, &a, &one, &cfg()).unwrap();
    assert!(f1.matrix.distance(&a.matrix) <= 1e-10);
}
