//! Acceptance gate: one numbered check per verification item, each printing a
//! single PASS/FAIL line (visible with `--nocapture`; the harness name lines
//! carry the same verdicts). Checks a13, a14 and part of a06 reuse one shared
//! 2000-replication ensemble so the heavy extraction work happens once.

use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use berrylab::chaos2::{chaos2_domain, phi_boundary, phi_tilde, rescaled_chaos2};
use berrylab::cov_theory::{
    a_term, b_term, exact_cov_chains, exact_cov_segments, wiener_sheet_cov, whitenoise_cov,
};
use berrylab::field::{default_wave_count, PlaneWaveField};
use berrylab::geometry::{
    signed_length, OrientedSegment, Point, PolygonalChain, RectDomain,
};
use berrylab::montecarlo::{
    boundary_sup_report, replicate, run_experiment, summarize, sup_moment_scan, ExperimentConfig,
    ExperimentKind,
};
use berrylab::nodal::{
    extract_nodal, mean_nodal_length, nodal_length, normalization_factor, pair_with_test_function,
    partition_from_nodal,
};
use berrylab::testfn::TestFunction;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const PI: f64 = std::f64::consts::PI;

fn verdict(id: &str, label: &str, pass: bool, detail: String) {
    let word = if pass { "PASS" } else { "FAIL" };
    println!("[{id}] {word} {label} ({detail})");
    assert!(pass, "[{id}] {label}: {detail}");
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Standard error of one sample-covariance entry under joint normality.
fn cov_se(cii: f64, cjj: f64, cij: f64, n: usize) -> f64 {
    ((cii * cjj + cij * cij) / (n as f64 - 1.0)).sqrt()
}

fn base_config(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        energies: vec![],
        waves: None,
        points_per_wavelength: 10,
        partition_level: None,
        n_reps: 2,
        seed: 0,
        domains: vec![],
        chains: vec![],
        sheet_points: vec![],
        output: None,
        threads: 0,
    }
}

// Shared 2000-replication ensemble at E = 4096: one extraction per
// replication feeds the clipped lengths, the dyadic partition field at the
// three sheet points and the three test-function pairings.

const SHARED_ENERGY: f64 = 4096.0;
const SHARED_REPS: usize = 2000;
const SHARED_SEED: u64 = 20260814;
const SHEET_POINTS: [[f64; 2]; 3] = [[0.25, 0.5], [0.5, 1.0], [0.75, 0.75]];

/// Column layout: [len(unit), len(quarter), X(t1), X(t2), X(t3), P(f1), P(f2), P(f3)].
fn shared_rows() -> &'static Vec<Vec<f64>> {
    static CELL: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    CELL.get_or_init(|| {
        let bumps = TestFunction::standard_family(3).unwrap();
        let quarter = RectDomain::new(0.0, 0.5, 0.0, 0.5).unwrap();
        let m = default_wave_count(SHARED_ENERGY);
        replicate(SHARED_REPS, 0, |r| {
            let field = PlaneWaveField::sample(SHARED_ENERGY, m, SHARED_SEED, r)?;
            let ns = extract_nodal(&field, &RectDomain::unit(), 10)?;
            let grid = partition_from_nodal(&ns, 5)?;
            let mut row = vec![ns.total_length(), nodal_length(&ns, &quarter)?];
            for p in SHEET_POINTS {
                row.push(grid.discretize(Point::new(p[0], p[1]))?);
            }
            for phi in &bumps {
                row.push(pair_with_test_function(&ns, phi, SHARED_ENERGY)?);
            }
            Ok(row)
        })
        .unwrap()
    })
}

#[test]
fn a01_field_solves_helmholtz_pointwise() {
    let energy = 100.0;
    let field = PlaneWaveField::sample(energy, 256, 101, 0).unwrap();
    let h = 1e-4 / energy.sqrt();
    let k2 = 4.0 * PI * PI * energy;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let b = field.value(p);
        let lap = (field.value(Point::new(p.x + h, p.y))
            + field.value(Point::new(p.x - h, p.y))
            + field.value(Point::new(p.x, p.y + h))
            + field.value(Point::new(p.x, p.y - h))
            - 4.0 * b)
            / (h * h);
        let residual = (lap + k2 * b).abs() / (k2 * (1.0 + b.abs()));
        worst = worst.max(residual);
    }
    verdict(
        "a01",
        "Helmholtz residual at 100 random points",
        worst <= 1e-3,
        format!("max residual {worst:.3e} vs 1e-3"),
    );
}

#[test]
fn a02_pointwise_variance_is_unit() {
    let energy = 100.0;
    let points = [
        Point::new(0.2, 0.3),
        Point::new(0.55, 0.7),
        Point::new(0.9, 0.15),
    ];
    let rows = replicate(5000, 0, |r| {
        let field = PlaneWaveField::sample(energy, 256, 202, r)?;
        Ok(points.iter().map(|&p| field.value(p)).collect::<Vec<_>>())
    })
    .unwrap();
    let s = summarize(&rows).unwrap();
    let mut detail = String::new();
    let mut pass = true;
    for i in 0..points.len() {
        let gap = (s.variance[i] - 1.0).abs();
        let band = 3.0 * s.se_variance[i];
        pass &= gap <= band;
        detail.push_str(&format!("p{i}: |{:.4}-1| vs {:.4}; ", s.variance[i], band));
    }
    verdict("a02", "unit variance at 3 fixed points", pass, detail);
}

#[test]
fn a03_covariance_matches_bessel_kernel() {
    let energy = 100.0;
    let lags: Vec<Point> = (1..=20)
        .map(|l| Point::new(l as f64 * 0.027, l as f64 * 0.016))
        .collect();
    let rows = replicate(20000, 0, |r| {
        let field = PlaneWaveField::sample(energy, 256, 303, r)?;
        let mut row = vec![field.value(Point::new(0.0, 0.0))];
        row.extend(lags.iter().map(|&z| field.value(z)));
        Ok(row)
    })
    .unwrap();
    let s = summarize(&rows).unwrap();
    let mut worst = f64::NEG_INFINITY;
    let mut pass = true;
    for (l, z) in lags.iter().enumerate() {
        let target = berrylab::special::bessel_j(0, TWO_PI * energy.sqrt() * z.norm()).unwrap();
        let c = s.covariance[0][l + 1];
        let band = 3.0 * cov_se(s.covariance[0][0], s.covariance[l + 1][l + 1], c, rows.len())
            + 0.02;
        let excess = (c - target).abs() - band;
        worst = worst.max(excess);
        pass &= excess <= 0.0;
    }
    verdict(
        "a03",
        "covariance kernel on 20 lags",
        pass,
        format!("worst gap-band excess {worst:.3e} (<= 0 passes)"),
    );
}

#[test]
fn a04_deterministic_cosine_nodal_length() {
    // B(x) = cos(2 pi 4 x1): energy 16, one wave along e1, amplitude 1/sqrt(2)
    // against the sqrt(2/M) normalization. Eight vertical nodal lines.
    let inv = 1.0 / 2.0f64.sqrt();
    let field = PlaneWaveField::from_components(16.0, &[0.0], &[inv], &[0.0]).unwrap();
    let unit = RectDomain::unit();
    let coarse = extract_nodal(&field, &unit, 10).unwrap().total_length();
    let fine = extract_nodal(&field, &unit, 20).unwrap().total_length();
    let err_coarse = (coarse - 8.0).abs();
    let err_fine = (fine - 8.0).abs();
    verdict(
        "a04",
        "cosine field nodal length 8.0",
        err_coarse <= 0.04 && err_fine <= err_coarse + 1e-12,
        format!("len {coarse:.6} err {err_coarse:.2e}, halved h err {err_fine:.2e}"),
    );
}

#[test]
fn a05_mean_nodal_length_unit_square() {
    let energy = 100.0;
    let target = mean_nodal_length(energy, 1.0);
    // ppw 28: the marching jitter bias falls as ppw^-2 and must sit inside
    // the 3-stderr band, which 10 ppw does not achieve.
    let rows = replicate(500, 0, |r| {
        let field = PlaneWaveField::sample(energy, 256, 505, r)?;
        let ns = extract_nodal(&field, &RectDomain::unit(), 28)?;
        Ok(vec![ns.total_length()])
    })
    .unwrap();
    let s = summarize(&rows).unwrap();
    let gap = (s.mean[0] - target).abs();
    verdict(
        "a05",
        "mean nodal length vs pi/sqrt(2) sqrt(E)",
        gap <= 3.0 * s.se_mean[0] && gap <= 0.01 * target,
        format!(
            "mean {:.4} vs {target:.4}, gap {gap:.4} vs 3se {:.4}",
            s.mean[0],
            3.0 * s.se_mean[0]
        ),
    );
}

#[test]
fn a06_variance_scales_with_area() {
    // Part 1: overlapping 95% confidence intervals for Var/area at E = 1000.
    let energy = 1000.0;
    let factor = normalization_factor(energy).unwrap();
    let quarter = RectDomain::new(0.0, 0.5, 0.0, 0.5).unwrap();
    let m = default_wave_count(energy);
    let rows = replicate(2000, 0, |r| {
        let field = PlaneWaveField::sample(energy, m, 606, r)?;
        let ns = extract_nodal(&field, &RectDomain::unit(), 10)?;
        Ok(vec![ns.total_length(), nodal_length(&ns, &quarter)?])
    })
    .unwrap();
    let s = summarize(&rows).unwrap();
    let areas = [1.0, 0.25];
    let v: Vec<f64> = (0..2)
        .map(|i| factor * factor * s.variance[i] / areas[i])
        .collect();
    let half: Vec<f64> = (0..2)
        .map(|i| 1.96 * factor * factor * s.se_variance_jackknife[i] / areas[i])
        .collect();
    let overlap = (v[0] - half[0]).max(v[1] - half[1]) <= (v[0] + half[0]).min(v[1] + half[1]);

    // Part 2: the ratio band at E = 4096 from the shared ensemble; the
    // normalization factor cancels in the ratio.
    let shared = summarize(shared_rows()).unwrap();
    let ratio = (shared.variance[0] / 1.0) / (shared.variance[1] / 0.25);
    let in_band = (0.5..=1.5).contains(&ratio);
    verdict(
        "a06",
        "variance per area across domains",
        overlap && in_band,
        format!(
            "E=1000 CIs {:.3}+-{:.3} vs {:.3}+-{:.3}, E=4096 ratio {ratio:.3}",
            v[0], half[0], v[1], half[1]
        ),
    );
}

#[test]
fn a07_green_identity_boundary_vs_domain() {
    let energy = 500.0;
    let m = default_wave_count(energy);
    let rects = [
        RectDomain::unit(),
        RectDomain::new(0.0, 0.5, 0.0, 1.0).unwrap(),
        RectDomain::new(0.25, 0.75, 0.25, 0.75).unwrap(),
        RectDomain::new(0.1, 0.9, 0.2, 0.7).unwrap(),
        RectDomain::new(0.0, 0.3, 0.0, 0.3).unwrap(),
    ];
    let mut worst = 0.0f64;
    for r in 0..50 {
        let field = PlaneWaveField::sample(energy, m, 707, r).unwrap();
        for rect in &rects {
            let boundary = phi_boundary(&field, &rect.boundary_chain().unwrap()).raw;
            let domain = chaos2_domain(&field, rect).unwrap().raw;
            let rel = (boundary - domain).abs() / (1.0 + domain.abs());
            worst = worst.max(rel);
        }
    }
    verdict(
        "a07",
        "Green identity over 50 realizations x 5 rectangles",
        worst <= 1e-6,
        format!("max relative gap {worst:.3e} vs 1e-6"),
    );
}

#[test]
fn a08_second_chaos_variance_vs_exact_oracle() {
    let energy = 500.0;
    let seg = OrientedSegment::new(Point::new(0.0, 0.0), 0.0, 1.0).unwrap();
    let chain = PolygonalChain::new(vec![seg], false).unwrap();
    let exact = exact_cov_segments(&seg, &seg, energy).unwrap();
    let m = default_wave_count(energy);
    let rows = replicate(2000, 0, |r| {
        let field = PlaneWaveField::sample(energy, m, 808, r)?;
        Ok(vec![phi_boundary(&field, &chain).raw])
    })
    .unwrap();
    let s = summarize(&rows).unwrap();
    let gap = (s.variance[0] - exact).abs();
    let band = 3.0 * s.se_variance_jackknife[0];
    verdict(
        "a08",
        "sample Var(phi) vs exact quadrature",
        gap <= band,
        format!("var {:.6e} vs exact {exact:.6e}, gap/band {:.2}", s.variance[0], gap / band),
    );
}

#[test]
fn a09_asymptotic_variance_ratio() {
    let seg = OrientedSegment::new(Point::new(0.0, 0.0), 0.0, 1.0).unwrap();
    let energies: [f64; 4] = [1e2, 1e3, 1e4, 1e5];
    let ratios: Vec<f64> = energies
        .iter()
        .map(|&e| {
            16.0 * PI * PI * e.sqrt() * exact_cov_segments(&seg, &seg, e).unwrap() / seg.len()
        })
        .collect();
    let monotone = ratios
        .windows(2)
        .all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    let last_in_band = (0.9..=1.1).contains(&ratios[3]);
    verdict(
        "a09",
        "16 pi^2 sqrt(E) Var -> length",
        monotone && last_in_band,
        format!("ratios {ratios:.4?}"),
    );
}

#[test]
fn a10_exact_cov_splits_into_a_plus_b() {
    let energy = 100.0;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let l1 = rng.gen_range(0.2..1.4);
        let l2 = rng.gen_range(0.2..1.4);
        let theta = rng.gen_range(0.15..PI - 0.15);
        let base = rng.gen_range(0.0..TWO_PI);
        let origin = Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let s1 = OrientedSegment::new(origin, base, l1).unwrap();
        let s2 = OrientedSegment::new(origin, base + theta, l2).unwrap();
        let whole = exact_cov_segments(&s1, &s2, energy).unwrap();
        let split = a_term(l1, l2, theta, energy).unwrap() + b_term(l1, l2, theta, energy).unwrap();
        worst = worst.max((whole - split).abs());
    }
    verdict(
        "a10",
        "common-origin covariance decomposition",
        worst <= 1e-8,
        format!("max |exact - (a+b)| {worst:.3e} vs 1e-8"),
    );
}

#[test]
fn a11_term_decay_orders() {
    let energies = [1e2, 3.1623e2, 1e3, 3.1623e3, 1e4, 3.1623e4, 1e5];
    let mut log_e = Vec::new();
    let mut log_a = Vec::new();
    let mut b_scaled = Vec::new();
    for &e in &energies {
        let a = a_term(1.0, 1.0, PI / 2.0, e).unwrap();
        let b = b_term(1.0, 1.0, PI / 2.0, e).unwrap();
        log_e.push(e.ln());
        log_a.push(a.abs().ln());
        b_scaled.push(b.abs() * e / e.ln());
    }
    let (_, slope) = fit_line(&log_e, &log_a);
    let spread = b_scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        / b_scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    verdict(
        "a11",
        "a-term ~ E^-1, b-term ~ log E / E",
        (-1.2..=-0.8).contains(&slope) && spread <= 4.0,
        format!("slope {slope:.3}, |b| E/log E spread {spread:.2}"),
    );
}

#[test]
fn a12_total_disorder_covariance() {
    let energy: f64 = 1e4;
    let unit = RectDomain::anchored(1.0, 1.0).unwrap().boundary_chain().unwrap();
    let half = RectDomain::anchored(0.5, 1.0).unwrap().boundary_chain().unwrap();
    let diamond = {
        let pts = [
            Point::new(0.5, -0.2),
            Point::new(1.2, 0.5),
            Point::new(0.5, 1.2),
            Point::new(-0.2, 0.5),
        ];
        let segs = (0..4)
            .map(|i| OrientedSegment::from_endpoints(pts[i], pts[(i + 1) % 4]).unwrap())
            .collect();
        PolygonalChain::new(segs, true).unwrap()
    };

    let scale = 16.0 * PI * PI * energy.sqrt();
    let oracle = scale * exact_cov_chains(&unit, &half, energy).unwrap();
    let target = signed_length(&unit, &half);
    assert!(
        (oracle - 2.0).abs() <= 0.3 && (target - 2.0).abs() < 1e-12,
        "oracle pre-verification failed: quadrature {oracle:.4}, signed length {target:.4}"
    );

    // Wave count follows the largest chain extent so the discrete kernel
    // stays exact across the diamond.
    let m = default_wave_count(energy * 1.2 * 1.2);
    let chains = [unit, half, diamond];
    let rows = replicate(2000, 0, |r| {
        let field = PlaneWaveField::sample(energy, m, 1212, r)?;
        Ok(chains.iter().map(|c| phi_tilde(&field, c)).collect())
    })
    .unwrap();
    let s = summarize(&rows).unwrap();
    let anchored_pair = s.covariance[0][1];
    let crossing = [s.covariance[0][2], s.covariance[1][2]];
    verdict(
        "a12",
        "nested boundaries share signed length 2.0, crossing ones decouple",
        (anchored_pair - 2.0).abs() <= 0.3
            && crossing.iter().all(|c| c.abs() <= 0.2),
        format!(
            "cov(unit,half) {anchored_pair:.3} (oracle {oracle:.3}), crossings {:.3}, {:.3}",
            crossing[0], crossing[1]
        ),
    );
}

/// Empirical variance of `X(1,1)`, the scale the sheet and white-noise
/// statistics are studentized by: the finite-energy variance carries a
/// `1/log E` subleading constant (measured near 4 at E = 4096), so the
/// min-product and inner-product structure is the testable content here.
fn shared_length_scale(s: &berrylab::montecarlo::StatSummary) -> f64 {
    let factor = normalization_factor(SHARED_ENERGY).unwrap();
    factor * factor * s.variance[0]
}

#[test]
fn a13_partition_field_matches_wiener_sheet() {
    let s = summarize(shared_rows()).unwrap();
    let scale = shared_length_scale(&s);
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let t = Point::new(SHEET_POINTS[i][0], SHEET_POINTS[i][1]);
            let u = Point::new(SHEET_POINTS[j][0], SHEET_POINTS[j][1]);
            let target = wiener_sheet_cov(t, u);
            let gap = (s.covariance[2 + i][2 + j] / scale - target).abs();
            worst = worst.max(gap);
        }
    }
    verdict(
        "a13",
        "3x3 sheet covariance grid within 0.1",
        worst <= 0.1,
        format!("max |cov/scale - (t1^s1)(t2^s2)| {worst:.4}, scale {scale:.3}"),
    );
}

#[test]
fn a14_pairings_match_whitenoise_inner_products() {
    let bumps = TestFunction::standard_family(3).unwrap();
    let s = summarize(shared_rows()).unwrap();
    let scale = shared_length_scale(&s);
    let mut worst = 0.0f64;
    let mut pass = true;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let target = whitenoise_cov(&bumps[i], &bumps[j]);
            let norm = (whitenoise_cov(&bumps[i], &bumps[i])
                * whitenoise_cov(&bumps[j], &bumps[j]))
            .sqrt();
            let gap = (s.covariance[5 + i][5 + j] / scale - target).abs();
            worst = worst.max(gap / norm);
            pass &= gap <= 0.15 * norm;
        }
    }
    verdict(
        "a14",
        "bump pairings vs integral inner products",
        pass,
        format!("worst |gap|/norm {worst:.3} vs 0.15"),
    );
}

#[test]
#[ignore = "slow: roughly twelve hours single-threaded"]
fn a15_boundary_sup_cdf_explicit_law() {
    // The limit statement lets the partition level grow slowly with energy;
    // the runs below add one level per energy quadrupling. Coarser meshes at
    // a given energy sit further from the continuum supremum, so refining
    // the level together with the energy is what drives the gap down. 10 ppw
    // keeps the marching jitter at a few percent of the corner variance;
    // at 4 ppw the jitter dominates and distorts the supremum's shape.
    let run = |energy: f64, level: u32| {
        let mut cfg = base_config(ExperimentKind::SupDiscretized);
        cfg.energies = vec![energy];
        cfg.partition_level = Some(level);
        cfg.n_reps = 2000;
        cfg.seed = 1515;
        let art = run_experiment(&cfg).unwrap();
        boundary_sup_report(&art, &[0.5, 1.0, 1.5]).unwrap()
    };
    let lo = run(4096.0, 3);
    let hi = run(65536.0, 5);
    let gaps: Vec<f64> = hi
        .empirical
        .iter()
        .zip(&hi.limit)
        .map(|(e, l)| (e - l).abs())
        .collect();
    let within = gaps.iter().all(|g| *g <= 0.1);
    let improved = hi.max_abs_gap <= lo.max_abs_gap;
    verdict(
        "a15",
        "boundary sup CDF vs closed form",
        within && improved,
        format!(
            "E=65536 gaps {gaps:.4?} (max {:.4}), E=4096 max {:.4}",
            hi.max_abs_gap, lo.max_abs_gap
        ),
    );
}

#[test]
fn a16_sup_moment_sqrt_log_fit() {
    let mut cfg = base_config(ExperimentKind::SupMoment);
    cfg.energies = vec![1e2, 1e3, 1e4, 1e5];
    // Reads the field directly (no marching), so a coarse grid only shaves
    // a smooth deficit off every mean and leaves the growth fit alone.
    cfg.points_per_wavelength = 4;
    cfg.n_reps = 200;
    cfg.seed = 1616;
    let (_, fit) = sup_moment_scan(&cfg).unwrap();
    verdict(
        "a16",
        "mean sup grows like sqrt(log E)",
        fit.r_squared >= 0.98 && fit.strictly_increasing,
        format!(
            "R^2 {:.4}, slope {:.3}, means {:.3?}",
            fit.r_squared, fit.slope, fit.means
        ),
    );
}

#[test]
fn a17_rescaling_identity_variances_agree() {
    let energy: f64 = 100.0;
    let d = RectDomain::new(0.0, 0.5, 0.0, 0.5).unwrap();
    let r = TWO_PI * energy.sqrt();
    let chain = d.boundary_chain().unwrap();
    let m = default_wave_count(energy);
    let direct = replicate(2000, 0, |rep| {
        let field = PlaneWaveField::sample(energy, m, 1717, rep)?;
        Ok(vec![phi_boundary(&field, &chain).raw])
    })
    .unwrap();
    let blown = replicate(2000, 0, |rep| Ok(vec![rescaled_chaos2(&d, r, 2717, rep)?])).unwrap();
    let sd = summarize(&direct).unwrap();
    let sb = summarize(&blown).unwrap();
    let gap = (sd.variance[0] - sb.variance[0]).abs();
    let band = 3.0
        * (sd.se_variance_jackknife[0].powi(2) + sb.se_variance_jackknife[0].powi(2)).sqrt();
    verdict(
        "a17",
        "phi variance matches blown-up domain variance",
        gap <= band,
        format!(
            "direct {:.4e} vs rescaled {:.4e}, gap/band {:.2}",
            sd.variance[0], sb.variance[0], gap / band
        ),
    );
}

// Brute-force signed overlap: march midpoints of one chain's segments and
// count those lying on the other chain, signed by direction agreement.
fn brute_signed_length(c1: &PolygonalChain, c2: &PolygonalChain, h: f64) -> f64 {
    let dist_to_segment = |p: Point, s: &OrientedSegment| -> f64 {
        let d = s.direction();
        let vx = p.x - s.origin().x;
        let vy = p.y - s.origin().y;
        let t = (vx * d.x + vy * d.y).clamp(0.0, s.len());
        let cx = s.origin().x + t * d.x;
        let cy = s.origin().y + t * d.y;
        ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt()
    };
    let mut total = 0.0;
    for s in c1.segments() {
        for t in c2.segments() {
            let sign = if s.direction().dot(t.direction()) >= 0.0 { 1.0 } else { -1.0 };
            let steps = (t.len() / h).ceil() as usize;
            let step = t.len() / steps as f64;
            let mut hits = 0usize;
            for q in 0..steps {
                let p = t.point_at((q as f64 + 0.5) * step);
                if dist_to_segment(p, s) <= 1e-9 {
                    hits += 1;
                }
            }
            total += sign * step * hits as f64;
        }
    }
    total
}

#[test]
fn a18_signed_length_vs_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let mut worst = 0.0f64;
    let dyadic = |rng: &mut ChaCha8Rng| rng.gen_range(1..=8) as f64 / 8.0;

    let staircase = |rng: &mut ChaCha8Rng, start: Point, steps: usize| {
        let mut segs = Vec::new();
        let mut at = start;
        for _ in 0..steps {
            let theta = if rng.gen_bool(0.5) { 0.0 } else { PI / 2.0 };
            let s = OrientedSegment::new(at, theta, 0.125).unwrap();
            at = s.endpoint();
            segs.push(s);
        }
        PolygonalChain::new(segs, false).unwrap()
    };

    let mut pairs: Vec<(PolygonalChain, PolygonalChain)> = Vec::new();
    for _ in 0..40 {
        let c1 = RectDomain::anchored(dyadic(&mut rng), dyadic(&mut rng))
            .unwrap()
            .boundary_chain()
            .unwrap();
        let c2 = RectDomain::anchored(dyadic(&mut rng), dyadic(&mut rng))
            .unwrap()
            .boundary_chain()
            .unwrap();
        pairs.push((c1, c2));
    }
    for _ in 0..30 {
        let start = Point::new(dyadic(&mut rng) / 2.0, dyadic(&mut rng) / 2.0);
        let c1 = staircase(&mut rng, start, 6);
        // Share a sub-path of c1, then wander off; half the time reversed.
        let k = rng.gen_range(0..3);
        let mut segs: Vec<OrientedSegment> = c1.segments()[k..k + 3].to_vec();
        let tail = staircase(&mut rng, segs.last().unwrap().endpoint(), 3);
        segs.extend(tail.segments().iter().cloned());
        let c2 = PolygonalChain::new(segs, false).unwrap();
        let c2 = if rng.gen_bool(0.5) { c2.reversed() } else { c2 };
        pairs.push((c1, c2));
    }
    for _ in 0..30 {
        let origin = Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let alpha = rng.gen_range(0.0..TWO_PI);
        let l1 = rng.gen_range(0.3..1.2);
        let s1 = OrientedSegment::new(origin, alpha, l1).unwrap();
        let s2 = if rng.gen_bool(0.7) {
            // Collinear with a random overlap window, sometimes reversed.
            let u = rng.gen_range(-0.4..l1);
            let l2 = rng.gen_range(0.3..1.2);
            let d = s1.direction();
            let p = Point::new(origin.x + u * d.x, origin.y + u * d.y);
            if rng.gen_bool(0.5) {
                OrientedSegment::new(p, alpha, l2).unwrap()
            } else {
                let q = Point::new(p.x + l2 * d.x, p.y + l2 * d.y);
                OrientedSegment::new(q, alpha + PI, l2).unwrap()
            }
        } else {
            OrientedSegment::new(origin, alpha + PI / 2.0, rng.gen_range(0.3..1.2)).unwrap()
        };
        pairs.push((
            PolygonalChain::new(vec![s1], false).unwrap(),
            PolygonalChain::new(vec![s2], false).unwrap(),
        ));
    }

    for (c1, c2) in &pairs {
        let analytic = signed_length(c1, c2);
        let brute = brute_signed_length(c1, c2, 1e-5);
        worst = worst.max((analytic - brute).abs());
    }
    verdict(
        "a18",
        "signed length analytic vs marched overlap on 100 pairs",
        worst <= 1e-3,
        format!("max |analytic - brute| {worst:.3e} vs 1e-3"),
    );
}

#[test]
fn a19_raw_csv_identical_across_thread_counts() {
    let make = |threads: usize, kind: ExperimentKind| {
        let mut cfg = base_config(kind);
        cfg.energies = vec![256.0];
        cfg.n_reps = 8;
        cfg.seed = 1919;
        cfg.threads = threads;
        run_experiment(&cfg).unwrap().csv()
    };
    let nodal_same =
        make(1, ExperimentKind::NodalLength) == make(8, ExperimentKind::NodalLength);
    let chaos_same = make(1, ExperimentKind::Chaos2Cov) == make(8, ExperimentKind::Chaos2Cov);
    verdict(
        "a19",
        "byte-identical raw CSV for 1 and 8 threads",
        nodal_same && chaos_same,
        format!("nodal {nodal_same}, chaos {chaos_same}"),
    );
}
