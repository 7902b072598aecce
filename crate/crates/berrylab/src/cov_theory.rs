//! Semi-analytic covariance oracles for the boundary chaos functional:
//! exact finite-energy covariances of segment pairs, their tangential and
//! projection parts, the parallel-segment kernel, the leading-order
//! signed-length law, and the limit statistics that Monte Carlo output is
//! checked against (Wiener sheet, white noise, total disorder, and the
//! closed-form supremum law on the partition boundary).

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::geometry::{
    line_intersection, signed_length, OrientedSegment, Point, PolygonalChain, GEOM_TOL,
};
use crate::quad::{integrate_adaptive, integrate_tensor_adaptive, CumulativeIntegral};
use crate::special::{erfcx, j0, j01, j012, normal_cdf};
use crate::testfn::TestFunction;
use crate::{Error, Result};

/// Absolute accuracy target for exact covariance values.
const COV_TARGET: f64 = 1e-10;

/// Per-piece target when a pair is split into up to four common-origin pairs.
const PIECE_TARGET: f64 = COV_TARGET / 4.0;

/// Absolute accuracy target for the reduced one-dimensional terms.
const TERM_TARGET: f64 = 1e-10;

/// Absolute accuracy target for the parallel kernel.
const KERNEL_TARGET: f64 = 1e-11;

/// Initial per-axis panel budget for tensor quadratures; beyond this the
/// oscillation count makes the integral an accuracy failure, not a wait.
const MAX_TENSOR_PANELS: usize = 16_384;

/// Panel budget for one-dimensional quadratures, which stay cheap far longer.
const MAX_LINE_PANELS: usize = 2_000_000;

fn check_energy(energy: f64) -> Result<f64> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::Config(format!(
            "energy must be positive and finite, got {energy}"
        )));
    }
    Ok(2.0 * PI * energy.sqrt())
}

fn check_pair(lambda1: f64, lambda2: f64, theta: f64) -> Result<()> {
    if !(lambda1 > 0.0 && lambda1.is_finite() && lambda2 > 0.0 && lambda2.is_finite()) {
        return Err(Error::Config(format!(
            "segment lengths must be positive and finite, got {lambda1} and {lambda2}"
        )));
    }
    if !theta.is_finite() {
        return Err(Error::Config("segment angle must be finite".into()));
    }
    Ok(())
}

/// Initial panel count for oscillatory integrals: half a wavelength per
/// panel, so one Gauss-8 panel never sees more than a phase increment of pi.
fn oscillatory_panels(k: f64, len: f64) -> usize {
    ((k * len / PI).ceil() as usize).max(16)
}

fn checked_panels(k: f64, len: f64, cap: usize, context: &str) -> Result<usize> {
    let panels = oscillatory_panels(k, len);
    if panels > cap {
        return Err(Error::Accuracy {
            context: format!("{context}: {panels} initial panels exceed the budget of {cap}"),
            achieved: f64::INFINITY,
            target: COV_TARGET,
        });
    }
    Ok(panels)
}

/// Covariance density of the boundary functional at separation `z` for unit
/// normals `n1`, `n2`, up to the global 1/32 prefactor:
/// `(n1.n2) J0 J1 / tau - (n1.zhat)(n2.zhat) (J0 J2 + J1^2)` at `tau = k|z|`.
/// The first factor has a removable point at `tau = 0` where it equals
/// `J0 (J0 + J2) / 2`; the second carries an extra `tau^2` and is dropped
/// below the same cutoff.
fn psi_integrand(z: Point, n1: Point, n2: Point, k: f64) -> f64 {
    let rho2 = z.dot(z);
    let tau = k * rho2.sqrt();
    let (b0, b1, b2) = j012(tau);
    if tau < 1e-6 {
        return n1.dot(n2) * 0.5 * b0 * (b0 + b2);
    }
    let p = n1.dot(z) * n2.dot(z) / rho2;
    n1.dot(n2) * b0 * b1 / tau - p * (b0 * b2 + b1 * b1)
}

/// Odd antiderivative with `F'(v) = J0(v) J1(v) / v` and `F(0) = 0`:
/// `F(v) = v (J0^2 + J1^2) - J0 J1` evaluated at `|v|`, copied with the sign
/// of `v`.
fn bessel_pair_antiderivative(v: f64) -> f64 {
    let x = v.abs();
    let (b0, b1) = j01(x);
    let f = x * (b0 * b0 + b1 * b1) - b0 * b1;
    if v < 0.0 {
        -f
    } else {
        f
    }
}

/// Covariance of collinear segments with coordinate ranges `[0, l1]` and
/// `[c, d]` on a shared axis, both oriented along it. The inner integral is
/// the closed-form antiderivative, leaving one oscillatory 1-D integral.
fn cov_collinear(l1: f64, c: f64, d: f64, k: f64) -> Result<f64> {
    let panels = checked_panels(k, l1, MAX_LINE_PANELS, "collinear covariance")?;
    let (v, _) = integrate_adaptive(
        0.0,
        l1,
        panels,
        8,
        32.0 * k * COV_TARGET,
        6,
        "collinear covariance",
        |u| bessel_pair_antiderivative(k * (u - c)) - bessel_pair_antiderivative(k * (u - d)),
    )?;
    Ok(v / (32.0 * k))
}

/// Covariance by tensor quadrature of the covariance density in the world
/// frame; valid whenever the segments do not cross, so the density stays
/// smooth on the parameter rectangle.
fn cov_direct(s1: &OrientedSegment, s2: &OrientedSegment, k: f64) -> Result<f64> {
    let (o1, u1, n1) = (s1.origin(), s1.direction(), s1.normal());
    let (o2, u2, n2) = (s2.origin(), s2.direction(), s2.normal());
    let px = checked_panels(k, s1.len(), MAX_TENSOR_PANELS, "segment covariance")?;
    let py = checked_panels(k, s2.len(), MAX_TENSOR_PANELS, "segment covariance")?;
    let (v, _) = integrate_tensor_adaptive(
        (0.0, s1.len()),
        (0.0, s2.len()),
        (px, py),
        8,
        32.0 * COV_TARGET,
        4,
        "segment covariance",
        |t, s| psi_integrand(o1 + u1 * t - (o2 + u2 * s), n1, n2, k),
    )?;
    Ok(v / 32.0)
}

/// Covariance of two segments leaving a common origin with unit directions
/// `u1` and `u2`; each normal follows its direction by a quarter turn.
fn cov_common_origin(u1: Point, l1: f64, u2: Point, l2: f64, k: f64) -> Result<f64> {
    let n1 = Point::new(-u1.y, u1.x);
    let n2 = Point::new(-u2.y, u2.x);
    let px = checked_panels(k, l1, MAX_TENSOR_PANELS, "common-origin covariance")?;
    let py = checked_panels(k, l2, MAX_TENSOR_PANELS, "common-origin covariance")?;
    let (v, _) = integrate_tensor_adaptive(
        (0.0, l1),
        (0.0, l2),
        (px, py),
        8,
        32.0 * PIECE_TARGET,
        4,
        "common-origin covariance",
        |t, s| psi_integrand(u1 * t - u2 * s, n1, n2, k),
    )?;
    Ok(v / 32.0)
}

fn cov_parallel(s1: &OrientedSegment, s2: &OrientedSegment, k: f64) -> Result<f64> {
    let dtheta = s2.theta() - s1.theta();
    let sign = if dtheta.cos() > 0.0 { 1.0 } else { -1.0 };
    let aligned = if sign < 0.0 { s2.reversed() } else { *s2 };
    let off = (aligned.origin() - s1.origin()).rotated(-s1.theta());
    if off.y.abs() <= GEOM_TOL {
        Ok(sign * cov_collinear(s1.len(), off.x, off.x + aligned.len(), k)?)
    } else {
        cov_direct(s1, s2, k)
    }
}

/// Each segment is written as a difference of segments leaving the hub, so
/// the covariance becomes a signed sum of common-origin covariances. For a
/// coordinate `x` of an endpoint relative to the hub, the piece runs from the
/// hub toward that endpoint and enters with the sign of the orientation.
fn cov_split(s1: &OrientedSegment, s2: &OrientedSegment, hub: Point, k: f64) -> Result<f64> {
    let pieces = |seg: &OrientedSegment| {
        let a = seg.direction().dot(seg.origin() - hub);
        [(a + seg.len(), 1.0), (a, -1.0)]
    };
    let mut total = 0.0;
    for (x, sx) in pieces(s1) {
        if x.abs() <= GEOM_TOL {
            continue;
        }
        for (y, sy) in pieces(s2) {
            if y.abs() <= GEOM_TOL {
                continue;
            }
            let u1 = s1.direction() * x.signum();
            let u2 = s2.direction() * y.signum();
            total += sx * sy * cov_common_origin(u1, x.abs(), u2, y.abs(), k)?;
        }
    }
    Ok(total)
}

/// Exact covariance of the boundary functionals of two oriented segments at
/// the given energy, to an absolute accuracy near [`COV_TARGET`].
///
/// Parallel pairs rotate onto a shared axis: collinear ones integrate a
/// closed-form antiderivative and offset ones the full covariance density.
/// A non-parallel pair whose supporting lines cross within half a wavelength
/// of both segments is split at the crossing into common-origin pieces, which
/// keeps the density smooth on every quadrature domain; otherwise the pair is
/// integrated directly.
pub fn exact_cov_segments(s1: &OrientedSegment, s2: &OrientedSegment, energy: f64) -> Result<f64> {
    let k = check_energy(energy)?;
    match line_intersection(s1, s2) {
        None => cov_parallel(s1, s2, k),
        Some(hub) => {
            let margin = PI / k;
            let near = |seg: &OrientedSegment| {
                let a = seg.direction().dot(seg.origin() - hub);
                a <= margin && a + seg.len() >= -margin
            };
            if near(s1) && near(s2) {
                cov_split(s1, s2, hub, k)
            } else {
                cov_direct(s1, s2, k)
            }
        }
    }
}

/// Exact covariance of the boundary functionals of two polygonal chains: the
/// double sum of segment covariances.
pub fn exact_cov_chains(c1: &PolygonalChain, c2: &PolygonalChain, energy: f64) -> Result<f64> {
    let mut total = 0.0;
    for s in c1.segments() {
        for t in c2.segments() {
            total += exact_cov_segments(s, t, energy)?;
        }
    }
    Ok(total)
}

/// Stable evaluation of `1 - J0(x)^2`, which loses precision to cancellation
/// for small arguments.
fn one_minus_j0_sq(x: f64) -> f64 {
    if x < 1e-3 {
        let x2 = x * x;
        return 0.5 * x2 - 3.0 / 32.0 * x2 * x2;
    }
    let b0 = j0(x);
    1.0 - b0 * b0
}

/// Tangential part of the common-origin covariance for segments of lengths
/// `lambda1`, `lambda2` meeting at angle `theta`: the `cos theta`-weighted
/// double integral of `J0 J1 / tau`, reduced in polar coordinates to two 1-D
/// integrals split at `atan(lambda2 / lambda1)` with the inner radial
/// integral in closed form.
///
/// For `theta` within tolerance of 0 or pi the reduction degenerates; there
/// the projection part vanishes identically, so the collinear closed form is
/// the whole covariance and is returned instead.
pub fn a_term(lambda1: f64, lambda2: f64, theta: f64, energy: f64) -> Result<f64> {
    let k = check_energy(energy)?;
    check_pair(lambda1, lambda2, theta)?;
    if theta.sin().abs() <= GEOM_TOL {
        return if theta.cos() > 0.0 {
            cov_collinear(lambda1, 0.0, lambda2, k)
        } else {
            Ok(-cov_collinear(lambda1, -lambda2, 0.0, k)?)
        };
    }
    let ct = theta.cos();
    let alpha = (lambda2 / lambda1).atan();
    let panels = oscillatory_panels(k, lambda1 + lambda2);
    let (i1, _) = integrate_adaptive(
        0.0,
        alpha,
        panels,
        8,
        TERM_TARGET,
        6,
        "tangential term, lower branch",
        |phi| {
            let tu2 = k * k * (1.0 - (2.0 * phi).sin() * ct);
            one_minus_j0_sq(tu2.sqrt() * lambda1 / phi.cos()) / tu2
        },
    )?;
    let (i2, _) = integrate_adaptive(
        alpha,
        FRAC_PI_2,
        panels,
        8,
        TERM_TARGET,
        6,
        "tangential term, upper branch",
        |phi| {
            let tu2 = k * k * (1.0 - (2.0 * phi).sin() * ct);
            one_minus_j0_sq(tu2.sqrt() * lambda2 / phi.sin()) / tu2
        },
    )?;
    Ok(ct / 64.0 * (i1 + i2))
}

/// Projection part of the common-origin covariance: the `sin^2 theta`-
/// weighted double integral of `t s (J0 J2 + J1^2) / rho^2`, reduced in polar
/// coordinates with the radial integral looked up in a cumulative table of
/// `psi (J0 J2 + J1^2)(psi)`. Exactly zero for `theta` within tolerance of
/// 0 or pi.
pub fn b_term(lambda1: f64, lambda2: f64, theta: f64, energy: f64) -> Result<f64> {
    let k = check_energy(energy)?;
    check_pair(lambda1, lambda2, theta)?;
    let st = theta.sin();
    if st.abs() <= GEOM_TOL {
        return Ok(0.0);
    }
    let ct = theta.cos();
    let hyp2 = lambda1 * lambda1 + lambda2 * lambda2;
    let x_max = k * ((1.0 + ct.abs()) * hyp2).sqrt();
    let table = CumulativeIntegral::new(
        |psi| {
            let (b0, b1, b2) = j012(psi);
            psi * (b0 * b2 + b1 * b1)
        },
        x_max,
        0.35,
        8,
    );
    let alpha = (lambda2 / lambda1).atan();
    let panels = oscillatory_panels(k, lambda1 + lambda2);
    let (i1, _) = integrate_adaptive(
        0.0,
        alpha,
        panels,
        8,
        TERM_TARGET,
        6,
        "projection term, lower branch",
        |phi| {
            let (s, c) = phi.sin_cos();
            let w = 1.0 - 2.0 * s * c * ct;
            let tu = k * w.sqrt();
            s * c / (w * tu * tu) * table.query(tu * lambda1 / c)
        },
    )?;
    let (i2, _) = integrate_adaptive(
        alpha,
        FRAC_PI_2,
        panels,
        8,
        TERM_TARGET,
        6,
        "projection term, upper branch",
        |phi| {
            let (s, c) = phi.sin_cos();
            let w = 1.0 - 2.0 * s * c * ct;
            let tu = k * w.sqrt();
            s * c / (w * tu * tu) * table.query(tu * lambda2 / s)
        },
    )?;
    Ok(-(st * st) / 32.0 * (i1 + i2))
}

/// Averaged kernel of the parallel-segment covariance: the tangential part of
/// the covariance density at offset `gap`, integrated across the second
/// segment's range `[c, d]` as seen from coordinate `u` on the first. The
/// result is bounded by `d - c` for every input. At `gap = 0` the integral is
/// the closed-form antiderivative difference.
pub fn parallel_kernel(u: f64, gap: f64, c: f64, d: f64, energy: f64) -> Result<f64> {
    let k = check_energy(energy)?;
    if ![u, gap, c, d].iter().all(|v| v.is_finite()) {
        return Err(Error::Config(
            "parallel kernel arguments must be finite".into(),
        ));
    }
    if !(gap >= 0.0) || c >= d {
        return Err(Error::Config(format!(
            "parallel kernel needs gap >= 0 and c < d, got gap {gap}, c {c}, d {d}"
        )));
    }
    if gap <= GEOM_TOL {
        let v = bessel_pair_antiderivative(k * (u - c)) - bessel_pair_antiderivative(k * (u - d));
        return Ok(v / k);
    }
    let kl = k * gap;
    let (lo, hi) = (k * (u - d), k * (u - c));
    let panels = (((hi - lo) / PI).ceil() as usize).clamp(8, MAX_LINE_PANELS);
    let (v, _) = integrate_adaptive(lo, hi, panels, 8, k * KERNEL_TARGET, 6, "parallel kernel", |v| {
        let w = (v * v + kl * kl).sqrt();
        let (b0, b1) = j01(w);
        b0 * b1 / w
    })?;
    Ok(v / k)
}

/// Leading-order covariance of the boundary functionals of two chains: the
/// signed overlap length over `16 pi^2 sqrt(E)`.
pub fn asymptotic_cov(c1: &PolygonalChain, c2: &PolygonalChain, energy: f64) -> f64 {
    signed_length(c1, c2) / (16.0 * PI * PI * energy.sqrt())
}

/// Covariance of the standard Wiener sheet at parameters `t` and `s` in the
/// unit square: `min(t1, s1) min(t2, s2)`.
pub fn wiener_sheet_cov(t: Point, s: Point) -> f64 {
    t.x.min(s.x) * t.y.min(s.y)
}

/// Limit covariance of white-noise pairings against two test functions: their
/// inner product over the plane.
pub fn whitenoise_cov(phi_i: &TestFunction, phi_j: &TestFunction) -> f64 {
    phi_i.inner_product(phi_j)
}

/// Limit covariance matrix of the normalized boundary functionals of a chain
/// family, with a numeric positive-semidefiniteness certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DisorderSigma {
    pub matrix: Vec<Vec<f64>>,
    pub psd: bool,
    pub min_eigenvalue: f64,
}

/// Signed-length matrix `Sigma(i, j) = lambda(C_i, C_j)` of a chain family.
/// The smallest eigenvalue is certified against a tolerance proportional to
/// the largest diagonal entry; a violation is reported, never adjusted.
pub fn disorder_sigma(chains: &[PolygonalChain]) -> Result<DisorderSigma> {
    if chains.is_empty() {
        return Err(Error::Config(
            "disorder matrix needs at least one chain".into(),
        ));
    }
    let n = chains.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = signed_length(&chains[i], &chains[j]);
            matrix[i][j] = v;
            matrix[j][i] = v;
        }
    }
    let eigenvalues = symmetric_eigenvalues(matrix.clone());
    let scale = (0..n).map(|i| matrix[i][i].abs()).fold(1.0, f64::max);
    let min_eigenvalue = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DisorderSigma {
        matrix,
        psd: min_eigenvalue >= -1e-9 * scale,
        min_eigenvalue,
    })
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn symmetric_eigenvalues(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let n = m.len();
    for _ in 0..60 {
        let scale = (0..n)
            .map(|i| m[i][i].abs())
            .fold(f64::MIN_POSITIVE, f64::max);
        let off = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[p][q].abs())
            .fold(0.0, f64::max);
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let ratio = 0.5 * (m[q][q] - m[p][p]) / apq;
                let t = ratio.signum() / (ratio.abs() + (ratio * ratio + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (mrp, mrq) = (m[r][p], m[r][q]);
                    m[r][p] = c * mrp - s * mrq;
                    m[r][q] = s * mrp + c * mrq;
                }
                for r in 0..n {
                    let (mpr, mqr) = (m[p][r], m[q][r]);
                    m[p][r] = c * mpr - s * mqr;
                    m[q][r] = s * mpr + c * mqr;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Distribution function of the one-sided supremum of the limit sheet over
/// the boundary of the unit square:
/// `P(sup <= z) = 1 - 3 Phi(-z) + e^{4 z^2} Phi(-3 z)`.
///
/// The sheet vanishes on the two axes, and on the far edges it decomposes
/// into a shared corner Gaussian `xi` plus two independent Brownian bridges,
/// `t xi + b_i(t)`. Averaging the squared one-sided bridge crossing
/// probability `(1 - e^{-2 z (z - xi)})^2` over `xi <= z` yields exactly
/// this closed form; `sup_cdf_matches_the_bridge_representation` pins the
/// identity. The magnitude supremum obeys no formula of this kind.
///
/// The product `e^{4 z^2} Phi(-3 z)` is evaluated as
/// `erfcx(3 z / sqrt 2) e^{-z^2 / 2} / 2`, which stays finite for every `z`;
/// the result is clamped to `[0, 1]` against rounding at the endpoints.
pub fn boundary_sup_cdf(z: f64) -> Result<f64> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::Domain(format!(
            "supremum law needs finite z >= 0, got {z}"
        )));
    }
    let tail = 0.5 * (-0.5 * z * z).exp() * erfcx(3.0 * z / SQRT_2);
    let v = 1.0 - 3.0 * normal_cdf(-z) + tail;
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
    Ok(v.clamp(0.0, 1.0))
}

/// Declarative segment pair for covariance tables: the first segment runs
/// from the origin along the x axis, the second starts at `offset` raised by
/// `parallel_gap` and points at angle `theta`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentPairConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub theta: f64,
    #[serde(default)]
    pub offset: [f64; 2],
    #[serde(default)]
    pub parallel_gap: f64,
}

impl SegmentPairConfig {
    /// Materializes the oriented segment pair.
    pub fn segments(&self) -> Result<(OrientedSegment, OrientedSegment)> {
        check_pair(self.lambda1, self.lambda2, self.theta)?;
        if !(self.parallel_gap >= 0.0 && self.parallel_gap.is_finite()) {
            return Err(Error::Config(format!(
                "parallel gap must be nonnegative and finite, got {}",
                self.parallel_gap
            )));
        }
        if !(self.offset[0].is_finite() && self.offset[1].is_finite()) {
            return Err(Error::Config("segment offset must be finite".into()));
        }
        let s1 = OrientedSegment::new(Point::new(0.0, 0.0), 0.0, self.lambda1)?;
        let origin2 = Point::new(self.offset[0], self.offset[1] + self.parallel_gap);
        let s2 = OrientedSegment::new(origin2, self.theta, self.lambda2)?;
        Ok((s1, s2))
    }
}
