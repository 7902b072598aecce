//! Smooth compactly supported test functions for white-noise pairings.
//!
//! The family is a tensor product of scaled copies of the bump profile
//! `psi(u) = exp(1 - 1/(1 - u^2))` on `|u| < 1`, zero outside. Each member
//! is C-infinity with support exactly a closed axis-aligned rectangle, so
//! pairings against nodal length have well-defined integrals and mutual
//! inner products. Both are computed here to quadrature accuracy far below
//! statistical noise; the inner products feed the limiting covariance of
//! the pairing statistics.

use std::sync::OnceLock;

use crate::geometry::{Point, RectDomain};
use crate::quad::integrate_panels;
use crate::{Error, Result};

/// Bump profile `exp(1 - 1/(1 - u^2))` on `|u| < 1`, zero outside.
///
/// Normalized so the peak value is 1 at `u = 0`. The exponent diverges to
/// `-inf` at the support edge, so the expression underflows cleanly to 0
/// without overflow.
fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// Cached value of `integral of psi over [-1, 1]`.
///
/// 128 Gauss-Legendre panels of degree 24 on a fixed smooth integrand;
/// the result is accurate to full double precision (verified against a
/// doubled rule in the tests).
fn bump_profile_integral() -> f64 {
    static IPSI: OnceLock<f64> = OnceLock::new();
    *IPSI.get_or_init(|| integrate_panels(-1.0, 1.0, 128, 24, bump))
}

/// Fixed quadrature of a smooth function over `[a, b]`.
///
/// 64 panels of degree 24 are far past the convergence knee for the bump
/// products integrated here; tests cross-check against a doubled rule.
fn integrate_smooth(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    integrate_panels(a, b, 64, 24, f)
}

/// Tensor-product bump `amp * psi((x1-c1)/r1) * psi((x2-c2)/r2)`.
///
/// The support is the closed rectangle `[c - r, c + r]` per axis and must
/// lie inside the open unit square, strictly away from the boundary where
/// the partition field vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    amp: f64,
    center: [f64; 2],
    radius: [f64; 2],
}

impl TestFunction {
    /// Builds a bump with the given amplitude, center, and per-axis radii.
    ///
    /// Radii must be positive and finite; the closed support rectangle must
    /// lie inside the open unit square. A zero amplitude is allowed and
    /// yields the identically zero function.
    pub fn new(amp: f64, center: [f64; 2], radius: [f64; 2]) -> Result<Self> {
        if !amp.is_finite() {
            return Err(Error::Config(format!("non-finite amplitude {amp}")));
        }
        for d in 0..2 {
            if !center[d].is_finite() || !radius[d].is_finite() || radius[d] <= 0.0 {
                return Err(Error::Config(format!(
                    "invalid bump geometry: center {:?} radius {:?}",
                    center, radius
                )));
            }
            if center[d] - radius[d] <= 0.0 || center[d] + radius[d] >= 1.0 {
                return Err(Error::Domain(format!(
                    "bump support [{}, {}] leaves the open unit square on axis {d}",
                    center[d] - radius[d],
                    center[d] + radius[d],
                )));
            }
        }
        Ok(Self { amp, center, radius })
    }

    /// Peak amplitude (the value at the center).
    pub fn amplitude(&self) -> f64 {
        self.amp
    }

    /// Center of the support rectangle.
    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    /// Per-axis support half-widths.
    pub fn radius(&self) -> [f64; 2] {
        self.radius
    }

    /// Closed support rectangle.
    pub fn support(&self) -> RectDomain {
        RectDomain::new(
            self.center[0] - self.radius[0],
            self.center[0] + self.radius[0],
            self.center[1] - self.radius[1],
            self.center[1] + self.radius[1],
        )
        .expect("validated support rectangle")
    }

    /// Evaluates the function at a point.
    pub fn eval(&self, p: Point) -> f64 {
        self.amp
            * bump((p.x - self.center[0]) / self.radius[0])
            * bump((p.y - self.center[1]) / self.radius[1])
    }

    /// Integral over the plane (equivalently over the unit square).
    ///
    /// Separates as `amp * r1 * r2 * Ipsi^2` with `Ipsi` the profile
    /// integral; accurate to full double precision.
    pub fn integral(&self) -> f64 {
        let ipsi = bump_profile_integral();
        self.amp * self.radius[0] * self.radius[1] * ipsi * ipsi
    }

    /// L2 inner product with another member of the family.
    ///
    /// The product is again a tensor product, so the integral factors into
    /// two 1-D integrals over the per-axis support intersections. Disjoint
    /// supports give exactly zero.
    pub fn inner_product(&self, other: &TestFunction) -> f64 {
        let mut factors = [0.0; 2];
        for d in 0..2 {
            let lo = (self.center[d] - self.radius[d]).max(other.center[d] - other.radius[d]);
            let hi = (self.center[d] + self.radius[d]).min(other.center[d] + other.radius[d]);
            if hi <= lo {
                return 0.0;
            }
            let (ca, ra) = (self.center[d], self.radius[d]);
            let (cb, rb) = (other.center[d], other.radius[d]);
            factors[d] = integrate_smooth(lo, hi, |x| bump((x - ca) / ra) * bump((x - cb) / rb));
        }
        self.amp * other.amp * factors[0] * factors[1]
    }

    /// Fixed reference family used by the pairing experiments.
    ///
    /// Three unit-amplitude bumps: the first two overlap, the third is
    /// disjoint from the first and overlaps the second. `n` selects a
    /// prefix of the family and must be between 1 and 3.
    pub fn standard_family(n: usize) -> Result<Vec<TestFunction>> {
        if n == 0 || n > 3 {
            return Err(Error::Config(format!(
                "standard family has 3 members, requested {n}"
            )));
        }
        let specs: [([f64; 2], [f64; 2]); 3] = [
            ([0.30, 0.30], [0.25, 0.25]),
            ([0.45, 0.40], [0.25, 0.30]),
            ([0.75, 0.75], [0.18, 0.18]),
        ];
        specs[..n]
            .iter()
            .map(|&(center, radius)| TestFunction::new(1.0, center, radius))
            .collect()
    }
}
