//! Planar geometry: oriented segments, polygonal chains, rectangles, and the
//! signed overlap length that drives the long-range covariance structure.
//!
//! Orientation conventions. A segment at angle `theta` has direction
//! `(cos theta, sin theta)` and normal `(-sin theta, cos theta)`, the
//! direction rotated by +pi/2. Rectangle boundaries are traversed clockwise,
//! which makes that normal point outward.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Absolute tolerance for chaining endpoints and collinearity tests.
pub const GEOM_TOL: f64 = 1e-9;

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product; positive when `other` is
    /// counterclockwise of `self`.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// A directed straight segment of positive length.
#[derive(Debug, Clone, Copy)]
pub struct OrientedSegment {
    origin: Point,
    theta: f64,
    len: f64,
}

impl OrientedSegment {
    pub fn new(origin: Point, theta: f64, len: f64) -> Result<Self> {
        if !origin.is_finite() || !theta.is_finite() || !len.is_finite() {
            return Err(Error::Geometry("segment parameters must be finite".into()));
        }
        if len <= 0.0 {
            return Err(Error::Geometry(format!("segment length must be positive, got {len}")));
        }
        let theta = theta.rem_euclid(TAU);
        Ok(OrientedSegment { origin, theta, len })
    }

    pub fn from_endpoints(a: Point, b: Point) -> Result<Self> {
        let d = b - a;
        OrientedSegment::new(a, d.y.atan2(d.x), d.norm())
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn direction(&self) -> Point {
        let (s, c) = self.theta.sin_cos();
        Point::new(c, s)
    }

    /// Unit normal, the direction rotated by +pi/2.
    pub fn normal(&self) -> Point {
        let (s, c) = self.theta.sin_cos();
        Point::new(-s, c)
    }

    pub fn endpoint(&self) -> Point {
        self.point_at(self.len)
    }

    /// Point at arclength `s` from the origin.
    pub fn point_at(&self, s: f64) -> Point {
        self.origin + self.direction() * s
    }

    pub fn midpoint(&self) -> Point {
        self.point_at(0.5 * self.len)
    }

    /// Same set traversed the other way.
    pub fn reversed(&self) -> OrientedSegment {
        OrientedSegment {
            origin: self.endpoint(),
            theta: (self.theta + PI).rem_euclid(TAU),
            len: self.len,
        }
    }
}

/// Intersection of the supporting lines, if the segments are not parallel.
pub fn line_intersection(s: &OrientedSegment, t: &OrientedSegment) -> Option<Point> {
    let ds = s.direction();
    let dt = t.direction();
    let denom = ds.cross(dt);
    if denom.abs() <= GEOM_TOL {
        return None;
    }
    let w = t.origin() - s.origin();
    let a = w.cross(dt) / denom;
    Some(s.origin() + ds * a)
}

/// Signed overlap length of two segments: the length of their common
/// collinear part, weighted by the sign of the inner product of their
/// normals (+1 parallel, -1 antiparallel). Zero unless both directions agree
/// modulo pi within [`GEOM_TOL`] and the supporting lines coincide within
/// [`GEOM_TOL`].
pub fn segment_signed_overlap(s: &OrientedSegment, t: &OrientedSegment) -> f64 {
    let dtheta = s.theta() - t.theta();
    if dtheta.sin().abs() > GEOM_TOL {
        return 0.0;
    }
    let ds = s.direction();
    let line_dist = |p: Point| ds.cross(p - s.origin()).abs();
    if line_dist(t.origin()) > GEOM_TOL || line_dist(t.endpoint()) > GEOM_TOL {
        return 0.0;
    }
    let u0 = ds.dot(t.origin() - s.origin());
    let u1 = ds.dot(t.endpoint() - s.origin());
    let lo = u0.min(u1).max(0.0);
    let hi = u0.max(u1).min(s.len());
    let overlap = hi - lo;
    if overlap <= 0.0 {
        return 0.0;
    }
    if dtheta.cos() > 0.0 {
        overlap
    } else {
        -overlap
    }
}

/// Connected sequence of segments; consecutive endpoints must coincide
/// within [`GEOM_TOL`], and a closed chain must return to its start.
#[derive(Debug, Clone)]
pub struct PolygonalChain {
    segments: Vec<OrientedSegment>,
    closed: bool,
}

impl PolygonalChain {
    pub fn new(segments: Vec<OrientedSegment>, closed: bool) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Geometry("chain must contain at least one segment".into()));
        }
        for (k, pair) in segments.windows(2).enumerate() {
            let gap = pair[0].endpoint().dist(pair[1].origin());
            if gap > GEOM_TOL {
                return Err(Error::Geometry(format!(
                    "chain broken between segments {k} and {}: gap {gap:.3e}",
                    k + 1
                )));
            }
        }
        if closed {
            let gap = segments.last().unwrap().endpoint().dist(segments[0].origin());
            if gap > GEOM_TOL {
                return Err(Error::Geometry(format!("closed chain does not return to start: gap {gap:.3e}")));
            }
        }
        Ok(PolygonalChain { segments, closed })
    }

    pub fn segments(&self) -> &[OrientedSegment] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.len()).sum()
    }

    /// Same point set traversed in the opposite direction.
    pub fn reversed(&self) -> PolygonalChain {
        let segments = self.segments.iter().rev().map(|s| s.reversed()).collect();
        PolygonalChain { segments, closed: self.closed }
    }

    /// Advisory self-intersection scan. Proper crossings between
    /// non-adjacent segments are reported, not rejected: downstream
    /// quantities stay well defined, the geometric interpretation just gets
    /// harder to state.
    pub fn simplicity_warnings(&self) -> Vec<String> {
        let n = self.segments.len();
        let mut warnings = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (self.closed && i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = (&self.segments[i], &self.segments[j]);
                if let Some(p) = line_intersection(a, b) {
                    let sa = a.direction().dot(p - a.origin());
                    let sb = b.direction().dot(p - b.origin());
                    let interior = |s: f64, len: f64| s > GEOM_TOL && s < len - GEOM_TOL;
                    if interior(sa, a.len()) && interior(sb, b.len()) {
                        warnings.push(format!(
                            "segments {i} and {j} cross at ({:.6}, {:.6})",
                            p.x, p.y
                        ));
                    }
                }
            }
        }
        warnings
    }
}

/// Total signed overlap length of two chains: the sum of
/// [`segment_signed_overlap`] over all segment pairs.
pub fn signed_length(c1: &PolygonalChain, c2: &PolygonalChain) -> f64 {
    let mut total = 0.0;
    for s in c1.segments() {
        for t in c2.segments() {
            total += segment_signed_overlap(s, t);
        }
    }
    total
}

/// Axis-aligned rectangle `[a, b] x [c, d]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectDomain {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RectDomain {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::Geometry("rectangle bounds must be finite".into()));
        }
        if a > b || c > d {
            return Err(Error::Geometry(format!("empty rectangle [{a}, {b}] x [{c}, {d}]")));
        }
        Ok(RectDomain { a, b, c, d })
    }

    /// `[0, t1] x [0, t2]`, anchored at the origin.
    pub fn anchored(t1: f64, t2: f64) -> Result<Self> {
        RectDomain::new(0.0, t1, 0.0, t2)
    }

    pub fn unit() -> Self {
        RectDomain { a: 0.0, b: 1.0, c: 0.0, d: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn height(&self) -> f64 {
        self.d - self.c
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    pub fn is_degenerate(&self) -> bool {
        self.width() == 0.0 || self.height() == 0.0
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.a && p.x <= self.b && p.y >= self.c && p.y <= self.d
    }

    /// Clockwise boundary starting at the lower-left corner: up the left
    /// edge, right along the top, down the right edge, left along the
    /// bottom. The +pi/2 normal of each segment then points outward.
    pub fn boundary_chain(&self) -> Result<PolygonalChain> {
        if self.is_degenerate() {
            return Err(Error::Geometry(format!(
                "degenerate rectangle [{}, {}] x [{}, {}] has no boundary chain",
                self.a, self.b, self.c, self.d
            )));
        }
        let segs = vec![
            OrientedSegment::new(Point::new(self.a, self.c), FRAC_PI_2, self.height())?,
            OrientedSegment::new(Point::new(self.a, self.d), 0.0, self.width())?,
            OrientedSegment::new(Point::new(self.b, self.d), 1.5 * PI, self.height())?,
            OrientedSegment::new(Point::new(self.b, self.c), PI, self.width())?,
        ];
        PolygonalChain::new(segs, true)
    }
}

/// Dyadic grid point `(i1, i2) / 2^k` of the level-`k` partition of the
/// unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionIndex {
    pub k: u32,
    pub i: [u64; 2],
}

impl PartitionIndex {
    pub fn point(&self) -> Point {
        let scale = (2u64 << (self.k - 1).min(62)) as f64;
        let scale = if self.k == 0 { 1.0 } else { scale };
        Point::new(self.i[0] as f64 / scale, self.i[1] as f64 / scale)
    }
}

/// Largest level-`k` dyadic grid point dominated by `t`, coordinatewise.
/// `t` must lie in the closed unit square.
pub fn snap_to_partition(t: Point, k: u32) -> Result<PartitionIndex> {
    if k == 0 || k > 52 {
        return Err(Error::Config(format!("partition level must be in 1..=52, got {k}")));
    }
    let n = 1u64 << k;
    let snap1 = |v: f64| -> Result<u64> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("partition point {v} outside [0, 1]")));
        }
        Ok(((v * n as f64).floor() as u64).min(n))
    };
    Ok(PartitionIndex { k, i: [snap1(t.x)?, snap1(t.y)?] })
}

/// JSON form of a single segment: `{"p": [x, y], "theta": r, "len": l}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub p: [f64; 2],
    pub theta: f64,
    pub len: f64,
}

/// JSON form of a chain: either an explicit segment list or the
/// rectangle-boundary shorthand `{"rect": [t1, t2]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChainSpec {
    Rect { rect: [f64; 2] },
    Segments {
        segments: Vec<SegmentSpec>,
        #[serde(default)]
        closed: bool,
    },
}

impl ChainSpec {
    pub fn build(&self) -> Result<PolygonalChain> {
        match self {
            ChainSpec::Rect { rect } => RectDomain::anchored(rect[0], rect[1])?.boundary_chain(),
            ChainSpec::Segments { segments, closed } => {
                let segs = segments
                    .iter()
                    .map(|s| OrientedSegment::new(Point::new(s.p[0], s.p[1]), s.theta, s.len))
                    .collect::<Result<Vec<_>>>()?;
                PolygonalChain::new(segs, *closed)
            }
        }
    }
}

impl PolygonalChain {
    pub fn to_spec(&self) -> ChainSpec {
        ChainSpec::Segments {
            segments: self
                .segments
                .iter()
                .map(|s| SegmentSpec {
                    p: [s.origin().x, s.origin().y],
                    theta: s.theta(),
                    len: s.len(),
                })
                .collect(),
            closed: self.closed,
        }
    }
}

/// Geometry diagnostics: named checks with pass flags.
pub fn selfcheck() -> Vec<(String, bool)> {
    let mut out = Vec::new();

    // Rotation is an isometry.
    let p = Point::new(0.6, 0.8);
    let r = (p.rotated(1.1).norm() - 1.0).abs();
    out.push((format!("rotation_isometry (dev {r:.2e})"), r < 1e-14));

    // The unit boundary chain closes, has perimeter 4 and winds clockwise,
    // so every outward normal points away from the rectangle.
    match RectDomain::unit().boundary_chain() {
        Ok(chain) => {
            let len_ok = (chain.total_length() - 4.0).abs() < 1e-12;
            out.push((format!("boundary_chain_closure (closed {})", chain.is_closed()), chain.is_closed() && len_ok));
            let center = Point::new(0.5, 0.5);
            let outward = chain
                .segments()
                .iter()
                .all(|s| s.normal().dot(s.midpoint() - center) > 0.0);
            out.push(("boundary_normals_outward".into(), outward));
        }
        Err(e) => out.push((format!("boundary_chain_closure ({e})"), false)),
    }

    // Signed overlap of nested anchored boundaries, both orders.
    let sl = (|| -> Result<(f64, f64, f64)> {
        let c1 = RectDomain::anchored(1.0, 1.0)?.boundary_chain()?;
        let c2 = RectDomain::anchored(0.5, 1.0)?.boundary_chain()?;
        Ok((signed_length(&c1, &c2), signed_length(&c2, &c1), signed_length(&c1, &c1)))
    })();
    match sl {
        Ok((a, b, diag)) => {
            out.push((format!("signed_length_nested (got {a:.12})"), (a - 2.0).abs() < 1e-12));
            out.push((format!("signed_length_symmetric (gap {:.2e})", (a - b).abs()), (a - b).abs() < 1e-12));
            out.push((format!("signed_length_diagonal (got {diag:.12})"), (diag - 4.0).abs() < 1e-12));
        }
        Err(e) => out.push((format!("signed_length_nested ({e})"), false)),
    }

    // Crossing segments meet where expected; parallel ones do not meet.
    let cross = (|| -> Result<Option<Point>> {
        let s = OrientedSegment::new(Point::new(0.0, 0.0), 0.0, 1.0)?;
        let t = OrientedSegment::new(Point::new(0.5, -1.0), std::f64::consts::FRAC_PI_2, 2.0)?;
        Ok(line_intersection(&s, &t))
    })();
    let hub_ok = matches!(cross, Ok(Some(p)) if p.dist(Point::new(0.5, 0.0)) < 1e-12);
    out.push(("line_intersection_hub".into(), hub_ok));
    let par = (|| -> Result<bool> {
        let s = OrientedSegment::new(Point::new(0.0, 0.0), 0.3, 1.0)?;
        let t = OrientedSegment::new(Point::new(0.0, 1.0), 0.3, 1.0)?;
        Ok(line_intersection(&s, &t).is_none())
    })();
    out.push(("line_intersection_parallel_none".into(), matches!(par, Ok(true))));

    // Dyadic snap is the coordinatewise floor.
    let snap = snap_to_partition(Point::new(0.3, 0.71), 2);
    let snap_ok = matches!(&snap, Ok(idx) if idx.i == [1, 2] && idx.point().dist(Point::new(0.25, 0.5)) < 1e-15);
    out.push(("snap_to_partition_floor".into(), snap_ok));

    out
}
