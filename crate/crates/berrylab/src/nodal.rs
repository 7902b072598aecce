//! Nodal set extraction and nodal-length statistics.
//!
//! The zero set of a realization is extracted by marching squares on a grid
//! sized to the oscillation scale (wavelength `1/sqrt(E)`), with saddle cells
//! disambiguated by evaluating the field at the cell center, which is exact
//! and cheap for a finite plane-wave sum. Lengths restrict to rectangles by
//! exact segment clipping, so restriction is additive to floating-point
//! accuracy. On top of the raw lengths sit the cumulative dyadic grid of the
//! anchored-rectangle field, its centered normalization, boundary suprema,
//! and pairings against smooth test functions.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;

use crate::field::PlaneWaveField;
use crate::geometry::{snap_to_partition, Point, RectDomain};
use crate::testfn::TestFunction;
use crate::{Error, Result};

/// Hard cap on marching-squares cells per extraction.
const MAX_CELLS: u128 = 1_000_000_000;

/// Hard cap on cumulative-grid side length, `2^K + 1`.
const MAX_PARTITION_LEVEL: u32 = 12;

/// Expected nodal length `area * (pi / sqrt(2)) * sqrt(E)`.
pub fn mean_nodal_length(energy: f64, area: f64) -> f64 {
    area * PI / SQRT_2 * energy.sqrt()
}

/// Variance-stabilizing factor `sqrt(512 pi / ln E)` applied to centered
/// nodal lengths. Requires `ln E > 1` so the factor is finite and the
/// log-scale asymptotics are meaningful.
pub fn normalization_factor(energy: f64) -> Result<f64> {
    if !(energy.is_finite() && energy.ln() > 1.0) {
        return Err(Error::Normalization(format!(
            "normalization needs E > e, got E = {energy}"
        )));
    }
    Ok((512.0 * PI / energy.ln()).sqrt())
}

/// Default dyadic partition level, `max(3, floor((ln E)^(1/10)) + 2)`.
///
/// The theory only pins the growth order of the level, so the constants
/// here are a recorded choice; experiments echo the level they used.
pub fn default_partition_level(energy: f64) -> u32 {
    if energy <= 1.0 {
        return 3;
    }
    (energy.ln().powf(0.1).floor() as u32 + 2).max(3)
}

/// Marching grid over a rectangle: `nx * ny` cells of size `hx * hy`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rect: RectDomain,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl GridSpec {
    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }
}

/// One straight piece of the extracted zero set, confined to a single grid
/// cell with endpoints on the cell edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalSegment {
    /// Cell column and row.
    pub cell: [u32; 2],
    pub a: Point,
    pub b: Point,
}

impl NodalSegment {
    pub fn len(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn midpoint(&self) -> Point {
        Point::new(0.5 * (self.a.x + self.b.x), 0.5 * (self.a.y + self.b.y))
    }
}

/// Extracted zero set of one realization over a rectangle.
#[derive(Debug, Clone)]
pub struct NodalSet {
    grid: GridSpec,
    segments: Vec<NodalSegment>,
    total_length: f64,
    energy: f64,
    points_per_wavelength: u32,
}

impl NodalSet {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Segments sorted by cell id (row-major).
    pub fn segments(&self) -> &[NodalSegment] {
        &self.segments
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn points_per_wavelength(&self) -> u32 {
        self.points_per_wavelength
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// CSV export, one row per segment.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema_version=1\ncell_i,cell_j,x0,y0,x1,y1,len\n");
        for s in &self.segments {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                s.cell[0], s.cell[1], s.a.x, s.a.y, s.b.x, s.b.y, s.len()
            ));
        }
        out
    }
}

/// Crossing point on a cell edge between corner values of opposite sign,
/// by linear interpolation. `va` sits at coordinate `ca`, `vb` at `cb`.
fn cross(ca: f64, cb: f64, va: f64, vb: f64) -> f64 {
    ca + (cb - ca) * (va / (va - vb))
}

/// Marches one row of cells. Corner sign convention: positive means `v > 0`,
/// so exact zeros group with the negative side and never produce degenerate
/// double crossings.
fn march_row(
    field: &PlaneWaveField,
    grid: &GridSpec,
    values: &[f64],
    j: usize,
) -> Vec<NodalSegment> {
    let stride = grid.nx + 1;
    let y0 = grid.rect.c + j as f64 * grid.hy;
    let y1 = grid.rect.c + (j + 1) as f64 * grid.hy;
    let mut out = Vec::new();
    for i in 0..grid.nx {
        let v00 = values[j * stride + i];
        let v10 = values[j * stride + i + 1];
        let v01 = values[(j + 1) * stride + i];
        let v11 = values[(j + 1) * stride + i + 1];
        let case = (v00 > 0.0) as u8
            | ((v10 > 0.0) as u8) << 1
            | ((v11 > 0.0) as u8) << 2
            | ((v01 > 0.0) as u8) << 3;
        if case == 0 || case == 15 {
            continue;
        }
        let x0 = grid.rect.a + i as f64 * grid.hx;
        let x1 = grid.rect.a + (i + 1) as f64 * grid.hx;
        let bottom = || Point::new(cross(x0, x1, v00, v10), y0);
        let top = || Point::new(cross(x0, x1, v01, v11), y1);
        let left = || Point::new(x0, cross(y0, y1, v00, v01));
        let right = || Point::new(x1, cross(y0, y1, v10, v11));
        let pairs: &[(Point, Point)] = match case {
            1 | 14 => &[(bottom(), left())],
            2 | 13 => &[(bottom(), right())],
            4 | 11 => &[(right(), top())],
            8 | 7 => &[(top(), left())],
            3 | 12 => &[(left(), right())],
            6 | 9 => &[(bottom(), top())],
            // Saddles: the center value decides which diagonal the positive
            // set connects; the two arcs then hug the opposite corners.
            5 | 10 => {
                let center = field.value(Point::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)));
                if (center > 0.0) == (case == 5) {
                    &[(bottom(), right()), (top(), left())]
                } else {
                    &[(bottom(), left()), (right(), top())]
                }
            }
            _ => unreachable!("cases 0 and 15 are skipped above"),
        };
        for &(a, b) in pairs {
            if a != b {
                out.push(NodalSegment { cell: [i as u32, j as u32], a, b });
            }
        }
    }
    out
}

/// Extracts the zero set of `field` over `rect` by marching squares with
/// grid spacing at most `1 / (points_per_wavelength * sqrt(E))`.
pub fn extract_nodal(
    field: &PlaneWaveField,
    rect: &RectDomain,
    points_per_wavelength: u32,
) -> Result<NodalSet> {
    if points_per_wavelength < 4 {
        return Err(Error::Config(format!(
            "points_per_wavelength must be at least 4, got {points_per_wavelength}"
        )));
    }
    if rect.is_degenerate() {
        return Err(Error::Geometry(format!(
            "cannot grid the degenerate rectangle [{}, {}] x [{}, {}]",
            rect.a, rect.b, rect.c, rect.d
        )));
    }
    let h = 1.0 / (points_per_wavelength as f64 * field.energy().sqrt());
    let nx = (rect.width() / h).ceil() as usize;
    let ny = (rect.height() / h).ceil() as usize;
    if (nx as u128) * (ny as u128) > MAX_CELLS {
        return Err(Error::Resource(format!(
            "{nx} x {ny} marching cells exceed the {MAX_CELLS} cap"
        )));
    }
    let grid = GridSpec {
        rect: rect.clone(),
        nx,
        ny,
        hx: rect.width() / nx as f64,
        hy: rect.height() / ny as f64,
    };
    let values = field.value_grid(Point::new(rect.a, rect.c), grid.hx, grid.hy, nx, ny);
    let mut segments: Vec<NodalSegment> = (0..ny)
        .into_par_iter()
        .map(|j| march_row(field, &grid, &values, j))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    // Row-major order already holds; the sort pins the contract.
    segments.sort_by_key(|s| (s.cell[1], s.cell[0]));
    let total_length = segments.iter().map(NodalSegment::len).sum();
    Ok(NodalSet {
        grid,
        segments,
        total_length,
        energy: field.energy(),
        points_per_wavelength,
    })
}

/// Length of the part of segment `a -> b` inside `rect` (Liang-Barsky).
fn clipped_length(a: Point, b: Point, rect: &RectDomain) -> f64 {
    let d = b - a;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-d.x, a.x - rect.a),
        (d.x, rect.b - a.x),
        (-d.y, a.y - rect.c),
        (d.y, rect.d - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return 0.0;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t1 > t0 {
        (t1 - t0) * d.norm()
    } else {
        0.0
    }
}

/// Nodal length restricted to `rect`, which must lie inside the extraction
/// rectangle. Segments straddling the boundary are clipped exactly, so
/// lengths are additive over disjoint rectangles; a segment lying exactly on
/// a shared edge would be counted by both sides, but such alignments have
/// probability zero and do not occur for the deterministic test fields.
pub fn nodal_length(ns: &NodalSet, rect: &RectDomain) -> Result<f64> {
    let g = &ns.grid.rect;
    let tol = 1e-9;
    if rect.a < g.a - tol || rect.b > g.b + tol || rect.c < g.c - tol || rect.d > g.d + tol {
        return Err(Error::Domain(format!(
            "query rectangle [{}, {}] x [{}, {}] leaves the extraction rectangle",
            rect.a, rect.b, rect.c, rect.d
        )));
    }
    Ok(ns.segments.iter().map(|s| clipped_length(s.a, s.b, rect)).sum())
}

/// Nodal length per dyadic cell of the level-`k` partition of the unit
/// square. Each segment is split at the dyadic lines it crosses and every
/// piece is assigned by its midpoint; pieces lying exactly on a line go to
/// the right/upper cell, except on the outer edge where they fold back in,
/// so the cells tile the square without double counting.
fn dyadic_cell_lengths(segments: &[NodalSegment], n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut cell = vec![0.0; n * n];
    let mut ts: Vec<f64> = Vec::with_capacity(8);
    for seg in segments {
        let d = seg.b - seg.a;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        ts.clear();
        ts.push(0.0);
        for (start, delta) in [(seg.a.x, d.x), (seg.a.y, d.y)] {
            if delta != 0.0 {
                let (lo, hi) = if delta > 0.0 { (start, start + delta) } else { (start + delta, start) };
                let mut m = (lo * nf).floor() as i64 + 1;
                let m_hi = (hi * nf).floor() as i64;
                while m <= m_hi {
                    let t = (m as f64 / nf - start) / delta;
                    if t > 0.0 && t < 1.0 {
                        ts.push(t);
                    }
                    m += 1;
                }
            }
        }
        ts.push(1.0);
        ts.sort_by(f64::total_cmp);
        for w in 0..ts.len() - 1 {
            let (ta, tb) = (ts[w], ts[w + 1]);
            if tb <= ta {
                continue;
            }
            let mid = seg.a + d * (0.5 * (ta + tb));
            let ci = ((mid.x * nf).floor() as usize).min(n - 1);
            let cj = ((mid.y * nf).floor() as usize).min(n - 1);
            cell[ci * n + cj] += (tb - ta) * len;
        }
    }
    cell
}

/// Cumulative nodal length over anchored rectangles `[0, i1/2^k] x
/// [0, i2/2^k]`, with the normalization needed to turn raw lengths into the
/// centered, variance-stabilized partition field.
#[derive(Debug, Clone)]
pub struct CumulativeLengthGrid {
    k: u32,
    /// `(2^k + 1)^2` raw lengths, index `i1 * (2^k + 1) + i2`.
    values: Vec<f64>,
    energy: f64,
    /// Expected length per unit area, `(pi / sqrt(2)) sqrt(E)`.
    mean_density: f64,
    /// `sqrt(512 pi / ln E)`.
    factor: f64,
    points_per_wavelength: u32,
}

/// Builds the cumulative grid for one realization over the unit square.
pub fn partition_function(
    field: &PlaneWaveField,
    k: u32,
    points_per_wavelength: u32,
) -> Result<CumulativeLengthGrid> {
    let ns = extract_nodal(field, &RectDomain::unit(), points_per_wavelength)?;
    partition_from_nodal(&ns, k)
}

/// Same grid from an already extracted zero set, so one extraction can feed
/// both clipped-length statistics and the partition field.
pub fn partition_from_nodal(ns: &NodalSet, k: u32) -> Result<CumulativeLengthGrid> {
    if k < 1 {
        return Err(Error::Config("partition level must be at least 1".into()));
    }
    if k > MAX_PARTITION_LEVEL {
        return Err(Error::Resource(format!(
            "partition level {k} exceeds the cap {MAX_PARTITION_LEVEL}"
        )));
    }
    if ns.grid.rect != RectDomain::unit() {
        return Err(Error::Domain(
            "partition grid needs a zero set extracted over the unit square".into(),
        ));
    }
    let factor = normalization_factor(ns.energy())?;
    let n = 1usize << k;
    let cell = dyadic_cell_lengths(&ns.segments, n);
    // Prefix sums arranged so every increment is a nonnegative addition;
    // rounding is monotone, so grid monotonicity holds exactly.
    let side = n + 1;
    let mut values = vec![0.0; side * side];
    let mut rowpref = vec![0.0; side];
    for ci in 0..n {
        rowpref[0] = 0.0;
        for i2 in 0..n {
            rowpref[i2 + 1] = rowpref[i2] + cell[ci * n + i2];
        }
        for i2 in 0..side {
            values[(ci + 1) * side + i2] = values[ci * side + i2] + rowpref[i2];
        }
    }
    Ok(CumulativeLengthGrid {
        k,
        values,
        energy: ns.energy(),
        mean_density: mean_nodal_length(ns.energy(), 1.0),
        factor,
        points_per_wavelength: ns.points_per_wavelength(),
    })
}

impl CumulativeLengthGrid {
    pub fn level(&self) -> u32 {
        self.k
    }

    /// Grid points per side, `2^k + 1`.
    pub fn side(&self) -> usize {
        (1usize << self.k) + 1
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn points_per_wavelength(&self) -> u32 {
        self.points_per_wavelength
    }

    pub fn normalization_factor(&self) -> f64 {
        self.factor
    }

    pub fn mean_density(&self) -> f64 {
        self.mean_density
    }

    pub fn grid_point(&self, i1: usize, i2: usize) -> Point {
        let n = (self.side() - 1) as f64;
        Point::new(i1 as f64 / n, i2 as f64 / n)
    }

    /// Raw nodal length of `[0, i1/2^k] x [0, i2/2^k]`.
    pub fn raw_at(&self, i1: usize, i2: usize) -> f64 {
        self.values[i1 * self.side() + i2]
    }

    /// Centered and variance-stabilized value at a grid point.
    pub fn normalized_at(&self, i1: usize, i2: usize) -> f64 {
        let t = self.grid_point(i1, i2);
        self.factor * (self.raw_at(i1, i2) - t.x * t.y * self.mean_density)
    }

    /// Normalized field at `t`, snapped down to the dyadic grid
    /// (right-continuous step field).
    pub fn discretize(&self, t: Point) -> Result<f64> {
        let idx = snap_to_partition(t, self.k)?;
        Ok(self.normalized_at(idx.i[0] as usize, idx.i[1] as usize))
    }

    /// Grid indices on the boundary of the unit square.
    pub fn boundary_indices(&self) -> Vec<[usize; 2]> {
        let n = self.side() - 1;
        let mut out = Vec::with_capacity(4 * n);
        for i in 0..=n {
            for j in 0..=n {
                if i == 0 || j == 0 || i == n || j == n {
                    out.push([i, j]);
                }
            }
        }
        out
    }

    /// Maximum of the normalized field magnitude over boundary grid points.
    /// The field vanishes identically on the two axes, so the effective
    /// maximum runs over the top and right edges.
    pub fn boundary_sup(&self) -> f64 {
        self.boundary_indices()
            .into_iter()
            .map(|[i, j]| self.normalized_at(i, j).abs())
            .fold(0.0, f64::max)
    }

    /// CSV export, one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema_version=1\ni1,i2,raw,normalized\n");
        for i1 in 0..self.side() {
            for i2 in 0..self.side() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    i1,
                    i2,
                    self.raw_at(i1, i2),
                    self.normalized_at(i1, i2)
                ));
            }
        }
        out
    }
}

/// Pairing of the normalized nodal-length measure with a test function:
/// `factor * (sum over segments of phi(midpoint) * len - mean * integral)`.
/// The segment-midpoint rule converges with the grid; the integral side is
/// exact to quadrature accuracy.
pub fn pair_with_test_function(ns: &NodalSet, phi: &TestFunction, energy: f64) -> Result<f64> {
    let factor = normalization_factor(energy)?;
    let support = phi.support();
    let g = &ns.grid.rect;
    if support.a < g.a || support.b > g.b || support.c < g.c || support.d > g.d {
        return Err(Error::Domain(
            "test function support leaves the extraction rectangle".into(),
        ));
    }
    let measure: f64 = ns.segments.iter().map(|s| phi.eval(s.midpoint()) * s.len()).sum();
    Ok(factor * (measure - mean_nodal_length(energy, 1.0) * phi.integral()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PlaneWaveField;
    use std::f64::consts::FRAC_PI_2;

    /// `cos(8 pi x)`: 8 vertical nodal lines at x = (2m+1)/16, length 8.
    fn cosine_field() -> PlaneWaveField {
        PlaneWaveField::from_components(16.0, &[0.0], &[1.0], &[0.0]).unwrap()
    }

    /// `cos(8 pi x) + cos(8 pi y)`: two diagonal line families, length
    /// 8 sqrt(2), with saddle cells at every family intersection.
    fn diagonal_field() -> PlaneWaveField {
        PlaneWaveField::from_components(
            16.0,
            &[0.0, FRAC_PI_2],
            &[SQRT_2, SQRT_2],
            &[0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn cosine_field_length_is_eight() {
        let ns = extract_nodal(&cosine_field(), &RectDomain::unit(), 10).unwrap();
        let err10 = (ns.total_length() - 8.0).abs();
        assert!(err10 <= 0.04, "total {}", ns.total_length());
        let ns20 = extract_nodal(&cosine_field(), &RectDomain::unit(), 20).unwrap();
        let err20 = (ns20.total_length() - 8.0).abs();
        assert!(err20 <= err10 + 1e-12, "halving h should not hurt: {err10} -> {err20}");
    }

    #[test]
    fn diagonal_field_exercises_saddles() {
        let ns = extract_nodal(&diagonal_field(), &RectDomain::unit(), 10).unwrap();
        let exact = 8.0 * SQRT_2;
        assert!((ns.total_length() - exact).abs() <= 0.01 * exact, "total {}", ns.total_length());
        let ns20 = extract_nodal(&diagonal_field(), &RectDomain::unit(), 20).unwrap();
        assert!((ns20.total_length() - exact).abs() <= (ns.total_length() - exact).abs() + 1e-12);
    }

    #[test]
    fn segments_lie_in_their_cells() {
        let ns = extract_nodal(&diagonal_field(), &RectDomain::unit(), 10).unwrap();
        assert!(!ns.is_empty());
        for s in ns.segments() {
            let x0 = s.cell[0] as f64 * ns.grid().hx;
            let y0 = s.cell[1] as f64 * ns.grid().hy;
            let cell = RectDomain::new(x0, x0 + ns.grid().hx, y0, y0 + ns.grid().hy).unwrap();
            let tol = 1e-12;
            for p in [s.a, s.b] {
                assert!(
                    p.x >= cell.a - tol && p.x <= cell.b + tol && p.y >= cell.c - tol && p.y <= cell.d + tol
                );
                // Endpoints sit on cell edges.
                let on_edge = (p.x - cell.a).abs() <= tol
                    || (p.x - cell.b).abs() <= tol
                    || (p.y - cell.c).abs() <= tol
                    || (p.y - cell.d).abs() <= tol;
                assert!(on_edge);
            }
        }
    }

    #[test]
    fn segments_are_sorted_by_cell_id() {
        let ns = extract_nodal(&diagonal_field(), &RectDomain::unit(), 10).unwrap();
        let ids: Vec<(u32, u32)> = ns.segments().iter().map(|s| (s.cell[1], s.cell[0])).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn full_rectangle_returns_total_length() {
        let ns = extract_nodal(&cosine_field(), &RectDomain::unit(), 10).unwrap();
        let full = nodal_length(&ns, &RectDomain::unit()).unwrap();
        assert!((full - ns.total_length()).abs() < 1e-12);
    }

    #[test]
    fn half_rectangle_has_half_the_lines() {
        let ns = extract_nodal(&cosine_field(), &RectDomain::unit(), 10).unwrap();
        let left = nodal_length(&ns, &RectDomain::new(0.0, 0.5, 0.0, 1.0).unwrap()).unwrap();
        assert!((left - 4.0).abs() <= 0.02, "left half {left}");
    }

    #[test]
    fn disjoint_halves_sum_to_total() {
        let field = PlaneWaveField::sample(100.0, 256, 11, 0).unwrap();
        let ns = extract_nodal(&field, &RectDomain::unit(), 10).unwrap();
        let left = nodal_length(&ns, &RectDomain::new(0.0, 0.37, 0.0, 1.0).unwrap()).unwrap();
        let right = nodal_length(&ns, &RectDomain::new(0.37, 1.0, 0.0, 1.0).unwrap()).unwrap();
        assert!((left + right - ns.total_length()).abs() < 1e-9);
    }

    #[test]
    fn query_outside_grid_is_a_domain_error() {
        let ns = extract_nodal(&cosine_field(), &RectDomain::unit(), 10).unwrap();
        let r = RectDomain::new(-0.1, 0.5, 0.0, 1.0).unwrap();
        assert!(matches!(nodal_length(&ns, &r), Err(Error::Domain(_))));
    }

    #[test]
    fn sign_definite_field_yields_empty_set() {
        // Wavelength 100: the field is near 1 on the whole unit square.
        let f = PlaneWaveField::from_components(1e-4, &[0.0], &[1.0], &[0.0]).unwrap();
        let ns = extract_nodal(&f, &RectDomain::unit(), 10).unwrap();
        assert!(ns.is_empty());
        assert_eq!(ns.total_length(), 0.0);
    }

    #[test]
    fn guards_reject_bad_parameters() {
        let f = cosine_field();
        assert!(matches!(
            extract_nodal(&f, &RectDomain::unit(), 3),
            Err(Error::Config(_))
        ));
        let huge = PlaneWaveField::from_components(1e14, &[0.0], &[1.0], &[0.0]).unwrap();
        assert!(matches!(
            extract_nodal(&huge, &RectDomain::unit(), 4),
            Err(Error::Resource(_))
        ));
        assert!(matches!(partition_function(&f, 0, 10), Err(Error::Config(_))));
        assert!(matches!(partition_function(&f, 13, 10), Err(Error::Resource(_))));
        let low = PlaneWaveField::from_components(2.0, &[0.0], &[1.0], &[0.0]).unwrap();
        assert!(matches!(partition_function(&low, 3, 10), Err(Error::Normalization(_))));
    }

    #[test]
    fn resolution_convergence_within_one_percent() {
        let field = PlaneWaveField::sample(100.0, 256, 5, 0).unwrap();
        let l10 = extract_nodal(&field, &RectDomain::unit(), 10).unwrap().total_length();
        let l20 = extract_nodal(&field, &RectDomain::unit(), 20).unwrap().total_length();
        assert!((l10 - l20).abs() <= 0.01 * l20, "{l10} vs {l20}");
    }

    #[test]
    fn extraction_is_deterministic_across_thread_counts() {
        let field = PlaneWaveField::sample(100.0, 256, 7, 3).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| extract_nodal(&field, &RectDomain::unit(), 10).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.segments(), b.segments());
        assert_eq!(a.total_length(), b.total_length());
    }

    #[test]
    fn partition_grid_is_consistent_with_extraction() {
        let field = PlaneWaveField::sample(100.0, 256, 9, 1).unwrap();
        let ns = extract_nodal(&field, &RectDomain::unit(), 10).unwrap();
        let grid = partition_function(&field, 3, 10).unwrap();
        let n = grid.side() - 1;
        assert!((grid.raw_at(n, n) - ns.total_length()).abs() < 1e-9);
        // Zero on the axes.
        for i in 0..=n {
            assert_eq!(grid.raw_at(0, i), 0.0);
            assert_eq!(grid.raw_at(i, 0), 0.0);
        }
        // Exact monotonicity along rows and columns.
        for i1 in 0..=n {
            for i2 in 1..=n {
                assert!(grid.raw_at(i1, i2) >= grid.raw_at(i1, i2 - 1));
                assert!(grid.raw_at(i2, i1) >= grid.raw_at(i2 - 1, i1));
            }
        }
    }

    #[test]
    fn partition_grid_matches_clipped_lengths() {
        let field = PlaneWaveField::sample(100.0, 256, 13, 2).unwrap();
        let ns = extract_nodal(&field, &RectDomain::unit(), 10).unwrap();
        let grid = partition_function(&field, 2, 10).unwrap();
        for (i1, i2) in [(1usize, 1usize), (2, 3), (3, 2), (4, 4), (1, 4)] {
            let rect = RectDomain::anchored(i1 as f64 / 4.0, i2 as f64 / 4.0).unwrap();
            let direct = nodal_length(&ns, &rect).unwrap();
            assert!(
                (grid.raw_at(i1, i2) - direct).abs() < 1e-9,
                "({i1}, {i2}): {} vs {direct}",
                grid.raw_at(i1, i2)
            );
        }
    }

    #[test]
    fn discretize_snaps_down() {
        let field = PlaneWaveField::sample(100.0, 256, 9, 1).unwrap();
        let grid = partition_function(&field, 2, 10).unwrap();
        let on_grid = grid.discretize(Point::new(0.25, 0.5)).unwrap();
        assert_eq!(on_grid, grid.normalized_at(1, 2));
        let snapped = grid.discretize(Point::new(0.3, 0.7)).unwrap();
        assert_eq!(snapped, grid.normalized_at(1, 2));
        assert!(grid.discretize(Point::new(1.2, 0.5)).is_err());
    }

    #[test]
    fn boundary_sup_of_mean_exact_grid_is_zero() {
        let field = PlaneWaveField::sample(100.0, 256, 9, 1).unwrap();
        let mut grid = partition_function(&field, 2, 10).unwrap();
        let side = grid.side();
        // Overwrite raw values with the exact mean surface: the normalized
        // field is then identically zero.
        for i1 in 0..side {
            for i2 in 0..side {
                let t = grid.grid_point(i1, i2);
                grid.values[i1 * side + i2] = t.x * t.y * grid.mean_density;
            }
        }
        assert_eq!(grid.boundary_sup(), 0.0);
        // A spike on the top edge becomes the supremum.
        let t = grid.grid_point(2, side - 1);
        grid.values[2 * side + (side - 1)] = t.x * t.y * grid.mean_density + 0.5;
        assert!((grid.boundary_sup() - grid.normalization_factor() * 0.5).abs() < 1e-12);
    }

    #[test]
    fn pairing_matches_line_integral_oracle() {
        let phi = TestFunction::new(1.0, [0.5, 0.5], [0.3, 0.3]).unwrap();
        let ns = extract_nodal(&cosine_field(), &RectDomain::unit(), 20).unwrap();
        let e = 16.0;
        // The nodal set is 8 vertical lines; the measure side is the sum of
        // line integrals of phi, computed here by fine midpoint sums.
        let mut measure = 0.0;
        let nq = 20_000;
        for m in 0..8 {
            let x = (2.0 * m as f64 + 1.0) / 16.0;
            let h = 1.0 / nq as f64;
            measure += (0..nq)
                .map(|i| phi.eval(Point::new(x, (i as f64 + 0.5) * h)))
                .sum::<f64>()
                * h;
        }
        let oracle =
            normalization_factor(e).unwrap() * (measure - mean_nodal_length(e, 1.0) * phi.integral());
        let paired = pair_with_test_function(&ns, &phi, e).unwrap();
        assert!((paired - oracle).abs() < 0.02 * (1.0 + oracle.abs()), "{paired} vs {oracle}");
    }

    #[test]
    fn zero_test_function_pairs_to_zero() {
        let phi = TestFunction::new(0.0, [0.5, 0.5], [0.2, 0.2]).unwrap();
        let ns = extract_nodal(&cosine_field(), &RectDomain::unit(), 10).unwrap();
        assert_eq!(pair_with_test_function(&ns, &phi, 16.0).unwrap(), 0.0);
    }

    #[test]
    fn csv_exports_carry_schema_version() {
        let field = PlaneWaveField::sample(100.0, 256, 9, 1).unwrap();
        let ns = extract_nodal(&field, &RectDomain::unit(), 10).unwrap();
        assert!(ns.to_csv().starts_with("# schema_version=1\ncell_i,cell_j,"));
        let grid = partition_function(&field, 2, 10).unwrap();
        assert!(grid.to_csv().starts_with("# schema_version=1\ni1,i2,"));
    }

    #[test]
    fn default_level_grows_slowly() {
        assert_eq!(default_partition_level(100.0), 3);
        assert_eq!(default_partition_level(1e4), 3);
        assert_eq!(default_partition_level(1e40), 3);
    }
}
