//! Second-chaos functionals of a realization: the boundary line integral
//! over oriented chains, the domain form over rectangles, their
//! normalizations, and the large-domain rescaling onto the canonical
//! wavenumber-one field.
//!
//! The two forms are related by the divergence theorem, which is exact for
//! exact eigenfunctions: a clockwise rectangle boundary carries the outward
//! normal, and the boundary integral then equals the domain form with a
//! plus sign. Integrands oscillate at frequency `2 pi sqrt(E)`, so node
//! counts scale with `sqrt(E)` times the segment or side length.

use std::f64::consts::PI;

use crate::field::PlaneWaveField;
use crate::geometry::{PolygonalChain, RectDomain};
use crate::nodal::normalization_factor;
use crate::quad::gauss_rule;
use crate::{Error, Result};

/// Cap on tensor-quadrature panels per side in the domain form.
const MAX_PANELS: usize = 8192;

/// One evaluated second-chaos functional with its normalization.
#[derive(Debug, Clone)]
pub struct ChaosSample {
    /// The plain functional value.
    pub raw: f64,
    /// `raw * factor`, exactly.
    pub normalized: f64,
    /// Declared normalization factor.
    pub factor: f64,
    /// JSON description of the chain or rectangle the sample was taken on.
    pub descriptor: String,
    /// Quadrature nodes used, per segment (boundary form) or per axis
    /// (domain form).
    pub nodes: Vec<usize>,
}

/// Normalization `4 pi E^(1/4)` for boundary samples. Written with nested
/// square roots so dyadic energies normalize exactly.
pub fn boundary_factor(energy: f64) -> f64 {
    4.0 * PI * energy.sqrt().sqrt()
}

/// Gauss node count for one segment of length `len`: ten nodes per
/// wavelength, never fewer than 20.
fn segment_nodes(energy: f64, len: f64) -> usize {
    ((10.0 * energy.sqrt() * len).ceil() as usize).max(20)
}

/// Line integral of `B * <grad B, n>` over one oriented segment.
fn segment_flux(field: &PlaneWaveField, seg: &crate::geometry::OrientedSegment, nodes: usize) -> f64 {
    let rule = gauss_rule(nodes);
    let n = seg.normal();
    let half = 0.5 * seg.len();
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let ev = field.eval(seg.point_at(half * (x + 1.0)));
        acc += w * ev.value * (ev.gradient.x * n.x + ev.gradient.y * n.y);
    }
    acc * half
}

/// Boundary-form second-chaos functional
/// `(1 / (8 pi sqrt(2 E))) * sum_k integral of B <grad B, n_k>` over the
/// chain, with `refine` multiplying the per-segment node counts.
pub fn phi_boundary_refined(
    field: &PlaneWaveField,
    chain: &PolygonalChain,
    refine: usize,
) -> ChaosSample {
    let energy = field.energy();
    let prefactor = 1.0 / (8.0 * PI * (2.0 * energy).sqrt());
    let mut raw = 0.0;
    let mut nodes = Vec::with_capacity(chain.segments().len());
    for seg in chain.segments() {
        let n = segment_nodes(energy, seg.len()) * refine.max(1);
        nodes.push(n);
        raw += segment_flux(field, seg, n);
    }
    raw *= prefactor;
    let factor = boundary_factor(energy);
    ChaosSample {
        raw,
        normalized: raw * factor,
        factor,
        descriptor: serde_json::to_string(&chain.to_spec()).expect("chain spec serializes"),
        nodes,
    }
}

/// Boundary-form functional at the default node counts.
pub fn phi_boundary(field: &PlaneWaveField, chain: &PolygonalChain) -> ChaosSample {
    phi_boundary_refined(field, chain, 1)
}

/// Normalized boundary functional `4 pi E^(1/4) * phi`.
pub fn phi_tilde(field: &PlaneWaveField, chain: &PolygonalChain) -> f64 {
    phi_boundary(field, chain).normalized
}

/// Per-axis Gauss nodes and weights for `panels` equal panels of order 16
/// over `[a, b]`.
fn panel_axis(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_rule(16);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * rule.nodes.len());
    let mut ws = Vec::with_capacity(xs.capacity());
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(mid + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Domain-form value `(pi sqrt(2 E) / 8) * [-2 int B^2 + int |grad~ B|^2]`
/// over a rectangle, by tensor Gauss quadrature with about `sqrt(E)` panels
/// per unit side. Degenerate rectangles integrate to zero.
pub fn chaos2_domain_raw(
    field: &PlaneWaveField,
    d: &RectDomain,
    refine: usize,
) -> Result<(f64, [usize; 2])> {
    if d.is_degenerate() {
        return Ok((0.0, [0, 0]));
    }
    let energy = field.energy();
    let sq = energy.sqrt();
    let panels = |side: f64| ((side * sq).ceil() as usize).max(1) * refine.max(1);
    let (px, py) = (panels(d.width()), panels(d.height()));
    if px > MAX_PANELS || py > MAX_PANELS {
        return Err(Error::Resource(format!(
            "{px} x {py} quadrature panels exceed the {MAX_PANELS} cap"
        )));
    }
    let (xs, wx) = panel_axis(d.a, d.b, px);
    let (ys, wy) = panel_axis(d.c, d.d, py);
    let tensor = field.eval_on_tensor(&xs, &ys);
    let scale = field.gradient_normalization();
    let mut integral = 0.0;
    for (i, wxi) in wx.iter().enumerate() {
        let mut row = 0.0;
        for (j, wyj) in wy.iter().enumerate() {
            let at = tensor.idx(i, j);
            let v = tensor.value[at];
            let (gx, gy) = (scale * tensor.gx[at], scale * tensor.gy[at]);
            row += wyj * (-2.0 * v * v + gx * gx + gy * gy);
        }
        integral += wxi * row;
    }
    Ok((PI * (2.0 * energy).sqrt() / 8.0 * integral, [xs.len(), ys.len()]))
}

/// Domain form with the variance-stabilized normalization
/// `sqrt(512 pi / ln E)`, which requires `E > e`.
pub fn chaos2_domain(field: &PlaneWaveField, d: &RectDomain) -> Result<ChaosSample> {
    chaos2_domain_refined(field, d, 1)
}

/// [`chaos2_domain`] with `refine` multiplying the panel counts.
pub fn chaos2_domain_refined(
    field: &PlaneWaveField,
    d: &RectDomain,
    refine: usize,
) -> Result<ChaosSample> {
    let factor = normalization_factor(field.energy())?;
    let (raw, nodes) = chaos2_domain_raw(field, d, refine)?;
    Ok(ChaosSample {
        raw,
        normalized: raw * factor,
        factor,
        descriptor: serde_json::to_string(d).expect("rectangle serializes"),
        nodes: nodes.to_vec(),
    })
}

/// Canonical wavenumber-one energy `1 / (4 pi^2)`.
pub fn canonical_energy() -> f64 {
    1.0 / (4.0 * PI * PI)
}

/// Samples the canonical field `b` on the blown-up rectangle `R * D` and
/// returns `R^{-1} * L(b; R D)[2]`. With `R = 2 pi sqrt(E)` this has the
/// same law as the boundary functional of `D` at energy `E`.
pub fn rescaled_chaos2(d: &RectDomain, r: f64, seed: u64, replication: u64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Config(format!("scale factor must be positive, got {r}")));
    }
    let scaled = RectDomain::new(r * d.a, r * d.b, r * d.c, r * d.d)?;
    let energy = canonical_energy();
    let max_side = scaled.width().max(scaled.height());
    if (max_side * energy.sqrt()).ceil() as usize > MAX_PANELS {
        return Err(Error::Resource(format!(
            "blown-up rectangle of side {max_side} exceeds quadrature limits"
        )));
    }
    // Wave count grows with the domain diameter so the discrete kernel
    // stays exact across the whole rectangle.
    let m = ((8.0 * energy.sqrt() * max_side).ceil() as usize).max(256);
    let field = PlaneWaveField::sample(energy, m, seed, replication)?;
    let (raw, _) = chaos2_domain_raw(&field, &scaled, 1)?;
    Ok(raw / r)
}
