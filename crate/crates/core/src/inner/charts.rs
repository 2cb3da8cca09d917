//! Critical points of the planar reduction and two auxiliary charts: the
//! hyperbolic chart `w = uv` (time `dr = dz / v`) resolving `v → 0`, and the
//! parabolic chart `U = 1/u, V = v/u²` (time `ds = u dz`) resolving `|u| → ∞`.

use crate::error::{invalid, Result};
use nalgebra::Complex;

/// `(du/dz, dv/dz)`.
pub fn planar_field(p: [f64; 2]) -> [f64; 2] {
    let [u, v] = p;
    [v + u * u / 3.0, 1.0 + 5.0 / 3.0 * u * v]
}

pub fn planar_jacobian(p: [f64; 2]) -> [[f64; 2]; 2] {
    let [u, v] = p;
    [[2.0 * u / 3.0, 1.0], [5.0 * v / 3.0, 5.0 * u / 3.0]]
}

/// `(dw/dr, dv/dr)` in the hyperbolic chart.
pub fn hyp_field(p: [f64; 2]) -> [f64; 2] {
    let [w, v] = p;
    [w + 2.0 * w * w + v * v * v, v * (1.0 + 5.0 / 3.0 * w)]
}

pub fn hyp_jacobian(p: [f64; 2]) -> [[f64; 2]; 2] {
    let [w, v] = p;
    [[1.0 + 4.0 * w, 3.0 * v * v], [5.0 * v / 3.0, 1.0 + 5.0 / 3.0 * w]]
}

/// `(dU/ds, dV/ds)` in the parabolic chart.
pub fn par_field(p: [f64; 2]) -> [f64; 2] {
    let [uu, vv] = p;
    [-uu * (vv + 1.0 / 3.0), uu * uu * uu + vv - 2.0 * vv * vv]
}

pub fn par_jacobian(p: [f64; 2]) -> [[f64; 2]; 2] {
    let [uu, vv] = p;
    [[-(vv + 1.0 / 3.0), -uu], [3.0 * uu * uu, 1.0 - 4.0 * vv]]
}

/// `(u, v) ↦ (w, v)`; the chart degenerates at `v = 0`.
pub fn to_hyp(u: f64, v: f64) -> Result<[f64; 2]> {
    if v == 0.0 || !v.is_finite() || !u.is_finite() {
        return Err(invalid("hyperbolic chart needs finite u and v != 0"));
    }
    Ok([u * v, v])
}

pub fn from_hyp(w: f64, v: f64) -> Result<(f64, f64)> {
    if v == 0.0 || !v.is_finite() || !w.is_finite() {
        return Err(invalid("hyperbolic chart needs finite w and v != 0"));
    }
    Ok((w / v, v))
}

/// `(u, v) ↦ (U, V)`; the chart degenerates at `u = 0`.
pub fn to_par(u: f64, v: f64) -> Result<[f64; 2]> {
    if u == 0.0 || !u.is_finite() || !v.is_finite() {
        return Err(invalid("parabolic chart needs finite v and u != 0"));
    }
    Ok([1.0 / u, v / (u * u)])
}

pub fn from_par(uu: f64, vv: f64) -> Result<(f64, f64)> {
    if uu == 0.0 || !uu.is_finite() || !vv.is_finite() {
        return Err(invalid("parabolic chart needs finite V and U != 0"));
    }
    let u = 1.0 / uu;
    Ok((u, vv * u * u))
}

/// Eigenvalues of a real 2×2 matrix, ordered by decreasing real part (then
/// decreasing imaginary part).
pub fn eigenvalues_2x2(m: [[f64; 2]; 2]) -> [Complex<f64>; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        // Avoid cancellation in the smaller root.
        let big = if half >= 0.0 { half + r } else { half - r };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (a, b) = if big >= small { (big, small) } else { (small, big) };
        [Complex::new(a, 0.0), Complex::new(b, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex::new(half, im), Complex::new(half, -im)]
    }
}

/// A critical point with its eigenvalues, computed in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub point: [f64; 2],
    pub eigenvalues: [Complex<f64>; 2],
}

/// Critical data of the planar system and both auxiliary charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPointAtlas {
    /// The spiral of the planar system.
    pub p_e: CriticalPoint,
    /// Hyperbolic chart: saddle, degenerate source, spiral.
    pub hyp: [CriticalPoint; 3],
    /// Parabolic chart: sink, saddle, spiral.
    pub par: [CriticalPoint; 3],
}

pub fn chart_atlas() -> CriticalPointAtlas {
    let c = Complex::new;
    let ue = 1.8f64.cbrt();
    let s11 = 11f64.sqrt();
    let p_e = CriticalPoint {
        point: [ue, -ue * ue / 3.0],
        eigenvalues: [c(7.0 * ue / 6.0, s11 * ue / 6.0), c(7.0 * ue / 6.0, -s11 * ue / 6.0)],
    };
    let hyp = [
        CriticalPoint { point: [-0.5, 0.0], eigenvalues: [c(1.0 / 6.0, 0.0), c(-1.0, 0.0)] },
        CriticalPoint { point: [0.0, 0.0], eigenvalues: [c(1.0, 0.0), c(1.0, 0.0)] },
        CriticalPoint {
            point: [-0.6, -(0.12f64).cbrt()],
            eigenvalues: [c(-0.7, s11 / 10.0), c(-0.7, -s11 / 10.0)],
        },
    ];
    let par = [
        CriticalPoint { point: [0.0, 0.5], eigenvalues: [c(-5.0 / 6.0, 0.0), c(-1.0, 0.0)] },
        CriticalPoint { point: [0.0, 0.0], eigenvalues: [c(1.0, 0.0), c(-1.0 / 3.0, 0.0)] },
        CriticalPoint {
            point: [(5.0f64 / 9.0).cbrt(), -1.0 / 3.0],
            eigenvalues: [c(7.0 / 6.0, s11 / 6.0), c(7.0 / 6.0, -s11 / 6.0)],
        },
    ];
    CriticalPointAtlas { p_e, hyp, par }
}

/// Polygonal spiral around `p_e` built from alternating vertical and
/// horizontal segments between the nullclines `v = −u²/3` and `uv = −3/5`,
/// closed by the arc of `v = −u²/3` from the last vertex back to the first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralBox {
    pub u0: f64,
    pub vertices: [[f64; 2]; 5],
}

impl SpiralBox {
    /// Requires `0 < u0 < (9/5)^{1/3}`.
    pub fn new(u0: f64) -> Result<Self> {
        let ue = 1.8f64.cbrt();
        if !(u0 > 0.0 && u0 < ue) {
            return Err(invalid(format!("spiral box needs 0 < u0 < {ue}, got {u0}")));
        }
        let v1 = -0.6 / u0;
        let u2 = (-3.0 * v1).sqrt();
        let v3 = -0.6 / u2;
        let u4 = (-3.0 * v3).sqrt();
        Ok(Self { u0, vertices: [[u0, -u0 * u0 / 3.0], [u0, v1], [u2, v1], [u2, v3], [u4, v3]] })
    }

    /// The four straight segments as vertex pairs.
    pub fn segments(&self) -> [([f64; 2], [f64; 2]); 4] {
        let p = self.vertices;
        [(p[0], p[1]), (p[1], p[2]), (p[2], p[3]), (p[3], p[4])]
    }

    /// Boundary polyline: the straight segments followed by `n` points on the
    /// closing arc (the last point equals the first vertex).
    pub fn boundary(&self, n: usize) -> Vec<[f64; 2]> {
        let mut out = self.vertices.to_vec();
        let (a, b) = (self.vertices[4][0], self.vertices[0][0]);
        let n = n.max(2);
        for i in 1..n {
            let u = a + (b - a) * i as f64 / (n - 1) as f64;
            out.push([u, -u * u / 3.0]);
        }
        out
    }

    /// Strict interior test by ray casting on the boundary with a finely
    /// resolved arc.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let b = self.boundary(512);
        let mut inside = false;
        for i in 0..b.len() - 1 {
            let (a, c) = (b[i], b[i + 1]);
            if (a[1] > p[1]) != (c[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) * (c[0] - a[0]) / (c[1] - a[1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Inward normal of the straight segment `i` (the box lies to the right
    /// of each segment traversed from `p_i` to `p_{i+1}`, which winds
    /// clockwise in the `(u, v)` plane).
    pub fn inward_normal(&self, i: usize) -> [f64; 2] {
        let (a, b) = self.segments()[i];
        let d = [b[0] - a[0], b[1] - a[1]];
        let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let right = [d[1] / n, -d[0] / n];
        // Orient towards the spiral point.
        let ue = 1.8f64.cbrt();
        let pe = [ue, -ue * ue / 3.0];
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        if right[0] * (pe[0] - mid[0]) + right[1] * (pe[1] - mid[1]) >= 0.0 {
            right
        } else {
            [-right[0], -right[1]]
        }
    }
}
