//! Ambient maps on C^2 and the translation between torus intersection
//! points and inscribed pegs.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::FourierCurve;
use crate::error::{PegError, Result};
use crate::residual::{residual_quad, residual_rect, TorusQuadruple};

/// Default tolerance for geometric identities, relative to the curve diameter.
pub const DEFAULT_GEOM_TOL: f64 = 1e-8;

/// Smallest parameter gap accepted by the extractors.
const MIN_PARAM_GAP: f64 = 1e-9;

/// A point `(z1, z2)` of C^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl ComplexPair {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        Self { z1, z2 }
    }

    /// `(Re z1, Im z1, Re z2, Im z2)`.
    pub fn flatten(&self) -> [f64; 4] {
        [self.z1.re, self.z1.im, self.z2.re, self.z2.im]
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.z1 - other.z1, self.z2 - other.z2)
    }

    pub fn norm(&self) -> f64 {
        (self.z1.norm_sqr() + self.z2.norm_sqr()).sqrt()
    }
}

/// Shape data of a cyclic quadrilateral: `s = |AX|/|AC|`, `t = |BX|/|BD|`,
/// `phi = angle AXB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadData {
    pub s: f64,
    pub t: f64,
    pub phi: f64,
}

impl QuadData {
    pub fn new(s: f64, t: f64, phi: f64) -> Result<Self> {
        let d = Self { s, t, phi };
        d.validate()?;
        Ok(d)
    }

    /// Rectangle specialization `s = t = 1/2`, `phi` in `(0, pi/2]`.
    pub fn rectangle(phi: f64) -> Result<Self> {
        if !(phi > 0.0 && phi <= FRAC_PI_2) {
            return Err(PegError::InvalidData(format!("rectangle angle {phi} outside (0, pi/2]")));
        }
        Self::new(0.5, 0.5, phi)
    }

    pub fn validate(&self) -> Result<()> {
        let ratio_ok = |r: f64| r > 0.0 && r <= 0.5;
        if !ratio_ok(self.s) || !ratio_ok(self.t) {
            return Err(PegError::InvalidData(format!(
                "ratios must lie in (0, 1/2], got s={}, t={}",
                self.s, self.t
            )));
        }
        if !(self.phi > 0.0 && self.phi < PI) {
            return Err(PegError::InvalidData(format!("angle {} outside (0, pi)", self.phi)));
        }
        Ok(())
    }

    pub fn is_rectangle(&self) -> bool {
        self.s == 0.5 && self.t == 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PegKind {
    Rectangle,
    CyclicQuadrilateral,
}

/// An inscribed rectangle or cyclic quadrilateral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peg {
    pub kind: PegKind,
    /// `(A, B, C, D)`; diagonals are `AC` and `BD`.
    pub vertices: [Complex64; 4],
    pub diag_point: Complex64,
    pub data: QuadData,
    /// Whether `A, B, C, D` wind counterclockwise.
    pub counterclockwise: bool,
}

impl Peg {
    pub fn signed_area(&self) -> f64 {
        let v = &self.vertices;
        (0..4).map(|i| cross(v[i], v[(i + 1) % 4])).sum::<f64>() / 2.0
    }
}

/// `(z1, z2) -> ((z1 + z2)/2, (z1 - z2)/2)`.
pub fn map_l(p: ComplexPair) -> ComplexPair {
    ComplexPair::new((p.z1 + p.z2) / 2.0, (p.z1 - p.z2) / 2.0)
}

/// Rotation of the second factor by `phi`.
pub fn map_rot(phi: f64, p: ComplexPair) -> ComplexPair {
    ComplexPair::new(p.z1, p.z2 * Complex64::cis(phi))
}

/// `(z1, z2) -> (z1, -z2)`.
pub fn map_involution(p: ComplexPair) -> ComplexPair {
    ComplexPair::new(p.z1, -p.z2)
}

/// `(z1, z2) -> ((1 - r) z1 + r z2, sqrt(r (1 - r)) (z1 - z2))`.
pub fn map_f(r: f64, p: ComplexPair) -> Result<ComplexPair> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(PegError::InvalidData(format!("ratio {r} outside (0, 1/2]")));
    }
    Ok(map_f_unchecked(r, p))
}

pub(crate) fn map_f_unchecked(r: f64, p: ComplexPair) -> ComplexPair {
    ComplexPair::new(p.z1 * (1.0 - r) + p.z2 * r, (p.z1 - p.z2) * (r * (1.0 - r)).sqrt())
}

/// Point of the torus `L` with parameters `(t1, t2)`.
pub fn point_l(curve: &FourierCurve, t1: f64, t2: f64) -> ComplexPair {
    map_l(ComplexPair::new(curve.eval(t1), curve.eval(t2)))
}

/// Point of the rotated torus `L_phi` with parameters `(t3, t4)`.
pub fn point_lphi(curve: &FourierCurve, phi: f64, t3: f64, t4: f64) -> ComplexPair {
    map_rot(phi, point_l(curve, t3, t4))
}

/// Point of `T1 = R_phi(F_s(gamma x gamma))`.
pub fn point_t1(curve: &FourierCurve, data: &QuadData, t1: f64, t2: f64) -> ComplexPair {
    map_rot(
        data.phi,
        map_f_unchecked(data.s, ComplexPair::new(curve.eval(t1), curve.eval(t2))),
    )
}

/// Point of `T2 = F_t(gamma x gamma)`.
pub fn point_t2(curve: &FourierCurve, data: &QuadData, t3: f64, t4: f64) -> ComplexPair {
    map_f_unchecked(data.t, ComplexPair::new(curve.eval(t3), curve.eval(t4)))
}

pub(crate) fn cross(u: Complex64, v: Complex64) -> f64 {
    u.re * v.im - u.im * v.re
}

/// Angle between two plane vectors in `[0, pi]`.
pub fn unsigned_angle(u: Complex64, v: Complex64) -> f64 {
    cross(u, v).abs().atan2(u.re * v.re + u.im * v.im)
}

fn check_off_diagonal(q: &TorusQuadruple) -> Result<()> {
    let gap = q.min_gap();
    if gap < MIN_PARAM_GAP {
        return Err(PegError::DegenerateQuadruple { gap });
    }
    Ok(())
}

fn counterclockwise(v: &[Complex64; 4]) -> bool {
    (0..4).map(|i| cross(v[i], v[(i + 1) % 4])).sum::<f64>() > 0.0
}

/// Rectangle encoded by a solution of the rectangle system.
///
/// With `z1 = (g1 + g2)/2` and `z2 = (g3 - g4)/2` the vertex list
/// `(z1 + z2, z1 + z2 e^{i phi}, z1 - z2, z1 - z2 e^{i phi})` is
/// `(g3, g1, g4, g2)`, where `g_i = gamma(t_i)`.
pub fn extract_rectangle(curve: &FourierCurve, phi: f64, q: &TorusQuadruple, rel_tol: f64) -> Result<Peg> {
    check_off_diagonal(q)?;
    let diam = curve.diameter();
    let tol = rel_tol * diam;
    let res = residual_rect(curve, phi, q);
    if res.norm > tol {
        return Err(PegError::ResidualTooLarge { norm: res.norm, tol });
    }
    let [t1, t2, t3, t4] = q.angles();
    let (g1, g2, g3, g4) = (curve.eval(t1), curve.eval(t2), curve.eval(t3), curve.eval(t4));
    let vertices = [g3, g1, g4, g2];
    let x = (g1 + g2) / 2.0;
    let radii: Vec<f64> = vertices.iter().map(|v| (v - x).norm()).collect();
    let r0 = radii[0];
    if radii.iter().any(|r| (r - r0).abs() > tol) {
        return Err(PegError::PegInvariant(format!("vertex distances to centre differ: {radii:?}")));
    }
    if r0 <= tol {
        return Err(PegError::CoincidentVertices);
    }
    let angle = unsigned_angle(vertices[0] - x, vertices[1] - x);
    if (angle - phi).abs() > tol / r0 {
        return Err(PegError::PegInvariant(format!("diagonal angle {angle} differs from {phi}")));
    }
    Ok(Peg {
        kind: PegKind::Rectangle,
        vertices,
        diag_point: x,
        data: QuadData { s: 0.5, t: 0.5, phi },
        counterclockwise: counterclockwise(&vertices),
    })
}

/// Cyclic quadrilateral encoded by a solution of the quadrilateral system:
/// `A = g1, C = g2, B = g3, D = g4`.
pub fn extract_quad(curve: &FourierCurve, data: &QuadData, q: &TorusQuadruple, rel_tol: f64) -> Result<Peg> {
    data.validate()?;
    check_off_diagonal(q)?;
    let diam = curve.diameter();
    let tol = rel_tol * diam;
    let res = residual_quad(curve, data, q);
    if res.norm > tol {
        return Err(PegError::ResidualTooLarge { norm: res.norm, tol });
    }
    let [t1, t2, t3, t4] = q.angles();
    let (a, c, b, d) = (curve.eval(t1), curve.eval(t2), curve.eval(t3), curve.eval(t4));
    let x = a * (1.0 - data.s) + c * data.s;
    let x2 = b * (1.0 - data.t) + d * data.t;
    if (x - x2).norm() > tol {
        return Err(PegError::PegInvariant(format!("diagonals miss by {:e}", (x - x2).norm())));
    }
    let (ac, bd) = (c - a, d - b);
    if ac.norm() <= tol || bd.norm() <= tol {
        return Err(PegError::CoincidentVertices);
    }
    let angle = unsigned_angle(ac, bd);
    if (angle - data.phi).abs() > tol / ac.norm().min(bd.norm()) {
        return Err(PegError::PegInvariant(format!("diagonal angle {angle} differs from {}", data.phi)));
    }
    let vertices = [a, b, c, d];
    let (kind, data) = if data.is_rectangle() {
        (PegKind::Rectangle, QuadData { phi: fold_right(data.phi), ..*data })
    } else {
        (PegKind::CyclicQuadrilateral, *data)
    };
    Ok(Peg { kind, vertices, diag_point: x, data, counterclockwise: counterclockwise(&vertices) })
}

fn fold_right(phi: f64) -> f64 {
    if phi > FRAC_PI_2 {
        PI - phi
    } else {
        phi
    }
}

/// Recomputes `(s, t, phi)` from the vertices alone.
///
/// The diagonal point is the intersection of lines `AC` and `BD`; the angle
/// is the unsigned angle between `C - A` and `D - B`, folded into
/// `(0, pi/2]` for rectangle pegs.
pub fn recompute_data(peg: &Peg) -> Result<QuadData> {
    let [a, b, c, d] = peg.vertices;
    let scale = peg.vertices.iter().map(|v| v.norm()).fold(1e-300, f64::max);
    for i in 0..4 {
        for j in (i + 1)..4 {
            if (peg.vertices[i] - peg.vertices[j]).norm() <= 1e-12 * scale {
                return Err(PegError::CoincidentVertices);
            }
        }
    }
    let (ac, bd) = (c - a, d - b);
    let denom = cross(ac, bd);
    if denom.abs() <= 1e-14 * ac.norm() * bd.norm() {
        return Err(PegError::PegInvariant("diagonals are parallel".into()));
    }
    let s = cross(b - a, bd) / denom;
    let t = cross(b - a, ac) / denom;
    let angle = unsigned_angle(ac, bd);
    let phi = match peg.kind {
        PegKind::Rectangle => fold_right(angle),
        PegKind::CyclicQuadrilateral => angle,
    };
    Ok(QuadData { s, t, phi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pair(a: Complex64, b: Complex64) -> ComplexPair {
        ComplexPair::new(a, b)
    }

    #[test]
    fn map_l_examples() {
        assert_eq!(map_l(pair(c(1.0, 0.0), c(1.0, 0.0))), pair(c(1.0, 0.0), c(0.0, 0.0)));
        assert_eq!(map_l(pair(c(1.0, 0.0), c(-1.0, 0.0))), pair(c(0.0, 0.0), c(1.0, 0.0)));
        assert_eq!(map_l(pair(c(2.0, 0.0), c(0.0, 2.0))), pair(c(1.0, 1.0), c(1.0, -1.0)));
    }

    #[test]
    fn rotation_examples() {
        let p = pair(c(1.0, 0.0), c(1.0, 0.0));
        assert_eq!(map_rot(0.0, p), p);
        let r = map_rot(FRAC_PI_2, p);
        assert!((r.z2 - c(0.0, 1.0)).norm() < 1e-16);
        let p = pair(c(1.0, 0.0), c(1.0, 1.0));
        let r = map_rot(PI, p);
        assert!(r.sub(&map_involution(p)).norm() < 1e-15);
        assert!((r.z2 - c(-1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn involution_examples() {
        assert_eq!(map_involution(pair(c(1.0, 0.0), c(2.0, 0.0))), pair(c(1.0, 0.0), c(-2.0, 0.0)));
        let fixed = pair(c(0.3, -0.7), c(0.0, 0.0));
        assert_eq!(map_involution(fixed).z2.norm(), 0.0);
    }

    #[test]
    fn map_f_examples() {
        let p = pair(c(0.4, -1.0), c(2.5, 0.3));
        assert_eq!(map_f(0.5, p).unwrap(), map_l(p));
        let z = c(1.2, -0.4);
        for r in [0.1, 0.25, 0.5] {
            let img = map_f(r, pair(z, z)).unwrap();
            assert!((img.z1 - z).norm() < 1e-15 && img.z2.norm() == 0.0);
        }
        let img = map_f(0.25, pair(c(4.0, 0.0), c(0.0, 0.0))).unwrap();
        assert!((img.z1 - c(3.0, 0.0)).norm() < 1e-15);
        assert!((img.z2 - c(3f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(map_f(0.0, p).is_err());
        assert!(map_f(0.6, p).is_err());
    }

    #[test]
    fn torus_points() {
        let e = FourierCurve::ellipse(2.0, 1.0).unwrap();
        let p = point_l(&e, 0.3, 0.3);
        assert!(p.z2.norm() == 0.0 && (p.z1 - e.eval(0.3)).norm() < 1e-15);
        let p = point_l(&e, 0.0, PI);
        assert!(p.sub(&pair(c(0.0, 0.0), c(2.0, 0.0))).norm() < 1e-15);
        assert_eq!(point_lphi(&e, 0.0, 0.4, 1.9), point_l(&e, 0.4, 1.9));
        let half = QuadData::new(0.5, 0.5, 1.0).unwrap();
        assert!(point_t2(&e, &half, 0.4, 1.9).sub(&point_l(&e, 0.4, 1.9)).norm() < 1e-15);
        let d = QuadData::new(0.3, 0.3, 0.8).unwrap();
        assert_eq!(point_t1(&e, &d, 1.1, 1.1).z2.norm(), 0.0);
        let d0 = QuadData { s: 0.3, t: 0.3, phi: 0.0 };
        assert!(point_t1(&e, &d0, 0.2, 2.0).sub(&point_t2(&e, &d0, 0.2, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn recompute_unit_square() {
        let peg = Peg {
            kind: PegKind::Rectangle,
            vertices: [c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0), c(1.0, -1.0)],
            diag_point: c(0.0, 0.0),
            data: QuadData { s: 0.5, t: 0.5, phi: FRAC_PI_2 },
            counterclockwise: true,
        };
        let d = recompute_data(&peg).unwrap();
        assert!((d.s - 0.5).abs() < 1e-15 && (d.t - 0.5).abs() < 1e-15);
        assert!((d.phi - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn recompute_hand_built_quad() {
        let phi = 1.1;
        let x = c(0.3, 0.0);
        let dir = Complex64::cis(phi);
        let peg = Peg {
            kind: PegKind::CyclicQuadrilateral,
            vertices: [c(0.0, 0.0), x - dir * 0.4, c(1.0, 0.0), x + dir * 0.525],
            diag_point: x,
            data: QuadData { s: 0.3, t: 0.4 / 0.925, phi },
            counterclockwise: true,
        };
        let d = recompute_data(&peg).unwrap();
        assert!((d.s - 0.3).abs() < 1e-14);
        assert!((d.t - 0.4 / 0.925).abs() < 1e-14);
        assert!((d.phi - phi).abs() < 1e-14);
    }

    #[test]
    fn recompute_rejects_coincident_vertices() {
        let peg = Peg {
            kind: PegKind::Rectangle,
            vertices: [c(1.0, 1.0), c(1.0, 1.0), c(-1.0, -1.0), c(1.0, -1.0)],
            diag_point: c(0.0, 0.0),
            data: QuadData { s: 0.5, t: 0.5, phi: FRAC_PI_2 },
            counterclockwise: true,
        };
        assert!(matches!(recompute_data(&peg), Err(PegError::CoincidentVertices)));
    }

    #[test]
    fn extract_square_from_ellipse() {
        let e = FourierCurve::ellipse(2.0, 1.0).unwrap();
        let u = 2f64.atan();
        let q = TorusQuadruple::new([PI - u, -u, u, PI + u]);
        let peg = extract_rectangle(&e, FRAC_PI_2, &q, DEFAULT_GEOM_TOL).unwrap();
        let h = 2.0 / 5f64.sqrt();
        for v in peg.vertices {
            assert!((v.re.abs() - h).abs() < 1e-12 && (v.im.abs() - h).abs() < 1e-12);
        }
        assert!(((peg.vertices[0] - peg.diag_point).norm() - (peg.vertices[2] - peg.diag_point).norm()).abs() < 1e-9);
        let d = recompute_data(&peg).unwrap();
        assert!((d.phi - FRAC_PI_2).abs() < 1e-8);
    }

    #[test]
    fn extract_rejects_diagonal() {
        let e = FourierCurve::ellipse(2.0, 1.0).unwrap();
        let q = TorusQuadruple::new([0.7; 4]);
        assert!(matches!(
            extract_rectangle(&e, FRAC_PI_3, &q, DEFAULT_GEOM_TOL),
            Err(PegError::DegenerateQuadruple { .. })
        ));
        let d = QuadData::new(0.3, 0.5, 1.0).unwrap();
        assert!(matches!(extract_quad(&e, &d, &q, DEFAULT_GEOM_TOL), Err(PegError::DegenerateQuadruple { .. })));
    }

    #[test]
    fn extract_rejects_non_solution() {
        let e = FourierCurve::ellipse(2.0, 1.0).unwrap();
        let q = TorusQuadruple::new([0.1, 1.0, 2.0, 3.0]);
        assert!(matches!(
            extract_rectangle(&e, FRAC_PI_4, &q, DEFAULT_GEOM_TOL),
            Err(PegError::ResidualTooLarge { .. })
        ));
    }

    #[test]
    fn quad_data_ranges() {
        assert!(QuadData::new(0.0, 0.3, 1.0).is_err());
        assert!(QuadData::new(0.3, 0.51, 1.0).is_err());
        assert!(QuadData::new(0.3, 0.5, PI).is_err());
        assert!(QuadData::rectangle(1.7).is_err());
        assert!(QuadData::rectangle(FRAC_PI_2).unwrap().is_rectangle());
    }
}
