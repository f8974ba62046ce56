//! Root-finding systems on the 4-torus whose off-diagonal zeros are pegs.
//!
//! Both systems are flattened to four reals in the order
//! `(Re eq1, Im eq1, Re eq2, Im eq2)`. Every determinant and orientation
//! downstream uses this order.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::curve::{angle_diff, circle_distance, wrap_angle, FourierCurve};
use crate::error::{PegError, Result};
use crate::geometry::QuadData;

/// Ordered parameters `(t1, t2, t3, t4)` on the 4-torus, stored in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct TorusQuadruple([f64; 4]);

impl From<[f64; 4]> for TorusQuadruple {
    fn from(a: [f64; 4]) -> Self {
        Self::new(a)
    }
}

impl From<TorusQuadruple> for [f64; 4] {
    fn from(q: TorusQuadruple) -> Self {
        q.0
    }
}

impl TorusQuadruple {
    pub fn new(angles: [f64; 4]) -> Self {
        Self(angles.map(wrap_angle))
    }

    pub fn angles(&self) -> [f64; 4] {
        self.0
    }

    /// `(t1, t2, t3, t4) -> (t2, t1, t4, t3)`: the involution on both tori.
    pub fn tau(&self) -> Self {
        let [a, b, c, d] = self.0;
        Self([b, a, d, c])
    }

    /// `(t1, t2, t3, t4) -> (t3, t4, t2, t1)`: order-four symmetry of the
    /// right-angle rectangle system, with `sigma^2 = tau`.
    pub fn sigma(&self) -> Self {
        let [a, b, c, d] = self.0;
        Self([c, d, b, a])
    }

    /// `(t1, t2, t3, t4) -> (t3, t4, t1, t2)`: swaps the roles of the tori.
    pub fn swap_tori(&self) -> Self {
        let [a, b, c, d] = self.0;
        Self([c, d, a, b])
    }

    /// Moves each angle by `step[i]` and re-wraps.
    pub fn shifted(&self, step: &[f64; 4]) -> Self {
        Self::new([
            self.0[0] + step[0],
            self.0[1] + step[1],
            self.0[2] + step[2],
            self.0[3] + step[3],
        ])
    }

    /// Euclidean distance on the flat torus.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| angle_diff(*a, *b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Smallest circle distance between two of the four parameters.
    pub fn min_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for i in 0..4 {
            for j in (i + 1)..4 {
                gap = gap.min(circle_distance(self.0[i], self.0[j]));
            }
        }
        gap
    }

    /// Half the length of the shortest arc containing all four parameters;
    /// zero exactly on the small diagonal.
    pub fn diag_distance(&self) -> f64 {
        let mut s = self.0;
        s.sort_by(f64::total_cmp);
        let mut largest_gap = s[0] + TAU - s[3];
        for i in 0..3 {
            largest_gap = largest_gap.max(s[i + 1] - s[i]);
        }
        (TAU - largest_gap) / 2.0
    }

    /// Circular mean of the four parameters.
    pub fn circular_mean(&self) -> f64 {
        let (s, c) = self
            .0
            .iter()
            .fold((0.0, 0.0), |(s, c), t| (s + t.sin(), c + t.cos()));
        wrap_angle(s.atan2(c))
    }

    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        for i in 0..4 {
            match self.0[i].total_cmp(&other.0[i]) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    }
}

/// Aspect angle of a rectangle problem. `RightAngle` is the exact `pi/2`
/// flag that switches the symmetry quotient to C4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RectAngle {
    Radians(f64),
    RightAngle,
}

impl RectAngle {
    pub fn value(&self) -> f64 {
        match self {
            RectAngle::Radians(phi) => *phi,
            RectAngle::RightAngle => FRAC_PI_2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RectAngle::RightAngle => Ok(()),
            RectAngle::Radians(phi) if *phi > 0.0 && *phi <= FRAC_PI_2 => Ok(()),
            RectAngle::Radians(phi) => Err(PegError::InvalidData(format!(
                "rectangle angle {phi} outside (0, pi/2]"
            ))),
        }
    }
}

impl fmt::Display for RectAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RectAngle::Radians(phi) => write!(f, "{phi}"),
            RectAngle::RightAngle => f.write_str("right-angle"),
        }
    }
}

impl FromStr for RectAngle {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "right-angle" {
            return Ok(RectAngle::RightAngle);
        }
        s.parse::<f64>()
            .map(RectAngle::Radians)
            .map_err(|_| format!("expected radians or `right-angle`, got `{s}`"))
    }
}

impl Serialize for RectAngle {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RectAngle::Radians(phi) => ser.serialize_f64(*phi),
            RectAngle::RightAngle => ser.serialize_str("right-angle"),
        }
    }
}

impl<'de> Deserialize<'de> for RectAngle {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(x) => Ok(RectAngle::Radians(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Which intersection system to solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Problem {
    Rectangle { phi: RectAngle },
    Quad { data: QuadData },
}

impl Problem {
    pub fn rectangle(phi: f64) -> Self {
        Problem::Rectangle { phi: RectAngle::Radians(phi) }
    }

    pub fn square() -> Self {
        Problem::Rectangle { phi: RectAngle::RightAngle }
    }

    pub fn quad(data: QuadData) -> Self {
        Problem::Quad { data }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Problem::Rectangle { phi } => phi.validate(),
            Problem::Quad { data } => data.validate(),
        }
    }

    pub fn phi(&self) -> f64 {
        match self {
            Problem::Rectangle { phi } => phi.value(),
            Problem::Quad { data } => data.phi,
        }
    }

    pub fn is_right_angle(&self) -> bool {
        matches!(self, Problem::Rectangle { phi: RectAngle::RightAngle })
    }

    pub fn residual(&self, curve: &FourierCurve, q: &TorusQuadruple) -> ResidualValue {
        match self {
            Problem::Rectangle { phi } => residual_rect(curve, phi.value(), q),
            Problem::Quad { data } => residual_quad(curve, data, q),
        }
    }

    pub fn jacobian(&self, curve: &FourierCurve, q: &TorusQuadruple) -> Matrix4<f64> {
        self.system(curve, q).1
    }

    /// Residual and Jacobian from one set of curve evaluations.
    pub fn system(&self, curve: &FourierCurve, q: &TorusQuadruple) -> (ResidualValue, Matrix4<f64>) {
        let ev = q.0.map(|t| curve.eval_with_deriv(t));
        let (w1, w2) = self.weights();
        let [(g1, d1), (g2, d2), (g3, d3), (g4, d4)] = ev;
        let eq1 = g1 * w1[0] + g2 * w1[1] - g3 * w1[2] - g4 * w1[3];
        let eq2 = (g1 - g2) * w2[0] - (g3 - g4) * w2[1];
        let cols = [
            (d1 * w1[0], d1 * w2[0]),
            (d2 * w1[1], -d2 * w2[0]),
            (-d3 * w1[2], -d3 * w2[1]),
            (-d4 * w1[3], d4 * w2[1]),
        ];
        let mut jac = Matrix4::zeros();
        for (j, (a, b)) in cols.iter().enumerate() {
            jac.set_column(j, &Vector4::new(a.re, a.im, b.re, b.im));
        }
        (ResidualValue::from_complex(eq1, eq2), jac)
    }

    /// Linear weights of the system: first equation coefficients on
    /// `g1..g4`, second equation multipliers on `g1 - g2` and `g3 - g4`.
    fn weights(&self) -> ([f64; 4], [Complex64; 2]) {
        match self {
            Problem::Rectangle { phi } => (
                [1.0; 4],
                [Complex64::new(1.0, 0.0), Complex64::cis(phi.value())],
            ),
            Problem::Quad { data } => (
                [1.0 - data.s, data.s, 1.0 - data.t, data.t],
                [
                    Complex64::cis(data.phi) * (data.s * (1.0 - data.s)).sqrt(),
                    Complex64::new((data.t * (1.0 - data.t)).sqrt(), 0.0),
                ],
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualValue {
    pub components: [f64; 4],
    pub norm: f64,
}

impl ResidualValue {
    pub fn from_components(components: [f64; 4]) -> Self {
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        Self { components, norm }
    }

    fn from_complex(eq1: Complex64, eq2: Complex64) -> Self {
        Self::from_components([eq1.re, eq1.im, eq2.re, eq2.im])
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::from(self.components)
    }
}

/// `G(q) = (g1 + g2 - g3 - g4, g1 - g2 - (g3 - g4) e^{i phi})`.
///
/// This is twice the difference of the torus points, so its zero set is
/// exactly `L` meeting `L_phi`.
pub fn residual_rect(curve: &FourierCurve, phi: f64, q: &TorusQuadruple) -> ResidualValue {
    Problem::rectangle(phi).system(curve, q).0
}

/// `R_phi(F_s(g1, g2)) - F_t(g3, g4)`.
pub fn residual_quad(curve: &FourierCurve, data: &QuadData, q: &TorusQuadruple) -> ResidualValue {
    Problem::quad(*data).system(curve, q).0
}

pub fn jacobian_rect(curve: &FourierCurve, phi: f64, q: &TorusQuadruple) -> Matrix4<f64> {
    Problem::rectangle(phi).system(curve, q).1
}

pub fn jacobian_quad(curve: &FourierCurve, data: &QuadData, q: &TorusQuadruple) -> Matrix4<f64> {
    Problem::quad(*data).system(curve, q).1
}

/// Singular values of a 4x4 matrix, descending.
pub fn singular_values(m: &Matrix4<f64>) -> [f64; 4] {
    let sv = m.singular_values();
    let mut out = [sv[0], sv[1], sv[2], sv[3]];
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point_l, point_lphi, point_t1, point_t2};
    use std::f64::consts::{FRAC_PI_3, PI};

    fn ellipse() -> FourierCurve {
        FourierCurve::ellipse(2.0, 1.0).unwrap()
    }

    #[test]
    fn diagonal_is_a_zero() {
        let e = ellipse();
        let q = TorusQuadruple::new([1.3; 4]);
        assert!(residual_rect(&e, 0.7, &q).norm < 1e-15);
        let d = QuadData::new(0.3, 0.4, 2.0).unwrap();
        assert!(residual_quad(&e, &d, &q).norm < 1e-15);
    }

    #[test]
    fn ellipse_square_quadruple() {
        let u = 2f64.atan();
        let q = TorusQuadruple::new([PI - u, -u, u, PI + u]);
        assert!(residual_rect(&ellipse(), FRAC_PI_2, &q).norm <= 1e-12);
    }

    #[test]
    fn paired_parameters_do_not_vanish() {
        let q = TorusQuadruple::new([0.4, 0.4, 2.0, 2.0]);
        assert!(residual_rect(&ellipse(), FRAC_PI_3, &q).norm > 0.1);
    }

    #[test]
    fn residual_is_twice_the_torus_gap() {
        let e = ellipse();
        let q = TorusQuadruple::new([0.3, 1.7, 4.0, 5.1]);
        let phi = 0.9;
        let [t1, t2, t3, t4] = q.angles();
        let gap = point_l(&e, t1, t2).sub(&point_lphi(&e, phi, t3, t4));
        let r = residual_rect(&e, phi, &q);
        let g = gap.flatten();
        for (a, b) in r.components.iter().zip(g) {
            assert!((a - 2.0 * b).abs() < 1e-14);
        }
        let d = QuadData::new(0.3, 0.45, 2.2).unwrap();
        let gap = point_t1(&e, &d, t1, t2).sub(&point_t2(&e, &d, t3, t4)).flatten();
        let r = residual_quad(&e, &d, &q);
        for (a, b) in r.components.iter().zip(gap) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn sigma_generates_c4() {
        let q = TorusQuadruple::new([0.1, 0.2, 0.3, 0.4]);
        assert_eq!(q.sigma().sigma(), q.tau());
        assert_eq!(q.sigma().sigma().sigma().sigma(), q);
        assert_eq!(q.tau().tau(), q);
    }

    #[test]
    fn circle_diagonal_rank_deficient() {
        let c = FourierCurve::unit_circle();
        let j = jacobian_rect(&c, FRAC_PI_3, &TorusQuadruple::new([0.8; 4]));
        let sv = singular_values(&j);
        assert!(sv[3] < 1e-12 * sv[0]);
    }

    #[test]
    fn diag_distance_and_mean() {
        let q = TorusQuadruple::new([6.2, 0.05, 0.1, 6.25]);
        let expect = (0.1 + TAU - 6.2) / 2.0;
        assert!((q.diag_distance() - expect).abs() < 1e-12);
        assert_eq!(TorusQuadruple::new([2.0; 4]).diag_distance(), 0.0);
        assert!((TorusQuadruple::new([2.0; 4]).circular_mean() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn angle_parsing() {
        assert_eq!("right-angle".parse::<RectAngle>().unwrap(), RectAngle::RightAngle);
        assert_eq!("0.5".parse::<RectAngle>().unwrap(), RectAngle::Radians(0.5));
        assert!("90deg".parse::<RectAngle>().is_err());
        let p = Problem::square();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"kind":"rectangle","phi":"right-angle"}"#);
        assert_eq!(serde_json::from_str::<Problem>(&s).unwrap(), p);
        assert!(RectAngle::Radians(1.7).validate().is_err());
    }
}
