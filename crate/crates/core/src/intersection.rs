//! Orientation signs, signed counts, the clean-intersection ledger, graded
//! generator bookkeeping and the near-diagonal perturbation count.

use std::fmt;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::curve::FourierCurve;
use crate::error::{PegError, Result};
use crate::geometry::{map_f_unchecked, map_l, map_rot, ComplexPair};
use crate::residual::{singular_values, Problem, ResidualValue, TorusQuadruple};
use crate::solver::{newton, NewtonOptions, PegOrbit, Solution, SolveConfig, SolveReport, TorusIndex};

/// Relative determinant floor below which no sign is assigned.
pub const SIGN_DET_FLOOR: f64 = 1e-12;

fn tangent_pair(p: ComplexPair) -> Vector4<f64> {
    Vector4::from(p.flatten())
}

/// Columns `[d_t1 P, d_t2 P, d_t3 P', d_t4 P']` of the two torus
/// parameterizations. Both maps are linear, so each tangent is the map
/// applied to a single curve derivative.
pub fn orientation_matrix(curve: &FourierCurve, problem: &Problem, q: &TorusQuadruple) -> Matrix4<f64> {
    let d = q.angles().map(|t| curve.eval_with_deriv(t).1);
    let zero = Complex64::new(0.0, 0.0);
    let first = |z1, z2| ComplexPair::new(z1, z2);
    let cols: [ComplexPair; 4] = match problem {
        Problem::Rectangle { phi } => {
            let phi = phi.value();
            [
                map_l(first(d[0], zero)),
                map_l(first(zero, d[1])),
                map_rot(phi, map_l(first(d[2], zero))),
                map_rot(phi, map_l(first(zero, d[3]))),
            ]
        }
        Problem::Quad { data } => [
            map_rot(data.phi, map_f_unchecked(data.s, first(d[0], zero))),
            map_rot(data.phi, map_f_unchecked(data.s, first(zero, d[1]))),
            map_f_unchecked(data.t, first(d[2], zero)),
            map_f_unchecked(data.t, first(zero, d[3])),
        ],
    };
    let mut m = Matrix4::zeros();
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, &tangent_pair(*c));
    }
    m
}

/// Sign of `det[d_t1 P, d_t2 P, d_t3 P', d_t4 P']` in the ambient order
/// `(Re z1, Im z1, Re z2, Im z2)`.
pub fn orientation_sign(curve: &FourierCurve, problem: &Problem, q: &TorusQuadruple) -> Result<i8> {
    sign_of(&orientation_matrix(curve, problem, q))
}

pub(crate) fn sign_of(m: &Matrix4<f64>) -> Result<i8> {
    let scale: f64 = m.column_iter().map(|c| c.norm()).product();
    let det = m.determinant();
    if det.is_nan() || det == 0.0 || det.abs() < SIGN_DET_FLOOR * scale {
        return Err(PegError::NonTransverse { det });
    }
    Ok(if det > 0.0 { 1 } else { -1 })
}

/// Sum of orientation signs. Every solution must carry a sign.
pub fn signed_total(solutions: &[Solution]) -> Result<i64> {
    solutions
        .iter()
        .enumerate()
        .map(|(i, s)| s.sign.map(i64::from).ok_or(PegError::UnsignedSolution(i)))
        .sum()
}

/// One term of the clean-intersection sum `sum sign(C) chi(C)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanComponent {
    pub description: String,
    /// Absent for the circle, whose sign is multiplied by zero, and for
    /// orbits with mixed signs.
    pub sign: Option<i8>,
    pub euler_char: i64,
    pub contribution: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanLedger {
    pub entries: Vec<CleanComponent>,
    pub total: i64,
    /// The displaceability value the total must equal.
    pub expected: i64,
    pub balanced: bool,
    pub warnings: Vec<String>,
}

/// Itemized ledger: the circle `gamma x {0}` contributes `x 0`, each orbit
/// the sum of its member signs.
pub fn clean_ledger(report: &SolveReport) -> CleanLedger {
    let mut entries = vec![CleanComponent {
        description: "circle gamma x {0}: sign x 0".into(),
        sign: None,
        euler_char: 0,
        contribution: 0,
    }];
    for (k, orbit) in report.orbits.iter().enumerate() {
        entries.push(CleanComponent {
            description: format!("orbit {k} ({} points)", orbit.size()),
            sign: orbit.orbit_sign,
            euler_char: orbit.size() as i64,
            contribution: orbit.sign_sum(),
        });
    }
    let total = entries.iter().map(|e| e.contribution).sum();
    let mut warnings = Vec::new();
    if report.orbits.is_empty() && matches!(report.problem, Problem::Rectangle { .. }) {
        warnings.push("empty off-diagonal solution set for a rectangle problem".into());
    }
    CleanLedger { entries, total, expected: 0, balanced: total == 0, warnings }
}

/// Checks `L . L_phi = 0 + signed_total = 0` on a report without
/// degeneracy.
pub fn clean_formula_check(report: &SolveReport) -> Result<CleanLedger> {
    if report.degenerate_family || !report.degeneracy.isolated.is_empty() {
        return Err(PegError::DegenerateReport);
    }
    let members: Vec<Solution> = report.solutions().cloned().collect();
    let independent = signed_total(&members)?;
    let ledger = clean_ledger(report);
    if ledger.total != independent || !ledger.balanced {
        return Err(PegError::LedgerImbalance { total: ledger.total });
    }
    Ok(ledger)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorOrigin {
    CircleMorsePoint,
    TransversePairMember,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedGenerator {
    pub label: String,
    pub parity: u8,
    pub origin: GeneratorOrigin,
}

/// Doubling certificate: a verdict, or not applicable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    Holds(bool),
    NotApplicable,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Holds(b) => write!(f, "{b}"),
            Certificate::NotApplicable => f.write_str("n/a"),
        }
    }
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Certificate::Holds(b) => s.serialize_bool(*b),
            Certificate::NotApplicable => s.serialize_str("n/a"),
        }
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bool(bool),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Bool(b) => Ok(Certificate::Holds(b)),
            Raw::Text(t) if t == "n/a" => Ok(Certificate::NotApplicable),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("unknown certificate {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerLedger {
    pub global_sign: i8,
    pub generators: Vec<GradedGenerator>,
    pub chi: i64,
    pub contradiction: bool,
    pub certificate: Certificate,
}

fn parity(global_sign: i8, sign: i8) -> u8 {
    if global_sign * sign == 1 {
        0
    } else {
        1
    }
}

/// Pairs of members that must share a parity: `{q, tau(q)}`.
fn tau_pairs(orbit: &PegOrbit, cluster_radius: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, a) in orbit.members.iter().enumerate() {
        let image = a.quadruple.tau();
        for (j, b) in orbit.members.iter().enumerate().skip(i + 1) {
            if b.quadruple.distance(&image) <= cluster_radius {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Builds the graded generator multiset and its Euler characteristic.
///
/// The circle contributes `x` (parity 1) and `y` (parity 0); each transverse
/// solution contributes one generator of parity 0 when
/// `global_sign * sign = +1` and 1 otherwise.
pub fn euler_bookkeeping(report: &SolveReport, global_sign: i8) -> Result<EulerLedger> {
    if global_sign != 1 && global_sign != -1 {
        return Err(PegError::InvalidConfig(format!("global sign must be +1 or -1, got {global_sign}")));
    }
    if report.degenerate_family || !report.degeneracy.isolated.is_empty() {
        return Err(PegError::DegenerateReport);
    }
    let mut generators = vec![
        GradedGenerator { label: "x".into(), parity: 1, origin: GeneratorOrigin::CircleMorsePoint },
        GradedGenerator { label: "y".into(), parity: 0, origin: GeneratorOrigin::CircleMorsePoint },
    ];
    let mut orbit_parity = Vec::with_capacity(report.orbits.len());
    let mut idx = 0;
    for (k, orbit) in report.orbits.iter().enumerate() {
        let mut parities = Vec::with_capacity(orbit.size());
        for (j, m) in orbit.members.iter().enumerate() {
            let sign = m.sign.ok_or(PegError::UnsignedSolution(idx + j))?;
            let p = parity(global_sign, sign);
            parities.push(p);
            generators.push(GradedGenerator {
                label: format!("p{k}.{j}"),
                parity: p,
                origin: GeneratorOrigin::TransversePairMember,
            });
        }
        idx += orbit.size();
        if tau_pairs(orbit, report.config.cluster_radius)
            .iter()
            .any(|&(a, b)| parities[a] != parities[b])
        {
            return Err(PegError::InconsistentParity(k));
        }
        let uniform = parities.iter().all(|&p| p == parities[0]);
        orbit_parity.push(uniform.then_some(parities[0]));
    }
    let chi: i64 = generators.iter().map(|g| if g.parity == 0 { 1 } else { -1 }).sum();
    let expected = global_sign as i64 * report.signed_total;
    if chi != expected {
        return Err(PegError::EulerMismatch { chi, expected });
    }
    let contradiction = chi != 0;
    let certificate = if report.problem.is_right_angle() {
        Certificate::NotApplicable
    } else {
        let has = |p: u8| orbit_parity.contains(&Some(p));
        let doubled = report.orbits.is_empty() || (report.orbits.len() >= 2 && has(0) && has(1));
        Certificate::Holds(!contradiction && doubled)
    };
    Ok(EulerLedger { global_sign, generators, chi, contradiction, certificate })
}

/// A transverse zero of the perturbed system near the small diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalZero {
    pub quadruple: TorusQuadruple,
    pub residual_norm: f64,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalVerdict {
    pub epsilon: f64,
    pub zeros: Vec<DiagonalZero>,
    pub signed_sum: i64,
    /// Off-diagonal signed total plus the near-diagonal contribution.
    pub total_signed: i64,
}

/// `C^inf` cutoff: 1 for `d <= delta/2`, 0 for `d >= delta`.
pub fn bump(d: f64, delta: f64) -> f64 {
    let x = (d - 0.5 * delta) / (0.5 * delta);
    if x <= 0.0 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let psi = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    1.0 - psi(x) / (psi(x) + psi(1.0 - x))
}

/// Unit normal to the range of the Jacobian at the diagonal point
/// `(m, m, m, m)`: the generalized cross product of its first three
/// columns.
fn diagonal_normal(curve: &FourierCurve, problem: &Problem, m: f64) -> Vector4<f64> {
    let j = problem.jacobian(curve, &TorusQuadruple::new([m; 4]));
    let mut w = Vector4::zeros();
    for i in 0..4 {
        let mut a = Matrix4::zeros();
        for c in 0..3 {
            a.set_column(c, &j.column(c));
        }
        a[(i, 3)] = 1.0;
        w[i] = a.determinant();
    }
    let n = w.norm();
    if n > 0.0 {
        w / n
    } else {
        w
    }
}

/// The added term `epsilon bump(d) f'(m) n(m)` with height `f = cos` on the
/// diagonal circle, whose critical points are `0` and `pi`.
fn perturbation(curve: &FourierCurve, problem: &Problem, epsilon: f64, delta: f64, q: &TorusQuadruple) -> Vector4<f64> {
    let b = bump(q.diag_distance(), delta);
    if b == 0.0 {
        return Vector4::zeros();
    }
    let m = q.circular_mean();
    diagonal_normal(curve, problem, m) * (-epsilon * b * m.sin())
}

fn perturbed_system(
    curve: &FourierCurve,
    problem: &Problem,
    epsilon: f64,
    delta: f64,
    q: &TorusQuadruple,
) -> (ResidualValue, Matrix4<f64>) {
    let (r, mut j) = problem.system(curve, q);
    let p = perturbation(curve, problem, epsilon, delta, q);
    if p == Vector4::zeros() && q.diag_distance() >= delta {
        return (r, j);
    }
    let h = 1e-6;
    for c in 0..4 {
        let mut e = [0.0; 4];
        e[c] = h;
        let plus = perturbation(curve, problem, epsilon, delta, &q.shifted(&e));
        e[c] = -h;
        let minus = perturbation(curve, problem, epsilon, delta, &q.shifted(&e));
        let col = j.column(c) + (plus - minus) / (2.0 * h);
        j.set_column(c, &col);
    }
    let v = r.as_vector() + p;
    (ResidualValue::from_components([v[0], v[1], v[2], v[3]]), j)
}

/// Perturbs the residual inside the excluded diagonal neighbourhood and
/// counts the transverse zeros that appear there. Expects exactly two, of
/// opposite sign, for `epsilon != 0`.
pub fn perturb_diagonal_count(
    curve: &FourierCurve,
    problem: &Problem,
    epsilon: f64,
    config: &SolveConfig,
    report: &SolveReport,
) -> Result<DiagonalVerdict> {
    config.validate()?;
    if !epsilon.is_finite() {
        return Err(PegError::InvalidConfig("epsilon must be finite".into()));
    }
    let delta = config.diag_exclusion;
    let opts = NewtonOptions { diag_abort: 0.0, ..config.newton_options() };
    let mut seeds = Vec::new();
    let n = 48;
    let offsets = [[0.0; 4], [0.2, -0.1, 0.1, -0.2], [-0.15, 0.05, 0.15, -0.05]];
    for k in 0..n {
        let m = std::f64::consts::TAU * k as f64 / n as f64;
        for o in &offsets {
            let s = o.map(|x| m + x * delta);
            seeds.push(TorusQuadruple::new(s));
        }
    }

    let mut found: Vec<(f64, TorusQuadruple)> = seeds
        .iter()
        .map(|s| newton(*s, &opts, |q| perturbed_system(curve, problem, epsilon, delta, q)))
        .filter(|o| o.converged && o.q.diag_distance() < delta)
        .map(|o| (o.residual.norm, o.q))
        .collect();
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.lex_cmp(&b.1)));

    let mut index = TorusIndex::new(config.cluster_radius);
    let mut zeros = Vec::new();
    for (r, q) in found {
        if !index.within(&q, config.cluster_radius).is_empty() {
            continue;
        }
        index.insert(q);
        let (_, j) = perturbed_system(curve, problem, epsilon, delta, &q);
        let sv = singular_values(&j);
        if sv[0] == 0.0 || sv[3] / sv[0] < config.sv_ratio_threshold {
            continue;
        }
        if let Ok(sign) = sign_of(&j) {
            zeros.push(DiagonalZero { quadruple: q, residual_norm: r, sign });
        }
    }
    zeros.sort_by(|a, b| a.quadruple.lex_cmp(&b.quadruple));
    if epsilon != 0.0 && zeros.len() != 2 {
        return Err(PegError::DiagonalCount { found: zeros.len() });
    }
    let signed_sum = zeros.iter().map(|z| z.sign as i64).sum::<i64>();
    Ok(DiagonalVerdict { epsilon, signed_sum, total_signed: report.signed_total + signed_sum, zeros })
}

/// Ledger block attached to a report under `topology`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyBlock {
    pub signed_total: i64,
    pub euler_chi: i64,
    pub ledger: Vec<CleanComponent>,
    pub doubling_certificate: Certificate,
    pub balanced: bool,
    pub contradiction: bool,
    pub global_sign: i8,
    pub generators: Vec<GradedGenerator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<DiagonalVerdict>,
}

impl TopologyBlock {
    /// Whether the block records a failure of the predicted accounting.
    pub fn failed(&self) -> bool {
        !self.balanced || self.contradiction || self.diagonal.as_ref().is_some_and(|d| d.total_signed != 0)
    }
}

/// Runs the ledger and Euler bookkeeping on a report. Imbalance and
/// contradiction are recorded in the block rather than returned as errors.
pub fn topology(report: &SolveReport, global_sign: i8) -> Result<TopologyBlock> {
    if global_sign != 1 && global_sign != -1 {
        return Err(PegError::InvalidConfig(format!("global sign must be +1 or -1, got {global_sign}")));
    }
    if report.degenerate_family || !report.degeneracy.isolated.is_empty() {
        return Err(PegError::DegenerateReport);
    }
    let ledger = clean_ledger(report);
    let euler = euler_bookkeeping(report, global_sign)?;
    Ok(TopologyBlock {
        signed_total: report.signed_total,
        euler_chi: euler.chi,
        ledger: ledger.entries,
        doubling_certificate: euler.certificate,
        balanced: ledger.balanced,
        contradiction: euler.contradiction,
        global_sign,
        generators: euler.generators,
        diagonal: None,
    })
}
