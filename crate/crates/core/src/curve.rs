//! Closed plane curves given by truncated complex Fourier series.
//!
//! A curve is `gamma(t) = sum_{k=-m}^{m} c_k e^{ikt}` for `t` in `[0, 2pi)`.
//! Evaluation and derivatives are exact term by term, which is what the
//! Jacobians downstream rely on.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PegError, Result};

/// Minimum parameter separation for a pair to count as a self-intersection
/// candidate.
pub const EMBED_DELTA: f64 = 0.1;
/// Self-intersection threshold relative to the curve diameter.
pub const EMBED_TOL_REL: f64 = 1e-6;
/// Margins below this fraction of the diameter are reported even for
/// embedded curves.
pub const EMBED_REPORT_REL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveFile", into = "CurveFile")]
pub struct FourierCurve {
    max_mode: usize,
    /// `c_{-m}, ..., c_m`.
    coeffs: Vec<Complex64>,
}

/// On-disk representation of a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CurveFile {
    Fourier {
        max_mode: usize,
        coeffs: Vec<[f64; 2]>,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
}

impl TryFrom<CurveFile> for FourierCurve {
    type Error = PegError;

    fn try_from(file: CurveFile) -> Result<Self> {
        match file {
            CurveFile::Fourier { max_mode, coeffs } => {
                if coeffs.len() != 2 * max_mode + 1 {
                    return Err(PegError::InvalidCurve(format!(
                        "expected {} coefficients for max_mode {max_mode}, got {}",
                        2 * max_mode + 1,
                        coeffs.len()
                    )));
                }
                FourierCurve::new(
                    max_mode,
                    coeffs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
                )
            }
            CurveFile::Ellipse { a, b } => FourierCurve::ellipse(a, b),
        }
    }
}

impl From<FourierCurve> for CurveFile {
    fn from(curve: FourierCurve) -> Self {
        CurveFile::Fourier {
            max_mode: curve.max_mode,
            coeffs: curve.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl FourierCurve {
    /// Builds a curve from `c_{-m}..c_m`.
    pub fn new(max_mode: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * max_mode + 1 {
            return Err(PegError::InvalidCurve(format!(
                "coefficient count {} does not match max_mode {max_mode}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(PegError::InvalidCurve("non-finite coefficient".into()));
        }
        let has_mode = coeffs
            .iter()
            .enumerate()
            .any(|(i, c)| i != max_mode && c.norm() > 0.0);
        if !has_mode {
            return Err(PegError::InvalidCurve(
                "need a nonzero coefficient with k != 0".into(),
            ));
        }
        Ok(Self { max_mode, coeffs })
    }

    /// Builds a curve from `(k, c_k)` pairs; unspecified modes are zero.
    pub fn from_modes(modes: &[(i64, Complex64)]) -> Result<Self> {
        let m = modes.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * m + 1];
        for &(k, c) in modes {
            coeffs[(k + m as i64) as usize] += c;
        }
        Self::new(m, coeffs)
    }

    /// `a cos t + i b sin t`.
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(PegError::NonPositiveAxis { a, b });
        }
        Self::new(
            1,
            vec![
                Complex64::new((a - b) / 2.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new((a + b) / 2.0, 0.0),
            ],
        )
    }

    pub fn unit_circle() -> Self {
        Self::ellipse(1.0, 1.0).expect("unit circle")
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of mode `k`, zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let m = self.max_mode as i64;
        if k.abs() > m {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + m) as usize]
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.eval_with_deriv(t).0
    }

    /// `(gamma(t), gamma'(t))` in one pass over the modes.
    pub fn eval_with_deriv(&self, t: f64) -> (Complex64, Complex64) {
        let m = self.max_mode;
        let (s, c) = t.sin_cos();
        let w = Complex64::new(c, s);
        let mut pos = self.coeffs[m];
        let mut vel = Complex64::new(0.0, 0.0);
        let mut wk = Complex64::new(1.0, 0.0);
        for k in 1..=m {
            wk *= w;
            let wk_inv = wk.conj();
            let cp = self.coeffs[m + k];
            let cn = self.coeffs[m - k];
            pos += cp * wk + cn * wk_inv;
            let kf = k as f64;
            // i k (c_k w^k - c_{-k} w^{-k})
            let d = cp * wk - cn * wk_inv;
            vel += Complex64::new(-d.im * kf, d.re * kf);
        }
        (pos, vel)
    }

    /// `sum (ik)^order c_k e^{ikt}` for `order` in {1, 2}.
    pub fn deriv(&self, t: f64, order: u32) -> Result<Complex64> {
        match order {
            1 => Ok(self.eval_with_deriv(t).1),
            2 => {
                let m = self.max_mode as i64;
                let mut acc = Complex64::new(0.0, 0.0);
                for k in -m..=m {
                    let (s, c) = (k as f64 * t).sin_cos();
                    acc += self.coeff(k) * Complex64::new(c, s) * (-((k * k) as f64));
                }
                Ok(acc)
            }
            _ => Err(PegError::UnsupportedOrder(order)),
        }
    }

    /// Adds seeded random complex coefficients of modulus at most
    /// `amplitude` to every mode `|k| <= max_mode`.
    ///
    /// The generator is ChaCha8 seeded with `seed_from_u64(seed)`. Modes are
    /// visited from `-max_mode` to `max_mode`; each draws two 53-bit uniforms
    /// `u, v` (top bits of `next_u64`) and adds `amplitude * u * e^{2 pi i v}`.
    pub fn perturb(&self, amplitude: f64, max_mode: usize, seed: u64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(PegError::InvalidCurve(format!("bad amplitude {amplitude}")));
        }
        if amplitude == 0.0 {
            return Ok(self.clone());
        }
        let m = self.max_mode.max(max_mode);
        let mut coeffs: Vec<Complex64> = (-(m as i64)..=m as i64).map(|k| self.coeff(k)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        for k in -(max_mode as i64)..=max_mode as i64 {
            let r = amplitude * uniform();
            let theta = TAU * uniform();
            coeffs[(k + m as i64) as usize] += Complex64::from_polar(r, theta);
        }
        let curve = Self::new(m, coeffs)?;
        let verdict = curve.check_embedded(1024);
        if !verdict.embedded {
            let w = verdict.worst_pair.unwrap_or(WorstPair { s: 0.0, t: 0.0, distance: 0.0 });
            return Err(PegError::NotEmbedded { s: w.s, t: w.t, distance: w.distance });
        }
        Ok(curve)
    }

    /// Largest sampled chord length (256 samples).
    pub fn diameter(&self) -> f64 {
        let pts = self.samples(256);
        let mut best: f64 = 0.0;
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                best = best.max((p - q).norm());
            }
        }
        best
    }

    /// Axis-aligned bounding box `(min_x, min_y, max_x, max_y)` from samples.
    pub fn bounding_box(&self, n: usize) -> (f64, f64, f64, f64) {
        self.samples(n).iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p.re), b.min(p.im), c.max(p.re), d.max(p.im)),
        )
    }

    pub fn samples(&self, n: usize) -> Vec<Complex64> {
        (0..n).map(|i| self.eval(TAU * i as f64 / n as f64)).collect()
    }

    /// Signed area enclosed (positive for counterclockwise parameterization).
    pub fn signed_area(&self) -> f64 {
        // area = pi * sum k |c_k|^2
        let m = self.max_mode as i64;
        (-m..=m).map(|k| k as f64 * self.coeff(k).norm_sqr()).sum::<f64>() * PI
    }

    /// Short stable hash of the coefficient list.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.max_mode as u64).to_le_bytes());
        for c in &self.coeffs {
            h.update(c.re.to_le_bytes());
            h.update(c.im.to_le_bytes());
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Sampling-based embedding check with local refinement.
    ///
    /// Pairs of samples at circle distance at least [`EMBED_DELTA`] are
    /// scanned for local minima of the chord length; the closest candidates
    /// are refined by Levenberg-Marquardt on `gamma(s) - gamma(t)`. The curve
    /// is declared non-embedded if a refined pair comes within
    /// `EMBED_TOL_REL * diameter`, or if the velocity vanishes at a sample.
    /// A pass is evidence, not proof.
    pub fn check_embedded(&self, n_samples: usize) -> EmbeddingVerdict {
        let n = n_samples.max(64);
        let diam = self.diameter();
        let tol = EMBED_TOL_REL * diam;
        let step = TAU / n as f64;
        let ts: Vec<f64> = (0..n).map(|i| step * i as f64).collect();
        let pv: Vec<(Complex64, Complex64)> = ts.iter().map(|&t| self.eval_with_deriv(t)).collect();

        if let Some((i, _)) = pv
            .iter()
            .enumerate()
            .find(|(_, (_, v))| v.norm() <= 1e-9 * diam.max(1e-300))
        {
            return EmbeddingVerdict {
                embedded: false,
                worst_pair: Some(WorstPair { s: ts[i], t: ts[i], distance: 0.0 }),
                samples_used: n,
            };
        }

        let min_sep = (EMBED_DELTA / step).ceil() as usize;
        let dist = |i: usize, j: usize| (pv[i % n].0 - pv[j % n].0).norm();
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if (j - i).min(n - (j - i)) < min_sep {
                    continue;
                }
                let d = dist(i, j);
                let is_min = [(1, 0), (n - 1, 0), (0, 1), (0, n - 1), (1, 1), (n - 1, n - 1)]
                    .iter()
                    .all(|&(di, dj)| d <= dist(i + di, j + dj));
                if is_min {
                    candidates.push((d, i, j));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut worst: Option<WorstPair> = None;
        for &(d, i, j) in candidates.iter().take(24) {
            let (s, t, dr) = self.refine_pair(ts[i], ts[j]);
            let pair = if circle_distance(s, t) >= EMBED_DELTA * 0.5 && dr < d {
                WorstPair { s: wrap_angle(s), t: wrap_angle(t), distance: dr }
            } else {
                WorstPair { s: ts[i], t: ts[j], distance: d }
            };
            if worst.as_ref().is_none_or(|w| pair.distance < w.distance) {
                worst = Some(pair);
            }
        }
        let embedded = worst.as_ref().is_none_or(|w| w.distance >= tol);
        let report = !embedded || worst.as_ref().is_some_and(|w| w.distance < EMBED_REPORT_REL * diam);
        EmbeddingVerdict {
            embedded,
            worst_pair: if report { worst } else { None },
            samples_used: n,
        }
    }

    fn refine_pair(&self, mut s: f64, mut t: f64) -> (f64, f64, f64) {
        let mut lambda = 1e-6;
        let (ps, vs) = self.eval_with_deriv(s);
        let (pt, vt) = self.eval_with_deriv(t);
        let mut f = ps - pt;
        let (mut js, mut jt) = (vs, -vt);
        for _ in 0..60 {
            // normal equations of the 2x2 least-squares problem
            let a11 = js.norm_sqr() + lambda;
            let a22 = jt.norm_sqr() + lambda;
            let a12 = js.re * jt.re + js.im * jt.im;
            let g1 = js.re * f.re + js.im * f.im;
            let g2 = jt.re * f.re + jt.im * f.im;
            let det = a11 * a22 - a12 * a12;
            if det.abs() < 1e-300 {
                break;
            }
            let ds = -(a22 * g1 - a12 * g2) / det;
            let dt = -(a11 * g2 - a12 * g1) / det;
            let (ns, nt) = (s + ds, t + dt);
            let (ps, vs) = self.eval_with_deriv(ns);
            let (pt, vt) = self.eval_with_deriv(nt);
            let nf = ps - pt;
            if nf.norm() < f.norm() {
                s = ns;
                t = nt;
                f = nf;
                js = vs;
                jt = -vt;
                lambda *= 0.3;
                if ds.abs() + dt.abs() < 1e-15 {
                    break;
                }
            } else {
                lambda *= 10.0;
                if lambda > 1e12 {
                    break;
                }
            }
        }
        (s, t, f.norm())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstPair {
    pub s: f64,
    pub t: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVerdict {
    pub embedded: bool,
    pub worst_pair: Option<WorstPair>,
    pub samples_used: usize,
}

/// Maps an angle into `[0, 2pi)`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference `a - b` wrapped into `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Geodesic distance on the unit circle.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    angle_diff(a, b).abs()
}
