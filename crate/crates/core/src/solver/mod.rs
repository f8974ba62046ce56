//! Multistart search for all off-diagonal zeros of a residual system,
//! followed by deduplication, transversality classification, symmetry
//! quotient and degeneracy diagnostics.

mod index;
mod newton;

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::time::Instant;

use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use index::TorusIndex;
pub use newton::{newton, newton_step, NewtonOptions, NewtonOutcome};

use crate::curve::FourierCurve;
use crate::error::{PegError, Result};
use crate::geometry::{extract_quad, extract_rectangle, point_l, point_t2, ComplexPair, Peg, DEFAULT_GEOM_TOL};
use crate::intersection::{orientation_sign, TopologyBlock};
use crate::residual::{singular_values, Problem, TorusQuadruple};

/// Samples used by the embedding check that guards [`solve`].
pub const EMBED_SAMPLES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Seeds per torus axis; the grid has `grid_per_axis^4` points.
    pub grid_per_axis: usize,
    pub newton_max_iters: usize,
    /// Residual-norm threshold for accepting a zero.
    pub newton_tol: f64,
    /// Torus distance under which two zeros are the same.
    pub cluster_radius: f64,
    /// Minimum pairwise parameter gap of an accepted zero.
    pub diag_exclusion: f64,
    /// Transverse iff `sv_min / sv_max` is at least this.
    pub sv_ratio_threshold: f64,
    /// Non-transverse zeros needed to call a chain a family.
    pub degenerate_chain_min: usize,
    /// Chain adjacency radius in units of `cluster_radius`.
    pub chain_link_factor: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            grid_per_axis: 24,
            newton_max_iters: 60,
            newton_tol: 1e-11,
            cluster_radius: 1e-6,
            diag_exclusion: 0.05,
            sv_ratio_threshold: 1e-6,
            degenerate_chain_min: 8,
            chain_link_factor: 5e4,
        }
    }
}

impl SolveConfig {
    pub fn with_grid(grid_per_axis: usize) -> Self {
        Self { grid_per_axis, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.grid_per_axis > 0
            && self.newton_max_iters > 0
            && self.newton_tol > 0.0
            && self.cluster_radius > 0.0
            && self.diag_exclusion > 0.0
            && self.sv_ratio_threshold > 0.0
            && self.degenerate_chain_min > 0
            && self.chain_link_factor > 0.0;
        if !positive {
            return Err(PegError::InvalidConfig("all settings must be positive".into()));
        }
        if self.newton_tol >= self.cluster_radius {
            return Err(PegError::InvalidConfig("newton_tol must be below cluster_radius".into()));
        }
        if self.diag_exclusion <= self.cluster_radius {
            return Err(PegError::InvalidConfig("diag_exclusion must exceed cluster_radius".into()));
        }
        Ok(())
    }

    pub fn chain_link(&self) -> f64 {
        self.cluster_radius * self.chain_link_factor
    }

    pub(crate) fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            max_iters: self.newton_max_iters,
            tol: self.newton_tol,
            diag_abort: 0.5 * self.diag_exclusion,
        }
    }
}

/// A refined zero of the residual system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub quadruple: TorusQuadruple,
    /// The intersection point in C^2.
    pub point: ComplexPair,
    pub residual_norm: f64,
    pub sv_min: f64,
    pub sv_max: f64,
    pub transverse: bool,
    /// Orientation sign; absent when the zero is not transverse.
    pub sign: Option<i8>,
}

/// Symmetry orbit of solutions describing one geometric peg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PegOrbit {
    pub members: Vec<Solution>,
    pub peg: Peg,
    /// Common sign of the members, absent if they disagree.
    pub orbit_sign: Option<i8>,
    pub representative: TorusQuadruple,
}

impl PegOrbit {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn sign_sum(&self) -> i64 {
        self.members.iter().map(|m| m.sign.unwrap_or(0) as i64).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DegeneracyVerdict {
    pub family: bool,
    /// Number of chains long enough to count as families.
    pub family_count: usize,
    /// Points of the longest chain.
    pub chain: Vec<TorusQuadruple>,
    /// Non-transverse zeros that are not part of a family.
    pub isolated: Vec<Solution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: Problem,
    pub config: SolveConfig,
    pub curve_fingerprint: String,
    pub orbits: Vec<PegOrbit>,
    pub raw_solution_count: usize,
    pub signed_total: i64,
    pub degenerate_family: bool,
    pub degeneracy: DegeneracyVerdict,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyBlock>,
}

impl SolveReport {
    pub fn solutions(&self) -> impl Iterator<Item = &Solution> {
        self.orbits.iter().flat_map(|o| o.members.iter())
    }
}

/// Uniform `n^4` seed grid at cell centres, minus the `delta`-neighbourhood
/// of the small diagonal.
pub fn grid_seeds(n: usize, delta: f64) -> Vec<TorusQuadruple> {
    let h = TAU / n as f64;
    let axis: Vec<f64> = (0..n).map(|k| h * (k as f64 + 0.5)).collect();
    let mut seeds = Vec::with_capacity(n.pow(4));
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                for &d in &axis {
                    let q = TorusQuadruple::new([a, b, c, d]);
                    if q.diag_distance() >= delta {
                        seeds.push(q);
                    }
                }
            }
        }
    }
    seeds
}

/// Finds all zeros reachable from a uniform seed grid.
pub fn solve(curve: &FourierCurve, problem: &Problem, config: &SolveConfig) -> Result<SolveReport> {
    problem.validate()?;
    config.validate()?;
    let verdict = curve.check_embedded(EMBED_SAMPLES);
    if !verdict.embedded {
        let w = verdict.worst_pair.expect("non-embedded verdict carries a pair");
        return Err(PegError::NotEmbedded { s: w.s, t: w.t, distance: w.distance });
    }
    let seeds = grid_seeds(config.grid_per_axis, config.diag_exclusion);
    solve_from_seeds(curve, problem, config, &seeds)
}

/// Runs Newton from the given seeds and assembles a report. No embedding
/// check is made.
pub fn solve_from_seeds(
    curve: &FourierCurve,
    problem: &Problem,
    config: &SolveConfig,
    seeds: &[TorusQuadruple],
) -> Result<SolveReport> {
    problem.validate()?;
    config.validate()?;
    let started = Instant::now();
    let opts = config.newton_options();
    let outcomes: Vec<NewtonOutcome> = seeds
        .par_iter()
        .map(|s| newton(*s, &opts, |q| problem.system(curve, q)))
        .collect();

    let mut accepted: Vec<(f64, TorusQuadruple)> = outcomes
        .iter()
        .filter(|o| o.converged && o.q.min_gap() >= config.diag_exclusion)
        .filter_map(|o| {
            // re-evaluate independently of the iteration state
            let r = problem.residual(curve, &o.q).norm;
            (r <= config.newton_tol).then_some((r, o.q))
        })
        .collect();
    sort_candidates(&mut accepted);
    let distinct = cluster(&accepted, config.cluster_radius);

    let classified: Vec<Solution> = distinct
        .par_iter()
        .map(|(r, q)| build_solution(curve, problem, config, *q, *r))
        .collect();
    let (transverse, degenerate): (Vec<Solution>, Vec<Solution>) =
        classified.into_iter().partition(|s| s.transverse);

    let degeneracy = detect_degenerate_family(&degenerate, config);
    let orbits = quotient_symmetry(curve, problem, transverse, config)?;

    let raw_solution_count = orbits.iter().map(PegOrbit::size).sum::<usize>() + degeneracy.isolated.len();
    let signed_total = orbits.iter().map(PegOrbit::sign_sum).sum();
    let mut warnings = Vec::new();
    if orbits.is_empty() && !degeneracy.family && matches!(problem, Problem::Rectangle { .. }) {
        warnings.push(
            "no off-diagonal solutions found; inscribed rectangles always exist, so the seed grid is too coarse"
                .to_string(),
        );
    }
    if !degeneracy.isolated.is_empty() {
        warnings.push(format!("{} isolated non-transverse solutions", degeneracy.isolated.len()));
    }
    Ok(SolveReport {
        problem: *problem,
        config: config.clone(),
        curve_fingerprint: curve.fingerprint(),
        orbits,
        raw_solution_count,
        signed_total,
        degenerate_family: degeneracy.family,
        degeneracy,
        warnings,
        timing_ms: Some(started.elapsed().as_secs_f64() * 1e3),
        topology: None,
    })
}

fn sort_candidates(c: &mut [(f64, TorusQuadruple)]) {
    c.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.lex_cmp(&b.1)));
}

/// Greedy clustering of pre-sorted candidates: a candidate is kept unless a
/// kept one lies within `radius`.
fn cluster(sorted: &[(f64, TorusQuadruple)], radius: f64) -> Vec<(f64, TorusQuadruple)> {
    let mut index = TorusIndex::new(radius);
    let mut kept = Vec::new();
    for &(r, q) in sorted {
        if index.within(&q, radius).is_empty() {
            index.insert(q);
            kept.push((r, q));
        }
    }
    kept
}

pub(crate) fn ambient_point(curve: &FourierCurve, problem: &Problem, q: &TorusQuadruple) -> ComplexPair {
    let [t1, t2, t3, t4] = q.angles();
    match problem {
        Problem::Rectangle { .. } => point_l(curve, t1, t2),
        Problem::Quad { data } => point_t2(curve, data, t3, t4),
    }
}

fn build_solution(
    curve: &FourierCurve,
    problem: &Problem,
    config: &SolveConfig,
    q: TorusQuadruple,
    residual_norm: f64,
) -> Solution {
    let sol = Solution {
        quadruple: q,
        point: ambient_point(curve, problem, &q),
        residual_norm,
        sv_min: 0.0,
        sv_max: 0.0,
        transverse: false,
        sign: None,
    };
    let mut sol = classify_transversality(sol, &problem.jacobian(curve, &q), config.sv_ratio_threshold);
    if sol.transverse {
        sol.sign = orientation_sign(curve, problem, &q).ok();
        if sol.sign.is_none() {
            sol.transverse = false;
        }
    }
    sol
}

/// Records singular values and the transversality verdict
/// `sv_min / sv_max >= threshold`.
pub fn classify_transversality(mut solution: Solution, jacobian: &Matrix4<f64>, threshold: f64) -> Solution {
    let sv = singular_values(jacobian);
    solution.sv_max = sv[0];
    solution.sv_min = sv[3];
    solution.transverse = sv[0] > 0.0 && sv[3] / sv[0] >= threshold;
    if !solution.transverse {
        solution.sign = None;
    }
    solution
}

/// Groups non-transverse zeros into chains under the adjacency radius
/// `cluster_radius * chain_link_factor`. Chains with at least
/// `degenerate_chain_min` points are families; the rest are isolated.
pub fn detect_degenerate_family(solutions: &[Solution], config: &SolveConfig) -> DegeneracyVerdict {
    if solutions.is_empty() {
        return DegeneracyVerdict::default();
    }
    let link = config.chain_link();
    // thin to a quarter of the link so the chain stays short
    let mut cands: Vec<(f64, TorusQuadruple)> = solutions.iter().map(|s| (s.residual_norm, s.quadruple)).collect();
    sort_candidates(&mut cands);
    let thinned = cluster(&cands, 0.25 * link);
    let by_quad: BTreeMap<[u64; 4], &Solution> = solutions
        .iter()
        .map(|s| (s.quadruple.angles().map(f64::to_bits), s))
        .collect();

    let mut index = TorusIndex::new(link);
    for (_, q) in &thinned {
        index.insert(*q);
    }
    let mut uf = UnionFind::new(thinned.len());
    for (i, (_, q)) in thinned.iter().enumerate() {
        for j in index.within(q, link) {
            uf.union(i, j);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..thinned.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut verdict = DegeneracyVerdict::default();
    let mut longest: Vec<usize> = Vec::new();
    for members in groups.values() {
        if members.len() >= config.degenerate_chain_min {
            verdict.family_count += 1;
            if members.len() > longest.len() {
                longest = members.clone();
            }
        } else {
            for &i in members {
                let key = thinned[i].1.angles().map(f64::to_bits);
                if let Some(s) = by_quad.get(&key) {
                    verdict.isolated.push((*s).clone());
                }
            }
        }
    }
    verdict.family = verdict.family_count > 0;
    let mut chain: Vec<TorusQuadruple> = longest.iter().map(|&i| thinned[i].1).collect();
    chain.sort_by(|a, b| a.lex_cmp(b));
    verdict.chain = chain;
    verdict
        .isolated
        .sort_by(|a, b| a.quadruple.lex_cmp(&b.quadruple));
    verdict
}

type Action = fn(&TorusQuadruple) -> TorusQuadruple;

/// Symmetry group acting on the zero set, as a generator plus orbit size.
fn symmetry(problem: &Problem) -> (Option<Action>, usize) {
    match problem {
        Problem::Rectangle { .. } if problem.is_right_angle() => (Some(TorusQuadruple::sigma), 4),
        Problem::Rectangle { .. } => (Some(TorusQuadruple::tau), 2),
        Problem::Quad { data } if data.is_rectangle() => (Some(TorusQuadruple::tau), 2),
        Problem::Quad { .. } => (None, 1),
    }
}

/// Partitions transverse solutions into symmetry orbits: `tau` orbits of
/// size 2 for rectangles, `sigma` orbits of size 4 under the right-angle
/// flag, singletons for quadrilaterals with `s != 1/2` or `t != 1/2`.
///
/// A missing partner is looked for by Newton from the exact symmetric image
/// before an orbit-integrity error is raised.
pub fn quotient_symmetry(
    curve: &FourierCurve,
    problem: &Problem,
    solutions: Vec<Solution>,
    config: &SolveConfig,
) -> Result<Vec<PegOrbit>> {
    let (generator, orbit_size) = symmetry(problem);
    let mut sols = solutions;
    let mut index = TorusIndex::new(config.cluster_radius);
    for s in &sols {
        index.insert(s.quadruple);
    }
    let mut uf = UnionFind::new(sols.len());
    if let Some(g) = generator {
        let opts = NewtonOptions { diag_abort: 0.0, ..config.newton_options() };
        let mut i = 0;
        while i < sols.len() {
            let image = g(&sols[i].quadruple);
            let mut hits = index.within(&image, config.cluster_radius);
            if hits.is_empty() {
                let out = newton(image, &opts, |q| problem.system(curve, q));
                let r = problem.residual(curve, &out.q).norm;
                if !(out.converged && r <= config.newton_tol && out.q.distance(&image) <= config.cluster_radius) {
                    return Err(PegError::OrbitIntegrity(format!(
                        "symmetric partner of {:?} not found",
                        sols[i].quadruple.angles()
                    )));
                }
                let partner = build_solution(curve, problem, config, out.q, r);
                if !partner.transverse {
                    return Err(PegError::OrbitIntegrity("symmetric partner is not transverse".into()));
                }
                hits = vec![index.insert(partner.quadruple)];
                sols.push(partner);
                uf.grow(sols.len());
            }
            for h in hits {
                uf.union(i, h);
            }
            i += 1;
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..sols.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut orbits = Vec::with_capacity(groups.len());
    for members in groups.values() {
        if members.len() != orbit_size {
            return Err(PegError::OrbitIntegrity(format!(
                "orbit of size {} (expected {orbit_size})",
                members.len()
            )));
        }
        let mut members: Vec<Solution> = members.iter().map(|&i| sols[i].clone()).collect();
        members.sort_by(|a, b| a.quadruple.lex_cmp(&b.quadruple));
        let representative = members[0].quadruple;
        let peg = match problem {
            Problem::Rectangle { phi } => extract_rectangle(curve, phi.value(), &representative, DEFAULT_GEOM_TOL)?,
            Problem::Quad { data } => extract_quad(curve, data, &representative, DEFAULT_GEOM_TOL)?,
        };
        let first = members[0].sign;
        let orbit_sign = if members.iter().all(|m| m.sign == first) { first } else { None };
        orbits.push(PegOrbit { members, peg, orbit_sign, representative });
    }
    orbits.sort_by(|a, b| a.representative.lex_cmp(&b.representative));
    Ok(orbits)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn grow(&mut self, n: usize) {
        let start = self.parent.len();
        self.parent.extend(start..n);
    }

    pub(crate) fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
