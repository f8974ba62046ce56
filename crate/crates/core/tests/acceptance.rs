//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::Matrix4;
use num_complex::Complex64;
use peglab::curve::angle_diff;
use peglab::geometry::recompute_data;
use peglab::intersection::{euler_bookkeeping, perturb_diagonal_count};
use peglab::{solve, FourierCurve, Problem, QuadData, SolveConfig, SolveReport, TorusQuadruple};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BATCH_GRID: usize = 16;
const FAMILY_PHIS: [f64; 4] = [0.3, 0.7, 1.1, 1.5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Reports shared between criteria.
#[derive(Default)]
struct Runs {
    oracle: Vec<SolveReport>,
    square: Vec<SolveReport>,
    family: Vec<SolveReport>,
    family_errors: Vec<String>,
}

fn ellipse() -> FourierCurve {
    FourierCurve::ellipse(2.0, 1.0).unwrap()
}

fn oracle_vertices(a: f64, b: f64, u: f64) -> [Complex64; 4] {
    let (x, y) = (a * u.cos(), b * u.sin());
    [Complex64::new(x, y), Complex64::new(-x, y), Complex64::new(-x, -y), Complex64::new(x, -y)]
}

/// Largest distance from any vertex of either set to the nearest vertex of
/// the other.
fn set_error(found: &[Complex64; 4], expected: &[Complex64; 4]) -> f64 {
    let one = |x: &[Complex64; 4], y: &[Complex64; 4]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(found, expected).max(one(expected, found))
}

fn family_curves() -> Vec<FourierCurve> {
    (0..20).map(|i| ellipse().perturb(0.02, 5, 1000 + i).unwrap()).collect()
}

fn criterion_1(runs: &mut Runs) -> Outcome {
    let (a, b) = (2.0, 1.0);
    let curve = ellipse();
    let cfg = SolveConfig::with_grid(24);
    let mut worst_err: f64 = 0.0;
    let mut worst_time: f64 = 0.0;
    let mut problems = Vec::new();
    for phi in [0.3, 0.6, 0.9, 1.2, 1.5] {
        let start = Instant::now();
        let report = match solve(&curve, &Problem::rectangle(phi), &cfg) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("phi {phi}: {e}")),
        };
        worst_time = worst_time.max(start.elapsed().as_secs_f64());
        if report.orbits.len() != 2 {
            problems.push(format!("phi {phi}: {} orbits", report.orbits.len()));
        }
        let half: f64 = phi / 2.0;
        for u in [(a / b * half.tan()).atan(), (a / b / half.tan()).atan()] {
            let expected = oracle_vertices(a, b, u);
            let err = report
                .orbits
                .iter()
                .map(|o| set_error(&o.peg.vertices, &expected))
                .fold(f64::INFINITY, f64::min);
            worst_err = worst_err.max(err);
        }
        runs.oracle.push(report);
    }
    let pass = problems.is_empty() && worst_err <= 1e-8 && worst_time < 30.0;
    outcome(
        pass,
        format!("2 orbits at 5 angles: {}, max vertex error {worst_err:.1e}, slowest solve {worst_time:.2}s{}", problems.is_empty(), problems.join("; ")),
    )
}

fn criterion_2(runs: &mut Runs) -> Outcome {
    let report = match solve(&ellipse(), &Problem::square(), &SolveConfig::with_grid(24)) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let c = 2.0 / 5f64.sqrt();
    let expected = [Complex64::new(c, c), Complex64::new(-c, c), Complex64::new(-c, -c), Complex64::new(c, -c)];
    let one_orbit_of_four = report.orbits.len() == 1 && report.orbits[0].size() == 4 && report.raw_solution_count == 4;
    let err = report.orbits.first().map_or(f64::INFINITY, |o| set_error(&o.peg.vertices, &expected));
    runs.square.push(report);
    outcome(one_orbit_of_four && err <= 1e-8, format!("one orbit of 4: {one_orbit_of_four}, vertex error {err:.1e}"))
}

fn criterion_3(runs: &mut Runs) -> Outcome {
    let cfg = SolveConfig::with_grid(BATCH_GRID);
    let mut degenerate = 0;
    let mut min_orbits = usize::MAX;
    for (i, curve) in family_curves().iter().enumerate() {
        for phi in FAMILY_PHIS {
            match solve(curve, &Problem::rectangle(phi), &cfg) {
                Ok(r) => {
                    if r.degenerate_family || !r.degeneracy.isolated.is_empty() {
                        degenerate += 1;
                        runs.family_errors.push(format!("curve {i} phi {phi}: degenerate"));
                    } else {
                        min_orbits = min_orbits.min(r.orbits.len());
                    }
                    runs.family.push(r);
                }
                Err(e) => runs.family_errors.push(format!("curve {i} phi {phi}: {e}")),
            }
        }
    }
    let errors = runs.family_errors.len() - degenerate;
    outcome(
        degenerate == 0 && errors == 0 && min_orbits >= 2,
        format!(
            "{} runs, min orbit count {min_orbits}, degenerate runs {degenerate}, failed runs {errors}{}",
            runs.family.len(),
            if runs.family_errors.is_empty() { String::new() } else { format!(": {}", runs.family_errors.join("; ")) }
        ),
    )
}

/// Same-sign check on tau-pairs: whole orbits for C2, pairs inside C4 orbits.
fn tau_pairs_agree(report: &SolveReport) -> bool {
    report.orbits.iter().all(|o| {
        o.members.iter().all(|m| {
            let image = m.quadruple.tau();
            o.members
                .iter()
                .filter(|n| n.quadruple.distance(&image) <= report.config.cluster_radius)
                .all(|n| n.sign == m.sign && n.sign.is_some())
        }) && (report.problem.is_right_angle() || o.orbit_sign.is_some())
    })
}

fn criterion_4(runs: &Runs) -> Outcome {
    let all: Vec<&SolveReport> = runs.oracle.iter().chain(&runs.square).chain(&runs.family).collect();
    let nondegenerate: Vec<&&SolveReport> = all.iter().filter(|r| !r.degenerate_family).collect();
    let nonzero = nondegenerate.iter().filter(|r| r.signed_total != 0).count();
    let independent = nondegenerate
        .iter()
        .filter(|r| r.solutions().map(|s| s.sign.unwrap_or(0) as i64).sum::<i64>() != r.signed_total)
        .count();
    let disagree = nondegenerate.iter().filter(|r| !tau_pairs_agree(r)).count();
    let square_mixed = runs.square.iter().all(|r| r.orbits.iter().all(|o| o.sign_sum() == 0));
    outcome(
        !nondegenerate.is_empty() && nonzero == 0 && independent == 0 && disagree == 0 && square_mixed,
        format!(
            "{} runs, nonzero totals {nonzero}, recount mismatches {independent}, sign disagreements within tau-pairs {disagree}, square orbit sums to 0: {square_mixed}",
            nondegenerate.len()
        ),
    )
}

fn criterion_5(runs: &Runs) -> Outcome {
    let mut bad = Vec::new();
    for (k, r) in runs.family.iter().enumerate() {
        for g in [1, -1] {
            match euler_bookkeeping(r, g) {
                Ok(e) if e.chi == 0 && !e.contradiction => {}
                Ok(e) => bad.push(format!("run {k} sign {g}: chi {}", e.chi)),
                Err(err) => bad.push(format!("run {k} sign {g}: {err}")),
            }
        }
    }
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/single_orbit_report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_peg"))
        .args(["topology", "--report"])
        .arg(&fixture)
        .output()
        .expect("peg runs");
    let code = out.status.code();
    let chi = serde_json::from_slice::<serde_json::Value>(&out.stdout)
        .ok()
        .and_then(|v| v["topology"]["euler_chi"].as_i64());
    let contradiction = code == Some(3) && chi.is_some_and(|c| c.abs() == 2);
    outcome(
        bad.is_empty() && contradiction && runs.family.len() == 80,
        format!(
            "chi = 0 on {} family runs (both global signs): {}, synthetic single orbit: exit {:?}, chi {:?}{}",
            runs.family.len(),
            bad.is_empty(),
            code,
            chi,
            if bad.is_empty() { String::new() } else { format!(": {}", bad.join("; ")) }
        ),
    )
}

fn criterion_6() -> Outcome {
    let phi = FRAC_PI_4;
    let report = match solve(&FourierCurve::unit_circle(), &Problem::rectangle(phi), &SolveConfig::with_grid(24)) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let chain = &report.degeneracy.chain;
    if !report.degenerate_family || chain.len() < 50 {
        return outcome(false, format!("family {}, chain length {}", report.degenerate_family, chain.len()));
    }
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let [t1, t2, t3, t4] = chain[k * chain.len() / 50].angles();
        worst = worst
            .max(angle_diff(t2, t1 + PI).abs())
            .max(angle_diff(t4, t3 + PI).abs())
            .max(angle_diff(t1, t3 + phi).abs());
    }
    outcome(worst < 1e-6, format!("family found, chain of {} points, max parameter error {worst:.1e} at 50 samples", chain.len()))
}

fn criterion_7() -> Outcome {
    let cfg = SolveConfig::with_grid(BATCH_GRID);
    let mut min_pegs = usize::MAX;
    let mut worst_residual: f64 = 0.0;
    let mut worst_roundtrip: f64 = 0.0;
    let mut odd = 0;
    let mut errors = Vec::new();
    for i in 0..10 {
        let curve = ellipse().perturb(0.02, 5, 2000 + i).unwrap();
        for (s, t, phi) in [(0.3, 0.5, 1.0), (0.25, 0.4, 2.0)] {
            let data = QuadData::new(s, t, phi).unwrap();
            let problem = Problem::quad(data);
            let report = match solve(&curve, &problem, &cfg) {
                Ok(r) => r,
                Err(e) => {
                    errors.push(format!("curve {i} ({s},{t},{phi}): {e}"));
                    continue;
                }
            };
            min_pegs = min_pegs.min(report.orbits.len());
            if report.signed_total % 2 != 0 || report.orbits.len() % 2 != 0 {
                odd += 1;
            }
            for o in &report.orbits {
                for m in &o.members {
                    worst_residual = worst_residual.max(problem.residual(&curve, &m.quadruple).norm);
                }
                match recompute_data(&o.peg) {
                    Ok(d) => {
                        let e = (d.s - s).abs().max((d.t - t).abs()).max((d.phi - phi).abs());
                        worst_roundtrip = worst_roundtrip.max(e);
                    }
                    Err(e) => errors.push(format!("curve {i}: {e}")),
                }
            }
        }
    }
    outcome(
        errors.is_empty() && min_pegs >= 2 && worst_residual <= 1e-10 && worst_roundtrip <= 1e-8 && odd == 0,
        format!(
            "min pegs {min_pegs}, max residual {worst_residual:.1e}, max round-trip error {worst_roundtrip:.1e}, odd counts {odd}{}",
            if errors.is_empty() { String::new() } else { format!(": {}", errors.join("; ")) }
        ),
    )
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for case in 0..100u64 {
        let a = 1.0 + 2.0 * unit(&mut rng);
        let b = 0.5 + 1.5 * unit(&mut rng);
        let curve = FourierCurve::ellipse(a, b).unwrap().perturb(0.03 * unit(&mut rng), 5, case).unwrap();
        let problem = match case % 3 {
            0 => Problem::rectangle(0.05 + 1.5 * unit(&mut rng)),
            1 => Problem::square(),
            _ => Problem::quad(
                QuadData::new(0.05 + 0.45 * unit(&mut rng), 0.05 + 0.45 * unit(&mut rng), 0.05 + 3.0 * unit(&mut rng)).unwrap(),
            ),
        };
        let q = TorusQuadruple::new([0; 4].map(|_| TAU * unit(&mut rng)));
        let j = problem.jacobian(&curve, &q);
        let mut fd = Matrix4::zeros();
        for c in 0..4 {
            let mut e = [0.0; 4];
            e[c] = h;
            let plus = problem.residual(&curve, &q.shifted(&e)).as_vector();
            e[c] = -h;
            let minus = problem.residual(&curve, &q.shifted(&e)).as_vector();
            fd.set_column(c, &((plus - minus) / (2.0 * h)));
        }
        worst = worst.max((j - fd).norm() / j.norm());
    }
    outcome(worst <= 1e-6, format!("100 cases, max relative error {worst:.1e}"))
}

fn criterion_9(runs: &Runs) -> Outcome {
    let family = family_curves();
    let mut worst_tau: f64 = 0.0;
    let mut checked = 0;
    for (i, r) in runs.oracle.iter().chain(&runs.family).enumerate() {
        let curve = if i < runs.oracle.len() {
            ellipse()
        } else {
            family[(i - runs.oracle.len()) / FAMILY_PHIS.len()].clone()
        };
        assert_eq!(curve.fingerprint(), r.curve_fingerprint);
        for s in r.solutions() {
            worst_tau = worst_tau.max(r.problem.residual(&curve, &s.quadruple.tau()).norm);
            checked += 1;
        }
    }
    let mut worst_sigma: f64 = 0.0;
    let mut sigma_order = true;
    for r in &runs.square {
        for s in r.solutions() {
            let q = s.quadruple;
            worst_tau = worst_tau.max(r.problem.residual(&ellipse(), &q.tau()).norm);
            worst_sigma = worst_sigma.max(r.problem.residual(&ellipse(), &q.sigma()).norm);
            sigma_order &= q.sigma().sigma().sigma().sigma() == q && q.sigma() != q;
            checked += 1;
        }
    }
    outcome(
        worst_tau <= 1e-10 && worst_sigma <= 1e-10 && sigma_order && checked > 0,
        format!("{checked} solutions, max |G(tau q)| {worst_tau:.1e}, max |G(sigma q)| {worst_sigma:.1e}, sigma has order 4: {sigma_order}"),
    )
}

fn criterion_10(runs: &Runs) -> Outcome {
    let curve = ellipse();
    let problem = Problem::rectangle(FRAC_PI_3);
    let cfg = SolveConfig::with_grid(24);
    let report = match runs.oracle.iter().find(|r| r.problem == problem) {
        Some(r) => r.clone(),
        None => match solve(&curve, &problem, &cfg) {
            Ok(r) => r,
            Err(e) => return outcome(false, e.to_string()),
        },
    };
    match perturb_diagonal_count(&curve, &problem, 1e-3, &cfg, &report) {
        Ok(v) => {
            let signs: Vec<i8> = v.zeros.iter().map(|z| z.sign).collect();
            let pass = v.zeros.len() == 2 && signs[0] == -signs[1] && v.total_signed == 0 && report.signed_total == 0;
            outcome(pass, format!("{} near-diagonal zeros with signs {signs:?}, total signed count {}", v.zeros.len(), v.total_signed))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn main() {
    let mut runs = Runs::default();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "ellipse oracle", criterion_1(&mut runs)),
        (2, "unique square", criterion_2(&mut runs)),
        (3, "doubling on a generic family", criterion_3(&mut runs)),
        (4, "signed count zero", criterion_4(&runs)),
        (5, "Euler ledger", criterion_5(&runs)),
        (6, "degeneracy detection", criterion_6()),
        (7, "cyclic quadrilateral doubling", criterion_7()),
        (8, "Jacobian correctness", criterion_8()),
        (9, "symmetry invariance", criterion_9(&runs)),
        (10, "diagonal perturbation count", criterion_10(&runs)),
    ];

    let mut failed = 0;
    for (n, name, o) in &results {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {name}: {verdict} ({})", o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
