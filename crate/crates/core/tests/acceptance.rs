//! Acceptance suite: one PASS/FAIL line per criterion, each at its stated
//! tolerance and runtime budget. Runs without the libtest harness so the
//! lines come out in order and the timings are not contended.
//!
//! Checks listed in `UNATTAINABLE` print FAIL but do not fail the target;
//! each is a claim shown false by its own closed form.

use std::f64::consts::PI;
use std::io::Write;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use calderon_core::matrix::{doi_schur, MatrixOp};
use calderon_core::operators::{calderon_discrete, extremal_reflection, hilbert_discrete};
use calderon_core::optimal_range::{dyadic_power, weak_l1_zero_membership, DEFAULT_DYADIC_DEPTH};
use calderon_core::rearrangement::{mu_seq, DecreasingStep, Seq, StepFunction};
use calderon_core::verify::{
    commutator_functions, lower_bound_inputs, random_decreasing, trial_rng, verify_hilbert_sandwich,
    verify_kolmogorov, verify_mu_domination, verify_s_by_s, verify_weak_type_t, zygmund_function_side, Verdict,
};
use nalgebra::DMatrix;
use num_complex::Complex64;

const SEED: u64 = 20_240_601;

const UNATTAINABLE: &[&str] = &["9-asymptotic"];

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn run(id: &'static str, title: &'static str, budget_s: f64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs_f64(budget_s);
    Outcome {
        id,
        title,
        pass: pass && elapsed < budget,
        detail,
        elapsed,
        budget,
    }
}

fn to_nalgebra(a: &MatrixOp) -> DMatrix<Complex64> {
    let n = a.dim();
    DMatrix::from_fn(n, n, |i, j| a.get(i, j))
}

fn criterion_1() -> (bool, String) {
    let r = verify_weak_type_t(&[8, 16, 32, 64], 100, SEED).expect("suite runs");
    // independent SVD route on the first trial of every size
    let mut worst = 0.0f64;
    for n in [8, 16, 32, 64] {
        let v = MatrixOp::ginibre(n, &mut trial_rng(SEED, n, 0));
        let ours = v.singular_values().unwrap();
        let mut theirs: Vec<f64> = to_nalgebra(&v).singular_values().iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        for (k, s) in theirs.iter().enumerate() {
            worst = worst.max((ours.get(k as i64) - s).abs() / theirs[0]);
        }
    }
    let ok = r.verdict == Verdict::ExactPass && r.trials >= 400 && r.max_ratio <= 10.0 && worst <= 1e-12;
    (
        ok,
        format!(
            "max ‖T V‖_w/‖V‖_1 = {:.4} ≤ 10 over {} trials; SVD vs nalgebra max rel diff {worst:.1e}",
            r.max_ratio, r.trials
        ),
    )
}

fn criterion_2() -> (bool, String) {
    let r = verify_s_by_s(1000, SEED).expect("suite runs");
    (
        r.verdict == Verdict::ExactPass && r.trials == 1000,
        format!("{} steps, {} failures, max S(t)/(4S(2t)) = {:.6}", r.trials, r.failures, r.max_ratio),
    )
}

/// `(2/π) Σ_j μ(j)/(n+2j+1)` and `(1/(n+1))Σ_{k≤n} μ(k) + Σ_{k>n} μ(k)/k`
/// summed directly.
fn lower_bound_oracle(mu: &[f64], n: usize) -> (f64, f64) {
    let h = 2.0 / PI * mu.iter().enumerate().map(|(j, v)| v / (n + 2 * j + 1) as f64).sum::<f64>();
    let head: f64 = mu.iter().take(n + 1).sum::<f64>() / (n + 1) as f64;
    let tail: f64 = mu.iter().enumerate().skip(n + 1).map(|(k, v)| v / k as f64).sum();
    (h, head + tail)
}

fn criterion_3() -> (bool, String) {
    let mut ok = true;
    let mut checked = 0;
    let mut oracle_diff = 0.0f64;
    let mut min_margin = f64::INFINITY;
    for (name, a) in lower_bound_inputs() {
        if name == "zero" {
            continue;
        }
        let c = extremal_reflection(&a);
        let h = hilbert_discrete(&c, 0, 64).unwrap().moduli();
        let sd = calderon_discrete(&mu_seq(&a), 65).unwrap();
        let mu = mu_seq(&a).entries().to_vec();
        for n in (2..=64).step_by(2) {
            let (lhs, rhs) = (h.get(n as i64), sd.get(n as i64) / (2.0 * PI));
            let (oh, os) = lower_bound_oracle(&mu, n);
            oracle_diff = oracle_diff.max((lhs - oh).abs() / oh).max((sd.get(n as i64) - os).abs() / os);
            ok &= lhs >= rhs - 1e-10;
            min_margin = min_margin.min(lhs / rhs);
            checked += 1;
        }
    }
    ok &= oracle_diff <= 1e-12;
    (
        ok,
        format!(
            "{checked} even sites over δ_0/geometric/harmonic/flat; min |H_d c|/((1/2π)S^d μ) = {min_margin:.4}; \
             direct-sum oracle rel diff {oracle_diff:.1e}"
        ),
    )
}

fn criterion_4() -> (bool, String) {
    let r = verify_hilbert_sandwich(100, SEED).expect("suite runs");
    (
        r.verdict == Verdict::ExactPass && r.trials == 100,
        format!("{} steps × 64 points, {} failures, max (1/2π)S/|H| = {:.6}", r.trials, r.failures, r.max_ratio),
    )
}

fn criterion_5() -> (bool, String) {
    let r = verify_mu_domination(&[16, 32, 64, 128], 20, SEED).expect("suite runs");
    let small = r.recorded["pointwise_constant_smallest_size"];
    let suite = r.recorded["pointwise_constant_suite"];
    let recorded = r.recorded.contains_key("submajorization_constant_suite");
    (
        r.verdict == Verdict::RegressionPass && suite <= 2.0 * small && recorded,
        format!(
            "c(n=16) = {small:.4}, c(suite) = {suite:.4} ≤ 2·c(n=16); submajorization c(suite) = {:.4}",
            r.recorded["submajorization_constant_suite"]
        ),
    )
}

fn criterion_6() -> (bool, String) {
    let r = verify_kolmogorov(20, SEED).expect("suite runs");
    let rejected = !weak_l1_zero_membership(&dyadic_power(1.0, 32), DEFAULT_DYADIC_DEPTH).member;
    (
        r.verdict == Verdict::ExactPass && r.trials == 20 && rejected,
        format!(
            "20 dyadic t^(−α) profiles certified on both branches, max ‖y‖_1 = {:.4}; t^(−1) rejected: {rejected}",
            r.recorded["max_construction_l1_norm"]
        ),
    )
}

fn criterion_7() -> (bool, String) {
    let fs = commutator_functions();
    let n = 16;
    let (mut worst_ratio, mut worst_doi, mut worst_route) = (0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    let mut checked = 0;
    for t in 0..200 {
        let mut rng = trial_rng(SEED, n, t);
        let (a, b) = (MatrixOp::gue(n, &mut rng), MatrixOp::gue(n, &mut rng));
        let ab = a.commutator(&b);
        let eig = to_nalgebra(&a).symmetric_eigen();
        let nb = to_nalgebra(&b);
        for f in &fs {
            // f(A) through nalgebra's eigensolver
            let fl = eig.eigenvalues.map(|l| Complex64::new(f.eval(l), 0.0));
            let fa = &eig.eigenvectors * DMatrix::from_diagonal(&fl) * eig.eigenvectors.adjoint();
            let fab = &fa * &nb - &nb * &fa;
            let lhs = fab.norm();
            let rhs = f.lip() * ab.frobenius();
            let via_doi = to_nalgebra(&doi_schur(&a, f, &ab).unwrap());
            let defect = (&via_doi - &fab).norm() / lhs.max(1.0);
            let ours = a.apply_fn(|x| f.eval(x)).unwrap().commutator(&b);
            let route = (&to_nalgebra(&ours) - &fab).norm() / lhs.max(1.0);
            ok &= lhs <= rhs + 1e-10 && defect <= 1e-10;
            worst_ratio = worst_ratio.max(lhs / rhs);
            worst_doi = worst_doi.max(defect);
            worst_route = worst_route.max(route);
            checked += 1;
        }
    }
    (
        ok,
        format!(
            "{checked} (pair, f) cases; max ‖[f(A),B]‖/(Lip·‖[A,B]‖) = {worst_ratio:.4}; DOI identity defect \
             {worst_doi:.1e}; eigensolver route diff {worst_route:.1e}"
        ),
    )
}

/// `∫_0^1 μ(s)(1 + log(1/s)) ds` piece by piece: the primitive of
/// `1 − log s` is `2s − s log s`.
fn zygmund_oracle(mu: &DecreasingStep) -> f64 {
    let prim = |s: f64| if s == 0.0 { 0.0 } else { 2.0 * s - s * s.ln() };
    mu.pieces().map(|(l, r, v)| v * (prim(r) - prim(l))).sum()
}

fn criterion_8() -> (bool, String) {
    let mut ok = true;
    let mut oracle_diff = 0.0f64;
    for t in 0..200 {
        let mu = random_decreasing(&mut trial_rng(SEED, 0, t), 12, true);
        let (lhs, rhs) = zygmund_function_side(&mu).unwrap();
        ok &= lhs <= rhs + 1e-10 * rhs.max(1.0);
        let o = zygmund_oracle(&mu);
        oracle_diff = oracle_diff.max((lhs - o).abs() / o).max((rhs - o).abs() / o);
    }
    let chi = DecreasingStep::try_new(StepFunction::constant(1.0, 1.0).unwrap()).unwrap();
    let (l, r) = zygmund_function_side(&chi).unwrap();
    ok &= (l - 2.0).abs() <= 1e-12 && (r - 2.0).abs() <= 1e-12 && oracle_diff <= 1e-10;
    (
        ok,
        format!("200 steps in (0,1]; χ_(0,1]: {l:.15} = {r:.15}; primitive oracle rel diff {oracle_diff:.1e}"),
    )
}

fn harmonic(len: usize) -> Seq {
    Seq::from_vec((0..len).map(|k| 1.0 / (k + 1) as f64).collect()).unwrap()
}

/// `(H_{n+1} + 1)/(n+1)`.
fn harmonic_closed_form(n: usize) -> f64 {
    let h: f64 = (1..=n + 1).map(|k| 1.0 / k as f64).sum();
    (h + 1.0) / (n + 1) as f64
}

const HARMONIC_LEN: usize = 4096;
const ASYMPTOTIC_N: usize = 1000;

fn criterion_9() -> (bool, String) {
    let delta = calderon_discrete(&Seq::delta(1), 2048).unwrap();
    let exact_delta = (0..2048).all(|n| delta.get(n as i64) == 1.0 / (n + 1) as f64);
    // the truncated input misses Σ_{k≥N} 1/(k(k+1)) = 1/N of the tail sum
    let sd = calderon_discrete(&harmonic(HARMONIC_LEN), HARMONIC_LEN).unwrap();
    let worst = (0..HARMONIC_LEN)
        .map(|n| {
            let v = sd.get(n as i64) + 1.0 / HARMONIC_LEN as f64;
            (v - harmonic_closed_form(n)).abs() / harmonic_closed_form(n)
        })
        .fold(0.0, f64::max);
    (
        exact_delta && worst <= 1e-12,
        format!("S^d δ_0 = 1/(n+1) bit-exact for n < 2048: {exact_delta}; harmonic vs (H_(n+1)+1)/(n+1) max rel diff {worst:.1e}"),
    )
}

fn criterion_9_asymptotic() -> (bool, String) {
    let n = ASYMPTOTIC_N;
    let closed = harmonic_closed_form(n);
    let shape = ((n + 1) as f64).ln() / (n + 1) as f64;
    let rel = (closed - shape).abs() / shape;
    (
        rel <= 0.05,
        format!("(H_1001+1)/1001 = {closed:.6e} vs log(1001)/1001 = {shape:.6e}: relative gap {:.2}% > 5%", 100.0 * rel),
    )
}

fn main() -> ExitCode {
    let outcomes = vec![
        run("1", "weak-type (1,1) bound for triangular truncation", 60.0, criterion_1),
        run("2", "S(t) ≤ 4 S(2t) on decreasing steps", 5.0, criterion_2),
        run("3", "pointwise lower bound for the discrete Hilbert transform", 5.0, criterion_3),
        run("4", "Hilbert transform sandwich of S", 5.0, criterion_4),
        run("5", "μ(T V) ≤ c S^d μ(V) regression", 120.0, criterion_5),
        run("6", "dyadic majorant construction in (L_1,∞)^0", 5.0, criterion_6),
        run("7", "Lipschitz commutator contraction in Frobenius", 30.0, criterion_7),
        run("8", "function-side Zygmund bound", 5.0, criterion_8),
        run("9", "S^d closed forms", 2.0, criterion_9),
        run("9-asymptotic", "S^d of harmonic within 5% of log(n+1)/(n+1) at n = 1000", 2.0, criterion_9_asymptotic),
    ];
    let mut out = std::io::stdout().lock();
    let mut failed = false;
    for o in &outcomes {
        let known = UNATTAINABLE.contains(&o.id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (unattainable, recorded)",
            (false, false) => "FAIL",
        };
        failed |= !o.pass && !known;
        writeln!(
            out,
            "{tag} criterion {}: {} [{:.2}s / {:.0}s] {}",
            o.id,
            o.title,
            o.elapsed.as_secs_f64(),
            o.budget.as_secs_f64(),
            o.detail
        )
        .unwrap();
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
