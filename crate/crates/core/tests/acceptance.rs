//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the lines appear in ordinary `cargo test` output; the process
//! fails if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use simpcert::certificate::{certify_single, DEFAULT_REL_TOL};
use simpcert::expr::parse;
use simpcert::poly::{moment_integral, moment_polynomial, node_polynomial, rational_to_f64, Interval, Polynomial};
use simpcert::proof_trace::{build_phi, trace, verify_vanishing, TraceConfig};
use simpcert::quadrature::{
    convergence_sweep, exact_polynomial_integral, precise_reference, reference_integral, richardson_integral,
    true_error, DEFAULT_PANEL_BUDGET,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn interval(a: f64, b: f64) -> Interval {
    Interval::new(a, b).expect("valid interval")
}

fn quartic_error() -> Outcome {
    let f = parse("x^4").map_err(|e| e.to_string())?;
    let iv = interval(0.0, 1.0);
    let reference = reference_integral(&f, &iv, 1e-16).map_err(|e| e.to_string())?;
    let e = true_error(&f, &iv, 1, &reference).map_err(|e| e.to_string())?.error;
    let formula = -24.0 * iv.width().powi(5) / 2880.0;
    let (d_exact, d_formula) = ((e + 1.0 / 120.0).abs(), (e - formula).abs());
    check(
        d_exact <= 1e-14 && d_formula <= 1e-14,
        format!("E = {e:e}; |E + 1/120| = {d_exact:e}, |E + 24/2880| = {d_formula:e} (limit 1e-14)"),
    )
}

fn node_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_exact, mut worst_p, mut worst_moment) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let a: f64 = rng.gen_range(-10.0..10.0);
        let w: f64 = rng.gen_range(0.01..10.0);
        let iv = interval(a, a + w);
        let b = iv.b();
        let exact = iv.to_rational();
        let (ra, rb) = (exact.a(), exact.b());

        // Exact rational path on the given doubles.
        let int_p = rational_to_f64(&node_polynomial(&exact).integrate_in_field(&ra, &rb));
        let int_xp = rational_to_f64(&moment_polynomial(&exact).integrate_in_field(&ra, &rb));
        let want = -(b - a).powi(5) / 120.0;
        worst_exact = worst_exact.max(int_p.abs()).max(((int_xp - want) / want).abs());

        // Correctly rounded moment.
        worst_moment = worst_moment.max(((moment_integral(&iv) - want) / want).abs());

        // Double precision in powers of (x - c), the form the proof replay uses,
        // with the sign-changing p measured against its absolute integral (b - a)^4 / 32.
        let c = exact.midpoint();
        let (lo, hi) = (rational_to_f64(&(&ra - &c)), rational_to_f64(&(&rb - &c)));
        let p = node_polynomial(&exact).translate(&c).to_f64();
        let xp = moment_polynomial(&exact).translate(&c).to_f64();
        worst_p = worst_p
            .max(p.integrate(lo, hi).abs() / ((b - a).powi(4) / 32.0))
            .max(((xp.integrate(lo, hi) - want) / want).abs());
    }
    check(
        worst_exact <= 1e-12 && worst_moment <= 1e-12 && worst_p <= 1e-12,
        format!(
            "100 intervals; exact path worst {worst_exact:e}, rounded moment worst rel {worst_moment:e}, \
             centred double-precision path worst {worst_p:e} (limit 1e-12)"
        ),
    )
}

fn certificates() -> Outcome {
    let start = Instant::now();
    let pi = std::f64::consts::PI;
    let cases = [
        ("x^5", [(0.0, 1.0), (-1.0, 2.0), (0.5, 3.0)]),
        ("sin(x)", [(0.0, pi), (-1.0, 2.0), (0.5, 3.0)]),
        ("exp(x)", [(0.0, 1.0), (-1.0, 2.0), (0.5, 3.0)]),
        ("1/(1+x^2)", [(0.0, 1.0), (-1.0, 2.0), (0.5, 3.0)]),
    ];
    let mut worst = 0.0f64;
    let mut x5_xi = f64::NAN;
    for (text, intervals) in cases {
        let e = parse(text).map_err(|e| e.to_string())?;
        for (a, b) in intervals {
            let iv = interval(a, b);
            let cert = certify_single(&e, &iv, DEFAULT_REL_TOL).map_err(|err| format!("{text} on {iv}: {err}"))?;
            if !(a < cert.xi && cert.xi < b) {
                return Err(format!("{text} on {iv}: xi = {} not interior", cert.xi));
            }
            worst = worst.max(cert.residual / (1.0 + cert.target.abs()));
            if text == "x^5" && (a, b) == (0.0, 1.0) {
                x5_xi = cert.xi;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-9 && (x5_xi - 0.5).abs() <= 1e-8 && elapsed < 1.0,
        format!(
            "12 certificates interior; worst residual/(1+|target|) {worst:e} (limit 1e-9); \
             x^5 xi = {x5_xi} (0.5 +- 1e-8); {elapsed:.3} s (limit 1 s)"
        ),
    )
}

fn proof_replay() -> Outcome {
    let iv = interval(0.0, 1.0);
    let quartic = parse("x^4").map_err(|e| e.to_string())?;
    let reference = precise_reference(&quartic, &iv).map_err(|e| e.to_string())?;
    let error = true_error(&quartic, &iv, 1, &reference).map_err(|e| e.to_string())?.error;
    let phi = build_phi(&quartic, &iv, error).map_err(|e| e.to_string())?;
    let vanishing = verify_vanishing(&phi).map_err(|e| e.to_string())?.max_abs();
    let cfg = TraceConfig::default();
    let t4 = trace(&quartic, &iv, &cfg).map_err(|e| format!("x^4: {e}"))?;
    let quartic_ok = (phi.k - 1.5).abs() <= 1e-12
        && (phi.lambda - 1.0).abs() <= 1e-12
        && vanishing <= 1e-12
        && t4.final_residual <= 1e-10;

    let exp = parse("exp(x)").map_err(|e| e.to_string())?;
    let te = trace(&exp, &iv, &cfg).map_err(|e| format!("exp: {e}"))?;
    let counts: Vec<usize> = te.rolle_levels.iter().map(|l| l.roots.len()).collect();
    let mut previous = vec![te.a, te.u, te.c, te.v, te.b];
    let mut interlaced = true;
    for level in &te.rolle_levels {
        interlaced &= level.roots.iter().zip(previous.windows(2)).all(|(&r, w)| w[0] < r && r < w[1]);
        previous = level.roots.clone();
    }
    let exp_ok = counts == [4, 3, 2, 1] && interlaced && te.final_residual <= 1e-8;
    check(
        quartic_ok && exp_ok,
        format!(
            "x^4: k = {}, lambda = {}, vanishing {vanishing:e}, final residual {:e}; \
             exp: levels {counts:?}, interlaced {interlaced}, xi = {}, final residual {:e}",
            phi.k, phi.lambda, t4.final_residual, te.xi, te.final_residual
        ),
    )
}

fn convergence_order() -> Outcome {
    let iv = interval(0.0, 1.0);
    let exp = parse("exp(x)").map_err(|e| e.to_string())?;
    let reference = precise_reference(&exp, &iv).map_err(|e| e.to_string())?;
    let rows = convergence_sweep(&exp, &iv, 5, &reference).map_err(|e| e.to_string())?;
    let orders: Vec<f64> = rows[1..].iter().filter_map(|r| r.observed_order).collect();
    let orders_ok = orders.len() == 5 && orders.iter().all(|o| (3.7..=4.3).contains(o));

    let cubic = parse("x^3").map_err(|e| e.to_string())?;
    let reference = precise_reference(&cubic, &iv).map_err(|e| e.to_string())?;
    let rows = convergence_sweep(&cubic, &iv, 5, &reference).map_err(|e| e.to_string())?;
    let worst_cubic = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    let shown: Vec<String> = orders.iter().map(|o| format!("{o:.4}")).collect();
    check(
        orders_ok && worst_cubic <= 1e-14,
        format!("exp orders n=2..32: [{}] (need [3.7, 4.3]); x^3 worst |E| {worst_cubic:e}", shown.join(", ")),
    )
}

fn oracle_cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let degree = rng.gen_range(0..=6);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let poly = Polynomial::new(coeffs);
        let a: f64 = rng.gen_range(-2.0..2.0);
        let iv = interval(a, a + rng.gen_range(0.1..3.0));
        let exact = exact_polynomial_integral(&poly.to_rational(), &iv).value;
        let extrapolated =
            richardson_integral(&poly, &iv, 1e-15, DEFAULT_PANEL_BUDGET).map_err(|e| e.to_string())?.value;
        worst = worst.max(((extrapolated - exact) / exact).abs());
    }
    check(worst <= 1e-12, format!("50 polynomials of degree <= 6; worst relative gap {worst:e} (limit 1e-12)"))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_simpcert");
    let runs: [&[&str]; 8] = [
        &["integrate", "exp(x)*sin(x)", "0", "pi", "--panels", "7", "--m4", "10"],
        &["integrate", "1/(1+x^2)", "-1", "1", "--adaptive", "--json"],
        &["certify", "exp(x)", "0", "1", "--json"],
        &["certify", "sin(x)", "0", "pi", "--panels", "3", "--csv"],
        &["trace", "exp(x)", "0", "1"],
        &["trace", "sin(x)", "0", "3.14159265358979", "--json"],
        &["sweep", "exp(x)", "0", "1", "--levels", "5", "--csv"],
        &["integrate", "log(x)", "0", "1"],
    ];
    for args in runs {
        let run = || Command::new(bin).args(args).output().map_err(|e| e.to_string());
        let (first, second) = (run()?, run()?);
        if first.stdout != second.stdout || first.stderr != second.stderr || first.status != second.status {
            return Err(format!("outputs differ for {args:?}"));
        }
    }
    Ok(format!("{} command lines run twice, byte-identical stdout, stderr and status", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("quartic exact-error reproduction", quartic_error),
        ("node-polynomial identities", node_identities),
        ("certificate validity", certificates),
        ("proof-trace replay", proof_replay),
        ("convergence order", convergence_order),
        ("oracle cross-validation", oracle_cross_validation),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
