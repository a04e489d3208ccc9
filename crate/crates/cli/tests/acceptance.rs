//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use nnfd::hybrid::{self, NetConfig};
use nnfd::problems::example1;
use nnfd_bench::config::{ExperimentConfig, STOKES_PRESET};
use nnfd_bench::run::{self, RunOutput};
use nnfd_bench::table::ConvergenceTable;
use nnfd_bench::validate;

/// Runs one criterion; may raise the shared max boundary error.
type Criterion = Box<dyn FnOnce(&mut f64) -> Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn run_preset(name: &str, seed: u64) -> RunOutput {
    let exp = ExperimentConfig::for_preset(name, seed).resolve().expect("preset resolves");
    run::run(&exp).expect("run succeeds")
}

/// Orders of the given quantities over the last `pairs` adjacent rows.
fn orders(t: &ConvergenceTable, qs: &[usize], pairs: usize) -> Vec<Vec<f64>> {
    qs.iter()
        .map(|&q| {
            let o = t.orders(q);
            o[o.len() - pairs..].iter().map(|v| v.unwrap_or(f64::NAN)).collect()
        })
        .collect()
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Sweep criterion: every listed order within `[lo, hi]`.
fn order_check(out: &RunOutput, names: &[&str], pairs: usize, lo: f64, hi: f64) -> (bool, String) {
    let qs: Vec<usize> = (0..names.len()).collect();
    let os = orders(&out.table, &qs, pairs);
    let pass = os.iter().flatten().all(|o| (lo..=hi).contains(o));
    let desc: Vec<String> = names.iter().zip(&os).map(|(n, o)| format!("{n} {}", fmt(o))).collect();
    let loss = out.nets[0].1.report.final_loss;
    (pass, format!("orders {} in [{lo}, {hi}], train loss {loss:.2e}", desc.join(", ")))
}

fn main() -> ExitCode {
    let mut boundary = 0.0f64;
    let criteria: Vec<(&str, Criterion)> = vec![
        (
            "example 1 second order",
            Box::new(|b: &mut f64| {
                let t = Instant::now();
                let out = run_preset("example1", 0);
                let secs = t.elapsed().as_secs_f64();
                *b = b.max(out.boundary_error);
                let (pass, d) = order_check(&out, &["u", "grad"], 2, 1.7, 2.3);
                Outcome { pass: pass && secs <= 60.0, detail: format!("{d}, {secs:.1} s (limit 60 s)") }
            }),
        ),
        (
            "example 1 training floor",
            Box::new(|_: &mut f64| {
                let pr = example1();
                let mut losses = vec![];
                for seed in 0..5 {
                    let cfg = NetConfig { lm: nnfd::training::LmConfig { seed, ..pr.net.lm.clone() }, ..pr.net.clone() };
                    let (_, rep) = hybrid::train(&pr.problem, &cfg).expect("training runs");
                    losses.push(rep.final_loss);
                }
                let hits = losses.iter().filter(|&&l| l <= 1e-11).count();
                let ls: Vec<String> = losses.iter().map(|l| format!("{l:.1e}")).collect();
                Outcome { pass: hits >= 3, detail: format!("{hits}/5 seeds reach loss <= 1e-11: [{}]", ls.join(", ")) }
            }),
        ),
        (
            "example 1 error plateau",
            Box::new(|b: &mut f64| {
                let pr = example1();
                let (net, rep) = hybrid::train(&pr.problem, &pr.net).expect("training runs");
                let mut errs = vec![];
                for n in [2048, 4096] {
                    let sol = hybrid::solve_with_net(&pr.problem, &net, &rep, &pr.problem.grid(n).unwrap()).unwrap();
                    let spec = sol.spec();
                    spec.for_each_point(|flat, idx, x| {
                        if spec.is_boundary(idx) {
                            *b = b.max((sol.u.values()[flat] - (pr.problem.u_b)(x)).abs());
                        }
                    });
                    errs.push(hybrid::exact_errors(&sol, &pr.problem).unwrap().u);
                }
                let ratio = errs[0] / errs[1];
                let pass = rep.final_loss <= 1e-11 && errs.iter().all(|&e| e <= 1e-5) && (0.1..=10.0).contains(&ratio);
                Outcome {
                    pass,
                    detail: format!(
                        "loss {:.1e}, err_u n=2048 {:.2e}, n=4096 {:.2e}, ratio {ratio:.2} (<= 10, both <= 1e-5)",
                        rep.final_loss, errs[0], errs[1]
                    ),
                }
            }),
        ),
        (
            "example 2 second order",
            Box::new(|b: &mut f64| {
                let out = run_preset("example2", 0);
                *b = b.max(out.boundary_error);
                let (pass, detail) = order_check(&out, &["u", "grad"], 3, 1.7, 2.3);
                Outcome { pass, detail }
            }),
        ),
        (
            "example 3 successive errors",
            Box::new(|b: &mut f64| {
                let exp = ExperimentConfig::for_preset("example3", 0).resolve().unwrap();
                let out = run::run(&exp).unwrap();
                *b = b.max(out.boundary_error);
                // The last row compares h = 1/160 against the finest solve.
                let finest_h = 2.0 / *exp.grids.last().unwrap() as f64;
                let (pass, d) = order_check(&out, &["u", "grad"], 3, 1.6, 2.4);
                Outcome { pass: pass && finest_h <= 1.0 / 320.0, detail: format!("{d}, finest solve h = 1/{}", 1.0 / finest_h) }
            }),
        ),
        (
            "example 4 (3D) second order",
            Box::new(|b: &mut f64| {
                let t = Instant::now();
                let out = run_preset("example4", 0);
                let secs = t.elapsed().as_secs_f64();
                *b = b.max(out.boundary_error);
                let (pass, d) = order_check(&out, &["u", "grad"], 2, 1.6, 2.4);
                Outcome { pass: pass && secs <= 300.0, detail: format!("{d}, {secs:.1} s (limit 300 s)") }
            }),
        ),
        (
            "Stokes second order",
            Box::new(|_: &mut f64| {
                let out = run_preset(STOKES_PRESET, 0);
                let (pass, detail) = order_check(&out, &["u1", "u2", "p", "div u", "grad p"], 2, 1.5, 2.5);
                Outcome { pass, detail }
            }),
        ),
    ];

    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let o = f(&mut boundary);
        report(i + 1, name, &o, t.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }

    let t = Instant::now();
    let checks = validate::run_all();
    for c in &checks {
        println!("    {c}");
    }
    let bad = checks.iter().filter(|c| !c.passed()).count();
    let o = Outcome {
        pass: bad == 0 && boundary <= 1e-12,
        detail: format!(
            "{}/{} oracle checks pass, max |u - u_b| over sweep solves {boundary:.1e} (<= 1e-12)",
            checks.len() - bad,
            checks.len()
        ),
    };
    report(8, "property suites", &o, t.elapsed().as_secs_f64());
    failed += usize::from(!o.pass);

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}

fn report(id: usize, name: &str, o: &Outcome, secs: f64) {
    let status = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {id} {status} {name}: {} [{secs:.1} s]", o.detail);
}
