//! Exit criteria at the reference resolution. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptkr::classical::{predicted_d, soliton_trajectory, SolitonState};
use ptkr::fit::FitWindow;
use ptkr::harness::dense::oracle_checks;
use ptkr::otoc::{
    otoc_series, relative_spread, scan_staircase, time_reversal, RateFit, StaircaseScan,
};
use ptkr::{Floquet, SimParams};

const TAU: f64 = 2.0 * PI;
const T_MAX: usize = 12;

fn window() -> FitWindow {
    FitWindow::new(5.0, 12.0)
}

fn base() -> SimParams {
    SimParams {
        k: TAU,
        lambda: 0.9,
        hbar: 0.1,
        sigma: 10.0,
        n_points: 1 << 14,
        n_kicks: 10,
    }
}

fn k_set() -> [f64; 6] {
    [4.0, TAU, 8.0, 10.0, 2.0 * TAU, 14.0]
}

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn fmt_list(xs: &[(f64, f64)]) -> String {
    xs.iter()
        .map(|(k, v)| format!("K={k:.3}:{v:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn momentum_rate(scan: &StaircaseScan) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for e in &scan.entries {
        let target = if e.k < 3.0 * PI { TAU } else { 2.0 * TAU };
        let err = rel(e.fit.d, target);
        worst = worst.max(err);
        rows.push((e.k, e.fit.d));
    }
    Outcome {
        name: "quantized momentum rate (slope within 3% of 2m pi)",
        pass: worst < 0.03,
        detail: format!("worst {:.2}%; D {}", 100.0 * worst, fmt_list(&rows)),
    }
}

fn ballistic(scan: &StaircaseScan) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for e in &scan.entries {
        let target = if e.k < 3.0 * PI { TAU } else { 2.0 * TAU };
        let f = &e.series.forward;
        let mut k_worst: f64 = 0.0;
        for (i, &t) in f.times.iter().enumerate().filter(|(_, &t)| t >= 5) {
            let ratio = f.mean_p_sq[i] / (target * t as f64).powi(2);
            k_worst = k_worst.max((ratio - 1.0).abs());
        }
        worst = worst.max(k_worst);
        rows.push((e.k, k_worst));
    }
    Outcome {
        name: "ballistic diffusion (<p^2>/t^2 within 5% of D^2 for t >= 5)",
        pass: worst < 0.05,
        detail: format!("worst deviation per K {}", fmt_list(&rows)),
    }
}

fn quadratic_law(fit: &RateFit) -> Outcome {
    Outcome {
        name: "OTOC quadratic law at K = 2 pi (residual < 10%, q = 2.0 +- 0.2)",
        pass: fit.residual < 0.1 && (fit.q_free - 2.0).abs() <= 0.2,
        detail: format!(
            "G={:.4} residual={:.2e} q={:.4}",
            fit.g, fit.residual, fit.q_free
        ),
    }
}

fn staircase(scan: &StaircaseScan) -> Outcome {
    let nus: Vec<(f64, f64)> = scan
        .entries
        .iter()
        .map(|e| (e.k, e.fit.g / predicted_d(e.k).unwrap().powi(2)))
        .collect();
    let values: Vec<f64> = nus.iter().map(|(_, v)| *v).collect();
    let spread = relative_spread(&values).unwrap();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let m2 =
        scan.entries.iter().any(|e| e.k > 3.0 * PI) && scan.entries.iter().any(|e| e.k < 3.0 * PI);
    Outcome {
        name: "staircase quantization (G/(2m pi)^2 spread < 10%, nu = 1.8 +- 0.2)",
        pass: m2 && values.len() >= 6 && spread < 0.1 && (mean - 1.8).abs() <= 0.2,
        detail: format!(
            "spread={:.2}% mean nu={mean:.4}; nu {}",
            100.0 * spread,
            fmt_list(&nus)
        ),
    }
}

fn decomposition(scan: &StaircaseScan) -> Outcome {
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for e in &scan.entries {
        let f = &e.fit;
        let checks = [
            ("alpha", rel(f.alpha, PI * PI / 4.0) < 0.1),
            ("beta", rel(f.beta, 0.05) < 0.1),
            ("eta", (f.eta - 0.35).abs() <= 0.1),
            ("identity", rel(f.nu_from_parts(), f.nu) < 0.1),
        ];
        for (name, ok) in checks {
            if !ok {
                failures.push(format!("{name}@K={:.3}", e.k));
            }
        }
        rows.push(format!(
            "K={:.3}:a={:.3},b={:.4},e={:.3},nu={:.3}",
            e.k, f.alpha, f.beta, f.eta, f.nu
        ));
    }
    Outcome {
        name: "decomposition factors (alpha, beta, eta, nu = alpha + beta - 2 eta)",
        pass: failures.is_empty(),
        detail: format!("failing [{}]; {}", failures.join(" "), rows.join(" ")),
    }
}

fn lambda_independence(g: &[(f64, f64)]) -> Outcome {
    let values: Vec<f64> = g.iter().map(|(_, g)| *g).collect();
    let spread = relative_spread(&values).unwrap();
    let detail = g
        .iter()
        .map(|(l, g)| format!("lambda={l}:G={g:.3}"))
        .collect::<Vec<_>>()
        .join(" ");
    Outcome {
        name: "lambda independence of G at K = 2 pi (within 15%)",
        pass: spread < 0.15,
        detail: format!("spread={:.2}%; {detail}", 100.0 * spread),
    }
}

fn time_reversal_recovery() -> Outcome {
    let floquet = Floquet::from_params(base()).unwrap();
    let psi0 = floquet.initial_gaussian().unwrap();
    let pass = time_reversal(&floquet, &psi0, base().n_kicks).unwrap();
    let fwd = &pass.forward.series;
    let back = &pass.backward.series;
    // the last two backward kicks carry labels 1 and 0
    let (mut p_worst, mut theta_worst): (f64, f64) = (0.0, 0.0);
    for i in 0..back.len() {
        let t = back.times[i];
        if t < 2 {
            continue;
        }
        let forward_p = fwd.at(t).unwrap().mean_p;
        p_worst = p_worst.max(rel(back.mean_p[i], forward_p));
        theta_worst = theta_worst.max((back.mean_theta[i] - FRAC_PI_2).abs());
    }
    Outcome {
        name: "time-reversal recovery (<p> within 2%, <theta> within 0.05 of pi/2)",
        pass: p_worst < 0.02 && theta_worst < 0.05,
        detail: format!(
            "worst <p> {:.3}% worst |<theta> - pi/2| {theta_worst:.4}",
            100.0 * p_worst
        ),
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cases = vec![base()];
    for _ in 0..24 {
        cases.push(SimParams {
            k: rng.gen_range(0.0..15.0),
            lambda: rng.gen_range(0.0..2.0),
            hbar: rng.gen_range(0.05..1.0),
            sigma: rng.gen_range(2.0..20.0),
            ..base()
        });
    }
    let (mut pipeline, mut identities): (f64, f64) = (0.0, 0.0);
    let mut runs = 0;
    for (i, p) in cases.iter().enumerate() {
        for n in [8, 16, 64] {
            let params = SimParams { n_points: n, ..*p };
            for c in oracle_checks(&params, 6, i as u64).unwrap() {
                match c.name {
                    "unitarity_dense"
                    | "unitarity_drift_per_kick"
                    | "parseval"
                    | "transform_round_trip" => identities = identities.max(c.deviation),
                    _ => pipeline = pipeline.max(c.deviation),
                }
            }
            runs += 1;
        }
    }
    Outcome {
        name: "oracle equivalence on 8/16/64 points (pipeline < 1e-8, identities < 1e-12)",
        pass: pipeline < 1e-8 && identities < 1e-12,
        detail: format!("{runs} runs; pipeline {pipeline:.2e} identities {identities:.2e}"),
    }
}

fn classical_map(scan: &StaircaseScan) -> Outcome {
    let start = SolitonState::at_plateau(0, 0.0);
    let mut exact = true;
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for e in &scan.entries {
        let d = predicted_d(e.k).unwrap();
        for (n, s) in soliton_trajectory(start, e.k, 50)
            .unwrap()
            .iter()
            .enumerate()
        {
            exact &= s.p == d * n as f64;
        }
        let err = rel(e.fit.d, d);
        worst = worst.max(err);
        rows.push((e.k, err));
    }
    Outcome {
        name: "classical map (p(n) = D n exactly; predicted D within 3% of quantum fit)",
        pass: exact && worst < 0.03,
        detail: format!("exact={exact}; relative gap {}", fmt_list(&rows)),
    }
}

fn main() -> ExitCode {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let scan = scan_staircase(&k_set(), base(), T_MAX, window(), jobs).unwrap();
    let reference = scan.entries.iter().find(|e| e.k == TAU).unwrap();
    let mut lambda_g = Vec::new();
    for lambda in [0.1, 0.9, 5.0] {
        let g = if lambda == 0.9 {
            reference.fit.g
        } else {
            let f = Floquet::from_params(SimParams { lambda, ..base() }).unwrap();
            RateFit::from_series(&otoc_series(&f, T_MAX).unwrap(), window())
                .unwrap()
                .g
        };
        lambda_g.push((lambda, g));
    }

    let outcomes = [
        momentum_rate(&scan),
        ballistic(&scan),
        quadratic_law(&reference.fit),
        staircase(&scan),
        decomposition(&scan),
        lambda_independence(&lambda_g),
        time_reversal_recovery(),
        oracle_equivalence(),
        classical_map(&scan),
    ];
    let mut failed = 0;
    for (i, o) in outcomes.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {}: {}", i + 1, o.name, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
