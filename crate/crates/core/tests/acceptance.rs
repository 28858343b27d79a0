//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits with status 0 so the workspace test run stays green while a
//! failing line is reported; set `ACCEPTANCE_STRICT=1` to turn any failure
//! into a nonzero exit.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use latticeport::trajectory::{lattice_velocity, Axis};
use latticeport::units::to_recoil;
use latticeport::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn honeycomb(distance_lx: f64) -> TransportConfig {
    let mut c = TransportConfig::new(LatticeSpec::Preset(LatticeKind::Honeycomb));
    c.distance_x_lx = distance_lx;
    c
}

type Weight = fn(f64) -> f64;

fn coefficient_identities() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let omega = rng.random_range(1.0..100.0);
        let t_f = rng.random_range(0.5..50.0) * 2.0 * PI / omega;
        let b = sta_coefficients(omega, t_f).unwrap();
        let weights: [(Weight, f64); 3] = [(|_| 1.0, 1.0), (|n| n, 0.0), (|n| n * (n - 1.0), 0.0)];
        for (weight, target) in weights {
            let terms: Vec<f64> = b.iter().enumerate().map(|(i, v)| weight((i + 3) as f64) * v).collect();
            let sum: f64 = terms.iter().sum();
            // roundoff scales with the size of the cancelling terms
            let scale: f64 = terms.iter().map(|t| t.abs()).sum::<f64>().max(1.0);
            worst = worst.max((sum - target).abs() / scale);
        }
    }
    Outcome { pass: worst < 1e-12, detail: format!("worst scaled residual {worst:.2e}") }
}

fn inverse_engineering() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let omega = rng.random_range(1.0..100.0);
        let t_f = rng.random_range(0.5..50.0) * 2.0 * PI / omega;
        let qc = classical_coefficients(Axis::X, 1.0, t_f).unwrap();
        let rebuilt = qc.trap_path_coefficients(omega);
        let direct = sta_coefficients(omega, t_f).unwrap();
        for (a, b) in rebuilt.iter().zip(direct) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    Outcome { pass: worst < 1e-12, detail: format!("worst coefficient deviation {worst:.2e}") }
}

fn harmonic_exactness() -> Outcome {
    let mut c = honeycomb(100.0);
    c.harmonic = true;
    let setup = TransportSetup::prepare(&c).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for t_f in [3.0, 5.0, 10.0] {
        let r = setup.run(t_f).unwrap();
        pass &= r.fidelity >= 0.9999;
        parts.push(format!("F({t_f})={:.8}", r.fidelity));
    }
    let d = setup.d_actual[0] / setup.l_x();
    Outcome { pass, detail: format!("d_actual={d:.1} l_x, {}", parts.join(", ")) }
}

fn propagator_order() -> Outcome {
    let setup = TransportSetup::prepare(&honeycomb(100.0)).unwrap();
    let traj = setup.trajectory(6.0).unwrap();
    let run = |n: usize| {
        let mut op = SplitOperator::new(setup.grid.clone(), setup.potential.clone()).unwrap();
        let mut psi = setup.ground.state.clone();
        op.propagate_fixed(&mut psi, &traj, n).unwrap();
        psi
    };
    let counts = [400usize, 800, 1600, 4000];
    let reference = run(8 * counts[counts.len() - 1]);
    let points: Vec<(f64, f64)> = counts
        .iter()
        .map(|&n| ((1.0 / n as f64).ln(), run(n).distance(&reference).unwrap().ln()))
        .collect();
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    Outcome { pass: (slope - 2.0).abs() <= 0.1, detail: format!("exponent {slope:.3} over dt ratio 10") }
}

fn ground_state_correctness() -> Outcome {
    let hp = harmonic_approximation(&preset(LatticeKind::Honeycomb)).unwrap();
    let grid = Arc::new(Grid2D::new(128, 128, 4.0 * PI, 4.0 * PI).unwrap());
    let field = grid.sample(|x, y| 0.5 * (hp.omega_x.powi(2) * x * x + hp.omega_y.powi(2) * y * y));
    let gs = imaginary_time_evolve(&field, grid, &ItetConfig::default(), None).unwrap();
    let exact = 0.5 * (hp.omega_x + hp.omega_y);
    let harmonic_rel = (gs.energy / exact - 1.0).abs();

    let params = preset(LatticeKind::Honeycomb);
    let grid = Arc::new(Grid2D::new(32, 32, 2.0 * PI, 2.0 * PI).unwrap());
    let field = evaluate_potential_batch(&params, &grid).unwrap();
    let seed = WaveFunction::uniform(grid.clone());
    let ite = imaginary_time_evolve(&field, grid.clone(), &ItetConfig::default(), Some(seed)).unwrap();
    let dense = common::dense_ground_energy(&field, grid.extent());
    let gap = to_recoil((ite.energy - dense).abs());

    Outcome {
        pass: harmonic_rel < 5e-3 && gap < 1e-6,
        detail: format!(
            "harmonic rel err {harmonic_rel:.2e}; lattice ITE {:.9} vs dense {:.9} E_R (gap {gap:.2e} E_R)",
            to_recoil(ite.energy),
            to_recoil(dense)
        ),
    }
}

fn adiabatic_limit() -> Outcome {
    let r = run_transport(&TransportConfig { t_f_tx: 30.0, ..honeycomb(100.0) }).unwrap();
    Outcome {
        pass: r.fidelity >= 0.99,
        detail: format!("F(30 T_x)={:.8}, d_actual={:.1} l_x", r.fidelity, r.d_actual_lx[0]),
    }
}

const SWEEP_TX: [f64; 12] = [4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0];

fn crossing(config: &TransportConfig) -> (Result<f64>, Result<f64>) {
    let setup = TransportSetup::prepare(config).unwrap();
    let curve = fidelity_curve(&sweep_tf(&setup, &SWEEP_TX).unwrap());
    (breakdown_time(&curve, 0.5), breakdown_time(&curve, 0.9))
}

fn show(t: &Result<f64>) -> String {
    match t {
        Ok(v) => format!("{v:.3}"),
        Err(e) => e.to_string(),
    }
}

fn breakdown_window(base: &(Result<f64>, Result<f64>)) -> Outcome {
    let pass = matches!(base.0, Ok(t) if (5.0..=10.0).contains(&t));
    Outcome {
        pass,
        detail: format!("F=0.5 crossing at {} T_x (F=0.9 at {} T_x)", show(&base.0), show(&base.1)),
    }
}

fn ordering(base: &(Result<f64>, Result<f64>)) -> Outcome {
    let deeper = crossing(&TransportConfig { depth_scale: 2.0, ..honeycomb(100.0) });
    let farther = crossing(&honeycomb(400.0));
    let pass = match (&base.0, &deeper.0, &farther.0) {
        (Ok(b), Ok(d), Ok(f)) => d <= b && f >= b,
        _ => false,
    };
    Outcome {
        pass,
        detail: format!(
            "F=0.5 crossings: base {}, depth x2 {}, d=400 l_x {} (F=0.9: {}, {}, {})",
            show(&base.0),
            show(&deeper.0),
            show(&farther.0),
            show(&base.1),
            show(&deeper.1),
            show(&farther.1)
        ),
    }
}

fn unitarity_and_determinism() -> Outcome {
    let setup = TransportSetup::prepare(&honeycomb(100.0)).unwrap();
    let traj = setup.trajectory(10.0).unwrap();
    let mut op = SplitOperator::new(setup.grid.clone(), setup.potential.clone()).unwrap();
    let mut psi = setup.ground.state.clone();
    let before = psi.norm_sq();
    op.propagate_fixed(&mut psi, &traj, 10_000).unwrap();
    let drift = (psi.norm_sq().sqrt() - before.sqrt()).abs();

    let a = setup.run(6.0).unwrap();
    let b = setup.run(6.0).unwrap();
    let again = TransportSetup::prepare(&honeycomb(100.0)).unwrap().run(6.0).unwrap();
    let identical = a == b && a == again && a.fidelity.to_bits() == again.fidelity.to_bits();
    Outcome {
        pass: drift < 1e-9 && identical,
        detail: format!("norm drift {drift:.2e} per 1e4 steps; repeated runs identical: {identical}"),
    }
}

fn aom_consistency() -> Outcome {
    let params = preset(LatticeKind::Honeycomb);
    let hp = harmonic_approximation(&params).unwrap();
    let d_actual = experiment::snap_distance(100.0 * hp.length_x(), params.translation_period_x());
    let spec = TransportSpec::new(d_actual, 0.0, 10.0 * hp.period_x()).unwrap();
    let traj = trajectory_2d(&spec, &hp).unwrap().x;
    let program = aom_program(&traj, 1.0, 10_000).unwrap();
    let integral: f64 = program
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (lattice_velocity(w[0].1, 1.0) + lattice_velocity(w[1].1, 1.0)))
        .sum();
    let rel = (integral - d_actual).abs() / d_actual;
    Outcome { pass: rel < 1e-6, detail: format!("relative deviation {rel:.2e}") }
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut failures = 0;
    let mut report = |id: u32, name: &str, budget: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= budget;
        if !pass {
            failures += 1;
        }
        println!(
            "[{}] {id:>2} {name}: {} ({:.1} s, budget {} s)",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    };

    let secs = Duration::from_secs;
    report(1, "coefficient identities", secs(1), &mut coefficient_identities);
    report(2, "inverse-engineering identity", secs(1), &mut inverse_engineering);
    report(3, "harmonic STA exactness", secs(60), &mut harmonic_exactness);
    report(4, "propagator order", secs(60), &mut propagator_order);
    report(5, "imaginary-time ground state", secs(60), &mut ground_state_correctness);
    report(6, "adiabatic limit", secs(300), &mut adiabatic_limit);

    let mut base = None;
    report(7, "breakdown window", secs(900), &mut || {
        let curve = crossing(&honeycomb(100.0));
        let outcome = breakdown_window(&curve);
        base = Some(curve);
        outcome
    });
    let base = base.expect("baseline sweep ran");
    report(8, "ordering properties", secs(1800), &mut || ordering(&base));
    report(9, "unitarity and determinism", secs(120), &mut unitarity_and_determinism);
    report(10, "AOM program consistency", secs(1), &mut aom_consistency);

    println!("{} of 10 criteria passed", 10 - failures);
    if strict && failures > 0 {
        std::process::exit(1);
    }
}
