//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if a required criterion fails. Seeds are fixed up front.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochwave::harness::{
    spatial_study, temporal_study, trace_study, ErrorComponent, ExperimentConfig, NoiseSpec,
};
use stochwave::noise::sample_increments;
use stochwave::stepper::{energy, hamiltonian_residual};
use stochwave::{
    CubicDrift, Field, NoiseModel, SeedPlan, SolverConfig, SpectralBasis, State, StepOperators,
    Stepper,
};

type Outcome = Result<(bool, String), stochwave::Error>;

struct Criterion {
    id: u32,
    name: &'static str,
    optional: bool,
    run: fn() -> Outcome,
}

const SEED_RESIDUAL: u64 = 0xA11CE;
const SEED_ORACLE: u64 = 0x0DD5;
const SEED_AVF: u64 = 0xAF0;
const SEED_LINEAR: u64 = 0x11EA2;
const SEED_STUDY: u64 = 20_240_601;

fn main() {
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    // `cargo test -- --list` and filters are not meaningful for this target.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria = [
        Criterion { id: 1, name: "pathwise energy identity", optional: false, run: c1_hamiltonian },
        Criterion { id: 2, name: "deterministic energy conservation", optional: false, run: c2_conservation },
        Criterion { id: 3, name: "discrete trace formula", optional: false, run: c3_trace },
        Criterion { id: 4, name: "temporal strong rate", optional: false, run: c4_temporal },
        Criterion { id: 5, name: "spectral spatial rate", optional: false, run: c5_spectral_space },
        Criterion { id: 6, name: "finite element spatial rate", optional: false, run: c6_fem_space },
        Criterion { id: 7, name: "single-mode root oracle", optional: false, run: c7_oracle },
        Criterion { id: 8, name: "AVF exactness", optional: false, run: c8_avf },
        Criterion { id: 9, name: "linear exactness", optional: false, run: c9_linear },
        Criterion { id: 10, name: "velocity rate for smoother noise", optional: true, run: c10_velocity },
    ];
    let mut required_failed = 0;
    for c in criteria.iter().filter(|c| only.is_none_or(|id| id == c.id)) {
        let start = Instant::now();
        let (ok, detail) = match (c.run)() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = match (ok, c.optional) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (optional)",
        };
        println!(
            "{tag} criterion {:>2} {}: {detail} [{:.1}s]",
            c.id,
            c.name,
            start.elapsed().as_secs_f64()
        );
        if !ok && !c.optional {
            required_failed += 1;
        }
    }
    if required_failed > 0 {
        println!("{required_failed} required criteria failed");
        std::process::exit(1);
    }
}

fn in_range(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

/// Random state with geometric decay, scaled so that its energy is at most `cap`.
fn random_state(r: &mut ChaCha8Rng, b: &SpectralBasis, drift: &CubicDrift, cap: f64) -> stochwave::Result<State> {
    let j = b.modes();
    let u: Vec<f64> = (0..j).map(|k| r.random_range(-1.0..1.0) / ((k + 1) as f64).powi(2)).collect();
    let v: Vec<f64> = (0..j).map(|k| r.random_range(-1.0..1.0) / (k + 1) as f64).collect();
    let target = r.random_range(0.0..cap);
    let make = |a: f64| State::new(Field::new(u.iter().map(|x| a * x).collect())?, Field::new(v.iter().map(|x| a * x).collect())?);
    // energy is increasing in the amplitude for the pure cubic
    let (mut lo, mut hi) = (0.0, 1.0);
    while energy(&make(hi)?, drift, b)? < target {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if energy(&make(mid)?, drift, b)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    make(lo)
}

fn c1_hamiltonian() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(SEED_RESIDUAL);
    let b = SpectralBasis::new(64)?;
    let drift = CubicDrift::default();
    let tau = 0.1;
    let ops = StepOperators::for_backend(&b, tau)?;
    let solver = SolverConfig { tol: 1e-12, ..SolverConfig::default() };
    let mut stepper = Stepper::new(&b, &ops, &drift, solver)?;
    let model = NoiseModel::power_law(0.5005, 64, 1.0)?;
    let plan = SeedPlan::new(SEED_RESIDUAL);
    let mut worst: f64 = 0.0;
    for n in 0..200u64 {
        let x = random_state(&mut r, &b, &drift, 10.0)?;
        let dw: Vec<f64> = (0..64)
            .map(|j| (model.q[j] * tau).sqrt() * plan.gaussian(0, n, j as u64))
            .collect();
        let dw = Field::new(dw)?;
        let (next, _) = stepper.step(&x, &dw)?;
        worst = worst.max(hamiltonian_residual(&x, &next, &dw, &drift, &b)?);
    }
    Ok((worst <= 1e-9, format!("max residual {worst:.3e} (tolerance 1e-9)")))
}

fn c2_conservation() -> Outcome {
    let b = SpectralBasis::new(64)?;
    let drift = CubicDrift::default();
    let ops = StepOperators::for_backend(&b, 2f64.powi(-7))?;
    let mut stepper = Stepper::new(&b, &ops, &drift, SolverConfig::default())?;
    let mut x = State::new(Field::unit(64, 0), Field::zeros(64))?;
    let e0 = energy(&x, &drift, &b)?;
    let zero = vec![0.0; 64];
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        stepper.advance(&mut x, &zero)?;
        worst = worst.max((energy(&x, &drift, &b)? - e0).abs());
    }
    Ok((worst <= 1e-8, format!("max |J_n - J_0| {worst:.3e} (tolerance 1e-8), J_0 = {e0:.12}")))
}

fn study_config() -> ExperimentConfig {
    ExperimentConfig {
        seed: SEED_STUDY,
        ..ExperimentConfig::default()
    }
}

fn c3_trace() -> Outcome {
    let cfg = ExperimentConfig {
        resolution: 64,
        tau: 2f64.powi(-6),
        t_final: 1.0,
        samples: 1000,
        ..study_config()
    };
    let rep = trace_study(&cfg)?;
    let dev = rep.max_standardized_deviation();
    let rel = (rep.fitted_slope - rep.reference_slope).abs() / rep.reference_slope;
    Ok((
        dev <= 3.0 && rel <= 0.05,
        format!(
            "max deviation {dev:.2} SE (limit 3), slope {:.5} vs {:.5}, relative {rel:.4} (limit 0.05)",
            rep.fitted_slope, rep.reference_slope
        ),
    ))
}

fn c4_temporal() -> Outcome {
    let cfg = ExperimentConfig {
        resolution: 64,
        tau_levels: (2..=6).map(|k| 2f64.powi(-k)).collect(),
        tau_reference: 2f64.powi(-9),
        samples: 200,
        ..study_config()
    };
    let rep = temporal_study(&cfg)?;
    let s = rep.fit.slope;
    Ok((in_range(s, 0.8, 1.2), format!("slope {s:.4} +- {:.4} (range [0.8, 1.2])", rep.fit.half_width)))
}

fn c5_spectral_space() -> Outcome {
    let cfg = ExperimentConfig {
        space_levels: vec![4, 8, 16, 32],
        space_reference: 256,
        tau: 2f64.powi(-8),
        samples: 200,
        ..study_config()
    };
    let rep = spatial_study(&cfg)?;
    let s = rep.fit.slope;
    Ok((in_range(s, 0.8, 1.2), format!("slope {s:.4} +- {:.4} (range [0.8, 1.2])", rep.fit.half_width)))
}

fn c6_fem_space() -> Outcome {
    let cfg = ExperimentConfig {
        space_levels: vec![3, 7, 15, 31],
        space_reference: 255,
        tau: 2f64.powi(-8),
        samples: 100,
        seed: SEED_STUDY,
        ..ExperimentConfig::fem()
    };
    let rep = spatial_study(&cfg)?;
    let s = rep.fit.slope;
    Ok((s >= 0.55, format!("slope {s:.4} +- {:.4} (minimum 0.55)", rep.fit.half_width)))
}

fn c7_oracle() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(SEED_ORACLE);
    let b = SpectralBasis::new(1)?;
    let drift = CubicDrift::default();
    let lam = std::f64::consts::PI.powi(2);
    let w = lam.sqrt();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let tau = r.random_range(1e-3..=0.5);
        let (u, v, dw) = (r.random_range(-3.0..3.0), r.random_range(-3.0..3.0), r.random_range(-1.0..1.0));
        let ops = StepOperators::for_backend(&b, tau)?;
        let mut stepper = Stepper::new(&b, &ops, &drift, SolverConfig::default())?;
        let x = State::new(Field::new(vec![u])?, Field::new(vec![v])?)?;
        let (next, _) = stepper.step(&x, &Field::new(vec![dw])?)?;

        // P_1 (c e_1)^3 = (3/2) c^3, averaged along the segment
        let g = |c1: f64| 0.375 * (u.powi(3) + u * u * c1 + u * c1 * c1 + c1.powi(3));
        let (c, s) = ((w * tau).cos(), (w * tau).sin());
        let phi = |c1: f64| c1 - (c * u + s / w * v - (1.0 - c) / lam * g(c1));
        let (mut lo, mut hi) = (-1.0, 1.0);
        while phi(lo) > 0.0 {
            lo *= 2.0;
        }
        while phi(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
                break;
            }
        }
        let u1 = 0.5 * (lo + hi);
        let v1 = -w * s * u + c * v - s / w * g(u1) + dw;
        worst = worst
            .max((next.u.coeffs()[0] - u1).abs())
            .max((next.v.coeffs()[0] - v1).abs());
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.3e} (tolerance 1e-10)")))
}

/// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                (p0, p1) = (p1, ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf);
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn c8_avf() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(SEED_AVF);
    let rule = gauss_legendre(64);
    let weight_sum: f64 = rule.iter().map(|p| p.1).sum();
    let mut quad_err: f64 = 0.0;
    let mut grad_err: f64 = 0.0;
    for k in 0..10_000 {
        let drift = if k % 2 == 0 {
            CubicDrift::default()
        } else {
            let d = CubicDrift {
                a3: r.random_range(0.1..2.0),
                a2: r.random_range(-2.0..2.0),
                a1: r.random_range(-2.0..2.0),
                a0: r.random_range(-2.0..2.0),
                c1: 0.0,
            };
            CubicDrift { c1: d.lower_bound_constant(), ..d }
        };
        let (a, b) = (r.random_range(-5.0..5.0), r.random_range(-5.0..5.0));
        let quad: f64 = rule.iter().map(|&(t, w)| w * drift.eval_f(a + t * (b - a))).sum();
        quad_err = quad_err.max((drift.avf(a, b) - quad).abs());
        let lhs = drift.eval_potential(b) - drift.eval_potential(a);
        let rhs = drift.avf(a, b) * (b - a);
        let scale = drift.eval_potential(a).abs().max(drift.eval_potential(b).abs()).max(f64::MIN_POSITIVE);
        grad_err = grad_err.max((lhs - rhs).abs() / scale);
    }
    Ok((
        quad_err <= 1e-12 && grad_err <= 1e-13 && (weight_sum - 1.0).abs() < 1e-14,
        format!("quadrature {quad_err:.3e} (tolerance 1e-12), discrete gradient {grad_err:.3e} relative (tolerance 1e-13)"),
    ))
}

fn c9_linear() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(SEED_LINEAR);
    let j = 64;
    let b = SpectralBasis::new(j)?;
    let tau = 0.05;
    let drift = CubicDrift::zero();
    let ops = StepOperators::for_backend(&b, tau)?;
    let model = NoiseModel::power_law(0.5005, j, 1.0)?;
    let table = sample_increments(&model, &SeedPlan::new(SEED_LINEAR), 0, 100, tau)?;
    let x0 = random_state(&mut r, &b, &CubicDrift::default(), 10.0)?;
    let mut stepper = Stepper::new(&b, &ops, &drift, SolverConfig::default())?;
    let mut states = Vec::new();
    stepper.integrate(&x0, &table, |_, x| states.push(x.clone()))?;
    let mut worst: f64 = 0.0;
    for (k, &lam) in b.lambdas().iter().enumerate() {
        let w = lam.sqrt();
        let (c, s) = ((w * tau).cos(), (w * tau).sin());
        let (mut u, mut v) = (x0.u.coeffs()[k], x0.v.coeffs()[k]);
        for n in 0..100 {
            (u, v) = (c * u + s / w * v, -w * s * u + c * v + table.row(n)[k]);
            let x = &states[n + 1];
            worst = worst.max((u - x.u.coeffs()[k]).abs()).max((v - x.v.coeffs()[k]).abs());
        }
    }
    Ok((worst <= 1e-13, format!("max deviation {worst:.3e} over 100 steps (tolerance 1e-13)")))
}

fn c10_velocity() -> Outcome {
    let cfg = ExperimentConfig {
        resolution: 64,
        tau_levels: (2..=6).map(|k| 2f64.powi(-k)).collect(),
        tau_reference: 2f64.powi(-9),
        samples: 200,
        noise: NoiseSpec {
            s: 1.5005,
            gamma: 2.0,
            modes: None,
        },
        ..study_config()
    };
    let rep = temporal_study(&cfg)?;
    let fit = rep.fit_component(ErrorComponent::VelocityL2)?;
    Ok((
        in_range(fit.slope, 0.75, 1.25),
        format!("L2 velocity slope {:.4} +- {:.4} (range [0.75, 1.25])", fit.slope, fit.half_width),
    ))
}
