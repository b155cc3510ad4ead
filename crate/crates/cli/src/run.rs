//! The end-to-end pipeline: nominal run, sensitivity system, envelopes, bounds, perturbed run, gap.

use std::sync::Arc;

use serde::Serialize;

use gapbound::bounds::{
    bound1, bound1_tight, bound2, corollary_convergence, g_of_t, h_integral, scale_to_gap, theorem2_bound, uniform_grid, z_lti,
    BoundKind, Convergence, Partition,
};
use gapbound::envelopes::{
    fit_envelope, lemma3_envelope, sample_deviation, sample_expm_norm, Envelope, FitOptions,
};
use gapbound::powermodels::{resonant_frequency, GeneratorModel, GovernorModel, PmProfile, Sweep};
use gapbound::sensitivity::{
    build_bounded_disturbance_sensitivity, build_input_sensitivity, param_jacobian, sensitivity_to_params, simulate, SteadyCheck,
    VectorFn,
};
use gapbound::{BoundResult, Error, LtvSystem, Trajectory};

use crate::error::CliError;
use crate::scenario::{Disturbance, EnvelopeChoice, Frequency, Scenario};

/// Fraction of the horizon treated as the tail in the convergence check.
pub const TAIL_FRACTION: f64 = 0.1;

/// Per-bound outcome on the `(δ, ω)` gap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSummary {
    pub kind: BoundKind,
    /// Gap inside `[lower, upper]` at every grid time, per entry.
    pub contained: [bool; 2],
    /// Largest bound magnitude over largest gap magnitude, per entry.
    pub looseness: [f64; 2],
    /// Grid times of the first violation, per entry.
    pub first_violation: [Option<f64>; 2],
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub scenario: Scenario,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub grid: Vec<f64>,
    pub nominal: Trajectory,
    /// Plant run; absent if its integration failed.
    pub perturbed: Option<Trajectory>,
    /// `perturbed − nominal` on the grid for `(δ, ω)`.
    pub gap: Vec<[f64; 2]>,
    pub env_exp: Envelope,
    pub env_da: Envelope,
    /// Disturbance size multiplying the sensitivity bounds.
    pub scale: f64,
    /// Entrywise bound on the sensitivity input for a unit disturbance.
    pub input_magnitude: f64,
    pub k2inf: f64,
    /// Frequency of the sine disturbance, rad/s.
    pub frequency: Option<f64>,
    /// Sensitivity to a unit disturbance, when the disturbance signal is known.
    pub sensitivity: Option<Trajectory>,
    pub z_lti: Option<Trajectory>,
    pub convergence: Option<Convergence<f64>>,
    /// Bounds on the sensitivity to a unit disturbance.
    pub sensitivity_bounds: Vec<BoundResult>,
    /// Sensitivity bounds scaled to the disturbance size.
    pub bounds: Vec<BoundResult>,
    pub summaries: Vec<BoundSummary>,
    /// Set when part of the pipeline could not be evaluated.
    pub failure: Option<String>,
}

impl RunReport {
    pub fn contained(&self, entry: usize) -> bool {
        self.failure.is_none() && self.summaries.iter().all(|s| s.contained[entry])
    }

    pub fn bound(&self, kind: BoundKind) -> Option<&BoundResult> {
        self.bounds.iter().find(|b| b.kind == kind)
    }

    pub fn gap_entry(&self, k: usize) -> Vec<f64> {
        self.gap.iter().map(|g| g[k]).collect()
    }

    /// Config echo, tool version and per-bound outcome as JSON.
    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            tool: &'static str,
            version: &'static str,
            seed: Option<u64>,
            scenario: &'a Scenario,
            env_exp: &'a Envelope,
            env_da: &'a Envelope,
            scale: f64,
            input_magnitude: f64,
            k2inf: f64,
            frequency: Option<f64>,
            convergence_ratio: Option<f64>,
            bounds: &'a [BoundSummary],
            failure: &'a Option<String>,
        }
        serde_json::to_string_pretty(&Summary {
            tool: env!("CARGO_PKG_NAME"),
            version: self.version,
            seed: self.seed,
            scenario: &self.scenario,
            env_exp: &self.env_exp,
            env_da: &self.env_da,
            scale: self.scale,
            input_magnitude: self.input_magnitude,
            k2inf: self.k2inf,
            frequency: self.frequency,
            convergence_ratio: self.convergence.map(|c| c.ratio),
            bounds: &self.summaries,
            failure: &self.failure,
        })
        .expect("summary serializes")
    }
}

fn fit_options(inflation: f64) -> FitOptions {
    FitOptions { inflation, ..FitOptions::default() }
}

fn envelopes(cfg: &Scenario, sys: &LtvSystem) -> Result<(Envelope, Envelope), CliError> {
    let fit_grid = |step: f64| uniform_grid(0.0, cfg.horizon, step);
    match cfg.envelope {
        EnvelopeChoice::Fit { inflation, grid_step } => {
            let grid = fit_grid(grid_step.unwrap_or(cfg.grid_step))?;
            let exp = fit_envelope(&sample_expm_norm(sys.a_inf(), &grid)?, &grid, &fit_options(inflation))?;
            let da = fit_envelope(&sample_deviation(sys, &grid)?, &grid, &fit_options(inflation))?;
            Ok((exp, da))
        }
        EnvelopeChoice::Lemma3 { inflation } => {
            let grid = fit_grid(cfg.grid_step)?;
            let exp: Envelope = lemma3_envelope(sys.a_inf())?.into();
            // the Lyapunov rate is not always a valid decay rate, so check it on the grid
            let samples = sample_expm_norm(sys.a_inf(), &grid)?;
            if let Some((s, v)) = grid.iter().zip(&samples).find(|(&s, &v)| exp.value(s) < v) {
                return Err(Error::Assumption(format!(
                    "Lyapunov envelope {:e} falls below ‖e^(A(∞)s)‖ = {v:e} at s = {s}",
                    exp.value(*s)
                ))
                .into());
            }
            let da = fit_envelope(&sample_deviation(sys, &grid)?, &grid, &fit_options(inflation))?;
            Ok((exp, da))
        }
        EnvelopeChoice::Explicit { exp, d_a } => Ok((exp, d_a)),
    }
}

fn integration_failure(e: Error) -> Result<String, CliError> {
    match e {
        Error::Integration { .. } | Error::Domain(_) => Ok(e.to_string()),
        e => Err(e.into()),
    }
}

/// A failed plant integration becomes a marker on the report rather than an error.
fn plant_run(run: gapbound::Result<Trajectory>, failure: &mut Option<String>) -> Result<Option<Trajectory>, CliError> {
    match run {
        Ok(t) => Ok(Some(t)),
        Err(e) => {
            *failure = Some(integration_failure(e)?);
            Ok(None)
        }
    }
}

/// Runs one scenario end to end.
pub fn run_scenario(cfg: &Scenario) -> Result<RunReport, CliError> {
    run_scenario_seeded(cfg, None)
}

/// As [`run_scenario`], recording `seed` in the report. The pipeline is deterministic,
/// so the seed only labels the output.
pub fn run_scenario_seeded(cfg: &Scenario, seed: Option<u64>) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let ctrl = cfg.integrator;
    let t_end = cfg.horizon;
    let gen = GeneratorModel::new(cfg.params.generator)?;
    let lambda = gen.lambda::<f64>();
    let pm = lambda[0];
    let nominal = Arc::new(simulate(&gen, &cfg.x0, 0.0, t_end, &lambda, &ctrl)?);
    let model = Arc::new(gen);
    let check = SteadyCheck { steady_tol: cfg.options.steady_tol, ..SteadyCheck::default() };
    let bounded = build_bounded_disturbance_sensitivity(model.clone(), nominal.clone(), &lambda, &check)?;
    let input_magnitude = bounded.input_magnitude().unwrap_or(0.0);
    let grid = uniform_grid(0.0, t_end, cfg.grid_step)?;
    let (env_exp, env_da) = envelopes(cfg, &bounded)?;

    let mut failure = None;
    let mut frequency = None;
    // plant run, disturbance size, and the unit disturbance signal when known
    let (perturbed, scale, dlambda): (Option<Trajectory>, Option<f64>, Option<VectorFn<f64>>) = match cfg.disturbance {
        Disturbance::Constant { epsilon } => {
            let run = simulate(&gen, &cfg.x0, 0.0, t_end, &[pm + epsilon], &ctrl);
            let unit: VectorFn<f64> = Arc::new(|_t| vec![1.0]);
            (plant_run(run, &mut failure)?, Some(epsilon), Some(unit))
        }
        Disturbance::Sine { magnitude, frequency: f, known_input } => {
            let w = match f {
                Frequency::RadPerSec(w) => w,
                Frequency::Resonant(_) => {
                    let b = param_jacobian(&gen, t_end, nominal.last_state(), &lambda)?;
                    resonant_frequency(bounded.a_inf(), &b.column(0), &Sweep::default())?
                }
            };
            frequency = Some(w);
            let plant = gen.with_profile(PmProfile::Sine { magnitude, omega: w });
            let run = simulate(&plant, &cfg.x0, 0.0, t_end, &lambda, &ctrl);
            let unit: Option<VectorFn<f64>> = known_input.then(|| Arc::new(move |t: f64| vec![(w * t).sin()]) as VectorFn<f64>);
            (plant_run(run, &mut failure)?, Some(magnitude), unit)
        }
        Disturbance::GovernorMismatch { known_input } => {
            let plant = GovernorModel::new(cfg.params.generator, cfg.params.governor)?;
            match plant_run(simulate(&plant, &plant.initial_state(cfg.x0), 0.0, t_end, &[], &ctrl), &mut failure)? {
                Some(run) => {
                    // empirical disturbance size: sup of |P_m,gov − P_m| over the plant run
                    let eta = run.states().map(|x| (plant.pm(x) - pm).abs()).fold(0.0, f64::max);
                    let unit = known_input.then(|| {
                        let run = Arc::new(run.clone());
                        Arc::new(move |t: f64| {
                            let t = t.clamp(run.start(), run.end());
                            let x = run.sample(t).expect("clamped into span");
                            vec![if eta > 0.0 { (plant.pm(&x) - pm) / eta } else { 0.0 }]
                        }) as VectorFn<f64>
                    });
                    (Some(run), Some(eta), unit)
                }
                None => (None, None, None),
            }
        }
    };

    let k2inf = cfg.options.k2inf.unwrap_or((bounded.dimension() as f64).sqrt());
    let mut sensitivity = None;
    let mut zlti = None;
    let mut convergence = None;
    let mut sensitivity_bounds = Vec::new();
    let mut bounds = Vec::new();
    if let Some(scale) = scale {
        if let Some(dl) = dlambda {
            let sys = build_input_sensitivity(model.clone(), nominal.clone(), &lambda, dl, &check)?;
            let z = sensitivity_to_params(&sys, &ctrl)?;
            let zl = z_lti(&sys, &ctrl)?;
            convergence = Some(corollary_convergence(&z, &zl, TAIL_FRACTION)?);
            sensitivity = Some(z);
            zlti = Some(zl);
        }
        let h = h_integral(&env_exp, &env_da, &grid)?;
        let mut g = None;
        for &kind in &cfg.bounds {
            let b = match kind {
                BoundKind::Theorem2 => theorem2_bound(input_magnitude, k2inf, &env_exp, &h, &grid, bounded.dimension())?,
                _ => {
                    let zl = zlti.as_ref().expect("validated: signal known for bounds other than theorem2");
                    match kind {
                        BoundKind::Bound2 => bound2(zl, &h, &grid)?,
                        _ => {
                            if g.is_none() {
                                g = Some(g_of_t(zl, &env_exp, &env_da, &grid)?);
                            }
                            let g = g.as_deref().expect("just computed");
                            if kind == BoundKind::Bound1 {
                                bound1(zl, g, &h, &grid)?
                            } else {
                                let part = Partition::Uniform(cfg.options.partition_pieces);
                                bound1_tight(zl, g, &env_exp, &env_da, &grid, &part)?
                            }
                        }
                    }
                }
            };
            bounds.push(scale_to_gap(&b, scale)?);
            sensitivity_bounds.push(b);
        }
    }

    let mut gap = Vec::new();
    let mut summaries = Vec::new();
    if let Some(p) = &perturbed {
        let nom = nominal.resample(&grid)?;
        let per = p.resample(&grid)?;
        gap = nom.iter().zip(&per).map(|(a, b)| [b[0] - a[0], b[1] - a[1]]).collect();
        let entries = [0, 1].map(|k| gap.iter().map(|g| g[k]).collect::<Vec<f64>>());
        let tol = cfg.options.containment_tol;
        for b in &bounds {
            let first = [0, 1].map(|k| b.violations(k, &entries[k], tol).first().map(|&i| grid[i]));
            summaries.push(BoundSummary {
                kind: b.kind,
                contained: first.map(|f| f.is_none()),
                looseness: [0, 1].map(|k| b.looseness(k, &entries[k])),
                first_violation: first,
            });
        }
    }

    Ok(RunReport {
        scenario: cfg.clone(),
        version: env!("CARGO_PKG_VERSION"),
        seed,
        grid,
        nominal: Arc::try_unwrap(nominal).unwrap_or_else(|a| (*a).clone()),
        perturbed,
        gap,
        env_exp,
        env_da,
        scale: scale.unwrap_or(f64::NAN),
        input_magnitude,
        k2inf,
        frequency,
        sensitivity,
        z_lti: zlti,
        convergence,
        sensitivity_bounds,
        bounds,
        summaries,
        failure,
    })
}

/// Runs scenarios concurrently, one thread each, returning results in input order.
pub fn run_batch(cfgs: &[Scenario], seed: Option<u64>) -> Vec<Result<RunReport, CliError>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = cfgs.iter().map(|c| s.spawn(move || run_scenario_seeded(c, seed))).collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    })
}
