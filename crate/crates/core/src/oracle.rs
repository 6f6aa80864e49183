//! Independent verification machinery: a seeded Monte Carlo population
//! simulator and a brute-force grid search over feasible schemes.
//!
//! Neither path shares algebra with the closed forms in [`crate::metrics`]:
//! the simulator estimates outcomes by drawing students, and the grid oracle
//! maximizes admissions subject to the university's per-score-cell
//! break-even constraint written in coefficient form.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{
    self, cell_mass, cell_mass_no_test, cell_numerator, cell_numerator_no_test, validate,
};
use crate::schemes::{SignalingScheme, Variant};
use crate::{ModelParams, Result};

/// Simulation size, seed, and model variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_students: u64,
    pub seed: u64,
    pub variant: Variant,
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn binomial(successes: u64, trials: u64) -> Estimate {
        if trials == 0 {
            return Estimate {
                mean: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let n = trials as f64;
        let mean = successes as f64 / n;
        Estimate {
            mean,
            stderr: (mean * (1.0 - mean) / n).sqrt(),
        }
    }

    /// Distance from `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.mean == target { 0.0 } else { f64::INFINITY }
        } else {
            (self.mean - target) / self.stderr
        }
    }
}

/// Monte Carlo estimates of the four outcome metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub utility: Estimate,
    pub fpr: Estimate,
    pub fnr: Estimate,
    pub university_utility: Estimate,
}

/// Students per RNG sub-stream. Batches draw from independently seeded
/// streams of the same generator, so the merged tallies do not depend on how
/// batches would be scheduled.
const BATCH: u64 = 1 << 16;

/// Simulate a population of students through a committed scheme.
///
/// Each student draws a type, a grade, a score when the variant has one, and
/// a signal from the scheme; the university admits exactly the accept-signal
/// students, which for every scheme constructed by this crate under its
/// preconditions matches its posterior best response (see
/// [`crate::metrics::signal_posteriors`] for the analytic check). The random
/// source is a counter-based stream cipher generator, so a given seed
/// produces identical output on every platform.
pub fn simulate(
    params: &ModelParams,
    scheme: &SignalingScheme,
    config: &SimConfig,
) -> Result<SimEstimate> {
    if config.n_students == 0 {
        return Err(Error::usage("n_students must be at least 1"));
    }
    if config.variant != scheme.variant() {
        return Err(Error::usage("simulation variant does not match the scheme"));
    }
    if (config.variant == Variant::WithTest) != params.has_test() {
        return Err(Error::usage(
            "simulation variant does not match the parameters",
        ));
    }
    params.check_ranges()?;
    let (p, q) = (params.p, params.q);

    let mut n_high = 0u64;
    let mut admitted_high = 0u64;
    let mut admitted_low = 0u64;

    let batches = config.n_students.div_ceil(BATCH);
    for batch in 0..batches {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(batch);
        let quota = BATCH.min(config.n_students - batch * BATCH);
        for _ in 0..quota {
            let t = rng.random::<f64>() < p;
            let g = if rng.random::<f64>() < q { t } else { !t };
            let accept_prob = match (scheme, params.delta) {
                (SignalingScheme::NoTest { accept }, None) => accept[g as usize],
                (SignalingScheme::WithTest { accept }, Some(d)) => {
                    let s = if rng.random::<f64>() < d { t } else { !t };
                    accept[g as usize][s as usize]
                }
                _ => unreachable!("variant consistency checked above"),
            };
            let admitted = rng.random::<f64>() < accept_prob;
            if t {
                n_high += 1;
                if admitted {
                    admitted_high += 1;
                }
            } else if admitted {
                admitted_low += 1;
            }
        }
    }

    let n = config.n_students;
    let utility = Estimate::binomial(admitted_high + admitted_low, n);
    let fpr = Estimate::binomial(admitted_low, n - n_high);
    let fnr = Estimate::binomial(n_high - admitted_high, n_high);
    let nf = n as f64;
    let mean = (admitted_high as f64 - admitted_low as f64) / nf;
    let second_moment = (admitted_high + admitted_low) as f64 / nf;
    let university_utility = Estimate {
        mean,
        stderr: ((second_moment - mean * mean).max(0.0) / nf).sqrt(),
    };
    Ok(SimEstimate {
        utility,
        fpr,
        fnr,
        university_utility,
    })
}

/// Which scheme family the grid oracle searches over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchSpace {
    /// Both grade cells free.
    NoTest,
    /// Score decisive on its own: high-score cells pinned to 1, the
    /// high-grade/low-score cell pinned by its sign, low/low gridded.
    WithTest,
    /// Only the corners decisive: low-grade cells gridded at both scores.
    Relaxed,
}

/// Best feasible grid point found by the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub scheme: SignalingScheme,
    pub utility: f64,
}

/// Random parameters satisfying the preconditions of a search space, sampled
/// away from exact assumption boundaries. Used by seeded cross-check runs.
pub fn sample_params<R: Rng>(space: SearchSpace, rng: &mut R) -> ModelParams {
    let base = |rng: &mut R| {
        let p = 0.05 + 0.40 * rng.random::<f64>();
        let q = ((1.0 - p) + p * 0.999 * rng.random::<f64>()).min(1.0);
        (p, q)
    };
    match space {
        SearchSpace::NoTest => {
            let (p, q) = base(rng);
            ModelParams::no_test(p, q).expect("sampled in range")
        }
        SearchSpace::WithTest => {
            let (p, q) = base(rng);
            let delta = ((1.0 - p) + p * 0.999 * rng.random::<f64>()).min(1.0);
            ModelParams::with_test(p, q, delta).expect("sampled in range")
        }
        SearchSpace::Relaxed => loop {
            let (p, q) = base(rng);
            let delta = (0.5 + 0.5 * rng.random::<f64>()).min(1.0);
            let params = ModelParams::with_test(p, q, delta).expect("sampled in range");
            let report = validate(&params).expect("sampled in range");
            if report.core_ok() && report.relaxed_ok == Some(true) {
                return params;
            }
        },
    }
}

fn check_resolution(resolution: f64) -> Result<usize> {
    if !(resolution > 0.0 && resolution <= 0.1) {
        return Err(Error::OutOfRange {
            name: "resolution",
            value: resolution,
            expected: "a grid step in (0, 0.1]",
        });
    }
    Ok((1.0 / resolution).ceil() as usize)
}

/// Grid search for the feasible scheme maximizing the school's admission
/// rate, with one level of local refinement (step/100) around the best
/// coarse point.
///
/// Feasibility is the university's break-even constraint on the accept
/// signal, per score cell when a test is present. The returned utility is
/// within twice the resolution of the true optimum and never above it.
pub fn brute_force_optimal(
    params: &ModelParams,
    space: SearchSpace,
    resolution: f64,
) -> Result<OracleResult> {
    let steps = check_resolution(resolution)?;
    let report = validate(params)?;
    model::require_core(&report)?;
    match space {
        SearchSpace::NoTest => Ok(no_test_search(params, steps)),
        SearchSpace::WithTest => {
            if report.score_informative() != Some(true) {
                return Err(Error::AssumptionViolated {
                    assumption: "score-informativeness",
                    detail: "the decisive-score search space requires the test to be decisive on its own; use the relaxed space otherwise".into(),
                });
            }
            with_test_search(params, steps)
        }
        SearchSpace::Relaxed => {
            if report.relaxed_ok != Some(true) {
                return Err(Error::AssumptionViolated {
                    assumption: "corner-informativeness",
                    detail: "the relaxed search space requires u(1,1) >= 0 > u(0,0)".into(),
                });
            }
            relaxed_search(params, steps)
        }
    }
}

/// One-dimensional feasible maximization of `gain·x + base` over a grid of
/// `[lo, hi]`, under `slope·x + offset >= 0`.
struct LineSearch {
    gain: f64,
    slope: f64,
    offset: f64,
}

impl LineSearch {
    fn best_on(&self, lo: f64, hi: f64, steps: usize) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for i in 0..=steps {
            let x = lo + (hi - lo) * (i as f64) / (steps as f64);
            if self.slope * x + self.offset < 0.0 {
                continue;
            }
            let value = self.gain * x;
            if best.is_none_or(|(v, _)| value > v) {
                best = Some((value, x));
            }
        }
        best.map(|(_, x)| x)
    }

    /// Coarse pass over [0, 1] then refinement around the winner.
    fn solve(&self, steps: usize) -> Option<f64> {
        let coarse = self.best_on(0.0, 1.0, steps)?;
        let step = 1.0 / steps as f64;
        self.best_on((coarse - step).max(0.0), (coarse + step).min(1.0), 200)
    }
}

struct PlaneSearch {
    num_low: f64,
    num_high: f64,
    mass_low: f64,
    mass_high: f64,
}

impl PlaneSearch {
    fn scan(
        &self,
        (lo0, hi0): (f64, f64),
        (lo1, hi1): (f64, f64),
        n: usize,
        best: &mut (f64, f64, f64),
    ) {
        for i1 in 0..=n {
            let x1 = lo1 + (hi1 - lo1) * (i1 as f64) / (n as f64);
            for i0 in 0..=n {
                let x0 = lo0 + (hi0 - lo0) * (i0 as f64) / (n as f64);
                if self.num_low * x0 + self.num_high * x1 < 0.0 {
                    continue;
                }
                let value = self.mass_low * x0 + self.mass_high * x1;
                if value > best.0 {
                    *best = (value, x0, x1);
                }
            }
        }
    }
}

fn no_test_search(params: &ModelParams, steps: usize) -> OracleResult {
    let (p, q) = (params.p, params.q);
    let plane = PlaneSearch {
        num_low: cell_numerator_no_test(p, q, false),
        num_high: cell_numerator_no_test(p, q, true),
        mass_low: cell_mass_no_test(p, q, false),
        mass_high: cell_mass_no_test(p, q, true),
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    plane.scan((0.0, 1.0), (0.0, 1.0), steps, &mut best);
    let (_, x0, x1) = best;
    let step = 1.0 / steps as f64;
    plane.scan(
        ((x0 - step).max(0.0), (x0 + step).min(1.0)),
        ((x1 - step).max(0.0), (x1 + step).min(1.0)),
        200,
        &mut best,
    );
    OracleResult {
        scheme: SignalingScheme::NoTest {
            accept: [best.1, best.2],
        },
        utility: best.0,
    }
}

fn with_test_search(params: &ModelParams, steps: usize) -> Result<OracleResult> {
    let (p, q) = (params.p, params.q);
    let d = params.delta_or_usage()?;
    let n = |g, s| cell_numerator(p, q, d, g, s);
    let m = |g, s| cell_mass(p, q, d, g, s);
    if n(true, true) + n(false, true) < 0.0 {
        return Err(Error::Internal(
            "high-score cell infeasible despite a decisive score".into(),
        ));
    }
    let x10 = if n(true, false) >= 0.0 { 1.0 } else { 0.0 };
    let line = LineSearch {
        gain: m(false, false),
        slope: n(false, false),
        offset: n(true, false) * x10,
    };
    let x00 = line.solve(steps).unwrap_or(0.0);
    let utility = m(true, true) + m(false, true) + m(true, false) * x10 + m(false, false) * x00;
    Ok(OracleResult {
        scheme: SignalingScheme::WithTest {
            accept: [[x00, 1.0], [x10, 1.0]],
        },
        utility,
    })
}

fn relaxed_search(params: &ModelParams, steps: usize) -> Result<OracleResult> {
    let (p, q) = (params.p, params.q);
    let d = params.delta_or_usage()?;
    let n = |g, s| cell_numerator(p, q, d, g, s);
    let m = |g, s| cell_mass(p, q, d, g, s);
    let x10 = if n(true, false) >= 0.0 { 1.0 } else { 0.0 };
    // The two free cells face independent constraints, one per score cell, so
    // the search is two separable line searches rather than a product grid.
    let high = LineSearch {
        gain: m(false, true),
        slope: n(false, true),
        offset: n(true, true),
    };
    let low = LineSearch {
        gain: m(false, false),
        slope: n(false, false),
        offset: n(true, false) * x10,
    };
    let x01 = high.solve(steps).unwrap_or(0.0);
    let x00 = low.solve(steps).unwrap_or(0.0);
    let utility =
        m(true, true) + m(false, true) * x01 + m(true, false) * x10 + m(false, false) * x00;
    Ok(OracleResult {
        scheme: SignalingScheme::WithTest {
            accept: [[x00, x01], [x10, 1.0]],
        },
        utility,
    })
}

/// Debug-mode search gridding every cell at a coarse resolution, with no
/// sign-analysis pinning and no refinement. A slow sanity check on the
/// pinned searches.
pub fn brute_force_full_grid(
    params: &ModelParams,
    variant: Variant,
    resolution: f64,
) -> Result<OracleResult> {
    let steps = check_resolution(resolution)?;
    let report = validate(params)?;
    model::require_core(&report)?;
    match variant {
        Variant::NoTest => Ok(no_test_search(params, steps)),
        Variant::WithTest => {
            let (p, q) = (params.p, params.q);
            let d = params.delta_or_usage()?;
            let n = |g, s| cell_numerator(p, q, d, g, s);
            let m = |g, s| cell_mass(p, q, d, g, s);
            let point = |i: usize| i as f64 / steps as f64;
            let mut best = (f64::NEG_INFINITY, [[0.0f64; 2]; 2]);
            for i11 in 0..=steps {
                let x11 = point(i11);
                for i01 in 0..=steps {
                    let x01 = point(i01);
                    if n(true, true) * x11 + n(false, true) * x01 < 0.0 {
                        continue;
                    }
                    let high_mass = m(true, true) * x11 + m(false, true) * x01;
                    for i10 in 0..=steps {
                        let x10 = point(i10);
                        for i00 in 0..=steps {
                            let x00 = point(i00);
                            if n(true, false) * x10 + n(false, false) * x00 < 0.0 {
                                continue;
                            }
                            let value =
                                high_mass + m(true, false) * x10 + m(false, false) * x00;
                            if value > best.0 {
                                best = (value, [[x00, x01], [x10, x11]]);
                            }
                        }
                    }
                }
            }
            Ok(OracleResult {
                scheme: SignalingScheme::WithTest { accept: best.1 },
                utility: best.0,
            })
        }
    }
}
