//! Numerical verification of the model's comparative statics, plus the
//! parameter sweeps behind the utility-ratio figures.
//!
//! Each check evaluates an inequality over a grid (or over all ordered grid
//! pairs) and reports the minimum slack together with the witness point that
//! attains it. A check holds when its margin is no worse than
//! [`BOUND_TOLERANCE`] below zero.

use std::io::Write;

use serde::Serialize;

use crate::error::Error;
use crate::metrics::{closed_form_no_test, closed_form_with_test};
use crate::model::{classify_regime, regime_boundaries, score_boundaries, validate};
use crate::{ModelParams, Result};

/// Slack below zero tolerated before a bound check is reported as failing.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Parameter point at which a check's minimum slack was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub p: f64,
    pub q: f64,
    /// The smaller grade accuracy of an ordered pair, when the inequality
    /// compares two accuracies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_other: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl Witness {
    pub fn point(p: f64, q: f64) -> Witness {
        Witness {
            p,
            q,
            q_other: None,
            delta: None,
        }
    }

    pub fn pair(p: f64, q: f64, q_other: f64) -> Witness {
        Witness {
            p,
            q,
            q_other: Some(q_other),
            delta: None,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Witness {
        self.delta = Some(delta);
        self
    }
}

/// Result of one inequality checked over a grid.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub holds: bool,
    /// Minimum slack of the inequality over the grid; negative means violated.
    pub margin: f64,
    pub witness: Witness,
}

impl BoundCheck {
    /// Build a check from a raw margin; it holds when the margin is no worse
    /// than [`BOUND_TOLERANCE`] below zero.
    pub fn from_margin(name: impl Into<String>, margin: f64, witness: Witness) -> BoundCheck {
        BoundCheck {
            name: name.into(),
            holds: margin >= -BOUND_TOLERANCE,
            margin,
            witness,
        }
    }
}

/// Tracks the minimum margin seen and where.
struct Tracker {
    name: &'static str,
    margin: f64,
    witness: Option<Witness>,
}

impl Tracker {
    fn new(name: &'static str) -> Tracker {
        Tracker {
            name,
            margin: f64::INFINITY,
            witness: None,
        }
    }

    fn update(&mut self, margin: f64, witness: Witness) {
        if margin < self.margin {
            self.margin = margin;
            self.witness = Some(witness);
        }
    }

    /// Emit the check, or `None` if no grid point applied.
    fn finish(self) -> Option<BoundCheck> {
        self.witness
            .map(|w| BoundCheck::from_margin(self.name, self.margin, w))
    }
}

/// Evenly spaced grid with exact endpoints.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "a grid needs at least two points");
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// The canonical grade-accuracy grid `[1-p, 1]`.
///
/// The rounded left endpoint can land a few ulps on the wrong side of the
/// grade-informativeness boundary (the comparison is exact, with no epsilon
/// band); it is stepped up until the boundary point itself is admissible.
pub fn accuracy_grid(p: f64, n: usize) -> Vec<f64> {
    let mut grid = linspace(1.0 - p, 1.0, n);
    for _ in 0..8 {
        match ModelParams::no_test(p, grid[0]).and_then(|params| validate(&params)) {
            Ok(report) if !report.grades_informative() => grid[0] = grid[0].next_up(),
            _ => break,
        }
    }
    grid
}

fn check_sorted(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::usage("grid needs at least two points"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::usage("grid must be strictly increasing"));
    }
    Ok(())
}

fn is_canonical_grid(p: f64, grid: &[f64]) -> bool {
    grid.first().is_some_and(|&q0| (q0 - (1.0 - p)).abs() <= 1e-12)
        && grid.last() == Some(&1.0)
}

struct NoTestCurves {
    u_r: Vec<f64>,
    u_s: Vec<f64>,
    fpr_r: Vec<f64>,
    fpr_s: Vec<f64>,
    fnr_r: Vec<f64>,
    fnr_s: Vec<f64>,
}

fn no_test_curves(p: f64, grid: &[f64]) -> Result<NoTestCurves> {
    let mut curves = NoTestCurves {
        u_r: Vec::with_capacity(grid.len()),
        u_s: Vec::with_capacity(grid.len()),
        fpr_r: Vec::with_capacity(grid.len()),
        fpr_s: Vec::with_capacity(grid.len()),
        fnr_r: Vec::with_capacity(grid.len()),
        fnr_s: Vec::with_capacity(grid.len()),
    };
    for &q in grid {
        let params = ModelParams::no_test(p, q)?;
        let revealing = closed_form_no_test(&params, false)?;
        let strategic = closed_form_no_test(&params, true)?;
        curves.u_r.push(revealing.school_utility);
        curves.u_s.push(strategic.school_utility);
        curves.fpr_r.push(revealing.fpr);
        curves.fpr_s.push(strategic.fpr);
        curves.fnr_r.push(revealing.fnr);
        curves.fnr_s.push(strategic.fnr);
    }
    Ok(curves)
}

/// Verify how strategic and revealing utilities respond to grade accuracy:
/// strategic utility rises with accuracy but never by more than a `1/(1-p)`
/// factor, sits between one and two times the revealing utility, and the
/// revealing utility falls with accuracy but never below `1/(2(1-p))` of its
/// noisy value. Tightness at the extreme accuracies is asserted when the
/// grid spans `[1-p, 1]`.
pub fn check_utility_comparison(p: f64, q_grid: &[f64]) -> Result<Vec<BoundCheck>> {
    check_sorted(q_grid)?;
    let curves = no_test_curves(p, q_grid)?;
    let mut gain_cap = Tracker::new("strategic_utility_gain_capped");
    let mut monotone = Tracker::new("strategic_utility_grows_with_accuracy");
    let mut at_most_double = Tracker::new("strategic_at_most_twice_revealing");
    let mut dominates = Tracker::new("strategic_at_least_revealing");
    let mut noise_cap = Tracker::new("revealing_noise_gain_capped");
    let mut decreasing = Tracker::new("revealing_utility_falls_with_accuracy");

    for (j, &q) in q_grid.iter().enumerate() {
        let w = Witness::point(p, q);
        at_most_double.update(2.0 * curves.u_r[j] - curves.u_s[j], w);
        dominates.update(curves.u_s[j] - curves.u_r[j], w);
        for (i, &q_low) in q_grid.iter().enumerate().take(j) {
            let w = Witness::pair(p, q, q_low);
            gain_cap.update(curves.u_s[i] / (1.0 - p) - curves.u_s[j], w);
            monotone.update(curves.u_s[j] - curves.u_s[i], w);
            noise_cap.update(2.0 * (1.0 - p) * curves.u_r[j] - curves.u_r[i], w);
            decreasing.update(curves.u_r[i] - curves.u_r[j], w);
        }
    }

    let mut checks: Vec<BoundCheck> = [
        gain_cap, monotone, at_most_double, dominates, noise_cap, decreasing,
    ]
    .into_iter()
    .filter_map(Tracker::finish)
    .collect();

    if is_canonical_grid(p, q_grid) {
        let last = q_grid.len() - 1;
        let extremes = Witness::pair(p, 1.0, 1.0 - p);
        checks.push(BoundCheck::from_margin(
            "strategic_utility_gain_cap_tight",
            -(curves.u_s[last] / curves.u_s[0] - 1.0 / (1.0 - p)).abs(),
            extremes,
        ));
        checks.push(BoundCheck::from_margin(
            "strategic_doubles_revealing_at_full_accuracy",
            -(curves.u_s[last] / curves.u_r[last] - 2.0).abs(),
            Witness::point(p, 1.0),
        ));
        checks.push(BoundCheck::from_margin(
            "revealing_noise_gain_cap_tight",
            -(curves.u_r[0] / curves.u_r[last] - 2.0 * (1.0 - p)).abs(),
            extremes,
        ));
    }
    Ok(checks)
}

/// Verify how the error rates respond to grade accuracy and to strategic
/// signaling: the strategic false positive rate rises with accuracy (capped
/// by a `1/(1-p)` factor) and dominates the revealing one; the strategic
/// false negative rate falls with accuracy and sits within a
/// `(1-2p)/(1-p)` factor below the revealing one; revealing error rates fall
/// with accuracy.
pub fn check_fpr_fnr_comparison(p: f64, q_grid: &[f64]) -> Result<Vec<BoundCheck>> {
    check_sorted(q_grid)?;
    let curves = no_test_curves(p, q_grid)?;
    let floor = (1.0 - 2.0 * p) / (1.0 - p);

    let mut fpr_gain_cap = Tracker::new("strategic_fpr_gain_capped");
    let mut fpr_monotone = Tracker::new("strategic_fpr_grows_with_accuracy");
    let mut fnr_monotone = Tracker::new("strategic_fnr_falls_with_accuracy");
    let mut fpr_dominates = Tracker::new("strategic_fpr_dominates_revealing");
    let mut fnr_floor = Tracker::new("strategic_fnr_above_floor");
    let mut fnr_below = Tracker::new("strategic_fnr_below_revealing");
    let mut fpr_r_down = Tracker::new("revealing_fpr_falls_with_accuracy");
    let mut fnr_r_down = Tracker::new("revealing_fnr_falls_with_accuracy");

    for (j, &q) in q_grid.iter().enumerate() {
        let w = Witness::point(p, q);
        fpr_dominates.update(curves.fpr_s[j] - curves.fpr_r[j], w);
        fnr_floor.update(curves.fnr_s[j] - floor * curves.fnr_r[j], w);
        fnr_below.update(curves.fnr_r[j] - curves.fnr_s[j], w);
        for (i, &q_low) in q_grid.iter().enumerate().take(j) {
            let w = Witness::pair(p, q, q_low);
            fpr_gain_cap.update(curves.fpr_s[i] / (1.0 - p) - curves.fpr_s[j], w);
            fpr_monotone.update(curves.fpr_s[j] - curves.fpr_s[i], w);
            fnr_monotone.update(curves.fnr_s[i] - curves.fnr_s[j], w);
            fpr_r_down.update(curves.fpr_r[i] - curves.fpr_r[j], w);
            fnr_r_down.update(curves.fnr_r[i] - curves.fnr_r[j], w);
        }
    }

    let mut checks: Vec<BoundCheck> = [
        fpr_gain_cap,
        fpr_monotone,
        fnr_monotone,
        fpr_dominates,
        fnr_floor,
        fnr_below,
        fpr_r_down,
        fnr_r_down,
    ]
    .into_iter()
    .filter_map(Tracker::finish)
    .collect();

    if is_canonical_grid(p, q_grid) {
        let last = q_grid.len() - 1;
        checks.push(BoundCheck::from_margin(
            "strategic_fpr_gain_cap_tight",
            -(curves.fpr_s[last] / curves.fpr_s[0] - 1.0 / (1.0 - p)).abs(),
            Witness::pair(p, 1.0, 1.0 - p),
        ));
        checks.push(BoundCheck::from_margin(
            "fpr_ratio_starts_at_one",
            -(curves.fpr_s[0] / curves.fpr_r[0] - 1.0).abs(),
            Witness::point(p, 1.0 - p),
        ));
        // The error-rate ratio approaches its floor as grades become
        // accurate; evaluate just inside the endpoint to avoid 0/0.
        let near_one = 1.0 - 1e-10;
        let params = ModelParams::no_test(p, near_one)?;
        let revealing = closed_form_no_test(&params, false)?;
        let strategic = closed_form_no_test(&params, true)?;
        checks.push(BoundCheck::from_margin(
            "fnr_ratio_reaches_floor",
            -(strategic.fnr / revealing.fnr - floor).abs(),
            Witness::point(p, near_one),
        ));
    }
    Ok(checks)
}

/// Verify monotonicity of every grades-only curve, and, when a test is
/// present, the piecewise segment structure of the test-model utilities:
/// constant, then (revealing only) a drop and recovery between the regime
/// boundaries, then an upward jump at the second boundary followed by
/// decreasing revealing / increasing strategic utility.
pub fn check_monotonicity(p: f64, delta: Option<f64>, q_grid: &[f64]) -> Result<Vec<BoundCheck>> {
    check_sorted(q_grid)?;
    let curves = no_test_curves(p, q_grid)?;
    let mut checks = Vec::new();

    let series: [(&'static str, &[f64], bool); 6] = [
        ("strategic_utility_increasing", &curves.u_s, true),
        ("strategic_fpr_increasing", &curves.fpr_s, true),
        ("revealing_utility_decreasing", &curves.u_r, false),
        ("revealing_fpr_decreasing", &curves.fpr_r, false),
        ("revealing_fnr_decreasing", &curves.fnr_r, false),
        ("strategic_fnr_decreasing", &curves.fnr_s, false),
    ];
    for (name, values, increasing) in series {
        let mut tracker = Tracker::new(name);
        for (i, pair) in values.windows(2).enumerate() {
            let diff = if increasing {
                pair[1] - pair[0]
            } else {
                pair[0] - pair[1]
            };
            tracker.update(diff, Witness::pair(p, q_grid[i + 1], q_grid[i]));
        }
        checks.extend(tracker.finish());
    }

    let Some(d) = delta else { return Ok(checks) };
    // The piecewise segment claims below presume a score that is decisive on
    // its own; when it is not, the revealing utility can genuinely fall
    // between the boundaries (its slope there is p*delta - (1-p)(1-delta)).
    let probe = ModelParams::with_test(p, q_grid[q_grid.len() - 1], d)?;
    if validate(&probe)?.score_informative() != Some(true) {
        return Ok(checks);
    }

    let mut u_r = Vec::with_capacity(q_grid.len());
    let mut u_s = Vec::with_capacity(q_grid.len());
    let mut segment = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let params = ModelParams::with_test(p, q, d)?;
        let regime = classify_regime(&params)?;
        u_r.push(closed_form_with_test(&params, false)?.school_utility);
        u_s.push(closed_form_with_test(&params, true)?.school_utility);
        segment.push(match (
            regime.regime_01.is_nonnegative(),
            regime.regime_10.is_nonnegative(),
        ) {
            (true, false) => 1u8,
            (false, false) => 2,
            (_, true) => 3,
        });
    }
    let seg = |k: u8| -> Vec<usize> { (0..q_grid.len()).filter(|&i| segment[i] == k).collect() };
    let (s1, s2, s3) = (seg(1), seg(2), seg(3));
    let witness = |i: usize| Witness::point(p, q_grid[i]).with_delta(d);

    let constancy = |name: &'static str, idx: &[usize], values: &[f64]| -> Option<BoundCheck> {
        let first = *idx.first()?;
        let mut tracker = Tracker::new(name);
        for &i in idx {
            tracker.update(-(values[i] - values[first]).abs(), witness(i));
        }
        tracker.finish()
    };
    let direction =
        |name: &'static str, idx: &[usize], values: &[f64], up: bool| -> Option<BoundCheck> {
            let mut tracker = Tracker::new(name);
            for pair in idx.windows(2) {
                let diff = values[pair[1]] - values[pair[0]];
                tracker.update(if up { diff } else { -diff }, witness(pair[1]));
            }
            tracker.finish()
        };

    checks.extend(constancy(
        "test_revealing_constant_while_grades_undecisive",
        &s1,
        &u_r,
    ));
    let low_segments: Vec<usize> = s1.iter().chain(&s2).copied().collect();
    checks.extend(constancy(
        "test_strategic_constant_until_low_scores_packable",
        &low_segments,
        &u_s,
    ));
    if let (Some(&end1), Some(&start2)) = (s1.last(), s2.first()) {
        checks.push(BoundCheck::from_margin(
            "test_revealing_drops_at_first_boundary",
            u_r[end1] - u_r[start2],
            witness(start2),
        ));
    }
    checks.extend(direction(
        "test_revealing_recovers_between_boundaries",
        &s2,
        &u_r,
        true,
    ));
    if let (Some(&end2), Some(&start3)) = (s2.last(), s3.first()) {
        checks.push(BoundCheck::from_margin(
            "test_revealing_jumps_at_second_boundary",
            u_r[start3] - u_r[end2],
            witness(start3),
        ));
        checks.push(BoundCheck::from_margin(
            "test_strategic_jumps_at_second_boundary",
            u_s[start3] - u_s[end2],
            witness(start3),
        ));
    }
    checks.extend(direction(
        "test_revealing_falls_after_second_boundary",
        &s3,
        &u_r,
        false,
    ));
    checks.extend(direction(
        "test_strategic_rises_after_second_boundary",
        &s3,
        &u_s,
        true,
    ));
    Ok(checks)
}

/// Verify the utility-ratio behavior of the test model: beyond the larger
/// score boundary the two schools earn identical utility (ratio exactly 1),
/// and with fully accurate grades the ratio equals `(1 - delta + p)/p` and
/// stays within [1, 2].
pub fn check_test_ratio_bounds(p: f64, q: f64, delta_grid: &[f64]) -> Result<Vec<BoundCheck>> {
    check_sorted(delta_grid)?;
    let threshold = if q < 1.0 {
        let (d1, d2) = score_boundaries(p, q)?;
        Some(d1.max(d2))
    } else {
        None
    };

    let mut equal_beyond = Tracker::new("equal_utilities_beyond_score_threshold");
    let mut identity = Tracker::new("accurate_grades_ratio_identity");
    let mut in_bounds = Tracker::new("accurate_grades_ratio_within_unit_to_double");
    for &delta in delta_grid {
        let params = ModelParams::with_test(p, q, delta)?;
        let revealing = closed_form_with_test(&params, false)?.school_utility;
        let strategic = closed_form_with_test(&params, true)?.school_utility;
        let ratio = strategic / revealing;
        let w = Witness::point(p, q).with_delta(delta);
        if let Some(threshold) = threshold
            && delta > threshold
        {
            equal_beyond.update(-(ratio - 1.0).abs(), w);
        }
        if q == 1.0 {
            identity.update(-(ratio - (1.0 - delta + p) / p).abs(), w);
            in_bounds.update((ratio - 1.0).min(2.0 - ratio), w);
        }
    }
    Ok([equal_beyond, identity, in_bounds]
        .into_iter()
        .filter_map(Tracker::finish)
        .collect())
}

/// One row of a grade-accuracy sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub q: f64,
    pub u_r_notest: f64,
    pub u_s_notest: f64,
    pub ratio_notest: f64,
    pub u_r_test: f64,
    pub u_s_test: f64,
    pub ratio_test: f64,
    /// 1 when a high grade outweighs a low score.
    pub regime_10: bool,
    /// 1 when a high score outweighs a low grade.
    pub regime_01: bool,
}

/// Tabulated utilities and ratios over a grade-accuracy grid, with and
/// without the test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: String,
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

pub const SWEEP_CSV_HEADER: &str =
    "q,U_r_notest,U_s_notest,ratio_notest,U_r_test,U_s_test,ratio_test,regime_10,regime_01";

impl SweepResult {
    /// Write the canonical CSV. Floats use shortest round-trip formatting so
    /// the file parses back to the exact computed values; regime flags are
    /// 1/0.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let io_err = |e: csv::Error| Error::usage(format!("cannot write CSV: {e}"));
        out.write_record(SWEEP_CSV_HEADER.split(','))
            .map_err(io_err)?;
        for row in &self.rows {
            out.write_record([
                row.q.to_string(),
                row.u_r_notest.to_string(),
                row.u_s_notest.to_string(),
                row.ratio_notest.to_string(),
                row.u_r_test.to_string(),
                row.u_s_test.to_string(),
                row.ratio_test.to_string(),
                (row.regime_10 as u8).to_string(),
                (row.regime_01 as u8).to_string(),
            ])
            .map_err(io_err)?;
        }
        out.flush().map_err(|e| Error::usage(format!("cannot write CSV: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
    }
}

/// Tabulate both models over a grade-accuracy grid: the data behind the
/// utility and ratio figures. Regime boundaries falling outside the grid
/// span are recorded as warnings, not errors.
pub fn figure_data(p: f64, delta: f64, q_grid: &[f64]) -> Result<SweepResult> {
    check_sorted(q_grid)?;
    let mut warnings = Vec::new();
    let (q1, q2) = regime_boundaries(p, delta)?;
    for (name, boundary) in [("first", q1), ("second", q2)] {
        if boundary < 1.0 - p || boundary > 1.0 {
            warnings.push(format!(
                "{name} regime boundary q = {boundary} lies outside [1 - p, 1] = [{}, 1]",
                1.0 - p
            ));
        }
    }
    let mut rows = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let no_test = ModelParams::no_test(p, q)?;
        let u_r_notest = closed_form_no_test(&no_test, false)?.school_utility;
        let u_s_notest = closed_form_no_test(&no_test, true)?.school_utility;
        let with_test = ModelParams::with_test(p, q, delta)?;
        let regime = classify_regime(&with_test)?;
        let u_r_test = closed_form_with_test(&with_test, false)?.school_utility;
        let u_s_test = closed_form_with_test(&with_test, true)?.school_utility;
        rows.push(SweepRow {
            q,
            u_r_notest,
            u_s_notest,
            ratio_notest: u_s_notest / u_r_notest,
            u_r_test,
            u_s_test,
            ratio_test: u_s_test / u_r_test,
            regime_10: regime.regime_10.is_nonnegative(),
            regime_01: regime.regime_01.is_nonnegative(),
        });
    }
    Ok(SweepResult {
        axis: "q".to_string(),
        rows,
        warnings,
    })
}
