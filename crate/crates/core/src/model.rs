//! Model parameters, assumption validation, posterior utilities, and regime
//! classification.
//!
//! The population model: each student has a hidden binary type drawn
//! Bernoulli(`p`). The school privately observes a grade that matches the
//! type with probability `q`; when a standardized test is present, everyone
//! also observes a public score that matches the type with probability
//! `delta`. The university values admitting a high type at +1 and a low type
//! at -1, and admits exactly the students whose conditional expected value is
//! non-negative.
//!
//! All comparisons against zero are exact comparisons on the computed
//! double-precision value; there is no epsilon band. Parameters within a
//! small distance of a boundary can be flagged via [`boundary_margins`].

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// The primitive parameters of the population model.
///
/// `delta` is `None` in the grades-only model and `Some` when every student
/// takes a standardized test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Prior probability that a student is of high type, in (0, 1).
    pub p: f64,
    /// Grade accuracy `Pr[g = t | t]`, in [1/2, 1].
    pub q: f64,
    /// Test-score accuracy `Pr[s = t | t]`, in [1/2, 1], when a test exists.
    pub delta: Option<f64>,
}

impl ModelParams {
    /// Parameters for the grades-only model.
    pub fn no_test(p: f64, q: f64) -> Result<Self> {
        let params = ModelParams { p, q, delta: None };
        params.check_ranges()?;
        Ok(params)
    }

    /// Parameters for the model with a standardized test.
    pub fn with_test(p: f64, q: f64, delta: f64) -> Result<Self> {
        let params = ModelParams {
            p,
            q,
            delta: Some(delta),
        };
        params.check_ranges()?;
        Ok(params)
    }

    pub fn has_test(&self) -> bool {
        self.delta.is_some()
    }

    /// A copy with the test removed; used when comparing against the
    /// grades-only closed forms at the same (p, q).
    pub fn without_test(&self) -> ModelParams {
        ModelParams {
            p: self.p,
            q: self.q,
            delta: None,
        }
    }

    /// Check every field against its declared range.
    pub fn check_ranges(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::OutOfRange {
                name: "p",
                value: self.p,
                expected: "a probability strictly inside (0, 1)",
            });
        }
        if !(self.q >= 0.5 && self.q <= 1.0) {
            return Err(Error::OutOfRange {
                name: "q",
                value: self.q,
                expected: "a grade accuracy in [1/2, 1] (re-run with --canonicalize to reflect q < 1/2)",
            });
        }
        if let Some(d) = self.delta
            && !(0.5..=1.0).contains(&d)
        {
            return Err(Error::OutOfRange {
                name: "delta",
                value: d,
                expected: "a test accuracy in [1/2, 1]",
            });
        }
        Ok(())
    }

    pub(crate) fn delta_or_usage(&self) -> Result<f64> {
        self.delta
            .ok_or_else(|| Error::usage("a test score was supplied but `delta` is absent"))
    }
}

/// `Pr[observation | type]` for an observation channel with the given accuracy.
#[inline]
pub(crate) fn channel(accuracy: f64, observed: bool, t: bool) -> f64 {
    if observed == t { accuracy } else { 1.0 - accuracy }
}

/// Joint probability `Pr[t, g]` in the grades-only model.
#[inline]
pub(crate) fn joint_no_test(p: f64, q: f64, t: bool, g: bool) -> f64 {
    let prior = if t { p } else { 1.0 - p };
    prior * channel(q, g, t)
}

/// Joint probability `Pr[t, g, s]` in the model with a test.
#[inline]
pub(crate) fn joint_with_test(p: f64, q: f64, d: f64, t: bool, g: bool, s: bool) -> f64 {
    joint_no_test(p, q, t, g) * channel(d, s, t)
}

/// Signed mass `Pr[t=1, g] - Pr[t=0, g]`: the numerator of the university's
/// expected utility for admitting on the grade alone.
#[inline]
pub(crate) fn cell_numerator_no_test(p: f64, q: f64, g: bool) -> f64 {
    joint_no_test(p, q, true, g) - joint_no_test(p, q, false, g)
}

/// Total mass `Pr[g]` of a grade cell.
#[inline]
pub(crate) fn cell_mass_no_test(p: f64, q: f64, g: bool) -> f64 {
    joint_no_test(p, q, true, g) + joint_no_test(p, q, false, g)
}

/// Signed mass `Pr[t=1, g, s] - Pr[t=0, g, s]`.
#[inline]
pub(crate) fn cell_numerator(p: f64, q: f64, d: f64, g: bool, s: bool) -> f64 {
    joint_with_test(p, q, d, true, g, s) - joint_with_test(p, q, d, false, g, s)
}

/// Total mass `Pr[g, s]` of a grade/score cell.
#[inline]
pub(crate) fn cell_mass(p: f64, q: f64, d: f64, g: bool, s: bool) -> f64 {
    joint_with_test(p, q, d, true, g, s) + joint_with_test(p, q, d, false, g, s)
}

/// Truth values of the model's standing assumptions at a parameter point.
///
/// The acceptance-side conditions are non-strict (the university admits when
/// indifferent) and the rejection-side conditions are strict, mirroring how
/// the university breaks ties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// The unconditional expected value of admitting is negative: p - (1-p) < 0.
    pub prior_negative: bool,
    /// A high grade alone justifies admission: pq - (1-p)(1-q) >= 0.
    pub high_grade_ok: bool,
    /// A low grade alone justifies rejection: p(1-q) - (1-p)q < 0.
    pub low_grade_neg: bool,
    /// A high score alone justifies admission (test models only).
    pub high_score_ok: Option<bool>,
    /// A low score alone justifies rejection (test models only).
    pub low_score_neg: Option<bool>,
    /// The corner cells are decisive: u(1,1) >= 0 and u(0,0) < 0 (test models
    /// only). Implied whenever both grade and score assumptions hold.
    pub relaxed_ok: Option<bool>,
}

impl AssumptionReport {
    /// Grades are informative in the sense required by every scheme here.
    pub fn grades_informative(&self) -> bool {
        self.high_grade_ok && self.low_grade_neg
    }

    /// The score is informative on its own.
    pub fn score_informative(&self) -> Option<bool> {
        match (self.high_score_ok, self.low_score_neg) {
            (Some(a), Some(b)) => Some(a && b),
            _ => None,
        }
    }

    /// Prior and grade assumptions: the preconditions shared by all models.
    pub fn core_ok(&self) -> bool {
        self.prior_negative && self.grades_informative()
    }
}

/// Evaluate every standing assumption at `params`.
///
/// Fails only when a field is outside its declared range; boundary violations
/// of the assumptions themselves are reported as `false` flags, not errors.
pub fn validate(params: &ModelParams) -> Result<AssumptionReport> {
    params.check_ranges()?;
    let (p, q) = (params.p, params.q);
    let report = match params.delta {
        None => AssumptionReport {
            prior_negative: p - (1.0 - p) < 0.0,
            high_grade_ok: cell_numerator_no_test(p, q, true) >= 0.0,
            low_grade_neg: cell_numerator_no_test(p, q, false) < 0.0,
            high_score_ok: None,
            low_score_neg: None,
            relaxed_ok: None,
        },
        Some(d) => AssumptionReport {
            prior_negative: p - (1.0 - p) < 0.0,
            high_grade_ok: cell_numerator_no_test(p, q, true) >= 0.0,
            low_grade_neg: cell_numerator_no_test(p, q, false) < 0.0,
            high_score_ok: Some(p * d - (1.0 - p) * (1.0 - d) >= 0.0),
            low_score_neg: Some(p * (1.0 - d) - (1.0 - p) * d < 0.0),
            relaxed_ok: Some(
                cell_numerator(p, q, d, true, true) >= 0.0
                    && cell_numerator(p, q, d, false, false) < 0.0,
            ),
        },
    };
    Ok(report)
}

/// Signed distances of `params` to each assumption boundary, for reporting
/// parameters that sit numerically close to a regime change.
///
/// Positive margins mean the inequality holds with room to spare; rejection-
/// side margins are sign-flipped so that positive always means "holds".
pub fn boundary_margins(params: &ModelParams) -> Vec<(&'static str, f64)> {
    let (p, q) = (params.p, params.q);
    let mut out = vec![
        ("prior_negative", (1.0 - p) - p),
        ("high_grade", cell_numerator_no_test(p, q, true)),
        ("low_grade", -cell_numerator_no_test(p, q, false)),
    ];
    if let Some(d) = params.delta {
        out.push(("high_score", p * d - (1.0 - p) * (1.0 - d)));
        out.push(("low_score", (1.0 - p) * d - p * (1.0 - d)));
        out.push(("corner_high", cell_numerator(p, q, d, true, true)));
        out.push(("corner_low", -cell_numerator(p, q, d, false, false)));
    }
    out
}

/// The university's expected utility of admitting a student conditional on a
/// grade and, optionally, a test score: `E[2t - 1 | g, s]`.
///
/// When `q = delta = 1` the grade and score are perfectly correlated and the
/// mismatched cells have zero probability; their utility is defined as -1.
pub fn posterior_utility(params: &ModelParams, g: bool, s: Option<bool>) -> Result<f64> {
    params.check_ranges()?;
    let (p, q) = (params.p, params.q);
    match s {
        None => Ok(cell_numerator_no_test(p, q, g) / cell_mass_no_test(p, q, g)),
        Some(s) => {
            let d = params.delta_or_usage()?;
            if q == 1.0 && d == 1.0 && s != g {
                return Ok(-1.0);
            }
            Ok(cell_numerator(p, q, d, g, s) / cell_mass(p, q, d, g, s))
        }
    }
}

/// Sign of a university cell utility, split the way admission decisions are:
/// admit on `NonNegative`, reject on `Negative`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    NonNegative,
    Negative,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x >= 0.0 {
            Sign::NonNegative
        } else {
            Sign::Negative
        }
    }

    pub fn is_nonnegative(self) -> bool {
        self == Sign::NonNegative
    }
}

/// The signs of the off-diagonal cell utilities, which determine which
/// grade/score combinations the university admits and hence which branch of
/// every closed form applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassification {
    /// `cell_utility[g][s]` = university expected utility of admitting on (g, s).
    pub cell_utility: [[f64; 2]; 2],
    /// Sign of the utility at (g=1, s=0).
    pub regime_10: Sign,
    /// Sign of the utility at (g=0, s=1).
    pub regime_01: Sign,
}

/// Compute all four cell utilities and the regime flags.
///
/// Requires the prior and grade assumptions plus decisive corners
/// (`u(1,1) >= 0 > u(0,0)`). When a corner is not decisive the university
/// admits everyone or no one regardless of the school's signal and the
/// classification is degenerate.
pub fn classify_regime(params: &ModelParams) -> Result<RegimeClassification> {
    params.delta_or_usage().map_err(|_| {
        Error::usage("regime classification requires a test accuracy `delta`")
    })?;
    let report = validate(params)?;
    require_core(&report)?;
    let u = |g: bool, s: bool| posterior_utility(params, g, Some(s));
    let u00 = u(false, false)?;
    let u01 = u(false, true)?;
    let u10 = u(true, false)?;
    let u11 = u(true, true)?;
    if u11 < 0.0 {
        return Err(Error::DegenerateRegime { action: "rejects" });
    }
    if u00 >= 0.0 {
        return Err(Error::DegenerateRegime { action: "accepts" });
    }
    Ok(RegimeClassification {
        cell_utility: [[u00, u01], [u10, u11]],
        regime_10: Sign::of(u10),
        regime_01: Sign::of(u01),
    })
}

pub(crate) fn require_core(report: &AssumptionReport) -> Result<()> {
    if !report.prior_negative {
        return Err(Error::AssumptionViolated {
            assumption: "negative-prior",
            detail: "admitting on the prior alone must have negative value (requires p < 1/2)"
                .into(),
        });
    }
    if !report.high_grade_ok {
        return Err(Error::AssumptionViolated {
            assumption: "grade-informativeness",
            detail: "a high grade alone must justify admission (requires pq >= (1-p)(1-q))"
                .into(),
        });
    }
    if !report.low_grade_neg {
        return Err(Error::AssumptionViolated {
            assumption: "grade-informativeness",
            detail: "a low grade alone must justify rejection (requires p(1-q) < (1-p)q)".into(),
        });
    }
    Ok(())
}

/// The two grade accuracies where the off-diagonal cell utilities change
/// sign, for a fixed prior and test accuracy.
///
/// Returns `(q1, q2)` with `q1 <= q2`: `u(0,1)` is non-negative exactly for
/// `q <= q1` and `u(1,0)` is non-negative exactly for `q >= q2`. These are
/// the discontinuity locations of the piecewise utility curves.
pub fn regime_boundaries(p: f64, delta: f64) -> Result<(f64, f64)> {
    let params = ModelParams::with_test(p, 0.5, delta)?;
    let report = validate(&params)?;
    if !report.prior_negative {
        return Err(Error::AssumptionViolated {
            assumption: "negative-prior",
            detail: format!("requires p < 1/2, got p = {p}"),
        });
    }
    if report.score_informative() != Some(true) {
        return Err(Error::AssumptionViolated {
            assumption: "score-informativeness",
            detail: format!("the test must be decisive on its own, got delta = {delta}"),
        });
    }
    let q1 = p * delta / (p * delta + (1.0 - p) * (1.0 - delta));
    let q2 = (1.0 - p) * delta / (p * (1.0 - delta) + (1.0 - p) * delta);
    Ok((q1, q2))
}

/// The two test accuracies where the off-diagonal cell utilities change sign,
/// for a fixed prior and grade accuracy. Above `max` of the pair the
/// university admits exactly the high-score students no matter how the
/// school signals.
pub fn score_boundaries(p: f64, q: f64) -> Result<(f64, f64)> {
    let params = ModelParams::no_test(p, q)?;
    let report = validate(&params)?;
    require_core(&report)?;
    // d1 solves u(1,0) = 0; u(1,0) < 0 for delta above it.
    let d1 = p * q / (p * q + (1.0 - p) * (1.0 - q));
    // d2 solves u(0,1) = 0; u(0,1) >= 0 for delta above it.
    let d2 = (1.0 - p) * q / (p * (1.0 - q) + (1.0 - p) * q);
    Ok((d1, d2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_reports_grade_assumptions() {
        let r = validate(&ModelParams::no_test(0.35, 0.8).unwrap()).unwrap();
        assert!(r.prior_negative);
        assert!(r.high_grade_ok && r.low_grade_neg);
        assert_eq!(r.high_score_ok, None);
    }

    #[test]
    fn validate_rejects_balanced_prior() {
        // p = 0.5 sits exactly on the boundary: p - (1-p) = 0 is not < 0.
        let r = validate(&ModelParams::no_test(0.5, 0.9).unwrap()).unwrap();
        assert!(!r.prior_negative);
    }

    #[test]
    fn validate_relaxed_holds_when_score_uninformative() {
        let r = validate(&ModelParams::with_test(0.3, 0.95, 0.6).unwrap()).unwrap();
        assert_eq!(r.high_score_ok, Some(false)); // 0.18 - 0.28 < 0
        assert_eq!(r.relaxed_ok, Some(true)); // corners 0.157 and -0.393
    }

    #[test]
    fn out_of_range_errors_name_the_field() {
        let err = ModelParams::no_test(0.0, 0.8).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { name: "p", .. }));
        let err = ModelParams::no_test(0.3, 0.4).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { name: "q", .. }));
        let err = ModelParams::with_test(0.3, 0.8, 1.2).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { name: "delta", .. }));
    }

    #[test]
    fn posterior_utility_signs_match_cell_numerators() {
        let params = ModelParams::with_test(0.25, 0.9, 0.7).unwrap();
        assert!(posterior_utility(&params, true, Some(false)).unwrap() > 0.0);
        let params = ModelParams::with_test(0.35, 0.8, 0.9).unwrap();
        assert!(posterior_utility(&params, true, Some(false)).unwrap() < 0.0);
    }

    #[test]
    fn posterior_utility_high_everything_is_nonnegative() {
        for &(p, q, d) in &[(0.1, 0.95, 0.9), (0.35, 0.8, 0.7), (0.49, 0.99, 0.51)] {
            let params = ModelParams::with_test(p, q, d).unwrap();
            assert!(posterior_utility(&params, true, Some(true)).unwrap() >= 0.0);
        }
    }

    #[test]
    fn posterior_utility_perfect_correlation_convention() {
        let params = ModelParams::with_test(0.3, 1.0, 1.0).unwrap();
        assert_eq!(posterior_utility(&params, true, Some(false)).unwrap(), -1.0);
        assert_eq!(posterior_utility(&params, false, Some(true)).unwrap(), -1.0);
        assert!(posterior_utility(&params, true, Some(true)).unwrap() >= 0.0);
    }

    #[test]
    fn posterior_utility_score_without_delta_is_usage_error() {
        let params = ModelParams::no_test(0.3, 0.8).unwrap();
        assert!(matches!(
            posterior_utility(&params, true, Some(true)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn classify_regime_examples() {
        let r = classify_regime(&ModelParams::with_test(0.25, 0.9, 0.7).unwrap()).unwrap();
        assert_eq!(r.regime_10, Sign::NonNegative);
        assert_eq!(r.regime_01, Sign::Negative);

        let r = classify_regime(&ModelParams::with_test(0.35, 0.8, 0.9).unwrap()).unwrap();
        assert_eq!(r.regime_10, Sign::Negative);
        assert_eq!(r.regime_01, Sign::NonNegative);

        let r = classify_regime(&ModelParams::with_test(0.3, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(r.cell_utility[1][0], -1.0);
        assert_eq!(r.cell_utility[0][1], -1.0);
        assert!(r.cell_utility[1][1] >= 0.0);
    }

    #[test]
    fn corners_are_implied_by_prior_and_grade_assumptions() {
        // Whenever the prior and grade assumptions hold, u(1,1) >= 0 > u(0,0)
        // follows for any test accuracy, so regime classification succeeds.
        for p in [0.02, 0.1, 0.25, 0.35, 0.49] {
            for q_frac in [0.001, 0.3, 0.7, 1.0] {
                for delta in [0.5, 0.51, 0.75, 0.99] {
                    let q = (1.0 - p) + p * q_frac;
                    let params = ModelParams::with_test(p, q.min(1.0), delta).unwrap();
                    let report = validate(&params).unwrap();
                    if report.core_ok() {
                        assert_eq!(report.relaxed_ok, Some(true), "at {params:?}");
                        assert!(classify_regime(&params).is_ok(), "at {params:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn regime_boundary_examples() {
        let (q1, q2) = regime_boundaries(0.35, 0.8).unwrap();
        assert!((q1 - 0.6829268292682927).abs() < 1e-12);
        assert!((q2 - 0.8813559322033898).abs() < 1e-12);

        let (q1, q2) = regime_boundaries(0.35, 0.65).unwrap();
        assert!((q1 - 0.5).abs() < 1e-12);
        assert!((q2 - 0.7752293577981652).abs() < 1e-12);

        let (q1, q2) = regime_boundaries(0.2, 1.0).unwrap();
        assert_eq!((q1, q2), (1.0, 1.0));
    }

    #[test]
    fn regime_boundaries_zero_the_cell_utilities() {
        for &(p, d) in &[(0.35, 0.8), (0.25, 0.9), (0.1, 0.95), (0.49, 0.6)] {
            let (q1, q2) = regime_boundaries(p, d).unwrap();
            if (0.5..=1.0).contains(&q1) {
                assert!(cell_numerator(p, q1, d, false, true).abs() <= 1e-12);
            }
            if (0.5..=1.0).contains(&q2) {
                assert!(cell_numerator(p, q2, d, true, false).abs() <= 1e-12);
            }
            assert!(q1 <= q2);
        }
    }

    #[test]
    fn score_boundary_matches_ratio_threshold() {
        let (d1, d2) = score_boundaries(0.35, 0.8).unwrap();
        assert!((d1 - 0.6829268292682927).abs() < 1e-12);
        assert!((d2 - 0.8813559322033898).abs() < 1e-12);
    }

    #[test]
    fn boundary_margins_flag_near_boundaries() {
        let params = ModelParams::with_test(0.35, 0.65, 0.65).unwrap();
        let margins = boundary_margins(&params);
        // q = 1 - p makes the high-grade margin (essentially) zero.
        let hg = margins.iter().find(|(n, _)| *n == "high_grade").unwrap().1;
        assert!(hg.abs() < 1e-9);
    }
}
