//! Outcome metrics for a (parameters, scheme) pair: the school's expected
//! admission rate, false positive and false negative rates, and the
//! university's expected per-student value.
//!
//! [`evaluate`] scores any committed scheme against a best-responding
//! university (the accept set is derived from the posted scheme exactly as in
//! the two-signal collapse). The `closed_form_*` functions evaluate the
//! per-regime closed forms directly; on any parameter point where the
//! constructed optimal scheme is obedient the two agree to floating-point
//! accuracy.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{
    self, ModelParams, channel, classify_regime, joint_no_test, joint_with_test, validate,
};
use crate::schemes::{
    GeneralScheme, SignalingScheme, Variant, accept_mass_at_score, accept_mass_no_test,
    accept_numerator_at_score, accept_numerator_no_test, optimal_scheme_with_test,
};
use crate::Result;

/// School and university outcomes induced by a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeMetrics {
    /// Pr[a student is admitted] — the school's expected utility.
    pub school_utility: f64,
    /// Pr[admitted | low type].
    pub fpr: f64,
    /// Pr[rejected | high type].
    pub fnr: f64,
    /// E[(2t - 1) · admitted] — the university's expected per-student value.
    pub university_utility: f64,
}

/// Cells in a fixed traversal order so that branch-equal accept sets produce
/// bitwise-equal sums.
const CELLS: [(bool, bool); 4] = [(true, true), (true, false), (false, true), (false, false)];

fn accumulate_with_test(p: f64, q: f64, d: f64, accept: impl Fn(bool, bool) -> f64) -> OutcomeMetrics {
    let mut utility = 0.0;
    let mut fpr = 0.0;
    let mut fnr = 0.0;
    let mut university = 0.0;
    for (g, s) in CELLS {
        let a = accept(g, s);
        let high = joint_with_test(p, q, d, true, g, s);
        let low = joint_with_test(p, q, d, false, g, s);
        utility += (high + low) * a;
        university += (high - low) * a;
        fpr += channel(q, g, false) * channel(d, s, false) * a;
        fnr += channel(q, g, true) * channel(d, s, true) * (1.0 - a);
    }
    OutcomeMetrics {
        school_utility: utility,
        fpr,
        fnr,
        university_utility: university,
    }
}

/// Score a committed two-signal scheme.
///
/// The university sees the signal (and the score, when present), recomputes
/// the posterior value of every signal cell from the posted scheme, and
/// admits exactly the non-negative cells. For obedient schemes this is the
/// set of accept-signal students.
pub fn evaluate(params: &ModelParams, scheme: &SignalingScheme) -> Result<OutcomeMetrics> {
    match (scheme.variant(), params.has_test()) {
        (Variant::NoTest, false) | (Variant::WithTest, true) => {}
        (Variant::NoTest, true) => {
            return Err(Error::usage(
                "grades-only scheme evaluated against test-model parameters",
            ));
        }
        (Variant::WithTest, false) => {
            return Err(Error::usage(
                "grade/score scheme evaluated against grades-only parameters",
            ));
        }
    }
    evaluate_general(params, &GeneralScheme::from_binary(scheme))
}

/// Score a finite-signal scheme against a best-responding university.
pub fn evaluate_general(params: &ModelParams, scheme: &GeneralScheme) -> Result<OutcomeMetrics> {
    params.check_ranges()?;
    let (p, q) = (params.p, params.q);
    let rows = scheme.distributions();
    match scheme.variant() {
        Variant::NoTest => {
            if params.has_test() {
                return Err(Error::usage(
                    "grades-only scheme evaluated against test-model parameters",
                ));
            }
            let mut acc1 = 0.0;
            let mut acc0 = 0.0;
            for (&low, &high) in rows[0].iter().zip(&rows[1]) {
                let prob = [low, high];
                let mass = accept_mass_no_test(p, q, prob);
                if mass > 0.0 && accept_numerator_no_test(p, q, prob) >= 0.0 {
                    acc1 += joint_no_test(p, q, true, true) * prob[1]
                        + joint_no_test(p, q, true, false) * prob[0];
                    acc0 += joint_no_test(p, q, false, true) * prob[1]
                        + joint_no_test(p, q, false, false) * prob[0];
                }
            }
            Ok(from_accepted_mass(p, acc1, acc0))
        }
        Variant::WithTest => {
            let d = params.delta_or_usage().map_err(|_| {
                Error::usage("grade/score scheme evaluated against grades-only parameters")
            })?;
            let mut acc1 = 0.0;
            let mut acc0 = 0.0;
            for s in [true, false] {
                let si = s as usize;
                let low_row = &rows[GeneralScheme::cell_index(false, Some(s))];
                let high_row = &rows[GeneralScheme::cell_index(true, Some(s))];
                for (&low, &high) in low_row.iter().zip(high_row) {
                    let mut prob = [[0.0; 2]; 2];
                    prob[0][si] = low;
                    prob[1][si] = high;
                    let mass = accept_mass_at_score(p, q, d, s, prob);
                    if mass > 0.0 && accept_numerator_at_score(p, q, d, s, prob) >= 0.0 {
                        acc1 += joint_with_test(p, q, d, true, true, s) * prob[1][si]
                            + joint_with_test(p, q, d, true, false, s) * prob[0][si];
                        acc0 += joint_with_test(p, q, d, false, true, s) * prob[1][si]
                            + joint_with_test(p, q, d, false, false, s) * prob[0][si];
                    }
                }
            }
            Ok(from_accepted_mass(p, acc1, acc0))
        }
    }
}

fn from_accepted_mass(p: f64, acc1: f64, acc0: f64) -> OutcomeMetrics {
    OutcomeMetrics {
        school_utility: acc1 + acc0,
        fpr: acc0 / (1.0 - p),
        fnr: 1.0 - acc1 / p,
        university_utility: acc1 - acc0,
    }
}

/// Closed-form outcomes in the grades-only model.
///
/// Revealing: utility `pq + (1-p)(1-q)`, both error rates `1 - q`.
/// Strategic: utility `1 + (p + q - 2pq)(2p - 1)/(q - p)` with
/// `FPR = 1 - q + q(p + q - 1)/(q - p)` and `FNR = (1-q)(1-2p)/(q-p)`.
pub fn closed_form_no_test(params: &ModelParams, strategic: bool) -> Result<OutcomeMetrics> {
    let report = validate(&params.without_test())?;
    model::require_core(&report)?;
    let (p, q) = (params.p, params.q);
    let (utility, fpr, fnr) = if strategic {
        (
            1.0 + (p + q - 2.0 * p * q) * (2.0 * p - 1.0) / (q - p),
            1.0 - q + q * ((p + q - 1.0) / (q - p)),
            (1.0 - q) * (1.0 - 2.0 * p) / (q - p),
        )
    } else {
        (p * q + (1.0 - p) * (1.0 - q), 1.0 - q, 1.0 - q)
    };
    Ok(OutcomeMetrics {
        school_utility: utility,
        fpr,
        fnr,
        university_utility: p * (1.0 - fnr) - (1.0 - p) * fpr,
    })
}

/// Closed-form outcomes when every student carries a public test score.
///
/// Both forms branch on the signs of the off-diagonal cell values `u(1,0)`
/// and `u(0,1)`. A revealing school is admitted per grade/score cell; a
/// strategic school recommends every high-score student, adds high-grade
/// low-score students when `u(1,0) >= 0`, and packs the low/low cell up to
/// the university's break-even point.
pub fn closed_form_with_test(params: &ModelParams, strategic: bool) -> Result<OutcomeMetrics> {
    let regime = classify_regime(params)?;
    let (p, q) = (params.p, params.q);
    let d = params.delta.expect("classify_regime requires delta");
    let i10 = regime.regime_10.is_nonnegative();
    let i01 = regime.regime_01.is_nonnegative();
    let metrics = if strategic {
        let scheme = optimal_scheme_with_test(params)?;
        let packed = scheme.accept_prob(false, Some(false))?;
        accumulate_with_test(p, q, d, |g, s| match (g, s) {
            (_, true) => 1.0,
            (true, false) => {
                if i10 {
                    1.0
                } else {
                    0.0
                }
            }
            (false, false) => packed,
        })
    } else {
        accumulate_with_test(p, q, d, |g, s| match (g, s) {
            (true, true) => 1.0,
            (true, false) => {
                if i10 {
                    1.0
                } else {
                    0.0
                }
            }
            (false, true) => {
                if i01 {
                    1.0
                } else {
                    0.0
                }
            }
            (false, false) => 0.0,
        })
    };
    Ok(metrics)
}

/// Posterior value and mass of each signal cell the university observes,
/// computed from the posted scheme. Used to verify obedience: an optimal
/// scheme's accept cells must all be non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalPosterior {
    pub accept_signal: bool,
    pub score: Option<bool>,
    pub mass: f64,
    /// `None` when the cell has zero probability.
    pub utility: Option<f64>,
}

pub fn signal_posteriors(
    params: &ModelParams,
    scheme: &SignalingScheme,
) -> Result<Vec<SignalPosterior>> {
    params.check_ranges()?;
    let (p, q) = (params.p, params.q);
    let mut out = Vec::new();
    match scheme {
        SignalingScheme::NoTest { accept } => {
            if params.has_test() {
                return Err(Error::usage(
                    "grades-only scheme evaluated against test-model parameters",
                ));
            }
            for accept_signal in [true, false] {
                let prob = if accept_signal {
                    *accept
                } else {
                    [1.0 - accept[0], 1.0 - accept[1]]
                };
                let mass = accept_mass_no_test(p, q, prob);
                let num = accept_numerator_no_test(p, q, prob);
                out.push(SignalPosterior {
                    accept_signal,
                    score: None,
                    mass,
                    utility: (mass > 0.0).then(|| num / mass),
                });
            }
        }
        SignalingScheme::WithTest { accept } => {
            let d = params.delta_or_usage()?;
            for accept_signal in [true, false] {
                for s in [true, false] {
                    let mut prob = *accept;
                    if !accept_signal {
                        for row in &mut prob {
                            for x in row.iter_mut() {
                                *x = 1.0 - *x;
                            }
                        }
                    }
                    let mass = accept_mass_at_score(p, q, d, s, prob);
                    let num = accept_numerator_at_score(p, q, d, s, prob);
                    out.push(SignalPosterior {
                        accept_signal,
                        score: Some(s),
                        mass,
                        utility: (mass > 0.0).then(|| num / mass),
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{optimal_scheme_no_test, optimal_scheme_relaxed, revealing_scheme};

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOL
    }

    #[test]
    fn revealing_no_test_running_example() {
        let params = ModelParams::no_test(0.35, 0.8).unwrap();
        let m = evaluate(&params, &revealing_scheme(Variant::NoTest)).unwrap();
        assert!(close(m.school_utility, 0.41));
        assert!(close(m.fpr, 0.2));
        assert!(close(m.fnr, 0.2));
    }

    #[test]
    fn optimal_no_test_running_example() {
        let params = ModelParams::no_test(0.35, 0.8).unwrap();
        let scheme = optimal_scheme_no_test(&params).unwrap();
        let m = evaluate(&params, &scheme).unwrap();
        assert!(close(m.school_utility, 0.6066666666666667));
        assert!(close(m.fpr, 0.4666666666666667));
        assert!(close(m.fnr, 0.13333333333333333));
        assert!(m.university_utility.abs() <= TOL);
    }

    #[test]
    fn reject_all_yields_nothing() {
        let params = ModelParams::no_test(0.3, 0.85).unwrap();
        let m = evaluate(&params, &SignalingScheme::reject_all(Variant::NoTest)).unwrap();
        assert_eq!(m.school_utility, 0.0);
        assert_eq!(m.fpr, 0.0);
        assert_eq!(m.fnr, 1.0);
    }

    #[test]
    fn closed_form_no_test_accurate_grades() {
        for &p in &[0.1, 0.25, 0.35, 0.49] {
            let params = ModelParams::no_test(p, 1.0).unwrap();
            let r = closed_form_no_test(&params, false).unwrap();
            assert!(close(r.school_utility, p));
            assert_eq!((r.fpr, r.fnr), (0.0, 0.0));
            let s = closed_form_no_test(&params, true).unwrap();
            assert!(close(s.school_utility, 2.0 * p));
            assert!(close(s.fpr, p / (1.0 - p)));
            assert_eq!(s.fnr, 0.0);
        }
    }

    #[test]
    fn closed_form_no_test_boundary_equalizes() {
        let params = ModelParams::no_test(0.35, 0.65).unwrap();
        let r = closed_form_no_test(&params, false).unwrap();
        let s = closed_form_no_test(&params, true).unwrap();
        assert!(close(r.school_utility, 0.455));
        assert!(close(s.school_utility, 0.455));
    }

    #[test]
    fn closed_form_with_test_running_examples() {
        let params = ModelParams::with_test(0.25, 0.9, 0.7).unwrap();
        let r = closed_form_with_test(&params, false).unwrap();
        assert!(close(r.school_utility, 0.30));
        let s = closed_form_with_test(&params, true).unwrap();
        assert!(close(s.school_utility, 0.535483870967742));
        assert!(close(s.fpr, 0.3903225806451613));
        assert!(close(s.fnr, 0.02903225806451613));
        assert!(close(s.university_utility, -0.05));
    }

    #[test]
    fn closed_form_with_test_accurate_grades() {
        for &p in &[0.1, 0.25, 0.35, 0.49] {
            for &d in &[0.7, 0.9, 1.0] {
                let params = ModelParams::with_test(p, 1.0, d).unwrap();
                let s = closed_form_with_test(&params, true).unwrap();
                assert!(close(s.school_utility, 1.0 - d + p));
                assert!(close(s.fpr, (1.0 - d) / (1.0 - p)));
                assert_eq!(s.fnr, 0.0);
                let r = closed_form_with_test(&params, false).unwrap();
                assert!(close(r.school_utility, p));
                assert_eq!((r.fpr, r.fnr), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn equal_accept_sets_give_bitwise_equal_utilities() {
        // Beyond the second score boundary both schools are admitted exactly
        // on the score, so the two closed forms must coincide bit for bit.
        let params = ModelParams::with_test(0.35, 0.8, 0.9).unwrap();
        let r = closed_form_with_test(&params, false).unwrap();
        let s = closed_form_with_test(&params, true).unwrap();
        assert_eq!(r.school_utility, s.school_utility);
        assert!(close(r.school_utility, 0.38));
    }

    #[test]
    fn evaluate_matches_closed_forms_at_fixtures() {
        let no_test = ModelParams::no_test(0.35, 0.8).unwrap();
        for strategic in [false, true] {
            let scheme = if strategic {
                optimal_scheme_no_test(&no_test).unwrap()
            } else {
                revealing_scheme(Variant::NoTest)
            };
            let lhs = evaluate(&no_test, &scheme).unwrap();
            let rhs = closed_form_no_test(&no_test, strategic).unwrap();
            assert!(close(lhs.school_utility, rhs.school_utility));
            assert!(close(lhs.fpr, rhs.fpr));
            assert!(close(lhs.fnr, rhs.fnr));
            assert!(close(lhs.university_utility, rhs.university_utility));
        }

        let with_test = ModelParams::with_test(0.35, 0.8, 0.9).unwrap();
        for strategic in [false, true] {
            let scheme = if strategic {
                optimal_scheme_with_test(&with_test).unwrap()
            } else {
                revealing_scheme(Variant::WithTest)
            };
            let lhs = evaluate(&with_test, &scheme).unwrap();
            let rhs = closed_form_with_test(&with_test, strategic).unwrap();
            assert!(close(lhs.school_utility, rhs.school_utility));
            assert!(close(lhs.fpr, rhs.fpr));
            assert!(close(lhs.fnr, rhs.fnr));
        }
    }

    #[test]
    fn relaxed_scheme_outcomes_via_evaluate() {
        // The score is not decisive on its own here; the optimal packing
        // keeps both score cells exactly at the university's break-even.
        let params = ModelParams::with_test(0.3, 0.95, 0.6).unwrap();
        let scheme = optimal_scheme_relaxed(&params).unwrap();
        let m = evaluate(&params, &scheme).unwrap();
        let posteriors = signal_posteriors(&params, &scheme).unwrap();
        for cell in posteriors.iter().filter(|c| c.accept_signal) {
            assert!(cell.utility.unwrap_or(0.0) >= 0.0);
            assert!(cell.utility.unwrap_or(0.0) <= TOL);
        }
        assert!(m.school_utility > 0.0);
        assert!(close(m.school_utility, accepted_mass_of(&params, &scheme)));
    }

    fn accepted_mass_of(params: &ModelParams, scheme: &SignalingScheme) -> f64 {
        let (p, q) = (params.p, params.q);
        let d = params.delta.unwrap();
        let mut total = 0.0;
        for (g, s) in CELLS {
            total += crate::model::cell_mass(p, q, d, g, s)
                * scheme.accept_prob(g, Some(s)).unwrap();
        }
        total
    }

    #[test]
    fn variant_mismatch_is_a_usage_error() {
        let params = ModelParams::with_test(0.3, 0.8, 0.9).unwrap();
        assert!(matches!(
            evaluate(&params, &revealing_scheme(Variant::NoTest)),
            Err(Error::Usage(_))
        ));
        let params = ModelParams::no_test(0.3, 0.8).unwrap();
        assert!(matches!(
            evaluate(&params, &revealing_scheme(Variant::WithTest)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn accounting_identities_hold() {
        let params = ModelParams::with_test(0.25, 0.9, 0.8).unwrap();
        for strategic in [false, true] {
            let m = closed_form_with_test(&params, strategic).unwrap();
            let p = params.p;
            assert!(close(
                m.school_utility,
                p * (1.0 - m.fnr) + (1.0 - p) * m.fpr
            ));
            assert!(close(
                m.university_utility,
                p * (1.0 - m.fnr) - (1.0 - p) * m.fpr
            ));
        }
    }
}
