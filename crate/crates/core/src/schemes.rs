//! Signaling schemes: the revealing scheme, the utility-maximizing schemes
//! for every model variant, and the two-signal collapse of arbitrary finite
//! schemes.
//!
//! A scheme commits to `Pr[accept-signal | grade]` (or `| grade, score`).
//! The university knows the scheme and best-responds, so a school can "pack"
//! low-grade students into the accept signal only up to the point where the
//! signal still carries non-negative expected value per score cell.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{
    self, ModelParams, Sign, cell_numerator, classify_regime, joint_no_test, joint_with_test,
    validate,
};
use crate::Result;

/// Which observation set a scheme conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    NoTest,
    WithTest,
}

/// A committed two-signal scheme: the probability of the accept signal per
/// conditioning cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemeDoc", into = "SchemeDoc")]
pub enum SignalingScheme {
    /// `accept[g]` = Pr[accept-signal | grade g].
    NoTest { accept: [f64; 2] },
    /// `accept[g][s]` = Pr[accept-signal | grade g, score s].
    WithTest { accept: [[f64; 2]; 2] },
}

impl SignalingScheme {
    pub fn variant(&self) -> Variant {
        match self {
            SignalingScheme::NoTest { .. } => Variant::NoTest,
            SignalingScheme::WithTest { .. } => Variant::WithTest,
        }
    }

    /// Build a grades-only scheme, checking probabilities.
    pub fn no_test(accept_low: f64, accept_high: f64) -> Result<Self> {
        let scheme = SignalingScheme::NoTest {
            accept: [accept_low, accept_high],
        };
        scheme.check()?;
        Ok(scheme)
    }

    /// Build a grade/score scheme from `accept[g][s]`, checking probabilities.
    pub fn with_test(accept: [[f64; 2]; 2]) -> Result<Self> {
        let scheme = SignalingScheme::WithTest { accept };
        scheme.check()?;
        Ok(scheme)
    }

    /// The scheme that never emits the accept signal.
    pub fn reject_all(variant: Variant) -> Self {
        match variant {
            Variant::NoTest => SignalingScheme::NoTest { accept: [0.0; 2] },
            Variant::WithTest => SignalingScheme::WithTest { accept: [[0.0; 2]; 2] },
        }
    }

    /// Pr[accept-signal | cell]; `s` must match the variant.
    pub fn accept_prob(&self, g: bool, s: Option<bool>) -> Result<f64> {
        match (self, s) {
            (SignalingScheme::NoTest { accept }, None) => Ok(accept[g as usize]),
            (SignalingScheme::WithTest { accept }, Some(s)) => Ok(accept[g as usize][s as usize]),
            _ => Err(Error::usage(
                "scheme variant does not match the conditioning cell",
            )),
        }
    }

    fn check(&self) -> Result<()> {
        let ok = |x: f64| (0.0..=1.0).contains(&x);
        let valid = match self {
            SignalingScheme::NoTest { accept } => accept.iter().all(|&x| ok(x)),
            SignalingScheme::WithTest { accept } => accept.iter().flatten().all(|&x| ok(x)),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                name: "accept_prob",
                value: f64::NAN,
                expected: "every accept probability in [0, 1]",
            })
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::usage(format!("invalid scheme JSON: {e}")))
    }
}

#[derive(Serialize, Deserialize)]
struct SchemeDoc {
    variant: Variant,
    cells: Vec<CellDoc>,
}

#[derive(Serialize, Deserialize)]
struct CellDoc {
    g: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<u8>,
    accept_prob: f64,
}

impl From<SignalingScheme> for SchemeDoc {
    fn from(scheme: SignalingScheme) -> SchemeDoc {
        match scheme {
            SignalingScheme::NoTest { accept } => SchemeDoc {
                variant: Variant::NoTest,
                cells: (0..2u8)
                    .map(|g| CellDoc {
                        g,
                        s: None,
                        accept_prob: accept[g as usize],
                    })
                    .collect(),
            },
            SignalingScheme::WithTest { accept } => SchemeDoc {
                variant: Variant::WithTest,
                cells: (0..2u8)
                    .flat_map(|g| {
                        (0..2u8).map(move |s| CellDoc {
                            g,
                            s: Some(s),
                            accept_prob: accept[g as usize][s as usize],
                        })
                    })
                    .collect(),
            },
        }
    }
}

impl TryFrom<SchemeDoc> for SignalingScheme {
    type Error = Error;

    fn try_from(doc: SchemeDoc) -> Result<Self> {
        let bit = |x: u8, name: &'static str| -> Result<usize> {
            if x <= 1 {
                Ok(x as usize)
            } else {
                Err(Error::OutOfRange {
                    name,
                    value: x as f64,
                    expected: "0 or 1",
                })
            }
        };
        match doc.variant {
            Variant::NoTest => {
                if doc.cells.len() != 2 {
                    return Err(Error::usage("a grades-only scheme has exactly 2 cells"));
                }
                let mut accept = [f64::NAN; 2];
                for cell in &doc.cells {
                    if cell.s.is_some() {
                        return Err(Error::usage("grades-only cells must not carry a score"));
                    }
                    accept[bit(cell.g, "g")?] = cell.accept_prob;
                }
                if accept.iter().any(|x| x.is_nan()) {
                    return Err(Error::usage("duplicate or missing grade cell"));
                }
                SignalingScheme::no_test(accept[0], accept[1])
            }
            Variant::WithTest => {
                if doc.cells.len() != 4 {
                    return Err(Error::usage("a grade/score scheme has exactly 4 cells"));
                }
                let mut accept = [[f64::NAN; 2]; 2];
                for cell in &doc.cells {
                    let s = cell
                        .s
                        .ok_or_else(|| Error::usage("grade/score cells must carry a score"))?;
                    accept[bit(cell.g, "g")?][bit(s, "s")?] = cell.accept_prob;
                }
                if accept.iter().flatten().any(|x| x.is_nan()) {
                    return Err(Error::usage("duplicate or missing grade/score cell"));
                }
                SignalingScheme::with_test(accept)
            }
        }
    }
}

/// A finite-signal scheme: a probability distribution over `k >= 2` signal
/// labels per conditioning cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralScheme {
    variant: Variant,
    signals: Vec<String>,
    /// `dist[cell][k]` = Pr[signal k | cell]; cells are indexed `g` for
    /// grades-only schemes and `2g + s` with a test.
    dist: Vec<Vec<f64>>,
}

/// Row sums may drift from exactly 1 by accumulated rounding; beyond this the
/// rows are rejected as not being distributions.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

impl GeneralScheme {
    pub fn new(variant: Variant, signals: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        if signals.len() < 2 {
            return Err(Error::usage("a signaling scheme needs at least 2 signals"));
        }
        let cells = match variant {
            Variant::NoTest => 2,
            Variant::WithTest => 4,
        };
        if dist.len() != cells {
            return Err(Error::usage(format!(
                "expected {cells} conditioning cells, got {}",
                dist.len()
            )));
        }
        for row in &dist {
            if row.len() != signals.len() {
                return Err(Error::usage("each row must cover every signal"));
            }
            if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::OutOfRange {
                    name: "dist",
                    value: f64::NAN,
                    expected: "signal probabilities in [0, 1]",
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::usage(format!(
                    "signal row sums to {sum}, not 1"
                )));
            }
        }
        Ok(GeneralScheme {
            variant,
            signals,
            dist,
        })
    }

    /// Embed a two-signal scheme with labels `reject`/`accept`.
    pub fn from_binary(scheme: &SignalingScheme) -> GeneralScheme {
        let labels = vec!["reject".to_string(), "accept".to_string()];
        match scheme {
            SignalingScheme::NoTest { accept } => GeneralScheme {
                variant: Variant::NoTest,
                signals: labels,
                dist: accept.iter().map(|&x| vec![1.0 - x, x]).collect(),
            },
            SignalingScheme::WithTest { accept } => GeneralScheme {
                variant: Variant::WithTest,
                signals: labels,
                dist: accept
                    .iter()
                    .flatten()
                    .map(|&x| vec![1.0 - x, x])
                    .collect(),
            },
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn distributions(&self) -> &[Vec<f64>] {
        &self.dist
    }

    pub(crate) fn cell_index(g: bool, s: Option<bool>) -> usize {
        match s {
            None => g as usize,
            Some(s) => 2 * (g as usize) + s as usize,
        }
    }
}

/// Signed mass of the accept signal in a grades-only scheme:
/// `Σ_{t,g} (2t-1) · Pr[t,g] · accept[g]`. Non-negative exactly when the
/// university admits on the accept signal.
pub(crate) fn accept_numerator_no_test(p: f64, q: f64, accept: [f64; 2]) -> f64 {
    joint_no_test(p, q, true, true) * accept[1] + joint_no_test(p, q, true, false) * accept[0]
        - joint_no_test(p, q, false, true) * accept[1]
        - joint_no_test(p, q, false, false) * accept[0]
}

pub(crate) fn accept_mass_no_test(p: f64, q: f64, accept: [f64; 2]) -> f64 {
    joint_no_test(p, q, true, true) * accept[1]
        + joint_no_test(p, q, true, false) * accept[0]
        + joint_no_test(p, q, false, true) * accept[1]
        + joint_no_test(p, q, false, false) * accept[0]
}

/// Signed mass of the accept signal within one score cell:
/// `Σ_{t,g} (2t-1) · Pr[t,g,s] · accept[g][s]`.
pub(crate) fn accept_numerator_at_score(
    p: f64,
    q: f64,
    d: f64,
    s: bool,
    accept: [[f64; 2]; 2],
) -> f64 {
    let si = s as usize;
    joint_with_test(p, q, d, true, true, s) * accept[1][si]
        + joint_with_test(p, q, d, true, false, s) * accept[0][si]
        - joint_with_test(p, q, d, false, true, s) * accept[1][si]
        - joint_with_test(p, q, d, false, false, s) * accept[0][si]
}

pub(crate) fn accept_mass_at_score(p: f64, q: f64, d: f64, s: bool, accept: [[f64; 2]; 2]) -> f64 {
    let si = s as usize;
    joint_with_test(p, q, d, true, true, s) * accept[1][si]
        + joint_with_test(p, q, d, true, false, s) * accept[0][si]
        + joint_with_test(p, q, d, false, true, s) * accept[1][si]
        + joint_with_test(p, q, d, false, false, s) * accept[0][si]
}

/// Step `x` down until `constraint(x) >= 0`, using the constraint's slope in
/// the packed cell to size the step.
///
/// The closed-form packing probabilities make the accept-signal value exactly
/// zero in exact arithmetic; rounding can land the computed value a few ulps
/// on the infeasible side, which would flip the university's decision. The
/// correction is on the order of 1e-16 and never moves a utility by more
/// than ~1e-15.
fn nudge_feasible(mut x: f64, slope: f64, constraint: impl Fn(f64) -> f64) -> f64 {
    debug_assert!(slope < 0.0, "packing must weigh against the constraint");
    for _ in 0..64 {
        if x <= 0.0 {
            return 0.0;
        }
        let value = constraint(x);
        if value >= 0.0 {
            return x;
        }
        x = (x - 2.0 * value / slope).min(x.next_down());
    }
    x.max(0.0)
}

/// The scheme that transmits the grade verbatim.
pub fn revealing_scheme(variant: Variant) -> SignalingScheme {
    match variant {
        Variant::NoTest => SignalingScheme::NoTest { accept: [0.0, 1.0] },
        Variant::WithTest => SignalingScheme::WithTest {
            accept: [[0.0, 0.0], [1.0, 1.0]],
        },
    }
}

/// The utility-maximizing scheme in the grades-only model.
///
/// High grades get the accept signal outright; low grades are packed in with
/// probability `(p + q - 1) / (q - p)`, the largest value that keeps the
/// accept signal's expected value to the university non-negative.
pub fn optimal_scheme_no_test(params: &ModelParams) -> Result<SignalingScheme> {
    let report = validate(params)?;
    model::require_core(&report)?;
    let (p, q) = (params.p, params.q);
    let raw = ((p + q - 1.0) / (q - p)).clamp(0.0, 1.0);
    let slope = model::cell_numerator_no_test(p, q, false);
    let packed = nudge_feasible(raw, slope, |x| accept_numerator_no_test(p, q, [x, 1.0]));
    Ok(SignalingScheme::NoTest {
        accept: [packed, 1.0],
    })
}

/// The utility-maximizing scheme when every student has a public test score
/// and the score is decisive on its own.
///
/// All high-score students get the accept signal. When a high grade outweighs
/// a low score (`u(1,0) >= 0`) the school also recommends those students and
/// packs low-grade/low-score students up to the university's break-even
/// point; otherwise no low-score student is recommended.
pub fn optimal_scheme_with_test(params: &ModelParams) -> Result<SignalingScheme> {
    let regime = classify_regime(params)?;
    let (p, q) = (params.p, params.q);
    let d = params.delta.expect("classify_regime requires delta");
    let (packed, high_grade_low_score) = match regime.regime_10 {
        Sign::Negative => (0.0, 0.0),
        Sign::NonNegative => {
            let slope = cell_numerator(p, q, d, false, false);
            let raw = (cell_numerator(p, q, d, true, false) / -slope).clamp(0.0, 1.0);
            let packed = nudge_feasible(raw, slope, |x| {
                accept_numerator_at_score(p, q, d, false, [[x, 1.0], [1.0, 1.0]])
            });
            (packed, 1.0)
        }
    };
    Ok(SignalingScheme::WithTest {
        accept: [[packed, 1.0], [high_grade_low_score, 1.0]],
    })
}

/// The utility-maximizing scheme when the score need not be decisive on its
/// own, only jointly with the grade at the corners (`u(1,1) >= 0 > u(0,0)`).
///
/// Identical to [`optimal_scheme_with_test`] whenever the score is decisive;
/// otherwise the low-grade/high-score cell is itself packed fractionally.
pub fn optimal_scheme_relaxed(params: &ModelParams) -> Result<SignalingScheme> {
    let regime = classify_regime(params)?;
    let (p, q) = (params.p, params.q);
    let d = params.delta.expect("classify_regime requires delta");

    let (packed_low, high_grade_low_score) = match regime.regime_10 {
        Sign::Negative => (0.0, 0.0),
        Sign::NonNegative => {
            let slope = cell_numerator(p, q, d, false, false);
            let raw = (cell_numerator(p, q, d, true, false) / -slope).clamp(0.0, 1.0);
            let packed = nudge_feasible(raw, slope, |x| {
                accept_numerator_at_score(p, q, d, false, [[x, 1.0], [1.0, 1.0]])
            });
            (packed, 1.0)
        }
    };
    let packed_high = match regime.regime_01 {
        Sign::NonNegative => 1.0,
        Sign::Negative => {
            let slope = cell_numerator(p, q, d, false, true);
            let raw = (cell_numerator(p, q, d, true, true) / -slope).min(1.0);
            nudge_feasible(raw, slope, |x| {
                accept_numerator_at_score(p, q, d, true, [[0.0, x], [0.0, 1.0]])
            })
        }
    };
    Ok(SignalingScheme::WithTest {
        accept: [[packed_low, packed_high], [high_grade_low_score, 1.0]],
    })
}

/// Collapse a finite-signal scheme into an equivalent two-signal scheme.
///
/// For each signal (and each score cell, when a test is present) the
/// university's best response is computed; signals that induce acceptance are
/// merged into the accept signal. School and university outcomes are
/// preserved exactly.
pub fn collapse_scheme(params: &ModelParams, general: &GeneralScheme) -> Result<SignalingScheme> {
    params.check_ranges()?;
    let (p, q) = (params.p, params.q);
    match general.variant {
        Variant::NoTest => {
            if params.has_test() {
                return Err(Error::usage(
                    "grades-only scheme evaluated against test-model parameters",
                ));
            }
            let k = general.signals.len();
            let mut accept = [0.0f64; 2];
            for sig in 0..k {
                let prob = [general.dist[0][sig], general.dist[1][sig]];
                let num = accept_numerator_no_test(p, q, prob);
                let mass = accept_mass_no_test(p, q, prob);
                if mass > 0.0 && num >= 0.0 {
                    accept[0] += prob[0];
                    accept[1] += prob[1];
                }
            }
            SignalingScheme::no_test(accept[0].min(1.0), accept[1].min(1.0))
        }
        Variant::WithTest => {
            let d = params.delta_or_usage().map_err(|_| {
                Error::usage("grade/score scheme evaluated against grades-only parameters")
            })?;
            let k = general.signals.len();
            let mut accept = [[0.0f64; 2]; 2];
            for s in [false, true] {
                let si = s as usize;
                for sig in 0..k {
                    let mut prob = [[0.0; 2]; 2];
                    prob[0][si] = general.dist[GeneralScheme::cell_index(false, Some(s))][sig];
                    prob[1][si] = general.dist[GeneralScheme::cell_index(true, Some(s))][sig];
                    let num = accept_numerator_at_score(p, q, d, s, prob);
                    let mass = accept_mass_at_score(p, q, d, s, prob);
                    if mass > 0.0 && num >= 0.0 {
                        accept[0][si] += prob[0][si];
                        accept[1][si] += prob[1][si];
                    }
                }
            }
            for row in &mut accept {
                for x in row.iter_mut() {
                    *x = x.min(1.0);
                }
            }
            SignalingScheme::with_test(accept)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    #[test]
    fn revealing_transmits_the_grade() {
        assert_eq!(
            revealing_scheme(Variant::NoTest),
            SignalingScheme::NoTest { accept: [0.0, 1.0] }
        );
        assert_eq!(
            revealing_scheme(Variant::WithTest),
            SignalingScheme::WithTest {
                accept: [[0.0, 0.0], [1.0, 1.0]]
            }
        );
    }

    #[test]
    fn optimal_no_test_packs_a_third_at_the_running_example() {
        let params = ModelParams::no_test(0.35, 0.8).unwrap();
        let SignalingScheme::NoTest { accept } = optimal_scheme_no_test(&params).unwrap() else {
            panic!("wrong variant")
        };
        assert!((accept[0] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(accept[1], 1.0);
    }

    #[test]
    fn optimal_no_test_boundary_and_accurate_grades() {
        // q = 1 - p: nothing can be packed.
        let params = ModelParams::no_test(0.35, 0.65).unwrap();
        let SignalingScheme::NoTest { accept } = optimal_scheme_no_test(&params).unwrap() else {
            panic!()
        };
        assert_eq!(accept[0], 0.0);

        // q = 1: pack p/(1-p) of the low grades.
        let params = ModelParams::no_test(0.2, 1.0).unwrap();
        let SignalingScheme::NoTest { accept } = optimal_scheme_no_test(&params).unwrap() else {
            panic!()
        };
        assert!((accept[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn optimal_no_test_requires_informative_grades() {
        let params = ModelParams::no_test(0.2, 0.6).unwrap(); // pq < (1-p)(1-q)
        assert!(matches!(
            optimal_scheme_no_test(&params),
            Err(Error::AssumptionViolated { .. })
        ));
    }

    #[test]
    fn optimal_with_test_running_example() {
        let params = ModelParams::with_test(0.25, 0.9, 0.7).unwrap();
        let SignalingScheme::WithTest { accept } = optimal_scheme_with_test(&params).unwrap()
        else {
            panic!()
        };
        assert_eq!(accept[1][1], 1.0);
        assert_eq!(accept[0][1], 1.0);
        assert_eq!(accept[1][0], 1.0);
        assert!((accept[0][0] - 0.015 / 0.465).abs() < 1e-12);
    }

    #[test]
    fn optimal_with_test_low_score_shut_out() {
        let params = ModelParams::with_test(0.35, 0.8, 0.9).unwrap();
        let SignalingScheme::WithTest { accept } = optimal_scheme_with_test(&params).unwrap()
        else {
            panic!()
        };
        assert_eq!(accept, [[0.0, 1.0], [0.0, 1.0]]);
    }

    #[test]
    fn optimal_with_test_accurate_grades() {
        let (p, d) = (0.3, 0.8);
        let params = ModelParams::with_test(p, 1.0, d).unwrap();
        let SignalingScheme::WithTest { accept } = optimal_scheme_with_test(&params).unwrap()
        else {
            panic!()
        };
        let expected = p * (1.0 - d) / ((1.0 - p) * d);
        assert!((accept[0][0] - expected).abs() < 1e-12);
    }

    #[test]
    fn relaxed_packs_high_score_cell_when_score_is_weak() {
        let params = ModelParams::with_test(0.3, 0.95, 0.6).unwrap();
        let SignalingScheme::WithTest { accept } = optimal_scheme_relaxed(&params).unwrap()
        else {
            panic!()
        };
        assert_eq!(accept[1][1], 1.0);
        assert_eq!(accept[1][0], 1.0);
        assert!((accept[0][1] - 0.157 / 0.257).abs() < 1e-12);
        assert!((accept[0][0] - 0.093 / 0.393).abs() < 1e-12);
    }

    #[test]
    fn relaxed_reduces_to_with_test_when_score_is_decisive() {
        for &(p, q, d) in &[(0.35, 0.8, 0.9), (0.35, 0.8, 0.65), (0.25, 0.9, 0.9)] {
            let params = ModelParams::with_test(p, q, d).unwrap();
            let report = validate(&params).unwrap();
            assert_eq!(report.score_informative(), Some(true), "bad fixture");
            assert_eq!(
                optimal_scheme_relaxed(&params).unwrap(),
                optimal_scheme_with_test(&params).unwrap()
            );
        }
    }

    #[test]
    fn collapse_merges_accept_inducing_signals() {
        let params = ModelParams::no_test(0.35, 0.8).unwrap();
        // Signals A and B both carry mostly high grades; C carries the rest.
        let general = GeneralScheme::new(
            Variant::NoTest,
            vec!["A".into(), "B".into(), "C".into()],
            vec![vec![0.05, 0.05, 0.9], vec![0.5, 0.5, 0.0]],
        )
        .unwrap();
        let collapsed = collapse_scheme(&params, &general).unwrap();
        let SignalingScheme::NoTest { accept } = collapsed else { panic!() };
        // A and B are symmetric and accept-inducing; C is not.
        assert!((accept[0] - 0.1).abs() < 1e-15);
        assert!((accept[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collapse_of_optimal_scheme_is_a_fixed_point() {
        let params = ModelParams::no_test(0.35, 0.8).unwrap();
        let optimal = optimal_scheme_no_test(&params).unwrap();
        let collapsed = collapse_scheme(&params, &GeneralScheme::from_binary(&optimal)).unwrap();
        assert_eq!(collapsed, optimal);
    }

    #[test]
    fn collapse_of_revealing_reproduces_per_cell_decisions() {
        let params = ModelParams::with_test(0.35, 0.8, 0.9).unwrap();
        let revealing = revealing_scheme(Variant::WithTest);
        let collapsed =
            collapse_scheme(&params, &GeneralScheme::from_binary(&revealing)).unwrap();
        // u(1,1) >= 0, u(0,1) >= 0, u(1,0) < 0, u(0,0) < 0: admit exactly s=1.
        assert_eq!(
            collapsed,
            SignalingScheme::WithTest {
                accept: [[0.0, 1.0], [0.0, 1.0]]
            }
        );
    }

    #[test]
    fn scheme_json_round_trips() {
        let params = ModelParams::with_test(0.25, 0.9, 0.7).unwrap();
        let scheme = optimal_scheme_with_test(&params).unwrap();
        let parsed = SignalingScheme::from_json(&scheme.to_json()).unwrap();
        assert_eq!(parsed, scheme);

        let scheme = optimal_scheme_no_test(&ModelParams::no_test(0.35, 0.8).unwrap()).unwrap();
        assert_eq!(SignalingScheme::from_json(&scheme.to_json()).unwrap(), scheme);
    }

    #[test]
    fn general_scheme_rejects_bad_rows() {
        assert!(GeneralScheme::new(
            Variant::NoTest,
            vec!["a".into(), "b".into()],
            vec![vec![0.6, 0.6], vec![1.0, 0.0]],
        )
        .is_err());
        assert!(GeneralScheme::new(Variant::NoTest, vec!["a".into()], vec![]).is_err());
    }
}
