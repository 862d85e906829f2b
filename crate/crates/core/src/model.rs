//! Score distributions of the principal and of the complement.
//!
//! The principal's entries form an integral distribution with denominator
//! `n`: a sorted multiset of positive scores. The complement is either an
//! exact list of scores (a right-continuous step c.d.f.) or one of a few
//! analytic families. Ties between a supported score and a complement score
//! always go to the principal, which is what a right-continuous c.d.f.
//! gives for free: `cdf(x)` counts complement scores `<= x`.

use std::f64::consts::{PI, SQRT_2};

use libm::erfc;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_score(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{what} must be a positive finite score, got {x}"
        )))
    }
}

/// The principal's entries before reinforcement.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportedSet {
    scores: Vec<f64>,
}

impl SupportedSet {
    pub fn new(scores: impl Into<Vec<f64>>) -> Result<Self> {
        let mut scores = scores.into();
        if scores.is_empty() {
            return Err(Error::EmptySupported);
        }
        for &s in &scores {
            check_score(s, "supported score")?;
        }
        scores.sort_by(f64::total_cmp);
        Ok(Self { scores })
    }

    /// Scores in non-decreasing order.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.scores[self.scores.len() - 1]
    }

    pub fn min(&self) -> f64 {
        self.scores[0]
    }

    /// Fraction of entries scoring `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.scores.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    pub fn expectation(&self) -> f64 {
        mean(&self.scores)
    }
}

/// A reinforced distribution: one `(original, reinforced)` pair per entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReinforcedSet {
    pairs: Vec<(f64, f64)>,
}

impl ReinforcedSet {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptySupported);
        }
        for &(from, to) in &pairs {
            check_score(from, "original score")?;
            if to < from || !to.is_finite() {
                return Err(Error::Invariant(format!(
                    "reinforced score {to} is below original {from}"
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn identity(supported: &SupportedSet) -> Self {
        Self {
            pairs: supported.scores().iter().map(|&s| (s, s)).collect(),
        }
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub(crate) fn pairs_mut(&mut self) -> &mut [(f64, f64)] {
        &mut self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn originals(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn reinforced(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.1)
    }

    /// Total score added across all entries.
    pub fn cost(&self) -> f64 {
        self.pairs.iter().map(|&(a, b)| b - a).sum()
    }

    /// Fraction of entries whose reinforced score is `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.pairs.iter().filter(|p| p.1 <= x).count() as f64 / self.len() as f64
    }

    pub fn expectation(&self) -> f64 {
        self.pairs.iter().map(|p| p.1).sum::<f64>() / self.len() as f64
    }
}

/// Arithmetic mean; errors on an empty slice.
pub fn expectation(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptySupported);
    }
    Ok(mean(scores))
}

fn mean(scores: &[f64]) -> f64 {
    scores.iter().sum::<f64>() / scores.len() as f64
}

/// Sorted complement scores with a right-continuous step c.d.f.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    scores: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(scores: impl Into<Vec<f64>>) -> Result<Self> {
        let mut scores = scores.into();
        if scores.is_empty() {
            return Err(Error::EmptyComplement);
        }
        for &s in &scores {
            check_score(s, "complement score")?;
        }
        scores.sort_by(f64::total_cmp);
        Ok(Self { scores })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Number of complement scores `<= x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.scores.partition_point(|&s| s <= x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.scores.len() as f64
    }

    /// Distinct scores, ascending.
    pub fn distinct(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(self.scores.len());
        for &s in &self.scores {
            if out.last() != Some(&s) {
                out.push(s);
            }
        }
        out
    }
}

/// Continuous c.d.f. given by linear interpolation between knots.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearCdf {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinearCdf {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidModel(
                "piecewise-linear c.d.f. needs at least two knots".into(),
            ));
        }
        if knots.iter().any(|k| !(k.0.is_finite() && k.1.is_finite())) {
            return Err(Error::InvalidModel("knots must be finite".into()));
        }
        if knots[0].0 < 0.0 {
            return Err(Error::InvalidModel("first knot must have x >= 0".into()));
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidModel(
                    "knots must be strictly increasing in x".into(),
                ));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidModel(
                    "c.d.f. values must be non-decreasing".into(),
                ));
            }
        }
        if knots.iter().any(|k| !k.0.is_finite() || !k.1.is_finite()) {
            return Err(Error::InvalidModel("knots must be finite".into()));
        }
        let first = knots[0].1;
        let last = knots[knots.len() - 1].1;
        if first.abs() > 1e-12 || (last - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel("c.d.f. must run from 0 to 1".into()));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Slope of piece `i`, between knots `i` and `i + 1`.
    pub fn slope(&self, i: usize) -> f64 {
        let (x0, f0) = self.knots[i];
        let (x1, f1) = self.knots[i + 1];
        (f1 - f0) / (x1 - x0)
    }

    /// Slope just left of knot `k` (0 before the first knot).
    pub fn left_slope(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.slope(k - 1)
        }
    }

    /// Slope just right of knot `k` (0 after the last knot).
    pub fn right_slope(&self, k: usize) -> f64 {
        if k + 1 >= self.knots.len() {
            0.0
        } else {
            self.slope(k)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x < k[0].0 {
            return 0.0;
        }
        if x >= k[k.len() - 1].0 {
            return 1.0;
        }
        let i = k.partition_point(|p| p.0 <= x) - 1;
        let (x0, f0) = k[i];
        f0 + self.slope(i) * (x - x0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x < k[0].0 || x >= k[k.len() - 1].0 {
            return 0.0;
        }
        let i = k.partition_point(|p| p.0 <= x) - 1;
        self.slope(i)
    }

    pub fn max_slope(&self) -> f64 {
        (0..self.knots.len() - 1)
            .map(|i| self.slope(i))
            .fold(0.0, f64::max)
    }
}

/// Standard normal c.d.f.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// The complement's score law.
#[derive(Clone, Debug, PartialEq)]
pub enum ComplementModel {
    Empirical(EmpiricalCdf),
    Exponential { rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
    PiecewiseLinear(PiecewiseLinearCdf),
}

impl ComplementModel {
    pub fn empirical(scores: impl Into<Vec<f64>>) -> Result<Self> {
        Ok(Self::Empirical(EmpiricalCdf::new(scores)?))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidModel(format!(
                "exponential rate must be positive, got {rate}"
            )));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn log_normal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidModel(format!(
                "log-normal needs finite mu and sigma > 0, got ({mu}, {sigma})"
            )));
        }
        Ok(Self::LogNormal { mu, sigma })
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Self::PiecewiseLinear(PiecewiseLinearCdf::new(knots)?))
    }

    pub fn is_empirical(&self) -> bool {
        matches!(self, Self::Empirical(_))
    }

    pub fn as_empirical(&self) -> Option<&EmpiricalCdf> {
        match self {
            Self::Empirical(e) => Some(e),
            _ => None,
        }
    }

    /// c.d.f. at `x >= 0`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!(
                "c.d.f. queried at negative score {x}"
            )));
        }
        Ok(self.cdf_at(x))
    }

    /// c.d.f. without the domain check; negative scores map to 0.
    pub(crate) fn cdf_at(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return match self {
                Self::PiecewiseLinear(p) if x >= p.knots()[0].0 => p.cdf(x),
                _ => 0.0,
            };
        }
        match self {
            Self::Empirical(e) => e.cdf(x),
            Self::Exponential { rate } => -(-rate * x).exp_m1(),
            Self::LogNormal { mu, sigma } => std_normal_cdf((x.ln() - mu) / sigma),
            Self::PiecewiseLinear(p) => p.cdf(x),
        }
    }

    /// Density for analytic families; `None` for the empirical step c.d.f.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        match self {
            Self::Empirical(_) => None,
            _ => Some(self.ln_pdf(x).map_or(0.0, f64::exp)),
        }
    }

    /// Log-density; `None` where the density is zero or undefined.
    pub fn ln_pdf(&self, x: f64) -> Option<f64> {
        match self {
            Self::Empirical(_) => None,
            Self::Exponential { rate } => (x >= 0.0).then(|| rate.ln() - rate * x),
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    return None;
                }
                let z = (x.ln() - mu) / sigma;
                Some(-0.5 * z * z - x.ln() - sigma.ln() - 0.5 * (2.0 * PI).ln())
            }
            Self::PiecewiseLinear(p) => {
                let d = p.pdf(x);
                (d > 0.0).then(|| d.ln())
            }
        }
    }

    /// Score of the density peak for unimodal analytic families.
    pub fn mode(&self) -> Option<f64> {
        match self {
            Self::Exponential { .. } => Some(0.0),
            Self::LogNormal { mu, sigma } => Some((mu - sigma * sigma).exp()),
            _ => None,
        }
    }

    /// Largest density value; for the empirical model, the steepest chord
    /// between consecutive distinct scores (including the origin).
    pub fn peak_density(&self) -> f64 {
        match self {
            Self::Exponential { rate } => *rate,
            Self::LogNormal { .. } => self.pdf(self.mode().unwrap_or(1.0)).unwrap_or(0.0),
            Self::PiecewiseLinear(p) => p.max_slope(),
            Self::Empirical(e) => {
                let d = e.distinct();
                let mut prev = (0.0, 0.0);
                let mut best = 0.0f64;
                for &x in &d {
                    let f = e.cdf(x);
                    best = best.max((f - prev.1) / (x - prev.0));
                    prev = (x, f);
                }
                best
            }
        }
    }

    /// Upper end of the support when it is bounded.
    pub fn support_upper(&self) -> Option<f64> {
        match self {
            Self::Empirical(e) => e.scores().last().copied(),
            Self::PiecewiseLinear(p) => p.knots().last().map(|k| k.0),
            _ => None,
        }
    }
}

/// Slope of the chord of the complement c.d.f. between `x` and `y`.
pub fn chord_gradient(model: &ComplementModel, x: f64, y: f64) -> Result<f64> {
    check_score(x, "chord endpoint")?;
    check_score(y, "chord endpoint")?;
    if x == y {
        return Err(Error::DegenerateChord(x));
    }
    Ok((model.cdf_at(x) - model.cdf_at(y)) / (x - y))
}

/// Average of `2 F_c(s) - 1` over the given scores: the expected signed
/// comparison against a complement entry, ties counted as wins.
pub fn mean_advantage(
    scores: impl IntoIterator<Item = f64>,
    model: &ComplementModel,
) -> Result<f64> {
    let mut n = 0usize;
    let total: f64 = match model {
        ComplementModel::Empirical(e) => {
            let m = e.len() as i64;
            let mut acc: i64 = 0;
            for s in scores {
                n += 1;
                acc += 2 * e.count_le(s) as i64 - m;
            }
            // exact integer numerator, single division
            return if n == 0 {
                Err(Error::EmptySupported)
            } else {
                Ok(acc as f64 / (n as f64 * m as f64))
            };
        }
        _ => scores
            .into_iter()
            .map(|s| {
                n += 1;
                2.0 * model.cdf_at(s) - 1.0
            })
            .sum(),
    };
    if n == 0 {
        return Err(Error::EmptySupported);
    }
    Ok(total / n as f64)
}

/// Utility of a reinforced distribution against the complement.
pub fn utility(after: &ReinforcedSet, model: &ComplementModel) -> Result<f64> {
    mean_advantage(after.reinforced(), model)
}

/// Exact utility against an empirical complement as an unreduced fraction
/// `(numerator, denominator)` with denominator `n * m`.
pub fn utility_fraction(
    scores: impl IntoIterator<Item = f64>,
    complement: &EmpiricalCdf,
) -> (i64, i64) {
    let m = complement.len() as i64;
    let mut n = 0i64;
    let mut acc = 0i64;
    for s in scores {
        n += 1;
        acc += 2 * complement.count_le(s) as i64 - m;
    }
    (acc, n * m)
}

/// Budget in total score units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetSpec {
    total: f64,
}

impl BudgetSpec {
    pub fn total(total: f64) -> Result<Self> {
        if !(total.is_finite() && total >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "budget must be non-negative, got {total}"
            )));
        }
        Ok(Self { total })
    }

    pub fn from_per_entry(per_entry: f64, n: usize) -> Result<Self> {
        Self::total(per_entry * n as f64)
    }

    pub fn value(&self) -> f64 {
        self.total
    }

    pub fn per_entry(&self, n: usize) -> f64 {
        self.total / n as f64
    }
}

/// Half-open score interval `[low, high)`; entries inside move to `high`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub low: f64,
    pub high: f64,
}

impl Segment {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low >= 0.0 && low < high) {
            return Err(Error::InvalidInput(format!(
                "segment [{low}, {high}) is empty or negative"
            )));
        }
        Ok(Self { low, high })
    }

    pub fn target(&self) -> f64 {
        self.high
    }

    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x < self.high
    }

    /// True when `self` lies inside `other`, up to a relative tolerance.
    pub fn within(&self, other: &Segment, tol: f64) -> bool {
        let slack = tol * other.high.abs().max(1.0);
        self.low >= other.low - slack && self.high <= other.high + slack
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_entry() -> ComplementModel {
        ComplementModel::empirical(vec![10.0, 24.0, 35.0, 60.0, 80.0, 100.0, 200.0, 220.0]).unwrap()
    }

    #[test]
    fn empirical_cdf_steps() {
        let c = four_entry();
        assert_eq!(c.cdf(80.0).unwrap(), 0.625);
        assert_eq!(c.cdf(79.999).unwrap(), 0.5);
        assert_eq!(c.cdf(220.0).unwrap(), 1.0);
        assert_eq!(c.cdf(5.0).unwrap(), 0.0);
    }

    #[test]
    fn analytic_cdf_values() {
        let e = ComplementModel::exponential(1.0).unwrap();
        assert_eq!(e.cdf(0.0).unwrap(), 0.0);
        assert!((e.cdf(2.0).unwrap() - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        let ln = ComplementModel::log_normal(0.0, 1.0).unwrap();
        assert!((ln.cdf(1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn negative_score_is_domain_error() {
        assert!(matches!(four_entry().cdf(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn normal_cdf_reference_points() {
        // reference values of the standard normal c.d.f.
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((std_normal_cdf(-2.5) - 0.006_209_665_325_776_132).abs() < 1e-12);
        assert!((std_normal_cdf(0.3) - 0.617_911_422_188_952_7).abs() < 1e-12);
    }

    #[test]
    fn chord_between_steps() {
        let g = chord_gradient(&four_entry(), 100.0, 80.0).unwrap();
        assert!((g - 0.00625).abs() < 1e-15);
        assert_eq!(g, chord_gradient(&four_entry(), 80.0, 100.0).unwrap());
        assert_eq!(
            chord_gradient(&four_entry(), 80.0, 80.0),
            Err(Error::DegenerateChord(80.0))
        );
    }

    #[test]
    fn exponential_chord_approaches_density() {
        let lam = 0.7;
        let m = ComplementModel::exponential(lam).unwrap();
        let y = 1.3;
        let h = 1e-6;
        let fd = chord_gradient(&m, y + h, y - h).unwrap();
        let exact = lam * (-lam * y).exp();
        assert!((fd - exact).abs() < 1e-9);
        assert!((m.pdf(y).unwrap() - exact).abs() < 1e-15);
    }

    #[test]
    fn utility_examples() {
        let one = |v: Vec<f64>, c: Vec<f64>| {
            let s = SupportedSet::new(v).unwrap();
            utility(
                &ReinforcedSet::identity(&s),
                &ComplementModel::empirical(c).unwrap(),
            )
            .unwrap()
        };
        assert_eq!(one(vec![5.0], vec![1.0, 2.0, 3.0]), 1.0);
        assert_eq!(one(vec![2.0], vec![2.0]), 1.0);
        let after = SupportedSet::new(vec![10.0, 15.0, 40.0, 114.0]).unwrap();
        let u = utility(&ReinforcedSet::identity(&after), &four_entry()).unwrap();
        assert_eq!(u, -0.3125);
    }

    #[test]
    fn utility_formula_equals_sign_sum() {
        let a = [3.0, 7.0, 7.0, 12.0];
        let c = [1.0, 7.0, 9.0, 12.0, 15.0];
        let mut s = 0i64;
        for x in a {
            for y in c {
                s += if x >= y { 1 } else { -1 };
            }
        }
        let model = ComplementModel::empirical(c.to_vec()).unwrap();
        let u = mean_advantage(a, &model).unwrap();
        assert_eq!(u, s as f64 / 20.0);
        let e = model.as_empirical().unwrap();
        assert_eq!(utility_fraction(a, e), (s, 20));
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(expectation(&[10.0, 15.0, 40.0, 114.0]).unwrap(), 44.75);
        assert_eq!(expectation(&[3.5]).unwrap(), 3.5);
        assert_eq!(expectation(&[]), Err(Error::EmptySupported));
        let plan = ReinforcedSet::new(vec![(5.0, 10.0), (12.0, 20.0)]).unwrap();
        let before = SupportedSet::new(vec![5.0, 12.0]).unwrap();
        assert_eq!(plan.expectation() - before.expectation(), 6.5);
        assert_eq!(plan.cost() / 2.0, 6.5);
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert_eq!(EmpiricalCdf::new(Vec::new()), Err(Error::EmptyComplement));
        assert!(SupportedSet::new(vec![0.0]).is_err());
        assert!(ComplementModel::exponential(0.0).is_err());
        assert!(ComplementModel::log_normal(0.0, -1.0).is_err());
        assert!(ComplementModel::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.5)]).is_err());
        assert!(ComplementModel::piecewise_linear(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(ReinforcedSet::new(vec![(5.0, 4.0)]).is_err());
        assert!(BudgetSpec::total(-1.0).is_err());
    }

    #[test]
    fn piecewise_linear_shape() {
        let m =
            ComplementModel::piecewise_linear(vec![(1.0, 0.0), (2.0, 0.5), (4.0, 1.0)]).unwrap();
        assert_eq!(m.cdf(0.5).unwrap(), 0.0);
        assert_eq!(m.cdf(1.5).unwrap(), 0.25);
        assert_eq!(m.cdf(3.0).unwrap(), 0.75);
        assert_eq!(m.cdf(9.0).unwrap(), 1.0);
        assert_eq!(m.pdf(1.5), Some(0.5));
        assert_eq!(m.peak_density(), 0.5);
    }
}
