//! Counterfactual decompositions of the change in an outcome over named factors.
//!
//! A [`FactorScenario`] holds a baseline and a final value for every factor.
//! An [`OutcomeFunction`] maps a complete assignment of factor values to a
//! real number. Every decomposition works on the 2ⁿ *corners* of the
//! scenario: assignments that take final values on some subset of factors
//! (the switched set) and baseline values elsewhere.
//!
//! Three schemes are provided:
//!
//! * [`Scheme::Sequential`] switches factors one at a time in a fixed order;
//!   each factor receives the increment observed when it is switched.
//!   The result depends on the order.
//! * [`Scheme::PathIndependent`] gives each factor the effect of switching it
//!   alone and reports everything left over as one interaction term.
//! * [`Scheme::Shapley`] averages the sequential components over all orders.
//!
//! Corners are memoized, so each is evaluated at most once per call.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Largest factor count accepted by [`shapley_decompose`].
pub const SHAPLEY_MAX_FACTORS: usize = 12;

/// Largest factor count accepted by any decomposition (corners are bitmasks).
pub const MAX_FACTORS: usize = 63;

/// Baseline and final values of each named factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorScenario<V> {
    factors: Vec<String>,
    baseline: Vec<V>,
    finals: Vec<V>,
}

impl<V> FactorScenario<V> {
    /// Builds a scenario from `(name, baseline, final)` triples, keeping their order.
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, V, V)>,
        S: Into<String>,
    {
        let mut factors = Vec::new();
        let mut baseline = Vec::new();
        let mut finals = Vec::new();
        for (name, b, f) in entries {
            factors.push(name.into());
            baseline.push(b);
            finals.push(f);
        }
        if factors.is_empty() {
            return Err(Error::domain("scenario needs at least one factor"));
        }
        let mut seen = BTreeSet::new();
        for name in &factors {
            if !seen.insert(name.as_str()) {
                return Err(Error::domain(format!("duplicate factor name {name:?}")));
            }
        }
        if factors.len() > MAX_FACTORS {
            return Err(Error::Capacity(format!(
                "{} factors exceeds the limit of {MAX_FACTORS}",
                factors.len()
            )));
        }
        Ok(FactorScenario {
            factors,
            baseline,
            finals,
        })
    }

    /// Builds a scenario from keyed baseline/final maps. Both maps must have
    /// exactly the keys listed in `factors`.
    pub fn from_maps<S: AsRef<str>>(
        factors: &[S],
        mut baseline: HashMap<String, V>,
        mut finals: HashMap<String, V>,
    ) -> Result<Self> {
        if baseline.len() != factors.len() || finals.len() != factors.len() {
            return Err(Error::domain(
                "baseline and final must have exactly one value per factor",
            ));
        }
        let mut entries = Vec::with_capacity(factors.len());
        for name in factors {
            let name = name.as_ref();
            let b = baseline
                .remove(name)
                .ok_or_else(|| Error::domain(format!("baseline is missing factor {name:?}")))?;
            let f = finals
                .remove(name)
                .ok_or_else(|| Error::domain(format!("final is missing factor {name:?}")))?;
            entries.push((name.to_string(), b, f));
        }
        Self::new(entries)
    }

    pub fn factors(&self) -> &[String] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn baseline(&self, index: usize) -> &V {
        &self.baseline[index]
    }

    pub fn final_value(&self, index: usize) -> &V {
        &self.finals[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f == name)
    }

    fn require_index(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::domain(format!("unknown factor {name:?}")))
    }

    /// Corner switching exactly the named factors.
    pub fn corner<S: AsRef<str>>(&self, switched: &[S]) -> Result<Corner> {
        let mut mask = 0u64;
        for name in switched {
            mask |= 1 << self.require_index(name.as_ref())?;
        }
        Ok(Corner(mask))
    }

    /// Maps an ordering given by name onto factor indices, checking it is a permutation.
    fn resolve_order<S: AsRef<str>>(&self, order: &[S]) -> Result<Vec<usize>> {
        if order.len() != self.len() {
            return Err(Error::domain(format!(
                "order has {} entries but the scenario has {} factors",
                order.len(),
                self.len()
            )));
        }
        let mut seen = 0u64;
        let mut out = Vec::with_capacity(order.len());
        for name in order {
            let idx = self.require_index(name.as_ref())?;
            if seen & (1 << idx) != 0 {
                return Err(Error::domain(format!(
                    "factor {:?} appears twice in the order",
                    name.as_ref()
                )));
            }
            seen |= 1 << idx;
            out.push(idx);
        }
        Ok(out)
    }

    fn full_corner(&self) -> Corner {
        Corner(low_bits(self.len()))
    }

    fn describe(&self, corner: Corner) -> String {
        let names: Vec<&str> = (0..self.len())
            .filter(|&i| corner.contains(i))
            .map(|i| self.factors[i].as_str())
            .collect();
        format!("{{{}}}", names.join(","))
    }
}

fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A set of switched factors, as a bitmask over factor indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Corner(u64);

impl Corner {
    pub const BASELINE: Corner = Corner(0);

    pub fn contains(self, index: usize) -> bool {
        self.0 & (1 << index) != 0
    }

    pub fn with(self, index: usize) -> Corner {
        Corner(self.0 | (1 << index))
    }

    pub fn bits(self) -> u64 {
        self.0
    }
}

/// A complete factor assignment at one corner of a scenario.
#[derive(Debug, Clone, Copy)]
pub struct Assignment<'a, V> {
    scenario: &'a FactorScenario<V>,
    corner: Corner,
}

impl<'a, V> Assignment<'a, V> {
    pub fn new(scenario: &'a FactorScenario<V>, corner: Corner) -> Self {
        Assignment { scenario, corner }
    }

    /// Value of the `index`-th factor at this corner.
    pub fn value(&self, index: usize) -> &'a V {
        if self.corner.contains(index) {
            &self.scenario.finals[index]
        } else {
            &self.scenario.baseline[index]
        }
    }

    pub fn get(&self, name: &str) -> Option<&'a V> {
        self.scenario.index_of(name).map(|i| self.value(i))
    }

    pub fn is_switched(&self, name: &str) -> bool {
        self.scenario.index_of(name).is_some_and(|i| self.corner.contains(i))
    }

    pub fn corner(&self) -> Corner {
        self.corner
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a str, &'a V)> + '_ {
        (0..self.scenario.len()).map(move |i| (self.scenario.factors[i].as_str(), self.value(i)))
    }
}

/// Maps a full factor assignment to a real outcome.
///
/// Implementations must be deterministic and free of side effects. Plain
/// closures `Fn(&Assignment<V>) -> f64` implement this trait; implement it
/// directly when evaluation can fail.
pub trait OutcomeFunction<V> {
    fn evaluate(&self, assignment: &Assignment<'_, V>) -> Result<f64>;
}

impl<V, F> OutcomeFunction<V> for F
where
    F: Fn(&Assignment<'_, V>) -> f64,
{
    fn evaluate(&self, assignment: &Assignment<'_, V>) -> Result<f64> {
        Ok(self(assignment))
    }
}

/// Memoizing corner evaluator shared by all schemes within one call.
pub struct CornerCache<'a, V, F: ?Sized> {
    scenario: &'a FactorScenario<V>,
    outcome: &'a F,
    values: HashMap<Corner, f64>,
}

impl<'a, V, F> CornerCache<'a, V, F>
where
    F: OutcomeFunction<V> + ?Sized,
{
    pub fn new(outcome: &'a F, scenario: &'a FactorScenario<V>) -> Self {
        CornerCache {
            scenario,
            outcome,
            values: HashMap::new(),
        }
    }

    pub fn scenario(&self) -> &'a FactorScenario<V> {
        self.scenario
    }

    pub fn value(&mut self, corner: Corner) -> Result<f64> {
        if let Some(&v) = self.values.get(&corner) {
            return Ok(v);
        }
        let assignment = Assignment::new(self.scenario, corner);
        let v = self.outcome.evaluate(&assignment).map_err(|e| Error::AtCorner {
            corner: self.scenario.describe(corner),
            source: Box::new(e),
        })?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                corner: self.scenario.describe(corner),
                value: v,
            });
        }
        self.values.insert(corner, v);
        Ok(v)
    }

    /// Number of distinct corners evaluated so far.
    pub fn evaluations(&self) -> usize {
        self.values.len()
    }

    fn total(&mut self) -> Result<f64> {
        let full = self.scenario.full_corner();
        Ok(self.value(full)? - self.value(Corner::BASELINE)?)
    }
}

/// Decomposition scheme.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Switch factors one by one in the given order.
    Sequential(Vec<String>),
    /// Single-switch main effects plus one aggregate interaction term.
    PathIndependent,
    /// Sequential components averaged over every order.
    Shapley,
}

impl Scheme {
    pub fn sequential<S: AsRef<str>>(order: &[S]) -> Self {
        Scheme::Sequential(order.iter().map(|s| s.as_ref().to_string()).collect())
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Sequential(order) => write!(f, "sequential({})", order.join(",")),
            Scheme::PathIndependent => f.write_str("path-independent"),
            Scheme::Shapley => f.write_str("shapley"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub scheme: Scheme,
    /// Per-factor components in scenario factor order.
    pub components: Vec<(String, f64)>,
    /// Zero for sequential and Shapley results.
    pub interaction: f64,
    /// `f(final) - f(baseline)`.
    pub total: f64,
}

impl DecompositionResult {
    pub fn component(&self, factor: &str) -> Option<f64> {
        self.components.iter().find(|(name, _)| name == factor).map(|&(_, v)| v)
    }

    /// `sum(components) + interaction - total`.
    pub fn residual(&self) -> f64 {
        self.components.iter().map(|(_, v)| v).sum::<f64>() + self.interaction - self.total
    }

    /// Magnitude against which the adding-up residual is judged.
    pub fn scale(&self) -> f64 {
        let parts: f64 = self.components.iter().map(|(_, v)| v.abs()).sum();
        parts.max(self.interaction.abs()).max(self.total.abs())
    }

    /// Whether the adding-up identity holds to `rel_tol` relative to [`Self::scale`].
    pub fn adds_up(&self, rel_tol: f64) -> bool {
        self.residual().abs() <= rel_tol * self.scale()
    }
}

/// Outcome at the corner where exactly `switched` take their final values.
pub fn evaluate_corner<V, F, S>(outcome: &F, scenario: &FactorScenario<V>, switched: &[S]) -> Result<f64>
where
    F: OutcomeFunction<V> + ?Sized,
    S: AsRef<str>,
{
    let corner = scenario.corner(switched)?;
    CornerCache::new(outcome, scenario).value(corner)
}

/// Dispatches on `scheme`.
pub fn decompose<V, F>(outcome: &F, scenario: &FactorScenario<V>, scheme: &Scheme) -> Result<DecompositionResult>
where
    F: OutcomeFunction<V> + ?Sized,
{
    let mut cache = CornerCache::new(outcome, scenario);
    decompose_cached(&mut cache, scheme)
}

/// Like [`decompose`], reusing corners already held in `cache`.
pub fn decompose_cached<V, F>(cache: &mut CornerCache<'_, V, F>, scheme: &Scheme) -> Result<DecompositionResult>
where
    F: OutcomeFunction<V> + ?Sized,
{
    match scheme {
        Scheme::Sequential(order) => sequential_cached(cache, order),
        Scheme::PathIndependent => path_independent_cached(cache),
        Scheme::Shapley => shapley_cached(cache),
    }
}

/// Sequential (Oaxaca-Blinder) decomposition: the k-th factor of `order`
/// receives `f(first k switched) - f(first k-1 switched)`.
pub fn sequential_decompose<V, F, S>(
    outcome: &F,
    scenario: &FactorScenario<V>,
    order: &[S],
) -> Result<DecompositionResult>
where
    F: OutcomeFunction<V> + ?Sized,
    S: AsRef<str>,
{
    sequential_cached(&mut CornerCache::new(outcome, scenario), order)
}

fn sequential_cached<V, F, S>(cache: &mut CornerCache<'_, V, F>, order: &[S]) -> Result<DecompositionResult>
where
    F: OutcomeFunction<V> + ?Sized,
    S: AsRef<str>,
{
    let scenario = cache.scenario();
    let order = scenario.resolve_order(order)?;
    let mut values = vec![0.0; scenario.len()];
    let mut corner = Corner::BASELINE;
    let mut prev = cache.value(corner)?;
    for &idx in &order {
        corner = corner.with(idx);
        let next = cache.value(corner)?;
        values[idx] = next - prev;
        prev = next;
    }
    Ok(DecompositionResult {
        scheme: Scheme::Sequential(order.iter().map(|&i| scenario.factors[i].clone()).collect()),
        components: label(scenario, values),
        interaction: 0.0,
        total: cache.total()?,
    })
}

/// Path-independent decomposition: each factor's component is the effect of
/// switching it alone; the remainder of the total change is the interaction.
///
/// With two factors the interaction equals
/// `f(x1,y1) - f(x1,y0) - f(x0,y1) + f(x0,y0)`, evaluated as
/// `(f(x1,y1) - f(x0,y1)) - (f(x1,y0) - f(x0,y0))`.
pub fn path_independent_decompose<V, F>(outcome: &F, scenario: &FactorScenario<V>) -> Result<DecompositionResult>
where
    F: OutcomeFunction<V> + ?Sized,
{
    path_independent_cached(&mut CornerCache::new(outcome, scenario))
}

fn path_independent_cached<V, F>(cache: &mut CornerCache<'_, V, F>) -> Result<DecompositionResult>
where
    F: OutcomeFunction<V> + ?Sized,
{
    let scenario = cache.scenario();
    let base = cache.value(Corner::BASELINE)?;
    let mut values = Vec::with_capacity(scenario.len());
    for i in 0..scenario.len() {
        values.push(cache.value(Corner::BASELINE.with(i))? - base);
    }
    let total = cache.total()?;
    let interaction = if scenario.len() == 2 {
        bracket(cache)?
    } else {
        total - values.iter().sum::<f64>()
    };
    Ok(DecompositionResult {
        scheme: Scheme::PathIndependent,
        components: label(scenario, values),
        interaction,
        total,
    })
}

fn bracket<V, F>(cache: &mut CornerCache<'_, V, F>) -> Result<f64>
where
    F: OutcomeFunction<V> + ?Sized,
{
    let f00 = cache.value(Corner(0b00))?;
    let f10 = cache.value(Corner(0b01))?;
    let f01 = cache.value(Corner(0b10))?;
    let f11 = cache.value(Corner(0b11))?;
    Ok((f11 - f01) - (f10 - f00))
}

/// Two-factor interaction `f(x1,y1) - f(x1,y0) - f(x0,y1) + f(x0,y0)`.
pub fn interaction_term<V, F>(outcome: &F, scenario: &FactorScenario<V>) -> Result<f64>
where
    F: OutcomeFunction<V> + ?Sized,
{
    if scenario.len() != 2 {
        return Err(Error::domain(format!(
            "interaction term needs exactly two factors, got {}",
            scenario.len()
        )));
    }
    bracket(&mut CornerCache::new(outcome, scenario))
}

/// Shapley decomposition: each factor's sequential component averaged over
/// all n! orders, computed through the equivalent subset weighting
/// `|S|! (n-|S|-1)! / n!`.
pub fn shapley_decompose<V, F>(outcome: &F, scenario: &FactorScenario<V>) -> Result<DecompositionResult>
where
    F: OutcomeFunction<V> + ?Sized,
{
    shapley_cached(&mut CornerCache::new(outcome, scenario))
}

fn shapley_cached<V, F>(cache: &mut CornerCache<'_, V, F>) -> Result<DecompositionResult>
where
    F: OutcomeFunction<V> + ?Sized,
{
    let scenario = cache.scenario();
    let n = scenario.len();
    if n > SHAPLEY_MAX_FACTORS {
        return Err(Error::Capacity(format!(
            "Shapley decomposition supports at most {SHAPLEY_MAX_FACTORS} factors, got {n}"
        )));
    }
    let factorial: Vec<f64> = (0..=n)
        .scan(1.0, |acc, k| {
            if k > 0 {
                *acc *= k as f64;
            }
            Some(*acc)
        })
        .collect();
    let weights: Vec<f64> = (0..n)
        .map(|s| factorial[s] * factorial[n - s - 1] / factorial[n])
        .collect();

    let mut values = vec![0.0; n];
    for mask in 0..(1u64 << n) {
        let without = Corner(mask);
        let size = mask.count_ones() as usize;
        for (i, value) in values.iter_mut().enumerate() {
            if without.contains(i) {
                continue;
            }
            let gain = cache.value(without.with(i))? - cache.value(without)?;
            *value += weights[size] * gain;
        }
    }
    Ok(DecompositionResult {
        scheme: Scheme::Shapley,
        components: label(scenario, values),
        interaction: 0.0,
        total: cache.total()?,
    })
}

fn label<V>(scenario: &FactorScenario<V>, values: Vec<f64>) -> Vec<(String, f64)> {
    scenario.factors.iter().cloned().zip(values).collect()
}

/// Difference between a sequential component and the path-independent main effect.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionGap {
    pub scheme: Scheme,
    pub factor: String,
    pub gap: f64,
}

/// Both sequential orders, the path-independent and the Shapley results of a
/// two-factor scenario, side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeComparison {
    pub results: Vec<DecompositionResult>,
    pub gaps: Vec<AttributionGap>,
}

impl SchemeComparison {
    pub fn get(&self, scheme: &Scheme) -> Option<&DecompositionResult> {
        self.results.iter().find(|r| &r.scheme == scheme)
    }

    pub fn gap(&self, scheme: &Scheme, factor: &str) -> Option<f64> {
        self.gaps
            .iter()
            .find(|g| &g.scheme == scheme && g.factor == factor)
            .map(|g| g.gap)
    }
}

/// Runs the four two-factor schemes on shared corners and reports the
/// attribution gap of each sequential component.
pub fn compare_schemes<V, F>(outcome: &F, scenario: &FactorScenario<V>) -> Result<SchemeComparison>
where
    F: OutcomeFunction<V> + ?Sized,
{
    if scenario.len() != 2 {
        return Err(Error::domain(format!(
            "scheme comparison needs exactly two factors, got {}",
            scenario.len()
        )));
    }
    let [x, y] = [&scenario.factors[0], &scenario.factors[1]];
    let schemes = [
        Scheme::sequential(&[x, y]),
        Scheme::sequential(&[y, x]),
        Scheme::PathIndependent,
        Scheme::Shapley,
    ];
    let mut cache = CornerCache::new(outcome, scenario);
    let results = schemes
        .iter()
        .map(|s| decompose_cached(&mut cache, s))
        .collect::<Result<Vec<_>>>()?;

    let main = &results[2];
    let mut gaps = Vec::new();
    for seq in &results[..2] {
        for (name, value) in &seq.components {
            let base = main.component(name).unwrap_or(0.0);
            gaps.push(AttributionGap {
                scheme: seq.scheme.clone(),
                factor: name.clone(),
                gap: value - base,
            });
        }
    }
    Ok(SchemeComparison { results, gaps })
}
