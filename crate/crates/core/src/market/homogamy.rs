//! Decomposition of the change in the homogamy share between two waves into
//! a preference (association) effect, an availability (marginals) effect and
//! their interaction.

use std::fmt;
use std::str::FromStr;

use crate::decomp::{self, Assignment, FactorScenario, OutcomeFunction, Scheme};
use crate::error::{Error, Result};

use super::association::CounterfactualModel;
use super::table::{extract_marginals, homogamy_share, ContingencyTable, Marginals};

pub const PREFERENCE: &str = "preference";
pub const AVAILABILITY: &str = "availability";

/// A pair of waves, `from` → `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Period {
    pub from: i32,
    pub to: i32,
}

impl Period {
    pub fn new(from: i32, to: i32) -> Self {
        Period { from, to }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.from, self.to)
    }
}

/// The four schemes available for the two-factor homogamy decomposition.
///
/// `SequentialXy` switches preferences first, `SequentialYx` switches
/// availability first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeName {
    SequentialXy,
    SequentialYx,
    PathIndependent,
    Shapley,
}

impl SchemeName {
    pub const ALL: [SchemeName; 4] = [
        SchemeName::SequentialXy,
        SchemeName::SequentialYx,
        SchemeName::PathIndependent,
        SchemeName::Shapley,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeName::SequentialXy => "sequential-xy",
            SchemeName::SequentialYx => "sequential-yx",
            SchemeName::PathIndependent => "path-independent",
            SchemeName::Shapley => "shapley",
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            SchemeName::SequentialXy => Scheme::sequential(&[PREFERENCE, AVAILABILITY]),
            SchemeName::SequentialYx => Scheme::sequential(&[AVAILABILITY, PREFERENCE]),
            SchemeName::PathIndependent => Scheme::PathIndependent,
            SchemeName::Shapley => Scheme::Shapley,
        }
    }

    pub fn from_scheme(scheme: &Scheme) -> Option<Self> {
        SchemeName::ALL.into_iter().find(|n| &n.scheme() == scheme)
    }
}

impl fmt::Display for SchemeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeName::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| {
            Error::domain(format!(
                "unknown scheme {s:?}; expected one of sequential-xy, sequential-yx, path-independent, shapley"
            ))
        })
    }
}

/// Factor values of the homogamy scenario.
#[derive(Debug, Clone)]
pub enum MarketFactor<A> {
    Association(A),
    Availability(Marginals),
}

/// `f(association, marginals) = homogamy_share(counterfactual table)`.
pub struct HomogamyOutcome<'m, M> {
    model: &'m M,
}

impl<'m, M: CounterfactualModel> HomogamyOutcome<'m, M> {
    pub fn new(model: &'m M) -> Self {
        HomogamyOutcome { model }
    }

    pub fn share(&self, association: &M::Association, marginals: &Marginals) -> Result<f64> {
        homogamy_share(&self.model.counterfactual(association, marginals)?)
    }
}

impl<M: CounterfactualModel> OutcomeFunction<MarketFactor<M::Association>> for HomogamyOutcome<'_, M> {
    fn evaluate(&self, assignment: &Assignment<'_, MarketFactor<M::Association>>) -> Result<f64> {
        let association = match assignment.get(PREFERENCE) {
            Some(MarketFactor::Association(a)) => a,
            _ => return Err(Error::domain("scenario lacks an association factor")),
        };
        let marginals = match assignment.get(AVAILABILITY) {
            Some(MarketFactor::Availability(m)) => m,
            _ => return Err(Error::domain("scenario lacks an availability factor")),
        };
        self.share(association, marginals)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionMetadata {
    /// Tag of the counterfactual model, e.g. `odds_ratio_ipf`.
    pub association_model: String,
    /// Zero-cell adjustment, when it was applied to any table involved.
    pub zero_adjustment: Option<f64>,
    pub observed_share_from: f64,
    pub observed_share_to: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogamyDecomposition {
    pub period: Period,
    pub scheme: Scheme,
    pub preference: f64,
    pub availability: f64,
    pub interaction: f64,
    pub total: f64,
    pub metadata: DecompositionMetadata,
}

impl HomogamyDecomposition {
    /// `(name, value)` of preference, availability, interaction and total.
    pub fn components(&self) -> [(&'static str, f64); 4] {
        [
            (PREFERENCE, self.preference),
            (AVAILABILITY, self.availability),
            ("interaction", self.interaction),
            ("total", self.total),
        ]
    }
}

/// Scenario with x = association and y = marginals of `t0` → `t1`.
pub fn homogamy_scenario<M: CounterfactualModel>(
    t0: &ContingencyTable,
    t1: &ContingencyTable,
    model: &M,
) -> Result<FactorScenario<MarketFactor<M::Association>>> {
    if t0.levels() != t1.levels() {
        return Err(Error::domain(format!(
            "tables have different education levels: {:?} vs {:?}",
            t0.levels(),
            t1.levels()
        )));
    }
    FactorScenario::new([
        (
            PREFERENCE,
            MarketFactor::Association(model.association(t0)?),
            MarketFactor::Association(model.association(t1)?),
        ),
        (
            AVAILABILITY,
            MarketFactor::Availability(extract_marginals(t0)),
            MarketFactor::Availability(extract_marginals(t1)),
        ),
    ])
}

/// Decomposes `homogamy_share(t1) - homogamy_share(t0)` under `scheme`.
///
/// The reported total is `f(a1, m1) - f(a0, m0)`, which equals the observed
/// change whenever neither table needed a zero-cell adjustment.
pub fn decompose_homogamy_change<M: CounterfactualModel>(
    t0: &ContingencyTable,
    t1: &ContingencyTable,
    period: Period,
    scheme: &Scheme,
    model: &M,
) -> Result<HomogamyDecomposition> {
    let scenario = homogamy_scenario(t0, t1, model)?;
    let outcome = HomogamyOutcome::new(model);
    let result = decomp::decompose(&outcome, &scenario, scheme)?;

    let zero_adjustment = [scenario.baseline(0), scenario.final_value(0)]
        .into_iter()
        .find_map(|factor| match factor {
            MarketFactor::Association(a) => model.zero_adjustment(a),
            MarketFactor::Availability(_) => None,
        });

    Ok(HomogamyDecomposition {
        period,
        scheme: result.scheme.clone(),
        preference: result.component(PREFERENCE).unwrap_or(0.0),
        availability: result.component(AVAILABILITY).unwrap_or(0.0),
        interaction: result.interaction,
        total: result.total,
        metadata: DecompositionMetadata {
            association_model: model.name().to_string(),
            zero_adjustment,
            observed_share_from: homogamy_share(t0)?,
            observed_share_to: homogamy_share(t1)?,
        },
    })
}

/// Component-wise sum of consecutive short-horizon decompositions.
pub fn long_horizon_decompose(panel: &[HomogamyDecomposition]) -> Result<HomogamyDecomposition> {
    let (first, rest) = panel
        .split_first()
        .ok_or_else(|| Error::domain("long-horizon decomposition needs at least one period"))?;
    let mut out = first.clone();
    let mut prev = first.period;
    for d in rest {
        if d.period.from != prev.to {
            return Err(Error::domain(format!(
                "periods {prev} and {} are not consecutive",
                d.period
            )));
        }
        if d.scheme != first.scheme {
            return Err(Error::domain(format!(
                "mixed schemes {} and {}",
                first.scheme, d.scheme
            )));
        }
        out.preference += d.preference;
        out.availability += d.availability;
        out.interaction += d.interaction;
        out.total += d.total;
        out.metadata.zero_adjustment = out.metadata.zero_adjustment.or(d.metadata.zero_adjustment);
        out.metadata.observed_share_to = d.metadata.observed_share_to;
        prev = d.period;
    }
    out.period = Period::new(first.period.from, prev.to);
    Ok(out)
}
