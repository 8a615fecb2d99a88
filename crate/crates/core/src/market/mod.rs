//! Couples tables and the homogamy-share decomposition into preference,
//! availability and interaction effects.

mod association;
mod homogamy;
mod ipf;
mod table;

pub use association::{
    counterfactual_table, extract_association, odds_ratio, AssociationModel, CounterfactualModel, OddsRatioIpf,
    DEFAULT_ZERO_ADJUST,
};
pub use homogamy::{
    decompose_homogamy_change, homogamy_scenario, long_horizon_decompose, DecompositionMetadata, HomogamyDecomposition,
    HomogamyOutcome, MarketFactor, Period, SchemeName, AVAILABILITY, PREFERENCE,
};
pub use ipf::{fit as ipf_fit, max_deviation, IpfConfig, IpfFit};
pub use table::{extract_marginals, homogamy_share, ContingencyTable, Marginals, MARGINAL_TOTAL_TOL};
