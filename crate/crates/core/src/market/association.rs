//! The association ("preference") side of a couples table and the
//! construction of counterfactual tables from an association and a set of
//! marginals.

use crate::error::{Error, Result};

use super::ipf::{self, IpfConfig};
use super::table::{ContingencyTable, Marginals};

/// Default additive zero-cell adjustment.
pub const DEFAULT_ZERO_ADJUST: f64 = 0.5;

/// Odds-ratio structure of a table, held as a strictly positive seed.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationModel {
    levels: Vec<String>,
    seed: Vec<f64>,
    /// The adjustment added to every cell, if the source table had zeros.
    zero_adjusted: Option<f64>,
}

impl AssociationModel {
    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    /// Row-major seed cells.
    pub fn seed(&self) -> &[f64] {
        &self.seed
    }

    pub fn zero_adjusted(&self) -> Option<f64> {
        self.zero_adjusted
    }

    /// Cross-product ratio `seed[i][k] * seed[j][l] / (seed[i][l] * seed[j][k])`
    /// of rows `i, j` and columns `k, l`.
    pub fn odds_ratio(&self, rows: (usize, usize), cols: (usize, usize)) -> f64 {
        odds_ratio(&self.seed, self.k(), rows, cols)
    }
}

/// Cross-product ratio of a row-major `k`×`k` table.
pub fn odds_ratio(cells: &[f64], k: usize, (i, j): (usize, usize), (a, b): (usize, usize)) -> f64 {
    cells[i * k + a] * cells[j * k + b] / (cells[i * k + b] * cells[j * k + a])
}

/// Seed for `table`: its counts, with `zero_adjust` added to every cell when
/// any cell is zero.
pub fn extract_association(table: &ContingencyTable, zero_adjust: f64) -> Result<AssociationModel> {
    if !(zero_adjust >= 0.0 && zero_adjust.is_finite()) {
        return Err(Error::domain(format!(
            "zero adjustment must be nonnegative, got {zero_adjust}"
        )));
    }
    table.require_positive_total()?;
    let has_zero = table.counts().contains(&0.0);
    let (seed, zero_adjusted) = if has_zero {
        if zero_adjust == 0.0 {
            return Err(Error::domain(
                "table has zero cells; a positive zero adjustment is required",
            ));
        }
        (
            table.counts().iter().map(|c| c + zero_adjust).collect(),
            Some(zero_adjust),
        )
    } else {
        (table.counts().to_vec(), None)
    };
    Ok(AssociationModel {
        levels: table.levels().to_vec(),
        seed,
        zero_adjusted,
    })
}

/// Table with the odds ratios of `association` and the given marginals.
pub fn counterfactual_table(
    association: &AssociationModel,
    marginals: &Marginals,
    tol: f64,
    max_iter: usize,
) -> Result<ContingencyTable> {
    if marginals.k() != association.k() {
        return Err(Error::domain(format!(
            "marginals have {} levels, association has {}",
            marginals.k(),
            association.k()
        )));
    }
    let fitted = ipf::fit(&association.seed, marginals, &IpfConfig { tol, max_iter })?;
    ContingencyTable::from_flat(association.levels.clone(), fitted.counts)
}

/// A way of splitting a table into an association part and marginals and of
/// recombining them. The homogamy decomposition is generic over this.
pub trait CounterfactualModel {
    type Association: Clone;

    /// Tag recorded in output metadata.
    fn name(&self) -> &'static str;

    fn association(&self, table: &ContingencyTable) -> Result<Self::Association>;

    fn counterfactual(&self, association: &Self::Association, marginals: &Marginals) -> Result<ContingencyTable>;

    /// Zero adjustment applied when extracting the association of `table`, if any.
    fn zero_adjustment(&self, _association: &Self::Association) -> Option<f64> {
        None
    }
}

/// Odds ratios held in an IPF seed; counterfactuals by IPF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddsRatioIpf {
    pub zero_adjust: f64,
    pub ipf: IpfConfig,
}

impl Default for OddsRatioIpf {
    fn default() -> Self {
        OddsRatioIpf {
            zero_adjust: DEFAULT_ZERO_ADJUST,
            ipf: IpfConfig::default(),
        }
    }
}

impl CounterfactualModel for OddsRatioIpf {
    type Association = AssociationModel;

    fn name(&self) -> &'static str {
        "odds_ratio_ipf"
    }

    fn association(&self, table: &ContingencyTable) -> Result<AssociationModel> {
        extract_association(table, self.zero_adjust)
    }

    fn counterfactual(&self, association: &AssociationModel, marginals: &Marginals) -> Result<ContingencyTable> {
        counterfactual_table(association, marginals, self.ipf.tol, self.ipf.max_iter)
    }

    fn zero_adjustment(&self, association: &AssociationModel) -> Option<f64> {
        association.zero_adjusted
    }
}
