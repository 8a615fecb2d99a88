//! Iterative proportional fitting of a seed table to target marginals.
//!
//! Each iteration rescales rows to the male targets, then columns to the
//! female targets. Row and column rescaling leaves every 2×2 cross-product
//! ratio of the seed unchanged, so the fit keeps the seed's odds ratios.

use crate::error::{Error, Result};

use super::table::{Marginals, MARGINAL_TOTAL_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpfConfig {
    /// Maximum absolute row/column deviation from the targets, relative to the total.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IpfConfig {
    fn default() -> Self {
        IpfConfig {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

impl IpfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::domain(format!(
                "IPF tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpfFit {
    /// Row-major fitted counts.
    pub counts: Vec<f64>,
    pub iterations: usize,
    pub deviation: f64,
}

/// Fits the row-major `k`×`k` `seed` to `targets`.
pub fn fit(seed: &[f64], targets: &Marginals, cfg: &IpfConfig) -> Result<IpfFit> {
    cfg.validate()?;
    let k = targets.k();
    if seed.len() != k * k || targets.female.len() != k {
        return Err(Error::domain(format!(
            "seed has {} cells but marginals describe {k} levels",
            seed.len()
        )));
    }
    let total = targets.total();
    let female_total: f64 = targets.female.iter().sum();
    if (total - female_total).abs() > MARGINAL_TOTAL_TOL * total.max(female_total) {
        return Err(Error::domain(format!(
            "target totals differ: male {total}, female {female_total}"
        )));
    }
    if total <= 0.0 {
        return Err(Error::domain("target marginals sum to zero"));
    }
    let mut table = seed.to_vec();
    let mut deviation = f64::INFINITY;
    for iteration in 1..=cfg.max_iter {
        for (i, &target) in targets.male.iter().enumerate() {
            let row = &mut table[i * k..(i + 1) * k];
            let factor = scale_factor(row.iter().sum(), target, "row", i)?;
            row.iter_mut().for_each(|c| *c *= factor);
        }
        for (j, &target) in targets.female.iter().enumerate() {
            let sum: f64 = (0..k).map(|i| table[i * k + j]).sum();
            let factor = scale_factor(sum, target, "column", j)?;
            (0..k).for_each(|i| table[i * k + j] *= factor);
        }
        deviation = max_deviation(&table, targets) / total;
        if deviation <= cfg.tol {
            return Ok(IpfFit {
                counts: table,
                iterations: iteration,
                deviation,
            });
        }
    }
    Err(Error::Convergence {
        iterations: cfg.max_iter,
        deviation,
    })
}

fn scale_factor(current: f64, target: f64, what: &str, index: usize) -> Result<f64> {
    if target == 0.0 {
        Ok(0.0)
    } else if current > 0.0 {
        Ok(target / current)
    } else {
        Err(Error::domain(format!(
            "seed {what} {index} is empty but its target marginal is {target}"
        )))
    }
}

/// Largest absolute deviation of any row or column sum from its target.
pub fn max_deviation(table: &[f64], targets: &Marginals) -> f64 {
    let k = targets.k();
    let rows = (0..k).map(|i| (table[i * k..(i + 1) * k].iter().sum::<f64>() - targets.male[i]).abs());
    let cols = (0..k).map(|j| ((0..k).map(|i| table[i * k + j]).sum::<f64>() - targets.female[j]).abs());
    rows.chain(cols).fold(0.0, f64::max)
}
