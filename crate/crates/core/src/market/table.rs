use crate::error::{Error, Result};

/// Relative tolerance for the equal-totals check on [`Marginals`].
pub const MARGINAL_TOTAL_TOL: f64 = 1e-9;

/// Couples by (male education, female education). Rows are the male
/// partner's level, columns the female partner's, both in `levels` order.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    levels: Vec<String>,
    counts: Vec<f64>,
}

impl ContingencyTable {
    pub fn new<S: Into<String>>(levels: Vec<S>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let levels: Vec<String> = levels.into_iter().map(Into::into).collect();
        let k = levels.len();
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            return Err(Error::domain(format!("table must be {k}x{k} to match its levels")));
        }
        Self::from_flat(levels, rows.into_iter().flatten().collect())
    }

    /// Builds a table from row-major counts.
    pub fn from_flat(levels: Vec<String>, counts: Vec<f64>) -> Result<Self> {
        let k = levels.len();
        if k < 2 {
            return Err(Error::domain("a table needs at least two education levels"));
        }
        if counts.len() != k * k {
            return Err(Error::domain(format!(
                "expected {} counts for {k} levels, got {}",
                k * k,
                counts.len()
            )));
        }
        for (i, l) in levels.iter().enumerate() {
            if levels[..i].contains(l) {
                return Err(Error::domain(format!("duplicate level {l:?}")));
            }
        }
        if let Some(c) = counts.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::domain(format!("counts must be finite and nonnegative, got {c}")));
        }
        Ok(ContingencyTable { levels, counts })
    }

    /// Unlabelled K×K table using `level0, level1, ...` as labels.
    pub fn unlabelled(rows: Vec<Vec<f64>>) -> Result<Self> {
        let levels = (0..rows.len()).map(|i| format!("level{i}")).collect();
        Self::new(levels, rows)
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn get(&self, male: usize, female: usize) -> f64 {
        self.counts[male * self.k() + female]
    }

    /// Row-major counts.
    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.counts.chunks(self.k()).map(<[f64]>::to_vec).collect()
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_flat(self.levels.clone(), self.counts.iter().map(|c| c * factor).collect())
    }

    pub(crate) fn require_positive_total(&self) -> Result<f64> {
        let total = self.total();
        if total > 0.0 {
            Ok(total)
        } else {
            Err(Error::domain("table is empty (total count is zero)"))
        }
    }
}

/// Education distributions of male and female partners.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub male: Vec<f64>,
    pub female: Vec<f64>,
}

impl Marginals {
    pub fn new(male: Vec<f64>, female: Vec<f64>) -> Result<Self> {
        if male.len() != female.len() {
            return Err(Error::domain("male and female marginals differ in length"));
        }
        if let Some(v) = male.iter().chain(&female).find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::domain(format!(
                "marginals must be finite and nonnegative, got {v}"
            )));
        }
        let (m, f): (f64, f64) = (male.iter().sum(), female.iter().sum());
        if (m - f).abs() > MARGINAL_TOTAL_TOL * m.max(f) {
            return Err(Error::domain(format!("male total {m} and female total {f} differ")));
        }
        Ok(Marginals { male, female })
    }

    pub fn total(&self) -> f64 {
        self.male.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.male.len()
    }
}

/// Row sums (male) and column sums (female).
pub fn extract_marginals(table: &ContingencyTable) -> Marginals {
    let k = table.k();
    let male = table.counts.chunks(k).map(|r| r.iter().sum()).collect();
    let female = (0..k).map(|j| (0..k).map(|i| table.get(i, j)).sum()).collect();
    Marginals { male, female }
}

/// Share of couples on the diagonal (both partners at the same level).
pub fn homogamy_share(table: &ContingencyTable) -> Result<f64> {
    let total = table.require_positive_total()?;
    let diagonal: f64 = (0..table.k()).map(|i| table.get(i, i)).sum();
    Ok(diagonal / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(rows: Vec<Vec<f64>>) -> ContingencyTable {
        ContingencyTable::unlabelled(rows).unwrap()
    }

    #[test]
    fn share_examples() {
        let s = homogamy_share(&t(vec![vec![4.0, 1.0, 0.0], vec![1.0, 6.0, 2.0], vec![0.0, 2.0, 4.0]])).unwrap();
        assert!((s - 0.70).abs() < 1e-15);
        assert_eq!(homogamy_share(&t(vec![vec![5.0, 0.0], vec![0.0, 5.0]])).unwrap(), 1.0);
        assert_eq!(homogamy_share(&t(vec![vec![1.0, 1.0], vec![1.0, 1.0]])).unwrap(), 0.5);
    }

    #[test]
    fn empty_table_share_is_error() {
        let z = t(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(homogamy_share(&z), Err(Error::Domain(_))));
    }

    #[test]
    fn marginal_examples() {
        let m = extract_marginals(&t(vec![vec![4.0, 1.0], vec![1.0, 4.0]]));
        assert_eq!((m.male, m.female), (vec![5.0, 5.0], vec![5.0, 5.0]));
        let m = extract_marginals(&t(vec![vec![2.0, 0.0], vec![0.0, 0.0]]));
        assert_eq!((m.male, m.female), (vec![2.0, 0.0], vec![2.0, 0.0]));
        let m = extract_marginals(&t(vec![vec![1.0, 2.0], vec![3.0, 4.0]]));
        assert_eq!((m.male, m.female), (vec![3.0, 7.0], vec![4.0, 6.0]));
    }

    #[test]
    fn table_validation() {
        assert!(ContingencyTable::unlabelled(vec![vec![1.0]]).is_err());
        assert!(ContingencyTable::unlabelled(vec![vec![1.0, -1.0], vec![1.0, 1.0]]).is_err());
        assert!(ContingencyTable::unlabelled(vec![vec![1.0, f64::NAN], vec![1.0, 1.0]]).is_err());
        assert!(ContingencyTable::unlabelled(vec![vec![1.0, 1.0], vec![1.0]]).is_err());
        assert!(ContingencyTable::new(vec!["a", "a"], vec![vec![1.0; 2]; 2]).is_err());
    }

    #[test]
    fn marginals_need_equal_totals() {
        assert!(Marginals::new(vec![1.0, 2.0], vec![2.0, 1.0]).is_ok());
        assert!(Marginals::new(vec![1.0, 2.0], vec![2.0, 2.0]).is_err());
        assert!(Marginals::new(vec![1.0, 2.0], vec![3.0]).is_err());
    }
}
