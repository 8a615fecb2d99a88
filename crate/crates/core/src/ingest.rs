//! Couple-level microdata → per-(country, wave) contingency tables.
//!
//! Microdata CSV header: `country,wave_year,male_age,male_edu,female_edu[,weight]`.
//! Aggregated-table CSV header: `country,wave_year,male_edu,female_edu,count`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::market::ContingencyTable;

pub const DEFAULT_LEVELS: [&str; 3] = ["below-high-school", "high-school", "college-plus"];

/// Example collapsing map; real extracts need a map matched to their coding.
pub const DEFAULT_EDU_MAP: [(&str, &str); 6] = [
    ("LHS", "below-high-school"),
    ("HS", "high-school"),
    ("COL", "college-plus"),
    ("below-high-school", "below-high-school"),
    ("high-school", "high-school"),
    ("college-plus", "college-plus"),
];

const MICRODATA_COLUMNS: [&str; 5] = ["country", "wave_year", "male_age", "male_edu", "female_edu"];
const TABLE_COLUMNS: [&str; 5] = ["country", "wave_year", "male_edu", "female_edu", "count"];

#[derive(Debug, Clone, PartialEq)]
pub struct CoupleRecord {
    pub country: String,
    pub wave_year: i32,
    pub male_age: u32,
    pub male_edu: String,
    pub female_edu: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabulationConfig {
    pub age_min: u32,
    pub age_max: u32,
    /// Raw education code → level label.
    pub edu_map: BTreeMap<String, String>,
    pub levels: Vec<String>,
    /// Empty means every country.
    pub countries: BTreeSet<String>,
    /// Empty means every wave.
    pub waves: BTreeSet<i32>,
    /// Abort on malformed rows and on unmapped education codes.
    pub strict: bool,
}

impl Default for TabulationConfig {
    fn default() -> Self {
        TabulationConfig {
            age_min: 30,
            age_max: 34,
            edu_map: DEFAULT_EDU_MAP
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            levels: DEFAULT_LEVELS.iter().map(|s| s.to_string()).collect(),
            countries: BTreeSet::new(),
            waves: BTreeSet::new(),
            strict: false,
        }
    }
}

impl TabulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.age_min > self.age_max {
            return Err(Error::domain(format!(
                "age_min {} exceeds age_max {}",
                self.age_min, self.age_max
            )));
        }
        if self.levels.len() < 2 {
            return Err(Error::domain("at least two education levels are required"));
        }
        if let Some((code, level)) = self.edu_map.iter().find(|(_, l)| !self.levels.contains(l)) {
            return Err(Error::domain(format!(
                "education code {code:?} maps to unknown level {level:?}"
            )));
        }
        Ok(())
    }

    /// Reads a `code,level` CSV. Levels are ordered by first appearance.
    pub fn with_edu_map_csv<R: Read>(mut self, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let code_col = column(&headers, "code")?;
        let level_col = column(&headers, "level")?;
        let mut map = BTreeMap::new();
        let mut levels: Vec<String> = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let (code, level) = (&row[code_col], &row[level_col]);
            if !levels.iter().any(|l| l == level) {
                levels.push(level.to_string());
            }
            map.insert(code.to_string(), level.to_string());
        }
        self.edu_map = map;
        self.levels = levels;
        self.validate()?;
        Ok(self)
    }

    fn level_index(&self, code: &str) -> Option<usize> {
        let level = self.edu_map.get(code)?;
        self.levels.iter().position(|l| l == level)
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Format(format!("missing column {name:?}")))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedMicrodata {
    pub records: Vec<CoupleRecord>,
    /// Rejected rows (non-strict mode only).
    pub row_errors: Vec<RowError>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

impl From<RowError> for Error {
    fn from(e: RowError) -> Self {
        Error::Row {
            line: e.line,
            message: e.message,
        }
    }
}

/// Parses microdata CSV. Malformed rows are collected with their line
/// number, or abort the parse when `strict` is set.
pub fn parse_microdata<R: Read>(reader: R, strict: bool) -> Result<ParsedMicrodata> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols: Vec<usize> = MICRODATA_COLUMNS
        .iter()
        .map(|c| column(&headers, c))
        .collect::<Result<_>>()?;
    let weight_col = headers.iter().position(|h| h == "weight");

    let mut out = ParsedMicrodata::default();
    let mut row = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut row)?;
        if !more {
            break;
        }
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row, &cols, weight_col) {
            Ok(rec) => out.records.push(rec),
            Err(message) => {
                let err = RowError { line, message };
                if strict {
                    return Err(err.into());
                }
                out.row_errors.push(err);
            }
        }
    }
    if out.records.is_empty() && out.row_errors.is_empty() {
        out.warnings.push("input contains no data rows".to_string());
    }
    Ok(out)
}

fn parse_row(row: &csv::StringRecord, cols: &[usize], weight_col: Option<usize>) -> Result<CoupleRecord, String> {
    let field = |i: usize| row.get(i).ok_or_else(|| format!("missing field {}", i + 1));
    let country = field(cols[0])?;
    if country.is_empty() {
        return Err("empty country".into());
    }
    let wave_year: i32 = field(cols[1])?
        .parse()
        .map_err(|_| format!("wave_year {:?} is not an integer", field(cols[1]).unwrap_or("")))?;
    if !(1900..=2100).contains(&wave_year) {
        return Err(format!("wave_year {wave_year} outside 1900..=2100"));
    }
    let raw_age = field(cols[2])?;
    let male_age: u32 = raw_age
        .parse()
        .map_err(|_| format!("male_age {raw_age:?} is not an integer"))?;
    if !(15..=99).contains(&male_age) {
        return Err(format!("male_age {male_age} outside 15..=99"));
    }
    let weight = match weight_col.map(|c| row.get(c).unwrap_or("")) {
        None | Some("") => 1.0,
        Some(raw) => {
            let w: f64 = raw.parse().map_err(|_| format!("weight {raw:?} is not a number"))?;
            if !(w.is_finite() && w >= 0.0) {
                return Err(format!("weight {raw} must be finite and nonnegative"));
            }
            w
        }
    };
    Ok(CoupleRecord {
        country: country.to_string(),
        wave_year,
        male_age,
        male_edu: field(cols[3])?.to_string(),
        female_edu: field(cols[4])?.to_string(),
        weight,
    })
}

/// Tables keyed by (country, wave); waves of one country come out ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePanel {
    pub levels: Vec<String>,
    pub entries: BTreeMap<(String, i32), ContingencyTable>,
}

impl WavePanel {
    pub fn countries(&self) -> BTreeSet<&str> {
        self.entries.keys().map(|(c, _)| c.as_str()).collect()
    }

    /// `(wave, table)` pairs of one country, ascending by wave.
    pub fn waves(&self, country: &str) -> Vec<(i32, &ContingencyTable)> {
        self.entries
            .iter()
            .filter(|((c, _), _)| c == country)
            .map(|((_, w), t)| (*w, t))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TabulationSummary {
    pub records: usize,
    pub kept: usize,
    pub filtered_age: usize,
    pub filtered_country: usize,
    pub filtered_wave: usize,
    pub unmapped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tabulation {
    pub panel: WavePanel,
    pub summary: TabulationSummary,
}

/// Sums record weights into per-(country, wave) tables after filtering on
/// the male partner's age, the country and wave allow-lists and the
/// education map.
pub fn tabulate(records: &[CoupleRecord], cfg: &TabulationConfig) -> Result<Tabulation> {
    cfg.validate()?;
    let k = cfg.levels.len();
    let mut summary = TabulationSummary {
        records: records.len(),
        ..Default::default()
    };
    let mut cells: BTreeMap<(String, i32), Vec<f64>> = BTreeMap::new();
    for rec in records {
        if !cfg.countries.is_empty() && !cfg.countries.contains(&rec.country) {
            summary.filtered_country += 1;
            continue;
        }
        if !cfg.waves.is_empty() && !cfg.waves.contains(&rec.wave_year) {
            summary.filtered_wave += 1;
            continue;
        }
        if !(cfg.age_min..=cfg.age_max).contains(&rec.male_age) {
            summary.filtered_age += 1;
            continue;
        }
        let (Some(m), Some(f)) = (cfg.level_index(&rec.male_edu), cfg.level_index(&rec.female_edu)) else {
            if cfg.strict {
                let code = if cfg.level_index(&rec.male_edu).is_none() {
                    &rec.male_edu
                } else {
                    &rec.female_edu
                };
                return Err(Error::UnmappedCode(code.clone()));
            }
            summary.unmapped += 1;
            continue;
        };
        summary.kept += 1;
        cells
            .entry((rec.country.clone(), rec.wave_year))
            .or_insert_with(|| vec![0.0; k * k])[m * k + f] += rec.weight;
    }
    let mut entries = BTreeMap::new();
    for (key, counts) in cells {
        if counts.iter().sum::<f64>() > 0.0 {
            entries.insert(key, ContingencyTable::from_flat(cfg.levels.clone(), counts)?);
        }
    }
    Ok(Tabulation {
        panel: WavePanel {
            levels: cfg.levels.clone(),
            entries,
        },
        summary,
    })
}

/// Writes one row per occupied cell, sorted by country, wave, then level order.
pub fn write_table_csv<W: Write>(panel: &WavePanel, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(TABLE_COLUMNS)?;
    for ((country, wave), table) in &panel.entries {
        let k = table.k();
        for i in 0..k {
            for j in 0..k {
                let count = table.get(i, j);
                if count > 0.0 {
                    wtr.write_record([
                        country.as_str(),
                        &wave.to_string(),
                        &table.levels()[i],
                        &table.levels()[j],
                        &count.to_string(),
                    ])?;
                }
            }
        }
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads aggregated tables; every education label must be one of `levels`.
pub fn read_table_csv<R: Read>(reader: R, levels: &[String]) -> Result<WavePanel> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols: Vec<usize> = TABLE_COLUMNS
        .iter()
        .map(|c| column(&headers, c))
        .collect::<Result<_>>()?;
    let k = levels.len();
    let level = |label: &str, line: u64| {
        levels.iter().position(|l| l == label).ok_or_else(|| Error::Row {
            line,
            message: format!("unknown education level {label:?}"),
        })
    };
    let mut cells: BTreeMap<(String, i32), Vec<f64>> = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Row { line, message };
        let wave: i32 = row[cols[1]]
            .parse()
            .map_err(|_| bad(format!("wave_year {:?} is not an integer", &row[cols[1]])))?;
        let count: f64 = row[cols[4]]
            .parse()
            .map_err(|_| bad(format!("count {:?} is not a number", &row[cols[4]])))?;
        if !(count.is_finite() && count >= 0.0) {
            return Err(bad(format!("count {count} must be finite and nonnegative")));
        }
        let (m, f) = (level(&row[cols[2]], line)?, level(&row[cols[3]], line)?);
        cells
            .entry((row[cols[0]].to_string(), wave))
            .or_insert_with(|| vec![0.0; k * k])[m * k + f] += count;
    }
    let entries = cells
        .into_iter()
        .map(|(key, counts)| Ok((key, ContingencyTable::from_flat(levels.to_vec(), counts)?)))
        .collect::<Result<_>>()?;
    Ok(WavePanel {
        levels: levels.to_vec(),
        entries,
    })
}
