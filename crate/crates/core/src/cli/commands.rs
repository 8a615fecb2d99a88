use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::Error;
use crate::ingest::{self, WavePanel};
use crate::market::{decompose_homogamy_change, long_horizon_decompose, HomogamyDecomposition, Period, SchemeName};

use super::config::RunConfig;
use super::{CliError, ExitStatus};

const RESULT_COLUMNS: [&str; 5] = ["country", "period", "scheme", "component", "value"];

/// One line of `decompose` output.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub country: String,
    pub period: String,
    pub scheme: SchemeName,
    pub component: String,
    pub value: f64,
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|source| {
        CliError::from(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn with_output<F>(path: Option<&Path>, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    let io_err = |source: io::Error| {
        CliError::from(Error::Io {
            path: path.map_or_else(|| "<stdout>".into(), Path::to_path_buf),
            source,
        })
    };
    match path {
        Some(p) => {
            let mut out = BufWriter::new(File::create(p).map_err(io_err)?);
            write(&mut out)?;
            out.flush().map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write(&mut out)?;
            out.flush().map_err(io_err)
        }
    }
}

fn format_value(v: f64) -> String {
    // no "-0"
    if v == 0.0 {
        "0".to_string()
    } else {
        v.to_string()
    }
}

pub(super) fn tabulate(input: &Path, output: Option<&Path>, cfg: &RunConfig) -> Result<(), CliError> {
    let parsed = ingest::parse_microdata(open(input)?, cfg.tabulation.strict)
        .map_err(|e| CliError::from(e).context(input.display()))?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", input.display());
    }
    for e in &parsed.row_errors {
        eprintln!("{}: line {}: {}", input.display(), e.line, e.message);
    }
    let tab = ingest::tabulate(&parsed.records, &cfg.tabulation)?;
    with_output(output, |w| Ok(ingest::write_table_csv(&tab.panel, w)?))?;
    let s = &tab.summary;
    eprintln!(
        "records read: {}, kept: {}, filtered: {} (age {}, country {}, wave {}), unmapped: {}, row errors: {}, tables: {}",
        s.records,
        s.kept,
        s.filtered_age + s.filtered_country + s.filtered_wave,
        s.filtered_age,
        s.filtered_country,
        s.filtered_wave,
        s.unmapped,
        parsed.row_errors.len(),
        tab.panel.entries.len()
    );
    Ok(())
}

pub(super) fn decompose(input: &Path, output: Option<&Path>, cfg: &RunConfig) -> Result<(), CliError> {
    let panel = ingest::read_table_csv(open(input)?, &cfg.tabulation.levels)
        .map_err(|e| CliError::from(e).context(input.display()))?;
    let rows = decompose_panel(&panel, cfg)?;
    with_output(output, |w| write_results(&rows, w))
}

/// Short- and/or long-horizon decompositions of every country in `panel`,
/// sorted by country, period, component and scheme.
pub fn decompose_panel(panel: &WavePanel, cfg: &RunConfig) -> Result<Vec<ResultRow>, CliError> {
    let countries: Vec<String> = if cfg.tabulation.countries.is_empty() {
        panel.countries().into_iter().map(String::from).collect()
    } else {
        cfg.tabulation.countries.iter().cloned().collect()
    };
    let mut rows = Vec::new();
    for country in &countries {
        let waves: Vec<_> = panel
            .waves(country)
            .into_iter()
            .filter(|(w, _)| cfg.tabulation.waves.is_empty() || cfg.tabulation.waves.contains(w))
            .collect();
        if waves.len() < 2 {
            return Err(CliError::new(
                ExitStatus::Data,
                format!("country {country}: need at least two waves, found {}", waves.len()),
            ));
        }
        for &scheme in &cfg.schemes {
            let mut short = Vec::with_capacity(waves.len() - 1);
            for pair in waves.windows(2) {
                let ((w0, t0), (w1, t1)) = (pair[0], pair[1]);
                let period = Period::new(w0, w1);
                let d = decompose_homogamy_change(t0, t1, period, &scheme.scheme(), &cfg.model)
                    .map_err(|e| CliError::from(e).context(format_args!("country {country} period {period}")))?;
                short.push(d);
            }
            if cfg.horizon.short() {
                push_rows(&mut rows, country, scheme, &short);
            }
            if cfg.horizon.long() && !(cfg.horizon.short() && short.len() == 1) {
                let long = long_horizon_decompose(&short)?;
                push_rows(&mut rows, country, scheme, std::slice::from_ref(&long));
            }
        }
    }
    rows.sort_by(|a, b| {
        (&a.country, &a.period, &a.component, a.scheme).cmp(&(&b.country, &b.period, &b.component, b.scheme))
    });
    Ok(rows)
}

fn push_rows(rows: &mut Vec<ResultRow>, country: &str, scheme: SchemeName, decomps: &[HomogamyDecomposition]) {
    for d in decomps {
        for (component, value) in d.components() {
            rows.push(ResultRow {
                country: country.to_string(),
                period: d.period.to_string(),
                scheme,
                component: component.to_string(),
                value,
            });
        }
    }
}

fn write_results(rows: &[ResultRow], w: &mut dyn Write) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(RESULT_COLUMNS).map_err(Error::from)?;
    for r in rows {
        wtr.write_record([
            r.country.as_str(),
            &r.period,
            r.scheme.as_str(),
            &r.component,
            &format_value(r.value),
        ])
        .map_err(Error::from)?;
    }
    wtr.flush().map_err(|e| Error::from(csv::Error::from(e)))?;
    Ok(())
}

pub(super) fn read_results<R: Read>(reader: R) -> Result<Vec<ResultRow>, Error> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != RESULT_COLUMNS {
        return Err(Error::Format(format!(
            "expected header {}, got {}",
            RESULT_COLUMNS.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Row { line, message };
        let scheme = rec[2].parse::<SchemeName>().map_err(|e| bad(e.to_string()))?;
        let value: f64 = rec[4]
            .parse()
            .map_err(|_| bad(format!("value {:?} is not a number", &rec[4])))?;
        rows.push(ResultRow {
            country: rec[0].to_string(),
            period: rec[1].to_string(),
            scheme,
            component: rec[3].to_string(),
            value,
        });
    }
    Ok(rows)
}

pub(super) fn report_files(inputs: &[std::path::PathBuf], output: Option<&Path>) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for path in inputs {
        rows.extend(read_results(open(path)?).map_err(|e| CliError::from(e).context(path.display()))?);
    }
    let (schemes, report) = report(&rows)?;
    with_output(output, |w| write_report(&schemes, &report, w))
}

/// One line of the scheme comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub country: String,
    pub period: String,
    pub component: String,
    /// One value per scheme column.
    pub values: Vec<f64>,
    pub max_abs_gap: f64,
    /// Some scheme is strictly positive while another is strictly negative.
    pub sign_flip: bool,
}

/// Pivots results to one row per (country, period, component) with a
/// column per scheme.
pub fn report(rows: &[ResultRow]) -> Result<(Vec<SchemeName>, Vec<ReportRow>), CliError> {
    let data_err = |m: String| CliError::new(ExitStatus::Data, m);
    let schemes: Vec<SchemeName> = rows
        .iter()
        .map(|r| r.scheme)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if schemes.is_empty() {
        return Err(data_err("no decomposition results to report".into()));
    }

    let mut periods: BTreeMap<SchemeName, BTreeSet<(&str, &str)>> = BTreeMap::new();
    let mut cells: BTreeMap<(&str, &str, &str), BTreeMap<SchemeName, f64>> = BTreeMap::new();
    for r in rows {
        periods.entry(r.scheme).or_default().insert((&r.country, &r.period));
        let slot = cells.entry((&r.country, &r.period, &r.component)).or_default();
        if slot.insert(r.scheme, r.value).is_some() {
            return Err(data_err(format!(
                "duplicate result for {} {} {} under {}",
                r.country, r.period, r.component, r.scheme
            )));
        }
    }
    let reference = &periods[&schemes[0]];
    for (scheme, set) in &periods {
        if set != reference {
            return Err(data_err(format!(
                "schemes {} and {scheme} cover different country/period sets",
                schemes[0]
            )));
        }
    }

    let mut out = Vec::with_capacity(cells.len());
    for ((country, period, component), by_scheme) in cells {
        let values = schemes
            .iter()
            .map(|s| {
                by_scheme
                    .get(s)
                    .copied()
                    .ok_or_else(|| data_err(format!("{country} {period} {component}: missing value under {s}")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(ReportRow {
            country: country.to_string(),
            period: period.to_string(),
            component: component.to_string(),
            max_abs_gap: max - min,
            sign_flip: max > 0.0 && min < 0.0,
            values,
        });
    }
    Ok((schemes, out))
}

fn write_report(schemes: &[SchemeName], rows: &[ReportRow], w: &mut dyn Write) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["country", "period", "component"];
    header.extend(schemes.iter().map(|s| s.as_str()));
    header.extend(["max_abs_gap", "sign_flip"]);
    wtr.write_record(&header).map_err(Error::from)?;
    for r in rows {
        let mut rec = vec![r.country.clone(), r.period.clone(), r.component.clone()];
        rec.extend(r.values.iter().map(|&v| format_value(v)));
        rec.push(format_value(r.max_abs_gap));
        rec.push(r.sign_flip.to_string());
        wtr.write_record(&rec).map_err(Error::from)?;
    }
    wtr.flush().map_err(|e| Error::from(csv::Error::from(e)))?;
    Ok(())
}
