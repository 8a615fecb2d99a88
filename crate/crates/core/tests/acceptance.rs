//! Acceptance criteria. Runs as a plain binary (`harness = false`) so every
//! criterion prints one PASS/FAIL line.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pathdecomp::cli::{decompose_panel, Horizon, RunConfig};
use pathdecomp::ingest::WavePanel;
use pathdecomp::market::{
    counterfactual_table, decompose_homogamy_change, extract_association, extract_marginals, long_horizon_decompose,
    odds_ratio, ContingencyTable, Marginals, OddsRatioIpf, Period, SchemeName,
};
use pathdecomp::{
    interaction_term, path_independent_decompose, sequential_decompose, shapley_decompose, Assignment, FactorScenario,
    Scheme,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Outputs = (Vec<u8>, Vec<u8>, Vec<u8>);
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_close(a: f64, b: f64, rel: f64, scale: f64) -> bool {
    (a - b).abs() <= rel * scale.max(a.abs()).max(b.abs())
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

/// 1. Scheme algebra on random two-factor cubic scenarios.
fn scheme_algebra() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let coef: Vec<f64> = (0..10).map(|_| rng.random_range(-5.0..5.0)).collect();
        let x = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let y = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let f = |a: &Assignment<'_, f64>| {
            let (x, y) = (*a.value(0), *a.value(1));
            let mut k = 0;
            let mut acc = 0.0;
            for i in 0..=3 {
                for j in 0..=(3 - i) {
                    acc += coef[k] * x.powi(i) * y.powi(j);
                    k += 1;
                }
            }
            acc
        };
        let s = FactorScenario::new([("x", x.0, x.1), ("y", y.0, y.1)]).unwrap();
        let xy = sequential_decompose(&f, &s, &["x", "y"]).map_err(|e| e.to_string())?;
        let yx = sequential_decompose(&f, &s, &["y", "x"]).map_err(|e| e.to_string())?;
        let pi = path_independent_decompose(&f, &s).map_err(|e| e.to_string())?;
        let sh = shapley_decompose(&f, &s).map_err(|e| e.to_string())?;
        for r in [&xy, &yx, &pi, &sh] {
            ensure(r.adds_up(1e-12), || {
                format!("case {case} {}: residual {}", r.scheme, r.residual())
            })?;
        }
        let inter = interaction_term(&f, &s).map_err(|e| e.to_string())?;
        let gap = yx.component("x").unwrap() - xy.component("x").unwrap();
        ensure(gap == inter, || {
            format!("case {case}: interaction identity {gap} != {inter}")
        })?;
        ensure(pi.interaction == inter, || {
            format!("case {case}: path-independent interaction differs")
        })?;
        for name in ["x", "y"] {
            let want = pi.component(name).unwrap() + pi.interaction / 2.0;
            let got = sh.component(name).unwrap();
            ensure(rel_close(got, want, 1e-12, pi.scale()), || {
                format!("case {case}: shapley {name} {got} vs {want}")
            })?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1), "1000 scenarios")?;
    Ok(format!("1000 scenarios, 4 schemes, {elapsed:.2?}"))
}

/// 2. The x·y canonical case, exact.
fn canonical_product() -> Check {
    let s = FactorScenario::new([("x", 1.0, 2.0), ("y", 3.0, 5.0)]).unwrap();
    let f = |a: &Assignment<'_, f64>| a.value(0) * a.value(1);
    let pair = |r: &pathdecomp::DecompositionResult| (r.component("x").unwrap(), r.component("y").unwrap());
    let xy = sequential_decompose(&f, &s, &["x", "y"]).unwrap();
    let yx = sequential_decompose(&f, &s, &["y", "x"]).unwrap();
    let pi = path_independent_decompose(&f, &s).unwrap();
    let sh = shapley_decompose(&f, &s).unwrap();
    ensure(pair(&xy) == (3.0, 4.0), || format!("sequential (x,y) {:?}", pair(&xy)))?;
    ensure(pair(&yx) == (5.0, 2.0), || format!("sequential (y,x) {:?}", pair(&yx)))?;
    ensure(pair(&pi) == (3.0, 2.0) && pi.interaction == 2.0, || {
        format!("path-independent {:?} + {}", pair(&pi), pi.interaction)
    })?;
    ensure(pair(&sh) == (4.0, 3.0), || format!("shapley {:?}", pair(&sh)))?;
    Ok("(3,4) (5,2) (3,2)+2 (4,3)".into())
}

/// 3. IPF marginal fit, odds-ratio preservation and fixed point.
fn ipf_properties() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..500 {
        let k = rng.random_range(2..=4);
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..k).map(|_| rng.random_range(0.1..100.0)).collect())
            .collect();
        let seed = ContingencyTable::unlabelled(rows).unwrap();
        let male: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..50.0)).collect();
        let female: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..50.0)).collect();
        let (sm, sf): (f64, f64) = (male.iter().sum(), female.iter().sum());
        let female: Vec<f64> = female.iter().map(|v| v * sm / sf).collect();
        let targets = Marginals::new(male, female).unwrap();

        let a = extract_association(&seed, 0.0).unwrap();
        let fit = counterfactual_table(&a, &targets, 1e-10, 10_000).map_err(|e| format!("case {case}: {e}"))?;
        let got = extract_marginals(&fit);
        let total = targets.total();
        for (g, w) in got
            .male
            .iter()
            .zip(&targets.male)
            .chain(got.female.iter().zip(&targets.female))
        {
            ensure((g - w).abs() <= 1e-10 * total, || {
                format!("case {case}: marginal {g} vs {w}")
            })?;
        }
        for i in 0..k {
            for j in i + 1..k {
                for c in 0..k {
                    for d in c + 1..k {
                        let o_fit = odds_ratio(fit.counts(), k, (i, j), (c, d));
                        let o_seed = odds_ratio(seed.counts(), k, (i, j), (c, d));
                        ensure((o_fit - o_seed).abs() <= 1e-8 * o_seed, || {
                            format!("case {case}: odds ratio {o_fit} vs {o_seed}")
                        })?;
                    }
                }
            }
        }
        let same = counterfactual_table(&a, &extract_marginals(&seed), 1e-10, 10_000).unwrap();
        for (g, w) in same.counts().iter().zip(seed.counts()) {
            ensure((g - w).abs() <= 1e-8 * w, || {
                format!("case {case}: fixed point {g} vs {w}")
            })?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5), "500 fits")?;
    Ok(format!("500 tables, K in 2..=4, {elapsed:.2?}"))
}

/// 4. Closed-form 2×2 scenario against the quadratic oracle.
fn closed_form_scenario() -> Check {
    // oracle first, from odds ratios and margins alone
    let or0 = 40.0 * 40.0 / (10.0 * 10.0);
    let or1 = 55.397 * 15.397 / (14.603 * 14.603);
    let f00 = common::quadratic_2x2_share(or0, 50.0, 50.0, 100.0);
    let f10 = common::quadratic_2x2_share(or1, 50.0, 50.0, 100.0);
    let f01 = common::quadratic_2x2_share(or0, 70.0, 70.0, 100.0);
    let f11 = common::quadratic_2x2_share(or1, 70.0, 70.0, 100.0);
    let oracle = [
        ("preference", f10 - f00, -0.1333),
        ("availability", f01 - f00, 0.0208),
        ("interaction", f11 - f10 - f01 + f00, 0.0204),
        ("total", f11 - f00, -0.0921),
    ];

    let t0 = ContingencyTable::unlabelled(vec![vec![40.0, 10.0], vec![10.0, 40.0]]).unwrap();
    let t1 = ContingencyTable::unlabelled(vec![vec![55.397, 14.603], vec![14.603, 15.397]]).unwrap();
    let model = OddsRatioIpf::default();
    let period = Period::new(1980, 1990);
    let pi =
        decompose_homogamy_change(&t0, &t1, period, &Scheme::PathIndependent, &model).map_err(|e| e.to_string())?;
    for ((name, got), (_, want, stated)) in pi.components().iter().zip(oracle) {
        ensure((got - want).abs() <= 2e-3 && (got - stated).abs() <= 2e-3, || {
            format!("{name}: got {got}, oracle {want}, expected {stated}")
        })?;
    }
    let yx = decompose_homogamy_change(&t0, &t1, period, &SchemeName::SequentialYx.scheme(), &model)
        .map_err(|e| e.to_string())?;
    ensure(
        (yx.preference - (f11 - f01)).abs() <= 2e-3 && (yx.preference + 0.1128).abs() <= 2e-3,
        || format!("availability-first preference {}", yx.preference),
    )?;
    Ok(format!(
        "pref {:+.4} avail {:+.4} inter {:+.4} total {:+.4}; availability-first pref {:+.4}",
        pi.preference, pi.availability, pi.interaction, pi.total, yx.preference
    ))
}

/// 5. A wave pair where attributing the interaction flips the preference sign.
fn sign_flip() -> Check {
    let case = common::find_sign_flip().ok_or("grid search found no qualifying pair")?;
    let (r0, r1) = case.tables();
    let t0 = ContingencyTable::unlabelled(r0).unwrap();
    let t1 = ContingencyTable::unlabelled(r1).unwrap();
    let model = OddsRatioIpf::default();
    let period = Period::new(1977, 1992);
    let pi =
        decompose_homogamy_change(&t0, &t1, period, &Scheme::PathIndependent, &model).map_err(|e| e.to_string())?;
    let yx = decompose_homogamy_change(&t0, &t1, period, &SchemeName::SequentialYx.scheme(), &model)
        .map_err(|e| e.to_string())?;
    ensure((pi.preference - case.preference()).abs() < 1e-8, || {
        format!("preference {} vs oracle {}", pi.preference, case.preference())
    })?;
    ensure(pi.preference * pi.interaction < 0.0, || {
        format!(
            "preference {} and interaction {} share a sign",
            pi.preference, pi.interaction
        )
    })?;
    ensure(pi.interaction.abs() >= 0.9 * pi.preference.abs(), || {
        format!("|interaction| {} < 0.9 |preference| {}", pi.interaction, pi.preference)
    })?;
    ensure(yx.preference * pi.preference < 0.0, || {
        format!(
            "availability-first preference {} keeps the sign of {}",
            yx.preference, pi.preference
        )
    })?;

    // the closed-form scenario: preference magnitude exceeds the total change
    let c0 = ContingencyTable::unlabelled(vec![vec![40.0, 10.0], vec![10.0, 40.0]]).unwrap();
    let c1 = ContingencyTable::unlabelled(vec![vec![55.397, 14.603], vec![14.603, 15.397]]).unwrap();
    let cf = decompose_homogamy_change(&c0, &c1, period, &Scheme::PathIndependent, &model).unwrap();
    ensure(cf.preference < 0.0 && cf.preference.abs() > cf.total.abs(), || {
        format!("closed-form preference {} vs total {}", cf.preference, cf.total)
    })?;
    Ok(format!(
        "3x3 pair: preference {:+.4}, interaction {:+.4}, availability-first preference {:+.4}",
        pi.preference, pi.interaction, yx.preference
    ))
}

/// 6. Long-horizon components are sums of the short-horizon ones.
fn long_horizon_rule() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let model = OddsRatioIpf::default();
    let levels: Vec<String> = ["low", "mid", "high"].iter().map(|s| s.to_string()).collect();
    for panel_no in 0..20 {
        let n_waves = rng.random_range(3..=6);
        let tables: Vec<ContingencyTable> = (0..n_waves)
            .map(|_| {
                let rows = (0..3)
                    .map(|_| (0..3).map(|_| rng.random_range(0.5..60.0)).collect())
                    .collect();
                ContingencyTable::new(levels.clone(), rows).unwrap()
            })
            .collect();
        let waves: Vec<i32> = (0..n_waves as i32).map(|i| 1970 + 10 * i).collect();
        for name in SchemeName::ALL {
            let short: Vec<_> = (1..n_waves)
                .map(|i| {
                    decompose_homogamy_change(
                        &tables[i - 1],
                        &tables[i],
                        Period::new(waves[i - 1], waves[i]),
                        &name.scheme(),
                        &model,
                    )
                    .unwrap()
                })
                .collect();
            let long = long_horizon_decompose(&short).map_err(|e| e.to_string())?;
            let sum = |get: fn(&pathdecomp::market::HomogamyDecomposition) -> f64| {
                short.iter().skip(1).fold(get(&short[0]), |acc, d| acc + get(d))
            };
            ensure(
                long.preference == sum(|d| d.preference)
                    && long.availability == sum(|d| d.availability)
                    && long.interaction == sum(|d| d.interaction)
                    && long.total == sum(|d| d.total),
                || format!("panel {panel_no} {name}: long-horizon differs from the sum"),
            )?;
        }

        // same rule at the CLI layer
        let panel = WavePanel {
            levels: levels.clone(),
            entries: waves
                .iter()
                .zip(&tables)
                .map(|(w, t)| (("XX".to_string(), *w), t.clone()))
                .collect(),
        };
        let mut cfg = RunConfig::resolve(Default::default()).unwrap();
        cfg.horizon = Horizon::Both;
        cfg.schemes = SchemeName::ALL.to_vec();
        let rows = decompose_panel(&panel, &cfg).map_err(|e| e.to_string())?;
        let long_period = format!("{}-{}", waves[0], waves[n_waves - 1]);
        for r in rows.iter().filter(|r| r.period == long_period) {
            let mut short: Vec<_> = rows
                .iter()
                .filter(|s| s.period != long_period && s.scheme == r.scheme && s.component == r.component)
                .collect();
            short.sort_by(|a, b| a.period.cmp(&b.period));
            let total = short.iter().skip(1).fold(short[0].value, |acc, s| acc + s.value);
            ensure(total == r.value && short.len() == n_waves - 1, || {
                format!("panel {panel_no}: CLI long row {r:?} vs sum {total}")
            })?;
        }
    }
    Ok("20 random panels of 3-6 waves, all schemes".into())
}

/// 7. Microdata → tabulate → decompose → report through the binary.
fn end_to_end_cli() -> Check {
    let micro = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/microdata.csv");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run_once = |tag: &str| -> Result<Outputs, String> {
        let tables = dir.path().join(format!("tables-{tag}.csv"));
        let results = dir.path().join(format!("results-{tag}.csv"));
        let report = dir.path().join(format!("report-{tag}.csv"));
        let steps: [Vec<&str>; 3] = [
            vec![
                "tabulate",
                "--input",
                micro.to_str().unwrap(),
                "--output",
                tables.to_str().unwrap(),
            ],
            vec![
                "decompose",
                "--input",
                tables.to_str().unwrap(),
                "--scheme",
                "all",
                "--horizon",
                "both",
                "--output",
                results.to_str().unwrap(),
            ],
            vec![
                "report",
                "--input",
                results.to_str().unwrap(),
                "--output",
                report.to_str().unwrap(),
            ],
        ];
        for args in steps {
            let o = Command::new(env!("CARGO_BIN_EXE_pathdecomp"))
                .args(&args)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(o.status.success(), || {
                format!("{} failed: {}", args[0], String::from_utf8_lossy(&o.stderr))
            })?;
        }
        let read = |p: &Path| std::fs::read(p).map_err(|e| e.to_string());
        Ok((read(&tables)?, read(&results)?, read(&report)?))
    };
    let start = Instant::now();
    let first = run_once("a")?;
    let elapsed = start.elapsed();
    let second = run_once("b")?;
    ensure(first == second, || "outputs differ between runs".into())?;
    within(elapsed, Duration::from_secs(2), "pipeline")?;

    let results = String::from_utf8(first.1).unwrap();
    let rows: Vec<Vec<&str>> = results.lines().skip(1).map(|l| l.split(',').collect()).collect();
    // 2 countries x (3 short + 1 long) periods x 4 schemes x 4 components
    ensure(rows.len() == 2 * 4 * 4 * 4, || format!("{} result rows", rows.len()))?;
    let mut sums = std::collections::BTreeMap::<(&str, &str, &str), [f64; 2]>::new();
    for r in &rows {
        let v: f64 = r[4].parse().unwrap();
        let e = sums.entry((r[0], r[1], r[2])).or_default();
        if r[3] == "total" {
            e[1] = v;
        } else {
            e[0] += v;
        }
    }
    for (key, [parts, total]) in &sums {
        ensure((parts - total).abs() <= 1e-9, || {
            format!("{key:?}: parts {parts} vs total {total}")
        })?;
    }
    Ok(format!(
        "200 couples, 2 countries x 4 waves, byte-identical reruns, {elapsed:.2?}"
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 scheme algebra", scheme_algebra),
        ("2 canonical x*y case", canonical_product),
        ("3 IPF fit/odds ratios/fixed point", ipf_properties),
        ("4 closed-form decomposition", closed_form_scenario),
        ("5 sign-flip demonstration", sign_flip),
        ("6 long-horizon rule", long_horizon_rule),
        ("7 end-to-end CLI", end_to_end_cli),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
