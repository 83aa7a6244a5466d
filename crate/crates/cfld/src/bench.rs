//! Benchmark sweeps over (fixed cost, competitor count, seed) grids and the
//! plot-ready CSV series derived from them.
//!
//! A sweep generates one instance per grid cell and runs every requested
//! method on it, emitting one record per (instance, method). Failures are
//! recorded in the row's status column and never abort the sweep. Cells may
//! run in parallel; the final sort imposes the output order, so parallelism
//! never changes the bytes (timing columns aside).
//!
//! CSV rendering is byte-deterministic given the records: stable sort by
//! (I, f, K, seed, method), fixed column order, floats at six significant
//! digits and CPU seconds at 0.1 s granularity.

use std::time::Instant;

use crate::exec::{map_collect, ExecMode};
use crate::extsolver::AdapterConfig;
use crate::instancegen::{generate, GenConfig};
use crate::model::{profit, DerivedCoefficients, Instance};
use crate::{bnb, extsolver, formulations, oa, oracle};

/// Solution method of one benchmark cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Bnb,
    OaExhaustive,
    OaBnb,
    OaExternal,
    ExternalMilp,
    ExternalMicqp,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bnb => "bnb",
            Method::OaExhaustive => "oa-exhaustive",
            Method::OaBnb => "oa-bnb",
            Method::OaExternal => "oa-external",
            Method::ExternalMilp => "external-milp",
            Method::ExternalMicqp => "external-micqp",
            Method::Oracle => "oracle",
        }
    }

    pub fn parse(text: &str) -> Option<Method> {
        Some(match text {
            "bnb" => Method::Bnb,
            "oa-exhaustive" => Method::OaExhaustive,
            "oa-bnb" => Method::OaBnb,
            "oa-external" => Method::OaExternal,
            "external-milp" => Method::ExternalMilp,
            "external-micqp" => Method::ExternalMicqp,
            "oracle" => Method::Oracle,
            _ => return None,
        })
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Grid description for [`run_sweep`].
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SweepConfig {
    pub zones: usize,
    /// Defaults to `zones`, matching the usual experimental design.
    #[serde(default)]
    pub candidates: Option<usize>,
    pub fixed_costs: Vec<f64>,
    pub competitors: Vec<usize>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    #[serde(default = "default_levels")]
    pub level_values: Vec<f64>,
    #[serde(default = "default_multiplier")]
    pub level_cost_multiplier: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_node_cap")]
    pub node_cap: usize,
    #[serde(default = "default_oracle_cap")]
    pub oracle_cap: u128,
    #[serde(default = "default_oa_iterations")]
    pub oa_max_iterations: usize,
    #[serde(default = "default_time_limit")]
    pub time_limit_secs: f64,
    /// External-solver description; methods that need one are skipped without it.
    #[serde(default)]
    pub adapter: Option<AdapterConfig>,
}

fn default_levels() -> Vec<f64> {
    vec![100.0, 300.0, 500.0, 700.0, 900.0]
}

fn default_multiplier() -> f64 {
    2.0
}

fn default_rel_tol() -> f64 {
    1e-6
}

fn default_node_cap() -> usize {
    1_000_000
}

fn default_oracle_cap() -> u128 {
    crate::oracle::DEFAULT_ENUMERATION_CAP
}

fn default_oa_iterations() -> usize {
    100
}

fn default_time_limit() -> f64 {
    600.0
}

impl SweepConfig {
    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::error::CfldError::Parse {
            path: "sweep config".into(),
            detail: e.to_string(),
        })
    }
}

/// One benchmark row.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BenchRecord {
    pub zones: usize,
    pub candidates: usize,
    pub levels: usize,
    pub competitors: usize,
    pub fixed_cost: f64,
    pub seed: u64,
    pub method: Method,
    pub cpu_seconds: f64,
    /// Certified profit, in thousands of currency units.
    pub profit_thousands: Option<f64>,
    pub open_count: Option<usize>,
    /// False whenever a cap was hit or the run failed.
    pub proven: bool,
    /// Master-solve count; OA methods only.
    pub iterations: Option<usize>,
    /// "ok", "skipped: …" or "error: …".
    pub status: String,
}

/// Run every (fixed cost, competitors, seed) × method cell of the grid.
pub fn run_sweep(config: &SweepConfig, mode: ExecMode) -> Vec<BenchRecord> {
    let mut cells = Vec::new();
    for &fixed_cost in &config.fixed_costs {
        for &competitors in &config.competitors {
            for &seed in &config.seeds {
                for &method in &config.methods {
                    cells.push((fixed_cost, competitors, seed, method));
                }
            }
        }
    }
    let mut records = map_collect(mode, cells, |(fixed_cost, competitors, seed, method)| {
        run_cell(config, fixed_cost, competitors, seed, method)
    });
    sort_records(&mut records);
    records
}

fn sort_records(records: &mut [BenchRecord]) {
    records.sort_by(|a, b| {
        a.zones
            .cmp(&b.zones)
            .then(a.fixed_cost.partial_cmp(&b.fixed_cost).unwrap())
            .then(a.competitors.cmp(&b.competitors))
            .then(a.seed.cmp(&b.seed))
            .then(a.method.cmp(&b.method))
    });
}

fn run_cell(
    config: &SweepConfig,
    fixed_cost: f64,
    competitors: usize,
    seed: u64,
    method: Method,
) -> BenchRecord {
    let candidates = config.candidates.unwrap_or(config.zones);
    let mut record = BenchRecord {
        zones: config.zones,
        candidates,
        levels: config.level_values.len(),
        competitors,
        fixed_cost,
        seed,
        method,
        cpu_seconds: 0.0,
        profit_thousands: None,
        open_count: None,
        proven: false,
        iterations: None,
        status: "ok".into(),
    };

    let gen = GenConfig {
        n_zones: config.zones,
        n_candidates: candidates,
        n_competitors: competitors,
        fixed_cost,
        seed,
        square_side: 100.0,
        level_values: config.level_values.clone(),
        level_cost_multiplier: config.level_cost_multiplier,
    };
    let instance = match generate(&gen) {
        Ok(inst) => inst,
        Err(e) => {
            record.status = format!("error: {e}");
            return record;
        }
    };
    let coeffs = DerivedCoefficients::from_instance(&instance);

    let needs_adapter = matches!(
        method,
        Method::OaExternal | Method::ExternalMilp | Method::ExternalMicqp
    );
    if needs_adapter && config.adapter.is_none() {
        record.status = "skipped: no external adapter configured".into();
        return record;
    }

    let start = Instant::now();
    let outcome = run_method(config, &instance, &coeffs, method);
    record.cpu_seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok((phi, open, proven, iterations)) => {
            record.profit_thousands = Some(phi / 1000.0);
            record.open_count = Some(open);
            record.proven = proven;
            record.iterations = iterations;
        }
        Err(e) => record.status = format!("error: {e}"),
    }
    record
}

type MethodOutcome = crate::Result<(f64, usize, bool, Option<usize>)>;

fn run_method(
    config: &SweepConfig,
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    method: Method,
) -> MethodOutcome {
    match method {
        Method::Bnb => {
            let report = bnb::solve(instance, coeffs, config.rel_tol, config.node_cap)?;
            Ok((
                report.best_profit,
                report.best_solution.open_count(),
                report.proven,
                None,
            ))
        }
        Method::Oracle => {
            let report = oracle::enumerate_optimal(instance, coeffs, config.oracle_cap)?;
            Ok((report.best_profit, report.best.open_count(), true, None))
        }
        Method::OaExhaustive => {
            let mut master = oa::ExhaustiveMaster {
                cap: config.oracle_cap,
            };
            run_oa(config, instance, coeffs, &mut master)
        }
        Method::OaBnb => {
            let mut master = oa::BnbMaster::with_node_cap(config.node_cap.max(10_000_000));
            run_oa(config, instance, coeffs, &mut master)
        }
        Method::OaExternal => {
            let mut master = oa::ExternalMaster {
                adapter: config.adapter.clone().expect("checked by caller"),
                time_limit_secs: config.time_limit_secs,
            };
            run_oa(config, instance, coeffs, &mut master)
        }
        Method::ExternalMilp => {
            let adapter = config.adapter.as_ref().expect("checked by caller");
            let model = formulations::build_milp(instance, coeffs);
            let text = formulations::export::to_mps(&model)?;
            let (assignment, _) = extsolver::solve_model(
                adapter,
                &model,
                &text,
                "cfld_milp.mps",
                config.time_limit_secs,
                1e-6,
            )?;
            let solution =
                formulations::solution_from_assignment(instance, &model, &assignment, 1e-6)?;
            let phi = profit(instance, coeffs, &solution)?;
            Ok((phi, solution.open_count(), true, None))
        }
        Method::ExternalMicqp => {
            let adapter = config.adapter.as_ref().expect("checked by caller");
            let model = formulations::build_micqp(instance, coeffs);
            let text = formulations::export::to_cbf(&model)?;
            let (assignment, _) = extsolver::solve_model(
                adapter,
                &model,
                &text,
                "cfld_micqp.cbf",
                config.time_limit_secs,
                1e-6,
            )?;
            let solution =
                formulations::solution_from_assignment(instance, &model, &assignment, 1e-6)?;
            let phi = profit(instance, coeffs, &solution)?;
            Ok((phi, solution.open_count(), true, None))
        }
    }
}

fn run_oa(
    config: &SweepConfig,
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    master: &mut dyn oa::MasterOracle,
) -> MethodOutcome {
    let report = oa::run(
        instance,
        coeffs,
        master,
        &oa::default_init(instance),
        &oa::OaCaps {
            max_iterations: config.oa_max_iterations,
        },
    )?;
    Ok((
        report.profit,
        report.solution.open_count(),
        report.proven,
        Some(report.iterations),
    ))
}

/// Round to six significant digits and render shortest-round-trip.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor();
    let scale = 10f64.powf(5.0 - magnitude);
    format!("{}", (x * scale).round() / scale)
}

pub const CSV_HEADER: &str =
    "I,J,R,K,f,seed,method,cpu_s,profit_thousands,open_count,proven,iterations,status";

/// Render records as CSV; the input order is re-imposed by the stable sort.
pub fn render_csv(records: &[BenchRecord]) -> String {
    let mut sorted: Vec<BenchRecord> = records.to_vec();
    sort_records(&mut sorted);
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &sorted {
        let profit = r
            .profit_thousands
            .map(sig6)
            .unwrap_or_else(|| "NA".into());
        let open = r
            .open_count
            .map(|v| v.to_string())
            .unwrap_or_else(|| "NA".into());
        let iterations = r
            .iterations
            .map(|v| v.to_string())
            .unwrap_or_else(|| "NA".into());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.1},{},{},{},{},{}\n",
            r.zones,
            r.candidates,
            r.levels,
            r.competitors,
            sig6(r.fixed_cost),
            r.seed,
            r.method,
            r.cpu_seconds,
            profit,
            open,
            r.proven,
            iterations,
            csv_quote(&r.status),
        ));
    }
    out
}

fn csv_quote(text: &str) -> String {
    if text.contains(',') || text.contains('"') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Parse CSV produced by [`render_csv`] (status column must be unquoted or
/// simple; good enough for our own output).
pub fn parse_csv(text: &str) -> crate::Result<Vec<BenchRecord>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != CSV_HEADER {
        return Err(crate::error::CfldError::Parse {
            path: "bench csv".into(),
            detail: format!("unexpected header {header:?}"),
        });
    }
    let mut records = Vec::new();
    for (line_no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(13, ',').collect();
        if fields.len() != 13 {
            return Err(crate::error::CfldError::Parse {
                path: "bench csv".into(),
                detail: format!("line {}: expected 13 fields", line_no + 2),
            });
        }
        let parse_opt = |s: &str| -> Option<f64> {
            if s == "NA" {
                None
            } else {
                s.parse().ok()
            }
        };
        records.push(BenchRecord {
            zones: fields[0].parse().map_err(|_| bad_field(line_no, "I"))?,
            candidates: fields[1].parse().map_err(|_| bad_field(line_no, "J"))?,
            levels: fields[2].parse().map_err(|_| bad_field(line_no, "R"))?,
            competitors: fields[3].parse().map_err(|_| bad_field(line_no, "K"))?,
            fixed_cost: fields[4].parse().map_err(|_| bad_field(line_no, "f"))?,
            seed: fields[5].parse().map_err(|_| bad_field(line_no, "seed"))?,
            method: Method::parse(fields[6]).ok_or_else(|| bad_field(line_no, "method"))?,
            cpu_seconds: fields[7].parse().map_err(|_| bad_field(line_no, "cpu_s"))?,
            profit_thousands: parse_opt(fields[8]),
            open_count: if fields[9] == "NA" {
                None
            } else {
                Some(fields[9].parse().map_err(|_| bad_field(line_no, "open"))?)
            },
            proven: fields[10] == "true",
            iterations: if fields[11] == "NA" {
                None
            } else {
                Some(fields[11].parse().map_err(|_| bad_field(line_no, "iter"))?)
            },
            status: fields[12].trim_matches('"').to_string(),
        });
    }
    Ok(records)
}

fn bad_field(line_no: usize, field: &str) -> crate::error::CfldError {
    crate::error::CfldError::Parse {
        path: "bench csv".into(),
        detail: format!("line {}: bad {field} field", line_no + 2),
    }
}

/// The (K, f) plot series at fixed instance size: profit (thousands) and open
/// count, averaged over seeds (and methods, if several are present). Missing
/// grid cells render as "NA".
pub fn plot_series(records: &[BenchRecord]) -> (String, String) {
    let mut ks: Vec<usize> = records.iter().map(|r| r.competitors).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut fs: Vec<f64> = records.iter().map(|r| r.fixed_cost).collect();
    fs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    fs.dedup();

    let cell = |k: usize, f: f64| -> (Option<f64>, Option<f64>) {
        let values: Vec<&BenchRecord> = records
            .iter()
            .filter(|r| r.competitors == k && r.fixed_cost == f && r.profit_thousands.is_some())
            .collect();
        if values.is_empty() {
            return (None, None);
        }
        let n = values.len() as f64;
        let phi = values
            .iter()
            .map(|r| r.profit_thousands.unwrap())
            .sum::<f64>()
            / n;
        let open = values
            .iter()
            .map(|r| r.open_count.unwrap_or(0) as f64)
            .sum::<f64>()
            / n;
        (Some(phi), Some(open))
    };

    let mut header = String::from("K");
    for f in &fs {
        header.push_str(&format!(",f={}", sig6(*f)));
    }
    let mut profit_csv = header.clone();
    profit_csv.push('\n');
    let mut open_csv = header;
    open_csv.push('\n');
    for &k in &ks {
        let mut profit_row = k.to_string();
        let mut open_row = k.to_string();
        for &f in &fs {
            let (phi, open) = cell(k, f);
            profit_row.push(',');
            profit_row.push_str(&phi.map(sig6).unwrap_or_else(|| "NA".into()));
            open_row.push(',');
            open_row.push_str(&open.map(sig6).unwrap_or_else(|| "NA".into()));
        }
        profit_csv.push_str(&profit_row);
        profit_csv.push('\n');
        open_csv.push_str(&open_row);
        open_csv.push('\n');
    }
    (profit_csv, open_csv)
}

/// Textual trend summary of a (K, f) grid: reported, not asserted.
pub fn trend_report(records: &[BenchRecord]) -> String {
    let mut fs: Vec<f64> = records.iter().map(|r| r.fixed_cost).collect();
    fs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    fs.dedup();
    let mut ks: Vec<usize> = records.iter().map(|r| r.competitors).collect();
    ks.sort_unstable();
    ks.dedup();

    let mut out = String::new();
    for &f in &fs {
        let series: Vec<(usize, f64, f64)> = ks
            .iter()
            .filter_map(|&k| {
                let rows: Vec<&BenchRecord> = records
                    .iter()
                    .filter(|r| {
                        r.fixed_cost == f && r.competitors == k && r.profit_thousands.is_some()
                    })
                    .collect();
                if rows.is_empty() {
                    return None;
                }
                let n = rows.len() as f64;
                Some((
                    k,
                    rows.iter().map(|r| r.profit_thousands.unwrap()).sum::<f64>() / n,
                    rows.iter().map(|r| r.open_count.unwrap_or(0) as f64).sum::<f64>() / n,
                ))
            })
            .collect();
        if series.len() < 2 {
            continue;
        }
        let profit_drops = series.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9);
        let open_grows = series.windows(2).all(|w| w[1].2 >= w[0].2 - 1e-9);
        let peak = series
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .2.partial_cmp(&b.1 .2).unwrap())
            .map(|(idx, _)| idx)
            .unwrap_or(0);
        let rises_then_falls = peak > 0 && peak < series.len() - 1;
        out.push_str(&format!(
            "f={}: profit nonincreasing in K: {}; open count nondecreasing: {}; open count rises then falls: {}\n",
            sig6(f),
            if profit_drops { "yes" } else { "no" },
            if open_grows { "yes" } else { "no" },
            if rises_then_falls { "yes" } else { "no" },
        ));
    }
    out
}
