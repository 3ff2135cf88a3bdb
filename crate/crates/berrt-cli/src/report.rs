//! Aggregation and emission of benchmark records: per-cell mean/standard
//! deviation, speedup columns against the designated baselines, crossover
//! detection, and lossless CSV/JSON round-tripping.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use berrt::BackendKind;

use crate::harness::{RunRecord, RunStatus};
use crate::CliError;

/// Fixed CSV column order. `replan_times_s` and `replan_iterations` are
/// semicolon-joined lists inside a single field.
pub const CSV_COLUMNS: [&str; 21] = [
    "scenario",
    "n_samples",
    "batch_size",
    "backend",
    "workers",
    "trial",
    "seed",
    "epsilon",
    "status",
    "vertices",
    "edges",
    "replans",
    "policy_iterations",
    "explore_s",
    "exploit_s",
    "rebuild_s",
    "total_s",
    "path_cost",
    "path_edges",
    "replan_times_s",
    "replan_iterations",
];

/// Aggregates for one (scenario, N, S, backend) cell.
#[derive(Debug, Clone)]
pub struct SummaryCell {
    pub scenario: String,
    pub n_samples: usize,
    pub batch_size: usize,
    pub backend: BackendKind,
    pub runs: usize,
    pub mean_total_s: f64,
    pub std_total_s: f64,
    pub mean_exploit_s: f64,
    pub std_exploit_s: f64,
    pub mean_path_cost: f64,
    pub std_path_cost: f64,
    /// Mean total time of the same cell at S = 1 divided by this cell's; the
    /// batch-sweep speedup.
    pub speedup_vs_s1: Option<f64>,
    /// Serial mean total divided by this cell's; the backend-sweep speedup.
    pub speedup_vs_serial: Option<f64>,
}

/// Crossover point for one batch size: the smallest N at which the parallel
/// backend's mean total time first beats the serial backend's.
#[derive(Debug, Clone)]
pub struct Crossover {
    pub scenario: String,
    pub batch_size: usize,
    pub n0: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub cells: Vec<SummaryCell>,
    pub crossovers: Vec<Crossover>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64;
    (mean, var.sqrt())
}

type CellKey = (String, usize, usize, u8);

fn backend_ord(b: BackendKind) -> u8 {
    match b {
        BackendKind::Serial => 0,
        BackendKind::Parallel => 1,
    }
}

/// Per-cell means and standard deviations plus the speedup columns and
/// parallel-vs-serial crossover points. Skipped records are ignored.
pub fn summarize(records: &[RunRecord]) -> Summary {
    let mut groups: BTreeMap<CellKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.status == RunStatus::Ok) {
        groups
            .entry((
                r.scenario.clone(),
                r.n_samples,
                r.batch_size,
                backend_ord(r.backend),
            ))
            .or_default()
            .push(r);
    }

    let mut cells: Vec<SummaryCell> = Vec::new();
    for ((scenario, n, s, bord), rs) in &groups {
        let backend = if *bord == 0 {
            BackendKind::Serial
        } else {
            BackendKind::Parallel
        };
        let totals: Vec<f64> = rs.iter().map(|r| r.total_s).collect();
        let exploits: Vec<f64> = rs.iter().map(|r| r.exploit_s).collect();
        let costs: Vec<f64> = rs.iter().filter_map(|r| r.path_cost).collect();
        let (mean_total_s, std_total_s) = mean_std(&totals);
        let (mean_exploit_s, std_exploit_s) = mean_std(&exploits);
        let (mean_path_cost, std_path_cost) = mean_std(&costs);
        cells.push(SummaryCell {
            scenario: scenario.clone(),
            n_samples: *n,
            batch_size: *s,
            backend,
            runs: rs.len(),
            mean_total_s,
            std_total_s,
            mean_exploit_s,
            std_exploit_s,
            mean_path_cost,
            std_path_cost,
            speedup_vs_s1: None,
            speedup_vs_serial: None,
        });
    }

    // speedup columns against the designated baselines
    let lookup: BTreeMap<CellKey, f64> = cells
        .iter()
        .map(|c| {
            (
                (
                    c.scenario.clone(),
                    c.n_samples,
                    c.batch_size,
                    backend_ord(c.backend),
                ),
                c.mean_total_s,
            )
        })
        .collect();
    for c in &mut cells {
        let s1 = lookup.get(&(c.scenario.clone(), c.n_samples, 1, backend_ord(c.backend)));
        c.speedup_vs_s1 = s1.map(|base| base / c.mean_total_s);
        let serial = lookup.get(&(c.scenario.clone(), c.n_samples, c.batch_size, 0));
        c.speedup_vs_serial = serial.map(|base| base / c.mean_total_s);
    }

    // crossover per (scenario, S): smallest N where parallel beats serial
    // (N, serial mean, parallel mean) points per sweep
    type SweepPoints = Vec<(usize, f64, f64)>;
    let mut crossovers = Vec::new();
    let mut sweeps: BTreeMap<(String, usize), SweepPoints> = BTreeMap::new();
    for c in &cells {
        if c.backend == BackendKind::Parallel {
            if let Some(&serial) = lookup.get(&(c.scenario.clone(), c.n_samples, c.batch_size, 0)) {
                sweeps
                    .entry((c.scenario.clone(), c.batch_size))
                    .or_default()
                    .push((c.n_samples, serial, c.mean_total_s));
            }
        }
    }
    for ((scenario, s), mut points) in sweeps {
        points.sort_by_key(|&(n, _, _)| n);
        let n0 = points
            .iter()
            .find(|&&(_, serial, parallel)| parallel < serial)
            .map(|&(n, _, _)| n);
        crossovers.push(Crossover {
            scenario,
            batch_size: s,
            n0,
        });
    }

    Summary { cells, crossovers }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>8} {:>6} {:>8} {:>4} {:>11} {:>10} {:>11} {:>10} {:>11} {:>9} {:>9}",
            "scenario",
            "N",
            "S",
            "backend",
            "runs",
            "total_s",
            "±std",
            "exploit_s",
            "±std",
            "path_cost",
            "x_vs_S1",
            "x_vs_ser"
        )?;
        for c in &self.cells {
            writeln!(
                f,
                "{:<10} {:>8} {:>6} {:>8} {:>4} {:>11.4} {:>10.4} {:>11.4} {:>10.4} {:>11.4} {:>9} {:>9}",
                c.scenario,
                c.n_samples,
                c.batch_size,
                c.backend.to_string(),
                c.runs,
                c.mean_total_s,
                c.std_total_s,
                c.mean_exploit_s,
                c.std_exploit_s,
                c.mean_path_cost,
                c.speedup_vs_s1
                    .map(|v| format!("{v:.2}"))
                    .unwrap_or_else(|| "-".into()),
                c.speedup_vs_serial
                    .map(|v| format!("{v:.2}"))
                    .unwrap_or_else(|| "-".into()),
            )?;
        }
        for x in &self.crossovers {
            match x.n0 {
                Some(n0) => writeln!(
                    f,
                    "crossover {} S={}: parallel first beats serial at N0={}",
                    x.scenario, x.batch_size, n0
                )?,
                None => writeln!(
                    f,
                    "crossover {} S={}: parallel never beats serial in this sweep",
                    x.scenario, x.batch_size
                )?,
            }
        }
        Ok(())
    }
}

fn join_f64s(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn join_usizes(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn record_to_row(r: &RunRecord) -> Vec<String> {
    vec![
        r.scenario.clone(),
        r.n_samples.to_string(),
        r.batch_size.to_string(),
        r.backend.to_string(),
        r.workers.to_string(),
        r.trial.to_string(),
        r.seed.to_string(),
        r.epsilon.to_string(),
        r.status.to_string(),
        r.vertices.to_string(),
        r.edges.to_string(),
        r.replans.to_string(),
        r.policy_iterations.to_string(),
        r.explore_s.to_string(),
        r.exploit_s.to_string(),
        r.rebuild_s.to_string(),
        r.total_s.to_string(),
        r.path_cost
            .map(|c| c.to_string())
            .unwrap_or_else(|| "inf".into()),
        r.path_edges.to_string(),
        join_f64s(&r.replan_times_s),
        join_usizes(&r.replan_iterations),
    ]
}

fn parse_field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    let raw = row.get(i).ok_or_else(|| CliError::Format {
        reason: format!("missing CSV column {} ({})", i, CSV_COLUMNS[i]),
    })?;
    raw.parse().map_err(|e| CliError::Format {
        reason: format!("column {} ({}): {e}", i, CSV_COLUMNS[i]),
    })
}

fn row_to_record(row: &csv::StringRecord) -> Result<RunRecord, CliError> {
    let status_raw: String = parse_field(row, 8)?;
    let status = match status_raw.as_str() {
        "ok" => RunStatus::Ok,
        "skipped" => RunStatus::Skipped,
        other => {
            return Err(CliError::Format {
                reason: format!("unknown status `{other}`"),
            })
        }
    };
    let path_cost_raw: String = parse_field(row, 17)?;
    let path_cost = if path_cost_raw == "inf" {
        None
    } else {
        Some(path_cost_raw.parse().map_err(|e| CliError::Format {
            reason: format!("path_cost: {e}"),
        })?)
    };
    let list_f64 = |i: usize| -> Result<Vec<f64>, CliError> {
        let raw = row.get(i).unwrap_or("");
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(';')
            .map(|t| {
                t.parse().map_err(|e| CliError::Format {
                    reason: format!("{}: {e}", CSV_COLUMNS[i]),
                })
            })
            .collect()
    };
    let list_usize = |i: usize| -> Result<Vec<usize>, CliError> {
        let raw = row.get(i).unwrap_or("");
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(';')
            .map(|t| {
                t.parse().map_err(|e| CliError::Format {
                    reason: format!("{}: {e}", CSV_COLUMNS[i]),
                })
            })
            .collect()
    };
    Ok(RunRecord {
        scenario: parse_field(row, 0)?,
        n_samples: parse_field(row, 1)?,
        batch_size: parse_field(row, 2)?,
        backend: {
            let raw: String = parse_field(row, 3)?;
            raw.parse().map_err(|e| CliError::Format { reason: e })?
        },
        workers: parse_field(row, 4)?,
        trial: parse_field(row, 5)?,
        seed: parse_field(row, 6)?,
        epsilon: parse_field(row, 7)?,
        status,
        vertices: parse_field(row, 9)?,
        edges: parse_field(row, 10)?,
        replans: parse_field(row, 11)?,
        policy_iterations: parse_field(row, 12)?,
        explore_s: parse_field(row, 13)?,
        exploit_s: parse_field(row, 14)?,
        rebuild_s: parse_field(row, 15)?,
        total_s: parse_field(row, 16)?,
        path_cost,
        path_edges: parse_field(row, 18)?,
        replan_times_s: list_f64(19)?,
        replan_iterations: list_usize(20)?,
    })
}

/// Serialize records as CSV (header + one row per record). Floats print in
/// shortest-round-trip form, so parsing the output recovers them exactly.
pub fn to_csv(records: &[RunRecord]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record(record_to_row(r))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Format {
        reason: e.to_string(),
    })?;
    String::from_utf8(bytes).map_err(|e| CliError::Format {
        reason: e.to_string(),
    })
}

pub fn from_csv(text: &str) -> Result<Vec<RunRecord>, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.records() {
        out.push(row_to_record(&row?)?);
    }
    Ok(out)
}

pub fn to_json(records: &[RunRecord]) -> Result<String, CliError> {
    serde_json::to_string_pretty(records).map_err(|e| CliError::Format {
        reason: e.to_string(),
    })
}

pub fn from_json(text: &str) -> Result<Vec<RunRecord>, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Format {
        reason: e.to_string(),
    })
}

/// Output format for `emit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

impl std::str::FromStr for EmitFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv|json)")),
        }
    }
}

/// Write records to `path` in the chosen format.
pub fn emit(records: &[RunRecord], format: EmitFormat, path: &Path) -> Result<(), CliError> {
    let text = match format {
        EmitFormat::Csv => to_csv(records)?,
        EmitFormat::Json => to_json(records)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}
