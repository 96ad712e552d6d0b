//! Results and summary CSVs, figure tables and plot scripts.
//!
//! Floats are written in Rust's shortest round-trip form so that reading a
//! file back yields bit-identical values. Absent values are empty cells.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::simulation::{median, CrossoverStudy, ObservationRow, ResultRow, SummaryRow, WdStatus};

pub const RESULT_COLUMNS: [&str; 27] = [
    "seed",
    "n",
    "D",
    "delta_config",
    "regret_n",
    "regret_map",
    "regret_u",
    "regret_t",
    "temperature",
    "noise_scale",
    "wd_hm",
    "wd_tt",
    "alpha_err",
    "alpha_err_matched",
    "theorem_bound",
    "theorem_bound3",
    "map_bound_n",
    "map_bound_nd",
    "corollary_temperature",
    "corollary_utility",
    "violates_bound",
    "violates_bound3",
    "violates_map_n",
    "violates_map_nd",
    "violates_temperature",
    "violates_utility",
    "wd_status",
];

pub const SUMMARY_COLUMNS: [&str; 27] = [
    "n",
    "D",
    "delta_config",
    "temperature",
    "noise_scale",
    "rows",
    "mean_regret_n",
    "median_regret_n",
    "mean_regret_map",
    "median_regret_map",
    "mean_theorem_bound",
    "violation_rate_bound",
    "mean_theorem_bound3",
    "violation_rate_bound3",
    "mean_map_bound_n",
    "violation_rate_map_n",
    "mean_map_bound_nd",
    "violation_rate_map_nd",
    "mean_regret_t",
    "median_regret_t",
    "mean_corollary_temperature",
    "violation_rate_temperature",
    "mean_regret_u",
    "median_regret_u",
    "mean_corollary_utility",
    "violation_rate_utility",
    "median_gap",
];

pub const REGRET_REPORT_COLUMNS: [&str; 7] = ["seed", "n", "D", "regret_n", "regret_map", "regret_u", "regret_t"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn fmt_flag(v: Option<bool>) -> String {
    match v {
        Some(true) => "1".into(),
        Some(false) => "0".into(),
        None => String::new(),
    }
}

fn csv_bytes(header: &[&str], records: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn result_record(r: &ResultRow) -> Vec<String> {
    vec![
        r.seed.to_string(),
        r.n.to_string(),
        r.d_size.to_string(),
        fmt_f64(r.delta),
        fmt_f64(r.regret_n),
        fmt_f64(r.regret_map),
        fmt_opt(r.regret_u),
        fmt_opt(r.regret_t),
        fmt_opt(r.temperature),
        fmt_opt(r.noise_scale),
        fmt_opt(r.wd_hm),
        fmt_opt(r.wd_tt),
        fmt_opt(r.alpha_err),
        fmt_opt(r.alpha_err_matched),
        fmt_opt(r.theorem_bound),
        fmt_opt(r.theorem_bound3),
        fmt_opt(r.map_bound_n),
        fmt_opt(r.map_bound_nd),
        fmt_opt(r.corollary_temperature),
        fmt_opt(r.corollary_utility),
        fmt_flag(r.violates_bound()),
        fmt_flag(r.violates_bound3()),
        fmt_flag(r.violates_map_n()),
        fmt_flag(r.violates_map_nd()),
        fmt_flag(r.violates_temperature()),
        fmt_flag(r.violates_utility()),
        r.wd_status.name().to_string(),
    ]
}

pub fn results_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    csv_bytes(&RESULT_COLUMNS, rows.iter().map(result_record))
}

pub fn summary_csv(summary: &[SummaryRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &SUMMARY_COLUMNS,
        summary.iter().map(|s| {
            vec![
                s.n.to_string(),
                s.d_size.to_string(),
                fmt_f64(s.delta),
                fmt_opt(s.temperature),
                fmt_opt(s.noise_scale),
                s.rows.to_string(),
                fmt_f64(s.mean_regret_n),
                fmt_f64(s.median_regret_n),
                fmt_f64(s.mean_regret_map),
                fmt_f64(s.median_regret_map),
                fmt_opt(s.mean_theorem_bound),
                fmt_opt(s.violation_rate_bound),
                fmt_opt(s.mean_theorem_bound3),
                fmt_opt(s.violation_rate_bound3),
                fmt_opt(s.mean_map_bound_n),
                fmt_opt(s.violation_rate_map_n),
                fmt_opt(s.mean_map_bound_nd),
                fmt_opt(s.violation_rate_map_nd),
                fmt_opt(s.mean_regret_t),
                fmt_opt(s.median_regret_t),
                fmt_opt(s.mean_corollary_temperature),
                fmt_opt(s.violation_rate_temperature),
                fmt_opt(s.mean_regret_u),
                fmt_opt(s.median_regret_u),
                fmt_opt(s.mean_corollary_utility),
                fmt_opt(s.violation_rate_utility),
                fmt_opt(s.median_gap),
            ]
        }),
    )
}

pub fn regret_report_csv(report: &crate::decoding::RegretReport) -> Result<Vec<u8>> {
    csv_bytes(
        &REGRET_REPORT_COLUMNS,
        std::iter::once(vec![
            report.seed.to_string(),
            report.n.to_string(),
            report.d_size.map(|d| d.to_string()).unwrap_or_default(),
            fmt_f64(report.regret_n),
            fmt_f64(report.regret_map),
            fmt_opt(report.regret_u),
            fmt_opt(report.regret_t),
        ]),
    )
}

pub fn observation_csv(rows: &[ObservationRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &["seed", "n", "D", "human_side", "model_side", "gap"],
        rows.iter().map(|r| {
            vec![
                r.seed.to_string(),
                r.n.to_string(),
                r.d_size.to_string(),
                fmt_f64(r.human_side),
                fmt_f64(r.model_side),
                fmt_f64(r.gap),
            ]
        }),
    )
}

pub const CROSSOVER_COLUMNS: [&str; 6] = ["n", "D", "theorem_bound", "map_bound_nd", "difference", "case3"];

pub fn crossover_csv(study: &CrossoverStudy) -> Result<Vec<u8>> {
    csv_bytes(
        &CROSSOVER_COLUMNS,
        study.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.d_size.to_string(),
                fmt_f64(r.theorem_bound),
                fmt_f64(r.map_bound_nd),
                fmt_f64(r.difference),
                (r.case3 as u8).to_string(),
            ]
        }),
    )
}

struct Cells<'a> {
    record: &'a csv::StringRecord,
    line: usize,
    path: &'a Path,
}

impl Cells<'_> {
    fn err(&self, message: String) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            message,
        }
    }

    fn raw(&self, i: usize) -> &str {
        self.record.get(i).unwrap_or("")
    }

    fn req<T: std::str::FromStr>(&self, i: usize) -> Result<T> {
        let v = self.raw(i);
        v.parse()
            .map_err(|_| self.err(format!("column {}: cannot parse `{v}`", RESULT_COLUMNS[i])))
    }

    fn opt(&self, i: usize) -> Result<Option<f64>> {
        if self.raw(i).is_empty() {
            Ok(None)
        } else {
            self.req(i).map(Some)
        }
    }

    fn flag(&self, i: usize) -> Result<()> {
        match self.raw(i) {
            "" | "0" | "1" => Ok(()),
            v => Err(self.err(format!("column {}: expected 0, 1 or empty, got `{v}`", RESULT_COLUMNS[i]))),
        }
    }
}

/// Parse a results CSV; `path` is only used in error messages.
pub fn parse_results(reader: impl Read, path: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?;
    if header.iter().ne(RESULT_COLUMNS.iter().copied()) {
        return Err(parse_err(1, "unexpected header".into()));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != RESULT_COLUMNS.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", RESULT_COLUMNS.len(), record.len()),
            ));
        }
        let c = Cells {
            record: &record,
            line,
            path,
        };
        for i in 20..26 {
            c.flag(i)?;
        }
        let status = c.raw(26);
        let row = ResultRow {
            seed: c.req(0)?,
            n: c.req(1)?,
            d_size: c.req(2)?,
            delta: c.req(3)?,
            regret_n: c.req(4)?,
            regret_map: c.req(5)?,
            regret_u: c.opt(6)?,
            regret_t: c.opt(7)?,
            temperature: c.opt(8)?,
            noise_scale: c.opt(9)?,
            wd_hm: c.opt(10)?,
            wd_tt: c.opt(11)?,
            alpha_err: c.opt(12)?,
            alpha_err_matched: c.opt(13)?,
            theorem_bound: c.opt(14)?,
            theorem_bound3: c.opt(15)?,
            map_bound_n: c.opt(16)?,
            map_bound_nd: c.opt(17)?,
            corollary_temperature: c.opt(18)?,
            corollary_utility: c.opt(19)?,
            wd_status: WdStatus::from_name(status)
                .ok_or_else(|| c.err(format!("column wd_status: unknown value `{status}`")))?,
        };
        for v in [row.regret_n, row.regret_map, row.delta] {
            if !v.is_finite() {
                return Err(c.err("non-finite value".into()));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_results(std::io::BufReader::new(file), path)
}

/// A three-series table: median regret and one bound column per `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub name: &'static str,
    pub title: String,
    pub x_column: &'static str,
    pub regret_label: &'static str,
    pub deltas: Vec<f64>,
    /// `(n, |D|, median regret, bound per δ, median bound−regret gap per δ)`.
    pub points: Vec<FigurePoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurePoint {
    pub n: usize,
    pub d_size: usize,
    pub regret_median: f64,
    pub bounds: Vec<f64>,
    pub gap_medians: Vec<f64>,
}

pub fn bound_column(delta: f64) -> String {
    format!("bound_delta_{}", fmt_f64(delta))
}

pub fn gap_column(delta: f64) -> String {
    format!("gap_median_delta_{}", fmt_f64(delta))
}

impl FigureTable {
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["n".to_string(), "D".to_string(), "regret_median".to_string()];
        cols.extend(self.deltas.iter().map(|&d| bound_column(d)));
        cols.extend(self.deltas.iter().map(|&d| gap_column(d)));
        cols
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let cols = self.columns();
        let header: Vec<&str> = cols.iter().map(String::as_str).collect();
        csv_bytes(
            &header,
            self.points.iter().map(|p| {
                let mut rec = vec![p.n.to_string(), p.d_size.to_string(), fmt_f64(p.regret_median)];
                rec.extend(p.bounds.iter().copied().map(fmt_f64));
                rec.extend(p.gap_medians.iter().copied().map(fmt_f64));
                rec
            }),
        )
    }

    /// Python/matplotlib script drawing the three series from the CSV.
    pub fn plot_script(&self, csv_name: &str) -> String {
        let cols = self.columns();
        let bound_cols: Vec<String> = self.deltas.iter().map(|&d| bound_column(d)).collect();
        let quoted = |v: &[String]| v.iter().map(|c| format!("\"{c}\"")).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "import csv");
        let _ = writeln!(s, "import matplotlib");
        let _ = writeln!(s, "matplotlib.use(\"Agg\")");
        let _ = writeln!(s, "import matplotlib.pyplot as plt");
        let _ = writeln!(s);
        let _ = writeln!(s, "CSV = \"{csv_name}\"");
        let _ = writeln!(s, "COLUMNS = [{}]", quoted(&cols));
        let _ = writeln!(s, "X = \"{}\"", self.x_column);
        let _ = writeln!(s, "BOUNDS = [{}]", quoted(&bound_cols));
        let _ = writeln!(s, "COLORS = [\"red\", \"blue\", \"orange\", \"purple\"]");
        let _ = writeln!(s);
        let _ = writeln!(s, "with open(CSV) as f:");
        let _ = writeln!(s, "    rows = list(csv.DictReader(f))");
        let _ = writeln!(s, "xs = [float(r[X]) for r in rows]");
        let _ = writeln!(s, "fig, ax = plt.subplots(figsize=(5, 3.5))");
        let _ = writeln!(s, "for i, col in enumerate(BOUNDS):");
        let _ = writeln!(
            s,
            "    ax.plot(xs, [float(r[col]) for r in rows], color=COLORS[i % len(COLORS)], label=col.replace(\"bound_delta_\", \"bound, delta=\"))"
        );
        let _ = writeln!(
            s,
            "ax.plot(xs, [float(r[\"regret_median\"]) for r in rows], color=\"teal\", label=\"{}\")",
            self.regret_label
        );
        let _ = writeln!(s, "ax.set_xlabel(X)");
        let _ = writeln!(s, "ax.set_ylabel(\"regret\")");
        let _ = writeln!(s, "ax.set_title(\"{}\")", self.title);
        let _ = writeln!(s, "ax.legend()");
        let _ = writeln!(s, "fig.tight_layout()");
        let _ = writeln!(s, "fig.savefig(CSV.replace(\".csv\", \".pdf\"))");
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    /// `|D|` fixed at its largest value, `n` varies, theorem bound.
    RegretVsN,
    /// `n` fixed at its largest value, `|D|` varies, theorem bound.
    RegretVsD,
    /// As [`FigureKind::RegretVsD`] but with the Wasserstein form of the bound.
    Bound3VsD,
}

impl FigureKind {
    pub const ALL: [FigureKind; 3] = [FigureKind::RegretVsN, FigureKind::RegretVsD, FigureKind::Bound3VsD];

    pub fn file_stem(self) -> &'static str {
        match self {
            FigureKind::RegretVsN => "fig_regret_vs_n",
            FigureKind::RegretVsD => "fig_regret_vs_d",
            FigureKind::Bound3VsD => "fig_bound3_vs_d",
        }
    }
}

/// Build a figure table from base rows, or `None` when the bound was never
/// computed (for example the Wasserstein form on a large space).
pub fn figure_table(rows: &[ResultRow], kind: FigureKind) -> Option<FigureTable> {
    let base: Vec<&ResultRow> = rows.iter().filter(|r| r.is_base()).collect();
    let mut deltas: Vec<f64> = Vec::new();
    let mut ns: Vec<usize> = Vec::new();
    let mut ds: Vec<usize> = Vec::new();
    for r in &base {
        if !deltas.contains(&r.delta) {
            deltas.push(r.delta);
        }
        if !ns.contains(&r.n) {
            ns.push(r.n);
        }
        if !ds.contains(&r.d_size) {
            ds.push(r.d_size);
        }
    }
    deltas.sort_by(f64::total_cmp);
    ns.sort_unstable();
    ds.sort_unstable();
    let (fixed_n, fixed_d) = (*ns.last()?, *ds.last()?);
    let bound = |r: &ResultRow| match kind {
        FigureKind::Bound3VsD => r.theorem_bound3,
        _ => r.theorem_bound,
    };
    let grid: Vec<(usize, usize)> = match kind {
        FigureKind::RegretVsN => ns.iter().map(|&n| (n, fixed_d)).collect(),
        _ => ds.iter().map(|&d| (fixed_n, d)).collect(),
    };
    let mut points = Vec::new();
    for (n, d_size) in grid {
        let at = |delta: f64| -> Vec<&ResultRow> {
            base.iter()
                .copied()
                .filter(|r| r.n == n && r.d_size == d_size && r.delta == delta)
                .collect()
        };
        let first = at(deltas[0]);
        let regrets: Vec<f64> = first.iter().map(|r| r.regret_n).collect();
        let Some(regret_median) = median(&regrets) else {
            continue;
        };
        let mut bounds = Vec::new();
        let mut gap_medians = Vec::new();
        for &delta in &deltas {
            let group = at(delta);
            let values: Vec<f64> = group.iter().filter_map(|r| bound(r)).collect();
            if values.len() != group.len() || values.is_empty() {
                return None;
            }
            bounds.push(values.iter().sum::<f64>() / values.len() as f64);
            let gaps: Vec<f64> = group.iter().map(|r| bound(r).unwrap_or(0.0) - r.regret_n).collect();
            gap_medians.push(median(&gaps).unwrap_or(0.0));
        }
        points.push(FigurePoint {
            n,
            d_size,
            regret_median,
            bounds,
            gap_medians,
        });
    }
    if points.is_empty() {
        return None;
    }
    let (name, title, x_column, regret_label) = match kind {
        FigureKind::RegretVsN => (
            kind.file_stem(),
            format!("MBR regret vs n (|D| = {fixed_d})"),
            "n",
            "Regret_n,D (median)",
        ),
        FigureKind::RegretVsD => (
            kind.file_stem(),
            format!("MBR regret vs |D| (n = {fixed_n})"),
            "D",
            "Regret_n,D (median)",
        ),
        FigureKind::Bound3VsD => (
            kind.file_stem(),
            format!("Wasserstein bound vs |D| (n = {fixed_n})"),
            "D",
            "Regret_n (median)",
        ),
    };
    Some(FigureTable {
        name,
        title,
        x_column,
        regret_label,
        deltas,
        points,
    })
}

pub fn crossover_plot_script(csv_name: &str) -> String {
    let cols = CROSSOVER_COLUMNS
        .iter()
        .map(|c| format!("\"{c}\""))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        r#"import csv
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV = "{csv_name}"
COLUMNS = [{cols}]

with open(CSV) as f:
    rows = list(csv.DictReader(f))
mbr = [(float(r["n"]), float(r["D"])) for r in rows if r["case3"] == "1"]
other = [(float(r["n"]), float(r["D"])) for r in rows if r["case3"] != "1"]
fig, ax = plt.subplots(figsize=(5, 3.5))
if other:
    ax.scatter(*zip(*other), s=8, color="gray", label="MAP bound smaller")
if mbr:
    ax.scatter(*zip(*mbr), s=8, color="teal", label="MBR bound smaller")
ax.set_xlabel("n")
ax.set_ylabel("D")
ax.set_title("Where the MBR bound drops below the MAP bound")
ax.legend()
fig.tight_layout()
fig.savefig(CSV.replace(".csv", ".pdf"))
"#
    )
}

/// Names listed in the `COLUMNS = [...]` line of a generated script.
pub fn script_columns(script: &str) -> Vec<String> {
    script
        .lines()
        .find_map(|l| l.strip_prefix("COLUMNS = ["))
        .map(|rest| {
            rest.trim_end_matches(']')
                .split(',')
                .map(|c| c.trim().trim_matches('"').to_string())
                .filter(|c| !c.is_empty())
                .collect()
        })
        .unwrap_or_default()
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).map_err(|e| Error::File {
        path: path.clone(),
        message: e.to_string(),
    })?;
    f.write_all(bytes)?;
    Ok(path)
}
