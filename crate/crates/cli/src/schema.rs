//! Versioned CSV schemas for per-trial rows and mean `pi_1` paths.

use selfish_bandit::simlab::{AggregateStats, Trajectory};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const RUN_HEADER: [&str; 18] = [
    "schema_version",
    "trial",
    "seed",
    "T",
    "eta",
    "gamma",
    "learner",
    "env",
    "pseudo_regret",
    "ln_pi_final",
    "pi_T1",
    "pi_T1T2",
    "e1",
    "e2",
    "recovered",
    "second_moment_sum",
    "bias_sum",
    "arm1_pulls_phase1",
];

pub const PATH_HEADER: [&str; 8] = ["schema_version", "learner", "env", "T", "eta", "gamma", "t", "mean_pi1"];

/// Floats are written with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_bool(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

/// One parsed row of the run CSV. `pi_T1T2` is `pi_{T1+T2+1,1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub trial: u64,
    pub seed: u64,
    pub horizon: u64,
    pub eta: f64,
    pub gamma: f64,
    pub learner: String,
    pub env: String,
    pub pseudo_regret: f64,
    pub ln_pi_final: f64,
    pub pi_t1: Option<f64>,
    pub pi_t1t2: Option<f64>,
    pub e1: Option<bool>,
    pub e2: Option<bool>,
    pub recovered: bool,
    pub second_moment_sum: f64,
    pub bias_sum: f64,
    pub arm1_pulls_phase1: u64,
}

impl RunRow {
    pub fn from_trajectory(t: &Trajectory) -> RunRow {
        RunRow {
            trial: t.trial_index,
            seed: t.stream_seed,
            horizon: t.params.horizon,
            eta: t.params.eta,
            gamma: t.params.gamma,
            learner: t.learner.name().to_string(),
            env: t.env.clone(),
            pseudo_regret: t.pseudo_regret,
            ln_pi_final: t.ln_pi_final,
            pi_t1: t.pi_t1,
            pi_t1t2: t.pi_t1t2_plus_1,
            e1: t.e1,
            e2: t.e2,
            recovered: t.recovered,
            second_moment_sum: t.second_moment_sum,
            bias_sum: t.bias_sum,
            arm1_pulls_phase1: t.arm1_pulls_phase1,
        }
    }

    fn to_record(&self) -> Vec<String> {
        vec![
            SCHEMA_VERSION.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            self.horizon.to_string(),
            fmt_f64(self.eta),
            fmt_f64(self.gamma),
            self.learner.clone(),
            self.env.clone(),
            fmt_f64(self.pseudo_regret),
            fmt_f64(self.ln_pi_final),
            fmt_opt_f64(self.pi_t1),
            fmt_opt_f64(self.pi_t1t2),
            fmt_opt_bool(self.e1),
            fmt_opt_bool(self.e2),
            self.recovered.to_string(),
            fmt_f64(self.second_moment_sum),
            fmt_f64(self.bias_sum),
            self.arm1_pulls_phase1.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRow {
    pub learner: String,
    pub env: String,
    pub horizon: u64,
    pub eta: f64,
    pub gamma: f64,
    pub t: u64,
    pub mean_pi1: f64,
}

impl PathRow {
    pub fn from_stats(stats: &AggregateStats) -> Vec<PathRow> {
        stats
            .mean_path
            .iter()
            .map(|p| PathRow {
                learner: stats.learner.name().to_string(),
                env: stats.env.clone(),
                horizon: stats.params.horizon,
                eta: stats.params.eta,
                gamma: stats.params.gamma,
                t: p.t,
                mean_pi1: p.pi1,
            })
            .collect()
    }

    fn to_record(&self) -> Vec<String> {
        vec![
            SCHEMA_VERSION.to_string(),
            self.learner.clone(),
            self.env.clone(),
            self.horizon.to_string(),
            fmt_f64(self.eta),
            fmt_f64(self.gamma),
            self.t.to_string(),
            fmt_f64(self.mean_pi1),
        ]
    }
}

fn write_records(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("fields are UTF-8"))
}

pub fn write_run_csv(rows: &[RunRow]) -> Result<String, CliError> {
    write_records(&RUN_HEADER, rows.iter().map(RunRow::to_record))
}

pub fn write_path_csv(rows: &[PathRow]) -> Result<String, CliError> {
    write_records(&PATH_HEADER, rows.iter().map(PathRow::to_record))
}

struct Fields<'a> {
    record: &'a csv::StringRecord,
    line: usize,
    header: &'a [&'a str],
}

impl Fields<'_> {
    fn raw(&self, i: usize) -> Result<&str, CliError> {
        self.record.get(i).ok_or_else(|| CliError::Schema(format!("line {}: missing column {}", self.line, self.header[i])))
    }

    fn err(&self, i: usize, v: &str) -> CliError {
        CliError::Schema(format!("line {}: bad {} value {v:?}", self.line, self.header[i]))
    }

    fn parse<T: std::str::FromStr>(&self, i: usize) -> Result<T, CliError> {
        let v = self.raw(i)?;
        v.parse().map_err(|_| self.err(i, v))
    }

    fn opt<T: std::str::FromStr>(&self, i: usize) -> Result<Option<T>, CliError> {
        let v = self.raw(i)?;
        if v.is_empty() {
            Ok(None)
        } else {
            v.parse().map(Some).map_err(|_| self.err(i, v))
        }
    }

    fn text(&self, i: usize) -> Result<String, CliError> {
        Ok(self.raw(i)?.to_string())
    }
}

fn read_records<T>(
    text: &str,
    header: &[&str],
    mut row: impl FnMut(&Fields<'_>) -> Result<T, CliError>,
) -> Result<Vec<T>, CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let found = reader.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(CliError::Schema(format!("expected header {:?}, found {:?}", header.join(","), found.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let fields = Fields { record: &record, line: i + 2, header };
        let version: u32 = fields.parse(0)?;
        if version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!("line {}: schema version {version}, expected {SCHEMA_VERSION}", i + 2)));
        }
        out.push(row(&fields)?);
    }
    Ok(out)
}

/// Parses a run CSV, validating the header and the schema version of every row.
pub fn parse_run_csv(text: &str) -> Result<Vec<RunRow>, CliError> {
    read_records(text, &RUN_HEADER, |f| {
        Ok(RunRow {
            trial: f.parse(1)?,
            seed: f.parse(2)?,
            horizon: f.parse(3)?,
            eta: f.parse(4)?,
            gamma: f.parse(5)?,
            learner: f.text(6)?,
            env: f.text(7)?,
            pseudo_regret: f.parse(8)?,
            ln_pi_final: f.parse(9)?,
            pi_t1: f.opt(10)?,
            pi_t1t2: f.opt(11)?,
            e1: f.opt(12)?,
            e2: f.opt(13)?,
            recovered: f.parse(14)?,
            second_moment_sum: f.parse(15)?,
            bias_sum: f.parse(16)?,
            arm1_pulls_phase1: f.parse(17)?,
        })
    })
}

pub fn parse_path_csv(text: &str) -> Result<Vec<PathRow>, CliError> {
    read_records(text, &PATH_HEADER, |f| {
        Ok(PathRow {
            learner: f.text(1)?,
            env: f.text(2)?,
            horizon: f.parse(3)?,
            eta: f.parse(4)?,
            gamma: f.parse(5)?,
            t: f.parse(6)?,
            mean_pi1: f.parse(7)?,
        })
    })
}
