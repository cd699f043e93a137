//! Jerk-based smoothness assessment: per-segment statistics, cohort
//! comparison, session-over-session improvement and report rendering.
//!
//! Values for the published tables come in through a small CSV fixture
//! format with columns `movement,statistic,cohort_or_session,value`. Leading
//! `# key: value` comment lines carry metadata (`patient`, `measure`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Group, MovementLabel, Recording};
use crate::error::{Error, Result};
use crate::signal::{
    differentiate, segment_stats, squared_jerk, Axis, AxisStats, Statistic, Summary, TimeSeries3D,
};

/// Which jerk-derived signal a statistic was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Jerk,
    SquaredJerk,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Jerk => "jerk",
            Measure::SquaredJerk => "squared_jerk",
        }
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "jerk" => Ok(Measure::Jerk),
            "squared_jerk" => Ok(Measure::SquaredJerk),
            other => Err(Error::Contract(format!("unknown measure `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessRecord {
    pub subject_id: String,
    pub group: Group,
    pub session: u32,
    pub movement: MovementLabel,
    pub jerk_stats: AxisStats,
    pub squared_jerk_stats: AxisStats,
}

impl SmoothnessRecord {
    pub fn stats(&self, measure: Measure) -> &AxisStats {
        match measure {
            Measure::Jerk => &self.jerk_stats,
            Measure::SquaredJerk => &self.squared_jerk_stats,
        }
    }
}

/// Jerk and squared-jerk statistics of one acceleration segment.
pub fn movement_smoothness(segment: &TimeSeries3D) -> Result<(AxisStats, AxisStats)> {
    let jerk = differentiate(segment)?;
    let sq = squared_jerk(&jerk)?;
    Ok((segment_stats(&jerk)?, segment_stats(&sq)?))
}

/// One record per key-movement annotation of `rec`.
pub fn assess_recording(rec: &Recording) -> Result<Vec<SmoothnessRecord>> {
    rec.annotations
        .iter()
        .filter(|a| a.label.is_key())
        .map(|a| {
            let segment = rec.series.slice(a.start, a.end)?;
            let (jerk_stats, squared_jerk_stats) = movement_smoothness(&segment).map_err(|e| {
                Error::Degenerate(format!("{} segment [{}, {}): {e}", rec.id, a.start, a.end))
            })?;
            Ok(SmoothnessRecord {
                subject_id: rec.subject_id.clone(),
                group: rec.group,
                session: rec.session,
                movement: a.label,
                jerk_stats,
                squared_jerk_stats,
            })
        })
        .collect()
}

/// Mean of means, max of maxes, min of mins. `None` for no input.
pub fn aggregate<'a>(summaries: impl IntoIterator<Item = &'a Summary>) -> Option<Summary> {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for s in summaries {
        n += 1;
        sum += s.mean;
        max = max.max(s.max);
        min = min.min(s.min);
    }
    (n > 0).then(|| Summary { mean: sum / n as f64, max, min })
}

/// Per-movement, per-axis summaries for one cohort.
pub type CohortStats = BTreeMap<MovementLabel, BTreeMap<Axis, Summary>>;

/// Aggregate the records of `group` into cohort statistics over all axes.
pub fn cohort_stats(records: &[SmoothnessRecord], group: Group, measure: Measure) -> CohortStats {
    let mut out = CohortStats::new();
    for m in MovementLabel::KEY {
        let rows: Vec<&AxisStats> = records
            .iter()
            .filter(|r| r.group == group && r.movement == m)
            .map(|r| r.stats(measure))
            .collect();
        let per_axis: BTreeMap<Axis, Summary> =
            Axis::ALL.iter().filter_map(|&a| Some((a, aggregate(rows.iter().map(|s| s.axis(a)))?))).collect();
        if !per_axis.is_empty() {
            out.insert(m, per_axis);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HealthyHigher,
    PatientHigher,
    Equal,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::HealthyHigher => "healthy_higher",
            Direction::PatientHigher => "patient_higher",
            Direction::Equal => "equal",
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            Direction::HealthyHigher => Direction::PatientHigher,
            Direction::PatientHigher => Direction::HealthyHigher,
            Direction::Equal => Direction::Equal,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub healthy: f64,
    pub patient: f64,
    /// `|patient| / |healthy|`; 1 for equal values, `None` when only the
    /// healthy value is zero.
    pub ratio: Option<f64>,
    /// Which cohort has the larger magnitude.
    pub direction: Direction,
}

impl ComparisonCell {
    pub fn new(healthy: f64, patient: f64) -> Self {
        let (h, p) = (healthy.abs(), patient.abs());
        let ratio = if h == p {
            Some(1.0)
        } else if h == 0.0 {
            None
        } else {
            Some(p / h)
        };
        let direction = if h > p {
            Direction::HealthyHigher
        } else if p > h {
            Direction::PatientHigher
        } else {
            Direction::Equal
        };
        Self { healthy, patient, ratio, direction }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortComparison {
    pub cells: BTreeMap<MovementLabel, BTreeMap<Axis, [ComparisonCell; 3]>>,
}

impl CohortComparison {
    pub fn get(&self, movement: MovementLabel, axis: Axis, stat: Statistic) -> Option<&ComparisonCell> {
        let i = Statistic::ALL.iter().position(|s| *s == stat)?;
        self.cells.get(&movement)?.get(&axis).map(|c| &c[i])
    }
}

/// Cell-wise comparison over M1..M4 and every axis both cohorts provide.
pub fn cohort_compare(healthy: &CohortStats, patient: &CohortStats) -> Result<CohortComparison> {
    let mut cells = BTreeMap::new();
    for m in MovementLabel::KEY {
        let h = healthy
            .get(&m)
            .ok_or_else(|| Error::InvalidData(format!("healthy cohort has no {m} statistics")))?;
        let p = patient
            .get(&m)
            .ok_or_else(|| Error::InvalidData(format!("patient cohort has no {m} statistics")))?;
        let per_axis: BTreeMap<Axis, [ComparisonCell; 3]> = h
            .iter()
            .filter_map(|(axis, hs)| {
                let ps = p.get(axis)?;
                Some((*axis, Statistic::ALL.map(|s| ComparisonCell::new(hs.get(s), ps.get(s)))))
            })
            .collect();
        if per_axis.is_empty() {
            return Err(Error::InvalidData(format!("cohorts share no axis for {m}")));
        }
        cells.insert(m, per_axis);
    }
    Ok(CohortComparison { cells })
}

/// One patient's per-session summaries of a single axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTable {
    pub patient_id: Option<String>,
    pub axis: Axis,
    pub rows: BTreeMap<MovementLabel, BTreeMap<u32, Summary>>,
}

impl SessionTable {
    /// Aggregate squared-jerk records of one patient by movement and session.
    pub fn from_records(records: &[SmoothnessRecord], axis: Axis) -> Result<Self> {
        let mut ids: Vec<&str> = records.iter().map(|r| r.subject_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() > 1 {
            return Err(Error::Contract(format!(
                "session evolution expects one subject, got {}",
                ids.join(", ")
            )));
        }
        let mut rows = BTreeMap::new();
        for m in MovementLabel::KEY {
            let mut sessions = BTreeMap::new();
            for s in 1..=4 {
                let stats = records
                    .iter()
                    .filter(|r| r.movement == m && r.session == s)
                    .map(|r| r.squared_jerk_stats.axis(axis));
                if let Some(summary) = aggregate(stats) {
                    sessions.insert(s, summary);
                }
            }
            if !sessions.is_empty() {
                rows.insert(m, sessions);
            }
        }
        Ok(Self { patient_id: ids.first().map(|s| s.to_string()), axis, rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementFlags {
    pub movement: MovementLabel,
    /// Session-1 mean.
    pub baseline: f64,
    pub improved_sessions: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementFlags {
    pub patient_id: Option<String>,
    pub axis: Axis,
    pub rows: Vec<MovementFlags>,
}

impl ImprovementFlags {
    pub fn improved(&self, movement: MovementLabel) -> Option<&[u32]> {
        self.rows.iter().find(|r| r.movement == movement).map(|r| r.improved_sessions.as_slice())
    }

    /// Movements with at least one improved session.
    pub fn improved_movements(&self) -> usize {
        self.rows.iter().filter(|r| !r.improved_sessions.is_empty()).count()
    }
}

/// A later session counts as improved when its mean is strictly below the
/// session-1 mean.
pub fn improvement_flags(table: &SessionTable) -> Result<ImprovementFlags> {
    let mut rows = Vec::with_capacity(table.rows.len());
    for (movement, sessions) in &table.rows {
        let baseline = sessions
            .get(&1)
            .ok_or_else(|| Error::InvalidData(format!("{movement} has no session 1 baseline")))?
            .mean;
        let improved_sessions =
            sessions.iter().filter(|(s, v)| **s > 1 && v.mean < baseline).map(|(s, _)| *s).collect();
        rows.push(MovementFlags { movement: *movement, baseline, improved_sessions });
    }
    Ok(ImprovementFlags { patient_id: table.patient_id.clone(), axis: table.axis, rows })
}

/// Improvement flags straight from one patient's records.
pub fn session_evolution(records: &[SmoothnessRecord], axis: Axis) -> Result<ImprovementFlags> {
    improvement_flags(&SessionTable::from_records(records, axis)?)
}

/// Column of a fixture row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Column {
    Cohort(Group),
    Session(u32),
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if let Ok(g) = t.parse::<Group>() {
            return Ok(Column::Cohort(g));
        }
        let n = t.strip_prefix("session").unwrap_or(&t).trim();
        match n.parse::<u32>() {
            Ok(k) if (1..=4).contains(&k) => Ok(Column::Session(k)),
            _ => Err(Error::Contract(format!("expected healthy, patient or session1..session4, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureRow {
    pub movement: MovementLabel,
    pub statistic: Statistic,
    pub column: Column,
    pub value: f64,
}

/// A published table in fixture form. All values are axis-x.
#[derive(Debug, Clone, PartialEq)]
pub struct TableFixture {
    pub patient: Option<String>,
    pub measure: Option<Measure>,
    pub rows: Vec<FixtureRow>,
}

const FIXTURE_HEADER: [&str; 4] = ["movement", "statistic", "cohort_or_session", "value"];

pub fn parse_fixture(text: &str, name: &str) -> Result<TableFixture> {
    let mut patient = None;
    let mut measure = None;
    for (i, line) in text.lines().enumerate() {
        let Some(comment) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        if let Some((k, v)) = comment.split_once(':') {
            let line_no = i as u64 + 1;
            match k.trim() {
                "patient" => patient = Some(v.trim().to_string()),
                "measure" => {
                    measure = Some(
                        v.parse()
                            .map_err(|e: Error| Error::parse(name, line_no, "measure", e.to_string()))?,
                    )
                }
                _ => {}
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::parse(name, 1, "header", e.to_string()))?.clone();
    let header_line = header.position().map_or(1, |p| p.line());
    let cols: Vec<&str> = header.iter().collect();
    if cols != FIXTURE_HEADER {
        return Err(Error::parse(
            name,
            header_line,
            "header",
            format!("expected `{}`, got `{}`", FIXTURE_HEADER.join(","), cols.join(",")),
        ));
    }

    let mut rows = Vec::new();
    let mut seen = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(name, line, "row", e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let movement: MovementLabel =
            field(0).parse().map_err(|e: Error| Error::parse(name, line, "movement", e.to_string()))?;
        let statistic: Statistic =
            field(1).parse().map_err(|e: Error| Error::parse(name, line, "statistic", e.to_string()))?;
        let column: Column = field(2)
            .parse()
            .map_err(|e: Error| Error::parse(name, line, "cohort_or_session", e.to_string()))?;
        let value: f64 = field(3).parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
            Error::parse(name, line, "value", format!("not a finite number: `{}`", field(3)))
        })?;
        if let Some(prev) = seen.insert((movement, statistic, column), line) {
            return Err(Error::parse(name, line, "movement", format!("duplicate of line {prev}")));
        }
        rows.push(FixtureRow { movement, statistic, column, value });
    }
    if rows.is_empty() {
        return Err(Error::parse(name, header_line, "value", "fixture has no rows"));
    }
    let cohort = rows.iter().filter(|r| matches!(r.column, Column::Cohort(_))).count();
    if cohort != 0 && cohort != rows.len() {
        return Err(Error::parse(name, 0, "cohort_or_session", "mixes cohort and session columns"));
    }
    Ok(TableFixture { patient, measure, rows })
}

pub fn load_fixture(path: &Path) -> Result<TableFixture> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fixture(&text, &path.display().to_string())
}

impl TableFixture {
    pub fn is_cohort_table(&self) -> bool {
        matches!(self.rows[0].column, Column::Cohort(_))
    }

    fn summaries(&self) -> Result<BTreeMap<(MovementLabel, Column), Summary>> {
        let mut parts: BTreeMap<(MovementLabel, Column), [Option<f64>; 3]> = BTreeMap::new();
        for r in &self.rows {
            let i = Statistic::ALL.iter().position(|s| *s == r.statistic).unwrap();
            parts.entry((r.movement, r.column)).or_default()[i] = Some(r.value);
        }
        parts
            .into_iter()
            .map(|((m, c), v)| match v {
                [Some(mean), Some(max), Some(min)] => Ok(((m, c), Summary { mean, max, min })),
                _ => {
                    let missing: Vec<&str> = Statistic::ALL
                        .iter()
                        .zip(v)
                        .filter(|(_, x)| x.is_none())
                        .map(|(s, _)| s.name())
                        .collect();
                    Err(Error::InvalidData(format!("{m} {c:?} lacks statistic(s) {}", missing.join(", "))))
                }
            })
            .collect()
    }

    /// Healthy and patient cohort statistics (axis x).
    pub fn cohort_stats(&self) -> Result<(CohortStats, CohortStats)> {
        if !self.is_cohort_table() {
            return Err(Error::InvalidData("fixture holds session columns, not cohorts".into()));
        }
        let mut healthy = CohortStats::new();
        let mut patient = CohortStats::new();
        for ((m, c), s) in self.summaries()? {
            let target = match c {
                Column::Cohort(Group::Healthy) => &mut healthy,
                _ => &mut patient,
            };
            target.entry(m).or_default().insert(Axis::X, s);
        }
        Ok((healthy, patient))
    }

    /// Per-session table (axis x).
    pub fn session_table(&self) -> Result<SessionTable> {
        if self.is_cohort_table() {
            return Err(Error::InvalidData("fixture holds cohort columns, not sessions".into()));
        }
        let mut rows: BTreeMap<MovementLabel, BTreeMap<u32, Summary>> = BTreeMap::new();
        for ((m, c), s) in self.summaries()? {
            if let Column::Session(k) = c {
                rows.entry(m).or_default().insert(k, s);
            }
        }
        Ok(SessionTable { patient_id: self.patient.clone(), axis: Axis::X, rows })
    }
}

/// Round to six significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap()
}

/// Six significant digits, period decimal separator, no exponent.
pub fn format_sig(x: f64) -> String {
    format!("{}", round_sig(x))
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(Option<f64>),
    Text(String),
    Sessions(Vec<u32>),
}

/// A rendered report in both formats. The JSON is an array of objects keyed
/// by the CSV header names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub csv: String,
    pub json: String,
}

fn render(header: &[String], rows: &[Vec<Cell>]) -> Report {
    let mut csv = header.join(",");
    csv.push('\n');
    let mut objects = Vec::with_capacity(rows.len());
    for row in rows {
        let mut obj = serde_json::Map::new();
        let mut fields = Vec::with_capacity(row.len());
        for (name, cell) in header.iter().zip(row) {
            let (text, value) = match cell {
                Cell::Num(Some(x)) => (format_sig(*x), serde_json::json!(round_sig(*x))),
                Cell::Num(None) => (String::new(), serde_json::Value::Null),
                Cell::Text(s) => (s.clone(), serde_json::json!(s)),
                Cell::Sessions(v) => {
                    (v.iter().map(u32::to_string).collect::<Vec<_>>().join(";"), serde_json::json!(v))
                }
            };
            fields.push(text);
            obj.insert(name.clone(), value);
        }
        csv.push_str(&fields.join(","));
        csv.push('\n');
        objects.push(serde_json::Value::Object(obj));
    }
    let mut json = serde_json::to_string_pretty(&objects).unwrap();
    json.push('\n');
    Report { csv, json }
}

/// Cohort table: Mean/Max/Min x Healthy/Patient, then ratio and direction
/// per statistic.
pub fn render_comparison(comparison: &CohortComparison) -> Report {
    let mut header = vec!["movement".to_string(), "axis".to_string()];
    for s in Statistic::ALL {
        header.push(format!("{}_healthy", s.name()));
        header.push(format!("{}_patient", s.name()));
    }
    for s in Statistic::ALL {
        header.push(format!("{}_ratio", s.name()));
        header.push(format!("{}_direction", s.name()));
    }
    let mut rows = Vec::new();
    for (m, axes) in &comparison.cells {
        for (axis, cells) in axes {
            let mut row = vec![Cell::Text(m.to_string()), Cell::Text(axis.name().into())];
            for c in cells {
                row.push(Cell::Num(Some(c.healthy)));
                row.push(Cell::Num(Some(c.patient)));
            }
            for c in cells {
                row.push(Cell::Num(c.ratio));
                row.push(Cell::Text(c.direction.name().into()));
            }
            rows.push(row);
        }
    }
    render(&header, &rows)
}

/// Session table: Mean/Max/Min x Session1..4, then the improved sessions.
/// One row per flagged movement.
pub fn render_sessions(table: &SessionTable, flags: &ImprovementFlags) -> Report {
    let mut header = vec!["movement".to_string(), "axis".to_string()];
    for s in Statistic::ALL {
        for k in 1..=4 {
            header.push(format!("{}_session{k}", s.name()));
        }
    }
    header.push("improved_sessions".into());
    let mut rows = Vec::new();
    for f in &flags.rows {
        let sessions = table.rows.get(&f.movement);
        let mut row = vec![Cell::Text(f.movement.to_string()), Cell::Text(flags.axis.name().into())];
        for s in Statistic::ALL {
            for k in 1..=4 {
                row.push(Cell::Num(sessions.and_then(|v| v.get(&k)).map(|x| x.get(s))));
            }
        }
        row.push(Cell::Sessions(f.improved_sessions.clone()));
        rows.push(row);
    }
    render(&header, &rows)
}
