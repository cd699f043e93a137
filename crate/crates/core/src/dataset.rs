//! Recording data model, the on-disk CSV formats, epoch extraction,
//! train/test splitting and time-shift augmentation.
//!
//! A recording `<stem>` on disk is three files:
//!
//! * `<stem>.csv`: header `t,ax,ay,az`, one row per sample, `t` in seconds
//!   (uniform), accelerations in m/s².
//! * `<stem>.annotations.csv`: header `start_index,end_index,label`, one
//!   half-open sample range per row, labels `M1..M4` or `R1..R19`.
//! * `<stem>.meta`: `key=value` lines with `subject_id`, `group`, `session`,
//!   `hand`, `scenario` and `fs_hz`.
//!
//! All numbers use period decimals.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{self, Epoch, EpochSource, Sample, TimeSeries3D};

/// Number of key movement classes.
pub const NUM_CLASSES: usize = 4;

/// Default maximum circular shift, as a fraction of the epoch length.
pub const DEFAULT_SHIFT_FRACTION: f64 = 0.2;

/// Key movements M1..M4 and the non-target daily activities R1..R19.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MovementLabel {
    /// Shoulder extension/flexion.
    M1,
    /// Shoulder abduction.
    M2,
    /// External/internal shoulder rotation.
    M3,
    /// Elbow flexion/extension.
    M4,
    /// Non-target activity `R<k>`, `k` in 1..=19.
    Other(u8),
}

impl MovementLabel {
    pub const KEY: [MovementLabel; NUM_CLASSES] =
        [MovementLabel::M1, MovementLabel::M2, MovementLabel::M3, MovementLabel::M4];

    pub fn other(k: u8) -> Result<Self> {
        if (1..=19).contains(&k) {
            Ok(MovementLabel::Other(k))
        } else {
            Err(Error::Contract(format!("non-target movement index must be in 1..=19, got {k}")))
        }
    }

    /// Class index 0..4 for key movements, `None` for distractors.
    pub fn class_index(self) -> Option<usize> {
        match self {
            MovementLabel::M1 => Some(0),
            MovementLabel::M2 => Some(1),
            MovementLabel::M3 => Some(2),
            MovementLabel::M4 => Some(3),
            MovementLabel::Other(_) => None,
        }
    }

    pub fn from_class_index(i: usize) -> Option<Self> {
        Self::KEY.get(i).copied()
    }

    pub fn is_key(self) -> bool {
        self.class_index().is_some()
    }
}

impl fmt::Display for MovementLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MovementLabel::M1 => f.write_str("M1"),
            MovementLabel::M2 => f.write_str("M2"),
            MovementLabel::M3 => f.write_str("M3"),
            MovementLabel::M4 => f.write_str("M4"),
            MovementLabel::Other(k) => write!(f, "R{k}"),
        }
    }
}

impl FromStr for MovementLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Contract(format!("unknown movement label `{s}`"));
        match s {
            "M1" => Ok(MovementLabel::M1),
            "M2" => Ok(MovementLabel::M2),
            "M3" => Ok(MovementLabel::M3),
            "M4" => Ok(MovementLabel::M4),
            _ => {
                let k: u8 = s.strip_prefix('R').ok_or_else(bad)?.parse().map_err(|_| bad())?;
                MovementLabel::other(k)
            }
        }
    }
}

impl Serialize for MovementLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MovementLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! keyword_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::Contract(format!(
                        concat!("unknown ", stringify!($name), " `{}`"), other
                    ))),
                }
            }
        }
    };
}

keyword_enum!(Group { Healthy => "healthy", Patient => "patient" });
keyword_enum!(Hand { Dominant => "dominant", NonDominant => "nondominant", Both => "both" });
keyword_enum!(
    /// L1 is the constrained repetition protocol, L2 the free stream with distractors.
    Scenario { L1 => "L1", L2 => "L2" }
);

/// Half-open sample range `[start, end)` carrying a movement label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub start: usize,
    pub end: usize,
    pub label: MovementLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    /// File stem; used as the epoch source id.
    pub id: String,
    pub subject_id: String,
    pub group: Group,
    pub session: u32,
    pub hand: Hand,
    pub scenario: Scenario,
    /// Timestamp of the first sample, seconds.
    pub t0: f64,
    pub series: TimeSeries3D,
    pub annotations: Vec<Annotation>,
}

impl Recording {
    /// Check the cross-field invariants: annotation ranges inside the series,
    /// non-empty and non-overlapping; healthy subjects only have session 1;
    /// patient sessions are 1..=4.
    pub fn validate(&self) -> Result<()> {
        match self.group {
            Group::Healthy if self.session != 1 => {
                return Err(Error::Contract(format!(
                    "healthy recordings have session 1, got {}",
                    self.session
                )))
            }
            Group::Patient if !(1..=4).contains(&self.session) => {
                return Err(Error::Contract(format!(
                    "patient session must be in 1..=4, got {}",
                    self.session
                )))
            }
            _ => {}
        }
        let n = self.series.len();
        let mut sorted: Vec<&Annotation> = self.annotations.iter().collect();
        sorted.sort_by_key(|a| a.start);
        for a in &sorted {
            if a.start >= a.end || a.end > n {
                return Err(Error::Contract(format!(
                    "annotation [{}, {}) invalid for series of length {n}",
                    a.start, a.end
                )));
            }
        }
        for pair in sorted.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(Error::Contract(format!(
                    "annotations [{}, {}) and [{}, {}) overlap",
                    pair[0].start, pair[0].end, pair[1].start, pair[1].end
                )));
            }
        }
        Ok(())
    }
}

/// Paths of the three files that make up a recording.
#[derive(Debug, Clone)]
pub struct RecordingFiles {
    pub samples: PathBuf,
    pub annotations: PathBuf,
    pub meta: PathBuf,
}

impl RecordingFiles {
    pub fn new(dir: &Path, stem: &str) -> Self {
        Self {
            samples: dir.join(format!("{stem}.csv")),
            annotations: dir.join(format!("{stem}.annotations.csv")),
            meta: dir.join(format!("{stem}.meta")),
        }
    }

    /// Sidecar paths next to a samples CSV.
    pub fn from_samples_path(path: &Path) -> Result<(Self, String)> {
        let stem = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix(".csv"))
            .ok_or_else(|| Error::Contract(format!("{} is not a .csv file", path.display())))?
            .to_owned();
        let dir = path.parent().unwrap_or(Path::new(""));
        Ok((Self::new(dir, &stem), stem))
    }
}

struct Meta {
    subject_id: String,
    group: Group,
    session: u32,
    hand: Hand,
    scenario: Scenario,
    fs: f64,
}

const META_KEYS: [&str; 6] = ["subject_id", "group", "session", "hand", "scenario", "fs_hz"];

fn parse_meta(name: &str, text: &str) -> Result<Meta> {
    let mut values: BTreeMap<&str, (u64, &str)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| Error::parse(name, line_no, line, "expected key=value"))?;
        let (k, v) = (k.trim(), v.trim());
        if !META_KEYS.contains(&k) {
            return Err(Error::parse(name, line_no, k, "unknown metadata key"));
        }
        if values.insert(k, (line_no, v)).is_some() {
            return Err(Error::parse(name, line_no, k, "duplicate metadata key"));
        }
    }
    let get =
        |k: &str| values.get(k).copied().ok_or_else(|| Error::parse(name, 0, k, "missing metadata key"));
    fn field<T: FromStr>(name: &str, (line, v): (u64, &str), key: &str) -> Result<T> {
        v.parse().map_err(|_| Error::parse(name, line, key, format!("invalid value `{v}`")))
    }
    let fs: f64 = field(name, get("fs_hz")?, "fs_hz")?;
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::parse(name, get("fs_hz")?.0, "fs_hz", "must be positive"));
    }
    Ok(Meta {
        subject_id: get("subject_id")?.1.to_owned(),
        group: field(name, get("group")?, "group")?,
        session: field(name, get("session")?, "session")?,
        hand: field(name, get("hand")?, "hand")?,
        scenario: field(name, get("scenario")?, "scenario")?,
        fs,
    })
}

fn expect_header(name: &str, headers: &csv::StringRecord, want: &[&str]) -> Result<()> {
    for (i, col) in want.iter().enumerate() {
        match headers.get(i) {
            Some(h) if h.trim() == *col => {}
            Some(h) => {
                return Err(Error::parse(
                    name,
                    1,
                    *col,
                    format!("expected column `{col}` at position {}, found `{h}`", i + 1),
                ))
            }
            None => return Err(Error::parse(name, 1, *col, "missing column")),
        }
    }
    if headers.len() > want.len() {
        return Err(Error::parse(name, 1, &headers[want.len()], "unexpected extra column"));
    }
    Ok(())
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(r)
}

fn csv_err(name: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::parse(name, line, "-", e.to_string())
}

fn read_rows<R: Read>(name: &str, r: R, columns: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rdr = csv_reader(r);
    let headers = rdr.headers().map_err(|e| csv_err(name, e))?.clone();
    expect_header(name, &headers, columns)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(name, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != columns.len() {
            let field = columns.get(rec.len()).copied().unwrap_or("-");
            return Err(Error::parse(
                name,
                line,
                field,
                format!("expected {} fields, found {}", columns.len(), rec.len()),
            ));
        }
        rows.push((line, rec));
    }
    Ok(rows)
}

fn parse_samples<R: Read>(name: &str, r: R, fs: f64) -> Result<(f64, Vec<Sample>)> {
    const COLS: [&str; 4] = ["t", "ax", "ay", "az"];
    let rows = read_rows(name, r, &COLS)?;
    let mut t0 = 0.0;
    let mut samples = Vec::with_capacity(rows.len());
    let tol = 1e-3 / fs;
    for (n, (line, rec)) in rows.iter().enumerate() {
        let mut vals = [0.0; 4];
        for (i, col) in COLS.iter().enumerate() {
            let v: f64 = rec[i]
                .parse()
                .map_err(|_| Error::parse(name, *line, *col, format!("not a number: `{}`", &rec[i])))?;
            if !v.is_finite() {
                return Err(Error::parse(name, *line, *col, "non-finite value"));
            }
            vals[i] = v;
        }
        if n == 0 {
            t0 = vals[0];
        } else if (vals[0] - (t0 + n as f64 / fs)).abs() > tol {
            return Err(Error::parse(
                name,
                *line,
                "t",
                format!("timestamp {} breaks uniform sampling at {fs} Hz", vals[0]),
            ));
        }
        samples.push([vals[1], vals[2], vals[3]]);
    }
    Ok((t0, samples))
}

fn parse_annotations<R: Read>(name: &str, r: R, len: usize) -> Result<Vec<Annotation>> {
    const COLS: [&str; 3] = ["start_index", "end_index", "label"];
    let rows = read_rows(name, r, &COLS)?;
    let mut out: Vec<(u64, Annotation)> = Vec::with_capacity(rows.len());
    for (line, rec) in rows {
        let index = |i: usize| -> Result<usize> {
            rec[i]
                .parse()
                .map_err(|_| Error::parse(name, line, COLS[i], format!("not a sample index: `{}`", &rec[i])))
        };
        let start = index(0)?;
        let end = index(1)?;
        let label: MovementLabel =
            rec[2].parse().map_err(|e: Error| Error::parse(name, line, "label", e.to_string()))?;
        if start >= end {
            return Err(Error::parse(name, line, "end_index", "end must be greater than start"));
        }
        if end > len {
            return Err(Error::parse(
                name,
                line,
                "end_index",
                format!("range ends past the series ({len} samples)"),
            ));
        }
        if let Some((other, _)) = out.iter().find(|(_, a)| start < a.end && a.start < end) {
            return Err(Error::parse(
                name,
                line,
                "start_index",
                format!("overlaps the annotation on line {other}"),
            ));
        }
        out.push((line, Annotation { start, end, label }));
    }
    Ok(out.into_iter().map(|(_, a)| a).collect())
}

/// Parse a recording from its three components. The `*_name` arguments label
/// diagnostics.
pub fn parse_recording_from<R1: Read, R2: Read>(
    id: &str,
    samples: (R1, &str),
    annotations: (R2, &str),
    meta: (&str, &str),
) -> Result<Recording> {
    let m = parse_meta(meta.1, meta.0)?;
    let (t0, data) = parse_samples(samples.1, samples.0, m.fs)?;
    let annotations = parse_annotations(annotations.1, annotations.0, data.len())?;
    let series = TimeSeries3D::acceleration(m.fs, data)?;
    let rec = Recording {
        id: id.to_owned(),
        subject_id: m.subject_id,
        group: m.group,
        session: m.session,
        hand: m.hand,
        scenario: m.scenario,
        t0,
        series,
        annotations,
    };
    rec.validate().map_err(|e| Error::parse(meta.1, 0, "session", e.to_string()))?;
    Ok(rec)
}

/// Parse `<stem>.csv` together with its sidecars.
pub fn parse_recording(samples_path: &Path) -> Result<Recording> {
    let (files, stem) = RecordingFiles::from_samples_path(samples_path)?;
    let open = |p: &Path| fs::File::open(p).map_err(|e| Error::io(p, e));
    let meta = fs::read_to_string(&files.meta).map_err(|e| Error::io(&files.meta, e))?;
    parse_recording_from(
        &stem,
        (open(&files.samples)?, &files.samples.display().to_string()),
        (open(&files.annotations)?, &files.annotations.display().to_string()),
        (&meta, &files.meta.display().to_string()),
    )
}

/// Canonical text of the three recording files: (samples, annotations, meta).
pub fn render_recording(rec: &Recording) -> (String, String, String) {
    use std::fmt::Write;
    let fs = rec.series.fs();
    let mut samples = String::from("t,ax,ay,az\n");
    for (n, s) in rec.series.samples().iter().enumerate() {
        let t = rec.t0 + n as f64 / fs;
        writeln!(samples, "{t},{},{},{}", s[0], s[1], s[2]).unwrap();
    }
    let mut ann = String::from("start_index,end_index,label\n");
    for a in &rec.annotations {
        writeln!(ann, "{},{},{}", a.start, a.end, a.label).unwrap();
    }
    let meta = format!(
        "subject_id={}\ngroup={}\nsession={}\nhand={}\nscenario={}\nfs_hz={}\n",
        rec.subject_id, rec.group, rec.session, rec.hand, rec.scenario, fs
    );
    (samples, ann, meta)
}

/// Write a recording as `<dir>/<rec.id>.{csv,annotations.csv,meta}`.
pub fn write_recording(rec: &Recording, dir: &Path) -> Result<RecordingFiles> {
    rec.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = RecordingFiles::new(dir, &rec.id);
    let (samples, ann, meta) = render_recording(rec);
    for (path, text) in [(&files.samples, samples), (&files.annotations, ann), (&files.meta, meta)] {
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(files)
}

/// Every recording in `dir`, ordered by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<Recording>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".csv") && !n.ends_with(".annotations.csv"))
        })
        .collect();
    paths.sort();
    paths.iter().map(|p| parse_recording(p)).collect()
}

/// Resampled key-movement window with its class.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEpoch {
    pub epoch: Epoch,
    pub label: MovementLabel,
}

impl LabeledEpoch {
    /// Class index; panics for distractor labels, which never reach the classifier.
    pub fn class(&self) -> usize {
        self.label.class_index().expect("labeled epochs carry key movements only")
    }
}

#[derive(Debug, Clone, Default)]
pub struct EpochExtraction {
    pub epochs: Vec<LabeledEpoch>,
    /// Key-movement annotations skipped for being shorter than 2 samples.
    pub skipped: usize,
}

/// One epoch per M1..M4 annotation, its segment resampled to `w` samples.
/// Distractor annotations are ignored.
pub fn extract_epochs(rec: &Recording, w: usize) -> Result<EpochExtraction> {
    let mut out = EpochExtraction::default();
    for a in rec.annotations.iter().filter(|a| a.label.is_key()) {
        if a.end - a.start < 2 {
            out.skipped += 1;
            continue;
        }
        let seg = signal::resample(&rec.series.slice(a.start, a.end)?, w)?;
        out.epochs.push(LabeledEpoch {
            epoch: Epoch {
                samples: seg.into_samples(),
                source: EpochSource { recording_id: rec.id.clone(), offset: a.start },
            },
            label: a.label,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { train_fraction: 0.8, seed: 0, stratified: true }
    }
}

/// Sorted train and test index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partition `0..labels.len()` given class indices. Per-class train counts are
/// `round(n_class * train_fraction)` when stratified.
pub fn split_indices(labels: &[usize], cfg: &SplitConfig) -> Result<SplitIndices> {
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::Contract(format!("train fraction must be in (0, 1), got {}", cfg.train_fraction)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    let groups: Vec<Vec<usize>> = if cfg.stratified {
        let n_classes = labels.iter().max().map_or(NUM_CLASSES, |m| (m + 1).max(NUM_CLASSES));
        let mut g = vec![Vec::new(); n_classes];
        for (i, &c) in labels.iter().enumerate() {
            g[c].push(i);
        }
        if let Some(c) = g.iter().position(Vec::is_empty) {
            return Err(Error::Contract(format!("stratified split: class {c} has no epochs")));
        }
        g
    } else {
        vec![(0..labels.len()).collect()]
    };
    for mut g in groups {
        g.shuffle(&mut rng);
        let k = (g.len() as f64 * cfg.train_fraction).round() as usize;
        train.extend_from_slice(&g[..k]);
        test.extend_from_slice(&g[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

pub fn split_train_test(
    epochs: &[LabeledEpoch],
    cfg: &SplitConfig,
) -> Result<(Vec<LabeledEpoch>, Vec<LabeledEpoch>)> {
    let labels: Vec<usize> = epochs
        .iter()
        .map(|e| {
            e.label
                .class_index()
                .ok_or_else(|| Error::Contract(format!("epoch labeled {} is not a key movement", e.label)))
        })
        .collect::<Result<_>>()?;
    let idx = split_indices(&labels, cfg)?;
    let pick = |ix: &[usize]| ix.iter().map(|&i| epochs[i].clone()).collect();
    Ok((pick(&idx.train), pick(&idx.test)))
}

/// Circular shift by `k` samples: sample `i` moves to `(i + k) mod W`.
pub fn shift_epoch(epoch: &LabeledEpoch, k: isize) -> LabeledEpoch {
    let mut out = epoch.clone();
    let w = out.epoch.samples.len();
    if w > 0 {
        let k = k.rem_euclid(w as isize) as usize;
        out.epoch.samples.rotate_right(k);
    }
    out
}

/// Circularly shift by an offset drawn uniformly from
/// `[-floor(max_frac*W), +floor(max_frac*W)]`.
pub fn augment_shift<R: Rng + ?Sized>(
    epoch: &LabeledEpoch,
    max_frac: f64,
    rng: &mut R,
) -> Result<LabeledEpoch> {
    if !(0.0..=0.5).contains(&max_frac) {
        return Err(Error::Contract(format!("shift fraction must be in [0, 0.5], got {max_frac}")));
    }
    let span = (max_frac * epoch.epoch.len() as f64).floor() as i64;
    let k = rng.random_range(-span..=span);
    Ok(shift_epoch(epoch, k as isize))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec_with(annotations: Vec<Annotation>, len: usize) -> Recording {
        let samples = (0..len).map(|i| [i as f64, (i as f64).sin(), 1.0]).collect();
        Recording {
            id: "r".into(),
            subject_id: "s".into(),
            group: Group::Patient,
            session: 2,
            hand: Hand::Dominant,
            scenario: Scenario::L1,
            t0: 0.0,
            series: TimeSeries3D::acceleration(50.0, samples).unwrap(),
            annotations,
        }
    }

    fn labeled(n_per_class: usize, w: usize) -> Vec<LabeledEpoch> {
        let mut v = Vec::new();
        for c in 0..NUM_CLASSES {
            for i in 0..n_per_class {
                v.push(LabeledEpoch {
                    epoch: Epoch {
                        samples: (0..w).map(|j| [j as f64, c as f64, i as f64]).collect(),
                        source: EpochSource { recording_id: format!("c{c}"), offset: i },
                    },
                    label: MovementLabel::from_class_index(c).unwrap(),
                });
            }
        }
        v
    }

    #[test]
    fn labels_round_trip_text() {
        for s in ["M1", "M2", "M3", "M4", "R1", "R19"] {
            assert_eq!(s.parse::<MovementLabel>().unwrap().to_string(), s);
        }
        for s in ["R0", "R20", "M5", "x", ""] {
            assert!(s.parse::<MovementLabel>().is_err(), "{s}");
        }
        assert!(MovementLabel::other(20).is_err());
    }

    #[test]
    fn healthy_session_must_be_one() {
        let mut r = rec_with(vec![], 10);
        r.group = Group::Healthy;
        assert!(r.validate().is_err());
        r.session = 1;
        r.validate().unwrap();
    }

    #[test]
    fn extract_resamples_key_segments_only() {
        let anns = vec![
            Annotation { start: 0, end: 90, label: MovementLabel::M2 },
            Annotation { start: 100, end: 210, label: MovementLabel::M2 },
            Annotation { start: 220, end: 360, label: MovementLabel::M2 },
            Annotation { start: 370, end: 380, label: MovementLabel::Other(5) },
        ];
        let rec = rec_with(anns, 400);
        let ex = extract_epochs(&rec, 128).unwrap();
        assert_eq!(ex.epochs.len(), 3);
        assert!(ex.epochs.iter().all(|e| e.epoch.len() == 128 && e.label == MovementLabel::M2));
        let want = signal::resample(&rec.series.slice(100, 210).unwrap(), 128).unwrap();
        assert_eq!(ex.epochs[1].epoch.samples, want.samples());
        assert_eq!(ex.epochs[1].epoch.source.offset, 100);
    }

    #[test]
    fn extract_skips_distractors_and_tiny_segments() {
        let rec = rec_with(
            vec![
                Annotation { start: 0, end: 30, label: MovementLabel::Other(5) },
                Annotation { start: 40, end: 41, label: MovementLabel::M1 },
            ],
            50,
        );
        let ex = extract_epochs(&rec, 16).unwrap();
        assert!(ex.epochs.is_empty());
        assert_eq!(ex.skipped, 1);
    }

    #[test]
    fn stratified_counts() {
        let e = labeled(40, 4);
        let (train, test) = split_train_test(&e, &SplitConfig { seed: 1, ..Default::default() }).unwrap();
        for c in 0..NUM_CLASSES {
            assert_eq!(train.iter().filter(|x| x.class() == c).count(), 32);
            assert_eq!(test.iter().filter(|x| x.class() == c).count(), 8);
        }
    }

    #[test]
    fn unstratified_counts() {
        let e = labeled(25, 4);
        let cfg = SplitConfig { stratified: false, seed: 3, ..Default::default() };
        let (train, test) = split_train_test(&e, &cfg).unwrap();
        assert_eq!((train.len(), test.len()), (80, 20));
    }

    #[test]
    fn split_is_seed_deterministic() {
        let labels: Vec<usize> = (0..200).map(|i| i % 4).collect();
        let cfg = |seed| SplitConfig { seed, ..Default::default() };
        let a = split_indices(&labels, &cfg(7)).unwrap();
        let b = split_indices(&labels, &cfg(7)).unwrap();
        let c = split_indices(&labels, &cfg(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn split_rejects_empty_class_and_bad_fraction() {
        let labels = vec![0, 1, 2, 0];
        assert!(split_indices(&labels, &SplitConfig::default()).is_err());
        let cfg = SplitConfig { train_fraction: 1.0, ..Default::default() };
        assert!(split_indices(&[0, 1, 2, 3], &cfg).is_err());
    }

    #[test]
    fn shift_identity_and_inverse() {
        let e = labeled(1, 16).remove(0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(augment_shift(&e, 0.0, &mut rng).unwrap(), e);
        for k in [-7, -1, 1, 3, 15, 16, 40] {
            assert_eq!(shift_epoch(&shift_epoch(&e, k), -k), e);
        }
        assert_eq!(shift_epoch(&e, 1).epoch.samples[1], e.epoch.samples[0]);
        assert!(augment_shift(&e, 0.6, &mut rng).is_err());
        assert!(augment_shift(&e, -0.1, &mut rng).is_err());
    }

    #[test]
    fn shift_is_seed_deterministic() {
        let e = labeled(1, 64).remove(0);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10).map(|_| augment_shift(&e, 0.2, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(11), run(11));
    }

    #[test]
    fn meta_rejects_unknown_and_missing_keys() {
        let ok = "subject_id=a\ngroup=healthy\nsession=1\nhand=both\nscenario=L1\nfs_hz=50\n";
        parse_meta("m", ok).unwrap();
        let unknown = format!("{ok}color=red\n");
        assert!(matches!(parse_meta("m", &unknown), Err(Error::Parse { line: 7, .. })));
        let missing = ok.replace("hand=both\n", "");
        assert!(matches!(parse_meta("m", &missing), Err(Error::Parse { ref field, .. }) if field == "hand"));
    }
}
