//! Emotion event log and the periodic reports built from it.
//!
//! The log is an append-only text file with one event per line:
//! `timestamp<TAB>label_code<TAB>confidence<TAB>request_id`, timestamps in
//! RFC 3339 UTC at whole seconds.

use std::fmt::{self, Write as _};
use std::fs::{self, File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub use chrono::{DateTime, NaiveDate, Utc};
use chrono::{SecondsFormat, Timelike};

use crate::error::{Error, Result};
use crate::label::{EmotionLabel, NUM_EMOTIONS};

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionEvent {
    pub timestamp: DateTime<Utc>,
    pub label: EmotionLabel,
    pub confidence: f64,
    pub request_id: String,
}

fn format_ts(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>> {
    let ts = DateTime::parse_from_rfc3339(s)
        .map_err(|e| Error::MalformedEvent(format!("timestamp {s:?}: {e}")))?
        .with_timezone(&Utc);
    if ts.nanosecond() != 0 {
        return Err(Error::MalformedEvent(format!("timestamp {s:?} has sub-second precision")));
    }
    Ok(ts)
}

impl EmotionEvent {
    pub fn new(
        timestamp: DateTime<Utc>,
        label: EmotionLabel,
        confidence: f64,
        request_id: impl Into<String>,
    ) -> Result<Self> {
        let event = Self {
            timestamp,
            label,
            confidence,
            request_id: request_id.into(),
        };
        event.validate()?;
        Ok(event)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::MalformedEvent(format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        if self.request_id.contains(['\t', '\n', '\r']) {
            return Err(Error::MalformedEvent("request id contains a tab or line break".into()));
        }
        if self.timestamp.nanosecond() != 0 {
            return Err(Error::MalformedEvent("timestamp has sub-second precision".into()));
        }
        Ok(())
    }

    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            format_ts(&self.timestamp),
            self.label.code(),
            self.confidence,
            self.request_id
        )
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [ts, code, confidence, request_id] = fields[..] else {
            return Err(Error::MalformedEvent(format!(
                "expected 4 tab-separated fields, got {}",
                fields.len()
            )));
        };
        let label = code
            .parse::<usize>()
            .ok()
            .and_then(EmotionLabel::from_code)
            .ok_or_else(|| Error::MalformedEvent(format!("label code {code:?}")))?;
        let confidence = confidence
            .parse::<f64>()
            .map_err(|_| Error::MalformedEvent(format!("confidence {confidence:?}")))?;
        Self::new(parse_timestamp(ts)?, label, confidence, request_id)
    }
}

/// Parses log text. A final line without a terminating newline is an
/// append still in progress and is ignored.
pub fn parse_log(text: &str) -> Result<Vec<EmotionEvent>> {
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    let mut events: Vec<EmotionEvent> = Vec::new();
    for (i, line) in complete.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let event = EmotionEvent::parse_line(line)
            .map_err(|e| Error::MalformedEvent(format!("line {}: {e}", i + 1)))?;
        if let Some(last) = events.last() {
            if event.timestamp < last.timestamp {
                return Err(Error::OutOfOrder {
                    timestamp: format_ts(&event.timestamp),
                    last: format_ts(&last.timestamp),
                });
            }
        }
        events.push(event);
    }
    Ok(events)
}

pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<EmotionEvent>> {
    let path = path.as_ref();
    match fs::read_to_string(path) {
        Ok(text) => parse_log(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Single-writer handle on a log file.
#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
    last: Option<DateTime<Utc>>,
    len: usize,
}

impl EventLog {
    /// Opens or creates the log, validating any existing content.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let existing = read_log(&path)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            last: existing.last().map(|e| e.timestamp),
            len: existing.len(),
            path,
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends one event and syncs it to disk before returning. Rejects
    /// events older than the last one logged, leaving the file unchanged.
    pub fn record(&mut self, event: &EmotionEvent) -> Result<()> {
        event.validate()?;
        if let Some(last) = self.last {
            if event.timestamp < last {
                return Err(Error::OutOfOrder {
                    timestamp: format_ts(&event.timestamp),
                    last: format_ts(&last),
                });
            }
        }
        let line = event.to_line() + "\n";
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(|e| Error::io(&self.path, e))?;
        self.last = Some(event.timestamp);
        self.len += 1;
        Ok(())
    }

    pub fn events(&self) -> Result<Vec<EmotionEvent>> {
        read_log(&self.path)
    }
}

/// Thresholds for the advisory rules.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvisoryConfig {
    /// R1 fires when the fear share strictly exceeds this.
    pub fear_share: f64,
    pub fear_min_events: u64,
    /// R2 fires when `change_count / events` strictly exceeds this.
    pub volatility: f64,
    pub volatility_min_events: u64,
    /// R3 fires when sadness is the dominant emotion over at least this many events.
    pub sadness_min_events: u64,
}

impl Default for AdvisoryConfig {
    fn default() -> Self {
        Self {
            fear_share: 0.5,
            fear_min_events: 3,
            volatility: 0.7,
            volatility_min_events: 10,
            sadness_min_events: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvisoryRule {
    FearDominant,
    HighVolatility,
    SadnessPersistent,
}

impl AdvisoryRule {
    pub fn id(self) -> &'static str {
        match self {
            AdvisoryRule::FearDominant => "R1",
            AdvisoryRule::HighVolatility => "R2",
            AdvisoryRule::SadnessPersistent => "R3",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AdvisoryRule::FearDominant => "fear-dominant",
            AdvisoryRule::HighVolatility => "high-volatility",
            AdvisoryRule::SadnessPersistent => "sadness-persistent",
        }
    }

    pub fn suggestion(self) -> &'static str {
        match self {
            AdvisoryRule::FearDominant => "seek-help suggestion",
            AdvisoryRule::HighVolatility => "review mood variability",
            AdvisoryRule::SadnessPersistent => "check in on low mood",
        }
    }
}

impl FromStr for AdvisoryRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            AdvisoryRule::FearDominant,
            AdvisoryRule::HighVolatility,
            AdvisoryRule::SadnessPersistent,
        ]
        .into_iter()
        .find(|r| r.id() == s)
        .ok_or_else(|| Error::MalformedReport(format!("unknown rule {s:?}")))
    }
}

/// A raised rule and the numbers that triggered it. Suggestions go to the
/// report reader; nothing acts on them automatically.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvisoryFlag {
    pub rule: AdvisoryRule,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub timestamp: DateTime<Utc>,
    pub from: EmotionLabel,
    pub to: EmotionLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionReport {
    pub start: NaiveDate,
    /// Inclusive.
    pub end: NaiveDate,
    pub counts: [u64; NUM_EMOTIONS],
    pub change_count: u64,
    pub dominant: Option<EmotionLabel>,
    pub transitions: Vec<Transition>,
    pub flags: Vec<AdvisoryFlag>,
}

impl EmotionReport {
    pub fn events(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Most frequent label; ties go to the lower class code.
pub fn dominant_emotion(counts: &[u64; NUM_EMOTIONS]) -> Option<EmotionLabel> {
    let mut best: Option<(usize, u64)> = None;
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 && best.is_none_or(|(_, b)| n > b) {
            best = Some((c, n));
        }
    }
    best.and_then(|(c, _)| EmotionLabel::from_code(c))
}

pub fn advisory_flags(
    counts: &[u64; NUM_EMOTIONS],
    change_count: u64,
    config: &AdvisoryConfig,
) -> Vec<AdvisoryFlag> {
    let events: u64 = counts.iter().sum();
    let mut flags = Vec::new();
    if events == 0 {
        return flags;
    }
    let fear = counts[EmotionLabel::Fear.code()];
    if events >= config.fear_min_events && fear as f64 / events as f64 > config.fear_share {
        flags.push(AdvisoryFlag {
            rule: AdvisoryRule::FearDominant,
            evidence: format!("fear {fear}/{events} events"),
        });
    }
    if events >= config.volatility_min_events && change_count as f64 / events as f64 > config.volatility {
        flags.push(AdvisoryFlag {
            rule: AdvisoryRule::HighVolatility,
            evidence: format!("{change_count} changes over {events} events"),
        });
    }
    if events >= config.sadness_min_events && dominant_emotion(counts) == Some(EmotionLabel::Sadness) {
        let sad = counts[EmotionLabel::Sadness.code()];
        flags.push(AdvisoryFlag {
            rule: AdvisoryRule::SadnessPersistent,
            evidence: format!("sadness dominant with {sad}/{events} events"),
        });
    }
    flags
}

/// Report over the UTC days `start..=end`. Changes are counted between
/// consecutive events inside the period.
pub fn range_report(
    events: &[EmotionEvent],
    start: NaiveDate,
    end: NaiveDate,
    config: &AdvisoryConfig,
) -> EmotionReport {
    let mut counts = [0u64; NUM_EMOTIONS];
    let mut transitions = Vec::new();
    let mut prev: Option<EmotionLabel> = None;
    for e in events {
        let day = e.timestamp.date_naive();
        if day < start || day > end {
            continue;
        }
        counts[e.label.code()] += 1;
        if let Some(p) = prev {
            if p != e.label {
                transitions.push(Transition {
                    timestamp: e.timestamp,
                    from: p,
                    to: e.label,
                });
            }
        }
        prev = Some(e.label);
    }
    let change_count = transitions.len() as u64;
    EmotionReport {
        start,
        end,
        counts,
        change_count,
        dominant: dominant_emotion(&counts),
        flags: advisory_flags(&counts, change_count, config),
        transitions,
    }
}

pub fn daily_report(events: &[EmotionEvent], date: NaiveDate, config: &AdvisoryConfig) -> EmotionReport {
    range_report(events, date, date, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Machine,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "machine" => Ok(ReportFormat::Machine),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Text => "text",
            ReportFormat::Machine => "machine",
        })
    }
}

pub fn export_report(report: &EmotionReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => export_text(report),
        ReportFormat::Machine => export_machine(report),
    }
}

fn export_text(r: &EmotionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Emotion report {} to {}", r.start, r.end);
    let _ = writeln!(out, "events: {}", r.events());
    let _ = writeln!(out, "emotion changes: {}", r.change_count);
    let _ = writeln!(
        out,
        "dominant emotion: {}",
        r.dominant.map_or("none", EmotionLabel::name)
    );
    let _ = writeln!(out, "\n{:<12}{:>8}{:>9}", "emotion", "count", "share");
    for l in EmotionLabel::ALL {
        let n = r.counts[l.code()];
        let share = if r.events() == 0 {
            0.0
        } else {
            100.0 * n as f64 / r.events() as f64
        };
        let _ = writeln!(out, "{:<12}{n:>8}{share:>8.1}%", l.name());
    }
    let _ = writeln!(out, "\nadvisories:");
    if r.flags.is_empty() {
        let _ = writeln!(out, "  none");
    }
    for f in &r.flags {
        let _ = writeln!(
            out,
            "  {} {}: {} ({})",
            f.rule.id(),
            f.rule.name(),
            f.rule.suggestion(),
            f.evidence
        );
    }
    let _ = writeln!(out, "\ntransitions:");
    if r.transitions.is_empty() {
        let _ = writeln!(out, "  none");
    }
    for t in &r.transitions {
        let _ = writeln!(out, "  {} {} -> {}", format_ts(&t.timestamp), t.from, t.to);
    }
    out
}

fn export_machine(r: &EmotionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "period.start={}", r.start);
    let _ = writeln!(out, "period.end={}", r.end);
    let _ = writeln!(out, "events={}", r.events());
    for l in EmotionLabel::ALL {
        let _ = writeln!(out, "count.{}={}", l.name(), r.counts[l.code()]);
    }
    let _ = writeln!(out, "change_count={}", r.change_count);
    let _ = writeln!(out, "dominant={}", r.dominant.map_or("none", EmotionLabel::name));
    let _ = writeln!(out, "flags={}", r.flags.len());
    for (i, f) in r.flags.iter().enumerate() {
        let _ = writeln!(out, "flag.{i}.rule={}", f.rule.id());
        let _ = writeln!(out, "flag.{i}.evidence={}", f.evidence);
    }
    let _ = writeln!(out, "transitions={}", r.transitions.len());
    for (i, t) in r.transitions.iter().enumerate() {
        let _ = writeln!(
            out,
            "transition.{i}={},{},{}",
            format_ts(&t.timestamp),
            t.from.code(),
            t.to.code()
        );
    }
    out
}

/// Parses the machine format produced by [`export_report`]. Records must
/// appear in the order they are written.
pub fn parse_machine_report(text: &str) -> Result<EmotionReport> {
    let bad = |m: String| Error::MalformedReport(m);
    let mut lines = text.lines();
    let mut next = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| bad(format!("missing {key}")))?;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
        if k != key {
            return Err(bad(format!("expected {key}, found {k}")));
        }
        Ok(v.to_string())
    };
    fn num<T: FromStr>(key: &str, v: String) -> Result<T> {
        v.parse()
            .map_err(|_| Error::MalformedReport(format!("{key}: not a number: {v:?}")))
    }
    let date = |key: &str, v: String| {
        NaiveDate::parse_from_str(&v, "%Y-%m-%d").map_err(|e| Error::MalformedReport(format!("{key}: {e}")))
    };
    let label = |v: &str| {
        if v == "none" {
            return Ok(None);
        }
        EmotionLabel::from_token(v)
            .map(Some)
            .ok_or_else(|| Error::MalformedReport(format!("unknown emotion {v:?}")))
    };

    let start = date("period.start", next("period.start")?)?;
    let end = date("period.end", next("period.end")?)?;
    let events: u64 = num("events", next("events")?)?;
    let mut counts = [0u64; NUM_EMOTIONS];
    for l in EmotionLabel::ALL {
        let key = format!("count.{}", l.name());
        counts[l.code()] = num(&key, next(&key)?)?;
    }
    if counts.iter().sum::<u64>() != events {
        return Err(bad(format!("counts do not sum to {events}")));
    }
    let change_count = num("change_count", next("change_count")?)?;
    let dominant = label(&next("dominant")?)?;
    let n_flags: usize = num("flags", next("flags")?)?;
    let mut flags = Vec::with_capacity(n_flags);
    for i in 0..n_flags {
        let rule = next(&format!("flag.{i}.rule"))?.parse()?;
        let evidence = next(&format!("flag.{i}.evidence"))?;
        flags.push(AdvisoryFlag { rule, evidence });
    }
    let n_trans: usize = num("transitions", next("transitions")?)?;
    let mut transitions = Vec::with_capacity(n_trans);
    for i in 0..n_trans {
        let key = format!("transition.{i}");
        let v = next(&key)?;
        let parts: Vec<&str> = v.split(',').collect();
        let [ts, from, to] = parts[..] else {
            return Err(bad(format!("{key}: expected timestamp,from,to")));
        };
        let code = |s: &str| {
            s.parse::<usize>()
                .ok()
                .and_then(EmotionLabel::from_code)
                .ok_or_else(|| Error::MalformedReport(format!("{key}: label code {s:?}")))
        };
        transitions.push(Transition {
            timestamp: parse_timestamp(ts).map_err(|e| bad(format!("{key}: {e}")))?,
            from: code(from)?,
            to: code(to)?,
        });
    }
    if let Some(extra) = lines.next() {
        return Err(bad(format!("unexpected trailing record {extra:?}")));
    }
    Ok(EmotionReport {
        start,
        end,
        counts,
        change_count,
        dominant,
        transitions,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use EmotionLabel::*;

    fn at(day: u32, secs: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 3, day, 0, 0, 0).unwrap() + chrono::Duration::seconds(secs as i64)
    }

    fn events(day: u32, labels: &[EmotionLabel]) -> Vec<EmotionEvent> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &l)| EmotionEvent::new(at(day, 60 * i as u32), l, 0.9, format!("req-{i}")).unwrap())
            .collect()
    }

    fn date(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 3, day).unwrap()
    }

    #[test]
    fn line_round_trip() {
        let e = EmotionEvent::new(at(1, 5), Surprise, 0.1 + 0.2, "abc-123").unwrap();
        let line = e.to_line();
        assert_eq!(line, "2024-03-01T00:00:05Z\t4\t0.30000000000000004\tabc-123");
        assert_eq!(EmotionEvent::parse_line(&line).unwrap(), e);
    }

    #[test]
    fn malformed_events() {
        assert!(EmotionEvent::new(at(1, 0), Fear, 1.5, "x").is_err());
        assert!(EmotionEvent::new(at(1, 0), Fear, 0.5, "a\tb").is_err());
        for line in [
            "2024-03-01T00:00:00Z\t9\t0.5\tx",
            "2024-03-01T00:00:00Z\t1\tnan\tx",
            "yesterday\t1\t0.5\tx",
            "2024-03-01T00:00:00Z\t1\t0.5",
            "2024-03-01T00:00:00.5Z\t1\t0.5\tx",
        ] {
            assert!(matches!(EmotionEvent::parse_line(line), Err(Error::MalformedEvent(_))), "{line}");
        }
    }

    #[test]
    fn partial_trailing_line_is_ignored() {
        let e = &events(1, &[Fear])[0];
        let text = format!("{}\n2024-03-01T00:0", e.to_line());
        assert_eq!(parse_log(&text).unwrap(), vec![e.clone()]);
    }

    #[test]
    fn empty_day() {
        let r = daily_report(&[], date(1), &AdvisoryConfig::default());
        assert_eq!(r.counts, [0; 7]);
        assert_eq!((r.change_count, r.dominant), (0, None));
        assert!(r.flags.is_empty());
    }

    #[test]
    fn happy_happy_sad() {
        let r = daily_report(&events(1, &[Happiness, Happiness, Sadness]), date(1), &AdvisoryConfig::default());
        assert_eq!(r.change_count, 1);
        assert_eq!(r.dominant, Some(Happiness));
        assert_eq!(r.transitions[0].from, Happiness);
    }

    #[test]
    fn three_fears_raise_r1() {
        let r = daily_report(&events(1, &[Fear; 3]), date(1), &AdvisoryConfig::default());
        assert!(r.flags.iter().any(|f| f.rule == AdvisoryRule::FearDominant));
        let two = daily_report(&events(1, &[Fear; 2]), date(1), &AdvisoryConfig::default());
        assert!(two.flags.is_empty());
    }

    #[test]
    fn alternating_twelve_raise_r2() {
        let labels: Vec<EmotionLabel> = (0..12).map(|i| if i % 2 == 0 { Anger } else { Neutral }).collect();
        let r = daily_report(&events(1, &labels), date(1), &AdvisoryConfig::default());
        assert_eq!(r.change_count, 11);
        assert!(r.flags.iter().any(|f| f.rule == AdvisoryRule::HighVolatility));
    }

    #[test]
    fn ties_go_to_lower_code() {
        let mut counts = [0; 7];
        counts[Sadness.code()] = 2;
        counts[Disgust.code()] = 2;
        assert_eq!(dominant_emotion(&counts), Some(Disgust));
    }

    #[test]
    fn sadness_dominant_raises_r3() {
        let r = daily_report(&events(1, &[Sadness, Sadness, Anger]), date(1), &AdvisoryConfig::default());
        assert_eq!(r.flags.len(), 1);
        assert_eq!(r.flags[0].rule, AdvisoryRule::SadnessPersistent);
    }

    #[test]
    fn other_days_are_excluded() {
        let mut all = events(1, &[Fear, Anger]);
        all.extend(events(2, &[Neutral]));
        let r = daily_report(&all, date(2), &AdvisoryConfig::default());
        assert_eq!(r.events(), 1);
        assert_eq!(r.change_count, 0);
    }

    #[test]
    fn machine_round_trip_and_schema() {
        let mut labels = vec![Fear; 4];
        labels.extend([Sadness, Fear, Anger]);
        let r = daily_report(&events(1, &labels), date(1), &AdvisoryConfig::default());
        assert!(!r.flags.is_empty());
        let doc = export_report(&r, ReportFormat::Machine);
        assert_eq!(parse_machine_report(&doc).unwrap(), r);

        let empty = daily_report(&[], date(1), &AdvisoryConfig::default());
        let doc = export_report(&empty, ReportFormat::Machine);
        assert!(doc.contains("count.neutral=0\n"));
        assert!(doc.contains("dominant=none\n"));
        assert_eq!(parse_machine_report(&doc).unwrap(), empty);
        assert!(export_report(&empty, ReportFormat::Text).contains("events: 0"));
    }

    #[test]
    fn unknown_format() {
        assert!(matches!("pdf".parse::<ReportFormat>(), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn log_file_ordering() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.tsv");
        let mut log = EventLog::open(&path).unwrap();
        assert!(log.is_empty());
        let evs = events(1, &[Anger, Fear]);
        log.record(&evs[1]).unwrap();
        let before = fs::read(&path).unwrap();
        assert!(matches!(log.record(&evs[0]), Err(Error::OutOfOrder { .. })));
        assert_eq!(fs::read(&path).unwrap(), before);
        drop(log);
        let reopened = EventLog::open(&path).unwrap();
        assert_eq!(reopened.len(), 1);
        assert_eq!(reopened.events().unwrap(), vec![evs[1].clone()]);
    }
}
