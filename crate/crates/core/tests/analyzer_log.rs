use std::fs;

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use ser_core::analyzer::{
    daily_report, export_report, parse_machine_report, read_log, AdvisoryConfig, AdvisoryRule, EmotionEvent,
    EventLog, ReportFormat,
};
use ser_core::error::Error;
use ser_core::label::EmotionLabel;

fn event(secs: i64, label: EmotionLabel, id: &str) -> EmotionEvent {
    let ts = Utc.with_ymd_and_hms(2024, 5, 2, 8, 0, 0).unwrap() + Duration::seconds(secs);
    EmotionEvent::new(ts, label, 0.75, id).unwrap()
}

#[test]
fn reopened_log_keeps_appending() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.tsv");
    let labels = [EmotionLabel::Fear, EmotionLabel::Neutral, EmotionLabel::Fear];
    let mut written = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        let mut log = EventLog::open(&path).unwrap();
        assert_eq!(log.len(), i);
        let e = event(i as i64 * 10, l, &format!("r{i}"));
        log.record(&e).unwrap();
        written.push(e);
    }
    assert_eq!(read_log(&path).unwrap(), written);
}

#[test]
fn out_of_order_append_leaves_file_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.tsv");
    let mut log = EventLog::open(&path).unwrap();
    log.record(&event(60, EmotionLabel::Anger, "a")).unwrap();
    log.record(&event(60, EmotionLabel::Sadness, "same-second")).unwrap();
    let before = fs::read(&path).unwrap();
    assert!(matches!(
        log.record(&event(59, EmotionLabel::Fear, "late")),
        Err(Error::OutOfOrder { .. })
    ));
    assert_eq!(fs::read(&path).unwrap(), before);
    assert_eq!(log.len(), 2);
}

#[test]
fn missing_log_reads_as_empty() {
    let dir = tempfile::tempdir().unwrap();
    assert!(read_log(dir.path().join("none.tsv")).unwrap().is_empty());
}

#[test]
fn day_report_from_disk_round_trips_machine_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.tsv");
    let mut log = EventLog::open(&path).unwrap();
    let seq = [
        EmotionLabel::Sadness,
        EmotionLabel::Sadness,
        EmotionLabel::Neutral,
        EmotionLabel::Sadness,
    ];
    for (i, &l) in seq.iter().enumerate() {
        log.record(&event(i as i64 * 600, l, &format!("q{i}"))).unwrap();
    }
    let events = log.events().unwrap();
    let day = NaiveDate::from_ymd_opt(2024, 5, 2).unwrap();
    let report = daily_report(&events, day, &AdvisoryConfig::default());
    assert_eq!(report.change_count, 2);
    assert_eq!(report.dominant, Some(EmotionLabel::Sadness));
    assert_eq!(report.flags.len(), 1);
    assert_eq!(report.flags[0].rule, AdvisoryRule::SadnessPersistent);

    let machine = export_report(&report, ReportFormat::Machine);
    assert_eq!(parse_machine_report(&machine).unwrap(), report);
    let text = export_report(&report, ReportFormat::Text);
    assert!(text.contains("dominant emotion: sadness"));

    let other = daily_report(&events, day.succ_opt().unwrap(), &AdvisoryConfig::default());
    assert_eq!(other.events(), 0);
    assert!(other.flags.is_empty());
}
