// Gini seasonality of three hand-shaped hadith groups over one year.
//
// cargo run --example seasonality

use chrono::{Datelike, Duration, TimeZone, Utc, Weekday};
use hadithscope::analyze::{gini, seasonality_report, temporal_histograms, Granularity, WindowMode};
use hadithscope::matches::MatchRecord;

fn row(id: usize, group: u64, ts: chrono::DateTime<Utc>) -> MatchRecord {
    MatchRecord {
        post_id: format!("p{id}"),
        ts_utc: ts,
        hadith_id: Some(group * 10),
        variant_group: Some(group),
        jaccard: 0.6,
        matched: true,
        threshold: 0.35,
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let start = Utc.with_ymd_and_hms(2021, 1, 1, 9, 0, 0).unwrap();
    let mut rows = Vec::new();
    for d in 0..365 {
        let ts = start + Duration::days(d);
        // group 1: every day
        rows.push(row(rows.len(), 1, ts));
        // group 2: Fridays only, five posts each
        if ts.weekday() == Weekday::Fri {
            for _ in 0..5 {
                rows.push(row(rows.len(), 2, ts));
            }
        }
        // group 3: a ten-day burst in August
        if ts.month() == 8 && ts.day() <= 10 {
            for _ in 0..20 {
                rows.push(row(rows.len(), 3, ts));
            }
        }
    }

    println!("{:?}", temporal_histograms(&rows, Granularity::Weekday, true).rows);
    for g in [Granularity::Day, Granularity::Weekday, Granularity::Month] {
        let rep = seasonality_report(&rows, g, 100, WindowMode::Global)?;
        let mut csv = Vec::new();
        rep.write_csv(&mut csv)?;
        print!("{}", String::from_utf8(csv)?);
    }
    assert_eq!(gini(&[0, 0, 0, 0, 5, 0, 0])?, 6.0 / 7.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
