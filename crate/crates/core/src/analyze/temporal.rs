use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use chrono::{Datelike, Days, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{gini, AnalyzeError, DistributionReport};
use crate::matches::MatchRecord;

/// Groups with fewer matched posts are left out of seasonality reports.
pub const DEFAULT_MIN_COUNT: u64 = 100;

const WEEKDAYS: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
const MONTHS: [&str; 12] = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Day,
    Weekday,
    Month,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Day => "day",
            Granularity::Weekday => "weekday",
            Granularity::Month => "month",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the day vector of a group is bounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    /// First to last day of the whole match table.
    #[default]
    Global,
    /// First to last day on which the group itself was matched.
    Active,
}

/// Inclusive range of UTC days.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Window {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Option<Self> {
        (start <= end).then_some(Window { start, end })
    }

    /// Spans the timestamps of every row, matched or not.
    pub fn of(rows: &[MatchRecord]) -> Option<Self> {
        let start = rows.iter().map(|m| m.ts_utc.date_naive()).min()?;
        let end = rows.iter().map(|m| m.ts_utc.date_naive()).max()?;
        Window::new(start, end)
    }

    pub fn days(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    pub fn contains(&self, day: NaiveDate) -> bool {
        self.start <= day && day <= self.end
    }

    fn months(&self) -> usize {
        let m = |d: NaiveDate| d.year() as i64 * 12 + d.month0() as i64;
        (m(self.end) - m(self.start)) as usize + 1
    }

    /// Shortens the window from its end so every weekday (or calendar month)
    /// occurs equally often. `None` if not even one full cycle fits.
    pub fn equalized(&self, granularity: Granularity) -> Option<Self> {
        match granularity {
            Granularity::Day => Some(*self),
            Granularity::Weekday => {
                let keep = self.days() / 7 * 7;
                let end = self.start.checked_add_days(Days::new(keep as u64))?.pred_opt()?;
                (keep > 0).then_some(Window { start: self.start, end })
            }
            Granularity::Month => {
                let keep = self.months() / 12 * 12;
                let first = self.start.with_day(1)?;
                let end = first.checked_add_months(Months::new(keep as u32))?.pred_opt()?;
                (keep > 0).then_some(Window {
                    start: self.start,
                    end: end.min(self.end),
                })
            }
        }
    }
}

fn slot(day: NaiveDate, granularity: Granularity, window: &Window) -> usize {
    match granularity {
        Granularity::Day => (day - window.start).num_days() as usize,
        Granularity::Weekday => day.weekday().num_days_from_monday() as usize,
        Granularity::Month => day.month0() as usize,
    }
}

fn slots(granularity: Granularity, window: &Window) -> usize {
    match granularity {
        Granularity::Day => window.days(),
        Granularity::Weekday => 7,
        Granularity::Month => 12,
    }
}

fn slot_key(i: usize, granularity: Granularity, window: &Window) -> String {
    match granularity {
        Granularity::Day => (window.start + Days::new(i as u64)).to_string(),
        Granularity::Weekday => WEEKDAYS[i].to_string(),
        Granularity::Month => MONTHS[i].to_string(),
    }
}

/// Matched posts per weekday, month or day (UTC) over the window spanned by
/// the whole table.
pub fn temporal_histograms(matches: &[MatchRecord], granularity: Granularity, equalize: bool) -> DistributionReport {
    let window = Window::of(matches);
    let window = if equalize {
        window.and_then(|w| w.equalized(granularity))
    } else {
        window
    };
    histogram_in(matches, granularity, window)
}

/// Like [`temporal_histograms`] over an explicit window; `None` gives an
/// empty report.
pub fn histogram_in(matches: &[MatchRecord], granularity: Granularity, window: Option<Window>) -> DistributionReport {
    let Some(window) = window else {
        return DistributionReport::new(granularity.as_str(), 0, Vec::new());
    };
    let mut counts = vec![0u64; slots(granularity, &window)];
    for m in matches.iter().filter(|m| m.matched) {
        let day = m.ts_utc.date_naive();
        if window.contains(day) {
            counts[slot(day, granularity, &window)] += 1;
        }
    }
    let denominator = counts.iter().sum();
    let rows = counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (slot_key(i, granularity, &window), c));
    DistributionReport::new(granularity.as_str(), denominator, rows)
}

/// Matched posts of one variant group per day, zero-filled over a window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DailyCountSeries {
    pub hadith_group: u64,
    pub window: Window,
    pub counts: Vec<u64>,
}

impl DailyCountSeries {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn matched_days(matches: &[MatchRecord]) -> BTreeMap<u64, Vec<NaiveDate>> {
    let mut by_group: BTreeMap<u64, Vec<NaiveDate>> = BTreeMap::new();
    for m in matches {
        if let Some(g) = m.matched_group() {
            by_group.entry(g).or_default().push(m.ts_utc.date_naive());
        }
    }
    by_group
}

/// One series per group with at least one matched post inside `window`.
pub fn daily_series(matches: &[MatchRecord], window: Window) -> Vec<DailyCountSeries> {
    matched_days(matches)
        .into_iter()
        .filter_map(|(group, days)| {
            let mut counts = vec![0u64; window.days()];
            for d in days.into_iter().filter(|d| window.contains(*d)) {
                counts[slot(d, Granularity::Day, &window)] += 1;
            }
            counts.iter().any(|&c| c > 0).then_some(DailyCountSeries {
                hadith_group: group,
                window,
                counts,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GiniRow {
    pub variant_group: u64,
    pub total: u64,
    pub gini: f64,
    pub granularity: Granularity,
}

/// Per-group Gini coefficients, highest first.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GiniReport {
    pub granularity: Granularity,
    pub min_count: u64,
    pub window_mode: WindowMode,
    pub rows: Vec<GiniRow>,
}

impl GiniReport {
    /// Writes `variant_group,total,gini,granularity`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), AnalyzeError> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(["variant_group", "total", "gini", "granularity"])?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<(), AnalyzeError> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn get(&self, group: u64) -> Option<&GiniRow> {
        self.rows.iter().find(|r| r.variant_group == group)
    }
}

/// Gini coefficient of every group with at least `min_count` matched posts
/// in its window, at the given granularity.
///
/// Day vectors have one zero-filled slot per UTC day; weekday vectors have 7
/// slots and month vectors 12, each aggregated across the whole window.
pub fn seasonality_report(
    matches: &[MatchRecord],
    granularity: Granularity,
    min_count: u64,
    mode: WindowMode,
) -> Result<GiniReport, AnalyzeError> {
    let mut rows = Vec::new();
    if let Some(global) = Window::of(matches) {
        for (group, days) in matched_days(matches) {
            let window = match mode {
                WindowMode::Global => global,
                WindowMode::Active => {
                    let lo = *days.iter().min().expect("non-empty");
                    let hi = *days.iter().max().expect("non-empty");
                    Window { start: lo, end: hi }
                }
            };
            let mut counts = vec![0u64; slots(granularity, &window)];
            for d in days.iter().filter(|d| window.contains(**d)) {
                counts[slot(*d, granularity, &window)] += 1;
            }
            let total: u64 = counts.iter().sum();
            if total == 0 || total < min_count {
                continue;
            }
            rows.push(GiniRow {
                variant_group: group,
                total,
                gini: gini(&counts)?,
                granularity,
            });
        }
    }
    rows.sort_by(|a, b| b.gini.total_cmp(&a.gini).then(a.variant_group.cmp(&b.variant_group)));
    Ok(GiniReport {
        granularity,
        min_count,
        window_mode: mode,
        rows,
    })
}
