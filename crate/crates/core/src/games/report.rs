use std::fmt::Write as _;

use serde::Serialize;

use super::GameResult;

/// Bumped whenever a field of [`SummaryRow`] changes meaning.
pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub format: u32,
    pub game: String,
    pub hash: String,
    pub scheme: String,
    pub adversary: String,
    pub trials: u64,
    pub wins: u64,
    pub invalid: u64,
    pub aborted: u64,
    pub win_rate: f64,
    pub referee_disagreements: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

pub fn report(results: &[GameResult]) -> Summary {
    Summary {
        rows: results
            .iter()
            .map(|r| SummaryRow {
                format: REPORT_FORMAT_VERSION,
                game: r.config.game.to_string(),
                hash: r.config.hash_fn.name(),
                scheme: r.config.scheme.name(),
                adversary: r.config.adversary.to_string(),
                trials: r.config.trials,
                wins: r.wins,
                invalid: r.invalid,
                aborted: r.aborted,
                win_rate: r.win_rate,
                referee_disagreements: r.referee_disagreements,
            })
            .collect(),
    }
}

impl Summary {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Aligned text table with a header line; empty input gives an empty
    /// string.
    pub fn to_table(&self) -> String {
        if self.rows.is_empty() {
            return String::new();
        }
        let header = [
            "game",
            "hash",
            "scheme",
            "adversary",
            "trials",
            "wins",
            "aborted",
            "win_rate",
        ];
        let cells: Vec<[String; 8]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.game.clone(),
                    r.hash.clone(),
                    r.scheme.clone(),
                    r.adversary.clone(),
                    r.trials.to_string(),
                    r.wins.to_string(),
                    r.aborted.to_string(),
                    format!("{:.4}", r.win_rate),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let mut line = |cols: &[&str]| {
            let parts: Vec<String> = cols
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (c, w))| if i < 4 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&header);
        for row in &cells {
            line(&row.each_ref().map(String::as_str));
        }
        out
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        self.rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain data") + "\n")
            .collect()
    }
}
