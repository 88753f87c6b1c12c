//! Plain-text TSV reports.
//!
//! Sections are separated by a blank line and open with a `# title` line.

use std::fmt::Write;

use bridging_core::experiment::AttackOutcome;
use bridging_core::io::format_real;
use bridging_core::io::ScoreRow;
use bridging_core::sim::Archetype;
use bridging_core::{evaluate_recovery, GroundTruth, NoteStatus, RatingsDataset, Result, TrainReport};

/// Width of the intercept histogram bins.
pub const BIN_WIDTH: f64 = 0.1;

const STATUSES: [NoteStatus; 3] = [
    NoteStatus::Displayed,
    NoteStatus::NeedsMoreVotes,
    NoteStatus::NotDisplayed,
];

fn opt_real(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_owned(), format_real)
}

/// Training summary written next to fitted parameters.
pub fn training_report(data: &RatingsDataset, report: &TrainReport, seed: u64) -> String {
    let mut out = String::from("# training\nkey\tvalue\n");
    let _ = writeln!(out, "seed\t{seed}");
    let _ = writeln!(out, "users\t{}", data.num_users());
    let _ = writeln!(out, "notes\t{}", data.num_notes());
    let _ = writeln!(out, "votes\t{}", data.num_votes());
    let _ = writeln!(out, "epochs_run\t{}", report.epochs_run);
    let _ = writeln!(out, "converged\t{}", report.converged);
    let _ = writeln!(out, "final_loss\t{}", format_real(report.final_loss));
    out
}

/// Before/after comparison for an attacked note, followed by the training
/// summary of the attacked fit.
pub fn attack_report(outcome: &AttackOutcome, data: &RatingsDataset, report: &TrainReport, seed: u64) -> String {
    let mut out = String::from("# attack\nkey\tvalue\n");
    let _ = writeln!(out, "target_note\t{}", outcome.target_note);
    for (key, value) in [
        ("raw_mean_before", outcome.raw_mean_before),
        ("raw_mean_after", outcome.raw_mean_after),
        ("intercept_before", outcome.intercept_before),
        ("intercept_after", outcome.intercept_after),
        ("factor_before", outcome.factor_before),
        ("factor_after", outcome.factor_after),
    ] {
        let _ = writeln!(out, "{key}\t{}", format_real(value));
    }
    out.push('\n');
    out.push_str(&training_report(data, report, seed));
    out
}

/// Recovery metrics, per-archetype status counts, and an intercept
/// histogram by archetype.
///
/// Scored notes missing from `truth` are ignored; planted notes missing from
/// `rows` are an error.
pub fn recovery_report(rows: &[ScoreRow], truth: &GroundTruth) -> Result<String> {
    let labeled: Vec<(&ScoreRow, Archetype)> = rows
        .iter()
        .filter_map(|r| truth.note_archetype.get(&r.score.note_id).map(|a| (r, *a)))
        .collect();
    let scores: Vec<_> = rows.iter().map(|r| r.score.clone()).collect();
    let m = evaluate_recovery(&scores, truth)?;

    let mut out = String::from("# recovery\nmetric\tvalue\n");
    let _ = writeln!(out, "notes\t{}", labeled.len());
    let _ = writeln!(out, "separation_margin\t{}", format_real(m.separation_margin));
    let _ = writeln!(out, "auc\t{}", format_real(m.auc));
    for arch in Archetype::ALL {
        let _ = writeln!(out, "mean_abs_factor_{arch}\t{}", opt_real(m.mean_abs_factor_of(arch)));
    }
    let _ = writeln!(
        out,
        "mean_abs_factor_partisan\t{}",
        format_real(m.mean_abs_factor_partisan)
    );

    out.push_str("\n# status\narchetype\tnotes");
    for s in STATUSES {
        let _ = write!(out, "\t{s}");
    }
    out.push('\n');
    for arch in Archetype::ALL {
        let of_arch: Vec<_> = labeled.iter().filter(|(_, a)| *a == arch).collect();
        let _ = write!(out, "{arch}\t{}", of_arch.len());
        for s in STATUSES {
            let _ = write!(out, "\t{}", of_arch.iter().filter(|(r, _)| r.status == s).count());
        }
        out.push('\n');
    }

    out.push_str("\n# intercept_histogram\nbin_low\tbin_high");
    for arch in Archetype::ALL {
        let _ = write!(out, "\t{arch}");
    }
    out.push('\n');
    let bin_of = |x: f64| (x / BIN_WIDTH).floor() as i64;
    let bins: Vec<i64> = labeled.iter().map(|(r, _)| bin_of(r.score.intercept)).collect();
    if let (Some(&lo), Some(&hi)) = (bins.iter().min(), bins.iter().max()) {
        for b in lo..=hi {
            let _ = write!(out, "{:.1}\t{:.1}", b as f64 * BIN_WIDTH, (b + 1) as f64 * BIN_WIDTH);
            for arch in Archetype::ALL {
                let count = labeled
                    .iter()
                    .zip(&bins)
                    .filter(|((_, a), bin)| *a == arch && **bin == b)
                    .count();
                let _ = write!(out, "\t{count}");
            }
            out.push('\n');
        }
    }
    Ok(out)
}
