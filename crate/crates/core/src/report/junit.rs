use std::fmt::Write as _;

use super::{escape, ReportBundle};
use crate::analyzer::Outcome;

struct Counts {
    tests: usize,
    failures: usize,
    skipped: usize,
}

fn counts(b: &ReportBundle) -> Counts {
    let v = &b.verdict;
    let strict_case = usize::from(v.strict && !v.unexpected.is_empty());
    Counts {
        tests: v.checks.len() + strict_case,
        failures: v
            .checks
            .iter()
            .filter(|c| matches!(c.outcome, Outcome::Fail | Outcome::Missing))
            .count()
            + strict_case,
        skipped: v.checks.iter().filter(|c| c.outcome == Outcome::Info).count(),
    }
}

fn write_suite(out: &mut String, b: &ReportBundle) {
    let v = &b.verdict;
    let c = counts(b);
    let suite = escape(b.display_title());
    let t = b.run_stamp.datetime().format("%Y-%m-%dT%H:%M:%S");
    let _ = writeln!(
        out,
        "  <testsuite name=\"{suite}\" tests=\"{}\" failures=\"{}\" errors=\"0\" skipped=\"{}\" timestamp=\"{t}\">",
        c.tests, c.failures, c.skipped
    );
    out.push_str("    <properties>\n");
    for (name, value) in [
        ("overall", v.overall.to_string()),
        ("fail_rate", b.coverage.fail_rate.to_string()),
        ("expectation_coverage", b.coverage.expectation_coverage.to_string()),
        ("channel_coverage", b.coverage.channel_coverage.to_string()),
        ("run_stamp", b.run_stamp.to_string()),
        ("tool_version", b.tool_version.clone()),
    ] {
        let _ = writeln!(out, "      <property name=\"{name}\" value=\"{}\"/>", escape(&value));
    }
    out.push_str("    </properties>\n");

    for check in &v.checks {
        let e = &check.expectation;
        let _ = write!(
            out,
            "    <testcase name=\"#{} {}\" classname=\"{suite}\"",
            check.expectation_index,
            escape(&e.channel().to_string())
        );
        match check.outcome {
            Outcome::Pass => out.push_str("/>\n"),
            Outcome::Info => {
                let _ = writeln!(
                    out,
                    ">\n      <skipped message=\"{}\"/>\n    </testcase>",
                    escape(&check.detail)
                );
            }
            Outcome::Fail | Outcome::Missing => {
                let _ = writeln!(
                    out,
                    ">\n      <failure message=\"{o}\" type=\"{o}\">{}</failure>\n    </testcase>",
                    escape(&check.detail),
                    o = check.outcome
                );
            }
        }
    }
    if v.strict && !v.unexpected.is_empty() {
        let list: Vec<String> = v
            .unexpected
            .iter()
            .map(|r| format!("LOG_CNT {} {}", r.log_cnt, r.channel()))
            .collect();
        let _ = writeln!(
            out,
            "    <testcase name=\"unexpected messages\" classname=\"{suite}\">\n      \
<failure message=\"UNEXPECTED\" type=\"UNEXPECTED\">{}</failure>\n    </testcase>",
            escape(&list.join("; "))
        );
    }
    out.push_str("  </testsuite>\n");
}

/// JUnit XML with one `testsuite` per bundle.
pub fn render_junit_suites(bundles: &[ReportBundle]) -> String {
    let (mut tests, mut failures, mut skipped) = (0, 0, 0);
    for b in bundles {
        let c = counts(b);
        tests += c.tests;
        failures += c.failures;
        skipped += c.skipped;
    }
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<testsuites name=\"tutharness\" tests=\"{tests}\" failures=\"{failures}\" errors=\"0\" skipped=\"{skipped}\">"
    );
    for b in bundles {
        write_suite(&mut out, b);
    }
    out.push_str("</testsuites>\n");
    out
}

pub fn render_junit(bundle: &ReportBundle) -> String {
    render_junit_suites(std::slice::from_ref(bundle))
}
