use std::fmt::Write as _;

use super::{escape, percent, ReportBundle};
use crate::analyzer::{CheckResult, Outcome, Overall};

const STYLE: &str = "body{font-family:sans-serif;margin:2em;color:#222}\
table{border-collapse:collapse;margin-bottom:1.5em}\
th,td{border:1px solid #bbb;padding:4px 8px;text-align:left;vertical-align:top}\
th{background:#eee}\
td.hex{font-family:monospace;white-space:pre}\
.verdict{font-size:1.6em;font-weight:bold}\
.pass{color:#1a7f37}.fail,.missing{color:#c62828}.info{color:#666}\
tr.check.fail,tr.check.missing{background:#fdecea}";

fn outcome_class(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Fail => "fail",
        Outcome::Missing => "missing",
        Outcome::Info => "info",
    }
}

fn check_row(out: &mut String, c: &CheckResult) {
    let e = &c.expectation;
    let (actual, log_cnt) = match &c.matched_record {
        Some(r) => (
            r.actual.as_ref().map(|p| p.encode()).unwrap_or_default(),
            r.log_cnt.to_string(),
        ),
        None => (String::new(), String::new()),
    };
    let _ = writeln!(
        out,
        "<tr class=\"check {cls}\"><td>{idx}</td><td class=\"{cls}\">{outcome}</td><td>{chan}</td><td>{ty}</td>\
<td>{rel}</td><td>{tol}</td><td class=\"hex\">{exp}</td><td class=\"hex\">{act}</td><td>{cnt}</td><td>{detail}</td></tr>",
        cls = outcome_class(c.outcome),
        idx = c.expectation_index,
        outcome = c.outcome,
        chan = escape(&e.channel().to_string()),
        ty = escape(e.type_tag.as_str()),
        rel = e.relevance,
        tol = e.tolerance,
        exp = e.expected.encode(),
        act = actual,
        cnt = log_cnt,
        detail = escape(&c.detail),
    );
}

/// Self-contained HTML page: a summary table followed by one row per check
/// and a table of unexpected messages.
pub fn render_html(bundle: &ReportBundle) -> String {
    let v = &bundle.verdict;
    let cov = &bundle.coverage;
    let title = escape(bundle.display_title());
    let verdict_class = match v.overall {
        Overall::Pass => "pass",
        Overall::Fail => "fail",
    };
    let count = |o: Outcome| v.checks.iter().filter(|c| c.outcome == o).count();

    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\" />\n");
    let _ = writeln!(out, "<title>{title}: {}</title>", v.overall);
    let _ = writeln!(out, "<style>{STYLE}</style>\n</head>\n<body>");
    let _ = writeln!(out, "<h1>{title}</h1>");
    let _ = writeln!(out, "<p class=\"verdict {verdict_class}\">{}</p>", v.overall);

    out.push_str("<table class=\"summary\">\n");
    for (label, value) in [
        ("Fail rate", percent(cov.fail_rate)),
        ("Expectation coverage", percent(cov.expectation_coverage)),
        ("Channel coverage", percent(cov.channel_coverage)),
        (
            "Checks",
            format!(
                "{} total: {} pass, {} fail, {} missing, {} info",
                v.checks.len(),
                count(Outcome::Pass),
                count(Outcome::Fail),
                count(Outcome::Missing),
                count(Outcome::Info)
            ),
        ),
        (
            "Unexpected messages",
            format!("{}{}", v.unexpected.len(), if v.strict { " (strict)" } else { "" }),
        ),
        ("Run", bundle.run_stamp.to_string()),
        ("Tool", bundle.tool_version.clone()),
    ] {
        let _ = writeln!(out, "<tr><th>{label}</th><td>{}</td></tr>", escape(&value));
    }
    out.push_str("</table>\n");

    out.push_str("<h2>Checks</h2>\n<table class=\"checks\">\n<thead><tr><th>#</th><th>Outcome</th><th>Channel</th>\
<th>Type</th><th>Relevance</th><th>Tolerance</th><th>Expected</th><th>Actual</th><th>LOG_CNT</th><th>Detail</th></tr></thead>\n<tbody>\n");
    for c in &v.checks {
        check_row(&mut out, c);
    }
    out.push_str("</tbody>\n</table>\n");

    if !v.unexpected.is_empty() {
        out.push_str("<h2>Unexpected messages</h2>\n<table class=\"unexpected\">\n<thead><tr><th>LOG_CNT</th>\
<th>Tick (ms)</th><th>Channel</th><th>Type</th><th>Actual</th></tr></thead>\n<tbody>\n");
        for r in &v.unexpected {
            let _ = writeln!(
                out,
                "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td class=\"hex\">{}</td></tr>",
                r.log_cnt,
                r.tick_ms.map(|t| t.to_string()).unwrap_or_default(),
                escape(&r.channel().to_string()),
                escape(r.type_tag.as_str()),
                r.actual.as_ref().map(|p| p.encode()).unwrap_or_default(),
            );
        }
        out.push_str("</tbody>\n</table>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}
