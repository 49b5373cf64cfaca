//! Report artifacts: single-file HTML, JUnit-style XML and the `.tutres`
//! results file they can be regenerated from.

mod html;
mod junit;
mod results;

pub use html::render_html;
pub use junit::{render_junit, render_junit_suites};
pub use results::{parse_results, serialize_results, ResultsError};

use crate::analyzer::{CoverageMetrics, Verdict};
use crate::trace::Stamp;

/// Everything a report shows about one analyzed run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub verdict: Verdict,
    pub coverage: CoverageMetrics,
    pub scenario_title: String,
    pub run_stamp: Stamp,
    pub tool_version: String,
}

impl ReportBundle {
    /// Title used where an empty one would be awkward.
    pub fn display_title(&self) -> &str {
        if self.scenario_title.is_empty() {
            "untitled scenario"
        } else {
            &self.scenario_title
        }
    }
}

/// Escapes text for HTML and XML content and attribute values.
pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c if c.is_control() && c != '\n' && c != '\t' => {}
            c => out.push(c),
        }
    }
    out
}

pub(crate) fn percent(r: f64) -> String {
    format!("{:.1}%", r * 100.0)
}
