//! Report model and its CSV, JSON and SVG renderings.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

/// Provenance recorded at the top of every output.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
}

impl Header {
    fn to_json(&self) -> Value {
        json!({
            "artifact": "anv",
            "command": self.command,
            "config_sha256": self.config_sha256,
            "seed": self.seed,
            "version": self.version,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
    Equal,
}

impl Relation {
    fn as_str(self) -> &'static str {
        match self {
            Self::AtMost => "<=",
            Self::AtLeast => ">=",
            Self::Equal => "==",
        }
    }
}

/// One embedded assertion `value relation limit`.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, relation: Relation::AtMost, limit }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, relation: Relation::AtLeast, limit }
    }

    pub fn equal(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, relation: Relation::Equal, limit }
    }

    /// NaN never passes.
    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.value <= self.limit,
            Relation::AtLeast => self.value >= self.limit,
            Relation::Equal => self.value == self.limit,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "limit": self.limit,
            "name": self.name,
            "passed": self.passed(),
            "relation": self.relation.as_str(),
            "value": self.value,
        })
    }
}

/// Which columns the SVG rendering draws.
#[derive(Debug, Clone)]
pub struct Plot {
    pub x: &'static str,
    pub y: Vec<&'static str>,
    pub log_x: bool,
    pub log_y: bool,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Map<String, Value>,
    pub checks: Vec<Check>,
    pub plot: Plot,
}

impl Report {
    pub fn new(columns: Vec<&'static str>, plot: Plot) -> Self {
        Self { columns, rows: Vec::new(), summary: Map::new(), checks: Vec::new(), plot }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the columns");
        self.rows.push(row);
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64().unwrap_or(f64::NAN)).collect())
    }
}

pub fn render_json(header: &Header, params: &Map<String, Value>, report: &Report) -> String {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| Value::Object(report.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
        .collect();
    let doc = json!({
        "header": header.to_json(),
        "params": params,
        "columns": report.columns,
        "rows": rows,
        "summary": report.summary,
        "checks": report.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        "status": if report.failed().is_empty() { "pass" } else { "fail" },
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

fn csv_field(v: &Value) -> String {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if text.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text
    }
}

/// RFC-4180 with CRLF line ends. The provenance fields lead every record.
pub fn render_csv(header: &Header, report: &Report) -> String {
    let mut out = String::new();
    let mut names = vec!["artifact_version", "seed", "config_sha256"];
    names.extend(report.columns.iter().copied());
    out.push_str(&names.join(","));
    out.push_str("\r\n");
    let lead = [Value::from(header.version.clone()), Value::from(header.seed), Value::from(header.config_sha256.clone())];
    for row in &report.rows {
        let fields: Vec<String> = lead.iter().chain(row.iter()).map(csv_field).collect();
        out.push_str(&fields.join(","));
        out.push_str("\r\n");
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 70.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn transform(v: f64, log: bool) -> Option<f64> {
    let t = if log { v.abs().log10() } else { v };
    t.is_finite().then_some(t)
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Static line plot of the report's plot columns. Log axes plot `log10 |v|`.
pub fn render_svg(header: &Header, report: &Report) -> String {
    let p = &report.plot;
    let xs = report.column(p.x).unwrap_or_default();
    let series: Vec<(&str, Vec<(f64, f64)>)> = p
        .y
        .iter()
        .map(|name| {
            let ys = report.column(name).unwrap_or_default();
            let pts = xs
                .iter()
                .zip(&ys)
                .filter_map(|(&x, &y)| Some((transform(x, p.log_x)?, transform(y, p.log_y)?)))
                .collect();
            (*name, pts)
        })
        .collect();
    let (x0, x1) = span(series.iter().flat_map(|s| s.1.iter().map(|q| q.0)));
    let (y0, y1) = span(series.iter().flat_map(|s| s.1.iter().map(|q| q.1)));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let axis = |name: &str, log: bool| if log { format!("log10 |{name}|") } else { name.to_string() };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        "<!-- anv {} command={} seed={} config_sha256={} -->",
        header.version, header.command, header.seed, header.config_sha256
    );
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, WIDTH / 2.0, xml_escape(&header.command));
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"#, xml_escape(text));
    };
    label(&mut s, MARGIN, HEIGHT - MARGIN + 16.0, "start", &format!("{x0:.4e}"));
    label(&mut s, WIDTH - MARGIN, HEIGHT - MARGIN + 16.0, "end", &format!("{x1:.4e}"));
    label(&mut s, MARGIN - 6.0, HEIGHT - MARGIN, "end", &format!("{y0:.3e}"));
    label(&mut s, MARGIN - 6.0, MARGIN + 4.0, "end", &format!("{y1:.3e}"));
    label(&mut s, WIDTH / 2.0, HEIGHT - 24.0, "middle", &axis(p.x, p.log_x));
    let ylab = p.y.iter().map(|n| axis(n, p.log_y)).collect::<Vec<_>>().join(", ");
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        xml_escape(&ylab)
    );
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = MARGIN + 14.0 + 14.0 * k as f64;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#, WIDTH - MARGIN - 110.0, xml_escape(name));
    }
    s.push_str("</svg>\n");
    s
}
