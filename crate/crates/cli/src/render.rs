//! Rendering of command results in the four output formats. Text, csv, and
//! md round numbers to the requested precision; json always carries full
//! precision. Unbounded values appear as the token `inf` (a string in json).

use selbias::oracle::OracleReport;
use selbias::{EffectEstimate, Scale, Scenario, UpperLimit};
use serde_json::Value;

#[derive(Clone, Copy, PartialEq)]
pub enum Format {
    Text,
    Json,
    Csv,
    Md,
}

pub fn parse_format(name: &str) -> Result<Format, String> {
    match name {
        "text" => Ok(Format::Text),
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        "md" | "markdown" => Ok(Format::Md),
        other => Err(format!(
            "unknown output format {other:?}; expected text, json, csv, or md"
        )),
    }
}

fn fmt_num(v: f64, prec: usize) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.prec$}")
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn scale_token(s: Scale) -> &'static str {
    match s {
        Scale::RiskRatio => "rr",
        Scale::OddsRatioApprox => "or",
        Scale::HazardRatioApprox => "hr",
    }
}

/// `point [lower, upper]`, with `-` for an absent limit and `inf` for an
/// unbounded one; a bare point when no interval was given at all.
fn fmt_estimate(e: &EffectEstimate, prec: usize) -> String {
    let point = fmt_num(e.point().value(), prec);
    if e.lower().is_none() && e.upper().is_none() {
        return point;
    }
    let lower = e
        .lower()
        .map_or("-".to_string(), |l| fmt_num(l.value(), prec));
    let upper = match e.upper() {
        None => "-".to_string(),
        Some(UpperLimit::Unbounded) => "inf".to_string(),
        Some(UpperLimit::Finite(v)) => fmt_num(v.value(), prec),
    };
    format!("{point} [{lower}, {upper}]")
}

/// Adjusted-estimate cells for tabular formats; absent limits are empty.
fn estimate_cells(e: &EffectEstimate, prec: usize) -> (String, String, String) {
    let point = fmt_num(e.point().value(), prec);
    let lower = e
        .lower()
        .map_or(String::new(), |l| fmt_num(l.value(), prec));
    let upper = match e.upper() {
        None => String::new(),
        Some(UpperLimit::Unbounded) => "inf".to_string(),
        Some(UpperLimit::Finite(v)) => fmt_num(v.value(), prec),
    };
    (point, lower, upper)
}

fn aligned(pairs: &[(String, String)]) -> String {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0) + 3;
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(&format!("{k:<width$}{v}\n"));
    }
    out
}

fn text_table(headers: &[String], rows: &[Vec<String>]) -> String {
    let cols = headers.len();
    let mut widths: Vec<usize> = headers.iter().map(String::len).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let mut push_row = |cells: &[String]| {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i + 1 == cols {
                line.push_str(cell);
            } else {
                line.push_str(&format!("{cell:<w$}  ", w = widths[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    };
    push_row(headers);
    for r in rows {
        push_row(r);
    }
    out
}

fn csv_block(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 fields")
}

fn md_block(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("| {} |\n", headers.join(" | ")));
    out.push_str(&format!("|{}\n", " --- |".repeat(headers.len())));
    for r in rows {
        out.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    out
}

fn obj(entries: Vec<(&str, Value)>) -> Value {
    let mut m = serde_json::Map::new();
    for (k, v) in entries {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

fn json_num(v: f64) -> Value {
    if v.is_infinite() {
        Value::from("inf")
    } else {
        Value::from(v)
    }
}

fn json_estimate(e: &EffectEstimate) -> Value {
    let mut entries: Vec<(&str, Value)> = vec![("point", Value::from(e.point().value()))];
    if let Some(l) = e.lower() {
        entries.push(("lower", Value::from(l.value())));
    }
    match e.upper() {
        None => {}
        Some(UpperLimit::Unbounded) => entries.push(("upper", Value::from("inf"))),
        Some(UpperLimit::Finite(v)) => entries.push(("upper", Value::from(v.value()))),
    }
    entries.push(("scale", Value::from(scale_token(e.scale()))));
    obj(entries)
}

fn finish(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("plain data serializes");
    s.push('\n');
    s
}

/// The s-equals-u-directional name is direction-blind, so its direction gets
/// its own line; the directional names carry the direction themselves.
fn scenario_pairs(scenario: Scenario) -> Vec<(String, String)> {
    let mut out = vec![("scenario".to_string(), scenario.to_string())];
    if let Scenario::SEqualsUDirectional(d) = scenario {
        out.push(("direction".to_string(), d.to_string()));
    }
    out
}

fn scenario_entries(scenario: Scenario) -> Vec<(&'static str, Value)> {
    let mut out = vec![("scenario", Value::from(scenario.to_string()))];
    if let Some(d) = scenario.direction() {
        out.push(("direction", Value::from(d.to_string())));
    }
    out
}

pub struct BoundView<'a> {
    pub scenario: Scenario,
    /// False on the direct-bound path of adjust, where no scenario or
    /// parameters were involved.
    pub show_scenario: bool,
    pub params: &'a [(&'static str, f64)],
    /// Text key for the factor: "bounding factor" or "bound".
    pub label: &'static str,
    pub bound: f64,
    pub approximate: bool,
    /// The estimate as entered, before any recoding.
    pub estimate: Option<EffectEstimate>,
    pub recoded: bool,
    pub adjusted: Option<EffectEstimate>,
}

pub fn bound(format: Format, prec: usize, v: &BoundView) -> String {
    match format {
        Format::Text => {
            let mut pairs: Vec<(String, String)> = Vec::new();
            if v.show_scenario {
                pairs.extend(scenario_pairs(v.scenario));
            }
            pairs.push((v.label.to_string(), fmt_num(v.bound, prec)));
            if v.approximate {
                pairs.push(("approximate".to_string(), "yes".to_string()));
            }
            if let Some(e) = &v.estimate {
                if e.scale() != Scale::RiskRatio {
                    pairs.push(("scale".to_string(), scale_token(e.scale()).to_string()));
                }
                pairs.push(("observed".to_string(), fmt_estimate(e, prec)));
                if v.recoded {
                    pairs.push(("recoded".to_string(), "yes".to_string()));
                }
            }
            if let Some(a) = &v.adjusted {
                pairs.push(("adjusted".to_string(), fmt_estimate(a, prec)));
            }
            aligned(&pairs)
        }
        Format::Json => {
            let mut entries: Vec<(&str, Value)> = Vec::new();
            if v.show_scenario {
                entries.extend(scenario_entries(v.scenario));
                entries.push((
                    "params",
                    obj(v
                        .params
                        .iter()
                        .map(|&(n, x)| (n, Value::from(x)))
                        .collect()),
                ));
            }
            entries.push(("bound", json_num(v.bound)));
            if v.show_scenario {
                entries.push(("approximate", Value::from(v.approximate)));
            }
            if let Some(e) = &v.estimate {
                entries.push(("estimate", json_estimate(e)));
                entries.push(("recoded", Value::from(v.recoded)));
            }
            if let Some(a) = &v.adjusted {
                entries.push(("adjusted", json_estimate(a)));
            }
            finish(obj(entries))
        }
        Format::Csv | Format::Md => {
            let mut headers = Vec::new();
            let mut row = Vec::new();
            if v.show_scenario {
                headers.push("scenario".to_string());
                row.push(v.scenario.to_string());
            }
            headers.push("bound".to_string());
            row.push(fmt_num(v.bound, prec));
            if v.show_scenario {
                headers.push("approximate".to_string());
                row.push(yes_no(v.approximate).to_string());
            }
            if let Some(a) = &v.adjusted {
                headers.push("recoded".to_string());
                row.push(yes_no(v.recoded).to_string());
                let (p, l, u) = estimate_cells(a, prec);
                for h in ["adjusted-point", "adjusted-lower", "adjusted-upper"] {
                    headers.push(h.to_string());
                }
                row.extend([p, l, u]);
            }
            if format == Format::Csv {
                csv_block(&headers, &[row])
            } else {
                md_block(&headers, &[row])
            }
        }
    }
}

pub struct SummaryLine {
    /// Which value was summarized: "point", "lower", or "upper".
    pub which: &'static str,
    /// The oriented ratio the formula ran on; for a crossing limit, the
    /// limit itself.
    pub input_rr: f64,
    pub value: f64,
    pub recoded: bool,
    /// The limit already reaches past the target, so no parameter strength
    /// is needed at all.
    pub crossed: bool,
}

pub struct SvalueView {
    pub scenario: Scenario,
    /// None means the null.
    pub target: Option<f64>,
    pub scale: Scale,
    pub point: SummaryLine,
    pub limit: Option<SummaryLine>,
}

const CROSS_NOTE: &str = "limit crosses target";

pub fn svalue(format: Format, prec: usize, v: &SvalueView) -> String {
    match format {
        Format::Text => {
            let mut pairs = scenario_pairs(v.scenario);
            pairs.push((
                "target".to_string(),
                v.target.map_or("null".to_string(), |t| fmt_num(t, prec)),
            ));
            if v.scale != Scale::RiskRatio {
                pairs.push(("scale".to_string(), scale_token(v.scale).to_string()));
            }
            let text_line = |line: &SummaryLine| {
                let mut s = fmt_num(line.value, prec);
                if line.recoded {
                    s.push_str(" (recoded)");
                }
                if line.crossed {
                    s.push_str(&format!(" ({CROSS_NOTE})"));
                }
                s
            };
            pairs.push(("summary (point)".to_string(), text_line(&v.point)));
            if let Some(limit) = &v.limit {
                pairs.push((format!("summary ({})", limit.which), text_line(limit)));
            }
            aligned(&pairs)
        }
        Format::Json => {
            let line_obj = |line: &SummaryLine| {
                let mut entries = vec![
                    ("input-rr", json_num(line.input_rr)),
                    ("value", Value::from(line.value)),
                    ("recoded", Value::from(line.recoded)),
                ];
                if line.crossed {
                    entries.push(("note", Value::from(CROSS_NOTE)));
                }
                obj(entries)
            };
            let mut entries = scenario_entries(v.scenario);
            entries.push(("target", Value::from(v.target.unwrap_or(1.0))));
            entries.push(("scale", Value::from(scale_token(v.scale))));
            entries.push(("point", line_obj(&v.point)));
            if let Some(limit) = &v.limit {
                entries.push((limit.which, line_obj(limit)));
            }
            finish(obj(entries))
        }
        Format::Csv | Format::Md => {
            let headers: Vec<String> = ["applied-to", "input-rr", "target", "value", "recoded", "note"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let target = v.target.map_or("null".to_string(), |t| fmt_num(t, prec));
            let mk = |line: &SummaryLine| {
                vec![
                    line.which.to_string(),
                    fmt_num(line.input_rr, prec),
                    target.clone(),
                    fmt_num(line.value, prec),
                    yes_no(line.recoded).to_string(),
                    if line.crossed {
                        CROSS_NOTE.to_string()
                    } else {
                        String::new()
                    },
                ]
            };
            let mut rows = vec![mk(&v.point)];
            if let Some(limit) = &v.limit {
                rows.push(mk(limit));
            }
            if format == Format::Csv {
                csv_block(&headers, &rows)
            } else {
                md_block(&headers, &rows)
            }
        }
    }
}

pub struct TableRow {
    pub params: Vec<f64>,
    pub bound: f64,
    pub adjusted: Option<EffectEstimate>,
}

pub struct TableView<'a> {
    pub scenario: Scenario,
    pub approximate: bool,
    pub recoded: bool,
    /// The estimate as entered; adjusted columns refer to its oriented form.
    pub estimate: Option<EffectEstimate>,
    pub param_names: &'a [&'static str],
    pub rows: &'a [TableRow],
}

pub fn table(format: Format, prec: usize, v: &TableView) -> String {
    let has_adjusted = v.rows.first().is_some_and(|r| r.adjusted.is_some());
    let headers: Vec<String> = v
        .param_names
        .iter()
        .map(|s| s.to_string())
        .chain(std::iter::once("bound".to_string()))
        .chain(
            if has_adjusted {
                vec!["adjusted-point", "adjusted-lower", "adjusted-upper"]
            } else {
                Vec::new()
            }
            .into_iter()
            .map(|s| s.to_string()),
        )
        .collect();
    let cells = |row: &TableRow| {
        let mut out: Vec<String> = row.params.iter().map(|&p| fmt_num(p, prec)).collect();
        out.push(fmt_num(row.bound, prec));
        if let Some(a) = &row.adjusted {
            let (p, l, u) = estimate_cells(a, prec);
            out.extend([p, l, u]);
        }
        out
    };
    match format {
        Format::Text => {
            let mut pairs = scenario_pairs(v.scenario);
            if v.approximate {
                pairs.push(("approximate".to_string(), "yes".to_string()));
            }
            if let Some(e) = &v.estimate {
                if e.scale() != Scale::RiskRatio {
                    pairs.push(("scale".to_string(), scale_token(e.scale()).to_string()));
                }
                pairs.push(("observed".to_string(), fmt_estimate(e, prec)));
                if v.recoded {
                    pairs.push(("recoded".to_string(), "yes".to_string()));
                }
            }
            let rows: Vec<Vec<String>> = v.rows.iter().map(cells).collect();
            format!("{}\n{}", aligned(&pairs), text_table(&headers, &rows))
        }
        Format::Json => {
            let mut entries = scenario_entries(v.scenario);
            if v.approximate {
                entries.push(("approximate", Value::from(true)));
            }
            if let Some(e) = &v.estimate {
                entries.push(("estimate", json_estimate(e)));
                entries.push(("recoded", Value::from(v.recoded)));
            }
            let rows: Vec<Value> = v
                .rows
                .iter()
                .map(|row| {
                    let mut row_entries: Vec<(&str, Value)> = v
                        .param_names
                        .iter()
                        .zip(&row.params)
                        .map(|(&n, &p)| (n, Value::from(p)))
                        .collect();
                    row_entries.push(("bound", json_num(row.bound)));
                    if let Some(a) = &row.adjusted {
                        row_entries.push(("adjusted", json_estimate(a)));
                    }
                    obj(row_entries)
                })
                .collect();
            entries.push(("rows", Value::Array(rows)));
            finish(obj(entries))
        }
        Format::Csv | Format::Md => {
            let rows: Vec<Vec<String>> = v.rows.iter().map(cells).collect();
            if format == Format::Csv {
                csv_block(&headers, &rows)
            } else {
                md_block(&headers, &rows)
            }
        }
    }
}

pub struct VerifyView<'a> {
    pub scenario: Scenario,
    pub k: usize,
    pub n: u64,
    pub search: bool,
    pub report: &'a OracleReport,
}

pub fn verify(format: Format, prec: usize, v: &VerifyView) -> String {
    let r = v.report;
    match format {
        Format::Text => {
            let mut pairs = scenario_pairs(v.scenario);
            pairs.push(("k".to_string(), v.k.to_string()));
            if v.search {
                pairs.push(("search".to_string(), "yes".to_string()));
            }
            pairs.push(("samples".to_string(), r.samples.to_string()));
            pairs.push(("skipped".to_string(), r.skipped.to_string()));
            pairs.push(("violations".to_string(), r.violations.to_string()));
            pairs.push((
                "max bias/bound".to_string(),
                fmt_num(r.max_bias_over_bound_ratio, prec),
            ));
            pairs.push(("seed".to_string(), r.seed.to_string()));
            aligned(&pairs)
        }
        Format::Json => {
            let mut entries = scenario_entries(v.scenario);
            entries.push(("k", Value::from(v.k as u64)));
            entries.push(("n", Value::from(v.n)));
            entries.push(("search", Value::from(v.search)));
            entries.push((
                "report",
                serde_json::to_value(r).expect("report serializes"),
            ));
            finish(obj(entries))
        }
        Format::Csv | Format::Md => {
            let headers: Vec<String> =
                ["scenario", "k", "samples", "skipped", "violations", "max-ratio", "seed"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect();
            let row = vec![
                v.scenario.to_string(),
                v.k.to_string(),
                r.samples.to_string(),
                r.skipped.to_string(),
                r.violations.to_string(),
                fmt_num(r.max_bias_over_bound_ratio, prec),
                r.seed.to_string(),
            ];
            if format == Format::Csv {
                csv_block(&headers, &[row])
            } else {
                md_block(&headers, &[row])
            }
        }
    }
}
