//! `table`, `eval`, `limits` and `construct`.

use horizonlab::{
    avg_enclosure, construct_prop1_reward, construct_prop2_reward, disc_value_with, limit_scan, DiscountFamily,
    DiscountSpec, Error, Guards, LimitEstimate, Quantity, ScanOptions, ValueOptions, Verdict,
};
use serde_json::{json, Value};

use crate::output::{csv, interval, json as pretty, num, pair, short, text_table, Format, Sink};
use crate::spec::{parse_discount, parse_reward, parse_schedule};
use crate::{CliError, ConstructArgs, EvalArgs, LimitsArgs, QuantityArg, Status, TableArgs};

const DEFAULT_TABLE: [&str; 5] = ["finite:100", "geometric:0.5", "quadratic", "power:1", "harmonic"];

fn asymptotic_form(f: &DiscountFamily) -> Option<(&'static str, &'static str)> {
    Some(match f {
        DiscountFamily::Finite { .. } => (
            "finite",
            "Γ_k = m−k+1, eh_k = (m−k+1)/2, quasi = m−k+1, kγ_k/Γ_k = k/(m−k+1)",
        ),
        DiscountFamily::Geometric { .. } => (
            "geometric",
            "Γ_k = γ^k/(1−γ), eh_k = ln 2/ln(1/γ), quasi = 1/(1−γ), kγ_k/Γ_k = (1−γ)k → ∞",
        ),
        DiscountFamily::Quadratic => ("quadratic", "Γ_k = 1/k, eh_k = k, quasi = k+1, kγ_k/Γ_k = k/(k+1) → 1"),
        DiscountFamily::Power { .. } => (
            "power",
            "Γ_k ~ k^(−ε)/ε, eh_k ~ (2^(1/ε)−1)k, quasi ~ k/ε, kγ_k/Γ_k → ε",
        ),
        DiscountFamily::HarmonicLike => (
            "harmonic-like",
            "Γ_k ~ 1/ln k, eh_k ~ k², quasi ~ k ln k, kγ_k/Γ_k ~ 1/ln k → 0",
        ),
        _ => return None,
    })
}

struct Row {
    label: String,
    k: u64,
    cells: Vec<Result<(String, Value), String>>,
}

const TABLE_COLUMNS: [&str; 6] = ["gamma", "Gamma", "eh", "eh_real", "quasi", "ratio"];

fn table_row(d: &DiscountSpec, k: u64, guards: &Guards) -> Row {
    let iv = |r: horizonlab::Result<horizonlab::Interval>| {
        r.map(|x| (interval(x), pair(x))).map_err(|e| e.to_string())
    };
    let eh = d
        .effective_horizon_with(k, guards)
        .map(|h| {
            let text = if h.is_exact() { h.lo.to_string() } else { format!("[{}, {}]", h.lo, h.hi) };
            (text, json!([h.lo, h.hi]))
        })
        .map_err(|e| e.to_string());
    // The integer horizon rounds ln 2/ln(1/γ) up; show the real value too.
    let eh_real = match d.family {
        DiscountFamily::Geometric { g } if g > 0.0 => {
            let x = 2f64.ln() / (1.0 / g).ln();
            Ok((short(x), json!(x)))
        }
        _ => Err(String::new()),
    };
    Row {
        label: d.label(),
        k,
        cells: vec![
            iv(d.gamma_enclosure(k)),
            iv(d.gamma_tail(k)),
            eh,
            eh_real,
            iv(d.quasi_horizon(k)),
            iv(d.horizon_ratio(k)),
        ],
    }
}

pub fn table(a: &TableArgs, format: Format, sink: &Sink, guards: &Guards) -> Result<Status, CliError> {
    let specs: Vec<String> = if a.discounts.is_empty() {
        DEFAULT_TABLE.iter().map(|s| s.to_string()).collect()
    } else {
        a.discounts.clone()
    };
    let discounts = specs.iter().map(|s| parse_discount(s)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Row> = discounts
        .iter()
        .flat_map(|d| a.ks.iter().map(move |&k| (d, k)))
        .map(|(d, k)| table_row(d, k, guards))
        .collect();
    let mut forms: Vec<(&str, &str)> = discounts.iter().filter_map(|d| asymptotic_form(&d.family)).collect();
    forms.dedup();

    let text = match format {
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("discount".into(), json!(r.label));
                    obj.insert("k".into(), json!(r.k));
                    let mut notes = serde_json::Map::new();
                    for (name, cell) in TABLE_COLUMNS.iter().zip(&r.cells) {
                        match cell {
                            Ok((_, v)) => {
                                obj.insert(name.to_string(), v.clone());
                            }
                            Err(e) => {
                                obj.insert(name.to_string(), Value::Null);
                                if !e.is_empty() {
                                    notes.insert(name.to_string(), json!(e));
                                }
                            }
                        }
                    }
                    if !notes.is_empty() {
                        obj.insert("notes".into(), Value::Object(notes));
                    }
                    Value::Object(obj)
                })
                .collect();
            let forms: serde_json::Map<String, Value> =
                forms.iter().map(|(f, s)| (f.to_string(), json!(s))).collect();
            pretty(&json!({ "rows": rows, "asymptotic_forms": forms }))
        }
        Format::Csv | Format::Table => {
            let exact = format == Format::Csv;
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut v = vec![r.label.clone(), r.k.to_string()];
                    for c in &r.cells {
                        v.push(match c {
                            Ok((_, val)) if exact => val.to_string(),
                            Ok((text, _)) => text.clone(),
                            Err(_) => "n/a".into(),
                        });
                    }
                    v
                })
                .collect();
            let mut header = vec!["discount", "k"];
            header.extend(TABLE_COLUMNS);
            if exact {
                csv(&header, &cells)?
            } else {
                let mut t = text_table(&header, &cells);
                t.push_str("\n\nasymptotic forms:");
                for (f, s) in &forms {
                    t.push_str(&format!("\n  {f}: {s}"));
                }
                t
            }
        }
    };
    sink.emit(&text)?;
    Ok(Status::Ok)
}

pub fn eval(a: &EvalArgs, format: Format, sink: &Sink, guards: &Guards) -> Result<Status, CliError> {
    let reward = parse_reward(&a.reward)?;
    let disc = a.discount.as_deref().map(parse_discount).transpose()?;
    if a.u_to.is_empty() && a.k.is_none() && a.v_at.is_empty() {
        return Err(CliError::Parse("nothing to evaluate: give --u-to, --k/--m or --v-at".into()));
    }
    let mut records: Vec<(String, u64, Option<u64>, horizonlab::Interval, Value)> = Vec::new();
    for &m in &a.u_to {
        records.push(("U".into(), 1, Some(m), avg_enclosure(&reward, 1, m)?, json!({})));
    }
    if let (Some(k), Some(m)) = (a.k, a.m) {
        records.push(("U".into(), k, Some(m), avg_enclosure(&reward, k, m)?, json!({})));
    }
    let opts = ValueOptions { tol: a.tol, guards: *guards };
    let mut inconclusive = false;
    if let Some(d) = &disc {
        for &k in &a.v_at {
            match disc_value_with(&reward, d, k, &opts) {
                Ok(v) => records.push((
                    "V".into(),
                    k,
                    None,
                    v.value,
                    json!({ "raw": pair(v.raw), "truncation": v.truncation, "segments": v.segments }),
                )),
                Err(Error::Inconclusive { best, reason, .. }) => {
                    inconclusive = true;
                    records.push((
                        "V".into(),
                        k,
                        None,
                        best.clamp01(),
                        json!({ "inconclusive": true, "reason": reason }),
                    ));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    let text = match format {
        Format::Json => {
            let rows: Vec<Value> = records
                .iter()
                .map(|(q, k, m, v, extra)| {
                    let mut o = json!({ "quantity": q, "k": k, "m": m, "value": pair(*v), "width": v.width() });
                    if let (Value::Object(o), Value::Object(e)) = (&mut o, extra) {
                        o.extend(e.clone());
                    }
                    o
                })
                .collect();
            pretty(&json!({ "reward": reward.label(), "discount": disc.as_ref().map(|d| d.label()), "tol": a.tol, "values": rows }))
        }
        Format::Csv | Format::Table => {
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|(q, k, m, v, extra)| {
                    let note = if extra.get("inconclusive").is_some() { "inconclusive" } else { "" };
                    let m = m.map(|m| m.to_string()).unwrap_or_default();
                    if format == Format::Csv {
                        vec![q.clone(), k.to_string(), m, num(v.lo()), num(v.hi()), note.into()]
                    } else {
                        vec![q.clone(), k.to_string(), m, interval(*v), short(v.width()), note.into()]
                    }
                })
                .collect();
            if format == Format::Csv {
                csv(&["quantity", "k", "m", "lo", "hi", "note"], &rows)?
            } else {
                text_table(&["quantity", "k", "m", "value", "width", "note"], &rows)
            }
        }
    };
    sink.emit(&text)?;
    Ok(if inconclusive { Status::Inconclusive } else { Status::Ok })
}

fn verdict_status(est: &LimitEstimate) -> Status {
    match est.verdict {
        Verdict::Converged { .. } => Status::Ok,
        Verdict::Oscillating { .. } => Status::Oscillating,
        Verdict::Inconclusive => Status::LimitsInconclusive,
    }
}

fn estimate_summary(est: &LimitEstimate) -> String {
    let q = match est.quantity {
        Quantity::U => "U",
        Quantity::V => "V",
        Quantity::FutureU => "U_km",
    };
    let opt = |x: Option<f64>| x.map(short).unwrap_or_else(|| "-".into());
    let mut lines = vec![
        format!("quantity      {q}"),
        format!("verdict       {}", est.verdict_label()),
        format!("alpha         {}", opt(est.alpha())),
        format!("beta          {}", opt(est.beta())),
        format!("liminf band   {}", interval(est.liminf_est)),
        format!("limsup band   {}", interval(est.limsup_est)),
        format!("tol           {}", short(est.tol)),
        format!("points        {} ({} inconclusive)", est.schedule.len(), est.inconclusive_points),
    ];
    for t in &est.tracks {
        lines.push(format!("track         {}: band {}", t.name, interval(t.band)));
    }
    lines.join("\n")
}

fn estimate_rows(est: &LimitEstimate) -> Vec<Vec<String>> {
    let q = serde_json::to_value(est.quantity).expect("quantity serializes");
    let q = q.as_str().unwrap_or_default().to_string();
    std::iter::once(("schedule", &est.schedule, &est.values))
        .chain(est.tracks.iter().map(|t| (t.name.as_str(), &t.indices, &t.values)))
        .flat_map(|(series, idx, vals)| {
            let q = q.clone();
            idx.iter()
                .zip(vals)
                .map(move |(i, v)| vec![q.clone(), series.to_string(), i.to_string(), num(v.lo()), num(v.hi())])
        })
        .collect()
}

pub fn limits(a: &LimitsArgs, format: Format, sink: &Sink, guards: &Guards) -> Result<Status, CliError> {
    let reward = parse_reward(&a.reward)?;
    let disc = a.discount.as_deref().map(parse_discount).transpose()?;
    let schedule = parse_schedule(&a.schedule)?;
    let which = a.quantity.unwrap_or(if disc.is_some() { QuantityArg::V } else { QuantityArg::U });
    let quantities = match which {
        QuantityArg::U => vec![Quantity::U],
        QuantityArg::V => vec![Quantity::V],
        QuantityArg::Both => vec![Quantity::U, Quantity::V],
    };
    let opts = ScanOptions {
        tol: a.tol,
        value_tol: a.value_tol.unwrap_or(a.tol / 4.0),
        guards: *guards,
    };
    let estimates = quantities
        .into_iter()
        .map(|q| limit_scan(&reward, disc.as_ref(), q, &schedule, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match format {
        Format::Json => {
            let all: Vec<Value> = estimates.iter().map(|e| e.to_json()).collect();
            pretty(&json!({
                "reward": reward.label(),
                "discount": disc.as_ref().map(|d| d.label()),
                "estimates": all,
            }))
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = estimates.iter().flat_map(estimate_rows).collect();
            csv(&["quantity", "series", "index", "lo", "hi"], &rows)?
        }
        Format::Table => {
            let mut parts = vec![format!(
                "reward {}{}",
                reward.label(),
                disc.as_ref().map(|d| format!(", discount {}", d.label())).unwrap_or_default()
            )];
            parts.extend(estimates.iter().map(estimate_summary));
            parts.join("\n\n")
        }
    };
    sink.emit(&text)?;
    let statuses: Vec<Status> = estimates.iter().map(verdict_status).collect();
    Ok(if statuses.contains(&Status::LimitsInconclusive) {
        Status::LimitsInconclusive
    } else if statuses.contains(&Status::Oscillating) {
        Status::Oscillating
    } else {
        Status::Ok
    })
}

pub fn construct(a: &ConstructArgs, format: Format, sink: &Sink, guards: &Guards) -> Result<Status, CliError> {
    let disc = parse_discount(&a.discount)?;
    let c = match a.prop {
        1 => construct_prop1_reward(&disc, a.n, guards.search_bound)?,
        _ => construct_prop2_reward(&disc, a.n, guards.search_bound)?,
    };
    let reward_json = c.reward().to_json();
    let report = match format {
        Format::Json => pretty(&json!({
            "construction": c,
            "reward": serde_json::from_str::<Value>(&reward_json).expect("reward JSON parses"),
        })),
        Format::Csv => {
            let rows: Vec<Vec<String>> = c
                .checks
                .iter()
                .map(|x| vec![x.name.clone(), x.holds.to_string(), x.detail.clone()])
                .collect();
            csv(&["check", "holds", "detail"], &rows)?
        }
        Format::Table => {
            let runs: Vec<Vec<String>> = c
                .runs
                .iter()
                .enumerate()
                .map(|(i, (k, m))| vec![(i + 1).to_string(), k.to_string(), m.to_string()])
                .collect();
            let checks: Vec<Vec<String>> = c
                .checks
                .iter()
                .map(|x| vec![if x.holds { "ok" } else { "FAILED" }.into(), x.name.clone(), x.detail.clone()])
                .collect();
            let mut t = format!(
                "proposition {} on {}: {} of {} runs\n\n{}\n\n{}",
                c.proposition,
                c.discount,
                c.runs.len(),
                c.requested,
                text_table(&["n", "k_n", "m_n"], &runs),
                text_table(&["status", "check", "detail"], &checks)
            );
            for w in &c.warnings {
                t.push_str(&format!("\nwarning: {w}"));
            }
            t
        }
    };
    match &sink.out {
        Some(path) => {
            std::fs::write(path, format!("{reward_json}\n"))?;
            Sink { out: None }.emit(&report)?;
        }
        None => sink.emit(&report)?,
    }
    Ok(if c.all_hold() { Status::Ok } else { Status::VerifyFailed })
}
