use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;
use turan_gaps::chain::{
    build_chain_ladder, gap_bound, minimal_m, near_equality_check, verify_gap_bound, ChainConfig, EdgeOrder,
    NEAR_EQUALITY_DELTA, NEAR_EQUALITY_EPS,
};
use turan_gaps::dominance::{bunching_verify, format_half, parse_half_integer, DownSet};
use turan_gaps::io::{chain_csv, edge_list, ladder_csv, parse_down_set, parse_pattern, Certificate};
use turan_gaps::ladder::{self, lemma_sweep, monte_carlo_urns, verify_lemma, LemmaReport};
use turan_gaps::pattern::blow_up;
use turan_gaps::scalar::rational_to_f64;
use turan_gaps::simplex::{certify_max_upper, maximize, GRID_MAX_VARS};
use turan_gaps::{BlowupSpec, Pattern};

use crate::args::{Command, Format, OptArgs, Order};

/// Result of a command: the primary output, whether every mathematical
/// check held, and a one-line summary for the diagnostic stream.
pub struct Output {
    pub body: String,
    pub passed: bool,
    pub summary: String,
}

#[derive(Debug)]
pub struct UsageError(pub String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type Run = Result<Output, UsageError>;

pub fn execute(command: &Command, format: Format) -> Run {
    match command {
        Command::Lagrangian { pattern, grid, opt } => lagrangian(pattern, *grid, opt, format),
        Command::Chain { r, m, order, slow, opt } => chain(*r, *m, *order, *slow, opt, format),
        Command::Ladder { r, mc_trials, seed } => ladder_cmd(*r, *mc_trials, *seed, format),
        Command::MaxStep { r } => max_step(*r, format),
        Command::LemmaCheck { r, s, downset, opt, .. } => lemma_check(*r, *s, downset.as_deref(), opt, format),
        Command::Bunching { r, h, samples, seed } => bunching(*r, h, *samples, *seed, format),
        Command::BlowUp { pattern, sizes } => blow_up_cmd(pattern, sizes, format),
        Command::MinimalM { r } => minimal(*r, format),
        Command::Replay { .. } => unreachable!("replay is handled by the dispatcher"),
    }
}

fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(headers.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

fn to_json(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json value serializes") + "\n"
}

fn read(path: &Path) -> Result<String, UsageError> {
    fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn load_pattern(path: &Path) -> Result<Pattern, UsageError> {
    Ok(parse_pattern(&read(path)?)?)
}

fn lagrangian(path: &Path, grid: usize, opt: &OptArgs, format: Format) -> Run {
    let pattern = load_pattern(path)?;
    let poly = pattern.lagrange_polynomial();
    let res = maximize::<f64>(&pattern, &opt.config())?;
    let upper = if grid > 0 && pattern.m() <= GRID_MAX_VARS { Some(certify_max_upper(&pattern, grid)?) } else { None };
    let passed = upper.as_ref().is_none_or(|u| res.value <= u.bound);
    let cert = Certificate::new(&pattern, &res);
    let point: Vec<String> = cert.point.iter().map(|c| format!("{c:.12}")).collect();

    let body = match format {
        Format::Json => to_json(&json!({ "polynomial": poly.to_string(), "certificate": cert, "upper": upper })),
        Format::Csv => {
            let mut out = String::from("quantity,value\n");
            let _ = writeln!(out, "value,{}", cert.value);
            let _ = writeln!(out, "kkt_residual,{}", cert.kkt_residual);
            for (i, c) in cert.point.iter().enumerate() {
                let _ = writeln!(out, "x{},{c}", i + 1);
            }
            if let Some(u) = &upper {
                let _ = writeln!(out, "upper_bound,{}", u.bound);
            }
            out
        }
        Format::Table => {
            let mut rows = vec![
                vec!["polynomial".into(), poly.to_string()],
                vec!["value".into(), format!("{:.12}", cert.value)],
                vec!["kkt residual".into(), format!("{:.3e}", cert.kkt_residual)],
                vec!["point".into(), point.join(" ")],
            ];
            if let Some(u) = &upper {
                rows.push(vec![format!("upper bound (N={})", u.resolution), format!("{:.12}", u.bound)]);
            }
            table(&["quantity", "value"], &rows)
        }
    };
    let summary = match &upper {
        Some(u) => format!("Lagrangian in [{:.10}, {:.10}]", res.value, u.bound),
        None => format!("Lagrangian >= {:.10}", res.value),
    };
    Ok(Output { body, passed, summary })
}

fn chain(r: u32, m: Option<usize>, order: Order, slow: bool, opt: &OptArgs, format: Format) -> Run {
    let m = if slow { minimal_m(r)? } else { m.unwrap_or(6) };
    let order = match order {
        Order::Colex => EdgeOrder::Colex,
        Order::Lex => EdgeOrder::Lex,
        Order::Random => EdgeOrder::Random(opt.seed),
    };
    let config = ChainConfig { order, opt: opt.config(), ..ChainConfig::new(r, m) };
    let ladder = build_chain_ladder::<f64>(&config)?;
    let report = verify_gap_bound(&ladder, r)?;
    let near = near_equality_check(&ladder, r, NEAR_EQUALITY_EPS, NEAR_EQUALITY_DELTA);
    let passed = report.passed() && near.passed();

    let body = match format {
        Format::Csv => chain_csv(&ladder),
        Format::Json => {
            let edges: Vec<Vec<usize>> = ladder.edges.iter().map(|e| e.iter().map(|v| v + 1).collect()).collect();
            to_json(&json!({ "edges": edges, "report": report, "near_equality": near }))
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|row| {
                    let edge = if row.index == 0 {
                        "-".to_string()
                    } else {
                        edge_list(&ladder.edges[row.index - 1..row.index]).trim_end().to_string()
                    };
                    vec![
                        row.index.to_string(),
                        edge,
                        format!("{:.10}", row.value),
                        format!("{:.10}", row.step),
                        format!("{:.1e}", row.kkt_residual),
                    ]
                })
                .collect();
            table(&["i", "edge", "value", "step", "kkt"], &rows)
        }
    };
    let mut summary = format!(
        "max step {:.10} at {} (bound {} = {:.10})",
        report.max_step,
        report.max_step_index,
        gap_bound(r),
        report.bound
    );
    if let Some(top) = &report.top {
        let _ = write!(summary, "; top {:.10} vs 1 - bound {:.10}", top.value, top.threshold);
    }
    if !report.step_violations.is_empty() {
        let _ = write!(summary, "; steps above bound at {:?}", report.step_violations);
    }
    if !report.monotone_violations.is_empty() {
        let _ = write!(summary, "; decreases at {:?}", report.monotone_violations);
    }
    if !near.passed() {
        let _ = write!(summary, "; near-equality violated at {:?}", near.violations);
    }
    Ok(Output { body, passed, summary })
}

fn ladder_cmd(r: u32, mc_trials: Option<u64>, seed: u64, format: Format) -> Run {
    let entries = ladder::ladder(r)?;
    let mc = mc_trials.map(|n| monte_carlo_urns(r, n, seed)).transpose()?;
    // (frequency, z-score) per entry
    let comparison: Vec<(f64, f64)> = match &mc {
        Some(mc) => entries
            .iter()
            .map(|e| {
                let p = rational_to_f64(&e.step);
                let se = (p * (1.0 - p) / mc.trials as f64).sqrt();
                let freq = mc.frequency(&e.composition);
                (freq, if se > 0.0 { (freq - p).abs() / se } else { 0.0 })
            })
            .collect(),
        None => Vec::new(),
    };
    let passed = comparison.iter().all(|&(_, z)| z <= 4.0);

    let body = match format {
        Format::Csv if mc.is_none() => ladder_csv(&entries),
        Format::Csv => {
            let mut out = String::new();
            for (i, line) in ladder_csv(&entries).lines().enumerate() {
                let extra = match i {
                    0 => "mc_frequency,z_score".to_string(),
                    _ => format!("{},{}", comparison[i - 1].0, comparison[i - 1].1),
                };
                let _ = writeln!(out, "{line},{extra}");
            }
            out
        }
        Format::Json => {
            let rows: Vec<_> = entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let mut v = serde_json::to_value(e).expect("ladder entry serializes");
                    if let Some(&(freq, z)) = comparison.get(i) {
                        v["mc_frequency"] = json!(freq);
                        v["z_score"] = json!(z);
                    }
                    v
                })
                .collect();
            to_json(&json!({ "r": r, "entries": rows, "mc_trials": mc_trials, "seed": seed }))
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let mut row = vec![
                        e.index.to_string(),
                        e.composition.to_string(),
                        e.value.to_string(),
                        e.step.to_string(),
                        format!("{:.8}", rational_to_f64(&e.step)),
                    ];
                    if let Some(&(freq, z)) = comparison.get(i) {
                        row.push(format!("{freq:.8}"));
                        row.push(format!("{z:.2}"));
                    }
                    row
                })
                .collect();
            let mut headers = vec!["i", "composition", "value", "step", "step (decimal)"];
            if mc.is_some() {
                headers.extend(["mc frequency", "z"]);
            }
            table(&headers, &rows)
        }
    };
    let worst = comparison.iter().map(|c| c.1).fold(0.0, f64::max);
    let summary = match mc {
        Some(mc) => format!("{} steps; {} trials, largest z-score {worst:.2}", entries.len(), mc.trials),
        None => format!("{} steps", entries.len()),
    };
    Ok(Output { body, passed, summary })
}

fn max_step(r: u32, format: Format) -> Run {
    let best = ladder::max_step(r)?;
    let decimal = rational_to_f64(&best.step);
    let body = match format {
        Format::Json => to_json(&json!({ "r": r, "max_step": best, "decimal": decimal })),
        Format::Csv => format!(
            "r,step_num,step_den,decimal,composition,index\n{r},{},{},{decimal},{},{}\n",
            best.step.numer(),
            best.step.denom(),
            best.composition,
            best.index
        ),
        Format::Table => table(
            &["r", "step", "decimal", "composition", "index"],
            &[vec![
                r.to_string(),
                best.step.to_string(),
                format!("{decimal:.10}"),
                best.composition.to_string(),
                best.index.to_string(),
            ]],
        ),
    };
    Ok(Output { body, passed: true, summary: format!("max step {} at {}", best.step, best.composition) })
}

fn members_label(report: &LemmaReport) -> String {
    let names: Vec<String> = report.members.iter().map(ToString::to_string).collect();
    format!("{{{}}}", names.join(" "))
}

fn lemma_check(r: Option<u32>, s: Option<usize>, downset: Option<&Path>, opt: &OptArgs, format: Format) -> Run {
    let cfg = opt.config();
    let reports = match (downset, r, s) {
        (Some(path), _, _) => {
            let a: DownSet = parse_down_set(&read(path)?)?;
            vec![verify_lemma(&a, &cfg)?]
        }
        (None, Some(r), Some(s)) => lemma_sweep(r, s, &cfg)?,
        _ => return Err(UsageError("need --r and --s, or --downset".into())),
    };
    let failures = reports.iter().filter(|rep| !rep.passed()).count();
    let body = match format {
        Format::Json => to_json(&serde_json::to_value(&reports).expect("reports serialize")),
        Format::Csv => {
            let mut out =
                String::from("members,uniform_num,uniform_den,optimizer_value,kkt_residual,upper_bound,passed\n");
            for rep in &reports {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    members_label(rep),
                    rep.uniform_value.numer(),
                    rep.uniform_value.denom(),
                    rep.optimizer_value,
                    rep.kkt_residual,
                    rep.upper.as_ref().map_or(String::new(), |u| u.bound.to_string()),
                    rep.passed()
                );
            }
            out
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|rep| {
                    vec![
                        members_label(rep),
                        rep.uniform_value.to_string(),
                        format!("{:.12}", rep.optimizer_value),
                        format!("{:.1e}", rep.kkt_residual),
                        rep.upper.as_ref().map_or("-".into(), |u| format!("{:.6}", u.bound)),
                        if rep.passed() { "ok" } else { "FAIL" }.into(),
                    ]
                })
                .collect();
            table(&["down-set", "uniform", "optimizer", "kkt", "upper", "check"], &rows)
        }
    };
    let summary = format!("{} down-closed sets, {failures} failures", reports.len());
    Ok(Output { body, passed: failures == 0, summary })
}

fn bunching(r: u32, h: &str, samples: usize, seed: u64, format: Format) -> Run {
    let h2 = parse_half_integer(h)?;
    let report = bunching_verify(r, h2, samples, seed)?;
    let inside = |j2: i64| j2.unsigned_abs() <= h2 as u64;
    let body = match format {
        Format::Json => to_json(&serde_json::to_value(&report).expect("report serializes")),
        Format::Csv => {
            let mut out = String::from("j,coefficient,inside\n");
            for (j2, c) in &report.coefficients {
                let _ = writeln!(out, "{},{c},{}", format_half(*j2), inside(*j2));
            }
            out
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = report
                .coefficients
                .iter()
                .map(|(j2, c)| {
                    let side = if inside(*j2) { "<= 0" } else { ">= 0" };
                    vec![format_half(*j2), c.to_string(), side.into()]
                })
                .collect();
            let mut out = table(&["j", "coefficient", "expected"], &rows);
            let _ = writeln!(out, "\ncoefficient sum  {}", report.coefficient_sum);
            let _ = writeln!(out, "min sample       {:.3e} over {} points", report.min_sample, report.samples);
            let terms: Vec<String> = report
                .pairing
                .iter()
                .map(|t| format!("{} M({}, {})", t.weight, format_half(t.i2), format_half(t.j2)))
                .collect();
            let _ = writeln!(out, "pairing          {}", if terms.is_empty() { "-".into() } else { terms.join(" + ") });
            out
        }
    };
    let summary = if report.passed() {
        format!("bunching holds for r={r}, h={}", format_half(h2 as i64))
    } else {
        format!("bunching failed for r={r}, h={}: {}", format_half(h2 as i64), report.failures().join(", "))
    };
    Ok(Output { body, passed: report.passed(), summary })
}

fn blow_up_cmd(path: &Path, sizes: &[usize], format: Format) -> Run {
    let spec = BlowupSpec::new(load_pattern(path)?, sizes.to_vec())?;
    let edges = blow_up(&spec);
    let body = match format {
        Format::Table => edge_list(&edges),
        Format::Csv => edge_list(&edges).replace(' ', ","),
        Format::Json => {
            let one_based: Vec<Vec<usize>> = edges.iter().map(|e| e.iter().map(|v| v + 1).collect()).collect();
            to_json(&json!({ "n": spec.n(), "part_sizes": sizes, "edges": one_based }))
        }
    };
    Ok(Output { body, passed: true, summary: format!("{} edges on {} vertices", edges.len(), spec.n()) })
}

fn minimal(r: u32, format: Format) -> Run {
    let m = minimal_m(r)?;
    let body = match format {
        Format::Table => format!("{m}\n"),
        Format::Csv => format!("r,minimal_m\n{r},{m}\n"),
        Format::Json => to_json(&json!({ "r": r, "minimal_m": m })),
    };
    Ok(Output { body, passed: true, summary: format!("minimal m for r={r} is {m}") })
}
