//! CSV, SVG and JSON writers. Output is a pure function of its input, so
//! identical records give byte-identical files.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::json;

use super::{ArithmeticRow, CirRow, ErrorRateRecord, ExperimentConfig, Mode, BOUND_LABEL, SNR_DEFINITION};
use crate::particle::TracePoint;
use crate::{Error, Result};

/// Error rates of zero are drawn at this value on log axes.
pub const ER_FLOOR: f64 = 1e-6;

pub const ER_HEADER: &str = "snr_db,error_rate,n_err,n_total,bound";
pub const TRACE_HEADER: &str = "time_s,N_A,N_B,annihilated_total";

/// Nine significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn er_csv(records: &[ErrorRateRecord]) -> String {
    let mut s = format!("{ER_HEADER}\n");
    for r in records {
        writeln!(
            s,
            "{},{},{},{},{}",
            fmt_float(r.snr_db),
            fmt_float(r.error_rate),
            r.n_err,
            r.n_total,
            opt(r.bound)
        )
        .unwrap();
    }
    s
}

fn field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::domain(format!("line {line}: cannot parse {s:?}")))
}

/// Reads back a file written by [`er_csv`].
pub fn parse_er_csv(text: &str) -> Result<Vec<ErrorRateRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(ER_HEADER) {
        return Err(Error::domain("unexpected header"));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(Error::domain(format!("line {}: expected 5 fields", k + 2)));
            }
            Ok(ErrorRateRecord {
                snr_db: field(f[0], k + 2)?,
                error_rate: field(f[1], k + 2)?,
                n_err: field(f[2], k + 2)?,
                n_total: field(f[3], k + 2)?,
                bound: if f[4].is_empty() { None } else { Some(field(f[4], k + 2)?) },
            })
        })
        .collect()
}

/// Plot data: the error rate with zeros replaced by [`ER_FLOOR`] and flagged.
pub fn er_plot_csv(records: &[ErrorRateRecord]) -> String {
    let mut s = String::from("snr_db,plotted_error_rate,floored,bound\n");
    for r in records {
        let floored = r.error_rate < ER_FLOOR;
        writeln!(
            s,
            "{},{},{},{}",
            fmt_float(r.snr_db),
            fmt_float(r.error_rate.max(ER_FLOOR)),
            u8::from(floored),
            opt(r.bound)
        )
        .unwrap();
    }
    s
}

pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut s = format!("{TRACE_HEADER}\n");
    for p in trace {
        writeln!(s, "{},{},{},{}", fmt_float(p.time_s), p.n_a, p.n_b, p.annihilated_total).unwrap();
    }
    s
}

pub fn cir_csv(rows: &[CirRow]) -> String {
    let mut s = String::from("time_s,theory,exact,simulated,net_simulated\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{}",
            fmt_float(r.time_s),
            fmt_float(r.theory),
            fmt_float(r.exact),
            fmt_float(r.simulated),
            fmt_float(r.net_simulated)
        )
        .unwrap();
    }
    s
}

pub fn bound_forms_csv(snr_db: &[f64], exact: &[f64], printed: &[f64]) -> String {
    let mut s = String::from("snr_db,bound_exact_variance,bound_printed_variance\n");
    for ((x, e), p) in snr_db.iter().zip(exact).zip(printed) {
        writeln!(s, "{},{},{}", fmt_float(*x), fmt_float(*e), fmt_float(*p)).unwrap();
    }
    s
}

pub fn arith_csv(rows: &[ArithmeticRow]) -> String {
    let mut s = String::from("op,a,b,expected,noiseless,remainder,correct,trials,accuracy\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.op.symbol(),
            r.a,
            r.b,
            r.expected,
            r.noiseless,
            r.remainder.map(|x| x.to_string()).unwrap_or_default(),
            r.correct,
            r.trials,
            fmt_float(r.accuracy())
        )
        .unwrap();
    }
    s
}

/// Metadata describing a run. Contains no timestamps or host details.
pub fn run_json(mode: Mode, cfg: &ExperimentConfig, results: Option<&serde_json::Value>) -> String {
    let v = json!({
        "mode": mode,
        "snr_definition": SNR_DEFINITION,
        "bound": BOUND_LABEL,
        "variance_form": cfg.variance_form,
        "samples_per_symbol": cfg.samples_per_symbol,
        "invented_defaults": cfg.invented_defaults(),
        "er_floor": ER_FLOOR,
        "config": cfg,
        "results": results,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("serialisable");
    s.push('\n');
    s
}

struct Frame {
    w: f64,
    h: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    const DEFAULT: Frame = Frame {
        w: 640.0,
        h: 420.0,
        left: 70.0,
        right: 20.0,
        top: 30.0,
        bottom: 50.0,
    };

    fn x(&self, u: f64) -> f64 {
        self.left + u * (self.w - self.left - self.right)
    }

    fn y(&self, v: f64) -> f64 {
        self.h - self.bottom - v * (self.h - self.top - self.bottom)
    }

    fn open(&self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">"#,
            self.w, self.h
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            self.left,
            self.top,
            self.w - self.left - self.right,
            self.h - self.top - self.bottom
        )
        .unwrap();
        writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{title}</text>"#, self.w / 2.0).unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#,
            self.x(0.5),
            self.h - 12.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{ylabel}</text>"#,
            self.y(0.5)
        )
        .unwrap();
        s
    }

    fn polyline(&self, pts: &[(f64, f64)], style: &str) -> String {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(u, v)| format!("{:.2},{:.2}", self.x(u), self.y(v)))
            .collect();
        format!(r#"<polyline fill="none" {style} points="{}"/>"#, coords.join(" ")) + "\n"
    }
}

fn span(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// Error rate and bound against SNR on a log axis.
pub fn er_svg(records: &[ErrorRateRecord]) -> String {
    let f = Frame::DEFAULT;
    let (x0, x1) = span(records.iter().map(|r| r.snr_db));
    let decades = -ER_FLOOR.log10();
    let u = |x: f64| (x - x0) / (x1 - x0);
    let v = |p: f64| 1.0 + p.clamp(ER_FLOOR, 1.0).log10() / decades;
    let mut s = f.open("Error rate vs SNR", "SNR (dB)", "error rate");
    for k in 0..=decades as i32 {
        let y = f.y(k as f64 / decades);
        writeln!(
            s,
            r##"<line x1="{}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{}</text>"##,
            f.left,
            f.w - f.right,
            f.left - 6.0,
            y + 4.0,
            k - decades as i32
        )
        .unwrap();
    }
    for r in records {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            f.x(u(r.snr_db)),
            f.h - f.bottom + 16.0,
            r.snr_db
        )
        .unwrap();
    }
    let sim: Vec<(f64, f64)> = records.iter().map(|r| (u(r.snr_db), v(r.error_rate))).collect();
    s += &f.polyline(&sim, r##"stroke="#1f77b4" stroke-width="2""##);
    for (r, &(a, b)) in records.iter().zip(&sim) {
        let fill = if r.error_rate < ER_FLOOR { "white" } else { "#1f77b4" };
        writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="#1f77b4"/>"##,
            f.x(a),
            f.y(b)
        )
        .unwrap();
    }
    let bound: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.bound.map(|b| (u(r.snr_db), v(b))))
        .collect();
    if !bound.is_empty() {
        s += &f.polyline(&bound, r##"stroke="#d62728" stroke-width="2" stroke-dasharray="6 4""##);
    }
    writeln!(
        s,
        r##"<text x="{0}" y="{1}" fill="#1f77b4">simulation (hollow: zero errors, drawn at floor)</text><text x="{0}" y="{2}" fill="#d62728">{BOUND_LABEL}</text>"##,
        f.left + 10.0,
        f.top + 16.0,
        f.top + 32.0
    )
    .unwrap();
    s + "</svg>\n"
}

/// Simulated occupancy against the two analytical curves.
pub fn cir_svg(rows: &[CirRow]) -> String {
    let f = Frame::DEFAULT;
    let (t0, t1) = span(rows.iter().map(|r| r.time_s));
    let top = rows
        .iter()
        .flat_map(|r| [r.theory, r.exact, r.simulated])
        .fold(0.0, f64::max)
        * 1.05;
    let pts = |g: fn(&CirRow) -> f64| -> Vec<(f64, f64)> {
        rows.iter().map(|r| ((r.time_s - t0) / (t1 - t0), g(r) / top)).collect()
    };
    let mut s = f.open("Receiver occupancy per released molecule", "time (ms)", "fraction inside receiver");
    for k in 0..=4 {
        let t = t0 + (t1 - t0) * k as f64 / 4.0;
        writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{:.1}</text>"#,
            f.x(k as f64 / 4.0),
            f.h - f.bottom + 16.0,
            t * 1e3
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
            f.left - 6.0,
            f.y(k as f64 / 4.0) + 4.0,
            top * k as f64 / 4.0
        )
        .unwrap();
    }
    s += &f.polyline(&pts(|r| r.simulated), r##"stroke="#1f77b4" stroke-width="1.5""##);
    s += &f.polyline(&pts(|r| r.theory), r##"stroke="#d62728" stroke-width="2" stroke-dasharray="6 4""##);
    s += &f.polyline(&pts(|r| r.exact), r##"stroke="#2ca02c" stroke-width="2" stroke-dasharray="2 3""##);
    writeln!(
        s,
        r##"<text x="{0}" y="{1}" fill="#1f77b4">particle simulation</text><text x="{0}" y="{2}" fill="#d62728">uniform-concentration impulse response</text><text x="{0}" y="{3}" fill="#2ca02c">exact ball occupancy</text>"##,
        f.x(0.55),
        f.top + 16.0,
        f.top + 32.0,
        f.top + 48.0
    )
    .unwrap();
    s + "</svg>\n"
}
