//! Scalars read off sweep curves: slopes, 3 dB points and curve crossings.

use std::collections::BTreeMap;

use ris_core::montecarlo::{SweepRow, SweepVariable};

/// Least-squares slope of `y` against `x`; `None` with fewer than 3 points.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope in dB per decade of `M`.
pub fn slope_db_per_decade(m: &[f64], dbm: &[f64]) -> Option<f64> {
    let x: Vec<f64> = m.iter().map(|v| v.log10()).collect();
    fit_slope(&x, dbm)
}

/// First `x` where `y` falls to `level`, linearly interpolated.
pub fn find_crossing(x: &[f64], y: &[f64], level: f64) -> Option<f64> {
    if y.first().is_some_and(|&y0| y0 <= level) {
        return None;
    }
    let j = y.iter().position(|&v| v <= level)?;
    let (x0, x1, y0, y1) = (x[j - 1], x[j], y[j - 1], y[j]);
    if y1 == level {
        return Some(x1);
    }
    Some(x0 + (level - y0) / (y1 - y0) * (x1 - x0))
}

/// Where the curve has dropped 3 dB below its first value.
pub fn find_3db_point(x: &[f64], y: &[f64]) -> Option<f64> {
    let y0 = *y.first()?;
    find_crossing(x, y, y0 - 3.0)
}

/// Points where `a - b` changes sign, linearly interpolated.
pub fn sign_changes(x: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for j in 0..d.len() {
        if d[j] == 0.0 {
            continue;
        }
        if let Some(i) = last {
            if d[i].signum() != d[j].signum() {
                out.push(x[i] + d[i] / (d[i] - d[j]) * (x[j] - x[i]));
            }
        }
        last = Some(j);
    }
    out
}

fn series_key(r: &SweepRow) -> String {
    if r.codebook.is_empty() {
        format!("{}.{}", r.channel, r.method)
    } else {
        format!("{}.{}.{}", r.channel, r.codebook, r.method)
    }
}

/// Rows grouped by (channel, codebook, method), in first-seen order.
pub fn series(rows: &[SweepRow]) -> Vec<(String, Vec<&SweepRow>)> {
    let mut out: Vec<(String, Vec<&SweepRow>)> = Vec::new();
    for r in rows {
        let key = series_key(r);
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => out.push((key, vec![r])),
        }
    }
    out
}

/// Derived scalars for a sweep, keyed by a dotted name.
pub fn derive(variable: SweepVariable, rows: &[SweepRow]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let groups = series(rows);
    let col =
        |v: &[&SweepRow], f: fn(&SweepRow) -> f64| v.iter().map(|r| f(r)).collect::<Vec<f64>>();
    match variable {
        SweepVariable::Elements => {
            for (key, v) in &groups {
                let m = col(v, |r| r.sweep_value);
                if let Some(s) = slope_db_per_decade(&m, &col(v, |r| r.mean_dbm)) {
                    out.insert(format!("slope_db_per_decade.{key}"), s);
                }
                if let Some(s) = slope_db_per_decade(&m, &col(v, |r| r.closedform_dbm)) {
                    out.insert(format!("slope_db_per_decade.{key}.closedform"), s);
                }
            }
        }
        SweepVariable::Decrement => {
            let quantized: Vec<_> = groups
                .iter()
                .filter(|(_, v)| !v[0].codebook.is_empty())
                .collect();
            for (key, v) in &quantized {
                let c = col(v, |r| r.sweep_value);
                if let Some(p) = find_3db_point(&c, &col(v, |r| r.eps_db)) {
                    out.insert(format!("3db_point_deg.{key}"), p);
                }
                if let Some(p) = find_3db_point(&c, &col(v, |r| r.eps_closedform_db)) {
                    out.insert(format!("3db_point_deg.{key}.closedform"), p);
                }
            }
            for (i, (ka, a)) in quantized.iter().enumerate() {
                for (kb, b) in quantized.iter().skip(i + 1) {
                    let same_channel = a[0].channel == b[0].channel;
                    let same_method = a[0].method == b[0].method;
                    let same_codebook = a[0].codebook == b[0].codebook;
                    if !same_channel || a.len() != b.len() || !(same_method ^ same_codebook) {
                        continue;
                    }
                    let c = col(a, |r| r.sweep_value);
                    let x = sign_changes(
                        &c,
                        &col(a, |r| r.closedform_mw),
                        &col(b, |r| r.closedform_mw),
                    );
                    out.insert(format!("crossings.{ka}_vs_{kb}.closedform"), x.len() as f64);
                    if let Some(first) = x.first() {
                        out.insert(format!("crossing_deg.{ka}_vs_{kb}.closedform"), *first);
                    }
                }
            }
        }
        SweepVariable::UserAngle | SweepVariable::CodebookSet => {
            for r in rows.iter().filter(|r| !r.codebook.is_empty()) {
                let key = format!("{}.{}", series_key(r), r.sweep_value);
                out.insert(format!("eps_db.{key}"), r.eps_db);
                out.insert(format!("eps_db.{key}.closedform"), r.eps_closedform_db);
            }
        }
    }
    out
}
