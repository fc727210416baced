//! Plain-text rendering for `--format table`.

use serde_json::Value;
use shapeinv_core::catalog::Class;
use shapeinv_core::spectral::SpectrumReport;
use shapeinv_core::transnet::ProjectionReport;

pub fn class(c: Class) -> String {
    match c {
        Class::TypeI => "type-I",
        Class::TypeII => "type-II",
        Class::Extended => "extended",
    }
    .to_string()
}

/// Left-aligned columns separated by two spaces.
pub fn table(headers: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let rows: Vec<Vec<String>> = rows.collect();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let mut s = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ");
        s.truncate(s.trim_end().len());
        s + "\n"
    };
    let mut out = line(headers.iter().map(|h| h.to_string()).collect());
    for r in rows {
        out += &line(r);
    }
    out
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        Value::Array(items) => {
            let cells: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), format!("[{}]", cells.join(", "))));
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// One `key  value` line per leaf of a JSON report.
pub fn key_values(v: &Value) -> String {
    let mut pairs = Vec::new();
    flatten("", v, &mut pairs);
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    pairs.into_iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

pub fn spectrum(r: &SpectrumReport) -> String {
    let rows = r.eigenvalues.iter().zip(&r.analytic).enumerate().map(|(n, (e, a))| {
        vec![
            n.to_string(),
            format!("{e:.6}"),
            a.map_or("-".into(), |a| format!("{a:.6}")),
            a.map_or("-".into(), |a| format!("{:.2e}", (e - a).abs())),
        ]
    });
    let mut s = format!("{}  box [{}, {}]  N={}\n", r.entry, r.grid.x0, r.grid.x1, r.grid.n);
    s += &table(&["n", "numeric", "analytic", "error"], rows);
    s += &format!("max error {:.3e} (tolerance {:.1e})", r.max_err, r.tolerance);
    if let Some(d) = r.eps_drift {
        s += &format!(", eps-halving drift {d:.3e}");
    }
    s + "\n"
}

pub fn projection(r: &ProjectionReport) -> String {
    let rows = r.steps.iter().map(|st| {
        let worst = st.energies.iter().fold(0.0f64, |m, c| m.max(c.error));
        vec![format!("{}", st.limit_value), format!("{:.3e}", st.sup_error), format!("{worst:.3e}")]
    });
    let mut s = format!("{}: {} -> {} on [{}, {}]\n", r.edge, r.source, r.target, r.interval.0, r.interval.1);
    s += &table(&[&r.limit_var, "sup |W - W_target|", "max energy error"], rows);
    let ratios: Vec<String> = r.ratios.iter().map(|x| format!("{x:.3}")).collect();
    s + &format!("ratios [{}] (bound {})\n", ratios.join(", "), r.ratio_bound)
}
