//! Minimal SVG charts of the primary metric. A convenience, never an
//! acceptance artifact.

use std::collections::BTreeMap;

use metrics::ResultTable;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;

const COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Mean of `value` grouped by (series axis, x axis).
fn grouped_means(
    table: &ResultTable,
    series_axis: &str,
    x_axis: &str,
    metric_filter: Option<(&str, &str)>,
) -> BTreeMap<String, Vec<(f64, f64)>> {
    let Some(sk) = table.axes.iter().position(|a| a == series_axis) else {
        return BTreeMap::new();
    };
    let Some(xk) = table.axes.iter().position(|a| a == x_axis) else {
        return BTreeMap::new();
    };
    let fk = metric_filter.and_then(|(axis, _)| table.axes.iter().position(|a| a == axis));
    let mut acc: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    for row in &table.rows {
        if let (Some((_, want)), Some(k)) = (metric_filter, fk) {
            if row.coords[k] != want {
                continue;
            }
        }
        if let Some(v) = row.value {
            let key = (row.coords[sk].clone(), row.coords[xk].clone());
            let e = acc.entry(key).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for ((series, x), (sum, n)) in acc {
        if let Ok(xv) = x.trim_start_matches('0').parse::<f64>().or_else(|_| x.parse()) {
            out.entry(series).or_default().push((xv, sum / n as f64));
        }
    }
    for points in out.values_mut() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

fn polyline_chart(
    series: &BTreeMap<String, Vec<(f64, f64)>>,
    x_label: &str,
    y_label: &str,
    log_y: bool,
) -> String {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for pts in series.values() {
        for &(x, y) in pts {
            xs.push(x);
            ys.push(if log_y { y.max(1e-12).log10() } else { y });
        }
    }
    if xs.is_empty() {
        return String::from("<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n");
    }
    let (x_min, x_max) = bounds(&xs);
    let (y_min, y_max) = bounds(&ys);
    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min).max(1e-12) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| {
        HEIGHT - MARGIN - (y - y_min) / (y_max - y_min).max(1e-12) * (HEIGHT - 2.0 * MARGIN)
    };
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{x_label}</text>\n",
        WIDTH / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        if log_y { format!("log10 {y_label}") } else { y_label.to_string() }
    ));
    for (si, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let yy = if log_y { y.max(1e-12).log10() } else { y };
                format!("{:.2},{:.2}", sx(x), sy(yy))
            })
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{name}</text>\n",
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * si as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Chart of the primary metric for an experiment's table; `None` when the
/// experiment has no natural chart.
pub fn render(experiment: &str, table: &ResultTable) -> Option<String> {
    match experiment {
        "curves" => {
            let series = grouped_means(table, "predictor", "context_length", None);
            Some(polyline_chart(&series, "context length", "mean squared error", true))
        }
        "double_descent" => {
            let mut only = BTreeMap::new();
            only.insert(
                "ols_min_norm".to_string(),
                grouped_means(table, "context_length", "context_length", None)
                    .into_iter()
                    .map(|(_, pts)| pts)
                    .flatten()
                    .collect::<Vec<_>>(),
            );
            let mut fixed = only;
            for pts in fixed.values_mut() {
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
            Some(polyline_chart(&fixed, "context length", "mean squared error", true))
        }
        "algoselect_error" | "algoselect_distance" => {
            let series = grouped_means(
                table,
                "component",
                "noise_level",
                Some(("metric", "mean_weight")),
            );
            let series: BTreeMap<String, Vec<(f64, f64)>> = series
                .into_iter()
                .filter(|(k, _)| k != "all")
                .map(|(k, pts)| {
                    (
                        format!("component {}", k.trim_start_matches('0')),
                        pts.into_iter()
                            .map(|(x, y)| (x.max(1e-12).log10(), y))
                            .collect(),
                    )
                })
                .collect();
            Some(polyline_chart(&series, "log10 noise level", "mean weight", false))
        }
        _ => None,
    }
}
