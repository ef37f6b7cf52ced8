//! Static SVG charts of result CSVs: distortion against beta per rule, with
//! the upper and lower bound curves for reference.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::experiment::CsvRow;

/// One parsed CSV line.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub beta: f64,
    /// Population distortion when present, else the empirical mean. May be
    /// infinite.
    pub value: Option<f64>,
    pub ub: Option<f64>,
    pub lb: Option<f64>,
}

fn parse_cell(s: &str, column: &str) -> std::result::Result<Option<f64>, String> {
    match s.trim() {
        "" | "ambiguous" => Ok(None),
        "inf" => Ok(Some(f64::INFINITY)),
        t => t.parse().map(Some).map_err(|_| format!("column `{column}` has non-numeric value `{t}`")),
    }
}

/// Reads a results CSV into per-rule series. Errors name the offending line.
pub fn read_results(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<Point>>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out: BTreeMap<String, Vec<Point>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::InvalidArgument(format!("{}: row {line}: {e}", path.display()))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: CsvRow = rec
            .deserialize(Some(&csv::StringRecord::from(CSV_HEADER.to_vec())))
            .map_err(|e| Error::InvalidArgument(format!("{}: row {line}: {e}", path.display())))?;
        let bad = |msg: String| Error::InvalidArgument(format!("{}: row {line}: {msg}", path.display()));
        let cell = |s: &str, column: &str| parse_cell(s, column).map_err(bad);
        let beta = cell(&row.beta, "beta")?
            .filter(|b| b.is_finite())
            .ok_or_else(|| bad("missing beta".into()))?;
        if !row.error.is_empty() {
            continue;
        }
        let value = match cell(&row.population_distortion, "population_distortion")? {
            Some(v) => Some(v),
            None => cell(&row.empirical_mean, "empirical_mean")?,
        };
        out.entry(row.rule.clone()).or_default().push(Point {
            beta,
            value,
            ub: cell(&row.ub, "ub")?,
            lb: cell(&row.lb, "lb")?,
        });
    }
    for pts in out.values_mut() {
        pts.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    }
    Ok(out)
}

const CSV_HEADER: [&str; 15] = [
    "rule", "m", "beta", "n", "trials", "seed", "population_distortion", "empirical_mean", "ci_lo", "ci_hi", "ub", "lb",
    "satisfied", "version", "error",
];

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::InvalidArgument(format!("plot rendering failed: {e}"))
}

const SIZE: (u32, u32) = (800, 560);

fn empty_chart(path: &Path, title: &str) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0f64..1f64, 1f64..10f64)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("beta").y_desc("distortion").draw().map_err(plot_err)?;
    root.draw(&Text::new("warning: no data rows", (300, 260), ("sans-serif", 20).into_font().color(&RED)))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

fn rule_chart(path: &Path, rule: &str, pts: &[Point]) -> Result<()> {
    let finite = |v: Option<f64>| v.filter(|x| x.is_finite() && *x > 0.0);
    let ys: Vec<f64> = pts.iter().flat_map(|p| [finite(p.value), finite(p.ub), finite(p.lb)]).flatten().collect();
    let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.beta), b.max(p.beta)));
    let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 0.5, x1 + 0.5) };
    let y0 = ys.iter().copied().fold(1.0, f64::min) * 0.8;
    let y1 = ys.iter().copied().fold(y0 * 10.0, f64::max) * 1.5;

    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("{rule}: distortion vs beta"), ("sans-serif", 22))
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, (y0..y1).log_scale())
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("beta").y_desc("distortion").draw().map_err(plot_err)?;

    let series = |get: fn(&Point) -> Option<f64>| -> Vec<(f64, f64)> {
        pts.iter().filter_map(|p| finite(get(p)).map(|y| (p.beta, y))).collect()
    };
    let ub = series(|p| p.ub);
    let lb = series(|p| p.lb);
    let obs = series(|p| p.value);
    if !ub.is_empty() {
        chart
            .draw_series(LineSeries::new(ub, RED.stroke_width(2)))
            .map_err(plot_err)?
            .label("upper bound")
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], RED));
    }
    if !lb.is_empty() {
        chart
            .draw_series(LineSeries::new(lb, GREEN.stroke_width(2)))
            .map_err(plot_err)?
            .label("lower bound")
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], GREEN));
    }
    chart
        .draw_series(LineSeries::new(obs.clone(), BLUE.stroke_width(2)))
        .map_err(plot_err)?
        .label("observed")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], BLUE));
    chart.draw_series(obs.iter().map(|&(x, y)| Circle::new((x, y), 3, BLUE.filled()))).map_err(plot_err)?;
    let clipped: Vec<f64> = pts.iter().filter(|p| p.value == Some(f64::INFINITY)).map(|p| p.beta).collect();
    if !clipped.is_empty() {
        chart
            .draw_series(clipped.iter().map(|&x| TriangleMarker::new((x, y1), 6, MAGENTA.filled())))
            .map_err(plot_err)?
            .label("unbounded (clipped)")
            .legend(|(x, y)| TriangleMarker::new((x + 10, y), 5, MAGENTA.filled()));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .position(SeriesLabelPosition::UpperLeft)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

fn file_stem(rule: &str) -> String {
    rule.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '-' }).collect()
}

/// Renders one SVG per rule found in `csv_paths` into `out_dir`, or a single
/// annotated empty chart when there are no data rows.
pub fn render_report(csv_paths: &[PathBuf], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let mut all: BTreeMap<String, Vec<Point>> = BTreeMap::new();
    for p in csv_paths {
        for (rule, pts) in read_results(p)? {
            all.entry(rule).or_default().extend(pts);
        }
    }
    let mut written = Vec::new();
    if all.is_empty() {
        let p = out_dir.join("empty.svg");
        empty_chart(&p, "distortion vs beta")?;
        written.push(p);
        return Ok(written);
    }
    for (rule, mut pts) in all {
        pts.sort_by(|a, b| a.beta.total_cmp(&b.beta));
        let p = out_dir.join(format!("{}.svg", file_stem(&rule)));
        rule_chart(&p, &rule, &pts)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "rule,m,beta,n,trials,seed,population_distortion,empirical_mean,ci_lo,ci_hi,ub,lb,satisfied,version,error\n";

    fn write(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("r.csv");
        std::fs::write(&p, format!("{HEADER}{body}")).unwrap();
        p
    }

    #[test]
    fn empty_csv_gives_warning_chart() {
        let d = tempfile::tempdir().unwrap();
        let p = write(d.path(), "");
        let out = render_report(&[p], d.path()).unwrap();
        let svg = std::fs::read_to_string(&out[0]).unwrap();
        assert!(svg.contains("no data rows"));
    }

    #[test]
    fn inf_rows_are_clipped_markers() {
        let d = tempfile::tempdir().unwrap();
        let p = write(
            d.path(),
            "plurality,3,2,100,2,1,,inf,,,10,1,false,0.1.0,\nplurality,3,3,100,2,1,2.5,2.4,2,3,20,2,true,0.1.0,\n",
        );
        let pts = read_results(&p).unwrap();
        assert_eq!(pts["plurality"][0].value, Some(f64::INFINITY));
        let out = render_report(&[p], d.path()).unwrap();
        assert!(std::fs::read_to_string(&out[0]).unwrap().contains("unbounded (clipped)"));
    }

    #[test]
    fn malformed_row_is_named() {
        let d = tempfile::tempdir().unwrap();
        let p = write(d.path(), "copeland,3,2,100,2,1,1.1,1.2,,,2,1,true,0.1.0,\ncopeland,3,x,100,2,1,1,1,,,2,1,true,0.1.0,\n");
        let e = read_results(&p).unwrap_err().to_string();
        assert!(e.contains("row 3"), "{e}");
        let p = write(d.path(), "copeland,3,2\n");
        assert!(read_results(&p).unwrap_err().to_string().contains("row 2"));
    }
}
