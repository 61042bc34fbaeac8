//! Static SVG renderings of training curves, method comparisons, sweeps and
//! trajectories.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use super::io::{read_csv, EpisodeRow, LogRow, SweepRow, TraceCsvRow};
use super::runs::Summary;
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

const SIZE: (u32, u32) = (720, 480);

/// What a rendered figure contains, for checks without parsing SVG.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlotContents {
    /// Line or bar series, one per method.
    pub series: usize,
    pub iotd_markers: usize,
    pub ris_markers: usize,
}

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

/// Padded `(lo, hi)` over finite values; `(0, 1)` when there are none.
fn range(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-9 * hi.abs().max(1.0));
    (lo - pad, hi + pad)
}

/// Groups rows by method, keeping first-seen order.
fn by_method<T>(rows: &[T], method: impl Fn(&T) -> &str) -> Vec<(String, Vec<&T>)> {
    let mut out: Vec<(String, Vec<&T>)> = Vec::new();
    for r in rows {
        let m = method(r);
        match out.iter_mut().find(|(k, _)| k == m) {
            Some((_, v)) => v.push(r),
            None => out.push((m.to_owned(), vec![r])),
        }
    }
    out
}

/// One curve per method of `metric` against generation.
pub fn plot_training(
    rows: &[LogRow],
    metric: &str,
    value: impl Fn(&LogRow) -> f64,
    path: &Path,
) -> Result<PlotContents> {
    let groups = by_method(rows, |r| &r.method);
    let (x0, x1) = range(rows.iter().map(|r| r.generation as f64));
    let (y0, y1) = range(rows.iter().map(&value));
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(10)
        .caption(format!("{metric} vs generation"), ("sans-serif", 18))
        .x_label_area_size(35)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("generation")
        .y_desc(metric)
        .draw()
        .map_err(plot_err)?;
    for (i, (method, rs)) in groups.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(
                rs.iter().map(|r| (r.generation as f64, value(r))),
                color.stroke_width(2),
            ))
            .map_err(plot_err)?
            .label(method.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
    }
    if !groups.is_empty() {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(PlotContents { series: groups.len(), ..Default::default() })
}

/// Mean ± std bars of `value` per method.
pub fn plot_bars(
    rows: &[EpisodeRow],
    metric: &str,
    value: impl Fn(&EpisodeRow) -> f64,
    path: &Path,
) -> Result<PlotContents> {
    let groups = by_method(rows, |r| &r.method);
    let stats: Vec<(String, Summary)> = groups
        .iter()
        .map(|(m, rs)| (m.clone(), Summary::of(&rs.iter().map(|r| value(r)).collect::<Vec<_>>())))
        .collect();
    let (_, hi) = range(stats.iter().map(|(_, s)| s.mean + s.std).chain([0.0]));
    let n = stats.len().max(1);
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(10)
        .caption(format!("{metric} by method"), ("sans-serif", 18))
        .x_label_area_size(35)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..n as f64, 0.0..hi)
        .map_err(plot_err)?;
    let names: Vec<String> = stats.iter().map(|(m, _)| m.clone()).collect();
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(n)
        .x_label_formatter(&|x| {
            let i = (x - 0.5).round();
            if (x - 0.5 - i).abs() < 1e-6 && i >= 0.0 {
                names.get(i as usize).cloned().unwrap_or_default()
            } else {
                String::new()
            }
        })
        .y_desc(metric)
        .draw()
        .map_err(plot_err)?;
    for (i, (_, s)) in stats.iter().enumerate() {
        let x = i as f64;
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series([Rectangle::new([(x + 0.2, 0.0), (x + 0.8, s.mean)], color.filled())])
            .map_err(plot_err)?;
        chart
            .draw_series([PathElement::new(
                vec![(x + 0.5, s.mean - s.std), (x + 0.5, s.mean + s.std)],
                BLACK.stroke_width(1),
            )])
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(PlotContents { series: stats.len(), ..Default::default() })
}

/// Mean AoI with ±std whiskers against the swept value, one curve per
/// method.
pub fn plot_sweep(rows: &[SweepRow], path: &Path) -> Result<PlotContents> {
    let groups = by_method(rows, |r| &r.method);
    let param = rows.first().map(|r| r.param.clone()).unwrap_or_default();
    let (x0, x1) = range(rows.iter().map(|r| r.value));
    let (y0, y1) = range(rows.iter().flat_map(|r| [r.aoi_mean - r.aoi_std, r.aoi_mean + r.aoi_std]));
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(10)
        .caption(format!("average AoI vs {param}"), ("sans-serif", 18))
        .x_label_area_size(35)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(param.as_str())
        .y_desc("average AoI")
        .draw()
        .map_err(plot_err)?;
    for (i, (method, rs)) in groups.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(rs.iter().map(|r| (r.value, r.aoi_mean)), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(method.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
        chart
            .draw_series(rs.iter().map(|r| {
                PathElement::new(
                    vec![(r.value, r.aoi_mean - r.aoi_std), (r.value, r.aoi_mean + r.aoi_std)],
                    color.stroke_width(1),
                )
            }))
            .map_err(plot_err)?;
    }
    if !groups.is_empty() {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(PlotContents { series: groups.len(), ..Default::default() })
}

/// UAV path of one episode over the area, with IoTD and RIS markers.
pub fn plot_trajectory(
    rows: &[TraceCsvRow],
    episode: usize,
    cfg: &ScenarioConfig,
    path: &Path,
) -> Result<PlotContents> {
    let a = &cfg.area;
    let root = SVGBackend::new(path, (560, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(10)
        .caption(format!("trajectory, episode {episode}"), ("sans-serif", 18))
        .x_label_area_size(35)
        .y_label_area_size(45)
        .build_cartesian_2d(a.x_min..a.x_max, a.y_min..a.y_max)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("x (m)")
        .y_desc("y (m)")
        .draw()
        .map_err(plot_err)?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.episode == episode)
        .map(|r| (r.x, r.y))
        .collect();
    let series = usize::from(!pts.is_empty());
    chart
        .draw_series(LineSeries::new(pts.iter().copied(), BLUE.stroke_width(2)))
        .map_err(plot_err)?;
    let successes = rows
        .iter()
        .filter(|r| r.episode == episode && r.success)
        .map(|r| Circle::new((r.x, r.y), 3, GREEN.filled()));
    chart.draw_series(successes).map_err(plot_err)?;
    let iotds = &cfg.iotd.positions;
    chart
        .draw_series(
            iotds
                .iter()
                .map(|p| TriangleMarker::new((p.x, p.y), 8, BLACK.filled())),
        )
        .map_err(plot_err)?;
    let ris = cfg.ris.position;
    chart
        .draw_series([Cross::new((ris.x, ris.y), 8, RED.stroke_width(3))])
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(PlotContents {
        series,
        iotd_markers: iotds.len(),
        ris_markers: 1,
    })
}

/// Renders every figure whose source CSV exists in `dir`: `log.csv`,
/// `eval.csv`, `baselines.csv`, `sweep.csv` and `trace*.csv`. Returns the
/// files written.
pub fn emit_plots(dir: &Path, cfg: &ScenarioConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let out = |name: &str| dir.join(name);
    let log = dir.join("log.csv");
    if log.exists() {
        let rows: Vec<LogRow> = read_csv(&log)?;
        let figs: [(&str, &str, fn(&LogRow) -> f64); 4] = [
            ("reward", "curve_reward.svg", |r| r.rl_fitness),
            ("best fitness", "curve_best_fitness.svg", |r| r.best_fitness),
            ("average AoI", "curve_aoi.svg", |r| r.rl_avg_aoi),
            ("energy per slot (J)", "curve_energy.svg", |r| r.rl_avg_energy),
        ];
        for (metric, file, f) in figs {
            plot_training(&rows, metric, f, &out(file))?;
            written.push(out(file));
        }
    }
    let mut episodes: Vec<EpisodeRow> = Vec::new();
    for name in ["eval.csv", "baselines.csv"] {
        let p = dir.join(name);
        if p.exists() {
            episodes.extend(read_csv::<EpisodeRow>(&p)?);
        }
    }
    if dir.join("eval.csv").exists() || dir.join("baselines.csv").exists() {
        plot_bars(&episodes, "average AoI", |r| r.avg_aoi, &out("bars_aoi.svg"))?;
        plot_bars(&episodes, "energy per slot (J)", |r| r.avg_energy, &out("bars_energy.svg"))?;
        written.extend([out("bars_aoi.svg"), out("bars_energy.svg")]);
    }
    let sweep = dir.join("sweep.csv");
    if sweep.exists() {
        let rows: Vec<SweepRow> = read_csv(&sweep)?;
        let mut per_param: BTreeMap<String, Vec<SweepRow>> = BTreeMap::new();
        for r in rows {
            per_param.entry(r.param.clone()).or_default().push(r);
        }
        if per_param.is_empty() {
            plot_sweep(&[], &out("sweep.svg"))?;
            written.push(out("sweep.svg"));
        }
        for (param, rows) in per_param {
            let file = format!("sweep_{param}.svg");
            plot_sweep(&rows, &out(&file))?;
            written.push(out(&file));
        }
    }
    let mut traces: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("trace") && name.ends_with(".csv")
        })
        .collect();
    traces.sort();
    for t in traces {
        let rows: Vec<TraceCsvRow> = read_csv(&t)?;
        let stem = t.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
        let file = format!("{}.svg", stem.replacen("trace", "trajectory", 1));
        plot_trajectory(&rows, 0, cfg, &out(&file))?;
        written.push(out(&file));
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::io::write_csv;

    fn log_row(method: &str, g: usize) -> LogRow {
        LogRow {
            method: method.into(),
            generation: g,
            epsilon: 0.5,
            best_fitness: -(g as f64),
            mean_fitness: -2.0,
            rl_fitness: -3.0,
            pop_avg_aoi: 5.0,
            rl_avg_aoi: 4.0,
            rl_avg_energy: 150.0,
            value_loss: 1.0,
            policy_loss: 1.0,
            grad_steps: 1,
            buffer_len: 10,
        }
    }

    #[test]
    fn one_curve_per_method() {
        let dir = tempfile::tempdir().unwrap();
        let rows: Vec<LogRow> = (1..=3)
            .flat_map(|g| [log_row("A", g), log_row("B", g)])
            .collect();
        let c = plot_training(&rows, "reward", |r| r.best_fitness, &dir.path().join("c.svg")).unwrap();
        assert_eq!(c.series, 2);
        let svg = std::fs::read_to_string(dir.path().join("c.svg")).unwrap();
        assert!(svg.contains("<svg"));
    }

    #[test]
    fn empty_csv_gives_empty_axes() {
        let dir = tempfile::tempdir().unwrap();
        write_csv::<LogRow>(dir.path().join("log.csv"), &[]).unwrap();
        std::fs::write(
            dir.path().join("log.csv"),
            "method,generation,epsilon,best_fitness,mean_fitness,rl_fitness,pop_avg_aoi,rl_avg_aoi,\
             rl_avg_energy,value_loss,policy_loss,grad_steps,buffer_len\n",
        )
        .unwrap();
        let files = emit_plots(dir.path(), &ScenarioConfig::smoke()).unwrap();
        assert_eq!(files.len(), 4);
        assert!(files.iter().all(|f| f.exists()));
    }

    #[test]
    fn malformed_csv_names_row() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("eval.csv"),
            "method,episode,avg_aoi,avg_energy,cum_reward,success_count,out_of_bounds\nA,0,x,1,1,0,0\n",
        )
        .unwrap();
        let err = emit_plots(dir.path(), &ScenarioConfig::smoke()).unwrap_err();
        assert!(matches!(err, Error::MalformedCsv { row: 2, .. }), "{err}");
    }

    #[test]
    fn trajectory_markers() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScenarioConfig::smoke();
        let c = plot_trajectory(&[], 0, &cfg, &dir.path().join("t.svg")).unwrap();
        assert_eq!((c.iotd_markers, c.ris_markers), (cfg.n_iotds(), 1));
    }
}
