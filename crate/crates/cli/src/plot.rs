//! Line charts rendered straight to SVG from the CSVs the other commands write.
//! Output depends only on the input bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Trajectory,
    Gains,
    Learning,
}

struct Panel {
    title: &'static str,
    /// (column, dashed)
    series: &'static [(&'static str, bool)],
}

const TRAJECTORY_PANELS: &[Panel] = &[
    Panel {
        title: "C_B (mol/m3)",
        series: &[("c_b", false), ("cb_sp", true)],
    },
    Panel {
        title: "T (K)",
        series: &[("temp", false)],
    },
    Panel {
        title: "V (m3)",
        series: &[("vol", false), ("v_sp", true)],
    },
    Panel {
        title: "T_c (K)",
        series: &[("t_c", false)],
    },
    Panel {
        title: "F_in (m3/min)",
        series: &[("f_in", false)],
    },
];

const GAIN_PANELS: &[Panel] = &[
    Panel {
        title: "K_p, C_B loop",
        series: &[("kp_cb", false)],
    },
    Panel {
        title: "tau_i, C_B loop",
        series: &[("ti_cb", false)],
    },
    Panel {
        title: "tau_d, C_B loop",
        series: &[("td_cb", false)],
    },
    Panel {
        title: "K_p, V loop",
        series: &[("kp_v", false)],
    },
    Panel {
        title: "tau_i, V loop",
        series: &[("ti_v", false)],
    },
    Panel {
        title: "tau_d, V loop",
        series: &[("td_v", false)],
    },
];

const LEARNING_PANELS: &[Panel] = &[Panel {
    title: "fitness (solid best, dashed swarm mean)",
    series: &[("best_fitness", false), ("mean_fitness", true)],
}];

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Trajectory => "trajectory",
            PlotKind::Gains => "gains",
            PlotKind::Learning => "learning_curve",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trajectory" => Some(PlotKind::Trajectory),
            "gains" => Some(PlotKind::Gains),
            "learning" | "learning_curve" => Some(PlotKind::Learning),
            _ => None,
        }
    }

    fn x_column(self) -> &'static str {
        match self {
            PlotKind::Trajectory => "time_min",
            PlotKind::Gains => "step",
            PlotKind::Learning => "iteration",
        }
    }

    fn panels(self) -> &'static [Panel] {
        match self {
            PlotKind::Trajectory => TRAJECTORY_PANELS,
            PlotKind::Gains => GAIN_PANELS,
            PlotKind::Learning => LEARNING_PANELS,
        }
    }

    fn detect(columns: &[String]) -> Option<Self> {
        let has = |c: &str| columns.iter().any(|x| x == c);
        if has("cb_sp") {
            Some(PlotKind::Trajectory)
        } else if has("kp_cb") {
            Some(PlotKind::Gains)
        } else if has("best_fitness") {
            Some(PlotKind::Learning)
        } else {
            None
        }
    }
}

/// A numeric CSV held column-wise.
#[derive(Debug, Clone)]
pub struct Table {
    pub source: String,
    pub columns: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let source = path.display().to_string();
        let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {source}"))?;
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut data = vec![Vec::new(); columns.len()];
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            for (j, field) in rec.iter().enumerate() {
                let v = field.trim().parse::<f64>().map_err(|_| {
                    CliError::Data(format!(
                        "{source}: row {} column '{}' is not a number",
                        i + 1,
                        columns[j]
                    ))
                })?;
                data[j].push(v);
            }
        }
        Ok(Self { source, columns, data })
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        match self.columns.iter().position(|c| c == name) {
            Some(i) => Ok(&self.data[i]),
            None => Err(CliError::Schema {
                path: self.source.clone(),
                column: name.to_string(),
            }
            .into()),
        }
    }

    fn require(&self, kind: PlotKind) -> Result<()> {
        self.column(kind.x_column())?;
        for p in kind.panels() {
            for (c, _) in p.series {
                self.column(c)?;
            }
        }
        Ok(())
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
];
const WIDTH: f64 = 760.0;
const PANEL_H: f64 = 170.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const GAP: f64 = 45.0;

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders every panel of `kind` with one coloured series per input table.
pub fn render_svg(kind: PlotKind, inputs: &[(String, Table)]) -> Result<String> {
    for (_, t) in inputs {
        t.require(kind)?;
    }
    let panels = kind.panels();
    let plot_w = WIDTH - LEFT - RIGHT;
    let height = TOP + panels.len() as f64 * (PANEL_H + GAP);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, (name, _)) in inputs.iter().enumerate() {
        let x = LEFT + 160.0 * i as f64;
        let c = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="16" x2="{}" y2="16" stroke="{c}" stroke-width="2"/>"#,
            x + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="20">{}</text>"#, x + 25.0, escape(name));
    }

    let (x_lo, x_hi) = extent(
        inputs
            .iter()
            .flat_map(|(_, t)| t.column(kind.x_column()).unwrap().iter().copied()),
    );
    for (p_idx, panel) in panels.iter().enumerate() {
        let y0 = TOP + p_idx as f64 * (PANEL_H + GAP) + 15.0;
        let (y_lo, y_hi) = extent(inputs.iter().flat_map(|(_, t)| {
            panel
                .series
                .iter()
                .flat_map(move |(c, _)| t.column(c).unwrap().iter().copied())
        }));
        let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
        let sy = |y: f64| y0 + PANEL_H - (y - y_lo) / (y_hi - y_lo) * PANEL_H;
        let _ = writeln!(
            s,
            r#"<text x="{LEFT}" y="{:.2}" font-weight="bold">{}</text>"#,
            y0 - 5.0,
            escape(panel.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{y0:.2}" width="{plot_w}" height="{PANEL_H}" fill="none" stroke="black" stroke-width="0.8"/>"#
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let yv = y_lo + f * (y_hi - y_lo);
            let yp = sy(yv);
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{yp:.2}" x2="{:.2}" y2="{yp:.2}" stroke="#dddddd" stroke-width="0.6"/>"##,
                LEFT + plot_w
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                yp + 4.0,
                label(yv)
            );
            let xv = x_lo + f * (x_hi - x_lo);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                sx(xv),
                y0 + PANEL_H + 14.0,
                label(xv)
            );
        }
        for (i, (_, t)) in inputs.iter().enumerate() {
            let xs = t.column(kind.x_column())?;
            let c = PALETTE[i % PALETTE.len()];
            for (col, dashed) in panel.series {
                let ys = t.column(col)?;
                let mut pts = String::new();
                for (x, y) in xs.iter().zip(ys) {
                    if x.is_finite() && y.is_finite() {
                        let _ = write!(pts, "{:.2},{:.2} ", sx(*x), sy(*y));
                    }
                }
                let dash = if *dashed { r#" stroke-dasharray="5,3""# } else { "" };
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.4"{dash}/>"#,
                    pts.trim_end()
                );
            }
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        height - 8.0,
        kind.x_column()
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Series names: file stems when they are unique, else the paths as given.
fn series_names(paths: &[PathBuf]) -> Vec<String> {
    let stems: Vec<String> = paths
        .iter()
        .map(|p| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
        .collect();
    let unique = stems.iter().enumerate().all(|(i, a)| stems[..i].iter().all(|b| a != b));
    if unique {
        stems
    } else {
        paths.iter().map(|p| p.display().to_string()).collect()
    }
}

/// Reads the CSVs, checks they share one kind and writes `<kind>.svg`.
pub fn plot(paths: &[PathBuf], kind: Option<PlotKind>, dir: &Path) -> Result<PathBuf> {
    if paths.is_empty() {
        return Err(CliError::Usage("plot needs at least one CSV".into()).into());
    }
    let tables = paths.iter().map(|p| Table::read(p)).collect::<Result<Vec<_>>>()?;
    let kind = match kind {
        Some(k) => k,
        None => PlotKind::detect(&tables[0].columns)
            .ok_or_else(|| CliError::Data(format!("cannot tell what {} holds; pass --kind", tables[0].source)))?,
    };
    let inputs: Vec<(String, Table)> = series_names(paths).into_iter().zip(tables).collect();
    let svg = render_svg(kind, &inputs)?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let out = dir.join(format!("{}.svg", kind.name()));
    std::fs::write(&out, svg).with_context(|| format!("writing {}", out.display()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(cols: &[&str], rows: &[&[f64]]) -> Table {
        let mut data = vec![Vec::new(); cols.len()];
        for r in rows {
            for (j, v) in r.iter().enumerate() {
                data[j].push(*v);
            }
        }
        Table {
            source: "mem".into(),
            columns: cols.iter().map(|c| c.to_string()).collect(),
            data,
        }
    }

    #[test]
    fn learning_curve_renders_deterministically() {
        let t = table(
            &[
                "iteration",
                "best_fitness",
                "mean_fitness",
                "min_fitness",
                "wall_time_s",
            ],
            &[&[0.0, -5.0, -9.0, -12.0, 0.0], &[1.0, -4.0, -7.0, -10.0, 0.0]],
        );
        let a = render_svg(PlotKind::Learning, &[("a".into(), t.clone())]).unwrap();
        let b = render_svg(PlotKind::Learning, &[("a".into(), t)]).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert_eq!(a.matches("<polyline").count(), 2);
    }

    #[test]
    fn missing_column_is_named() {
        let t = table(&["iteration", "best_fitness"], &[&[0.0, 1.0]]);
        let err = render_svg(PlotKind::Learning, &[("a".into(), t)]).unwrap_err();
        assert!(err.to_string().contains("mean_fitness"), "{err}");
    }

    #[test]
    fn kind_detection() {
        let cols = |s: &str| s.split(',').map(str::to_string).collect::<Vec<_>>();
        assert_eq!(
            PlotKind::detect(&cols(cirl_core::sim::trajectory::TRAJECTORY_HEADER)),
            Some(PlotKind::Trajectory)
        );
        assert_eq!(
            PlotKind::detect(&cols(cirl_core::control::GAIN_TRAJECTORY_HEADER)),
            Some(PlotKind::Gains)
        );
        assert_eq!(PlotKind::detect(&cols("a,b")), None);
    }

    #[test]
    fn tick_labels() {
        assert_eq!(label(1.5), "1.5");
        assert_eq!(label(-0.0001), "-1.00e-4");
        assert_eq!(label(300.0), "300");
    }
}
