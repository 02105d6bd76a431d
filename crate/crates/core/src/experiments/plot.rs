use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::runner::ResultRow;

/// Which column supplies the x coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    N,
    K,
}

#[derive(Debug, Default)]
pub struct PlotOutput {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Writes one `x y` series per (experiment, policy, rate case) into `dir`,
/// named `<experiment>__<policy>__<case>.dat`. The y value is the exact
/// freshness. Rows without an x value are skipped; a group left empty gets a
/// warning and no file.
pub fn emit_plot_data(rows: &[ResultRow], x: XAxis, dir: &Path) -> Result<PlotOutput> {
    if rows.is_empty() {
        return Err(Error::domain("no rows to plot"));
    }
    let mut groups: BTreeMap<(String, String, String), Vec<(usize, f64)>> = BTreeMap::new();
    for row in rows {
        let key = (row.experiment.clone(), row.policy_label(), row.case_label());
        let points = groups.entry(key).or_default();
        let xv = match x {
            XAxis::N => Some(row.n),
            XAxis::K => row.k,
        };
        if let Some(xv) = xv {
            points.push((xv, row.p_oracle));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = PlotOutput::default();
    for ((experiment, policy, case), mut points) in groups {
        let name = format!("{experiment}__{policy}__{case}.dat");
        if points.is_empty() {
            let msg = format!("{name}: no points with an x value, file skipped");
            log::warn!("{msg}");
            out.warnings.push(msg);
            continue;
        }
        points.sort_by_key(|&(xv, _)| xv);
        let mut text = format!(
            "# experiment={experiment} policy={policy} case={case}\n# {} p\n",
            match x {
                XAxis::N => "n",
                XAxis::K => "k",
            }
        );
        for (xv, y) in points {
            writeln!(text, "{xv} {y:.16e}").expect("writing to a String");
        }
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        out.files.push(path);
    }
    Ok(out)
}
