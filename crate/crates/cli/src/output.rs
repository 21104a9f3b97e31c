//! CSV rows and companion gnuplot scripts.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::args::Axis;
use crate::error::CliError;
use crate::sweep::{Row, Spacing};

pub const HEADER: [&str; 15] = [
    "axis_name",
    "tau_l_ps",
    "e0_kjmol",
    "lambda_kjmol",
    "v_kjmol",
    "temp_k",
    "s_psinv",
    "k_fwd_psinv",
    "k_bwd_psinv",
    "dg_kjmol",
    "ds_kjmol_per_k",
    "dh_kjmol",
    "kappa",
    "n_used",
    "validity",
];

/// Fixed 17-significant-digit scientific notation.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

pub fn record(row: &Row) -> Vec<String> {
    let p = row.point;
    vec![
        row.axis_name.clone(),
        optional(p.map(|p| p.tau_l)),
        optional(p.map(|p| p.e0)),
        optional(p.map(|p| p.lambda)),
        optional(p.map(|p| p.v)),
        optional(p.map(|p| p.temperature)),
        optional(p.filter(|_| row.has_s).map(|p| p.s)),
        optional(row.k_fwd),
        optional(row.k_bwd),
        optional(row.dg),
        optional(row.ds),
        optional(row.dh),
        optional(row.kappa),
        row.n_used.map(|n| n.to_string()).unwrap_or_default(),
        row.validity.unwrap_or_default().to_string(),
    ]
}

pub fn write_rows<W: Write>(out: W, rows: &[Row]) -> Result<(), CliError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(HEADER)?;
    for row in rows {
        writer.write_record(record(row))?;
    }
    writer.flush()?;
    Ok(())
}

/// 1-based CSV column holding an axis value.
pub fn axis_column(axis: Axis) -> usize {
    match axis {
        Axis::TauL => 2,
        Axis::E0 => 3,
        Axis::Lambda => 4,
        Axis::V => 5,
        Axis::Temperature => 6,
        Axis::S => 7,
    }
}

fn axis_label(axis: Axis) -> &'static str {
    HEADER[axis_column(axis) - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Rates,
    Thermo,
}

/// Path of the gnuplot script accompanying a CSV file.
pub fn script_path(csv: &Path) -> PathBuf {
    csv.with_extension("gp")
}

/// Gnuplot script plotting the CSV at `csv` against the swept axes.
pub fn gnuplot_script(
    csv: &Path,
    kind: PlotKind,
    axis: (Axis, Spacing),
    axis2: Option<(Axis, Spacing)>,
) -> String {
    let file = csv
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let x = axis_column(axis.0);
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set xlabel '{}'\n", axis_label(axis.0)));
    if axis.1 == Spacing::Log {
        s.push_str("set logscale x\n");
    }
    match (kind, axis2) {
        (PlotKind::Rates, _) => {
            s.push_str("set ylabel 'rate (1/ps)'\nset logscale y\n");
            s.push_str(&format!(
                "plot '{file}' using {x}:8 skip 1 with linespoints title 'k', \\\n     '{file}' using {x}:9 skip 1 with linespoints title \"k'\"\n"
            ));
        }
        (PlotKind::Thermo, None) => {
            s.push_str("set ylabel 'kJ/mol'\n");
            s.push_str(&format!(
                "plot '{file}' using {x}:10 skip 1 with linespoints title 'dG', \\\n     '{file}' using {x}:12 skip 1 with linespoints title 'dH'\n"
            ));
        }
        (PlotKind::Thermo, Some((axis2, spacing2))) => {
            let y = axis_column(axis2);
            s.push_str(&format!("set ylabel '{}'\n", axis_label(axis2)));
            if spacing2 == Spacing::Log {
                s.push_str("set logscale y\n");
            }
            s.push_str("set zlabel 'dG (kJ/mol)'\n");
            s.push_str(&format!(
                "splot '{file}' using {x}:{y}:10 skip 1 with points palette title 'dG'\n"
            ));
        }
    }
    s.push_str("pause mouse close\n");
    s
}
