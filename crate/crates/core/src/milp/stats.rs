//! Model size report.

use std::io;

use serde::Serialize;

use super::{ArcMode, MilpModel, RowFamily};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelStats {
    pub n: usize,
    pub arc_mode: String,
    pub cuts: String,
    pub arcs: usize,
    /// Complete-graph size over the 2n + 1 vertices that have successors, squared.
    pub complete_square_no_end: usize,
    /// Complete-graph size over all 2n + 2 vertices, squared.
    pub complete_square_all: usize,
    pub cols: usize,
    pub binary_cols: usize,
    pub rows: usize,
    pub cut_rows: usize,
    pub nonzeros: usize,
}

pub fn model_stats(m: &MilpModel) -> ModelStats {
    let n = m.n;
    ModelStats {
        n,
        arc_mode: match m.arcs.mode() {
            ArcMode::Complete => "complete".into(),
            ArcMode::Reduced => "reduced".into(),
        },
        cuts: m.options.cuts.to_string(),
        arcs: m.arcs.len(),
        complete_square_no_end: (2 * n + 1).pow(2),
        complete_square_all: (2 * n + 2).pow(2),
        cols: m.vars.len(),
        binary_cols: m.vars.iter().filter(|v| v.binary).count(),
        rows: m.rows.len(),
        cut_rows: RowFamily::ALL.iter().filter(|f| f.is_cut()).map(|&f| m.rows_in(f)).sum(),
        nonzeros: m.nonzeros(),
    }
}

pub fn write_stats_csv<W: io::Write>(out: W, stats: &[ModelStats]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in stats {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}
