//! CSV and JSON writers. Rows are ordered by `t`, then `y`; floats use the
//! shortest representation that round-trips.

use std::io::{self, Write};

use super::diagnostics::DiagnosticsReport;
use super::grid::LogGridSolution;

/// `t,y,n` for every snapshot.
pub fn write_snapshots_csv<W: Write>(solution: &LogGridSolution, mut out: W) -> io::Result<()> {
    writeln!(out, "t,y,n")?;
    for snap in &solution.snapshots {
        for (i, v) in snap.values.iter().enumerate() {
            writeln!(out, "{:?},{:?},{:?}", snap.t, solution.y(i), v)?;
        }
    }
    Ok(())
}

/// `t,mass,leak`
pub fn write_mass_csv<W: Write>(solution: &LogGridSolution, mut out: W) -> io::Result<()> {
    writeln!(out, "t,mass,leak")?;
    for rec in &solution.mass_series {
        writeln!(out, "{:?},{:?},{:?}", rec.t, rec.mass, rec.leak)?;
    }
    Ok(())
}

pub fn write_diagnostics_json<W: Write>(report: &DiagnosticsReport, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)
}
