pub use crate::io::{parse_table, Table};

use super::{MolSeries, OdeSeries, OracleError};

/// Homogeneous oracle series as a table with physical units in the header.
pub fn oracle_export(series: &OdeSeries) -> Result<Table, OracleError> {
    if series.points.is_empty() {
        return Err(OracleError::Precondition("cannot export an empty series".into()));
    }
    let mut t = Table::new(["time_s", "strain", "tau_pa", "gamma_p", "s_pa"]);
    for p in &series.points {
        t.push(vec![p.t, p.strain, p.tau, p.gamma_p, p.s]);
    }
    Ok(t)
}

impl MolSeries {
    /// Stress and midpoint plastic strain over time.
    pub fn history_table(&self) -> Table {
        let mid = self.midpoint_gamma();
        let mut t = Table::new(["time_s", "strain", "tau_pa", "gamma_p_mid"]);
        for j in 0..self.t.len() {
            t.push(vec![self.t[j], self.strain[j], self.tau[j], mid[j]]);
        }
        t
    }

    /// Plastic-strain profile at the last output time.
    pub fn profile_table(&self) -> Table {
        let mut t = Table::new(["y_m", "gamma_p"]);
        for (y, g) in self.y.iter().zip(self.final_profile()) {
            t.push(vec![*y, *g]);
        }
        t
    }
}
