use crate::error::{Error, Result};
use crate::series::{AnomalyFlag, DailyRecord, Field};

/// Forward running maximum per field. Every raised cell is reported as an
/// anomaly; the output is non-decreasing and repairing it again is a no-op.
pub fn repair_monotonic(records: &[DailyRecord]) -> Result<(Vec<DailyRecord>, Vec<AnomalyFlag>)> {
    if let Some(pair) = records.windows(2).find(|p| p[1].date <= p[0].date) {
        return Err(Error::invalid(format!(
            "records out of order: {} follows {}",
            pair[1].date, pair[0].date
        )));
    }
    let mut running = [0u64; 3];
    let mut anomalies = Vec::new();
    let repaired = records
        .iter()
        .map(|raw| {
            let mut out = *raw;
            for (slot, field) in running.iter_mut().zip(Field::ALL) {
                let value = raw.get(field);
                if value < *slot {
                    anomalies.push(AnomalyFlag {
                        date: raw.date,
                        field,
                        raw_value: value,
                        repaired_value: *slot,
                    });
                    out.set(field, *slot);
                } else {
                    *slot = value;
                }
            }
            out
        })
        .collect();
    Ok((repaired, anomalies))
}
