use chrono::NaiveDate;
use serde::Serialize;

use super::rollup::effective_series;
use crate::error::{Error, Result};
use crate::region::RegionId;
use crate::store::DatasetVersion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeValues {
    pub date: NaiveDate,
    pub confirmed: u64,
    pub cured: u64,
    pub deaths: u64,
    pub active: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HierarchyNode {
    pub region: RegionId,
    pub display_name: String,
    /// Latest values of the node's own series, or of the rollup of its
    /// children when it has none. `None` if neither has data.
    pub latest: Option<NodeValues>,
    /// Sorted by latest confirmed descending, then region id.
    pub children: Vec<HierarchyNode>,
}

/// Country → provinces → cities tree with latest values per node.
pub fn hierarchy(version: &DatasetVersion, country: &RegionId) -> Result<HierarchyNode> {
    if !country.is_country() {
        return Err(Error::invalid(format!("{country} is not a country")));
    }
    node(version, country)
}

fn node(version: &DatasetVersion, id: &RegionId) -> Result<HierarchyNode> {
    let meta = version.meta(id)?;
    let latest = match effective_series(version, id) {
        Ok(s) => s.latest().map(|r| NodeValues {
            date: r.date,
            confirmed: r.confirmed,
            cured: r.cured,
            deaths: r.deaths,
            active: r.confirmed.saturating_sub(r.cured + r.deaths),
        }),
        Err(Error::NotFound(_)) => None,
        Err(e) => return Err(e),
    };
    let mut children = version
        .children(id)?
        .iter()
        .map(|c| node(version, c))
        .collect::<Result<Vec<_>>>()?;
    let confirmed = |n: &HierarchyNode| n.latest.map_or(0, |v| v.confirmed);
    children.sort_by(|a, b| confirmed(b).cmp(&confirmed(a)).then_with(|| a.region.cmp(&b.region)));
    Ok(HierarchyNode {
        region: id.clone(),
        display_name: meta.display_name.clone(),
        latest,
        children,
    })
}
