use crate::error::CfldError;
use crate::Result;

/// Construction-time floor on every zone-to-facility distance, in plane units.
///
/// The gravity decay 1/d² is singular at d = 0 and random placement can put a
/// facility arbitrarily close to a zone; the floor keeps every derived
/// coefficient finite. Instances whose data violate it are rejected rather
/// than clamped.
pub const DISTANCE_FLOOR: f64 = 1e-3;

/// Demand aggregated at a point: a customer zone.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Zone {
    pub id: String,
    /// Annual buying power a_i, in currency units per year.
    pub buying_power: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
}

/// A site where the company may open a facility.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CandidateSite {
    pub id: String,
    /// Fixed cost f_j of opening this site, in currency units.
    pub fixed_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
}

/// An existing facility owned by the competitor.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Competitor {
    pub id: String,
    /// Attractiveness q_k, dimensionless and strictly positive.
    pub attractiveness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
}

/// The finite menu of attractiveness levels.
///
/// `values` is stored sorted ascending; level indices everywhere in the crate
/// are positions in that sorted order. `costs[j][r]` is the cost of operating
/// candidate `j` at level `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Levels {
    values: Vec<f64>,
    costs: Vec<Vec<f64>>,
}

impl Levels {
    /// Build the level menu, sorting `values` ascending and permuting each
    /// candidate's cost row to match.
    pub fn new(values: Vec<f64>, costs: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(CfldError::InvalidInstance(
                "at least one attractiveness level is required".into(),
            ));
        }
        for (r, &q) in values.iter().enumerate() {
            if !(q > 0.0) || !q.is_finite() {
                return Err(CfldError::InvalidInstance(format!(
                    "level value Q[{r}] = {q} must be strictly positive and finite"
                )));
            }
        }
        for (j, row) in costs.iter().enumerate() {
            if row.len() != values.len() {
                return Err(CfldError::InvalidInstance(format!(
                    "level cost row for candidate {j} has {} entries, expected {}",
                    row.len(),
                    values.len()
                )));
            }
            for (r, &c) in row.iter().enumerate() {
                if !(c >= 0.0) || !c.is_finite() {
                    return Err(CfldError::InvalidInstance(format!(
                        "level cost c[{j}][{r}] = {c} must be nonnegative and finite"
                    )));
                }
            }
        }

        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let sorted_values: Vec<f64> = order.iter().map(|&r| values[r]).collect();
        let sorted_costs: Vec<Vec<f64>> = costs
            .iter()
            .map(|row| order.iter().map(|&r| row[r]).collect())
            .collect();

        Ok(Levels {
            values: sorted_values,
            costs: sorted_costs,
        })
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// Attractiveness Q_r of level `r`.
    pub fn value(&self, r: usize) -> f64 {
        self.values[r]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cost c_jr of operating candidate `j` at level `r`.
    pub fn cost(&self, j: usize, r: usize) -> f64 {
        self.costs[j][r]
    }

    pub fn cost_rows(&self) -> &[Vec<f64>] {
        &self.costs
    }
}

/// Immutable CFLD problem data.
///
/// Distances are stored row-major as zone × candidate and zone × competitor
/// matrices. When positions are present the matrices must agree with pairwise
/// Euclidean distances to 1e-9; construction enforces this along with the
/// sign, dimension and distance-floor invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    zones: Vec<Zone>,
    candidates: Vec<CandidateSite>,
    competitors: Vec<Competitor>,
    levels: Levels,
    /// d_ij, len = zones × candidates.
    dist_candidates: Vec<f64>,
    /// d_ik, len = zones × competitors.
    dist_competitors: Vec<f64>,
}

impl Instance {
    pub fn new(
        zones: Vec<Zone>,
        candidates: Vec<CandidateSite>,
        competitors: Vec<Competitor>,
        levels: Levels,
        dist_candidates: Vec<f64>,
        dist_competitors: Vec<f64>,
    ) -> Result<Self> {
        if zones.is_empty() {
            return Err(CfldError::InvalidInstance("no customer zones".into()));
        }
        if candidates.is_empty() {
            return Err(CfldError::InvalidInstance("no candidate sites".into()));
        }
        if competitors.is_empty() {
            // v_i must be strictly positive: b_ijr divides by it.
            return Err(CfldError::InvalidInstance(
                "at least one competitor facility is required".into(),
            ));
        }
        for z in &zones {
            if !(z.buying_power >= 0.0) || !z.buying_power.is_finite() {
                return Err(CfldError::InvalidInstance(format!(
                    "zone {}: buying power {} must be nonnegative and finite",
                    z.id, z.buying_power
                )));
            }
        }
        for c in &candidates {
            if !(c.fixed_cost >= 0.0) || !c.fixed_cost.is_finite() {
                return Err(CfldError::InvalidInstance(format!(
                    "candidate {}: fixed cost {} must be nonnegative and finite",
                    c.id, c.fixed_cost
                )));
            }
        }
        for k in &competitors {
            if !(k.attractiveness > 0.0) || !k.attractiveness.is_finite() {
                return Err(CfldError::InvalidInstance(format!(
                    "competitor {}: attractiveness {} must be strictly positive and finite",
                    k.id, k.attractiveness
                )));
            }
        }
        if levels.cost_rows().len() != candidates.len() {
            return Err(CfldError::InvalidInstance(format!(
                "level costs cover {} candidates, instance has {}",
                levels.cost_rows().len(),
                candidates.len()
            )));
        }

        let inst = Instance {
            zones,
            candidates,
            competitors,
            levels,
            dist_candidates,
            dist_competitors,
        };
        inst.check_matrix(
            "dist_candidates",
            inst.num_zones(),
            inst.num_candidates(),
            &inst.dist_candidates,
        )?;
        inst.check_matrix(
            "dist_competitors",
            inst.num_zones(),
            inst.num_competitors(),
            &inst.dist_competitors,
        )?;
        inst.check_positions()?;
        Ok(inst)
    }

    fn check_matrix(&self, name: &str, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
        if data.len() != rows * cols {
            return Err(CfldError::InvalidInstance(format!(
                "{name} has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        for (idx, &d) in data.iter().enumerate() {
            if !(d >= DISTANCE_FLOOR) || !d.is_finite() {
                return Err(CfldError::InvalidInstance(format!(
                    "{name}[{},{}] = {d} is below the distance floor {DISTANCE_FLOOR}",
                    idx / cols,
                    idx % cols
                )));
            }
        }
        Ok(())
    }

    fn check_positions(&self) -> Result<()> {
        let zone_pos: Option<Vec<[f64; 2]>> = self.zones.iter().map(|z| z.position).collect();
        if let Some(zp) = &zone_pos {
            if let Some(cp) = self
                .candidates
                .iter()
                .map(|c| c.position)
                .collect::<Option<Vec<_>>>()
            {
                verify_euclidean("dist_candidates", zp, &cp, &self.dist_candidates)?;
            }
            if let Some(kp) = self
                .competitors
                .iter()
                .map(|k| k.position)
                .collect::<Option<Vec<_>>>()
            {
                verify_euclidean("dist_competitors", zp, &kp, &self.dist_competitors)?;
            }
        }
        Ok(())
    }

    pub fn num_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn num_competitors(&self) -> usize {
        self.competitors.len()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.count()
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn candidates(&self) -> &[CandidateSite] {
        &self.candidates
    }

    pub fn competitors(&self) -> &[Competitor] {
        &self.competitors
    }

    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    /// Buying power a_i.
    pub fn buying_power(&self, i: usize) -> f64 {
        self.zones[i].buying_power
    }

    /// Fixed opening cost f_j.
    pub fn fixed_cost(&self, j: usize) -> f64 {
        self.candidates[j].fixed_cost
    }

    /// Level cost c_jr.
    pub fn level_cost(&self, j: usize, r: usize) -> f64 {
        self.levels.cost(j, r)
    }

    /// Distance d_ij from zone `i` to candidate `j`.
    pub fn dist_candidate(&self, i: usize, j: usize) -> f64 {
        self.dist_candidates[i * self.num_candidates() + j]
    }

    /// Distance d_ik from zone `i` to competitor `k`.
    pub fn dist_competitor(&self, i: usize, k: usize) -> f64 {
        self.dist_competitors[i * self.num_competitors() + k]
    }

    pub fn dist_candidates_raw(&self) -> &[f64] {
        &self.dist_candidates
    }

    pub fn dist_competitors_raw(&self) -> &[f64] {
        &self.dist_competitors
    }

    /// Σ_i a_i, the total buying power; profit and min-form objective values
    /// of the same solution always sum to this.
    pub fn total_buying_power(&self) -> f64 {
        self.zones.iter().map(|z| z.buying_power).sum()
    }
}

pub(crate) fn euclidean(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn verify_euclidean(
    name: &str,
    zone_pos: &[[f64; 2]],
    fac_pos: &[[f64; 2]],
    matrix: &[f64],
) -> Result<()> {
    let cols = fac_pos.len();
    for (i, zp) in zone_pos.iter().enumerate() {
        for (m, fp) in fac_pos.iter().enumerate() {
            let d = euclidean(*zp, *fp);
            let stored = matrix[i * cols + m];
            if (d - stored).abs() > 1e-9 {
                return Err(CfldError::InvalidInstance(format!(
                    "{name}[{i},{m}] = {stored} disagrees with the Euclidean distance {d}"
                )));
            }
        }
    }
    Ok(())
}

/// Build the zone × facility distance matrix from positions, row-major.
pub(crate) fn distances_from_positions(zones: &[[f64; 2]], facilities: &[[f64; 2]]) -> Vec<f64> {
    let mut out = Vec::with_capacity(zones.len() * facilities.len());
    for zp in zones {
        for fp in facilities {
            out.push(euclidean(*zp, *fp));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_fixtures::tiny_symmetric_instance;

    #[test]
    fn rejects_empty_competitors() {
        let err = Instance::new(
            vec![Zone {
                id: "z1".into(),
                buying_power: 1.0,
                position: None,
            }],
            vec![CandidateSite {
                id: "c1".into(),
                fixed_cost: 0.0,
                position: None,
            }],
            vec![],
            Levels::new(vec![100.0], vec![vec![0.0]]).unwrap(),
            vec![10.0],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, CfldError::InvalidInstance(_)));
    }

    #[test]
    fn rejects_distance_below_floor() {
        let err = Instance::new(
            vec![Zone {
                id: "z1".into(),
                buying_power: 1.0,
                position: None,
            }],
            vec![CandidateSite {
                id: "c1".into(),
                fixed_cost: 0.0,
                position: None,
            }],
            vec![Competitor {
                id: "k1".into(),
                attractiveness: 100.0,
                position: None,
            }],
            Levels::new(vec![100.0], vec![vec![0.0]]).unwrap(),
            vec![1e-4],
            vec![10.0],
        )
        .unwrap_err();
        assert!(err.to_string().contains("distance floor"));
    }

    #[test]
    fn rejects_inconsistent_positions() {
        let err = Instance::new(
            vec![Zone {
                id: "z1".into(),
                buying_power: 1.0,
                position: Some([0.0, 0.0]),
            }],
            vec![CandidateSite {
                id: "c1".into(),
                fixed_cost: 0.0,
                position: Some([3.0, 4.0]),
            }],
            vec![Competitor {
                id: "k1".into(),
                attractiveness: 100.0,
                position: Some([0.0, 10.0]),
            }],
            Levels::new(vec![100.0], vec![vec![0.0]]).unwrap(),
            vec![6.0], // true distance is 5.0
            vec![10.0],
        )
        .unwrap_err();
        assert!(err.to_string().contains("Euclidean"));
    }

    #[test]
    fn levels_sort_ascending_and_permute_costs() {
        let levels = Levels::new(vec![500.0, 100.0, 300.0], vec![vec![5.0, 1.0, 3.0]]).unwrap();
        assert_eq!(levels.values(), &[100.0, 300.0, 500.0]);
        assert_eq!(levels.cost_rows()[0], vec![1.0, 3.0, 5.0]);
    }

    #[test]
    fn tiny_fixture_is_valid() {
        let inst = tiny_symmetric_instance();
        assert_eq!(inst.num_zones(), 1);
        assert_eq!(inst.dist_candidate(0, 0), 10.0);
        assert_eq!(inst.total_buying_power(), 1000.0);
    }
}
