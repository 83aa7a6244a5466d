//! Seeded random instance generation and the canonical instance file format.
//!
//! Generation reproduces the standard experimental design: zone, candidate and
//! competitor locations drawn uniformly from a square, Euclidean distances,
//! buying power a_i ~ U[100, 10000], competitor attractiveness
//! q_k ~ U[100, 1000], one shared fixed cost, and level costs proportional to
//! the level values.
//!
//! # Reproducibility
//!
//! The generator uses splitmix64, a fixed shift/multiply 64-bit generator, so
//! instances are bit-identical for a given `(config, seed)` on every platform.
//! The draw order is fixed: zone coordinates, then candidate coordinates, then
//! competitor coordinates, then buying powers, then competitor
//! attractivenesses. Uniform ranges are sampled as `lo + u·(hi−lo)` with
//! `u ∈ [0, 1)`. A candidate or competitor that lands within the distance
//! floor of a zone is resampled from the same stream (never clamped, which
//! would distort the distance distribution); after 100 failed attempts for one
//! point, generation reports a pathological configuration.
//!
//! # File format
//!
//! [`save`]/[`load`] exchange instances as JSON documents tagged
//! `"schema": "cfld-1"`. Distance matrices are always written (floats use the
//! shortest round-trip decimal encoding, so reloading is bit-lossless);
//! positions are written when known. On load, explicit matrices win and are
//! cross-checked against positions to 1e-9; with positions only, the matrices
//! are derived.

use std::path::Path;

use crate::error::CfldError;
use crate::model::{CandidateSite, Competitor, Instance, Levels, Zone, DISTANCE_FLOOR};
use crate::Result;

/// Uniform range for zone buying power a_i.
pub const BUYING_POWER_RANGE: (f64, f64) = (100.0, 10_000.0);
/// Uniform range for competitor attractiveness q_k.
pub const COMPETITOR_ATTRACTIVENESS_RANGE: (f64, f64) = (100.0, 1000.0);
/// Schema tag of the canonical instance file.
pub const SCHEMA_VERSION: &str = "cfld-1";

const RESAMPLE_ATTEMPTS: usize = 100;

/// splitmix64: the fixed 64-bit shift/multiply generator behind [`generate`].
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1), 53 mantissa bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi): lo + u·(hi−lo).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }
}

/// Parameters of the random experimental design.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenConfig {
    pub n_zones: usize,
    pub n_candidates: usize,
    pub n_competitors: usize,
    /// Fixed opening cost, shared by every candidate.
    pub fixed_cost: f64,
    pub seed: u64,
    /// Side length of the placement square.
    pub square_side: f64,
    /// Attractiveness menu, strictly positive and ascending.
    pub level_values: Vec<f64>,
    /// Level cost c_jr = multiplier · Q_r for every candidate.
    pub level_cost_multiplier: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_zones: 20,
            n_candidates: 20,
            n_competitors: 5,
            fixed_cost: 0.0,
            seed: 0,
            square_side: 100.0,
            level_values: vec![100.0, 300.0, 500.0, 700.0, 900.0],
            level_cost_multiplier: 2.0,
        }
    }
}

impl GenConfig {
    fn validate(&self) -> Result<()> {
        if self.n_zones == 0 || self.n_candidates == 0 || self.n_competitors == 0 {
            return Err(CfldError::GenerationFailed(
                "zone, candidate and competitor counts must all be at least 1".into(),
            ));
        }
        if !(self.square_side > 0.0) {
            return Err(CfldError::GenerationFailed(format!(
                "square side {} must be positive",
                self.square_side
            )));
        }
        if !(self.fixed_cost >= 0.0) {
            return Err(CfldError::GenerationFailed(format!(
                "fixed cost {} must be nonnegative",
                self.fixed_cost
            )));
        }
        if self.level_values.is_empty() {
            return Err(CfldError::GenerationFailed("empty level menu".into()));
        }
        let ascending = self
            .level_values
            .windows(2)
            .all(|w| w[0] < w[1] && w[0] > 0.0);
        if !ascending || !(self.level_values[0] > 0.0) {
            return Err(CfldError::GenerationFailed(
                "level values must be strictly positive and ascending".into(),
            ));
        }
        Ok(())
    }
}

/// Generate an [`Instance`] from the seeded design.
pub fn generate(config: &GenConfig) -> Result<Instance> {
    config.validate()?;
    let mut rng = SplitMix64::new(config.seed);
    let side = config.square_side;

    let zone_pos: Vec<[f64; 2]> = (0..config.n_zones)
        .map(|_| {
            let x = rng.uniform(0.0, side);
            let y = rng.uniform(0.0, side);
            [x, y]
        })
        .collect();
    let candidate_pos = place_clear_of_zones(&mut rng, config.n_candidates, side, &zone_pos)?;
    let competitor_pos = place_clear_of_zones(&mut rng, config.n_competitors, side, &zone_pos)?;

    let zones: Vec<Zone> = zone_pos
        .iter()
        .enumerate()
        .map(|(i, &pos)| Zone {
            id: format!("z{}", i + 1),
            buying_power: rng.uniform(BUYING_POWER_RANGE.0, BUYING_POWER_RANGE.1),
            position: Some(pos),
        })
        .collect();
    let competitors: Vec<Competitor> = competitor_pos
        .iter()
        .enumerate()
        .map(|(k, &pos)| Competitor {
            id: format!("k{}", k + 1),
            attractiveness: rng.uniform(
                COMPETITOR_ATTRACTIVENESS_RANGE.0,
                COMPETITOR_ATTRACTIVENESS_RANGE.1,
            ),
            position: Some(pos),
        })
        .collect();
    let candidates: Vec<CandidateSite> = candidate_pos
        .iter()
        .enumerate()
        .map(|(j, &pos)| CandidateSite {
            id: format!("c{}", j + 1),
            fixed_cost: config.fixed_cost,
            position: Some(pos),
        })
        .collect();

    let cost_row: Vec<f64> = config
        .level_values
        .iter()
        .map(|q| config.level_cost_multiplier * q)
        .collect();
    let levels = Levels::new(
        config.level_values.clone(),
        vec![cost_row; config.n_candidates],
    )?;

    let dist_candidates =
        crate::model::instance_distances_from_positions(&zone_pos, &candidate_pos);
    let dist_competitors =
        crate::model::instance_distances_from_positions(&zone_pos, &competitor_pos);

    Instance::new(
        zones,
        candidates,
        competitors,
        levels,
        dist_candidates,
        dist_competitors,
    )
}

fn place_clear_of_zones(
    rng: &mut SplitMix64,
    count: usize,
    side: f64,
    zone_pos: &[[f64; 2]],
) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let mut placed = false;
        for _ in 0..RESAMPLE_ATTEMPTS {
            let x = rng.uniform(0.0, side);
            let y = rng.uniform(0.0, side);
            let ok = zone_pos
                .iter()
                .all(|&zp| crate::model::instance_euclidean(zp, [x, y]) >= DISTANCE_FLOOR);
            if ok {
                out.push([x, y]);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(CfldError::GenerationFailed(format!(
                "point {idx} could not clear the distance floor after {RESAMPLE_ATTEMPTS} attempts"
            )));
        }
    }
    Ok(out)
}

/// Serde mirror of the canonical `cfld-1` document.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct InstanceFile {
    schema: String,
    zones: Vec<Zone>,
    candidates: Vec<CandidateSite>,
    competitors: Vec<Competitor>,
    level_values: Vec<f64>,
    /// Row per candidate, column per level.
    level_costs: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist_candidates: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist_competitors: Option<Vec<Vec<f64>>>,
}

fn to_rows(flat: &[f64], cols: usize) -> Vec<Vec<f64>> {
    flat.chunks(cols).map(|c| c.to_vec()).collect()
}

fn flatten(rows: &[Vec<f64>], what: &str, cols: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(rows.len() * cols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(CfldError::InvalidInstance(format!(
                "{what} row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        out.extend_from_slice(row);
    }
    Ok(out)
}

/// Render the canonical JSON document for an instance.
pub fn to_json(instance: &Instance) -> String {
    let file = InstanceFile {
        schema: SCHEMA_VERSION.to_string(),
        zones: instance.zones().to_vec(),
        candidates: instance.candidates().to_vec(),
        competitors: instance.competitors().to_vec(),
        level_values: instance.levels().values().to_vec(),
        level_costs: instance.levels().cost_rows().to_vec(),
        dist_candidates: Some(to_rows(
            instance.dist_candidates_raw(),
            instance.num_candidates(),
        )),
        dist_competitors: Some(to_rows(
            instance.dist_competitors_raw(),
            instance.num_competitors(),
        )),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("instance serialization");
    text.push('\n');
    text
}

/// Parse the canonical JSON document.
pub fn from_json(text: &str, origin: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| CfldError::Parse {
        path: origin.to_string(),
        detail: e.to_string(),
    })?;
    if file.schema != SCHEMA_VERSION {
        return Err(CfldError::SchemaVersion {
            found: file.schema,
            expected: SCHEMA_VERSION.to_string(),
        });
    }
    let n_candidates = file.candidates.len();
    let n_competitors = file.competitors.len();

    let derive = |facilities: &[Option<[f64; 2]>]| -> Option<Vec<f64>> {
        let zone_pos: Option<Vec<[f64; 2]>> = file.zones.iter().map(|z| z.position).collect();
        let fac_pos: Option<Vec<[f64; 2]>> = facilities.iter().copied().collect();
        match (zone_pos, fac_pos) {
            (Some(zp), Some(fp)) => Some(crate::model::instance_distances_from_positions(&zp, &fp)),
            _ => None,
        }
    };

    let dist_candidates = match &file.dist_candidates {
        Some(rows) => flatten(rows, "dist_candidates", n_candidates)?,
        None => derive(
            &file
                .candidates
                .iter()
                .map(|c| c.position)
                .collect::<Vec<_>>(),
        )
        .ok_or_else(|| CfldError::Parse {
            path: origin.to_string(),
            detail: "neither dist_candidates nor complete positions present".into(),
        })?,
    };
    let dist_competitors = match &file.dist_competitors {
        Some(rows) => flatten(rows, "dist_competitors", n_competitors)?,
        None => derive(
            &file
                .competitors
                .iter()
                .map(|k| k.position)
                .collect::<Vec<_>>(),
        )
        .ok_or_else(|| CfldError::Parse {
            path: origin.to_string(),
            detail: "neither dist_competitors nor complete positions present".into(),
        })?,
    };

    Instance::new(
        file.zones,
        file.candidates,
        file.competitors,
        Levels::new(file.level_values, file.level_costs)?,
        dist_candidates,
        dist_competitors,
    )
}

/// Write the canonical document to `path`.
pub fn save(instance: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(instance))?;
    Ok(())
}

/// Read an instance from `path`.
pub fn load(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    from_json(&text, &path.display().to_string())
}
