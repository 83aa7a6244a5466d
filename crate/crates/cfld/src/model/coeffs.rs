use crate::model::Instance;

/// Precomputed gravity-model quantities.
///
/// * `v[i]` — total competitor utility for zone `i`: Σ_k q_k / d_ik².
/// * `b` — zone × candidate × level tensor, b_ijr = Q_r / (d_ij² · v_i),
///   flattened row-major with the level index fastest.
/// * `b_star[i·J + j]` — max_r b_ijr.
/// * `beta_lower[i]` — 1 / (Σ_j b_ij* + 1), a valid lower bound on the zone's
///   lost-demand fraction 1/(Σ b·y + 1); the matching upper bound is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedCoefficients {
    num_zones: usize,
    num_candidates: usize,
    num_levels: usize,
    v: Vec<f64>,
    b: Vec<f64>,
    b_star: Vec<f64>,
    beta_lower: Vec<f64>,
}

impl DerivedCoefficients {
    /// Compute everything from the instance in one pass.
    pub fn from_instance(instance: &Instance) -> Self {
        let v = compute_competitor_utility(instance);
        compute_coefficients(instance, v)
    }

    pub fn num_zones(&self) -> usize {
        self.num_zones
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    pub fn num_levels(&self) -> usize {
        self.num_levels
    }

    pub fn v(&self, i: usize) -> f64 {
        self.v[i]
    }

    pub fn v_raw(&self) -> &[f64] {
        &self.v
    }

    pub fn b(&self, i: usize, j: usize, r: usize) -> f64 {
        self.b[(i * self.num_candidates + j) * self.num_levels + r]
    }

    /// The b_ijr slice of zone `i`, candidate-major with levels fastest.
    pub fn zone_b(&self, i: usize) -> &[f64] {
        let stride = self.num_candidates * self.num_levels;
        &self.b[i * stride..(i + 1) * stride]
    }

    pub fn b_star(&self, i: usize, j: usize) -> f64 {
        self.b_star[i * self.num_candidates + j]
    }

    pub fn beta_lower(&self, i: usize) -> f64 {
        self.beta_lower[i]
    }

    pub fn beta_upper(&self) -> f64 {
        1.0
    }
}

/// Total competitor utility per zone: v_i = Σ_k q_k / d_ik².
///
/// Strictly positive for every zone because instances carry at least one
/// competitor and distances are floored away from zero.
pub fn compute_competitor_utility(instance: &Instance) -> Vec<f64> {
    (0..instance.num_zones())
        .map(|i| {
            (0..instance.num_competitors())
                .map(|k| {
                    let d = instance.dist_competitor(i, k);
                    instance.competitors()[k].attractiveness / (d * d)
                })
                .sum()
        })
        .collect()
}

/// Derive the b tensor and the β bounds from the competitor utilities.
pub fn compute_coefficients(instance: &Instance, v: Vec<f64>) -> DerivedCoefficients {
    let (nz, nc, nl) = (
        instance.num_zones(),
        instance.num_candidates(),
        instance.num_levels(),
    );
    let mut b = Vec::with_capacity(nz * nc * nl);
    let mut b_star = Vec::with_capacity(nz * nc);
    let mut beta_lower = Vec::with_capacity(nz);
    for i in 0..nz {
        let mut star_sum = 0.0;
        for j in 0..nc {
            let d = instance.dist_candidate(i, j);
            let scale = 1.0 / (d * d * v[i]);
            let mut star = f64::NEG_INFINITY;
            for r in 0..nl {
                let bijr = instance.levels().value(r) * scale;
                star = star.max(bijr);
                b.push(bijr);
            }
            b_star.push(star);
            star_sum += star;
        }
        beta_lower.push(1.0 / (star_sum + 1.0));
    }
    DerivedCoefficients {
        num_zones: nz,
        num_candidates: nc,
        num_levels: nl,
        v,
        b,
        b_star,
        beta_lower,
    }
}
