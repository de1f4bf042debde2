//! Analytic search cost of a query on a complete trie.
//!
//! The trie is modelled as complete with fanout `o` and height `h`; level `l`
//! splits on dimension `phi[l]`, and a query follows a fraction `ς_D` of the
//! children at every level of dimension `D`. The expected number of visited
//! nodes is `1 + Σ_{l=1..h} Π_{i=1..l} o·ς_{φ_i}`.

use thiserror::Error;

use crate::keymodel::Dimension;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("fanout must be positive, got {0}")]
    BadFanout(f64),
    #[error("height must be at least 1")]
    ZeroHeight,
    #[error("dimension vector has {actual} entries, height is {expected}")]
    PhiLength { expected: usize, actual: usize },
    #[error("dimension vector may only contain P and V")]
    LeafInPhi,
    #[error("selectivity {0} is outside (0, 1]")]
    BadSelectivity(f64),
    #[error("calibration needs at least two distinct keys, got {0}")]
    TooFewKeys(u64),
    #[error("costs must be positive, got {0} and {1}")]
    ZeroCost(f64, f64),
    #[error("unknown dimension symbol {0:?} (expected P or V)")]
    BadSymbol(char),
}

/// Per-level selectivities of one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSelectivities {
    pub path: f64,
    pub value: f64,
}

impl LevelSelectivities {
    /// The complementary query: path and value selectivities swapped.
    pub fn complementary(self) -> Self {
        LevelSelectivities { path: self.value, value: self.path }
    }

    fn of(self, d: Dimension) -> f64 {
        match d {
            Dimension::Path => self.path,
            _ => self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostModelParams {
    pub o: f64,
    pub h: usize,
    pub phi: Vec<Dimension>,
    pub sel: LevelSelectivities,
}

impl CostModelParams {
    pub fn new(o: f64, phi: Vec<Dimension>, sel: LevelSelectivities) -> Result<Self, CostError> {
        let p = CostModelParams { o, h: phi.len(), phi, sel };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CostError> {
        if !(self.o > 0.0 && self.o.is_finite()) {
            return Err(CostError::BadFanout(self.o));
        }
        if self.h == 0 {
            return Err(CostError::ZeroHeight);
        }
        if self.phi.len() != self.h {
            return Err(CostError::PhiLength { expected: self.h, actual: self.phi.len() });
        }
        if self.phi.contains(&Dimension::Leaf) {
            return Err(CostError::LeafInPhi);
        }
        for s in [self.sel.path, self.sel.value] {
            if !(s > 0.0 && s <= 1.0) {
                return Err(CostError::BadSelectivity(s));
            }
        }
        Ok(())
    }

    pub fn complementary(&self) -> Self {
        CostModelParams { sel: self.sel.complementary(), ..self.clone() }
    }
}

/// `V, P, V, P, ...` of length `h`.
pub fn alternating(h: usize) -> Vec<Dimension> {
    (0..h).map(|i| if i % 2 == 0 { Dimension::Value } else { Dimension::Path }).collect()
}

/// Parses a dimension vector written as a string of `P` and `V`.
pub fn parse_phi(text: &str) -> Result<Vec<Dimension>, CostError> {
    text.chars()
        .map(|c| match c.to_ascii_uppercase() {
            'P' => Ok(Dimension::Path),
            'V' => Ok(Dimension::Value),
            _ => Err(CostError::BadSymbol(c)),
        })
        .collect()
}

pub fn phi_label(phi: &[Dimension]) -> String {
    phi.iter().map(|d| d.symbol()).collect()
}

/// Expected number of visited nodes. Without `include_root` the leading 1 for
/// the root is left out.
pub fn estimate_cost(p: &CostModelParams, include_root: bool) -> f64 {
    let mut sum = 0.0;
    let mut prod = 1.0;
    for &d in &p.phi {
        prod *= p.o * p.sel.of(d);
        sum += prod;
    }
    if include_root {
        sum + 1.0
    } else {
        sum
    }
}

/// Mean and sample standard deviation of the costs of a query and its
/// complementary query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Robustness {
    pub cost: f64,
    pub complementary_cost: f64,
    pub avg: f64,
    pub stddev: f64,
}

pub fn robustness(p: &CostModelParams, include_root: bool) -> Robustness {
    let a = estimate_cost(p, include_root);
    let b = estimate_cost(&p.complementary(), include_root);
    let avg = (a + b) / 2.0;
    // Sample standard deviation of two values.
    let stddev = (a - b).abs() / std::f64::consts::SQRT_2;
    Robustness { cost: a, complementary_cost: b, avg, stddev }
}

/// Exhaustively checks that the alternating vector minimises the summed cost
/// of a query and its complementary query over all `2^h` vectors.
pub fn verify_alternation_optimal(o: f64, h: usize, path: f64, value: f64) -> bool {
    assert!((1..=24).contains(&h), "exhaustive search needs 1 <= h <= 24");
    let sel = LevelSelectivities { path, value };
    let pair_cost = |phi: Vec<Dimension>| {
        let p = CostModelParams { o, h, phi, sel };
        estimate_cost(&p, false) + estimate_cost(&p.complementary(), false)
    };
    let best = pair_cost(alternating(h));
    (0u32..(1 << h)).all(|mask| {
        let phi = (0..h).map(|i| if mask >> i & 1 == 1 { Dimension::Path } else { Dimension::Value }).collect();
        best <= pair_cost(phi) * (1.0 + 1e-9)
    })
}

/// The dimension vectors that minimise the summed complementary cost.
pub fn pair_cost_minimisers(o: f64, h: usize, path: f64, value: f64) -> Vec<u32> {
    let sel = LevelSelectivities { path, value };
    let costs: Vec<f64> = (0u32..(1 << h))
        .map(|mask| {
            let phi = (0..h).map(|i| if mask >> i & 1 == 1 { Dimension::Path } else { Dimension::Value }).collect();
            let p = CostModelParams { o, h, phi, sel };
            estimate_cost(&p, false) + estimate_cost(&p.complementary(), false)
        })
        .collect();
    let min = costs.iter().cloned().fold(f64::INFINITY, f64::min);
    (0u32..(1 << h)).filter(|&m| costs[m as usize] <= min * (1.0 + 1e-9)).collect()
}

/// Structural statistics the calibration needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    pub unique_keys: u64,
    pub avg_node_depth: f64,
}

/// Maps index statistics and whole-query selectivities to model parameters:
/// `h` is the average node depth rounded down (at least 1), `o = |K|^(1/h)`,
/// and each dimension's per-level selectivity is the `N_D`-th root of its
/// total selectivity, with `⌈h/2⌉` value levels and `⌊h/2⌋` path levels.
pub fn calibrate(stats: DatasetStats, sigma_path: f64, sigma_value: f64) -> Result<CostModelParams, CostError> {
    if stats.unique_keys < 2 {
        return Err(CostError::TooFewKeys(stats.unique_keys));
    }
    for s in [sigma_path, sigma_value] {
        if !(s > 0.0 && s <= 1.0) {
            return Err(CostError::BadSelectivity(s));
        }
    }
    let h = (stats.avg_node_depth.floor() as usize).max(1);
    let o = (stats.unique_keys as f64).powf(1.0 / h as f64);
    let (n_value, n_path) = (h.div_ceil(2), h / 2);
    let root = |sigma: f64, n: usize| if n == 0 { 1.0 } else { sigma.powf(1.0 / n as f64) };
    CostModelParams::new(
        o,
        alternating(h),
        LevelSelectivities { path: root(sigma_path, n_path), value: root(sigma_value, n_value) },
    )
}

/// `max(est, truth) / min(est, truth)`.
pub fn error_factor(estimated: f64, truth: f64) -> Result<f64, CostError> {
    if !(estimated > 0.0 && truth > 0.0) {
        return Err(CostError::ZeroCost(estimated, truth));
    }
    Ok(estimated.max(truth) / estimated.min(truth))
}
