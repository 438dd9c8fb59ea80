//! Progressive ordering of surfels by dart throwing.
//!
//! Starting from one random surfel, each round draws a fixed number of random
//! candidates from the remaining input, appends the candidate farthest from
//! everything chosen so far and throws away the closest one. The other
//! candidates go back into the input. Early prefixes therefore spread over the
//! whole surface and later surfels fill in between, so any prefix of the
//! output is a reasonable approximation of the complete set.
//!
//! Ties on distance go to the lowest input index, both for the appended and for
//! the discarded candidate. All randomness comes from [`SplitMix64`].

mod index;

pub use index::{PointIndex, LEAF_CAPACITY};

use crate::error::{Error, Result};
use crate::math::{Aabb, Vec3};
use crate::rng::SplitMix64;
use crate::surfel::{InitialSurfelSet, SurfelArray};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub max_surfels: usize,
    pub candidate_count: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            max_surfels: 65_536,
            candidate_count: 200,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_surfels == 0 {
            return Err(Error::InvalidParameter("max surfels must be >= 1".into()));
        }
        if self.candidate_count < 2 {
            return Err(Error::InvalidParameter("candidate count must be >= 2".into()));
        }
        Ok(())
    }
}

/// Result of ordering a point set, as indices into the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Ordering {
    /// Chosen points in output order.
    pub order: Vec<usize>,
    /// Points thrown away, in the round they were discarded.
    pub discarded: Vec<usize>,
}

/// One sampling round, reported to observers.
#[derive(Debug)]
pub struct Round<'a> {
    /// Input indices of this round's candidates.
    pub candidates: &'a [usize],
    /// Squared distance of each candidate to the nearest chosen point.
    pub distances_squared: &'a [f64],
    pub appended: usize,
    pub discarded: Option<usize>,
}

/// Orders `points`; see the module docs for the procedure.
pub fn order_points(points: &[Vec3], cfg: &SamplerConfig) -> Result<Ordering> {
    order_points_observed(points, cfg, |_| {})
}

/// [`order_points`] with a callback after every round.
pub fn order_points_observed<F: FnMut(&Round<'_>)>(
    points: &[Vec3],
    cfg: &SamplerConfig,
    mut observe: F,
) -> Result<Ordering> {
    cfg.validate()?;
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptySurfelSet);
    }
    let mut rng = SplitMix64::new(cfg.seed);
    let first = rng.below_usize(n);
    let mut pool: Vec<usize> = (0..n).collect();
    pool.swap_remove(first);

    let mut index = PointIndex::new(&Aabb::from_points(points.iter().copied()));
    index.insert(points[first]);
    let mut order = Vec::with_capacity(cfg.max_surfels.min(n));
    order.push(first);
    let mut discarded = Vec::new();
    let mut dist = Vec::with_capacity(cfg.candidate_count);

    while order.len() < cfg.max_surfels && !pool.is_empty() {
        let k = cfg.candidate_count.min(pool.len());
        // partial Fisher-Yates: the first k pool slots become the candidates
        for i in 0..k {
            let j = i + rng.below_usize(pool.len() - i);
            pool.swap(i, j);
        }
        dist.clear();
        for &c in &pool[..k] {
            dist.push(index.nearest_distance_squared(points[c])?);
        }
        let mut best = 0;
        for i in 1..k {
            if dist[i] > dist[best] || (dist[i] == dist[best] && pool[i] < pool[best]) {
                best = i;
            }
        }
        let mut worst: Option<usize> = None;
        for i in (0..k).filter(|&i| i != best) {
            worst = match worst {
                Some(w) if dist[w] < dist[i] || (dist[w] == dist[i] && pool[w] < pool[i]) => Some(w),
                _ => Some(i),
            };
        }
        let appended = pool[best];
        let thrown = worst.map(|w| pool[w]);
        observe(&Round {
            candidates: &pool[..k],
            distances_squared: &dist,
            appended,
            discarded: thrown,
        });

        order.push(appended);
        index.insert(points[appended]);
        match worst {
            Some(w) => {
                let (hi, lo) = if w > best { (w, best) } else { (best, w) };
                pool.swap_remove(hi);
                pool.swap_remove(lo);
                discarded.push(thrown.unwrap());
            }
            None => {
                pool.swap_remove(best);
            }
        }
    }
    Ok(Ordering { order, discarded })
}

/// Selects and orders surfels from the initial set into a progressive array.
pub fn order_surfels(initial: &InitialSurfelSet, cfg: &SamplerConfig) -> Result<SurfelArray> {
    if initial.surfels.is_empty() {
        return Err(Error::EmptySurfelSet);
    }
    let points: Vec<Vec3> = initial.surfels.iter().map(|s| s.position()).collect();
    let ordering = order_points(&points, cfg)?;
    Ok(SurfelArray {
        surfels: ordering.order.iter().map(|&i| initial.surfels[i]).collect(),
        coverage: initial.coverage as f32,
        source_resolution: initial.resolution,
    })
}
