//! Zero-dimensional persistence of a discrete 1D sequence on the path graph:
//! sublevel and superlevel pairings, nesting levels of the pair spans, the
//! persistent distance, and the weighted regularizer built from them.
//!
//! Conventions: plateaus are collapsed before pairing; the elder rule breaks
//! ties by node index (smaller index is elder); the global min-max pair
//! belongs to neither pairing. These choices make the pairing deterministic
//! for non-generic inputs and give the identity
//! `persistent_distance(y) + range(y) = total_variation(y)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Sublevel,
    Superlevel,
}

/// One pairing of a local extremum with the critical value where its
/// component merges into an elder one. Indices refer to the original
/// (unreduced) sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth_index: usize,
    pub death_index: usize,
    pub birth_value: f64,
    pub death_value: f64,
    pub direction: Direction,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        (self.death_value - self.birth_value).abs()
    }

    /// Index interval covered by the pair.
    pub fn span(&self) -> (usize, usize) {
        (
            self.birth_index.min(self.death_index),
            self.birth_index.max(self.death_index),
        )
    }
}

/// Weights for the persistence-based regularizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhWeightParams {
    /// Hierarchy amplification, > 1.
    pub tau: f64,
    /// Sensitivity to the pair's value gap, > 0. Named `eta_w` to keep it
    /// apart from the observation noise.
    pub eta_w: f64,
}

impl PhWeightParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 1.0) {
            return Err(Error::InvalidArgument {
                what: "tau",
                detail: format!("must be > 1, got {}", self.tau),
            });
        }
        if !(self.eta_w > 0.0) {
            return Err(Error::InvalidArgument {
                what: "eta_w",
                detail: format!("must be > 0, got {}", self.eta_w),
            });
        }
        Ok(())
    }

    /// Weight of a pair at nesting level `level` with value gap
    /// `persistence`. The whole formula lives here so that variants can be
    /// swapped in one place.
    pub fn weight(&self, level: usize, persistence: f64) -> f64 {
        (level as f64 + 1.0) * self.tau / (1.0 + self.eta_w * persistence)
    }
}

/// Both pairings of a sequence plus the nesting level of every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub p1: Vec<PersistencePair>,
    pub p2: Vec<PersistencePair>,
    /// (argmin, argmax) of the sequence, first occurrence on ties; excluded
    /// from both pairings.
    pub global_pair: (usize, usize),
    /// `levels[j]` is the nesting level of the j-th pair of `p1` followed by
    /// `p2`.
    pub levels: Vec<usize>,
}

impl PersistenceDiagram {
    pub fn compute(y: &[f64]) -> Self {
        let (reduced, index_map) = reduce_plateaus(y);
        let mut p1 = sublevel_pairs(&reduced);
        let mut p2 = superlevel_pairs(&reduced);
        for p in p1.iter_mut().chain(p2.iter_mut()) {
            p.birth_index = index_map[p.birth_index];
            p.death_index = index_map[p.death_index];
        }

        let mut argmin = 0;
        let mut argmax = 0;
        for (i, &v) in y.iter().enumerate() {
            if v < y[argmin] {
                argmin = i;
            }
            if v > y[argmax] {
                argmax = i;
            }
        }

        let all: Vec<PersistencePair> = p1.iter().chain(p2.iter()).copied().collect();
        let levels = chain_levels(&all);
        Self {
            p1,
            p2,
            global_pair: (argmin, argmax),
            levels,
        }
    }

    /// All pairs with their nesting levels, `p1` first.
    pub fn pairs_with_levels(&self) -> impl Iterator<Item = (&PersistencePair, usize)> {
        self.p1
            .iter()
            .chain(self.p2.iter())
            .zip(self.levels.iter().copied())
    }
}

/// Collapse maximal runs of equal consecutive values to their first index.
/// Returns the reduced sequence and the map from reduced positions back to
/// original indices.
pub fn reduce_plateaus(y: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut reduced = Vec::with_capacity(y.len());
    let mut index_map = Vec::with_capacity(y.len());
    for (i, &v) in y.iter().enumerate() {
        if reduced.last() != Some(&v) {
            reduced.push(v);
            index_map.push(i);
        }
    }
    (reduced, index_map)
}

/// Union-find sweep over the path graph in increasing (value, index) order.
/// Expects a plateau-reduced sequence. Each vertex whose neighbors are both
/// absent births a component; a vertex joining two components kills the
/// younger one (larger minimum; ties by larger index) and records the pair.
fn sweep_pairs(y: &[f64]) -> Vec<PersistencePair> {
    let m = y.len();
    let mut pairs = Vec::new();
    if m < 3 {
        return pairs;
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));

    // parent[v] = usize::MAX marks a vertex not yet in the filtration;
    // best[root] is the index of the component's minimum.
    let mut parent = vec![usize::MAX; m];
    let mut best = vec![usize::MAX; m];

    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }

    for &v in &order {
        parent[v] = v;
        best[v] = v;
        let left = (v > 0 && parent[v - 1] != usize::MAX).then(|| find(&mut parent, v - 1));
        let right = (v + 1 < m && parent[v + 1] != usize::MAX).then(|| find(&mut parent, v + 1));
        match (left, right) {
            (None, None) => {}
            (Some(r), None) | (None, Some(r)) => {
                parent[v] = r;
            }
            (Some(rl), Some(rr)) => {
                debug_assert_ne!(rl, rr);
                // elder: smaller (value, index) of the two minima
                let (bl, br) = (best[rl], best[rr]);
                let l_elder = y[bl].total_cmp(&y[br]).then(bl.cmp(&br)).is_lt();
                let (elder, younger) = if l_elder { (rl, rr) } else { (rr, rl) };
                pairs.push(PersistencePair {
                    birth_index: best[younger],
                    death_index: v,
                    birth_value: y[best[younger]],
                    death_value: y[v],
                    direction: Direction::Sublevel,
                });
                parent[younger] = elder;
                parent[v] = elder;
            }
        }
    }
    pairs
}

/// Sublevel pairing: interior local minima paired with the maxima where
/// their components merge. The global minimum never dies and is excluded.
/// Expects a plateau-reduced sequence.
pub fn sublevel_pairs(y: &[f64]) -> Vec<PersistencePair> {
    sweep_pairs(y)
}

/// Superlevel pairing: the sublevel pairing of -y with values negated back.
/// Expects a plateau-reduced sequence.
pub fn superlevel_pairs(y: &[f64]) -> Vec<PersistencePair> {
    let neg: Vec<f64> = y.iter().map(|&v| -v).collect();
    sweep_pairs(&neg)
        .into_iter()
        .map(|p| PersistencePair {
            birth_index: p.birth_index,
            death_index: p.death_index,
            birth_value: -p.birth_value,
            death_value: -p.death_value,
            direction: Direction::Superlevel,
        })
        .collect()
}

/// Sum of the value gaps of all pairs in both pairings (global pair
/// excluded). Satisfies `persistent_distance(y) + range(y) = TV(y)`.
pub fn persistent_distance(y: &[f64]) -> f64 {
    let (reduced, _) = reduce_plateaus(y);
    let sub: f64 = sublevel_pairs(&reduced).iter().map(|p| p.persistence()).sum();
    let sup: f64 = superlevel_pairs(&reduced)
        .iter()
        .map(|p| p.persistence())
        .sum();
    sub + sup
}

/// Nesting level of every pair: the number of other pairs whose index span
/// strictly contains the pair's span.
pub fn chain_levels(pairs: &[PersistencePair]) -> Vec<usize> {
    let spans: Vec<(usize, usize)> = pairs.iter().map(|p| p.span()).collect();
    spans
        .iter()
        .map(|&(a, b)| {
            spans
                .iter()
                .filter(|&&(c, d)| c <= a && b <= d && (c < a || b < d))
                .count()
        })
        .collect()
}

/// The weighted persistence sum (without the regularization strength, which
/// the sampler multiplies on).
pub fn ph_regularizer(y: &[f64], params: &PhWeightParams) -> f64 {
    let diagram = PersistenceDiagram::compute(y);
    diagram
        .pairs_with_levels()
        .map(|(p, k)| params.weight(k, p.persistence()) * p.persistence())
        .sum()
}
