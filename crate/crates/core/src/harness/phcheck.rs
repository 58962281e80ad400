//! Independent checks of the persistence pairing: a brute-force component
//! tracker that rescans the thresholded sublevel set at every critical
//! value, exhaustive comparison over short sequences, and the
//! total-variation identity on random sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::topology::{reduce_plateaus, sublevel_pairs, superlevel_pairs, Direction};

/// Contiguous index intervals of the active vertices.
fn intervals(active: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &a) in active.iter().enumerate() {
        match (a, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, active.len() - 1));
    }
    out
}

/// Position of the minimum of `y` restricted to `[lo, hi]`, earliest index
/// on ties.
fn argmin_on(y: &[f64], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for i in lo..=hi {
        if y[i] < y[best] {
            best = i;
        }
    }
    best
}

/// Brute-force sublevel pairing of a plateau-reduced sequence. Vertices are
/// activated in increasing (value, index) order; after each activation the
/// components are recomputed from scratch, and a component swallowing
/// several previous ones kills all but the one holding the oldest minimum.
/// Returns (birth_index, death_index) pairs.
pub fn oracle_sublevel_pairs(y: &[f64]) -> Vec<(usize, usize)> {
    let m = y.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));

    let mut active = vec![false; m];
    let mut previous: Vec<(usize, usize)> = Vec::new();
    let mut pairs = Vec::new();
    for &v in &order {
        active[v] = true;
        let current = intervals(&active);
        let &(lo, hi) = current
            .iter()
            .find(|&&(a, b)| a <= v && v <= b)
            .expect("v was just activated");
        let swallowed: Vec<(usize, usize)> = previous
            .iter()
            .copied()
            .filter(|&(a, b)| lo <= a && b <= hi)
            .collect();
        if swallowed.len() >= 2 {
            let mut mins: Vec<usize> = swallowed
                .iter()
                .map(|&(a, b)| argmin_on(y, a, b))
                .collect();
            mins.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));
            for &younger in &mins[1..] {
                pairs.push((younger, v));
            }
        }
        previous = current;
    }
    pairs
}

/// Brute-force superlevel pairing via the negated sequence.
pub fn oracle_superlevel_pairs(y: &[f64]) -> Vec<(usize, usize)> {
    let neg: Vec<f64> = y.iter().map(|&v| -v).collect();
    oracle_sublevel_pairs(&neg)
}

fn sorted_index_pairs(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut v = pairs.to_vec();
    v.sort_unstable();
    v
}

/// Compare both pairings against the oracle on every sequence of length
/// 1..=max_len over the alphabet. Returns the number of sequences checked;
/// the first mismatch is reported as an error string.
pub fn exhaustive_oracle_comparison(
    alphabet: &[f64],
    max_len: usize,
) -> Result<usize, String> {
    let base = alphabet.len();
    let mut checked = 0;
    for len in 1..=max_len {
        let total = base.pow(len as u32);
        let mut digits = vec![0usize; len];
        for code in 0..total {
            let mut c = code;
            for d in digits.iter_mut() {
                *d = c % base;
                c /= base;
            }
            let y: Vec<f64> = digits.iter().map(|&d| alphabet[d]).collect();
            let (reduced, _) = reduce_plateaus(&y);

            let got_sub: Vec<(usize, usize)> = sublevel_pairs(&reduced)
                .iter()
                .map(|p| {
                    assert_eq!(p.direction, Direction::Sublevel);
                    (p.birth_index, p.death_index)
                })
                .collect();
            let want_sub = oracle_sublevel_pairs(&reduced);
            if sorted_index_pairs(&got_sub) != sorted_index_pairs(&want_sub) {
                return Err(format!(
                    "sublevel mismatch on {y:?}: got {got_sub:?}, oracle {want_sub:?}"
                ));
            }

            let got_sup: Vec<(usize, usize)> = superlevel_pairs(&reduced)
                .iter()
                .map(|p| (p.birth_index, p.death_index))
                .collect();
            let want_sup = oracle_superlevel_pairs(&reduced);
            if sorted_index_pairs(&got_sup) != sorted_index_pairs(&want_sup) {
                return Err(format!(
                    "superlevel mismatch on {y:?}: got {got_sup:?}, oracle {want_sup:?}"
                ));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Largest relative deviation of persistent_distance(y) + range(y) from the
/// total variation over `cases` random sequences of length 2..=200.
pub fn tv_identity_max_deviation(cases: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let len = rng.gen_range(2..=200);
        let y: Vec<f64> = (0..len).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let tv: f64 = y.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let lhs = crate::topology::persistent_distance(&y) + (max - min);
        worst = worst.max((lhs - tv).abs() / tv.max(1.0));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_agrees_on_known_cases() {
        assert_eq!(
            sorted_index_pairs(&oracle_sublevel_pairs(&[0.0, 2.0, 1.0, 3.0])),
            vec![(2, 1)]
        );
        let got = sorted_index_pairs(&oracle_sublevel_pairs(&[0.0, 3.0, 1.0, 2.0, 0.5, 4.0]));
        assert_eq!(got, vec![(2, 3), (4, 1)]);
        assert!(oracle_sublevel_pairs(&[1.0, 2.0, 3.0]).is_empty());
    }

    #[test]
    fn exhaustive_small_alphabet() {
        let checked =
            exhaustive_oracle_comparison(&[0.0, 1.0, 2.0, 3.0], 6).expect("pairings must agree");
        assert_eq!(checked, 4 + 16 + 64 + 256 + 1024 + 4096);
    }

    #[test]
    fn tv_identity_tight() {
        let dev = tv_identity_max_deviation(200, 17);
        assert!(dev <= 1e-12, "deviation {dev}");
    }
}
