//! Cancellation of arrow-connected pairs. Over `Z2[U, U^-1]` every arrow
//! is a unit, so any arrow can be cancelled.

use super::KnotComplex;
use crate::gf2::{self, BitRow};
use std::collections::{BTreeMap, BTreeSet};

/// Cancels pairs until no arrows remain, always choosing the arrow that
/// is smallest under `rank[from], rank[to]`. Returns the surviving
/// generators.
pub fn eliminate_by(k: &KnotComplex, rank: &[usize]) -> Vec<usize> {
    let n = k.len();
    let mut out: Vec<BTreeMap<usize, i64>> = vec![BTreeMap::new(); n];
    let mut inc: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for a in k.arrows() {
        let e = out[a.from].entry(a.to).or_insert(a.m as i64);
        debug_assert_eq!(*e, a.m as i64);
        inc[a.to].insert(a.from);
    }
    let mut alive = vec![true; n];
    loop {
        let pick = (0..n)
            .filter(|&x| alive[x])
            .flat_map(|x| out[x].keys().map(move |&y| (x, y)))
            .min_by_key(|&(x, y)| (rank[x], rank[y]));
        let Some((x, y)) = pick else { break };
        let e = out[x][&y];
        let sources: Vec<(usize, i64)> = inc[y]
            .iter()
            .filter(|&&z| z != x)
            .map(|&z| (z, out[z][&y]))
            .collect();
        let targets: Vec<(usize, i64)> = out[x]
            .iter()
            .filter(|(&w, _)| w != y)
            .map(|(&w, &b)| (w, b))
            .collect();
        for &(z, a) in &sources {
            for &(w, b) in &targets {
                let exp = a + b - e;
                if out[z].remove(&w).is_some() {
                    inc[w].remove(&z);
                } else {
                    out[z].insert(w, exp);
                    inc[w].insert(z);
                }
            }
        }
        for v in [x, y] {
            alive[v] = false;
            for w in std::mem::take(&mut out[v]).into_keys() {
                inc[w].remove(&v);
            }
            for z in std::mem::take(&mut inc[v]) {
                out[z].remove(&v);
            }
        }
    }
    (0..n).filter(|&i| alive[i]).collect()
}

/// Elimination with ties broken by generator name.
pub fn eliminate(k: &KnotComplex) -> Vec<usize> {
    let mut order: Vec<usize> = (0..k.len()).collect();
    order.sort_by(|&a, &b| k.generators()[a].name.cmp(&k.generators()[b].name));
    let mut rank = vec![0; k.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    eliminate_by(k, &rank)
}

pub fn is_acyclic(k: &KnotComplex) -> bool {
    eliminate(k).is_empty()
}

/// Rank of `∂` over the Laurent ring, read off from elimination.
pub fn laurent_rank(k: &KnotComplex) -> usize {
    (k.len() - eliminate(k).len()) / 2
}

/// GF(2) rank of `∂` after substituting `U = 1`.
pub fn collapsed_rank(k: &KnotComplex) -> usize {
    let mut rows = vec![BitRow::zeros(k.len()); k.len()];
    for a in k.arrows() {
        rows[a.from].flip(a.to);
    }
    gf2::rank(&rows)
}
