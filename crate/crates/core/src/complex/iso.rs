//! Graded isomorphism of arrow graphs by backtracking.

use crate::rational::Q;
use std::collections::{BTreeMap, VecDeque};

/// Vertices carry `(A, M)`; edges carry an integer label (a `U` exponent,
/// or an encoded pair of `V0`/`V1` exponents).
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledGraph {
    pub grades: Vec<(Q, Q)>,
    pub edges: Vec<(usize, usize, u64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsoWitness {
    /// `map[i]` is the image of vertex `i`.
    pub map: Vec<usize>,
    pub shift_a: Q,
    pub shift_m: Q,
}

type EdgeMap = BTreeMap<(usize, usize), Vec<u64>>;

fn edge_map(g: &LabeledGraph) -> EdgeMap {
    let mut m: EdgeMap = BTreeMap::new();
    for &(a, b, l) in &g.edges {
        m.entry((a, b)).or_default().push(l);
    }
    for v in m.values_mut() {
        v.sort();
    }
    m
}

fn signature(g: &LabeledGraph, v: usize) -> (Vec<u64>, Vec<u64>) {
    let mut outs: Vec<u64> = g.edges.iter().filter(|e| e.0 == v).map(|e| e.2).collect();
    let mut ins: Vec<u64> = g.edges.iter().filter(|e| e.1 == v).map(|e| e.2).collect();
    outs.sort();
    ins.sort();
    (outs, ins)
}

/// Finds a bijection preserving gradings (up to one common shift of each
/// grading when `allow_shift`) and labeled edges.
pub fn find_iso(g1: &LabeledGraph, g2: &LabeledGraph, allow_shift: bool) -> Option<IsoWitness> {
    let n = g1.grades.len();
    if n != g2.grades.len() || g1.edges.len() != g2.edges.len() {
        return None;
    }
    if n == 0 {
        return Some(IsoWitness {
            map: vec![],
            shift_a: Q::default(),
            shift_m: Q::default(),
        });
    }
    let (shift_a, shift_m) = if allow_shift {
        let min_a = |g: &LabeledGraph| g.grades.iter().map(|x| x.0).min().expect("nonempty");
        let min_m = |g: &LabeledGraph| g.grades.iter().map(|x| x.1).min().expect("nonempty");
        (min_a(g2) - min_a(g1), min_m(g2) - min_m(g1))
    } else {
        (Q::default(), Q::default())
    };
    let e1 = edge_map(g1);
    let e2 = edge_map(g2);
    let sig2: Vec<_> = (0..n).map(|v| signature(g2, v)).collect();
    let cands: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let s = signature(g1, v);
            let (a, m) = g1.grades[v];
            (0..n)
                .filter(|&w| g2.grades[w] == (a + shift_a, m + shift_m) && sig2[w] == s)
                .collect()
        })
        .collect();
    if cands.iter().any(|c| c.is_empty()) {
        return None;
    }
    let order = search_order(g1, &cands);
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let get = |e: &EdgeMap, a: usize, b: usize| e.get(&(a, b)).cloned().unwrap_or_default();

    fn go(
        depth: usize,
        order: &[usize],
        cands: &[Vec<usize>],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ok: &dyn Fn(usize, usize, &[usize]) -> bool,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let v = order[depth];
        for &w in &cands[v] {
            if used[w] || !ok(v, w, map) {
                continue;
            }
            map[v] = w;
            used[w] = true;
            if go(depth + 1, order, cands, map, used, ok) {
                return true;
            }
            map[v] = usize::MAX;
            used[w] = false;
        }
        false
    }

    let ok = |v: usize, w: usize, map: &[usize]| -> bool {
        if get(&e1, v, v) != get(&e2, w, w) {
            return false;
        }
        for (u, &mu) in map.iter().enumerate() {
            if mu == usize::MAX || u == v {
                continue;
            }
            if get(&e1, v, u) != get(&e2, w, mu) || get(&e1, u, v) != get(&e2, mu, w) {
                return false;
            }
        }
        true
    };
    if go(0, &order, &cands, &mut map, &mut used, &ok) {
        Some(IsoWitness {
            map,
            shift_a,
            shift_m,
        })
    } else {
        None
    }
}

/// Breadth-first order starting from the most constrained vertex, so
/// each new vertex is usually adjacent to one already placed.
fn search_order(g: &LabeledGraph, cands: &[Vec<usize>]) -> Vec<usize> {
    let n = g.grades.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b, _) in &g.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n)
            .filter(|&v| !seen[v])
            .min_by_key(|&v| cands[v].len())
            .expect("unvisited vertex");
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !seen[u]).collect();
            next.sort_by_key(|&u| cands[u].len());
            next.dedup();
            for u in next {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn path(labels: &[u64], base: i64) -> LabeledGraph {
        LabeledGraph {
            grades: (0..=labels.len() as i64)
                .map(|i| (q(0), q(base - i)))
                .collect(),
            edges: labels
                .iter()
                .enumerate()
                .map(|(i, &l)| (i, i + 1, l))
                .collect(),
        }
    }

    #[test]
    fn shifts_and_labels() {
        let a = path(&[0, 1], 0);
        let b = path(&[0, 1], 5);
        assert!(find_iso(&a, &b, false).is_none());
        let w = find_iso(&a, &b, true).unwrap();
        assert_eq!(w.shift_m, q(5));
        assert_eq!(w.map, vec![0, 1, 2]);
        assert!(find_iso(&a, &path(&[1, 0], 0), true).is_none());
    }

    #[test]
    fn permuted_vertices() {
        let a = LabeledGraph {
            grades: vec![(q(0), q(1)), (q(0), q(0)), (q(0), q(0))],
            edges: vec![(0, 1, 0), (0, 2, 1)],
        };
        let b = LabeledGraph {
            grades: vec![(q(0), q(0)), (q(0), q(0)), (q(0), q(1))],
            edges: vec![(2, 0, 1), (2, 1, 0)],
        };
        assert_eq!(find_iso(&a, &b, false).unwrap().map, vec![2, 1, 0]);
    }
}
