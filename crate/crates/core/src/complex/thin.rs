//! Hat ranks and reconstruction of thin complexes from `d` and ranks.

use super::{acyclic_box, correction_term, eliminate, staircase, ComplexError, KnotComplex};
use crate::gf2::{self, BitRow};
use crate::rational::{q, Q};
use std::collections::BTreeMap;

/// Ranks of the homology of the associated graded complex at `U = 0`,
/// keyed by `(A, M)`.
pub fn hat_ranks(k: &KnotComplex) -> BTreeMap<(i64, Q), usize> {
    let gens = k.generators();
    let mut groups: BTreeMap<(i64, Q), Vec<usize>> = BTreeMap::new();
    for (i, g) in gens.iter().enumerate() {
        groups.entry((g.alexander, g.maslov)).or_default().push(i);
    }
    let pos: BTreeMap<usize, usize> = groups
        .values()
        .flat_map(|v| v.iter().enumerate().map(|(p, &i)| (i, p)))
        .collect();
    let mut rows: BTreeMap<usize, BitRow> = BTreeMap::new();
    for a in k.arrows() {
        if a.m == 0 && gens[a.to].alexander == gens[a.from].alexander {
            rows.entry(a.from).or_default().flip(pos[&a.to]);
        }
    }
    let rank_out = |key: &(i64, Q)| -> usize {
        let rs: Vec<BitRow> = groups[key]
            .iter()
            .filter_map(|i| rows.get(i).cloned())
            .collect();
        gf2::rank(&rs)
    };
    let mut out = BTreeMap::new();
    for (key, members) in &groups {
        let below = rank_out(key);
        let above = groups
            .get(&(key.0, key.1 + q(1)))
            .map(|_| rank_out(&(key.0, key.1 + q(1))))
            .unwrap_or(0);
        let r = members.len() - below - above;
        if r > 0 {
            out.insert(*key, r);
        }
    }
    out
}

/// All hat ranks on one line `M = A + δ`; returns `δ`.
pub fn is_thin(k: &KnotComplex) -> Option<Q> {
    let r = hat_ranks(k);
    let mut deltas = r.keys().map(|(a, m)| *m - q(*a));
    let first = deltas.next()?;
    deltas.all(|d| d == first).then_some(first)
}

/// Rebuilds a thin knot-type complex (staircase plus boxes) with the same
/// `d`, hat ranks and spin^c label. Complexes whose homology has two
/// towers, one shifted by `(1, 1)` from the other, are first halved.
pub fn thin_model(k: &KnotComplex) -> Result<KnotComplex, ComplexError> {
    thin_model_with(k, correction_term(k)?)
}

/// [`thin_model`] with the correction term supplied.
pub fn thin_model_with(k: &KnotComplex, d: Q) -> Result<KnotComplex, ComplexError> {
    let survivors = eliminate(k).len();
    let mut ranks: BTreeMap<(i64, Q), i64> = hat_ranks(k)
        .into_iter()
        .map(|(key, v)| (key, v as i64))
        .collect();
    match survivors {
        1 => {}
        2 => {
            let mut half = BTreeMap::new();
            let keys: Vec<_> = ranks.keys().copied().collect();
            for key in keys {
                let c = ranks[&key];
                if c == 0 {
                    continue;
                }
                if c < 0 {
                    return Err(ComplexError::NotThin);
                }
                half.insert(key, c);
                *ranks.entry((key.0 + 1, key.1 + q(1))).or_default() -= c;
            }
            ranks = half;
        }
        rank => return Err(ComplexError::NotKnotType { rank }),
    }
    let mut deltas = ranks.keys().map(|(a, m)| *m - q(*a));
    let delta = deltas.next().ok_or(ComplexError::NotThin)?;
    if !deltas.all(|x| x == delta) {
        return Err(ComplexError::NotThin);
    }
    let tau = d - delta;
    if !tau.is_integer() {
        return Err(ComplexError::NotThin);
    }
    let t = tau.to_integer();
    let n = t.unsigned_abs() as u32;
    let steps = vec![(1u32, 1u32); n as usize];
    let mut model = if t >= 0 {
        staircase(&steps, t, q(t) + delta)
    } else {
        staircase(&steps, -t, q(-t) - delta).dual()
    };
    for g in model.generators() {
        let e = ranks.entry((g.alexander, g.maslov)).or_default();
        *e -= 1;
    }
    let mut count = 0;
    loop {
        ranks.retain(|_, v| *v != 0);
        if ranks.values().any(|v| *v < 0) {
            return Err(ComplexError::NotThin);
        }
        let Some((&(top, _), _)) = ranks.iter().max_by_key(|(key, _)| key.0) else {
            break;
        };
        let c = top - 1;
        for (a, mult) in [(c + 1, 1), (c, 2), (c - 1, 1)] {
            *ranks.entry((a, q(a) + delta)).or_default() -= mult;
        }
        model = model.direct_sum(&acyclic_box(&format!("b{count}"), c, q(c) + delta, None));
        count += 1;
    }
    Ok(model.with_spinc(k.spinc()))
}

#[cfg(test)]
mod tests {
    use super::super::tests::trefoil;
    use super::*;

    #[test]
    fn trefoil_is_thin() {
        assert_eq!(is_thin(&trefoil()), Some(q(-1)));
        let r = hat_ranks(&trefoil());
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn model_of_box_sum() {
        let k = trefoil().direct_sum(&acyclic_box("x", 0, q(-1), None));
        let m = thin_model(&k).unwrap();
        assert_eq!(m.len(), 7);
        assert_eq!(hat_ranks(&m), hat_ranks(&k));
        assert!(m.validate().is_empty());
        let dual = thin_model(&trefoil().dual()).unwrap();
        assert_eq!(hat_ranks(&dual), hat_ranks(&trefoil().dual()));
    }
}
