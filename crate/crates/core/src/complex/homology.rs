//! Homology in a fixed grading and the coset min-max engine behind `d`,
//! `V` and every region invariant.

use super::{ComplexError, KnotComplex};
use crate::gf2::{BitRow, Echelon};
use crate::rational::{half_int_diff, mod2, q, Q};
use std::collections::{BTreeMap, BTreeSet};

/// Largest boundary dimension the exhaustive coset oracles accept.
pub const ORACLE_CAP: usize = 16;

/// `Σ U^k x`, stored as sorted `(generator, k)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ChainElement {
    pub terms: Vec<(usize, i64)>,
}

impl ChainElement {
    /// Positions `(A(x) - k, -k)` of the terms.
    pub fn positions(&self, k: &KnotComplex) -> Vec<(i64, i64)> {
        self.terms
            .iter()
            .map(|&(g, p)| (k.generators()[g].alexander - p, -p))
            .collect()
    }

    pub fn render(&self, k: &KnotComplex) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|&(g, p)| {
                let n = &k.generators()[g].name;
                match p {
                    0 => n.clone(),
                    1 => format!("U{n}"),
                    _ => format!("U^{p}{n}"),
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorCoset {
    pub grading: Q,
    pub base: ChainElement,
    pub boundary_basis: Vec<ChainElement>,
}

/// The grading-`q` chain group (one term per generator of matching parity)
/// together with its boundary maps into and out of it.
#[derive(Clone, Debug)]
pub struct GradingSlice {
    pub grading: Q,
    p_gens: Vec<usize>,
    p_pos: Vec<(i64, i64)>,
    o_pos: Vec<(i64, i64)>,
    dp: Vec<BitRow>,
    bnd: Vec<BitRow>,
    bnd_ech: Echelon,
}

impl GradingSlice {
    pub fn new(k: &KnotComplex, grading: Q) -> Self {
        let gens = k.generators();
        let mut p_index = BTreeMap::new();
        let mut o_index = BTreeMap::new();
        let (mut p_gens, mut p_k, mut p_pos, mut o_gens, mut o_pos) =
            (vec![], vec![], vec![], vec![], vec![]);
        for (i, g) in gens.iter().enumerate() {
            if let Some(kk) = half_int_diff(g.maslov, grading) {
                p_index.insert(i, p_gens.len());
                p_gens.push(i);
                p_k.push(kk);
                p_pos.push((g.alexander - kk, -kk));
            } else if let Some(kk) = half_int_diff(g.maslov, grading + q(1)) {
                o_index.insert(i, o_gens.len());
                o_gens.push(i);
                o_pos.push((g.alexander - kk, -kk));
            }
        }
        let mut dp = vec![BitRow::zeros(o_gens.len()); p_gens.len()];
        let mut bnd = vec![BitRow::zeros(p_gens.len()); o_gens.len()];
        for a in k.arrows() {
            if let (Some(&i), Some(&j)) = (p_index.get(&a.from), o_index.get(&a.to)) {
                dp[i].flip(j);
            }
            if let (Some(&i), Some(&j)) = (o_index.get(&a.from), p_index.get(&a.to)) {
                bnd[i].flip(j);
            }
        }
        let bnd_ech = Echelon::from_rows(&bnd);
        GradingSlice {
            grading,
            p_gens,
            p_pos,
            o_pos,
            dp,
            bnd,
            bnd_ech,
        }
    }

    pub fn dim(&self) -> usize {
        self.p_gens.len()
    }

    pub fn homology_rank(&self) -> usize {
        self.dim() - crate::gf2::rank(&self.dp) - self.bnd_ech.rank()
    }

    pub fn boundary_rank(&self) -> usize {
        self.bnd_ech.rank()
    }

    /// Positions of the grading-`q` terms.
    pub fn positions(&self) -> &[(i64, i64)] {
        &self.p_pos
    }

    /// Positions of the grading-`q+1` terms.
    pub fn upper_positions(&self) -> &[(i64, i64)] {
        &self.o_pos
    }

    fn element(&self, row: &BitRow) -> ChainElement {
        let mut terms: Vec<(usize, i64)> = row
            .ones()
            .map(|i| (self.p_gens[i], -self.p_pos[i].1))
            .collect();
        terms.sort();
        ChainElement { terms }
    }

    /// A cycle supported on the allowed terms that is not a boundary.
    pub fn nonbounding_cycle(&self, allowed: &[bool]) -> Option<BitRow> {
        let n = self.dim();
        let mut e = Echelon::new();
        for i in (0..n).filter(|&i| allowed[i]) {
            if let Some(z) = e.insert_tagged(self.dp[i].clone(), BitRow::unit(n, i)) {
                if !self.bnd_ech.contains(&z) {
                    return Some(z);
                }
            }
        }
        None
    }

    /// `min` over non-bounding cycles of `max` over their terms of
    /// `score`, with a cycle attaining it.
    pub fn minmax(&self, scores: &[Q]) -> Result<(Q, ChainElement), ComplexError> {
        let mut values: Vec<Q> = scores
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        values.sort();
        let test = |s: Q| {
            let allowed: Vec<bool> = scores.iter().map(|v| *v <= s).collect();
            self.nonbounding_cycle(&allowed)
        };
        let top = *values.last().ok_or(ComplexError::NotKnotType { rank: 0 })?;
        let mut best = test(top).ok_or(ComplexError::NotKnotType { rank: 0 })?;
        let (mut lo, mut hi) = (0usize, values.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match test(values[mid]) {
                Some(z) => {
                    hi = mid;
                    best = z;
                }
                None => lo = mid + 1,
            }
        }
        Ok((values[hi], self.element(&best)))
    }

    pub fn minmax_by(&self, f: impl Fn(i64, i64) -> Q) -> Result<Q, ComplexError> {
        let scores: Vec<Q> = self.p_pos.iter().map(|&(a, j)| f(a, j)).collect();
        Ok(self.minmax(&scores)?.0)
    }

    pub fn coset(&self) -> Result<GeneratorCoset, ComplexError> {
        let all = vec![true; self.dim()];
        let base = self
            .nonbounding_cycle(&all)
            .ok_or(ComplexError::NotKnotType { rank: 0 })?;
        let mut e = Echelon::new();
        let mut basis = Vec::new();
        for b in &self.bnd {
            if e.insert(b.clone()) {
                basis.push(self.element(b));
            }
        }
        Ok(GeneratorCoset {
            grading: self.grading,
            base: self.element(&base),
            boundary_basis: basis,
        })
    }

    /// Exhaustive `min max` over the whole coset.
    pub fn oracle(&self, f: impl Fn(i64, i64) -> Q) -> Result<Q, ComplexError> {
        let all = vec![true; self.dim()];
        let base = self
            .nonbounding_cycle(&all)
            .ok_or(ComplexError::NotKnotType { rank: 0 })?;
        let mut e = Echelon::new();
        let mut basis = Vec::new();
        for b in &self.bnd {
            if e.insert(b.clone()) {
                basis.push(b.clone());
            }
        }
        if basis.len() > ORACLE_CAP {
            return Err(ComplexError::CapExceeded {
                size: format!("2^{}", basis.len()),
                cap: 1 << ORACLE_CAP,
            });
        }
        let scores: Vec<Q> = self.p_pos.iter().map(|&(a, j)| f(a, j)).collect();
        let mut best: Option<Q> = None;
        for mask in 0u32..(1u32 << basis.len()) {
            let mut z = base.clone();
            for (i, b) in basis.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    z.xor(b);
                }
            }
            let v = z.ones().map(|i| scores[i]).max().expect("nonzero cycle");
            best = Some(best.map_or(v, |b: Q| b.min(v)));
        }
        Ok(best.expect("nonempty coset"))
    }
}

/// Maslov grading (mod 2 class representative) of the homology tower.
pub fn tower_class(k: &KnotComplex) -> Result<Q, ComplexError> {
    if let Some(t) = k.tower() {
        let rank = GradingSlice::new(k, t).homology_rank();
        return if rank == 1 {
            Ok(t)
        } else {
            Err(ComplexError::NotKnotType { rank })
        };
    }
    let classes: BTreeSet<Q> = k.generators().iter().map(|g| mod2(g.maslov)).collect();
    let ranks: Vec<(Q, usize)> = classes
        .into_iter()
        .map(|c| (c, GradingSlice::new(k, c).homology_rank()))
        .collect();
    let total: usize = ranks.iter().map(|r| r.1).sum();
    if total != 1 {
        return Err(ComplexError::NotKnotType { rank: total });
    }
    Ok(ranks.into_iter().find(|r| r.1 == 1).expect("rank one").0)
}

pub fn correction_term(k: &KnotComplex) -> Result<Q, ComplexError> {
    let c = tower_class(k)?;
    let s = GradingSlice::new(k, c).minmax_by(|_, j| q(j))?;
    Ok(c - q(2) * s)
}

pub fn generator_coset(k: &KnotComplex) -> Result<GeneratorCoset, ComplexError> {
    GradingSlice::new(k, correction_term(k)?).coset()
}

fn v_score(m: i64) -> impl Fn(i64, i64) -> Q {
    move |a, j| q((a - m).max(j))
}

pub fn v_invariant(k: &KnotComplex, m: i64) -> Result<Q, ComplexError> {
    let d = correction_term(k)?;
    Ok(d - q(2) * GradingSlice::new(k, d).minmax_by(v_score(m))?)
}

/// `min max` of `score` over the generator coset by enumeration.
pub fn coset_oracle(k: &KnotComplex, score: impl Fn(i64, i64) -> Q) -> Result<Q, ComplexError> {
    GradingSlice::new(k, correction_term(k)?).oracle(score)
}

pub fn v_oracle(k: &KnotComplex, m: i64) -> Result<Q, ComplexError> {
    Ok(correction_term(k)? - q(2) * coset_oracle(k, v_score(m))?)
}

/// `((q - 2m)^2 - q) / 4q + v`.
pub fn surgery_d(qf: i64, m: i64, v: Q) -> Q {
    Q::new((qf - 2 * m).pow(2) - qf, 4 * qf) + v
}

#[cfg(test)]
mod tests {
    use super::super::tests::trefoil;
    use super::super::{acyclic_box, acyclic_pair, staircase};
    use super::*;
    use crate::rational::frac;

    #[test]
    fn correction_terms() {
        assert_eq!(correction_term(&KnotComplex::unknot()), Ok(q(0)));
        assert_eq!(correction_term(&trefoil()), Ok(q(0)));
        assert_eq!(
            correction_term(&acyclic_pair("", 0, q(0))),
            Err(ComplexError::NotKnotType { rank: 0 })
        );
        let two = KnotComplex::unknot().direct_sum(&KnotComplex::unknot());
        assert_eq!(
            correction_term(&two),
            Err(ComplexError::NotKnotType { rank: 2 })
        );
        let shifted = trefoil().shifted(0, frac(1, 2));
        assert_eq!(correction_term(&shifted), Ok(frac(1, 2)));
    }

    #[test]
    fn trefoil_coset() {
        let k = trefoil();
        let c = generator_coset(&k).unwrap();
        assert_eq!(c.grading, q(0));
        assert_eq!(c.boundary_basis.len(), 1);
        assert_eq!(c.boundary_basis[0].render(&k), "x1 + U^-1x3");
        let base = c.base.render(&k);
        assert!(base == "x1" || base == "U^-1x3");
        let u = generator_coset(&KnotComplex::unknot()).unwrap();
        assert_eq!(u.base.terms, vec![(0, 0)]);
        assert!(u.boundary_basis.is_empty());
    }

    #[test]
    fn v_values() {
        let k = trefoil();
        assert_eq!(v_invariant(&k, 0), Ok(q(-2)));
        assert_eq!(v_invariant(&k, 1), Ok(q(0)));
        for m in 0..5 {
            assert_eq!(v_invariant(&KnotComplex::unknot(), m), Ok(q(0)));
            assert_eq!(v_invariant(&k, m), v_oracle(&k, m));
        }
    }

    #[test]
    fn surgery_formula() {
        assert_eq!(surgery_d(1, 0, q(0)), q(0));
        assert_eq!(surgery_d(1, 0, q(-2)), q(-2));
        assert_eq!(surgery_d(4, 2, q(0)), frac(-1, 4));
    }

    #[test]
    fn boxes_do_not_move_d() {
        let k = trefoil().direct_sum(&acyclic_box("b", 3, q(5), None));
        assert_eq!(correction_term(&k), Ok(q(0)));
        assert_eq!(v_invariant(&k, 0), Ok(q(-2)));
    }

    #[test]
    fn explicit_tower_selects_class() {
        // two towers in opposite parities
        let k = staircase(&[(1, 1)], 1, q(0)).direct_sum(&KnotComplex::unknot().shifted(0, q(3)));
        assert!(tower_class(&k).is_err());
        let k0 = k.clone().with_tower(Some(q(0)));
        assert_eq!(correction_term(&k0), Ok(q(0)));
        assert_eq!(v_invariant(&k0, 0), Ok(q(-2)));
        let k1 = k.with_tower(Some(q(3)));
        assert_eq!(correction_term(&k1), Ok(q(3)));
    }
}
