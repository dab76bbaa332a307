//! Poles, wires and the fused complexes `C[e, w]` over `F[V0, V1]`.
//!
//! Layout, in the grid's own orientation (arrows raise the Alexander
//! grading by the total `V` exponent and drop `M` by one net of it):
//!
//! - the wire has layers `L_0 .. L_w` of two generators `a_k`, `b_k` at
//!   `A = k`, `M = k`. Between `L_k` and `L_{k+1}` every arrow carries one
//!   `V`. For even `k` the target decides the variable (`V0` into `a`, `V1`
//!   into `b`); for odd `k` the source does (`V1` out of `a`, `V0` out of
//!   `b`).
//! - a pole of height `e` is a top generator over `e` levels of two, with
//!   plain arrows from the top to level one and all four arrows between
//!   consecutive levels. Its Alexander grading is constant.
//! - `C[e, w]` hangs a pole of height `e` on each end layer of the wire.
//!   For `e = 0` each end layer is a single generator: the left one keeps
//!   the outgoing arrows of `b_0`, the right one receives `α + β` from every
//!   source that sent `α a_w + β b_w`.

use crate::complex::{
    find_iso, thin_model_with, ComplexError, Generator, IsoWitness, KnotComplex, LabeledGraph,
};
use crate::gf2::{self, BitRow};
use crate::grid::GridSlice;
use crate::rational::{q, Q};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("wire length must be positive")]
    EmptyWire,
    #[error("pole height is already zero")]
    NoPole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Pole(u32),
    Wire(u32),
    Fused(u32, u32),
}

/// Arrow `from -> V0^o0 V1^o1 to`.
pub type BiArrow = (usize, usize, u32, u32);

#[derive(Clone, Debug, PartialEq)]
pub struct ModelComplex {
    pub kind: ModelKind,
    pub names: Vec<String>,
    pub alexander: Vec<i64>,
    pub maslov: Vec<i64>,
    pub arrows: Vec<BiArrow>,
    /// For each pole, its levels from the top down, the last one being the
    /// attached end of the wire.
    poles: Vec<Vec<Vec<usize>>>,
}

#[derive(Default)]
struct Builder {
    names: Vec<String>,
    alexander: Vec<i64>,
    maslov: Vec<i64>,
    arrows: BTreeMap<BiArrow, u32>,
}

impl Builder {
    fn add(&mut self, name: String, a: i64, m: i64) -> usize {
        self.names.push(name);
        self.alexander.push(a);
        self.maslov.push(m);
        self.names.len() - 1
    }

    fn arrow(&mut self, from: usize, to: usize, o0: u32, o1: u32) {
        *self.arrows.entry((from, to, o0, o1)).or_default() += 1;
    }

    fn finish(self, kind: ModelKind, poles: Vec<Vec<Vec<usize>>>) -> ModelComplex {
        ModelComplex {
            kind,
            names: self.names,
            alexander: self.alexander,
            maslov: self.maslov,
            arrows: self
                .arrows
                .into_iter()
                .filter(|(_, c)| c % 2 == 1)
                .map(|(a, _)| a)
                .collect(),
            poles,
        }
    }

    /// Pole levels above `bottom` (top first), at Alexander grading `a`.
    fn pole(
        &mut self,
        tag: &str,
        e: u32,
        a: i64,
        bottom_m: i64,
        bottom: Vec<usize>,
    ) -> Vec<Vec<usize>> {
        let e = e as i64;
        let mut levels = vec![vec![self.add(format!("{tag}t"), a, bottom_m + e)]];
        for i in 1..e {
            let m = bottom_m + e - i;
            levels.push(vec![
                self.add(format!("{tag}{i}a"), a, m),
                self.add(format!("{tag}{i}b"), a, m),
            ]);
        }
        levels.push(bottom);
        for w in levels.windows(2) {
            for &x in &w[0] {
                for &y in &w[1] {
                    self.arrow(x, y, 0, 0);
                }
            }
        }
        levels
    }
}

/// `V` exponents on the wire arrow from `L_k` to `L_{k+1}`; `from_a` and
/// `to_a` say which member of each layer is meant.
fn wire_tag(k: u32, from_a: bool, to_a: bool) -> (u32, u32) {
    let first = if k.is_multiple_of(2) { to_a } else { !from_a };
    if first {
        (1, 0)
    } else {
        (0, 1)
    }
}

fn layers(b: &mut Builder, w: u32) -> Vec<[usize; 2]> {
    (0..=w)
        .map(|k| {
            let k = k as i64;
            [b.add(format!("a{k}"), k, k), b.add(format!("b{k}"), k, k)]
        })
        .collect()
}

fn link(b: &mut Builder, ls: &[[usize; 2]]) {
    for (k, pair) in ls.windows(2).enumerate() {
        for (i, &x) in pair[0].iter().enumerate() {
            for (j, &y) in pair[1].iter().enumerate() {
                let (o0, o1) = wire_tag(k as u32, i == 0, j == 0);
                b.arrow(x, y, o0, o1);
            }
        }
    }
}

impl ModelComplex {
    pub fn pole(e: u32) -> Self {
        let mut b = Builder::default();
        if e == 0 {
            let t = b.add("t".into(), 0, 0);
            return b.finish(ModelKind::Pole(0), vec![vec![vec![t]]]);
        }
        let bottom = vec![b.add(format!("{e}a"), 0, 0), b.add(format!("{e}b"), 0, 0)];
        let levels = b.pole("", e, 0, 0, bottom);
        b.finish(ModelKind::Pole(e), vec![levels])
    }

    pub fn wire(w: u32) -> Result<Self, ModelError> {
        if w == 0 {
            return Err(ModelError::EmptyWire);
        }
        let mut b = Builder::default();
        let ls = layers(&mut b, w);
        link(&mut b, &ls);
        Ok(b.finish(ModelKind::Wire(w), vec![]))
    }

    pub fn fused(e: u32, w: u32) -> Result<Self, ModelError> {
        if w == 0 {
            return Err(ModelError::EmptyWire);
        }
        let mut b = Builder::default();
        if e > 0 {
            let ls = layers(&mut b, w);
            link(&mut b, &ls);
            let wi = w as i64;
            let left = b.pole("l", e, 0, 0, ls[0].to_vec());
            let right = b.pole("r", e, wi, wi, ls[w as usize].to_vec());
            return Ok(b.finish(ModelKind::Fused(e, w), vec![left, right]));
        }
        // the end layers shrink to one generator each
        let mut ls: Vec<Vec<usize>> = Vec::new();
        for k in 0..=w as i64 {
            if k == 0 || k == w as i64 {
                ls.push(vec![b.add(format!("b{k}"), k, k)]);
            } else {
                ls.push(vec![
                    b.add(format!("a{k}"), k, k),
                    b.add(format!("b{k}"), k, k),
                ]);
            }
        }
        for k in 0..w as usize {
            // the left end plays b_0; the right end merges a_w and b_w
            let src: Vec<(usize, bool)> = if k == 0 {
                vec![(ls[0][0], false)]
            } else {
                vec![(ls[k][0], true), (ls[k][1], false)]
            };
            let dst: Vec<(usize, bool)> = if k + 1 == w as usize {
                let end = ls[w as usize][0];
                vec![(end, true), (end, false)]
            } else {
                vec![(ls[k + 1][0], true), (ls[k + 1][1], false)]
            };
            for &(x, xa) in &src {
                for &(y, ya) in &dst {
                    let (o0, o1) = wire_tag(k as u32, xa, ya);
                    b.arrow(x, y, o0, o1);
                }
            }
        }
        let poles = vec![vec![vec![ls[0][0]]], vec![vec![ls[w as usize][0]]]];
        Ok(b.finish(ModelKind::Fused(0, w), poles))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Lowers both poles by one: on the top level `a' = a + b`, then the
    /// pair `(top, a')` is cancelled.
    pub fn reduce_step(&self) -> Result<ModelComplex, ModelError> {
        let (e, w) = match self.kind {
            ModelKind::Fused(e, w) if e > 0 => (e, w),
            _ => return Err(ModelError::NoPole),
        };
        let mut arrows: BTreeMap<BiArrow, u32> = self.arrows.iter().map(|a| (*a, 1)).collect();
        let toggle = |m: &mut BTreeMap<BiArrow, u32>, a: BiArrow| {
            if m.remove(&a).is_none() {
                m.insert(a, 1);
            }
        };
        let mut dead = Vec::new();
        for pole in &self.poles {
            let top = pole[0][0];
            let (a, b) = (pole[1][0], pole[1][1]);
            // a' = a + b: arrows into a also hit b, arrows out of b also
            // leave a
            let snapshot: Vec<BiArrow> = arrows.keys().copied().collect();
            for &(x, y, o0, o1) in &snapshot {
                if y == a {
                    toggle(&mut arrows, (x, b, o0, o1));
                }
                if x == b {
                    toggle(&mut arrows, (a, y, o0, o1));
                }
            }
            let snapshot: Vec<BiArrow> = arrows.keys().copied().collect();
            let into: Vec<_> = snapshot.iter().filter(|t| t.1 == a && t.0 != top).collect();
            let out: Vec<_> = snapshot.iter().filter(|t| t.0 == top && t.1 != a).collect();
            for x in &into {
                for z in &out {
                    toggle(&mut arrows, (x.0, z.1, x.2 + z.2, x.3 + z.3));
                }
            }
            dead.push(top);
            dead.push(a);
        }
        let keep: Vec<usize> = (0..self.len()).filter(|i| !dead.contains(i)).collect();
        let new_index: BTreeMap<usize, usize> =
            keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let arrows = arrows
            .into_keys()
            .filter(|t| new_index.contains_key(&t.0) && new_index.contains_key(&t.1))
            .map(|t| (new_index[&t.0], new_index[&t.1], t.2, t.3))
            .collect();
        let poles = self
            .poles
            .iter()
            .map(|levels| {
                let mut rest: Vec<Vec<usize>> = levels[1..]
                    .iter()
                    .map(|l| l.iter().filter_map(|i| new_index.get(i).copied()).collect())
                    .collect();
                rest.retain(|l: &Vec<usize>| !l.is_empty());
                rest
            })
            .collect();
        Ok(ModelComplex {
            kind: ModelKind::Fused(e - 1, w),
            names: keep.iter().map(|&i| self.names[i].clone()).collect(),
            alexander: keep.iter().map(|&i| self.alexander[i]).collect(),
            maslov: keep.iter().map(|&i| self.maslov[i]).collect(),
            arrows,
            poles,
        })
    }

    /// Labels are `o0 * 256 + o1`, as for grid slices.
    pub fn bivariate_graph(&self) -> LabeledGraph {
        LabeledGraph {
            grades: (0..self.len())
                .map(|i| (q(self.alexander[i]), q(self.maslov[i])))
                .collect(),
            edges: self
                .arrows
                .iter()
                .map(|&(f, t, o0, o1)| (f, t, (o0 * 256 + o1) as u64))
                .collect(),
        }
    }

    /// `V0 = V1 = U`, duplicated arrows cancelling.
    pub fn specialize(&self) -> KnotComplex {
        let gens = (0..self.len())
            .map(|i| Generator::new(self.names[i].clone(), self.alexander[i], q(self.maslov[i])))
            .collect();
        KnotComplex::new(gens, self.arrows.iter().map(|a| (a.0, a.1, a.2 + a.3)))
            .expect("indices in range")
            .normalized()
    }

    /// The complex over `F[V0, V1]`.
    pub fn minus_complex(&self) -> MinusComplex {
        MinusComplex {
            gens: (0..self.len())
                .map(|i| (self.alexander[i], q(self.maslov[i])))
                .collect(),
            arrows: self
                .arrows
                .iter()
                .map(|&(f, t, o0, o1)| (f, t, vec![o0, o1]))
                .collect(),
            vars: 2,
        }
    }

    /// A thin knot-type complex with the model's invariants, in the knot's
    /// orientation and with Alexander mean `1/2` like a grid slice.
    ///
    /// As built, the model is the mirror. Centred at Alexander mean `-1/2`,
    /// its `F[V0, V1]` homology has its tower top at `(-τ', d' - 2τ')` for
    /// the mirror's `τ'` and `d'`; negating both and using the hat ranks of
    /// the specialized dual fixes the thin complex.
    pub fn knot_complex(&self) -> Result<KnotComplex, ComplexError> {
        let n = self.len() as i64;
        let sum: i64 = self.alexander.iter().sum();
        let shift = -Q::new(1, 2) - Q::new(sum, n);
        if !shift.is_integer() {
            return Err(ComplexError::Invalid(
                "Alexander gradings cannot be centred".into(),
            ));
        }
        let shift = shift.to_integer();
        let (a, m) = self
            .minus_complex()
            .tower_top()
            .ok_or(ComplexError::NotKnotType { rank: 0 })?;
        let mirror_tau = -(a + shift);
        let d = -(m + q(2 * mirror_tau));
        let k = self.specialize().dual().shifted(-shift, Q::default());
        thin_model_with(&k, d)
    }

    pub fn minus_profile(&self, depth: i64) -> Profile {
        self.minus_complex().profile(depth)
    }

    /// Generators with gradings and arrows with their `V0`, `V1` powers.
    pub fn to_json(&self) -> String {
        let kind = match self.kind {
            ModelKind::Pole(e) => serde_json::json!({"pole": e}),
            ModelKind::Wire(w) => serde_json::json!({"wire": w}),
            ModelKind::Fused(e, w) => serde_json::json!({"fused": [e, w]}),
        };
        let gens: Vec<_> = (0..self.len())
            .map(|i| serde_json::json!({"name": self.names[i], "a": self.alexander[i], "m": self.maslov[i]}))
            .collect();
        let arrows: Vec<_> = self
            .arrows
            .iter()
            .map(|&(f, t, o0, o1)| {
                serde_json::json!({"from": self.names[f], "to": self.names[t], "v0": o0, "v1": o1})
            })
            .collect();
        serde_json::to_string_pretty(
            &serde_json::json!({"kind": kind, "generators": gens, "arrows": arrows}),
        )
        .expect("json")
    }
}

/// Nonzero homology dimensions keyed by `(A, M)`, translated so the
/// largest key sits at `(0, 0)`.
pub type Profile = BTreeMap<(i64, Q), usize>;

fn monomials(vars: usize, deg: u32) -> Vec<Vec<u32>> {
    if vars == 1 {
        return vec![vec![deg]];
    }
    (0..=deg)
        .flat_map(|a| {
            monomials(vars - 1, deg - a).into_iter().map(move |mut m| {
                m.insert(0, a);
                m
            })
        })
        .collect()
}

/// A complex over `F[V_1, .., V_r]` where each variable lowers `A` by one
/// and `M` by two, and arrows `(from, to, exponents)` preserve `A` and
/// lower `M` by one.
#[derive(Clone, Debug)]
pub struct MinusComplex {
    pub gens: Vec<(i64, Q)>,
    pub arrows: Vec<(usize, usize, Vec<u32>)>,
    pub vars: usize,
}

type Term = (usize, Vec<u32>);

impl MinusComplex {
    /// Associated graded part of `k` over `F[U]`.
    pub fn from_knot(k: &KnotComplex) -> Self {
        let g = k.associated_graded();
        MinusComplex {
            gens: g
                .generators()
                .iter()
                .map(|x| (x.alexander, x.maslov))
                .collect(),
            arrows: g
                .arrows()
                .iter()
                .map(|a| (a.from, a.to, vec![a.m]))
                .collect(),
            vars: 1,
        }
    }

    pub fn dual(&self) -> Self {
        MinusComplex {
            gens: self.gens.iter().map(|&(a, m)| (-a, -m)).collect(),
            arrows: self
                .arrows
                .iter()
                .map(|(f, t, e)| (*t, *f, e.clone()))
                .collect(),
            vars: self.vars,
        }
    }

    fn top(&self) -> i64 {
        self.gens.iter().map(|g| g.0).max().unwrap_or(0)
    }

    fn span(&self) -> i64 {
        self.top() - self.gens.iter().map(|g| g.0).min().unwrap_or(0)
    }

    fn basis(&self, a: i64, m: Q) -> Vec<Term> {
        let mut out = Vec::new();
        for (i, g) in self.gens.iter().enumerate() {
            let d = g.0 - a;
            if d >= 0 && g.1 - q(2 * d) == m {
                for mono in monomials(self.vars, d as u32) {
                    out.push((i, mono));
                }
            }
        }
        out
    }

    fn image(&self, t: &Term, dst: &BTreeMap<&Term, usize>, len: usize) -> BitRow {
        let mut r = BitRow::zeros(len);
        for (_, to, e) in self.arrows.iter().filter(|ar| ar.0 == t.0) {
            let key = (*to, t.1.iter().zip(e).map(|(u, v)| u + v).collect());
            if let Some(&c) = dst.get(&key) {
                r.flip(c);
            }
        }
        r
    }

    fn differential(&self, a: i64, m: Q) -> (Vec<Term>, Vec<Term>, Vec<BitRow>) {
        let src = self.basis(a, m);
        let dst = self.basis(a, m - q(1));
        let index: BTreeMap<&Term, usize> = dst.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let rows = src
            .iter()
            .map(|t| self.image(t, &index, dst.len()))
            .collect();
        (src, dst, rows)
    }

    fn gradings_at(&self, a: i64) -> Vec<Q> {
        let mut ms: Vec<Q> = self
            .gens
            .iter()
            .filter(|g| g.0 >= a)
            .map(|g| g.1 - q(2 * (g.0 - a)))
            .collect();
        ms.sort();
        ms.dedup();
        ms
    }

    pub fn homology_dim(&self, a: i64, m: Q) -> usize {
        let (src, _, rows) = self.differential(a, m);
        let (_, _, above) = self.differential(a, m + q(1));
        src.len() - gf2::rank(&rows) - gf2::rank(&above)
    }

    /// Homology at Alexander gradings within `depth` of the highest one
    /// carrying homology, translated to put that point at `(0, 0)`.
    pub fn profile(&self, depth: i64) -> Profile {
        let top = self.top();
        let mut raw = Profile::new();
        for a in top - depth - self.span()..=top {
            for m in self.gradings_at(a) {
                let r = self.homology_dim(a, m);
                if r > 0 {
                    raw.insert((a, m), r);
                }
            }
        }
        let Some((&(ta, tm), _)) = raw.iter().max_by_key(|(k, _)| (k.0, k.1)) else {
            return raw;
        };
        raw.into_iter()
            .filter(|((a, _), _)| *a >= ta - depth)
            .map(|((a, m), v)| ((a - ta, m - tm), v))
            .collect()
    }

    /// Highest `(A, M)` carrying a class that survives multiplication by
    /// every power of the first variable.
    pub fn tower_top(&self) -> Option<(i64, Q)> {
        let k = (self.span() + 1) as u32;
        let top = self.top();
        for a in (top - self.span() - 1..=top).rev() {
            for m in self.gradings_at(a).into_iter().rev() {
                let (src, _, rows) = self.differential(a, m);
                let cycles = gf2::kernel(&rows);
                if cycles.is_empty() {
                    continue;
                }
                let (la, lm) = (a - k as i64, m - q(2 * k as i64));
                let target = self.basis(la, lm);
                let index: BTreeMap<&Term, usize> =
                    target.iter().enumerate().map(|(i, x)| (x, i)).collect();
                let (_, _, bnd) = self.differential(la, lm + q(1));
                let pushed: Vec<BitRow> = cycles
                    .iter()
                    .map(|c| {
                        let mut r = BitRow::zeros(target.len());
                        for i in c.ones() {
                            let mut mono = src[i].1.clone();
                            mono[0] += k;
                            r.flip(index[&(src[i].0, mono)]);
                        }
                        r
                    })
                    .collect();
                let mut all = bnd.clone();
                all.extend(pushed);
                if gf2::rank(&all) > gf2::rank(&bnd) {
                    return Some((a, m));
                }
            }
        }
        None
    }
}

/// `F[U]` homology of the associated graded complex of `k`.
pub fn knot_minus_profile(k: &KnotComplex, depth: i64) -> Profile {
    MinusComplex::from_knot(k).profile(depth)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// The model matched as built.
    Native,
    /// The model matched after dualizing.
    Dual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelMatch {
    pub orientation: Orientation,
    pub witness: IsoWitness,
}

/// Graded isomorphism between the specialized model and the associated
/// graded complex of `k`, up to one shift of each grading.
pub fn graded_iso_check(model: &ModelComplex, k: &KnotComplex) -> Option<ModelMatch> {
    let target = k.associated_graded().labeled_graph();
    let m = model.specialize();
    for (orientation, cand) in [
        (Orientation::Native, m.clone()),
        (Orientation::Dual, m.dual()),
    ] {
        if let Some(witness) = find_iso(&cand.labeled_graph(), &target, true) {
            return Some(ModelMatch {
                orientation,
                witness,
            });
        }
    }
    None
}

/// Isomorphism keeping `V0` and `V1` apart, against a grid slice in its
/// own orientation.
pub fn bivariate_iso_check(model: &ModelComplex, slice: &GridSlice) -> Option<IsoWitness> {
    find_iso(&model.bivariate_graph(), &slice.bivariate_graph(), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{correction_term, eliminate};
    use crate::grid::{assign_gradings, TwistedGrid};
    use crate::upsilon::{tau, upsilon_function};

    #[test]
    fn counts() {
        for e in 0..5u32 {
            let p = ModelComplex::pole(e);
            assert_eq!(p.len() as u32, 2 * e + 1);
            assert_eq!(p.arrows.len() as u32, if e == 0 { 0 } else { 4 * e - 2 });
            assert!(p.alexander.iter().all(|&a| a == 0));
        }
        for w in 1..5u32 {
            let c = ModelComplex::wire(w).unwrap();
            assert_eq!((c.len() as u32, c.arrows.len() as u32), (2 * w + 2, 4 * w));
            assert!(c.specialize().validate().is_empty());
            for e in 0..4u32 {
                let f = ModelComplex::fused(e, w).unwrap();
                assert_eq!(f.len() as u32, 2 * w + 4 * e);
            }
        }
        assert_eq!(ModelComplex::fused(3, 2).unwrap().len(), 16);
        assert!(ModelComplex::wire(0).is_err());
    }

    #[test]
    fn reduction_matches_direct() {
        for w in 1..6u32 {
            for e in 1..4u32 {
                let f = ModelComplex::fused(e, w).unwrap();
                let r = f.reduce_step().unwrap();
                let direct = ModelComplex::fused(e - 1, w).unwrap();
                assert_eq!(r.kind, direct.kind);
                assert!(
                    find_iso(&r.bivariate_graph(), &direct.bivariate_graph(), false).is_some(),
                    "e={e} w={w}"
                );
            }
        }
        assert_eq!(
            ModelComplex::fused(0, 3).unwrap().reduce_step(),
            Err(ModelError::NoPole)
        );
    }

    #[test]
    fn matches_grid() {
        for p in [3i64, 5, 7] {
            let g = TwistedGrid::new(p).unwrap();
            for h in -(p - 1) / 2..=(p - 1) / 2 {
                let e = h.unsigned_abs() as u32;
                let m = ModelComplex::fused(e, (p - 2 * h.abs()) as u32).unwrap();
                let s = assign_gradings(&g, h).unwrap();
                assert!(bivariate_iso_check(&m, &s).is_some(), "p={p} h={h}");
                let k = crate::grid::spinc_slice(&g, h).unwrap();
                let hit = graded_iso_check(&m, &k).expect("specialized match");
                assert_eq!(hit.orientation, Orientation::Dual);
            }
        }
    }

    #[test]
    fn invariants_match_grid() {
        for p in [3i64, 5, 7] {
            let n = (p - 1) / 2;
            let g = TwistedGrid::new(p).unwrap();
            for h in 0..=n {
                let w = (p - 2 * h) as u32;
                let grid = crate::grid::spinc_slice(&g, h).unwrap();
                let want = upsilon_function(&grid).unwrap();
                let mut m = ModelComplex::fused(h as u32, w).unwrap();
                loop {
                    let k = m.knot_complex().unwrap();
                    assert_eq!(
                        upsilon_function(&k).unwrap(),
                        want,
                        "p={p} h={h} {:?}",
                        m.kind
                    );
                    assert_eq!(tau(&k).unwrap(), q(n - h));
                    match m.reduce_step() {
                        Ok(next) => {
                            let d = correction_term(&next.knot_complex().unwrap()).unwrap();
                            assert_eq!(d, correction_term(&k).unwrap());
                            m = next;
                        }
                        Err(_) => break,
                    }
                }
            }
        }
    }

    #[test]
    fn doubled_after_specializing() {
        for w in [1u32, 3, 5] {
            for e in 0..3u32 {
                let k = ModelComplex::fused(e, w).unwrap().specialize();
                assert!(k.validate().is_empty());
                assert_eq!(eliminate(&k).len(), 2);
            }
        }
    }

    #[test]
    fn reduces_to_staircase() {
        use crate::grid::spinc_slice;
        use crate::oneone::torus_staircase;
        for p in [3i64, 5, 7, 9] {
            for h in 0..=(p - 1) / 2 {
                let w = (p - 2 * h) as u32;
                let mut m = ModelComplex::fused(h as u32, w).unwrap();
                for _ in 0..h {
                    m = m.reduce_step().unwrap();
                }
                let base = ModelComplex::fused(0, w).unwrap();
                assert!(find_iso(&m.bivariate_graph(), &base.bivariate_graph(), false).is_some());
                let st = if w == 1 {
                    KnotComplex::unknot()
                } else {
                    let small = TwistedGrid::new(w as i64).unwrap();
                    let s0 = spinc_slice(&small, 0).unwrap();
                    assert!(graded_iso_check(&m, &s0).is_some(), "p={p} h={h}");
                    torus_staircase((w - 1) / 2).unwrap()
                };
                let k = m.knot_complex().unwrap();
                assert_eq!(k.len(), st.len());
                assert!(
                    find_iso(&k.labeled_graph(), &st.labeled_graph(), true).is_some(),
                    "p={p} h={h}"
                );
                assert_eq!(
                    upsilon_function(&k).unwrap(),
                    upsilon_function(&st).unwrap()
                );
            }
        }
    }
}
